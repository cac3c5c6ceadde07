//! The symplectic space F_p^{2n}: inner product, duals, shortening,
//! puncturing and exhaustive minimum symplectic weight.

use std::fmt;

use crate::error::{Error, Result};
use crate::gfp::{FpMatrix, FpScalar, FpVector, Modulus};
use crate::shares::ShareSet;

/// Cap on the number of codewords an exhaustive scan may visit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationBudget(pub u128);

impl EnumerationBudget {
    pub const DEFAULT: EnumerationBudget = EnumerationBudget(1 << 20);

    /// Fails unless `p^dim` codewords fit in the budget.
    pub fn check(self, modulus: Modulus, dim: usize) -> Result<u128> {
        let mut required: u128 = 1;
        for _ in 0..dim {
            required = required.saturating_mul(modulus.get() as u128);
            if required > self.0 {
                return Err(Error::EnumerationLimit {
                    required: (modulus.get() as u128).saturating_pow(dim as u32),
                    budget: self.0,
                });
            }
        }
        Ok(required)
    }
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// A vector `(a | b)` of F_p^{2n}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymplecticVector {
    n: usize,
    coords: FpVector,
}

impl SymplecticVector {
    pub fn new(x_part: FpVector, z_part: FpVector) -> Result<Self> {
        if x_part.modulus() != z_part.modulus() {
            return Err(Error::ModulusMismatch(
                x_part.modulus().get(),
                z_part.modulus().get(),
            ));
        }
        if x_part.len() != z_part.len() {
            return Err(Error::DimensionMismatch(format!(
                "x-part length {} vs z-part length {}",
                x_part.len(),
                z_part.len()
            )));
        }
        let n = x_part.len();
        let modulus = x_part.modulus();
        let mut entries = x_part.into_inner();
        entries.extend(z_part.into_inner());
        Ok(SymplecticVector {
            n,
            coords: FpVector::from_residues(modulus, entries)?,
        })
    }

    pub fn from_coords(n: usize, coords: FpVector) -> Result<Self> {
        if coords.len() != 2 * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coordinates, got {}",
                2 * n,
                coords.len()
            )));
        }
        Ok(SymplecticVector { n, coords })
    }

    pub fn zero(modulus: Modulus, n: usize) -> Self {
        SymplecticVector {
            n,
            coords: FpVector::zeros(modulus, 2 * n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> Modulus {
        self.coords.modulus()
    }

    pub fn coords(&self) -> &FpVector {
        &self.coords
    }

    pub fn as_slice(&self) -> &[u8] {
        self.coords.as_slice()
    }

    pub fn x_part(&self) -> &[u8] {
        &self.coords.as_slice()[..self.n]
    }

    pub fn z_part(&self) -> &[u8] {
        &self.coords.as_slice()[self.n..]
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_zero()
    }

    /// Number of positions `i` with `(a_i, b_i) != (0, 0)`.
    pub fn weight(&self) -> usize {
        symplectic_weight(self.as_slice(), self.n)
    }

    /// 0-based positions in the support.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| self.x_part()[i] != 0 || self.z_part()[i] != 0)
            .collect()
    }

    pub fn add(&self, other: &SymplecticVector) -> Result<SymplecticVector> {
        Ok(SymplecticVector {
            n: self.n,
            coords: self.coords.add(&other.coords)?,
        })
    }

    pub fn scale(&self, s: u8) -> SymplecticVector {
        SymplecticVector {
            n: self.n,
            coords: self.coords.scale(s),
        }
    }
}

impl fmt::Display for SymplecticVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x: String = self.x_part().iter().map(|v| v.to_string()).collect();
        let z: String = self.z_part().iter().map(|v| v.to_string()).collect();
        write!(f, "({x}|{z})")
    }
}

/// Symplectic weight of raw coordinates `(a | b)` with `a, b` of length `n`.
#[inline]
pub fn symplectic_weight(coords: &[u8], n: usize) -> usize {
    (0..n)
        .filter(|&i| coords[i] != 0 || coords[n + i] != 0)
        .count()
}

/// `<a, d> - <b, c>` on raw coordinates.
pub(crate) fn raw_product(modulus: Modulus, u: &[u8], v: &[u8], n: usize) -> u8 {
    let ad = modulus.dot(&u[..n], &v[n..]);
    let bc = modulus.dot(&u[n..], &v[..n]);
    modulus.sub(ad, bc)
}

/// The symplectic inner product `<(a|b), (c|d)>_s = <a,d> - <b,c>`.
pub fn symplectic_product(u: &SymplecticVector, v: &SymplecticVector) -> Result<FpScalar> {
    if u.modulus() != v.modulus() {
        return Err(Error::ModulusMismatch(u.modulus().get(), v.modulus().get()));
    }
    if u.n != v.n {
        return Err(Error::DimensionMismatch(format!(
            "symplectic vectors on {} and {} positions",
            u.n, v.n
        )));
    }
    let p = u.modulus();
    Ok(FpScalar::new(
        raw_product(p, u.as_slice(), v.as_slice(), u.n) as i64,
        p,
    ))
}

/// Membership test against a fixed row space, reusing one RREF.
#[derive(Clone, Debug)]
pub struct SpanReducer {
    basis: FpMatrix,
    pivots: Vec<usize>,
}

impl SpanReducer {
    pub fn new(rows: &FpMatrix) -> Self {
        let r = rows.rref();
        SpanReducer {
            basis: r.reduced.select_rows(&(0..r.rank).collect::<Vec<_>>()),
            pivots: r.pivot_columns,
        }
    }

    /// Reduces `v` against the basis; the remainder is zero iff `v` is in the span.
    pub fn remainder(&self, v: &[u8]) -> Vec<u8> {
        let p = self.basis.modulus();
        let mut w = v.to_vec();
        for (r, &c) in self.pivots.iter().enumerate() {
            let f = w[c];
            if f != 0 {
                for (k, &b) in self.basis.row(r).iter().enumerate() {
                    if b != 0 {
                        w[k] = p.sub(w[k], p.mul(f, b));
                    }
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        self.remainder(v).iter().all(|&x| x == 0)
    }
}

/// An F_p-linear subspace of F_p^{2n}, held as independent generator rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymplecticCode {
    n: usize,
    generators: FpMatrix,
}

impl SymplecticCode {
    /// Wraps independent generator rows; fails with `RowsDependent` otherwise.
    pub fn new(n: usize, generators: FpMatrix) -> Result<Self> {
        if generators.cols() != 2 * n {
            return Err(Error::DimensionMismatch(format!(
                "generators have {} columns, expected {}",
                generators.cols(),
                2 * n
            )));
        }
        let mut seen = FpMatrix::zeros(generators.modulus(), 0, 2 * n);
        for r in 0..generators.rows() {
            seen.push_row(generators.row(r));
            if seen.rank() < r + 1 {
                return Err(Error::RowsDependent { row: r + 1 });
            }
        }
        Ok(SymplecticCode { n, generators })
    }

    /// The span of arbitrary rows, reduced to a canonical basis.
    pub fn span(n: usize, rows: &FpMatrix) -> Result<Self> {
        if rows.cols() != 2 * n {
            return Err(Error::DimensionMismatch(format!(
                "rows have {} columns, expected {}",
                rows.cols(),
                2 * n
            )));
        }
        Ok(SymplecticCode {
            n,
            generators: rows.row_basis(),
        })
    }

    pub fn zero(modulus: Modulus, n: usize) -> Self {
        SymplecticCode {
            n,
            generators: FpMatrix::zeros(modulus, 0, 2 * n),
        }
    }

    pub fn full(modulus: Modulus, n: usize) -> Self {
        SymplecticCode {
            n,
            generators: FpMatrix::identity(modulus, 2 * n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> Modulus {
        self.generators.modulus()
    }

    pub fn dim(&self) -> usize {
        self.generators.rows()
    }

    pub fn generators(&self) -> &FpMatrix {
        &self.generators
    }

    pub fn generator_vectors(&self) -> Vec<SymplecticVector> {
        (0..self.dim())
            .map(|r| SymplecticVector {
                n: self.n,
                coords: self.generators.row_vector(r),
            })
            .collect()
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        v.len() == 2 * self.n && self.generators.row_space_contains(v)
    }

    pub fn reducer(&self) -> SpanReducer {
        SpanReducer::new(&self.generators)
    }

    /// Same subspace, regardless of the chosen generators.
    pub fn same_space(&self, other: &SymplecticCode) -> bool {
        self.n == other.n && self.generators.same_row_space(&other.generators)
    }

    /// Matrix whose kernel is the symplectic dual: rows `(-H_Z | H_X)`.
    fn dual_constraints(&self) -> FpMatrix {
        let p = self.modulus();
        let n = self.n;
        let mut m = FpMatrix::zeros(p, self.dim(), 2 * n);
        for r in 0..self.dim() {
            let row = self.generators.row(r);
            for i in 0..n {
                m.set(r, i, p.neg(row[n + i]));
                m.set(r, n + i, row[i]);
            }
        }
        m
    }

    /// `C^⊥ = { v : <v, c>_s = 0 for all c in C }`.
    pub fn symplectic_dual(&self) -> SymplecticCode {
        SymplecticCode {
            n: self.n,
            generators: self.dual_constraints().kernel().row_basis(),
        }
    }

    /// Codewords vanishing on every coordinate owned by `j`, with those
    /// coordinates removed.
    pub fn shorten(&self, j: &ShareSet) -> Result<SymplecticCode> {
        self.check_shares(j)?;
        if j.is_empty() {
            return Ok(self.clone());
        }
        let owned = j.owned_columns();
        // coefficient vectors alpha with (alpha · G) zero on the owned columns
        let restricted = self.generators.select_columns(&owned);
        let coeffs = restricted.transpose().kernel();
        let combos = coeffs.mul(&self.generators)?;
        let keep = self.kept_columns(j);
        SymplecticCode::span(self.n - j.len(), &combos.select_columns(&keep))
    }

    /// Every codeword with the coordinates owned by `j` deleted.
    pub fn puncture(&self, j: &ShareSet) -> Result<SymplecticCode> {
        self.check_shares(j)?;
        if j.is_empty() {
            return Ok(self.clone());
        }
        let keep = self.kept_columns(j);
        SymplecticCode::span(self.n - j.len(), &self.generators.select_columns(&keep))
    }

    fn kept_columns(&self, j: &ShareSet) -> Vec<usize> {
        let rest: Vec<usize> = j.complement().positions().collect();
        rest.iter()
            .copied()
            .chain(rest.iter().map(|q| q + self.n))
            .collect()
    }

    fn check_shares(&self, j: &ShareSet) -> Result<()> {
        if j.n() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "share set over {} shares applied to a code on {}",
                j.n(),
                self.n
            )));
        }
        Ok(())
    }

    /// Calls `visit` on every nonzero codeword. Stops early when `visit`
    /// returns `false`.
    pub fn for_each_nonzero_codeword(
        &self,
        budget: EnumerationBudget,
        mut visit: impl FnMut(&[u8]) -> bool,
    ) -> Result<()> {
        let dim = self.dim();
        budget.check(self.modulus(), dim)?;
        let p = self.modulus();
        let width = 2 * self.n;
        let mut digits = vec![0u8; dim];
        let mut word = vec![0u8; width];
        loop {
            // odometer step: every digit that ticks adds its row once
            let mut i = 0;
            loop {
                if i == dim {
                    return Ok(());
                }
                let row = self.generators.row(i);
                for c in 0..width {
                    word[c] = p.add(word[c], row[c]);
                }
                digits[i] += 1;
                if digits[i] == p.get() {
                    digits[i] = 0;
                    i += 1;
                } else {
                    break;
                }
            }
            if !visit(&word) {
                return Ok(());
            }
        }
    }

    /// Exact `d_min(C)`: minimum symplectic weight over nonzero codewords.
    pub fn min_symplectic_weight(&self, budget: EnumerationBudget) -> Result<usize> {
        if self.dim() == 0 {
            return Err(Error::DimensionMismatch(
                "minimum weight of the zero space is undefined".into(),
            ));
        }
        let n = self.n;
        let mut best = usize::MAX;
        self.for_each_nonzero_codeword(budget, |w| {
            best = best.min(symplectic_weight(w, n));
            best > 1
        })?;
        Ok(best)
    }
}
