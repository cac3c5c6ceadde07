//! The generalized Pauli group `E_n` on `p`-dimensional qudits, stabilizer
//! codes and their parameters.
//!
//! An operator is kept in canonical form `ω^t X(a) Z(b)` with `t ∈ Z_p`,
//! where `X|i⟩ = |i+1 mod p⟩`, `Z|i⟩ = ω^i|i⟩` and `ω = exp(2πi/p)`.
//! Products follow `X(a)Z(b) · X(c)Z(d) = ω^{<b,c>} X(a+c) Z(b+d)`, so
//! `P Q = ω^{-<f(P), f(Q)>_s} Q P`.

use std::fmt;

use rand::Rng;

use crate::dense::{omega_pow, DenseMatrix};
use crate::error::{Error, Result};
use crate::gfp::{FpMatrix, FpScalar, FpVector, Modulus};
use crate::scalar::Real;
use crate::symplectic::{raw_product, EnumerationBudget, SymplecticCode, SymplecticVector};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    phase: u8,
    vector: SymplecticVector,
}

impl PauliOperator {
    /// `ω^phase X(x) Z(z)`; exponents are reduced mod p.
    pub fn new(modulus: Modulus, phase: i64, x: &[i64], z: &[i64]) -> Result<Self> {
        let vector = SymplecticVector::new(
            FpVector::from_ints(modulus, x),
            FpVector::from_ints(modulus, z),
        )?;
        Ok(PauliOperator {
            phase: modulus.reduce(phase),
            vector,
        })
    }

    pub fn identity(modulus: Modulus, n: usize) -> Self {
        PauliOperator {
            phase: 0,
            vector: SymplecticVector::zero(modulus, n),
        }
    }

    /// `X^x Z^z` acting on 0-based position `q` of `n` qudits.
    pub fn single(modulus: Modulus, n: usize, q: usize, x: i64, z: i64) -> Self {
        let mut xs = vec![0; n];
        let mut zs = vec![0; n];
        xs[q] = x;
        zs[q] = z;
        Self::new(modulus, 0, &xs, &zs).expect("consistent lengths")
    }

    /// Inverse of the f-map: attaches a phase to a symplectic vector.
    pub fn from_vector(vector: SymplecticVector, phase: i64) -> Self {
        let phase = vector.modulus().reduce(phase);
        PauliOperator { phase, vector }
    }

    /// The f-map `ω^t M(a|b) ↦ (a|b)`; discards the phase.
    pub fn to_vector(&self) -> &SymplecticVector {
        &self.vector
    }

    pub fn n(&self) -> usize {
        self.vector.n()
    }

    pub fn modulus(&self) -> Modulus {
        self.vector.modulus()
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn x_part(&self) -> &[u8] {
        self.vector.x_part()
    }

    pub fn z_part(&self) -> &[u8] {
        self.vector.z_part()
    }

    pub fn weight(&self) -> usize {
        self.vector.weight()
    }

    pub fn is_identity(&self) -> bool {
        self.phase == 0 && self.vector.is_zero()
    }

    fn check_compatible(&self, other: &PauliOperator) -> Result<()> {
        if self.modulus() != other.modulus() {
            return Err(Error::ModulusMismatch(
                self.modulus().get(),
                other.modulus().get(),
            ));
        }
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch(format!(
                "Pauli operators on {} and {} qudits",
                self.n(),
                other.n()
            )));
        }
        Ok(())
    }

    /// Canonical form of the matrix product `self · other`.
    pub fn mul(&self, other: &PauliOperator) -> Result<PauliOperator> {
        self.check_compatible(other)?;
        let p = self.modulus();
        let cross = p.dot(self.z_part(), other.x_part());
        let phase = p.add(p.add(self.phase, other.phase), cross);
        Ok(PauliOperator {
            phase,
            vector: self.vector.add(&other.vector)?,
        })
    }

    /// `self^e` in canonical form.
    pub fn pow(&self, e: u32) -> PauliOperator {
        let mut acc = PauliOperator::identity(self.modulus(), self.n());
        for _ in 0..e {
            acc = acc.mul(self).expect("same shape");
        }
        acc
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &PauliOperator) -> Result<PauliOperator> {
        if self.modulus() != other.modulus() {
            return Err(Error::ModulusMismatch(
                self.modulus().get(),
                other.modulus().get(),
            ));
        }
        let p = self.modulus();
        let x: Vec<u8> = self
            .x_part()
            .iter()
            .chain(other.x_part())
            .copied()
            .collect();
        let z: Vec<u8> = self
            .z_part()
            .iter()
            .chain(other.z_part())
            .copied()
            .collect();
        Ok(PauliOperator {
            phase: p.add(self.phase, other.phase),
            vector: SymplecticVector::new(
                FpVector::from_residues(p, x)?,
                FpVector::from_residues(p, z)?,
            )?,
        })
    }

    /// Dense `p^n × p^n` matrix; qudit 0 is the most significant digit.
    pub fn to_dense<T: Real>(&self) -> DenseMatrix<T> {
        let p = self.modulus().as_usize();
        let n = self.n();
        let dim = p.pow(n as u32);
        let mut m = DenseMatrix::zeros(dim, dim);
        for col in 0..dim {
            // X(a)Z(b)|j⟩ = ω^{b·j} |j + a⟩
            let mut row = 0;
            let mut phase = self.phase as i64;
            let mut rest = col;
            let mut digits = vec![0usize; n];
            for q in (0..n).rev() {
                digits[q] = rest % p;
                rest /= p;
            }
            for q in 0..n {
                phase += self.z_part()[q] as i64 * digits[q] as i64;
                row = row * p + (digits[q] + self.x_part()[q] as usize) % p;
            }
            m.set(row, col, omega_pow(p as u8, phase));
        }
        m
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.phase != 0 {
            write!(f, "w^{} ", self.phase)?;
        }
        let parts: Vec<String> = (0..self.n())
            .map(|q| {
                let (x, z) = (self.x_part()[q], self.z_part()[q]);
                match (x, z) {
                    (0, 0) => "I".to_string(),
                    (x, 0) => format!("X{x}"),
                    (0, z) => format!("Z{z}"),
                    (x, z) => format!("X{x}Z{z}"),
                }
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// The exponent `e` with `P·Q = ω^e Q·P`, namely `-<f(P), f(Q)>_s`.
pub fn commutation_exponent(p_op: &PauliOperator, q_op: &PauliOperator) -> Result<FpScalar> {
    p_op.check_compatible(q_op)?;
    let m = p_op.modulus();
    let s = raw_product(m, p_op.vector.as_slice(), q_op.vector.as_slice(), p_op.n());
    Ok(FpScalar::new(-(s as i64), m))
}

/// Pairwise commutation exponents of a list of operators.
pub fn commutation_matrix(ops: &[PauliOperator]) -> Result<Vec<Vec<u8>>> {
    ops.iter()
        .map(|a| {
            ops.iter()
                .map(|b| commutation_exponent(a, b).map(|e| e.value()))
                .collect()
        })
        .collect()
}

/// A validated stabilizer code: independent, pairwise commuting generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerCode {
    n: usize,
    check: FpMatrix,
}

impl StabilizerCode {
    /// Accepts `check` (shape `r × 2n`) iff its rows pairwise commute and are
    /// linearly independent.
    pub fn validate(check: FpMatrix, n: usize) -> Result<Self> {
        if check.cols() != 2 * n {
            return Err(Error::DimensionMismatch(format!(
                "check matrix has {} columns, expected 2n = {}",
                check.cols(),
                2 * n
            )));
        }
        let p = check.modulus();
        for a in 0..check.rows() {
            for b in a + 1..check.rows() {
                let product = raw_product(p, check.row(a), check.row(b), n);
                if product != 0 {
                    return Err(Error::NotCommutative {
                        first: a + 1,
                        second: b + 1,
                        product,
                    });
                }
            }
        }
        // independence, reported at the first redundant row
        SymplecticCode::new(n, check.clone())?;
        Ok(StabilizerCode { n, check })
    }

    /// A random stabilizer with `r` generators over F_p on `n` qudits.
    pub fn random<R: Rng + ?Sized>(modulus: Modulus, n: usize, r: usize, rng: &mut R) -> Self {
        assert!(r <= n, "an isotropic subspace has dimension at most n");
        let mut check = FpMatrix::zeros(modulus, 0, 2 * n);
        while check.rows() < r {
            let space = SymplecticCode::span(n, &check).expect("shape");
            // candidates: the symplectic complement of what we have so far
            let dual = space.symplectic_dual();
            let mut v = vec![0u8; 2 * n];
            for g in dual.generator_vectors() {
                let c = rng.random_range(0..modulus.get());
                for (k, &x) in g.as_slice().iter().enumerate() {
                    v[k] = modulus.add(v[k], modulus.mul(c, x));
                }
            }
            if !space.contains(&v) {
                check.push_row(&v);
            }
        }
        StabilizerCode { n, check }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.n - self.check.rows()
    }

    pub fn modulus(&self) -> Modulus {
        self.check.modulus()
    }

    pub fn check_matrix(&self) -> &FpMatrix {
        &self.check
    }

    pub fn num_generators(&self) -> usize {
        self.check.rows()
    }

    /// Generators `X(a_i)Z(b_i)` with phase 0, one per check row.
    pub fn generators(&self) -> Vec<PauliOperator> {
        (0..self.check.rows())
            .map(|r| PauliOperator {
                phase: 0,
                vector: SymplecticVector::from_coords(self.n, self.check.row_vector(r))
                    .expect("2n columns"),
            })
            .collect()
    }

    /// `f(S)`.
    pub fn stabilizer_space(&self) -> SymplecticCode {
        SymplecticCode::new(self.n, self.check.clone()).expect("validated rows")
    }

    /// `f(S)^⊥`, the image of the normalizer.
    pub fn normalizer_space(&self) -> SymplecticCode {
        self.stabilizer_space().symplectic_dual()
    }

    /// Minimum distance: least symplectic weight over `f(S)^⊥ \ f(S)`.
    pub fn code_distance(&self, budget: EnumerationBudget) -> Result<usize> {
        if self.k() == 0 {
            return Err(Error::NoLogicalQudits);
        }
        let normalizer = self.normalizer_space();
        let stab = self.stabilizer_space().reducer();
        let n = self.n;
        let mut best = usize::MAX;
        normalizer.for_each_nonzero_codeword(budget, |w| {
            let weight = crate::symplectic::symplectic_weight(w, n);
            if weight < best && !stab.contains(w) {
                best = weight;
            }
            best > 1
        })?;
        Ok(best)
    }
}

/// Code parameters `[[n, k, d]]_p`; `d` is absent when unknown.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodeParameters {
    pub n: usize,
    pub k: usize,
    pub d: Option<usize>,
    pub p: u8,
}

impl fmt::Display for CodeParameters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.d {
            Some(d) => write!(f, "[[{},{},{}]]_{}", self.n, self.k, d, self.p),
            None => write!(f, "[[{},{}]]_{}", self.n, self.k, self.p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn m(p: u32) -> Modulus {
        Modulus::new(p).unwrap()
    }

    fn xxxx_zzzz() -> StabilizerCode {
        let h = FpMatrix::from_rows(
            m(2),
            8,
            &[vec![1, 1, 1, 1, 0, 0, 0, 0], vec![0, 0, 0, 0, 1, 1, 1, 1]],
        )
        .unwrap();
        StabilizerCode::validate(h, 4).unwrap()
    }

    fn five_qubit() -> StabilizerCode {
        let h = FpMatrix::from_rows(
            m(2),
            10,
            &[
                vec![1, 0, 0, 1, 0, 0, 1, 1, 0, 0],
                vec![0, 1, 0, 0, 1, 0, 0, 1, 1, 0],
                vec![1, 0, 1, 0, 0, 0, 0, 0, 1, 1],
                vec![0, 1, 0, 1, 0, 1, 0, 0, 0, 1],
            ],
        )
        .unwrap();
        StabilizerCode::validate(h, 5).unwrap()
    }

    #[test]
    fn mul_identity_and_zx() {
        let p = m(3);
        let x = PauliOperator::single(p, 1, 0, 1, 0);
        let z = PauliOperator::single(p, 1, 0, 0, 1);
        assert_eq!(x.mul(&PauliOperator::identity(p, 1)).unwrap(), x);
        let zx = z.mul(&x).unwrap();
        assert_eq!(
            (zx.phase(), zx.x_part(), zx.z_part()),
            (1, &[1u8][..], &[1u8][..])
        );
    }

    #[test]
    fn mul_xxxx_zzzz_generators_against_dense() {
        let g = xxxx_zzzz().generators();
        let prod = g[0].mul(&g[1]).unwrap();
        assert_eq!(prod.phase(), 0);
        assert_eq!(prod.x_part(), &[1, 1, 1, 1]);
        assert_eq!(prod.z_part(), &[1, 1, 1, 1]);
        let dense = g[0].to_dense::<f64>().mul(&g[1].to_dense());
        assert!(dense.distance(&prod.to_dense()) < 1e-12);
    }

    #[test]
    fn commutation_examples() {
        let p = m(3);
        let x = PauliOperator::single(p, 1, 0, 1, 0);
        let z = PauliOperator::single(p, 1, 0, 0, 1);
        assert!(commutation_exponent(&x, &x).unwrap().is_zero());
        let e = commutation_exponent(&x, &z).unwrap().value();
        assert!(e == 1 || e == 2);
        let g = xxxx_zzzz().generators();
        assert!(commutation_exponent(&g[0], &g[1]).unwrap().is_zero());
    }

    #[test]
    fn f_map_examples() {
        assert!(PauliOperator::identity(m(2), 3).to_vector().is_zero());
        let g = xxxx_zzzz().generators();
        assert_eq!(g[0].to_vector().as_slice(), &[1, 1, 1, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn validate_examples() {
        let code = xxxx_zzzz();
        assert_eq!(code.k(), 2);

        let xz = FpMatrix::from_rows(m(2), 2, &[vec![1, 0], vec![0, 1]]).unwrap();
        assert!(matches!(
            StabilizerCode::validate(xz, 1),
            Err(Error::NotCommutative {
                first: 1,
                second: 2,
                ..
            })
        ));

        let empty = FpMatrix::zeros(m(2), 0, 6);
        assert_eq!(StabilizerCode::validate(empty, 3).unwrap().k(), 3);

        let dup = FpMatrix::from_rows(m(2), 4, &[vec![1, 1, 0, 0], vec![1, 1, 0, 0]]).unwrap();
        assert_eq!(
            StabilizerCode::validate(dup, 2),
            Err(Error::RowsDependent { row: 2 })
        );
    }

    #[test]
    fn distance_examples() {
        let b = EnumerationBudget::DEFAULT;
        assert_eq!(xxxx_zzzz().code_distance(b).unwrap(), 2);
        assert_eq!(five_qubit().code_distance(b).unwrap(), 3);
        let xx = FpMatrix::from_rows(m(2), 4, &[vec![1, 1, 0, 0]]).unwrap();
        assert_eq!(
            StabilizerCode::validate(xx, 2)
                .unwrap()
                .code_distance(b)
                .unwrap(),
            1
        );
        let empty = StabilizerCode::validate(FpMatrix::zeros(m(2), 0, 6), 3).unwrap();
        assert_eq!(empty.code_distance(b).unwrap(), 1);
    }

    #[test]
    fn distance_needs_logical_qudits() {
        let h = FpMatrix::from_rows(m(2), 2, &[vec![0, 1]]).unwrap();
        let code = StabilizerCode::validate(h, 1).unwrap();
        assert_eq!(
            code.code_distance(EnumerationBudget::DEFAULT),
            Err(Error::NoLogicalQudits)
        );
    }

    #[test]
    fn parameters_display() {
        let params = CodeParameters {
            n: 4,
            k: 2,
            d: Some(2),
            p: 2,
        };
        assert_eq!(params.to_string(), "[[4,2,2]]_2");
    }

    /// Group-level oracle: closure of the generators (plus ω·I) under
    /// multiplication, centralizer by literal commutation of products.
    fn distance_by_group_enumeration(code: &StabilizerCode) -> usize {
        let p = code.modulus();
        let n = code.n();
        let mut gens = code.generators();
        gens.push(PauliOperator::new(p, 1, &vec![0; n], &vec![0; n]).unwrap());
        let mut closure: HashSet<PauliOperator> = HashSet::new();
        let mut frontier = vec![PauliOperator::identity(p, n)];
        closure.insert(frontier[0].clone());
        while let Some(e) = frontier.pop() {
            for g in &gens {
                let next = e.mul(g).unwrap();
                if closure.insert(next.clone()) {
                    frontier.push(next);
                }
            }
        }
        let mut best = usize::MAX;
        let total = (p.get() as usize).pow(2 * n as u32);
        for idx in 0..total {
            let mut rest = idx;
            let mut coords = vec![0i64; 2 * n];
            for c in coords.iter_mut() {
                *c = (rest % p.as_usize()) as i64;
                rest /= p.as_usize();
            }
            for t in 0..p.get() as i64 {
                let op = PauliOperator::new(p, t, &coords[..n], &coords[n..]).unwrap();
                let commutes = code
                    .generators()
                    .iter()
                    .all(|g| op.mul(g).unwrap() == g.mul(&op).unwrap());
                if commutes && !closure.contains(&op) {
                    best = best.min(op.weight());
                }
            }
        }
        best
    }

    #[test]
    fn distance_matches_group_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(distance_by_group_enumeration(&xxxx_zzzz()), 2);
        for _ in 0..12 {
            let (p, n) = if rng.random_bool(0.5) { (2, 4) } else { (3, 3) };
            let r = rng.random_range(0..n);
            let code = StabilizerCode::random(m(p), n, r, &mut rng);
            assert_eq!(
                code.code_distance(EnumerationBudget::DEFAULT).unwrap(),
                distance_by_group_enumeration(&code),
                "code {:?}",
                code.check_matrix()
            );
        }
    }

    fn arb_pauli(p: u32, n: usize) -> impl Strategy<Value = PauliOperator> {
        (0..p as i64, prop::collection::vec(0..p as i64, 2 * n)).prop_map(move |(t, v)| {
            PauliOperator::new(Modulus::new(p).unwrap(), t, &v[..n], &v[n..]).unwrap()
        })
    }

    fn arb_pair() -> impl Strategy<Value = (PauliOperator, PauliOperator)> {
        (prop::sample::select(vec![2u32, 3]), 1usize..=3)
            .prop_flat_map(|(p, n)| (arb_pauli(p, n), arb_pauli(p, n)))
    }

    proptest! {
        #[test]
        fn mul_matches_dense((a, b) in arb_pair()) {
            let prod = a.mul(&b).unwrap();
            let dense = a.to_dense::<f64>().mul(&b.to_dense());
            prop_assert!(dense.distance(&prod.to_dense()) < 1e-12);
        }

        #[test]
        fn commutation_matches_dense((a, b) in arb_pair()) {
            let e = commutation_exponent(&a, &b).unwrap().value();
            let ab = a.to_dense::<f64>().mul(&b.to_dense());
            let ba = b.to_dense::<f64>().mul(&a.to_dense());
            let w = omega_pow::<f64>(a.modulus().get(), e as i64);
            prop_assert!(ab.distance(&ba.scale(w)) < 1e-12);
        }

        #[test]
        fn f_is_a_homomorphism((a, b) in arb_pair()) {
            let prod = a.mul(&b).unwrap();
            prop_assert_eq!(prod.to_vector(), &a.to_vector().add(b.to_vector()).unwrap());
        }

        #[test]
        fn f_roundtrip((a, _b) in arb_pair(), t in 0i64..3) {
            let back = PauliOperator::from_vector(a.to_vector().clone(), t);
            prop_assert_eq!(back.to_vector(), a.to_vector());
        }

        #[test]
        fn random_codes_are_valid(seed in any::<u64>(), p in prop::sample::select(vec![2u32, 3, 5]), n in 1usize..=5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = rng.random_range(0..=n);
            let code = StabilizerCode::random(m(p), n, r, &mut rng);
            let again = StabilizerCode::validate(code.check_matrix().clone(), n).unwrap();
            prop_assert_eq!(again.k(), n - r);
            let stab = code.stabilizer_space();
            let normalizer = code.normalizer_space();
            for g in stab.generator_vectors() {
                prop_assert!(normalizer.contains(g.as_slice()));
            }
        }
    }
}
