//! Arithmetic and linear algebra over a small prime field F_p.
//!
//! Entries are stored as `u8` residues in `[0, p)`. Elimination is fully
//! deterministic: the pivot for a column is the first unsettled row with a
//! nonzero entry, and pivots are scaled to 1.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// A prime modulus from the supported set {2, 3, 5, 7}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Modulus(u8);

impl Modulus {
    pub const SUPPORTED: [u8; 4] = [2, 3, 5, 7];

    pub fn new(p: u32) -> Result<Self> {
        match u8::try_from(p) {
            Ok(small) if Self::SUPPORTED.contains(&small) => Ok(Modulus(small)),
            _ => Err(Error::UnsupportedModulus(p)),
        }
    }

    #[inline]
    pub fn get(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn as_usize(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn reduce(self, v: i64) -> u8 {
        v.rem_euclid(self.0 as i64) as u8
    }

    #[inline]
    pub fn add(self, a: u8, b: u8) -> u8 {
        ((a as u16 + b as u16) % self.0 as u16) as u8
    }

    #[inline]
    pub fn sub(self, a: u8, b: u8) -> u8 {
        ((a as u16 + self.0 as u16 - b as u16) % self.0 as u16) as u8
    }

    #[inline]
    pub fn mul(self, a: u8, b: u8) -> u8 {
        ((a as u16 * b as u16) % self.0 as u16) as u8
    }

    #[inline]
    pub fn neg(self, a: u8) -> u8 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(self, a: u8) -> Option<u8> {
        if a.is_multiple_of(self.0) {
            return None;
        }
        // a^(p-2) by Fermat
        Some(self.pow(a, self.0 as u32 - 2))
    }

    pub fn pow(self, a: u8, mut e: u32) -> u8 {
        let mut base = a % self.0;
        let mut acc = 1 % self.0;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Euclidean dot product of two equal-length residue slices.
    pub fn dot(self, a: &[u8], b: &[u8]) -> u8 {
        debug_assert_eq!(a.len(), b.len());
        let acc: u32 = a.iter().zip(b).map(|(&x, &y)| x as u32 * y as u32).sum();
        (acc % self.0 as u32) as u8
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An element of F_p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FpScalar {
    value: u8,
    modulus: Modulus,
}

impl FpScalar {
    pub fn new(value: i64, modulus: Modulus) -> Self {
        FpScalar {
            value: modulus.reduce(value),
            modulus,
        }
    }

    pub fn zero(modulus: Modulus) -> Self {
        FpScalar { value: 0, modulus }
    }

    pub fn value(self) -> u8 {
        self.value
    }

    pub fn modulus(self) -> Modulus {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inv(self) -> Option<Self> {
        self.modulus.inv(self.value).map(|value| FpScalar {
            value,
            modulus: self.modulus,
        })
    }
}

impl fmt::Display for FpScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for FpScalar {
    type Output = FpScalar;
    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.modulus, rhs.modulus, "modulus mismatch");
        FpScalar {
            value: self.modulus.add(self.value, rhs.value),
            modulus: self.modulus,
        }
    }
}

impl Sub for FpScalar {
    type Output = FpScalar;
    fn sub(self, rhs: Self) -> Self {
        assert_eq!(self.modulus, rhs.modulus, "modulus mismatch");
        FpScalar {
            value: self.modulus.sub(self.value, rhs.value),
            modulus: self.modulus,
        }
    }
}

impl Mul for FpScalar {
    type Output = FpScalar;
    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.modulus, rhs.modulus, "modulus mismatch");
        FpScalar {
            value: self.modulus.mul(self.value, rhs.value),
            modulus: self.modulus,
        }
    }
}

impl Neg for FpScalar {
    type Output = FpScalar;
    fn neg(self) -> Self {
        FpScalar {
            value: self.modulus.neg(self.value),
            modulus: self.modulus,
        }
    }
}

/// A vector over F_p.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FpVector {
    modulus: Modulus,
    entries: Vec<u8>,
}

impl FpVector {
    pub fn zeros(modulus: Modulus, len: usize) -> Self {
        FpVector {
            modulus,
            entries: vec![0; len],
        }
    }

    /// Builds a vector from residues, rejecting values outside `[0, p)`.
    pub fn from_residues(modulus: Modulus, entries: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = entries.iter().find(|&&v| v >= modulus.get()) {
            return Err(Error::OutOfRange {
                value: bad as i64,
                modulus: modulus.get(),
            });
        }
        Ok(FpVector { modulus, entries })
    }

    /// Builds a vector from arbitrary integers, reducing mod p.
    pub fn from_ints(modulus: Modulus, values: &[i64]) -> Self {
        FpVector {
            modulus,
            entries: values.iter().map(|&v| modulus.reduce(v)).collect(),
        }
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.entries
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.entries
    }

    pub fn get(&self, i: usize) -> FpScalar {
        FpScalar {
            value: self.entries[i],
            modulus: self.modulus,
        }
    }

    pub fn set(&mut self, i: usize, value: u8) {
        self.entries[i] = value % self.modulus.get();
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0)
    }

    pub fn dot(&self, other: &FpVector) -> Result<FpScalar> {
        self.check_compatible(other)?;
        Ok(FpScalar {
            value: self.modulus.dot(&self.entries, &other.entries),
            modulus: self.modulus,
        })
    }

    pub fn add(&self, other: &FpVector) -> Result<FpVector> {
        self.check_compatible(other)?;
        let p = self.modulus;
        Ok(FpVector {
            modulus: p,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| p.add(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, s: u8) -> FpVector {
        let p = self.modulus;
        FpVector {
            modulus: p,
            entries: self.entries.iter().map(|&a| p.mul(a, s)).collect(),
        }
    }

    fn check_compatible(&self, other: &FpVector) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(
                self.modulus.get(),
                other.modulus.get(),
            ));
        }
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "vector lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }
}

/// Output of [`FpMatrix::rref`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub reduced: FpMatrix,
    pub rank: usize,
    pub pivot_columns: Vec<usize>,
}

/// A dense row-major matrix over F_p.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FpMatrix {
    modulus: Modulus,
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl FpMatrix {
    pub fn zeros(modulus: Modulus, rows: usize, cols: usize) -> Self {
        FpMatrix {
            modulus,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(modulus: Modulus, n: usize) -> Self {
        let mut m = Self::zeros(modulus, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from residue rows. All rows must have length `cols`.
    pub fn from_rows(modulus: Modulus, cols: usize, rows: &[Vec<u8>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {} has length {}, expected {}",
                    i + 1,
                    row.len(),
                    cols
                )));
            }
            if let Some(&bad) = row.iter().find(|&&v| v >= modulus.get()) {
                return Err(Error::OutOfRange {
                    value: bad as i64,
                    modulus: modulus.get(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(FpMatrix {
            modulus,
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds a matrix from integer rows, reducing mod p.
    pub fn from_int_rows(modulus: Modulus, cols: usize, rows: &[Vec<i64>]) -> Result<Self> {
        let reduced: Vec<Vec<u8>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| modulus.reduce(v)).collect())
            .collect();
        Self::from_rows(modulus, cols, &reduced)
    }

    pub fn from_vectors(modulus: Modulus, cols: usize, rows: &[FpVector]) -> Result<Self> {
        let raw: Vec<Vec<u8>> = rows.iter().map(|v| v.as_slice().to_vec()).collect();
        Self::from_rows(modulus, cols, &raw)
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u8) {
        self.data[r * self.cols + c] = v % self.modulus.get();
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vector(&self, r: usize) -> FpVector {
        FpVector {
            modulus: self.modulus,
            entries: self.row(r).to_vec(),
        }
    }

    pub fn row_vectors(&self) -> Vec<FpVector> {
        (0..self.rows).map(|r| self.row_vector(r)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut t = FpMatrix::zeros(self.modulus, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn mul(&self, rhs: &FpMatrix) -> Result<FpMatrix> {
        if self.modulus != rhs.modulus {
            return Err(Error::ModulusMismatch(
                self.modulus.get(),
                rhs.modulus.get(),
            ));
        }
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let p = self.modulus.get() as u32;
        let mut out = FpMatrix::zeros(self.modulus, self.rows, rhs.cols);
        for r in 0..self.rows {
            for c in 0..rhs.cols {
                let acc: u32 = (0..self.cols)
                    .map(|i| self.get(r, i) as u32 * rhs.get(i, c) as u32)
                    .sum();
                out.data[r * rhs.cols + c] = (acc % p) as u8;
            }
        }
        Ok(out)
    }

    /// M · v for a column vector v.
    pub fn mul_vec(&self, v: &FpVector) -> Result<FpVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} columns, vector has length {}",
                self.cols,
                v.len()
            )));
        }
        let entries = (0..self.rows)
            .map(|r| self.modulus.dot(self.row(r), v.as_slice()))
            .collect();
        Ok(FpVector {
            modulus: self.modulus,
            entries,
        })
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> FpMatrix {
        let mut out = FpMatrix::zeros(self.modulus, self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.data[r * cols.len() + j] = self.get(r, c);
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> FpMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        FpMatrix {
            modulus: self.modulus,
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &FpMatrix) -> Result<FpMatrix> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "vstack of {} and {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(FpMatrix {
            modulus: self.modulus,
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn push_row(&mut self, row: &[u8]) {
        assert_eq!(row.len(), self.cols);
        self.data
            .extend(row.iter().map(|&v| v % self.modulus.get()));
        self.rows += 1;
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub(crate) fn scale_row(&mut self, r: usize, s: u8) {
        let p = self.modulus;
        for c in 0..self.cols {
            let v = self.data[r * self.cols + c];
            self.data[r * self.cols + c] = p.mul(v, s);
        }
    }

    /// row[target] -= factor * row[source]
    pub(crate) fn sub_row_multiple(&mut self, target: usize, source: usize, factor: u8) {
        if factor == 0 {
            return;
        }
        let p = self.modulus;
        for c in 0..self.cols {
            let s = self.data[source * self.cols + c];
            if s != 0 {
                let t = self.data[target * self.cols + c];
                self.data[target * self.cols + c] = p.sub(t, p.mul(factor, s));
            }
        }
    }

    /// Reduced row echelon form. Zero rows are kept at the bottom, so the
    /// result has the same shape as the input.
    pub fn rref(&self) -> Rref {
        let p = self.modulus;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut next = 0;
        for c in 0..m.cols {
            if next == m.rows {
                break;
            }
            let Some(found) = (next..m.rows).find(|&r| m.get(r, c) != 0) else {
                continue;
            };
            m.swap_rows(next, found);
            let inv = p.inv(m.get(next, c)).expect("pivot is nonzero");
            m.scale_row(next, inv);
            for r in 0..m.rows {
                if r != next {
                    let f = m.get(r, c);
                    m.sub_row_multiple(r, next, f);
                }
            }
            pivots.push(c);
            next += 1;
        }
        Rref {
            reduced: m,
            rank: pivots.len(),
            pivot_columns: pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Nonzero rows of the RREF: a canonical basis of the row space.
    pub fn row_basis(&self) -> FpMatrix {
        let r = self.rref();
        r.reduced.select_rows(&(0..r.rank).collect::<Vec<_>>())
    }

    /// Basis (as rows) of the right null space {v : M vᵀ = 0}.
    pub fn kernel(&self) -> FpMatrix {
        let p = self.modulus;
        let Rref {
            reduced,
            rank,
            pivot_columns,
        } = self.rref();
        let free: Vec<usize> = (0..self.cols)
            .filter(|c| !pivot_columns.contains(c))
            .collect();
        let mut basis = FpMatrix::zeros(p, free.len(), self.cols);
        for (b, &f) in free.iter().enumerate() {
            basis.data[b * self.cols + f] = 1;
            for (r, &pc) in pivot_columns.iter().enumerate().take(rank) {
                basis.data[b * self.cols + pc] = p.neg(reduced.get(r, f));
            }
        }
        basis
    }

    /// Solves M·x = b. Returns `Ok(None)` when b lies outside the column
    /// space; free variables are set to zero.
    pub fn solve(&self, b: &FpVector) -> Result<Option<FpVector>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has length {}, matrix has {} rows",
                b.len(),
                self.rows
            )));
        }
        if b.modulus() != self.modulus {
            return Err(Error::ModulusMismatch(
                self.modulus.get(),
                b.modulus().get(),
            ));
        }
        let mut aug = FpMatrix::zeros(self.modulus, self.rows, self.cols + 1);
        for r in 0..self.rows {
            aug.data[r * (self.cols + 1)..r * (self.cols + 1) + self.cols]
                .copy_from_slice(self.row(r));
            aug.data[r * (self.cols + 1) + self.cols] = b.as_slice()[r];
        }
        let rr = aug.rref();
        if rr.pivot_columns.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = FpVector::zeros(self.modulus, self.cols);
        for (r, &pc) in rr.pivot_columns.iter().enumerate() {
            x.entries[pc] = rr.reduced.get(r, self.cols);
        }
        Ok(Some(x))
    }

    /// Inverse of a square matrix, `None` if singular.
    pub fn inverse(&self) -> Option<FpMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = FpMatrix::zeros(self.modulus, n, 2 * n);
        for r in 0..n {
            aug.data[r * 2 * n..r * 2 * n + n].copy_from_slice(self.row(r));
            aug.data[r * 2 * n + n + r] = 1;
        }
        let rr = aug.rref();
        if rr.pivot_columns.iter().copied().take(n).ne(0..n) || rr.rank < n {
            return None;
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        Some(rr.reduced.select_columns(&cols))
    }

    /// True when `v` lies in the row space.
    pub fn row_space_contains(&self, v: &[u8]) -> bool {
        let mut m = self.clone();
        let before = m.rank();
        m.push_row(v);
        m.rank() == before
    }

    /// True when both matrices span the same row space.
    pub fn same_row_space(&self, other: &FpMatrix) -> bool {
        self.cols == other.cols && self.row_basis() == other.row_basis()
    }
}

impl fmt::Display for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}
