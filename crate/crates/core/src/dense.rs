//! Small dense complex matrices and roots of unity.

use std::fmt;

use num_complex::Complex;

use crate::scalar::Real;

/// `exp(2πi · exponent / denominator)`.
pub fn root_of_unity<T: Real>(exponent: i64, denominator: u32) -> Complex<T> {
    let d = denominator as i64;
    let e = exponent.rem_euclid(d);
    let angle = T::lit(2.0) * T::PI() * T::lit(e as f64) / T::lit(d as f64);
    Complex::new(angle.cos(), angle.sin())
}

/// `ω^e` with `ω = exp(2πi/p)`.
pub fn omega_pow<T: Real>(p: u8, e: i64) -> Complex<T> {
    root_of_unity(e, p as u32)
}

/// `ζ^e` with `ζ = exp(πi/p)`, so that `ω = ζ²`.
pub fn zeta_pow<T: Real>(p: u8, e: i64) -> Complex<T> {
    root_of_unity(e, 2 * p as u32)
}

/// Row-major square or rectangular complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex<T>) {
        self.data[r * self.cols + c] = v;
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn mul(&self, rhs: &DenseMatrix<T>) -> DenseMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    out.data[r * rhs.cols + c] = out.data[r * rhs.cols + c] + a * rhs.get(k, c);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn scale(&self, s: Complex<T>) -> DenseMatrix<T> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &DenseMatrix<T>) -> DenseMatrix<T> {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        DenseMatrix::from_fn(rows, cols, |r, c| {
            self.get(r / rhs.rows, c / rhs.cols) * rhs.get(r % rhs.rows, c % rhs.cols)
        })
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i))
            .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    /// Frobenius norm of `self - rhs`.
    pub fn distance(&self, rhs: &DenseMatrix<T>) -> T {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (*a - *b).norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// `‖U U† − I‖_F ≤ tol`.
    pub fn is_unitary(&self, tol: T) -> bool {
        self.rows == self.cols
            && self
                .mul(&self.adjoint())
                .distance(&DenseMatrix::identity(self.rows))
                <= tol
    }

    /// `‖A − A†‖_F ≤ tol`.
    pub fn is_hermitian(&self, tol: T) -> bool {
        self.rows == self.cols && self.distance(&self.adjoint()) <= tol
    }
}

impl<T: Real> fmt::Display for DenseMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| {
                    let v = self.get(r, c);
                    format!("{:+.4}{:+.4}i", v.re, v.im)
                })
                .collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}
