//! Dense complex matrices and the Hermitian eigendecomposition they rely on.
//!
//! Matrix functions (square roots, exponentials) are always evaluated through a
//! full Hermitian eigendecomposition; there is no series evaluation anywhere.

pub mod tridiag;

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| {
            if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_real_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Self::from_fn(n, |i, j| C64::new(f(i, j), 0.0))
    }

    /// Builds a matrix from row vectors; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(Error::Dimension {
                    context: "matrix row",
                    expected: n,
                    got: row.len(),
                });
            }
        }
        let mut m = Self::from_fn(n, |i, j| rows[i][j]);
        m.n = n;
        Ok(m)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_real_fn(values.len(), |i, j| if i == j { values[i] } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.data[i * self.n + j] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    fn check_same(&self, other: &Self, context: &'static str) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                context,
                expected: self.n,
                got: other.n,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other, "matrix sum")?;
        Ok(Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other, "matrix difference")?;
        Ok(Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other, "matrix product")?;
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.n {
            return Err(Error::Dimension {
                context: "matrix-vector product",
                expected: self.n,
                got: x.len(),
            });
        }
        Ok((0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// Largest entry modulus.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max-norm of `self − self*`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..=i {
                d = d.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        d
    }

    /// Max-norm of `self + self*`.
    pub fn skew_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..=i {
                d = d.max((self.get(i, j) + self.get(j, i).conj()).norm());
            }
        }
        d
    }

    /// Largest imaginary part over all entries.
    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    fn to_faer(&self) -> Mat<C64> {
        Mat::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Eigendecomposition of a Hermitian matrix (only the lower triangle is read).
    pub fn hermitian_eigen(&self) -> Result<HermitianEigen> {
        let evd = self
            .to_faer()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("Hermitian eigendecomposition failed: {e:?}")))?;
        let values: Vec<f64> = (0..self.n).map(|i| evd.S().column_vector()[i].re).collect();
        let u = evd.U();
        let vectors = Self::from_fn(self.n, |i, j| u[(i, j)]);
        Ok(HermitianEigen { values, vectors })
    }

    /// Hermitian eigenvalues in ascending order.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        self.to_faer()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("Hermitian eigenvalue solve failed: {e:?}")))
    }

    /// Solves `self · x = b` with partial-pivoting LU.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        use faer::linalg::solvers::Solve;
        if b.len() != self.n {
            return Err(Error::Dimension {
                context: "linear solve",
                expected: self.n,
                got: b.len(),
            });
        }
        let lu = self.to_faer().partial_piv_lu();
        let rhs = Mat::from_fn(self.n, 1, |i, _| b[i]);
        let x = lu.solve(&rhs);
        let out: Vec<C64> = (0..self.n).map(|i| x[(i, 0)]).collect();
        if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("singular linear system".into()));
        }
        Ok(out)
    }

    /// Ratio of largest to smallest singular value.
    pub fn condition_number(&self) -> Result<f64> {
        let sv = self
            .to_faer()
            .singular_values()
            .map_err(|e| Error::Numerical(format!("singular value solve failed: {e:?}")))?;
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(if min == 0.0 { f64::INFINITY } else { max / min })
    }

    pub(crate) fn to_json_form(&self) -> MatrixJson {
        let rows = |f: fn(&C64) -> f64| {
            (0..self.n)
                .map(|i| {
                    self.data[i * self.n..(i + 1) * self.n]
                        .iter()
                        .map(f)
                        .collect()
                })
                .collect()
        };
        MatrixJson {
            n: self.n,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

/// JSON wire form `{"n": .., "re": [[..]], "im": [[..]]}`.
#[derive(Serialize, Deserialize)]
pub(crate) struct MatrixJson {
    n: usize,
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Vec<Vec<f64>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_form().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let m = MatrixJson::deserialize(d)?;
        if m.re.len() != m.n || m.re.iter().any(|r| r.len() != m.n) {
            return Err(D::Error::custom(format!("\"re\" must be {0}x{0}", m.n)));
        }
        let im_present = !m.im.is_empty();
        if im_present && (m.im.len() != m.n || m.im.iter().any(|r| r.len() != m.n)) {
            return Err(D::Error::custom(format!("\"im\" must be {0}x{0}", m.n)));
        }
        Ok(ComplexMatrix::from_fn(m.n, |i, j| {
            C64::new(m.re[i][j], if im_present { m.im[i][j] } else { 0.0 })
        }))
    }
}

/// Eigenpairs of a Hermitian matrix; `vectors` holds the eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `U · diag(f(λ)) · U*`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.values.len();
        let fv: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        let u = &self.vectors;
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| u.get(i, k) * fv[k] * u.get(j, k).conj())
                .sum()
        })
    }

    /// Column `k` of the eigenvector matrix.
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.values.len())
            .map(|i| self.vectors.get(i, k))
            .collect()
    }
}

/// Full eigendecomposition of a real symmetric matrix given in dense form.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Column-major eigenvectors: `vectors[k]` is the k-th eigenvector.
    pub vectors: Vec<Vec<f64>>,
}

impl SymmetricEigen {
    pub fn compute(n: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let a = Mat::<f64>::from_fn(n, n, entry);
        let evd = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("symmetric eigendecomposition failed: {e:?}")))?;
        let values: Vec<f64> = (0..n).map(|i| evd.S().column_vector()[i]).collect();
        let u = evd.U();
        let vectors = (0..n)
            .map(|k| (0..n).map(|i| u[(i, k)]).collect())
            .collect();
        Ok(Self { values, vectors })
    }

    pub fn eigenvalues(n: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Vec<f64>> {
        Mat::<f64>::from_fn(n, n, entry)
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("symmetric eigenvalue solve failed: {e:?}")))
    }

    /// Coefficients `U^T x` of a complex vector in the eigenbasis.
    pub fn coefficients(&self, x: &[C64]) -> Vec<C64> {
        use rayon::prelude::*;
        self.vectors
            .par_iter()
            .map(|v| v.iter().zip(x).map(|(a, b)| b * *a).sum())
            .collect()
    }

    /// `U c` for eigenbasis coefficients `c`.
    pub fn synthesize(&self, c: &[C64]) -> Vec<C64> {
        let n = self.values.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (v, ck) in self.vectors.iter().zip(c) {
            if *ck == C64::new(0.0, 0.0) {
                continue;
            }
            for (o, a) in out.iter_mut().zip(v) {
                *o += ck * *a;
            }
        }
        out
    }

    /// `f(M) x` evaluated through the eigenbasis.
    pub fn apply_fn(&self, x: &[C64], f: impl Fn(f64) -> f64) -> Vec<C64> {
        let c: Vec<C64> = self
            .coefficients(x)
            .into_iter()
            .zip(&self.values)
            .map(|(c, &l)| c * f(l))
            .collect();
        self.synthesize(&c)
    }
}

/// Euclidean inner product `Σ x_i conj(y_i)`.
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn product_and_adjoint() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(1.0, 1.0), c(2.0, 0.0)],
            vec![c(0.0, -1.0), c(3.0, 0.0)],
        ])
        .unwrap();
        let b = ComplexMatrix::identity(2);
        assert_eq!(a.mul(&b).unwrap(), a);
        let ah = a.adjoint();
        assert_eq!(ah.get(0, 1), c(0.0, 1.0));
        assert_eq!(ah.get(0, 0), c(1.0, -1.0));
        let aa = a.mul(&ah).unwrap();
        assert!(aa.hermitian_defect() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(3);
        assert!(matches!(a.mul(&b), Err(Error::Dimension { .. })));
        assert!(ComplexMatrix::from_rows(&[vec![c(1.0, 0.0)], vec![]]).is_err());
    }

    #[test]
    fn hermitian_square_root_of_diagonal() {
        let b = ComplexMatrix::diagonal(&[4.0, 1.0]);
        let e = b.hermitian_eigen().unwrap();
        let root = e.apply_fn(|l| c(l.sqrt(), 0.0));
        assert!((root.get(0, 0) - c(2.0, 0.0)).norm() < 1e-14);
        assert!((root.get(1, 1) - c(1.0, 0.0)).norm() < 1e-14);
        assert!(root.get(0, 1).norm() < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.5), c(2.0, 0.0)],
            vec![c(0.0, -1.0), c(3.0, 0.0)],
        ])
        .unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert!(s.starts_with("{\"n\":2,\"re\":[[1.0,2.0],[0.0,3.0]]"));
        let b: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
        let bad = r#"{"n":2,"re":[[1.0],[0.0,3.0]],"im":[]}"#;
        assert!(serde_json::from_str::<ComplexMatrix>(bad).is_err());
    }

    #[test]
    fn solve_and_condition_number() {
        let a = ComplexMatrix::diagonal(&[2.0, 0.5]);
        let x = a.solve(&[c(2.0, 0.0), c(1.0, 1.0)]).unwrap();
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - c(2.0, 2.0)).norm() < 1e-15);
        assert!((a.condition_number().unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_eigen_functions() {
        let e = SymmetricEigen::compute(3, |i, j| {
            if i == j {
                2.0
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let x = vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)];
        let y = e.apply_fn(&x, |l| l);
        let direct = [c(2.0, -1.0), c(0.0, 2.0), c(-2.0, -1.0)];
        for (a, b) in y.iter().zip(direct) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
