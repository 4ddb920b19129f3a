//! Functions of the grid `S` through its full eigendecomposition: `S^{±1/2}` and
//! the solution operators `cos(√S t)`, `S^{−1/2} sin(√S t)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gl::{GridOperator, OperatorKind};
use crate::linalg::{SymmetricEigen, C64};

#[derive(Clone, Debug)]
pub struct GridCalculus {
    op: GridOperator,
    eigen: SymmetricEigen,
}

impl GridCalculus {
    /// Diagonalizes `op`; a nonpositive eigenvalue means the data left the odd
    /// sector (or the potential is not a kink linearization) and is an error.
    pub fn new(op: &GridOperator) -> Result<Self> {
        if op.kind() != OperatorKind::S {
            return Err(Error::Validation(
                "grid calculus needs the scalar operator S".into(),
            ));
        }
        let eigen = op.eigen()?;
        if let Some(&l) = eigen.values.first() {
            if !(l > 0.0) {
                return Err(Error::Numerical(format!(
                    "grid operator has a nonpositive eigenvalue {l}; odd-sector positivity violated"
                )));
            }
        }
        Ok(Self {
            op: op.clone(),
            eigen,
        })
    }

    pub fn operator(&self) -> &GridOperator {
        &self.op
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    pub fn eigen(&self) -> &SymmetricEigen {
        &self.eigen
    }

    pub fn coefficients(&self, x: &[C64]) -> Vec<C64> {
        self.eigen.coefficients(x)
    }

    /// `U c`, parallel over output rows.
    pub fn synthesize(&self, c: &[C64]) -> Vec<C64> {
        let n = self.eigen.values.len();
        let chunk = 64;
        let mut out = vec![C64::new(0.0, 0.0); n];
        out.par_chunks_mut(chunk).enumerate().for_each(|(b, rows)| {
            let start = b * chunk;
            for (v, ck) in self.eigen.vectors.iter().zip(c) {
                if ck.re == 0.0 && ck.im == 0.0 {
                    continue;
                }
                for (r, o) in rows.iter_mut().enumerate() {
                    *o += ck * v[start + r];
                }
            }
        });
        out
    }

    pub fn apply_fn(&self, x: &[C64], f: impl Fn(f64) -> f64) -> Vec<C64> {
        let c: Vec<C64> = self
            .coefficients(x)
            .into_iter()
            .zip(&self.eigen.values)
            .map(|(c, &l)| c * f(l))
            .collect();
        self.synthesize(&c)
    }

    pub fn sqrt(&self, x: &[C64]) -> Vec<C64> {
        self.apply_fn(x, f64::sqrt)
    }

    pub fn inv_sqrt(&self, x: &[C64]) -> Vec<C64> {
        self.apply_fn(x, |l| 1.0 / l.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gl::FreePotential;
    use crate::grid::GridSpec;

    #[test]
    fn square_root_squares_back() {
        let grid = GridSpec::new(10.0, 199).unwrap();
        let op = GridOperator::schrodinger(&FreePotential, 1.0, &grid).unwrap();
        let calc = GridCalculus::new(&op).unwrap();
        let x: Vec<C64> = grid
            .points()
            .iter()
            .map(|&t| C64::new(t * (-t * t).exp(), 0.0))
            .collect();
        let twice = calc.sqrt(&calc.sqrt(&x));
        let direct = op.apply_complex(&x);
        let err = twice
            .iter()
            .zip(&direct)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
        let back = calc.inv_sqrt(&calc.sqrt(&x));
        let err = back
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }
}
