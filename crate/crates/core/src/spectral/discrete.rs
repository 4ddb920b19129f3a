use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gl::{GridOperator, OperatorKind};

/// Normalized eigenpair of the grid `S` below the continuum.
#[derive(Clone, Debug, Serialize)]
pub struct DiscreteMode {
    pub lambda: f64,
    pub omega: f64,
    /// Eigenvector at the interior grid points, normalized in the full-line
    /// inner product and signed so that `φ′(0) > 0`.
    #[serde(skip)]
    pub samples: Arc<Vec<f64>>,
    /// `‖Sφ − λφ‖` in the full-line grid norm.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscreteSpectrum {
    pub modes: Vec<DiscreteMode>,
    /// Eigenvalues within the edge margin of `m²`, excluded from `modes`.
    pub near_edge: Vec<f64>,
    pub margin: f64,
}

/// Eigenpairs of `S` with `λ < m² − 10h²`, by Sturm bisection and inverse iteration.
pub fn discrete_spectrum(op: &GridOperator, m2: f64) -> Result<DiscreteSpectrum> {
    if op.kind() != OperatorKind::S {
        return Err(Error::Validation(
            "discrete_spectrum needs the scalar operator S".into(),
        ));
    }
    let grid = op.grid();
    let h = grid.h();
    let margin = 10.0 * h * h;
    let t = op.tridiagonal();
    let all_below = t.eigenvalues_below(m2);
    let mut modes: Vec<DiscreteMode> = Vec::new();
    let mut near_edge = Vec::new();
    for lambda in all_below {
        if lambda >= m2 - margin {
            log::warn!(
                "eigenvalue {lambda} lies within {margin:.2e} of the edge m² = {m2}; excluded"
            );
            near_edge.push(lambda);
            continue;
        }
        if !(lambda > 0.0) {
            return Err(Error::Numerical(format!(
                "grid operator has a nonpositive eigenvalue {lambda} on the odd sector"
            )));
        }
        let mut v = t.eigenvector(lambda);
        for m in &modes {
            let p: f64 = v
                .iter()
                .zip(m.samples.iter())
                .map(|(a, b)| a * b)
                .sum::<f64>()
                * 2.0
                * h;
            v.iter_mut()
                .zip(m.samples.iter())
                .for_each(|(a, b)| *a -= p * b);
        }
        let norm = grid.inner_real(&v, &v).sqrt();
        let sign = if v[0] < 0.0 { -1.0 } else { 1.0 };
        v.iter_mut().for_each(|x| *x *= sign / norm);
        let sv = t.apply(&v);
        let r: Vec<f64> = sv.iter().zip(&v).map(|(a, b)| a - lambda * b).collect();
        let residual = grid.inner_real(&r, &r).sqrt();
        modes.push(DiscreteMode {
            lambda,
            omega: lambda.sqrt(),
            samples: Arc::new(v),
            residual,
        });
    }
    Ok(DiscreteSpectrum {
        modes,
        near_edge,
        margin,
    })
}
