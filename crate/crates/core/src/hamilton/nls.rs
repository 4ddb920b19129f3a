use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::linalg::ComplexMatrix;

use super::HamiltonSystem;

/// Real block form of the NLS equation `iφ̇ = −φ″ + U_r φ + 2U_rr (s0·φ) s0`
/// linearized at a real stationary state `s0`, with `U(x, r) = V(x) r + g r²`.
///
/// The state is `X = (Re φ, Im φ)` on the grid's interior points, `J` is the
/// canonical block `[[0, I], [−I, 0]]`, and `B = diag(B₁, B₂)` with
/// `B₂ = −Δ + V + 2g s0²` and `B₁ = B₂ + 4g s0²` (the term that is not complex
/// linear in `φ`). The Laplacian is the Dirichlet central difference.
pub fn build_nls_linearization(
    grid: &GridSpec,
    v: &[f64],
    g: f64,
    s0: &[f64],
) -> Result<HamiltonSystem> {
    let n = grid.n();
    for (name, len) in [("V", v.len()), ("s0", s0.len())] {
        if len != n {
            return Err(Error::Validation(format!(
                "{name} has {len} samples but the grid has {n} interior points"
            )));
        }
    }
    if v.iter().chain(s0).any(|x| !x.is_finite()) || !g.is_finite() {
        return Err(Error::Validation(
            "NLS linearization inputs must be finite".into(),
        ));
    }
    let h2 = grid.h() * grid.h();
    let lap = |i: usize, j: usize| {
        if i == j {
            2.0 / h2
        } else if i.abs_diff(j) == 1 {
            -1.0 / h2
        } else {
            0.0
        }
    };
    let b = ComplexMatrix::from_real_fn(2 * n, |r, c| {
        let (bi, i) = (r / n, r % n);
        let (bj, j) = (c / n, c % n);
        if bi != bj {
            return 0.0;
        }
        let mut value = lap(i, j);
        if i == j {
            let s2 = s0[i] * s0[i];
            value += v[i] + 2.0 * g * s2;
            if bi == 0 {
                value += 4.0 * g * s2;
            }
        }
        value
    });
    let j = ComplexMatrix::from_real_fn(2 * n, |r, c| {
        if c == r + n {
            1.0
        } else if r == c + n {
            -1.0
        } else {
            0.0
        }
    });
    let min_eig = b.hermitian_eigenvalues()?[0];
    if !(min_eig > 0.0) {
        return Err(Error::ConditionP {
            min_eig,
            delta: 0.0,
        });
    }
    HamiltonSystem::new(j, b, min_eig * (1.0 - 1e-9))
}
