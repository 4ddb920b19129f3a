//! Reference propagators for `ψ̈ = −Sψ` on the grid, independent of the mode
//! expansion: exact propagation through the eigendecomposition of `S`, and
//! velocity-Verlet leapfrog stepping.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::GridCalculus;
use crate::error::{Error, Result};
use crate::expansion::SpectralDecomposition;
use crate::field::FieldState;
use crate::gl::GridOperator;
use crate::grid::GridSpec;
use crate::linalg::C64;
use crate::spectral::WeightedNorm;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Expansion,
    GridSpectral,
    Leapfrog,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub provenance: Provenance,
    pub grid: GridSpec,
    pub times: Vec<f64>,
    pub states: Vec<FieldState>,
}

/// Times `0, Δt, …, t_end`.
pub fn uniform_times(t_end: f64, count: usize) -> Result<Vec<f64>> {
    if !(t_end >= 0.0) || !t_end.is_finite() || count == 0 {
        return Err(Error::Validation(format!(
            "time grid needs t_end ≥ 0 and at least one sample (got t_end = {t_end}, count = {count})"
        )));
    }
    if count == 1 {
        return Ok(vec![0.0]);
    }
    Ok((0..count)
        .map(|i| t_end * i as f64 / (count - 1) as f64)
        .collect())
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Validation(
            "time grid must be nonempty and finite".into(),
        ));
    }
    if times.len() > 2 {
        let step = times[1] - times[0];
        if !(step > 0.0)
            || times
                .windows(2)
                .any(|p| ((p[1] - p[0]) - step).abs() > 1e-9 * step.max(1.0))
        {
            return Err(Error::Validation(
                "time grid must be uniform and increasing".into(),
            ));
        }
    }
    Ok(())
}

impl Trajectory {
    pub fn new(
        provenance: Provenance,
        grid: GridSpec,
        times: Vec<f64>,
        states: Vec<FieldState>,
    ) -> Result<Self> {
        check_times(&times)?;
        if states.len() != times.len() {
            return Err(Error::Dimension {
                context: "trajectory states",
                expected: times.len(),
                got: states.len(),
            });
        }
        if states.iter().any(|s| s.len() != grid.n()) {
            return Err(Error::Validation(
                "trajectory state does not match the grid".into(),
            ));
        }
        if states.iter().any(|s| {
            s.psi
                .iter()
                .chain(&s.dpsi)
                .any(|z| !z.re.is_finite() || !z.im.is_finite())
        }) {
            return Err(Error::Numerical(
                "trajectory contains non-finite samples".into(),
            ));
        }
        Ok(Self {
            provenance,
            grid,
            times,
            states,
        })
    }

    /// Trajectory of the expansion at the given times.
    pub fn from_expansion(dec: &SpectralDecomposition, times: &[f64]) -> Result<Self> {
        let states = times
            .par_iter()
            .map(|&t| dec.synthesize(t))
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            Provenance::Expansion,
            *dec.set().grid(),
            times.to_vec(),
            states,
        )
    }
}

/// `ψ(t) = cos(√S t)ψ0 + S^{−1/2} sin(√S t)ψ̇0`, `ψ̇(t) = −√S sin(√S t)ψ0 + cos(√S t)ψ̇0`.
#[derive(Clone, Debug)]
pub struct GridSpectralPropagator {
    calculus: Arc<GridCalculus>,
}

impl GridSpectralPropagator {
    pub fn new(op: &GridOperator) -> Result<Self> {
        Ok(Self {
            calculus: Arc::new(GridCalculus::new(op)?),
        })
    }

    pub fn from_calculus(calculus: Arc<GridCalculus>) -> Self {
        Self { calculus }
    }

    pub fn calculus(&self) -> &Arc<GridCalculus> {
        &self.calculus
    }

    pub fn propagate(&self, x0: &FieldState, times: &[f64]) -> Result<Trajectory> {
        check_times(times)?;
        let grid = *self.calculus.operator().grid();
        if x0.len() != grid.n() {
            return Err(Error::Dimension {
                context: "initial data samples",
                expected: grid.n(),
                got: x0.len(),
            });
        }
        let c0 = self.calculus.coefficients(&x0.psi);
        let d0 = self.calculus.coefficients(&x0.dpsi);
        let freq: Vec<f64> = self
            .calculus
            .eigenvalues()
            .iter()
            .map(|l| l.sqrt())
            .collect();
        let states = times
            .iter()
            .map(|&t| {
                let mut c = Vec::with_capacity(freq.len());
                let mut d = Vec::with_capacity(freq.len());
                for ((&w, a), b) in freq.iter().zip(&c0).zip(&d0) {
                    let (s, co) = (w * t).sin_cos();
                    c.push(a * co + b * (s / w));
                    d.push(-a * (w * s) + b * co);
                }
                FieldState {
                    psi: self.calculus.synthesize(&c),
                    dpsi: self.calculus.synthesize(&d),
                }
            })
            .collect();
        Trajectory::new(Provenance::GridSpectral, grid, times.to_vec(), states)
    }
}

pub fn grid_spectral_propagate(
    op: &GridOperator,
    x0: &FieldState,
    times: &[f64],
) -> Result<Trajectory> {
    GridSpectralPropagator::new(op)?.propagate(x0, times)
}

/// Velocity-Verlet stepping of `ψ̈ = −Sψ` with fixed `dt`; every requested time
/// must be a multiple of `dt`.
pub fn leapfrog_propagate(
    op: &GridOperator,
    x0: &FieldState,
    dt: f64,
    times: &[f64],
) -> Result<Trajectory> {
    check_times(times)?;
    let grid = *op.grid();
    let lambda_max = op.tridiagonal().eigenvalue_by_index(grid.n() - 1);
    let bound = dt * lambda_max.sqrt();
    if !(dt > 0.0) || !(bound < 2.0) {
        return Err(Error::Validation(format!(
            "leapfrog step dt = {dt} violates the stability bound dt·√λmax < 2 (dt·√λmax = {bound:.4}, dt < {:.6e})",
            2.0 / lambda_max.sqrt()
        )));
    }
    let mut targets = Vec::with_capacity(times.len());
    for &t in times {
        let steps = (t / dt).round();
        if (steps * dt - t).abs() > 1e-9 * dt.max(t.abs()) || steps < 0.0 {
            return Err(Error::Validation(format!(
                "time {t} is not a nonnegative multiple of dt = {dt}"
            )));
        }
        targets.push(steps as usize);
    }
    let mut psi = x0.psi.clone();
    let mut vel = x0.dpsi.clone();
    let mut states = Vec::with_capacity(times.len());
    let mut step = 0usize;
    let mut acc: Vec<C64> = op.apply_complex(&psi).into_iter().map(|z| -z).collect();
    for &target in &targets {
        while step < target {
            for ((v, a), p) in vel.iter_mut().zip(&acc).zip(psi.iter_mut()) {
                *v += a * (0.5 * dt);
                *p += *v * dt;
            }
            acc = op.apply_complex(&psi).into_iter().map(|z| -z).collect();
            for (v, a) in vel.iter_mut().zip(&acc) {
                *v += a * (0.5 * dt);
            }
            step += 1;
        }
        states.push(FieldState {
            psi: psi.clone(),
            dpsi: vel.clone(),
        });
    }
    Trajectory::new(Provenance::Leapfrog, grid, times.to_vec(), states)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NormKind {
    Energy,
    Weighted { s: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct NormSeries {
    pub norm: NormKind,
    pub errors: Vec<f64>,
    pub max: f64,
    /// `max / ‖X_A(0)‖` in the same norm.
    pub max_relative: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorReport {
    pub a: Provenance,
    pub b: Provenance,
    pub times: Vec<f64>,
    pub series: Vec<NormSeries>,
}

impl ErrorReport {
    pub fn max_relative(&self, norm: NormKind) -> Option<f64> {
        self.series
            .iter()
            .find(|s| s.norm == norm)
            .map(|s| s.max_relative)
    }
}

/// Per-time errors between two trajectories on the same grid and time samples.
pub fn compare(
    a: &Trajectory,
    b: &Trajectory,
    op: &GridOperator,
    norms: &[NormKind],
) -> Result<ErrorReport> {
    if a.grid != b.grid || op.grid() != &a.grid {
        return Err(Error::Validation(
            "trajectories and operator must share one grid".into(),
        ));
    }
    if a.times.len() != b.times.len()
        || a.times
            .iter()
            .zip(&b.times)
            .any(|(x, y)| (x - y).abs() > 1e-12 * x.abs().max(1.0))
    {
        return Err(Error::Validation(
            "trajectories have different time grids".into(),
        ));
    }
    let diffs: Vec<FieldState> = a
        .states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| x.sub(y))
        .collect::<Result<_>>()?;
    let series = norms
        .iter()
        .map(|&kind| {
            let measure = |s: &FieldState| -> Result<f64> {
                Ok(match kind {
                    NormKind::Energy => s.energy_norm(op),
                    NormKind::Weighted { s: exp } => {
                        s.weighted_norm(&a.grid, &WeightedNorm::new(exp)?)
                    }
                })
            };
            let errors: Vec<f64> = diffs.iter().map(measure).collect::<Result<_>>()?;
            let max = errors.iter().copied().fold(0.0, f64::max);
            let reference = measure(&a.states[0])?;
            Ok(NormSeries {
                norm: kind,
                max,
                max_relative: if reference > 0.0 {
                    max / reference
                } else {
                    max
                },
                errors,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ErrorReport {
        a: a.provenance,
        b: b.provenance,
        times: a.times.clone(),
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gl::FreePotential;

    fn setup() -> (GridOperator, FieldState) {
        let grid = GridSpec::new(20.0, 399).unwrap();
        let op = GridOperator::schrodinger(&FreePotential, 1.0, &grid).unwrap();
        let x0 = FieldState::sample(&grid, |x| x * (-x * x / 2.0).exp(), |_| 0.0);
        (op, x0)
    }

    #[test]
    fn spectral_oracle_conserves_energy_and_starts_at_data() {
        let (op, x0) = setup();
        let times = uniform_times(10.0, 11).unwrap();
        let tr = grid_spectral_propagate(&op, &x0, &times).unwrap();
        let e0 = tr.states[0].energy_norm(&op);
        for s in &tr.states {
            assert!((s.energy_norm(&op) / e0 - 1.0).abs() < 1e-12);
        }
        let d = tr.states[0].sub(&x0).unwrap();
        assert!(d.energy_norm(&op) < 1e-12 * e0);
    }

    #[test]
    fn single_eigenvector_oscillates_as_cosine() {
        let (op, _) = setup();
        let lambda = op.tridiagonal().eigenvalue_by_index(0);
        let v = op.tridiagonal().eigenvector(lambda);
        let x0 = FieldState::real(&v, &vec![0.0; v.len()]).unwrap();
        let tr = grid_spectral_propagate(&op, &x0, &[0.0, 1.3]).unwrap();
        let c = (lambda.sqrt() * 1.3).cos();
        let err = tr.states[1]
            .psi
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b * c).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn leapfrog_is_second_order() {
        let (op, x0) = setup();
        let times = uniform_times(4.0, 5).unwrap();
        let exact = grid_spectral_propagate(&op, &x0, &times).unwrap();
        let norms = [NormKind::Energy];
        let e1 = compare(
            &exact,
            &leapfrog_propagate(&op, &x0, 0.01, &times).unwrap(),
            &op,
            &norms,
        )
        .unwrap();
        let e2 = compare(
            &exact,
            &leapfrog_propagate(&op, &x0, 0.005, &times).unwrap(),
            &op,
            &norms,
        )
        .unwrap();
        let ratio = e1.series[0].max / e2.series[0].max;
        assert!((ratio - 4.0).abs() < 0.8, "{ratio}");
    }

    #[test]
    fn leapfrog_rejects_unstable_step() {
        let (op, x0) = setup();
        let err = leapfrog_propagate(&op, &x0, 0.1, &[0.0, 1.0]).unwrap_err();
        assert!(err.to_string().contains("stability bound"));
        assert!(leapfrog_propagate(&op, &x0, 0.01, &[0.0, 0.015]).is_err());
    }

    #[test]
    fn identical_trajectories_compare_to_zero() {
        let (op, x0) = setup();
        let tr = grid_spectral_propagate(&op, &x0, &[0.0, 1.0]).unwrap();
        let r = compare(
            &tr,
            &tr,
            &op,
            &[NormKind::Energy, NormKind::Weighted { s: 1.5 }],
        )
        .unwrap();
        assert!(r.series.iter().all(|s| s.max == 0.0));
    }
}
