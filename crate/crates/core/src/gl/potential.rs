//! Even potentials `V(x)` entering `S = −d²/dx² + m² + V`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridSpec;

use super::kink::{kink_profile, Kink};
use super::model::NonlinearityModel;

/// An even real potential that can be evaluated anywhere.
pub trait Potential: Send + Sync + fmt::Debug {
    /// `V(x)`; implementations must satisfy `V(−x) = V(x)`.
    fn value(&self, x: f64) -> f64;

    /// Known or fitted exponential decay rate `κ` in `|V(x)| ≤ C e^{−κ|x|}`;
    /// `None` for potentials that vanish identically outside a compact set.
    fn decay_rate(&self) -> Option<f64> {
        None
    }

    /// Smallest `R ≤ limit` such that `|V(x)| < threshold` on `[R, limit]`,
    /// located by scanning down from `limit` with step 1/64.
    fn support_radius(&self, threshold: f64, limit: f64) -> f64 {
        let step = 1.0 / 64.0;
        let mut x = limit;
        while x > 0.0 {
            if self.value(x).abs() >= threshold {
                return (x + step).min(limit);
            }
            x -= step;
        }
        0.0
    }

    fn sample(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.value(x)).collect()
    }
}

/// `V ≡ 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct FreePotential;

impl Potential for FreePotential {
    fn value(&self, _x: f64) -> f64 {
        0.0
    }

    fn support_radius(&self, _threshold: f64, _limit: f64) -> f64 {
        0.0
    }
}

/// `V = −depth` on `|x| < width`, `0` outside, and `−depth/2` exactly at the
/// jump so that fixed-step integrators whose nodes hit the jump stay second order.
#[derive(Clone, Copy, Debug)]
pub struct SquareWell {
    pub depth: f64,
    pub width: f64,
}

impl Potential for SquareWell {
    fn value(&self, x: f64) -> f64 {
        let ax = x.abs();
        if ax < self.width {
            -self.depth
        } else if ax == self.width {
            -0.5 * self.depth
        } else {
            0.0
        }
    }

    fn support_radius(&self, _threshold: f64, limit: f64) -> f64 {
        self.width.min(limit)
    }
}

/// Potential given by a closure, with an optional declared decay rate.
#[derive(Clone)]
pub struct FnPotential {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    kappa: Option<f64>,
    label: String,
}

impl FnPotential {
    pub fn new(
        label: impl Into<String>,
        kappa: Option<f64>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            kappa,
            label: label.into(),
        }
    }
}

impl fmt::Debug for FnPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnPotential")
            .field("label", &self.label)
            .field("kappa", &self.kappa)
            .finish()
    }
}

impl Potential for FnPotential {
    fn value(&self, x: f64) -> f64 {
        (self.f)(x.abs())
    }

    fn decay_rate(&self) -> Option<f64> {
        self.kappa
    }
}

/// Potential sampled on `0 = x_0 < x_1 < …` (half-line), interpolated by cubic
/// Hermite with finite-difference slopes and continued beyond the last sample by
/// `V(x_last) e^{−κ(x − x_last)}` with the declared decay rate.
#[derive(Clone, Debug)]
pub struct SampledPotential {
    xs: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    kappa: f64,
}

impl SampledPotential {
    /// Accepts half-line samples starting at `x = 0`, or full-line samples that are
    /// symmetric about 0 (evenness is checked to `1e−10` relative, then folded).
    pub fn new(xs: Vec<f64>, values: Vec<f64>, kappa: f64) -> Result<Self> {
        if xs.len() != values.len() || xs.len() < 4 {
            return Err(Error::Validation(format!(
                "sampled potential needs at least 4 (x, value) pairs of equal length, got {} and {}",
                xs.len(),
                values.len()
            )));
        }
        if !(kappa > 0.0) {
            return Err(Error::Validation(format!(
                "declared decay rate must be positive, got {kappa}"
            )));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Validation(
                "sample positions must be strictly increasing".into(),
            ));
        }
        if values.iter().chain(&xs).any(|v| !v.is_finite()) {
            return Err(Error::Validation(
                "sampled potential has non-finite entries".into(),
            ));
        }
        let (xs, values) = if xs[0] < 0.0 {
            fold_even(&xs, &values)?
        } else {
            (xs, values)
        };
        if xs[0].abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "half-line samples must start at x = 0, first position is {}",
                xs[0]
            )));
        }
        let n = xs.len();
        let slopes = (0..n)
            .map(|i| {
                if i == 0 {
                    0.0
                } else if i == n - 1 {
                    (values[i] - values[i - 1]) / (xs[i] - xs[i - 1])
                } else {
                    (values[i + 1] - values[i - 1]) / (xs[i + 1] - xs[i - 1])
                }
            })
            .collect();
        Ok(Self {
            xs,
            values,
            slopes,
            kappa,
        })
    }

    pub fn positions(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn fold_even(xs: &[f64], values: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = xs.len();
    let scale = values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    for i in 0..n {
        let j = n - 1 - i;
        if (xs[i] + xs[j]).abs() > 1e-9 * xs[j].abs().max(1.0) {
            return Err(Error::Validation(
                "full-line samples must be symmetric about x = 0".into(),
            ));
        }
        if (values[i] - values[j]).abs() > 1e-10 * scale {
            return Err(Error::Validation(format!(
                "sampled potential is not even: V({}) − V({}) = {:.3e}",
                xs[i],
                xs[j],
                values[i] - values[j]
            )));
        }
    }
    let start = xs
        .iter()
        .position(|&x| x >= -1e-12)
        .expect("symmetric samples contain x ≥ 0");
    let mut hx: Vec<f64> = xs[start..].to_vec();
    let hv: Vec<f64> = values[start..].to_vec();
    if hx[0].abs() > 1e-12 {
        return Err(Error::Validation(
            "full-line samples must include x = 0".into(),
        ));
    }
    hx[0] = 0.0;
    Ok((hx, hv))
}

impl Potential for SampledPotential {
    fn value(&self, x: f64) -> f64 {
        let x = x.abs();
        let n = self.xs.len();
        if x >= self.xs[n - 1] {
            return self.values[n - 1] * (-self.kappa * (x - self.xs[n - 1])).exp();
        }
        let i = self.xs.partition_point(|&p| p <= x) - 1;
        let d = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / d;
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.values[i]
            + (t3 - 2.0 * t2 + t) * d * self.slopes[i]
            + (-2.0 * t3 + 3.0 * t2) * self.values[i + 1]
            + (t3 - t2) * d * self.slopes[i + 1]
    }

    fn decay_rate(&self) -> Option<f64> {
        Some(self.kappa)
    }
}

/// `V_v(x) = −F′(s_v(x)) − m²` evaluated through the kink's interpolation table.
#[derive(Clone, Debug)]
pub struct KinkPotential {
    kink: Kink,
    model: NonlinearityModel,
    kappa: Option<f64>,
}

impl KinkPotential {
    pub fn new(model: &NonlinearityModel, kink: Kink) -> Self {
        let mut p = Self {
            kink,
            model: model.clone(),
            kappa: None,
        };
        p.kappa = fit_tail(&p, p.kink.grid().length()).kappa;
        p
    }

    pub fn kink(&self) -> &Kink {
        &self.kink
    }
}

impl Potential for KinkPotential {
    fn value(&self, x: f64) -> f64 {
        -self.model.force_slope(self.kink.value(x)) - self.model.m2()
    }

    fn decay_rate(&self) -> Option<f64> {
        self.kappa
    }
}

/// Exponential tail fit `|V(x)| ≈ C e^{−κx}`.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct TailFit {
    pub kappa: Option<f64>,
    pub amplitude: Option<f64>,
    pub window: Option<(f64, f64)>,
    pub points: usize,
    pub warning: Option<String>,
}

/// Fits `ln|V|` linearly on the window where `1e−12 < |V| < 1e−2·max|V|`,
/// sampled with step 1/32 on `[0, limit]`. A failed fit is reported through
/// `warning`, never as an error.
pub fn fit_tail(potential: &dyn Potential, limit: f64) -> TailFit {
    let step = 1.0 / 32.0;
    let count = (limit / step).floor() as usize;
    let samples: Vec<(f64, f64)> = (0..=count)
        .map(|i| {
            let x = i as f64 * step;
            (x, potential.value(x).abs())
        })
        .collect();
    let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.1));
    let failed = |msg: String| TailFit {
        kappa: None,
        amplitude: None,
        window: None,
        points: 0,
        warning: Some(msg),
    };
    if peak == 0.0 {
        return failed("potential vanishes identically; no tail to fit".into());
    }
    let peak_at = samples.iter().position(|s| s.1 == peak).unwrap_or(0);
    let window: Vec<(f64, f64)> = samples[peak_at..]
        .iter()
        .filter(|s| s.1 > 1e-12 && s.1 < 1e-2 * peak)
        .map(|&(x, v)| (x, v.ln()))
        .collect();
    if window.len() < 8 {
        return failed(format!(
            "only {} samples in the tail window (1e-12 < |V| < 1e-2·max|V|) on [0, {limit}]",
            window.len()
        ));
    }
    let (slope, intercept) = linear_fit(&window);
    let half = window.len() / 2;
    let (s1, _) = linear_fit(&window[..half]);
    let (s2, _) = linear_fit(&window[half..]);
    let kappa = -slope;
    let mut warning = None;
    if !(kappa > 0.0) {
        warning = Some(format!("tail does not decay (fitted slope {slope:.3e})"));
    } else if (s2 - s1).abs() > 0.2 * kappa {
        warning = Some(format!(
            "decay is not exponential within the window: local rates {:.4} and {:.4}",
            -s1, -s2
        ));
    }
    TailFit {
        kappa: (kappa > 0.0).then_some(kappa),
        amplitude: Some(intercept.exp()),
        window: Some((window[0].0, window[window.len() - 1].0)),
        points: window.len(),
        warning,
    }
}

fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Sampled linearization potential `V_v` on the full-line grid, with its tail fit
/// and the evaluable potential it came from.
#[derive(Clone, Debug)]
pub struct LinearizationPotential {
    pub points: Vec<f64>,
    pub values: Vec<f64>,
    pub tail: TailFit,
    pub potential: KinkPotential,
}

impl LinearizationPotential {
    /// `max |V(x_j) − V(−x_j)|` over symmetric pairs of the full-line samples.
    pub fn evenness_defect(&self) -> f64 {
        let n = self.values.len();
        (0..n / 2)
            .map(|i| (self.values[i] - self.values[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }
}

/// `V_v(x) = −F′(s_v(x)) − m²` for the kink at velocity `v`.
pub fn linearization_potential(
    model: &NonlinearityModel,
    v: f64,
    grid: &GridSpec,
) -> Result<LinearizationPotential> {
    let kink = kink_profile(model, v, grid)?;
    let potential = KinkPotential::new(model, kink);
    let points = grid.full_line_points();
    let values = potential.sample(&points);
    let tail = fit_tail(&potential, grid.length());
    if let Some(w) = &tail.warning {
        log::warn!("tail fit of V_v: {w}");
    }
    Ok(LinearizationPotential {
        points,
        values,
        tail,
        potential,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gl::model::make_cubic_model;

    #[test]
    fn cubic_static_potential_is_poschl_teller() {
        let model = make_cubic_model();
        let grid = GridSpec::new(30.0, 2999).unwrap();
        let lin = linearization_potential(&model, 0.0, &grid).unwrap();
        let centre = lin.points.len() / 2;
        assert!((lin.values[centre] + 3.0).abs() < 1e-12);
        for (x, v) in lin.points.iter().zip(&lin.values).step_by(97) {
            let exact = -3.0 / (x / 2f64.sqrt()).cosh().powi(2);
            assert!((v - exact).abs() < 1e-8, "x={x}");
        }
        assert_eq!(lin.evenness_defect(), 0.0);
        let kappa = lin.tail.kappa.unwrap();
        assert!((kappa / 2f64.sqrt() - 1.0).abs() < 0.1, "kappa={kappa}");
        assert!(lin.tail.warning.is_none());
    }

    #[test]
    fn moving_kink_potential_decays_faster() {
        let model = make_cubic_model();
        let grid = GridSpec::new(30.0, 2999).unwrap();
        let lin = linearization_potential(&model, 0.6, &grid).unwrap();
        let kappa = lin.tail.kappa.unwrap();
        assert!(
            (kappa / (2f64.sqrt() / 0.8) - 1.0).abs() < 0.1,
            "kappa={kappa}"
        );
    }

    #[test]
    fn free_potential_tail_fit_warns() {
        let fit = fit_tail(&FreePotential, 20.0);
        assert!(fit.kappa.is_none());
        assert!(fit.warning.is_some());
    }

    #[test]
    fn slow_tail_is_flagged() {
        let p = FnPotential::new("power law", None, |x| -1.0 / (1.0 + x * x));
        let fit = fit_tail(&p, 200.0);
        assert!(fit.warning.is_some());
    }

    #[test]
    fn sampled_potential_interpolates_and_folds() {
        let xs: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
        let vs: Vec<f64> = xs.iter().map(|x| -2.0 * (-x * x).exp()).collect();
        let p = SampledPotential::new(xs.clone(), vs.clone(), 2.0).unwrap();
        for x in [0.013, 0.77, 3.21] {
            assert!((p.value(x) + 2.0 * (-x * x).exp()).abs() < 1e-5);
            assert_eq!(p.value(-x), p.value(x));
        }
        let full_x: Vec<f64> = xs
            .iter()
            .rev()
            .map(|x| -x)
            .chain(xs[1..].iter().cloned())
            .collect();
        let full_v: Vec<f64> = vs
            .iter()
            .rev()
            .cloned()
            .chain(vs[1..].iter().cloned())
            .collect();
        let q = SampledPotential::new(full_x.clone(), full_v.clone(), 2.0).unwrap();
        assert_eq!(q.positions(), p.positions());
        let mut odd = full_v.clone();
        odd[0] += 0.1;
        assert!(SampledPotential::new(full_x, odd, 2.0).is_err());
        assert!(SampledPotential::new(vec![0.0, 1.0], vec![0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn square_well_jump_value() {
        let w = SquareWell {
            depth: 2.0,
            width: 1.0,
        };
        assert_eq!(w.value(0.5), -2.0);
        assert_eq!(w.value(-1.0), -1.0);
        assert_eq!(w.value(1.5), 0.0);
        assert_eq!(w.support_radius(1e-12, 10.0), 1.0);
    }
}
