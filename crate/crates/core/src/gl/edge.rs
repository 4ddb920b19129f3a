//! Classification of the band edge `λ = m²` of `S` on the odd sector.
//!
//! At the edge the odd solution of `−u″ + Vu = 0` with `u(0) = 0`, `u′(0) = 1`
//! behaves like `α + βx` once `V` has decayed. Linear growth (`β ≠ 0`) means the
//! edge is regular, a bounded non-decaying limit (`β = 0`, `α ≠ 0`) is a
//! resonance, and a decaying solution is an eigenvalue.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::GridSpec;
use crate::ode::integrate_linear;

use super::potential::Potential;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeClass {
    Eigenvalue,
    Resonance,
    Regular,
    Indeterminate,
}

/// Dead-band thresholds for the classification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EdgeThresholds {
    /// `ρ = |β|L/(|β|L + |α|)` below this is a resonance.
    pub resonance_below: f64,
    /// `ρ` above this is regular growth.
    pub regular_above: f64,
    /// Far-field `max|u|` below this fraction of the peak is a decaying solution.
    pub decay_fraction: f64,
}

impl Default for EdgeThresholds {
    fn default() -> Self {
        Self {
            resonance_below: 1e-3,
            regular_above: 1e-2,
            decay_fraction: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeReport {
    pub class: EdgeClass,
    /// Far-field offset `α` of `u ≈ α + βx`.
    pub offset: f64,
    /// Far-field slope `β`.
    pub slope: f64,
    /// `ρ = |β|L/(|β|L + |α|)`.
    pub growth_ratio: f64,
    /// Far-field `max|u|` over the global `max|u|`.
    pub tail_fraction: f64,
    pub window: (f64, f64),
}

/// Integrates `u″ = V u` on `[0, L]` with RK4 at step `h/2` and classifies the
/// far-field behaviour on the last quarter of the interval.
pub fn edge_classification(
    potential: &dyn Potential,
    grid: &GridSpec,
    thresholds: &EdgeThresholds,
) -> Result<EdgeReport> {
    let dt = 0.5 * grid.h();
    let steps = 2 * (grid.n() + 1);
    let q: Vec<f64> = (0..=2 * steps)
        .map(|j| potential.value(j as f64 * 0.5 * dt))
        .collect();
    let (u, du) = integrate_linear(&q, dt, 0.0, 1.0);
    let length = grid.length();
    let start = steps - steps / 4;
    let peak = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tail = u[start..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let count = (steps + 1 - start) as f64;
    let slope = du[start..].iter().sum::<f64>() / count;
    let offset = (start..=steps)
        .map(|j| u[j] - du[j] * j as f64 * dt)
        .sum::<f64>()
        / count;
    let growth = slope.abs() * length;
    let growth_ratio = if growth + offset.abs() > 0.0 {
        growth / (growth + offset.abs())
    } else {
        0.0
    };
    let tail_fraction = if peak > 0.0 { tail / peak } else { 0.0 };
    let class = if tail_fraction < thresholds.decay_fraction {
        EdgeClass::Eigenvalue
    } else if growth_ratio < thresholds.resonance_below {
        EdgeClass::Resonance
    } else if growth_ratio > thresholds.regular_above {
        EdgeClass::Regular
    } else {
        EdgeClass::Indeterminate
    };
    Ok(EdgeReport {
        class,
        offset,
        slope,
        growth_ratio,
        tail_fraction,
        window: (start as f64 * dt, length),
    })
}
