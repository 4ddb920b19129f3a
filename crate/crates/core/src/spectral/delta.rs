//! Smeared-delta checks of continuum normalizations.
//!
//! A density `⟨u_ω, u_ω′⟩ = n(ω) δ(ω − ω′)` cannot be sampled pointwise, so modes
//! on a uniform `ω`-grid are combined into packets `g(ω₀) = ∫ ρ(ω − ω₀) u_ω dω`
//! with a smooth compact bump `ρ`, and `⟨g(ω₀), g(ω₁)⟩` is compared with
//! `∫ ρ(ω − ω₀) ρ(ω − ω₁) n(ω) dω`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::linalg::C64;

use super::continuum::ContinuumMode;
use super::discrete::DiscreteMode;

/// `ρ(t) = exp(1 − 1/(1 − (t/σ)²))` on `|t| < σ`, zero outside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bump {
    pub half_width: f64,
}

impl Bump {
    pub fn value(&self, t: f64) -> f64 {
        let u = t / self.half_width;
        if u.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - u * u)).exp()
        }
    }
}

/// A mode that can be accumulated into packets.
pub trait Smearable: Sync {
    fn frequency(&self) -> f64;
    fn grid(&self) -> &GridSpec;
    /// Number of complex samples (`N` for scalar modes, `2N` for vector modes).
    fn sample_len(&self) -> usize;
    fn accumulate(&self, coef: C64, out: &mut [C64]);
}

impl Smearable for ContinuumMode {
    fn frequency(&self) -> f64 {
        self.omega()
    }

    fn grid(&self) -> &GridSpec {
        ContinuumMode::grid(self)
    }

    fn sample_len(&self) -> usize {
        self.samples().len()
    }

    fn accumulate(&self, coef: C64, out: &mut [C64]) {
        out.iter_mut()
            .zip(self.samples())
            .for_each(|(o, &v)| *o += coef * v);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SmearedOverlaps {
    pub sigma: f64,
    pub spacing: f64,
    pub centers: Vec<f64>,
    /// `Re⟨g_a, g_b⟩` and `Im⟨g_a, g_b⟩`.
    pub overlap_re: Vec<Vec<f64>>,
    pub overlap_im: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    /// `max_a |⟨g_a, g_a⟩ − target_a| / target_a`.
    pub diagonal_deviation: f64,
    /// `max |⟨g_a, g_b⟩| / √(⟨g_a,g_a⟩⟨g_b,g_b⟩)` over pairs with disjoint bumps.
    pub off_diagonal: f64,
    #[serde(skip)]
    pub packets: Vec<Vec<C64>>,
}

impl SmearedOverlaps {
    /// `max_{k,a} |⟨φ_k, g_a⟩|` for discrete modes on the same grid.
    pub fn discrete_cross(&self, grid: &GridSpec, discrete: &[DiscreteMode]) -> Result<f64> {
        let mut worst = 0.0f64;
        for d in discrete {
            if d.samples.len() != grid.n() {
                return Err(Error::Validation(
                    "discrete mode lives on a different grid".into(),
                ));
            }
            let phi: Vec<C64> = d.samples.iter().map(|&v| C64::new(v, 0.0)).collect();
            for g in &self.packets {
                let n = phi.len();
                // Vector packets: pair φ with each component block.
                for block in g.chunks(n) {
                    worst = worst.max(grid.inner(&phi, block).norm());
                }
            }
        }
        Ok(worst)
    }
}

fn validate_frequencies<M: Smearable>(modes: &[M], sigma: f64, centers: &[f64]) -> Result<f64> {
    if modes.len() < 3 {
        return Err(Error::Validation(
            "need at least three modes on the frequency grid".into(),
        ));
    }
    let grid = modes[0].grid();
    if modes
        .iter()
        .any(|m| m.grid() != grid || m.sample_len() != modes[0].sample_len())
    {
        return Err(Error::Validation("modes live on different grids".into()));
    }
    let w: Vec<f64> = modes.iter().map(|m| m.frequency()).collect();
    let spacing = (w[w.len() - 1] - w[0]) / (w.len() - 1) as f64;
    if !(spacing > 0.0)
        || w.windows(2)
            .any(|p| ((p[1] - p[0]) - spacing).abs() > 1e-6 * spacing)
    {
        return Err(Error::Validation(
            "modes must sit on a uniform increasing frequency grid".into(),
        ));
    }
    if !(sigma >= 4.0 * spacing) {
        return Err(Error::Validation(format!(
            "window sigma = {sigma} is too small for the frequency spacing {spacing:.3e} (need sigma ≥ 4·spacing)"
        )));
    }
    for &c in centers {
        if c - sigma < w[0] - 1e-12 || c + sigma > w[w.len() - 1] + 1e-12 {
            return Err(Error::Validation(format!(
                "bump around {c} with half-width {sigma} leaves the sampled range [{}, {}]",
                w[0],
                w[w.len() - 1]
            )));
        }
    }
    Ok(spacing)
}

/// `g(ω₀) = Σ_j Δω ρ(ω_j − ω₀) u_j`.
pub fn packet<M: Smearable>(modes: &[M], sigma: f64, center: f64) -> Result<Vec<C64>> {
    let spacing = validate_frequencies(modes, sigma, &[center])?;
    Ok(packet_unchecked(
        modes,
        Bump { half_width: sigma },
        spacing,
        center,
    ))
}

fn packet_unchecked<M: Smearable>(modes: &[M], bump: Bump, spacing: f64, center: f64) -> Vec<C64> {
    let mut g = vec![C64::new(0.0, 0.0); modes[0].sample_len()];
    for m in modes {
        let r = bump.value(m.frequency() - center);
        if r != 0.0 {
            m.accumulate(C64::new(spacing * r, 0.0), &mut g);
        }
    }
    g
}

/// Smeared overlaps against the density `n(ω)`.
pub fn smeared_overlaps<M: Smearable>(
    modes: &[M],
    sigma: f64,
    centers: &[f64],
    density: impl Fn(f64) -> f64,
) -> Result<SmearedOverlaps> {
    let spacing = validate_frequencies(modes, sigma, centers)?;
    let bump = Bump { half_width: sigma };
    let grid = *modes[0].grid();
    let packets: Vec<Vec<C64>> = centers
        .par_iter()
        .map(|&c| packet_unchecked(modes, bump, spacing, c))
        .collect();
    let freqs: Vec<f64> = modes.iter().map(|m| m.frequency()).collect();
    let k = centers.len();
    let mut overlap_re = vec![vec![0.0; k]; k];
    let mut overlap_im = vec![vec![0.0; k]; k];
    let mut targets = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in 0..k {
            let o = grid.inner(&packets[a], &packets[b]);
            overlap_re[a][b] = o.re;
            overlap_im[a][b] = o.im;
            targets[a][b] = freqs
                .iter()
                .map(|&w| {
                    spacing * bump.value(w - centers[a]) * bump.value(w - centers[b]) * density(w)
                })
                .sum();
        }
    }
    let mut diagonal_deviation = 0.0f64;
    let mut off_diagonal = 0.0f64;
    for a in 0..k {
        diagonal_deviation =
            diagonal_deviation.max((overlap_re[a][a] - targets[a][a]).abs() / targets[a][a].abs());
        for b in 0..k {
            if (centers[a] - centers[b]).abs() >= 2.0 * sigma {
                let o = C64::new(overlap_re[a][b], overlap_im[a][b]).norm();
                off_diagonal = off_diagonal.max(o / (overlap_re[a][a] * overlap_re[b][b]).sqrt());
            }
        }
    }
    Ok(SmearedOverlaps {
        sigma,
        spacing,
        centers: centers.to_vec(),
        overlap_re,
        overlap_im,
        targets,
        diagonal_deviation,
        off_diagonal,
        packets,
    })
}

/// Smeared check of `⟨e_ω, e_ω′⟩ = π δ(|ω| − |ω′|)`.
pub fn delta_normalization_check(
    modes: &[ContinuumMode],
    sigma: f64,
    centers: &[f64],
) -> Result<SmearedOverlaps> {
    smeared_overlaps(modes, sigma, centers, |_| std::f64::consts::PI)
}
