//! Smeared checks of the symplectic normalization: `⟨a_ω, J a_ω′⟩ = i sgn ω δ(ω − ω′)`
//! and `⟨h_ω, h_ω′⟩ = |ω| δ(ω − ω′)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{C64, I};
use crate::spectral::{packet, smeared_overlaps, Bump, SmearedOverlaps};

use super::modes::{symplectic_pairing, AMode, Normalization, Spectrum, VectorMode};
use crate::field::FieldState;

#[derive(Clone, Debug, Serialize)]
pub struct PairingReport {
    pub sigma: f64,
    pub centers: Vec<f64>,
    /// Packet mass `∫ρ_a ρ_b dω`.
    pub mass: Vec<Vec<f64>>,
    pub pairing_re: Vec<Vec<f64>>,
    pub pairing_im: Vec<Vec<f64>>,
    /// `max_a |⟨G_a, J G_a⟩/mass_a − i sgn ω_a|`.
    pub diagonal_deviation: f64,
    /// `max |⟨G_a, J G_b⟩| / √(mass_a mass_b)` over pairs with disjoint bumps.
    pub cross: f64,
    /// `max |⟨a_k, J G_a⟩| / √mass_a` over the supplied discrete modes.
    pub discrete_cross: f64,
}

fn require_symplectic(modes: &[VectorMode]) -> Result<()> {
    if let Some(m) = modes
        .iter()
        .find(|m| m.normalization() != Normalization::Symplectic)
    {
        return Err(Error::Validation(format!(
            "symplectic pairing needs modes tagged '{}', got '{}' at omega = {}; apply renormalize_symplectic first",
            Normalization::Symplectic.tag(),
            m.normalization().tag(),
            m.omega()
        )));
    }
    Ok(())
}

/// Packets `G_a = ∫ρ(ω − ω_a) a_ω dω` over `modes` (uniform increasing `ω`,
/// one sign) and their pairings `⟨G_a, J G_b⟩`, plus cross pairings with
/// discrete modes.
pub fn pairing_check(
    modes: &[VectorMode],
    discrete: &[VectorMode],
    sigma: f64,
    centers: &[f64],
) -> Result<PairingReport> {
    require_symplectic(modes)?;
    require_symplectic(discrete)?;
    if discrete
        .iter()
        .any(|m| !matches!(m.spectrum(), Spectrum::Discrete { .. }))
    {
        return Err(Error::Validation(
            "discrete list contains continuum modes".into(),
        ));
    }
    let grid = *modes
        .first()
        .ok_or_else(|| Error::Validation("no modes supplied".into()))?
        .grid();
    let a_modes: Vec<AMode> = modes.iter().map(AMode).collect();
    let packets: Vec<FieldState> = centers
        .iter()
        .map(|&c| FieldState::from_stacked(&packet(&a_modes, sigma, c)?))
        .collect::<Result<_>>()?;
    let bump = Bump { half_width: sigma };
    let freqs: Vec<f64> = modes.iter().map(|m| m.omega()).collect();
    let spacing = (freqs[freqs.len() - 1] - freqs[0]) / (freqs.len() - 1) as f64;
    let k = centers.len();
    let mut mass = vec![vec![0.0; k]; k];
    let mut pairing_re = vec![vec![0.0; k]; k];
    let mut pairing_im = vec![vec![0.0; k]; k];
    let mut diagonal_deviation = 0.0f64;
    let mut cross = 0.0f64;
    for a in 0..k {
        for b in 0..k {
            mass[a][b] = freqs
                .iter()
                .map(|&w| spacing * bump.value(w - centers[a]) * bump.value(w - centers[b]))
                .sum();
            let p = symplectic_pairing(&grid, &packets[a], &packets[b]);
            pairing_re[a][b] = p.re;
            pairing_im[a][b] = p.im;
        }
    }
    for a in 0..k {
        let p = C64::new(pairing_re[a][a], pairing_im[a][a]);
        let expected = I * centers[a].signum();
        diagonal_deviation = diagonal_deviation.max((p / mass[a][a] - expected).norm());
        for b in 0..k {
            if (centers[a] - centers[b]).abs() >= 2.0 * sigma {
                let p = C64::new(pairing_re[a][b], pairing_im[a][b]).norm();
                cross = cross.max(p / (mass[a][a] * mass[b][b]).sqrt());
            }
        }
    }
    let mut discrete_cross = 0.0f64;
    for d in discrete {
        let ad = d.a();
        for (a, g) in packets.iter().enumerate() {
            let p = symplectic_pairing(&grid, &ad, g).norm();
            discrete_cross = discrete_cross.max(p / mass[a][a].sqrt());
        }
    }
    Ok(PairingReport {
        sigma,
        centers: centers.to_vec(),
        mass,
        pairing_re,
        pairing_im,
        diagonal_deviation,
        cross,
        discrete_cross,
    })
}

/// Smeared check of `⟨h_ω, h_ω′⟩ = n(ω) δ(ω − ω′)` for the normalization the modes carry.
pub fn vector_delta_check(
    modes: &[VectorMode],
    sigma: f64,
    centers: &[f64],
) -> Result<SmearedOverlaps> {
    let norm = modes
        .first()
        .ok_or_else(|| Error::Validation("no modes supplied".into()))?
        .normalization();
    if modes.iter().any(|m| m.normalization() != norm) {
        return Err(Error::Validation(
            "modes carry mixed normalization tags".into(),
        ));
    }
    smeared_overlaps(modes, sigma, centers, |w| norm.density(w))
}
