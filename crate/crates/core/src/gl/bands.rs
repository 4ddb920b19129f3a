//! Continuous spectrum of the moving-kink energy operator `B_v` from the
//! dispersion relation `k²(1 − λ − v²) + (m² − λ)(1 − λ) = 0`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Interval with closedness flags; `hi = ∞` marks an unbounded band.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed {
            x >= self.lo
        } else {
            x > self.lo
        };
        let below = if self.hi.is_infinite() {
            true
        } else if self.hi_closed {
            x <= self.hi
        } else {
            x < self.hi
        };
        above && below
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        if self.hi.is_infinite() {
            write!(f, "{l}{}, ∞)", self.lo)
        } else {
            let r = if self.hi_closed { ']' } else { ')' };
            write!(f, "{l}{}, {}{r}", self.lo, self.hi)
        }
    }
}

/// Which branch of the case table applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandCase {
    /// `1 ≤ m²`
    HeavyMass,
    /// `m² ≤ 1 − v²`
    LightMass,
    /// `1 − v² ≤ m² ≤ 1`
    Intermediate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandTable {
    pub v: f64,
    pub m2: f64,
    pub case: BandCase,
    pub bands: Vec<Interval>,
}

impl BandTable {
    /// Infimum of the union of bands.
    pub fn floor(&self) -> f64 {
        self.bands
            .iter()
            .map(|b| b.lo)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, lambda: f64) -> bool {
        self.bands.iter().any(|b| b.contains(lambda))
    }
}

/// `k²(λ) = (m² − λ)(1 − λ)/(λ − 1 + v²)`.
pub fn dispersion_k2(lambda: f64, v: f64, m2: f64) -> f64 {
    (m2 - lambda) * (1.0 - lambda) / (lambda - 1.0 + v * v)
}

/// The `λ`-set where `k² ≥ 0`, as the three-case table.
pub fn continuous_spectrum_bands(v: f64, m2: f64) -> Result<BandTable> {
    if !(v.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "velocity must satisfy |v| < 1, got {v}"
        )));
    }
    if !(m2 > 0.0) {
        return Err(Error::Domain(format!(
            "mass squared must be positive, got {m2}"
        )));
    }
    let g = 1.0 - v * v;
    let closed = |lo, hi| Interval {
        lo,
        hi,
        lo_closed: true,
        hi_closed: true,
    };
    let (case, bands) = if 1.0 <= m2 {
        (
            BandCase::HeavyMass,
            vec![closed(g, 1.0), closed(m2, f64::INFINITY)],
        )
    } else if m2 <= g {
        (
            BandCase::LightMass,
            vec![
                Interval {
                    lo: m2,
                    hi: g,
                    lo_closed: true,
                    hi_closed: false,
                },
                Interval {
                    lo: 1.0,
                    hi: f64::INFINITY,
                    lo_closed: false,
                    hi_closed: false,
                },
            ],
        )
    } else {
        (
            BandCase::Intermediate,
            vec![closed(g, m2), closed(1.0, f64::INFINITY)],
        )
    };
    Ok(BandTable { v, m2, case, bands })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heavy_mass_case() {
        let t = continuous_spectrum_bands(0.5, 2.0).unwrap();
        assert_eq!(t.case, BandCase::HeavyMass);
        assert_eq!(
            t.bands[0],
            Interval {
                lo: 0.75,
                hi: 1.0,
                lo_closed: true,
                hi_closed: true
            }
        );
        assert_eq!(t.bands[1].lo, 2.0);
        assert!(t.bands[1].hi.is_infinite());
        assert_eq!(t.floor(), 0.75);
        assert_eq!(t.bands[0].to_string(), "[0.75, 1]");
    }

    #[test]
    fn light_mass_case() {
        let t = continuous_spectrum_bands(0.5, 0.5).unwrap();
        assert_eq!(t.case, BandCase::LightMass);
        assert_eq!(t.bands[0].to_string(), "[0.5, 0.75)");
        assert_eq!(t.bands[1].to_string(), "(1, ∞)");
        assert_eq!(t.floor(), 0.5);
    }

    #[test]
    fn intermediate_case() {
        let t = continuous_spectrum_bands(0.5, 0.9).unwrap();
        assert_eq!(t.case, BandCase::Intermediate);
        assert_eq!(t.bands[0].to_string(), "[0.75, 0.9]");
        assert_eq!(t.floor(), 0.75);
    }

    #[test]
    fn invalid_parameters() {
        assert!(continuous_spectrum_bands(1.0, 2.0).is_err());
        assert!(continuous_spectrum_bands(0.2, 0.0).is_err());
    }
}
