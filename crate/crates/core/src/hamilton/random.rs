//! Seeded random Hamilton systems for property tests and the verify battery.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::{ComplexMatrix, C64, I};

use super::{HamiltonSystem, PhaseVector};

/// Deterministic generator of random systems and states.
pub struct SystemSampler {
    rng: ChaCha8Rng,
}

impl SystemSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn dimension(&mut self, max: usize, even: bool) -> usize {
        let n = self.rng.gen_range(1..=max / 2) * 2;
        if even || self.rng.gen_bool(0.5) {
            n
        } else {
            n - 1
        }
    }

    fn gaussian_matrix(&mut self, n: usize, real: bool) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, |_, _| {
            let re = self.normal();
            let im = if real { 0.0 } else { self.normal() };
            C64::new(re, im)
        })
    }

    /// Unitary (orthogonal when `real`) matrix from Gram–Schmidt on Gaussian columns.
    fn unitary(&mut self, n: usize, real: bool) -> ComplexMatrix {
        let g = self.gaussian_matrix(n, real);
        let mut cols: Vec<Vec<C64>> = (0..n)
            .map(|j| (0..n).map(|i| g.get(i, j)).collect())
            .collect();
        for j in 0..n {
            for _ in 0..2 {
                for k in 0..j {
                    let proj: C64 = (0..n).map(|i| cols[j][i] * cols[k][i].conj()).sum();
                    for i in 0..n {
                        let v = cols[k][i];
                        cols[j][i] -= proj * v;
                    }
                }
            }
            let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            cols[j].iter_mut().for_each(|z| *z /= norm);
        }
        ComplexMatrix::from_fn(n, |i, j| cols[j][i])
    }

    /// Random system of dimension `n`. Real systems need even `n` and use
    /// `J = O J₀ Oᵀ` with the canonical block `J₀`; complex systems use
    /// `J = U diag(±i) U*`. `B = MM*/n + δI` with `δ ∈ [0.1, 1]`.
    pub fn system(&mut self, n: usize, real: bool) -> Result<HamiltonSystem> {
        let u = self.unitary(n, real);
        let j0 = if real {
            let half = n / 2;
            ComplexMatrix::from_real_fn(n, |r, c| {
                if c == r + half {
                    1.0
                } else if r == c + half {
                    -1.0
                } else {
                    0.0
                }
            })
        } else {
            let signs: Vec<f64> = (0..n)
                .map(|_| if self.rng.gen_bool(0.5) { 1.0 } else { -1.0 })
                .collect();
            ComplexMatrix::from_fn(n, |r, c| {
                if r == c {
                    I * signs[r]
                } else {
                    C64::new(0.0, 0.0)
                }
            })
        };
        let j = u.mul(&j0)?.mul(&u.adjoint())?;
        let m = self.gaussian_matrix(n, real);
        let delta = self.uniform(0.1, 1.0);
        let b = m
            .mul(&m.adjoint())?
            .scale(C64::new(1.0 / n as f64, 0.0))
            .add(&ComplexMatrix::identity(n).scale(C64::new(delta, 0.0)))?;
        HamiltonSystem::new(j, b, 0.99 * delta)
    }

    pub fn state(&mut self, n: usize, real: bool) -> PhaseVector {
        if real {
            let v: Vec<f64> = (0..n).map(|_| self.normal()).collect();
            PhaseVector::real(&v)
        } else {
            PhaseVector::new(
                (0..n)
                    .map(|_| C64::new(self.normal(), self.normal()))
                    .collect(),
            )
        }
    }
}
