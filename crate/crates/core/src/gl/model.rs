use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Which family a nonlinearity belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Cubic,
    Custom,
}

/// Odd nonlinearity `F = −U′` with vacua `±a` and mass `m² = U″(a) = −F′(a)`.
#[derive(Clone)]
pub struct NonlinearityModel {
    a: f64,
    m2: f64,
    f: RealFn,
    df: RealFn,
    kind: ModelKind,
    rule: Arc<(Vec<f64>, Vec<f64>)>,
}

impl fmt::Debug for NonlinearityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearityModel")
            .field("kind", &self.kind)
            .field("a", &self.a)
            .field("m2", &self.m2)
            .finish()
    }
}

/// Tolerance for the vacuum, mass and parity checks on a custom model.
const MODEL_TOL: f64 = 1e-9;

/// `F(ψ) = ψ − ψ³`, `U(ψ) = (ψ² − 1)²/4`: vacua `±1`, `m² = 2`.
pub fn make_cubic_model() -> NonlinearityModel {
    NonlinearityModel {
        a: 1.0,
        m2: 2.0,
        f: Arc::new(|s| s - s * s * s),
        df: Arc::new(|s| 1.0 - 3.0 * s * s),
        kind: ModelKind::Cubic,
        rule: Arc::new(gauss_legendre(24)),
    }
}

impl NonlinearityModel {
    /// Model from user-supplied `F` and `F′`, validated for vacuum, mass, parity
    /// and bistability (`U > 0` strictly between the vacua).
    pub fn custom(
        a: f64,
        m2: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(a > 0.0) || !(m2 > 0.0) {
            return Err(Error::Model(format!(
                "need a > 0 and m² > 0, got a = {a}, m² = {m2}"
            )));
        }
        let model = Self {
            a,
            m2,
            f: Arc::new(f),
            df: Arc::new(df),
            kind: ModelKind::Custom,
            rule: Arc::new(gauss_legendre(24)),
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let fa = self.force(self.a);
        if fa.abs() > MODEL_TOL {
            return Err(Error::Model(format!("F(a) = {fa:.3e} is not zero")));
        }
        let dfa = self.force_slope(self.a);
        if (dfa + self.m2).abs() > MODEL_TOL * self.m2.max(1.0) {
            return Err(Error::Model(format!(
                "F′(a) = {dfa} differs from −m² = {}",
                -self.m2
            )));
        }
        for i in 1..200 {
            let s = self.a * i as f64 / 200.0;
            let odd = self.force(s) + self.force(-s);
            if odd.abs() > MODEL_TOL * self.force(s).abs().max(1.0) {
                return Err(Error::Model(format!(
                    "F is not odd at ψ = {s}: F(ψ) + F(−ψ) = {odd:.3e}"
                )));
            }
            if !(self.potential_energy(s) > 0.0) {
                return Err(Error::Model(format!(
                    "model is not bistable: U({s}) = {:.3e} ≤ 0 between the vacua",
                    self.potential_energy(s)
                )));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn mass(&self) -> f64 {
        self.m2.sqrt()
    }

    pub fn force(&self, s: f64) -> f64 {
        (self.f)(s)
    }

    pub fn force_slope(&self, s: f64) -> f64 {
        (self.df)(s)
    }

    /// `U(s) = ∫_s^a F(σ) dσ` by 24-point Gauss–Legendre, so that `U(±a) = 0`.
    pub fn potential_energy(&self, s: f64) -> f64 {
        let s = s.abs().min(self.a);
        let (x, w) = &*self.rule;
        let half = 0.5 * (self.a - s);
        let mid = 0.5 * (self.a + s);
        half * x
            .iter()
            .zip(w)
            .map(|(xi, wi)| wi * self.force(mid + half * xi))
            .sum::<f64>()
    }
}
