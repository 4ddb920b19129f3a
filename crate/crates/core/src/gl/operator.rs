//! Finite-difference operators on the odd sector: `S = −d² + m² + V` and the
//! moving-kink energy block `B_v = [[S_v, −vD], [vD, I]]`.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::linalg::tridiag::SymTridiagonal;
use crate::linalg::{SymmetricEigen, C64};

use super::kink::kink_profile;
use super::model::NonlinearityModel;
use super::potential::{KinkPotential, Potential};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OperatorKind {
    /// Scalar Schrödinger operator `−d² + m² + V`.
    S,
    /// Block operator `[[S_v, −vD], [vD, I]]` of size `2N`.
    BvBlock { v: f64 },
}

/// Banded real-symmetric operator on the half-line grid with Dirichlet
/// conditions at `0` and `L`.
#[derive(Clone, Debug)]
pub struct GridOperator {
    kind: OperatorKind,
    grid: GridSpec,
    m2: f64,
    potential: Vec<f64>,
    s_block: SymTridiagonal,
}

impl GridOperator {
    /// `−d²/dx² + m² + V` by second-order central differences.
    pub fn schrodinger(potential: &dyn Potential, m2: f64, grid: &GridSpec) -> Result<Self> {
        grid.check_resolution(m2)?;
        Self::schrodinger_unguarded(potential, m2, grid)
    }

    /// Same as [`GridOperator::schrodinger`] without the resolution guard (for
    /// coarse diagnostic grids and tests on synthetic potentials).
    pub fn schrodinger_unguarded(
        potential: &dyn Potential,
        m2: f64,
        grid: &GridSpec,
    ) -> Result<Self> {
        let values = potential.sample(&grid.points());
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation(
                "potential has non-finite samples on the grid".into(),
            ));
        }
        let h2 = grid.h() * grid.h();
        let diag = values.iter().map(|v| 2.0 / h2 + m2 + v).collect();
        let off = vec![-1.0 / h2; grid.n() - 1];
        Ok(Self {
            kind: OperatorKind::S,
            grid: *grid,
            m2,
            potential: values,
            s_block: SymTridiagonal::new(diag, off)?,
        })
    }

    /// `[[S_v, −vD], [vD, I]]` with `D` the antisymmetric central difference.
    pub fn moving_kink(
        potential: &dyn Potential,
        m2: f64,
        v: f64,
        grid: &GridSpec,
    ) -> Result<Self> {
        if !(v.abs() < 1.0) {
            return Err(Error::Domain(format!(
                "velocity must satisfy |v| < 1, got {v}"
            )));
        }
        let mut op = Self::schrodinger(potential, m2, grid)?;
        op.kind = OperatorKind::BvBlock { v };
        Ok(op)
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    /// Potential samples at the interior grid points.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// The scalar block `S` (or `S_v`).
    pub fn tridiagonal(&self) -> &SymTridiagonal {
        &self.s_block
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            OperatorKind::S => self.grid.n(),
            OperatorKind::BvBlock { .. } => 2 * self.grid.n(),
        }
    }

    /// Dense entry `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let n = self.grid.n();
        match self.kind {
            OperatorKind::S => self.s_block.entry(i, j),
            OperatorKind::BvBlock { v } => {
                let d = |r: usize, c: usize| {
                    let inv = 0.5 / self.grid.h();
                    if c == r + 1 {
                        inv
                    } else if r == c + 1 {
                        -inv
                    } else {
                        0.0
                    }
                };
                match (i < n, j < n) {
                    (true, true) => self.s_block.entry(i, j),
                    (true, false) => -v * d(i, j - n),
                    (false, true) => v * d(i - n, j),
                    (false, false) => {
                        if i == j {
                            1.0
                        } else {
                            0.0
                        }
                    }
                }
            }
        }
    }

    /// `max |M_ij − M_ji|` over the band.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dim();
        let bw = match self.kind {
            OperatorKind::S => 1,
            OperatorKind::BvBlock { .. } => self.grid.n() + 1,
        };
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..(i + bw + 1).min(n) {
                d = d.max((self.entry(i, j) - self.entry(j, i)).abs());
            }
        }
        d
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self.kind {
            OperatorKind::S => self.s_block.apply(x),
            OperatorKind::BvBlock { v } => {
                let n = self.grid.n();
                let (x1, x2) = x.split_at(n);
                let inv = 0.5 / self.grid.h();
                let dx = |u: &[f64], i: usize| {
                    let right = if i + 1 < n { u[i + 1] } else { 0.0 };
                    let left = if i > 0 { u[i - 1] } else { 0.0 };
                    inv * (right - left)
                };
                let s1 = self.s_block.apply(x1);
                let mut out = Vec::with_capacity(2 * n);
                out.extend((0..n).map(|i| s1[i] - v * dx(x2, i)));
                out.extend((0..n).map(|i| v * dx(x1, i) + x2[i]));
                out
            }
        }
    }

    pub fn apply_complex(&self, x: &[C64]) -> Vec<C64> {
        let re: Vec<f64> = x.iter().map(|z| z.re).collect();
        let im: Vec<f64> = x.iter().map(|z| z.im).collect();
        self.apply(&re)
            .into_iter()
            .zip(self.apply(&im))
            .map(|(a, b)| C64::new(a, b))
            .collect()
    }

    /// Applies the scalar block to samples `u` using `left` and `right` as the
    /// neighbouring values at `x = 0` and `x = L` instead of zero.
    pub fn apply_with_boundary(&self, u: &[f64], left: f64, right: f64) -> Vec<f64> {
        let mut out = self.s_block.apply(u);
        let h2 = self.grid.h() * self.grid.h();
        out[0] -= left / h2;
        let last = out.len() - 1;
        out[last] -= right / h2;
        out
    }

    /// Full dense eigendecomposition.
    pub fn eigen(&self) -> Result<SymmetricEigen> {
        SymmetricEigen::compute(self.dim(), |i, j| self.entry(i, j))
    }

    /// All eigenvalues, ascending (dense solver).
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        SymmetricEigen::eigenvalues(self.dim(), |i, j| self.entry(i, j))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        match self.kind {
            OperatorKind::S => Ok(self.s_block.eigenvalue_by_index(0)),
            OperatorKind::BvBlock { .. } => Ok(self.eigenvalues()?[0]),
        }
    }
}

/// Grid `S` for the static kink of `model`.
pub fn build_s_operator(model: &NonlinearityModel, grid: &GridSpec) -> Result<GridOperator> {
    let kink = kink_profile(model, 0.0, grid)?;
    GridOperator::schrodinger(&KinkPotential::new(model, kink), model.m2(), grid)
}

/// Grid `B_v` for the kink of `model` moving at velocity `v`.
pub fn build_bv_operator(
    model: &NonlinearityModel,
    grid: &GridSpec,
    v: f64,
) -> Result<GridOperator> {
    let kink = kink_profile(model, v, grid)?;
    GridOperator::moving_kink(&KinkPotential::new(model, kink), model.m2(), v, grid)
}

/// The translation mode `(s_v′, −v s_v″)` of the moving kink on the full-line grid.
#[derive(Clone, Debug)]
pub struct KernelVector {
    pub v: f64,
    pub points: Vec<f64>,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    potential: Vec<f64>,
    m2: f64,
    h: f64,
}

pub fn kernel_vector(model: &NonlinearityModel, v: f64, grid: &GridSpec) -> Result<KernelVector> {
    let kink = kink_profile(model, v, grid)?;
    let (ds, d2s) = kink.full_line_derivatives();
    let potential = KinkPotential::new(model, kink);
    let points = grid.full_line_points();
    Ok(KernelVector {
        v,
        potential: potential.sample(&points),
        second: d2s.iter().map(|d| -v * d).collect(),
        first: ds,
        points,
        m2: model.m2(),
        h: grid.h(),
    })
}

impl KernelVector {
    /// `B_v w` on the full-line grid with Dirichlet conditions at `±L`.
    pub fn apply_bv(&self, w1: &[f64], w2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = w1.len();
        let h2 = self.h * self.h;
        let at = |u: &[f64], i: isize| {
            if i < 0 || i as usize >= n {
                0.0
            } else {
                u[i as usize]
            }
        };
        let mut r1 = Vec::with_capacity(n);
        let mut r2 = Vec::with_capacity(n);
        for i in 0..n {
            let ii = i as isize;
            let lap = (at(w1, ii + 1) - 2.0 * w1[i] + at(w1, ii - 1)) / h2;
            let s1 = -lap + (self.m2 + self.potential[i]) * w1[i];
            let d2 = (at(w2, ii + 1) - at(w2, ii - 1)) / (2.0 * self.h);
            let d1 = (at(w1, ii + 1) - at(w1, ii - 1)) / (2.0 * self.h);
            r1.push(s1 - self.v * d2);
            r2.push(self.v * d1 + w2[i]);
        }
        (r1, r2)
    }

    /// `‖B_v w‖ / ‖w‖` in the Euclidean norm over both components.
    pub fn residual_ratio(&self) -> f64 {
        let (r1, r2) = self.apply_bv(&self.first, &self.second);
        let num: f64 = r1.iter().chain(&r2).map(|x| x * x).sum();
        let den: f64 = self.first.iter().chain(&self.second).map(|x| x * x).sum();
        (num / den).sqrt()
    }

    /// `max |s_v′(x) − s_v′(−x)|`.
    pub fn evenness_defect(&self) -> f64 {
        let n = self.first.len();
        (0..n / 2)
            .map(|i| (self.first[i] - self.first[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }
}
