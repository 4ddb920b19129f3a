use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::GridSpec;

use super::model::NonlinearityModel;

/// Step of the fine table on which the first integral is integrated.
const TABLE_STEP: f64 = 1.0 / 512.0;

/// Kink profile stored on a fine table `x_j = j·δ`, `x ≥ 0`, with `s`, `s′`, `s″`
/// at every node. Off-node `s` uses quintic Hermite interpolation and the odd
/// extension to `x < 0`; `s′` and `s″` are then recomputed from `s` through the
/// first integral and the equation, which keeps them smooth across nodes
/// (differentiating the interpolant would not).
#[derive(Debug)]
struct KinkTable {
    step: f64,
    s: Vec<f64>,
    ds: Vec<f64>,
    d2s: Vec<f64>,
    model: NonlinearityModel,
    gamma2: f64,
}

impl KinkTable {
    fn eval_nonneg(&self, x: f64) -> (f64, f64, f64) {
        let last = self.s.len() - 1;
        let t = x / self.step;
        if t >= last as f64 {
            return (self.s[last], self.ds[last], self.d2s[last]);
        }
        let j = t.floor() as usize;
        let u = t - j as f64;
        let (s, _, _) = quintic_hermite(
            u,
            self.step,
            [self.s[j], self.ds[j], self.d2s[j]],
            [self.s[j + 1], self.ds[j + 1], self.d2s[j + 1]],
        );
        (s, self.slope(s), self.curvature(s))
    }

    /// `s′ = √(2U(s)/(1 − v²))`.
    fn slope(&self, s: f64) -> f64 {
        (2.0 * self.model.potential_energy(s).max(0.0) / self.gamma2).sqrt()
    }

    /// `s″ = −F(s)/(1 − v²)`.
    fn curvature(&self, s: f64) -> f64 {
        -self.model.force(s) / self.gamma2
    }
}

/// Value and first two derivatives of the quintic Hermite interpolant on one
/// interval of width `d`, at local coordinate `u ∈ [0, 1]`.
fn quintic_hermite(u: f64, d: f64, left: [f64; 3], right: [f64; 3]) -> (f64, f64, f64) {
    let [p0, m0, a0] = left;
    let [p1, m1, a1] = right;
    let (m0, m1) = (m0 * d, m1 * d);
    let (a0, a1) = (a0 * d * d, a1 * d * d);
    let u2 = u * u;
    let u3 = u2 * u;
    let u4 = u3 * u;
    let u5 = u4 * u;
    let h0 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
    let h1 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
    let h2 = 0.5 * u2 - 1.5 * u3 + 1.5 * u4 - 0.5 * u5;
    let h3 = 0.5 * u3 - u4 + 0.5 * u5;
    let h4 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
    let h5 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;
    let dh0 = -30.0 * u2 + 60.0 * u3 - 30.0 * u4;
    let dh1 = 1.0 - 18.0 * u2 + 32.0 * u3 - 15.0 * u4;
    let dh2 = u - 4.5 * u2 + 6.0 * u3 - 2.5 * u4;
    let dh3 = 1.5 * u2 - 4.0 * u3 + 2.5 * u4;
    let dh4 = -12.0 * u2 + 28.0 * u3 - 15.0 * u4;
    let dh5 = 30.0 * u2 - 60.0 * u3 + 30.0 * u4;
    let ddh0 = -60.0 * u + 180.0 * u2 - 120.0 * u3;
    let ddh1 = -36.0 * u + 96.0 * u2 - 60.0 * u3;
    let ddh2 = 1.0 - 9.0 * u + 18.0 * u2 - 10.0 * u3;
    let ddh3 = 3.0 * u - 12.0 * u2 + 10.0 * u3;
    let ddh4 = -24.0 * u + 84.0 * u2 - 60.0 * u3;
    let ddh5 = 60.0 * u - 180.0 * u2 + 120.0 * u3;
    let v = h0 * p0 + h1 * m0 + h2 * a0 + h3 * a1 + h4 * m1 + h5 * p1;
    let dv = dh0 * p0 + dh1 * m0 + dh2 * a0 + dh3 * a1 + dh4 * m1 + dh5 * p1;
    let ddv = ddh0 * p0 + ddh1 * m0 + ddh2 * a0 + ddh3 * a1 + ddh4 * m1 + ddh5 * p1;
    (v, dv / d, ddv / (d * d))
}

/// Traveling kink `s_v` solving `(1 − v²) s″ + F(s) = 0`, `s(0) = 0`, `s(±∞) = ±a`,
/// together with its samples on the half-line grid.
#[derive(Clone, Debug)]
pub struct Kink {
    v: f64,
    a: f64,
    grid: GridSpec,
    pub s: Vec<f64>,
    pub ds: Vec<f64>,
    pub d2s: Vec<f64>,
    table: Arc<KinkTable>,
}

/// Integrates the first integral `s′ = √(2U(s)/(1 − v²))` from `s(0) = 0` with
/// classical RK4 on a fine table covering `[0, L + 1]`, then samples on the grid.
pub fn kink_profile(model: &NonlinearityModel, v: f64, grid: &GridSpec) -> Result<Kink> {
    if !(v.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "kink velocity must satisfy |v| < 1, got {v}"
        )));
    }
    let gamma2 = 1.0 - v * v;
    let a = model.a();
    let mut table = KinkTable {
        step: TABLE_STEP,
        s: Vec::new(),
        ds: Vec::new(),
        d2s: Vec::new(),
        model: model.clone(),
        gamma2,
    };
    let slope = |s: f64| table.slope(s);
    if !(slope(0.0) > 0.0) {
        return Err(Error::Model(
            "U(0) ≤ 0: the model has no kink between its vacua".into(),
        ));
    }
    let steps = ((grid.length() + 1.0) / TABLE_STEP).ceil() as usize;
    let d = TABLE_STEP;
    let mut s = Vec::with_capacity(steps + 1);
    s.push(0.0);
    let mut cur = 0.0f64;
    for _ in 0..steps {
        let k1 = slope(cur);
        let k2 = slope(cur + 0.5 * d * k1);
        let k3 = slope(cur + 0.5 * d * k2);
        let k4 = slope(cur + d * k3);
        cur = (cur + d / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).min(a);
        s.push(cur);
    }
    table.ds = s.iter().map(|&si| table.slope(si)).collect();
    table.d2s = s.iter().map(|&si| table.curvature(si)).collect();
    table.s = s;
    let table = Arc::new(table);

    let mut kink = Kink {
        v,
        a,
        grid: *grid,
        s: Vec::new(),
        ds: Vec::new(),
        d2s: Vec::new(),
        table,
    };
    for x in grid.points() {
        let (s, ds, d2s) = kink.eval(x);
        kink.s.push(s);
        kink.ds.push(ds);
        kink.d2s.push(d2s);
    }
    kink.check_shape()?;
    Ok(kink)
}

impl Kink {
    pub fn velocity(&self) -> f64 {
        self.v
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `(s, s′, s″)` at any `x`, using oddness of `s`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let (s, ds, d2s) = self.table.eval_nonneg(x.abs());
        if x < 0.0 {
            (-s, ds, -d2s)
        } else {
            (s, ds, d2s)
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    fn check_shape(&self) -> Result<()> {
        let t = &self.table;
        if t.s.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Numerical("kink profile is not monotone".into()));
        }
        let end = *t.s.last().expect("table is non-empty");
        let tail = (self.a - end).abs();
        if tail > 1e-6 * self.a {
            log::warn!("kink has not reached the vacuum within the grid: a − s(L) = {tail:.3e}");
        }
        Ok(())
    }

    /// Max-norm of `(1 − v²) s″ + F(s)` on the grid, where `s″` is an independent
    /// sixth-order central difference of the sampled profile (odd extension at 0).
    /// The last three grid points are skipped.
    pub fn residual(&self, model: &NonlinearityModel) -> f64 {
        const C: [f64; 4] = [-49.0 / 18.0, 1.5, -0.15, 1.0 / 90.0];
        let n = self.s.len();
        let h2 = self.grid.h() * self.grid.h();
        let sample = |j: isize| -> f64 {
            // index j ↦ x = (j + 1) h; negative positions by oddness
            if j >= 0 {
                self.s[j as usize]
            } else if j == -1 {
                0.0
            } else {
                -self.s[(-j - 2) as usize]
            }
        };
        let gamma2 = 1.0 - self.v * self.v;
        let mut worst: f64 = 0.0;
        for i in 0..n.saturating_sub(3) {
            let ii = i as isize;
            let mut d2 = C[0] * sample(ii);
            for (k, c) in C.iter().enumerate().skip(1) {
                d2 += c * (sample(ii + k as isize) + sample(ii - k as isize));
            }
            d2 /= h2;
            worst = worst.max((gamma2 * d2 + model.force(self.s[i])).abs());
        }
        worst
    }

    /// Samples of `(s_v′, s_v″)` on the full-line grid points.
    pub fn full_line_derivatives(&self) -> (Vec<f64>, Vec<f64>) {
        self.grid
            .full_line_points()
            .into_iter()
            .map(|x| {
                let (_, ds, d2s) = self.eval(x);
                (ds, d2s)
            })
            .unzip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gl::model::make_cubic_model;

    #[test]
    fn cubic_static_kink_is_tanh() {
        let model = make_cubic_model();
        let grid = GridSpec::new(20.0, 1999).unwrap();
        let kink = kink_profile(&model, 0.0, &grid).unwrap();
        let r2 = 2f64.sqrt();
        for (i, x) in grid.points().into_iter().enumerate() {
            let exact = (x / r2).tanh();
            assert!((kink.s[i] - exact).abs() < 1e-8, "x={x}");
            let sech2 = 1.0 - exact * exact;
            assert!((kink.ds[i] - sech2 / r2).abs() < 1e-8);
        }
        for x in [0.3, 1.2345, 7.77, -2.5] {
            assert!((kink.value(x) - (x / r2).tanh()).abs() < 1e-8);
        }
        assert_eq!(kink.value(0.0), 0.0);
        assert!((kink.value(10.0) - (10.0 / r2).tanh()).abs() < 1e-8);
        assert!(kink.residual(&model) < 1e-8);
    }

    #[test]
    fn moving_kink_is_lorentz_contracted() {
        let model = make_cubic_model();
        let grid = GridSpec::new(20.0, 1999).unwrap();
        let kink = kink_profile(&model, 0.6, &grid).unwrap();
        for x in [0.1, 1.0, 3.3, 9.0] {
            let exact = (x / (2f64.sqrt() * 0.8)).tanh();
            assert!((kink.value(x) - exact).abs() < 1e-8);
        }
        assert!(kink.residual(&model) < 1e-8);
    }

    #[test]
    fn kink_is_odd_and_rejects_superluminal_speed() {
        let model = make_cubic_model();
        let grid = GridSpec::new(15.0, 999).unwrap();
        let kink = kink_profile(&model, 0.3, &grid).unwrap();
        for x in [0.4, 2.0, 5.5] {
            assert_eq!(kink.value(-x), -kink.value(x));
            assert_eq!(kink.eval(-x).1, kink.eval(x).1);
        }
        assert!(matches!(
            kink_profile(&model, 1.0, &grid),
            Err(Error::Domain(_))
        ));
        assert!(kink_profile(&model, -1.2, &grid).is_err());
    }

    #[test]
    fn quintic_hermite_reproduces_quintics() {
        let p = |x: f64| 1.0 + x - 2.0 * x.powi(3) + 0.5 * x.powi(5);
        let dp = |x: f64| 1.0 - 6.0 * x * x + 2.5 * x.powi(4);
        let ddp = |x: f64| -12.0 * x + 10.0 * x.powi(3);
        let (x0, d) = (0.3, 0.7);
        let (v, dv, ddv) = quintic_hermite(
            0.4,
            d,
            [p(x0), dp(x0), ddp(x0)],
            [p(x0 + d), dp(x0 + d), ddp(x0 + d)],
        );
        let x = x0 + 0.4 * d;
        assert!((v - p(x)).abs() < 1e-14);
        assert!((dv - dp(x)).abs() < 1e-13);
        assert!((ddv - ddp(x)).abs() < 1e-12);
    }
}
