//! Quadrature rules: Gauss–Legendre (single and composite, with geometric
//! grading toward an endpoint), composite Simpson and trapezoid.

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let qf = q as f64;
    for i in 0..q.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(q, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(q: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if q == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=q {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = q as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and weights of a quadrature rule on some interval.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Gauss–Legendre rule with `q` nodes on each panel `[breaks[i], breaks[i+1]]`.
    pub fn composite(breaks: &[f64], q: usize) -> Self {
        let (x, w) = gauss_legendre(q);
        let mut rule = Rule::default();
        for p in breaks.windows(2) {
            let (a, b) = (p[0], p[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (xi, wi) in x.iter().zip(&w) {
                rule.nodes.push(mid + half * xi);
                rule.weights.push(half * wi);
            }
        }
        rule
    }
}

/// Panel breakpoints on `[lo, hi]` graded geometrically toward `lo`: the first
/// panel of width `width` is split `levels` times by `ratio`, then panels of
/// width `width` continue up to `hi` (the last one may be shorter).
pub fn graded_breaks(lo: f64, hi: f64, width: f64, levels: u32, ratio: f64) -> Result<Vec<f64>> {
    if !(hi > lo) || !(width > 0.0) || !(ratio > 1.0) {
        return Err(Error::Validation(format!(
            "graded panels need lo < hi, width > 0 and ratio > 1 (got lo={lo}, hi={hi}, width={width}, ratio={ratio})"
        )));
    }
    let first = width.min(hi - lo);
    let mut breaks = vec![lo];
    for j in (1..=levels).rev() {
        breaks.push(lo + first / ratio.powi(j as i32));
    }
    breaks.push(lo + first);
    let mut x = lo + first;
    while hi - x > 1e-12 * width {
        x = (x + width).min(hi);
        breaks.push(x);
    }
    Ok(breaks)
}

/// Composite Simpson rule on `[a, b]` with `panels` panels (each panel spans two
/// sub-intervals and uses its midpoint).
pub fn simpson_rule(a: f64, b: f64, panels: usize) -> Result<Rule> {
    if panels == 0 {
        return Err(Error::Validation(
            "Simpson rule needs at least one panel".into(),
        ));
    }
    let h = (b - a) / panels as f64;
    let mut rule = Rule::default();
    for p in 0..panels {
        let x0 = a + p as f64 * h;
        rule.nodes.extend([x0, x0 + 0.5 * h, x0 + h]);
        rule.weights.extend([h / 6.0, 4.0 * h / 6.0, h / 6.0]);
    }
    Ok(rule)
}

/// Trapezoid rule over arbitrary (sorted) nodes.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// Barycentric Lagrange interpolation on the nodes of one Gauss–Legendre panel.
#[derive(Clone, Debug)]
pub struct LagrangeBasis {
    nodes: Vec<f64>,
    bary: Vec<f64>,
}

impl LagrangeBasis {
    pub fn new(nodes: &[f64]) -> Self {
        let bary = (0..nodes.len())
            .map(|j| {
                1.0 / nodes
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, &xk)| nodes[j] - xk)
                    .product::<f64>()
            })
            .collect();
        Self {
            nodes: nodes.to_vec(),
            bary,
        }
    }

    /// Values of all basis polynomials at `x`.
    pub fn eval(&self, x: f64) -> Vec<f64> {
        if let Some(j) = self.nodes.iter().position(|&xj| xj == x) {
            let mut out = vec![0.0; self.nodes.len()];
            out[j] = 1.0;
            return out;
        }
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.bary)
            .map(|(&xj, &wj)| wj / (x - xj))
            .collect();
        let denom: f64 = terms.iter().sum();
        terms.into_iter().map(|t| t / denom).collect()
    }
}
