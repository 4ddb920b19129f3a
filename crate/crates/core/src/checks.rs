//! The property battery behind `verify` and the acceptance run. Each check
//! measures one quantity against an independent reference and compares it
//! with a tolerance from [`Tolerances`].

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{
    BandsConfig, DeltaCheckConfig, EvolveConfig, GridConfig, NoncommuteConfig, Setup,
    SpectralConfig, Tolerances,
};
use crate::error::{Error, Result};
use crate::expansion::{
    lift_continuum, lift_discrete_pair, pairing_check, project, renormalize_symplectic,
    truncation_convergence, vector_delta_check, ExpansionSpec, ModeSet, PairingReport, ScalarModes,
    SpectralDecomposition, TruncationPoint, VectorMode,
};
use crate::field::FieldState;
use crate::gl::{
    build_bv_operator, continuous_spectrum_bands, dispersion_k2, kernel_vector, kink_profile,
    BandTable, GridOperator, NonlinearityModel,
};
use crate::grid::GridSpec;
use crate::hamilton::{
    build_nls_linearization, krein_factors, mild_solution_residual_with, propagate_real_with,
    SystemSampler,
};
use crate::oracle::{
    compare, leapfrog_propagate, uniform_times, ErrorReport, GridSpectralPropagator, NormKind,
    Trajectory,
};
use crate::spectral::{
    delta_normalization_check, discrete_spectrum, ContinuumMode, DiscreteSpectrum,
    LatticeModeSolver, LsSolver, ModeSolver, SmearedOverlaps, WeightedNorm,
};

/// Spacing of the default eigen-residual grid; the residual against the grid
/// `A` is `O(h²ω⁴)` for shooting modes.
pub const RESIDUAL_SPACING: f64 = 2.5e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn make(
        name: impl Into<String>,
        value: f64,
        relation: Relation,
        tolerance: f64,
        detail: String,
    ) -> Self {
        // NaN compares false everywhere, so it always fails.
        let passed = match relation {
            Relation::AtMost => value <= tolerance,
            Relation::AtLeast => value >= tolerance,
            Relation::Above => value > tolerance,
        };
        Self {
            name: name.into(),
            passed,
            value,
            relation,
            tolerance,
            detail,
        }
    }

    pub fn at_most(
        name: impl Into<String>,
        value: f64,
        tolerance: f64,
        detail: impl Into<String>,
    ) -> Self {
        Self::make(name, value, Relation::AtMost, tolerance, detail.into())
    }

    pub fn at_least(
        name: impl Into<String>,
        value: f64,
        tolerance: f64,
        detail: impl Into<String>,
    ) -> Self {
        Self::make(name, value, Relation::AtLeast, tolerance, detail.into())
    }

    pub fn above(
        name: impl Into<String>,
        value: f64,
        tolerance: f64,
        detail: impl Into<String>,
    ) -> Self {
        Self::make(name, value, Relation::Above, tolerance, detail.into())
    }

    /// A check that could not be evaluated.
    pub fn errored(name: impl Into<String>, err: &Error) -> Self {
        Self {
            name: name.into(),
            passed: false,
            value: f64::NAN,
            relation: Relation::AtMost,
            tolerance: f64::NAN,
            detail: format!("error: {err}"),
        }
    }

    /// `PASS name: value <= tol (detail)`.
    pub fn line(&self) -> String {
        let rel = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Above => ">",
        };
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!(
            "{status} {}: {:.3e} {rel} {:.1e}",
            self.name, self.value, self.tolerance
        );
        if !self.detail.is_empty() {
            s.push_str(&format!(" ({})", self.detail));
        }
        s
    }
}

/// All checks of a run plus the overall verdict.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub passed: bool,
    pub failed: Vec<String>,
    pub checks: Vec<CheckResult>,
}

impl Verdict {
    pub fn new(checks: Vec<CheckResult>) -> Self {
        let failed: Vec<String> = checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.clone())
            .collect();
        Self {
            passed: failed.is_empty(),
            failed,
            checks,
        }
    }
}

/// Runs `f`, turning an error into a single failed check named `name`.
pub fn guarded(name: &str, f: impl FnOnce() -> Result<Vec<CheckResult>>) -> Vec<CheckResult> {
    f().unwrap_or_else(|e| vec![CheckResult::errored(name, &e)])
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    // NaN poisons the maximum on purpose.
    values.into_iter().fold(0.0, |m: f64, v| {
        if v.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(v)
        }
    })
}

/// Finite-dimensional Krein machinery on `count` seeded random systems
/// (dimension ≤ `max_dim`); every other system is real with even dimension.
pub fn krein_random_systems(
    seed: u64,
    count: usize,
    max_dim: usize,
    tol: &Tolerances,
) -> Result<Vec<CheckResult>> {
    if max_dim < 2 {
        return Err(Error::Validation("max_dim must be at least 2".into()));
    }
    let mut sampler = SystemSampler::new(seed);
    let (mut herm, mut energy, mut sim, mut group, mut residue) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..count {
        let real = k % 2 == 0;
        let n = sampler.dimension(max_dim, real);
        let sys = sampler.system(n, real)?;
        let f = krein_factors(&sys)?;
        herm = max_of([herm, f.hermitian_defect()]);
        sim = max_of([sim, f.similarity_defect(&sys)]);
        let x0 = sampler.state(n, real);
        let (t, s) = (sampler.uniform(0.1, 5.0), sampler.uniform(0.1, 5.0));
        let e0 = f.energy_norm(&x0.components);
        let xt = f.propagate(&x0, t)?;
        energy = max_of([energy, (f.energy_norm(&xt.components) - e0).abs() / e0]);
        let xts = f.propagate(&x0, t + s)?;
        let stepped = f.propagate(&xt, s)?;
        group = max_of([group, xts.distance(&stepped) / x0.norm()]);
        if real {
            let xr = propagate_real_with(&sys, &f, &x0, t)?;
            residue = max_of([residue, xr.max_imag() / x0.norm()]);
        }
    }
    let d = format!("{count} systems, n <= {max_dim}, seed {seed}");
    Ok(vec![
        CheckResult::at_most("krein.hermitian", herm, tol.hermitian, d.clone()),
        CheckResult::at_most(
            "krein.energy_conservation",
            energy,
            tol.energy_conservation,
            d.clone(),
        ),
        CheckResult::at_most("krein.similarity", sim, tol.similarity, d.clone()),
        CheckResult::at_most("krein.group", group, tol.group, d.clone()),
        CheckResult::at_most("krein.real_residue", residue, tol.real_residue, d),
    ])
}

/// Simpson residual of the integrated identity at `n_quad ∈ {16, 32, 64}`;
/// both successive ratios must be `16 ± simpson_ratio·16`.
pub fn mild_solution_order(seed: u64, tol: &Tolerances) -> Result<Vec<CheckResult>> {
    let mut sampler = SystemSampler::new(seed ^ 0x5151);
    let sys = sampler.system(6, true)?;
    let f = krein_factors(&sys)?;
    let x0 = sampler.state(6, true);
    let w_max = f.frequencies().iter().fold(0.0f64, |m, w| m.max(w.abs()));
    // About two radians of the fastest phase: Simpson is in its asymptotic
    // range and far above roundoff at n = 64.
    let t = 2.0 / w_max;
    let r: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| mild_solution_residual_with(&sys, &f, &x0, t, n))
        .collect::<Result<_>>()?;
    let ratios = [r[0] / r[1], r[1] / r[2]];
    let dev = max_of(ratios.iter().map(|q| (q / 16.0 - 1.0).abs()));
    Ok(vec![CheckResult::at_most(
        "mild_solution.order",
        dev,
        tol.simpson_ratio,
        format!(
            "ratios {:.3}, {:.3}; residuals {:.2e} {:.2e} {:.2e}",
            ratios[0], ratios[1], r[0], r[1], r[2]
        ),
    )])
}

/// Kink residual and `s(10)` against `tanh(10/√2)` for the cubic model.
pub fn kink_checks(
    model: &NonlinearityModel,
    grid: &GridSpec,
    tol: &Tolerances,
) -> Result<Vec<CheckResult>> {
    let kink = kink_profile(model, 0.0, grid)?;
    let mut out = vec![CheckResult::at_most(
        "kink.residual",
        kink.residual(model),
        tol.kink_residual,
        format!("L = {}, N = {}", grid.length(), grid.n()),
    )];
    if grid.length() >= 10.0 {
        let err = (kink.value(10.0) - (10.0 / 2f64.sqrt()).tanh()).abs();
        out.push(CheckResult::at_most(
            "kink.tanh_profile",
            err,
            tol.kink_residual,
            "s(10) vs tanh(10/sqrt 2)",
        ));
    }
    Ok(out)
}

/// Lowest odd-sector eigenvalue against `expected` (1.5 for the cubic kink),
/// by Sturm bisection and confirmed by the QL sweep of the same tridiagonal.
pub fn discrete_checks(
    op: &GridOperator,
    expected: f64,
    tol: &Tolerances,
) -> Result<(Vec<CheckResult>, DiscreteSpectrum)> {
    let spectrum = discrete_spectrum(op, op.m2())?;
    let grid = op.grid();
    let d = format!("L = {}, N = {}", grid.length(), grid.n());
    let Some(first) = spectrum.modes.first() else {
        return Ok((
            vec![CheckResult::errored(
                "discrete.lambda1",
                &Error::Numerical("no discrete eigenvalue found".into()),
            )],
            spectrum,
        ));
    };
    let ql = op.tridiagonal().eigenvalues_ql()?;
    let ql_first = ql.first().copied().unwrap_or(f64::NAN);
    let checks = vec![
        CheckResult::at_most(
            "discrete.lambda1",
            (first.lambda - expected).abs(),
            tol.lambda1,
            format!("lambda1 = {:.8}, {d}", first.lambda),
        ),
        CheckResult::at_most(
            "discrete.omega1",
            (first.omega - expected.sqrt()).abs(),
            tol.omega1,
            format!("omega1 = {:.8}", first.omega),
        ),
        CheckResult::at_most(
            "discrete.lambda1_ql",
            (ql_first - expected).abs(),
            tol.lambda1,
            format!(
                "QL lambda1 = {ql_first:.8}, bisection differs by {:.1e}",
                (ql_first - first.lambda).abs()
            ),
        ),
    ];
    Ok((checks, spectrum))
}

/// Shooting against Lippmann–Schwinger modes, `‖e_ODE − e_LS‖₋ₛ`.
pub fn two_route_checks(
    setup: &Setup,
    grid: &GridSpec,
    omegas: &[f64],
    s: f64,
    tol: &Tolerances,
) -> Result<Vec<CheckResult>> {
    let ode = ModeSolver::new(setup.potential(), setup.m2(), grid)?;
    let ls = LsSolver::new(setup.potential(), setup.m2(), grid)?;
    let norm = WeightedNorm::new(s)?;
    let mut diffs = Vec::with_capacity(omegas.len());
    for &w in omegas {
        let a = ode.solve(w)?;
        let b = ls.solve(w)?;
        let d: Vec<f64> = a
            .samples()
            .iter()
            .zip(b.samples())
            .map(|(x, y)| x - y)
            .collect();
        diffs.push(norm.grid_norm_real(grid, &d));
    }
    let detail = omegas
        .iter()
        .zip(&diffs)
        .map(|(w, d)| format!("{w}: {d:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(vec![CheckResult::at_most(
        "two_route.weighted_difference",
        max_of(diffs),
        tol.two_route,
        detail,
    )])
}

/// Uniform frequency grid covering every bump `[c − σ, c + σ]` with a margin.
fn uniform_omegas(cfg: &DeltaCheckConfig, lo_center: f64, hi_center: f64) -> Vec<f64> {
    let lo = lo_center - cfg.sigma - 2.0 * cfg.spacing;
    let count = ((hi_center - lo_center + 2.0 * cfg.sigma + 4.0 * cfg.spacing) / cfg.spacing).ceil()
        as usize;
    (0..=count).map(|j| lo + j as f64 * cfg.spacing).collect()
}

/// Outputs of [`normalization_checks`], kept for reporting.
#[derive(Clone, Debug, Serialize)]
pub struct NormalizationRun {
    pub scalar: SmearedOverlaps,
    pub symplectic: SmearedOverlaps,
    pub discrete_cross: f64,
    pub pairing_positive: PairingReport,
    pub pairing_negative: PairingReport,
}

/// Smeared delta checks of the scalar and vector normalizations and the
/// symplectic pairing of packets, on modes from `route`. `inject_scale`
/// multiplies every mode first (fault injection).
pub fn normalization_checks(
    setup: &Setup,
    grid: &GridSpec,
    cfg: &DeltaCheckConfig,
    route: ScalarModes,
    inject_scale: Option<f64>,
    tol: &Tolerances,
) -> Result<(Vec<CheckResult>, NormalizationRun)> {
    let centers = &cfg.centers;
    if centers.is_empty() || centers.iter().any(|c| !(*c > 0.0)) {
        return Err(Error::Validation(
            "delta_check.centers must be nonempty and positive".into(),
        ));
    }
    let (lo_c, hi_c) = centers
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &c| {
            (a.min(c), b.max(c))
        });
    let op = GridOperator::schrodinger(setup.potential(), setup.m2(), grid)?;
    let omegas = uniform_omegas(cfg, lo_c, hi_c);
    let mut modes: Vec<ContinuumMode> = match route {
        ScalarModes::Lattice => LatticeModeSolver::new(&op)?.solve_many(&omegas)?,
        ScalarModes::Ode => {
            ModeSolver::new(setup.potential(), setup.m2(), grid)?.solve_many(&omegas)?
        }
    };
    if let Some(f) = inject_scale {
        log::warn!("fault injection: scaling every continuum mode by {f}");
        modes = modes.iter().map(|m| m.scaled(f)).collect();
    }
    let scalar = delta_normalization_check(&modes, cfg.sigma, centers)?;
    let spectrum = discrete_spectrum(&op, setup.m2())?;
    let discrete_cross = scalar.discrete_cross(grid, &spectrum.modes)?;

    let lifted: Vec<VectorMode> = modes.iter().map(lift_continuum).collect::<Result<_>>()?;
    let positive = renormalize_symplectic(&lifted)?;
    let symplectic = vector_delta_check(&positive, cfg.sigma, centers)?;

    let mut discrete = Vec::new();
    for (k, d) in spectrum.modes.iter().enumerate() {
        discrete.extend(lift_discrete_pair(grid, k, d)?);
    }
    let discrete = renormalize_symplectic(&discrete)?;
    let mirrored: Vec<VectorMode> = modes
        .iter()
        .rev()
        .map(|m| lift_continuum(&m.mirrored()))
        .collect::<Result<_>>()?;
    let negative = renormalize_symplectic(&mirrored)?;
    // Two packets per sign, as far apart as the sampled window allows.
    let pos_centers = if centers.len() > 1 {
        vec![lo_c, hi_c]
    } else {
        vec![lo_c]
    };
    let neg_centers: Vec<f64> = pos_centers.iter().rev().map(|c| -c).collect();
    let pairing_positive = pairing_check(&positive, &discrete, cfg.sigma, &pos_centers)?;
    let pairing_negative = pairing_check(&negative, &discrete, cfg.sigma, &neg_centers)?;

    let sd = format!(
        "sigma = {}, d omega = {}, centers {:?}, L = {}, {route:?} modes",
        cfg.sigma,
        cfg.spacing,
        centers,
        grid.length()
    );
    let pair_diag = pairing_positive
        .diagonal_deviation
        .max(pairing_negative.diagonal_deviation);
    let pair_cross = pairing_positive.cross.max(pairing_negative.cross);
    let pair_discrete = pairing_positive
        .discrete_cross
        .max(pairing_negative.discrete_cross);
    let checks = vec![
        CheckResult::at_most(
            "delta_normalization_check.diagonal",
            scalar.diagonal_deviation,
            tol.delta_diagonal,
            sd.clone(),
        ),
        CheckResult::at_most(
            "delta_normalization_check.off_diagonal",
            scalar.off_diagonal,
            tol.delta_off_diagonal,
            sd.clone(),
        ),
        CheckResult::at_most(
            "delta_normalization_check.discrete_cross",
            discrete_cross,
            tol.discrete_cross,
            format!("{} discrete modes", spectrum.modes.len()),
        ),
        CheckResult::at_most(
            "symplectic_normalization.diagonal",
            symplectic.diagonal_deviation,
            tol.delta_diagonal,
            "|omega|-weighted density after renormalization",
        ),
        CheckResult::at_most(
            "symplectic_normalization.off_diagonal",
            symplectic.off_diagonal,
            tol.delta_off_diagonal,
            "",
        ),
        CheckResult::at_most(
            "symplectic_pairing.diagonal",
            pair_diag,
            tol.pairing_diagonal,
            format!("centers {pos_centers:?} and {neg_centers:?}"),
        ),
        CheckResult::at_most(
            "symplectic_pairing.cross",
            pair_cross,
            tol.pairing_cross,
            "packets at distinct centers",
        ),
        CheckResult::at_most(
            "symplectic_pairing.discrete_cross",
            pair_discrete,
            tol.discrete_cross,
            "packets against discrete modes",
        ),
    ];
    Ok((
        checks,
        NormalizationRun {
            scalar,
            symplectic,
            discrete_cross,
            pairing_positive,
            pairing_negative,
        },
    ))
}

/// Grid for the eigen-residual check: the configured one, else spacing
/// [`RESIDUAL_SPACING`] on `[0, length]`.
pub fn residual_grid(configured: Option<&GridConfig>, length: f64) -> Result<GridSpec> {
    match configured {
        Some(g) => g.spec(),
        None => GridSpec::with_spacing(length, RESIDUAL_SPACING),
    }
}

/// `‖A a_ω + iω a_ω‖₋ₛ / ‖a_ω‖₋ₛ` for shooting modes at interior `ω`.
pub fn eigen_residual_checks(
    setup_on: impl Fn(&GridSpec) -> Result<Setup>,
    grid: &GridSpec,
    omegas: &[f64],
    s: f64,
    tol: &Tolerances,
) -> Result<Vec<CheckResult>> {
    let setup = setup_on(grid)?;
    let op = GridOperator::schrodinger(setup.potential(), setup.m2(), grid)?;
    let solver = ModeSolver::new(setup.potential(), setup.m2(), grid)?;
    let norm = WeightedNorm::new(s)?;
    let mut rows = Vec::new();
    for &w in omegas {
        let mode = solver.solve(w)?;
        let r = lift_continuum(&mode)?.eigen_residual(&op, &norm)?;
        rows.push((w, r));
    }
    let detail = format!(
        "h = {:.1e}; {}",
        grid.h(),
        rows.iter()
            .map(|(w, r)| format!("{w}: {r:.1e}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok(vec![CheckResult::at_most(
        "eigen_residual.relative",
        max_of(rows.iter().map(|r| r.1)),
        tol.eigen_residual,
        detail,
    )])
}

/// `‖ΛX0‖²`, spectral mass and their gap.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ParsevalSummary {
    pub energy_sqr: f64,
    pub spectral_mass: f64,
    pub gap: f64,
    pub relative_gap: f64,
}

/// One rung of the truncation ladder.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TruncationRow {
    pub cutoff: f64,
    /// Against the oracle, relative to `‖ΛX0‖`.
    pub energy_error: f64,
    pub weighted_error: f64,
    /// Against the largest cutoff of the ladder.
    pub energy_vs_top: f64,
    pub weighted_vs_top: f64,
}

/// Everything produced by the expansion-vs-oracle run.
pub struct ExpansionRun {
    pub spec: ExpansionSpec,
    pub set: Arc<ModeSet>,
    pub x0: FieldState,
    pub decomposition: SpectralDecomposition,
    pub expansion: Trajectory,
    pub oracle: Trajectory,
    pub report: ErrorReport,
    pub leapfrog: Option<(Trajectory, ErrorReport)>,
    pub parseval: ParsevalSummary,
    /// `max_t |‖ΛX(t)‖/‖ΛX(0)‖ − 1|` of the synthesized states.
    pub energy_drift: f64,
    /// `max_t max|Im X(t)|` relative to `max|X0|`.
    pub imag_residue: f64,
    pub truncation_time: f64,
    pub truncation: Vec<TruncationRow>,
}

/// The expansion spec used for a run: cutoff defaults to the top of the
/// truncation ladder, whose rungs become panel breaks.
pub fn expansion_spec(spectral: &SpectralConfig, evolve: &EvolveConfig) -> Result<ExpansionSpec> {
    let mut spec = spectral.expansion.clone();
    let top = evolve
        .truncation_ladder
        .iter()
        .copied()
        .fold(f64::NAN, f64::max);
    if spec.cutoff.is_none() && top.is_finite() {
        spec.cutoff = Some(top);
    }
    if let Some(c) = spec.cutoff {
        if top > c * (1.0 + 1e-12) {
            return Err(Error::Validation(format!(
                "truncation ladder reaches {top} beyond the expansion cutoff {c}"
            )));
        }
    }
    spec.extra_breaks
        .extend(evolve.truncation_ladder.iter().copied());
    Ok(spec)
}

pub fn initial_state(grid: &GridSpec, evolve: &EvolveConfig) -> FieldState {
    let init = &evolve.initial;
    FieldState::sample(grid, |x| init.eval(x).0, |x| init.eval(x).1)
}

/// Projects the configured initial data, synthesizes on the time grid and
/// compares against the grid-spectral oracle (and leapfrog, if requested).
pub fn run_expansion(
    setup: &Setup,
    grid: &GridSpec,
    spectral: &SpectralConfig,
    evolve: &EvolveConfig,
) -> Result<ExpansionRun> {
    let spec = expansion_spec(spectral, evolve)?;
    let set = Arc::new(ModeSet::build(setup.potential(), setup.m2(), grid, &spec)?);
    let x0 = initial_state(grid, evolve);
    let decomposition = project(&x0, &set)?;
    let times = uniform_times(evolve.t_end, evolve.time_samples)?;
    let expansion = Trajectory::from_expansion(&decomposition, &times)?;
    let propagator = GridSpectralPropagator::from_calculus(Arc::clone(set.calculus()));
    let oracle = propagator.propagate(&x0, &times)?;
    let norms = [
        NormKind::Energy,
        NormKind::Weighted {
            s: spectral.weight_s,
        },
    ];
    let report = compare(&oracle, &expansion, set.operator(), &norms)?;
    let leapfrog = match evolve.leapfrog_dt {
        Some(dt) => {
            let lf = leapfrog_propagate(set.operator(), &x0, dt, &times)?;
            let rep = compare(&oracle, &lf, set.operator(), &norms)?;
            Some((lf, rep))
        }
        None => None,
    };

    let energy_sqr = decomposition.energy_sqr();
    let spectral_mass = decomposition.spectral_mass();
    let parseval = ParsevalSummary {
        energy_sqr,
        spectral_mass,
        gap: energy_sqr - spectral_mass,
        relative_gap: (energy_sqr - spectral_mass) / energy_sqr,
    };
    let op = set.operator();
    let e0 = expansion.states[0].energy_norm(op);
    let energy_drift = max_of(
        expansion
            .states
            .iter()
            .map(|s| (s.energy_norm(op) / e0 - 1.0).abs()),
    );
    let scale = x0
        .psi
        .iter()
        .chain(&x0.dpsi)
        .fold(0.0f64, |m, z| m.max(z.norm()))
        .max(f64::MIN_POSITIVE);
    let imag_residue = max_of(expansion.states.iter().map(|s| s.max_imag())) / scale;

    let truncation_time = evolve.truncation_time;
    let mut truncation = Vec::new();
    if !evolve.truncation_ladder.is_empty() {
        let wnorm = WeightedNorm::new(spectral.weight_s)?;
        let vs_top: Vec<TruncationPoint> = truncation_convergence(
            &decomposition,
            truncation_time,
            &evolve.truncation_ladder,
            &wnorm,
        )?;
        let reference = propagator
            .propagate(&x0, &[truncation_time])?
            .states
            .remove(0);
        let norm0 = energy_sqr.sqrt().max(f64::MIN_POSITIVE);
        for p in vs_top {
            let x = decomposition
                .truncated(p.cutoff)?
                .synthesize(truncation_time)?;
            let d = x.sub(&reference)?;
            truncation.push(TruncationRow {
                cutoff: p.cutoff,
                energy_error: d.energy_norm(op) / norm0,
                weighted_error: d.weighted_norm(grid, &wnorm) / norm0,
                energy_vs_top: p.energy_error,
                weighted_vs_top: p.weighted_error,
            });
        }
    }
    Ok(ExpansionRun {
        spec,
        set,
        x0,
        decomposition,
        expansion,
        oracle,
        report,
        leapfrog,
        parseval,
        energy_drift,
        imag_residue,
        truncation_time,
        truncation,
    })
}

/// Headline, Parseval/Bessel, drift, reality and truncation checks of a run.
pub fn expansion_checks(run: &ExpansionRun, tol: &Tolerances) -> Vec<CheckResult> {
    let headline = run
        .report
        .max_relative(NormKind::Energy)
        .unwrap_or(f64::NAN);
    let cutoff = run.set.cutoff();
    let p = &run.parseval;
    let mut out = vec![
        CheckResult::at_most(
            "expansion.headline_energy_error",
            headline,
            tol.headline,
            format!(
                "M = {cutoff}, t in [0, {}], {:?} modes",
                run.expansion.times.last().copied().unwrap_or(0.0),
                run.set.scalar_modes()
            ),
        ),
        CheckResult::at_most(
            "expansion.parseval_gap",
            p.relative_gap.abs(),
            tol.parseval,
            format!("gap / energy = {:.3e}", p.relative_gap),
        ),
        CheckResult::at_least(
            "expansion.bessel",
            p.relative_gap,
            -tol.bessel,
            "spectral mass never exceeds the energy",
        ),
        CheckResult::at_most(
            "expansion.energy_drift",
            run.energy_drift,
            tol.energy_drift,
            "",
        ),
        CheckResult::at_most(
            "expansion.real_data_stays_real",
            run.imag_residue,
            tol.structure,
            "",
        ),
    ];
    if run.truncation.len() > 1 {
        let rise = max_of(
            run.truncation
                .windows(2)
                .map(|w| w[1].energy_error - w[0].energy_error),
        );
        let detail = run
            .truncation
            .iter()
            .map(|r| format!("M={}: {:.2e}", r.cutoff, r.energy_error))
            .collect::<Vec<_>>()
            .join(", ");
        out.push(CheckResult::at_most(
            "truncation.monotone",
            rise,
            tol.truncation_noise,
            detail,
        ));
    }
    if let Some((_, rep)) = &run.leapfrog {
        let e = rep.max_relative(NormKind::Energy).unwrap_or(f64::NAN);
        out.push(CheckResult::at_most(
            "oracle.leapfrog_agreement",
            e,
            tol.headline,
            "leapfrog vs grid-spectral",
        ));
    }
    out
}

/// Results of the moving-kink checks.
#[derive(Clone, Debug, Serialize)]
pub struct BandsRun {
    pub tables: Vec<BandTable>,
    pub positivity: Vec<(f64, f64)>,
    pub kernel_v: f64,
    pub kernel_residual: f64,
    pub kernel_evenness: f64,
}

/// Band table, floor formula, grid positivity of `B_v` and its kernel vector.
pub fn band_checks(
    cfg: &BandsConfig,
    model: &NonlinearityModel,
    seed: u64,
    tol: &Tolerances,
) -> Result<(Vec<CheckResult>, BandsRun)> {
    let mut out = Vec::new();
    let t = continuous_spectrum_bands(0.5, 2.0)?;
    let expected = [(0.75, 1.0), (2.0, f64::INFINITY)];
    let endpoint_err = if t.bands.len() == 2
        && t.bands
            .iter()
            .all(|b| b.lo_closed && (b.hi_closed || b.hi.is_infinite()))
    {
        max_of(t.bands.iter().zip(expected).map(|(b, (lo, hi))| {
            let hi_err = if hi.is_infinite() {
                if b.hi.is_infinite() {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                (b.hi - hi).abs()
            };
            (b.lo - lo).abs().max(hi_err)
        }))
    } else {
        f64::INFINITY
    };
    out.push(CheckResult::at_most(
        "bands.table_v0.5_m2_2",
        endpoint_err,
        tol.band_endpoint,
        t.bands
            .iter()
            .map(|b| b.to_string())
            .collect::<Vec<_>>()
            .join(" U "),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xBA4D);
    let (mut floor_err, mut mismatches) = (0.0f64, 0usize);
    for _ in 0..cfg.random_pairs {
        let v: f64 = rng.gen_range(-0.99..0.99);
        let m2: f64 = rng.gen_range(0.05..5.0);
        let table = continuous_spectrum_bands(v, m2)?;
        floor_err = floor_err.max((table.floor() - (1.0 - v * v).min(m2)).abs());
        // Membership against the sign of k² from the dispersion relation,
        // away from the points where k² vanishes or blows up.
        for _ in 0..8 {
            let lambda: f64 = rng.gen_range(0.0..m2.max(1.0) + 2.0);
            if [m2, 1.0, 1.0 - v * v]
                .iter()
                .any(|e| (lambda - e).abs() < 1e-9)
            {
                continue;
            }
            if table.contains(lambda) != (dispersion_k2(lambda, v, m2) >= 0.0) {
                mismatches += 1;
            }
        }
    }
    out.push(CheckResult::at_most(
        "bands.floor",
        floor_err,
        tol.band_endpoint,
        format!(
            "{} random (v, m2) pairs; {mismatches} membership mismatches against k2 >= 0",
            cfg.random_pairs
        ),
    ));
    out.push(CheckResult::at_most(
        "bands.membership",
        mismatches as f64,
        0.0,
        "case table vs dispersion sign",
    ));

    let pgrid = cfg.positivity_grid.spec()?;
    let mut positivity = Vec::new();
    for &v in &cfg.positivity_v {
        let op = build_bv_operator(model, &pgrid, v)?;
        positivity.push((v, op.min_eigenvalue()?));
    }
    let min_eig = positivity.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    out.push(CheckResult::above(
        "bands.bv_positive",
        min_eig,
        0.0,
        format!(
            "odd sector, L = {}, N = {}: {}",
            pgrid.length(),
            pgrid.n(),
            positivity
                .iter()
                .map(|(v, e)| format!("v={v}: {e:.4}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    ));

    let kgrid = cfg.kernel_grid.spec()?;
    let kv = kernel_vector(model, cfg.kernel_v, &kgrid)?;
    let kernel_residual = kv.residual_ratio();
    out.push(CheckResult::at_most(
        "bands.kernel_vector",
        kernel_residual,
        tol.kernel,
        format!("v = {}, full line, h = {:.1e}", cfg.kernel_v, kgrid.h()),
    ));

    let tables = cfg
        .pairs
        .iter()
        .map(|&(v, m2)| continuous_spectrum_bands(v, m2))
        .collect::<Result<_>>()?;
    Ok((
        out,
        BandsRun {
            tables,
            positivity,
            kernel_v: cfg.kernel_v,
            kernel_residual,
            kernel_evenness: kv.evenness_defect(),
        },
    ))
}

/// `‖[J, B]‖_F` for the NLS linearization at each coupling.
#[derive(Clone, Debug, Serialize)]
pub struct NoncommuteRun {
    pub couplings: Vec<f64>,
    pub defects: Vec<f64>,
    pub hand_case: f64,
    pub hand_case_brute: f64,
}

/// Explicit `‖JB − BJ‖_F` with 8×8 loops.
fn brute_commutator(j: &[[f64; 8]; 8], b: &[[f64; 8]; 8]) -> f64 {
    let mut fro = 0.0;
    for r in 0..8 {
        for c in 0..8 {
            let mut x = 0.0;
            for k in 0..8 {
                x += j[r][k] * b[k][c] - b[r][k] * j[k][c];
            }
            fro += x * x;
        }
    }
    fro.sqrt()
}

/// The commutator defect vanishes in the linear case and not otherwise;
/// the four-point case is checked against explicit matrices.
pub fn noncommute_checks(
    cfg: &NoncommuteConfig,
    tol: &Tolerances,
) -> Result<(Vec<CheckResult>, NoncommuteRun)> {
    let grid = GridSpec::new(cfg.length, cfg.n)?;
    let mid = 0.5 * cfg.length;
    let s0: Vec<f64> = grid
        .points()
        .iter()
        .map(|x| (-(x - mid).powi(2) / (2.0 * cfg.width * cfg.width)).exp())
        .collect();
    let v = vec![0.0; grid.n()];
    let defects: Vec<f64> = cfg
        .couplings
        .iter()
        .map(|&g| Ok(build_nls_linearization(&grid, &v, g, &s0)?.commutator_defect()))
        .collect::<Result<_>>()?;

    // N = 4, h = 1, V = 0, s0 ≡ 1, g = 1.
    let hand = build_nls_linearization(&GridSpec::new(5.0, 4)?, &[0.0; 4], 1.0, &[1.0; 4])?;
    let mut bm = [[0.0f64; 8]; 8];
    let mut jm = [[0.0f64; 8]; 8];
    for i in 0..4usize {
        for k in 0..4usize {
            let lap = match i.abs_diff(k) {
                0 => 2.0,
                1 => -1.0,
                _ => 0.0,
            };
            let diag = if i == k { 1.0 } else { 0.0 };
            bm[i][k] = lap + 6.0 * diag;
            bm[i + 4][k + 4] = lap + 2.0 * diag;
        }
        jm[i][i + 4] = 1.0;
        jm[i + 4][i] = -1.0;
    }
    let brute = brute_commutator(&jm, &bm);
    let hand_case = hand.commutator_defect();

    let mut out = Vec::new();
    for (&g, &d) in cfg.couplings.iter().zip(&defects) {
        let detail = format!(
            "N = {}, L = {}, Gaussian s0 width {}",
            cfg.n, cfg.length, cfg.width
        );
        if g == 0.0 {
            out.push(CheckResult::at_most(
                "noncommute.linear_commutes",
                d,
                0.0,
                detail,
            ));
        } else {
            out.push(CheckResult::above(
                format!("noncommute.defect_g{g}"),
                d,
                tol.commutator_min,
                detail,
            ));
        }
    }
    out.push(CheckResult::at_most(
        "noncommute.hand_case",
        (hand_case - brute).abs(),
        tol.hermitian,
        format!("defect {hand_case:.12} vs brute force {brute:.12}"),
    ));
    Ok((
        out,
        NoncommuteRun {
            couplings: cfg.couplings.clone(),
            defects,
            hand_case,
            hand_case_brute: brute,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gl::make_cubic_model;

    #[test]
    fn relations_and_nan() {
        assert!(CheckResult::at_most("a", 1.0, 1.0, "").passed);
        assert!(!CheckResult::at_most("a", f64::NAN, 1.0, "").passed);
        assert!(CheckResult::at_least("a", -1e-9, -1e-6, "").passed);
        assert!(!CheckResult::above("a", 0.0, 0.0, "").passed);
        assert!(CheckResult::at_most("x", 2.0, 1.0, "d")
            .line()
            .starts_with("FAIL x: 2.000e0 <= 1.0e0 (d)"));
        let v = Verdict::new(vec![
            CheckResult::at_most("ok", 0.0, 1.0, ""),
            CheckResult::at_most("bad", 2.0, 1.0, ""),
        ]);
        assert!(!v.passed);
        assert_eq!(v.failed, vec!["bad".to_string()]);
        assert!(max_of([1.0, f64::NAN, 0.5]).is_nan());
    }

    #[test]
    fn krein_battery_passes_on_a_few_systems() {
        let checks = krein_random_systems(7, 10, 16, &Tolerances::default()).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:#?}");
    }

    #[test]
    fn mild_solution_is_fourth_order() {
        let c = &mild_solution_order(3, &Tolerances::default()).unwrap()[0];
        assert!(c.passed, "{}", c.line());
    }

    #[test]
    fn noncommute_battery() {
        let (checks, run) =
            noncommute_checks(&NoncommuteConfig::default(), &Tolerances::default()).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:#?}");
        assert_eq!(run.defects[0], 0.0);
        assert!((run.hand_case - 4.0 * 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn band_battery_on_a_small_configuration() {
        let cfg = BandsConfig {
            random_pairs: 50,
            positivity_v: vec![0.3],
            kernel_grid: GridConfig {
                length: 20.0,
                n: 1999,
            },
            ..BandsConfig::default()
        };
        let tol = Tolerances {
            kernel: 1e-4,
            ..Tolerances::default()
        };
        let (checks, run) = band_checks(&cfg, &make_cubic_model(), 1, &tol).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:#?}");
        assert_eq!(run.tables.len(), 3);
    }

    #[test]
    fn errors_become_failed_checks() {
        let checks = guarded("boom", || Err(Error::Numerical("x".into())));
        assert_eq!(checks.len(), 1);
        assert!(!checks[0].passed);
        assert!(checks[0].detail.contains("x"));
    }
}
