//! The experiments behind the CLI subcommands. Each command loads a config,
//! writes its artifacts into an output directory and reports whether its
//! checks passed. Outputs depend only on the config, so identical inputs give
//! byte-identical files.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::checks::{self, guarded, CheckResult, Verdict};
use crate::config::{LoadedConfig, RunConfig, Setup};
use crate::error::{Error, Result};
use crate::expansion::PairingReport;
use crate::gl::{
    continuous_spectrum_bands, edge_classification, fit_tail, kink_profile, BandTable,
    GridOperator, KinkPotential, NonlinearityModel, Potential,
};
use crate::io::{
    num, out, write_csv, write_json, write_mode, write_numeric_csv, write_trajectory, GridMeta,
};
use crate::oracle::NormKind;
use crate::spectral::{
    discrete_spectrum, unwrap_phase_shifts, LsSolver, ModeSolver, ModeSummary, SmearedOverlaps,
    WeightedNorm,
};

/// Kink velocity above which the profile is accepted with a resolution warning.
pub const FAST_KINK: f64 = 0.9;

/// Expected lowest odd-sector eigenvalue of the cubic kink.
pub const CUBIC_LAMBDA1: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Kink,
    Spectrum,
    Modes,
    Evolve,
    Verify,
    Bands,
    DemoNoncommute,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Kink => "kink",
            Command::Spectrum => "spectrum",
            Command::Modes => "modes",
            Command::Evolve => "evolve",
            Command::Verify => "verify",
            Command::Bands => "bands",
            Command::DemoNoncommute => "demo-noncommute",
        }
    }
}

/// What a command produced.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub checks: Vec<CheckResult>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// 0 when every check passed, 4 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            4
        }
    }
}

/// Loads `config` and runs `command`, writing into `out_dir`.
pub fn run(command: Command, config: &Path, out_dir: &Path) -> Result<Outcome> {
    let loaded = RunConfig::load(config)?;
    run_loaded(command, &loaded, out_dir)
}

pub fn run_loaded(command: Command, loaded: &LoadedConfig, out_dir: &Path) -> Result<Outcome> {
    crate::io::ensure_dir(out_dir)?;
    log::info!(
        "{} on L = {}, N = {}",
        command.name(),
        loaded.grid.length(),
        loaded.grid.n()
    );
    let mut files = Files::new(out_dir);
    let checks = match command {
        Command::Kink => cmd_kink(loaded, &mut files)?,
        Command::Spectrum => cmd_spectrum(loaded, &mut files)?,
        Command::Modes => cmd_modes(loaded, &mut files)?,
        Command::Evolve => cmd_evolve(loaded, &mut files)?,
        Command::Verify => cmd_verify(loaded, &mut files)?,
        Command::Bands => cmd_bands(loaded, &mut files)?,
        Command::DemoNoncommute => cmd_demo_noncommute(loaded, &mut files)?,
    };
    Ok(Outcome {
        checks,
        files: files.written,
    })
}

struct Files {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Files {
    fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        }
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = out(&self.dir, name);
        self.written.push(p.clone());
        p
    }
}

fn model_of<'a>(
    loaded: &LoadedConfig,
    setup: &'a Setup,
    command: &str,
) -> Result<&'a NonlinearityModel> {
    setup.model().ok_or_else(|| {
        Error::Config(format!(
            "{command} needs a kink model; model.kind = custom-sampled only provides a potential (config {})",
            loaded.base_dir.display()
        ))
    })
}

#[derive(Serialize)]
struct KinkReport<'a> {
    grid: GridMeta,
    v: f64,
    m2: f64,
    a: f64,
    residual: f64,
    warning: Option<String>,
    tail_fit: &'a crate::gl::TailFit,
    /// Decay rate of `V` expected from the sech² shape of the cubic kink, `√2·√(1−v²)⁻¹`.
    expected_kappa: Option<f64>,
    checks: &'a [CheckResult],
}

fn cmd_kink(loaded: &LoadedConfig, files: &mut Files) -> Result<Vec<CheckResult>> {
    let cfg = &loaded.config;
    let grid = loaded.grid;
    let setup = loaded.setup()?;
    let model = model_of(loaded, &setup, "kink")?;
    let v = cfg.model.v;
    let warning = (v.abs() > FAST_KINK).then(|| {
        let w = format!(
            "|v| = {} is close to 1: the kink width shrinks like sqrt(1 - v^2) = {:.3e}; check that h = {:.3e} resolves it",
            v.abs(),
            (1.0 - v * v).sqrt(),
            grid.h()
        );
        log::warn!("{w}");
        w
    });
    let kink = kink_profile(model, v, &grid)?;
    let residual = kink.residual(model);
    let potential = KinkPotential::new(model, kink.clone());
    let xs = grid.closed_points();
    write_numeric_csv(
        &files.path("kink.csv"),
        &["x", "s", "ds", "d2s"],
        xs.iter().map(|&x| {
            let (s, ds, d2s) = kink.eval(x);
            vec![x, s, ds, d2s]
        }),
    )?;
    write_numeric_csv(
        &files.path("potential.csv"),
        &["x", "value"],
        xs.iter().map(|&x| vec![x, potential.value(x)]),
    )?;
    let tail_fit = fit_tail(&potential, grid.length());
    let checks = if v == 0.0 {
        checks::kink_checks(model, &grid, &cfg.tolerances)?
    } else {
        vec![CheckResult::at_most(
            "kink.residual",
            residual,
            cfg.tolerances.kink_residual,
            format!("v = {v}"),
        )]
    };
    let expected_kappa =
        (model.kind() == crate::gl::ModelKind::Cubic).then(|| 2f64.sqrt() / (1.0 - v * v).sqrt());
    write_json(
        &files.path("tail_fit.json"),
        "kink",
        &KinkReport {
            grid: (&grid).into(),
            v,
            m2: model.m2(),
            a: model.a(),
            residual,
            warning,
            tail_fit: &tail_fit,
            expected_kappa,
            checks: &checks,
        },
    )?;
    Ok(checks)
}

#[derive(Serialize)]
struct SpectrumReport<'a> {
    grid: GridMeta,
    m2: f64,
    discrete: &'a crate::spectral::DiscreteSpectrum,
    edge: crate::gl::EdgeReport,
    band_table: Option<BandTable>,
    checks: &'a [CheckResult],
}

fn cmd_spectrum(loaded: &LoadedConfig, files: &mut Files) -> Result<Vec<CheckResult>> {
    let cfg = &loaded.config;
    let grid = loaded.grid;
    let setup = loaded.setup()?;
    let op = GridOperator::schrodinger(setup.potential(), setup.m2(), &grid)?;
    let (checks, discrete) = match setup.model() {
        Some(_) => checks::discrete_checks(&op, CUBIC_LAMBDA1, &cfg.tolerances)?,
        None => (Vec::new(), discrete_spectrum(&op, setup.m2())?),
    };
    write_numeric_csv(
        &files.path("discrete.csv"),
        &["index", "lambda", "omega", "residual"],
        discrete
            .modes
            .iter()
            .enumerate()
            .map(|(k, m)| vec![k as f64, m.lambda, m.omega, m.residual]),
    )?;
    let mut header = vec!["x".to_string()];
    header.extend((0..discrete.modes.len()).map(|k| format!("phi_{k}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_numeric_csv(
        &files.path("discrete_modes.csv"),
        &header_refs,
        (0..grid.n()).map(|i| {
            let mut row = vec![grid.x(i)];
            row.extend(discrete.modes.iter().map(|m| m.samples[i]));
            row
        }),
    )?;
    let edge = edge_classification(setup.potential(), &grid, &cfg.spectral.edge)?;
    let band_table = match setup.model() {
        Some(_) => Some(continuous_spectrum_bands(cfg.model.v, setup.m2())?),
        None => None,
    };
    if let Some(t) = &band_table {
        write_band_csv(&files.path("band_table.csv"), std::slice::from_ref(t))?;
    }
    write_json(
        &files.path("spectrum.json"),
        "spectrum",
        &SpectrumReport {
            grid: (&grid).into(),
            m2: setup.m2(),
            discrete: &discrete,
            edge,
            band_table,
            checks: &checks,
        },
    )?;
    Ok(checks)
}

fn write_band_csv(path: &Path, tables: &[BandTable]) -> Result<()> {
    let rows = tables.iter().flat_map(|t| {
        t.bands.iter().map(move |b| {
            vec![
                num(t.v),
                num(t.m2),
                serde_json::to_value(t.case)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default(),
                num(b.lo),
                num(b.hi),
                b.lo_closed.to_string(),
                b.hi_closed.to_string(),
            ]
        })
    });
    write_csv(
        path,
        &["v", "m2", "case", "lo", "hi", "lo_closed", "hi_closed"],
        rows,
    )
}

/// `normalization, a, b, center_a, center_b, re, im, target` for every pair of packets.
fn write_overlaps_csv(path: &Path, sets: &[(&str, &SmearedOverlaps)]) -> Result<()> {
    let rows = sets.iter().flat_map(|&(tag, o)| {
        let n = o.centers.len();
        (0..n * n).map(move |ab| {
            let (a, b) = (ab / n, ab % n);
            vec![
                tag.to_string(),
                a.to_string(),
                b.to_string(),
                num(o.centers[a]),
                num(o.centers[b]),
                num(o.overlap_re[a][b]),
                num(o.overlap_im[a][b]),
                num(o.targets[a][b]),
            ]
        })
    });
    write_csv(
        path,
        &[
            "normalization",
            "a",
            "b",
            "center_a",
            "center_b",
            "re",
            "im",
            "target",
        ],
        rows,
    )
}

/// `branch, a, b, center_a, center_b, re, im, mass`: the symplectic pairing
/// `⟨G_a, J G_b⟩` of packets on one frequency branch.
fn write_pairing_csv(path: &Path, sets: &[(&str, &PairingReport)]) -> Result<()> {
    let rows = sets.iter().flat_map(|&(tag, p)| {
        let n = p.centers.len();
        (0..n * n).map(move |ab| {
            let (a, b) = (ab / n, ab % n);
            vec![
                tag.to_string(),
                a.to_string(),
                b.to_string(),
                num(p.centers[a]),
                num(p.centers[b]),
                num(p.pairing_re[a][b]),
                num(p.pairing_im[a][b]),
                num(p.mass[a][b]),
            ]
        })
    });
    write_csv(
        path,
        &[
            "branch", "a", "b", "center_a", "center_b", "re", "im", "mass",
        ],
        rows,
    )
}

#[derive(Serialize)]
struct ModeEntry {
    omega: f64,
    ode: ModeSummary,
    ls: ModeSummary,
    /// `‖e_ODE − e_LS‖₋ₛ`.
    weighted_difference: f64,
    ode_file: String,
    ls_file: String,
}

#[derive(Serialize)]
struct ModesReport<'a> {
    grid: GridMeta,
    weight_s: f64,
    modes: Vec<ModeEntry>,
    checks: &'a [CheckResult],
}

fn cmd_modes(loaded: &LoadedConfig, files: &mut Files) -> Result<Vec<CheckResult>> {
    let cfg = &loaded.config;
    let grid = loaded.grid;
    let setup = loaded.setup()?;
    let op = GridOperator::schrodinger(setup.potential(), setup.m2(), &grid)?;
    let ode = ModeSolver::new(setup.potential(), setup.m2(), &grid)?
        .with_edge_margin(cfg.spectral.edge_margin)?;
    let ls = LsSolver::new(setup.potential(), setup.m2(), &grid)?;
    let norm = WeightedNorm::new(cfg.spectral.weight_s)?;
    let mut entries = Vec::new();
    for &w in &cfg.spectral.omegas {
        let a = ode.solve(w)?;
        let b = ls.solve(w)?;
        let ode_file = format!("mode_ode_omega_{w:.4}.csv");
        let ls_file = format!("mode_ls_omega_{w:.4}.csv");
        write_mode(&files.path(&ode_file), &a)?;
        write_mode(&files.path(&ls_file), &b)?;
        let d: Vec<f64> = a
            .samples()
            .iter()
            .zip(b.samples())
            .map(|(x, y)| x - y)
            .collect();
        entries.push(ModeEntry {
            omega: w,
            ode: a.summary(Some(a.eigen_residual(&op, &norm)?)),
            ls: b.summary(Some(b.eigen_residual(&op, &norm)?)),
            weighted_difference: norm.grid_norm_real(&grid, &d),
            ode_file,
            ls_file,
        });
    }
    let diffs: Vec<f64> = entries.iter().map(|e| e.weighted_difference).collect();
    let mut checks = vec![CheckResult::at_most(
        "two_route.weighted_difference",
        diffs.iter().copied().fold(0.0, f64::max),
        cfg.tolerances.two_route,
        format!("omegas {:?}", cfg.spectral.omegas),
    )];

    let dgrid = cfg.spectral.delta_check.grid.spec()?;
    let (normalization, run) = checks::normalization_checks(
        &loaded.setup_on(&dgrid)?,
        &dgrid,
        &cfg.spectral.delta_check,
        cfg.spectral.expansion.scalar_modes,
        cfg.verify.inject_normalization_scale,
        &cfg.tolerances,
    )?;
    checks.extend(normalization);
    write_overlaps_csv(
        &files.path("delta_overlaps.csv"),
        &[("scalar", &run.scalar), ("symplectic", &run.symplectic)],
    )?;
    write_pairing_csv(
        &files.path("pairing.csv"),
        &[
            ("positive", &run.pairing_positive),
            ("negative", &run.pairing_negative),
        ],
    )?;

    let (lo, hi, count) = cfg.spectral.phase_sweep;
    if count < 2 || !(hi > lo) {
        return Err(Error::Config(
            "spectral.phase_sweep needs lo < hi and count >= 2".into(),
        ));
    }
    let sweep: Vec<f64> = (0..count)
        .map(|j| lo + (hi - lo) * j as f64 / (count - 1) as f64)
        .collect();
    let modes = ode.solve_many(&sweep)?;
    let deltas: Vec<f64> = modes.iter().map(|m| m.phase_shift()).collect();
    let unwrapped = unwrap_phase_shifts(&deltas);
    write_numeric_csv(
        &files.path("phase_shifts.csv"),
        &["omega", "k", "delta", "delta_unwrapped"],
        modes
            .iter()
            .zip(&deltas)
            .zip(&unwrapped)
            .map(|((m, &d), &u)| vec![m.omega(), m.k(), d, u]),
    )?;
    write_json(
        &files.path("modes.json"),
        "modes",
        &ModesReport {
            grid: (&grid).into(),
            weight_s: cfg.spectral.weight_s,
            modes: entries,
            checks: &checks,
        },
    )?;
    Ok(checks)
}

#[derive(Serialize)]
struct DecompositionReport<'a> {
    grid: GridMeta,
    spec: &'a crate::expansion::ExpansionSpec,
    cutoff: f64,
    continuum_nodes: usize,
    discrete_frequencies: Vec<f64>,
    parseval: checks::ParsevalSummary,
    energy_drift: f64,
    imag_residue: f64,
}

#[derive(Serialize)]
struct EvolveReport<'a> {
    grid: GridMeta,
    headline: f64,
    report: &'a crate::oracle::ErrorReport,
    leapfrog: Option<&'a crate::oracle::ErrorReport>,
    truncation_time: f64,
    truncation: &'a [checks::TruncationRow],
    checks: &'a [CheckResult],
}

fn cmd_evolve(loaded: &LoadedConfig, files: &mut Files) -> Result<Vec<CheckResult>> {
    let cfg = &loaded.config;
    let grid = loaded.grid;
    let setup = loaded.setup()?;
    let run = checks::run_expansion(&setup, &grid, &cfg.spectral, &cfg.evolve)?;
    let checks = checks::expansion_checks(&run, &cfg.tolerances);
    write_csv(
        &files.path("coefficients.csv"),
        &["kind", "omega", "weight", "re", "im"],
        run.decomposition.rows().into_iter().map(|r| {
            vec![
                r.kind.to_string(),
                num(r.omega),
                num(r.weight),
                num(r.re),
                num(r.im),
            ]
        }),
    )?;
    write_json(
        &files.path("decomposition.json"),
        "decomposition",
        &DecompositionReport {
            grid: (&grid).into(),
            spec: &run.spec,
            cutoff: run.set.cutoff(),
            continuum_nodes: run.set.nodes().len(),
            discrete_frequencies: run.set.discrete().iter().map(|m| m.omega()).collect(),
            parseval: run.parseval,
            energy_drift: run.energy_drift,
            imag_residue: run.imag_residue,
        },
    )?;
    let stride = cfg.evolve.output_stride;
    write_trajectory(
        &files.path("trajectory_expansion.csv"),
        &run.expansion,
        stride,
    )?;
    write_trajectory(&files.path("trajectory_oracle.csv"), &run.oracle, stride)?;
    let mut header = vec!["t", "energy_error", "weighted_error"];
    if run.leapfrog.is_some() {
        header.extend(["leapfrog_energy_error", "leapfrog_weighted_error"]);
    }
    write_numeric_csv(
        &files.path("errors.csv"),
        &header,
        run.report.times.iter().enumerate().map(|(i, &t)| {
            let mut row = vec![t];
            row.extend(run.report.series.iter().map(|s| s.errors[i]));
            if let Some((_, lf)) = &run.leapfrog {
                row.extend(lf.series.iter().map(|s| s.errors[i]));
            }
            row
        }),
    )?;
    if let Some((lf, _)) = &run.leapfrog {
        write_trajectory(&files.path("trajectory_leapfrog.csv"), lf, stride)?;
    }
    write_numeric_csv(
        &files.path("truncation.csv"),
        &[
            "cutoff",
            "energy_error",
            "weighted_error",
            "energy_vs_top",
            "weighted_vs_top",
        ],
        run.truncation.iter().map(|r| {
            vec![
                r.cutoff,
                r.energy_error,
                r.weighted_error,
                r.energy_vs_top,
                r.weighted_vs_top,
            ]
        }),
    )?;
    write_json(
        &files.path("error_report.json"),
        "error-report",
        &EvolveReport {
            grid: (&grid).into(),
            headline: run
                .report
                .max_relative(NormKind::Energy)
                .unwrap_or(f64::NAN),
            report: &run.report,
            leapfrog: run.leapfrog.as_ref().map(|(_, r)| r),
            truncation_time: run.truncation_time,
            truncation: &run.truncation,
            checks: &checks,
        },
    )?;
    Ok(checks)
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    grid: GridMeta,
    seed: u64,
    #[serde(flatten)]
    verdict: &'a Verdict,
}

/// The full battery. Checks that cannot run (for example because of a grid
/// guard) are reported as failures rather than aborting the run.
pub fn battery(loaded: &LoadedConfig) -> Result<Vec<CheckResult>> {
    let cfg = &loaded.config;
    let tol = &cfg.tolerances;
    let grid = loaded.grid;
    let setup = loaded.setup()?;
    let mut all = Vec::new();
    all.extend(guarded("krein", || {
        checks::krein_random_systems(cfg.seed, cfg.verify.random_systems, cfg.verify.max_dim, tol)
    }));
    all.extend(guarded("mild_solution.order", || {
        checks::mild_solution_order(cfg.seed, tol)
    }));
    if let Some(model) = setup.model() {
        all.extend(guarded("kink", || checks::kink_checks(model, &grid, tol)));
        all.extend(guarded("discrete", || {
            let op = GridOperator::schrodinger(setup.potential(), setup.m2(), &grid)?;
            Ok(checks::discrete_checks(&op, CUBIC_LAMBDA1, tol)?.0)
        }));
    }
    all.extend(guarded("two_route", || {
        checks::two_route_checks(
            &setup,
            &grid,
            &cfg.spectral.omegas,
            cfg.spectral.weight_s,
            tol,
        )
    }));
    all.extend(guarded("delta_normalization_check", || {
        let dgrid = cfg.spectral.delta_check.grid.spec()?;
        Ok(checks::normalization_checks(
            &loaded.setup_on(&dgrid)?,
            &dgrid,
            &cfg.spectral.delta_check,
            cfg.spectral.expansion.scalar_modes,
            cfg.verify.inject_normalization_scale,
            tol,
        )?
        .0)
    }));
    all.extend(guarded("eigen_residual", || {
        let rgrid = checks::residual_grid(cfg.verify.residual_grid.as_ref(), grid.length())?;
        checks::eigen_residual_checks(
            |g| loaded.setup_on(g),
            &rgrid,
            &cfg.spectral.omegas,
            cfg.spectral.weight_s,
            tol,
        )
    }));
    all.extend(guarded("expansion", || {
        let run = checks::run_expansion(&setup, &grid, &cfg.spectral, &cfg.evolve)?;
        Ok(checks::expansion_checks(&run, tol))
    }));
    if let Some(model) = setup.model() {
        all.extend(guarded("bands", || {
            Ok(checks::band_checks(&cfg.bands, model, cfg.seed, tol)?.0)
        }));
    }
    all.extend(guarded("noncommute", || {
        Ok(checks::noncommute_checks(&cfg.noncommute, tol)?.0)
    }));
    Ok(all)
}

fn cmd_verify(loaded: &LoadedConfig, files: &mut Files) -> Result<Vec<CheckResult>> {
    let checks = battery(loaded)?;
    let verdict = Verdict::new(checks);
    write_json(
        &files.path("verify.json"),
        "verify",
        &VerifyReport {
            grid: (&loaded.grid).into(),
            seed: loaded.config.seed,
            verdict: &verdict,
        },
    )?;
    Ok(verdict.checks)
}

#[derive(Serialize)]
struct BandsReport<'a> {
    #[serde(flatten)]
    run: &'a checks::BandsRun,
    checks: &'a [CheckResult],
}

fn cmd_bands(loaded: &LoadedConfig, files: &mut Files) -> Result<Vec<CheckResult>> {
    let cfg = &loaded.config;
    let setup = loaded.setup()?;
    let model = model_of(loaded, &setup, "bands")?;
    let (checks, run) = checks::band_checks(&cfg.bands, model, cfg.seed, &cfg.tolerances)?;
    write_band_csv(&files.path("band_tables.csv"), &run.tables)?;
    write_numeric_csv(
        &files.path("bv_positivity.csv"),
        &["v", "min_eigenvalue", "floor"],
        run.positivity
            .iter()
            .map(|&(v, e)| vec![v, e, (1.0 - v * v).min(model.m2())]),
    )?;
    write_json(
        &files.path("bands.json"),
        "bands",
        &BandsReport {
            run: &run,
            checks: &checks,
        },
    )?;
    Ok(checks)
}

#[derive(Serialize)]
struct NoncommuteReport<'a> {
    config: &'a crate::config::NoncommuteConfig,
    #[serde(flatten)]
    run: &'a checks::NoncommuteRun,
    checks: &'a [CheckResult],
}

fn cmd_demo_noncommute(loaded: &LoadedConfig, files: &mut Files) -> Result<Vec<CheckResult>> {
    let cfg = &loaded.config;
    let (checks, run) = checks::noncommute_checks(&cfg.noncommute, &cfg.tolerances)?;
    write_numeric_csv(
        &files.path("noncommute.csv"),
        &["g", "commutator_defect"],
        run.couplings
            .iter()
            .zip(&run.defects)
            .map(|(&g, &d)| vec![g, d]),
    )?;
    write_json(
        &files.path("noncommute.json"),
        "noncommute",
        &NoncommuteReport {
            config: &cfg.noncommute,
            run: &run,
            checks: &checks,
        },
    )?;
    Ok(checks)
}
