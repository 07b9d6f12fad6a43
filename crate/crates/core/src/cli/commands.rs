//! The `validate`, `certify` and `simulate` commands.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cell_cycle::{CellCycleModel, Interval, PowerDensity};
use crate::certify::{
    check_local_integrability, check_proper_subinvariance, fock_proximity_from_snapshots, sweeping_from_snapshots,
    CertificatePlan, CertificateReport, FockProximity, IntervalFamily, SphereFamily, SweepingReport,
    Verdict,
};
use crate::cli::config::{BetaSetting, BuiltModel, ExperimentConfig, ModelConfig, OutputFormat};
use crate::cli::output::{margins_csv, sweeping_csv, to_json, write_atomic};
use crate::error::Error;
use crate::markov::{duality_residual, run_ensemble, SphereRegion};
use crate::numerics::{
    fd_jacobian_det_on_sphere, integrate_1d, sample_uniform_sphere, sphere_volume, RandomStream, DEFAULT_FD_STEP,
};
use crate::qnd::{
    jacobian_det_complex, jacobian_det_complex_realified, jacobian_det_real, perron_qnd, realify_matrix,
    subinvariance_ratio, FockLyapunovDensity, MeasurementEnsemble, COMPLETENESS_TOL, MIN_ABS_DET,
};
use crate::state::QuantumState;

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Status {
    Pass = 0,
    Fail = 1,
    Config = 2,
    Inconclusive = 3,
}

/// Environment variable overriding `output.dir` (the `--output-dir` flag wins over it).
pub const OUTPUT_DIR_ENV: &str = "SWEEPCERT_OUTPUT_DIR";

// Substream indices per purpose, so commands never share random numbers.
const STREAM_CERTIFY: u64 = 0;
const STREAM_INTEGRABILITY: u64 = 1;
const STREAM_SIMULATE: u64 = 2;
const STREAM_VALIDATE: u64 = 3;

const VALIDATE_POINTS: usize = 50;
/// Absolute slack for duality checks whose standard error vanishes.
const DUALITY_ABS_FLOOR: f64 = 1e-12;

pub struct RunContext {
    pub output_override: Option<PathBuf>,
    pub quiet: bool,
}

impl RunContext {
    fn output_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        if let Some(d) = &self.output_override {
            return d.clone();
        }
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => cfg.output.dir.clone(),
        }
    }

    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }
}

fn load(path: &Path) -> Result<(ExperimentConfig, BuiltModel), Status> {
    let cfg = ExperimentConfig::from_path(path).map_err(|e| {
        eprintln!("{e}");
        Status::Config
    })?;
    let model = cfg.build_model().map_err(|e| {
        eprintln!("{e}");
        Status::Config
    })?;
    Ok((cfg, model))
}

fn fail(e: impl std::fmt::Display) -> Status {
    eprintln!("error: {e}");
    Status::Fail
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// ---------------------------------------------------------------------------
// validate

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub value: String,
    pub tolerance: String,
    pub status: CheckStatus,
}

fn row(check: &str, value: f64, tol: &str, ok: bool) -> CheckRow {
    CheckRow {
        check: check.into(),
        value: format!("{value:.6e}"),
        tolerance: tol.into(),
        status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
    }
}

fn skipped(check: &str, why: &str) -> CheckRow {
    CheckRow { check: check.into(), value: why.into(), tolerance: "-".into(), status: CheckStatus::Skip }
}

fn errored(check: &str, e: &Error) -> CheckRow {
    CheckRow { check: check.into(), value: e.to_string(), tolerance: "-".into(), status: CheckStatus::Fail }
}

pub fn render_table(rows: &[CheckRow]) -> String {
    let w0 = rows.iter().map(|r| r.check.len()).max().unwrap_or(5).max(5);
    let w1 = rows.iter().map(|r| r.value.len()).max().unwrap_or(5).max(5);
    let w2 = rows.iter().map(|r| r.tolerance.len()).max().unwrap_or(9).max(9);
    let mut out = format!("{:<w0$}  {:<w1$}  {:<w2$}  status\n", "check", "value", "tolerance");
    for r in rows {
        let st = match r.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skip => "SKIP",
        };
        out.push_str(&format!("{:<w0$}  {:<w1$}  {:<w2$}  {st}\n", r.check, r.value, r.tolerance));
    }
    out
}

pub fn cmd_validate(config: &Path, ctx: &RunContext) -> Status {
    let (cfg, model) = match load(config) {
        Ok(x) => x,
        Err(s) => return s,
    };
    let rng = RandomStream::new(cfg.seed, STREAM_VALIDATE);
    let rows = match &model {
        BuiltModel::Qnd(e) => validate_qnd(e, &cfg, &rng),
        BuiltModel::Cell { model, beta, beta_max, beta_grid } => {
            validate_cell(model, *beta, *beta_max, *beta_grid, &cfg, &rng)
        }
    };
    ctx.say(render_table(&rows));
    if rows.iter().any(|r| r.status == CheckStatus::Fail) {
        Status::Fail
    } else {
        Status::Pass
    }
}

/// The numeric self-consistency battery for a measurement ensemble.
pub fn validate_qnd(e: &MeasurementEnsemble, cfg: &ExperimentConfig, rng: &RandomStream) -> Vec<CheckRow> {
    let n = e.dim();
    let mut rows = Vec::new();

    let (i, j, dev) = e.completeness_deviation();
    let signed = if dev.im.abs() <= 1e-15 { dev.re } else { dev.norm() };
    let mut r = row(&format!("completeness residual [{},{}]", i + 1, j + 1), signed, "|.| < 1e-12", dev.norm() < COMPLETENESS_TOL);
    if dev.im.abs() > 1e-15 {
        r.value = format!("{:.6e}{:+.6e}i", dev.re, dev.im);
    }
    rows.push(r);
    let complete = dev.norm() < COMPLETENESS_TOL;

    let min_det = (0..e.len()).map(|k| e.abs_det(k)).fold(f64::INFINITY, f64::min);
    rows.push(row("min |det M_k|", min_det, "> 1e-12", min_det > MIN_ABS_DET));
    if let Some(t) = e.diagonal_table() {
        let in_range = t.iter().flatten().all(|&m| m > 0.0 && m < 1.0);
        let distinct = t.iter().all(|r| (0..r.len()).all(|a| (a + 1..r.len()).all(|b| r[a] != r[b])));
        let mut r = row("diagonal entries in (0,1), distinct", 0.0, "-", in_range && distinct);
        r.value = if in_range && distinct { "ok".into() } else { "violated".into() };
        rows.push(r);
    }
    let invertible = min_det > MIN_ABS_DET;

    let points: Vec<QuantumState> = {
        let mut s = rng.substream(0);
        (0..VALIDATE_POINTS).map(|_| sample_uniform_sphere(n, &mut s).expect("dimension is positive")).collect()
    };

    if invertible {
        let mut real_fd = Ok(0.0f64);
        let mut complex_realified = Ok(0.0f64);
        let mut complex_fd = Ok(0.0f64);
        for k in 0..e.len() {
            let m = e.matrix(k);
            let mr = realify_matrix(&m);
            for phi in &points {
                let p = phi.realify();
                let res: crate::Result<(f64, f64, f64, f64)> = (|| {
                    let closed_real = jacobian_det_real(&mr, &p)?;
                    let closed_c = jacobian_det_complex(&m, phi)?;
                    let via_real = jacobian_det_complex_realified(&m, phi)?;
                    let map = |x: &[f64]| {
                        let y = &mr * nalgebra::DVector::from_column_slice(x);
                        let nrm = y.norm();
                        y.iter().map(|v| v / nrm).collect::<Vec<f64>>()
                    };
                    let fd = fd_jacobian_det_on_sphere(map, &p, DEFAULT_FD_STEP)?;
                    Ok((closed_real, closed_c, via_real, fd.det))
                })();
                match res {
                    Ok((cr, cc, vr, fd)) => {
                        if let Ok(x) = real_fd.as_mut() {
                            *x = x.max(rel(cr, fd));
                        }
                        if let Ok(x) = complex_realified.as_mut() {
                            *x = x.max(rel(cc, vr));
                        }
                        if let Ok(x) = complex_fd.as_mut() {
                            *x = x.max(rel(cc, fd));
                        }
                    }
                    Err(err) => {
                        real_fd = Err(err.clone());
                        complex_realified = Err(err.clone());
                        complex_fd = Err(err);
                    }
                }
            }
        }
        for (name, res, tol, tol_s) in [
            ("real sphere-map Jacobian: closed form vs finite differences (max rel)", real_fd, 1e-5, "< 1e-5"),
            ("complex sphere-map Jacobian: closed form vs realified route (max rel)", complex_realified, 1e-10, "< 1e-10"),
            ("complex sphere-map Jacobian: closed form vs finite differences (max rel)", complex_fd, 1e-5, "< 1e-5"),
        ] {
            rows.push(match res {
                Ok(v) => row(name, v, tol_s, v < tol),
                Err(err) => errored(name, &err),
            });
        }

        let ifs = e.to_ifs_model();
        let smooth = |phi: &QuantumState| 1.0 + phi.components()[0].norm_sqr();
        let mut worst = Ok(0.0f64);
        for phi in &points {
            match (perron_qnd(e, &smooth, phi), ifs.perron_pointwise(&smooth, phi)) {
                (Ok(a), Ok(b)) => {
                    if let Ok(w) = worst.as_mut() {
                        *w = w.max(rel(a, b));
                    }
                }
                (Err(err), _) | (_, Err(err)) => worst = Err(err),
            }
        }
        let name = "transfer operator: measurement formula vs generic route (max rel)";
        rows.push(match worst {
            Ok(v) => row(name, v, "< 1e-12", v < 1e-12),
            Err(err) => errored(name, &err),
        });
    } else {
        for name in ["sphere-map Jacobian checks", "transfer operator routes"] {
            rows.push(skipped(name, "singular measurement"));
        }
    }

    if e.diagonal_table().is_some() && invertible && complete {
        let mut worst = 0.0f64;
        let mut err = None;
        for phi in points.iter().filter(|p| p.min_modulus() >= 1e-3) {
            match subinvariance_ratio(e, phi) {
                Ok(r) => worst = worst.max(r),
                Err(x) => err = Some(x),
            }
        }
        let name = "Fock density subinvariance ratio (max)";
        rows.push(match err {
            None => row(name, worst, "<= 1 + 1e-12", worst <= 1.0 + 1e-12),
            Some(x) => errored(name, &x),
        });
    }

    let eps = cfg.family_params().into_iter().fold(0.0, f64::max);
    let name = format!("duality residual on A_{eps} vs 3 std errors");
    if complete && invertible {
        let vol = sphere_volume(n);
        let rho = move |_: &QuantumState| 1.0 / vol;
        let region = SphereRegion::MinModulusAtLeast(eps);
        let ifs = e.to_ifs_model();
        let res = duality_residual(
            &ifs,
            &rho,
            |s: &mut RandomStream| sample_uniform_sphere(n, s),
            &region,
            cfg.certificate.integrability_samples,
            &rng.substream(1),
        );
        rows.push(duality_row(&name, res));
    } else {
        rows.push(skipped(&name, "ensemble is not a valid measurement"));
    }
    rows
}

fn resolve_beta(model: &CellCycleModel, beta: BetaSetting, beta_max: f64, grid: usize) -> Option<f64> {
    match beta {
        BetaSetting::Fixed(b) => Some(b),
        BetaSetting::Auto => model.find_beta(beta_max, grid),
    }
}

fn initial_interval(model: &CellCycleModel, cfg: &ExperimentConfig) -> [f64; 2] {
    cfg.simulation.initial_interval.unwrap_or([model.sigma, 2.0 * model.sigma])
}

/// The numeric self-consistency battery for the cell-cycle kernel.
pub fn validate_cell(
    model: &CellCycleModel,
    beta: BetaSetting,
    beta_max: f64,
    grid: usize,
    cfg: &ExperimentConfig,
    rng: &RandomStream,
) -> Vec<CheckRow> {
    let s = model.sigma;
    let mut rows = Vec::new();

    let ys: Vec<f64> = (0..VALIDATE_POINTS).map(|j| s * (1e3f64).powf(j as f64 / (VALIDATE_POINTS - 1) as f64)).collect();
    let mut worst = Ok(0.0f64);
    for &y in &ys {
        let lo = model.daughter_support_min(y);
        match integrate_1d(|x| model.kernel_eval(x, y).unwrap_or(f64::NAN), lo, f64::INFINITY, 1e-12) {
            Ok(v) => {
                if let Ok(w) = worst.as_mut() {
                    *w = w.max((v - 1.0).abs());
                }
            }
            Err(e) => worst = Err(e),
        }
    }
    let name = "kernel normalization |int K(x,y) dx - 1| (max)";
    rows.push(match worst {
        Ok(v) => row(name, v, "< 1e-8", v < 1e-8),
        Err(e) => errored(name, &e),
    });

    let h = 1e-5;
    let fd = (model.certificate_margin(h) - model.certificate_margin(-h)) / (2.0 * h);
    let slope = model.certificate_slope_at_zero();
    rows.push(row("f'(0) finite difference vs -alpha ln sigma - 1 (abs)", (fd - slope).abs(), "< 1e-6", (fd - slope).abs() < 1e-6));
    rows.push(row("f(0)", model.certificate_margin(0.0), "== 0", model.certificate_margin(0.0) == 0.0));

    let name = "power-density closed form vs quadrature (max rel)";
    match resolve_beta(model, beta, beta_max, grid) {
        Some(b) => {
            let m = model.with_beta(b).expect("beta is positive");
            let rho = PowerDensity { beta: b };
            let mut worst = Ok(0.0f64);
            for &x in &ys {
                match (m.perron_power_closed_form(x), m.perron_quadrature(&rho, x, 1e-13)) {
                    (Ok(a), Ok(q)) => {
                        if let Ok(w) = worst.as_mut() {
                            *w = w.max(rel(a, q));
                        }
                    }
                    (Err(e), _) | (_, Err(e)) => worst = Err(e),
                }
            }
            rows.push(match worst {
                Ok(v) => row(name, v, "< 1e-6", v < 1e-6),
                Err(e) => errored(name, &e),
            });
        }
        None => rows.push(skipped(name, "no beta with f(beta) < 0")),
    }

    // ρ uniform on [σ, 4σ] straddles y = 1, so both kernel branches contribute
    let (lo, hi) = (s, 4.0 * s);
    let width = hi - lo;
    let rho = move |x: &f64| if *x >= lo && *x < hi { 1.0 / width } else { 0.0 };
    let region = Interval { lo: s, hi: 1.0_f64.max(s * 2.0) };
    let name = format!("duality residual on [{s}, {}) vs 3 std errors", region.hi);
    let res = duality_residual(
        model,
        &rho,
        move |r: &mut RandomStream| Ok(lo + width * r.uniform()),
        &region,
        cfg.certificate.integrability_samples,
        &rng.substream(1),
    );
    rows.push(duality_row(&name, res));
    rows
}

fn duality_row(name: &str, res: crate::Result<crate::numerics::MonteCarloEstimate>) -> CheckRow {
    match res {
        Ok(d) => {
            let bound = 3.0 * d.std_error + DUALITY_ABS_FLOOR;
            let mut r = row(name, d.value.abs(), "", d.value.abs() < bound);
            r.tolerance = format!("< {bound:.3e}");
            r
        }
        Err(e) => errored(name, &e),
    }
}

// ---------------------------------------------------------------------------
// certify

#[derive(Debug, Clone, Serialize)]
pub struct BetaChoice {
    pub beta: f64,
    /// `f(β) = α − σ^β (α + β)`; negative means the certificate can hold.
    pub margin: f64,
    pub slope_at_zero: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifyDocument<S> {
    pub command: &'static str,
    pub seed: u64,
    pub model: ModelConfig,
    pub certificate_function: String,
    pub plan: CertificatePlan,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<BetaChoice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    pub verdict: Verdict,
    pub report: Option<CertificateReport<S>>,
}

fn verdict_status(v: Verdict) -> Status {
    match v {
        Verdict::Certified => Status::Pass,
        Verdict::Violated => Status::Fail,
        Verdict::Inconclusive => Status::Inconclusive,
    }
}

fn prepare_dir(ctx: &RunContext, cfg: &ExperimentConfig) -> Result<PathBuf, Status> {
    let dir = ctx.output_dir(cfg);
    std::fs::create_dir_all(&dir).map_err(|e| {
        eprintln!("config error: cannot create output directory {}: {e}", dir.display());
        Status::Config
    })?;
    Ok(dir)
}

fn emit(dir: &Path, name: &str, body: &str, ctx: &RunContext) -> Result<(), Status> {
    let path = write_atomic(dir, name, body.as_bytes()).map_err(fail)?;
    ctx.say(format!("wrote {}", path.display()));
    Ok(())
}

pub fn cmd_certify(config: &Path, ctx: &RunContext) -> Status {
    let (cfg, model) = match load(config) {
        Ok(x) => x,
        Err(s) => return s,
    };
    let plan = CertificatePlan {
        n_points: cfg.certificate.n_points,
        exclusion_radius: cfg.certificate.exclusion_radius,
        margin_floor: cfg.certificate.margin_floor,
    };
    let rng = RandomStream::new(cfg.seed, STREAM_CERTIFY);
    let integ_rng = RandomStream::new(cfg.seed, STREAM_INTEGRABILITY);
    let want_csv = cfg.output.formats.contains(&OutputFormat::Csv);

    let (json, csv, verdict) = match &model {
        BuiltModel::Qnd(e) => {
            if let Err(err) = e.validate() {
                eprintln!("config error: {err}");
                return Status::Config;
            }
            let n = e.dim();
            let family = match SphereFamily::new(n, cfg.family_params()) {
                Ok(f) => f,
                Err(err) => {
                    eprintln!("config error: {err}");
                    return Status::Config;
                }
            };
            let ifs = e.to_ifs_model();
            let u = FockLyapunovDensity::new(n);
            let report = match check_proper_subinvariance(&ifs, &u, &plan, |s| sample_uniform_sphere(n, s), &rng) {
                Ok(r) => r,
                Err(err) => return fail(err),
            };
            let integ = check_local_integrability(&u, &family, cfg.certificate.integrability_samples, &integ_rng);
            let report = report.with_integrability(integ);
            let csv = margins_csv(&report.samples);
            let doc = CertifyDocument {
                command: "certify",
                seed: cfg.seed,
                model: cfg.model.clone(),
                certificate_function: "u(phi) = 1 / prod_i |phi_i|^2".into(),
                plan,
                beta: None,
                diagnostic: None,
                verdict: report.verdict,
                report: Some(report),
            };
            (to_json(&doc), csv, doc.verdict)
        }
        BuiltModel::Cell { model, beta, beta_max, beta_grid } => {
            let slope = model.certificate_slope_at_zero();
            let Some(b) = resolve_beta(model, *beta, *beta_max, *beta_grid) else {
                let cmp = if slope > 0.0 { ">" } else { "<=" };
                let diagnostic = format!(
                    "no beta in (0, {beta_max}] with f(beta) < 0; f'(0) = -alpha ln sigma - 1 = {slope:.6} {cmp} 0"
                );
                eprintln!("{diagnostic}");
                let doc: CertifyDocument<f64> = CertifyDocument {
                    command: "certify",
                    seed: cfg.seed,
                    model: cfg.model.clone(),
                    certificate_function: "u(x) = x^(-1+beta)".into(),
                    plan,
                    beta: None,
                    diagnostic: Some(diagnostic),
                    verdict: Verdict::Inconclusive,
                    report: None,
                };
                let dir = match prepare_dir(ctx, &cfg) {
                    Ok(d) => d,
                    Err(s) => return s,
                };
                if let Err(s) = emit(&dir, "certificate.json", &to_json(&doc), ctx) {
                    return s;
                }
                return Status::Inconclusive;
            };
            let m = model.with_beta(b).expect("beta is positive");
            let family = match IntervalFamily::new(m.sigma, cfg.family_params()) {
                Ok(f) => f,
                Err(err) => {
                    eprintln!("config error: {err}");
                    return Status::Config;
                }
            };
            let u = PowerDensity { beta: b };
            let (lo, hi) = (m.sigma, cfg.certificate.sample_upper);
            let ratio = hi / lo;
            let sampler = move |s: &mut RandomStream| Ok(lo * ratio.powf(s.uniform()));
            let report = match check_proper_subinvariance(&m, &u, &plan, sampler, &rng) {
                Ok(r) => r,
                Err(err) => return fail(err),
            };
            let integ = check_local_integrability(&u, &family, cfg.certificate.integrability_samples, &integ_rng);
            let report = report.with_integrability(integ);
            let csv = margins_csv(&report.samples);
            let margin = m.certificate_margin(b);
            let diagnostic = (margin >= 0.0).then(|| format!("f(beta) = {margin:.6} is not negative"));
            let doc = CertifyDocument {
                command: "certify",
                seed: cfg.seed,
                model: cfg.model.clone(),
                certificate_function: "u(x) = x^(-1+beta)".into(),
                plan,
                beta: Some(BetaChoice { beta: b, margin, slope_at_zero: slope }),
                diagnostic,
                verdict: report.verdict,
                report: Some(report),
            };
            (to_json(&doc), csv, doc.verdict)
        }
    };

    let dir = match prepare_dir(ctx, &cfg) {
        Ok(d) => d,
        Err(s) => return s,
    };
    if let Err(s) = emit(&dir, "certificate.json", &json, ctx) {
        return s;
    }
    if want_csv {
        if let Err(s) = emit(&dir, "certificate_margins.csv", &csv, ctx) {
            return s;
        }
    }
    ctx.say(format!("verdict: {}", serde_json::to_string(&verdict).expect("verdict serializes").trim_matches('"')));
    verdict_status(verdict)
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Debug, Clone, Serialize)]
pub struct SimulateDocument {
    pub command: &'static str,
    pub seed: u64,
    pub model: ModelConfig,
    pub horizon: usize,
    pub family_kind: &'static str,
    pub sweeping: SweepingReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fock_proximity: Option<FockProximityReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FockProximityReport {
    pub delta: f64,
    pub fractions: Vec<FockProximity>,
}

fn config_err(e: impl std::fmt::Display) -> Status {
    eprintln!("config error: {e}");
    Status::Config
}

pub fn cmd_simulate(config: &Path, ctx: &RunContext) -> Status {
    let (cfg, model) = match load(config) {
        Ok(x) => x,
        Err(s) => return s,
    };
    let rng = RandomStream::new(cfg.seed, STREAM_SIMULATE);
    let sim = &cfg.simulation;
    let (sweeping, fock, family_kind) = match &model {
        BuiltModel::Qnd(e) => {
            if let Err(err) = e.validate() {
                return config_err(err);
            }
            let n = e.dim();
            let family = match SphereFamily::new(n, cfg.family_params()) {
                Ok(f) => f,
                Err(err) => return config_err(err),
            };
            let ifs = e.to_ifs_model();
            let snaps = match run_ensemble(&ifs, |s| sample_uniform_sphere(n, s), sim.n_trajectories, &sim.checkpoints, &rng) {
                Ok(s) => s,
                Err(err) => return fail(err),
            };
            let fock = e.diagonal_table().map(|_| FockProximityReport {
                delta: sim.fock_delta,
                fractions: fock_proximity_from_snapshots(&snaps, sim.fock_delta),
            });
            (sweeping_from_snapshots(&family, &snaps), fock, "sphere-min-coordinate")
        }
        BuiltModel::Cell { model, .. } => {
            let family = match IntervalFamily::new(model.sigma, cfg.family_params()) {
                Ok(f) => f,
                Err(err) => return config_err(err),
            };
            let [lo, hi] = initial_interval(model, &cfg);
            let init = move |s: &mut RandomStream| Ok(lo + (hi - lo) * s.uniform());
            let snaps = match run_ensemble(model, init, sim.n_trajectories, &sim.checkpoints, &rng) {
                Ok(s) => s,
                Err(err) => return fail(err),
            };
            (sweeping_from_snapshots(&family, &snaps), None, "half-line-interval")
        }
    };

    let doc = SimulateDocument {
        command: "simulate",
        seed: cfg.seed,
        model: cfg.model.clone(),
        horizon: cfg.horizon(),
        family_kind,
        sweeping,
        fock_proximity: fock,
    };
    let dir = match prepare_dir(ctx, &cfg) {
        Ok(d) => d,
        Err(s) => return s,
    };
    if let Err(s) = emit(&dir, "sweeping.json", &to_json(&doc), ctx) {
        return s;
    }
    if cfg.output.formats.contains(&OutputFormat::Csv) {
        if let Err(s) = emit(&dir, "sweeping.csv", &sweeping_csv(&doc.sweeping.masses), ctx) {
            return s;
        }
    }
    for t in &doc.sweeping.trends {
        ctx.say(format!("member {} (param {}): {:?}", t.member_id, t.member_param, t.trend));
    }
    Status::Pass
}
