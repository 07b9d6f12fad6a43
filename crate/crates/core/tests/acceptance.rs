//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::path::Path;
use std::time::Instant;

use common::{normalized_linear_map, random_complete_ensemble, random_complex_matrix, random_real_matrix, random_unit_real, rel};
use sweepcert::cell_cycle::{CellCycleModel, Interval, PowerDensity};
use sweepcert::certify::{sweeping_diagnostic, IntervalFamily, SphereFamily, Trend, TREND_SLACK_SE};
use sweepcert::markov::{duality_residual, run_ensemble, Density, SphereRegion};
use sweepcert::numerics::{
    fd_jacobian_det_on_sphere, mc_integral_on_sphere, sample_uniform_sphere, sphere_volume, RandomStream, DEFAULT_FD_STEP,
};
use sweepcert::qnd::{
    example_ensemble, jacobian_det_complex, jacobian_det_complex_realified, jacobian_det_real, perron_qnd, realify_matrix,
    subinvariance_ratio, FockLyapunovDensity,
};
use sweepcert::QuantumState;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn completeness() -> Outcome {
    let r = example_ensemble().completeness_residual();
    check(r < 1e-12, format!("max |sum M*M - I| = {r:.3e} (< 1e-12)"))
}

fn real_jacobian_oracle() -> Outcome {
    let mut rng = RandomStream::new(101, 0);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in [2usize, 3, 4] {
        for _ in 0..40 {
            let m = random_real_matrix(n, 0.1, &mut rng);
            let phi = random_unit_real(n, &mut rng);
            let closed = jacobian_det_real(&m, &phi).map_err(|e| e.to_string())?;
            let fd = fd_jacobian_det_on_sphere(normalized_linear_map(&m), &phi, DEFAULT_FD_STEP).map_err(|e| e.to_string())?;
            worst = worst.max(rel(closed, fd.det));
            cases += 1;
        }
    }
    check(worst < 1e-5, format!("{cases} cases, N in {{2,3,4}}, max rel err vs finite differences {worst:.3e} (< 1e-5)"))
}

fn complex_jacobian_consistency() -> Outcome {
    let mut rng = RandomStream::new(102, 0);
    let (mut worst_real, mut worst_fd) = (0.0f64, 0.0f64);
    let mut cases = 0;
    for n in [1usize, 2, 3] {
        for _ in 0..40 {
            let m = random_complex_matrix(n, 0.1, &mut rng);
            let phi = sample_uniform_sphere(n, &mut rng).map_err(|e| e.to_string())?;
            let closed = jacobian_det_complex(&m, &phi).map_err(|e| e.to_string())?;
            let via_real = jacobian_det_complex_realified(&m, &phi).map_err(|e| e.to_string())?;
            let mr = realify_matrix(&m);
            let fd = fd_jacobian_det_on_sphere(normalized_linear_map(&mr), &phi.realify(), DEFAULT_FD_STEP)
                .map_err(|e| e.to_string())?;
            worst_real = worst_real.max(rel(closed, via_real));
            worst_fd = worst_fd.max(rel(closed, fd.det));
            cases += 1;
        }
    }
    check(
        worst_real < 1e-10 && worst_fd < 1e-5,
        format!("{cases} cases, max rel err vs realified {worst_real:.3e} (< 1e-10), vs finite differences {worst_fd:.3e} (< 1e-5)"),
    )
}

fn transfer_operator_routes() -> Outcome {
    let mut rng = RandomStream::new(103, 0);
    let general = random_complete_ensemble(2, 2, &mut rng);
    let smooth = |phi: &QuantumState| 1.0 + 3.0 * phi.components()[0].norm_sqr();
    let fock = FockLyapunovDensity::new(2);
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, e) in [("diagonal", example_ensemble()), ("non-diagonal", general)] {
        let ifs = e.to_ifs_model();
        let mut worst = 0.0f64;
        let mut evaluated = 0;
        while evaluated < 1000 {
            let phi = sample_uniform_sphere(2, &mut rng).map_err(|e| e.to_string())?;
            let rho: &dyn Density<QuantumState> = if evaluated % 2 == 0 { &smooth } else { &fock };
            match (perron_qnd(&e, rho, &phi), ifs.perron_pointwise(rho, &phi)) {
                (Ok(a), Ok(b)) => {
                    worst = worst.max(rel(a, b));
                    evaluated += 1;
                }
                // preimage on the Fock singular set; draw again
                (Err(_), Err(_)) => continue,
                (a, b) => return Err(format!("{name}: routes disagree on failure: {a:?} vs {b:?}")),
            }
        }
        ok &= worst < 1e-12;
        lines.push(format!("{name} max rel {worst:.3e}"));
    }
    check(ok, format!("1000 points each; {} (< 1e-12)", lines.join(", ")))
}

fn fock_factorization() -> Outcome {
    let e = example_ensemble();
    let u = FockLyapunovDensity::new(2);
    let mut rng = RandomStream::new(104, 0);
    let (mut worst_fact, mut max_ratio) = (0.0f64, 0.0f64);
    let mut count = 0;
    while count < 10_000 {
        let phi = sample_uniform_sphere(2, &mut rng).map_err(|e| e.to_string())?;
        if phi.min_modulus() < 1e-3 {
            continue;
        }
        let p = perron_qnd(&e, &u, &phi).map_err(|e| e.to_string())?;
        let r = subinvariance_ratio(&e, &phi).map_err(|e| e.to_string())?;
        worst_fact = worst_fact.max(rel(p, r * u.eval(&phi)));
        max_ratio = max_ratio.max(r);
        count += 1;
    }
    let at_e1 = subinvariance_ratio(&e, &QuantumState::basis(2, 0).unwrap()).map_err(|e| e.to_string())?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let at_diag = subinvariance_ratio(&e, &QuantumState::from_real(&[s, s]).unwrap()).map_err(|e| e.to_string())?;
    check(
        worst_fact < 1e-10 && max_ratio <= 1.0 + 1e-12 && (at_e1 - 1.0).abs() < 1e-12 && (at_diag - 0.9216).abs() < 1e-10,
        format!(
            "10^4 points: factorization max rel {worst_fact:.3e} (< 1e-10), max ratio {max_ratio:.12} (<= 1 + 1e-12), \
             ratio(e_1) = {at_e1:.15}, ratio((1,1)/sqrt2) = {at_diag:.12} (0.9216)"
        ),
    )
}

fn duality() -> Outcome {
    let e = example_ensemble();
    let ifs = e.to_ifs_model();
    let vol = sphere_volume(2);
    let rho = move |_: &QuantumState| 1.0 / vol;
    let q = duality_residual(
        &ifs,
        &rho,
        |s: &mut RandomStream| sample_uniform_sphere(2, s),
        &SphereRegion::MinModulusAtLeast(0.3),
        1_000_000,
        &RandomStream::new(105, 0),
    )
    .map_err(|e| e.to_string())?;

    let m = CellCycleModel::new(1.0, 0.5, 0.0).unwrap();
    let (lo, hi) = (0.5, 2.0);
    let rho_c = move |x: &f64| if *x >= lo && *x < hi { 1.0 / (hi - lo) } else { 0.0 };
    let c = duality_residual(
        &m,
        &rho_c,
        move |s: &mut RandomStream| Ok(lo + (hi - lo) * s.uniform()),
        &Interval { lo: 0.5, hi: 1.0 },
        1_000_000,
        &RandomStream::new(106, 0),
    )
    .map_err(|e| e.to_string())?;
    check(
        q.value.abs() < 3.0 * q.std_error && c.value.abs() < 3.0 * c.std_error,
        format!(
            "QND A_0.3: residual {:.3e} vs 3se {:.3e}; cell [sigma,1): residual {:.3e} vs 3se {:.3e}",
            q.value,
            3.0 * q.std_error,
            c.value,
            3.0 * c.std_error
        ),
    )
}

fn cell_closed_form() -> Outcome {
    let mut worst = 0.0f64;
    for (a, s, b) in [(1.0, 0.5, 0.1), (1.0, 0.5, 0.5), (0.5, 0.8, 0.2)] {
        let m = CellCycleModel::new(a, s, b).unwrap();
        let rho = PowerDensity { beta: b };
        for j in 0..50 {
            let x = s * 1e3f64.powf(j as f64 / 49.0);
            let closed = m.perron_power_closed_form(x).map_err(|e| e.to_string())?;
            let quad = m.perron_quadrature(&rho, x, 1e-13).map_err(|e| e.to_string())?;
            worst = worst.max(rel(closed, quad));
        }
    }
    // independent oracle (direct integration of the two kernel branches)
    let oracle = 0.854_629_1;
    let v = CellCycleModel::new(1.0, 0.5, 0.1).unwrap().perron_power_closed_form(1.0).map_err(|e| e.to_string())?;
    check(
        worst < 1e-6 && (v - oracle).abs() < 1e-6,
        format!("3 parameter sets x 50 points: max rel {worst:.3e} (< 1e-6); value at x=1: {v:.9} (oracle {oracle})"),
    )
}

fn certificate_condition() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (a, s) in [(1.0, 0.5), (0.5, 0.8), (1.2, 0.5), (0.3, 0.2)] {
        let m = CellCycleModel::new(a, s, 0.0).unwrap();
        ok &= a * f64::ln(s) > -1.0;
        let f0 = m.certificate_margin(0.0);
        let h = 1e-5;
        let fd = (m.certificate_margin(h) - m.certificate_margin(-h)) / (2.0 * h);
        let slope_err = (fd - m.certificate_slope_at_zero()).abs();
        ok &= f0 == 0.0 && slope_err < 1e-6;
        let Some(b) = m.find_beta(1.0, 100) else {
            return Err(format!("find_beta failed for alpha={a}, sigma={s}"));
        };
        let mb = m.with_beta(b).unwrap();
        let fb = mb.certificate_margin(b);
        let rho = PowerDensity { beta: b };
        let mut sub = true;
        for j in 0..200 {
            let x = s * 1e3f64.powf(j as f64 / 199.0);
            let p = mb.perron_quadrature(&rho, x, 1e-13).map_err(|e| e.to_string())?;
            sub &= p < rho.eval(&x);
        }
        ok &= fb < 0.0 && sub;
        lines.push(format!("({a},{s}): f(0)={f0}, |fd f'(0) - formula|={slope_err:.1e}, beta={b:.4}, f(beta)={fb:.4}, pointwise strict={sub}"));
    }
    let none = CellCycleModel::new(2.0, 0.5, 0.0).unwrap().find_beta(1.0, 100);
    ok &= none.is_none();
    lines.push(format!("(2,0.5): find_beta = {none:?}"));
    check(ok, lines.join("; "))
}

fn empirical_sweeping() -> Outcome {
    let ifs = example_ensemble().to_ifs_model();
    let fam = SphereFamily::new(2, vec![0.1]).unwrap();
    let q = sweeping_diagnostic(&ifs, |s| sample_uniform_sphere(2, s), &fam, &[0, 50, 100, 200], 100_000, &RandomStream::new(107, 0))
        .map_err(|e| e.to_string())?;
    let qm = q.member_masses(0);
    let non_increasing = qm
        .windows(2)
        .all(|w| w[1].mass <= w[0].mass + TREND_SLACK_SE * w[0].std_error.hypot(w[1].std_error));
    let halved = qm[3].mass < 0.5 * qm[0].mass;
    let qnd_masses: Vec<String> = qm.iter().map(|m| format!("{:.5}", m.mass)).collect();

    let cell = CellCycleModel::new(1.0, 0.5, 0.0).unwrap();
    let cfam = IntervalFamily::new(0.5, vec![1.0, 2.0, 4.0]).unwrap();
    let c = sweeping_diagnostic(&cell, |s| Ok(0.5 + 0.5 * s.uniform()), &cfam, &[0, 25, 50, 100], 10_000, &RandomStream::new(108, 0))
        .map_err(|e| e.to_string())?;
    let cell_ok = c.trends.iter().all(|t| t.trend == Trend::Decaying);
    let cell_final: Vec<String> = (0..3).map(|i| format!("{:.4}", c.member_masses(i)[3].mass)).collect();
    check(
        non_increasing && halved && cell_ok,
        format!(
            "QND A_0.1 masses {} (non-increasing: {non_increasing}, final < half initial: {halved}); cell a in {{1,2,4}} final masses {} (all decaying: {cell_ok})",
            qnd_masses.join(" -> "),
            cell_final.join(", ")
        ),
    )
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool").install(f)
}

const QND_CFG: &str = r#"
seed = 11
[model]
kind = "qnd"
diagonal = [[0.6, 0.8], [0.8, 0.6]]
[simulation]
n_trajectories = 3000
checkpoints = [0, 10, 40]
[certificate]
n_points = 500
integrability_samples = 20000
"#;

const CELL_CFG: &str = r#"
seed = 12
[model]
kind = "cell"
alpha = 1.0
sigma = 0.5
beta = "auto"
[simulation]
n_trajectories = 3000
checkpoints = [0, 10, 25]
[certificate]
n_points = 300
"#;

fn cli_outputs(dir: &Path, cfg: &Path, threads: usize) -> Result<Vec<(String, Vec<u8>)>, String> {
    let out = dir.join(format!("out-{threads}"));
    for cmd in ["certify", "simulate"] {
        let args = ["sweepcert", "--quiet", "--output-dir", out.to_str().unwrap(), cmd, "--config", cfg.to_str().unwrap()];
        let status = in_pool(threads, || sweepcert::cli::run(args));
        if status as u8 != 0 {
            return Err(format!("{cmd} exited with {}", status as u8));
        }
    }
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
        .map_err(|e| e.to_string())?
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let rng = RandomStream::new(109, 0);
    let ifs = example_ensemble().to_ifs_model();
    let run_q = || run_ensemble(&ifs, |s| sample_uniform_sphere(2, s), 4000, &[0, 10, 50], &rng).unwrap();
    let q_same = in_pool(1, run_q) == in_pool(4, run_q);
    let cell = CellCycleModel::new(1.0, 0.5, 0.0).unwrap();
    let run_c = || run_ensemble(&cell, |s| Ok(0.5 + 0.5 * s.uniform()), 4000, &[0, 10, 50], &rng).unwrap();
    let c_same = in_pool(1, run_c) == in_pool(4, run_c);
    let mc = || mc_integral_on_sphere(|p: &QuantumState| p.components()[0].norm_sqr(), 3, 50_000, &rng).unwrap();
    let mc_same = in_pool(1, mc) == in_pool(4, mc);

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cli_same = true;
    let mut n_files = 0;
    for (name, text) in [("qnd.toml", QND_CFG), ("cell.toml", CELL_CFG)] {
        let cfg = dir.path().join(name);
        std::fs::write(&cfg, text).map_err(|e| e.to_string())?;
        let sub = dir.path().join(name.trim_end_matches(".toml"));
        let a = cli_outputs(&sub, &cfg, 1)?;
        let b = cli_outputs(&sub, &cfg, 4)?;
        n_files += a.len();
        cli_same &= a == b && !a.is_empty();
    }
    check(
        q_same && c_same && mc_same && cli_same,
        format!(
            "run_ensemble 1 vs 4 threads identical: QND {q_same}, cell {c_same}; MC integral identical: {mc_same}; \
             {n_files} CLI report files byte-identical across re-runs on 1 and 4 threads: {cli_same}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("completeness of the diagonal example", completeness),
        ("real sphere-map Jacobian vs finite differences", real_jacobian_oracle),
        ("complex sphere-map Jacobian consistency", complex_jacobian_consistency),
        ("measurement transfer operator vs generic IFS route", transfer_operator_routes),
        ("Fock density factorization and subinvariance", fock_factorization),
        ("duality identity (QND and cell)", duality),
        ("cell power-density closed form vs quadrature", cell_closed_form),
        ("cell certificate condition and beta search", certificate_condition),
        ("empirical sweeping trends", empirical_sweeping),
        ("determinism and worker-count independence", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS [{:>2}] {name} ({secs:.1}s): {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL [{:>2}] {name} ({secs:.1}s): {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
