//! Acceptance criteria 1–13. Each test prints one `criterion N: PASS|FAIL` line.
//!
//! Run with `cargo test -p gmc-cli --test acceptance -- --nocapture` to see the lines.

use gmc_cli::render::{render_heatmap, Colormap, RenderSpec, Scale};
use gmc_core::analysis::{
    self, calibrate_lambda, estimate_spectrum, null_uniformity, rooted_derivative_mean, spine_bessel_test,
    star_equation_test, RhsForm, SpineMode, StarKind, StarSetup, TestKind,
};
use gmc_core::cascade::{self, CascadeSpec};
use gmc_core::field::{empirical_covariance, Backend, FieldSampler, GridSpec, ScaleLadder, SupMode};
use gmc_core::kernels::{SeedKernel, StarCovariance};
use gmc_core::measures::{self, Region};
use gmc_core::rng::{Purpose, StreamKey};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

fn verdict(n: u32, pass: bool, started: Instant, detail: String) {
    println!(
        "criterion {n}: {} ({:.1}s) {detail}",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    assert!(pass, "criterion {n} failed: {detail}");
}

fn triangle() -> StarCovariance {
    StarCovariance::new(SeedKernel::triangle(1.0).unwrap())
}

fn sampler_1d(n: usize, ladder: ScaleLadder, backend: Backend, sup: SupMode) -> FieldSampler<f64> {
    FieldSampler::new(triangle(), GridSpec::new(1, n, 1.0).unwrap(), ladder, backend, sup).unwrap()
}

fn single_layer(t: f64) -> ScaleLadder {
    ScaleLadder::from_times(vec![0.0, t]).unwrap()
}

#[test]
fn criterion_01_covariance_fidelity() {
    let started = Instant::now();
    let (n, t, replicas) = (256, 6.0, 10_000);
    let offsets = [0usize, 1, 2, 3, 4, 6, 8, 11, 16, 22, 32, 45, 64, 90, 128, 160, 192, 224, 250, 255];
    let pairs: Vec<(usize, usize)> = offsets.iter().map(|&k| ((k * 37) % (n - k), (k * 37) % (n - k) + k)).collect();
    let mut details = Vec::new();
    let mut pass = true;
    for backend in [Backend::Cholesky, Backend::Circulant, Backend::Cone { bands_per_unit: 16 }] {
        let s = sampler_1d(n, single_layer(t), backend, SupMode::Boundary);
        let samples = s.map_replicas(101, 0..replicas, |run| run.values().to_vec());
        let est = empirical_covariance(&samples, &pairs).unwrap();
        let worst = est
            .iter()
            .map(|e| {
                let exact = s.covariance().eval_radial(t, s.grid().distance(e.pair.0, e.pair.1)).unwrap();
                (e.estimate - exact).abs() / e.std_err
            })
            .fold(0.0, f64::max);
        pass &= worst <= 4.0;
        details.push(format!("{backend:?} max|z|={worst:.2}"));
    }
    verdict(1, pass, started, details.join("; "));
}

#[test]
fn criterion_02_martingale_identity() {
    let started = Instant::now();
    let replicas = 10_000;
    let mut pass = true;
    let mut details = Vec::new();
    for t in [4.0, 8.0] {
        let s = sampler_1d(128, ScaleLadder::uniform(t, 0.5).unwrap(), Backend::Circulant, SupMode::Bridge);
        let totals = s.map_replicas(202, 0..replicas, |run| {
            [1.0, 5.0].map(|beta| measures::stopped_measures(&run, beta).unwrap().z.total().value())
        });
        for (k, beta) in [1.0, 5.0].into_iter().enumerate() {
            let est = analysis::mean_se(&totals.iter().map(|v| v[k]).collect::<Vec<_>>());
            pass &= est.within(beta, 3.0);
            details.push(format!("t={t} beta={beta}: {:.4}±{:.4} (z={:.2})", est.mean, est.std_err, est.z_score(beta)));
        }
    }
    verdict(2, pass, started, details.join("; "));
}

#[test]
fn criterion_03_derivative_mean_zero() {
    let started = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    let mut fractions = Vec::new();
    for t in [4.0, 8.0, 12.0] {
        let s = sampler_1d(256, single_layer(t), Backend::Circulant, SupMode::Boundary);
        let r = rooted_derivative_mean(&s, 303, 10_000).unwrap();
        pass &= r.rooted.within(0.0, 3.0);
        fractions.push(r.negative_fraction);
        details.push(format!(
            "t={t}: rooted {:.4}±{:.4}, plain {:.4}±{:.4}, negative {:.4}",
            r.rooted.mean, r.rooted.std_err, r.plain.mean, r.plain.std_err, r.negative_fraction
        ));
    }
    pass &= fractions.windows(2).all(|w| w[1] < w[0]);
    verdict(3, pass, started, details.join("; "));
}

#[test]
fn criterion_04_critical_vanishing() {
    let started = Instant::now();
    let replicas = 4_000;
    let medians: Vec<f64> = [4.0, 10.0]
        .iter()
        .map(|&t| {
            let s = sampler_1d(256, single_layer(t), Backend::Circulant, SupMode::Boundary);
            let totals = s.map_replicas(404, 0..replicas, |run| {
                measures::chaos_measure(&run, 2f64.sqrt()).unwrap().total().value()
            });
            analysis::median(&totals)
        })
        .collect();
    let field_ratio = medians[1] / medians[0];
    let cascade_medians: Vec<f64> = [8, 16]
        .iter()
        .map(|&depth| {
            let spec = CascadeSpec::critical(1, depth).unwrap();
            let totals: Vec<f64> = (0..replicas).map(|r| cascade::cascade_totals(spec, 405, r).standard).collect();
            analysis::median(&totals)
        })
        .collect();
    let cascade_ratio = cascade_medians[1] / cascade_medians[0];
    verdict(
        4,
        field_ratio < 0.2 && cascade_ratio < 0.3,
        started,
        format!("field median ratio t=10/t=4 = {field_ratio:.3} (need < 0.2); cascade ratio n=16/n=8 = {cascade_ratio:.3} (need < 0.3)"),
    );
}

#[test]
fn criterion_05_spectrum() {
    let started = Instant::now();
    let s = sampler_1d(1024, single_layer(10.0), Backend::Circulant, SupMode::Boundary);
    let ms = s.map_replicas(505, 0..500, |run| measures::chaos_measure(&run, 1.0).unwrap());
    let q = [0.25, 0.5, 1.0];
    let est = estimate_spectrum(&ms, &q).unwrap();
    let mut pass = est.scales_used.len() >= 4;
    let mut details = Vec::new();
    for (k, &qq) in q.iter().enumerate() {
        let exact = analysis::lognormal_spectrum(qq, 1.0, 1);
        pass &= (est.xi_hat[k] - exact).abs() <= 0.1;
        details.push(format!("q={qq}: {:.4}±{:.4} vs {exact:.4}", est.xi_hat[k], est.std_err[k]));
    }
    verdict(5, pass, started, details.join("; "));
}

#[test]
fn criterion_06_diffz_exact() {
    let started = Instant::now();
    let s = sampler_1d(256, ScaleLadder::uniform(8.0, 0.5).unwrap(), Backend::Circulant, SupMode::Bridge);
    let checks = s.map_replicas(606, 0..100, |run| {
        let pair = measures::stopped_measures(&run, 1.0).unwrap();
        let crit = measures::chaos_measure(&run, 2f64.sqrt()).unwrap();
        let alive = pair.survivors.iter().filter(|&&a| a).count();
        (measures::check_diffz(&pair, &crit), alive)
    });
    let mismatches: usize = checks.iter().map(|c| c.0.mismatches).sum();
    let cells: usize = checks.iter().map(|c| c.0.cells).sum();
    let alive: usize = checks.iter().map(|c| c.1).sum();
    let replicas_clean = checks.iter().filter(|c| c.0.mismatches == 0).count();
    verdict(
        6,
        mismatches == 0 && alive > 0 && alive < cells,
        started,
        format!("{replicas_clean}/100 replicas exact, {mismatches} mismatching cells of {cells}, {alive} survivors"),
    );
}

#[test]
fn criterion_07_stable_laplace() {
    let started = Instant::now();
    let s = sampler_1d(16, single_layer(2.0), Backend::Cholesky, SupMode::Boundary);
    let base = (0..)
        .map(|r| measures::derivative_measure(&s.run(707, r)))
        .find(|m| m.prefactors().iter().all(|&p| p > 0.0))
        .unwrap();
    let total = base.total().value();
    let mut pass = true;
    let mut details = Vec::new();
    for alpha in [0.5, 0.8] {
        let draws: Vec<f64> = (0..100_000u64)
            .map(|r| {
                let key = StreamKey::new(708, r, 0, Purpose::Subordination);
                let (m, clamped) = measures::stable_subordinate(&base, alpha, key).unwrap();
                assert_eq!(clamped, 0);
                m.total().value()
            })
            .collect();
        for q in [0.5, 1.0, 2.0] {
            let est = analysis::mean_se(&draws.iter().map(|n| (-q * n).exp()).collect::<Vec<_>>());
            let exact = (-(q as f64).powf(alpha) * total).exp();
            pass &= est.within(exact, 3.0);
            details.push(format!("a={alpha} q={q}: z={:.2}", est.z_score(exact)));
        }
    }
    verdict(7, pass, started, format!("M'(A)={total:.4}; {}", details.join("; ")));
}

#[test]
fn criterion_08_spine_bessel() {
    let started = Instant::now();
    let paths = |t: f64| sampler_1d(2, ScaleLadder::uniform(t, 0.1).unwrap(), Backend::Cholesky, SupMode::Boundary);
    let s8 = paths(8.0);
    let tilted = spine_bessel_test(&s8, 0, 2.0, SpineMode::Tilted, 808, 100_000, 100.0).unwrap();
    let control = spine_bessel_test(&s8, 0, 2.0, SpineMode::Unweighted, 809, 100_000, 100.0).unwrap();
    let control_10 = spine_bessel_test(&paths(10.0), 0, 1.0, SpineMode::Unweighted, 810, 10_000, 100.0).unwrap();
    let pass = !tilted.report.inconclusive
        && tilted.report.p_value > 0.01
        && control.report.p_value < 0.01
        && control_10.report.p_value < 0.01;
    verdict(
        8,
        pass,
        started,
        format!(
            "weighted p={:.4} (ESS {:.0}); unweighted p={:.2e}; unweighted t=10 beta=1 p={:.2e}",
            tilted.report.p_value,
            tilted.report.ess.unwrap_or(0.0),
            control.report.p_value,
            control_10.report.p_value
        ),
    );
}

#[test]
fn criterion_09_star_equation() {
    let started = Instant::now();
    let setup = |n| StarSetup {
        covariance: triangle(),
        grid: GridSpec::new(1, n, 1.0).unwrap(),
        backend: Backend::Circulant,
    };
    let null = null_uniformity(&setup(64), StarKind::Derivative, 4.0, 500, 200, 0.02, 909).unwrap();
    let exact = star_equation_test(
        &setup(256),
        StarKind::Derivative,
        RhsForm::Exact,
        &Region::All,
        2.0,
        10.0,
        2000,
        TestKind::KS2,
        910,
    )
    .unwrap();
    let limit = star_equation_test(
        &setup(256),
        StarKind::Derivative,
        RhsForm::Limit,
        &Region::All,
        2.0,
        10.0,
        2000,
        TestKind::KS2,
        910,
    )
    .unwrap();
    let pass = (1..=7).contains(&null.below) && exact.report.p_value > 0.01;
    verdict(
        9,
        pass,
        started,
        format!(
            "null: {}/200 below 0.02; eps=e^-2 t=10: p={:.4} (limit-form right side p={:.2e})",
            null.below, exact.report.p_value, limit.report.p_value
        ),
    );
}

#[test]
fn criterion_10_kahane() {
    let started = Instant::now();
    let spec = CascadeSpec::critical(1, 10).unwrap();
    let t = 10.0 * std::f64::consts::LN_2;
    let replicas = 2_000;
    let s = sampler_1d(1024, single_layer(t), Backend::Circulant, SupMode::Boundary);
    let cascades: Vec<_> = (0..replicas).map(|r| cascade::cascade_sample(spec, 1001, r).unwrap()).collect();
    let fields = s.map_replicas(1002, 0..replicas, |run| run);
    let r = cascade::embed_and_compare(&cascades, &fields, s.covariance(), 1003).unwrap();
    verdict(
        10,
        r.satisfied,
        started,
        format!(
            "C={:.4}; E F(cascade)={:.4}±{:.4}, E F(field)={:.4}±{:.4}, difference {:.4} (2 se = {:.4})",
            r.constant, r.dominating_mean, r.dominating_se, r.dominated_mean, r.dominated_se, r.difference, 2.0 * r.combined_se
        ),
    );
}

#[test]
fn criterion_11_figure_dynamic_range() {
    let started = Instant::now();
    let cov = StarCovariance::new(SeedKernel::spline(2, 1.0).unwrap());
    let grid = GridSpec::new(2, 256, 1.0).unwrap();
    let s = FieldSampler::<f64>::new(cov, grid, single_layer(12.0), Backend::Circulant, SupMode::Boundary).unwrap();
    let m = measures::derivative_measure(&s.run(1111, 0));
    let mut csv = Vec::new();
    measures::write_measure_csv(&m, &mut csv).unwrap();
    let table = measures::read_measure_csv(csv.as_slice()).unwrap();
    let spec = RenderSpec {
        colormap: Colormap::Viridis,
        scale: Scale::Log10,
    };
    let (ppm, report) = render_heatmap(&table, spec).unwrap();
    assert!(ppm.starts_with(b"P6\n"));
    verdict(
        11,
        report.dynamic_range() >= 1e6,
        started,
        format!(
            "256x256 t=12: dynamic range 10^{:.2}, {} nonpositive cells floored",
            report.decades, report.floored_cells
        ),
    );
}

#[test]
fn criterion_12_lambda_calibration() {
    let started = Instant::now();
    let t = 10.0;
    let s = sampler_1d(256, single_layer(t), Backend::Circulant, SupMode::Boundary);
    let lebesgue = s.map_replicas(1200, 0..100, |run| measures::chaos_measure(&run, 0.0).unwrap().total().value());
    let flat = calibrate_lambda(0.0, &lebesgue, 0.5).unwrap();
    let mut pass = (flat.lambda_n - std::f64::consts::LN_2).abs() < 1e-6;
    let gammas = [1.2, 1.3, 1.38];
    let mut details = vec![format!("gamma=0: lambda={:.9}", flat.lambda_n)];
    for (master, budget) in [(1201u64, 100_000u64), (1202, 200_000)] {
        let totals = s.map_replicas(master, 0..budget, |run| {
            gammas.map(|g| measures::chaos_measure(&run, g).unwrap().total().value())
        });
        let lambdas: Vec<f64> = (0..gammas.len())
            .map(|k| {
                let masses: Vec<f64> = totals.iter().map(|v| v[k]).collect();
                let r = calibrate_lambda(gammas[k], &masses, 0.5).unwrap();
                pass &= (0.48..=0.52).contains(&r.phi_hat);
                r.lambda_n
            })
            .collect();
        pass &= lambdas.windows(2).all(|w| w[1] > w[0]);
        details.push(format!("budget {budget}: lambda_n = {lambdas:.4?}"));
    }
    verdict(12, pass, started, details.join("; "));
}

fn gmc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gmc")).args(args).output().expect("gmc runs")
}

fn files_under(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

#[test]
fn criterion_13_replay_determinism() {
    let started = Instant::now();
    let root = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance_replay");
    let _ = std::fs::remove_dir_all(&root);
    std::fs::create_dir_all(&root).unwrap();
    let cfg = root.join("experiments.cfg");
    std::fs::write(
        &cfg,
        "run.replicas=40\nfield.cells=64\nfield.t_max=4\nfield.delta_t=0.5\n\
         experiments=covariance,martingale,derivative_mean,critical_vanishing,spectrum,diffz,subordination,spine,star,null_uniformity,kahane,calibrate,atoms,maxima,moments\n\
         analysis.samples=100\nanalysis.reruns=5\nanalysis.s=1\ncascade.depth=6\nanalysis.t_values=2,4\n",
    )
    .unwrap();
    let fig = root.join("figure.cfg");
    std::fs::write(&fig, "run.replicas=1\nfield.dimension=2\nfield.cells=64\nfield.t_max=6\nmeasure.kind=derivative\n").unwrap();
    let dir = |name: &str| root.join(name).display().to_string();
    let cfg_s = cfg.display().to_string();
    let fig_s = fig.display().to_string();
    let runs: Vec<(&str, Vec<String>)> = vec![
        ("analyze", vec!["--config".into(), cfg_s.clone(), "--seed".into(), "13".into(), "--out".into(), dir("analyze"), "analyze".into()]),
        ("sample", vec!["--config".into(), cfg_s.clone(), "--out".into(), dir("sample"), "sample".into()]),
        ("measure", vec!["--config".into(), fig_s.clone(), "--out".into(), dir("measure"), "measure".into()]),
        ("render", vec!["--out".into(), dir("render"), "render".into(), root.join("measure/measures/replica_00000.csv").display().to_string()]),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (name, args) in &runs {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = gmc(&args);
        pass &= first.status.success();
        let manifest = root.join(name).join("manifest.json");
        let replay_dir = root.join(format!("{name}_replay"));
        let again = gmc(&["--workers", "1", "--out", &replay_dir.display().to_string(), "replay", &manifest.display().to_string()]);
        pass &= again.status.success();
        let a = root.join(name);
        let files_a = files_under(&a);
        let files_b = files_under(&replay_dir);
        let identical = files_a == files_b
            && files_a.iter().all(|f| std::fs::read(a.join(f)).unwrap() == std::fs::read(replay_dir.join(f)).unwrap());
        pass &= identical;
        details.push(format!(
            "{name}: {} files {}",
            files_a.len(),
            if identical { "identical" } else { "DIFFER" }
        ));
        if !first.status.success() || !again.status.success() {
            details.push(String::from_utf8_lossy(&first.stderr).into_owned());
            details.push(String::from_utf8_lossy(&again.stderr).into_owned());
        }
    }
    verdict(13, pass, started, details.join("; "));
}
