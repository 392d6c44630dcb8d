//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints exactly one PASS/FAIL line.

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use dppcell::data::{preset, preset_spec, preset_window};
use dppcell::kernel::{palm_kernel, Kernel};
use dppcell::metrics::*;
use dppcell::numerics::SeriesOptions;
use dppcell::sim::*;
use dppcell::KernelModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LAMBDA: f64 = 0.4492;

type Check<'a> = Box<dyn FnOnce() -> Outcome + 'a>;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn qmc(points: usize) -> SeriesOptions {
    SeriesOptions {
        qmc_points: points,
        ..Default::default()
    }
}

fn houston() -> KernelModel {
    preset("houston-gauss").unwrap()
}

fn pure4() -> PathLossModel {
    PathLossModel::pure_power(4.0).unwrap()
}

fn houston_sim(reps: usize, seed: u64) -> Simulator {
    let cfg = SimConfig::model(
        preset_spec("houston-gauss").unwrap(),
        preset_window("houston-gauss").unwrap(),
        reps,
        seed,
    );
    Simulator::new(cfg).unwrap()
}

fn ppp_sir(t: f64) -> f64 {
    1.0 / (1.0 + t.sqrt() * (PI / 2.0 - (1.0 / t.sqrt()).atan()))
}

fn ppp_nn(r: f64) -> f64 {
    1.0 - (-LAMBDA * PI * r * r).exp()
}

/// Largest |a − b| over the points where `mask` holds.
fn max_gap(a: &[f64], b: &[f64], mask: impl Fn(usize) -> bool) -> f64 {
    (0..a.len())
        .filter(|&i| mask(i))
        .map(|i| (a[i] - b[i]).abs())
        .fold(0.0, f64::max)
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn mu_presets() -> Outcome {
    let start = Instant::now();
    let want = [
        ("houston-gauss", 0.4999),
        ("houston-cauchy", 0.4365),
        ("houston-gengamma", 0.5905),
        ("la-gauss", 0.5004),
        ("la-cauchy", 0.4351),
        ("la-gengamma", 0.5479),
    ];
    let err = want
        .iter()
        .map(|(name, mu)| (preset(name).unwrap().repulsiveness() - mu).abs())
        .fold(0.0, f64::max);
    let t = start.elapsed();
    outcome(
        err <= 1e-3 && t < Duration::from_secs(1),
        format!("max |Δμ| = {err:.2e} (tol 1e-3), {}", secs(t)),
    )
}

fn poisson_family() -> Outcome {
    let start = Instant::now();
    let m = KernelModel::poisson(LAMBDA).unwrap();
    let r = db_grid(0.0, 0.05, 3.0).unwrap();
    let esf = empty_space_fn(&m, &r, &SeriesOptions::default()).unwrap();
    let want: Vec<f64> = r.iter().map(|&x| ppp_nn(x)).collect();
    let esf_err = max_gap(&esf.value, &want, |_| true);

    let mut lap_err: f64 = 0.0;
    for r0 in [0.3, 0.8, 1.5] {
        let q =
            InterferenceQuery::new(m.clone(), pure4(), 1.0, r0, Association::NearestBs).unwrap();
        for s in [0.1f64, 1.0, 5.0] {
            let want = (-LAMBDA * PI * s.sqrt() * (PI / 2.0 - (r0 * r0 / s.sqrt()).atan())).exp();
            lap_err = lap_err.max(
                (laplace_interference(&q, s, &SeriesOptions::default()).unwrap() - want).abs(),
            );
        }
    }

    let t = db_grid(-10.0, 1.0, 20.0).unwrap();
    let c = sir_ccdf(&m, pure4(), &t, &SirOptions::default()).unwrap();
    let want: Vec<f64> = t.iter().map(|&x| ppp_sir(db_to_linear(x))).collect();
    let sir_err = max_gap(&c.value, &want, |_| true);
    let el = start.elapsed();
    outcome(
        esf_err <= 1e-3 && lap_err <= 1e-3 && sir_err <= 0.02 && el < Duration::from_secs(300),
        format!(
            "ESF {esf_err:.1e} (1e-3), Laplace {lap_err:.1e} (1e-3), sir {sir_err:.1e} (0.02), {}",
            secs(el)
        ),
    )
}

/// Laplace-expansion determinant.
fn cofactor_det(a: &[f64], n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    (0..n)
        .map(|j| {
            let minor: Vec<f64> = (1..n)
                .flat_map(|r| (0..n).filter(move |&c| c != j).map(move |c| a[r * n + c]))
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * a[j] * cofactor_det(&minor, n - 1)
        })
        .sum()
}

fn gram(k: &dyn Kernel<f64>, pts: &[[f64; 2]]) -> Vec<f64> {
    pts.iter()
        .flat_map(|x| pts.iter().map(move |y| k.eval(*x, *y)))
        .collect()
}

fn palm_identity() -> Outcome {
    let families = [
        houston(),
        preset("houston-cauchy").unwrap(),
        preset("houston-gengamma").unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let model = &families[case % 3];
        let x0 = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let n = rng.gen_range(1..=5);
        // Points at least 0.4 apart keep both determinants well conditioned.
        let mut pts: Vec<[f64; 2]> = Vec::new();
        while pts.len() < n {
            let p = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let far = |q: &[f64; 2]| (p[0] - q[0]).hypot(p[1] - q[1]) > 0.4;
            if far(&x0) && pts.iter().all(far) {
                pts.push(p);
            }
        }
        let palm = palm_kernel(model, x0).unwrap();
        let lhs = cofactor_det(&gram(&palm, &pts), n);
        let mut all = vec![x0];
        all.extend(&pts);
        let rhs = cofactor_det(&gram(model, &all), n + 1) / model.eval(x0, x0);
        worst = worst.max(((lhs - rhs) / rhs).abs());
    }
    outcome(
        worst <= 1e-10,
        format!("max relative error {worst:.1e} over 100 configurations (tol 1e-10)"),
    )
}

struct Pool {
    patterns: Vec<PointPattern>,
    built: Duration,
}

fn gauss_vs_simulation(pool: &Pool, coverage: &CoverageRun, t_db: &[f64]) -> Outcome {
    let start = Instant::now();
    let m = houston();
    let r = db_grid(0.05, 0.05, 2.0).unwrap();
    let opts = qmc(1 << 15);
    let est = EstimatorOptions::default();
    let esf = empty_space_fn(&m, &r, &opts).unwrap();
    let nn = nearest_neighbor_fn(&m, &r, &opts).unwrap();
    let esf_sim = empirical_esf(&pool.patterns, &r, &est).unwrap();
    let nn_sim = empirical_nn(&pool.patterns, &r, &est).unwrap();
    let esf_err = max_gap(&esf.value, &esf_sim.value, |i| esf.value[i] <= 0.95);
    let nn_err = max_gap(&nn.value, &nn_sim.value, |i| nn.value[i] <= 0.95);

    let c = sir_ccdf(&m, pure4(), t_db, &SirOptions::default()).unwrap();
    let outside = (0..t_db.len())
        .filter(|&k| c.value[k] < coverage.lower[k] || c.value[k] > coverage.upper[k])
        .count();
    let el = start.elapsed() + pool.built;
    outcome(
        esf_err <= 0.02 && nn_err <= 0.02 && outside == 0 && el < Duration::from_secs(1800),
        format!(
            "ESF {esf_err:.3}, NN {nn_err:.3} (tol 0.02), sir outside 95% envelope at {outside}/{} T, {}",
            t_db.len(),
            secs(el)
        ),
    )
}

/// Mean conditional coverage over a 3 × 3 grid of users (1 km spacing)
/// around the window centre, averaged per pattern.
fn multi_user_coverage(pool: &Pool, t_db: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let per: Vec<Vec<f64>> = pool
        .patterns
        .iter()
        .map(|p| {
            let c = p.window.center();
            let mut acc = vec![0.0; t_db.len()];
            for i in -1..=1 {
                for j in -1..=1 {
                    let u = [c[0] + f64::from(i), c[1] + f64::from(j)];
                    for (a, v) in acc
                        .iter_mut()
                        .zip(conditional_coverage(p, u, pure4(), t_db).unwrap())
                    {
                        *a += v / 9.0;
                    }
                }
            }
            acc
        })
        .collect();
    let n = per.len() as f64;
    (0..t_db.len())
        .map(|k| {
            let mean = per.iter().map(|r| r[k]).sum::<f64>() / n;
            let var = per.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (mean, (var / n).sqrt())
        })
        .unzip()
}

fn diag_approximation(pool: &Pool, t_db: &[f64]) -> Outcome {
    let approx = sir_ccdf_diag_approx(&houston(), pure4(), t_db).unwrap();
    let (mean, se) = multi_user_coverage(pool, t_db);
    let high = |k: usize| t_db[k] >= 6.0;
    let err = max_gap(&approx.value, &mean, high);
    let se = (0..t_db.len())
        .filter(|&k| high(k))
        .map(|k| se[k])
        .fold(0.0, f64::max);
    outcome(
        err <= 0.03,
        format!("max |approx − sim mean| for T ≥ 6 dB = {err:.3} (tol 0.03; sim SE ≤ {se:.3})"),
    )
}

fn deficit_oracle(m: &KernelModel, pl: PathLossModel, r0: f64) -> f64 {
    let outer = r0 + 40.0 * m.alpha();
    let nth = 1024;
    let ring = |r: f64| -> f64 {
        (0..nth)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / nth as f64;
                m.radial((r * r + r0 * r0 - 2.0 * r * r0 * t.cos()).max(0.0).sqrt())
                    .powi(2)
            })
            .sum::<f64>()
            * 2.0
            * PI
            / nth as f64
    };
    // Composite Simpson in r, split where the integrand peaks (r0) or has a
    // kink (r = 1 for bounded path loss).
    let simpson = |a: f64, b: f64, n: usize| -> f64 {
        let h = (b - a) / n as f64;
        (0..=n)
            .map(|i| {
                let r = a + i as f64 * h;
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * ring(r) * pl.eval(r.max(1e-300)) * r
            })
            .sum::<f64>()
            * h
            / 3.0
    };
    let mut breaks = [0.0, r0, 1.0, outer];
    breaks.sort_by(f64::total_cmp);
    breaks
        .windows(2)
        .map(|w| simpson(w[0], w[1], 4000))
        .sum::<f64>()
        / m.lambda()
}

fn mean_interference() -> Outcome {
    let m = houston();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut closed: f64 = 0.0;
    let mut decomposition: f64 = 0.0;
    for _ in 0..10 {
        let r0 = rng.gen_range(0.0..3.0);
        let pl = PathLossModel::bounded(rng.gen_range(2.5..6.0)).unwrap();
        let q = InterferenceQuery::new(m.clone(), pl, 1.0, r0, Association::FixedBs).unwrap();
        let a = mean_interference_fixed_gauss(&q).unwrap();
        let b = mean_interference_fixed_quadrature(&q).unwrap();
        closed = closed.max(((a - b) / b).abs());
        let qp = InterferenceQuery::new(
            KernelModel::poisson(LAMBDA).unwrap(),
            pl,
            1.0,
            r0,
            Association::FixedBs,
        )
        .unwrap();
        let ppp = mean_interference_fixed(&qp).unwrap();
        decomposition = decomposition.max(((a + deficit_oracle(&m, pl, r0) - ppp) / ppp).abs());
    }
    let mut slope: f64 = 0.0;
    for _ in 0..5 {
        let r0 = rng.gen_range(0.3..2.0);
        let q =
            InterferenceQuery::new(m.clone(), pure4(), 1.0, r0, Association::NearestBs).unwrap();
        let mean = mean_interference_nearest_fredholm(&q).unwrap();
        let h = 1e-3;
        let l = laplace_interference_fredholm(&q, &[h, 2.0 * h, 3.0 * h]).unwrap();
        let (d1, d2) = ((l[1] - l[0]) / h, (l[2] - l[1]) / h);
        let ds = d1 - 1.5 * (d2 - d1);
        slope = slope.max(((-ds - mean) / mean).abs());
    }
    outcome(
        closed <= 1e-6 && decomposition <= 1e-6 && slope <= 1e-3,
        format!(
            "closed form {closed:.1e} (1e-6), decomposition {decomposition:.1e} (1e-6), \
             −L'(0) vs mean {slope:.1e} (1e-3)"
        ),
    )
}

fn ordering(t_db: &[f64]) -> Outcome {
    let m = houston();
    let dpp = sir_ccdf(&m, pure4(), t_db, &SirOptions::default()).unwrap();
    let hex = Simulator::new(SimConfig::hex(
        LAMBDA,
        0.5,
        Window::rect(16.0, 16.0).unwrap(),
        4000,
        17,
    ))
    .unwrap();
    let hex = run_coverage(&hex, pure4(), t_db).unwrap();
    let mut below_ppp = 0.0f64;
    let mut above_hex = 0.0f64;
    for (k, &tdb) in t_db.iter().enumerate() {
        below_ppp = below_ppp.max(ppp_sir(db_to_linear(tdb)) - dpp.value[k]);
        above_hex = above_hex.max(dpp.value[k] - hex.mean[k]);
    }
    let r = db_grid(0.1, 0.1, 3.0).unwrap();
    let k = ripley_k_analytic(&m, &r).unwrap();
    let k_ok = r.iter().zip(&k.value).all(|(x, v)| *v < PI * x * x);
    // The series for D stops converging beyond r ≈ 2, where D is near 1 anyway.
    let r = db_grid(0.1, 0.1, 2.0).unwrap();
    let d = nearest_neighbor_fn(&m, &r, &qmc(1 << 13)).unwrap();
    let d_gap = r
        .iter()
        .zip(&d.value)
        .map(|(x, v)| v - ppp_nn(*x))
        .fold(f64::MIN, f64::max);
    outcome(
        below_ppp <= 0.0 && above_hex <= 0.02 && k_ok && d_gap <= 0.02,
        format!(
            "max(PPP − DPP) {below_ppp:.3} (≤ 0), max(DPP − hex) {above_hex:.3} (≤ 0.02), \
             K < πr²: {k_ok}, max(D − F_PPP) {d_gap:.3} (≤ 0.02)"
        ),
    )
}

fn envelope_self_test(pool: &Pool) -> Outcome {
    let stat = EnvelopeStatistic::RipleyK {
        r_grid: db_grid(0.1, 0.1, 3.0).unwrap(),
    };
    let env = Envelope::from_patterns(&pool.patterns, &stat).unwrap();
    let fresh = houston_sim(50, 4242);
    let passed = (0..50)
        .filter(|&i| {
            env.check_pattern(&fresh.sample(i).unwrap(), &stat)
                .unwrap()
                .passed
        })
        .count();
    outcome(
        passed >= 40,
        format!("{passed}/50 patterns inside the 1000-replication K envelope (need 40)"),
    )
}

fn dppcell(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_dppcell"))
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn cli_reproducible() -> Outcome {
    let dir = std::env::temp_dir().join(format!("dppcell-acceptance-{}", std::process::id()));
    let out = |n: &str| dir.join(n).to_string_lossy().into_owned();
    let first = dppcell(&[
        "coverage",
        "--preset",
        "houston-gauss",
        "--reps",
        "50",
        "--tgrid",
        "-10:2:20",
        "--out",
        &out("a"),
    ]);
    let manifest = out("a/coverage.manifest.json");
    let replays = dppcell(&["coverage", "--config", &manifest, "--out", &out("b")])
        && dppcell(&["coverage", "--config", &manifest, "--out", &out("c")]);
    let read = |n: &str| std::fs::read(Path::new(&out(n)).join("coverage.csv")).ok();
    let same =
        first && replays && read("a").is_some() && read("a") == read("b") && read("b") == read("c");
    let _ = std::fs::remove_dir_all(&dir);
    outcome(
        same,
        format!("coverage.csv identical across original and two manifest replays: {same}"),
    )
}

fn main() -> ExitCode {
    let t_db = db_grid(-10.0, 1.0, 20.0).unwrap();
    let start = Instant::now();
    let patterns = houston_sim(1000, 2015).patterns().unwrap();
    let pool = Pool {
        patterns,
        built: start.elapsed(),
    };
    let coverage = coverage_from_patterns(&pool.patterns, pure4(), &t_db).unwrap();

    let mut criteria: Vec<(&str, Check)> = vec![
        ("repulsiveness of the presets", Box::new(mu_presets)),
        ("Poisson special case", Box::new(poisson_family)),
        ("Palm kernel identity", Box::new(palm_identity)),
        (
            "Gauss Houston vs simulation",
            Box::new(|| gauss_vs_simulation(&pool, &coverage, &t_db)),
        ),
        (
            "diagonal approximation",
            Box::new(|| diag_approximation(&pool, &t_db)),
        ),
        ("mean interference", Box::new(mean_interference)),
        ("PPP / DPP / lattice ordering", Box::new(|| ordering(&t_db))),
        (
            "K envelope self-consistency",
            Box::new(|| envelope_self_test(&pool)),
        ),
        ("CLI reproducibility", Box::new(cli_reproducible)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.drain(..).enumerate() {
        let o = check();
        failed += usize::from(!o.passed);
        println!(
            "criterion {}: {} — {name}: {}",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
