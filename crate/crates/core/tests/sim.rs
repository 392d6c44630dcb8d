use std::f64::consts::PI;
use std::sync::OnceLock;

use dppcell::data::{preset_spec, preset_window};
use dppcell::metrics::{
    db_grid, fredholm_void, laplace_interference_fredholm, ppp_coverage, Association,
    InterferenceQuery, PathLossModel,
};
use dppcell::sim::*;
use dppcell::{Error, KernelModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LAMBDA: f64 = 0.4492;

fn houston_sim(reps: usize, seed: u64) -> Simulator {
    let cfg = SimConfig::model(
        preset_spec("houston-gauss").unwrap(),
        preset_window("houston-gauss").unwrap(),
        reps,
        seed,
    );
    Simulator::new(cfg).unwrap()
}

/// 1000 Houston Gauss patterns shared by the tests below.
fn pool() -> &'static [PointPattern] {
    static POOL: OnceLock<Vec<PointPattern>> = OnceLock::new();
    POOL.get_or_init(|| houston_sim(1000, 11).patterns().unwrap())
}

fn poisson_sim(lambda: f64, window: Window, reps: usize, seed: u64) -> Simulator {
    let spec = KernelModel::poisson(lambda).unwrap().spec();
    Simulator::new(SimConfig::model(spec, window, reps, seed)).unwrap()
}

fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (
        m,
        (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt(),
    )
}

/// Ratio estimate Σs/Σn with its standard error, batching by pattern.
fn ratio_estimate(batches: &[(f64, f64)]) -> (f64, f64) {
    let (s, n): (f64, f64) = batches
        .iter()
        .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let est = s / n;
    let j = batches.len() as f64;
    let nbar = n / j;
    let var = batches
        .iter()
        .map(|b| (b.0 - est * b.1).powi(2))
        .sum::<f64>()
        / (j * (j - 1.0) * nbar * nbar);
    (est, var.sqrt())
}

#[test]
fn houston_gauss_count_matches_the_dataset() {
    let counts: Vec<f64> = pool().iter().map(|p| p.len() as f64).collect();
    let (m, _) = mean_sd(&counts);
    assert!((m - 115.0).abs() <= 2.0, "mean count {m}");
    assert!(pool()
        .iter()
        .all(|p| p.points.iter().all(|q| p.window.contains(*q))));
}

#[test]
fn poisson_counts_are_poisson() {
    let sim = poisson_sim(LAMBDA, Window::rect(16.0, 16.0).unwrap(), 2000, 3);
    let counts: Vec<f64> = sim
        .patterns()
        .unwrap()
        .iter()
        .map(|p| p.len() as f64)
        .collect();
    let (m, sd) = mean_sd(&counts);
    assert!((m - 115.0).abs() < 1.5, "mean {m}");
    let ratio = sd * sd / m;
    assert!((0.9..=1.1).contains(&ratio), "var/mean {ratio}");
}

#[test]
fn unperturbed_hex_is_an_exact_lattice() {
    let w = Window::rect(40.0, 40.0).unwrap();
    let patterns = Simulator::new(SimConfig::hex(LAMBDA, 0.0, w, 20, 1))
        .unwrap()
        .patterns()
        .unwrap();
    // Single windows fluctuate with the random lattice offset.
    let mean = patterns.iter().map(|p| p.intensity()).sum::<f64>() / 20.0;
    assert!((mean / LAMBDA - 1.0).abs() < 0.02, "intensity {mean}");
    let d = 3f64.sqrt() * hex_cell_radius(LAMBDA);
    for p in patterns {
        let index = NeighborIndex::new(&p.points, p.window);
        for (i, q) in p.points.iter().enumerate() {
            if p.window.border_distance(*q) > 2.0 * d {
                let (nn, _) = index.nearest(*q, Some(i)).unwrap();
                assert!((nn - d).abs() < 1e-9, "nn {nn} vs spacing {d}");
            }
        }
    }
    assert!((hex_intensity(hex_cell_radius(LAMBDA)) - LAMBDA).abs() < 1e-12);
}

#[test]
fn single_base_station_has_infinite_sir() {
    let w = Window::rect(4.0, 4.0).unwrap();
    let p = PointPattern::new(w, vec![[1.0, 1.0]]).unwrap();
    let pl = PathLossModel::pure_power(4.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert_eq!(
        sir_sample(&p, w.center(), pl, &mut rng).unwrap(),
        f64::INFINITY
    );
    assert_eq!(
        conditional_coverage(&p, w.center(), pl, &[0.0, 30.0]).unwrap(),
        vec![1.0, 1.0]
    );
    let empty = PointPattern::new(w, vec![]).unwrap();
    assert!(sir_sample(&empty, w.center(), pl, &mut rng).is_err());
}

#[test]
fn poisson_coverage_matches_closed_form() {
    let sim = poisson_sim(LAMBDA, Window::rect(24.0, 24.0).unwrap(), 2000, 7);
    let pl = PathLossModel::pure_power(4.0).unwrap();
    let t = db_grid(-10.0, 2.0, 20.0).unwrap();
    let run = run_coverage(&sim, pl, &t).unwrap();
    for (k, tdb) in t.iter().enumerate() {
        let want = ppp_coverage(10f64.powf(tdb / 10.0), 4.0);
        assert!(
            (run.mean[k] - want).abs() < 0.02,
            "T={tdb}: {} vs {want}",
            run.mean[k]
        );
        assert!(run.lower[k] <= run.median[k] && run.median[k] <= run.upper[k]);
    }
    // Fading samples agree with the conditional mean.
    assert!((run.empirical[5] - run.mean[5]).abs() < 0.05);
}

#[test]
fn empty_patterns_are_redrawn() {
    // λ|W| = 0.5, so most first draws are empty.
    let sim = poisson_sim(0.5, Window::rect(1.0, 1.0).unwrap(), 50, 2);
    let pl = PathLossModel::pure_power(4.0).unwrap();
    let run = run_coverage(&sim, pl, &[0.0]).unwrap();
    assert!(run.resampled > 0);
    assert_eq!(run.sir.len(), 50);
    let (p, _, redraws) = (0..50)
        .map(|r| sim.sample_nonempty(r).unwrap())
        .max_by_key(|x| x.2)
        .unwrap();
    assert!(!p.is_empty() && redraws > 0);
}

#[test]
fn envelope_grid_mismatch_is_an_error() {
    let env = Envelope::min_max("k", vec![0.1, 0.2], &[vec![1.0, 2.0], vec![0.5, 3.0]]).unwrap();
    assert!(matches!(
        env.check(&[0.1, 0.3], &[1.0, 2.0]),
        Err(Error::GridMismatch(_))
    ));
    assert!(matches!(
        env.check(&[0.1], &[1.0]),
        Err(Error::GridMismatch(_))
    ));
    assert!(matches!(
        Envelope::min_max("k", vec![0.1], &[vec![1.0, 2.0]]),
        Err(Error::GridMismatch(_))
    ));
    assert!(env.check(&[0.1, 0.2], &[0.7, 2.5]).unwrap().passed);
}

#[test]
fn lattice_fails_the_poisson_envelope() {
    let w = Window::rect(16.0, 16.0).unwrap();
    let hex = Simulator::new(SimConfig::hex(LAMBDA, 0.0, w, 1, 4))
        .unwrap()
        .sample(0)
        .unwrap();
    let stat = EnvelopeStatistic::RipleyK {
        r_grid: db_grid(0.1, 0.1, 3.0).unwrap(),
    };
    let report = envelope_test(&hex, &poisson_sim(LAMBDA, w, 199, 9), &stat).unwrap();
    assert!(!report.passed);
    // A Poisson pattern of the same model mostly stays inside.
    let ppp = poisson_sim(LAMBDA, w, 1, 1234).sample(0).unwrap();
    let own = envelope_test(&ppp, &poisson_sim(LAMBDA, w, 199, 9), &stat).unwrap();
    assert!(own.exceedance_fraction < 0.2);
}

#[test]
fn central_point_covers_the_window() {
    let w = Window::rect(4.0, 4.0).unwrap();
    let p = PointPattern::new(w, vec![w.center()]).unwrap();
    let half_diag = 0.5 * (w.width().hypot(w.height()));
    let r = [0.5, half_diag, half_diag + 0.5];
    let opts = EstimatorOptions {
        grid: 32,
        border: Some(0.0),
    };
    let f = empirical_esf(&[p], &r, &opts).unwrap();
    assert!(f.value[0] < 1.0);
    assert_eq!(&f.value[1..], &[1.0, 1.0]);
}

#[test]
fn empirical_estimators_skip_empty_patterns() {
    let w = Window::rect(10.0, 10.0).unwrap();
    let full = poisson_sim(1.0, w, 1, 5).sample(0).unwrap();
    let empty = PointPattern::new(w, vec![]).unwrap();
    let r = db_grid(0.1, 0.1, 1.0).unwrap();
    let opts = EstimatorOptions::default();
    let both = [full.clone(), empty.clone()];
    assert_eq!(
        empirical_esf(&both, &r, &opts).unwrap().value,
        empirical_esf(std::slice::from_ref(&full), &r, &opts).unwrap().value
    );
    assert_eq!(
        empirical_nn(&both, &r, &opts).unwrap().value,
        empirical_nn(&[full], &r, &opts).unwrap().value
    );
    assert!(empirical_esf(&[empty], &r, &opts).is_err());
}

#[test]
fn void_probability_matches_simulation() {
    let model = KernelModel::from_spec(&preset_spec("houston-gauss").unwrap()).unwrap();
    let want = fredholm_void(&model, 0.5, false).unwrap();
    // 25 well-separated test disks per pattern, 400 patterns: 10^4 samples.
    let batches: Vec<(f64, f64)> = pool()[..400]
        .iter()
        .map(|p| {
            let index = NeighborIndex::new(&p.points, p.window);
            let mut empty = 0.0;
            for i in 0..5 {
                for j in 0..5 {
                    let c = [
                        p.window.x_min + 2.0 + 3.0 * i as f64,
                        p.window.y_min + 2.0 + 3.0 * j as f64,
                    ];
                    if index.nearest(c, None).is_none_or(|(d, _)| d > 0.5) {
                        empty += 1.0;
                    }
                }
            }
            (empty, 25.0)
        })
        .collect();
    let (est, se) = ratio_estimate(&batches);
    assert!((est - want).abs() < 3.0 * se, "{est} ± {se} vs {want}");
}

#[test]
fn laplace_matches_palm_rejection_simulation() {
    let model = KernelModel::from_spec(&preset_spec("houston-gauss").unwrap()).unwrap();
    let pl = PathLossModel::pure_power(4.0).unwrap();
    let (r0, s) = (0.5, 1.0);
    let q = InterferenceQuery::new(model, pl, 1.0, r0, Association::NearestBs).unwrap();
    let want = laplace_interference_fredholm(&q, &[s]).unwrap()[0];
    // Interferers beyond `reach` act through their mean-field Laplace factor.
    let reach = 5.0f64;
    let far = (-LAMBDA * PI * s.sqrt() * (PI / 2.0 - (reach * reach / s.sqrt()).atan())).exp();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let batches: Vec<(f64, f64)> = pool()[400..]
        .iter()
        .map(|p| {
            let index = NeighborIndex::new(&p.points, p.window);
            let (mut sum, mut n) = (0.0, 0.0);
            for (k, x0) in p.points.iter().enumerate() {
                let theta = rng.gen::<f64>() * std::f64::consts::TAU;
                let u = [x0[0] + r0 * theta.cos(), x0[1] + r0 * theta.sin()];
                if p.window.border_distance(u) < reach {
                    continue;
                }
                // x0 must be the nearest station to the user.
                if index.nearest(u, Some(k)).is_some_and(|(d, _)| d < r0) {
                    continue;
                }
                let prod: f64 = p
                    .points
                    .iter()
                    .enumerate()
                    .filter(|(i, x)| *i != k && (x[0] - u[0]).hypot(x[1] - u[1]) < reach)
                    .map(|(_, x)| 1.0 / (1.0 + s * pl.eval((x[0] - u[0]).hypot(x[1] - u[1]))))
                    .product();
                sum += prod * far;
                n += 1.0;
            }
            (sum, n)
        })
        .collect();
    let (est, se) = ratio_estimate(&batches);
    assert!((est - want).abs() < 3.0 * se, "{est} ± {se} vs {want}");
}
