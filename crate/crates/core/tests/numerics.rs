use dppcell::kernel::Family;
use dppcell::numerics::*;
use dppcell::{Error, KernelModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

// ---- Sobol ----

#[test]
fn sobol_skips_the_origin() {
    let pts = sobol_points(4, 3).unwrap();
    assert_eq!(pts[0], vec![0.5; 4]);
    assert_eq!(&pts[1][..2], &[0.75, 0.25]);
    assert_eq!(&pts[2][..2], &[0.25, 0.75]);
}

#[test]
fn sobol_blocks_are_stratified() {
    // Indices 2^m .. 2^(m+1) form a digital net: every one-dimensional
    // projection hits each of the 2^m dyadic cells exactly once, and the
    // first two coordinates form a (0, m, 2)-net.
    let m = 10;
    let n = 1usize << m;
    for d in 1..=4 {
        let mut s = Sobol::new(d).unwrap();
        s.seek(n as u64);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| s.next_point()).collect();
        for k in 0..d {
            let mut hit = vec![0; n];
            for p in &pts {
                hit[(p[k] * n as f64) as usize] += 1;
            }
            assert!(hit.iter().all(|&h| h == 1), "dim {k} of {d}");
        }
        if d >= 2 {
            for a in 0..=m {
                let (na, nb) = (1usize << a, 1usize << (m - a));
                let mut hit = vec![0; n];
                for p in &pts {
                    hit[(p[0] * na as f64) as usize * nb + (p[1] * nb as f64) as usize] += 1;
                }
                assert!(hit.iter().all(|&h| h == 1), "2^{a} x 2^{} boxes", m - a);
            }
        }
    }
}

#[test]
fn sobol_dimension_limit_is_a_config_error() {
    assert!(Sobol::new(64).is_ok());
    assert!(matches!(Sobol::new(65), Err(Error::Config(_))));
    assert!(matches!(Sobol::new(0), Err(Error::Config(_))));
}

// ---- determinants ----

fn cofactor_det(a: &[f64], n: usize) -> f64 {
    if n == 1 {
        return a[0];
    }
    let mut total = 0.0;
    for j in 0..n {
        let minor: Vec<f64> = (1..n)
            .flat_map(|r| (0..n).filter(move |&c| c != j).map(move |c| (r, c)))
            .map(|(r, c)| a[r * n + c])
            .collect();
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * a[j] * cofactor_det(&minor, n - 1);
    }
    total
}

#[test]
fn psd_det_matches_cofactor_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let n = rng.gen_range(1..=5);
        let k = rng.gen_range(1..=n + 2);
        // Gram matrix B Bᵀ with B n x k: PSD, possibly singular.
        let b: Vec<f64> = (0..n * k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..k).map(|l| b[i * k + l] * b[j * k + l]).sum();
            }
        }
        let want = cofactor_det(&a, n);
        let got = psd_det(&a, n).unwrap();
        let scale = (0..n).map(|i| a[i * n + i]).product::<f64>();
        assert!(
            (got - want).abs() <= 1e-10 * want.abs() + 1e-14 * scale,
            "n={n}: {got} vs {want}"
        );
    }
}

// ---- special functions ----

/// Power series Σ (z²/4)^k / (k!)², summed until negligible.
fn i0_series(z: f64) -> f64 {
    let q = z * z / 4.0;
    let (mut term, mut sum, mut k) = (1.0f64, 1.0f64, 1.0f64);
    loop {
        term *= q / (k * k);
        sum += term;
        if term < sum * 1e-18 {
            return sum;
        }
        k += 1.0;
    }
}

#[test]
fn bessel_i0_matches_power_series() {
    for i in 0..=300 {
        let z = i as f64 * 0.1;
        let (got, want) = (bessel_i0(z), i0_series(z));
        assert!(
            ((got - want) / want).abs() <= 1e-12,
            "z={z}: {got} vs {want}"
        );
    }
    let s = bessel_i0_scaled(50.0);
    assert!(s > 0.0 && s < 1.0);
    assert!((s - i0_series(50.0) * (-50.0f64).exp()).abs() / s < 1e-12);
}

// ---- series evaluator ----

fn gauss_rule(lambda: f64, alpha: f64) -> DeterminantRule {
    DeterminantRule::Kernel(Arc::new(KernelModel::gauss(lambda, alpha).unwrap()))
}

fn opts(qmc: usize) -> SeriesOptions {
    SeriesOptions {
        qmc_points: qmc,
        ..Default::default()
    }
}

#[test]
fn zero_weight_gives_one() {
    let job = SeriesJob {
        rule: gauss_rule(0.4492, 0.8417),
        weight: RadialWeight::new(Domain::Disk { radius: 2.0 }, |_| 0.0, &[]).unwrap(),
        leading: None,
        options: opts(1024),
    };
    let r = eval_determinantal_series(&job).unwrap();
    assert_eq!(r.value, 1.0);
    assert_eq!(r.orders_used, 0);
}

#[test]
fn terms_respect_the_hadamard_bound() {
    let job = SeriesJob {
        rule: gauss_rule(0.4492, 0.8417),
        weight: RadialWeight::disk(1.5).unwrap(),
        leading: None,
        options: opts(4096),
    };
    let r = eval_determinantal_series(&job).unwrap();
    let c = r.hadamard_constant;
    assert!((c - 0.4492 * std::f64::consts::PI * 2.25).abs() < 1e-9);
    let mut bound = 1.0;
    for (n, t) in r.per_order_terms.iter().enumerate() {
        if n > 0 {
            bound *= c / n as f64;
        }
        assert!(
            t.abs() <= bound * (1.0 + 1e-12),
            "order {n}: |{t}| > {bound}"
        );
    }
}

#[test]
fn qmc_budget_must_be_a_power_of_two() {
    let job = SeriesJob {
        rule: gauss_rule(0.4492, 0.8417),
        weight: RadialWeight::disk(1.0).unwrap(),
        leading: None,
        options: opts(1000),
    };
    assert!(matches!(
        eval_determinantal_series(&job),
        Err(Error::Config(_))
    ));
}

#[test]
fn poisson_rule_is_exact() {
    let lambda = 0.4492;
    for r in [0.3, 1.0, 1.5] {
        let job = SeriesJob {
            rule: DeterminantRule::Poisson {
                lambda,
                anchored: false,
            },
            weight: RadialWeight::disk(r).unwrap(),
            leading: None,
            options: SeriesOptions {
                tail_tol: 1e-10,
                n_max: 30,
                ..Default::default()
            },
        };
        let v = eval_determinantal_series(&job).unwrap().value;
        assert!((v - (-lambda * std::f64::consts::PI * r * r).exp()).abs() < 1e-9);
    }
}

#[test]
fn fredholm_and_series_void_probabilities_agree() {
    let m = KernelModel::gauss(0.4492, 0.8417).unwrap();
    for r in [0.5, 0.8] {
        let job = SeriesJob {
            rule: gauss_rule(0.4492, 0.8417),
            weight: RadialWeight::disk(r).unwrap(),
            leading: None,
            options: SeriesOptions {
                qmc_points: 1 << 15,
                tail_tol: 1e-6,
                n_max: 30,
            },
        };
        let s = eval_determinantal_series(&job).unwrap().value;
        let f = dppcell::metrics::fredholm_void(&m, r, false).unwrap();
        assert!((s - f).abs() < 2e-3, "r={r}: series {s} vs determinant {f}");
    }
}

#[test]
fn generic_kernel_paths_agree_in_f32() {
    let k64 =
        dppcell::kernel::KernelModel::<f64>::new(Family::Cauchy, 0.4492, 1.558, 3.424).unwrap();
    let k32 =
        dppcell::kernel::KernelModel::<f32>::new(Family::Cauchy, 0.4492, 1.558, 3.424).unwrap();
    for r in [0.0, 0.5, 1.0, 3.0] {
        let a = k64.radial(r);
        let b = k32.radial(r as f32) as f64;
        assert!((a - b).abs() < 1e-6 * a.abs().max(1e-3));
    }
    assert!((k64.repulsiveness() - k32.repulsiveness() as f64).abs() < 1e-4);
}
