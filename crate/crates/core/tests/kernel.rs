use dppcell::data::{preset, preset_spec, PRESET_NAMES};
use dppcell::kernel::{existence_check, palm_kernel, Family, Kernel, KernelModel};
use dppcell::Error;
use proptest::prelude::*;

type Model = KernelModel<f64>;

/// Laplace-expansion determinant, used as an independent oracle.
fn cofactor_det(a: &[f64], n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
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

fn gram(k: &dyn Kernel<f64>, pts: &[[f64; 2]]) -> Vec<f64> {
    let n = pts.len();
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] = k.eval(pts[i], pts[j]);
        }
    }
    g
}

fn family_model(f: u8) -> Model {
    match f % 3 {
        0 => Model::gauss(0.4492, 0.8417).unwrap(),
        1 => Model::cauchy(0.4492, 1.558, 3.424).unwrap(),
        _ => Model::gengamma(0.4492, 2.539, 2.63).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn palm_determinants_are_schur_complements(
        family in 0u8..3,
        x0 in prop::array::uniform2(-2.0f64..2.0),
        raw in prop::collection::vec(prop::array::uniform2(-3.0f64..3.0), 1..=5),
    ) {
        let model = family_model(family);
        // Keep configurations well separated so both sides are well conditioned.
        let mut pts: Vec<[f64; 2]> = Vec::new();
        for p in raw {
            let far = |q: &[f64; 2]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt() > 0.4;
            if far(&x0) && pts.iter().all(far) {
                pts.push(p);
            }
        }
        let n = pts.len();
        let palm = palm_kernel(&model, x0).unwrap();
        let lhs = cofactor_det(&gram(&palm, &pts), n);
        let mut all = vec![x0];
        all.extend(&pts);
        let rhs = cofactor_det(&gram(&model, &all), n + 1) / model.eval(x0, x0);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs(), "{} vs {}", lhs, rhs);
    }
}

#[test]
fn poisson_palm_determinant_is_a_power_of_lambda() {
    let m = Model::poisson(0.4492).unwrap();
    let palm = palm_kernel(&m, [0.1, 0.2]).unwrap();
    let pts = [[1.0, 0.0], [0.0, 1.0], [2.0, 2.0]];
    let d = cofactor_det(&gram(&palm, &pts), 3);
    assert!((d - 0.4492f64.powi(3)).abs() < 1e-15);
}

#[test]
fn repulsiveness_of_presets() {
    let want = [0.4999, 0.4365, 0.5905, 0.5004, 0.4351, 0.5479];
    let names = [
        "houston-gauss",
        "houston-cauchy",
        "houston-gengamma",
        "la-gauss",
        "la-cauchy",
        "la-gengamma",
    ];
    for (name, mu) in names.iter().zip(want) {
        let got = preset(name).unwrap().repulsiveness();
        assert!((got - mu).abs() < 1e-3, "{name}: {got} vs {mu}");
    }
    assert_eq!(Model::poisson(1.0).unwrap().repulsiveness(), 0.0);
}

#[test]
fn all_presets_exist_with_maximum_at_the_origin() {
    for name in PRESET_NAMES {
        let r = preset_spec(name).unwrap().existence_check().unwrap();
        assert!(r.passes, "{name}");
        assert!(!r.off_origin, "{name}");
    }
}

#[test]
fn nonexistent_kernels_are_rejected() {
    // Gauss: φ(0) = λπα² must not exceed 1.
    assert!(matches!(
        Model::gauss(1.0, 1.0),
        Err(Error::Existence { .. })
    ));
    assert!(matches!(
        Model::cauchy(2.0, 1.558, 3.424),
        Err(Error::Existence { .. })
    ));
    assert!(matches!(
        Model::gengamma(2.0, 2.539, 2.63),
        Err(Error::Existence { .. })
    ));
    let r = existence_check(Family::Gauss, 1.0, 1.0, 0.0).unwrap();
    assert!(!r.passes);
    assert!((r.lambda_max.unwrap() - 1.0 / std::f64::consts::PI).abs() < 1e-12);
    assert!(Model::gauss(-1.0, 1.0).is_err());
    assert!(Model::cauchy(0.1, 1.0, 0.0).is_err());
}

/// φ(ρ) as a two-dimensional Riemann sum of K0 against cos(2π x ρ); for a
/// smooth, fast-decaying K0 the trapezoid sum converges spectrally.
fn dft_spectrum(m: &Model, rho: f64, half_width: f64, h: f64) -> f64 {
    let n = (half_width / h) as i64;
    // K0 depends on |x|, so sum over y once per x.
    let mut total = 0.0;
    for i in -n..=n {
        let x = i as f64 * h;
        let mut col = 0.0;
        for j in -n..=n {
            let y = j as f64 * h;
            col += m.radial((x * x + y * y).sqrt());
        }
        total += col * (2.0 * std::f64::consts::PI * x * rho).cos();
    }
    total * h * h
}

#[test]
fn cauchy_spectrum_matches_discrete_fourier_oracle() {
    let m = Model::cauchy(0.4492, 1.558, 3.424).unwrap();
    for rho in [0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5] {
        let want = dft_spectrum(&m, rho, 60.0, 0.05);
        let got = m.spectral_radial(rho).unwrap();
        assert!(
            ((got - want) / want).abs() < 1e-6,
            "ρ={rho}: {got} vs {want}"
        );
    }
}

#[test]
fn gauss_spectrum_closed_form() {
    let m = Model::gauss(0.4492, 0.8417).unwrap();
    let a = 0.8417f64;
    for rho in [0.0, 0.2, 0.5] {
        let want = 0.4492
            * std::f64::consts::PI
            * a
            * a
            * (-(std::f64::consts::PI * a * rho).powi(2)).exp();
        assert!((m.spectral_radial(rho).unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn gengamma_covariance_is_smooth_and_positive_definite() {
    let m = Model::gengamma(0.4492, 2.539, 2.63).unwrap();
    assert!((m.radial(0.0) - 0.4492).abs() < 1e-9);
    // Values across the end of the tabulated range join up.
    let edge = 10.0 * 2.539;
    let (a, b) = (m.radial(edge - 1e-6), m.radial(edge + 1e-6));
    assert!((a - b).abs() < 1e-6 * 0.4492);
    let pts: Vec<[f64; 2]> = (0..5)
        .map(|i| [i as f64 * 0.7, (i * i) as f64 * 0.2])
        .collect();
    assert!(cofactor_det(&gram(&m, &pts), 5) > 0.0);
}
