use std::io::Write;

use dppcell::data::*;
use dppcell::kernel::{Family, KernelSpec};
use dppcell::metrics::{CurveKind, CurveTable};
use dppcell::sim::{PointPattern, Window};
use dppcell::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_pattern(n: usize, side: f64, seed: u64) -> PointPattern {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..n)
        .map(|_| [rng.gen::<f64>() * side, rng.gen::<f64>() * side])
        .collect();
    PointPattern::new(Window::rect(side, side).unwrap(), pts).unwrap()
}

fn read(text: &str, opts: &LoadOptions) -> dppcell::Result<Dataset> {
    read_pattern(text.as_bytes(), opts)
}

#[test]
fn round_trip_is_exact() {
    let p = random_pattern(115, 16.0, 1);
    let mut buf = Vec::new();
    write_pattern_to(&mut buf, &p).unwrap();
    let back = read(std::str::from_utf8(&buf).unwrap(), &LoadOptions::default()).unwrap();
    assert_eq!(back.pattern, p);
    assert!(back.rejected.is_empty() && back.duplicates == 0);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("houston.csv");
    write_pattern(&path, &p).unwrap();
    let ds = load_pattern(&path, &LoadOptions::default()).unwrap();
    assert_eq!(ds.pattern, p);
    assert_eq!(ds.name, "houston");
}

#[test]
fn dataset_intensities() {
    for (n, side, want) in [(115, 16.0, 0.4492), (184, 28.0, 0.2347)] {
        let p = random_pattern(n, side, 2);
        let mut buf = Vec::new();
        write_pattern_to(&mut buf, &p).unwrap();
        let ds = read(std::str::from_utf8(&buf).unwrap(), &LoadOptions::default()).unwrap();
        assert!(
            (estimate_intensity(&ds) - want).abs() < 1e-4,
            "{}",
            estimate_intensity(&ds)
        );
    }
}

#[test]
fn explicit_window_drops_and_reports_outside_points() {
    let text = "x_km,y_km\n1,1\n2,2\n20,1\n2,2\n3,-1\n";
    let w = Window::rect(10.0, 10.0).unwrap();
    let ds = read(text, &LoadOptions::with_window(w)).unwrap();
    assert_eq!(ds.pattern.points, vec![[1.0, 1.0], [2.0, 2.0]]);
    assert_eq!(ds.duplicates, 1);
    let lines: Vec<usize> = ds.rejected.iter().map(|r| r.line).collect();
    assert_eq!(lines, vec![4, 6]);
    assert_eq!(ds.warnings().len(), 3);
}

#[test]
fn bounding_box_and_custom_columns() {
    let text = "id,lon,lat\na,1.5,2\nb,3,4.5\nc,2,3\n";
    let opts = LoadOptions {
        window: WindowSpec::BoundingBox,
        x_column: "lon".into(),
        y_column: "lat".into(),
    };
    let ds = read(text, &opts).unwrap();
    assert_eq!(ds.pattern.window, Window::new(1.5, 3.0, 2.0, 4.5).unwrap());
    assert_eq!(ds.pattern.len(), 3);
    assert!(matches!(
        read(text, &LoadOptions::default()),
        Err(Error::Parse(_))
    ));
}

#[test]
fn malformed_inputs_are_errors() {
    let opts = LoadOptions::default();
    assert!(matches!(
        read("x_km,y_km\n1,abc\n", &opts),
        Err(Error::Parse(_))
    ));
    assert!(matches!(
        read("x_km,y_km\n1,NaN\n", &opts),
        Err(Error::Parse(_))
    ));
    assert!(matches!(read("x_km,y_km\n", &opts), Err(Error::Parse(_))));
    let w = Window::rect(1.0, 1.0).unwrap();
    assert!(matches!(
        read("x_km,y_km\n5,5\n", &LoadOptions::with_window(w)),
        Err(Error::Parse(_))
    ));
    assert!(load_pattern("/nonexistent/bs.csv", &opts).is_err());
}

#[test]
fn presets_resolve() {
    assert_eq!(PRESET_NAMES.len(), 6);
    for name in PRESET_NAMES {
        let m = preset(name).unwrap();
        let want = if name.starts_with("houston") {
            0.4492
        } else {
            0.2347
        };
        assert_eq!(m.lambda(), want);
        let w = preset_window(name).unwrap();
        assert!((want * w.area()).round() == if want > 0.3 { 115.0 } else { 184.0 });
    }
    assert!(matches!(
        preset("paris-gauss"),
        Err(Error::UnknownPreset(_))
    ));
    assert!(preset_window("nowhere").is_err());
}

#[test]
fn configs_parse_from_json_and_toml() {
    let json: KernelConfig =
        parse_config(r#"{"preset": "la-cauchy"}"#, ConfigFormat::Json).unwrap();
    assert_eq!(json.resolve().unwrap(), preset_spec("la-cauchy").unwrap());
    let toml: KernelConfig = parse_config(
        "family = \"gauss\"\nlambda = 0.5\nalpha = 0.7\n",
        ConfigFormat::Toml,
    )
    .unwrap();
    assert_eq!(
        toml.resolve().unwrap(),
        KernelSpec {
            family: Family::Gauss,
            lambda: 0.5,
            alpha: Some(0.7),
            nu: None
        }
    );
    let bad: KernelConfig = parse_config(r#"{"preset": "x"}"#, ConfigFormat::Json).unwrap();
    assert!(bad.resolve().is_err());
    assert!(matches!(
        parse_config::<KernelConfig>("{", ConfigFormat::Json),
        Err(Error::Config(_))
    ));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.toml");
    std::fs::File::create(&path)
        .unwrap()
        .write_all(b"preset = \"houston-gauss\"\n")
        .unwrap();
    let k: KernelConfig = load_config(&path).unwrap();
    assert_eq!(k.resolve().unwrap().family, Family::Gauss);
}

#[test]
fn curve_csv_layout() {
    let c = CurveTable::new("esf", "r", vec![0.0, 0.5], vec![0.0, 0.25], CurveKind::Cdf).unwrap();
    let mut buf = Vec::new();
    write_curve_csv_to(&mut buf, &c).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,value,raw_value,reliable_flag"));
    assert_eq!(lines.next(), Some("0,0,0,1"));
    assert_eq!(lines.next(), Some("0.5,0.25,0.25,1"));
}
