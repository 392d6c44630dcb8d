use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use dppcell::data::{
    build_timestamp, estimate_intensity, load_pattern, preset_spec, preset_window, write_curve_csv,
    write_json, write_pattern, LoadOptions, RunManifest, PRESET_NAMES,
};
use dppcell::kernel::KernelSpec;
use dppcell::metrics::{
    empty_space_fn, laplace_interference, laplace_interference_curve,
    laplace_interference_fredholm, mean_interference_fixed, mean_interference_nearest,
    mean_interference_nearest_fredholm, nearest_neighbor_fn, ripley_k_analytic, sir_ccdf,
    sir_ccdf_diag_approx, Association, CurveKind, CurveTable, InterferenceQuery, SirMethod,
};
use dppcell::sim::{envelope_test, run_coverage, EnvelopeStatistic, SimConfig, Simulator, Window};
use dppcell::{Error, KernelModel, Result};
use serde::Serialize;

use crate::args::*;
use crate::config::*;

const DEFAULT_OUT: &str = "out";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Some points did not converge; partial outputs were written.
    NonConvergence,
}

pub struct Ctx {
    pub subcommand: &'static str,
    pub global: GlobalArgs,
    pub base: Base,
    pub threads: usize,
    outputs: Vec<PathBuf>,
}

impl Ctx {
    pub fn new(subcommand: &'static str, global: GlobalArgs, base: Base, threads: usize) -> Self {
        Self {
            subcommand,
            global,
            base,
            threads,
            outputs: Vec::new(),
        }
    }

    /// Seed from the flag, the base config, or the default (announced).
    fn seed(&self) -> u64 {
        match self.global.seed.or(self.base.seed) {
            Some(s) => s,
            None => {
                eprintln!("seed: {DEFAULT_SEED} (default)");
                DEFAULT_SEED
            }
        }
    }

    fn out_dir(&self, required: bool) -> Result<Option<PathBuf>> {
        let dir = match (&self.global.out, required) {
            (Some(d), _) => d.clone(),
            (None, true) => PathBuf::from(DEFAULT_OUT),
            (None, false) => return Ok(None),
        };
        fs::create_dir_all(&dir)?;
        Ok(Some(dir))
    }

    fn path(&mut self, dir: &Path, name: &str) -> PathBuf {
        let p = dir.join(name);
        self.outputs.push(p.clone());
        p
    }

    fn stem(&self) -> String {
        self.subcommand.replace('-', "_")
    }

    fn write_curve(&mut self, curve: &CurveTable) -> Result<()> {
        let dir = self.out_dir(true)?.expect("required");
        let stem = self.stem();
        write_curve_csv(self.path(&dir, &format!("{stem}.csv")), curve)?;
        write_json(self.path(&dir, &format!("{stem}.json")), curve)?;
        Ok(())
    }

    fn manifest(
        &mut self,
        config: &impl Serialize,
        seed: Option<u64>,
        status: Status,
    ) -> Result<()> {
        let Some(dir) = self.out_dir(!self.outputs.is_empty())? else {
            return Ok(());
        };
        let path = dir.join(format!("{}.manifest.json", self.stem()));
        let m = RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: self.subcommand.into(),
            config: serde_json::to_value(config)?,
            seed,
            threads: self.threads,
            outputs: self
                .outputs
                .iter()
                .map(|p| p.display().to_string())
                .collect(),
            created_unix: build_timestamp(),
            status: match status {
                Status::Ok => "ok".into(),
                Status::NonConvergence => "non_convergence".into(),
            },
        };
        write_json(&path, &m)?;
        for p in &self.outputs {
            log::info!("wrote {}", p.display());
        }
        Ok(())
    }
}

/// A curve, or the partial curve of a non-converged evaluation.
fn curve_or_partial(res: Result<CurveTable>) -> Result<(CurveTable, Status)> {
    match res {
        Ok(c) => Ok((c, Status::Ok)),
        Err(Error::CurveNonConvergence { points, curve }) => {
            eprintln!("warning: {points} point(s) did not converge; partial curve written");
            Ok((*curve, Status::NonConvergence))
        }
        Err(e) => Err(e),
    }
}

/// Evaluates `f` on `xs`, dropping points that do not converge.
fn pointwise(
    metric: &str,
    label: &str,
    xs: &[f64],
    kind: CurveKind,
    f: impl Fn(f64) -> Result<f64>,
) -> Result<(CurveTable, Status)> {
    let (mut ax, mut vals, mut failed) = (Vec::new(), Vec::new(), Vec::new());
    for &x in xs {
        match f(x) {
            Ok(v) => {
                ax.push(x);
                vals.push(v);
            }
            Err(e) if e.is_non_convergence() => failed.push(x),
            Err(e) => return Err(e),
        }
    }
    let mut curve = CurveTable::new(metric, label, ax, vals, kind)?;
    if failed.is_empty() {
        return Ok((curve, Status::Ok));
    }
    if curve.is_empty() {
        return Err(Error::CurveNonConvergence {
            points: failed.len(),
            curve: Box::new(curve),
        });
    }
    eprintln!(
        "warning: {} point(s) did not converge and were omitted",
        failed.len()
    );
    curve
        .meta
        .notes
        .push(format!("not converged at {label} = {failed:?}"));
    Ok((curve, Status::NonConvergence))
}

fn model_of(spec: &KernelSpec) -> Result<KernelModel> {
    KernelModel::from_spec(spec)
}

fn sim_config(
    kernel: &KernelSpec,
    hex_eta: Option<f64>,
    window: Window,
    reps: usize,
    seed: u64,
) -> SimConfig {
    match hex_eta {
        Some(eta) => SimConfig::hex(kernel.lambda, eta, window, reps, seed),
        None => SimConfig::model(*kernel, window, reps, seed),
    }
}

#[derive(Clone, Copy)]
pub enum Radial {
    Esf,
    Nnf,
    Kfn,
}

pub fn radial(ctx: &mut Ctx, a: &RadialArgs, which: Radial) -> Result<Status> {
    let mut b = Builder::new(&ctx.base);
    b.kernel(&a.model, false)?;
    b.series("series", &a.series)?;
    b.set("rmax", a.rmax).set("rstep", a.rstep);
    let cfg: RadialConfig = b.build()?;
    let model = model_of(&cfg.kernel)?;
    let grid = parse_grid(&format!("0:{}:{}", cfg.rstep, cfg.rmax))?;
    let res = match which {
        Radial::Esf => empty_space_fn(&model, &grid, &cfg.series),
        Radial::Nnf => nearest_neighbor_fn(&model, &grid, &cfg.series),
        Radial::Kfn => ripley_k_analytic(&model, &grid),
    };
    let (curve, status) = curve_or_partial(res)?;
    ctx.write_curve(&curve)?;
    ctx.manifest(&cfg, None, status)?;
    Ok(status)
}

fn association(s: &str) -> Result<Association> {
    serde_json::from_value(serde_json::Value::String(
        s.to_ascii_lowercase().replace('-', "_"),
    ))
    .map_err(|_| Error::Config(format!("unknown association '{s}' (fixed_bs | nearest_bs)")))
}

pub fn mean_interference(ctx: &mut Ctx, a: &MeanInterferenceArgs) -> Result<Status> {
    let mut b = Builder::new(&ctx.base);
    b.kernel(&a.model, false)?;
    b.series("series", &a.series)?;
    b.pathloss(&a.pathloss, bounded_4())?;
    b.method(a.method.as_deref())?;
    b.set("r0", a.r0.as_ref())
        .set("association", a.association.as_ref())
        .set("power", a.power);
    let cfg: MeanInterferenceConfig = b.build()?;
    let model = model_of(&cfg.kernel)?;
    let assoc = association(&cfg.association)?;
    let grid = parse_grid(&cfg.r0)?;
    let (curve, status) = pointwise("mean_interference", "r0", &grid, CurveKind::Plain, |r0| {
        let q = InterferenceQuery::new(model.clone(), cfg.pathloss, cfg.power, r0, assoc)?;
        match assoc {
            Association::FixedBs => mean_interference_fixed(&q),
            Association::NearestBs => match cfg.method {
                SirMethod::Fredholm => mean_interference_nearest_fredholm(&q),
                SirMethod::Series => mean_interference_nearest(&q, &cfg.series),
            },
        }
    })?;
    ctx.write_curve(&curve)?;
    ctx.manifest(&cfg, None, status)?;
    Ok(status)
}

pub fn laplace(ctx: &mut Ctx, a: &LaplaceArgs) -> Result<Status> {
    let mut b = Builder::new(&ctx.base);
    b.kernel(&a.model, false)?;
    b.series("series", &a.series)?;
    b.pathloss(&a.pathloss, pure_power_4())?;
    b.method(a.method.as_deref())?;
    b.set("r0", a.r0)
        .set("sgrid", a.sgrid.as_ref())
        .set("power", a.power);
    let cfg: LaplaceConfig = b.build()?;
    let q = InterferenceQuery::new(
        model_of(&cfg.kernel)?,
        cfg.pathloss,
        cfg.power,
        cfg.r0,
        Association::NearestBs,
    )?;
    let grid = parse_grid(&cfg.sgrid)?;
    let values = match cfg.method {
        SirMethod::Fredholm => laplace_interference_fredholm(&q, &grid),
        SirMethod::Series => laplace_interference_curve(&q, &grid, &cfg.series),
    };
    let (curve, status) = match values {
        Ok(v) => (
            CurveTable::new("laplace", "s", grid, v, CurveKind::Probability)?,
            Status::Ok,
        ),
        Err(e) if e.is_non_convergence() => {
            pointwise("laplace", "s", &grid, CurveKind::Probability, |s| {
                laplace_interference(&q, s, &cfg.series)
            })?
        }
        Err(e) => return Err(e),
    };
    ctx.write_curve(&curve)?;
    ctx.manifest(&cfg, None, status)?;
    Ok(status)
}

pub fn sir(ctx: &mut Ctx, a: &SirArgs) -> Result<Status> {
    let mut b = Builder::new(&ctx.base);
    b.kernel(&a.model, false)?;
    b.pathloss(&a.pathloss, pure_power_4())?;
    b.sir_options(&a.series, a.method.as_deref(), a.r0_nodes)?;
    b.set("tgrid", a.tgrid.as_ref());
    let cfg: SirConfig = b.build()?;
    let grid = parse_grid(&cfg.tgrid)?;
    let (curve, status) = curve_or_partial(sir_ccdf(
        &model_of(&cfg.kernel)?,
        cfg.pathloss,
        &grid,
        &cfg.options,
    ))?;
    ctx.write_curve(&curve)?;
    ctx.manifest(&cfg, None, status)?;
    Ok(status)
}

pub fn sir_approx(ctx: &mut Ctx, a: &SirApproxArgs) -> Result<Status> {
    let mut b = Builder::new(&ctx.base);
    b.kernel(&a.model, false)?;
    b.pathloss(&a.pathloss, pure_power_4())?;
    b.set("tgrid", a.tgrid.as_ref());
    let cfg: SirApproxConfig = b.build()?;
    let grid = parse_grid(&cfg.tgrid)?;
    let (curve, status) = curve_or_partial(sir_ccdf_diag_approx(
        &model_of(&cfg.kernel)?,
        cfg.pathloss,
        &grid,
    ))?;
    ctx.write_curve(&curve)?;
    ctx.manifest(&cfg, None, status)?;
    Ok(status)
}

pub fn simulate(ctx: &mut Ctx, a: &SimulateArgs) -> Result<Status> {
    let mut b = Builder::new(&ctx.base);
    b.kernel(&a.model, true)?;
    b.sim(&a.model, &a.sim)?;
    let cfg: SimulateConfig = b.build()?;
    let seed = ctx.seed();
    let mut sc = sim_config(&cfg.kernel, cfg.hex_eta, cfg.window, cfg.replications, seed);
    sc.margin = cfg.margin;
    let patterns = Simulator::new(sc)?.patterns()?;
    let dir = ctx.out_dir(true)?.expect("required");
    let mut summary = String::from("replication,points,intensity\n");
    for (rep, p) in patterns.iter().enumerate() {
        write_pattern(ctx.path(&dir, &format!("simulate_{rep:04}.csv")), p)?;
        summary.push_str(&format!("{rep},{},{}\n", p.len(), p.intensity()));
    }
    let path = ctx.path(&dir, "simulate.csv");
    fs::write(path, summary)?;
    ctx.manifest(&cfg, Some(seed), Status::Ok)?;
    Ok(Status::Ok)
}

pub fn coverage(ctx: &mut Ctx, a: &CoverageArgs) -> Result<Status> {
    let mut b = Builder::new(&ctx.base);
    b.kernel(&a.model, true)?;
    b.sim(&a.model, &a.sim)?;
    b.pathloss(&a.pathloss, pure_power_4())?;
    b.set("tgrid", a.tgrid.as_ref());
    let cfg: CoverageConfig = b.build()?;
    let seed = ctx.seed();
    let grid = parse_grid(&cfg.tgrid)?;
    let sim = Simulator::new(sim_config(
        &cfg.kernel,
        cfg.hex_eta,
        cfg.window,
        cfg.replications,
        seed,
    ))?;
    let run = run_coverage(&sim, cfg.pathloss, &grid)?;
    if run.resampled > 0 {
        eprintln!(
            "warning: {} replication(s) redrawn after an empty pattern",
            run.resampled
        );
    }
    let mut csv = String::from("threshold_db,mean,std_error,empirical,lower,median,upper\n");
    for (i, t) in grid.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            t,
            run.mean[i],
            run.std_error[i],
            run.empirical[i],
            run.lower[i],
            run.median[i],
            run.upper[i]
        ));
    }
    let dir = ctx.out_dir(true)?.expect("required");
    let path = ctx.path(&dir, "coverage.csv");
    fs::write(path, csv)?;
    ctx.manifest(&cfg, Some(seed), Status::Ok)?;
    Ok(Status::Ok)
}

pub fn envelope(ctx: &mut Ctx, a: &EnvelopeArgs) -> Result<Status> {
    let mut b = Builder::new(&ctx.base);
    b.kernel(&a.model, true)?;
    b.set("pattern", a.pattern.as_ref())
        .set("replications", a.sim.reps)
        .set("statistic", a.statistic.as_ref())
        .set("rmax", a.rmax)
        .set("rstep", a.rstep)
        .set("tgrid", a.tgrid.as_ref());
    if let Some(w) = a.sim.window {
        b.set("window", Some(Window::rect(w, w)?));
    }
    if a.sim.eta.is_some() {
        b.set("hex_eta", a.sim.eta);
    }
    b.pathloss(&a.pathloss, pure_power_4())?;
    let cfg: EnvelopeConfig = b.build().map_err(|e| match e {
        Error::Config(m) if m.contains("pattern") => Error::Config("--pattern is required".into()),
        e => e,
    })?;
    let seed = ctx.seed();
    let data = load_pattern(&cfg.pattern, &LoadOptions::default())?;
    for w in data.warnings() {
        eprintln!("warning: {w}");
    }
    let window = cfg.window.unwrap_or(data.pattern.window);
    let statistic = match cfg.statistic.to_ascii_lowercase().as_str() {
        "k" | "ripley_k" => EnvelopeStatistic::RipleyK {
            r_grid: parse_grid(&format!("{}:{}:{}", cfg.rstep, cfg.rstep, cfg.rmax))?,
        },
        "coverage" => EnvelopeStatistic::Coverage {
            pathloss: cfg.pathloss,
            thresholds_db: parse_grid(&cfg.tgrid)?,
        },
        other => {
            return Err(Error::Config(format!(
                "unknown statistic '{other}' (k | coverage)"
            )))
        }
    };
    let sim = Simulator::new(sim_config(
        &cfg.kernel,
        cfg.hex_eta,
        window,
        cfg.replications,
        seed,
    ))?;
    let report = envelope_test(&data.pattern, &sim, &statistic)?;
    let mut csv = String::from("abscissa,observed,lower,upper,inside\n");
    for i in 0..report.abscissa.len() {
        let inside = !report.exceedances.contains(&i);
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            report.abscissa[i],
            report.observed[i],
            report.lower[i],
            report.upper[i],
            u8::from(inside)
        ));
    }
    let dir = ctx.out_dir(true)?.expect("required");
    fs::write(ctx.path(&dir, "envelope_test.csv"), csv)?;
    write_json(ctx.path(&dir, "envelope_test.json"), &report)?;
    println!(
        "{} ({} of {} points outside the envelope, observed intensity {:.4})",
        if report.passed { "PASS" } else { "FAIL" },
        report.exceedances.len(),
        report.abscissa.len(),
        estimate_intensity(&data)
    );
    ctx.manifest(&cfg, Some(seed), Status::Ok)?;
    Ok(Status::Ok)
}

pub fn mu(ctx: &mut Ctx, a: &ModelOnlyArgs) -> Result<Status> {
    let mut b = Builder::new(&ctx.base);
    b.kernel(&a.model, false)?;
    let cfg: ModelConfig = b.build()?;
    let mu = model_of(&cfg.kernel)?.repulsiveness();
    println!("{mu:.4}");
    if let Some(dir) = ctx.out_dir(false)? {
        write_json(
            ctx.path(&dir, "mu.json"),
            &serde_json::json!({ "kernel": cfg.kernel, "mu": mu }),
        )?;
        ctx.manifest(&cfg, None, Status::Ok)?;
    }
    Ok(Status::Ok)
}

pub fn check_existence(ctx: &mut Ctx, a: &ModelOnlyArgs) -> Result<Status> {
    let mut b = Builder::new(&ctx.base);
    b.kernel(&a.model, false)?;
    let cfg: ModelConfig = b.build()?;
    let report = cfg.kernel.existence_check()?;
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
    println!("family        {}", report.family);
    println!("exists        {}", report.passes);
    println!("phi(0)        {}", opt(report.max_spectral));
    println!(
        "grid max      {} at |xi| = {}",
        opt(report.grid_max),
        opt(report.grid_argmax)
    );
    println!("off-origin    {}", report.off_origin);
    println!("lambda max    {}", opt(report.lambda_max));
    if report.off_origin {
        eprintln!("warning: spectral maximum found away from the origin; phi(0) alone does not decide existence");
    }
    if let Some(dir) = ctx.out_dir(false)? {
        write_json(ctx.path(&dir, "check_existence.json"), &report)?;
        ctx.manifest(&cfg, None, Status::Ok)?;
    }
    if !report.passes {
        return Err(Error::Existence {
            max_spectral: report.grid_max.or(report.max_spectral).unwrap_or(f64::NAN),
        });
    }
    Ok(Status::Ok)
}

pub fn presets() -> Result<Status> {
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "{:<18}{:<10}{:>8}{:>8}{:>8}{:>8}{:>10}",
        "name", "family", "lambda", "alpha", "nu", "mu", "window"
    )?;
    for name in PRESET_NAMES {
        let s = preset_spec(name)?;
        let w = preset_window(name)?;
        let mu = model_of(&s)?.repulsiveness();
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| x.to_string());
        writeln!(
            out,
            "{:<18}{:<10}{:>8}{:>8}{:>8}{:>8.4}{:>10}",
            name,
            s.family.to_string(),
            s.lambda,
            opt(s.alpha),
            opt(s.nu),
            mu,
            format!("{}x{}", w.width(), w.height())
        )?;
    }
    Ok(Status::Ok)
}
