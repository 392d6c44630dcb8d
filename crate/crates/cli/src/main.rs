mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;
use dppcell::Error;

use args::{Cli, Command};
use commands::{Ctx, Radial, Status};
use config::Base;

fn exit_code(e: &Error) -> u8 {
    if e.is_config() {
        2
    } else if e.is_non_convergence() {
        3
    } else {
        1
    }
}

fn run(cli: Cli) -> dppcell::Result<Status> {
    let name = cli.command.name();
    let base = Base::load(cli.global.config.as_deref(), name)?;
    let threads = cli
        .global
        .threads
        .or(base.threads)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        return Err(Error::Config("--threads must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut ctx = Ctx::new(name, cli.global, base, threads);
    match &cli.command {
        Command::Esf(a) => commands::radial(&mut ctx, a, Radial::Esf),
        Command::Nnf(a) => commands::radial(&mut ctx, a, Radial::Nnf),
        Command::Kfn(a) => commands::radial(&mut ctx, a, Radial::Kfn),
        Command::MeanInterference(a) => commands::mean_interference(&mut ctx, a),
        Command::Laplace(a) => commands::laplace(&mut ctx, a),
        Command::Sir(a) => commands::sir(&mut ctx, a),
        Command::SirApprox(a) => commands::sir_approx(&mut ctx, a),
        Command::Simulate(a) => commands::simulate(&mut ctx, a),
        Command::Coverage(a) => commands::coverage(&mut ctx, a),
        Command::EnvelopeTest(a) => commands::envelope(&mut ctx, a),
        Command::Mu(a) => commands::mu(&mut ctx, a),
        Command::Presets => commands::presets(),
        Command::CheckExistence(a) => commands::check_existence(&mut ctx, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::NonConvergence) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
