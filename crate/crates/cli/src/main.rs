mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, Global};
use report::{envelope, render, write_text, CliError, Outcome};

fn name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Volume { .. } => "volume",
        Command::Cm(_) => "cm",
        Command::Fill { .. } => "fill",
        Command::Collapse(_) => "collapse",
        Command::Prop61(_) => "prop61",
        Command::Flex { .. } => "flex",
        Command::Sabitov(_) => "sabitov",
        Command::Faceposet(_) => "faceposet",
        Command::Estimate { .. } => "estimate",
    }
}

fn check_tolerances(g: &Global) -> Result<(), CliError> {
    for (flag, v) in [("--edge-tol", g.edge_tol), ("--vol-tol", g.vol_tol), ("--rank-gap", g.rank_gap)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Input(format!("{flag} must be positive, got {v}")));
        }
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let g = &cli.global;
    check_tolerances(g)?;
    match &cli.command {
        Command::Validate { cycle } => commands::validate(cycle),
        Command::Volume { cycle, coords, origin } => commands::volume(cycle, coords, origin.as_deref()),
        Command::Cm(a) => commands::cm(a),
        Command::Fill { cycle, complex, coords } => commands::fill(cycle, complex.as_deref(), coords.as_deref(), g),
        Command::Collapse(a) => commands::collapse(a, g),
        Command::Prop61(a) => commands::prop61(a, g),
        Command::Flex { action } => commands::flex(action, g),
        Command::Sabitov(a) => commands::sabitov(a),
        Command::Faceposet(a) => commands::faceposet(a, g),
        Command::Estimate { cycle, coords } => commands::estimate(cycle, coords),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let outcome = match dispatch(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("bellows: {e}");
            return ExitCode::from(e.code() as u8);
        }
    };
    let text = render(&envelope(name(&cli.command), &cli.global, &outcome), cli.global.format);
    match &cli.global.out {
        Some(path) => {
            if let Err(e) = write_text(path, &text) {
                eprintln!("bellows: {e}");
                return ExitCode::from(e.code() as u8);
            }
        }
        None => print!("{text}"),
    }
    if outcome.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
