//! `trisym`: simulate and analyse equal-mass three-body orbits in shape space.

mod analyze;
mod contours;
mod orbit;
mod output;
mod simulate;
mod svg;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "trisym",
    version,
    about = "Three-body orbits in Newtonian and string potentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate an orbit and write trajectory, shape and event tables.
    Simulate(simulate::SimulateArgs),
    /// Lock, G3, syzygy, period or stability report for an orbit.
    Analyze(analyze::AnalyzeArgs),
    /// Potential contours and loci on the shape disc.
    Contours(contours::ContoursArgs),
    /// Print the built-in orbit catalog as JSON.
    Catalog,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command_line: Vec<String> = std::env::args().collect();
    let result = match cli.command {
        Command::Simulate(args) => simulate::run(&args, &command_line),
        Command::Analyze(args) => analyze::run(&args, &command_line),
        Command::Contours(args) => contours::run(&args, &command_line),
        Command::Catalog => orbit::print_catalog(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if let Some(trisym::Error::UnknownOrbit(name)) = err.downcast_ref::<trisym::Error>() {
                eprintln!(
                    "error: unknown orbit `{name}` (built-in: {})",
                    trisym::catalog::catalog_names().join(", ")
                );
                return ExitCode::from(2);
            }
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
