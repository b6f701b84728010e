mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Failure, Output};

#[derive(Parser)]
#[command(
    name = "sl3scatter",
    version,
    about = "Resolvent and spherical-function numerics on SL(3,R)/SO(3)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML file overriding the bundled defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory for reports.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Seed for the randomised checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Group of acceptance checks to run with `verify`.
    #[arg(long, global = true, value_name = "NAME")]
    suite: Option<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Tabulate chart coordinates over the positive chamber.
    Geom,
    /// Check chart metrics, transitions and the symmetry counts.
    AtlasCheck,
    /// Solve the resolvent equation on the flat.
    Solve,
    /// Compare the contour-integral and direct product resolvents.
    Product,
    /// Apply the composite parametrix and its Neumann correction.
    Parametrix,
    /// Tabulate a spherical function from its Weyl sum.
    Spherical,
    /// Run the acceptance suite.
    Verify,
}

fn write_all(dir: &Path, files: &[(String, String)]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, text) in files {
        std::fs::write(dir.join(name), text)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match config::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: config: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = cli.seed {
        cfg.verify.seed = seed;
        cfg.atlas.seed = seed;
    }
    if let Some(s) = cli.suite {
        cfg.verify.suite = s;
    }
    let result = match cli.command {
        Command::Geom => commands::geom(&cfg),
        Command::AtlasCheck => commands::atlas_check(&cfg),
        Command::Solve => commands::solve(&cfg),
        Command::Product => commands::product(&cfg),
        Command::Parametrix => commands::parametrix(&cfg),
        Command::Spherical => commands::spherical(&cfg),
        Command::Verify => commands::verify(&cfg),
    };
    match result {
        Ok(Output { files, pass }) => {
            if let Err(e) = write_all(&cli.out, &files) {
                eprintln!("error: writing reports to {}: {e}", cli.out.display());
                return ExitCode::from(2);
            }
            if pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("acceptance failure");
                ExitCode::from(1)
            }
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: config: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
