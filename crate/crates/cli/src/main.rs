use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use aniso_symm_cli::{run, Command};

/// Klimov symmetrization, radial and anisotropic solvers, and certified
/// comparison reports.
#[derive(Parser)]
#[command(name = "aniso-symm", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for batch entries.
    #[arg(long, env = "ANISO_SYMM_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(k) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(args.command, &args.config, &args.out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
