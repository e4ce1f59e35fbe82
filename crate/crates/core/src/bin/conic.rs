use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

/// Scattering and dispersive-kernel pipelines for surfaces of revolution.
#[derive(Parser)]
#[command(name = "conic", version)]
struct Args {
    /// describe | potential | jost | coeffs | validate-low | validate-high | kernel | decay | statphase
    command: String,
    #[arg(long)]
    config: PathBuf,
    /// output directory (overrides the config's `out`)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let status = conic_scatter::cli::init_threads().and_then(|_| conic_scatter::cli::run(&args.command, &args.config, args.out.as_deref()));
    match status {
        Ok(s) => ExitCode::from(s.code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
