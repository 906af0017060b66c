use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pentamol_cli::config::Dipole;
use pentamol_cli::{run, CliError, RunConfig, Subcommand};

/// Potential curves of a Rydberg atom bound to two polar molecules.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    #[arg(value_enum)]
    command: Subcommand,
    /// TOML configuration; missing keys take their defaults.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
    /// Overrides PENTAMOL_CACHE_DIR and the config file.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    n_max: Option<i32>,
    /// Comma-separated list, e.g. 0,1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    m_j: Option<Vec<i32>>,
    #[arg(long)]
    r_start: Option<f64>,
    #[arg(long)]
    r_stop: Option<f64>,
    #[arg(long)]
    r_step: Option<f64>,
    #[arg(long)]
    gap: Option<f64>,
    #[arg(long)]
    r1: Option<f64>,
    #[arg(long)]
    curves: Option<usize>,
    #[arg(long)]
    no_s_state: bool,
    #[arg(long)]
    b_ghz: Option<f64>,
    /// "0.566 D" or a value in a.u.
    #[arg(long)]
    dipole: Option<String>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    print_config: bool,
}

fn build_config(a: &Args) -> Result<RunConfig, CliError> {
    let mut c = match &a.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    c.apply_env();
    if let Some(v) = &a.output_dir {
        c.output_dir = v.clone();
    }
    if let Some(v) = &a.cache_dir {
        c.cache_dir = Some(v.clone());
    }
    if let Some(v) = a.threads {
        c.threads = v;
    }
    if let Some(v) = a.n_max {
        c.space.n_max = v;
    }
    if let Some(v) = &a.m_j {
        c.space.m_j = v.clone();
    }
    for (dst, src) in [
        (&mut c.scan.r_start, a.r_start),
        (&mut c.scan.r_stop, a.r_stop),
        (&mut c.scan.r_step, a.r_step),
        (&mut c.scan.gap, a.gap),
        (&mut c.scan.r1, a.r1),
        (&mut c.molecule.b_ghz, a.b_ghz),
    ] {
        if let Some(v) = src {
            *dst = v;
        }
    }
    if let Some(v) = a.curves {
        c.scan.curves = v;
    }
    if a.no_s_state {
        c.space.include_s = false;
    }
    if let Some(d) = &a.dipole {
        c.molecule.dipole = Dipole::parse(d).map_err(|e| CliError::Config(format!("--dipole: {e}")))?;
    }
    c.validate()?;
    Ok(c)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = build_config(&args).and_then(|c| {
        if args.print_config {
            print!("{}", c.to_toml());
            return Ok(());
        }
        let bundle = run(args.command, &c)?;
        println!("run {} wrote {} files to {}", bundle.run_id, bundle.files.len(), bundle.dir.display());
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
