use clap::{Parser, ValueEnum};
use junction_core::study::config::{Format, RegimeKind};
use junction_core::study::{emit, emit_profiles, run_study, StudyConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RegimeArg {
    Finite,
    Infinite,
    Zero,
}

/// Runs a beam-plate convergence study and writes its report.
#[derive(Debug, Parser)]
#[command(name = "study", version)]
struct Args {
    /// TOML study configuration; the built-in default study when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Overrides the regime of the config.
    #[arg(long, value_enum)]
    regime: Option<RegimeArg>,
    /// Worker threads for the per-eps cases and assembly.
    #[arg(long)]
    threads: Option<usize>,
    /// Print the built-in default configuration and exit.
    #[arg(long)]
    print_default: bool,
}

fn run(args: Args) -> junction_core::Result<()> {
    if args.print_default {
        print!("{}", junction_core::study::config::DEFAULT_CONFIG);
        return Ok(());
    }
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| junction_core::Error::Config(e.to_string()))?;
    }
    let mut cfg = match &args.config {
        Some(p) => StudyConfig::load(p)?,
        None => StudyConfig::default_study(),
    };
    if let Some(r) = args.regime {
        cfg.schedule.regime = match r {
            RegimeArg::Finite => RegimeKind::Finite,
            RegimeArg::Infinite => RegimeKind::Infinite,
            RegimeArg::Zero => RegimeKind::Zero,
        };
    }
    if let Some(f) = args.format {
        cfg.output.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
            FormatArg::Both => Format::Both,
        };
    }
    let dir = args.out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let outcome = run_study(&cfg)?;
    for p in emit(&outcome.report, &cfg, cfg.output.format, &dir)? {
        println!("wrote {}", p.display());
    }
    if cfg.output.profiles {
        let n = emit_profiles(&outcome, &dir)?.len();
        println!("wrote {n} profile files under {}", dir.join("profiles").display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
