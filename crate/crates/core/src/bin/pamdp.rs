use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pamdp::harness::{self, ExperimentConfig};

#[derive(Parser)]
#[command(name = "pamdp", version, about = "Regret experiments for partially adversarial episodic MDPs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's `output`, then `.`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every config matching a glob.
    Sweep {
        #[arg(long)]
        glob: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the log-log regret slope of a run CSV (seed-averaged).
    Slope {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value_t = 1)]
        kmin: usize,
    },
}

fn report(s: &harness::Summary) {
    let slope = s.slope.map_or("n/a".to_string(), |v| format!("{v:.4}"));
    println!(
        "{}: {} K={} seeds={} final regret {:.4} +- {:.4}, slope(k>={}) {}",
        s.run_id,
        s.algo,
        s.k,
        s.seeds.len(),
        s.mean_final_regret,
        s.ci95,
        s.slope_kmin,
        slope
    );
    for a in &s.assertions {
        let v = a.value.map_or("n/a".to_string(), |v| format!("{v:.6}"));
        println!("  {} {} = {} (bound {})", if a.passed { "pass" } else { "FAIL" }, a.name, v, a.bound);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Run { config, out } => (|| {
            let cfg = ExperimentConfig::from_path(&config)?;
            let dir = out.or_else(|| cfg.output.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."));
            let rec = harness::with_pool(harness::thread_count(), || harness::run(&cfg))??;
            let csv = rec.write_outputs(&dir)?;
            report(&rec.summary);
            println!("wrote {}", csv.display());
            Ok(rec.summary.passed)
        })(),
        Cmd::Sweep { glob, out } => (|| {
            let paths = harness::expand(&glob)?;
            let entries = harness::sweep(&paths, &out, harness::thread_count())?;
            let mut ok = true;
            for e in &entries {
                match &e.outcome {
                    Ok((s, _)) => {
                        report(s);
                        ok &= s.passed;
                    }
                    Err(err) => {
                        eprintln!("{}: {err}", e.path.display());
                        ok = false;
                    }
                }
            }
            println!("wrote {}", out.join("summary.csv").display());
            Ok(ok)
        })(),
        Cmd::Slope { csv, kmin } => (|| {
            let rows = harness::read_csv(&csv)?;
            let v = harness::slope(&harness::curve_from_rows(&rows), kmin)?;
            println!("{v}");
            Ok(true)
        })(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let e: pamdp::Error = e;
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
