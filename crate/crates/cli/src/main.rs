use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use circmaj::families::PairSelection;
use circmaj::runner::{
    compare_runs, default_workers, deviations_csv, read_outputs, run_ensemble_with,
    run_reference_with, table1, verdicts_csv, write_outputs, write_table1, Analysis,
    EnsembleConfig, ReferenceConfig, Table1Config, Thresholds, VerdictRow, WORKERS_ENV,
};

#[derive(Parser, Debug)]
#[command(
    name = "circmaj",
    version,
    about = "Lorenz-curve and entanglement-spectrum statistics of random circuits"
)]
struct Cli {
    /// Worker threads (default: available parallelism). Outputs do not
    /// depend on this.
    #[arg(long, global = true, env = WORKERS_ENV)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one circuit-family ensemble.
    Run(RunArgs),
    /// Run a Haar-n or Poisson-levels reference ensemble.
    Reference(ReferenceArgs),
    /// Compare a run directory against reference run directories.
    Compare(CompareArgs),
    /// Run all table families with their references and print the verdicts.
    Table1(Table1Args),
}

#[derive(Args, Debug, Default)]
struct HistArgs {
    /// Histogram bins on [0, range].
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    range: Option<f64>,
    /// Bootstrap resamples for the peak-stddev interval.
    #[arg(long)]
    resamples: Option<usize>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// A-B-C family name, e.g. G3-rn-rs.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    gates: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated snapshot times.
    #[arg(long, value_delimiter = ',')]
    snapshots: Option<Vec<usize>>,
    /// Comma-separated subset of lorenz, fluctuations, spectrum, parity_spectrum.
    #[arg(long, value_delimiter = ',')]
    analyses: Option<Vec<Analysis>>,
    /// ordered | unordered_role_flip
    #[arg(long)]
    cnot_pairs: Option<PairSelection>,
    #[command(flatten)]
    hist: HistArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReferenceArgs {
    /// Haar-random states on this many qubits.
    #[arg(long, conflicts_with = "poisson", required_unless_present = "poisson")]
    haar: Option<usize>,
    /// Independent uniform levels per spectrum.
    #[arg(long)]
    poisson: Option<usize>,
    #[arg(long, default_value_t = 5000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_delimiter = ',')]
    analyses: Option<Vec<Analysis>>,
    #[command(flatten)]
    hist: HistArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Run to grade.
    a: PathBuf,
    /// Lorenz reference (and spectral reference unless --spectral-ref).
    b: PathBuf,
    #[arg(long)]
    spectral_ref: Option<PathBuf>,
    /// Empirical Poisson reference; the analytic law is used otherwise.
    #[arg(long)]
    poisson: Option<PathBuf>,
    /// Write verdicts.csv and deviations.csv here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Table1Args {
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 500)]
    gates: usize,
    #[arg(long, default_value_t = 5000)]
    samples: usize,
    #[arg(long, default_value_t = 2019)]
    seed: u64,
    #[command(flatten)]
    hist: HistArgs,
    #[arg(long)]
    out: PathBuf,
}

fn apply_hist(
    h: &HistArgs,
    histogram: &mut circmaj::runner::HistogramConfig,
    bootstrap: &mut circmaj::runner::BootstrapConfig,
) {
    if let Some(b) = h.bins {
        histogram.bins = b;
    }
    if let Some(r) = h.range {
        histogram.range = r;
    }
    if let Some(r) = h.resamples {
        bootstrap.resamples = r;
    }
}

fn ensemble_config(args: &RunArgs) -> Result<EnsembleConfig> {
    let mut c = match &args.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            EnsembleConfig::from_toml(&text)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        None => match &args.family {
            Some(f) => EnsembleConfig::new(f, 8, 1000, 1),
            None => bail!("either --config or --family is required"),
        },
    };
    if let Some(f) = &args.family {
        c.family = f.clone();
    }
    if let Some(n) = args.n {
        c.n = n;
    }
    if let Some(g) = args.gates {
        c.gates = g;
    }
    if let Some(s) = args.samples {
        c.samples = s;
    }
    if let Some(s) = args.seed {
        c.seed = s;
    }
    if let Some(t) = &args.snapshots {
        c.snapshots = Some(t.clone());
    }
    if let Some(a) = &args.analyses {
        c.analyses = a.clone();
    }
    if let Some(p) = args.cnot_pairs {
        c.cnot_pairs = p;
    }
    apply_hist(&args.hist, &mut c.histogram, &mut c.bootstrap);
    Ok(c)
}

fn print_rows(rows: &[&VerdictRow]) {
    let f = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
    let b = |x: Option<bool>| x.map_or("-", |v| if v { "YES" } else { "NO" });
    println!(
        "{:<10} {:<16} {:>9} {:>5} {:>9} {:>8} {:>5} {:>8} {:>8}  {}",
        "family",
        "reference",
        "max_z",
        "Ave",
        "peak_sd",
        "ratio",
        "Fluc",
        "tv_rmt",
        "tv_pois",
        "Spec"
    );
    for r in rows {
        let refs = if r.lorenz_reference == r.spectral_reference {
            r.lorenz_reference.clone()
        } else {
            format!("{}/{}", r.lorenz_reference, r.spectral_reference)
        };
        println!(
            "{:<10} {:<16} {:>9} {:>5} {:>9} {:>8} {:>5} {:>8} {:>8}  {}",
            r.family,
            refs,
            f(r.max_z),
            b(r.ave_h),
            f(r.peak_stddev),
            f(r.fluc_ratio),
            b(r.fluc_h),
            f(r.tv_rmt),
            f(r.tv_poisson),
            r.spec
        );
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let workers = cli
        .workers
        .filter(|&w| w > 0)
        .unwrap_or_else(default_workers);
    match cli.command {
        Command::Run(args) => {
            let c = ensemble_config(&args)?;
            let out = run_ensemble_with(&c, workers)?;
            let m = write_outputs(&out, &args.out)?;
            println!(
                "{}: {} samples -> {}",
                out.label,
                c.samples,
                args.out.display()
            );
            for f in &m.files {
                println!("  {} {}", f.sha256, f.name);
            }
        }
        Command::Reference(args) => {
            let mut c = match (args.haar, args.poisson) {
                (Some(n), _) => ReferenceConfig::haar(n, args.samples, args.seed),
                (None, Some(l)) => ReferenceConfig::poisson(l, args.samples, args.seed),
                (None, None) => unreachable!("clap requires one of --haar/--poisson"),
            };
            if let Some(a) = &args.analyses {
                c.analyses = a.clone();
            } else if matches!(args.haar, Some(n) if n % 2 == 1) {
                c.analyses = vec![Analysis::Lorenz, Analysis::Fluctuations];
            }
            apply_hist(&args.hist, &mut c.histogram, &mut c.bootstrap);
            let out = run_reference_with(&c, workers)?;
            let m = write_outputs(&out, &args.out)?;
            println!(
                "{}: {} samples -> {}",
                out.label,
                c.samples,
                args.out.display()
            );
            for f in &m.files {
                println!("  {} {}", f.sha256, f.name);
            }
        }
        Command::Compare(args) => {
            let a =
                read_outputs(&args.a).with_context(|| format!("reading {}", args.a.display()))?;
            let b =
                read_outputs(&args.b).with_context(|| format!("reading {}", args.b.display()))?;
            let s = args.spectral_ref.as_deref().map(read_outputs).transpose()?;
            let p = args.poisson.as_deref().map(read_outputs).transpose()?;
            let rep = compare_runs(&a, &b, s.as_ref(), p.as_ref(), &Thresholds::default())?;
            print_rows(&[&rep.row]);
            if let Some(dir) = &args.out {
                fs::create_dir_all(dir)?;
                fs::write(dir.join("verdicts.csv"), verdicts_csv([&rep.row])?)?;
                fs::write(dir.join("deviations.csv"), deviations_csv(&rep)?)?;
            }
        }
        Command::Table1(args) => {
            let mut c = Table1Config {
                n: args.n,
                gates: args.gates,
                samples: args.samples,
                seed: args.seed,
                ..Default::default()
            };
            apply_hist(&args.hist, &mut c.histogram, &mut c.bootstrap);
            let res = table1(&c, workers)?;
            write_table1(&res, &args.out)?;
            print_rows(&res.reports.iter().map(|r| &r.row).collect::<Vec<_>>());
        }
    }
    Ok(())
}
