use clap::{Args, Parser, Subcommand};
use liouville_core::certify;
use liouville_core::radial::{self, RadialProfile};
use liouville_core::regions::ProblemPoint;
use liouville_core::verify;
use liouville_sweep::{emit_curves, render_svg, run_sweep, Mode, SweepConfig};
use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

/// Default output directory when neither --out nor a config file sets one.
const OUT_ENV: &str = "LIOUVILLE_OUT_DIR";

#[derive(Parser)]
#[command(name = "liouville-sweep", about = "Region sweeps and certificates for a Liouville-type elliptic problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct SweepArgs {
    /// Flat key = value config file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<u32>,
    /// q-axis interval as lo:hi.
    #[arg(long, value_name = "LO:HI")]
    q_range: Option<String>,
    /// p-axis interval as lo:hi.
    #[arg(long, value_name = "LO:HI")]
    p_range: Option<String>,
    /// Steps per axis.
    #[arg(long)]
    steps: Option<usize>,
    /// classify or certify.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify or certify every cell of a (p, q)-grid into grid.csv.
    Sweep(SweepArgs),
    /// Sample the five boundary curves into curves.csv.
    Curves {
        #[arg(long, default_value_t = 6)]
        n: u32,
        #[arg(long, default_value_t = 256)]
        resolution: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render grid.csv + curves.csv as a static SVG figure.
    Render {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        curves: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify one point and print the certificate.
    CertifyPoint {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
    },
    /// Run the full cross-module property battery.
    VerifyAll {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check the explicit radial family at one (n, q).
    RadialCheck {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        q: f64,
    },
}

fn parse_range(s: &str) -> anyhow::Result<(f64, f64)> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| anyhow::anyhow!("range {s:?} must be lo:hi"))?;
    Ok((lo.trim().parse()?, hi.trim().parse()?))
}

fn read_config_file(path: &PathBuf) -> anyhow::Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow::anyhow!("line {} of {path:?}: expected key = value", i + 1))?;
        map.insert(k.trim().to_owned(), v.trim().to_owned());
    }
    Ok(map)
}

fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn build_sweep_config(args: &SweepArgs) -> anyhow::Result<SweepConfig> {
    let mut cfg = SweepConfig {
        output_dir: default_out_dir(),
        ..SweepConfig::default()
    };
    if let Some(path) = &args.config {
        let file = read_config_file(path)?;
        for (k, v) in &file {
            match k.as_str() {
                "n" => cfg.n = v.parse()?,
                "q_range" => {
                    let (lo, hi) = parse_range(v)?;
                    cfg.q_range = (lo, hi, cfg.q_range.2);
                }
                "p_range" => {
                    let (lo, hi) = parse_range(v)?;
                    cfg.p_range = (lo, hi, cfg.p_range.2);
                }
                "steps" => {
                    let s: usize = v.parse()?;
                    cfg.q_range.2 = s;
                    cfg.p_range.2 = s;
                }
                "mode" => cfg.mode = Mode::parse(v)?,
                "seed" => cfg.seed = v.parse()?,
                "out" => cfg.output_dir = PathBuf::from(v),
                "workers" => cfg.workers = v.parse()?,
                other => anyhow::bail!("unknown config key {other:?} in {path:?}"),
            }
        }
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(r) = &args.q_range {
        let (lo, hi) = parse_range(r)?;
        cfg.q_range = (lo, hi, cfg.q_range.2);
    }
    if let Some(r) = &args.p_range {
        let (lo, hi) = parse_range(r)?;
        cfg.p_range = (lo, hi, cfg.p_range.2);
    }
    if let Some(s) = args.steps {
        cfg.q_range.2 = s;
        cfg.p_range.2 = s;
    }
    if let Some(m) = &args.mode {
        cfg.mode = Mode::parse(m)?;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    Ok(cfg)
}

/// 0 success, 1 invalid input, 2 verification failures present.
fn run() -> anyhow::Result<u8> {
    let cli = Cli::parse();
    match cli.command {
        Command::Sweep(args) => {
            let cfg = build_sweep_config(&args)?;
            let summary = run_sweep(&cfg)?;
            println!("wrote {} rows to {}", summary.rows, summary.grid_path.display());
            for (label, count) in &summary.counts {
                println!("  {label}: {count}");
            }
            Ok(0)
        }
        Command::Curves { n, resolution, out } => {
            let path = out.unwrap_or_else(|| default_out_dir().join("curves.csv"));
            emit_curves(n, resolution, &path)?;
            println!("wrote {}", path.display());
            Ok(0)
        }
        Command::Render { grid, curves, out } => {
            let path = out.unwrap_or_else(|| default_out_dir().join("figure.svg"));
            render_svg(&grid, &curves, &path)?;
            println!("wrote {}", path.display());
            Ok(0)
        }
        Command::CertifyPoint { n, p, q } => {
            let point = ProblemPoint::new(n, p, q).map_err(|e| anyhow::anyhow!("{e}"))?;
            let nf = n as f64;
            let cert = if q <= 1.0 / (nf - 1.0) {
                certify::certify_lowq(point, certify::DEFAULT_EPS1, certify::DEFAULT_EPS)
            } else {
                certify::certify_highq(point)
            };
            print!("{}", cert.to_kv());
            Ok(if cert.feasible() { 0 } else { 2 })
        }
        Command::VerifyAll { seed } => {
            let report = verify::run_all(seed);
            print!("{report}");
            Ok(if report.all_passed() { 0 } else { 2 })
        }
        Command::RadialCheck { n, q } => {
            let profile = RadialProfile::new(n, q, 1.0).map_err(|e| anyhow::anyhow!("{e}"))?;
            let mut worst: f64 = 0.0;
            for i in 0..100 {
                let r = 10f64.powf(-2.0 + 4.0 * i as f64 / 99.0);
                worst = worst.max(radial::ode_residual(&profile, r).abs());
            }
            let dev = radial::shooting::max_relative_deviation(&profile, &[0.1, 0.5, 1.0, 3.0]);
            println!("n = {n}, q = {q}: p = {:.12}, K = {:.12}", profile.p, profile.k);
            println!("max ODE residual over 100 radii: {worst:.3e}");
            println!("shooting deviation: {dev:.3e}");
            Ok(if worst < 1e-8 && dev < 1e-6 { 0 } else { 2 })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
