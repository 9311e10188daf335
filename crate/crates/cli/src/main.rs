//! `robci`: generate contaminated regression data, compute a confidence
//! interval for one coefficient, or run the simulation grid.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 data or solver
//! error.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use robci::baselines::{ols_t_interval, residual_bootstrap_interval, BootstrapSpec};
use robci::interval::confidence_interval;
use robci::model::{self, io};
use robci::{Dataset64, DesignSpec, Error, Interval64, ThresholdRule};
use robci_bench::{BenchMethod, DesignConfig, ExperimentConfig, ExperimentRecord, NoiseFamily};

#[derive(Parser)]
#[command(
    name = "robci",
    version,
    about = "Robust confidence intervals under Huber contamination"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a dataset y = X b + z and write it as CSV.
    Generate(GenerateArgs),
    /// Confidence interval for one coefficient of a CSV dataset.
    Ci(CiArgs),
    /// Run the coverage/length simulation grid.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Noise {
    Gaussian,
    Cauchy,
}

impl From<Noise> for NoiseFamily {
    fn from(n: Noise) -> Self {
        match n {
            Noise::Gaussian => NoiseFamily::Gaussian,
            Noise::Cauchy => NoiseFamily::Cauchy,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, value_enum)]
    noise: Noise,
    /// AR(1) correlation of the design.
    #[arg(long, default_value_t = 0.6, allow_hyphen_values = true)]
    rho: f64,
    /// Comma-separated coefficients, or "zero".
    #[arg(long, default_value = "zero", allow_hyphen_values = true)]
    b: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CiMethod {
    Alg1,
    #[value(name = "alg1-ga")]
    Alg1Ga,
    #[value(name = "ols-t")]
    OlsT,
    Rb,
}

#[derive(Args)]
struct CiArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// 1-based index of the coefficient.
    #[arg(long, default_value_t = 1)]
    coef: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "alg1")]
    method: CiMethod,
    #[arg(long, default_value_t = BootstrapSpec::DEFAULT_REPLICATES)]
    bootstrap_reps: usize,
    /// Seed for the bootstrap; drawn from entropy and reported when absent.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON experiment config. Inline flags are used when absent.
    #[arg(long, conflicts_with_all = ["methods", "n_values", "p", "epsilons", "noise_families", "replicates", "alpha", "master_seed", "rho", "b"])]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; all cores by default.
    #[arg(long)]
    jobs: Option<usize>,
    /// Write 0 in the runtime column so the CSV depends only on the config.
    #[arg(long)]
    no_timing: bool,
    #[arg(long, value_delimiter = ',', default_value = "alg1,alg1-ga,ols-t,rb")]
    methods: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "200,1000")]
    n_values: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    p: usize,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8"
    )]
    epsilons: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "gaussian,cauchy")]
    noise_families: Vec<String>,
    #[arg(long, default_value_t = 500)]
    replicates: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    master_seed: Option<u64>,
    #[arg(long, default_value_t = 0.6, allow_hyphen_values = true)]
    rho: f64,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
        }
    }
}

/// Errors about what the user asked for, as opposed to what the data did.
fn classify(e: Error) -> Failure {
    match e {
        Error::InvalidArgument(_) | Error::IndexOutOfRange { .. } | Error::NoNuisance => {
            Failure::Usage(e.to_string())
        }
        _ => Failure::Data(e.to_string()),
    }
}

fn entropy_seed() -> u64 {
    rand::rng().random()
}

fn parse_coefficients(text: &str, p: usize) -> Result<Vec<f64>, Failure> {
    if text.trim() == "zero" {
        return Ok(vec![0.0; p]);
    }
    let b: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Usage(format!("--b: {e}")))?;
    if b.len() != p {
        return Err(Failure::Usage(format!(
            "--b has {} values, expected p = {p}",
            b.len()
        )));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Failure::Usage("--b values must be finite".into()));
    }
    Ok(b)
}

fn format_bound(v: Option<f64>, neg: bool) -> String {
    match v {
        Some(x) => x.to_string(),
        None if neg => "-inf".into(),
        None => "inf".into(),
    }
}

fn cmd_generate(a: GenerateArgs) -> Result<(), Failure> {
    if !(0.0..1.0).contains(&a.epsilon) {
        return Err(Failure::Usage(format!(
            "--epsilon must satisfy 0 <= epsilon < 1, got {}",
            a.epsilon
        )));
    }
    if a.n < 2 || a.p < 1 {
        return Err(Failure::Usage("need --n >= 2 and --p >= 1".into()));
    }
    let b = parse_coefficients(&a.b, a.p)?;
    let design = DesignSpec::ar1(a.p, a.rho).map_err(|e| Failure::Usage(e.to_string()))?;
    let noise = NoiseFamily::from(a.noise)
        .spec(a.epsilon)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let seed = a.seed.unwrap_or_else(entropy_seed);

    let d: Dataset64 = model::generate_dataset(&design, &noise, &b, a.n, seed).map_err(classify)?;
    let file = File::create(&a.out)
        .map_err(|e| Failure::Data(format!("cannot write {}: {e}", a.out.display())))?;
    io::write_csv(&d, BufWriter::new(file)).map_err(|e| Failure::Data(e.to_string()))?;
    let b_text: Vec<String> = b.iter().map(|v| v.to_string()).collect();
    println!("b={}", b_text.join(","));
    println!("seed={seed}");
    Ok(())
}

fn cmd_ci(a: CiArgs) -> Result<(), Failure> {
    if a.coef == 0 {
        return Err(Failure::Usage(
            "--coef is 1-based and must be at least 1".into(),
        ));
    }
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(Failure::Usage(format!(
            "--alpha must lie in (0, 1), got {}",
            a.alpha
        )));
    }
    let boot = match a.method {
        CiMethod::Rb => {
            let seed = a.seed.unwrap_or_else(|| {
                let s = entropy_seed();
                eprintln!("seed={s}");
                s
            });
            Some(BootstrapSpec::new(a.bootstrap_reps, seed).map_err(classify)?)
        }
        _ => None,
    };
    let file = File::open(&a.input)
        .map_err(|e| Failure::Data(format!("cannot read {}: {e}", a.input.display())))?;
    let d: Dataset64 =
        io::read_csv(BufReader::new(file)).map_err(|e| Failure::Data(e.to_string()))?;
    if d.n() <= d.p() {
        return Err(Failure::Data(format!(
            "need n > p, got n = {}, p = {}",
            d.n(),
            d.p()
        )));
    }
    let iv: Interval64 = match a.method {
        CiMethod::Alg1 => confidence_interval(&d, a.coef, a.alpha, ThresholdRule::NonAsymptotic),
        CiMethod::Alg1Ga => confidence_interval(&d, a.coef, a.alpha, ThresholdRule::GaussianApprox),
        CiMethod::OlsT => ols_t_interval(&d, a.coef, a.alpha),
        CiMethod::Rb => {
            residual_bootstrap_interval(&d, a.coef, a.alpha, boot.as_ref().expect("rb spec"))
        }
    }
    .map_err(classify)?;
    println!(
        "{},{},{},{},{}",
        iv.method,
        a.coef,
        format_bound(iv.lower, true),
        format_bound(iv.upper, false),
        a.alpha
    );
    Ok(())
}

fn simulate_config(a: &SimulateArgs) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text).map_err(|e| Failure::Usage(e.to_string()))?
        }
        None => {
            let methods = a
                .methods
                .iter()
                .map(|m| m.parse::<BenchMethod>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let noises = a
                .noise_families
                .iter()
                .map(|m| m.parse::<NoiseFamily>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let seed = a.master_seed.unwrap_or_else(|| {
                let s = entropy_seed();
                println!("master_seed={s}");
                s
            });
            let mut cfg = ExperimentConfig::new(
                methods,
                a.n_values.clone(),
                a.p,
                a.epsilons.clone(),
                noises,
                seed,
            );
            cfg.replicates = a.replicates;
            cfg.alpha = a.alpha;
            cfg.design = DesignConfig::Ar1 { rho: a.rho };
            cfg.b =
                a.b.as_deref()
                    .map(|t| parse_coefficients(t, a.p))
                    .transpose()?;
            cfg
        }
    };
    if a.no_timing {
        cfg.timing = false;
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn progress_line(r: &ExperimentRecord) -> String {
    let show = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
    format!(
        "{} n={} eps={} {}: coverage={} length={} unbounded={} errors={}",
        r.method,
        r.n,
        r.epsilon,
        r.noise,
        show(r.coverage),
        show(r.avg_length_covered),
        r.unbounded_count,
        r.error_count
    )
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), Failure> {
    let cfg = simulate_config(&a)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = a.jobs {
        if j == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| Failure::Data(e.to_string()))?;
    let sink = |r: &ExperimentRecord| println!("{}", progress_line(r));
    let records = pool
        .install(|| robci_bench::run_grid(&cfg, Some(&sink)))
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let file = File::create(&a.out)
        .map_err(|e| Failure::Data(format!("cannot write {}: {e}", a.out.display())))?;
    let mut w = BufWriter::new(file);
    robci_bench::write_csv(&records, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Failure::Data(format!("cannot write {}: {e}", a.out.display())))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Ci(a) => cmd_ci(a),
        Command::Simulate(a) => cmd_simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Usage(m) | Failure::Data(m)) = &f;
            eprintln!("error: {m}");
            ExitCode::from(f.code())
        }
    }
}
