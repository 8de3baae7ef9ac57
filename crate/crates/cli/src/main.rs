use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sparsetest::hankel::{hankel_det_reference, hankel_det_reference_exact};
use sparsetest::harness::{
    csv_string, gen_instance, output_dir, run_experiment, run_tester, write_outputs, ExperimentConfig, Family,
    TesterKind,
};
use sparsetest::oracle::{derive_seed, sample_gaussian, stream_from_seed};
use sparsetest::reference::{
    anti_concentration_bound, anti_concentration_probe, boundedness_probe, brute_force_influential_coords,
    hard_instance_disjointness, l0_distance_f2, l1_linear_bounds_check, mc_l1_distance, rational_to_f64,
};
use sparsetest::{Config, FunctionInstance, NoiseModel, OracleHandle};

const EXIT_ACCEPT: u8 = 0;
const EXIT_REJECT: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "sparsetest", version, about = "Property testers for sparse real functions under approximate queries")]
struct Cli {
    /// Master seed; every random stream is derived from it (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Emit compact machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Output location (a directory for `experiment` and `generate`, a file otherwise).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one tester on one instance.
    Test(TestArgs),
    /// Run a seeded Monte Carlo experiment from a TOML or JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
    /// Generate random YES or NO instances as JSON fixtures.
    Generate(GenerateArgs),
    /// Brute-force reference oracles.
    #[command(subcommand)]
    Reference(ReferenceCommand),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NoiseKind {
    Exact,
    Uniform,
    Offset,
    Round,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Yes,
    No,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Yes => Family::Yes,
            FamilyArg::No => Family::No,
        }
    }
}

#[derive(Debug, Args)]
struct TestArgs {
    tester: TesterKind,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    d: u32,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    /// η assumed by the tester and used by the noise model.
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    /// Instance JSON file; without it an instance is generated from `--family`.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FamilyArg::Yes)]
    family: FamilyArg,
    /// Dimension of a generated instance.
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, value_enum, default_value_t = NoiseKind::Exact)]
    noise: NoiseKind,
    /// Mantissa bits for `--noise round`.
    #[arg(long, default_value_t = 40)]
    bits: u32,
    /// Tester constant overrides, `name=value`.
    #[arg(long = "set", value_parser = parse_override)]
    overrides: Vec<(String, f64)>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    tester: TesterKind,
    #[arg(long, value_enum, default_value_t = FamilyArg::Yes)]
    family: FamilyArg,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    d: u32,
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    count: u64,
}

#[derive(Debug, Subcommand)]
enum ReferenceCommand {
    /// Monte Carlo ℓ1 distance under N(0, I).
    L1 {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// ℓ1 distance bounds for two linear forms given as comma-separated coefficients.
    LinearBounds {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        b: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Exact ℓ0 distance between two parities over F2^n.
    #[command(name = "l0-f2")]
    L0F2 {
        #[arg(long, value_delimiter = ',')]
        f_support: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        g_support: Vec<usize>,
        #[arg(long)]
        n: usize,
    },
    /// Coordinates the instance depends on.
    Influential {
        #[arg(long)]
        f: PathBuf,
    },
    /// Hankel determinant by subset expansion at a seeded Gaussian point.
    HankelDet {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        t: usize,
    },
    /// The instance `sum_A x_i - sum_B x_i`.
    Disjointness {
        #[arg(long, value_delimiter = ',')]
        a: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        b: Vec<usize>,
        #[arg(long)]
        n: usize,
    },
    /// Empirical Pr[|f(x) - t| <= eps] against the anti-concentration bound.
    AntiConcentration {
        #[arg(long)]
        f: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
    },
    /// Largest |f(x)| / ||x||^d over the ball of radius 2 sqrt(n).
    Boundedness {
        #[arg(long)]
        f: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Lib(#[from] sparsetest::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl Cli {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn parse_override(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v = v.trim().parse::<f64>().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn read_instance(path: &Path) -> CliResult<FunctionInstance> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    Ok(FunctionInstance::from_json(&text)?)
}

fn noise_model(kind: NoiseKind, eta: f64, bits: u32, seed: u64) -> CliResult<NoiseModel> {
    let needs_eta = |m: NoiseModel| {
        if eta > 0.0 && eta.is_finite() {
            Ok(m)
        } else {
            Err(CliError::Usage("this noise model needs --eta > 0".into()))
        }
    };
    match kind {
        NoiseKind::Exact => Ok(NoiseModel::Exact),
        NoiseKind::Uniform => needs_eta(NoiseModel::UniformBounded { eta }),
        NoiseKind::Offset => needs_eta(NoiseModel::FixedOffset { eta, sign_seed: seed }),
        NoiseKind::Round => Ok(NoiseModel::RoundToPrecision { bits }),
    }
}

/// Prints `value` (compact with `--json`, pretty otherwise) and writes it to
/// `--out` when given.
fn emit(cli: &Cli, value: &Value) -> CliResult<()> {
    let text = if cli.json {
        serde_json::to_string(value).map_err(sparsetest::Error::from)?
    } else {
        serde_json::to_string_pretty(value).map_err(sparsetest::Error::from)?
    };
    println!("{text}");
    if let Some(path) = &cli.out {
        std::fs::write(path, format!("{text}\n")).map_err(|source| CliError::Io { path: path.clone(), source })?;
    }
    Ok(())
}

fn cmd_test(cli: &Cli, a: &TestArgs) -> CliResult<u8> {
    let mut cfg = Config::default();
    for (k, v) in &a.overrides {
        cfg.apply_override(k, *v)?;
    }
    let instance = match &a.instance {
        Some(path) => read_instance(path)?,
        None => gen_instance(a.tester, a.family.into(), a.k, a.d, a.n, &mut stream_from_seed(derive_seed(cli.seed(), 0)))?,
    };
    let noise = noise_model(a.noise, a.eta, a.bits, cli.seed())?;
    let mut oracle = OracleHandle::new(instance, noise, derive_seed(cli.seed(), 1));
    let mut rng = stream_from_seed(derive_seed(cli.seed(), 2));
    let verdict = run_tester(a.tester, &mut oracle, a.k, a.d, a.epsilon, a.eta, &cfg, &mut rng)?;
    let accepted = verdict.is_accept();
    emit(cli, &serde_json::to_value(&verdict).map_err(sparsetest::Error::from)?)?;
    Ok(if accepted { EXIT_ACCEPT } else { EXIT_REJECT })
}

fn cmd_experiment(cli: &Cli, config: &Path) -> CliResult<u8> {
    let mut exp = ExperimentConfig::from_path(config)?;
    if let Some(seed) = cli.seed {
        exp.seed = seed;
    }
    let record = run_experiment(&exp)?;
    let stem = format!("{}-{}-{}", exp.tester, exp.family, &record.config_hash[..12]);
    let dir = output_dir(cli.out.as_deref());
    let (csv_path, json_path) = write_outputs(&record, &dir, &stem)?;
    if cli.json {
        println!("{}", serde_json::to_string(&record.summary).map_err(sparsetest::Error::from)?);
    } else {
        print!("{}", csv_string(&record)?);
        eprintln!("wrote {} and {}", csv_path.display(), json_path.display());
    }
    Ok(EXIT_ACCEPT)
}

fn cmd_generate(cli: &Cli, a: &GenerateArgs) -> CliResult<u8> {
    if a.count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    let family: Family = a.family.into();
    let instances = (0..a.count)
        .map(|i| gen_instance(a.tester, family, a.k, a.d, a.n, &mut stream_from_seed(derive_seed(cli.seed(), i))))
        .collect::<sparsetest::Result<Vec<_>>>()?;
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
            for (i, f) in instances.iter().enumerate() {
                let path = dir.join(format!("{}-{family}-{i}.json", a.tester));
                std::fs::write(&path, f.to_json() + "\n").map_err(|source| CliError::Io { path: path.clone(), source })?;
                println!("{}", path.display());
            }
        }
        None => {
            for f in &instances {
                println!("{}", f.to_json());
            }
        }
    }
    Ok(EXIT_ACCEPT)
}

fn cmd_reference(cli: &Cli, r: &ReferenceCommand) -> CliResult<u8> {
    let mut rng = stream_from_seed(cli.seed());
    let value = match r {
        ReferenceCommand::L1 { f, g, samples } => {
            let est = mc_l1_distance(&read_instance(f)?, &read_instance(g)?, *samples, &mut rng)?;
            if !cli.json && cli.out.is_none() {
                println!("{} ± {}", est.mean, est.stderr);
                return Ok(EXIT_ACCEPT);
            }
            json!({ "distance": est.mean, "stderr": est.stderr, "samples": est.samples })
        }
        ReferenceCommand::LinearBounds { a, b, samples } => {
            let res = l1_linear_bounds_check(a, b, *samples, &mut rng)?;
            serde_json::to_value(res).map_err(sparsetest::Error::from)?
        }
        ReferenceCommand::L0F2 { f_support, g_support, n } => {
            let fs: BTreeSet<usize> = f_support.iter().copied().collect();
            let gs: BTreeSet<usize> = g_support.iter().copied().collect();
            let d = l0_distance_f2(&fs, &gs, *n)?;
            json!({ "numer": d.numer(), "denom": d.denom(), "distance": *d.numer() as f64 / *d.denom() as f64 })
        }
        ReferenceCommand::Influential { f } => {
            let coords = brute_force_influential_coords(&read_instance(f)?.to_polynomial());
            json!({ "influential": coords })
        }
        ReferenceCommand::HankelDet { f, t } => {
            let poly = read_instance(f)?.to_polynomial();
            let u = sample_gaussian(poly.n(), &mut rng);
            let exact = hankel_det_reference_exact(&poly, &u, *t)?;
            json!({
                "u": &*u,
                "t": t,
                "det": hankel_det_reference(&poly, &u, *t)?,
                "det_exact": exact.to_string(),
                "det_exact_f64": rational_to_f64(&exact),
            })
        }
        ReferenceCommand::Disjointness { a, b, n } => {
            let a: BTreeSet<usize> = a.iter().copied().collect();
            let b: BTreeSet<usize> = b.iter().copied().collect();
            let h = hard_instance_disjointness(&a, &b, *n)?;
            let sparsity = h.to_polynomial().sparsity();
            json!({ "instance": serde_json::from_str::<Value>(&h.to_json()).map_err(sparsetest::Error::from)?, "sparsity": sparsity })
        }
        ReferenceCommand::AntiConcentration { f, t, eps, samples } => {
            let poly = read_instance(f)?.to_polynomial();
            let p = anti_concentration_probe(&poly, *t, *eps, *samples, &mut rng)?;
            json!({ "probability": p, "bound": anti_concentration_bound(&poly, *eps), "samples": samples })
        }
        ReferenceCommand::Boundedness { f, samples } => {
            let poly = read_instance(f)?.to_polynomial();
            json!({ "ratio": boundedness_probe(&poly, *samples, &mut rng)?, "samples": samples })
        }
    };
    emit(cli, &value)?;
    Ok(EXIT_ACCEPT)
}

fn run(cli: &Cli) -> CliResult<u8> {
    match &cli.command {
        Command::Test(a) => cmd_test(cli, a),
        Command::Experiment { config } => cmd_experiment(cli, config),
        Command::Generate(a) => cmd_generate(cli, a),
        Command::Reference(r) => cmd_reference(cli, r),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_ACCEPT };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
