//! Command-line front end. Every subcommand writes a CSV body followed by a
//! `# seed=..,version=..,model_hash=..` trailer.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use planted_core::bethe::{population_dynamics, Init, PopulationConfig};
use planted_core::exact::{exact_audit, gibbs_measure};
use planted_core::functionals::{check_bal, xi, xi_sup};
use planted_core::graph::{sample_iid, sample_m, sample_teacher_student};
use planted_core::mc::{quenched_free_entropy, QuenchedEstimate, Variant};
use planted_core::pinning::verify_pinning_lemma_caps;
use planted_core::rng::RngStream;
use planted_core::thresholds::{locate_d_cond, CondBracket, ThresholdConfig};
use planted_core::witness::{check_validity, ValidityWitness};
use planted_core::zoo::{parse_zoo, standard_zoo};
use planted_core::{Error, ModelSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RESOURCE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

/// Tolerance of the `BAL` check in `model check` and `xi-sup`.
const BAL_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(name = "planted", version, about = "Planted sparse random factor graphs: Bethe free entropy, thresholds, exact audits")]
struct Cli {
    /// Worker threads (0 = one per core). Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the CSV here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// ModelSpec JSON file.
    spec: Option<PathBuf>,

    /// Zoo shorthand such as `nae-sat:k=3,eps=0.5`; `all` selects the standard zoo.
    #[arg(long, conflicts_with = "spec")]
    zoo: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Model validation.
    Model {
        #[command(subcommand)]
        action: ModelAction,
    },
    /// `Ξ_sup`, its maximizer and the BAL check.
    XiSup(ModelArgs),
    /// Population dynamics trace.
    Bethe(BetheArgs),
    /// `δ*` sweep and the `d_cond` bracket.
    Threshold(ThresholdArgs),
    /// Quenched free entropy by Monte Carlo.
    Mc(McArgs),
    /// Exact identities by enumeration.
    Exact {
        #[command(subcommand)]
        action: ExactAction,
    },
    /// Pinning lemma on Gibbs measures of sampled graphs.
    Pinning {
        #[command(subcommand)]
        action: PinningAction,
    },
}

#[derive(Subcommand, Debug)]
enum ModelAction {
    Check {
        #[command(flatten)]
        model: ModelArgs,
        /// Validity witness JSON to check against the model.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum ExactAction {
    Audit {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        m: Vec<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum PinningAction {
    Audit {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
        theta: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        ell: Vec<usize>,
        /// Average degree of the teacher-student graphs.
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        #[arg(long, default_value_t = 20)]
        graphs: usize,
        /// Pin draws per check when exact enumeration is out of reach.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

#[derive(Args, Debug)]
struct BetheArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    d: f64,
    #[arg(long = "N", default_value_t = 10_000)]
    size: usize,
    #[arg(long, default_value_t = 200)]
    sweeps: usize,
    #[arg(long, default_value_t = 10_000)]
    eval_samples: usize,
    #[arg(long, default_value_t = 0.0)]
    damping: f64,
    /// point-mass, vertex-biased or uniform-random.
    #[arg(long, default_value = "point-mass")]
    init: String,
    /// Dump the final population as JSON.
    #[arg(long)]
    population_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    d_max: Option<f64>,
    #[arg(long, default_value_t = 10)]
    grid: usize,
    /// Bisect the bracket down to this width.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "N", default_value_t = 2000)]
    size: usize,
    #[arg(long, default_value_t = 30)]
    sweeps: usize,
    #[arg(long, default_value_t = 20_000)]
    eval_samples: usize,
    #[arg(long, default_value_t = 3)]
    restarts: usize,
}

#[derive(Args, Debug)]
struct McArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    d: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "null,planted_iid,planted_nishimori")]
    variant: Vec<Variant>,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Validation(String),
    Resource(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Resource(_) => EXIT_RESOURCE,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Validation(m) | Failure::Resource(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceLimit(_) => Failure::Resource(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

/// A finished command: CSV body, hashed models, and whether every check passed.
struct Output {
    body: String,
    models: Vec<ModelSpec>,
    passed: bool,
    notes: Vec<String>,
}

/// Runs the CLI with `argv` (program name first), writing to stdout or `--out`.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    execute(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// `run` with explicit sinks for the CSV and for diagnostics.
pub fn execute<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start {} workers: {e}", cli.workers);
            return EXIT_RESOURCE;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(output) => {
            for note in &output.notes {
                let _ = writeln!(err, "{note}");
            }
            let text = format!("{}{}", output.body, trailer(cli.seed, &output.models));
            let written = match &cli.out {
                Some(path) => std::fs::write(path, text.as_bytes()),
                None => out.write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: writing output: {e}");
                return EXIT_VALIDATION;
            }
            if output.passed {
                EXIT_OK
            } else {
                EXIT_VALIDATION
            }
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

/// Hex SHA-256 of the canonical JSON of every model, newline separated.
pub fn model_hash(models: &[ModelSpec]) -> String {
    let mut hasher = Sha256::new();
    for (i, m) in models.iter().enumerate() {
        if i > 0 {
            hasher.update(b"\n");
        }
        hasher.update(m.to_json().as_bytes());
    }
    hasher.finalize().iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn trailer(seed: u64, models: &[ModelSpec]) -> String {
    format!("# seed={seed},version={},model_hash={}\n", env!("CARGO_PKG_VERSION"), model_hash(models))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn load_models(args: &ModelArgs) -> Result<Vec<(String, ModelSpec)>, Failure> {
    if let Some(path) = &args.spec {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        return Ok(vec![(path.display().to_string(), ModelSpec::from_json(&text)?)]);
    }
    if args.zoo.is_empty() {
        return Err(Failure::Usage("give a ModelSpec JSON path or --zoo".into()));
    }
    let mut models = Vec::new();
    for z in &args.zoo {
        if z == "all" {
            models.extend(standard_zoo().into_iter().map(|(name, m)| (name.to_string(), m)));
        } else {
            models.push((z.clone(), parse_zoo(z)?));
        }
    }
    Ok(models)
}

fn load_one(args: &ModelArgs) -> Result<(String, ModelSpec), Failure> {
    let mut models = load_models(args)?;
    if models.len() != 1 {
        return Err(Failure::Usage(format!("this subcommand takes one model, got {}", models.len())));
    }
    Ok(models.remove(0))
}

fn dispatch(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Model { action: ModelAction::Check { model, witness } } => model_check(model, witness.as_ref()),
        Command::XiSup(model) => xi_sup_cmd(model),
        Command::Bethe(args) => bethe_cmd(args, cli.seed),
        Command::Threshold(args) => threshold_cmd(args, cli.seed),
        Command::Mc(args) => mc_cmd(args, cli.seed),
        Command::Exact { action: ExactAction::Audit { model, n, m } } => exact_cmd(model, n, m),
        Command::Pinning { action: PinningAction::Audit { model, n, theta, ell, d, graphs, samples } } => {
            pinning_cmd(model, *n, theta, ell, *d, *graphs, *samples, cli.seed)
        }
    }
}

fn status(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn model_check(args: &ModelArgs, witness: Option<&PathBuf>) -> Result<Output, Failure> {
    let (_, model) = load_one(args)?;
    let bal = check_bal(&model, BAL_TOL);
    let mut rows = vec![("invariants", "pass"), ("BAL", status(bal))];
    let mut passed = bal;
    if let Some(path) = witness {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        let w: ValidityWitness = serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("witness: {e}")))?;
        let valid = check_validity(&model, &w)?;
        passed &= valid;
        rows.push(("witness", status(valid)));
    }
    let mut body = String::from("check,status\n");
    let mut notes = Vec::new();
    for (check, st) in rows {
        body.push_str(&format!("{check},{st}\n"));
        notes.push(format!("{check}: {st}"));
    }
    Ok(Output { body, models: vec![model], passed, notes })
}

fn xi_sup_cmd(args: &ModelArgs) -> Result<Output, Failure> {
    let (_, model) = load_one(args)?;
    let sup = xi_sup(&model);
    let at_star = xi(&model, model.gamma_star().as_slice())?;
    let maximizer: Vec<String> = sup.maximizer.as_slice().iter().map(|x| format!("{x:?}")).collect();
    let body = format!(
        "xi_sup,xi_gamma_star,bal,maximizer\n{:?},{:?},{},{}\n",
        sup.value,
        at_star,
        status(check_bal(&model, BAL_TOL)),
        maximizer.join(";")
    );
    Ok(Output { body, models: vec![model], passed: true, notes: vec![] })
}

fn bethe_cmd(args: &BetheArgs, seed: u64) -> Result<Output, Failure> {
    let (_, model) = load_one(&args.model)?;
    let init = match args.init.as_str() {
        "point-mass" => Init::PointMass,
        "vertex-biased" => Init::VertexBiased,
        "uniform-random" => Init::UniformRandom,
        other => return Err(Failure::Usage(format!("unknown init {other:?}"))),
    };
    let config = PopulationConfig {
        size: args.size,
        sweeps: args.sweeps,
        damping: args.damping,
        seed,
        eval_samples: args.eval_samples,
        init,
    };
    let (pop, trace) = population_dynamics(&model, args.d, &config)?;
    let mut body = String::from("sweep,b_hat,std_error\n");
    for (t, e) in trace.iter().enumerate() {
        body.push_str(&format!("{},{:?},{:?}\n", t + 1, e.value, e.std_error));
    }
    if let Some(path) = &args.population_out {
        std::fs::write(path, pop.to_json()).map_err(|e| Failure::Validation(format!("writing population: {e}")))?;
    }
    Ok(Output { body, models: vec![model], passed: true, notes: vec![] })
}

fn threshold_cmd(args: &ThresholdArgs, seed: u64) -> Result<Output, Failure> {
    let (_, model) = load_one(&args.model)?;
    let config = ThresholdConfig {
        population: PopulationConfig {
            size: args.size,
            sweeps: args.sweeps,
            eval_samples: args.eval_samples,
            seed,
            ..Default::default()
        },
        restarts: args.restarts,
        d_max: args.d_max,
        grid: args.grid,
        tolerance: args.tol,
    };
    let report = locate_d_cond(&model, &config)?;
    let note = match report.d_cond_bracket {
        CondBracket::NotDetected { d_max } => format!("d_cond: not detected on [0, {d_max}]"),
        CondBracket::Bracket { lo, hi } => format!("d_cond: bracket ({lo}, {hi}]"),
    };
    Ok(Output { body: report.to_csv(), models: vec![model], passed: true, notes: vec![note] })
}

fn mc_cmd(args: &McArgs, seed: u64) -> Result<Output, Failure> {
    let (_, model) = load_one(&args.model)?;
    if args.n.is_empty() || args.d.is_empty() {
        return Err(Failure::Usage("--n and --d are required".into()));
    }
    let root = RngStream::new(seed, 0);
    let mut body = format!("{}\n", QuenchedEstimate::CSV_HEADER);
    for &n in &args.n {
        for &d in &args.d {
            for &v in &args.variant {
                let stream = root.fork(&format!("n={n},d={d},{v}"));
                let e = quenched_free_entropy(&model, n, d, v, args.samples, &stream)?;
                body.push_str(&e.csv_row());
                body.push('\n');
            }
        }
    }
    Ok(Output { body, models: vec![model], passed: true, notes: vec![] })
}

fn exact_cmd(args: &ModelArgs, ns: &[usize], ms: &[usize]) -> Result<Output, Failure> {
    let models = load_models(args)?;
    let mut body = String::from("model,n,m,identity,residual\n");
    let mut passed = true;
    let mut notes = Vec::new();
    for (label, model) in &models {
        for &n in ns {
            for &m in ms {
                for row in exact_audit(model, n, m)? {
                    if !row.pass() {
                        passed = false;
                        notes.push(format!("{label} n={n} m={m}: {} residual {:e} > {:e}", row.identity, row.residual, row.tolerance));
                    }
                    body.push_str(&format!("{},{n},{m},{},{:?}\n", csv_field(label), row.identity, row.residual));
                }
            }
        }
    }
    Ok(Output { body, models: models.into_iter().map(|(_, m)| m).collect(), passed, notes })
}

#[allow(clippy::too_many_arguments)]
fn pinning_cmd(
    args: &ModelArgs,
    n: usize,
    thetas: &[f64],
    ells: &[usize],
    d: f64,
    graphs: usize,
    samples: usize,
    seed: u64,
) -> Result<Output, Failure> {
    let models = load_models(args)?;
    let root = RngStream::new(seed, 0);
    let mut body = String::from("model,n,graph,ell,theta,lhs,se,rhs,pass\n");
    let mut passed = true;
    for (label, model) in &models {
        let stream = root.fork(label);
        for g in 0..graphs {
            let mut rng = stream.fork("graph").substream(g as u64).rng();
            let sigma = sample_iid(model, n, &mut rng);
            let m = sample_m(model, d, n, &mut rng)?;
            let mu = gibbs_measure(model, &sample_teacher_student(model, &sigma, m, &mut rng))?;
            for &ell in ells {
                let lemma = stream.fork("lemma").substream(g as u64).fork(&format!("ell={ell}"));
                for c in verify_pinning_lemma_caps(&mu, ell, thetas, samples, &lemma)? {
                    passed &= c.pass();
                    body.push_str(&format!(
                        "{},{n},{g},{ell},{:?},{:?},{:?},{:?},{}\n",
                        csv_field(label),
                        c.theta_cap,
                        c.lhs,
                        c.std_error,
                        c.rhs,
                        c.pass()
                    ));
                }
            }
        }
    }
    Ok(Output { body, models: models.into_iter().map(|(_, m)| m).collect(), passed, notes: vec![] })
}
