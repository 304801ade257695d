use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use blackhats::adversaries::{build_fooling_input, unbounded_adversary, BlockPools};
use blackhats::algorithms::build_algorithm;
use blackhats::analysis::{empirical_ratio, write_csv, BoundSet, REPORT_SCHEMA_VERSION};
use blackhats::automata::{RunMode, DEFAULT_BRANCH_CAP};
use blackhats::functions::sample_block;
use blackhats::{verify, BhInstance, BhParams, Error, FunctionSpec, InstanceFile};

#[derive(Parser, Debug)]
#[command(
    name = "blackhats",
    version,
    about = "Black Hats streaming experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Measure an algorithm's competitive ratio on one instance.
    Run(RunArgs),
    /// Build an adversarial input against a deterministic algorithm.
    Adversary(AdversaryArgs),
    /// Print the closed-form bounds over a grid.
    Bounds(BoundsArgs),
    /// Run the acceptance checks.
    Verify(VerifyArgs),
    /// Generate a random feasible instance file.
    Gen(GenArgs),
}

#[derive(Args, Debug, Serialize)]
#[group(required = true, multiple = false)]
struct Source {
    /// Instance JSON file.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Generator spec, e.g. `fn=partialmod,beta=1,k=8,t=2,r=1,w=3,m=8,seed=7`.
    #[arg(long = "gen")]
    gen: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct Output {
    /// Output file; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Exact,
    Mc,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Serialize)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Algorithm id: guess, const0, const1, reference, bh-pm-1qubit,
    /// random-dfa:S:SEED, history:SEED, bh-rand:FN[@EPS], bh-quantum:FN[@EPS].
    #[arg(long)]
    algorithm: String,
    /// Defaults to `mc` when `--trials` is given.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Branch cap for exact mode.
    #[arg(long, default_value_t = DEFAULT_BRANCH_CAP)]
    cap: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum AdversaryKind {
    Fooling,
    Unbounded,
}

#[derive(Args, Debug, Serialize)]
struct AdversaryArgs {
    #[arg(long, value_enum)]
    kind: AdversaryKind,
    /// Deterministic algorithm id.
    #[arg(long)]
    algorithm: String,
    /// Take parameters and function from an instance file; its blocks are ignored.
    #[arg(long, conflicts_with_all = ["k", "t", "r", "w", "m", "function", "beta"])]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Number of blocks; defaults to `k`.
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, default_value_t = 1)]
    r: u64,
    #[arg(long, default_value_t = 3)]
    w: u64,
    /// Length of every X_i.
    #[arg(long, default_value_t = 6)]
    m: usize,
    #[arg(long, default_value = "partialmod")]
    function: String,
    #[arg(long, default_value_t = 1)]
    beta: u32,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct BoundsArgs {
    /// Block sizes; `--z` with no values gives an empty grid.
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [1usize, 2, 4])]
    z: Vec<usize>,
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [0.0f64])]
    eps: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    t: usize,
    #[arg(long, default_value_t = 1)]
    r: u64,
    #[arg(long, default_value_t = 3)]
    w: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(verify::suites()))]
    suite: Option<String>,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Generator spec, e.g. `fn=eq,k=4,t=2,m=6,seed=1`.
    spec: String,
    #[command(flatten)]
    output: Output,
}

/// A CLI failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::Infeasible { .. } => 2,
            Error::AdversaryFailed { .. } => 3,
            Error::CapExceeded { .. } => 4,
            _ => 1,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args, cli.verbose),
        Command::Adversary(args) => cmd_adversary(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Gen(args) => cmd_gen(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn config_hash<T: Serialize>(command: &str, args: &T) -> String {
    let json = serde_json::to_string(&(command, args)).expect("arguments serialize");
    hex::encode(Sha256::digest(json.as_bytes()))
}

/// Writes the whole output at once, so failures leave no partial file.
fn emit(output: &Output, bytes: &[u8]) -> CliResult<u8> {
    match &output.out {
        Some(path) => {
            std::fs::write(path, bytes).map_err(|e| invalid(format!("{}: {e}", path.display())))?
        }
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(bytes)
                .map_err(|e| invalid(e.to_string()))?;
        }
    }
    Ok(0)
}

fn to_json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(Error::from)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn parse_function(name: &str, beta: Option<u32>, table: Option<&str>) -> CliResult<FunctionSpec> {
    let f = match name {
        "partialmod" => FunctionSpec::Partialmod {
            beta: beta.unwrap_or(1),
        },
        "eq" => FunctionSpec::Eq,
        "table" | "oracle-table" => {
            let table = table.ok_or_else(|| invalid("fn=table needs table=<0|1|x ...>"))?;
            let arity = table.len().trailing_zeros() as usize;
            FunctionSpec::OracleTable {
                arity,
                table: table.to_string(),
            }
        }
        other => return Err(invalid(format!("unknown function '{other}'"))),
    };
    f.validate()?;
    Ok(f)
}

/// Parses `key=value` pairs and draws a feasible random instance.
fn generate(spec: &str) -> CliResult<(BhInstance, FunctionSpec)> {
    let mut fields = std::collections::BTreeMap::new();
    for part in spec.split(',').filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| invalid(format!("malformed field '{part}'")))?;
        if fields.insert(key.trim(), value.trim()).is_some() {
            return Err(invalid(format!("duplicate field '{key}'")));
        }
    }
    const KEYS: [&str; 10] = [
        "fn", "beta", "table", "k", "t", "r", "w", "m", "seed", "vmax",
    ];
    if let Some(key) = fields.keys().find(|k| !KEYS.contains(k)) {
        return Err(invalid(format!("unknown field '{key}'")));
    }
    let num = |key: &str, default: Option<u64>| -> CliResult<u64> {
        match fields.get(key) {
            Some(v) => v
                .parse()
                .map_err(|_| invalid(format!("{key}={v} is not a number"))),
            None => default.ok_or_else(|| invalid(format!("missing field '{key}'"))),
        }
    };
    let beta = fields
        .get("beta")
        .map(|_| num("beta", None))
        .transpose()?
        .map(|b| b as u32);
    let f = parse_function(
        fields.get("fn").copied().unwrap_or("partialmod"),
        beta,
        fields.get("table").copied(),
    )?;
    let k = num("k", None)? as usize;
    let params = BhParams::uniform(
        k,
        num("t", Some(k as u64))? as usize,
        num("r", Some(1))?,
        num("w", Some(3))?,
        num("m", None)? as usize,
    )?;
    let vmax = fields.get("vmax").map(|_| num("vmax", None)).transpose()?;
    let mut rng = ChaCha8Rng::seed_from_u64(num("seed", None)?);
    let blocks = params
        .m()
        .iter()
        .map(|&m| sample_block(&f, m, vmax, &mut rng))
        .collect::<blackhats::Result<Vec<_>>>()?;
    Ok((BhInstance::encode_feasible(params, blocks, &f)?, f))
}

fn load(source: &Source) -> CliResult<(BhInstance, FunctionSpec, String)> {
    match (&source.instance, &source.gen) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            let (inst, f) = InstanceFile::from_json(&text)?.build()?;
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok((inst, f, id))
        }
        (None, Some(spec)) => {
            let (inst, f) = generate(spec)?;
            Ok((inst, f, spec.clone()))
        }
        _ => Err(invalid("give exactly one of --instance and --gen")),
    }
}

fn cmd_run(args: &RunArgs, verbose: bool) -> CliResult<u8> {
    let mode = match (args.mode, args.trials) {
        (Some(Mode::Exact), Some(_)) => return Err(invalid("--trials only applies to --mode mc")),
        (Some(Mode::Exact), None) | (None, None) => RunMode::Exact { cap: args.cap },
        (_, trials) => {
            let trials = trials.ok_or_else(|| invalid("--mode mc needs --trials"))?;
            if trials == 0 {
                return Err(invalid("--trials must be at least 1"));
            }
            let seed = args
                .seed
                .ok_or_else(|| invalid("--mode mc needs an explicit --seed"))?;
            RunMode::sampled(seed, trials)
        }
    };
    let (inst, f, instance_id) = load(&args.source)?;
    let alg = build_algorithm(&args.algorithm, inst.params(), &f)?;
    if verbose {
        eprintln!(
            "running {} on {} ({} symbols)",
            alg.name(),
            instance_id,
            inst.stream().len()
        );
    }
    let mut report = empirical_ratio(&alg, &inst, &f, mode, &instance_id)?;
    report.config_hash = config_hash("run", args);
    let bytes = match args.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(std::slice::from_ref(&report), &mut buf)?;
            buf
        }
        Format::Json => to_json(&report)?,
    };
    emit(&args.output, &bytes)
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    kind: &'a str,
    config_hash: String,
    rng_id: &'static str,
    schema_version: u32,
    report: T,
}

fn cmd_adversary(args: &AdversaryArgs) -> CliResult<u8> {
    let (params, f) = match &args.instance {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            let file = InstanceFile::from_json(&text)?;
            let params = BhParams::new(file.k, file.t, file.r, file.w, file.m.clone())?;
            (params, file.function)
        }
        None => (
            BhParams::uniform(args.k, args.t.unwrap_or(args.k), args.r, args.w, args.m)?,
            parse_function(&args.function, Some(args.beta), None)?,
        ),
    };
    let alg = build_algorithm(&args.algorithm, &params, &f)?;
    let mut runner = alg
        .instantiate()
        .ok_or_else(|| invalid(format!("'{}' is not deterministic", alg.name())))?;
    let hash = config_hash("adversary", args);
    let bytes = match args.kind {
        AdversaryKind::Fooling => {
            let report = build_fooling_input(runner.as_mut(), &params, &f)?.into_result()?;
            to_json(&Envelope {
                kind: "fooling",
                config_hash: hash,
                rng_id: "none",
                schema_version: REPORT_SCHEMA_VERSION,
                report,
            })?
        }
        AdversaryKind::Unbounded => {
            let pools = BlockPools::from_domain(&f, params.m())?;
            let report = unbounded_adversary(runner.as_mut(), &params, &f, &pools)?;
            to_json(&Envelope {
                kind: "unbounded",
                config_hash: hash,
                rng_id: "none",
                schema_version: REPORT_SCHEMA_VERSION,
                report,
            })?
        }
    };
    emit(&args.output, &bytes)
}

#[derive(Serialize)]
struct BoundRow {
    z: usize,
    t: usize,
    r: u64,
    w: u64,
    eps: f64,
    c1: f64,
    c2: f64,
    cq: f64,
    c_det_unbounded: f64,
}

fn cmd_bounds(args: &BoundsArgs) -> CliResult<u8> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    writer
        .write_record([
            "z",
            "t",
            "r",
            "w",
            "eps",
            "c1",
            "c2",
            "cq",
            "c_det_unbounded",
        ])
        .map_err(|e| invalid(e.to_string()))?;
    for &z in &args.z {
        for &eps in &args.eps {
            let b = BoundSet::evaluate(z, args.t, args.r, args.w, eps)?;
            let row = BoundRow {
                z,
                t: args.t,
                r: args.r,
                w: args.w,
                eps,
                c1: b.c1,
                c2: b.c2,
                cq: b.cq,
                c_det_unbounded: b.c_det_unbounded,
            };
            writer.serialize(row).map_err(|e| invalid(e.to_string()))?;
        }
    }
    let bytes = writer.into_inner().map_err(|e| invalid(e.to_string()))?;
    emit(&args.output, &bytes)
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<u8> {
    let results = verify::run_suite(args.suite.as_deref());
    for r in &results {
        println!("{r}");
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", results.len());
    Ok(if passed == results.len() { 0 } else { 1 })
}

fn cmd_gen(args: &GenArgs) -> CliResult<u8> {
    let (inst, f) = generate(&args.spec)?;
    emit(&args.output, &to_json(&InstanceFile::new(&inst, &f))?)
}
