//! Command-line front end. Each subcommand parses its flags, validates them,
//! calls into `qfgcpe` and writes CSV or JSON.
//!
//! Exit codes: 0 on success, 2 for usage errors (bad flags, parameters or
//! domains, all detected before any computation), 1 when the computation
//! itself fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qfgcpe::chaos::{bifurcation_points, entropy_sweep, range_grid, OrbitConfig, SweepSpec};
use qfgcpe::entropy::{dqfgcpe, qfgcpe, DynamicQuery, EntropyQuery, Method};
use qfgcpe::estimator::{bootstrap_ci, estimate, validate_bootstrap, EstimateResult};
use qfgcpe::montecarlo::{report_to_csv, report_to_json, run_scenario, Scenario};
use qfgcpe::orderings::{
    check_order, check_pair, check_theorem_implication, curated_suite, default_v_grid, OrderKind, OrderOptions,
    Theorem, TheoremInputs,
};
use qfgcpe::{make_model, ModelParams, QuantileModel, Sample, Transform};

mod output;

use output::*;

#[derive(Debug, Parser)]
#[command(name = "qfgcpe", version, about = "Quantile-based fractional generalized cumulative past entropy")]
pub struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Output file (written atomically); stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; tables default to csv, single results to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Static entropy of a model.
    Compute(ComputeArgs),
    /// Dynamic entropy at one or more v.
    Dynamic(DynamicArgs),
    /// Nonparametric estimate from a sample file, optionally with a bootstrap interval.
    Estimate(EstimateArgs),
    /// Monte Carlo bias/MSE/coverage study.
    Simulate(SimulateArgs),
    /// Estimator on logistic-map orbits over a grid of c.
    Chaos(ChaosArgs),
    /// Stochastic orders, theorem checks and the curated pair suite.
    Orderings(Box<OrderingsArgs>),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Distribution name, e.g. exponential, davies, govindarajalu.
    #[arg(long)]
    dist: String,
    /// Comma-separated key=value pairs, e.g. lambda=1.
    #[arg(long, allow_hyphen_values = true)]
    params: String,
}

#[derive(Debug, Args)]
struct ComputeArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    eta: f64,
    /// auto, closed_form or quadrature.
    #[arg(long, default_value = "auto")]
    method: Method,
}

#[derive(Debug, Args)]
struct DynamicArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    eta: f64,
    /// One value, a comma list, or lo:hi:step.
    #[arg(long)]
    v: String,
    #[arg(long, default_value = "auto")]
    method: Method,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// One number per line, optional header `x`; `-` reads stdin.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    eta: f64,
    /// Number of bootstrap resamples; no interval when absent.
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long, default_value_t = 0.95, requires = "bootstrap")]
    level: f64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    eta: f64,
    /// Sample sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Replications per sample size.
    #[arg(long, default_value_t = 500)]
    reps: usize,
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long, default_value_t = 0.95, requires = "bootstrap")]
    level: f64,
}

#[derive(Debug, Args)]
struct OrbitArgs {
    /// lo:hi:step or a comma list.
    #[arg(long, default_value = "1:4:0.005")]
    c_grid: String,
    #[arg(long, default_value_t = 0.1)]
    x0: f64,
    #[arg(long, default_value_t = 1000)]
    burn: usize,
    #[arg(long, default_value_t = 5000)]
    len: usize,
}

#[derive(Debug, Args)]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
struct ChaosArgs {
    #[command(subcommand)]
    action: Option<ChaosAction>,
    #[command(flatten)]
    orbit: OrbitArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    eta: Vec<f64>,
}

#[derive(Debug, Subcommand)]
enum ChaosAction {
    /// Last `keep` iterates of each orbit (columns c,x).
    Bifurcation {
        #[command(flatten)]
        orbit: OrbitArgs,
        #[arg(long, default_value_t = 200)]
        keep: usize,
    },
}

#[derive(Debug, Args)]
struct PairArgs {
    #[arg(long, required = true)]
    dist_a: Option<String>,
    #[arg(long, required = true, allow_hyphen_values = true)]
    params_a: Option<String>,
    #[arg(long, required = true)]
    dist_b: Option<String>,
    #[arg(long, required = true, allow_hyphen_values = true)]
    params_b: Option<String>,
}

#[derive(Debug, Args)]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
struct OrderingsArgs {
    #[command(subcommand)]
    action: Option<OrderingsAction>,
    /// HQ, RHQ, disp, QFGCPE or DQFGCPE.
    #[arg(long, required = true)]
    kind: Option<OrderKind>,
    #[command(flatten)]
    pair: PairArgs,
    /// Required for QFGCPE and DQFGCPE.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    grid: usize,
    /// v points for DQFGCPE: comma list or lo:hi:step.
    #[arg(long)]
    v_grid: Option<String>,
}

#[derive(Debug, Subcommand)]
enum OrderingsAction {
    /// Hypothesis and conclusion of one theorem on a model pair.
    Theorem {
        /// T2_2, T2_3, T3_2, T3_3 or T3_4.
        #[arg(long)]
        theorem: Theorem,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        eta: f64,
        /// identity, square, sqrt, log1p, power:<beta> or linear:<a>.
        #[arg(long)]
        psi: Option<Transform>,
        #[arg(long, default_value_t = 1000)]
        grid: usize,
    },
    /// Every theorem on the built-in ten-pair suite.
    Suite,
}

/// Failure of a run, carrying its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Compute(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Compute(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Compute(m) => m,
        }
    }
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn compute(e: impl ToString) -> Failure {
    Failure::Compute(e.to_string())
}

/// Parses `key=value,key=value` for the distribution `dist`.
pub fn parse_params(dist: &str, text: &str) -> qfgcpe::Result<ModelParams> {
    let mut pairs = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = item.split_once('=').ok_or_else(|| {
            qfgcpe::Error::InvalidArgument(format!("`{item}` is not of the form key=value"))
        })?;
        let value: f64 = value.trim().parse().map_err(|_| {
            qfgcpe::Error::InvalidArgument(format!("value of `{}` is not a number: `{}`", key.trim(), value.trim()))
        })?;
        pairs.push((key.trim().to_string(), value));
    }
    let params = ModelParams::from_pairs(dist, &pairs)?;
    params.validate()?;
    Ok(params)
}

fn build_model(dist: &str, params: &str) -> Result<QuantileModel, Failure> {
    make_model(parse_params(dist, params).map_err(usage)?).map_err(usage)
}

/// A comma list, or `lo:hi:step`.
fn parse_grid(text: &str) -> Result<Vec<f64>, Failure> {
    let nums = |sep: char| -> Result<Vec<f64>, Failure> {
        text.split(sep)
            .map(|s| s.trim().parse::<f64>().map_err(|_| usage(format!("bad number `{s}` in grid `{text}`"))))
            .collect()
    };
    if text.contains(':') {
        match nums(':')?.as_slice() {
            &[lo, hi, step] => range_grid(lo, hi, step).map_err(usage),
            _ => Err(usage(format!("grid `{text}` must be lo:hi:step"))),
        }
    } else {
        nums(',')
    }
}

/// Validated work ready to run.
enum Job {
    Compute(EntropyQuery),
    Dynamic(Vec<DynamicQuery>),
    Estimate {
        sample: Sample,
        input: String,
        eta: f64,
        bootstrap: Option<(usize, f64)>,
    },
    Simulate(Scenario),
    Sweep(SweepSpec),
    Bifurcation {
        c_grid: Vec<f64>,
        template: OrbitConfig,
        keep: usize,
    },
    Order {
        kind: OrderKind,
        x: QuantileModel,
        y: QuantileModel,
        opts: OrderOptions,
    },
    Theorem(Theorem, TheoremInputs),
    Suite,
}

fn orbit_template(o: &OrbitArgs) -> Result<(Vec<f64>, OrbitConfig), Failure> {
    let c_grid = parse_grid(&o.c_grid)?;
    let template = OrbitConfig {
        c: c_grid.first().copied().unwrap_or(4.0),
        x0: o.x0,
        burn_in: o.burn,
        length: o.len,
    };
    for &c in &c_grid {
        template.with_c(c).validate().map_err(usage)?;
    }
    Ok((c_grid, template))
}

fn pair_models(p: &PairArgs) -> Result<(QuantileModel, QuantileModel), Failure> {
    let get = |o: &Option<String>, flag: &str| o.clone().ok_or_else(|| usage(format!("--{flag} is required")));
    let x = build_model(&get(&p.dist_a, "dist-a")?, &get(&p.params_a, "params-a")?)?;
    let y = build_model(&get(&p.dist_b, "dist-b")?, &get(&p.params_b, "params-b")?)?;
    Ok((x, y))
}

fn plan(cli: &Cli) -> Result<Job, Failure> {
    let seed = cli.seed;
    Ok(match &cli.command {
        Command::Compute(a) => {
            let q = EntropyQuery::new(build_model(&a.model.dist, &a.model.params)?, a.eta).with_method(a.method);
            q.validate().map_err(usage)?;
            Job::Compute(q)
        }
        Command::Dynamic(a) => {
            let m = build_model(&a.model.dist, &a.model.params)?;
            let qs: Vec<DynamicQuery> = parse_grid(&a.v)?
                .into_iter()
                .map(|v| DynamicQuery::new(EntropyQuery::new(m.clone(), a.eta).with_method(a.method), v))
                .collect();
            for q in &qs {
                q.validate().map_err(usage)?;
            }
            Job::Dynamic(qs)
        }
        Command::Estimate(a) => {
            if !(a.eta > 0.0 && a.eta.is_finite()) {
                return Err(usage(format!("--eta {} must be positive", a.eta)));
            }
            if let Some(b) = a.bootstrap {
                validate_bootstrap(a.level, b).map_err(usage)?;
            }
            let input = a.input.display().to_string();
            let sample = if input == "-" {
                let mut text = String::new();
                std::io::Read::read_to_string(&mut std::io::stdin(), &mut text).map_err(compute)?;
                Sample::parse(&text, qfgcpe::SampleSource::Inline)
            } else {
                Sample::read_file(&a.input)
            }
            .map_err(compute)?;
            Job::Estimate {
                sample,
                input,
                eta: a.eta,
                bootstrap: a.bootstrap.map(|b| (b, a.level)),
            }
        }
        Command::Simulate(a) => {
            let mut sc = Scenario::new(build_model(&a.model.dist, &a.model.params)?, a.eta, a.n.clone(), a.reps, seed);
            if let Some(b) = a.bootstrap {
                sc = sc.with_bootstrap(b, a.level);
            }
            sc.validate().map_err(usage)?;
            Job::Simulate(sc)
        }
        Command::Chaos(a) => match &a.action {
            Some(ChaosAction::Bifurcation { orbit, keep }) => {
                let (c_grid, template) = orbit_template(orbit)?;
                if *keep < 1 || *keep > template.length {
                    return Err(usage(format!("--keep {keep} must lie in 1..={}", template.length)));
                }
                Job::Bifurcation {
                    c_grid,
                    template,
                    keep: *keep,
                }
            }
            None => {
                let (c_grid, orbit) = orbit_template(&a.orbit)?;
                if let Some(e) = a.eta.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
                    return Err(usage(format!("eta {e} must be positive")));
                }
                Job::Sweep(SweepSpec {
                    c_grid,
                    eta_grid: a.eta.clone(),
                    orbit,
                })
            }
        },
        Command::Orderings(a) => match &a.action {
            Some(OrderingsAction::Suite) => Job::Suite,
            Some(OrderingsAction::Theorem {
                theorem,
                pair,
                eta,
                psi,
                grid,
            }) => {
                let (x, y) = pair_models(pair)?;
                let needs_psi = !matches!(theorem, Theorem::T2_2 | Theorem::T3_3);
                if needs_psi && psi.is_none() {
                    return Err(usage(format!("{theorem} needs --psi")));
                }
                EntropyQuery::new(x.clone(), *eta).validate().map_err(usage)?;
                let mut inputs = TheoremInputs::new(x, y, *eta);
                inputs.options.grid = *grid;
                if let Some(p) = psi {
                    inputs = inputs.with_psi(p.clone());
                }
                Job::Theorem(*theorem, inputs)
            }
            None => {
                let kind = a.kind.ok_or_else(|| usage("--kind is required"))?;
                let (x, y) = pair_models(&a.pair)?;
                if a.grid < 100 {
                    return Err(usage(format!("--grid {} must be at least 100", a.grid)));
                }
                match (kind, a.eta) {
                    (OrderKind::Qfgcpe | OrderKind::Dqfgcpe, None) => {
                        return Err(usage(format!("--kind {kind} needs --eta")));
                    }
                    (_, Some(eta)) => EntropyQuery::new(x.clone(), eta).validate().map_err(usage)?,
                    _ => {}
                }
                let v_grid = match &a.v_grid {
                    Some(t) => Some(parse_grid(t)?),
                    None if kind == OrderKind::Dqfgcpe => Some(default_v_grid(19)),
                    None => None,
                };
                let opts = OrderOptions {
                    grid: a.grid,
                    eta: a.eta,
                    v_grid,
                    ..OrderOptions::default()
                };
                Job::Order { kind, x, y, opts }
            }
        },
    })
}

/// Runs the job and renders it in `format` (or the job's default).
fn execute(job: Job, format: Option<Format>, seed: u64) -> Result<String, Failure> {
    let single = |f: Option<Format>| f.unwrap_or(Format::Json);
    let table = |f: Option<Format>| f.unwrap_or(Format::Csv);
    Ok(match job {
        Job::Compute(q) => {
            let r = qfgcpe(&q).map_err(compute)?;
            let rec = EntropyRecord::new(&q.model, q.eta, None, &r);
            match single(format) {
                Format::Json => to_json(&rec),
                Format::Csv => to_csv(&[StaticCsvRow::from(&rec)])?,
            }
        }
        Job::Dynamic(qs) => {
            let recs = qs
                .iter()
                .map(|q| dqfgcpe(q).map(|r| EntropyRecord::new(&q.query.model, q.query.eta, Some(q.v), &r)))
                .collect::<qfgcpe::Result<Vec<_>>>()
                .map_err(compute)?;
            let fmt = if recs.len() == 1 { single(format) } else { table(format) };
            match fmt {
                Format::Json if recs.len() == 1 => to_json(&recs[0]),
                Format::Json => to_json(&recs),
                Format::Csv => to_csv(&recs.iter().map(DynamicCsvRow::from).collect::<Vec<_>>())?,
            }
        }
        Job::Estimate {
            sample,
            input,
            eta,
            bootstrap,
        } => {
            let result = match bootstrap {
                Some((b, level)) => bootstrap_ci(&sample, eta, level, b, seed),
                None => estimate(&sample, eta).map(|point| EstimateResult {
                    eta,
                    n: sample.len(),
                    point,
                    ci: None,
                    n_boot: None,
                    seed: None,
                }),
            }
            .map_err(compute)?;
            let rec = EstimateRecord { input, result };
            match single(format) {
                Format::Json => to_json(&rec),
                Format::Csv => to_csv(&[EstimateCsvRow::from(&rec)])?,
            }
        }
        Job::Simulate(sc) => {
            let report = run_scenario(&sc).map_err(compute)?;
            match table(format) {
                Format::Json => report_to_json(&report) + "\n",
                Format::Csv => report_to_csv(&report),
            }
        }
        Job::Sweep(spec) => {
            let rows = entropy_sweep(&spec).map_err(compute)?;
            match table(format) {
                Format::Json => to_json(&SweepRecord {
                    x0: spec.orbit.x0,
                    burn_in: spec.orbit.burn_in,
                    length: spec.orbit.length,
                    rows,
                }),
                Format::Csv => to_csv(&rows)?,
            }
        }
        Job::Bifurcation { c_grid, template, keep } => {
            let points = bifurcation_points(&c_grid, &template, keep).map_err(compute)?;
            match table(format) {
                Format::Json => to_json(&points),
                Format::Csv => to_csv(&points)?,
            }
        }
        Job::Order { kind, x, y, opts } => {
            let verdict = check_order(kind, &x, &y, &opts).map_err(compute)?;
            let rec = VerdictRecord {
                kind,
                x: x.to_string(),
                y: y.to_string(),
                eta: opts.eta,
                verdict,
            };
            match single(format) {
                Format::Json => to_json(&rec),
                Format::Csv => to_csv(&[VerdictCsvRow::from(&rec)])?,
            }
        }
        Job::Theorem(theorem, inputs) => {
            let report = check_theorem_implication(theorem, &inputs).map_err(compute)?;
            let rec = TheoremRecord {
                label: format!("{} vs {}", inputs.x, inputs.y),
                eta: inputs.eta,
                report,
            };
            match single(format) {
                Format::Json => to_json(&rec),
                Format::Csv => to_csv(&[TheoremCsvRow::from(&rec)])?,
            }
        }
        Job::Suite => {
            let mut recs = Vec::new();
            for pair in curated_suite().map_err(compute)? {
                for report in check_pair(&pair).map_err(compute)? {
                    recs.push(TheoremRecord {
                        label: pair.label.clone(),
                        eta: pair.eta,
                        report,
                    });
                }
            }
            match table(format) {
                Format::Json => to_json(&recs),
                Format::Csv => to_csv(&recs.iter().map(TheoremCsvRow::from).collect::<Vec<_>>())?,
            }
        }
    })
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| compute(format!("cannot write output: {e}")))
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let fail = |e: &dyn std::fmt::Display| compute(format!("cannot write {}: {e}", path.display()));
            let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| fail(&e))?;
            tmp.write_all(text.as_bytes()).map_err(|e| fail(&e))?;
            tmp.persist(path).map_err(|e| fail(&e.error))?;
            Ok(())
        }
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code. Messages go to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match plan(&cli)
        .and_then(|job| execute(job, cli.format, cli.seed))
        .and_then(|text| emit(&text, cli.out.as_ref()))
    {
        Ok(()) => 0,
        Err(f) => {
            let kind = match f {
                Failure::Usage(_) => "usage error",
                Failure::Compute(_) => "error",
            };
            eprintln!("qfgcpe: {kind}: {}", f.message());
            f.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_parse_and_validate() {
        assert_eq!(
            parse_params("exponential", "lambda=1").unwrap(),
            ModelParams::Exponential { lambda: 1.0 }
        );
        let davies = parse_params("davies", "K=1,a=-1,b=0").unwrap();
        assert_eq!(davies, ModelParams::Davies { k: 1.0, a: -1.0, b: 0.0 });
        let neg = parse_params("exponential", "lambda=-1").unwrap_err().to_string();
        assert!(neg.contains("lambda"), "{neg}");
        let unknown = parse_params("exponential", "mu=1").unwrap_err().to_string();
        let missing = parse_params("power", "a=1").unwrap_err().to_string();
        assert!(unknown.contains("unknown parameter"), "{unknown}");
        assert!(missing.contains("missing parameter"), "{missing}");
        assert_ne!(unknown, missing);
        assert!(parse_params("exponential", "lambda").is_err());
        assert!(parse_params("exponential", "lambda=x").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.25,0.5").unwrap(), vec![0.25, 0.5]);
        assert_eq!(parse_grid("1:2:0.5").unwrap(), vec![1.0, 1.5, 2.0]);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("a,b").is_err());
    }
}
