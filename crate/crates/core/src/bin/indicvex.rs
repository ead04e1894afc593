//! Command-line front end. Exit codes: 0 success, 1 usage or runtime error,
//! 2 verification mismatch.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use indicvex::convex::UnivariateConvex;
use indicvex::disjunctive::hull::rank_one_spec;
use indicvex::disjunctive::{build_hull_formulation, ExtendedFormulation};
use indicvex::envelope::{self, EnvelopePoint, RankOneInstance};
use indicvex::instances::{
    compute_metrics, export, generate_denoising, import_json, DenoisingFormulation, DenoisingInstance, DenoisingOverrides, ExportFormat,
    MetricInputs,
};
use indicvex::oracles::{envelope_oracle_disjunctive, mip_bruteforce, verify_exhaustive};
use indicvex::solver::{branch_and_bound, solve_relaxation, BnbOptions, SolveOptions};
use indicvex::{Error, Result};

#[derive(Parser)]
#[command(name = "indicvex", version, about = "Convexification of low-rank functions with indicator variables")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate seeded denoising instances as JSON.
    Generate(GenerateArgs),
    /// Build a denoising formulation.
    Build(BuildArgs),
    /// Evaluate the convex envelope of a rank-one function at a point.
    Envelope(EnvelopeArgs),
    /// Solve the continuous relaxation of a formulation.
    Solve(SolveArgs),
    /// Solve a formulation with branch and bound.
    Bnb(BnbArgs),
    /// Cross-check a construction against an independent oracle.
    Verify(VerifyArgs),
    /// Convert a JSON formulation to LP, MPS or JSON.
    Export(ExportArgs),
    /// Gap and root-improvement percentages.
    Metrics(MetricsArgs),
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// Read the instance from a JSON file instead of generating it.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    ell: usize,
    #[arg(long, default_value_t = 0.1)]
    omega: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    k1: Option<usize>,
    #[arg(long)]
    k2: Option<usize>,
    #[arg(long)]
    spikes: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "big-m")]
    big_m: Option<f64>,
}

impl InstanceArgs {
    fn overrides(&self) -> DenoisingOverrides {
        DenoisingOverrides { spikes: self.spikes, k1: self.k1, k2: self.k2, alpha: self.alpha, big_m: self.big_m }
    }

    fn load(&self) -> Result<DenoisingInstance> {
        match &self.instance {
            Some(p) => DenoisingInstance::from_json(&fs::read_to_string(p)?),
            None => generate_denoising(self.n, self.ell, self.omega, self.seed, self.overrides()),
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    /// Number of instances, with seeds seed, seed+1, …; needs --out as a directory when above 1.
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulationArg {
    Basic,
    Rankone,
    Ranktwo,
}

impl From<FormulationArg> for DenoisingFormulation {
    fn from(f: FormulationArg) -> Self {
        match f {
            FormulationArg::Basic => DenoisingFormulation::Basic,
            FormulationArg::Rankone => DenoisingFormulation::RankOne,
            FormulationArg::Ranktwo => DenoisingFormulation::RankTwo,
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long, value_enum, default_value = "ranktwo")]
    formulation: FormulationArg,
    /// lp, mps or json.
    #[arg(long, default_value = "json")]
    format: ExportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    /// Pick by sign constraints.
    Auto,
    Free,
    Nonneg,
    Samesign,
    Bivariate,
    Numeric,
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctionArg {
    Quadratic,
    Abs,
    Power,
    Huber,
}

#[derive(Args)]
struct EnvelopeArgs {
    #[arg(long, value_enum, default_value = "auto")]
    case: CaseArg,
    #[arg(long, value_enum, default_value = "quadratic")]
    g: FunctionArg,
    /// Coefficient, exponent or Huber threshold depending on --g.
    #[arg(long, default_value_t = 1.0)]
    param: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    a: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    x: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    z: Vec<f64>,
    /// One-based indices of sign-constrained variables.
    #[arg(long, value_delimiter = ',')]
    nonneg: Vec<usize>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct FormulationSource {
    /// JSON formulation file; without it a denoising formulation is built.
    #[arg(long)]
    form: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ranktwo")]
    formulation: FormulationArg,
    #[command(flatten)]
    inst: InstanceArgs,
}

impl FormulationSource {
    fn load(&self) -> Result<ExtendedFormulation> {
        match &self.form {
            Some(p) => import_json(&fs::read_to_string(p)?),
            None => DenoisingFormulation::from(self.formulation).build(&self.inst.load()?),
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    src: FormulationSource,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct BnbArgs {
    #[command(flatten)]
    src: FormulationSource,
    /// Relative gap at which the search stops.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Node limit.
    #[arg(long, default_value_t = 100_000)]
    budget: usize,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(subcommand)]
    what: VerifyCmd,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Knapsack reduction on every instance with up to n items.
    Knapsack {
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 6)]
        wmax: u64,
    },
    /// Hull formulation of a random rank-one quadratic against the full disjunction.
    Hull {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of points.
        #[arg(long, default_value_t = 20)]
        budget: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Branch and bound on a tiny denoising instance against enumeration.
    Bnb {
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        ell: usize,
        #[arg(long, default_value_t = 0.1)]
        omega: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        k1: usize,
        #[arg(long, default_value_t = 1)]
        k2: usize,
        #[arg(long, value_enum, default_value = "ranktwo")]
        formulation: FormulationArg,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
}

#[derive(Args)]
struct ExportArgs {
    /// JSON formulation to convert.
    input: PathBuf,
    #[arg(long, default_value = "lp")]
    format: ExportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long, allow_hyphen_values = true)]
    best: f64,
    #[arg(long, allow_hyphen_values = true)]
    cont: f64,
    #[arg(long, allow_hyphen_values = true)]
    basic: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    rankone: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    ranktwo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    bound: Option<f64>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    time: Option<f64>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            // a closed pipe (e.g. `| head`) is not an error
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => Ok(r?),
        },
    }
}

fn threads() -> usize {
    std::env::var("INDICVEX_THREADS")
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&t: &usize| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn generate(args: &GenerateArgs) -> Result<()> {
    if args.count <= 1 {
        let inst = args.inst.load()?;
        return emit(args.out.as_deref(), &(inst.to_json()? + "\n"));
    }
    let dir = args.out.as_ref().ok_or_else(|| Error::InvalidInstance("--count above 1 needs --out DIR".into()))?;
    fs::create_dir_all(dir)?;
    let seeds: Vec<u64> = (0..args.count).map(|i| args.inst.seed + i).collect();
    let chunk = seeds.len().div_ceil(threads());
    std::thread::scope(|s| {
        let handles: Vec<_> = seeds
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || -> Result<()> {
                    for &seed in part {
                        let a = &args.inst;
                        let inst = generate_denoising(a.n, a.ell, a.omega, seed, a.overrides())?;
                        fs::write(dir.join(format!("denoising-n{}-seed{seed}.json", a.n)), inst.to_json()? + "\n")?;
                    }
                    Ok(())
                })
            })
            .collect();
        handles.into_iter().try_for_each(|h| h.join().expect("worker panicked"))
    })
}

fn function(arg: FunctionArg, param: f64) -> Result<UnivariateConvex> {
    match arg {
        FunctionArg::Quadratic => UnivariateConvex::quadratic(param),
        FunctionArg::Abs => Ok(UnivariateConvex::AbsoluteValue),
        FunctionArg::Power => UnivariateConvex::power_abs(param),
        FunctionArg::Huber => UnivariateConvex::huber(param),
    }
}

fn envelope_cmd(args: &EnvelopeArgs) -> Result<()> {
    let n = args.a.len();
    let iplus: Vec<usize> = args
        .nonneg
        .iter()
        .map(|&i| if (1..=n).contains(&i) { Ok(i - 1) } else { Err(Error::InvalidInstance(format!("index {i} is not in 1..={n}"))) })
        .collect::<Result<_>>()?;
    let inst = RankOneInstance::homogeneous(args.a.clone(), iplus, function(args.g, args.param)?)?;
    let p = EnvelopePoint::new(args.x.clone(), args.z.clone())?;
    let value = match args.case {
        CaseArg::Auto => envelope::envelope(&inst, &p)?,
        CaseArg::Free => envelope::envelope_free(&inst, &p)?,
        CaseArg::Nonneg => envelope::envelope_nonneg(&inst, &p)?,
        CaseArg::Samesign => envelope::envelope_nonneg_samesign(&inst, &p)?,
        CaseArg::Bivariate => envelope::envelope_bivariate(&inst, &p)?,
        CaseArg::Numeric => envelope::envelope_numeric(&inst, &p, args.tol)?.value,
    };
    println!("{value}");
    Ok(())
}

fn solve_cmd(args: &SolveArgs) -> Result<()> {
    let f = args.src.load()?.relaxed();
    let r = solve_relaxation(&f, &SolveOptions::with_tol(args.tol))?;
    println!("status={:?} value={} gap={:e} iterations={}", r.status, r.value, r.certificate.gap(), r.certificate.iterations);
    Ok(())
}

fn bnb_cmd(args: &BnbArgs) -> Result<()> {
    let f = args.src.load()?;
    let opts = BnbOptions {
        rel_gap: args.tol,
        node_limit: args.budget,
        time_limit: args.time.map(Duration::from_secs_f64),
        ..Default::default()
    };
    let start = Instant::now();
    let r = branch_and_bound(&f, &opts)?;
    let pattern: String = r.pattern.iter().map(|b| char::from(b'0' + b)).collect();
    println!(
        "termination={:?} value={} bound={} root={} nodes={} time={:.3} pattern={pattern}",
        r.termination,
        r.value,
        r.bound,
        r.root_bound,
        r.nodes,
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn verify_cmd(args: &VerifyArgs) -> Result<()> {
    match args.what {
        VerifyCmd::Knapsack { n, wmax } => {
            let mut checked = 0;
            for m in 1..=n {
                let rep = verify_exhaustive(m, wmax)?;
                checked += rep.checked;
                if let Some(c) = rep.failures.first() {
                    return Err(Error::Mismatch(format!("{} failures, first: {c}", rep.failures.len())));
                }
            }
            println!("knapsack reduction holds on {checked} instances (n ≤ {n}, w_i ≤ {wmax})");
        }
        VerifyCmd::Hull { n, seed, budget, tol } => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let iplus: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
            let spec = rank_one_spec(a, UnivariateConvex::quadratic(1.0)?, iplus.clone())?;
            let hull = build_hull_formulation(&spec)?;
            let mut worst: f64 = 0.0;
            for _ in 0..budget {
                let z: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
                let x: Vec<f64> =
                    (0..n).map(|i| if iplus.contains(&i) { rng.random_range(0.0..1.0) } else { rng.random_range(-1.0..1.0) }).collect();
                let fixed = hull.with_fixed("x", &x)?.with_fixed("z", &z)?;
                let h = solve_relaxation(&fixed, &SolveOptions::default())?.value;
                let o = envelope_oracle_disjunctive(&spec, &x, &z)?.value;
                let d = (h - o).abs();
                worst = worst.max(d);
                if d > tol {
                    return Err(Error::Mismatch(format!("hull {h} vs disjunction {o} at x={x:?} z={z:?}")));
                }
            }
            println!("hull agrees with the full disjunction at {budget} points (max deviation {worst:e})");
        }
        VerifyCmd::Bnb { n, ell, omega, seed, k1, k2, formulation, tol } => {
            let over = DenoisingOverrides { spikes: Some(1), k1: Some(k1), k2: Some(k2), ..Default::default() };
            let inst = generate_denoising(n, ell, omega, seed, over)?;
            let f = DenoisingFormulation::from(formulation).build(&inst)?;
            let r = branch_and_bound(&f, &BnbOptions::default())?;
            let brute = mip_bruteforce(&indicvex::instances::denoising_least_squares(&inst)?)?;
            if (r.value - brute.value).abs() > tol {
                return Err(Error::Mismatch(format!("branch and bound {} vs enumeration {}", r.value, brute.value)));
            }
            println!("branch and bound {} matches enumeration {} ({} nodes)", r.value, brute.value, r.nodes);
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Generate(a) => generate(&a),
        Cmd::Build(a) => {
            let f = DenoisingFormulation::from(a.formulation).build(&a.inst.load()?)?;
            emit(a.out.as_deref(), &export(&f, a.format)?)
        }
        Cmd::Envelope(a) => envelope_cmd(&a),
        Cmd::Solve(a) => solve_cmd(&a),
        Cmd::Bnb(a) => bnb_cmd(&a),
        Cmd::Verify(a) => verify_cmd(&a),
        Cmd::Export(a) => {
            let f = import_json(&fs::read_to_string(&a.input)?)?;
            emit(a.out.as_deref(), &export(&f, a.format)?)
        }
        Cmd::Metrics(a) => {
            let m = MetricInputs {
                best: a.best,
                cont: a.cont,
                basic: a.basic,
                rankone: a.rankone,
                ranktwo: a.ranktwo,
                bound: a.bound,
                nodes: a.nodes,
                time: a.time,
            };
            println!("{}", compute_metrics(&m));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Mismatch(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
