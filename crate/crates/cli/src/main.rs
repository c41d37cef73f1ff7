use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use agqec::agcode::{build_one_point_code, is_hermitian_self_orthogonal, CodeFile, LinearCode};
use agqec::audit;
use agqec::channel::NoiseRegistry;
use agqec::config::ExperimentConfig;
use agqec::curve::CurveSpec;
use agqec::decoder::{Decoder, DecoderContext, DecoderRegistry};
use agqec::decoder_rl::{train, QNetwork};
use agqec::gf::build_field;
use agqec::presets;
use agqec::simharness::{self, evaluate_paired, monotonicity_flags, sweep, sweep_rows, write_sweep_outputs};
use agqec::stabilizer::{distance_lower_bound, from_hermitian_so_code, StabilizerCode, StabilizerFile};
use agqec::{Error, Result};

#[derive(Parser)]
#[command(name = "agqec", version, about = "Hermitian-curve quantum codes and RL-on-greedy decoding")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, tabulate and check codes.
    #[command(subcommand)]
    Code(CodeCommand),
    /// Train the RL stage on a stabilizer code.
    Train(TrainArgs),
    /// Estimate one decoder's failure rate at one p.
    Eval(EvalArgs),
    /// Paired evaluation over a list of p values, with CSV and SVG output.
    Sweep(SweepArgs),
}

#[derive(Subcommand)]
enum CodeCommand {
    /// Build a Hermitian self-orthogonal code and its stabilizer code.
    Build(BuildArgs),
    /// Print the one-point sweep, the self-orthogonality threshold and the
    /// published parameter claims.
    Table(TableArgs),
    /// Check a stabilizer file: commutation, logical basis, low-weight logicals.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    q: u32,
    /// Defaults to q + 1.
    #[arg(long)]
    m: Option<u32>,
    /// One-point divisor degree.
    #[arg(long, conflicts_with = "k", required_unless_present = "k")]
    s: Option<u32>,
    /// Classical dimension; picks the first self-orthogonal monomial code.
    #[arg(long)]
    k: Option<usize>,
    /// Classical code file.
    #[arg(long)]
    out: PathBuf,
    /// Stabilizer file (default: <out> with extension .stab.json).
    #[arg(long)]
    stab_out: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    q: u32,
    #[arg(long, default_value_t = 0)]
    s_min: u32,
    #[arg(long)]
    s_max: u32,
    /// Codeword budget for exact classical distances.
    #[arg(long, default_value_t = 20_000_000)]
    distance_budget: u128,
    /// Skip the published-claims section.
    #[arg(long)]
    no_claims: bool,
    /// Logical-search weight for the q = 3 claims.
    #[arg(long, default_value_t = 3)]
    wmax_q3: usize,
    /// Logical-search weight for the q = 5 claims.
    #[arg(long, default_value_t = 2)]
    wmax_q5: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Stabilizer file.
    #[arg(long)]
    stab: PathBuf,
    /// Optional classical file the stabilizer code should come from.
    #[arg(long)]
    code: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    wmax: usize,
    #[arg(long, default_value_t = 5_000_000)]
    budget: u128,
}

#[derive(Args)]
struct TrainArgs {
    /// Stabilizer file.
    #[arg(long)]
    code: PathBuf,
    /// Experiment config (TOML); only `noise` and `[train]` are used.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Overrides `train.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `train.episodes`.
    #[arg(long)]
    episodes: Option<u64>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    trials: u64,
    #[arg(long, default_value = "greedy")]
    decoder: String,
    #[arg(long, default_value = "xz3")]
    noise: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    p_list: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    decoders: Option<Vec<String>>,
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Code(CodeCommand::Build(a)) => code_build(a),
        Command::Code(CodeCommand::Table(a)) => code_table(a),
        Command::Code(CodeCommand::Verify(a)) => code_verify(a),
        Command::Train(a) => train_cmd(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
    }
}

/// Fails with an I/O error if `path` cannot be created (missing parent directory).
fn check_writable(path: &Path) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if parent.is_dir() {
        Ok(())
    } else {
        Err(Error::Io {
            path: path.display().to_string(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "parent directory does not exist"),
        })
    }
}

fn load_stabilizer(path: &Path) -> Result<StabilizerCode> {
    StabilizerFile::load(path)?.to_code()
}

fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> u64 {
    flag.or(file).unwrap_or_else(|| {
        let seed = rand::random();
        println!("seed: {seed} (generated)");
        seed
    })
}

fn code_build(a: BuildArgs) -> Result<()> {
    let curve = CurveSpec::new(a.q, a.m.unwrap_or(a.q + 1))?;
    let field = build_field(a.q, 2)?;
    let code: LinearCode = match (a.s, a.k) {
        (Some(s), _) => build_one_point_code(&curve, &field, s)?,
        (None, Some(k)) => presets::so_code_of_dimension(&curve, &field, k)?,
        (None, None) => unreachable!("clap requires --s or --k"),
    };
    if !is_hermitian_self_orthogonal(&code)? {
        return Err(Error::Validation(format!(
            "[{}, {}] code for s = {} is not Hermitian self-orthogonal; use --k {} for a self-orthogonal monomial code",
            code.n,
            code.k,
            a.s.unwrap_or_default(),
            code.k
        )));
    }
    let stab = from_hermitian_so_code(&code)?;
    let stab_out = a.stab_out.clone().unwrap_or_else(|| a.out.with_extension("stab.json"));
    check_writable(&a.out)?;
    check_writable(&stab_out)?;
    CodeFile::from_code(&code).save(&a.out)?;
    StabilizerFile::from_code(&stab).save(&stab_out)?;
    let how = match code.s {
        Some(s) if code.monomials.as_deref() == Some(&curve.monomial_basis(s as i64)[..]) => format!("one-point s={s}"),
        _ => "self-orthogonal monomial subcode".to_string(),
    };
    println!("classical [{}, {}] over F_{} ({how}) -> {}", code.n, code.k, field.order(), a.out.display());
    println!("stabilizer [[{}, {}]]_{} -> {}", stab.n(), stab.k_q(), stab.q(), stab_out.display());
    Ok(())
}

fn code_table(a: TableArgs) -> Result<()> {
    let rows = audit::one_point_sweep(a.q, a.s_min, a.s_max, a.distance_budget)?;
    print!("{}", audit::render_one_point(a.q, &rows));
    println!();
    print!("{}", audit::render_threshold(&audit::threshold_report(a.q)?));
    if !a.no_claims {
        println!();
        let mut claims = audit::claim_rows(3, a.wmax_q3, u128::MAX)?;
        claims.extend(audit::claim_rows(5, a.wmax_q5, u128::MAX)?);
        print!("{}", audit::render_claims(&claims));
    }
    Ok(())
}

fn code_verify(a: VerifyArgs) -> Result<()> {
    let stab = load_stabilizer(&a.stab)?;
    stab.validate()?;
    println!("[[{}, {}]]_{}: checks commute, logical basis is canonical", stab.n(), stab.k_q(), stab.q());
    if let Some(path) = &a.code {
        let code = CodeFile::load(path)?.to_code()?;
        if !is_hermitian_self_orthogonal(&code)? {
            return Err(Error::Validation(format!("{} is not Hermitian self-orthogonal", path.display())));
        }
        let rebuilt = from_hermitian_so_code(&code)?;
        if rebuilt.checks() != stab.checks() {
            return Err(Error::Validation("stabilizer checks differ from those of the classical code".into()));
        }
        println!("matches classical code {}", path.display());
    }
    let rep = distance_lower_bound(&stab, a.wmax, a.budget)?;
    match rep.verified_min_weight_logical {
        Some(w) => println!("distance = {w} (logical operator of weight {w} found; {} candidates)", rep.candidates),
        None => println!("distance > {} ({} candidates checked)", a.wmax, rep.candidates),
    }
    Ok(())
}

fn train_cmd(a: TrainArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.train.seed = s;
    }
    if let Some(e) = a.episodes {
        cfg.train.episodes = e;
    }
    let registry = NoiseRegistry::default();
    cfg.validate(&registry)?;
    let code = load_stabilizer(&a.code)?;
    check_writable(&a.out)?;
    let noise = registry.create(&cfg.noise, cfg.train.p_train)?;
    let (net, report) = train(&code, noise.as_ref(), &cfg.train)?;
    net.save(&cfg.train, &a.out)?;
    println!(
        "trained {} episodes ({} noise samples, {} updates, seed {}); solved fraction by tenth: {}",
        report.episodes,
        report.noise_samples,
        report.updates,
        cfg.train.seed,
        report.solved_by_decile.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" ")
    );
    println!("model -> {}", a.out.display());
    Ok(())
}

fn make_decoders(code: &StabilizerCode, names: &[String], model: Option<&Path>) -> Result<Vec<Box<dyn Decoder>>> {
    let registry = DecoderRegistry::default();
    for n in names {
        if !registry.contains(n) {
            return Err(Error::Validation(format!("unknown decoder '{n}' (known: {})", registry.names().join(", "))));
        }
    }
    let loaded = model.map(QNetwork::load).transpose()?;
    let max_steps = loaded.as_ref().map_or(10, |(_, c)| c.max_steps);
    let net = loaded.map(|(n, _)| Arc::new(n));
    let ctx = DecoderContext { code, net: net.as_ref(), max_steps };
    names.iter().map(|n| registry.create(n, &ctx)).collect()
}

fn eval_cmd(a: EvalArgs) -> Result<()> {
    let code = load_stabilizer(&a.code)?;
    let noise = NoiseRegistry::default().create(&a.noise, a.p)?;
    if a.trials == 0 {
        return Err(Error::Validation("--trials must be positive".into()));
    }
    let decoders = make_decoders(&code, std::slice::from_ref(&a.decoder), a.model.as_deref())?;
    if let Some(out) = &a.out {
        check_writable(out)?;
    }
    let seed = resolve_seed(a.seed, None);
    let refs: Vec<&dyn Decoder> = decoders.iter().map(|d| d.as_ref()).collect();
    let ev = evaluate_paired(&code, &refs, noise.as_ref(), a.trials, seed)?;
    let row = &ev.rows[0];
    println!(
        "{} p={} trials={} failures={} rate={:.6} ci=[{:.6}, {:.6}] seed={seed}",
        row.decoder, row.p, row.trials, row.failures, row.rate, row.ci_low, row.ci_high
    );
    print_tally(&ev.tallies[0]);
    if let Some(out) = &a.out {
        simharness::write_csv(&ev.rows, out)?;
    }
    Ok(())
}

fn print_tally(t: &simharness::DecoderTally) {
    print!("  logical={} unresolved={} greedy_stalled={}", t.logical, t.unresolved, t.greedy_stalled);
    if let Some(f) = t.cleared_fraction() {
        print!(" cleared_after_stall={} ({:.3})", t.rl_cleared, f);
    }
    if let Some(m) = t.median_rl_steps() {
        print!(" median_rl_steps={m}");
    }
    println!();
}

fn sweep_cmd(a: SweepArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = a.p_list {
        cfg.p_list = v;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(d) = a.decoders {
        cfg.decoders = d;
    }
    if let Some(n) = a.noise {
        cfg.noise = n;
    }
    let registry = NoiseRegistry::default();
    cfg.validate(&registry)?;
    if cfg.p_list.is_empty() {
        return Err(Error::Validation("p list is empty".into()));
    }
    let code = load_stabilizer(&a.code)?;
    let decoders = make_decoders(&code, &cfg.decoders, a.model.as_deref())?;
    check_writable(&a.out)?;
    if let Some(svg) = &a.svg {
        check_writable(svg)?;
    }
    let seed = resolve_seed(a.seed, cfg.seed);
    let refs: Vec<&dyn Decoder> = decoders.iter().map(|d| d.as_ref()).collect();
    let points = sweep(&code, &refs, &cfg.noise, &registry, &cfg.p_list, cfg.trials, seed)?;
    println!("noise={} trials={} seed={seed}", cfg.noise, cfg.trials);
    for pt in &points {
        for (row, tally) in pt.evaluation.rows.iter().zip(&pt.evaluation.tallies) {
            println!(
                "p={:<8} {:<14} failures={:<7} rate={:.6} ci=[{:.6}, {:.6}]",
                row.p, row.decoder, row.failures, row.rate, row.ci_low, row.ci_high
            );
            print_tally(tally);
        }
        if refs.len() == 2 {
            let ev = &pt.evaluation;
            println!(
                "  failed by both={} only {}={} only {}={}",
                ev.failed_by_both(0, 1),
                refs[0].name(),
                ev.failed_only_by(0, 1),
                refs[1].name(),
                ev.failed_only_by(1, 0)
            );
        }
    }
    let rows = sweep_rows(&points);
    for flag in monotonicity_flags(&rows) {
        println!("note: {flag}");
    }
    write_sweep_outputs(&rows, &a.out, a.svg.as_deref())?;
    println!("csv -> {}", a.out.display());
    if let Some(svg) = &a.svg {
        println!("svg -> {}", svg.display());
    }
    Ok(())
}
