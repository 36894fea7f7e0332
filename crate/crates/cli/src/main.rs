use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use conley_cli::config::{ConfigError, ModelKind, RunConfig, OUTPUT_DIR_ENV};
use conley_cli::output::{graph_sha256, write_atomic, write_atomic_with};
use conley_cli::report::{emit_report, ReproductionReport};
use conley_cli::suite::{run_suite, FAST_CRITERIA, PAPER_CRITERIA};
use conley_core::cubical::{build_transition_graph, Grid, TransitionGraph};
use conley_core::equilibria::{
    find_equilibria, heteroclinic_threshold, homoclinic_threshold, hopf_threshold, normal_form_origin, pitchfork_threshold, ThresholdKind,
};
use conley_core::flow::{trapping_box, LorenzParams, Model, NormalFormParams};
use conley_core::morse::{
    lorenz_morse, morse_decomposition, pitchfork_demo, pitchfork_engine_config, strange_node_sweep, DecompositionSummary, MorseDecomposition,
};
use conley_core::symbolic::{crossings_csv, find_periodic_orbit, largest_lyapunov, section_crossings, verify_word_realization, OrbitConfig, WordConfig};
use conley_core::Error as CoreError;

#[derive(Parser, Debug)]
#[command(name = "conley", version, about = "Conley index computations for the Lorenz flow")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Overrides applied on top of the configuration file.
#[derive(Args, Debug, Default)]
struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    model: Option<ModelKind>,
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Subdivision depth per axis, e.g. 7,7,7.
    #[arg(long, global = true, value_delimiter = ',')]
    depths: Option<Vec<u32>>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Largest grid allowed, in cubes.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Explore only cubes reachable from the equilibria.
    #[arg(long, global = true)]
    reachable: bool,
    /// Normal form rate.
    #[arg(long, global = true)]
    lambda: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Equilibria and their linearization.
    Equilibria,
    /// Bisection for a bifurcation threshold in r.
    Thresholds {
        #[arg(long, value_enum, default_value_t = KindArg::All)]
        kind: KindArg,
        /// Final bracket width.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Equilibria and Morse graphs over the configured range of r.
    Sweep {
        /// Also compute the Morse decomposition at each r.
        #[arg(long)]
        morse: bool,
        /// Distances of the strange node at each r to the one at the range's start.
        #[arg(long)]
        hausdorff: bool,
    },
    /// Morse graph as DOT and JSON, plus the transition graph dump.
    Morse,
    /// Conley index polynomials of the Morse nodes.
    Index,
    /// Symbolic coding on the section z = r - 1.
    Symbols {
        /// Count realized words of this length.
        #[arg(long)]
        length: Option<usize>,
        /// Find the periodic orbit with this code, e.g. S or ST.
        #[arg(long)]
        orbit: Option<String>,
        /// Largest Lyapunov exponent over this integration time.
        #[arg(long)]
        lyapunov: Option<f64>,
        /// Section crossings over this integration time, as CSV.
        #[arg(long)]
        crossings: Option<f64>,
        /// Word-count seeds.
        #[arg(long)]
        seeds: Option<usize>,
    },
    /// Attractor of the radial pitchfork normal form.
    PitchforkDemo {
        #[arg(long, default_value_t = 6)]
        depth: u32,
    },
    /// Reproduction report of the published claims.
    Report {
        #[arg(long, value_enum, default_value_t = SuiteArg::Paper)]
        suite: SuiteArg,
        /// Run only these rows, e.g. 1,2,coverage.
        #[arg(long, value_delimiter = ',', conflicts_with = "suite")]
        only: Option<Vec<String>>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Pitchfork,
    Hopf,
    Homoclinic,
    Heteroclinic,
    All,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    /// All fourteen claims and the coverage check.
    Paper,
    /// Claims that finish within seconds.
    Fast,
    /// No claims; an empty report.
    None,
}

enum Failure {
    Usage(String),
    Numerical(String),
    ClaimsFailed(usize),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Contract(_) | CoreError::BudgetExceeded { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numerical(format!("i/o error: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = resolve_config(&cli.common).and_then(|cfg| {
        if cfg.threads > 0 {
            rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global().map_err(|e| Failure::Usage(e.to_string()))?;
        }
        run(&cli.command, &cfg)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::ClaimsFailed(n)) => {
            eprintln!("{n} claim(s) failed");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

/// Defaults, then the file, then the environment (output directory only),
/// then flags.
fn resolve_config(c: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()) {
        cfg.output_dir = PathBuf::from(dir);
    }
    if let Some(v) = &c.output_dir {
        cfg.output_dir = v.clone();
    }
    if let Some(v) = c.threads {
        cfg.threads = v;
    }
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(v) = c.model {
        cfg.model = v;
        if c.depths.is_none() && v == ModelKind::NormalForm {
            cfg.depths = vec![cfg.depths[0]; cfg.normal_form.n];
        }
    }
    if let Some(v) = c.r {
        cfg.r = v;
    }
    if let Some(v) = &c.depths {
        cfg.depths = v.clone();
    }
    if let Some(v) = c.tau {
        cfg.tau = v;
    }
    if let Some(v) = c.budget {
        cfg.budget = v;
    }
    if c.reachable {
        cfg.reachable = true;
    }
    if let Some(v) = c.lambda {
        cfg.normal_form.lambda = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cmd: &Command, cfg: &RunConfig) -> Outcome {
    match cmd {
        Command::Equilibria => equilibria(cfg),
        Command::Thresholds { kind, tol } => thresholds(cfg, *kind, tol.unwrap_or(cfg.threshold_tol)),
        Command::Sweep { morse, hausdorff } => sweep(cfg, *morse, *hausdorff),
        Command::Morse => morse(cfg, true),
        Command::Index => morse(cfg, false),
        Command::Symbols { length, orbit, lyapunov, crossings, seeds } => symbols(cfg, *length, orbit.as_deref(), *lyapunov, *crossings, *seeds),
        Command::PitchforkDemo { depth } => pitchfork(cfg, *depth),
        Command::Report { suite, only } => report(cfg, *suite, only.as_deref()),
    }
}

/// Prints `value` as JSON and stores it as `name` in the output directory.
fn emit_json(cfg: &RunConfig, name: &str, value: &impl Serialize) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    print!("{text}");
    write_atomic(&cfg.output_dir.join(name), text.as_bytes())?;
    Ok(())
}

fn lorenz_only(cfg: &RunConfig, what: &str) -> Result<LorenzParams, Failure> {
    match cfg.model {
        ModelKind::Lorenz => Ok(cfg.lorenz()),
        ModelKind::NormalForm => Err(Failure::Usage(format!("{what} is defined for the Lorenz model only"))),
    }
}

fn normal_form(cfg: &RunConfig) -> NormalFormParams {
    NormalFormParams { n: cfg.normal_form.n, k: cfg.normal_form.k, lambda: cfg.normal_form.lambda }
}

fn equilibria(cfg: &RunConfig) -> Outcome {
    let eqs = match cfg.model {
        ModelKind::Lorenz => find_equilibria(&cfg.lorenz())?,
        ModelKind::NormalForm => vec![normal_form_origin(&normal_form(cfg))?],
    };
    emit_json(cfg, "equilibria.json", &eqs)
}

fn thresholds(cfg: &RunConfig, kind: KindArg, tol: f64) -> Outcome {
    let kinds: &[ThresholdKind] = match kind {
        KindArg::Pitchfork => &[ThresholdKind::Pitchfork],
        KindArg::Hopf => &[ThresholdKind::Hopf],
        KindArg::Homoclinic => &[ThresholdKind::Homoclinic],
        KindArg::Heteroclinic => &[ThresholdKind::Heteroclinic],
        KindArg::All => &[ThresholdKind::Pitchfork, ThresholdKind::Homoclinic, ThresholdKind::Heteroclinic, ThresholdKind::Hopf],
    };
    let ic = cfg.integrator();
    let mut out = Vec::new();
    for k in kinds {
        out.push(match k {
            ThresholdKind::Pitchfork => pitchfork_threshold(tol)?,
            ThresholdKind::Hopf => hopf_threshold(tol)?,
            ThresholdKind::Homoclinic => homoclinic_threshold(tol, &ic)?,
            ThresholdKind::Heteroclinic => heteroclinic_threshold(tol, &ic)?,
        });
    }
    if out.len() == 1 {
        emit_json(cfg, "thresholds.json", &out[0])
    } else {
        emit_json(cfg, "thresholds.json", &out)
    }
}

#[derive(Serialize)]
struct SweepRow {
    r: f64,
    equilibria: Vec<(String, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    morse: Option<DecompositionSummary>,
}

fn sweep(cfg: &RunConfig, with_morse: bool, hausdorff: bool) -> Outcome {
    let base = lorenz_only(cfg, "the sweep")?;
    let values = cfg.sweep_values();
    let mut rows = Vec::new();
    let mut csv = String::from("r,equilibria,unstable_dims,morse_nodes,indices\n");
    for &r in &values {
        let p = LorenzParams { r, ..base };
        let eqs = find_equilibria(&p)?;
        let morse = if with_morse { Some(lorenz_morse(&p, &cfg.depths, &cfg.engine(), cfg.budget, cfg.reachable)?.decomposition.summary()) } else { None };
        let dims: Vec<String> = eqs.iter().map(|e| e.unstable_dim.to_string()).collect();
        let (nodes, idx) = morse.as_ref().map_or((String::new(), String::new()), |m| {
            (m.graph.nodes.len().to_string(), m.indices.iter().map(|i| i.clone().unwrap_or_else(|| "?".into())).collect::<Vec<_>>().join(";"))
        });
        csv.push_str(&format!("{r},{},{},{nodes},{idx}\n", eqs.len(), dims.join(";")));
        rows.push(SweepRow { r, equilibria: eqs.iter().map(|e| (format!("{:?}", e.label), e.unstable_dim)).collect(), morse });
    }
    write_atomic(&cfg.output_dir.join("sweep.csv"), csv.as_bytes())?;
    if hausdorff {
        let points = strange_node_sweep(values[0], &values[1..], &cfg.depths, &cfg.engine(), cfg.budget, |_, _| {})?;
        let mut csv = String::from("r,morse_nodes,strange_cubes,hausdorff\n");
        for p in &points {
            let opt = |v: Option<String>| v.unwrap_or_default();
            csv.push_str(&format!("{},{},{},{}\n", p.r, p.nodes, opt(p.strange_cubes.map(|c| c.to_string())), opt(p.hausdorff.map(|h| h.to_string()))));
        }
        write_atomic(&cfg.output_dir.join("hausdorff.csv"), csv.as_bytes())?;
        emit_json(cfg, "hausdorff.json", &points)?;
    }
    emit_json(cfg, "sweep.json", &rows)
}

fn decompose(cfg: &RunConfig) -> Result<(TransitionGraph, MorseDecomposition), Failure> {
    match cfg.model {
        ModelKind::Lorenz => {
            let run = lorenz_morse(&cfg.lorenz(), &cfg.depths, &cfg.engine(), cfg.budget, cfg.reachable)?;
            Ok((run.graph, run.decomposition))
        }
        ModelKind::NormalForm => {
            let model = Model::NormalForm(normal_form(cfg));
            let grid = Grid::new(trapping_box(&model)?, &cfg.depths, cfg.budget)?;
            let tg = build_transition_graph(&grid, &model, &cfg.engine())?;
            let d = morse_decomposition(&tg, &[("Origin".into(), vec![0.0; cfg.normal_form.n])], true);
            Ok((tg, d))
        }
    }
}

#[derive(Serialize)]
struct MorseOutput {
    decomposition: DecompositionSummary,
    equation: Option<String>,
    index_errors: Vec<(usize, String)>,
    graph_sha256: String,
    seconds: f64,
}

fn morse(cfg: &RunConfig, artifacts: bool) -> Outcome {
    let t = Instant::now();
    let (tg, d) = decompose(cfg)?;
    let out = MorseOutput {
        decomposition: d.summary(),
        equation: d.equation().ok().map(|e| e.display),
        index_errors: d.index_errors.clone(),
        graph_sha256: graph_sha256(&tg),
        seconds: t.elapsed().as_secs_f64(),
    };
    if !artifacts {
        return emit_json(cfg, "index.json", &out);
    }
    let dir: &Path = &cfg.output_dir;
    write_atomic(&dir.join("morse.dot"), d.to_dot().as_bytes())?;
    write_atomic_with(&dir.join("graph.bin"), |w| tg.write_binary(w).map_err(std::io::Error::other))?;
    print!("{}", d.to_dot());
    let mut text = serde_json::to_string_pretty(&out).expect("output serializes");
    text.push('\n');
    write_atomic(&dir.join("morse.json"), text.as_bytes())?;
    Ok(())
}

#[derive(Serialize, Default)]
struct SymbolsOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    words: Option<conley_core::symbolic::WordReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    orbit: Option<conley_core::symbolic::PeriodicOrbitResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lyapunov: Option<conley_core::symbolic::LyapunovEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    crossings: Option<usize>,
}

fn symbols(cfg: &RunConfig, length: Option<usize>, orbit: Option<&str>, lyapunov: Option<f64>, crossings: Option<f64>, seeds: Option<usize>) -> Outcome {
    let p = lorenz_only(cfg, "symbolic coding")?;
    let model = Model::Lorenz(p);
    let ic = cfg.integrator();
    let start = [1.0, 1.0, p.section_height()];
    let mut out = SymbolsOutput::default();
    let length = if orbit.is_none() && lyapunov.is_none() && crossings.is_none() { length.or(Some(5)) } else { length };
    if let Some(m) = length {
        let wc = WordConfig { seeds: seeds.unwrap_or(WordConfig::default().seeds), ..WordConfig::default() };
        out.words = Some(verify_word_realization(&model, m, &wc)?);
    }
    if let Some(code) = orbit {
        out.orbit = Some(find_periodic_orbit(&model, code, &OrbitConfig::default())?);
    }
    if let Some(t) = lyapunov {
        out.lyapunov = Some(largest_lyapunov(&model, &start, t, &ic)?);
    }
    if let Some(t) = crossings {
        let cr = section_crossings(&model, &start, t, &ic)?;
        write_atomic(&cfg.output_dir.join("crossings.csv"), crossings_csv(&cr, WordConfig::default().orientation).as_bytes())?;
        out.crossings = Some(cr.len());
    }
    emit_json(cfg, "symbols.json", &out)
}

fn pitchfork(cfg: &RunConfig, depth: u32) -> Outcome {
    let nf = &cfg.normal_form;
    let engine = pitchfork_engine_config(nf.lambda);
    let demo = pitchfork_demo(nf.n, nf.k, nf.lambda, depth, &engine, |_| {})?;
    emit_json(cfg, "pitchfork.json", &demo)
}

fn report(cfg: &RunConfig, suite: SuiteArg, only: Option<&[String]>) -> Outcome {
    let (name, ids, coverage): (&str, Vec<u32>, bool) = match (only, suite) {
        (Some(rows), _) => {
            let mut ids = Vec::new();
            let mut coverage = false;
            for r in rows {
                match r.parse::<u32>() {
                    Ok(id) if PAPER_CRITERIA.contains(&id) => ids.push(id),
                    _ if r == "coverage" => coverage = true,
                    _ => return Err(Failure::Usage(format!("unknown report row {r:?}; expected 1-14 or coverage"))),
                }
            }
            ("selection", ids, coverage)
        }
        (None, SuiteArg::Paper) => ("paper", PAPER_CRITERIA.to_vec(), true),
        (None, SuiteArg::Fast) => ("fast", FAST_CRITERIA.to_vec(), false),
        (None, SuiteArg::None) => ("none", Vec::new(), false),
    };
    let engine = cfg.engine();
    let out = run_suite(&ids, coverage.then_some(&engine), cfg.seed);
    let rep = ReproductionReport::new(name, cfg, out.rows, out.graphs);
    let (json, md) = emit_report(&rep, &out.runtimes, &cfg.output_dir)?;
    for r in &rep.rows {
        println!("{} {}: {}", if r.pass { "PASS" } else { "FAIL" }, r.id, r.computed);
    }
    println!("wrote {} and {}", json.display(), md.display());
    if rep.all_passed() {
        Ok(())
    } else {
        Err(Failure::ClaimsFailed(rep.failed))
    }
}
