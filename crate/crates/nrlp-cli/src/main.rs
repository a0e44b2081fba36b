//! Command line front end: path/pattern simulation, verification suites
//! and skeleton convergence experiments, with deterministic seed-derived
//! streams and replica-ordered CSV output.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use nrlp_core::measure::{self, LevyTriplet, MemoryParam};
use nrlp_core::path_synthesis::{self, SamplePath};
use nrlp_core::point_process::{self, MarkedPointPattern};
use nrlp_core::rng::{labeled_stream, tag};
use nrlp_core::skeleton;
use nrlp_core::verify::{self, GrowthMode, Verdict};
use nrlp_core::yule_simon;
use nrlp_core::VERSION;

/// Simulation of noise reinforced Lévy processes.
#[derive(Parser)]
#[command(name = "nrlp", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample paths or point patterns and write them as CSV.
    Simulate(SimulateArgs),
    /// Run a verification suite and write a JSON report.
    Verify(VerifyArgs),
    /// Run the skeleton convergence experiment.
    Converge(ConvergeArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for all derived streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Memory parameter in [0,1).
    #[arg(long)]
    p: Option<f64>,
    /// Small-jump truncation in (0,1).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Number of paths / replicas.
    #[arg(long = "n-paths")]
    n_paths: Option<usize>,
    /// Number of grid cells on [0,1] (skeleton: steps).
    #[arg(long)]
    grid: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = library default). Output order is
    /// replica-deterministic regardless.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    /// One of: yule-simon, nrbm, nr-poisson, nr-cpp, nrlp, coupled, skeleton.
    #[arg(long)]
    process: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite id or "all".
    #[arg(long)]
    suite: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ConvergeArgs {
    /// Comma-separated mesh counts.
    #[arg(long = "n-list", value_delimiter = ',')]
    n_list: Vec<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

/// Resolved run configuration; the file form carries the same fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    triplet_file: Option<PathBuf>,
    p: f64,
    epsilon: f64,
    grid_points: usize,
    n_paths: usize,
    seed: u64,
    output_dir: PathBuf,
    workers: usize,
    /// Growth-suite overrides (stable index and rate exponent).
    growth_alpha: Option<f64>,
    growth_gamma: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            triplet_file: None,
            p: 0.25,
            epsilon: 1e-3,
            grid_points: 64,
            n_paths: 100,
            seed: 1,
            output_dir: PathBuf::from("out"),
            workers: 0,
            growth_alpha: None,
            growth_gamma: None,
        }
    }
}

enum CliError {
    /// Bad usage or configuration: exit 1.
    Config(String),
    /// Inadmissible memory parameter: exit 2.
    Admissibility(String),
    /// One or more verification reports failed: exit 3.
    Verification(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Admissibility(_) => 2,
            CliError::Verification(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Admissibility(m) | CliError::Verification(m) => m,
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are not errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Converge(args) => cmd_converge(args),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message());
        std::process::exit(e.code());
    }
}

fn load_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(p) = common.p {
        cfg.p = p;
    }
    if let Some(eps) = common.epsilon {
        cfg.epsilon = eps;
    }
    if let Some(n) = common.n_paths {
        cfg.n_paths = n;
    }
    if let Some(g) = common.grid {
        cfg.grid_points = g;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    if let Some(w) = common.workers {
        cfg.workers = w;
    }
    if !(0.0..1.0).contains(&cfg.p) {
        return Err(CliError::Config(format!("p must lie in [0,1), got {}", cfg.p)));
    }
    if !(0.0 < cfg.epsilon && cfg.epsilon < 1.0) {
        return Err(CliError::Config(format!(
            "epsilon must lie in (0,1), got {}",
            cfg.epsilon
        )));
    }
    if cfg.grid_points == 0 || cfg.n_paths == 0 {
        return Err(CliError::Config(
            "grid_points and n_paths must be positive".into(),
        ));
    }
    Ok(cfg)
}

fn memory_param(cfg: &RunConfig) -> Result<MemoryParam, CliError> {
    MemoryParam::new(cfg.p).map_err(|e| CliError::Config(e.to_string()))
}

fn load_triplet(cfg: &RunConfig, default: LevyTriplet) -> Result<LevyTriplet, CliError> {
    match &cfg.triplet_file {
        None => Ok(default),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            measure::parse_triplet_str(&text, path.parent())
                .map_err(|e| CliError::Config(e.to_string()))
        }
    }
}

fn gate_admissibility(p: MemoryParam, triplet: &LevyTriplet) -> Result<(), CliError> {
    match measure::admissibility_violation(p, triplet) {
        None => Ok(()),
        Some(v) => Err(CliError::Admissibility(v)),
    }
}

/// 64-bit FNV hash of the resolved configuration plus the command label,
/// recorded in every output header. Fields that cannot affect the sampled
/// values (output location, worker count) are excluded.
fn config_hash(cfg: &RunConfig, label: &str) -> u64 {
    let mut canon = cfg.clone();
    canon.output_dir = PathBuf::new();
    canon.workers = 0;
    let canon = serde_json::to_string(&canon).expect("config serializes");
    tag(&format!("{label}|{canon}"))
}

struct CsvFile {
    file: fs::File,
    path: PathBuf,
}

impl CsvFile {
    fn create(
        dir: &Path,
        name: &str,
        seed: u64,
        hash: u64,
        columns: &str,
    ) -> Result<CsvFile, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
        let path = dir.join(name);
        let mut file = fs::File::create(&path)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        write!(
            file,
            "# version={VERSION}\n# seed={seed}\n# config_hash={hash:016x}\n{columns}\n"
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(CsvFile { file, path })
    }

    fn push(&mut self, line: &str) -> Result<(), CliError> {
        writeln!(self.file, "{line}").map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Runs `f` over replica indices on a sized rayon pool; results come back
/// in replica order regardless of scheduling.
fn run_replicas<T: Send>(
    n: usize,
    workers: usize,
    f: impl Fn(u64) -> Result<T, String> + Sync,
) -> Result<Vec<T>, CliError> {
    use rayon::prelude::*;
    let work = || {
        (0..n as u64)
            .into_par_iter()
            .map(&f)
            .collect::<Result<Vec<T>, String>>()
    };
    let out = if workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?;
        pool.install(work)
    } else {
        work()
    };
    out.map_err(CliError::Config)
}

fn pattern_rows(out: &mut String, id: u64, pattern: &MarkedPointPattern) {
    for a in &pattern.atoms {
        let origin = match a.origin {
            point_process::Origin::Innovation => "innovation",
            point_process::Origin::Repetition => "repetition",
        };
        let _ = writeln!(
            out,
            "{id},{:.17e},{:.17e},{origin},{},{:.17e}",
            a.time, a.mark, a.innovation_id, a.innovation_time
        );
    }
}

fn path_rows(out: &mut String, id: u64, path: &SamplePath) {
    for (t, v) in path.grid.iter().zip(&path.continuous) {
        let _ = writeln!(out, "{id},{t:.17e},{v:.17e},continuous");
    }
    for a in &path.jumps.atoms {
        let component = if a.mark.abs() >= 1.0 {
            "jump_large"
        } else {
            "jump_compensated"
        };
        let _ = writeln!(out, "{id},{:.17e},{:.17e},{component}", a.time, a.mark);
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.common)?;
    let p = memory_param(&cfg)?;
    let hash = config_hash(&cfg, &format!("simulate/{}", args.process));
    let seed = cfg.seed;
    let dir = cfg.output_dir.clone();
    let grid = path_synthesis::uniform_grid(cfg.grid_points);
    let start = Instant::now();
    let process = args.process.as_str();
    let label = format!("cli/simulate/{process}");
    let mut atoms = 0usize;
    match process {
        "yule-simon" => {
            let mut csv = CsvFile::create(&dir, "ys_paths.csv", seed, hash, "path_id,jump_time")?;
            let rows = run_replicas(cfg.n_paths, cfg.workers, |replica| {
                let mut rng = labeled_stream(seed, &label, replica);
                let path = yule_simon::sample_ys_path(p, &mut rng).map_err(|e| e.to_string())?;
                let mut out = String::new();
                for t in &path.jumps {
                    let _ = writeln!(out, "{replica},{t:.17e}");
                }
                Ok((path.jumps.len(), out))
            })?;
            for (n, block) in rows {
                atoms += n;
                csv.push(block.trim_end())?;
            }
        }
        "nrbm" => {
            // The NRBM exists only for p < 1/2; the gate is the Gaussian
            // admissibility p·2 < 1.
            gate_admissibility(p, &LevyTriplet::brownian(1.0))?;
            let mut csv =
                CsvFile::create(&dir, "paths.csv", seed, hash, "path_id,time,value,component")?;
            let rows = run_replicas(cfg.n_paths, cfg.workers, |replica| {
                let mut rng = labeled_stream(seed, &label, replica);
                let path =
                    path_synthesis::sample_nrbm(p, &grid, &mut rng).map_err(|e| e.to_string())?;
                let mut out = String::new();
                for (t, v) in path.grid.iter().zip(&path.values) {
                    let _ = writeln!(out, "{replica},{t:.17e},{v:.17e},continuous");
                }
                Ok(out)
            })?;
            for block in rows {
                csv.push(block.trim_end())?;
            }
        }
        "nr-poisson" => {
            let triplet = load_triplet(&cfg, LevyTriplet::dirac(1.0, 1.0))?;
            gate_admissibility(p, &triplet)?;
            let mut csv = CsvFile::create(
                &dir,
                "pattern.csv",
                seed,
                hash,
                "pattern_id,time,mark,origin,innovation_id,innovation_time",
            )?;
            let spec = triplet.levy_measure.clone();
            let eps = cfg.epsilon;
            let rows = run_replicas(cfg.n_paths, cfg.workers, |replica| {
                let mut rng = labeled_stream(seed, &label, replica);
                let pattern = point_process::sample_nrppp(&spec, p, 1.0, eps, &mut rng)
                    .map_err(|e| e.to_string())?;
                let mut out = String::new();
                pattern_rows(&mut out, replica, &pattern);
                Ok((pattern.atoms.len(), out))
            })?;
            for (n, block) in rows {
                atoms += n;
                csv.push(block.trim_end())?;
            }
        }
        "nr-cpp" | "nrlp" => {
            let triplet = load_triplet(&cfg, LevyTriplet::dirac(1.0, 1.0))?;
            gate_admissibility(p, &triplet)?;
            let mut csv =
                CsvFile::create(&dir, "paths.csv", seed, hash, "path_id,time,value,component")?;
            let spec = triplet.levy_measure.clone();
            let eps = cfg.epsilon;
            let synth = process == "nrlp";
            let rows = run_replicas(cfg.n_paths, cfg.workers, |replica| {
                let mut rng = labeled_stream(seed, &label, replica);
                let path = if synth {
                    path_synthesis::synthesize_nrlp(&triplet, p, eps, &grid, &mut rng)
                } else {
                    path_synthesis::sample_reinforced_cpp(&spec, p, &mut rng)
                }
                .map_err(|e| e.to_string())?;
                let mut out = String::new();
                path_rows(&mut out, replica, &path);
                Ok((path.jumps.atoms.len(), out))
            })?;
            for (n, block) in rows {
                atoms += n;
                csv.push(block.trim_end())?;
            }
        }
        "coupled" => {
            let triplet = load_triplet(&cfg, LevyTriplet::dirac(1.0, 1.0))?;
            gate_admissibility(p, &triplet)?;
            let mut paths_csv = CsvFile::create(
                &dir,
                "paths.csv",
                seed,
                hash,
                "path_id,time,value_base,value_reinforced",
            )?;
            let mut jumps_csv = CsvFile::create(
                &dir,
                "jumps.csv",
                seed,
                hash,
                "path_id,innovation_id,time,mark,kept",
            )?;
            let mut summary_csv = CsvFile::create(
                &dir,
                "summary.csv",
                seed,
                hash,
                "path_id,base_jumps,kept,discarded,reinforced_atoms",
            )?;
            let eps = cfg.epsilon;
            let rows = run_replicas(cfg.n_paths, cfg.workers, |replica| {
                let mut rng = labeled_stream(seed, &label, replica);
                let pair = nrlp_core::coupling::sample_coupled_pair(&triplet, p, eps, &grid, &mut rng)
                    .map_err(|e| e.to_string())?;
                let mut paths = String::new();
                for &t in &pair.base.grid {
                    let _ = writeln!(
                        paths,
                        "{replica},{t:.17e},{:.17e},{:.17e}",
                        pair.base.value(t),
                        pair.reinforced.value(t)
                    );
                }
                let mut jumps = String::new();
                for f in &pair.jump_map {
                    let _ = writeln!(
                        jumps,
                        "{replica},{},{:.17e},{:.17e},{}",
                        f.innovation_id, f.time, f.mark, f.kept
                    );
                }
                let kept = pair.jump_map.iter().filter(|f| f.kept).count();
                let summary = format!(
                    "{replica},{},{kept},{},{}",
                    pair.jump_map.len(),
                    pair.jump_map.len() - kept,
                    pair.reinforced.jumps.atoms.len()
                );
                Ok((pair.reinforced.jumps.atoms.len(), paths, jumps, summary))
            })?;
            for (n, paths, jumps, summary) in rows {
                atoms += n;
                if !paths.is_empty() {
                    paths_csv.push(paths.trim_end())?;
                }
                if !jumps.is_empty() {
                    jumps_csv.push(jumps.trim_end())?;
                }
                summary_csv.push(&summary)?;
            }
        }
        "skeleton" => {
            let triplet = load_triplet(&cfg, LevyTriplet::dirac(1.0, 1.0))?;
            gate_admissibility(p, &triplet)?;
            let mut csv = CsvFile::create(
                &dir,
                "walks.csv",
                seed,
                hash,
                "walk_id,k,step,reinforced_step,is_repetition,picked_index",
            )?;
            let n_steps = cfg.grid_points;
            let rows = run_replicas(cfg.n_paths, cfg.workers, |replica| {
                let mut rng = labeled_stream(seed, &label, replica);
                let pair = skeleton::skeleton_pair(&triplet, n_steps, p, &mut rng)
                    .map_err(|e| e.to_string())?;
                let w = &pair.walk;
                let mut out = String::new();
                for k in 0..w.len() {
                    let picked = w.picks[k].map_or(String::new(), |j| (j + 1).to_string());
                    let _ = writeln!(
                        out,
                        "{replica},{},{:.17e},{:.17e},{},{picked}",
                        k + 1,
                        w.steps[k],
                        w.reinforced[k],
                        w.is_repetition[k]
                    );
                }
                Ok(out)
            })?;
            for block in rows {
                csv.push(block.trim_end())?;
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown process '{other}' (expected yule-simon, nrbm, nr-poisson, nr-cpp, nrlp, coupled, skeleton)"
            )));
        }
    }
    println!(
        "simulate {process}: paths={} atoms={atoms} out={} elapsed={:.2}s",
        cfg.n_paths,
        dir.display(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.common)?;
    let hash = config_hash(&cfg, &format!("verify/{}", args.suite));
    let suites: Vec<&str> = if args.suite == "all" {
        verify::SUITES.to_vec()
    } else {
        vec![args.suite.as_str()]
    };
    let mut failures = Vec::new();
    fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| CliError::Config(format!("cannot create output dir: {e}")))?;
    for suite in suites {
        let reports = match suite {
            // Growth-suite overrides from the config file; γα = 1 is the
            // undefined boundary and surfaces as a config error.
            "growth" if cfg.growth_alpha.is_some() || cfg.growth_gamma.is_some() => {
                let alpha = cfg.growth_alpha.unwrap_or(0.5);
                let gamma = cfg.growth_gamma.unwrap_or(1.5);
                let p = memory_param(&cfg)?;
                let mode = if gamma * alpha < 1.0 {
                    GrowthMode::Vanish
                } else {
                    GrowthMode::Explode
                };
                verify::test_growth_rate(alpha, p, gamma, mode, cfg.seed).map(|r| vec![r])
            }
            _ => verify::run_suite(suite, cfg.seed),
        }
        .map_err(|e| CliError::Config(e.to_string()))?;
        let path = cfg.output_dir.join(format!("report_{suite}.json"));
        let json = serde_json::to_string_pretty(&reports).expect("reports serialize");
        let body = format!(
            "{{\"version\":\"{VERSION}\",\"seed\":{},\"config_hash\":\"{hash:016x}\",\"reports\":{json}}}",
            cfg.seed
        );
        fs::write(&path, body)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        for r in &reports {
            let tag = if r.verdict == Verdict::Pass { "PASS" } else { "FAIL" };
            println!("[{tag}] {suite}/{}", r.test_name);
            if r.verdict == Verdict::Fail {
                failures.push(format!("{suite}/{}", r.test_name));
            }
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "{} test(s) failed: {}",
            failures.len(),
            failures.join(", ")
        )))
    }
}

fn cmd_converge(args: ConvergeArgs) -> Result<(), CliError> {
    if args.n_list.is_empty() {
        return Err(CliError::Config("--n-list must not be empty".into()));
    }
    let cfg = load_config(&args.common)?;
    let p = memory_param(&cfg)?;
    let triplet = load_triplet(&cfg, LevyTriplet::dirac(1.0, 1.0))?;
    gate_admissibility(p, &triplet)?;
    let hash = config_hash(&cfg, "converge");
    let mut rng = labeled_stream(cfg.seed, "cli/converge", 0);
    let rows = skeleton::convergence_experiment(
        &triplet,
        p,
        &args.n_list,
        &[0.5, 1.0],
        cfg.n_paths,
        &mut rng,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    let mut csv = CsvFile::create(
        &cfg.output_dir,
        "converge.csv",
        cfg.seed,
        hash,
        "n,probe_time,ks_distance,charfn_gap",
    )?;
    for row in &rows {
        csv.push(&format!(
            "{},{:.6},{:.6},{:.6}",
            row.n, row.probe_time, row.ks_distance, row.joint_gap
        ))?;
    }
    println!(
        "converge: rows={} out={}",
        rows.len(),
        csv.path.display()
    );
    Ok(())
}
