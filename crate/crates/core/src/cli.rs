//! Command-line front end for the `kc` binary.

use crate::compress::{self, GramMode, HerdOptions};
use crate::counterexample::{self, Construction};
use crate::error::{Error, Result};
use crate::io::{self, CoresetFile, Manifest};
use crate::kernel::estimate_const_norm;
use crate::learn::{self, KrrMode, Regularizer};
use crate::repro;
use crate::spectral;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "kc", version, about = "Kernel mean embedding compression and diagnostics")]
pub struct Cli {
    /// Worker threads for parallel kernel evaluations (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for randomized data generation; `KC_SEED` takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compress a sample into a weighted coreset.
    Compress(CompressArgs),
    /// Fit ridge regression on a coreset and optionally predict.
    Krr(KrrArgs),
    /// Squared maximum mean discrepancy between two samples.
    Mmd(MmdArgs),
    /// Spectral lower bounds on widths of the embedded convex hull.
    Diagnose(DiagnoseArgs),
    /// Simulate herding on the non-convergent construction.
    Counterexample(CounterexampleArgs),
    /// Run the named acceptance cases and write a summary table.
    Repro(ReproArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgoArg {
    Herd,
    Fw,
    Epsnet,
}

#[derive(Debug, Args, Serialize)]
pub struct CompressArgs {
    #[arg(long, value_enum)]
    pub algo: AlgoArg,
    /// Number of iterations (herd, fw).
    #[arg(long = "T", default_value_t = 100)]
    pub t: usize,
    /// Net resolution (epsnet).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Kernel configuration: a JSON file or inline JSON.
    #[arg(long)]
    pub kernel: String,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "coreset.json")]
    pub out: PathBuf,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// First herding point.
    #[arg(long, default_value_t = 0)]
    pub init_index: usize,
    /// Evaluate kernel columns on demand instead of caching the Gram matrix.
    #[arg(long)]
    pub streaming: bool,
    /// Domain box for epsnet as `lo,hi` per coordinate, e.g. `-1,1,-1,1`;
    /// defaults to the bounding box of the sample.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub domain: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Sub,
    Min,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegArg {
    Weights,
    Identity,
}

#[derive(Debug, Args, Serialize)]
pub struct KrrArgs {
    #[arg(long)]
    pub coreset: PathBuf,
    /// Training CSV with a `y` column; the sample the coreset was built on.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Sub)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = RegArg::Weights)]
    pub regularizer: RegArg,
    /// Points to predict at; predictions go to `--predictions`.
    #[arg(long)]
    pub predict: Option<PathBuf>,
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
    #[arg(long, default_value = "predictions.csv")]
    pub predictions: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct MmdArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long)]
    pub kernel: String,
    /// Compress both samples with Frank–Wolfe to this many steps first.
    #[arg(long)]
    pub compress: Option<usize>,
    /// Use two-stage batch compression (requires `--compress`).
    #[arg(long)]
    pub hierarchical: bool,
    #[arg(long, default_value = "mmd.json")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    /// `kminus` when the constant is representable on the points, else `kplus`.
    Auto,
    Kplus,
    Kminus,
    Mercer,
    MercerEstimated,
    Kfunctional,
}

#[derive(Debug, Args, Serialize)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub kernel: String,
    /// Points (or grid, for the estimated variants).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = VariantArg::Auto)]
    pub variant: VariantArg,
    /// `1 / ||1||^2` for `kminus`; estimated from the points when omitted.
    #[arg(long)]
    pub c_sq: Option<f64>,
    /// Mercer eigenvalue for `mercer`.
    #[arg(long)]
    pub lambda_tilde: Option<f64>,
    /// Whether the RKHS contains constants (`mercer`, `mercer-estimated`).
    #[arg(long)]
    pub contains_const: bool,
    /// K-functional parameter `t` and basis size (`kfunctional`).
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 4)]
    pub basis_size: usize,
    #[arg(long, default_value = "spectral_report.json")]
    pub out: PathBuf,
    /// Ball-in-sample report: `b,q,c,L,l,sup_k`.
    #[arg(long, value_delimiter = ',')]
    pub ball: Option<Vec<f64>>,
    #[arg(long, default_value = "ball_report.json")]
    pub ball_out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CounterexampleArgs {
    #[arg(long = "T", default_value_t = 250_000)]
    pub t: usize,
    #[arg(long, default_value_t = 40)]
    pub nmax: u32,
    #[arg(long, value_delimiter = ',', default_value = "5,10,20")]
    pub fig2: Vec<u32>,
    /// Levels for the measure check.
    #[arg(long, default_value_t = 20)]
    pub measure_nmax: u32,
    #[arg(long, default_value = "counterexample")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ReproArgs {
    /// Case to run; repeat for several. All cases when omitted.
    #[arg(long = "case")]
    pub cases: Vec<String>,
    #[arg(long, default_value = "repro")]
    pub out_dir: PathBuf,
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("kc: {e}");
            e.exit_code()
        }
    }
}

/// Effective seed: `KC_SEED` when set, else the flag.
pub fn effective_seed(flag: u64) -> Result<u64> {
    match std::env::var("KC_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| Error::Invalid(format!("KC_SEED={v:?} is not an unsigned integer"))),
        Err(_) => Ok(flag),
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Invalid("--threads must be at least 1".into()));
        }
        // A second call in the same process keeps the existing pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let seed = effective_seed(cli.seed)?;
    match cli.command {
        Command::Compress(a) => compress_cmd(&a, seed),
        Command::Krr(a) => krr_cmd(&a, seed),
        Command::Mmd(a) => mmd_cmd(&a, seed),
        Command::Diagnose(a) => diagnose_cmd(&a, seed),
        Command::Counterexample(a) => counterexample_cmd(&a, seed),
        Command::Repro(a) => repro_cmd(&a, seed),
    }
}

fn require_file(p: &Path) -> Result<()> {
    if p.is_file() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("input file {} does not exist", p.display())))
    }
}

fn dir_of(p: &Path) -> PathBuf {
    match p.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn ensure_dir(d: &Path) -> Result<()> {
    fs::create_dir_all(d)?;
    Ok(())
}

fn finish(mut manifest: Manifest, dir: &Path, outputs: &[&Path]) -> Result<i32> {
    manifest.outputs = outputs
        .iter()
        .map(|p| p.strip_prefix(dir).unwrap_or(p).display().to_string())
        .collect();
    io::write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(0)
}

fn compress_cmd(a: &CompressArgs, seed: u64) -> Result<i32> {
    require_file(&a.input)?;
    let kernel = io::read_kernel_config(&a.kernel)?;
    let cfg = io::kernel_config(&kernel)?;
    let mut points = io::read_points_csv(&a.input)?;
    if a.algo != AlgoArg::Epsnet && a.t == 0 {
        return Err(Error::Invalid("--T must be at least 1".into()));
    }
    let manifest = Manifest::new("compress", seed, json!(a), std::slice::from_ref(&a.input))?;

    let (file, trace) = match a.algo {
        AlgoArg::Herd => {
            let mode = if a.streaming { GramMode::Streaming } else { GramMode::Cached };
            let run = compress::herd_with(&kernel, &points, a.t, HerdOptions { init_index: a.init_index, mode })?;
            (CoresetFile::from_coreset(&run.coreset, &kernel)?, Some(run.trace))
        }
        AlgoArg::Fw => {
            let mode = if a.streaming { GramMode::Streaming } else { GramMode::Cached };
            let (c, trace) = compress::frank_wolfe_with(&kernel, &points, a.t, mode)?;
            (CoresetFile::from_coreset(&c, &kernel)?, Some(trace))
        }
        AlgoArg::Epsnet => {
            let eps = a.eps.ok_or_else(|| Error::Invalid("epsnet needs --eps".into()))?;
            let bounds = match &a.domain {
                Some(v) => {
                    if v.len() != 2 * points.dim() {
                        return Err(Error::Invalid(format!("--domain needs {} values", 2 * points.dim())));
                    }
                    v.chunks(2).map(|c| (c[0], c[1])).collect()
                }
                None => points.bounding_box(),
            };
            points = points.with_domain_box(bounds)?;
            let net = compress::epsnet_compress(&points, eps, &kernel)?;
            // Representative sample index for every center.
            let mut reps = vec![usize::MAX; net.centers.len()];
            for (i, &c) in net.assignment.iter().enumerate() {
                if reps[c] == usize::MAX {
                    reps[c] = i;
                }
            }
            let file = CoresetFile {
                indices: reps,
                weights: net.weights.clone(),
                kernel: cfg.clone(),
                n_source: points.len(),
                source_id: Some(points.id()),
                centers: Some(net.centers.clone()),
            };
            (file, None)
        }
    };

    let dir = dir_of(&a.out);
    ensure_dir(&dir)?;
    io::write_json(&a.out, &file)?;
    let mut outs: Vec<&Path> = vec![a.out.as_path()];
    if let (Some(p), Some(t)) = (&a.trace, &trace) {
        io::write_trace_csv(p, t)?;
        outs.push(p.as_path());
    }
    finish(manifest, &dir, &outs)
}

fn krr_cmd(a: &KrrArgs, seed: u64) -> Result<i32> {
    require_file(&a.coreset)?;
    require_file(&a.input)?;
    if let Some(p) = &a.predict {
        require_file(p)?;
    }
    let file: CoresetFile = io::read_json(&a.coreset)?;
    let kernel = file.kernel.build()?;
    let coreset = file.to_coreset()?;
    let train = io::read_points_csv(&a.input)?;
    if coreset.n_source != train.len() {
        return Err(Error::Invalid(format!(
            "coreset was built on {} points but {} has {}",
            coreset.n_source,
            a.input.display(),
            train.len()
        )));
    }
    let y = train
        .labels()
        .ok_or_else(|| Error::Invalid(format!("{} has no y column", a.input.display())))?
        .to_vec();
    let mode = match a.mode {
        ModeArg::Sub => KrrMode::Suboptimal,
        ModeArg::Min => KrrMode::MinimalNorm,
    };
    let reg = match a.regularizer {
        RegArg::Weights => Regularizer::InverseWeights,
        RegArg::Identity => Regularizer::Identity,
    };
    let mut inputs = vec![a.coreset.clone(), a.input.clone()];
    inputs.extend(a.predict.clone());
    let manifest = Manifest::new("krr", seed, json!(a), &inputs)?;
    let model = learn::krr_fit_with(&kernel, &coreset, &train, &y, a.lambda, mode, reg)?;
    let preds = match &a.predict {
        Some(p) => {
            let test = io::read_points_csv(p)?;
            Some(test.rows().map(|x| learn::krr_predict(&model, x)).collect::<Result<Vec<f64>>>()?)
        }
        None => None,
    };

    let dir = dir_of(&a.out);
    ensure_dir(&dir)?;
    io::write_json(&a.out, &model)?;
    let mut outs: Vec<&Path> = vec![a.out.as_path()];
    if let Some(p) = preds {
        #[derive(Serialize)]
        struct Row {
            index: usize,
            prediction: f64,
        }
        let rows: Vec<Row> = p.into_iter().enumerate().map(|(index, prediction)| Row { index, prediction }).collect();
        io::write_records_csv(&a.predictions, &rows)?;
        outs.push(a.predictions.as_path());
    }
    finish(manifest, &dir, &outs)
}

fn mmd_cmd(a: &MmdArgs, seed: u64) -> Result<i32> {
    require_file(&a.a)?;
    require_file(&a.b)?;
    if a.hierarchical && a.compress.is_none() {
        return Err(Error::Invalid("--hierarchical needs --compress <T>".into()));
    }
    let kernel = io::read_kernel_config(&a.kernel)?;
    let pa = io::read_points_csv(&a.a)?;
    let pb = io::read_points_csv(&a.b)?;
    let manifest = Manifest::new("mmd", seed, json!(a), &[a.a.clone(), a.b.clone()])?;
    let result = match a.compress {
        None => learn::mmd_sq(&kernel, &pa, &pb)?,
        Some(t) if a.hierarchical => learn::mmd_sq_hierarchical(&kernel, &pa, &pb, t)?,
        Some(t) => {
            let (ca, _) = compress::frank_wolfe(&kernel, &pa, t)?;
            let (cb, _) = compress::frank_wolfe(&kernel, &pb, t)?;
            learn::mmd_sq_compressed(&kernel, &ca, &pa, &cb, &pb)?
        }
    };
    let dir = dir_of(&a.out);
    ensure_dir(&dir)?;
    io::write_json(&a.out, &result)?;
    finish(manifest, &dir, &[a.out.as_path()])
}

fn diagnose_cmd(a: &DiagnoseArgs, seed: u64) -> Result<i32> {
    require_file(&a.input)?;
    let kernel = io::read_kernel_config(&a.kernel)?;
    let points = io::read_points_csv(&a.input)?;
    let ball_args = match &a.ball {
        Some(v) if v.len() != 6 => return Err(Error::Invalid("--ball needs b,q,c,L,l,sup_k".into())),
        other => other.clone(),
    };
    let manifest = Manifest::new("diagnose", seed, json!(a), std::slice::from_ref(&a.input))?;
    let report = match a.variant {
        VariantArg::Auto => match a.c_sq.map(Ok).unwrap_or_else(|| estimate_const_norm(&kernel, &points).map(|n| 1.0 / n)) {
            Ok(c_sq) => spectral::diam_lower_kminus(&kernel, &points, c_sq)?,
            Err(Error::ConstantNotRepresentable { .. }) => spectral::diam_lower_kplus(&kernel, &points)?,
            Err(e) => return Err(e),
        },
        VariantArg::Kplus => spectral::diam_lower_kplus(&kernel, &points)?,
        VariantArg::Kminus => {
            let c_sq = match a.c_sq {
                Some(c) => c,
                None => 1.0 / estimate_const_norm(&kernel, &points)?,
            };
            spectral::diam_lower_kminus(&kernel, &points, c_sq)?
        }
        VariantArg::Mercer => {
            let l = a.lambda_tilde.ok_or_else(|| Error::Invalid("mercer needs --lambda-tilde".into()))?;
            spectral::diam_lower_mercer(l, a.contains_const)?
        }
        VariantArg::MercerEstimated => spectral::diam_lower_mercer_estimated(&kernel, &points, a.contains_const)?,
        VariantArg::Kfunctional => spectral::diam_lower_kfunctional(&kernel, &points, &points, a.t, a.basis_size)?,
    };
    let ball = match ball_args {
        Some(v) => Some(spectral::ball_report(v[0], v[1], v[2], v[3], v[4] as usize, v[5])?),
        None => None,
    };
    let dir = dir_of(&a.out);
    ensure_dir(&dir)?;
    io::write_json(&a.out, &report)?;
    let mut outs: Vec<&Path> = vec![a.out.as_path()];
    if let Some(b) = ball {
        io::write_json(&a.ball_out, &b)?;
        outs.push(a.ball_out.as_path());
    }
    finish(manifest, &dir, &outs)
}

#[derive(Serialize)]
struct CeTraceRow {
    t: usize,
    kind: char,
    n: u32,
    i: u64,
    norm_sq: f64,
}

fn counterexample_cmd(a: &CounterexampleArgs, seed: u64) -> Result<i32> {
    if a.t == 0 {
        return Err(Error::Invalid("--T must be at least 1".into()));
    }
    let cons = Construction::new(a.nmax)?;
    let manifest = Manifest::new("counterexample", seed, json!(a), &[])?;
    let state = counterexample::run(&cons, a.t)?;
    let invariants = counterexample::verify_invariants(&state, &cons);
    let divergence = counterexample::divergence_check(&state);
    let fig2 = counterexample::figure2_data(&state, &cons, &a.fig2)?;
    let measure = counterexample::measure_mean_check(a.measure_nmax)?;

    let d = &a.out_dir;
    ensure_dir(d)?;
    let rows: Vec<CeTraceRow> = state
        .chosen_log
        .iter()
        .zip(&state.norm_sq_trace)
        .enumerate()
        .map(|(k, (kind, &norm_sq))| CeTraceRow { t: k + 1, kind: kind.letter(), n: kind.n(), i: kind.i(), norm_sq })
        .collect();
    let mut outs = vec![d.join("trace.csv"), d.join("invariants.json"), d.join("divergence.json"), d.join("measure_check.json")];
    io::write_records_csv(&outs[0], &rows)?;
    io::write_json(&outs[1], &invariants)?;
    io::write_json(&outs[2], &divergence)?;
    io::write_json(&outs[3], &measure)?;
    for &m in &a.fig2 {
        let p = d.join(format!("fig2_m{m}.csv"));
        let part: Vec<_> = fig2.iter().filter(|r| r.m == m).cloned().collect();
        io::write_records_csv(&p, &part)?;
        outs.push(p);
    }
    let refs: Vec<&Path> = outs.iter().map(|p| p.as_path()).collect();
    finish(manifest, d, &refs)?;
    if !invariants.passed || divergence.violations > 0 {
        return Err(Error::Invariant(format!(
            "invariant violations {:?}, divergence violations {}",
            invariants.violations, divergence.violations
        )));
    }
    if !measure.passed {
        return Err(Error::Invariant("measure check failed".into()));
    }
    Ok(0)
}

fn repro_cmd(a: &ReproArgs, seed: u64) -> Result<i32> {
    let cases: Vec<String> = if a.cases.is_empty() { repro::CASES.iter().map(|s| s.to_string()).collect() } else { a.cases.clone() };
    for c in &cases {
        if !repro::CASES.contains(&c.as_str()) {
            return Err(Error::Invalid(format!("unknown case {c:?}; known cases: {}", repro::CASES.join(", "))));
        }
    }
    let manifest = Manifest::new("repro", seed, json!({ "cases": cases }), &[])?;
    let reports = repro::run_cases(&cases, seed)?;
    let outs = repro::write_reports(&a.out_dir, &reports)?;
    let refs: Vec<&Path> = outs.iter().map(|p| p.as_path()).collect();
    finish(manifest, &a.out_dir, &refs)?;
    for r in &reports {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.summary);
    }
    Ok(if reports.iter().all(|r| r.passed) { 0 } else { 4 })
}
