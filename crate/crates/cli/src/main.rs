//! `so6`: build lookup tables, synthesize T-count optimal words, verify
//! and benchmark.
//!
//! Lines starting with `#so6 ` carry one JSON record each, for scripts.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use so6_core::canon::canonicalize;
use so6_core::dyadic::Dyadic;
use so6_core::lut::{generate_lut_with, Lut, LutOptions, Node};
use so6_core::mitm::{mitm_sides, MitmOptions, ProbeBudget};
use so6_core::oracle::{naive_bfs, BigDyadic, Variant};
use so6_core::store::{self, Verify};
use so6_core::word::evaluate_word;
use so6_core::{Error, So6Matrix};

const EXIT_USAGE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_RESOURCE: u8 = 4;
const EXIT_INTEGRITY: u8 = 5;
const EXIT_NOT_FOUND: u8 = 6;

#[derive(Parser)]
#[command(name = "so6", version, about = "T-count optimal synthesis of two-qubit Clifford+T operators")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "SO6_THREADS")]
    threads: Option<usize>,
    /// Progress output on stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a lookup table up to a given T-distance and write it to disk.
    BuildLut(BuildArgs),
    /// Find a T-count optimal word for a target.
    Synth(SynthArgs),
    /// Print only the optimal T-count of a target.
    Tcount(SynthArgs),
    /// Re-check the invariants of a stored table.
    Verify {
        #[arg(long)]
        lut: PathBuf,
        /// Check every record instead of a sample.
        #[arg(long)]
        deep: bool,
    },
    /// Build a table and print per-depth CSV rows.
    Bench {
        #[arg(long, default_value = "identity")]
        root: String,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long)]
        max_nodes: Option<usize>,
    },
    /// Reference computations for test fixtures.
    #[command(hide = true, subcommand)]
    Oracle(OracleCmd),
}

#[derive(Args)]
struct BuildArgs {
    /// `identity` or a matrix file.
    #[arg(long, default_value = "identity")]
    root: String,
    #[arg(long)]
    depth: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stop with a resource error beyond this many representatives.
    #[arg(long)]
    max_nodes: Option<usize>,
    /// Disable backtracking suppression (results are identical).
    #[arg(long)]
    no_suppress: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// A matrix file, or a word such as `G(1,2) X(3,4) P[...]`.
    #[arg(long)]
    target: String,
    /// Answer from this table, falling back to a search seeded by it.
    #[arg(long, conflicts_with = "mitm")]
    lut: Option<PathBuf>,
    /// Bidirectional search from the identity (the default without --lut).
    #[arg(long)]
    mitm: bool,
    /// Storage-free probe budget in milliseconds, or `auto`.
    #[arg(long)]
    probe_budget: Option<String>,
    /// Largest total search depth before giving up.
    #[arg(long, default_value_t = 24)]
    max_depth: usize,
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Class counts per distance by exhaustive enumeration (depth <= 4).
    Bfs {
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, value_enum, default_value = "signed-perms")]
        variant: VariantArg,
    },
    /// Random dyadic operations with big-integer results, one JSON per line.
    Dyadic {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Orbit minimum of a target by exhaustion.
    Canon {
        #[arg(long)]
        target: String,
        #[arg(long, value_enum, default_value = "signed-perms")]
        variant: VariantArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    SignedPerms,
    DetOne,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::SignedPerms => Variant::SignedPerms,
            VariantArg::DetOne => Variant::DetOne,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RESOURCE);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::NotFoundWithinBudget { .. }) => EXIT_NOT_FOUND,
        Some(Error::Resource(_)) | Some(Error::Overflow { .. }) => EXIT_RESOURCE,
        Some(Error::Integrity(_)) | Some(Error::Format { .. }) => EXIT_INTEGRITY,
        Some(_) => EXIT_VALIDATION,
        None if e.downcast_ref::<UsageError>().is_some() => EXIT_USAGE,
        None => EXIT_VALIDATION,
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn record(kind: &str, value: impl Serialize) {
    let mut v = serde_json::to_value(value).unwrap_or_default();
    if let Some(obj) = v.as_object_mut() {
        obj.insert("kind".into(), kind.into());
    }
    println!("#so6 {v}");
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let verbose = cli.verbose;
    match cli.cmd {
        Command::BuildLut(a) => build_lut(a, verbose),
        Command::Synth(a) => synth(a, false, verbose),
        Command::Tcount(a) => synth(a, true, verbose),
        Command::Verify { lut, deep } => verify(&lut, deep),
        Command::Bench { root, depth, max_nodes } => bench(&root, depth, max_nodes),
        Command::Oracle(o) => oracle(o),
    }
}

fn read_root(spec: &str) -> anyhow::Result<So6Matrix> {
    if spec == "identity" {
        return Ok(So6Matrix::identity());
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("reading root matrix {spec}"))?;
    store::parse_matrix(&text).with_context(|| format!("parsing {spec}"))
}

/// A target is a matrix file if such a file exists, otherwise a word.
fn read_target(spec: &str) -> anyhow::Result<So6Matrix> {
    if Path::new(spec).is_file() {
        return read_root(spec);
    }
    let w = store::parse_word(spec).context("target is neither a readable file nor a word")?;
    Ok(evaluate_word(&w).map_err(Error::from)?)
}

/// Rough resident size of a table: nodes plus index entries.
fn memory_estimate(nodes: usize) -> usize {
    nodes * (std::mem::size_of::<Node>() + 48)
}

#[derive(Serialize)]
struct LayerRecord {
    depth: usize,
    layer: u64,
    cumulative: usize,
    candidates: u64,
    known: u64,
    duplicates: u64,
    seconds: f64,
    memory_bytes: usize,
}

fn build(root: &So6Matrix, depth: usize, opts: &LutOptions, verbose: bool) -> anyhow::Result<(Lut, Duration)> {
    let start = Instant::now();
    let lut = generate_lut_with(root, depth, opts, |st, total| {
        let rec = LayerRecord {
            depth: st.depth,
            layer: st.size,
            cumulative: total,
            candidates: st.candidates,
            known: st.known,
            duplicates: st.duplicates,
            seconds: st.elapsed.as_secs_f64(),
            memory_bytes: memory_estimate(total),
        };
        if verbose {
            let rate = st.candidates as f64 / st.elapsed.as_secs_f64().max(1e-9);
            eprintln!("depth {:>2}: {:>10} new, {:>10} total, {:.3}s, {:.0} candidates/s", rec.depth, rec.layer, total, rec.seconds, rate);
        }
        println!(
            "depth {:>2}  layer {:>10}  cumulative {:>10}  {:>9.3}s  ~{:.1} MiB",
            rec.depth,
            rec.layer,
            rec.cumulative,
            rec.seconds,
            rec.memory_bytes as f64 / (1 << 20) as f64
        );
        record("layer", &rec);
    })?;
    Ok((lut, start.elapsed()))
}

fn build_lut(a: BuildArgs, verbose: bool) -> anyhow::Result<()> {
    let root = read_root(&a.root)?;
    let opts = LutOptions { suppress_backtracking: !a.no_suppress, max_nodes: a.max_nodes };
    let (lut, elapsed) = build(&root, a.depth, &opts, verbose)?;
    println!("total {} representatives in {:.3}s", lut.len(), elapsed.as_secs_f64());
    if let Some(out) = &a.out {
        store::save_lut(&lut, out).with_context(|| format!("writing {}", out.display()))?;
        println!("wrote {}", out.display());
    }
    record(
        "build",
        json!({
            "depth": a.depth,
            "representatives": lut.len(),
            "seconds": elapsed.as_secs_f64(),
            "out": a.out.as_ref().map(|p| p.display().to_string()),
        }),
    );
    Ok(())
}

fn parse_budget(s: Option<&str>) -> anyhow::Result<ProbeBudget> {
    match s {
        None => Ok(ProbeBudget::Off),
        Some("auto") => Ok(ProbeBudget::Auto),
        Some(ms) => {
            let ms: u64 = ms.parse().map_err(|_| UsageError(format!("bad --probe-budget `{ms}`")))?;
            Ok(ProbeBudget::Fixed(Duration::from_millis(ms)))
        }
    }
}

fn synth(a: SynthArgs, count_only: bool, verbose: bool) -> anyhow::Result<()> {
    let target = read_target(&a.target)?;
    target.validate()?;
    let start = Instant::now();
    let opts = MitmOptions { max_depth: a.max_depth, probe: parse_budget(a.probe_budget.as_deref())?, ..Default::default() };

    let mut table = match &a.lut {
        Some(p) => Some(store::load_lut(p, Verify::default()).with_context(|| format!("loading {}", p.display()))?),
        None => None,
    };
    if let Some(lut) = &table {
        if lut.root() != &So6Matrix::identity() {
            return Err(UsageError("synthesis tables must be rooted at the identity".into()).into());
        }
    }

    let (word, source, left_depth, right_depth) = match table.as_mut() {
        Some(lut) => match lut.synthesize(&target) {
            Some(rec) => {
                let rec = rec?;
                let d = rec.tcount();
                (rec.into_word(), "table", d, 0)
            }
            None => {
                if verbose {
                    eprintln!("class beyond table depth {}, searching", lut.depth());
                }
                let mut right = Lut::init(&target)?;
                let r = mitm_sides(lut, &mut right, &opts)?;
                let w = r.word_for_perm_root(so6_core::SignedPerm::IDENTITY);
                (w, if r.probed { "probe" } else { "search" }, r.left_depth, r.right_depth)
            }
        },
        None => {
            let mut left = Lut::init(&So6Matrix::identity())?;
            let mut right = Lut::init(&target)?;
            let r = mitm_sides(&mut left, &mut right, &opts)?;
            let w = r.word_for_perm_root(so6_core::SignedPerm::IDENTITY);
            (w, if r.probed { "probe" } else { "search" }, r.left_depth, r.right_depth)
        }
    };
    if evaluate_word(&word).map_err(Error::from)? != target {
        return Err(Error::Integrity("result does not evaluate to the target".into()).into());
    }
    let elapsed = start.elapsed().as_secs_f64();
    if count_only {
        println!("{}", word.tcount());
        return Ok(());
    }
    println!("{}", store::format_word(&word));
    println!("tcount {}", word.tcount());
    println!("time {elapsed:.3}s ({source})");
    record(
        "synth",
        json!({
            "tcount": word.tcount(),
            "word": store::format_word(&word),
            "source": source,
            "left_depth": left_depth,
            "right_depth": right_depth,
            "seconds": elapsed,
        }),
    );
    Ok(())
}

fn verify(path: &Path, deep: bool) -> anyhow::Result<()> {
    let lut = store::load_lut(path, if deep { Verify::All } else { Verify::default() })?;
    println!("ok: {} layers, {} representatives", lut.layers().len(), lut.len());
    record("verify", json!({ "layers": lut.layers().len(), "representatives": lut.len(), "deep": deep }));
    Ok(())
}

fn bench(root: &str, depth: usize, max_nodes: Option<usize>) -> anyhow::Result<()> {
    let root = read_root(root)?;
    let opts = LutOptions { max_nodes, ..Default::default() };
    let start = Instant::now();
    let mut rows = Vec::new();
    generate_lut_with(&root, depth, &opts, |st, total| {
        rows.push((st.depth, total, start.elapsed().as_secs_f64(), memory_estimate(total), st.candidates));
    })?;
    let out = std::io::stdout();
    let mut out = out.lock();
    writeln!(out, "k,representatives,time_s,memory_bytes,candidates")?;
    for (k, reps, t, mem, cand) in rows {
        writeln!(out, "{k},{reps},{t:.6},{mem},{cand}")?;
    }
    Ok(())
}

fn oracle(cmd: OracleCmd) -> anyhow::Result<()> {
    match cmd {
        OracleCmd::Bfs { depth, variant } => {
            let layers = naive_bfs(&So6Matrix::identity(), depth, variant.into())?;
            let mut cum = 0;
            for (d, l) in layers.iter().enumerate() {
                cum += l.len();
                println!("{d},{},{cum}", l.len());
            }
        }
        OracleCmd::Dyadic { seed, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pick = |rng: &mut ChaCha8Rng| loop {
                let c = rng.gen_range(0..12i64);
                let lim = 1i64 << (c / 2 + 2);
                if let Ok(x) = Dyadic::new(rng.gen_range(-lim..=lim), rng.gen_range(-lim..=lim), c) {
                    return x;
                }
            };
            for _ in 0..count {
                let (x, y) = (pick(&mut rng), pick(&mut rng));
                let (bx, by) = (BigDyadic::from_dyadic(x), BigDyadic::from_dyadic(y));
                let show = |b: BigDyadic| format!("{},{},{}", b.a, b.b, b.c);
                println!(
                    "{}",
                    json!({
                        "x": x.to_string(), "y": y.to_string(),
                        "add": show(bx.add(&by)), "mul": show(bx.mul(&by)),
                        "twist_x": show(bx.twist()), "div_sqrt2_x": show(bx.div_sqrt2()),
                    })
                );
            }
        }
        OracleCmd::Canon { target, variant } => {
            let m = read_target(&target)?;
            let c = so6_core::oracle::naive_canon(&m, variant.into());
            print!("{}", store::format_matrix(&c));
            if matches!(variant, VariantArg::SignedPerms) && canonicalize(&m).matrix != c {
                return Err(anyhow!("fast canonical form disagrees with the exhaustive one"));
            }
        }
    }
    Ok(())
}
