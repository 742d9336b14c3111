use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use permerge::builders::{build_cw, build_m, build_m4, build_p, build_p4, FamilyParams};
use permerge::columns::{
    abstract_sim, check_trajectory, ones_per_column, phase_of, ColumnVector, TrajectoryReport,
};
use permerge::netlist::{parse_netlist, to_netlist};
use permerge::oracle::{
    interleave, min_passes, verify_merging, verify_sorting, InputFamily, SortMode, TwoSortedSpec,
    VerificationReport, VerifyOptions,
};
use permerge::Network;

mod render;

const DEFAULT_SEED: u64 = 20240229;

#[derive(Parser)]
#[command(version, about = "Periodic merging comparator networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the netlist of a construction.
    Gen {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print size, depth, delay and period information.
    Stats {
        #[command(flatten)]
        source: Source,
    },
    /// Draw a network as DOT or ASCII.
    Render {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = Style::Ascii)]
        style: Style,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check merging of every pair of sorted 0-1 sequences.
    VerifyMerge {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        passes: Option<usize>,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Check sorting of 0-1 inputs, exhaustively or by sampling.
    VerifySort {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        passes: Option<usize>,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Find the smallest pass count that merges (or sorts).
    MinPasses {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 16)]
        max_passes: usize,
        /// Input family: two-sorted inputs or all 0-1 inputs.
        #[arg(long, value_enum, default_value_t = Inputs::TwoSorted)]
        inputs: Inputs,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Dump the column-count trajectory of one input as CSV.
    Trace {
        #[arg(long)]
        k: u32,
        /// Initial column counts, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["ones_a", "ones_b"])]
        columns: Option<Vec<i64>>,
        /// Ones in the even registers of a 2-sorted input to `M_k`.
        #[arg(long, requires = "ones_b")]
        ones_a: Option<usize>,
        /// Ones in the odd registers of a 2-sorted input to `M_k`.
        #[arg(long, requires = "ones_a")]
        ones_b: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the column-count dynamics over 2-flat inputs.
    AbstractSim {
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Args)]
struct Source {
    /// Construction: cw, p, m, p4 or m4.
    #[arg(value_enum, required_unless_present = "netlist")]
    family: Option<Family>,
    /// Family parameter (also accepted as `--k`).
    #[arg(conflicts_with = "k")]
    k_pos: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    /// Read the network from a netlist file instead.
    #[arg(long, conflicts_with = "family")]
    netlist: Option<PathBuf>,
    /// Allow the 4-periodic constructions.
    #[arg(long)]
    experimental: bool,
}

#[derive(Args)]
struct RunOpts {
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Failures to list in the report.
    #[arg(long, default_value_t = 8)]
    max_failures: usize,
}

#[derive(Args)]
struct Sampling {
    #[arg(long, conflicts_with = "samples")]
    exhaustive: bool,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Cw,
    P,
    M,
    P4,
    M4,
}

#[derive(Clone, Copy, ValueEnum)]
enum Style {
    Dot,
    Ascii,
}

#[derive(Clone, Copy, ValueEnum)]
enum Inputs {
    TwoSorted,
    All,
}

/// Error carrying the process exit code.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

impl From<permerge::Error> for Failure {
    fn from(e: permerge::Error) -> Self {
        usage(e.to_string())
    }
}

type CliResult = Result<u8, Failure>;

struct Loaded {
    net: Network,
    name: String,
    family: Option<Family>,
    k: Option<u32>,
}

impl Source {
    fn load(&self) -> Result<Loaded, Failure> {
        if let Some(path) = &self.netlist {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let net = parse_netlist(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "netlist".into());
            return Ok(Loaded {
                net,
                name,
                family: None,
                k: None,
            });
        }
        let family = self.family.expect("clap requires a family without --netlist");
        let k = self
            .k
            .or(self.k_pos)
            .ok_or_else(|| usage("missing family parameter k"))?;
        let experimental = matches!(family, Family::P4 | Family::M4);
        let net = match family {
            Family::Cw => build_cw(k)?,
            Family::P => build_p(k)?,
            Family::M => build_m(k)?,
            Family::P4 | Family::M4 => {
                if k < 4 || k % 2 != 0 {
                    return Err(usage(format!("k must be even and at least 4, got {k}")));
                }
                if !self.experimental {
                    return Err(usage("the 4-periodic constructions require --experimental"));
                }
                if family == Family::P4 {
                    build_p4(k)?
                } else {
                    build_m4(k)?
                }
            }
        };
        if experimental {
            eprintln!("note: 4-periodic construction for k={k} is experimental");
        }
        let tag = family.to_possible_value().expect("no skipped variants");
        Ok(Loaded {
            net,
            name: format!("{}_k{k}", tag.get_name()),
            family: Some(family),
            k: Some(k),
        })
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            // A closed pipe is not an error worth reporting.
            let _ = stdout.write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn options(run: &RunOpts) -> Result<VerifyOptions, Failure> {
    if run.workers == Some(0) {
        return Err(usage("--workers must be at least 1"));
    }
    Ok(VerifyOptions {
        workers: run.workers,
        max_recorded: run.max_failures,
        ..VerifyOptions::default()
    })
}

fn report(mut r: VerificationReport, name: &str) -> u8 {
    r.network = name.to_string();
    println!("{r}");
    if r.verified() {
        0
    } else {
        1
    }
}

fn gen(source: &Source, out: Option<&Path>) -> CliResult {
    let loaded = source.load()?;
    write_output(out, &to_netlist(&loaded.net))?;
    Ok(0)
}

fn stats(source: &Source) -> CliResult {
    let Loaded { net, name, .. } = source.load()?;
    let sizes: Vec<String> = net.stages().iter().map(|s| s.len().to_string()).collect();
    println!("network: {name}");
    println!("registers: {}", net.n_registers());
    println!("depth: {}", net.depth());
    println!("size: {}", net.size());
    println!("stage sizes: {}", sizes.join(" "));
    println!("delay: {}", net.delay());
    match net.period() {
        Some(p) => println!("period: {p} (structure consistent, pass = {} stages)", net.pass().len()),
        None => println!("period: - (pass = all {} stages)", net.depth()),
    }
    println!("standard: {}", if net.all_standard() { "yes" } else { "no" });
    Ok(0)
}

fn default_passes(loaded: &Loaded, sorting: bool) -> Option<usize> {
    let k = loaded.k? as usize;
    match loaded.family? {
        Family::M => Some(2 * k - 5),
        Family::Cw if sorting => Some(k),
        Family::Cw => Some(1),
        _ => None,
    }
}

fn resolve_passes(given: Option<usize>, loaded: &Loaded, sorting: bool) -> Result<usize, Failure> {
    given
        .or_else(|| default_passes(loaded, sorting))
        .ok_or_else(|| usage("--passes is required for this network"))
}

fn verify_merge(source: &Source, passes: Option<usize>, run: &RunOpts) -> CliResult {
    let loaded = source.load()?;
    let passes = resolve_passes(passes, &loaded, false)?;
    let r = verify_merging(&loaded.net, passes, &options(run)?)?;
    Ok(report(r, &loaded.name))
}

fn verify_sort(source: &Source, passes: Option<usize>, sampling: &Sampling, run: &RunOpts) -> CliResult {
    let loaded = source.load()?;
    let passes = resolve_passes(passes, &loaded, true)?;
    let opts = options(run)?;
    let mode = match (sampling.exhaustive, sampling.samples) {
        (_, Some(samples)) => {
            let seed = sampling.seed.unwrap_or(DEFAULT_SEED);
            println!("seed: {seed}");
            SortMode::Random { samples, seed }
        }
        (true, None) => SortMode::Exhaustive,
        (false, None) if loaded.net.n_registers() <= opts.exhaustive_limit => SortMode::Exhaustive,
        (false, None) => {
            return Err(usage(format!(
                "{} registers is too many for exhaustive checking; pass --samples N",
                loaded.net.n_registers()
            )))
        }
    };
    let r = verify_sorting(&loaded.net, passes, mode, &opts)?;
    Ok(report(r, &loaded.name))
}

fn min_passes_cmd(source: &Source, max_passes: usize, inputs: Inputs, run: &RunOpts) -> CliResult {
    let loaded = source.load()?;
    let family = match inputs {
        Inputs::TwoSorted => InputFamily::TwoSorted,
        Inputs::All => InputFamily::All,
    };
    let r = min_passes(&loaded.net, family, max_passes, &options(run)?)?;
    println!("network: {}", loaded.name);
    println!("inputs per pass count: {}", r.total_inputs);
    for (p, f) in r.failures_per_pass.iter().enumerate() {
        println!("passes={p} failures={f}");
    }
    println!("monotone: {}", if r.monotone { "yes" } else { "no" });
    match r.found {
        Some(p) => {
            println!("minimum passes: {p}");
            Ok(0)
        }
        None => {
            println!("minimum passes: exceeded {max_passes}");
            Ok(1)
        }
    }
}

fn trace_csv(r: &TrajectoryReport) -> String {
    let b = r.states[0].b();
    let mut out = String::from("application,phase");
    for j in 1..=b {
        out.push_str(&format!(",c{j}"));
    }
    out.push_str(",flat,two_flat,balanced,interval\n");
    let yes = |v: bool| if v { "1" } else { "0" };
    for (i, c) in r.states.iter().enumerate() {
        let phase = if i == 0 { "-".to_string() } else { phase_of(i).to_string() };
        let interval = match r.interval_ok.get(i.wrapping_sub(1)) {
            Some(true) if i > 0 => "pass",
            Some(false) if i > 0 => "fail",
            _ => "-",
        };
        let values: Vec<String> = c.c.iter().map(i64::to_string).collect();
        out.push_str(&format!(
            "{i},{phase},{},{},{},{},{interval}\n",
            values.join(","),
            yes(c.is_flat()),
            yes(c.is_two_flat()),
            yes(c.is_balanced()),
        ));
    }
    out
}

fn trace(k: u32, columns: Option<&[i64]>, ones: Option<(usize, usize)>, out: Option<&Path>) -> CliResult {
    let fp = FamilyParams::new(k)?;
    let c = match (columns, ones) {
        (Some(c), _) => ColumnVector::new(k, c.to_vec())?,
        (None, Some((a, b))) => {
            let spec = TwoSortedSpec::new(fp.m_registers(), a, b)?;
            ones_per_column(&spec.vector(), k)?
        }
        (None, None) => return Err(usage("pass --columns or --ones-a/--ones-b")),
    };
    let r = check_trajectory(&c)?;
    write_output(out, &trace_csv(&r))?;
    for v in &r.violations {
        eprintln!("violation at application {}: {:?}: {}", v.application, v.kind, v.detail);
    }
    Ok(if r.ok() { 0 } else { 1 })
}

fn random_two_flat(k: u32, rng: &mut ChaCha8Rng) -> ColumnVector {
    let fp = FamilyParams { k };
    let half = fp.b() / 2;
    let max = fp.n() as i64;
    let mut flat = || {
        let v = rng.gen_range(0..=max);
        let r = if v < max { rng.gen_range(0..half) } else { 0 };
        let mut s = vec![v; half - r];
        s.extend(std::iter::repeat_n(v + 1, r));
        s
    };
    let odd = flat();
    let even = flat();
    ColumnVector { k, c: interleave(&odd, &even) }
}

fn abstract_sim_cmd(k: u32, sampling: &Sampling, workers: Option<usize>) -> CliResult {
    FamilyParams::new(k)?;
    let pool = match workers {
        Some(0) => return Err(usage("--workers must be at least 1")),
        Some(w) => rayon::ThreadPoolBuilder::new().num_threads(w).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .map_err(|e| usage(e.to_string()))?;
    let apps = 6 * k as usize - 15;
    let name = format!("columns_k{k}");
    let failures = if let Some(samples) = sampling.samples {
        let seed = sampling.seed.unwrap_or(DEFAULT_SEED);
        println!("seed: {seed}");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inputs: Vec<ColumnVector> = (0..samples).map(|_| random_two_flat(k, &mut rng)).collect();
        let reports: Vec<TrajectoryReport> =
            pool.install(|| inputs.par_iter().map(check_trajectory).collect::<Result<_, _>>())?;
        let bad: Vec<&TrajectoryReport> = reports.iter().filter(|r| !r.ok()).collect();
        for r in bad.iter().take(8) {
            eprintln!("violation for {}: {:?}", r.states[0], r.violations[0]);
        }
        println!("sampled 2-flat inputs: {samples}");
        println!("RESULT family=two-flat network={name} passes={apps} inputs={samples} failures={}", bad.len());
        bad.len()
    } else {
        let s = pool.install(|| abstract_sim(k))?;
        println!("2-flat inputs: {}", s.inputs);
        println!("balanced: {}", s.balanced_inputs);
        println!("flat after {apps} applications: {}", s.flat_at_end);
        println!("balanced endpoints exact after {}: {}", 5 * k - 12, s.endpoint_matches);
        println!("balanced trajectories inside interval states: {}", s.interval_sound);
        println!("latest flat application: {} (balanced: {})", s.latest_flat, s.latest_flat_balanced);
        for (c, v) in &s.examples {
            eprintln!("violation for {c}: {v:?}");
        }
        println!(
            "RESULT family=two-flat network={name} passes={apps} inputs={} failures={}",
            s.inputs, s.violating_inputs
        );
        s.violating_inputs as usize
    };
    Ok(if failures == 0 { 0 } else { 1 })
}

fn run(cli: Cli) -> CliResult {
    match &cli.command {
        Command::Gen { source, out } => gen(source, out.as_deref()),
        Command::Stats { source } => stats(source),
        Command::Render { source, style, out } => {
            let net = source.load()?.net;
            let text = match style {
                Style::Dot => render::dot(&net),
                Style::Ascii => render::ascii(&net),
            };
            write_output(out.as_deref(), &text)?;
            Ok(0)
        }
        Command::VerifyMerge { source, passes, run } => verify_merge(source, *passes, run),
        Command::VerifySort {
            source,
            passes,
            sampling,
            run,
        } => verify_sort(source, *passes, sampling, run),
        Command::MinPasses {
            source,
            max_passes,
            inputs,
            run,
        } => min_passes_cmd(source, *max_passes, *inputs, run),
        Command::Trace {
            k,
            columns,
            ones_a,
            ones_b,
            out,
        } => trace(*k, columns.as_deref(), ones_a.zip(*ones_b), out.as_deref()),
        Command::AbstractSim { k, sampling, workers } => abstract_sim_cmd(*k, sampling, *workers),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
