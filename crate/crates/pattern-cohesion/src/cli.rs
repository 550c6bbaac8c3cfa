//! Command-line driver: `present` inputs into a store, score `cohesion`,
//! rank `split` candidates, `simulate` activation scenarios, and run the
//! dataset `bench`. Exit codes: 0 success, 1 usage or input errors, 2 when
//! the benchmark's directional check fails.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::activation::{ActivationError, ActivationState};
use crate::bench::{
    build_report, load_dataset, BenchError, Delimiter, LabelPosition, Normalization, TableSchema,
};
use crate::cohesion::{
    instance_cohesion, node_cohesion_count, CohesionError, CohesionThreshold, CountFactorMode,
};
use crate::model::{InputPattern, ModelError, PatternId, PatternStore};
use crate::reinforcement::{decay, present, ReinforceError, UpdateConfig};
use crate::split::{rank_single_removals, suggest_split, SplitError};

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Reinforce(#[from] ReinforceError),
    #[error(transparent)]
    Cohesion(#[from] CohesionError),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Activation(#[from] ActivationError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("i/o error: {0}")]
    Output(#[from] std::io::Error),
    #[error("{0}")]
    Message(String),
}

/// True when the error chain bottoms out in a broken pipe, i.e. the reader
/// of our stdout went away; that is a clean exit, not a failure.
fn is_broken_pipe(err: &CliError) -> bool {
    let mut cur: Option<&(dyn std::error::Error + 'static)> = Some(err);
    while let Some(e) = cur {
        if let Some(io) = e.downcast_ref::<std::io::Error>() {
            if io.kind() == std::io::ErrorKind::BrokenPipe {
                return true;
            }
        }
        cur = e.source();
    }
    false
}

/// Writer that goes quiet once the reader disappears: a broken pipe stops
/// the printing, never the work behind it.
struct BestEffortOut<W: Write> {
    inner: W,
    dead: bool,
}

impl<W: Write> BestEffortOut<W> {
    fn new(inner: W) -> Self {
        Self { inner, dead: false }
    }
}

impl<W: Write> Write for BestEffortOut<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        if self.dead {
            return Ok(buf.len());
        }
        match self.inner.write(buf) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {
                self.dead = true;
                Ok(buf.len())
            }
            other => other,
        }
    }

    fn flush(&mut self) -> std::io::Result<()> {
        if self.dead {
            return Ok(());
        }
        match self.inner.flush() {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {
                self.dead = true;
                Ok(())
            }
            other => other,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "pattern-cohesion",
    version,
    about = "Counting-based pattern clustering: presentation updates, cohesion scores, split search, activation dynamics and a dataset benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Apply an input-pattern file to a store and persist the result
    Present(PresentArgs),
    /// Score every stored pattern and its nodes
    Cohesion(CohesionArgs),
    /// Rank single-node removals and suggest a split for one pattern
    Split(SplitArgs),
    /// Run an activation scenario and emit the input-signal trace
    Simulate(SimulateArgs),
    /// Compare per-category cohesion against chi-square on a dataset
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct PresentArgs {
    /// Store file; created when missing
    store: PathBuf,
    /// Input patterns, one per line: `t <timestamp> <node>:<signal> ...`
    inputs: PathBuf,
    /// Individual increment applied to weights and individual counts
    #[arg(long = "omega-i", default_value_t = 1.0)]
    omega_i: f64,
    /// Group increment applied to group counts
    #[arg(long = "omega-g", default_value_t = 1.0)]
    omega_g: f64,
    /// Multiplicative weight decay applied before each presentation; 1 = off
    #[arg(long, default_value_t = 1.0)]
    decay: f64,
    /// Create a new instance when the best overlap fraction is below this
    #[arg(long = "overlap-threshold", default_value_t = 1.0)]
    overlap_threshold: f64,
    /// Scale weight increments by the input signal value
    #[arg(long = "signal-scaled", default_value_t = false)]
    signal_scaled: bool,
}

#[derive(Args, Debug)]
struct CohesionArgs {
    /// Store file to score
    store: PathBuf,
    /// Allowed per-event count gap for the node-level test
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
}

#[derive(Args, Debug)]
struct SplitArgs {
    /// Store file to read
    store: PathBuf,
    /// Pattern to analyse
    pattern_id: u64,
    /// Allowed per-event count gap for the node-level test
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Scenario file (patterns, ledgers, horizon, delta, threshold)
    scenario: PathBuf,
    /// Override the scenario's inhibition weight
    #[arg(long = "inhibit-delta")]
    inhibit_delta: Option<f64>,
    /// Write the trace here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum NormalizeArg {
    Minmax,
    None,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Dataset file of labeled rows
    dataset: PathBuf,
    /// minmax reports raw plus normalized scores; none reports raw only
    #[arg(long, value_enum, default_value_t = NormalizeArg::Minmax)]
    normalize: NormalizeArg,
    /// Label column: 0-based index or 'last'
    #[arg(long = "label-col", default_value = "last")]
    label_col: String,
    /// Cell delimiter: 'ws' for whitespace or a single character
    #[arg(long, default_value = "ws")]
    delimiter: String,
    /// Use the image-segment layout (19 variables, labels 1-7)
    #[arg(long, default_value_t = false)]
    statlog: bool,
    /// Also write the machine-readable report here
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses the process arguments, runs the command, and returns the exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) if is_broken_pipe(&err) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(BestEffortOut::new(stdout.lock()));
    let code = match command {
        Command::Present(args) => cmd_present(args, &mut out),
        Command::Cohesion(args) => cmd_cohesion(args, &mut out),
        Command::Split(args) => cmd_split(args, &mut out),
        Command::Simulate(args) => cmd_simulate(args, &mut out),
        Command::Bench(args) => cmd_bench(args, &mut out),
    }?;
    out.flush()?;
    Ok(code)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn load_store(path: &Path) -> Result<PatternStore, CliError> {
    if path.exists() {
        Ok(PatternStore::load_from_path(path)?)
    } else {
        Ok(PatternStore::new())
    }
}

/// Writes the store next to its final location, then renames it into place,
/// so a failed run never leaves a half-written store behind.
fn save_store_atomic(store: &PatternStore, path: &Path) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    store.save_to_path(&tmp).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))?;
    Ok(())
}

fn cmd_present(args: PresentArgs, out: &mut impl Write) -> Result<i32, CliError> {
    let cfg = UpdateConfig {
        individual_increment: args.omega_i,
        group_increment: args.omega_g,
        decay_factor: args.decay,
        new_instance_overlap_threshold: args.overlap_threshold,
        signal_scaled: args.signal_scaled,
    };
    cfg.validate()?;
    writeln!(
        out,
        "parameters: omega_i={} omega_g={} decay={} overlap_threshold={} signal_scaled={}",
        cfg.individual_increment,
        cfg.group_increment,
        cfg.decay_factor,
        cfg.new_instance_overlap_threshold,
        cfg.signal_scaled
    )?;

    let mut store = load_store(&args.store)?;
    let file = File::open(&args.inputs).map_err(io_err(&args.inputs))?;
    let inputs = InputPattern::parse_file(BufReader::new(file))?;

    for ip in &inputs {
        if cfg.decay_factor < 1.0 {
            decay(&mut store, &cfg)?;
        }
        let outcome = present(&mut store, ip, &cfg)?;
        writeln!(out, "input t={} ({} nodes): {} instance(s) touched", ip.timestamp(), ip.len(), outcome.touched.len())?;
        for touch in &outcome.touched {
            let members = store
                .pattern(touch.pattern)
                .map(|p| p.member_count())
                .unwrap_or(0);
            let marker = if touch.created { " (new)" } else { "" };
            writeln!(out, "  pattern {}: shared {}/{}{marker}", touch.pattern, touch.shared, members)?;
        }
    }

    save_store_atomic(&store, &args.store)?;
    writeln!(
        out,
        "store saved: {} ({} patterns, clock {})",
        args.store.display(),
        store.len(),
        store.clock()
    )?;
    Ok(0)
}

fn cmd_cohesion(args: CohesionArgs, out: &mut impl Write) -> Result<i32, CliError> {
    let thr = CohesionThreshold::new(args.delta)?;
    writeln!(out, "parameters: delta={}", thr.delta())?;
    let store = PatternStore::load_from_path(&args.store)?;
    writeln!(out, "patterns: {}", store.len())?;
    for p in store.patterns() {
        match instance_cohesion(p, CountFactorMode::CountRatio) {
            Ok(rep) => {
                writeln!(
                    out,
                    "pattern {}: cohesion={:.6} var={:.6} cf={:.6} lav={:.6} gav={:.6} members={} events={}",
                    p.id(),
                    rep.cohesion,
                    rep.var_coefficient,
                    rep.count_factor,
                    rep.local_mean,
                    rep.global_mean,
                    p.member_count(),
                    p.group_events()
                )?;
                for node in p.members() {
                    let rec = p.record(node).expect("member has a record");
                    let verdict = match node_cohesion_count(p, node, thr) {
                        Ok(true) => "cohesive",
                        Ok(false) => "outlier",
                        Err(_) => "untested (no events)",
                    };
                    let gap = if p.group_events() > 0 {
                        (rec.group_count - rec.individual_count) / p.group_events() as f64
                    } else {
                        0.0
                    };
                    writeln!(
                        out,
                        "  node {node}: R={:.6} CI={:.6} CG={:.6} gap={gap:.6} {verdict}",
                        rec.reinforcement, rec.individual_count, rec.group_count
                    )?;
                }
            }
            Err(err) => writeln!(out, "pattern {}: not scorable ({err})", p.id())?,
        }
    }
    Ok(0)
}

fn cmd_split(args: SplitArgs, out: &mut impl Write) -> Result<i32, CliError> {
    let thr = CohesionThreshold::new(args.delta)?;
    writeln!(out, "parameters: delta={}", thr.delta())?;
    let store = PatternStore::load_from_path(&args.store)?;
    let id = PatternId(args.pattern_id);
    let Some(pattern) = store.pattern(id) else {
        let known: Vec<String> = store.pattern_ids().map(|p| p.to_string()).collect();
        return Err(CliError::Message(format!(
            "no pattern {id} in store; known ids: {}",
            if known.is_empty() { "(none)".into() } else { known.join(", ") }
        )));
    };
    if pattern.member_count() < 2 {
        return Err(CliError::Message(format!(
            "pattern {id} has a single member; there is nothing to split"
        )));
    }

    let counts = pattern.count_map();
    writeln!(out, "pattern {id}: {} members, events={}", pattern.member_count(), pattern.group_events())?;
    writeln!(out, "removal ranking (best remainder first):")?;
    for (node, eval) in rank_single_removals(&counts)? {
        writeln!(
            out,
            "  remove node {node}: remainder={:.6} composite={:.6}",
            eval.remainder_cohesion, eval.composite
        )?;
    }

    match suggest_split(pattern, thr)? {
        Some(s) => {
            let parts: Vec<String> = s
                .partition
                .parts()
                .iter()
                .map(|part| {
                    let ids: Vec<String> = part.iter().map(|n| n.to_string()).collect();
                    format!("{{{}}}", ids.join(","))
                })
                .collect();
            writeln!(
                out,
                "suggestion: split {} (composite {:.6} vs unsplit {:.6})",
                parts.join(" | "),
                s.evaluation.composite,
                s.unsplit_cohesion
            )?;
        }
        None => writeln!(out, "suggestion: none (no split improves on the unsplit score)")?,
    }
    Ok(0)
}

fn cmd_simulate(args: SimulateArgs, out: &mut impl Write) -> Result<i32, CliError> {
    let file = File::open(&args.scenario).map_err(io_err(&args.scenario))?;
    let mut state = ActivationState::parse_scenario(BufReader::new(file))?;
    if let Some(delta) = args.inhibit_delta {
        state.set_delta(delta)?;
    }
    let header = format!(
        "# parameters: delta={} horizon={} threshold={:?} patterns={}",
        state.delta(),
        state.horizon(),
        state.firing_threshold(),
        state.patterns().len()
    );
    let trace = state.run()?;
    match &args.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
            writeln!(w, "{header}").map_err(io_err(path))?;
            trace.write(&mut w).map_err(io_err(path))?;
            w.flush().map_err(io_err(path))?;
            writeln!(out, "trace written: {} ({} entries)", path.display(), trace.len())?;
        }
        None => {
            writeln!(out, "{header}")?;
            trace.write(&mut *out)?;
        }
    }
    Ok(0)
}

fn parse_delimiter(raw: &str) -> Result<Delimiter, CliError> {
    match raw {
        "ws" | "whitespace" => Ok(Delimiter::Whitespace),
        s if s.chars().count() == 1 => Ok(Delimiter::Char(s.chars().next().expect("one char"))),
        other => Err(CliError::Message(format!(
            "delimiter must be 'ws' or a single character, got '{other}'"
        ))),
    }
}

fn parse_label_col(raw: &str) -> Result<LabelPosition, CliError> {
    if raw == "last" {
        return Ok(LabelPosition::Last);
    }
    raw.parse::<usize>().map(LabelPosition::Index).map_err(|_| {
        CliError::Message(format!("label column must be a 0-based index or 'last', got '{raw}'"))
    })
}

fn cmd_bench(args: BenchArgs, out: &mut impl Write) -> Result<i32, CliError> {
    let delimiter = parse_delimiter(&args.delimiter)?;
    let label = parse_label_col(&args.label_col)?;
    let schema = if args.statlog {
        TableSchema { delimiter, label, ..TableSchema::statlog() }
    } else {
        TableSchema {
            name: args
                .dataset
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".into()),
            delimiter,
            label,
            has_header: false,
            categories: None,
        }
    };
    let normalization = match args.normalize {
        NormalizeArg::Minmax => Normalization::MinMax,
        NormalizeArg::None => Normalization::Off,
    };
    writeln!(
        out,
        "parameters: normalize={} delimiter={} label_col={} statlog={}",
        match args.normalize {
            NormalizeArg::Minmax => "minmax",
            NormalizeArg::None => "none",
        },
        args.delimiter,
        args.label_col,
        args.statlog
    )?;

    let file = File::open(&args.dataset).map_err(io_err(&args.dataset))?;
    let table = load_dataset(BufReader::new(file), &schema)?;
    let report = build_report(&table, normalization)?;
    write!(out, "{}", report.render_text())?;

    if let Some(path) = &args.out {
        let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
        report.write_machine(&mut w).map_err(io_err(path))?;
        w.flush().map_err(io_err(path))?;
        writeln!(out, "machine report written: {}", path.display())?;
    }

    if report.directional_claim_holds() {
        Ok(0)
    } else {
        let section = report.preferred_section();
        let whole = section.whole.cohesion.cohesion;
        let failing: Vec<String> = section
            .categories
            .iter()
            .filter(|c| c.cohesion.cohesion <= whole)
            .map(|c| format!("{} ({:.6})", c.group, c.cohesion.cohesion))
            .collect();
        eprintln!(
            "directional check failed in {} mode: whole cohesion {whole:.6} is not below: {}",
            section.mode,
            failing.join(", ")
        );
        Ok(2)
    }
}
