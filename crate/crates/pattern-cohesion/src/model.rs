//! Shared-node / per-pattern-instance data model and store persistence.
//!
//! Nodes are shared identifiers, but every pattern instance keeps its own
//! indexed set of count values per node. A [`CountRecord`] holds the
//! reinforcement weight `R`, the individual count `CI` and the group count
//! `CG` for one (pattern, node) pair; a [`PatternInstance`] owns one record
//! per member node plus the group-event counter `N_g`.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

/// Identifier for a node. Nodes are shared between patterns; the per-pattern
/// state lives in each pattern's own [`CountRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifier for a pattern instance within a store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PatternId(pub u64);

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Errors from model construction, validation and store persistence.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("a pattern requires at least one node")]
    EmptyPattern,
    #[error("input signal for node {node} is {value}; signals must be finite and non-negative")]
    InvalidSignal { node: NodeId, value: f64 },
    #[error("duplicate node {node} in input pattern")]
    DuplicateInputNode { node: NodeId },
    #[error("store parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl ModelError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        ModelError::Parse { line, message: message.into() }
    }
}

/// Per (pattern, node) counters: reinforcement weight `R`, individual count
/// `CI` and group count `CG`. All three are reals so that signal-proportional
/// updates and averaging stay representable.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CountRecord {
    /// Reinforcement weight `R`: incremented when the node is present,
    /// decremented (clamped at zero) when it is absent from a presentation
    /// that touches the pattern.
    pub reinforcement: f64,
    /// Individual count `CI`: incremented only when the node itself appears.
    pub individual_count: f64,
    /// Group count `CG`: incremented for every member on any presentation.
    pub group_count: f64,
}

impl CountRecord {
    pub fn zero() -> Self {
        Self::default()
    }

    /// All values finite and non-negative.
    pub fn is_valid(&self) -> bool {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        ok(self.reinforcement) && ok(self.individual_count) && ok(self.group_count)
    }
}

/// A stored group of nodes with its own indexed counts.
///
/// Invariant: there is exactly one [`CountRecord`] per member node, and
/// `group_events` counts the presentations applied to this instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternInstance {
    id: PatternId,
    records: BTreeMap<NodeId, CountRecord>,
    group_events: u64,
}

impl PatternInstance {
    /// Creates an instance with zeroed records and `group_events == 0`.
    pub fn new(id: PatternId, nodes: &BTreeSet<NodeId>) -> Result<Self, ModelError> {
        if nodes.is_empty() {
            return Err(ModelError::EmptyPattern);
        }
        let records = nodes.iter().map(|&n| (n, CountRecord::zero())).collect();
        Ok(Self { id, records, group_events: 0 })
    }

    pub fn id(&self) -> PatternId {
        self.id
    }

    pub fn member_count(&self) -> usize {
        self.records.len()
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.records.contains_key(&node)
    }

    /// Member nodes in ascending id order.
    pub fn members(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.records.keys().copied()
    }

    pub fn member_set(&self) -> BTreeSet<NodeId> {
        self.records.keys().copied().collect()
    }

    pub fn record(&self, node: NodeId) -> Option<&CountRecord> {
        self.records.get(&node)
    }

    pub fn records(&self) -> impl Iterator<Item = (NodeId, &CountRecord)> {
        self.records.iter().map(|(&n, r)| (n, r))
    }

    pub(crate) fn records_mut(&mut self) -> impl Iterator<Item = (NodeId, &mut CountRecord)> {
        self.records.iter_mut().map(|(&n, r)| (n, r))
    }

    #[cfg(test)]
    pub(crate) fn record_mut(&mut self, node: NodeId) -> Option<&mut CountRecord> {
        self.records.get_mut(&node)
    }

    /// Number of presentations applied to this instance (`N_g`).
    pub fn group_events(&self) -> u64 {
        self.group_events
    }

    pub(crate) fn bump_group_events(&mut self) {
        self.group_events += 1;
    }

    /// Members of this pattern that appear in `ip` with a nonzero signal.
    pub fn overlap(&self, ip: &InputPattern) -> BTreeSet<NodeId> {
        self.members().filter(|&n| ip.signal(n).is_some()).collect()
    }

    /// Individual counts in member order.
    pub fn individual_counts(&self) -> Vec<f64> {
        self.records.values().map(|r| r.individual_count).collect()
    }

    /// Group counts in member order.
    pub fn group_counts(&self) -> Vec<f64> {
        self.records.values().map(|r| r.group_count).collect()
    }

    /// Reinforcement weights in member order.
    pub fn reinforcements(&self) -> Vec<f64> {
        self.records.values().map(|r| r.reinforcement).collect()
    }

    /// Individual counts keyed by node, as used by the split search.
    pub fn count_map(&self) -> BTreeMap<NodeId, f64> {
        self.records.iter().map(|(&n, r)| (n, r.individual_count)).collect()
    }
}

/// One presentation: the set of activated nodes with their signal values at a
/// discrete time index. A zero signal is the same as the node being absent,
/// so zero entries are dropped on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct InputPattern {
    signals: BTreeMap<NodeId, f64>,
    timestamp: u64,
}

impl InputPattern {
    pub fn new(
        timestamp: u64,
        signals: impl IntoIterator<Item = (NodeId, f64)>,
    ) -> Result<Self, ModelError> {
        let mut map = BTreeMap::new();
        for (node, value) in signals {
            if !value.is_finite() || value < 0.0 {
                return Err(ModelError::InvalidSignal { node, value });
            }
            if value == 0.0 {
                continue; // absent node
            }
            if map.insert(node, value).is_some() {
                return Err(ModelError::DuplicateInputNode { node });
            }
        }
        Ok(Self { signals: map, timestamp })
    }

    pub fn timestamp(&self) -> u64 {
        self.timestamp
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    /// Signal value for `node`, or `None` if the node is absent.
    pub fn signal(&self, node: NodeId) -> Option<f64> {
        self.signals.get(&node).copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.signals.keys().copied()
    }

    pub fn node_set(&self) -> BTreeSet<NodeId> {
        self.signals.keys().copied().collect()
    }

    /// Parses one-per-line input patterns: `t <timestamp> <node>:<signal> ...`
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse_file<R: BufRead>(reader: R) -> Result<Vec<InputPattern>, ModelError> {
        let mut out = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut fields = trimmed.split_whitespace();
            match fields.next() {
                Some("t") => {}
                Some(other) => {
                    return Err(ModelError::parse(
                        lineno,
                        format!("expected line tag 't', found '{other}'"),
                    ))
                }
                None => continue,
            }
            let ts: u64 = fields
                .next()
                .ok_or_else(|| ModelError::parse(lineno, "missing timestamp"))?
                .parse()
                .map_err(|_| ModelError::parse(lineno, "timestamp must be a non-negative integer"))?;
            let mut signals = Vec::new();
            for pair in fields {
                let (node, value) = pair.split_once(':').ok_or_else(|| {
                    ModelError::parse(lineno, format!("expected <node>:<signal>, found '{pair}'"))
                })?;
                let node: u64 = node.parse().map_err(|_| {
                    ModelError::parse(lineno, format!("invalid node id '{node}'"))
                })?;
                let value: f64 = value.parse().map_err(|_| {
                    ModelError::parse(lineno, format!("invalid signal value '{value}'"))
                })?;
                signals.push((NodeId(node), value));
            }
            let ip = InputPattern::new(ts, signals)
                .map_err(|e| ModelError::parse(lineno, e.to_string()))?;
            out.push(ip);
        }
        Ok(out)
    }
}

/// Collection of pattern instances plus the id counter and global clock.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PatternStore {
    patterns: BTreeMap<PatternId, PatternInstance>,
    next_pattern_id: u64,
    clock: u64,
}

impl PatternStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Creates a fresh instance from `nodes` and returns its id.
    pub fn create_pattern(&mut self, nodes: &BTreeSet<NodeId>) -> Result<PatternId, ModelError> {
        let id = PatternId(self.next_pattern_id);
        let instance = PatternInstance::new(id, nodes)?;
        self.next_pattern_id += 1;
        self.patterns.insert(id, instance);
        Ok(id)
    }

    pub fn pattern(&self, id: PatternId) -> Option<&PatternInstance> {
        self.patterns.get(&id)
    }

    pub(crate) fn pattern_mut(&mut self, id: PatternId) -> Option<&mut PatternInstance> {
        self.patterns.get_mut(&id)
    }

    /// Instances in ascending id order.
    pub fn patterns(&self) -> impl Iterator<Item = &PatternInstance> {
        self.patterns.values()
    }

    pub(crate) fn patterns_mut(&mut self) -> impl Iterator<Item = &mut PatternInstance> {
        self.patterns.values_mut()
    }

    pub fn pattern_ids(&self) -> impl Iterator<Item = PatternId> + '_ {
        self.patterns.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub(crate) fn advance_clock(&mut self, to: u64) {
        if to > self.clock {
            self.clock = to;
        }
    }

    /// Serializes the store as line-oriented text. First a store header
    /// `S <next_pattern_id> <clock>`, then per pattern a `P <id> <N_g>`
    /// header followed by one `N <node> <R> <CI> <CG>` line per member.
    /// Reals are written with full round-trip precision.
    pub fn save<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "S\t{}\t{}", self.next_pattern_id, self.clock)?;
        for instance in self.patterns.values() {
            writeln!(w, "P\t{}\t{}", instance.id(), instance.group_events())?;
            for (node, rec) in instance.records() {
                writeln!(
                    w,
                    "N\t{}\t{:?}\t{:?}\t{:?}",
                    node, rec.reinforcement, rec.individual_count, rec.group_count
                )?;
            }
        }
        Ok(())
    }

    /// Parses a store saved by [`PatternStore::save`]. Errors name the
    /// offending line and field.
    pub fn load<R: BufRead>(reader: R) -> Result<Self, ModelError> {
        let mut lines = reader.lines().enumerate();

        let (next_pattern_id, clock) = loop {
            match lines.next() {
                None => return Err(ModelError::parse(0, "empty file; expected 'S' header")),
                Some((idx, line)) => {
                    let line = line?;
                    if line.trim().is_empty() || line.starts_with('#') {
                        continue;
                    }
                    let fields: Vec<&str> = line.split('\t').collect();
                    if fields.len() != 3 || fields[0] != "S" {
                        return Err(ModelError::parse(
                            idx + 1,
                            "expected store header 'S <next_pattern_id> <clock>'",
                        ));
                    }
                    let next: u64 = fields[1].parse().map_err(|_| {
                        ModelError::parse(idx + 1, format!("invalid next-id field '{}'", fields[1]))
                    })?;
                    let clock: u64 = fields[2].parse().map_err(|_| {
                        ModelError::parse(idx + 1, format!("invalid clock field '{}'", fields[2]))
                    })?;
                    break (next, clock);
                }
            }
        };

        let mut store = PatternStore { patterns: BTreeMap::new(), next_pattern_id, clock };
        let mut current: Option<(usize, PatternId, u64, BTreeMap<NodeId, CountRecord>)> = None;

        let finish =
            |store: &mut PatternStore,
             cur: Option<(usize, PatternId, u64, BTreeMap<NodeId, CountRecord>)>|
             -> Result<(), ModelError> {
                if let Some((header_line, id, events, records)) = cur {
                    if records.is_empty() {
                        return Err(ModelError::parse(
                            header_line,
                            format!("pattern {id} has no node records"),
                        ));
                    }
                    if store.patterns.contains_key(&id) {
                        return Err(ModelError::parse(
                            header_line,
                            format!("duplicate pattern id {id}"),
                        ));
                    }
                    if id.0 >= store.next_pattern_id {
                        return Err(ModelError::parse(
                            header_line,
                            format!("pattern id {id} not below next-id counter"),
                        ));
                    }
                    store
                        .patterns
                        .insert(id, PatternInstance { id, records, group_events: events });
                }
                Ok(())
            };

        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match fields[0] {
                "P" => {
                    if fields.len() != 3 {
                        return Err(ModelError::parse(
                            lineno,
                            "pattern header needs exactly 'P <id> <group_events>'",
                        ));
                    }
                    let id: u64 = fields[1].parse().map_err(|_| {
                        ModelError::parse(lineno, format!("invalid pattern id '{}'", fields[1]))
                    })?;
                    let events: u64 = fields[2].parse().map_err(|_| {
                        ModelError::parse(lineno, format!("invalid group-event count '{}'", fields[2]))
                    })?;
                    finish(&mut store, current.take())?;
                    current = Some((lineno, PatternId(id), events, BTreeMap::new()));
                }
                "N" => {
                    if fields.len() != 5 {
                        return Err(ModelError::parse(
                            lineno,
                            "node record needs exactly 'N <node> <R> <CI> <CG>'",
                        ));
                    }
                    let (_, _, _, records) = current.as_mut().ok_or_else(|| {
                        ModelError::parse(lineno, "node record before any pattern header")
                    })?;
                    let node: u64 = fields[1].parse().map_err(|_| {
                        ModelError::parse(lineno, format!("invalid node id '{}'", fields[1]))
                    })?;
                    let mut reals = [0f64; 3];
                    for (k, name) in ["R", "CI", "CG"].iter().enumerate() {
                        let raw = fields[2 + k];
                        let v: f64 = raw.parse().map_err(|_| {
                            ModelError::parse(lineno, format!("invalid {name} value '{raw}'"))
                        })?;
                        if !v.is_finite() || v < 0.0 {
                            return Err(ModelError::parse(
                                lineno,
                                format!("{name} value {raw} must be finite and non-negative"),
                            ));
                        }
                        reals[k] = v;
                    }
                    let rec = CountRecord {
                        reinforcement: reals[0],
                        individual_count: reals[1],
                        group_count: reals[2],
                    };
                    if records.insert(NodeId(node), rec).is_some() {
                        return Err(ModelError::parse(
                            lineno,
                            format!("duplicate node {node} in pattern"),
                        ));
                    }
                }
                other => {
                    return Err(ModelError::parse(
                        lineno,
                        format!("unknown record tag '{other}' (expected 'P' or 'N')"),
                    ));
                }
            }
        }
        finish(&mut store, current.take())?;
        Ok(store)
    }

    pub fn save_to_path(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.save(&mut w)?;
        w.flush()
    }

    pub fn load_from_path(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let file = File::open(path)?;
        Self::load(BufReader::new(file))
    }
}
