//! Time-stepped excitation/inhibition dynamics between disjoint patterns of
//! neurons.
//!
//! The total input for a neuron at interval `t` is the sum of its pattern's
//! excitatory entries at `t` minus `delta` times every inhibitory entry held
//! by neurons outside its pattern at intervals other than `t`. A pattern
//! fires at `t` when its members' summed input exceeds the firing threshold;
//! fired members feed the next interval's ledgers.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::model::NodeId;

#[derive(Debug, Error)]
pub enum ActivationError {
    #[error("horizon must be at least 1")]
    InvalidHorizon,
    #[error("delta must be finite and non-negative, got {delta}")]
    InvalidDelta { delta: f64 },
    #[error("pattern {index} is empty")]
    EmptyPattern { index: usize },
    #[error("neuron {neuron} belongs to more than one pattern")]
    OverlappingPatterns { neuron: NodeId },
    #[error("neuron {neuron} is not a member of any pattern")]
    NotAPatternMember { neuron: NodeId },
    #[error("neuron {neuron} is neither a pattern member nor declared external")]
    UnknownNeuron { neuron: NodeId },
    #[error("interval {t} is outside 1..={horizon}")]
    TimeOutOfRange { t: u32, horizon: u32 },
    #[error("ledger value {value} must be finite")]
    InvalidValue { value: f64 },
    #[error("scenario parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl ActivationError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        ActivationError::Parse { line, message: message.into() }
    }
}

/// Input values computed for one interval plus the patterns that fired.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub values: BTreeMap<NodeId, f64>,
    pub fired: Vec<usize>,
}

/// Full simulation output: one input value per (pattern neuron, interval) and
/// the patterns fired per interval.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ActivationTrace {
    values: BTreeMap<(u32, NodeId), f64>,
    fired: BTreeMap<u32, Vec<usize>>,
}

impl ActivationTrace {
    pub fn value(&self, neuron: NodeId, t: u32) -> Option<f64> {
        self.values.get(&(t, neuron)).copied()
    }

    /// Entries ordered by interval, then neuron.
    pub fn entries(&self) -> impl Iterator<Item = (NodeId, u32, f64)> + '_ {
        self.values.iter().map(|(&(t, n), &x)| (n, t, x))
    }

    pub fn fired_at(&self, t: u32) -> &[usize] {
        self.fired.get(&t).map_or(&[], Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Writes `neuron <tab> t <tab> X` rows ordered by interval then neuron,
    /// followed by one comment line per interval with fired pattern indices.
    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# neuron\tt\tX")?;
        for (neuron, t, x) in self.entries() {
            writeln!(w, "{neuron}\t{t}\t{x:?}")?;
        }
        for (t, fired) in &self.fired {
            if !fired.is_empty() {
                let list: Vec<String> = fired.iter().map(usize::to_string).collect();
                writeln!(w, "# fired at {t}: {}", list.join(" "))?;
            }
        }
        Ok(())
    }
}

/// Disjoint neuron patterns plus the excitatory/inhibitory ledgers and the
/// simulation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationState {
    patterns: Vec<BTreeSet<NodeId>>,
    pattern_of: BTreeMap<NodeId, usize>,
    externals: BTreeSet<NodeId>,
    excitatory: BTreeMap<(NodeId, u32), f64>,
    inhibitory: BTreeMap<(NodeId, u32), f64>,
    delta: f64,
    horizon: u32,
    firing_threshold: f64,
    fire_excitation: f64,
    fire_inhibition: f64,
    exclude_self: bool,
}

impl ActivationState {
    pub fn new(
        patterns: Vec<BTreeSet<NodeId>>,
        delta: f64,
        horizon: u32,
        firing_threshold: f64,
    ) -> Result<Self, ActivationError> {
        if horizon < 1 {
            return Err(ActivationError::InvalidHorizon);
        }
        if !delta.is_finite() || delta < 0.0 {
            return Err(ActivationError::InvalidDelta { delta });
        }
        let mut pattern_of = BTreeMap::new();
        for (index, pattern) in patterns.iter().enumerate() {
            if pattern.is_empty() {
                return Err(ActivationError::EmptyPattern { index });
            }
            for &neuron in pattern {
                if pattern_of.insert(neuron, index).is_some() {
                    return Err(ActivationError::OverlappingPatterns { neuron });
                }
            }
        }
        Ok(Self {
            patterns,
            pattern_of,
            externals: BTreeSet::new(),
            excitatory: BTreeMap::new(),
            inhibitory: BTreeMap::new(),
            delta,
            horizon,
            firing_threshold,
            fire_excitation: 1.0,
            fire_inhibition: 0.0,
            exclude_self: false,
        })
    }

    pub fn patterns(&self) -> &[BTreeSet<NodeId>] {
        &self.patterns
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn firing_threshold(&self) -> f64 {
        self.firing_threshold
    }

    pub fn neuron_count(&self) -> usize {
        self.pattern_of.len()
    }

    pub fn set_delta(&mut self, delta: f64) -> Result<(), ActivationError> {
        if !delta.is_finite() || delta < 0.0 {
            return Err(ActivationError::InvalidDelta { delta });
        }
        self.delta = delta;
        Ok(())
    }

    pub fn set_fire_excitation(&mut self, value: f64) {
        self.fire_excitation = value;
    }

    pub fn set_fire_inhibition(&mut self, value: f64) {
        self.fire_inhibition = value;
    }

    pub fn set_exclude_self(&mut self, flag: bool) {
        self.exclude_self = flag;
    }

    pub fn declare_external(&mut self, neuron: NodeId) {
        self.externals.insert(neuron);
    }

    fn check_entry(&self, neuron: NodeId, t: u32, value: f64) -> Result<(), ActivationError> {
        if !self.pattern_of.contains_key(&neuron) && !self.externals.contains(&neuron) {
            return Err(ActivationError::UnknownNeuron { neuron });
        }
        if t < 1 || t > self.horizon {
            return Err(ActivationError::TimeOutOfRange { t, horizon: self.horizon });
        }
        if !value.is_finite() {
            return Err(ActivationError::InvalidValue { value });
        }
        Ok(())
    }

    pub fn set_excitation(&mut self, neuron: NodeId, t: u32, value: f64) -> Result<(), ActivationError> {
        self.check_entry(neuron, t, value)?;
        self.excitatory.insert((neuron, t), value);
        Ok(())
    }

    pub fn set_inhibition(&mut self, neuron: NodeId, t: u32, value: f64) -> Result<(), ActivationError> {
        self.check_entry(neuron, t, value)?;
        self.inhibitory.insert((neuron, t), value);
        Ok(())
    }

    pub fn excitation(&self, neuron: NodeId, t: u32) -> f64 {
        self.excitatory.get(&(neuron, t)).copied().unwrap_or(0.0)
    }

    pub fn inhibition(&self, neuron: NodeId, t: u32) -> f64 {
        self.inhibitory.get(&(neuron, t)).copied().unwrap_or(0.0)
    }

    /// Drops every inhibitory entry; used to compare against delta = 0 runs.
    pub fn clear_inhibition(&mut self) {
        self.inhibitory.clear();
    }

    /// Total input for `neuron` at interval `t`: its pattern's excitatory
    /// entries at `t` minus `delta` times the inhibitory entries of all
    /// out-of-pattern neurons at every other interval.
    pub fn total_input(&self, neuron: NodeId, t: u32) -> Result<f64, ActivationError> {
        let own = *self
            .pattern_of
            .get(&neuron)
            .ok_or(ActivationError::NotAPatternMember { neuron })?;
        if t < 1 || t > self.horizon {
            return Err(ActivationError::TimeOutOfRange { t, horizon: self.horizon });
        }

        let mut excitation = 0.0;
        for &member in &self.patterns[own] {
            if self.exclude_self && member == neuron {
                continue;
            }
            excitation += self.excitation(member, t);
        }

        let mut inhibition = 0.0;
        for (index, pattern) in self.patterns.iter().enumerate() {
            if index == own {
                continue;
            }
            for &other in pattern {
                for y in 1..=self.horizon {
                    if y != t {
                        inhibition += self.inhibition(other, y);
                    }
                }
            }
        }
        Ok(excitation - self.delta * inhibition)
    }

    /// Computes every pattern neuron's input at `t`, marks patterns whose
    /// summed input exceeds the firing threshold, and feeds fired members'
    /// emissions into interval `t + 1`. Intended to be called in interval
    /// order; [`ActivationState::run`] does exactly that.
    pub fn step(&mut self, t: u32) -> Result<StepOutcome, ActivationError> {
        if t < 1 || t > self.horizon {
            return Err(ActivationError::TimeOutOfRange { t, horizon: self.horizon });
        }
        let mut values = BTreeMap::new();
        let mut fired = Vec::new();
        for (index, pattern) in self.patterns.iter().enumerate() {
            let mut sum = 0.0;
            for &neuron in pattern {
                let x = self.total_input(neuron, t)?;
                values.insert(neuron, x);
                sum += x;
            }
            if sum > self.firing_threshold {
                fired.push(index);
            }
        }
        if t < self.horizon {
            for &index in &fired {
                for &neuron in &self.patterns[index].clone() {
                    if self.fire_excitation != 0.0 {
                        *self.excitatory.entry((neuron, t + 1)).or_insert(0.0) +=
                            self.fire_excitation;
                    }
                    if self.fire_inhibition != 0.0 {
                        *self.inhibitory.entry((neuron, t + 1)).or_insert(0.0) +=
                            self.fire_inhibition;
                    }
                }
            }
        }
        Ok(StepOutcome { values, fired })
    }

    /// Runs every interval from 1 to the horizon and collects the trace.
    pub fn run(mut self) -> Result<ActivationTrace, ActivationError> {
        let mut trace = ActivationTrace::default();
        for t in 1..=self.horizon {
            let outcome = self.step(t)?;
            for (neuron, x) in outcome.values {
                trace.values.insert((t, neuron), x);
            }
            trace.fired.insert(t, outcome.fired);
        }
        Ok(trace)
    }

    /// Parses a scenario: one directive per line, `#` comments and blank
    /// lines ignored. Directives: `horizon <n>`, `delta <v>`,
    /// `threshold <v>`, `fire-emit <v>`, `fire-inhibit <v>`,
    /// `exclude-self <bool>`, `pattern <neuron>...`, `external <neuron>...`,
    /// `E <neuron> <t> <v>`, `H <neuron> <t> <v>`. Order does not matter;
    /// `horizon` and at least one `pattern` are required.
    pub fn parse_scenario<R: BufRead>(reader: R) -> Result<Self, ActivationError> {
        let mut horizon: Option<u32> = None;
        let mut delta = 0.5f64;
        let mut threshold = f64::INFINITY;
        let mut fire_emit = 1.0f64;
        let mut fire_inhibit = 0.0f64;
        let mut exclude_self = false;
        let mut patterns: Vec<BTreeSet<NodeId>> = Vec::new();
        let mut externals: Vec<NodeId> = Vec::new();
        let mut entries: Vec<(usize, char, NodeId, u32, f64)> = Vec::new();
        let mut seen: BTreeSet<(char, NodeId, u32)> = BTreeSet::new();

        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut fields = trimmed.split_whitespace();
            let key = fields.next().expect("non-empty line");
            let rest: Vec<&str> = fields.collect();
            let one = |rest: &[&str]| -> Result<String, ActivationError> {
                if rest.len() != 1 {
                    return Err(ActivationError::parse(
                        lineno,
                        format!("'{key}' takes exactly one value"),
                    ));
                }
                Ok(rest[0].to_string())
            };
            match key {
                "horizon" => {
                    let v: u32 = one(&rest)?.parse().map_err(|_| {
                        ActivationError::parse(lineno, "horizon must be a positive integer")
                    })?;
                    horizon = Some(v);
                }
                "delta" | "threshold" | "fire-emit" | "fire-inhibit" => {
                    let v: f64 = one(&rest)?.parse().map_err(|_| {
                        ActivationError::parse(lineno, format!("'{key}' needs a real value"))
                    })?;
                    match key {
                        "delta" => delta = v,
                        "threshold" => threshold = v,
                        "fire-emit" => fire_emit = v,
                        _ => fire_inhibit = v,
                    }
                }
                "exclude-self" => {
                    exclude_self = match one(&rest)?.as_str() {
                        "true" => true,
                        "false" => false,
                        other => {
                            return Err(ActivationError::parse(
                                lineno,
                                format!("exclude-self must be true or false, got '{other}'"),
                            ))
                        }
                    };
                }
                "pattern" | "external" => {
                    if rest.is_empty() {
                        return Err(ActivationError::parse(
                            lineno,
                            format!("'{key}' needs at least one neuron id"),
                        ));
                    }
                    let mut ids = BTreeSet::new();
                    for raw in &rest {
                        let id: u64 = raw.parse().map_err(|_| {
                            ActivationError::parse(lineno, format!("invalid neuron id '{raw}'"))
                        })?;
                        ids.insert(NodeId(id));
                    }
                    if key == "pattern" {
                        patterns.push(ids);
                    } else {
                        externals.extend(ids);
                    }
                }
                "E" | "H" => {
                    if rest.len() != 3 {
                        return Err(ActivationError::parse(
                            lineno,
                            format!("'{key}' needs <neuron> <t> <value>"),
                        ));
                    }
                    let neuron: u64 = rest[0].parse().map_err(|_| {
                        ActivationError::parse(lineno, format!("invalid neuron id '{}'", rest[0]))
                    })?;
                    let t: u32 = rest[1].parse().map_err(|_| {
                        ActivationError::parse(lineno, format!("invalid interval '{}'", rest[1]))
                    })?;
                    let value: f64 = rest[2].parse().map_err(|_| {
                        ActivationError::parse(lineno, format!("invalid value '{}'", rest[2]))
                    })?;
                    let kind = key.chars().next().expect("single-letter key");
                    if !seen.insert((kind, NodeId(neuron), t)) {
                        return Err(ActivationError::parse(
                            lineno,
                            format!("duplicate {key} entry for neuron {neuron} at t={t}"),
                        ));
                    }
                    entries.push((lineno, kind, NodeId(neuron), t, value));
                }
                other => {
                    return Err(ActivationError::parse(
                        lineno,
                        format!("unknown directive '{other}'"),
                    ));
                }
            }
        }

        let horizon = horizon
            .ok_or_else(|| ActivationError::parse(0, "scenario never sets 'horizon'"))?;
        if patterns.is_empty() {
            return Err(ActivationError::parse(0, "scenario declares no patterns"));
        }
        let mut state = ActivationState::new(patterns, delta, horizon, threshold)?;
        state.set_fire_excitation(fire_emit);
        state.set_fire_inhibition(fire_inhibit);
        state.set_exclude_self(exclude_self);
        for neuron in externals {
            state.declare_external(neuron);
        }
        for (lineno, kind, neuron, t, value) in entries {
            let result = if kind == 'E' {
                state.set_excitation(neuron, t, value)
            } else {
                state.set_inhibition(neuron, t, value)
            };
            result.map_err(|e| ActivationError::parse(lineno, e.to_string()))?;
        }
        Ok(state)
    }
}
