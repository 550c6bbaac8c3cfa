//! Dataset benchmark harness: loads labeled tables of real-valued variables,
//! maps rows to node values, and compares per-category cohesion against a
//! chi-square goodness-of-fit baseline, in raw and min-max-normalized modes.

use std::collections::BTreeSet;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::cohesion::{pattern_cohesion, CohesionError, CohesionReport};

/// Divisor guard for chi-square cells with a vanishing expected value.
pub const CHI_EPSILON: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("dataset parse error at row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("dataset has no rows")]
    EmptyTable,
    #[error("table construction: {message}")]
    Construction { message: String },
    #[error("unknown category '{label}'; known: {known}")]
    UnknownCategory { label: String, known: String },
    #[error("group '{group}' has no rows")]
    EmptyGroup { group: String },
    #[error(transparent)]
    Cohesion(#[from] CohesionError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

/// How cells are separated in a dataset file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delimiter {
    Whitespace,
    Char(char),
}

/// Where the per-row category label sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelPosition {
    Index(usize),
    Last,
}

/// Parsing rules for one dataset layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSchema {
    pub name: String,
    pub delimiter: Delimiter,
    pub label: LabelPosition,
    pub has_header: bool,
    /// Declared category set; `None` accepts any label (first-seen order).
    pub categories: Option<Vec<String>>,
}

impl TableSchema {
    /// Image-segment layout: space-separated, 19 variables, the category
    /// label ("1" through "7") in the last column, no header.
    pub fn statlog() -> Self {
        Self {
            name: "statlog-segment".into(),
            delimiter: Delimiter::Whitespace,
            label: LabelPosition::Last,
            has_header: false,
            categories: Some((1..=7).map(|c| c.to_string()).collect()),
        }
    }
}

/// Labeled rows of real-valued variables.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetTable {
    name: String,
    variables: Vec<String>,
    rows: Vec<Vec<f64>>,
    labels: Vec<String>,
    categories: Vec<String>,
}

impl DatasetTable {
    pub fn new(
        name: impl Into<String>,
        variables: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<String>,
        declared_categories: Option<Vec<String>>,
    ) -> Result<Self, BenchError> {
        let fail = |message: String| Err(BenchError::Construction { message });
        if rows.is_empty() {
            return Err(BenchError::EmptyTable);
        }
        if variables.is_empty() {
            return fail("a table needs at least one variable".into());
        }
        if rows.len() != labels.len() {
            return fail(format!("{} rows but {} labels", rows.len(), labels.len()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != variables.len() {
                return fail(format!(
                    "row {} has {} cells, expected {}",
                    i + 1,
                    row.len(),
                    variables.len()
                ));
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return fail(format!("row {} has a non-finite cell {bad}", i + 1));
            }
        }
        let categories = match declared_categories {
            Some(declared) => {
                for (i, label) in labels.iter().enumerate() {
                    if !declared.contains(label) {
                        return fail(format!("row {} has undeclared label '{label}'", i + 1));
                    }
                }
                declared
            }
            None => {
                let mut seen = Vec::new();
                for label in &labels {
                    if !seen.contains(label) {
                        seen.push(label.clone());
                    }
                }
                seen
            }
        };
        Ok(Self { name: name.into(), variables, rows, labels, categories })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn variable_count(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Categories in declared (or first-seen) order.
    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    /// Distinct labels that actually occur.
    pub fn occurring_categories(&self) -> Vec<&String> {
        let present: BTreeSet<&String> = self.labels.iter().collect();
        self.categories.iter().filter(|c| present.contains(c)).collect()
    }

    fn group_rows(&self, group: GroupRef<'_>) -> Result<Vec<&Vec<f64>>, BenchError> {
        match group {
            GroupRef::Whole => Ok(self.rows.iter().collect()),
            GroupRef::Category(label) => {
                if !self.categories.iter().any(|c| c == label) {
                    return Err(BenchError::UnknownCategory {
                        label: label.to_string(),
                        known: self.categories.join(", "),
                    });
                }
                let rows: Vec<&Vec<f64>> = self
                    .rows
                    .iter()
                    .zip(&self.labels)
                    .filter(|(_, l)| l.as_str() == label)
                    .map(|(r, _)| r)
                    .collect();
                if rows.is_empty() {
                    return Err(BenchError::EmptyGroup { group: label.to_string() });
                }
                Ok(rows)
            }
        }
    }

    /// Writes rows space-separated with the label in the last column, full
    /// round-trip precision.
    pub fn write_space_separated<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (row, label) in self.rows.iter().zip(&self.labels) {
            for cell in row {
                write!(w, "{cell:?} ")?;
            }
            writeln!(w, "{label}")?;
        }
        Ok(())
    }
}

/// Parses a delimited text table under `schema`. Parse failures name the
/// 1-based data row.
pub fn load_dataset<R: BufRead>(reader: R, schema: &TableSchema) -> Result<DatasetTable, BenchError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut header: Option<Vec<String>> = None;
    let mut arity: Option<usize> = None;
    let mut data_row = 0usize;

    for line in reader.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = match schema.delimiter {
            Delimiter::Whitespace => trimmed.split_whitespace().collect(),
            Delimiter::Char(c) => trimmed.split(c).map(str::trim).collect(),
        };
        if schema.has_header && header.is_none() {
            header = Some(cells.into_iter().map(str::to_string).collect());
            continue;
        }
        data_row += 1;
        let label_index = match schema.label {
            LabelPosition::Last => cells.len().saturating_sub(1),
            LabelPosition::Index(i) => i,
        };
        if label_index >= cells.len() {
            return Err(BenchError::Parse {
                row: data_row,
                message: format!(
                    "label column {label_index} out of range for {} cells",
                    cells.len()
                ),
            });
        }
        if cells.len() < 2 {
            return Err(BenchError::Parse {
                row: data_row,
                message: "row needs at least one variable and a label".into(),
            });
        }
        let label = cells[label_index].to_string();
        let mut values = Vec::with_capacity(cells.len() - 1);
        for (i, cell) in cells.iter().enumerate() {
            if i == label_index {
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| BenchError::Parse {
                row: data_row,
                message: format!("cell {} is not numeric: '{cell}'", i + 1),
            })?;
            values.push(v);
        }
        match arity {
            None => arity = Some(values.len()),
            Some(expected) if expected != values.len() => {
                return Err(BenchError::Parse {
                    row: data_row,
                    message: format!("row has {} variables, expected {expected}", values.len()),
                });
            }
            Some(_) => {}
        }
        if let Some(declared) = &schema.categories {
            if !declared.contains(&label) {
                return Err(BenchError::Parse {
                    row: data_row,
                    message: format!("unknown label '{label}'; expected one of {declared:?}"),
                });
            }
        }
        rows.push(values);
        labels.push(label);
    }

    let variables = match (header, arity) {
        (Some(h), Some(n)) => {
            let mut names: Vec<String> = h;
            if names.len() == n + 1 {
                // drop the label column's header cell
                match schema.label {
                    LabelPosition::Last => {
                        names.pop();
                    }
                    LabelPosition::Index(i) if i < names.len() => {
                        names.remove(i);
                    }
                    LabelPosition::Index(_) => {}
                }
            }
            names
        }
        (None, Some(n)) => (1..=n).map(|i| format!("v{i}")).collect(),
        _ => return Err(BenchError::EmptyTable),
    };
    DatasetTable::new(schema.name.clone(), variables, rows, labels, schema.categories.clone())
}

/// Min-max scales every variable to [0, 1]; constant variables map to 0.
pub fn normalize(table: &DatasetTable) -> DatasetTable {
    let n_vars = table.variable_count();
    let mut mins = vec![f64::INFINITY; n_vars];
    let mut maxs = vec![f64::NEG_INFINITY; n_vars];
    for row in table.rows() {
        for (j, &v) in row.iter().enumerate() {
            mins[j] = mins[j].min(v);
            maxs[j] = maxs[j].max(v);
        }
    }
    let rows = table
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, &v)| {
                    let range = maxs[j] - mins[j];
                    if range > 0.0 {
                        (v - mins[j]) / range
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    DatasetTable {
        name: table.name.clone(),
        variables: table.variables.clone(),
        rows,
        labels: table.labels.clone(),
        categories: table.categories.clone(),
    }
}

/// A row's node value: the arithmetic mean across its variables.
pub fn row_to_node_value(row: &[f64]) -> f64 {
    row.iter().sum::<f64>() / row.len() as f64
}

/// The whole table or one labeled category.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupRef<'a> {
    Whole,
    Category(&'a str),
}

impl std::fmt::Display for GroupRef<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GroupRef::Whole => write!(f, "whole"),
            GroupRef::Category(label) => write!(f, "{label}"),
        }
    }
}

/// Scores one group as a single pattern: each row becomes a node value, the
/// local mean is their mean and the global mean their maximum. Raw node
/// values may be negative, which can push the score itself negative; a group
/// whose mean is not positive cannot be scored.
pub fn group_cohesion(table: &DatasetTable, group: GroupRef<'_>) -> Result<CohesionReport, BenchError> {
    let rows = table.group_rows(group)?;
    let values: Vec<f64> = rows.iter().map(|r| row_to_node_value(r)).collect();
    let lav = values.iter().sum::<f64>() / values.len() as f64;
    let gav = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(pattern_cohesion(&values, lav, gav)?)
}

/// Goodness of fit of a group against its own mean vector: per cell
/// `(x - e)^2 / max(e, epsilon)` with `e` the group mean of the variable,
/// summed across variables and averaged over the group's rows.
pub fn chi_square_group(table: &DatasetTable, group: GroupRef<'_>) -> Result<f64, BenchError> {
    let rows = table.group_rows(group)?;
    let n_vars = table.variable_count();
    let n_rows = rows.len() as f64;
    let mut expected = vec![0.0f64; n_vars];
    for row in &rows {
        for (j, &v) in row.iter().enumerate() {
            expected[j] += v;
        }
    }
    for e in &mut expected {
        *e /= n_rows;
    }
    let mut total = 0.0;
    for row in &rows {
        for (j, &v) in row.iter().enumerate() {
            let e = expected[j];
            total += (v - e).powi(2) / e.max(CHI_EPSILON);
        }
    }
    Ok(total / n_rows)
}

/// Whether the scores came from the raw or the normalized table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportMode {
    Raw,
    Normalized,
}

impl std::fmt::Display for ReportMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReportMode::Raw => write!(f, "raw"),
            ReportMode::Normalized => write!(f, "normalized"),
        }
    }
}

/// Which table variants a report covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Raw scores plus min-max-normalized scores.
    #[default]
    MinMax,
    /// Raw scores only.
    Off,
}

/// Scores for one group in one mode, with the category/whole percentages.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupStats {
    pub group: String,
    pub rows: usize,
    pub chi_square: f64,
    pub cohesion: CohesionReport,
    pub chi_pct_of_whole: f64,
    pub cohesion_pct_of_whole: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSection {
    pub mode: ReportMode,
    pub whole: GroupStats,
    pub categories: Vec<GroupStats>,
}

impl ModeSection {
    /// True when every category's cohesion strictly exceeds the whole's.
    pub fn categories_beat_whole(&self) -> bool {
        self.categories.iter().all(|c| c.cohesion.cohesion > self.whole.cohesion.cohesion)
    }
}

/// Cohesion-vs-chi-square comparison across groups and modes.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub dataset: String,
    pub row_count: usize,
    pub variable_count: usize,
    pub sections: Vec<ModeSection>,
}

fn pct(category: f64, whole: f64) -> f64 {
    if whole == 0.0 {
        if category == 0.0 {
            100.0
        } else {
            f64::INFINITY
        }
    } else {
        category / whole * 100.0
    }
}

fn mode_section(table: &DatasetTable, mode: ReportMode) -> Result<ModeSection, BenchError> {
    let whole_chi = chi_square_group(table, GroupRef::Whole)?;
    let whole_coh = group_cohesion(table, GroupRef::Whole)?;
    let whole = GroupStats {
        group: "whole".into(),
        rows: table.row_count(),
        chi_square: whole_chi,
        cohesion: whole_coh,
        chi_pct_of_whole: 100.0,
        cohesion_pct_of_whole: 100.0,
    };
    let mut categories = Vec::new();
    for label in table.occurring_categories() {
        let group = GroupRef::Category(label);
        let chi = chi_square_group(table, group)?;
        let coh = group_cohesion(table, group)?;
        let rows = table.labels().iter().filter(|l| *l == label).count();
        categories.push(GroupStats {
            group: label.clone(),
            rows,
            chi_square: chi,
            cohesion: coh,
            chi_pct_of_whole: pct(chi, whole_chi),
            cohesion_pct_of_whole: pct(coh.cohesion, whole_coh.cohesion),
        });
    }
    Ok(ModeSection { mode, whole, categories })
}

/// Builds the grouped comparison. With [`Normalization::MinMax`] the report
/// carries a raw and a normalized section; with [`Normalization::Off`] only
/// the raw one.
pub fn build_report(table: &DatasetTable, normalization: Normalization) -> Result<BenchReport, BenchError> {
    let mut sections = vec![mode_section(table, ReportMode::Raw)?];
    if normalization == Normalization::MinMax {
        sections.push(mode_section(&normalize(table), ReportMode::Normalized)?);
    }
    Ok(BenchReport {
        dataset: table.name().to_string(),
        row_count: table.row_count(),
        variable_count: table.variable_count(),
        sections,
    })
}

impl BenchReport {
    /// The section the directional check runs on: normalized when present,
    /// raw otherwise.
    pub fn preferred_section(&self) -> &ModeSection {
        self.sections
            .iter()
            .find(|s| s.mode == ReportMode::Normalized)
            .unwrap_or(&self.sections[0])
    }

    /// The headline claim: every category cohesion strictly exceeds the
    /// whole-dataset cohesion in the preferred section.
    pub fn directional_claim_holds(&self) -> bool {
        self.preferred_section().categories_beat_whole()
    }

    /// Aligned text grid, one section per mode, with sign diagnostics.
    pub fn render_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "dataset: {} ({} rows, {} variables)",
            self.dataset, self.row_count, self.variable_count
        );
        for section in &self.sections {
            let _ = writeln!(out, "\nmode: {}", section.mode);
            let _ = writeln!(
                out,
                "{:<10} {:>6} {:>14} {:>12} {:>12} {:>12}",
                "group", "rows", "chi_square", "cohesion", "chi_pct", "cohesion_pct"
            );
            let mut write_row = |s: &GroupStats| {
                let _ = writeln!(
                    out,
                    "{:<10} {:>6} {:>14.6} {:>12.6} {:>12.2} {:>12.2}",
                    s.group, s.rows, s.chi_square, s.cohesion.cohesion, s.chi_pct_of_whole,
                    s.cohesion_pct_of_whole
                );
            };
            write_row(&section.whole);
            for category in &section.categories {
                write_row(category);
            }
            if section.whole.cohesion.cohesion < 0.0 {
                let _ = writeln!(out, "note: whole-dataset cohesion is negative in {} mode", section.mode);
            }
            for category in &section.categories {
                if (category.cohesion.cohesion < 0.0) != (section.whole.cohesion.cohesion < 0.0) {
                    let _ = writeln!(
                        out,
                        "note: sign crossing between category {} and whole in {} mode",
                        category.group, section.mode
                    );
                }
            }
        }
        let verdict = if self.directional_claim_holds() { "HOLDS" } else { "FAILS" };
        let _ = writeln!(
            out,
            "\ndirectional claim (every category cohesion > whole, {} mode): {verdict}",
            self.preferred_section().mode
        );
        out
    }

    /// Machine-readable rows:
    /// `group mode chi_square cohesion chi_square_pct_of_whole cohesion_pct_of_whole`,
    /// tab-separated, full float precision.
    pub fn write_machine<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "group\tmode\tchi_square\tcohesion\tchi_square_pct_of_whole\tcohesion_pct_of_whole"
        )?;
        for section in &self.sections {
            let mut write_row = |s: &GroupStats| {
                writeln!(
                    w,
                    "{}\t{}\t{:?}\t{:?}\t{:?}\t{:?}",
                    s.group,
                    section.mode,
                    s.chi_square,
                    s.cohesion.cohesion,
                    s.chi_pct_of_whole,
                    s.cohesion_pct_of_whole
                )
            };
            write_row(&section.whole)?;
            for category in &section.categories {
                write_row(category)?;
            }
        }
        Ok(())
    }
}

struct SplitMix64(u64);

impl SplitMix64 {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn in_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Deterministic stand-in for the image-segment benchmark: 7 categories of
/// 330 rows over 19 variables. Category g shifts every variable by a fixed
/// step, categories are internally tight (small noise), and each variable
/// carries its own scale and offset so the raw and normalized modes differ.
pub fn synthetic_segment_table(seed: u64) -> DatasetTable {
    const CATEGORIES: usize = 7;
    const ROWS_PER_CATEGORY: usize = 330;
    const VARIABLES: usize = 19;

    let mut rng = SplitMix64(seed);
    let bases: Vec<f64> = (0..VARIABLES).map(|_| rng.in_range(0.35, 0.65)).collect();
    let scales: Vec<f64> = (0..VARIABLES).map(|_| rng.in_range(0.5, 40.0)).collect();
    let offsets: Vec<f64> = (0..VARIABLES).map(|_| rng.in_range(0.0, 50.0)).collect();

    let mut rows = Vec::with_capacity(CATEGORIES * ROWS_PER_CATEGORY);
    let mut labels = Vec::with_capacity(CATEGORIES * ROWS_PER_CATEGORY);
    for g in 0..CATEGORIES {
        let shift = -0.24 + 0.08 * g as f64;
        for _ in 0..ROWS_PER_CATEGORY {
            let row: Vec<f64> = (0..VARIABLES)
                .map(|j| {
                    let noise = rng.in_range(-0.05, 0.05);
                    (bases[j] + shift + noise) * scales[j] + offsets[j]
                })
                .collect();
            rows.push(row);
            labels.push((g + 1).to_string());
        }
    }
    let variables = (1..=VARIABLES).map(|j| format!("v{j}")).collect();
    DatasetTable::new("synthetic-segment", variables, rows, labels, Some((1..=7).map(|c| c.to_string()).collect()))
        .expect("generator emits a well-formed table")
}
