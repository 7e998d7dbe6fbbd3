//! Tab-separated and JSON-lines record formats for lexicons, mappings and
//! corpora.
//!
//! TSV files are UTF-8, one record per line. Lines starting with `#` and
//! blank lines are skipped. The first remaining line is a header when its
//! first cell names the format's first column.

use std::collections::BTreeMap;
use std::io::{self, BufRead};

use serde::{Deserialize, Serialize};

pub const LEXICON_COLUMNS: [&str; 18] = [
    "local_id",
    "spellings",
    "pos",
    "gender",
    "number",
    "aspect",
    "person",
    "roots",
    "augmentation",
    "transitivity",
    "singulars",
    "duals",
    "plurals",
    "pv",
    "iv",
    "cv",
    "dialect",
    "msa_counterpart",
];

pub const MAPPING_COLUMNS: [&str; 8] = [
    "l1_ref",
    "l2_ref",
    "relation_code",
    "precision",
    "status",
    "provenance",
    "reviewer",
    "timestamp",
];

pub const CORPUS_COLUMNS: [&str; 5] = [
    "sentence_idx",
    "token_idx",
    "surface",
    "lemma_lexicon",
    "lemma_local_id",
];

/// One data line with its 1-based line number in the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub number: usize,
    pub cells: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub lines: Vec<Line>,
}

pub fn read_table(input: impl BufRead, key_column: &str) -> io::Result<Table> {
    let mut table = Table::default();
    let mut seen_data = false;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        let line = if i == 0 {
            line.trim_start_matches('\u{feff}')
        } else {
            line
        };
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<String> = line.split('\t').map(|c| c.trim().to_string()).collect();
        if !seen_data && cells.iter().any(|c| c == key_column) {
            table.header = Some(cells);
            seen_data = true;
            continue;
        }
        seen_data = true;
        table.lines.push(Line {
            number: i + 1,
            cells,
        });
    }
    Ok(table)
}

/// Appends one TSV line. Cells never contain tabs or newlines: every value
/// written here was read from a cell or checked on the way in.
pub fn push_row<S: AsRef<str>>(out: &mut String, cells: &[S]) {
    for (i, c) in cells.iter().enumerate() {
        if i > 0 {
            out.push('\t');
        }
        out.push_str(c.as_ref());
    }
    out.push('\n');
}

fn scalar(cell: &str) -> String {
    let c = cell.trim();
    if c == "-" {
        String::new()
    } else {
        c.to_string()
    }
}

fn list(cell: &str, separator: char) -> Vec<String> {
    let c = cell.trim();
    if c.is_empty() || c == "-" {
        return Vec::new();
    }
    c.split(separator)
        .map(str::trim)
        .filter(|s| !s.is_empty() && *s != "-")
        .map(str::to_string)
        .collect()
}

fn check_cell(name: &str, value: &str) -> Result<(), String> {
    if value.contains(['\t', '\n', '\r']) {
        return Err(format!("{name} contains a tab or line break"));
    }
    Ok(())
}

/// A lexicon row with cells split but not yet interpreted. The JSON-lines
/// form uses the same field names; list cells become arrays.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LexiconRecord {
    pub local_id: String,
    pub spellings: Vec<String>,
    pub pos: String,
    pub gender: String,
    pub number: String,
    pub aspect: String,
    pub person: String,
    /// Radicals separated by spaces, e.g. `ي و م`.
    pub roots: Vec<String>,
    pub augmentation: String,
    pub transitivity: String,
    pub singulars: Vec<String>,
    pub duals: Vec<String>,
    pub plurals: Vec<String>,
    pub pv: Vec<String>,
    pub iv: Vec<String>,
    pub cv: Vec<String>,
    pub dialect: String,
    pub msa_counterpart: String,
    #[serde(flatten)]
    pub extra: BTreeMap<String, String>,
}

/// Column layout of a lexicon table.
#[derive(Debug, Clone)]
pub struct LexiconLayout {
    names: Vec<String>,
}

impl LexiconLayout {
    pub fn new(header: Option<&[String]>) -> Result<Self, String> {
        let names: Vec<String> = match header {
            Some(h) => h.to_vec(),
            None => LEXICON_COLUMNS.iter().map(|s| s.to_string()).collect(),
        };
        let mut seen = std::collections::BTreeSet::new();
        for n in &names {
            if n.is_empty() {
                return Err("empty column name in header".into());
            }
            if !seen.insert(n.as_str()) {
                return Err(format!("duplicate column \"{n}\" in header"));
            }
        }
        Ok(LexiconLayout { names })
    }

    pub fn record(&self, cells: &[String]) -> Result<LexiconRecord, String> {
        if cells.len() > self.names.len() {
            return Err(format!(
                "expected at most {} cells, found {}",
                self.names.len(),
                cells.len()
            ));
        }
        let mut r = LexiconRecord::default();
        for (name, cell) in self.names.iter().zip(cells) {
            match name.as_str() {
                "local_id" => r.local_id = scalar(cell),
                "spellings" => r.spellings = list(cell, '|'),
                "pos" => r.pos = scalar(cell),
                "gender" => r.gender = scalar(cell),
                "number" => r.number = scalar(cell),
                "aspect" => r.aspect = scalar(cell),
                "person" => r.person = scalar(cell),
                "roots" => r.roots = list(cell, ';'),
                "augmentation" => r.augmentation = scalar(cell),
                "transitivity" => r.transitivity = scalar(cell),
                "singulars" => r.singulars = list(cell, ';'),
                "duals" => r.duals = list(cell, ';'),
                "plurals" => r.plurals = list(cell, ';'),
                "pv" => r.pv = list(cell, ';'),
                "iv" => r.iv = list(cell, ';'),
                "cv" => r.cv = list(cell, ';'),
                "dialect" => r.dialect = scalar(cell),
                "msa_counterpart" => r.msa_counterpart = scalar(cell),
                other => {
                    let v = scalar(cell);
                    if !v.is_empty() {
                        r.extra.insert(other.to_string(), v);
                    }
                }
            }
        }
        Ok(r)
    }
}

impl LexiconRecord {
    /// Rejects values that cannot be written back as a single TSV cell.
    pub fn check_cells(&self) -> Result<(), String> {
        let scalars = [
            ("local_id", &self.local_id),
            ("pos", &self.pos),
            ("gender", &self.gender),
            ("number", &self.number),
            ("aspect", &self.aspect),
            ("person", &self.person),
            ("augmentation", &self.augmentation),
            ("transitivity", &self.transitivity),
            ("dialect", &self.dialect),
            ("msa_counterpart", &self.msa_counterpart),
        ];
        for (name, v) in scalars {
            check_cell(name, v)?;
        }
        for (name, v) in &self.extra {
            check_cell(name, name)?;
            check_cell(name, v)?;
        }
        for item in self.spellings.iter() {
            if item.contains('|') {
                return Err(format!("spelling \"{item}\" contains '|'"));
            }
            check_cell("spellings", item)?;
        }
        for (name, set) in self.list_fields() {
            for item in set {
                if item.contains(';') {
                    return Err(format!("{name} member \"{item}\" contains ';'"));
                }
                check_cell(name, item)?;
            }
        }
        Ok(())
    }

    fn list_fields(&self) -> [(&'static str, &Vec<String>); 7] {
        [
            ("roots", &self.roots),
            ("singulars", &self.singulars),
            ("duals", &self.duals),
            ("plurals", &self.plurals),
            ("pv", &self.pv),
            ("iv", &self.iv),
            ("cv", &self.cv),
        ]
    }

    /// Cells in [`LEXICON_COLUMNS`] order followed by `extra_columns`.
    pub fn cells(&self, extra_columns: &[String]) -> Vec<String> {
        let mut out = vec![
            self.local_id.clone(),
            self.spellings.join("|"),
            self.pos.clone(),
            self.gender.clone(),
            self.number.clone(),
            self.aspect.clone(),
            self.person.clone(),
            self.roots.join(";"),
            self.augmentation.clone(),
            self.transitivity.clone(),
            self.singulars.join(";"),
            self.duals.join(";"),
            self.plurals.join(";"),
            self.pv.join(";"),
            self.iv.join(";"),
            self.cv.join(";"),
            self.dialect.clone(),
            self.msa_counterpart.clone(),
        ];
        for name in extra_columns {
            out.push(self.extra.get(name).cloned().unwrap_or_default());
        }
        out
    }
}

/// One mappings row. The JSON-lines mirror uses the same field names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingRow {
    pub l1_ref: String,
    pub l2_ref: String,
    pub relation_code: String,
    pub precision: u8,
    pub status: String,
    pub provenance: String,
    #[serde(default)]
    pub reviewer: String,
    pub timestamp: u64,
}

impl MappingRow {
    pub fn from_cells(cells: &[String]) -> Result<MappingRow, String> {
        if cells.len() != MAPPING_COLUMNS.len() {
            return Err(format!(
                "expected {} cells, found {}",
                MAPPING_COLUMNS.len(),
                cells.len()
            ));
        }
        let precision = cells[3]
            .parse::<u8>()
            .map_err(|_| format!("precision \"{}\" is not an integer percentage", cells[3]))?;
        let timestamp = cells[7]
            .parse::<u64>()
            .map_err(|_| format!("timestamp \"{}\" is not an integer", cells[7]))?;
        Ok(MappingRow {
            l1_ref: cells[0].clone(),
            l2_ref: cells[1].clone(),
            relation_code: cells[2].clone(),
            precision,
            status: cells[4].clone(),
            provenance: cells[5].clone(),
            reviewer: scalar(&cells[6]),
            timestamp,
        })
    }

    pub fn cells(&self) -> [String; 8] {
        [
            self.l1_ref.clone(),
            self.l2_ref.clone(),
            self.relation_code.clone(),
            self.precision.to_string(),
            self.status.clone(),
            self.provenance.clone(),
            self.reviewer.clone(),
            self.timestamp.to_string(),
        ]
    }
}

/// One corpus token row. `qabas_id` only appears in linked exports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRow {
    pub sentence_idx: u64,
    pub token_idx: u64,
    pub surface: String,
    #[serde(default)]
    pub lemma_lexicon: String,
    #[serde(default)]
    pub lemma_local_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qabas_id: Option<u64>,
}

impl CorpusRow {
    /// Reads the five leading columns; anything after them is ignored.
    pub fn from_cells(cells: &[String]) -> Result<CorpusRow, String> {
        if cells.len() < 3 {
            return Err(format!("expected at least 3 cells, found {}", cells.len()));
        }
        let index = |i: usize, name: &str| {
            cells[i]
                .parse::<u64>()
                .map_err(|_| format!("{name} \"{}\" is not a non-negative integer", cells[i]))
        };
        let cell = |i: usize| cells.get(i).map(|c| scalar(c)).unwrap_or_default();
        Ok(CorpusRow {
            sentence_idx: index(0, "sentence_idx")?,
            token_idx: index(1, "token_idx")?,
            surface: cells[2].clone(),
            lemma_lexicon: cell(3),
            lemma_local_id: cell(4),
            qabas_id: None,
        })
    }

    pub fn cells(&self, with_qabas_id: bool) -> Vec<String> {
        let mut out = vec![
            self.sentence_idx.to_string(),
            self.token_idx.to_string(),
            self.surface.clone(),
            self.lemma_lexicon.clone(),
            self.lemma_local_id.clone(),
        ];
        if with_qabas_id {
            out.push(self.qabas_id.map(|id| id.to_string()).unwrap_or_default());
        }
        out
    }
}

/// Parses JSON lines, skipping blank lines. Errors carry the line number.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(
    input: impl BufRead,
) -> io::Result<Vec<Result<(usize, T), (usize, String)>>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map(|v| (i + 1, v))
                .map_err(|e| (i + 1, e.to_string())),
        );
    }
    Ok(out)
}

pub fn push_json<T: Serialize>(out: &mut String, value: &T) {
    out.push_str(&serde_json::to_string(value).expect("records serialize"));
    out.push('\n');
}
