//! Reading input files into records and rendering reports as TSV.

use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use lemmalink_core::mapping::RelationCounts;
use lemmalink_core::{PosCoverage, RelationCode};

use crate::corpus::CorpusCoverage;
use crate::formats::{
    push_row, read_jsonl, read_table, CorpusRow, LexiconLayout, LexiconRecord, MappingRow,
    CORPUS_COLUMNS, LEXICON_COLUMNS, MAPPING_COLUMNS,
};
use crate::store::IaaReport;

pub type Rows<T> = Vec<(usize, Result<T, String>)>;

fn is_jsonl(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "jsonl")
}

fn open(path: &Path) -> io::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

fn from_jsonl<T: for<'de> serde::Deserialize<'de>>(input: impl BufRead) -> io::Result<Rows<T>> {
    Ok(read_jsonl::<T>(input)?
        .into_iter()
        .map(|r| match r {
            Ok((line, v)) => (line, Ok(v)),
            Err((line, e)) => (line, Err(e)),
        })
        .collect())
}

pub fn read_lexicon(input: impl BufRead, jsonl: bool) -> io::Result<Rows<LexiconRecord>> {
    if jsonl {
        return from_jsonl(input);
    }
    let table = read_table(input, LEXICON_COLUMNS[0])?;
    let layout = match LexiconLayout::new(table.header.as_deref()) {
        Ok(l) => l,
        Err(e) => return Err(io::Error::new(io::ErrorKind::InvalidData, e)),
    };
    Ok(table
        .lines
        .into_iter()
        .map(|l| (l.number, layout.record(&l.cells)))
        .collect())
}

pub fn read_lexicon_file(path: &Path) -> io::Result<Rows<LexiconRecord>> {
    read_lexicon(open(path)?, is_jsonl(path))
}

pub fn read_mappings(input: impl BufRead, jsonl: bool) -> io::Result<Rows<MappingRow>> {
    if jsonl {
        return from_jsonl(input);
    }
    let table = read_table(input, MAPPING_COLUMNS[0])?;
    Ok(table
        .lines
        .into_iter()
        .map(|l| (l.number, MappingRow::from_cells(&l.cells)))
        .collect())
}

pub fn read_mappings_file(path: &Path) -> io::Result<Rows<MappingRow>> {
    read_mappings(open(path)?, is_jsonl(path))
}

pub fn read_corpus(input: impl BufRead, jsonl: bool) -> io::Result<Rows<CorpusRow>> {
    if jsonl {
        return from_jsonl(input);
    }
    let table = read_table(input, CORPUS_COLUMNS[0])?;
    Ok(table
        .lines
        .into_iter()
        .map(|l| (l.number, CorpusRow::from_cells(&l.cells)))
        .collect())
}

pub fn read_corpus_file(path: &Path) -> io::Result<Rows<CorpusRow>> {
    read_corpus(open(path)?, is_jsonl(path))
}

/// Per-POS table: one row per tag, a total row after each category, and a
/// grand total.
pub fn coverage_tsv(c: &PosCoverage) -> String {
    let mut out = String::new();
    let mut header = vec!["category".to_string(), "pos".to_string()];
    header.extend(c.sources.iter().cloned());
    push_row(&mut out, &header);
    let row = |out: &mut String, a: &str, b: &str, counts: &[u64]| {
        let mut cells = vec![a.to_string(), b.to_string()];
        cells.extend(counts.iter().map(u64::to_string));
        push_row(out, &cells);
    };
    for g in &c.groups {
        for t in &g.tags {
            row(&mut out, g.category.as_str(), t.tag.as_str(), &t.counts);
        }
        row(&mut out, g.category.as_str(), "TOTAL", &g.total);
    }
    row(&mut out, "UNKNOWN", "UNKNOWN", &c.unknown);
    row(&mut out, "TOTAL", "TOTAL", &c.total);
    out
}

pub fn relations_tsv(r: &RelationCounts) -> String {
    let mut out = String::new();
    push_row(&mut out, &["relation", "label", "count"]);
    for code in RelationCode::ALL {
        push_row(
            &mut out,
            &[code.as_str(), code.label(), &r.get(code).to_string()],
        );
    }
    push_row(&mut out, &["TOTAL", "", &r.total.to_string()]);
    out
}

pub fn iaa_tsv(r: &IaaReport) -> String {
    let mut out = String::new();
    push_row(
        &mut out,
        &["a", "b", "items", "kappa", "rounded", "degenerate"],
    );
    for p in &r.pairs {
        push_row(
            &mut out,
            &[
                p.a.clone(),
                p.b.clone(),
                p.items.to_string(),
                p.kappa.to_string(),
                format!("{:.2}", p.rounded),
                p.degenerate.to_string(),
            ],
        );
    }
    out
}

pub fn corpora_tsv(rows: &[CorpusCoverage]) -> String {
    let mut out = String::new();
    push_row(
        &mut out,
        &[
            "corpus_id",
            "name",
            "variety",
            "tokens_mapped",
            "tokens_total",
            "tokens_percent",
            "lemmas_mapped",
            "lemmas_total",
            "lemmas_percent",
        ],
    );
    for r in rows {
        push_row(
            &mut out,
            &[
                r.corpus_id.clone(),
                r.name.clone(),
                r.variety.clone(),
                r.tokens.mapped.to_string(),
                r.tokens.total.to_string(),
                r.tokens_percent.to_string(),
                r.lemmas.mapped.to_string(),
                r.lemmas.total.to_string(),
                r.lemmas_percent.to_string(),
            ],
        );
    }
    out
}
