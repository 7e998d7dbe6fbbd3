//! On-disk store: a directory of JSON-lines snapshot files, an append-only
//! journal of service mutations, and a lock file owned by one process.
//!
//! Loading reads the snapshot and replays the journal. Saving rewrites the
//! snapshot (each file via a temporary and a rename) and empties the journal.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use lemmalink_core::mapping::AuditEntry;
use lemmalink_core::{
    CanonicalLemma, Correspondence, CorrespondenceId, Decision, ExternalLemma, LemmaRef,
    MappingStore, Precision, RelationCode, RelationWeights,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CorpusDescriptor, CorpusToken};
use crate::error::StoreError;
use crate::store::{LexiconDescriptor, NewLemma, Store};

const FORMAT_VERSION: u32 = 1;
const LOCK_FILE: &str = ".lock";
const JOURNAL_FILE: &str = "journal.jsonl";

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Meta {
    format_version: u32,
    x2_weight: u8,
    mapping_clock: u64,
    next_canonical_id: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CorpusHeader {
    descriptor: CorpusDescriptor,
    linked_with: Option<Vec<RelationCode>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StoredToken {
    corpus_id: String,
    #[serde(flatten)]
    token: CorpusToken,
}

/// A mutation made through the service, replayed on load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Decision {
        id: u64,
        decision: Decision,
        reviewer: String,
        force: bool,
    },
    ManualMap {
        l1: LemmaRef,
        l2: LemmaRef,
        relation: RelationCode,
        reviewer: String,
    },
    InsertLemma {
        lemma: NewLemma,
    },
}

/// Applies an event to the store. Events are deterministic, so replaying a
/// journal over the snapshot it was written against reproduces the state.
pub fn apply(store: &mut Store, event: &Event) -> Result<(), StoreError> {
    match event {
        Event::Decision {
            id,
            decision,
            reviewer,
            force,
        } => store
            .review(CorrespondenceId(*id), *decision, reviewer, *force)
            .map(|_| ()),
        Event::ManualMap {
            l1,
            l2,
            relation,
            reviewer,
        } => store
            .manual_map(l1.clone(), l2.clone(), *relation, reviewer)
            .map(|_| ()),
        Event::InsertLemma { lemma } => store.insert_manual_lemma(lemma).map(|_| ()),
    }
}

struct Lock {
    path: PathBuf,
}

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Exclusive handle on a data directory.
pub struct DataDir {
    path: PathBuf,
    _lock: Lock,
}

impl DataDir {
    /// Creates the directory if needed and takes its lock.
    pub fn open(path: impl AsRef<Path>) -> Result<DataDir, StoreError> {
        let path = path.as_ref().to_path_buf();
        fs::create_dir_all(&path)?;
        let lock_path = path.join(LOCK_FILE);
        match OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&lock_path)
        {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(StoreError::Persistence(format!(
                    "{} is locked by another process (remove {} if none is running)",
                    path.display(),
                    lock_path.display()
                )));
            }
            Err(e) => return Err(e.into()),
        }
        Ok(DataDir {
            path,
            _lock: Lock { path: lock_path },
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    /// The stored state, or an empty store with `weights` for a new directory.
    pub fn load(&self, weights: RelationWeights) -> Result<Store, StoreError> {
        let meta: Option<Meta> = match fs::read_to_string(self.file("meta.json")) {
            Ok(s) => Some(serde_json::from_str(&s).map_err(|e| corrupt("meta.json", 1, e))?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(e) => return Err(e.into()),
        };
        let mut store = match meta {
            None => Store::new(weights),
            Some(meta) => self.load_snapshot(meta)?,
        };
        for (line, event) in read_lines::<Event>(&self.file(JOURNAL_FILE), JOURNAL_FILE)? {
            apply(&mut store, &event).map_err(|e| {
                StoreError::Persistence(format!("{JOURNAL_FILE} line {line} does not replay: {e}"))
            })?;
        }
        Ok(store)
    }

    fn load_snapshot(&self, meta: Meta) -> Result<Store, StoreError> {
        if meta.format_version != FORMAT_VERSION {
            return Err(StoreError::Persistence(format!(
                "unsupported format version {}",
                meta.format_version
            )));
        }
        let x2 = Precision::new(meta.x2_weight).ok_or_else(|| {
            StoreError::Persistence(format!("invalid X2 weight {}", meta.x2_weight))
        })?;
        let weights = RelationWeights { x2 };
        let mut store = Store::new(weights);
        for (_, d) in
            read_lines::<LexiconDescriptor>(&self.file("lexicons.jsonl"), "lexicons.jsonl")?
        {
            store.lexicons.insert(d.lexicon_id.clone(), d);
        }
        for (_, l) in
            read_lines::<CanonicalLemma>(&self.file("canonical.jsonl"), "canonical.jsonl")?
        {
            store.canonical.insert(l.id, l);
        }
        for (_, l) in read_lines::<ExternalLemma>(&self.file("external.jsonl"), "external.jsonl")? {
            store
                .external
                .entry(l.lexicon_id.clone())
                .or_default()
                .insert(l.local_id.clone(), l);
        }
        for id in store.lexicons.keys() {
            if id != lemmalink_core::CANONICAL_NAMESPACE {
                store.external.entry(id.clone()).or_default();
            }
        }
        store.next_canonical_id = meta.next_canonical_id;
        let correspondences: Vec<Correspondence> =
            read_lines(&self.file("mappings.jsonl"), "mappings.jsonl")?
                .into_iter()
                .map(|(_, c)| c)
                .collect();
        let audit: Vec<AuditEntry> = read_lines(&self.file("audit.jsonl"), "audit.jsonl")?
            .into_iter()
            .map(|(_, a)| a)
            .collect();
        store.mappings =
            MappingStore::from_parts(weights, correspondences, audit, meta.mapping_clock)
                .map_err(|e| StoreError::Persistence(format!("mappings.jsonl: {e}")))?;
        let mut tokens: BTreeMap<String, Vec<CorpusToken>> = BTreeMap::new();
        for (_, t) in read_lines::<StoredToken>(&self.file("tokens.jsonl"), "tokens.jsonl")? {
            tokens.entry(t.corpus_id).or_default().push(t.token);
        }
        for (_, h) in read_lines::<CorpusHeader>(&self.file("corpora.jsonl"), "corpora.jsonl")? {
            let id = h.descriptor.corpus_id.clone();
            let corpus = Corpus {
                tokens: tokens.remove(&id).unwrap_or_default(),
                descriptor: h.descriptor,
                linked_with: h.linked_with,
            };
            store.corpora.insert(id, corpus);
        }
        Ok(store)
    }

    /// Writes a full snapshot and empties the journal.
    pub fn save(&self, store: &Store) -> Result<(), StoreError> {
        self.write_lines("lexicons.jsonl", store.lexicons.values())?;
        self.write_lines("canonical.jsonl", store.canonical.values())?;
        self.write_lines(
            "external.jsonl",
            store.external.values().flat_map(|m| m.values()),
        )?;
        self.write_lines("mappings.jsonl", store.mappings.iter())?;
        self.write_lines("audit.jsonl", store.mappings.audit().iter())?;
        self.write_lines(
            "corpora.jsonl",
            store.corpora.values().map(|c| CorpusHeader {
                descriptor: c.descriptor.clone(),
                linked_with: c.linked_with.clone(),
            }),
        )?;
        self.write_lines(
            "tokens.jsonl",
            store.corpora.values().flat_map(|c| {
                c.tokens.iter().map(|t| StoredToken {
                    corpus_id: c.descriptor.corpus_id.clone(),
                    token: t.clone(),
                })
            }),
        )?;
        let meta = Meta {
            format_version: FORMAT_VERSION,
            x2_weight: store.mappings.weights().x2.percent(),
            mapping_clock: store.mappings.clock(),
            next_canonical_id: store.next_canonical_id,
        };
        // meta goes last: a snapshot without a matching meta is never read
        self.write_atomic("meta.json", |w| {
            serde_json::to_writer_pretty(&mut *w, &meta).map_err(std::io::Error::other)?;
            w.write_all(b"\n")
        })?;
        self.write_atomic(JOURNAL_FILE, |_| Ok(()))?;
        Ok(())
    }

    fn write_atomic(
        &self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<(), StoreError> {
        let tmp = self.file(&format!("{name}.tmp"));
        let file = File::create(&tmp)?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        let file = w.into_inner().map_err(|e| e.into_error())?;
        file.sync_all()?;
        fs::rename(&tmp, self.file(name))?;
        Ok(())
    }

    fn write_lines<T: Serialize>(
        &self,
        name: &str,
        items: impl Iterator<Item = T>,
    ) -> Result<(), StoreError> {
        self.write_atomic(name, |w| {
            for item in items {
                serde_json::to_writer(&mut *w, &item).map_err(std::io::Error::other)?;
                w.write_all(b"\n")?;
            }
            Ok(())
        })
    }

    /// Appends an event and flushes it to disk before returning.
    pub fn append(&self, event: &Event) -> Result<(), StoreError> {
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.file(JOURNAL_FILE))?;
        let mut line = serde_json::to_string(event).map_err(std::io::Error::other)?;
        line.push('\n');
        f.write_all(line.as_bytes())?;
        f.sync_data()?;
        Ok(())
    }
}

fn corrupt(name: &str, line: usize, e: impl std::fmt::Display) -> StoreError {
    StoreError::Persistence(format!("{name} line {line}: {e}"))
}

fn read_lines<T: DeserializeOwned>(path: &Path, name: &str) -> Result<Vec<(usize, T)>, StoreError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push((
            i + 1,
            serde_json::from_str(&line).map_err(|e| corrupt(name, i + 1, e))?,
        ));
    }
    Ok(out)
}
