#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use lemmalink::io::{read_corpus_file, read_lexicon_file};
use lemmalink::service::{self, AppState};
use lemmalink::{CorpusDescriptor, Format, IngestOptions, LexiconDescriptor, Store};
use lemmalink_core::RelationWeights;
use serde_json::Value;

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

pub fn ingest(store: &mut Store, id: &str, rel: &str, canonical: bool) {
    let rows = read_lexicon_file(&fixture(rel)).unwrap();
    let options = IngestOptions {
        strict: if canonical { None } else { Some(false) },
        ..Default::default()
    };
    let category = if canonical { "canonical" } else { "lexicon" };
    let report = store
        .ingest_lexicon(LexiconDescriptor::new(id, id, category), rows, options)
        .unwrap();
    assert!(report.rejected.is_empty(), "{id}: {:?}", report.rejected);
}

/// SAMA, Modern and Ghani entries for يَوْمِيّ, one lemma each.
pub fn yawmi_store() -> Store {
    let mut store = Store::new(RelationWeights::default());
    for id in ["modern", "ghani", "sama"] {
        ingest(&mut store, id, &format!("yawmi/{id}.tsv"), false);
    }
    store
}

/// The يَوْمِيّ lexicons automapped Modern→Ghani and Ghani→SAMA.
pub fn yawmi_queue() -> Store {
    let mut store = yawmi_store();
    store.automap("modern", "ghani").unwrap();
    store.automap("ghani", "sama").unwrap();
    store
}

/// Small canonical lexicon, a SAMA-like lexicon automapped onto it, and a
/// ten-token corpus referencing the SAMA-like lemmas.
pub fn linked_store() -> Store {
    let mut store = Store::new(RelationWeights::default());
    ingest(&mut store, "qabas", "qabas.tsv", true);
    ingest(&mut store, "sama_small", "sama_small.tsv", false);
    store.automap("sama_small", "qabas").unwrap();
    let rows = read_corpus_file(&fixture("corpus.tsv")).unwrap();
    let r = store
        .ingest_corpus(
            CorpusDescriptor::new("corpus", "Fixture corpus", "MSA"),
            rows,
        )
        .unwrap();
    assert!(r.rejected.is_empty());
    store
}

/// Everything observable about a store, for before/after comparisons.
pub fn fingerprint(store: &Store) -> String {
    let mut out = store.export_mappings(Format::Jsonl);
    let _ = writeln!(
        out,
        "clock={} audit={}",
        store.mappings().clock(),
        store.mappings().audit().len()
    );
    for d in store.lexicons() {
        let _ = writeln!(out, "{d:?}");
        out.push_str(&store.export_lexicon(&d.lexicon_id, Format::Jsonl).unwrap());
    }
    for c in store.corpora() {
        out.push_str(
            &store
                .export_corpus(&c.descriptor.corpus_id, Format::Jsonl)
                .unwrap(),
        );
    }
    out
}

/// Writes a data directory whose mapping store holds the confirmed
/// correspondence counts of `published_counts/relations.tsv`.
pub fn write_published_relations(dir: &Path) -> u64 {
    let text = std::fs::read_to_string(fixture("published_counts/relations.tsv")).unwrap();
    let mut lines = String::new();
    let mut n = 0u64;
    for line in text
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#') && !l.is_empty())
    {
        let (code, count) = line.split_once('\t').unwrap();
        let count: u64 = count.parse().unwrap();
        let precision = lemmalink_core::RelationWeights::default()
            .precision(code.parse().unwrap())
            .percent();
        for _ in 0..count {
            n += 1;
            let _ = writeln!(
                lines,
                r#"{{"id":{n},"l1":"published:{n}","l2":"qabas:{n}","relation":{{"code":"{code}","precision":{precision}}},"status":"CONFIRMED","provenance":"MANUAL","reviewer":"import","timestamp":{n}}}"#
            );
        }
    }
    std::fs::create_dir_all(dir).unwrap();
    std::fs::write(dir.join("mappings.jsonl"), lines).unwrap();
    std::fs::write(
        dir.join("meta.json"),
        format!(
            r#"{{"format_version":1,"x2_weight":30,"mapping_clock":{n},"next_canonical_id":1}}"#
        ),
    )
    .unwrap();
    n
}

pub fn cli(data: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lemmalink"))
        .arg("--data-dir")
        .arg(data)
        .args(args)
        .env_remove("LEMMALINK_DATA")
        .env_remove("LEMMALINK_TOKEN")
        .output()
        .unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// `key=value` from a one-line summary.
pub fn field(summary: &str, key: &str) -> String {
    summary
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
        .unwrap_or_else(|| panic!("{key} missing from {summary:?}"))
        .to_string()
}

/// A service bound to an ephemeral port.
pub struct Server {
    pub base: String,
    pub client: reqwest::Client,
    pub app: Arc<AppState>,
    task: tokio::task::JoinHandle<std::io::Result<()>>,
}

impl Server {
    pub async fn start(app: Arc<AppState>) -> Server {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let base = format!("http://{}/api", listener.local_addr().unwrap());
        let task = tokio::spawn(service::serve(listener, app.clone()));
        Server {
            base,
            client: reqwest::Client::new(),
            app,
            task,
        }
    }

    pub async fn with_store(store: Store) -> Server {
        Server::start(AppState::new(store, None, None)).await
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    pub async fn get(&self, path: &str) -> (u16, Value) {
        let r = self.client.get(self.url(path)).send().await.unwrap();
        let status = r.status().as_u16();
        (status, r.json().await.unwrap())
    }

    pub async fn post(&self, path: &str, body: &Value) -> (u16, Value) {
        let r = self
            .client
            .post(self.url(path))
            .json(body)
            .send()
            .await
            .unwrap();
        let status = r.status().as_u16();
        (status, r.json().await.unwrap())
    }

    /// Stops serving and waits until open connections have released the
    /// state.
    pub async fn stop(self) -> Arc<AppState> {
        self.task.abort();
        let _ = self.task.await;
        drop(self.client);
        for _ in 0..500 {
            if Arc::strong_count(&self.app) == 1 {
                break;
            }
            tokio::time::sleep(std::time::Duration::from_millis(10)).await;
        }
        assert_eq!(Arc::strong_count(&self.app), 1, "state still shared");
        self.app
    }
}

/// Checks `value` against `schemas/<name>.schema.json`. Supports the
/// keywords those files use: type, const, enum, required, properties,
/// additionalProperties: false, items, anyOf, minimum and maximum.
pub fn assert_schema(name: &str, value: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("schemas/{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let mut errors = Vec::new();
    check(&schema, value, "$", &mut errors);
    assert!(errors.is_empty(), "{name}: {errors:#?}\n{value:#}");
}

fn type_matches(t: &str, v: &Value) -> bool {
    match t {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        "integer" => v.is_i64() || v.is_u64(),
        "number" => v.is_number(),
        other => panic!("unsupported type {other}"),
    }
}

fn check(schema: &Value, v: &Value, at: &str, errors: &mut Vec<String>) {
    if let Some(t) = schema.get("type") {
        let ok = match t {
            Value::String(t) => type_matches(t, v),
            Value::Array(ts) => ts.iter().any(|t| type_matches(t.as_str().unwrap(), v)),
            _ => panic!("bad type keyword"),
        };
        if !ok {
            errors.push(format!("{at}: expected {t}, got {v}"));
            return;
        }
    }
    if let Some(c) = schema.get("const") {
        if c != v {
            errors.push(format!("{at}: expected {c}, got {v}"));
        }
    }
    if let Some(Value::Array(options)) = schema.get("enum") {
        if !options.contains(v) {
            errors.push(format!("{at}: {v} not in {options:?}"));
        }
    }
    if let Some(Value::Array(options)) = schema.get("anyOf") {
        let any = options.iter().any(|s| {
            let mut e = Vec::new();
            check(s, v, at, &mut e);
            e.is_empty()
        });
        if !any {
            errors.push(format!("{at}: matches no alternative"));
        }
    }
    if let Some(n) = v.as_f64() {
        if schema
            .get("minimum")
            .and_then(Value::as_f64)
            .is_some_and(|m| n < m)
        {
            errors.push(format!("{at}: {n} below minimum"));
        }
        if schema
            .get("maximum")
            .and_then(Value::as_f64)
            .is_some_and(|m| n > m)
        {
            errors.push(format!("{at}: {n} above maximum"));
        }
    }
    if let Value::Object(map) = v {
        if let Some(Value::Array(required)) = schema.get("required") {
            for r in required {
                if !map.contains_key(r.as_str().unwrap()) {
                    errors.push(format!("{at}: missing {r}"));
                }
            }
        }
        let props = schema.get("properties").and_then(Value::as_object);
        for (k, child) in map {
            match props.and_then(|p| p.get(k)) {
                Some(s) => check(s, child, &format!("{at}.{k}"), errors),
                None if schema.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    errors.push(format!("{at}: unexpected property {k}"))
                }
                None => {}
            }
        }
    }
    if let (Value::Array(items), Some(s)) = (v, schema.get("items")) {
        for (i, item) in items.iter().enumerate() {
            check(s, item, &format!("{at}[{i}]"), errors);
        }
    }
}
