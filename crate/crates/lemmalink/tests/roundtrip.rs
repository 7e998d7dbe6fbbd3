mod common;

use common::{fingerprint, fixture, ingest};
use lemmalink::io::{read_lexicon, read_mappings};
use lemmalink::{DataDir, Format, IngestOptions, LemmaOverrides, LexiconDescriptor, Store};
use lemmalink_core::{CorrespondenceId, Decision, LemmaRef, RelationCode, RelationWeights};

/// Lexicon fixtures as (lexicon id, file, canonical).
const LEXICONS: &[(&str, &str, bool)] = &[
    ("qabas", "qabas.tsv", true),
    ("qabas", "qabas_dialect.tsv", true),
    ("modern", "yawmi/modern.tsv", false),
    ("ghani", "yawmi/ghani.tsv", false),
    ("sama", "yawmi/sama.tsv", false),
    ("sama_small", "sama_small.tsv", false),
    ("rich", "rich_external.tsv", false),
];

fn reingest(id: &str, canonical: bool, text: &str, format: Format) -> Store {
    let mut store = Store::new(RelationWeights::default());
    let rows = read_lexicon(text.as_bytes(), format == Format::Jsonl).unwrap();
    let options = IngestOptions {
        strict: Some(canonical),
        ..Default::default()
    };
    let r = store
        .ingest_lexicon(
            LexiconDescriptor::new(id, id, if canonical { "canonical" } else { "lexicon" }),
            rows,
            options,
        )
        .unwrap();
    assert!(r.rejected.is_empty(), "{id}: {:?}", r.rejected);
    store
}

#[test]
fn lexicon_exports_are_fixpoints() {
    for &(id, file, canonical) in LEXICONS {
        let mut store = Store::new(RelationWeights::default());
        ingest(&mut store, id, file, canonical);
        for format in [Format::Tsv, Format::Jsonl] {
            let first = store.export_lexicon(id, format).unwrap();
            let second = reingest(id, canonical, &first, format)
                .export_lexicon(id, format)
                .unwrap();
            assert_eq!(first, second, "{file} {format:?}");
        }
        // and across formats
        let jsonl = store.export_lexicon(id, Format::Jsonl).unwrap();
        let via_jsonl = reingest(id, canonical, &jsonl, Format::Jsonl)
            .export_lexicon(id, Format::Tsv)
            .unwrap();
        assert_eq!(
            via_jsonl,
            store.export_lexicon(id, Format::Tsv).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn external_free_features_survive_export() {
    let mut store = Store::new(RelationWeights::default());
    ingest(&mut store, "rich", "rich_external.tsv", false);
    let tsv = store.export_lexicon("rich", Format::Tsv).unwrap();
    let lines: Vec<&str> = tsv.lines().collect();
    assert!(lines[0].ends_with("\tmsa_counterpart\tvoice"));
    assert!(
        lines[2].starts_with("v2\t") && lines[2].ends_with("\tPASSIVE"),
        "{}",
        lines[2]
    );
    assert!(lines[3].ends_with("\t"), "{}", lines[3]);
    let v1 = store.external("rich", "v1").unwrap();
    assert_eq!(
        v1.free_features.get("voice").map(String::as_str),
        Some("ACTIVE")
    );
    assert_eq!(v1.headwords.len(), 2);
    assert!(store.external("rich", "v3").unwrap().pos.is_none());
}

#[test]
fn canonical_dialect_links_round_trip() {
    let mut store = Store::new(RelationWeights::default());
    ingest(&mut store, "qabas", "qabas_dialect.tsv", true);
    let tsv = store.export_lexicon("qabas", Format::Tsv).unwrap();
    let dialect_row = tsv.lines().nth(1).unwrap();
    assert!(dialect_row.ends_with("\tPalestinian\t11"), "{dialect_row}");
    let reloaded = reingest("qabas", true, &tsv, Format::Tsv);
    assert_eq!(reloaded.export_lexicon("qabas", Format::Tsv).unwrap(), tsv);
}

/// A store whose mappings use every status and provenance.
fn mixed_mappings() -> Store {
    let mut store = Store::new(RelationWeights::default());
    ingest(&mut store, "qabas", "qabas.tsv", true);
    for id in ["modern", "ghani", "sama"] {
        ingest(&mut store, id, &format!("yawmi/{id}.tsv"), false);
    }
    ingest(&mut store, "sama_small", "sama_small.tsv", false);
    store.automap("modern", "ghani").unwrap();
    store.automap("ghani", "sama").unwrap();
    store.automap("sama_small", "qabas").unwrap();
    store
        .review(
            CorrespondenceId(0),
            Decision::Confirm(RelationCode::R3),
            "A1",
            false,
        )
        .unwrap();
    store
        .review(CorrespondenceId(1), Decision::Reject, "A2", false)
        .unwrap();
    store
        .manual_map(
            LemmaRef::external("modern", "m1"),
            LemmaRef::external("sama", "s1"),
            RelationCode::X2,
            "A3",
        )
        .unwrap();
    let lenient = LemmaOverrides {
        strict: Some(false),
        ..Default::default()
    };
    store
        .adopt_as_qabas(&LemmaRef::external("sama", "s1"), &lenient)
        .unwrap();
    store
}

#[test]
fn mapping_exports_are_fixpoints() {
    let source = mixed_mappings();
    for format in [Format::Tsv, Format::Jsonl] {
        let first = source.export_mappings(format);
        for status in ["AUTO", "CONFIRMED", "REJECTED"] {
            assert!(first.contains(status), "{format:?} lacks {status}");
        }
        for provenance in ["HEURISTIC_H1", "HEURISTIC_H2", "MANUAL", "ADOPTION"] {
            assert!(first.contains(provenance), "{format:?} lacks {provenance}");
        }

        // importing into the same store changes nothing
        let mut same = source.clone();
        let r =
            same.import_mappings(read_mappings(first.as_bytes(), format == Format::Jsonl).unwrap());
        assert_eq!((r.changed(), r.rejected.len()), (0, 0), "{format:?}");
        assert_eq!(same.export_mappings(format), first);

        // and into a store with the same lemmas but no mappings
        let mut fresh = Store::new(RelationWeights::default());
        for lexicon in source.lexicons() {
            let text = source
                .export_lexicon(&lexicon.lexicon_id, Format::Jsonl)
                .unwrap();
            let rows = read_lexicon(text.as_bytes(), true).unwrap();
            let canonical = lexicon.lexicon_id == "qabas";
            fresh
                .ingest_lexicon(
                    lexicon.clone(),
                    rows,
                    IngestOptions {
                        strict: Some(false),
                        replace: canonical,
                        ..Default::default()
                    },
                )
                .unwrap();
        }
        let r = fresh
            .import_mappings(read_mappings(first.as_bytes(), format == Format::Jsonl).unwrap());
        assert!(r.rejected.is_empty(), "{:?}", r.rejected);
        assert_eq!(fresh.export_mappings(format), first, "{format:?}");
    }
}

#[test]
fn mapping_import_rejects_bad_rows_with_line_numbers() {
    let mut store = mixed_mappings();
    let before = fingerprint(&store);
    let text =
        "l1_ref\tl2_ref\trelation_code\tprecision\tstatus\tprovenance\treviewer\ttimestamp\n\
                modern:m1\tghani:g1\tR9\t100\tCONFIRMED\tMANUAL\tA1\t1\n\
                modern:m1\tghani:g1\tR2\t50\tCONFIRMED\tMANUAL\tA1\t1\n\
                modern:m1\tnowhere:x\tR1\t100\tCONFIRMED\tMANUAL\tA1\t1\n\
                modern:m1\tghani:g1\tR1\t100\tAUTO\tMANUAL\t\t1\n";
    let r = store.import_mappings(read_mappings(text.as_bytes(), false).unwrap());
    let lines: Vec<usize> = r.rejected.iter().map(|e| e.line).collect();
    assert_eq!(lines, [2, 3, 4, 5]);
    assert_eq!(fingerprint(&store), before);
}

#[test]
fn data_directory_round_trips_the_whole_store() {
    let mut store = mixed_mappings();
    let rows = lemmalink::io::read_corpus_file(&fixture("corpus.tsv")).unwrap();
    store
        .ingest_corpus(lemmalink::CorpusDescriptor::new("c", "C", "MSA"), rows)
        .unwrap();
    store
        .link_corpus("c", &lemmalink::corpus::default_whitelist())
        .unwrap();
    let dir = tempfile::tempdir().unwrap();
    {
        let data = DataDir::open(dir.path()).unwrap();
        data.save(&store).unwrap();
    }
    let data = DataDir::open(dir.path()).unwrap();
    let loaded = data.load(RelationWeights::default()).unwrap();
    assert_eq!(fingerprint(&loaded), fingerprint(&store));
    assert_eq!(loaded.mappings().audit(), store.mappings().audit());
    // saving what was loaded writes the same bytes
    let before: Vec<Vec<u8>> = [
        "mappings.jsonl",
        "canonical.jsonl",
        "tokens.jsonl",
        "meta.json",
    ]
    .iter()
    .map(|f| std::fs::read(dir.path().join(f)).unwrap())
    .collect();
    data.save(&loaded).unwrap();
    let after: Vec<Vec<u8>> = [
        "mappings.jsonl",
        "canonical.jsonl",
        "tokens.jsonl",
        "meta.json",
    ]
    .iter()
    .map(|f| std::fs::read(dir.path().join(f)).unwrap())
    .collect();
    assert_eq!(before, after);
}

#[test]
fn x2_weight_is_fixed_by_the_store() {
    let weights = RelationWeights {
        x2: lemmalink_core::Precision::new(35).unwrap(),
    };
    let mut store = Store::new(weights);
    ingest(&mut store, "modern", "yawmi/modern.tsv", false);
    ingest(&mut store, "sama", "yawmi/sama.tsv", false);
    let c = store
        .manual_map(
            LemmaRef::external("modern", "m1"),
            LemmaRef::external("sama", "s1"),
            RelationCode::X2,
            "A1",
        )
        .unwrap();
    assert_eq!(c.relation.precision.percent(), 35);
    let dir = tempfile::tempdir().unwrap();
    let data = DataDir::open(dir.path()).unwrap();
    data.save(&store).unwrap();
    let loaded = data.load(RelationWeights::default()).unwrap();
    assert_eq!(loaded.mappings().weights(), weights);
}
