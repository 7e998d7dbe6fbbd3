mod common;

use common::{assert_schema, fingerprint, linked_store, yawmi_queue, yawmi_store, Server};
use lemmalink::service::AppState;
use lemmalink::{DataDir, Store};
use lemmalink_core::{CorrespondenceId, RelationWeights, Status};
use serde_json::{json, Value};

fn refs(items: &Value) -> Vec<String> {
    items
        .as_array()
        .unwrap()
        .iter()
        .map(|i| i["lemma_ref"].as_str().unwrap().to_string())
        .collect()
}

#[tokio::test]
async fn search_returns_all_three_yawmi_entries() {
    let s = Server::with_store(yawmi_store()).await;
    let (status, body) = s.get("/lemmas?q=يومي").await;
    assert_eq!(status, 200);
    assert_schema("lemma_page", &body);
    assert_eq!(body["total"], 3);
    assert_eq!(refs(&body["items"]), ["ghani:g1", "modern:m1", "sama:s1"]);

    let (_, exact) = s.get("/lemmas?q=يومي&mode=exact").await;
    assert_eq!(refs(&exact["items"]), ["ghani:g1", "modern:m1"]);

    let (_, filtered) = s.get("/lemmas?q=يومي&lexicon=sama").await;
    assert_eq!(refs(&filtered["items"]), ["sama:s1"]);
}

#[tokio::test]
async fn search_pages_are_stable() {
    let s = Server::with_store(yawmi_store()).await;
    let (_, all) = s.get("/lemmas?q=يومي&page_size=3").await;
    let mut paged = Vec::new();
    for page in 1..=3 {
        let (status, body) = s
            .get(&format!("/lemmas?q=يومي&page={page}&page_size=1"))
            .await;
        assert_eq!(status, 200);
        assert_eq!(body["total"], 3);
        paged.extend(refs(&body["items"]));
    }
    assert_eq!(paged, refs(&all["items"]));
    let (_, again) = s.get("/lemmas?q=يومي&page=2&page_size=1").await;
    assert_eq!(refs(&again["items"]), [paged[1].clone()]);
}

#[tokio::test]
async fn search_rejects_non_arabic_query() {
    let s = Server::with_store(yawmi_store()).await;
    for bad in [
        "/lemmas?q=xyz",
        "/lemmas?q=يوم%20ي",
        "/lemmas?page=0",
        "/lemmas?pos=NOPE",
    ] {
        let (status, body) = s.get(bad).await;
        assert_eq!(status, 400, "{bad}");
        assert_schema("error", &body);
    }
    let (status, body) = s.get("/lemmas?lexicon=missing").await;
    assert_eq!(status, 404);
    assert_schema("error", &body);
}

#[tokio::test]
async fn empty_store_gives_empty_pages_and_zero_stats() {
    let s = Server::with_store(Store::new(RelationWeights::default())).await;
    let (status, body) = s.get("/lemmas?q=يومي").await;
    assert_eq!(status, 200);
    assert_eq!(body["total"], 0);
    assert_eq!(body["items"], json!([]));

    let (status, relations) = s.get("/stats/relations").await;
    assert_eq!(status, 200);
    assert_schema("relations", &relations);
    assert_eq!(relations["total"], 0);
    assert!(relations["counts"]
        .as_object()
        .unwrap()
        .values()
        .all(|v| v == 0));

    let (_, coverage) = s.get("/stats/coverage").await;
    assert_schema("coverage", &coverage);
    assert_eq!(coverage["sources"], json!(["qabas"]));
    assert_eq!(coverage["total"], json!([0]));

    let (_, queue) = s.get("/mappings").await;
    assert_schema("queue_page", &queue);
    assert_eq!(queue["total"], 0);
}

#[tokio::test]
async fn queue_shows_both_yawmi_candidates_side_by_side() {
    let s = Server::with_store(yawmi_queue()).await;
    let (status, body) = s.get("/mappings?status=auto").await;
    assert_eq!(status, 200);
    assert_schema("queue_page", &body);
    assert_eq!(body["total"], 2);
    let pairs: Vec<(String, String)> = body["items"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| {
            (
                i["l1"]["lemma_ref"].as_str().unwrap().into(),
                i["l2"]["lemma_ref"].as_str().unwrap().into(),
            )
        })
        .collect();
    assert_eq!(
        pairs,
        [
            ("modern:m1".into(), "ghani:g1".into()),
            ("ghani:g1".into(), "sama:s1".into())
        ]
    );
    let first = &body["items"][0];
    assert_eq!(first["suggested_relation"], "R1");
    assert_eq!(first["provenance"], "HEURISTIC_H2");
    assert_eq!(first["l2"]["singulars"], json!(["يَوْمِيٌّ", "يَوْمِيّةٌ"]));
    assert_eq!(first["l1"]["roots"], json!(["ي و م"]));
}

#[tokio::test]
async fn decisions_confirm_conflict_and_drain_the_queue() {
    let s = Server::with_store(yawmi_queue()).await;
    let (_, queue) = s.get("/mappings").await;
    let ids: Vec<u64> = queue["items"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| i["id"].as_u64().unwrap())
        .collect();

    let (status, body) = s
        .post(
            &format!("/mappings/{}/decision", ids[0]),
            &json!({"relation": "R1", "reviewer": "A1"}),
        )
        .await;
    assert_eq!(status, 200);
    assert_schema("correspondence", &body);
    assert_eq!(body["correspondence"]["status"], "CONFIRMED");
    assert_eq!(
        body["correspondence"]["relation"],
        json!({"code": "R1", "precision": 100})
    );

    let (_, relations) = s.get("/stats/relations").await;
    assert_eq!(relations["counts"]["R1"], 1);

    let (status, body) = s
        .post(
            &format!("/mappings/{}/decision", ids[0]),
            &json!({"relation": "R2", "reviewer": "A2"}),
        )
        .await;
    assert_eq!(status, 409);
    assert_schema("error", &body);
    assert_eq!(body["error"]["code"], "already_decided");

    let (status, body) = s
        .post(
            &format!("/mappings/{}/decision", ids[0]),
            &json!({"relation": "R2", "reviewer": "A2", "force": true}),
        )
        .await;
    assert_eq!(status, 200);
    assert_eq!(body["correspondence"]["relation"]["precision"], 90);

    let (status, body) = s
        .post(
            &format!("/mappings/{}/decision", ids[1]),
            &json!({"reject": true, "reviewer": "A1"}),
        )
        .await;
    assert_eq!(status, 200);
    assert_eq!(body["correspondence"]["status"], "REJECTED");

    let (_, queue) = s.get("/mappings?status=auto").await;
    assert_eq!(queue["total"], 0);
    let (_, confirmed) = s.get("/mappings?status=confirmed").await;
    assert_eq!(confirmed["total"], 1);
    assert_eq!(confirmed["items"][0]["relation"], "R2");

    let (status, body) = s
        .post(
            "/mappings/999/decision",
            &json!({"relation": "R1", "reviewer": "A1"}),
        )
        .await;
    assert_eq!(status, 404);
    assert_schema("error", &body);

    let (_, iaa) = s.get("/stats/iaa").await;
    assert_schema("iaa", &iaa);
    assert_eq!(iaa["annotators"], json!(["A1", "A2"]));
    // both labelled the first pair, with different relations
    assert_eq!(iaa["pairs"][0]["items"], 1);
}

#[tokio::test]
async fn manual_map_creates_confirmed_correspondence() {
    let s = Server::with_store(yawmi_store()).await;
    let body = json!({"l1": "modern:m1", "l2": "sama:s1", "relation": "X1", "reviewer": "A3"});
    let (status, created) = s.post("/mappings", &body).await;
    assert_eq!(status, 201);
    assert_schema("correspondence", &created);
    assert_eq!(created["correspondence"]["provenance"], "MANUAL");
    assert_eq!(created["correspondence"]["relation"]["precision"], 50);

    let (status, dup) = s.post("/mappings", &body).await;
    assert_eq!(status, 409);
    assert_schema("error", &dup);

    let (status, _) = s
        .post(
            "/mappings",
            &json!({"l1": "modern:m1", "l2": "modern:zz", "relation": "R1", "reviewer": "A3"}),
        )
        .await;
    assert_eq!(status, 404);
}

#[tokio::test]
async fn lemma_insertion_validates_per_field() {
    let s = Server::with_store(linked_store()).await;
    let msa = json!({"spellings": ["كِتَابٌ"], "pos": "NOUN", "singulars": ["كِتَابٌ"]});
    let (status, body) = s.post("/lemmas", &msa).await;
    assert_eq!(status, 201);
    assert_schema("inserted", &body);
    // qabas:3 already spells كِتَابٌ as a noun
    assert_eq!(body["warning"]["existing"], 3);
    let msa_id = body["id"].as_u64().unwrap();

    let dialect = json!({
        "spellings": ["كْتَابْ"], "pos": "NOUN", "dialect": "Palestinian", "msa_counterpart": msa_id
    });
    let (status, body) = s.post("/lemmas", &dialect).await;
    assert_eq!(status, 201);
    assert_eq!(body["warning"], Value::Null);

    let orphan = json!({"spellings": ["كْتَابْ"], "pos": "NOUN", "dialect": "Palestinian"});
    let (status, body) = s.post("/lemmas", &orphan).await;
    assert_eq!(status, 422);
    assert_schema("error", &body);
    let fields: Vec<&str> = body["error"]["fields"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["field"].as_str().unwrap())
        .collect();
    assert_eq!(fields, ["msa_counterpart"]);

    let sloppy = json!({"spellings": ["كتاب"], "pos": "VERBISH"});
    let (status, body) = s.post("/lemmas", &sloppy).await;
    assert_eq!(status, 422);
    let fields: Vec<&str> = body["error"]["fields"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["field"].as_str().unwrap())
        .collect();
    assert!(
        fields.contains(&"pos") && fields.contains(&"spellings"),
        "{fields:?}"
    );

    // Arabic text in messages is sent unescaped
    let text = body["error"]["message"].as_str().unwrap();
    assert!(text.contains("كتاب"), "{text}");

    let (status, _) = s
        .post(
            "/lemmas",
            &json!({"spellings": ["كِتَابٌ"], "pos": "NOUN", "colour": "red"}),
        )
        .await;
    assert_eq!(status, 400);
}

#[tokio::test]
async fn failed_mutations_leave_state_unchanged() {
    let mut store = yawmi_queue();
    store
        .review(
            CorrespondenceId(0),
            lemmalink_core::Decision::Confirm(lemmalink_core::RelationCode::R1),
            "A1",
            false,
        )
        .unwrap();
    let s = Server::with_store(store).await;
    let before = fingerprint(&s.app.snapshot());
    let failing: Vec<(&str, Value)> = vec![
        (
            "/mappings/0/decision",
            json!({"relation": "R3", "reviewer": "A2"}),
        ),
        (
            "/mappings/0/decision",
            json!({"relation": "R9", "reviewer": "A2"}),
        ),
        (
            "/mappings/1/decision",
            json!({"relation": "R1", "reviewer": " "}),
        ),
        (
            "/mappings/1/decision",
            json!({"relation": "R1", "reject": true, "reviewer": "A2"}),
        ),
        (
            "/mappings/77/decision",
            json!({"reject": true, "reviewer": "A2"}),
        ),
        (
            "/mappings",
            json!({"l1": "modern:m1", "l2": "ghani:g1", "relation": "R1", "reviewer": "A2"}),
        ),
        (
            "/mappings",
            json!({"l1": "modern:m1", "l2": "modern:m1", "relation": "R1", "reviewer": "A2"}),
        ),
        ("/lemmas", json!({"spellings": ["يَوْم"], "pos": "NOUN"})),
        ("/lemmas", json!({"spellings": [], "pos": "NOUN"})),
    ];
    for (path, body) in &failing {
        let (status, reply) = s.post(path, body).await;
        assert!((400..500).contains(&status), "{path} {body} -> {status}");
        assert_schema("error", &reply);
        assert_eq!(fingerprint(&s.app.snapshot()), before, "{path} {body}");
    }
    let r = s
        .client
        .post(s.url("/mappings/1/decision"))
        .header("content-type", "application/json")
        .body("{not json")
        .send()
        .await
        .unwrap();
    assert_eq!(r.status().as_u16(), 400);
    assert_eq!(fingerprint(&s.app.snapshot()), before);
}

#[tokio::test]
async fn get_endpoints_do_not_change_state() {
    let s = Server::with_store(linked_store()).await;
    let before = fingerprint(&s.app.snapshot());
    for path in [
        "/lemmas?q=كتب",
        "/lexicons",
        "/mappings",
        "/stats/coverage",
        "/stats/relations",
        "/stats/iaa",
        "/stats/corpora",
    ] {
        let (first_status, first) = s.get(path).await;
        let (_, second) = s.get(path).await;
        assert_eq!(first_status, 200, "{path}");
        assert_eq!(first, second, "{path}");
    }
    assert_eq!(fingerprint(&s.app.snapshot()), before);
}

#[tokio::test]
async fn stats_payloads_match_schemas() {
    let s = Server::with_store(linked_store()).await;
    let (_, lexicons) = s.get("/lexicons").await;
    assert_schema("lexicons", &lexicons);
    assert_eq!(lexicons["items"].as_array().unwrap().len(), 2);

    let (_, coverage) = s.get("/stats/coverage").await;
    assert_schema("coverage", &coverage);
    assert_eq!(coverage["sources"], json!(["sama_small", "qabas"]));
    assert_eq!(coverage["total"], json!([4, 5]));
    let groups: Vec<&str> = coverage["groups"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g["category"].as_str().unwrap())
        .collect();
    assert_eq!(groups, ["NOMINAL", "VERB", "FUNCTIONAL"]);

    let (_, scoped) = s.get("/stats/coverage?sources=sama_small").await;
    assert_eq!(scoped["total"], json!([4, 5]));

    let (_, corpora) = s.get("/stats/corpora").await;
    assert_schema("corpora", &corpora);
    assert_eq!(
        corpora["rows"][0]["tokens"],
        json!({"mapped": 0, "total": 10})
    );

    let (status, body) = s.get("/stats/nothing").await;
    assert_eq!(status, 404);
    assert_schema("error", &body);
    let (status, _) = s.get("/stats/relations?scope=a,b,c").await;
    assert_eq!(status, 400);
}

#[tokio::test]
async fn relations_report_published_counts() {
    let dir = tempfile::tempdir().unwrap();
    let written = common::write_published_relations(dir.path());
    let data = DataDir::open(dir.path()).unwrap();
    let store = data.load(RelationWeights::default()).unwrap();
    let s = Server::with_store(store).await;
    let (status, body) = s.get("/stats/relations").await;
    assert_eq!(status, 200);
    assert_schema("relations", &body);
    assert_eq!(written, 256_040);
    assert_eq!(body["total"], 256_040);
    assert_eq!(
        body["counts"],
        json!({"R1": 248882, "R2": 3010, "R3": 74, "R4": 1784, "R5": 372, "R6": 1918,
               "X1": 0, "X2": 0, "X3": 0, "X4": 0, "X5": 0})
    );
}

#[tokio::test]
async fn bearer_token_guards_every_route() {
    let app = AppState::new(yawmi_queue(), None, Some("s3cret".into()));
    let s = Server::start(app).await;
    let r = s.client.get(s.url("/lemmas")).send().await.unwrap();
    assert_eq!(r.status().as_u16(), 401);
    let body: Value = r.json().await.unwrap();
    assert_schema("error", &body);
    let r = s
        .client
        .post(s.url("/mappings/0/decision"))
        .bearer_auth("wrong")
        .json(&json!({"relation": "R1", "reviewer": "A1"}))
        .send()
        .await
        .unwrap();
    assert_eq!(r.status().as_u16(), 401);
    assert_eq!(
        s.app
            .snapshot()
            .mappings()
            .get(CorrespondenceId(0))
            .unwrap()
            .status,
        Status::Auto
    );
    let r = s
        .client
        .get(s.url("/lemmas"))
        .bearer_auth("s3cret")
        .send()
        .await
        .unwrap();
    assert_eq!(r.status().as_u16(), 200);
}

#[tokio::test]
async fn decisions_are_journaled_before_the_reply() {
    let dir = tempfile::tempdir().unwrap();
    {
        let data = DataDir::open(dir.path()).unwrap();
        data.save(&yawmi_queue()).unwrap();
    }
    let data = DataDir::open(dir.path()).unwrap();
    let store = data.load(RelationWeights::default()).unwrap();
    let s = Server::start(AppState::new(store, Some(data), None)).await;
    let (status, _) = s
        .post(
            "/mappings/1/decision",
            &json!({"relation": "R4", "reviewer": "A2"}),
        )
        .await;
    assert_eq!(status, 200);
    let journal = std::fs::read_to_string(dir.path().join("journal.jsonl")).unwrap();
    assert_eq!(journal.lines().count(), 1);
    let (status, _) = s
        .post(
            "/lemmas",
            &json!({"spellings": ["يَوْمٌ"], "pos": "NOUN", "singulars": ["يَوْمٌ"]}),
        )
        .await;
    assert_eq!(status, 201);
    let (status, _) = s
        .post(
            "/mappings/1/decision",
            &json!({"relation": "R4", "reviewer": "A2"}),
        )
        .await;
    assert_eq!(status, 409);
    let journal = std::fs::read_to_string(dir.path().join("journal.jsonl")).unwrap();
    assert_eq!(
        journal.lines().count(),
        2,
        "failed requests are not journaled"
    );

    let expected = fingerprint(&s.app.snapshot());
    drop(s.stop().await);
    let data = DataDir::open(dir.path()).unwrap();
    let reloaded = data.load(RelationWeights::default()).unwrap();
    assert_eq!(fingerprint(&reloaded), expected);
    assert_eq!(
        reloaded.mappings().get(CorrespondenceId(1)).unwrap().status,
        Status::Confirmed
    );
}
