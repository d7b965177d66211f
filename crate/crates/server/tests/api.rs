use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use fuzzyvis_server::api::router;
use fuzzyvis_server::registry::Registry;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const TREE_OBO: &str = include_str!("../../../fixtures/tree.obo");
const TREE_JSON: &str = include_str!("../../../fixtures/tree.json");

struct Reply {
    status: StatusCode,
    bytes: Vec<u8>,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_slice(&self.bytes).expect("JSON body")
    }
}

async fn send(app: &Router, method: &str, uri: &str, body: Option<Value>, headers: &[(&str, &str)]) -> Reply {
    let mut request = Request::builder().method(method).uri(uri);
    for (k, v) in headers {
        request = request.header(*k, *v);
    }
    let request = match body {
        Some(b) => request
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => request.body(Body::empty()),
    }
    .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply { status, bytes }
}

async fn get(app: &Router, uri: &str) -> Reply {
    send(app, "GET", uri, None, &[]).await
}

async fn post(app: &Router, uri: &str, body: Value) -> Reply {
    send(app, "POST", uri, Some(body), &[]).await
}

fn app() -> Router {
    router(Arc::new(Registry::new()))
}

async fn wait_for_job(app: &Router, job: &str) -> Value {
    for _ in 0..500 {
        let status = get(app, &format!("/jobs/{job}")).await.json();
        if status["state"] == "done" || status["state"] == "failed" {
            return status;
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    panic!("job {job} did not finish");
}

/// Fixture instance with a generated embedding; returns the instance id.
async fn fixture_instance(app: &Router, family: &str, dim: usize) -> String {
    let created = post(
        app,
        "/instances",
        json!({
            "ontology": TREE_OBO,
            "format": "obo",
            "family": family,
            "embedding": {"generate": {"alpha": 0.5, "dim": dim, "seed": 7}},
        }),
    )
    .await;
    assert_eq!(
        created.status,
        StatusCode::CREATED,
        "{}",
        String::from_utf8_lossy(&created.bytes)
    );
    let body = created.json();
    assert_eq!(body["job"]["state"], "queued");
    assert_eq!(body["instance"]["embedding"]["state"], "pending");
    let job = wait_for_job(app, body["job"]["id"].as_str().unwrap()).await;
    assert_eq!(job["state"], "done", "{job}");
    body["instance"]["id"].as_str().unwrap().to_owned()
}

fn assert_error(reply: &Reply, status: StatusCode, code: &str) -> Value {
    assert_eq!(reply.status, status, "{}", String::from_utf8_lossy(&reply.bytes));
    let body = reply.json();
    assert_eq!(body["error"]["code"], code, "{body}");
    assert!(body["error"]["message"].as_str().is_some_and(|m| !m.is_empty()));
    body
}

#[tokio::test]
async fn fixture_pipeline_builds_a_six_vector_index() {
    let app = app();
    let id = fixture_instance(&app, "product", 1).await;
    let summary = get(&app, &format!("/instances/{id}")).await.json();
    assert_eq!(summary["concepts"], 6);
    assert_eq!(summary["obsolete_dropped"], 1);
    assert_eq!(summary["embedding"]["state"], "ready");
    assert_eq!(summary["embedding"]["vectors"], 6);
    assert_eq!(summary["embedding"]["dim"], 1);
    assert_eq!(summary["embedding"]["alpha"], 0.5);
    assert_eq!(summary["embedding"]["seed"], 7);
}

#[tokio::test]
async fn concept_details_carry_metadata() {
    let app = app();
    let id = fixture_instance(&app, "product", 4).await;
    let r = get(&app, &format!("/instances/{id}/concepts/R")).await;
    assert_eq!(r.status, StatusCode::OK);
    let body = r.json();
    assert_eq!(body["parents"], json!([]));
    assert_eq!(body["children"], json!(["A", "B"]));
    // R, A, B, L1, L2, L3: the concept counts itself
    assert_eq!(body["metadata"]["subtree_size"], 6);
    assert_eq!(body["metadata"]["depth"], 0);
    assert_eq!(body["has_embedding"], true);

    let a = get(&app, &format!("/instances/{id}/concepts/A")).await.json();
    assert_eq!(a["definition"], "First branch; two leaves.");
    assert_eq!(a["metadata"]["subtree_size"], 3);

    assert_error(
        &get(&app, &format!("/instances/{id}/concepts/NOPE")).await,
        StatusCode::NOT_FOUND,
        "unknown_concept",
    );
    assert_error(
        &get(&app, &format!("/instances/{id}/concepts/OLD")).await,
        StatusCode::NOT_FOUND,
        "unknown_concept",
    );
    assert_error(
        &get(&app, "/instances/i999/concepts/R").await,
        StatusCode::NOT_FOUND,
        "unknown_instance",
    );
    assert_error(
        &get(&app, "/instances/bogus/concepts/R").await,
        StatusCode::NOT_FOUND,
        "unknown_instance",
    );
}

#[tokio::test]
async fn search_ranks_and_limits() {
    let app = app();
    let id = fixture_instance(&app, "product", 2).await;
    let body = get(&app, &format!("/instances/{id}/search?q=leaf")).await.json();
    let ids: Vec<&str> = body["hits"]
        .as_array()
        .unwrap()
        .iter()
        .map(|h| h["id"].as_str().unwrap())
        .collect();
    // equal match position; shorter labels first, then id
    assert_eq!(ids, ["L1", "L2", "L3"]);
    assert_eq!(body["hits"][0]["depth"], 2);
    assert_eq!(body["hits"][0]["subtree_size"], 1);

    // "beta group" matches earlier than "alpha group"
    let one = get(&app, &format!("/instances/{id}/search?q=GROUP&limit=1"))
        .await
        .json();
    assert_eq!(one["hits"].as_array().unwrap().len(), 1);
    assert_eq!(one["hits"][0]["id"], "B");

    assert_error(
        &get(&app, &format!("/instances/{id}/search?q=")).await,
        StatusCode::BAD_REQUEST,
        "empty_query",
    );
    assert_error(
        &get(&app, &format!("/instances/{id}/search?q=%20%20")).await,
        StatusCode::BAD_REQUEST,
        "empty_query",
    );
    assert_error(
        &get(&app, &format!("/instances/{id}/search?q=a&limit=0")).await,
        StatusCode::BAD_REQUEST,
        "invalid_params",
    );
    assert_error(
        &get(&app, &format!("/instances/{id}/search?q=a&limit=x")).await,
        StatusCode::BAD_REQUEST,
        "invalid_params",
    );
}

#[tokio::test]
async fn neighborhood_views() {
    let app = app();
    let id = fixture_instance(&app, "product", 2).await;
    let body = get(&app, &format!("/instances/{id}/neighborhood/R?depth=2"))
        .await
        .json();
    assert_eq!(body["nodes"].as_array().unwrap().len(), 6);
    assert_eq!(body["edges"].as_array().unwrap().len(), 5);
    assert_eq!(body["nodes"][0]["id"], "A");
    assert_eq!(body["nodes"][0]["relation"], "descendant");

    let body = get(&app, &format!("/instances/{id}/neighborhood/R?depth=1"))
        .await
        .json();
    let ids: Vec<&str> = body["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|n| n["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["A", "B", "R"]);

    let body = get(&app, &format!("/instances/{id}/neighborhood/L2?depth=0"))
        .await
        .json();
    let nodes: Vec<(&str, &str)> = body["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|n| (n["id"].as_str().unwrap(), n["relation"].as_str().unwrap()))
        .collect();
    assert_eq!(nodes, [("A", "ancestor"), ("L2", "focus"), ("R", "ancestor")]);
    assert_eq!(
        body["edges"],
        json!([{"parent": "A", "child": "L2"}, {"parent": "R", "child": "A"}])
    );
    // metadata comes from the full graph
    assert_eq!(body["nodes"][2]["subtree_size"], 6);

    assert_error(
        &get(&app, &format!("/instances/{id}/neighborhood/ZZ")).await,
        StatusCode::NOT_FOUND,
        "unknown_concept",
    );
}

#[tokio::test]
async fn query_by_ast_and_expression() {
    let app = app();
    // at dim 1 every nonzero vector has cosine 1
    let id = fixture_instance(&app, "product", 16).await;
    let uri = format!("/instances/{id}/query?k=1");
    let r = post(&app, &uri, json!({"ast": {"op": "ref", "id": "L1"}})).await;
    assert_eq!(r.status, StatusCode::OK);
    let body = r.json();
    assert_eq!(body["hits"][0]["id"], "L1");
    assert_eq!(body["hits"][0]["score"], 1.0);
    assert_eq!(body["echo"], "L1");

    let r = post(
        &app,
        &format!("/instances/{id}/query?k=3"),
        json!({"expr": "\"leaf one\" AND NOT L3"}),
    )
    .await;
    let body = r.json();
    assert_eq!(r.status, StatusCode::OK, "{body}");
    assert_eq!(body["echo"], "L1 AND NOT L3");
    assert_eq!(
        body["ast"],
        json!({"op": "and", "children": [{"op": "ref", "id": "L1"}, {"op": "not", "children": [{"op": "ref", "id": "L3"}]}]})
    );
    assert_eq!(body["hits"].as_array().unwrap().len(), 3);
    assert_eq!(body["family"], "product");
    assert!(body["hits"][0]["label"].is_string());
}

#[tokio::test]
async fn query_errors() {
    let app = app();
    let id = fixture_instance(&app, "product", 2).await;
    let uri = format!("/instances/{id}/query");

    let body = assert_error(
        &post(&app, &uri, json!({"expr": "\"leaf on\" AND L2"})).await,
        StatusCode::UNPROCESSABLE_ENTITY,
        "unknown_concept",
    );
    let suggestions = body["error"]["details"]["suggestions"].as_array().unwrap();
    assert!(!suggestions.is_empty() && suggestions.len() <= 5);
    assert_eq!(suggestions[0]["id"], "L1");
    assert_eq!(body["error"]["details"]["position"], 0);

    let body = assert_error(
        &post(&app, &uri, json!({"expr": "L1 AND"})).await,
        StatusCode::UNPROCESSABLE_ENTITY,
        "query_syntax",
    );
    assert_eq!(body["error"]["details"]["position"], 6);

    assert_error(
        &post(
            &app,
            &uri,
            json!({"ast": {"op": "and", "children": [{"op": "ref", "id": "L1"}]}}),
        )
        .await,
        StatusCode::UNPROCESSABLE_ENTITY,
        "invalid_ast",
    );
    assert_error(
        &post(&app, &uri, json!({"ast": {"op": "ref", "id": "NOPE"}})).await,
        StatusCode::UNPROCESSABLE_ENTITY,
        "unknown_concept",
    );
    assert_error(
        &post(&app, &uri, json!({})).await,
        StatusCode::BAD_REQUEST,
        "invalid_params",
    );
    assert_error(
        &post(&app, &uri, json!({"expr": "L1", "ast": {}})).await,
        StatusCode::BAD_REQUEST,
        "invalid_params",
    );
    assert_error(
        &post(&app, &format!("{uri}?k=0"), json!({"expr": "L1"})).await,
        StatusCode::BAD_REQUEST,
        "invalid_params",
    );
    assert_error(
        &post(&app, &format!("{uri}?k=201"), json!({"expr": "L1"})).await,
        StatusCode::BAD_REQUEST,
        "invalid_params",
    );
    assert!(post(&app, &format!("{uri}?k=200"), json!({"expr": "L1"}))
        .await
        .status
        .is_success());
    assert_error(
        &send(
            &app,
            "POST",
            &uri,
            Some(json!({"expr": "L1"})),
            &[("x-fuzzy-family", "fancy")],
        )
        .await,
        StatusCode::BAD_REQUEST,
        "invalid_params",
    );
    let raw = app
        .clone()
        .oneshot(
            Request::post(&uri)
                .header("content-type", "application/json")
                .body(Body::from("{not json"))
                .unwrap(),
        )
        .await
        .unwrap();
    assert_eq!(raw.status(), StatusCode::BAD_REQUEST);
    let bytes = raw.into_body().collect().await.unwrap().to_bytes();
    let body: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(body["error"]["code"], "invalid_body");
}

#[tokio::test]
async fn lukasiewicz_contradiction_sets_zero_query() {
    let app = app();
    let id = fixture_instance(&app, "lukasiewicz", 4).await;
    let uri = format!("/instances/{id}/query?k=6");
    let body = post(&app, &uri, json!({"expr": "L2 AND NOT L2"})).await.json();
    assert_eq!(body["zero_query"], true);
    assert!(body["hits"].as_array().unwrap().iter().all(|h| h["score"] == 0.0));
    let ids: Vec<&str> = body["hits"]
        .as_array()
        .unwrap()
        .iter()
        .map(|h| h["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["A", "B", "L1", "L2", "L3", "R"]);

    // per-request override of the instance family
    let r = send(
        &app,
        "POST",
        &uri,
        Some(json!({"expr": "L2 AND NOT L2"})),
        &[("x-fuzzy-family", "product")],
    )
    .await;
    let body = r.json();
    assert_eq!(body["family"], "product");
    assert_eq!(body["zero_query"], false);
}

#[tokio::test]
async fn no_embedding_is_a_conflict() {
    let app = app();
    let created = post(&app, "/instances", json!({"ontology": TREE_JSON, "format": "json"})).await;
    assert_eq!(created.status, StatusCode::CREATED);
    let body = created.json();
    assert_eq!(body["job"], Value::Null);
    assert_eq!(body["instance"]["embedding"]["state"], "absent");
    let id = body["instance"]["id"].as_str().unwrap();
    let r = post(&app, &format!("/instances/{id}/query"), json!({"expr": "L1"})).await;
    let body = assert_error(&r, StatusCode::CONFLICT, "no_embedding");
    assert_eq!(body["error"]["details"]["embedding"], "absent");
    // browsing still works
    assert_eq!(
        get(&app, &format!("/instances/{id}/concepts/L1")).await.json()["has_embedding"],
        false
    );
}

#[tokio::test]
async fn upload_embedding() {
    let app = app();
    let file = "#fuzzyvis-embedding v1 dim=2 source=imported family=goedel\n\
                R\t1.0,1.0\nA\t1.0,0.5\nB\t0.5,1.0\nL1\t1.0000004,0.25\nL2\t0.25,0.5\nL3\t0.5,0.9\nGHOST\t0.1,0.1\n";
    let created = post(
        &app,
        "/instances",
        json!({"ontology": TREE_OBO, "embedding": {"upload": file}}),
    )
    .await;
    let body = created.json();
    assert_eq!(created.status, StatusCode::CREATED, "{body}");
    assert_eq!(body["instance"]["family"], "goedel");
    assert_eq!(body["instance"]["embedding"]["vectors"], 6);
    assert_eq!(body["warnings"].as_array().unwrap().len(), 2);
    let id = body["instance"]["id"].as_str().unwrap();
    let hit = post(&app, &format!("/instances/{id}/query?k=1"), json!({"expr": "L3"}))
        .await
        .json();
    assert_eq!(hit["hits"][0]["id"], "L3");

    let bad = "#fuzzyvis-embedding v1 dim=3 family=product\nR\t1.0,1.0,1.0\nA\t1.0,0.5\n";
    let body = assert_error(
        &post(
            &app,
            "/instances",
            json!({"ontology": TREE_OBO, "embedding": {"upload": bad}}),
        )
        .await,
        StatusCode::UNPROCESSABLE_ENTITY,
        "dim_mismatch_across_rows",
    );
    assert_eq!(body["error"]["details"]["line"], 3);
}

#[tokio::test]
async fn creation_errors() {
    let app = app();
    let cyclic = "[Term]\nid: A\nis_a: B\n\n[Term]\nid: B\nis_a: A\n";
    let body = assert_error(
        &post(&app, "/instances", json!({"ontology": cyclic})).await,
        StatusCode::UNPROCESSABLE_ENTITY,
        "ontology_parse_error",
    );
    assert_eq!(body["error"]["details"]["cycle"], json!(["A", "B"]));

    let dangling = "[Term]\nid: A\nis_a: Z\n";
    let body = assert_error(
        &post(&app, "/instances", json!({"ontology": dangling})).await,
        StatusCode::UNPROCESSABLE_ENTITY,
        "ontology_parse_error",
    );
    // the stanza's id line
    assert_eq!(body["error"]["details"]["line"], 2);

    assert_error(
        &post(&app, "/instances", json!({"ontology": TREE_OBO, "format": "owl"})).await,
        StatusCode::BAD_REQUEST,
        "unsupported_format",
    );
    assert_error(
        &post(&app, "/instances", json!({"ontology": TREE_OBO, "family": "fancy"})).await,
        StatusCode::BAD_REQUEST,
        "invalid_params",
    );
    assert_error(
        &post(
            &app,
            "/instances",
            json!({"ontology": TREE_OBO, "embedding": {"generate": {"alpha": 1.0, "dim": 4, "seed": 1}}}),
        )
        .await,
        StatusCode::BAD_REQUEST,
        "invalid_params",
    );
    assert_error(
        &post(
            &app,
            "/instances",
            json!({"ontology": TREE_OBO, "embedding": {"generate": {"alpha": 0.5, "dim": 100_000_000, "seed": 1}}}),
        )
        .await,
        StatusCode::BAD_REQUEST,
        "invalid_params",
    );
    assert_error(
        &post(&app, "/instances", json!({"ontology": TREE_OBO, "extra": 1})).await,
        StatusCode::UNPROCESSABLE_ENTITY,
        "invalid_body",
    );
    assert_error(&get(&app, "/jobs/j42").await, StatusCode::NOT_FOUND, "unknown_job");
    assert_error(&get(&app, "/nowhere").await, StatusCode::NOT_FOUND, "not_found");
    // nothing was registered by the failed calls
    assert_eq!(get(&app, "/instances").await.json(), json!([]));
}

#[tokio::test]
async fn identical_requests_give_identical_bytes() {
    let app = app();
    let id = fixture_instance(&app, "product", 16).await;
    let requests = [
        format!("/instances/{id}"),
        format!("/instances/{id}/concepts/A"),
        format!("/instances/{id}/search?q=e"),
        format!("/instances/{id}/neighborhood/A?depth=3"),
        "/instances".to_owned(),
    ];
    for uri in &requests {
        assert_eq!(get(&app, uri).await.bytes, get(&app, uri).await.bytes, "{uri}");
    }
    let q = json!({"expr": "(L1 OR L3) AND NOT L2"});
    let a = post(&app, &format!("/instances/{id}/query?k=6"), q.clone()).await;
    let b = post(&app, &format!("/instances/{id}/query?k=6"), q).await;
    assert_eq!(a.status, StatusCode::OK);
    assert_eq!(a.bytes, b.bytes);
}

#[tokio::test]
async fn instances_are_isolated() {
    let app = app();
    let first = fixture_instance(&app, "lukasiewicz", 8).await;
    let other_ontology = json!({"concepts": [
        {"id": "X", "label": "x root", "parents": []},
        {"id": "Y", "label": "leaf one", "parents": ["X"]},
    ]})
    .to_string();
    let created = post(
        &app,
        "/instances",
        json!({"ontology": other_ontology, "format": "json", "family": "goedel", "embedding": {"generate": {"alpha": 0.5, "dim": 8, "seed": 7}}}),
    )
    .await
    .json();
    let second = created["instance"]["id"].as_str().unwrap().to_owned();
    assert_ne!(first, second);
    wait_for_job(&app, created["job"]["id"].as_str().unwrap()).await;

    let before = post(
        &app,
        &format!("/instances/{first}/query?k=6"),
        json!({"expr": "\"leaf one\" OR L3"}),
    )
    .await;
    // interleave reads and queries on the second instance
    assert_error(
        &get(&app, &format!("/instances/{second}/concepts/L1")).await,
        StatusCode::NOT_FOUND,
        "unknown_concept",
    );
    let other = post(
        &app,
        &format!("/instances/{second}/query?k=6"),
        json!({"expr": "\"leaf one\""}),
    )
    .await
    .json();
    assert_eq!(other["family"], "goedel");
    let ids: Vec<&str> = other["hits"]
        .as_array()
        .unwrap()
        .iter()
        .map(|h| h["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["X", "Y"]);
    let search = get(&app, &format!("/instances/{second}/search?q=leaf")).await.json();
    assert_eq!(search["hits"].as_array().unwrap().len(), 1);
    let after = post(
        &app,
        &format!("/instances/{first}/query?k=6"),
        json!({"expr": "\"leaf one\" OR L3"}),
    )
    .await;
    assert_eq!(before.bytes, after.bytes);
    assert_eq!(before.json()["family"], "lukasiewicz");

    let listed = get(&app, "/instances").await.json();
    let ids: Vec<&str> = listed
        .as_array()
        .unwrap()
        .iter()
        .map(|i| i["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, [first.as_str(), second.as_str()]);
}

#[tokio::test]
async fn snapshots_are_written_on_publish() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(Registry::with_snapshots(dir.path().to_path_buf())));
    let id = fixture_instance(&app, "product", 3).await;
    let ontology = std::fs::read_to_string(dir.path().join(format!("{id}.ontology.json"))).unwrap();
    let graph = fuzzyvis_core::ontology::parse_json(&ontology).unwrap();
    assert_eq!(graph.len(), 6);
    let embedding = std::fs::read_to_string(dir.path().join(format!("{id}.embedding.tsv"))).unwrap();
    let imported = fuzzyvis_core::format::import_embedding(&embedding, Some(&graph)).unwrap();
    assert_eq!(imported.matrix.dim(), 3);
    assert_eq!(imported.matrix.vector("B").unwrap(), &[0.0625; 3]);
}
