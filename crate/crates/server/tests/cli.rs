use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::time::{Duration, Instant};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn fuzzyvis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fuzzyvis"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("run fuzzyvis")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn embed_fixture(dir: &Path, family: &str) -> PathBuf {
    let path = dir.join(format!("tree.{family}.tsv"));
    let tree = fixture("tree.obo");
    let out = fuzzyvis(&[
        "embed",
        "--ontology",
        tree.to_str().unwrap(),
        "--alpha",
        "0.5",
        "--dim",
        "8",
        "--seed",
        "7",
        "--family",
        family,
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    path
}

#[test]
fn validate_reports_counts() {
    let out = fuzzyvis(&["validate", "--ontology", fixture("tree.obo").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out).trim(),
        "ok: 6 concepts, 1 roots, 3 leaves, 1 obsolete dropped"
    );

    let out = fuzzyvis(&["validate", "--ontology", fixture("tree.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out).trim(),
        "ok: 6 concepts, 1 roots, 3 leaves, 0 obsolete dropped"
    );
}

#[test]
fn embed_to_stdout_matches_fixture_values() {
    let tree = fixture("tree.obo");
    let out = fuzzyvis(&[
        "embed",
        "--ontology",
        tree.to_str().unwrap(),
        "--alpha",
        "0.5",
        "--dim",
        "1",
        "--seed",
        "7",
        "--out",
        "-",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    // seed 7 anchors column 0 at L1
    assert_eq!(
        stdout(&out),
        "#fuzzyvis-embedding v1 dim=1 source=generated alpha=0.5 seed=7 family=product\n\
         A\t1.0\nB\t0.0625\nL1\t1.0\nL2\t0.25\nL3\t0.0625\nR\t1.0\n"
    );
}

#[test]
fn query_prints_table_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let embedding = embed_fixture(dir.path(), "lukasiewicz");
    let tree = fixture("tree.obo");
    let base = [
        "query",
        "--ontology",
        tree.to_str().unwrap(),
        "--embedding",
        embedding.to_str().unwrap(),
    ];

    let out = fuzzyvis(&[&base[..], &["--expr", "L1", "--k", "2"]].concat());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "query: L1");
    assert!(lines[1].starts_with("  1  1.000000  L1  "), "{text}");
    assert_eq!(lines.len(), 3);

    let out = fuzzyvis(
        &[
            &base[..],
            &["--family", "lukasiewicz", "--expr", "L1 AND NOT L1", "--json"],
        ]
        .concat(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let body: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["zero_query"], true);
    assert_eq!(body["family"], "lukasiewicz");
    assert_eq!(body["hits"].as_array().unwrap().len(), 6);

    let out = fuzzyvis(&[&base[..], &["--family", "lukasiewicz", "--expr", "L1 AND NOT L1"]].concat());
    assert!(stdout(&out).contains("all zeros"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let tree = fixture("tree.obo");
    let tree = tree.to_str().unwrap();
    let embedding = embed_fixture(dir.path(), "product");
    let embedding = embedding.to_str().unwrap();

    assert_eq!(fuzzyvis(&["--help"]).status.code(), Some(0));
    assert_eq!(fuzzyvis(&[]).status.code(), Some(1));
    assert_eq!(fuzzyvis(&["frobnicate"]).status.code(), Some(1));
    let bad_alpha = fuzzyvis(&[
        "embed",
        "--ontology",
        tree,
        "--alpha",
        "1.5",
        "--dim",
        "2",
        "--out",
        "-",
    ]);
    assert_eq!(bad_alpha.status.code(), Some(1));
    assert!(stderr(&bad_alpha).contains("alpha"));
    let bad_family = fuzzyvis(&[
        "query",
        "--ontology",
        tree,
        "--embedding",
        embedding,
        "--expr",
        "L1",
        "--family",
        "x",
    ]);
    assert_eq!(bad_family.status.code(), Some(1));
    let zero_k = fuzzyvis(&[
        "query",
        "--ontology",
        tree,
        "--embedding",
        embedding,
        "--expr",
        "L1",
        "--k",
        "0",
    ]);
    assert_eq!(zero_k.status.code(), Some(1));

    let cyclic = dir.path().join("cyclic.obo");
    std::fs::write(&cyclic, "[Term]\nid: A\nis_a: B\n\n[Term]\nid: B\nis_a: A\n").unwrap();
    let out = fuzzyvis(&["validate", "--ontology", cyclic.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cycle"), "{}", stderr(&out));

    let typo = fuzzyvis(&[
        "query",
        "--ontology",
        tree,
        "--embedding",
        embedding,
        "--expr",
        "\"leaf on\"",
    ]);
    assert_eq!(typo.status.code(), Some(2));
    assert!(stderr(&typo).contains("did you mean"), "{}", stderr(&typo));
    assert!(stderr(&typo).contains("L1"));
    let syntax = fuzzyvis(&[
        "query",
        "--ontology",
        tree,
        "--embedding",
        embedding,
        "--expr",
        "L1 AND (",
    ]);
    assert_eq!(syntax.status.code(), Some(2));

    let ragged = dir.path().join("ragged.tsv");
    std::fs::write(
        &ragged,
        "#fuzzyvis-embedding v1 dim=2 family=product\nA\t1.0,0.5\nB\t0.5\n",
    )
    .unwrap();
    let out = fuzzyvis(&[
        "query",
        "--ontology",
        tree,
        "--embedding",
        ragged.to_str().unwrap(),
        "--expr",
        "A",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let missing = dir.path().join("missing.obo");
    assert_eq!(
        fuzzyvis(&["validate", "--ontology", missing.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
    let unwritable = dir.path().join("no/such/dir/out.tsv");
    let out = fuzzyvis(&[
        "embed",
        "--ontology",
        tree,
        "--alpha",
        "0.5",
        "--dim",
        "2",
        "--out",
        unwritable.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn http_get(port: u16, path: &str) -> Option<String> {
    let mut stream = TcpStream::connect(("127.0.0.1", port)).ok()?;
    write!(
        stream,
        "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n"
    )
    .ok()?;
    let mut response = String::new();
    stream.read_to_string(&mut response).ok()?;
    Some(response)
}

#[test]
fn serve_preloads_instances() {
    let dir = tempfile::tempdir().unwrap();
    let embedding = embed_fixture(dir.path(), "goedel");
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let preload_full = format!("{}:{}:goedel", fixture("tree.obo").display(), embedding.display());
    let preload_bare = format!("{}::product", fixture("tree.json").display());
    let _server = Server(
        Command::new(env!("CARGO_BIN_EXE_fuzzyvis"))
            .args([
                "serve",
                "--port",
                &port.to_string(),
                "--preload",
                &preload_full,
                "--preload",
                &preload_bare,
            ])
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .spawn()
            .unwrap(),
    );

    let deadline = Instant::now() + Duration::from_secs(20);
    let response = loop {
        if let Some(r) = http_get(port, "/instances") {
            break r;
        }
        assert!(Instant::now() < deadline, "server did not come up");
        std::thread::sleep(Duration::from_millis(50));
    };
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    let body = response.split("\r\n\r\n").nth(1).unwrap();
    let instances: serde_json::Value = serde_json::from_str(body).unwrap();
    assert_eq!(instances[0]["id"], "i1");
    assert_eq!(instances[0]["family"], "goedel");
    assert_eq!(instances[0]["embedding"]["state"], "ready");
    assert_eq!(instances[1]["embedding"]["state"], "absent");
}
