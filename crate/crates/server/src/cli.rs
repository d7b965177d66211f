//! `fuzzyvis` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 parse or validation failure,
//! 3 runtime failure (I/O, networking).

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use fuzzyvis_core::alpha::{generate, AlphaParams};
use fuzzyvis_core::format::export_embedding;
use fuzzyvis_core::query::{answer, parse_expression, QueryError};
use fuzzyvis_core::{FuzzyConfig, OntologyGraph, OperatorFamily, VectorIndex};
use thiserror::Error;

use crate::loader::{load_embedding, load_ontology, LoadError, OntologyFormat};
use crate::registry::{EmbeddingSource, InstanceSpec, Registry};
use crate::views::{ConceptSummary, QueryResponse};

#[derive(Debug, Parser)]
#[command(
    name = "fuzzyvis",
    version,
    about = "Fuzzy ontology embeddings and compositional concept queries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate an alpha-embedding for an ontology and write it to a file.
    Embed(EmbedArgs),
    /// Answer a query expression against an ontology and embedding.
    Query(QueryArgs),
    /// Parse and validate an ontology file.
    Validate(OntologyArgs),
    /// Run the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct OntologyArgs {
    #[arg(long, value_name = "FILE")]
    ontology: PathBuf,
    /// Defaults to the file extension (`.json` for JSON, otherwise OBO).
    #[arg(long, value_enum)]
    format: Option<OntologyFormat>,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    #[command(flatten)]
    ontology: OntologyArgs,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "product", value_parser = parse_family)]
    family: OperatorFamily,
    /// Output path; `-` writes to stdout.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[command(flatten)]
    ontology: OntologyArgs,
    #[arg(long, value_name = "FILE")]
    embedding: PathBuf,
    #[arg(long, default_value = "product", value_parser = parse_family)]
    family: OperatorFamily,
    #[arg(long)]
    expr: String,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Print the same JSON body the HTTP API returns.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// `ONTOLOGY:EMBEDDING:FAMILY`; leave EMBEDDING empty to load the
    /// ontology alone. Repeatable.
    #[arg(long, value_name = "SPEC")]
    preload: Vec<String>,
    /// Write each published instance's ontology and embedding here.
    #[arg(long, value_name = "DIR")]
    snapshot_dir: Option<PathBuf>,
}

fn parse_family(text: &str) -> Result<OperatorFamily, String> {
    text.parse()
        .map_err(|e: fuzzyvis_core::fuzzy::FuzzyError| e.to_string())
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Invalid(_) => 2,
            Self::Runtime(_) => 3,
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io { .. } => Self::Runtime(e.to_string()),
            LoadError::UnsupportedFormat(_) => Self::Usage(e.to_string()),
            LoadError::Ontology(_) | LoadError::Embedding(_) => Self::Invalid(e.to_string()),
        }
    }
}

fn describe_query_error(e: &QueryError) -> String {
    match e {
        QueryError::UnknownConcept { suggestions, .. } if !suggestions.is_empty() => {
            let names: Vec<String> = suggestions.iter().map(|s| format!("{} ({})", s.label, s.id)).collect();
            format!("{e}; did you mean: {}", names.join(", "))
        }
        QueryError::AmbiguousLabel { candidates, .. } => {
            let ids: Vec<&str> = candidates.iter().map(|c| c.as_str()).collect();
            format!("{e}: {}", ids.join(", "))
        }
        _ => e.to_string(),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Embed(args) => embed(args),
        Command::Query(args) => query(args),
        Command::Validate(args) => validate(args),
        Command::Serve(args) => serve(args),
    }
}

fn load(args: &OntologyArgs) -> Result<OntologyGraph, CliError> {
    Ok(load_ontology(&args.ontology, args.format)?)
}

fn embed(args: EmbedArgs) -> Result<(), CliError> {
    let params = AlphaParams::new(args.alpha, args.dim, args.seed).map_err(|e| CliError::Usage(e.to_string()))?;
    let graph = load(&args.ontology)?;
    let matrix =
        generate(&graph, &params, &FuzzyConfig::new(args.family)).map_err(|e| CliError::Invalid(e.to_string()))?;
    let io_error = |e: std::io::Error| CliError::Runtime(format!("{}: {e}", args.out.display()));
    if args.out == Path::new("-") {
        export_embedding(&matrix, std::io::stdout().lock()).map_err(io_error)?;
    } else {
        let file = std::fs::File::create(&args.out).map_err(io_error)?;
        export_embedding(&matrix, std::io::BufWriter::new(file)).map_err(io_error)?;
    }
    log::info!("wrote {} x {} embedding", matrix.len(), matrix.dim());
    Ok(())
}

fn query(args: QueryArgs) -> Result<(), CliError> {
    if args.k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let graph = load(&args.ontology)?;
    let imported = load_embedding(&args.embedding, &graph)?;
    for w in &imported.warnings {
        eprintln!("warning: {w}");
    }
    let index = VectorIndex::build(Arc::new(imported.matrix)).map_err(|e| CliError::Invalid(e.to_string()))?;
    let node = parse_expression(&args.expr, &graph).map_err(|e| CliError::Invalid(describe_query_error(&e)))?;
    let result = answer(&node, &index, &FuzzyConfig::new(args.family), args.k)
        .map_err(|e| CliError::Invalid(describe_query_error(&e)))?;

    let metadata = fuzzyvis_core::ontology::metadata_table(&graph);
    let response = QueryResponse::new(result, node.to_json(), args.family, args.k, |id| {
        let i = graph.index_of(id.as_str()).expect("import keeps graph concepts only");
        ConceptSummary::new(graph.record_at(i), &metadata[i])
    });

    let mut out = std::io::stdout().lock();
    let written = if args.json {
        serde_json::to_writer_pretty(&mut out, &response)
            .map_err(std::io::Error::other)
            .and_then(|()| writeln!(out))
    } else {
        print_table(&mut out, &response)
    };
    written.map_err(|e| CliError::Runtime(e.to_string()))
}

fn print_table(out: &mut impl Write, response: &QueryResponse) -> std::io::Result<()> {
    writeln!(out, "query: {}", response.echo)?;
    if response.zero_query {
        writeln!(out, "note: the query vector is all zeros, so every score is 0")?;
    }
    for (rank, hit) in response.hits.iter().enumerate() {
        writeln!(
            out,
            "{:>3}  {:.6}  {}  {}",
            rank + 1,
            hit.score,
            hit.concept.id,
            hit.concept.label
        )?;
    }
    Ok(())
}

fn validate(args: OntologyArgs) -> Result<(), CliError> {
    let graph = load(&args)?;
    println!(
        "ok: {} concepts, {} roots, {} leaves, {} obsolete dropped",
        graph.len(),
        graph.root_indices().len(),
        graph.leaf_indices().len(),
        graph.obsolete().len()
    );
    Ok(())
}

struct Preload {
    ontology: PathBuf,
    embedding: Option<PathBuf>,
    family: OperatorFamily,
}

fn parse_preload(spec: &str) -> Result<Preload, CliError> {
    // split from the right so Windows-style drive letters survive
    let mut parts = spec.rsplitn(3, ':');
    let (Some(family), Some(embedding), Some(ontology)) = (parts.next(), parts.next(), parts.next()) else {
        return Err(CliError::Usage(format!(
            "--preload expects ONTOLOGY:EMBEDDING:FAMILY, got {spec:?}"
        )));
    };
    Ok(Preload {
        ontology: ontology.into(),
        embedding: (!embedding.is_empty()).then(|| embedding.into()),
        family: parse_family(family).map_err(CliError::Usage)?,
    })
}

fn serve(args: ServeArgs) -> Result<(), CliError> {
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .map_err(|e| CliError::Usage(format!("invalid address: {e}")))?;
    let preloads = args
        .preload
        .iter()
        .map(|s| parse_preload(s))
        .collect::<Result<Vec<_>, _>>()?;
    let registry = Arc::new(match args.snapshot_dir {
        Some(dir) => Registry::with_snapshots(dir),
        None => Registry::new(),
    });
    for p in preloads {
        let graph = load_ontology(&p.ontology, None)?;
        let embedding = match &p.embedding {
            None => EmbeddingSource::None,
            Some(path) => {
                let imported = load_embedding(path, &graph)?;
                for w in &imported.warnings {
                    log::warn!("{}: {w}", path.display());
                }
                EmbeddingSource::Matrix(imported.matrix)
            }
        };
        let created = registry
            .create(InstanceSpec {
                name: p
                    .ontology
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                graph,
                config: FuzzyConfig::new(p.family),
                embedding,
            })
            .map_err(|e| CliError::Invalid(e.to_string()))?;
        log::info!("preloaded {} as {}", p.ontology.display(), created.instance.id);
    }

    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Runtime(e.to_string()))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::Runtime(format!("bind {addr}: {e}")))?;
        log::info!("listening on http://{addr}");
        axum::serve(listener, crate::api::router(registry))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::Runtime(e.to_string()))
    })
}
