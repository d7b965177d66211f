//! In-memory store of ontology instances and embedding-generation jobs.
//!
//! Instances are immutable once published. Finishing a generation job
//! builds a new [`Instance`] and swaps it in, so readers holding the old
//! `Arc` never observe a half-built index.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use fuzzyvis_core::alpha::{generate, AlphaError, AlphaParams};
use fuzzyvis_core::format::export_embedding;
use fuzzyvis_core::ontology::{metadata_table, to_json, ConceptMetadata};
use fuzzyvis_core::store::StoreError;
use fuzzyvis_core::{EmbeddingMatrix, FuzzyConfig, OntologyGraph, VectorIndex};
use serde::Serialize;
use thiserror::Error;

use crate::views::ConceptSummary;

/// Upper bound on `concepts * dim` for generated matrices (8 bytes each).
pub const MAX_MATRIX_ENTRIES: usize = 64 * 1024 * 1024;

macro_rules! token_id {
    ($name:ident, $prefix:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(u64);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }

        impl FromStr for $name {
            type Err = ();

            fn from_str(s: &str) -> Result<Self, ()> {
                s.strip_prefix($prefix)
                    .filter(|digits| !digits.starts_with('0') || *digits == "0")
                    .and_then(|digits| digits.parse().ok())
                    .map(Self)
                    .ok_or(())
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }
    };
}

token_id!(InstanceId, "i");
token_id!(JobId, "j");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
}

impl JobState {
    pub fn is_terminal(self) -> bool {
        matches!(self, Self::Done | Self::Failed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JobStatus {
    pub id: JobId,
    pub instance: InstanceId,
    pub state: JobState,
    pub detail: String,
}

#[derive(Debug)]
pub struct ReadyEmbedding {
    pub index: VectorIndex,
    /// Generation job that produced the matrix, if any.
    pub job: Option<JobId>,
}

#[derive(Debug, Clone)]
pub enum EmbeddingState {
    Absent,
    Pending(JobId),
    Failed(JobId),
    Ready(Arc<ReadyEmbedding>),
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub id: InstanceId,
    pub name: String,
    pub graph: Arc<OntologyGraph>,
    /// Dense concept order, as in the graph.
    pub metadata: Arc<Vec<ConceptMetadata>>,
    pub config: FuzzyConfig,
    pub embedding: EmbeddingState,
}

impl Instance {
    pub fn summary(&self, id: &str) -> Option<ConceptSummary> {
        let i = self.graph.index_of(id)?;
        Some(ConceptSummary::new(self.graph.record_at(i), &self.metadata[i]))
    }

    pub fn index(&self) -> Option<&VectorIndex> {
        match &self.embedding {
            EmbeddingState::Ready(ready) => Some(&ready.index),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RegistryError {
    #[error(transparent)]
    Alpha(#[from] AlphaError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{concepts} concepts x dim {dim} exceeds the limit of {MAX_MATRIX_ENTRIES} matrix entries")]
    TooLarge { concepts: usize, dim: usize },
}

pub enum EmbeddingSource {
    None,
    Matrix(EmbeddingMatrix),
    Generate(AlphaParams),
}

pub struct InstanceSpec {
    pub name: String,
    pub graph: OntologyGraph,
    pub config: FuzzyConfig,
    pub embedding: EmbeddingSource,
}

/// Deferred work for a generation job; run it off the async executor.
pub struct GenerationTask {
    registry: Arc<Registry>,
    instance: InstanceId,
    job: JobId,
    params: AlphaParams,
}

impl GenerationTask {
    pub fn job(&self) -> JobId {
        self.job
    }

    pub fn run(self) {
        let Self {
            registry,
            instance,
            job,
            params,
        } = self;
        registry.set_job(job, JobState::Running, "generating".into());
        let Some(current) = registry.instance(instance) else {
            registry.set_job(job, JobState::Failed, "instance disappeared".into());
            return;
        };
        let started = std::time::Instant::now();
        let built = generate(&current.graph, &params, &current.config)
            .map_err(RegistryError::from)
            .and_then(|matrix| Ok(VectorIndex::build(Arc::new(matrix))?));
        match built {
            Ok(index) => {
                let detail = format!(
                    "generated {} x {} in {:.2}s",
                    index.len(),
                    index.dim(),
                    started.elapsed().as_secs_f64()
                );
                registry.publish(Instance {
                    embedding: EmbeddingState::Ready(Arc::new(ReadyEmbedding { index, job: Some(job) })),
                    ..(*current).clone()
                });
                log::info!("{instance}: {detail}");
                registry.set_job(job, JobState::Done, detail);
            }
            Err(e) => {
                registry.publish(Instance {
                    embedding: EmbeddingState::Failed(job),
                    ..(*current).clone()
                });
                log::warn!("{instance}: generation failed: {e}");
                registry.set_job(job, JobState::Failed, e.to_string());
            }
        }
    }
}

pub struct Created {
    pub instance: Arc<Instance>,
    pub task: Option<GenerationTask>,
}

#[derive(Default)]
pub struct Registry {
    instances: RwLock<BTreeMap<InstanceId, Arc<Instance>>>,
    jobs: RwLock<BTreeMap<JobId, JobStatus>>,
    next_instance: AtomicU64,
    next_job: AtomicU64,
    snapshot_dir: Option<PathBuf>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Writes `<id>.ontology.json` and `<id>.embedding.tsv` into `dir`
    /// whenever an instance is published.
    pub fn with_snapshots(dir: PathBuf) -> Self {
        Self {
            snapshot_dir: Some(dir),
            ..Self::default()
        }
    }

    pub fn instance(&self, id: InstanceId) -> Option<Arc<Instance>> {
        self.instances.read().expect("registry lock").get(&id).cloned()
    }

    pub fn instances(&self) -> Vec<Arc<Instance>> {
        self.instances
            .read()
            .expect("registry lock")
            .values()
            .cloned()
            .collect()
    }

    pub fn job(&self, id: JobId) -> Option<JobStatus> {
        self.jobs.read().expect("registry lock").get(&id).cloned()
    }

    /// Registers a new instance. A returned task must be run for a
    /// `Generate` source to ever become ready.
    pub fn create(self: &Arc<Self>, spec: InstanceSpec) -> Result<Created, RegistryError> {
        let InstanceSpec {
            name,
            graph,
            config,
            embedding,
        } = spec;
        let (embedding, params) = match embedding {
            EmbeddingSource::None => (EmbeddingState::Absent, None),
            EmbeddingSource::Matrix(matrix) => {
                let index = VectorIndex::build(Arc::new(matrix))?;
                (
                    EmbeddingState::Ready(Arc::new(ReadyEmbedding { index, job: None })),
                    None,
                )
            }
            EmbeddingSource::Generate(params) => {
                if graph.len().saturating_mul(params.dim()) > MAX_MATRIX_ENTRIES {
                    return Err(RegistryError::TooLarge {
                        concepts: graph.len(),
                        dim: params.dim(),
                    });
                }
                if graph.leaf_indices().is_empty() {
                    return Err(AlphaError::NoLeaves.into());
                }
                let job = JobId(self.next_job.fetch_add(1, Ordering::Relaxed) + 1);
                (EmbeddingState::Pending(job), Some((job, params)))
            }
        };

        let id = InstanceId(self.next_instance.fetch_add(1, Ordering::Relaxed) + 1);
        let instance = Arc::new(Instance {
            id,
            name: if name.is_empty() { id.to_string() } else { name },
            metadata: Arc::new(metadata_table(&graph)),
            graph: Arc::new(graph),
            config,
            embedding,
        });
        let task = params.map(|(job, params)| {
            self.jobs.write().expect("registry lock").insert(
                job,
                JobStatus {
                    id: job,
                    instance: id,
                    state: JobState::Queued,
                    detail: "queued".into(),
                },
            );
            GenerationTask {
                registry: Arc::clone(self),
                instance: id,
                job,
                params,
            }
        });
        self.publish_arc(Arc::clone(&instance));
        Ok(Created { instance, task })
    }

    fn publish(&self, instance: Instance) {
        self.publish_arc(Arc::new(instance));
    }

    fn publish_arc(&self, instance: Arc<Instance>) {
        self.instances
            .write()
            .expect("registry lock")
            .insert(instance.id, Arc::clone(&instance));
        if let Some(dir) = &self.snapshot_dir {
            if let Err(e) = write_snapshot(dir, &instance) {
                log::warn!("{}: snapshot to {} failed: {e}", instance.id, dir.display());
            }
        }
    }

    /// Terminal states are final; late transitions are ignored.
    fn set_job(&self, id: JobId, state: JobState, detail: String) {
        let mut jobs = self.jobs.write().expect("registry lock");
        if let Some(job) = jobs.get_mut(&id) {
            if !job.state.is_terminal() {
                job.state = state;
                job.detail = detail;
            }
        }
    }
}

fn write_snapshot(dir: &std::path::Path, instance: &Instance) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let ontology = serde_json::to_vec_pretty(&to_json(&instance.graph)).map_err(std::io::Error::other)?;
    std::fs::write(dir.join(format!("{}.ontology.json", instance.id)), ontology)?;
    if let Some(index) = instance.index() {
        let file = std::fs::File::create(dir.join(format!("{}.embedding.tsv", instance.id)))?;
        export_embedding(index.matrix(), std::io::BufWriter::new(file))?;
    }
    Ok(())
}
