//! Story files: self-contained JSON bundles of a signature, evidence
//! sentences, and an optional hypothesis set.
//!
//! A story is the unit of ingestion and of experiment parallelism.
//! Ingestion validates everything up front — signature, every sentence,
//! satisfiability of the evidence as a whole — so downstream code works
//! with a [`CompiledStory`] that cannot fail structurally.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{CodeTable, CodecError, TokenDictionary};
use crate::counter::{Counter, CounterError};
use crate::fol::{FolError, Signature, World};
use crate::semantics::{Evidence, SemanticsError};
use crate::simnet::{HypothesisSet, SimnetError};

#[derive(Debug, Error)]
pub enum StoryError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("story {id}: signature: {source}")]
    Signature {
        id: String,
        #[source]
        source: FolError,
    },
    #[error("story {id}: no sentences")]
    NoSentences { id: String },
    #[error("story {id}: sentence {index} ({text:?}): {source}")]
    Sentence {
        id: String,
        index: usize,
        text: String,
        #[source]
        source: FolError,
    },
    #[error(
        "story {id}: unsatisfiable evidence: sentence {index} ({text:?}) \
         contradicts the sentences before it"
    )]
    Unsatisfiable { id: String, index: usize, text: String },
    #[error("story {id}: hypothesis {index} ({text:?}): {source}")]
    Hypothesis {
        id: String,
        index: usize,
        text: String,
        #[source]
        source: FolError,
    },
    #[error("story {id}: {source}")]
    Counter {
        id: String,
        #[source]
        source: CounterError,
    },
    #[error("story {id}: {source}")]
    Codec {
        id: String,
        #[source]
        source: CodecError,
    },
    #[error("story {id}: {source}")]
    Simnet {
        id: String,
        #[source]
        source: SimnetError,
    },
}

/// One predicate declaration in a story file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoryPredicate {
    pub name: String,
    pub arity: u8,
}

/// The on-disk story schema. Unknown fields are rejected so typos in
/// hand-written stories surface as errors rather than silently ignored
/// data.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoryFile {
    pub id: String,
    pub predicates: Vec<StoryPredicate>,
    pub entities: Vec<String>,
    pub sentences: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypotheses: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl StoryFile {
    pub fn load(path: &Path) -> Result<StoryFile, StoryError> {
        let text = fs::read_to_string(path).map_err(|source| StoryError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| StoryError::Json {
            path: path.display().to_string(),
            source,
        })
    }
}

/// A story after full validation: world, satisfiable evidence, optional
/// hypothesis set, and the codec pair shared by transmitter and receiver.
#[derive(Debug, Clone)]
pub struct CompiledStory {
    pub file: StoryFile,
    pub world: World,
    pub evidence: Evidence,
    pub hypotheses: Option<HypothesisSet>,
    pub dict: TokenDictionary,
    pub table: CodeTable,
}

impl CompiledStory {
    pub fn id(&self) -> &str {
        &self.file.id
    }

    pub fn sentence_count(&self) -> usize {
        self.evidence.len()
    }
}

/// Validates and compiles a story. The counter is borrowed so a caller
/// can keep one cache across ingestion and the simulations that follow.
pub fn ingest(file: StoryFile, counter: &mut Counter) -> Result<CompiledStory, StoryError> {
    let id = file.id.clone();
    let sig = Signature::new(
        file.predicates.iter().map(|p| (p.name.clone(), p.arity)).collect::<Vec<_>>(),
        file.entities.clone(),
    )
    .map_err(|source| StoryError::Signature { id: id.clone(), source })?;
    let world = World::new(sig);

    if file.sentences.is_empty() {
        return Err(StoryError::NoSentences { id });
    }
    let mut evidence = Evidence::empty(&world);
    for (index, text) in file.sentences.iter().enumerate() {
        let sentence = world.parse(text).map_err(|source| StoryError::Sentence {
            id: id.clone(),
            index,
            text: text.clone(),
            source,
        })?;
        evidence = match evidence.try_extended(&world, counter, sentence) {
            Ok(e) => e,
            Err(SemanticsError::InconsistentEvidence) => {
                return Err(StoryError::Unsatisfiable { id, index, text: text.clone() });
            }
            Err(SemanticsError::Counter(source)) => {
                return Err(StoryError::Counter { id, source });
            }
            Err(other) => {
                return Err(StoryError::Simnet { id, source: other.into() });
            }
        };
    }

    let hypotheses = match &file.hypotheses {
        None => None,
        Some(texts) => {
            let mut parsed = Vec::with_capacity(texts.len());
            for (index, text) in texts.iter().enumerate() {
                parsed.push(world.parse(text).map_err(|source| StoryError::Hypothesis {
                    id: id.clone(),
                    index,
                    text: text.clone(),
                    source,
                })?);
            }
            let set = HypothesisSet::new(&world, counter, parsed)
                .map_err(|source| StoryError::Simnet { id: id.clone(), source })?;
            Some(set)
        }
    };

    let dict = TokenDictionary::new(world.signature());
    let streams: Vec<Vec<u32>> = evidence
        .sentences()
        .iter()
        .map(|f| dict.tokenize(f, world.signature()))
        .collect::<Result<_, _>>()
        .map_err(|source| StoryError::Codec { id: id.clone(), source })?;
    let table = CodeTable::from_corpus(&dict, streams.iter().map(|v| v.as_slice()))
        .map_err(|source| StoryError::Codec { id: id.clone(), source })?;

    Ok(CompiledStory { file, world, evidence, hypotheses, dict, table })
}

/// Loads and compiles in one step.
pub fn ingest_path(path: &Path, counter: &mut Counter) -> Result<CompiledStory, StoryError> {
    ingest(StoryFile::load(path)?, counter)
}
