use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{EntityId, EntityKind, Metamodel, RelationKind, Violation};
use crate::requirements::DependencyKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A requirement sentence that does not match the grammar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    /// Requirement id, once known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requirement: Option<String>,
    /// 1-based character column of the offending token (or one past the end).
    pub column: usize,
    pub expected: String,
    pub found: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(id) = &self.requirement {
            write!(f, "{id}: ")?;
        }
        match &self.found {
            Some(found) => write!(
                f,
                "column {}: expected {}, found {:?}",
                self.column, self.expected, found
            ),
            None => write!(
                f,
                "column {}: expected {}, found end of input",
                self.column, self.expected
            ),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("entity kind {kind:?} is not part of the {metamodel:?} metamodel")]
    KindMismatch {
        kind: EntityKind,
        metamodel: Metamodel,
    },
    #[error("{kind:?} relation cannot connect {source_kind:?} to {target_kind:?}")]
    SignatureViolation {
        kind: RelationKind,
        source_kind: EntityKind,
        target_kind: EntityKind,
    },
    #[error("relation endpoints must differ ({0})")]
    SelfRelation(EntityId),
    #[error("relation endpoint {0} does not exist")]
    DanglingEndpoint(EntityId),
    #[error("a relation between {from} and {to} already exists")]
    DuplicateRelation { from: EntityId, to: EntityId },
    #[error("unknown entity {0}")]
    UnknownEntity(EntityId),
    #[error("no relation between {from} and {to}")]
    UnknownRelation { from: EntityId, to: EntityId },
    #[error("labels must not be empty")]
    EmptyLabel,
    #[error("identifier {0} is already in use")]
    DuplicateId(EntityId),

    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("EARS template {0:?} is not supported; only event-driven \"When\" requirements are")]
    UnsupportedEarsPattern(String),
    #[error("requirement {requirement} is not in {expected} form")]
    UnexpectedForm {
        requirement: String,
        expected: &'static str,
    },
    #[error("duplicate requirement id {0}")]
    DuplicateRequirement(String),
    #[error("elaboration link {from} -> {to} references an unknown requirement")]
    DanglingLink { from: String, to: String },

    #[error("requirement {requirement}: subject {subject:?} is not the declared system")]
    NonSystemSubject {
        requirement: String,
        subject: String,
    },
    #[error("no swimlane matches {0:?}")]
    UnknownLane(String),
    #[error("dependency kind {0:?} cannot be verified")]
    UnsupportedDependencyKind(DependencyKind),

    #[error("source model is not conformant ({} violations)", .0.len())]
    NonConformantSource(Vec<Violation>),
    #[error("use case {0} has no associated actor")]
    OrphanUseCase(EntityId),
    #[error("{0} has no trace link to the source model")]
    MissingTraceLink(EntityId),
    #[error("illegal matrix cell ({row}, {col}): {detail}")]
    IllegalCell {
        row: EntityId,
        col: EntityId,
        detail: String,
    },

    #[error("changeset aborted at operation {index}: {source}")]
    ChangesetAborted { index: usize, source: Box<Error> },
    #[error("no pending decision {0}")]
    UnknownRequest(u64),
    #[error("decision {request} offers no candidate {choice:?}")]
    InvalidChoice { request: u64, choice: String },
    #[error("decision {0} is stale; the project changed since it was issued")]
    StaleRequest(u64),
    #[error("no pending {kind} decision about {subject}")]
    NoMatchingDecision { kind: String, subject: String },

    #[error("{0}")]
    StepOrder(String),
    #[error("system name mismatch: project declares {project:?}, input declares {input:?}")]
    SystemMismatch { project: String, input: String },

    #[error("i/o error: {0}")]
    Io(String),
    #[error("malformed document: {0}")]
    Json(String),
    #[error("unsupported schema version {found} (this build reads {supported})")]
    SchemaVersionMismatch { found: u32, supported: u32 },
    #[error("integrity error: {0}")]
    Integrity(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

impl Error {
    /// Stable machine-readable code, used by the CLI and HTTP error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            Error::KindMismatch { .. } => "KindMismatch",
            Error::SignatureViolation { .. } => "SignatureViolation",
            Error::SelfRelation(_) => "SelfRelation",
            Error::DanglingEndpoint(_) => "DanglingEndpoint",
            Error::DuplicateRelation { .. } => "DuplicateRelation",
            Error::UnknownEntity(_) => "UnknownEntity",
            Error::UnknownRelation { .. } => "UnknownRelation",
            Error::EmptyLabel => "EmptyLabel",
            Error::DuplicateId(_) => "DuplicateId",
            Error::Parse(_) => "ParseError",
            Error::UnsupportedEarsPattern(_) => "UnsupportedEarsPattern",
            Error::UnexpectedForm { .. } => "UnexpectedForm",
            Error::DuplicateRequirement(_) => "DuplicateRequirement",
            Error::DanglingLink { .. } => "DanglingLink",
            Error::NonSystemSubject { .. } => "NonSystemSubject",
            Error::UnknownLane(_) => "UnknownLane",
            Error::UnsupportedDependencyKind(_) => "UnsupportedDependencyKind",
            Error::NonConformantSource(_) => "NonConformantSource",
            Error::OrphanUseCase(_) => "OrphanUseCase",
            Error::MissingTraceLink(_) => "MissingTraceLink",
            Error::IllegalCell { .. } => "IllegalCell",
            Error::ChangesetAborted { .. } => "ChangesetAborted",
            Error::UnknownRequest(_) => "UnknownRequest",
            Error::InvalidChoice { .. } => "InvalidChoice",
            Error::StaleRequest(_) => "StaleRequest",
            Error::NoMatchingDecision { .. } => "NoMatchingDecision",
            Error::StepOrder(_) => "StepOrder",
            Error::SystemMismatch { .. } => "SystemMismatch",
            Error::Io(_) => "IoError",
            Error::Json(_) => "MalformedDocument",
            Error::SchemaVersionMismatch { .. } => "SchemaVersionMismatch",
            Error::Integrity(_) => "IntegrityError",
        }
    }

    /// The innermost error of an aborted changeset.
    pub fn root(&self) -> &Error {
        match self {
            Error::ChangesetAborted { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_parse(&self) -> bool {
        matches!(
            self.root(),
            Error::Parse(_)
                | Error::UnsupportedEarsPattern(_)
                | Error::UnexpectedForm { .. }
                | Error::DuplicateRequirement(_)
                | Error::DanglingLink { .. }
                | Error::Json(_)
        )
    }

    pub fn is_conformance(&self) -> bool {
        matches!(
            self.root(),
            Error::KindMismatch { .. }
                | Error::SignatureViolation { .. }
                | Error::SelfRelation(_)
                | Error::DanglingEndpoint(_)
                | Error::DuplicateRelation { .. }
                | Error::NonConformantSource(_)
                | Error::OrphanUseCase(_)
                | Error::IllegalCell { .. }
                | Error::NonSystemSubject { .. }
                | Error::UnknownLane(_)
                | Error::EmptyLabel
        )
    }
}
