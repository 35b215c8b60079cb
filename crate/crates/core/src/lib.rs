//! Model synchronization between a Use Case model and an Activity model.
//!
//! The crate follows one project through a fixed pipeline:
//!
//! 1. structured requirements are parsed ([`requirements`]),
//! 2. interpreted into a Use Case model ([`interpret`]),
//! 3. transformed into an Activity skeleton ([`transform`]),
//! 4. completed from event-driven requirements ([`interpret`]),
//! 5. verified through adjacency and trace matrices ([`rosetta`]),
//!
//! and afterwards kept consistent under CRUD changes ([`sync`]). Everything a
//! session touches lives in a [`Project`], which serializes canonically
//! ([`persist`]) and renders to DOT or PlantUML ([`render`]).

pub mod ecg;
pub mod error;
pub mod interpret;
pub mod model;
pub mod persist;
pub mod project;
pub mod render;
pub mod requirements;
pub mod rosetta;
pub mod sync;
pub mod transform;

pub use error::{Error, ParseError, Result};
pub use interpret::{InterpretationTrace, VerificationReport};
pub use model::{
    Direction, Entity, EntityId, EntityKind, Metamodel, Model, Relation, RelationKind, Stage,
    Violation,
};
pub use project::{Project, ProjectVerification, Side};
pub use requirements::{
    DependencyKind, DomainDependency, ElaborationLink, Requirement, RequirementFile,
    RequirementForm, RequirementSet,
};
pub use rosetta::{
    AdjacencyMatrix, CandidateRelation, DenseGrid, FailureCategory, SyncFailure, SyncVerdict,
    TraceMatrix, Witness,
};
pub use sync::{
    ChangeOp, ChangeSet, DecisionKind, DecisionRequest, DecisionResolution, PendingDecision,
    SyncReport,
};
