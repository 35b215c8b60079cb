//! The engine control gateway (ECG) case study: requirement sets, the
//! expected models at each step, and the change scenario that adds a
//! fifth action.

use crate::model::{semantics, Direction, EntityId, EntityKind, Metamodel, Model, RelationKind};
use crate::project::{Project, Side};
use crate::requirements::{ElaborationLink, RequirementEntry, RequirementFile, RequirementSet};
use crate::sync::{apply_changeset, resolve_decision, ChangeOp, ChangeSet, DecisionKind, DecisionResolution};

pub const SYSTEM: &str = "ECG";
pub const R1: &str = "ECG shall receive torque demand from ADAS";
pub const R2: &str = "ECG shall govern engine torque";
pub const R1_PRIME: &str =
    "When ADAS makes a torque demand, the ECG shall receive this torque demand from ADAS.";
pub const R2_PRIME: &str = "When ECG receives torque demand from ADAS, it shall determine an Engine torque for the engine to calibrate against.";

pub const NEW_ACTION_LABEL: &str = "determine Engine speed";
pub const NEW_USE_CASE_LABEL: &str = "Determine Engine Speed";

pub fn alpha_file() -> RequirementFile {
    RequirementFile {
        id: "W_alpha".into(),
        system: SYSTEM.into(),
        requirements: vec![
            RequirementEntry { id: "R1".into(), text: R1.into() },
            RequirementEntry { id: "R2".into(), text: R2.into() },
        ],
        elaborates: Vec::new(),
    }
}

pub fn beta_file() -> RequirementFile {
    RequirementFile {
        id: "W_beta".into(),
        system: SYSTEM.into(),
        requirements: vec![
            RequirementEntry { id: "R1'".into(), text: R1_PRIME.into() },
            RequirementEntry { id: "R2'".into(), text: R2_PRIME.into() },
        ],
        elaborates: Vec::new(),
    }
}

pub fn w_alpha() -> RequirementSet {
    alpha_file().parse().expect("fixture parses")
}

pub fn w_beta() -> RequirementSet {
    beta_file().parse().expect("fixture parses")
}

pub fn elaboration_links() -> Vec<ElaborationLink> {
    vec![ElaborationLink::new("R1", "R1'"), ElaborationLink::new("R2", "R2'")]
}

fn id(s: &str) -> EntityId {
    EntityId::new(s)
}

/// Use Case model interpreted from R1 and R2.
pub fn use_case_model() -> Model {
    let mut m = Model::new(Metamodel::UseCase);
    m.add_entity(EntityKind::System, SYSTEM).unwrap();
    m.add_entity(EntityKind::Actor, "ADAS").unwrap();
    m.add_entity(EntityKind::UseCase, "Receive Torque Demand").unwrap();
    m.add_entity(EntityKind::Actor, "Engine").unwrap();
    m.add_entity(EntityKind::UseCase, "Govern Engine Torque").unwrap();
    m.add_relation(RelationKind::Association, &id("A1"), &id("U1"), semantics::INITIATES).unwrap();
    m.add_relation(RelationKind::Allocation, &id("U1"), &id("S"), semantics::ALLOCATED_TO).unwrap();
    m.add_relation(RelationKind::Association, &id("A2"), &id("U2"), semantics::FUNCTIONAL_FLOW).unwrap();
    m.add_relation(RelationKind::Allocation, &id("U2"), &id("S"), semantics::ALLOCATED_TO).unwrap();
    m
}

/// The Use Case model after the new use case has been synchronized in.
pub fn synchronized_use_case_model() -> Model {
    let mut m = use_case_model();
    m.add_entity(EntityKind::UseCase, NEW_USE_CASE_LABEL).unwrap();
    m.add_relation(RelationKind::Allocation, &id("U3"), &id("S"), semantics::ALLOCATED_TO).unwrap();
    m.add_relation(RelationKind::Association, &id("A2"), &id("U3"), semantics::FUNCTIONAL_FLOW).unwrap();
    m
}

/// Activity model completed from R1' and R2'.
pub fn activity_model() -> Model {
    let mut m = Model::new(Metamodel::Activity);
    for (tag, label) in [("LS", SYSTEM), ("LA1", "ADAS"), ("LA2", "Engine")] {
        m.add_entity_tagged(EntityKind::Swimlane, id(tag), label).unwrap();
    }
    let actions = [
        ("make torque demand", "LA1"),
        ("receive torque demand", "LS"),
        ("determine Engine torque", "LS"),
        ("calibrate against determined value", "LA2"),
    ];
    for (label, lane) in actions {
        let a = m.add_entity(EntityKind::Action, label).unwrap();
        m.add_relation(RelationKind::Allocation, &a, &id(lane), semantics::ALLOCATED_TO).unwrap();
    }
    for (s, t) in [("a1", "a2"), ("a2", "a3"), ("a3", "a4")] {
        m.add_precedence(&id(s), &id(t), semantics::PRECEDES, Direction::Forward).unwrap();
    }
    m
}

/// Project after interpretation, transform, completion and dependency
/// analysis: both models, Q, and the elaboration links.
pub fn baseline_project() -> Project {
    let mut p = Project::new("ecg", SYSTEM);
    p.add_requirements(Side::Alpha, &alpha_file()).unwrap();
    p.add_requirements(Side::Beta, &beta_file()).unwrap();
    p.interpret_alpha().unwrap();
    p.transform().unwrap();
    p.interpret_beta().unwrap();
    p.set_links(elaboration_links().into_iter().collect()).unwrap();
    p
}

/// Add a5 to the system lane, between a2 and a4.
pub fn a5_changeset() -> ChangeSet {
    let beta = Side::Beta;
    ChangeSet {
        origin: Some("engine speed determination".into()),
        ops: vec![
            ChangeOp::CreateEntity {
                model: beta,
                kind: EntityKind::Action,
                label: NEW_ACTION_LABEL.into(),
                id: Some(id("a5")),
            },
            ChangeOp::CreateRelation {
                model: beta,
                kind: RelationKind::Allocation,
                source: id("a5"),
                target: id("LS"),
                semantics: None,
                direction: None,
            },
            ChangeOp::CreateRelation {
                model: beta,
                kind: RelationKind::Precedence,
                source: id("a2"),
                target: id("a5"),
                semantics: None,
                direction: None,
            },
            ChangeOp::CreateRelation {
                model: beta,
                kind: RelationKind::Precedence,
                source: id("a5"),
                target: id("a4"),
                semantics: None,
                direction: None,
            },
        ],
    }
}

/// The a5 change applied, decision still pending.
pub fn after_change() -> Project {
    let mut p = baseline_project();
    apply_changeset(&mut p, &a5_changeset()).expect("fixture change applies");
    p
}

/// The a5 change applied and resolved with a new use case.
pub fn after_create_new() -> Project {
    let mut p = after_change();
    let request = p
        .decisions_pending
        .iter()
        .find(|d| d.request.kind == DecisionKind::MapOrCreate)
        .expect("a5 awaits mapping")
        .id;
    let mut res = DecisionResolution::new(request, "create_new");
    res.label = Some(NEW_USE_CASE_LABEL.into());
    resolve_decision(&mut p, &res).expect("fixture decision resolves");
    p
}
