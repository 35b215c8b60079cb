//! Use Case → Activity transformation and lane naming.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    semantics, Direction, EntityId, EntityKind, FlowOrientation, Metamodel, Model, RelationKind,
    Stage, Violation,
};
use crate::rosetta::TraceMatrix;

/// Descriptor of one built-in rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TransformRule {
    pub name: &'static str,
    pub source_pattern: &'static str,
    pub production: &'static str,
    pub trace_emission: &'static str,
}

/// The rule set, applied entities-first in this order.
pub const RULES: [TransformRule; 3] = [
    TransformRule {
        name: "participant-to-swimlane",
        source_pattern: "System | Actor",
        production: "Swimlane L<tag>",
        trace_emission: "(participant, lane)",
    },
    TransformRule {
        name: "use-case-to-actions",
        source_pattern: "UseCase U with Association(A, U)",
        production: "Action in L_A + Action in L_S, each with an Allocation",
        trace_emission: "(U, each action)",
    },
    TransformRule {
        name: "association-to-precedence",
        source_pattern: "Association(A, U)",
        production: "Undecided Precedence between the two actions of U",
        trace_emission: "none",
    },
];

/// Tag of the swimlane produced for a System or Actor.
pub fn lane_tag(participant: &EntityId) -> EntityId {
    EntityId::new(format!("L{participant}"))
}

/// Add an action allocated to `lane`.
pub(crate) fn spawn_action(target: &mut Model, lane: &EntityId, label: &str) -> Result<EntityId> {
    let action = target.add_entity(EntityKind::Action, label)?;
    target.add_relation(RelationKind::Allocation, &action, lane, semantics::ALLOCATED_TO)?;
    Ok(action)
}

/// Add the lane of a System or Actor and its trace link.
pub(crate) fn spawn_lane(
    target: &mut Model,
    q: &mut TraceMatrix,
    participant: &EntityId,
    label: &str,
) -> Result<EntityId> {
    let lane = target.add_entity_tagged(EntityKind::Swimlane, lane_tag(participant), label)?;
    q.insert(participant.clone(), lane.clone());
    Ok(lane)
}

fn source_violations(source: &Model) -> Vec<Violation> {
    if source.metamodel != Metamodel::UseCase {
        return source
            .entities()
            .map(|e| Violation::IllegalEntityKind {
                entity: e.id.clone(),
                kind: e.kind,
            })
            .collect();
    }
    let mut out: Vec<Violation> = source
        .check_conformance()
        .into_iter()
        .filter(|v| !matches!(v, Violation::EmptyLabel { .. }))
        .collect();
    let has_use_cases = source.entities_of(EntityKind::UseCase).next().is_some();
    if has_use_cases && source.entities_of(EntityKind::System).next().is_none() {
        out.push(Violation::MissingSystem);
    }
    out
}

/// Build the Activity skeleton of a Use Case model together with the
/// trace matrix linking the two.
pub fn semantic_transform(source: &Model) -> Result<(Model, TraceMatrix)> {
    let violations = source_violations(source);
    if !violations.is_empty() || source.metamodel != Metamodel::UseCase {
        return Err(Error::NonConformantSource(violations));
    }
    let mut target = Model::new(Metamodel::Activity);
    let mut q = TraceMatrix::default();

    let system = source.entities_of(EntityKind::System).next().map(|e| e.id.clone());
    let system_lane = match &system {
        Some(s) => Some(spawn_lane(&mut target, &mut q, s, "")?),
        None => None,
    };
    let actors: Vec<EntityId> = source
        .entities_of(EntityKind::Actor)
        .map(|e| e.id.clone())
        .collect();
    for actor in &actors {
        spawn_lane(&mut target, &mut q, actor, "")?;
    }

    // actions first, then allocations, then precedences
    let mut allocations = Vec::new();
    let mut precedences = Vec::new();
    let system_lane = system_lane.as_ref();
    for uc in source.entities_of(EntityKind::UseCase) {
        let mut assoc: Vec<(EntityId, FlowOrientation)> = source
            .relations_of(RelationKind::Association)
            .filter(|r| r.target == uc.id)
            .map(|r| (r.source.clone(), FlowOrientation::of_association(&r.semantics)))
            .collect();
        if assoc.is_empty() {
            return Err(Error::OrphanUseCase(uc.id.clone()));
        }
        assoc.sort_by(|a, b| a.0.cmp(&b.0));
        let lane_s = system_lane.expect("use cases imply a system");
        let actor_first: Vec<_> = assoc
            .iter()
            .filter(|(_, o)| *o == FlowOrientation::ActorFirst)
            .collect();
        let system_first: Vec<_> = assoc
            .iter()
            .filter(|(_, o)| *o == FlowOrientation::SystemFirst)
            .collect();
        let mut leading = Vec::new();
        for (actor, _) in actor_first {
            let a = target.add_entity(EntityKind::Action, "")?;
            allocations.push((a.clone(), lane_tag(actor)));
            q.insert(uc.id.clone(), a.clone());
            leading.push(a);
        }
        let sys_action = target.add_entity(EntityKind::Action, "")?;
        allocations.push((sys_action.clone(), lane_s.clone()));
        q.insert(uc.id.clone(), sys_action.clone());
        for a in leading {
            precedences.push((a, sys_action.clone()));
        }
        for (actor, _) in system_first {
            let a = target.add_entity(EntityKind::Action, "")?;
            allocations.push((a.clone(), lane_tag(actor)));
            q.insert(uc.id.clone(), a.clone());
            precedences.push((sys_action.clone(), a));
        }
    }
    for (action, lane) in allocations {
        target.add_relation(RelationKind::Allocation, &action, &lane, semantics::ALLOCATED_TO)?;
    }
    for (from, to) in precedences {
        target.add_precedence(&from, &to, semantics::PRECEDES, Direction::Undecided)?;
    }
    target.stage = Stage::Skeleton;
    Ok((target, q))
}

/// Name every swimlane after its trace preimage.
pub fn compose_with_interpretation(
    skeleton: &Model,
    source: &Model,
    q: &TraceMatrix,
) -> Result<Model> {
    let mut out = skeleton.clone();
    let lanes: Vec<EntityId> = skeleton
        .entities_of(EntityKind::Swimlane)
        .map(|e| e.id.clone())
        .collect();
    for lane in lanes {
        let label = q
            .preimages(&lane)
            .into_iter()
            .find_map(|p| source.label_of(&p).map(str::to_string))
            .ok_or_else(|| Error::MissingTraceLink(lane.clone()))?;
        out.set_label(&lane, label);
    }
    Ok(out)
}
