//! Synthetic projects of configurable size for the benchmarks.

use msync_core::model::semantics;
use msync_core::sync::{ChangeOp, ChangeSet};
use msync_core::transform::{compose_with_interpretation, semantic_transform};
use msync_core::{EntityId, EntityKind, Metamodel, Model, Project, RelationKind, Side};

/// One system, `actors` actors and `use_cases` use cases, each associated
/// with one actor round-robin.
pub fn synthetic_source(actors: usize, use_cases: usize) -> Model {
    let mut m = Model::new(Metamodel::UseCase);
    let s = m.add_entity(EntityKind::System, "Sys").expect("system");
    let actors: Vec<EntityId> = (0..actors.max(1))
        .map(|i| m.add_entity(EntityKind::Actor, format!("Actor {i}")).expect("actor"))
        .collect();
    for i in 0..use_cases {
        let u = m.add_entity(EntityKind::UseCase, format!("Handle Event {i}")).expect("use case");
        m.add_relation(RelationKind::Allocation, &u, &s, semantics::ALLOCATED_TO)
            .expect("allocation");
        let sem = if i % 2 == 0 { semantics::INITIATES } else { semantics::FUNCTIONAL_FLOW };
        m.add_relation(RelationKind::Association, &actors[i % actors.len()], &u, sem)
            .expect("association");
    }
    m
}

/// A synchronized project over [`synthetic_source`]: the skeleton with
/// every precedence directed and every action labeled.
pub fn synthetic_project(actors: usize, use_cases: usize) -> Project {
    let alpha = synthetic_source(actors, use_cases);
    let (skeleton, q) = semantic_transform(&alpha).expect("transform");
    let mut beta = compose_with_interpretation(&skeleton, &alpha, &q).expect("compose");
    let undecided: Vec<EntityId> = beta
        .relations_of(RelationKind::Precedence)
        .map(|r| r.id.clone())
        .collect();
    for rid in undecided {
        beta.direct_precedence(&rid, false).expect("direct");
    }
    let actions: Vec<EntityId> = beta.entities_of(EntityKind::Action).map(|e| e.id.clone()).collect();
    for a in actions {
        beta.update_label(&a, format!("step {a}")).expect("label");
    }
    beta.refresh_stage();
    let mut p = Project::new("synthetic", "Sys");
    p.model_alpha = alpha;
    p.model_beta = beta;
    p.q_links = q;
    p
}

/// Insert a new system-lane action after `a2`, like the ECG change.
pub fn insert_action_change() -> ChangeSet {
    let rel = |kind, source: &str, target: &str| ChangeOp::CreateRelation {
        model: Side::Beta,
        kind,
        source: EntityId::new(source),
        target: EntityId::new(target),
        semantics: None,
        direction: None,
    };
    ChangeSet::new(vec![
        ChangeOp::CreateEntity {
            model: Side::Beta,
            kind: EntityKind::Action,
            label: "new step".into(),
            id: Some(EntityId::new("x1")),
        },
        rel(RelationKind::Allocation, "x1", "LS"),
        rel(RelationKind::Precedence, "a2", "x1"),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_projects_are_synchronized() {
        for (actors, ucs) in [(1, 1), (3, 10), (5, 40)] {
            let p = synthetic_project(actors, ucs);
            assert_eq!(p.model_beta.entities_of(EntityKind::Action).count(), 2 * ucs);
            let v = p.sync_verdict();
            assert!(v.synchronized, "{actors}/{ucs}: {:?}", v.failures);
        }
    }

    #[test]
    fn change_applies() {
        let mut p = synthetic_project(2, 4);
        let report = msync_core::sync::apply_changeset(&mut p, &insert_action_change()).unwrap();
        assert_eq!(report.applied, 3);
        assert_eq!(p.pending().len(), 1);
    }
}
