//! Change propagation between the Use Case and Activity models.
//!
//! Use Case changes are carried forward along the relational rule: a new
//! association or allocation is realized by Activity relations. Activity
//! changes are carried backward: every candidate N relation suggested by a
//! new M relation is reinterpreted against the Use Case metamodel and
//! committed, dropped or escalated. New entities are never mapped silently;
//! they wait for a `MapOrCreate` decision, and relations touching them are
//! deferred until then.
//!
//! A change set runs on a copy of the project and replaces it only when
//! every operation succeeds.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::interpret::title_case;
use crate::model::{
    semantics, Direction, EntityId, EntityKind, FlowOrientation, Model, RelationKind,
};
use crate::project::{Project, Side};
use crate::rosetta::{
    backward_candidates, forward_witness, CandidateRelation, Cell, FailureCategory, SyncFailure,
    SyncVerdict, Via,
};
use crate::transform::{lane_tag, spawn_action};

/// One edit of one model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ChangeOp {
    CreateEntity {
        model: Side,
        kind: EntityKind,
        label: String,
        /// Explicit tag; must not have been issued before.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<EntityId>,
    },
    CreateRelation {
        model: Side,
        kind: RelationKind,
        source: EntityId,
        target: EntityId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        semantics: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        direction: Option<Direction>,
    },
    DeleteEntity {
        model: Side,
        target: EntityId,
    },
    DeleteRelation {
        model: Side,
        source: EntityId,
        target: EntityId,
    },
    UpdateLabel {
        model: Side,
        target: EntityId,
        label: String,
    },
}

impl ChangeOp {
    pub fn side(&self) -> Side {
        match self {
            ChangeOp::CreateEntity { model, .. }
            | ChangeOp::CreateRelation { model, .. }
            | ChangeOp::DeleteEntity { model, .. }
            | ChangeOp::DeleteRelation { model, .. }
            | ChangeOp::UpdateLabel { model, .. } => *model,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeSet {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
    pub ops: Vec<ChangeOp>,
}

impl ChangeSet {
    pub fn new(ops: Vec<ChangeOp>) -> Self {
        Self { origin: None, ops }
    }

    /// Accepts `{"ops": [...]}` or a bare list of operations.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.is_array() {
            Ok(Self::new(serde_json::from_value(value)?))
        } else {
            Ok(serde_json::from_value(value)?)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DecisionKind {
    /// A new entity: map it onto an existing counterpart or create one.
    MapOrCreate,
    /// Orient an undecided precedence.
    DirectPrecedence,
    /// Whether a trigger names the same event as an earlier outcome.
    MatchClause,
    /// Counterparts left without a trace link by a deletion.
    CascadeOrphan,
    /// A use case was renamed; its actions keep their labels unless asked.
    RenameCounterpart,
    /// A relation the engine can neither realize nor explain.
    UnresolvedRelation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub key: String,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<u32>,
}

impl Candidate {
    pub fn new(key: impl Into<String>, description: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            description: description.into(),
            score: None,
        }
    }
}

/// The requirement clause a decision is about.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseContext {
    pub requirement: String,
    pub clause: String,
    pub lane: EntityId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionRequest {
    pub kind: DecisionKind,
    /// Model the subjects live in.
    pub side: Side,
    pub subjects: Vec<EntityId>,
    pub candidates: Vec<Candidate>,
    pub prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clause: Option<ClauseContext>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingDecision {
    pub id: u64,
    pub issued_revision: u64,
    #[serde(flatten)]
    pub request: DecisionRequest,
}

/// Answer to a pending decision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionResolution {
    pub request: u64,
    /// Candidate key, or its 1-based position.
    pub choose: String,
    /// Label for an entity created or renamed by the choice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Reject the answer if the project has moved past this revision.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_revision: Option<u64>,
}

impl DecisionResolution {
    pub fn new(request: u64, choose: impl Into<String>) -> Self {
        Self {
            request,
            choose: choose.into(),
            label: None,
            expected_revision: None,
        }
    }
}

/// A relation whose propagation waits for its endpoints to be mapped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeferredRelation {
    pub side: Side,
    pub source: EntityId,
    pub target: EntityId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DropReason {
    SelfRelation,
    /// The Use Case metamodel has no relation of this shape.
    MetamodelOutOfScope,
    /// Flow inside the system boundary has no Use Case counterpart.
    IntraSystemFlow,
    /// No reinterpretation rule applies; a human has to look at it.
    NoRule,
}

impl std::fmt::Display for DropReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DropReason::SelfRelation => "self relation",
            DropReason::MetamodelOutOfScope => "metamodel out of scope",
            DropReason::IntraSystemFlow => "intra-system flow",
            DropReason::NoRule => "no rule",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reinterpretation {
    Commit { kind: RelationKind, semantics: String },
    Drop(DropReason),
}

/// Read a backward candidate as a Use Case relation, if the metamodel has one.
pub fn reinterpret_candidate(c: &CandidateRelation) -> Reinterpretation {
    use EntityKind::{Actor, System, UseCase};
    use RelationKind::{Allocation, Precedence};
    if c.source == c.target {
        return Reinterpretation::Drop(DropReason::SelfRelation);
    }
    let commit = |kind, sem: &str| Reinterpretation::Commit {
        kind,
        semantics: sem.to_string(),
    };
    match (c.m_kind, c.via, c.source_kind, c.target_kind) {
        (Precedence, Via::Direct, UseCase, UseCase) => {
            Reinterpretation::Drop(DropReason::MetamodelOutOfScope)
        }
        (Precedence, Via::Lane, UseCase, Actor) => {
            commit(RelationKind::Association, semantics::FUNCTIONAL_FLOW)
        }
        (Precedence, Via::Lane, Actor, UseCase) => {
            commit(RelationKind::Association, semantics::INITIATES)
        }
        (Precedence, Via::Lane, UseCase, System) | (Precedence, Via::Lane, System, UseCase) => {
            Reinterpretation::Drop(DropReason::IntraSystemFlow)
        }
        (Allocation, _, UseCase, System) => commit(Allocation, semantics::ALLOCATED_TO),
        (Allocation, _, UseCase, Actor) => Reinterpretation::Drop(DropReason::MetamodelOutOfScope),
        _ => Reinterpretation::Drop(DropReason::NoRule),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Committed {
    pub side: Side,
    pub kind: RelationKind,
    pub source: EntityId,
    pub target: EntityId,
    pub semantics: String,
    /// The relation already existed; nothing was added.
    pub already_present: bool,
    /// The backward candidate this came from; absent for forward realization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<CandidateRelation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dropped {
    pub candidate: CandidateRelation,
    pub reason: DropReason,
}

/// What one change set or one resolution did.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncReport {
    pub revision: u64,
    pub applied: usize,
    pub created: Vec<EntityId>,
    pub deleted: Vec<EntityId>,
    pub relabeled: Vec<EntityId>,
    pub trace_links: Vec<Cell>,
    pub committed: Vec<Committed>,
    pub dropped: Vec<Dropped>,
    pub escalated: Vec<CandidateRelation>,
    /// Backward candidates considered; equals committed-from-candidate plus
    /// dropped plus escalated.
    pub examined: usize,
    pub issued: Vec<u64>,
    pub pending: usize,
    pub verification: Option<SyncVerdict>,
}

impl SyncReport {
    pub fn committed_from_candidates(&self) -> usize {
        self.committed.iter().filter(|c| c.candidate.is_some()).count()
    }
}

pub fn pending_decisions(project: &Project) -> &[PendingDecision] {
    &project.decisions_pending
}

fn find_relation(model: &Model, source: &EntityId, target: &EntityId) -> Option<EntityId> {
    model
        .relation_between(source, target)
        .or_else(|| {
            model
                .relation_linking(source, target)
                .filter(|r| r.kind != RelationKind::Precedence)
        })
        .map(|r| r.id.clone())
}

fn default_semantics(kind: RelationKind) -> &'static str {
    match kind {
        RelationKind::Association => semantics::FUNCTIONAL_FLOW,
        other => other.default_semantics(),
    }
}

fn counterpart_kinds(side: Side, kind: EntityKind) -> &'static [EntityKind] {
    use EntityKind::*;
    match (side, kind) {
        (Side::Beta, Action) => &[UseCase],
        (Side::Beta, Swimlane) => &[Actor, System],
        (Side::Alpha, UseCase) => &[Action],
        (Side::Alpha, Actor | System) => &[Swimlane],
        _ => &[],
    }
}

struct Engine<'p> {
    p: &'p mut Project,
    report: SyncReport,
    new_relations: Vec<(Side, EntityId)>,
    deletions: Vec<(Side, EntityId, BTreeSet<EntityId>)>,
    relabeled: Vec<(Side, EntityId)>,
}

impl<'p> Engine<'p> {
    fn new(p: &'p mut Project) -> Self {
        Self {
            p,
            report: SyncReport::default(),
            new_relations: Vec::new(),
            deletions: Vec::new(),
            relabeled: Vec::new(),
        }
    }

    fn mapped(&self, side: Side, id: &EntityId) -> bool {
        match side {
            Side::Alpha => !self.p.q_links.images(id).is_empty(),
            Side::Beta => !self.p.q_links.preimages(id).is_empty(),
        }
    }

    fn lane_image(&self, participant: &EntityId) -> Option<EntityId> {
        self.p
            .q_links
            .images(participant)
            .into_iter()
            .find(|l| self.p.model_beta.kind_of(l) == Some(EntityKind::Swimlane))
    }

    fn system_lane(&self) -> Option<EntityId> {
        let system = self.p.model_alpha.entities_of(EntityKind::System).next()?.id.clone();
        self.lane_image(&system)
    }

    fn link(&mut self, n: EntityId, m: EntityId) {
        if self.p.q_links.insert(n.clone(), m.clone()) {
            self.report.trace_links.push((n, m));
        }
    }

    fn apply_op(&mut self, op: &ChangeOp) -> Result<()> {
        match op {
            ChangeOp::CreateEntity { model, kind, label, id } => {
                if label.trim().is_empty() {
                    return Err(Error::EmptyLabel);
                }
                let m = self.p.model_mut(*model);
                let id = match id {
                    Some(tag) => m.add_entity_tagged(*kind, tag.clone(), label.clone())?,
                    None => m.add_entity(*kind, label.clone())?,
                };
                self.p.trace_mut(*model).mark_manual(id.clone());
                self.report.created.push(id);
            }
            ChangeOp::CreateRelation {
                model,
                kind,
                source,
                target,
                semantics,
                direction,
            } => {
                let sem = semantics
                    .clone()
                    .unwrap_or_else(|| default_semantics(*kind).to_string());
                let dir = (*kind == RelationKind::Precedence)
                    .then(|| direction.unwrap_or(Direction::Forward));
                let rid = self
                    .p
                    .model_mut(*model)
                    .insert_relation(*kind, source, target, sem, dir, None)?;
                self.new_relations.push((*model, rid));
            }
            ChangeOp::DeleteEntity { model, target } => self.delete_entity(*model, target)?,
            ChangeOp::DeleteRelation { model, source, target } => {
                self.delete_relation(*model, source, target)?
            }
            ChangeOp::UpdateLabel { model, target, label } => {
                self.p.model_mut(*model).update_label(target, label.clone())?;
                self.relabeled.push((*model, target.clone()));
            }
        }
        let m = self.p.model_mut(op.side());
        m.refresh_stage();
        let violations = m.check_conformance();
        if !violations.is_empty() {
            return Err(Error::NonConformantSource(violations));
        }
        self.report.applied += 1;
        Ok(())
    }

    fn delete_entity(&mut self, side: Side, id: &EntityId) -> Result<()> {
        self.p.model_mut(side).remove_entity(id)?;
        let counterparts: BTreeSet<EntityId> = self
            .p
            .q_links
            .remove_entity(id)
            .into_iter()
            .map(|(a, b)| if &a == id { b } else { a })
            .collect();
        self.p.trace_mut(side).forget(id);
        self.p.deferred.retain(|d| &d.source != id && &d.target != id);
        let withdrawn: Vec<u64> = self
            .p
            .decisions_pending
            .iter()
            .filter(|d| d.request.subjects.contains(id))
            .map(|d| d.id)
            .collect();
        if !withdrawn.is_empty() {
            self.p.decisions_pending.retain(|d| !withdrawn.contains(&d.id));
            self.p.log("decision.withdrawn", json!({"ids": withdrawn, "entity": id}));
        }
        self.report.deleted.push(id.clone());
        self.deletions.push((side, id.clone(), counterparts));
        Ok(())
    }

    fn delete_relation(&mut self, side: Side, source: &EntityId, target: &EntityId) -> Result<()> {
        let m = self.p.model_mut(side);
        let rid = find_relation(m, source, target).ok_or_else(|| Error::UnknownRelation {
            from: source.clone(),
            to: target.clone(),
        })?;
        m.remove_relation(&rid);
        self.p.deferred.retain(|d| {
            !(d.side == side
                && ((&d.source == source && &d.target == target)
                    || (&d.source == target && &d.target == source)))
        });
        Ok(())
    }

    /// Ask about counterparts a deletion left without any trace link.
    fn flush_deletions(&mut self) {
        for (side, id, counterparts) in std::mem::take(&mut self.deletions) {
            let other = side.other();
            let orphans: Vec<EntityId> = counterparts
                .into_iter()
                .filter(|c| self.p.model(other).contains(c) && !self.mapped(other, c))
                .collect();
            if orphans.is_empty() {
                continue;
            }
            let list = orphans.iter().map(|o| o.as_str()).collect::<Vec<_>>().join(", ");
            let request = DecisionRequest {
                kind: DecisionKind::CascadeOrphan,
                side: other,
                subjects: orphans,
                candidates: vec![
                    Candidate::new("delete_counterpart", format!("delete {list} as well")),
                    Candidate::new("keep", format!("keep {list} and map it again")),
                ],
                prompt: format!(
                    "{id} was deleted from the {side} model; {list} no longer traces to anything"
                ),
                clause: None,
            };
            let did = self.p.enqueue(request);
            self.report.issued.push(did);
        }
    }

    fn flush_relabels(&mut self) -> Result<()> {
        for (side, id) in std::mem::take(&mut self.relabeled) {
            let model = self.p.model(side);
            let (Some(kind), Some(label)) = (model.kind_of(&id), model.label_of(&id)) else {
                continue;
            };
            let label = label.to_string();
            match (side, kind) {
                (Side::Alpha, EntityKind::System | EntityKind::Actor) => {
                    let lanes: Vec<EntityId> = self
                        .p
                        .q_links
                        .images(&id)
                        .into_iter()
                        .filter(|l| self.p.model_beta.kind_of(l) == Some(EntityKind::Swimlane))
                        .collect();
                    for lane in lanes {
                        self.p.model_beta.update_label(&lane, label.clone())?;
                        self.report.relabeled.push(lane);
                    }
                }
                (Side::Beta, EntityKind::Swimlane) => {
                    let owners: Vec<EntityId> = self
                        .p
                        .q_links
                        .preimages(&id)
                        .into_iter()
                        .filter(|p| {
                            matches!(
                                self.p.model_alpha.kind_of(p),
                                Some(EntityKind::System | EntityKind::Actor)
                            )
                        })
                        .collect();
                    for owner in owners {
                        self.p.model_alpha.update_label(&owner, label.clone())?;
                        self.report.relabeled.push(owner);
                    }
                }
                (Side::Alpha, EntityKind::UseCase) => {
                    let actions: Vec<EntityId> = self
                        .p
                        .q_links
                        .images(&id)
                        .into_iter()
                        .filter(|a| self.p.model_beta.kind_of(a) == Some(EntityKind::Action))
                        .collect();
                    let proposed = label.to_lowercase();
                    for a in actions {
                        let current = self.p.model_beta.label_of(&a).unwrap_or("").to_string();
                        let request = DecisionRequest {
                            kind: DecisionKind::RenameCounterpart,
                            side: Side::Beta,
                            subjects: vec![id.clone(), a.clone()],
                            candidates: vec![
                                Candidate::new("relabel", format!("rename {a} to \"{proposed}\"")),
                                Candidate::new("keep", format!("keep \"{current}\"")),
                            ],
                            prompt: format!("{id} is now \"{label}\"; rename action {a} too?"),
                            clause: None,
                        };
                        let did = self.p.enqueue(request);
                        self.report.issued.push(did);
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn defer(&mut self, side: Side, source: &EntityId, target: &EntityId) {
        let entry = DeferredRelation {
            side,
            source: source.clone(),
            target: target.clone(),
        };
        if !self.p.deferred.contains(&entry) {
            self.p.deferred.push(entry);
        }
    }

    fn propagate_relation(&mut self, side: Side, rid: &EntityId) -> Result<()> {
        let Some(rel) = self.p.model(side).relation(rid).cloned() else {
            return Ok(());
        };
        if !self.mapped(side, &rel.source) || !self.mapped(side, &rel.target) {
            self.defer(side, &rel.source, &rel.target);
            return Ok(());
        }
        let cell = (rel.source, rel.target);
        match side {
            Side::Alpha => {
                self.realize(&cell)?;
            }
            Side::Beta => self.commit_candidates(&cell)?,
        }
        Ok(())
    }

    /// Relations of a freshly mapped entity that were never deferred, for
    /// instance because it lost its counterpart after they were created.
    fn queue_incident(&mut self, side: Side, id: &EntityId) {
        let incident: Vec<EntityId> = self
            .p
            .model(side)
            .incident(id)
            .filter(|r| {
                !self.p.deferred.iter().any(|d| {
                    d.side == side && d.source == r.source && d.target == r.target
                })
            })
            .map(|r| r.id.clone())
            .collect();
        for rid in incident {
            self.new_relations.push((side, rid));
        }
    }

    fn propagate_new(&mut self) -> Result<()> {
        for (side, rid) in std::mem::take(&mut self.new_relations) {
            self.propagate_relation(side, &rid)?;
        }
        Ok(())
    }

    fn process_deferred(&mut self) -> Result<()> {
        for d in std::mem::take(&mut self.p.deferred) {
            let model = self.p.model(d.side);
            match find_relation(model, &d.source, &d.target) {
                Some(rid) => self.propagate_relation(d.side, &rid)?,
                None => continue,
            }
        }
        Ok(())
    }

    /// Add an action for `uc` in `lane` and link it.
    fn spawn_for(&mut self, uc: &EntityId, lane: &EntityId, label: String) -> Result<EntityId> {
        let x = spawn_action(&mut self.p.model_beta, lane, &label)?;
        self.p.trace_beta.mark_manual(x.clone());
        self.report.created.push(x.clone());
        self.link(uc.clone(), x.clone());
        Ok(x)
    }

    fn uc_label(&self, uc: &EntityId) -> String {
        self.p.model_alpha.label_of(uc).unwrap_or("").to_lowercase()
    }

    /// Make sure an N cell has a witness, adding actions and relations in M
    /// as needed. Returns whether the cell is witnessed afterwards.
    fn realize(&mut self, cell: &Cell) -> Result<bool> {
        let witnessed = |p: &Project| {
            forward_witness(&p.n_matrix(), &p.q_links, &p.m_matrix(), cell).is_some()
        };
        if witnessed(self.p) {
            return Ok(true);
        }
        let Some(rel) = self.p.model_alpha.relation_between(&cell.0, &cell.1).cloned() else {
            return Ok(false);
        };
        match rel.kind {
            RelationKind::Allocation => {
                let Some(lane) = self.lane_image(&rel.target) else {
                    return Ok(false);
                };
                let label = self.uc_label(&rel.source);
                let x = self.spawn_for(&rel.source, &lane, label)?;
                self.record_forward(RelationKind::Allocation, x, lane, semantics::ALLOCATED_TO);
            }
            RelationKind::Association => {
                let (actor, uc) = (&rel.source, &rel.target);
                let Some(actor_lane) = self.lane_image(actor) else {
                    return Ok(false);
                };
                let Some(system_lane) = self.system_lane() else {
                    return Ok(false);
                };
                let images = self.p.q_links.images(uc);
                let beta = &self.p.model_beta;
                let existing = images
                    .iter()
                    .find(|a| beta.lane_of(a) == Some(&system_lane))
                    .cloned();
                let x = match existing {
                    Some(x) => x,
                    None => {
                        let label = self.uc_label(uc);
                        self.spawn_for(uc, &system_lane, label)?
                    }
                };
                let beta = &self.p.model_beta;
                let partner = images
                    .iter()
                    .find(|a| {
                        beta.lane_of(a) == Some(&actor_lane) && beta.relation_linking(a, &x).is_none()
                    })
                    .cloned();
                let y = match partner {
                    Some(y) => y,
                    None => {
                        let actor_label = self.p.model_alpha.label_of(actor).unwrap_or("");
                        let label = format!("{} ({actor_label})", self.uc_label(uc));
                        self.spawn_for(uc, &actor_lane, label)?
                    }
                };
                let (s, t) = match FlowOrientation::of_association(&rel.semantics) {
                    FlowOrientation::ActorFirst => (y, x),
                    FlowOrientation::SystemFirst => (x, y),
                };
                self.p
                    .model_beta
                    .add_precedence(&s, &t, semantics::PRECEDES, Direction::Forward)?;
                self.record_forward(RelationKind::Precedence, s, t, semantics::PRECEDES);
            }
            RelationKind::Precedence => return Ok(false),
        }
        self.p.model_beta.refresh_stage();
        Ok(witnessed(self.p))
    }

    fn record_forward(&mut self, kind: RelationKind, source: EntityId, target: EntityId, sem: &str) {
        self.p.log(
            "relation.committed",
            json!({"model": Side::Beta, "kind": kind, "source": source, "target": target}),
        );
        self.report.committed.push(Committed {
            side: Side::Beta,
            kind,
            source,
            target,
            semantics: sem.to_string(),
            already_present: false,
            candidate: None,
        });
    }

    /// Reinterpret every backward candidate of an M cell.
    fn commit_candidates(&mut self, cell: &Cell) -> Result<()> {
        let candidates = backward_candidates(
            &self.p.n_matrix(),
            &self.p.m_matrix(),
            &self.p.q_links,
            cell,
        );
        for c in candidates {
            self.report.examined += 1;
            match reinterpret_candidate(&c) {
                Reinterpretation::Commit { kind, semantics } => {
                    let alpha = &mut self.p.model_alpha;
                    let present = alpha.relation_linking(&c.source, &c.target).is_some();
                    if !present {
                        alpha.insert_relation(kind, &c.source, &c.target, semantics.clone(), None, None)?;
                    }
                    let (source, target) = alpha
                        .relation_linking(&c.source, &c.target)
                        .map(|r| (r.source.clone(), r.target.clone()))
                        .unwrap_or((c.source.clone(), c.target.clone()));
                    self.p.log(
                        "relation.committed",
                        json!({"model": Side::Alpha, "kind": kind, "source": source,
                               "target": target, "already_present": present}),
                    );
                    self.report.committed.push(Committed {
                        side: Side::Alpha,
                        kind,
                        source,
                        target,
                        semantics,
                        already_present: present,
                        candidate: Some(c),
                    });
                }
                Reinterpretation::Drop(DropReason::NoRule) => {
                    self.p.log(
                        "candidate.escalated",
                        json!({"source": c.source, "target": c.target, "m_relation": c.m_relation}),
                    );
                    self.report.escalated.push(c);
                }
                Reinterpretation::Drop(reason) => {
                    self.p.log(
                        "candidate.dropped",
                        json!({"source": c.source, "target": c.target,
                               "m_relation": c.m_relation, "reason": reason}),
                    );
                    self.report.dropped.push(Dropped { candidate: c, reason });
                }
            }
        }
        Ok(())
    }

    fn check_label(label: Option<&str>) -> Result<()> {
        match label {
            Some(l) if l.trim().is_empty() => Err(Error::EmptyLabel),
            _ => Ok(()),
        }
    }

    fn create_counterpart(&mut self, side: Side, subject: &EntityId, label: Option<&str>) -> Result<()> {
        Self::check_label(label)?;
        let model = self.p.model(side);
        let kind = model
            .kind_of(subject)
            .ok_or_else(|| Error::UnknownEntity(subject.clone()))?;
        let own_label = model.label_of(subject).unwrap_or("").to_string();
        match (side, kind) {
            (Side::Beta, EntityKind::Action | EntityKind::Swimlane) => {
                let new_kind = if kind == EntityKind::Action {
                    EntityKind::UseCase
                } else {
                    EntityKind::Actor
                };
                let label = label.map(str::to_string).unwrap_or_else(|| title_case(&own_label));
                if label.trim().is_empty() {
                    return Err(Error::EmptyLabel);
                }
                let n = self.p.model_alpha.add_entity(new_kind, label)?;
                self.p.trace_alpha.mark_manual(n.clone());
                self.report.created.push(n.clone());
                self.link(n, subject.clone());
            }
            (Side::Alpha, EntityKind::UseCase) => {
                let label = label.map(str::to_string).unwrap_or_else(|| own_label.to_lowercase());
                match self.system_lane() {
                    Some(lane) => {
                        self.spawn_for(subject, &lane, label)?;
                    }
                    None => {
                        let x = self.p.model_beta.add_entity(EntityKind::Action, label)?;
                        self.p.trace_beta.mark_manual(x.clone());
                        self.report.created.push(x.clone());
                        self.link(subject.clone(), x);
                    }
                }
            }
            (Side::Alpha, EntityKind::Actor | EntityKind::System) => {
                let label = label.map(str::to_string).unwrap_or(own_label);
                let tag = lane_tag(subject);
                let beta = &mut self.p.model_beta;
                let lane = if beta.contains(&tag) {
                    beta.add_entity(EntityKind::Swimlane, label)?
                } else {
                    beta.add_entity_tagged(EntityKind::Swimlane, tag, label)?
                };
                self.p.trace_beta.mark_manual(lane.clone());
                self.report.created.push(lane.clone());
                self.link(subject.clone(), lane);
            }
            _ => return Err(Error::KindMismatch { kind, metamodel: self.p.model(side).metamodel }),
        }
        Ok(())
    }

    fn map(&mut self, side: Side, subject: &EntityId, target: &EntityId) -> Result<bool> {
        let Some(kind) = self.p.model(side).kind_of(subject) else {
            return Ok(false);
        };
        let Some(target_kind) = self.p.model(side.other()).kind_of(target) else {
            return Ok(false);
        };
        if !counterpart_kinds(side, kind).contains(&target_kind) {
            return Ok(false);
        }
        match side {
            Side::Alpha => self.link(subject.clone(), target.clone()),
            Side::Beta => self.link(target.clone(), subject.clone()),
        }
        Ok(true)
    }

    /// Fold action `from` into `into`, moving its precedences over.
    fn merge(&mut self, from: &EntityId, into: &EntityId) -> Result<bool> {
        let beta = &self.p.model_beta;
        if from == into
            || beta.kind_of(from) != Some(EntityKind::Action)
            || beta.kind_of(into) != Some(EntityKind::Action)
        {
            return Ok(false);
        }
        let moved: Vec<_> = beta
            .incident(from)
            .filter(|r| r.kind == RelationKind::Precedence)
            .cloned()
            .collect();
        self.p.model_beta.remove_entity(from)?;
        for r in moved {
            let swap = |e: &EntityId| if e == from { into.clone() } else { e.clone() };
            let (s, t) = (swap(&r.source), swap(&r.target));
            if s == t || self.p.model_beta.relation_linking(&s, &t).is_some() {
                continue;
            }
            self.p.model_beta.insert_relation(
                RelationKind::Precedence,
                &s,
                &t,
                r.semantics,
                r.direction,
                None,
            )?;
        }
        self.p.q_links.remove_entity(from);
        for set in self.p.trace_beta.entries.values_mut() {
            if set.remove(from) {
                set.insert(into.clone());
            }
        }
        self.p.trace_beta.manual.remove(from);
        self.report.deleted.push(from.clone());
        self.p.model_beta.refresh_stage();
        Ok(true)
    }

    fn resolve(&mut self, d: &PendingDecision, key: &str, label: Option<&str>) -> Result<()> {
        let req = &d.request;
        let invalid = || Error::InvalidChoice {
            request: d.id,
            choice: key.to_string(),
        };
        let first = req.subjects.first().cloned().ok_or_else(invalid)?;
        let cell = || -> Result<Cell> {
            match req.subjects.as_slice() {
                [a, b] => Ok((a.clone(), b.clone())),
                _ => Err(invalid()),
            }
        };
        match (req.kind, key) {
            (DecisionKind::MapOrCreate, "create_new") => {
                self.create_counterpart(req.side, &first, label)?;
                self.queue_incident(req.side, &first);
            }
            (DecisionKind::MapOrCreate, k) if k.starts_with("map:") => {
                if !self.map(req.side, &first, &EntityId::new(&k[4..]))? {
                    return Err(invalid());
                }
                self.queue_incident(req.side, &first);
            }
            (DecisionKind::DirectPrecedence, "forward" | "reverse") => {
                let (a, b) = cell()?;
                let rid = self
                    .p
                    .model_beta
                    .relation_between(&a, &b)
                    .map(|r| r.id.clone())
                    .ok_or(Error::StaleRequest(d.id))?;
                self.p.model_beta.direct_precedence(&rid, key == "reverse")?;
                self.p.model_beta.refresh_stage();
            }
            (DecisionKind::MatchClause, k) if k.starts_with("match:") => {
                if !self.merge(&first, &EntityId::new(&k[6..]))? {
                    return Err(invalid());
                }
            }
            (DecisionKind::CascadeOrphan, "delete_counterpart") => {
                for s in &req.subjects {
                    if self.p.model(req.side).contains(s) {
                        self.delete_entity(req.side, s)?;
                    }
                }
            }
            (DecisionKind::UnresolvedRelation, "realize") => {
                self.realize(&cell()?)?;
            }
            (DecisionKind::UnresolvedRelation, "restore") => self.commit_candidates(&cell()?)?,
            (DecisionKind::UnresolvedRelation, "delete_relation") => {
                let (a, b) = cell()?;
                self.delete_relation(req.side, &a, &b)?;
            }
            (DecisionKind::RenameCounterpart, "relabel") => {
                Self::check_label(label)?;
                let (uc, action) = cell()?;
                let label = label.map(str::to_string).unwrap_or_else(|| self.uc_label(&uc));
                self.p.model_beta.update_label(&action, label)?;
                self.report.relabeled.push(action);
            }
            (
                DecisionKind::MatchClause | DecisionKind::CascadeOrphan | DecisionKind::RenameCounterpart,
                "keep",
            ) => {}
            _ => return Err(invalid()),
        }
        Ok(())
    }

    /// Propagate everything collected so far, ask about the rest and commit.
    fn finish(mut self, event: &str, detail: serde_json::Value) -> Result<SyncReport> {
        self.flush_deletions();
        self.flush_relabels()?;
        self.propagate_new()?;
        self.process_deferred()?;
        self.p.model_beta.refresh_stage();
        self.p.model_alpha.refresh_stage();
        let issued = reconcile(self.p)?;
        self.report.issued.extend(issued);
        self.p.commit(event, detail);
        self.report.revision = self.p.revision;
        self.report.pending = self.p.decisions_pending.len();
        self.report.verification = Some(self.p.sync_verdict());
        Ok(self.report)
    }
}

/// Apply a change set atomically and propagate it.
pub fn apply_changeset(project: &mut Project, changes: &ChangeSet) -> Result<SyncReport> {
    if changes.ops.is_empty() {
        return Ok(SyncReport {
            revision: project.revision,
            pending: project.decisions_pending.len(),
            verification: Some(project.sync_verdict()),
            ..SyncReport::default()
        });
    }
    if project.model_beta.is_empty() && !project.model_alpha.is_empty() {
        return Err(Error::StepOrder("run transform before applying changes".into()));
    }
    let mut work = project.clone();
    let abort = |index: usize| move |e: Error| Error::ChangesetAborted {
        index,
        source: Box::new(e),
    };
    let mut engine = Engine::new(&mut work);
    for (i, op) in changes.ops.iter().enumerate() {
        engine.apply_op(op).map_err(abort(i))?;
    }
    let detail = json!({"origin": changes.origin, "ops": changes.ops.len()});
    let report = engine
        .finish("changeset.applied", detail)
        .map_err(abort(changes.ops.len()))?;
    *project = work;
    Ok(report)
}

fn pick<'a>(request: &'a DecisionRequest, choose: &str) -> Option<&'a Candidate> {
    match choose.trim().parse::<usize>() {
        Ok(n) if n >= 1 => request.candidates.get(n - 1),
        Ok(_) => None,
        Err(_) => request.candidates.iter().find(|c| c.key == choose.trim()),
    }
}

/// Answer a pending decision and propagate the consequences.
pub fn resolve_decision(project: &mut Project, resolution: &DecisionResolution) -> Result<SyncReport> {
    let id = resolution.request;
    let idx = project
        .decisions_pending
        .iter()
        .position(|d| d.id == id)
        .ok_or(Error::UnknownRequest(id))?;
    if resolution.expected_revision.is_some_and(|r| r != project.revision) {
        return Err(Error::StaleRequest(id));
    }
    let pending = project.decisions_pending[idx].clone();
    let live = pending
        .request
        .subjects
        .iter()
        .all(|s| project.model_alpha.contains(s) || project.model_beta.contains(s));
    if !live {
        return Err(Error::StaleRequest(id));
    }
    let key = pick(&pending.request, &resolution.choose)
        .ok_or_else(|| Error::InvalidChoice {
            request: id,
            choice: resolution.choose.clone(),
        })?
        .key
        .clone();
    let mut work = project.clone();
    work.decisions_pending.remove(idx);
    let mut engine = Engine::new(&mut work);
    engine.resolve(&pending, &key, resolution.label.as_deref())?;
    let report = engine.finish(
        "decision.resolved",
        json!({"id": id, "kind": pending.request.kind, "choice": key}),
    )?;
    *project = work;
    Ok(report)
}

/// One line of a decision file: answers the first pending decision of the
/// given kind whose first subject is `subject_tag`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedResolution {
    pub request_kind: DecisionKind,
    pub subject_tag: EntityId,
    pub choose: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// Replay a decision file in order. Either every entry applies or the
/// project is left untouched.
pub fn resolve_script(project: &mut Project, script: &[ScriptedResolution]) -> Result<Vec<SyncReport>> {
    let mut work = project.clone();
    let mut reports = Vec::new();
    for entry in script {
        let id = work
            .decisions_pending
            .iter()
            .find(|d| {
                d.request.kind == entry.request_kind
                    && d.request.subjects.first() == Some(&entry.subject_tag)
            })
            .map(|d| d.id)
            .ok_or_else(|| Error::NoMatchingDecision {
                kind: format!("{:?}", entry.request_kind),
                subject: entry.subject_tag.to_string(),
            })?;
        let resolution = DecisionResolution {
            request: id,
            choose: entry.choose.clone(),
            label: entry.label.clone(),
            expected_revision: None,
        };
        reports.push(resolve_decision(&mut work, &resolution)?);
    }
    *project = work;
    Ok(reports)
}

fn map_or_create(p: &Project, id: &EntityId) -> DecisionRequest {
    let side = if p.model_alpha.contains(id) {
        Side::Alpha
    } else {
        Side::Beta
    };
    let model = p.model(side);
    let other = p.model(side.other());
    let kind = model.kind_of(id).unwrap_or(EntityKind::Action);
    let label = model.label_of(id).unwrap_or("");
    let wanted = counterpart_kinds(side, kind);
    let mut candidates: Vec<Candidate> = Vec::new();
    match (side, kind) {
        (Side::Beta, EntityKind::Action) => {
            let neighbours = model.flow_neighbours(id);
            let mut ranked: Vec<(u32, EntityId)> = other
                .entities_of(EntityKind::UseCase)
                .map(|u| {
                    let images = p.q_links.images(&u.id);
                    (neighbours.intersection(&images).count() as u32, u.id.clone())
                })
                .collect();
            ranked.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
            for (score, u) in ranked {
                candidates.push(Candidate {
                    key: format!("map:{u}"),
                    description: format!("realizes {u} \"{}\"", other.label_of(&u).unwrap_or("")),
                    score: Some(score),
                });
            }
        }
        _ => {
            for e in other.entities().filter(|e| wanted.contains(&e.kind)) {
                let free = match side {
                    Side::Alpha => p.q_links.preimages(&e.id).is_empty(),
                    Side::Beta => p.q_links.images(&e.id).is_empty(),
                };
                if free {
                    candidates.push(Candidate::new(
                        format!("map:{}", e.id),
                        format!("same as {} \"{}\"", e.id, e.label),
                    ));
                }
            }
        }
    }
    let what = match (side, kind) {
        (Side::Beta, EntityKind::Action) => "a new use case",
        (Side::Beta, _) => "a new actor",
        (Side::Alpha, EntityKind::UseCase) => "a new system action",
        (Side::Alpha, _) => "a new swimlane",
    };
    candidates.push(Candidate::new("create_new", format!("create {what}")));
    let target = match side {
        Side::Alpha => "Activity",
        Side::Beta => "Use Case",
    };
    DecisionRequest {
        kind: DecisionKind::MapOrCreate,
        side,
        subjects: vec![id.clone()],
        candidates,
        prompt: format!("{id} \"{label}\" has no counterpart in the {target} model"),
        clause: None,
    }
}

fn failure_key(f: &SyncFailure) -> (FailureCategory, EntityId, Option<EntityId>) {
    (f.category, f.row.clone(), f.col.clone())
}

/// Whether running `step` on a copy fixes `failure` without adding new ones.
fn effective(p: &Project, failure: &SyncFailure, step: impl FnOnce(&mut Engine) -> Result<()>) -> bool {
    let before: BTreeSet<_> = p.sync_verdict().failures.iter().map(failure_key).collect();
    let mut copy = p.clone();
    let mut engine = Engine::new(&mut copy);
    if step(&mut engine).is_err() {
        return false;
    }
    let after: BTreeSet<_> = copy.sync_verdict().failures.iter().map(failure_key).collect();
    !after.contains(&failure_key(failure)) && after.is_subset(&before)
}

fn unresolved(p: &Project, f: &SyncFailure) -> Option<DecisionRequest> {
    let col = f.col.clone()?;
    let cell = (f.row.clone(), col);
    let (side, fix, text) = match f.category {
        FailureCategory::UnwitnessedSourceRelation => (
            Side::Alpha,
            Candidate::new("realize", "add the Activity relations that realize it"),
            "Use Case",
        ),
        FailureCategory::UnwitnessedTargetRelation => (
            Side::Beta,
            Candidate::new("restore", "add the Use Case relations it implies"),
            "Activity",
        ),
        _ => return None,
    };
    let works = effective(p, f, |e| match side {
        Side::Alpha => e.realize(&cell).map(|_| ()),
        Side::Beta => e.commit_candidates(&cell),
    });
    let mut candidates = Vec::new();
    if works {
        candidates.push(fix);
    }
    candidates.push(Candidate::new(
        "delete_relation",
        format!("delete {} → {} from the {text} model", cell.0, cell.1),
    ));
    Some(DecisionRequest {
        kind: DecisionKind::UnresolvedRelation,
        side,
        subjects: vec![cell.0, cell.1],
        candidates,
        prompt: f.detail.clone(),
        clause: None,
    })
}

fn covered(p: &Project, subjects: &[EntityId]) -> bool {
    p.decisions_pending.iter().any(|d| match d.request.kind {
        DecisionKind::MapOrCreate | DecisionKind::CascadeOrphan => {
            d.request.subjects.iter().any(|s| subjects.contains(s))
        }
        DecisionKind::UnresolvedRelation => d.request.subjects == subjects,
        _ => false,
    })
}

/// Turn every verification failure nobody is asked about yet into a
/// decision. Dangling trace links are pruned outright.
pub(crate) fn reconcile(p: &mut Project) -> Result<Vec<u64>> {
    let rank = |c: FailureCategory| match c {
        FailureCategory::DanglingTraceLink => 0,
        FailureCategory::UnmappedEntity => 1,
        FailureCategory::UnwitnessedSourceRelation => 2,
        FailureCategory::UnwitnessedTargetRelation => 3,
    };
    let mut failures = p.sync_verdict().failures;
    failures.sort_by_key(|f| (rank(f.category), f.row.clone(), f.col.clone()));
    let mut issued = Vec::new();
    for f in failures {
        let mut subjects = vec![f.row.clone()];
        subjects.extend(f.col.clone());
        if f.category == FailureCategory::DanglingTraceLink {
            if let Some(col) = &f.col {
                p.q_links.remove(&f.row, col);
                p.log("trace.pruned", json!({"row": f.row, "col": col}));
            }
            continue;
        }
        if covered(p, &subjects) {
            continue;
        }
        let request = match f.category {
            FailureCategory::UnmappedEntity => Some(map_or_create(p, &f.row)),
            _ => unresolved(p, &f),
        };
        if let Some(request) = request {
            issued.push(p.enqueue(request));
        }
    }
    Ok(issued)
}
