//! Typed graphs for the two built-in metamodels.
//!
//! A [`Model`] is a set of entities and binary relations that conforms to
//! either the Use Case metamodel (System, Actor, UseCase; Association and
//! Allocation) or the Activity metamodel (Swimlane, Action; Allocation and
//! Precedence). Mutations validate relation signatures eagerly, so a model
//! built through this API only ever violates the stage rules (empty labels,
//! undecided precedences) that [`Model::check_conformance`] reports.
//!
//! Identifiers are short readable tags (`S`, `A1`, `U2`, `LA1`, `a5`) handed
//! out per kind in creation order. Counters only grow, so a deleted tag is
//! never handed out again.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque, human-readable entity or relation identifier.
///
/// Ordering is "natural": the alphabetic prefix first, then the numeric
/// suffix, so `A2 < A10`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(String);

impl EntityId {
    pub fn new(tag: impl Into<String>) -> Self {
        Self(tag.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn split(&self) -> (&str, Option<u64>) {
        let digits = self.0.len()
            - self
                .0
                .chars()
                .rev()
                .take_while(char::is_ascii_digit)
                .count();
        let (prefix, number) = self.0.split_at(digits);
        (prefix, number.parse().ok())
    }

    /// Numeric suffix when the tag has the form `<prefix><n>`.
    pub fn number_for(&self, prefix: &str) -> Option<u64> {
        let (p, n) = self.split();
        if p == prefix {
            n
        } else {
            None
        }
    }
}

impl Ord for EntityId {
    fn cmp(&self, other: &Self) -> Ordering {
        let (pa, na) = self.split();
        let (pb, nb) = other.split();
        pa.cmp(pb)
            .then(na.cmp(&nb))
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for EntityId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EntityId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

impl From<String> for EntityId {
    fn from(s: String) -> Self {
        Self::new(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metamodel {
    UseCase,
    Activity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityKind {
    System,
    Actor,
    UseCase,
    Swimlane,
    Action,
}

impl EntityKind {
    pub const ALL: [EntityKind; 5] = [
        EntityKind::System,
        EntityKind::Actor,
        EntityKind::UseCase,
        EntityKind::Swimlane,
        EntityKind::Action,
    ];

    pub fn metamodel(self) -> Metamodel {
        match self {
            EntityKind::System | EntityKind::Actor | EntityKind::UseCase => Metamodel::UseCase,
            EntityKind::Swimlane | EntityKind::Action => Metamodel::Activity,
        }
    }

    fn tag_prefix(self) -> &'static str {
        match self {
            EntityKind::System => "S",
            EntityKind::Actor => "A",
            EntityKind::UseCase => "U",
            EntityKind::Swimlane => "L",
            EntityKind::Action => "a",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationKind {
    /// Actor ↔ UseCase, undirected, stored as (Actor, UseCase).
    Association,
    /// UseCase → System or Action → Swimlane.
    Allocation,
    /// Action → Action.
    Precedence,
}

impl RelationKind {
    /// Whether `(source, target)` is a legal signature, ignoring the order
    /// of undirected associations.
    pub fn accepts(self, source: EntityKind, target: EntityKind) -> bool {
        use EntityKind::*;
        match self {
            RelationKind::Association => {
                matches!((source, target), (Actor, UseCase) | (UseCase, Actor))
            }
            RelationKind::Allocation => {
                matches!((source, target), (UseCase, System) | (Action, Swimlane))
            }
            RelationKind::Precedence => matches!((source, target), (Action, Action)),
        }
    }

    pub fn default_semantics(self) -> &'static str {
        match self {
            RelationKind::Association => "association",
            RelationKind::Allocation => semantics::ALLOCATED_TO,
            RelationKind::Precedence => semantics::PRECEDES,
        }
    }
}

/// Semantics statements attached to relations by the built-in rules.
pub mod semantics {
    pub const ALLOCATED_TO: &str = "allocated to";
    pub const PRECEDES: &str = "precedes";
    /// Association whose actor starts the interaction (actor → system).
    pub const INITIATES: &str = "initiates";
    /// Association whose system side flows to the actor (system → actor).
    pub const FUNCTIONAL_FLOW: &str = "functional flow";
}

/// Which side of an association interaction happens first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowOrientation {
    ActorFirst,
    SystemFirst,
}

impl FlowOrientation {
    pub fn of_association(semantics: &str) -> Self {
        if semantics.eq_ignore_ascii_case(semantics::INITIATES) {
            FlowOrientation::ActorFirst
        } else {
            FlowOrientation::SystemFirst
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    Skeleton,
    Populated,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: EntityId,
    pub kind: EntityKind,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub id: EntityId,
    pub kind: RelationKind,
    pub source: EntityId,
    pub target: EntityId,
    pub semantics: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
}

impl Relation {
    pub fn touches(&self, id: &EntityId) -> bool {
        &self.source == id || &self.target == id
    }

    pub fn is_undecided(&self) -> bool {
        self.direction == Some(Direction::Undecided)
    }

    /// Endpoints as an unordered pair key.
    fn pair(&self) -> (EntityId, EntityId) {
        pair_key(&self.source, &self.target)
    }
}

fn pair_key(a: &EntityId, b: &EntityId) -> (EntityId, EntityId) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

/// A conformance problem. Violations are data, not errors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "violation")]
pub enum Violation {
    IllegalEntityKind { entity: EntityId, kind: EntityKind },
    SignatureViolation { relation: EntityId },
    DanglingEndpoint { relation: EntityId, endpoint: EntityId },
    SelfRelation { relation: EntityId },
    DuplicateRelation { relation: EntityId },
    NonCanonicalAssociation { relation: EntityId },
    MissingDirection { relation: EntityId },
    UnexpectedDirection { relation: EntityId },
    MultipleSystems { count: usize },
    /// Use cases exist but there is no System to allocate them to.
    MissingSystem,
    EmptyLabel { entity: EntityId },
    UndecidedPrecedence { relation: EntityId },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    pub metamodel: Metamodel,
    pub stage: Stage,
    entities: BTreeMap<EntityId, Entity>,
    relations: BTreeMap<EntityId, Relation>,
    counters: BTreeMap<String, u64>,
}

impl Model {
    pub fn new(metamodel: Metamodel) -> Self {
        Self {
            metamodel,
            stage: Stage::Populated,
            entities: BTreeMap::new(),
            relations: BTreeMap::new(),
            counters: BTreeMap::new(),
        }
    }

    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    pub fn relations(&self) -> impl Iterator<Item = &Relation> {
        self.relations.values()
    }

    pub fn entity(&self, id: &EntityId) -> Option<&Entity> {
        self.entities.get(id)
    }

    pub fn relation(&self, id: &EntityId) -> Option<&Relation> {
        self.relations.get(id)
    }

    pub fn contains(&self, id: &EntityId) -> bool {
        self.entities.contains_key(id)
    }

    pub fn kind_of(&self, id: &EntityId) -> Option<EntityKind> {
        self.entities.get(id).map(|e| e.kind)
    }

    pub fn label_of(&self, id: &EntityId) -> Option<&str> {
        self.entities.get(id).map(|e| e.label.as_str())
    }

    pub fn entities_of(&self, kind: EntityKind) -> impl Iterator<Item = &Entity> {
        self.entities.values().filter(move |e| e.kind == kind)
    }

    pub fn relations_of(&self, kind: RelationKind) -> impl Iterator<Item = &Relation> {
        self.relations.values().filter(move |r| r.kind == kind)
    }

    pub fn incident(&self, id: &EntityId) -> impl Iterator<Item = &Relation> + '_ {
        let id = id.clone();
        self.relations.values().filter(move |r| r.touches(&id))
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    /// The relation stored for the ordered cell `(source, target)`.
    pub fn relation_between(&self, source: &EntityId, target: &EntityId) -> Option<&Relation> {
        self.relations
            .values()
            .find(|r| &r.source == source && &r.target == target)
    }

    /// Any relation connecting the two entities, in either orientation.
    pub fn relation_linking(&self, a: &EntityId, b: &EntityId) -> Option<&Relation> {
        let key = pair_key(a, b);
        self.relations.values().find(|r| r.pair() == key)
    }

    /// Swimlane an action is allocated to, if any.
    pub fn lane_of(&self, action: &EntityId) -> Option<&EntityId> {
        self.relations
            .values()
            .find(|r| r.kind == RelationKind::Allocation && &r.source == action)
            .map(|r| &r.target)
    }

    /// Actions allocated to `lane`, in id order.
    pub fn actions_in(&self, lane: &EntityId) -> Vec<EntityId> {
        let mut out: Vec<EntityId> = self
            .relations
            .values()
            .filter(|r| r.kind == RelationKind::Allocation && &r.target == lane)
            .map(|r| r.source.clone())
            .collect();
        out.sort();
        out
    }

    /// Neighbours reachable through precedence relations, either direction.
    pub fn flow_neighbours(&self, action: &EntityId) -> BTreeSet<EntityId> {
        self.relations
            .values()
            .filter(|r| r.kind == RelationKind::Precedence && r.touches(action))
            .map(|r| {
                if &r.source == action {
                    r.target.clone()
                } else {
                    r.source.clone()
                }
            })
            .collect()
    }

    fn next_tag(&mut self, kind: EntityKind) -> EntityId {
        let prefix = kind.tag_prefix();
        loop {
            let n = self.counters.entry(prefix.to_string()).or_insert(1);
            let tag = if kind == EntityKind::System && *n == 1 {
                prefix.to_string()
            } else {
                format!("{prefix}{n}")
            };
            *n += 1;
            let id = EntityId::new(tag);
            if !self.entities.contains_key(&id) && !self.relations.contains_key(&id) {
                return id;
            }
        }
    }

    fn next_relation_tag(&mut self) -> EntityId {
        let prefix = match self.metamodel {
            Metamodel::UseCase => "n",
            Metamodel::Activity => "m",
        };
        loop {
            let n = self.counters.entry(prefix.to_string()).or_insert(1);
            let id = EntityId::new(format!("{prefix}{n}"));
            *n += 1;
            if !self.relations.contains_key(&id) && !self.entities.contains_key(&id) {
                return id;
            }
        }
    }

    /// Raise a counter past `id` so that it is never handed out later.
    fn reserve(&mut self, prefix: &str, id: &EntityId) {
        if let Some(n) = id.number_for(prefix) {
            let counter = self.counters.entry(prefix.to_string()).or_insert(1);
            if *counter <= n {
                *counter = n + 1;
            }
        } else if prefix == "S" && id.as_str() == "S" {
            let counter = self.counters.entry(prefix.to_string()).or_insert(1);
            if *counter <= 1 {
                *counter = 2;
            }
        }
    }

    fn check_kind(&self, kind: EntityKind) -> Result<()> {
        if kind.metamodel() != self.metamodel {
            return Err(Error::KindMismatch {
                kind,
                metamodel: self.metamodel,
            });
        }
        Ok(())
    }

    /// Add an entity with the next tag for its kind.
    pub fn add_entity(&mut self, kind: EntityKind, label: impl Into<String>) -> Result<EntityId> {
        self.check_kind(kind)?;
        let id = self.next_tag(kind);
        self.entities.insert(
            id.clone(),
            Entity {
                id: id.clone(),
                kind,
                label: label.into(),
            },
        );
        Ok(id)
    }

    /// Add an entity under a caller-chosen tag (e.g. `LA1` for the lane of
    /// actor `A1`). Tags of the default form `<prefix><n>` advance the
    /// kind's counter so they are never re-issued.
    pub fn add_entity_tagged(
        &mut self,
        kind: EntityKind,
        tag: EntityId,
        label: impl Into<String>,
    ) -> Result<EntityId> {
        self.check_kind(kind)?;
        if self.entities.contains_key(&tag) || self.relations.contains_key(&tag) {
            return Err(Error::DuplicateId(tag));
        }
        if let Some(n) = tag.number_for(kind.tag_prefix()) {
            let next = self.counters.get(kind.tag_prefix()).copied().unwrap_or(1);
            if n < next {
                return Err(Error::DuplicateId(tag));
            }
        }
        self.reserve(kind.tag_prefix(), &tag);
        self.entities.insert(
            tag.clone(),
            Entity {
                id: tag.clone(),
                kind,
                label: label.into(),
            },
        );
        Ok(tag)
    }

    /// Re-insert an entity under its recorded tag, as when loading a
    /// matrix. Counters advance past the tag.
    pub(crate) fn restore_entity(
        &mut self,
        kind: EntityKind,
        tag: EntityId,
        label: String,
    ) -> Result<()> {
        self.check_kind(kind)?;
        if self.entities.contains_key(&tag) {
            return Err(Error::DuplicateId(tag));
        }
        self.reserve(kind.tag_prefix(), &tag);
        self.entities.insert(
            tag.clone(),
            Entity {
                id: tag,
                kind,
                label,
            },
        );
        Ok(())
    }

    /// Add a relation. Associations are canonicalised to (Actor, UseCase);
    /// precedences are created with `Direction::Forward`.
    pub fn add_relation(
        &mut self,
        kind: RelationKind,
        source: &EntityId,
        target: &EntityId,
        semantics: impl Into<String>,
    ) -> Result<EntityId> {
        let direction = (kind == RelationKind::Precedence).then_some(Direction::Forward);
        self.insert_relation(kind, source, target, semantics.into(), direction, None)
    }

    pub fn add_precedence(
        &mut self,
        source: &EntityId,
        target: &EntityId,
        semantics: impl Into<String>,
        direction: Direction,
    ) -> Result<EntityId> {
        self.insert_relation(
            RelationKind::Precedence,
            source,
            target,
            semantics.into(),
            Some(direction),
            None,
        )
    }

    pub(crate) fn insert_relation(
        &mut self,
        kind: RelationKind,
        source: &EntityId,
        target: &EntityId,
        semantics: String,
        direction: Option<Direction>,
        tag: Option<EntityId>,
    ) -> Result<EntityId> {
        let source_kind = self
            .kind_of(source)
            .ok_or_else(|| Error::DanglingEndpoint(source.clone()))?;
        let target_kind = self
            .kind_of(target)
            .ok_or_else(|| Error::DanglingEndpoint(target.clone()))?;
        if source == target {
            return Err(Error::SelfRelation(source.clone()));
        }
        let legal_here = match kind {
            RelationKind::Association => self.metamodel == Metamodel::UseCase,
            RelationKind::Precedence => self.metamodel == Metamodel::Activity,
            RelationKind::Allocation => true,
        };
        if !legal_here || !kind.accepts(source_kind, target_kind) {
            return Err(Error::SignatureViolation {
                kind,
                source_kind,
                target_kind,
            });
        }
        let (source, target) =
            if kind == RelationKind::Association && source_kind == EntityKind::UseCase {
                (target.clone(), source.clone())
            } else {
                (source.clone(), target.clone())
            };
        let clash = match kind {
            // opposite precedences are distinct cells
            RelationKind::Precedence => self.relation_between(&source, &target).is_some(),
            _ => self.relation_linking(&source, &target).is_some(),
        } || self
            .relation_between(&source, &target)
            .is_some();
        if clash {
            return Err(Error::DuplicateRelation { from: source, to: target });
        }
        let direction = match kind {
            RelationKind::Precedence => Some(direction.unwrap_or(Direction::Forward)),
            _ => None,
        };
        let id = match tag {
            Some(tag) => {
                if self.relations.contains_key(&tag) || self.entities.contains_key(&tag) {
                    return Err(Error::DuplicateId(tag));
                }
                let prefix = match self.metamodel {
                    Metamodel::UseCase => "n",
                    Metamodel::Activity => "m",
                };
                self.reserve(prefix, &tag);
                tag
            }
            None => self.next_relation_tag(),
        };
        self.relations.insert(
            id.clone(),
            Relation {
                id: id.clone(),
                kind,
                source,
                target,
                semantics,
                direction,
            },
        );
        Ok(id)
    }

    /// Remove an entity and every incident relation. Returns the ids of the
    /// removed relations, in id order.
    pub fn remove_entity(&mut self, id: &EntityId) -> Result<Vec<EntityId>> {
        if self.entities.remove(id).is_none() {
            return Err(Error::UnknownEntity(id.clone()));
        }
        let removed: Vec<EntityId> = self
            .relations
            .values()
            .filter(|r| r.touches(id))
            .map(|r| r.id.clone())
            .collect();
        for rid in &removed {
            self.relations.remove(rid);
        }
        Ok(removed)
    }

    pub fn remove_relation(&mut self, id: &EntityId) -> Option<Relation> {
        self.relations.remove(id)
    }

    pub fn update_label(&mut self, id: &EntityId, label: impl Into<String>) -> Result<()> {
        let label = label.into();
        if label.trim().is_empty() {
            return Err(Error::EmptyLabel);
        }
        let entity = self
            .entities
            .get_mut(id)
            .ok_or_else(|| Error::UnknownEntity(id.clone()))?;
        entity.label = label;
        Ok(())
    }

    /// Label an action or lane without the non-empty check; used while
    /// filling a skeleton.
    pub(crate) fn set_label(&mut self, id: &EntityId, label: String) {
        if let Some(e) = self.entities.get_mut(id) {
            e.label = label;
        }
    }

    /// Decide a precedence: keep its orientation or reverse it.
    pub fn direct_precedence(&mut self, relation: &EntityId, reverse: bool) -> Result<()> {
        let (source, target) = {
            let r = self
                .relations
                .get(relation)
                .filter(|r| r.kind == RelationKind::Precedence)
                .ok_or_else(|| Error::UnknownEntity(relation.clone()))?;
            (r.source.clone(), r.target.clone())
        };
        if reverse && self.relation_between(&target, &source).is_some() {
            return Err(Error::DuplicateRelation {
                from: target,
                to: source,
            });
        }
        let r = self.relations.get_mut(relation).expect("checked above");
        if reverse {
            std::mem::swap(&mut r.source, &mut r.target);
        }
        r.direction = Some(Direction::Forward);
        Ok(())
    }

    /// Recompute the stage: populated iff every label is filled and every
    /// precedence is decided.
    pub fn refresh_stage(&mut self) {
        let complete = self.entities.values().all(|e| !e.label.trim().is_empty())
            && !self.relations.values().any(Relation::is_undecided);
        self.stage = if complete {
            Stage::Populated
        } else {
            Stage::Skeleton
        };
    }

    pub fn check_conformance(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for e in self.entities.values() {
            if e.kind.metamodel() != self.metamodel {
                out.push(Violation::IllegalEntityKind {
                    entity: e.id.clone(),
                    kind: e.kind,
                });
            }
            if self.stage == Stage::Populated && e.label.trim().is_empty() {
                out.push(Violation::EmptyLabel {
                    entity: e.id.clone(),
                });
            }
        }
        if self.metamodel == Metamodel::UseCase {
            let systems = self.entities_of(EntityKind::System).count();
            if systems > 1 {
                out.push(Violation::MultipleSystems { count: systems });
            }
        }
        let mut seen = BTreeSet::new();
        for r in self.relations.values() {
            let mut dangling = false;
            for endpoint in [&r.source, &r.target] {
                if !self.entities.contains_key(endpoint) {
                    dangling = true;
                    out.push(Violation::DanglingEndpoint {
                        relation: r.id.clone(),
                        endpoint: endpoint.clone(),
                    });
                }
            }
            if r.source == r.target {
                out.push(Violation::SelfRelation {
                    relation: r.id.clone(),
                });
            }
            if !dangling {
                let sk = self.entities[&r.source].kind;
                let tk = self.entities[&r.target].kind;
                let legal_here = match r.kind {
                    RelationKind::Association => self.metamodel == Metamodel::UseCase,
                    RelationKind::Precedence => self.metamodel == Metamodel::Activity,
                    RelationKind::Allocation => true,
                };
                if !legal_here || !r.kind.accepts(sk, tk) {
                    out.push(Violation::SignatureViolation {
                        relation: r.id.clone(),
                    });
                } else if r.kind == RelationKind::Association && sk != EntityKind::Actor {
                    out.push(Violation::NonCanonicalAssociation {
                        relation: r.id.clone(),
                    });
                }
            }
            let key = match r.kind {
                RelationKind::Precedence => (r.source.clone(), r.target.clone()),
                _ => r.pair(),
            };
            if !seen.insert((r.kind == RelationKind::Precedence, key)) {
                out.push(Violation::DuplicateRelation {
                    relation: r.id.clone(),
                });
            }
            match (r.kind, r.direction) {
                (RelationKind::Precedence, None) => out.push(Violation::MissingDirection {
                    relation: r.id.clone(),
                }),
                (RelationKind::Precedence, Some(Direction::Undecided))
                    if self.stage == Stage::Populated =>
                {
                    out.push(Violation::UndecidedPrecedence {
                        relation: r.id.clone(),
                    })
                }
                (RelationKind::Association | RelationKind::Allocation, Some(_)) => {
                    out.push(Violation::UnexpectedDirection {
                        relation: r.id.clone(),
                    })
                }
                _ => {}
            }
        }
        out
    }

    /// Equality of entities, relations (with ids) and stage, ignoring the
    /// identifier counters.
    pub fn same_content(&self, other: &Model) -> bool {
        self.metamodel == other.metamodel
            && self.stage == other.stage
            && self.entities == other.entities
            && self.relations == other.relations
    }

    /// Structural equality: same entities (ids, kinds, labels), same stage
    /// and the same relations up to relation ids.
    pub fn same_graph(&self, other: &Model) -> bool {
        let key = |m: &Model| {
            m.relations
                .values()
                .map(|r| {
                    (
                        r.kind,
                        r.source.clone(),
                        r.target.clone(),
                        r.semantics.clone(),
                        r.direction.map(|d| d == Direction::Forward),
                    )
                })
                .collect::<BTreeSet<_>>()
        };
        self.metamodel == other.metamodel
            && self.stage == other.stage
            && self.entities == other.entities
            && key(self) == key(other)
    }
}

/// On-disk layout of a model: flat entity and relation lists plus the
/// counters that keep identifiers from being reused.
#[derive(Serialize, Deserialize)]
pub(crate) struct ModelDoc {
    metamodel: Metamodel,
    stage: Stage,
    entities: Vec<Entity>,
    relations: Vec<Relation>,
    next_ids: BTreeMap<String, u64>,
}

impl Serialize for Model {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ModelDoc {
            metamodel: self.metamodel,
            stage: self.stage,
            entities: self.entities.values().cloned().collect(),
            relations: self.relations.values().cloned().collect(),
            next_ids: self.counters.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Model {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = ModelDoc::deserialize(deserializer)?;
        let mut model = Model::new(doc.metamodel);
        model.stage = doc.stage;
        model.counters = doc.next_ids;
        for e in doc.entities {
            if model.entities.insert(e.id.clone(), e.clone()).is_some() {
                return Err(serde::de::Error::custom(format!("duplicate entity {}", e.id)));
            }
        }
        for r in doc.relations {
            if model.relations.insert(r.id.clone(), r.clone()).is_some() {
                return Err(serde::de::Error::custom(format!("duplicate relation {}", r.id)));
            }
        }
        Ok(model)
    }
}
