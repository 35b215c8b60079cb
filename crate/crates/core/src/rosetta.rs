//! Adjacency and trace matrices.
//!
//! Each model is viewed as a square adjacency matrix (the N-matrix for the
//! Use Case model, the M-matrix for the Activity model); the trace matrix Q
//! links N entities (rows) to M entities (columns). Relations are carried
//! across with the relational rule
//!
//! ```text
//! (y_i, y_j) ∈ N  ∧  (y_i, x_k) ∈ Q  ∧  (y_j, x_l) ∈ Q   ⇒   (x_k, x_l) ∈ M
//! ```
//!
//! read existentially: one choice of trace links that lands on an existing
//! M cell is enough to witness an N cell. Associations are witnessed through
//! lanes, because an actor maps to a swimlane and not to an action.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Direction, EntityId, EntityKind, Metamodel, Model, RelationKind, Stage,
};
use crate::sync::{reinterpret_candidate, DropReason, Reinterpretation};

pub type Cell = (EntityId, EntityId);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisEntry {
    pub id: EntityId,
    pub kind: EntityKind,
    pub label: String,
}

/// Content of one filled cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationLabel {
    pub id: EntityId,
    pub kind: RelationKind,
    pub semantics: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
}

impl RelationLabel {
    pub fn display(&self) -> String {
        if self.direction == Some(Direction::Undecided) {
            format!("{}?", self.semantics)
        } else {
            self.semantics.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjacencyMatrix {
    pub metamodel: Metamodel,
    pub stage: Stage,
    pub axis: Vec<AxisEntry>,
    #[serde(with = "cell_list")]
    pub cells: BTreeMap<Cell, RelationLabel>,
}

mod cell_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        row: EntityId,
        col: EntityId,
        #[serde(flatten)]
        label: RelationLabel,
    }

    pub fn serialize<S: Serializer>(
        cells: &BTreeMap<Cell, RelationLabel>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = cells
            .iter()
            .map(|((row, col), label)| Entry {
                row: row.clone(),
                col: col.clone(),
                label: label.clone(),
            })
            .collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BTreeMap<Cell, RelationLabel>, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        Ok(entries
            .into_iter()
            .map(|e| ((e.row, e.col), e.label))
            .collect())
    }
}

impl AdjacencyMatrix {
    pub fn size(&self) -> usize {
        self.axis.len()
    }

    pub fn get(&self, row: &EntityId, col: &EntityId) -> Option<&RelationLabel> {
        self.cells.get(&(row.clone(), col.clone()))
    }

    pub fn entry(&self, id: &EntityId) -> Option<&AxisEntry> {
        self.axis.iter().find(|e| &e.id == id)
    }

    pub fn kind_of(&self, id: &EntityId) -> Option<EntityKind> {
        self.entry(id).map(|e| e.kind)
    }

    /// Swimlane the action is allocated to.
    pub fn lane_of(&self, action: &EntityId) -> Option<&EntityId> {
        self.cells
            .iter()
            .find(|((row, _), label)| row == action && label.kind == RelationKind::Allocation)
            .map(|((_, col), _)| col)
    }

    pub fn to_grid(&self) -> DenseGrid {
        let ids: Vec<&EntityId> = self.axis.iter().map(|e| &e.id).collect();
        let rows = ids
            .iter()
            .map(|r| {
                ids.iter()
                    .map(|c| {
                        self.get(r, c)
                            .map(RelationLabel::display)
                            .unwrap_or_else(|| EMPTY.to_string())
                    })
                    .collect()
            })
            .collect();
        let headers: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
        DenseGrid {
            row_headers: headers.clone(),
            col_headers: headers,
            cells: rows,
        }
    }
}

pub const EMPTY: &str = "·";

/// Q: entity-to-entity links from the Use Case side (rows) to the
/// Activity side (columns). One-to-many is allowed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TraceMatrix {
    links: BTreeSet<Cell>,
}

impl TraceMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, n: EntityId, m: EntityId) -> bool {
        self.links.insert((n, m))
    }

    pub fn remove(&mut self, n: &EntityId, m: &EntityId) -> bool {
        self.links.remove(&(n.clone(), m.clone()))
    }

    pub fn contains(&self, n: &EntityId, m: &EntityId) -> bool {
        self.links.contains(&(n.clone(), m.clone()))
    }

    pub fn links(&self) -> impl Iterator<Item = &Cell> {
        self.links.iter()
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn images(&self, n: &EntityId) -> BTreeSet<EntityId> {
        self.links
            .iter()
            .filter(|(a, _)| a == n)
            .map(|(_, b)| b.clone())
            .collect()
    }

    pub fn preimages(&self, m: &EntityId) -> BTreeSet<EntityId> {
        self.links
            .iter()
            .filter(|(_, b)| b == m)
            .map(|(a, _)| a.clone())
            .collect()
    }

    /// Drop every link touching `id` on either side; returns the removed links.
    pub fn remove_entity(&mut self, id: &EntityId) -> Vec<Cell> {
        let removed: Vec<Cell> = self
            .links
            .iter()
            .filter(|(a, b)| a == id || b == id)
            .cloned()
            .collect();
        for link in &removed {
            self.links.remove(link);
        }
        removed
    }

    pub fn to_grid(&self, n: &AdjacencyMatrix, m: &AdjacencyMatrix) -> DenseGrid {
        let cells = n
            .axis
            .iter()
            .map(|r| {
                m.axis
                    .iter()
                    .map(|c| {
                        if self.contains(&r.id, &c.id) { "1" } else { EMPTY }.to_string()
                    })
                    .collect()
            })
            .collect();
        DenseGrid {
            row_headers: n.axis.iter().map(|e| e.id.to_string()).collect(),
            col_headers: m.axis.iter().map(|e| e.id.to_string()).collect(),
            cells,
        }
    }
}

/// Fully expanded matrix for display.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseGrid {
    pub row_headers: Vec<String>,
    pub col_headers: Vec<String>,
    pub cells: Vec<Vec<String>>,
}

impl DenseGrid {
    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let width = |s: &str| s.chars().count();
        let head_w = self.row_headers.iter().map(|h| width(h)).max().unwrap_or(0);
        let col_w: Vec<usize> = self
            .col_headers
            .iter()
            .enumerate()
            .map(|(j, h)| {
                self.cells
                    .iter()
                    .map(|row| width(&row[j]))
                    .chain(std::iter::once(width(h)))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let pad = |s: &str, w: usize| format!("{s}{}", " ".repeat(w - width(s)));
        let line = |head: &str, cells: &[String]| {
            let mut out = pad(head, head_w);
            for (cell, w) in cells.iter().zip(&col_w) {
                out.push_str("  ");
                out.push_str(&pad(cell, *w));
            }
            out.trim_end().to_string()
        };
        let mut out = line("", &self.col_headers);
        out.push('\n');
        for (head, row) in self.row_headers.iter().zip(&self.cells) {
            out.push_str(&line(head, row));
            out.push('\n');
        }
        out
    }
}

pub fn model_to_matrix(model: &Model) -> AdjacencyMatrix {
    let axis = model
        .entities()
        .map(|e| AxisEntry {
            id: e.id.clone(),
            kind: e.kind,
            label: e.label.clone(),
        })
        .collect();
    let cells = model
        .relations()
        .map(|r| {
            (
                (r.source.clone(), r.target.clone()),
                RelationLabel {
                    id: r.id.clone(),
                    kind: r.kind,
                    semantics: r.semantics.clone(),
                    direction: r.direction,
                },
            )
        })
        .collect();
    AdjacencyMatrix {
        metamodel: model.metamodel,
        stage: model.stage,
        axis,
        cells,
    }
}

pub fn matrix_to_model(matrix: &AdjacencyMatrix) -> Result<Model> {
    let mut model = Model::new(matrix.metamodel);
    model.stage = matrix.stage;
    for entry in &matrix.axis {
        model.restore_entity(entry.kind, entry.id.clone(), entry.label.clone())?;
    }
    for ((row, col), label) in &matrix.cells {
        let illegal = |detail: String| Error::IllegalCell {
            row: row.clone(),
            col: col.clone(),
            detail,
        };
        if !model.contains(row) || !model.contains(col) {
            return Err(illegal("endpoint not on the axis".into()));
        }
        model
            .insert_relation(
                label.kind,
                row,
                col,
                label.semantics.clone(),
                label.direction,
                Some(label.id.clone()),
            )
            .map_err(|e| illegal(e.to_string()))?;
    }
    Ok(model)
}

/// One way an N cell is realized in M.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub n_relation: Cell,
    pub q_links: (Cell, Cell),
    pub m_relation: Cell,
    /// For associations: the allocation placing the actor-side action in
    /// the actor's lane.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lane_allocation: Option<Cell>,
}

fn system_lanes(n: &AdjacencyMatrix, m: &AdjacencyMatrix, q: &TraceMatrix) -> BTreeSet<EntityId> {
    m.axis
        .iter()
        .filter(|e| e.kind == EntityKind::Swimlane)
        .filter(|e| {
            q.preimages(&e.id)
                .iter()
                .any(|p| n.kind_of(p) == Some(EntityKind::System))
        })
        .map(|e| e.id.clone())
        .collect()
}

pub fn forward_witness(
    n: &AdjacencyMatrix,
    q: &TraceMatrix,
    m: &AdjacencyMatrix,
    n_rel: &Cell,
) -> Option<Witness> {
    let label = n.cells.get(n_rel)?;
    let (yi, yj) = n_rel;
    match label.kind {
        RelationKind::Allocation => {
            for x in q.images(yi) {
                for lane in q.images(yj) {
                    if m.get(&x, &lane).is_some_and(|c| c.kind == RelationKind::Allocation) {
                        return Some(Witness {
                            n_relation: n_rel.clone(),
                            q_links: ((yi.clone(), x.clone()), (yj.clone(), lane.clone())),
                            m_relation: (x, lane),
                            lane_allocation: None,
                        });
                    }
                }
            }
            None
        }
        RelationKind::Association => {
            let (actor, uc) = (yi, yj);
            let sys = system_lanes(n, m, q);
            for actor_lane in q.images(actor) {
                if m.kind_of(&actor_lane) != Some(EntityKind::Swimlane) {
                    continue;
                }
                for x in q.images(uc) {
                    if !m.lane_of(&x).is_some_and(|l| sys.contains(l)) {
                        continue;
                    }
                    for ((a, b), cell) in &m.cells {
                        if cell.kind != RelationKind::Precedence {
                            continue;
                        }
                        let y = if a == &x {
                            b
                        } else if b == &x {
                            a
                        } else {
                            continue;
                        };
                        if m.lane_of(y) == Some(&actor_lane) {
                            return Some(Witness {
                                n_relation: n_rel.clone(),
                                q_links: (
                                    (actor.clone(), actor_lane.clone()),
                                    (uc.clone(), x.clone()),
                                ),
                                m_relation: (a.clone(), b.clone()),
                                lane_allocation: Some((y.clone(), actor_lane.clone())),
                            });
                        }
                    }
                }
            }
            None
        }
        RelationKind::Precedence => None,
    }
}

/// How a candidate endpoint was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Via {
    /// Both endpoints are direct Q-preimages of the M endpoints.
    Direct,
    /// At least one endpoint is the preimage of the lane the action sits in.
    Lane,
}

/// An N relation suggested by an M relation, before filtering.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CandidateRelation {
    pub m_relation: Cell,
    pub m_kind: RelationKind,
    pub semantics: String,
    pub source: EntityId,
    pub source_kind: EntityKind,
    pub target: EntityId,
    pub target_kind: EntityKind,
    pub via: Via,
}

/// Enumerate the N-side preimages of an M relation.
///
/// Allocations map endpoint-wise through Q. For a precedence crossing
/// lanes, an endpoint sitting in an actor's lane is represented by that
/// actor; every other endpoint is represented by its direct Q-preimages.
/// Same-lane precedences use direct preimages only.
pub fn backward_candidates(
    n: &AdjacencyMatrix,
    m: &AdjacencyMatrix,
    q: &TraceMatrix,
    m_rel: &Cell,
) -> Vec<CandidateRelation> {
    let Some(label) = m.cells.get(m_rel) else {
        return Vec::new();
    };
    let (xk, xl) = m_rel;
    let direct = |x: &EntityId| -> Vec<(EntityId, Via)> {
        q.preimages(x).into_iter().map(|p| (p, Via::Direct)).collect()
    };
    let (sources, targets) = match label.kind {
        RelationKind::Precedence => {
            let (lk, ll) = (m.lane_of(xk), m.lane_of(xl));
            let cross = lk.is_some() && ll.is_some() && lk != ll;
            let endpoint = |x: &EntityId, lane: Option<&EntityId>| -> Vec<(EntityId, Via)> {
                if cross {
                    let actors: Vec<(EntityId, Via)> = lane
                        .map(|l| q.preimages(l))
                        .unwrap_or_default()
                        .into_iter()
                        .filter(|p| n.kind_of(p) == Some(EntityKind::Actor))
                        .map(|p| (p, Via::Lane))
                        .collect();
                    if !actors.is_empty() {
                        return actors;
                    }
                }
                direct(x)
            };
            (endpoint(xk, lk), endpoint(xl, ll))
        }
        _ => (direct(xk), direct(xl)),
    };
    let mut out = BTreeSet::new();
    for (s, vs) in &sources {
        for (t, vt) in &targets {
            let (Some(sk), Some(tk)) = (n.kind_of(s), n.kind_of(t)) else {
                continue;
            };
            out.insert(CandidateRelation {
                m_relation: m_rel.clone(),
                m_kind: label.kind,
                semantics: label.semantics.clone(),
                source: s.clone(),
                source_kind: sk,
                target: t.clone(),
                target_kind: tk,
                via: if *vs == Via::Lane || *vt == Via::Lane {
                    Via::Lane
                } else {
                    Via::Direct
                },
            });
        }
    }
    out.into_iter().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FailureCategory {
    /// An N cell with no forward witness.
    UnwitnessedSourceRelation,
    /// A Q link whose row or column entity does not exist.
    DanglingTraceLink,
    /// An M cell neither witnessed, intra-use-case, nor explained by
    /// dropped reinterpretations.
    UnwitnessedTargetRelation,
    /// An entity with no trace link at all.
    UnmappedEntity,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SyncFailure {
    pub category: FailureCategory,
    pub row: EntityId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub col: Option<EntityId>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncVerdict {
    pub synchronized: bool,
    pub failures: Vec<SyncFailure>,
}

/// Whether an M cell stays inside the image of a single use case.
fn intra_use_case(n: &AdjacencyMatrix, q: &TraceMatrix, cell: &Cell, kind: RelationKind) -> bool {
    let use_cases = |x: &EntityId| -> BTreeSet<EntityId> {
        q.preimages(x)
            .into_iter()
            .filter(|p| n.kind_of(p) == Some(EntityKind::UseCase))
            .collect()
    };
    match kind {
        RelationKind::Precedence => !use_cases(&cell.0).is_disjoint(&use_cases(&cell.1)),
        RelationKind::Allocation => !use_cases(&cell.0).is_empty(),
        RelationKind::Association => false,
    }
}

/// Every backward candidate is rejected by the metamodel filter.
fn consistently_dropped(n: &AdjacencyMatrix, m: &AdjacencyMatrix, q: &TraceMatrix, cell: &Cell) -> bool {
    let candidates = backward_candidates(n, m, q, cell);
    !candidates.is_empty()
        && candidates.iter().all(|c| {
            matches!(
                reinterpret_candidate(c),
                Reinterpretation::Drop(
                    DropReason::MetamodelOutOfScope
                        | DropReason::IntraSystemFlow
                        | DropReason::SelfRelation
                )
            )
        })
}

pub fn verify_synchronized(n: &AdjacencyMatrix, m: &AdjacencyMatrix, q: &TraceMatrix) -> SyncVerdict {
    let mut failures = Vec::new();
    let mut witnessed: BTreeSet<Cell> = BTreeSet::new();
    for cell in n.cells.keys() {
        match forward_witness(n, q, m, cell) {
            Some(w) => {
                witnessed.insert(w.m_relation);
                witnessed.extend(w.lane_allocation);
            }
            None => failures.push(SyncFailure {
                category: FailureCategory::UnwitnessedSourceRelation,
                row: cell.0.clone(),
                col: Some(cell.1.clone()),
                detail: format!("no M relation realizes {} → {}", cell.0, cell.1),
            }),
        }
    }
    for (a, b) in q.links() {
        if n.entry(a).is_none() || m.entry(b).is_none() {
            failures.push(SyncFailure {
                category: FailureCategory::DanglingTraceLink,
                row: a.clone(),
                col: Some(b.clone()),
                detail: "trace link references a missing entity".into(),
            });
        }
    }
    for (cell, label) in &m.cells {
        if witnessed.contains(cell)
            || intra_use_case(n, q, cell, label.kind)
            || consistently_dropped(n, m, q, cell)
        {
            continue;
        }
        failures.push(SyncFailure {
            category: FailureCategory::UnwitnessedTargetRelation,
            row: cell.0.clone(),
            col: Some(cell.1.clone()),
            detail: format!("{} {} → {} has no counterpart in N", label.semantics, cell.0, cell.1),
        });
    }
    for e in &n.axis {
        if q.images(&e.id).is_empty() {
            failures.push(SyncFailure {
                category: FailureCategory::UnmappedEntity,
                row: e.id.clone(),
                col: None,
                detail: format!("{} has no image in M", e.id),
            });
        }
    }
    for e in &m.axis {
        if q.preimages(&e.id).is_empty() {
            failures.push(SyncFailure {
                category: FailureCategory::UnmappedEntity,
                row: e.id.clone(),
                col: None,
                detail: format!("{} has no preimage in N", e.id),
            });
        }
    }
    failures.sort();
    SyncVerdict {
        synchronized: failures.is_empty(),
        failures,
    }
}
