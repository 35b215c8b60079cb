//! The persistent workspace and the step-by-step pipeline over it.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::interpret::{
    complete_activity, interpret_usecase, verify_composition, InterpretationTrace,
    VerificationReport,
};
use crate::model::{EntityKind, Metamodel, Model};
use crate::requirements::{
    derive_domain_dependency, DependencyKind, DomainDependency, ElaborationLink, RequirementFile,
    RequirementSet,
};
use crate::rosetta::{model_to_matrix, verify_synchronized, AdjacencyMatrix, SyncVerdict, TraceMatrix};
use crate::sync::{self, DecisionRequest, DeferredRelation, PendingDecision};
use crate::transform::{compose_with_interpretation, semantic_transform};

pub const SCHEMA_VERSION: u32 = 1;

/// Which of the two models an operation addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Alpha,
    Beta,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Alpha => Side::Beta,
            Side::Beta => Side::Alpha,
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Alpha => "alpha",
            Side::Beta => "beta",
        })
    }
}

impl std::str::FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "alpha" => Ok(Side::Alpha),
            "beta" => Ok(Side::Beta),
            other => Err(format!("expected alpha or beta, got {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditEvent {
    pub seq: u64,
    pub revision: u64,
    pub event: String,
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub version: u32,
    pub name: String,
    pub system: String,
    pub w_alpha: Option<RequirementSet>,
    pub w_beta: Option<RequirementSet>,
    pub elaborations: BTreeSet<ElaborationLink>,
    pub model_alpha: Model,
    pub model_beta: Model,
    pub q_links: TraceMatrix,
    pub trace_alpha: InterpretationTrace,
    pub trace_beta: InterpretationTrace,
    pub decisions_pending: Vec<PendingDecision>,
    pub deferred: Vec<DeferredRelation>,
    pub next_decision: u64,
    pub revision: u64,
    pub audit: Vec<AuditEvent>,
}

/// Combined result of the elaboration check and the matrix check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectVerification {
    pub dependency: Option<DependencyKind>,
    pub composition: Option<VerificationReport>,
    pub sync: SyncVerdict,
    pub pending: usize,
}

impl ProjectVerification {
    pub fn synchronized(&self) -> bool {
        self.sync.synchronized && self.composition.as_ref().is_none_or(|c| c.passed)
    }

    pub fn passed(&self) -> bool {
        self.synchronized() && self.pending == 0
    }
}

impl Project {
    pub fn new(name: impl Into<String>, system: impl Into<String>) -> Self {
        let mut p = Self {
            version: SCHEMA_VERSION,
            name: name.into(),
            system: system.into(),
            w_alpha: None,
            w_beta: None,
            elaborations: BTreeSet::new(),
            model_alpha: Model::new(Metamodel::UseCase),
            model_beta: Model::new(Metamodel::Activity),
            q_links: TraceMatrix::new(),
            trace_alpha: InterpretationTrace::default(),
            trace_beta: InterpretationTrace::default(),
            decisions_pending: Vec::new(),
            deferred: Vec::new(),
            next_decision: 1,
            revision: 0,
            audit: Vec::new(),
        };
        p.log("project.created", json!({"name": p.name, "system": p.system}));
        p
    }

    pub fn model(&self, side: Side) -> &Model {
        match side {
            Side::Alpha => &self.model_alpha,
            Side::Beta => &self.model_beta,
        }
    }

    pub fn model_mut(&mut self, side: Side) -> &mut Model {
        match side {
            Side::Alpha => &mut self.model_alpha,
            Side::Beta => &mut self.model_beta,
        }
    }

    pub fn trace_mut(&mut self, side: Side) -> &mut InterpretationTrace {
        match side {
            Side::Alpha => &mut self.trace_alpha,
            Side::Beta => &mut self.trace_beta,
        }
    }

    pub(crate) fn log(&mut self, event: &str, detail: Value) {
        let seq = self.audit.len() as u64 + 1;
        self.audit.push(AuditEvent {
            seq,
            revision: self.revision,
            event: event.to_string(),
            detail,
        });
    }

    /// Record a committed mutation.
    pub(crate) fn commit(&mut self, event: &str, detail: Value) {
        self.revision += 1;
        self.log(event, detail);
    }

    pub(crate) fn enqueue(&mut self, request: DecisionRequest) -> u64 {
        let id = self.next_decision;
        self.next_decision += 1;
        self.log(
            "decision.issued",
            json!({"id": id, "kind": request.kind, "subjects": request.subjects}),
        );
        self.decisions_pending.push(PendingDecision {
            id,
            issued_revision: self.revision,
            request,
        });
        id
    }

    pub fn add_requirements(&mut self, side: Side, file: &RequirementFile) -> Result<()> {
        if !file.system.eq_ignore_ascii_case(&self.system) {
            return Err(Error::SystemMismatch {
                project: self.system.clone(),
                input: file.system.clone(),
            });
        }
        let set = file.parse()?;
        let count = set.len();
        match side {
            Side::Alpha => self.w_alpha = Some(set),
            Side::Beta => self.w_beta = Some(set),
        }
        self.elaborations.extend(file.elaborates.iter().cloned());
        self.commit(
            "requirements.added",
            json!({"set": side, "id": file.id, "count": count}),
        );
        Ok(())
    }

    /// I_α over the alpha requirements. Downstream state is reset.
    pub fn interpret_alpha(&mut self) -> Result<()> {
        let w = self
            .w_alpha
            .as_ref()
            .ok_or_else(|| Error::StepOrder("add alpha requirements first".into()))?;
        let (model, trace) = interpret_usecase(w)?;
        self.model_alpha = model;
        self.trace_alpha = trace;
        self.model_beta = Model::new(Metamodel::Activity);
        self.trace_beta = InterpretationTrace::default();
        self.q_links = TraceMatrix::new();
        self.decisions_pending.clear();
        self.deferred.clear();
        let entities = self.model_alpha.entities().count();
        self.commit("interpret.alpha", json!({"entities": entities}));
        Ok(())
    }

    /// Transformation plus lane naming.
    pub fn transform(&mut self) -> Result<()> {
        if self.model_alpha.is_empty() {
            return Err(Error::StepOrder("interpret alpha first".into()));
        }
        let (skeleton, q) = semantic_transform(&self.model_alpha)?;
        self.model_beta = compose_with_interpretation(&skeleton, &self.model_alpha, &q)?;
        self.q_links = q;
        self.trace_beta = InterpretationTrace::default();
        self.decisions_pending.clear();
        self.deferred.clear();
        let actions = self.model_beta.entities_of(EntityKind::Action).count();
        self.commit("transform", json!({"actions": actions, "trace_links": self.q_links.len()}));
        Ok(())
    }

    /// I_β completion of the skeleton.
    pub fn interpret_beta(&mut self) -> Result<Vec<u64>> {
        let w = self
            .w_beta
            .as_ref()
            .ok_or_else(|| Error::StepOrder("add beta requirements first".into()))?;
        if self.model_beta.entities_of(EntityKind::Swimlane).next().is_none() {
            return Err(Error::StepOrder("run transform first".into()));
        }
        let completion = complete_activity(&self.model_beta, w, &self.q_links)?;
        self.model_beta = completion.model;
        self.trace_beta = completion.trace;
        self.q_links = completion.q;
        self.decisions_pending.clear();
        self.deferred.clear();
        self.commit("interpret.beta", json!({"stage": self.model_beta.stage}));
        let mut issued: Vec<u64> = completion
            .decisions
            .into_iter()
            .map(|d| self.enqueue(d))
            .collect();
        issued.extend(sync::reconcile(self)?);
        Ok(issued)
    }

    /// Replace the elaboration links and classify the dependency.
    pub fn set_links(&mut self, links: BTreeSet<ElaborationLink>) -> Result<DomainDependency> {
        let (wa, wb) = self.requirement_sets()?;
        let dep = derive_domain_dependency(wa, wb, &links)?;
        self.elaborations = links;
        self.commit(
            "dependency",
            json!({"kind": dep.kind, "links": dep.links.len()}),
        );
        Ok(dep)
    }

    fn requirement_sets(&self) -> Result<(&RequirementSet, &RequirementSet)> {
        match (&self.w_alpha, &self.w_beta) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::StepOrder("both requirement sets are needed".into())),
        }
    }

    pub fn dependency(&self) -> Result<Option<DomainDependency>> {
        match self.requirement_sets() {
            Ok((a, b)) => Ok(Some(derive_domain_dependency(a, b, &self.elaborations)?)),
            Err(_) => Ok(None),
        }
    }

    pub fn n_matrix(&self) -> AdjacencyMatrix {
        model_to_matrix(&self.model_alpha)
    }

    pub fn m_matrix(&self) -> AdjacencyMatrix {
        model_to_matrix(&self.model_beta)
    }

    pub fn sync_verdict(&self) -> SyncVerdict {
        verify_synchronized(&self.n_matrix(), &self.m_matrix(), &self.q_links)
    }

    pub fn verify(&self) -> Result<ProjectVerification> {
        let dep = self.dependency()?;
        let composition = match &dep {
            Some(d) if d.kind == DependencyKind::SubsetAlphaInBeta => Some(verify_composition(
                d,
                &self.trace_alpha,
                &self.trace_beta,
                &self.q_links,
                &self.model_alpha,
                &self.model_beta,
            )?),
            _ => None,
        };
        Ok(ProjectVerification {
            dependency: dep.map(|d| d.kind),
            composition,
            sync: self.sync_verdict(),
            pending: self.decisions_pending.len(),
        })
    }

    pub fn pending(&self) -> &[PendingDecision] {
        &self.decisions_pending
    }
}
