//! Interpretation of requirements into models, and the elaboration check.
//!
//! `interpret_usecase` reads subject-verb-object sentences into a Use Case
//! model. `complete_activity` fills an Activity skeleton from event-driven
//! requirements: each requirement contributes a trigger step, a response
//! step and optionally a follow-up step, which are bound to skeleton actions
//! lane by lane and chained into precedences. `verify_composition` checks
//! that every elaboration link is witnessed through the trace matrix.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    semantics, Direction, EntityId, EntityKind, Metamodel, Model, RelationKind,
};
use crate::project::Side;
use crate::requirements::{
    strip_determiners, DependencyKind, DomainDependency, Requirement, RequirementForm,
    RequirementSet,
};
use crate::rosetta::TraceMatrix;
use crate::sync::{Candidate, ClauseContext, DecisionKind, DecisionRequest};
use crate::transform::spawn_action;

/// Minimum content-word overlap for a trigger to be read as the same event
/// as an earlier response.
pub const CHAIN_THRESHOLD: f64 = 0.6;

/// Which model entities each requirement produced.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpretationTrace {
    pub entries: BTreeMap<String, BTreeSet<EntityId>>,
    /// Entities added by hand or by a decision rather than by a requirement.
    #[serde(default)]
    pub manual: BTreeSet<EntityId>,
}

impl InterpretationTrace {
    pub fn record(&mut self, requirement: &str, id: EntityId) {
        self.entries
            .entry(requirement.to_string())
            .or_default()
            .insert(id);
    }

    pub fn produced(&self, requirement: &str) -> BTreeSet<EntityId> {
        self.entries.get(requirement).cloned().unwrap_or_default()
    }

    pub fn mark_manual(&mut self, id: EntityId) {
        self.manual.insert(id);
    }

    pub fn covers(&self, id: &EntityId) -> bool {
        self.manual.contains(id) || self.entries.values().any(|s| s.contains(id))
    }

    pub fn forget(&mut self, id: &EntityId) {
        for set in self.entries.values_mut() {
            set.remove(id);
        }
        self.manual.remove(id);
    }
}

/// Capitalize the first letter of each word, leaving the rest untouched.
pub fn title_case(phrase: &str) -> String {
    phrase
        .split_whitespace()
        .map(|w| {
            let mut chars = w.chars();
            match chars.next() {
                Some(c) => c.to_uppercase().chain(chars).collect(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// I_α: subject-verb-object requirements to a Use Case model.
pub fn interpret_usecase(w: &RequirementSet) -> Result<(Model, InterpretationTrace)> {
    for r in &w.requirements {
        if r.form != RequirementForm::Svo {
            return Err(Error::UnexpectedForm {
                requirement: r.id.clone(),
                expected: "subject-verb-object",
            });
        }
        if !r.subject().eq_ignore_ascii_case(&w.system) {
            return Err(Error::NonSystemSubject {
                requirement: r.id.clone(),
                subject: r.subject().to_string(),
            });
        }
    }
    let mut model = Model::new(Metamodel::UseCase);
    let mut trace = InterpretationTrace::default();
    let system = model.add_entity(EntityKind::System, &w.system)?;
    let mut actors: BTreeMap<String, EntityId> = BTreeMap::new();
    for r in &w.requirements {
        let name = title_case(&strip_determiners(r.object()));
        let actor = match actors.get(&name.to_lowercase()) {
            Some(id) => id.clone(),
            None => {
                let id = model.add_entity(EntityKind::Actor, &name)?;
                actors.insert(name.to_lowercase(), id.clone());
                id
            }
        };
        let uc = model.add_entity(EntityKind::UseCase, title_case(&strip_determiners(r.verb_phrase())))?;
        let sem = match r.clause.preposition.as_deref() {
            Some("from") => semantics::INITIATES,
            _ => semantics::FUNCTIONAL_FLOW,
        };
        model.add_relation(RelationKind::Association, &actor, &uc, sem)?;
        model.add_relation(RelationKind::Allocation, &uc, &system, semantics::ALLOCATED_TO)?;
        for id in [&system, &actor, &uc] {
            trace.record(&r.id, id.clone());
        }
    }
    if w.requirements.is_empty() {
        trace.mark_manual(system);
    }
    Ok((model, trace))
}

const STOPWORDS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "its", "their", "it", "from", "to",
    "for", "of", "in", "on", "at", "by", "with", "against", "and", "or", "shall", "when",
];

const STRANDABLE: &[&str] = &["against", "to", "from", "with", "on", "for", "at", "by", "into", "upon"];

fn stem(word: &str) -> String {
    let w = word.to_lowercase();
    if let Some(base) = w.strip_suffix("ies").filter(|b| b.len() > 2) {
        return format!("{base}y");
    }
    if w.len() > 3 && w.ends_with('s') && !w.ends_with("ss") {
        return w[..w.len() - 1].to_string();
    }
    w
}

/// Normalized bag of content words.
pub fn content_words(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .filter(|w| !STOPWORDS.iter().any(|s| s.eq_ignore_ascii_case(w)))
        .map(stem)
        .collect()
}

/// Jaccard overlap of content words.
pub fn clause_overlap(a: &str, b: &str) -> f64 {
    let (a, b) = (content_words(a), content_words(b));
    let union = a.union(&b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

/// Third-person verb to base form.
fn base_verb(verb: &str) -> String {
    let lower = verb.to_lowercase();
    for suffix in ["sses", "shes", "ches", "xes", "zes"] {
        if lower.ends_with(suffix) {
            return verb[..verb.len() - 2].to_string();
        }
    }
    if lower.ends_with("ies") && lower.len() > 4 {
        return format!("{}y", &verb[..verb.len() - 3]);
    }
    if lower.ends_with('s') && !lower.ends_with("ss") && lower.len() > 2 {
        return verb[..verb.len() - 1].to_string();
    }
    verb.to_string()
}

fn past_participle(verb: &str) -> String {
    if verb.ends_with('e') {
        format!("{verb}d")
    } else {
        format!("{verb}ed")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum StepRole {
    Trigger,
    Response,
    Purpose,
}

#[derive(Clone, Debug)]
struct Step {
    role: StepRole,
    lane: EntityId,
    label: String,
    /// Text compared when chaining.
    clause: String,
}

fn lanes(model: &Model) -> Vec<(EntityId, Vec<String>)> {
    model
        .entities_of(EntityKind::Swimlane)
        .map(|e| {
            (
                e.id.clone(),
                e.label.split_whitespace().map(str::to_lowercase).collect(),
            )
        })
        .collect()
}

/// Lane whose label is the longest word prefix of `words`; returns the lane
/// and the number of words consumed.
fn match_lane(lanes: &[(EntityId, Vec<String>)], words: &[&str]) -> Option<(EntityId, usize)> {
    let lower: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
    lanes
        .iter()
        .filter(|(_, label)| !label.is_empty() && lower.len() >= label.len() && lower[..label.len()] == label[..])
        .max_by_key(|(_, label)| label.len())
        .map(|(id, label)| (id.clone(), label.len()))
}

fn lane_for_subject(lanes: &[(EntityId, Vec<String>)], subject: &str) -> Result<EntityId> {
    let stripped = strip_determiners(subject);
    let words: Vec<&str> = stripped.split_whitespace().collect();
    match_lane(lanes, &words)
        .map(|(id, _)| id)
        .ok_or_else(|| Error::UnknownLane(words.first().copied().unwrap_or(subject).to_string()))
}

fn steps_of(r: &Requirement, lanes: &[(EntityId, Vec<String>)], system: &str) -> Result<Vec<Step>> {
    let mut steps = Vec::new();
    let resp = &r.clause;
    if let Some(trigger) = &r.trigger {
        let stripped = strip_determiners(trigger);
        let words: Vec<&str> = stripped.split_whitespace().collect();
        let (lane, used) = match_lane(lanes, &words).ok_or_else(|| {
            Error::UnknownLane(words.first().copied().unwrap_or("").to_string())
        })?;
        let rest = &words[used..];
        let label = match rest.split_first() {
            Some((verb, tail)) => {
                let mut parts = vec![base_verb(verb)];
                parts.extend(tail.iter().map(|w| w.to_string()));
                parts.join(" ")
            }
            None => String::new(),
        };
        steps.push(Step {
            role: StepRole::Trigger,
            lane,
            label,
            clause: rest.join(" "),
        });
    }
    let subject = if resp.subject.eq_ignore_ascii_case("it") {
        system
    } else {
        resp.subject.as_str()
    };
    let mut clause = resp.verb_phrase.clone();
    if let Some(prep) = &resp.preposition {
        clause.push_str(&format!(" {prep} {}", resp.object));
    }
    steps.push(Step {
        role: StepRole::Response,
        lane: lane_for_subject(lanes, subject)?,
        label: strip_determiners(&resp.verb_phrase),
        clause,
    });
    if let Some(purpose) = &resp.purpose {
        let mut label = strip_determiners(&purpose.action);
        let stranded = label
            .split_whitespace()
            .last()
            .is_some_and(|w| STRANDABLE.iter().any(|p| p.eq_ignore_ascii_case(w)));
        if stranded {
            label.push_str(&format!(" {} value", past_participle(&resp.verb().to_lowercase())));
        }
        steps.push(Step {
            role: StepRole::Purpose,
            lane: lane_for_subject(lanes, &purpose.agent)?,
            clause: label.clone(),
            label,
        });
    }
    Ok(steps)
}

/// Result of filling a skeleton.
#[derive(Clone, Debug, PartialEq)]
pub struct Completion {
    pub model: Model,
    pub trace: InterpretationTrace,
    pub q: TraceMatrix,
    pub decisions: Vec<DecisionRequest>,
}

struct Filler<'a> {
    model: Model,
    q: TraceMatrix,
    trace: InterpretationTrace,
    decisions: Vec<DecisionRequest>,
    /// Actions bound to responses and follow-ups so far, with their clause.
    outcomes: Vec<(EntityId, String)>,
    lanes: &'a [(EntityId, Vec<String>)],
}

impl Filler<'_> {
    fn is_blank(&self, action: &EntityId) -> bool {
        self.model.label_of(action).is_some_and(|l| l.trim().is_empty())
    }

    fn undecided_partner(&self, action: &EntityId) -> Vec<(EntityId, EntityId)> {
        self.model
            .relations_of(RelationKind::Precedence)
            .filter(|r| r.is_undecided() && r.touches(action))
            .map(|r| {
                let other = if &r.source == action { &r.target } else { &r.source };
                (r.id.clone(), other.clone())
            })
            .collect()
    }

    fn blank_actions_in(&self, lane: &EntityId) -> Vec<EntityId> {
        self.model
            .actions_in(lane)
            .into_iter()
            .filter(|a| self.is_blank(a))
            .collect()
    }

    /// Orient `pred → action`, deciding an existing precedence or adding one.
    fn link(&mut self, pred: &EntityId, action: &EntityId) -> Result<()> {
        if pred == action {
            return Ok(());
        }
        let existing = self
            .model
            .relation_linking(pred, action)
            .filter(|r| r.kind == RelationKind::Precedence)
            .map(|r| (r.id.clone(), &r.source == pred, r.is_undecided()));
        match existing {
            Some((id, forward, true)) => self.model.direct_precedence(&id, !forward)?,
            // already directed; an explicit order is never overturned
            Some(_) => {}
            None => {
                self.model.add_precedence(pred, action, semantics::PRECEDES, Direction::Forward)?;
            }
        }
        Ok(())
    }

    fn bind(&mut self, step: &Step, pred: Option<&EntityId>, next_lane: Option<&EntityId>) -> Result<(EntityId, bool)> {
        if let Some(p) = pred {
            let via_pair = self
                .undecided_partner(p)
                .into_iter()
                .map(|(_, other)| other)
                .find(|other| self.model.lane_of(other) == Some(&step.lane) && self.is_blank(other));
            if let Some(x) = via_pair {
                return Ok((x, false));
            }
        }
        let blanks = self.blank_actions_in(&step.lane);
        let paired: Vec<(EntityId, EntityId)> = blanks
            .iter()
            .flat_map(|x| {
                self.undecided_partner(x)
                    .into_iter()
                    .filter(|(_, o)| self.is_blank(o))
                    .map(move |(_, o)| (x.clone(), o))
            })
            .collect();
        let preferred = paired
            .iter()
            .find(|(_, o)| next_lane.is_some() && self.model.lane_of(o) == next_lane)
            .or_else(|| if next_lane.is_none() { paired.first() } else { None });
        if let Some((x, _)) = preferred {
            return Ok((x.clone(), false));
        }
        let x = spawn_action(&mut self.model, &step.lane, "")?;
        Ok((x, true))
    }

    fn chain_target(&mut self, step: &Step, requirement: &str) -> Option<EntityId> {
        let mut scored: Vec<(f64, EntityId)> = self
            .outcomes
            .iter()
            .map(|(id, clause)| (clause_overlap(&step.clause, clause), id.clone()))
            .filter(|(s, _)| *s > 0.0)
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        let (best, id) = scored.first().cloned()?;
        if best >= CHAIN_THRESHOLD {
            return Some(id);
        }
        let mut candidates: Vec<Candidate> = scored
            .iter()
            .map(|(s, id)| Candidate {
                key: format!("match:{id}"),
                description: format!(
                    "same event as {id} \"{}\"",
                    self.model.label_of(id).unwrap_or("")
                ),
                score: Some((s * 100.0).round() as u32),
            })
            .collect();
        candidates.push(Candidate {
            key: "keep".into(),
            description: "a distinct event".into(),
            score: None,
        });
        self.decisions.push(DecisionRequest {
            kind: DecisionKind::MatchClause,
            side: Side::Beta,
            subjects: Vec::new(),
            candidates,
            prompt: format!(
                "Requirement {requirement}: is the trigger \"{}\" the same event as an earlier outcome?",
                step.clause
            ),
            clause: Some(ClauseContext {
                requirement: requirement.to_string(),
                clause: step.clause.clone(),
                lane: step.lane.clone(),
            }),
        });
        None
    }
}

/// I_β completion: fill the skeleton's actions from event-driven
/// requirements and orient its precedences.
pub fn complete_activity(skeleton: &Model, w_beta: &RequirementSet, q: &TraceMatrix) -> Result<Completion> {
    for r in &w_beta.requirements {
        if r.form != RequirementForm::Ears {
            return Err(Error::UnexpectedForm {
                requirement: r.id.clone(),
                expected: "event-driven EARS",
            });
        }
    }
    let lane_index = lanes(skeleton);
    let mut f = Filler {
        model: skeleton.clone(),
        q: q.clone(),
        trace: InterpretationTrace::default(),
        decisions: Vec::new(),
        outcomes: Vec::new(),
        lanes: &lane_index,
    };
    for r in &w_beta.requirements {
        let steps = steps_of(r, f.lanes, &w_beta.system)?;
        let mut pred: Option<EntityId> = None;
        let mut anchor: Option<EntityId> = None;
        let mut spawned = Vec::new();
        let mut pending_match = None;
        for (i, step) in steps.iter().enumerate() {
            let chained = if step.role == StepRole::Trigger {
                let before = f.decisions.len();
                let target = f.chain_target(step, &r.id);
                if f.decisions.len() > before {
                    pending_match = Some(f.decisions.len() - 1);
                }
                target
            } else {
                None
            };
            let action = match chained {
                Some(a) => a,
                None => {
                    let next_lane = steps.get(i + 1).map(|s| &s.lane);
                    let (a, fresh) = f.bind(step, pred.as_ref(), next_lane)?;
                    if fresh {
                        spawned.push(a.clone());
                    }
                    if f.is_blank(&a) {
                        f.model.set_label(&a, step.label.clone());
                    }
                    a
                }
            };
            if let Some(p) = &pred {
                f.link(p, &action)?;
            }
            if let Some(idx) = pending_match.take() {
                f.decisions[idx].subjects.insert(0, action.clone());
            }
            if anchor.is_none() {
                anchor = f.q.preimages(&action).into_iter().next();
            }
            if step.role != StepRole::Trigger {
                f.outcomes.push((action.clone(), step.clause.clone()));
            }
            f.trace.record(&r.id, action.clone());
            if let Some(lane) = f.model.lane_of(&action).cloned() {
                f.trace.record(&r.id, lane);
            }
            pred = Some(action);
        }
        // extra actions realize the same use case; without one they stay
        // unmapped and are offered for mapping by the caller
        if let Some(u) = &anchor {
            for a in spawned {
                f.q.insert(u.clone(), a);
            }
        }
    }
    let undecided: Vec<(EntityId, EntityId)> = f
        .model
        .relations_of(RelationKind::Precedence)
        .filter(|r| r.is_undecided())
        .map(|r| (r.source.clone(), r.target.clone()))
        .collect();
    for (a, b) in undecided {
        f.decisions.push(DecisionRequest {
            kind: DecisionKind::DirectPrecedence,
            side: Side::Beta,
            subjects: vec![a.clone(), b.clone()],
            candidates: vec![
                Candidate {
                    key: "forward".into(),
                    description: format!("{a} precedes {b}"),
                    score: None,
                },
                Candidate {
                    key: "reverse".into(),
                    description: format!("{b} precedes {a}"),
                    score: None,
                },
            ],
            prompt: format!("Which way does the flow between {a} and {b} run?"),
            clause: None,
        });
    }
    f.model.refresh_stage();
    Ok(Completion {
        model: f.model,
        trace: f.trace,
        q: f.q,
        decisions: f.decisions,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositionFailure {
    pub requirement: String,
    pub entity: EntityId,
    pub elaboration: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub checked: usize,
    pub failures: Vec<CompositionFailure>,
}

/// Check that every elaboration link rα → rβ is witnessed: each entity
/// interpreted from rα has a trace image among the entities interpreted
/// from rβ. A use case needs an image action in a System lane, i.e. the
/// system-side behaviour must survive in the elaboration.
pub fn verify_composition(
    dep: &DomainDependency,
    trace_alpha: &InterpretationTrace,
    trace_beta: &InterpretationTrace,
    q: &TraceMatrix,
    alpha: &Model,
    beta: &Model,
) -> Result<VerificationReport> {
    if dep.kind != DependencyKind::SubsetAlphaInBeta {
        return Err(Error::UnsupportedDependencyKind(dep.kind));
    }
    let system_lane = |action: &EntityId| {
        beta.lane_of(action).is_some_and(|lane| {
            q.preimages(lane)
                .iter()
                .any(|p| alpha.kind_of(p) == Some(EntityKind::System))
        })
    };
    let mut failures = Vec::new();
    let mut checked = 0;
    for link in &dep.links {
        let elaborated = trace_beta.produced(&link.target);
        for entity in trace_alpha.produced(&link.source) {
            checked += 1;
            let witnessed = q.images(&entity).iter().any(|x| {
                elaborated.contains(x)
                    && (alpha.kind_of(&entity) != Some(EntityKind::UseCase) || system_lane(x))
            });
            if !witnessed {
                failures.push(CompositionFailure {
                    requirement: link.source.clone(),
                    entity,
                    elaboration: link.target.clone(),
                });
            }
        }
    }
    Ok(VerificationReport {
        passed: failures.is_empty(),
        checked,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecg;
    use crate::requirements::ElaborationLink;
    use crate::transform::{compose_with_interpretation, semantic_transform};
    use proptest::prelude::*;

    fn skeleton() -> (Model, Model, TraceMatrix) {
        let (alpha, _) = interpret_usecase(&ecg::w_alpha()).unwrap();
        let (s, q) = semantic_transform(&alpha).unwrap();
        let s = compose_with_interpretation(&s, &alpha, &q).unwrap();
        (alpha, s, q)
    }

    #[test]
    fn usecase_interpretation_matches_figure() {
        let (model, trace) = interpret_usecase(&ecg::w_alpha()).unwrap();
        assert!(model.same_graph(&ecg::use_case_model()));
        assert_eq!(model.label_of(&"A2".into()), Some("Engine"));
        assert_eq!(model.label_of(&"U1".into()), Some("Receive Torque Demand"));
        let r1: Vec<String> = trace.produced("R1").iter().map(|e| e.to_string()).collect();
        assert_eq!(r1, ["A1", "S", "U1"]);
        assert!(model.check_conformance().is_empty());
    }

    #[test]
    fn empty_set_gives_system_only() {
        let (model, _) = interpret_usecase(&RequirementSet::new("W", "ECG")).unwrap();
        assert_eq!(model.entities().count(), 1);
        assert_eq!(model.kind_of(&"S".into()), Some(EntityKind::System));
    }

    #[test]
    fn shared_object_dedups_actor() {
        let mut w = RequirementSet::new("W", "ECG");
        w.push("R1", "ECG shall receive torque demand from ADAS").unwrap();
        w.push("R2", "ECG shall send status to adas").unwrap();
        let (m, _) = interpret_usecase(&w).unwrap();
        assert_eq!(m.entities_of(EntityKind::Actor).count(), 1);
        assert_eq!(m.entities_of(EntityKind::UseCase).count(), 2);
        assert_eq!(m.relations_of(RelationKind::Association).count(), 2);
    }

    #[test]
    fn foreign_subject_is_rejected() {
        let mut w = RequirementSet::new("W", "ECG");
        w.push("R1", "Gateway shall forward torque demand to ECG").unwrap();
        assert_eq!(
            interpret_usecase(&w).unwrap_err(),
            Error::NonSystemSubject {
                requirement: "R1".into(),
                subject: "Gateway".into()
            }
        );
    }

    #[test]
    fn completion_reproduces_the_activity_figure() {
        let (_, s, q) = skeleton();
        let c = complete_activity(&s, &ecg::w_beta(), &q).unwrap();
        let labels: Vec<(String, String)> = c
            .model
            .entities_of(EntityKind::Action)
            .map(|e| (e.id.to_string(), e.label.clone()))
            .collect();
        assert_eq!(
            labels,
            [
                ("a1".to_string(), "make torque demand".to_string()),
                ("a2".into(), "receive torque demand".into()),
                ("a3".into(), "determine Engine torque".into()),
                ("a4".into(), "calibrate against determined value".into()),
            ]
        );
        let mut prec: Vec<(String, String)> = c
            .model
            .relations_of(RelationKind::Precedence)
            .map(|r| {
                assert_eq!(r.direction, Some(Direction::Forward));
                (r.source.to_string(), r.target.to_string())
            })
            .collect();
        prec.sort();
        assert_eq!(
            prec,
            [
                ("a1".to_string(), "a2".to_string()),
                ("a2".into(), "a3".into()),
                ("a3".into(), "a4".into())
            ]
        );
        assert!(c.decisions.is_empty());
        assert_eq!(c.model.stage, crate::model::Stage::Populated);
        assert!(c.model.check_conformance().is_empty());
        assert_eq!(c.q, q);
        assert!(ecg::activity_model().same_graph(&c.model));
    }

    #[test]
    fn completion_without_requirements_asks_for_directions() {
        let (_, s, q) = skeleton();
        let c = complete_activity(&s, &RequirementSet::new("W", "ECG"), &q).unwrap();
        assert!(c.model.same_content(&s));
        assert_eq!(c.decisions.len(), 2);
        assert!(c
            .decisions
            .iter()
            .all(|d| d.kind == DecisionKind::DirectPrecedence));
    }

    #[test]
    fn unknown_trigger_subject() {
        let (_, s, q) = skeleton();
        let mut w = RequirementSet::new("W", "ECG");
        w.push("R9", "When Brake pedal is pressed, the ECG shall cut torque.").unwrap();
        assert_eq!(
            complete_activity(&s, &w, &q).unwrap_err(),
            Error::UnknownLane("Brake".into())
        );
    }

    #[test]
    fn weak_overlap_asks_instead_of_guessing() {
        let (_, s, q) = skeleton();
        let mut w = RequirementSet::new("W", "ECG");
        w.push("R1'", "When ADAS makes a torque demand, the ECG shall receive this torque demand from ADAS.").unwrap();
        w.push("R2'", "When ECG validates torque limits, it shall determine an Engine torque for the engine to calibrate against.").unwrap();
        let c = complete_activity(&s, &w, &q).unwrap();
        let m: Vec<_> = c
            .decisions
            .iter()
            .filter(|d| d.kind == DecisionKind::MatchClause)
            .collect();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].candidates[0].key, "match:a2");
        assert_eq!(m[0].candidates.last().unwrap().key, "keep");
    }

    #[test]
    fn overlap_measure() {
        assert_eq!(
            clause_overlap("receives torque demand from ADAS", "receive this torque demand from ADAS"),
            1.0
        );
        assert_eq!(clause_overlap("", ""), 0.0);
        assert!(clause_overlap("validates torque limits", "receive torque demand from ADAS") < CHAIN_THRESHOLD);
    }

    fn ecg_links() -> DomainDependency {
        let links: BTreeSet<_> = [ElaborationLink::new("R1", "R1'"), ElaborationLink::new("R2", "R2'")]
            .into_iter()
            .collect();
        crate::requirements::derive_domain_dependency(&ecg::w_alpha(), &ecg::w_beta(), &links).unwrap()
    }

    #[test]
    fn composition_passes_and_fails_on_missing_trace() {
        let (alpha, ta) = interpret_usecase(&ecg::w_alpha()).unwrap();
        let (s, q) = semantic_transform(&alpha).unwrap();
        let s = compose_with_interpretation(&s, &alpha, &q).unwrap();
        let c = complete_activity(&s, &ecg::w_beta(), &q).unwrap();
        let dep = ecg_links();
        let report = verify_composition(&dep, &ta, &c.trace, &c.q, &alpha, &c.model).unwrap();
        assert!(report.passed, "{:?}", report.failures);
        assert_eq!(report.checked, 6);

        let mut broken = c.q.clone();
        broken.remove(&"U1".into(), &"a2".into());
        let report = verify_composition(&dep, &ta, &c.trace, &broken, &alpha, &c.model).unwrap();
        assert!(!report.passed);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].requirement, "R1");
        assert_eq!(report.failures[0].entity.as_str(), "U1");

        let mut wrong = dep.clone();
        wrong.kind = DependencyKind::Unrelated;
        assert_eq!(
            verify_composition(&wrong, &ta, &c.trace, &c.q, &alpha, &c.model),
            Err(Error::UnsupportedDependencyKind(DependencyKind::Unrelated))
        );
        let empty = DomainDependency {
            kind: DependencyKind::SubsetAlphaInBeta,
            links: BTreeSet::new(),
        };
        assert!(verify_composition(&empty, &ta, &c.trace, &c.q, &alpha, &c.model).unwrap().passed);
    }

    fn svo_corpus() -> impl Strategy<Value = Vec<(String, Option<&'static str>)>> {
        prop::collection::vec(
            (
                prop::sample::select(vec!["receive", "send", "monitor", "govern", "limit"]),
                prop::sample::select(vec!["torque", "speed demand", "status", "fault code"]),
                prop::option::of(prop::sample::select(vec!["ADAS", "adas", "Engine", "the Driver", "Brake Unit"])),
                prop::sample::select(vec!["from", "to"]),
            )
                .prop_map(|(v, o, actor, p)| match actor {
                    Some(a) => (format!("ECG shall {v} {o} {p} {a}"), Some(a)),
                    None => (format!("ECG shall {v} {o}"), None),
                }),
            0..8,
        )
    }

    proptest! {
        #[test]
        fn usecase_cardinalities(corpus in svo_corpus()) {
            let mut w = RequirementSet::new("W", "ECG");
            for (i, (text, _)) in corpus.iter().enumerate() {
                w.push(&format!("R{i}"), text).unwrap();
            }
            let (m, _) = interpret_usecase(&w).unwrap();
            let distinct: BTreeSet<String> = w
                .requirements
                .iter()
                .map(|r| strip_determiners(r.object()).to_lowercase())
                .collect();
            prop_assert_eq!(m.entities_of(EntityKind::UseCase).count(), corpus.len());
            prop_assert_eq!(m.relations_of(RelationKind::Association).count(), corpus.len());
            prop_assert_eq!(m.entities_of(EntityKind::Actor).count(), distinct.len());
            prop_assert!(m.check_conformance().is_empty());
        }

        #[test]
        fn composition_is_anti_monotone_in_q(drop in prop::collection::vec(0usize..16, 0..6)) {
            let (alpha, ta) = interpret_usecase(&ecg::w_alpha()).unwrap();
            let (s, q) = semantic_transform(&alpha).unwrap();
            let s = compose_with_interpretation(&s, &alpha, &q).unwrap();
            let c = complete_activity(&s, &ecg::w_beta(), &q).unwrap();
            let dep = ecg_links();
            let links: Vec<_> = c.q.links().cloned().collect();
            let mut reduced = c.q.clone();
            let mut last = verify_composition(&dep, &ta, &c.trace, &reduced, &alpha, &c.model).unwrap().passed;
            for i in drop {
                let (a, b) = &links[i % links.len()];
                reduced.remove(a, b);
                let now = verify_composition(&dep, &ta, &c.trace, &reduced, &alpha, &c.model).unwrap().passed;
                prop_assert!(!now || last);
                last = now;
            }
        }
    }
}
