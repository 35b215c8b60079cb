//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Randomized checks use fixed seeds.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use msync_core::interpret::{complete_activity, interpret_usecase, verify_composition};
use msync_core::persist::{from_json, to_canonical_json};
use msync_core::requirements::derive_domain_dependency;
use msync_core::rosetta::{backward_candidates, forward_witness, matrix_to_model, model_to_matrix};
use msync_core::sync::{apply_changeset, resolve_decision, ChangeOp, ChangeSet, DecisionKind, DecisionResolution, DropReason};
use msync_core::transform::{compose_with_interpretation, semantic_transform};
use msync_core::{
    ecg, AdjacencyMatrix, DependencyKind, Direction, EntityId, EntityKind, Metamodel, Model, Project,
    RelationKind, Side, Stage, TraceMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;
type CheckFn = fn() -> Check;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn id(s: &str) -> EntityId {
    EntityId::new(s)
}

fn cell(a: &str, b: &str) -> (EntityId, EntityId) {
    (id(a), id(b))
}

fn labels(m: &Model, kind: EntityKind) -> Vec<String> {
    m.entities_of(kind).map(|e| e.label.clone()).collect()
}

fn c1_use_case_interpretation() -> Check {
    let (model, _) = interpret_usecase(&ecg::w_alpha()).map_err(|e| e.to_string())?;
    ensure!(labels(&model, EntityKind::System) == ["ECG"], "systems {:?}", labels(&model, EntityKind::System));
    ensure!(labels(&model, EntityKind::Actor) == ["ADAS", "Engine"], "actors {:?}", labels(&model, EntityKind::Actor));
    ensure!(
        labels(&model, EntityKind::UseCase) == ["Receive Torque Demand", "Govern Engine Torque"],
        "use cases {:?}",
        labels(&model, EntityKind::UseCase)
    );
    ensure!(model.relations_of(RelationKind::Association).count() == 2, "association count");
    ensure!(model.relations_of(RelationKind::Allocation).count() == 2, "allocation count");
    for (a, u) in [("A1", "U1"), ("A2", "U2")] {
        ensure!(
            model.relation_linking(&id(a), &id(u)).is_some_and(|r| r.kind == RelationKind::Association),
            "missing association {a}-{u}"
        );
    }
    ensure!(model.same_graph(&ecg::use_case_model()), "graph differs from the expected Use Case model");
    Ok(())
}

fn c2_skeleton() -> Check {
    let alpha = ecg::use_case_model();
    let (skeleton, q) = semantic_transform(&alpha).map_err(|e| e.to_string())?;
    let named = compose_with_interpretation(&skeleton, &alpha, &q).map_err(|e| e.to_string())?;
    let mut lanes = labels(&named, EntityKind::Swimlane);
    lanes.sort();
    ensure!(lanes == ["ADAS", "ECG", "Engine"], "lanes {lanes:?}");
    let actions = labels(&named, EntityKind::Action);
    ensure!(actions.len() == 4 && actions.iter().all(String::is_empty), "actions {actions:?}");
    ensure!(named.relations_of(RelationKind::Allocation).count() == 4, "allocations");
    let precedences: Vec<_> = named.relations_of(RelationKind::Precedence).collect();
    ensure!(
        precedences.len() == 2 && precedences.iter().all(|r| r.direction == Some(Direction::Undecided)),
        "precedences {precedences:?}"
    );
    for (n, m) in [("S", "LS"), ("A1", "LA1"), ("A2", "LA2")] {
        ensure!(q.images(&id(n)) == BTreeSet::from([id(m)]), "entity link {n}");
    }
    ensure!(q.images(&id("U1")) == BTreeSet::from([id("a1"), id("a2")]), "U1 images");
    ensure!(q.images(&id("U2")) == BTreeSet::from([id("a3"), id("a4")]), "U2 images");
    ensure!(q.len() == 7, "Q has {} links", q.len());
    Ok(())
}

fn c3_completion_and_matrices() -> Check {
    let alpha = ecg::use_case_model();
    let (skeleton, q) = semantic_transform(&alpha).map_err(|e| e.to_string())?;
    let named = compose_with_interpretation(&skeleton, &alpha, &q).map_err(|e| e.to_string())?;
    let done = complete_activity(&named, &ecg::w_beta(), &q).map_err(|e| e.to_string())?;
    ensure!(done.decisions.is_empty(), "completion asked {} questions", done.decisions.len());
    let m = model_to_matrix(&done.model);
    let n = model_to_matrix(&alpha);
    ensure!(m.size() == 7, "M is {}x{}", m.size(), m.size());
    ensure!(n.size() == 5, "N is {}x{}", n.size(), n.size());
    ensure!(n.cells.len() == 4, "N has {} cells", n.cells.len());
    let allocs = m.cells.values().filter(|l| l.kind == RelationKind::Allocation).count();
    ensure!(allocs == 4, "M has {allocs} allocations");
    let chain: BTreeSet<_> = m
        .cells
        .iter()
        .filter(|(_, l)| l.kind == RelationKind::Precedence && l.direction == Some(Direction::Forward))
        .map(|(c, _)| c.clone())
        .collect();
    ensure!(
        chain == BTreeSet::from([cell("a1", "a2"), cell("a2", "a3"), cell("a3", "a4")]),
        "precedences {chain:?}"
    );
    ensure!(m.cells.len() == 7, "M has {} cells", m.cells.len());
    ensure!(done.model.same_graph(&ecg::activity_model()), "completed model differs from the expected one");
    let verdict = msync_core::rosetta::verify_synchronized(&n, &m, &done.q);
    ensure!(verdict.synchronized, "not synchronized: {:?}", verdict.failures);
    let w = forward_witness(&n, &done.q, &m, &cell("U1", "S")).ok_or("no witness for (U1, S)")?;
    ensure!(w.m_relation == cell("a2", "LS"), "witness of (U1, S) is {:?}", w.m_relation);
    ensure!(w.q_links == (cell("U1", "a2"), cell("S", "LS")), "witness links {:?}", w.q_links);
    Ok(())
}

fn c4_dependency_and_composition() -> Check {
    let p = ecg::baseline_project();
    let links = ecg::elaboration_links().into_iter().collect();
    let dep = derive_domain_dependency(&ecg::w_alpha(), &ecg::w_beta(), &links).map_err(|e| e.to_string())?;
    ensure!(dep.kind == DependencyKind::SubsetAlphaInBeta, "dependency {:?}", dep.kind);
    let check = |q: &TraceMatrix| {
        verify_composition(&dep, &p.trace_alpha, &p.trace_beta, q, &p.model_alpha, &p.model_beta)
    };
    let ok = check(&p.q_links).map_err(|e| e.to_string())?;
    ensure!(ok.passed, "composition fails: {:?}", ok.failures);
    let mut q = p.q_links.clone();
    q.remove(&id("U1"), &id("a2"));
    let broken = check(&q).map_err(|e| e.to_string())?;
    ensure!(!broken.passed, "composition passes without (U1, a2)");
    let named: Vec<_> = broken
        .failures
        .iter()
        .map(|f| (f.requirement.as_str(), f.entity.as_str()))
        .collect();
    ensure!(named == [("R1", "U1")], "failures name {named:?}");
    Ok(())
}

fn c5_change_scenario() -> Check {
    let mut p = ecg::baseline_project();
    apply_changeset(&mut p, &ecg::a5_changeset()).map_err(|e| e.to_string())?;
    let pending = p.pending();
    ensure!(pending.len() == 1, "{} decisions pending", pending.len());
    ensure!(pending[0].request.kind == DecisionKind::MapOrCreate, "kind {:?}", pending[0].request.kind);
    let v = p.verify().map_err(|e| e.to_string())?;
    ensure!(!v.synchronized(), "synchronized before the decision");
    let mut res = DecisionResolution::new(pending[0].id, "create_new");
    res.label = Some(ecg::NEW_USE_CASE_LABEL.into());
    let report = resolve_decision(&mut p, &res).map_err(|e| e.to_string())?;
    let n = p.n_matrix();
    ensure!(n.entry(&id("U3")).is_some(), "no U3");
    let has = |a: &str, b: &str, kind: RelationKind, sem: &str| {
        n.get(&id(a), &id(b)).is_some_and(|l| l.kind == kind && l.semantics == sem)
    };
    ensure!(has("U3", "S", RelationKind::Allocation, "allocated to"), "no allocation (U3, S)");
    ensure!(has("A2", "U3", RelationKind::Association, "functional flow"), "no association (A2, U3)");
    ensure!(report.dropped.len() == 1, "{} dropped", report.dropped.len());
    let d = &report.dropped[0];
    ensure!(
        d.reason == DropReason::MetamodelOutOfScope && (d.candidate.source.as_str(), d.candidate.target.as_str()) == ("U1", "U3"),
        "dropped {:?} for ({}, {})",
        d.reason,
        d.candidate.source,
        d.candidate.target
    );
    let v = p.verify().map_err(|e| e.to_string())?;
    ensure!(v.passed(), "not synchronized afterwards: {:?}", v.sync.failures);
    let back = matrix_to_model(&n).map_err(|e| e.to_string())?;
    ensure!(back.same_graph(&ecg::synchronized_use_case_model()), "N differs from the expected synchronized model");
    Ok(())
}

fn random_model(rng: &mut ChaCha8Rng, metamodel: Metamodel) -> Model {
    let mut m = Model::new(metamodel);
    m.stage = if rng.random_bool(0.5) { Stage::Skeleton } else { Stage::Populated };
    let kinds: &[EntityKind] = match metamodel {
        Metamodel::UseCase => &[EntityKind::System, EntityKind::Actor, EntityKind::UseCase],
        Metamodel::Activity => &[EntityKind::Swimlane, EntityKind::Action],
    };
    for i in 0..rng.random_range(0..14) {
        let kind = kinds[rng.random_range(0..kinds.len())];
        if kind == EntityKind::System && m.entities_of(kind).count() > 0 {
            continue;
        }
        m.add_entity(kind, format!("e{i}")).expect("entity");
    }
    let ids: Vec<EntityId> = m.entities().map(|e| e.id.clone()).collect();
    let rel_kinds = [RelationKind::Association, RelationKind::Allocation, RelationKind::Precedence];
    for _ in 0..if ids.is_empty() { 0 } else { rng.random_range(0..24) } {
        let a = &ids[rng.random_range(0..ids.len())];
        let b = &ids[rng.random_range(0..ids.len())];
        let _ = m.add_relation(rel_kinds[rng.random_range(0..3)], a, b, "r");
    }
    m
}

fn c6_round_trips() -> Check {
    for metamodel in [Metamodel::UseCase, Metamodel::Activity] {
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let model = random_model(&mut rng, metamodel);
            ensure!(model.check_conformance().is_empty(), "seed {seed}: generator made a bad model");
            let matrix = model_to_matrix(&model);
            let back = matrix_to_model(&matrix).map_err(|e| format!("seed {seed}: {e}"))?;
            ensure!(back.same_content(&model), "{metamodel:?} seed {seed}: model differs after round trip");
            ensure!(model_to_matrix(&back) == matrix, "{metamodel:?} seed {seed}: matrix differs");
        }
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (i, p) in [ecg::baseline_project(), ecg::after_change(), ecg::after_create_new()].iter().enumerate() {
        let path = dir.path().join(format!("{i}.json"));
        msync_core::persist::save_project(p, &path).map_err(|e| e.to_string())?;
        let first = std::fs::read(&path).map_err(|e| e.to_string())?;
        let loaded = msync_core::persist::load_project(&path).map_err(|e| e.to_string())?;
        msync_core::persist::save_project(&loaded, &path).map_err(|e| e.to_string())?;
        ensure!(std::fs::read(&path).map_err(|e| e.to_string())? == first, "save/load not byte stable");
    }
    Ok(())
}

/// Random conformant Use Case sources: one system, actors, use cases with
/// one or two actors each.
fn random_source(rng: &mut ChaCha8Rng) -> Model {
    let mut m = Model::new(Metamodel::UseCase);
    let s = m.add_entity(EntityKind::System, "Sys").unwrap();
    let actors: Vec<_> = (0..rng.random_range(1..5))
        .map(|i| m.add_entity(EntityKind::Actor, format!("Actor {i}")).unwrap())
        .collect();
    for i in 0..rng.random_range(0..6) {
        let u = m.add_entity(EntityKind::UseCase, format!("Do {i}")).unwrap();
        m.add_relation(RelationKind::Allocation, &u, &s, "allocated to").unwrap();
        let sem = if rng.random_bool(0.5) { "initiates" } else { "functional flow" };
        for _ in 0..rng.random_range(1..3) {
            let a = &actors[rng.random_range(0..actors.len())];
            let _ = m.add_relation(RelationKind::Association, a, &u, sem);
        }
    }
    m
}

/// All N pairs whose endpoints are Q-preimages of the M endpoints, with an
/// endpoint in an actor's lane standing for that actor on cross-lane
/// precedences.
fn oracle(n: &AdjacencyMatrix, m: &AdjacencyMatrix, q: &TraceMatrix, mrel: &(EntityId, EntityId)) -> BTreeSet<(EntityId, EntityId)> {
    let lane = |x: &EntityId| m.lane_of(x).cloned();
    let kind = m.cells[mrel].kind;
    let cross = kind == RelationKind::Precedence
        && lane(&mrel.0).is_some()
        && lane(&mrel.1).is_some()
        && lane(&mrel.0) != lane(&mrel.1);
    let actor_of_lane = |l: &EntityId| -> Option<EntityId> {
        n.axis
            .iter()
            .find(|e| e.kind == EntityKind::Actor && q.contains(&e.id, l))
            .map(|e| e.id.clone())
    };
    let preimages = |x: &EntityId| -> BTreeSet<EntityId> {
        match lane(x).filter(|_| cross).and_then(|l| actor_of_lane(&l).map(|_| l)) {
            Some(l) => n
                .axis
                .iter()
                .filter(|e| e.kind == EntityKind::Actor && q.contains(&e.id, &l))
                .map(|e| e.id.clone())
                .collect(),
            None => n.axis.iter().filter(|e| q.contains(&e.id, x)).map(|e| e.id.clone()).collect(),
        }
    };
    let (ys, yt) = (preimages(&mrel.0), preimages(&mrel.1));
    ys.iter().flat_map(|a| yt.iter().map(move |b| (a.clone(), b.clone()))).collect()
}

fn candidate_set(n: &AdjacencyMatrix, m: &AdjacencyMatrix, q: &TraceMatrix, mrel: &(EntityId, EntityId)) -> BTreeSet<(EntityId, EntityId)> {
    backward_candidates(n, m, q, mrel)
        .into_iter()
        .map(|c| (c.source, c.target))
        .collect()
}

fn c7a_transform_cardinalities() -> Check {
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let source = random_source(&mut rng);
        let (t, q) = semantic_transform(&source).map_err(|e| format!("seed {seed}: {e}"))?;
        let count = |m: &Model, k| m.entities_of(k).count();
        let ucs = count(&source, EntityKind::UseCase);
        let assocs = source.relations_of(RelationKind::Association).count();
        let single = source.entities_of(EntityKind::UseCase).all(|u| {
            source.incident(&u.id).filter(|r| r.kind == RelationKind::Association).count() == 1
        });
        ensure!(
            count(&t, EntityKind::Swimlane) == count(&source, EntityKind::System) + count(&source, EntityKind::Actor),
            "seed {seed}: lane count"
        );
        ensure!(count(&t, EntityKind::Action) == ucs + assocs, "seed {seed}: action count");
        if single {
            ensure!(count(&t, EntityKind::Action) == 2 * ucs, "seed {seed}: |Actions| != 2|UseCases|");
        }
        ensure!(t.relations_of(RelationKind::Allocation).count() == ucs + assocs, "seed {seed}: allocations");
        ensure!(
            t.relations_of(RelationKind::Precedence).filter(|r| r.is_undecided()).count() == assocs,
            "seed {seed}: undecided precedences"
        );
        ensure!(t.check_conformance().is_empty(), "seed {seed}: skeleton not conformant");
        ensure!(source.entities().all(|e| !q.images(&e.id).is_empty()), "seed {seed}: unmapped source entity");
    }
    Ok(())
}

fn c7b_backward_oracle() -> Check {
    let p = ecg::baseline_project();
    let (n, m) = (p.n_matrix(), p.m_matrix());
    for mrel in m.cells.keys() {
        let got = candidate_set(&n, &m, &p.q_links, mrel);
        ensure!(got == oracle(&n, &m, &p.q_links, mrel), "ECG {mrel:?}: {got:?}");
    }
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let source = random_source(&mut rng);
        let (mut beta, mut q) = semantic_transform(&source).map_err(|e| e.to_string())?;
        let actions: Vec<EntityId> = beta.entities_of(EntityKind::Action).map(|e| e.id.clone()).collect();
        if actions.is_empty() {
            continue;
        }
        for _ in 0..rng.random_range(0..6) {
            let a = &actions[rng.random_range(0..actions.len())];
            let b = &actions[rng.random_range(0..actions.len())];
            let _ = beta.add_relation(RelationKind::Precedence, a, b, "precedes");
        }
        let n_ids: Vec<EntityId> = source.entities().map(|e| e.id.clone()).collect();
        for _ in 0..rng.random_range(0..4) {
            q.insert(
                n_ids[rng.random_range(0..n_ids.len())].clone(),
                actions[rng.random_range(0..actions.len())].clone(),
            );
        }
        let (n, m) = (model_to_matrix(&source), model_to_matrix(&beta));
        for mrel in m.cells.keys() {
            let got = candidate_set(&n, &m, &q, mrel);
            ensure!(got == oracle(&n, &m, &q, mrel), "seed {seed} {mrel:?}: {got:?}");
        }
    }
    Ok(())
}

fn c7c_atomicity() -> Check {
    let failures = [
        ChangeOp::DeleteEntity { model: Side::Beta, target: id("a99") },
        ChangeOp::CreateRelation {
            model: Side::Alpha,
            kind: RelationKind::Precedence,
            source: id("U1"),
            target: id("U2"),
            semantics: None,
            direction: None,
        },
        ChangeOp::CreateRelation {
            model: Side::Beta,
            kind: RelationKind::Precedence,
            source: id("a2"),
            target: id("a3"),
            semantics: None,
            direction: None,
        },
    ];
    for base in [ecg::baseline_project(), ecg::after_change()] {
        let before = to_canonical_json(&base).map_err(|e| e.to_string())?;
        for bad in &failures {
            for at in 0..=4 {
                let mut p = base.clone();
                let mut cs = ecg::a5_changeset();
                cs.ops.insert(at, bad.clone());
                ensure!(apply_changeset(&mut p, &cs).is_err(), "injected {bad:?} at {at} was accepted");
                ensure!(to_canonical_json(&p).map_err(|e| e.to_string())? == before, "project changed after failure at {at}");
            }
        }
    }
    Ok(())
}

fn c7d_reversibility() -> Check {
    let original = ecg::baseline_project();
    let mut p = ecg::after_create_new();
    let delete = ChangeSet::new(vec![ChangeOp::DeleteEntity { model: Side::Beta, target: id("a5") }]);
    apply_changeset(&mut p, &delete).map_err(|e| e.to_string())?;
    let d = p.pending().first().cloned().ok_or("no cascade decision")?;
    ensure!(d.request.kind == DecisionKind::CascadeOrphan, "got {:?}", d.request.kind);
    resolve_decision(&mut p, &DecisionResolution::new(d.id, "delete_counterpart")).map_err(|e| e.to_string())?;
    ensure!(p.pending().is_empty(), "decisions left: {}", p.pending().len());
    ensure!(p.n_matrix() == original.n_matrix(), "N differs");
    ensure!(p.m_matrix() == original.m_matrix(), "M differs");
    ensure!(p.q_links == original.q_links, "Q differs");
    Ok(())
}

fn random_create(rng: &mut ChaCha8Rng) -> Vec<ChangeOp> {
    let actions = ["a1", "a2", "a3", "a4"];
    let pick = |rng: &mut ChaCha8Rng, xs: &[&'static str]| id(xs[rng.random_range(0..xs.len())]);
    let rel = |model, kind, source, target| ChangeOp::CreateRelation {
        model,
        kind,
        source,
        target,
        semantics: None,
        direction: None,
    };
    match rng.random_range(0..4) {
        0 => {
            let mut ops = vec![
                ChangeOp::CreateEntity {
                    model: Side::Beta,
                    kind: EntityKind::Action,
                    label: "new step".into(),
                    id: Some(id("a5")),
                },
                rel(Side::Beta, RelationKind::Allocation, id("a5"), pick(rng, &["LS", "LA1", "LA2"])),
                rel(Side::Beta, RelationKind::Precedence, pick(rng, &actions), id("a5")),
            ];
            if rng.random_bool(0.5) {
                ops.push(rel(Side::Beta, RelationKind::Precedence, id("a5"), pick(rng, &actions)));
            }
            ops
        }
        1 => vec![
            ChangeOp::CreateEntity {
                model: Side::Alpha,
                kind: EntityKind::UseCase,
                label: "New Function".into(),
                id: None,
            },
            rel(Side::Alpha, RelationKind::Allocation, id("U3"), id("S")),
            ChangeOp::CreateRelation {
                model: Side::Alpha,
                kind: RelationKind::Association,
                source: pick(rng, &["A1", "A2"]),
                target: id("U3"),
                semantics: Some(if rng.random_bool(0.5) { "initiates" } else { "functional flow" }.into()),
                direction: None,
            },
        ],
        2 => vec![
            ChangeOp::CreateEntity {
                model: Side::Alpha,
                kind: EntityKind::Actor,
                label: "Driver".into(),
                id: None,
            },
            rel(Side::Alpha, RelationKind::Association, id("A3"), pick(rng, &["U1", "U2"])),
        ],
        _ => vec![rel(Side::Beta, RelationKind::Precedence, pick(rng, &actions), pick(rng, &actions))],
    }
}

fn c7e_empty_queue_synchronized() -> Check {
    let mut scenarios = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(3000 + seed);
        let mut p = ecg::baseline_project();
        let before = to_canonical_json(&p).map_err(|e| e.to_string())?;
        let cs = ChangeSet::new(random_create(&mut rng));
        if apply_changeset(&mut p, &cs).is_err() {
            ensure!(to_canonical_json(&p).map_err(|e| e.to_string())? == before, "seed {seed}: rejected change left a trace");
            continue;
        }
        scenarios += 1;
        for _ in 0..40 {
            let Some(d) = p.pending().first().cloned() else { break };
            let choice = rng.random_range(0..d.request.candidates.len()) + 1;
            resolve_decision(&mut p, &DecisionResolution::new(d.id, choice.to_string()))
                .map_err(|e| format!("seed {seed}: {e}"))?;
        }
        ensure!(p.pending().is_empty(), "seed {seed}: decisions never ran out");
        let v = p.sync_verdict();
        ensure!(v.synchronized, "seed {seed}: {:?}", v.failures);
    }
    ensure!(scenarios >= 50, "only {scenarios} scenarios were valid changes");
    Ok(())
}

fn c7_properties() -> Check {
    let parts: [(&str, CheckFn); 5] = [
        ("a", c7a_transform_cardinalities),
        ("b", c7b_backward_oracle),
        ("c", c7c_atomicity),
        ("d", c7d_reversibility),
        ("e", c7e_empty_queue_synchronized),
    ];
    let failed: Vec<String> = parts
        .iter()
        .filter_map(|(tag, f)| f().err().map(|e| format!("({tag}) {e}")))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(failed.join("; "))
    }
}

fn c8_cli_replay() -> Check {
    let golden = std::fs::read_to_string(common::fixture("golden_project.json")).map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let path = dir.path().join("ecg.json");
        common::run_walkthrough(&path, None)?;
        runs.push(std::fs::read_to_string(&path).map_err(|e| e.to_string())?);
    }
    ensure!(runs[0] == runs[1], "two runs differ");
    ensure!(runs[0] == golden, "project file differs from the golden file");
    let project: Project = from_json(&runs[0]).map_err(|e| e.to_string())?;
    ensure!(project.verify().map_err(|e| e.to_string())?.passed(), "replayed project does not verify");
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [(u8, &str, CheckFn); 8] = [
        (1, "use case interpretation", c1_use_case_interpretation),
        (2, "activity skeleton and trace links", c2_skeleton),
        (3, "activity completion and matrices", c3_completion_and_matrices),
        (4, "dependency and composition verification", c4_dependency_and_composition),
        (5, "change scenario end to end", c5_change_scenario),
        (6, "round-trip identities", c6_round_trips),
        (7, "property suites", c7_properties),
        (8, "CLI replay", c8_cli_replay),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(()) => println!("PASS {n} {name}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {n} {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
