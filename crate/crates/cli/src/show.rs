//! Terminal output.

use msync_core::sync::SyncReport;
use msync_core::{PendingDecision, ProjectVerification};
use serde::Serialize;

pub fn json<T: Serialize + ?Sized>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn tags<T: std::fmt::Display>(ids: &[T]) -> String {
    ids.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

pub fn report(r: &SyncReport, as_json: bool) -> anyhow::Result<()> {
    if as_json {
        return json(r);
    }
    println!("revision {}: {} op(s) applied", r.revision, r.applied);
    if !r.created.is_empty() {
        println!("  created   {}", tags(&r.created));
    }
    if !r.deleted.is_empty() {
        println!("  deleted   {}", tags(&r.deleted));
    }
    if !r.relabeled.is_empty() {
        println!("  relabeled {}", tags(&r.relabeled));
    }
    for (n, m) in &r.trace_links {
        println!("  trace     ({n}, {m})");
    }
    for c in r.committed.iter().filter(|c| !c.already_present) {
        println!(
            "  committed {} {:?} {} -> {} \"{}\"",
            c.side, c.kind, c.source, c.target, c.semantics
        );
    }
    for d in &r.dropped {
        println!(
            "  dropped   ({}, {}) from {} -> {}: {}",
            d.candidate.source, d.candidate.target, d.candidate.m_relation.0, d.candidate.m_relation.1, d.reason
        );
    }
    for c in &r.escalated {
        println!("  escalated ({}, {})", c.source, c.target);
    }
    if let Some(v) = &r.verification {
        println!("  synchronized: {}", v.synchronized);
    }
    Ok(())
}

pub fn decisions(pending: &[PendingDecision]) {
    if pending.is_empty() {
        println!("no pending decisions");
        return;
    }
    for d in pending {
        let req = &d.request;
        println!("[{}] {:?} on {} ({}): {}", d.id, req.kind, req.side, tags(&req.subjects), req.prompt);
        for (i, c) in req.candidates.iter().enumerate() {
            match c.score {
                Some(s) => println!("    {}. {} ({}, score {s})", i + 1, c.key, c.description),
                None => println!("    {}. {} ({})", i + 1, c.key, c.description),
            }
        }
    }
}

pub fn verification(v: &ProjectVerification) {
    if let Some(kind) = v.dependency {
        println!("dependency: {kind:?}");
    }
    if let Some(c) = &v.composition {
        println!("composition: {} ({} checked)", if c.passed { "pass" } else { "fail" }, c.checked);
        for f in &c.failures {
            println!("  {} -> {}: {} has no image", f.requirement, f.elaboration, f.entity);
        }
    }
    println!("synchronized: {}", v.sync.synchronized);
    for f in &v.sync.failures {
        match &f.col {
            Some(col) => println!("  {:?} ({}, {col}): {}", f.category, f.row, f.detail),
            None => println!("  {:?} {}: {}", f.category, f.row, f.detail),
        }
    }
    println!("pending decisions: {}", v.pending);
}
