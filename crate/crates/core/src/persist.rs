//! Project files: one canonical JSON document per project.

use std::collections::BTreeSet;
use std::fs::{self, File, OpenOptions};
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::EntityId;
use crate::project::{Project, SCHEMA_VERSION};

/// Pretty JSON with a trailing newline. Field order is fixed by the types
/// and every map is ordered, so equal projects give equal bytes.
pub fn to_canonical_json(project: &Project) -> Result<String> {
    let mut text = serde_json::to_string_pretty(project)?;
    text.push('\n');
    Ok(text)
}

pub fn from_json(text: &str) -> Result<Project> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let version = value
        .get("version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::Json("missing integer \"version\"".into()))?;
    if version != u64::from(SCHEMA_VERSION) {
        return Err(Error::SchemaVersionMismatch {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            supported: SCHEMA_VERSION,
        });
    }
    let project: Project = serde_json::from_value(value)?;
    check_integrity(&project)?;
    Ok(project)
}

/// Cross-component references must resolve.
pub fn check_integrity(p: &Project) -> Result<()> {
    let fail = |msg: String| Err(Error::Integrity(msg));
    for (a, b) in p.q_links.links() {
        if !p.model_alpha.contains(a) {
            return fail(format!("trace link ({a}, {b}) references missing {a}"));
        }
        if !p.model_beta.contains(b) {
            return fail(format!("trace link ({a}, {b}) references missing {b}"));
        }
    }
    for model in [&p.model_alpha, &p.model_beta] {
        if let Some(v) = model.check_conformance().first() {
            return fail(format!("{:?} model: {v:?}", model.metamodel));
        }
    }
    let live = |id: &EntityId| p.model_alpha.contains(id) || p.model_beta.contains(id);
    let mut ids = BTreeSet::new();
    for d in &p.decisions_pending {
        if !ids.insert(d.id) || d.id >= p.next_decision {
            return fail(format!("decision id {} is reused", d.id));
        }
        if let Some(s) = d.request.subjects.iter().find(|s| !live(s)) {
            return fail(format!("decision {} is about missing {s}", d.id));
        }
    }
    for d in &p.deferred {
        if !p.model(d.side).contains(&d.source) || !p.model(d.side).contains(&d.target) {
            return fail(format!("deferred relation {} -> {} is dangling", d.source, d.target));
        }
    }
    for (trace, model) in [(&p.trace_alpha, &p.model_alpha), (&p.trace_beta, &p.model_beta)] {
        let mut all = trace.entries.values().flatten().chain(&trace.manual);
        if let Some(id) = all.find(|id| !model.contains(id)) {
            return fail(format!("interpretation trace names missing {id}"));
        }
    }
    if let (Some(wa), Some(wb)) = (&p.w_alpha, &p.w_beta) {
        for link in &p.elaborations {
            if wa.get(&link.source).is_none() || wb.get(&link.target).is_none() {
                return fail(format!(
                    "elaboration link {} -> {} names a missing requirement",
                    link.source, link.target
                ));
            }
        }
    }
    Ok(())
}

/// Write under an exclusive advisory lock; the new content replaces the
/// old file by rename.
pub fn save_project(project: &Project, path: &Path) -> Result<()> {
    let text = to_canonical_json(project)?;
    let guard = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    guard.lock()?;
    let tmp = path.with_extension("tmp");
    let result = (|| -> Result<()> {
        let mut out = File::create(&tmp)?;
        out.write_all(text.as_bytes())?;
        out.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    })();
    guard.unlock()?;
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

pub fn load_project(path: &Path) -> Result<Project> {
    let mut file = File::open(path)?;
    file.lock_shared()?;
    let mut text = String::new();
    let read = file.read_to_string(&mut text);
    file.unlock()?;
    read?;
    from_json(&text)
}
