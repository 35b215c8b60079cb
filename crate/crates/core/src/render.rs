//! Diagram text for Graphviz and PlantUML. Entities and relations are
//! emitted in id order.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::model::{Direction, EntityKind, Metamodel, Model, RelationKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Dot,
    Plantuml,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "dot" => Ok(Format::Dot),
            "plantuml" | "puml" => Ok(Format::Plantuml),
            other => Err(format!("unknown format {other:?}; expected dot or plantuml")),
        }
    }
}

pub fn render(model: &Model, format: Format) -> String {
    match format {
        Format::Dot => to_dot(model),
        Format::Plantuml => to_plantuml(model),
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn shape(kind: EntityKind) -> &'static str {
    match kind {
        EntityKind::System => "box3d",
        EntityKind::Actor => "box",
        EntityKind::UseCase => "ellipse",
        EntityKind::Swimlane => "box",
        EntityKind::Action => "box",
    }
}

pub fn to_dot(model: &Model) -> String {
    let mut out = String::new();
    let name = match model.metamodel {
        Metamodel::UseCase => "usecase",
        Metamodel::Activity => "activity",
    };
    let _ = writeln!(out, "digraph {name} {{");
    out.push_str("  rankdir=LR;\n");
    match model.metamodel {
        Metamodel::UseCase => {
            for e in model.entities() {
                let _ = writeln!(
                    out,
                    "  {} [label={}, shape={}];",
                    quote(e.id.as_str()),
                    quote(&e.label),
                    shape(e.kind)
                );
            }
        }
        Metamodel::Activity => {
            for lane in model.entities_of(EntityKind::Swimlane) {
                let _ = writeln!(out, "  subgraph {} {{", quote(&format!("cluster_{}", lane.id)));
                let _ = writeln!(out, "    label={};", quote(&lane.label));
                for a in model.actions_in(&lane.id) {
                    let label = model.label_of(&a).unwrap_or("");
                    let _ = writeln!(
                        out,
                        "    {} [label={}, shape=box, style=rounded];",
                        quote(a.as_str()),
                        quote(label)
                    );
                }
                out.push_str("  }\n");
            }
            for a in model
                .entities_of(EntityKind::Action)
                .filter(|a| model.lane_of(&a.id).is_none())
            {
                let _ = writeln!(
                    out,
                    "  {} [label={}, shape=box, style=rounded];",
                    quote(a.id.as_str()),
                    quote(&a.label)
                );
            }
        }
    }
    for r in model.relations() {
        let style = match (r.kind, r.direction) {
            (RelationKind::Association, _) => "dir=none".to_string(),
            (RelationKind::Allocation, _) if model.metamodel == Metamodel::Activity => continue,
            (RelationKind::Allocation, _) => "style=dashed".to_string(),
            (RelationKind::Precedence, Some(Direction::Undecided)) => "style=dashed, dir=none".to_string(),
            (RelationKind::Precedence, _) => "style=solid".to_string(),
        };
        let label = if r.is_undecided() {
            format!("{}?", r.semantics)
        } else {
            r.semantics.clone()
        };
        let _ = writeln!(
            out,
            "  {} -> {} [label={}, {style}];",
            quote(r.source.as_str()),
            quote(r.target.as_str()),
            quote(&label)
        );
    }
    out.push_str("}\n");
    out
}

pub fn to_plantuml(model: &Model) -> String {
    let mut out = String::from("@startuml\n");
    match model.metamodel {
        Metamodel::UseCase => {
            out.push_str("left to right direction\n");
            for a in model.entities_of(EntityKind::Actor) {
                let _ = writeln!(out, "actor {} as {}", quote(&a.label), a.id);
            }
            let systems: Vec<_> = model.entities_of(EntityKind::System).collect();
            let allocated = |u: &crate::model::EntityId, s: &crate::model::EntityId| {
                model
                    .relation_between(u, s)
                    .is_some_and(|r| r.kind == RelationKind::Allocation)
            };
            for s in &systems {
                let _ = writeln!(out, "rectangle {} as {} {{", quote(&s.label), s.id);
                for u in model.entities_of(EntityKind::UseCase).filter(|u| allocated(&u.id, &s.id)) {
                    let _ = writeln!(out, "  usecase {} as {}", quote(&u.label), u.id);
                }
                out.push_str("}\n");
            }
            for u in model
                .entities_of(EntityKind::UseCase)
                .filter(|u| !systems.iter().any(|s| allocated(&u.id, &s.id)))
            {
                let _ = writeln!(out, "usecase {} as {}", quote(&u.label), u.id);
            }
            for r in model.relations_of(RelationKind::Association) {
                let _ = writeln!(out, "{} -- {} : {}", r.source, r.target, r.semantics);
            }
        }
        Metamodel::Activity => {
            out.push_str("skinparam packageStyle rectangle\n");
            for lane in model.entities_of(EntityKind::Swimlane) {
                let _ = writeln!(out, "partition {} {{", quote(&lane.label));
                for a in model.actions_in(&lane.id) {
                    let label = model.label_of(&a).unwrap_or("");
                    let _ = writeln!(out, "  rectangle {} as {}", quote(label), a);
                }
                out.push_str("}\n");
            }
            for a in model
                .entities_of(EntityKind::Action)
                .filter(|a| model.lane_of(&a.id).is_none())
            {
                let _ = writeln!(out, "rectangle {} as {}", quote(&a.label), a.id);
            }
            for r in model.relations_of(RelationKind::Precedence) {
                let arrow = if r.is_undecided() { ".." } else { "-->" };
                let _ = writeln!(out, "{} {arrow} {} : {}", r.source, r.target, r.semantics);
            }
        }
    }
    out.push_str("@enduml\n");
    out
}
