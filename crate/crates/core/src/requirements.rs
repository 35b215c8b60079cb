//! Structured requirement sentences.
//!
//! Two shapes are accepted:
//!
//! ```text
//! svo   := SUBJECT "shall" VERB NP [ ("from"|"to") NP ] [ "for" NP "to" VP ] "."?
//! ears  := "When" CLAUSE "," ["the"] SUBJECT "shall" RESPONSE "."?
//! ```
//!
//! Keywords are case-insensitive. The optional `for <agent> to <action>`
//! tail names a follow-up step performed by another party ("for the engine
//! to calibrate against").

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result};

const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "its", "their",
];

const PASSIVE_AUXILIARIES: &[&str] = &["be", "is", "are", "was", "were", "been", "being"];

const UNSUPPORTED_EARS: &[&str] = &["while", "if", "where"];

pub fn is_determiner(word: &str) -> bool {
    DETERMINERS.iter().any(|d| d.eq_ignore_ascii_case(word))
}

/// Join words after dropping determiners.
pub fn strip_determiners(phrase: &str) -> String {
    phrase
        .split_whitespace()
        .filter(|w| !is_determiner(w))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RequirementForm {
    #[serde(rename = "SVO")]
    Svo,
    #[serde(rename = "EARS")]
    Ears,
}

/// Trailing "for <agent> to <action>" phrase.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Purpose {
    pub raw: String,
    pub agent: String,
    pub action: String,
}

/// Subject-verb-object clause; the whole of an SVO requirement or the
/// response of an EARS one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SvoClause {
    pub subject: String,
    pub verb_phrase: String,
    pub object: String,
    /// Preposition introducing the object, when it came from a trailing
    /// prepositional phrase.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preposition: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purpose: Option<Purpose>,
}

impl SvoClause {
    pub fn verb(&self) -> &str {
        self.verb_phrase.split_whitespace().next().unwrap_or("")
    }

    /// Re-serialize as a sentence without the final period.
    pub fn to_sentence(&self) -> String {
        let mut out = format!("{} shall {}", self.subject, self.verb_phrase);
        if let Some(prep) = &self.preposition {
            out.push_str(&format!(" {prep} {}", self.object));
        }
        if let Some(purpose) = &self.purpose {
            out.push(' ');
            out.push_str(&purpose.raw);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Requirement {
    pub id: String,
    pub raw: String,
    pub form: RequirementForm,
    #[serde(flatten)]
    pub clause: SvoClause,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trigger: Option<String>,
}

impl Requirement {
    pub fn subject(&self) -> &str {
        &self.clause.subject
    }

    pub fn verb_phrase(&self) -> &str {
        &self.clause.verb_phrase
    }

    pub fn object(&self) -> &str {
        &self.clause.object
    }

    /// The response clause of an EARS requirement.
    pub fn response(&self) -> Option<&SvoClause> {
        (self.form == RequirementForm::Ears).then_some(&self.clause)
    }

    /// Replace the pronoun "it" as subject by the declared system name.
    pub fn resolve_pronoun(&mut self, system: &str) {
        if self.clause.subject.eq_ignore_ascii_case("it") {
            self.clause.subject = system.to_string();
        }
    }

    fn with_id(mut self, id: &str) -> Self {
        self.id = id.to_string();
        self
    }
}

#[derive(Clone, Debug)]
struct Token {
    text: String,
    /// 1-based column of the first character.
    col: usize,
    /// Byte range in the source text.
    span: (usize, usize),
}

impl Token {
    fn is(&self, word: &str) -> bool {
        self.text.eq_ignore_ascii_case(word)
    }
}

fn tokenize(raw: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current: Option<(usize, usize)> = None;
    let push_word = |tokens: &mut Vec<Token>, start: usize, col: usize, end: usize| {
        tokens.push(Token {
            text: raw[start..end].to_string(),
            col,
            span: (start, end),
        });
    };
    for (col0, (byte, ch)) in raw.char_indices().enumerate() {
        let col = col0 + 1;
        if ch.is_whitespace() || ch == ',' || ch == '.' || ch == ';' {
            if let Some((start, scol)) = current.take() {
                push_word(&mut tokens, start, scol, byte);
            }
            if !ch.is_whitespace() {
                tokens.push(Token {
                    text: ch.to_string(),
                    col,
                    span: (byte, byte + ch.len_utf8()),
                });
            }
        } else if current.is_none() {
            current = Some((byte, col));
        }
    }
    if let Some((start, scol)) = current {
        push_word(&mut tokens, start, scol, raw.len());
    }
    tokens
}

struct Cursor<'a> {
    raw: &'a str,
    tokens: &'a [Token],
    end_col: usize,
}

impl Cursor<'_> {
    fn error(&self, at: usize, expected: &str) -> ParseError {
        let (column, found) = match self.tokens.get(at) {
            Some(t) => (t.col, Some(t.text.clone())),
            None => (self.end_col, None),
        };
        ParseError {
            requirement: None,
            column,
            expected: expected.to_string(),
            found,
        }
    }

    fn text(&self, range: std::ops::Range<usize>) -> String {
        let slice = &self.tokens[range];
        match (slice.first(), slice.last()) {
            (Some(first), Some(last)) => self.raw[first.span.0..last.span.1].to_string(),
            _ => String::new(),
        }
    }

    fn words(&self, range: std::ops::Range<usize>) -> String {
        self.tokens[range]
            .iter()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn has_content(&self, range: std::ops::Range<usize>) -> bool {
        self.tokens[range].iter().any(|t| !is_determiner(&t.text))
    }

    /// Parse `SUBJECT shall VERB NP [from|to NP] [for NP to VP]` over
    /// `tokens[start..end]`.
    fn clause(&self, start: usize, end: usize) -> Result<SvoClause, ParseError> {
        if let Some(i) = (start..end).find(|&i| !self.tokens[i].text.chars().any(char::is_alphanumeric)) {
            return Err(self.error(i, "a word"));
        }
        let shall = (start..end)
            .find(|&i| self.tokens[i].is("shall"))
            .ok_or_else(|| self.error(end, "\"shall\""))?;
        if shall == start {
            return Err(self.error(start, "a subject"));
        }
        let subject = self.words(start..shall);
        let verb_at = shall + 1;
        if verb_at >= end {
            return Err(self.error(verb_at, "a verb"));
        }
        let verb = &self.tokens[verb_at];
        if PASSIVE_AUXILIARIES.iter().any(|w| verb.is(w)) {
            return Err(self.error(verb_at, "an active verb"));
        }
        let mut tail_end = end;
        let mut purpose = None;
        // "for <agent> to <action>"
        if let Some(f) = (verb_at + 2..end).find(|&i| self.tokens[i].is("for")) {
            if let Some(t) = (f + 2..end).find(|&i| self.tokens[i].is("to")) {
                if t + 1 < end && self.has_content(f + 1..t) {
                    purpose = Some(Purpose {
                        raw: self.text(f..end),
                        agent: strip_determiners(&self.words(f + 1..t)),
                        action: self.words(t + 1..end),
                    });
                    tail_end = f;
                }
            }
        }
        let complement = verb_at + 1..tail_end;
        if complement.is_empty() {
            return Err(self.error(complement.start, "a noun phrase"));
        }
        let pp = complement
            .clone()
            .rev()
            .find(|&i| i > complement.start && (self.tokens[i].is("from") || self.tokens[i].is("to")));
        let (verb_phrase, object, preposition) = match pp {
            Some(p) => {
                if p + 1 >= tail_end || !self.has_content(p + 1..tail_end) {
                    return Err(self.error(p + 1, "a noun phrase"));
                }
                if !self.has_content(complement.start..p) {
                    return Err(self.error(p, "a noun phrase"));
                }
                (
                    self.words(verb_at..p),
                    self.words(p + 1..tail_end),
                    Some(self.tokens[p].text.to_lowercase()),
                )
            }
            None => {
                let head = complement
                    .clone()
                    .find(|&i| !is_determiner(&self.tokens[i].text))
                    .ok_or_else(|| self.error(tail_end, "a noun phrase"))?;
                (
                    self.words(verb_at..tail_end),
                    self.tokens[head].text.clone(),
                    None,
                )
            }
        };
        Ok(SvoClause {
            subject,
            verb_phrase,
            object,
            preposition,
            purpose,
        })
    }
}

/// Token list without the optional final period.
fn body(raw: &str) -> (Vec<Token>, usize) {
    let mut tokens = tokenize(raw);
    if tokens.last().is_some_and(|t| t.text == ".") {
        tokens.pop();
    }
    let end_col = raw.chars().count() + 1;
    (tokens, end_col)
}

pub fn parse_svo(raw: &str) -> Result<Requirement, ParseError> {
    let (tokens, end_col) = body(raw);
    let cursor = Cursor {
        raw,
        tokens: &tokens,
        end_col,
    };
    let clause = cursor.clause(0, tokens.len())?;
    Ok(Requirement {
        id: String::new(),
        raw: raw.to_string(),
        form: RequirementForm::Svo,
        clause,
        trigger: None,
    })
}

pub fn parse_ears(raw: &str) -> Result<Requirement> {
    let (tokens, end_col) = body(raw);
    let cursor = Cursor {
        raw,
        tokens: &tokens,
        end_col,
    };
    let Some(first) = tokens.first() else {
        return Err(cursor.error(0, "\"When\"").into());
    };
    if let Some(kw) = UNSUPPORTED_EARS.iter().find(|kw| first.is(kw)) {
        let mut name = kw.to_string();
        name[..1].make_ascii_uppercase();
        return Err(Error::UnsupportedEarsPattern(name));
    }
    if !first.is("when") {
        return Err(cursor.error(0, "\"When\"").into());
    }
    let comma = tokens
        .iter()
        .position(|t| t.text == ",")
        .ok_or_else(|| cursor.error(tokens.len(), "\",\""))?;
    if comma == 1 {
        return Err(cursor.error(1, "a trigger clause").into());
    }
    let trigger = cursor.text(1..comma);
    let mut start = comma + 1;
    if tokens.get(start).is_some_and(|t| t.is("the")) {
        start += 1;
    }
    let clause = cursor.clause(start, tokens.len())?;
    Ok(Requirement {
        id: String::new(),
        raw: raw.to_string(),
        form: RequirementForm::Ears,
        clause,
        trigger: Some(trigger),
    })
}

/// Parse either form, chosen by the leading keyword.
pub fn parse_requirement(raw: &str) -> Result<Requirement> {
    let lead = raw.split_whitespace().next().unwrap_or("");
    let lead = lead.trim_end_matches([',', '.']);
    if lead.eq_ignore_ascii_case("when") || UNSUPPORTED_EARS.iter().any(|k| lead.eq_ignore_ascii_case(k)) {
        parse_ears(raw)
    } else {
        Ok(parse_svo(raw)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementSet {
    pub id: String,
    pub system: String,
    pub requirements: Vec<Requirement>,
}

impl RequirementSet {
    pub fn new(id: impl Into<String>, system: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            system: system.into(),
            requirements: Vec::new(),
        }
    }

    /// Parse and append one requirement.
    pub fn push(&mut self, id: &str, text: &str) -> Result<&Requirement> {
        if self.get(id).is_some() {
            return Err(Error::DuplicateRequirement(id.to_string()));
        }
        let mut req = parse_requirement(text)
            .map_err(|e| match e {
                Error::Parse(mut p) => {
                    p.requirement = Some(id.to_string());
                    Error::Parse(p)
                }
                other => other,
            })?
            .with_id(id);
        req.resolve_pronoun(&self.system);
        self.requirements.push(req);
        Ok(self.requirements.last().expect("just pushed"))
    }

    pub fn get(&self, id: &str) -> Option<&Requirement> {
        self.requirements.iter().find(|r| r.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.requirements.iter().map(|r| r.id.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.requirements.is_empty()
    }

    pub fn len(&self) -> usize {
        self.requirements.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ElaborationLink {
    pub source: String,
    pub target: String,
}

impl ElaborationLink {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            target: target.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementEntry {
    pub id: String,
    pub text: String,
}

/// On-disk requirement set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementFile {
    pub id: String,
    pub system: String,
    pub requirements: Vec<RequirementEntry>,
    #[serde(default)]
    pub elaborates: Vec<ElaborationLink>,
}

impl RequirementFile {
    pub fn parse(&self) -> Result<RequirementSet> {
        let mut set = RequirementSet::new(&self.id, &self.system);
        for entry in &self.requirements {
            set.push(&entry.id, &entry.text)?;
        }
        Ok(set)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DependencyKind {
    SubsetAlphaInBeta,
    SubsetBetaInAlpha,
    Unrelated,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainDependency {
    pub kind: DependencyKind,
    pub links: BTreeSet<ElaborationLink>,
}

pub fn derive_domain_dependency(
    w_alpha: &RequirementSet,
    w_beta: &RequirementSet,
    links: &BTreeSet<ElaborationLink>,
) -> Result<DomainDependency> {
    for link in links {
        if w_alpha.get(&link.source).is_none() || w_beta.get(&link.target).is_none() {
            return Err(Error::DanglingLink {
                from: link.source.clone(),
                to: link.target.clone(),
            });
        }
    }
    let covered = |ids: Vec<&str>, side: fn(&ElaborationLink) -> &str| {
        let linked: BTreeSet<&str> = links.iter().map(side).collect();
        ids.iter().all(|id| linked.contains(id))
    };
    let kind = if covered(w_alpha.ids().collect(), |l| l.source.as_str()) {
        DependencyKind::SubsetAlphaInBeta
    } else if covered(w_beta.ids().collect(), |l| l.target.as_str()) {
        DependencyKind::SubsetBetaInAlpha
    } else {
        DependencyKind::Unrelated
    };
    Ok(DomainDependency {
        kind,
        links: links.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const R1: &str = "ECG shall receive torque demand from ADAS";
    const R2: &str = "ECG shall govern engine torque";
    const R1P: &str = "When ADAS makes a torque demand, the ECG shall receive this torque demand from ADAS.";
    const R2P: &str = "When ECG receives torque demand from ADAS, it shall determine an Engine torque for the engine to calibrate against.";

    #[test]
    fn svo_with_prepositional_object() {
        let r = parse_svo(R1).unwrap();
        assert_eq!(r.subject(), "ECG");
        assert_eq!(r.verb_phrase(), "receive torque demand");
        assert_eq!(r.object(), "ADAS");
        assert_eq!(r.clause.preposition.as_deref(), Some("from"));
    }

    #[test]
    fn svo_object_from_complement() {
        let r = parse_svo(R2).unwrap();
        assert_eq!(r.subject(), "ECG");
        assert_eq!(r.verb_phrase(), "govern engine torque");
        assert_eq!(r.object(), "engine");
        assert_eq!(r.clause.preposition, None);
    }

    #[test]
    fn passive_voice_is_rejected_with_position() {
        let err = parse_svo("Torque shall be governed").unwrap_err();
        assert_eq!(err.column, 14);
        assert_eq!(err.found.as_deref(), Some("be"));
    }

    #[test]
    fn missing_shall_points_past_the_end() {
        let err = parse_svo("ECG receives torque").unwrap_err();
        assert_eq!(err.column, 20);
        assert_eq!(err.expected, "\"shall\"");
        assert_eq!(err.found, None);
    }

    #[test]
    fn dangling_preposition_needs_noun_phrase() {
        let err = parse_svo("ECG shall receive torque from").unwrap_err();
        assert_eq!(err.expected, "a noun phrase");
        let err = parse_svo("ECG shall").unwrap_err();
        assert_eq!(err.expected, "a verb");
    }

    #[test]
    fn ears_event_driven() {
        let r = parse_ears(R1P).unwrap();
        assert_eq!(r.trigger.as_deref(), Some("ADAS makes a torque demand"));
        let resp = r.response().unwrap();
        assert_eq!(resp.subject, "ECG");
        assert_eq!(resp.verb_phrase, "receive this torque demand");
        assert_eq!(resp.object, "ADAS");
    }

    #[test]
    fn ears_pronoun_resolves_to_system() {
        let mut set = RequirementSet::new("W_beta", "ECG");
        set.push("R2'", R2P).unwrap();
        let r = set.get("R2'").unwrap();
        assert_eq!(r.trigger.as_deref(), Some("ECG receives torque demand from ADAS"));
        assert_eq!(r.subject(), "ECG");
        assert_eq!(r.verb_phrase(), "determine an Engine torque");
        let purpose = r.clause.purpose.as_ref().unwrap();
        assert_eq!(purpose.agent, "engine");
        assert_eq!(purpose.action, "calibrate against");
    }

    #[test]
    fn other_ears_templates_are_rejected() {
        for (text, kw) in [
            ("While in cruise mode, the ECG shall hold torque.", "While"),
            ("If the sensor fails, the ECG shall hold torque.", "If"),
            ("Where a turbo is fitted, the ECG shall limit boost.", "Where"),
        ] {
            assert_eq!(
                parse_requirement(text),
                Err(Error::UnsupportedEarsPattern(kw.into()))
            );
        }
    }

    #[test]
    fn ears_without_comma() {
        let err = parse_ears("When ADAS makes a demand the ECG shall act").unwrap_err();
        assert!(matches!(err, Error::Parse(ParseError { ref expected, .. }) if expected == "\",\""));
    }

    #[test]
    fn parse_error_carries_requirement_id() {
        let mut set = RequirementSet::new("W", "ECG");
        let err = set.push("R9", "Torque shall be governed").unwrap_err();
        assert!(err.to_string().contains("R9"));
        set.push("R1", R1).unwrap();
        assert_eq!(
            set.push("R1", R2).unwrap_err(),
            Error::DuplicateRequirement("R1".into())
        );
    }

    fn sets() -> (RequirementSet, RequirementSet) {
        let mut a = RequirementSet::new("W_alpha", "ECG");
        a.push("R1", R1).unwrap();
        a.push("R2", R2).unwrap();
        let mut b = RequirementSet::new("W_beta", "ECG");
        b.push("R1'", R1P).unwrap();
        b.push("R2'", R2P).unwrap();
        (a, b)
    }

    fn links(pairs: &[(&str, &str)]) -> BTreeSet<ElaborationLink> {
        pairs.iter().map(|(s, t)| ElaborationLink::new(*s, *t)).collect()
    }

    #[test]
    fn dependency_kinds() {
        let (a, b) = sets();
        let full = links(&[("R1", "R1'"), ("R2", "R2'")]);
        assert_eq!(
            derive_domain_dependency(&a, &b, &full).unwrap().kind,
            DependencyKind::SubsetAlphaInBeta
        );
        let partial = links(&[("R1", "R1'")]);
        assert_eq!(
            derive_domain_dependency(&a, &b, &partial).unwrap().kind,
            DependencyKind::Unrelated
        );
        let mut small_beta = RequirementSet::new("W_beta", "ECG");
        small_beta.push("R1'", R1P).unwrap();
        assert_eq!(
            derive_domain_dependency(&a, &small_beta, &partial).unwrap().kind,
            DependencyKind::SubsetBetaInAlpha
        );
        let dangling = links(&[("R1", "R7'")]);
        assert!(matches!(
            derive_domain_dependency(&a, &b, &dangling),
            Err(Error::DanglingLink { .. })
        ));
    }

    fn word() -> impl Strategy<Value = String> {
        prop::sample::select(vec![
            "torque", "demand", "engine", "speed", "value", "sensor", "signal", "brake", "ADAS",
            "pedal", "driver",
        ])
        .prop_map(str::to_string)
    }

    fn np() -> impl Strategy<Value = String> {
        (
            prop::option::of(prop::sample::select(vec!["the", "a", "this"])),
            prop::collection::vec(word(), 1..4),
        )
            .prop_map(|(det, words)| {
                let mut out: Vec<String> = det.into_iter().map(str::to_string).collect();
                out.extend(words);
                out.join(" ")
            })
    }

    fn svo_text() -> impl Strategy<Value = String> {
        (
            prop::sample::select(vec!["ECG", "Gateway", "Brake Controller"]),
            prop::sample::select(vec!["receive", "send", "govern", "determine", "monitor"]),
            np(),
            prop::option::of((prop::sample::select(vec!["from", "to"]), np())),
            prop::option::of((np(), prop::sample::select(vec!["calibrate", "respond", "act on"]))),
            "[ ]{1,3}",
            any::<bool>(),
        )
            .prop_map(|(s, v, obj, pp, purpose, gap, dot)| {
                let mut out = format!("{s} shall{gap}{v} {obj}");
                if let Some((p, n)) = pp {
                    out.push_str(&format!(" {p} {n}"));
                }
                if let Some((agent, action)) = purpose {
                    out.push_str(&format!(" for {agent} to {action}"));
                }
                if dot {
                    out.push('.');
                }
                out
            })
    }

    fn normalized(text: &str) -> Vec<String> {
        text.trim_end_matches('.')
            .split_whitespace()
            .map(str::to_string)
            .collect()
    }

    proptest! {
        #[test]
        fn svo_reserialization_preserves_tokens(text in svo_text()) {
            let r = parse_svo(&text).unwrap();
            prop_assert_eq!(normalized(&r.clause.to_sentence()), normalized(&text));
            prop_assert!(!r.subject().is_empty());
            prop_assert!(!r.verb_phrase().is_empty());
            prop_assert!(!r.object().is_empty());
        }

        #[test]
        fn ears_response_is_valid_svo(
            trigger in svo_text(),
            response in svo_text(),
        ) {
            let trigger = trigger.trim_end_matches('.').replace(" shall ", " ");
            let text = format!("When {trigger}, the {response}");
            let r = parse_ears(&text).unwrap();
            let resp = r.response().unwrap();
            let again = parse_svo(&resp.to_sentence()).unwrap();
            prop_assert_eq!(&again.clause, resp);
            prop_assert!(!r.trigger.unwrap().is_empty());
        }

        #[test]
        fn dependency_is_monotone_in_links(
            n_alpha in 0usize..5,
            n_beta in 1usize..5,
            base in prop::collection::vec((0usize..5, 0usize..5), 0..10),
            extra in prop::collection::vec((0usize..5, 0usize..5), 0..10),
        ) {
            let mut a = RequirementSet::new("a", "ECG");
            for i in 0..n_alpha {
                a.push(&format!("R{i}"), R1).unwrap();
            }
            let mut b = RequirementSet::new("b", "ECG");
            for i in 0..n_beta {
                b.push(&format!("R{i}'"), R1P).unwrap();
            }
            let mk = |pairs: &[(usize, usize)]| -> BTreeSet<ElaborationLink> {
                pairs
                    .iter()
                    .filter(|(s, _)| *s < n_alpha)
                    .map(|(s, t)| ElaborationLink::new(format!("R{s}"), format!("R{}'", t % n_beta)))
                    .collect()
            };
            let before = mk(&base);
            let mut after = before.clone();
            after.extend(mk(&extra));
            let k0 = derive_domain_dependency(&a, &b, &before).unwrap().kind;
            let k1 = derive_domain_dependency(&a, &b, &after).unwrap().kind;
            if k0 == DependencyKind::SubsetAlphaInBeta {
                prop_assert_eq!(k1, DependencyKind::SubsetAlphaInBeta);
            }
        }
    }
}
