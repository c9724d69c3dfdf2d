//! JSON-lines records for obligation reports. One object per line with
//! stable field names: id, kind, provenance, formula, verdict, and an
//! optional counterexample.

use framelogic::hoare::{Obligation, ObligationKind, Verdict};

use crate::print::formula_to_string;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn kind_name(kind: &ObligationKind) -> &'static str {
    match kind {
        ObligationKind::Implication { .. } => "implication",
        ObligationKind::SupportEq { .. } => "support-eq",
        ObligationKind::SupportDisjoint { .. } => "support-disjoint",
        ObligationKind::FrameSideCondition { .. } => "frame-side-condition",
    }
}

fn kind_formula(kind: &ObligationKind) -> String {
    match kind {
        ObligationKind::Implication { lhs, rhs } => {
            format!("({}) => ({})", formula_to_string(lhs), formula_to_string(rhs))
        }
        ObligationKind::SupportEq { lhs, rhs } => {
            format!("Sp({}) = Sp({})", formula_to_string(lhs), formula_to_string(rhs))
        }
        ObligationKind::SupportDisjoint { lhs, rhs } => format!(
            "Sp({}) cap Sp({}) = emptyset",
            formula_to_string(lhs),
            formula_to_string(rhs)
        ),
        ObligationKind::FrameSideCondition { program_vars, frame_vars } => {
            format!("vars {program_vars:?} disjoint from {frame_vars:?}")
        }
    }
}

/// One JSON-lines record for an obligation and its verdict.
pub fn obligation_record(ob: &Obligation, verdict: &Verdict) -> String {
    let (verdict_s, counterexample) = match verdict {
        Verdict::Valid => ("valid".to_string(), None),
        Verdict::Invalid(cx) => (
            "invalid".to_string(),
            Some(format!("{} store={:?}", cx.config, cx.config.store)),
        ),
        Verdict::Inconclusive(why) => (format!("inconclusive: {why}"), None),
    };
    let mut out = format!(
        "{{\"id\":{},\"kind\":\"{}\",\"provenance\":\"{}\",\"formula\":\"{}\",\"verdict\":\"{}\"",
        ob.id,
        kind_name(&ob.kind),
        escape(&ob.provenance),
        escape(&kind_formula(&ob.kind)),
        escape(&verdict_s),
    );
    if let Some(cx) = counterexample {
        out.push_str(&format!(",\"counterexample\":\"{}\"", escape(&cx)));
    }
    out.push('}');
    out
}
