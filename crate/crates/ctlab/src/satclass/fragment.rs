//! A plain-text format for constraint sets.
//!
//! A fragment file is a sequence of sections, each introduced by a header
//! line.  Blank lines and lines starting with `#` are ignored.
//!
//! ```text
//! [COMP]
//! (0 = 0 | S(0) = 0)
//! [PRESERVE]
//! v0 = S(0) | v0=1 | true
//! [BASE]
//! 0 = 0 | - | true
//! [A]
//! 3 7
//! [ETA]
//! 2
//! [BOUND]
//! 6
//! ```
//!
//! `[COMP]` lines each hold one formula.  `[PRESERVE]` and `[BASE]` lines
//! hold `formula | valuation | verdict`, where the valuation is `-` (or
//! empty) for the empty valuation and otherwise comma-separated `vN=M`
//! entries, and the verdict is `true` or `false`.  The formula part may
//! itself contain `|`; the two rightmost pipes separate the fields.  `[A]`
//! holds whitespace- or comma-separated naturals, `[ETA]` the padding size,
//! and `[BOUND]` the witness bound.  Missing sections default to empty,
//! padding 0, and bound 8.

use std::fmt::Write as _;

use crate::syntax::{parse_formula, Valuation};

use super::{ConstraintSet, Occurrence, SatClassError};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Comp,
    Preserve,
    Base,
    ASet,
    Eta,
    Bound,
}

fn err(line: usize, reason: impl Into<String>) -> SatClassError {
    SatClassError::FragmentParse {
        line,
        reason: reason.into(),
    }
}

fn parse_valuation(text: &str, line: usize) -> Result<Valuation, SatClassError> {
    let mut val = Valuation::new();
    let text = text.trim();
    if text.is_empty() || text == "-" {
        return Ok(val);
    }
    for entry in text.split(',') {
        let entry = entry.trim();
        let rest = entry
            .strip_prefix('v')
            .ok_or_else(|| err(line, format!("valuation entry `{entry}` must start with `v`")))?;
        let (var, value) = rest
            .split_once('=')
            .ok_or_else(|| err(line, format!("valuation entry `{entry}` needs `=`")))?;
        let var = var
            .trim()
            .parse::<u64>()
            .map_err(|e| err(line, format!("bad variable index in `{entry}`: {e}")))?;
        let value = value
            .trim()
            .parse::<u64>()
            .map_err(|e| err(line, format!("bad value in `{entry}`: {e}")))?;
        val.set(var, value);
    }
    Ok(val)
}

fn parse_occurrence_line(
    text: &str,
    line: usize,
) -> Result<(Occurrence, bool), SatClassError> {
    let mut fields = text.rsplitn(3, '|');
    let verdict = fields.next().expect("rsplitn yields at least one part");
    let valuation = fields
        .next()
        .ok_or_else(|| err(line, "expected `formula | valuation | verdict`"))?;
    let formula = fields
        .next()
        .ok_or_else(|| err(line, "expected `formula | valuation | verdict`"))?;
    let verdict = match verdict.trim() {
        "true" => true,
        "false" => false,
        other => return Err(err(line, format!("verdict must be true or false, got `{other}`"))),
    };
    let formula =
        parse_formula(formula.trim()).map_err(|e| err(line, format!("bad formula: {e}")))?;
    let valuation = parse_valuation(valuation, line)?;
    let occ = Occurrence::new(formula, valuation)
        .map_err(|e| err(line, format!("inadmissible occurrence: {e}")))?;
    Ok((occ, verdict))
}

fn parse_natural(text: &str, line: usize, what: &str) -> Result<u64, SatClassError> {
    text.trim()
        .parse::<u64>()
        .map_err(|e| err(line, format!("bad {what}: {e}")))
}

/// Parse a fragment file into a [`ConstraintSet`].
pub fn parse_fragment(input: &str) -> Result<ConstraintSet, SatClassError> {
    let mut gamma = ConstraintSet::default();
    let mut section: Option<Section> = None;
    let mut eta: Option<u64> = None;
    let mut bound: Option<u64> = None;
    for (i, raw) in input.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        if let Some(header) = text.strip_prefix('[') {
            let name = header
                .strip_suffix(']')
                .ok_or_else(|| err(line, "unterminated section header"))?;
            section = Some(match name {
                "COMP" => Section::Comp,
                "PRESERVE" => Section::Preserve,
                "BASE" => Section::Base,
                "A" => Section::ASet,
                "ETA" => Section::Eta,
                "BOUND" => Section::Bound,
                other => return Err(err(line, format!("unknown section `[{other}]`"))),
            });
            continue;
        }
        let Some(section) = section else {
            return Err(err(line, "content before the first section header"));
        };
        match section {
            Section::Comp => {
                let formula = parse_formula(text)
                    .map_err(|e| err(line, format!("bad formula: {e}")))?;
                gamma.comp_instances.push(formula);
            }
            Section::Preserve => gamma.preservation.push(parse_occurrence_line(text, line)?),
            Section::Base => gamma.base_truth.push(parse_occurrence_line(text, line)?),
            Section::ASet => {
                for token in text.split(|c: char| c == ',' || c.is_whitespace()) {
                    if token.is_empty() {
                        continue;
                    }
                    gamma.a_set.insert(parse_natural(token, line, "set element")?);
                }
            }
            Section::Eta => {
                if eta.is_some() {
                    return Err(err(line, "padding size given twice"));
                }
                eta = Some(parse_natural(text, line, "padding size")?);
            }
            Section::Bound => {
                if bound.is_some() {
                    return Err(err(line, "witness bound given twice"));
                }
                bound = Some(parse_natural(text, line, "witness bound")?);
            }
        }
    }
    if let Some(b) = eta {
        gamma.eta_b = b;
    }
    if let Some(w) = bound {
        gamma.witness_bound = w;
    }
    Ok(gamma)
}

fn render_valuation(val: &Valuation) -> String {
    if val.is_empty() {
        return "-".to_string();
    }
    let entries: Vec<String> = val.entries().map(|(v, x)| format!("v{v}={x}")).collect();
    entries.join(",")
}

/// Render a [`ConstraintSet`] in the format [`parse_fragment`] reads.
pub fn render_fragment(gamma: &ConstraintSet) -> String {
    let mut out = String::new();
    if !gamma.comp_instances.is_empty() {
        out.push_str("[COMP]\n");
        for phi in &gamma.comp_instances {
            let _ = writeln!(out, "{phi}");
        }
    }
    let occurrence_section = |out: &mut String, header: &str, rows: &[(Occurrence, bool)]| {
        if rows.is_empty() {
            return;
        }
        out.push_str(header);
        out.push('\n');
        for (occ, v) in rows {
            let _ = writeln!(
                out,
                "{} | {} | {v}",
                occ.formula(),
                render_valuation(occ.valuation())
            );
        }
    };
    occurrence_section(&mut out, "[PRESERVE]", &gamma.preservation);
    occurrence_section(&mut out, "[BASE]", &gamma.base_truth);
    if !gamma.a_set.is_empty() {
        out.push_str("[A]\n");
        let elements: Vec<String> = gamma.a_set.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{}", elements.join(" "));
    }
    let _ = writeln!(out, "[ETA]\n{}", gamma.eta_b);
    let _ = writeln!(out, "[BOUND]\n{}", gamma.witness_bound);
    out
}
