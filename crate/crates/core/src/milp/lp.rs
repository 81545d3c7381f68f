//! CPLEX LP text output.

use std::fmt::Write as _;
use std::io::{self, Write};

use super::{LinExpr, MilpModel, Sense};

/// Terms per physical line; keeps lines well under the format's length limit.
const TERMS_PER_LINE: usize = 8;

fn push_expr(out: &mut String, expr: &LinExpr) {
    for (k, (coeff, var)) in expr.terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if *coeff < 0 { "-" } else { "+" };
        if k == 0 {
            if *coeff < 0 {
                out.push_str(" -");
            }
        } else {
            let _ = write!(out, " {sign}");
        }
        let mag = coeff.unsigned_abs();
        if mag == 1 {
            let _ = write!(out, " {var}");
        } else {
            let _ = write!(out, " {mag} {var}");
        }
    }
}

/// Renders `model` in CPLEX LP format. The output is a pure function of the
/// model.
pub fn to_lp_string(model: &MilpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem: {}", model.name);
    out.push_str("Maximize\n obj:");
    push_expr(&mut out, &model.objective);
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        let _ = write!(out, " {}:", c.name);
        if c.expr.terms.is_empty() {
            // Empty rows (e.g. over zero items) still need a variable to parse.
            let anchor = model.continuous.first().map_or("utility_0", |c| c.name.as_str());
            let _ = write!(out, " 0 {anchor}");
        }
        push_expr(&mut out, &c.expr);
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {}", c.rhs);
    }
    out.push_str("Bounds\n");
    for c in &model.continuous {
        let _ = writeln!(out, " {} >= 0", c.name);
    }
    if !model.binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in model.binaries.chunks(TERMS_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

pub fn write_lp(model: &MilpModel, mut w: impl Write) -> io::Result<()> {
    w.write_all(to_lp_string(model).as_bytes())
}
