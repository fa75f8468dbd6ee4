//! CPLEX LP text output.

use std::fmt::Write;

use crate::lp::program::{LinearProgram, Sense};

const TERMS_PER_LINE: usize = 8;

/// Renders the program with variables named `psi_<index>` and rows `c<index>`.
pub fn export_lp_text(lp: &LinearProgram) -> String {
    let mut out = String::new();
    let (sense, coeffs) = match lp.objective() {
        Some(o) => (o.sense, o.coeffs.as_slice()),
        None => (Sense::Minimize, &[][..]),
    };
    out.push_str(match sense {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    if coeffs.is_empty() {
        out.push_str(" 0");
    }
    write_terms(&mut out, coeffs);
    out.push('\n');

    out.push_str("Subject To\n");
    for (i, row) in lp.rows().iter().enumerate() {
        let _ = write!(out, " c{i}:");
        if row.coeffs.is_empty() {
            out.push_str(" 0 psi_0");
        }
        write_terms(&mut out, &row.coeffs);
        let _ = writeln!(out, " = {}", number(row.rhs));
    }

    out.push_str("Bounds\n");
    for j in 0..lp.n_vars() {
        let _ = writeln!(out, " psi_{j} >= 0");
    }
    out.push_str("End\n");
    out
}

fn write_terms(out: &mut String, terms: &[(usize, f64)]) {
    for (k, &(j, a)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        if k == 0 {
            let _ = write!(out, " {} psi_{j}", number(a));
        } else {
            let sign = if a < 0.0 { '-' } else { '+' };
            let _ = write!(out, " {sign} {} psi_{j}", number(a.abs()));
        }
    }
}

// Shortest round-trip decimal, switching to exponent form outside a
// readable range.
fn number(v: f64) -> String {
    let m = v.abs();
    if m == 0.0 || (1e-4..1e6).contains(&m) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}
