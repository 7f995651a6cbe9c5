//! Writer for the CPLEX LP text format.
//!
//! Layout: `Minimize` / ` obj:` terms, `Subject To` with one named row per
//! constraint (`c0`, `c1`, ... unless names are given), `Bounds`, an optional
//! `Binaries` section and `End`. Long expressions wrap after eight terms.

use super::{LinearProgram, Sense};
use std::fmt::Write;

fn num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

fn push_terms(out: &mut String, terms: &[(usize, f64)], names: &dyn Fn(usize) -> String) {
    if terms.is_empty() {
        out.push_str(" 0 ");
        out.push_str(&names(0));
        out.push_str(" ");
        return;
    }
    for (t, &(j, a)) in terms.iter().enumerate() {
        if t > 0 && t % 8 == 0 {
            out.push_str("\n   ");
        }
        let sign = if a < 0.0 { '-' } else { '+' };
        if t == 0 && a >= 0.0 {
            let _ = write!(out, " {} {}", num(a), names(j));
        } else {
            let _ = write!(out, " {sign} {} {}", num(a.abs()), names(j));
        }
    }
    out.push(' ');
}

/// Renders `lp`. `names` overrides column names (default `x0`, `x1`, ...) and
/// `row_names` overrides row names; columns flagged in `binary` go to `Binaries`.
pub fn write_lp(
    lp: &LinearProgram,
    names: Option<&[String]>,
    row_names: Option<&[String]>,
    binary: Option<&[bool]>,
) -> String {
    let name = |j: usize| -> String {
        match names {
            Some(ns) => ns[j].clone(),
            None => format!("x{j}"),
        }
    };
    let mut out = String::from("Minimize\n obj:");
    let obj: Vec<(usize, f64)> = lp
        .objective
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(j, &c)| (j, c))
        .collect();
    push_terms(&mut out, &obj, &name);
    out.push_str("\nSubject To\n");
    for (r, row) in lp.constraints.iter().enumerate() {
        let rname = match row_names {
            Some(rn) => rn[r].clone(),
            None => format!("c{r}"),
        };
        let _ = write!(out, " {rname}:");
        push_terms(&mut out, &row.coeffs, &name);
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, "{op} {}", num(row.rhs));
    }
    out.push_str("Bounds\n");
    for j in 0..lp.n_vars() {
        let (l, u) = (lp.lower[j], lp.upper[j]);
        let n = name(j);
        let line = match (l.is_finite(), u.is_finite()) {
            (false, false) => format!(" {n} free"),
            (true, true) if l == u => format!(" {n} = {}", num(l)),
            (true, true) => format!(" {} <= {n} <= {}", num(l), num(u)),
            (true, false) if l == 0.0 => continue,
            (true, false) => format!(" {n} >= {}", num(l)),
            (false, true) => format!(" -inf <= {n} <= {}", num(u)),
        };
        out.push_str(&line);
        out.push('\n');
    }
    if let Some(flags) = binary {
        let bins: Vec<String> = (0..lp.n_vars()).filter(|&j| flags[j]).map(name).collect();
        if !bins.is_empty() {
            out.push_str("Binaries\n");
            for chunk in bins.chunks(8) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
    }
    out.push_str("End\n");
    out
}
