//! Writer for the CPLEX LP text format, for cross-checking models with
//! external solvers.

use std::fmt::Write;

use crate::model::{MilpModel, Relation, Sense, VarKind};

/// Replaces characters not accepted in LP-format identifiers.
fn sanitize(name: &str, index: usize) -> String {
    let mut out: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.[]".contains(c) { c } else { '_' })
        .collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        out = format!("v{index}_{out}");
    }
    out
}

fn write_terms(out: &mut String, terms: impl Iterator<Item = (f64, String)>) {
    let mut first = true;
    for (a, name) in terms {
        if a == 0.0 {
            continue;
        }
        let sign = if a < 0.0 { "-" } else { "+" };
        if first && a >= 0.0 {
            write!(out, " {} {}", a.abs(), name).unwrap();
        } else {
            write!(out, " {} {} {}", sign, a.abs(), name).unwrap();
        }
        first = false;
    }
    if first {
        out.push_str(" 0");
    }
}

/// Renders `model` in LP format.
pub fn to_lp_string(model: &MilpModel) -> String {
    let names: Vec<String> = (0..model.num_vars()).map(|j| sanitize(model.name(j), j)).collect();
    let mut out = String::new();
    out.push_str(match model.sense() {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    write_terms(&mut out, (0..model.num_vars()).map(|j| (model.cost(j), names[j].clone())));
    out.push_str("\nSubject To\n");
    for (i, c) in model.constraints().iter().enumerate() {
        let label = sanitize(&c.name, i);
        write!(out, " r{i}_{label}:").unwrap();
        write_terms(&mut out, c.terms.iter().map(|&(j, a)| (a, names[j].clone())));
        let rel = match c.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        writeln!(out, " {rel} {}", c.rhs).unwrap();
    }
    out.push_str("Bounds\n");
    for j in 0..model.num_vars() {
        let (lo, hi) = (model.lower(j), model.upper(j));
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) if lo == hi => writeln!(out, " {} = {}", names[j], lo),
            (true, true) => writeln!(out, " {} <= {} <= {}", lo, names[j], hi),
            (true, false) => writeln!(out, " {} >= {}", names[j], lo),
            (false, true) => writeln!(out, " -inf <= {} <= {}", names[j], hi),
            (false, false) => writeln!(out, " {} free", names[j]),
        }
        .unwrap();
    }
    let of_kind = |kind: VarKind| -> Vec<&str> {
        (0..model.num_vars())
            .filter(|&j| model.kind(j) == kind)
            .map(|j| names[j].as_str())
            .collect()
    };
    for (header, kind) in [("Binaries", VarKind::Binary), ("Generals", VarKind::Integer)] {
        let vars = of_kind(kind);
        if !vars.is_empty() {
            writeln!(out, "{header}").unwrap();
            for chunk in vars.chunks(8) {
                writeln!(out, " {}", chunk.join(" ")).unwrap();
            }
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_all_sections() {
        let mut m = MilpModel::new();
        let x = m.add_binary("x[0,1]", 3.0);
        let f = m.add_var("f 0", VarKind::Integer, 0.0, 6.0, 1.0);
        let z = m.add_continuous("z", f64::NEG_INFINITY, f64::INFINITY, 0.0);
        m.add_constraint("link", [(f, 1.0), (x, -6.0)], Relation::Le, 0.0);
        m.add_constraint("pin", [(z, 1.0)], Relation::Eq, 2.5);
        let text = to_lp_string(&m);
        assert!(text.starts_with("Minimize\n obj: 3 x[0_1] + 1 f_0\n"));
        assert!(text.contains("r0_link: - 6 x[0_1] + 1 f_0 <= 0"));
        assert!(text.contains("r1_pin: 1 z = 2.5"));
        assert!(text.contains("0 <= f_0 <= 6"));
        assert!(text.contains("z free"));
        assert!(text.contains("Binaries\n x[0_1]\n"));
        assert!(text.contains("Generals\n f_0\n"));
        assert!(text.ends_with("End\n"));
    }
}
