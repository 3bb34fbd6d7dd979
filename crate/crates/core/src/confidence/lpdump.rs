//! Plain-text export of a polytope for external LP tools.
//!
//! ```text
//! vars <n>
//! eq <row> <rhs> <i>:<coef> ...
//! interval <target> <first>..<end> <pbar> <eps>
//! zero <i>
//! ```

use std::fmt::Write as _;

use super::ComPolytopeSpec;

pub fn lp_text(poly: &ComPolytopeSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "vars {}", poly.n_vars());
    for (r, row) in poly.eqs.iter().enumerate() {
        let _ = write!(out, "eq {r} {}", row.rhs);
        for (i, c) in row.idx.iter().zip(&row.coef) {
            let _ = write!(out, " {i}:{c}");
        }
        out.push('\n');
    }
    for row in &poly.intervals {
        let _ = writeln!(out, "interval {} {}..{} {:e} {:e}", row.target, row.group.start, row.group.end, row.pbar, row.eps);
    }
    for z in &poly.zeros {
        let _ = writeln!(out, "zero {z}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::{ComSpace, ConditionMode};
    use crate::confidence::{build_polytope, ConfidenceSet};
    use crate::mdp::MdpShape;

    #[test]
    fn header_and_counts() {
        let sh = MdpShape::new(2, 2, 2, vec![], 0).unwrap();
        let sp = ComSpace::new(&sh, ConditionMode::ActionBased).unwrap();
        let poly = build_polytope(&sp, &ConfidenceSet::vacuous(&sh)).unwrap();
        let txt = lp_text(&poly);
        assert!(txt.starts_with(&format!("vars {}\n", sp.layout.total)));
        assert_eq!(txt.lines().filter(|l| l.starts_with("eq ")).count(), poly.eqs.len());
        assert_eq!(txt.lines().filter(|l| l.starts_with("interval ")).count(), 8);
    }
}
