//! Topological invariants read off a good diagram: `π₁`, `b₂`, the
//! height-1 area invariant, and a 5-manifold label.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cone::{DiagramError, ToricDiagram};
use crate::cy::{normalize_height, CalabiYauData};
use crate::lattice::smith_normal_form;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("loop is not strictly convex at vertex {0}")]
    NotConvex(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopologyReport {
    #[serde(serialize_with = "crate::json::ser_bigint_vec")]
    pub pi1: Vec<BigInt>,
    pub b2: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub area2: Option<u64>,
    pub label: String,
}

/// Invariant factors of `Z^{m+1} / 𝓛` where `𝓛` is spanned by the normals.
/// Empty means simply connected.
pub fn fundamental_group(diagram: &ToricDiagram) -> Vec<BigInt> {
    smith_normal_form(&diagram.normal_matrix()).cokernel_invariant_factors()
}

/// `d - 3` for a rank-3 diagram. The formula assumes `π₁ = 1`; a warning is
/// logged otherwise.
pub fn second_betti(diagram: &ToricDiagram) -> Result<usize, DiagramError> {
    if diagram.rank() != 3 {
        return Err(DiagramError::UnsupportedRank {
            rank: diagram.rank(),
        });
    }
    if !fundamental_group(diagram).is_empty() {
        log::warn!("b2 = d - 3 applied to a diagram with nontrivial fundamental group");
    }
    Ok(diagram.len() - 3)
}

/// Twice the signed shoelace area of a closed loop.
pub fn shoelace2(points: &[(BigInt, BigInt)]) -> BigInt {
    let n = points.len();
    (0..n)
        .map(|i| {
            let (x0, y0) = &points[i];
            let (x1, y1) = &points[(i + 1) % n];
            x0 * y1 - x1 * y0
        })
        .sum()
}

fn cross(o: &(BigInt, BigInt), a: &(BigInt, BigInt), b: &(BigInt, BigInt)) -> BigInt {
    (&a.0 - &o.0) * (&b.1 - &o.1) - (&a.1 - &o.1) * (&b.0 - &o.0)
}

/// Index of the first vertex where the loop fails to turn strictly in the
/// same direction as vertex 0.
fn convexity_defect(points: &[(BigInt, BigInt)]) -> Option<usize> {
    let n = points.len();
    let turn = |i: usize| cross(&points[(i + n - 1) % n], &points[i], &points[(i + 1) % n]);
    let sign = turn(0).signum();
    if sign.is_zero() {
        return Some(0);
    }
    (1..n).find(|&i| turn(i).signum() != sign)
}

/// Twice the area of the height-1 polygon. The loop comes from the cone's
/// cyclic order, so it is convex by construction; this is re-checked.
pub fn area_invariant(diagram: &ToricDiagram) -> Result<BigInt, TopologyError> {
    let polygon = diagram.height_one_polygon()?;
    if let Some(i) = convexity_defect(&polygon) {
        return Err(TopologyError::NotConvex(i));
    }
    Ok(shoelace2(&polygon).abs())
}

/// Label for a good rank-3 diagram. Simply connected labels rely on the
/// classification of simply connected spin 5-manifolds with a toric
/// `T³`-action, which is assumed rather than checked.
pub fn identify_5d(diagram: &ToricDiagram) -> String {
    if diagram.rank() != 3 {
        return "unknown".into();
    }
    let pi1 = fundamental_group(diagram);
    match pi1.as_slice() {
        [] => match diagram.len() - 3 {
            0 => "S^5".into(),
            k => format!("S^5 # {k}(S^2 x S^3)"),
        },
        [n] if n.is_positive() => format!("lens-type: pi1 = Z_{n}"),
        _ => "unknown".into(),
    }
}

/// Strict convexity of the loop plus `Z`-span of its differences being all
/// of `Z²` (gcd of the 2×2 minors of the difference vectors equals 1).
pub fn convexity_and_span_check(points: &[(BigInt, BigInt)]) -> Result<bool, TopologyError> {
    if points.len() < 3 {
        return Err(TopologyError::TooFewPoints(points.len()));
    }
    if convexity_defect(points).is_some() {
        return Ok(false);
    }
    let diffs: Vec<(BigInt, BigInt)> = points[1..]
        .iter()
        .map(|(x, y)| (x - &points[0].0, y - &points[0].1))
        .collect();
    let mut g = BigInt::zero();
    for (i, a) in diffs.iter().enumerate() {
        for b in &diffs[i + 1..] {
            g = g.gcd(&(&a.0 * &b.1 - &a.1 * &b.0));
        }
    }
    Ok(g.is_one())
}

/// All invariants together. The area is reported when the diagram is in
/// height-1 form, or when it has height 1 and can be normalized.
pub fn topology_report(diagram: &ToricDiagram, cy: Option<&CalabiYauData>) -> TopologyReport {
    let pi1 = fundamental_group(diagram);
    let b2 = diagram.len().saturating_sub(diagram.rank());
    let area2 = if diagram.rank() != 3 {
        None
    } else if diagram.is_height_one_form() {
        area_invariant(diagram).ok()
    } else {
        cy.filter(|c| c.height.is_one())
            .and_then(|c| normalize_height(diagram, c).ok())
            .and_then(|n| area_invariant(&n.diagram).ok())
    };
    TopologyReport {
        pi1,
        b2,
        area2: area2.and_then(|a| a.to_u64()),
        label: identify_5d(diagram),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cy::compute_gamma;
    use crate::lattice::ivec;

    fn pts(v: &[(i64, i64)]) -> Vec<(BigInt, BigInt)> {
        v.iter().map(|&(a, b)| (a.into(), b.into())).collect()
    }

    fn octant() -> ToricDiagram {
        ToricDiagram::from_i64(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]).unwrap()
    }

    fn lens(l: i64) -> ToricDiagram {
        ToricDiagram::from_i64(&[&[1, 0, 0], &[0, 1, 0], &[1, 1, l]]).unwrap()
    }

    #[test]
    fn fundamental_groups() {
        assert!(fundamental_group(&octant()).is_empty());
        assert_eq!(fundamental_group(&lens(5)), ivec(&[5]));
        let z5 = ToricDiagram::from_i64(&[&[1, 0, 0], &[1, 2, 1], &[1, 3, 4]]).unwrap();
        assert_eq!(fundamental_group(&z5), ivec(&[5]));
    }

    #[test]
    fn betti_and_labels() {
        assert_eq!(second_betti(&octant()).unwrap(), 0);
        assert_eq!(identify_5d(&octant()), "S^5");
        assert_eq!(identify_5d(&lens(2)), "lens-type: pi1 = Z_2");
        let square = ToricDiagram::from_i64(&[&[1, 0, 0], &[1, 1, 0], &[1, 1, 1], &[1, 0, 1]]).unwrap();
        assert_eq!(second_betti(&square).unwrap(), 1);
        assert_eq!(identify_5d(&square), "S^5 # 1(S^2 x S^3)");
    }

    #[test]
    fn areas() {
        assert_eq!(shoelace2(&pts(&[(0, 0), (1, 0), (0, 1)])).abs(), BigInt::one());
        let z5 = ToricDiagram::from_i64(&[&[1, 0, 0], &[1, 2, 1], &[1, 3, 4]]).unwrap();
        assert_eq!(area_invariant(&z5).unwrap(), BigInt::from(5));
        assert!(matches!(
            area_invariant(&lens(2)),
            Err(TopologyError::Diagram(DiagramError::NotHeightOne { .. }))
        ));
    }

    #[test]
    fn convexity_and_span() {
        assert!(convexity_and_span_check(&pts(&[(0, 0), (1, 0), (0, 1)])).unwrap());
        assert!(!convexity_and_span_check(&pts(&[(0, 0), (1, 0), (2, 0), (0, 1)])).unwrap());
        // convex but spanning an index-2 sublattice
        assert!(!convexity_and_span_check(&pts(&[(0, 0), (2, 0), (0, 2)])).unwrap());
        assert_eq!(
            convexity_and_span_check(&pts(&[(0, 0), (1, 0)])),
            Err(TopologyError::TooFewPoints(2))
        );
    }

    #[test]
    fn report_normalizes_height_one() {
        let d = lens(1);
        let cy = compute_gamma(&d).unwrap();
        let r = topology_report(&d, Some(&cy));
        assert_eq!(r.area2, Some(1));
        assert!(r.pi1.is_empty());
        let z5 = ToricDiagram::from_i64(&[&[1, 0, 0], &[1, 2, 1], &[1, 3, 4]]).unwrap();
        let json = serde_json::to_string(&topology_report(&z5, None)).unwrap();
        assert_eq!(json, r#"{"pi1":[5],"b2":0,"area2":5,"label":"lens-type: pi1 = Z_5"}"#);
    }
}
