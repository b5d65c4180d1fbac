//! Generators for the explicit diagrams: lens spaces, the four-normal
//! example without `γ`, the height-1 `Z_5` lens diagram, and the two
//! infinite height-1 families realizing `S^5 # k(S^2 x S^3)`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use thiserror::Error;

use crate::cone::{DiagramError, ToricDiagram};
use crate::lattice::ivec;
use crate::topology::convexity_and_span_check;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("unknown family {0:?} (expected lens, non-cy, z5-lens, main4-even, main4-odd)")]
    UnknownFamily(String),
    #[error("parameter {name} = {value} out of range (need {name} >= {min})")]
    OutOfRange { name: &'static str, value: i64, min: i64 },
    #[error("{family}(r = {r}, s = {s}): vertex loop is not strictly convex or does not span Z^2")]
    ConvexityCheckFailed { family: FamilyId, r: i64, s: i64 },
    #[error(transparent)]
    Invalid(#[from] DiagramError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyId {
    Lens,
    NonCy,
    Z5Lens,
    Main4Even,
    Main4Odd,
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Lens => "lens",
            Self::NonCy => "non-cy",
            Self::Z5Lens => "z5-lens",
            Self::Main4Even => "main4-even",
            Self::Main4Odd => "main4-odd",
        })
    }
}

impl FromStr for FamilyId {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "lens" => Ok(Self::Lens),
            "non-cy" | "noncy" => Ok(Self::NonCy),
            "z5-lens" | "z5" => Ok(Self::Z5Lens),
            "main4-even" => Ok(Self::Main4Even),
            "main4-odd" => Ok(Self::Main4Odd),
            _ => Err(FamilyError::UnknownFamily(s.to_string())),
        }
    }
}

fn at_least(name: &'static str, value: i64, min: i64) -> Result<(), FamilyError> {
    if value < min {
        Err(FamilyError::OutOfRange { name, value, min })
    } else {
        Ok(())
    }
}

fn triangular(k: i64) -> BigInt {
    BigInt::from(k) * BigInt::from(k + 1) / 2
}

/// `(1,0,0), (0,1,0), (1,1,ℓ)`.
pub fn lens(l: i64) -> Result<ToricDiagram, FamilyError> {
    at_least("l", l, 1)?;
    Ok(ToricDiagram::from_i64(&[&[1, 0, 0], &[0, 1, 0], &[1, 1, l]])?)
}

/// The four normals `(1,0,0), (0,1,0), (1,1,ℓ), (1,1,ℓ-1)` as printed,
/// without validation.
pub fn non_cy_normals(l: i64) -> Result<Vec<Vec<BigInt>>, FamilyError> {
    at_least("l", l, 2)?;
    Ok(vec![
        ivec(&[1, 0, 0]),
        ivec(&[0, 1, 0]),
        ivec(&[1, 1, l]),
        ivec(&[1, 1, l - 1]),
    ])
}

/// The four-normal diagram, validated. The fourth normal lies in the cone
/// spanned by the first three, so validation reports it as redundant.
pub fn non_cy(l: i64) -> Result<ToricDiagram, FamilyError> {
    Ok(ToricDiagram::new(non_cy_normals(l)?)?)
}

/// `(1,0,0), (1,2,1), (1,3,4)`.
pub fn z5_lens() -> ToricDiagram {
    ToricDiagram::from_i64(&[&[1, 0, 0], &[1, 2, 1], &[1, 3, 4]]).expect("valid diagram")
}

/// Vertex loop of the even family (`k = 2r`, `2r + 3` vertices).
pub fn main4_even_vertices(r: i64, s: i64) -> Result<Vec<(BigInt, BigInt)>, FamilyError> {
    at_least("r", r, 1)?;
    at_least("s", s, 0)?;
    let mut pts: Vec<(BigInt, BigInt)> = (0..=r).map(|i| (BigInt::from(i), triangular(i))).collect();
    let top = triangular(r + 1) + s;
    for j in 0..=r {
        pts.push((BigInt::from(r + 1 - j), &top - triangular(j)));
    }
    pts.push((0.into(), 1.into()));
    Ok(pts)
}

/// Vertex loop of the odd family (`k = 2r - 1`, `2r + 2` vertices). The
/// left half mirrors the right half and ends at `(-1, 0)`.
pub fn main4_odd_vertices(r: i64, s: i64) -> Result<Vec<(BigInt, BigInt)>, FamilyError> {
    at_least("r", r, 1)?;
    at_least("s", s, 0)?;
    let mut pts: Vec<(BigInt, BigInt)> = (0..r).map(|k| (BigInt::from(k), triangular(k))).collect();
    let peak = triangular(r) + s;
    pts.push((BigInt::from(r), peak.clone()));
    pts.push((0.into(), &peak + 1));
    if r >= 2 {
        pts.push((BigInt::from(-r), peak));
    }
    for k in (2..r).rev() {
        pts.push((BigInt::from(-k), triangular(k)));
    }
    pts.push(((-1).into(), 0.into()));
    Ok(pts)
}

fn height_one(family: FamilyId, r: i64, s: i64, pts: Vec<(BigInt, BigInt)>) -> Result<ToricDiagram, FamilyError> {
    if !convexity_and_span_check(&pts).expect("at least 4 points") {
        return Err(FamilyError::ConvexityCheckFailed { family, r, s });
    }
    let normals = pts
        .into_iter()
        .map(|(p, q)| vec![BigInt::from(1), p, q])
        .collect();
    Ok(ToricDiagram::new(normals)?)
}

pub fn main4_even(r: i64, s: i64) -> Result<ToricDiagram, FamilyError> {
    height_one(FamilyId::Main4Even, r, s, main4_even_vertices(r, s)?)
}

pub fn main4_odd(r: i64, s: i64) -> Result<ToricDiagram, FamilyError> {
    height_one(FamilyId::Main4Odd, r, s, main4_odd_vertices(r, s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{is_good, is_good_height1_3d};
    use crate::cy::compute_gamma;
    use crate::topology::{fundamental_group, second_betti};

    fn pts(v: &[(i64, i64)]) -> Vec<(BigInt, BigInt)> {
        v.iter().map(|&(a, b)| (a.into(), b.into())).collect()
    }

    #[test]
    fn parse_ids() {
        assert_eq!("main4-even".parse::<FamilyId>().unwrap(), FamilyId::Main4Even);
        assert_eq!("non_cy".parse::<FamilyId>().unwrap(), FamilyId::NonCy);
        assert!("torus".parse::<FamilyId>().is_err());
        assert_eq!(FamilyId::Z5Lens.to_string(), "z5-lens");
    }

    #[test]
    fn parameter_ranges() {
        assert!(matches!(lens(0), Err(FamilyError::OutOfRange { .. })));
        assert!(matches!(non_cy(1), Err(FamilyError::OutOfRange { .. })));
        assert!(matches!(main4_odd(0, 0), Err(FamilyError::OutOfRange { .. })));
        assert!(matches!(main4_even(1, -1), Err(FamilyError::OutOfRange { .. })));
    }

    #[test]
    fn lens_family() {
        let d = lens(1).unwrap();
        assert!(is_good(&d).unwrap().good);
        assert!(fundamental_group(&d).is_empty());
        assert_eq!(fundamental_group(&lens(2).unwrap()), ivec(&[2]));
        assert_eq!(compute_gamma(&lens(5).unwrap()).unwrap().height, BigInt::from(5));
    }

    #[test]
    fn non_cy_fourth_normal_is_redundant() {
        assert_eq!(non_cy(2), Err(FamilyError::Invalid(DiagramError::RedundantNormal(3))));
        let normals = non_cy_normals(2).unwrap();
        let m = crate::lattice::IntMatrix::from_columns(&normals).unwrap();
        assert!(crate::lattice::smith_normal_form(&m).cokernel_invariant_factors().is_empty());
    }

    #[test]
    fn z5() {
        let d = z5_lens();
        assert!(is_good_height1_3d(&d).unwrap());
        assert_eq!(fundamental_group(&d), ivec(&[5]));
    }

    #[test]
    fn printed_vertex_lists() {
        assert_eq!(
            main4_even_vertices(1, 2).unwrap(),
            pts(&[(0, 0), (1, 1), (2, 5), (1, 4), (0, 1)])
        );
        assert_eq!(
            main4_odd_vertices(1, 0).unwrap(),
            pts(&[(0, 0), (1, 1), (0, 2), (-1, 0)])
        );
        assert_eq!(
            main4_odd_vertices(3, 1).unwrap(),
            pts(&[(0, 0), (1, 1), (2, 3), (3, 7), (0, 8), (-3, 7), (-2, 3), (-1, 0)])
        );
        for r in 1..=4 {
            for s in 0..=5 {
                assert_eq!(main4_even_vertices(r, s).unwrap().len() as i64, 2 * r + 3);
                assert_eq!(main4_odd_vertices(r, s).unwrap().len() as i64, 2 * r + 2);
            }
        }
    }

    #[test]
    fn small_members() {
        let d = main4_odd(1, 0).unwrap();
        assert_eq!(d.len(), 4);
        assert_eq!(second_betti(&d).unwrap(), 1);
        assert!(fundamental_group(&d).is_empty());
        assert!(is_good(&main4_odd(1, 2).unwrap()).unwrap().good);
        assert!(is_good(&main4_even(2, 3).unwrap()).unwrap().good);
        assert!(convexity_and_span_check(&main4_odd_vertices(2, 0).unwrap()).unwrap());
        let d = main4_even(1, 1).unwrap();
        assert_eq!(second_betti(&d).unwrap(), 2);
    }

    #[test]
    fn degenerate_printed_members_are_flagged() {
        assert!(matches!(
            main4_even(1, 0),
            Err(FamilyError::ConvexityCheckFailed { .. })
        ));
        assert!(matches!(
            main4_odd(4, 2),
            Err(FamilyError::ConvexityCheckFailed { .. })
        ));
    }
}
