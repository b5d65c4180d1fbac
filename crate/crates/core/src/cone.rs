//! Rational polyhedral cones given by inward facet normals.
//!
//! A [`ToricDiagram`] is the list of primitive normals `λ_i` cutting out
//! `C = {y : ⟨y, λ_i⟩ ≥ 0}`. Validation is exact: the extreme rays of `C`
//! are enumerated with integer cofactors and every verdict (primitivity,
//! minimality, interior, goodness) is decided without rounding.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::lattice::{
    cofactor_vector, dot, dot_mixed, is_primitive, primitive_part, smith_normal_form,
    solve_rational, sublattice_saturation_equal, to_rational, vector_rank, IntMatrix,
    Rational,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("a diagram needs at least one normal")]
    Empty,
    #[error("normal at index {index} has {got} coordinates, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("normal at index {0} is not primitive")]
    NonPrimitiveNormal(usize),
    #[error("normal at index {0} is redundant (dropping it does not change the cone)")]
    RedundantNormal(usize),
    #[error("the cone has empty interior")]
    EmptyInterior,
    #[error("the cone contains a line (normals do not span the dual space)")]
    NotStronglyConvex,
    #[error("operation is implemented for rank 3 only (diagram has rank {rank})")]
    UnsupportedRank { rank: usize },
    #[error("normal at index {index} is not of the form (1, p, q)")]
    NotHeightOne { index: usize },
    #[error("face index {index} out of range for {len} normals")]
    FaceIndexOutOfRange { index: usize, len: usize },
}

/// An extreme ray of the cone together with the normals vanishing on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtremeRay {
    #[serde(serialize_with = "crate::json::ser_bigint_vec")]
    pub generator: Vec<BigInt>,
    pub incident: Vec<usize>,
}

/// A validated set of facet normals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToricDiagram {
    rank: usize,
    normals: Vec<Vec<BigInt>>,
    rays: Vec<ExtremeRay>,
    cyclic_order: Option<Vec<usize>>,
}

impl ToricDiagram {
    pub fn new(normals: Vec<Vec<BigInt>>) -> Result<Self, DiagramError> {
        validate_diagram(normals)
    }

    pub fn from_i64(normals: &[&[i64]]) -> Result<Self, DiagramError> {
        Self::new(normals.iter().map(|v| crate::lattice::ivec(v)).collect())
    }

    /// Ambient lattice rank `m + 1`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn normals(&self) -> &[Vec<BigInt>] {
        &self.normals
    }

    pub fn normal(&self, i: usize) -> &[BigInt] {
        &self.normals[i]
    }

    /// Number of facets `d`.
    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn rays(&self) -> &[ExtremeRay] {
        &self.rays
    }

    /// Counterclockwise facet order around `Σ λ_i` (rank 3 only).
    pub fn cyclic_order(&self) -> Option<&[usize]> {
        self.cyclic_order.as_deref()
    }

    /// Matrix whose columns are the normals.
    pub fn normal_matrix(&self) -> IntMatrix {
        IntMatrix::from_columns(&self.normals).expect("validated diagram is nonempty")
    }

    /// `Σ λ_i`.
    pub fn normal_sum(&self) -> Vec<BigInt> {
        let mut s = vec![BigInt::zero(); self.rank];
        for v in &self.normals {
            for (a, b) in s.iter_mut().zip(v) {
                *a += b;
            }
        }
        s
    }

    /// Apply a change of lattice basis: every normal becomes `ᵗA⁻¹ λ_i`.
    pub fn transformed(&self, a: &IntMatrix) -> Result<Self, DiagramError> {
        let it = a
            .inverse_transpose()
            .map_err(|_| DiagramError::NotStronglyConvex)?;
        Self::new(self.normals.iter().map(|v| it.mul_vec(v)).collect())
    }

    /// Same cone with the normals listed in a different order.
    pub fn relabeled(&self, permutation: &[usize]) -> Result<Self, DiagramError> {
        Self::new(permutation.iter().map(|&i| self.normals[i].clone()).collect())
    }

    /// True when every normal has first coordinate 1.
    pub fn is_height_one_form(&self) -> bool {
        self.normals.iter().all(|v| v[0].is_one())
    }

    /// The `(p, q)` loop of a rank-3 diagram in height-1 form, in cyclic order.
    pub fn height_one_polygon(&self) -> Result<Vec<(BigInt, BigInt)>, DiagramError> {
        if self.rank != 3 {
            return Err(DiagramError::UnsupportedRank { rank: self.rank });
        }
        if let Some(index) = self.normals.iter().position(|v| !v[0].is_one()) {
            return Err(DiagramError::NotHeightOne { index });
        }
        let order = self.cyclic_order.as_ref().expect("rank 3 has an order");
        Ok(order
            .iter()
            .map(|&i| (self.normals[i][1].clone(), self.normals[i][2].clone()))
            .collect())
    }
}

/// A nonempty face `{y ∈ C : ⟨y, λ_i⟩ = 0, i ∈ normals}` with a witness point
/// in its relative interior, or `None` when the face is only the apex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceDescriptor {
    pub normals: Vec<usize>,
    pub witness: Option<Vec<Rational>>,
}

fn extreme_rays(normals: &[Vec<BigInt>], n: usize) -> Vec<ExtremeRay> {
    let mut seen = BTreeSet::new();
    let mut rays = Vec::new();
    for subset in (0..normals.len()).combinations(n - 1) {
        let vecs: Vec<Vec<BigInt>> = subset.iter().map(|&i| normals[i].clone()).collect();
        let r = cofactor_vector(&vecs, n);
        if r.iter().all(Zero::is_zero) {
            continue;
        }
        let r = primitive_part(&r);
        let candidate = if normals.iter().all(|l| !dot(l, &r).is_negative()) {
            r
        } else {
            let neg: Vec<BigInt> = r.iter().map(|x| -x).collect();
            if normals.iter().all(|l| !dot(l, &neg).is_negative()) {
                neg
            } else {
                continue;
            }
        };
        if seen.insert(candidate.clone()) {
            let incident = (0..normals.len())
                .filter(|&i| dot(&normals[i], &candidate).is_zero())
                .collect();
            rays.push(ExtremeRay {
                generator: candidate,
                incident,
            });
        }
    }
    rays
}

/// Exact test for `0 ∈ conv(vectors)` (Gordan's alternative to a strictly
/// positive `y`), by enumerating affinely independent supports.
fn zero_in_convex_hull(vectors: &[Vec<BigInt>], n: usize) -> bool {
    let lifted: Vec<Vec<BigInt>> = vectors
        .iter()
        .map(|v| {
            let mut w = v.clone();
            w.push(BigInt::one());
            w
        })
        .collect();
    let mut rhs = vec![Rational::zero(); n];
    rhs.push(Rational::one());
    for k in 1..=(n + 1).min(vectors.len()) {
        for subset in (0..vectors.len()).combinations(k) {
            let cols: Vec<Vec<BigInt>> = subset.iter().map(|&i| lifted[i].clone()).collect();
            if vector_rank(&cols) < k {
                continue;
            }
            let a: Vec<Vec<Rational>> = (0..=n)
                .map(|row| {
                    cols.iter()
                        .map(|c| Rational::from_integer(c[row].clone()))
                        .collect()
                })
                .collect();
            if let Some(c) = solve_rational(&a, &rhs) {
                if c.iter().all(|x| !x.is_negative()) {
                    return true;
                }
            }
        }
    }
    false
}

fn det3(a: &[BigInt], b: &[BigInt], c: &[BigInt]) -> BigInt {
    &a[0] * (&b[1] * &c[2] - &b[2] * &c[1]) - &a[1] * (&b[0] * &c[2] - &b[2] * &c[0])
        + &a[2] * (&b[0] * &c[1] - &b[1] * &c[0])
}

fn rank3_cyclic_order(normals: &[Vec<BigInt>], rays: &[ExtremeRay]) -> Vec<usize> {
    let d = normals.len();
    let mut neighbours = vec![Vec::new(); d];
    for ray in rays {
        if let [a, b] = ray.incident[..] {
            neighbours[a].push(b);
            neighbours[b].push(a);
        }
    }
    let axis: Vec<BigInt> = (0..3)
        .map(|k| normals.iter().map(|v| &v[k]).sum())
        .collect();
    let mut order = vec![0];
    let first = neighbours[0]
        .iter()
        .copied()
        .find(|&b| det3(&axis, &normals[0], &normals[b]).is_positive())
        .expect("validated rank-3 cone has two neighbours per facet");
    let (mut prev, mut cur) = (0, first);
    while cur != 0 {
        order.push(cur);
        let next = neighbours[cur]
            .iter()
            .copied()
            .find(|&b| b != prev)
            .expect("facet adjacency is a cycle");
        prev = cur;
        cur = next;
    }
    debug_assert_eq!(order.len(), d);
    order
}

/// Check primitivity, minimality, nonempty interior and strong convexity.
pub fn validate_diagram(normals: Vec<Vec<BigInt>>) -> Result<ToricDiagram, DiagramError> {
    let n = normals.first().map(Vec::len).ok_or(DiagramError::Empty)?;
    if n == 0 {
        return Err(DiagramError::Empty);
    }
    for (index, v) in normals.iter().enumerate() {
        if v.len() != n {
            return Err(DiagramError::DimensionMismatch {
                index,
                expected: n,
                got: v.len(),
            });
        }
        if !is_primitive(v).unwrap_or(false) {
            return Err(DiagramError::NonPrimitiveNormal(index));
        }
    }
    for j in 1..normals.len() {
        if normals[..j].contains(&normals[j]) {
            return Err(DiagramError::RedundantNormal(j));
        }
    }
    if vector_rank(&normals) < n {
        return Err(if zero_in_convex_hull(&normals, n) {
            DiagramError::EmptyInterior
        } else {
            DiagramError::NotStronglyConvex
        });
    }
    let rays = extreme_rays(&normals, n);
    let generators: Vec<Vec<BigInt>> = rays.iter().map(|r| r.generator.clone()).collect();
    if vector_rank(&generators) < n {
        return Err(DiagramError::EmptyInterior);
    }
    for j in 0..normals.len() {
        let on_facet: Vec<Vec<BigInt>> = rays
            .iter()
            .filter(|r| r.incident.contains(&j))
            .map(|r| r.generator.clone())
            .collect();
        if vector_rank(&on_facet) + 1 < n {
            return Err(DiagramError::RedundantNormal(j));
        }
    }
    let cyclic_order = (n == 3).then(|| rank3_cyclic_order(&normals, &rays));
    Ok(ToricDiagram {
        rank: n,
        normals,
        rays,
        cyclic_order,
    })
}

/// Witness for the face cut out by `indices`: the sum of the extreme rays on
/// it, or `None` if only the apex satisfies all the equations.
pub fn face_witness(
    diagram: &ToricDiagram,
    indices: &[usize],
) -> Result<Option<Vec<BigInt>>, DiagramError> {
    if let Some(&index) = indices.iter().find(|&&i| i >= diagram.len()) {
        return Err(DiagramError::FaceIndexOutOfRange {
            index,
            len: diagram.len(),
        });
    }
    let mut sum: Option<Vec<BigInt>> = None;
    for ray in diagram.rays() {
        if indices.iter().all(|i| ray.incident.contains(i)) {
            let acc = sum.get_or_insert_with(|| vec![BigInt::zero(); diagram.rank()]);
            for (a, b) in acc.iter_mut().zip(&ray.generator) {
                *a += b;
            }
        }
    }
    Ok(sum)
}

/// All nonempty proper faces of a rank-3 cone: the facets in cyclic order,
/// then the edges between cyclically adjacent facets.
pub fn enumerate_faces_3d(diagram: &ToricDiagram) -> Result<Vec<FaceDescriptor>, DiagramError> {
    let order = diagram
        .cyclic_order()
        .ok_or(DiagramError::UnsupportedRank {
            rank: diagram.rank(),
        })?;
    let d = order.len();
    let mut faces = Vec::with_capacity(2 * d);
    for &i in order {
        let w = face_witness(diagram, &[i])?;
        faces.push(FaceDescriptor {
            normals: vec![i],
            witness: w.map(|v| to_rational(&v)),
        });
    }
    for k in 0..d {
        let pair = vec![order[k], order[(k + 1) % d]];
        let w = face_witness(diagram, &pair)?;
        faces.push(FaceDescriptor {
            normals: pair,
            witness: w.map(|v| to_rational(&v)),
        });
    }
    Ok(faces)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FaceFailure {
    /// The cutting normals are linearly dependent.
    Dependent { normals: Vec<usize> },
    /// Real span ∩ lattice is strictly larger than the integer span.
    NotSaturated {
        normals: Vec<usize>,
        #[serde(serialize_with = "crate::json::ser_bigint_vec")]
        invariant_factors: Vec<BigInt>,
    },
}

impl FaceFailure {
    pub fn normals(&self) -> &[usize] {
        match self {
            FaceFailure::Dependent { normals } | FaceFailure::NotSaturated { normals, .. } => {
                normals
            }
        }
    }
}

/// Goodness verdict; `failure` names the first offending face.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoodnessVerdict {
    pub good: bool,
    pub faces_checked: usize,
    pub failure: Option<FaceFailure>,
}

/// Goodness checked over a caller-supplied list of faces (any rank). Index
/// sets whose face is only the apex are skipped.
pub fn is_good_with_faces(
    diagram: &ToricDiagram,
    faces: &[Vec<usize>],
) -> Result<GoodnessVerdict, DiagramError> {
    let mut checked = 0;
    for face in faces {
        if face_witness(diagram, face)?.is_none() {
            continue;
        }
        checked += 1;
        let vecs: Vec<Vec<BigInt>> = face.iter().map(|&i| diagram.normal(i).to_vec()).collect();
        if sublattice_saturation_equal(&vecs) {
            continue;
        }
        let failure = if vector_rank(&vecs) < vecs.len() {
            FaceFailure::Dependent {
                normals: face.clone(),
            }
        } else {
            let m = IntMatrix::from_columns(&vecs).expect("nonempty face");
            let factors = smith_normal_form(&m)
                .diagonal()
                .into_iter()
                .filter(|x| !x.is_one())
                .collect();
            FaceFailure::NotSaturated {
                normals: face.clone(),
                invariant_factors: factors,
            }
        };
        return Ok(GoodnessVerdict {
            good: false,
            faces_checked: checked,
            failure: Some(failure),
        });
    }
    Ok(GoodnessVerdict {
        good: true,
        faces_checked: checked,
        failure: None,
    })
}

/// Goodness of a rank-3 cone over all its nonempty proper faces.
pub fn is_good(diagram: &ToricDiagram) -> Result<GoodnessVerdict, DiagramError> {
    let faces: Vec<Vec<usize>> = enumerate_faces_3d(diagram)?
        .into_iter()
        .map(|f| f.normals)
        .collect();
    is_good_with_faces(diagram, &faces)
}

/// Consecutive-difference criterion for a cyclic `(p, q)` loop: every step
/// has a coordinate of absolute value 1, or both coordinates are nonzero
/// and coprime.
pub fn height_one_steps_ok(loop_points: &[(BigInt, BigInt)]) -> Option<usize> {
    let d = loop_points.len();
    (0..d).find(|&i| {
        let (p0, q0) = &loop_points[i];
        let (p1, q1) = &loop_points[(i + 1) % d];
        let dp = p1 - p0;
        let dq = q1 - q0;
        let unit = dp.abs().is_one() || dq.abs().is_one();
        let coprime = !dp.is_zero() && !dq.is_zero() && dp.gcd(&dq).is_one();
        !(unit || coprime)
    })
}

/// Goodness via the height-1 step criterion (rank 3, normals `(1, p, q)`).
pub fn is_good_height1_3d(diagram: &ToricDiagram) -> Result<bool, DiagramError> {
    let polygon = diagram.height_one_polygon()?;
    Ok(height_one_steps_ok(&polygon).is_none())
}

/// Whether `ξ` pairs strictly positively with every extreme ray of `C`.
pub fn reeb_cone_contains(diagram: &ToricDiagram, xi: &[Rational]) -> bool {
    xi.len() == diagram.rank()
        && diagram
            .rays()
            .iter()
            .all(|r| dot_mixed(xi, &r.generator).is_positive())
}

pub fn reeb_cone_contains_f64(diagram: &ToricDiagram, xi: &[f64]) -> bool {
    xi.len() == diagram.rank()
        && diagram.rays().iter().all(|r| {
            r.generator
                .iter()
                .zip(xi)
                .map(|(g, x)| crate::json::bigint_to_f64(g) * x)
                .sum::<f64>()
                > 0.0
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ivec;

    fn diagram(normals: &[&[i64]]) -> Result<ToricDiagram, DiagramError> {
        ToricDiagram::from_i64(normals)
    }

    fn lens(l: i64) -> ToricDiagram {
        diagram(&[&[1, 0, 0], &[0, 1, 0], &[1, 1, l]]).unwrap()
    }

    #[test]
    fn lens_is_valid_and_good() {
        for l in 1..=6 {
            let d = lens(l);
            assert_eq!(d.rays().len(), 3);
            assert!(is_good(&d).unwrap().good);
        }
    }

    #[test]
    fn rejects_duplicate_direction() {
        let err = diagram(&[&[1, 0, 0], &[2, 0, 0], &[0, 1, 0], &[0, 0, 1]]).unwrap_err();
        assert_eq!(err, DiagramError::NonPrimitiveNormal(1));
        let err = diagram(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 0, 0]]).unwrap_err();
        assert_eq!(err, DiagramError::RedundantNormal(3));
    }

    #[test]
    fn rejects_empty_interior() {
        assert_eq!(
            diagram(&[&[1, 0, 0], &[-1, 0, 0]]).unwrap_err(),
            DiagramError::EmptyInterior
        );
        // full rank, but C is a 2-dimensional wedge
        assert_eq!(
            diagram(&[&[1, 0, 0], &[-1, 0, 0], &[0, 1, 0], &[0, 0, 1]]).unwrap_err(),
            DiagramError::EmptyInterior
        );
        assert_eq!(
            diagram(&[&[1, 0, 0], &[-1, 0, 0], &[0, 1, 0], &[0, -1, 0], &[0, 0, 1], &[0, 0, -1]])
                .unwrap_err(),
            DiagramError::EmptyInterior
        );
    }

    #[test]
    fn rejects_cone_with_a_line() {
        assert_eq!(
            diagram(&[&[1, 0, 0], &[0, 1, 0]]).unwrap_err(),
            DiagramError::NotStronglyConvex
        );
    }

    #[test]
    fn rejects_interior_redundant_normal() {
        // (1,1,1) is a positive combination of (1,0,0), (0,1,0), (1,1,2)
        assert_eq!(
            diagram(&[&[1, 0, 0], &[0, 1, 0], &[1, 1, 2], &[1, 1, 1]]).unwrap_err(),
            DiagramError::RedundantNormal(3)
        );
    }

    #[test]
    fn octant_faces() {
        let d = diagram(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]).unwrap();
        let faces = enumerate_faces_3d(&d).unwrap();
        assert_eq!(faces.len(), 6);
        assert!(faces[..3].iter().all(|f| f.normals.len() == 1));
        assert!(faces[3..].iter().all(|f| f.normals.len() == 2));
        assert!(faces.iter().all(|f| f.witness.is_some()));
        assert_eq!(d.cyclic_order(), Some(&[0, 1, 2][..]));
    }

    #[test]
    fn four_facet_cone_faces() {
        let d = diagram(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, -2]]).unwrap();
        let faces = enumerate_faces_3d(&d).unwrap();
        assert_eq!(faces.len(), 8);
        let order = d.cyclic_order().unwrap();
        // e1 and e2 are not adjacent
        let pos = |i| order.iter().position(|&x| x == i).unwrap();
        assert_eq!((pos(0) as i64 - pos(1) as i64).abs(), 2);
        assert_eq!(face_witness(&d, &[0, 1]).unwrap(), None);
    }

    #[test]
    fn unsaturated_edge_is_named() {
        // edge cut by (1,0,0) and (1,2,0): (1,1,0) is in the real span only
        let d = diagram(&[&[1, 0, 0], &[1, 2, 0], &[0, 0, 1]]).unwrap();
        let v = is_good(&d).unwrap();
        assert!(!v.good);
        let f = v.failure.unwrap();
        let mut names = f.normals().to_vec();
        names.sort();
        assert_eq!(names, vec![0, 1]);
    }

    #[test]
    fn z5_diagram() {
        let d = diagram(&[&[1, 0, 0], &[1, 2, 1], &[1, 3, 4]]).unwrap();
        assert!(is_good(&d).unwrap().good);
        assert!(is_good_height1_3d(&d).unwrap());
    }

    #[test]
    fn height_one_criterion_examples() {
        let p = |v: &[(i64, i64)]| -> Vec<(BigInt, BigInt)> {
            v.iter().map(|&(a, b)| (a.into(), b.into())).collect()
        };
        assert_eq!(height_one_steps_ok(&p(&[(0, 0), (1, 1), (0, 1)])), None);
        assert_eq!(height_one_steps_ok(&p(&[(0, 0), (2, 4), (0, 1)])), Some(0));
        assert_eq!(height_one_steps_ok(&p(&[(0, 0), (2, 3), (1, 2)])), None);
        assert_eq!(height_one_steps_ok(&p(&[(0, 0), (2, 3), (0, 1)])), Some(1));
        let d = diagram(&[&[1, 0, 0], &[1, 1, 1], &[1, 0, 1]]).unwrap();
        assert!(is_good_height1_3d(&d).unwrap());
        assert_eq!(
            is_good_height1_3d(&lens(2)),
            Err(DiagramError::NotHeightOne { index: 1 })
        );
    }

    #[test]
    fn reeb_cone_membership() {
        let q = |v: &[i64]| to_rational(&ivec(v));
        let octant = diagram(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]).unwrap();
        assert!(reeb_cone_contains(&octant, &q(&[1, 1, 1])));
        assert!(!reeb_cone_contains(&octant, &q(&[1, 0, 0])));
        let l2 = lens(2);
        assert_eq!(l2.normal_sum(), ivec(&[2, 2, 2]));
        assert!(reeb_cone_contains(&l2, &q(&[2, 2, 2])));
        assert!(reeb_cone_contains_f64(&l2, &[2.0, 2.0, 2.0]));
    }

    #[test]
    fn explicit_face_list_in_rank_4() {
        let d = diagram(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]]).unwrap();
        assert_eq!(d.cyclic_order(), None);
        assert!(is_good(&d).is_err());
        let faces: Vec<Vec<usize>> = (0..4)
            .flat_map(|k| (0..4).combinations(k + 1))
            .filter(|f| f.len() < 4)
            .collect();
        let v = is_good_with_faces(&d, &faces).unwrap();
        assert!(v.good);
        assert_eq!(v.faces_checked, 14);
    }
}
