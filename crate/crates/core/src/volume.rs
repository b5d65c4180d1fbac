//! Volume of the truncated moment cone `Δ_ξ = {y ∈ C : ⟨y, ξ⟩ ≤ 1}` as a
//! function of the Reeb vector, and its minimization on the slice
//! `⟨γ, ξ⟩ = -(m+1)`.
//!
//! Volumes are raw Euclidean volumes of `Δ_ξ`; the Sasakian volume differs
//! by a dimensional constant that does not move the minimizer.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::cone::ToricDiagram;
use crate::cy::CalabiYauData;
use crate::json::bigint_to_f64;
use crate::lattice::{dot_mixed, vector_rank, IntMatrix, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VolumeError {
    #[error("xi has {got} components, diagram rank is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("xi is not in the open Reeb cone; the truncated region is unbounded")]
    UnboundedRegion,
    #[error("starting point is not on the slice <gamma, xi> = -{rank} inside the Reeb cone")]
    InfeasibleSlice { rank: usize },
    #[error("optimizer stopped after {iterations} iterations with gradient norm {gradient_norm:e}")]
    NoConvergence {
        iterations: usize,
        gradient_norm: f64,
    },
}

/// A triangulation of `C` into simplicial cones spanned by extreme rays.
#[derive(Debug, Clone)]
pub struct ConeTriangulation {
    rank: usize,
    rays: Vec<Vec<BigInt>>,
    rays_f64: Vec<Vec<f64>>,
    /// Ray indices of each maximal simplicial cone with `|det|`.
    simplices: Vec<(Vec<usize>, BigInt)>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl ConeTriangulation {
    /// Pulling triangulation: pull the first ray of every face, recursing
    /// into the facets of that face which miss it.
    pub fn new(diagram: &ToricDiagram) -> Self {
        let rays: Vec<Vec<BigInt>> = diagram.rays().iter().map(|r| r.generator.clone()).collect();
        let incident: Vec<BTreeSet<usize>> = (0..diagram.len())
            .map(|j| {
                diagram
                    .rays()
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| r.incident.contains(&j))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        let all: Vec<usize> = (0..rays.len()).collect();
        let cells = pull(&all, diagram.rank(), &rays, &incident);
        let simplices = cells
            .into_iter()
            .map(|cell| {
                let m: Vec<Vec<BigInt>> = cell.iter().map(|&i| rays[i].clone()).collect();
                let det = IntMatrix::from_rows(&m).expect("square").determinant().abs();
                (cell, det)
            })
            .collect();
        let rays_f64 = rays
            .iter()
            .map(|r| r.iter().map(bigint_to_f64).collect())
            .collect();
        Self {
            rank: diagram.rank(),
            rays,
            rays_f64,
            simplices,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn simplex_count(&self) -> usize {
        self.simplices.len()
    }

    pub fn simplices(&self) -> impl Iterator<Item = &[usize]> {
        self.simplices.iter().map(|(c, _)| c.as_slice())
    }

    fn pairings(&self, xi: &[f64]) -> Result<Vec<f64>, VolumeError> {
        if xi.len() != self.rank {
            return Err(VolumeError::DimensionMismatch {
                expected: self.rank,
                got: xi.len(),
            });
        }
        let a: Vec<f64> = self
            .rays_f64
            .iter()
            .map(|r| r.iter().zip(xi).map(|(p, q)| p * q).sum())
            .collect();
        if a.iter().all(|&x| x > 0.0 && x.is_finite()) {
            Ok(a)
        } else {
            Err(VolumeError::UnboundedRegion)
        }
    }

    pub fn volume(&self, xi: &[f64]) -> Result<f64, VolumeError> {
        let a = self.pairings(xi)?;
        let nf = factorial(self.rank);
        Ok(self
            .simplices
            .iter()
            .map(|(cell, det)| bigint_to_f64(det) / (nf * cell.iter().map(|&i| a[i]).product::<f64>()))
            .sum())
    }

    /// Volume, gradient and Hessian in closed form. For one simplicial cone
    /// `V_S = |det| / (n! Π a_s)` with `a_s = ⟨ξ, r_s⟩`, so
    /// `∇V_S = -V_S Σ r_s/a_s` and
    /// `∇²V_S = V_S [(Σ r_s/a_s)(Σ r_s/a_s)ᵗ + Σ r_s r_sᵗ/a_s²]`.
    pub fn volume_derivatives(
        &self,
        xi: &[f64],
    ) -> Result<(f64, DVector<f64>, DMatrix<f64>), VolumeError> {
        let a = self.pairings(xi)?;
        let n = self.rank;
        let nf = factorial(n);
        let mut v = 0.0;
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        for (cell, det) in &self.simplices {
            let vs = bigint_to_f64(det) / (nf * cell.iter().map(|&i| a[i]).product::<f64>());
            let mut s = DVector::zeros(n);
            let mut q = DMatrix::zeros(n, n);
            for &i in cell {
                let r = DVector::from_column_slice(&self.rays_f64[i]) / a[i];
                s += &r;
                q += &r * r.transpose();
            }
            v += vs;
            g -= &s * vs;
            h += (&s * s.transpose() + q) * vs;
        }
        Ok((v, g, h))
    }

    /// Exact volume for rational `ξ`.
    pub fn volume_exact(&self, xi: &[Rational]) -> Result<Rational, VolumeError> {
        if xi.len() != self.rank {
            return Err(VolumeError::DimensionMismatch {
                expected: self.rank,
                got: xi.len(),
            });
        }
        let a: Vec<Rational> = self.rays.iter().map(|r| dot_mixed(xi, r)).collect();
        if !a.iter().all(Signed::is_positive) {
            return Err(VolumeError::UnboundedRegion);
        }
        let nf: BigInt = (1..=self.rank).map(BigInt::from).product();
        let mut total = Rational::zero();
        for (cell, det) in &self.simplices {
            let denom: Rational = cell.iter().map(|&i| a[i].clone()).product();
            total += Rational::new(det.clone(), nf.clone()) / denom;
        }
        Ok(total)
    }
}

/// Maximal simplicial cones of a pulling triangulation of the face spanned
/// by `face` (ray indices) of dimension `dim`.
fn pull(
    face: &[usize],
    dim: usize,
    rays: &[Vec<BigInt>],
    incident: &[BTreeSet<usize>],
) -> Vec<Vec<usize>> {
    if face.len() == dim {
        return vec![face.to_vec()];
    }
    let apex = face[0];
    let mut facets: BTreeSet<Vec<usize>> = BTreeSet::new();
    for inc in incident {
        let sub: Vec<usize> = face.iter().copied().filter(|i| inc.contains(i)).collect();
        if sub.contains(&apex) || sub.len() < dim - 1 {
            continue;
        }
        let generators: Vec<Vec<BigInt>> = sub.iter().map(|&i| rays[i].clone()).collect();
        if vector_rank(&generators) == dim - 1 {
            facets.insert(sub);
        }
    }
    let mut out = Vec::new();
    for facet in facets {
        for mut cell in pull(&facet, dim - 1, rays, incident) {
            cell.insert(0, apex);
            out.push(cell);
        }
    }
    out
}

/// Vertices of `Δ_ξ`: the origin and `r_j / ⟨ξ, r_j⟩` for each extreme ray.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPolytope {
    pub vertices: Vec<Vec<f64>>,
}

pub fn truncated_polytope(diagram: &ToricDiagram, xi: &[f64]) -> Result<TruncatedPolytope, VolumeError> {
    let a = ConeTriangulation::new(diagram).pairings(xi)?;
    let mut vertices = vec![vec![0.0; diagram.rank()]];
    for (ray, ai) in diagram.rays().iter().zip(&a) {
        vertices.push(ray.generator.iter().map(|g| bigint_to_f64(g) / ai).collect());
    }
    Ok(TruncatedPolytope { vertices })
}

/// Exact vertices of `Δ_ξ` for rational `ξ`.
pub fn truncated_polytope_exact(
    diagram: &ToricDiagram,
    xi: &[Rational],
) -> Result<Vec<Vec<Rational>>, VolumeError> {
    if xi.len() != diagram.rank() {
        return Err(VolumeError::DimensionMismatch {
            expected: diagram.rank(),
            got: xi.len(),
        });
    }
    let mut vertices = vec![vec![Rational::zero(); diagram.rank()]];
    for ray in diagram.rays() {
        let a = dot_mixed(xi, &ray.generator);
        if !a.is_positive() {
            return Err(VolumeError::UnboundedRegion);
        }
        vertices.push(
            ray.generator
                .iter()
                .map(|g| Rational::from_integer(g.clone()) / &a)
                .collect(),
        );
    }
    Ok(vertices)
}

pub fn volume(diagram: &ToricDiagram, xi: &[f64]) -> Result<f64, VolumeError> {
    ConeTriangulation::new(diagram).volume(xi)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ReebMinimum {
    pub xi: Vec<f64>,
    pub volume: f64,
    /// Norm of the volume gradient projected to the slice.
    pub gradient_norm: f64,
    pub iterations: usize,
}

/// Orthonormal basis (columns) of `γ^⊥`.
pub fn slice_basis(gamma: &[f64]) -> DMatrix<f64> {
    let n = gamma.len();
    let mut basis: Vec<DVector<f64>> = vec![DVector::from_column_slice(gamma).normalize()];
    for i in 0..n {
        if basis.len() == n {
            break;
        }
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        for b in &basis {
            e -= b * b.dot(&e);
        }
        for b in &basis {
            e -= b * b.dot(&e);
        }
        if e.norm() > 1e-8 {
            basis.push(e.normalize());
        }
    }
    DMatrix::from_columns(&basis[1..])
}

/// The canonical start `(m+1)/d · Σ λ_i`, which lies on the slice.
pub fn canonical_start(diagram: &ToricDiagram) -> Vec<f64> {
    weighted_start(diagram, &vec![1.0; diagram.len()])
}

/// `Σ c_i λ_i` rescaled onto the slice; feasible for any positive weights.
pub fn weighted_start(diagram: &ToricDiagram, weights: &[f64]) -> Vec<f64> {
    let n = diagram.rank();
    let total: f64 = weights.iter().sum();
    let mut xi = vec![0.0; n];
    for (lambda, w) in diagram.normals().iter().zip(weights) {
        for (x, l) in xi.iter_mut().zip(lambda) {
            *x += w * bigint_to_f64(l);
        }
    }
    xi.iter().map(|x| x * n as f64 / total).collect()
}

fn check_feasible(
    tri: &ConeTriangulation,
    gamma: &[f64],
    xi: &[f64],
) -> Result<(), VolumeError> {
    let n = tri.rank();
    let infeasible = VolumeError::InfeasibleSlice { rank: n };
    if xi.len() != n {
        return Err(infeasible);
    }
    let on_slice: f64 = gamma.iter().zip(xi).map(|(g, x)| g * x).sum::<f64>() + n as f64;
    if on_slice.abs() > 1e-9 * n as f64 {
        return Err(infeasible);
    }
    tri.pairings(xi).map(|_| ()).map_err(|_| infeasible)
}

fn add_scaled(xi: &[f64], dir: &DVector<f64>, t: f64) -> Vec<f64> {
    xi.iter().zip(dir.iter()).map(|(x, d)| x + t * d).collect()
}

pub fn minimize_volume(diagram: &ToricDiagram, cy: &CalabiYauData) -> Result<ReebMinimum, VolumeError> {
    minimize_volume_from(diagram, cy, &canonical_start(diagram))
}

/// Damped Newton on `log V` in orthonormal slice coordinates, with
/// backtracking that keeps iterates inside the Reeb cone.
pub fn minimize_volume_from(
    diagram: &ToricDiagram,
    cy: &CalabiYauData,
    start: &[f64],
) -> Result<ReebMinimum, VolumeError> {
    const MAX_ITER: usize = 200;
    let tri = ConeTriangulation::new(diagram);
    let gamma = cy.gamma_f64();
    check_feasible(&tri, &gamma, start)?;
    let q = slice_basis(&gamma);

    let mut xi = start.to_vec();
    let mut iterations = 0;
    loop {
        let (v, g, h) = tri.volume_derivatives(&xi)?;
        let grad_v = q.transpose() * &g;
        if grad_v.norm() < 1e-14 || iterations == MAX_ITER {
            break;
        }
        let grad_f = &grad_v / v;
        let hess_f = q.transpose() * (&h / v - &g * g.transpose() / (v * v)) * &q;
        let dz = match hess_f.clone().cholesky() {
            Some(c) => -c.solve(&grad_f),
            None => -grad_f.clone(),
        };
        let dir = &q * &dz;
        let slope = grad_f.dot(&dz);
        let f0 = v.ln();
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = add_scaled(&xi, &dir, t);
            if let Ok(vt) = tri.volume(&trial) {
                if vt.ln() <= f0 + 1e-4 * t * slope {
                    accepted = Some(trial);
                    break;
                }
            }
            t *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some(next) => {
                let moved = next
                    .iter()
                    .zip(&xi)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                xi = next;
                if moved < 1e-16 {
                    break;
                }
            }
            // no decrease representable in floating point
            None => break,
        }
    }
    let (v, g, _) = tri.volume_derivatives(&xi)?;
    let gradient_norm = (q.transpose() * g).norm();
    let scale = v.max(1.0);
    if gradient_norm > 1e-8 * scale {
        return Err(VolumeError::NoConvergence {
            iterations,
            gradient_norm,
        });
    }
    Ok(ReebMinimum {
        xi,
        volume: v,
        gradient_norm,
        iterations,
    })
}

/// Independent second optimizer: projected gradient descent on `log V`
/// with central finite-difference gradients and Barzilai-Borwein steps.
pub fn minimize_volume_projected_gradient(
    diagram: &ToricDiagram,
    cy: &CalabiYauData,
    start: &[f64],
) -> Result<ReebMinimum, VolumeError> {
    const MAX_ITER: usize = 20_000;
    let tri = ConeTriangulation::new(diagram);
    let gamma = cy.gamma_f64();
    check_feasible(&tri, &gamma, start)?;
    let q = slice_basis(&gamma);
    let p = &q * q.transpose();
    let n = tri.rank();

    let log_v = |x: &[f64]| tri.volume(x).map(f64::ln);
    let fd_grad = |x: &[f64]| -> Result<DVector<f64>, VolumeError> {
        let scale = x.iter().map(|v| v.abs()).fold(1.0, f64::max);
        let h = 1e-5 * scale;
        let mut g = DVector::zeros(n);
        for i in 0..n {
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            plus[i] += h;
            minus[i] -= h;
            g[i] = (log_v(&plus)? - log_v(&minus)?) / (2.0 * h);
        }
        Ok(&p * g)
    };

    let mut xi = start.to_vec();
    let mut f = log_v(&xi)?;
    let mut g = fd_grad(&xi)?;
    let mut step = 1e-2;
    let mut iterations = 0;
    while g.norm() > 1e-10 && iterations < MAX_ITER {
        let mut t = step;
        let mut next = None;
        for _ in 0..60 {
            let trial = add_scaled(&xi, &g, -t);
            if let Ok(ft) = log_v(&trial) {
                if ft <= f - 1e-4 * t * g.norm_squared() {
                    next = Some((trial, ft));
                    break;
                }
            }
            t *= 0.5;
        }
        iterations += 1;
        let Some((x_new, f_new)) = next else { break };
        let g_new = fd_grad(&x_new)?;
        let s = DVector::from_iterator(n, x_new.iter().zip(&xi).map(|(a, b)| a - b));
        let y = &g_new - &g;
        let sy = s.dot(&y);
        step = if sy > 0.0 { s.norm_squared() / sy } else { 1e-2 };
        xi = x_new;
        f = f_new;
        g = g_new;
    }
    let (v, grad, _) = tri.volume_derivatives(&xi)?;
    let gradient_norm = (q.transpose() * grad).norm();
    if g.norm() > 1e-7 {
        return Err(VolumeError::NoConvergence {
            iterations,
            gradient_norm,
        });
    }
    Ok(ReebMinimum {
        xi,
        volume: v,
        gradient_norm,
        iterations,
    })
}
