//! Symplectic potentials on the interior of the moment cone, their Legendre
//! duals, and numerical checks of the geodesic equation along segments
//! `G_t = (1-t) G_0 + t G_1`.
//!
//! Everything here is `f64`; the lattice data comes from a validated
//! [`ToricDiagram`].

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use thiserror::Error;

use crate::cone::{reeb_cone_contains_f64, ToricDiagram};
use crate::json::bigint_to_f64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("point is on the boundary of or outside the cone")]
    BoundaryOrOutside,
    #[error("finite-difference stencil leaves the domain (step {h:e}, allowed {max:e})")]
    StencilOutsideDomain { h: f64, max: f64 },
    #[error("xi is not in the open Reeb cone")]
    NotInReebCone,
    #[error("potentials are defined on different diagrams")]
    MismatchedDiagrams,
    #[error("expected a point of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("segment parameter {0} is outside [0, 1]")]
    ParameterOutOfRange(f64),
    #[error("inverse Legendre transform did not converge (residual {0:e})")]
    NoConvergence(f64),
}

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A smooth function `g(y)` added to a potential.
#[derive(Clone)]
pub enum Perturbation {
    /// `⟨c, y⟩`.
    Linear(Vec<f64>),
    /// `y_i y_j / Σ_k y_k`.
    Ratio { i: usize, j: usize },
    /// `y_i²`.
    Square { i: usize },
    /// Arbitrary function; derivatives by central differences.
    Custom(ScalarFn),
}

impl fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear(c) => f.debug_tuple("Linear").field(c).finish(),
            Self::Ratio { i, j } => f.debug_struct("Ratio").field("i", i).field("j", j).finish(),
            Self::Square { i } => f.debug_struct("Square").field("i", i).finish(),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Perturbation {
    pub fn custom(g: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(g))
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        match self {
            Self::Linear(c) => c.iter().zip(y).map(|(a, b)| a * b).sum(),
            Self::Ratio { i, j } => y[*i] * y[*j] / y.iter().sum::<f64>(),
            Self::Square { i } => y[*i] * y[*i],
            Self::Custom(g) => g(y),
        }
    }

    pub fn gradient(&self, y: &[f64]) -> DVector<f64> {
        let n = y.len();
        match self {
            Self::Linear(c) => DVector::from_column_slice(c),
            Self::Ratio { i, j } => {
                let s: f64 = y.iter().sum();
                let p = y[*i] * y[*j];
                let mut g = DVector::from_element(n, -p / (s * s));
                g[*i] += y[*j] / s;
                g[*j] += y[*i] / s;
                g
            }
            Self::Square { i } => {
                let mut g = DVector::zeros(n);
                g[*i] = 2.0 * y[*i];
                g
            }
            Self::Custom(f) => {
                let h = 1e-5;
                DVector::from_fn(n, |k, _| {
                    let mut p = y.to_vec();
                    let mut m = y.to_vec();
                    p[k] += h;
                    m[k] -= h;
                    (f(&p) - f(&m)) / (2.0 * h)
                })
            }
        }
    }

    pub fn hessian(&self, y: &[f64]) -> DMatrix<f64> {
        let n = y.len();
        match self {
            Self::Linear(_) => DMatrix::zeros(n, n),
            Self::Ratio { i, j } => {
                let (i, j) = (*i, *j);
                let s: f64 = y.iter().sum();
                let p = y[i] * y[j];
                let d = |k: usize| -> f64 {
                    // ∂p/∂y_k
                    let mut v = 0.0;
                    if k == i {
                        v += y[j];
                    }
                    if k == j {
                        v += y[i];
                    }
                    v
                };
                DMatrix::from_fn(n, n, |a, b| {
                    let mut second = 0.0;
                    if (a == i && b == j) || (a == j && b == i) {
                        second += 1.0;
                    }
                    if i == j && a == i && b == i {
                        second = 2.0;
                    }
                    second / s - (d(a) + d(b)) / (s * s) + 2.0 * p / (s * s * s)
                })
            }
            Self::Square { i } => {
                let mut h = DMatrix::zeros(n, n);
                h[(*i, *i)] = 2.0;
                h
            }
            Self::Custom(_) => {
                let h = 1e-4;
                let mut m = DMatrix::zeros(n, n);
                for k in 0..n {
                    let mut p = y.to_vec();
                    let mut q = y.to_vec();
                    p[k] += h;
                    q[k] -= h;
                    let col = (self.gradient(&p) - self.gradient(&q)) / (2.0 * h);
                    m.set_column(k, &col);
                }
                (&m + m.transpose()) * 0.5
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum PotentialKind {
    /// `½ Σ l_i log l_i`.
    Canonical,
    /// `½ Σ l_i log l_i + ½ l_ξ log l_ξ - ½ l_∞ log l_∞`.
    CanonicalXi(Vec<f64>),
    /// `(1-t) G_0 + t G_1`.
    Segment {
        g0: Box<SymplecticPotential>,
        g1: Box<SymplecticPotential>,
        t: f64,
    },
    /// `G + g`.
    Shifted {
        base: Box<SymplecticPotential>,
        g: Perturbation,
    },
}

/// A torus-invariant symplectic potential `G(y)` on the interior of `C`.
#[derive(Debug, Clone)]
pub struct SymplecticPotential {
    diagram: ToricDiagram,
    normals: Vec<DVector<f64>>,
    canonical_reeb: DVector<f64>,
    kind: PotentialKind,
}

/// Everything known about a potential at one interior point.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSample {
    pub y: Vec<f64>,
    pub g: f64,
    /// `x = ∂G/∂y`.
    pub grad: Vec<f64>,
    pub hess: DMatrix<f64>,
    /// `F = ⟨y, x⟩ - G`.
    pub f: f64,
}

/// `ξ^can = Σ λ_i`.
pub fn canonical_reeb(diagram: &ToricDiagram) -> Vec<f64> {
    diagram.normal_sum().iter().map(bigint_to_f64).collect()
}

/// `Σ λ_i` over a raw list of normals.
pub fn normal_sum_f64(normals: &[Vec<BigInt>]) -> Vec<f64> {
    let n = normals.first().map_or(0, Vec::len);
    (0..n)
        .map(|k| normals.iter().map(|v| bigint_to_f64(&v[k])).sum())
        .collect()
}

fn xlogx(l: f64) -> f64 {
    l * l.ln()
}

impl SymplecticPotential {
    pub fn canonical(diagram: &ToricDiagram) -> Self {
        let normals = diagram
            .normals()
            .iter()
            .map(|v| DVector::from_iterator(v.len(), v.iter().map(bigint_to_f64)))
            .collect();
        Self {
            diagram: diagram.clone(),
            normals,
            canonical_reeb: DVector::from_vec(canonical_reeb(diagram)),
            kind: PotentialKind::Canonical,
        }
    }

    pub fn canonical_xi(diagram: &ToricDiagram, xi: &[f64]) -> Result<Self, PotentialError> {
        if !reeb_cone_contains_f64(diagram, xi) {
            return Err(PotentialError::NotInReebCone);
        }
        Ok(Self {
            kind: PotentialKind::CanonicalXi(xi.to_vec()),
            ..Self::canonical(diagram)
        })
    }

    pub fn shifted(&self, g: Perturbation) -> Self {
        Self {
            kind: PotentialKind::Shifted {
                base: Box::new(self.clone()),
                g,
            },
            ..self.base_fields()
        }
    }

    fn base_fields(&self) -> Self {
        Self {
            diagram: self.diagram.clone(),
            normals: self.normals.clone(),
            canonical_reeb: self.canonical_reeb.clone(),
            kind: PotentialKind::Canonical,
        }
    }

    pub fn diagram(&self) -> &ToricDiagram {
        &self.diagram
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn rank(&self) -> usize {
        self.diagram.rank()
    }

    /// `l_i(y) = ⟨λ_i, y⟩`.
    pub fn affine_values(&self, y: &[f64]) -> Vec<f64> {
        let y = DVector::from_column_slice(y);
        self.normals.iter().map(|l| l.dot(&y)).collect()
    }

    /// Distance from `y` to the boundary of `C` (negative outside).
    pub fn boundary_distance(&self, y: &[f64]) -> f64 {
        self.affine_values(y)
            .iter()
            .zip(&self.normals)
            .map(|(l, n)| l / n.norm())
            .fold(f64::INFINITY, f64::min)
    }

    fn check_point(&self, y: &[f64]) -> Result<(), PotentialError> {
        if y.len() != self.rank() {
            return Err(PotentialError::DimensionMismatch {
                expected: self.rank(),
                got: y.len(),
            });
        }
        if self.affine_values(y).iter().all(|&l| l > 0.0) {
            Ok(())
        } else {
            Err(PotentialError::BoundaryOrOutside)
        }
    }

    fn value_derivatives(&self, y: &[f64]) -> Result<(f64, DVector<f64>, DMatrix<f64>), PotentialError> {
        self.check_point(y)?;
        let n = self.rank();
        match &self.kind {
            PotentialKind::Canonical => {
                let mut g = 0.0;
                let mut grad = DVector::zeros(n);
                let mut hess = DMatrix::zeros(n, n);
                for (lambda, l) in self.normals.iter().zip(self.affine_values(y)) {
                    g += 0.5 * xlogx(l);
                    grad += lambda * (0.5 * (l.ln() + 1.0));
                    hess += lambda * lambda.transpose() * (0.5 / l);
                }
                Ok((g, grad, hess))
            }
            PotentialKind::CanonicalXi(xi) => {
                let base = Self {
                    kind: PotentialKind::Canonical,
                    ..self.base_fields()
                };
                let (mut g, mut grad, mut hess) = base.value_derivatives(y)?;
                let yv = DVector::from_column_slice(y);
                let xi = DVector::from_column_slice(xi);
                let l_xi = xi.dot(&yv);
                let l_inf = self.canonical_reeb.dot(&yv);
                if l_xi <= 0.0 || l_inf <= 0.0 {
                    return Err(PotentialError::BoundaryOrOutside);
                }
                g += 0.5 * xlogx(l_xi) - 0.5 * xlogx(l_inf);
                grad += &xi * (0.5 * (l_xi.ln() + 1.0));
                grad -= &self.canonical_reeb * (0.5 * (l_inf.ln() + 1.0));
                hess += &xi * xi.transpose() * (0.5 / l_xi);
                hess -= &self.canonical_reeb * self.canonical_reeb.transpose() * (0.5 / l_inf);
                Ok((g, grad, hess))
            }
            PotentialKind::Segment { g0, g1, t } => {
                let (a, ga, ha) = g0.value_derivatives(y)?;
                let (b, gb, hb) = g1.value_derivatives(y)?;
                Ok((
                    (1.0 - t) * a + t * b,
                    ga * (1.0 - t) + gb * *t,
                    ha * (1.0 - t) + hb * *t,
                ))
            }
            PotentialKind::Shifted { base, g } => {
                let (a, ga, ha) = base.value_derivatives(y)?;
                Ok((a + g.value(y), ga + g.gradient(y), ha + g.hessian(y)))
            }
        }
    }

    pub fn eval(&self, y: &[f64]) -> Result<PotentialSample, PotentialError> {
        let (g, grad, hess) = self.value_derivatives(y)?;
        let f = grad.dot(&DVector::from_column_slice(y)) - g;
        Ok(PotentialSample {
            y: y.to_vec(),
            g,
            grad: grad.iter().copied().collect(),
            hess,
            f,
        })
    }
}

pub fn eval_canonical(diagram: &ToricDiagram, y: &[f64]) -> Result<PotentialSample, PotentialError> {
    SymplecticPotential::canonical(diagram).eval(y)
}

pub fn eval_canonical_xi(
    diagram: &ToricDiagram,
    xi: &[f64],
    y: &[f64],
) -> Result<PotentialSample, PotentialError> {
    SymplecticPotential::canonical_xi(diagram, xi)?.eval(y)
}

/// `(x, F)` with `x = ∇G(y)` and `F = ⟨y, x⟩ - G(y)`.
pub fn legendre(potential: &SymplecticPotential, y: &[f64]) -> Result<(Vec<f64>, f64), PotentialError> {
    let s = potential.eval(y)?;
    Ok((s.grad, s.f))
}

/// Interior point `Σ r_j` over the extreme rays.
pub fn interior_point(diagram: &ToricDiagram) -> Vec<f64> {
    let mut y = vec![0.0; diagram.rank()];
    for r in diagram.rays() {
        for (a, b) in y.iter_mut().zip(&r.generator) {
            *a += bigint_to_f64(b);
        }
    }
    y
}

/// Solve `∇G(y) = x` by damped Newton on the convex function
/// `G(y) - ⟨x, y⟩`. Returns `y`.
pub fn inverse_legendre(
    potential: &SymplecticPotential,
    x: &[f64],
    guess: Option<&[f64]>,
) -> Result<Vec<f64>, PotentialError> {
    let n = potential.rank();
    if x.len() != n {
        return Err(PotentialError::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let xv = DVector::from_column_slice(x);
    let mut y = match guess {
        Some(g) => g.to_vec(),
        None => interior_point(potential.diagram()),
    };
    let phi = |y: &[f64]| -> Option<f64> {
        potential
            .value_derivatives(y)
            .ok()
            .map(|(g, _, _)| g - xv.dot(&DVector::from_column_slice(y)))
    };
    let tol = 1e-14 * (1.0 + xv.norm());
    let mut residual = f64::INFINITY;
    for _ in 0..200 {
        let (g, grad, hess) = potential.value_derivatives(&y)?;
        let r = &grad - &xv;
        residual = r.norm();
        if residual <= tol {
            return Ok(y);
        }
        let step = match hess.cholesky() {
            Some(c) => -c.solve(&r),
            None => -r.clone(),
        };
        let f0 = g - xv.dot(&DVector::from_column_slice(&y));
        let slope = r.dot(&step);
        let mut t = 1.0;
        let mut next = None;
        for _ in 0..60 {
            let trial: Vec<f64> = y.iter().zip(step.iter()).map(|(a, d)| a + t * d).collect();
            if let Some(ft) = phi(&trial) {
                if ft <= f0 + 1e-4 * t * slope || (t == 1.0 && ft <= f0 + 1e-12 * f0.abs()) {
                    next = Some(trial);
                    break;
                }
            }
            t *= 0.5;
        }
        match next {
            Some(trial) => y = trial,
            None => break,
        }
    }
    if residual < 1e-10 * (1.0 + xv.norm()) {
        Ok(y)
    } else {
        Err(PotentialError::NoConvergence(residual))
    }
}

fn same_diagram(a: &SymplecticPotential, b: &SymplecticPotential) -> bool {
    a.diagram.normals() == b.diagram.normals()
}

/// `G_t = (1-t) G_0 + t G_1`.
pub fn geodesic_segment(
    g0: &SymplecticPotential,
    g1: &SymplecticPotential,
    t: f64,
) -> Result<SymplecticPotential, PotentialError> {
    if !same_diagram(g0, g1) {
        return Err(PotentialError::MismatchedDiagrams);
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(PotentialError::ParameterOutOfRange(t));
    }
    Ok(SymplecticPotential {
        kind: PotentialKind::Segment {
            g0: Box::new(g0.clone()),
            g1: Box::new(g1.clone()),
            t,
        },
        ..g0.base_fields()
    })
}

/// `max_i |Σ_j y_j ∂_j ∂_i g|`, using a central difference along the
/// radial direction: `d/ds ∂_i g(s y)` at `s = 1`.
pub fn reeb_invariance_residual(
    diagram: &ToricDiagram,
    g: &Perturbation,
    y: &[f64],
) -> Result<f64, PotentialError> {
    SymplecticPotential::canonical(diagram).check_point(y)?;
    let h = 1e-4;
    let up: Vec<f64> = y.iter().map(|v| v * (1.0 + h)).collect();
    let down: Vec<f64> = y.iter().map(|v| v * (1.0 - h)).collect();
    let d = (g.gradient(&up) - g.gradient(&down)) / (2.0 * h);
    Ok(d.amax())
}

/// `∂²F/∂x²` at `x = ∇G(y)` by central differences of `y(x)`, since
/// `∂F/∂x = y`.
pub fn dual_hessian_fd(
    potential: &SymplecticPotential,
    y: &[f64],
    h: f64,
) -> Result<DMatrix<f64>, PotentialError> {
    let s = potential.eval(y)?;
    let n = y.len();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut xp = s.grad.clone();
        let mut xm = s.grad.clone();
        xp[j] += h;
        xm[j] -= h;
        let yp = inverse_legendre(potential, &xp, Some(y))?;
        let ym = inverse_legendre(potential, &xm, Some(y))?;
        for i in 0..n {
            m[(i, j)] = (yp[i] - ym[i]) / (2.0 * h);
        }
    }
    Ok((&m + m.transpose()) * 0.5)
}

/// Residual of `F̈ - ⟨∇_x Ḟ, (∂²F/∂x²)⁻¹ ∇_x Ḟ⟩` for `F_t` the Legendre dual
/// of `G_t = (1-t) G_0 + t G_1`, at `x_t = ∇G_t(y)`.
///
/// The points `y_{t±h}(x_t)` come from inverse Legendre transforms. At
/// fixed `x`, `∂F/∂x = y` and `Ḟ = -Ġ = G_0 - G_1` evaluated at `y_s(x)`,
/// so `F̈` and `∇_x Ḟ` are central differences in `t`, and
/// `(∂²F/∂x²)⁻¹ = ∂²G_t/∂y²`. The result is `O(h²)` along a geodesic.
pub fn geodesic_equation_residual(
    g0: &SymplecticPotential,
    g1: &SymplecticPotential,
    y: &[f64],
    t: f64,
    h: f64,
) -> Result<f64, PotentialError> {
    let gt = geodesic_segment(g0, g1, t)?;
    gt.check_point(y)?;
    let max = gt.boundary_distance(y) / 10.0;
    if h <= 0.0 || h > max || t - h < 0.0 || t + h > 1.0 {
        return Err(PotentialError::StencilOutsideDomain {
            h,
            max: max.min(t).min(1.0 - t),
        });
    }
    let sample = gt.eval(y)?;
    let x = &sample.grad;
    let y_m = inverse_legendre(&geodesic_segment(g0, g1, t - h)?, x, Some(y))?;
    let y_p = inverse_legendre(&geodesic_segment(g0, g1, t + h)?, x, Some(y))?;
    let f_dot = |y: &[f64]| -> Result<f64, PotentialError> { Ok(g0.eval(y)?.g - g1.eval(y)?.g) };

    let f_tt = (f_dot(&y_p)? - f_dot(&y_m)?) / (2.0 * h);
    let grad_ft = DVector::from_iterator(
        y.len(),
        y_p.iter().zip(&y_m).map(|(a, b)| (a - b) / (2.0 * h)),
    );
    let quad = grad_ft.dot(&(&sample.hess * &grad_ft));
    Ok((f_tt - quad).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn octant() -> ToricDiagram {
        ToricDiagram::from_i64(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]).unwrap()
    }

    fn lens(l: i64) -> ToricDiagram {
        ToricDiagram::from_i64(&[&[1, 0, 0], &[0, 1, 0], &[1, 1, l]]).unwrap()
    }

    #[test]
    fn canonical_reeb_sums_normals() {
        assert_eq!(canonical_reeb(&octant()), vec![1.0, 1.0, 1.0]);
        assert_eq!(canonical_reeb(&lens(2)), vec![2.0, 2.0, 2.0]);
        let four = crate::families::non_cy_normals(3).unwrap();
        assert_eq!(normal_sum_f64(&four), vec![3.0, 3.0, 5.0]);
    }

    #[test]
    fn canonical_values() {
        let s = eval_canonical(&octant(), &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.g, 0.0);
        assert!(s.grad.iter().all(|&x| (x - 0.5).abs() < 1e-15));
        assert!((s.f - 1.5).abs() < 1e-15);
        let e = std::f64::consts::E;
        let s = eval_canonical(&octant(), &[e, e, e]).unwrap();
        assert!((s.g - 1.5 * e).abs() < 1e-14);
        // l = (1, 1, 4)
        let s = eval_canonical(&lens(2), &[1.0, 1.0, 1.0]).unwrap();
        assert!((s.g - 0.5 * 4.0 * 4f64.ln()).abs() < 1e-14);
        assert_eq!(
            eval_canonical(&octant(), &[1.0, 0.0, 1.0]),
            Err(PotentialError::BoundaryOrOutside)
        );
    }

    #[test]
    fn canonical_xi_values() {
        let d = octant();
        let y = [0.3, 1.7, 0.9];
        let a = eval_canonical(&d, &y).unwrap();
        let b = eval_canonical_xi(&d, &[1.0, 1.0, 1.0], &y).unwrap();
        assert!((a.g - b.g).abs() < 1e-15);
        // l_ξ = 4, l_∞ = 3 at y = (1,1,1)
        let s = eval_canonical_xi(&d, &[2.0, 1.0, 1.0], &[1.0, 1.0, 1.0]).unwrap();
        let want = 0.5 * 4.0 * 4f64.ln() - 0.5 * 3.0 * 3f64.ln();
        assert!((s.g - want).abs() < 1e-14);
        assert!((s.f - 2.0).abs() < 1e-14);
        assert_eq!(
            SymplecticPotential::canonical_xi(&d, &[1.0, -1.0, 1.0]).unwrap_err(),
            PotentialError::NotInReebCone
        );
    }

    #[test]
    fn legendre_round_trip() {
        let d = lens(2);
        let pot = SymplecticPotential::canonical(&d);
        let y = [1.2, 0.8, 0.5];
        let (x, _) = legendre(&pot, &y).unwrap();
        let back = inverse_legendre(&pot, &x, None).unwrap();
        for (a, b) in back.iter().zip(&y) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn segment_endpoints_and_midpoint() {
        let d = octant();
        let g0 = SymplecticPotential::canonical(&d);
        let g1 = g0.shifted(Perturbation::Ratio { i: 0, j: 1 });
        let y = [0.7, 1.3, 2.0];
        let at = |t: f64| geodesic_segment(&g0, &g1, t).unwrap().eval(&y).unwrap().g;
        let base = g0.eval(&y).unwrap().g;
        let g = Perturbation::Ratio { i: 0, j: 1 }.value(&y);
        assert!((at(0.0) - base).abs() < 1e-15);
        assert!((at(1.0) - base - g).abs() < 1e-15);
        assert!((at(0.5) - base - g / 2.0).abs() < 1e-15);
        let other = SymplecticPotential::canonical(&lens(2));
        assert_eq!(
            geodesic_segment(&g0, &other, 0.5).unwrap_err(),
            PotentialError::MismatchedDiagrams
        );
    }

    #[test]
    fn perturbation_derivatives() {
        let y = [0.7, 1.3, 2.0];
        for p in [
            Perturbation::Ratio { i: 0, j: 1 },
            Perturbation::Ratio { i: 2, j: 2 },
            Perturbation::Square { i: 1 },
            Perturbation::Linear(vec![1.0, -2.0, 0.5]),
        ] {
            let f = p.clone();
            let fd = Perturbation::custom(move |y| f.value(y));
            assert!((p.gradient(&y) - fd.gradient(&y)).amax() < 1e-8, "{p:?}");
            assert!((p.hessian(&y) - fd.hessian(&y)).amax() < 1e-5, "{p:?}");
        }
    }

    #[test]
    fn reeb_invariance() {
        let d = octant();
        let y = [1.0, 1.0, 1.0];
        let lin = Perturbation::Linear(vec![1.0, 2.0, 3.0]);
        assert!(reeb_invariance_residual(&d, &lin, &y).unwrap() < 1e-12);
        let ratio = Perturbation::Ratio { i: 0, j: 1 };
        assert!(reeb_invariance_residual(&d, &ratio, &[0.4, 1.1, 2.5]).unwrap() < 1e-6);
        let sq = Perturbation::Square { i: 0 };
        assert!((reeb_invariance_residual(&d, &sq, &y).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn geodesic_residual_trivial_cases() {
        let d = octant();
        let g0 = SymplecticPotential::canonical(&d);
        let y = [1.0, 1.0, 1.0];
        assert!(geodesic_equation_residual(&g0, &g0, &y, 0.5, 1e-3).unwrap() < 1e-8);
        let g1 = g0.shifted(Perturbation::Linear(vec![0.3, -0.2, 0.1]));
        assert!(geodesic_equation_residual(&g0, &g1, &y, 0.5, 1e-4).unwrap() < 1e-8);
        assert!(matches!(
            geodesic_equation_residual(&g0, &g1, &y, 0.5, 0.2),
            Err(PotentialError::StencilOutsideDomain { .. })
        ));
        assert!(matches!(
            geodesic_equation_residual(&g0, &g1, &y, 0.0005, 1e-3),
            Err(PotentialError::StencilOutsideDomain { .. })
        ));
    }
}
