//! Toric-diagram-of-height-`ℓ` structure.
//!
//! A diagram carries this structure when there is a rational covector `γ`
//! with `⟨γ, λ_i⟩ = -1` for every normal; the height `ℓ` is the least
//! positive integer making `ℓγ` integral (and then automatically primitive).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cone::{DiagramError, ToricDiagram};
use crate::lattice::{
    common_denominator, complete_to_unimodular, is_primitive, smith_normal_form, solve_rational,
    to_rational, vector_rank, IntMatrix, LatticeError, Rational,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CyError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("normals do not span the dual space; gamma is underdetermined")]
    RankDeficient,
    #[error("normal at index {index} does not have first component equal to the height")]
    NotNormalized { index: usize },
    #[error("normalizer check failed: {0}")]
    BadNormalizer(String),
}

/// The covector `γ`, the height `ℓ`, and (after normalization) the matrix
/// `A ∈ SL(m+1, Z)` with `A·(ℓγ) = (-1, 0, …, 0)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CalabiYauData {
    #[serde(serialize_with = "crate::json::ser_rational_vec")]
    pub gamma: Vec<Rational>,
    #[serde(serialize_with = "crate::json::ser_bigint")]
    pub height: BigInt,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_matrix")]
    pub normalizer: Option<IntMatrix>,
}

fn ser_opt_matrix<S: serde::Serializer>(m: &Option<IntMatrix>, s: S) -> Result<S::Ok, S::Error> {
    match m {
        Some(m) => crate::json::ser_matrix(m, s),
        None => s.serialize_none(),
    }
}

impl CalabiYauData {
    /// `ℓγ` as an integer vector.
    pub fn scaled_gamma(&self) -> Vec<BigInt> {
        self.gamma
            .iter()
            .map(|g| (g * Rational::from_integer(self.height.clone())).to_integer())
            .collect()
    }

    pub fn gamma_f64(&self) -> Vec<f64> {
        self.gamma.iter().map(crate::json::rational_to_f64).collect()
    }

    pub fn with_normalizer(mut self, a: IntMatrix) -> Self {
        self.normalizer = Some(a);
        self
    }
}

/// Solve `⟨γ, λ_i⟩ = -1` on a raw list of normals (validated or not).
/// `Ok(None)` means the overdetermined system is inconsistent.
pub fn solve_gamma(normals: &[Vec<BigInt>]) -> Result<Option<CalabiYauData>, CyError> {
    let n = normals.first().map(Vec::len).unwrap_or(0);
    if n == 0 || vector_rank(normals) < n {
        return Err(CyError::RankDeficient);
    }
    let a: Vec<Vec<Rational>> = normals.iter().map(|v| to_rational(v)).collect();
    let b = vec![-Rational::one(); normals.len()];
    let Some(gamma) = solve_rational(&a, &b) else {
        return Ok(None);
    };
    let height = common_denominator(&gamma);
    let data = CalabiYauData {
        gamma,
        height,
        normalizer: None,
    };
    // ⟨γ,λ⟩ = -1 forces ℓγ primitive: a common factor would divide 1
    debug_assert!(is_primitive(&data.scaled_gamma()).unwrap_or(false));
    Ok(Some(data))
}

/// `γ` and `ℓ` for a validated diagram, or `None` when no `γ` exists.
pub fn compute_gamma(diagram: &ToricDiagram) -> Option<CalabiYauData> {
    solve_gamma(diagram.normals()).expect("validated diagrams have full rank")
}

/// Check that `a` puts the diagram in height-`ℓ` normal form and return the
/// transformed diagram `ᵗA⁻¹ λ_i`.
pub fn verify_normalizer(
    diagram: &ToricDiagram,
    cy: &CalabiYauData,
    a: &IntMatrix,
) -> Result<ToricDiagram, CyError> {
    if !a.is_square() || a.rows() != diagram.rank() {
        return Err(CyError::BadNormalizer("wrong shape".into()));
    }
    if !a.determinant().is_one() {
        return Err(CyError::BadNormalizer("determinant is not 1".into()));
    }
    let ag = a.mul_rational_vec(&cy.gamma);
    let mut target = vec![Rational::zero(); diagram.rank()];
    target[0] = -Rational::new(BigInt::one(), cy.height.clone());
    if ag != target {
        return Err(CyError::BadNormalizer(format!(
            "A·gamma = {:?}, expected (-1/{}, 0, …)",
            ag.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            cy.height
        )));
    }
    let transformed = diagram.transformed(a)?;
    if let Some(index) = transformed
        .normals()
        .iter()
        .position(|v| v[0] != cy.height)
    {
        return Err(CyError::NotNormalized { index });
    }
    Ok(transformed)
}

/// Result of [`normalize_height`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalization {
    pub matrix: IntMatrix,
    pub diagram: ToricDiagram,
    /// `Aγ = (-1/ℓ, 0, …, 0)`.
    pub gamma: Vec<Rational>,
}

/// Move `γ` to `(-1/ℓ, 0, …, 0)` by an `SL(m+1, Z)` change of basis, which
/// makes every normal's first component equal to `ℓ`.
pub fn normalize_height(
    diagram: &ToricDiagram,
    cy: &CalabiYauData,
) -> Result<Normalization, CyError> {
    let a = complete_to_unimodular(&cy.scaled_gamma())?;
    let transformed = verify_normalizer(diagram, cy, &a)?;
    let gamma = a.mul_rational_vec(&cy.gamma);
    Ok(Normalization {
        matrix: a,
        diagram: transformed,
        gamma,
    })
}

/// Data of the kernel `K` of the torus map `T^d → T^{m+1}` induced by the
/// normals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KernelLattice {
    /// Integer basis of `ker β` (a basis of the Lie algebra of `K`).
    #[serde(serialize_with = "crate::json::ser_bigint_rows")]
    pub basis: Vec<Vec<BigInt>>,
    /// Invariant factors of `K / K₀`, i.e. of `Z^{m+1} / 𝓛`.
    #[serde(serialize_with = "crate::json::ser_bigint_vec")]
    pub component_group: Vec<BigInt>,
    /// Whether `ℓ·Σ a_i ∈ Z` for every `a` with `Σ a_i λ_i ∈ Z^{m+1}`.
    pub row_sum_times_height_integral: bool,
}

/// Kernel lattice of a height-`ℓ` normalized diagram.
pub fn kernel_lattice(diagram: &ToricDiagram, cy: &CalabiYauData) -> Result<KernelLattice, CyError> {
    if let Some(index) = diagram.normals().iter().position(|v| v[0] != cy.height) {
        return Err(CyError::NotNormalized { index });
    }
    let lambda = diagram.normal_matrix();
    let snf = smith_normal_form(&lambda);
    let r = snf.rank();
    let d = diagram.len();

    let basis: Vec<Vec<BigInt>> = (r..d).map(|j| snf.v.column(j)).collect();
    debug_assert!(basis
        .iter()
        .all(|b| lambda.mul_vec(b).iter().all(Zero::is_zero)));

    // Preimage of Z^{m+1}: spanned by V e_i / d_i (i < r) plus the real
    // span of the kernel columns.
    let diag = snf.diagonal();
    let column_sum = |j: usize| -> BigInt { snf.v.column(j).iter().sum() };
    let finite_ok = (0..r).all(|i| (&cy.height * column_sum(i)).is_multiple_of(&diag[i]));
    let kernel_ok = (r..d).all(|j| column_sum(j).is_zero());

    let component_group = diag
        .into_iter()
        .filter(|x| x.is_positive() && !x.is_one())
        .collect();
    Ok(KernelLattice {
        basis,
        component_group,
        row_sum_times_height_integral: finite_ok && kernel_ok,
    })
}
