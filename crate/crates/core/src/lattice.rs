//! Exact integer and rational linear algebra.
//!
//! Everything here works on arbitrary-precision integers ([`BigInt`]) and
//! rationals ([`BigRational`]); no floating point is involved, so lattice
//! verdicts (primitivity, saturation, invariant factors) are exact.

use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational scalar.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("ragged input: row {row} has {got} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, got: usize },
    #[error("the zero vector has no primitivity")]
    ZeroVector,
    #[error("vector is not primitive (gcd of entries is {gcd})")]
    NotPrimitive { gcd: BigInt },
    #[error("no element of SL(1, Z) sends {value} to -1")]
    RankOneTarget { value: BigInt },
    #[error("matrix is not unimodular")]
    NotUnimodular,
}

/// Convert a slice of machine integers into a lattice vector.
pub fn ivec(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Lift an integer vector to rationals.
pub fn to_rational(v: &[BigInt]) -> Vec<Rational> {
    v.iter().map(|x| Rational::from_integer(x.clone())).collect()
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_rational(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Rational vector times integer vector.
pub fn dot_mixed(a: &[Rational], b: &[BigInt]) -> Rational {
    a.iter()
        .zip(b)
        .map(|(x, y)| x * Rational::from_integer(y.clone()))
        .sum()
}

/// Non-negative gcd of all entries (0 for the zero vector).
pub fn content(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

/// Divide out the content; the zero vector is returned unchanged.
pub fn primitive_part(v: &[BigInt]) -> Vec<BigInt> {
    let g = content(v);
    if g.is_zero() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self, LatticeError> {
        if rows == 0 || cols == 0 {
            return Err(LatticeError::EmptyMatrix);
        }
        Ok(Self {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n.max(1), n.max(1)).expect("nonzero size");
        for i in 0..m.rows {
            m.data[i * m.cols + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<BigInt>]) -> Result<Self, LatticeError> {
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        let mut m = Self::zeros(rows.len(), cols)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(LatticeError::Ragged {
                    row: i,
                    expected: cols,
                    got: row.len(),
                });
            }
            m.data[i * cols..(i + 1) * cols].clone_from_slice(row);
        }
        Ok(m)
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self, LatticeError> {
        let rows: Vec<Vec<BigInt>> = rows.iter().map(|r| ivec(r)).collect();
        Self::from_rows(&rows)
    }

    /// Matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[Vec<BigInt>]) -> Result<Self, LatticeError> {
        Ok(Self::from_rows(columns)?.transpose())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: BigInt) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows).expect("nonzero size");
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols, "dimension mismatch in mul_vec");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn mul_rational_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols, "dimension mismatch in mul_rational_vec");
        (0..self.rows)
            .map(|i| dot_mixed(v, self.row(i)))
            .collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    fn to_rational_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| to_rational(self.row(i))).collect()
    }

    /// Determinant of a square matrix (fraction-free Bareiss elimination).
    pub fn determinant(&self) -> BigInt {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.to_rows();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
                a[i][k] = BigInt::zero();
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    pub fn rank(&self) -> usize {
        let (_, pivots) = row_reduce(self.to_rational_rows());
        pivots.len()
    }

    /// Exact inverse of a matrix with determinant ±1.
    pub fn inverse_unimodular(&self) -> Result<Self, LatticeError> {
        if !self.is_square() || !self.determinant().abs().is_one() {
            return Err(LatticeError::NotUnimodular);
        }
        let n = self.rows;
        let aug: Vec<Vec<Rational>> = self
            .to_rational_rows()
            .into_iter()
            .enumerate()
            .map(|(i, mut row)| {
                row.extend((0..n).map(|j| {
                    if i == j {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                }));
                row
            })
            .collect();
        let (reduced, _) = row_reduce(aug);
        let mut inv = Self::zeros(n, n)?;
        for i in 0..n {
            for j in 0..n {
                let q = &reduced[i][n + j];
                debug_assert!(q.is_integer());
                inv.set(i, j, q.to_integer());
            }
        }
        Ok(inv)
    }

    /// The transpose of the inverse, i.e. the induced action on the dual lattice.
    pub fn inverse_transpose(&self) -> Result<Self, LatticeError> {
        Ok(self.inverse_unimodular()?.transpose())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[target] += k * row[source]
    fn add_row_multiple(&mut self, target: usize, source: usize, k: &BigInt) {
        for j in 0..self.cols {
            let v = self.get(source, j) * k;
            self.data[target * self.cols + j] += v;
        }
    }

    /// col[target] += k * col[source]
    fn add_col_multiple(&mut self, target: usize, source: usize, k: &BigInt) {
        for i in 0..self.rows {
            let v = self.get(i, source) * k;
            self.data[i * self.cols + target] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.get(i, j);
            self.set(i, j, v);
        }
    }

    /// Replace rows `a`, `b` by `[[p, q], [r, s]] * [row_a; row_b]`.
    fn combine_rows(&mut self, a: usize, b: usize, coeffs: [&BigInt; 4]) {
        let [p, q, r, s] = coeffs;
        for j in 0..self.cols {
            let x = self.get(a, j).clone();
            let y = self.get(b, j).clone();
            self.set(a, j, p * &x + q * &y);
            self.set(b, j, r * &x + s * &y);
        }
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;

    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let mut out = IntMatrix::zeros(self.rows, rhs.cols).expect("nonzero size");
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = a * rhs.get(k, j);
                    out.data[i * rhs.cols + j] += v;
                }
            }
        }
        out
    }
}

/// Reduced row echelon form over the rationals; returns the reduced rows and
/// the pivot column of each nonzero row.
pub fn row_reduce(mut m: Vec<Vec<Rational>>) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let rows = m.len();
    let cols = m.first().map(Vec::len).unwrap_or(0);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let v = &f * &m[r][j];
                    m[i][j] -= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (m, pivots)
}

/// Solve `A x = b` exactly. Returns `None` when the system is inconsistent;
/// free variables (if any) are set to zero.
pub fn solve_rational(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.first().map(Vec::len).unwrap_or(0);
    let aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let (red, pivots) = row_reduce(aug);
    if pivots.last() == Some(&n) {
        return None;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = red[i][n].clone();
    }
    Some(x)
}

/// Rank of a family of integer vectors.
pub fn vector_rank(vectors: &[Vec<BigInt>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let rows: Vec<Vec<Rational>> = vectors.iter().map(|v| to_rational(v)).collect();
    row_reduce(rows).1.len()
}

/// Smith normal form `U·M·V = D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnfDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SnfDecomposition {
    /// The diagonal of `D` (length `min(rows, cols)`), zeros included.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols()))
            .map(|i| self.d.get(i, i).clone())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }

    /// Invariant factors of the cokernel `Z^rows / M Z^cols`: the non-unit
    /// diagonal entries, followed by one `0` per missing rank (free summands).
    pub fn cokernel_invariant_factors(&self) -> Vec<BigInt> {
        let mut out: Vec<BigInt> = self
            .diagonal()
            .into_iter()
            .filter(|x| !x.is_zero() && !x.is_one())
            .collect();
        let free = self.d.rows() - self.rank();
        out.extend(std::iter::repeat_n(BigInt::zero(), free));
        out
    }
}

/// Position of the nonzero entry of smallest absolute value among the
/// candidates; ties go to the lowest row, then the lowest column.
fn smallest_nonzero(
    m: &IntMatrix,
    cells: impl Iterator<Item = (usize, usize)>,
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, j) in cells {
        let x = m.get(i, j);
        if x.is_zero() {
            continue;
        }
        let better = match best {
            None => true,
            Some((bi, bj)) => {
                let b = m.get(bi, bj).abs();
                let a = x.abs();
                a < b || (a == b && (i, j) < (bi, bj))
            }
        };
        if better {
            best = Some((i, j));
        }
    }
    best
}

/// Smith normal form by elementary row/column operations with
/// smallest-pivot selection.
pub fn smith_normal_form(m: &IntMatrix) -> SnfDecomposition {
    let (rows, cols) = (m.rows(), m.cols());
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    for t in 0..rows.min(cols) {
        let block = (t..rows).flat_map(|i| (t..cols).map(move |j| (i, j)));
        let Some((pi, pj)) = smallest_nonzero(&d, block) else {
            break;
        };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);

        loop {
            let pivot = d.get(t, t).clone();
            let mut clean = true;
            for i in t + 1..rows {
                if d.get(i, t).is_zero() {
                    continue;
                }
                let q = -d.get(i, t).div_floor(&pivot);
                d.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                clean &= d.get(i, t).is_zero();
            }
            for j in t + 1..cols {
                if d.get(t, j).is_zero() {
                    continue;
                }
                let q = -d.get(t, j).div_floor(&pivot);
                d.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                clean &= d.get(t, j).is_zero();
            }
            if !clean {
                // a remainder smaller than the pivot survived; promote it
                let cross = (t..rows)
                    .map(|i| (i, t))
                    .chain((t + 1..cols).map(|j| (t, j)));
                let (ni, nj) = smallest_nonzero(&d, cross).expect("pivot is nonzero");
                d.swap_rows(t, ni);
                u.swap_rows(t, ni);
                d.swap_cols(t, nj);
                v.swap_cols(t, nj);
                continue;
            }
            let pivot = d.get(t, t).clone();
            let offender = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !d.get(i, j).is_multiple_of(&pivot));
            match offender {
                Some((i, _)) => {
                    let one = BigInt::one();
                    d.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    SnfDecomposition { u, d, v }
}

/// True iff the gcd of the entries is 1.
pub fn is_primitive(v: &[BigInt]) -> Result<bool, LatticeError> {
    let g = content(v);
    if g.is_zero() {
        return Err(LatticeError::ZeroVector);
    }
    Ok(g.is_one())
}

/// An `A ∈ SL(n, Z)` with `A·v = (-1, 0, …, 0)`.
pub fn complete_to_unimodular(v: &[BigInt]) -> Result<IntMatrix, LatticeError> {
    let g = content(v);
    if g.is_zero() {
        return Err(LatticeError::ZeroVector);
    }
    if !g.is_one() {
        return Err(LatticeError::NotPrimitive { gcd: g });
    }
    let n = v.len();
    if n == 1 {
        return if v[0] == -BigInt::one() {
            Ok(IntMatrix::identity(1))
        } else {
            Err(LatticeError::RankOneTarget { value: v[0].clone() })
        };
    }
    let mut w = v.to_vec();
    let mut a = IntMatrix::identity(n);
    for i in 1..n {
        if w[i].is_zero() {
            continue;
        }
        let ext = w[0].extended_gcd(&w[i]);
        let (mut g, mut x, mut y) = (ext.gcd, ext.x, ext.y);
        if g.is_negative() {
            g = -g;
            x = -x;
            y = -y;
        }
        // [[x, y], [-w_i/g, w_0/g]] has determinant 1
        let r = -(&w[i] / &g);
        let s = &w[0] / &g;
        a.combine_rows(0, i, [&x, &y, &r, &s]);
        w[0] = g;
        w[i] = BigInt::zero();
    }
    if w[0].is_one() {
        a.negate_row(0);
        a.negate_row(1);
    }
    debug_assert_eq!(a.mul_vec(v)[0], -BigInt::one());
    Ok(a)
}

/// Whether the real span of `vectors` meets the integer lattice exactly in
/// their integer span, with the vectors independent.
pub fn sublattice_saturation_equal(vectors: &[Vec<BigInt>]) -> bool {
    if vectors.is_empty() {
        return true;
    }
    let Ok(m) = IntMatrix::from_columns(vectors) else {
        return false;
    };
    let snf = smith_normal_form(&m);
    let k = vectors.len();
    snf.rank() == k && snf.diagonal().iter().take(k).all(|x| x.is_one())
}

/// Generalized cross product: the cofactor vector orthogonal to the `n-1`
/// given vectors in `Z^n`. Zero iff the vectors are dependent.
pub fn cofactor_vector(vectors: &[Vec<BigInt>], n: usize) -> Vec<BigInt> {
    debug_assert_eq!(vectors.len() + 1, n);
    (0..n)
        .map(|k| {
            if n == 1 {
                return BigInt::one();
            }
            let minor: Vec<Vec<BigInt>> = vectors
                .iter()
                .map(|v| {
                    v.iter()
                        .enumerate()
                        .filter(|&(j, _)| j != k)
                        .map(|(_, x)| x.clone())
                        .collect()
                })
                .collect();
            let det = IntMatrix::from_rows(&minor)
                .expect("nonempty minor")
                .determinant();
            if k % 2 == 0 {
                det
            } else {
                -det
            }
        })
        .collect()
}

/// Least common multiple of the denominators of a rational vector.
pub fn common_denominator(v: &[Rational]) -> BigInt {
    v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()))
}

/// Parse `"a"` or `"a/b"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}
