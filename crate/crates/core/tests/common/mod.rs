#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sasakit::cone::ToricDiagram;
use sasakit::families;
use sasakit::json::bigint_to_f64;
use sasakit::lattice::{IntMatrix, Rational};

pub fn rng(stream: u64) -> ChaCha8Rng {
    let seed = std::env::var("SASAKIT_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0x5a5a_2007_u64);
    ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

pub fn octant() -> ToricDiagram {
    ToricDiagram::from_i64(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]).unwrap()
}

/// Good diagrams with a `γ`.
pub fn cy_corpus() -> Vec<(String, ToricDiagram)> {
    let mut out = vec![("octant".to_string(), octant())];
    for l in 1..=4 {
        out.push((format!("lens({l})"), families::lens(l).unwrap()));
    }
    out.push(("z5".into(), families::z5_lens()));
    out.push((
        "square".into(),
        ToricDiagram::from_i64(&[&[1, 0, 0], &[1, 1, 0], &[1, 1, 1], &[1, 0, 1]]).unwrap(),
    ));
    out.push(("main4_even(1,1)".into(), families::main4_even(1, 1).unwrap()));
    out.push(("main4_odd(1,0)".into(), families::main4_odd(1, 0).unwrap()));
    out.push(("main4_odd(2,1)".into(), families::main4_odd(2, 1).unwrap()));
    out
}

/// Every good diagram used in the suites, with or without `γ`.
pub fn corpus() -> Vec<(String, ToricDiagram)> {
    let mut out = cy_corpus();
    out.push((
        "no-gamma".into(),
        ToricDiagram::from_i64(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, -2]]).unwrap(),
    ));
    out
}

fn elementary(n: usize, i: usize, j: usize, k: i64) -> IntMatrix {
    let mut m = IntMatrix::identity(n);
    m.set(i, j, BigInt::from(k));
    m
}

/// Random element of `SL(n, Z)` as a product of elementary matrices.
pub fn random_sl(rng: &mut impl Rng, n: usize, steps: usize) -> IntMatrix {
    let mut a = IntMatrix::identity(n);
    for _ in 0..steps {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let k = rng.gen_range(-2..=2);
        a = &a * &elementary(n, i, j, k);
    }
    a
}

/// Random element of the height-1 stabilizer `[[1,0,0],[t,M]]`,
/// `M ∈ SL(2, Z)`, written as the matrix acting directly on normals.
pub fn random_height_one_map(rng: &mut impl Rng) -> IntMatrix {
    let m = random_sl(rng, 2, 6);
    let mut b = IntMatrix::identity(3);
    b.set(1, 0, BigInt::from(rng.gen_range(-5..=5)));
    b.set(2, 0, BigInt::from(rng.gen_range(-5..=5)));
    for i in 0..2 {
        for j in 0..2 {
            b.set(i + 1, j + 1, m.get(i, j).clone());
        }
    }
    b
}

/// Apply a matrix directly to every normal.
pub fn act_on_normals(b: &IntMatrix, d: &ToricDiagram) -> ToricDiagram {
    ToricDiagram::new(d.normals().iter().map(|v| b.mul_vec(v)).collect()).unwrap()
}

/// Random point `Σ c_j r_j` in the interior of the cone.
pub fn interior_point(rng: &mut impl Rng, d: &ToricDiagram) -> Vec<f64> {
    let mut y = vec![0.0; d.rank()];
    for r in d.rays() {
        let c: f64 = rng.gen_range(0.2..2.0);
        for (a, b) in y.iter_mut().zip(&r.generator) {
            *a += c * bigint_to_f64(b);
        }
    }
    y
}

/// Random Reeb vector `Σ w_i λ_i`.
pub fn reeb_point(rng: &mut impl Rng, d: &ToricDiagram) -> Vec<f64> {
    let mut xi = vec![0.0; d.rank()];
    for l in d.normals() {
        let w: f64 = rng.gen_range(0.3..2.0);
        for (a, b) in xi.iter_mut().zip(l) {
            *a += w * bigint_to_f64(b);
        }
    }
    xi
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn is_integral(x: &Rational) -> bool {
    x.denom().is_one()
}

pub fn all_zero(v: &[BigInt]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Convex hull (counterclockwise, no collinear points) of integer points.
pub fn convex_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut p = points.to_vec();
    p.sort();
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &pt in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], pt) <= 0 {
            lower.pop();
        }
        lower.push(pt);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &pt in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], pt) <= 0 {
            upper.pop();
        }
        upper.push(pt);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Random height-1 diagram with 3 to 8 vertices and `|p|, |q| <= 8`.
pub fn random_height_one(rng: &mut impl Rng) -> ToricDiagram {
    loop {
        let k = rng.gen_range(3..=10);
        let pts: Vec<(i64, i64)> = (0..k)
            .map(|_| (rng.gen_range(-8..=8), rng.gen_range(-8..=8)))
            .collect();
        let hull = convex_hull(&pts);
        if !(3..=8).contains(&hull.len()) {
            continue;
        }
        let normals = hull
            .iter()
            .map(|&(p, q)| vec![BigInt::one(), p.into(), q.into()])
            .collect();
        if let Ok(d) = ToricDiagram::new(normals) {
            return d;
        }
    }
}
