//! Exact rational linear algebra: small dense systems, rank, kernels.
//!
//! Fraction-free pivoting is not needed at desk scale; plain Gaussian
//! elimination over `Rational` is exact by construction.

// Elimination loops index several rows of the same matrix at once;
// the iterator rewrites clippy suggests do not borrow-check.
#![allow(clippy::needless_range_loop)]

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

pub type Vector = Vec<Rational>;
pub type Matrix = Vec<Vector>;

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn scale(v: &[Rational], c: &Rational) -> Vector {
    v.iter().map(|x| x * c).collect()
}

pub fn add(a: &[Rational], b: &[Rational]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Rational], b: &[Rational]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn neg(a: &[Rational]) -> Vector {
    a.iter().map(|x| -x).collect()
}

pub fn is_zero_vector(v: &[Rational]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn zeros(n: usize) -> Vector {
    vec![Rational::zero(); n]
}

/// Determinant by elimination; exact.
pub fn det(m: &Matrix) -> Rational {
    let n = m.len();
    debug_assert!(m.iter().all(|row| row.len() == n));
    let mut a = m.to_vec();
    let mut result = Rational::one();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero());
        let Some(p) = pivot else {
            return Rational::zero();
        };
        if p != col {
            a.swap(p, col);
            result = -result;
        }
        let pv = a[col][col].clone();
        result *= &pv;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &pv;
            for c in col..n {
                let t = &a[col][c] * &f;
                a[r][c] -= t;
            }
        }
    }
    result
}

/// Solves the square system `m x = b` exactly; `None` when singular.
pub fn solve(m: &Matrix, b: &[Rational]) -> Option<Vector> {
    let n = m.len();
    debug_assert_eq!(b.len(), n);
    let mut a: Vec<Vector> = m
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(pivot, col);
        let pv = a[col][col].clone();
        for c in col..=n {
            a[col][c] = &a[col][c] / &pv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..=n {
                    let t = &a[col][c] * &f;
                    a[r][c] -= t;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n].clone()).collect())
}

/// Row rank by elimination; exact.
pub fn rank(m: &[Vector]) -> usize {
    if m.is_empty() {
        return 0;
    }
    let cols = m[0].len();
    let mut a = m.to_vec();
    let mut r = 0usize;
    for col in 0..cols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        let pv = a[r][col].clone();
        for i in 0..a.len() {
            if i != r && !a[i][col].is_zero() {
                let f = &a[i][col] / &pv;
                for c in col..cols {
                    let t = &a[r][c] * &f;
                    a[i][c] -= t;
                }
            }
        }
        r += 1;
    }
    r
}

/// Affine rank of a point set (dimension of its affine hull).
pub fn affine_rank(points: &[Vector]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let base = &points[0];
    let diffs: Vec<Vector> = points[1..].iter().map(|p| sub(p, base)).collect();
    rank(&diffs)
}

/// A basis of the null space of the row matrix `m`, exact.
pub fn kernel_basis(m: &[Vector], cols: usize) -> Vec<Vector> {
    // Reduced row echelon form, then read off free-column generators.
    let mut a = m.to_vec();
    let rows = a.len();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut r = 0usize;
    for col in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        let pv = a[r][col].clone();
        for c in 0..cols {
            a[r][c] = &a[r][c] / &pv;
        }
        for i in 0..rows {
            if i != r && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for c in 0..cols {
                    let t = &a[r][c] * &f;
                    a[i][c] -= t;
                }
            }
        }
        pivot_cols.push(col);
        r += 1;
    }
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = zeros(cols);
        v[free] = Rational::one();
        for (ri, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -a[ri][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// For full-row-rank `f` (r x n), a right inverse `w` (n x r, columns) with
/// `f w = I_r`, supported on r linearly independent columns of `f`.
pub fn right_inverse(f: &[Vector], cols: usize) -> Option<Vec<Vector>> {
    let r = f.len();
    // Pick r independent columns greedily.
    let mut chosen: Vec<usize> = Vec::new();
    for c in 0..cols {
        if chosen.len() == r {
            break;
        }
        let mut trial: Vec<Vector> = Vec::new();
        for row in f {
            let mut t: Vector = chosen.iter().map(|&cc| row[cc].clone()).collect();
            t.push(row[c].clone());
            trial.push(t);
        }
        if rank(&trial) == chosen.len() + 1 {
            chosen.push(c);
        }
    }
    if chosen.len() < r {
        return None;
    }
    // Invert the r x r submatrix.
    let sub: Matrix = f
        .iter()
        .map(|row| chosen.iter().map(|&c| row[c].clone()).collect())
        .collect();
    let mut columns = Vec::with_capacity(r);
    for k in 0..r {
        let mut e = zeros(r);
        e[k] = Rational::one();
        let sol = solve(&sub, &e)?;
        let mut w = zeros(cols);
        for (idx, &c) in chosen.iter().enumerate() {
            w[c] = sol[idx].clone();
        }
        columns.push(w);
    }
    Some(columns)
}

/// True when `a` and `b` are proportional (includes zero vectors).
pub fn proportional(a: &[Rational], b: &[Rational]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            if &a[i] * &b[j] != &a[j] * &b[i] {
                return false;
            }
        }
    }
    true
}

pub fn abs_val(r: &Rational) -> Rational {
    if r.is_negative() {
        -r.clone()
    } else {
        r.clone()
    }
}
