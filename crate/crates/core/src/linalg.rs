//! Small dense linear algebra over a [`Scalar`]: elimination, inverses,
//! characteristic polynomials and inertia.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::{negligible, Scalar};

pub type Matrix<S> = Vec<Vec<S>>;

fn pick_pivot<S: Scalar>(m: &Matrix<S>, col: usize, from: usize, tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (r, row) in m.iter().enumerate().skip(from) {
        let v = &row[col];
        if negligible(v, tol) {
            continue;
        }
        let mag = v.to_f64().abs();
        if best.map_or(true, |(_, b)| mag > b) {
            best = Some((r, mag));
        }
    }
    best.map(|(r, _)| r)
}

/// Reduce to row echelon form in place; returns the pivot columns.
fn eliminate<S: Scalar>(m: &mut Matrix<S>, cols: usize, tol: f64) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == m.len() {
            break;
        }
        let Some(p) = pick_pivot(m, col, row, tol) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip().expect("nonzero pivot");
        for c in col..m[row].len() {
            m[row][c] = m[row][c].clone() * inv.clone();
        }
        for r in 0..m.len() {
            if r == row || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in col..m[r].len() {
                let sub = f.clone() * m[row][c].clone();
                m[r][c] -= sub;
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Solve the square system `a x = b`. Float pivots with magnitude `≤ tol`
/// are treated as zero.
pub fn solve<S: Scalar>(a: &Matrix<S>, b: &[S], tol: f64) -> Result<Vec<S>> {
    let n = a.len();
    if b.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::Argument("solve expects a square system".into()));
    }
    let mut aug: Matrix<S> = a
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut row = r.clone();
            row.push(v.clone());
            row
        })
        .collect();
    let pivots = eliminate(&mut aug, n, tol);
    if pivots.len() < n {
        return Err(Error::Singular(
            "linear system is not uniquely solvable".into(),
        ));
    }
    Ok(aug
        .into_iter()
        .map(|mut r| r.pop().expect("augmented"))
        .collect())
}

pub fn inverse<S: Scalar>(a: &Matrix<S>, tol: f64) -> Result<Matrix<S>> {
    let n = a.len();
    let mut aug: Matrix<S> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { S::one() } else { S::zero() }));
            row
        })
        .collect();
    if eliminate(&mut aug, n, tol).len() < n {
        return Err(Error::Singular("matrix is not invertible".into()));
    }
    Ok(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn rank<S: Scalar>(a: &Matrix<S>, tol: f64) -> usize {
    let mut m = a.clone();
    let cols = m.first().map_or(0, Vec::len);
    eliminate(&mut m, cols, tol).len()
}

pub fn mat_mul<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = S::zero();
                    for k in 0..inner {
                        acc.mul_add_assign(&row[k], &b[k][j]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Coefficients `[c_0, …, c_n]` of `det(λ I - A) = Σ c_k λ^k` (Faddeev-LeVerrier).
pub fn characteristic_polynomial<S: Scalar>(a: &Matrix<S>) -> Vec<S> {
    let n = a.len();
    let mut coeffs = vec![S::zero(); n + 1];
    coeffs[n] = S::one();
    let mut m: Matrix<S> = vec![vec![S::zero(); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += coeffs[n - k + 1].clone();
        }
        m = mat_mul(a, &m);
        let mut trace = S::zero();
        for (i, row) in m.iter().enumerate() {
            trace += row[i].clone();
        }
        coeffs[n - k] = -(trace * S::from_ratio(1, k as i64));
    }
    coeffs
}

/// Counts of positive, negative and zero eigenvalues of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

fn sign_changes(signs: impl Iterator<Item = Ordering>) -> usize {
    let mut last = Ordering::Equal;
    let mut changes = 0;
    for s in signs.filter(|s| *s != Ordering::Equal) {
        if last != Ordering::Equal && s != last {
            changes += 1;
        }
        last = s;
    }
    changes
}

/// Inertia of a symmetric matrix. All roots of its characteristic polynomial
/// are real, so Descartes' rule of signs counts them exactly. Float
/// coefficients with magnitude `≤ tol · scale` are treated as zero.
pub fn inertia<S: Scalar>(a: &Matrix<S>, tol: f64) -> Inertia {
    let poly = characteristic_polynomial(a);
    let n = a.len();
    let scale = a
        .iter()
        .flatten()
        .map(|v| v.to_f64().abs())
        .fold(1.0f64, f64::max);
    let signs: Vec<Ordering> = poly
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let t = tol * libm::pow(scale, (n - k) as f64);
            if negligible(c, t) {
                Ordering::Equal
            } else {
                c.signum()
            }
        })
        .collect();
    let zero = signs.iter().take_while(|s| **s == Ordering::Equal).count();
    let positive = sign_changes(signs.iter().copied());
    let negative =
        sign_changes(signs.iter().enumerate().map(
            |(k, s)| {
                if k % 2 == 1 {
                    s.reverse()
                } else {
                    *s
                }
            },
        ));
    Inertia {
        positive,
        negative,
        zero,
    }
}

/// Determinant of a 3×3 matrix of jets.
pub fn det3<S: Scalar>(m: &[[Jet<S>; 3]; 3]) -> Jet<S> {
    let minor = |i: usize, j: usize, k: usize, l: usize| &m[i][k] * &m[j][l] - &m[i][l] * &m[j][k];
    &m[0][0] * &minor(1, 2, 1, 2) - &m[0][1] * &minor(1, 2, 0, 2) + &m[0][2] * &minor(1, 2, 0, 1)
}

/// Inverse of a 3×3 matrix of jets via the adjugate.
pub fn inverse3<S: Scalar>(m: &[[Jet<S>; 3]; 3]) -> Result<[[Jet<S>; 3]; 3]> {
    let det = det3(m);
    let inv_det = det
        .recip()
        .map_err(|_| Error::Degenerate("metric is degenerate at the point".into()))?;
    let cof = |r: usize, c: usize| {
        let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
        let (c1, c2) = ((c + 1) % 3, (c + 2) % 3);
        &m[r1][c1] * &m[r2][c2] - &m[r1][c2] * &m[r2][c1]
    };
    Ok(core::array::from_fn(|i| {
        core::array::from_fn(|j| &cof(j, i) * &inv_det)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Q;

    fn qm(rows: &[&[i64]]) -> Matrix<Q> {
        rows.iter()
            .map(|r| r.iter().map(|&v| Q::from(v)).collect())
            .collect()
    }

    #[test]
    fn solves_and_inverts() {
        let a = qm(&[&[2, 1], &[1, 3]]);
        let x = solve(&a, &[Q::from(3), Q::from(5)], 0.0).unwrap();
        assert_eq!(x, vec![Q::new(4, 5), Q::new(7, 5)]);
        let inv = inverse(&a, 0.0).unwrap();
        assert_eq!(mat_mul(&a, &inv), qm(&[&[1, 0], &[0, 1]]));
        assert!(inverse(&qm(&[&[1, 2], &[2, 4]]), 0.0).is_err());
        assert_eq!(rank(&qm(&[&[1, 2], &[2, 4]]), 0.0), 1);
    }

    #[test]
    fn characteristic_polynomial_of_diagonal() {
        // (λ-1)(λ-2)(λ+3) = λ^3 - 7λ + 6
        let a = qm(&[&[1, 0, 0], &[0, 2, 0], &[0, 0, -3]]);
        let p = characteristic_polynomial(&a);
        assert_eq!(p, vec![Q::from(6), Q::from(-7), Q::from(0), Q::from(1)]);
    }

    #[test]
    fn inertia_counts() {
        let lorentz = qm(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]);
        assert_eq!(
            inertia(&lorentz, 0.0),
            Inertia {
                positive: 2,
                negative: 1,
                zero: 0
            }
        );
        let degenerate = qm(&[&[1, 1, 0], &[1, 1, 0], &[0, 0, -2]]);
        assert_eq!(
            inertia(&degenerate, 0.0),
            Inertia {
                positive: 1,
                negative: 1,
                zero: 1
            }
        );
        let f: Matrix<f64> = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(
            inertia(&f, 1e-12),
            Inertia {
                positive: 1,
                negative: 1,
                zero: 0
            }
        );
    }
}
