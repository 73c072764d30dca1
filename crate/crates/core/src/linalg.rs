//! Exact rational linear algebra. Rank and determinant use fraction-free
//! (Bareiss) elimination over the integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Q;

pub type Matrix = Vec<Vec<Q>>;

/// Scales each row by the lcm of its denominators.
fn integer_rows(m: &[Vec<Q>]) -> (Vec<Vec<BigInt>>, Q) {
    let mut scale = Q::one();
    let rows = m
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            scale *= Q::from_integer(l.clone());
            row.iter().map(|x| (x * Q::from_integer(l.clone())).to_integer()).collect()
        })
        .collect();
    (rows, scale)
}

/// Bareiss elimination in place; returns (rank, sign of row permutation).
fn bareiss(a: &mut [Vec<BigInt>]) -> (usize, i32) {
    let rows = a.len();
    let cols = a.first().map(|r| r.len()).unwrap_or(0);
    let mut prev = BigInt::one();
    let mut rank = 0;
    let mut sign = 1;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        if p != rank {
            a.swap(p, rank);
            sign = -sign;
        }
        for r in rank + 1..rows {
            for c in col + 1..cols {
                let v = &a[rank][col] * &a[r][c] - &a[r][col] * &a[rank][c];
                a[r][c] = v / &prev;
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    (rank, sign)
}

pub fn rank(m: &[Vec<Q>]) -> usize {
    let (mut a, _) = integer_rows(m);
    bareiss(&mut a).0
}

pub fn det(m: &[Vec<Q>]) -> Result<Q> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("determinant of a non-square matrix".into()));
    }
    if n == 0 {
        return Ok(Q::one());
    }
    let (mut a, scale) = integer_rows(m);
    let (rank, sign) = bareiss(&mut a);
    if rank < n {
        return Ok(Q::zero());
    }
    let d = Q::from_integer(a[n - 1][n - 1].clone()) / scale;
    Ok(if sign < 0 { -d } else { d })
}

pub fn inverse(m: &[Vec<Q>]) -> Result<Matrix> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("inverse of a non-square matrix".into()));
    }
    let mut a: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::Rank("matrix is singular".into()))?;
        a.swap(p, col);
        let piv = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v /= &piv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..2 * n {
                    let sub = &f * &a[col][c];
                    a[r][c] -= sub;
                }
            }
        }
    }
    Ok(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn transpose(m: &[Vec<Q>]) -> Matrix {
    let cols = m.first().map(|r| r.len()).unwrap_or(0);
    (0..cols).map(|c| m.iter().map(|r| r[c].clone()).collect()).collect()
}

pub fn mat_vec(m: &[Vec<Q>], v: &[Q]) -> Vec<Q> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(Q::zero(), |acc, (a, b)| acc + a * b))
        .collect()
}

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
        .collect()
}

pub fn max_abs(v: &[Q]) -> Q {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(Q::zero)
}
