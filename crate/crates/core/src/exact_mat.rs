//! Small dense exact-rational matrix routines: determinant, inverse, rank.
//!
//! Sizes here are tiny (simplex dimension, matrix size l), so plain fraction
//! Gaussian elimination is fine.

use crate::error::{Error, Result};
use crate::scalar::{Coeff, Rat};

pub fn det(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut sign = Rat::from_i64(1);
    let mut acc = Rat::from_i64(1);
    for col in 0..n {
        let pivot = (col..n).find(|&r| !Coeff::is_zero(&a[r][col]));
        let Some(p) = pivot else { return Rat::from_i64(0) };
        if p != col {
            a.swap(p, col);
            sign = sign.neg();
        }
        let pv = a[col][col].clone();
        acc = acc.mul(&pv);
        for r in col + 1..n {
            if Coeff::is_zero(&a[r][col]) {
                continue;
            }
            let f = a[r][col].clone() / pv.clone();
            for c in col..n {
                let sub = f.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - sub;
            }
        }
    }
    acc.mul(&sign)
}

pub fn rank(m: &[Vec<Rat>]) -> usize {
    if m.is_empty() {
        return 0;
    }
    let rows = m.len();
    let cols = m[0].len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut rk = 0;
    for col in 0..cols {
        let pivot = (rk..rows).find(|&r| !Coeff::is_zero(&a[r][col]));
        let Some(p) = pivot else { continue };
        a.swap(p, rk);
        let pv = a[rk][col].clone();
        for r in 0..rows {
            if r == rk || Coeff::is_zero(&a[r][col]) {
                continue;
            }
            let f = a[r][col].clone() / pv.clone();
            for c in col..cols {
                let sub = f.clone() * a[rk][c].clone();
                a[r][c] = a[r][c].clone() - sub;
            }
        }
        rk += 1;
        if rk == rows {
            break;
        }
    }
    rk
}

pub fn inverse(m: &[Vec<Rat>]) -> Result<Vec<Vec<Rat>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut inv: Vec<Vec<Rat>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rat::from_i64(1) } else { Rat::from_i64(0) }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !Coeff::is_zero(&a[r][col]));
        let Some(p) = pivot else {
            return Err(Error::structure("singular matrix"));
        };
        a.swap(p, col);
        inv.swap(p, col);
        let pv = a[col][col].clone();
        for c in 0..n {
            a[col][c] = a[col][c].clone() / pv.clone();
            inv[col][c] = inv[col][c].clone() / pv.clone();
        }
        for r in 0..n {
            if r == col || Coeff::is_zero(&a[r][col]) {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                let s1 = f.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - s1;
                let s2 = f.clone() * inv[col][c].clone();
                inv[r][c] = inv[r][c].clone() - s2;
            }
        }
    }
    Ok(inv)
}

/// Leading principal minors, for exact positive-definiteness checks.
pub fn leading_minors(m: &[Vec<Rat>]) -> Vec<Rat> {
    (1..=m.len())
        .map(|k| {
            let sub: Vec<Vec<Rat>> = m[..k].iter().map(|row| row[..k].to_vec()).collect();
            det(&sub)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rat {
        Rat::from_i64(n)
    }

    #[test]
    fn det_and_inverse() {
        let m = vec![vec![r(2), r(1)], vec![r(1), r(1)]];
        assert_eq!(det(&m), r(1));
        let inv = inverse(&m).unwrap();
        assert_eq!(inv[0], vec![r(1), r(-1)]);
        assert_eq!(inv[1], vec![r(-1), r(2)]);
    }

    #[test]
    fn rank_detects_degeneracy() {
        let m = vec![vec![r(1), r(2)], vec![r(2), r(4)]];
        assert_eq!(rank(&m), 1);
        assert!(inverse(&m).is_err());
    }
}
