//! Exact Gaussian elimination over any [`Field`].

use crate::scalar::Field;

/// Row-reduced echelon data of a linear system `A x = b`.
pub struct Solution<F> {
    /// A particular solution with free variables set to zero.
    pub x: Vec<F>,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

/// Solves `A x = b`; `None` if inconsistent.
pub fn solve<F: Field>(a: &[Vec<F>], b: &[F], ncols: usize) -> Option<Solution<F>> {
    let mut rows: Vec<Vec<F>> = a
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut row = r.clone();
            row.resize(ncols, F::zero());
            row.push(v.clone());
            row
        })
        .collect();
    let pivots = reduce(&mut rows, ncols);
    for row in rows.iter().skip(pivots.len()) {
        if !row[ncols].is_zero() {
            return None;
        }
    }
    let mut x = vec![F::zero(); ncols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = rows[r][ncols].clone();
    }
    Some(Solution { x, rank: pivots.len(), pivots })
}

pub fn rank<F: Field>(a: &[Vec<F>], ncols: usize) -> usize {
    let mut rows = a.to_vec();
    reduce(&mut rows, ncols).len()
}

/// Inverse of a square matrix, `None` if singular.
pub fn inverse<F: Field>(a: &[Vec<F>]) -> Option<Vec<Vec<F>>> {
    let n = a.len();
    let mut rows: Vec<Vec<F>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { F::one() } else { F::zero() }));
            row
        })
        .collect();
    let pivots = reduce(&mut rows, n);
    if pivots.len() < n {
        return None;
    }
    Some(rows.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Reduced row echelon form on the first `ncols` columns; returns pivot columns.
fn reduce<F: Field>(rows: &mut [Vec<F>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = F::one() / rows[r][c].clone();
        for v in rows[r].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = v.clone() - f.clone() * pv.clone();
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat, Rational};

    #[test]
    fn solves_and_detects_inconsistency() {
        let a = vec![vec![int(1), int(2)], vec![int(3), int(4)]];
        let s = solve(&a, &[int(5), int(6)], 2).unwrap();
        assert_eq!(s.x, vec![int(-4), rat(9, 2)]);
        let a = vec![vec![int(1), int(1)], vec![int(2), int(2)]];
        assert!(solve(&a, &[int(1), int(3)], 2).is_none());
        assert_eq!(rank::<Rational>(&a, 2), 1);
    }

    #[test]
    fn inverse_of_two_by_two() {
        let a = vec![vec![int(2), int(1)], vec![int(1), int(1)]];
        let inv = inverse(&a).unwrap();
        assert_eq!(inv, vec![vec![int(1), int(-1)], vec![int(-1), int(2)]]);
        assert!(inverse(&[vec![int(1), int(2)], vec![int(2), int(4)]]).is_none());
    }
}
