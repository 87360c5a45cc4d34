//! Exact Gaussian elimination over the rationals.

use num_traits::Zero;

use crate::scalar::Q;

/// Row-echelon reduction; returns the pivot columns in order.
pub fn pivot_columns(rows: &[Vec<Q>]) -> Vec<usize> {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let ncols = m.iter().map(Vec::len).max().unwrap_or(0);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| m[i].get(c).is_some_and(|x| !x.is_zero())) else {
            continue;
        };
        m.swap(r, p);
        let pivot = m[r][c].clone();
        for i in r + 1..m.len() {
            if m[i].get(c).is_none_or(Zero::is_zero) {
                continue;
            }
            let factor = &m[i][c] / &pivot;
            let (top, bottom) = m.split_at_mut(i);
            let src = &top[r];
            for (k, v) in bottom[0].iter_mut().enumerate().skip(c) {
                if let Some(s) = src.get(k) {
                    if !s.is_zero() {
                        *v -= &factor * s;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<Q>]) -> usize {
    pivot_columns(rows).len()
}

/// `profile[k]` is the rank of the first `k + 1` rows. The basis is kept
/// sorted by pivot so each reduction only touches later pivots.
pub fn rank_profile(rows: &[Vec<Q>]) -> Vec<usize> {
    let mut basis: Vec<(usize, Vec<Q>)> = Vec::new();
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let mut v = row.clone();
        for (c, b) in &basis {
            if let Some(x) = v.get(*c).filter(|x| !x.is_zero()) {
                let factor = x / &b[*c];
                for (k, s) in b.iter().enumerate().skip(*c) {
                    if !s.is_zero() {
                        v[k] -= &factor * s;
                    }
                }
            }
        }
        if let Some(c) = v.iter().position(|x| !x.is_zero()) {
            let at = basis.partition_point(|(b, _)| *b < c);
            basis.insert(at, (c, v));
        }
        out.push(basis.len());
    }
    out
}

/// A basis of `{v : rows·v = 0}`, with `ncols` unknowns.
pub fn nullspace(rows: &[Vec<Q>], ncols: usize) -> Vec<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = rows
        .iter()
        .map(|r| (0..ncols).map(|c| r.get(c).cloned().unwrap_or_else(Q::zero)).collect())
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let pivot = m[r][c].clone();
        for v in m[r].iter_mut() {
            *v /= &pivot;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                let src = m[r].clone();
                for (v, s) in m[i].iter_mut().zip(&src) {
                    *v -= &factor * s;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Q::zero(); ncols];
            v[free] = Q::from_integer(1.into());
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][free].clone();
            }
            v
        })
        .collect()
}

/// Determinant of a square matrix.
pub fn determinant(rows: &[Vec<Q>]) -> Q {
    let n = rows.len();
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let mut det = Q::from_integer(1.into());
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let pivot = m[c][c].clone();
        det *= &pivot;
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let factor = &m[i][c] / &pivot;
            let (top, bottom) = m.split_at_mut(i);
            for k in c..n {
                let s = &top[c][k];
                if !s.is_zero() {
                    bottom[0][k] -= &factor * s;
                }
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi};

    #[test]
    fn ranks() {
        let m = vec![
            vec![qi(1), qi(2), qi(3)],
            vec![qi(2), qi(4), qi(6)],
            vec![qi(0), qi(1), q(1, 2)],
        ];
        assert_eq!(rank(&m), 2);
        assert_eq!(pivot_columns(&m), vec![0, 1]);
        assert_eq!(rank(&[vec![qi(0), qi(0)]]), 0);
        assert_eq!(rank(&[]), 0);
        assert_eq!(rank_profile(&m), vec![1, 1, 2]);
    }

    #[test]
    fn kernels() {
        let m = vec![vec![qi(1), qi(1), qi(0)]];
        let k = nullspace(&m, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            let dot: Q = m[0].iter().zip(v).map(|(a, b)| a * b).sum();
            assert!(dot.is_zero());
        }
        assert_eq!(nullspace(&[vec![qi(0), qi(0), qi(1)]], 3).len(), 2);
    }

    #[test]
    fn determinants() {
        let m = vec![vec![qi(0), qi(1)], vec![qi(1), qi(0)]];
        assert_eq!(determinant(&m), qi(-1));
        let h: Vec<Vec<Q>> = (1..=4)
            .map(|i| (1..=4).map(|j| q(1, i + j - 1)).collect())
            .collect();
        assert_eq!(determinant(&h), q(1, 6_048_000));
    }
}
