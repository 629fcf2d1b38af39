//! Dense linear algebra over [`Scalar`]: pivoted Cholesky rank, row
//! reduction, null spaces and Hermitian PSD checks.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num::complex::Complex64;

use crate::scalar::{Mode, Scalar, Tol};

pub type Mat = Vec<Vec<Scalar>>;

pub fn zeros(rows: usize, cols: usize, mode: Mode) -> Mat {
    vec![vec![Scalar::zero(mode); cols]; rows]
}

pub fn identity(n: usize, mode: Mode) -> Mat {
    let mut m = zeros(n, n, mode);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Scalar::one(mode);
    }
    m
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| &row[k] * &b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &Mat, v: &[Scalar]) -> Vec<Scalar> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

pub fn adjoint(a: &Mat) -> Mat {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols)
        .map(|j| (0..rows).map(|i| a[i][j].conj()).collect())
        .collect()
}

pub fn mat_approx_eq(a: &Mat, b: &Mat, tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(ra, rb)| {
            ra.len() == rb.len() && ra.iter().zip(rb).all(|(x, y)| x.approx_eq(y, tol))
        })
}

/// `g* g = I` exactly (exact entries) or within `tol`.
pub fn is_unitary(g: &Mat, tol: f64) -> bool {
    let n = g.len();
    if g.iter().any(|r| r.len() != n) {
        return false;
    }
    let mode = crate::scalar::common_mode(g.iter().flatten());
    mat_approx_eq(&mat_mul(&adjoint(g), g), &identity(n, mode), tol)
}

pub fn to_dmatrix(a: &Mat) -> DMatrix<Complex64> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    DMatrix::from_fn(rows, cols, |i, j| a[i][j].to_c64())
}

/// Result of a pivoted Cholesky factorization `G = Σ_k D_k c_k c_k*`.
#[derive(Clone, Debug)]
pub struct PivotedCholesky {
    /// Pivot indices in the order chosen.
    pub pivots: Vec<usize>,
    /// Pivot values `D_k` (residual diagonals at the time of choice).
    pub pivot_values: Vec<Scalar>,
}

impl PivotedCholesky {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Pivoted LDL* (Cholesky without square roots) on a Hermitian PSD matrix
/// given by an entry oracle. Entries are requested only for pivot columns.
/// The pivot is the largest residual diagonal; ties go to the lowest index,
/// so callers that order items deterministically get reproducible bases.
pub fn pivoted_cholesky(
    size: usize,
    mut entry: impl FnMut(usize, usize) -> Scalar,
    mode: Mode,
    tol: &Tol,
) -> PivotedCholesky {
    let mut d: Vec<Scalar> = (0..size).map(|i| entry(i, i).re()).collect();
    let mut cols: Vec<Vec<Scalar>> = Vec::new();
    let mut out = PivotedCholesky {
        pivots: Vec::new(),
        pivot_values: Vec::new(),
    };
    let mut used = vec![false; size];
    loop {
        let mut best: Option<usize> = None;
        for i in 0..size {
            if used[i] {
                continue;
            }
            best = match best {
                None => Some(i),
                Some(b) if d[i].real_cmp(&d[b]) == Ordering::Greater => Some(i),
                keep => keep,
            };
        }
        let Some(p) = best else { break };
        let dp = d[p].clone();
        let stop = match mode {
            Mode::Exact if dp.is_exact() => dp.real_sign(0.0) != Ordering::Greater,
            _ => dp.to_c64().re <= tol.rank,
        };
        if stop {
            break;
        }
        used[p] = true;
        let mut col = vec![Scalar::zero(mode); size];
        for i in 0..size {
            if used[i] && i != p {
                continue;
            }
            let mut v = entry(i, p);
            for (k, c) in cols.iter().enumerate() {
                v = v - &(&out.pivot_values[k] * &c[i]) * &c[p].conj();
            }
            col[i] = v.checked_div(&dp).expect("pivot is nonzero");
        }
        for i in 0..size {
            if !used[i] {
                let delta = &dp * &col[i].norm_sqr();
                d[i] = (d[i].clone() - delta).re();
            }
        }
        out.pivots.push(p);
        out.pivot_values.push(dp);
        cols.push(col);
    }
    out
}

/// Rank of an explicit Hermitian PSD matrix.
pub fn gram_rank(g: &Mat, mode: Mode, tol: &Tol) -> usize {
    pivoted_cholesky(g.len(), |i, j| g[i][j].clone(), mode, tol).rank()
}

/// Reduced row echelon form. Returns the reduced matrix and pivot columns.
pub fn rref(mut a: Mat, tol: f64) -> (Mat, Vec<usize>) {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // exact: first nonzero; float: largest modulus
        let mut sel: Option<usize> = None;
        for i in r..rows {
            if a[i][c].is_zero_tol(tol) {
                continue;
            }
            sel = match sel {
                None => Some(i),
                Some(s) if !a[i][c].is_exact() && a[i][c].abs_f64() > a[s][c].abs_f64() => Some(i),
                keep => keep,
            };
        }
        let Some(s) = sel else {
            for row in a.iter_mut().skip(r) {
                row[c] = row[c].zero_like();
            }
            continue;
        };
        a.swap(r, s);
        let inv = a[r][c]
            .one_like()
            .checked_div(&a[r][c])
            .expect("nonzero pivot");
        for j in c..cols {
            a[r][j] = &a[r][j] * &inv;
        }
        for i in 0..rows {
            if i == r || a[i][c].is_exact_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for j in c..cols {
                let v = &f * &a[r][j];
                a[i][j] = a[i][j].clone() - v;
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Basis of the null space `{x : A x = 0}`.
pub fn nullspace(a: &Mat, cols: usize, mode: Mode, tol: f64) -> Vec<Vec<Scalar>> {
    if a.is_empty() {
        return (0..cols)
            .map(|k| {
                let mut v = vec![Scalar::zero(mode); cols];
                v[k] = Scalar::one(mode);
                v
            })
            .collect();
    }
    let (r, pivots) = rref(a.clone(), tol);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Scalar::zero(mode); cols];
            v[f] = Scalar::one(mode);
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[row][f].clone();
            }
            v
        })
        .collect()
}

/// Solves the Hermitian system `G x = b` restricted to an invertible `G`.
pub fn solve(g: &Mat, b: &[Scalar], tol: f64) -> Option<Vec<Scalar>> {
    let n = g.len();
    let aug: Mat = g
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let (r, pivots) = rref(aug, tol);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    Some(r.iter().map(|row| row[n].clone()).collect())
}

/// Outcome of a Hermitian PSD test.
#[derive(Clone, Debug)]
pub struct PsdReport {
    pub psd: bool,
    pub min_eig: f64,
    /// Eigenvector for the smallest eigenvalue (float estimate).
    pub witness: Vec<Complex64>,
}

/// Exact PSD decision by symmetric pivoting when all entries are exact;
/// float decision `λ_min ≥ −tol` otherwise. The eigen-estimate is always
/// reported.
pub fn psd_check(g: &Mat, tol: f64) -> PsdReport {
    let n = g.len();
    let (min_eig, witness) = if n == 0 {
        (0.0, Vec::new())
    } else {
        let m = to_dmatrix(g);
        let h = (&m + m.adjoint()).scale(0.5);
        let eig = h.symmetric_eigen();
        let (idx, val) =
            eig.eigenvalues
                .iter()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc },
                );
        let vec: DVector<Complex64> = eig.eigenvectors.column(idx).into_owned();
        (val, vec.iter().copied().collect())
    };
    let exact = g.iter().flatten().all(|x| x.is_exact());
    let psd = if exact {
        exact_psd(g.clone())
    } else {
        min_eig >= -tol
    };
    PsdReport {
        psd,
        min_eig,
        witness,
    }
}

fn exact_psd(mut a: Mat) -> bool {
    let n = a.len();
    let mut alive: Vec<usize> = (0..n).collect();
    // Hermitian test first
    for i in 0..n {
        for j in 0..n {
            if a[i][j] != a[j][i].conj() {
                return false;
            }
        }
    }
    while !alive.is_empty() {
        if alive
            .iter()
            .any(|&i| a[i][i].real_sign(0.0) == Ordering::Less)
        {
            return false;
        }
        let p = *alive
            .iter()
            .max_by(|&&x, &&y| a[x][x].real_cmp(&a[y][y]))
            .expect("nonempty");
        if a[p][p].is_exact_zero() {
            // zero diagonal forces a zero residual block
            return alive
                .iter()
                .all(|&i| alive.iter().all(|&j| a[i][j].is_exact_zero()));
        }
        alive.retain(|&i| i != p);
        let piv = a[p][p].clone();
        for &i in &alive {
            let f = a[i][p].checked_div(&piv).expect("nonzero pivot");
            for &j in &alive {
                let v = &f * &a[p][j];
                a[i][j] = a[i][j].clone() - v;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: i64) -> Scalar {
        Scalar::int(x)
    }

    #[test]
    fn cholesky_rank_of_rank_two_gram() {
        // vectors (1,0,1), (0,1,1), (1,1,2)
        let vs = [[1, 0, 1], [0, 1, 1], [1, 1, 2]];
        let g: Mat = vs
            .iter()
            .map(|a| {
                vs.iter()
                    .map(|b| r(a.iter().zip(b).map(|(x, y)| x * y).sum()))
                    .collect()
            })
            .collect();
        assert_eq!(gram_rank(&g, Mode::Exact, &Tol::default()), 2);
        let gf: Mat = g
            .iter()
            .map(|row| row.iter().map(|x| x.to_mode(Mode::Float)).collect())
            .collect();
        assert_eq!(gram_rank(&gf, Mode::Float, &Tol::default()), 2);
    }

    #[test]
    fn cholesky_pivots_largest_diagonal_first() {
        let g = vec![vec![r(1), r(0)], vec![r(0), r(3)]];
        let pc = pivoted_cholesky(2, |i, j| g[i][j].clone(), Mode::Exact, &Tol::default());
        assert_eq!(pc.pivots, vec![1, 0]);
    }

    #[test]
    fn nullspace_and_solve() {
        let a = vec![vec![r(1), r(2), r(3)], vec![r(2), r(4), r(6)]];
        let ns = nullspace(&a, 3, Mode::Exact, 0.0);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for row in &a {
                let s: Scalar = row.iter().zip(v).map(|(x, y)| x * y).sum();
                assert!(s.is_exact_zero());
            }
        }
        let g = vec![vec![r(2), r(1)], vec![r(1), r(1)]];
        let x = solve(&g, &[r(3), r(2)], 0.0).unwrap();
        assert_eq!(x, vec![r(1), r(1)]);
        let sing = vec![vec![r(1), r(1)], vec![r(1), r(1)]];
        assert!(solve(&sing, &[r(1), r(1)], 0.0).is_none());
    }

    #[test]
    fn psd_exact_and_float() {
        let good = vec![vec![r(1), r(1)], vec![r(1), r(1)]];
        assert!(psd_check(&good, 1e-9).psd);
        let bad = vec![vec![r(1), r(2)], vec![r(2), r(1)]];
        let rep = psd_check(&bad, 1e-9);
        assert!(!rep.psd);
        assert!((rep.min_eig + 1.0).abs() < 1e-12);
        let zero_diag = vec![vec![r(0), r(1)], vec![r(1), r(0)]];
        assert!(!psd_check(&zero_diag, 1e-9).psd);
        let badf = vec![
            vec![Scalar::float(1.0, 0.0), Scalar::float(2.0, 0.0)],
            vec![Scalar::float(2.0, 0.0), Scalar::float(1.0, 0.0)],
        ];
        assert!(!psd_check(&badf, 1e-9).psd);
    }

    #[test]
    fn unitary_detection() {
        let h = Scalar::inv_sqrt2();
        let had = vec![vec![h.clone(), h.clone()], vec![h.clone(), -h]];
        assert!(is_unitary(&had, 0.0));
        assert!(!is_unitary(&vec![vec![r(1), r(1)], vec![r(0), r(1)]], 1e-9));
    }
}
