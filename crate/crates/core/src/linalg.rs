//! Small dense helpers shared by the solver and the diagnostics.

use nalgebra::DMatrix;

/// Columns of `a` indexed by `cols`, in the given order.
pub fn select_columns(a: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), cols.len(), |r, c| a[(r, cols[c])])
}

/// Moore-Penrose pseudoinverse via SVD, truncating singular values at or
/// below `rank_tol · σ_max`. Returns the inverse and whether truncation
/// happened.
pub fn pseudoinverse(a: &DMatrix<f64>, rank_tol: f64) -> (DMatrix<f64>, bool) {
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let smax = svd.singular_values.max();
    let cutoff = rank_tol * smax;
    let mut truncated = a.ncols() > a.nrows();
    let mut pinv = DMatrix::zeros(a.ncols(), a.nrows());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff || s == 0.0 {
            truncated = true;
            continue;
        }
        pinv += (vt.row(i).transpose() / s) * u.column(i).transpose();
    }
    (pinv, truncated)
}

/// Orthogonal projector onto the span of the columns of `a` indexed by
/// `cols`, formed as `Φ_Λ Φ_Λ^†`. An empty index set gives the zero map.
pub fn projector(a: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    let m = a.nrows();
    if cols.is_empty() {
        return DMatrix::zeros(m, m);
    }
    let sub = select_columns(a, cols);
    let (pinv, _) = pseudoinverse(&sub, 1e-12);
    &sub * pinv
}

/// `A_Λ = (I − P_Λ) Φ`.
pub fn annihilated(a: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    let m = a.nrows();
    (DMatrix::identity(m, m) - projector(a, cols)) * a
}

/// Least squares `min ‖A c − Y‖_F` by Householder QR of the tall matrix
/// `A` (m ≥ ncols).
///
/// A reflector is skipped when the part of its column below the diagonal is
/// already zero, as in LAPACK's `dlarfg`, so columns that are coordinate
/// vectors pass through exactly. Returns `None` when some `|R_ii|` is at or
/// below `rank_tol · max |R_ii|`.
pub fn householder_lstsq(
    a: &DMatrix<f64>,
    y: &DMatrix<f64>,
    rank_tol: f64,
) -> Option<DMatrix<f64>> {
    let (m, k) = a.shape();
    assert!(k <= m && y.nrows() == m);
    let mut r = a.clone();
    let mut b = y.clone();
    for j in 0..k {
        let alpha = r[(j, j)];
        let xnorm = (j + 1..m)
            .map(|i| r[(i, j)] * r[(i, j)])
            .sum::<f64>()
            .sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let beta = -alpha.signum() * alpha.hypot(xnorm);
        let tau = (beta - alpha) / beta;
        let scale = 1.0 / (alpha - beta);
        let mut v = vec![0.0; m - j];
        v[0] = 1.0;
        for i in j + 1..m {
            v[i - j] = r[(i, j)] * scale;
        }
        let reflect = |mat: &mut DMatrix<f64>, from: usize| {
            for c in from..mat.ncols() {
                let dot: f64 = (j..m).map(|i| v[i - j] * mat[(i, c)]).sum();
                let f = tau * dot;
                for i in j..m {
                    mat[(i, c)] -= f * v[i - j];
                }
            }
        };
        reflect(&mut r, j + 1);
        reflect(&mut b, 0);
        r[(j, j)] = beta;
        for i in j + 1..m {
            r[(i, j)] = 0.0;
        }
    }
    let dmax = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if k == 0 || (0..k).any(|i| r[(i, i)].abs() <= rank_tol.max(f64::EPSILON) * dmax) || dmax == 0.0
    {
        return None;
    }
    let mut c = DMatrix::zeros(k, y.ncols());
    for col in 0..y.ncols() {
        for i in (0..k).rev() {
            let mut acc = b[(i, col)];
            for t in i + 1..k {
                acc -= r[(i, t)] * c[(t, col)];
            }
            c[(i, col)] = acc / r[(i, i)];
        }
    }
    Some(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn householder_matches_pseudoinverse() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, -1.0, 0.5, 3.0, 1.0, 0.0, -2.0]);
        let y = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 2.0, 1.0, -1.0, 3.0, 0.5, 0.5]);
        let c = householder_lstsq(&a, &y, 1e-12).unwrap();
        let (pinv, _) = pseudoinverse(&a, 1e-12);
        assert!((c - pinv * &y).norm() < 1e-13);
        let e = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let y = DMatrix::from_row_slice(3, 1, &[0.1, 7.0, 3.0]);
        assert_eq!(
            householder_lstsq(&e, &y, 1e-12).unwrap().as_slice(),
            &[0.1, 3.0]
        );
        let dup = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(householder_lstsq(&dup, &y.rows(0, 2).into_owned(), 1e-12).is_none());
    }

    #[test]
    fn projector_is_idempotent_and_symmetric() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 3.0]);
        let p = projector(&a, &[0, 2]);
        assert!((&p * &p - &p).norm() < 1e-12);
        assert!((&p - p.transpose()).norm() < 1e-12);
        let ann = annihilated(&a, &[0, 2]);
        assert!(ann.column(0).norm() < 1e-12);
        assert!(ann.column(2).norm() < 1e-12);
    }

    #[test]
    fn pseudoinverse_flags_duplicate_columns() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let (_, truncated) = pseudoinverse(&a, 1e-12);
        assert!(truncated);
        let b = DMatrix::<f64>::identity(2, 2);
        let (pinv, truncated) = pseudoinverse(&b, 1e-12);
        assert!(!truncated);
        assert!((pinv - b).norm() < 1e-15);
    }
}
