//! Dense Hermitian eigenproblems and the generalized pencil used for ordering constants.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Largest |A_ij - conj(A_ji)| relative to the largest entry.
pub fn asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut scale = 0.0f64;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            scale = scale.max(m[(i, j)].norm());
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending. Each
/// eigenvector column is rotated so its largest component is real and positive.
pub fn herm_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Eigen("matrix is not square".into()));
    }
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Eigen("non-finite entry".into()));
    }
    let real = m.iter().all(|z| z.im == 0.0);
    let (vals, vecs) = if real {
        let r = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)].re + m[(j, i)].re));
        let e = r.symmetric_eigen();
        (e.eigenvalues.iter().copied().collect::<Vec<_>>(), e.eigenvectors.map(|x| Complex64::new(x, 0.0)))
    } else {
        let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let e = h.symmetric_eigen();
        (e.eigenvalues.iter().copied().collect::<Vec<_>>(), e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let sorted_vals = order.iter().map(|&i| vals[i]).collect();
    let mut sorted_vecs = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let col = vecs.column(i);
        let (mut best, mut arg) = (0.0, 0usize);
        for (r, z) in col.iter().enumerate() {
            if z.norm() > best + 1e-12 {
                best = z.norm();
                arg = r;
            }
        }
        let phase = if best > 0.0 { col[arg].conj() / best } else { Complex64::new(1.0, 0.0) };
        for r in 0..n {
            sorted_vecs[(r, k)] = col[r] * phase;
        }
    }
    Ok((sorted_vals, sorted_vecs))
}

pub fn eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    herm_eigen(m).map(|(v, _)| v)
}

/// Largest λ with `a v = λ b v`, restricted to the range of `b`.
#[derive(Debug, Clone, Copy)]
pub struct Pencil {
    pub value: f64,
    /// `a` carries weight on directions `b` annihilates.
    pub unbounded: bool,
    pub kept: usize,
    pub leak: f64,
}

pub fn pencil_max(a: &CMatrix, b: &CMatrix, rel_reg: f64) -> Result<Pencil> {
    let (s, v) = herm_eigen(b)?;
    let smax = s.first().copied().unwrap_or(0.0);
    if smax <= 0.0 {
        return Err(Error::Eigen("reference form has no positive spectrum".into()));
    }
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > rel_reg * smax).collect();
    let drop: Vec<usize> = (0..s.len()).filter(|&i| s[i] <= rel_reg * smax).collect();
    let n = a.nrows();
    let w = CMatrix::from_fn(n, keep.len(), |r, c| v[(r, keep[c])] / s[keep[c]].sqrt());
    let c = w.adjoint() * a * &w;
    let top = eigenvalues(&c)?.first().copied().unwrap_or(0.0);
    let amax = eigenvalues(a)?.first().copied().unwrap_or(0.0).abs();
    let leak = if drop.is_empty() || amax == 0.0 {
        0.0
    } else {
        let p = CMatrix::from_fn(n, drop.len(), |r, c| v[(r, drop[c])]);
        let q = p.adjoint() * a * &p;
        eigenvalues(&q)?.first().copied().unwrap_or(0.0).abs() / amax
    };
    Ok(Pencil { value: top, unbounded: leak > 1e-6, kept: keep.len(), leak })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_by_two_eigenvalues() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.75, 0.0), c(0.75, 0.0), c(1.0, 0.0)]);
        let (v, _) = herm_eigen(&m).unwrap();
        assert!((v[0] - 1.75).abs() < 1e-14 && (v[1] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn complex_hermitian_eigenvectors_satisfy_equation() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[c(2.0, 0.0), c(0.0, 1.0), c(0.5, 0.5), c(0.0, -1.0), c(3.0, 0.0), c(0.0, 0.0), c(0.5, -0.5), c(0.0, 0.0), c(1.0, 0.0)],
        );
        let (vals, vecs) = herm_eigen(&m).unwrap();
        for k in 0..3 {
            let x = vecs.column(k).into_owned();
            let r = &m * &x - &x * c(vals[k], 0.0);
            assert!(r.norm() < 1e-12);
        }
        assert!(vals.windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn pencil_of_identical_forms_is_one() {
        let m = CMatrix::from_fn(4, 4, |i, j| c((-((i as f64) - (j as f64)).abs() * 0.3).exp(), 0.0));
        let p = pencil_max(&m, &m, 1e-12).unwrap();
        assert!((p.value - 1.0).abs() < 1e-12);
        assert!(!p.unbounded);
    }

    #[test]
    fn pencil_flags_weight_on_null_directions() {
        let a = CMatrix::identity(2, 2);
        let mut b = CMatrix::zeros(2, 2);
        b[(0, 0)] = c(1.0, 0.0);
        let p = pencil_max(&a, &b, 1e-12).unwrap();
        assert!(p.unbounded);
    }
}
