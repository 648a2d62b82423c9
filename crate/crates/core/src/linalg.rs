//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::C64;

pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

/// Row-major real matrix literal.
pub fn rmat(rows: usize, cols: usize, data: &[f64]) -> CMat {
    assert_eq!(data.len(), rows * cols);
    CMat::from_fn(rows, cols, |i, j| C64::new(data[i * cols + j], 0.0))
}

/// Single-entry matrix `E_ij` with 1-based indices as printed.
pub fn unit(n: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(i - 1, j - 1)] = C64::new(1.0, 0.0);
    m
}

pub fn fro(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Kronecker product.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn direct_sum(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut m = CMat::zeros(ar + br, ac + bc);
    m.view_mut((0, 0), (ar, ac)).copy_from(a);
    m.view_mut((ar, ac), (br, bc)).copy_from(b);
    m
}

/// Eigenvalues of a symmetric real matrix, ascending, with eigenvectors as
/// columns in the same order.
pub fn sym_eigh(m: RMat) -> (Vec<f64>, RMat) {
    let n = m.nrows();
    if n == 0 {
        return (vec![], RMat::zeros(0, 0));
    }
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = RMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// Hermitian eigen-decomposition, ascending.
pub fn herm_eigh(m: CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (vec![], CMat::zeros(0, 0));
    }
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// Orthonormal basis (columns) of the null space of `a`, using singular
/// values below `tol * max(1, sigma_max)`.
pub fn null_space(a: &CMat, tol: f64) -> CMat {
    let (r, n) = a.shape();
    if r == 0 {
        return CMat::identity(n, n);
    }
    // zero rows keep V square for wide inputs; singular values of the Gram
    // matrix would square the cutoff below round-off
    let padded = if r < n { a.clone().resize_vertically(n, C64::new(0.0, 0.0)) } else { a.clone() };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.unwrap();
    let sv = &svd.singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max).max(1.0);
    let keep: Vec<usize> = (0..sv.len()).filter(|&k| sv[k] <= tol * top).collect();
    CMat::from_fn(n, keep.len(), |i, j| vt[(keep[j], i)].conj())
}

/// Moore-Penrose pseudoinverse with relative cutoff.
pub fn pinv(a: &CMat, rcond: f64) -> CMat {
    let svd = a.clone().svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let k = svd.singular_values.len();
    let mut sinv = CMat::zeros(k, k);
    for i in 0..k {
        let s = svd.singular_values[i];
        if s > rcond * smax {
            sinv[(i, i)] = C64::new(1.0 / s, 0.0);
        }
    }
    vt.adjoint() * sinv * u.adjoint()
}

/// Minimum-norm least-squares solution of `a x = b` with the residual norm.
pub fn lstsq(a: &CMat, b: &DVector<C64>, rcond: f64) -> (DVector<C64>, f64) {
    let pi = pinv(a, rcond);
    let mut x = &pi * b;
    // two refinement sweeps recover digits lost to badly scaled systems
    for _ in 0..2 {
        let r = b - a * &x;
        x += &pi * r;
    }
    let r = (a * &x - b).norm();
    (x, r)
}

/// Eigenvalues of a general complex matrix (Schur form). The iteration is
/// capped; on failure the matrix is conjugated by a fixed well-conditioned
/// similarity and retried, since exact structured inputs can stall the
/// unshifted QR sweep.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    let n = m.nrows();
    if n == 0 {
        return vec![];
    }
    let scale = fro(m);
    if scale == 0.0 {
        return vec![C64::new(0.0, 0.0); n];
    }
    let a = m / C64::new(scale, 0.0);
    let mut cur = a.clone();
    for attempt in 0..4 {
        if let Some(s) = cur.clone().try_schur(1e-15, 20_000) {
            let (_, t) = s.unpack();
            return (0..n).map(|i| t[(i, i)] * scale).collect();
        }
        // S = I + h N with N strictly upper triangular, inverse known exactly
        let h = 0.37 + 0.11 * attempt as f64;
        let mut s = CMat::identity(n, n);
        let mut si = CMat::identity(n, n);
        for i in 0..n.saturating_sub(1) {
            s[(i, i + 1)] = C64::new(h, 0.0);
        }
        // (I + hJ)^{-1} = sum_k (-h)^k J^k for the shift J
        for i in 0..n {
            for j in i + 1..n {
                si[(i, j)] = C64::new((-h).powi((j - i) as i32), 0.0);
            }
        }
        cur = &si * &a * &s;
    }
    panic!("eigenvalue iteration did not converge");
}

/// Eigenvalues sorted by descending modulus.
pub fn eigenvalues_by_modulus(m: &CMat) -> Vec<C64> {
    let mut ev = eigenvalues(m);
    ev.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
    ev
}

/// Numerical rank from singular values above `tol * sigma_max`.
pub fn rank(a: &CMat, tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Orthonormalizes columns (modified Gram-Schmidt with reorthogonalization),
/// dropping columns whose residual falls below `tol` relative to the input.
pub fn orthonormalize(cols: &[DVector<C64>], tol: f64) -> Vec<DVector<C64>> {
    let mut out: Vec<DVector<C64>> = Vec::new();
    for v in cols {
        let mut w = v.clone();
        let n0 = w.norm().max(1e-300);
        for _ in 0..2 {
            for q in &out {
                let d = q.dotc(&w);
                w -= q * d;
            }
        }
        let n = w.norm();
        if n > tol * n0 {
            out.push(w / C64::new(n, 0.0));
        }
    }
    out
}

pub fn fidelity(a: &[C64], b: &[C64]) -> f64 {
    let ov: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    ov.norm_sqr() / (na * nb)
}

pub fn real_fidelity(a: &[f64], b: &[f64]) -> f64 {
    let ov: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    ov * ov / (na * nb)
}

pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 1e-300).map(|&x| -x * x.ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, m: usize, seed: usize) -> CMat {
        CMat::from_fn(n, m, |i, j| {
            let x = ((i * 31 + j * 17 + seed * 7) % 23) as f64 / 11.0 - 1.0;
            let y = ((i * 13 + j * 29 + seed * 5) % 19) as f64 / 9.0 - 1.0;
            c(x, y)
        })
    }

    #[test]
    fn pinv_penrose_conditions() {
        for (n, m) in [(5, 3), (3, 5), (4, 4)] {
            let a = sample(n, m, n + m);
            let p = pinv(&a, 1e-12);
            assert!(fro(&(&a * &p * &a - &a)) < 1e-10);
            assert!(fro(&(&p * &a * &p - &p)) < 1e-10);
            let ap = &a * &p;
            assert!(fro(&(&ap - ap.adjoint())) < 1e-10);
        }
    }

    #[test]
    fn null_space_and_rank() {
        let a = sample(3, 6, 1);
        let k = null_space(&a, 1e-10);
        assert_eq!(k.ncols(), 6 - rank(&a, 1e-10));
        assert!(fro(&(&a * &k)) < 1e-10);
    }

    #[test]
    fn eigenvalues_of_a_triangular_matrix() {
        let mut a = CMat::zeros(3, 3);
        a[(0, 0)] = c(2.0, 0.0);
        a[(1, 1)] = c(-1.0, 1.0);
        a[(2, 2)] = c(0.5, 0.0);
        a[(0, 2)] = c(4.0, -1.0);
        let ev = eigenvalues_by_modulus(&a);
        let want = [c(2.0, 0.0), c(-1.0, 1.0), c(0.5, 0.0)];
        assert!(ev.iter().zip(&want).all(|(x, y)| (x - y).norm() < 1e-12));
    }

    #[test]
    fn kron_and_direct_sum_shapes() {
        let (a, b) = (sample(2, 3, 1), sample(3, 2, 2));
        let k = kron(&a, &b);
        assert_eq!(k.shape(), (6, 6));
        assert_eq!(k[(4, 5)], a[(1, 2)] * b[(1, 1)]);
        assert_eq!(direct_sum(&a, &b).shape(), (5, 5));
    }

    #[test]
    fn entropy_and_fidelity() {
        assert!((entropy(&[0.25; 4]) - 4f64.ln()).abs() < 1e-15);
        assert_eq!(entropy(&[1.0, 0.0]), 0.0);
        let a = [c(1.0, 0.0), c(0.0, 1.0)];
        let b = [c(0.0, 2.0), c(-2.0, 0.0)];
        assert!((fidelity(&a, &b) - 1.0).abs() < 1e-15);
        assert!((real_fidelity(&[1.0, 0.0], &[1.0, 1.0]) - 0.5).abs() < 1e-15);
    }
}
