//! Spectral primitives: Hermitian eigendecomposition (cyclic Jacobi),
//! singular value decomposition (one-sided Jacobi), general eigenvalues
//! (Hessenberg + shifted QR), and the operations built on them.
//!
//! Jacobi methods were chosen over faster reductions because every problem
//! here is small (dimension <= a few hundred), they are accurate for tiny
//! singular values, and the sweep order is fixed, which makes runs
//! bit-for-bit reproducible.

use super::matrix::{dot, vec_norm, ComplexMatrix, C64};
use super::{NumericError, Tolerance};

const MAX_SWEEPS: usize = 64;

/// Eigenvalues (descending) and matching orthonormal eigenvector columns of a
/// Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Thin singular value decomposition. `u` has a zero column wherever the
/// singular value is exactly zero numerically; `v` is square unitary.
#[derive(Debug, Clone)]
pub struct Svd {
    pub singular: Vec<f64>,
    pub u: ComplexMatrix,
    pub v: ComplexMatrix,
}

fn jacobi_rotation(app: f64, aqq: f64, apq: C64) -> (f64, f64, C64) {
    // Returns (c, s, phase) with the rotation's (p,q) column being
    // (s * phase, c) and (p,p) column (c, -s * conj(phase)).
    let abs = apq.norm();
    let phase = apq / abs;
    let tau = (aqq - app) / (2.0 * abs);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    (c, s, phase)
}

/// Cyclic Jacobi for Hermitian matrices. The input is symmetrized first; the
/// caller is responsible for rejecting matrices that are not Hermitian to its
/// own tolerance.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen, NumericError> {
    if !m.is_square() {
        return Err(NumericError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let mut a = m.hermitize();
    let mut v = ComplexMatrix::identity(n);
    if n <= 1 {
        let values = (0..n).map(|i| a.at(i, i).re).collect();
        return Ok(sorted_eigen(values, v));
    }

    let scale = a.frobenius_norm().max(1.0);
    let stop = 1e-15 * scale;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a.at(p, q).norm());
            }
        }
        if off <= stop {
            let values = (0..n).map(|i| a.at(i, i).re).collect();
            return Ok(sorted_eigen(values, v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.at(p, q);
                if apq.norm() <= stop * 1e-2 {
                    continue;
                }
                let (c, s, phase) = jacobi_rotation(a.at(p, p).re, a.at(q, q).re, apq);
                let cp = C64::new(c, 0.0);
                let sp = phase * s;
                // A <- J* A J, columns then rows.
                for i in 0..n {
                    let aip = a.at(i, p);
                    let aiq = a.at(i, q);
                    a.set(i, p, aip * cp - aiq * sp.conj());
                    a.set(i, q, aip * sp + aiq * cp);
                }
                for j in 0..n {
                    let apj = a.at(p, j);
                    let aqj = a.at(q, j);
                    a.set(p, j, apj * cp - aqj * sp);
                    a.set(q, j, apj * sp.conj() + aqj * cp);
                }
                // Clean the pivot so rounding cannot reintroduce asymmetry.
                a.set(p, q, C64::new(0.0, 0.0));
                a.set(q, p, C64::new(0.0, 0.0));
                let ip = a.at(p, p);
                let iq = a.at(q, q);
                a.set(p, p, C64::new(ip.re, 0.0));
                a.set(q, q, C64::new(iq.re, 0.0));
                for i in 0..n {
                    let vip = v.at(i, p);
                    let viq = v.at(i, q);
                    v.set(i, p, vip * cp - viq * sp.conj());
                    v.set(i, q, vip * sp + viq * cp);
                }
            }
        }
    }
    Err(NumericError::NoConvergence)
}

/// Descending eigenvalue order with phase-normalized eigenvector columns:
/// the first component of each column whose modulus is non-negligible is made
/// positive real, so repeated runs produce identical bases.
fn sorted_eigen(values: Vec<f64>, vectors: ComplexMatrix) -> HermitianEigen {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).expect("finite eigenvalues"));
    let mut sorted_vals = Vec::with_capacity(n);
    let mut cols = Vec::with_capacity(n);
    for &i in &idx {
        sorted_vals.push(values[i]);
        cols.push(phase_normalize(vectors.column(i)));
    }
    HermitianEigen {
        values: sorted_vals,
        vectors: ComplexMatrix::from_columns(&cols).expect("columns have equal length"),
    }
}

pub fn phase_normalize(mut col: Vec<C64>) -> Vec<C64> {
    let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return col;
    }
    let anchor = col
        .iter()
        .find(|z| z.norm() > 1e-8 * max)
        .copied()
        .unwrap_or(C64::new(1.0, 0.0));
    let phase = anchor / anchor.norm();
    for z in col.iter_mut() {
        *z /= phase;
    }
    col
}

/// One-sided Jacobi SVD: orthogonalizes the columns of `m` by plane
/// rotations. Accurate for small singular values and fully deterministic.
pub fn svd(m: &ComplexMatrix) -> Result<Svd, NumericError> {
    let rows = m.rows();
    let cols = m.cols();
    let mut w: Vec<Vec<C64>> = (0..cols).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<C64>> = (0..cols)
        .map(|j| {
            let mut e = vec![C64::new(0.0, 0.0); cols];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();

    let scale = m.frobenius_norm();
    if scale > 0.0 && cols > 1 {
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for i in 0..cols {
                for j in (i + 1)..cols {
                    let gii = vec_norm(&w[i]).powi(2);
                    let gjj = vec_norm(&w[j]).powi(2);
                    if gii == 0.0 || gjj == 0.0 {
                        continue;
                    }
                    let gij = dot(&w[i], &w[j]);
                    // Columns at round-off level cannot be orthogonalized
                    // further; the floor is tied to the input scale.
                    let floor = 1e-15 * scale * gii.max(gjj).sqrt();
                    if gij.norm() <= floor.max(1e-300) {
                        continue;
                    }
                    rotated = true;
                    let (c, s, phase) = jacobi_rotation(gii, gjj, gij);
                    let cp = C64::new(c, 0.0);
                    let sp = phase * s;
                    for r in 0..rows {
                        let wi = w[i][r];
                        let wj = w[j][r];
                        w[i][r] = wi * cp - wj * sp.conj();
                        w[j][r] = wi * sp + wj * cp;
                    }
                    for r in 0..cols {
                        let vi = v[i][r];
                        let vj = v[j][r];
                        v[i][r] = vi * cp - vj * sp.conj();
                        v[j][r] = vi * sp + vj * cp;
                    }
                }
            }
            if !rotated {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(NumericError::NoConvergence);
        }
    }

    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = w.iter().map(|c| vec_norm(c)).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).expect("finite norms"));

    let mut singular = Vec::with_capacity(cols);
    let mut u_cols = Vec::with_capacity(cols);
    let mut v_cols = Vec::with_capacity(cols);
    for &k in &order {
        let sigma = norms[k];
        singular.push(sigma);
        let vk = phase_normalize(v[k].clone());
        // Keep M v = sigma u consistent with the phase applied to v.
        let anchor = v[k]
            .iter()
            .find(|z| {
                z.norm() > 1e-8 * v[k].iter().map(|y| y.norm()).fold(0.0, f64::max)
            })
            .copied()
            .unwrap_or(C64::new(1.0, 0.0));
        let phase = anchor / anchor.norm();
        let uk: Vec<C64> = if sigma > 0.0 {
            w[k].iter().map(|z| z / phase / sigma).collect()
        } else {
            vec![C64::new(0.0, 0.0); rows]
        };
        u_cols.push(uk);
        v_cols.push(vk);
    }
    Ok(Svd {
        singular,
        u: ComplexMatrix::from_columns(&u_cols)?,
        v: ComplexMatrix::from_columns(&v_cols)?,
    })
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    // The Gram spectrum is enough for the norm and keeps the cost at the
    // smaller of the two dimensions.
    let gram = if m.cols() <= m.rows() {
        m.adjoint().matmul(m)
    } else {
        m.matmul(&m.adjoint())
    };
    let eig = hermitian_eigen(&gram).expect("Gram matrices are Hermitian");
    eig.values.first().map_or(0.0, |&l| l.max(0.0).sqrt())
}

/// Spectral norm of a Hermitian matrix (max |eigenvalue|), cheaper than a
/// full SVD and used for defect measurements.
pub fn hermitian_spectral_norm(m: &ComplexMatrix) -> Result<f64, NumericError> {
    let eig = hermitian_eigen(m)?;
    Ok(eig
        .values
        .iter()
        .map(|l| l.abs())
        .fold(0.0, f64::max))
}

/// Trace norm (sum of singular values) of a Hermitian matrix.
pub fn hermitian_trace_norm(m: &ComplexMatrix) -> Result<f64, NumericError> {
    let eig = hermitian_eigen(m)?;
    Ok(eig.values.iter().map(|l| l.abs()).sum())
}

/// Hermitian square root of a positive semidefinite matrix. Eigenvalues in
/// `[-rank_eps, 0)` are clamped to zero so that defect operators of
/// near-isometries stay positive semidefinite.
pub fn hermitian_sqrt(m: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix, NumericError> {
    if !m.is_square() {
        return Err(NumericError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let deviation = operator_norm(&(m - &m.adjoint()));
    if deviation > tol.residual_eps {
        return Err(NumericError::NotHermitian { deviation });
    }
    let eig = hermitian_eigen(m)?;
    if let Some(&min) = eig.values.last() {
        if min < -tol.rank_eps {
            return Err(NumericError::NotPsd { eigenvalue: min });
        }
    }
    let roots: Vec<C64> = eig
        .values
        .iter()
        .map(|&l| C64::new(l.max(0.0).sqrt(), 0.0))
        .collect();
    let d = ComplexMatrix::diag(&roots);
    Ok(eig.vectors.matmul(&d).matmul(&eig.vectors.adjoint()))
}

/// Orthonormal basis of the range of `m`: left singular vectors whose
/// singular value exceeds `rank_eps`. The zero matrix yields a matrix with
/// zero columns.
pub fn range_basis(m: &ComplexMatrix, tol: &Tolerance) -> ComplexMatrix {
    let dec = svd(m).expect("one-sided Jacobi converges on finite input");
    let mut cols = Vec::new();
    for (k, &sigma) in dec.singular.iter().enumerate() {
        if sigma > tol.rank_eps {
            cols.push(dec.u.column(k));
        }
    }
    if cols.is_empty() {
        ComplexMatrix::zeros(m.rows(), 0)
    } else {
        ComplexMatrix::from_columns(&cols).expect("equal length columns")
    }
}

/// Orthonormal basis of the kernel: right singular vectors with singular
/// value at most `rank_eps`.
pub fn kernel_basis(m: &ComplexMatrix, tol: &Tolerance) -> ComplexMatrix {
    let dec = svd(m).expect("one-sided Jacobi converges on finite input");
    let mut cols = Vec::new();
    for (k, &sigma) in dec.singular.iter().enumerate() {
        if sigma <= tol.rank_eps {
            cols.push(dec.v.column(k));
        }
    }
    if cols.is_empty() {
        ComplexMatrix::zeros(m.cols(), 0)
    } else {
        ComplexMatrix::from_columns(&cols).expect("equal length columns")
    }
}

/// max(||M*M - I||, ||MM* - I||) in operator norm; zero exactly for unitaries.
pub fn unitarity_defect(m: &ComplexMatrix) -> Result<f64, NumericError> {
    if !m.is_square() {
        return Err(NumericError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let id = ComplexMatrix::identity(n);
    let left = hermitian_spectral_norm(&(&m.adjoint().matmul(m) - &id))?;
    let right = hermitian_spectral_norm(&(&m.matmul(&m.adjoint()) - &id))?;
    Ok(left.max(right))
}

/// Modified Gram-Schmidt with one reorthogonalization pass; columns whose
/// remainder falls below `drop_eps` are dropped. Used where matrices are too
/// large for Jacobi SVD but a well-conditioned orthonormal span is enough.
pub fn orthonormal_columns(m: &ComplexMatrix, drop_eps: f64) -> ComplexMatrix {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for j in 0..m.cols() {
        let mut v = m.column(j);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &v);
                for (x, y) in v.iter_mut().zip(b.iter()) {
                    *x -= c * y;
                }
            }
        }
        let n = vec_norm(&v);
        if n > drop_eps {
            let inv = C64::new(1.0 / n, 0.0);
            basis.push(v.iter().map(|z| z * inv).collect());
        }
    }
    if basis.is_empty() {
        ComplexMatrix::zeros(m.rows(), 0)
    } else {
        ComplexMatrix::from_columns(&basis).expect("equal length columns")
    }
}

// ---- general (non-Hermitian) eigenvalues -------------------------------

fn householder_hessenberg(a: &mut ComplexMatrix) {
    let n = a.rows();
    for k in 0..n.saturating_sub(2) {
        let mut x: Vec<C64> = ((k + 1)..n).map(|i| a.at(i, k)).collect();
        let nx = vec_norm(&x);
        if nx <= 1e-300 {
            continue;
        }
        let alpha = if x[0].norm() > 0.0 {
            -(x[0] / x[0].norm()) * nx
        } else {
            C64::new(-nx, 0.0)
        };
        x[0] -= alpha;
        let nv = vec_norm(&x);
        if nv <= 1e-300 {
            continue;
        }
        let v: Vec<C64> = x.iter().map(|z| z / nv).collect();
        // A <- (I - 2vv*) A (I - 2vv*) restricted to the trailing block.
        for j in 0..n {
            let mut c = C64::new(0.0, 0.0);
            for (i, vi) in v.iter().enumerate() {
                c += vi.conj() * a.at(k + 1 + i, j);
            }
            c *= 2.0;
            for (i, vi) in v.iter().enumerate() {
                let cur = a.at(k + 1 + i, j);
                a.set(k + 1 + i, j, cur - vi * c);
            }
        }
        for i in 0..n {
            let mut c = C64::new(0.0, 0.0);
            for (j, vj) in v.iter().enumerate() {
                c += a.at(i, k + 1 + j) * vj;
            }
            c *= 2.0;
            for (j, vj) in v.iter().enumerate() {
                let cur = a.at(i, k + 1 + j);
                a.set(i, k + 1 + j, cur - c * vj.conj());
            }
        }
    }
}

/// Unitary G = [[ca, sa], [-conj(sa), conj(ca)]] with G (a, b)^T = (r, 0)^T.
fn givens(a: C64, b: C64) -> (C64, C64) {
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if r <= 1e-300 {
        return (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    }
    (a.conj() / r, b.conj() / r)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr2 = (a + d) * 0.5;
    let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * c).sqrt();
    let l1 = tr2 + disc;
    let l2 = tr2 - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// All eigenvalues of a square complex matrix, sorted by descending modulus
/// (ties by descending real, then imaginary part). Explicit single-shift QR
/// on the Hessenberg form with Wilkinson shifts.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>, NumericError> {
    if !m.is_square() {
        return Err(NumericError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = m.clone();
    householder_hessenberg(&mut h);

    let negligible = |h: &ComplexMatrix, i: usize| -> bool {
        let sub = h.at(i, i - 1).norm();
        let scale = h.at(i, i).norm() + h.at(i - 1, i - 1).norm();
        sub <= 1e-15 * scale.max(1e-300)
    };

    let mut values = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut stagnant = 0usize;
    let mut total_iters = 0usize;
    let max_iters = 80 * n + 200;
    loop {
        // Deflate converged trailing eigenvalues.
        while hi > 0 && negligible(&h, hi) {
            values.push(h.at(hi, hi));
            h.set(hi, hi - 1, C64::new(0.0, 0.0));
            hi -= 1;
            stagnant = 0;
        }
        if hi == 0 {
            values.push(h.at(0, 0));
            return Ok(finish_eigenvalues(values));
        }
        // Start of the active unreduced block.
        let mut lo = hi;
        while lo > 0 && !negligible(&h, lo) {
            lo -= 1;
        }
        if lo > 0 {
            h.set(lo, lo - 1, C64::new(0.0, 0.0));
        }

        total_iters += 1;
        stagnant += 1;
        if total_iters > max_iters {
            return Err(NumericError::NoConvergence);
        }
        let mu = if stagnant % 12 == 0 {
            h.at(hi, hi) + C64::new(0.75 * h.at(hi, hi - 1).norm(), 0.0)
        } else {
            wilkinson_shift(
                h.at(hi - 1, hi - 1),
                h.at(hi - 1, hi),
                h.at(hi, hi - 1),
                h.at(hi, hi),
            )
        };

        // Explicit-shift QR step restricted to the decoupled active block:
        // H_block - mu, factor with Givens rotations, recombine as RQ + mu.
        for i in lo..=hi {
            let d = h.at(i, i);
            h.set(i, i, d - mu);
        }
        let mut rots: Vec<(usize, C64, C64)> = Vec::with_capacity(hi - lo);
        for i in lo..hi {
            let (ca, sa) = givens(h.at(i, i), h.at(i + 1, i));
            for j in i..=hi {
                let x = h.at(i, j);
                let y = h.at(i + 1, j);
                h.set(i, j, ca * x + sa * y);
                h.set(i + 1, j, -sa.conj() * x + ca.conj() * y);
            }
            h.set(i + 1, i, C64::new(0.0, 0.0));
            rots.push((i, ca, sa));
        }
        for &(i, ca, sa) in &rots {
            // Columns i, i+1 pick up G^H from the right.
            for r in lo..=(i + 1) {
                let x = h.at(r, i);
                let y = h.at(r, i + 1);
                h.set(r, i, x * ca.conj() + y * sa.conj());
                h.set(r, i + 1, -x * sa + y * ca);
            }
        }
        for i in lo..=hi {
            let d = h.at(i, i);
            h.set(i, i, d + mu);
        }
    }
}

fn finish_eigenvalues(mut values: Vec<C64>) -> Vec<C64> {
    values.sort_by(|a, b| {
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap()
            .then(b.re.partial_cmp(&a.re).unwrap())
            .then(b.im.partial_cmp(&a.im).unwrap())
    });
    values
}

/// Spectral radius via the general eigenvalue routine.
pub fn spectral_radius(m: &ComplexMatrix) -> Result<f64, NumericError> {
    let ev = eigenvalues(m)?;
    Ok(ev.first().map_or(0.0, |z| z.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::matrix::basis_vec;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> ComplexMatrix {
        let mut gauss = || {
            let u1 = (rng.next_u64() as f64 + 1.0) / (u64::MAX as f64 + 2.0);
            let u2 = (rng.next_u64() as f64 + 1.0) / (u64::MAX as f64 + 2.0);
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        };
        ComplexMatrix::from_fn(rows, cols, |_, _| C64::new(gauss(), gauss()))
    }

    #[test]
    fn hermitian_eigen_reconstructs_the_matrix() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for dim in 1..=8 {
            let a = random_matrix(&mut rng, dim, dim);
            let h = a.hermitize();
            let eig = hermitian_eigen(&h).unwrap();
            let lam = ComplexMatrix::diag(
                &eig.values.iter().map(|&l| c(l, 0.0)).collect::<Vec<_>>(),
            );
            let rebuilt = eig.vectors.matmul(&lam).matmul(&eig.vectors.adjoint());
            assert!(
                (&rebuilt - &h).frobenius_norm() < 1e-11 * h.frobenius_norm().max(1.0),
                "dim {dim}"
            );
            let gram = eig.vectors.adjoint().matmul(&eig.vectors);
            assert!((&gram - &ComplexMatrix::identity(dim)).frobenius_norm() < 1e-12);
            for w in eig.values.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn svd_factors_random_matrices() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for (rows, cols) in [(4usize, 4usize), (6, 3), (3, 6), (5, 1), (1, 5)] {
            let m = random_matrix(&mut rng, rows, cols);
            let dec = svd(&m).unwrap();
            // M V = U diag(sigma)
            let mv = m.matmul(&dec.v);
            for (k, &sigma) in dec.singular.iter().enumerate() {
                let col = mv.column(k);
                let target: Vec<C64> = dec
                    .u
                    .column(k)
                    .iter()
                    .map(|z| z * C64::new(sigma, 0.0))
                    .collect();
                let diff = vec_norm(
                    &col.iter()
                        .zip(target.iter())
                        .map(|(a, b)| a - b)
                        .collect::<Vec<_>>(),
                );
                assert!(diff < 1e-10 * m.frobenius_norm().max(1.0));
            }
            let vv = dec.v.adjoint().matmul(&dec.v);
            assert!(
                (&vv - &ComplexMatrix::identity(cols)).frobenius_norm() < 1e-12,
                "V unitary"
            );
        }
    }

    #[test]
    fn hermitian_sqrt_matches_diagonal_examples() {
        let tol = Tolerance::default();
        let id = ComplexMatrix::identity(2);
        assert!((&hermitian_sqrt(&id, &tol).unwrap() - &id).frobenius_norm() < 1e-14);
        let m = ComplexMatrix::diag(&[c(0.0, 0.0), c(0.25, 0.0)]);
        let s = hermitian_sqrt(&m, &tol).unwrap();
        let expected = ComplexMatrix::diag(&[c(0.0, 0.0), c(0.5, 0.0)]);
        assert!((&s - &expected).frobenius_norm() < 1e-14);
    }

    #[test]
    fn hermitian_sqrt_squares_back_on_random_gram_matrices() {
        let tol = Tolerance::default();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for dim in 1..=8 {
            let a = random_matrix(&mut rng, dim, dim);
            let m = a.adjoint().matmul(&a);
            let s = hermitian_sqrt(&m, &tol).unwrap();
            assert!(
                operator_norm(&(&s.matmul(&s) - &m)) <= 1e-10 * m.frobenius_norm().max(1.0),
                "dim {dim}"
            );
            assert!(s.hermitian_deviation() < 1e-10);
        }
    }

    #[test]
    fn hermitian_sqrt_rejects_non_hermitian_and_non_psd() {
        let tol = Tolerance::default();
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert!(matches!(
            hermitian_sqrt(&m, &tol),
            Err(NumericError::NotHermitian { .. })
        ));
        let neg = ComplexMatrix::diag(&[c(1.0, 0.0), c(-0.5, 0.0)]);
        assert!(matches!(
            hermitian_sqrt(&neg, &tol),
            Err(NumericError::NotPsd { .. })
        ));
    }

    #[test]
    fn range_basis_handles_zero_rank_one_and_full_rank() {
        let tol = Tolerance::default();
        let zero = ComplexMatrix::zeros(2, 2);
        assert_eq!(range_basis(&zero, &tol).cols(), 0);
        assert_eq!(range_basis(&zero, &tol).rows(), 2);

        let p = ComplexMatrix::diag(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let b = range_basis(&p, &tol);
        assert_eq!(b.cols(), 1);
        assert!((b.at(0, 0) - c(1.0, 0.0)).norm() < 1e-14);
        assert!(b.at(1, 0).norm() < 1e-14);

        // Defect operator of [[0, 1/2], [0, 0]] has full range.
        let d = ComplexMatrix::diag(&[c(1.0, 0.0), c(0.75f64.sqrt(), 0.0)]);
        assert_eq!(range_basis(&d, &tol).cols(), 2);
    }

    #[test]
    fn range_basis_rank_matches_singular_count_oracle() {
        let tol = Tolerance::default();
        let mut rng = ChaCha20Rng::seed_from_u64(29);
        for _ in 0..50 {
            let dim = 2 + (rng.next_u64() % 5) as usize;
            let rank = (rng.next_u64() % (dim as u64 + 1)) as usize;
            let a = random_matrix(&mut rng, dim, rank);
            let b = random_matrix(&mut rng, rank, dim);
            let m = a.matmul(&b);
            let basis = range_basis(&m, &tol);
            let oracle = svd(&m)
                .unwrap()
                .singular
                .iter()
                .filter(|&&s| s > tol.rank_eps)
                .count();
            assert_eq!(basis.cols(), oracle);
            if basis.cols() > 0 {
                let gram = basis.adjoint().matmul(&basis);
                assert!(
                    (&gram - &ComplexMatrix::identity(basis.cols())).frobenius_norm()
                        < tol.residual_eps
                );
            }
        }
    }

    #[test]
    fn unitarity_defect_trivial_values() {
        assert!(unitarity_defect(&ComplexMatrix::identity(3)).unwrap() < 1e-15);
        let p = ComplexMatrix::diag(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!((unitarity_defect(&p).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unitarity_defect_invariant_under_unitary_factors() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let tol = Tolerance::default();
        for _ in 0..20 {
            let dim = 2 + (rng.next_u64() % 4) as usize;
            let m = random_matrix(&mut rng, dim, dim);
            let v = range_basis(&random_matrix(&mut rng, dim, dim), &tol);
            let w = range_basis(&random_matrix(&mut rng, dim, dim), &tol);
            if v.cols() != dim || w.cols() != dim {
                continue;
            }
            let a = unitarity_defect(&m).unwrap();
            let b = unitarity_defect(&v.matmul(&m).matmul(&w)).unwrap();
            assert!((a - b).abs() <= 10.0 * tol.residual_eps * (1.0 + a));
        }
    }

    #[test]
    fn eigenvalues_of_triangular_matrices_are_the_diagonal() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(2.0, 1.0), c(5.0, 0.0), c(1.0, 1.0)],
            vec![c(0.0, 0.0), c(-1.0, 0.0), c(3.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.5, -0.5)],
        ])
        .unwrap();
        let ev = eigenvalues(&m).unwrap();
        let mut expected = vec![c(2.0, 1.0), c(-1.0, 0.0), c(0.5, -0.5)];
        expected.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
        for (got, want) in ev.iter().zip(expected.iter()) {
            assert!((got - want).norm() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn eigenvalues_match_jacobi_on_hermitian_input() {
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        for dim in 2..=7 {
            let h = random_matrix(&mut rng, dim, dim).hermitize();
            let mut qr: Vec<f64> = eigenvalues(&h).unwrap().iter().map(|z| z.re).collect();
            qr.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let jac = hermitian_eigen(&h).unwrap().values;
            for (a, b) in qr.iter().zip(jac.iter()) {
                assert!((a - b).abs() < 1e-9 * h.frobenius_norm().max(1.0), "dim {dim}");
            }
        }
    }

    #[test]
    fn eigenvalue_sum_matches_trace_on_random_matrices() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        for dim in 2..=8 {
            let m = random_matrix(&mut rng, dim, dim);
            let ev = eigenvalues(&m).unwrap();
            let sum: C64 = ev.iter().sum();
            assert!(
                (sum - m.trace()).norm() < 1e-9 * m.frobenius_norm().max(1.0),
                "dim {dim}"
            );
        }
    }

    #[test]
    fn spectral_radius_agrees_with_gelfand_scaling_oracle() {
        // Independent route: repeated squaring with renormalization,
        // rho = exp(sum 2^{-k} log r_k).
        let gelfand = |m: &ComplexMatrix| -> f64 {
            let mut b = m.clone();
            let mut log_rho = 0.0f64;
            let mut weight = 1.0f64;
            for _ in 0..48 {
                let r = operator_norm(&b);
                if r <= 1e-300 {
                    return 0.0;
                }
                weight *= 0.5;
                log_rho += weight * 2.0 * r.ln();
                // log rho += (1/2^k) log r_k with r_k = ||B_k|| after scaling
                b = b.scale(c(1.0 / r, 0.0));
                b = b.matmul(&b);
            }
            log_rho.exp()
        };
        let mut rng = ChaCha20Rng::seed_from_u64(23);
        for dim in 2..=6 {
            let m = random_matrix(&mut rng, dim, dim);
            let rho = spectral_radius(&m).unwrap();
            let oracle = gelfand(&m);
            assert!(
                (rho - oracle).abs() < 1e-6 * rho.max(1.0),
                "dim {dim}: {rho} vs {oracle}"
            );
        }
    }

    #[test]
    fn kernel_basis_spans_the_nullspace() {
        let tol = Tolerance::default();
        let m = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 0.0]]);
        let k = kernel_basis(&m, &tol);
        assert_eq!(k.cols(), 2);
        let img = m.matmul(&k);
        assert!(img.frobenius_norm() < 1e-12);
    }

    #[test]
    fn orthonormal_columns_spans_and_is_orthonormal() {
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        let m = random_matrix(&mut rng, 6, 3);
        let stacked = ComplexMatrix::from_columns(&[
            m.column(0),
            m.column(1),
            m.column(0),
            m.column(2),
        ])
        .unwrap();
        let q = orthonormal_columns(&stacked, 1e-10);
        assert_eq!(q.cols(), 3);
        let gram = q.adjoint().matmul(&q);
        assert!((&gram - &ComplexMatrix::identity(3)).frobenius_norm() < 1e-12);
        // Each original column is reproduced by projection.
        for j in 0..3 {
            let col = m.column(j);
            let coeffs = q.adjoint_matvec(&col);
            let back = q.matvec(&coeffs);
            let mut diff = 0.0;
            for (a, b) in back.iter().zip(col.iter()) {
                diff += (a - b).norm_sqr();
            }
            assert!(diff.sqrt() < 1e-10);
        }
    }

    #[test]
    fn phase_normalize_fixes_leading_phase() {
        let v = phase_normalize(vec![c(0.0, 2.0), c(1.0, 1.0)]);
        assert!(v[0].im.abs() < 1e-15);
        assert!(v[0].re > 0.0);
        let e = basis_vec(3, 1);
        assert_eq!(phase_normalize(e.clone()), e);
    }
}
