//! The coefficient model of a *-stable contraction: the isometric embedding
//! `h -> (D_* T*^n h)_n`, the characteristic function
//! `theta(z) = -T + z D_* (I - z T*)^{-1} D` restricted to the defect space,
//! the model map `h (+) f -> Ch + theta f`, the adjoint leg products
//! converging to it, and the Beurling identity `(CH)^perp = theta H^2`.
//!
//! All series are truncated with reported tail estimates; the tail rule
//! picks the degree from the spectral radius so that "inner up to tolerance"
//! is a computed bound, not hope.

use thiserror::Error;

use crate::contraction::DefectData;
use crate::dilation::{DilationError, DilationVector};
use crate::numeric::matrix::{vec_add, vec_norm, vec_sub, zero_vec, ComplexMatrix, C64};
use crate::numeric::spectral::{
    hermitian_spectral_norm, operator_norm, orthonormal_columns, spectral_radius,
};
use crate::numeric::{NumericError, Tolerance};

#[derive(Debug, Error)]
pub enum CharfunError {
    #[error("evaluation point has modulus {modulus}, outside the closed unit disc")]
    OutsideDisc { modulus: f64 },
    #[error("operation requires a *-stable contraction (spectral radius {spectral_radius})")]
    NotStarStable { spectral_radius: f64 },
    #[error("truncation overflow: {context}")]
    TruncationOverflow { context: String },
    #[error(transparent)]
    Dilation(#[from] DilationError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Smallest truncation degree whose geometric tail estimate falls below
/// `target`, capped. The estimate treats `||T*^n||` as decaying like the
/// spectral radius, which is exact up to polynomial transients.
pub fn tail_degree(dd: &DefectData, target: f64, cap: usize) -> usize {
    let dim = dd.dim_h();
    let rho = spectral_radius(dd.t_matrix()).unwrap_or(1.0);
    if rho < 1e-12 {
        // Nilpotent: the series terminates by dimension count.
        return (dim + 2).min(cap);
    }
    if rho >= 1.0 {
        return cap;
    }
    let needed = (target * (1.0 - rho)).ln() / rho.ln();
    ((needed.ceil() as usize) + dim + 2).clamp(4, cap)
}

/// Coefficients of the isometric embedding of `H` into the star-defect
/// coefficient space, with an estimate for the discarded tail.
#[derive(Debug, Clone)]
pub struct CoefficientSequence {
    /// Level `n` holds `D_* T*^n h` in star-defect coordinates.
    pub levels: Vec<Vec<C64>>,
    /// Estimate of the truncated tail, reported as
    /// `||T*^N h|| / (1 - spectral radius)`; infinite when the contraction
    /// is not *-stable.
    pub tail_bound: f64,
    /// False when the contraction is not *-stable; the embedding is still
    /// defined but no longer isometric in the limit.
    pub star_stable: bool,
}

pub fn embed_c(dd: &DefectData, h: &[C64], degree: usize, tol: &Tolerance) -> CoefficientSequence {
    assert!(degree >= 1);
    let mut levels = Vec::with_capacity(degree);
    let mut power = h.to_vec();
    for _ in 0..degree {
        levels.push(dd.to_defect_star_coords(&dd.defect_star().matvec(&power)));
        power = dd.t_matrix().adjoint_matvec(&power);
    }
    let rho = spectral_radius(dd.t_matrix()).unwrap_or(1.0);
    let star_stable = rho < 1.0 - tol.rank_eps;
    let tail_bound = if star_stable {
        vec_norm(&power) / (1.0 - rho)
    } else {
        f64::INFINITY
    };
    CoefficientSequence {
        levels,
        tail_bound,
        star_stable,
    }
}

/// Taylor coefficients of the characteristic function in the chosen defect
/// bases: a `dim_defect_star x dim_defect` matrix per degree.
#[derive(Debug, Clone)]
pub struct CharacteristicFunction {
    coeffs: Vec<ComplexMatrix>,
    spectral_radius: f64,
    tail_scale: f64,
}

impl CharacteristicFunction {
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, n: usize) -> &ComplexMatrix {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    pub fn dim_in(&self) -> usize {
        self.coeffs[0].cols()
    }

    pub fn dim_out(&self) -> usize {
        self.coeffs[0].rows()
    }

    /// Estimate of the coefficient-norm tail beyond the truncation, for
    /// points on the closed disc; infinite when not *-stable.
    pub fn tail_bound(&self) -> f64 {
        if self.spectral_radius >= 1.0 {
            f64::INFINITY
        } else {
            self.tail_scale / (1.0 - self.spectral_radius)
        }
    }
}

/// Coefficients `theta_0 = -T` and `theta_n = D_* T*^{n-1} D` (n >= 1),
/// compressed to the defect bases.
pub fn theta_coefficients(dd: &DefectData, degree: usize) -> CharacteristicFunction {
    assert!(degree >= 1);
    let b = dd.basis_defect();
    let bs = dd.basis_defect_star();
    let mut coeffs = Vec::with_capacity(degree);
    coeffs.push(
        bs.adjoint()
            .matmul(dd.t_matrix())
            .matmul(b)
            .scale(C64::new(-1.0, 0.0)),
    );
    // Running factor D_* T*^{n-1}, applied to the defect basis image of D.
    let d_cols = dd.defect().matmul(b);
    let mut left = dd.defect_star().clone();
    for _ in 1..degree {
        coeffs.push(bs.adjoint().matmul(&left).matmul(&d_cols));
        left = left.matmul(&dd.t_matrix().adjoint());
    }
    let rho = spectral_radius(dd.t_matrix()).unwrap_or(1.0);
    let tail_scale = operator_norm(&left);
    CharacteristicFunction {
        coeffs,
        spectral_radius: rho,
        tail_scale,
    }
}

/// Value of the truncated series together with its tail estimate.
#[derive(Debug, Clone)]
pub struct ThetaEval {
    pub value: ComplexMatrix,
    pub tail_bound: f64,
}

pub fn theta_eval(
    cf: &CharacteristicFunction,
    z: C64,
    tol: &Tolerance,
) -> Result<ThetaEval, CharfunError> {
    let modulus = z.norm();
    if modulus > 1.0 + tol.rank_eps {
        return Err(CharfunError::OutsideDisc { modulus });
    }
    let mut value = ComplexMatrix::zeros(cf.dim_out(), cf.dim_in());
    for coeff in cf.coeffs.iter().rev() {
        value = &value.scale(z) + coeff;
    }
    Ok(ThetaEval {
        value,
        tail_bound: cf.tail_bound() * modulus.powi(cf.degree() as i32),
    })
}

/// Image of `h (+) f` under the model map: level `j` carries
/// `(Ch)_j + sum_i theta_{j-i} a_i`.
#[derive(Debug, Clone)]
pub struct ModelMapOutput {
    pub levels: Vec<Vec<C64>>,
    pub tail_bound: f64,
}

pub fn model_map_w(
    dd: &DefectData,
    cf: &CharacteristicFunction,
    v: &DilationVector,
    n_out: usize,
    tol: &Tolerance,
) -> Result<ModelMapOutput, CharfunError> {
    let effective_degree = v
        .levels
        .iter()
        .rposition(|lvl| vec_norm(lvl) > tol.rank_eps)
        .map_or(0, |p| p + 1);
    if n_out < effective_degree {
        return Err(CharfunError::TruncationOverflow {
            context: format!(
                "output degree {n_out} cannot capture input coefficients up to {effective_degree}"
            ),
        });
    }
    if cf.degree() < n_out {
        return Err(CharfunError::TruncationOverflow {
            context: format!(
                "characteristic function truncated at {} but output degree is {n_out}",
                cf.degree()
            ),
        });
    }
    let embedding = embed_c(dd, &v.h, n_out, tol);
    let rs = dd.dim_defect_star();
    let mut levels = Vec::with_capacity(n_out);
    for j in 0..n_out {
        let mut acc = embedding.levels[j].clone();
        for i in 0..=j.min(effective_degree.saturating_sub(1)) {
            if i < v.levels.len() {
                let contrib = cf.coeff(j - i).matvec(&v.levels[i]);
                acc = vec_add(&acc, &contrib);
            }
        }
        debug_assert_eq!(acc.len(), rs);
        levels.push(acc);
    }
    Ok(ModelMapOutput {
        levels,
        tail_bound: embedding.tail_bound + cf.tail_bound() * v.norm(),
    })
}

/// Dense matrix of the model map from `H (+) H^2_{n_in}(defect)` to
/// `H^2_{n_out}(defect_*)`; columns are the embedded basis of `H` followed by
/// the shifted characteristic-function columns.
pub fn model_matrix(
    dd: &DefectData,
    cf: &CharacteristicFunction,
    n_in: usize,
    n_out: usize,
    tol: &Tolerance,
) -> ComplexMatrix {
    let d = dd.dim_h();
    let r = dd.dim_defect();
    let rs = dd.dim_defect_star();
    let mut out = ComplexMatrix::zeros(n_out * rs, d + n_in * r);
    for k in 0..d {
        let mut h = zero_vec(d);
        h[k] = C64::new(1.0, 0.0);
        let emb = embed_c(dd, &h, n_out, tol);
        for (j, lvl) in emb.levels.iter().enumerate() {
            for (i, &x) in lvl.iter().enumerate() {
                out.set(j * rs + i, k, x);
            }
        }
    }
    for shift in 0..n_in {
        for col in 0..r {
            for j in shift..n_out {
                let block = cf.coeff(j - shift);
                for i in 0..rs {
                    out.set(j * rs + i, d + shift * r + col, block.at(i, col));
                }
            }
        }
    }
    out
}

/// Trace of the adjoint leg product applied step by step, with the per-step
/// distance to the model-map image and the closed-form cross-check of the
/// induction display.
#[derive(Debug, Clone)]
pub struct LimitProductTrace {
    /// Norm of the `H` component after each step; converges to zero exactly
    /// when the contraction is *-stable.
    pub h_component_norms: Vec<f64>,
    /// Distance to the model-map image after each step.
    pub step_errors: Vec<f64>,
    pub final_h: Vec<C64>,
    /// First `n` levels in star-defect coordinates, the rest untouched in
    /// defect coordinates.
    pub final_levels: Vec<Vec<C64>>,
    /// Largest deviation between the iterated product and the closed-form
    /// induction display, over all steps.
    pub induction_residual: f64,
}

pub fn limit_product_what(
    dd: &DefectData,
    n: usize,
    v: &DilationVector,
    tol: &Tolerance,
) -> Result<LimitProductTrace, CharfunError> {
    assert!(n >= 1);
    let degree = v.space().degree();
    if n > degree {
        return Err(CharfunError::TruncationOverflow {
            context: format!("requested {n} steps on {degree} truncated levels"),
        });
    }
    let cf = theta_coefficients(dd, degree);
    let w_image = model_map_w(dd, &cf, v, degree, tol)?;
    let w_ambient: Vec<Vec<C64>> = w_image
        .levels
        .iter()
        .map(|lvl| dd.from_defect_star_coords(lvl))
        .collect();

    // Values reused by the induction display: T*^k h and ambient input
    // coefficients.
    let a_ambient: Vec<Vec<C64>> = v.levels.iter().map(|l| dd.from_defect_coords(l)).collect();
    let mut adj_powers = vec![v.h.clone()];
    for _ in 0..n {
        let last = adj_powers.last().expect("non-empty");
        adj_powers.push(dd.t_matrix().adjoint_matvec(last));
    }

    let mut h_cur = v.h.clone();
    let mut levels = v.levels.clone();
    let mut h_component_norms = Vec::with_capacity(n);
    let mut step_errors = Vec::with_capacity(n);
    let mut induction_residual = 0.0f64;

    for step in 0..n {
        let a_amb = dd.from_defect_coords(&levels[step]);
        let h_next = vec_add(
            &dd.t_matrix().adjoint_matvec(&h_cur),
            &dd.defect().matvec(&a_amb),
        );
        let new_level = dd.to_defect_star_coords(&vec_sub(
            &dd.defect_star().matvec(&h_cur),
            &dd.t_matrix().matvec(&a_amb),
        ));
        h_cur = h_next;
        levels[step] = new_level;
        let star_done = step + 1;

        h_component_norms.push(vec_norm(&h_cur));

        // Induction display: after s steps the H component is
        // T*^s h + sum_{i<s} T*^{s-1-i} D a_i, and level j = s-1 carries
        // D_* T*^j h + sum_{i<j} D_* T*^{j-1-i} D a_i - T a_j.
        let s = step + 1;
        let mut h_closed = adj_powers[s].clone();
        for (i, a_i) in a_ambient.iter().enumerate().take(s) {
            let mut term = dd.defect().matvec(a_i);
            for _ in 0..(s - 1 - i) {
                term = dd.t_matrix().adjoint_matvec(&term);
            }
            h_closed = vec_add(&h_closed, &term);
        }
        induction_residual = induction_residual.max(vec_norm(&vec_sub(&h_cur, &h_closed)));
        let j = step;
        let mut lvl_closed = dd.defect_star().matvec(&adj_powers[j]);
        for (i, a_i) in a_ambient.iter().enumerate().take(j) {
            let mut term = dd.defect().matvec(a_i);
            for _ in 0..(j - 1 - i) {
                term = dd.t_matrix().adjoint_matvec(&term);
            }
            lvl_closed = vec_add(&lvl_closed, &dd.defect_star().matvec(&term));
        }
        lvl_closed = vec_sub(&lvl_closed, &dd.t_matrix().matvec(&a_ambient[j]));
        let lvl_ambient = dd.from_defect_star_coords(&levels[j]);
        induction_residual = induction_residual.max(vec_norm(&vec_sub(&lvl_ambient, &lvl_closed)));

        // Distance to the model image, in ambient coordinates so levels of
        // both kinds compare in the same space.
        let mut err2: f64 = h_cur.iter().map(|z| z.norm_sqr()).sum();
        for (idx, lvl) in levels.iter().enumerate() {
            let ambient = if idx < star_done {
                dd.from_defect_star_coords(lvl)
            } else {
                dd.from_defect_coords(lvl)
            };
            err2 += vec_norm(&vec_sub(&ambient, &w_ambient[idx])).powi(2);
        }
        step_errors.push(err2.sqrt());
    }

    Ok(LimitProductTrace {
        h_component_norms,
        step_errors,
        final_h: h_cur,
        final_levels: levels,
        induction_residual,
    })
}

/// Outcome of the subspace comparison `(CH)^perp` vs `theta H^2` inside the
/// truncated star-defect coefficient space.
#[derive(Debug, Clone)]
pub struct BeurlingReport {
    /// `|| P_low (P_perp - P_theta) P_low ||` on the certified low-degree
    /// block; equals the largest principal-angle sine between the restricted
    /// subspaces.
    pub residual: f64,
    /// Number of levels in the certified low-degree block.
    pub restricted_levels: usize,
    /// Truncation degree used for the ambient space.
    pub degree: usize,
    /// Levels of multiplier coefficients kept in the theta columns.
    pub multiplier_levels: usize,
    /// Geometric tail estimate at the restriction boundary.
    pub tail_bound: f64,
}

pub fn beurling_residual(
    dd: &DefectData,
    degree: usize,
    tol: &Tolerance,
) -> Result<BeurlingReport, CharfunError> {
    let rho = spectral_radius(dd.t_matrix())?;
    if rho >= 1.0 - tol.rank_eps {
        return Err(CharfunError::NotStarStable {
            spectral_radius: rho,
        });
    }
    let d = dd.dim_h();
    let rs = dd.dim_defect_star();
    // Levels a degree-L vector needs before the geometric tail falls below
    // the certification target.
    let pad = if rho < 1e-12 {
        d + 1
    } else {
        ((1e-8f64.ln() / rho.ln()).ceil() as usize) + d + 1
    };
    if degree <= pad + 2 {
        return Err(CharfunError::TruncationOverflow {
            context: format!("degree {degree} leaves no certified block below pad {pad}"),
        });
    }
    let multiplier_levels = degree - 2;
    let restricted_levels = degree - pad - 2;

    let cf = theta_coefficients(dd, degree);
    let ambient_dim = degree * rs;

    // Orthonormal basis of the embedded copy of H.
    let mut c_cols = ComplexMatrix::zeros(ambient_dim, d);
    for k in 0..d {
        let mut h = zero_vec(d);
        h[k] = C64::new(1.0, 0.0);
        let emb = embed_c(dd, &h, degree, tol);
        for (j, lvl) in emb.levels.iter().enumerate() {
            for (i, &x) in lvl.iter().enumerate() {
                c_cols.set(j * rs + i, k, x);
            }
        }
    }
    let q_c = orthonormal_columns(&c_cols, tol.rank_eps);

    // Orthonormal basis of the multiplier range.
    let r = dd.dim_defect();
    let mut theta_cols = ComplexMatrix::zeros(ambient_dim, multiplier_levels * r);
    for shift in 0..multiplier_levels {
        for col in 0..r {
            for j in shift..degree {
                let block = cf.coeff(j - shift);
                for i in 0..rs {
                    theta_cols.set(j * rs + i, shift * r + col, block.at(i, col));
                }
            }
        }
    }
    let q_theta = orthonormal_columns(&theta_cols, tol.rank_eps);

    // Restricted block of (I - Q_c Q_c^H) - Q_t Q_t^H.
    let low = restricted_levels * rs;
    let qc_top = ComplexMatrix::from_fn(low, q_c.cols(), |i, j| q_c.at(i, j));
    let qt_top = ComplexMatrix::from_fn(low, q_theta.cols(), |i, j| q_theta.at(i, j));
    let qc_part = qc_top.matmul(&qc_top.adjoint());
    let qt_part = qt_top.matmul(&qt_top.adjoint());
    let mut block = ComplexMatrix::zeros(low, low);
    for i in 0..low {
        for j in 0..low {
            let eye = if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            block.set(i, j, eye - qc_part.at(i, j) - qt_part.at(i, j));
        }
    }
    let residual = hermitian_spectral_norm(&block)?;
    let tail_bound = if rho < 1e-12 {
        0.0
    } else {
        rho.powi(pad.saturating_sub(d + 1) as i32) / (1.0 - rho)
    };
    Ok(BeurlingReport {
        residual,
        restricted_levels,
        degree,
        multiplier_levels,
        tail_bound,
    })
}

/// Shift on star-defect coefficient sequences (multiplication by z).
pub fn shift_levels(levels: &[Vec<C64>], dim: usize) -> Vec<Vec<C64>> {
    let mut out = Vec::with_capacity(levels.len());
    out.push(zero_vec(dim));
    for lvl in &levels[..levels.len().saturating_sub(1)] {
        out.push(lvl.clone());
    }
    out
}

pub fn levels_norm(levels: &[Vec<C64>]) -> f64 {
    levels
        .iter()
        .map(|l| l.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

pub fn levels_distance(a: &[Vec<C64>], b: &[Vec<C64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| vec_norm(&vec_sub(x, y)).powi(2))
        .sum::<f64>()
        .sqrt()
}
