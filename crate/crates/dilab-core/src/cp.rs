//! Discrete-time unital completely positive maps in Kraus form, their
//! Schrodinger preduals, fixed-point spaces, absorbing vector states, and
//! the equivalence of absorption with ergodicity.

use rand_core::RngCore;
use thiserror::Error;

use crate::contraction::random_unitary;
use crate::numeric::matrix::{vec_norm, ComplexMatrix, C64};
use crate::numeric::spectral::{
    eigenvalues, hermitian_eigen, hermitian_spectral_norm, hermitian_trace_norm, kernel_basis,
};
use crate::numeric::{NumericError, Tolerance};

#[derive(Debug, Error)]
pub enum CpError {
    #[error("Kraus operators do not sum to the identity: defect {defect:.3e}")]
    NotUnital { defect: f64 },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("vector state is not invariant: defect {defect:.3e}")]
    NotInvariant { defect: f64 },
    #[error("absorption and ergodicity verdicts disagree: {detail}")]
    EquivalenceViolation { detail: String },
    #[error("not a density matrix: {reason}")]
    NotDensity { reason: String },
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Unital completely positive map `x -> sum A_i* x A_i` with Schrodinger
/// predual `rho -> sum A_i rho A_i*`.
#[derive(Debug, Clone)]
pub struct KrausMap {
    ops: Vec<ComplexMatrix>,
    dim: usize,
}

impl KrausMap {
    pub fn new(ops: Vec<ComplexMatrix>, tol: &Tolerance) -> Result<Self, CpError> {
        if ops.is_empty() {
            return Err(CpError::DimensionMismatch {
                context: "need at least one Kraus operator".into(),
            });
        }
        let dim = ops[0].rows();
        for (i, a) in ops.iter().enumerate() {
            if !a.is_square() || a.rows() != dim {
                return Err(CpError::DimensionMismatch {
                    context: format!(
                        "operator {i} is {}x{}, expected {dim}x{dim}",
                        a.rows(),
                        a.cols()
                    ),
                });
            }
        }
        let mut gram = ComplexMatrix::zeros(dim, dim);
        for a in &ops {
            gram = &gram + &a.adjoint().matmul(a);
        }
        let defect = hermitian_spectral_norm(&(&gram - &ComplexMatrix::identity(dim)))?;
        if defect > tol.residual_eps {
            return Err(CpError::NotUnital { defect });
        }
        Ok(KrausMap { ops, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    /// Matrix of the Heisenberg action on column-major vectorized inputs.
    pub fn heisenberg_matrix(&self) -> ComplexMatrix {
        let d2 = self.dim * self.dim;
        let mut m = ComplexMatrix::zeros(d2, d2);
        for a in &self.ops {
            m = &m + &a.transpose().kron(&a.adjoint());
        }
        m
    }

    /// Matrix of the Schrodinger action on column-major vectorized inputs.
    pub fn schrodinger_matrix(&self) -> ComplexMatrix {
        let d2 = self.dim * self.dim;
        let mut m = ComplexMatrix::zeros(d2, d2);
        for a in &self.ops {
            m = &m + &a.conj().kron(a);
        }
        m
    }
}

pub fn apply_heisenberg(z: &KrausMap, x: &ComplexMatrix) -> Result<ComplexMatrix, CpError> {
    if x.rows() != z.dim || x.cols() != z.dim {
        return Err(CpError::DimensionMismatch {
            context: format!(
                "observable is {}x{}, map dimension {}",
                x.rows(),
                x.cols(),
                z.dim
            ),
        });
    }
    let mut out = ComplexMatrix::zeros(z.dim, z.dim);
    for a in &z.ops {
        out = &out + &a.adjoint().matmul(x).matmul(a);
    }
    Ok(out)
}

/// Hermitian, positive semidefinite, trace-one state.
#[derive(Debug, Clone)]
pub struct DensityState {
    rho: ComplexMatrix,
}

impl DensityState {
    pub fn new(rho: ComplexMatrix, tol: &Tolerance) -> Result<Self, CpError> {
        if !rho.is_square() {
            return Err(CpError::NotDensity {
                reason: "not square".into(),
            });
        }
        let herm = hermitian_spectral_norm(&(&rho - &rho.adjoint()))?;
        if herm > tol.residual_eps {
            return Err(CpError::NotDensity {
                reason: format!("Hermitian deviation {herm:.3e}"),
            });
        }
        let tr = rho.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol.residual_eps {
            return Err(CpError::NotDensity {
                reason: format!("trace {tr}"),
            });
        }
        let eig = hermitian_eigen(&rho)?;
        if let Some(&min) = eig.values.last() {
            if min < -tol.rank_eps {
                return Err(CpError::NotDensity {
                    reason: format!("eigenvalue {min:.3e}"),
                });
            }
        }
        Ok(DensityState { rho })
    }

    pub fn pure(v: &[C64]) -> Self {
        let n = vec_norm(v);
        assert!(n > 0.0, "pure state from the zero vector");
        let d = v.len();
        let rho = ComplexMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj() / (n * n));
        DensityState { rho }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        let rho = ComplexMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0));
        DensityState { rho }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }
}

pub fn apply_schrodinger(z: &KrausMap, rho: &DensityState) -> Result<DensityState, CpError> {
    let m = rho.matrix();
    if m.rows() != z.dim {
        return Err(CpError::DimensionMismatch {
            context: format!(
                "state is {}x{}, map dimension {}",
                m.rows(),
                m.cols(),
                z.dim
            ),
        });
    }
    let mut out = ComplexMatrix::zeros(z.dim, z.dim);
    for a in &z.ops {
        out = &out + &a.matmul(m).matmul(&a.adjoint());
    }
    Ok(DensityState { rho: out })
}

/// Orthonormal (Frobenius) basis of the fixed-point space `{x : Z(x) = x}`,
/// read off the numerical kernel of the vectorized action minus the
/// identity.
pub fn fixed_point_space(z: &KrausMap, tol: &Tolerance) -> Result<Vec<ComplexMatrix>, CpError> {
    let d = z.dim;
    let m = z.heisenberg_matrix();
    let shifted = &m - &ComplexMatrix::identity(d * d);
    // The kernel is read through singular values of a non-normal matrix;
    // widen the eigenvalue window slightly.
    let window = Tolerance {
        rank_eps: (10.0 * tol.rank_eps).min(0.5),
        residual_eps: tol.residual_eps,
    };
    let kernel = kernel_basis(&shifted, &window);
    let mut basis = Vec::with_capacity(kernel.cols());
    for k in 0..kernel.cols() {
        let col = kernel.column(k);
        // Column-major unvectorization.
        let x = ComplexMatrix::from_fn(d, d, |i, j| col[j * d + i]);
        basis.push(x);
    }
    Ok(basis)
}

/// Second-largest modulus among the vectorized-action eigenvalues; the
/// largest is 1 for a unital map.
pub fn second_eigenvalue_modulus(z: &KrausMap) -> Result<f64, CpError> {
    let ev = eigenvalues(&z.heisenberg_matrix())?;
    Ok(if ev.len() > 1 { ev[1].norm() } else { 0.0 })
}

/// Iteration budget tied to the spectral gap: the floor `10 ceil(1/(1-r2))`
/// extended so that `r2^n` can actually undercut the absorption threshold.
/// Returns `(n_max, r2, indeterminate)`; the flag is raised when the gap is
/// below 1e-3 and classification would be guesswork.
pub fn default_n_max(z: &KrausMap, absorb_tol: f64) -> Result<(usize, f64, bool), CpError> {
    let r2 = second_eigenvalue_modulus(z)?;
    let gap = 1.0 - r2;
    if gap < 1e-3 {
        return Ok((20_000, r2, true));
    }
    let floor = 10.0 * (1.0 / gap).ceil();
    let reach = if r2 > 1e-6 {
        ((absorb_tol / 16.0).ln() / r2.ln()).ceil()
    } else {
        0.0
    };
    Ok(((floor.max(reach) as usize).clamp(10, 20_000), r2, false))
}

fn probe_states(d: usize) -> Vec<DensityState> {
    let mut probes = vec![DensityState::maximally_mixed(d)];
    for a in 0..d {
        let mut v = vec![C64::new(0.0, 0.0); d];
        v[a] = C64::new(1.0, 0.0);
        probes.push(DensityState::pure(&v));
        for b in (a + 1)..d {
            let mut vp = vec![C64::new(0.0, 0.0); d];
            vp[a] = C64::new(1.0, 0.0);
            vp[b] = C64::new(1.0, 0.0);
            probes.push(DensityState::pure(&vp));
            let mut vi = vec![C64::new(0.0, 0.0); d];
            vi[a] = C64::new(1.0, 0.0);
            vi[b] = C64::new(0.0, 1.0);
            probes.push(DensityState::pure(&vi));
        }
    }
    probes
}

fn invariance_defect(z: &KrausMap, delta: &[C64]) -> Result<f64, CpError> {
    let state = DensityState::pure(delta);
    let image = apply_schrodinger(z, &state)?;
    Ok(hermitian_spectral_norm(&(image.matrix() - state.matrix()))?)
}

/// Absorption test: iterates the predual from a spanning probe set
/// (matrix-unit states plus the maximally mixed state) and reports the worst
/// trace-norm distance curve to the target vector state. Errors out when
/// the target state is not invariant.
pub fn absorbing_check(
    z: &KrausMap,
    delta: &[C64],
    n_max: usize,
    absorb_tol: f64,
    tol: &Tolerance,
) -> Result<(bool, Vec<f64>), CpError> {
    if delta.len() != z.dim {
        return Err(CpError::DimensionMismatch {
            context: format!(
                "vector has length {}, map dimension {}",
                delta.len(),
                z.dim
            ),
        });
    }
    let defect = invariance_defect(z, delta)?;
    if defect > 10.0 * tol.residual_eps {
        return Err(CpError::NotInvariant { defect });
    }
    let target = DensityState::pure(delta);
    let mut probes = probe_states(z.dim);
    let mut curve = Vec::with_capacity(n_max.min(4096));
    for _ in 0..n_max {
        let mut worst = 0.0f64;
        for p in probes.iter_mut() {
            *p = apply_schrodinger(z, p)?;
            let dist = hermitian_trace_norm(&(p.matrix() - target.matrix()))?;
            worst = worst.max(dist);
        }
        curve.push(worst);
        if worst < absorb_tol * 1e-3 {
            break;
        }
    }
    let absorbing = curve.last().is_some_and(|&w| w < absorb_tol);
    Ok((absorbing, curve))
}

/// Joint ergodicity / absorption verdict with the order-monotonicity and
/// limit checks that connect the two.
#[derive(Debug, Clone)]
pub struct ErgodicityReport {
    pub fixed_space_dim: usize,
    pub fixed_space_basis: Vec<ComplexMatrix>,
    pub is_ergodic: bool,
    pub invariant_vector: Option<Vec<C64>>,
    pub is_absorbing: bool,
    pub convergence_curve: Vec<f64>,
    pub second_modulus: f64,
    pub n_max_used: usize,
    /// Spectral gap too small to classify; verdicts are reported but the
    /// agreement assertion is skipped.
    pub indeterminate: bool,
    /// Most negative eigenvalue observed across successive differences of
    /// `Z^n(|delta><delta|)`; within `-rank_eps` of zero when the order
    /// monotonicity holds.
    pub monotone_slack: f64,
    /// `||Z^n(|delta><delta|) - I||` at the end of the iteration.
    pub limit_identity_gap: f64,
}

pub fn equivalence_report(
    z: &KrausMap,
    delta: &[C64],
    n_max: Option<usize>,
    absorb_tol: f64,
    tol: &Tolerance,
) -> Result<ErgodicityReport, CpError> {
    let defect = invariance_defect(z, delta)?;
    if defect > 10.0 * tol.residual_eps {
        return Err(CpError::NotInvariant { defect });
    }
    let basis = fixed_point_space(z, tol)?;
    let fixed_space_dim = basis.len();
    let is_ergodic = fixed_space_dim == 1;

    let (auto_n, r2, gap_starved) = default_n_max(z, absorb_tol)?;
    // A degenerate fixed space certifies non-ergodicity exactly, gap or no
    // gap; only trivial-fixed-space instances with a vanishing gap are
    // genuinely unclassifiable at finite n.
    let indeterminate = gap_starved && fixed_space_dim == 1;
    let n_used = n_max.unwrap_or(if fixed_space_dim >= 2 {
        auto_n.min(500)
    } else {
        auto_n
    });
    let (is_absorbing, convergence_curve) = absorbing_check(z, delta, n_used, absorb_tol, tol)?;

    // The projection onto the invariant vector is nondecreasing under the
    // Heisenberg iteration; ergodicity forces its limit to be the identity.
    let proj = DensityState::pure(delta).matrix().clone();
    let mut current = proj;
    let mut monotone_slack = 0.0f64;
    let monotone_steps = n_used.min(300);
    for _ in 0..monotone_steps {
        let next = apply_heisenberg(z, &current)?;
        let diff = (&next - &current).hermitize();
        let eig = hermitian_eigen(&diff)?;
        if let Some(&min) = eig.values.last() {
            monotone_slack = monotone_slack.min(min);
        }
        current = next;
    }
    for _ in monotone_steps..n_used {
        current = apply_heisenberg(z, &current)?;
    }
    let limit_identity_gap =
        hermitian_spectral_norm(&(&current - &ComplexMatrix::identity(z.dim)))?;

    if !indeterminate && is_ergodic != is_absorbing {
        return Err(CpError::EquivalenceViolation {
            detail: format!(
                "ergodic {is_ergodic} vs absorbing {is_absorbing} (gap {:.3e}, n {n_used})",
                1.0 - r2
            ),
        });
    }

    Ok(ErgodicityReport {
        fixed_space_dim,
        fixed_space_basis: basis,
        is_ergodic,
        invariant_vector: Some(delta.to_vec()),
        is_absorbing,
        convergence_curve,
        second_modulus: r2,
        n_max_used: n_used,
        indeterminate,
        monotone_slack,
        limit_identity_gap,
    })
}

// ---- canonical instances -------------------------------------------------

/// Amplitude-damping Kraus pair with decay probability `lambda`.
pub fn amplitude_damping_kraus(lambda: f64, tol: &Tolerance) -> KrausMap {
    let a0 = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, (1.0 - lambda).sqrt()]]);
    let a1 = ComplexMatrix::from_real_rows(&[vec![0.0, -lambda.sqrt()], vec![0.0, 0.0]]);
    KrausMap::new(vec![a0, a1], tol).expect("amplitude damping is unital")
}

/// Heisenberg conjugation by a unitary: `x -> u* x u`.
pub fn unitary_conjugation_kraus(u: &ComplexMatrix, tol: &Tolerance) -> Result<KrausMap, CpError> {
    KrausMap::new(vec![u.clone()], tol)
}

/// Random unitary on `C^d (x) C^m` fixing the vector `e_0 (x) e_0`; its
/// interaction Kraus family has `e_0` as an invariant vector state.
pub fn random_fixing_unitary(rng: &mut dyn RngCore, d: usize, m: usize) -> ComplexMatrix {
    let total = d * m;
    if total == 1 {
        return ComplexMatrix::identity(1);
    }
    let v = random_unitary(rng, total - 1);
    let mut u = ComplexMatrix::zeros(total, total);
    u.set(0, 0, C64::new(1.0, 0.0));
    for i in 0..total - 1 {
        for j in 0..total - 1 {
            u.set(i + 1, j + 1, v.at(i, j));
        }
    }
    u
}

/// Kraus family of the vacuum compression of a unitary interaction on
/// `C^d (x) C^m`: `B_i = (I (x) <e_i|) u* (I (x) |e_0>)`, with basis order
/// `(h, slot) -> h*m + slot`.
pub fn kraus_from_interaction(
    u: &ComplexMatrix,
    d: usize,
    m: usize,
    tol: &Tolerance,
) -> Result<KrausMap, CpError> {
    if u.rows() != d * m || !u.is_square() {
        return Err(CpError::DimensionMismatch {
            context: format!(
                "interaction is {}x{}, expected {}",
                u.rows(),
                u.cols(),
                d * m
            ),
        });
    }
    let mut ops = Vec::with_capacity(m);
    for i in 0..m {
        let b = ComplexMatrix::from_fn(d, d, |a, bcol| u.at(bcol * m, a * m + i).conj());
        ops.push(b);
    }
    KrausMap::new(ops, tol)
}

/// Random unital CP map with `e_0` invariant: vacuum compression of a
/// fixing interaction with `n_kraus` environment levels.
pub fn random_invariant_kraus(
    rng: &mut dyn RngCore,
    d: usize,
    n_kraus: usize,
    tol: &Tolerance,
) -> KrausMap {
    let u = random_fixing_unitary(rng, d, n_kraus);
    kraus_from_interaction(&u, d, n_kraus, tol).expect("compression of a unitary is unital")
}
