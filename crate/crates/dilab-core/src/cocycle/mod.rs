//! Adapted unitary cocycles on a toy Fock space: a single interaction
//! unitary `u` on `H (x) C^m` generates `u_n = u_[1] ... u_[n]` on
//! `H (x) (C^m)^{(x) N}`, where `u_[j]` couples `H` to slot `j`. The module
//! builds the vacuum compression (a unital CP map), extracts the vacuum
//! unit, re-points it by a gauge rotation, certifies strong convergence of
//! the adjoint products, and tests exactness and the Beurling-type
//! decomposition clauses.

pub mod dense;
pub mod transfer;

use rand_core::RngCore;
use thiserror::Error;

use crate::cp::{
    self, apply_heisenberg, equivalence_report, kraus_from_interaction, CpError, ErgodicityReport,
    KrausMap,
};
use crate::numeric::matrix::{basis_vec, vec_norm, ComplexMatrix, C64};
use crate::numeric::spectral::{hermitian_eigen, kernel_basis, unitarity_defect};
use crate::numeric::{NumericError, Tolerance};
use dense::{apply_adjoint_cocycle_product, apply_cocycle_product, dense_dim, DenseState};
use transfer::{
    cauchy_overlap, exactness_overlap, limit_coefficient, plain_overlap, q_overlap, KrausFamilies,
    Probe,
};

#[derive(Debug, Error)]
pub enum CocycleError {
    #[error("step count {n} exceeds the horizon {horizon}")]
    HorizonExceeded { n: usize, horizon: usize },
    #[error("interaction is not unitary: defect {defect:.3e}")]
    NotUnitary { defect: f64 },
    #[error("distinguished vector is not invariant for the compression: defect {defect:.3e}")]
    NoInvariantVector { defect: f64 },
    #[error("adjoint image of delta (x) vacuum is not a product vector: defect {defect:.3e}")]
    NotProductForm { defect: f64 },
    #[error("cocycle does not fix delta (x) vacuum: defect {defect:.3e}")]
    NotVacuumFixing { defect: f64 },
    #[error("limit action is not isometric on the probe span: defect {defect:.3e}")]
    NotIsometric { defect: f64 },
    #[error("adjoint products show no convergence: defect {defect:.3e}")]
    NotConvergent { defect: f64 },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("compression fails the semigroup identity: residual {residual:.3e}")]
    SemigroupCheck { residual: f64 },
    #[error(transparent)]
    Cp(#[from] CpError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Slot structure of the toy Fock space: local dimension `m` with level 0
/// the vacuum, and `n_slots` tensor factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToyFockSpace {
    pub m: usize,
    pub n_slots: usize,
}

impl ToyFockSpace {
    pub fn new(m: usize, n_slots: usize) -> Self {
        assert!(m >= 2 && n_slots >= 1);
        ToyFockSpace { m, n_slots }
    }
}

/// Locally generated adapted cocycle: the interaction `u` on `H (x) C^m`
/// (basis order `(h, level) -> h*m + level`), the horizon, and the
/// distinguished unit vector in `H`.
#[derive(Debug, Clone)]
pub struct ToyCocycle {
    pub d_h: usize,
    pub fock: ToyFockSpace,
    pub u: ComplexMatrix,
    pub delta: Vec<C64>,
}

impl ToyCocycle {
    pub fn new(
        u: ComplexMatrix,
        d_h: usize,
        fock: ToyFockSpace,
        delta: Vec<C64>,
        tol: &Tolerance,
    ) -> Result<Self, CocycleError> {
        if u.rows() != d_h * fock.m || !u.is_square() {
            return Err(CocycleError::DimensionMismatch {
                context: format!(
                    "interaction is {}x{}, expected {}",
                    u.rows(),
                    u.cols(),
                    d_h * fock.m
                ),
            });
        }
        if delta.len() != d_h {
            return Err(CocycleError::DimensionMismatch {
                context: format!("delta has length {}, expected {d_h}", delta.len()),
            });
        }
        let defect = unitarity_defect(&u)?;
        if defect > tol.residual_eps {
            return Err(CocycleError::NotUnitary { defect });
        }
        let dn = vec_norm(&delta);
        if (dn - 1.0).abs() > tol.residual_eps {
            return Err(CocycleError::DimensionMismatch {
                context: format!("delta has norm {dn}, expected a unit vector"),
            });
        }
        Ok(ToyCocycle {
            d_h,
            fock,
            u,
            delta,
        })
    }

    pub fn dense_dim(&self) -> usize {
        dense_dim(self.d_h, self.fock.m, self.fock.n_slots)
    }

    /// Same generator and distinguished vector on a shorter horizon.
    pub fn with_horizon(&self, n_slots: usize) -> ToyCocycle {
        ToyCocycle {
            d_h: self.d_h,
            fock: ToyFockSpace::new(self.fock.m, n_slots),
            u: self.u.clone(),
            delta: self.delta.clone(),
        }
    }

    fn families(&self) -> KrausFamilies {
        KrausFamilies::from_interaction(&self.u, self.d_h, self.fock.m)
    }

    /// Largest dense horizon within the amplitude budget, at least
    /// `min_slots`.
    pub fn dense_horizon(&self, min_slots: usize, budget: usize) -> usize {
        let mut n = min_slots.max(1);
        while n < self.fock.n_slots && dense_dim(self.d_h, self.fock.m, n + 1) <= budget {
            n += 1;
        }
        n.min(self.fock.n_slots)
    }
}

/// Applies `u_n = u_[1] ... u_[n]` to a dense vector on
/// `H (x) (C^m)^{(x) N}` (slot-n gate first).
pub fn cocycle_apply(c: &ToyCocycle, n: usize, vec: &[C64]) -> Result<Vec<C64>, CocycleError> {
    if n > c.fock.n_slots {
        return Err(CocycleError::HorizonExceeded {
            n,
            horizon: c.fock.n_slots,
        });
    }
    if vec.len() != c.dense_dim() {
        return Err(CocycleError::DimensionMismatch {
            context: format!("vector length {}, expected {}", vec.len(), c.dense_dim()),
        });
    }
    let state = DenseState {
        d: c.d_h,
        m: c.fock.m,
        n_slots: c.fock.n_slots,
        data: vec.to_vec(),
    };
    Ok(apply_cocycle_product(&state, &c.u, n).data)
}

/// Adjoint products `u*_n` on dense vectors (slot-1 gate first).
pub fn adjoint_cocycle_apply(
    c: &ToyCocycle,
    n: usize,
    vec: &[C64],
) -> Result<Vec<C64>, CocycleError> {
    if n > c.fock.n_slots {
        return Err(CocycleError::HorizonExceeded {
            n,
            horizon: c.fock.n_slots,
        });
    }
    let state = DenseState {
        d: c.d_h,
        m: c.fock.m,
        n_slots: c.fock.n_slots,
        data: vec.to_vec(),
    };
    Ok(apply_adjoint_cocycle_product(&state, &c.u, n).data)
}

fn probe_states_for(c: &ToyCocycle, extra_slots: &[usize]) -> Vec<DenseState> {
    let mut probes = Vec::new();
    for a in 0..c.d_h {
        probes.push(DenseState::product(
            c.d_h,
            c.fock.m,
            c.fock.n_slots,
            &basis_vec(c.d_h, a),
            &[],
        ));
        for &slot in extra_slots {
            for level in 1..c.fock.m {
                probes.push(DenseState::product(
                    c.d_h,
                    c.fock.m,
                    c.fock.n_slots,
                    &basis_vec(c.d_h, a),
                    &[(slot, level)],
                ));
            }
        }
    }
    probes
}

/// Measures how far `u_n` is from commuting with observables localized in
/// slots `n+1 ..`: the maximum of
/// `||u_n gamma_n(y) psi - gamma_n(y) u_n psi||` over matrix-unit
/// observables `y` on slot `n+1` and a spanning probe family. Zero up to
/// rounding for locally generated cocycles.
pub fn adaptedness_residual(c: &ToyCocycle, n: usize) -> Result<f64, CocycleError> {
    if n + 1 > c.fock.n_slots {
        return Err(CocycleError::HorizonExceeded {
            n: n + 1,
            horizon: c.fock.n_slots,
        });
    }
    let work = c.with_horizon(c.dense_horizon(n + 1, 1 << 16));
    let m = work.fock.m;
    let probes = probe_states_for(&work, &[1, n + 1]);
    let mut worst = 0.0f64;
    for p in 0..m {
        for q in 0..m {
            let mut y = ComplexMatrix::zeros(m, m);
            y.set(p, q, C64::new(1.0, 0.0));
            for psi in &probes {
                let lhs = apply_cocycle_product(&psi.fock_local_op(&y, n + 1), &work.u, n);
                let rhs = apply_cocycle_product(psi, &work.u, n).fock_local_op(&y, n + 1);
                worst = worst.max(lhs.distance(&rhs));
            }
        }
    }
    Ok(worst)
}

/// Residual of the restriction clause: `alpha_n(1 (x) y) = 1 (x) gamma_n(y)`
/// on the probe family, with `alpha_n(x) = u_n sigma_n(x) u*_n`. Equivalent
/// to adaptedness for locally generated cocycles.
pub fn restriction_residual(c: &ToyCocycle, n: usize) -> Result<f64, CocycleError> {
    if n + 1 > c.fock.n_slots {
        return Err(CocycleError::HorizonExceeded {
            n: n + 1,
            horizon: c.fock.n_slots,
        });
    }
    let work = c.with_horizon(c.dense_horizon(n + 1, 1 << 16));
    let m = work.fock.m;
    let probes = probe_states_for(&work, &[1, n + 1]);
    let mut worst = 0.0f64;
    for p in 0..m {
        for q in 0..m {
            let mut y = ComplexMatrix::zeros(m, m);
            y.set(p, q, C64::new(1.0, 0.0));
            for psi in &probes {
                let pulled = apply_adjoint_cocycle_product(psi, &work.u, n);
                let acted = pulled.fock_local_op(&y, n + 1);
                let lhs = apply_cocycle_product(&acted, &work.u, n);
                let rhs = psi.fock_local_op(&y, n + 1);
                worst = worst.max(lhs.distance(&rhs));
            }
        }
    }
    Ok(worst)
}

/// Vacuum compression of the cocycle: the unital CP map
/// `Z(x) = (I (x) <e_0|) u (x (x) I) u* (I (x) |e_0>)` in Kraus form, with
/// the two-step semigroup identity `Z_2 = Z^2` verified densely.
pub fn compress_z(c: &ToyCocycle, tol: &Tolerance) -> Result<KrausMap, CocycleError> {
    let z = kraus_from_interaction(&c.u, c.d_h, c.fock.m, tol)?;
    if c.fock.n_slots >= 2 {
        let residual = z_consistency_residual(c, 2, tol)?;
        if residual > 100.0 * tol.residual_eps {
            return Err(CocycleError::SemigroupCheck { residual });
        }
    }
    Ok(z)
}

/// `max_x || Z^n(x) - (I (x) <vac|) u_n (x (x) I) u*_n (I (x) |vac>) ||`
/// over matrix units, computed densely on an `n`-slot horizon.
pub fn z_consistency_residual(
    c: &ToyCocycle,
    n: usize,
    tol: &Tolerance,
) -> Result<f64, CocycleError> {
    if n > c.fock.n_slots {
        return Err(CocycleError::HorizonExceeded {
            n,
            horizon: c.fock.n_slots,
        });
    }
    let z = kraus_from_interaction(&c.u, c.d_h, c.fock.m, tol)?;
    let d = c.d_h;
    let work = c.with_horizon(n);
    let fock_size = work.fock.m.pow(n as u32);
    let mut worst = 0.0f64;
    for p in 0..d {
        for q in 0..d {
            let mut x = ComplexMatrix::zeros(d, d);
            x.set(p, q, C64::new(1.0, 0.0));
            let mut iterated = x.clone();
            for _ in 0..n {
                iterated = apply_heisenberg(&z, &iterated)?;
            }
            // Direct compression: column b of the compressed operator is
            // (I (x) <vac|) u_n (x (x) I) u*_n (b (x) vac).
            let mut direct = ComplexMatrix::zeros(d, d);
            for b in 0..d {
                let basis = DenseState::product(d, work.fock.m, n, &basis_vec(d, b), &[]);
                let pulled = apply_adjoint_cocycle_product(&basis, &work.u, n);
                let mut acted = DenseState::zero(d, work.fock.m, n);
                // x (x) I acts on the H leg only.
                for idx in 0..pulled.data.len() {
                    let h = idx / fock_size;
                    let rest = idx % fock_size;
                    if x.at(p, q).norm_sqr() != 0.0 && h == q {
                        acted.data[p * fock_size + rest] += x.at(p, q) * pulled.data[idx];
                    }
                }
                let pushed = apply_cocycle_product(&acted, &work.u, n);
                for a in 0..d {
                    direct.set(a, b, pushed.data[a * fock_size]);
                }
            }
            worst = worst.max((&iterated - &direct).frobenius_norm());
        }
    }
    Ok(worst)
}

/// Extracts the vacuum unit: `u*(delta (x) e_0) = delta (x) omega_hat`,
/// after checking that the distinguished vector state is invariant for the
/// compression. The product factorization of the multi-step vacuum unit is
/// spot-verified at two steps.
pub fn vacuum_unit(c: &ToyCocycle, tol: &Tolerance) -> Result<Vec<C64>, CocycleError> {
    let z = kraus_from_interaction(&c.u, c.d_h, c.fock.m, tol)?;
    let state = cp::DensityState::pure(&c.delta);
    let image = cp::apply_schrodinger(&z, &state)?;
    let inv_defect = (image.matrix() - state.matrix()).frobenius_norm();
    if inv_defect > 10.0 * tol.residual_eps {
        return Err(CocycleError::NoInvariantVector { defect: inv_defect });
    }

    let m = c.fock.m;
    let one = DenseState::product(c.d_h, m, 1, &c.delta, &[]);
    let pulled = apply_adjoint_cocycle_product(&one, &c.u, 1);
    // omega = (<delta| (x) I) u*(delta (x) e_0)
    let omega = pulled.h_compress(&c.delta);
    let product = DenseState {
        d: c.d_h,
        m,
        n_slots: 1,
        data: {
            let mut data = vec![C64::new(0.0, 0.0); c.d_h * m];
            for (a, &da) in c.delta.iter().enumerate() {
                for (i, &oi) in omega.iter().enumerate() {
                    data[a * m + i] = da * oi;
                }
            }
            data
        },
    };
    let defect = pulled.distance(&product);
    if defect > 10.0 * tol.residual_eps {
        return Err(CocycleError::NotProductForm { defect });
    }
    let norm = vec_norm(&omega);
    let omega: Vec<C64> = omega.iter().map(|z| z / norm).collect();

    // Two-step factorization: u*_2 (delta (x) vac) = delta (x) omega (x) omega.
    if c.fock.n_slots >= 2 {
        let two = DenseState::product(c.d_h, m, 2, &c.delta, &[]);
        let pulled2 = apply_adjoint_cocycle_product(&two, &c.with_horizon(2).u, 2);
        let mut expect = DenseState::zero(c.d_h, m, 2);
        for (a, &da) in c.delta.iter().enumerate() {
            for i in 0..m {
                for j in 0..m {
                    expect.data[a * m * m + i * m + j] = da * omega[i] * omega[j];
                }
            }
        }
        let fact_defect = pulled2.distance(&expect);
        if fact_defect > 100.0 * tol.residual_eps {
            return Err(CocycleError::NotProductForm {
                defect: fact_defect,
            });
        }
    }
    Ok(omega)
}

/// The gauge-rotated cocycle together with the rotation that produced it.
#[derive(Debug, Clone)]
pub struct GaugeData {
    pub omega_hat: Vec<C64>,
    /// Unitary on the slot space with `v e_0 = omega_hat`, identity on the
    /// orthogonal complement of `span{e_0, omega_hat}`.
    pub gauge: ComplexMatrix,
    pub modified: ToyCocycle,
}

/// Deterministic unitary completion sending `e_0` to `target` (a rotation in
/// the plane they span, the identity elsewhere).
pub fn vacuum_pointing_rotation(target: &[C64], tol: &Tolerance) -> ComplexMatrix {
    let m = target.len();
    let a = target[0];
    let mut g: Vec<C64> = target.to_vec();
    g[0] = C64::new(0.0, 0.0);
    let gamma = vec_norm(&g);
    if gamma <= tol.rank_eps {
        // Already along e_0 up to phase.
        let mut v = ComplexMatrix::identity(m);
        let phase = if a.norm() > 0.0 { a / a.norm() } else { C64::new(1.0, 0.0) };
        v.set(0, 0, phase);
        return v;
    }
    let b2: Vec<C64> = g.iter().map(|z| z / gamma).collect();
    let e0 = basis_vec(m, 0);
    let mut v = ComplexMatrix::identity(m);
    // v = I - |e0><e0| - |b2><b2| + (a e0 + gamma b2)<e0| + (-gamma e0 + conj(a) b2)<b2|
    for i in 0..m {
        for j in 0..m {
            let mut val = v.at(i, j);
            val -= e0[i] * e0[j].conj();
            val -= b2[i] * b2[j].conj();
            val += (a * e0[i] + b2[i] * gamma) * e0[j].conj();
            val += (e0[i] * (-gamma) + b2[i] * a.conj()) * b2[j].conj();
            v.set(i, j, val);
        }
    }
    v
}

/// Re-points the vacuum unit: the modified generator is `u (I (x) v)` where
/// `v e_0 = omega_hat`, so the modified cocycle fixes `delta (x) vacuum`.
pub fn gauge_modify(c: &ToyCocycle, tol: &Tolerance) -> Result<GaugeData, CocycleError> {
    let omega_hat = vacuum_unit(c, tol)?;
    let gauge = vacuum_pointing_rotation(&omega_hat, tol);
    let big = ComplexMatrix::identity(c.d_h).kron(&gauge);
    let u_mod = c.u.matmul(&big);
    let modified = ToyCocycle::new(u_mod, c.d_h, c.fock.clone(), c.delta.clone(), tol)?;
    // Postcondition: the modified adjoint fixes delta (x) e_0.
    let one = DenseState::product(c.d_h, c.fock.m, 1, &c.delta, &[]);
    let pulled = apply_adjoint_cocycle_product(&one, &modified.u, 1);
    let defect = pulled.distance(&one);
    if defect > 100.0 * tol.residual_eps {
        return Err(CocycleError::NotVacuumFixing { defect });
    }
    Ok(GaugeData {
        omega_hat,
        gauge,
        modified,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceVerdict {
    Convergent,
    Inconclusive,
    NotConvergent,
}

/// Certificate produced by [`convergence_analyze`]: distance curves to the
/// target subspace, Cauchy increments of the adjoint products, the q-range
/// defect of the limit action, and the coefficient table of the limit on a
/// local window.
#[derive(Debug, Clone)]
pub struct ConvergenceCertificate {
    pub omega_hat: Vec<C64>,
    pub gauge: ComplexMatrix,
    pub probes: Vec<Probe>,
    /// Worst distance of `u*_n(probe)` to `delta (x) F_{n]}` per step.
    pub delta_curve: Vec<f64>,
    pub per_probe_delta: Vec<Vec<f64>>,
    /// `max_{s, probes} ||(u*_{n+s} - u*_n) v||` per step `n`.
    pub cauchy_max_by_n: Vec<f64>,
    /// Largest violation of the bound `increment <= 2 Delta_n`.
    pub cauchy_bound_violation: f64,
    pub verdict: ConvergenceVerdict,
    /// Largest late-stage Cauchy increment (the convergence defect).
    pub convergence_defect: f64,
    /// `sqrt(lambda_max(I - Q))` on the probe span, `Q` the Gram matrix of
    /// the q-projected limit images: the defect of `w w* = q`.
    pub q_defect: f64,
    /// Deviation of the limit-image Gram matrix from the probe Gram.
    pub isometry_defect: f64,
    /// Largest late forward increment on `delta (x) local` targets; their
    /// orbits stabilize exactly for vacuum-fixing cocycles, certifying that
    /// the target space lies inside the range of the limit.
    pub range_stabilization_defect: f64,
    /// Step used as the converged stand-in for the limit.
    pub stabilization_step: usize,
    /// Rows: local window basis (vacuum, then single excitations);
    /// columns: probes. Entries `<delta (x) basis, w probe>`.
    pub w_hat: ComplexMatrix,
}

/// Certifies convergence of the modified cocycle on the probe span: basis
/// vectors of `H` tensored with the vacuum and with single excitations in
/// slots `1..=j_probe`.
pub fn convergence_analyze(
    g: &GaugeData,
    j_probe: usize,
    cert_tol: f64,
    tol: &Tolerance,
) -> Result<ConvergenceCertificate, CocycleError> {
    let c = &g.modified;
    let n_slots = c.fock.n_slots;
    let m = c.fock.m;
    let d = c.d_h;

    // Vacuum fixing is the precondition for every formula below.
    let one = DenseState::product(d, m, 1, &c.delta, &[]);
    let pulled = apply_adjoint_cocycle_product(&one, &c.u, 1);
    let fix_defect = pulled.distance(&one);
    if fix_defect > 100.0 * tol.residual_eps {
        return Err(CocycleError::NotVacuumFixing { defect: fix_defect });
    }

    let fam = c.families();
    let j_probe = j_probe.min(n_slots.saturating_sub(1)).max(1);
    let mut probes = Vec::new();
    for a in 0..d {
        probes.push(Probe {
            h: basis_vec(d, a),
            excitation: None,
        });
    }
    for slot in 1..=j_probe {
        for level in 1..m {
            for a in 0..d {
                probes.push(Probe {
                    h: basis_vec(d, a),
                    excitation: Some((slot, level)),
                });
            }
        }
    }

    // Distance curves to delta (x) F_{n]}.
    let mut per_probe_delta = Vec::with_capacity(probes.len());
    for p in &probes {
        let mut curve = Vec::with_capacity(n_slots);
        for n in 1..=n_slots {
            let captured = q_overlap(&fam, &c.delta, n, p, p).re;
            curve.push((1.0 - captured).max(0.0).sqrt());
        }
        per_probe_delta.push(curve);
    }
    let delta_curve: Vec<f64> = (0..n_slots)
        .map(|k| {
            per_probe_delta
                .iter()
                .map(|c| c[k])
                .fold(0.0f64, f64::max)
        })
        .collect();

    // Cauchy increments and the 2-Delta bound.
    let mut cauchy_max_by_n = vec![0.0f64; n_slots - 1];
    let mut cauchy_bound_violation: f64 = 0.0;
    for (pi, p) in probes.iter().enumerate() {
        for n in 1..n_slots {
            let mut worst = 0.0f64;
            for s in 1..=(n_slots - n) {
                let ov = cauchy_overlap(&fam, n, s, p).re;
                let inc = (2.0 - 2.0 * ov).max(0.0).sqrt();
                worst = worst.max(inc);
                cauchy_bound_violation =
                    cauchy_bound_violation.max(inc - 2.0 * per_probe_delta[pi][n - 1]);
            }
            cauchy_max_by_n[n - 1] = cauchy_max_by_n[n - 1].max(worst);
        }
    }

    // Convergence verdict from the late increments.
    let burn = (n_slots - (n_slots / 2).min(6)).clamp(1, n_slots - 1);
    let convergence_defect = cauchy_max_by_n[burn - 1..]
        .iter()
        .fold(0.0f64, |a, &b| a.max(b));
    let early = cauchy_max_by_n[..(n_slots / 4).max(1)]
        .iter()
        .fold(0.0f64, |a, &b| a.max(b));
    let verdict = if convergence_defect <= cert_tol {
        ConvergenceVerdict::Convergent
    } else if convergence_defect <= 0.3 * early {
        ConvergenceVerdict::Inconclusive
    } else {
        ConvergenceVerdict::NotConvergent
    };

    // Gram matrices of the limit images at the stabilization step.
    let n_star = n_slots;
    let k = probes.len();
    let mut gram = ComplexMatrix::zeros(k, k);
    let mut q_gram = ComplexMatrix::zeros(k, k);
    for (i, bra) in probes.iter().enumerate() {
        for (j, ket) in probes.iter().enumerate() {
            gram.set(i, j, plain_overlap(&fam, n_star, bra, ket));
            q_gram.set(i, j, q_overlap(&fam, &c.delta, n_star, bra, ket));
        }
    }
    let isometry_defect = (&gram - &ComplexMatrix::identity(k)).frobenius_norm();
    let residual = (&gram - &q_gram).hermitize();
    let eig = hermitian_eigen(&residual)?;
    let q_defect = eig.values.first().map_or(0.0, |&l| l.max(0.0).sqrt());

    // Range side: forward orbits of delta (x) local targets stabilize; the
    // largest late increment certifies it on a dense short horizon.
    let mut range_stabilization_defect = 0.0f64;
    let dense_n = c.dense_horizon(j_probe + 2, 1 << 14).min(n_slots);
    let work = c.with_horizon(dense_n);
    for slot in 1..=j_probe.min(dense_n.saturating_sub(1)) {
        for level in 1..m {
            let target = DenseState::product(d, m, dense_n, &c.delta, &[(slot, level)]);
            let mut prev = apply_cocycle_product(&target, &work.u, slot);
            for kstep in (slot + 1)..=dense_n {
                let next = apply_cocycle_product(&target, &work.u, kstep);
                range_stabilization_defect = range_stabilization_defect.max(next.distance(&prev));
                prev = next;
            }
        }
    }

    // Coefficient table of the limit on the local window.
    let j_win = j_probe;
    let mut rows: Vec<Vec<(usize, usize)>> = vec![vec![]];
    for slot in 1..=j_win {
        for level in 1..m {
            rows.push(vec![(slot, level)]);
        }
    }
    let mut w_hat = ComplexMatrix::zeros(rows.len(), k);
    for (ri, window) in rows.iter().enumerate() {
        for (pj, p) in probes.iter().enumerate() {
            w_hat.set(ri, pj, limit_coefficient(&fam, &c.delta, n_star, window, p));
        }
    }

    Ok(ConvergenceCertificate {
        omega_hat: g.omega_hat.clone(),
        gauge: g.gauge.clone(),
        probes,
        delta_curve,
        per_probe_delta,
        cauchy_max_by_n,
        cauchy_bound_violation,
        verdict,
        convergence_defect,
        q_defect,
        isometry_defect,
        range_stabilization_defect,
        stabilization_step: n_star,
        w_hat,
    })
}

/// Reconstruction residual `||u_n v - w* sigma_n(w) v||` on the probe span,
/// with the limit stand-in `w = u*_{s}` at the largest step fitting the
/// horizon. Requires an isometric, convergent certificate.
pub fn exactness_residual(
    g: &GaugeData,
    cert: &ConvergenceCertificate,
    n: usize,
    tol: &Tolerance,
) -> Result<f64, CocycleError> {
    let c = &g.modified;
    if cert.isometry_defect > 100.0 * tol.residual_eps {
        return Err(CocycleError::NotIsometric {
            defect: cert.isometry_defect,
        });
    }
    if cert.verdict == ConvergenceVerdict::NotConvergent {
        return Err(CocycleError::NotConvergent {
            defect: cert.convergence_defect,
        });
    }
    let n_slots = c.fock.n_slots;
    if n + 2 > n_slots {
        return Err(CocycleError::HorizonExceeded {
            n: n + 2,
            horizon: n_slots,
        });
    }
    let s_star = n_slots - n;
    let fam = c.families();
    let mut worst = 0.0f64;
    for p in &cert.probes {
        let ov = exactness_overlap(&fam, n, s_star, p).re;
        worst = worst.max((2.0 - 2.0 * ov).max(0.0).sqrt());
    }
    Ok(worst)
}

/// Dense small-horizon evaluation of the same reconstruction residual,
/// kept as an independent route for cross-validation.
pub fn exactness_residual_dense(
    c_mod: &ToyCocycle,
    n: usize,
    s_star: usize,
    probes: &[Probe],
) -> Result<f64, CocycleError> {
    let needed = n + s_star;
    if needed > c_mod.fock.n_slots {
        return Err(CocycleError::HorizonExceeded {
            n: needed,
            horizon: c_mod.fock.n_slots,
        });
    }
    let work = c_mod.with_horizon(needed);
    let mut worst = 0.0f64;
    for p in probes {
        let exc: Vec<(usize, usize)> = p.excitation.into_iter().collect();
        if exc.iter().any(|&(s, _)| s > needed) {
            continue;
        }
        let state = DenseState::product(work.d_h, work.fock.m, needed, &p.h, &exc);
        let forward = apply_cocycle_product(&state, &work.u, n);
        let x = apply_adjoint_cocycle_product(&forward, &work.u, s_star);
        let y = apply_adjoint_cocycle_product(&forward, &work.u, n + s_star);
        worst = worst.max(x.distance(&y));
    }
    Ok(worst)
}

/// Verdict and residuals for the Beurling-type decomposition clauses at the
/// horizon, wired through the compression's ergodicity / absorption
/// verdicts.
#[derive(Debug, Clone)]
pub struct BeurlingSummary {
    /// Restriction clause: `alpha_n(1 (x) y) = 1 (x) gamma_n(y)`.
    pub restriction_residual: f64,
    pub restriction_ok: bool,
    /// Conjugacy clause through the certificate: `max(q_defect,
    /// reconstruction residual)`; absent when no certificate was reached.
    pub conjugacy_residual: Option<f64>,
    pub conjugacy_ok: bool,
    pub failure_reason: Option<String>,
    pub verdict: bool,
    pub certificate: Option<ConvergenceCertificate>,
    pub cp_report: Option<ErgodicityReport>,
    /// Dense cross-validation of the transfer-algebra reconstruction
    /// residual at matching small parameters.
    pub dense_cross_gap: Option<f64>,
    /// Second eigenvalue of the recovered invariant density: near zero
    /// certifies a rank-one (vector) invariant state.
    pub invariant_state_rank_gap: Option<f64>,
    /// Overlap of the invariant density's top eigenvector with delta.
    pub invariant_state_alignment: Option<f64>,
}

pub fn beurling_report(
    c: &ToyCocycle,
    n_max: usize,
    cert_tol: f64,
    tol: &Tolerance,
) -> Result<BeurlingSummary, CocycleError> {
    let n_clause = n_max.min(4).min(c.fock.n_slots.saturating_sub(1)).max(1);
    let mut restriction_residual = 0.0f64;
    for n in 1..=n_clause {
        restriction_residual = restriction_residual.max(restriction_residual_step(c, n)?);
    }
    let restriction_ok = restriction_residual <= 100.0 * tol.residual_eps;

    let z = compress_z(c, tol)?;
    let cp_report = match equivalence_report(&z, &c.delta, None, cert_tol, tol) {
        Ok(rep) => Some(rep),
        Err(CpError::NotInvariant { .. }) => None,
        Err(e) => return Err(e.into()),
    };

    // Invariant-density recovery: the kernel of the Schrodinger action
    // minus the identity, certified rank one exactly when the joint
    // invariant vector is a product.
    let (mut rank_gap, mut alignment) = (None, None);
    {
        let d = z.dim();
        let shifted = &z.schrodinger_matrix() - &ComplexMatrix::identity(d * d);
        let window = Tolerance {
            rank_eps: (10.0 * tol.rank_eps).min(0.5),
            residual_eps: tol.residual_eps,
        };
        let kernel = kernel_basis(&shifted, &window);
        if kernel.cols() == 1 {
            let col = kernel.column(0);
            let mut rho = ComplexMatrix::from_fn(d, d, |i, j| col[j * d + i]);
            rho = rho.hermitize();
            let tr = rho.trace();
            if tr.norm() > tol.rank_eps {
                rho = rho.scale(C64::new(1.0, 0.0) / tr);
                let eig = hermitian_eigen(&rho)?;
                rank_gap = eig.values.get(1).map(|&l| l.abs());
                let top = eig.vectors.column(0);
                let overlap: C64 = c
                    .delta
                    .iter()
                    .zip(top.iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                alignment = Some(overlap.norm());
            }
        }
    }

    let gauge = match gauge_modify(c, tol) {
        Ok(g) => g,
        Err(e @ (CocycleError::NoInvariantVector { .. } | CocycleError::NotProductForm { .. })) => {
            return Ok(BeurlingSummary {
                restriction_residual,
                restriction_ok,
                conjugacy_residual: None,
                conjugacy_ok: false,
                failure_reason: Some(format!("no vacuum unit: {e}")),
                verdict: false,
                certificate: None,
                cp_report,
                dense_cross_gap: None,
                invariant_state_rank_gap: rank_gap,
                invariant_state_alignment: alignment,
            });
        }
        Err(e) => return Err(e),
    };

    let cert = convergence_analyze(&gauge, 3, cert_tol, tol)?;

    let mut conjugacy_residual = cert.q_defect;
    let mut failure_reason = None;
    let mut dense_cross_gap = None;
    if cert.verdict == ConvergenceVerdict::Convergent {
        let n_exact = n_max.min(5).min(c.fock.n_slots.saturating_sub(2)).max(1);
        for n in 1..=n_exact {
            conjugacy_residual =
                conjugacy_residual.max(exactness_residual(&gauge, &cert, n, tol)?);
        }
        // Cross-validate the transfer formula densely at small parameters.
        let small_n = 2usize;
        let small_s = gauge
            .modified
            .dense_horizon(small_n + 2, 1 << 14)
            .saturating_sub(small_n)
            .max(2);
        let fam = gauge.modified.families();
        let mut fast = 0.0f64;
        for p in &cert.probes {
            let ov = exactness_overlap(&fam, small_n, small_s, p).re;
            fast = fast.max((2.0 - 2.0 * ov).max(0.0).sqrt());
        }
        let dense = exactness_residual_dense(&gauge.modified, small_n, small_s, &cert.probes)?;
        dense_cross_gap = Some((fast - dense).abs());
    } else {
        failure_reason = Some(format!(
            "adjoint products not certified convergent (defect {:.3e})",
            cert.convergence_defect
        ));
    }

    let conjugacy_ok = cert.verdict == ConvergenceVerdict::Convergent
        && conjugacy_residual <= 10.0 * cert_tol
        && cert.range_stabilization_defect <= 100.0 * tol.residual_eps;
    let verdict = restriction_ok && conjugacy_ok;
    Ok(BeurlingSummary {
        restriction_residual,
        restriction_ok,
        conjugacy_residual: Some(conjugacy_residual),
        conjugacy_ok,
        failure_reason,
        verdict,
        certificate: Some(cert),
        cp_report,
        dense_cross_gap,
        invariant_state_rank_gap: rank_gap,
        invariant_state_alignment: alignment,
    })
}

fn restriction_residual_step(c: &ToyCocycle, n: usize) -> Result<f64, CocycleError> {
    restriction_residual(c, n)
}

// ---- canonical and sampled instances --------------------------------------

/// The damping interaction on `C^2 (x) C^2`: the excited state decays into a
/// slot excitation with probability `lambda` per step.
pub fn amplitude_damping_cocycle(
    lambda: f64,
    n_slots: usize,
    tol: &Tolerance,
) -> ToyCocycle {
    let s = lambda.sqrt();
    let r = (1.0 - lambda).sqrt();
    let u = ComplexMatrix::from_real_rows(&[
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, r, s, 0.0],
        vec![0.0, -s, r, 0.0],
        vec![0.0, 0.0, 0.0, 1.0],
    ]);
    ToyCocycle::new(
        u,
        2,
        ToyFockSpace::new(2, n_slots),
        basis_vec(2, 0),
        tol,
    )
    .expect("damping interaction is unitary")
}

/// Damping interaction composed with a random slot rotation: same
/// compression dynamics up to the displaced vacuum unit, so convergence is
/// guaranteed while the gauge machinery has work to do.
pub fn displaced_damping_cocycle(
    rng: &mut dyn RngCore,
    lambda: f64,
    n_slots: usize,
    tol: &Tolerance,
) -> ToyCocycle {
    let base = amplitude_damping_cocycle(lambda, n_slots, tol);
    let v0 = crate::contraction::random_unitary(rng, 2);
    let u = base.u.matmul(&ComplexMatrix::identity(2).kron(&v0));
    ToyCocycle::new(u, 2, base.fock.clone(), base.delta.clone(), tol)
        .expect("rotated damping interaction is unitary")
}

/// Random cocycle with `e_0` invariant for the compression; when
/// `displace_vacuum` is set the vacuum unit is rotated away from `e_0` so
/// the gauge machinery has work to do.
pub fn random_cocycle(
    rng: &mut dyn RngCore,
    d: usize,
    m: usize,
    n_slots: usize,
    displace_vacuum: bool,
    tol: &Tolerance,
) -> ToyCocycle {
    let mut u = cp::random_fixing_unitary(rng, d, m);
    if displace_vacuum {
        let v0 = crate::contraction::random_unitary(rng, m);
        u = u.matmul(&ComplexMatrix::identity(d).kron(&v0));
    }
    ToyCocycle::new(u, d, ToyFockSpace::new(m, n_slots), basis_vec(d, 0), tol)
        .expect("constructed interaction is unitary")
}

/// Non-ergodic instance: the interaction is `W (x) I` for a diagonal unitary
/// `W` with distinct phases, so the compression is conjugation by `W`.
pub fn nonergodic_cocycle(
    rng: &mut dyn RngCore,
    d: usize,
    m: usize,
    n_slots: usize,
    tol: &Tolerance,
) -> ToyCocycle {
    let mut phases = vec![C64::new(1.0, 0.0)];
    for k in 1..d {
        let raw = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        let angle = std::f64::consts::TAU * (0.15 + 0.7 * (k as f64 + raw) / (d as f64 + 1.0));
        phases.push(C64::new(angle.cos(), angle.sin()));
    }
    let w = ComplexMatrix::diag(&phases);
    let u = w.kron(&ComplexMatrix::identity(m));
    ToyCocycle::new(u, d, ToyFockSpace::new(m, n_slots), basis_vec(d, 0), tol)
        .expect("W (x) I is unitary")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn c64(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_cocycle_leaves_vectors_alone() {
        let tol = Tolerance::default();
        let c = ToyCocycle::new(
            ComplexMatrix::identity(4),
            2,
            ToyFockSpace::new(2, 3),
            basis_vec(2, 0),
            &tol,
        )
        .unwrap();
        let v: Vec<C64> = (0..c.dense_dim()).map(|k| c64(k as f64)).collect();
        let out = cocycle_apply(&c, 3, &v).unwrap();
        assert_eq!(out, v);
        assert!(matches!(
            cocycle_apply(&c, 4, &v),
            Err(CocycleError::HorizonExceeded { .. })
        ));
    }

    #[test]
    fn single_step_acts_on_h_and_slot_one_only() {
        let tol = Tolerance::default();
        let c = amplitude_damping_cocycle(0.75, 3, &tol);
        let psi = DenseState::product(2, 2, 3, &basis_vec(2, 1), &[]);
        let out = cocycle_apply(&c, 1, &psi.data).unwrap();
        // u(|1> (x) e0) = 1/2 |1> e0 + sqrt3/2 |0> e1 at slot 1.
        let s3 = 0.75f64.sqrt();
        let expect_a = DenseState::product(2, 2, 3, &basis_vec(2, 1), &[]);
        let expect_b = DenseState::product(2, 2, 3, &basis_vec(2, 0), &[(1, 1)]);
        for (k, &z) in out.iter().enumerate() {
            let want = expect_a.data[k] * c64(0.5) + expect_b.data[k] * c64(s3);
            assert!((z - want).norm() < 1e-14);
        }
    }

    #[test]
    fn two_steps_of_damping_put_the_late_emission_on_slot_one() {
        // Left-cocycle order: u_2 = u_[1] u_[2], the slot-2 gate acts first.
        // The first emission (amplitude sqrt3/2) therefore sits on slot 2
        // and the once-decayed emission (amplitude (1/2)(sqrt3/2)) on slot 1.
        let tol = Tolerance::default();
        let c = amplitude_damping_cocycle(0.75, 2, &tol);
        let psi = DenseState::product(2, 2, 2, &basis_vec(2, 1), &[]);
        let out = cocycle_apply(&c, 2, &psi.data).unwrap();
        let s3 = 0.75f64.sqrt();
        let slot1 = DenseState::product(2, 2, 2, &basis_vec(2, 0), &[(1, 1)]);
        let slot2 = DenseState::product(2, 2, 2, &basis_vec(2, 0), &[(2, 1)]);
        let survived = DenseState::product(2, 2, 2, &basis_vec(2, 1), &[]);
        let norm: f64 = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-13, "norm preserved");
        let amp = |basis: &DenseState| -> C64 {
            basis
                .data
                .iter()
                .zip(out.iter())
                .map(|(b, o)| b.conj() * o)
                .sum()
        };
        assert!((amp(&slot1) - c64(0.5 * s3)).norm() < 1e-13);
        assert!((amp(&slot2) - c64(s3)).norm() < 1e-13);
        assert!((amp(&survived) - c64(0.25)).norm() < 1e-13);
    }

    #[test]
    fn adaptedness_holds_for_local_generators_and_fails_for_fixtures() {
        let tol = Tolerance::default();
        let c = amplitude_damping_cocycle(0.75, 5, &tol);
        for n in 1..=3 {
            assert!(adaptedness_residual(&c, n).unwrap() < 1e-12);
        }
        assert!(restriction_residual(&c, 2).unwrap() < 1e-12);
        assert!(adaptedness_residual(&ToyCocycle::new(
            ComplexMatrix::identity(4),
            2,
            ToyFockSpace::new(2, 4),
            basis_vec(2, 0),
            &tol,
        )
        .unwrap(), 2)
        .unwrap() < 1e-15);

        // Fixture: a swap acting on slots 1 and n+1 is not adapted at n = 2.
        let m = 2usize;
        let mut swap = ComplexMatrix::zeros(m * m, m * m);
        for i in 0..m {
            for j in 0..m {
                swap.set(i * m + j, j * m + i, C64::new(1.0, 0.0));
            }
        }
        let n = 2usize;
        let psi = DenseState::product(2, m, 4, &basis_vec(2, 0), &[(n + 1, 1)]);
        let mut y = ComplexMatrix::zeros(m, m);
        y.set(0, 1, C64::new(1.0, 0.0));
        let lhs = psi.fock_local_op(&y, n + 1).two_slot_op(&swap, 1, n + 1);
        let rhs = psi.two_slot_op(&swap, 1, n + 1).fock_local_op(&y, n + 1);
        let residual = lhs.distance(&rhs);
        assert!(residual >= 0.1, "non-adapted fixture: {residual}");

        // Dense-commutator oracle at the same size agrees.
        let dim = psi.data.len();
        let mut swap_mat = ComplexMatrix::zeros(dim, dim);
        let mut y_mat = ComplexMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut basis = DenseState::zero(2, m, 4);
            basis.data[col] = C64::new(1.0, 0.0);
            let sw = basis.two_slot_op(&swap, 1, n + 1);
            let yy = basis.fock_local_op(&y, n + 1);
            for row in 0..dim {
                swap_mat.set(row, col, sw.data[row]);
                y_mat.set(row, col, yy.data[row]);
            }
        }
        let comm = &swap_mat.matmul(&y_mat) - &y_mat.matmul(&swap_mat);
        let norm = crate::numeric::spectral::operator_norm(&comm);
        assert!(norm >= residual - 1e-12, "operator norm dominates probes");
        assert!(norm >= 0.1);
    }

    #[test]
    fn compression_of_identity_is_the_identity_map() {
        let tol = Tolerance::default();
        let c = ToyCocycle::new(
            ComplexMatrix::identity(6),
            2,
            ToyFockSpace::new(3, 3),
            basis_vec(2, 0),
            &tol,
        )
        .unwrap();
        let z = compress_z(&c, &tol).unwrap();
        let x = ComplexMatrix::from_real_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let zx = apply_heisenberg(&z, &x).unwrap();
        assert!((&zx - &x).frobenius_norm() < 1e-12);
    }

    #[test]
    fn compression_of_swap_interaction_is_the_vacuum_state_map() {
        // u = swap on C^d (x) C^d sends x to <e_0, x e_0> I.
        let tol = Tolerance::default();
        let d = 2usize;
        let mut swap = ComplexMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                swap.set(i * d + j, j * d + i, C64::new(1.0, 0.0));
            }
        }
        let c = ToyCocycle::new(
            swap,
            d,
            ToyFockSpace::new(d, 3),
            basis_vec(d, 0),
            &tol,
        )
        .unwrap();
        let z = compress_z(&c, &tol).unwrap();
        let x = ComplexMatrix::from_real_rows(&[vec![0.3, 0.1], vec![0.7, -0.2]]);
        let zx = apply_heisenberg(&z, &x).unwrap();
        let expected = ComplexMatrix::identity(d).scale(x.at(0, 0));
        assert!((&zx - &expected).frobenius_norm() < 1e-12);
    }

    #[test]
    fn compression_of_damping_recovers_the_kraus_pair() {
        let tol = Tolerance::default();
        let c = amplitude_damping_cocycle(0.75, 4, &tol);
        let z = compress_z(&c, &tol).unwrap();
        let expected = cp::amplitude_damping_kraus(0.75, &tol);
        for (a, b) in z.ops().iter().zip(expected.ops().iter()) {
            assert!((a - b).frobenius_norm() < 1e-12);
        }
        let residual = z_consistency_residual(&c, 3, &tol).unwrap();
        assert!(residual < 1e-12, "three-step semigroup identity: {residual}");
    }

    #[test]
    fn vacuum_unit_extraction_and_gauge() {
        let tol = Tolerance::default();
        let c = amplitude_damping_cocycle(0.75, 4, &tol);
        let omega = vacuum_unit(&c, &tol).unwrap();
        assert!((omega[0] - c64(1.0)).norm() < 1e-12, "already vacuum-pointing");
        assert!(omega[1].norm() < 1e-12);
        let g = gauge_modify(&c, &tol).unwrap();
        assert!((&g.gauge - &ComplexMatrix::identity(2)).frobenius_norm() < 1e-12);

        // Identity interaction: omega = e_0 for any delta.
        let id = ToyCocycle::new(
            ComplexMatrix::identity(4),
            2,
            ToyFockSpace::new(2, 3),
            basis_vec(2, 1),
            &tol,
        )
        .unwrap();
        let omega = vacuum_unit(&id, &tol).unwrap();
        assert!((omega[0] - c64(1.0)).norm() < 1e-13);
    }

    #[test]
    fn displaced_vacuum_unit_is_recovered_by_the_gauge_rotation() {
        let tol = Tolerance::default();
        let base = amplitude_damping_cocycle(0.75, 4, &tol);
        // Compose with a slot swap: the vacuum unit moves to e_1.
        let v0 = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let u = base.u.matmul(&ComplexMatrix::identity(2).kron(&v0));
        let c = ToyCocycle::new(u, 2, ToyFockSpace::new(2, 4), basis_vec(2, 0), &tol).unwrap();
        let omega = vacuum_unit(&c, &tol).unwrap();
        assert!(omega[0].norm() < 1e-12);
        assert!((omega[1].norm() - 1.0).abs() < 1e-12);
        let g = gauge_modify(&c, &tol).unwrap();
        // The modified cocycle fixes delta (x) vacuum in both directions.
        let one = DenseState::product(2, 2, 1, &g.modified.delta, &[]);
        let forward = apply_cocycle_product(&one.clone(), &g.modified.u, 1);
        assert!(forward.distance(&one) < 1e-12);
    }

    #[test]
    fn vacuum_unit_requires_an_invariant_vector() {
        let tol = Tolerance::default();
        let mut c = amplitude_damping_cocycle(0.75, 3, &tol);
        c.delta = basis_vec(2, 1);
        assert!(matches!(
            vacuum_unit(&c, &tol),
            Err(CocycleError::NoInvariantVector { .. })
        ));
    }

    #[test]
    fn damping_certificate_certifies_the_full_chain() {
        let tol = Tolerance::default();
        let c = amplitude_damping_cocycle(0.75, 40, &tol);
        let g = gauge_modify(&c, &tol).unwrap();
        let cert = convergence_analyze(&g, 3, 1e-6, &tol).unwrap();
        assert_eq!(cert.verdict, ConvergenceVerdict::Convergent);
        assert!(cert.q_defect <= 1e-6, "q defect {}", cert.q_defect);
        assert!(cert.isometry_defect < 1e-10);
        assert!(cert.cauchy_bound_violation <= 1e-10, "2-Delta bound");
        assert!(cert.range_stabilization_defect < 1e-12);
        // The worst distance curve decays like 2^{-n} once the walk has
        // passed the deepest excited probe slot.
        for w in cert.delta_curve[3..].windows(2).take(20) {
            assert!(w[1] <= 0.51 * w[0] + 1e-12);
        }
        let res = exactness_residual(&g, &cert, 3, &tol).unwrap();
        assert!(res <= 1e-6, "reconstruction residual {res}");
    }

    #[test]
    fn identity_cocycle_is_convergent_but_fails_the_q_range_condition() {
        let tol = Tolerance::default();
        let c = ToyCocycle::new(
            ComplexMatrix::identity(4),
            2,
            ToyFockSpace::new(2, 12),
            basis_vec(2, 0),
            &tol,
        )
        .unwrap();
        let g = gauge_modify(&c, &tol).unwrap();
        let cert = convergence_analyze(&g, 2, 1e-6, &tol).unwrap();
        assert_eq!(cert.verdict, ConvergenceVerdict::Convergent);
        assert!((cert.q_defect - 1.0).abs() < 1e-9, "q defect {}", cert.q_defect);
    }

    #[test]
    fn one_dimensional_identity_cocycle_is_exact() {
        let tol = Tolerance::default();
        let c = ToyCocycle::new(
            ComplexMatrix::identity(2),
            1,
            ToyFockSpace::new(2, 10),
            basis_vec(1, 0),
            &tol,
        )
        .unwrap();
        let g = gauge_modify(&c, &tol).unwrap();
        let cert = convergence_analyze(&g, 2, 1e-6, &tol).unwrap();
        assert_eq!(cert.verdict, ConvergenceVerdict::Convergent);
        assert!(cert.q_defect < 1e-12, "q is the identity when H = C");
        let res = exactness_residual(&g, &cert, 2, &tol).unwrap();
        assert!(res < 1e-10);
    }

    #[test]
    fn nonergodic_cocycle_is_not_convergent() {
        let tol = Tolerance::default();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let c = nonergodic_cocycle(&mut rng, 2, 2, 16, &tol);
        let g = gauge_modify(&c, &tol).unwrap();
        let cert = convergence_analyze(&g, 2, 1e-6, &tol).unwrap();
        assert_eq!(cert.verdict, ConvergenceVerdict::NotConvergent);
        assert!(matches!(
            exactness_residual(&g, &cert, 2, &tol),
            Err(CocycleError::NotConvergent { .. })
        ));
    }

    #[test]
    fn beurling_summary_separates_the_three_canonical_instances() {
        let tol = Tolerance::default();
        let damping = amplitude_damping_cocycle(0.75, 30, &tol);
        let rep = beurling_report(&damping, 5, 1e-6, &tol).unwrap();
        assert!(rep.verdict, "damping instance is of Beurling type");
        assert!(rep.restriction_ok && rep.conjugacy_ok);
        assert!(rep.dense_cross_gap.unwrap() < 1e-10);
        let cp = rep.cp_report.unwrap();
        assert!(cp.is_ergodic && cp.is_absorbing);
        assert!(rep.invariant_state_rank_gap.unwrap() < 1e-8);
        assert!((rep.invariant_state_alignment.unwrap() - 1.0).abs() < 1e-8);

        let id = ToyCocycle::new(
            ComplexMatrix::identity(4),
            2,
            ToyFockSpace::new(2, 12),
            basis_vec(2, 0),
            &tol,
        )
        .unwrap();
        let rep = beurling_report(&id, 4, 1e-6, &tol).unwrap();
        assert!(rep.restriction_ok, "restriction clause passes");
        assert!(!rep.conjugacy_ok, "no conjugacy: q defect 1");
        assert!(!rep.verdict);

        let mut rng = ChaCha20Rng::seed_from_u64(17);
        let bad = nonergodic_cocycle(&mut rng, 2, 2, 12, &tol);
        let rep = beurling_report(&bad, 4, 1e-6, &tol).unwrap();
        assert!(!rep.verdict);
        let cp = rep.cp_report.unwrap();
        assert!(!cp.is_ergodic && !cp.is_absorbing);
    }

    #[test]
    fn random_convergent_instances_pass_exactness_within_scaled_tolerance() {
        // Mixed family: gauge-displaced damping instances are guaranteed to
        // certify; Haar-random fixing instances certify when their gap
        // allows and must stay coherent either way.
        let tol = Tolerance::default();
        let mut rng = ChaCha20Rng::seed_from_u64(99);
        let mut certified = 0;
        for k in 0..10usize {
            let c = if k % 2 == 0 {
                displaced_damping_cocycle(&mut rng, 0.5 + 0.1 * (k % 4) as f64, 24, &tol)
            } else {
                random_cocycle(&mut rng, 2 + (k % 2), 2, 24, true, &tol)
            };
            let g = match gauge_modify(&c, &tol) {
                Ok(g) => g,
                Err(_) => continue,
            };
            let cert = convergence_analyze(&g, 2, 1e-6, &tol).unwrap();
            // Per-instance tolerance from the certified defect levels.
            let tol_i = (2.0 * (cert.convergence_defect + cert.q_defect)).max(1e-6);
            if tol_i > 0.05 {
                continue;
            }
            certified += 1;
            let res = exactness_residual(&g, &cert, 2, &tol).unwrap();
            assert!(
                res <= 10.0 * tol_i,
                "instance {k}: residual {res} vs tol {tol_i}"
            );
        }
        assert!(certified >= 4, "sampling produced too few certified instances");
    }
}
