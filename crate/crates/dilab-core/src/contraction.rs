//! Contractions and their defect geometry: the defect operators
//! `D = sqrt(I - T*T)` and `D_* = sqrt(I - TT*)`, orthonormal bases of the
//! defect spaces (the range closures of `D` and `D_*`), the block rotation
//! matrix `[[T, D_*], [D, -T*]]` compressed to those spaces, and the
//! *-stability certificate.

use std::ops::Neg;

use rand_core::RngCore;
use thiserror::Error;

use crate::numeric::matrix::{ComplexMatrix, C64};
use crate::numeric::spectral::{
    hermitian_sqrt, operator_norm, orthonormal_columns, range_basis, spectral_radius,
};
use crate::numeric::{NumericError, Tolerance};

#[derive(Debug, Error)]
pub enum ContractionError {
    #[error("operator norm {norm} exceeds 1 within tolerance; not a contraction")]
    NotAContraction { norm: f64 },
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// A validated contraction together with its measured operator norm.
#[derive(Debug, Clone)]
pub struct Contraction {
    t: ComplexMatrix,
    norm_bound: f64,
}

impl Contraction {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.t
    }

    pub fn dim(&self) -> usize {
        self.t.rows()
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }
}

/// Accepts square matrices with largest singular value at most
/// `1 + rank_eps`.
pub fn validate_contraction(
    m: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<Contraction, ContractionError> {
    if !m.is_square() {
        return Err(NumericError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        }
        .into());
    }
    if !m.all_finite() {
        return Err(NumericError::NonFinite.into());
    }
    let norm = operator_norm(m);
    if norm > 1.0 + tol.rank_eps {
        return Err(ContractionError::NotAContraction { norm });
    }
    Ok(Contraction {
        t: m.clone(),
        norm_bound: norm,
    })
}

/// Defect operators, defect-space bases and the compressed rotation matrix of
/// a contraction.
///
/// The rotation matrix maps `H (+) defect_star_space -> H (+) defect_space`
/// and is stored in compressed coordinates (ambient columns replaced by the
/// orthonormal bases), which makes it exactly unitary rather than a partial
/// isometry padded with zeros.
#[derive(Debug, Clone)]
pub struct DefectData {
    t: Contraction,
    defect: ComplexMatrix,
    defect_star: ComplexMatrix,
    basis_defect: ComplexMatrix,
    basis_defect_star: ComplexMatrix,
    rotation: ComplexMatrix,
}

impl DefectData {
    pub fn contraction(&self) -> &Contraction {
        &self.t
    }

    pub fn t_matrix(&self) -> &ComplexMatrix {
        self.t.matrix()
    }

    pub fn defect(&self) -> &ComplexMatrix {
        &self.defect
    }

    pub fn defect_star(&self) -> &ComplexMatrix {
        &self.defect_star
    }

    pub fn basis_defect(&self) -> &ComplexMatrix {
        &self.basis_defect
    }

    pub fn basis_defect_star(&self) -> &ComplexMatrix {
        &self.basis_defect_star
    }

    pub fn rotation(&self) -> &ComplexMatrix {
        &self.rotation
    }

    pub fn dim_h(&self) -> usize {
        self.t.dim()
    }

    pub fn dim_defect(&self) -> usize {
        self.basis_defect.cols()
    }

    pub fn dim_defect_star(&self) -> usize {
        self.basis_defect_star.cols()
    }

    /// Ambient vector -> coordinates in the defect-space basis.
    pub fn to_defect_coords(&self, ambient: &[C64]) -> Vec<C64> {
        self.basis_defect.adjoint_matvec(ambient)
    }

    pub fn from_defect_coords(&self, coords: &[C64]) -> Vec<C64> {
        self.basis_defect.matvec(coords)
    }

    pub fn to_defect_star_coords(&self, ambient: &[C64]) -> Vec<C64> {
        self.basis_defect_star.adjoint_matvec(ambient)
    }

    pub fn from_defect_star_coords(&self, coords: &[C64]) -> Vec<C64> {
        self.basis_defect_star.matvec(coords)
    }
}

/// Builds the defect cast of a contraction.
pub fn defect_data(t: &Contraction, tol: &Tolerance) -> Result<DefectData, ContractionError> {
    let d = t.dim();
    let id = ComplexMatrix::identity(d);
    let tm = t.matrix();
    // The validated norm may exceed 1 by up to rank_eps, so the Gram
    // residues can dip to about -2 rank_eps; widen the PSD window
    // accordingly before clamping.
    let sqrt_tol = Tolerance {
        rank_eps: 4.0 * tol.rank_eps,
        residual_eps: tol.residual_eps,
    };
    let defect = hermitian_sqrt(&(&id - &tm.adjoint().matmul(tm)), &sqrt_tol)?;
    let defect_star = hermitian_sqrt(&(&id - &tm.matmul(&tm.adjoint())), &sqrt_tol)?;
    let basis_defect = range_basis(&defect, tol);
    let basis_defect_star = range_basis(&defect_star, tol);

    let r = basis_defect.cols();
    let rs = basis_defect_star.cols();
    // Blocks: [[T, D_* B_*], [B^H D, -B^H T^* B_*]].
    let top_right = defect_star.matmul(&basis_defect_star);
    let bottom_left = basis_defect.adjoint().matmul(&defect);
    let bottom_right = basis_defect
        .adjoint()
        .matmul(&tm.adjoint())
        .matmul(&basis_defect_star);
    let bottom_right = (&bottom_right).neg();
    let mut rotation = ComplexMatrix::zeros(d + r, d + rs);
    for i in 0..d {
        for j in 0..d {
            rotation.set(i, j, tm.at(i, j));
        }
        for j in 0..rs {
            rotation.set(i, d + j, top_right.at(i, j));
        }
    }
    for i in 0..r {
        for j in 0..d {
            rotation.set(d + i, j, bottom_left.at(i, j));
        }
        for j in 0..rs {
            rotation.set(d + i, d + j, bottom_right.at(i, j));
        }
    }

    Ok(DefectData {
        t: t.clone(),
        defect,
        defect_star,
        basis_defect,
        basis_defect_star,
        rotation,
    })
}

/// *-stability certificate: spectral radius, the decay sequence of
/// `||T*^n||`, and the finite-dimensional verdict (spectral radius strictly
/// below 1 within tolerance).
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub spectral_radius: f64,
    pub power_decay: Vec<f64>,
    pub is_star_stable: bool,
}

pub fn star_stability(
    t: &Contraction,
    n_max: usize,
    tol: &Tolerance,
) -> Result<StabilityReport, ContractionError> {
    assert!(n_max >= 1, "n_max must be at least 1");
    let radius = spectral_radius(t.matrix())?;
    let adj = t.matrix().adjoint();
    let mut power = adj.clone();
    let mut power_decay = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        power_decay.push(operator_norm(&power));
        power = power.matmul(&adj);
    }
    Ok(StabilityReport {
        spectral_radius: radius,
        power_decay,
        is_star_stable: radius < 1.0 - tol.rank_eps,
    })
}

// ---- seeded samplers ----------------------------------------------------
//
// Entries are standard complex Gaussians drawn by Box-Muller from the
// caller's RNG stream: two uniforms in (0, 1) from consecutive `next_u64`
// calls per real coordinate, real part before imaginary part, row-major
// matrix order. Fixing the discipline here keeps instances reproducible
// across front ends.

pub fn standard_complex_gaussian(rng: &mut dyn RngCore) -> C64 {
    let draw = |rng: &mut dyn RngCore| {
        let u1 = (rng.next_u64() as f64 + 1.0) / (u64::MAX as f64 + 2.0);
        let u2 = (rng.next_u64() as f64 + 1.0) / (u64::MAX as f64 + 2.0);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    C64::new(draw(rng), draw(rng))
}

pub fn random_gaussian_matrix(rng: &mut dyn RngCore, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| standard_complex_gaussian(rng))
}

/// Random contraction: Gaussian matrix divided by its norm times
/// `1 + margin`; generic spectrum, norm strictly below 1.
pub fn random_contraction(rng: &mut dyn RngCore, dim: usize, margin: f64) -> ComplexMatrix {
    let g = random_gaussian_matrix(rng, dim, dim);
    let norm = operator_norm(&g).max(1e-300);
    g.scale(C64::new(1.0 / (norm * (1.0 + margin)), 0.0))
}

/// Random contraction with spectral radius at most `rho_max` (and norm
/// strictly below 1).
pub fn random_star_stable(rng: &mut dyn RngCore, dim: usize, rho_max: f64) -> ComplexMatrix {
    let g = random_gaussian_matrix(rng, dim, dim);
    let norm = operator_norm(&g).max(1e-300);
    let rho = spectral_radius(&g).unwrap_or(norm);
    let scale = (norm * 1.05).max(rho / rho_max);
    g.scale(C64::new(1.0 / scale, 0.0))
}

/// Haar-flavored random unitary: orthonormalized Gaussian columns.
pub fn random_unitary(rng: &mut dyn RngCore, dim: usize) -> ComplexMatrix {
    loop {
        let g = random_gaussian_matrix(rng, dim, dim);
        let q = orthonormal_columns(&g, 1e-8);
        if q.cols() == dim {
            return q;
        }
    }
}
