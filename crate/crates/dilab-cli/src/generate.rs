//! Seeded instance generation.
//!
//! PRNG discipline: every instance draws from a fresh ChaCha20 stream
//! created with `ChaCha20Rng::seed_from_u64(seed)`; Gaussian entries come
//! from Box-Muller over consecutive 64-bit draws (see
//! `dilab_core::contraction::standard_complex_gaussian`), so identical
//! seeds reproduce identical instances bit for bit.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use dilab_core::cocycle::{self, ToyCocycle, ToyFockSpace};
use dilab_core::contraction::{random_contraction, random_star_stable, random_unitary};
use dilab_core::cp::{self, KrausMap};
use dilab_core::numeric::matrix::{basis_vec, ComplexMatrix, C64};
use dilab_core::Tolerance;

use crate::config::{matrix_from_data, vector_from_data, Dims, InstanceSpec};
use crate::CliError;

/// Instance actually used by a run: a contraction for the single-operator
/// commands, an interaction cocycle or a Kraus map for the dynamical ones.
#[derive(Debug, Clone)]
pub enum Instance {
    Contraction(ComplexMatrix),
    Cocycle(ToyCocycle),
    Kraus { map: KrausMap, delta: Vec<C64> },
}

pub fn contraction_instance(
    spec: &InstanceSpec,
    seed: u64,
    dims: &Dims,
) -> Result<ComplexMatrix, CliError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let d = dims.d_h;
    match spec {
        InstanceSpec::RandomContraction => Ok(random_contraction(&mut rng, d, 0.05)),
        InstanceSpec::StarStable => Ok(random_star_stable(&mut rng, d, 0.9)),
        InstanceSpec::Unitary => Ok(random_unitary(&mut rng, d)),
        InstanceSpec::Explicit { matrix: Some(m), .. } => matrix_from_data(m),
        InstanceSpec::Explicit { matrix: None, .. } => Err(CliError::invalid(
            "explicit instance for this command needs a 'matrix' field",
        )),
        other => Err(CliError::invalid(format!(
            "instance kind {other:?} does not describe a contraction"
        ))),
    }
}

pub fn cocycle_instance(
    spec: &InstanceSpec,
    seed: u64,
    dims: &Dims,
    tol: &Tolerance,
) -> Result<ToyCocycle, CliError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    match spec {
        InstanceSpec::AmplitudeDamping { lambda } => {
            if !(0.0..=1.0).contains(lambda) {
                return Err(CliError::invalid(format!(
                    "damping probability {lambda} outside [0, 1]"
                )));
            }
            Ok(cocycle::amplitude_damping_cocycle(
                *lambda,
                dims.n_slots,
                tol,
            ))
        }
        InstanceSpec::RandomCocycle { displace } => Ok(cocycle::random_cocycle(
            &mut rng,
            dims.d_h,
            dims.m,
            dims.n_slots,
            *displace,
            tol,
        )),
        InstanceSpec::NonergodicCocycle => Ok(cocycle::nonergodic_cocycle(
            &mut rng,
            dims.d_h,
            dims.m,
            dims.n_slots,
            tol,
        )),
        InstanceSpec::Explicit {
            matrix: Some(m),
            delta,
            ..
        } => {
            let u = matrix_from_data(m)?;
            if u.rows() != dims.d_h * dims.m {
                return Err(CliError::invalid(format!(
                    "explicit interaction is {}x{}, dims demand {}",
                    u.rows(),
                    u.cols(),
                    dims.d_h * dims.m
                )));
            }
            let delta = delta
                .as_ref()
                .map(|d| vector_from_data(d))
                .unwrap_or_else(|| basis_vec(dims.d_h, 0));
            ToyCocycle::new(
                u,
                dims.d_h,
                ToyFockSpace::new(dims.m, dims.n_slots),
                delta,
                tol,
            )
            .map_err(|e| CliError::invalid(e.to_string()))
        }
        other => Err(CliError::invalid(format!(
            "instance kind {other:?} does not describe a cocycle"
        ))),
    }
}

pub fn kraus_instance(
    spec: &InstanceSpec,
    seed: u64,
    dims: &Dims,
    tol: &Tolerance,
) -> Result<(KrausMap, Vec<C64>), CliError> {
    match spec {
        InstanceSpec::AmplitudeDamping { lambda } => {
            if !(0.0..=1.0).contains(lambda) {
                return Err(CliError::invalid(format!(
                    "damping probability {lambda} outside [0, 1]"
                )));
            }
            Ok((cp::amplitude_damping_kraus(*lambda, tol), basis_vec(2, 0)))
        }
        InstanceSpec::RandomCocycle { .. } | InstanceSpec::NonergodicCocycle => {
            let c = cocycle_instance(spec, seed, dims, tol)?;
            let z = dilab_core::cocycle::compress_z(&c, tol)
                .map_err(|e| CliError::invalid(e.to_string()))?;
            Ok((z, c.delta))
        }
        InstanceSpec::Explicit { kraus: Some(ops), delta, .. } => {
            let mats: Result<Vec<ComplexMatrix>, CliError> =
                ops.iter().map(matrix_from_data).collect();
            let mats = mats?;
            let d = mats.first().map_or(0, |m| m.rows());
            let map = KrausMap::new(mats, tol).map_err(|e| CliError::invalid(e.to_string()))?;
            let delta = delta
                .as_ref()
                .map(|v| vector_from_data(v))
                .unwrap_or_else(|| basis_vec(d, 0));
            Ok((map, delta))
        }
        other => Err(CliError::invalid(format!(
            "instance kind {other:?} does not describe a unital CP map"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dilab_core::numeric::spectral::{spectral_radius, unitarity_defect};

    #[test]
    fn star_stable_generator_honors_the_radius_bound() {
        let tol = Tolerance::default();
        let dims = Dims {
            d_h: 2,
            ..Dims::default()
        };
        let m = contraction_instance(&InstanceSpec::StarStable, 1, &dims).unwrap();
        assert!(spectral_radius(&m).unwrap() <= 0.9 + 1e-9);
    }

    #[test]
    fn unitary_generator_is_unitary() {
        let tol = Tolerance::default();
        let dims = Dims {
            d_h: 3,
            ..Dims::default()
        };
        let m = contraction_instance(&InstanceSpec::Unitary, 7, &dims).unwrap();
        assert!(unitarity_defect(&m).unwrap() <= 1e-12);
    }

    #[test]
    fn amplitude_damping_is_seed_independent() {
        let tol = Tolerance::default();
        let dims = Dims::default();
        let spec = InstanceSpec::AmplitudeDamping { lambda: 0.75 };
        let a = cocycle_instance(&spec, 1, &dims, &tol).unwrap();
        let b = cocycle_instance(&spec, 999, &dims, &tol).unwrap();
        assert!((&a.u - &b.u).frobenius_norm() < 1e-15);
        assert!(unitarity_defect(&a.u).unwrap() < 1e-12);
    }

    #[test]
    fn generators_are_reproducible_for_equal_seeds() {
        let tol = Tolerance::default();
        let dims = Dims::default();
        let a = cocycle_instance(&InstanceSpec::RandomCocycle { displace: true }, 5, &dims, &tol)
            .unwrap();
        let b = cocycle_instance(&InstanceSpec::RandomCocycle { displace: true }, 5, &dims, &tol)
            .unwrap();
        assert_eq!(a.u.data(), b.u.data(), "bitwise identical instances");
    }
}
