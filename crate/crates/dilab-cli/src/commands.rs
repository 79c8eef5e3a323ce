//! Command dispatch: each command builds its instance, runs the relevant
//! checkers and assembles a deterministic report.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use dilab_core::charfun::{
    beurling_residual, embed_c, levels_distance, model_map_w, shift_levels, tail_degree,
    theta_coefficients, theta_eval,
};
use dilab_core::cocycle::{
    adaptedness_residual, beurling_report, compress_z, convergence_analyze, exactness_residual,
    gauge_modify, vacuum_unit, z_consistency_residual, CocycleError, ConvergenceVerdict,
    ToyCocycle,
};
use dilab_core::contraction::{
    defect_data, random_gaussian_matrix, star_stability, validate_contraction, DefectData,
};
use dilab_core::cp::{equivalence_report, CpError};
use dilab_core::dilation::{
    dilation_apply, leg_apply, power_factorization_residual, DilationVector, TruncatedHardySpace,
};
use dilab_core::numeric::matrix::{basis_vec, dot, vec_norm, vec_sub, ComplexMatrix, C64};
use dilab_core::numeric::spectral::{spectral_radius, unitarity_defect};
use dilab_core::Tolerance;

use crate::config::{
    matrix_to_data, vector_to_data, Command, ExperimentConfig, InstanceSpec,
};
use crate::generate::{cocycle_instance, contraction_instance, kraus_instance};
use crate::report::{Check, CheckStatus, Curve, InstanceEcho, RunReport};
use crate::CliError;

pub fn run(cmd: Command, cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    cfg.dims.validate()?;
    let tol = cfg.tolerance.to_tolerance()?;
    let spec = cfg
        .instance
        .clone()
        .unwrap_or_else(|| ExperimentConfig::default_instance_for(cmd));
    let (checks, curves, echo) = match cmd {
        Command::Charfun => run_charfun(cfg, &spec, &tol)?,
        Command::Dilate => run_dilate(cfg, &spec, &tol)?,
        Command::Limit => run_limit(cfg, &spec, &tol)?,
        Command::Beurling1 => run_beurling1(cfg, &spec, &tol)?,
        Command::Cpcheck => run_cpcheck(cfg, &spec, &tol)?,
        Command::Cocycle => run_cocycle(cfg, &spec, &tol)?,
        Command::Thm42 => run_thm42(cfg, &spec, &tol)?,
    };
    Ok(RunReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: cmd,
        seed: cfg.seed,
        dims: cfg.dims,
        tolerance: cfg.tolerance,
        instance_spec: spec,
        instance: echo,
        checks,
        curves,
        verdict: String::new(),
    }
    .finalize())
}

type CommandOutput = (Vec<Check>, Vec<Curve>, InstanceEcho);

fn build_defect(
    spec: &InstanceSpec,
    cfg: &ExperimentConfig,
    tol: &Tolerance,
) -> Result<(DefectData, InstanceEcho), CliError> {
    let m = contraction_instance(spec, cfg.seed, &cfg.dims)?;
    let t = validate_contraction(&m, tol).map_err(|e| CliError::invalid(e.to_string()))?;
    let dd = defect_data(&t, tol).map_err(|e| CliError::invalid(e.to_string()))?;
    let echo = InstanceEcho {
        contraction: Some(matrix_to_data(&m)),
        ..InstanceEcho::default()
    };
    Ok((dd, echo))
}

fn headroom_vector(
    dd: &DefectData,
    degree: usize,
    occupied: usize,
    rng: &mut ChaCha20Rng,
) -> DilationVector {
    let space = TruncatedHardySpace::pure(dd, degree);
    let mut v = DilationVector::zero(dd.dim_h(), space);
    v.h = random_gaussian_matrix(rng, dd.dim_h(), 1).column(0);
    for lvl in v.levels.iter_mut().take(occupied) {
        if !lvl.is_empty() {
            *lvl = random_gaussian_matrix(rng, lvl.len(), 1).column(0);
        }
    }
    v
}

fn run_charfun(
    cfg: &ExperimentConfig,
    spec: &InstanceSpec,
    tol: &Tolerance,
) -> Result<CommandOutput, CliError> {
    let (dd, echo) = build_defect(spec, cfg, tol)?;
    let mut checks = Vec::new();
    let mut curves = Vec::new();

    checks.push(Check::bounded(
        "rotation_unitarity",
        unitarity_defect(dd.rotation()).map_err(|e| CliError::invalid(e.to_string()))?,
        tol.residual_eps,
    ));

    let stability = star_stability(dd.contraction(), 50, tol)
        .map_err(|e| CliError::invalid(e.to_string()))?;
    let degree = tail_degree(&dd, tol.residual_eps / 10.0, 2048);
    let cf = theta_coefficients(&dd, degree);
    curves.push(Curve {
        name: "theta_coefficient_norm".to_string(),
        values: cf
            .coeffs()
            .iter()
            .take(64)
            .map(|c| c.frobenius_norm())
            .collect(),
    });
    curves.push(Curve {
        name: "adjoint_power_norm".to_string(),
        values: stability.power_decay.clone(),
    });

    if dd.dim_h() == 1 {
        // Scalar case: the characteristic function is the Blaschke factor
        // (z - c) / (1 - conj(c) z).
        let c_val = dd.t_matrix().at(0, 0);
        let mut worst = 0.0f64;
        for k in 0..20 {
            let r = 0.05 + 0.045 * k as f64;
            let ang = std::f64::consts::TAU * k as f64 / 20.0 + 0.37;
            let z = C64::new(r * ang.cos(), r * ang.sin());
            let eval = theta_eval(&cf, z, tol).map_err(|e| CliError::invalid(e.to_string()))?;
            let expect = (z - c_val) / (C64::new(1.0, 0.0) - c_val.conj() * z);
            worst = worst.max((eval.value.at(0, 0) - expect).norm());
        }
        checks.push(Check::bounded("blaschke_identity", worst, 1e-10));
    }

    if stability.is_star_stable {
        let mut worst = 0.0f64;
        for k in 0..8 {
            let ang = std::f64::consts::TAU * (k as f64 + 0.3) / 8.0;
            let z = C64::new(ang.cos(), ang.sin());
            let eval = theta_eval(&cf, z, tol).map_err(|e| CliError::invalid(e.to_string()))?;
            let gram = eval.value.adjoint().matmul(&eval.value);
            worst = worst.max(
                (&gram - &ComplexMatrix::identity(cf.dim_in())).frobenius_norm(),
            );
        }
        checks.push(Check::bounded("inner_boundary", worst, 1e-6));

        let mut iso_worst = 0.0f64;
        for a in 0..dd.dim_h() {
            let emb = embed_c(&dd, &basis_vec(dd.dim_h(), a), degree, tol);
            let norm2: f64 = emb
                .levels
                .iter()
                .map(|l| l.iter().map(|z| z.norm_sqr()).sum::<f64>())
                .sum();
            iso_worst = iso_worst.max((norm2 - 1.0).abs());
        }
        checks.push(Check::bounded("embedding_isometry", iso_worst, 1e-6));

        // Range of the embedding vs range of the multiplier.
        let mut cross_worst = 0.0f64;
        for a in 0..dd.dim_h() {
            let emb = embed_c(&dd, &basis_vec(dd.dim_h(), a), degree, tol);
            for col in 0..dd.dim_defect() {
                for shift in 0..3usize {
                    let mut acc = C64::new(0.0, 0.0);
                    for j in shift..degree {
                        let block = cf.coeff(j - shift);
                        let column: Vec<C64> =
                            (0..block.rows()).map(|i| block.at(i, col)).collect();
                        acc += dot(&emb.levels[j], &column);
                    }
                    cross_worst = cross_worst.max(acc.norm());
                }
            }
        }
        checks.push(Check::bounded("embedding_multiplier_orthogonality", cross_worst, 1e-6));
    } else {
        checks.push(Check::skipped(
            "inner_boundary",
            "not *-stable: boundary series has no certified tail",
        ));
    }

    // Intertwining with the shift is exact level by level regardless of
    // stability.
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let n_out = 12.min(degree);
    let cf_small = theta_coefficients(&dd, n_out);
    let mut worst = 0.0f64;
    for _ in 0..4 {
        let v = headroom_vector(&dd, 6, 4, &mut rng);
        let uv = dilation_apply(&dd, &v, tol).map_err(|e| CliError::invalid(e.to_string()))?;
        let w_uv = model_map_w(&dd, &cf_small, &uv, n_out, tol)
            .map_err(|e| CliError::invalid(e.to_string()))?;
        let w_v = model_map_w(&dd, &cf_small, &v, n_out, tol)
            .map_err(|e| CliError::invalid(e.to_string()))?;
        let shifted = shift_levels(&w_v.levels, dd.dim_defect_star());
        worst = worst.max(levels_distance(
            &w_uv.levels[..n_out - 1],
            &shifted[..n_out - 1],
        ));
    }
    checks.push(Check::bounded("shift_intertwining", worst, 1e-8));

    Ok((checks, curves, echo))
}

fn run_dilate(
    cfg: &ExperimentConfig,
    spec: &InstanceSpec,
    tol: &Tolerance,
) -> Result<CommandOutput, CliError> {
    let (dd, echo) = build_defect(spec, cfg, tol)?;
    let mut checks = Vec::new();
    let degree = cfg.dims.degree.clamp(8, 256);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed.wrapping_add(1));

    checks.push(Check::bounded(
        "rotation_unitarity",
        unitarity_defect(dd.rotation()).map_err(|e| CliError::invalid(e.to_string()))?,
        1e-10,
    ));

    let mut iso_worst = 0.0f64;
    for _ in 0..4 {
        let v = headroom_vector(&dd, degree, degree - 1, &mut rng);
        let out = dilation_apply(&dd, &v, tol).map_err(|e| CliError::invalid(e.to_string()))?;
        iso_worst = iso_worst.max((out.norm() - v.norm()).abs() / v.norm().max(1e-12));
    }
    checks.push(Check::bounded("dilation_isometry", iso_worst, tol.residual_eps));

    let mut leg_worst = 0.0f64;
    for k in 0..3usize {
        let space = TruncatedHardySpace::hybrid(&dd, k, degree);
        let mut v = DilationVector::zero(dd.dim_h(), space.clone());
        v.h = random_gaussian_matrix(&mut rng, dd.dim_h(), 1).column(0);
        for n in 0..space.degree().min(6) {
            if space.level_dim(n) > 0 {
                v.levels[n] = random_gaussian_matrix(&mut rng, space.level_dim(n), 1).column(0);
            }
        }
        let out = leg_apply(&dd, k, &v).map_err(|e| CliError::invalid(e.to_string()))?;
        leg_worst = leg_worst.max((out.norm() - v.norm()).abs() / v.norm().max(1e-12));
    }
    checks.push(Check::bounded("leg_isometry", leg_worst, tol.residual_eps));

    let mut fact_values = Vec::new();
    let mut fact_worst = 0.0f64;
    for n in 1..=6usize.min(degree - 2) {
        let v = headroom_vector(&dd, degree, degree - n - 1, &mut rng);
        let res = power_factorization_residual(&dd, n, &v, tol)
            .map_err(|e| CliError::invalid(e.to_string()))?;
        fact_values.push(res);
        fact_worst = fact_worst.max(res);
    }
    checks.push(Check::bounded("power_factorization", fact_worst, 1e-10));

    let mut comp_worst = 0.0f64;
    for a in 0..dd.dim_h() {
        let mut v = DilationVector::zero(dd.dim_h(), TruncatedHardySpace::pure(&dd, degree));
        v.h = basis_vec(dd.dim_h(), a);
        let mut cur = v.clone();
        for n in 1..=5usize {
            cur = dilation_apply(&dd, &cur, tol).map_err(|e| CliError::invalid(e.to_string()))?;
            let tn = dd.t_matrix().pow(n).matvec(&v.h);
            comp_worst = comp_worst.max(vec_norm(&vec_sub(&cur.h, &tn)));
        }
    }
    checks.push(Check::bounded("compression_property", comp_worst, 10.0 * tol.residual_eps));

    let curves = vec![Curve {
        name: "factorization_residual".to_string(),
        values: fact_values,
    }];
    Ok((checks, curves, echo))
}

fn run_limit(
    cfg: &ExperimentConfig,
    spec: &InstanceSpec,
    tol: &Tolerance,
) -> Result<CommandOutput, CliError> {
    let (dd, echo) = build_defect(spec, cfg, tol)?;
    let mut checks = Vec::new();
    let stability = star_stability(dd.contraction(), 210, tol)
        .map_err(|e| CliError::invalid(e.to_string()))?;
    let degree = cfg.dims.degree.max(220).min(1024);
    let steps = 200.min(degree - 8);

    let mut v = DilationVector::zero(dd.dim_h(), TruncatedHardySpace::pure(&dd, degree));
    v.h = basis_vec(dd.dim_h(), 0);
    let trace = dilab_core::charfun::limit_product_what(&dd, steps, &v, tol)
        .map_err(|e| CliError::invalid(e.to_string()))?;

    checks.push(Check::bounded(
        "induction_display",
        trace.induction_residual,
        1e-10,
    ));
    // With f = 0 the H component is exactly T*^n h.
    let mut h_gap = 0.0f64;
    for (n, &norm) in trace.h_component_norms.iter().enumerate().take(steps) {
        let direct = vec_norm(&{
            let mut x = v.h.clone();
            for _ in 0..=n {
                x = dd.t_matrix().adjoint_matvec(&x);
            }
            x
        });
        h_gap = h_gap.max((norm - direct).abs());
    }
    checks.push(Check::bounded("h_component_matches_adjoint_power", h_gap, 1e-10));

    if stability.is_star_stable {
        let final_err = *trace.step_errors.last().expect("steps >= 1");
        checks.push(Check::bounded("limit_error_at_horizon", final_err, 1e-8));
        let mut k_factor = 0.0f64;
        for n in 5..steps.min(stability.power_decay.len()) {
            let bound = stability.power_decay[n] * v.norm();
            if bound > 1e-300 {
                k_factor = k_factor.max(trace.step_errors[n] / bound);
            }
        }
        checks.push(
            Check::bounded("error_constant_factor", k_factor, 1e3)
                .with_note("K with ||what_n v - W v|| <= K ||T*^n|| ||v|| after burn-in"),
        );
        let mut nonmonotone = 0.0f64;
        for w in trace.step_errors[5..].windows(2) {
            nonmonotone = nonmonotone.max(w[1] - w[0]);
        }
        checks.push(Check::bounded(
            "error_monotone_after_burn_in",
            nonmonotone,
            tol.residual_eps,
        ));
    } else {
        checks.push(Check::skipped(
            "limit_error_at_horizon",
            "not *-stable: the H component keeps its mass and no limit forms",
        ));
    }

    let curves = vec![
        Curve {
            name: "limit_error".to_string(),
            values: trace.step_errors.clone(),
        },
        Curve {
            name: "h_component_norm".to_string(),
            values: trace.h_component_norms.clone(),
        },
    ];
    Ok((checks, curves, echo))
}

fn run_beurling1(
    cfg: &ExperimentConfig,
    spec: &InstanceSpec,
    tol: &Tolerance,
) -> Result<CommandOutput, CliError> {
    let (dd, echo) = build_defect(spec, cfg, tol)?;
    let rho = spectral_radius(dd.t_matrix()).map_err(|e| CliError::invalid(e.to_string()))?;
    let nilpotent = rho < 1e-12;
    let pad = if nilpotent {
        dd.dim_h() + 1
    } else {
        ((1e-8f64.ln() / rho.ln()).ceil() as usize) + dd.dim_h() + 1
    };
    let degree = (pad + 2 + cfg.dims.degree.clamp(12, 64)).min(2048);
    let report = beurling_residual(&dd, degree, tol).map_err(|e| CliError::invalid(e.to_string()))?;
    let threshold = if nilpotent { 1e-10 } else { 1e-6 };
    let checks = vec![Check::bounded("beurling_subspace", report.residual, threshold)
        .with_note(format!(
            "restricted to {} of {} levels, tail estimate {:.3e}",
            report.restricted_levels, report.degree, report.tail_bound
        ))];
    Ok((checks, Vec::new(), echo))
}

fn run_cpcheck(
    cfg: &ExperimentConfig,
    spec: &InstanceSpec,
    tol: &Tolerance,
) -> Result<CommandOutput, CliError> {
    let (z, delta) = kraus_instance(spec, cfg.seed, &cfg.dims, tol)?;
    let echo = InstanceEcho {
        kraus: Some(z.ops().iter().map(matrix_to_data).collect()),
        delta: Some(vector_to_data(&delta)),
        ..InstanceEcho::default()
    };
    let mut checks = Vec::new();
    let rep = match equivalence_report(&z, &delta, None, 1e-6, tol) {
        Ok(rep) => rep,
        Err(CpError::NotInvariant { defect }) => {
            return Err(CliError::invalid(format!(
                "distinguished vector is not invariant (defect {defect:.3e})"
            )))
        }
        Err(CpError::EquivalenceViolation { detail }) => {
            checks.push(Check::flag("verdict_agreement", false, detail));
            return Ok((checks, Vec::new(), echo));
        }
        Err(e) => return Err(CliError::invalid(e.to_string())),
    };

    if rep.indeterminate {
        checks.push(Check::skipped(
            "verdict_agreement",
            format!(
                "spectral gap {:.3e} below 1e-3: classification withheld",
                1.0 - rep.second_modulus
            ),
        ));
    } else {
        checks.push(Check::flag(
            "verdict_agreement",
            rep.is_ergodic == rep.is_absorbing,
            format!(
                "ergodic {} (fixed space dim {}), absorbing {}",
                rep.is_ergodic, rep.fixed_space_dim, rep.is_absorbing
            ),
        ));
    }
    checks.push(Check::bounded(
        "monotone_psd_slack",
        (-rep.monotone_slack).max(0.0),
        1e-9,
    ));
    if rep.is_ergodic && !rep.indeterminate {
        checks.push(Check::bounded(
            "ergodic_limit_is_identity",
            rep.limit_identity_gap,
            1e-3,
        ));
    } else {
        checks.push(Check::skipped(
            "ergodic_limit_is_identity",
            "not ergodic: the Heisenberg iteration converges to a nontrivial fixed point",
        ));
    }
    let curves = vec![Curve {
        name: "absorption_distance".to_string(),
        values: rep.convergence_curve.clone(),
    }];
    Ok((checks, curves, echo))
}

fn cocycle_echo(c: &ToyCocycle) -> InstanceEcho {
    InstanceEcho {
        interaction: Some(matrix_to_data(&c.u)),
        delta: Some(vector_to_data(&c.delta)),
        ..InstanceEcho::default()
    }
}

fn run_cocycle(
    cfg: &ExperimentConfig,
    spec: &InstanceSpec,
    tol: &Tolerance,
) -> Result<CommandOutput, CliError> {
    let c = cocycle_instance(spec, cfg.seed, &cfg.dims, tol)?;
    let echo = cocycle_echo(&c);
    let mut checks = Vec::new();
    let mut curves = Vec::new();

    checks.push(Check::bounded(
        "interaction_unitary",
        unitarity_defect(&c.u).map_err(|e| CliError::invalid(e.to_string()))?,
        tol.residual_eps,
    ));
    let mut adapted = 0.0f64;
    for n in 1..=3usize.min(c.fock.n_slots - 1) {
        adapted = adapted.max(
            adaptedness_residual(&c, n).map_err(|e| CliError::invalid(e.to_string()))?,
        );
    }
    checks.push(Check::bounded("adaptedness", adapted, 100.0 * tol.residual_eps));

    let mut semigroup = 0.0f64;
    for n in 2..=3usize.min(c.fock.n_slots) {
        semigroup = semigroup.max(
            z_consistency_residual(&c, n, tol).map_err(|e| CliError::invalid(e.to_string()))?,
        );
    }
    checks.push(Check::bounded(
        "compression_semigroup",
        semigroup,
        100.0 * tol.residual_eps,
    ));

    match vacuum_unit(&c, tol) {
        Ok(omega) => {
            checks.push(Check::flag(
                "vacuum_unit_product_form",
                true,
                format!("omega_hat = {:?}", vector_to_data(&omega)),
            ));
            let g = gauge_modify(&c, tol).map_err(|e| CliError::invalid(e.to_string()))?;
            let cert = convergence_analyze(&g, 3, 1e-6, tol)
                .map_err(|e| CliError::invalid(e.to_string()))?;
            checks.push(Check::bounded(
                "limit_isometry_on_probes",
                cert.isometry_defect,
                100.0 * tol.residual_eps,
            ));
            checks.push(Check::bounded(
                "cauchy_within_twice_delta",
                cert.cauchy_bound_violation.max(0.0),
                100.0 * tol.residual_eps,
            ));
            checks.push(Check::bounded(
                "forward_orbit_stabilization",
                cert.range_stabilization_defect,
                100.0 * tol.residual_eps,
            ));
            let verdict_name = match cert.verdict {
                ConvergenceVerdict::Convergent => "convergent",
                ConvergenceVerdict::Inconclusive => "inconclusive",
                ConvergenceVerdict::NotConvergent => "not_convergent",
            };
            checks.push(
                Check::flag("convergence_verdict", true, verdict_name).with_note(format!(
                    "{verdict_name}: late Cauchy defect {:.3e}, q defect {:.3e}",
                    cert.convergence_defect, cert.q_defect
                )),
            );
            if cert.verdict == ConvergenceVerdict::Convergent {
                let res = exactness_residual(&g, &cert, 2.min(c.fock.n_slots - 2).max(1), tol)
                    .map_err(|e| CliError::invalid(e.to_string()))?;
                checks.push(Check::bounded("exactness_reconstruction", res, 1e-5));
            } else {
                checks.push(Check::skipped(
                    "exactness_reconstruction",
                    "no convergence certificate at this horizon",
                ));
            }
            curves.push(Curve {
                name: "delta_distance".to_string(),
                values: cert.delta_curve.clone(),
            });
            curves.push(Curve {
                name: "cauchy_increment".to_string(),
                values: cert.cauchy_max_by_n.clone(),
            });
        }
        Err(CocycleError::NoInvariantVector { defect }) => {
            checks.push(Check::skipped(
                "vacuum_unit_product_form",
                format!("distinguished vector not invariant (defect {defect:.3e})"),
            ));
        }
        Err(CocycleError::NotProductForm { defect }) => {
            checks.push(Check::flag(
                "vacuum_unit_product_form",
                false,
                format!("image of delta (x) vacuum is entangled (defect {defect:.3e})"),
            ));
        }
        Err(e) => return Err(CliError::invalid(e.to_string())),
    }

    Ok((checks, curves, echo))
}

fn run_thm42(
    cfg: &ExperimentConfig,
    spec: &InstanceSpec,
    tol: &Tolerance,
) -> Result<CommandOutput, CliError> {
    let c = cocycle_instance(spec, cfg.seed, &cfg.dims, tol)?;
    let echo = cocycle_echo(&c);
    let mut checks = Vec::new();
    let mut curves = Vec::new();

    let z = compress_z(&c, tol).map_err(|e| CliError::invalid(e.to_string()))?;
    let cp_rep = match equivalence_report(&z, &c.delta, None, 1e-6, tol) {
        Ok(rep) => rep,
        Err(CpError::NotInvariant { defect }) => {
            return Err(CliError::invalid(format!(
                "distinguished vector is not invariant (defect {defect:.3e})"
            )))
        }
        Err(CpError::EquivalenceViolation { detail }) => {
            checks.push(Check::flag("d_e_agreement", false, detail));
            return Ok((checks, curves, echo));
        }
        Err(e) => return Err(CliError::invalid(e.to_string())),
    };

    if cp_rep.indeterminate {
        checks.push(Check::skipped(
            "d_e_agreement",
            format!("spectral gap {:.3e} below 1e-3", 1.0 - cp_rep.second_modulus),
        ));
    } else {
        checks.push(Check::flag(
            "d_e_agreement",
            cp_rep.is_ergodic == cp_rep.is_absorbing,
            format!(
                "(e) ergodic {} and (d) absorbing {}",
                cp_rep.is_ergodic, cp_rep.is_absorbing
            ),
        ));
    }
    checks.push(Check::bounded(
        "monotone_psd_slack",
        (-cp_rep.monotone_slack).max(0.0),
        1e-9,
    ));
    curves.push(Curve {
        name: "absorption_distance".to_string(),
        values: cp_rep.convergence_curve.clone(),
    });

    let summary = beurling_report(&c, 5, 1e-6, tol).map_err(|e| CliError::invalid(e.to_string()))?;
    checks.push(Check::bounded(
        "clause_restriction",
        summary.restriction_residual,
        100.0 * tol.residual_eps,
    ));

    if let Some(cert) = &summary.certificate {
        checks.push(Check::bounded(
            "cauchy_within_twice_delta",
            cert.cauchy_bound_violation.max(0.0),
            100.0 * tol.residual_eps,
        ));
        curves.push(Curve {
            name: "delta_distance".to_string(),
            values: cert.delta_curve.clone(),
        });
        curves.push(Curve {
            name: "cauchy_increment".to_string(),
            values: cert.cauchy_max_by_n.clone(),
        });
    }

    if cp_rep.indeterminate {
        checks.push(Check::skipped(
            "chain_coherence",
            "spectral gap too small to classify the chain",
        ));
    } else if cp_rep.is_ergodic {
        // Positive chain: (d)=(e)=true must propagate to (c), (b), (a).
        let cert = summary.certificate.as_ref();
        let convergent = cert.is_some_and(|ct| ct.verdict == ConvergenceVerdict::Convergent);
        let q_ok = cert.is_some_and(|ct| ct.q_defect <= 1e-6);
        if convergent && q_ok {
            checks.push(Check::bounded(
                "q_range_defect",
                cert.map_or(1.0, |ct| ct.q_defect),
                1e-6,
            ));
            checks.push(Check::bounded(
                "exactness_reconstruction",
                summary.conjugacy_residual.unwrap_or(1.0),
                1e-5,
            ));
            checks.push(Check::flag(
                "chain_coherence",
                summary.verdict,
                "(d),(e) positive and (a),(b),(c) certified",
            ));
            if let Some(gap) = summary.dense_cross_gap {
                checks.push(Check::bounded("dense_transfer_agreement", gap, 1e-9));
            }
            if let (Some(rank_gap), Some(align)) = (
                summary.invariant_state_rank_gap,
                summary.invariant_state_alignment,
            ) {
                checks.push(Check::bounded("invariant_state_rank_one_gap", rank_gap, 1e-6));
                checks.push(Check::bounded(
                    "invariant_state_alignment",
                    (1.0 - align).abs(),
                    1e-6,
                ));
            }
        } else {
            checks.push(Check::skipped(
                "chain_coherence",
                format!(
                    "ergodic instance but the horizon does not certify 1e-6 (defect {:.3e}); enlarge n_slots",
                    cert.map_or(f64::NAN, |ct| ct.convergence_defect)
                ),
            ));
        }
    } else {
        // Negative chain: nothing downstream may certify.
        let cert = summary.certificate.as_ref();
        let wrongly_certified = summary.verdict
            || cert.is_some_and(|ct| {
                ct.verdict == ConvergenceVerdict::Convergent && ct.q_defect <= 1e-6
            });
        checks.push(Check::flag(
            "chain_coherence",
            !wrongly_certified,
            "non-ergodic instance stays uncertified in (a), (b), (c)",
        ));
    }

    Ok((checks, curves, echo))
}

/// Renders the per-check lines the CLI prints.
pub fn summary_lines(report: &RunReport) -> Vec<String> {
    let mut lines = Vec::new();
    for check in &report.checks {
        let status = match check.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "SKIP",
        };
        let mut line = format!("{status} {}", check.name);
        if let (Some(v), Some(t)) = (check.value, check.threshold) {
            line.push_str(&format!(" value {v:.3e} threshold {t:.3e}"));
        }
        if let Some(note) = &check.note {
            line.push_str(&format!(" ({note})"));
        }
        lines.push(line);
    }
    lines.push(format!("VERDICT {}", report.verdict));
    lines
}
