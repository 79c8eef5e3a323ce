use dilab_core::cocycle::{amplitude_damping_cocycle, convergence_analyze, gauge_modify};
use dilab_core::Tolerance;

fn main() {
    let tol = Tolerance::default();
    let c = amplitude_damping_cocycle(0.75, 40, &tol);
    let g = gauge_modify(&c, &tol).unwrap();
    let cert = convergence_analyze(&g, 3, 1e-6, &tol).unwrap();
    for (i, v) in cert.delta_curve.iter().enumerate().skip(14).take(26) {
        println!("delta[{}] = {:.6e}", i + 1, v);
    }
    for (pi, curve) in cert.per_probe_delta.iter().enumerate().take(12) {
        println!("probe {pi}: {:?} first8 {:?}", cert.probes[pi].excitation, &curve[..8].iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>());
    }
}
