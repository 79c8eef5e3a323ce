//! Kraus-chain contractions for long-horizon cocycle analysis.
//!
//! Applying the adjoint cocycle to a probe `xi (x) (local excitation) (x)
//! vacuum` produces a walk state: the coefficient along a slot path is a
//! product of `d x d` interaction blocks applied to `xi`. Inner products of
//! two walk states therefore contract slot by slot through maps
//! `X -> sum_i P_i^H X Q_i` on `d x d` carriers, which keeps every
//! certificate quantity polynomial in the horizon instead of exponential.

use crate::numeric::matrix::{dot, ComplexMatrix, C64};

/// Interaction blocks of a unitary on `H (x) C^m`, indexed by source and
/// emitted slot level.
///
/// `backward[l][i] = (I (x) <e_i|) u* (I (x) |e_l>)` drives adjoint-product
/// walks, `forward[l][i] = (I (x) <e_i|) u (I (x) |e_l>)` forward ones.
#[derive(Debug, Clone)]
pub struct KrausFamilies {
    pub d: usize,
    pub m: usize,
    pub backward: Vec<Vec<ComplexMatrix>>,
    pub forward: Vec<Vec<ComplexMatrix>>,
}

impl KrausFamilies {
    pub fn from_interaction(u: &ComplexMatrix, d: usize, m: usize) -> Self {
        assert_eq!(u.rows(), d * m);
        let mut backward = Vec::with_capacity(m);
        let mut forward = Vec::with_capacity(m);
        for l in 0..m {
            let mut b_row = Vec::with_capacity(m);
            let mut f_row = Vec::with_capacity(m);
            for i in 0..m {
                b_row.push(ComplexMatrix::from_fn(d, d, |a, b| {
                    u.at(b * m + l, a * m + i).conj()
                }));
                f_row.push(ComplexMatrix::from_fn(d, d, |a, b| u.at(a * m + i, b * m + l)));
            }
            backward.push(b_row);
            forward.push(f_row);
        }
        KrausFamilies {
            d,
            m,
            backward,
            forward,
        }
    }

    /// Heisenberg transfer `X -> sum_i B_i^H X B_i` over the vacuum family.
    pub fn vacuum_transfer(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.d, self.d);
        for b in &self.backward[0] {
            out = &out + &b.adjoint().matmul(x).matmul(b);
        }
        out
    }
}

/// One side of a slot contraction: either a walk with the given source
/// level, or a fixed (spectator) basis level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Walk(usize),
    Fixed(usize),
}

/// Contracts a chain of slots, innermost last, between walk boundary vectors
/// `bra_h` and `ket_h`, starting from `seed` beyond the last slot. Returns
/// `None` when mismatched spectators force the overlap to vanish.
pub fn chain_eval(
    fam: &KrausFamilies,
    families: &[Vec<ComplexMatrix>],
    slots: &[(Side, Side)],
    seed: &ComplexMatrix,
    bra_h: &[C64],
    ket_h: &[C64],
) -> C64 {
    let _ = fam;
    let mut x = seed.clone();
    for &(bra, ket) in slots.iter().rev() {
        x = match (bra, ket) {
            (Side::Walk(lb), Side::Walk(lk)) => {
                let mut acc = ComplexMatrix::zeros(x.rows(), x.cols());
                let nb = &families[lb];
                let nk = &families[lk];
                for i in 0..nb.len() {
                    acc = &acc + &nb[i].adjoint().matmul(&x).matmul(&nk[i]);
                }
                acc
            }
            (Side::Walk(lb), Side::Fixed(lev)) => families[lb][lev].adjoint().matmul(&x),
            (Side::Fixed(lev), Side::Walk(lk)) => x.matmul(&families[lk][lev]),
            (Side::Fixed(a), Side::Fixed(b)) => {
                if a == b {
                    x
                } else {
                    return C64::new(0.0, 0.0);
                }
            }
        };
    }
    dot(bra_h, &x.matvec(ket_h))
}

/// A probe vector `xi (x) vacuum` with at most one slot excitation.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub h: Vec<C64>,
    /// `(slot, level)` with slot >= 1 and 1 <= level < m.
    pub excitation: Option<(usize, usize)>,
}

impl Probe {
    pub fn source_at(&self, slot: usize) -> usize {
        match self.excitation {
            Some((s, l)) if s == slot => l,
            _ => 0,
        }
    }
}

/// `<q u*_n v, q u*_n w>` with `q` the projection onto `delta (x) Fock`,
/// additionally projecting slots beyond `n` onto the vacuum (the distance
/// target lives in `delta (x) F_{n]}`).
pub fn q_overlap(
    fam: &KrausFamilies,
    delta: &[C64],
    n: usize,
    bra: &Probe,
    ket: &Probe,
) -> C64 {
    // Spectator excitations beyond the walk both break the q-window
    // projection: the overlap vanishes unless neither side has one.
    if bra.excitation.is_some_and(|(s, _)| s > n) || ket.excitation.is_some_and(|(s, _)| s > n) {
        return C64::new(0.0, 0.0);
    }
    let d = fam.d;
    let q_delta = ComplexMatrix::from_fn(d, d, |i, j| delta[i] * delta[j].conj());
    let slots: Vec<(Side, Side)> = (1..=n)
        .map(|k| (Side::Walk(bra.source_at(k)), Side::Walk(ket.source_at(k))))
        .collect();
    chain_eval(fam, &fam.backward, &slots, &q_delta, &bra.h, &ket.h)
}

/// `<u*_n v, u*_n w>`; equals `<v, w>` for a unitary interaction and is used
/// as a machinery check.
pub fn plain_overlap(fam: &KrausFamilies, n: usize, bra: &Probe, ket: &Probe) -> C64 {
    match (bra.excitation, ket.excitation) {
        (Some((s, l)), other) if s > n => {
            if other != Some((s, l)) {
                return C64::new(0.0, 0.0);
            }
        }
        (other, Some((s, l))) if s > n => {
            if other != Some((s, l)) {
                return C64::new(0.0, 0.0);
            }
        }
        _ => {}
    }
    let slots: Vec<(Side, Side)> = (1..=n)
        .map(|k| (Side::Walk(bra.source_at(k)), Side::Walk(ket.source_at(k))))
        .collect();
    chain_eval(
        fam,
        &fam.backward,
        &slots,
        &ComplexMatrix::identity(fam.d),
        &bra.h,
        &ket.h,
    )
}

/// `<u*_{n+s} v, u*_n v>` for the Cauchy increments
/// `||(u*_{n+s} - u*_n) v||^2 = 2||v||^2 - 2 Re <...>`.
pub fn cauchy_overlap(fam: &KrausFamilies, n: usize, s: usize, v: &Probe) -> C64 {
    let mut slots: Vec<(Side, Side)> = Vec::with_capacity(n + s);
    for k in 1..=n {
        let src = v.source_at(k);
        slots.push((Side::Walk(src), Side::Walk(src)));
    }
    for k in (n + 1)..=(n + s) {
        let src = v.source_at(k);
        // The shorter walk keeps the excitation (or vacuum) as a spectator.
        slots.push((Side::Walk(src), Side::Fixed(src)));
    }
    // Excitations beyond n+s are spectators on both sides.
    chain_eval(
        fam,
        &fam.backward,
        &slots,
        &ComplexMatrix::identity(fam.d),
        &v.h,
        &v.h,
    )
}

/// `<u*_{s_star} u_n v, u*_{n+s_star} u_n v>`: by the cocycle identity both
/// factors reduce to walks over slots `n+1 ..= n+s_star`, so the
/// reconstruction residual `||u_n v - w* sigma_n(w) v||` equals
/// `sqrt(2 - 2 Re <...>)` for unit probes.
pub fn exactness_overlap(fam: &KrausFamilies, n: usize, s_star: usize, v: &Probe) -> C64 {
    let mut slots: Vec<(Side, Side)> = Vec::with_capacity(s_star);
    for k in (n + 1)..=s_star {
        let src = v.source_at(k);
        slots.push((Side::Walk(src), Side::Walk(src)));
    }
    for k in (s_star.max(n) + 1)..=(n + s_star) {
        let src = v.source_at(k);
        slots.push((Side::Fixed(src), Side::Walk(src)));
    }
    chain_eval(
        fam,
        &fam.backward,
        &slots,
        &ComplexMatrix::identity(fam.d),
        &v.h,
        &v.h,
    )
}

/// Coefficient `<delta (x) basis-product, u*_n v>` where the basis product
/// has the given `(slot, level)` excitations (vacuum elsewhere).
pub fn limit_coefficient(
    fam: &KrausFamilies,
    delta: &[C64],
    n: usize,
    window: &[(usize, usize)],
    v: &Probe,
) -> C64 {
    if v.excitation.is_some_and(|(s, _)| s > n) {
        // The spectator must be matched by the window exactly.
        let spect = v.excitation.unwrap();
        if !window.contains(&spect) {
            return C64::new(0.0, 0.0);
        }
    }
    let level_at = |slot: usize| -> usize {
        window
            .iter()
            .find(|&&(s, _)| s == slot)
            .map_or(0, |&(_, l)| l)
    };
    let slots: Vec<(Side, Side)> = (1..=n)
        .map(|k| (Side::Fixed(level_at(k)), Side::Walk(v.source_at(k))))
        .collect();
    chain_eval(
        fam,
        &fam.backward,
        &slots,
        &ComplexMatrix::identity(fam.d),
        delta,
        &v.h,
    )
}
