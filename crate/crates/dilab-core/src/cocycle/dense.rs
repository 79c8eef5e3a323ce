//! Dense state vectors on `H (x) (C^m)^{(x) N}` and local gate application.
//!
//! Index layout: `idx = h * m^N + sum_k i_k * m^(N-k)`, slots numbered from
//! 1, slot 1 most significant among the slots. Dense representations are for
//! short horizons; long-horizon quantities go through the transfer algebra.

use crate::numeric::matrix::{dot, vec_norm, ComplexMatrix, C64};

#[derive(Debug, Clone)]
pub struct DenseState {
    pub d: usize,
    pub m: usize,
    pub n_slots: usize,
    pub data: Vec<C64>,
}

pub fn dense_dim(d: usize, m: usize, n_slots: usize) -> usize {
    d * m.pow(n_slots as u32)
}

impl DenseState {
    pub fn zero(d: usize, m: usize, n_slots: usize) -> Self {
        DenseState {
            d,
            m,
            n_slots,
            data: vec![C64::new(0.0, 0.0); dense_dim(d, m, n_slots)],
        }
    }

    /// Product vector `h (x) e_{l_1} (x) ... (x) e_{l_N}` where all slots are
    /// vacuum except the listed `(slot, level)` excitations.
    pub fn product(
        d: usize,
        m: usize,
        n_slots: usize,
        h: &[C64],
        excitations: &[(usize, usize)],
    ) -> Self {
        assert_eq!(h.len(), d);
        let mut state = Self::zero(d, m, n_slots);
        let mut fock_index = 0usize;
        for &(slot, level) in excitations {
            assert!(slot >= 1 && slot <= n_slots && level < m);
            fock_index += level * m.pow((n_slots - slot) as u32);
        }
        let fock_size = m.pow(n_slots as u32);
        for (a, &amp) in h.iter().enumerate() {
            state.data[a * fock_size + fock_index] = amp;
        }
        state
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.data)
    }

    pub fn dot(&self, other: &DenseState) -> C64 {
        dot(&self.data, &other.data)
    }

    pub fn distance(&self, other: &DenseState) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, s: C64) {
        for z in self.data.iter_mut() {
            *z *= s;
        }
    }

    pub fn sub(&self, other: &DenseState) -> DenseState {
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a - b)
            .collect();
        DenseState {
            d: self.d,
            m: self.m,
            n_slots: self.n_slots,
            data,
        }
    }

    fn slot_stride(&self, slot: usize) -> usize {
        self.m.pow((self.n_slots - slot) as u32)
    }

    /// Applies a `dm x dm` gate coupling `H` with one slot; basis order of
    /// the gate is `(h, slot) -> h*m + i`.
    pub fn h_slot_gate(&self, u: &ComplexMatrix, slot: usize) -> DenseState {
        assert!(slot >= 1 && slot <= self.n_slots, "slot out of range");
        let dm = self.d * self.m;
        assert_eq!(u.rows(), dm);
        let stride_h = self.m.pow(self.n_slots as u32);
        let stride_s = self.slot_stride(slot);
        let mut out = self.clone();
        let mut gathered = vec![C64::new(0.0, 0.0); dm];
        for base in 0..self.data.len() {
            if (base / stride_h) != 0 || (base / stride_s) % self.m != 0 {
                continue;
            }
            for a in 0..self.d {
                for i in 0..self.m {
                    gathered[a * self.m + i] = self.data[base + a * stride_h + i * stride_s];
                }
            }
            for a in 0..self.d {
                for i in 0..self.m {
                    let mut acc = C64::new(0.0, 0.0);
                    let row = a * self.m + i;
                    for (col, &g) in gathered.iter().enumerate() {
                        acc += u.at(row, col) * g;
                    }
                    out.data[base + a * stride_h + i * stride_s] = acc;
                }
            }
        }
        out
    }

    /// Applies an `m^w x m^w` operator on the contiguous slots
    /// `first_slot .. first_slot + w - 1`.
    pub fn fock_local_op(&self, op: &ComplexMatrix, first_slot: usize) -> DenseState {
        let w = (op.rows() as f64).log(self.m as f64).round() as usize;
        assert_eq!(op.rows(), self.m.pow(w as u32), "operator width mismatch");
        assert!(first_slot >= 1 && first_slot + w - 1 <= self.n_slots);
        let stride_low = self.slot_stride(first_slot + w - 1);
        let window = self.m.pow(w as u32);
        let mut out = self.clone();
        let mut gathered = vec![C64::new(0.0, 0.0); window];
        for base in 0..self.data.len() {
            if (base / stride_low) % window != 0 {
                continue;
            }
            for k in 0..window {
                gathered[k] = self.data[base + k * stride_low];
            }
            for row in 0..window {
                let mut acc = C64::new(0.0, 0.0);
                for (col, &g) in gathered.iter().enumerate() {
                    acc += op.at(row, col) * g;
                }
                out.data[base + row * stride_low] = acc;
            }
        }
        out
    }

    /// Applies an `m^2 x m^2` operator on two (possibly non-adjacent) slots;
    /// basis order `(i_a, i_b) -> i_a*m + i_b`. Used by non-adapted test
    /// fixtures.
    pub fn two_slot_op(&self, op: &ComplexMatrix, slot_a: usize, slot_b: usize) -> DenseState {
        assert!(slot_a != slot_b);
        let stride_a = self.slot_stride(slot_a);
        let stride_b = self.slot_stride(slot_b);
        let m = self.m;
        assert_eq!(op.rows(), m * m);
        let mut out = self.clone();
        let mut gathered = vec![C64::new(0.0, 0.0); m * m];
        for base in 0..self.data.len() {
            if (base / stride_a) % m != 0 || (base / stride_b) % m != 0 {
                continue;
            }
            for ia in 0..m {
                for ib in 0..m {
                    gathered[ia * m + ib] = self.data[base + ia * stride_a + ib * stride_b];
                }
            }
            for ia in 0..m {
                for ib in 0..m {
                    let row = ia * m + ib;
                    let mut acc = C64::new(0.0, 0.0);
                    for (col, &g) in gathered.iter().enumerate() {
                        acc += op.at(row, col) * g;
                    }
                    out.data[base + ia * stride_a + ib * stride_b] = acc;
                }
            }
        }
        out
    }

    /// Inner product with `delta (x) fock_part` summed out: returns the
    /// `H`-component overlap matrix piece `(<delta| (x) I) psi` as a dense
    /// Fock vector.
    pub fn h_compress(&self, delta: &[C64]) -> Vec<C64> {
        assert_eq!(delta.len(), self.d);
        let fock_size = self.m.pow(self.n_slots as u32);
        let mut out = vec![C64::new(0.0, 0.0); fock_size];
        for (a, &da) in delta.iter().enumerate() {
            for k in 0..fock_size {
                out[k] += da.conj() * self.data[a * fock_size + k];
            }
        }
        out
    }
}

/// Forward cocycle product `u_n = u_[1] ... u_[n]` applied to a dense state:
/// the slot-n gate acts first.
pub fn apply_cocycle_product(state: &DenseState, u: &ComplexMatrix, n: usize) -> DenseState {
    let mut out = state.clone();
    for slot in (1..=n).rev() {
        out = out.h_slot_gate(u, slot);
    }
    out
}

/// Adjoint product `u*_n = u*_[n] ... u*_[1]`: the slot-1 gate acts first.
pub fn apply_adjoint_cocycle_product(
    state: &DenseState,
    u: &ComplexMatrix,
    n: usize,
) -> DenseState {
    let adj = u.adjoint();
    let mut out = state.clone();
    for slot in 1..=n {
        out = out.h_slot_gate(&adj, slot);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::matrix::basis_vec;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn product_state_indexing_places_excitations() {
        let s = DenseState::product(2, 2, 3, &basis_vec(2, 1), &[(2, 1)]);
        // h = 1, slots (0, 1, 0): idx = 1*8 + 0*4 + 1*2 + 0 = 10.
        assert!((s.data[10] - c(1.0)).norm() < 1e-15);
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gate_on_one_slot_leaves_others_alone() {
        let m = 2;
        let flip = ComplexMatrix::from_real_rows(&[
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
        ]);
        // flip swaps the H qubit, identity on the slot.
        let s = DenseState::product(2, m, 2, &basis_vec(2, 0), &[(2, 1)]);
        let out = s.h_slot_gate(&flip, 1);
        let expected = DenseState::product(2, m, 2, &basis_vec(2, 1), &[(2, 1)]);
        assert!(out.distance(&expected) < 1e-14);
    }

    #[test]
    fn gamma_shift_embedding_is_multiplicative_and_unital() {
        // The slot-shift endomorphism: y on slot 1 embedded at slot k+1.
        let m = 2;
        let y1 = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let y2 = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
        let prod = y1.matmul(&y2);
        let s = DenseState::product(1, m, 3, &[c(1.0)], &[(2, 1), (3, 1)]);
        // gamma_1(y1 y2) = gamma_1(y1) gamma_1(y2) on states.
        let lhs = s.fock_local_op(&prod, 2);
        let rhs = s.fock_local_op(&y2, 2).fock_local_op(&y1, 2);
        assert!(lhs.distance(&rhs) < 1e-14);
        // gamma(I) = I.
        let id = ComplexMatrix::identity(2);
        assert!(s.fock_local_op(&id, 2).distance(&s) < 1e-15);
    }

    #[test]
    fn cocycle_products_compose_through_the_shift() {
        // u_{n+s} = u_n sigma_n(u_s) on states, checked densely for a
        // non-commuting gate.
        let s3 = 0.75f64.sqrt();
        let u = ComplexMatrix::from_real_rows(&[
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.5, s3, 0.0],
            vec![0.0, -s3, 0.5, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ]);
        let state = DenseState::product(2, 2, 4, &basis_vec(2, 1), &[(2, 1)]);
        let full = apply_cocycle_product(&state, &u, 4);
        // sigma_2(u_2) acts on slots 3, 4; then u_2 on slots 1, 2.
        let mut shifted = state.clone();
        for slot in (3..=4).rev() {
            shifted = shifted.h_slot_gate(&u, slot);
        }
        let composed = apply_cocycle_product(&shifted, &u, 2);
        assert!(full.distance(&composed) < 1e-13);
    }

    #[test]
    fn adjoint_product_inverts_the_forward_product() {
        let s3 = 0.75f64.sqrt();
        let u = ComplexMatrix::from_real_rows(&[
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.5, s3, 0.0],
            vec![0.0, -s3, 0.5, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ]);
        let state = DenseState::product(2, 2, 3, &basis_vec(2, 1), &[(1, 1)]);
        let there = apply_cocycle_product(&state, &u, 3);
        let back = apply_adjoint_cocycle_product(&there, &u, 3);
        assert!(back.distance(&state) < 1e-13);
    }
}
