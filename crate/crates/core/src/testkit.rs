//! Deterministic random data for stress suites and the command-line
//! self-test: a tiny seeded generator plus samplers for algebra elements
//! and tensors with controlled support, amplitude, and arithmetic
//! properties (exact dyadic coefficients, Neumann-dominated invertibles).
//!
//! Everything here is reproducible from a `u64` seed, so failures in
//! randomized suites can be replayed exactly.

use crate::algebra::{AlgebraElement, LatticePoint, C64};
use crate::forms::{OneForm, Tensor2};

/// SplitMix64: a small, high-quality 64-bit generator with a one-word
/// state, sufficient for test-data sampling.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 random mantissa bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in [lo, hi], both ends included.
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo + 1) as u64;
        lo + (self.next_u64() % span) as i64
    }

    /// Uniform usize in [0, n).
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

fn random_mode(rng: &mut SplitMix64, dim: usize, radius: i64) -> LatticePoint {
    LatticePoint((0..dim).map(|_| rng.range_i64(-radius, radius)).collect())
}

/// Random element with up to `max_terms` modes inside the ℓ¹ ball of the
/// given radius and coefficients bounded by `amplitude`.
pub fn random_element(
    rng: &mut SplitMix64,
    dim: usize,
    radius: i64,
    max_terms: usize,
    amplitude: f64,
) -> AlgebraElement {
    let mut e = AlgebraElement::zero(dim);
    let n = 1 + rng.below(max_terms.max(1));
    for _ in 0..n {
        let m = random_mode(rng, dim, radius);
        let c = C64::new(
            rng.range_f64(-amplitude, amplitude),
            rng.range_f64(-amplitude, amplitude),
        );
        e.insert(m, c);
    }
    e
}

/// Random element whose coefficients are dyadics k/2²⁰ with |k| ≤ 2²⁰, so
/// sums, differences, and halvings of a few of them stay exact in IEEE
/// arithmetic. Used where tests assert bitwise identities.
pub fn random_dyadic_element(
    rng: &mut SplitMix64,
    dim: usize,
    radius: i64,
    max_terms: usize,
) -> AlgebraElement {
    const DEN: f64 = (1u64 << 20) as f64;
    let mut e = AlgebraElement::zero(dim);
    let n = 1 + rng.below(max_terms.max(1));
    for _ in 0..n {
        let m = random_mode(rng, dim, radius);
        let re = rng.range_i64(-(1 << 20), 1 << 20) as f64 / DEN;
        let im = rng.range_i64(-(1 << 20), 1 << 20) as f64 / DEN;
        e.insert(m, C64::new(re, im));
    }
    e
}

/// Random invertible element λ + x with scalar part λ ∈ [2, 3] and
/// perturbation confined to support radius ≤ 2 with ‖x‖₁ ≤ ½|λ| — well
/// inside the geometric-series regime, whatever the deformation.
pub fn random_dominated_element(rng: &mut SplitMix64, dim: usize) -> AlgebraElement {
    let lambda = rng.range_f64(2.0, 3.0);
    let mut x = AlgebraElement::zero(dim);
    let n = 1 + rng.below(4);
    for _ in 0..n {
        let mut m = random_mode(rng, dim, 2);
        if m == LatticePoint::zero(dim) {
            m = LatticePoint::axis(dim, rng.below(dim));
        }
        let c = C64::new(rng.range_f64(-1.0, 1.0), rng.range_f64(-1.0, 1.0));
        x.insert(m, c);
    }
    let norm = x.l1norm();
    let target = 0.4 * lambda;
    if norm > 0.0 {
        x = x.scale(C64::new(target / norm, 0.0));
    }
    AlgebraElement::scalar(dim, C64::new(lambda, 0.0)).add(&x)
}

/// Random one-form with `random_element` coefficients in every slot.
pub fn random_one_form(
    rng: &mut SplitMix64,
    rank: usize,
    dim: usize,
    radius: i64,
    max_terms: usize,
    amplitude: f64,
) -> OneForm {
    let mut w = OneForm::zero(rank, dim);
    for i in 0..rank {
        w.set_coeff(i, random_element(rng, dim, radius, max_terms, amplitude));
    }
    w
}

/// Random tensor square with `random_element` coefficients in every slot.
pub fn random_tensor2(
    rng: &mut SplitMix64,
    rank: usize,
    dim: usize,
    radius: i64,
    max_terms: usize,
    amplitude: f64,
) -> Tensor2 {
    let mut t = Tensor2::zero(rank, dim);
    for i in 0..rank {
        for j in 0..rank {
            t.set(i, j, random_element(rng, dim, radius, max_terms, amplitude));
        }
    }
    t
}

/// Random tensor square with exact dyadic coefficients.
pub fn random_dyadic_tensor2(
    rng: &mut SplitMix64,
    rank: usize,
    dim: usize,
    radius: i64,
    max_terms: usize,
) -> Tensor2 {
    let mut t = Tensor2::zero(rank, dim);
    for i in 0..rank {
        for j in 0..rank {
            t.set(i, j, random_dyadic_element(rng, dim, radius, max_terms));
        }
    }
    t
}
