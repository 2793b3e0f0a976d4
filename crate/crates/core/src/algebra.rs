//! Arithmetic of the twisted group algebra ℂ[ℤⁿ]_θ.
//!
//! Elements are finitely supported Fourier-coefficient maps on the lattice
//! ℤⁿ. The product is the twisted convolution determined by the bicharacter
//! χ_θ(r, s) = exp(πi ⟨r, θ s⟩) of a real skew-symmetric matrix θ: monomials
//! W_m (m ∈ ℤⁿ) multiply as W_r · W_s = χ_θ(r, s) W_{r+s}, so for n = 2 the
//! generators U = W_{(1,0)} and V = W_{(0,1)} satisfy U·V = e^{2πiθ₁₂} V·U.
//! Setting θ = 0 recovers ordinary Laurent-polynomial arithmetic.
//!
//! Canonical form drops exactly-zero coefficients and nothing else, so
//! algebraic identities are asserted with explicit tolerances instead of
//! being silently rounded away.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = Complex64;

/// Lattice mode m ∈ ℤⁿ labelling the monomial W_m.
///
/// Ordering is lexicographic (derived from `Vec<i64>`), which fixes the
/// canonical term order everywhere an element is iterated or serialized.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    /// The zero mode of dimension `n` (labels the unit of the algebra).
    pub fn zero(n: usize) -> Self {
        LatticePoint(vec![0; n])
    }

    /// The j-th standard basis mode of dimension `n`.
    pub fn axis(n: usize, j: usize) -> Self {
        let mut m = vec![0; n];
        m[j] = 1;
        LatticePoint(m)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn neg(&self) -> Self {
        LatticePoint(self.0.iter().map(|x| -x).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        LatticePoint(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        LatticePoint(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// Chebyshev radius max_j |m_j|, used for window checks.
    pub fn radius(&self) -> i64 {
        self.0.iter().map(|x| x.abs()).max().unwrap_or(0)
    }
}

/// Finitely supported coefficient map m ↦ a_m representing Σ_m a_m W_m.
///
/// Two elements are equal iff their canonical forms are identical; the
/// canonical form stores no exactly-zero coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    dim: usize,
    terms: BTreeMap<LatticePoint, C64>,
}

impl AlgebraElement {
    /// The zero element of ℂ[ℤⁿ]_θ with lattice dimension `dim`.
    pub fn zero(dim: usize) -> Self {
        AlgebraElement {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// The multiplicative unit W_0.
    pub fn one(dim: usize) -> Self {
        Self::scalar(dim, C64::new(1.0, 0.0))
    }

    /// The scalar c·W_0.
    pub fn scalar(dim: usize, c: C64) -> Self {
        let mut e = Self::zero(dim);
        e.insert(LatticePoint::zero(dim), c);
        e
    }

    /// The monomial c·W_m.
    pub fn monomial(mode: LatticePoint, c: C64) -> Self {
        let mut e = Self::zero(mode.dim());
        e.insert(mode, c);
        e
    }

    /// The j-th generator W_{axis j} (U is axis 0, V is axis 1 for n = 2).
    pub fn generator(dim: usize, j: usize) -> Result<Self> {
        if j >= dim {
            return Err(Error::IndexOutOfRange { index: j, dim });
        }
        Ok(Self::monomial(
            LatticePoint::axis(dim, j),
            C64::new(1.0, 0.0),
        ))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of stored (nonzero) terms.
    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient at `mode` (zero when absent).
    pub fn coeff(&self, mode: &LatticePoint) -> C64 {
        self.terms
            .get(mode)
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    /// Terms in lexicographic mode order.
    pub fn terms(&self) -> impl Iterator<Item = (&LatticePoint, &C64)> {
        self.terms.iter()
    }

    /// Adds `c` to the coefficient at `mode`, dropping the term if the result
    /// is exactly zero.
    pub fn insert(&mut self, mode: LatticePoint, c: C64) {
        debug_assert_eq!(mode.dim(), self.dim);
        let entry = self.terms.entry(mode);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                if c != C64::new(0.0, 0.0) {
                    v.insert(c);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == C64::new(0.0, 0.0) {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    /// Coefficientwise sum. Panics on dimension mismatch (programming error;
    /// the fallible surface lives on [`DeformationMatrix`]).
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "algebra element dimension mismatch");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), *c);
        }
        out
    }

    /// Coefficientwise difference.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Scalar multiple c·a.
    pub fn scale(&self, c: C64) -> Self {
        let mut out = Self::zero(self.dim);
        for (m, a) in &self.terms {
            out.insert(m.clone(), c * a);
        }
        out
    }

    /// Involution: the coefficient of a* at m is conj(a_{−m}). Monomials are
    /// unitary (W_m* = W_{−m}) because χ_θ(m, −m) = 1 for skew θ.
    pub fn star(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for (m, c) in &self.terms {
            out.insert(m.neg(), c.conj());
        }
        out
    }

    /// The faithful trace τ(Σ a_m W_m) = a_0.
    pub fn trace(&self) -> C64 {
        self.coeff(&LatticePoint::zero(self.dim))
    }

    /// ℓ¹ norm Σ_m |a_m|; submultiplicative under the twisted product since
    /// the bicharacter has modulus one.
    pub fn l1norm(&self) -> f64 {
        // Explicit fold from +0.0: `Iterator::sum` seeds f64 sums with -0.0,
        // which would surface as a negative-zero norm for empty supports.
        self.terms.values().fold(0.0, |acc, c| acc + c.norm())
    }

    /// Largest Chebyshev mode radius in the support (0 for the zero element).
    pub fn support_radius(&self) -> i64 {
        self.terms.keys().map(|m| m.radius()).max().unwrap_or(0)
    }
}

/// Certified inverse produced by [`DeformationMatrix::invert`].
#[derive(Debug, Clone)]
pub struct Inverse {
    /// The (possibly truncated) inverse element.
    pub value: AlgebraElement,
    /// Guaranteed bound on ‖a · value − 1‖₁ from the geometric tail
    /// (zero for the exact monomial case).
    pub tail_bound: f64,
    /// Number of Neumann terms summed (1 for the monomial case).
    pub terms: usize,
}

/// Skew-symmetric deformation matrix θ ∈ ℝ^{n×n}. Owns every operation that
/// depends on the twist: the bicharacter, the product, and inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationMatrix {
    n: usize,
    theta: Vec<f64>, // row-major n×n
}

impl DeformationMatrix {
    /// Builds θ from a row-major n×n slice, requiring θᵀ = −θ exactly as
    /// stored (the diagonal must be exactly zero).
    pub fn new(n: usize, theta: &[f64]) -> Result<Self> {
        if theta.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: theta.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                if theta[i * n + j] != -theta[j * n + i] {
                    return Err(Error::NotSkewSymmetric { row: i, col: j });
                }
            }
        }
        Ok(DeformationMatrix {
            n,
            theta: theta.to_vec(),
        })
    }

    /// The undeformed (commutative) case θ = 0.
    pub fn zero(n: usize) -> Self {
        DeformationMatrix {
            n,
            theta: vec![0.0; n * n],
        }
    }

    /// The 2×2 matrix [[0, θ], [−θ, 0]] used by the two-generator algebra
    /// with U·V = e^{2πiθ} V·U.
    pub fn two_generator(theta: f64) -> Self {
        DeformationMatrix {
            n: 2,
            theta: vec![0.0, theta, -theta, 0.0],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.theta[i * self.n + j]
    }

    /// χ_θ(r, s) = exp(πi ⟨r, θ s⟩); modulus exactly one up to rounding.
    pub fn bicharacter(&self, r: &LatticePoint, s: &LatticePoint) -> Result<C64> {
        if r.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: r.dim(),
            });
        }
        if s.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: s.dim(),
            });
        }
        let mut dot = 0.0;
        for i in 0..self.n {
            let mut row = 0.0;
            for j in 0..self.n {
                row += self.entry(i, j) * s.0[j] as f64;
            }
            dot += r.0[i] as f64 * row;
        }
        Ok(C64::from_polar(1.0, PI * dot))
    }

    /// Twisted product Σ_{r,s} χ_θ(r, s) a_r b_s W_{r+s}.
    pub fn mul(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_dim(a)?;
        self.check_dim(b)?;
        let mut out = AlgebraElement::zero(self.n);
        for (r, ar) in a.terms() {
            for (s, bs) in b.terms() {
                let chi = self.bicharacter(r, s)?;
                out.insert(r.add(s), chi * ar * bs);
            }
        }
        Ok(out)
    }

    /// Certified inversion. Exactly two classes are supported:
    ///
    /// 1. a = λ·W_m with λ ≠ 0: the exact inverse λ⁻¹·W_{−m}.
    /// 2. a = λ(1 + x) where λ = a_0 ≠ 0 and ρ = ‖x‖₁ < 1: the truncated
    ///    Neumann series λ⁻¹ Σ_{t<T} (−x)^t with T the smallest count whose
    ///    geometric tail ρ^T is ≤ `eps`. Then ‖a · inverse − 1‖₁ = ‖x^T‖₁ ≤ ρ^T.
    ///
    /// Anything else is refused: a wrong inverse is worse than no inverse.
    pub fn invert(
        &self,
        a: &AlgebraElement,
        eps: f64,
        max_terms: usize,
    ) -> Result<Inverse> {
        self.check_dim(a)?;
        if a.is_zero() {
            return Err(Error::NotInvertible {
                reason: "the zero element has no inverse".into(),
            });
        }
        if a.support_len() == 1 {
            let (m, c) = a.terms().next().unwrap();
            // W_m · W_{−m} = χ(m, −m)·W_0 = W_0 since ⟨m, θm⟩ = 0 for skew θ.
            let inv = AlgebraElement::monomial(m.neg(), C64::new(1.0, 0.0) / c);
            return Ok(Inverse {
                value: inv,
                tail_bound: 0.0,
                terms: 1,
            });
        }
        let lambda = a.trace();
        if lambda == C64::new(0.0, 0.0) {
            return Err(Error::NotInvertible {
                reason: "zero coefficient at the unit mode and support is not a single monomial"
                    .into(),
            });
        }
        // x = a/λ − 1, assembled directly from the nonzero modes so the unit
        // coefficient cancels exactly.
        let mut x = AlgebraElement::zero(self.n);
        for (m, c) in a.terms() {
            if m.0.iter().all(|&v| v == 0) {
                continue;
            }
            x.insert(m.clone(), c / lambda);
        }
        let rho = x.l1norm();
        if rho >= 1.0 {
            return Err(Error::NotInvertible {
                reason: format!(
                    "Neumann dominance fails: l1 ratio {rho:.6} is not below 1"
                ),
            });
        }
        // Smallest T with ρ^T ≤ eps.
        let needed = if rho == 0.0 {
            1
        } else {
            (eps.ln() / rho.ln()).ceil().max(1.0) as usize
        };
        if needed > max_terms {
            return Err(Error::ToleranceUnreachable {
                eps,
                needed,
                max_terms,
            });
        }
        let minus_x = x.scale(C64::new(-1.0, 0.0));
        let mut sum = AlgebraElement::one(self.n);
        let mut power = AlgebraElement::one(self.n);
        for _ in 1..needed {
            power = self.mul(&power, &minus_x)?;
            sum = sum.add(&power);
        }
        let value = sum.scale(C64::new(1.0, 0.0) / lambda);
        Ok(Inverse {
            value,
            tail_bound: rho.powi(needed as i32),
            terms: needed,
        })
    }

    fn check_dim(&self, a: &AlgebraElement) -> Result<()> {
        if a.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: a.dim(),
            });
        }
        Ok(())
    }
}

/// Lie-bracket structure constants c^k_{ij} of a derivation family,
/// antisymmetric in (i, j). Retained as metadata by the trivial rule.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    n: usize,
    c: Vec<f64>, // ((k·n)+i)·n+j
}

impl StructureConstants {
    pub fn new(n: usize, c: &[f64]) -> Result<Self> {
        if c.len() != n * n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n * n,
                found: c.len(),
            });
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if c[(k * n + i) * n + j] != -c[(k * n + j) * n + i] {
                        return Err(Error::AsymmetricMetric { row: i, col: j });
                    }
                }
            }
        }
        Ok(StructureConstants { n, c: c.to_vec() })
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[(k * self.n + i) * self.n + j]
    }
}

/// How the derivation ∂_j acts on algebra elements.
#[derive(Debug, Clone, PartialEq)]
pub enum DerivationRule {
    /// ∂_j scales the coefficient at mode m by i·m_j, so ∂_j(W_m) = i m_j W_m.
    /// The family commutes: ∂_i ∂_j = ∂_j ∂_i.
    Lattice,
    /// ∂_j kills every element of the (scalar) coefficient algebra; the
    /// bracket structure constants of the underlying derivation family are
    /// kept as metadata only.
    Trivial {
        structure_constants: StructureConstants,
    },
}

/// Applies the derivation ∂_j under `rule`.
pub fn derive(rule: &DerivationRule, j: usize, a: &AlgebraElement) -> Result<AlgebraElement> {
    match rule {
        DerivationRule::Lattice => {
            if j >= a.dim() {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    dim: a.dim(),
                });
            }
            let mut out = AlgebraElement::zero(a.dim());
            for (m, c) in a.terms() {
                out.insert(m.clone(), c * C64::new(0.0, m.0[j] as f64));
            }
            Ok(out)
        }
        DerivationRule::Trivial { .. } => Ok(AlgebraElement::zero(a.dim())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    fn u() -> AlgebraElement {
        AlgebraElement::generator(2, 0).unwrap()
    }

    fn v() -> AlgebraElement {
        AlgebraElement::generator(2, 1).unwrap()
    }

    #[test]
    fn bicharacter_quarter_twist() {
        let th = DeformationMatrix::two_generator(0.25);
        let chi = th
            .bicharacter(&LatticePoint(vec![1, 0]), &LatticePoint(vec![0, 1]))
            .unwrap();
        let expected = C64::from_polar(1.0, PI * 0.25);
        assert!((chi - expected).norm() <= TOL);
        assert!((chi.norm() - 1.0).abs() <= TOL);
    }

    #[test]
    fn bicharacter_zero_mode_is_one() {
        let th = DeformationMatrix::two_generator(0.37);
        let chi = th
            .bicharacter(&LatticePoint(vec![5, -3]), &LatticePoint::zero(2))
            .unwrap();
        assert!((chi - C64::new(1.0, 0.0)).norm() <= TOL);
    }

    #[test]
    fn generators_exchange_with_the_expected_phase() {
        let theta = 0.3;
        let th = DeformationMatrix::two_generator(theta);
        let uv = th.mul(&u(), &v()).unwrap();
        let vu = th.mul(&v(), &u()).unwrap();
        let phase = C64::from_polar(1.0, 2.0 * PI * theta);
        assert!(uv.sub(&vu.scale(phase)).l1norm() <= TOL);
        // Both products sit on the single mode (1,1).
        assert_eq!(uv.support_len(), 1);
        assert!((uv.coeff(&LatticePoint(vec![1, 1])).norm() - 1.0).abs() <= TOL);
    }

    #[test]
    fn sum_times_generator_expands_with_one_phase_each() {
        let th = DeformationMatrix::two_generator(0.25);
        let p = th.mul(&u().add(&v()), &u()).unwrap();
        let w20 = p.coeff(&LatticePoint(vec![2, 0]));
        let w11 = p.coeff(&LatticePoint(vec![1, 1]));
        assert!((w20 - C64::new(1.0, 0.0)).norm() <= TOL);
        assert!((w11 - C64::from_polar(1.0, -PI * 0.25)).norm() <= TOL);
    }

    #[test]
    fn unit_is_neutral() {
        let th = DeformationMatrix::two_generator(0.71);
        let a = u().add(&v().scale(C64::new(0.0, 2.0)));
        assert_eq!(th.mul(&AlgebraElement::one(2), &a).unwrap(), a);
        assert_eq!(th.mul(&a, &AlgebraElement::one(2)).unwrap(), a);
    }

    #[test]
    fn star_flips_mode_and_conjugates() {
        let a = u().scale(C64::new(0.0, 1.0));
        let s = a.star();
        assert_eq!(s.support_len(), 1);
        assert!(
            (s.coeff(&LatticePoint(vec![-1, 0])) - C64::new(0.0, -1.0)).norm() <= TOL
        );
        assert_eq!(a.star().star(), a);
        assert_eq!(AlgebraElement::one(2).star(), AlgebraElement::one(2));
    }

    #[test]
    fn star_reverses_products() {
        let th = DeformationMatrix::two_generator(0.3);
        let lhs = th.mul(&u(), &v()).unwrap().star();
        let rhs = th.mul(&v().star(), &u().star()).unwrap();
        assert!(lhs.sub(&rhs).l1norm() <= TOL);
    }

    #[test]
    fn trace_reads_the_unit_mode() {
        let th = DeformationMatrix::two_generator(0.25);
        assert_eq!(AlgebraElement::one(2).trace(), C64::new(1.0, 0.0));
        assert_eq!(u().trace(), C64::new(0.0, 0.0));
        let uv = th.mul(&u(), &v()).unwrap();
        let vu = th.mul(&v(), &u()).unwrap();
        assert_eq!(uv.trace(), C64::new(0.0, 0.0));
        assert_eq!(vu.trace(), C64::new(0.0, 0.0));
    }

    #[test]
    fn l1norm_sums_moduli() {
        assert_eq!(AlgebraElement::one(2).l1norm(), 1.0);
        let k = AlgebraElement::scalar(2, C64::new(3.0, 0.0))
            .add(&u())
            .add(&u().star());
        assert_eq!(k.l1norm(), 5.0);
        let th = DeformationMatrix::two_generator(0.25);
        assert!((th.mul(&u(), &v()).unwrap().l1norm() - 1.0).abs() <= TOL);
    }

    #[test]
    fn derive_scales_by_the_mode() {
        let du = derive(&DerivationRule::Lattice, 0, &u()).unwrap();
        assert_eq!(du, u().scale(C64::new(0.0, 1.0)));
        assert!(derive(&DerivationRule::Lattice, 1, &AlgebraElement::one(2))
            .unwrap()
            .is_zero());
        let w = AlgebraElement::monomial(LatticePoint(vec![2, 3]), C64::new(1.0, 0.0));
        let dw = derive(&DerivationRule::Lattice, 1, &w).unwrap();
        assert_eq!(dw, w.scale(C64::new(0.0, 3.0)));
    }

    #[test]
    fn invert_scalar_and_monomial_exactly() {
        let th = DeformationMatrix::two_generator(0.25);
        let two = AlgebraElement::scalar(2, C64::new(2.0, 0.0));
        let inv = th.invert(&two, 1e-12, 64).unwrap();
        assert_eq!(inv.value, AlgebraElement::scalar(2, C64::new(0.5, 0.0)));
        assert_eq!(inv.tail_bound, 0.0);

        let invu = th.invert(&u(), 1e-12, 64).unwrap();
        assert_eq!(
            invu.value,
            AlgebraElement::monomial(LatticePoint(vec![-1, 0]), C64::new(1.0, 0.0))
        );
        let residual = th
            .mul(&u(), &invu.value)
            .unwrap()
            .sub(&AlgebraElement::one(2))
            .l1norm();
        assert_eq!(residual, 0.0);
    }

    #[test]
    fn invert_neumann_dominated() {
        let th = DeformationMatrix::two_generator(0.25);
        let k = AlgebraElement::scalar(2, C64::new(3.0, 0.0))
            .add(&u())
            .add(&u().star());
        let eps = 1e-12;
        let inv = th.invert(&k, eps, 4096).unwrap();
        let residual = th
            .mul(&k, &inv.value)
            .unwrap()
            .sub(&AlgebraElement::one(2))
            .l1norm();
        assert!(residual <= eps + inv.tail_bound);
        assert!(inv.tail_bound <= eps);
        // Two-sided.
        let residual_left = th
            .mul(&inv.value, &k)
            .unwrap()
            .sub(&AlgebraElement::one(2))
            .l1norm();
        assert!(residual_left <= eps + inv.tail_bound);
    }

    #[test]
    fn invert_refuses_outside_the_certified_classes() {
        let th = DeformationMatrix::two_generator(0.25);
        let bad = u().add(&v()); // no unit mode, two terms
        assert!(matches!(
            th.invert(&bad, 1e-12, 64),
            Err(Error::NotInvertible { .. })
        ));
        let dominated_fails = AlgebraElement::one(2).add(&u().scale(C64::new(2.0, 0.0)));
        assert!(matches!(
            th.invert(&dominated_fails, 1e-12, 64),
            Err(Error::NotInvertible { .. })
        ));
        assert!(matches!(
            th.invert(&AlgebraElement::zero(2), 1e-12, 64),
            Err(Error::NotInvertible { .. })
        ));
        // Reachable tolerance but not within the term budget.
        let slow = AlgebraElement::one(2).add(&u().scale(C64::new(0.9, 0.0)));
        assert!(matches!(
            th.invert(&slow, 1e-12, 3),
            Err(Error::ToleranceUnreachable { .. })
        ));
    }

    #[test]
    fn skew_symmetry_is_enforced() {
        assert!(DeformationMatrix::new(2, &[0.0, 0.25, -0.25, 0.0]).is_ok());
        assert!(matches!(
            DeformationMatrix::new(2, &[0.0, 0.25, 0.25, 0.0]),
            Err(Error::NotSkewSymmetric { .. })
        ));
        assert!(matches!(
            DeformationMatrix::new(2, &[0.1, 0.25, -0.25, 0.0]),
            Err(Error::NotSkewSymmetric { .. })
        ));
    }

    #[test]
    fn structure_constants_must_be_antisymmetric() {
        let mut c = vec![0.0; 27];
        c[(2 * 3 + 0) * 3 + 1] = 1.0;
        assert!(StructureConstants::new(3, &c).is_err());
        c[(2 * 3 + 1) * 3 + 0] = -1.0;
        let sc = StructureConstants::new(3, &c).unwrap();
        assert_eq!(sc.get(2, 0, 1), 1.0);
        assert_eq!(sc.get(2, 1, 0), -1.0);
    }

    // --- randomized properties ---

    fn arb_mode(n: usize) -> impl Strategy<Value = LatticePoint> {
        prop::collection::vec(-4i64..=4, n).prop_map(LatticePoint)
    }

    fn arb_element(n: usize) -> impl Strategy<Value = AlgebraElement> {
        prop::collection::vec(
            (arb_mode(n), -1.0f64..=1.0, -1.0f64..=1.0),
            1..=8,
        )
        .prop_map(move |terms| {
            let mut e = AlgebraElement::zero(n);
            for (m, re, im) in terms {
                e.insert(m, C64::new(re, im));
            }
            e
        })
    }

    fn arb_theta() -> impl Strategy<Value = DeformationMatrix> {
        (-1.0f64..=1.0).prop_map(DeformationMatrix::two_generator)
    }

    proptest! {
        #[test]
        fn bicharacter_is_a_bicharacter(
            th in arb_theta(),
            r in arb_mode(2),
            rp in arb_mode(2),
            s in arb_mode(2),
        ) {
            let chi = |a: &LatticePoint, b: &LatticePoint| th.bicharacter(a, b).unwrap();
            prop_assert!((chi(&r.add(&rp), &s) - chi(&r, &s) * chi(&rp, &s)).norm() <= 1e-12);
            prop_assert!((chi(&r, &rp.add(&s)) - chi(&r, &rp) * chi(&r, &s)).norm() <= 1e-12);
            prop_assert!((chi(&r, &s) * chi(&s, &r) - C64::new(1.0, 0.0)).norm() <= 1e-12);
        }

        #[test]
        fn product_is_associative(
            th in arb_theta(),
            a in arb_element(2),
            b in arb_element(2),
            c in arb_element(2),
        ) {
            let lhs = th.mul(&th.mul(&a, &b).unwrap(), &c).unwrap();
            let rhs = th.mul(&a, &th.mul(&b, &c).unwrap()).unwrap();
            prop_assert!(lhs.sub(&rhs).l1norm() <= 1e-12);
        }

        #[test]
        fn star_is_an_anti_involution(
            th in arb_theta(),
            a in arb_element(2),
            b in arb_element(2),
        ) {
            prop_assert_eq!(a.star().star(), a.clone());
            let lhs = th.mul(&a, &b).unwrap().star();
            let rhs = th.mul(&b.star(), &a.star()).unwrap();
            prop_assert!(lhs.sub(&rhs).l1norm() <= 1e-12);
        }

        #[test]
        fn derivations_satisfy_leibniz_and_commute(
            th in arb_theta(),
            a in arb_element(2),
            b in arb_element(2),
            j in 0usize..2,
        ) {
            let rule = DerivationRule::Lattice;
            let lhs = derive(&rule, j, &th.mul(&a, &b).unwrap()).unwrap();
            let rhs = th.mul(&derive(&rule, j, &a).unwrap(), &b).unwrap()
                .add(&th.mul(&a, &derive(&rule, j, &b).unwrap()).unwrap());
            prop_assert!(lhs.sub(&rhs).l1norm() <= 1e-12);

            let d01 = derive(&rule, 0, &derive(&rule, 1, &a).unwrap()).unwrap();
            let d10 = derive(&rule, 1, &derive(&rule, 0, &a).unwrap()).unwrap();
            prop_assert!(d01.sub(&d10).l1norm() <= 1e-12);
        }

        #[test]
        fn trace_is_tracial(
            th in arb_theta(),
            a in arb_element(2),
            b in arb_element(2),
        ) {
            let tab = th.mul(&a, &b).unwrap().trace();
            let tba = th.mul(&b, &a).unwrap().trace();
            prop_assert!((tab - tba).norm() <= 1e-12);
        }

        #[test]
        fn l1norm_is_submultiplicative(
            th in arb_theta(),
            a in arb_element(2),
            b in arb_element(2),
        ) {
            let p = th.mul(&a, &b).unwrap();
            prop_assert!(p.l1norm() <= a.l1norm() * b.l1norm() + 1e-12);
        }

        #[test]
        fn invert_contract_on_dominated_elements(
            th in arb_theta(),
            x in arb_element(2),
            lam_re in 0.5f64..2.0,
        ) {
            // Scale x so the Neumann ratio is comfortably below one.
            let rho = x.l1norm();
            prop_assume!(rho > 0.0);
            let x = x.scale(C64::new(0.4 / rho, 0.0));
            let lam = C64::new(lam_re, 0.3);
            let a = AlgebraElement::one(2).add(&x).scale(lam);
            let eps = 1e-12;
            let inv = th.invert(&a, eps, 4096).unwrap();
            let r = th.mul(&a, &inv.value).unwrap()
                .sub(&AlgebraElement::one(2)).l1norm();
            prop_assert!(r <= eps + inv.tail_bound + 1e-13);
            let r2 = th.mul(&inv.value, &a).unwrap()
                .sub(&AlgebraElement::one(2)).l1norm();
            prop_assert!(r2 <= eps + inv.tail_bound + 1e-13);
        }
    }
}
