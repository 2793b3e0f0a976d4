//! Free modules of one-forms with a central basis, their tensor squares and
//! cubes, the flip σ, the symmetrizer P_sym, the wedge map m, and the
//! differential d.
//!
//! A geometry is a free right module over ℂ[ℤⁿ]_θ with central basis
//! e₁ … e_r. Everything is stored in right-coefficient form: a one-form is
//! Σ_i e_i·a_i, a tensor square Σ_{ij} e_i⊗e_j·a_{ij}, and so on. Because
//! the basis is central, left coefficients can always be moved to the right,
//! which is what every constructor here silently does.
//!
//! Two-forms live inside the tensor square as the antisymmetric range of
//! m = 1 − σ; the [`TwoForm`] type enforces that normalization exactly
//! (not up to a tolerance) since the wedge and all module operations
//! preserve it bit for bit.

use crate::algebra::{derive, AlgebraElement, DeformationMatrix, DerivationRule, C64};
use crate::error::{Error, Result};

/// A free-module geometry: the coefficient algebra's twist, one derivation
/// per basis direction, and the differentials d(e_i) of the basis one-forms.
#[derive(Debug, Clone)]
pub struct GeometrySpace {
    rank: usize,
    theta: DeformationMatrix,
    derivations: Vec<DerivationRule>,
    basis_differentials: Vec<TwoForm>,
}

impl GeometrySpace {
    pub fn new(
        rank: usize,
        theta: DeformationMatrix,
        derivations: Vec<DerivationRule>,
        basis_differentials: Vec<TwoForm>,
    ) -> Result<Self> {
        if rank == 0 {
            return Err(Error::RankMismatch {
                expected: 1,
                found: 0,
            });
        }
        if derivations.len() != rank {
            return Err(Error::RankMismatch {
                expected: rank,
                found: derivations.len(),
            });
        }
        if basis_differentials.len() != rank {
            return Err(Error::RankMismatch {
                expected: rank,
                found: basis_differentials.len(),
            });
        }
        // A lattice derivation in slot j differentiates along lattice axis j,
        // so j must be a valid axis; checking here keeps d_zero_form total.
        for (j, rule) in derivations.iter().enumerate() {
            if matches!(rule, DerivationRule::Lattice) && j >= theta.dim() {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    dim: theta.dim(),
                });
            }
        }
        for bd in &basis_differentials {
            if bd.rank() != rank || bd.algebra_dim() != theta.dim() {
                return Err(Error::RankMismatch {
                    expected: rank,
                    found: bd.rank(),
                });
            }
        }
        Ok(GeometrySpace {
            rank,
            theta,
            derivations,
            basis_differentials,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn theta(&self) -> &DeformationMatrix {
        &self.theta
    }

    /// Lattice dimension of the coefficient algebra.
    pub fn algebra_dim(&self) -> usize {
        self.theta.dim()
    }

    pub fn derivation(&self, j: usize) -> &DerivationRule {
        &self.derivations[j]
    }

    pub fn basis_differential(&self, i: usize) -> &TwoForm {
        &self.basis_differentials[i]
    }

    /// ∂_j applied through this space's rule for slot j.
    pub fn derive(&self, j: usize, a: &AlgebraElement) -> AlgebraElement {
        // The constructor guarantees lattice slots are valid axes.
        derive(&self.derivations[j], j, a).expect("derivation slot validated at construction")
    }
}

/// One-form Σ_i e_i·a_i with right coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    rank: usize,
    dim: usize,
    coeffs: Vec<AlgebraElement>,
}

impl OneForm {
    pub fn zero(rank: usize, dim: usize) -> Self {
        OneForm {
            rank,
            dim,
            coeffs: vec![AlgebraElement::zero(dim); rank],
        }
    }

    /// The basis one-form e_i.
    pub fn basis(rank: usize, dim: usize, i: usize) -> Result<Self> {
        if i >= rank {
            return Err(Error::IndexOutOfRange { index: i, dim: rank });
        }
        let mut w = Self::zero(rank, dim);
        w.coeffs[i] = AlgebraElement::one(dim);
        Ok(w)
    }

    pub fn from_coeffs(coeffs: Vec<AlgebraElement>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::RankMismatch {
                expected: 1,
                found: 0,
            });
        }
        let dim = coeffs[0].dim();
        if coeffs.iter().any(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coeffs.iter().map(|c| c.dim()).find(|&d| d != dim).unwrap(),
            });
        }
        Ok(OneForm {
            rank: coeffs.len(),
            dim,
            coeffs,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn algebra_dim(&self) -> usize {
        self.dim
    }

    pub fn coeff(&self, i: usize) -> &AlgebraElement {
        &self.coeffs[i]
    }

    pub fn set_coeff(&mut self, i: usize, a: AlgebraElement) {
        debug_assert_eq!(a.dim(), self.dim);
        self.coeffs[i] = a;
    }

    pub fn add_coeff(&mut self, i: usize, a: &AlgebraElement) {
        self.coeffs[i] = self.coeffs[i].add(a);
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.rank, other.rank, "one-form rank mismatch");
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.add(b))
            .collect();
        OneForm {
            rank: self.rank,
            dim: self.dim,
            coeffs,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Self {
        OneForm {
            rank: self.rank,
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|a| a.scale(c)).collect(),
        }
    }

    /// ω·a (coefficients multiplied by a on the right).
    pub fn mul_right(&self, theta: &DeformationMatrix, a: &AlgebraElement) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| theta.mul(c, a))
            .collect::<Result<Vec<_>>>()?;
        Ok(OneForm {
            rank: self.rank,
            dim: self.dim,
            coeffs,
        })
    }

    /// a·ω; the coefficient lands on the left of each a_i because the basis
    /// is central.
    pub fn mul_left(&self, theta: &DeformationMatrix, a: &AlgebraElement) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| theta.mul(a, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(OneForm {
            rank: self.rank,
            dim: self.dim,
            coeffs,
        })
    }

    /// Sum of coefficient ℓ¹ norms — the size measure used by residuals.
    pub fn l1norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc + c.l1norm())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

/// Element of E⊗E: Σ_{ij} e_i⊗e_j·a_{ij}.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor2 {
    rank: usize,
    dim: usize,
    coeffs: Vec<AlgebraElement>, // index i·rank + j
}

impl Tensor2 {
    pub fn zero(rank: usize, dim: usize) -> Self {
        Tensor2 {
            rank,
            dim,
            coeffs: vec![AlgebraElement::zero(dim); rank * rank],
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn algebra_dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &AlgebraElement {
        &self.coeffs[i * self.rank + j]
    }

    pub fn set(&mut self, i: usize, j: usize, a: AlgebraElement) {
        debug_assert_eq!(a.dim(), self.dim);
        self.coeffs[i * self.rank + j] = a;
    }

    pub fn add_to(&mut self, i: usize, j: usize, a: &AlgebraElement) {
        self.coeffs[i * self.rank + j] = self.coeffs[i * self.rank + j].add(a);
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.rank, other.rank, "tensor rank mismatch");
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.add(b))
            .collect();
        Tensor2 {
            rank: self.rank,
            dim: self.dim,
            coeffs,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Self {
        Tensor2 {
            rank: self.rank,
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|a| a.scale(c)).collect(),
        }
    }

    /// t·a (every coefficient multiplied by a on the right).
    pub fn mul_right(&self, theta: &DeformationMatrix, a: &AlgebraElement) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| theta.mul(c, a))
            .collect::<Result<Vec<_>>>()?;
        Ok(Tensor2 {
            rank: self.rank,
            dim: self.dim,
            coeffs,
        })
    }

    pub fn l1norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc + c.l1norm())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

/// Element of E⊗E⊗E.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    rank: usize,
    dim: usize,
    coeffs: Vec<AlgebraElement>, // index (i·rank + j)·rank + k
}

impl Tensor3 {
    pub fn zero(rank: usize, dim: usize) -> Self {
        Tensor3 {
            rank,
            dim,
            coeffs: vec![AlgebraElement::zero(dim); rank * rank * rank],
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn algebra_dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &AlgebraElement {
        &self.coeffs[(i * self.rank + j) * self.rank + k]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, a: AlgebraElement) {
        debug_assert_eq!(a.dim(), self.dim);
        self.coeffs[(i * self.rank + j) * self.rank + k] = a;
    }

    pub fn add_to(&mut self, i: usize, j: usize, k: usize, a: &AlgebraElement) {
        let idx = (i * self.rank + j) * self.rank + k;
        self.coeffs[idx] = self.coeffs[idx].add(a);
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.rank, other.rank, "tensor rank mismatch");
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.add(b))
            .collect();
        Tensor3 {
            rank: self.rank,
            dim: self.dim,
            coeffs,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Self {
        Tensor3 {
            rank: self.rank,
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|a| a.scale(c)).collect(),
        }
    }

    pub fn l1norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc + c.l1norm())
    }
}

/// Two-form: the antisymmetric part of E⊗E, i.e. the range of m = 1 − σ.
///
/// The stored basis part is exactly antisymmetric: coeffs[i][i] = 0 and
/// coeffs[j][i] = −coeffs[i][j] bit for bit. Wedge images and module
/// operations preserve this exactly, so the invariant is checked with
/// equality, not a tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoForm {
    inner: Tensor2,
}

impl TwoForm {
    pub fn zero(rank: usize, dim: usize) -> Self {
        TwoForm {
            inner: Tensor2::zero(rank, dim),
        }
    }

    /// Wraps a tensor square, requiring exact antisymmetry as stored.
    pub fn try_new(t: Tensor2) -> Result<Self> {
        for i in 0..t.rank {
            if !t.get(i, i).is_zero() {
                return Err(Error::NotSkewSymmetric { row: i, col: i });
            }
            for j in (i + 1)..t.rank {
                if *t.get(j, i) != t.get(i, j).scale(C64::new(-1.0, 0.0)) {
                    return Err(Error::NotSkewSymmetric { row: i, col: j });
                }
            }
        }
        Ok(TwoForm { inner: t })
    }

    pub fn rank(&self) -> usize {
        self.inner.rank
    }

    pub fn algebra_dim(&self) -> usize {
        self.inner.dim
    }

    pub fn coeff(&self, i: usize, j: usize) -> &AlgebraElement {
        self.inner.get(i, j)
    }

    pub fn as_tensor2(&self) -> &Tensor2 {
        &self.inner
    }

    pub fn add(&self, other: &Self) -> Self {
        TwoForm {
            inner: self.inner.add(&other.inner),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        TwoForm {
            inner: self.inner.sub(&other.inner),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        TwoForm {
            inner: self.inner.scale(c),
        }
    }

    /// w·a. Right multiplication is coefficient-linear, so it preserves the
    /// exact antisymmetry of the stored basis part.
    pub fn mul_right(&self, theta: &DeformationMatrix, a: &AlgebraElement) -> Result<Self> {
        Ok(TwoForm {
            inner: self.inner.mul_right(theta, a)?,
        })
    }

    /// Sum of coefficient ℓ¹ norms in the wedge basis {e_i∧e_j : i < j};
    /// the lower triangle is the redundant antisymmetric image and is not
    /// counted twice.
    pub fn l1norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.inner.rank {
            for j in (i + 1)..self.inner.rank {
                s += self.inner.get(i, j).l1norm();
            }
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }
}

/// The flip σ(Σ e_i⊗e_j·a_{ij}) = Σ e_j⊗e_i·a_{ij}: a pure index swap on
/// the central basis, extended by right-linearity to the coefficients.
pub fn sigma(t: &Tensor2) -> Tensor2 {
    let mut out = Tensor2::zero(t.rank, t.dim);
    for i in 0..t.rank {
        for j in 0..t.rank {
            out.set(j, i, t.get(i, j).clone());
        }
    }
    out
}

/// σ⊗id: swaps the first two basis legs of a tensor cube.
pub fn sigma12(t: &Tensor3) -> Tensor3 {
    let mut out = Tensor3::zero(t.rank, t.dim);
    for i in 0..t.rank {
        for j in 0..t.rank {
            for k in 0..t.rank {
                out.set(j, i, k, t.get(i, j, k).clone());
            }
        }
    }
    out
}

/// id⊗σ: swaps the last two basis legs of a tensor cube.
pub fn sigma23(t: &Tensor3) -> Tensor3 {
    let mut out = Tensor3::zero(t.rank, t.dim);
    for i in 0..t.rank {
        for j in 0..t.rank {
            for k in 0..t.rank {
                out.set(i, k, j, t.get(i, j, k).clone());
            }
        }
    }
    out
}

/// Symmetrizer P_sym = (1 + σ)/2; idempotent, range = kernel of the wedge.
pub fn p_sym(t: &Tensor2) -> Tensor2 {
    t.add(&sigma(t)).scale(C64::new(0.5, 0.0))
}

/// Wedge map m = 1 − σ onto the antisymmetric representation of two-forms;
/// the kernel is exactly the range of 1 + σ.
pub fn wedge_m(t: &Tensor2) -> TwoForm {
    let anti = t.sub(&sigma(t));
    // t − σ(t) is antisymmetric exactly: entry (j,i) is the IEEE negation of
    // entry (i,j) and the diagonal cancels to exact zero.
    debug_assert!(TwoForm::try_new(anti.clone()).is_ok());
    TwoForm { inner: anti }
}

/// ω⊗η of two one-forms, coefficients combined with the twisted product
/// (the left factor's coefficient crosses the central basis of the right).
pub fn tensor_product(
    theta: &DeformationMatrix,
    a: &OneForm,
    b: &OneForm,
) -> Result<Tensor2> {
    assert_eq!(a.rank, b.rank, "one-form rank mismatch");
    let mut out = Tensor2::zero(a.rank, a.dim);
    for p in 0..a.rank {
        for q in 0..b.rank {
            out.set(p, q, theta.mul(a.coeff(p), b.coeff(q))?);
        }
    }
    Ok(out)
}

/// d on zero-forms: d(a) = Σ_j e_j·∂_j(a).
pub fn d_zero_form(space: &GeometrySpace, a: &AlgebraElement) -> OneForm {
    assert_eq!(a.dim(), space.algebra_dim(), "algebra dimension mismatch");
    let mut out = OneForm::zero(space.rank(), space.algebra_dim());
    for j in 0..space.rank() {
        out.set_coeff(j, space.derive(j, a));
    }
    out
}

/// d on one-forms: d(Σ e_i·a_i) = Σ_i [ d(e_i)·a_i + m(e_i ⊗ d(a_i)) ],
/// with d(e_i) read from the space's basis differentials.
pub fn d_one_form(space: &GeometrySpace, w: &OneForm) -> Result<TwoForm> {
    assert_eq!(w.rank(), space.rank(), "one-form rank mismatch");
    let mut out = TwoForm::zero(space.rank(), space.algebra_dim());
    for i in 0..space.rank() {
        let a = w.coeff(i);
        out = out.add(&space.basis_differential(i).mul_right(space.theta(), a)?);
        let da = d_zero_form(space, a);
        let ei = OneForm::basis(space.rank(), space.algebra_dim(), i)?;
        out = out.add(&wedge_m(&tensor_product(space.theta(), &ei, &da)?));
    }
    Ok(out)
}
