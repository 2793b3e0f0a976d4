//! Pseudo-Riemannian metrics on the free module of one-forms.
//!
//! Three shapes are supported. `Central` is a symmetric invertible complex
//! scalar matrix G₀, modelling bi-metrics with values in the center of the
//! coefficient algebra. `Conformal` is k·g₀ for a certified-invertible
//! algebra element k over a central base. `General` allows arbitrary
//! algebra-valued symmetric entries and exists only to feed the truncated
//! linear solver — no closed-form solver accepts it.
//!
//! Nondegeneracy is certified constructively: a Central metric caches an
//! explicit inverse (checked against the identity), and a Conformal metric
//! caches the Neumann inverse of k together with its tail bound.

use nalgebra::DMatrix;

use crate::algebra::{AlgebraElement, DeformationMatrix, C64};
use crate::error::{Error, Result};
use crate::forms::{d_zero_form, sigma, GeometrySpace, OneForm, Tensor2, Tensor3};

/// Residual gate for the cached matrix inverse of a Central metric.
const CENTRAL_INVERSE_TOL: f64 = 1e-12;

/// Central bi-metric: g(e_i⊗e_j) = G0_{ij}·1 with G0 symmetric invertible.
#[derive(Debug, Clone)]
pub struct CentralMetric {
    rank: usize,
    g0: Vec<C64>,     // row-major rank×rank
    g0_inv: Vec<C64>, // symmetrized inverse
}

impl CentralMetric {
    pub fn new(rank: usize, g0: &[C64]) -> Result<Self> {
        if g0.len() != rank * rank {
            return Err(Error::DimensionMismatch {
                expected: rank * rank,
                found: g0.len(),
            });
        }
        for i in 0..rank {
            for j in (i + 1)..rank {
                if g0[i * rank + j] != g0[j * rank + i] {
                    return Err(Error::AsymmetricMetric { row: i, col: j });
                }
            }
        }
        let m = DMatrix::from_row_slice(rank, rank, g0);
        let inv = m.clone().try_inverse().ok_or(Error::SingularMetric)?;
        // Certify the inverse before trusting it.
        let resid = (&m * &inv - DMatrix::identity(rank, rank))
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);
        if !resid.is_finite() || resid > CENTRAL_INVERSE_TOL {
            return Err(Error::SingularMetric);
        }
        // The inverse of a symmetric matrix is symmetric; enforce it exactly
        // so Ω_{g0} is a fixed point of σ by construction.
        let mut g0_inv = vec![C64::new(0.0, 0.0); rank * rank];
        for i in 0..rank {
            for j in 0..rank {
                g0_inv[i * rank + j] = (inv[(i, j)] + inv[(j, i)]).scale(0.5);
            }
        }
        Ok(CentralMetric {
            rank,
            g0: g0.to_vec(),
            g0_inv,
        })
    }

    /// The identity bi-metric δ_ij of the given rank.
    pub fn identity(rank: usize) -> Self {
        let mut g0 = vec![C64::new(0.0, 0.0); rank * rank];
        for i in 0..rank {
            g0[i * rank + i] = C64::new(1.0, 0.0);
        }
        CentralMetric {
            rank,
            g0: g0.clone(),
            g0_inv: g0,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.g0[i * self.rank + j]
    }

    pub fn inv_entry(&self, i: usize, j: usize) -> C64 {
        self.g0_inv[i * self.rank + j]
    }

    pub fn matrix(&self) -> &[C64] {
        &self.g0
    }

    pub fn is_identity(&self) -> bool {
        (0..self.rank).all(|i| {
            (0..self.rank).all(|j| {
                let want = if i == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                self.entry(i, j) == want
            })
        })
    }
}

/// Conformally deformed metric g = k·g₀ with cached certified k⁻¹.
#[derive(Debug, Clone)]
pub struct ConformalMetric {
    theta: DeformationMatrix,
    base: CentralMetric,
    k: AlgebraElement,
    k_inv: AlgebraElement,
    /// ℓ¹ bound on ‖k × k⁻¹ − 1‖ from the Neumann tail.
    k_inv_tail: f64,
    /// Number of Neumann terms behind the cached inverse.
    k_inv_terms: usize,
}

impl ConformalMetric {
    pub fn theta(&self) -> &DeformationMatrix {
        &self.theta
    }

    pub fn base(&self) -> &CentralMetric {
        &self.base
    }

    pub fn k(&self) -> &AlgebraElement {
        &self.k
    }

    pub fn k_inv(&self) -> &AlgebraElement {
        &self.k_inv
    }

    pub fn k_inv_tail(&self) -> f64 {
        self.k_inv_tail
    }

    pub fn k_inv_terms(&self) -> usize {
        self.k_inv_terms
    }
}

/// General algebra-valued symmetric metric; accepted only by the truncated
/// solver.
#[derive(Debug, Clone)]
pub struct GeneralMetric {
    theta: DeformationMatrix,
    rank: usize,
    entries: Vec<AlgebraElement>, // row-major rank×rank
}

impl GeneralMetric {
    pub fn new(
        theta: DeformationMatrix,
        rank: usize,
        entries: Vec<AlgebraElement>,
    ) -> Result<Self> {
        if entries.len() != rank * rank {
            return Err(Error::DimensionMismatch {
                expected: rank * rank,
                found: entries.len(),
            });
        }
        for e in &entries {
            if e.dim() != theta.dim() {
                return Err(Error::DimensionMismatch {
                    expected: theta.dim(),
                    found: e.dim(),
                });
            }
        }
        for i in 0..rank {
            for j in (i + 1)..rank {
                if entries[i * rank + j] != entries[j * rank + i] {
                    return Err(Error::AsymmetricMetric { row: i, col: j });
                }
            }
        }
        Ok(GeneralMetric {
            theta,
            rank,
            entries,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entry(&self, i: usize, j: usize) -> &AlgebraElement {
        &self.entries[i * self.rank + j]
    }
}

/// A pseudo-Riemannian metric in one of the three supported shapes.
#[derive(Debug, Clone)]
pub enum PseudoMetric {
    Central(CentralMetric),
    Conformal(ConformalMetric),
    General(GeneralMetric),
}

impl PseudoMetric {
    pub fn rank(&self) -> usize {
        match self {
            PseudoMetric::Central(c) => c.rank(),
            PseudoMetric::Conformal(c) => c.base.rank(),
            PseudoMetric::General(g) => g.rank(),
        }
    }

    pub fn as_central(&self) -> Option<&CentralMetric> {
        match self {
            PseudoMetric::Central(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_conformal(&self) -> Option<&ConformalMetric> {
        match self {
            PseudoMetric::Conformal(c) => Some(c),
            _ => None,
        }
    }

    /// g(e_i⊗e_j) as an algebra element of lattice dimension `dim`.
    ///
    /// Central entries are scalars; conformal entries are k scaled by the
    /// base matrix entry (exact, since scalar multiples commute with
    /// everything).
    pub fn entry(&self, dim: usize, i: usize, j: usize) -> AlgebraElement {
        match self {
            PseudoMetric::Central(c) => AlgebraElement::scalar(dim, c.entry(i, j)),
            PseudoMetric::Conformal(c) => c.k.scale(c.base.entry(i, j)),
            PseudoMetric::General(g) => g.entry(i, j).clone(),
        }
    }

    /// The twist governing coefficient products, where the metric owns one.
    fn theta(&self) -> Option<&DeformationMatrix> {
        match self {
            PseudoMetric::Central(_) => None,
            PseudoMetric::Conformal(c) => Some(&c.theta),
            PseudoMetric::General(g) => Some(&g.theta),
        }
    }
}

/// Builds g = k·g₀, certifying k's invertibility via the Neumann contract.
pub fn conformal_deform(
    theta: &DeformationMatrix,
    k: &AlgebraElement,
    base: &CentralMetric,
    eps: f64,
    max_terms: usize,
) -> Result<PseudoMetric> {
    let inv = theta.invert(k, eps, max_terms)?;
    Ok(PseudoMetric::Conformal(ConformalMetric {
        theta: theta.clone(),
        base: base.clone(),
        k: k.clone(),
        k_inv: inv.value,
        k_inv_tail: inv.tail_bound,
        k_inv_terms: inv.terms,
    }))
}

/// g applied to a tensor square: Σ_{ij} g(e_i⊗e_j) × a_{ij}, metric factor
/// multiplied on the left.
pub fn metric_apply(g: &PseudoMetric, t: &Tensor2) -> Result<AlgebraElement> {
    if g.rank() != t.rank() {
        return Err(Error::RankMismatch {
            expected: g.rank(),
            found: t.rank(),
        });
    }
    let dim = t.algebra_dim();
    let mut out = AlgebraElement::zero(dim);
    for i in 0..t.rank() {
        for j in 0..t.rank() {
            let a = t.get(i, j);
            if a.is_zero() {
                continue;
            }
            let term = match g {
                // Scalar entries: left multiplication is an exact scaling.
                PseudoMetric::Central(c) => a.scale(c.entry(i, j)),
                _ => {
                    let entry = g.entry(dim, i, j);
                    g.theta().unwrap().mul(&entry, a)?
                }
            };
            out = out.add(&term);
        }
    }
    Ok(out)
}

/// (g⊗id) on a tensor cube: contracts the first two legs with the metric,
/// returning the one-form Σ_l e_l · Σ_{ij} g(e_i⊗e_j) × t_{ijl}.
pub fn contract_metric_12(g: &PseudoMetric, t: &Tensor3) -> Result<OneForm> {
    if g.rank() != t.rank() {
        return Err(Error::RankMismatch {
            expected: g.rank(),
            found: t.rank(),
        });
    }
    let dim = t.algebra_dim();
    let mut out = OneForm::zero(t.rank(), dim);
    for l in 0..t.rank() {
        let mut acc = AlgebraElement::zero(dim);
        for i in 0..t.rank() {
            for j in 0..t.rank() {
                let a = t.get(i, j, l);
                if a.is_zero() {
                    continue;
                }
                let term = match g {
                    PseudoMetric::Central(c) => a.scale(c.entry(i, j)),
                    _ => {
                        let entry = g.entry(dim, i, j);
                        g.theta().unwrap().mul(&entry, a)?
                    }
                };
                acc = acc.add(&term);
            }
        }
        out.set_coeff(l, acc);
    }
    Ok(out)
}

/// d of the metric entry (i,j): the exterior derivative of g(e_i⊗e_j).
pub fn d_of_metric(
    space: &GeometrySpace,
    g: &PseudoMetric,
    i: usize,
    j: usize,
) -> Result<OneForm> {
    if g.rank() != space.rank() {
        return Err(Error::RankMismatch {
            expected: space.rank(),
            found: g.rank(),
        });
    }
    if i >= g.rank() {
        return Err(Error::IndexOutOfRange {
            index: i,
            dim: g.rank(),
        });
    }
    if j >= g.rank() {
        return Err(Error::IndexOutOfRange {
            index: j,
            dim: g.rank(),
        });
    }
    let entry = g.entry(space.algebra_dim(), i, j);
    Ok(d_zero_form(space, &entry))
}

/// Ω_{g0} = Σ_{ij} e_i⊗e_j·(G0⁻¹)_{ij}: the symmetric tensor characterized
/// by (g₀⊗id)σ₂₃(Ω⊗η) = η for every one-form η.
pub fn omega(g: &PseudoMetric) -> Result<Tensor2> {
    let c = match g {
        PseudoMetric::Central(c) => c,
        _ => return Err(Error::NonCentralMetric),
    };
    // The lattice dimension is not determined by a scalar matrix; pick the
    // rank, which is what both presets use. Callers needing another ambient
    // dimension can use omega_in.
    omega_in(c, c.rank())
}

/// Ω_{g0} with an explicit ambient lattice dimension.
pub fn omega_in(c: &CentralMetric, dim: usize) -> Result<Tensor2> {
    let mut t = Tensor2::zero(c.rank(), dim);
    for i in 0..c.rank() {
        for j in 0..c.rank() {
            t.set(i, j, AlgebraElement::scalar(dim, c.inv_entry(i, j)));
        }
    }
    debug_assert_eq!(sigma(&t), t);
    Ok(t)
}
