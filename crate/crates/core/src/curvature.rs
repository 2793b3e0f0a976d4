//! Curvature of a connection: component Riemann tensor, Ricci tensor, and
//! scalar curvature, plus the closed-form expressions for conformally
//! rescaled flat two-tori that serve as an independent check on the whole
//! pipeline.
//!
//! All formulas act on Christoffel symbols Γ^i_{jk} with algebra-valued
//! entries; products keep the first (curvature) index's symbol on the left,
//! which matters once coefficients stop commuting.

use crate::algebra::{AlgebraElement, C64};
use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::forms::GeometrySpace;
use crate::metric::PseudoMetric;

/// Component Riemann tensor r^i_{jkl}, stored row-major over all four
/// indices.
#[derive(Debug, Clone)]
pub struct RiemannComponents {
    rank: usize,
    comps: Vec<AlgebraElement>, // ((i·r + j)·r + k)·r + l
}

impl RiemannComponents {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> &AlgebraElement {
        let r = self.rank;
        &self.comps[((i * r + j) * r + k) * r + l]
    }
}

/// Ricci tensor Ric(e_j ⊗ e_l), stored row-major.
#[derive(Debug, Clone)]
pub struct RicciTensor {
    rank: usize,
    comps: Vec<AlgebraElement>, // j·r + l
}

impl RicciTensor {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn get(&self, j: usize, l: usize) -> &AlgebraElement {
        &self.comps[j * self.rank + l]
    }

    /// Largest entrywise ℓ¹ distance to another Ricci tensor.
    pub fn max_delta(&self, other: &RicciTensor) -> f64 {
        assert_eq!(self.rank, other.rank, "ricci rank mismatch");
        self.comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.sub(b).l1norm())
            .fold(0.0, f64::max)
    }
}

/// Component curvature
/// r^i_{jkl} = Σ_p (Γ^p_{jk}·Γ^i_{pl} − Γ^p_{jl}·Γ^i_{pk})
///             − ∂_l(Γ^i_{jk}) + ∂_k(Γ^i_{jl}).
pub fn riemann(space: &GeometrySpace, c: &Connection) -> Result<RiemannComponents> {
    let r = space.rank();
    if c.rank() != r {
        return Err(Error::RankMismatch {
            expected: r,
            found: c.rank(),
        });
    }
    let d = space.algebra_dim();
    let theta = space.theta();
    let mut comps = Vec::with_capacity(r * r * r * r);
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                for l in 0..r {
                    let mut acc = AlgebraElement::zero(d);
                    for p in 0..r {
                        acc = acc
                            .add(&theta.mul(c.gamma(p, j, k), c.gamma(i, p, l))?)
                            .sub(&theta.mul(c.gamma(p, j, l), c.gamma(i, p, k))?);
                    }
                    acc = acc
                        .sub(&space.derive(l, c.gamma(i, j, k)))
                        .add(&space.derive(k, c.gamma(i, j, l)));
                    comps.push(acc);
                }
            }
        }
    }
    Ok(RiemannComponents { rank: r, comps })
}

/// Ricci tensor, evaluated directly:
/// Ric(e_j⊗e_l) = Σ_i [ Σ_p (Γ^p_{ji}·Γ^i_{pl} − Γ^p_{jl}·Γ^i_{pi})
///                      − ∂_l(Γ^i_{ji}) + ∂_i(Γ^i_{jl}) ].
pub fn ricci(space: &GeometrySpace, c: &Connection) -> Result<RicciTensor> {
    let r = space.rank();
    if c.rank() != r {
        return Err(Error::RankMismatch {
            expected: r,
            found: c.rank(),
        });
    }
    let d = space.algebra_dim();
    let theta = space.theta();
    let mut comps = Vec::with_capacity(r * r);
    for j in 0..r {
        for l in 0..r {
            let mut acc = AlgebraElement::zero(d);
            for i in 0..r {
                for p in 0..r {
                    acc = acc
                        .add(&theta.mul(c.gamma(p, j, i), c.gamma(i, p, l))?)
                        .sub(&theta.mul(c.gamma(p, j, l), c.gamma(i, p, i))?);
                }
                acc = acc
                    .sub(&space.derive(l, c.gamma(i, j, i)))
                    .add(&space.derive(i, c.gamma(i, j, l)));
            }
            comps.push(acc);
        }
    }
    Ok(RicciTensor { rank: r, comps })
}

/// Ricci as the trace of the component curvature over the first and third
/// indices — an independent consistency route used by the test suite.
pub fn ricci_from_riemann(space: &GeometrySpace, rm: &RiemannComponents) -> RicciTensor {
    let r = rm.rank();
    let d = space.algebra_dim();
    let mut comps = Vec::with_capacity(r * r);
    for j in 0..r {
        for l in 0..r {
            let mut acc = AlgebraElement::zero(d);
            for i in 0..r {
                acc = acc.add(rm.get(i, j, i, l));
            }
            comps.push(acc);
        }
    }
    RicciTensor { rank: r, comps }
}

/// Scalar curvature Scal = Σ_{j,l} g(e_j⊗e_l)·Ric(e_j⊗e_l), with the metric
/// value multiplying from the left.
pub fn scalar(
    space: &GeometrySpace,
    g: &PseudoMetric,
    ric: &RicciTensor,
) -> Result<AlgebraElement> {
    let r = ric.rank();
    if g.rank() != r {
        return Err(Error::RankMismatch {
            expected: r,
            found: g.rank(),
        });
    }
    let entry_dim = space.algebra_dim();
    let theta = space.theta();
    let mut acc = AlgebraElement::zero(entry_dim);
    for j in 0..r {
        for l in 0..r {
            let gv = g.entry(entry_dim, j, l);
            if gv.is_zero() || ric.get(j, l).is_zero() {
                continue;
            }
            acc = acc.add(&theta.mul(&gv, ric.get(j, l))?);
        }
    }
    Ok(acc)
}

/// Closed-form Ricci and scalar curvature for the flat two-torus geometry
/// rescaled by a conformal factor k:
///
/// Ric(e₁⊗e₁) = Ric(e₂⊗e₂)
///   = −½[ k⁻¹(∂₁² + ∂₂²)(k) + ∂₁(k⁻¹)∂₁(k) + ∂₂(k⁻¹)∂₂(k) ],
/// Ric(e₁⊗e₂) = −Ric(e₂⊗e₁) = ½[ ∂₁(k⁻¹)∂₂(k) − ∂₂(k⁻¹)∂₁(k) ],
/// Scal = −(∂₁² + ∂₂²)(k) − k[ ∂₁(k⁻¹)∂₁(k) + ∂₂(k⁻¹)∂₂(k) ].
///
/// Assumes rank 2 with vanishing basis differentials (the torus presets);
/// k⁻¹ is computed to the requested inversion accuracy.
pub fn torus_closed_form_ric_scal(
    space: &GeometrySpace,
    k: &AlgebraElement,
    eps: f64,
    max_terms: usize,
) -> Result<(RicciTensor, AlgebraElement)> {
    if space.rank() != 2 {
        return Err(Error::RankMismatch {
            expected: 2,
            found: space.rank(),
        });
    }
    let theta = space.theta();
    let k_inv = theta.invert(k, eps, max_terms)?.value;
    let half = C64::new(0.5, 0.0);
    let minus_one = C64::new(-1.0, 0.0);

    let d1k = space.derive(0, k);
    let d2k = space.derive(1, k);
    let d1kinv = space.derive(0, &k_inv);
    let d2kinv = space.derive(1, &k_inv);
    let lap_k = space.derive(0, &d1k).add(&space.derive(1, &d2k));

    // Σ_j ∂_j(k⁻¹)·∂_j(k), the cross term shared by every entry.
    let cross = theta.mul(&d1kinv, &d1k)?.add(&theta.mul(&d2kinv, &d2k)?);

    let diag = theta
        .mul(&k_inv, &lap_k)?
        .add(&cross)
        .scale(half)
        .scale(minus_one);
    let off = theta
        .mul(&d1kinv, &d2k)?
        .sub(&theta.mul(&d2kinv, &d1k)?)
        .scale(half);

    let ric = RicciTensor {
        rank: 2,
        comps: vec![
            diag.clone(),
            off.clone(),
            off.scale(minus_one),
            diag,
        ],
    };
    let scal = lap_k
        .scale(minus_one)
        .sub(&theta.mul(k, &cross)?);
    Ok((ric, scal))
}
