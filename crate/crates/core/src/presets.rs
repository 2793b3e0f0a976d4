//! Ready-made geometries: the noncommutative torus family and the
//! quantum Heisenberg module. These bundle the deformation data, the
//! derivations, and the basis differentials so callers start from a
//! consistent, validated configuration.

use std::str::FromStr;

use crate::algebra::{
    AlgebraElement, DeformationMatrix, DerivationRule, StructureConstants, C64,
};
use crate::connection::{reference_connection, Connection};
use crate::error::Error;
use crate::forms::{wedge_m, GeometrySpace, Tensor2, TwoForm};
use crate::metric::CentralMetric;

/// Noncommutative torus: two unitary generators with UV = e^{2πiθ}VU, the
/// standard lattice derivations ∂_j(W_m) = i·m_j·W_m, flat basis one-forms
/// (d(e_i) = 0), and the identity base metric. θ = 0 recovers the classical
/// torus.
pub fn nc_torus(theta: f64) -> (GeometrySpace, CentralMetric) {
    let space = GeometrySpace::new(
        2,
        DeformationMatrix::two_generator(theta),
        vec![DerivationRule::Lattice, DerivationRule::Lattice],
        vec![TwoForm::zero(2, 2), TwoForm::zero(2, 2)],
    )
    .expect("torus preset data is consistent by construction");
    (space, CentralMetric::identity(2))
}

/// Quantum Heisenberg module: three derivations with the single
/// non-trivial bracket [∂₁, ∂₂] = ∂₃ acting on a commutative coefficient
/// algebra, the matching basis differential d(e₃) = −m(e₁⊗e₂), the identity
/// metric, and the torsion-free reference connection (Γ₀³₁₂ = −1).
pub fn heisenberg() -> (GeometrySpace, CentralMetric, Connection) {
    let n = 3;
    let mut c = vec![0.0; n * n * n];
    c[(2 * n) * n + 1] = 1.0; // c³₁₂ = 1
    c[(2 * n + 1) * n] = -1.0; // c³₂₁ = −1
    let sc = StructureConstants::new(n, &c)
        .expect("Heisenberg structure constants are antisymmetric");
    let rule = DerivationRule::Trivial {
        structure_constants: sc,
    };
    let mut de3 = Tensor2::zero(n, n);
    de3.set(0, 1, AlgebraElement::one(n));
    let de3 = wedge_m(&de3).scale(C64::new(-1.0, 0.0));
    let space = GeometrySpace::new(
        n,
        DeformationMatrix::zero(n),
        vec![rule.clone(), rule.clone(), rule],
        vec![TwoForm::zero(n, n), TwoForm::zero(n, n), de3],
    )
    .expect("Heisenberg preset data is consistent by construction");
    let nabla0 = reference_connection(&space);
    (space, CentralMetric::identity(n), nabla0)
}

/// A preset bundled with its default metric base and reference connection.
pub struct Preset {
    pub space: GeometrySpace,
    pub base_metric: CentralMetric,
    pub nabla0: Connection,
}

/// Identifier for the built-in geometries, as accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetId {
    NcTorus,
    ClassicalTorus,
    Heisenberg,
}

impl PresetId {
    /// Instantiates the geometry. `theta` applies only to `NcTorus`; the
    /// classical torus pins it to zero and the Heisenberg module has none.
    pub fn instantiate(self, theta: f64) -> Preset {
        let (space, base_metric, nabla0) = match self {
            PresetId::NcTorus | PresetId::ClassicalTorus => {
                let t = if self == PresetId::ClassicalTorus {
                    0.0
                } else {
                    theta
                };
                let (space, g0) = nc_torus(t);
                let nabla0 = reference_connection(&space);
                (space, g0, nabla0)
            }
            PresetId::Heisenberg => heisenberg(),
        };
        Preset {
            space,
            base_metric,
            nabla0,
        }
    }
}

impl FromStr for PresetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "nc-torus" => Ok(PresetId::NcTorus),
            "classical-torus" => Ok(PresetId::ClassicalTorus),
            "heisenberg" => Ok(PresetId::Heisenberg),
            other => Err(Error::NotInvertible {
                reason: format!(
                    "unknown preset `{other}` (expected nc-torus, classical-torus, or heisenberg)"
                ),
            }),
        }
    }
}
