//! Deterministic invariant suite behind `ncg selftest`.
//!
//! Every check draws its randomness from fixed seeds, so two runs perform
//! bit-identical work. One line per check goes to stdout; failures are
//! described on stderr and turn the exit code to 4.

use ncg_core::algebra::{AlgebraElement, LatticePoint, C64};
use ncg_core::connection::{
    reference_connection, solve_conformal, solve_koszul, solve_truncated, ConventionFlag,
};
use ncg_core::curvature::{ricci, scalar};
use ncg_core::forms::{d_one_form, d_zero_form, p_sym, sigma, wedge_m};
use ncg_core::metric::{conformal_deform, PseudoMetric};
use ncg_core::presets::{heisenberg, nc_torus};
use ncg_core::testkit::{
    random_dominated_element, random_dyadic_tensor2, random_element, SplitMix64,
};

use crate::expr::parse_and_eval;

const TOL: f64 = 1e-12;
const AGREE: f64 = 1e-9;

fn dist(a: &AlgebraElement, b: &AlgebraElement) -> f64 {
    a.sub(b).l1norm()
}

fn check_algebra_laws() -> Result<(), String> {
    let (space, _) = nc_torus(0.37);
    let dm = space.theta();
    let mut rng = SplitMix64::new(0x5E1F_0001);
    for round in 0..50 {
        let a = random_element(&mut rng, 2, 2, 4, 0.8);
        let b = random_element(&mut rng, 2, 2, 4, 0.8);
        let c = random_element(&mut rng, 2, 2, 4, 0.8);

        let ab = dm.mul(&a, &b).unwrap();
        let bc = dm.mul(&b, &c).unwrap();
        let assoc = dist(&dm.mul(&ab, &c).unwrap(), &dm.mul(&a, &bc).unwrap());
        if assoc > TOL {
            return Err(format!("associativity defect {assoc:.3e} in round {round}"));
        }

        let star = dist(&ab.star(), &dm.mul(&b.star(), &a.star()).unwrap());
        if star > TOL {
            return Err(format!("star antihomomorphism defect {star:.3e}"));
        }

        let ba = dm.mul(&b, &a).unwrap();
        let trace = (ab.trace() - ba.trace()).norm();
        if trace > TOL {
            return Err(format!("trace symmetry defect {trace:.3e}"));
        }

        for j in 0..2 {
            let lhs = space.derive(j, &ab);
            let rhs = dm
                .mul(&space.derive(j, &a), &b)
                .unwrap()
                .add(&dm.mul(&a, &space.derive(j, &b)).unwrap());
            let leibniz = dist(&lhs, &rhs);
            if leibniz > TOL {
                return Err(format!("Leibniz defect {leibniz:.3e} in direction {j}"));
            }
        }
    }
    Ok(())
}

fn check_inversion_contract() -> Result<(), String> {
    let (space, _) = nc_torus(0.25);
    let dm = space.theta();
    let one = AlgebraElement::one(2);

    let probe = |k: &AlgebraElement, label: &str| -> Result<(), String> {
        let inv = dm
            .invert(k, 1e-12, 4096)
            .map_err(|e| format!("{label}: {e}"))?;
        let defect = dm.mul(k, &inv.value).unwrap().sub(&one).l1norm();
        if defect > 1e-12 + inv.tail_bound {
            return Err(format!(
                "{label}: ‖k·k⁻¹ − 1‖₁ = {defect:.3e} exceeds 1e-12 + tail {:.3e}",
                inv.tail_bound
            ));
        }
        Ok(())
    };

    let k = parse_and_eval("3 + U + U^-1", &space).map_err(|e| e.to_string())?;
    probe(&k, "standard factor")?;

    let mut rng = SplitMix64::new(0x5E1F_0002);
    for round in 0..5 {
        let k = random_dominated_element(&mut rng, 2);
        probe(&k, &format!("dominated sample {round}"))?;
    }
    Ok(())
}

fn check_tensor_symmetry() -> Result<(), String> {
    let mut rng = SplitMix64::new(0x5E1F_0003);
    for round in 0..20 {
        let t = random_dyadic_tensor2(&mut rng, 2, 2, 2, 3);
        let flipped_twice = sigma(&sigma(&t));
        if flipped_twice != t {
            return Err(format!("σ∘σ ≠ id in round {round}"));
        }

        let sym = p_sym(&t);
        if p_sym(&sym) != sym {
            return Err(format!("P_sym not idempotent in round {round}"));
        }

        let anti = t.sub(&sym);
        if sym.add(&anti) != t {
            return Err(format!("decomposition not exact in round {round}"));
        }
        if !wedge_m(&sym).is_zero() {
            return Err(format!("symmetric part leaks through ∧ in round {round}"));
        }
        if !anti.add(&sigma(&anti)).is_zero() {
            return Err(format!("antisymmetric part not σ-odd in round {round}"));
        }
    }
    Ok(())
}

fn check_exterior_square() -> Result<(), String> {
    let (space, _) = nc_torus(0.71);
    let mut rng = SplitMix64::new(0x5E1F_0004);
    for round in 0..20 {
        let a = random_element(&mut rng, 2, 3, 5, 1.0);
        let dd = d_one_form(&space, &d_zero_form(&space, &a)).unwrap();
        if dd.l1norm() > TOL {
            return Err(format!("d∘d = {:.3e} ≠ 0 in round {round}", dd.l1norm()));
        }
    }
    Ok(())
}

fn check_heisenberg_curvature() -> Result<(), String> {
    let (space, g0, nabla0) = heisenberg();
    let g = PseudoMetric::Central(g0);
    let zero_mode = LatticePoint::zero(3);

    let paper = solve_koszul(&space, &g, &nabla0, ConventionFlag::Paper)
        .map_err(|e| e.to_string())?;
    let expected = [
        (0, 1, 2, 0.25),
        (0, 2, 1, 0.25),
        (1, 0, 2, -0.25),
        (1, 2, 0, -0.25),
        (2, 0, 1, -0.75),
        (2, 1, 0, 0.25),
    ];
    for &(i, j, k, want) in &expected {
        let got = paper.gamma(i, j, k).coeff(&zero_mode);
        if got != C64::new(want, 0.0) {
            return Err(format!(
                "Γ^{}_{{{}{}}} = {got} instead of {want}",
                i + 1,
                j + 1,
                k + 1
            ));
        }
    }
    let ric = ricci(&space, &paper).map_err(|e| e.to_string())?;
    let scal_paper = scalar(&space, &g, &ric).map_err(|e| e.to_string())?;
    if scal_paper.coeff(&zero_mode) != C64::new(-0.125, 0.0) {
        return Err(format!("Scal = {} instead of -0.125", scal_paper.coeff(&zero_mode)));
    }

    let strict = solve_koszul(&space, &g, &nabla0, ConventionFlag::Strict)
        .map_err(|e| e.to_string())?;
    if strict.gamma(2, 0, 1).coeff(&zero_mode) != C64::new(-0.5, 0.0) {
        return Err("strict Γ³₁₂ ≠ -0.5".to_string());
    }
    let ric = ricci(&space, &strict).map_err(|e| e.to_string())?;
    let scal_strict = scalar(&space, &g, &ric).map_err(|e| e.to_string())?;
    if scal_strict.coeff(&zero_mode) != C64::new(-0.5, 0.0) {
        return Err(format!("strict Scal = {} instead of -0.5", scal_strict.coeff(&zero_mode)));
    }
    Ok(())
}

fn check_torus_backends() -> Result<(), String> {
    let (space, g0) = nc_torus(0.25);
    let k = parse_and_eval("3 + U + U^-1", &space).map_err(|e| e.to_string())?;
    let g = conformal_deform(space.theta(), &k, &g0, 1e-12, 4096).map_err(|e| e.to_string())?;
    let nabla0 = reference_connection(&space);

    let koszul = solve_koszul(&space, &g, &nabla0, ConventionFlag::Strict)
        .map_err(|e| e.to_string())?;
    let conformal =
        solve_conformal(&space, &g0, &k, &nabla0, 1e-12, 4096).map_err(|e| e.to_string())?;
    let truncated = solve_truncated(&space, &g, &nabla0, 32, ConventionFlag::Strict)
        .map_err(|e| e.to_string())?
        .connection;

    let deltas = [
        ("koszul/conformal", koszul.max_delta(&conformal)),
        ("koszul/truncated", koszul.max_delta(&truncated)),
        ("conformal/truncated", conformal.max_delta(&truncated)),
    ];
    for (pair, delta) in deltas {
        if delta > AGREE {
            return Err(format!("{pair} disagree by {delta:.3e}"));
        }
    }
    Ok(())
}

fn check_flat_torus() -> Result<(), String> {
    let (space, g0) = nc_torus(0.0);
    let k = AlgebraElement::one(2);
    let g = conformal_deform(space.theta(), &k, &g0, 1e-12, 4096).map_err(|e| e.to_string())?;
    let nabla0 = reference_connection(&space);
    let c = solve_koszul(&space, &g, &nabla0, ConventionFlag::Strict)
        .map_err(|e| e.to_string())?;
    for i in 0..2 {
        for j in 0..2 {
            for l in 0..2 {
                if !c.gamma(i, j, l).is_zero() {
                    return Err(format!("Γ^{}_{{{}{}}} ≠ 0 on the flat torus", i + 1, j + 1, l + 1));
                }
            }
        }
    }
    let ric = ricci(&space, &c).map_err(|e| e.to_string())?;
    let scal = scalar(&space, &g, &ric).map_err(|e| e.to_string())?;
    if !scal.is_zero() {
        return Err("Scal ≠ 0 on the flat torus".to_string());
    }
    Ok(())
}

/// Runs every check, printing one line per check; returns the process exit
/// code (0 all green, 4 otherwise). A broken stdout pipe silences the
/// progress lines but never changes the verdict.
pub fn run_selftest() -> i32 {
    use std::io::Write;
    let checks: [(&str, fn() -> Result<(), String>); 7] = [
        ("algebra-laws", check_algebra_laws),
        ("inversion-contract", check_inversion_contract),
        ("tensor-symmetry", check_tensor_symmetry),
        ("exterior-square", check_exterior_square),
        ("heisenberg-curvature", check_heisenberg_curvature),
        ("torus-backends", check_torus_backends),
        ("flat-torus", check_flat_torus),
    ];
    let mut all_ok = true;
    let mut stdout_open = true;
    for (name, check) in checks {
        match check() {
            Ok(()) => {
                if stdout_open {
                    let mut stdout = std::io::stdout();
                    if writeln!(stdout, "selftest {name}: ok").is_err() {
                        stdout_open = false;
                    }
                }
            }
            Err(msg) => {
                all_ok = false;
                eprintln!("selftest {name}: FAIL — {msg}");
            }
        }
    }
    if all_ok {
        0
    } else {
        4
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes() {
        assert_eq!(check_algebra_laws(), Ok(()));
        assert_eq!(check_inversion_contract(), Ok(()));
        assert_eq!(check_tensor_symmetry(), Ok(()));
        assert_eq!(check_exterior_square(), Ok(()));
        assert_eq!(check_heisenberg_curvature(), Ok(()));
        assert_eq!(check_torus_backends(), Ok(()));
        assert_eq!(check_flat_torus(), Ok(()));
    }
}
