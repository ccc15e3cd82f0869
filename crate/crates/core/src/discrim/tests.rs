use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::channel::{build_state_pair, FieldModel, NoiseModel, Protocol, state_pair_at};
use crate::qmat::{cr, C64};

fn random_pair(rng: &mut ChaCha8Rng) -> StatePair {
    let nu = 1.0 - rng.random::<f64>();
    let mu = C64::from_polar(rng.random::<f64>().sqrt(), rng.random_range(-PI..PI));
    let eta0 = rng.random_range(0.1..0.9);
    build_state_pair(nu, mu, eta0).unwrap()
}

fn reference_pair() -> StatePair {
    build_state_pair(0.8, C64::from_polar(1.0, -PI / 4.0), 0.5).unwrap()
}

#[test]
fn orthogonal_pure_states() {
    for eta0 in [0.5, 0.2, 0.85] {
        let pair = build_state_pair(1.0, cr(-1.0), eta0).unwrap();
        let sol = mc_solve(&pair).unwrap();
        assert!((sol.c0_max - 1.0).abs() < 1e-12);
        assert!((sol.c1_max - 1.0).abs() < 1e-12);
        assert!(sol.p_inc_opt.abs() < 1e-12);
        let plus = CMat2::from_real([[0.5, 0.5], [0.5, 0.5]]);
        let minus = CMat2::from_real([[0.5, -0.5], [-0.5, 0.5]]);
        assert!(sol.povm.pi0.max_abs_diff(&plus) < 1e-12);
        assert!(sol.povm.pi1.max_abs_diff(&minus) < 1e-12);
    }
}

#[test]
fn vanishing_coherence_gives_priors() {
    for nu in [0.0, 1e-13, 1e-10] {
        for eta0 in [0.5, 0.3] {
            let pair = build_state_pair(nu, C64::from_polar(0.7, 1.1), eta0).unwrap();
            let sol = mc_solve(&pair).unwrap();
            assert!((sol.c0_max - eta0).abs() < 1e-9, "nu={nu}");
            assert!((sol.c1_max - (1.0 - eta0)).abs() < 1e-9);
            assert!(sol.p_inc_opt < 1e-9);
        }
    }
    let exact = mc_solve(&build_state_pair(0.0, cr(1.0), 0.5).unwrap()).unwrap();
    assert_eq!(exact.branch, Branch::Degenerate);
}

#[test]
fn identical_pure_states_are_degenerate() {
    let pair = build_state_pair(1.0, cr(1.0), 0.3).unwrap();
    let sol = mc_solve(&pair).unwrap();
    assert_eq!(sol.branch, Branch::Degenerate);
    assert_eq!((sol.c0_max, sol.c1_max, sol.p_inc_opt), (0.3, 0.7, 0.0));
}

#[test]
fn reference_example_agrees_with_oracle() {
    let pair = reference_pair();
    let sol = mc_solve(&pair).unwrap();
    let oracle = povm_oracle_with_slack(&pair, 256, 0.0).unwrap();
    assert!((sol.c0_max - oracle.c0).abs() < 2e-3);
    assert!((sol.c1_max - oracle.c1).abs() < 2e-3);
    assert!(oracle.c0 <= sol.c0_max + 1e-12);
    assert!(sol.p_inc_opt <= oracle.p_inc + 2e-3);
}

#[test]
fn tilde_rho_zero_weighted_by_eta0_not_eta1() {
    // with unequal priors only the η₀ weighting reproduces the searched optimum
    let pair = build_state_pair(0.9, C64::from_polar(0.8, 2.0), 0.3).unwrap();
    let sol = mc_solve(&pair).unwrap();
    let (c0, c1) = oracle_confidences(&pair, 256).unwrap();
    assert!((sol.c0_max - c0).abs() < 2e-3 && (sol.c1_max - c1).abs() < 2e-3);

    let inv_sqrt = psd_pow(&pair.rho, -0.5).unwrap();
    let with_eta1 = herm_eig2(&symmetrized(inv_sqrt * pair.rho0 * inv_sqrt * pair.eta1())).unwrap();
    assert!((with_eta1.max() - c0).abs() > 0.1);
}

#[test]
fn boundary_branches_match_oracle() {
    let mut seen = [false; 2];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..4000 {
        let pair = random_pair(&mut rng);
        let sol = mc_solve(&pair).unwrap();
        let slot = match sol.branch {
            Branch::BoundaryA => 0,
            Branch::BoundaryB => 1,
            _ => continue,
        };
        if seen[slot] {
            continue;
        }
        seen[slot] = true;
        let oracle = povm_oracle_with_slack(&pair, 128, 0.0).unwrap();
        assert!((sol.p_inc_opt - oracle.p_inc).abs() < 2e-3, "{:?}: {} vs {}", sol.branch, sol.p_inc_opt, oracle.p_inc);
        // the silent detector really is the one the oracle leaves near zero weight
        let achieved = sol.povm.inconclusive_rate(&pair);
        assert!((achieved - sol.p_inc_opt).abs() < 1e-12);
        if seen == [true, true] {
            break;
        }
    }
    assert_eq!(seen, [true, true], "random draws never reached both boundary branches");
}

#[test]
fn helstrom_values() {
    let ortho = build_state_pair(1.0, cr(-1.0), 0.5).unwrap();
    assert!(helstrom(&ortho).unwrap().abs() < 1e-15);
    for eta0 in [0.5, 0.2, 0.7] {
        let same = build_state_pair(0.6, cr(1.0), eta0).unwrap();
        assert!((helstrom(&same).unwrap() - eta0.min(1.0 - eta0)).abs() < 1e-15);
        let me = helstrom_povm(&same).unwrap();
        assert!((conditional_error(&me, &same).unwrap() - eta0.min(1.0 - eta0)).abs() < 1e-15);
    }
    // pure states with overlap cos(π/4)
    let quarter = build_state_pair(1.0, C64::new(0.0, 1.0), 0.5).unwrap();
    let overlap = (PI / 4.0).cos();
    let want = 0.5 * (1.0 - (1.0 - overlap * overlap).sqrt());
    assert!((helstrom(&quarter).unwrap() - want).abs() < 1e-15);
    assert!((want - 0.146447).abs() < 1e-6);
}

#[test]
fn helstrom_povm_error_matches_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..500 {
        let pair = random_pair(&mut rng);
        let me = helstrom_povm(&pair).unwrap();
        assert!((conditional_error(&me, &pair).unwrap() - helstrom(&pair).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn conditional_error_cases() {
    let ortho = build_state_pair(1.0, cr(-1.0), 0.5).unwrap();
    let sol = mc_solve(&ortho).unwrap();
    assert!(conditional_error(&sol.povm, &ortho).unwrap() < 1e-12);
    let blind = Povm { pi0: CMat2::zero(), pi1: CMat2::zero(), pi_inc: CMat2::identity() };
    assert_eq!(conditional_error(&blind, &ortho), Err(Error::AllInconclusive));
}

#[test]
fn threshold_is_identity_when_below() {
    let pair = reference_pair();
    let sol = mc_solve(&pair).unwrap();
    let t = threshold_measurement(&sol, &pair, sol.p_inc_opt + 0.01).unwrap();
    assert_eq!(t.lambda, 0.0);
    assert_eq!(t.povm, sol.povm);
}

#[test]
fn threshold_zero_is_minimum_error() {
    let pair = build_state_pair(0.9, C64::from_polar(1.0, 0.3), 0.5).unwrap();
    let sol = mc_solve(&pair).unwrap();
    assert!(sol.p_inc_opt > 0.0);
    let t = threshold_measurement(&sol, &pair, 0.0).unwrap();
    assert_eq!(t.lambda, 1.0);
    let me = helstrom_povm(&pair).unwrap();
    assert!(t.povm.pi0.max_abs_diff(&me.pi0) < 1e-15);
    assert!(t.p_inc.abs() < 1e-15);
}

#[test]
fn threshold_on_static_single_nv() {
    let noise = NoiseModel::StretchedExp { t2_star: 0.4, p: 2.0 };
    let field = FieldModel::static_known(50.0);
    let me_conf = |pair: &StatePair| {
        let me = helstrom_povm(pair).unwrap();
        (me.confidence(pair, 0), me.confidence(pair, 1))
    };
    let mut hits = 0;
    for k in 1..40 {
        let t = 0.005 * k as f64;
        let pair = state_pair_at(&noise, &field, &Protocol::Free { t }, 0.5).unwrap();
        let sol = mc_solve(&pair).unwrap();
        if sol.p_inc_opt <= 0.6 {
            continue;
        }
        hits += 1;
        let th = threshold_measurement(&sol, &pair, 0.6).unwrap();
        assert!((th.p_inc - 0.6).abs() < 1e-12);
        let (m0, m1) = me_conf(&pair);
        let (c0, c1) = (th.c0.unwrap(), th.c1.unwrap());
        assert!(c0 >= m0.unwrap() - 1e-12 && c0 <= sol.c0_max + 1e-12);
        assert!(c1 >= m1.unwrap() - 1e-12 && c1 <= sol.c1_max + 1e-12);
        assert!(conditional_error(&th.povm, &pair).unwrap() < helstrom(&pair).unwrap());
    }
    assert!(hits > 3);
}

#[test]
fn solver_outputs_are_valid_measurements() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let pair = random_pair(&mut rng);
        let sol = mc_solve(&pair).unwrap();
        assert!(sol.povm.completeness_error() <= 1e-12);
        assert!(sol.povm.min_eigenvalue().unwrap() >= -1e-12, "{pair:?}");
        assert!(sol.c0_max >= pair.eta0 - 1e-12 && sol.c1_max >= pair.eta1() - 1e-12);
        assert!((sol.povm.inconclusive_rate(&pair) - sol.p_inc_opt).abs() < 1e-10);
        if sol.branch == Branch::Interior {
            let c0 = sol.povm.confidence(&pair, 0).unwrap();
            let c1 = sol.povm.confidence(&pair, 1).unwrap();
            assert!((c0 - sol.c0_max).abs() <= 1e-9);
            assert!((c1 - sol.c1_max).abs() <= 1e-9);
        }
    }
}

#[test]
fn complement_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..2000 {
        let pair = random_pair(&mut rng);
        let sol = mc_solve(&pair).unwrap();
        if sol.branch == Branch::Degenerate {
            continue;
        }
        let inv_sqrt = psd_pow(&pair.rho, -0.5).unwrap();
        let tilde1 = symmetrized(inv_sqrt * pair.rho1 * inv_sqrt * pair.eta1());
        assert!((herm_eig2(&tilde1).unwrap().max() - (1.0 - sol.gamma.min())).abs() <= 1e-12);
    }
}

#[test]
fn oracle_never_beats_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..12 {
        let pair = random_pair(&mut rng);
        let sol = mc_solve(&pair).unwrap();
        let oracle = povm_oracle_with_slack(&pair, 256, 0.0).unwrap();
        assert!(oracle.c0 <= sol.c0_max + 1e-12 && oracle.c1 <= sol.c1_max + 1e-12);
        assert!(sol.c0_max - oracle.c0 <= 2e-3 && sol.c1_max - oracle.c1 <= 2e-3);
        assert!(sol.p_inc_opt <= oracle.p_inc + 2e-3, "{} vs {}", sol.p_inc_opt, oracle.p_inc);
        let slack = povm_oracle(&pair, 256).unwrap();
        assert!(slack.p_inc <= oracle.p_inc + 1e-12);
    }
}

#[test]
fn oracle_recovers_orthogonal_case() {
    let pair = build_state_pair(1.0, cr(-1.0), 0.5).unwrap();
    let oracle = povm_oracle(&pair, 64).unwrap();
    assert!((oracle.c0 - 1.0).abs() < 1e-12 && (oracle.c1 - 1.0).abs() < 1e-12);
    assert!(oracle.p_inc < 1e-12);
    assert!(povm_oracle(&pair, 63).is_err());
}

#[test]
fn interpolation_is_linear_and_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let pair = random_pair(&mut rng);
        let sol = mc_solve(&pair).unwrap();
        if sol.branch != Branch::Interior || sol.p_inc_opt < 1e-3 {
            continue;
        }
        let mut prev: Option<(f64, f64)> = None;
        let mut dir: [Option<f64>; 2] = [None, None];
        for k in 0..=20 {
            let thresh = sol.p_inc_opt * (1.0 - k as f64 / 20.0);
            let t = threshold_measurement(&sol, &pair, thresh).unwrap();
            assert!((t.p_inc - (1.0 - t.lambda) * sol.p_inc_opt).abs() < 1e-12);
            // the minimum-error end may never fire one outcome
            let (Some(c0), Some(c1)) = (t.c0, t.c1) else { break };
            let cur = (c0, c1);
            if let Some(p) = prev {
                for (j, d) in [cur.0 - p.0, cur.1 - p.1].into_iter().enumerate() {
                    if d.abs() < 1e-13 {
                        continue;
                    }
                    let s = d.signum();
                    assert!(dir[j].map_or(true, |x| x == s), "confidence {j} not monotone");
                    dir[j] = Some(s);
                }
            }
            prev = Some(cur);
        }
    }
}

#[test]
fn equal_confidence_for_symmetric_pure_phase() {
    // equal priors and |μ| = 1: a rotation swaps the two states
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..1000 {
        let nu = rng.random::<f64>();
        let mu = C64::from_polar(1.0, rng.random_range(-PI..PI));
        let sol = mc_solve(&build_state_pair(nu, mu, 0.5).unwrap()).unwrap();
        assert!((sol.c0_max - sol.c1_max).abs() <= 1e-12);
    }
}

#[test]
fn mc_confidence_at_least_minimum_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..2000 {
        let pair = random_pair(&mut rng);
        let sol = mc_solve(&pair).unwrap();
        let me = helstrom_povm(&pair).unwrap();
        for (j, best) in [sol.c0_max, sol.c1_max].into_iter().enumerate() {
            if let Some(c) = me.confidence(&pair, j) {
                assert!(best >= c - 1e-12);
            }
        }
    }
}

#[test]
fn mc_success_at_least_minimum_error_for_symmetric_pure_phase() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..2000 {
        let nu = 1.0 - rng.random::<f64>();
        let pair = build_state_pair(nu, C64::from_polar(1.0, rng.random_range(-PI..PI)), 0.5).unwrap();
        let sol = mc_solve(&pair).unwrap();
        let Ok(mc) = conditional_error(&sol.povm, &pair) else { continue };
        let me = conditional_error(&helstrom_povm(&pair).unwrap(), &pair).unwrap();
        assert!(1.0 - mc >= 1.0 - me - 1e-12, "{pair:?}");
    }
}

#[test]
fn conclusive_success_can_fall_below_minimum_error() {
    // per-outcome confidences dominate, but the firing rates reweight them
    let pair = build_state_pair(0.39874098471571584, C64::new(-0.5196712011635395, -0.2988414489157029), 0.7794318860872835).unwrap();
    let sol = mc_solve(&pair).unwrap();
    let mc = conditional_error(&sol.povm, &pair).unwrap();
    let me = conditional_error(&helstrom_povm(&pair).unwrap(), &pair).unwrap();
    assert!(mc > me);
}

#[test]
fn solver_is_deterministic() {
    let pair = reference_pair();
    assert_eq!(mc_solve(&pair).unwrap(), mc_solve(&pair).unwrap());
}
