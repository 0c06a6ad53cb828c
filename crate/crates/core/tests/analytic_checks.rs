use ids_bandit::analytic::{exponent_residual, zeta_exponents, FairCoinSolution, SymmetricSolution};
use ids_bandit::solver::{extract_greedy_policy, reachable_beliefs, value_iteration};
use ids_bandit::{BanditSpec, Belief, BeliefGrid, DiscountedProblem, Observation, Sign, SolverOptions};

// One exact Bellman backup (no grid) of a value given as a closure.
fn backup(spec: &BanditSpec, gamma: f64, beta: f64, v: &dyn Fn(f64) -> f64) -> f64 {
    let b = Belief::new(beta).unwrap();
    Sign::BOTH
        .iter()
        .map(|&a| {
            let future: f64 = Observation::BOTH
                .iter()
                .filter(|&&y| spec.obs_prob(b, a, y) > 0.0)
                .map(|&y| spec.obs_prob(b, a, y) * v(spec.belief_update(b, a, y).unwrap().beta()))
                .sum();
            spec.expected_reward(b, a) + gamma * future
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn symmetric_closed_form_is_a_bellman_fixed_point() {
    for theta in [0.55, 0.7] {
        for gamma in [0.5, 0.9, 0.99] {
            let sol = SymmetricSolution::new(theta, gamma).unwrap();
            let spec = BanditSpec::symmetric(theta).unwrap();
            for beta in reachable_beliefs(&spec, 0.0, 6).unwrap() {
                let r = backup(&spec, gamma, beta, &|x| sol.value(x)) - sol.value(beta);
                assert!(r.abs() < 1e-6, "theta={theta} gamma={gamma} beta={beta}: residual {r}");
            }
        }
    }
}

#[test]
fn exponents_solve_their_equation() {
    for theta in [0.51, 0.55, 0.6, 0.7, 0.8, 0.9, 0.99] {
        for gamma in [0.1, 0.5, 0.9, 0.99, 0.999, 0.9999] {
            let z = zeta_exponents(theta, gamma).unwrap();
            assert!(z.zeta_plus < 0.0 && z.zeta_minus > 1.0);
            assert!(exponent_residual(theta, gamma, z.zeta_plus).abs() < 1e-10);
            assert!(exponent_residual(theta, gamma, z.zeta_minus).abs() < 1e-10);
        }
    }
}

#[test]
fn branches_join_continuously() {
    for theta in [0.55, 0.7, 0.9] {
        for gamma in [0.9, 0.99] {
            let s = SymmetricSolution::new(theta, gamma).unwrap();
            assert!((s.value(1e-15) - s.value(-1e-15)).abs() < 1e-12);
            assert_eq!(s.value(1.0), theta / (1.0 - gamma));
            assert_eq!(s.value(-1.0), theta / (1.0 - gamma));
            let f = FairCoinSolution::new(theta, gamma).unwrap();
            let eps = 1e-13;
            assert!((f.value(f.beta_c + eps) - f.value(f.beta_c - eps)).abs() < 1e-9);
            assert!(f.beta_c < 0.0 && f.beta_c > -1.0);
        }
    }
}

#[test]
fn numeric_solution_matches_closed_forms() {
    let grid = BeliefGrid::new(2001).unwrap();
    for theta in [0.55, 0.7] {
        let prob = DiscountedProblem::new(BanditSpec::symmetric(theta).unwrap(), 0.95).unwrap();
        let v = value_iteration(&prob, &grid, SolverOptions::new(1e-10, 0.95).unwrap()).unwrap().value;
        let sol = SymmetricSolution::new(theta, 0.95).unwrap();
        for beta in reachable_beliefs(&prob.spec, 0.0, 6).unwrap() {
            assert!(((v.at(beta) - sol.value(beta)) / sol.value(beta)).abs() < 1e-3);
        }
    }
    // the fair-coin boundary formula is a long-horizon approximation
    for tp in [0.6, 0.8] {
        let prob = DiscountedProblem::new(BanditSpec::fair_coin(tp).unwrap(), 0.99).unwrap();
        let v = value_iteration(&prob, &grid, SolverOptions::new(1e-10, 0.99).unwrap()).unwrap().value;
        let bc = extract_greedy_policy(&prob, &v).decision_boundary().unwrap();
        let f = FairCoinSolution::new(tp, 0.99).unwrap();
        assert!(bc < 0.0);
        assert!((bc - f.beta_c).abs() <= (2.0 * grid.spacing()).max(0.1 * f.beta_c.abs()), "{bc} vs {}", f.beta_c);
    }
}

#[test]
fn regret_limit_at_long_horizon() {
    // R*(0) -> 1 / (2 delta) as gamma -> 1
    let grid = BeliefGrid::new(2001).unwrap();
    let theta = 0.7;
    let prob = DiscountedProblem::new(BanditSpec::symmetric(theta).unwrap(), 0.9999).unwrap();
    let v = value_iteration(&prob, &grid, SolverOptions::new(1e-9, 0.9999).unwrap()).unwrap().value;
    let r0 = prob.mdp_value(Belief::UNIFORM) - v.at(0.0);
    let limit = 1.0 / (2.0 * (2.0 * theta - 1.0));
    assert!(((r0 - limit) / limit).abs() < 0.02, "{r0} vs {limit}");
}
