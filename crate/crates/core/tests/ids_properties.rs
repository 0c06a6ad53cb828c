use ids_bandit::ids::{ids_action_dist, info_ratio, information_function, IdsConfig};
use ids_bandit::{ActionDistribution, BanditSpec, Belief, Observation, Sign};
use proptest::prelude::*;

fn spec() -> impl Strategy<Value = BanditSpec> {
    (0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(a, b)| BanditSpec::new(a, b).unwrap())
}

fn dist(q: f64) -> ActionDistribution {
    ActionDistribution::new(q).unwrap()
}

fn greedy_q(spec: &BanditSpec, b: Belief) -> f64 {
    if spec.expected_reward(b, Sign::Plus) >= spec.expected_reward(b, Sign::Minus) {
        1.0
    } else {
        0.0
    }
}

// H(b) - gamma E[H(b')] spelled out over actions and observations.
fn info_direct(spec: &BanditSpec, b: Belief, q: f64, gamma: f64) -> f64 {
    let mut after = 0.0;
    for (a, pa) in [(Sign::Minus, 1.0 - q), (Sign::Plus, q)] {
        for y in Observation::BOTH {
            let py = spec.obs_prob(b, a, y);
            if pa > 0.0 && py > 0.0 {
                after += pa * py * spec.belief_update(b, a, y).unwrap().entropy();
            }
        }
    }
    b.entropy() - gamma * after
}

proptest! {
    #[test]
    fn information_matches_definition_and_is_affine(
        s in spec(), beta in -1.0f64..=1.0, q in 0.0f64..=1.0, gamma in 0.0f64..0.999
    ) {
        let b = Belief::new(beta).unwrap();
        let i0 = information_function(&s, b, dist(0.0), gamma);
        let i1 = information_function(&s, b, dist(1.0), gamma);
        let iq = information_function(&s, b, dist(q), gamma);
        prop_assert!((iq - ((1.0 - q) * i0 + q * i1)).abs() <= 1e-14);
        prop_assert!((iq - info_direct(&s, b, q, gamma).max(0.0)).abs() <= 1e-14);
        prop_assert!(iq >= (1.0 - gamma) * b.entropy() - 1e-15);
    }

    #[test]
    fn symmetric_specs_play_greedy(t in 0.0f64..=1.0, beta in -1.0f64..=1.0, alpha in 0.0f64..=1.0, gamma in 0.0f64..0.999) {
        let s = BanditSpec::symmetric(t).unwrap();
        let b = Belief::new(beta).unwrap();
        let i0 = information_function(&s, b, dist(0.0), gamma);
        let i1 = information_function(&s, b, dist(1.0), gamma);
        prop_assert!((i0 - i1).abs() <= 1e-12);
        let r = ids_action_dist(&s, b, &IdsConfig::new(alpha, gamma).unwrap());
        let d0 = s.one_step_regret(b, dist(0.0));
        let d1 = s.one_step_regret(b, dist(1.0));
        // at exact reward ties either action is greedy
        if (d0 - d1).abs() > 1e-12 {
            prop_assert_eq!(r.q_star.q(), greedy_q(&s, b));
        }
    }

    #[test]
    fn alpha_zero_plays_pure_actions(s in spec(), beta in -1.0f64..=1.0, gamma in 0.0f64..0.999) {
        let r = ids_action_dist(&s, Belief::new(beta).unwrap(), &IdsConfig::new(0.0, gamma).unwrap());
        let q = r.q_star.q();
        prop_assert!(q == 0.0 || q == 1.0);
    }

    #[test]
    fn returned_q_minimizes_the_ratio(
        s in spec(), beta in -0.999f64..=0.999, alpha in 0.05f64..=1.0, gamma in 0.0f64..0.999
    ) {
        let b = Belief::new(beta).unwrap();
        let r = ids_action_dist(&s, b, &IdsConfig::new(alpha, gamma).unwrap());
        prop_assume!(r.ratio.is_some());
        let best = r.ratio.unwrap();
        for k in 0..=1000 {
            let q = k as f64 / 1000.0;
            let d = s.one_step_regret(b, dist(q));
            let i = information_function(&s, b, dist(q), gamma);
            if let Ok(psi) = info_ratio(d, i, alpha) {
                prop_assert!(psi >= best * (1.0 - 1e-9) - 1e-300, "q={q}: {psi} < {best}");
            }
        }
    }
}

#[test]
fn near_certainty_ids_is_greedy() {
    for (tm, tp) in [(0.6, 0.8), (0.9, 0.55), (0.5, 0.7), (0.7, 0.7)] {
        let s = BanditSpec::new(tm, tp).unwrap();
        for beta in [-1.0, -0.999999, 0.999999, 1.0] {
            let b = Belief::new(beta).unwrap();
            for alpha in [0.0, 0.5, 1.0] {
                let r = ids_action_dist(&s, b, &IdsConfig::new(alpha, 0.99).unwrap());
                assert!(
                    (r.q_star.q() - greedy_q(&s, b)).abs() < 1e-6,
                    "({tm}, {tp}) beta={beta} alpha={alpha}: q={}",
                    r.q_star.q()
                );
            }
        }
    }
}
