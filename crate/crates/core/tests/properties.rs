mod common;

use boundkey::diagram::from_diagram;
use boundkey::dist::{JointDistribution3, NoisyChannel, Party};
use boundkey::io::{self, DiagramFile, DistributionFile};
use boundkey::keyrate::{advantage, noisy_bound, Direction};
use boundkey::protocol::{run_pipeline, ProtocolStep};
use boundkey::quantum::{lift_state, reduce_to_ab};
use common::{
    max_abs_diff, min_eig_cholesky_bisection, partial_transpose, random_stochastic,
    random_unambiguous, Dense,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn channel(rows: &[Vec<f64>]) -> NoisyChannel {
    NoisyChannel::from_rows(rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diagram_built_distributions_are_unambiguous(seed in any::<u64>()) {
        let p = random_unambiguous(&mut rng(seed), 5, 8);
        prop_assert!(Dense::of(&p).unambiguous());
        prop_assert!(p.validate_unambiguous().is_unambiguous());
    }

    #[test]
    fn second_eve_symbol_on_a_cell_is_flagged(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_unambiguous(&mut r, 4, 6);
        let [d_a, d_b, d_e] = p.dims();
        let cells: Vec<(usize, usize, usize)> = p.entries().filter(|e| e.3 > 0.0).map(|(a, b, e, _)| (a, b, e)).collect();
        let (a, b, e) = cells[r.random_range(0..cells.len())];
        let d_e2 = d_e + 1;
        let q = JointDistribution3::from_fn(d_a, d_b, d_e2, |x, y, z| {
            let base = if z < d_e { p.get(x, y, z) } else { 0.0 };
            if (x, y) == (a, b) && z == e {
                base / 2.0
            } else if (x, y) == (a, b) && z == d_e {
                p.get(a, b, e) / 2.0
            } else {
                base
            }
        })
        .unwrap();
        prop_assert!(!Dense::of(&q).unambiguous());
        let report = q.validate_unambiguous();
        prop_assert!(!report.is_unambiguous());
        prop_assert!(!report.violations.is_empty());
    }

    #[test]
    fn lifted_density_matrix_matches_dense_oracle(seed in any::<u64>()) {
        let p = random_unambiguous(&mut rng(seed), 4, 6);
        let rho = reduce_to_ab(&lift_state(&p));
        let dense = Dense::of(&p).rho();
        prop_assert!(max_abs_diff(rho.matrix(), &dense) < 1e-14);
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lifted_state_is_positive_semidefinite(seed in any::<u64>()) {
        let p = random_unambiguous(&mut rng(seed), 4, 6);
        let rho = reduce_to_ab(&lift_state(&p));
        let n = rho.n();
        let lib = rho.min_eigenvalue().unwrap();
        let oracle = min_eig_cholesky_bisection(rho.matrix(), n);
        prop_assert!(lib > -1e-12);
        prop_assert!((lib - oracle).abs() < 1e-8, "lib {} oracle {}", lib, oracle);
    }

    #[test]
    fn partial_transpose_matches_oracle_and_is_an_involution(seed in any::<u64>()) {
        let p = random_unambiguous(&mut rng(seed), 4, 6);
        let rho = reduce_to_ab(&lift_state(&p));
        let pt = rho.partial_transpose();
        let oracle = partial_transpose(rho.matrix(), rho.d_a(), rho.d_b());
        prop_assert_eq!(pt.matrix(), &oracle[..]);
        let back = pt.partial_transpose();
        prop_assert_eq!(back.matrix(), rho.matrix());
        prop_assert!((pt.trace() - rho.trace()).abs() < 1e-15);
    }

    #[test]
    fn noisy_bound_matches_dense_oracle(seed in any::<u64>(), d_x in 1usize..4) {
        let mut r = rng(seed);
        let p = random_unambiguous(&mut r, 4, 6);
        let q = random_stochastic(&mut r, d_x, p.d_a());
        let lib = noisy_bound(&p, &channel(&q)).unwrap();
        let oracle = Dense::of(&p).noisy_bound(&q);
        prop_assert!((lib - oracle).abs() < 1e-12, "lib {} oracle {}", lib, oracle);
    }

    #[test]
    fn identity_channel_gives_the_advantage(seed in any::<u64>()) {
        let p = random_unambiguous(&mut rng(seed), 4, 6);
        let id: Vec<Vec<f64>> = (0..p.d_a()).map(|x| (0..p.d_a()).map(|a| f64::from(u8::from(x == a))).collect()).collect();
        let d = Dense::of(&p);
        let adv = d.h([true, false, true]) - d.h([true, true, false]) + d.h([false, true, false]) - d.h([false, false, true]);
        prop_assert!((noisy_bound(&p, &channel(&id)).unwrap() - adv).abs() < 1e-12);
        prop_assert!((advantage(&p, Direction::AliceToBob) - adv).abs() < 1e-12);
    }

    #[test]
    fn channels_preserve_normalization(seed in any::<u64>(), d_x in 1usize..5) {
        let mut r = rng(seed);
        let p = random_unambiguous(&mut r, 4, 6);
        let q = random_stochastic(&mut r, d_x, p.d_b());
        let out = p.apply_channel(&channel(&q), Party::B).unwrap();
        prop_assert_eq!(out.dims(), [p.d_a(), d_x, p.d_e()]);
        prop_assert!((out.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eve_relabelling_keeps_every_entropy(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_unambiguous(&mut r, 4, 6);
        let mut perm: Vec<usize> = (0..p.d_e()).collect();
        for i in (1..perm.len()).rev() {
            perm.swap(i, r.random_range(0..=i));
        }
        let q = p.relabel_eve(&perm).unwrap();
        prop_assert!(p.equal_up_to_eve_relabel(&q, 1e-15));
        prop_assert_eq!(p.canonical_eve_order(), q.canonical_eve_order());
        for parties in [&[Party::E][..], &[Party::A, Party::E], &[Party::B, Party::E]] {
            prop_assert!((p.entropy_of(parties) - q.entropy_of(parties)).abs() < 1e-12);
        }
    }

    #[test]
    fn distribution_json_round_trip(seed in any::<u64>()) {
        let p = random_unambiguous(&mut rng(seed), 5, 8);
        let text = io::to_json_string(&DistributionFile::from(&p)).unwrap();
        let back: DistributionFile = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_distribution().unwrap(), p);
    }

    #[test]
    fn diagram_round_trip_and_marginal(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_unambiguous(&mut r, 4, 6);
        let labels: Vec<(usize, usize, usize)> = p.entries().filter(|e| e.3 > 0.0).map(|(a, b, e, _)| (a, b, e)).collect();
        let mut cliques: Vec<Vec<(usize, usize)>> = vec![Vec::new(); p.d_e()];
        for &(a, b, e) in &labels {
            cliques[e].push((a, b));
        }
        cliques.retain(|c| !c.is_empty());
        let d = boundkey::Diagram::new(p.d_a(), p.d_b(), cliques).unwrap();
        let text = io::to_json_string(&d).unwrap();
        let back: DiagramFile = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_diagram().unwrap(), d.clone());

        let p_ab = p.marginal(&[Party::A, Party::B]);
        let rebuilt = from_diagram(&d, &p_ab).unwrap();
        prop_assert!(rebuilt.validate_unambiguous().is_unambiguous());
        let m = rebuilt.marginal(&[Party::A, Party::B]);
        prop_assert!(max_abs_diff(m.probs(), p_ab.probs()) < 1e-15);
    }

    #[test]
    fn uninformative_message_keeps_the_rate(seed in any::<u64>(), d_x in 1usize..4) {
        let mut r = rng(seed);
        let p = random_unambiguous(&mut r, 4, 6);
        let q = channel(&random_stochastic(&mut r, d_x, p.d_a()));
        let silent = ProtocolStep::new(Party::B, &[vec![1.0; p.d_b()]]).unwrap();
        let direct = noisy_bound(&p, &q).unwrap();
        let after = run_pipeline(&p, &[silent], Some(&q), Direction::AliceToBob).unwrap().noisy_bound;
        prop_assert!((direct - after).abs() < 1e-12);
    }

    #[test]
    fn public_messages_never_break_normalization(seed in any::<u64>(), d_m in 1usize..4) {
        let mut r = rng(seed);
        let p = random_unambiguous(&mut r, 4, 6);
        let rows = random_stochastic(&mut r, d_m, p.d_a());
        let step = ProtocolStep::new(Party::A, &rows).unwrap();
        let state = boundkey::TranscriptState::new(p.clone()).public_message_step(&step).unwrap();
        prop_assert!((state.distribution().total() - 1.0).abs() < 1e-12);
    }
}
