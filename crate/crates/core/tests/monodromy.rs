use epcore::finder::refine_ep;
use epcore::linalg::c;
use epcore::monodromy::{track_loop, track_turns, Gauge, LoopPath, Orientation, TrackOptions};
use epcore::twolevel::TwoLevelParams;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn deformed_loops_give_the_same_monodromy(radius in 0.2f64..1.5, dx in -0.15f64..0.15, dy in -0.15f64..0.15) {
        let f = TwoLevelParams::canonical_dimer().family();
        let reference = track_loop(&f, &LoopPath::new(c(0.0, -1.0), 0.5, Orientation::Ccw), &[0, 1]).unwrap();
        let lp = LoopPath::new(c(dx, -1.0 + dy), radius, Orientation::Ccw);
        let got = track_loop(&f, &lp, &[0, 1]).unwrap();
        prop_assert_eq!(&got.permutation, &reference.permutation);
        for k in 0..2 {
            prop_assert!((got.end_factors[k] - reference.end_factors[k]).norm() < 1e-6);
        }
    }
}

#[test]
fn loop_then_reverse_is_identity() {
    let f = TwoLevelParams::canonical_dimer().family();
    let lp = LoopPath::new(c(0.0, -1.0), 0.5, Orientation::Ccw);
    let there = track_loop(&f, &lp, &[0, 1]).unwrap();
    let back = track_loop(&f, &lp.reversed(), &[0, 1]).unwrap();
    let round = there.then(&back).unwrap();
    assert!(round.is_identity());
    for z in &round.end_factors {
        assert!((z - 1.0).norm() < 1e-8, "{z}");
    }
}

#[test]
fn loop_enclosing_both_eps_returns_each_level() {
    let f = TwoLevelParams::canonical_dimer().family();
    let r = track_loop(&f, &LoopPath::new(c(0.0, 0.0), 2.0, Orientation::Ccw), &[0, 1]).unwrap();
    assert!(r.is_identity());
}

#[test]
fn holomorphic_gauge_returns_minus_one_after_two_turns() {
    let f = TwoLevelParams::canonical_dimer().family();
    let ep = refine_ep(&f, c(0.1, -0.9)).unwrap();
    let opts = TrackOptions {
        gauge: Gauge::Holomorphic,
        ..Default::default()
    };
    let lp = LoopPath::new(ep.lambda(), 0.4, Orientation::Ccw);
    let turns = track_turns(&f, &lp, &[0, 1], 4, &opts).unwrap();
    assert!(turns[0].is_transposition(0, 1));
    assert!(turns[1].is_identity());
    for z in &turns[1].end_factors {
        assert!((z + 1.0).norm() < 1e-6, "{z}");
    }
    for z in &turns[3].end_factors {
        assert!((z - 1.0).norm() < 1e-6, "{z}");
    }
}
