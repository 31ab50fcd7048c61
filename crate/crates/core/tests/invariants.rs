use std::sync::Arc;

use fockline::{
    apply_beamsplitter, apply_hwp, apply_pbs, pattern_distribution, DetectorBank, DetectorModel,
    ModeRegistry, OccupationVector, PureState,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn registry() -> Arc<ModeRegistry> {
    ModeRegistry::new(["a", "b", "c", "d"]).unwrap()
}

/// Up to six terms over the modes of paths `a` and `b` plus spectator `c`,
/// at most four photons each.
fn state() -> impl Strategy<Value = PureState> {
    let term = (
        prop::collection::vec(0u8..=2, 6),
        -1.0f64..1.0,
        -1.0f64..1.0,
    );
    prop::collection::vec(term, 1..6).prop_filter_map("zero state", |terms| {
        let reg = registry();
        let mut out = Vec::new();
        for (counts, re, im) in terms {
            let mut full = vec![0u8; reg.num_modes()];
            full[..6].copy_from_slice(&counts);
            if full.iter().map(|&n| n as u32).sum::<u32>() > 4 {
                continue;
            }
            out.push((OccupationVector::from_counts(full), Complex64::new(re, im)));
        }
        PureState::from_terms(&reg, out).ok()?.normalize().ok()
    })
}

proptest! {
    #[test]
    fn json_round_trip(s in state()) {
        let back = PureState::from_json(&s.to_json().unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&s).unwrap() <= 1e-15);
    }

    #[test]
    fn elements_preserve_inner_products(s in state(), t in state()) {
        let ops: [&dyn Fn(&PureState) -> PureState; 3] = [
            &|x| apply_beamsplitter(x, "a", "b", "a", "b").unwrap(),
            &|x| apply_pbs(x, "a", Some("b"), "b", "a").unwrap(),
            &|x| apply_hwp(x, "b").unwrap(),
        ];
        for op in ops {
            let (os, ot) = (op(&s), op(&t));
            prop_assert!((os.norm_sqr() - 1.0).abs() < 1e-12);
            prop_assert!((os.inner(&ot).unwrap() - s.inner(&t).unwrap()).norm() < 1e-12);
            prop_assert_eq!(os.photon_numbers(), s.photon_numbers());
        }
    }

    #[test]
    fn beamsplitter_and_hwp_are_involutions(s in state()) {
        let bs = apply_beamsplitter(&apply_beamsplitter(&s, "a", "b", "a", "b").unwrap(), "a", "b", "a", "b").unwrap();
        prop_assert!(bs.max_abs_diff(&s).unwrap() < 1e-12);
        let hwp = apply_hwp(&apply_hwp(&s, "a").unwrap(), "a").unwrap();
        prop_assert!(hwp.max_abs_diff(&s).unwrap() < 1e-12);
    }

    #[test]
    fn click_patterns_are_complete(s in state(), eta in 0.01f64..=1.0) {
        let bank = DetectorBank::new(vec![
            DetectorModel::new("A", "a", eta).unwrap(),
            DetectorModel::new("B", "b", 1.0).unwrap(),
        ]).unwrap();
        let dist = pattern_distribution(&s, &bank).unwrap();
        prop_assert_eq!(dist.len(), 4);
        let total: f64 = dist.iter().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        prop_assert!(dist.iter().all(|(_, p)| *p >= 0.0));
    }
}
