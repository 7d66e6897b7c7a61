//! Boolean algebra and measure laws on events.

use std::sync::Arc;

use proptest::prelude::*;
use rvforce::space::{MeasureValue, Rational};
use rvforce::{Event, SampleSpace};

fn space() -> Arc<SampleSpace> {
    SampleSpace::exhaustive(4).unwrap()
}

fn event(flags: &[bool]) -> Event {
    space().event_from_bools(flags).unwrap()
}

fn flags() -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), 16)
}

proptest! {
    #[test]
    fn join_and_meet_commute(a in flags(), b in flags()) {
        let (a, b) = (event(&a), event(&b));
        prop_assert_eq!(a.join(&b).unwrap(), b.join(&a).unwrap());
        prop_assert_eq!(a.meet(&b).unwrap(), b.meet(&a).unwrap());
    }

    #[test]
    fn join_and_meet_associate(a in flags(), b in flags(), c in flags()) {
        let (a, b, c) = (event(&a), event(&b), event(&c));
        prop_assert_eq!(
            a.join(&b.join(&c).unwrap()).unwrap(),
            a.join(&b).unwrap().join(&c).unwrap()
        );
        prop_assert_eq!(
            a.meet(&b.meet(&c).unwrap()).unwrap(),
            a.meet(&b).unwrap().meet(&c).unwrap()
        );
    }

    #[test]
    fn distributive(a in flags(), b in flags(), c in flags()) {
        let (a, b, c) = (event(&a), event(&b), event(&c));
        prop_assert_eq!(
            a.meet(&b.join(&c).unwrap()).unwrap(),
            a.meet(&b).unwrap().join(&a.meet(&c).unwrap()).unwrap()
        );
        prop_assert_eq!(
            a.join(&b.meet(&c).unwrap()).unwrap(),
            a.join(&b).unwrap().meet(&a.join(&c).unwrap()).unwrap()
        );
    }

    #[test]
    fn complement_and_de_morgan(a in flags(), b in flags()) {
        let (a, b) = (event(&a), event(&b));
        let s = space();
        prop_assert_eq!(a.join(&a.complement()).unwrap(), s.full());
        prop_assert_eq!(a.meet(&a.complement()).unwrap(), s.empty());
        prop_assert_eq!(a.complement().complement(), a.clone());
        prop_assert_eq!(
            a.join(&b).unwrap().complement(),
            a.complement().meet(&b.complement()).unwrap()
        );
    }

    #[test]
    fn absorption(a in flags(), b in flags()) {
        let (a, b) = (event(&a), event(&b));
        prop_assert_eq!(a.join(&a.meet(&b).unwrap()).unwrap(), a.clone());
        prop_assert_eq!(a.meet(&a.join(&b).unwrap()).unwrap(), a);
    }

    #[test]
    fn measure_is_additive(a in flags(), b in flags()) {
        let (a, b) = (event(&a), event(&b));
        let lhs = a.join(&b).unwrap().measure().value() + a.meet(&b).unwrap().measure().value();
        prop_assert_eq!(lhs, a.measure().value() + b.measure().value());
    }

    #[test]
    fn distance_is_a_pseudometric(a in flags(), b in flags(), c in flags()) {
        let (a, b, c) = (event(&a), event(&b), event(&c));
        prop_assert_eq!(a.distance(&a).unwrap(), MeasureValue::zero());
        prop_assert_eq!(a.distance(&b).unwrap(), b.distance(&a).unwrap());
        let ab = a.distance(&b).unwrap().value();
        let bc = b.distance(&c).unwrap().value();
        prop_assert!(a.distance(&c).unwrap().value() <= ab + bc);
    }

    #[test]
    fn zero_tolerance_is_inclusion(a in flags(), b in flags()) {
        let (a, b) = (event(&a), event(&b));
        prop_assert_eq!(
            a.le_mod_eps(&b, Rational::from_integer(0)).unwrap(),
            a.is_subset(&b).unwrap()
        );
        prop_assert_eq!(a.eq_mod_eps(&b, Rational::from_integer(0)).unwrap(), a == b);
    }

    #[test]
    fn tolerance_is_monotone(a in flags(), b in flags(), k in 0u64..16) {
        let (a, b) = (event(&a), event(&b));
        let eps = Rational::new(k, 16);
        let wider = Rational::new(k + 1, 16);
        if a.le_mod_eps(&b, eps).unwrap() {
            prop_assert!(a.le_mod_eps(&b, wider).unwrap());
        }
    }
}

#[test]
fn events_from_different_spaces_do_not_mix() {
    let a = SampleSpace::exhaustive(2).unwrap().full();
    let b = SampleSpace::exhaustive(3).unwrap().full();
    assert_eq!(a.join(&b).unwrap_err().kind(), "space-mismatch");
}
