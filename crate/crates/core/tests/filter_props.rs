mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use radar4d::filtering::{filter_frame, first_rejection, point_passes, FilterProfile, Rejection};
use radar4d::{RadarFrame, RadarPoint};

use common::{naive_keep, random_point_near};

fn profile() -> impl Strategy<Value = FilterProfile> {
    prop_oneof![
        Just(FilterProfile::indoor()),
        Just(FilterProfile::outdoor())
    ]
}

fn frame_near(profile: &FilterProfile, seed: u64, n: usize) -> RadarFrame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RadarFrame::new(
        0.0,
        (0..n)
            .map(|_| random_point_near(profile, &mut rng))
            .collect(),
    )
}

proptest! {
    #[test]
    fn filtering_matches_naive_scan(p in profile(), seed in any::<u64>(), n in 0usize..300) {
        let frame = frame_near(&p, seed, n);
        let (out, stats) = filter_frame(&p, &frame);
        let want: Vec<RadarPoint> = frame.points().iter().filter(|q| naive_keep(&p, q)).copied().collect();
        prop_assert_eq!(out.points(), want.as_slice());
        prop_assert_eq!(out.len() + stats.total(), n);
        prop_assert_eq!(out.timestamp, frame.timestamp);
    }

    #[test]
    fn filtering_is_idempotent(p in profile(), seed in any::<u64>()) {
        let (once, _) = filter_frame(&p, &frame_near(&p, seed, 200));
        let (twice, stats) = filter_frame(&p, &once);
        prop_assert_eq!(once.points(), twice.points());
        prop_assert_eq!(stats.total(), 0);
    }

    #[test]
    fn primary_rejection_follows_check_order(p in profile(), seed in any::<u64>()) {
        for q in frame_near(&p, seed, 100).points() {
            let expect = if !(q.rcs > p.rcs_min && q.rcs < p.rcs_max) {
                Some(Rejection::Rcs)
            } else if !naive_keep(&FilterProfile { v_min: f64::NEG_INFINITY, v_max: f64::INFINITY, ..p }, q) {
                Some(Rejection::Angular)
            } else if !(p.v_min..=p.v_max).contains(&q.doppler) {
                Some(Rejection::Doppler)
            } else {
                None
            };
            prop_assert_eq!(first_rejection(&p, q), expect);
            prop_assert_eq!(point_passes(&p, q), expect.is_none());
        }
    }

    #[test]
    fn tighter_profile_keeps_a_subset(seed in any::<u64>()) {
        // The indoor window sits inside the outdoor one on every bound.
        let (inner, outer) = (FilterProfile::indoor(), FilterProfile::outdoor());
        let frame = frame_near(&outer, seed, 300);
        let kept_inner = filter_frame(&inner, &frame).0;
        for q in kept_inner.points() {
            prop_assert!(point_passes(&outer, q));
        }
    }
}

#[test]
fn boundaries() {
    let p = FilterProfile::indoor();
    let at = |az: f64, el: f64, doppler: f64, rcs: f64| {
        let (a, e) = (az.to_radians(), el.to_radians());
        RadarPoint::new(
            10.0 * e.cos() * a.cos(),
            10.0 * e.cos() * a.sin(),
            10.0 * e.sin(),
            doppler,
            rcs,
            false,
        )
    };
    assert!(point_passes(&p, &at(0.0, 0.0, 10.0, 20.0)));
    assert!(point_passes(&p, &at(0.0, 0.0, -10.0, 20.0)));
    assert!(!point_passes(&p, &at(0.0, 0.0, 0.0, 0.0)));
    assert!(!point_passes(&p, &at(0.0, 0.0, 0.0, 45.0)));
    assert_eq!(
        first_rejection(&p, &at(30.0, 0.0, 50.0, 100.0)),
        Some(Rejection::Rcs)
    );
    assert_eq!(
        first_rejection(&p, &at(30.0, 0.0, 50.0, 10.0)),
        Some(Rejection::Angular)
    );
    assert_eq!(
        first_rejection(&p, &RadarPoint::new(0.0, 0.0, 0.0, 0.0, 10.0, false)),
        Some(Rejection::Angular)
    );
}
