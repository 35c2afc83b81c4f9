use proptest::prelude::*;

use lsi_lab::bounds::{self, BoundsConfig, Check, Verdict};
use lsi_lab::density::{make_extremal, recenter, DensitySpec, GaussianMixture, RelativeDensity};
use lsi_lab::functionals;
use lsi_lab::numerics::{QuadratureConfig, TimeQuadrature};
use lsi_lab::ou;
use lsi_lab::stein::{self, ResolventFamily};
use lsi_lab::transport;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

/// Two- or three-component 1-D mixtures with moderate parameters.
fn mixture_1d() -> impl Strategy<Value = GaussianMixture> {
    prop::collection::vec((0.1f64..1.0, -2.0f64..2.0, 0.3f64..2.5), 2..=3).prop_map(|parts| {
        let total: f64 = parts.iter().map(|p| p.0).sum();
        let comps = parts.into_iter().map(|(w, m, v)| (w / total, vec![m], vec![vec![v]])).collect();
        GaussianMixture::new(1, comps).unwrap()
    })
}

fn mixture_2d() -> impl Strategy<Value = GaussianMixture> {
    prop::collection::vec((0.2f64..1.0, -1.5f64..1.5, -1.5f64..1.5, 0.4f64..1.8, 0.4f64..1.8, -0.3f64..0.3), 2)
        .prop_map(|parts| {
            let total: f64 = parts.iter().map(|p| p.0).sum();
            let comps = parts
                .into_iter()
                .map(|(w, a, b, s1, s2, c)| (w / total, vec![a, b], vec![vec![s1, c], vec![c, s2]]))
                .collect();
            GaussianMixture::new(2, comps).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn deficit_routes_agree(mix in mixture_1d()) {
        let d: RelativeDensity = mix.into();
        let r = functionals::deficit(&d, &cfg()).unwrap();
        prop_assert!(r.deficit >= -r.error_budget.deficit);
        let m = functionals::deficit_via_mmse(&d, &TimeQuadrature::default(), &cfg()).unwrap();
        prop_assert!((m.value - r.deficit).abs() <= (1e-4 * r.deficit).max(1e-8), "{} vs {}", m.value, r.deficit);
    }

    #[test]
    fn extremals_saturate(b1 in -3.0f64..3.0, b2 in -3.0f64..3.0) {
        for b in [vec![b1], vec![b1, b2]] {
            let r = functionals::deficit(&make_extremal(&b), &cfg()).unwrap();
            prop_assert!(r.deficit.abs() < 1e-9);
        }
    }

    #[test]
    fn fisher_decays_and_talagrand_holds(mix in mixture_1d()) {
        let d: RelativeDensity = mix.into();
        let ts: Vec<f64> = (0..=12).map(|k| 0.25 * k as f64).collect();
        prop_assert!(functionals::fisher_decay_check(&d, &ts, &cfg()).is_ok());
        prop_assert!(transport::talagrand_check(&d, &cfg()).unwrap().holds());
    }

    #[test]
    fn stein_discrepancy_dominates(mix in mixture_1d()) {
        let d = recenter(&mix.into());
        let s = stein::stein_discrepancy(&d, &cfg()).unwrap();
        let est = stein::d_lower_bound_default(&d).unwrap();
        prop_assert!(est.value <= s.value + s.error + 1e-12);
        let w = transport::w2_to_gamma(&d, &cfg()).unwrap();
        prop_assert!(w.value <= s.value + s.error + 1e-9, "W2 {} > S {}", w.value, s.value);
    }

    #[test]
    fn shrinking_witness_family_never_lowers_slack(mix in mixture_1d()) {
        let d: RelativeDensity = mix.into();
        let full = BoundsConfig::default();
        let small = BoundsConfig {
            sinusoid_stride: 3,
            resolvent_family: ResolventFamily { hermite: true, fourier: false },
            ..BoundsConfig::default()
        };
        for check in [Check::Thm1, Check::Thm1Bis, Check::CovEps(0), Check::CovEps(2), Check::DLeS] {
            let a = bounds::verify(check, &d, &full).unwrap();
            let b = bounds::verify(check, &d, &small).unwrap();
            if let (Some(sa), Some(sb)) = (a.slack, b.slack) {
                prop_assert!(sb >= sa - 1e-15, "{}: {} < {}", a.check, sb, sa);
            }
        }
    }

    #[test]
    fn semigroup_composes(mix in mixture_2d(), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let once = ou::evolve_mixture(&mix, s + t);
        let twice = ou::evolve_mixture(&ou::evolve_mixture(&mix, s), t);
        for (a, b) in once.components().iter().zip(twice.components()) {
            prop_assert!((a.mean() - b.mean()).norm() < 1e-12);
            prop_assert!((a.cov() - b.cov()).norm() < 1e-12);
        }
    }

    #[test]
    fn spec_round_trip(mix in mixture_2d()) {
        let spec = DensitySpec::from_mixture(&mix, Some("p".into()));
        let back = DensitySpec::from_json(&spec.to_json_pretty()).unwrap();
        prop_assert_eq!(back.hash(), spec.hash());
        let d: RelativeDensity = mix.into();
        prop_assert_eq!(back.build().unwrap(), d);
    }
}

proptest! {
    // Each case runs the full catalog on a 2-D mixture.
    #![proptest_config(ProptestConfig { cases: 6, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn catalog_never_fails_2d(mix in mixture_2d()) {
        let d: RelativeDensity = mix.into();
        for r in bounds::verify_all(&d, &BoundsConfig::default()).unwrap() {
            prop_assert!(r.verdict != Verdict::Fail, "{} slack {:?}", r.check, r.slack);
        }
    }
}
