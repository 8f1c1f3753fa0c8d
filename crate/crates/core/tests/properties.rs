use cbi_core::{
    conservative_confidence, posterior_for_joint_prior, worst_case_prior, AssessmentProblem,
    EngineOptions, PriorSpec,
};
use proptest::prelude::*;

fn confidence(prior: &PriorSpec, n: u64, phi1: f64, phi2: f64) -> f64 {
    let pr = AssessmentProblem::new(prior.clone(), 1e-4, n, phi1, phi2).unwrap();
    conservative_confidence(&pr, &EngineOptions::default())
        .unwrap()
        .conservative_confidence
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn never_above_iid(
        alpha in 0.5f64..3.0,
        log_n in 1.0f64..7.0,
        phi1 in 0.0f64..0.3,
        phi2 in 0.0f64..0.1,
    ) {
        let prior = PriorSpec::beta(alpha, 10000.0 * alpha).unwrap();
        let n = 10f64.powf(log_n) as u64;
        let pr = AssessmentProblem::new(prior, 1e-4, n, phi1, phi2).unwrap();
        let r = conservative_confidence(&pr, &EngineOptions::default()).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.conservative_confidence));
        prop_assert!(r.conservative_confidence <= r.iid_confidence + 1e-9);
    }

    #[test]
    fn more_positive_doubt_lowers_confidence(
        log_n in 2.0f64..7.0,
        phi2 in 0.0f64..0.2,
        extra in 0.001f64..0.1,
    ) {
        let prior = PriorSpec::beta(1.0, 10000.0).unwrap();
        let n = 10f64.powf(log_n) as u64;
        let lo = confidence(&prior, n, 0.05, phi2 + extra);
        let hi = confidence(&prior, n, 0.05, phi2);
        prop_assert!(lo <= hi + 1e-9, "{lo} > {hi}");
    }

    #[test]
    fn worst_case_prior_attains_bound(
        log_n in 2.0f64..6.0,
        phi1 in 0.01f64..0.3,
        phi2 in 0.01f64..0.2,
    ) {
        let prior = PriorSpec::beta(1.0, 10000.0).unwrap();
        let n = 10f64.powf(log_n) as u64;
        let pr = AssessmentProblem::new(prior.clone(), 1e-4, n, phi1, phi2).unwrap();
        let r = conservative_confidence(&pr, &EngineOptions::default()).unwrap();
        let joint = worst_case_prior(&prior, 1e-4, &r.cutpoints, 4000).unwrap();
        prop_assert!((joint.negative_doubt() - phi1).abs() < 1e-8);
        prop_assert!((joint.positive_doubt() - phi2).abs() < 1e-8);
        let direct = posterior_for_joint_prior(&joint, 1e-4, n).unwrap();
        let rel = (direct - r.conservative_confidence).abs() / r.conservative_confidence;
        prop_assert!(rel < 1e-3, "{direct} vs {}", r.conservative_confidence);
    }
}
