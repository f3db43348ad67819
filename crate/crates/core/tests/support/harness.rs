//! Random outcome sets and the stage-rate identities they must satisfy.

use iackg::harness::{summarize, IvStatus, TvStatus, ValidationOutcome};
use iackg::StrategyId;
use proptest::prelude::*;

pub fn arb_outcomes() -> impl Strategy<Value = Vec<ValidationOutcome>> {
    prop::collection::vec((any::<bool>(), any::<bool>()), 0..80).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (tv, iv))| {
                ValidationOutcome::new(
                    format!("p{i}"),
                    StrategyId::GrBase,
                    (if tv { TvStatus::Pass } else { TvStatus::Fail }, String::new()),
                    (
                        match (tv, iv) {
                            (false, _) => IvStatus::NotRun,
                            (true, true) => IvStatus::Pass,
                            (true, false) => IvStatus::Fail,
                        },
                        String::new(),
                    ),
                    String::new(),
                    String::new(),
                    None,
                    0,
                    vec![],
                )
                .unwrap()
            })
            .collect()
    })
}

pub fn check_rate_identities(outcomes: &[ValidationOutcome]) -> Result<(), TestCaseError> {
    let s = summarize(outcomes);
    let iv_pass = outcomes.iter().filter(|o| o.iv_status == IvStatus::Pass).count();
    prop_assert_eq!(s.overall.numerator, iv_pass);
    prop_assert_eq!(s.iv_on_tv.denominator, s.tv.numerator);
    prop_assert_eq!(s.overall.denominator, s.tv.denominator);
    for o in outcomes {
        prop_assert!(o.tv_status == TvStatus::Pass || o.iv_status == IvStatus::NotRun);
    }
    if let (Some(t), Some(i), Some(ov)) = (s.tv.percent(), s.iv_on_tv.percent(), s.overall.percent()) {
        prop_assert!((t * i / 100.0 - ov).abs() < 1e-9);
    }
    Ok(())
}
