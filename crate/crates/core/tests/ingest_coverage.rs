mod support;

use std::path::PathBuf;

use iackg::ingest::{compute_coverage, ingest_corpus, parse_schema_dump, Ratio};
use proptest::prelude::*;
use support::ingest::{
    arb_case, arb_dump, check_documenting_never_lowers_coverage, check_enrichment_preserves_skeleton,
};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn ratio(v: &serde_json::Value) -> Ratio {
    Ratio {
        matched: v["matched"].as_u64().unwrap() as usize,
        total: v["total"].as_u64().unwrap() as usize,
    }
}

#[test]
fn coverage_fixture_reproduces_published_percentages() {
    let dir = fixtures().join("coverage");
    let ingest = ingest_corpus(&dir.join("schemas"), &dir.join("docs")).unwrap();
    assert_eq!(ingest.schemas.len(), 199);
    assert!(
        ingest.orphans.is_empty(),
        "{:?}",
        &ingest.orphans[..ingest.orphans.len().min(3)]
    );
    assert!(ingest.warnings.is_empty(), "{:?}", ingest.warnings);
    assert!(ingest.marker_warnings.is_empty());

    let report = compute_coverage(&ingest.schemas);
    let expected: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("EXPECTED.json")).unwrap()).unwrap();
    assert_eq!(report.top_level_args, ratio(&expected["top_level_args"]));
    assert_eq!(report.block_level_args, ratio(&expected["block_level_args"]));
    assert_eq!(report.attributes, ratio(&expected["attributes"]));
    assert_eq!(report.overall, ratio(&expected["overall"]));

    let pct = |r: Ratio| format!("{:.1}", r.percent().unwrap());
    assert_eq!(
        [
            pct(report.top_level_args),
            pct(report.block_level_args),
            pct(report.attributes),
            pct(report.overall)
        ],
        ["81.7", "74.4", "95.4", "77.5"]
    );
    assert_eq!(
        report.top_level_args,
        Ratio {
            matched: 1531,
            total: 1875
        }
    );
    assert_eq!(
        report.attributes,
        Ratio {
            matched: 503,
            total: 527
        }
    );
}

#[test]
fn coverage_overall_is_component_sum() {
    let dir = fixtures().join("coverage");
    let ingest = ingest_corpus(&dir.join("schemas"), &dir.join("docs")).unwrap();
    for s in ingest.schemas.chunks(17) {
        let r = compute_coverage(s);
        assert_eq!(
            r.overall.matched,
            r.top_level_args.matched + r.block_level_args.matched + r.attributes.matched
        );
        assert_eq!(
            r.overall.total,
            r.top_level_args.total + r.block_level_args.total + r.attributes.total
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn enrichment_preserves_skeleton((dump, entries, attrs) in arb_case()) {
        check_enrichment_preserves_skeleton(&dump, &entries, &attrs)?;
    }

    #[test]
    fn schema_dump_round_trips(dump in arb_dump()) {
        let text = serde_json::to_string(&dump).unwrap();
        prop_assert_eq!(parse_schema_dump(&text).unwrap(), dump);
    }

    #[test]
    fn documenting_an_empty_field_never_lowers_coverage((dump, entries, attrs) in arb_case()) {
        check_documenting_never_lowers_coverage(&dump, &entries, &attrs)?;
    }
}
