//! Bodies of the fuzz targets, shared with the corpus replay test. Each
//! returns whether the input was accepted by the parser under test.

use hqsim::estimators::parse_ccdf_csv;
use hqsim::harness::{parse_summary, ExperimentConfig};
use hqsim::kv::KvDoc;
use hqsim::traffic::ArrivalSpec;

fn text(data: &[u8]) -> Option<&str> {
    std::str::from_utf8(data).ok()
}

/// Accepted configs must render to text that parses back to the same config.
pub fn config_parse(data: &[u8]) -> bool {
    let Some(cfg) = text(data).and_then(|s| ExperimentConfig::parse(s).ok()) else {
        return false;
    };
    let rendered = cfg.render();
    let back = ExperimentConfig::parse(&rendered).expect("rendered config must parse");
    assert_eq!(back, cfg);
    assert_eq!(back.render(), rendered);
    true
}

/// Any arrival law read from a document survives a write/read cycle.
pub fn arrival_spec_kv(data: &[u8]) -> bool {
    let Some(doc) = text(data).and_then(|s| KvDoc::parse(s).ok()) else {
        return false;
    };
    let Ok(spec) = ArrivalSpec::read_kv(&doc, "traffic.light") else {
        return false;
    };
    let mut out = KvDoc::new();
    spec.write_kv(&mut out, "traffic.light");
    let back =
        ArrivalSpec::read_kv(&KvDoc::parse(&out.render()).unwrap(), "traffic.light").unwrap();
    assert_eq!(back, spec);
    true
}

pub fn kv_doc(data: &[u8]) -> bool {
    let Some(doc) = text(data).and_then(|s| KvDoc::parse(s).ok()) else {
        return false;
    };
    let rendered = doc.render();
    let back = KvDoc::parse(&rendered).expect("rendered document must parse");
    assert_eq!(back.render(), rendered);
    true
}

pub fn ccdf_csv(data: &[u8]) -> bool {
    let Some(rows) = text(data).and_then(|s| parse_ccdf_csv(s).ok()) else {
        return false;
    };
    for w in rows.windows(2) {
        assert!(w[1].b > w[0].b);
        assert!(w[1].ccdf <= w[0].ccdf * (1.0 + 1e-12));
    }
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.ccdf)));
    true
}

pub fn summary_json(data: &[u8]) -> bool {
    let Some(summary) = text(data).and_then(|s| parse_summary(s).ok()) else {
        return false;
    };
    let again = serde_json::to_string(&summary).unwrap();
    let back = parse_summary(&again).expect("serialised summary must parse");
    assert_eq!(serde_json::to_string(&back).unwrap(), again);
    let _ = summary.ccdf_h.to_csv();
    true
}
