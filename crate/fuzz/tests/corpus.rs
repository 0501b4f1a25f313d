use std::path::Path;

type Target = fn(&[u8]) -> bool;

#[test]
fn corpus_seeds_are_accepted_and_round_trip() {
    let targets: [(&str, Target); 5] = [
        ("config_parse", hqsim_fuzz::config_parse),
        ("arrival_spec_kv", hqsim_fuzz::arrival_spec_kv),
        ("kv_doc", hqsim_fuzz::kv_doc),
        ("ccdf_csv", hqsim_fuzz::ccdf_csv),
        ("summary_json", hqsim_fuzz::summary_json),
    ];
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    for (name, run) in targets {
        let mut seen = 0;
        for entry in std::fs::read_dir(root.join(name)).unwrap() {
            let path = entry.unwrap().path();
            assert!(
                run(&std::fs::read(&path).unwrap()),
                "{} rejected",
                path.display()
            );
            seen += 1;
        }
        assert!(seen > 0, "no seeds for {name}");
    }
}

#[test]
fn malformed_inputs_are_rejected_without_panicking() {
    let junk: [&[u8]; 6] = [
        b"",
        b"\xff\xfe",
        b"=",
        b"{\"seed\":1}",
        b"b,count_ge,ccdf\n3,1,0.5\n2,1,0.4\n",
        b"a.b = 1\na.b = 2\n",
    ];
    for data in junk {
        hqsim_fuzz::config_parse(data);
        hqsim_fuzz::arrival_spec_kv(data);
        hqsim_fuzz::kv_doc(data);
        assert!(!hqsim_fuzz::ccdf_csv(data) || data.starts_with(b"b,"));
        assert!(!hqsim_fuzz::summary_json(data));
    }
}
