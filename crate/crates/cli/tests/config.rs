use diachron::config::{PipelineConfig, KEYS};
use proptest::prelude::*;

fn value_for(key: &str) -> BoxedStrategy<String> {
    let count = || (1u64..10_000).prop_map(|v| v.to_string()).boxed();
    let opt_real = || {
        prop_oneof![Just("none".to_string()), (1e-6f64..0.9).prop_map(|v| v.to_string())].boxed()
    };
    let word = || "[a-z][a-z0-9_]{0,8}".boxed();
    let opt_word = move || prop_oneof![Just("none".to_string()), word()].boxed();
    let boolean = || any::<bool>().prop_map(|b| b.to_string()).boxed();
    match key {
        "corpus" => prop_oneof![Just("none".to_string()), "[a-z]{1,6}/[a-z]{1,6}\\.tsv"].boxed(),
        "corpus_format" => prop::sample::select(vec!["dir", "tsv", "auto"]).prop_map(String::from).boxed(),
        "subsample" | "svd_tol" | "distance_threshold" => opt_real(),
        "context_min_count" => prop_oneof![Just("none".to_string()), count()].boxed(),
        "metric" => prop::sample::select(vec!["cosine", "euclidean"]).prop_map(String::from).boxed(),
        "features" => prop::sample::select(vec!["adjacent", "period0", "upper_tri"]).prop_map(String::from).boxed(),
        "cluster_method" => prop::sample::select(vec!["agglomerative", "kmeans"]).prop_map(String::from).boxed(),
        "linkage" => prop::sample::select(vec!["ward", "average", "complete"]).prop_map(String::from).boxed(),
        "standardize" | "d1_increasing" | "scale_spikes" => boolean(),
        "seed" => any::<u64>().prop_map(|v| v.to_string()).boxed(),
        "output" => "[a-z]{1,8}(/[a-z]{1,8})?".boxed(),
        "words" => prop::collection::vec(word(), 0..4).prop_map(|w| w.join(",")).boxed(),
        "explain_word" | "t1" | "t2" => opt_word(),
        "sample_rate" => (0.01f64..=1.0).prop_map(|v| v.to_string()).boxed(),
        _ => count(),
    }
}

fn config_strategy() -> impl Strategy<Value = PipelineConfig> {
    let per_key: Vec<BoxedStrategy<(String, Option<String>)>> = KEYS
        .iter()
        .map(|(k, _)| {
            let k = k.to_string();
            prop::option::of(value_for(&k)).prop_map(move |v| (k.clone(), v)).boxed()
        })
        .collect();
    per_key.prop_map(|pairs| {
        let mut c = PipelineConfig::default();
        for (k, v) in pairs {
            if let Some(v) = v {
                c.set(&k, &v).unwrap();
            }
        }
        c
    })
}

proptest! {
    #[test]
    fn serialized_config_parses_back_identically(c in config_strategy()) {
        let text = c.to_string();
        prop_assert_eq!(PipelineConfig::from_text(&text).unwrap(), c);
    }
}

#[test]
fn defaults_are_valid_and_list_every_key() {
    let c = PipelineConfig::default();
    c.validate().unwrap();
    let text = c.to_string();
    assert_eq!(text.lines().count(), KEYS.len());
    for (line, (key, _)) in text.lines().zip(KEYS) {
        assert!(line.starts_with(&format!("{key} = ")), "{line}");
    }
}

#[test]
fn parse_errors_carry_line_and_key() {
    let e = PipelineConfig::from_text("# comment\nwindow = 5\n\ndim = ten\n").unwrap_err();
    assert_eq!(e.line, Some(4));
    assert_eq!(e.key.as_deref(), Some("dim"));
    assert!(e.to_string().starts_with("line 4: `dim`"), "{e}");

    let e = PipelineConfig::from_text("metric = cosine\nmetric = euclidean\n").unwrap_err();
    assert_eq!((e.line, e.key.as_deref()), (Some(2), Some("metric")));

    let e = PipelineConfig::from_text("no_such_key = 1\n").unwrap_err();
    assert_eq!(e.key.as_deref(), Some("no_such_key"));

    let e = PipelineConfig::from_text("just words\n").unwrap_err();
    assert_eq!((e.line, e.key.as_deref()), (Some(1), None));
}

#[test]
fn validation_rejects_out_of_range_values() {
    for (key, value) in [
        ("window", "0"),
        ("dim", "0"),
        ("subsample", "1.5"),
        ("sample_rate", "0"),
        ("distance_threshold", "-1"),
        ("svd_tol", "0"),
    ] {
        let mut c = PipelineConfig::default();
        c.set(key, value).unwrap();
        let e = c.validate().unwrap_err();
        assert_eq!(e.key.as_deref(), Some(key));
    }
}
