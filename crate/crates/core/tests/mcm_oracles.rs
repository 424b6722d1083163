use std::collections::BTreeSet;

use local_match::corpus::{generate, CorpusSpec, Family};
use local_match::graph::{Edge, LabeledGraph};
use local_match::mcm::{edge_session, global_apx_mcm, oracle_m, probe_radius_bound, ApxConfig};
use local_match::verify::{augmenting_paths, validate_matching};
use num_rational::Ratio;

fn small_corpus() -> Vec<LabeledGraph> {
    let mut out = Vec::new();
    for n in [5, 8, 11] {
        out.push(generate(&CorpusSpec::new(Family::Ring, n, 0)).unwrap());
        out.push(generate(&CorpusSpec::new(Family::Path, n, 0)).unwrap());
    }
    out.push(generate(&CorpusSpec::grid(3, 4, 0)).unwrap());
    for seed in 0..3 {
        out.push(generate(&CorpusSpec::new(Family::RandomRegular { degree: 3 }, 10, seed)).unwrap());
    }
    out
}

fn local_level(g: &LabeledGraph, level: u32) -> BTreeSet<Edge> {
    g.edges()
        .filter(|&e| oracle_m(&mut edge_session(g, e), level, e).unwrap())
        .collect()
}

#[test]
fn local_levels_equal_global_levels() {
    for eps in [Ratio::new(1, 1), Ratio::new(1, 2)] {
        let cfg = ApxConfig::new(eps).unwrap();
        for g in small_corpus() {
            let global = global_apx_mcm(&g, &cfg).unwrap();
            for (i, m) in global.matchings.iter().enumerate() {
                assert_eq!(&local_level(&g, i as u32), m, "level {i}, eps {eps}");
            }
        }
    }
}

#[test]
fn levels_have_no_short_augmenting_paths() {
    let cfg = ApxConfig::new(Ratio::new(1, 3)).unwrap();
    for g in small_corpus() {
        let global = global_apx_mcm(&g, &cfg).unwrap();
        for (i, m) in global.matchings.iter().enumerate() {
            assert!(validate_matching(&g, m).is_ok());
            for len in (1..2 * i + 1).step_by(2) {
                assert!(augmenting_paths(&g, m, len).is_empty(), "M_{i} has a path of length {len}");
            }
        }
    }
}

#[test]
fn measured_radius_within_bound() {
    let cfg = ApxConfig::new(Ratio::new(1, 2)).unwrap();
    for g in small_corpus() {
        let bound = probe_radius_bound(cfg.final_level(), &g.params()).unwrap();
        for e in g.edges() {
            let mut s = edge_session(&g, e);
            oracle_m(&mut s, cfg.final_level(), e).unwrap();
            assert!(num_bigint::BigUint::from(s.stats().radius) <= bound);
        }
    }
}
