use std::time::Instant;

use horpo::oracle::{build_graph, check_lemmas, engine_disagreements, LemmaConfig, E1, UNIVERSE_CAP};
use horpo::order::Fidelity;

#[test]
fn lemma_suite_on_size_five_universe() {
    let e = E1::new();
    for (name, params) in e.parameter_sets() {
        let start = Instant::now();
        let g = build_graph(&e.symbols(), &e.pool(), 5, &params, Fidelity::Sound, UNIVERSE_CAP).unwrap();
        let built = start.elapsed();
        let r = check_lemmas(&g, &LemmaConfig::default());
        eprintln!("{name}: {} terms, graph {:?}, total {:?}", g.universe.len(), built, start.elapsed());
        for l in &r.results {
            assert!(l.passed(), "{name}: {} {:?}", l.name, l.counterexample);
        }
    }
}

#[test]
fn engine_agrees_with_naive_transcription() {
    let e = E1::new();
    for (name, params) in e.parameter_sets() {
        for fid in [Fidelity::Sound, Fidelity::Paper] {
            let g = build_graph(&e.symbols(), &e.pool(), 5, &params, fid, UNIVERSE_CAP).unwrap();
            let d = engine_disagreements(&g);
            assert!(d.is_empty(), "{name} {fid:?}: {:?}", d.first());
        }
    }
}
