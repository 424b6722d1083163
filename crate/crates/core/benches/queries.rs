use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_rational::Ratio;

use local_match::corpus::{generate, CorpusSpec, Family};
use local_match::graph::{Anchor, Edge, ProbeSession};
use local_match::mcm::{apx_mcm_query, ApxConfig};
use local_match::mis::mis_vertex;
use local_match::par;

fn mcm_queries(c: &mut Criterion) {
    let cfg = ApxConfig::new(Ratio::new(1, 2)).unwrap();
    let mut group = c.benchmark_group("mcm_queries");
    group.sample_size(10);
    for n in [16, 64] {
        let g = generate(&CorpusSpec::new(Family::RandomRegular { degree: 3 }, n, 0)).unwrap();
        let edges: Vec<Edge> = g.edges().collect();
        let query = |&e: &Edge| apx_mcm_query(&mut ProbeSession::new(&g, Anchor::Edge(e)), &cfg, e).unwrap();
        group.bench_with_input(BenchmarkId::new("parallel", n), &edges, |b, edges| {
            b.iter(|| par::map(edges, query))
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &edges, |b, edges| {
            b.iter(|| par::map_sequential(edges, query))
        });
    }
    group.finish();
}

fn mis_queries(c: &mut Criterion) {
    let mut group = c.benchmark_group("mis_queries");
    let g = generate(&CorpusSpec::new(Family::Ring, 1024, 0)).unwrap();
    let query = |&v: &u64| mis_vertex(&mut ProbeSession::new(&g, Anchor::Vertex(v)), v).unwrap();
    group.bench_function("parallel", |b| b.iter(|| par::map(g.vertices(), query)));
    group.bench_function("sequential", |b| b.iter(|| par::map_sequential(g.vertices(), query)));
    group.finish();
}

criterion_group!(benches, mcm_queries, mis_queries);
criterion_main!(benches);
