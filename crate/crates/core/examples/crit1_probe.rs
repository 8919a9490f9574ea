use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semimatch::construct::{stream_match, MatchConfig};
use semimatch::exact;
use semimatch::flow::CapGraph;
use semimatch::graph::{Edge, EdgeStream};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let eps = 0.2;
    let t0 = std::time::Instant::now();
    let mut worst_int = f64::INFINITY;
    let mut worst_frac = f64::INFINITY;
    let mut total_iters = 0usize;
    let mut p2_fail_iters = 0usize;
    let mut runs_with_iters = 0usize;
    for trial in 0..50 {
        let n = 4 + (trial % 9);
        let mut edges = Vec::new();
        let mut g = CapGraph::new(n);
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.gen::<f64>() < 0.5 {
                    let w = 1.0 + rng.gen_range(0..10) as f64;
                    edges.push(Edge::new(u, v, w));
                    g.add_edge(u, v, w);
                }
            }
        }
        if edges.is_empty() { continue; }
        let stream = EdgeStream::from_edges(edges).unwrap();
        let out = stream_match(&stream, &MatchConfig::new(eps)).unwrap();
        let (opt, _) = exact::exact_mwm(&g).unwrap();
        if opt == 0.0 { continue; }
        worst_int = worst_int.min(out.report.value / opt);
        worst_frac = worst_frac.min(out.report.fractional_value / opt);
        total_iters += out.pack_transcript.len();
        if !out.pack_transcript.is_empty() { runs_with_iters += 1; }
        p2_fail_iters += out.pack_transcript.iter().filter(|t| !t.p2_holds).count();
    }
    println!("worst integral ratio:   {worst_int:.4}");
    println!("worst fractional ratio: {worst_frac:.4}");
    println!("total pack iterations: {total_iters}, p2-failure iterations: {p2_fail_iters}, runs with iterations: {runs_with_iters}/50");
    println!("elapsed: {:?}", t0.elapsed());
}
