//! Clique peeling through the relaxed vertex cover of the complement graph.
//!
//! cargo run --example cliques

use symmpix::graph::{complement_graph, extract_cliques, min_vertex_cover_lp, PairGraph};

fn main() {
    // Cliques on {0..5}, {5..8} and {8, 9}, plus two bridging edges.
    let mut g = PairGraph::new(10);
    for group in [0..5, 5..8, 8..10] {
        for u in group.clone() {
            for v in group.clone().filter(|&v| v > u) {
                g.add_edge(u, v);
            }
        }
    }
    g.add_edge(4, 5);
    g.add_edge(7, 8);

    let vc = min_vertex_cover_lp(&complement_graph(&g));
    println!("complement cover {:?}, LP objective {}", vc.cover, vc.lp_objective);

    for (k, clique) in extract_cliques(&g, 3).iter().enumerate() {
        println!("clique {k}: {clique:?} (valid: {})", g.is_clique(clique));
    }
}
