//! Mirror pixel pairs of an image, then the pairs grouped by shared axis.
//!
//! cargo run --release --example detect_pairs -- [image.png]

use symmpix::clustering::cluster_pairs;
use symmpix::image::load_image;
use symmpix::pairs::{detect_pairs, detection_probability, PairParams};
use symmpix::synth::{generate, SynthParams};
use symmpix::clustering::ClusterParams;

fn main() -> symmpix::Result<()> {
    let img = match std::env::args().nth(1) {
        Some(path) => load_image(path)?,
        None => generate(&SynthParams::default())?.image,
    };
    let params = PairParams::default();
    let det = detect_pairs(&img, &params)?;
    let n = det.edges.pixels().len();
    println!(
        "{n} edge pixels, {} candidate pairs (a given partner is drawn with probability {:.3})",
        det.pairs.len(),
        detection_probability(n.max(2), params.h, 5)
    );

    let clusters = cluster_pairs(&det.pairs, &det.curves, &ClusterParams::default());
    for c in &clusters {
        let best = c.pairs.iter().map(|p| p.score).fold(f64::MIN, f64::max);
        println!("cluster {}: {} pairs, best score {best:.3}", c.id, c.pairs.len());
    }
    Ok(())
}
