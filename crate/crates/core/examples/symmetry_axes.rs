//! Symmetry axes averaged from clustered pairs, scored against the truth.
//!
//! cargo run --release --example symmetry_axes -- [angle_degrees]

use symmpix::axis::{axis_from_cluster, f_score, match_axes, SymmetryAxis};
use symmpix::clustering::{cluster_pairs, ClusterParams};
use symmpix::io::write_rgb_png;
use symmpix::overlay::draw_axes;
use symmpix::pairs::{detect_pairs, PairParams};
use symmpix::synth::{generate, SynthParams};

fn main() -> symmpix::Result<()> {
    let angle: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(75.0);
    let mut params = SynthParams::centered(256, 256, 7);
    params.axis = SymmetryAxis::from_angle(params.axis.point, angle, 0);
    let synth = generate(&params)?;

    let det = detect_pairs(&synth.image, &PairParams::default())?;
    let clusters = cluster_pairs(&det.pairs, &det.curves, &ClusterParams::default());
    let axes = clusters.iter().map(axis_from_cluster).collect::<symmpix::Result<Vec<_>>>()?;

    let truth = &synth.truth.axis;
    for a in &axes {
        println!(
            "axis {:.2} deg, {:.2} px from the true centre, {} pairs",
            a.angle_degrees(),
            a.distance_to(truth.point),
            a.support
        );
    }
    let m = match_axes(&axes, std::slice::from_ref(truth), 10.0, 20.0);
    println!("tp {} fp {} fn {}  F = {:.2}", m.tp, m.fp, m.fn_, f_score(m.tp, m.fp, m.fn_)?);

    let mut rgb = synth.image.to_rgb8();
    draw_axes(&mut rgb, &axes);
    write_rgb_png("axes.png", &rgb)
}
