//! Render a mirror-symmetric test image and save it with its ground truth.
//!
//! cargo run --release --example synthetic -- [out_dir] [seed]

use std::path::PathBuf;

use symmpix::io::{write_labels, write_mask, write_rgb_png};
use symmpix::synth::{generate, SynthParams};

fn main() -> symmpix::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| ".".into()));
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(42);

    let mut params = SynthParams::centered(320, 240, seed);
    params.noise_sigma = 2.0;
    let synth = generate(&params)?;

    write_rgb_png(dir.join("synth.png"), &synth.image.to_rgb8())?;
    write_mask(dir.join("synth_mask.png"), &synth.truth.mask)?;
    write_labels(dir.join("synth_segments.png"), &synth.truth.segments)?;

    let axis = &synth.truth.axis;
    println!(
        "axis through ({:.1}, {:.1}) at {:.1} deg, object covers {} px",
        axis.point.x,
        axis.point.y,
        axis.angle_degrees(),
        synth.truth.mask.count()
    );
    for (a, b) in synth.truth.sample_correspondences(3) {
        println!("  ({}, {}) <-> ({}, {})", a.x, a.y, b.x, b.y);
    }
    Ok(())
}
