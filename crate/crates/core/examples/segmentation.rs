//! Unsupervised symmetric object mask: the union of mirrored superpixels.
//!
//! cargo run --release --example segmentation -- [seed]

use symmpix::io::write_mask;
use symmpix::segment::{error_rate, symmetric_segment};
use symmpix::symmslic::{run_symmslic, SymmSlicParams};
use symmpix::synth::{generate, SynthParams};

fn main() -> symmpix::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let synth = generate(&SynthParams::centered(256, 256, seed))?;
    let out = run_symmslic(&synth.image, &SymmSlicParams::default())?;
    let sp = &out.superpixels;

    let mask = symmetric_segment(&sp.labels, &sp.pairing);
    let single = mask.largest_component();
    let gt = &synth.truth.mask;
    println!("mask      IoU {:.3}  error rate {:.4}", mask.iou(gt)?, error_rate(&mask, gt)?);
    println!("largest   IoU {:.3}  error rate {:.4}", single.iou(gt)?, error_rate(&single, gt)?);
    write_mask("mask.png", &mask)
}
