//! Superpixel quality against a ground-truth segmentation.
//!
//! cargo run --release --example metrics -- [labels.png gt.png]

use symmpix::io::read_labels;
use symmpix::metrics::score_superpixels;
use symmpix::symmslic::{run_symmslic, SymmSlicParams};
use symmpix::synth::{generate, SynthParams};

fn main() -> symmpix::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (labels, gt) = match args.as_slice() {
        [labels, gt] => (read_labels(labels)?, read_labels(gt)?),
        _ => {
            let synth = generate(&SynthParams::default())?;
            let out = run_symmslic(&synth.image, &SymmSlicParams::default())?;
            (out.superpixels.labels, synth.truth.segments)
        }
    };
    for r in [0, 1, 2, 3] {
        let s = score_superpixels(&labels, &gt, r)?;
        println!(
            "r={r}: {} superpixels  USE {:.4}  BR {:.4}  ASA {:.4}",
            s.superpixels, s.use_error, s.boundary_recall, s.asa
        );
    }
    Ok(())
}
