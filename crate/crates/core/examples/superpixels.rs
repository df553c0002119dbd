//! Symmetry-preserving superpixels and an overlay of the mirrored ones.
//!
//! cargo run --release --example superpixels -- [image.png] [k]

use symmpix::image::load_image;
use symmpix::io::{write_labels, write_rgb_png};
use symmpix::overlay::superpixel_overlay;
use symmpix::symmslic::{run_symmslic, SymmSlicParams};
use symmpix::synth::{generate, SynthParams};

fn main() -> symmpix::Result<()> {
    let mut args = std::env::args().skip(1);
    let img = match args.next() {
        Some(path) => load_image(path)?,
        None => generate(&SynthParams::default())?.image,
    };
    let params = SymmSlicParams {
        k: args.next().and_then(|s| s.parse().ok()).unwrap_or(300),
        ..SymmSlicParams::default()
    };

    let out = run_symmslic(&img, &params)?;
    let sp = &out.superpixels;
    for (it, rec) in sp.trace.iter().enumerate() {
        println!(
            "iter {it:2}: {} pairs, residual {:.1e}, moved {:.3} px",
            rec.paired, rec.max_center_residual, rec.mean_displacement
        );
    }
    println!(
        "{} superpixels, {} mirror pairs kept, {} demoted",
        sp.labels.label_count(),
        sp.pairing.len(),
        sp.pairing.demoted.len()
    );

    write_labels("labels.png", &sp.labels)?;
    write_rgb_png("superpixels.png", &superpixel_overlay(&img, &sp.labels, &sp.pairing))?;
    Ok(())
}
