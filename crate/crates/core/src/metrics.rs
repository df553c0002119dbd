//! Superpixel quality against a ground-truth segmentation.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symmslic::LabelMap;

fn check(labels: &LabelMap, gt: &LabelMap) -> Result<()> {
    if labels.dims() != gt.dims() {
        return Err(Error::DimensionMismatch(labels.dims(), gt.dims()));
    }
    Ok(())
}

/// Overlap counts `(superpixel, segment) -> pixels` and superpixel sizes.
fn overlaps(labels: &LabelMap, gt: &LabelMap) -> (HashMap<(u32, u32), usize>, HashMap<u32, usize>) {
    let mut inter = HashMap::new();
    let mut sizes = HashMap::new();
    for (&s, &g) in labels.labels().iter().zip(gt.labels()) {
        *inter.entry((s, g)).or_insert(0) += 1;
        *sizes.entry(s).or_insert(0) += 1;
    }
    (inter, sizes)
}

/// Leakage: for every segment, the summed size of superpixels covering at
/// least 5% of themselves with it, minus the image area, over the area.
pub fn under_segmentation_error(labels: &LabelMap, gt: &LabelMap) -> Result<f64> {
    check(labels, gt)?;
    let (inter, sizes) = overlaps(labels, gt);
    let n = labels.labels().len();
    let total: usize = inter
        .iter()
        .filter(|(&(s, _), &c)| 20 * c >= sizes[&s])
        .map(|(&(s, _), _)| sizes[&s])
        .sum();
    Ok((total as f64 - n as f64) / n as f64)
}

/// Pixels with a 4-neighbour of a different label.
pub fn boundary_pixels(map: &LabelMap) -> Vec<bool> {
    let (w, h) = map.dims();
    let l = map.labels();
    (0..w * h)
        .map(|i| {
            let (x, y) = (i % w, i / w);
            (x > 0 && l[i - 1] != l[i])
                || (x + 1 < w && l[i + 1] != l[i])
                || (y > 0 && l[i - w] != l[i])
                || (y + 1 < h && l[i + w] != l[i])
        })
        .collect()
}

/// Fraction of segment-boundary pixels within Chebyshev distance `r` of a
/// superpixel-boundary pixel. No segment boundary gives 1.
pub fn boundary_recall(labels: &LabelMap, gt: &LabelMap, r: usize) -> Result<f64> {
    check(labels, gt)?;
    let (w, h) = labels.dims();
    let sb = boundary_pixels(labels);
    // Dilate the superpixel boundary by r: rows, then columns.
    let mut rows = vec![false; w * h];
    for y in 0..h {
        let mut last: Option<usize> = None;
        let mut next = vec![usize::MAX; w];
        let mut nxt = usize::MAX;
        for x in (0..w).rev() {
            if sb[y * w + x] {
                nxt = x;
            }
            next[x] = nxt;
        }
        for x in 0..w {
            if sb[y * w + x] {
                last = Some(x);
            }
            let near_left = last.is_some_and(|l| x - l <= r);
            let near_right = next[x] != usize::MAX && next[x] - x <= r;
            rows[y * w + x] = near_left || near_right;
        }
    }
    let mut hit = 0usize;
    let mut total = 0usize;
    for (i, g) in boundary_pixels(gt).into_iter().enumerate() {
        if !g {
            continue;
        }
        total += 1;
        let (x, y) = (i % w, i / w);
        let (y0, y1) = (y.saturating_sub(r), (y + r).min(h - 1));
        if (y0..=y1).any(|yy| rows[yy * w + x]) {
            hit += 1;
        }
    }
    Ok(if total == 0 { 1.0 } else { hit as f64 / total as f64 })
}

/// Best attainable pixel accuracy labelling each superpixel with one segment.
pub fn achievable_segmentation_accuracy(labels: &LabelMap, gt: &LabelMap) -> Result<f64> {
    check(labels, gt)?;
    let (inter, _) = overlaps(labels, gt);
    let mut best: HashMap<u32, usize> = HashMap::new();
    for (&(s, _), &c) in &inter {
        let b = best.entry(s).or_insert(0);
        *b = (*b).max(c);
    }
    let sum: usize = best.values().sum();
    Ok(sum as f64 / labels.labels().len() as f64)
}

/// All three superpixel metrics for one map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperpixelScores {
    pub use_error: f64,
    pub boundary_recall: f64,
    pub asa: f64,
    pub superpixels: usize,
}

pub fn score_superpixels(labels: &LabelMap, gt: &LabelMap, r: usize) -> Result<SuperpixelScores> {
    Ok(SuperpixelScores {
        use_error: under_segmentation_error(labels, gt)?,
        boundary_recall: boundary_recall(labels, gt, r)?,
        asa: achievable_segmentation_accuracy(labels, gt)?,
        superpixels: labels.sizes().iter().filter(|&&s| s > 0).count(),
    })
}
