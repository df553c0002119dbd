//! Symmetric object masks from paired superpixels.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::symmslic::{LabelMap, SuperpixelPairing};

/// Row-major foreground flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension {
                width: width as u32,
                height: height as u32,
            });
        }
        if data.len() != width * height {
            return Err(Error::DimensionMismatch((width, height), (data.len(), 1)));
        }
        Ok(BinaryMask { width, height, data })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let data = (0..width * height).map(|i| f(i % width, i / width)).collect();
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// Intersection over union; two empty masks give 1.
    pub fn iou(&self, other: &BinaryMask) -> Result<f64> {
        check_dims(self.dims(), other.dims())?;
        let mut inter = 0usize;
        let mut union = 0usize;
        for (&a, &b) in self.data.iter().zip(&other.data) {
            inter += (a && b) as usize;
            union += (a || b) as usize;
        }
        Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
    }

    /// Keeps only the largest 4-connected foreground component.
    pub fn largest_component(&self) -> BinaryMask {
        let (w, h) = self.dims();
        let mut comp = vec![usize::MAX; w * h];
        let mut best: Option<(usize, usize)> = None;
        let mut id = 0;
        let mut queue = VecDeque::new();
        for s in 0..w * h {
            if !self.data[s] || comp[s] != usize::MAX {
                continue;
            }
            comp[s] = id;
            queue.push_back(s);
            let mut size = 0;
            while let Some(p) = queue.pop_front() {
                size += 1;
                let (x, y) = (p % w, p / w);
                let nbrs = [
                    (x > 0).then(|| p - 1),
                    (y > 0).then(|| p - w),
                    (x + 1 < w).then(|| p + 1),
                    (y + 1 < h).then(|| p + w),
                ];
                for q in nbrs.into_iter().flatten() {
                    if self.data[q] && comp[q] == usize::MAX {
                        comp[q] = id;
                        queue.push_back(q);
                    }
                }
            }
            if best.is_none_or(|(_, bs)| size > bs) {
                best = Some((id, size));
            }
            id += 1;
        }
        let keep = best.map(|(b, _)| b);
        BinaryMask {
            width: w,
            height: h,
            data: comp.iter().map(|&c| Some(c) == keep).collect(),
        }
    }
}

fn check_dims(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(a, b));
    }
    Ok(())
}

/// Union of every superpixel that belongs to a mirror pair.
pub fn symmetric_segment(labels: &LabelMap, pairing: &SuperpixelPairing) -> BinaryMask {
    let n = labels.label_count();
    let mut paired = vec![false; n];
    for l in pairing.paired_labels() {
        if (l as usize) < n {
            paired[l as usize] = true;
        }
    }
    BinaryMask {
        width: labels.width(),
        height: labels.height(),
        data: labels.labels().iter().map(|&l| paired[l as usize]).collect(),
    }
}

/// Fraction of pixels where the masks disagree.
pub fn error_rate(mask: &BinaryMask, gt: &BinaryMask) -> Result<f64> {
    check_dims(mask.dims(), gt.dims())?;
    let wrong = mask.data.iter().zip(&gt.data).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / mask.data.len() as f64)
}
