//! Fixed-length edge curves centred on an edge pixel, with unit normals.

use serde::{Deserialize, Serialize};

use crate::edges::{step_length, EdgeMap};
use crate::error::{Error, Result};
use crate::geometry::{Pixel, Vec2};

/// `p` arc-length samples `c(alpha_j)`, `alpha_j = j / (p - 1)`, of an edge
/// through `anchor`, which sits at `alpha = 0.5`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub anchor: Pixel,
    pub samples: Vec<Vec2>,
    /// Unit normals, empty until [`curve_normals`] fills them.
    pub normals: Vec<Vec2>,
}

impl Curve {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Linear interpolation of the samples at `alpha` in `[0, 1]`.
    pub fn point_at(&self, alpha: f64) -> Vec2 {
        let n = self.samples.len();
        let t = alpha.clamp(0.0, 1.0) * (n - 1) as f64;
        let i = (t.floor() as usize).min(n - 2);
        let f = t - i as f64;
        self.samples[i] * (1.0 - f) + self.samples[i + 1] * f
    }

    /// The same curve traversed from the other end.
    pub fn reversed(&self) -> Curve {
        Curve {
            anchor: self.anchor,
            samples: self.samples.iter().rev().copied().collect(),
            normals: self.normals.iter().rev().copied().collect(),
        }
    }
}

/// Walks `(p - 1) / 2` pixels of arc length along the chain in both
/// directions from `anchor` and resamples at unit arc-length spacing.
///
/// Returns `Ok(None)` when the contour is too short on either side.
pub fn extract_curve(edges: &EdgeMap, anchor: Pixel, p: usize) -> Result<Option<Curve>> {
    if p < 3 {
        return Err(Error::InvalidParameter(format!("curve needs p >= 3 samples, got {p}")));
    }
    let (ci, pos) = edges
        .location(anchor)
        .ok_or(Error::NotAnEdgePixel(anchor.x, anchor.y))?;
    let chain = &edges.chains()[ci];
    let half = (p - 1) as f64 / 2.0;
    let n = chain.pixels.len();

    // Closed chains may wrap, but never far enough to reuse pixels.
    if chain.closed && chain.arc_length() < 2.0 * half + 1.0 {
        return Ok(None);
    }
    let side = |step: isize| -> Option<Vec<(f64, Pixel)>> {
        let mut out = vec![(0.0, anchor)];
        let mut idx = pos as isize;
        let mut acc = 0.0;
        let mut prev = anchor;
        while acc < half {
            idx += step;
            if idx < 0 || idx >= n as isize {
                if !chain.closed {
                    return None;
                }
                idx = idx.rem_euclid(n as isize);
            }
            let q = chain.pixels[idx as usize];
            acc += step_length(prev, q);
            out.push((acc, q));
            prev = q;
        }
        Some(out)
    };
    let (Some(back), Some(fwd)) = (side(-1), side(1)) else {
        return Ok(None);
    };

    // Polyline ordered by signed arc length from -back to +fwd.
    let mut poly: Vec<(f64, Vec2)> = back
        .iter()
        .rev()
        .map(|&(s, q)| (-s, Vec2::from_pixel(q)))
        .collect();
    poly.extend(fwd.iter().skip(1).map(|&(s, q)| (s, Vec2::from_pixel(q))));

    let mut samples = Vec::with_capacity(p);
    let mut seg = 0;
    for j in 0..p {
        let s = -half + j as f64;
        while seg + 2 < poly.len() && poly[seg + 1].0 < s {
            seg += 1;
        }
        let (s0, a) = poly[seg];
        let (s1, b) = poly[seg + 1];
        let f = if s1 > s0 { ((s - s0) / (s1 - s0)).clamp(0.0, 1.0) } else { 0.0 };
        samples.push(a * (1.0 - f) + b * f);
    }
    Ok(Some(Curve {
        anchor,
        samples,
        normals: Vec::new(),
    }))
}

/// Default tangent half-window, in samples, used by the pipeline.
pub const TANGENT_SPAN: usize = 2;

/// Normals from central-difference tangents rotated by +90 degrees.
pub fn curve_normals(curve: &Curve) -> Result<Curve> {
    curve_normals_with_span(curve, 1)
}

/// Like [`curve_normals`] with the tangent taken over `span` samples on each
/// side, which smooths pixel staircase noise. Normal signs are made
/// continuous along the curve.
pub fn curve_normals_with_span(curve: &Curve, span: usize) -> Result<Curve> {
    let n = curve.samples.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!("curve has {n} samples, need >= 3")));
    }
    let span = span.max(1);
    let mut normals: Vec<Vec2> = Vec::with_capacity(n);
    for j in 0..n {
        let lo = j.saturating_sub(span);
        let hi = (j + span).min(n - 1);
        let tangent = curve.samples[hi] - curve.samples[lo];
        let normal = tangent.perp().normalized().ok_or(Error::DegenerateCurve)?;
        let normal = match normals.last() {
            Some(prev) if prev.dot(normal) < 0.0 => -normal,
            _ => normal,
        };
        normals.push(normal);
    }
    Ok(Curve {
        anchor: curve.anchor,
        samples: curve.samples.clone(),
        normals,
    })
}
