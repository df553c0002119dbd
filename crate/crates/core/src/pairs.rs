//! Randomised generation and scoring of mirror-symmetric edge pixel pairs.

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::curve::{curve_normals_with_span, extract_curve, Curve, TANGENT_SPAN};
use crate::edges::{detect_edges, EdgeMap};
use crate::error::{Error, Result};
use crate::geometry::{Pixel, Vec2};
use crate::image::{compute_gradient, GradientField, RasterImage};
use crate::reflection::ReflectionTransform;

/// A scored candidate: edge pixels `i` and `j` (indices into the edge pixel
/// list) and the reflection swapping them.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePair {
    pub i: usize,
    pub j: usize,
    pub xi: Pixel,
    pub xj: Pixel,
    pub transform: ReflectionTransform,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairParams {
    /// Partners drawn per edge pixel.
    pub h: usize,
    /// Curve length in samples.
    pub p: usize,
    /// Gradient consistency slack; pairs need `cos > 1 - epsilon`.
    pub epsilon: f64,
    /// Minimum normal agreement score, in `[-2, 2]`.
    pub score_threshold: f64,
    pub seed: u64,
    pub edge_low: f64,
    pub edge_high: f64,
    pub tangent_span: usize,
    /// Closer pixels are never paired: their curves overlap, and a straight
    /// curve is its own mirror image about any perpendicular.
    pub min_separation: f64,
}

impl Default for PairParams {
    fn default() -> Self {
        PairParams {
            h: 200,
            p: 64,
            epsilon: 0.2,
            score_threshold: 1.6,
            seed: 42,
            edge_low: 8.0,
            edge_high: 20.0,
            tangent_span: TANGENT_SPAN,
            min_separation: 16.0,
        }
    }
}

/// Probability that `h` uniform draws hit a `u x u` window around the true
/// partner at least once, with a per-draw hit rate of `u^2 / n_edges`.
///
/// When the window holds every other edge pixel (`u^2 >= n_edges - 1`) a
/// single draw is certain to hit.
pub fn detection_probability(n_edges: usize, h: usize, u: usize) -> f64 {
    if h == 0 {
        return 0.0;
    }
    let window = (u * u) as f64;
    let per_draw = if n_edges <= 1 || window >= (n_edges - 1) as f64 {
        1.0
    } else {
        window / n_edges as f64
    };
    (1.0 - (1.0 - per_draw).powi(h as i32)).min(1.0)
}

/// Draws `h` distinct partners for every pixel that has a curve. Returns
/// unordered index pairs `(i, j)`, `i < j`, sorted and deduplicated.
pub fn sample_candidates(
    curves: &[Option<Curve>],
    h: usize,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    if h == 0 {
        return Err(Error::InvalidParameter("h must be at least 1".into()));
    }
    let valid: Vec<usize> = (0..curves.len()).filter(|&i| curves[i].is_some()).collect();
    let m = valid.len();
    if m < 2 {
        return Err(Error::TooFewEdgePixels(m));
    }
    let draws = h.min(m - 1);
    let valid = &valid;
    let mut out: Vec<(usize, usize)> = (0..m)
        .into_par_iter()
        .flat_map_iter(|a| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(a as u64);
            rand::seq::index::sample(&mut rng, m - 1, draws)
                .into_iter()
                .map(move |r| {
                    let b = if r >= a { r + 1 } else { r };
                    let (lo, hi) = (valid[a].min(valid[b]), valid[a].max(valid[b]));
                    (lo, hi)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Mean over samples of the two normal-agreement terms, maximised over the
/// global normal sign and the traversal direction of `cj`.
///
/// `2` means the reflected normals of each curve coincide with the other's.
pub fn normal_agreement_score(ci: &Curve, cj: &Curve, t: &ReflectionTransform) -> Result<f64> {
    agreement(ci, cj, t, None).map(|s| s.unwrap_or(f64::NEG_INFINITY))
}

/// Like [`normal_agreement_score`] but averages only over samples whose
/// reflections fall inside a `width x height` image. `None` when fewer
/// than half of the samples qualify.
pub fn bounded_agreement_score(
    ci: &Curve,
    cj: &Curve,
    t: &ReflectionTransform,
    width: usize,
    height: usize,
) -> Result<Option<f64>> {
    agreement(ci, cj, t, Some((width, height)))
}

fn agreement(
    ci: &Curve,
    cj: &Curve,
    t: &ReflectionTransform,
    bounds: Option<(usize, usize)>,
) -> Result<Option<f64>> {
    let n = ci.normals.len();
    if n != cj.normals.len() || ci.samples.len() != cj.samples.len() {
        return Err(Error::SampleCountMismatch(ci.len(), cj.len()));
    }
    if n == 0 || ci.samples.len() != n {
        return Err(Error::InvalidParameter("curves need normals".into()));
    }
    let inside = |p: Vec2, (w, h): (usize, usize)| {
        p.x >= -0.5 && p.y >= -0.5 && p.x < w as f64 - 0.5 && p.y < h as f64 - 0.5
    };
    let ri: Vec<Vec2> = ci.normals.iter().map(|&v| t.reflect_vector(v)).collect();
    let mut best: Option<f64> = None;
    for reversed in [false, true] {
        let jdx = |a: usize| if reversed { n - 1 - a } else { a };
        let mut sum_a = 0.0;
        let mut sum_b = 0.0;
        let mut count = 0usize;
        for a in 0..n {
            let b = jdx(a);
            if let Some(dims) = bounds {
                if !inside(t.reflect_point(cj.samples[b]), dims)
                    || !inside(t.reflect_point(ci.samples[a]), dims)
                {
                    continue;
                }
            }
            // eta_{j->i}(a) . eta_i(a) and eta_{i->j}(a) . eta_j(a)
            sum_a += t.reflect_vector(cj.normals[b]).dot(ci.normals[a]);
            sum_b += ri[a].dot(cj.normals[b]);
            count += 1;
        }
        if bounds.is_some() && 2 * count < n {
            continue;
        }
        if count == 0 {
            continue;
        }
        let mean = (sum_a + sum_b) / count as f64;
        for s in [mean, -mean] {
            best = Some(best.map_or(s, |b: f64| b.max(s)));
        }
    }
    Ok(best)
}

/// How `cj` lines up with `ci`: its traversal direction and normal sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    pub reversed: bool,
    pub sign: f64,
}

/// Mean of `(T eta_i) . (sign * eta_j)` with `cj` traversed as given.
pub fn oriented_agreement(ci: &Curve, cj: &Curve, t: &ReflectionTransform, o: Orientation) -> Result<f64> {
    let n = ci.normals.len();
    if n != cj.normals.len() {
        return Err(Error::SampleCountMismatch(ci.len(), cj.len()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("curves need normals".into()));
    }
    let sum: f64 = (0..n)
        .map(|a| {
            let b = if o.reversed { n - 1 - a } else { a };
            t.reflect_vector(ci.normals[a]).dot(cj.normals[b])
        })
        .sum();
    Ok(o.sign * sum / n as f64)
}

/// The orientation of `cj` that maximises its agreement with `ci` under `t`.
pub fn best_orientation(ci: &Curve, cj: &Curve, t: &ReflectionTransform) -> Result<Orientation> {
    let mut best = (f64::NEG_INFINITY, Orientation { reversed: false, sign: 1.0 });
    for reversed in [false, true] {
        let o = Orientation { reversed, sign: 1.0 };
        let v = oriented_agreement(ci, cj, t, o)?;
        for (val, sign) in [(v, 1.0), (-v, -1.0)] {
            if val > best.0 {
                best = (val, Orientation { reversed, sign });
            }
        }
    }
    Ok(best.1)
}

/// Keeps a pair iff its unit gradients satisfy
/// `g_i . (R Q R^T g_j) > 1 - epsilon`; zero gradients are rejected.
pub fn filter_by_gradient(pair: &CandidatePair, grad: &GradientField, epsilon: f64) -> bool {
    let (Some(gi), Some(gj)) = (grad.at(pair.xi).normalized(), grad.at(pair.xj).normalized()) else {
        return false;
    };
    gi.dot(pair.transform.reflect_vector(gj)) > 1.0 - epsilon
}

/// Everything the later stages need from pair detection.
#[derive(Debug, Clone)]
pub struct PairDetection {
    pub edges: EdgeMap,
    /// Curve per edge pixel (same order as `edges.pixels()`), with normals.
    pub curves: Vec<Option<Curve>>,
    pub pairs: Vec<CandidatePair>,
}

impl PairDetection {
    pub fn curve(&self, edge_index: usize) -> &Curve {
        self.curves[edge_index]
            .as_ref()
            .expect("pairs only reference pixels with curves")
    }
}

/// Curves with normals for every edge pixel.
pub fn edge_curves(edges: &EdgeMap, p: usize, tangent_span: usize) -> Vec<Option<Curve>> {
    edges
        .pixels()
        .par_iter()
        .map(|&px| {
            extract_curve(edges, px, p)
                .ok()
                .flatten()
                .and_then(|c| curve_normals_with_span(&c, tangent_span).ok())
        })
        .collect()
}

/// Edges, curves, random candidates, score threshold and gradient filter.
/// Output is sorted by `(i, j)` and fully determined by the seed.
pub fn detect_pairs(img: &RasterImage, params: &PairParams) -> Result<PairDetection> {
    if !(params.epsilon > 0.0 && params.epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {}",
            params.epsilon
        )));
    }
    let lab = img.to_lab();
    let (w, h) = lab.dims();
    let edges = detect_edges(&lab, params.edge_low, params.edge_high);
    let curves = edge_curves(&edges, params.p, params.tangent_span);
    let grad = compute_gradient(&lab);
    let candidates = match sample_candidates(&curves, params.h, params.seed) {
        Ok(c) => c,
        Err(Error::TooFewEdgePixels(n)) => {
            warn!("only {n} edge pixels with curves; no pairs detected");
            return Ok(PairDetection {
                edges,
                curves,
                pairs: Vec::new(),
            });
        }
        Err(e) => return Err(e),
    };
    let pixels = edges.pixels();
    let pairs: Vec<CandidatePair> = candidates
        .par_iter()
        .filter_map(|&(i, j)| {
            let (xi, xj) = (pixels[i], pixels[j]);
            if Vec2::from_pixel(xi).distance(Vec2::from_pixel(xj)) < params.min_separation {
                return None;
            }
            let transform =
                ReflectionTransform::from_pair(Vec2::from_pixel(xi), Vec2::from_pixel(xj)).ok()?;
            let ci = curves[i].as_ref()?;
            let cj = curves[j].as_ref()?;
            let score = bounded_agreement_score(ci, cj, &transform, w, h).ok()??;
            if score <= params.score_threshold {
                return None;
            }
            let pair = CandidatePair {
                i,
                j,
                xi,
                xj,
                transform,
                score,
            };
            filter_by_gradient(&pair, &grad, params.epsilon).then_some(pair)
        })
        .collect();
    Ok(PairDetection {
        edges,
        curves,
        pairs,
    })
}
