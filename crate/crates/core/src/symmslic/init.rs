use log::debug;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clustering::MirrorSplit;
use crate::edges::gaussian_blur;
use crate::error::{Error, Result};
use crate::geometry::{Pixel, Vec2};
use crate::hull::ConvexHull;
use crate::image::{compute_gradient, ColorSpace, GradientField, RasterImage};
use crate::reflection::ReflectionTransform;

use super::{Center, CenterSet};

/// Regular seeding grid: `nx * ny` cells of roughly `step` pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLayout {
    pub step: f64,
    pub nx: usize,
    pub ny: usize,
    /// Cell centers, row-major.
    pub centers: Vec<Vec2>,
}

pub fn grid_layout(w: usize, h: usize, k: usize) -> GridLayout {
    let step = ((w * h) as f64 / k.max(1) as f64).sqrt();
    let nx = ((w as f64 / step).round() as usize).max(1);
    let ny = ((h as f64 / step).round() as usize).max(1);
    let (sx, sy) = (w as f64 / nx as f64, h as f64 / ny as f64);
    let centers = (0..ny)
        .flat_map(|iy| {
            (0..nx).map(move |ix| Vec2::new((ix as f64 + 0.5) * sx - 0.5, (iy as f64 + 0.5) * sy - 0.5))
        })
        .collect();
    GridLayout { step, nx, ny, centers }
}

/// How `k` superpixels split between grid cells and mirror pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Budget {
    pub step: f64,
    /// Grid cell centers outside the hull, row-major.
    pub grid_centers: Vec<Vec2>,
    /// Number of pairs (two superpixels each) to place in the hull.
    pub pair_budget: usize,
    /// Pairs taken from the detected ones.
    pub selected: usize,
    /// Pairs to synthesise by reflecting points inside the hull.
    pub deficit: usize,
}

impl Budget {
    /// Count of grid cells outside the hull.
    pub fn s(&self) -> usize {
        self.grid_centers.len()
    }
}

pub fn superpixel_budget(w: usize, h: usize, k: usize, hull: &ConvexHull, n_pairs: usize) -> Result<Budget> {
    if k < 4 {
        return Err(Error::TooFewSuperpixels(k));
    }
    let layout = grid_layout(w, h, k);
    let grid_centers: Vec<Vec2> = layout.centers.into_iter().filter(|&c| !hull.contains(c)).collect();
    let pair_budget = k.saturating_sub(grid_centers.len()) / 2;
    let selected = n_pairs.min(pair_budget);
    Ok(Budget {
        step: layout.step,
        grid_centers,
        pair_budget,
        selected,
        deficit: pair_budget - selected,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitOptions {
    /// Half side of the relocation search window, pixels.
    pub relocate_radius: i32,
    /// Blur applied before measuring gradients for relocation.
    pub relocate_sigma: f64,
    /// Minimum distance between initial centers, in grid steps.
    pub min_spacing: f64,
    /// Random draws per missing pair when synthesising pairs.
    pub synth_attempts: usize,
}

impl Default for InitOptions {
    fn default() -> Self {
        InitOptions {
            relocate_radius: 3,
            relocate_sigma: 1.0,
            min_spacing: 0.75,
            synth_attempts: 50,
        }
    }
}

/// Luminance gradient of the blurred Lab image.
pub(crate) fn smoothed_gradient(lab: &RasterImage, sigma: f64) -> GradientField {
    let (w, h) = lab.dims();
    let l: Vec<f64> = lab.data().iter().map(|p| p[0]).collect();
    let blurred = if sigma > 0.0 { gaussian_blur(&l, w, h, sigma) } else { l };
    let img = RasterImage::new(w, h, ColorSpace::Lab, blurred.into_iter().map(|v| [v, 0.0, 0.0]).collect())
        .expect("dimensions come from a valid image");
    compute_gradient(&img)
}

/// Moves a pair to the pixel `q` within `radius` of `p` minimising
/// `|grad(q)| + |grad(T q)|`, keeping the partner at the exact mirror `T q`.
/// Ties prefer the smaller move.
pub fn relocate_pair(p: Pixel, t: &ReflectionTransform, grad: &GradientField, radius: i32) -> Option<(Vec2, Vec2)> {
    let (w, h) = (grad.width(), grad.height());
    let mut best: Option<(f64, i32, Vec2, Vec2)> = None;
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            let (x, y) = (p.x as i64 + dx as i64, p.y as i64 + dy as i64);
            if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
                continue;
            }
            let q = Vec2::new(x as f64, y as f64);
            let m = t.reflect_point(q);
            match m.to_pixel(w, h) {
                Some(mp) if mp != Pixel::new(x as u32, y as u32) => {}
                _ => continue,
            }
            let cost = grad.magnitude_at(Pixel::new(x as u32, y as u32)) + grad.magnitude_bilinear(m);
            let moved = dx * dx + dy * dy;
            if best.is_none_or(|(bc, bm, _, _)| cost < bc || (cost == bc && moved < bm)) {
                best = Some((cost, moved, q, m));
            }
        }
    }
    best.map(|(_, _, q, m)| (q, m))
}

fn far_from(points: &[Vec2], p: Vec2, min_d: f64) -> bool {
    points.iter().all(|q| q.distance(p) >= min_d)
}

/// Initial centers: grid cells outside the hull of the mirror pixels, then
/// mirror pairs inside it (lower index on the left pixel's side).
///
/// Detected pairs are drawn in random order and kept when they are at
/// least `min_spacing` steps from every kept center; missing pairs are made
/// by reflecting random hull points by the axis of their nearest detected
/// pair.
pub fn symmetric_init(
    lab: &RasterImage,
    split: &MirrorSplit,
    k: usize,
    seed: u64,
    opts: &InitOptions,
) -> Result<(CenterSet, GridLayout)> {
    let (w, h) = lab.dims();
    let points: Vec<Vec2> = split
        .left
        .iter()
        .chain(&split.right)
        .map(|&p| Vec2::from_pixel(p))
        .collect();
    let hull = ConvexHull::new(&points);
    let budget = superpixel_budget(w, h, k, &hull, split.len())?;
    let layout = grid_layout(w, h, k);

    let mut placed: Vec<Vec2> = budget.grid_centers.clone();
    let mut pairs: Vec<(Vec2, Vec2)> = Vec::new();
    if budget.pair_budget > 0 && !split.is_empty() {
        let grad = smoothed_gradient(lab, opts.relocate_sigma);
        let min_d = opts.min_spacing * budget.step;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let transforms: Vec<Option<ReflectionTransform>> = (0..split.len())
            .map(|n| ReflectionTransform::from_pair(Vec2::from_pixel(split.left[n]), Vec2::from_pixel(split.right[n])).ok())
            .collect();

        let try_place = |p: Pixel, t: &ReflectionTransform, placed: &mut Vec<Vec2>, pairs: &mut Vec<(Vec2, Vec2)>| {
            let Some((a, b)) = relocate_pair(p, t, &grad, opts.relocate_radius) else {
                return;
            };
            if a.distance(b) >= min_d && far_from(placed, a, min_d) && far_from(placed, b, min_d) {
                placed.push(a);
                placed.push(b);
                pairs.push((a, b));
            }
        };

        let mut order: Vec<usize> = (0..split.len()).collect();
        order.shuffle(&mut rng);
        for n in order {
            if pairs.len() == budget.pair_budget {
                break;
            }
            if let Some(t) = &transforms[n] {
                try_place(split.left[n], t, &mut placed, &mut pairs);
            }
        }

        let missing = budget.pair_budget - pairs.len();
        if missing > 0 {
            if let Some((lo, hi)) = hull.bounds() {
                for _ in 0..missing * opts.synth_attempts {
                    if pairs.len() == budget.pair_budget {
                        break;
                    }
                    let p = Vec2::new(rng.random_range(lo.x..=hi.x), rng.random_range(lo.y..=hi.y));
                    let Some(px) = p.to_pixel(w, h) else {
                        continue;
                    };
                    if !hull.contains(Vec2::from_pixel(px)) {
                        continue;
                    }
                    let q = Vec2::from_pixel(px);
                    let nearest = (0..split.len())
                        .filter(|&n| transforms[n].is_some())
                        .min_by(|&a, &b| {
                            let d = |n: usize| {
                                q.distance(Vec2::from_pixel(split.left[n]))
                                    .min(q.distance(Vec2::from_pixel(split.right[n])))
                            };
                            d(a).total_cmp(&d(b))
                        });
                    if let Some(n) = nearest {
                        let t = transforms[n].expect("filtered");
                        try_place(px, &t, &mut placed, &mut pairs);
                    }
                }
            }
        }
        debug!(
            "init: {} grid centers, {} of {} pairs ({} detected)",
            budget.s(),
            pairs.len(),
            budget.pair_budget,
            split.len()
        );
    }

    let g = budget.grid_centers.len();
    let mut centers: Vec<Center> = budget
        .grid_centers
        .iter()
        .map(|&p| Center {
            position: p,
            color: lab.sample_nearest(p),
            partner: None,
        })
        .collect();
    for (n, &(a, b)) in pairs.iter().enumerate() {
        let (ia, ib) = (g + 2 * n, g + 2 * n + 1);
        centers.push(Center {
            position: a,
            color: lab.sample_nearest(a),
            partner: Some(ib),
        });
        centers.push(Center {
            position: b,
            color: lab.sample_nearest(b),
            partner: Some(ia),
        });
    }
    Ok((CenterSet::new(centers)?, layout))
}
