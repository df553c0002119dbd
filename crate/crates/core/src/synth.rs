//! Mirror-symmetric test images with ground truth.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::axis::SymmetryAxis;
use crate::error::{Error, Result};
use crate::geometry::{Pixel, Vec2};
use crate::image::{rgb_pixel_to_lab, ColorSpace, RasterImage};
use crate::segment::BinaryMask;
use crate::symmslic::LabelMap;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub width: usize,
    pub height: usize,
    pub axis: SymmetryAxis,
    pub n_blobs: usize,
    /// Standard deviation of the per-channel Gaussian noise, in 8-bit units.
    pub noise_sigma: f64,
    pub seed: u64,
    /// Blob radius range as fractions of the shorter image side.
    pub radius: (f64, f64),
    /// Peak deviation of the background texture from mid grey.
    pub background_amplitude: f64,
}

impl SynthParams {
    /// `width x height` with a vertical axis through the middle.
    pub fn centered(width: usize, height: usize, seed: u64) -> Self {
        SynthParams {
            width,
            height,
            axis: SymmetryAxis::from_angle(
                Vec2::new((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0),
                90.0,
                0,
            ),
            n_blobs: 3,
            noise_sigma: 0.0,
            seed,
            radius: (0.12, 0.2),
            background_amplitude: 30.0,
        }
    }
}

impl Default for SynthParams {
    fn default() -> Self {
        Self::centered(256, 256, 42)
    }
}

/// What the generator knows about its image.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthTruth {
    pub axis: SymmetryAxis,
    /// Pixels of the mirrored blobs.
    pub mask: BinaryMask,
    /// 0 for background, `k + 1` for blob `k` and its mirror image.
    pub segments: LabelMap,
}

impl SynthTruth {
    /// Exact mirror position of `p`.
    pub fn partner(&self, p: Vec2) -> Vec2 {
        self.axis.transform().reflect_point(p)
    }

    /// Up to `n` object pixels with their rounded in-bounds mirrors, evenly
    /// strided in raster order.
    pub fn sample_correspondences(&self, n: usize) -> Vec<(Pixel, Pixel)> {
        let (w, h) = self.mask.dims();
        let t = self.axis.transform();
        let all: Vec<(Pixel, Pixel)> = (0..w * h)
            .filter(|&i| self.mask.data()[i])
            .filter_map(|i| {
                let p = Pixel::from_index(i, w);
                let q = t.reflect_point(Vec2::from_pixel(p)).to_pixel(w, h)?;
                Some((p, q))
            })
            .collect();
        if all.len() <= n || n == 0 {
            return if n == 0 { Vec::new() } else { all };
        }
        (0..n).map(|k| all[k * all.len() / n]).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SynthImage {
    /// RGB with integer channel values.
    pub image: RasterImage,
    pub truth: SynthTruth,
}

/// Smallest Lab lightness gap between a blob and the mid-grey background.
const MIN_LIGHTNESS_CONTRAST: f64 = 20.0;

#[derive(Debug, Clone)]
struct Blob {
    center: Vec2,
    radii: Vec<f64>,
    color: [f64; 3],
}

impl Blob {
    fn random(rng: &mut ChaCha8Rng, center: Vec2, r: f64) -> Self {
        const N: usize = 16;
        let raw: Vec<f64> = (0..N).map(|_| r * rng.random_range(0.4..1.0)).collect();
        Blob {
            center,
            radii: raw,
            color: [0.0; 3],
        }
        .with_random_color(rng)
    }

    fn with_random_color(mut self, rng: &mut ChaCha8Rng) -> Self {
        let mut channel = || {
            if rng.random_bool(0.5) {
                rng.random_range(20..=80) as f64
            } else {
                rng.random_range(170..=240) as f64
            }
        };
        // Edges are found on lightness, so blobs must stand out in it.
        let grey = rgb_pixel_to_lab([128.0; 3])[0];
        loop {
            let c = [channel(), channel(), channel()];
            if (rgb_pixel_to_lab(c)[0] - grey).abs() >= MIN_LIGHTNESS_CONTRAST {
                self.color = c;
                return self;
            }
        }
    }

    /// Vertex radii blended with a periodic Gaussian kernel in angle.
    fn radius_at(&self, phi: f64) -> f64 {
        let n = self.radii.len();
        let step = TAU / n as f64;
        let sigma = 0.8 * step;
        let (mut num, mut den) = (0.0, 0.0);
        for (k, &r) in self.radii.iter().enumerate() {
            let mut d = (phi - k as f64 * step).rem_euclid(TAU);
            if d > TAU / 2.0 {
                d -= TAU;
            }
            let wt = (-d * d / (2.0 * sigma * sigma)).exp();
            num += wt * r;
            den += wt;
        }
        num / den
    }

    fn contains(&self, p: Vec2) -> bool {
        let d = p - self.center;
        let r = d.norm();
        if r == 0.0 {
            return true;
        }
        r <= self.radius_at(d.y.atan2(d.x))
    }

    fn max_radius(&self) -> f64 {
        self.radii.iter().cloned().fold(0.0, f64::max)
    }
}

struct ValueNoise {
    cell: f64,
    nx: usize,
    values: Vec<f64>,
}

impl ValueNoise {
    fn new(rng: &mut ChaCha8Rng, w: usize, h: usize, cell: f64) -> Self {
        let nx = (w as f64 / cell).ceil() as usize + 2;
        let ny = (h as f64 / cell).ceil() as usize + 2;
        ValueNoise {
            cell,
            nx,
            values: (0..nx * ny).map(|_| rng.random_range(-1.0..1.0)).collect(),
        }
    }

    fn at(&self, x: f64, y: f64) -> f64 {
        let (gx, gy) = (x / self.cell, y / self.cell);
        let (ix, iy) = (gx.floor() as usize, gy.floor() as usize);
        let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
        let (fx, fy) = (smooth(gx - gx.floor()), smooth(gy - gy.floor()));
        let v = |i: usize, j: usize| self.values[j * self.nx + i];
        let top = v(ix, iy) * (1.0 - fx) + v(ix + 1, iy) * fx;
        let bottom = v(ix, iy + 1) * (1.0 - fx) + v(ix + 1, iy + 1) * fx;
        top * (1.0 - fy) + bottom * fy
    }
}

fn axis_crosses_image(axis: &SymmetryAxis, w: usize, h: usize) -> bool {
    let t = axis.transform();
    let corners = [
        Vec2::new(-0.5, -0.5),
        Vec2::new(w as f64 - 0.5, -0.5),
        Vec2::new(-0.5, h as f64 - 0.5),
        Vec2::new(w as f64 - 0.5, h as f64 - 0.5),
    ];
    let s: Vec<f64> = corners.iter().map(|&c| t.signed_distance(c)).collect();
    s.iter().any(|&v| v <= 0.0) && s.iter().any(|&v| v >= 0.0)
}

/// Random smooth blobs on the negative side of the axis, mirrored onto the
/// other side, over a textured background that is not symmetric.
pub fn generate(params: &SynthParams) -> Result<SynthImage> {
    let (w, h) = (params.width, params.height);
    if w == 0 || h == 0 {
        return Err(Error::ZeroDimension {
            width: w as u32,
            height: h as u32,
        });
    }
    if params.n_blobs == 0 {
        return Err(Error::InvalidParameter("n_blobs must be at least 1".into()));
    }
    if !(params.noise_sigma >= 0.0) {
        return Err(Error::InvalidParameter("noise_sigma must be non-negative".into()));
    }
    let (rmin, rmax) = params.radius;
    if !(rmin > 0.0 && rmin <= rmax) {
        return Err(Error::InvalidParameter("blob radius range must satisfy 0 < min <= max".into()));
    }
    if !axis_crosses_image(&params.axis, w, h) {
        return Err(Error::InvalidParameter("symmetry axis misses the image".into()));
    }
    let t = params.axis.transform();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let side = w.min(h) as f64;

    let mut blobs = Vec::new();
    let mut attempts = 0;
    while blobs.len() < params.n_blobs {
        attempts += 1;
        if attempts > 10_000 {
            return Err(Error::InvalidParameter("could not place blobs inside the image".into()));
        }
        let r = side * rng.random_range(rmin..=rmax);
        let c = Vec2::new(rng.random_range(0.0..w as f64), rng.random_range(0.0..h as f64));
        let blob = Blob::random(&mut rng, c, r);
        let m = blob.max_radius() + 2.0;
        let inside = |p: Vec2| p.x >= m && p.y >= m && p.x <= w as f64 - 1.0 - m && p.y <= h as f64 - 1.0 - m;
        if t.signed_distance(c) > -0.3 * r || !inside(c) || !inside(t.reflect_point(c)) {
            continue;
        }
        blobs.push(blob);
    }

    let lum = ValueNoise::new(&mut rng, w, h, 24.0);
    let tint: Vec<ValueNoise> = (0..3).map(|_| ValueNoise::new(&mut rng, w, h, 48.0)).collect();
    let noise = Normal::new(0.0, params.noise_sigma.max(f64::MIN_POSITIVE)).expect("valid sigma");

    let mut data = Vec::with_capacity(w * h);
    let mut mask = Vec::with_capacity(w * h);
    let mut segments = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let p = Vec2::new(x as f64, y as f64);
            let q = if t.signed_distance(p) <= 0.0 { p } else { t.reflect_point(p) };
            let hit = blobs.iter().enumerate().rev().find(|(_, b)| b.contains(q));
            let color = match hit {
                Some((_, b)) => b.color,
                None => {
                    let base = 128.0 + params.background_amplitude * lum.at(p.x, p.y);
                    let mut c = [0.0; 3];
                    for (ch, n) in tint.iter().enumerate() {
                        c[ch] = base + 0.3 * params.background_amplitude * n.at(p.x, p.y);
                    }
                    c
                }
            };
            mask.push(hit.is_some());
            segments.push(hit.map_or(0, |(k, _)| k as u32 + 1));
            data.push(color);
        }
    }
    if params.noise_sigma > 0.0 {
        for px in data.iter_mut() {
            for c in px.iter_mut() {
                *c += noise.sample(&mut rng);
            }
        }
    }
    for px in data.iter_mut() {
        for c in px.iter_mut() {
            *c = c.round().clamp(0.0, 255.0);
        }
    }

    Ok(SynthImage {
        image: RasterImage::new(w, h, ColorSpace::Rgb, data)?,
        truth: SynthTruth {
            axis: params.axis,
            mask: BinaryMask::new(w, h, mask)?,
            segments: LabelMap::new(w, h, segments)?,
        },
    })
}
