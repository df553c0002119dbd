//! Debug renderings: superpixel boundaries, paired superpixels, pixel pairs
//! and axes drawn over the input image.

use image::{Rgb, RgbImage};

use crate::axis::SymmetryAxis;
use crate::geometry::Vec2;
use crate::image::RasterImage;
use crate::metrics::boundary_pixels;
use crate::pairs::CandidatePair;
use crate::symmslic::{LabelMap, SuperpixelPairing};

const AXIS_COLOR: Rgb<u8> = Rgb([255, 40, 40]);

/// Hue number `k` of a well-spread sequence, as saturated RGB.
fn hue(k: usize) -> [f64; 3] {
    let h = (k as f64 * 0.618_033_988_75).fract() * 6.0;
    let x = 1.0 - (h % 2.0 - 1.0).abs();
    let (r, g, b) = match h as u32 {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    [r * 255.0, g * 255.0, b * 255.0]
}

/// Plots the part of `line` inside the image, one sample per pixel step.
fn draw_line(img: &mut RgbImage, point: Vec2, direction: Vec2, color: Rgb<u8>) {
    let (w, h) = (img.width() as f64, img.height() as f64);
    let reach = w.hypot(h);
    let steps = (2.0 * reach).ceil() as i64;
    for s in -steps..=steps {
        let p = point + direction * (s as f64 * 0.5);
        if p.x > -0.5 && p.y > -0.5 && p.x < w - 0.5 && p.y < h - 0.5 {
            img.put_pixel(p.x.round() as u32, p.y.round() as u32, color);
        }
    }
}

pub fn draw_axes(img: &mut RgbImage, axes: &[SymmetryAxis]) {
    for a in axes {
        draw_line(img, a.point, a.direction, AXIS_COLOR);
    }
}

/// White superpixel boundaries; both superpixels of a pair share a tint.
pub fn superpixel_overlay(img: &RasterImage, labels: &LabelMap, pairing: &SuperpixelPairing) -> RgbImage {
    let mut out = img.to_rgb8();
    let mut tint: Vec<Option<[f64; 3]>> = vec![None; labels.label_count()];
    for (k, p) in pairing.pairs.iter().enumerate() {
        for l in [p.i, p.j] {
            if let Some(t) = tint.get_mut(l as usize) {
                *t = Some(hue(k));
            }
        }
    }
    let boundary = boundary_pixels(labels);
    for (idx, (&l, &b)) in labels.labels().iter().zip(&boundary).enumerate() {
        let (x, y) = ((idx % labels.width()) as u32, (idx / labels.width()) as u32);
        if b {
            out.put_pixel(x, y, Rgb([255, 255, 255]));
        } else if let Some(t) = tint[l as usize] {
            let px = out.get_pixel_mut(x, y);
            for c in 0..3 {
                px.0[c] = (0.5 * px.0[c] as f64 + 0.5 * t[c]).round() as u8;
            }
        }
    }
    out
}

/// Endpoints of every pair, a hue per pair, over a dimmed image.
pub fn pairs_overlay(img: &RasterImage, pairs: &[CandidatePair]) -> RgbImage {
    let mut out = img.to_rgb8();
    for px in out.pixels_mut() {
        for c in px.0.iter_mut() {
            *c /= 2;
        }
    }
    for (k, p) in pairs.iter().enumerate() {
        let c = hue(k).map(|v| v as u8);
        for q in [p.xi, p.xj] {
            if q.x < out.width() && q.y < out.height() {
                out.put_pixel(q.x, q.y, Rgb(c));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::ColorSpace;
    use crate::reflection::ReflectionTransform;
    use crate::symmslic::SuperpixelPair;

    #[test]
    fn boundaries_and_tints() {
        let img = RasterImage::filled(4, 2, ColorSpace::Rgb, [0.0; 3]).unwrap();
        let labels = LabelMap::new(4, 2, vec![0, 0, 1, 1, 0, 0, 1, 1]).unwrap();
        let t = ReflectionTransform::from_pair(Vec2::new(0.0, 0.0), Vec2::new(3.0, 0.0)).unwrap();
        let pairing = SuperpixelPairing {
            pairs: vec![SuperpixelPair::new(0, 1, &t)],
            demoted: vec![],
        };
        let out = superpixel_overlay(&img, &labels, &pairing);
        assert_eq!(out.get_pixel(1, 0), &Rgb([255, 255, 255]));
        assert_eq!(out.get_pixel(0, 0), out.get_pixel(3, 1));
        assert_ne!(out.get_pixel(0, 0), &Rgb([0, 0, 0]));
    }

    #[test]
    fn axis_line_is_clipped() {
        let mut img = RgbImage::new(10, 10);
        let axis = SymmetryAxis::from_angle(Vec2::new(4.0, 4.0), 90.0, 1);
        draw_axes(&mut img, &[axis]);
        let red = img.pixels().filter(|p| **p == AXIS_COLOR).count();
        assert_eq!(red, 10);
    }

    #[test]
    fn hues_differ() {
        assert_ne!(hue(0), hue(1));
        assert_ne!(hue(1), hue(2));
    }
}
