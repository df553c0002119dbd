//! Raster images, colour conversion and luminance gradients.

use std::path::Path;

use image::{ImageError, ImageReader, Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::geometry::{Pixel, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorSpace {
    /// 8-bit sRGB values stored as reals in `[0, 255]`.
    Rgb,
    /// CIE Lab under D65, `L` in `[0, 100]`.
    Lab,
}

/// A three-channel raster, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    space: ColorSpace,
    data: Vec<[f64; 3]>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, space: ColorSpace, data: Vec<[f64; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension {
                width: width as u32,
                height: height as u32,
            });
        }
        if data.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "pixel buffer holds {} values, expected {}",
                data.len(),
                width * height
            )));
        }
        Ok(RasterImage {
            width,
            height,
            space,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, space: ColorSpace, value: [f64; 3]) -> Result<Self> {
        Self::new(width, height, space, vec![value; width * height])
    }

    pub fn from_rgb8(img: &RgbImage) -> Result<Self> {
        let data = img
            .pixels()
            .map(|p| [p[0] as f64, p[1] as f64, p[2] as f64])
            .collect();
        Self::new(img.width() as usize, img.height() as usize, ColorSpace::Rgb, data)
    }

    /// Rounds and clamps channels to 8 bits. Only meaningful for RGB images.
    pub fn to_rgb8(&self) -> RgbImage {
        RgbImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            let v = self.data[y as usize * self.width + x as usize];
            Rgb([to_u8(v[0]), to_u8(v[1]), to_u8(v[2])])
        })
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

    pub fn space(&self) -> ColorSpace {
        self.space
    }

    pub fn data(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }

    pub fn at(&self, p: Pixel) -> [f64; 3] {
        self.get(p.x as usize, p.y as usize)
    }

    pub fn set(&mut self, x: usize, y: usize, v: [f64; 3]) {
        self.data[y * self.width + x] = v;
    }

    /// Colour at the nearest pixel to `p`, clamped to the raster.
    pub fn sample_nearest(&self, p: Vec2) -> [f64; 3] {
        let x = p.x.round().clamp(0.0, (self.width - 1) as f64) as usize;
        let y = p.y.round().clamp(0.0, (self.height - 1) as f64) as usize;
        self.get(x, y)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.to_pixel(self.width, self.height).is_some()
    }

    /// Lab conversion of an RGB image; Lab input is returned unchanged.
    pub fn to_lab(&self) -> RasterImage {
        match self.space {
            ColorSpace::Lab => self.clone(),
            ColorSpace::Rgb => rgb_to_lab(self),
        }
    }
}

fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Loads a PNG, PPM or JPEG file as an RGB raster.
pub fn load_image(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| Error::Unreadable {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?
        .with_guessed_format()
        .map_err(|e| Error::Unreadable {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    if reader.format().is_none() {
        return Err(Error::UnsupportedFormat(path.display().to_string()));
    }
    let img = reader.decode().map_err(|e| match e {
        ImageError::Unsupported(u) => Error::UnsupportedFormat(u.to_string()),
        other => Error::Unreadable {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    })?;
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::ZeroDimension {
            width: img.width(),
            height: img.height(),
        });
    }
    RasterImage::from_rgb8(&img.to_rgb8())
}

// D65 reference white.
const WHITE_X: f64 = 0.950_47;
const WHITE_Y: f64 = 1.0;
const WHITE_Z: f64 = 1.088_83;

fn srgb_to_linear(c: f64) -> f64 {
    let c = c / 255.0;
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// Converts one sRGB triple (channels in `[0, 255]`) to CIE Lab.
pub fn rgb_pixel_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    let r = srgb_to_linear(rgb[0]);
    let g = srgb_to_linear(rgb[1]);
    let b = srgb_to_linear(rgb[2]);
    let x = 0.412_456_4 * r + 0.357_576_1 * g + 0.180_437_5 * b;
    let y = 0.212_672_9 * r + 0.715_152_2 * g + 0.072_175_0 * b;
    let z = 0.019_333_9 * r + 0.119_192_0 * g + 0.950_304_1 * b;
    let fx = lab_f(x / WHITE_X);
    let fy = lab_f(y / WHITE_Y);
    let fz = lab_f(z / WHITE_Z);
    [(116.0 * fy - 16.0).clamp(0.0, 100.0), 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

pub fn rgb_to_lab(img: &RasterImage) -> RasterImage {
    let data = img.data.iter().map(|&p| rgb_pixel_to_lab(p)).collect();
    RasterImage {
        width: img.width,
        height: img.height,
        space: ColorSpace::Lab,
        data,
    }
}

/// Finite-difference gradient of the first (lightness) channel.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    width: usize,
    height: usize,
    grad: Vec<Vec2>,
    magnitude: Vec<f64>,
}

impl GradientField {
    /// Wraps precomputed per-pixel gradient vectors (row-major).
    pub fn from_vectors(width: usize, height: usize, grad: Vec<Vec2>) -> Self {
        assert_eq!(grad.len(), width * height);
        let magnitude = grad.iter().map(|g| g.norm()).collect();
        GradientField {
            width,
            height,
            grad,
            magnitude,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn at(&self, p: Pixel) -> Vec2 {
        self.grad[p.index(self.width)]
    }

    pub fn magnitude_at(&self, p: Pixel) -> f64 {
        self.magnitude[p.index(self.width)]
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitude
    }

    /// Bilinearly interpolated magnitude, clamped at the border.
    pub fn magnitude_bilinear(&self, p: Vec2) -> f64 {
        bilinear(&self.magnitude, self.width, self.height, p)
    }
}

pub(crate) fn bilinear(values: &[f64], width: usize, height: usize, p: Vec2) -> f64 {
    let x = p.x.clamp(0.0, (width - 1) as f64);
    let y = p.y.clamp(0.0, (height - 1) as f64);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(width - 1);
    let y1 = (y0 + 1).min(height - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let v = |xx: usize, yy: usize| values[yy * width + xx];
    let top = v(x0, y0) * (1.0 - fx) + v(x1, y0) * fx;
    let bottom = v(x0, y1) * (1.0 - fx) + v(x1, y1) * fx;
    top * (1.0 - fy) + bottom * fy
}

/// Central differences of channel 0, one-sided at the borders.
pub fn compute_gradient(img: &RasterImage) -> GradientField {
    let (w, h) = img.dims();
    let l = |x: usize, y: usize| img.data[y * w + x][0];
    let diff = |lo: f64, hi: f64, span: usize| if span == 0 { 0.0 } else { (hi - lo) / span as f64 };
    let mut grad = Vec::with_capacity(w * h);
    for y in 0..h {
        let (y0, y1) = (y.saturating_sub(1), (y + 1).min(h - 1));
        for x in 0..w {
            let (x0, x1) = (x.saturating_sub(1), (x + 1).min(w - 1));
            let gx = diff(l(x0, y), l(x1, y), x1 - x0);
            let gy = diff(l(x, y0), l(x, y1), y1 - y0);
            grad.push(Vec2::new(gx, gy));
        }
    }
    let magnitude = grad.iter().map(|g| g.norm()).collect();
    GradientField {
        width: w,
        height: h,
        grad,
        magnitude,
    }
}
