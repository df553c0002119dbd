//! File formats: JSON records, label maps, masks and images. Every writer
//! goes through a temporary file in the target directory and a rename, so a
//! failed run leaves no partial output.

use std::io::Write;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageReader, RgbImage};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::clustering::PairCluster;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::pairs::CandidatePair;
use crate::segment::BinaryMask;
use crate::symmslic::LabelMap;

/// Writes `bytes` to `path` atomically.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Writes every file to a temporary sibling first and renames them only
/// once all were written, so an early failure leaves none of them behind.
pub fn write_all_atomic(files: &[(PathBuf, Vec<u8>)]) -> Result<()> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, bytes) in files {
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
        tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
        tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
        staged.push((tmp, path));
    }
    for (tmp, path) in staged {
        tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    }
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    write_atomic(path, &to_json(value)?)
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_slice(&text)?)
}

/// `{xi: [x, y], xj: [x, y], theta, t: [x, y], score}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub xi: [u32; 2],
    pub xj: [u32; 2],
    pub theta: f64,
    pub t: [f64; 2],
    pub score: f64,
}

impl From<&CandidatePair> for PairRecord {
    fn from(p: &CandidatePair) -> Self {
        PairRecord {
            xi: [p.xi.x, p.xi.y],
            xj: [p.xj.x, p.xj.y],
            theta: p.transform.theta(),
            t: p.transform.midpoint().as_array(),
            score: p.score,
        }
    }
}

impl PairRecord {
    pub fn endpoints(&self) -> (Vec2, Vec2) {
        (
            Vec2::new(self.xi[0] as f64, self.xi[1] as f64),
            Vec2::new(self.xj[0] as f64, self.xj[1] as f64),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub cluster_id: usize,
    pub pairs: Vec<PairRecord>,
}

impl From<&PairCluster> for ClusterRecord {
    fn from(c: &PairCluster) -> Self {
        ClusterRecord {
            cluster_id: c.id,
            pairs: c.pairs.iter().map(PairRecord::from).collect(),
        }
    }
}

fn png_bytes(width: usize, height: usize, color: png::ColorType, depth: png::BitDepth, data: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width as u32, height as u32);
        enc.set_color(color);
        enc.set_depth(depth);
        let mut writer = enc.write_header()?;
        writer.write_image_data(data)?;
        writer.finish()?;
    }
    Ok(out)
}

/// 16-bit greyscale PNG, pixel value = label id.
pub fn labels_to_png(labels: &LabelMap) -> Result<Vec<u8>> {
    let mut data = Vec::with_capacity(labels.labels().len() * 2);
    for &l in labels.labels() {
        let v = u16::try_from(l)
            .map_err(|_| Error::InvalidParameter(format!("label {l} does not fit a 16-bit PNG")))?;
        data.extend_from_slice(&v.to_be_bytes());
    }
    png_bytes(labels.width(), labels.height(), png::ColorType::Grayscale, png::BitDepth::Sixteen, &data)
}

/// `h` lines of `w` comma-separated ids.
pub fn labels_to_csv(labels: &LabelMap) -> String {
    let mut out = String::new();
    for row in labels.labels().chunks(labels.width()) {
        let line: Vec<String> = row.iter().map(u32::to_string).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn labels_from_csv(text: &str) -> Result<LabelMap> {
    let mut width = None;
    let mut labels = Vec::new();
    let mut height = 0;
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|v| v.trim().parse::<u32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse(format!("line {} has {} ids, expected {w}", n + 1, row.len())));
            }
            _ => {}
        }
        labels.extend(row);
        height += 1;
    }
    LabelMap::new(width.unwrap_or(0), height, labels)
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// CSV bytes for a `.csv` path, a 16-bit PNG otherwise.
pub fn encode_labels(path: impl AsRef<Path>, labels: &LabelMap) -> Result<Vec<u8>> {
    if is_csv(path.as_ref()) {
        Ok(labels_to_csv(labels).into_bytes())
    } else {
        labels_to_png(labels)
    }
}

pub fn write_labels(path: impl AsRef<Path>, labels: &LabelMap) -> Result<()> {
    write_atomic(&path, &encode_labels(&path, labels)?)
}

fn decode(path: &Path) -> Result<DynamicImage> {
    let unreadable = |reason: String| Error::Unreadable {
        path: path.to_path_buf(),
        reason,
    };
    ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| unreadable(e.to_string()))?
        .decode()
        .map_err(|e| unreadable(e.to_string()))
}

/// Reads a label map from CSV or an 8/16-bit greyscale PNG (raw values).
pub fn read_labels(path: impl AsRef<Path>) -> Result<LabelMap> {
    let path = path.as_ref();
    if is_csv(path) {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        return labels_from_csv(&text);
    }
    let (w, h, labels): (u32, u32, Vec<u32>) = match decode(path)? {
        DynamicImage::ImageLuma16(img) => (img.width(), img.height(), img.pixels().map(|p| p.0[0] as u32).collect()),
        DynamicImage::ImageLuma8(img) => (img.width(), img.height(), img.pixels().map(|p| p.0[0] as u32).collect()),
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "label maps must be single-channel, got {:?}",
                other.color()
            )))
        }
    };
    LabelMap::new(w as usize, h as usize, labels)
}

/// 1-bit PNG; foreground is white.
pub fn mask_to_png(mask: &BinaryMask) -> Result<Vec<u8>> {
    let (w, h) = mask.dims();
    let stride = w.div_ceil(8);
    let mut data = vec![0u8; stride * h];
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) {
                data[y * stride + x / 8] |= 0x80 >> (x % 8);
            }
        }
    }
    png_bytes(w, h, png::ColorType::Grayscale, png::BitDepth::One, &data)
}

pub fn write_mask(path: impl AsRef<Path>, mask: &BinaryMask) -> Result<()> {
    write_atomic(path, &mask_to_png(mask)?)
}

/// Any readable image; nonzero luminance is foreground.
pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let img = decode(path.as_ref())?.to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    BinaryMask::new(w, h, img.pixels().map(|p| p.0[0] != 0).collect())
}

pub fn rgb_to_png(img: &RgbImage) -> Result<Vec<u8>> {
    png_bytes(
        img.width() as usize,
        img.height() as usize,
        png::ColorType::Rgb,
        png::BitDepth::Eight,
        img.as_raw(),
    )
}

pub fn write_rgb_png(path: impl AsRef<Path>, img: &RgbImage) -> Result<()> {
    write_atomic(path, &rgb_to_png(img)?)
}
