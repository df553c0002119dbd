//! Canny-style edge detection on the lightness channel and tracing of the
//! resulting one-pixel-wide edges into ordered chains.

use crate::geometry::Pixel;
use crate::image::RasterImage;

/// Standard deviation of the pre-smoothing Gaussian.
pub const EDGE_SIGMA: f64 = 1.4;

/// An ordered run of 8-adjacent edge pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub pixels: Vec<Pixel>,
    /// The last pixel is 8-adjacent to the first and the walk may wrap.
    pub closed: bool,
}

impl Chain {
    /// Arc length along the chain, counting diagonal steps as sqrt(2).
    pub fn arc_length(&self) -> f64 {
        let mut len: f64 = self
            .pixels
            .windows(2)
            .map(|w| step_length(w[0], w[1]))
            .sum();
        if self.closed && self.pixels.len() > 1 {
            len += step_length(self.pixels[self.pixels.len() - 1], self.pixels[0]);
        }
        len
    }
}

pub(crate) fn step_length(a: Pixel, b: Pixel) -> f64 {
    if a.x != b.x && a.y != b.y {
        std::f64::consts::SQRT_2
    } else {
        1.0
    }
}

/// Binary edge map plus chain links between edge pixels.
#[derive(Debug, Clone)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    mask: Vec<bool>,
    pixels: Vec<Pixel>,
    chains: Vec<Chain>,
    location: Vec<Option<(u32, u32)>>,
}

impl EdgeMap {
    /// Builds an edge map from a binary mask, tracing chains.
    pub fn from_mask(width: usize, height: usize, mask: Vec<bool>) -> Self {
        assert_eq!(mask.len(), width * height);
        let pixels: Vec<Pixel> = (0..width * height)
            .filter(|&i| mask[i])
            .map(|i| Pixel::from_index(i, width))
            .collect();
        let chains = trace_chains(width, height, &mask);
        let mut location = vec![None; width * height];
        for (ci, chain) in chains.iter().enumerate() {
            for (pi, p) in chain.pixels.iter().enumerate() {
                location[p.index(width)] = Some((ci as u32, pi as u32));
            }
        }
        EdgeMap {
            width,
            height,
            mask,
            pixels,
            chains,
            location,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_edge(&self, p: Pixel) -> bool {
        (p.x as usize) < self.width && (p.y as usize) < self.height && self.mask[p.index(self.width)]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Edge pixels in raster order.
    pub fn pixels(&self) -> &[Pixel] {
        &self.pixels
    }

    pub fn chains(&self) -> &[Chain] {
        &self.chains
    }

    /// Chain index and position of an edge pixel.
    pub fn location(&self, p: Pixel) -> Option<(usize, usize)> {
        if !self.is_edge(p) {
            return None;
        }
        self.location[p.index(self.width)].map(|(c, i)| (c as usize, i as usize))
    }

    pub fn predecessor(&self, p: Pixel) -> Option<Pixel> {
        let (c, i) = self.location(p)?;
        let chain = &self.chains[c];
        if i > 0 {
            Some(chain.pixels[i - 1])
        } else if chain.closed {
            chain.pixels.last().copied()
        } else {
            None
        }
    }

    pub fn successor(&self, p: Pixel) -> Option<Pixel> {
        let (c, i) = self.location(p)?;
        let chain = &self.chains[c];
        if i + 1 < chain.pixels.len() {
            Some(chain.pixels[i + 1])
        } else if chain.closed {
            chain.pixels.first().copied()
        } else {
            None
        }
    }
}

/// Gaussian smoothing, Sobel gradients, non-maximum suppression, hysteresis
/// with `low`/`high` thresholds on the Sobel magnitude of lightness, then a
/// thinning pass that leaves edges one pixel wide.
pub fn detect_edges(img: &RasterImage, low: f64, high: f64) -> EdgeMap {
    let (w, h) = img.dims();
    let lightness: Vec<f64> = img.data().iter().map(|p| p[0]).collect();
    let blurred = gaussian_blur(&lightness, w, h, EDGE_SIGMA);
    let (gx, gy) = sobel(&blurred, w, h);
    let mag: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect();
    let thin = non_maximum_suppression(&mag, &gx, &gy, w, h);
    let mut mask = hysteresis(&thin, w, h, low, high);
    thin_edges(&mut mask, w, h);
    EdgeMap::from_mask(w, h, mask)
}

pub(crate) fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable Gaussian blur with replicated borders.
pub fn gaussian_blur(values: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as i64;
    let clamp = |v: i64, n: usize| v.clamp(0, n as i64 - 1) as usize;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (j, kv) in k.iter().enumerate() {
                let xx = clamp(x as i64 + j as i64 - r, w);
                acc += kv * values[y * w + xx];
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (j, kv) in k.iter().enumerate() {
                let yy = clamp(y as i64 + j as i64 - r, h);
                acc += kv * tmp[yy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

fn sobel(v: &[f64], w: usize, h: usize) -> (Vec<f64>, Vec<f64>) {
    let at = |x: i64, y: i64| {
        let xx = x.clamp(0, w as i64 - 1) as usize;
        let yy = y.clamp(0, h as i64 - 1) as usize;
        v[yy * w + xx]
    };
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let i = y as usize * w + x as usize;
            gx[i] = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            gy[i] = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
        }
    }
    (gx, gy)
}

fn non_maximum_suppression(mag: &[f64], gx: &[f64], gy: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    let get = |x: i64, y: i64| {
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m <= 0.0 {
                continue;
            }
            let mut angle = gy[i].atan2(gx[i]).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            let (dx, dy) = if !(22.5..157.5).contains(&angle) {
                (1, 0)
            } else if angle < 67.5 {
                (1, 1)
            } else if angle < 112.5 {
                (0, 1)
            } else {
                (-1, 1)
            };
            let (xi, yi) = (x as i64, y as i64);
            let behind = get(xi - dx, yi - dy);
            let ahead = get(xi + dx, yi + dy);
            // One strict side so that symmetric plateaus keep a single pixel.
            if m > behind && m >= ahead {
                out[i] = m;
            }
        }
    }
    out
}

fn hysteresis(strength: &[f64], w: usize, h: usize, low: f64, high: f64) -> Vec<bool> {
    let mut out = vec![false; w * h];
    let mut stack = Vec::new();
    for start in 0..w * h {
        if out[start] || strength[start] < high || strength[start] <= 0.0 {
            continue;
        }
        out[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let p = Pixel::from_index(i, w);
            for q in neighbours8(p, w, h) {
                let j = q.index(w);
                if !out[j] && strength[j] >= low && strength[j] > 0.0 {
                    out[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    out
}

const OFFSETS8: [(i64, i64); 8] = [
    (1, 0),
    (0, 1),
    (-1, 0),
    (0, -1),
    (1, 1),
    (-1, 1),
    (-1, -1),
    (1, -1),
];

pub(crate) fn neighbours8(p: Pixel, w: usize, h: usize) -> impl Iterator<Item = Pixel> {
    OFFSETS8.iter().filter_map(move |&(dx, dy)| {
        let x = p.x as i64 + dx;
        let y = p.y as i64 + dy;
        (x >= 0 && y >= 0 && x < w as i64 && y < h as i64).then(|| Pixel::new(x as u32, y as u32))
    })
}

/// True when removing `p` keeps its edge neighbours 8-connected to each
/// other and `p` is not an endpoint.
fn is_simple(mask: &[bool], p: Pixel, w: usize, h: usize) -> bool {
    let nbrs: Vec<Pixel> = neighbours8(p, w, h).filter(|q| mask[q.index(w)]).collect();
    if nbrs.len() < 2 {
        return false;
    }
    let mut seen = vec![false; nbrs.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(a) = stack.pop() {
        for b in 0..nbrs.len() {
            if !seen[b] && nbrs[a].chebyshev(nbrs[b]) == 1 {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Removes corner pixels of 2x2 blocks holding three or more edge pixels.
fn thin_edges(mask: &mut [bool], w: usize, h: usize) {
    if w < 2 || h < 2 {
        return;
    }
    loop {
        let mut changed = false;
        for y in 0..h - 1 {
            for x in 0..w - 1 {
                let block = [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)];
                let count = block.iter().filter(|&&(bx, by)| mask[by * w + bx]).count();
                if count < 3 {
                    continue;
                }
                // A corner is 4-adjacent to two other set pixels of the block.
                for &(bx, by) in &block {
                    if !mask[by * w + bx] {
                        continue;
                    }
                    let hx = if bx == x { x + 1 } else { x };
                    let vy = if by == y { y + 1 } else { y };
                    if mask[by * w + hx] && mask[vy * w + bx] {
                        let p = Pixel::new(bx as u32, by as u32);
                        if is_simple(mask, p, w, h) {
                            mask[by * w + bx] = false;
                            changed = true;
                            break;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
}

fn trace_chains(w: usize, h: usize, mask: &[bool]) -> Vec<Chain> {
    let mut visited = vec![false; w * h];
    let mut chains = Vec::new();
    let degree = |p: Pixel| neighbours8(p, w, h).filter(|q| mask[q.index(w)]).count();

    let walk = |start: Pixel, visited: &mut Vec<bool>| -> Vec<Pixel> {
        let mut out = Vec::new();
        let mut cur = start;
        loop {
            let next = neighbours8(cur, w, h).find(|q| mask[q.index(w)] && !visited[q.index(w)]);
            match next {
                Some(q) => {
                    visited[q.index(w)] = true;
                    out.push(q);
                    cur = q;
                }
                None => break,
            }
        }
        out
    };

    // Endpoints first so open contours are traced end to end.
    let mut starts: Vec<Pixel> = (0..w * h)
        .filter(|&i| mask[i])
        .map(|i| Pixel::from_index(i, w))
        .filter(|&p| degree(p) == 1)
        .collect();
    starts.extend(
        (0..w * h)
            .filter(|&i| mask[i])
            .map(|i| Pixel::from_index(i, w))
            .filter(|&p| degree(p) != 1),
    );

    for start in starts {
        if visited[start.index(w)] {
            continue;
        }
        visited[start.index(w)] = true;
        let forward = walk(start, &mut visited);
        let backward = walk(start, &mut visited);
        let closed = backward.is_empty()
            && forward.len() >= 3
            && forward.last().is_some_and(|l| l.chebyshev(start) == 1);
        let mut pixels: Vec<Pixel> = backward.into_iter().rev().collect();
        pixels.push(start);
        pixels.extend(forward);
        chains.push(Chain { pixels, closed });
    }
    chains
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::ColorSpace;

    fn lab(w: usize, h: usize, f: impl Fn(usize, usize) -> f64) -> RasterImage {
        let data = (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .map(|(x, y)| [f(x, y), 0.0, 0.0])
            .collect();
        RasterImage::new(w, h, ColorSpace::Lab, data).unwrap()
    }

    fn assert_one_pixel_wide(e: &EdgeMap) {
        let (w, h) = (e.width(), e.height());
        for y in 0..h - 1 {
            for x in 0..w - 1 {
                let c = [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)]
                    .iter()
                    .filter(|&&(a, b)| e.mask()[b * w + a])
                    .count();
                assert!(c < 3, "2x2 block at ({x},{y}) has {c} edge pixels");
            }
        }
    }

    fn assert_links_adjacent(e: &EdgeMap) {
        for chain in e.chains() {
            for pair in chain.pixels.windows(2) {
                assert_eq!(pair[0].chebyshev(pair[1]), 1);
            }
        }
        let traced: usize = e.chains().iter().map(|c| c.pixels.len()).sum();
        assert_eq!(traced, e.pixels().len());
    }

    #[test]
    fn constant_image_has_no_edges() {
        let e = detect_edges(&lab(32, 32, |_, _| 50.0), 8.0, 20.0);
        assert!(e.pixels().is_empty());
        assert!(e.chains().is_empty());
    }

    #[test]
    fn vertical_step_gives_single_column() {
        let e = detect_edges(&lab(40, 30, |x, _| if x >= 20 { 100.0 } else { 0.0 }), 8.0, 20.0);
        assert!(!e.pixels().is_empty());
        let cols: std::collections::BTreeSet<u32> = e.pixels().iter().map(|p| p.x).collect();
        assert_eq!(cols.len(), 1, "{cols:?}");
        let col = *cols.iter().next().unwrap();
        assert!(col == 19 || col == 20);
        assert_eq!(e.pixels().len(), 30);
        assert_eq!(e.chains().len(), 1);
        assert_one_pixel_wide(&e);
    }

    #[test]
    fn disk_contour_is_closed_with_expected_length() {
        let r = 20.0;
        let img = lab(80, 80, |x, y| {
            let dx = x as f64 - 40.0;
            let dy = y as f64 - 40.0;
            if dx.hypot(dy) <= r { 90.0 } else { 10.0 }
        });
        let e = detect_edges(&img, 8.0, 20.0);
        assert_one_pixel_wide(&e);
        assert_links_adjacent(&e);
        let longest = e
            .chains()
            .iter()
            .max_by(|a, b| a.arc_length().total_cmp(&b.arc_length()))
            .unwrap();
        let expected = 2.0 * std::f64::consts::PI * r;
        let len = longest.arc_length();
        assert!((len - expected).abs() <= 0.1 * expected, "len {len} vs {expected}");
        assert!(longest.closed);
    }

    #[test]
    fn links_follow_chain_order() {
        let e = detect_edges(&lab(40, 30, |x, _| if x >= 20 { 100.0 } else { 0.0 }), 8.0, 20.0);
        let chain = &e.chains()[0];
        let mid = chain.pixels[10];
        assert_eq!(e.successor(mid), Some(chain.pixels[11]));
        assert_eq!(e.predecessor(mid), Some(chain.pixels[9]));
        assert_eq!(e.predecessor(chain.pixels[0]), None);
    }

    #[test]
    fn thinning_breaks_l_triads() {
        let w = 6;
        let mut mask = vec![false; w * w];
        for &(x, y) in &[(1, 1), (2, 1), (2, 2), (3, 2), (3, 3), (4, 3)] {
            mask[y * w + x] = true;
        }
        thin_edges(&mut mask, w, w);
        let e = EdgeMap::from_mask(w, w, mask);
        assert_one_pixel_wide(&e);
        assert_eq!(e.chains().len(), 1);
    }
}
