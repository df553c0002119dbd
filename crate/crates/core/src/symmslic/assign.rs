use crate::geometry::{Pixel, Vec2};
use crate::image::RasterImage;
use crate::reflection::ReflectionTransform;

use super::{Center, CenterSet};

const NO_TWIN: u32 = u32::MAX;

/// Squared pixel distance plus `lambda` times squared Lab distance.
pub fn slic_distance(pos: Vec2, color: [f64; 3], center: &Center, lambda: f64) -> f64 {
    let dx = center.position.x - pos.x;
    let dy = center.position.y - pos.y;
    let dl = center.color[0] - color[0];
    let da = center.color[1] - color[1];
    let db = center.color[2] - color[2];
    dx * dx + dy * dy + lambda * (dl * dl + da * da + db * db)
}

/// Inclusive pixel bounds of the `2s x 2s` window around `c`, clipped.
pub(crate) fn window(c: Vec2, s: f64, w: usize, h: usize) -> Option<(usize, usize, usize, usize)> {
    let x0 = (c.x - s).ceil().max(0.0);
    let y0 = (c.y - s).ceil().max(0.0);
    let x1 = (c.x + s).floor().min(w as f64 - 1.0);
    let y1 = (c.y + s).floor().min(h as f64 - 1.0);
    (x0 <= x1 && y0 <= y1).then_some((x0 as usize, x1 as usize, y0 as usize, y1 as usize))
}

/// `(d, i)` beats `(dist, label)` lexicographically; unlabeled loses to all.
#[inline]
pub(crate) fn wins(d: f64, i: usize, dist: f64, label: i32) -> bool {
    d < dist || (d == dist && (label < 0 || i < label as usize))
}

/// Label and distance maps plus the mirror links between pixels of paired
/// superpixels.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentState {
    width: usize,
    height: usize,
    labels: Vec<i32>,
    dist: Vec<f64>,
    twin: Vec<u32>,
    /// The point a pixel contributes to its center's mean: its own position,
    /// or the exact reflection of its twin when it was written as a mirror.
    anchor: Vec<Vec2>,
}

impl AssignmentState {
    pub fn new(width: usize, height: usize) -> Self {
        let n = width * height;
        AssignmentState {
            width,
            height,
            labels: vec![-1; n],
            dist: vec![f64::INFINITY; n],
            twin: vec![NO_TWIN; n],
            anchor: vec![Vec2::ZERO; n],
        }
    }

    pub fn reset(&mut self) {
        self.labels.fill(-1);
        self.dist.fill(f64::INFINITY);
        self.twin.fill(NO_TWIN);
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Center index per pixel, `-1` when unassigned.
    pub fn labels(&self) -> &[i32] {
        &self.labels
    }

    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    pub fn twin(&self, idx: usize) -> Option<usize> {
        (self.twin[idx] != NO_TWIN).then(|| self.twin[idx] as usize)
    }

    pub fn unassigned(&self) -> usize {
        self.labels.iter().filter(|&&l| l < 0).count()
    }

    /// Pixels of center `i`.
    pub fn members(&self, i: usize) -> Vec<Pixel> {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l == i as i32)
            .map(|(idx, _)| Pixel::from_index(idx, self.width))
            .collect()
    }

    pub(crate) fn twins(&self) -> &[u32] {
        &self.twin
    }

    fn pixel_pos(&self, idx: usize) -> Vec2 {
        Vec2::new((idx % self.width) as f64, (idx / self.width) as f64)
    }

    /// Breaks the link of `idx`, unassigning its twin.
    fn release_twin(&mut self, idx: usize) {
        let t = self.twin[idx];
        if t != NO_TWIN {
            let t = t as usize;
            self.twin[idx] = NO_TWIN;
            self.twin[t] = NO_TWIN;
            self.labels[t] = -1;
            self.dist[t] = f64::INFINITY;
        }
    }

    #[cfg(test)]
    pub(crate) fn link_for_test(&mut self, a: usize, la: usize, b: usize, lb: usize) {
        self.set(a, la, 0.0, self.pixel_pos(a));
        self.set(b, lb, 0.0, self.pixel_pos(b));
        self.twin[a] = b as u32;
        self.twin[b] = a as u32;
    }

    fn set(&mut self, idx: usize, label: usize, d: f64, anchor: Vec2) {
        self.labels[idx] = label as i32;
        self.dist[idx] = d;
        self.anchor[idx] = anchor;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStats {
    pub a: usize,
    pub b: usize,
    /// The reflection used for this pass.
    pub transform: ReflectionTransform,
    /// Wins of `a` whose reflection fell outside the image.
    pub drops_a: usize,
    pub drops_b: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignStats {
    pub pairs: Vec<PairStats>,
    /// Sum of distances over assigned pixels.
    pub objective: f64,
}

#[allow(clippy::too_many_arguments)]
fn mirrored_scan(
    state: &mut AssignmentState,
    centers: &CenterSet,
    img: &RasterImage,
    from: usize,
    to: usize,
    t: &ReflectionTransform,
    step: f64,
    lambda: f64,
) -> usize {
    let (w, h) = state.dims();
    let (cf, ct) = (centers.get(from), centers.get(to));
    let Some((x0, x1, y0, y1)) = window(cf.position, step, w, h) else {
        return 0;
    };
    let mut drops = 0;
    for y in y0..=y1 {
        for x in x0..=x1 {
            let idx = y * w + x;
            let pos = Vec2::new(x as f64, y as f64);
            let d = slic_distance(pos, img.get(x, y), cf, lambda);
            if !wins(d, from, state.dist[idx], state.labels[idx]) {
                continue;
            }
            let mirror = t.reflect_point(pos);
            match mirror.to_pixel(w, h) {
                None => {
                    state.release_twin(idx);
                    state.set(idx, from, d, pos);
                    drops += 1;
                }
                Some(q) => {
                    let qi = q.index(w);
                    if qi == idx {
                        // On the axis: cannot belong to both sides.
                        continue;
                    }
                    state.release_twin(idx);
                    state.release_twin(qi);
                    state.set(idx, from, d, pos);
                    let dq = slic_distance(state.pixel_pos(qi), img.get(q.x as usize, q.y as usize), ct, lambda);
                    state.set(qi, to, dq, mirror);
                    state.twin[idx] = qi as u32;
                    state.twin[qi] = idx as u32;
                }
            }
        }
    }
    drops
}

fn plain_scan(state: &mut AssignmentState, centers: &CenterSet, img: &RasterImage, i: usize, step: f64, lambda: f64) {
    let (w, h) = state.dims();
    let c = centers.get(i);
    let Some((x0, x1, y0, y1)) = window(c.position, step, w, h) else {
        return;
    };
    for y in y0..=y1 {
        for x in x0..=x1 {
            let idx = y * w + x;
            let pos = Vec2::new(x as f64, y as f64);
            let d = slic_distance(pos, img.get(x, y), c, lambda);
            if wins(d, i, state.dist[idx], state.labels[idx]) {
                state.release_twin(idx);
                state.set(idx, i, d, pos);
            }
        }
    }
}

/// One assignment pass into a freshly reset `state`.
///
/// Paired centers go first, lower-index side of every pair then the other
/// side, each win also writing the reflected pixel to the partner. Unpaired
/// centers follow with ordinary SLIC updates. Overwriting a linked pixel
/// unassigns its twin, so the linked pixels of a pair always match one to
/// one.
pub fn assign_iteration(
    state: &mut AssignmentState,
    centers: &CenterSet,
    img: &RasterImage,
    step: f64,
    lambda: f64,
) -> AssignStats {
    let mut pairs: Vec<PairStats> = centers
        .pairs()
        .into_iter()
        .filter_map(|(a, b)| {
            let transform = centers.transform(a)?;
            Some(PairStats {
                a,
                b,
                transform,
                drops_a: 0,
                drops_b: 0,
            })
        })
        .collect();
    let mut mirrored = vec![false; centers.len()];
    for p in &pairs {
        mirrored[p.a] = true;
        mirrored[p.b] = true;
    }
    for p in pairs.iter_mut() {
        p.drops_a = mirrored_scan(state, centers, img, p.a, p.b, &p.transform, step, lambda);
    }
    for p in pairs.iter_mut() {
        p.drops_b = mirrored_scan(state, centers, img, p.b, p.a, &p.transform, step, lambda);
    }
    for i in (0..centers.len()).filter(|&i| !mirrored[i]) {
        plain_scan(state, centers, img, i, step, lambda);
    }
    let objective = state
        .labels
        .iter()
        .zip(&state.dist)
        .filter(|(&l, _)| l >= 0)
        .map(|(_, &d)| d)
        .sum();
    AssignStats { pairs, objective }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CenterUpdate {
    /// Pixel count per center.
    pub sizes: Vec<usize>,
    /// Centers without pixels; they keep their previous values.
    pub empty: Vec<usize>,
    /// Mean displacement of the non-empty centers.
    pub mean_displacement: f64,
}

/// Moves every center to the mean anchor and mean Lab color of its pixels.
pub fn update_centers(state: &AssignmentState, centers: &mut CenterSet, img: &RasterImage) -> CenterUpdate {
    let n = centers.len();
    let mut sum_x = vec![0.0; n];
    let mut sum_y = vec![0.0; n];
    let mut sum_c = vec![[0.0; 3]; n];
    let mut count = vec![0usize; n];
    let data = img.data();
    for (idx, &l) in state.labels.iter().enumerate() {
        if l < 0 {
            continue;
        }
        let l = l as usize;
        let a = state.anchor[idx];
        sum_x[l] += a.x;
        sum_y[l] += a.y;
        for ch in 0..3 {
            sum_c[l][ch] += data[idx][ch];
        }
        count[l] += 1;
    }
    let mut empty = Vec::new();
    let mut moved = 0.0;
    let mut live = 0usize;
    for i in 0..n {
        if count[i] == 0 {
            empty.push(i);
            continue;
        }
        let c = count[i] as f64;
        let p = Vec2::new(sum_x[i] / c, sum_y[i] / c);
        let color = [sum_c[i][0] / c, sum_c[i][1] / c, sum_c[i][2] / c];
        moved += p.distance(centers.get(i).position);
        live += 1;
        centers.set_position(i, p, color);
    }
    CenterUpdate {
        sizes: count,
        empty,
        mean_displacement: if live == 0 { 0.0 } else { moved / live as f64 },
    }
}
