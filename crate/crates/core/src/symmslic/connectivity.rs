use std::collections::VecDeque;

use log::debug;

use crate::geometry::Vec2;
use crate::reflection::ReflectionTransform;

use super::assign::AssignmentState;
use super::{LabelMap, SuperpixelPair, SuperpixelPairing};

const NO_TWIN: u32 = u32::MAX;

/// 4-neighbours in the order left, up, right, down.
fn neighbours(idx: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (x, y) = (idx % w, idx / w);
    [
        (x > 0).then(|| idx - 1),
        (y > 0).then(|| idx - w),
        (x + 1 < w).then(|| idx + 1),
        (y + 1 < h).then(|| idx + w),
    ]
    .into_iter()
    .flatten()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Status {
    Main,
    Relabeled,
    Pending,
    Merged,
}

#[derive(Debug, Clone)]
struct Component {
    label: usize,
    pixels: Vec<usize>,
    status: Status,
    final_label: usize,
}

struct Work {
    w: usize,
    h: usize,
    labels: Vec<i32>,
    twin: Vec<u32>,
    partner: Vec<Option<usize>>,
    transform: Vec<Option<ReflectionTransform>>,
}

impl Work {
    fn unlink(&mut self, idx: usize) {
        let t = self.twin[idx];
        if t != NO_TWIN {
            self.twin[t as usize] = NO_TWIN;
            self.twin[idx] = NO_TWIN;
        }
    }

    fn ensure_label(&mut self, l: usize) {
        if self.partner.len() <= l {
            self.partner.resize(l + 1, None);
            self.transform.resize(l + 1, None);
        }
    }

    fn try_fill(&mut self, idx: usize, force: bool) -> bool {
        let (w, h) = (self.w, self.h);
        let cands: Vec<usize> = neighbours(idx, w, h)
            .filter(|&n| self.labels[n] >= 0)
            .map(|n| self.labels[n] as usize)
            .collect();
        for &c in &cands {
            let (Some(pc), Some(t)) = (self.partner[c], self.transform[c]) else {
                self.labels[idx] = c as i32;
                return true;
            };
            let p = Vec2::new((idx % w) as f64, (idx / w) as f64);
            match t.reflect_point(p).to_pixel(w, h).map(|q| q.index(w)) {
                Some(q) if q == idx => {
                    self.labels[idx] = c as i32;
                    return true;
                }
                Some(q) if self.labels[q] < 0 => {
                    self.labels[idx] = c as i32;
                    self.labels[q] = pc as i32;
                    self.twin[idx] = q as u32;
                    self.twin[q] = idx as u32;
                    return true;
                }
                _ => {}
            }
        }
        if force {
            if let Some(&c) = cands.first() {
                self.labels[idx] = c as i32;
                return true;
            }
        }
        false
    }

    /// Gives every unassigned pixel a neighbour's label, the mirror pixel
    /// following along for paired labels whenever it is free too.
    fn fill(&mut self) {
        if self.labels.iter().all(|&l| l < 0) {
            self.labels.fill(0);
            self.ensure_label(0);
            return;
        }
        let mut force = false;
        loop {
            let mut progress = false;
            let mut remaining = false;
            for idx in 0..self.labels.len() {
                if self.labels[idx] >= 0 {
                    continue;
                }
                if self.try_fill(idx, force) {
                    progress = true;
                } else {
                    remaining = true;
                }
            }
            if !remaining {
                break;
            }
            force = !progress;
        }
    }

    fn components(&self) -> (Vec<usize>, Vec<Component>) {
        let n = self.labels.len();
        let mut comp_of = vec![usize::MAX; n];
        let mut comps = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..n {
            if comp_of[start] != usize::MAX {
                continue;
            }
            let label = self.labels[start];
            let id = comps.len();
            comp_of[start] = id;
            queue.push_back(start);
            let mut pixels = Vec::new();
            while let Some(p) = queue.pop_front() {
                pixels.push(p);
                for q in neighbours(p, self.w, self.h) {
                    if comp_of[q] == usize::MAX && self.labels[q] == label {
                        comp_of[q] = id;
                        queue.push_back(q);
                    }
                }
            }
            pixels.sort_unstable();
            comps.push(Component {
                label: label as usize,
                pixels,
                status: Status::Pending,
                final_label: label as usize,
            });
        }
        (comp_of, comps)
    }

    /// The component holding every twin of `c`, if all of `c` is linked.
    fn twin_component(&self, c: &Component, comp_of: &[usize]) -> Option<usize> {
        let mut found = None;
        for &p in &c.pixels {
            let t = self.twin[p];
            if t == NO_TWIN {
                return None;
            }
            let tc = comp_of[t as usize];
            match found {
                None => found = Some(tc),
                Some(f) if f != tc => return None,
                _ => {}
            }
        }
        found
    }
}

/// Splits every superpixel into 4-connected pieces: the largest keeps its
/// label, pieces of at least a quarter of the nominal size get fresh
/// labels and smaller ones join the largest adjacent superpixel.
fn split_and_merge(work: &mut Work, k: usize) {
    let (w, h) = (work.w, work.h);
    let min_size = (w * h) / k.max(1) / 4;
    let (comp_of, mut comps) = work.components();

    let n_labels = comps.iter().map(|c| c.label + 1).max().unwrap_or(0);
    work.ensure_label(n_labels.saturating_sub(1));
    let mut main: Vec<Option<usize>> = vec![None; n_labels];
    for (id, c) in comps.iter().enumerate() {
        let m = &mut main[c.label];
        if m.is_none_or(|m| c.pixels.len() > comps[m].pixels.len()) {
            *m = Some(id);
        }
    }
    for m in main.iter().flatten() {
        comps[*m].status = Status::Main;
    }

    let mut next_label = n_labels;
    let mut new_label_of: Vec<Option<usize>> = vec![None; comps.len()];
    for id in 0..comps.len() {
        if comps[id].status != Status::Pending || comps[id].pixels.len() < min_size.max(1) {
            continue;
        }
        comps[id].status = Status::Relabeled;
        comps[id].final_label = next_label;
        new_label_of[id] = Some(next_label);
        work.ensure_label(next_label);
        next_label += 1;
    }
    // Relabeled pieces whose twins form exactly one relabeled piece of the
    // partner stay paired under the parent's reflection.
    for id in 0..comps.len() {
        let Some(nl) = new_label_of[id] else { continue };
        if work.partner[nl].is_some() {
            continue;
        }
        let a = comps[id].label;
        let (Some(pa), Some(t)) = (work.partner[a], work.transform[a]) else {
            continue;
        };
        let Some(tc) = work.twin_component(&comps[id], &comp_of) else {
            continue;
        };
        let Some(nt) = new_label_of[tc] else { continue };
        if comps[tc].label != pa || comps[tc].pixels.len() != comps[id].pixels.len() || work.partner[nt].is_some() {
            continue;
        }
        work.partner[nl] = Some(nt);
        work.partner[nt] = Some(nl);
        work.transform[nl] = Some(t);
        work.transform[nt] = Some(t);
    }

    let total_labels = next_label;
    let mut sizes = vec![0usize; total_labels];
    for c in &comps {
        if c.status != Status::Pending {
            sizes[c.final_label] += c.pixels.len();
        }
    }

    let resolved_neighbours = |comps: &[Component], id: usize| -> Vec<usize> {
        let mut out: Vec<usize> = comps[id]
            .pixels
            .iter()
            .flat_map(|&p| neighbours(p, w, h))
            .map(|q| comp_of[q])
            .filter(|&qc| qc != id && comps[qc].status != Status::Pending)
            .map(|qc| comps[qc].final_label)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    };

    loop {
        let mut progress = false;
        let mut any_pending = false;
        for id in 0..comps.len() {
            if comps[id].status != Status::Pending {
                continue;
            }
            let adj = resolved_neighbours(&comps, id);
            let Some(&target) = adj.iter().max_by(|&&x, &&y| sizes[x].cmp(&sizes[y]).then(y.cmp(&x))) else {
                any_pending = true;
                continue;
            };
            progress = true;
            let a = comps[id].label;
            let joint = work.partner[a].and_then(|pa| {
                let tc = work.twin_component(&comps[id], &comp_of)?;
                let ok = comps[tc].label == pa
                    && comps[tc].status == Status::Pending
                    && comps[tc].pixels.len() == comps[id].pixels.len();
                let tb = work.partner[target]?;
                (ok && resolved_neighbours(&comps, tc).contains(&tb)).then_some((tc, tb))
            });
            comps[id].status = Status::Merged;
            comps[id].final_label = target;
            sizes[target] += comps[id].pixels.len();
            match joint {
                Some((tc, tb)) => {
                    comps[tc].status = Status::Merged;
                    comps[tc].final_label = tb;
                    sizes[tb] += comps[tc].pixels.len();
                }
                None => {
                    for p in comps[id].pixels.clone() {
                        work.unlink(p);
                    }
                }
            }
        }
        if !any_pending || !progress {
            break;
        }
    }

    for c in &comps {
        for &p in &c.pixels {
            work.labels[p] = c.final_label as i32;
        }
    }
}

/// Largest fraction of a paired superpixel's pixels allowed to lack a
/// mirror image in the partner.
const MAX_UNMATCHED: f64 = 0.1;

/// Pairs whose pixels mirror each other, up to `MAX_UNMATCHED`. A pixel is
/// matched when its twin, or else its reflected pixel, carries the partner
/// label, or when it lies on the axis.
fn verified_pairs(work: &Work) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
    let n = work.partner.len();
    let mut bad = vec![0usize; n];
    let mut size = vec![0usize; n];
    for (idx, &l) in work.labels.iter().enumerate() {
        let l = l as usize;
        size[l] += 1;
        let Some(pl) = work.partner[l] else { continue };
        let t = work.twin[idx];
        let good = if t != NO_TWIN {
            work.labels[t as usize] as usize == pl
        } else {
            let p = Vec2::new((idx % work.w) as f64, (idx / work.w) as f64);
            work.transform[l].is_some_and(|tr| {
                tr.signed_distance(p).abs() <= 0.5
                    || tr
                        .reflect_point(p)
                        .to_pixel(work.w, work.h)
                        .is_some_and(|q| work.labels[q.index(work.w)] as usize == pl)
            })
        };
        bad[l] += usize::from(!good);
    }
    let fine = |l: usize| size[l] > 0 && bad[l] as f64 <= MAX_UNMATCHED * size[l] as f64;
    let mut kept = Vec::new();
    let mut failed = Vec::new();
    for a in 0..n {
        let Some(b) = work.partner[a] else { continue };
        if b < a {
            continue;
        }
        if fine(a) && fine(b) {
            kept.push((a, b));
        } else {
            debug!("pair ({a}, {b}) unmatched {}/{} and {}/{}", bad[a], size[a], bad[b], size[b]);
            failed.push((a, b));
        }
    }
    (kept, failed)
}

fn compact(labels: &[i32], n: usize) -> (Vec<u32>, Vec<Option<u32>>) {
    let mut used = vec![false; n];
    for &l in labels {
        used[l as usize] = true;
    }
    let mut map = vec![None; n];
    let mut next = 0u32;
    for (l, u) in used.iter().enumerate() {
        if *u {
            map[l] = Some(next);
            next += 1;
        }
    }
    let out = labels.iter().map(|&l| map[l as usize].expect("used label")).collect();
    (out, map)
}

/// Connectivity for plain label maps.
pub fn enforce_connectivity(labels: &LabelMap, k: usize) -> LabelMap {
    let (w, h) = labels.dims();
    let mut work = Work {
        w,
        h,
        labels: labels.labels().iter().map(|&l| l as i32).collect(),
        twin: vec![NO_TWIN; w * h],
        partner: Vec::new(),
        transform: Vec::new(),
    };
    split_and_merge(&mut work, k);
    let n = work.labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
    let (out, _) = compact(&work.labels, n);
    LabelMap::new(w, h, out).expect("dimensions unchanged")
}

/// Fills unassigned pixels and makes every superpixel 4-connected while
/// keeping the mirror links of `pairs` where possible. Pairs whose
/// superpixels stop being exact mirror images are dropped from the
/// pairing and reported as demoted (by center index).
pub fn enforce_connectivity_paired(
    state: &AssignmentState,
    pairs: &[(usize, usize, ReflectionTransform)],
    k: usize,
) -> (LabelMap, SuperpixelPairing) {
    let (w, h) = state.dims();
    let max_label = state
        .labels()
        .iter()
        .map(|&l| l + 1)
        .max()
        .unwrap_or(0)
        .max(0) as usize;
    let n0 = pairs.iter().map(|&(a, b, _)| a.max(b) + 1).max().unwrap_or(0).max(max_label).max(1);
    let mut work = Work {
        w,
        h,
        labels: state.labels().to_vec(),
        twin: state.twins().to_vec(),
        partner: vec![None; n0],
        transform: vec![None; n0],
    };
    for &(a, b, t) in pairs {
        work.partner[a] = Some(b);
        work.partner[b] = Some(a);
        work.transform[a] = Some(t);
        work.transform[b] = Some(t);
    }
    // Links of labels outside the pairing mean nothing here.
    for idx in 0..w * h {
        let l = work.labels[idx];
        if l < 0 || work.partner[l as usize].is_none() {
            work.unlink(idx);
        }
    }

    work.fill();
    split_and_merge(&mut work, k);
    let (kept, failed) = verified_pairs(&work);
    let n = work.partner.len().max(work.labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0));
    let (out, map) = compact(&work.labels, n);
    let mut pairing = SuperpixelPairing::default();
    for (a, b) in kept {
        let (Some(ia), Some(ib), Some(t)) = (map[a], map[b], work.transform[a]) else {
            continue;
        };
        pairing.pairs.push(SuperpixelPair::new(ia, ib, &t));
    }
    pairing.pairs.sort_by_key(|p| (p.i, p.j));
    // Only original centers are reported as demoted.
    pairing.demoted = failed.into_iter().filter(|&(a, b)| a < n0 && b < n0).collect();
    debug!(
        "connectivity: {} labels, {} pairs kept, {} demoted",
        map.iter().flatten().count(),
        pairing.pairs.len(),
        pairing.demoted.len()
    );
    (LabelMap::new(w, h, out).expect("dimensions unchanged"), pairing)
}
