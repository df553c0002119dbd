//! Grouping of mirror pairs by shared axis.

use log::debug;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::axis::{axis_from_pairs, SymmetryAxis};
use crate::curve::Curve;
use crate::geometry::{Pixel, Vec2};
use crate::graph::{clique_lower_bound, extract_cliques, k_core, PairGraph};
use crate::pairs::{best_orientation, oriented_agreement, CandidatePair, Orientation};

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterParams {
    /// Per-term normal agreement needed for an edge, in `(0, 1)`.
    pub tau: f64,
    /// Largest distance, in pixels, between an anchor reflected by the other
    /// pair's axis and its own partner.
    pub anchor_tol: f64,
    /// Number of cliques to peel.
    pub max_axes: usize,
    /// Smaller clusters are dropped.
    pub min_cluster_size: usize,
    /// Clusters smaller than this fraction of the largest clique found are
    /// dropped.
    pub min_relative_size: f64,
    /// A cluster whose axis lies within these tolerances of an earlier
    /// cluster's axis repeats it and is dropped.
    pub duplicate_angle_deg: f64,
    pub duplicate_dist: f64,
    /// Pairs beyond this count are subsampled before building the graph.
    pub max_graph_pairs: usize,
    pub seed: u64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            tau: 0.85,
            anchor_tol: 2.0,
            max_axes: 3,
            min_cluster_size: 5,
            min_relative_size: 0.5,
            duplicate_angle_deg: 5.0,
            duplicate_dist: 10.0,
            max_graph_pairs: 20_000,
            seed: 42,
        }
    }
}

const GREEDY_TRIES: usize = 16;

/// Pairs that share one symmetry axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCluster {
    pub id: usize,
    pub pairs: Vec<CandidatePair>,
}

/// A pair together with its curves, the partner curve oriented to match.
#[derive(Debug, Clone, Copy)]
pub struct OrientedPair<'a> {
    pub pair: &'a CandidatePair,
    pub curve: &'a Curve,
    pub partner: &'a Curve,
    pub orientation: Orientation,
}

impl<'a> OrientedPair<'a> {
    pub fn new(pair: &'a CandidatePair, curve: &'a Curve, partner: &'a Curve) -> Option<Self> {
        let orientation = best_orientation(curve, partner, &pair.transform).ok()?;
        Some(OrientedPair {
            pair,
            curve,
            partner,
            orientation,
        })
    }

    /// Agreement of this pair's curves when reflected by `other`'s axis,
    /// keeping this pair's own normal orientation.
    fn agreement_under(&self, other: &CandidatePair) -> f64 {
        oriented_agreement(self.curve, self.partner, &other.transform, self.orientation)
            .unwrap_or(f64::NEG_INFINITY)
    }

    fn anchor_lands(&self, other: &CandidatePair) -> f64 {
        other
            .transform
            .reflect_point(Vec2::from_pixel(self.pair.xi))
            .distance(Vec2::from_pixel(self.pair.xj))
    }
}

/// True iff the axes of `a` and `b` explain each other's pairs: each curve
/// reflected by the other pair's axis agrees with its own partner curve,
/// summed over both pairs, by more than `2 tau`, and each anchor lands within
/// `anchor_tol` of its partner.
pub fn pairs_compatible(a: &OrientedPair, b: &OrientedPair, tau: f64, anchor_tol: f64) -> bool {
    if a.anchor_lands(b.pair) > anchor_tol || b.anchor_lands(a.pair) > anchor_tol {
        return false;
    }
    a.agreement_under(b.pair) + b.agreement_under(a.pair) > 2.0 * tau
}

fn line_angle(v: Vec2) -> f64 {
    v.y.atan2(v.x).rem_euclid(std::f64::consts::PI)
}

/// Indices `v > u` that can pass the anchor gate of `pairs[u]`.
///
/// If `b` maps `xi` to within `tol` of `xj`, the midpoint of `xi` and that
/// image lies on `b`'s axis, so `b`'s axis passes within `tol / 2` of the
/// pair midpoint and its normal is within `asin(tol / |xj - xi|)` of
/// `xj - xi`.
fn gate_candidates(u: usize, pairs: &[CandidatePair], order: &[usize], keys: &[f64], tol: f64) -> Vec<usize> {
    use std::f64::consts::PI;
    let p = &pairs[u];
    let (a, b) = (Vec2::from_pixel(p.xi), Vec2::from_pixel(p.xj));
    let sep = a.distance(b);
    let mid = (a + b) * 0.5;
    let mut out = Vec::new();
    let mut test = |k: usize| {
        let v = order[k];
        if v > u && pairs[v].transform.signed_distance(mid).abs() <= 0.5 * tol + 1e-9 {
            out.push(v);
        }
    };
    if sep <= tol {
        (0..order.len()).for_each(&mut test);
        return out;
    }
    let half = (tol / sep).asin() + 1e-9;
    let centre = line_angle(b - a);
    let mut ranges = vec![(centre - half, centre + half)];
    if centre - half < 0.0 {
        ranges = vec![(0.0, centre + half), (centre - half + PI, PI)];
    } else if centre + half >= PI {
        ranges = vec![(centre - half, PI), (0.0, centre + half - PI)];
    }
    for (lo, hi) in ranges {
        let start = keys.partition_point(|&k| k < lo);
        let end = keys.partition_point(|&k| k <= hi);
        (start..end).for_each(&mut test);
    }
    out
}

/// One vertex per pair; `curves` is indexed by the pairs' edge indices.
/// Pairs without curves stay isolated.
pub fn build_pair_graph(
    pairs: &[CandidatePair],
    curves: &[Option<Curve>],
    tau: f64,
    anchor_tol: f64,
) -> PairGraph {
    let n = pairs.len();
    let get = |idx: usize| curves.get(idx).and_then(Option::as_ref);
    let oriented: Vec<Option<OrientedPair>> = pairs
        .par_iter()
        .map(|p| OrientedPair::new(p, get(p.i)?, get(p.j)?))
        .collect();
    // Pairs sorted by the angle of their axis normal.
    let normal_angle = |p: &CandidatePair| line_angle(p.transform.direction().perp());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| normal_angle(&pairs[x]).total_cmp(&normal_angle(&pairs[y])));
    let keys: Vec<f64> = order.iter().map(|&v| normal_angle(&pairs[v])).collect();
    let edges: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let Some(a) = &oriented[u] else {
                return Vec::new();
            };
            let mut vs: Vec<usize> = gate_candidates(u, pairs, &order, &keys, anchor_tol)
                .into_iter()
                .filter(|&v| {
                    oriented[v]
                        .as_ref()
                        .is_some_and(|b| pairs_compatible(a, b, tau, anchor_tol))
                })
                .collect();
            vs.sort_unstable();
            vs
        })
        .collect();
    let mut g = PairGraph::new(n);
    for (u, vs) in edges.into_iter().enumerate() {
        for v in vs {
            g.add_edge(u, v);
        }
    }
    g
}

/// Endpoints of every clustered pair, split so that `left[k] <-> right[k]`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MirrorSplit {
    pub left: Vec<Pixel>,
    pub right: Vec<Pixel>,
    /// Cluster id of pair `k`.
    pub cluster: Vec<usize>,
}

impl MirrorSplit {
    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }
}

/// The lexicographically smaller endpoint of each pair goes left.
pub fn split_lr(clusters: &[PairCluster]) -> MirrorSplit {
    let mut out = MirrorSplit::default();
    for c in clusters {
        for p in &c.pairs {
            let (l, r) = if p.xi <= p.xj { (p.xi, p.xj) } else { (p.xj, p.xi) };
            out.left.push(l);
            out.right.push(r);
            out.cluster.push(c.id);
        }
    }
    out
}

/// Graph construction and clique peeling over detected pairs. Clusters are
/// ordered by extraction, ids follow that order after small ones are
/// dropped.
pub fn cluster_pairs(
    pairs: &[CandidatePair],
    curves: &[Option<Curve>],
    params: &ClusterParams,
) -> Vec<PairCluster> {
    let chosen: Vec<CandidatePair> = if pairs.len() > params.max_graph_pairs {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut idx = sample(&mut rng, pairs.len(), params.max_graph_pairs).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|k| pairs[k].clone()).collect()
    } else {
        pairs.to_vec()
    };
    let g = build_pair_graph(&chosen, curves, params.tau, params.anchor_tol);
    // A clique of m pairs lives in the (m - 1)-core, and a greedy clique
    // bounds the largest one from below, which fixes the relative floor.
    let min_size = params.min_cluster_size.max(1);
    let loose = g.induced(&k_core(&g, min_size - 1));
    let lower = clique_lower_bound(&loose, GREEDY_TRIES);
    let needed = min_size.max((params.min_relative_size * lower as f64).ceil() as usize);
    let core = k_core(&g, needed.saturating_sub(1));
    debug!(
        "pair graph: {} vertices, {} edges, greedy clique {}, {}-core of {}",
        g.vertex_count(),
        g.edge_count(),
        lower,
        needed.saturating_sub(1),
        core.len()
    );
    let sub = g.induced(&core);
    let cliques = extract_cliques(&sub, params.max_axes.saturating_mul(3));
    debug!("clique sizes {:?}", cliques.iter().map(Vec::len).collect::<Vec<_>>());
    let largest = cliques.iter().map(Vec::len).max().unwrap_or(0).max(lower);
    let floor = (min_size as f64).max(params.min_relative_size * largest as f64);
    let mut kept: Vec<(Vec<usize>, SymmetryAxis)> = Vec::new();
    for members in cliques {
        if kept.len() == params.max_axes {
            break;
        }
        if (members.len() as f64) < floor {
            continue;
        }
        let pts: Vec<(Vec2, Vec2)> = members
            .iter()
            .map(|&v| {
                let p = &chosen[core[v]];
                (Vec2::from_pixel(p.xi), Vec2::from_pixel(p.xj))
            })
            .collect();
        let Ok(axis) = axis_from_pairs(&pts) else { continue };
        let repeats = kept.iter().any(|(_, a)| {
            a.angle_between(&axis) <= params.duplicate_angle_deg && a.distance_to(axis.point) <= params.duplicate_dist
        });
        if !repeats {
            kept.push((members, axis));
        }
    }
    kept.into_iter()
        .enumerate()
        .map(|(id, (members, _))| PairCluster {
            id,
            pairs: members.into_iter().map(|v| chosen[core[v]].clone()).collect(),
        })
        .collect()
}
