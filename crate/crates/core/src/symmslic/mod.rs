//! Symmetry-preserving SLIC superpixels.
//!
//! Paired centers sit at mirror positions. Every pixel one of them wins
//! drags its reflection along to the partner, so paired superpixels stay
//! mirror images of each other while the centers move.

mod assign;
mod connectivity;
mod init;

pub use assign::{assign_iteration, slic_distance, update_centers, AssignStats, AssignmentState, CenterUpdate};
pub use connectivity::{enforce_connectivity, enforce_connectivity_paired};
pub use init::{grid_layout, relocate_pair, superpixel_budget, symmetric_init, Budget, GridLayout, InitOptions};

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::clustering::{cluster_pairs, split_lr, ClusterParams, MirrorSplit, PairCluster};
use crate::error::{Error, Result};
use crate::geometry::{Pixel, Vec2};
use crate::image::RasterImage;
use crate::pairs::{detect_pairs, PairDetection, PairParams};
use crate::reflection::ReflectionTransform;

/// A superpixel center.
#[derive(Debug, Clone, PartialEq)]
pub struct Center {
    pub position: Vec2,
    pub color: [f64; 3],
    pub partner: Option<usize>,
}

/// All centers; the partner relation is a symmetric involution without
/// fixed points.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CenterSet {
    centers: Vec<Center>,
}

impl CenterSet {
    pub fn new(centers: Vec<Center>) -> Result<Self> {
        for (i, c) in centers.iter().enumerate() {
            if let Some(j) = c.partner {
                if j == i || centers.get(j).and_then(|o| o.partner) != Some(i) {
                    return Err(Error::InvalidParameter(format!("center {i} has a broken partner link")));
                }
            }
        }
        Ok(CenterSet { centers })
    }

    /// Unpaired centers at the given positions.
    pub fn unpaired(img: &RasterImage, positions: &[Vec2]) -> Self {
        CenterSet {
            centers: positions
                .iter()
                .map(|&p| Center {
                    position: p,
                    color: img.sample_nearest(p),
                    partner: None,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn get(&self, i: usize) -> &Center {
        &self.centers[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Center> {
        self.centers.iter()
    }

    pub fn partner(&self, i: usize) -> Option<usize> {
        self.centers[i].partner
    }

    /// Pairs `(a, b)` with `a < b`, ascending.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.centers
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.partner.filter(|&j| j > i).map(|j| (i, j)))
            .collect()
    }

    /// Reflection swapping the two centers of a pair.
    pub fn transform(&self, a: usize) -> Option<ReflectionTransform> {
        let b = self.partner(a)?;
        ReflectionTransform::from_pair(self.centers[a].position, self.centers[b].position).ok()
    }

    /// Unlinks `a` and its partner.
    pub fn demote(&mut self, a: usize) {
        if let Some(b) = self.centers[a].partner.take() {
            self.centers[b].partner = None;
        }
    }

    pub(crate) fn set_position(&mut self, i: usize, p: Vec2, color: [f64; 3]) {
        self.centers[i].position = p;
        self.centers[i].color = color;
    }
}

/// Final superpixel ids, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension {
                width: width as u32,
                height: height as u32,
            });
        }
        if labels.len() != width * height {
            return Err(Error::DimensionMismatch((width, height), (labels.len(), 1)));
        }
        Ok(LabelMap { width, height, labels })
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

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn at(&self, p: Pixel) -> u32 {
        self.labels[p.index(self.width)]
    }

    /// One more than the largest id.
    pub fn label_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m as usize + 1)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.label_count()];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }
}

/// A mirror-symmetric superpixel pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperpixelPair {
    pub i: u32,
    pub j: u32,
    pub theta: f64,
    pub t: [f64; 2],
}

impl SuperpixelPair {
    pub fn new(i: u32, j: u32, transform: &ReflectionTransform) -> Self {
        SuperpixelPair {
            i,
            j,
            theta: transform.theta(),
            t: transform.midpoint().as_array(),
        }
    }

    pub fn transform(&self) -> ReflectionTransform {
        ReflectionTransform::from_axis(Vec2::new(self.t[0], self.t[1]), self.theta)
    }
}

/// Which superpixels are mirror images of each other.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuperpixelPairing {
    pub pairs: Vec<SuperpixelPair>,
    /// Pairs (by center index) demoted during the run.
    pub demoted: Vec<(usize, usize)>,
}

impl SuperpixelPairing {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Labels taking part in a pair.
    pub fn paired_labels(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.pairs.iter().flat_map(|p| [p.i, p.j]).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmSlicParams {
    pub k: usize,
    /// Weight of the squared Lab distance against the squared pixel distance.
    pub lambda: f64,
    pub max_iters: usize,
    /// Stop once the mean center displacement drops below this, in pixels.
    pub conv_tol: f64,
    pub seed: u64,
    /// Pairs whose superpixels' mean Lab colours end further apart than
    /// this are demoted.
    pub appearance_tol: f64,
    pub pairs: PairParams,
    pub clusters: ClusterParams,
    pub init: InitOptions,
}

impl Default for SymmSlicParams {
    fn default() -> Self {
        SymmSlicParams {
            k: 500,
            lambda: 10.0,
            max_iters: 15,
            conv_tol: 0.25,
            seed: 42,
            appearance_tol: 2.3,
            pairs: PairParams::default(),
            clusters: ClusterParams::default(),
            init: InitOptions::default(),
        }
    }
}

impl SymmSlicParams {
    pub fn validate(&self) -> Result<()> {
        if self.k < 4 {
            return Err(Error::TooFewSuperpixels(self.k));
        }
        if !(1.0..=40.0).contains(&self.lambda) {
            return Err(Error::InvalidParameter(format!("lambda must lie in [1, 40], got {}", self.lambda)));
        }
        if self.appearance_tol < 0.0 || self.appearance_tol.is_nan() {
            return Err(Error::InvalidParameter("appearance_tol must be non-negative".into()));
        }
        if self.conv_tol < 0.0 || self.conv_tol.is_nan() {
            return Err(Error::InvalidParameter("conv_tol must be non-negative".into()));
        }
        Ok(())
    }
}

/// Per-iteration measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub paired: usize,
    /// Pairs checked for the center reflection identity (no dropped pixels).
    pub checked_pairs: usize,
    /// Pairs skipped because some reflection left the image.
    pub pairs_with_drops: usize,
    /// Largest `|c_b - T(c_a)|` over checked pairs, `T` from before the update.
    pub max_center_residual: f64,
    /// Checked pairs whose superpixels differ in size.
    pub size_mismatches: usize,
    /// Sum of assigned distances.
    pub objective: f64,
    pub mean_displacement: f64,
    pub demoted: usize,
}

#[derive(Debug, Clone)]
pub struct SymmSlicOutput {
    pub labels: LabelMap,
    pub pairing: SuperpixelPairing,
    pub centers: CenterSet,
    pub trace: Vec<IterationRecord>,
}

/// Everything the full pipeline produced, stage by stage.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub detection: PairDetection,
    pub clusters: Vec<PairCluster>,
    pub split: MirrorSplit,
    pub superpixels: SymmSlicOutput,
}

/// Pair detection, clustering and superpixels on an RGB image.
pub fn run_symmslic(img: &RasterImage, params: &SymmSlicParams) -> Result<PipelineOutput> {
    params.validate()?;
    let detection = detect_pairs(img, &params.pairs)?;
    let clusters = cluster_pairs(&detection.pairs, &detection.curves, &params.clusters);
    let split = split_lr(&clusters);
    info!(
        "{} pairs detected, {} clusters, {} clustered pairs",
        detection.pairs.len(),
        clusters.len(),
        split.len()
    );
    let superpixels = symmslic_with_pairs(&img.to_lab(), &split, params)?;
    Ok(PipelineOutput {
        detection,
        clusters,
        split,
        superpixels,
    })
}

/// Superpixels of a Lab image for already known mirror pairs.
pub fn symmslic_with_pairs(lab: &RasterImage, split: &MirrorSplit, params: &SymmSlicParams) -> Result<SymmSlicOutput> {
    params.validate()?;
    let (w, h) = lab.dims();
    let (mut centers, layout) = symmetric_init(lab, split, params.k, params.seed, &params.init)?;
    let step = layout.step;
    let mut demoted = Vec::new();
    let mut trace = Vec::new();
    let mut state = AssignmentState::new(w, h);
    let mut active = Vec::new();

    for it in 0..params.max_iters {
        state.reset();
        let stats = assign_iteration(&mut state, &centers, lab, step, params.lambda);
        active = stats.pairs.iter().map(|p| (p.a, p.b, p.transform)).collect();
        let update = update_centers(&state, &mut centers, lab);

        let mut rec = IterationRecord {
            paired: stats.pairs.len(),
            checked_pairs: 0,
            pairs_with_drops: 0,
            max_center_residual: 0.0,
            size_mismatches: 0,
            objective: stats.objective,
            mean_displacement: update.mean_displacement,
            demoted: 0,
        };
        for pair in &stats.pairs {
            if pair.drops_a + pair.drops_b > 0 {
                rec.pairs_with_drops += 1;
                continue;
            }
            rec.checked_pairs += 1;
            let ca = centers.get(pair.a).position;
            let cb = centers.get(pair.b).position;
            let residual = pair.transform.reflect_point(ca).distance(cb);
            rec.max_center_residual = rec.max_center_residual.max(residual);
            if update.sizes[pair.a] != update.sizes[pair.b] {
                rec.size_mismatches += 1;
            }
        }
        for pair in &stats.pairs {
            let frac = |drops: usize, size: usize| if size == 0 { 1.0 } else { drops as f64 / size as f64 };
            let coincide = centers.get(pair.a).position == centers.get(pair.b).position;
            if coincide
                || frac(pair.drops_a, update.sizes[pair.a]) > 0.2
                || frac(pair.drops_b, update.sizes[pair.b]) > 0.2
            {
                centers.demote(pair.a);
                demoted.push((pair.a, pair.b));
                rec.demoted += 1;
            }
        }
        debug!("iteration {it}: {rec:?}");
        let converged = update.mean_displacement < params.conv_tol;
        trace.push(rec);
        if converged {
            break;
        }
    }
    if params.max_iters == 0 {
        let stats = assign_iteration(&mut state, &centers, lab, step, params.lambda);
        active = stats.pairs.iter().map(|p| (p.a, p.b, p.transform)).collect();
    }
    for &(a, b, _) in &active {
        if centers.partner(a) != Some(b) {
            continue;
        }
        let (ca, cb) = (centers.get(a).color, centers.get(b).color);
        let diff = (0..3).map(|c| (ca[c] - cb[c]).powi(2)).sum::<f64>().sqrt();
        if diff > params.appearance_tol {
            centers.demote(a);
            demoted.push((a, b));
        }
    }
    // Pairs demoted in the last iteration keep their links but lose the pairing.
    active.retain(|&(a, b, _)| centers.partner(a) == Some(b));

    let (labels, pairing) = enforce_connectivity_paired(&state, &active, params.k);
    let mut pairing = pairing;
    pairing.demoted.splice(0..0, demoted);
    Ok(SymmSlicOutput {
        labels,
        pairing,
        centers,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::ColorSpace;

    #[test]
    fn partner_links_validated() {
        let c = |partner| Center {
            position: Vec2::ZERO,
            color: [0.0; 3],
            partner,
        };
        assert!(CenterSet::new(vec![c(Some(1)), c(Some(0)), c(None)]).is_ok());
        assert!(CenterSet::new(vec![c(Some(1)), c(None)]).is_err());
        assert!(CenterSet::new(vec![c(Some(0))]).is_err());
        let mut set = CenterSet::new(vec![c(Some(1)), c(Some(0))]).unwrap();
        assert_eq!(set.pairs(), vec![(0, 1)]);
        set.demote(1);
        assert!(set.pairs().is_empty());
    }

    #[test]
    fn params_checked() {
        let mut p = SymmSlicParams::default();
        p.k = 3;
        assert!(matches!(p.validate(), Err(Error::TooFewSuperpixels(3))));
        p.k = 100;
        p.lambda = 0.5;
        assert!(p.validate().is_err());
    }

    #[test]
    fn blank_image_gives_grid_superpixels() {
        let img = RasterImage::filled(100, 100, ColorSpace::Rgb, [128.0; 3]).unwrap();
        let params = SymmSlicParams {
            k: 100,
            ..Default::default()
        };
        let out = run_symmslic(&img, &params).unwrap();
        assert!(out.detection.pairs.is_empty());
        let sp = &out.superpixels;
        assert!(sp.pairing.is_empty());
        let sizes: Vec<usize> = sp.labels.sizes().into_iter().filter(|&s| s > 0).collect();
        assert_eq!(sizes.len(), 100);
        assert!(sizes.iter().all(|&s| s == 100), "{sizes:?}");
    }
}
