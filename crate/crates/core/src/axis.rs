//! Symmetry axes from pair clusters and their evaluation.

use serde::{Deserialize, Serialize};

use crate::clustering::PairCluster;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::reflection::ReflectionTransform;

/// A line with a canonical unit direction: `y > 0`, or `x > 0` when
/// horizontal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryAxis {
    pub point: Vec2,
    pub direction: Vec2,
    pub support: usize,
}

fn canonical(d: Vec2) -> Vec2 {
    if d.y < 0.0 || (d.y == 0.0 && d.x < 0.0) {
        Vec2::new(-d.x, -d.y)
    } else {
        d
    }
}

impl SymmetryAxis {
    pub fn new(point: Vec2, direction: Vec2, support: usize) -> Result<Self> {
        let d = direction
            .normalized()
            .ok_or_else(|| Error::InvalidParameter("axis direction must be non-zero".into()))?;
        Ok(SymmetryAxis {
            point,
            direction: canonical(d),
            support,
        })
    }

    /// Axis through `point` at `degrees` from the x axis (y pointing down).
    pub fn from_angle(point: Vec2, degrees: f64, support: usize) -> Self {
        let r = degrees.to_radians();
        SymmetryAxis {
            point,
            direction: canonical(Vec2::new(r.cos(), r.sin())),
            support,
        }
    }

    /// Direction angle in `[0, 180)` degrees.
    pub fn angle_degrees(&self) -> f64 {
        let a = self.direction.y.atan2(self.direction.x).to_degrees();
        if a >= 180.0 {
            a - 180.0
        } else {
            a
        }
    }

    pub fn distance_to(&self, p: Vec2) -> f64 {
        self.direction.cross(p - self.point).abs()
    }

    /// Unsigned angle between the two lines, in `[0, 90]` degrees.
    pub fn angle_between(&self, other: &SymmetryAxis) -> f64 {
        let d = (self.angle_degrees() - other.angle_degrees()).abs() % 180.0;
        d.min(180.0 - d)
    }

    pub fn transform(&self) -> ReflectionTransform {
        ReflectionTransform::from_axis(self.point, self.direction.y.atan2(self.direction.x))
    }
}

/// Serialized form `{point: [x, y], angle_degrees, support}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRecord {
    pub point: [f64; 2],
    pub angle_degrees: f64,
    pub support: usize,
}

impl From<&SymmetryAxis> for AxisRecord {
    fn from(a: &SymmetryAxis) -> Self {
        AxisRecord {
            point: a.point.as_array(),
            angle_degrees: a.angle_degrees(),
            support: a.support,
        }
    }
}

impl From<&AxisRecord> for SymmetryAxis {
    fn from(r: &AxisRecord) -> Self {
        SymmetryAxis::from_angle(Vec2::new(r.point[0], r.point[1]), r.angle_degrees, r.support)
    }
}

/// Average axis of mirror pairs: through the mean midpoint, perpendicular
/// to the summed endpoint differences.
///
/// Differences are first given a common sign, taken from the principal
/// direction of their scatter, so the sum does not depend on endpoint order.
pub fn axis_from_pairs(pairs: &[(Vec2, Vec2)]) -> Result<SymmetryAxis> {
    if pairs.is_empty() {
        return Err(Error::DegenerateCluster);
    }
    let n = pairs.len() as f64;
    let mid = pairs.iter().fold(Vec2::ZERO, |acc, &(a, b)| acc + (a + b) * 0.5) * (1.0 / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(a, b) in pairs {
        let d = a - b;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    // Principal eigenvector of [[sxx, sxy], [sxy, syy]].
    let phi = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let e = Vec2::new(phi.cos(), phi.sin());
    let sum = pairs.iter().fold(Vec2::ZERO, |acc, &(a, b)| {
        let d = a - b;
        if d.dot(e) >= 0.0 {
            acc + d
        } else {
            acc - d
        }
    });
    let normal = sum.normalized().ok_or(Error::DegenerateCluster)?;
    SymmetryAxis::new(mid, normal.perp(), pairs.len())
}

pub fn axis_from_cluster(cluster: &PairCluster) -> Result<SymmetryAxis> {
    let pts: Vec<(Vec2, Vec2)> = cluster
        .pairs
        .iter()
        .map(|p| (Vec2::from_pixel(p.xi), Vec2::from_pixel(p.xj)))
        .collect();
    axis_from_pairs(&pts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MatchCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

/// Greedy one-to-one matching in detection order; each detection takes the
/// unmatched truth axis with the smallest angle difference among those
/// within both tolerances.
pub fn match_axes(detected: &[SymmetryAxis], truth: &[SymmetryAxis], angle_tol: f64, dist_tol: f64) -> MatchCounts {
    let mut used = vec![false; truth.len()];
    let mut tp = 0;
    for d in detected {
        let best = truth
            .iter()
            .enumerate()
            .filter(|&(k, t)| !used[k] && d.angle_between(t) <= angle_tol && t.distance_to(d.point) <= dist_tol)
            .min_by(|a, b| d.angle_between(a.1).total_cmp(&d.angle_between(b.1)));
        if let Some((k, _)) = best {
            used[k] = true;
            tp += 1;
        }
    }
    MatchCounts {
        tp,
        fp: detected.len() - tp,
        fn_: truth.len() - tp,
    }
}

pub fn f_score(tp: usize, fp: usize, fn_: usize) -> Result<f64> {
    if tp + fp + fn_ == 0 {
        return Err(Error::EmptyCounts);
    }
    Ok(2.0 * tp as f64 / (2 * tp + fp + fn_) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal, Uniform};

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    #[test]
    fn two_pair_axis() {
        let a = axis_from_pairs(&[(v(0.0, 0.0), v(2.0, 0.0)), (v(0.0, 2.0), v(2.0, 2.0))]).unwrap();
        assert!((a.point.x - 1.0).abs() < 1e-12 && (a.point.y - 1.0).abs() < 1e-12);
        assert!((a.direction.x).abs() < 1e-12 && (a.direction.y - 1.0).abs() < 1e-12);
        assert_eq!(a.support, 2);
    }

    #[test]
    fn single_pair_bisector() {
        let a = axis_from_pairs(&[(v(1.0, 1.0), v(5.0, 5.0))]).unwrap();
        assert!(a.distance_to(v(3.0, 3.0)) < 1e-12);
        assert!((a.angle_degrees() - 135.0).abs() < 1e-9);
        let t = a.transform();
        assert!(t.reflect_point(v(1.0, 1.0)).distance(v(5.0, 5.0)) < 1e-9);
    }

    #[test]
    fn order_and_swap_invariance() {
        let mut pairs = vec![
            (v(10.0, 3.0), v(20.0, 4.0)),
            (v(21.0, 9.0), v(11.0, 8.0)),
            (v(5.0, 14.0), v(26.0, 15.0)),
        ];
        let a = axis_from_pairs(&pairs).unwrap();
        pairs.reverse();
        let b = axis_from_pairs(&pairs).unwrap();
        let swapped: Vec<_> = pairs.iter().map(|&(p, q)| (q, p)).collect();
        let c = axis_from_pairs(&swapped).unwrap();
        for o in [b, c] {
            assert!(a.point.distance(o.point) < 1e-12);
            assert!(a.direction.distance(o.direction) < 1e-12);
        }
    }

    #[test]
    fn noisy_pairs_recover_axis() {
        let truth = SymmetryAxis::from_angle(v(64.0, 64.0), 70.0, 0);
        let t = truth.transform();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pos = Uniform::new(10.0, 118.0).unwrap();
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut pairs = Vec::new();
        while pairs.len() < 100 {
            let a = v(pos.sample(&mut rng), pos.sample(&mut rng));
            if truth.distance_to(a) < 10.0 {
                continue;
            }
            let b = t.reflect_point(a);
            let jitter = |p: Vec2, rng: &mut ChaCha8Rng| v(p.x + noise.sample(rng), p.y + noise.sample(rng));
            pairs.push((jitter(a, &mut rng), jitter(b, &mut rng)));
        }
        let est = axis_from_pairs(&pairs).unwrap();
        assert!(est.angle_between(&truth) < 1.0);
        assert!(truth.distance_to(est.point) < 1.0);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(axis_from_pairs(&[]), Err(Error::DegenerateCluster)));
        assert!(matches!(axis_from_pairs(&[(v(1.0, 1.0), v(1.0, 1.0))]), Err(Error::DegenerateCluster)));
    }

    #[test]
    fn matching_counts() {
        let a = SymmetryAxis::from_angle(v(50.0, 50.0), 90.0, 1);
        let b = SymmetryAxis::from_angle(v(10.0, 30.0), 0.0, 1);
        assert_eq!(match_axes(&[a, b], &[a, b], 10.0, 20.0), MatchCounts { tp: 2, fp: 0, fn_: 0 });
        assert_eq!(match_axes(&[], &[a, b], 10.0, 20.0), MatchCounts { tp: 0, fp: 0, fn_: 2 });
        let near_a = SymmetryAxis::from_angle(v(55.0, 10.0), 95.0, 1);
        assert_eq!(match_axes(&[near_a], &[a, b], 10.0, 20.0), MatchCounts { tp: 1, fp: 0, fn_: 1 });
        let far = SymmetryAxis::from_angle(v(90.0, 50.0), 90.0, 1);
        assert_eq!(match_axes(&[far], &[a], 10.0, 20.0), MatchCounts { tp: 0, fp: 1, fn_: 1 });
    }

    #[test]
    fn near_horizontal_angles_wrap() {
        let a = SymmetryAxis::from_angle(v(0.0, 0.0), 179.0, 0);
        let b = SymmetryAxis::from_angle(v(0.0, 0.0), 1.0, 0);
        assert!((a.angle_between(&b) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn f_score_values() {
        assert_eq!(f_score(1, 0, 0).unwrap(), 1.0);
        assert!((f_score(2, 1, 1).unwrap() - 4.0 / 6.0).abs() < 1e-15);
        assert!(matches!(f_score(0, 0, 0), Err(Error::EmptyCounts)));
    }

    #[test]
    fn record_round_trip() {
        let a = SymmetryAxis::from_angle(v(3.0, 4.0), 30.0, 7);
        let r = AxisRecord::from(&a);
        let json = serde_json::to_string(&r).unwrap();
        let back: AxisRecord = serde_json::from_str(&json).unwrap();
        let b = SymmetryAxis::from(&back);
        assert!(a.direction.distance(b.direction) < 1e-12);
        assert_eq!(b.support, 7);
    }
}
