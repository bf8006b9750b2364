//! Exact projection, distance and ray-intersection primitives for the set
//! family, plus the hull diameter `xi` used by the boundedness bound.
//!
//! The supported shapes all have closed-form projections and ray hits: balls,
//! axis-aligned boxes, and half-spaces intersected with a bounding ball (the
//! bounding ball keeps every set bounded, which the dynamics require).

use crate::vecmath::{add_scaled, distance, dot, norm, sub};
use crate::{Error, Result};

/// Absolute tolerance for geometric comparisons.
pub const GEOM_TOL: f64 = 1e-12;

/// A closed, bounded convex set with nonempty interior.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    AxisBox {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    /// `{ x : <normal, x> <= offset }` intersected with the bounding ball
    /// `B(bound_center, bound_radius)`; `normal` is unit length.
    HalfSpace {
        normal: Vec<f64>,
        offset: f64,
        bound_center: Vec<f64>,
        bound_radius: f64,
    },
}

impl ConvexSet {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        if center.is_empty() || !center.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidConfig("ball center must be finite".into()));
        }
        Ok(ConvexSet::Ball { center, radius })
    }

    pub fn axis_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidConfig(
                "box corners must share a nonzero dimension".into(),
            ));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !(l < u) || !l.is_finite() || !u.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "box requires lower < upper componentwise, got {l} >= {u}"
                )));
            }
        }
        Ok(ConvexSet::AxisBox { lower, upper })
    }

    pub fn half_space(
        normal: Vec<f64>,
        offset: f64,
        bound_center: Vec<f64>,
        bound_radius: f64,
    ) -> Result<Self> {
        if normal.len() != bound_center.len() || normal.is_empty() {
            return Err(Error::InvalidConfig(
                "half-space normal and bound center must share a nonzero dimension".into(),
            ));
        }
        let n = norm(&normal);
        if n < GEOM_TOL {
            return Err(Error::InvalidConfig("half-space normal must be nonzero".into()));
        }
        if !(bound_radius > 0.0) {
            return Err(Error::InvalidConfig("bounding radius must be positive".into()));
        }
        let normal: Vec<f64> = normal.iter().map(|x| x / n).collect();
        let offset = offset / n;
        // Nonempty interior: the plane must not cut the whole ball away.
        let gap = offset - dot(&normal, &bound_center);
        if gap <= -bound_radius {
            return Err(Error::InvalidConfig(
                "half-space excludes its entire bounding ball".into(),
            ));
        }
        Ok(ConvexSet::HalfSpace {
            normal,
            offset,
            bound_center,
            bound_radius,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Ball { center, .. } => center.len(),
            ConvexSet::AxisBox { lower, .. } => lower.len(),
            ConvexSet::HalfSpace { normal, .. } => normal.len(),
        }
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        match self {
            ConvexSet::Ball { center, radius } => distance(v, center) <= *radius,
            ConvexSet::AxisBox { lower, upper } => v
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(x, (l, u))| *l <= *x && *x <= *u),
            ConvexSet::HalfSpace {
                normal,
                offset,
                bound_center,
                bound_radius,
            } => dot(normal, v) <= *offset && distance(v, bound_center) <= *bound_radius,
        }
    }

    /// Exact projection onto the set. Returns `v` unchanged when `v` is a
    /// member.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(v)?;
        if self.contains(v) {
            return Ok(v.to_vec());
        }
        Ok(match self {
            ConvexSet::Ball { center, radius } => {
                let d = distance(v, center);
                add_scaled(center, radius / d, &sub(v, center))
            }
            ConvexSet::AxisBox { lower, upper } => v
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(x, (l, u))| x.clamp(*l, *u))
                .collect(),
            ConvexSet::HalfSpace {
                normal,
                offset,
                bound_center,
                bound_radius,
            } => {
                // Project onto each piece; if the single-piece projection is
                // feasible for the other piece it is the projection onto the
                // intersection. Otherwise the projection lies on the rim
                // where the plane cuts the sphere.
                let d = distance(v, bound_center);
                let on_ball = if d > *bound_radius {
                    add_scaled(bound_center, bound_radius / d, &sub(v, bound_center))
                } else {
                    v.to_vec()
                };
                if dot(normal, &on_ball) <= *offset + GEOM_TOL {
                    return Ok(on_ball);
                }
                let excess = dot(normal, v) - offset;
                let on_plane = add_scaled(v, -excess, normal);
                if distance(&on_plane, bound_center) <= *bound_radius + GEOM_TOL {
                    return Ok(on_plane);
                }
                let gap = offset - dot(normal, bound_center);
                let rim_center = add_scaled(bound_center, gap, normal);
                let rim_radius = (bound_radius * bound_radius - gap * gap).max(0.0).sqrt();
                let w = sub(&on_plane, &rim_center);
                let wn = norm(&w);
                if wn < GEOM_TOL {
                    // v sits on the rim axis; any rim point is nearest. Pick a
                    // deterministic tangent direction.
                    let t = tangent_direction(normal);
                    add_scaled(&rim_center, rim_radius, &t)
                } else {
                    add_scaled(&rim_center, rim_radius / wn, &w)
                }
            }
        })
    }

    /// Distance `|v|_K = |v - P_K(v)|`; zero iff `v` is a member.
    pub fn distance_to(&self, v: &[f64]) -> Result<f64> {
        self.check_dim(v)?;
        Ok(match self {
            ConvexSet::Ball { center, radius } => (distance(v, center) - radius).max(0.0),
            ConvexSet::AxisBox { lower, upper } => v
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(x, (l, u))| {
                    let e = (l - x).max(0.0).max(x - u);
                    e * e
                })
                .sum::<f64>()
                .sqrt(),
            ConvexSet::HalfSpace { .. } => distance(v, &self.project(v)?),
        })
    }

    /// The half-open parameter interval `[t0, t1]` for which `origin + t dir`
    /// lies inside the set, or `None` when the line misses it.
    fn ray_interval(&self, origin: &[f64], dir: &[f64]) -> Option<(f64, f64)> {
        match self {
            ConvexSet::Ball { center, radius } => {
                ball_interval(origin, dir, center, *radius)
            }
            ConvexSet::AxisBox { lower, upper } => {
                let mut t0 = f64::NEG_INFINITY;
                let mut t1 = f64::INFINITY;
                for k in 0..lower.len() {
                    if dir[k].abs() < 1e-300 {
                        if origin[k] < lower[k] || origin[k] > upper[k] {
                            return None;
                        }
                    } else {
                        let a = (lower[k] - origin[k]) / dir[k];
                        let b = (upper[k] - origin[k]) / dir[k];
                        t0 = t0.max(a.min(b));
                        t1 = t1.min(a.max(b));
                    }
                }
                (t0 <= t1).then_some((t0, t1))
            }
            ConvexSet::HalfSpace {
                normal,
                offset,
                bound_center,
                bound_radius,
            } => {
                let (mut t0, mut t1) = ball_interval(origin, dir, bound_center, *bound_radius)?;
                let nd = dot(normal, dir);
                let slack = offset - dot(normal, origin);
                if nd.abs() < 1e-300 {
                    if slack < 0.0 {
                        return None;
                    }
                } else {
                    let s = slack / nd;
                    if nd > 0.0 {
                        t1 = t1.min(s);
                    } else {
                        t0 = t0.max(s);
                    }
                }
                (t0 <= t1).then_some((t0, t1))
            }
        }
    }

    /// First intersection of the ray `origin + t dir`, `t > 0`, with the set
    /// boundary, for `origin` outside the set. The returned point `z`
    /// satisfies `[origin, z] ∩ bd(set) = {z}`.
    pub fn ray_boundary_hit(&self, origin: &[f64], dir: &[f64]) -> Result<Option<Vec<f64>>> {
        self.check_dim(origin)?;
        self.check_dim(dir)?;
        if self.contains(origin) {
            return Err(Error::OriginInsideSet);
        }
        match self.ray_interval(origin, dir) {
            Some((t0, t1)) if t1 >= t0 && t0 > 0.0 => Ok(Some(add_scaled(origin, t0, dir))),
            _ => Ok(None),
        }
    }
}

fn ball_interval(origin: &[f64], dir: &[f64], center: &[f64], radius: f64) -> Option<(f64, f64)> {
    let oc = sub(origin, center);
    let a = dot(dir, dir);
    let b = dot(&oc, dir);
    let c = dot(&oc, &oc) - radius * radius;
    let disc = b * b - a * c;
    if disc < 0.0 || a < 1e-300 {
        return None;
    }
    let sq = disc.sqrt();
    Some(((-b - sq) / a, (-b + sq) / a))
}

/// A deterministic unit vector orthogonal to `n` (|n| = 1, dim >= 2).
fn tangent_direction(n: &[f64]) -> Vec<f64> {
    let m = n.len();
    for k in 0..m {
        let mut e = vec![0.0; m];
        e[k] = 1.0;
        let w = add_scaled(&e, -n[k], n);
        let wn = norm(&w);
        if wn > 1e-8 {
            return w.iter().map(|x| x / wn).collect();
        }
    }
    unreachable!("no direction orthogonal to a unit vector in dimension >= 2");
}

/// An ordered family of convex sets sharing one ambient dimension.
#[derive(Debug, Clone)]
pub struct SetFamily {
    sets: Vec<ConvexSet>,
    dim: usize,
}

/// Result of [`SetFamily::hull_diameter`]: `exact` is false when the value is
/// only a certified upper bound (half-space variants are replaced by their
/// bounding balls).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullDiameter {
    pub value: f64,
    pub exact: bool,
}

impl SetFamily {
    pub fn new(sets: Vec<ConvexSet>) -> Result<Self> {
        let dim = match sets.first() {
            Some(s) => s.dim(),
            None => return Err(Error::InvalidConfig("set family must be nonempty".into())),
        };
        if let Some(bad) = sets.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        Ok(SetFamily { sets, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructor rejects empty families
    }

    pub fn sets(&self) -> &[ConvexSet] {
        &self.sets
    }

    pub fn get(&self, i: usize) -> &ConvexSet {
        &self.sets[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ConvexSet> {
        self.sets.iter()
    }

    /// A point inside each set, used to seed iterative solvers.
    pub(crate) fn anchor(&self, i: usize) -> Vec<f64> {
        match &self.sets[i] {
            ConvexSet::Ball { center, .. } => center.clone(),
            ConvexSet::AxisBox { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| 0.5 * (l + u))
                .collect(),
            ConvexSet::HalfSpace { bound_center, .. } => self.sets[i]
                .project(bound_center)
                .expect("anchor projection cannot fail"),
        }
    }

    /// Diameter of the convex hull of all sets: exact for ball/box families,
    /// an upper bound when half-space variants are present.
    ///
    /// The hull diameter of balls and point clouds is attained at extreme
    /// points, so pairwise farthest-point formulas are exact.
    pub fn hull_diameter(&self) -> HullDiameter {
        enum Extremes {
            Ball(Vec<f64>, f64),
            Points(Vec<Vec<f64>>),
        }
        let mut exact = true;
        let parts: Vec<Extremes> = self
            .sets
            .iter()
            .map(|s| match s {
                ConvexSet::Ball { center, radius } => Extremes::Ball(center.clone(), *radius),
                ConvexSet::AxisBox { lower, upper } => Extremes::Points(box_corners(lower, upper)),
                ConvexSet::HalfSpace {
                    bound_center,
                    bound_radius,
                    ..
                } => {
                    exact = false;
                    Extremes::Ball(bound_center.clone(), *bound_radius)
                }
            })
            .collect();

        let mut best = 0.0_f64;
        for i in 0..parts.len() {
            for j in i..parts.len() {
                let d = match (&parts[i], &parts[j]) {
                    (Extremes::Ball(c1, r1), Extremes::Ball(c2, r2)) => {
                        distance(c1, c2) + r1 + r2
                    }
                    (Extremes::Ball(c, r), Extremes::Points(ps))
                    | (Extremes::Points(ps), Extremes::Ball(c, r)) => ps
                        .iter()
                        .map(|p| distance(p, c) + r)
                        .fold(0.0, f64::max),
                    (Extremes::Points(ps), Extremes::Points(qs)) => ps
                        .iter()
                        .flat_map(|p| qs.iter().map(move |q| distance(p, q)))
                        .fold(0.0, f64::max),
                };
                best = best.max(d);
            }
        }
        HullDiameter { value: best, exact }
    }

    /// Support point of the convex hull of the family in direction `dir`
    /// (maximizes `<dir, z>` over `X_c`). Used by the hull-distance oracle.
    pub fn hull_support(&self, dir: &[f64]) -> Vec<f64> {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for s in &self.sets {
            let p = support_point(s, dir);
            let val = dot(dir, &p);
            if best.as_ref().map_or(true, |(v, _)| val > *v) {
                best = Some((val, p));
            }
        }
        best.expect("nonempty family").1
    }
}

fn box_corners(lower: &[f64], upper: &[f64]) -> Vec<Vec<f64>> {
    let m = lower.len();
    (0..(1usize << m))
        .map(|mask| {
            (0..m)
                .map(|k| if mask >> k & 1 == 1 { upper[k] } else { lower[k] })
                .collect()
        })
        .collect()
}

/// Point of `set` maximizing `<dir, z>`.
fn support_point(set: &ConvexSet, dir: &[f64]) -> Vec<f64> {
    match set {
        ConvexSet::Ball { center, radius } => {
            let n = norm(dir);
            if n < GEOM_TOL {
                center.clone()
            } else {
                add_scaled(center, radius / n, dir)
            }
        }
        ConvexSet::AxisBox { lower, upper } => dir
            .iter()
            .zip(lower.iter().zip(upper))
            .map(|(d, (l, u))| if *d > 0.0 { *u } else { *l })
            .collect(),
        ConvexSet::HalfSpace {
            normal,
            offset,
            bound_center,
            bound_radius,
        } => {
            let n = norm(dir);
            if n < GEOM_TOL {
                return set.project(bound_center).expect("support projection");
            }
            let cap = add_scaled(bound_center, bound_radius / n, dir);
            if dot(normal, &cap) <= *offset {
                return cap;
            }
            let gap = offset - dot(normal, bound_center);
            let rim_center = add_scaled(bound_center, gap, normal);
            let rim_radius = (bound_radius * bound_radius - gap * gap).max(0.0).sqrt();
            let dp = add_scaled(dir, -dot(normal, dir), normal);
            let dpn = norm(&dp);
            if dpn < GEOM_TOL {
                add_scaled(&rim_center, rim_radius, &tangent_direction(normal))
            } else {
                add_scaled(&rim_center, rim_radius / dpn, &dp)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecmath::{distance, norm, sub};
    use approx::assert_abs_diff_eq;

    fn unit_ball() -> ConvexSet {
        ConvexSet::ball(vec![0.0, 0.0], 1.0).unwrap()
    }

    #[test]
    fn project_ball_colinear() {
        let p = unit_ball().project(&[2.0, 0.0]).unwrap();
        assert_eq!(p, vec![1.0, 0.0]);
    }

    #[test]
    fn project_box_clamps() {
        let b = ConvexSet::axis_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(b.project(&[2.0, 3.0]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn project_boundary_point_is_identity() {
        let b = ConvexSet::ball(vec![0.0, 0.0], 5.0).unwrap();
        assert_eq!(b.project(&[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
    }

    #[test]
    fn project_dimension_mismatch() {
        assert!(matches!(
            unit_ball().project(&[1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn distance_examples() {
        assert_abs_diff_eq!(unit_ball().distance_to(&[2.0, 0.0]).unwrap(), 1.0);
        assert_eq!(unit_ball().distance_to(&[0.3, 0.2]).unwrap(), 0.0);
        // |(sqrt3, -1)| = 2, minus radius 1
        let b = ConvexSet::ball(vec![-(3.0f64.sqrt()), 0.0], 1.0).unwrap();
        assert_abs_diff_eq!(b.distance_to(&[0.0, -1.0]).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ray_hit_head_on() {
        let z = unit_ball()
            .ray_boundary_hit(&[2.0, 0.0], &[-1.0, 0.0])
            .unwrap()
            .unwrap();
        assert_abs_diff_eq!(z[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn ray_misses() {
        let hit = unit_ball()
            .ray_boundary_hit(&[2.0, 0.0], &[0.0, 1.0])
            .unwrap();
        assert!(hit.is_none());
    }

    #[test]
    fn ray_origin_inside_is_error() {
        assert!(matches!(
            unit_ball().ray_boundary_hit(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::OriginInsideSet)
        ));
    }

    #[test]
    fn ray_rotated_matches_quadratic_root() {
        // Independent oracle: smaller positive root of |o + t d - c|^2 = r^2.
        let phi = 20.0_f64.to_radians();
        let o = [2.0, 0.0];
        let d = [-phi.cos(), phi.sin()];
        let a = 1.0;
        let b = o[0] * d[0] + o[1] * d[1];
        let c = o[0] * o[0] + o[1] * o[1] - 1.0;
        let t = (-b - (b * b - a * c).sqrt()) / a;
        let expect = [o[0] + t * d[0], o[1] + t * d[1]];

        let z = unit_ball().ray_boundary_hit(&o, &d).unwrap().unwrap();
        assert_abs_diff_eq!(z[0], expect[0], epsilon = 1e-12);
        assert_abs_diff_eq!(z[1], expect[1], epsilon = 1e-12);
    }

    #[test]
    fn halfspace_projection_cases() {
        // Right half of the unit disc removed: {x <= 0} within B(0, 2).
        let hs = ConvexSet::half_space(vec![1.0, 0.0], 0.0, vec![0.0, 0.0], 2.0).unwrap();
        // Plane-only case.
        let p = hs.project(&[1.0, 0.5]).unwrap();
        assert_abs_diff_eq!(p[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 0.5, epsilon = 1e-12);
        // Ball-only case.
        let p = hs.project(&[-5.0, 0.0]).unwrap();
        assert_abs_diff_eq!(p[0], -2.0, epsilon = 1e-12);
        // Rim case: nearest point is on the circle x^2 + y^2 = 4, x = 0.
        let p = hs.project(&[1.0, 5.0]).unwrap();
        assert_abs_diff_eq!(p[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 2.0, epsilon = 1e-12);
        assert_eq!(hs.distance_to(&[-0.5, 0.5]).unwrap(), 0.0);
    }

    #[test]
    fn hull_diameter_single_ball() {
        let f = SetFamily::new(vec![unit_ball()]).unwrap();
        let d = f.hull_diameter();
        assert_eq!(d.value, 2.0);
        assert!(d.exact);
    }

    #[test]
    fn hull_diameter_three_unit_balls() {
        let s3 = 3.0f64.sqrt();
        let f = SetFamily::new(vec![
            ConvexSet::ball(vec![-s3, 0.0], 1.0).unwrap(),
            ConvexSet::ball(vec![s3, 0.0], 1.0).unwrap(),
            ConvexSet::ball(vec![0.0, -3.0], 1.0).unwrap(),
        ])
        .unwrap();
        let d = f.hull_diameter();
        assert_abs_diff_eq!(d.value, 2.0 * s3 + 2.0, epsilon = 1e-12);
        assert!(d.exact);

        // Coarse sampling oracle: boundary points of the three balls.
        let mut sampled = 0.0_f64;
        let centers = [[-s3, 0.0], [s3, 0.0], [0.0, -3.0]];
        let pts: Vec<[f64; 2]> = centers
            .iter()
            .flat_map(|c| {
                (0..720).map(move |k| {
                    let a = k as f64 * std::f64::consts::TAU / 720.0;
                    [c[0] + a.cos(), c[1] + a.sin()]
                })
            })
            .collect();
        for p in &pts {
            for q in &pts {
                sampled = sampled.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
            }
        }
        assert!((d.value - sampled).abs() < 1e-4);
    }

    #[test]
    fn hull_diameter_two_identical_sets() {
        let f = SetFamily::new(vec![unit_ball(), unit_ball()]).unwrap();
        assert_eq!(f.hull_diameter().value, 2.0);
    }

    #[test]
    fn hull_diameter_halfspace_is_upper_bound() {
        let hs = ConvexSet::half_space(vec![1.0, 0.0], 0.0, vec![0.0, 0.0], 2.0).unwrap();
        let f = SetFamily::new(vec![hs]).unwrap();
        let d = f.hull_diameter();
        assert!(!d.exact);
        assert!(d.value >= 4.0 - 1e-12);
    }

    #[test]
    fn invalid_sets_rejected() {
        assert!(ConvexSet::ball(vec![0.0], -1.0).is_err());
        assert!(ConvexSet::axis_box(vec![1.0], vec![1.0]).is_err());
        assert!(ConvexSet::half_space(vec![1.0, 0.0], -5.0, vec![0.0, 0.0], 2.0).is_err());
    }

    #[test]
    fn family_requires_matching_dims() {
        let err = SetFamily::new(vec![
            unit_ball(),
            ConvexSet::ball(vec![0.0, 0.0, 0.0], 1.0).unwrap(),
        ]);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn support_points_match_direction() {
        let b = ConvexSet::ball(vec![1.0, 2.0], 3.0).unwrap();
        let s = support_point(&b, &[0.0, -2.0]);
        assert_abs_diff_eq!(s[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[1], -1.0, epsilon = 1e-12);

        let bx = ConvexSet::axis_box(vec![-1.0, -2.0], vec![3.0, 4.0]).unwrap();
        assert_eq!(support_point(&bx, &[1.0, -1.0]), vec![3.0, -2.0]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_point() -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(-10.0..10.0f64, 2)
        }

        fn arb_set() -> impl Strategy<Value = ConvexSet> {
            prop_oneof![
                (arb_point(), 0.1..5.0f64)
                    .prop_map(|(c, r)| ConvexSet::ball(c, r).unwrap()),
                (arb_point(), 0.1..4.0f64, 0.1..4.0f64).prop_map(|(l, w, h)| {
                    ConvexSet::axis_box(l.clone(), vec![l[0] + w, l[1] + h]).unwrap()
                }),
            ]
        }

        proptest! {
            #[test]
            fn projection_is_idempotent((set, y) in (arb_set(), arb_point())) {
                let p = set.project(&y).unwrap();
                let pp = set.project(&p).unwrap();
                // Reprojecting a boundary point may move it by an ulp.
                prop_assert!(crate::vecmath::distance(&p, &pp) < 1e-12);
            }

            #[test]
            fn projection_obtuse_angle((set, y, z) in (arb_set(), arb_point(), arb_point())) {
                let zk = set.project(&z).unwrap(); // a member of the set
                let py = set.project(&y).unwrap();
                let lhs = dot(&sub(&y, &py), &sub(&zk, &py));
                prop_assert!(lhs <= 1e-12);
            }

            #[test]
            fn projection_nonexpansive((set, y, z) in (arb_set(), arb_point(), arb_point())) {
                let py = set.project(&y).unwrap();
                let pz = set.project(&z).unwrap();
                prop_assert!(distance(&py, &pz) <= distance(&y, &z) + 1e-12);
            }

            #[test]
            fn distance_matches_projection((set, y) in (arb_set(), arb_point())) {
                let p = set.project(&y).unwrap();
                let d = set.distance_to(&y).unwrap();
                prop_assert!((d - norm(&sub(&y, &p))).abs() < 1e-10);
            }
        }
    }
}
