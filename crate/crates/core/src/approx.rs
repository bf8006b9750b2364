//! The approximate projection operator and its geometric decomposition.
//!
//! For a point `v` outside a set `K`, the approximate projection is a point
//! `pa` on the visible part of `bd(K)` whose direction from `v` makes an
//! angle at most `theta` with the exact-projection direction. The operator
//! also reports the tangent-plane intersection `ph` and the stepsize
//! inflation `gamma = |pa - v| / |ph - v| >= 1` that converts the designed
//! stepsize into the per-agent virtual stepsize.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::ConvexSet;
use crate::vecmath::{add_scaled, angle_between, dot, norm, sub};
use crate::{Error, Result};

/// Rule for picking a point inside the admissible cone.
#[derive(Debug, Clone, PartialEq)]
pub enum ApproxMode {
    /// Always return the exact projection (angle 0).
    Exact,
    /// Rotate the exact-projection direction by the requested angle within
    /// the plane spanned by that direction and `axis`; `sign` selects the
    /// rotation sense (+1 / -1).
    PlanarRotation { axis: Vec<f64>, sign: f64 },
    /// Rotate within a pseudo-random plane drawn from a counter-based
    /// generator keyed by `(seed, agent, step)`, so replays are exact.
    RandomCone { seed: u64 },
}

/// Identifies one operator call for the counter-based random mode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CallKey {
    pub agent: usize,
    pub step: u64,
}

/// Output of [`approx_project`].
///
/// Degenerate conventions when `pa == pexact` (no deviation): `mu = pi/2`,
/// `vartheta = pi`; both angles are otherwise measured at the points of the
/// triangle `(v, pexact, pa)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxResult {
    /// The approximate projection point, on `bd(K)` when `v` is outside.
    pub pa: Vec<f64>,
    /// The exact projection `P_K(v)`.
    pub pexact: Vec<f64>,
    /// Intersection of the tangent hyperplane at `pexact` with `[v, pa]`.
    pub ph: Vec<f64>,
    /// Realized deviation angle `∠(pa - v, pexact - v)`.
    pub realized_angle: f64,
    /// `|pa - v| / |ph - v| >= 1`.
    pub gamma: f64,
    /// `∠(pexact - pa, v - pa)`.
    pub mu: f64,
    /// `∠(v - pexact, pa - pexact)`; at least `pi/2` when `pa != pexact`.
    pub vartheta: f64,
    /// True when the requested angle exceeded the visible cone and was
    /// reduced.
    pub clamped: bool,
}

/// Relative safety margin kept inside the visible cone when clamping.
const CLAMP_MARGIN: f64 = 1e-6;
const BISECTION_ITERS: u32 = 32;

/// Approximate projection of `v` onto `set` with deviation at most
/// `requested_angle` (radians, in `[0, pi/2)`).
///
/// Members of the set project to themselves with realized angle 0 and
/// `gamma = 1`. A requested angle outside the visible cone is clamped to the
/// largest feasible rotation; `clamped` flags this in the result.
pub fn approx_project(
    set: &ConvexSet,
    v: &[f64],
    requested_angle: f64,
    mode: &ApproxMode,
    key: CallKey,
) -> Result<ApproxResult> {
    if !(0.0..FRAC_PI_2).contains(&requested_angle) {
        return Err(Error::InvalidConfig(format!(
            "requested angle must lie in [0, pi/2), got {requested_angle}"
        )));
    }
    if set.contains(v) {
        return Ok(ApproxResult {
            pa: v.to_vec(),
            pexact: v.to_vec(),
            ph: v.to_vec(),
            realized_angle: 0.0,
            gamma: 1.0,
            mu: FRAC_PI_2,
            vartheta: PI,
            clamped: false,
        });
    }

    let pexact = set.project(v)?;
    let dist = norm(&sub(&pexact, v));
    let u: Vec<f64> = sub(&pexact, v).iter().map(|x| x / dist).collect();

    let exact_result = |clamped| ApproxResult {
        pa: pexact.clone(),
        pexact: pexact.clone(),
        ph: pexact.clone(),
        realized_angle: 0.0,
        gamma: 1.0,
        mu: FRAC_PI_2,
        vartheta: PI,
        clamped,
    };

    if requested_angle == 0.0 || matches!(mode, ApproxMode::Exact) {
        return Ok(exact_result(false));
    }

    let Some(w) = rotation_axis(&u, mode, key) else {
        // Dimension 1: no rotation plane exists, fall back to exact.
        return Ok(exact_result(true));
    };

    let dir_at = |phi: f64| -> Vec<f64> {
        u.iter()
            .zip(&w)
            .map(|(a, b)| phi.cos() * a + phi.sin() * b)
            .collect()
    };
    let hit_at = |phi: f64| -> Result<Option<Vec<f64>>> { set.ray_boundary_hit(v, &dir_at(phi)) };

    // Clamp the rotation to the visible cone. Balls have a closed form; other
    // shapes are bisected on the rotation angle.
    let (mut realized, mut clamped) = match set {
        ConvexSet::Ball { center, radius } => {
            let psi = (radius / norm(&sub(v, center))).asin();
            let max_angle = (1.0 - CLAMP_MARGIN) * psi;
            if requested_angle > max_angle {
                (max_angle, true)
            } else {
                (requested_angle, false)
            }
        }
        _ => (requested_angle, false),
    };

    let mut pa = hit_at(realized)?;
    if pa.is_none() {
        // Bisect between 0 (always hits at pexact) and the requested angle.
        let mut lo = 0.0;
        let mut hi = realized;
        let mut best = None;
        for _ in 0..BISECTION_ITERS {
            let mid = 0.5 * (lo + hi);
            match hit_at(mid)? {
                Some(p) => {
                    lo = mid;
                    best = Some(p);
                }
                None => hi = mid,
            }
        }
        realized = lo;
        clamped = true;
        pa = best;
    }

    let Some(pa) = pa else {
        // Even infinitesimal rotations miss; return the exact projection.
        return Ok(exact_result(true));
    };
    if realized == 0.0 {
        return Ok(exact_result(clamped));
    }

    let ph = ph_from_parts(v, &pexact, &pa, dist);
    let gamma = gamma_of(v, &pa, &ph);
    let mu = angle_between(&sub(&pexact, &pa), &sub(v, &pa)).unwrap_or(FRAC_PI_2);
    let vartheta = angle_between(&sub(v, &pexact), &sub(&pa, &pexact)).unwrap_or(PI);

    Ok(ApproxResult {
        pa,
        pexact,
        ph,
        realized_angle: realized,
        gamma,
        mu,
        vartheta,
        clamped,
    })
}

/// Unit vector orthogonal to `u` spanning the rotation plane, or `None` in
/// dimension 1.
fn rotation_axis(u: &[f64], mode: &ApproxMode, key: CallKey) -> Option<Vec<f64>> {
    let m = u.len();
    if m < 2 {
        return None;
    }
    let orthonormalize = |a: &[f64]| -> Option<Vec<f64>> {
        let w = add_scaled(a, -dot(a, u), u);
        let wn = norm(&w);
        (wn >= 1e-8).then(|| w.iter().map(|x| x / wn).collect())
    };
    match mode {
        ApproxMode::Exact => None,
        ApproxMode::PlanarRotation { axis, sign } => {
            let w = orthonormalize(axis).or_else(|| {
                // Reference axis (nearly) colinear with u: fall back to the
                // first usable canonical basis vector.
                (0..m).find_map(|k| {
                    let mut e = vec![0.0; m];
                    e[k] = 1.0;
                    orthonormalize(&e)
                })
            })?;
            let s = if *sign < 0.0 { -1.0 } else { 1.0 };
            Some(w.iter().map(|x| s * x).collect())
        }
        ApproxMode::RandomCone { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_key(*seed, key));
            for _ in 0..64 {
                let cand: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
                if let Some(w) = orthonormalize(&cand) {
                    return Some(w);
                }
            }
            None
        }
    }
}

/// splitmix64-style mixing of (seed, agent, step) into one stream key.
fn mix_key(seed: u64, key: CallKey) -> u64 {
    let mut z = seed
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add((key.agent as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9))
        .wrapping_add(key.step.wrapping_mul(0x94d0_49bb_1331_11eb));
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Intersection of the tangent hyperplane at `P_K(v)` with the segment
/// `[v, pa]`. Returns `P_K(v)` when `pa` coincides with it, and `v` itself
/// when `v` is a member of the set.
pub fn compute_ph(set: &ConvexSet, v: &[f64], pa: &[f64]) -> Result<Vec<f64>> {
    if set.contains(v) {
        return Ok(v.to_vec());
    }
    let pexact = set.project(v)?;
    let dist = norm(&sub(&pexact, v));
    Ok(ph_from_parts(v, &pexact, pa, dist))
}

fn ph_from_parts(v: &[f64], pexact: &[f64], pa: &[f64], dist: f64) -> Vec<f64> {
    if norm(&sub(pa, pexact)) <= 1e-14 {
        return pexact.to_vec();
    }
    // Hyperplane {x : <x - pexact, n> = 0} with n = (v - pexact) / dist.
    // Along x(s) = v + s (pa - v) the inner product falls from `dist` (s = 0)
    // to a nonpositive value (s = 1), so the crossing is inside the segment
    // whenever the deviation angle is below pi/2.
    let n: Vec<f64> = sub(v, pexact).iter().map(|x| x / dist).collect();
    let denom = dot(&sub(pa, v), &n);
    assert!(
        denom < 0.0,
        "segment [v, pa] parallel to the tangent hyperplane"
    );
    let s = -dist / denom;
    add_scaled(v, s, &sub(pa, v))
}

/// The stepsize inflation `|pa - v| / |ph - v|`, with the convention that it
/// equals 1 when `ph = v` (i.e. `v` inside the set).
pub fn gamma_of(v: &[f64], pa: &[f64], ph: &[f64]) -> f64 {
    let dh = norm(&sub(ph, v));
    if dh <= 1e-14 {
        return 1.0;
    }
    (norm(&sub(pa, v)) / dh).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecmath::distance;
    use approx::assert_abs_diff_eq;

    fn unit_ball() -> ConvexSet {
        ConvexSet::ball(vec![0.0, 0.0], 1.0).unwrap()
    }

    fn planar() -> ApproxMode {
        ApproxMode::PlanarRotation {
            axis: vec![0.0, 1.0],
            sign: 1.0,
        }
    }

    #[test]
    fn zero_angle_is_exact_projection() {
        let r = approx_project(&unit_ball(), &[2.0, 0.0], 0.0, &planar(), CallKey::default())
            .unwrap();
        assert_eq!(r.pa, vec![1.0, 0.0]);
        assert_eq!(r.gamma, 1.0);
        assert_eq!(r.realized_angle, 0.0);
        assert!(!r.clamped);
    }

    #[test]
    fn inside_point_maps_to_itself() {
        let r = approx_project(&unit_ball(), &[0.2, 0.1], 0.4, &planar(), CallKey::default())
            .unwrap();
        assert_eq!(r.pa, vec![0.2, 0.1]);
        assert_eq!(r.realized_angle, 0.0);
        assert_eq!(r.gamma, 1.0);
    }

    #[test]
    fn twenty_degree_rotation_on_ball() {
        let phi = 20.0_f64.to_radians();
        let v = [2.0, 0.0];
        let r = approx_project(&unit_ball(), &v, phi, &planar(), CallKey::default()).unwrap();
        assert!(!r.clamped);
        assert_abs_diff_eq!(r.realized_angle, phi, epsilon = 1e-12);
        // pa on the boundary, at the expected angle from the projection ray.
        assert_abs_diff_eq!(norm(&r.pa), 1.0, epsilon = 1e-10);
        let a = angle_between(&sub(&r.pa, &v), &[-1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(a, phi, epsilon = 1e-10);
        // Visible-boundary condition re-verified through the ray oracle.
        let d = sub(&r.pa, &v);
        let z = unit_ball().ray_boundary_hit(&v, &d).unwrap().unwrap();
        assert!(distance(&z, &r.pa) < 1e-9);
        // Tangent plane x = 1: ph = (1, tan(phi)), |ph - v| = 1/cos(phi).
        assert_abs_diff_eq!(r.ph[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.ph[1], phi.tan(), epsilon = 1e-10);
        assert_abs_diff_eq!(
            r.gamma,
            norm(&sub(&r.pa, &v)) * phi.cos(),
            epsilon = 1e-10
        );
        assert!(r.vartheta >= FRAC_PI_2 - 1e-9);
    }

    #[test]
    fn clamp_on_ball_respects_visible_cone() {
        // From |v - c| = 2 the visible half-angle is asin(1/2) = 30 deg.
        let psi = (0.5_f64).asin();
        let r = approx_project(&unit_ball(), &[2.0, 0.0], 1.2, &planar(), CallKey::default())
            .unwrap();
        assert!(r.clamped);
        assert!(r.realized_angle <= psi);
        assert_abs_diff_eq!(r.realized_angle, (1.0 - 1e-6) * psi, epsilon = 1e-9);
        assert_abs_diff_eq!(norm(&r.pa), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn clamp_on_box_by_bisection() {
        let b = ConvexSet::axis_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let r = approx_project(&b, &[3.0, 0.0], 1.3, &planar(), CallKey::default()).unwrap();
        assert!(r.clamped);
        assert!(r.realized_angle < 1.3);
        assert!(r.realized_angle > 0.0);
        // Hit stays on the boundary of the box.
        assert!((r.pa[0] - 1.0).abs() < 1e-7 || (r.pa[1].abs() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn compute_ph_trivial_cases() {
        let ball = unit_ball();
        let v = [2.0, 0.0];
        let p = ball.project(&v).unwrap();
        assert_eq!(compute_ph(&ball, &v, &p).unwrap(), p);
        assert_eq!(compute_ph(&ball, &[0.3, 0.0], &[0.3, 0.0]).unwrap(), vec![0.3, 0.0]);
    }

    #[test]
    fn gamma_of_degenerate() {
        assert_eq!(gamma_of(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 0.0]), 1.0);
        assert_eq!(gamma_of(&[0.0, 0.0], &[1.0, 1.0], &[1.0, 1.0]), 1.0);
    }

    #[test]
    fn deterministic_replay() {
        let mode = ApproxMode::RandomCone { seed: 7 };
        let key = CallKey { agent: 2, step: 41 };
        let a = approx_project(&unit_ball(), &[2.0, 0.5], 0.3, &mode, key).unwrap();
        let b = approx_project(&unit_ball(), &[2.0, 0.5], 0.3, &mode, key).unwrap();
        assert_eq!(a, b);
        let c = approx_project(
            &unit_ball(),
            &[2.0, 0.5],
            0.3,
            &mode,
            CallKey { agent: 2, step: 42 },
        )
        .unwrap();
        assert_ne!(a.pa, c.pa);
    }

    #[test]
    fn requested_angle_validated() {
        assert!(approx_project(
            &unit_ball(),
            &[2.0, 0.0],
            FRAC_PI_2,
            &planar(),
            CallKey::default()
        )
        .is_err());
    }

    #[test]
    fn axis_colinear_fallback() {
        // Reference axis along the projection direction forces the fallback.
        let mode = ApproxMode::PlanarRotation {
            axis: vec![1.0, 0.0],
            sign: 1.0,
        };
        let r = approx_project(&unit_ball(), &[2.0, 0.0], 0.2, &mode, CallKey::default())
            .unwrap();
        assert_abs_diff_eq!(r.realized_angle, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(norm(&r.pa), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn cone_membership_inequality() {
        // <pa - v, P(v) - v> >= |pa - v| |v|_K cos(theta) for sampled calls.
        let ball = ConvexSet::ball(vec![0.5, -0.25], 1.5).unwrap();
        for k in 0..50 {
            let ang = 0.02 * k as f64 * 1.4 / 1.0;
            let v = [3.0 + 0.1 * k as f64, 1.0 - 0.07 * k as f64];
            let r = approx_project(&ball, &v, ang.min(1.5), &planar(), CallKey::default());
            let Ok(r) = r else { continue };
            let lhs = dot(&sub(&r.pa, &v), &sub(&r.pexact, &v));
            let rhs = norm(&sub(&r.pa, &v))
                * ball.distance_to(&v).unwrap()
                * r.realized_angle.cos();
            assert!(lhs >= rhs - 1e-9, "cone violated: {lhs} < {rhs}");
        }
    }
}
