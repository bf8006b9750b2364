//! Centralized reference computations: the optimal solution of
//! `min sum_i |x|^2_{X_i}`, projection onto the intersection, distance to the
//! convex hull of the family, and the per-time diagnostics attached to
//! trajectory samples.

use crate::geometry::SetFamily;
use crate::vecmath::{add_scaled, distance, dot, norm, scale, sub};
use crate::{Error, Result};

/// Dykstra sweep cap.
const DYKSTRA_MAX_SWEEPS: usize = 100_000;

/// Per-sample diagnostics. `h` is present only when the intersection of the
/// family is nonempty.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// Consensus diameter `max_{i,j} |x_i - x_j|`.
    pub consensus_diameter: f64,
    /// `0.5 * max_i |x_i|^2_{X_0}` for the nonempty-intersection case.
    pub h: Option<f64>,
    /// `0.5 * max_i |x_i|^2_{X_c}` (distance to the hull of the family).
    pub hbar: f64,
    /// Objective at the average point.
    pub f_bar: f64,
    pub gamma: Vec<f64>,
    /// Virtual stepsizes `gamma_i * alpha_t`.
    pub alpha_virtual: Vec<f64>,
    pub realized_angle: Vec<f64>,
}

/// Output of [`solve_centralized`].
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalSolution {
    pub x_star: Vec<f64>,
    pub f_star: f64,
    /// `|x* - (1/n) sum_i P_{X_i}(x*)|`.
    pub residual: f64,
    pub iterations: usize,
    /// Heuristic: solver restarted from 8 well-separated points all agreed.
    pub unique: bool,
}

/// Report of the optimal-set characterization check: optima share per-set
/// displacement ("gap") vectors `x* - P_{X_i}(x*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterizationReport {
    pub gaps_x: Vec<Vec<f64>>,
    pub gaps_y: Vec<Vec<f64>>,
    pub max_deviation: f64,
    pub passed: bool,
}

/// Sum of squared set distances `f(x) = sum_i |x|^2_{X_i}`.
pub fn objective(family: &SetFamily, x: &[f64]) -> Result<f64> {
    let mut f = 0.0;
    for set in family.iter() {
        let d = set.distance_to(x)?;
        f += d * d;
    }
    Ok(f)
}

pub fn mean_projection(family: &SetFamily, x: &[f64]) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; family.dim()];
    for set in family.iter() {
        let p = set.project(x)?;
        for (a, b) in acc.iter_mut().zip(&p) {
            *a += b;
        }
    }
    Ok(scale(&acc, 1.0 / family.len() as f64))
}

fn fixed_point_from(
    family: &SetFamily,
    start: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize)> {
    let mut x = start.to_vec();
    for k in 1..=max_iter {
        let next = mean_projection(family, &x)?;
        let upd = distance(&next, &x);
        x = next;
        if upd < tol {
            return Ok((x, k));
        }
    }
    let residual = distance(&mean_projection(family, &x)?, &x);
    Err(Error::NoConvergence { max_iter, residual })
}

/// Solves `min f` by the fixed-point iteration `x <- (1/n) sum_i P_{X_i}(x)`,
/// i.e. gradient descent on `f` with step `1/(2n)`, starting from the
/// centroid of per-set anchor points. Every optimum satisfies
/// `x* = (1/n) sum_i P_{X_i}(x*)`.
pub fn solve_centralized(
    family: &SetFamily,
    tol: f64,
    max_iter: usize,
) -> Result<OptimalSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig("solver tolerance must be positive".into()));
    }
    let n = family.len() as f64;
    let m = family.dim();
    let mut centroid = vec![0.0; m];
    for i in 0..family.len() {
        let a = family.anchor(i);
        for (c, v) in centroid.iter_mut().zip(&a) {
            *c += v / n;
        }
    }

    let (x_star, iterations) = fixed_point_from(family, &centroid, tol, max_iter)?;
    let residual = distance(&mean_projection(family, &x_star)?, &x_star);
    let f_star = objective(family, &x_star)?;

    // Uniqueness heuristic: 8 well-separated restarts must land together.
    let radius = family.hull_diameter().value + 1.0;
    let mut unique = true;
    for k in 0..8 {
        let phi = k as f64 * std::f64::consts::TAU / 8.0;
        let mut start = centroid.clone();
        start[0] += radius * phi.cos();
        if m > 1 {
            start[1] += radius * phi.sin();
        } else if k % 2 == 1 {
            start[0] -= 2.0 * radius * phi.cos();
        }
        match fixed_point_from(family, &start, tol, max_iter) {
            Ok((y, _)) => {
                if distance(&y, &x_star) > 100.0 * tol {
                    unique = false;
                }
            }
            Err(_) => unique = false,
        }
    }

    Ok(OptimalSolution {
        x_star,
        f_star,
        residual,
        iterations,
        unique,
    })
}

/// Projection of `v` onto the intersection of the family via Dykstra's
/// alternating-projection scheme (the correction terms make the limit the
/// true projection rather than an arbitrary intersection point).
///
/// Errors with [`Error::EmptyIntersection`] when the sweeps stall away from
/// the sets.
pub fn project_intersection(family: &SetFamily, v: &[f64], tol: f64) -> Result<Vec<f64>> {
    if v.len() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            got: v.len(),
        });
    }
    let n = family.len();
    let mut x = v.to_vec();
    let mut corrections = vec![vec![0.0; family.dim()]; n];

    for _ in 0..DYKSTRA_MAX_SWEEPS {
        let sweep_start = x.clone();
        for (i, set) in family.iter().enumerate() {
            let y = crate::vecmath::add(&x, &corrections[i]);
            let p = set.project(&y)?;
            corrections[i] = sub(&y, &p);
            x = p;
        }
        if distance(&sweep_start, &x) < tol {
            let feasible = family
                .iter()
                .map(|s| s.distance_to(&x))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .all(|d| d <= 10.0 * tol.max(1e-12));
            if feasible {
                return Ok(x);
            }
            return Err(Error::EmptyIntersection);
        }
    }
    // Sweeps exhausted: either the intersection is empty (the iterates cycle
    // between the sets) or convergence is extremely slow.
    let worst = family
        .iter()
        .map(|s| s.distance_to(&x))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    if worst > 100.0 * tol.max(1e-12) {
        Err(Error::EmptyIntersection)
    } else {
        Err(Error::NoConvergence {
            max_iter: DYKSTRA_MAX_SWEEPS,
            residual: worst,
        })
    }
}

/// Whether the family has a (numerically) nonempty intersection, decided by
/// the centralized solver reaching objective ~ 0.
pub fn intersection_nonempty(family: &SetFamily) -> bool {
    match solve_centralized(family, 1e-10, 200_000) {
        Ok(sol) => sol.f_star < 1e-6,
        Err(_) => false,
    }
}

/// Upper bound on the distance from `x` to the convex hull `X_c` of the
/// family, via Frank-Wolfe on `min_{z in X_c} 0.5 |x - z|^2` (the linear
/// subproblem is a support-point query). The duality gap certifies the
/// bound; iterations stop once the gap is below `gap_tol`.
pub fn distance_to_hull(family: &SetFamily, x: &[f64], gap_tol: f64, max_iter: usize) -> f64 {
    let mut z = family
        .get(0)
        .project(x)
        .expect("projection onto first set");
    for _ in 0..max_iter {
        let g = sub(x, &z);
        if norm(&g) < 1e-14 {
            return 0.0;
        }
        let s = family.hull_support(&g);
        let d = sub(&s, &z);
        let gap = dot(&g, &d);
        if gap <= gap_tol {
            break;
        }
        // Exact line search for the quadratic along z + eta d.
        let denom = dot(&d, &d);
        let eta = (gap / denom).clamp(0.0, 1.0);
        z = add_scaled(&z, eta, &d);
    }
    distance(x, &z)
}

/// Verifies the shared-gap-vector characterization of optima: for solver
/// outputs `x_star`, `y_star`, the per-set displacements agree within
/// `10 * tol`.
pub fn check_optimality_characterization(
    family: &SetFamily,
    x_star: &[f64],
    y_star: &[f64],
    tol: f64,
) -> Result<CharacterizationReport> {
    let mut gaps_x = Vec::with_capacity(family.len());
    let mut gaps_y = Vec::with_capacity(family.len());
    let mut max_deviation = 0.0_f64;
    for set in family.iter() {
        let gx = sub(x_star, &set.project(x_star)?);
        let gy = sub(y_star, &set.project(y_star)?);
        max_deviation = max_deviation.max(distance(&gx, &gy));
        gaps_x.push(gx);
        gaps_y.push(gy);
    }
    Ok(CharacterizationReport {
        gaps_x,
        gaps_y,
        max_deviation,
        passed: max_deviation <= 10.0 * tol,
    })
}

/// Populates the per-sample diagnostics record.
///
/// `gamma`, `alpha_virtual` and `realized_angle` come from the approximate
/// projections evaluated at the sample; `nonempty` decides whether the
/// intersection distance `h` is defined.
#[allow(clippy::too_many_arguments)]
pub fn diagnostics_for(
    t: f64,
    states: &[Vec<f64>],
    family: &SetFamily,
    gamma: &[f64],
    alpha_virtual: &[f64],
    realized_angle: &[f64],
    nonempty: bool,
) -> Result<DiagnosticsRecord> {
    let n = states.len();
    if n == 0 {
        return Err(Error::InvalidConfig("no agent states".into()));
    }
    let m = family.dim();

    let mut consensus_diameter = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            consensus_diameter = consensus_diameter.max(distance(&states[i], &states[j]));
        }
    }

    let h = if nonempty {
        let mut worst = 0.0_f64;
        for x in states {
            let p = project_intersection(family, x, 1e-10)?;
            worst = worst.max(distance(x, &p));
        }
        Some(0.5 * worst * worst)
    } else {
        None
    };

    let hbar = {
        let mut worst = 0.0_f64;
        for x in states {
            worst = worst.max(distance_to_hull(family, x, 1e-10, 10_000));
        }
        0.5 * worst * worst
    };

    let mut mean = vec![0.0; m];
    for x in states {
        for (a, b) in mean.iter_mut().zip(x) {
            *a += b / n as f64;
        }
    }
    let f_bar = objective(family, &mean)?;

    Ok(DiagnosticsRecord {
        t,
        consensus_diameter,
        h,
        hbar,
        f_bar,
        gamma: gamma.to_vec(),
        alpha_virtual: alpha_virtual.to_vec(),
        realized_angle: realized_angle.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexSet;
    use approx::assert_abs_diff_eq;

    fn empty_family() -> SetFamily {
        let s3 = 3.0f64.sqrt();
        SetFamily::new(vec![
            ConvexSet::ball(vec![-s3, 0.0], 1.0).unwrap(),
            ConvexSet::ball(vec![s3, 0.0], 1.0).unwrap(),
            ConvexSet::ball(vec![0.0, -3.0], 1.0).unwrap(),
        ])
        .unwrap()
    }

    fn nonempty_family() -> SetFamily {
        SetFamily::new(vec![
            ConvexSet::ball(vec![-1.0, 0.0], 2.0).unwrap(),
            ConvexSet::ball(vec![1.0, 0.0], 1.0).unwrap(),
            ConvexSet::ball(vec![0.0, -2.0], 2.0).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn objective_values() {
        let f = empty_family();
        assert_abs_diff_eq!(objective(&f, &[0.0, -1.0]).unwrap(), 3.0, epsilon = 1e-12);
        let s3 = 3.0f64.sqrt();
        let expect = 2.0 * (s3 - 1.0) * (s3 - 1.0) + 4.0;
        assert_abs_diff_eq!(objective(&f, &[0.0, 0.0]).unwrap(), expect, epsilon = 1e-12);
        assert_eq!(objective(&nonempty_family(), &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn solver_finds_unique_optimum() {
        let sol = solve_centralized(&empty_family(), 1e-11, 200_000).unwrap();
        assert_abs_diff_eq!(sol.x_star[0], 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(sol.x_star[1], -1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(sol.f_star, 3.0, epsilon = 1e-7);
        assert!(sol.residual < 1e-10);
        assert!(sol.unique);
    }

    #[test]
    fn solver_nonempty_reaches_zero() {
        let sol = solve_centralized(&nonempty_family(), 1e-10, 200_000).unwrap();
        assert!(sol.f_star < 1e-12);
    }

    #[test]
    fn solver_single_set() {
        let f = SetFamily::new(vec![ConvexSet::ball(vec![2.0, 2.0], 1.0).unwrap()]).unwrap();
        let sol = solve_centralized(&f, 1e-10, 10_000).unwrap();
        assert!(sol.f_star < 1e-12);
        assert!(f.get(0).contains(&sol.x_star) || f.get(0).distance_to(&sol.x_star).unwrap() < 1e-8);
        // A ball has many optima, so the restarts disagree.
        assert!(!sol.unique);
    }

    #[test]
    fn descent_of_fixed_point_iteration() {
        let fam = empty_family();
        let mut x = vec![7.0, 5.5];
        let mut prev = objective(&fam, &x).unwrap();
        for _ in 0..500 {
            x = mean_projection(&fam, &x).unwrap();
            let f = objective(&fam, &x).unwrap();
            assert!(f <= prev + 1e-12);
            prev = f;
        }
    }

    #[test]
    fn dykstra_identity_inside() {
        let fam = nonempty_family();
        let v = [0.3, -0.5];
        let p = project_intersection(&fam, &v, 1e-10).unwrap();
        assert!(distance(&p, &v) < 1e-8);
    }

    #[test]
    fn dykstra_two_identical_balls() {
        let fam = SetFamily::new(vec![
            ConvexSet::ball(vec![0.0, 0.0], 1.0).unwrap(),
            ConvexSet::ball(vec![0.0, 0.0], 1.0).unwrap(),
        ])
        .unwrap();
        let p = project_intersection(&fam, &[3.0, 4.0], 1e-12).unwrap();
        assert_abs_diff_eq!(p[0], 0.6, epsilon = 1e-9);
        assert_abs_diff_eq!(p[1], 0.8, epsilon = 1e-9);
    }

    #[test]
    fn dykstra_matches_brute_force() {
        // Nearest point of the intersection to (0, 5): brute-force grid over
        // the intersection membership predicate, then local polish.
        let fam = nonempty_family();
        let v = [0.0, 5.0];
        let inside = |x: f64, y: f64| fam.iter().all(|s| s.contains(&[x, y]));
        let mut best = (f64::INFINITY, 0.0, 0.0);
        let mut step = 0.01;
        let (mut cx, mut cy, mut r) = (0.0, 0.0, 2.0);
        for _ in 0..4 {
            let n = (2.0 * r / step) as i64;
            for i in 0..=n {
                for j in 0..=n {
                    let x = cx - r + i as f64 * step;
                    let y = cy - r + j as f64 * step;
                    if inside(x, y) {
                        let d2 = (x - v[0]).powi(2) + (y - v[1]).powi(2);
                        if d2 < best.0 {
                            best = (d2, x, y);
                        }
                    }
                }
            }
            cx = best.1;
            cy = best.2;
            r = 4.0 * step;
            step /= 10.0;
        }
        let p = project_intersection(&fam, &v, 1e-10).unwrap();
        assert!(
            ((p[0] - best.1).powi(2) + (p[1] - best.2).powi(2)).sqrt() < 1e-4,
            "dykstra {:?} vs brute force ({}, {})",
            p,
            best.1,
            best.2
        );
    }

    #[test]
    fn dykstra_empty_intersection_errors() {
        let fam = empty_family();
        assert!(matches!(
            project_intersection(&fam, &[0.0, 0.0], 1e-10),
            Err(Error::EmptyIntersection)
        ));
    }

    #[test]
    fn intersection_nonempty_classifier() {
        assert!(intersection_nonempty(&nonempty_family()));
        assert!(!intersection_nonempty(&empty_family()));
    }

    #[test]
    fn hull_distance_cases() {
        let fam = empty_family();
        // A point inside one ball is inside the hull.
        assert!(distance_to_hull(&fam, &[3.0f64.sqrt(), 0.0], 1e-10, 10_000) < 1e-7);
        // Far along +y above the two top balls: hull boundary is the upper
        // common tangent segment y = 1 between the ball tops.
        let d = distance_to_hull(&fam, &[0.0, 5.0], 1e-12, 200_000);
        assert_abs_diff_eq!(d, 4.0, epsilon = 1e-4);
    }

    #[test]
    fn characterization_identical_points() {
        let fam = empty_family();
        let sol = solve_centralized(&fam, 1e-10, 200_000).unwrap();
        let rep =
            check_optimality_characterization(&fam, &sol.x_star, &sol.x_star, 1e-10).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.max_deviation, 0.0);
    }

    #[test]
    fn characterization_two_starts_agree() {
        let fam = empty_family();
        let (a, _) = fixed_point_from(&fam, &[10.0, 10.0], 1e-11, 400_000).unwrap();
        let (b, _) = fixed_point_from(&fam, &[-10.0, -10.0], 1e-11, 400_000).unwrap();
        let rep = check_optimality_characterization(&fam, &a, &b, 1e-8).unwrap();
        assert!(rep.passed, "deviation {}", rep.max_deviation);
    }

    #[test]
    fn characterization_disjoint_parallel_balls() {
        // Unit balls at (+-2, 0). The optimum of the squared-distance sum is
        // (0, 0) with gap vectors (+1, 0) and (-1, 0).
        let fam = SetFamily::new(vec![
            ConvexSet::ball(vec![-2.0, 0.0], 1.0).unwrap(),
            ConvexSet::ball(vec![2.0, 0.0], 1.0).unwrap(),
        ])
        .unwrap();
        let sol = solve_centralized(&fam, 1e-11, 100_000).unwrap();
        assert_abs_diff_eq!(sol.x_star[0], 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(sol.x_star[1], 0.0, epsilon = 1e-8);
        let rep =
            check_optimality_characterization(&fam, &sol.x_star, &sol.x_star, 1e-10).unwrap();
        assert_abs_diff_eq!(rep.gaps_x[0][0], 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(rep.gaps_x[1][0], -1.0, epsilon = 1e-7);
    }

    #[test]
    fn objective_increases_away_from_optimum_along_gap_line() {
        // The optimal set meets the line through x* and P_{X_1}(x*) only at
        // x*: sampled objective values strictly increase away from it.
        let fam = empty_family();
        let sol = solve_centralized(&fam, 1e-11, 200_000).unwrap();
        let p1 = fam.get(0).project(&sol.x_star).unwrap();
        let dir = sub(&sol.x_star, &p1);
        let dirn = scale(&dir, 1.0 / norm(&dir));
        let f0 = objective(&fam, &sol.x_star).unwrap();
        for s in [-0.8, -0.4, -0.1, 0.1, 0.4, 0.8] {
            let p = add_scaled(&sol.x_star, s, &dirn);
            let f = objective(&fam, &p).unwrap();
            assert!(f > f0 + 1e-6 * s * s, "f({s}) = {f} not above f* = {f0}");
        }
    }

    #[test]
    fn diagnostics_coincident_agents() {
        let fam = nonempty_family();
        let states = vec![vec![0.0, 0.0]; 3];
        let rec = diagnostics_for(
            0.0,
            &states,
            &fam,
            &[1.0; 3],
            &[0.5; 3],
            &[0.0; 3],
            true,
        )
        .unwrap();
        assert_eq!(rec.consensus_diameter, 0.0);
        assert_eq!(rec.h, Some(0.0));
        assert_eq!(rec.f_bar, 0.0);
        assert_eq!(rec.hbar, 0.0);
    }
}
