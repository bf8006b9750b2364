//! CSV and SVG emission. Floats are serialized with 17 significant digits so
//! re-parsing reproduces the exact doubles; running the same scenario twice
//! yields identical bytes.

use std::fmt::Write as _;

use sdop_core::Trajectory;

/// `f64` to decimal with enough digits for exact round-trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per recorded sample: `t`, every agent coordinate, then the
/// diagnostics (`h` is left empty when the intersection is empty).
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let first = &traj.samples[0];
    let n = first.states.len();
    let m = first.states[0].len();

    let mut out = String::new();
    out.push('t');
    for i in 1..=n {
        for k in 1..=m {
            let _ = write!(out, ",x_{i}_{k}");
        }
    }
    out.push_str(",H,h,hbar,f_bar");
    for i in 1..=n {
        let _ = write!(out, ",gamma_{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",alpha_{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",theta_{i}");
    }
    out.push('\n');

    for s in &traj.samples {
        out.push_str(&fmt_f64(s.t));
        for x in &s.states {
            for v in x {
                let _ = write!(out, ",{}", fmt_f64(*v));
            }
        }
        let r = &s.record;
        let _ = write!(out, ",{}", fmt_f64(r.consensus_diameter));
        match r.h {
            Some(h) => {
                let _ = write!(out, ",{}", fmt_f64(h));
            }
            None => out.push(','),
        }
        let _ = write!(out, ",{},{}", fmt_f64(r.hbar), fmt_f64(r.f_bar));
        for v in &r.gamma {
            let _ = write!(out, ",{}", fmt_f64(*v));
        }
        for v in &r.alpha_virtual {
            let _ = write!(out, ",{}", fmt_f64(*v));
        }
        for v in &r.realized_angle {
            let _ = write!(out, ",{}", fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

/// Diagnostics-only table for quick plotting elsewhere.
pub fn diagnostics_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,H,h,hbar,f_bar\n");
    for s in &traj.samples {
        let r = &s.record;
        let _ = write!(out, "{},{}", fmt_f64(s.t), fmt_f64(r.consensus_diameter));
        match r.h {
            Some(h) => {
                let _ = write!(out, ",{}", fmt_f64(h));
            }
            None => out.push(','),
        }
        let _ = writeln!(out, ",{},{}", fmt_f64(r.hbar), fmt_f64(r.f_bar));
    }
    out
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const W: f64 = 440.0;
const H: f64 = 400.0;
const PAD: f64 = 45.0;

fn polyline(points: &[(f64, f64)], color: &str) -> String {
    let pts: Vec<String> = points
        .iter()
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect();
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\" points=\"{}\"/>\n",
        pts.join(" ")
    )
}

/// Two-panel plot: agent paths in the plane (first two coordinates) on the
/// left, consensus diameter and objective-at-mean on a log scale on the
/// right.
pub fn plot_svg(traj: &Trajectory) -> String {
    let n = traj.samples[0].states.len();
    let m = traj.samples[0].states[0].len();

    let mut svg = String::new();
    let total_w = if m >= 2 { 2.0 * W } else { W };
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{total_w}\" height=\"{H}\" \
         viewBox=\"0 0 {total_w} {H}\">\n<rect width=\"{total_w}\" height=\"{H}\" fill=\"white\"/>\n"
    );

    let mut panel_x0 = 0.0;
    if m >= 2 {
        // Panel A: trajectories in the plane.
        let (mut lo_x, mut hi_x) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY);
        for s in &traj.samples {
            for x in &s.states {
                lo_x = lo_x.min(x[0]);
                hi_x = hi_x.max(x[0]);
                lo_y = lo_y.min(x[1]);
                hi_y = hi_y.max(x[1]);
            }
        }
        let span_x = (hi_x - lo_x).max(1e-9);
        let span_y = (hi_y - lo_y).max(1e-9);
        let sx = |v: f64| PAD + (v - lo_x) / span_x * (W - 2.0 * PAD);
        let sy = |v: f64| H - PAD - (v - lo_y) / span_y * (H - 2.0 * PAD);
        let _ = write!(
            svg,
            "<text x=\"{:.0}\" y=\"20\" font-size=\"13\" text-anchor=\"middle\">agent paths</text>\n",
            W / 2.0
        );
        for i in 0..n {
            let pts: Vec<(f64, f64)> = traj
                .samples
                .iter()
                .map(|s| (sx(s.states[i][0]), sy(s.states[i][1])))
                .collect();
            svg.push_str(&polyline(&pts, COLORS[i % COLORS.len()]));
            let (ex, ey) = *pts.last().unwrap();
            let _ = write!(
                svg,
                "<circle cx=\"{ex:.2}\" cy=\"{ey:.2}\" r=\"3\" fill=\"{}\"/>\n",
                COLORS[i % COLORS.len()]
            );
        }
        panel_x0 = W;
    }

    // Panel B: H(t) and f_bar(t), log scale.
    let t_max = traj.samples.last().unwrap().t.max(1e-9);
    let floor = 1e-12f64;
    let series: [(&str, Vec<f64>); 2] = [
        (
            "#1f77b4",
            traj.samples
                .iter()
                .map(|s| s.record.consensus_diameter.max(floor))
                .collect(),
        ),
        (
            "#d62728",
            traj.samples.iter().map(|s| s.record.f_bar.max(floor)).collect(),
        ),
    ];
    let hi = series
        .iter()
        .flat_map(|(_, v)| v.iter())
        .fold(floor, |a, &b| a.max(b));
    let (log_lo, log_hi) = (floor.log10(), hi.log10().max(floor.log10() + 1.0));
    let sx = |t: f64| panel_x0 + PAD + t / t_max * (W - 2.0 * PAD);
    let sy = |v: f64| H - PAD - (v.log10() - log_lo) / (log_hi - log_lo) * (H - 2.0 * PAD);
    let _ = write!(
        svg,
        "<text x=\"{:.0}\" y=\"20\" font-size=\"13\" text-anchor=\"middle\">H (blue), f at mean (red), log scale</text>\n",
        panel_x0 + W / 2.0
    );
    let _ = write!(
        svg,
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        panel_x0 + PAD,
        H - PAD,
        panel_x0 + W - PAD,
        H - PAD
    );
    for (color, vals) in &series {
        let pts: Vec<(f64, f64)> = traj
            .samples
            .iter()
            .zip(vals)
            .map(|(s, &v)| (sx(s.t), sy(v)))
            .collect();
        svg.push_str(&polyline(&pts, color));
    }
    svg.push_str("</svg>\n");
    svg
}
