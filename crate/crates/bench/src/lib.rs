//! Shared fixtures for the benchmarks.

use sdop_core::{
    ApproxMode, ConvexSet, DirectedGraph, GraphSchedule, Schedule, SetFamily, SimConfig,
};

/// Three disjoint unit balls in the plane.
pub fn ball_family() -> SetFamily {
    let s = 3.0_f64.sqrt();
    SetFamily::new(vec![
        ConvexSet::ball(vec![-s, 0.0], 1.0).unwrap(),
        ConvexSet::ball(vec![s, 0.0], 1.0).unwrap(),
        ConvexSet::ball(vec![0.0, -3.0], 1.0).unwrap(),
    ])
    .unwrap()
}

/// Three overlapping balls whose intersection is nonempty.
pub fn overlapping_family() -> SetFamily {
    SetFamily::new(vec![
        ConvexSet::ball(vec![-1.0, 0.0], 2.0).unwrap(),
        ConvexSet::ball(vec![1.0, 0.0], 1.0).unwrap(),
        ConvexSet::ball(vec![0.0, -2.0], 2.0).unwrap(),
    ])
    .unwrap()
}

/// A short three-agent run over a switching undirected pair of edges.
pub fn short_sim() -> SimConfig {
    let e1 = DirectedGraph::new(3, [(1, 2), (2, 1)]).unwrap();
    let e2 = DirectedGraph::new(3, [(0, 1), (1, 0)]).unwrap();
    SimConfig {
        family: ball_family(),
        graph: GraphSchedule::new(vec![(e1, 1.0), (e2, 1.0)], true).unwrap(),
        stepsize: Schedule::RationalDecay { a: 20.0, b: 20.0 },
        angle: Schedule::RationalDecay { a: 1.0, b: 50.0 },
        mode: ApproxMode::RandomCone { seed: 42 },
        x0: vec![vec![-3.0, 3.0], vec![4.0, 2.0], vec![-5.0, -3.0]],
        dt: 0.01,
        t_end: 10.0,
        stride: 100,
    }
}
