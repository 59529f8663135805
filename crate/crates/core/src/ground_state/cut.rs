//! Minimum s-t cut for submodular instances. Source side means `+1`.

use super::fold::{fold, Folded};
use super::maxflow::FlowNetwork;
use super::{GroundStateInstance, Method, Solution};
use crate::error::{Error, Result};
use crate::spin::Spin;

pub fn minimize_cut(g: &GroundStateInstance) -> Result<Solution> {
    let f = fold(g)?;
    f.is_submodular()?;
    solve_folded(g, &f)
}

/// Like [`minimize_cut`], but first looks for a relabelling of free groups
/// that makes every pair weight nonnegative.
pub fn minimize_cut_gauged(g: &GroundStateInstance) -> Result<Solution> {
    let f = fold(g)?;
    if f.is_submodular().is_ok() {
        return solve_folded(g, &f);
    }
    match f.balancing_gauge() {
        Some(gauge) => solve_gauged(g, &f, &gauge),
        None => Err(f.is_submodular().unwrap_err()),
    }
}

pub(crate) fn solve_folded(g: &GroundStateInstance, f: &Folded) -> Result<Solution> {
    let x = cut_assignment(f)?;
    Ok(f.solution(g, &x, Method::Mincut, true))
}

pub(crate) fn solve_gauged(g: &GroundStateInstance, f: &Folded, gauge: &[bool]) -> Result<Solution> {
    let y = cut_assignment(&f.gauged(gauge))?;
    let x: Vec<Spin> = y.iter().zip(gauge).map(|(&s, &flip)| if flip { -s } else { s }).collect();
    Ok(f.solution(g, &x, Method::Mincut, true))
}

fn cut_assignment(f: &Folded) -> Result<Vec<Spin>> {
    let n = f.num_free();
    let (s, t) = (n, n + 1);
    let mut net = FlowNetwork::new(n + 2);
    let mut base = f.constant;
    for (i, h) in f.unary.iter().enumerate() {
        let m = h[0].min(h[1]);
        base += m;
        // i on the sink side (-1) cuts s->i
        net.add_edge(s, i, h[1] - m);
        net.add_edge(i, t, h[0] - m);
    }
    for &(i, k, c) in &f.edges {
        if c < 0 {
            return Err(Error::Internal("negative capacity reached the cut solver".into()));
        }
        net.add_edge(i, k, c);
        net.add_edge(k, i, c);
    }
    let flow = net.max_flow(s, t);
    let side = net.source_side(s);
    let x: Vec<Spin> = (0..n).map(|i| Spin::from_sign(side[i])).collect();
    if f.energy(&x) != base + flow {
        return Err(Error::Internal("cut value does not match the recovered assignment".into()));
    }
    Ok(x)
}
