//! Exhaustive search over free groups in Gray-code order.

use super::fold::{fold, Folded};
use super::{GroundStateInstance, Method, Solution};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::spin::Spin;

/// Leading groups fixed per parallel chunk.
const PREFIX_BITS: usize = 6;

pub fn minimize_enum(g: &GroundStateInstance, cap: usize, execution: Execution) -> Result<Solution> {
    let folded = fold(g)?;
    if folded.num_free() > cap {
        return Err(Error::EnumerationCap { free: folded.num_free(), cap });
    }
    solve_folded(g, &folded, execution)
}

pub(crate) fn solve_folded(g: &GroundStateInstance, f: &Folded, execution: Execution) -> Result<Solution> {
    let n = f.num_free();
    if n == 0 {
        return Ok(f.solution(g, &[], Method::Explicit, true));
    }
    if n > 62 {
        return Err(Error::EnumerationCap { free: n, cap: 62 });
    }
    let adj = f.adjacency();
    let p = n.min(PREFIX_BITS);
    let chunks = execution.map_range(1 << p, |prefix| scan(f, &adj, n, p, prefix as u64));
    let (_, key) = chunks.into_iter().min().expect("at least one chunk");
    Ok(f.solution(g, &decode(key, n), Method::Enumeration, true))
}

/// Group `i` sits at bit `n - 1 - i`, so the key orders assignments
/// lexicographically with `Up` before `Down`.
fn decode(key: u64, n: usize) -> Vec<Spin> {
    (0..n).map(|i| Spin::from_sign(key >> (n - 1 - i) & 1 == 0)).collect()
}

/// Best `(energy, key)` among assignments whose first `p` groups spell `prefix`.
fn scan(f: &Folded, adj: &[Vec<(usize, i128)>], n: usize, p: usize, prefix: u64) -> (i128, u64) {
    let mut x: Vec<Spin> = (0..n)
        .map(|i| if i < p { Spin::from_sign(prefix >> (p - 1 - i) & 1 == 0) } else { Spin::Up })
        .collect();
    let mut key = prefix << (n - p);
    let mut energy = f.energy(&x);
    let mut best = (energy, key);
    let rest = n - p;
    for step in 1u64..(1u64 << rest) {
        // flip the group whose bit is the lowest set bit of `step`
        let i = n - 1 - step.trailing_zeros() as usize;
        let old = x[i];
        let new = -old;
        let mut delta = f.unary[i][new.slot()] - f.unary[i][old.slot()];
        for &(k, c) in &adj[i] {
            if x[k] == old {
                delta += c;
            } else {
                delta -= c;
            }
        }
        x[i] = new;
        energy += delta;
        key ^= 1 << (n - 1 - i);
        if (energy, key) < best {
            best = (energy, key);
        }
    }
    best
}
