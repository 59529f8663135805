//! Smith normal form of small integer matrices, used to read off the rank
//! and index of displacement subgroups of `Z^d`.

/// Invariant factors `d_1 | d_2 | ... | d_r` (all positive) of the integer
/// matrix with the given rows and `cols` columns.
pub fn invariant_factors(rows: &[Vec<i128>], cols: usize) -> Vec<i128> {
    let mut a: Vec<Vec<i128>> = rows.iter().filter(|r| r.iter().any(|&x| x != 0)).cloned().collect();
    let m = a.len();
    let n = cols;
    let mut out = Vec::new();
    let mut t = 0;
    while t < m.min(n) {
        // smallest nonzero pivot in the trailing block
        let Some((pi, pj)) = min_nonzero(&a, t) else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..m {
                if a[i][t] != 0 {
                    let q = a[i][t].div_euclid(a[t][t]);
                    for j in t..n {
                        a[i][j] -= q * a[t][j];
                    }
                    if a[i][t] != 0 {
                        dirty = true;
                    }
                }
            }
            for j in t + 1..n {
                if a[t][j] != 0 {
                    let q = a[t][j].div_euclid(a[t][t]);
                    for row in a.iter_mut().skip(t) {
                        row[j] -= q * row[t];
                    }
                    if a[t][j] != 0 {
                        dirty = true;
                    }
                }
            }
            if dirty {
                let (pi, pj) = min_in_cross(&a, t);
                a.swap(t, pi);
                for row in a.iter_mut() {
                    row.swap(t, pj);
                }
                continue;
            }
            // pivot must divide the rest of the block
            let p = a[t][t];
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| a[i][j] % p != 0));
            match bad {
                Some(i) => {
                    for j in t..n {
                        a[t][j] += a[i][j];
                    }
                }
                None => break,
            }
        }
        out.push(a[t][t].abs());
        t += 1;
    }
    out
}

fn min_nonzero(a: &[Vec<i128>], t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(i128, usize, usize)> = None;
    for (i, row) in a.iter().enumerate().skip(t) {
        for (j, &x) in row.iter().enumerate().skip(t) {
            if x != 0 && best.is_none_or(|(b, _, _)| x.abs() < b) {
                best = Some((x.abs(), i, j));
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

/// Smallest nonzero entry in row `t` or column `t` of the trailing block.
fn min_in_cross(a: &[Vec<i128>], t: usize) -> (usize, usize) {
    let mut best = (a[t][t].abs(), t, t);
    for (i, row) in a.iter().enumerate().skip(t) {
        let x = row[t].abs();
        if x != 0 && (best.0 == 0 || x < best.0) {
            best = (x, i, t);
        }
    }
    for (j, &x) in a[t].iter().enumerate().skip(t) {
        let x = x.abs();
        if x != 0 && (best.0 == 0 || x < best.0) {
            best = (x, t, j);
        }
    }
    (best.1, best.2)
}
