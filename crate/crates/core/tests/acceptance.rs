//! Acceptance criteria, one PASS/FAIL line each.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spinhom::bulk_density::{all_spin_vectors, phi_m, phi_periodic, phi_tilde_m, PhiTable};
use spinhom::connectivity::{classify, coarsening_side, sandwich_constant, ConnectivitySummary};
use spinhom::exec::Execution;
use spinhom::fixtures;
use spinhom::gamma_limit::{broken_bonds, converge_report, extend, f_hom, DomainSpec, MultiphaseField, PhaseTarget, SpinField};
use spinhom::ground_state::{minimize_cut, minimize_enum, Method, SolveOptions};
use spinhom::rational::{format, int, ratio, to_f64};
use spinhom::surface_tension::SurfaceTable;
use spinhom::{LatticeModel, Rational, Spin};

use common::{submodular_instance, valid_model, WeakSigns};

const UP: Spin = Spin::Up;
const DN: Spin = Spin::Down;

type Outcome = (bool, String);

fn load(text: &str) -> (LatticeModel, ConnectivitySummary) {
    let m = LatticeModel::from_json(text).unwrap();
    assert!(m.validate().passed);
    let s = classify(&m);
    (m, s)
}

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn close(a: &Rational, target: f64, tol: f64) -> bool {
    (to_f64(a) - target).abs() <= tol
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (m, s) = load(fixtures::M1);
    let mut ok = true;
    let mut notes = Vec::new();
    for (z, exact) in [(UP, int(0)), (DN, ratio(7, 5))] {
        let z = [z];
        let target = to_f64(&exact);
        let lo = phi_m(&m, &s, &z, 64, &opts()).unwrap();
        let tilde = phi_tilde_m(&m, &s, &z, 64, &opts()).unwrap();
        let psi = phi_periodic(&m, &s, &z, 64, &opts()).unwrap();
        let near = close(&lo, target, 0.05) && close(&tilde, target, 0.05);
        let contains = lo <= exact && exact <= psi;
        ok &= near && contains;
        notes.push(format!(
            "z={} phi_64={} phi~_64={} psi_64={} target={}",
            z[0],
            format(&lo),
            format(&tilde),
            format(&psi),
            format(&exact)
        ));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(1);
    (ok, format!("{} ({elapsed:.2?})", notes.join("; ")))
}

fn criterion_2() -> Outcome {
    let (m, s) = load(fixtures::M1_ANTIFERRO);
    let table = PhiTable::compute(&m, &s, &all_spin_vectors(1), &[16, 32, 64], &opts()).unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    for row in &table.rows {
        ok &= (row.estimate + 1.0).abs() <= 0.05;
        notes.push(format!("z={} estimate={}", row.z[0], row.estimate));
    }
    (ok, notes.join("; "))
}

fn criterion_3() -> Outcome {
    let (m, s) = load(fixtures::M2);
    let zs = vec![vec![UP, DN], vec![UP, UP], vec![DN, UP], vec![DN, DN]];
    let phi = PhiTable::compute(&m, &s, &zs, &[16, 32, 64], &opts()).unwrap();
    let mixed = phi.get(&[UP, DN]).unwrap();
    let aligned = &phi.rows[1];
    let aligned_exact = aligned.lower == int(0) && aligned.upper == int(0) && aligned.entries.iter().all(|e| e.phi == int(0));
    let surface = SurfaceTable::compute(&m, &s, &[1, 2], &[vec![1]], &[2, 4, 8], Execution::Parallel).unwrap();
    let a1 = &surface.rows[0].estimate;
    let a2 = &surface.rows[1].estimate;
    // both phases jump at x = 1/2, from -1 to +1
    let target = MultiphaseField::new(vec![
        PhaseTarget::Slab { normal: vec![int(1)], offset: ratio(1, 2) },
        PhaseTarget::Slab { normal: vec![int(1)], offset: ratio(1, 2) },
    ]);
    let total = f_hom(&DomainSpec::unit_cube(1), &target, &surface, &phi).unwrap().total;
    let sum = to_f64(&(a1 + a2));
    let ok = (mixed - 1.0).abs() <= 0.05 && aligned_exact && total == sum;
    (ok, format!("phi(+1,-1)={mixed} phi(+1,+1)=0 exact: {aligned_exact}; f_hom total={total} alpha1+alpha2={sum}"))
}

fn criterion_4() -> Outcome {
    let (m, s) = load(fixtures::M3);
    let table = PhiTable::compute(&m, &s, &[vec![UP], vec![DN]], &[16, 32, 64], &opts()).unwrap();
    let plus = &table.rows[0];
    let minus = table.rows[1].estimate;
    let ok = plus.upper == int(0) && plus.lower == int(0) && (minus - 3.25).abs() <= 0.05;
    (ok, format!("phi(+1)={} phi(-1)={minus}", format(&plus.upper)))
}

/// Successive values never rise by more than `slack`.
fn monotone_ish(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + slack)
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let (m, s) = load(fixtures::FIG8);
    let table = SurfaceTable::compute(&m, &s, &[1], &[vec![1, 0]], &[8, 16, 32], Execution::Parallel).unwrap();
    let elapsed = start.elapsed();
    let cells = &table.rows[0].cells;
    let values: Vec<f64> = cells.iter().map(|c| c.value_f64).collect();
    let by_cut = cells.iter().all(|c| c.method == Some(Method::Mincut));
    let last = *values.last().unwrap();
    let ok = monotone_ish(&values, 0.05) && (last - 0.5).abs() <= 0.05 && by_cut && elapsed < Duration::from_secs(30);
    (ok, format!("f_T(e1) for T=8,16,32: {values:?}, min-cut: {by_cut} ({elapsed:.2?})"))
}

fn criterion_6() -> Outcome {
    let (m, s) = load(fixtures::FIG9);
    let t_list = [8, 16, 32, 64];
    let table = SurfaceTable::compute(&m, &s, &[1], &[vec![1, 0], vec![1, 1]], &t_list, Execution::Parallel).unwrap();
    let alpha = 1.0;
    let mut ok = true;
    let mut notes = Vec::new();
    for (row, target) in table.rows.iter().zip([alpha, alpha / 2f64.sqrt()]) {
        let values: Vec<f64> = row.cells.iter().map(|c| c.value_f64).collect();
        ok &= (row.estimate_f64 - target).abs() <= 0.05 * alpha;
        notes.push(format!("nu={:?}: {values:?} target {target:.4}", row.normal));
    }
    (ok, notes.join("; "))
}

#[derive(Default)]
struct Inequalities {
    checked: usize,
    tilde_below: Vec<String>,
    sandwich: Vec<String>,
    doubling: Vec<String>,
    /// Doubling violations on models whose weak weights are all nonnegative.
    doubling_nonnegative: usize,
}

fn has_negative_weak_weight(m: &LatticeModel) -> bool {
    (0..m.num_residues()).any(|r| m.weak_bonds(r).iter().any(|b| b.weight < int(0)))
}

fn structural(name: &str, m: &LatticeModel, s: &ConnectivitySummary, out: &mut Inequalities) -> spinhom::Result<()> {
    let t = m.period();
    let chain = [2 * t, 4 * t, 8 * t];
    let c = sandwich_constant(m, s);
    let negative = has_negative_weak_weight(m);
    for z in all_spin_vectors(m.num_phases()) {
        let mut phis = Vec::new();
        for &mm in &chain {
            let lo = phi_m(m, s, &z, mm, &opts())?;
            let tilde = phi_tilde_m(m, s, &z, mm, &opts())?;
            let zs: Vec<i64> = z.iter().map(|x| x.value()).collect();
            if tilde < lo {
                out.tilde_below.push(format!("{name} z={zs:?} M={mm}"));
            }
            if lo < &tilde - &c / Rational::from_integer(mm.into()) {
                out.sandwich.push(format!("{name} z={zs:?} M={mm}"));
            }
            phis.push((mm, lo));
            out.checked += 1;
        }
        for i in 0..phis.len() {
            for j in i + 1..phis.len() {
                if phis[j].1 < phis[i].1 {
                    if !negative {
                        out.doubling_nonnegative += 1;
                    }
                    let zs: Vec<i64> = z.iter().map(|x| x.value()).collect();
                    out.doubling.push(format!(
                        "{name} z={zs:?} phi_{}={} < phi_{}={}",
                        phis[j].0,
                        format(&phis[j].1),
                        phis[i].0,
                        format(&phis[i].1)
                    ));
                }
            }
        }
    }
    Ok(())
}

fn criterion_7() -> Outcome {
    let mut out = Inequalities::default();
    for (name, text) in fixtures::ALL_MODELS {
        let (m, s) = load(text);
        structural(name, &m, &s, &mut out).unwrap();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut random = 0;
    let mut attempts = 0;
    while random < 50 {
        attempts += 1;
        let d = if random % 5 == 4 { 2 } else { 1 };
        let m = valid_model(&mut rng, d, WeakSigns::Any);
        let s = classify(&m);
        let mut trial = Inequalities::default();
        // models whose problems no exact solver accepts are drawn again
        if structural(&format!("random#{random}"), &m, &s, &mut trial).is_ok() {
            out.checked += trial.checked;
            out.tilde_below.extend(trial.tilde_below);
            out.sandwich.extend(trial.sandwich);
            out.doubling.extend(trial.doubling);
            out.doubling_nonnegative += trial.doubling_nonnegative;
            random += 1;
        }
    }
    let ok = out.tilde_below.is_empty() && out.sandwich.is_empty() && out.doubling.is_empty();
    let mut detail = format!(
        "{} (z, M) values on {} fixtures + 50 random models ({attempts} drawn): phi~>=phi violations {}, sandwich violations {}, doubling violations {} ({} on models without negative weak weights)",
        out.checked,
        fixtures::ALL_MODELS.len(),
        out.tilde_below.len(),
        out.sandwich.len(),
        out.doubling.len(),
        out.doubling_nonnegative
    );
    for v in out.tilde_below.iter().chain(&out.sandwich).chain(&out.doubling).take(12) {
        detail.push_str(&format!("\n    {v}"));
    }
    (ok, detail)
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut mismatches = 0;
    for _ in 0..200 {
        let g = submodular_instance(&mut rng, 16);
        let cut = minimize_cut(&g).unwrap();
        let en = minimize_enum(&g, 24, Execution::Sequential).unwrap();
        let recomputed = g.energy(&cut.assignment).unwrap();
        if cut.energy != en.energy || recomputed != cut.energy {
            mismatches += 1;
        }
    }
    (mismatches == 0, format!("200 instances, {mismatches} mismatches"))
}

/// A random field with a few features: slabs, boxes and isolated flips.
fn random_field(rng: &mut ChaCha8Rng, omega: &DomainSpec, eps: Rational) -> SpinField {
    use rand::Rng;
    let d = omega.dimension();
    let n = (to_f64(&omega.hi[0]) / to_f64(&eps)).round() as i64;
    let boxes: Vec<(Vec<i64>, Vec<i64>)> = (0..rng.random_range(0..4))
        .map(|_| {
            let lo: Vec<i64> = (0..d).map(|_| rng.random_range(0..n)).collect();
            let hi: Vec<i64> = lo.iter().map(|&a| a + rng.random_range(1..=n / 2)).collect();
            (lo, hi)
        })
        .collect();
    let cut = rng.random_range(0..n);
    let noise = [0.0, 0.002, 0.01].get(rng.random_range(0..3usize)).copied().unwrap();
    let base = rng.random_bool(0.5);
    let mut field = SpinField::from_fn(omega, eps, |k| {
        let in_box = boxes.iter().any(|(lo, hi)| k.iter().zip(lo).zip(hi).all(|((x, a), b)| a <= x && x < b));
        Spin::from_sign((k[0] >= cut) ^ in_box ^ base)
    })
    .unwrap();
    for s in field.spins.iter_mut() {
        if rng.random_bool(noise) {
            *s = -*s;
        }
    }
    field
}

fn criterion_9() -> Outcome {
    let cases: Vec<(&str, usize, Rational)> = vec![("m1", 1, ratio(1, 96)), ("m2", 2, ratio(1, 96)), ("fig8", 1, ratio(1, 40)), ("fig9", 1, ratio(1, 40))];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bad = Vec::new();
    let mut max_ratio: f64 = 0.0;
    for i in 0..100 {
        let (name, j, eps) = &cases[i % cases.len()];
        let (m, s) = load(fixtures::by_name(name).unwrap());
        let d = m.dimension();
        let t = m.period();
        let m0 = coarsening_side(&m, &s, *j, None).unwrap();
        let side = ((m0 + t - 1) / t) * t;
        let omega = DomainSpec::unit_cube(d);
        let field = random_field(&mut rng, &omega, eps.clone());
        let k = broken_bonds(&m, &s, *j, &field);
        let e = extend(&m, &s, *j, &field, side).unwrap();
        let bound = 3usize.pow(d as u32) * k;
        if k > 0 {
            max_ratio = max_ratio.max(e.summary.marked as f64 / k as f64);
        }
        if e.summary.marked > bound {
            bad.push(format!("{name} #{i}: #S={} > 3^d K={bound}", e.summary.marked));
        }
        let again = extend(&m, &s, *j, &e.field, side).unwrap();
        if again.field != e.field {
            bad.push(format!("{name} #{i}: not idempotent"));
        }
        let margin = 3 * side;
        let sites = &field.sites;
        for (idx, k) in sites.iter().enumerate() {
            let interior = (0..d).all(|a| k[a] - sites.lo[a] >= margin && sites.lo[a] + sites.shape[a] as i64 - 1 - k[a] >= margin);
            if interior && s.is_in(&m, *j, &k) && e.field.spins[idx] != field.spins[idx] {
                bad.push(format!("{name} #{i}: changed C_j site {k:?}"));
                break;
            }
        }
    }
    let detail = format!("100 fields, largest #S/K = {max_ratio:.3}, {} failures{}", bad.len(), bad.iter().take(5).map(|b| format!("\n    {b}")).collect::<String>());
    (bad.is_empty(), detail)
}

fn criterion_10() -> Outcome {
    let (m, s) = load(fixtures::M1);
    let surface = SurfaceTable::compute(&m, &s, &[1], &[vec![1]], &[2, 4, 8], Execution::Parallel).unwrap();
    let phi = PhiTable::compute(&m, &s, &all_spin_vectors(1), &[16, 32, 64], &opts()).unwrap();
    let target = MultiphaseField::new(vec![PhaseTarget::Slab { normal: vec![int(1)], offset: ratio(1, 3) }]);
    let eps = [ratio(1, 32), ratio(1, 64), ratio(1, 128)];
    let r = converge_report(&m, &s, &DomainSpec::unit_cube(1), &target, &eps, 8, &surface, &phi, &opts()).unwrap();
    let rel = r.final_relative_gap().unwrap();
    let gaps: Vec<f64> = r.rows.iter().map(|row| row.gap).collect();
    let ok = r.decreasing && rel <= 0.10;
    (ok, format!("F_hom={:.6}, gaps {gaps:?}, final relative gap {:.4}", r.reference, rel))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "single-phase bulk bracket", criterion_1),
        (2, "antiferromagnetic bulk density", criterion_2),
        (3, "two-phase bulk density and jump cost", criterion_3),
        (4, "three-branch bulk density", criterion_4),
        (5, "square-net surface tension", criterion_5),
        (6, "diagonal-net surface tension", criterion_6),
        (7, "structural inequalities", criterion_7),
        (8, "min-cut against enumeration", criterion_8),
        (9, "extension operator", criterion_9),
        (10, "convergence harness", criterion_10),
    ];
    let mut failed = 0;
    for (n, label, f) in criteria {
        let (pass, detail) = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(r) => r,
            Err(e) => {
                let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        if !pass {
            failed += 1;
        }
        println!("criterion {n:>2} {}: {label}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
