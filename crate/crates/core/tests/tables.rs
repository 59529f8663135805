mod common;

use num_traits::Signed;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spinhom::bulk_density::{all_spin_vectors, phi_m, phi_tilde_m, solve_variant, Variant};
use spinhom::connectivity::{classify, sandwich_constant, ConnectivitySummary};
use spinhom::exec::Execution;
use spinhom::fixtures;
use spinhom::ground_state::{minimize_cut, minimize_enum, Method, SolveOptions};
use spinhom::rational::{int, ratio};
use spinhom::lattice::add;
use spinhom::surface_tension::{cell_instance, cell_value, RotatedCube};
use spinhom::{LatticeModel, Rational};

use common::{valid_model, WeakSigns};

fn load(text: &str) -> (LatticeModel, ConnectivitySummary) {
    let m = LatticeModel::from_json(text).unwrap();
    let s = classify(&m);
    (m, s)
}

fn normal(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

#[test]
fn surface_tension_is_even_and_positive_on_planar_fixtures() {
    for text in [fixtures::FIG8, fixtures::FIG9] {
        let (m, s) = load(text);
        for nu in [[1, 0], [0, 1], [1, 1], [1, -1], [2, 1], [1, 3]] {
            for t in [4, 8, 12] {
                let a = cell_value(&m, &s, 1, &normal(&nu), t).unwrap();
                let b = cell_value(&m, &s, 1, &normal(&[-nu[0], -nu[1]]), t).unwrap();
                assert_eq!(a.value, b.value, "nu {nu:?} T {t}");
                assert!(a.value > int(0));
            }
        }
    }
}

#[test]
fn surface_tension_depends_on_direction_only() {
    let (m, s) = load(fixtures::FIG9);
    for (nu, scaled) in [(vec![int(1), int(0)], vec![int(3), int(0)]), (vec![int(1), int(1)], vec![ratio(1, 2), ratio(1, 2)]), (vec![int(2), int(1)], vec![int(4), int(2)])] {
        let a = cell_value(&m, &s, 1, &nu, 8).unwrap();
        let b = cell_value(&m, &s, 1, &scaled, 8).unwrap();
        assert_eq!(a.value, b.value);
    }
}

#[test]
fn one_dimensional_cell_values_do_not_depend_on_the_cell() {
    for text in [fixtures::M1, fixtures::M3] {
        let (m, s) = load(text);
        let values: Vec<Rational> = [2, 4, 8, 16, 32].iter().map(|&t| cell_value(&m, &s, 1, &[int(1)], t).unwrap().value).collect();
        assert!(values.windows(2).all(|w| w[0] == w[1]), "{values:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn small_cells_agree_with_enumeration(seed in any::<u64>(), nu in prop::sample::select(vec![[1i64, 0], [0, 1], [1, 1], [2, -1]])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = valid_model(&mut rng, 2, WeakSigns::Any);
        let s = classify(&m);
        for t in [2, 4] {
            let (g, free) = cell_instance(&m, &s, 1, &nu, t).unwrap();
            if free.len() <= 20 {
                let cut = minimize_cut(&g).unwrap();
                let en = minimize_enum(&g, 24, Execution::Sequential).unwrap();
                prop_assert_eq!(&cut.energy, &en.energy);
                prop_assert_eq!(g.energy(&cut.assignment).unwrap(), cut.energy);
            }
        }
    }

    /// Fixing the tied sites `<k, ν> = 0` to `-1` on both sides breaks the
    /// exact `ν -> -ν` symmetry; the two minima differ by at most the cost
    /// of the bonds reaching those sites.
    #[test]
    fn random_surface_tension_is_even_up_to_tied_sites(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = valid_model(&mut rng, 2, WeakSigns::Any);
        let s = classify(&m);
        let t = 6;
        for nu in [[1i64, 0], [1, 1], [1, -2]] {
            let a = cell_value(&m, &s, 1, &normal(&nu), t).unwrap();
            let b = cell_value(&m, &s, 1, &normal(&[-nu[0], -nu[1]]), t).unwrap();
            prop_assert!(a.value > int(0));
            let cube = RotatedCube::new(&nu, t);
            let mut tied = int(0);
            for k in cube.sites().iter().filter(|k| s.is_in(&m, 1, k)) {
                for bond in m.strong_bonds(m.residue_index(k)) {
                    let k2 = add(k, &bond.offset);
                    if !cube.contains(&k2) && k2[0] * nu[0] + k2[1] * nu[1] == 0 {
                        tied += int(8) * &bond.weight;
                    }
                }
            }
            let gap = (&a.value - &b.value).abs() * int(t);
            prop_assert!(gap <= tied, "nu {:?}: gap {} above tied-bond cost {}", nu, gap, tied);
        }
    }

    /// With nonnegative weak weights every inequality between the finite
    /// bulk problems holds, doubling monotonicity included.
    #[test]
    fn bulk_inequalities_for_nonnegative_weights(seed in any::<u64>(), d in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = valid_model(&mut rng, d, WeakSigns::NonNegative);
        let s = classify(&m);
        let t = m.period();
        let c = sandwich_constant(&m, &s);
        let o = SolveOptions::default();
        for z in all_spin_vectors(m.num_phases()) {
            let mut previous: Option<Rational> = None;
            // Q_{2M} is tiled by translates of Q_M by multiples of T only from M = 2T on
            for mm in [2 * t, 4 * t, 8 * t] {
                let lo = phi_m(&m, &s, &z, mm, &o).unwrap();
                let tilde = phi_tilde_m(&m, &s, &z, mm, &o).unwrap();
                prop_assert!(tilde >= lo);
                prop_assert!(lo >= &tilde - &c / Rational::from_integer(mm.into()));
                if let Some(p) = previous {
                    prop_assert!(lo >= p, "z {:?} M {}", z, mm);
                }
                previous = Some(lo);
            }
        }
    }
}

#[test]
fn flip_symmetric_fixture_has_even_bulk_density() {
    let (m, s) = load(fixtures::M1_ANTIFERRO);
    let o = SolveOptions::default();
    for mm in [4, 8, 16, 32] {
        let a = phi_m(&m, &s, &[spinhom::Spin::Up], mm, &o).unwrap();
        let b = phi_m(&m, &s, &[spinhom::Spin::Down], mm, &o).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn no_free_variables_means_explicit_evaluation() {
    let (m, s) = load(fixtures::M2);
    for z in all_spin_vectors(2) {
        for v in [Variant::Cube, Variant::Constrained, Variant::Periodic] {
            let sol = solve_variant(&m, &s, &z, 8, v, &SolveOptions::default()).unwrap();
            assert_eq!(sol.method, Method::Explicit);
        }
    }
}
