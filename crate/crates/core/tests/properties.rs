use std::collections::BTreeSet;
use std::ops::ControlFlow;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use reptile_core::cardinality::count_tilings_formula;
use reptile_core::exact_cover::{build_cover_instance, enumerate_exact_covers, sample_exact_cover, EnumerationLimits};
use reptile_core::geometry::{check_tileability, Cell, Clustering, GridSpec, TileFamily, TilePlacement};
use reptile_core::pattern::field::PatternGrid;
use reptile_core::pattern::metrics::violations;
use reptile_core::pattern::{array_factor, cluster_excitations, element_array_factor, gamma, matching_residual, Mask, PhaseMean, WeightSet};

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        ..ProptestConfig::default()
    }
}

fn family() -> impl Strategy<Value = TileFamily> {
    prop_oneof![Just(TileFamily::LTromino), Just(TileFamily::Square)]
}

fn placement(max_order: u32) -> impl Strategy<Value = TilePlacement> {
    (family(), 1..=max_order, 0u8..4, 0usize..20, 0usize..20).prop_map(|(f, r, b, i, j)| {
        TilePlacement::new(f, r, b % f.orientations(), (i, j)).unwrap()
    })
}

fn cell_set(tiles: &[TilePlacement]) -> (BTreeSet<Cell>, usize) {
    let mut set = BTreeSet::new();
    let mut total = 0;
    for t in tiles {
        for c in t.cells() {
            set.insert(c);
            total += 1;
        }
    }
    (set, total)
}

fn leaves(tile: TilePlacement) -> Vec<TilePlacement> {
    if tile.order == 1 {
        return vec![tile];
    }
    tile.subdivide().unwrap().into_iter().flat_map(leaves).collect()
}

/// A random order-`order` tiling of `grid`, drawn from the seed.
fn random_tiling(grid: GridSpec, order: u32, seed: u64) -> Clustering {
    let inst = build_cover_instance(&grid, TileFamily::LTromino, &[order]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = sample_exact_cover(&inst, &mut rng, 1_000_000).expect("tileable grid");
    inst.clustering(&rows).unwrap()
}

/// Split `splits` random splittable tiles of an order-2 tiling of an 8 x 12 grid.
fn random_mixed_clustering(seed: u64, splits: &[usize]) -> Clustering {
    let mut c = random_tiling(GridSpec::half_wave(8, 12).unwrap(), 2, seed);
    for &k in splits {
        let splittable: Vec<usize> = (0..c.len()).filter(|&q| c.tiles()[q].order >= 2).collect();
        if splittable.is_empty() {
            break;
        }
        c = c.split(splittable[k % splittable.len()]).unwrap();
    }
    c
}

fn real_reference(grid: GridSpec, amps: &[f64]) -> WeightSet {
    WeightSet::new(grid, amps.to_vec(), vec![0.0; grid.len()]).unwrap()
}

proptest! {
    #![proptest_config(cases(256))]

    #[test]
    fn subdivision_partitions_the_parent(tile in placement(5).prop_filter("splittable", |t| t.order >= 2)) {
        let children = tile.subdivide().unwrap();
        let (union, total) = cell_set(&children);
        let parent: BTreeSet<Cell> = tile.cells().into_iter().collect();
        prop_assert_eq!(total, parent.len());
        prop_assert_eq!(union, parent);
        for child in children {
            prop_assert_eq!(child.order, tile.order - 1);
            prop_assert_eq!(child.family, tile.family);
        }
    }

    #[test]
    fn full_subdivision_reaches_order_one(tile in placement(5)) {
        let base = leaves(tile);
        prop_assert_eq!(base.len(), 4usize.pow(tile.order - 1));
        let (union, total) = cell_set(&base);
        let parent: BTreeSet<Cell> = tile.cells().into_iter().collect();
        prop_assert_eq!(total, parent.len());
        prop_assert_eq!(union, parent);
        for leaf in base {
            prop_assert_eq!(TilePlacement::recognize(tile.family, &leaf.cells()), Some(leaf));
        }
    }

    #[test]
    fn orientation_is_a_quarter_turn(order in 1u32..=5, b in 0u8..4) {
        let n = TileFamily::LTromino.bbox_side(order);
        let turn = |c: Cell| (c.1, n - 1 - c.0);
        let tile = TilePlacement::new(TileFamily::LTromino, order, b, (0, 0)).unwrap();
        let next = TilePlacement::new(TileFamily::LTromino, order, (b + 1) % 4, (0, 0)).unwrap();
        let turned: BTreeSet<Cell> = tile.cells().into_iter().map(turn).collect();
        prop_assert_eq!(turned, next.cells().into_iter().collect::<BTreeSet<_>>());

        if order >= 2 {
            // subdividing then turning matches turning then subdividing
            let a: BTreeSet<Vec<Cell>> = tile
                .subdivide()
                .unwrap()
                .iter()
                .map(|c| {
                    let mut v: Vec<Cell> = c.cells().into_iter().map(turn).collect();
                    v.sort_unstable();
                    v
                })
                .collect();
            let b: BTreeSet<Vec<Cell>> = next.subdivide().unwrap().iter().map(|c| c.cells()).collect();
            prop_assert_eq!(a, b);
        }
    }
}

proptest! {
    #![proptest_config(cases(128))]

    #[test]
    fn theorem_matches_exhaustive_search(order in 1u32..=2, rows in 1usize..=10, cols in 1usize..=10) {
        let grid = GridSpec::half_wave(rows, cols).unwrap();
        let verdict = check_tileability(&grid, order, TileFamily::LTromino).unwrap();
        let inst = build_cover_instance(&grid, TileFamily::LTromino, &[order]).unwrap();
        let limits = EnumerationLimits { max_solutions: Some(1), ..EnumerationLimits::default() };
        let outcome = enumerate_exact_covers(&inst, &limits, |_| ControlFlow::Continue(())).unwrap();
        prop_assert_eq!(verdict.tileable, outcome.solutions > 0, "{}x{} order {}: {:?}", rows, cols, order, verdict.reason);
    }

    #[test]
    fn count_formula_is_transpose_invariant(a in 2u32..=7, b in 2u32..=7) {
        prop_assert_eq!(count_tilings_formula(a, b).unwrap(), count_tilings_formula(b, a).unwrap());
    }

    #[test]
    fn splitting_never_raises_the_residual(
        seed in any::<u64>(),
        splits in proptest::collection::vec(any::<usize>(), 0..4),
        pick in any::<usize>(),
        amps in proptest::collection::vec(0.05f64..2.0, 96),
    ) {
        let c = random_mixed_clustering(seed, &splits);
        let reference = real_reference(*c.grid(), &amps);
        let splittable: Vec<usize> = (0..c.len()).filter(|&q| c.tiles()[q].order >= 2).collect();
        prop_assume!(!splittable.is_empty());
        let finer = c.split(splittable[pick % splittable.len()]).unwrap();
        let before = matching_residual(&reference, &c, &cluster_excitations(&reference, &c, PhaseMean::Arithmetic).unwrap());
        let after = matching_residual(&reference, &finer, &cluster_excitations(&reference, &finer, PhaseMean::Arithmetic).unwrap());
        prop_assert!(after <= before * (1.0 + 1e-12) + 1e-15, "{} -> {}", before, after);
        prop_assert_eq!(finer.len(), c.len() + 3);
        prop_assert!(finer.validate().is_valid());
    }

    #[test]
    fn cluster_mean_is_least_squares_optimal(
        seed in any::<u64>(),
        amps in proptest::collection::vec(0.05f64..2.0, 96),
        q in any::<usize>(),
        delta in -0.2f64..0.2,
    ) {
        let c = random_mixed_clustering(seed, &[seed as usize]);
        let reference = real_reference(*c.grid(), &amps);
        let mut w = cluster_excitations(&reference, &c, PhaseMean::Arithmetic).unwrap();
        let base = matching_residual(&reference, &c, &w);
        let q = q % c.len();
        w.alpha[q] += delta;
        prop_assert!(matching_residual(&reference, &c, &w) >= base - 1e-12);
    }

    #[test]
    fn regrouped_array_factor_matches_element_sum(
        seed in any::<u64>(),
        splits in proptest::collection::vec(any::<usize>(), 0..5),
        amps in proptest::collection::vec(0.0f64..2.0, 96),
        phases in proptest::collection::vec(-3.1f64..3.1, 96),
        u in -1.0f64..1.0,
        v in -1.0f64..1.0,
    ) {
        let c = random_mixed_clustering(seed, &splits);
        let reference = WeightSet::new(*c.grid(), amps, phases).unwrap();
        let w = cluster_excitations(&reference, &c, PhaseMean::Circular).unwrap();
        let clustered = array_factor(&c, &w, u, v);
        let direct = element_array_factor(c.grid(), &w.expand(&c), u, v);
        let scale: f64 = w.expand(&c).iter().map(|x| x.norm()).sum::<f64>().max(1e-300);
        prop_assert!((clustered - direct).norm() <= 1e-12 * scale, "{} vs {}", clustered, direct);
    }

    #[test]
    fn gamma_vanishes_exactly_without_violations(
        values in proptest::collection::vec(0.0f64..1.0, 64 * 64),
        level_db in -40.0f64..0.0,
        bw in 0.05f64..0.6,
    ) {
        let p = PatternGrid::from_raw(64, values).unwrap();
        let mask = Mask::new((0.0, 0.0), bw, bw, Vec::new(), 10f64.powf(level_db / 10.0)).unwrap();
        let g = gamma(&p, &mask);
        prop_assert!(g >= 0.0);
        prop_assert_eq!(g == 0.0, violations(&p, &mask) == 0);
    }
}

proptest! {
    #![proptest_config(cases(100))]

    #[test]
    fn gamma_of_random_arrays_vanishes_without_violations(
        seed in any::<u64>(),
        amps in proptest::collection::vec(0.05f64..1.0, 96),
        level_db in -30.0f64..-5.0,
    ) {
        let c = random_mixed_clustering(seed, &[]);
        let reference = real_reference(*c.grid(), &amps);
        let w = cluster_excitations(&reference, &c, PhaseMean::Arithmetic).unwrap();
        let el = reptile_core::pattern::ElementPattern::Isotropic;
        let p = reptile_core::pattern::Aperture::clustered(&c, &w, &el).sample(64).unwrap();
        let mask = Mask::new((0.0, 0.0), 0.5, 0.76, Vec::new(), 10f64.powf(level_db / 10.0)).unwrap();
        prop_assert_eq!(gamma(&p, &mask) == 0.0, violations(&p, &mask) == 0);
    }
}

proptest! {
    #![proptest_config(cases(100))]

    #[test]
    fn synthesized_gamma_is_stable_under_grid_refinement(
        pedestal in 0.1f64..0.6,
        exponent in 1.0f64..3.0,
        level_db in -32.0f64..-22.0,
        bw_u in 0.4f64..0.8,
        bw_v in 0.6f64..1.0,
        q_max in prop_oneof![Just(11usize), Just(14), Just(17), Just(20)],
    ) {
        let grid = GridSpec::half_wave(8, 12).unwrap();
        let reference = WeightSet::raised_cosine(grid, pedestal, exponent).unwrap();
        let el = reptile_core::pattern::ElementPattern::Isotropic;
        let mask = Mask::new((0.0, 0.0), bw_u, bw_v, Vec::new(), 10f64.powf(level_db / 10.0)).unwrap();
        // masks designed for the reference; a mainlobe region narrower than the beam is not one
        let ideal = reptile_core::pattern::Aperture::new(grid, reference.complex(), &el).unwrap();
        prop_assume!(gamma(&ideal.sample(181).unwrap(), &mask) == 0.0);
        let mut config = reptile_core::rtam::RtamConfig::new(TileFamily::LTromino, 2, q_max);
        config.resolution = 181;
        let trace = reptile_core::rtam::run(&reference, &el, &mask, &config).unwrap();
        let last = trace.last();
        let ap = reptile_core::pattern::Aperture::clustered(&last.clustering, &last.weights, &el);
        let coarse = gamma(&ap.sample(181).unwrap(), &mask);
        let fine = gamma(&ap.sample(361).unwrap(), &mask);
        prop_assume!(fine > 1e-6);
        prop_assert!((coarse - fine).abs() < 0.01 * fine, "{} vs {}", coarse, fine);
    }
}

#[test]
fn zero_weights_are_rejected_as_a_pattern() {
    let grid = GridSpec::half_wave(2, 3).unwrap();
    let el = reptile_core::pattern::ElementPattern::Isotropic;
    let ap = reptile_core::pattern::Aperture::new(grid, vec![Complex64::new(0.0, 0.0); 6], &el).unwrap();
    assert!(ap.sample(64).is_err());
}
