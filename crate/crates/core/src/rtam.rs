//! Iterative rep-tile subdivision: pick the best order-R tiling, then keep splitting the tile
//! that deviates most from the reference excitations until the mask is met or the cluster
//! budget runs out.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cardinality::{count_tilings_formula, MAX_SIDE};
use crate::error::{Error, Result};
use crate::exact_cover::{build_cover_instance, collect_exact_covers, sample_exact_cover, EnumerationLimits};
use crate::geometry::{check_tileability, Clustering, GridSpec, TileFamily, MAX_ORDER};
use crate::pattern::element::ElementPattern;
use crate::pattern::field::Aperture;
use crate::pattern::mask::Mask;
use crate::pattern::metrics::GammaGrid;
use crate::pattern::weights::{cluster_excitations, ClusterWeights, PhaseMean, WeightSet};

/// Gamma below this counts as a fulfilled mask.
pub const GAMMA_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RtamConfig {
    pub family: TileFamily,
    /// Order `R` of the initial tiling.
    pub max_order: u32,
    /// Cluster budget `Q_max`.
    pub q_max: usize,
    pub resolution: usize,
    /// Enumerate every initial tiling when there are at most this many.
    pub enumeration_threshold: u64,
    /// Random initial tilings drawn when enumeration is too expensive.
    pub sample_budget: usize,
    pub seed: u64,
    pub phase_mean: PhaseMean,
    /// Move to order `R + 1` while the initial search space exceeds the threshold.
    pub raise_order: bool,
}

impl RtamConfig {
    pub fn new(family: TileFamily, max_order: u32, q_max: usize) -> Self {
        RtamConfig {
            family,
            max_order,
            q_max,
            resolution: 301,
            enumeration_threshold: 100_000,
            sample_budget: 10_000,
            seed: 0,
            phase_mean: PhaseMean::Arithmetic,
            raise_order: false,
        }
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let ceiling = grid.len() / self.family.base_cells();
        if self.q_max > ceiling {
            return Err(Error::param(format!(
                "Q_max = {} exceeds M*N/I(1) = {ceiling}",
                self.q_max
            )));
        }
        if self.max_order == 0 || self.max_order > MAX_ORDER {
            return Err(Error::param(format!("tile order must be in 1..={MAX_ORDER}, got {}", self.max_order)));
        }
        if self.sample_budget == 0 {
            return Err(Error::param("sample budget must be positive"));
        }
        Ok(())
    }
}

/// Everything needed to score a clustering against the mask.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    pub reference: &'a WeightSet,
    pub element: &'a ElementPattern,
    pub phase_mean: PhaseMean,
    gamma_grid: GammaGrid,
}

impl<'a> Objective<'a> {
    pub fn new(reference: &'a WeightSet, element: &'a ElementPattern, mask: &Mask, resolution: usize, phase_mean: PhaseMean) -> Self {
        Objective {
            reference,
            element,
            phase_mean,
            gamma_grid: GammaGrid::new(resolution, mask),
        }
    }

    pub fn weights(&self, clustering: &Clustering) -> Result<ClusterWeights> {
        cluster_excitations(self.reference, clustering, self.phase_mean)
    }

    pub fn gamma_with(&self, clustering: &Clustering, weights: &ClusterWeights) -> Result<f64> {
        let pattern = Aperture::clustered(clustering, weights, self.element).sample(self.gamma_grid.resolution())?;
        Ok(self.gamma_grid.eval(&pattern))
    }

    /// Gamma after excitation matching.
    pub fn gamma(&self, clustering: &Clustering) -> Result<f64> {
        self.gamma_with(clustering, &self.weights(clustering)?)
    }
}

/// Substitution tiling metric of every tile: `sum over members |w_ref - w_q|`.
pub fn stm(clustering: &Clustering, reference: &WeightSet, weights: &ClusterWeights) -> Vec<f64> {
    clustering
        .members()
        .iter()
        .enumerate()
        .map(|(q, members)| {
            let wq: Complex64 = weights.weight(q);
            members.iter().map(|&i| (reference.weight(i) - wq).norm()).sum()
        })
        .collect()
}

/// Tile (0-based) with the largest metric among tiles of order >= 2; ties go to the lowest id.
pub fn select_tile(clustering: &Clustering, xi: &[f64]) -> Result<usize> {
    let mut best: Option<usize> = None;
    for (q, tile) in clustering.tiles().iter().enumerate() {
        if tile.order < 2 {
            continue;
        }
        if best.is_none_or(|b| xi[q] > xi[b]) {
            best = Some(q);
        }
    }
    best.ok_or(Error::NoSplittableTile)
}

/// How the initial tiling was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialSearch {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone)]
pub struct InitialTiling {
    pub clustering: Clustering,
    pub order: u32,
    pub gamma: f64,
    /// Number of order-R tilings of the aperture, when known.
    pub tilings: Option<u128>,
    pub candidates_evaluated: usize,
    pub search: InitialSearch,
}

/// Number of order-`order` tilings of the grid, or `None` if too large to compute.
fn tiling_count(grid: &GridSpec, family: TileFamily, order: u32) -> Option<u128> {
    match family {
        TileFamily::Square => Some(1),
        TileFamily::LTromino => {
            let l = family.side(order);
            let (a, b) = (grid.rows / l, grid.cols / l);
            let (a, b) = (a.min(b) as u32, a.max(b) as u32);
            if a > MAX_SIDE {
                return None;
            }
            count_tilings_formula(a, b).ok()?.to_u128()
        }
    }
}

/// Step 1: the order-R tiling whose matched excitations give the smallest Gamma.
pub fn initial_tiling(grid: &GridSpec, objective: &Objective, config: &RtamConfig) -> Result<InitialTiling> {
    let mut order = config.max_order;
    let verdict = check_tileability(grid, order, config.family)?;
    if !verdict.tileable {
        return Err(Error::NotTileable {
            rows: grid.rows,
            cols: grid.cols,
            order,
            reason: verdict.reason,
        });
    }
    let mut tilings = tiling_count(grid, config.family, order);
    let too_many = |t: Option<u128>| t.is_none_or(|t| t > u128::from(config.enumeration_threshold));
    while config.raise_order && too_many(tilings) && order < MAX_ORDER {
        if !check_tileability(grid, order + 1, config.family)?.tileable {
            break;
        }
        order += 1;
        tilings = tiling_count(grid, config.family, order);
    }

    let inst = build_cover_instance(grid, config.family, &[order])?;
    let (solutions, search) = if too_many(tilings) {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let max_nodes = 1000 * inst.num_columns() as u64;
        let drawn: Vec<Vec<usize>> = (0..config.sample_budget)
            .filter_map(|_| sample_exact_cover(&inst, &mut rng, max_nodes))
            .collect();
        (drawn, InitialSearch::Sampled)
    } else {
        (collect_exact_covers(&inst, &EnumerationLimits::default())?.0, InitialSearch::Exhaustive)
    };
    if solutions.is_empty() {
        return Err(Error::param("no initial tiling found within the sampling budget"));
    }

    let scores = solutions
        .par_iter()
        .map(|rows| {
            let c = inst.clustering(rows)?.canonical();
            objective.gamma(&c)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (k, &g) in scores.iter().enumerate() {
        if g < scores[best] {
            best = k;
        }
    }
    Ok(InitialTiling {
        clustering: inst.clustering(&solutions[best])?.canonical(),
        order,
        gamma: scores[best],
        tilings,
        candidates_evaluated: solutions.len(),
        search,
    })
}

/// One state of the split loop.
#[derive(Debug, Clone)]
pub struct Iteration {
    pub h: usize,
    pub clustering: Clustering,
    pub weights: ClusterWeights,
    pub gamma: f64,
    pub xi: Vec<f64>,
    /// Tile (0-based) split to reach the next iteration.
    pub split_tile: Option<usize>,
}

impl Iteration {
    pub fn q(&self) -> usize {
        self.clustering.len()
    }

    pub fn order_histogram(&self) -> BTreeMap<u32, usize> {
        self.clustering.order_histogram()
    }

    /// Fraction of channels saved against a fully populated array.
    pub fn delta_trm(&self) -> f64 {
        1.0 - self.q() as f64 / self.clustering.grid().len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaskFulfilled,
    BudgetReached,
    NoSplittableTile,
}

/// The whole run: every iteration from the initial tiling to the final layout.
#[derive(Debug, Clone)]
pub struct SynthesisTrace {
    pub initial: InitialTiling,
    pub iterations: Vec<Iteration>,
    pub stop: StopReason,
}

impl SynthesisTrace {
    /// Index `H` of the last iteration.
    pub fn convergence_iteration(&self) -> usize {
        self.iterations.len() - 1
    }

    pub fn last(&self) -> &Iteration {
        self.iterations.last().expect("trace holds the initial state")
    }

    pub fn q_sequence(&self) -> Vec<usize> {
        self.iterations.iter().map(Iteration::q).collect()
    }
}

fn evaluate(h: usize, clustering: Clustering, objective: &Objective) -> Result<Iteration> {
    let weights = objective.weights(&clustering)?;
    let gamma = objective.gamma_with(&clustering, &weights)?;
    let xi = stm(&clustering, objective.reference, &weights);
    Ok(Iteration {
        h,
        clustering,
        weights,
        gamma,
        xi,
        split_tile: None,
    })
}

/// Split the selected tile of `state`, recording the choice, and return the next state.
pub fn rtam_step(state: &mut Iteration, objective: &Objective) -> Result<Iteration> {
    let q = select_tile(&state.clustering, &state.xi)?;
    let next = state.clustering.split(q)?;
    state.split_tile = Some(q);
    evaluate(state.h + 1, next, objective)
}

/// Run the full procedure from an already chosen initial tiling.
pub fn run_from(initial: InitialTiling, objective: &Objective, config: &RtamConfig) -> Result<SynthesisTrace> {
    let splits = config.family.split_factor() - 1;
    let mut iterations = vec![evaluate(0, initial.clustering.clone(), objective)?];
    let stop = loop {
        let current = iterations.last_mut().expect("non-empty");
        if current.gamma < GAMMA_TOLERANCE {
            break StopReason::MaskFulfilled;
        }
        if current.q() + splits > config.q_max {
            break StopReason::BudgetReached;
        }
        let next = match rtam_step(current, objective) {
            Ok(next) => next,
            Err(Error::NoSplittableTile) => break StopReason::NoSplittableTile,
            Err(e) => return Err(e),
        };
        let reached = next.q() >= config.q_max;
        iterations.push(next);
        if reached {
            break StopReason::BudgetReached;
        }
    };
    Ok(SynthesisTrace {
        initial,
        iterations,
        stop,
    })
}

/// Step 1 followed by the split loop.
pub fn run(reference: &WeightSet, element: &ElementPattern, mask: &Mask, config: &RtamConfig) -> Result<SynthesisTrace> {
    let grid = *reference.grid();
    config.validate(&grid)?;
    let objective = Objective::new(reference, element, mask, config.resolution, config.phase_mean);
    let initial = initial_tiling(&grid, &objective, config)?;
    run_from(initial, &objective, config)
}
