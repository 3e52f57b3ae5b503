//! Algorithm X over a dancing-links matrix, specialised to tilings of the element grid.
//!
//! Columns are grid cells, rows are in-bounds tile placements. Solutions are streamed to a
//! visitor; nothing is materialized unless the caller collects it.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Clustering, GridSpec, TileFamily, TilePlacement, MAX_ORDER};

/// Rows (placements) and their covered cells.
#[derive(Debug, Clone)]
pub struct CoverInstance {
    grid: GridSpec,
    placements: Vec<TilePlacement>,
    row_cells: Vec<Vec<u32>>,
}

/// Every in-bounds placement of the allowed orders, in every orientation.
///
/// Rows are ordered by tile order, then anchor (row-major), then orientation.
pub fn build_cover_instance(grid: &GridSpec, family: TileFamily, allowed_orders: &[u32]) -> Result<CoverInstance> {
    if grid.is_empty() {
        return Err(Error::param("grid must be non-empty"));
    }
    if allowed_orders.is_empty() {
        return Err(Error::param("at least one tile order is required"));
    }
    let mut orders = allowed_orders.to_vec();
    orders.sort_unstable();
    orders.dedup();
    if let Some(&bad) = orders.iter().find(|&&r| r == 0 || r > MAX_ORDER) {
        return Err(Error::param(format!("tile order {bad} outside 1..={MAX_ORDER}")));
    }

    let mut placements = Vec::new();
    let mut row_cells = Vec::new();
    for &order in &orders {
        let side = family.bbox_side(order);
        if side > grid.rows || side > grid.cols {
            continue;
        }
        for r in 0..=grid.rows - side {
            for c in 0..=grid.cols - side {
                for b in 0..family.orientations() {
                    let tile = TilePlacement::new(family, order, b, (r, c))?;
                    row_cells.push(tile.cells().into_iter().map(|cell| grid.index(cell) as u32).collect());
                    placements.push(tile);
                }
            }
        }
    }
    Ok(CoverInstance {
        grid: *grid,
        placements,
        row_cells,
    })
}

impl CoverInstance {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn num_columns(&self) -> usize {
        self.grid.len()
    }

    pub fn num_rows(&self) -> usize {
        self.placements.len()
    }

    pub fn placements(&self) -> &[TilePlacement] {
        &self.placements
    }

    pub fn row_columns(&self, row: usize) -> &[u32] {
        &self.row_cells[row]
    }

    /// Clustering for a solution given as row ids.
    pub fn clustering(&self, rows: &[usize]) -> Result<Clustering> {
        Clustering::new(self.grid, rows.iter().map(|&r| self.placements[r]).collect())
    }
}

/// Optional budgets and a per-order tile-count constraint.
#[derive(Debug, Clone, Default)]
pub struct EnumerationLimits {
    pub max_solutions: Option<u64>,
    pub max_nodes: Option<u64>,
    /// Exact number of tiles required per order.
    pub composition: Option<BTreeMap<u32, usize>>,
}

impl EnumerationLimits {
    pub fn composition(composition: BTreeMap<u32, usize>) -> Self {
        EnumerationLimits {
            composition: Some(composition),
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_solutions == Some(0) || self.max_nodes == Some(0) {
            return Err(Error::param("enumeration budgets must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EnumerationOutcome {
    pub solutions: u64,
    pub nodes: u64,
    /// A budget ran out (or the visitor stopped) before the search space was exhausted.
    pub truncated: bool,
}

const ROOT: u32 = 0;

/// Dancing-links matrix. Node 0 is the root, nodes `1..=ncols` are column headers.
#[derive(Clone)]
struct Links {
    left: Vec<u32>,
    right: Vec<u32>,
    up: Vec<u32>,
    down: Vec<u32>,
    col: Vec<u32>,
    row: Vec<u32>,
    len: Vec<u32>,
    /// Index into the composition table for each row.
    row_slot: Vec<u8>,
}

impl Links {
    fn new(inst: &CoverInstance, slot_of_order: &BTreeMap<u32, u8>) -> Self {
        let ncols = inst.num_columns();
        let nodes = 1 + ncols + inst.row_cells.iter().map(Vec::len).sum::<usize>();
        let mut l = Links {
            left: Vec::with_capacity(nodes),
            right: Vec::with_capacity(nodes),
            up: Vec::with_capacity(nodes),
            down: Vec::with_capacity(nodes),
            col: Vec::with_capacity(nodes),
            row: Vec::with_capacity(nodes),
            len: vec![0; ncols + 1],
            row_slot: inst
                .placements
                .iter()
                .map(|p| slot_of_order.get(&p.order).copied().unwrap_or(u8::MAX))
                .collect(),
        };
        for i in 0..=ncols as u32 {
            l.left.push(if i == 0 { ncols as u32 } else { i - 1 });
            l.right.push(if i as usize == ncols { 0 } else { i + 1 });
            l.up.push(i);
            l.down.push(i);
            l.col.push(i);
            l.row.push(u32::MAX);
        }
        for (r, cells) in inst.row_cells.iter().enumerate() {
            let first = l.col.len() as u32;
            let k = cells.len() as u32;
            for (j, &cell) in cells.iter().enumerate() {
                let node = first + j as u32;
                let c = cell + 1;
                l.left.push(if j == 0 { first + k - 1 } else { node - 1 });
                l.right.push(if j as u32 == k - 1 { first } else { node + 1 });
                // append at the bottom of column c
                let last = l.up[c as usize];
                l.up.push(last);
                l.down.push(c);
                l.down[last as usize] = node;
                l.up[c as usize] = node;
                l.col.push(c);
                l.row.push(r as u32);
                l.len[c as usize] += 1;
            }
        }
        l
    }

    #[inline]
    fn cover(&mut self, c: u32) {
        let c = c as usize;
        let (lc, rc) = (self.left[c], self.right[c]);
        self.right[lc as usize] = rc;
        self.left[rc as usize] = lc;
        let mut i = self.down[c] as usize;
        while i != c {
            let mut j = self.right[i] as usize;
            while j != i {
                let (uj, dj) = (self.up[j], self.down[j]);
                self.down[uj as usize] = dj;
                self.up[dj as usize] = uj;
                self.len[self.col[j] as usize] -= 1;
                j = self.right[j] as usize;
            }
            i = self.down[i] as usize;
        }
    }

    #[inline]
    fn uncover(&mut self, c: u32) {
        let c = c as usize;
        let mut i = self.up[c] as usize;
        while i != c {
            let mut j = self.left[i] as usize;
            while j != i {
                let (uj, dj) = (self.up[j], self.down[j]);
                self.down[uj as usize] = j as u32;
                self.up[dj as usize] = j as u32;
                self.len[self.col[j] as usize] += 1;
                j = self.left[j] as usize;
            }
            i = self.up[i] as usize;
        }
        let (lc, rc) = (self.left[c], self.right[c]);
        self.right[lc as usize] = c as u32;
        self.left[rc as usize] = c as u32;
    }

    /// Select row node `r`: cover every other column it touches.
    #[inline]
    fn select(&mut self, r: u32) {
        let mut j = self.right[r as usize];
        while j != r {
            self.cover(self.col[j as usize]);
            j = self.right[j as usize];
        }
    }

    #[inline]
    fn deselect(&mut self, r: u32) {
        let mut j = self.left[r as usize];
        while j != r {
            self.uncover(self.col[j as usize]);
            j = self.left[j as usize];
        }
    }

    /// Column with the fewest remaining candidates; ties go to the lowest column id.
    #[inline]
    fn choose_column(&self) -> u32 {
        let mut best = self.right[ROOT as usize];
        let mut best_len = self.len[best as usize];
        let mut c = self.right[best as usize];
        while c != ROOT && best_len > 1 {
            let len = self.len[c as usize];
            if len < best_len {
                best = c;
                best_len = len;
            }
            c = self.right[c as usize];
        }
        best
    }
}

/// Per-order tile budget used while searching under a composition constraint.
#[derive(Clone)]
struct Budget {
    remaining: Vec<usize>,
    constrained: bool,
}

impl Budget {
    #[inline]
    fn take(&mut self, slot: u8) -> bool {
        if !self.constrained {
            return true;
        }
        match self.remaining.get_mut(slot as usize) {
            Some(n) if *n > 0 => {
                *n -= 1;
                true
            }
            _ => false,
        }
    }

    #[inline]
    fn give(&mut self, slot: u8) {
        if self.constrained {
            self.remaining[slot as usize] += 1;
        }
    }

    fn exhausted(&self) -> bool {
        !self.constrained || self.remaining.iter().all(|&n| n == 0)
    }
}

struct Search<'v, V> {
    links: Links,
    budget: Budget,
    stack: Vec<usize>,
    solutions: u64,
    nodes: u64,
    max_solutions: u64,
    max_nodes: u64,
    truncated: bool,
    visitor: &'v mut V,
}

impl<V: FnMut(&[usize]) -> ControlFlow<()>> Search<'_, V> {
    /// Returns `Break` when the search must stop.
    fn run(&mut self) -> ControlFlow<()> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            self.truncated = true;
            return ControlFlow::Break(());
        }
        if self.links.right[ROOT as usize] == ROOT {
            if self.budget.exhausted() {
                self.solutions += 1;
                if (self.visitor)(&self.stack).is_break() || self.solutions >= self.max_solutions {
                    self.truncated = true;
                    return ControlFlow::Break(());
                }
            }
            return ControlFlow::Continue(());
        }
        let c = self.links.choose_column();
        if self.links.len[c as usize] == 0 {
            return ControlFlow::Continue(());
        }
        self.links.cover(c);
        let mut r = self.links.down[c as usize];
        let mut flow = ControlFlow::Continue(());
        while r != c {
            let row = self.links.row[r as usize];
            let slot = self.links.row_slot[row as usize];
            if self.budget.take(slot) {
                self.stack.push(row as usize);
                self.links.select(r);
                flow = self.run();
                self.links.deselect(r);
                self.stack.pop();
                self.budget.give(slot);
                if flow.is_break() {
                    break;
                }
            }
            r = self.links.down[r as usize];
        }
        self.links.uncover(c);
        flow
    }
}

fn prepare(inst: &CoverInstance, limits: &EnumerationLimits) -> Result<Option<(Links, Budget)>> {
    limits.validate()?;
    let mut slot_of_order = BTreeMap::new();
    let mut remaining = Vec::new();
    if let Some(comp) = &limits.composition {
        let cells: usize = comp
            .iter()
            .map(|(&order, &count)| {
                if order == 0 || order > MAX_ORDER {
                    return Err(Error::param(format!("composition order {order} outside 1..={MAX_ORDER}")));
                }
                let family = inst.placements.first().map_or(TileFamily::LTromino, |p| p.family);
                Ok(count * family.cells_at_order(order))
            })
            .sum::<Result<usize>>()?;
        if cells != inst.num_columns() {
            // the composition cannot cover the grid exactly
            return Ok(None);
        }
        for (i, (&order, &count)) in comp.iter().enumerate() {
            slot_of_order.insert(order, i as u8);
            remaining.push(count);
        }
    }
    let budget = Budget {
        remaining,
        constrained: limits.composition.is_some(),
    };
    Ok(Some((Links::new(inst, &slot_of_order), budget)))
}

/// Visit every exact cover once, in a deterministic order.
///
/// The visitor receives the chosen row ids in selection order and may stop the search by
/// returning `Break`, which flags the outcome as truncated.
pub fn enumerate_exact_covers<V>(inst: &CoverInstance, limits: &EnumerationLimits, mut visitor: V) -> Result<EnumerationOutcome>
where
    V: FnMut(&[usize]) -> ControlFlow<()>,
{
    let Some((links, budget)) = prepare(inst, limits)? else {
        return Ok(EnumerationOutcome {
            solutions: 0,
            nodes: 0,
            truncated: false,
        });
    };
    let mut search = Search {
        links,
        budget,
        stack: Vec::new(),
        solutions: 0,
        nodes: 0,
        max_solutions: limits.max_solutions.unwrap_or(u64::MAX),
        max_nodes: limits.max_nodes.unwrap_or(u64::MAX),
        truncated: false,
        visitor: &mut visitor,
    };
    let _ = search.run();
    Ok(EnumerationOutcome {
        solutions: search.solutions,
        nodes: search.nodes,
        truncated: search.truncated,
    })
}

/// Collect every solution (as row-id lists) into memory. Only for small instances.
pub fn collect_exact_covers(inst: &CoverInstance, limits: &EnumerationLimits) -> Result<(Vec<Vec<usize>>, EnumerationOutcome)> {
    let mut out = Vec::new();
    let outcome = enumerate_exact_covers(inst, limits, |rows| {
        out.push(rows.to_vec());
        ControlFlow::Continue(())
    })?;
    Ok((out, outcome))
}

/// A partially applied search: rows already selected plus the resulting matrix state.
struct Task {
    links: Links,
    budget: Budget,
}

/// Expand the search tree breadth-first until there are at least `target` open subtrees.
fn split_tasks(links: Links, budget: Budget, target: usize) -> (Vec<Task>, u64) {
    let mut frontier = vec![Task { links, budget }];
    let mut leaves = 0u64;
    for _ in 0..8 {
        if frontier.len() >= target {
            break;
        }
        let mut next = Vec::new();
        for mut task in frontier {
            if task.links.right[ROOT as usize] == ROOT {
                if task.budget.exhausted() {
                    leaves += 1;
                }
                continue;
            }
            let c = task.links.choose_column();
            if task.links.len[c as usize] == 0 {
                continue;
            }
            task.links.cover(c);
            let mut r = task.links.down[c as usize];
            while r != c {
                let slot = task.links.row_slot[task.links.row[r as usize] as usize];
                let mut budget = task.budget.clone();
                if budget.take(slot) {
                    let mut links = task.links.clone();
                    links.select(r);
                    next.push(Task { links, budget });
                }
                r = task.links.down[r as usize];
            }
        }
        frontier = next;
    }
    (frontier, leaves)
}

/// Count exact covers using every rayon worker. Budgets other than the composition are
/// applied per subtree, so a truncated parallel count is only a lower bound.
pub fn count_exact_covers_parallel(inst: &CoverInstance, limits: &EnumerationLimits) -> Result<EnumerationOutcome> {
    let Some((links, budget)) = prepare(inst, limits)? else {
        return Ok(EnumerationOutcome {
            solutions: 0,
            nodes: 0,
            truncated: false,
        });
    };
    let target = rayon::current_num_threads() * 64;
    let (tasks, leaves) = split_tasks(links, budget, target);
    let max_solutions = limits.max_solutions.unwrap_or(u64::MAX);
    let max_nodes = limits.max_nodes.unwrap_or(u64::MAX);
    let partial: Vec<EnumerationOutcome> = tasks
        .into_par_iter()
        .map(|task| {
            let mut noop = |_: &[usize]| ControlFlow::Continue(());
            let mut search = Search {
                links: task.links,
                budget: task.budget,
                stack: Vec::new(),
                solutions: 0,
                nodes: 0,
                max_solutions,
                max_nodes,
                truncated: false,
                visitor: &mut noop,
            };
            let _ = search.run();
            EnumerationOutcome {
                solutions: search.solutions,
                nodes: search.nodes,
                truncated: search.truncated,
            }
        })
        .collect();
    Ok(partial.into_iter().fold(
        EnumerationOutcome {
            solutions: leaves,
            nodes: 0,
            truncated: false,
        },
        |acc, p| EnumerationOutcome {
            solutions: acc.solutions + p.solutions,
            nodes: acc.nodes + p.nodes,
            truncated: acc.truncated || p.truncated,
        },
    ))
}

/// Total number of tilings using any mix of the allowed orders.
pub fn count_all_mixed_tilings(grid: &GridSpec, family: TileFamily, allowed_orders: &[u32]) -> Result<EnumerationOutcome> {
    let inst = build_cover_instance(grid, family, allowed_orders)?;
    count_exact_covers_parallel(&inst, &EnumerationLimits::default())
}

/// Draw one exact cover by randomized depth-first search (random row order at every
/// node). Returns `None` when the node budget runs out or no cover exists.
pub fn sample_exact_cover<R: Rng>(inst: &CoverInstance, rng: &mut R, max_nodes: u64) -> Option<Vec<usize>> {
    fn go<R: Rng>(links: &mut Links, stack: &mut Vec<usize>, rng: &mut R, nodes: &mut u64, max_nodes: u64) -> Option<bool> {
        *nodes += 1;
        if *nodes > max_nodes {
            return None;
        }
        if links.right[ROOT as usize] == ROOT {
            return Some(true);
        }
        let c = links.choose_column();
        if links.len[c as usize] == 0 {
            return Some(false);
        }
        links.cover(c);
        let mut candidates = Vec::with_capacity(links.len[c as usize] as usize);
        let mut r = links.down[c as usize];
        while r != c {
            candidates.push(r);
            r = links.down[r as usize];
        }
        candidates.shuffle(rng);
        let mut found = Some(false);
        for r in candidates {
            stack.push(links.row[r as usize] as usize);
            links.select(r);
            found = go(links, stack, rng, nodes, max_nodes);
            links.deselect(r);
            if found != Some(false) {
                break;
            }
            stack.pop();
        }
        links.uncover(c);
        found
    }

    let mut links = Links::new(inst, &BTreeMap::new());
    let mut stack = Vec::new();
    let mut nodes = 0;
    match go(&mut links, &mut stack, rng, &mut nodes, max_nodes) {
        Some(true) => Some(stack),
        _ => None,
    }
}
