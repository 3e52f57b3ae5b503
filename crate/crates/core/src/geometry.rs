//! Rep-tile alphabets, cell geometry on the element lattice, rep-4 subdivision and the
//! clustering vector.
//!
//! Cells are addressed as `(row, col)` with `row` in `0..M` and `col` in `0..N`; row 0 is
//! the top of the aperture. The clustering vector is stored row-major from the top-left
//! cell, tile ids are 1-based and 0 marks an uncovered cell.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A lattice cell `(row, col)`.
pub type Cell = (usize, usize);

/// Highest tile order supported (an order-6 L-tromino holds 3072 elements).
pub const MAX_ORDER: u32 = 6;

/// Rectangular element lattice. Spacings are in wavelengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub dx: f64,
    pub dy: f64,
}

impl GridSpec {
    pub fn new(rows: usize, cols: usize, dx: f64, dy: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::param(format!("grid must be non-empty, got {rows}x{cols}")));
        }
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::param(format!("element spacing must be positive, got dx={dx}, dy={dy}")));
        }
        Ok(GridSpec { rows, cols, dx, dy })
    }

    /// Grid with half-wavelength spacing along both axes.
    pub fn half_wave(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, 0.5, 0.5)
    }

    /// Number of elements `M*N`.
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, (row, col): Cell) -> usize {
        row * self.cols + col
    }

    #[inline]
    pub fn cell(&self, index: usize) -> Cell {
        (index / self.cols, index % self.cols)
    }

    pub fn contains(&self, (row, col): Cell) -> bool {
        row < self.rows && col < self.cols
    }

    /// Element position `(x, y)` in wavelengths: `x = n*dx`, `y = m*dy`.
    #[inline]
    pub fn position(&self, (row, col): Cell) -> (f64, f64) {
        (col as f64 * self.dx, row as f64 * self.dy)
    }
}

/// Rep-tile family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TileFamily {
    LTromino,
    Square,
}

impl std::str::FromStr for TileFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ltromino" | "l-tromino" | "l" => Ok(TileFamily::LTromino),
            "square" | "s" => Ok(TileFamily::Square),
            other => Err(Error::param(format!("unknown tile family `{other}`"))),
        }
    }
}

impl TileFamily {
    /// Elements in an order-1 tile.
    pub fn base_cells(self) -> usize {
        match self {
            TileFamily::LTromino => 3,
            TileFamily::Square => 4,
        }
    }

    /// Number of congruent children an order-r tile splits into.
    pub fn split_factor(self) -> usize {
        4
    }

    /// Number of distinct orientations.
    pub fn orientations(self) -> u8 {
        match self {
            TileFamily::LTromino => 4,
            TileFamily::Square => 1,
        }
    }

    /// `I^(r) = S^(r-1) * I^(1)`.
    pub fn cells_at_order(self, order: u32) -> usize {
        debug_assert!(order >= 1);
        self.split_factor().pow(order - 1) * self.base_cells()
    }

    /// Side length of the tile scaling: `2^(r-1)` for L-trominoes, `2^r` for squares.
    ///
    /// For L-trominoes this is the `l` of `I^(r) = 3 l^2`; the bounding box is `2l x 2l`.
    pub fn side(self, order: u32) -> usize {
        match self {
            TileFamily::LTromino => 1 << (order - 1),
            TileFamily::Square => 1 << order,
        }
    }

    /// Side of the square bounding box of an order-r tile.
    pub fn bbox_side(self, order: u32) -> usize {
        match self {
            TileFamily::LTromino => 2 << (order - 1),
            TileFamily::Square => 1 << order,
        }
    }

    fn check(self, order: u32, orientation: u8) -> Result<()> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::param(format!("tile order must be in 1..={MAX_ORDER}, got {order}")));
        }
        if orientation >= self.orientations() {
            return Err(Error::param(format!(
                "orientation {orientation} out of range for {self:?} (B = {})",
                self.orientations()
            )));
        }
        Ok(())
    }
}

/// Rotate `(i, j)` by 90 degrees clockwise inside an `n x n` box.
#[inline]
fn rotate_cw((i, j): Cell, n: usize) -> Cell {
    (j, n - 1 - i)
}

/// Cells of an order-`order` tile with orientation `orientation`, relative to its
/// bounding-box corner, sorted row-major.
fn canonical_cells(family: TileFamily, order: u32, orientation: u8) -> Vec<Cell> {
    let n = family.bbox_side(order);
    let mut cells: Vec<Cell> = match family {
        TileFamily::LTromino => {
            let l = n / 2;
            (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|&(i, j)| !(i < l && j >= l))
                .collect()
        }
        TileFamily::Square => (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect(),
    };
    for _ in 0..orientation {
        for c in cells.iter_mut() {
            *c = rotate_cw(*c, n);
        }
    }
    cells.sort_unstable();
    cells
}

/// Cells covered by a tile of the given family, order and orientation whose bounding box
/// starts at `anchor`. Orientation `b` is the canonical shape rotated by `90*b` degrees
/// clockwise; the canonical L-tromino is the `2l x 2l` box without its top-right quadrant.
pub fn tile_cells(family: TileFamily, order: u32, orientation: u8, anchor: Cell) -> Result<Vec<Cell>> {
    family.check(order, orientation)?;
    Ok(canonical_cells(family, order, orientation)
        .into_iter()
        .map(|(i, j)| (anchor.0 + i, anchor.1 + j))
        .collect())
}

/// One rep-tile instance on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TilePlacement {
    pub family: TileFamily,
    pub order: u32,
    pub orientation: u8,
    pub anchor: Cell,
}

impl TilePlacement {
    pub fn new(family: TileFamily, order: u32, orientation: u8, anchor: Cell) -> Result<Self> {
        family.check(order, orientation)?;
        Ok(TilePlacement {
            family,
            order,
            orientation,
            anchor,
        })
    }

    /// Order-1 L-tromino shorthand.
    pub fn tromino(orientation: u8, anchor: Cell) -> Self {
        TilePlacement {
            family: TileFamily::LTromino,
            order: 1,
            orientation,
            anchor,
        }
    }

    /// The alphabet letter `(order, orientation)` this tile realizes.
    pub fn letter(&self) -> (u32, u8) {
        (self.order, self.orientation)
    }

    pub fn size(&self) -> usize {
        self.family.cells_at_order(self.order)
    }

    pub fn cells(&self) -> Vec<Cell> {
        canonical_cells(self.family, self.order, self.orientation)
            .into_iter()
            .map(|(i, j)| (self.anchor.0 + i, self.anchor.1 + j))
            .collect()
    }

    pub fn fits(&self, grid: &GridSpec) -> bool {
        let side = self.family.bbox_side(self.order);
        self.anchor.0 + side <= grid.rows && self.anchor.1 + side <= grid.cols
    }

    /// First cell in row-major order.
    pub fn first_cell(&self) -> Cell {
        self.cells()[0]
    }

    /// Split into `S = 4` order-(r-1) tiles whose union is exactly this tile.
    ///
    /// For the canonical L with child box side `s` the children are the top-left corner
    /// (orientation 1), the center at `(s/2, s/2)` (orientation 0), the bottom-left corner
    /// (orientation 0) and the bottom-right corner (orientation 3). Other orientations
    /// rotate the whole decomposition.
    pub fn subdivide(&self) -> Result<[TilePlacement; 4]> {
        if self.order < 2 {
            return Err(Error::CannotSplit(self.order));
        }
        let child_order = self.order - 1;
        let s = self.family.bbox_side(child_order);
        let n = self.family.bbox_side(self.order);
        let canonical: [(Cell, u8); 4] = match self.family {
            TileFamily::LTromino => [((0, 0), 1), ((s / 2, s / 2), 0), ((s, 0), 0), ((s, s), 3)],
            TileFamily::Square => [((0, 0), 0), ((0, s), 0), ((s, 0), 0), ((s, s), 0)],
        };
        let orientations = self.family.orientations();
        Ok(canonical.map(|(mut anchor, mut b)| {
            for _ in 0..self.orientation {
                // the child box [r, r+s) x [c, c+s) maps to [c, c+s) x [n-r-s, n-r)
                anchor = (anchor.1, n - anchor.0 - s);
                b = (b + 1) % orientations;
            }
            TilePlacement {
                family: self.family,
                order: child_order,
                orientation: b,
                anchor: (self.anchor.0 + anchor.0, self.anchor.1 + anchor.1),
            }
        }))
    }

    /// Recognize the placement covering exactly `cells` (any order), if there is one.
    pub fn recognize(family: TileFamily, cells: &[Cell]) -> Option<TilePlacement> {
        if cells.is_empty() {
            return None;
        }
        let order = (1..=MAX_ORDER).find(|&r| family.cells_at_order(r) == cells.len())?;
        let anchor = (
            cells.iter().map(|c| c.0).min()?,
            cells.iter().map(|c| c.1).min()?,
        );
        let mut sorted = cells.to_vec();
        sorted.sort_unstable();
        (0..family.orientations()).find_map(|b| {
            let tile = TilePlacement {
                family,
                order,
                orientation: b,
                anchor,
            };
            (tile.cells() == sorted).then_some(tile)
        })
    }
}

/// Why an aperture is (not) tileable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TileabilityReason {
    ThreeByEven,
    DivisibleCase,
    NotDivisibleBySide,
    ThreeByOdd,
    AreaNotDivisible,
    TooSmall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileabilityVerdict {
    pub tileable: bool,
    pub reason: TileabilityReason,
}

/// Whether an `M x N` aperture admits an exact cover with order-`order` tiles only.
///
/// L-trominoes follow the rectangle covering theorem on the scaled sides
/// `M^ = M/l, N^ = N/l` (sorted so `M^ <= N^`): tileable iff both sides divide by `l`,
/// `M^ >= 2`, and either `M^ = 3` with `N^` even or `M^ != 3` with `M*N` divisible by
/// `I^(R)`. Squares only need both sides to divide by the square side.
pub fn check_tileability(grid: &GridSpec, order: u32, family: TileFamily) -> Result<TileabilityVerdict> {
    family.check(order, 0)?;
    let l = family.side(order);
    let verdict = |tileable, reason| TileabilityVerdict { tileable, reason };
    if !grid.rows.is_multiple_of(l) || !grid.cols.is_multiple_of(l) {
        return Ok(verdict(false, TileabilityReason::NotDivisibleBySide));
    }
    if family == TileFamily::Square {
        return Ok(verdict(true, TileabilityReason::DivisibleCase));
    }
    let (a, b) = {
        let (m, n) = (grid.rows / l, grid.cols / l);
        (m.min(n), m.max(n))
    };
    Ok(if a < 2 {
        verdict(false, TileabilityReason::TooSmall)
    } else if a == 3 {
        if b % 2 == 0 {
            verdict(true, TileabilityReason::ThreeByEven)
        } else {
            verdict(false, TileabilityReason::ThreeByOdd)
        }
    } else if grid.len().is_multiple_of(family.cells_at_order(order)) {
        verdict(true, TileabilityReason::DivisibleCase)
    } else {
        verdict(false, TileabilityReason::AreaNotDivisible)
    })
}

/// A problem with one tile (or label group) found during validation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TileIssue {
    /// 1-based tile id.
    pub tile: usize,
    pub message: String,
}

/// Outcome of validating a clustering; problems are listed, never thrown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub exact_partition: bool,
    pub gaps: Vec<Cell>,
    pub overlaps: Vec<Cell>,
    pub malformed: Vec<TileIssue>,
    /// Tile count per order.
    pub order_histogram: BTreeMap<u32, usize>,
    /// The tile list recovered from (or given with) the input, when every tile is valid.
    pub tiles: Option<Vec<TilePlacement>>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.exact_partition && self.malformed.is_empty()
    }

    fn summary(&self) -> String {
        let mut parts = Vec::new();
        if !self.gaps.is_empty() {
            parts.push(format!("{} uncovered cell(s), first {:?}", self.gaps.len(), self.gaps[0]));
        }
        if !self.overlaps.is_empty() {
            parts.push(format!("{} overlapping cell(s), first {:?}", self.overlaps.len(), self.overlaps[0]));
        }
        for issue in self.malformed.iter().take(3) {
            parts.push(format!("tile {}: {}", issue.tile, issue.message));
        }
        parts.join("; ")
    }
}

/// Validate a tile list against a grid.
pub fn validate_tiles(grid: &GridSpec, tiles: &[TilePlacement]) -> ValidationReport {
    let mut cover = vec![0u32; grid.len()];
    let mut malformed = Vec::new();
    let mut order_histogram = BTreeMap::new();
    for (q, tile) in tiles.iter().enumerate() {
        if tile.family.check(tile.order, tile.orientation).is_err() {
            malformed.push(TileIssue {
                tile: q + 1,
                message: format!("invalid letter (order {}, orientation {})", tile.order, tile.orientation),
            });
            continue;
        }
        *order_histogram.entry(tile.order).or_insert(0) += 1;
        if !tile.fits(grid) {
            malformed.push(TileIssue {
                tile: q + 1,
                message: format!("extends outside the {}x{} grid", grid.rows, grid.cols),
            });
        }
        for cell in tile.cells() {
            if grid.contains(cell) {
                cover[grid.index(cell)] += 1;
            }
        }
    }
    let gaps: Vec<Cell> = (0..grid.len()).filter(|&i| cover[i] == 0).map(|i| grid.cell(i)).collect();
    let overlaps: Vec<Cell> = (0..grid.len()).filter(|&i| cover[i] > 1).map(|i| grid.cell(i)).collect();
    let exact_partition = gaps.is_empty() && overlaps.is_empty() && malformed.is_empty();
    ValidationReport {
        exact_partition,
        gaps,
        overlaps,
        tiles: malformed.is_empty().then(|| tiles.to_vec()),
        malformed,
        order_histogram,
    }
}

/// Validate a clustering vector (row-major, 1-based ids, 0 = gap) by recognizing the
/// tile shape behind each id.
pub fn validate_labels(grid: &GridSpec, family: TileFamily, labels: &[u32]) -> ValidationReport {
    let mut malformed = Vec::new();
    if labels.len() != grid.len() {
        malformed.push(TileIssue {
            tile: 0,
            message: format!("vector has {} entries, grid has {}", labels.len(), grid.len()),
        });
        return ValidationReport {
            exact_partition: false,
            gaps: Vec::new(),
            overlaps: Vec::new(),
            malformed,
            order_histogram: BTreeMap::new(),
            tiles: None,
        };
    }
    let q = labels.iter().copied().max().unwrap_or(0) as usize;
    let mut groups: Vec<Vec<Cell>> = vec![Vec::new(); q];
    let mut gaps = Vec::new();
    for (i, &label) in labels.iter().enumerate() {
        if label == 0 {
            gaps.push(grid.cell(i));
        } else {
            groups[label as usize - 1].push(grid.cell(i));
        }
    }
    let mut tiles = Vec::with_capacity(q);
    let mut order_histogram = BTreeMap::new();
    for (k, cells) in groups.iter().enumerate() {
        match TilePlacement::recognize(family, cells) {
            Some(tile) => {
                *order_histogram.entry(tile.order).or_insert(0) += 1;
                tiles.push(tile);
            }
            None if cells.is_empty() => malformed.push(TileIssue {
                tile: k + 1,
                message: "id is unused".into(),
            }),
            None => malformed.push(TileIssue {
                tile: k + 1,
                message: format!("{} cells do not form a {family:?} tile", cells.len()),
            }),
        }
    }
    ValidationReport {
        exact_partition: gaps.is_empty() && malformed.is_empty(),
        gaps,
        overlaps: Vec::new(),
        tiles: malformed.is_empty().then_some(tiles),
        malformed,
        order_histogram,
    }
}

/// An exact partition of the grid into rep-tiles, together with its clustering vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    grid: GridSpec,
    tiles: Vec<TilePlacement>,
    labels: Vec<u32>,
    members: Vec<Vec<usize>>,
}

impl Clustering {
    /// Build from a tile list, keeping the tile order as given. Fails unless the tiles
    /// form an exact partition.
    pub fn new(grid: GridSpec, tiles: Vec<TilePlacement>) -> Result<Self> {
        let report = validate_tiles(&grid, &tiles);
        if !report.is_valid() {
            return Err(Error::InvalidClustering(report.summary()));
        }
        Ok(Self::from_valid(grid, tiles))
    }

    /// Build from a clustering vector.
    pub fn from_labels(grid: GridSpec, family: TileFamily, labels: &[u32]) -> Result<Self> {
        let report = validate_labels(&grid, family, labels);
        match report.tiles {
            Some(tiles) if report.exact_partition => Ok(Self::from_valid(grid, tiles)),
            _ => Err(Error::InvalidClustering(report.summary())),
        }
    }

    fn from_valid(grid: GridSpec, tiles: Vec<TilePlacement>) -> Self {
        let mut labels = vec![0u32; grid.len()];
        let mut members = Vec::with_capacity(tiles.len());
        for (q, tile) in tiles.iter().enumerate() {
            let idx: Vec<usize> = tile.cells().into_iter().map(|c| grid.index(c)).collect();
            for &i in &idx {
                labels[i] = q as u32 + 1;
            }
            members.push(idx);
        }
        Clustering {
            grid,
            tiles,
            labels,
            members,
        }
    }

    /// Renumber tiles by their first cell in row-major order.
    pub fn canonical(mut self) -> Self {
        if self.tiles.windows(2).all(|w| w[0].first_cell() < w[1].first_cell()) {
            return self;
        }
        self.tiles.sort_by_key(|t| t.first_cell());
        Self::from_valid(self.grid, self.tiles)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn tiles(&self) -> &[TilePlacement] {
        &self.tiles
    }

    /// The clustering vector `c`, row-major, 1-based.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Flat element indices of each tile.
    pub fn members(&self) -> &[Vec<usize>] {
        &self.members
    }

    /// Number of tiles `Q`.
    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn order_histogram(&self) -> BTreeMap<u32, usize> {
        let mut hist = BTreeMap::new();
        for t in &self.tiles {
            *hist.entry(t.order).or_insert(0) += 1;
        }
        hist
    }

    pub fn validate(&self) -> ValidationReport {
        validate_tiles(&self.grid, &self.tiles)
    }

    /// Replace tile `q` (0-based) by its four children, then renumber canonically.
    pub fn split(&self, q: usize) -> Result<Self> {
        let tile = self
            .tiles
            .get(q)
            .ok_or_else(|| Error::param(format!("tile index {q} out of range (Q = {})", self.len())))?;
        let children = tile.subdivide()?;
        let mut tiles = Vec::with_capacity(self.tiles.len() + 3);
        tiles.extend_from_slice(&self.tiles[..q]);
        tiles.extend_from_slice(&children);
        tiles.extend_from_slice(&self.tiles[q + 1..]);
        Ok(Self::from_valid(self.grid, tiles).canonical())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(cells: &[Cell]) -> Vec<Cell> {
        let mut v = cells.to_vec();
        v.sort_unstable();
        v
    }

    #[test]
    fn canonical_order_one_tromino() {
        let cells = tile_cells(TileFamily::LTromino, 1, 0, (0, 0)).unwrap();
        assert_eq!(cells, set(&[(0, 0), (1, 0), (1, 1)]));
    }

    #[test]
    fn cell_counts_by_order() {
        for r in 1..=MAX_ORDER {
            for b in 0..4 {
                let n = tile_cells(TileFamily::LTromino, r, b, (3, 5)).unwrap().len();
                assert_eq!(n, 3 * 4usize.pow(r - 1));
            }
            assert_eq!(tile_cells(TileFamily::Square, r, 0, (0, 0)).unwrap().len(), 4usize.pow(r));
        }
        assert_eq!(TileFamily::LTromino.cells_at_order(2), 12);
        assert_eq!(TileFamily::LTromino.cells_at_order(3), 48);
    }

    #[test]
    fn invalid_orientation_rejected() {
        assert!(matches!(tile_cells(TileFamily::LTromino, 1, 4, (0, 0)), Err(Error::Parameter(_))));
        assert!(tile_cells(TileFamily::Square, 1, 1, (0, 0)).is_err());
        assert!(tile_cells(TileFamily::LTromino, 0, 0, (0, 0)).is_err());
    }

    #[test]
    fn order_two_split_matches_hand_partition() {
        let parent = TilePlacement::new(TileFamily::LTromino, 2, 0, (0, 0)).unwrap();
        let kids: Vec<Vec<Cell>> = parent.subdivide().unwrap().iter().map(|t| t.cells()).collect();
        assert_eq!(kids[0], set(&[(0, 0), (0, 1), (1, 0)]));
        assert_eq!(kids[1], set(&[(1, 1), (2, 1), (2, 2)]));
        assert_eq!(kids[2], set(&[(2, 0), (3, 0), (3, 1)]));
        assert_eq!(kids[3], set(&[(2, 3), (3, 2), (3, 3)]));
    }

    #[test]
    fn order_one_cannot_split() {
        assert!(matches!(TilePlacement::tromino(2, (0, 0)).subdivide(), Err(Error::CannotSplit(1))));
    }

    #[test]
    fn fig4_tileability_cases() {
        let check = |m, n| check_tileability(&GridSpec::half_wave(m, n).unwrap(), 3, TileFamily::LTromino).unwrap();
        assert_eq!(check(12, 16), TileabilityVerdict { tileable: true, reason: TileabilityReason::ThreeByEven });
        assert_eq!(check(12, 20), TileabilityVerdict { tileable: false, reason: TileabilityReason::ThreeByOdd });
        assert_eq!(check(20, 8), TileabilityVerdict { tileable: false, reason: TileabilityReason::AreaNotDivisible });
        assert!(check(24, 8).tileable);
        assert!(check(36, 24).tileable);
        assert!(!check(32, 28).tileable);
        assert_eq!(check(10, 16).reason, TileabilityReason::NotDivisibleBySide);
        assert_eq!(check(4, 16).reason, TileabilityReason::TooSmall);
    }

    #[test]
    fn square_tileability_is_divisibility() {
        let g = GridSpec::half_wave(24, 24).unwrap();
        assert!(check_tileability(&g, 3, TileFamily::Square).unwrap().tileable);
        let g = GridSpec::half_wave(24, 20).unwrap();
        assert!(!check_tileability(&g, 3, TileFamily::Square).unwrap().tileable);
    }

    #[test]
    fn fig3_clustering_vector() {
        let grid = GridSpec::half_wave(3, 4).unwrap();
        let labels = [1, 1, 2, 2, 1, 3, 4, 2, 3, 3, 4, 4];
        let c = Clustering::from_labels(grid, TileFamily::LTromino, &labels).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c.labels(), &labels);
        // round trip through the tile list
        let again = Clustering::new(grid, c.tiles().to_vec()).unwrap();
        assert_eq!(again.labels(), &labels);
        assert_eq!(c.clone().canonical().labels(), &labels);
    }

    #[test]
    fn gap_is_reported() {
        let grid = GridSpec::half_wave(3, 4).unwrap();
        let labels = [1, 1, 2, 2, 1, 3, 4, 2, 3, 3, 4, 0];
        let report = validate_labels(&grid, TileFamily::LTromino, &labels);
        assert!(!report.exact_partition);
        assert_eq!(report.gaps, vec![(2, 3)]);
        assert_eq!(report.malformed.len(), 1);
        assert!(Clustering::from_labels(grid, TileFamily::LTromino, &labels).is_err());
    }

    #[test]
    fn overlap_is_reported() {
        let grid = GridSpec::half_wave(2, 3).unwrap();
        let tiles = vec![TilePlacement::tromino(0, (0, 0)), TilePlacement::tromino(1, (0, 0))];
        let report = validate_tiles(&grid, &tiles);
        assert!(!report.exact_partition);
        assert!(report.overlaps.contains(&(0, 0)));
        assert!(!report.gaps.is_empty());
    }

    #[test]
    fn split_renumbers_and_counts() {
        let grid = GridSpec::half_wave(4, 6).unwrap();
        let tiles = vec![
            TilePlacement::new(TileFamily::LTromino, 2, 0, (0, 0)).unwrap(),
            TilePlacement::new(TileFamily::LTromino, 2, 2, (0, 2)).unwrap(),
        ];
        let c = Clustering::new(grid, tiles).unwrap();
        let s = c.split(0).unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(s.order_histogram(), BTreeMap::from([(1, 4), (2, 1)]));
        assert!(s.validate().is_valid());
    }
}
