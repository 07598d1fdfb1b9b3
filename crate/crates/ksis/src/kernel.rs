//! The kernel data structure and the operations derived from it: validation,
//! generation, the deterministic traversal over an image, per-position
//! coefficient selection, and the coefficient of incidence.
//!
//! A kernel is a sparse binary matrix with exactly `k` ones whose top-left
//! cell is set. Placed at an image position (its *anchor*), it selects the
//! image pixels under its ones; pixels that were already selected and cells
//! that fall outside the image are replaced by random fillers. The anchor
//! sequence is itself derived from the kernel: each next anchor is the
//! unmarked pixel closest to the origin in Manhattan distance, ties broken
//! by smaller row then smaller column, so split and combine retrace the same
//! path without storing it.

use std::collections::HashSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::scheme::Mode;
use crate::stream_rng;

/// Sparse binary matrix with exactly `k` ones, origin cell set. Ones are
/// kept sorted in row-major order; that order is also the coefficient order
/// during selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kernel {
    rows: usize,
    cols: usize,
    ones: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KernelViolation {
    WrongOnesCount { expected: usize, actual: usize },
    MissingOrigin,
    OutOfBounds { row: usize, col: usize },
    Duplicate { row: usize, col: usize },
    ThresholdTooSmall { k: usize },
    EmptyDimensions,
}

impl std::fmt::Display for KernelViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelViolation::WrongOnesCount { expected, actual } => {
                write!(f, "expected {expected} ones, found {actual}")
            }
            KernelViolation::MissingOrigin => write!(f, "first cell must be one"),
            KernelViolation::OutOfBounds { row, col } => {
                write!(f, "one at ({row}, {col}) lies outside the kernel")
            }
            KernelViolation::Duplicate { row, col } => {
                write!(f, "duplicate one at ({row}, {col})")
            }
            KernelViolation::ThresholdTooSmall { k } => {
                write!(f, "threshold k = {k} must be at least 2")
            }
            KernelViolation::EmptyDimensions => write!(f, "kernel dimensions must be at least 1x1"),
        }
    }
}

/// Checks raw kernel data against every rule and returns all violations
/// found; an empty list means the data forms a valid kernel for threshold
/// `k`.
pub fn validate_kernel(
    rows: usize,
    cols: usize,
    ones: &[(usize, usize)],
    k: usize,
) -> Vec<KernelViolation> {
    let mut violations = Vec::new();
    if rows == 0 || cols == 0 {
        violations.push(KernelViolation::EmptyDimensions);
    }
    if k < 2 {
        violations.push(KernelViolation::ThresholdTooSmall { k });
    }
    if ones.len() != k {
        violations.push(KernelViolation::WrongOnesCount { expected: k, actual: ones.len() });
    }
    if !ones.contains(&(0, 0)) {
        violations.push(KernelViolation::MissingOrigin);
    }
    let mut seen = HashSet::new();
    for &(row, col) in ones {
        if row >= rows || col >= cols {
            violations.push(KernelViolation::OutOfBounds { row, col });
        }
        if !seen.insert((row, col)) {
            violations.push(KernelViolation::Duplicate { row, col });
        }
    }
    violations
}

impl Kernel {
    /// Builds a kernel from its ones positions; the threshold is implied by
    /// the number of ones.
    pub fn new(rows: usize, cols: usize, ones: Vec<(usize, usize)>) -> Result<Self> {
        let violations = validate_kernel(rows, cols, &ones, ones.len());
        if !violations.is_empty() {
            return Err(Error::InvalidKernel(violations));
        }
        let mut ones = ones;
        ones.sort_unstable();
        Ok(Kernel { rows, cols, ones })
    }

    /// Builds a kernel from a row-major bitmap, checking it carries exactly
    /// `k` ones.
    pub fn from_bits(rows: usize, cols: usize, bits: &[bool], k: usize) -> Result<Self> {
        if bits.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "bitmap has {} cells, expected {}",
                bits.len(),
                rows * cols
            )));
        }
        let ones: Vec<(usize, usize)> = bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i / cols, i % cols))
            .collect();
        let violations = validate_kernel(rows, cols, &ones, k);
        if !violations.is_empty() {
            return Err(Error::InvalidKernel(violations));
        }
        Ok(Kernel { rows, cols, ones })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of ones; equals the scheme threshold `k`.
    #[inline]
    pub fn threshold(&self) -> usize {
        self.ones.len()
    }

    #[inline]
    pub fn cell_count(&self) -> usize {
        self.rows * self.cols
    }

    /// Ones positions in row-major order.
    #[inline]
    pub fn ones(&self) -> &[(usize, usize)] {
        &self.ones
    }

    /// Row-major bitmap, `true` for ones.
    pub fn to_bits(&self) -> Vec<bool> {
        let mut bits = vec![false; self.cell_count()];
        for &(r, c) in &self.ones {
            bits[r * self.cols + c] = true;
        }
        bits
    }
}

/// How the non-origin ones are placed during generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMode {
    /// `k - 1` distinct non-origin cells drawn uniformly.
    Uniform,
    /// Ones at cell indices `0, s, 2s, ...` with stride `s = cells / k`,
    /// which keeps successive kernel placements nearly disjoint and so
    /// yields a low coefficient of incidence.
    Cyclic,
}

pub fn generate_kernel(
    rows: usize,
    cols: usize,
    k: usize,
    mode: KernelMode,
    seed: u64,
) -> Result<Kernel> {
    if rows == 0 || cols == 0 {
        return Err(Error::Parameter("kernel dimensions must be at least 1x1".into()));
    }
    if k < 2 {
        return Err(Error::Parameter(format!("threshold k = {k} must be at least 2")));
    }
    let cells = rows * cols;
    if cells < k {
        return Err(Error::Parameter(format!(
            "kernel with {cells} cells cannot hold {k} ones"
        )));
    }
    let ones: Vec<(usize, usize)> = match mode {
        KernelMode::Uniform => {
            let mut rng: ChaCha8Rng = stream_rng(seed, 0);
            let mut ones = vec![(0, 0)];
            let picks = rand::seq::index::sample(&mut rng, cells - 1, k - 1);
            ones.extend(picks.iter().map(|i| {
                let cell = i + 1;
                (cell / cols, cell % cols)
            }));
            ones
        }
        KernelMode::Cyclic => {
            let stride = cells / k;
            (0..k).map(|j| (j * stride / cols, j * stride % cols)).collect()
        }
    };
    Kernel::new(rows, cols, ones)
}

/// One coefficient slot of one anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// The image intensity at this position.
    Pixel { row: usize, col: usize },
    /// A fresh random value: the cell was already marked or out of bounds.
    Filler,
}

/// The full deterministic path of the kernel over an image: the ordered
/// anchors and, per anchor, which coefficient comes from which pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraversalPlan {
    width: usize,
    height: usize,
    anchors: Vec<(usize, usize)>,
    selections: Vec<Vec<Selection>>,
    filler_count: usize,
}

impl TraversalPlan {
    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Anchor positions in traversal order; the count equals the share size.
    #[inline]
    pub fn anchors(&self) -> &[(usize, usize)] {
        &self.anchors
    }

    #[inline]
    pub fn anchor_count(&self) -> usize {
        self.anchors.len()
    }

    /// Per-anchor coefficient descriptors, in the kernel's row-major ones
    /// order.
    #[inline]
    pub fn selections(&self) -> &[Vec<Selection>] {
        &self.selections
    }

    /// Total random fillers across the plan.
    #[inline]
    pub fn filler_count(&self) -> usize {
        self.filler_count
    }

    /// True when any coefficient of the given anchor is a random filler.
    #[inline]
    pub fn anchor_has_filler(&self, anchor: usize) -> bool {
        self.selections[anchor].iter().any(|s| matches!(s, Selection::Filler))
    }
}

/// Walks image cells in (Manhattan distance to the origin, row, column)
/// order, i.e. along anti-diagonals.
struct DiagonalCursor {
    width: usize,
    height: usize,
    diag: usize,
    row: usize,
}

impl DiagonalCursor {
    fn new(width: usize, height: usize) -> Self {
        DiagonalCursor { width, height, diag: 0, row: 0 }
    }

    /// Next cell in order, skipping cells already marked. Marks never clear,
    /// so the cursor only moves forward.
    fn next_unmarked(&mut self, marked: &[bool]) -> Option<(usize, usize)> {
        loop {
            if self.diag > self.width - 1 + self.height - 1 {
                return None;
            }
            let col = self.diag - self.row;
            let pos = (self.row, col);
            // Advance state before inspecting so the next call resumes after
            // this cell.
            if self.row < self.height - 1 && self.row < self.diag {
                self.row += 1;
            } else {
                self.diag += 1;
                self.row = self.diag.saturating_sub(self.width - 1);
            }
            if col < self.width && !marked[pos.0 * self.width + pos.1] {
                return Some(pos);
            }
        }
    }
}

/// Builds the deterministic traversal of `kernel` over a `width` x `height`
/// image. Every pixel is selected exactly once; ones that land on marked or
/// out-of-bounds cells become fillers.
pub fn traversal_order(kernel: &Kernel, width: usize, height: usize) -> Result<TraversalPlan> {
    if width == 0 || height == 0 {
        return Err(Error::Parameter("image dimensions must be at least 1x1".into()));
    }
    let pixel_count = width * height;
    let mut marked = vec![false; pixel_count];
    let mut remaining = pixel_count;
    let mut cursor = DiagonalCursor::new(width, height);
    let mut anchors = Vec::new();
    let mut selections = Vec::new();
    let mut filler_count = 0usize;
    while remaining > 0 {
        let (ar, ac) = cursor
            .next_unmarked(&marked)
            .expect("unmarked pixels remain, the cursor must find one");
        let mut sels = Vec::with_capacity(kernel.threshold());
        for &(dr, dc) in kernel.ones() {
            let (r, c) = (ar + dr, ac + dc);
            if r < height && c < width && !marked[r * width + c] {
                marked[r * width + c] = true;
                remaining -= 1;
                sels.push(Selection::Pixel { row: r, col: c });
            } else {
                filler_count += 1;
                sels.push(Selection::Filler);
            }
        }
        anchors.push((ar, ac));
        selections.push(sels);
    }
    Ok(TraversalPlan { width, height, anchors, selections, filler_count })
}

/// Ratio of random fillers to kernel cells when the kernel traverses an
/// image of its own dimensions. Stored as the exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoiResult {
    /// Random selections accumulated by the set recurrence.
    pub random_count: u64,
    /// `|X ∪ Y|`, the kernel's cell count.
    pub footprint: u64,
}

impl CoiResult {
    #[inline]
    pub fn value(&self) -> f64 {
        self.random_count as f64 / self.footprint as f64
    }
}

/// Computes the coefficient of incidence by the set recurrence: starting
/// from the ones positions, each unvisited zero cell in turn shifts the ones
/// onto it, counting re-selected and out-of-footprint positions as random,
/// and merges the shifted set into the visited set. The result equals the
/// filler ratio of [`traversal_order`] run on a kernel-sized image, but is
/// computed independently of it.
pub fn coefficient_of_incidence(kernel: &Kernel) -> CoiResult {
    let rows = kernel.rows();
    let cols = kernel.cols();
    let ones = kernel.ones();
    let mut visited: HashSet<(usize, usize)> = ones.iter().copied().collect();
    let mut random_count = 0u64;

    // Zero cells in (Manhattan distance, row, column) order; membership in
    // the visited set is re-evaluated as it grows.
    let mut order: Vec<(usize, usize)> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .collect();
    order.sort_by_key(|&(r, c)| (r + c, r, c));

    for anchor in order {
        if visited.contains(&anchor) {
            continue;
        }
        let shifted: Vec<(usize, usize)> =
            ones.iter().map(|&(r, c)| (r + anchor.0, c + anchor.1)).collect();
        for &pos in &shifted {
            if visited.contains(&pos) {
                random_count += 1;
            } else if pos.0 >= rows || pos.1 >= cols {
                random_count += 1;
            }
        }
        visited.extend(shifted);
    }
    CoiResult { random_count, footprint: kernel.cell_count() as u64 }
}

/// Where a selected coefficient came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientSource {
    Pixel,
    Filler,
}

/// Materializes the `k` coefficients for one anchor of a plan: pixel slots
/// read the image (clamped to 250 in the mod-251 mode), filler slots draw a
/// fresh value from the mode's full pixel domain so fillers are
/// indistinguishable from pixel data.
pub fn select_coefficients(
    plan: &TraversalPlan,
    anchor: usize,
    image: &Image,
    mode: Mode,
    rng: &mut impl Rng,
) -> Result<Vec<(u16, CoefficientSource)>> {
    if plan.width() != image.width() || plan.height() != image.height() {
        return Err(Error::InvalidInput(format!(
            "plan is for {}x{}, image is {}x{}",
            plan.width(),
            plan.height(),
            image.width(),
            image.height()
        )));
    }
    let Some(selections) = plan.selections().get(anchor) else {
        return Err(Error::InvalidInput(format!(
            "anchor index {anchor} out of range, plan has {}",
            plan.anchor_count()
        )));
    };
    let cap = mode.pixel_cap() as u16;
    Ok(selections
        .iter()
        .map(|sel| match *sel {
            Selection::Pixel { row, col } => {
                ((image.get(row, col) as u16).min(cap), CoefficientSource::Pixel)
            }
            Selection::Filler => (rng.random_range(0..=cap), CoefficientSource::Filler),
        })
        .collect())
}
