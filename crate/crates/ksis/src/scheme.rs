//! The full kernel-driven (k, n)-threshold scheme: share generation for the
//! image, sharing of the kernel itself, and reconstruction from any k
//! bundles.
//!
//! Splitting builds the traversal plan, turns each anchor's selections into
//! the coefficients of one polynomial, and hands every participant one
//! evaluation per anchor. The kernel would be a single point of failure if
//! kept aside, so its packed bitmap rides along, shared with the mod-257
//! byte scheme under the same threshold. The polynomials themselves are
//! never retained.
//!
//! Reconstruction pools the kernel shares first; a bitmap that violates the
//! kernel rules means some pooled share is corrupted or forged, which is the
//! scheme's tamper signal. With the kernel back, the traversal is retraced
//! and each anchor's coefficients are interpolated and mapped to pixels;
//! filler coefficients are discarded.

use crate::baseline::{
    check_scheme_params, resolve_wu_block, store_residue, wu_split_stream, FlatShare, ShareMode,
    P251_PIXEL_CAP,
};
use crate::error::{Error, Result};
use crate::field::{lagrange_interpolate, Polynomial, PrimeField, SharePoint};
use crate::image::Image;
use crate::kernel::{
    select_coefficients, traversal_order, Kernel, Selection, TraversalPlan,
};
use crate::stream_rng;

/// Which baseline arithmetic the kernel scheme runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Mod 251: intensities above 250 are clamped.
    ThienLin251,
    /// Mod 257: lossless for the full 8-bit range (up to the stored-zero
    /// ambiguity described in the baseline module).
    Wu257,
}

impl Mode {
    pub fn field(self) -> PrimeField {
        match self {
            Mode::ThienLin251 => PrimeField::P251,
            Mode::Wu257 => PrimeField::P257,
        }
    }

    /// Largest storable pixel value; also the filler domain bound.
    pub fn pixel_cap(self) -> u8 {
        match self {
            Mode::ThienLin251 => P251_PIXEL_CAP,
            Mode::Wu257 => 255,
        }
    }

    pub(crate) fn wire_byte(self) -> u8 {
        match self {
            Mode::ThienLin251 => 0,
            Mode::Wu257 => 1,
        }
    }

    pub(crate) fn from_wire(byte: u8) -> Result<Mode> {
        match byte {
            0 => Ok(Mode::ThienLin251),
            1 => Ok(Mode::Wu257),
            other => Err(Error::Format(format!("unknown mode byte {other}"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::ThienLin251 => write!(f, "tl251"),
            Mode::Wu257 => write!(f, "wu257"),
        }
    }
}

/// One participant's payload: the image share, the kernel share, and the
/// metadata needed to retrace the traversal. All bundles of one secret agree
/// on every field except `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareBundle {
    pub x: u16,
    pub mode: Mode,
    pub k: u16,
    pub n: u16,
    pub image_width: u32,
    pub image_height: u32,
    pub kernel_rows: u16,
    pub kernel_cols: u16,
    /// One stored byte per anchor (256 stored as 0 in mod-257 mode).
    pub image_share: Vec<u8>,
    /// This participant's share of the packed kernel bitmap.
    pub kernel_share: Vec<u8>,
}

impl ShareBundle {
    /// The image share viewed as a flat share stream, e.g. for running the
    /// single-share estimator against it.
    pub fn image_flat_share(&self) -> FlatShare {
        let mode = match self.mode {
            Mode::ThienLin251 => ShareMode::ThienLin251,
            Mode::Wu257 => ShareMode::Wu257,
        };
        FlatShare { x: self.x, mode, values: self.image_share.clone() }
    }

    fn kernel_flat_share(&self) -> FlatShare {
        FlatShare { x: self.x, mode: ShareMode::Wu257, values: self.kernel_share.clone() }
    }
}

/// Maximum filler re-draws per anchor when an evaluation hits 256 in mod-257
/// mode. Each retry succeeds with overwhelming probability, so exhaustion is
/// theoretical; the value is then stored as 0 like any other 256.
const FILLER_REDRAW_LIMIT: u32 = 64;

fn pack_bits(bits: &[bool]) -> Vec<u8> {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for (i, &bit) in bits.iter().enumerate() {
        if bit {
            bytes[i / 8] |= 0x80 >> (i % 8);
        }
    }
    bytes
}

fn unpack_bits(bytes: &[u8], count: usize) -> Vec<bool> {
    (0..count).map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0).collect()
}

/// Byte length of a packed kernel bitmap.
fn kernel_byte_count(rows: usize, cols: usize) -> usize {
    (rows * cols).div_ceil(8)
}

/// Per-participant kernel share length.
pub fn kernel_share_len(rows: usize, cols: usize, k: usize) -> usize {
    kernel_byte_count(rows, cols).div_ceil(k)
}

/// Shares the kernel bitmap itself: packed row-major into bytes and split
/// with the mod-257 byte scheme under the same threshold, so the kernel
/// needs k participants to resurface just like the image.
pub fn share_kernel(kernel: &Kernel, k: usize, n: usize) -> Result<Vec<FlatShare>> {
    if kernel.threshold() != k {
        return Err(Error::Parameter(format!(
            "kernel carries {} ones but the scheme threshold is {k}",
            kernel.threshold()
        )));
    }
    let bytes = pack_bits(&kernel.to_bits());
    wu_split_stream(&bytes, k, n)
}

/// Cap on combined 0/256 interpretations tried while rebuilding the kernel;
/// honest shares need a handful, corrupted ones blow past it.
const KERNEL_COMBO_CAP: usize = 4096;

enum SubsetSearch {
    Found,
    NotFound,
    BudgetExhausted,
}

/// Visits subsets of `0..n` by increasing size, then lexicographic order,
/// until `visit` returns true or `budget` subsets have been tried.
fn search_subsets_by_size(
    n: usize,
    budget: usize,
    mut visit: impl FnMut(&[usize]) -> bool,
) -> SubsetSearch {
    fn rec(
        start: usize,
        n: usize,
        size: usize,
        cur: &mut Vec<usize>,
        tried: &mut usize,
        budget: usize,
        visit: &mut impl FnMut(&[usize]) -> bool,
    ) -> Option<SubsetSearch> {
        if cur.len() == size {
            if *tried >= budget {
                return Some(SubsetSearch::BudgetExhausted);
            }
            *tried += 1;
            return visit(cur).then_some(SubsetSearch::Found);
        }
        for i in start..=n - (size - cur.len()) {
            cur.push(i);
            let result = rec(i + 1, n, size, cur, tried, budget, visit);
            cur.pop();
            if result.is_some() {
                return result;
            }
        }
        None
    }
    let mut tried = 0usize;
    let mut cur = Vec::new();
    for size in 0..=n {
        if let Some(outcome) = rec(0, n, size, &mut cur, &mut tried, budget, &mut visit) {
            return outcome;
        }
    }
    SubsetSearch::NotFound
}

/// Rebuilds the kernel from at least `k` kernel shares. Stored zeros are
/// resolved by requiring every data byte to decode into 0..=255 (padding
/// bytes into exactly 0) and the final bitmap to satisfy the kernel rules
/// for threshold `k`; interpretations are tried cheapest first. Any failure
/// is reported as a suspected forged share, which is the scheme's
/// adversary-detection signal.
pub fn reconstruct_kernel(
    shares: &[FlatShare],
    k: usize,
    kernel_rows: usize,
    kernel_cols: usize,
) -> Result<Kernel> {
    if k < 2 {
        return Err(Error::Parameter(format!("threshold k = {k} must be at least 2")));
    }
    if shares.len() < k {
        return Err(Error::InsufficientShares { needed: k, got: shares.len() });
    }
    if kernel_rows == 0 || kernel_cols == 0 {
        return Err(Error::Parameter("kernel dimensions must be at least 1x1".into()));
    }
    let byte_count = kernel_byte_count(kernel_rows, kernel_cols);
    let share_len = byte_count.div_ceil(k);
    for share in &shares[..k] {
        if share.mode != ShareMode::Wu257 {
            return Err(Error::InvalidInput("kernel shares use the mod-257 scheme".into()));
        }
        if share.x == 0 || share.x >= 257 {
            return Err(Error::InvalidInput(format!("kernel share has invalid x = {}", share.x)));
        }
        if share.values.len() != share_len {
            return Err(Error::InvalidInput(format!(
                "kernel share length {} does not match expected {share_len}",
                share.values.len()
            )));
        }
    }
    let xs: Vec<u16> = shares[..k].iter().map(|s| s.x).collect();
    for i in 0..k {
        for j in i + 1..k {
            if xs[i] == xs[j] {
                return Err(Error::InvalidInput(format!("duplicate kernel share x = {}", xs[i])));
            }
        }
    }

    // Positions whose stored byte is 0 are the only ones that can hide a
    // 256. A block whose stored values are all zero decodes to the zero
    // polynomial, which is almost surely the truth for a sparse bitmap, so
    // the first search pass flips only zeros that sit next to nonzero values
    // ("content blocks"); a second pass over every zero covers the remote
    // case of a nonzero block evaluating to 0/256 across the board.
    let mut content_zeros: Vec<(usize, usize)> = Vec::new(); // (block, slot)
    let mut all_zeros: Vec<(usize, usize)> = Vec::new();
    for block in 0..share_len {
        let content = shares[..k].iter().any(|s| s.values[block] != 0);
        for (slot, share) in shares[..k].iter().enumerate() {
            if share.values[block] == 0 {
                all_zeros.push((block, slot));
                if content {
                    content_zeros.push((block, slot));
                }
            }
        }
    }

    let literal_blocks: Vec<Vec<u16>> = (0..share_len)
        .map(|block| {
            let points: Vec<SharePoint> = shares[..k]
                .iter()
                .map(|s| SharePoint { x: s.x, y: s.values[block] as u16 })
                .collect();
            lagrange_interpolate(&points, k, PrimeField::P257)
                .map(|p| p.coefficients().to_vec())
        })
        .collect::<Result<_>>()?;

    let block_ok = |block: usize, coeffs: &[u16]| {
        coeffs.iter().enumerate().all(|(i, &c)| {
            let pos = block * k + i;
            if pos < byte_count {
                c <= 255
            } else {
                c == 0 // zero padding beyond the bitmap
            }
        })
    };

    let cells = kernel_rows * kernel_cols;
    let run_pass = |zero_positions: &[(usize, usize)]| {
        let mut found: Option<Kernel> = None;
        let outcome = search_subsets_by_size(zero_positions.len(), KERNEL_COMBO_CAP, |flips| {
            let mut blocks: Vec<&[u16]> =
                literal_blocks.iter().map(|b| b.as_slice()).collect();
            let mut reinterpreted: Vec<(usize, Vec<u16>)> = Vec::new();
            let mut affected: Vec<usize> = flips.iter().map(|&f| zero_positions[f].0).collect();
            affected.sort_unstable();
            affected.dedup();
            for &block in &affected {
                let points: Vec<SharePoint> = shares[..k]
                    .iter()
                    .enumerate()
                    .map(|(slot, s)| {
                        let flipped =
                            flips.iter().any(|&f| zero_positions[f] == (block, slot));
                        SharePoint {
                            x: s.x,
                            y: if flipped { 256 } else { s.values[block] as u16 },
                        }
                    })
                    .collect();
                match lagrange_interpolate(&points, k, PrimeField::P257) {
                    Ok(poly) => reinterpreted.push((block, poly.coefficients().to_vec())),
                    Err(_) => return false,
                }
            }
            for (block, coeffs) in &reinterpreted {
                blocks[*block] = coeffs.as_slice();
            }
            if !(0..share_len).all(|b| block_ok(b, blocks[b])) {
                return false;
            }
            let mut bytes: Vec<u8> = Vec::with_capacity(share_len * k);
            for b in &blocks {
                bytes.extend(b.iter().map(|&v| v as u8));
            }
            bytes.truncate(byte_count);
            let bits = unpack_bits(&bytes, cells);
            match Kernel::from_bits(kernel_rows, kernel_cols, &bits, k) {
                Ok(kernel) => {
                    found = Some(kernel);
                    true
                }
                Err(_) => false,
            }
        });
        (outcome, found)
    };

    match run_pass(&content_zeros) {
        (SubsetSearch::Found, found) => return Ok(found.expect("set when search succeeds")),
        (SubsetSearch::NotFound | SubsetSearch::BudgetExhausted, _) => {}
    }
    match run_pass(&all_zeros) {
        (SubsetSearch::Found, found) => Ok(found.expect("set when search succeeds")),
        (SubsetSearch::NotFound, _) => Err(Error::ForgedShareSuspected(
            "no decoding of the pooled kernel shares forms a well-formed kernel".into(),
        )),
        (SubsetSearch::BudgetExhausted, _) => Err(Error::ForgedShareSuspected(
            "kernel shares admit too many decodings".into(),
        )),
    }
}

/// Splits `image` into `n` bundles of which any `k` reconstruct it. The
/// random source is derived per anchor from `(seed, anchor index)`, so a
/// fixed seed reproduces the exact shares while different seeds give fresh
/// shares for the same secret.
pub fn split(
    image: &Image,
    kernel: &Kernel,
    k: usize,
    n: usize,
    mode: Mode,
    seed: u64,
) -> Result<Vec<ShareBundle>> {
    if kernel.threshold() != k {
        return Err(Error::Parameter(format!(
            "kernel carries {} ones but the scheme threshold is {k}",
            kernel.threshold()
        )));
    }
    check_scheme_params(k, n, mode.field())?;
    if kernel.rows() > u16::MAX as usize || kernel.cols() > u16::MAX as usize {
        return Err(Error::Parameter("kernel dimensions exceed the bundle format".into()));
    }
    if image.width() > u32::MAX as usize || image.height() > u32::MAX as usize {
        return Err(Error::Parameter("image dimensions exceed the bundle format".into()));
    }
    let plan = traversal_order(kernel, image.width(), image.height())?;
    let anchor_count = plan.anchor_count();
    if anchor_count > u32::MAX as usize {
        return Err(Error::Parameter("share size exceeds the bundle format".into()));
    }
    let field = mode.field();
    let xs: Vec<u16> = (1..=n as u16).collect();
    let mut image_shares: Vec<Vec<u8>> = vec![Vec::with_capacity(anchor_count); n];
    let mut evals = vec![0u16; n];
    for anchor in 0..anchor_count {
        let mut rng = stream_rng(seed, anchor as u64);
        let has_filler = plan.anchor_has_filler(anchor);
        let mut redraws = 0;
        loop {
            let coeffs = select_coefficients(&plan, anchor, image, mode, &mut rng)?;
            let values: Vec<u16> = coeffs.into_iter().map(|(v, _)| v).collect();
            let poly = Polynomial::new(values, field)?;
            for (e, &x) in evals.iter_mut().zip(&xs) {
                *e = poly.eval(x);
            }
            // In mod-257 mode an evaluation of 256 must be stored as 0 and
            // becomes ambiguous on decode. When the anchor has fillers we can
            // sidestep that entirely by re-drawing them, which in turn lets
            // the decoder read stored zeros at filler anchors literally.
            let needs_redraw = mode == Mode::Wu257
                && has_filler
                && redraws < FILLER_REDRAW_LIMIT
                && evals.contains(&256);
            if !needs_redraw {
                break;
            }
            redraws += 1;
        }
        for (share, &e) in image_shares.iter_mut().zip(&evals) {
            share.push(store_residue(e));
        }
    }

    let kernel_shares = share_kernel(kernel, k, n)?;
    Ok(xs
        .iter()
        .zip(image_shares)
        .zip(kernel_shares)
        .map(|((&x, image_share), kernel_share)| ShareBundle {
            x,
            mode,
            k: k as u16,
            n: n as u16,
            image_width: image.width() as u32,
            image_height: image.height() as u32,
            kernel_rows: kernel.rows() as u16,
            kernel_cols: kernel.cols() as u16,
            image_share,
            kernel_share: kernel_share.values,
        })
        .collect())
}

fn check_consistent_metadata(bundles: &[ShareBundle]) -> Result<()> {
    let first = &bundles[0];
    for b in &bundles[1..] {
        let same = b.mode == first.mode
            && b.k == first.k
            && b.n == first.n
            && b.image_width == first.image_width
            && b.image_height == first.image_height
            && b.kernel_rows == first.kernel_rows
            && b.kernel_cols == first.kernel_cols;
        if !same {
            return Err(Error::InvalidInput(
                "share bundles carry mismatched metadata".into(),
            ));
        }
    }
    Ok(())
}

/// Reconstructs the image from at least `k` bundles: pool the kernel shares,
/// rebuild the kernel, retrace the traversal, and interpolate each anchor's
/// coefficients. Pixel-mapped coefficients are written exactly once each;
/// filler coefficients are discarded.
pub fn combine(bundles: &[ShareBundle]) -> Result<Image> {
    if bundles.is_empty() {
        return Err(Error::Parameter("no share bundles supplied".into()));
    }
    check_consistent_metadata(bundles)?;
    let first = &bundles[0];
    let k = first.k as usize;
    let n = first.n as usize;
    let mode = first.mode;
    check_scheme_params(k, n, mode.field())?;
    if bundles.len() < k {
        return Err(Error::InsufficientShares { needed: k, got: bundles.len() });
    }
    for b in bundles {
        if b.x == 0 || b.x as usize > n {
            return Err(Error::InvalidInput(format!("bundle has invalid x = {}", b.x)));
        }
    }
    let mut sorted: Vec<&ShareBundle> = bundles.iter().collect();
    sorted.sort_by_key(|b| b.x);
    for pair in sorted.windows(2) {
        if pair[0].x == pair[1].x {
            return Err(Error::InvalidInput(format!("duplicate bundle for x = {}", pair[0].x)));
        }
    }
    let used = &sorted[..k];

    let kernel_shares: Vec<FlatShare> = used.iter().map(|b| b.kernel_flat_share()).collect();
    let kernel = reconstruct_kernel(
        &kernel_shares,
        k,
        first.kernel_rows as usize,
        first.kernel_cols as usize,
    )?;

    let width = first.image_width as usize;
    let height = first.image_height as usize;
    let plan = traversal_order(&kernel, width, height)?;
    let anchor_count = plan.anchor_count();
    for b in used {
        if b.image_share.len() != anchor_count {
            return Err(Error::InvalidInput(format!(
                "image share length {} does not match the {anchor_count} anchors of the kernel",
                b.image_share.len()
            )));
        }
    }

    let xs: Vec<u16> = used.iter().map(|b| b.x).collect();
    let field = mode.field();
    let mut canvas: Vec<Option<u8>> = vec![None; width * height];
    let mut stored = vec![0u8; k];
    let mut targets: Vec<Option<usize>> = vec![None; k];
    for anchor in 0..anchor_count {
        for (s, b) in stored.iter_mut().zip(used) {
            *s = b.image_share[anchor];
        }
        let selections = &plan.selections()[anchor];
        for (t, sel) in targets.iter_mut().zip(selections) {
            *t = match *sel {
                Selection::Pixel { row, col } => Some(row * width + col),
                Selection::Filler => None,
            };
        }
        let coeffs: Vec<u16> = match mode {
            Mode::ThienLin251 => {
                if let Some(&bad) = stored.iter().find(|&&v| v > P251_PIXEL_CAP) {
                    return Err(Error::InvalidInput(format!(
                        "share value {bad} is out of range for the mod-251 scheme"
                    )));
                }
                let points: Vec<SharePoint> = xs
                    .iter()
                    .zip(&stored)
                    .map(|(&x, &s)| SharePoint { x, y: s as u16 })
                    .collect();
                lagrange_interpolate(&points, k, field)?.coefficients().to_vec()
            }
            Mode::Wu257 => {
                if plan.anchor_has_filler(anchor) {
                    // Split re-draws fillers until no evaluation is 256, so a
                    // stored 0 here is a literal 0.
                    let points: Vec<SharePoint> = xs
                        .iter()
                        .zip(&stored)
                        .map(|(&x, &s)| SharePoint { x, y: s as u16 })
                        .collect();
                    let coeffs = lagrange_interpolate(&points, k, field)?.coefficients().to_vec();
                    for (&c, &t) in coeffs.iter().zip(&targets) {
                        if t.is_some() && c > 255 {
                            return Err(Error::ReconstructionFailure(
                                "a pixel coefficient decodes outside the 8-bit range".into(),
                            ));
                        }
                    }
                    coeffs
                } else {
                    resolve_wu_block(&xs, &stored, k, &targets, &canvas, width)?
                }
            }
        };
        for (&coeff, &target) in coeffs.iter().zip(&targets) {
            if let Some(pos) = target {
                debug_assert!(canvas[pos].is_none(), "each pixel is selected exactly once");
                canvas[pos] = Some(coeff as u8);
            }
        }
    }
    let data: Vec<u8> = canvas.into_iter().map(|p| p.expect("plan covers all pixels")).collect();
    Image::new(width, height, data)
}

/// Re-derives the traversal statistics a split would use, without splitting.
pub fn plan_for(kernel: &Kernel, width: usize, height: usize) -> Result<TraversalPlan> {
    traversal_order(kernel, width, height)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::thienlin_split;
    use crate::kernel::{generate_kernel, KernelMode};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn kernel(rows: usize, cols: usize, ones: &[(usize, usize)]) -> Kernel {
        Kernel::new(rows, cols, ones.to_vec()).unwrap()
    }

    fn random_image(rng: &mut ChaCha8Rng, width: usize, height: usize) -> Image {
        let data: Vec<u8> = (0..width * height).map(|_| rng.random()).collect();
        Image::new(width, height, data).unwrap()
    }

    /// Stored zeros among the first k image shares make a wu257 decode
    /// ambiguous at anchors without fillers.
    fn wu_unambiguous(bundles: &[ShareBundle], kernel: &Kernel) -> bool {
        let plan =
            traversal_order(kernel, bundles[0].image_width as usize, bundles[0].image_height as usize)
                .unwrap();
        let k = bundles[0].k as usize;
        (0..plan.anchor_count()).all(|a| {
            plan.anchor_has_filler(a) || bundles[..k].iter().all(|b| b.image_share[a] != 0)
        })
    }

    #[test]
    fn tiling_kernel_matches_sequential_scheme() {
        // A 1-row image under a 1xk tiling kernel selects pixels in stream
        // order, so the shares coincide with the sequential mod-251 scheme.
        let image = Image::new(6, 1, vec![10, 20, 30, 40, 50, 60]).unwrap();
        let kern = kernel(1, 2, &[(0, 0), (0, 1)]);
        let bundles = split(&image, &kern, 2, 3, Mode::ThienLin251, 9).unwrap();
        let flat = thienlin_split(&image, 2, 3).unwrap();
        for (b, f) in bundles.iter().zip(&flat) {
            assert_eq!(b.image_share, f.values);
            assert_eq!(b.image_share.len(), 3); // width * height / k
        }
    }

    #[test]
    fn share_size_of_diagonal_kernel() {
        let image = Image::new(2, 2, vec![1, 2, 3, 4]).unwrap();
        let kern = kernel(2, 2, &[(0, 0), (1, 1)]);
        let bundles = split(&image, &kern, 2, 2, Mode::Wu257, 1).unwrap();
        // 4 pixels + 2 fillers over k = 2 gives M = 3.
        assert_eq!(bundles[0].image_share.len(), 3);
    }

    #[test]
    fn different_seeds_give_fresh_shares_and_same_image() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let image = random_image(&mut rng, 12, 12);
        // Spread ones produce plenty of fillers.
        let kern = kernel(4, 4, &[(0, 0), (1, 3), (2, 1), (3, 2)]);
        let plan = traversal_order(&kern, 12, 12).unwrap();
        assert!(plan.filler_count() >= 8);
        let a = split(&image, &kern, 4, 4, Mode::ThienLin251, 100).unwrap();
        let b = split(&image, &kern, 4, 4, Mode::ThienLin251, 101).unwrap();
        assert_ne!(a[0].image_share, b[0].image_share);
        let img_a = combine(&a).unwrap();
        let img_b = combine(&b).unwrap();
        assert_eq!(img_a, img_b);
    }

    #[test]
    fn split_is_deterministic_for_a_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let image = random_image(&mut rng, 8, 8);
        let kern = generate_kernel(3, 3, 3, KernelMode::Uniform, 5).unwrap();
        let a = split(&image, &kern, 3, 4, Mode::Wu257, 77).unwrap();
        let b = split(&image, &kern, 3, 4, Mode::Wu257, 77).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn metadata_agrees_across_bundles() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let image = random_image(&mut rng, 5, 7);
        let kern = generate_kernel(3, 3, 2, KernelMode::Uniform, 1).unwrap();
        let bundles = split(&image, &kern, 2, 4, Mode::Wu257, 1).unwrap();
        for (i, b) in bundles.iter().enumerate() {
            assert_eq!(b.x, i as u16 + 1);
            assert_eq!((b.k, b.n), (2, 4));
            assert_eq!((b.image_width, b.image_height), (5, 7));
            assert_eq!((b.kernel_rows, b.kernel_cols), (3, 3));
        }
    }

    #[test]
    fn kernel_share_length_follows_packing() {
        let kern = generate_kernel(5, 5, 5, KernelMode::Uniform, 3).unwrap();
        // 25 cells pack into 4 bytes; shared with k = 5 gives 1 value each.
        let shares = share_kernel(&kern, 5, 6).unwrap();
        for s in &shares {
            assert_eq!(s.values.len(), 1);
        }
        let shares = share_kernel(&kern, 2, 3).unwrap_err();
        assert!(matches!(shares, Error::Parameter(_)));
    }

    #[test]
    fn kernel_round_trips_through_any_k_shares() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..30 {
            let rows = rng.random_range(2..=9);
            let cols = rng.random_range(2..=9);
            let k = rng.random_range(2..=(rows * cols).min(5));
            let kern = generate_kernel(rows, cols, k, KernelMode::Uniform, rng.random()).unwrap();
            let n = rng.random_range(k..=k + 3);
            let shares = share_kernel(&kern, k, n).unwrap();
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            let subset: Vec<FlatShare> = idx[..k].iter().map(|&i| shares[i].clone()).collect();
            let back = reconstruct_kernel(&subset, k, rows, cols).unwrap();
            assert_eq!(back, kern);
        }
    }

    #[test]
    fn too_few_kernel_shares_is_an_error() {
        let kern = generate_kernel(4, 4, 3, KernelMode::Uniform, 2).unwrap();
        let shares = share_kernel(&kern, 3, 4).unwrap();
        assert!(matches!(
            reconstruct_kernel(&shares[..2], 3, 4, 4),
            Err(Error::InsufficientShares { needed: 3, got: 2 })
        ));
    }

    #[test]
    fn padded_random_kernel_share_fails_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let kern = generate_kernel(5, 5, 3, KernelMode::Uniform, 4).unwrap();
        let shares = share_kernel(&kern, 3, 3).unwrap();
        let mut detected = 0;
        for _ in 0..20 {
            let mut padded = shares[..2].to_vec();
            let len = shares[0].values.len();
            padded.push(FlatShare {
                x: 3,
                mode: ShareMode::Wu257,
                values: (0..len).map(|_| rng.random()).collect(),
            });
            if matches!(
                reconstruct_kernel(&padded, 3, 5, 5),
                Err(Error::ForgedShareSuspected(_))
            ) {
                detected += 1;
            }
        }
        assert!(detected >= 19, "forged share detected {detected}/20 times");
    }

    #[test]
    fn round_trip_wu_mode_on_unambiguous_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let mut checked = 0;
        for seed in 0..200u64 {
            let w = rng.random_range(2..=16);
            let h = rng.random_range(2..=16);
            let image = random_image(&mut rng, w, h);
            let rows = rng.random_range(2..=5);
            let cols = rng.random_range(2..=5);
            let k = rng.random_range(2..=(rows * cols).min(4));
            let kern =
                generate_kernel(rows, cols, k, KernelMode::Uniform, rng.random()).unwrap();
            let n = rng.random_range(k..=5);
            let bundles = split(&image, &kern, k, n, Mode::Wu257, seed).unwrap();
            if !wu_unambiguous(&bundles, &kern) {
                continue;
            }
            let back = combine(&bundles).unwrap();
            assert_eq!(back, image);
            checked += 1;
            if checked >= 60 {
                break;
            }
        }
        assert!(checked >= 30, "exercised {checked} unambiguous round trips");
    }

    #[test]
    fn round_trip_tl_mode_clamps() {
        let image = Image::new(4, 2, vec![0, 100, 251, 255, 30, 252, 250, 7]).unwrap();
        let kern = kernel(2, 2, &[(0, 0), (0, 1), (1, 1)]);
        let bundles = split(&image, &kern, 3, 5, Mode::ThienLin251, 3).unwrap();
        let back = combine(&bundles[1..4]).unwrap();
        let expected: Vec<u8> = image.pixels().iter().map(|&p| p.min(250)).collect();
        assert_eq!(back.pixels(), expected.as_slice());
    }

    #[test]
    fn combine_rejects_bad_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let image = random_image(&mut rng, 4, 4);
        let kern = generate_kernel(2, 2, 2, KernelMode::Uniform, 1).unwrap();
        let bundles = split(&image, &kern, 2, 3, Mode::Wu257, 5).unwrap();
        assert!(matches!(
            combine(&bundles[..1]),
            Err(Error::InsufficientShares { needed: 2, got: 1 })
        ));
        let mut mismatched = bundles.clone();
        mismatched[1].image_width = 99;
        assert!(matches!(combine(&mismatched), Err(Error::InvalidInput(_))));
        let mut dup = bundles.clone();
        dup[1].x = dup[0].x;
        dup[1].image_share = dup[0].image_share.clone();
        dup[1].kernel_share = dup[0].kernel_share.clone();
        assert!(matches!(combine(&dup[..2]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn corrupted_kernel_share_raises_forged_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let image = random_image(&mut rng, 6, 6);
        let kern = generate_kernel(4, 4, 3, KernelMode::Uniform, 9).unwrap();
        let mut bundles = split(&image, &kern, 3, 3, Mode::Wu257, 5).unwrap();
        for v in bundles[0].kernel_share.iter_mut() {
            *v = rng.random();
        }
        assert!(matches!(combine(&bundles), Err(Error::ForgedShareSuspected(_))));
    }

    #[test]
    fn split_validates_parameters() {
        let image = Image::new(2, 2, vec![0; 4]).unwrap();
        let kern = kernel(2, 2, &[(0, 0), (1, 1)]);
        assert!(matches!(
            split(&image, &kern, 3, 3, Mode::Wu257, 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            split(&image, &kern, 2, 1, Mode::Wu257, 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            split(&image, &kern, 2, 251, Mode::ThienLin251, 0),
            Err(Error::Parameter(_))
        ));
    }
}
