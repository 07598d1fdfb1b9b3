//! The three reference sharing schemes the kernel scheme builds on.
//!
//! * Per-pixel sharing mod 251: one polynomial per pixel, the pixel as the
//!   constant term and fresh random numbers as the remaining coefficients.
//!   Shares are as large as the image.
//! * Sequential sharing mod 251: `k` consecutive pixels fill all `k`
//!   coefficients, shrinking shares by a factor of `k` but clamping
//!   intensities above 250.
//! * Sequential sharing mod 257: same layout without clamping. Evaluations
//!   equal to 256 are stored as the byte 0, and reconstruction resolves the
//!   resulting 0-versus-256 ambiguity by enumerating candidate decodings and
//!   scoring decoded pixels against their already-decoded 4-neighbours.

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{lagrange_interpolate, Polynomial, PrimeField, SharePoint};
use crate::image::Image;
use crate::stream_rng;

/// Which split procedure produced a flat share.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShareMode {
    /// Per-pixel scheme mod 251.
    Shamir,
    /// Sequential k-pixel scheme mod 251.
    ThienLin251,
    /// Sequential k-pixel scheme mod 257 with the 256-as-0 byte convention.
    Wu257,
}

impl ShareMode {
    pub fn field(self) -> PrimeField {
        match self {
            ShareMode::Shamir | ShareMode::ThienLin251 => PrimeField::P251,
            ShareMode::Wu257 => PrimeField::P257,
        }
    }
}

/// One participant's share stream for a whole image (or byte stream).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatShare {
    pub x: u16,
    pub mode: ShareMode,
    pub values: Vec<u8>,
}

/// Clamp used whenever data is shared mod 251.
pub const P251_PIXEL_CAP: u8 = 250;

pub(crate) fn check_scheme_params(k: usize, n: usize, field: PrimeField) -> Result<()> {
    if k < 2 {
        return Err(Error::Parameter(format!("threshold k = {k} must be at least 2")));
    }
    if k > n {
        return Err(Error::Parameter(format!("threshold k = {k} exceeds participants n = {n}")));
    }
    if n >= field.modulus() as usize {
        return Err(Error::Parameter(format!(
            "participants n = {n} must be below the modulus {}",
            field.modulus()
        )));
    }
    Ok(())
}

fn evaluation_points(n: usize) -> Vec<u16> {
    (1..=n as u16).collect()
}

/// Per-pixel split mod 251: the clamped pixel is the constant term, the
/// remaining `k - 1` coefficients are fresh uniform residues drawn from a
/// per-pixel stream of `seed`.
pub fn shamir_split(image: &Image, k: usize, n: usize, seed: u64) -> Result<Vec<FlatShare>> {
    let field = PrimeField::P251;
    check_scheme_params(k, n, field)?;
    let xs = evaluation_points(n);
    let mut values: Vec<Vec<u8>> = vec![Vec::with_capacity(image.pixel_count()); n];
    let mut coeffs = vec![0u16; k];
    for (idx, &px) in image.pixels().iter().enumerate() {
        let mut rng = stream_rng(seed, idx as u64);
        coeffs[0] = px.min(P251_PIXEL_CAP) as u16;
        for c in coeffs.iter_mut().skip(1) {
            *c = rng.random_range(0..=P251_PIXEL_CAP as u16);
        }
        let poly = Polynomial::new(coeffs.clone(), field)?;
        for (share, &x) in values.iter_mut().zip(&xs) {
            share.push(poly.eval(x) as u8);
        }
    }
    Ok(xs
        .into_iter()
        .zip(values)
        .map(|(x, values)| FlatShare { x, mode: ShareMode::Shamir, values })
        .collect())
}

/// Inverse of [`shamir_split`]: pixel `j` is the recovered constant term of
/// polynomial `j`. Shares from unrelated images interpolate without error
/// and simply produce garbage.
pub fn shamir_combine(shares: &[FlatShare], k: usize, width: usize, height: usize) -> Result<Image> {
    let pixel_count = checked_pixel_count(width, height)?;
    validate_combine_shares(shares, k, ShareMode::Shamir, pixel_count)?;
    let field = PrimeField::P251;
    let used = &shares[..k];
    let mut data = Vec::with_capacity(pixel_count);
    let mut points = vec![SharePoint { x: 0, y: 0 }; k];
    for j in 0..pixel_count {
        for (pt, share) in points.iter_mut().zip(used) {
            *pt = SharePoint { x: share.x, y: share.values[j] as u16 };
        }
        let poly = lagrange_interpolate(&points, k, field)?;
        data.push(poly.coefficients()[0] as u8);
    }
    Image::new(width, height, data)
}

/// Sequential split mod 251: pixels are clamped to 250 and consumed `k` at a
/// time as the full coefficient vector. The stream is zero-padded to a
/// multiple of `k`, so each share holds `ceil(width*height / k)` values.
pub fn thienlin_split(image: &Image, k: usize, n: usize) -> Result<Vec<FlatShare>> {
    let field = PrimeField::P251;
    check_scheme_params(k, n, field)?;
    let stream: Vec<u16> =
        image.pixels().iter().map(|&p| p.min(P251_PIXEL_CAP) as u16).collect();
    split_stream(&stream, k, n, field, ShareMode::ThienLin251)
}

/// Inverse of [`thienlin_split`]; padding coefficients are discarded.
pub fn thienlin_combine(
    shares: &[FlatShare],
    k: usize,
    width: usize,
    height: usize,
) -> Result<Image> {
    let pixel_count = checked_pixel_count(width, height)?;
    let share_len = pixel_count.div_ceil(k);
    validate_combine_shares(shares, k, ShareMode::ThienLin251, share_len)?;
    let field = PrimeField::P251;
    let used = &shares[..k];
    for share in used {
        if let Some(&bad) = share.values.iter().find(|&&v| v > P251_PIXEL_CAP) {
            return Err(Error::InvalidInput(format!(
                "share value {bad} is out of range for the mod-251 scheme"
            )));
        }
    }
    let mut data = Vec::with_capacity(share_len * k);
    let mut points = vec![SharePoint { x: 0, y: 0 }; k];
    for j in 0..share_len {
        for (pt, share) in points.iter_mut().zip(used) {
            *pt = SharePoint { x: share.x, y: share.values[j] as u16 };
        }
        let poly = lagrange_interpolate(&points, k, field)?;
        data.extend(poly.coefficients().iter().map(|&c| c as u8));
    }
    data.truncate(pixel_count);
    Image::new(width, height, data)
}

/// Sequential split mod 257: no clamping; evaluations equal to 256 are
/// stored as the byte 0.
pub fn wu_split(image: &Image, k: usize, n: usize) -> Result<Vec<FlatShare>> {
    wu_split_stream(image.pixels(), k, n)
}

/// Shares an arbitrary byte stream with the mod-257 scheme. Used for images
/// and for packed kernel bitmaps alike.
pub(crate) fn wu_split_stream(data: &[u8], k: usize, n: usize) -> Result<Vec<FlatShare>> {
    let field = PrimeField::P257;
    check_scheme_params(k, n, field)?;
    let stream: Vec<u16> = data.iter().map(|&b| b as u16).collect();
    split_stream(&stream, k, n, field, ShareMode::Wu257)
}

fn split_stream(
    stream: &[u16],
    k: usize,
    n: usize,
    field: PrimeField,
    mode: ShareMode,
) -> Result<Vec<FlatShare>> {
    let share_len = stream.len().div_ceil(k);
    let xs = evaluation_points(n);
    let mut values: Vec<Vec<u8>> = vec![Vec::with_capacity(share_len); n];
    let mut coeffs = vec![0u16; k];
    for block in 0..share_len {
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c = stream.get(block * k + i).copied().unwrap_or(0);
        }
        let poly = Polynomial::new(coeffs.clone(), field)?;
        for (share, &x) in values.iter_mut().zip(&xs) {
            share.push(store_residue(poly.eval(x)));
        }
    }
    Ok(xs
        .into_iter()
        .zip(values)
        .map(|(x, values)| FlatShare { x, mode, values })
        .collect())
}

/// Byte encoding of an evaluation: 256 becomes 0, everything else is itself.
#[inline]
pub(crate) fn store_residue(y: u16) -> u8 {
    if y == 256 {
        0
    } else {
        debug_assert!(y <= 255);
        y as u8
    }
}

/// Inverse of [`wu_split`]. Blocks are decoded greedily in stream order;
/// each stored 0 among the used shares may mean 0 or 256, so every
/// combination is tried and the decoding whose pixels sit closest to their
/// already-decoded 4-neighbours wins.
pub fn wu_combine(shares: &[FlatShare], k: usize, width: usize, height: usize) -> Result<Image> {
    let pixel_count = checked_pixel_count(width, height)?;
    let share_len = pixel_count.div_ceil(k);
    validate_combine_shares(shares, k, ShareMode::Wu257, share_len)?;
    let used = &shares[..k];
    let xs: Vec<u16> = used.iter().map(|s| s.x).collect();
    let mut canvas: Vec<Option<u8>> = vec![None; pixel_count];
    let mut stored = vec![0u8; k];
    let mut targets = vec![None; k];
    for block in 0..share_len {
        for (s, share) in stored.iter_mut().zip(used) {
            *s = share.values[block];
        }
        for (i, t) in targets.iter_mut().enumerate() {
            let pos = block * k + i;
            *t = (pos < pixel_count).then_some(pos);
        }
        let coeffs = resolve_wu_block(&xs, &stored, k, &targets, &canvas, width)?;
        for (coeff, target) in coeffs.iter().zip(&targets) {
            if let Some(pos) = *target {
                canvas[pos] = Some(*coeff as u8);
            }
        }
    }
    let data: Vec<u8> = canvas.into_iter().map(|p| p.expect("all pixels decoded")).collect();
    Image::new(width, height, data)
}

fn checked_pixel_count(width: usize, height: usize) -> Result<usize> {
    if width == 0 || height == 0 {
        return Err(Error::Parameter("image dimensions must be at least 1x1".into()));
    }
    width
        .checked_mul(height)
        .ok_or_else(|| Error::Parameter("image dimensions overflow".into()))
}

fn validate_combine_shares(
    shares: &[FlatShare],
    k: usize,
    mode: ShareMode,
    expected_len: usize,
) -> Result<()> {
    if k < 2 {
        return Err(Error::Parameter(format!("threshold k = {k} must be at least 2")));
    }
    if shares.len() < k {
        return Err(Error::InsufficientShares { needed: k, got: shares.len() });
    }
    for share in shares {
        if share.mode != mode {
            return Err(Error::InvalidInput("share produced by a different scheme".into()));
        }
        if share.x == 0 || share.x >= mode.field().modulus() {
            return Err(Error::InvalidInput(format!("share has invalid x = {}", share.x)));
        }
        if share.values.len() != expected_len {
            return Err(Error::InvalidInput(format!(
                "share length {} does not match expected {expected_len}",
                share.values.len()
            )));
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            if shares[i].x == shares[j].x {
                return Err(Error::InvalidInput(format!(
                    "duplicate share for x = {}",
                    shares[i].x
                )));
            }
        }
    }
    Ok(())
}

/// Upper bound on ambiguous stored zeros per block; beyond this the data is
/// treated as corrupted rather than enumerating millions of candidates.
pub(crate) const WU_AMBIGUITY_CAP: usize = 12;

/// One 0/256 interpretation of a share block.
#[derive(Debug, Clone)]
pub(crate) struct WuCandidate {
    /// Bitmask over the block's stored zeros: bit set = read as 256.
    pub flips: u64,
    /// Number of values read as 256.
    pub n256: u32,
    /// Interpolated coefficients under this interpretation.
    pub coeffs: Vec<u16>,
}

/// Enumerates every 0/256 interpretation of one block, interpolated, ordered
/// by (fewest 256 readings, smallest flip mask).
pub(crate) fn wu_candidates(xs: &[u16], stored: &[u8], k: usize) -> Result<Vec<WuCandidate>> {
    debug_assert_eq!(xs.len(), k);
    debug_assert_eq!(stored.len(), k);
    let zero_pos: Vec<usize> = (0..k).filter(|&i| stored[i] == 0).collect();
    if zero_pos.len() > WU_AMBIGUITY_CAP {
        return Err(Error::ReconstructionFailure(format!(
            "{} ambiguous stored zeros in one block exceed the cap of {WU_AMBIGUITY_CAP}",
            zero_pos.len()
        )));
    }
    let mut points: Vec<SharePoint> =
        xs.iter().zip(stored).map(|(&x, &s)| SharePoint { x, y: s as u16 }).collect();
    let mut out = Vec::with_capacity(1 << zero_pos.len());
    for flips in 0..(1u64 << zero_pos.len()) {
        for (bit, &pos) in zero_pos.iter().enumerate() {
            points[pos].y = if flips >> bit & 1 == 1 { 256 } else { 0 };
        }
        let poly = lagrange_interpolate(&points, k, PrimeField::P257)?;
        out.push(WuCandidate {
            flips,
            n256: flips.count_ones(),
            coeffs: poly.coefficients().to_vec(),
        });
    }
    out.sort_by_key(|c| (c.n256, c.flips));
    Ok(out)
}

/// Smoothness score of a candidate: the summed squared difference of each
/// decoded pixel to its already-decoded 4-neighbours, counting pixels decoded
/// earlier in the same candidate. `None` when a coefficient that maps to a
/// pixel cannot be an 8-bit intensity.
pub(crate) fn score_candidate(
    coeffs: &[u16],
    targets: &[Option<usize>],
    canvas: &[Option<u8>],
    width: usize,
) -> Option<u64> {
    let mut overlay: Vec<(usize, u8)> = Vec::with_capacity(coeffs.len());
    let mut score = 0u64;
    for (&coeff, &target) in coeffs.iter().zip(targets) {
        let Some(pos) = target else { continue };
        if coeff > 255 {
            return None;
        }
        let value = coeff as i64;
        let row = pos / width;
        let col = pos % width;
        let mut neighbours = [None; 4];
        neighbours[0] = (row > 0).then(|| pos - width);
        neighbours[1] = pos.checked_add(width).filter(|&p| p < canvas.len());
        neighbours[2] = (col > 0).then(|| pos - 1);
        neighbours[3] = (col + 1 < width).then(|| pos + 1);
        for npos in neighbours.into_iter().flatten() {
            let decoded = overlay
                .iter()
                .rev()
                .find(|(p, _)| *p == npos)
                .map(|&(_, v)| v)
                .or(canvas[npos]);
            if let Some(nv) = decoded {
                let d = value - nv as i64;
                score += (d * d) as u64;
            }
        }
        overlay.push((pos, value as u8));
    }
    Some(score)
}

/// Picks the best interpretation of one block: lowest smoothness score, ties
/// broken by fewer 256 readings, then by the smaller flip mask. The all-zero
/// reading wins by construction when no decoded neighbour exists.
pub(crate) fn resolve_wu_block(
    xs: &[u16],
    stored: &[u8],
    k: usize,
    targets: &[Option<usize>],
    canvas: &[Option<u8>],
    width: usize,
) -> Result<Vec<u16>> {
    let candidates = wu_candidates(xs, stored, k)?;
    let mut best: Option<(u64, u32, u64, Vec<u16>)> = None;
    for cand in candidates {
        let Some(score) = score_candidate(&cand.coeffs, targets, canvas, width) else {
            continue;
        };
        let key = (score, cand.n256, cand.flips);
        if best.as_ref().is_none_or(|(s, n, f, _)| key < (*s, *n, *f)) {
            best = Some((score, cand.n256, cand.flips, cand.coeffs));
        }
    }
    best.map(|(_, _, _, coeffs)| coeffs).ok_or_else(|| {
        Error::ReconstructionFailure(
            "every 0/256 interpretation of a block decodes outside the pixel range".into(),
        )
    })
}
