//! Bit-exact serialization: binary PGM images, plain PBM kernels, and the
//! KSIS share-bundle wire format.
//!
//! The bundle format is deliberately checksum-free; corruption shows up
//! through the length and range checks here and through kernel validation at
//! reconstruction time.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::kernel::Kernel;
use crate::scheme::{kernel_share_len, Mode, ShareBundle};

const BUNDLE_MAGIC: &[u8; 4] = b"KSIS";
const BUNDLE_VERSION: u8 = 1;

// ---------------------------------------------------------------------------
// Netpbm header scanning shared by PGM and PBM.

struct TokenScanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> TokenScanner<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        TokenScanner { bytes, pos: 0 }
    }

    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' | 0x0b | 0x0c => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => return,
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format("unexpected end of header".into()));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn decimal(&mut self, what: &str) -> Result<usize> {
        let tok = self.token()?;
        let s = std::str::from_utf8(tok)
            .map_err(|_| Error::Format(format!("{what} is not ASCII")))?;
        s.parse::<usize>().map_err(|_| Error::Format(format!("{what} is not a decimal number: {s}")))
    }
}

// ---------------------------------------------------------------------------
// PGM (binary, maxval 255).

/// Parses a binary (`P5`) PGM with maxval 255. Header comments are accepted;
/// anything else, including trailing bytes after the raster, is rejected.
pub fn read_pgm(bytes: &[u8]) -> Result<Image> {
    let mut scan = TokenScanner::new(bytes);
    let magic = scan.token()?;
    if magic == b"P2" {
        return Err(Error::Format("ASCII PGM (P2) is not supported, use binary P5".into()));
    }
    if magic != b"P5" {
        return Err(Error::Format("missing P5 magic".into()));
    }
    let width = scan.decimal("width")?;
    let height = scan.decimal("height")?;
    let maxval = scan.decimal("maxval")?;
    if maxval != 255 {
        return Err(Error::Format(format!("maxval must be 255, found {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if scan.pos >= bytes.len() || !bytes[scan.pos].is_ascii_whitespace() {
        return Err(Error::Format("missing whitespace after maxval".into()));
    }
    let raster = &bytes[scan.pos + 1..];
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| Error::Format("image dimensions overflow".into()))?;
    if raster.len() < expected {
        return Err(Error::Format(format!(
            "raster truncated: {} bytes for {expected} pixels",
            raster.len()
        )));
    }
    if raster.len() > expected {
        return Err(Error::Format("trailing bytes after the raster".into()));
    }
    Image::new(width, height, raster.to_vec())
        .map_err(|e| Error::Format(format!("invalid image: {e}")))
}

/// Canonical binary PGM bytes: `P5\n<w> <h>\n255\n` followed by the raster.
pub fn write_pgm(image: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.pixels());
    out
}

// ---------------------------------------------------------------------------
// PBM (plain) kernels: 1 = kernel one.

/// Parses a plain (`P1`) PBM into a kernel and validates it.
pub fn read_pbm_kernel(bytes: &[u8]) -> Result<Kernel> {
    let mut scan = TokenScanner::new(bytes);
    let magic = scan.token()?;
    if magic != b"P1" {
        return Err(Error::Format("missing P1 magic".into()));
    }
    let cols = scan.decimal("width")?;
    let rows = scan.decimal("height")?;
    if rows == 0 || cols == 0 {
        return Err(Error::Format("kernel dimensions must be at least 1x1".into()));
    }
    let cells = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Format("kernel dimensions overflow".into()))?;
    let mut bits = Vec::with_capacity(cells);
    while bits.len() < cells {
        scan.skip_space_and_comments();
        match scan.bytes.get(scan.pos) {
            Some(b'0') => bits.push(false),
            Some(b'1') => bits.push(true),
            Some(&other) => {
                return Err(Error::Format(format!(
                    "unexpected byte {other:#04x} in bitmap"
                )))
            }
            None => return Err(Error::Format("bitmap truncated".into())),
        }
        scan.pos += 1;
    }
    scan.skip_space_and_comments();
    if scan.pos != scan.bytes.len() {
        return Err(Error::Format("trailing bytes after the bitmap".into()));
    }
    let ones = bits.iter().filter(|&&b| b).count();
    Kernel::from_bits(rows, cols, &bits, ones)
}

/// Plain PBM bytes for a kernel, one bitmap row per line.
pub fn write_pbm_kernel(kernel: &Kernel) -> Vec<u8> {
    let bits = kernel.to_bits();
    let mut out = format!("P1\n{} {}\n", kernel.cols(), kernel.rows()).into_bytes();
    for row in bits.chunks(kernel.cols()) {
        for &bit in row {
            out.push(if bit { b'1' } else { b'0' });
        }
        out.push(b'\n');
    }
    out
}

// ---------------------------------------------------------------------------
// KSIS share bundles.

fn validate_bundle(bundle: &ShareBundle) -> Result<()> {
    let k = bundle.k as usize;
    let n = bundle.n as usize;
    if k < 2 {
        return Err(Error::Format(format!("threshold k = {k} must be at least 2")));
    }
    if k > n {
        return Err(Error::Format(format!("threshold k = {k} exceeds participants n = {n}")));
    }
    if n >= bundle.mode.field().modulus() as usize {
        return Err(Error::Format(format!(
            "participants n = {n} must be below the modulus {}",
            bundle.mode.field().modulus()
        )));
    }
    if bundle.x == 0 || bundle.x > bundle.n {
        return Err(Error::Format(format!("participant x = {} out of 1..={n}", bundle.x)));
    }
    if bundle.image_width == 0 || bundle.image_height == 0 {
        return Err(Error::Format("image dimensions must be at least 1x1".into()));
    }
    if bundle.kernel_rows == 0 || bundle.kernel_cols == 0 {
        return Err(Error::Format("kernel dimensions must be at least 1x1".into()));
    }
    let cells = bundle.kernel_rows as usize * bundle.kernel_cols as usize;
    if cells < k {
        return Err(Error::Format(format!(
            "kernel with {cells} cells cannot hold {k} ones"
        )));
    }
    let pixels = bundle.image_width as u64 * bundle.image_height as u64;
    if bundle.image_share.len() as u64 > pixels {
        return Err(Error::Format(format!(
            "image share of {} values exceeds the {pixels} image pixels",
            bundle.image_share.len()
        )));
    }
    let expected_kernel_share =
        kernel_share_len(bundle.kernel_rows as usize, bundle.kernel_cols as usize, k);
    if bundle.kernel_share.len() != expected_kernel_share {
        return Err(Error::Format(format!(
            "kernel share has {} values, expected {expected_kernel_share}",
            bundle.kernel_share.len()
        )));
    }
    if bundle.mode == Mode::ThienLin251 {
        if let Some(&bad) = bundle.image_share.iter().find(|&&v| v > 250) {
            return Err(Error::Format(format!(
                "image share value {bad} is out of range for mode tl251"
            )));
        }
    }
    Ok(())
}

/// Serializes a bundle: magic, version, mode, k, n, x, image dimensions,
/// kernel dimensions, payload lengths, then the two payloads. All integers
/// big-endian.
pub fn encode_bundle(bundle: &ShareBundle) -> Result<Vec<u8>> {
    validate_bundle(bundle)?;
    if bundle.image_share.len() > u32::MAX as usize || bundle.kernel_share.len() > u32::MAX as usize
    {
        return Err(Error::Format("share payload exceeds the format's length field".into()));
    }
    let mut out =
        Vec::with_capacity(32 + bundle.image_share.len() + bundle.kernel_share.len());
    out.extend_from_slice(BUNDLE_MAGIC);
    out.push(BUNDLE_VERSION);
    out.push(bundle.mode.wire_byte());
    out.extend_from_slice(&bundle.k.to_be_bytes());
    out.extend_from_slice(&bundle.n.to_be_bytes());
    out.extend_from_slice(&bundle.x.to_be_bytes());
    out.extend_from_slice(&bundle.image_width.to_be_bytes());
    out.extend_from_slice(&bundle.image_height.to_be_bytes());
    out.extend_from_slice(&bundle.kernel_rows.to_be_bytes());
    out.extend_from_slice(&bundle.kernel_cols.to_be_bytes());
    out.extend_from_slice(&(bundle.image_share.len() as u32).to_be_bytes());
    out.extend_from_slice(&(bundle.kernel_share.len() as u32).to_be_bytes());
    out.extend_from_slice(&bundle.image_share);
    out.extend_from_slice(&bundle.kernel_share);
    Ok(out)
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format("bundle truncated".into()));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16_be(&mut self) -> Result<u16> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32_be(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }
}

/// Exact inverse of [`encode_bundle`]. Every structural rule is re-checked;
/// trailing bytes are an error.
pub fn decode_bundle(bytes: &[u8]) -> Result<ShareBundle> {
    let mut rd = ByteReader { bytes, pos: 0 };
    if rd.take(4)? != BUNDLE_MAGIC {
        return Err(Error::Format("bad magic, not a KSIS bundle".into()));
    }
    let version = rd.u8()?;
    if version != BUNDLE_VERSION {
        return Err(Error::Format(format!("unsupported bundle version {version}")));
    }
    let mode = Mode::from_wire(rd.u8()?)?;
    let k = rd.u16_be()?;
    let n = rd.u16_be()?;
    let x = rd.u16_be()?;
    let image_width = rd.u32_be()?;
    let image_height = rd.u32_be()?;
    let kernel_rows = rd.u16_be()?;
    let kernel_cols = rd.u16_be()?;
    let image_share_len = rd.u32_be()? as usize;
    let kernel_share_len = rd.u32_be()? as usize;
    let image_share = rd.take(image_share_len)?.to_vec();
    let kernel_share = rd.take(kernel_share_len)?.to_vec();
    if rd.pos != bytes.len() {
        return Err(Error::Format("trailing bytes after the bundle".into()));
    }
    let bundle = ShareBundle {
        x,
        mode,
        k,
        n,
        image_width,
        image_height,
        kernel_rows,
        kernel_cols,
        image_share,
        kernel_share,
    };
    validate_bundle(&bundle)?;
    Ok(bundle)
}
