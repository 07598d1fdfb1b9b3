//! (k, n)-threshold secret image sharing driven by a randomized binary
//! kernel.
//!
//! A secret image is split into `n` shares such that any `k` of them
//! reconstruct it while `k - 1` reveal nothing useful. Instead of feeding
//! pixels into the share polynomials sequentially, a sparse binary *kernel*
//! walks the image and decides which coefficients are pixels and which are
//! fresh random numbers. The kernel is the key: it fixes the share sizes,
//! the amount of randomness mixed into the polynomials, and the traversal
//! that reconstruction retraces. To avoid a single point of failure the
//! kernel itself is shared across the same participants.
//!
//! The crate also ships the three classic polynomial schemes the kernel
//! scheme builds on (per-pixel mod 251, sequential mod 251, sequential
//! mod 257), codecs for PGM images, PBM kernels and the `KSIS` bundle
//! format, and an analysis toolbox for the security/size trade-off.
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --example split_and_combine     # end-to-end (k, n) sharing
//! cargo run --example kernel_generation    # uniform vs cyclic kernels
//! cargo run --example traversal_plan       # how a kernel walks an image
//! cargo run --example baseline_schemes     # the three classic schemes
//! cargo run --example correlation_attack   # what a single share leaks
//! cargo run --example security_estimates   # guessing probabilities
//! cargo run --example size_tradeoff        # incidence vs share size
//! cargo run --example forged_share_detection
//! ```
//!
//! The `ksis` binary wires the same operations into a command line:
//! `ksis gen-kernel`, `ksis split`, `ksis combine` and `ksis analyze`.
//!
//! # Quick start
//!
//! ```
//! use ksis::{generate_kernel, KernelMode, Image, Mode};
//!
//! let image = Image::new(4, 4, (0u8..16).collect())?;
//! let kernel = generate_kernel(3, 3, 3, KernelMode::Uniform, 7)?;
//! let bundles = ksis::split(&image, &kernel, 3, 5, Mode::Wu257, 42)?;
//! let restored = ksis::combine(&bundles[1..4])?;
//! assert_eq!(restored, image);
//! # Ok::<(), ksis::Error>(())
//! ```

pub mod analysis;
pub mod baseline;
pub mod codec;
pub mod error;
pub mod field;
pub mod image;
pub mod kernel;
pub mod scheme;

pub use baseline::{FlatShare, ShareMode};
pub use error::{Error, Result};
pub use field::{lagrange_interpolate, Polynomial, PrimeField, SharePoint};
pub use image::Image;
pub use kernel::{
    coefficient_of_incidence, generate_kernel, select_coefficients, traversal_order,
    validate_kernel, CoiResult, Kernel, KernelMode, KernelViolation, Selection, TraversalPlan,
};
pub use scheme::{combine, reconstruct_kernel, share_kernel, split, Mode, ShareBundle};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derives an independent deterministic random stream from a master seed.
/// Split work is keyed per anchor (or per pixel) this way, so shares are
/// reproducible for a fixed seed yet each anchor draws independently.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
