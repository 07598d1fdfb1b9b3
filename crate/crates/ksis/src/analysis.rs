//! Security and size analysis: the single-share correlation estimator, the
//! randomness-ratio measurement, the incidence-versus-ratio experiment, and
//! the random-guessing probability calculators.

use crate::baseline::{FlatShare, ShareMode};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::kernel::{coefficient_of_incidence, generate_kernel, traversal_order, Kernel, KernelMode};
use crate::stream_rng;
use rand::Rng;

/// Result of running the single-share estimator against one share.
#[derive(Debug, Clone)]
pub struct AttackReport {
    /// Image estimated from the share alone.
    pub estimate: Image,
    /// Pearson correlation of the estimate with the supplied ground truth;
    /// present only when ground truth was supplied.
    pub correlation: Option<f64>,
}

/// Pearson correlation coefficient of two equal-length samples.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput("samples have different lengths".into()));
    }
    if xs.len() < 2 {
        return Err(Error::CorrelationUndefined("fewer than two samples".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::CorrelationUndefined("a sample has zero variance".into()));
    }
    Ok(cov / (vx * vy).sqrt())
}

fn pixels_as_f64(image: &Image) -> Vec<f64> {
    image.pixels().iter().map(|&p| p as f64).collect()
}

/// Estimates the secret from one share by assuming all coefficients of each
/// polynomial are roughly equal: the share value divided by the geometric
/// sum `1 + x + ... + x^(k-1)` approximates the block's intensity, which is
/// then tiled over the block's pixels. Natural images satisfy the
/// assumption through their spatial correlation; shares with random
/// coefficients mixed in do not.
///
/// The sequential block-to-pixel mapping is exactly what an attacker without
/// the kernel has to assume.
pub fn correlation_attack(
    share: &FlatShare,
    k: usize,
    width: usize,
    height: usize,
    ground_truth: Option<&Image>,
) -> Result<AttackReport> {
    if k == 0 {
        return Err(Error::Parameter("threshold k must be at least 1".into()));
    }
    let field = share.mode.field();
    if share.x == 0 || share.x >= field.modulus() {
        return Err(Error::InvalidInput(format!("share has invalid x = {}", share.x)));
    }
    let pixel_count = width
        .checked_mul(height)
        .ok_or_else(|| Error::Parameter("image dimensions overflow".into()))?;
    if pixel_count == 0 {
        return Err(Error::Parameter("image dimensions must be at least 1x1".into()));
    }
    // The per-pixel scheme devotes one share value to each pixel; the
    // sequential schemes cover k pixels per value.
    let span = match share.mode {
        ShareMode::Shamir => 1,
        ShareMode::ThienLin251 | ShareMode::Wu257 => k,
    };
    if share.values.len() * span < pixel_count {
        return Err(Error::InvalidInput(format!(
            "share with {} values cannot cover {pixel_count} pixels",
            share.values.len()
        )));
    }
    let mut geometric_sum = 0u16;
    let mut power = 1u16;
    for _ in 0..k {
        geometric_sum = field.add(geometric_sum, power);
        power = field.mul(power, share.x);
    }
    let inverse = field
        .inv(geometric_sum)
        .map_err(|_| Error::AttackUndefined { x: share.x })?;

    let mut estimate = vec![0u8; pixel_count];
    'blocks: for (block, &value) in share.values.iter().enumerate() {
        let guess = field.mul(value as u16, inverse).min(255) as u8;
        for i in 0..span {
            let pos = block * span + i;
            if pos >= pixel_count {
                break 'blocks;
            }
            estimate[pos] = guess;
        }
    }
    let estimate = Image::new(width, height, estimate)?;
    let correlation = match ground_truth {
        Some(truth) => {
            if truth.width() != width || truth.height() != height {
                return Err(Error::InvalidInput(
                    "ground truth dimensions do not match".into(),
                ));
            }
            Some(pearson(&pixels_as_f64(&estimate), &pixels_as_f64(truth))?)
        }
        None => None,
    };
    Ok(AttackReport { estimate, correlation })
}

/// One measurement of a kernel over one image size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentRow {
    pub kernel_id: usize,
    pub k: usize,
    /// Coefficient of incidence of the kernel.
    pub incidence: f64,
    pub image_pixels: usize,
    /// Random fillers per image pixel for this image size.
    pub ratio: f64,
}

/// Measures the filler-to-pixel ratio of one kernel over one image size.
pub fn randomness_ratio(
    kernel_id: usize,
    kernel: &Kernel,
    width: usize,
    height: usize,
) -> Result<ExperimentRow> {
    let plan = traversal_order(kernel, width, height)?;
    let pixels = width * height;
    Ok(ExperimentRow {
        kernel_id,
        k: kernel.threshold(),
        incidence: coefficient_of_incidence(kernel).value(),
        image_pixels: pixels,
        ratio: plan.filler_count() as f64 / pixels as f64,
    })
}

/// Samples random kernels, measures their ratio over each image size, and
/// reports the Pearson correlation between incidence and ratio across all
/// measurements.
pub fn c_ratio_experiment(
    samples: usize,
    kernel_rows: usize,
    kernel_cols: usize,
    k_range: std::ops::RangeInclusive<usize>,
    image_sides: &[usize],
    seed: u64,
) -> Result<(Vec<ExperimentRow>, f64)> {
    if samples < 2 {
        return Err(Error::Parameter("experiment needs at least 2 samples".into()));
    }
    if image_sides.is_empty() {
        return Err(Error::Parameter("experiment needs at least one image size".into()));
    }
    let (lo, hi) = (*k_range.start(), *k_range.end());
    if lo < 2 || lo > hi {
        return Err(Error::Parameter(format!("invalid k range {lo}..={hi}")));
    }
    let mut rows = Vec::with_capacity(samples * image_sides.len());
    for id in 0..samples {
        let mut rng = stream_rng(seed, id as u64);
        let k = rng.random_range(lo..=hi);
        let kernel = generate_kernel(kernel_rows, kernel_cols, k, KernelMode::Uniform, rng.random())?;
        for &side in image_sides {
            rows.push(randomness_ratio(id, &kernel, side, side)?);
        }
    }
    let incidences: Vec<f64> = rows.iter().map(|r| r.incidence).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let r = pearson(&incidences, &ratios)?;
    Ok((rows, r))
}

/// Renders experiment rows as CSV with the canonical header.
pub fn experiment_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from("kernel_id,k,C,image_pixels,ratio\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.kernel_id, row.k, row.incidence, row.image_pixels, row.ratio
        ));
    }
    out
}

/// Log-scale probabilities of an adversary guessing a valid kernel share or
/// the secret image outright.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuessProbabilities {
    /// log2 of `2^(-S/k)`: a kernel share is `S/k` bits long and only one
    /// value is correct.
    pub log2_kernel_prob: f64,
    /// log2 of `p^(-M/k)`: each of the `M/k` polynomial equations can take
    /// `p` values.
    pub log2_image_prob: f64,
}

/// Probability of a successful random guess of one kernel share and of the
/// whole secret image, as exact log2 values to avoid underflow.
pub fn guess_probabilities(
    k: u64,
    kernel_cells: u64,
    share_size: u64,
    p: u16,
) -> Result<GuessProbabilities> {
    if k == 0 || kernel_cells == 0 || share_size == 0 {
        return Err(Error::Parameter("k, S and M must all be at least 1".into()));
    }
    let field = crate::field::PrimeField::new(p)?;
    let log2_kernel_prob = -(kernel_cells as f64 / k as f64);
    let log2_image_prob = -(share_size as f64 / k as f64) * (field.modulus() as f64).log2();
    Ok(GuessProbabilities { log2_kernel_prob, log2_image_prob })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::thienlin_split;
    use crate::field::PrimeField;
    use crate::kernel::Kernel;
    use crate::scheme::{split, Mode};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn diagonal_gradient(w: usize, h: usize) -> Image {
        let data: Vec<u8> = (0..w * h)
            .map(|i| (255 * ((i / w) + (i % w)) / (w + h - 2).max(1)) as u8)
            .collect();
        Image::new(w, h, data).unwrap()
    }

    #[test]
    fn attack_recovers_constant_image_exactly() {
        let image = Image::filled(3, 3, 100).unwrap();
        let shares = thienlin_split(&image, 3, 3).unwrap();
        // y = 300 mod 251 = 49 at x = 1; 49 * inv(3) = 49 * 84 = 100 mod 251.
        assert_eq!(shares[0].values[0], 49);
        assert_eq!(PrimeField::P251.inv(3).unwrap(), 84);
        let report = correlation_attack(&shares[0], 3, 3, 3, None).unwrap();
        assert!(report.estimate.pixels().iter().all(|&p| p == 100));
        assert!(report.correlation.is_none());
    }

    #[test]
    fn attack_errors_on_constant_ground_truth() {
        let image = Image::filled(3, 3, 100).unwrap();
        let shares = thienlin_split(&image, 3, 3).unwrap();
        assert!(matches!(
            correlation_attack(&shares[0], 3, 3, 3, Some(&image)),
            Err(Error::CorrelationUndefined(_))
        ));
    }

    #[test]
    fn attack_undefined_when_geometric_sum_vanishes() {
        // 5 divides 250, so elements of order 5 exist mod 251 and zero the
        // geometric sum for k = 5.
        let field = PrimeField::P251;
        let x = (2..251u16)
            .find(|&x| {
                let mut s = 0;
                let mut pw = 1;
                for _ in 0..5 {
                    s = field.add(s, pw);
                    pw = field.mul(pw, x);
                }
                s == 0
            })
            .expect("an order-5 element exists");
        let image = diagonal_gradient(5, 5);
        let shares = thienlin_split(&image, 5, 250).unwrap();
        let share = shares.iter().find(|s| s.x == x).unwrap();
        assert!(matches!(
            correlation_attack(share, 5, 5, 5, None),
            Err(Error::AttackUndefined { .. })
        ));
    }

    #[test]
    fn attack_leaks_smooth_images_but_not_kernel_shares() {
        let image = diagonal_gradient(32, 32);
        let k = 4;
        let tl = thienlin_split(&image, k, k).unwrap();
        let tl_corr = correlation_attack(&tl[0], k, 32, 32, Some(&image))
            .unwrap()
            .correlation
            .unwrap();
        // A kernel with substantial incidence mixes in enough randomness to
        // break the estimator.
        let kern = Kernel::new(3, 3, vec![(0, 0), (1, 2), (2, 0), (2, 2)]).unwrap();
        assert!(coefficient_of_incidence(&kern).value() >= 1.0);
        let bundles = split(&image, &kern, k, k, Mode::Wu257, 7).unwrap();
        let ks_corr = correlation_attack(&bundles[0].image_flat_share(), k, 32, 32, Some(&image))
            .unwrap()
            .correlation
            .unwrap();
        assert!(
            ks_corr < tl_corr,
            "kernel scheme leaked more: {ks_corr} vs {tl_corr}"
        );
        assert!(tl_corr > 0.5, "sequential shares of a gradient leak strongly");
    }

    #[test]
    fn attack_ordering_sign_test_over_seeds() {
        let image = diagonal_gradient(24, 24);
        let k = 4;
        let tl = thienlin_split(&image, k, k).unwrap();
        let tl_corr = correlation_attack(&tl[0], k, 24, 24, Some(&image))
            .unwrap()
            .correlation
            .unwrap();
        let kern = Kernel::new(3, 3, vec![(0, 0), (1, 2), (2, 0), (2, 2)]).unwrap();
        let mut wins = 0;
        for seed in 0..20u64 {
            let bundles = split(&image, &kern, k, k, Mode::Wu257, seed).unwrap();
            let ks_corr =
                correlation_attack(&bundles[0].image_flat_share(), k, 24, 24, Some(&image))
                    .unwrap()
                    .correlation
                    .unwrap();
            if ks_corr < tl_corr {
                wins += 1;
            }
        }
        // One-sided sign test at p < 0.05 needs at least 15 of 20.
        assert!(wins >= 15, "kernel scheme won only {wins}/20 trials");
    }

    #[test]
    fn attack_on_noise_finds_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let w = 64;
        let h = 64;
        let data: Vec<u8> = (0..w * h).map(|_| rng.random()).collect();
        let image = Image::new(w, h, data).unwrap();
        let shares = thienlin_split(&image, 4, 4).unwrap();
        let report = correlation_attack(&shares[0], 4, w, h, Some(&image)).unwrap();
        let r = report.correlation.unwrap();
        let bound = 3.0 / ((w * h) as f64).sqrt();
        assert!(r.abs() < bound, "|r| = {} exceeds {bound}", r.abs());
    }

    #[test]
    fn ratio_of_tiling_kernel_is_zero() {
        let kern = Kernel::new(2, 2, vec![(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        let row = randomness_ratio(0, &kern, 8, 8).unwrap();
        assert_eq!(row.ratio, 0.0);
        assert_eq!(row.incidence, 0.0);
    }

    #[test]
    fn ratio_equals_incidence_on_kernel_sized_image() {
        let kern = Kernel::new(2, 2, vec![(0, 0), (1, 1)]).unwrap();
        let row = randomness_ratio(0, &kern, 2, 2).unwrap();
        assert_eq!(row.ratio, 0.5);
        assert_eq!(row.incidence, 0.5);
    }

    #[test]
    fn ratio_variability_shrinks_with_image_size() {
        // For a fixed kernel the ratio settles as images grow: the spread
        // across small sizes exceeds the spread across large sizes.
        let kern = generate_kernel(5, 5, 5, KernelMode::Uniform, 99).unwrap();
        let spread = |sides: &[usize]| {
            let ratios: Vec<f64> = sides
                .iter()
                .map(|&s| randomness_ratio(0, &kern, s, s).unwrap().ratio)
                .collect();
            let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
            let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
            max - min
        };
        let small = spread(&[6, 7, 8, 9, 10, 11]);
        let large = spread(&[96, 97, 98, 99, 100, 101]);
        assert!(large < small, "spread grew with image size: {large} vs {small}");
    }

    #[test]
    fn experiment_row_count_and_csv_shape() {
        let sides = [16, 32];
        let (rows, r) = c_ratio_experiment(10, 9, 9, 2..=5, &sides, 1).unwrap();
        assert_eq!(rows.len(), 10 * sides.len());
        assert!((-1.0..=1.0).contains(&r));
        let csv = experiment_csv(&rows);
        assert_eq!(csv.lines().count(), rows.len() + 1);
        assert!(csv.starts_with("kernel_id,k,C,image_pixels,ratio\n"));
    }

    #[test]
    fn experiment_with_identical_kernels_is_undefined() {
        // 1x2 kernels with k = 2 admit exactly one layout, so every sample
        // has the same incidence and the correlation degenerates.
        let result = c_ratio_experiment(2, 1, 2, 2..=2, &[4], 3);
        assert!(matches!(result, Err(Error::CorrelationUndefined(_))));
    }

    #[test]
    fn guess_probability_examples() {
        let g = guess_probabilities(5, 25, 1000, 251).unwrap();
        assert_eq!(g.log2_kernel_prob, -5.0);
        let g = guess_probabilities(1, 8, 1, 251).unwrap();
        assert_eq!(g.log2_kernel_prob, -8.0);
        assert_eq!(2f64.powf(g.log2_kernel_prob), 1.0 / 256.0);
    }

    #[test]
    fn guess_probabilities_are_monotone() {
        let base = guess_probabilities(5, 25, 100, 251).unwrap();
        let bigger_kernel = guess_probabilities(5, 26, 100, 251).unwrap();
        assert!(bigger_kernel.log2_kernel_prob <= base.log2_kernel_prob);
        let bigger_share = guess_probabilities(5, 25, 101, 251).unwrap();
        assert!(bigger_share.log2_image_prob <= base.log2_image_prob);
    }

    #[test]
    fn pearson_basics() {
        let xs = [1.0, 2.0, 3.0];
        assert!((pearson(&xs, &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&xs, &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert!(matches!(
            pearson(&xs, &[5.0, 5.0, 5.0]),
            Err(Error::CorrelationUndefined(_))
        ));
        assert!(matches!(pearson(&xs, &[1.0]), Err(Error::InvalidInput(_))));
    }
}
