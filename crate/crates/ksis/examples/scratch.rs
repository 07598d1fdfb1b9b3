// Temporary experiment runner (deleted before release).
use ksis::analysis::{c_ratio_experiment, pearson, randomness_ratio};
use ksis::{
    coefficient_of_incidence, combine, generate_kernel, share_kernel, split, traversal_order,
    Image, KernelMode, Mode,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn stream(seed: u64, s: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(s);
    rng
}

fn smooth(w: usize, h: usize, which: usize) -> Image {
    let data: Vec<u8> = (0..w * h)
        .map(|i| {
            let (r, c) = (i / w, i % w);
            match which {
                0 => (255 * c / (w - 1)) as u8,
                1 => (255 * (r + c) / (w + h - 2)) as u8,
                2 => {
                    let (cy, cx) = (h as f64 / 2.0, w as f64 / 2.0);
                    let d = ((r as f64 - cy).powi(2) + (c as f64 - cx).powi(2)).sqrt();
                    let dmax = (cy * cy + cx * cx).sqrt();
                    (255.0 * (1.0 - d / dmax)).round().clamp(0.0, 255.0) as u8
                }
                3 => {
                    let v = 127.5
                        + 80.0 * (2.0 * std::f64::consts::PI * c as f64 / w as f64).sin()
                        + 40.0 * (2.0 * std::f64::consts::PI * r as f64 / h as f64).cos();
                    v.round().clamp(0.0, 255.0) as u8
                }
                _ => {
                    let g = |cy: f64, cx: f64, s: f64| {
                        let d2 = (r as f64 - cy).powi(2) + (c as f64 - cx).powi(2);
                        (-d2 / (2.0 * s * s)).exp()
                    };
                    let v = 255.0
                        * (0.9 * g(h as f64 * 0.3, w as f64 * 0.3, w as f64 * 0.25)
                            + 0.7 * g(h as f64 * 0.7, w as f64 * 0.8, w as f64 * 0.2));
                    v.round().clamp(0.0, 255.0) as u8
                }
            }
        })
        .collect();
    Image::new(w, h, data).unwrap()
}

fn c_ratio_config(name: &str, sides: &[usize], krange: std::ops::RangeInclusive<usize>) {
    let (_, r) = c_ratio_experiment(100, 45, 45, krange.clone(), sides, 0xf164a).unwrap();
    println!("c-ratio {name}: sides {sides:?} k {krange:?} -> r = {r:.4}");
}

fn c_ratio_random_sides(name: &str, lo: usize, hi: usize, krange: std::ops::RangeInclusive<usize>) {
    // per kernel, 4 random sides in [lo, hi]
    let mut inc = Vec::new();
    let mut rat = Vec::new();
    for id in 0..100u64 {
        let mut rng = stream(0xf164a, id);
        let k = rng.random_range(krange.clone());
        let kern = generate_kernel(45, 45, k, KernelMode::Uniform, rng.random()).unwrap();
        let c = coefficient_of_incidence(&kern).value();
        for _ in 0..4 {
            let side = rng.random_range(lo..=hi);
            let row = randomness_ratio(id as usize, &kern, side, side).unwrap();
            inc.push(c);
            rat.push(row.ratio);
        }
    }
    let r = pearson(&inc, &rat).unwrap();
    println!("c-ratio {name}: random sides [{lo},{hi}] k {krange:?} -> r = {r:.4}");
}

fn wrong_kernel_config(name: &str, w: usize, h: usize, kr: usize, kc: usize, k: usize) {
    let mut cors = Vec::new();
    let mut attempts = 0u64;
    let mut trial = 0u64;
    while cors.len() < 20 && attempts < 20000 {
        attempts += 1;
        let mut rng = stream(0x77aa, attempts);
        let a = generate_kernel(kr, kc, k, KernelMode::Uniform, rng.random()).unwrap();
        let b = generate_kernel(kr, kc, k, KernelMode::Uniform, rng.random()).unwrap();
        if a == b {
            continue;
        }
        let pa = traversal_order(&a, w, h).unwrap();
        let pb = traversal_order(&b, w, h).unwrap();
        if pa.anchor_count() != pb.anchor_count() {
            continue;
        }
        let image = smooth(w, h, (trial % 5) as usize);
        let mut bundles = split(&image, &a, k, k, Mode::ThienLin251, rng.random()).unwrap();
        let fakes = share_kernel(&b, k, k).unwrap();
        for (bu, fa) in bundles.iter_mut().zip(fakes) {
            bu.kernel_share = fa.values;
        }
        let garbage = combine(&bundles).unwrap();
        let gp: Vec<f64> = garbage.pixels().iter().map(|&p| p as f64).collect();
        let ip: Vec<f64> = image.pixels().iter().map(|&p| p as f64).collect();
        cors.push(pearson(&gp, &ip).unwrap());
        trial += 1;
    }
    let mean = cors.iter().map(|r| r.abs()).sum::<f64>() / cors.len() as f64;
    let max = cors.iter().map(|r| r.abs()).fold(0.0f64, f64::max);
    println!(
        "wrong-kernel {name}: image {w}x{h} kernel {kr}x{kc} k={k} -> n={} mean|r| = {mean:.3} max|r| = {max:.3} (attempts {attempts})",
        cors.len()
    );
}

fn wrong_kernel_pooled(
    name: &str,
    w: usize,
    h: usize,
    kr: usize,
    kc: usize,
    k: usize,
    min_c: f64,
    mode: Mode,
) {
    use std::collections::HashMap;
    // Pool kernels by share size so pairs decode against each other.
    let mut buckets: HashMap<usize, Vec<ksis::Kernel>> = HashMap::new();
    let mut pairs: Vec<(ksis::Kernel, ksis::Kernel)> = Vec::new();
    let mut attempts = 0u64;
    while pairs.len() < 20 && attempts < 30000 {
        attempts += 1;
        let mut rng = stream(0x77ab, attempts);
        let kern = generate_kernel(kr, kc, k, KernelMode::Uniform, rng.random()).unwrap();
        if coefficient_of_incidence(&kern).value() < min_c {
            continue;
        }
        let m = traversal_order(&kern, w, h).unwrap().anchor_count();
        let bucket = buckets.entry(m).or_default();
        if let Some(mate) = bucket.pop() {
            if mate != kern {
                pairs.push((mate, kern));
                continue;
            }
        }
        buckets.entry(m).or_default().push(kern);
    }
    let mut cors = Vec::new();
    let mut errors = 0usize;
    for (t, (a, b)) in pairs.iter().enumerate() {
        let mut rng = stream(0x77ac, t as u64);
        let image = smooth(w, h, t % 5);
        let mut bundles = split(&image, a, k, k, mode, rng.random()).unwrap();
        let fakes = share_kernel(b, k, k).unwrap();
        for (bu, fa) in bundles.iter_mut().zip(fakes) {
            bu.kernel_share = fa.values;
        }
        match combine(&bundles) {
            Ok(garbage) => {
                let gp: Vec<f64> = garbage.pixels().iter().map(|&p| p as f64).collect();
                let ip: Vec<f64> = image.pixels().iter().map(|&p| p as f64).collect();
                cors.push(pearson(&gp, &ip).unwrap());
            }
            Err(_) => errors += 1,
        }
    }
    let mean = cors.iter().map(|r| r.abs()).sum::<f64>() / cors.len().max(1) as f64;
    let max = cors.iter().map(|r| r.abs()).fold(0.0f64, f64::max);
    println!(
        "wrong-kernel {name}: image {w}x{h} kernel {kr}x{kc} k={k} C>={min_c} {mode} -> pairs={} decoded={} errs={errors} mean|r| = {mean:.3} max|r| = {max:.3} (attempts {attempts})",
        pairs.len(),
        cors.len()
    );
}

/// Locally smooth, globally structured texture: a sum of random sinusoids
/// with 1/f amplitude falloff (value-noise style).
fn natural_texture(w: usize, h: usize, seed: u64) -> Image {
    let mut rng = stream(0xfeed, seed);
    let comps: Vec<(f64, f64, f64, f64)> = (0..24)
        .map(|_| {
            let fx: f64 = rng.random_range(-8.0..8.0);
            let fy: f64 = rng.random_range(-8.0..8.0);
            let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let f = (fx * fx + fy * fy).sqrt().max(0.5);
            (fx, fy, phase, 1.0 / f)
        })
        .collect();
    let mut vals: Vec<f64> = (0..w * h)
        .map(|i| {
            let (r, c) = ((i / w) as f64 / h as f64, (i % w) as f64 / w as f64);
            comps
                .iter()
                .map(|&(fx, fy, ph, a)| a * (std::f64::consts::TAU * (fx * c + fy * r) + ph).sin())
                .sum()
        })
        .collect();
    let (mut lo, mut hi) = (f64::MAX, f64::MIN);
    for &v in &vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    for v in &mut vals {
        *v = 255.0 * (*v - lo) / (hi - lo);
    }
    Image::new(w, h, vals.iter().map(|&v| v.round() as u8).collect()).unwrap()
}

fn c_ratio_pixel_count_uniform(name: &str, samples: usize, seed: u64) {
    let mut inc = Vec::new();
    let mut rat = Vec::new();
    for id in 0..samples as u64 {
        let mut rng = stream(seed, id);
        let k = rng.random_range(2..=8usize);
        let kern = generate_kernel(45, 45, k, KernelMode::Uniform, rng.random()).unwrap();
        let c = coefficient_of_incidence(&kern).value();
        for _ in 0..4 {
            let pixels: usize = rng.random_range(1024..=65536);
            let side = (pixels as f64).sqrt().round() as usize;
            let row = randomness_ratio(id as usize, &kern, side, side).unwrap();
            inc.push(c);
            rat.push(row.ratio);
        }
    }
    let r = pearson(&inc, &rat).unwrap();
    println!("c-ratio {name}: pixel-count-uniform samples={samples} seed={seed} -> r = {r:.4}");
}

fn wrong_kernel_textures(name: &str, w: usize, h: usize, kr: usize, kc: usize, k: usize) {
    use std::collections::HashMap;
    let mut buckets: HashMap<usize, Vec<ksis::Kernel>> = HashMap::new();
    let mut pairs: Vec<(ksis::Kernel, ksis::Kernel)> = Vec::new();
    let mut attempts = 0u64;
    while pairs.len() < 20 && attempts < 30000 {
        attempts += 1;
        let mut rng = stream(0x77ab, attempts);
        let kern = generate_kernel(kr, kc, k, KernelMode::Uniform, rng.random()).unwrap();
        let m = traversal_order(&kern, w, h).unwrap().anchor_count();
        let bucket = buckets.entry(m).or_default();
        if let Some(mate) = bucket.pop() {
            if mate != kern {
                pairs.push((mate, kern));
                continue;
            }
        }
        buckets.entry(m).or_default().push(kern);
    }
    let mut cors = Vec::new();
    for (t, (a, b)) in pairs.iter().enumerate() {
        let mut rng = stream(0x77ac, t as u64);
        let image = natural_texture(w, h, t as u64);
        let mut bundles = split(&image, a, k, k, Mode::ThienLin251, rng.random()).unwrap();
        let fakes = share_kernel(b, k, k).unwrap();
        for (bu, fa) in bundles.iter_mut().zip(fakes) {
            bu.kernel_share = fa.values;
        }
        let garbage = combine(&bundles).unwrap();
        let gp: Vec<f64> = garbage.pixels().iter().map(|&p| p as f64).collect();
        let ip: Vec<f64> = image.pixels().iter().map(|&p| p as f64).collect();
        cors.push(pearson(&gp, &ip).unwrap());
    }
    let mean = cors.iter().map(|r| r.abs()).sum::<f64>() / cors.len().max(1) as f64;
    let max = cors.iter().map(|r| r.abs()).fold(0.0f64, f64::max);
    println!(
        "wrong-kernel-texture {name}: image {w}x{h} kernel {kr}x{kc} k={k} -> pairs={} mean|r| = {mean:.3} max|r| = {max:.3}",
        pairs.len()
    );
}

fn c_ratio_pixel_count_k(name: &str, samples: usize, seed: u64, kr: std::ops::RangeInclusive<usize>) {
    let mut inc = Vec::new();
    let mut rat = Vec::new();
    for id in 0..samples as u64 {
        let mut rng = stream(seed, id);
        let k = rng.random_range(kr.clone());
        let kern = generate_kernel(45, 45, k, KernelMode::Uniform, rng.random()).unwrap();
        let c = coefficient_of_incidence(&kern).value();
        for _ in 0..4 {
            let pixels: usize = rng.random_range(1024..=65536);
            let side = (pixels as f64).sqrt().round() as usize;
            let row = randomness_ratio(id as usize, &kern, side, side).unwrap();
            inc.push(c);
            rat.push(row.ratio);
        }
    }
    let r = pearson(&inc, &rat).unwrap();
    println!("c-ratio {name}: k {kr:?} samples={samples} seed={seed} -> r = {r:.4}");
}

fn main() {
    for seed in [0xf164a, 1u64, 2, 3] {
        c_ratio_pixel_count_k("K12", 100, seed, 2..=12);
    }
    for seed in [0xf164a, 1u64, 2, 3] {
        c_ratio_pixel_count_k("K16", 100, seed, 2..=16);
    }
    for seed in [0xf164a, 1u64, 2, 3] {
        c_ratio_pixel_count_k("K20", 100, seed, 2..=20);
    }
    // Fixed power-of-two grid with wide k, for comparison.
    c_ratio_config("G12", &[32, 64, 128, 256], 2..=12);
    c_ratio_config("G16", &[32, 64, 128, 256], 2..=16);
    c_ratio_config("G20", &[32, 64, 128, 256], 2..=20);
}
