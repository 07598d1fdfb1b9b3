//! Exact arithmetic and polynomial operations over the prime fields
//! GF(251) and GF(257).
//!
//! 251 is the largest prime below 256, so every residue fits in a byte but
//! pixel values above 250 cannot be represented. 257 covers the full 8-bit
//! intensity range at the cost of one extra residue (256) that needs special
//! handling when shares are stored as bytes. Interpolation recovers *all*
//! coefficients of the polynomial, not just the constant term, because the
//! image schemes place data in every coefficient.

use crate::error::{Error, Result};

/// Prime modulus for share arithmetic. Only 251 and 257 are meaningful for
/// 8-bit images, so nothing else is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    modulus: u16,
}

impl PrimeField {
    pub const P251: PrimeField = PrimeField { modulus: 251 };
    pub const P257: PrimeField = PrimeField { modulus: 257 };

    pub fn new(modulus: u16) -> Result<Self> {
        match modulus {
            251 | 257 => Ok(PrimeField { modulus }),
            other => Err(Error::Parameter(format!(
                "unsupported modulus {other}: expected 251 or 257"
            ))),
        }
    }

    #[inline]
    pub fn modulus(self) -> u16 {
        self.modulus
    }

    /// Largest residue, `p - 1`.
    #[inline]
    pub fn max_residue(self) -> u16 {
        self.modulus - 1
    }

    #[inline]
    pub fn add(self, a: u16, b: u16) -> u16 {
        debug_assert!(a < self.modulus && b < self.modulus);
        ((a as u32 + b as u32) % self.modulus as u32) as u16
    }

    #[inline]
    pub fn sub(self, a: u16, b: u16) -> u16 {
        debug_assert!(a < self.modulus && b < self.modulus);
        ((a as u32 + self.modulus as u32 - b as u32) % self.modulus as u32) as u16
    }

    #[inline]
    pub fn mul(self, a: u16, b: u16) -> u16 {
        debug_assert!(a < self.modulus && b < self.modulus);
        ((a as u32 * b as u32) % self.modulus as u32) as u16
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(self, a: u16) -> Result<u16> {
        if a == 0 {
            return Err(Error::Domain("zero has no multiplicative inverse".into()));
        }
        debug_assert!(a < self.modulus);
        let (mut r0, mut r1) = (self.modulus as i32, a as i32);
        let (mut t0, mut t1) = (0i32, 1i32);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1, "modulus is prime, gcd must be 1");
        Ok(t0.rem_euclid(self.modulus as i32) as u16)
    }
}

/// Dense polynomial with coefficients in degree-ascending order. The
/// coefficient count equals the scheme threshold `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<u16>,
    field: PrimeField,
}

impl Polynomial {
    pub fn new(coeffs: Vec<u16>, field: PrimeField) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Parameter("polynomial needs at least one coefficient".into()));
        }
        if let Some(&bad) = coeffs.iter().find(|&&c| c >= field.modulus()) {
            return Err(Error::Parameter(format!(
                "coefficient {bad} is not a residue mod {}",
                field.modulus()
            )));
        }
        Ok(Polynomial { coeffs, field })
    }

    pub fn coefficients(&self) -> &[u16] {
        &self.coeffs
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Horner evaluation of `(sum d_i x^i) mod p`.
    pub fn eval(&self, x: u16) -> u16 {
        debug_assert!(x < self.field.modulus());
        let mut acc = 0u16;
        for &c in self.coeffs.iter().rev() {
            acc = self.field.add(self.field.mul(acc, x), c);
        }
        acc
    }
}

/// One share of one polynomial: the pair `(x, f(x))` with `x != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SharePoint {
    pub x: u16,
    pub y: u16,
}

/// Recovers the unique polynomial of degree `< k` through the first `k`
/// supplied points. All coefficients are returned, in degree-ascending
/// order, so callers can read data out of every coefficient.
pub fn lagrange_interpolate(
    points: &[SharePoint],
    k: usize,
    field: PrimeField,
) -> Result<Polynomial> {
    if k == 0 {
        return Err(Error::Parameter("threshold must be at least 1".into()));
    }
    if points.len() < k {
        return Err(Error::InsufficientShares { needed: k, got: points.len() });
    }
    let pts = &points[..k];
    for p in pts {
        if p.x == 0 {
            return Err(Error::InvalidInput("share point with x = 0".into()));
        }
        if p.x >= field.modulus() || p.y >= field.modulus() {
            return Err(Error::InvalidInput(format!(
                "share point ({}, {}) is not reduced mod {}",
                p.x,
                p.y,
                field.modulus()
            )));
        }
    }
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if pts[i].x == pts[j].x {
                return Err(Error::InvalidInput(format!(
                    "duplicate evaluation point x = {}",
                    pts[i].x
                )));
            }
        }
    }

    // Master product N(x) = prod (x - x_i), degree k, coefficients ascending.
    let mut master = vec![0u16; k + 1];
    master[0] = 1;
    let mut deg = 0;
    for p in pts {
        let neg_x = field.sub(0, p.x);
        deg += 1;
        for j in (0..=deg).rev() {
            let shifted = if j > 0 { master[j - 1] } else { 0 };
            master[j] = field.add(field.mul(master[j], neg_x), shifted);
        }
    }

    let mut coeffs = vec![0u16; k];
    for (i, p) in pts.iter().enumerate() {
        // Synthetic division: Q_i(x) = N(x) / (x - x_i), degree k - 1.
        let mut q = vec![0u16; k];
        q[k - 1] = master[k];
        for j in (0..k - 1).rev() {
            q[j] = field.add(master[j + 1], field.mul(p.x, q[j + 1]));
        }
        let mut denom = 1u16;
        for (j, other) in pts.iter().enumerate() {
            if j != i {
                denom = field.mul(denom, field.sub(p.x, other.x));
            }
        }
        let scale = field.mul(p.y, field.inv(denom)?);
        for (c, qj) in coeffs.iter_mut().zip(&q) {
            *c = field.add(*c, field.mul(scale, *qj));
        }
    }
    Polynomial::new(coeffs, field)
}
