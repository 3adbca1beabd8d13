//! Finite stages of the compactification of `Z/p` through `x ↦ e^{2πix/p}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_DEMO_PRIME: usize = 10_000;
/// Member lists are included for primes up to this size.
pub const MEMBER_LIST_MAX_PRIME: usize = 100;

#[derive(Debug, Clone, Serialize)]
pub struct DemoRow {
    pub p: usize,
    /// `z = e^{2πi j / grid}`
    pub z_index: usize,
    pub z_angle: f64,
    pub size: usize,
    pub fraction: f64,
    /// `|fraction - limit|`
    pub deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoReport {
    pub primes: Vec<usize>,
    pub eps: f64,
    pub grid: usize,
    /// Normalized arc length of `{w ∈ S¹ : |w - z| < ε}`.
    pub limit_fraction: f64,
    pub rows: Vec<DemoRow>,
}

pub fn is_prime(p: usize) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Tabulates `|A_{p,ε}(z)| / p` with `A_{p,ε}(z) = {x : |e^{2πix/p} - z| < ε}`
/// for every prime and every grid point `z`.
pub fn cyclic_compactification(primes: &[usize], eps: f64, grid: usize) -> Result<DemoReport> {
    if let Some(&p) = primes.iter().find(|&&p| !is_prime(p) || p > MAX_DEMO_PRIME) {
        return Err(Error::InvalidParameter(format!("{p} is not a prime ≤ {MAX_DEMO_PRIME}")));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::RadiusOutOfRange(eps));
    }
    if grid == 0 {
        return Err(Error::InvalidParameter("grid must be positive".into()));
    }
    let limit_fraction = if eps > 2.0 { 1.0 } else { 2.0 * (eps / 2.0).asin() / PI };
    let mut rows = Vec::with_capacity(primes.len() * grid);
    for &p in primes {
        for j in 0..grid {
            let z_angle = 2.0 * PI * j as f64 / grid as f64;
            let z = Complex64::from_polar(1.0, z_angle);
            let members: Vec<usize> = (0..p)
                .filter(|&x| (Complex64::from_polar(1.0, 2.0 * PI * x as f64 / p as f64) - z).norm() < eps)
                .collect();
            let fraction = members.len() as f64 / p as f64;
            rows.push(DemoRow {
                p,
                z_index: j,
                z_angle,
                size: members.len(),
                fraction,
                deviation: (fraction - limit_fraction).abs(),
                members: (p <= MEMBER_LIST_MAX_PRIME).then_some(members),
            });
        }
    }
    Ok(DemoReport { primes: primes.to_vec(), eps, grid, limit_fraction, rows })
}
