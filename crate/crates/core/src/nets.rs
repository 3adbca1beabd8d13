//! ε-nets on T(n), SU(2) and U(n), certified by dense sampling.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{distance_unchecked, operator_norm_2x2, random_unitary, ComplexMatrix, UnitaryMatrix};

pub const DEFAULT_SAMPLE_COUNT: usize = 100_000;
const MAX_NET_SIZE: usize = 1_000_000;
/// Greedy nets are packed at this fraction of the requested radius.
const GREEDY_SHRINK: f64 = 0.75;
const GREEDY_STALL: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    Torus {
        n: usize,
    },
    Su2,
    #[serde(rename = "u")]
    Unitary {
        n: usize,
    },
}

impl Target {
    pub fn dim(&self) -> usize {
        match *self {
            Target::Torus { n } | Target::Unitary { n } => n,
            Target::Su2 => 2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsNet {
    pub target: Target,
    pub radius: f64,
    pub certified_radius: f64,
    pub sample_count: usize,
    pub seed: u64,
    pub points: Vec<UnitaryMatrix>,
}

impl EpsNet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the nearest net point, lowest index on ties, and its distance.
    pub fn nearest(&self, u: &UnitaryMatrix) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, p) in self.points.iter().enumerate() {
            let d = distance_unchecked(p.matrix(), u.matrix());
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }
}

fn check_radius(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::RadiusOutOfRange(eps))
    }
}

/// Roots of unity per slot: `m = ceil(pi / arcsin(eps/2))`, with `eps/2`
/// clamped to 1 (the diameter of U(1) is 2).
pub fn torus_grid_size(eps: f64) -> Result<usize> {
    check_radius(eps)?;
    let half = (eps / 2.0).min(1.0);
    Ok((PI / half.asin()).ceil() as usize)
}

/// Largest chordal distance from a point of S^1 to the `m`-th roots of unity.
pub fn root_grid_radius(m: usize) -> f64 {
    2.0 * (PI / (2.0 * m as f64)).sin()
}

fn chord(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm()
}

pub fn torus_net(n: usize, eps: f64) -> Result<EpsNet> {
    torus_net_with(n, eps, DEFAULT_SAMPLE_COUNT, 0)
}

pub fn torus_net_with(n: usize, eps: f64, sample_count: usize, seed: u64) -> Result<EpsNet> {
    if n == 0 {
        return Err(Error::InvalidParameter("torus dimension must be positive".into()));
    }
    let m = torus_grid_size(eps)?;
    let size = (m as u128).pow(n as u32);
    if size > MAX_NET_SIZE as u128 {
        return Err(Error::InvalidParameter(format!("torus net of size {size} exceeds {MAX_NET_SIZE}")));
    }
    let roots: Vec<Complex64> = (0..m).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64)).collect();
    let points: Vec<UnitaryMatrix> = (0..size as usize)
        .map(|mut idx| {
            let diag: Vec<Complex64> = (0..n)
                .map(|_| {
                    let k = idx % m;
                    idx /= m;
                    roots[k]
                })
                .collect();
            UnitaryMatrix::from_unit_diagonal(&diag)
        })
        .collect();
    let certified_radius = certify_torus(&points, n, m, sample_count, seed);
    if certified_radius > eps {
        return Err(Error::InvariantViolated(format!("torus net radius {certified_radius} exceeds {eps}")));
    }
    Ok(EpsNet { target: Target::Torus { n }, radius: eps, certified_radius, sample_count, seed, points })
}

fn certify_torus(points: &[UnitaryMatrix], n: usize, m: usize, samples: usize, seed: u64) -> f64 {
    let diags: Vec<Vec<Complex64>> = points.iter().map(|p| p.matrix().diagonal()).collect();
    let roots: Vec<Complex64> = diags.iter().take(m).map(|d| d[0]).collect();
    (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let x: Vec<Complex64> =
                (0..n).map(|_| Complex64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI)).collect();
            if diags.len() <= 4096 {
                diags
                    .iter()
                    .map(|d| d.iter().zip(&x).map(|(a, b)| chord(*a, *b)).fold(0.0, f64::max))
                    .fold(f64::INFINITY, f64::min)
            } else {
                // The grid is a product set under a sup metric, so the
                // nearest point is found slot by slot.
                x.iter().map(|&z| roots.iter().map(|&r| chord(r, z)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
            }
        })
        .reduce(|| 0.0, f64::max)
}

/// Unit quaternion `a + bi + cj + dk`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion(pub [f64; 4]);

impl Quaternion {
    pub const ONE: Quaternion = Quaternion([1.0, 0.0, 0.0, 0.0]);

    pub fn mul(&self, o: &Quaternion) -> Quaternion {
        let [a1, b1, c1, d1] = self.0;
        let [a2, b2, c2, d2] = o.0;
        Quaternion([
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ])
    }

    pub fn normalized(&self) -> Quaternion {
        let n = self.0.iter().map(|x| x * x).sum::<f64>().sqrt();
        Quaternion(self.0.map(|x| x / n))
    }

    /// `[[a+bi, c+di], [-c+di, a-bi]]`, row-major.
    pub fn su2_entries(&self) -> [Complex64; 4] {
        let [a, b, c, d] = self.0;
        [Complex64::new(a, b), Complex64::new(c, d), Complex64::new(-c, d), Complex64::new(a, -b)]
    }

    pub fn to_unitary(&self) -> UnitaryMatrix {
        let e = self.su2_entries();
        UnitaryMatrix::new_unchecked(ComplexMatrix::from_fn(2, |i, j| e[2 * i + j]))
    }

    pub fn random<R: Rng>(rng: &mut R) -> Quaternion {
        loop {
            let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-9 {
                return Quaternion(q.map(|x| x / n));
            }
        }
    }

    /// Operator-norm distance of the corresponding SU(2) matrices, from their entries.
    pub fn su2_distance(&self, o: &Quaternion) -> f64 {
        let (x, y) = (self.su2_entries(), o.su2_entries());
        operator_norm_2x2(&[x[0] - y[0], x[1] - y[1], x[2] - y[2], x[3] - y[3]])
    }

    /// Grid cell of side `side` over the real coordinates; entry differences
    /// bound the operator norm from below, so distant cells can be skipped.
    fn cell(&self, side: f64) -> [i64; 4] {
        self.0.map(|x| (x / side).floor() as i64)
    }

    pub fn key(&self) -> [i64; 4] {
        self.0.map(|x| (x * 1e9).round() as i64)
    }
}

/// Greedy net over a point stream with a cell index for pruning.
struct GreedyNet<P> {
    points: Vec<P>,
    cells: HashMap<[i64; 4], Vec<usize>>,
}

impl<P: Copy> GreedyNet<P> {
    fn new() -> Self {
        GreedyNet { points: Vec::new(), cells: HashMap::new() }
    }

    fn within(&self, p: &P, cell: [i64; 4], r: f64, dist: impl Fn(&P, &P) -> f64) -> bool {
        for off in 0..81usize {
            let mut c = cell;
            let mut o = off;
            for k in c.iter_mut() {
                *k += (o % 3) as i64 - 1;
                o /= 3;
            }
            if let Some(ids) = self.cells.get(&c) {
                if ids.iter().any(|&i| dist(&self.points[i], p) < r) {
                    return true;
                }
            }
        }
        false
    }

    fn insert(&mut self, p: P, cell: [i64; 4]) {
        self.cells.entry(cell).or_default().push(self.points.len());
        self.points.push(p);
    }
}

pub fn su2_net(eps: f64, seed: u64) -> Result<EpsNet> {
    su2_net_with(eps, seed, DEFAULT_SAMPLE_COUNT)
}

/// Greedy farthest-point style net on SU(2) as unit quaternions,
/// deterministic in `seed`.
pub fn su2_net_with(eps: f64, seed: u64, sample_count: usize) -> Result<EpsNet> {
    check_radius(eps)?;
    let quats = if eps > 2.0 {
        vec![Quaternion::ONE]
    } else {
        let mut build = eps * GREEDY_SHRINK;
        loop {
            let net = greedy_su2(build, seed);
            let r = su2_cover_radius(&net, sample_count, seed ^ 0x9e37_79b9);
            if r <= eps {
                break net;
            }
            build *= 0.9;
        }
    };
    let certified_radius = su2_cover_radius(&quats, sample_count, seed ^ 0x9e37_79b9);
    Ok(EpsNet {
        target: Target::Su2,
        radius: eps,
        certified_radius,
        sample_count,
        seed,
        points: quats.iter().map(|q| q.to_unitary()).collect(),
    })
}

fn greedy_su2(r: f64, seed: u64) -> Vec<Quaternion> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = GreedyNet::new();
    net.insert(Quaternion::ONE, Quaternion::ONE.cell(r));
    let mut stall = 0;
    while stall < GREEDY_STALL.max(4 * net.points.len()) {
        let q = Quaternion::random(&mut rng);
        let cell = q.cell(r);
        if net.within(&q, cell, r, |a, b| a.su2_distance(b)) {
            stall += 1;
        } else {
            net.insert(q, cell);
            stall = 0;
        }
        if net.points.len() > MAX_NET_SIZE {
            break;
        }
    }
    net.points
}

/// Sampled covering radius of a finite subset of SU(2).
pub fn su2_cover_radius(points: &[Quaternion], samples: usize, seed: u64) -> f64 {
    (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let x = Quaternion::random(&mut rng);
            points.iter().map(|p| p.su2_distance(&x)).fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

/// Net on U(n). U(1) is the root grid and U(2) a product net; larger `n`
/// use a greedy net over Haar samples, practical only for large radii.
pub fn unitary_net(n: usize, eps: f64, seed: u64, sample_count: usize) -> Result<EpsNet> {
    check_radius(eps)?;
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    if n == 1 {
        let mut net = torus_net_with(1, eps, sample_count, seed)?;
        net.target = Target::Unitary { n: 1 };
        return Ok(net);
    }
    if n == 2 {
        return u2_product_net(eps, seed, sample_count);
    }
    let points = if eps > 2.0 {
        vec![UnitaryMatrix::identity(n)]
    } else {
        let mut build = eps * GREEDY_SHRINK;
        loop {
            let net = greedy_unitary(n, build, seed);
            if unitary_cover_radius(&net, n, sample_count, seed ^ 0x9e37_79b9) <= eps {
                break net;
            }
            build *= 0.9;
        }
    };
    let certified_radius = unitary_cover_radius(&points, n, sample_count, seed ^ 0x9e37_79b9);
    Ok(EpsNet { target: Target::Unitary { n }, radius: eps, certified_radius, sample_count, seed, points })
}

/// `U(2) = U(1) SU(2)`: phases `e^{iπj/k}` times an SU(2) net. Since
/// `-I ∈ SU(2)` the phases only need to cover a half circle, and
/// `d(zS, wT) ≤ |z - w| + d(S, T)` certifies the radius.
fn u2_product_net(eps: f64, seed: u64, sample_count: usize) -> Result<EpsNet> {
    if eps > 2.0 {
        let points = vec![UnitaryMatrix::identity(2)];
        return Ok(EpsNet {
            target: Target::Unitary { n: 2 },
            radius: eps,
            certified_radius: 0.0,
            sample_count,
            seed,
            points,
        });
    }
    let k = (PI / (4.0 * (eps / 8.0).asin())).ceil() as usize;
    let phase_radius = 2.0 * (PI / (4.0 * k as f64)).sin();
    let su2 = su2_net_with(eps - phase_radius, seed, sample_count)?;
    let points = (0..k)
        .flat_map(|j| {
            let z = Complex64::from_polar(1.0, PI * j as f64 / k as f64);
            su2.points.iter().map(move |s| UnitaryMatrix::new_unchecked(s.matrix().scale(z)))
        })
        .collect();
    Ok(EpsNet {
        target: Target::Unitary { n: 2 },
        radius: eps,
        certified_radius: phase_radius + su2.certified_radius,
        sample_count,
        seed,
        points,
    })
}

fn unitary_cell(u: &UnitaryMatrix, side: f64) -> [i64; 4] {
    let m = u.matrix();
    [m[(0, 0)].re, m[(0, 0)].im, m[(0, 1)].re, m[(0, 1)].im].map(|x| (x / side).floor() as i64)
}

fn greedy_unitary(n: usize, r: f64, seed: u64) -> Vec<UnitaryMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net: GreedyNet<usize> = GreedyNet::new();
    let mut store = vec![UnitaryMatrix::identity(n)];
    net.insert(0, unitary_cell(&store[0], r));
    let mut stall = 0;
    while stall < GREEDY_STALL.max(4 * store.len()) {
        let u = random_unitary(n, &mut rng);
        let cell = unitary_cell(&u, r);
        let hit = {
            let store = &store;
            net.within(&usize::MAX, cell, r, |&i, _| distance_unchecked(store[i].matrix(), u.matrix()))
        };
        if hit {
            stall += 1;
        } else {
            net.insert(store.len(), cell);
            store.push(u);
            stall = 0;
        }
        if store.len() > MAX_NET_SIZE {
            break;
        }
    }
    store
}

fn unitary_cover_radius(points: &[UnitaryMatrix], n: usize, samples: usize, seed: u64) -> f64 {
    (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let x = random_unitary(n, &mut rng);
            points.iter().map(|p| distance_unchecked(p.matrix(), x.matrix())).fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

/// Size of the net: an upper bound on the covering number at its radius.
pub fn covering_number_estimate(net: &EpsNet) -> usize {
    net.points.len()
}
