//! Finite approximability probe: finite subgroups as ε-nets of a compact
//! Lie group.
//!
//! Tori contain arbitrarily fine finite grid subgroups. SU(2) does not: its
//! finite subgroups are cyclic, binary dihedral or one of three exceptional
//! groups, and their covering radii stay bounded away from zero.

use std::collections::{HashSet, VecDeque};
use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nets::{root_grid_radius, torus_grid_size, torus_net_with, Quaternion, Target};

#[derive(Debug, Clone, Serialize)]
pub struct ProbeSubgroup {
    pub family: String,
    pub order: usize,
    /// Sampled covering radius (a lower estimate of the true radius).
    pub covering_radius: f64,
    pub is_net: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub target: Target,
    pub eps: f64,
    pub subgroup_cap: usize,
    pub sample_count: usize,
    pub seed: u64,
    pub subgroups: Vec<ProbeSubgroup>,
    pub min_covering_radius: f64,
    pub minimizer: String,
    pub any_eps_net: bool,
    pub warnings: Vec<String>,
}

/// Searches for a finite subgroup of `target` that is an `eps`-net.
///
/// For a torus the grid subgroup `(Z/m)^n` is returned whatever its order;
/// `subgroup_cap` bounds the SU(2) catalog.
pub fn turing_probe(
    target: Target,
    eps: f64,
    subgroup_cap: usize,
    seed: u64,
    sample_count: usize,
) -> Result<ProbeReport> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::RadiusOutOfRange(eps));
    }
    if sample_count == 0 {
        return Err(Error::InvalidParameter("sample count must be positive".into()));
    }
    let mut warnings = Vec::new();
    let subgroups = match target {
        Target::Torus { n } => {
            let m = torus_grid_size(eps)?;
            let net = torus_net_with(n, eps, sample_count, seed)?;
            debug_assert!(net.certified_radius <= root_grid_radius(m) + 1e-12);
            vec![ProbeSubgroup {
                family: format!("grid(Z/{m})^{n}"),
                order: net.len(),
                covering_radius: net.certified_radius,
                is_net: net.certified_radius < eps,
            }]
        }
        Target::Su2 => su2_catalog(eps, subgroup_cap, seed, sample_count, &mut warnings),
        Target::Unitary { .. } => {
            return Err(Error::InvalidParameter("probe targets are torus or su2".into()));
        }
    };
    let (min_covering_radius, minimizer) = subgroups
        .iter()
        .map(|s| (s.covering_radius, s.family.clone()))
        .fold((f64::INFINITY, String::new()), |a, b| if b.0 < a.0 { b } else { a });
    Ok(ProbeReport {
        target,
        eps,
        subgroup_cap,
        sample_count,
        seed,
        any_eps_net: subgroups.iter().any(|s| s.is_net),
        subgroups,
        min_covering_radius,
        minimizer,
        warnings,
    })
}

/// Shared sample stream so that all families are judged on the same points.
fn samples(seed: u64, count: usize) -> Vec<Quaternion> {
    (0..count)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            Quaternion::random(&mut rng)
        })
        .collect()
}

/// Largest inner product of `(x, y)` with the `k`-th roots of unity in the plane.
fn best_root_inner(x: f64, y: f64, k: usize) -> f64 {
    let r = x.hypot(y);
    if r == 0.0 {
        return 0.0;
    }
    let step = 2.0 * PI / k as f64;
    let theta = y.atan2(x);
    let j = (theta / step).round();
    r * (theta - j * step).cos()
}

/// Chordal distance of unit quaternions from their inner product.
fn chord_from_inner(inner: f64) -> f64 {
    (2.0 - 2.0 * inner).max(0.0).sqrt()
}

fn sampled_radius(xs: &[Quaternion], nearest: impl Fn(&Quaternion) -> f64 + Sync + Send) -> f64 {
    xs.par_iter().map(nearest).reduce(|| 0.0, f64::max)
}

fn su2_catalog(eps: f64, cap: usize, seed: u64, count: usize, warnings: &mut Vec<String>) -> Vec<ProbeSubgroup> {
    let xs = samples(seed, count);
    let mut out = Vec::new();
    let mut push = |family: String, order: usize, radius: f64| {
        out.push(ProbeSubgroup { family, order, covering_radius: radius, is_net: radius < eps });
    };

    // C_k = {exp(2πij/k)} inside the circle a + bi.
    for k in 1..=cap {
        let r = sampled_radius(&xs, |q| chord_from_inner(best_root_inner(q.0[0], q.0[1], k)));
        push(format!("cyclic({k})"), k, r);
    }
    // Dic_k = C_{2k} ∪ C_{2k} j, of order 4k; C_{2k} j lies in the c + dk plane.
    for k in 2..=cap / 4 {
        let r = sampled_radius(&xs, |q| {
            let a = best_root_inner(q.0[0], q.0[1], 2 * k);
            let b = best_root_inner(q.0[2], q.0[3], 2 * k);
            chord_from_inner(a.max(b))
        });
        push(format!("binary_dihedral({k})"), 4 * k, r);
    }
    for (name, gens) in exceptional_generators() {
        match quaternion_closure(&gens, cap) {
            Some(points) => {
                let order = points.len();
                let r = sampled_radius(&xs, |q| {
                    let best = points
                        .iter()
                        .map(|p| p.0.iter().zip(&q.0).map(|(a, b)| a * b).sum::<f64>())
                        .fold(f64::NEG_INFINITY, f64::max);
                    chord_from_inner(best)
                });
                push(name.to_string(), order, r);
            }
            None => warnings.push(format!("{name}: closure exceeds cap {cap}, skipped")),
        }
    }
    out
}

fn exceptional_generators() -> Vec<(&'static str, Vec<Quaternion>)> {
    let h = 0.5;
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let i = Quaternion([0.0, 1.0, 0.0, 0.0]);
    let j = Quaternion([0.0, 0.0, 1.0, 0.0]);
    let w = Quaternion([h, h, h, h]);
    vec![
        ("binary_tetrahedral", vec![i, j, w]),
        ("binary_octahedral", vec![i, j, w, Quaternion([s, s, 0.0, 0.0])]),
        ("binary_icosahedral", vec![i, j, w, Quaternion([phi * h, h / phi, h, 0.0])]),
    ]
}

/// Group generated by unit quaternions, or `None` once it exceeds `cap`.
pub fn quaternion_closure(gens: &[Quaternion], cap: usize) -> Option<Vec<Quaternion>> {
    let mut seen: HashSet<[i64; 4]> = HashSet::new();
    let mut points = vec![Quaternion::ONE];
    seen.insert(Quaternion::ONE.key());
    let mut queue = VecDeque::from([Quaternion::ONE]);
    while let Some(p) = queue.pop_front() {
        for g in gens {
            let q = p.mul(g).normalized();
            if seen.insert(q.key()) {
                if points.len() == cap {
                    return None;
                }
                points.push(q);
                queue.push_back(q);
            }
        }
    }
    Some(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exceptional_orders() {
        let orders: Vec<usize> =
            exceptional_generators().iter().map(|(_, g)| quaternion_closure(g, 1000).unwrap().len()).collect();
        assert_eq!(orders, vec![24, 48, 120]);
        assert!(quaternion_closure(&exceptional_generators()[2].1, 100).is_none());
    }

    #[test]
    fn torus_probe_succeeds() {
        for (eps, m) in [(0.5, 13), (1.0, 6)] {
            let r = turing_probe(Target::Torus { n: 1 }, eps, 200, 3, 20_000).unwrap();
            assert!(r.any_eps_net);
            assert_eq!(r.subgroups[0].order, m);
        }
    }

    #[test]
    fn closed_form_nearest_matches_brute_force() {
        let xs = samples(5, 500);
        for k in [1, 3, 8] {
            let pts: Vec<Quaternion> = (0..k)
                .map(|t| {
                    Quaternion([
                        (2.0 * PI * t as f64 / k as f64).cos(),
                        (2.0 * PI * t as f64 / k as f64).sin(),
                        0.0,
                        0.0,
                    ])
                })
                .collect();
            for x in &xs {
                let brute = pts.iter().map(|p| p.su2_distance(x)).fold(f64::INFINITY, f64::min);
                let fast = chord_from_inner(best_root_inner(x.0[0], x.0[1], k));
                assert!((brute - fast).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn su2_minimum_is_icosahedral() {
        let r = turing_probe(Target::Su2, 0.3, 200, 7, 20_000).unwrap();
        assert_eq!(r.minimizer, "binary_icosahedral");
        assert!(r.min_covering_radius > 0.2);
        assert!(!r.any_eps_net);
        assert!(r.subgroups.iter().any(|s| s.family == "binary_icosahedral" && s.order == 120));
    }
}
