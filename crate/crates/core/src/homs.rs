//! Maps from finite groups into U(n): defect, discretization through a
//! finite net, and correction of approximate homomorphisms.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, Subset};
use crate::linalg::{distance_unchecked, operator_norm_unchecked, polar_unitary_part, ComplexMatrix, UnitaryMatrix};
use crate::nets::EpsNet;

pub const DEFAULT_HOM_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITERS: usize = 60;
/// Default bound on the input defect accepted by [`kazhdan_correct`].
pub const DEFAULT_EPS_K: f64 = 1.0 / 200.0;

/// An arbitrary function from a finite group into U(n).
#[derive(Clone)]
pub struct GroupMap {
    group: Arc<FiniteGroup>,
    dim: usize,
    images: Vec<UnitaryMatrix>,
}

impl std::fmt::Debug for GroupMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GroupMap({} -> U({}))", self.group.label(), self.dim)
    }
}

impl GroupMap {
    pub fn new(group: &Arc<FiniteGroup>, images: Vec<UnitaryMatrix>) -> Result<Self> {
        if images.len() != group.order() {
            return Err(Error::InvalidParameter(format!(
                "map has {} images for a group of order {}",
                images.len(),
                group.order()
            )));
        }
        let dim = images.first().map_or(0, |u| u.dim());
        if dim == 0 {
            return Err(Error::InvalidParameter("images must have positive dimension".into()));
        }
        if let Some(u) = images.iter().find(|u| u.dim() != dim) {
            return Err(Error::DimensionMismatch { left: dim, right: u.dim() });
        }
        Ok(GroupMap { group: group.clone(), dim, images })
    }

    pub fn from_fn(group: &Arc<FiniteGroup>, f: impl Fn(usize) -> UnitaryMatrix) -> Result<Self> {
        Self::new(group, group.elements().map(f).collect())
    }

    /// The constant map to the identity of U(dim).
    pub fn trivial(group: &Arc<FiniteGroup>, dim: usize) -> Self {
        GroupMap { group: group.clone(), dim, images: vec![UnitaryMatrix::identity(dim); group.order()] }
    }

    /// Builds a map from its JSON form, certifying every image within `u_tol`.
    pub fn from_data(group: &Arc<FiniteGroup>, data: GroupMapData, u_tol: f64) -> Result<Self> {
        if let Some(label) = &data.group {
            if label != group.label() {
                return Err(Error::GroupMismatch);
            }
        }
        let images = data.images.into_iter().map(|m| UnitaryMatrix::certify(m, u_tol)).collect::<Result<Vec<_>>>()?;
        let map = Self::new(group, images)?;
        if map.dim != data.dim {
            return Err(Error::DimensionMismatch { left: data.dim, right: map.dim });
        }
        Ok(map)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn images(&self) -> &[UnitaryMatrix] {
        &self.images
    }

    pub fn image(&self, x: usize) -> &UnitaryMatrix {
        &self.images[x]
    }

    /// `x -> Q^† f(x) Q`
    pub fn conjugate_by(&self, q: &UnitaryMatrix) -> Self {
        let images = self.images.iter().map(|u| u.conjugate_by(q)).collect();
        GroupMap { group: self.group.clone(), dim: self.dim, images }
    }

    /// `x -> f(x) ⊗ g(x)`
    pub fn tensor(&self, other: &GroupMap) -> Result<Self> {
        if !Arc::ptr_eq(&self.group, &other.group) && *self.group != *other.group {
            return Err(Error::GroupMismatch);
        }
        let images = self.images.iter().zip(&other.images).map(|(a, b)| a.kron(b)).collect();
        Ok(GroupMap { group: self.group.clone(), dim: self.dim * other.dim, images })
    }

    /// `sup_x d(f(x), g(x))`
    pub fn sup_distance(&self, other: &GroupMap) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        if self.images.len() != other.images.len() {
            return Err(Error::GroupMismatch);
        }
        Ok(self
            .images
            .iter()
            .zip(&other.images)
            .map(|(a, b)| distance_unchecked(a.matrix(), b.matrix()))
            .fold(0.0, f64::max))
    }

    /// Whether all images pairwise commute within `tol`.
    pub fn has_abelian_image(&self, tol: f64) -> bool {
        let distinct = dedup_images(&self.images, 1e-9);
        distinct.iter().enumerate().all(|(i, a)| {
            distinct[i + 1..].iter().all(|b| {
                let (a, b) = (a.matrix(), b.matrix());
                operator_norm_unchecked(&a.matmul(b).sub(&b.matmul(a))) <= tol
            })
        })
    }

    pub fn to_data(&self) -> GroupMapData {
        GroupMapData {
            group: Some(self.group.label().to_string()),
            dim: self.dim,
            images: self.images.iter().map(|u| u.matrix().clone()).collect(),
        }
    }
}

impl Serialize for GroupMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_data().serialize(s)
    }
}

/// JSON form `{group, dim, images}` with images in element-index order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupMapData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub dim: usize,
    pub images: Vec<ComplexMatrix>,
}

pub(crate) fn dedup_images(images: &[UnitaryMatrix], tol: f64) -> Vec<UnitaryMatrix> {
    let mut out: Vec<UnitaryMatrix> = Vec::new();
    for u in images {
        if !out.iter().any(|v| distance_unchecked(u.matrix(), v.matrix()) <= tol) {
            out.push(u.clone());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefectReport {
    pub defect: f64,
    /// Lexicographically least pair `(x, y)` attaining the maximum.
    pub witness: (usize, usize),
}

fn better(a: (f64, (usize, usize)), b: (f64, (usize, usize))) -> (f64, (usize, usize)) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// `max_{x,y} d(f(xy), f(x) f(y))`, scanning every pair.
pub fn defect(f: &GroupMap) -> DefectReport {
    let all: Vec<usize> = f.group.elements().collect();
    defect_over(f, &all)
}

/// Defect of `f` restricted to the pairs drawn from `h`.
pub fn defect_on(f: &GroupMap, h: &Subset) -> Result<DefectReport> {
    if !h.is_subgroup() {
        return Err(Error::NotASubgroup);
    }
    Ok(defect_over(f, h.members()))
}

fn defect_over(f: &GroupMap, elems: &[usize]) -> DefectReport {
    let g = &f.group;
    let (defect, witness) = elems
        .par_iter()
        .map(|&x| {
            let fx = f.images[x].matrix();
            let mut best = (f64::NEG_INFINITY, (x, usize::MAX));
            for &y in elems {
                let d = distance_unchecked(f.images[g.mul(x, y)].matrix(), &fx.matmul(f.images[y].matrix()));
                if d > best.0 {
                    best = (d, (x, y));
                }
            }
            best
        })
        .reduce(|| (f64::NEG_INFINITY, (usize::MAX, usize::MAX)), better);
    DefectReport { defect, witness }
}

#[derive(Debug, Clone, Serialize)]
pub struct Discretization {
    pub map: GroupMap,
    /// Net index chosen for each element.
    pub net_indices: Vec<usize>,
    pub defect: DefectReport,
    /// `sup_a d(f(a), τ(a))`
    pub sup_distance: f64,
    pub net_radius: f64,
    pub net_size: usize,
}

/// Rounds a homomorphism to the nearest points of a net.
///
/// Each `τ(a)` moves by at most the net radius `δ`, so the rounded map has
/// defect at most `3δ` plus the defect of `τ`.
pub fn discretize(tau: &GroupMap, net: &EpsNet, hom_tol: f64) -> Result<Discretization> {
    if net.target.dim() != tau.dim() {
        return Err(Error::DimensionMismatch { left: tau.dim(), right: net.target.dim() });
    }
    let input = defect(tau);
    if input.defect > hom_tol {
        return Err(Error::NotAHomomorphism(input.defect));
    }
    let nearest: Vec<(usize, f64)> = tau.images.par_iter().map(|u| net.nearest(u)).collect();
    let sup_distance = nearest.iter().map(|p| p.1).fold(0.0, f64::max);
    if sup_distance > net.radius {
        return Err(Error::InvariantViolated(format!(
            "nearest net point at distance {sup_distance} exceeds net radius {}",
            net.radius
        )));
    }
    let net_indices: Vec<usize> = nearest.iter().map(|p| p.0).collect();
    let map = GroupMap {
        group: tau.group.clone(),
        dim: tau.dim,
        images: net_indices.iter().map(|&i| net.points[i].clone()).collect(),
    };
    let report = defect(&map);
    let bound = 3.0 * sup_distance + input.defect + 1e-12;
    if report.defect > bound {
        return Err(Error::InvariantViolated(format!("discretized defect {} exceeds {bound}", report.defect)));
    }
    Ok(Discretization { map, net_indices, defect: report, sup_distance, net_radius: net.radius, net_size: net.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrectionConfig {
    pub max_iters: usize,
    pub hom_tol: f64,
    /// Inputs with defect at or above this are rejected.
    pub eps_k: f64,
}

impl Default for CorrectionConfig {
    fn default() -> Self {
        CorrectionConfig { max_iters: DEFAULT_MAX_ITERS, hom_tol: DEFAULT_HOM_TOL, eps_k: DEFAULT_EPS_K }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrectionResult {
    pub corrected: GroupMap,
    pub iterations: usize,
    pub input_defect: f64,
    pub final_defect: f64,
    /// `sup_a d(f(a), τ(a))` against the input map.
    pub sup_distance: f64,
    pub config: CorrectionConfig,
}

/// One averaging step `τ'(x) = polar((1/|G|) Σ_g τ(xg) τ(g)^†)`.
pub fn averaging_step(tau: &GroupMap) -> Result<GroupMap> {
    let g = &tau.group;
    let weight = Complex64::new(1.0 / g.order() as f64, 0.0);
    let adjoints: Vec<ComplexMatrix> = tau.images.iter().map(|u| u.matrix().adjoint()).collect();
    let images = g
        .elements()
        .into_par_iter()
        .map(|x| {
            let mut acc = ComplexMatrix::zeros(tau.dim);
            for y in g.elements() {
                acc.add_assign_scaled(&tau.images[g.mul(x, y)].matrix().matmul(&adjoints[y]), weight);
            }
            polar_unitary_part(&acc).map_err(|e| match e {
                Error::PolarUndefined(s) => Error::AveragingDegenerate(s),
                e => e,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GroupMap { group: g.clone(), dim: tau.dim, images })
}

/// Corrects an approximate homomorphism to a nearby exact one.
///
/// The result is checked after the fact: the corrected map must have defect
/// at most `hom_tol` and stay within `2 * defect(f) + hom_tol` of `f`.
pub fn kazhdan_correct(f: &GroupMap, config: &CorrectionConfig) -> Result<CorrectionResult> {
    if !(config.hom_tol > 0.0 && config.eps_k > 0.0) {
        return Err(Error::InvalidParameter("hom_tol and eps_k must be positive".into()));
    }
    let input_defect = defect(f).defect;
    if input_defect >= config.eps_k {
        return Err(Error::HypothesisViolated(format!(
            "input defect {input_defect} is not below eps_k = {}",
            config.eps_k
        )));
    }
    let mut tau = f.clone();
    let mut current = input_defect;
    let mut iterations = 0;
    while current > config.hom_tol {
        if iterations == config.max_iters {
            return Err(Error::CorrectionDidNotConverge { iterations, defect: current });
        }
        tau = averaging_step(&tau)?;
        iterations += 1;
        current = defect(&tau).defect;
    }
    let sup_distance = f.sup_distance(&tau)?;
    let bound = 2.0 * input_defect + config.hom_tol;
    if sup_distance > bound {
        return Err(Error::CorrectionBoundViolated { sup: sup_distance, bound });
    }
    Ok(CorrectionResult {
        corrected: tau,
        iterations,
        input_defect,
        final_defect: current,
        sup_distance,
        config: *config,
    })
}

/// Certifies that `f` is a homomorphism within `tol`.
pub fn certify_homomorphism(f: &GroupMap, tol: f64) -> Result<DefectReport> {
    let report = defect(f);
    if report.defect > tol {
        return Err(Error::NotAHomomorphism(report.defect));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_group, GroupDescriptor};
    use crate::linalg::{random_unitary_near_identity, unitary_distance};
    use crate::nets::torus_net;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn z(n: usize) -> Arc<FiniteGroup> {
        build_group(&GroupDescriptor::Cyclic { n }).unwrap()
    }

    fn rotation_char(g: &Arc<FiniteGroup>, n: usize, k: usize) -> GroupMap {
        GroupMap::from_fn(g, |x| UnitaryMatrix::from_phases(&[2.0 * PI * (k * x) as f64 / n as f64])).unwrap()
    }

    #[test]
    fn perturbed_z4_defect() {
        let g = z(4);
        let f = GroupMap::from_fn(&g, |x| {
            let t = if x == 1 { PI / 2.0 + 0.1 } else { PI * x as f64 / 2.0 };
            UnitaryMatrix::from_phases(&[t])
        })
        .unwrap();
        let r = defect(&f);
        assert!((r.defect - 2.0 * 0.1f64.sin()).abs() < 1e-12);
        assert_eq!(r.witness, (1, 1));
    }

    #[test]
    fn constant_identity_on_nonabelian_group() {
        let g = build_group(&GroupDescriptor::Symmetric { n: 4 }).unwrap();
        assert_eq!(defect(&GroupMap::trivial(&g, 3)).defect, 0.0);
    }

    #[test]
    fn discretize_z64_through_torus_net() {
        let g = z(64);
        let tau = rotation_char(&g, 64, 1);
        let net = torus_net(1, 0.05).unwrap();
        let d = discretize(&tau, &net, 1e-10).unwrap();
        assert!(d.defect.defect <= 0.15);
        assert!(d.sup_distance <= 0.05);
    }

    #[test]
    fn discretize_with_net_containing_the_image() {
        let g = z(8);
        let tau = rotation_char(&g, 8, 1);
        let net = torus_net(1, 2.0 * (PI / 8.0).sin() + 1e-9).unwrap();
        assert_eq!(net.len(), 8);
        let d = discretize(&tau, &net, 1e-10).unwrap();
        assert!(d.sup_distance < 1e-12);
        assert!(d.defect.defect < 1e-12);
    }

    #[test]
    fn discretize_to_single_point() {
        let g = z(5);
        let net = torus_net(1, 2.5).unwrap();
        let tau = rotation_char(&g, 5, 2);
        let single = EpsNet { points: vec![UnitaryMatrix::identity(1)], ..net };
        let d = discretize(&tau, &single, 1e-10).unwrap();
        assert_eq!(d.defect.defect, 0.0);
    }

    #[test]
    fn discretize_rejects_non_homomorphism() {
        let g = z(4);
        let f = GroupMap::from_fn(&g, |x| UnitaryMatrix::from_phases(&[0.3 * x as f64])).unwrap();
        let net = torus_net(1, 0.5).unwrap();
        assert!(matches!(discretize(&f, &net, 1e-10), Err(Error::NotAHomomorphism(_))));
    }

    #[test]
    fn homomorphism_is_a_fixed_point() {
        let g = z(6);
        let tau = rotation_char(&g, 6, 5);
        let r = kazhdan_correct(&tau, &CorrectionConfig::default()).unwrap();
        assert!(r.iterations <= 1);
        assert!(r.sup_distance <= 1e-9);
    }

    #[test]
    fn z3_perturbation_snaps_to_nearest_character() {
        let g = z(3);
        let eta = [0.0, 0.001, -0.0015];
        let f = GroupMap::from_fn(&g, |x| UnitaryMatrix::from_phases(&[2.0 * PI * x as f64 / 3.0 + eta[x]])).unwrap();
        let r = kazhdan_correct(&f, &CorrectionConfig::default()).unwrap();
        assert!(r.final_defect <= 1e-9);
        assert!(r.sup_distance <= 2.0 * r.input_defect + 1e-9);
        let dists: Vec<f64> = (0..3).map(|k| rotation_char(&g, 3, k).sup_distance(&r.corrected).unwrap()).collect();
        assert!(dists[1] < 1e-8, "{dists:?}");
    }

    #[test]
    fn rejects_large_defect() {
        let g = z(4);
        let f = GroupMap::from_fn(&g, |x| UnitaryMatrix::from_phases(&[0.3 * x as f64])).unwrap();
        assert!(matches!(kazhdan_correct(&f, &CorrectionConfig::default()), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn degenerate_averaging() {
        // f(1) = i averages to (i - i)/2 = 0 at x = 1.
        let g = z(2);
        let f = GroupMap::new(&g, vec![UnitaryMatrix::identity(1), UnitaryMatrix::from_phases(&[PI / 2.0])]).unwrap();
        assert!(matches!(averaging_step(&f), Err(Error::AveragingDegenerate(_))));
    }

    #[test]
    fn json_round_trip() {
        let g = z(3);
        let f = rotation_char(&g, 3, 1);
        let s = serde_json::to_string(&f).unwrap();
        let back: GroupMapData = serde_json::from_str(&s).unwrap();
        let f2 = GroupMap::from_data(&g, back, 1e-10).unwrap();
        assert_eq!(f.sup_distance(&f2).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn restriction_does_not_increase_defect(seed in any::<u64>(), n in 2usize..13) {
            let g = z(n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = GroupMap::new(&g, (0..n).map(|_| random_unitary_near_identity(1, 0.5, &mut rng)).collect()).unwrap();
            let whole = defect(&f).defect;
            for d in 1..=n {
                if n % d == 0 {
                    let h = Subset::new(&g, (0..n).step_by(n / d)).unwrap();
                    prop_assert!(defect_on(&f, &h).unwrap().defect <= whole);
                }
            }
        }

        #[test]
        fn correction_contract_on_cyclic_groups(seed in any::<u64>(), n in 2usize..10, k in 0usize..10) {
            let g = z(n);
            let tau = rotation_char(&g, n, k % n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = GroupMap::new(&g, tau.images.iter().map(|u| u.mul(&random_unitary_near_identity(1, 0.001, &mut rng))).collect()).unwrap();
            let r = kazhdan_correct(&f, &CorrectionConfig::default()).unwrap();
            prop_assert!(r.final_defect <= 1e-9);
            prop_assert!(r.sup_distance <= 2.0 * r.input_defect + 1e-9);
            prop_assert!(unitary_distance(r.corrected.image(1), tau.image(1)).unwrap() < 0.01);
        }
    }
}
