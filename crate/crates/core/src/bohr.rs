//! Bohr neighborhoods `τ^{-1}(U)` of homomorphisms into U(n) or T(n).

use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::group::{genericity, group_exponent, FiniteGroup, Genericity, Subset};
use crate::homs::{certify_homomorphism, dedup_images, GroupMap, DEFAULT_HOM_TOL};
use crate::linalg::{
    distance_to_identity, distance_unchecked, gamma, simultaneous_diagonalize, UnitaryMatrix, DEFAULT_COMMUTE_TOL,
};
use crate::nets::{EpsNet, Target};
use crate::reps::Representation;

/// Members must lie this far inside the open ball.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;
/// Elements whose distance is this close to `δ` are flagged.
pub const BOUNDARY_COLLAR: f64 = 1e-9;
/// Default for the unspecified constant `c` in covering-number bounds.
pub const DEFAULT_BOUND_CONSTANT: f64 = 6.0;
pub const IMAGE_SEARCH_CAP: usize = 360;

#[derive(Debug, Clone)]
pub struct BohrSpec {
    hom: GroupMap,
    hom_ref: String,
    delta: f64,
    target: Target,
}

impl BohrSpec {
    /// `hom` must be a homomorphism within [`DEFAULT_HOM_TOL`]; a torus
    /// target requires diagonal images.
    pub fn new(hom: GroupMap, hom_ref: impl Into<String>, delta: f64, target: Target) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::RadiusOutOfRange(delta));
        }
        match target {
            Target::Torus { n } | Target::Unitary { n } if n == hom.dim() => {}
            Target::Su2 => return Err(Error::InvalidParameter("Bohr targets are torus or u".into())),
            _ => return Err(Error::DimensionMismatch { left: hom.dim(), right: target.dim() }),
        }
        if matches!(target, Target::Torus { .. }) && !hom.images().iter().all(|u| u.is_diagonal(1e-12)) {
            return Err(Error::InvalidParameter("torus target needs diagonal images".into()));
        }
        certify_homomorphism(&hom, DEFAULT_HOM_TOL)?;
        Ok(BohrSpec { hom, hom_ref: hom_ref.into(), delta, target })
    }

    /// Skips the defect scan; for maps that are homomorphisms by
    /// construction, such as tuples of exact characters.
    pub(crate) fn new_exact(hom: GroupMap, hom_ref: impl Into<String>, delta: f64, target: Target) -> Self {
        debug_assert!(delta > 0.0 && target.dim() == hom.dim());
        BohrSpec { hom, hom_ref: hom_ref.into(), delta, target }
    }

    pub fn from_rep(rep: &Representation, delta: f64) -> Result<Self> {
        Self::new(rep.map().clone(), rep.name(), delta, Target::Unitary { n: rep.dim() })
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::RadiusOutOfRange(delta));
        }
        Ok(BohrSpec { delta, ..self.clone() })
    }

    pub fn hom(&self) -> &GroupMap {
        &self.hom
    }

    pub fn hom_ref(&self) -> &str {
        &self.hom_ref
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn target(&self) -> Target {
        self.target
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.hom.group()
    }

    pub fn dim(&self) -> usize {
        self.hom.dim()
    }
}

#[derive(Debug, Clone)]
pub struct BohrSet {
    spec: BohrSpec,
    members: Subset,
    distances: Vec<f64>,
    boundary_flags: Vec<usize>,
}

impl BohrSet {
    pub fn spec(&self) -> &BohrSpec {
        &self.spec
    }

    pub fn members(&self) -> &Subset {
        &self.members
    }

    /// `d(τ(x), I)` for every element.
    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    /// Elements within [`BOUNDARY_COLLAR`] of the radius.
    pub fn boundary_flags(&self) -> &[usize] {
        &self.boundary_flags
    }

    pub fn delta(&self) -> f64 {
        self.spec.delta
    }
}

impl Serialize for BohrSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            group: &'a str,
            hom_ref: &'a str,
            delta: f64,
            target: Target,
            members: &'a [usize],
            boundary_flags: &'a [usize],
        }
        Repr {
            group: self.spec.group().label(),
            hom_ref: &self.spec.hom_ref,
            delta: self.spec.delta,
            target: self.spec.target,
            members: self.members.members(),
            boundary_flags: &self.boundary_flags,
        }
        .serialize(s)
    }
}

/// `{x : d(τ(x), I) < δ}`.
///
/// Membership is decided with a [`MEMBERSHIP_SLACK`] margin so that
/// elements exactly on the sphere (like `i` at radius `√2`) stay out.
pub fn bohr_set(spec: &BohrSpec) -> BohrSet {
    let g = spec.group();
    let distances: Vec<f64> = spec.hom.images().iter().map(distance_to_identity).collect();
    let delta = spec.delta;
    let members = Subset::new(g, g.elements().filter(|&x| distances[x] < delta - MEMBERSHIP_SLACK)).expect("in range");
    let boundary_flags = g.elements().filter(|&x| (distances[x] - delta).abs() <= BOUNDARY_COLLAR).collect();
    BohrSet { spec: spec.clone(), members, distances, boundary_flags }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub symmetric: bool,
    pub contains_identity: bool,
    pub conjugation_invariant: bool,
    /// `B^2` lies in the Bohr set of radius `2δ`.
    pub square_in_double: bool,
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        self.symmetric && self.contains_identity && self.conjugation_invariant && self.square_in_double
    }
}

pub fn verify_bohr_basic(b: &BohrSet) -> PropertyReport {
    let set = &b.members;
    let g = set.group();
    let doubled = bohr_set(&b.spec.with_delta(2.0 * b.spec.delta).expect("positive"));
    PropertyReport {
        symmetric: set.inverse() == *set,
        contains_identity: set.contains(g.identity()),
        conjugation_invariant: g.elements().all(|h| set.conjugate_by(h) == *set),
        square_in_double: set.product(set).expect("same group").is_subset_of(&doubled.members),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverReport {
    /// `F` with `F B = G`.
    pub translates: Vec<usize>,
    pub net_size: usize,
    pub net_radius: f64,
}

/// Finitely many translates of `B` covering `G`, one per net point that
/// meets the image.
///
/// With `V` the ball of radius `δ/2` and `E` the net, `K = E V`. For each
/// `a ∈ E` whose `aV` meets `τ(G)` pick a witness `g_a`; then every `x`
/// lies in some `g_a B` because `V^{-1} V` sits inside the δ-ball.
pub fn genericity_cover(b: &BohrSet, net: &EpsNet) -> Result<CoverReport> {
    let spec = &b.spec;
    if net.target.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { left: spec.dim(), right: net.target.dim() });
    }
    if net.certified_radius > net.radius || 2.0 * net.radius > spec.delta {
        return Err(Error::InvalidParameter(format!(
            "net radius {} (certified {}) must be at most δ/2 = {}",
            net.radius,
            net.certified_radius,
            spec.delta / 2.0
        )));
    }
    let g = spec.group();
    let images = spec.hom.images();
    let half = spec.delta / 2.0;
    let mut translates: Vec<usize> = net
        .points
        .iter()
        .filter_map(|a| g.elements().find(|&x| distance_unchecked(images[x].matrix(), a.matrix()) < half))
        .collect();
    translates.sort_unstable();
    translates.dedup();
    let f = Subset::new(g, translates.iter().copied()).expect("in range");
    if !f.product(&b.members)?.is_whole() {
        return Err(Error::CoverFailed(format!("{} translates do not cover {}", translates.len(), g.label())));
    }
    Ok(CoverReport { translates, net_size: net.len(), net_radius: net.radius })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub c: f64,
    pub delta: f64,
    pub n: usize,
    pub genericity: Genericity,
    /// `ceil((c/δ)^{n²})`, as a float since it can be astronomically large.
    pub genericity_bound: f64,
    pub genericity_holds: bool,
    pub density: f64,
    /// `(δ/c)^{n²}`
    pub density_bound: f64,
    pub density_holds: bool,
}

pub fn genericity_bound_check(b: &BohrSet, c: f64) -> Result<BoundReport> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter(format!("bound constant must be positive, got {c}")));
    }
    let n = b.spec.dim();
    let delta = b.spec.delta;
    let exponent = (n * n) as f64;
    let genericity_bound = (c / delta).powf(exponent).ceil().max(1.0);
    let order = b.members.group().order();
    let gen = genericity(&b.members, order)?.expect("B contains the identity, so |G| translates cover");
    let density_bound = (delta / c).powf(exponent);
    Ok(BoundReport {
        c,
        delta,
        n,
        genericity_holds: (gen.count as f64) <= genericity_bound,
        genericity: gen,
        genericity_bound,
        density: b.members.density(),
        density_holds: b.members.density() >= density_bound,
        density_bound,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TorusReduction {
    pub bohr: BohrSet,
    /// `Q` with `Q^† τ(x) Q` diagonal.
    pub conjugator: UnitaryMatrix,
}

/// Diagonalizes the defining homomorphism of a Bohr set with abelian image.
/// The member set is unchanged by bi-invariance; this is checked.
pub fn u_to_t_abelian(b: &BohrSet) -> Result<TorusReduction> {
    let hom = &b.spec.hom;
    if !hom.has_abelian_image(DEFAULT_COMMUTE_TOL) {
        return Err(Error::ImageNotAbelian);
    }
    let (diag_hom, conjugator) = diagonalize_hom(hom)?;
    let spec = BohrSpec::new(diag_hom, format!("{}@T", b.spec.hom_ref), b.spec.delta, Target::Torus { n: hom.dim() })?;
    let reduced = bohr_set(&spec);
    check_same_members(b, &reduced)?;
    Ok(TorusReduction { bohr: reduced, conjugator })
}

fn diagonalize_hom(hom: &GroupMap) -> Result<(GroupMap, UnitaryMatrix)> {
    let distinct = dedup_images(hom.images(), 1e-9);
    let d = simultaneous_diagonalize(&distinct, DEFAULT_COMMUTE_TOL).map_err(|e| match e {
        Error::FamilyNotAbelian => Error::ImageNotAbelian,
        e => e,
    })?;
    let q = d.conjugator;
    let conj = hom.conjugate_by(&q);
    let images = conj.images().iter().map(|u| UnitaryMatrix::from_unit_diagonal(&u.matrix().diagonal())).collect();
    Ok((GroupMap::new(hom.group(), images)?, q))
}

/// Membership must agree with `b` except at boundary-flagged elements.
fn check_same_members(b: &BohrSet, other: &BohrSet) -> Result<()> {
    for x in b.members.group().elements() {
        let flagged = b.boundary_flags.contains(&x) || other.boundary_flags.contains(&x);
        if b.members.contains(x) != other.members.contains(x) && !flagged {
            return Err(Error::InvariantViolated(format!("membership of {x} changed under conjugation")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct TorsionReduction {
    /// `H = τ^{-1}(A)` for an abelian subgroup `A` of the image.
    pub h: Vec<usize>,
    pub h_index: usize,
    pub h_normal: bool,
    pub image_order: usize,
    pub abelian_order: usize,
    pub abelian_index: usize,
    pub abelian_normal: bool,
    /// `B ∩ H` as a torus Bohr set of the restricted, diagonalized hom, over
    /// `H` with local indices (local `i` is `h[i]`).
    pub bohr_h: BohrSet,
    pub conjugator: UnitaryMatrix,
}

/// Restricts to the preimage of a largest abelian subgroup of the image,
/// preferring normal ones, and conjugates the restriction into T(n).
pub fn u_to_t_torsion(b: &BohrSet) -> Result<TorsionReduction> {
    let hom = &b.spec.hom;
    let g = hom.group();
    let image = dedup_images(hom.images(), 1e-9);
    if image.len() > IMAGE_SEARCH_CAP {
        return Err(Error::ImageExceedsCap(image.len()));
    }
    let index_of: Vec<usize> = hom
        .images()
        .iter()
        .map(|u| image.iter().position(|v| distance_unchecked(u.matrix(), v.matrix()) <= 1e-9).expect("deduped"))
        .collect();
    let mut preimage = vec![usize::MAX; image.len()];
    for x in g.elements().rev() {
        preimage[index_of[x]] = x;
    }
    let m = image.len();
    let table: Vec<Vec<usize>> =
        (0..m).map(|i| (0..m).map(|j| index_of[g.mul(preimage[i], preimage[j])]).collect()).collect();
    let img_group = Arc::new(FiniteGroup::from_table(table, format!("im({})", b.spec.hom_ref))?);
    let (abelian, abelian_normal) = largest_abelian_subgroup(&img_group);

    let h = Subset::new(g, g.elements().filter(|&x| abelian.contains(index_of[x])))?;
    let h_group = h.as_group()?;
    let restricted = GroupMap::new(&h_group, h.members().iter().map(|&x| hom.image(x).clone()).collect())?;
    let (diag_hom, conjugator) = diagonalize_hom(&restricted)?;
    let spec =
        BohrSpec::new(diag_hom, format!("{}|H@T", b.spec.hom_ref), b.spec.delta, Target::Torus { n: hom.dim() })?;
    let bohr_h = bohr_set(&spec);
    let hm = h.members().to_vec();
    // B_H must be B ∩ H.
    let b_cap_h = b.members.intersection(&h)?;
    for (i, &x) in hm.iter().enumerate() {
        let flagged = b.boundary_flags.contains(&x) || bohr_h.boundary_flags.contains(&i);
        if bohr_h.members.contains(i) != b_cap_h.contains(x) && !flagged {
            return Err(Error::InvariantViolated(format!("B ∩ H disagrees with B_H at {x}")));
        }
    }
    Ok(TorsionReduction {
        h_index: h.subgroup_index()?,
        h_normal: h.is_normal(),
        h: hm,
        image_order: m,
        abelian_order: abelian.len(),
        abelian_index: m / abelian.len(),
        abelian_normal,
        bohr_h,
        conjugator,
    })
}

const ABELIAN_SEARCH_NODES: usize = 200_000;

/// Largest abelian subgroup, preferring a normal one among those of
/// largest order. Searches subgroups generated by commuting elements.
fn largest_abelian_subgroup(g: &Arc<FiniteGroup>) -> (Subset, bool) {
    let n = g.order();
    let commute = |a: usize, b: usize| g.mul(a, b) == g.mul(b, a);
    let mut seen = std::collections::HashSet::<Vec<bool>>::new();
    let mut best: Option<(Subset, bool)> = None;
    let mut stack: Vec<(Vec<usize>, usize)> = vec![(vec![], 0)];
    let mut nodes = 0;
    while let Some((gens, next)) = stack.pop() {
        nodes += 1;
        if nodes > ABELIAN_SEARCH_NODES {
            break;
        }
        let mask = g.closure_mask(&gens);
        if !seen.insert(mask.clone()) {
            continue;
        }
        let sub = Subset::from_mask(g, &mask);
        let better = match &best {
            None => true,
            Some((b, b_normal)) => sub.len() > b.len() || (sub.len() == b.len() && !b_normal && sub.is_normal()),
        };
        if better {
            let normal = sub.is_normal();
            best = Some((sub.clone(), normal));
        }
        for c in (next..n).rev() {
            if !mask[c] && sub.members().iter().all(|&s| commute(s, c)) {
                let mut more = gens.clone();
                more.push(c);
                stack.push((more, c + 1));
            }
        }
    }
    best.expect("trivial subgroup is abelian")
}

#[derive(Debug, Clone, Serialize)]
pub struct CollapseReport {
    pub exponent: usize,
    pub gamma_r: f64,
    pub delta: f64,
    pub subgroup: Vec<usize>,
    pub index: usize,
    pub is_subgroup: bool,
    pub is_normal: bool,
    pub equals_kernel: bool,
}

/// For `δ ≤ γ_r` with `r` the exponent, the Bohr set is the kernel of `τ`.
pub fn exponent_collapse(b: &BohrSet) -> Result<CollapseReport> {
    let g = b.members.group();
    let r = group_exponent(g);
    let gamma_r = gamma(r);
    if b.spec.delta > gamma_r + MEMBERSHIP_SLACK {
        return Err(Error::HypothesisViolated(format!("δ = {} exceeds γ_{r} = {gamma_r}", b.spec.delta)));
    }
    let kernel = Subset::new(g, g.elements().filter(|&x| b.distances[x] <= DEFAULT_HOM_TOL))?;
    let report = CollapseReport {
        exponent: r,
        gamma_r,
        delta: b.spec.delta,
        subgroup: b.members.members().to_vec(),
        index: g.order() / b.members.len().max(1),
        is_subgroup: b.members.is_subgroup(),
        is_normal: b.members.is_normal(),
        equals_kernel: b.members == kernel,
    };
    if !(report.is_subgroup && report.is_normal && report.equals_kernel) {
        return Err(Error::InvariantViolated(format!("Bohr set at δ ≤ γ_r is not the kernel: {report:?}")));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_group, GroupDescriptor};
    use crate::linalg::{random_unitary, ComplexMatrix};
    use crate::nets::torus_net;
    use crate::reps::{catalog_irreps, characters_abelian};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn z(n: usize) -> Arc<FiniteGroup> {
        build_group(&GroupDescriptor::Cyclic { n }).unwrap()
    }

    fn rotation(n: usize) -> BohrSpec {
        let g = z(n);
        let hom = GroupMap::from_fn(&g, |x| UnitaryMatrix::from_phases(&[2.0 * PI * x as f64 / n as f64])).unwrap();
        BohrSpec::new(hom, "chi[1]", 1.0, Target::Torus { n: 1 }).unwrap()
    }

    #[test]
    fn z8_example() {
        let b = bohr_set(&rotation(8));
        assert_eq!(b.members().members(), &[0, 1, 7]);
        let p = verify_bohr_basic(&b);
        assert!(p.all_pass());
        let sq = b.members().product(b.members()).unwrap();
        assert_eq!(sq.members(), &[0, 1, 2, 6, 7]);
    }

    #[test]
    fn large_delta_and_trivial_hom_give_everything() {
        let b = bohr_set(&rotation(8).with_delta(2.01).unwrap());
        assert!(b.members().is_whole());
        let g = build_group(&GroupDescriptor::Symmetric { n: 3 }).unwrap();
        let spec = BohrSpec::new(GroupMap::trivial(&g, 2), "trivial", 0.01, Target::Unitary { n: 2 }).unwrap();
        let b = bohr_set(&spec);
        assert!(b.members().is_whole());
        assert!(verify_bohr_basic(&b).all_pass());
    }

    #[test]
    fn cover_z8() {
        let b = bohr_set(&rotation(8));
        let net = torus_net(1, 0.5).unwrap();
        assert_eq!(net.len(), 13);
        let c = genericity_cover(&b, &net).unwrap();
        assert!(c.translates.len() <= 13);
        let whole = bohr_set(&rotation(8).with_delta(3.0).unwrap());
        let net = torus_net(1, 1.5).unwrap();
        let c = genericity_cover(&whole, &net).unwrap();
        assert!(!c.translates.is_empty() && c.translates.len() <= net.len());
    }

    #[test]
    fn cover_z64() {
        let b = bohr_set(&rotation(64).with_delta(0.4).unwrap());
        let net = torus_net(1, 0.2).unwrap();
        let c = genericity_cover(&b, &net).unwrap();
        assert!(c.translates.len() <= net.len());
    }

    #[test]
    fn bound_check_z8() {
        let b = bohr_set(&rotation(8));
        let r = genericity_bound_check(&b, 6.0).unwrap();
        assert_eq!(r.genericity.count, 3);
        assert_eq!(r.genericity_bound, 6.0);
        assert!(r.genericity_holds && r.density_holds);
        assert!((r.density - 0.375).abs() < 1e-15);
    }

    fn real_rotation(t: f64) -> UnitaryMatrix {
        let (c, s) = (Complex64::new(t.cos(), 0.0), Complex64::new(t.sin(), 0.0));
        UnitaryMatrix::certify(ComplexMatrix::from_rows(vec![vec![c, -s], vec![s, c]]).unwrap(), 1e-12).unwrap()
    }

    #[test]
    fn u_to_t_rotations_of_z4() {
        let g = z(4);
        let hom = GroupMap::from_fn(&g, |x| real_rotation(PI * x as f64 / 2.0)).unwrap();
        for delta in [0.5, 1.0, 1.5, 2.0, 2.5] {
            let b = bohr_set(&BohrSpec::new(hom.clone(), "rot", delta, Target::Unitary { n: 2 }).unwrap());
            let t = u_to_t_abelian(&b).unwrap();
            assert_eq!(t.bohr.members().members(), b.members().members());
            assert!(t.bohr.spec().hom().images().iter().all(|u| u.is_diagonal(0.0)));
        }
    }

    #[test]
    fn u_to_t_rejects_nonabelian_image() {
        let q8 = build_group(&GroupDescriptor::Quaternion8).unwrap();
        let spin = catalog_irreps(&q8).unwrap().pop().unwrap();
        let b = bohr_set(&BohrSpec::from_rep(&spin, 1.0).unwrap());
        assert_eq!(u_to_t_abelian(&b).unwrap_err(), Error::ImageNotAbelian);
    }

    #[test]
    fn torsion_reduction_q8_and_s3() {
        let q8 = build_group(&GroupDescriptor::Quaternion8).unwrap();
        let spin = catalog_irreps(&q8).unwrap().pop().unwrap();
        let r = u_to_t_torsion(&bohr_set(&BohrSpec::from_rep(&spin, 1.5).unwrap())).unwrap();
        assert_eq!((r.image_order, r.abelian_index, r.h_index), (8, 2, 2));
        assert!(r.h_normal && r.abelian_normal);

        let s3 = build_group(&GroupDescriptor::Symmetric { n: 3 }).unwrap();
        let std = catalog_irreps(&s3).unwrap().into_iter().find(|r| r.name() == "standard").unwrap();
        let r = u_to_t_torsion(&bohr_set(&BohrSpec::from_rep(&std, 1.5).unwrap())).unwrap();
        assert_eq!((r.abelian_index, r.h_index), (2, 2));
        let h = Subset::new(&s3, r.h.iter().copied()).unwrap();
        assert!(h.is_normal());
        assert!(h.members().iter().all(|&x| s3.element_order(x) != 2));
    }

    #[test]
    fn torsion_reduction_of_abelian_image_keeps_g() {
        let g = z(6);
        let chi = characters_abelian(&g).unwrap().remove(1);
        let r = u_to_t_torsion(&bohr_set(&BohrSpec::from_rep(&chi, 1.0).unwrap())).unwrap();
        assert_eq!(r.h_index, 1);
    }

    #[test]
    fn collapse_examples() {
        let v4 = build_group(&GroupDescriptor::Product {
            factors: vec![GroupDescriptor::Cyclic { n: 2 }, GroupDescriptor::Cyclic { n: 2 }],
        })
        .unwrap();
        // χ(a, b) = (-1)^a
        let hom = GroupMap::from_fn(&v4, |x| UnitaryMatrix::from_phases(&[PI * (x % 2) as f64])).unwrap();
        let b = bohr_set(&BohrSpec::new(hom, "sign_a", 2.0, Target::Torus { n: 1 }).unwrap());
        let r = exponent_collapse(&b).unwrap();
        assert_eq!(r.subgroup, vec![0, 2]);
        assert_eq!(r.index, 2);

        let q8 = build_group(&GroupDescriptor::Quaternion8).unwrap();
        let spin = catalog_irreps(&q8).unwrap().pop().unwrap();
        let b = bohr_set(&BohrSpec::from_rep(&spin, 2f64.sqrt()).unwrap());
        assert!(!b.boundary_flags().is_empty());
        let r = exponent_collapse(&b).unwrap();
        assert_eq!((r.subgroup.clone(), r.index), (vec![0], 8));

        let too_big = bohr_set(&BohrSpec::from_rep(&spin, 1.5).unwrap());
        assert!(matches!(exponent_collapse(&too_big), Err(Error::HypothesisViolated(_))));
    }

    proptest! {
        #[test]
        fn membership_is_conjugation_invariant_and_monotone(seed in any::<u64>(), d1 in 0.05f64..2.1, d2 in 0.05f64..2.1) {
            let g = build_group(&GroupDescriptor::Dihedral { n: 5 }).unwrap();
            let reps = catalog_irreps(&g).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for rep in &reps {
                let (lo, hi) = (d1.min(d2), d1.max(d2));
                let b = bohr_set(&BohrSpec::from_rep(rep, lo).unwrap());
                let q = random_unitary(rep.dim(), &mut rng);
                let conj = BohrSpec::new(rep.map().conjugate_by(&q), "conj", lo, Target::Unitary { n: rep.dim() }).unwrap();
                let bc = bohr_set(&conj);
                for x in g.elements() {
                    if !b.boundary_flags().contains(&x) {
                        prop_assert_eq!(b.members().contains(x), bc.members().contains(x));
                    }
                }
                let bigger = bohr_set(&BohrSpec::from_rep(rep, hi).unwrap());
                prop_assert!(b.members().is_subset_of(bigger.members()));
                prop_assert!(verify_bohr_basic(&b).all_pass());
            }
        }

        #[test]
        fn torus_and_unitary_targets_agree(n in 2usize..20, k in 0usize..20, delta in 0.05f64..2.1) {
            let g = z(n);
            let hom = GroupMap::from_fn(&g, |x| UnitaryMatrix::from_phases(&[2.0 * PI * (k * x) as f64 / n as f64])).unwrap();
            let t = bohr_set(&BohrSpec::new(hom.clone(), "t", delta, Target::Torus { n: 1 }).unwrap());
            let u = bohr_set(&BohrSpec::new(hom, "u", delta, Target::Unitary { n: 1 }).unwrap());
            prop_assert_eq!(t.members(), u.members());
        }
    }
}
