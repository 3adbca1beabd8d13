//! Unitary representations of catalog groups and numerical extraction of
//! irreducible degrees.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::group::{gcd, FiniteGroup, Structure};
use crate::homs::{defect, GroupMap};
use crate::linalg::{hermitian_eigen, ComplexMatrix, UnitaryMatrix, ONE, ZERO};
use crate::nets::Quaternion;

/// Defect bound for a map to count as a representation.
pub const REPRESENTATION_TOL: f64 = 1e-10;
pub const DEGREE_EXTRACTION_MAX_ORDER: usize = 360;
const DEGREE_ATTEMPTS: u64 = 5;
const CATALOG_PERMUTATION_MAX_ORDER: usize = 360;

/// A homomorphism into U(n), certified to [`REPRESENTATION_TOL`].
#[derive(Clone, Debug)]
pub struct Representation {
    name: String,
    map: GroupMap,
}

impl Representation {
    pub fn certify(name: impl Into<String>, map: GroupMap) -> Result<Self> {
        let report = defect(&map);
        let id = map.group().identity();
        let at_identity = crate::linalg::distance_to_identity(map.image(id));
        if report.defect > REPRESENTATION_TOL || at_identity > REPRESENTATION_TOL {
            return Err(Error::NotAHomomorphism(report.defect.max(at_identity)));
        }
        Ok(Representation { name: name.into(), map })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn map(&self) -> &GroupMap {
        &self.map
    }

    pub fn into_map(self) -> GroupMap {
        self.map
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.map.group()
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn image(&self, x: usize) -> &UnitaryMatrix {
        self.map.image(x)
    }

    pub fn is_trivial(&self) -> bool {
        self.map.images().iter().all(|u| crate::linalg::distance_to_identity(u) <= REPRESENTATION_TOL)
    }
}

impl Serialize for Representation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            group_label: &'a str,
            name: &'a str,
            dim: usize,
            images: Vec<&'a ComplexMatrix>,
        }
        Repr {
            group_label: self.group().label(),
            name: &self.name,
            dim: self.dim(),
            images: self.map.images().iter().map(|u| u.matrix()).collect(),
        }
        .serialize(s)
    }
}

/// A character of an abelian group with exact rational phases:
/// `χ(x) = exp(2πi phases[x] / modulus)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbelianCharacter {
    pub modulus: usize,
    pub phases: Vec<usize>,
}

impl AbelianCharacter {
    pub fn value(&self, x: usize) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * self.phases[x] as f64 / self.modulus as f64)
    }

    pub fn is_trivial(&self) -> bool {
        self.phases.iter().all(|&p| p == 0)
    }

    /// `Re χ(x) > 0`, decided exactly from the phase.
    pub fn has_positive_real_part(&self, x: usize) -> bool {
        let q = 4 * self.phases[x];
        let m = self.modulus;
        q < m || q > 3 * m
    }

    pub fn to_representation(&self, group: &Arc<FiniteGroup>, name: String) -> Result<Representation> {
        let map = GroupMap::from_fn(group, |x| UnitaryMatrix::from_unit_diagonal(&[self.value(x)]))?;
        Representation::certify(name, map)
    }
}

/// All `|G|` characters of an abelian group, built along a chain of cyclic
/// extensions `1 = H_0 < H_1 < ... < G`, each `H_{i+1} = <H_i, g_i>`.
///
/// For cyclic `Z/n` the order is `χ_k(x) = exp(2πi kx/n)`, `k = 0..n`.
pub fn abelian_characters(group: &FiniteGroup) -> Result<Vec<AbelianCharacter>> {
    if !group.is_abelian() {
        return Err(Error::GroupNotAbelian);
    }
    let order = group.order();
    let e = group.exponent();
    const UNSET: usize = usize::MAX;
    let mut in_h = vec![false; order];
    in_h[group.identity()] = true;
    let mut h_members = vec![group.identity()];
    let mut chars: Vec<Vec<usize>> = vec![{
        let mut p = vec![UNSET; order];
        p[group.identity()] = 0;
        p
    }];
    while h_members.len() < order {
        let g = (0..order).find(|&x| !in_h[x]).expect("proper subgroup");
        // least m with g^m in H
        let mut m = 1;
        let mut gm = g;
        while !in_h[gm] {
            gm = group.mul(gm, g);
            m += 1;
        }
        let powers: Vec<usize> = (0..m)
            .scan(group.identity(), |acc, _| {
                let cur = *acc;
                *acc = group.mul(*acc, g);
                Some(cur)
            })
            .collect();
        let mut next = Vec::with_capacity(chars.len() * m);
        for chi in &chars {
            let p = chi[gm];
            if p % m != 0 {
                return Err(Error::InvariantViolated("character does not extend".into()));
            }
            let q0 = p / m;
            for t in 0..m {
                let q = (q0 + t * e / m) % e;
                let mut ext = chi.clone();
                for &h in &h_members {
                    for (j, &gj) in powers.iter().enumerate().skip(1) {
                        ext[group.mul(h, gj)] = (chi[h] + j * q) % e;
                    }
                }
                next.push(ext);
            }
        }
        chars = next;
        let mut new_members = Vec::with_capacity(h_members.len() * m);
        for &h in &h_members {
            for &gj in &powers {
                new_members.push(group.mul(h, gj));
            }
        }
        for &x in &new_members {
            in_h[x] = true;
        }
        h_members = new_members;
    }
    Ok(chars.into_iter().map(|phases| reduce(AbelianCharacter { modulus: e, phases })).collect())
}

/// Cancels the common factor of the phases and the modulus.
fn reduce(chi: AbelianCharacter) -> AbelianCharacter {
    let g = chi.phases.iter().fold(chi.modulus, |acc, &p| gcd(acc, p));
    AbelianCharacter { modulus: chi.modulus / g, phases: chi.phases.iter().map(|p| p / g).collect() }
}

/// All characters as certified one-dimensional representations.
pub fn characters_abelian(group: &Arc<FiniteGroup>) -> Result<Vec<Representation>> {
    abelian_characters(group)?
        .iter()
        .enumerate()
        .map(|(k, chi)| chi.to_representation(group, format!("chi[{k}]")))
        .collect()
}

/// Irreducible representations of a catalog group, sorted by dimension.
///
/// Abelian, dihedral and quaternion groups get complete lists. Permutation
/// groups get the trivial, sign and deleted-permutation representations,
/// plus the sign twist of the latter for symmetric groups of degree ≥ 4
/// (complete for S3 and S4).
/// Direct products of catalog groups get tensor products of factor irreps.
pub fn catalog_irreps(group: &Arc<FiniteGroup>) -> Result<Vec<Representation>> {
    let mut reps = if group.is_abelian() {
        characters_abelian(group)?
    } else {
        match group.structure() {
            Structure::Dihedral { n } => dihedral_irreps(group, *n)?,
            Structure::Quaternion8 => quaternion_irreps(group)?,
            Structure::Permutation { degree, perms, symmetric } => {
                if group.order() > CATALOG_PERMUTATION_MAX_ORDER {
                    return Err(Error::NoCatalogEntry(format!(
                        "{}: permutation groups above order {CATALOG_PERMUTATION_MAX_ORDER}",
                        group.label()
                    )));
                }
                permutation_irreps(group, *degree, perms, *symmetric)?
            }
            Structure::Product { factors } => product_irreps(group, factors)?,
            Structure::Cyclic { .. } | Structure::Table => {
                return Err(Error::NoCatalogEntry(group.label().to_string()))
            }
        }
    };
    reps.sort_by_key(|r| r.dim());
    Ok(reps)
}

fn from_matrices(group: &Arc<FiniteGroup>, name: String, f: impl Fn(usize) -> ComplexMatrix) -> Result<Representation> {
    let map = GroupMap::from_fn(group, |x| UnitaryMatrix::certify(f(x), 1e-12).expect("closed-form unitary"))?;
    Representation::certify(name, map)
}

fn sign_of(b: bool) -> Complex64 {
    if b {
        -ONE
    } else {
        ONE
    }
}

fn dihedral_irreps(group: &Arc<FiniteGroup>, n: usize) -> Result<Vec<Representation>> {
    // element k + n*e is r^k s^e
    let split = |x: usize| (x % n, x / n);
    let mut reps = Vec::new();
    let mut one_dim = vec![(false, false), (false, true)];
    if n.is_multiple_of(2) {
        one_dim.extend([(true, false), (true, true)]);
    }
    for (r_neg, s_neg) in one_dim {
        let name = format!("lin[r={},s={}]", if r_neg { -1 } else { 1 }, if s_neg { -1 } else { 1 });
        reps.push(from_matrices(group, name, |x| {
            let (k, e) = split(x);
            ComplexMatrix::scalar(sign_of(r_neg && k % 2 == 1) * sign_of(s_neg && e == 1))
        })?);
    }
    for j in 1..n.div_ceil(2) {
        reps.push(from_matrices(group, format!("rho[{j}]"), |x| {
            let (k, e) = split(x);
            let w = Complex64::from_polar(1.0, 2.0 * PI * ((j * k) % n) as f64 / n as f64);
            if e == 0 {
                ComplexMatrix::from_diagonal(&[w, w.conj()])
            } else {
                // r^k s = diag(w, w^-1) [[0,1],[1,0]]
                ComplexMatrix::from_rows(vec![vec![ZERO, w], vec![w.conj(), ZERO]]).expect("square")
            }
        })?);
    }
    Ok(reps)
}

/// Quaternion for element `x` of Q8 in the order `1, -1, i, -i, j, -j, k, -k`.
pub fn q8_quaternion(x: usize) -> Quaternion {
    let mut q = [0.0; 4];
    q[x / 2] = if x.is_multiple_of(2) { 1.0 } else { -1.0 };
    Quaternion(q)
}

fn quaternion_irreps(group: &Arc<FiniteGroup>) -> Result<Vec<Representation>> {
    let mut reps = Vec::new();
    for (a, b) in [(false, false), (true, false), (false, true), (true, true)] {
        let name = format!("lin[i={},j={}]", if a { -1 } else { 1 }, if b { -1 } else { 1 });
        reps.push(from_matrices(group, name, |x| {
            let v = match x / 2 {
                0 => ONE,
                1 => sign_of(a),
                2 => sign_of(b),
                _ => sign_of(a ^ b),
            };
            ComplexMatrix::scalar(v)
        })?);
    }
    reps.push(from_matrices(group, "spin".into(), |x| q8_quaternion(x).to_unitary().into_matrix())?);
    Ok(reps)
}

fn parity(p: &[u8]) -> bool {
    let mut seen = vec![false; p.len()];
    let mut odd = false;
    for start in 0..p.len() {
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = p[i] as usize;
            len += 1;
        }
        if len > 0 && len % 2 == 0 {
            odd = !odd;
        }
    }
    odd
}

/// Orthonormal basis of the sum-zero subspace of R^d (Helmert vectors).
fn sum_zero_basis(d: usize) -> Vec<Vec<f64>> {
    (0..d - 1)
        .map(|k| {
            let norm = (((k + 1) * (k + 2)) as f64).sqrt();
            (0..d)
                .map(|i| match i.cmp(&(k + 1)) {
                    std::cmp::Ordering::Less => 1.0 / norm,
                    std::cmp::Ordering::Equal => -((k + 1) as f64) / norm,
                    std::cmp::Ordering::Greater => 0.0,
                })
                .collect()
        })
        .collect()
}

fn permutation_irreps(
    group: &Arc<FiniteGroup>,
    degree: usize,
    perms: &[Vec<u8>],
    symmetric: bool,
) -> Result<Vec<Representation>> {
    let mut reps = vec![from_matrices(group, "trivial".into(), |_| ComplexMatrix::identity(1))?];
    let has_odd = perms.iter().any(|p| parity(p));
    if has_odd {
        reps.push(from_matrices(group, "sign".into(), |x| ComplexMatrix::scalar(sign_of(parity(&perms[x]))))?);
    }
    let mut pairs = std::collections::HashSet::new();
    for p in perms {
        pairs.insert((p[0], p[1]));
    }
    // The deleted-permutation representation is irreducible iff the action is 2-transitive.
    if degree >= 3 && pairs.len() == degree * (degree - 1) {
        let basis = sum_zero_basis(degree);
        let standard = |x: usize| {
            let p = &perms[x];
            ComplexMatrix::from_fn(degree - 1, |a, b| {
                let s: f64 = (0..degree).map(|i| basis[a][p[i] as usize] * basis[b][i]).sum();
                Complex64::new(s, 0.0)
            })
        };
        reps.push(from_matrices(group, "standard".into(), standard)?);
        if symmetric && degree >= 4 {
            reps.push(from_matrices(group, "standard*sign".into(), |x| standard(x).scale(sign_of(parity(&perms[x]))))?);
        }
        if symmetric && degree == 4 {
            // S4 acts on the three ways of pairing up {0,1,2,3}; pull back the S3 standard rep.
            let basis3 = sum_zero_basis(3);
            let pairing = |a: u8, b: u8| -> usize {
                match (a, b) {
                    (0, b) => b as usize - 1,
                    (a, 0) => a as usize - 1,
                    (a, b) => 5 - a as usize - b as usize,
                }
            };
            reps.push(from_matrices(group, "pairings".into(), |x| {
                let p = &perms[x];
                let q: Vec<usize> = (0..3).map(|k| pairing(p[0], p[k + 1])).collect();
                ComplexMatrix::from_fn(2, |a, b| {
                    let s: f64 = (0..3).map(|i| basis3[a][q[i]] * basis3[b][i]).sum();
                    Complex64::new(s, 0.0)
                })
            })?);
        }
    }
    Ok(reps)
}

fn product_irreps(group: &Arc<FiniteGroup>, factors: &[Arc<FiniteGroup>]) -> Result<Vec<Representation>> {
    let factor_reps: Vec<Vec<Representation>> = factors.iter().map(catalog_irreps).collect::<Result<_>>()?;
    let mut combos: Vec<Vec<usize>> = vec![vec![]];
    for fr in &factor_reps {
        combos = combos.into_iter().flat_map(|c| (0..fr.len()).map(move |i| [c.clone(), vec![i]].concat())).collect();
    }
    combos
        .into_iter()
        .map(|combo| {
            let name =
                combo.iter().zip(&factor_reps).map(|(&i, fr)| fr[i].name().to_string()).collect::<Vec<_>>().join("(x)");
            from_matrices(group, name, |x| {
                let digits = crate::group::product_digits(factors, x);
                combo
                    .iter()
                    .zip(&factor_reps)
                    .zip(digits)
                    .map(|((&i, fr), d)| fr[i].image(d).matrix().clone())
                    .reduce(|a, b| a.kron(&b))
                    .expect("at least one factor")
            })
        })
        .collect()
}

/// Irreducible degrees with multiplicities, e.g. `[(1, 1), (3, 2), (4, 1), (5, 1)]` for A5.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrrepDegrees {
    /// `(degree, number of inequivalent irreducibles of that degree)`, by degree.
    pub degrees: Vec<(usize, usize)>,
    /// Least degree of a nontrivial irreducible; absent for the trivial group.
    pub min_nontrivial: Option<usize>,
    pub seed: u64,
    pub attempts: usize,
}

impl IrrepDegrees {
    pub fn sum_of_squares(&self) -> usize {
        self.degrees.iter().map(|&(d, m)| d * d * m).sum()
    }
}

/// Irreducible degrees read off the commutant of the regular representation.
///
/// A random Hermitian matrix averaged over conjugation by the left regular
/// representation commutes with it, so each irreducible of degree `d`
/// contributes `d` distinct eigenvalues, each repeated `d` times.
pub fn regular_rep_degrees(group: &FiniteGroup, seed: u64) -> Result<IrrepDegrees> {
    let n = group.order();
    if n > DEGREE_EXTRACTION_MAX_ORDER {
        return Err(Error::OrderExceedsCap { order: n, cap: DEGREE_EXTRACTION_MAX_ORDER });
    }
    for attempt in 0..DEGREE_ATTEMPTS {
        if let Some(mut found) = extract_degrees(group, seed.wrapping_add(attempt)) {
            found.seed = seed;
            found.attempts = attempt as usize + 1;
            return Ok(found);
        }
    }
    Err(Error::DegreeExtractionFailed { attempts: DEGREE_ATTEMPTS as usize })
}

/// Least degree of a nontrivial irreducible unitary representation.
pub fn min_nontrivial_dim(group: &FiniteGroup, seed: u64) -> Result<usize> {
    regular_rep_degrees(group, seed)?.min_nontrivial.ok_or(Error::TrivialGroup)
}

fn extract_degrees(group: &FiniteGroup, seed: u64) -> Option<IrrepDegrees> {
    let n = group.order();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = ComplexMatrix::zeros(n);
    for i in 0..n {
        h[(i, i)] = Complex64::new(rng.sample(StandardNormal), 0.0);
        for j in i + 1..n {
            let z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    // P = (1/N) Σ_g L(g) H L(g)^†, so P[i][j] = f(i^{-1} j) with f(h) = (1/N) Σ_g H[g][gh].
    let f: Vec<Complex64> =
        (0..n).map(|x| (0..n).map(|g| h[(g, group.mul(g, x))]).sum::<Complex64>() / n as f64).collect();
    let p = ComplexMatrix::from_fn(n, |i, j| f[group.mul(group.inv(i), j)]);
    let (values, vectors) = hermitian_eigen(&p);

    let scale = values.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let tol = 1e-7 * scale;
    let mut clusters: Vec<std::ops::Range<usize>> = Vec::new();
    let mut start = 0;
    for k in 1..=n {
        if k == n || values[k] - values[k - 1] > tol {
            clusters.push(start..k);
            start = k;
        }
    }

    // The trivial component is the one holding the G-fixed constant vector.
    let u = 1.0 / (n as f64).sqrt();
    let fixed_weight = |c: &std::ops::Range<usize>| -> f64 {
        c.clone().map(|col| (0..n).map(|i| vectors[(i, col)] * u).sum::<Complex64>().norm_sqr()).sum()
    };

    let mut count_by_size = std::collections::BTreeMap::<usize, usize>::new();
    let mut min_nontrivial: Option<usize> = None;
    let mut trivial_clusters = 0;
    for c in &clusters {
        let size = c.len();
        *count_by_size.entry(size).or_default() += 1;
        if fixed_weight(c) > 0.5 {
            trivial_clusters += 1;
            if size != 1 {
                return None;
            }
        } else {
            min_nontrivial = Some(min_nontrivial.map_or(size, |m| m.min(size)));
        }
    }
    if trivial_clusters != 1 {
        return None;
    }
    let mut degrees = Vec::new();
    for (&d, &count) in &count_by_size {
        if count % d != 0 {
            return None;
        }
        degrees.push((d, count / d));
    }
    let found = IrrepDegrees { degrees, min_nontrivial, seed, attempts: 0 };
    (found.sum_of_squares() == n).then_some(found)
}
