//! Bogolyubov-type statements: Bohr neighborhoods inside `(AA^{-1})^2`,
//! checked exhaustively, together with the Fourier construction for abelian
//! groups, covering upgrades, quasirandomness and the bounded-exponent
//! subgroup version.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bohr::{bohr_set, exponent_collapse, BohrSet, BohrSpec};
use crate::error::{Error, Result};
use crate::group::{genericity, group_exponent, Subset};
use crate::homs::GroupMap;
use crate::linalg::{gamma, UnitaryMatrix};
use crate::nets::Target;
use crate::reps::{abelian_characters, min_nontrivial_dim, regular_rep_degrees, AbelianCharacter, Representation};

pub const PARSEVAL_TOL: f64 = 1e-10;
/// Above this many indices `epsilon_star` evaluates only the endpoints of
/// monotone `ε` forms.
pub const EPS_STAR_SCAN_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Serialize)]
pub struct FourierSpectrum {
    pub group: String,
    pub alpha: f64,
    /// `Â(χ) = (1/|G|) Σ_{a ∈ A} conj(χ(a))`, in character order.
    pub coefficients: Vec<Complex64>,
    #[serde(skip)]
    pub characters: Vec<AbelianCharacter>,
}

pub fn fourier(a: &Subset) -> Result<FourierSpectrum> {
    let g = a.group();
    let characters = abelian_characters(g)?;
    let order = g.order() as f64;
    let coefficients: Vec<Complex64> = characters
        .iter()
        .map(|chi| a.members().iter().map(|&x| chi.value(x).conj()).sum::<Complex64>() / order)
        .collect();
    let alpha = a.density();
    let energy: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
    if (energy - alpha).abs() > PARSEVAL_TOL {
        return Err(Error::InvariantViolated(format!("Parseval: Σ|Â|² = {energy}, density {alpha}")));
    }
    Ok(FourierSpectrum { group: g.label().to_string(), alpha, coefficients, characters })
}

#[derive(Debug, Clone, Serialize)]
pub struct RuzsaWitness {
    pub alpha: f64,
    /// `ρ = sqrt(α/2)`; characters with `|Â| ≥ ρα` form the large spectrum.
    pub rho: f64,
    pub large_spectrum: Vec<usize>,
    /// `2/α²`
    pub spectrum_bound: f64,
    pub bohr: BohrSet,
    pub contained_in_2a2ainv: bool,
}

/// Bohr set of the large spectrum of `A`, contained in `(AA^{-1})^2`.
///
/// `1_A * 1_A' * 1_A * 1_A'` (with `A' = A^{-1}`) at `x` is
/// `Σ |Â(χ)|^4 χ(x)`. On `B = {x : Re χ(x) > 0, χ ∈ Γ}` the real part of the
/// trivial term plus the `Γ` terms exceeds `α^4`, while the remaining terms
/// total at most `ρ²α² Σ|Â|² = ρ²α³ = α^4/2`, so the convolution is positive
/// and `x ∈ (AA^{-1})^2`. Parseval also gives `|Γ| ρ²α² ≤ α`, i.e.
/// `|Γ| ≤ 2/α²`.
pub fn ruzsa_bogolyubov_abelian(a: &Subset) -> Result<RuzsaWitness> {
    if a.is_empty() {
        return Err(Error::InvalidParameter("A must be nonempty".into()));
    }
    let g = a.group();
    let spectrum = fourier(a)?;
    let alpha = spectrum.alpha;
    let rho = (alpha / 2.0).sqrt();
    let threshold = rho * alpha;
    let large_spectrum: Vec<usize> = spectrum
        .characters
        .iter()
        .enumerate()
        .filter(|(k, chi)| !chi.is_trivial() && spectrum.coefficients[*k].norm() >= threshold)
        .map(|(k, _)| k)
        .collect();
    let spectrum_bound = 2.0 / (alpha * alpha);
    if large_spectrum.len() as f64 > spectrum_bound + 1e-9 {
        return Err(Error::InvariantViolated(format!(
            "|Γ| = {} exceeds 2/α² = {spectrum_bound}",
            large_spectrum.len()
        )));
    }
    let gamma_chars: Vec<&AbelianCharacter> = large_spectrum.iter().map(|&k| &spectrum.characters[k]).collect();
    let exact = Subset::new(g, g.elements().filter(|&x| gamma_chars.iter().all(|chi| chi.has_positive_real_part(x))))?;

    let k = gamma_chars.len();
    let (hom, dim) = if k == 0 {
        (GroupMap::trivial(g, 1), 1)
    } else {
        let images = g
            .elements()
            .map(|x| UnitaryMatrix::from_unit_diagonal(&gamma_chars.iter().map(|chi| chi.value(x)).collect::<Vec<_>>()))
            .collect();
        (GroupMap::new(g, images)?, k)
    };
    let hom_ref = format!("chi{large_spectrum:?}");
    let bohr = bohr_set(&BohrSpec::new_exact(hom, hom_ref, 2f64.sqrt(), Target::Torus { n: dim }));
    for x in g.elements() {
        if exact.contains(x) != bohr.members().contains(x) && !bohr.boundary_flags().contains(&x) {
            return Err(Error::InvariantViolated(format!("Re χ > 0 and chordal √2 membership disagree at {x}")));
        }
    }
    if bohr.members() != &exact {
        return Err(Error::InvariantViolated("boundary element decided differently by the metric".into()));
    }
    let aa = a.difference_set();
    let contained = exact.is_subset_of(&aa.product(&aa)?);
    if !contained {
        return Err(Error::InvariantViolated(format!("B ⊄ (AA⁻¹)² for A = {:?}", a.members())));
    }
    Ok(RuzsaWitness { alpha, rho, large_spectrum, spectrum_bound, bohr, contained_in_2a2ainv: contained })
}

/// `ε(δ, n)` for the Bohr-set statement, and `ε(m)` for the subgroup one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EpsFn {
    Constant {
        value: f64,
    },
    /// `κ δ^a n^b`; as a function of an index `m` it is `κ m^b`.
    Power {
        kappa: f64,
        a: f64,
        b: f64,
    },
    /// `[delta, n, value]` rows, matched exactly. As a function of an
    /// index `m`, rows with `n = m` are used.
    Table {
        entries: Vec<(f64, usize, f64)>,
    },
}

impl EpsFn {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        let valid = match self {
            EpsFn::Constant { value } => ok(*value),
            EpsFn::Power { kappa, a, b } => ok(*kappa) && a.is_finite() && b.is_finite(),
            EpsFn::Table { entries } => !entries.is_empty() && entries.iter().all(|&(d, _, v)| ok(d) && ok(v)),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("ε must be positive: {self:?}")))
        }
    }

    pub fn eval(&self, delta: f64, n: usize) -> Result<f64> {
        match self {
            EpsFn::Constant { value } => Ok(*value),
            EpsFn::Power { kappa, a, b } => Ok(kappa * delta.powf(*a) * (n as f64).powf(*b)),
            EpsFn::Table { entries } => entries
                .iter()
                .find(|&&(d, k, _)| d == delta && k == n)
                .map(|e| e.2)
                .ok_or(Error::EpsTableMiss { delta, n }),
        }
    }

    pub fn eval_index(&self, m: usize) -> Result<f64> {
        match self {
            EpsFn::Constant { value } => Ok(*value),
            EpsFn::Power { kappa, b, .. } => Ok(kappa * (m as f64).powf(*b)),
            EpsFn::Table { entries } => {
                entries.iter().find(|e| e.1 == m).map(|e| e.2).ok_or(Error::EpsTableMiss { delta: f64::NAN, n: m })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BogoCriteria {
    pub alpha: f64,
    pub eps: EpsFn,
}

impl BogoCriteria {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        self.eps.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BogoChecks {
    pub contained_in_2a2ainv: bool,
    pub translate_in_aaainv: bool,
    /// Lowest `g` with `gB ⊆ AAA^{-1}`.
    pub translate_witness: Option<usize>,
    /// `μ(B ∖ AA^{-1}) / μ(B)`
    pub relative_error: f64,
    pub eps_value: f64,
    pub relative_error_ok: bool,
}

impl BogoChecks {
    pub fn all_pass(&self) -> bool {
        self.contained_in_2a2ainv && self.translate_in_aaainv && self.relative_error_ok
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanEntry {
    pub source: String,
    pub dim: usize,
    pub delta: f64,
    pub bohr_size: usize,
    pub contained_in_2a2ainv: bool,
    pub translate_in_aaainv: bool,
    pub relative_error: f64,
    pub threshold: f64,
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BogoWitness {
    pub bohr: BohrSet,
    pub checks: BogoChecks,
    pub scan_log: Vec<ScanEntry>,
}

/// Products of `A` used by every check, computed once.
struct SetProducts {
    aa_inv: Subset,
    square: Subset,
    aaa_inv: Subset,
}

impl SetProducts {
    fn new(a: &Subset) -> Result<Self> {
        let aa_inv = a.difference_set();
        let square = aa_inv.product(&aa_inv)?;
        let aaa_inv = a.product(&aa_inv)?;
        Ok(SetProducts { aa_inv, square, aaa_inv })
    }

    /// (i), (ii) and the relative error of (iii) for a candidate set.
    fn evaluate(&self, b: &Subset, threshold: f64) -> Result<BogoChecks> {
        self.aa_inv.check_same_group(b)?;
        let translate_witness = self.aaa_inv.find_left_translate_inside(b);
        let outside = b.minus(&self.aa_inv)?.len();
        let relative_error = if b.is_empty() { 0.0 } else { outside as f64 / b.len() as f64 };
        Ok(BogoChecks {
            contained_in_2a2ainv: b.is_subset_of(&self.square),
            translate_in_aaainv: translate_witness.is_some(),
            translate_witness,
            relative_error,
            eps_value: threshold,
            relative_error_ok: relative_error < threshold,
        })
    }
}

fn check_density(a: &Subset, alpha: f64) -> Result<()> {
    let density = a.density();
    if density < alpha {
        return Err(Error::DensityViolated { density, alpha });
    }
    Ok(())
}

/// Evaluates the three conclusions for `A` and `B`, with
/// `ε = criteria.eps(δ, n)` in (iii).
pub fn criteria_check(a: &Subset, b: &BohrSet, criteria: &BogoCriteria) -> Result<BogoWitness> {
    criteria.validate()?;
    check_density(a, criteria.alpha)?;
    let threshold = criteria.eps.eval(b.delta(), b.spec().dim())?;
    let checks = SetProducts::new(a)?.evaluate(b.members(), threshold)?;
    Ok(BogoWitness { bohr: b.clone(), checks, scan_log: Vec::new() })
}

#[derive(Debug, Clone, Serialize)]
pub struct UpgradeReport {
    pub mu_v_minus_w: f64,
    pub mu_u: f64,
    /// `μ(V∖W) < μ(U)/2`
    pub hypothesis_1: bool,
    /// `U ⊆ W W^{-1}`
    pub conclusion_1: bool,
    pub genericity: usize,
    pub genericity_exact: bool,
    pub alpha: f64,
    /// `μ(V∖W) < α/m`
    pub hypothesis_2: bool,
    /// `A W^{-1}` contains a left translate of `U`.
    pub conclusion_2: bool,
    pub translate_witness: Option<usize>,
}

/// Checks both covering upgrades for `1 ∈ U = U^{-1}`, `U² ⊆ V`.
/// A conclusion failing while its hypothesis holds is an error.
pub fn covering_upgrade(u: &Subset, v: &Subset, w: &Subset, a: &Subset, alpha: f64) -> Result<UpgradeReport> {
    for s in [v, w, a] {
        u.check_same_group(s)?;
    }
    let g = u.group();
    if !u.contains(g.identity()) || u.inverse() != *u {
        return Err(Error::NotNested("U must contain 1 and be symmetric".into()));
    }
    if !u.product(u)?.is_subset_of(v) {
        return Err(Error::NotNested("U² ⊄ V".into()));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    check_density(a, alpha)?;
    let order = g.order() as f64;
    let outside = v.minus(w)?.len();
    let mu_v_minus_w = outside as f64 / order;
    let mu_u = u.density();
    // Compare integer counts to keep the strict inequalities exact.
    let hypothesis_1 = 2 * outside < u.len();
    let conclusion_1 = u.is_subset_of(&w.difference_set());
    let gen = genericity(u, g.order())?.expect("U contains 1");
    let hypothesis_2 = mu_v_minus_w * (gen.count as f64) < alpha;
    let translate_witness = a.product(&w.inverse())?.find_left_translate_inside(u);
    let report = UpgradeReport {
        mu_v_minus_w,
        mu_u,
        hypothesis_1,
        conclusion_1,
        genericity: gen.count,
        genericity_exact: gen.exact,
        alpha,
        hypothesis_2,
        conclusion_2: translate_witness.is_some(),
        translate_witness,
    };
    if (report.hypothesis_1 && !report.conclusion_1) || (report.hypothesis_2 && !report.conclusion_2) {
        return Err(Error::InvariantViolated(format!("covering upgrade failed: {report:?}")));
    }
    Ok(report)
}

/// `ε*` for the Bohr statement (`r = None`):
/// `min{ε(δ/2, n), α} (δ/2c)^{n²}`; and for the subgroup statement
/// (`r = Some(exponent)`): `min{ε(m)/m : m ≤ (c / min{δ, γ_r})^{n²}}`.
pub fn epsilon_star(eps: &EpsFn, alpha: f64, c: f64, delta: f64, n: usize, r: Option<usize>) -> Result<f64> {
    eps.validate()?;
    for (name, v) in [("alpha", alpha), ("c", c), ("delta", delta)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let exponent = (n * n) as i32;
    match r {
        None => Ok(eps.eval(delta / 2.0, n)?.min(alpha) * (delta / (2.0 * c)).powi(exponent)),
        Some(0) => Err(Error::InvalidParameter("exponent must be positive".into())),
        Some(r) => {
            // Every Bohr set of the trivial group is the whole group.
            let radius = if r == 1 { delta } else { delta.min(gamma(r)) };
            let top = (c / radius).powi(exponent).floor().max(1.0);
            let ratio = |m: usize| eps.eval_index(m).map(|e| e / m as f64);
            if top <= EPS_STAR_SCAN_LIMIT {
                return (1..=top as usize).try_fold(f64::INFINITY, |acc, m| Ok(acc.min(ratio(m)?)));
            }
            // κ m^{b-1} is monotone in m, so the minimum sits at an endpoint.
            let last = match eps {
                EpsFn::Constant { value } => value / top,
                EpsFn::Power { kappa, b, .. } => kappa * top.powf(b - 1.0),
                EpsFn::Table { .. } => {
                    return Err(Error::InvalidParameter(format!("{top:e} indices exceed the ε table")));
                }
            };
            Ok(ratio(1)?.min(last))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub witness: Option<BogoWitness>,
    pub scan_log: Vec<ScanEntry>,
}

struct Candidate {
    source: String,
    bohr: BohrSet,
}

/// Candidate Bohr sets in scan order: the Fourier witness for abelian
/// groups, then `(rep, δ)` by increasing dimension and decreasing `δ`,
/// ties broken by the order of `reps`.
fn candidates(a: &Subset, reps: &[Representation], delta_grid: &[f64]) -> Result<Vec<Candidate>> {
    let g = a.group();
    for rep in reps {
        if !Arc::ptr_eq(rep.group(), g) && rep.group().label() != g.label() {
            return Err(Error::GroupMismatch);
        }
    }
    if let Some(&d) = delta_grid.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
        return Err(Error::RadiusOutOfRange(d));
    }
    let mut deltas = delta_grid.to_vec();
    deltas.sort_by(|x, y| y.total_cmp(x));
    deltas.dedup();
    let mut out = Vec::new();
    if g.is_abelian() && !a.is_empty() {
        let r = ruzsa_bogolyubov_abelian(a)?;
        out.push(Candidate { source: "ruzsa".into(), bohr: r.bohr });
    }
    let mut order: Vec<usize> = (0..reps.len()).collect();
    order.sort_by_key(|&i| reps[i].dim());
    for i in order {
        let rep = &reps[i];
        let spec = BohrSpec::from_rep(rep, deltas.first().copied().unwrap_or(1.0))?;
        for &d in &deltas {
            out.push(Candidate { source: rep.name().to_string(), bohr: bohr_set(&spec.with_delta(d)?) });
        }
    }
    Ok(out)
}

fn scan_entry(c: &Candidate, checks: &BogoChecks, accepted: bool) -> ScanEntry {
    ScanEntry {
        source: c.source.clone(),
        dim: c.bohr.spec().dim(),
        delta: c.bohr.delta(),
        bohr_size: c.bohr.members().len(),
        contained_in_2a2ainv: checks.contained_in_2a2ainv,
        translate_in_aaainv: checks.translate_in_aaainv,
        relative_error: checks.relative_error,
        threshold: checks.eps_value,
        accepted,
        note: None,
    }
}

/// First candidate whose checks pass, scanning in [`candidates`] order.
pub fn bogolyubov_search(
    a: &Subset,
    criteria: &BogoCriteria,
    reps: &[Representation],
    delta_grid: &[f64],
) -> Result<SearchReport> {
    criteria.validate()?;
    check_density(a, criteria.alpha)?;
    let products = SetProducts::new(a)?;
    let mut scan_log = Vec::new();
    for c in candidates(a, reps, delta_grid)? {
        let threshold = criteria.eps.eval(c.bohr.delta(), c.bohr.spec().dim())?;
        let checks = products.evaluate(c.bohr.members(), threshold)?;
        let accepted = checks.all_pass();
        scan_log.push(scan_entry(&c, &checks, accepted));
        if accepted {
            let witness = BogoWitness { bohr: c.bohr, checks, scan_log: scan_log.clone() };
            return Ok(SearchReport { witness: Some(witness), scan_log });
        }
    }
    Ok(SearchReport { witness: None, scan_log })
}

#[derive(Debug, Clone, Serialize)]
pub struct QuasirandomReport {
    pub group: String,
    pub order: usize,
    /// Least dimension of a nontrivial irreducible representation.
    pub d: usize,
    pub degree_sum_of_squares: usize,
    pub set_size: usize,
    /// `|G| / d^{1/3}`
    pub gowers_threshold: f64,
    pub above_threshold: bool,
    pub aaa_inv_is_g: bool,
    pub aa_inv_density: f64,
    pub eps: f64,
    pub aa_inv_exceeds_one_minus_eps: bool,
}

pub fn quasirandom_check(a: &Subset, eps: f64, seed: u64) -> Result<QuasirandomReport> {
    let g = a.group();
    let degrees = regular_rep_degrees(g, seed)?;
    let d = min_nontrivial_dim(g, seed)?;
    let threshold = g.order() as f64 / (d as f64).cbrt();
    let aa_inv = a.difference_set();
    Ok(QuasirandomReport {
        group: g.label().to_string(),
        order: g.order(),
        d,
        degree_sum_of_squares: degrees.sum_of_squares(),
        set_size: a.len(),
        gowers_threshold: threshold,
        above_threshold: a.len() as f64 > threshold,
        aaa_inv_is_g: a.product(&aa_inv)?.is_whole(),
        aa_inv_density: aa_inv.density(),
        eps,
        aa_inv_exceeds_one_minus_eps: aa_inv.density() > 1.0 - eps,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TripleReport {
    pub d: usize,
    /// `d^{-1/3}`
    pub density_threshold: f64,
    pub densities: [f64; 3],
    pub all_dense: bool,
    pub abc_is_g: bool,
}

/// `G = ABC` whenever each density exceeds `d^{-1/3}`; a failure under
/// that hypothesis is an error.
pub fn triple_product_check(a: &Subset, b: &Subset, c: &Subset, d: usize) -> Result<TripleReport> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    let density_threshold = (d as f64).cbrt().recip();
    let densities = [a.density(), b.density(), c.density()];
    let report = TripleReport {
        d,
        density_threshold,
        densities,
        all_dense: densities.iter().all(|&x| x > density_threshold),
        abc_is_g: a.product(b)?.product(c)?.is_whole(),
    };
    if report.all_dense && !report.abc_is_g {
        return Err(Error::InvariantViolated(format!("dense triple with ABC ≠ G: {report:?}")));
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SubgroupWitness {
    pub source: String,
    pub dim: usize,
    pub delta: f64,
    pub delta_star: f64,
    pub exponent: usize,
    pub eps_star: f64,
    pub subgroup: Vec<usize>,
    pub index: usize,
    /// `ceil((c/δ*)^{n²})`
    pub index_bound: f64,
    pub index_ok: bool,
    pub is_normal: bool,
    pub equals_kernel: bool,
    pub contained_in_2a2ainv: bool,
    pub coset_in_aaainv: bool,
    pub coset_witness: Option<usize>,
    pub relative_error: f64,
    /// `ε(m)` at the index `m`.
    pub eps_index: f64,
    pub relative_error_ok: bool,
}

impl SubgroupWitness {
    pub fn all_pass(&self) -> bool {
        self.index_ok
            && self.is_normal
            && self.equals_kernel
            && self.contained_in_2a2ainv
            && self.coset_in_aaainv
            && self.relative_error_ok
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub witness: Option<SubgroupWitness>,
    pub scan_log: Vec<ScanEntry>,
}

/// Finds a normal subgroup `H` of bounded index with `H ⊆ (AA^{-1})^2`, a
/// coset of `H` inside `AAA^{-1}` and `μ(H ∖ AA^{-1}) < ε(m) μ(H)`.
///
/// Candidates are screened with `ε*(δ, n)` in place of `ε`, shrunk to
/// `δ* = min{δ, γ_r}` so that they collapse to the kernel, and re-verified.
pub fn boundedexp_pipeline(
    a: &Subset,
    criteria: &BogoCriteria,
    reps: &[Representation],
    delta_grid: &[f64],
    c: f64,
) -> Result<PipelineReport> {
    criteria.validate()?;
    check_density(a, criteria.alpha)?;
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter(format!("bound constant must be positive, got {c}")));
    }
    let g = a.group();
    let r = group_exponent(g);
    let products = SetProducts::new(a)?;
    let mut scan_log = Vec::new();
    for cand in candidates(a, reps, delta_grid)? {
        let (delta, n) = (cand.bohr.delta(), cand.bohr.spec().dim());
        let eps_star = epsilon_star(&criteria.eps, criteria.alpha, c, delta, n, Some(r))?;
        let checks = products.evaluate(cand.bohr.members(), eps_star)?;
        let mut entry = scan_entry(&cand, &checks, false);
        if !checks.all_pass() {
            scan_log.push(entry);
            continue;
        }
        let witness = collapse_candidate(&cand, &products, criteria, c, r, eps_star)?;
        entry.accepted = witness.all_pass();
        if !entry.accepted {
            entry.note = Some(format!("collapsed subgroup of index {} failed re-verification", witness.index));
            scan_log.push(entry);
            continue;
        }
        scan_log.push(entry);
        return Ok(PipelineReport { witness: Some(witness), scan_log });
    }
    Ok(PipelineReport { witness: None, scan_log })
}

fn collapse_candidate(
    cand: &Candidate,
    products: &SetProducts,
    criteria: &BogoCriteria,
    c: f64,
    r: usize,
    eps_star: f64,
) -> Result<SubgroupWitness> {
    let spec = cand.bohr.spec();
    let g = spec.group();
    let n = spec.dim();
    let delta = spec.delta();
    let (delta_star, equals_kernel, h) = if r == 1 {
        (delta, true, Subset::whole(g))
    } else {
        let delta_star = delta.min(gamma(r));
        let shrunk = bohr_set(&spec.with_delta(delta_star)?);
        let report = exponent_collapse(&shrunk)?;
        (delta_star, report.equals_kernel, shrunk.members().clone())
    };
    let index = h.subgroup_index()?;
    let index_bound = (c / delta_star).powi((n * n) as i32).ceil();
    let eps_index = criteria.eps.eval_index(index)?;
    let checks = products.evaluate(&h, eps_index)?;
    Ok(SubgroupWitness {
        source: cand.source.clone(),
        dim: n,
        delta,
        delta_star,
        exponent: r,
        eps_star,
        subgroup: h.members().to_vec(),
        index,
        index_bound,
        index_ok: index as f64 <= index_bound,
        is_normal: h.is_normal(),
        equals_kernel,
        contained_in_2a2ainv: checks.contained_in_2a2ainv,
        coset_in_aaainv: checks.translate_in_aaainv,
        coset_witness: checks.translate_witness,
        relative_error: checks.relative_error,
        eps_index,
        relative_error_ok: checks.relative_error_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_group, FiniteGroup, GroupDescriptor};
    use crate::reps::{catalog_irreps, characters_abelian};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z(n: usize) -> Arc<FiniteGroup> {
        build_group(&GroupDescriptor::Cyclic { n }).unwrap()
    }

    fn set(g: &Arc<FiniteGroup>, xs: &[usize]) -> Subset {
        Subset::new(g, xs.iter().copied()).unwrap()
    }

    fn constant(value: f64) -> EpsFn {
        EpsFn::Constant { value }
    }

    #[test]
    fn fourier_examples() {
        let g = z(8);
        let s = fourier(&set(&g, &[0, 4])).unwrap();
        for (k, c) in s.coefficients.iter().enumerate() {
            let want = if k % 2 == 0 { 0.25 } else { 0.0 };
            assert!((c - Complex64::new(want, 0.0)).norm() < 1e-15, "k={k}");
        }
        let whole = fourier(&Subset::whole(&g)).unwrap();
        assert!((whole.coefficients[0].re - 1.0).abs() < 1e-15);
        assert!(whole.coefficients[1..].iter().all(|c| c.norm() < 1e-14));
        let shifted = fourier(&set(&g, &[3, 7])).unwrap();
        for (a, b) in s.coefficients.iter().zip(&shifted.coefficients) {
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
        let s3 = build_group(&GroupDescriptor::Symmetric { n: 3 }).unwrap();
        assert_eq!(fourier(&Subset::whole(&s3)).unwrap_err(), Error::GroupNotAbelian);
    }

    #[test]
    fn ruzsa_z8_example() {
        let g = z(8);
        let w = ruzsa_bogolyubov_abelian(&set(&g, &[0, 4])).unwrap();
        assert_eq!(w.large_spectrum, vec![2, 4, 6]);
        assert_eq!(w.bohr.members().members(), &[0, 4]);
        let whole = ruzsa_bogolyubov_abelian(&Subset::whole(&g)).unwrap();
        assert!(whole.large_spectrum.is_empty() && whole.bohr.members().is_whole());
    }

    #[test]
    fn ruzsa_on_product_group() {
        let g = build_group(&GroupDescriptor::Product {
            factors: vec![GroupDescriptor::Cyclic { n: 4 }, GroupDescriptor::Cyclic { n: 6 }],
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = Subset::new(&g, g.elements().filter(|_| rng.random_bool(0.4))).unwrap();
            if !a.is_empty() {
                ruzsa_bogolyubov_abelian(&a).unwrap();
            }
        }
    }

    #[test]
    fn criteria_examples() {
        let g = z(8);
        let a = set(&g, &[0, 4]);
        let crit = BogoCriteria { alpha: 0.25, eps: constant(0.1) };
        let w = ruzsa_bogolyubov_abelian(&a).unwrap();
        let c = criteria_check(&a, &w.bohr, &crit).unwrap();
        assert!(c.checks.all_pass());
        assert_eq!(c.checks.relative_error, 0.0);

        let g12 = z(12);
        let a = set(&g12, &[0, 1, 2, 3]);
        let whole =
            bohr_set(&BohrSpec::new(GroupMap::trivial(&g12, 1), "trivial", 1.0, Target::Torus { n: 1 }).unwrap());
        let crit = BogoCriteria { alpha: 1.0 / 3.0, eps: constant(0.1) };
        let c = criteria_check(&a, &whole, &crit).unwrap();
        let aa = a.difference_set();
        assert_eq!(c.checks.contained_in_2a2ainv, aa.product(&aa).unwrap().is_whole());
        let low = BogoCriteria { alpha: 0.5, eps: constant(0.1) };
        assert!(matches!(criteria_check(&a, &whole, &low), Err(Error::DensityViolated { .. })));
    }

    #[test]
    fn upgrade_examples() {
        let g = z(16);
        let u = set(&g, &[15, 0, 1]);
        let v = u.product(&u).unwrap();
        let w = v.minus(&set(&g, &[2])).unwrap();
        let r = covering_upgrade(&u, &v, &w, &Subset::whole(&g), 1.0).unwrap();
        assert!(r.hypothesis_1 && r.conclusion_1);
        let r = covering_upgrade(&u, &v, &v, &set(&g, &[0, 5, 9]), 0.1).unwrap();
        assert!(r.hypothesis_1 && r.conclusion_1 && r.hypothesis_2 && r.conclusion_2);
        let not_sym = set(&g, &[0, 1]);
        assert!(matches!(covering_upgrade(&not_sym, &v, &w, &u, 0.1), Err(Error::NotNested(_))));
    }

    #[test]
    fn epsilon_star_examples() {
        let e = epsilon_star(&constant(1.0), 1.0, 0.5, 1.0, 1, None).unwrap();
        assert!((e - 1.0).abs() < 1e-15);
        let e = epsilon_star(&constant(0.1), 0.5, 6.0, 1.0, 1, None).unwrap();
        assert!((e - 0.1 / 12.0).abs() < 1e-15);
        let inv = EpsFn::Power { kappa: 1.0, a: 0.0, b: -1.0 };
        let e = epsilon_star(&inv, 1.0, 6.0, 2.0, 1, Some(2)).unwrap();
        assert!((e - 1.0 / 9.0).abs() < 1e-15);
        let huge = epsilon_star(&inv, 1.0, 6.0, 0.1, 3, Some(4)).unwrap();
        assert!(huge > 0.0 && huge < 1e-15);
        let table = EpsFn::Table { entries: vec![(0.5, 1, 0.2)] };
        assert_eq!(table.eval(0.5, 1).unwrap(), 0.2);
        assert!(matches!(table.eval(0.4, 1), Err(Error::EpsTableMiss { .. })));
    }

    #[test]
    fn eps_json_forms() {
        let e: EpsFn = serde_json::from_str(r#"{"kind":"power","kappa":0.5,"a":1,"b":-2}"#).unwrap();
        assert_eq!(e.eval(2.0, 2).unwrap(), 0.25);
        let t: EpsFn = serde_json::from_str(r#"{"kind":"table","entries":[[1.0,2,0.3]]}"#).unwrap();
        assert_eq!(t.eval(1.0, 2).unwrap(), 0.3);
        assert!(serde_json::from_str::<EpsFn>(r#"{"kind":"constant","value":1,"x":2}"#).is_err());
        assert!(constant(0.0).validate().is_err());
    }

    #[test]
    fn search_examples() {
        let g = z(8);
        let a = set(&g, &[0, 4]);
        let crit = BogoCriteria { alpha: 0.25, eps: constant(0.1) };
        let reps = characters_abelian(&g).unwrap();
        let r = bogolyubov_search(&a, &crit, &reps, &[1.0, 0.5]).unwrap();
        let w = r.witness.unwrap();
        assert_eq!(r.scan_log.len(), 1);
        assert_eq!(w.bohr.members().members(), &[0, 4]);

        let d4 = build_group(&GroupDescriptor::Dihedral { n: 4 }).unwrap();
        let rot = set(&d4, &[0, 1, 2, 3]);
        let reps = catalog_irreps(&d4).unwrap();
        let crit = BogoCriteria { alpha: 0.5, eps: constant(0.1) };
        let r = bogolyubov_search(&rot, &crit, &reps, &[1.5, 1.0, 0.5]).unwrap();
        let w = r.witness.unwrap();
        assert!(w.bohr.members().is_subset_of(&rot));
        assert!(!r.scan_log[0].accepted);

        let whole = Subset::whole(&d4);
        let r = bogolyubov_search(&whole, &crit, &reps, &[1.0]).unwrap();
        assert_eq!(r.scan_log.len(), 1);
        assert!(r.witness.unwrap().bohr.members().is_whole());
    }

    #[test]
    fn quasirandom_a5() {
        let a5 =
            build_group(&GroupDescriptor::PermGens { degree: 5, gens: vec![vec![2, 3, 1, 4, 5], vec![2, 3, 4, 5, 1]] })
                .unwrap();
        assert_eq!(a5.order(), 60);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut pick = |k: usize| {
            let mut xs: Vec<usize> = a5.elements().collect();
            for i in 0..k {
                let j = rng.random_range(i..xs.len());
                xs.swap(i, j);
            }
            Subset::new(&a5, xs[..k].iter().copied()).unwrap()
        };
        let a = pick(42);
        let r = quasirandom_check(&a, 0.5, 3).unwrap();
        assert_eq!((r.d, r.degree_sum_of_squares), (3, 60));
        assert!(r.above_threshold && r.aaa_inv_is_g);
        let t = triple_product_check(&pick(42), &pick(42), &pick(42), 3).unwrap();
        assert!(t.all_dense && t.abc_is_g);
    }

    #[test]
    fn pipeline_examples() {
        let v = build_group(&GroupDescriptor::Product { factors: vec![GroupDescriptor::Cyclic { n: 2 }; 4] }).unwrap();
        // index-2 subgroup: first coordinate zero
        let a = Subset::new(&v, v.elements().filter(|x| x % 2 == 0)).unwrap();
        let crit = BogoCriteria { alpha: 0.5, eps: constant(0.5) };
        let reps = characters_abelian(&v).unwrap();
        let r = boundedexp_pipeline(&a, &crit, &reps, &[2.0, 1.0], 6.0).unwrap();
        let w = r.witness.unwrap();
        assert!(w.all_pass());
        let h = Subset::new(&v, w.subgroup.iter().copied()).unwrap();
        assert!(h.is_subset_of(&a));

        let whole = Subset::whole(&v);
        let w = boundedexp_pipeline(&whole, &crit, &reps, &[1.0], 6.0).unwrap().witness.unwrap();
        assert_eq!(w.index, 1);
    }

    proptest! {
        #[test]
        fn ruzsa_holds_on_small_cyclic(n in 1usize..=24, bits in any::<u32>()) {
            let g = z(n);
            let a = Subset::new(&g, (0..n).filter(|x| bits >> x & 1 == 1)).unwrap();
            prop_assume!(!a.is_empty());
            let w = ruzsa_bogolyubov_abelian(&a).unwrap();
            prop_assert!(w.large_spectrum.len() as f64 <= w.spectrum_bound);
        }

        #[test]
        fn criterion_i_is_monotone(bits in any::<u16>(), sub in any::<u16>()) {
            let g = z(16);
            let a = Subset::new(&g, (0..16).filter(|x| bits >> x & 1 == 1)).unwrap();
            prop_assume!(a.len() >= 4);
            let crit = BogoCriteria { alpha: 0.25, eps: constant(1.0) };
            let products = SetProducts::new(&a).unwrap();
            let b = Subset::new(&g, (0..16).filter(|x| (bits | sub) >> x & 1 == 1)).unwrap();
            let b2 = Subset::new(&g, b.members().iter().copied().filter(|x| sub >> x & 1 == 1)).unwrap();
            let big = products.evaluate(&b, crit.eps.eval(1.0, 1).unwrap()).unwrap();
            let small = products.evaluate(&b2, 1.0).unwrap();
            if big.contained_in_2a2ainv {
                prop_assert!(small.contained_in_2a2ainv);
            }
        }
    }
}
