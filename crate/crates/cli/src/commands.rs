use std::sync::Arc;

use bohrlab_core::bogolyubov::{
    bogolyubov_search, boundedexp_pipeline, covering_upgrade, quasirandom_check, ruzsa_bogolyubov_abelian,
    triple_product_check, BogoCriteria, EpsFn,
};
use bohrlab_core::bohr::{
    bohr_set, exponent_collapse, genericity_bound_check, genericity_cover, u_to_t_abelian, u_to_t_torsion,
    verify_bohr_basic, BohrSpec, DEFAULT_BOUND_CONSTANT,
};
use bohrlab_core::demo::cyclic_compactification;
use bohrlab_core::group::{build_group, group_exponent, FiniteGroup, Subset};
use bohrlab_core::homs::{defect, discretize, kazhdan_correct, CorrectionConfig, GroupMap};
use bohrlab_core::linalg::{gamma, DEFAULT_COMMUTE_TOL, DEFAULT_UNITARY_TOL};
use bohrlab_core::nets::{su2_net_with, torus_net_with, unitary_net, EpsNet, Target, DEFAULT_SAMPLE_COUNT};
use bohrlab_core::probe::turing_probe;
use bohrlab_core::reps::{catalog_irreps, characters_abelian, Representation};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{require, Config, ReductionMode, RepSource};
use crate::{CliError, Command};

pub const DEFAULT_DELTAS: [f64; 4] = [1.5, 1.0, 0.5, 0.25];
pub const DEFAULT_PROBE_CAP: usize = 200;
pub const DEFAULT_DEMO_GRID: usize = 8;

/// A command's result, with an optional flat table for CSV export.
pub struct Outcome {
    pub result: Value,
    pub table: Option<Table>,
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    /// Columns are the union of row keys in first-seen order.
    fn from_rows<T: Serialize>(rows: &[T]) -> Result<Table, CliError> {
        let mut maps = Vec::with_capacity(rows.len());
        for row in rows {
            let Value::Object(map) = serde_json::to_value(row).map_err(CliError::io)? else {
                return Err(CliError::Io("table rows must be objects".into()));
            };
            maps.push(map);
        }
        let mut header: Vec<String> = Vec::new();
        for key in maps.iter().flat_map(|m| m.keys()) {
            if !header.contains(key) {
                header.push(key.clone());
            }
        }
        let rows =
            maps.iter().map(|m| header.iter().map(|k| cell(m.get(k).unwrap_or(&Value::Null))).collect()).collect();
        Ok(Table { header, rows })
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn to_value<T: Serialize>(x: &T) -> Result<Value, CliError> {
    serde_json::to_value(x).map_err(CliError::io)
}

fn plain(result: Value) -> Result<Outcome, CliError> {
    Ok(Outcome { result, table: None })
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

pub fn run(command: Command, cfg: &Config) -> Result<Outcome, CliError> {
    const HOM: [&str; 3] = ["group", "map", "rep"];
    const BOHR: [&str; 5] = ["group", "map", "rep", "delta", "target"];
    const SEARCH: [&str; 6] = ["group", "set", "alpha", "eps", "deltas", "reps"];
    let allowed: Vec<&str> = match command {
        Command::Defect => HOM.to_vec(),
        Command::Correct => [&HOM[..], &["max_iters", "hom_tol", "eps_k"]].concat(),
        Command::Discretize => [&HOM[..], &["target", "net_eps", "samples", "seed", "hom_tol"]].concat(),
        Command::Bohr | Command::Collapse => BOHR.to_vec(),
        Command::Cover => [&BOHR[..], &["net_eps", "samples", "seed"]].concat(),
        Command::BoundCheck => [&BOHR[..], &["c"]].concat(),
        Command::UToT => [&BOHR[..], &["mode"]].concat(),
        Command::Bogolyubov => SEARCH.to_vec(),
        Command::Boundedexp => [&SEARCH[..], &["c"]].concat(),
        Command::Upgrade => vec!["group", "u", "v", "w", "set", "alpha"],
        Command::Quasirandom => vec!["group", "set", "random_size", "triple_size", "eps", "seed"],
        Command::TuringProbe => vec!["target", "eps", "cap", "seed", "samples"],
        Command::CyclicDemo => vec!["primes", "eps", "grid"],
    };
    cfg.restrict(&allowed)?;
    match command {
        Command::Defect => cmd_defect(cfg),
        Command::Correct => cmd_correct(cfg),
        Command::Discretize => cmd_discretize(cfg),
        Command::Bohr => cmd_bohr(cfg),
        Command::Cover => cmd_cover(cfg),
        Command::BoundCheck => cmd_bound_check(cfg),
        Command::UToT => cmd_u_to_t(cfg),
        Command::Collapse => cmd_collapse(cfg),
        Command::Bogolyubov => cmd_bogolyubov(cfg),
        Command::Upgrade => cmd_upgrade(cfg),
        Command::Quasirandom => cmd_quasirandom(cfg),
        Command::Boundedexp => cmd_boundedexp(cfg),
        Command::TuringProbe => cmd_turing_probe(cfg),
        Command::CyclicDemo => cmd_cyclic_demo(cfg),
    }
}

fn group(cfg: &Config) -> Result<Arc<FiniteGroup>, CliError> {
    Ok(build_group(&require(&cfg.group, "group")?)?)
}

fn reps_for(g: &Arc<FiniteGroup>, source: RepSource) -> Result<Vec<Representation>, CliError> {
    Ok(match source {
        RepSource::Catalog => catalog_irreps(g)?,
        RepSource::Characters => characters_abelian(g)?,
    })
}

/// The map given by `--map`, or the catalog representation named by `--rep`.
fn hom(cfg: &Config, g: &Arc<FiniteGroup>) -> Result<(GroupMap, String), CliError> {
    match (&cfg.map, &cfg.rep) {
        (Some(data), None) => Ok((GroupMap::from_data(g, data.clone(), DEFAULT_UNITARY_TOL)?, "map".into())),
        (None, Some(name)) => {
            let reps = catalog_irreps(g)?;
            let rep = reps.iter().find(|r| r.name() == name).ok_or_else(|| {
                let names: Vec<&str> = reps.iter().map(|r| r.name()).collect();
                schema(format!("unknown rep {name:?}; {} has {}", g.label(), names.join(", ")))
            })?;
            Ok((rep.map().clone(), name.clone()))
        }
        (Some(_), Some(_)) => Err(schema("give either --map or --rep, not both")),
        (None, None) => Err(schema("missing required option --map or --rep")),
    }
}

fn subset(g: &Arc<FiniteGroup>, xs: &[usize], name: &str) -> Result<Subset, CliError> {
    Subset::new(g, xs.iter().copied()).map_err(|e| schema(format!("--{name}: {e}")))
}

fn seed(cfg: &Config) -> Result<u64, CliError> {
    cfg.seed.ok_or_else(|| schema("--seed is mandatory for this command"))
}

fn default_target(map: &GroupMap) -> Target {
    if map.images().iter().all(|u| u.is_diagonal(0.0)) {
        Target::Torus { n: map.dim() }
    } else {
        Target::Unitary { n: map.dim() }
    }
}

fn build_net(target: Target, eps: f64, seed: u64, samples: usize) -> Result<EpsNet, CliError> {
    Ok(match target {
        Target::Torus { n } => torus_net_with(n, eps, samples, seed)?,
        Target::Su2 => su2_net_with(eps, seed, samples)?,
        Target::Unitary { n } => unitary_net(n, eps, seed, samples)?,
    })
}

fn net_summary(net: &EpsNet) -> Value {
    json!({
        "target": net.target,
        "radius": net.radius,
        "certified_radius": net.certified_radius,
        "size": net.len(),
        "sample_count": net.sample_count,
        "seed": net.seed,
    })
}

fn eps_number(cfg: &Config) -> Result<Option<f64>, CliError> {
    match &cfg.eps {
        None => Ok(None),
        Some(v) => v.as_f64().map(Some).ok_or_else(|| schema("--eps must be a number for this command")),
    }
}

fn eps_fn(cfg: &Config) -> Result<EpsFn, CliError> {
    match require(&cfg.eps, "eps")? {
        Value::Number(n) => Ok(EpsFn::Constant { value: n.as_f64().unwrap_or(f64::NAN) }),
        v => serde_json::from_value(v).map_err(|e| schema(format!("--eps: {e}"))),
    }
}

fn cmd_defect(cfg: &Config) -> Result<Outcome, CliError> {
    let g = group(cfg)?;
    let (f, _) = hom(cfg, &g)?;
    plain(json!({ "group": g.label(), "dim": f.dim(), "defect": to_value(&defect(&f))? }))
}

fn correction_config(cfg: &Config) -> CorrectionConfig {
    let d = CorrectionConfig::default();
    CorrectionConfig {
        max_iters: cfg.max_iters.unwrap_or(d.max_iters),
        hom_tol: cfg.hom_tol.unwrap_or(d.hom_tol),
        eps_k: cfg.eps_k.unwrap_or(d.eps_k),
    }
}

fn cmd_correct(cfg: &Config) -> Result<Outcome, CliError> {
    let g = group(cfg)?;
    let (f, _) = hom(cfg, &g)?;
    plain(to_value(&kazhdan_correct(&f, &correction_config(cfg))?)?)
}

fn cmd_discretize(cfg: &Config) -> Result<Outcome, CliError> {
    let g = group(cfg)?;
    let (tau, _) = hom(cfg, &g)?;
    let target = cfg.target.unwrap_or_else(|| default_target(&tau));
    let net_eps = require(&cfg.net_eps, "net_eps")?;
    let net = build_net(target, net_eps, seed(cfg)?, cfg.samples.unwrap_or(DEFAULT_SAMPLE_COUNT))?;
    let d = discretize(&tau, &net, correction_config(cfg).hom_tol)?;
    plain(json!({ "net": net_summary(&net), "discretization": to_value(&d)? }))
}

fn bohr_spec(cfg: &Config, default_delta: Option<fn(&FiniteGroup) -> f64>) -> Result<BohrSpec, CliError> {
    let g = group(cfg)?;
    let (f, name) = hom(cfg, &g)?;
    let delta = match (cfg.delta, default_delta) {
        (Some(d), _) => d,
        (None, Some(default)) => default(&g),
        (None, None) => require(&cfg.delta, "delta")?,
    };
    let target = cfg.target.unwrap_or(Target::Unitary { n: f.dim() });
    Ok(BohrSpec::new(f, name, delta, target)?)
}

fn cmd_bohr(cfg: &Config) -> Result<Outcome, CliError> {
    let b = bohr_set(&bohr_spec(cfg, None)?);
    plain(json!({
        "bohr": to_value(&b)?,
        "distances": b.distances(),
        "properties": to_value(&verify_bohr_basic(&b))?,
    }))
}

fn cmd_cover(cfg: &Config) -> Result<Outcome, CliError> {
    let b = bohr_set(&bohr_spec(cfg, None)?);
    let net_eps = cfg.net_eps.unwrap_or(b.delta() / 2.0);
    let target = match b.spec().target() {
        Target::Torus { n } => Target::Torus { n },
        _ => Target::Unitary { n: b.spec().dim() },
    };
    let net = build_net(target, net_eps, seed(cfg)?, cfg.samples.unwrap_or(DEFAULT_SAMPLE_COUNT))?;
    let cover = genericity_cover(&b, &net)?;
    plain(json!({ "bohr": to_value(&b)?, "net": net_summary(&net), "cover": to_value(&cover)? }))
}

fn cmd_bound_check(cfg: &Config) -> Result<Outcome, CliError> {
    let b = bohr_set(&bohr_spec(cfg, None)?);
    let report = genericity_bound_check(&b, cfg.c.unwrap_or(DEFAULT_BOUND_CONSTANT))?;
    plain(json!({ "bohr": to_value(&b)?, "bound": to_value(&report)? }))
}

fn cmd_u_to_t(cfg: &Config) -> Result<Outcome, CliError> {
    let b = bohr_set(&bohr_spec(cfg, None)?);
    let mode = match cfg.mode.unwrap_or(ReductionMode::Auto) {
        ReductionMode::Auto if b.spec().hom().has_abelian_image(DEFAULT_COMMUTE_TOL) => ReductionMode::Abelian,
        ReductionMode::Auto => ReductionMode::Torsion,
        m => m,
    };
    let reduction = match mode {
        ReductionMode::Abelian => to_value(&u_to_t_abelian(&b)?)?,
        _ => to_value(&u_to_t_torsion(&b)?)?,
    };
    plain(json!({ "mode": mode, "bohr": to_value(&b)?, "reduction": reduction }))
}

fn cmd_collapse(cfg: &Config) -> Result<Outcome, CliError> {
    let b = bohr_set(&bohr_spec(cfg, Some(|g| gamma(group_exponent(g))))?);
    plain(json!({ "bohr": to_value(&b)?, "collapse": to_value(&exponent_collapse(&b)?)? }))
}

struct SearchInputs {
    a: Subset,
    criteria: BogoCriteria,
    reps: Vec<Representation>,
    deltas: Vec<f64>,
}

fn search_inputs(cfg: &Config) -> Result<SearchInputs, CliError> {
    let g = group(cfg)?;
    let a = subset(&g, &require(&cfg.set, "set")?, "set")?;
    let criteria = BogoCriteria { alpha: cfg.alpha.unwrap_or(a.density()), eps: eps_fn(cfg)? };
    criteria.validate()?;
    let reps = reps_for(&g, cfg.reps.unwrap_or(RepSource::Catalog))?;
    let deltas = cfg.deltas.clone().unwrap_or(DEFAULT_DELTAS.to_vec());
    Ok(SearchInputs { a, criteria, reps, deltas })
}

fn cmd_bogolyubov(cfg: &Config) -> Result<Outcome, CliError> {
    let s = search_inputs(cfg)?;
    let ruzsa = if s.a.group().is_abelian() && !s.a.is_empty() { Some(ruzsa_bogolyubov_abelian(&s.a)?) } else { None };
    let search = bogolyubov_search(&s.a, &s.criteria, &s.reps, &s.deltas)?;
    let table = Some(Table::from_rows(&search.scan_log)?);
    Ok(Outcome { result: json!({ "ruzsa": to_value(&ruzsa)?, "search": to_value(&search)? }), table })
}

fn cmd_boundedexp(cfg: &Config) -> Result<Outcome, CliError> {
    let s = search_inputs(cfg)?;
    let c = cfg.c.unwrap_or(DEFAULT_BOUND_CONSTANT);
    let report = boundedexp_pipeline(&s.a, &s.criteria, &s.reps, &s.deltas, c)?;
    let table = Some(Table::from_rows(&report.scan_log)?);
    Ok(Outcome { result: to_value(&report)?, table })
}

fn cmd_upgrade(cfg: &Config) -> Result<Outcome, CliError> {
    let g = group(cfg)?;
    let u = subset(&g, &require(&cfg.u, "u")?, "u")?;
    let v = match &cfg.v {
        Some(xs) => subset(&g, xs, "v")?,
        None => u.product(&u)?,
    };
    let w = match &cfg.w {
        Some(xs) => subset(&g, xs, "w")?,
        None => v.clone(),
    };
    let a = subset(&g, &require(&cfg.set, "set")?, "set")?;
    let alpha = cfg.alpha.unwrap_or(a.density());
    plain(to_value(&covering_upgrade(&u, &v, &w, &a, alpha)?)?)
}

fn random_subset(g: &Arc<FiniteGroup>, size: usize, rng: &mut ChaCha8Rng) -> Result<Subset, CliError> {
    if size > g.order() {
        return Err(schema(format!("set size {size} exceeds group order {}", g.order())));
    }
    let mut xs = sample(rng, g.order(), size).into_vec();
    xs.sort_unstable();
    subset(g, &xs, "random-size")
}

fn cmd_quasirandom(cfg: &Config) -> Result<Outcome, CliError> {
    let g = group(cfg)?;
    let seed = seed(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = match (&cfg.set, cfg.random_size) {
        (Some(xs), None) => subset(&g, xs, "set")?,
        (None, Some(k)) => random_subset(&g, k, &mut rng)?,
        _ => return Err(schema("give exactly one of --set and --random-size")),
    };
    let eps = eps_number(cfg)?.unwrap_or(0.5);
    let qr = quasirandom_check(&a, eps, seed)?;
    let triple = match cfg.triple_size {
        Some(k) => {
            let sets =
                [random_subset(&g, k, &mut rng)?, random_subset(&g, k, &mut rng)?, random_subset(&g, k, &mut rng)?];
            let report = triple_product_check(&sets[0], &sets[1], &sets[2], qr.d)?;
            Some(json!({ "sets": sets.iter().map(|s| s.members()).collect::<Vec<_>>(), "report": to_value(&report)? }))
        }
        None => None,
    };
    plain(json!({ "set": a.members(), "quasirandom": to_value(&qr)?, "triple": triple }))
}

fn cmd_turing_probe(cfg: &Config) -> Result<Outcome, CliError> {
    let target = cfg.target.unwrap_or(Target::Su2);
    let eps = eps_number(cfg)?.ok_or_else(|| schema("missing required option --eps"))?;
    let cap = cfg.cap.unwrap_or(DEFAULT_PROBE_CAP);
    let report = turing_probe(target, eps, cap, seed(cfg)?, cfg.samples.unwrap_or(DEFAULT_SAMPLE_COUNT))?;
    let table = Some(Table::from_rows(&report.subgroups)?);
    Ok(Outcome { result: to_value(&report)?, table })
}

fn cmd_cyclic_demo(cfg: &Config) -> Result<Outcome, CliError> {
    let primes = require(&cfg.primes, "primes")?;
    let eps = eps_number(cfg)?.ok_or_else(|| schema("missing required option --eps"))?;
    let report = cyclic_compactification(&primes, eps, cfg.grid.unwrap_or(DEFAULT_DEMO_GRID))?;
    #[derive(Serialize)]
    struct Row {
        p: usize,
        z_index: usize,
        z_angle: f64,
        size: usize,
        fraction: f64,
        deviation: f64,
    }
    let rows: Vec<Row> = report
        .rows
        .iter()
        .map(|r| Row {
            p: r.p,
            z_index: r.z_index,
            z_angle: r.z_angle,
            size: r.size,
            fraction: r.fraction,
            deviation: r.deviation,
        })
        .collect();
    Ok(Outcome { result: to_value(&report)?, table: Some(Table::from_rows(&rows)?) })
}
