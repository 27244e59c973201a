//! Batch front-end: reads a pricing job from a JSON config, runs the
//! requested products and diagnostics, and writes machine-readable results
//! (results.json), plot-ready curves (curves.csv) and run metadata
//! (run_meta.json). Outputs are deterministic for a fixed config.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::EngineError;
use crate::models::{Family, LevyModel};
use crate::oracle::{mc_price, BiasNote, McConfig};
use crate::pricing::{self, EdsSchedule, PriceResult, PricingRequest, Product};
use crate::wienerhopf::{WhConfig, WhEngine};
use crate::{analysis, inversion::ContourConfig, inversion::Refinement};

/// Environment variable naming a directory the engine may use to persist
/// reusable tables between runs; the only environment input the binary
/// reads. Created if absent, currently reserved.
pub const CACHE_DIR_ENV: &str = "LEVYWH_CACHE_DIR";

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub enum CliError {
    /// The file is not valid JSON.
    Parse(String),
    /// The JSON does not match the config schema; message names the path.
    Schema(String),
    /// Schema-valid but inconsistent with the model or product domain.
    Semantic(String),
    /// Filesystem failure.
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Schema(m) => write!(f, "schema error: {m}"),
            CliError::Semantic(m) => write!(f, "semantic error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

type CResult<T> = std::result::Result<T, CliError>;

fn schema(msg: String) -> CliError {
    CliError::Schema(msg)
}

// ---------------------------------------------------------------------------
// JSON walking with explicit field paths
// ---------------------------------------------------------------------------

fn as_obj<'a>(v: &'a Value, path: &str) -> CResult<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| schema(format!("`{path}` must be an object")))
}

fn field<'a>(m: &'a Map<String, Value>, key: &str, path: &str) -> CResult<&'a Value> {
    m.get(key).ok_or_else(|| schema(format!("missing field `{path}.{key}`")))
}

fn f64_of(v: &Value, path: &str) -> CResult<f64> {
    v.as_f64().ok_or_else(|| schema(format!("`{path}` must be a number")))
}

fn f64_field(m: &Map<String, Value>, key: &str, path: &str) -> CResult<f64> {
    f64_of(field(m, key, path)?, &format!("{path}.{key}"))
}

fn opt_f64_field(m: &Map<String, Value>, key: &str, path: &str) -> CResult<Option<f64>> {
    match m.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => f64_of(v, &format!("{path}.{key}")).map(Some),
    }
}

fn vec_f64_field(m: &Map<String, Value>, key: &str, path: &str) -> CResult<Option<Vec<f64>>> {
    match m.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Array(a)) => a
            .iter()
            .enumerate()
            .map(|(i, v)| f64_of(v, &format!("{path}.{key}[{i}]")))
            .collect::<CResult<Vec<f64>>>()
            .map(Some),
        Some(_) => Err(schema(format!("`{path}.{key}` must be an array of numbers"))),
    }
}

fn str_field<'a>(m: &'a Map<String, Value>, key: &str, path: &str) -> CResult<&'a str> {
    field(m, key, path)?
        .as_str()
        .ok_or_else(|| schema(format!("`{path}.{key}` must be a string")))
}

fn reject_unknown(m: &Map<String, Value>, allowed: &[&str], path: &str) -> CResult<()> {
    for key in m.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(schema(format!("unknown field `{path}.{key}`")));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Parsed job
// ---------------------------------------------------------------------------

/// One product-grid point, flattened from the product specs in config order.
#[derive(Clone, Debug)]
pub struct GridPoint {
    pub product: String,
    pub grid_param: String,
    pub grid_value: f64,
    pub t: f64,
    pub payoff: Product,
    pub r_damp: Option<f64>,
}

/// A fully parsed and schema-checked pricing job.
#[derive(Clone, Debug)]
pub struct JobConfig {
    pub model: LevyModel,
    pub s0: f64,
    pub rate: f64,
    pub points: Vec<GridPoint>,
    pub contour: Option<ContourConfig>,
    pub wh_identity: bool,
    pub oracle_mc: Option<McConfig>,
    pub output_dir: Option<PathBuf>,
}

fn parse_family(m: &Map<String, Value>, path: &str) -> CResult<(Family, f64)> {
    let name = str_field(m, "family", path)?;
    let params = as_obj(field(m, "params", path)?, &format!("{path}.params"))?;
    let ppath = format!("{path}.params");
    let p = |key: &str| f64_field(params, key, &ppath);
    let (family, diffusion, allowed): (Family, f64, &[&str]) = match name {
        "brownian" => (Family::Brownian, p("c")?, &["c"]),
        "gh" => (
            Family::Gh { lambda: p("lambda")?, alpha: p("alpha")?, beta: p("beta")?, delta: p("delta")? },
            opt_f64_field(params, "diffusion", &ppath)?.unwrap_or(0.0),
            &["lambda", "alpha", "beta", "delta", "diffusion"],
        ),
        "nig" => (
            Family::Nig { alpha: p("alpha")?, beta: p("beta")?, delta: p("delta")? },
            opt_f64_field(params, "diffusion", &ppath)?.unwrap_or(0.0),
            &["alpha", "beta", "delta", "diffusion"],
        ),
        "vg" => (
            Family::Vg { c: p("c")?, g: p("g")?, m: p("m")? },
            opt_f64_field(params, "diffusion", &ppath)?.unwrap_or(0.0),
            &["c", "g", "m", "diffusion"],
        ),
        "cgmy" => (
            Family::Cgmy { c: p("c")?, g: p("g")?, m: p("m")?, y: p("y")? },
            opt_f64_field(params, "diffusion", &ppath)?.unwrap_or(0.0),
            &["c", "g", "m", "y", "diffusion"],
        ),
        "meixner" => (
            Family::Meixner { alpha: p("alpha")?, beta: p("beta")?, delta: p("delta")? },
            opt_f64_field(params, "diffusion", &ppath)?.unwrap_or(0.0),
            &["alpha", "beta", "delta", "diffusion"],
        ),
        other => {
            return Err(schema(format!(
                "`{path}.family`: unknown family \"{other}\" (expected brownian, gh, nig, vg, cgmy or meixner)"
            )))
        }
    };
    reject_unknown(params, allowed, &ppath)?;
    Ok((family, diffusion))
}

fn parse_model(v: &Value) -> CResult<LevyModel> {
    let m = as_obj(v, "model")?;
    reject_unknown(m, &["family", "params", "drift"], "model")?;
    let (family, diffusion) = parse_family(m, "model")?;
    let drift = field(m, "drift", "model")?;
    let build = |b: f64| {
        LevyModel::new(family.clone(), b, diffusion)
            .map_err(|e| CliError::Semantic(format!("model.params: {e}")))
    };
    match drift {
        Value::String(s) if s == "auto" => build(0.0)?
            .martingale_adjust()
            .map_err(|e| CliError::Semantic(format!("model.drift: {e}"))),
        Value::Number(n) => build(n.as_f64().unwrap()),
        _ => Err(schema("`model.drift` must be \"auto\" or a number".into())),
    }
}

/// A grid is exactly one plural field; its scalar siblings fix the rest.
fn grid_of(
    m: &Map<String, Value>,
    path: &str,
    plural: &str,
    singular: &str,
) -> CResult<Option<Vec<f64>>> {
    match (vec_f64_field(m, plural, path)?, opt_f64_field(m, singular, path)?) {
        (Some(_), Some(_)) => {
            Err(schema(format!("`{path}`: give `{singular}` or `{plural}`, not both")))
        }
        (Some(g), None) if g.is_empty() => {
            Err(schema(format!("`{path}.{plural}` must be nonempty")))
        }
        (Some(g), None) => Ok(Some(g)),
        (None, Some(x)) => Ok(Some(vec![x])),
        (None, None) => Ok(None),
    }
}

fn flatten_product(v: &Value, idx: usize, points: &mut Vec<GridPoint>) -> CResult<()> {
    let path = format!("products[{idx}]");
    let m = as_obj(v, &path)?;
    let kind = str_field(m, "type", &path)?.to_string();
    let r_damp = opt_f64_field(m, "r_damp", &path)?;

    if kind == "eds" {
        reject_unknown(m, &["type", "barrier", "barriers", "recovery", "premium_dates"], &path)?;
        let barriers = grid_of(m, &path, "barriers", "barrier")?
            .ok_or_else(|| schema(format!("missing field `{path}.barrier`")))?;
        let recovery = f64_field(m, "recovery", &path)?;
        let dates = vec_f64_field(m, "premium_dates", &path)?
            .ok_or_else(|| schema(format!("missing field `{path}.premium_dates`")))?;
        let t = dates.last().copied().unwrap_or(0.0);
        for b in barriers {
            points.push(GridPoint {
                product: kind.clone(),
                grid_param: "barrier".into(),
                grid_value: b,
                t,
                payoff: Product::Eds {
                    schedule: EdsSchedule {
                        premium_dates: dates.clone(),
                        barrier_b: b,
                        recovery_c: recovery,
                        rate_r: 0.0, // filled from market.r later
                    },
                },
                r_damp: None,
            });
        }
        return Ok(());
    }

    let (level_singular, level_plural) = match kind.as_str() {
        "lookback_call" | "lookback_put" => ("strike", "strikes"),
        "one_touch_up" | "digital_down" => ("barrier", "barriers"),
        other => {
            return Err(schema(format!(
                "`{path}.type`: unknown product \"{other}\" (expected lookback_call, lookback_put, one_touch_up, digital_down or eds)"
            )))
        }
    };
    reject_unknown(
        m,
        &["type", level_singular, level_plural, "maturity", "maturities", "r_damp"],
        &path,
    )?;
    let levels = grid_of(m, &path, level_plural, level_singular)?
        .ok_or_else(|| schema(format!("missing field `{path}.{level_singular}`")))?;
    let maturities = grid_of(m, &path, "maturities", "maturity")?
        .ok_or_else(|| schema(format!("missing field `{path}.maturity`")))?;
    if levels.len() > 1 && maturities.len() > 1 {
        return Err(schema(format!(
            "`{path}`: only one of {level_plural} and maturities may be a grid"
        )));
    }
    let (grid_param, _) =
        if maturities.len() > 1 { ("maturity", 0) } else { (level_singular, 0) };
    for &t in &maturities {
        for &x in &levels {
            let payoff = match kind.as_str() {
                "lookback_call" => Product::LookbackCall { k: x },
                "lookback_put" => Product::LookbackPut { k: x },
                "one_touch_up" => Product::OneTouchUp { b: x },
                _ => Product::DigitalDown { b: x },
            };
            points.push(GridPoint {
                product: kind.clone(),
                grid_param: grid_param.into(),
                grid_value: if grid_param == "maturity" { t } else { x },
                t,
                payoff,
                r_damp,
            });
        }
    }
    Ok(())
}

fn parse_numerics(v: &Value) -> CResult<Option<ContourConfig>> {
    let m = as_obj(v, "numerics")?;
    reject_unknown(m, &["contour"], "numerics")?;
    let Some(cv) = m.get("contour") else { return Ok(None) };
    let c = as_obj(cv, "numerics.contour")?;
    reject_unknown(c, &["y", "a", "n_nodes", "tol"], "numerics.contour")?;
    let n_nodes = f64_field(c, "n_nodes", "numerics.contour")? as usize;
    let cfg = ContourConfig {
        y: f64_field(c, "y", "numerics.contour")?,
        a: f64_field(c, "a", "numerics.contour")?,
        n_nodes,
        tol: f64_field(c, "tol", "numerics.contour")?,
        refinement: Refinement::Adaptive,
    };
    cfg.validate().map_err(|e| CliError::Semantic(format!("numerics.contour: {e}")))?;
    Ok(Some(cfg))
}

fn parse_validation(v: &Value) -> CResult<(bool, Option<McConfig>)> {
    let m = as_obj(v, "validation")?;
    reject_unknown(m, &["wh_identity", "oracle_mc"], "validation")?;
    let wh = match m.get("wh_identity") {
        None | Some(Value::Null) => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => return Err(schema("`validation.wh_identity` must be a boolean".into())),
    };
    let mc = match m.get("oracle_mc") {
        None | Some(Value::Null) => None,
        Some(ov) => {
            let o = as_obj(ov, "validation.oracle_mc")?;
            let p = "validation.oracle_mc";
            reject_unknown(o, &["n_paths", "n_steps", "seed", "antithetic"], p)?;
            let cfg = McConfig {
                n_paths: f64_field(o, "n_paths", p)? as usize,
                n_steps: f64_field(o, "n_steps", p)? as usize,
                seed: f64_field(o, "seed", p)? as u64,
                antithetic: match o.get("antithetic") {
                    None => true,
                    Some(Value::Bool(b)) => *b,
                    Some(_) => {
                        return Err(schema(format!("`{p}.antithetic` must be a boolean")))
                    }
                },
            };
            cfg.validate().map_err(|e| CliError::Semantic(format!("{p}: {e}")))?;
            Some(cfg)
        }
    };
    Ok((wh, mc))
}

/// Parse and schema-check a job config from JSON text.
pub fn parse_config(text: &str) -> CResult<JobConfig> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let m = as_obj(&root, "$")?;
    reject_unknown(
        m,
        &["model", "market", "products", "numerics", "validation", "output_dir"],
        "$",
    )?;

    let model = parse_model(field(m, "model", "$")?)?;

    let market = as_obj(field(m, "market", "$")?, "market")?;
    reject_unknown(market, &["s0", "r"], "market")?;
    let s0 = f64_field(market, "s0", "market")?;
    let rate = opt_f64_field(market, "r", "market")?.unwrap_or(0.0);

    let mut points = Vec::new();
    if let Some(pv) = m.get("products") {
        let arr = pv
            .as_array()
            .ok_or_else(|| schema("`products` must be an array".into()))?;
        for (i, item) in arr.iter().enumerate() {
            flatten_product(item, i, &mut points)?;
        }
    }
    for p in &mut points {
        if let Product::Eds { schedule } = &mut p.payoff {
            schedule.rate_r = rate;
        }
    }

    let contour = match m.get("numerics") {
        None | Some(Value::Null) => None,
        Some(v) => parse_numerics(v)?,
    };
    let (wh_identity, oracle_mc) = match m.get("validation") {
        None | Some(Value::Null) => (false, None),
        Some(v) => parse_validation(v)?,
    };
    let output_dir = match m.get("output_dir") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(_) => return Err(schema("`output_dir` must be a string".into())),
    };

    Ok(JobConfig { model, s0, rate, points, contour, wh_identity, oracle_mc, output_dir })
}

// ---------------------------------------------------------------------------
// Semantic checks
// ---------------------------------------------------------------------------

/// Checks beyond the schema: model strip admits the requested dampening,
/// touch/digital formulas apply to the model's path type, grids are in the
/// parameter domain, and there is something to do.
pub fn check_semantics(cfg: &JobConfig) -> CResult<()> {
    let sem = |m: String| Err(CliError::Semantic(m));
    if cfg.points.is_empty() && !cfg.wh_identity && cfg.oracle_mc.is_none() {
        return sem("config needs at least one product or validation task".into());
    }
    if !(cfg.s0 > 0.0) {
        return sem("market.s0 must be positive".into());
    }
    if cfg.rate < 0.0 {
        return sem("market.r must be nonnegative".into());
    }
    let strip = cfg
        .model
        .moment_strip()
        .map_err(|e| CliError::Semantic(format!("model: {e}")))?;
    let flags = cfg.model.path_properties();
    let dual_flags = cfg.model.dual().path_properties();
    for p in &cfg.points {
        let at = |m: String| format!("{} at {}={}: {m}", p.product, p.grid_param, p.grid_value);
        if !(p.grid_value > 0.0) {
            return sem(at("grid value must be positive".into()));
        }
        if !(p.t > 0.0) {
            return sem(at("maturity must be positive".into()));
        }
        match &p.payoff {
            Product::LookbackCall { .. } => {
                if strip.m_safe <= 1.0 {
                    return sem(at(format!(
                        "needs an exponential moment above 1, model admits {:.4}",
                        strip.m_safe
                    )));
                }
                if let Some(r) = p.r_damp {
                    if !(r > 1.0 && r < strip.m_safe) {
                        return sem(at(format!(
                            "dampening {r} outside ({}, {})",
                            1.0, strip.m_safe
                        )));
                    }
                }
            }
            Product::LookbackPut { .. } => {
                if let Some(r) = p.r_damp {
                    if !(r < 0.0 && r > strip.u_min) {
                        return sem(at(format!(
                            "dampening {r} outside ({}, 0)",
                            strip.u_min
                        )));
                    }
                }
            }
            Product::OneTouchUp { .. } => {
                if !(flags.regular_upwards && flags.atomless_sup) {
                    return sem(at(
                        "the touch formula needs a process regular upwards with atomless supremum law"
                            .into(),
                    ));
                }
                check_barrier_damp(p, strip.m_safe)?;
            }
            Product::DigitalDown { .. } | Product::Eds { .. } => {
                if !(dual_flags.regular_upwards && dual_flags.atomless_sup) {
                    return sem(at(
                        "the down-crossing formula needs a process regular downwards with atomless infimum law"
                            .into(),
                    ));
                }
                if let Product::Eds { schedule } = &p.payoff {
                    schedule
                        .validate()
                        .map_err(|e| CliError::Semantic(at(e.to_string())))?;
                }
                check_barrier_damp(p, (-strip.u_min).max(0.0))?;
            }
        }
    }
    Ok(())
}

fn check_barrier_damp(p: &GridPoint, m_room: f64) -> CResult<()> {
    if let Some(r) = p.r_damp {
        if !(r > 0.0 && r < m_room) {
            return Err(CliError::Semantic(format!(
                "{} at {}={}: dampening {r} outside (0, {m_room})",
                p.product, p.grid_param, p.grid_value
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Running a job
// ---------------------------------------------------------------------------

/// Max |phi+ phi- - q/(q - kappa(iz))| over z in [-20, 20], 41 points, at
/// q one above the minimal admissible abscissa.
pub fn wh_identity_residual(model: &LevyModel) -> crate::error::Result<f64> {
    let strip = model.moment_strip()?;
    let q = analysis::min_abscissa(model, strip.m_safe)? + 1.0;
    let eng = WhEngine::new(
        model,
        &WhConfig { re_beta_min: 0.0, im_beta_max: 25.0, q_re_min: q, refine: 1.0 },
    )?;
    let grid: Vec<f64> = (0..41).map(|i| -20.0 + i as f64).collect();
    eng.wh_identity_residual(q, &grid)
}

struct PointOutcome {
    point: GridPoint,
    result: std::result::Result<PriceResult, EngineError>,
    mc: Option<std::result::Result<crate::oracle::McEstimate, EngineError>>,
}

fn price_point(cfg: &JobConfig, p: &GridPoint) -> PointOutcome {
    let req = PricingRequest {
        model: cfg.model.clone(),
        s0: cfg.s0,
        t: p.t,
        product: p.payoff.clone(),
        r_damp: p.r_damp,
        contour: cfg.contour.clone(),
        discount_r: cfg.rate,
    };
    let result = pricing::price(&req);
    let mc = match (&cfg.oracle_mc, &p.payoff) {
        (Some(mc_cfg), Product::Eds { .. }) => {
            let _ = mc_cfg;
            None
        }
        (Some(mc_cfg), payoff) => {
            Some(mc_price(&cfg.model, cfg.s0, p.t, payoff, cfg.rate, mc_cfg))
        }
        (None, _) => None,
    };
    PointOutcome { point: p.clone(), result, mc }
}

/// 17 significant digits; round-trips any f64 exactly.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn diagnostics_json(r: &PriceResult) -> Value {
    let d = &r.diagnostics;
    json!({
        "r": d.r,
        "y": d.y,
        "a_contour": d.a_contour,
        "outer_u_max": d.outer_u_max,
        "outer_nodes": d.outer_nodes,
        "inner_rows": d.inner_rows,
        "cache_hits": d.cache_hits,
        "clamped": d.clamped,
        "boundary": d.boundary,
        "isotonic_clipped": d.isotonic_clipped,
    })
}

fn bias_str(b: &BiasNote) -> &'static str {
    match b {
        BiasNote::SupUnderestimated => "sup_underestimated",
        BiasNote::InfOverestimated => "inf_overestimated",
        BiasNote::None => "none",
    }
}

/// Validate, price every grid point, and write results.json, curves.csv and
/// run_meta.json into `out_dir`. Returns true iff every point priced.
pub fn run_job(cfg: &JobConfig, config_bytes: &[u8], out_dir: &Path, verbose: bool) -> CResult<bool> {
    let started = Instant::now();
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;
    if let Ok(dir) = std::env::var(CACHE_DIR_ENV) {
        let _ = fs::create_dir_all(dir);
    }

    let t_validate = Instant::now();
    check_semantics(cfg)?;
    let validate_ms = t_validate.elapsed().as_secs_f64() * 1e3;

    // Validation tasks first; the wh_identity residual is per model.
    let t_wh = Instant::now();
    let wh_residual = if cfg.wh_identity {
        Some(wh_identity_residual(&cfg.model))
    } else {
        None
    };
    let wh_ms = t_wh.elapsed().as_secs_f64() * 1e3;

    // Grid points go to the worker pool; indices restore config order.
    let t_price = Instant::now();
    let outcomes: Vec<PointOutcome> = {
        use rayon::prelude::*;
        cfg.points.par_iter().map(|p| price_point(cfg, p)).collect()
    };
    let pricing_ms = t_price.elapsed().as_secs_f64() * 1e3;

    let mut all_ok = true;
    let mut point_values = Vec::with_capacity(outcomes.len());
    let mut csv = String::from("product,grid_param,grid_value,price,numerical_error\n");
    for o in &outcomes {
        let mut entry = json!({
            "product": o.point.product,
            "grid_param": o.point.grid_param,
            "grid_value": o.point.grid_value,
            "maturity": o.point.t,
        });
        match &o.result {
            Ok(r) => {
                entry["price"] = json!(r.price);
                entry["numerical_error"] = json!(r.numerical_error);
                entry["diagnostics"] = diagnostics_json(r);
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    o.point.product,
                    o.point.grid_param,
                    fmt17(o.point.grid_value),
                    fmt17(r.price),
                    fmt17(r.numerical_error),
                ));
                if verbose {
                    eprintln!(
                        "{} {}={} -> {} (err {:.2e})",
                        o.point.product,
                        o.point.grid_param,
                        o.point.grid_value,
                        r.price,
                        r.numerical_error
                    );
                }
            }
            Err(e) => {
                all_ok = false;
                entry["error"] = json!(e.to_string());
                if verbose {
                    eprintln!(
                        "{} {}={} -> error: {e}",
                        o.point.product, o.point.grid_param, o.point.grid_value
                    );
                }
            }
        }
        if let Some(mc) = &o.mc {
            entry["oracle_mc"] = match mc {
                Ok(est) => json!({
                    "value": est.value,
                    "std_error": est.std_error,
                    "bias_note": bias_str(&est.bias_note),
                }),
                Err(e) => json!({ "error": e.to_string() }),
            };
        }
        point_values.push(entry);
    }

    let mut results = json!({ "points": point_values });
    if let Some(res) = &wh_residual {
        results["validation"] = match res {
            Ok(r) => json!({ "wh_identity_residual": r }),
            Err(e) => {
                all_ok = false;
                json!({ "wh_identity_error": e.to_string() })
            }
        };
    }

    let hash = {
        let mut h = Sha256::new();
        h.update(config_bytes);
        format!("{:x}", h.finalize())
    };
    let meta = json!({
        "config_sha256": hash,
        "engine": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "threads": rayon::current_num_threads(),
        "points": cfg.points.len(),
        "timings_ms": {
            "validate": validate_ms,
            "wh_identity": wh_ms,
            "pricing": pricing_ms,
            "total": started.elapsed().as_secs_f64() * 1e3,
        },
    });

    let write = |name: &str, data: &str| -> CResult<()> {
        fs::write(out_dir.join(name), data)
            .map_err(|e| CliError::Io(format!("cannot write {name}: {e}")))
    };
    write(
        "results.json",
        &(serde_json::to_string_pretty(&results).unwrap() + "\n"),
    )?;
    write("curves.csv", &csv)?;
    write(
        "run_meta.json",
        &(serde_json::to_string_pretty(&meta).unwrap() + "\n"),
    )?;
    Ok(all_ok)
}

// ---------------------------------------------------------------------------
// Command-line entry
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "levywh",
    version,
    about = "Exotic option pricing under exponential Levy models"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Price the products in a job config and write results to a directory.
    Price {
        /// Job config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output directory; falls back to output_dir from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker pool size; defaults to the number of cores.
        #[arg(long)]
        threads: Option<usize>,
        /// Per-point progress on stderr.
        #[arg(long)]
        verbose: bool,
    },
    /// Schema and semantic checks only; non-zero exit on failure.
    Validate {
        /// Job config (JSON).
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &Path) -> CResult<(Vec<u8>, JobConfig)> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8_lossy(&bytes).into_owned();
    let cfg = parse_config(&text)?;
    Ok((bytes, cfg))
}

fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::Parse(_) | CliError::Schema(_) | CliError::Semantic(_) => 2,
        CliError::Io(_) => 1,
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match cli.cmd {
        Cmd::Validate { config } => match load(&config).and_then(|(_, cfg)| {
            check_semantics(&cfg)?;
            Ok(cfg)
        }) {
            Ok(cfg) => {
                println!(
                    "ok: {} grid points, wh_identity={}, oracle_mc={}",
                    cfg.points.len(),
                    cfg.wh_identity,
                    cfg.oracle_mc.is_some()
                );
                0
            }
            Err(e) => {
                eprintln!("{e}");
                exit_code(&e)
            }
        },
        Cmd::Price { config, out, threads, verbose } => {
            if let Some(n) = threads {
                if let Err(e) =
                    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()
                {
                    eprintln!("cannot size worker pool: {e}");
                }
            }
            let run = load(&config).and_then(|(bytes, cfg)| {
                let out_dir = out
                    .or_else(|| cfg.output_dir.clone())
                    .ok_or_else(|| {
                        CliError::Schema(
                            "no output directory: pass --out or set `output_dir`".into(),
                        )
                    })?;
                run_job(&cfg, &bytes, &out_dir, verbose)
            });
            match run {
                Ok(true) => 0,
                Ok(false) => 1,
                Err(e) => {
                    eprintln!("{e}");
                    exit_code(&e)
                }
            }
        }
    }
}
