//! Operations shared by the command line and the service. Each returns the
//! structured document both front-ends print.

use std::collections::HashMap;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use quantforge::cost::{fit_coefficients, read_records, Arch, Catalog, CostCoefficients, CostError, Folding, PlatformSpec};
use quantforge::dse::{
    balance_dataflow_traced, best_offload_design, dataflow_design, default_precision, offload_design, roofline,
    schedule_multilayer_offload, sweep, DseError,
};
use quantforge::frontend::{emit_native, workload, FrontendError};
use quantforge::ir::{infer_shapes, validate, Network, Precision};
use quantforge::passes::{lower_to_blocks, run_pipeline, PassError, PassLogEntry};
use quantforge::refexec::{execute, RefExecError, Tensor};

#[derive(Debug, Error)]
pub enum AppError {
    /// Malformed request or arguments.
    #[error("{0}")]
    Usage(String),
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Pass(#[from] PassError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Dse(#[from] DseError),
    #[error(transparent)]
    Exec(#[from] RefExecError),
    #[error("{0}")]
    Io(String),
}

impl AppError {
    pub fn kind(&self) -> &'static str {
        match self {
            AppError::Usage(_) => "Usage",
            AppError::UnknownSession(_) => "UnknownSession",
            AppError::Frontend(e) => e.kind(),
            AppError::Pass(e) => e.kind(),
            AppError::Cost(e) => e.kind(),
            AppError::Dse(e) => e.kind(),
            AppError::Exec(e) => e.kind(),
            AppError::Io(_) => "Io",
        }
    }

    pub fn payload(&self) -> Value {
        json!({ "error": self.kind(), "message": self.to_string() })
    }
}

impl From<quantforge::ir::IrError> for AppError {
    fn from(e: quantforge::ir::IrError) -> Self {
        AppError::Frontend(e.into())
    }
}

pub type AppResult<T> = Result<T, AppError>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

/// Architecture requested on the command line or in a request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArchChoice {
    /// Balance a dataflow design, falling back to offload when it cannot fit.
    #[default]
    Auto,
    Df,
    Mo,
}

impl std::str::FromStr for ArchChoice {
    type Err = AppError;

    fn from_str(s: &str) -> AppResult<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(ArchChoice::Auto),
            "df" | "dataflow" => Ok(ArchChoice::Df),
            "mo" | "offload" => Ok(ArchChoice::Mo),
            other => Err(AppError::Usage(format!("unknown architecture `{other}` (expected df, mo or auto)"))),
        }
    }
}

/// Platform by catalog name, or the first entry of a TOML catalog file.
pub fn resolve_platform(catalog: &Catalog, name_or_file: &str) -> AppResult<PlatformSpec> {
    if name_or_file.ends_with(".toml") && Path::new(name_or_file).is_file() {
        let text = std::fs::read_to_string(name_or_file).map_err(|e| AppError::Io(format!("{name_or_file}: {e}")))?;
        let file = Catalog::from_toml(&text)?;
        return file
            .platform
            .into_iter()
            .next()
            .ok_or_else(|| CostError::Config(format!("{name_or_file}: no [[platform]] entry")).into());
    }
    Ok(catalog.get(name_or_file)?.clone())
}

pub fn resolve_coeffs(profile: Option<&str>) -> AppResult<CostCoefficients> {
    Ok(match profile {
        Some(p) => CostCoefficients::load(p)?,
        None => CostCoefficients::default(),
    })
}

pub fn apply_passes(net: &Network, passes: &[String]) -> AppResult<(Network, Vec<PassLogEntry>)> {
    if passes.is_empty() {
        return Ok((net.clone(), Vec::new()));
    }
    Ok(run_pipeline(net, passes)?)
}

/// Parses `P,Q,M`.
pub fn parse_triple(text: &str) -> AppResult<Folding> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let nums: Result<Vec<u64>, _> = parts.iter().map(|p| p.parse::<u64>()).collect();
    match nums.as_deref() {
        Ok([p, q, m]) => Ok(Folding::new(*p, *q, *m)),
        _ => Err(AppError::Usage(format!("expected P,Q,M but got `{text}`"))),
    }
}

fn number(v: &Value, what: &str) -> AppResult<u64> {
    match v {
        Value::Number(n) => n.as_u64(),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
    .ok_or_else(|| AppError::Usage(format!("`{what}` must be a non-negative integer")))
}

pub fn real(v: &Value, what: &str) -> AppResult<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
    .ok_or_else(|| AppError::Usage(format!("`{what}` must be a number")))
}

/// `{p, q, m}` object or `[p, q, m]` array.
pub fn folding_from_value(v: &Value) -> AppResult<Folding> {
    match v {
        Value::Array(items) if items.len() == 3 => {
            Ok(Folding::new(number(&items[0], "p")?, number(&items[1], "q")?, number(&items[2], "m")?))
        }
        Value::Object(map) => {
            let get = |k: &str| map.get(k).ok_or_else(|| AppError::Usage(format!("folding lacks `{k}`")));
            Ok(Folding::new(number(get("p")?, "p")?, number(get("q")?, "q")?, number(get("m")?, "m")?))
        }
        Value::String(s) => parse_triple(s),
        _ => Err(AppError::Usage("folding must be {p,q,m}, [p,q,m] or \"p,q,m\"".into())),
    }
}

/// Folding of an estimate: one geometry for every layer, or per-layer
/// entries with the rest left minimal.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum FoldingSpec {
    #[default]
    Minimal,
    Uniform(Folding),
    PerLayer(HashMap<String, Folding>),
}

impl FoldingSpec {
    pub fn from_value(v: &Value) -> AppResult<Self> {
        match v {
            Value::Null => Ok(FoldingSpec::Minimal),
            Value::Object(map) if map.contains_key("p") || map.contains_key("q") || map.contains_key("m") => {
                Ok(FoldingSpec::Uniform(folding_from_value(v)?))
            }
            Value::Object(map) => Ok(FoldingSpec::PerLayer(
                map.iter().map(|(k, f)| Ok((k.clone(), folding_from_value(f)?))).collect::<AppResult<_>>()?,
            )),
            other => Ok(FoldingSpec::Uniform(folding_from_value(other)?)),
        }
    }
}

fn lowered(net: &Network, arch: Arch) -> AppResult<quantforge::passes::BlockGraph> {
    Ok(lower_to_blocks(net, arch)?)
}

pub fn parse_summary(net: &Network) -> AppResult<Value> {
    let shaped = infer_shapes(net)?;
    let mut layers = Vec::new();
    for idx in shaped.topo_order()? {
        let l = &shaped.layers[idx];
        let out = shaped.shape_of(idx)?.output;
        layers.push(json!({
            "id": l.id,
            "kind": l.op.kind_name(),
            "inputs": l.inputs,
            "precision": l.precision.to_string(),
            "output": [out.channels, out.height, out.width],
        }));
    }
    Ok(json!({
        "network": net.name,
        "layers": layers,
        "diagnostics": to_value(&validate(net)),
    }))
}

pub fn native_text(net: &Network) -> AppResult<String> {
    Ok(emit_native(net)?)
}

pub fn workload_report(net: &Network) -> AppResult<Value> {
    Ok(to_value(&workload(net)?))
}

pub fn pass_log(net: &Network, log: &[PassLogEntry]) -> Value {
    json!({ "network": net.name, "layers": net.layers.len(), "log": to_value(&log) })
}

pub fn balance(net: &Network, platform: &PlatformSpec, coeffs: &CostCoefficients, arch: ArchChoice) -> AppResult<Value> {
    match arch {
        ArchChoice::Mo => {
            let graph = lowered(net, Arch::Mo)?;
            let design = best_offload_design(&graph, platform, coeffs)?;
            Ok(json!({ "design": to_value(&design), "iterations": 0, "fell_back": false }))
        }
        ArchChoice::Auto | ArchChoice::Df => {
            let graph = lowered(net, Arch::Df)?;
            let (design, trace) = balance_dataflow_traced(&graph, platform, coeffs)?;
            if arch == ArchChoice::Df && trace.fell_back {
                return Err(DseError::NoFeasibleDesign(format!(
                    "minimal dataflow folding exceeds the `{}` budget",
                    platform.name
                ))
                .into());
            }
            Ok(json!({
                "design": to_value(&design),
                "iterations": trace.steps.len().saturating_sub(1),
                "fell_back": trace.fell_back,
            }))
        }
    }
}

pub fn estimate(
    net: &Network,
    platform: &PlatformSpec,
    coeffs: &CostCoefficients,
    arch: Arch,
    folding: &FoldingSpec,
) -> AppResult<Value> {
    let graph = lowered(net, arch)?;
    let design = match arch {
        Arch::Df => {
            let foldings = match folding {
                FoldingSpec::Minimal => vec![Folding::MINIMAL; graph.layers.len()],
                FoldingSpec::Uniform(f) => vec![*f; graph.layers.len()],
                FoldingSpec::PerLayer(map) => {
                    if let Some(unknown) = map.keys().find(|k| graph.layer(k).is_none()) {
                        return Err(DseError::UnknownLayer(unknown.clone()).into());
                    }
                    graph.layers.iter().map(|l| map.get(&l.layer).copied().unwrap_or(Folding::MINIMAL)).collect()
                }
            };
            dataflow_design(&graph, &foldings, platform, coeffs)?
        }
        Arch::Mo => {
            let engine = match folding {
                FoldingSpec::Minimal => Folding::MINIMAL,
                FoldingSpec::Uniform(f) => *f,
                FoldingSpec::PerLayer(_) => {
                    return Err(AppError::Usage("an offload estimate takes one engine geometry".into()))
                }
            };
            offload_design(&graph, engine, platform, coeffs)?
        }
    };
    Ok(json!({ "design": to_value(&design) }))
}

pub fn schedule(net: &Network, platform: &PlatformSpec, engine: Folding) -> AppResult<Value> {
    let graph = lowered(net, Arch::Mo)?;
    let (schedule, perf) = schedule_multilayer_offload(&graph, engine, platform)?;
    Ok(json!({
        "network": net.name,
        "platform": platform.name,
        "schedule": to_value(&schedule),
        "perf": to_value(&perf),
    }))
}

/// Parses a precision such as `1`, `4`, `binary`, `ternary`, `int2` or
/// `uint4`. Bare widths take the default kind for the role.
pub fn parse_precision(text: &str, weight: bool) -> AppResult<Precision> {
    let t = text.trim().to_ascii_lowercase();
    let bad = || AppError::Usage(format!("cannot read precision `{text}`"));
    let width = |s: &str| s.parse::<u32>().ok().filter(|b| (1..=32).contains(b)).ok_or_else(bad);
    Ok(match t.as_str() {
        "binary" | "bipolar" => Precision::binary(),
        "ternary" => Precision::ternary(),
        _ if t.starts_with("uint") => Precision::unsigned(width(&t[4..])?),
        _ if t.starts_with("int") => Precision::signed(width(&t[3..])?),
        _ => default_precision(width(&t)?, weight),
    })
}

/// Parses `W/A`.
pub fn parse_pair(text: &str) -> AppResult<(Precision, Precision)> {
    let (w, a) = text
        .split_once('/')
        .ok_or_else(|| AppError::Usage(format!("expected W/A but got `{text}`")))?;
    Ok((parse_precision(w, true)?, parse_precision(a, false)?))
}

pub fn roofline_report(
    platform: &PlatformSpec,
    coeffs: &CostCoefficients,
    pairs: &[(Precision, Precision)],
    intensities: &[f64],
) -> Value {
    let lines: Vec<Value> = pairs.iter().map(|&(w, a)| to_value(&roofline(platform, w, a, coeffs, intensities))).collect();
    json!({ "platform": platform.name, "clock_mhz": platform.clock_mhz, "rooflines": lines })
}

pub fn sweep_report(
    net: &Network,
    platforms: &[PlatformSpec],
    coeffs: &CostCoefficients,
    pairs: &[(Precision, Precision)],
    archs: &[Arch],
) -> Value {
    to_value(&sweep(net, platforms, pairs, archs, coeffs))
}

pub fn platforms_report(catalog: &Catalog) -> Value {
    json!({ "platforms": to_value(&catalog.platform) })
}

pub fn calibrate(csv_text: &str, base: &CostCoefficients) -> AppResult<(Value, CostCoefficients)> {
    let records = read_records(csv_text.as_bytes())?;
    let report = fit_coefficients(&records, base)?;
    Ok((to_value(&report), report.coefficients))
}

/// Reads an input tensor from whitespace separated text or from a
/// little-endian `f32` blob.
pub fn read_tensor_values(bytes: &[u8]) -> AppResult<Vec<f64>> {
    if let Ok(text) = std::str::from_utf8(bytes) {
        let parsed: Result<Vec<f64>, _> = text.split_whitespace().map(str::parse::<f64>).collect();
        if let Ok(values) = parsed {
            return Ok(values);
        }
    }
    Ok(quantforge::frontend::read_blob(bytes)?.into_iter().map(f64::from).collect())
}

pub fn exec(net: &Network, values: Vec<f64>) -> AppResult<Tensor> {
    let shaped = infer_shapes(net)?;
    let input = shaped.input_index()?;
    let shape = shaped.shape_of(input)?.output;
    let tensor = Tensor::new(shape, values)?;
    Ok(execute(net, &tensor)?)
}

pub fn tensor_report(t: &Tensor) -> Value {
    json!({ "shape": [t.shape.channels, t.shape.height, t.shape.width], "values": t.data })
}
