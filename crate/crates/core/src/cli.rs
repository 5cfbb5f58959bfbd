//! Run configuration and the `derive`, `check`, `uncertainty` and `expand`
//! commands. Commands return their rendered output and an exit code; the
//! binary only parses flags and writes the result.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::{AlgebraElement, Generator};
use crate::duality::{
    check_jacobi, classify_algebra, preset, printed_variants, relation_table_from, CoproductTable, DualityError,
    RelationTable, PRESETS,
};
use crate::expr::{parse_decimal, parse_scalar};
use crate::report::Report;
use crate::scalar::{GaussRat, Param, ParamScalar};
use crate::twist::{
    adjudicate_case_ii, build_twist, check_coassoc_all, check_cocycle, check_hermiticity, ClosedTensor, Twist,
    TwistCase, TwistError, TwistSpec, Variant,
};
use crate::uncertainty::{
    limit_scan, random_suite, GridRep, Lab, ScanConfig, StateSampler, UncertaintyError, DEFAULT_CUTOFF, DEFAULT_POINTS,
};
use crate::weyl::{realize, verify_realization, RealizationPreset};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

pub const DEFAULT_STATES: usize = 100;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Twist(#[from] TwistError),
    #[error(transparent)]
    Duality(#[from] DualityError),
    #[error("{0}")]
    Uncertainty(#[from] UncertaintyError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Every error is an input problem.
    pub fn exit_code(&self) -> i32 {
        EXIT_INVALID
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Cocycle,
    Coassoc,
    Hermiticity,
    Forms,
    Jacobi,
    Realization,
    Adjudication,
}

/// A parameter value: a JSON number (read as an exact decimal) or an
/// expression such as `"1/10"` or `"2*alpha"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamInput {
    Number(serde_json::Number),
    Text(String),
}

impl ParamInput {
    fn text(&self) -> String {
        match self {
            ParamInput::Number(n) => n.to_string(),
            ParamInput::Text(s) => s.clone(),
        }
    }

    fn to_scalar(&self) -> std::result::Result<ParamScalar, String> {
        if let ParamInput::Number(n) = self {
            let q = parse_decimal(&n.to_string()).ok_or_else(|| format!("cannot read number {n}"))?;
            return Ok(ParamScalar::constant(GaussRat::new(q, num_rational::BigRational::from_integer(0.into()))));
        }
        parse_scalar(&self.text()).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
}

/// One JSON document; command-line flags override individual keys.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// One of `iso2`, `iso11`, `case-i`, `case-ii`, `trivial`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Case without a preset: unlisted parameters are zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<TwistCase>,
    /// `corrected` or `printed` (alias `printed-2.5`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hermitian: Option<bool>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, ParamInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    /// Generator for `expand`, e.g. `P1` or `M3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<CheckKind>>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub grid: GridSettings,
    #[serde(default, skip_serializing_if = "is_default")]
    pub scan: ScanSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn is_default<T: Default + PartialEq>(t: &T) -> bool {
    *t == T::default()
}

impl RunConfig {
    /// Parses a config document and applies `(dotted.key, value)` overrides.
    pub fn load(document: Option<&str>, overrides: &[(String, Value)]) -> Result<RunConfig> {
        let mut value = match document {
            Some(text) => {
                let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
                serde_json::to_value(cfg).expect("config serializes")
            }
            None => json!({}),
        };
        for (key, v) in overrides {
            set_path(&mut value, key, v.clone())?;
        }
        serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn set_path(root: &mut Value, key: &str, v: Value) -> Result<()> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (k, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(CliError::Config(format!("bad key `{key}`")));
        }
        let obj = node.as_object_mut().ok_or_else(|| CliError::Config(format!("key `{key}` is not an object path")))?;
        if k + 1 == parts.len() {
            obj.insert(part.to_string(), v);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| json!({}));
    }
    Ok(())
}

/// Twist specification plus values substituted after the symbolic derivation.
#[derive(Debug, Clone)]
pub struct Setup {
    pub name: String,
    pub preset: Option<String>,
    pub spec: TwistSpec,
    /// Numeric values, applied to derived results.
    pub substitutions: Vec<(Param, ParamScalar)>,
}

impl Setup {
    pub fn realization(&self) -> Option<RealizationPreset> {
        self.preset.as_deref().and_then(RealizationPreset::from_name)
    }

    fn substitute_table(&self, t: &RelationTable) -> Result<RelationTable> {
        let mut out = t.clone();
        for (p, v) in &self.substitutions {
            out = out.substitute(*p, v)?;
        }
        Ok(out)
    }

    fn substitute_closed(&self, t: &ClosedTensor) -> Result<ClosedTensor> {
        let mut terms = t.terms.clone();
        for (p, v) in &self.substitutions {
            terms = terms
                .into_iter()
                .map(|(a, b)| Ok((a.try_substitute(*p, v)?, b.try_substitute(*p, v)?)))
                .collect::<std::result::Result<_, crate::momentum::FunctionError>>()
                .map_err(DualityError::from)?;
        }
        let mut out = ClosedTensor::from_legs(terms);
        out.closed = t.closed;
        out.order = t.order;
        Ok(out)
    }
}

fn parse_variant(s: &str) -> Result<Variant> {
    match s {
        "corrected" => Ok(Variant::Corrected),
        "printed" | "printed-2.5" => Ok(Variant::Printed),
        other => Err(CliError::Config(format!("unknown variant `{other}`; expected corrected or printed"))),
    }
}

/// Resolves preset, case, parameters, order, variant and hermiticity.
pub fn setup(cfg: &RunConfig) -> Result<Setup> {
    let (mut spec, name, preset_name, realization_param) = match &cfg.preset {
        Some(p) => {
            let spec = preset(p).map_err(|_| {
                CliError::Config(format!("unknown preset `{p}`; expected one of {}", PRESETS.join(", ")))
            })?;
            if let Some(c) = cfg.case {
                if c != spec.case {
                    return Err(CliError::Config(format!("preset `{p}` is case {}, not case {c}", spec.case)));
                }
            }
            let rp = RealizationPreset::from_name(p).map(|r| r.parameter());
            (spec, p.clone(), Some(p.clone()), rp)
        }
        None => {
            let case = cfg.case.unwrap_or(TwistCase::I);
            (TwistSpec::trivial(case), format!("case {case}"), None, None)
        }
    };
    let case = spec.case;
    let allowed: Vec<Param> = case.parameters().iter().copied().chain(realization_param).collect();
    let mut substitutions = Vec::new();
    for (key, input) in &cfg.parameters {
        let p = Param::from_name(key).filter(|p| allowed.contains(p)).ok_or_else(|| {
            let names: Vec<&str> = allowed.iter().map(|p| p.name()).collect();
            CliError::Config(format!("unknown parameter `{key}` for {name}; expected one of {}", names.join(", ")))
        })?;
        let v = input.to_scalar().map_err(|e| CliError::Config(format!("parameter `{key}`: {e}")))?;
        let numeric = !v.is_zero() && v.min_deformation_degree() == Some(0);
        if Some(p) == realization_param {
            if numeric {
                substitutions.push((p, v));
            } else {
                spec.values = spec.values.into_iter().map(|(k, x)| (k, x.substitute(p, &v))).collect();
            }
        } else if numeric {
            spec.values.remove(&p);
            substitutions.push((p, v));
        } else {
            spec.values.insert(p, v);
        }
    }
    if let Some(n) = cfg.order {
        spec.order = n;
    }
    if let Some(v) = &cfg.variant {
        spec.variant = parse_variant(v)?;
    }
    if let Some(h) = cfg.hermitian {
        spec.hermitian = h;
    }
    if spec.hermitian {
        if let Some((p, _)) = substitutions.iter().find(|(_, v)| v.poly().terms().any(|(_, c)| !c.is_real())) {
            return Err(TwistError::NonHermitian(p.name().into()).into());
        }
    }
    Ok(Setup { name, preset: preset_name, spec, substitutions })
}

/// Rendered output and exit code of a command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub output: String,
}

fn header(setup: &Setup) -> Value {
    json!({
        "name": setup.name,
        "case": setup.spec.case,
        "variant": setup.spec.variant,
        "order": setup.spec.order,
        "hermitian": setup.spec.hermitian,
        "values": setup.spec.values.iter().map(|(p, v)| (p.name().to_string(), v.render())).collect::<BTreeMap<_, _>>(),
        "substituted": setup.substitutions.iter().map(|(p, v)| (p.name().to_string(), v.render())).collect::<BTreeMap<_, _>>(),
    })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

/// Twisted translation coproducts and the phase-space relation table.
pub fn cmd_derive(cfg: &RunConfig) -> Result<Outcome> {
    let setup = setup(cfg)?;
    let coproducts = CoproductTable::new(build_twist(&setup.spec)?)?;
    let mut table = relation_table_from(&coproducts, setup.name.clone())?;
    if let Some(p) = &setup.preset {
        table.annotations = printed_variants(p);
    }
    let table = setup.substitute_table(&table)?;
    let closed = coproducts.closed.iter().map(|c| setup.substitute_closed(c)).collect::<Result<Vec<_>>>()?;
    let output = match cfg.format() {
        Format::Json => pretty(&json!({
            "config": header(&setup),
            "coproducts": closed.iter().enumerate().map(|(mu, c)| json!({
                "generator": format!("P{mu}"),
                "value": c.render(true),
                "closed_form": c.closed,
            })).collect::<Vec<_>>(),
            "relations": table.to_value(),
        })),
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "# twisted coproducts ({}, order {})", setup.name, setup.spec.order);
            for (mu, c) in closed.iter().enumerate() {
                let _ = writeln!(out, "D(P{mu}) = {}", c.render(true));
            }
            out.push_str(&table.to_text(false));
            out
        }
        Format::Csv => {
            let mut out = String::from("a,b,value,closed_form\n");
            for (a, b) in RelationTable::display_pairs() {
                let rel = table.relation(a, b);
                let v = rel.map(|r| r.value.render()).unwrap_or_else(|| "0".into());
                let _ = writeln!(out, "{a},{b},\"{v}\",{}", rel.map(|r| r.closed_form).unwrap_or(true));
            }
            out
        }
    };
    Ok(Outcome { code: EXIT_PASS, output })
}

fn form_report(twist: &Twist) -> Report {
    let a = twist.form_agreement();
    let mut r = Report::new("left form = right form", Some(twist.order()));
    let residual = match a.first_differing_order {
        Some(k) => format!("first difference at order {k}: {}", a.residual),
        None => "0".into(),
    };
    r.push("F_left - F_right", residual, a.agree);
    r
}

fn default_checks(setup: &Setup) -> Vec<CheckKind> {
    let mut out = vec![CheckKind::Cocycle, CheckKind::Coassoc];
    if setup.spec.hermitian {
        out.push(CheckKind::Hermiticity);
    }
    out.extend([CheckKind::Forms, CheckKind::Jacobi]);
    if setup.realization().is_some() {
        out.push(CheckKind::Realization);
    }
    if setup.spec.case == TwistCase::II {
        out.push(CheckKind::Adjudication);
    }
    out
}

/// Twist axioms, Jacobi identities, realization and case-ii adjudication.
pub fn cmd_check(cfg: &RunConfig) -> Result<Outcome> {
    let setup = setup(cfg)?;
    let twist = build_twist(&setup.spec)?;
    let checks = cfg.checks.clone().unwrap_or_else(|| default_checks(&setup));
    let mut reports = Vec::new();
    for kind in checks {
        let mut report = match kind {
            CheckKind::Cocycle => check_cocycle(&twist),
            CheckKind::Coassoc => check_coassoc_all(&twist),
            CheckKind::Hermiticity => check_hermiticity(&twist),
            CheckKind::Forms => form_report(&twist),
            CheckKind::Jacobi => {
                let table = CoproductTable::new(twist.clone())?;
                let t = setup.substitute_table(&relation_table_from(&table, setup.name.clone())?)?;
                let mut r = check_jacobi(&t);
                r.note(format!("classification: {}", classify_algebra(&t)));
                r
            }
            CheckKind::Realization => {
                let rp = setup
                    .realization()
                    .ok_or_else(|| CliError::Config("the realization check needs preset iso2 or iso11".into()))?;
                let value = setup.substitutions.iter().find(|(p, _)| *p == rp.parameter()).map(|(_, v)| v.clone());
                verify_realization(&realize(rp, value))?
            }
            CheckKind::Adjudication => {
                if setup.spec.case != TwistCase::II {
                    return Err(CliError::Config("adjudication applies to case ii".into()));
                }
                adjudicate_case_ii(&setup.spec)?.report
            }
        };
        if !setup.substitutions.is_empty() && !matches!(kind, CheckKind::Jacobi | CheckKind::Realization) {
            let names: Vec<&str> = setup.substitutions.iter().map(|(p, _)| p.name()).collect();
            report.note(format!("checked with symbolic {}", names.join(", ")));
        }
        reports.push(report);
    }
    let pass = reports.iter().all(|r| r.pass);
    let output = match cfg.format() {
        Format::Json => pretty(&json!({ "config": header(&setup), "pass": pass, "reports": reports })),
        Format::Text | Format::Csv => {
            let mut out: String = reports.iter().map(Report::to_text).collect();
            let _ = writeln!(out, "overall: {}", if pass { "PASS" } else { "FAIL" });
            out
        }
    };
    Ok(Outcome { code: if pass { EXIT_PASS } else { EXIT_FAIL }, output })
}

/// `Δᶠ` of one generator.
pub fn cmd_expand(cfg: &RunConfig) -> Result<Outcome> {
    let setup = setup(cfg)?;
    let name = cfg.generator.clone().unwrap_or_else(|| "P0".into());
    let g = Generator::from_name(&name)
        .map_err(|_| CliError::Config(format!("unknown generator `{name}`; expected P0..P3, M1..M3, N1..N3")))?;
    let twist = build_twist(&setup.spec)?;
    let t = twist.coproduct(&AlgebraElement::generator(g));
    let (rendered, closed) = if g.is_translation() {
        let c = ClosedTensor::from_tensor(&t, &setup.spec.case.momenta()).map_err(TwistError::from)?;
        let c = setup.substitute_closed(&c)?;
        (c.render(true), c.closed)
    } else {
        let mut t = t;
        for (p, v) in &setup.substitutions {
            t = t.map_coefficients(|c| c.substitute(*p, v));
        }
        (t.render(true), false)
    };
    let output = match cfg.format() {
        Format::Json => pretty(&json!({
            "config": header(&setup),
            "generator": g.name(),
            "value": rendered,
            "closed_form": closed,
        })),
        Format::Text | Format::Csv => format!("D({}) = {rendered}\n", g.name()),
    };
    Ok(Outcome { code: EXIT_PASS, output })
}

/// Numeric uncertainty suite over seeded random Gaussians plus the limit scan.
pub fn cmd_uncertainty(cfg: &RunConfig) -> Result<Outcome> {
    let rp = cfg
        .preset
        .as_deref()
        .and_then(RealizationPreset::from_name)
        .ok_or_else(|| CliError::Config("uncertainty needs preset iso2 or iso11".into()))?;
    let pname = rp.parameter().name();
    for key in cfg.parameters.keys() {
        if key != pname {
            return Err(CliError::Config(format!("parameter `{key}` is not used by the {} realization", rp.name())));
        }
    }
    let input = cfg
        .parameters
        .get(pname)
        .ok_or_else(|| CliError::Config(format!("uncertainty needs a numeric value for `{pname}`")))?;
    let value = input
        .to_scalar()
        .ok()
        .and_then(|v| v.eval(&BTreeMap::new()))
        .filter(|z| z.im == 0.0 && z.re.is_finite())
        .ok_or_else(|| CliError::Config(format!("`{pname}` must be a real number, got `{}`", input.text())))?
        .re;
    let hbar = cfg.grid.hbar.unwrap_or(1.0);
    let points = cfg.grid.points.unwrap_or(DEFAULT_POINTS);
    let rep = GridRep::for_preset(rp, points, cfg.grid.cutoff.unwrap_or(DEFAULT_CUTOFF), hbar)?;
    let lab = Lab::new(rp, value, rep)?;
    let seed = cfg.grid.seed.unwrap_or(DEFAULT_SEED);
    let suite = random_suite(&lab, cfg.grid.states.unwrap_or(DEFAULT_STATES), seed, &StateSampler::default())?;
    let mut scan_cfg = ScanConfig::for_parameter(rp, value, hbar);
    scan_cfg.points = points;
    if let Some(w) = cfg.scan.width {
        scan_cfg.width = w;
    }
    if let Some(c) = &cfg.scan.centers {
        scan_cfg.centers = c.clone();
    }
    scan_cfg.cutoff = cfg.scan.cutoff;
    let scan = limit_scan(rp, &scan_cfg)?;
    let pass = suite.pass && scan.pass;
    let output = match cfg.format() {
        Format::Json => pretty(&json!({ "seed": seed, "pass": pass, "suite": suite, "scan": scan })),
        Format::Text => {
            format!("{}\n{}overall: {}\n", suite.to_text(), scan.to_text(), if pass { "PASS" } else { "FAIL" })
        }
        Format::Csv => scan.to_csv(),
    };
    Ok(Outcome { code: if pass { EXIT_PASS } else { EXIT_FAIL }, output })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Derive,
    Check,
    Uncertainty,
    Expand,
}

/// Runs a command; errors become exit code 2 with a diagnostic.
pub fn run(command: Command, cfg: &RunConfig) -> Outcome {
    let result = match command {
        Command::Derive => cmd_derive(cfg),
        Command::Check => cmd_check(cfg),
        Command::Uncertainty => cmd_uncertainty(cfg),
        Command::Expand => cmd_expand(cfg),
    };
    result.unwrap_or_else(|e| Outcome { code: e.exit_code(), output: format!("error: {e}\n") })
}
