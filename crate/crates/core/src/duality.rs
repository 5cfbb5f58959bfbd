//! Phase space of a twisted Poincaré algebra.
//!
//! Coordinates `x_μ` are dual to the translations through
//! `⟨x_μ, f⟩ = −iħ g_{μν} ∂f/∂P_ν(0)`. Coordinate brackets come from the
//! antisymmetrized bilinear part of the twisted coproduct of `P_λ`;
//! momentum-coordinate brackets from `[p, x] = Σ ⟨leg1, x⟩ leg2`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{metric, AlgebraElement, Generator, TensorElement};
use crate::momentum::{FunctionError, MomentumFunction};
use crate::report::Report;
use crate::scalar::{GaussRat, Mono, Param, ParamScalar, MOMENTUM_COUNT};
use crate::twist::{build_twist, ClosedTensor, Twist, TwistError, TwistSpec};

/// Order used to decide whether a closed-form residual vanishes.
const IDENTITY_ORDER: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DualityError {
    #[error("pairing is defined on the translation sector only; got `{0}`")]
    NotTranslation(String),
    #[error("[{0}, {1}] is not a combination of single coordinates; residual pairing with {2}: {3}")]
    NonLie(String, String, String, String),
    #[error("D(P{0}) leaves the translation sector ({1}); these parameters give no commuting momentum algebra")]
    OpenTranslationSector(usize, String),
    #[error("unknown phase-space generator `{0}`")]
    UnknownGenerator(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error(transparent)]
    Twist(#[from] TwistError),
    #[error(transparent)]
    Function(#[from] FunctionError),
}

/// `x_μ` or `p_μ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PhaseSpaceGenerator {
    X(u8),
    P(u8),
}

impl PhaseSpaceGenerator {
    pub fn all() -> [PhaseSpaceGenerator; 8] {
        use PhaseSpaceGenerator::*;
        [X(0), X(1), X(2), X(3), P(0), P(1), P(2), P(3)]
    }

    pub fn index(self) -> usize {
        match self {
            PhaseSpaceGenerator::X(m) | PhaseSpaceGenerator::P(m) => m as usize,
        }
    }

    pub fn is_coordinate(self) -> bool {
        matches!(self, PhaseSpaceGenerator::X(_))
    }
}

impl fmt::Display for PhaseSpaceGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseSpaceGenerator::X(m) => write!(f, "x{m}"),
            PhaseSpaceGenerator::P(m) => write!(f, "p{m}"),
        }
    }
}

impl FromStr for PhaseSpaceGenerator {
    type Err = DualityError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || DualityError::UnknownGenerator(s.to_string());
        let mut chars = s.chars();
        let kind = chars.next().ok_or_else(err)?;
        let idx: u8 = chars.as_str().parse().map_err(|_| err())?;
        if idx >= MOMENTUM_COUNT as u8 {
            return Err(err());
        }
        match kind {
            'x' => Ok(PhaseSpaceGenerator::X(idx)),
            'p' => Ok(PhaseSpaceGenerator::P(idx)),
            _ => Err(err()),
        }
    }
}

fn minus_i_hbar() -> ParamScalar {
    ParamScalar::param(Param::Hbar).scale(&GaussRat::from_parts((0, 1), (-1, 1)))
}

/// `⟨x_μ, f⟩`.
pub fn pair(mu: usize, f: &MomentumFunction) -> ParamScalar {
    &f.diff(mu).eval_at_zero() * &minus_i_hbar().scale(&GaussRat::from_int(metric(mu)))
}

/// `⟨x_μ, X⟩` for a translation-sector element.
pub fn pair_element(mu: usize, x: &AlgebraElement) -> Result<ParamScalar, DualityError> {
    let f = x.to_momentum_function().map_err(|_| DualityError::NotTranslation(x.render()))?;
    Ok(pair(mu, &f))
}

/// Twisted coproducts of the four translations.
#[derive(Debug, Clone)]
pub struct CoproductTable {
    pub twist: Twist,
    pub tensors: Vec<TensorElement>,
    pub closed: Vec<ClosedTensor>,
}

impl CoproductTable {
    /// Fails when some `Δᶠ(P_μ)` involves Lorentz generators.
    pub fn new(twist: Twist) -> Result<Self, DualityError> {
        let tensors: Vec<TensorElement> = (0..MOMENTUM_COUNT)
            .into_par_iter()
            .map(|mu| twist.coproduct(&AlgebraElement::generator(Generator::momentum(mu))))
            .collect();
        let closed = tensors
            .iter()
            .enumerate()
            .map(|(mu, t)| {
                ClosedTensor::from_tensor(t, &twist.spec().case.momenta())
                    .map_err(|e| DualityError::OpenTranslationSector(mu, e.to_string()))
            })
            .collect::<Result<_, _>>()?;
        Ok(CoproductTable { twist, tensors, closed })
    }

    pub fn order(&self) -> u32 {
        self.twist.order()
    }
}

/// `[p_μ, x_ν]` and whether it is in closed form.
pub fn cross_commutator(mu: usize, nu: usize, table: &CoproductTable) -> (MomentumFunction, bool) {
    let ct = &table.closed[mu];
    let mut out = MomentumFunction::zero();
    for (a, b) in &ct.terms {
        let c = pair(nu, a);
        if !c.is_zero() {
            out = out.checked_add(&b.scale(&c)).expect("consistent orders");
        }
    }
    let (presented, closed) = out.present();
    (presented, closed && ct.closed)
}

/// Coefficients of the bilinear part `Σ C(a,b) P_a ⊗ P_b` of a tensor.
fn bilinear(t: &TensorElement) -> BTreeMap<(usize, usize), ParamScalar> {
    let single = |m: &Mono| -> Option<usize> {
        (m.momentum_degree() == 1 && m.param_part().is_one())
            .then(|| (0..MOMENTUM_COUNT).find(|&mu| m.momentum_exp(mu) == 1))
            .flatten()
    };
    let mut out: BTreeMap<(usize, usize), ParamScalar> = BTreeMap::new();
    for (u, v, c) in t.momentum_terms().expect("translation sector") {
        if let (Some(a), Some(b)) = (single(&u), single(&v)) {
            let e = out.entry((a, b)).or_default();
            *e = &*e + &c;
        }
    }
    out
}

/// `⟨x_μ⊗x_ν − x_ν⊗x_μ, T⟩` on the bilinear part of `T`.
fn antisymmetric_pairing(bil: &BTreeMap<(usize, usize), ParamScalar>, mu: usize, nu: usize) -> ParamScalar {
    let get = |a, b| bil.get(&(a, b)).cloned().unwrap_or_default();
    let h2 = minus_i_hbar().pow(2).scale(&GaussRat::from_int(metric(mu) * metric(nu)));
    &(&get(mu, nu) - &get(nu, mu)) * &h2
}

/// Structure constants `[x_μ, x_ν] = Σ_λ k[μ][ν][λ] x_λ`.
///
/// Pairing both sides with `P_λ` and using `⟨x_κ, P_λ⟩ = −iħ g_{κλ}` gives
/// `k^λ = −iħ g_μμ g_νν g_λλ (C_λ(μ,ν) − C_λ(ν,μ))` with `C_λ` the bilinear
/// coefficients of `Δᶠ(P_λ)`.
pub fn dual_brackets(table: &CoproductTable) -> Result<Vec<Vec<[ParamScalar; MOMENTUM_COUNT]>>, DualityError> {
    non_lie_check(table)?;
    let bil: Vec<_> = table.tensors.iter().map(bilinear).collect();
    let mut k = vec![vec![<[ParamScalar; MOMENTUM_COUNT]>::default(); MOMENTUM_COUNT]; MOMENTUM_COUNT];
    for (mu, row) in k.iter_mut().enumerate() {
        for (nu, entry) in row.iter_mut().enumerate() {
            for (lambda, b) in bil.iter().enumerate() {
                let get = |x, y| b.get(&(x, y)).cloned().unwrap_or_default();
                let sign = metric(mu) * metric(nu) * metric(lambda);
                entry[lambda] = &(&get(mu, nu) - &get(nu, mu)) * &minus_i_hbar().scale(&GaussRat::from_int(sign));
            }
        }
    }
    Ok(k)
}

/// The bracket must pair to zero with every quadratic momentum monomial.
fn non_lie_check(table: &CoproductTable) -> Result<(), DualityError> {
    let alg = table.twist.algebra();
    for a in 0..MOMENTUM_COUNT {
        for b in a..MOMENTUM_COUNT {
            let prod = alg.tensor_mul(&table.tensors[a], &table.tensors[b]).expect("arity 2");
            let bil = bilinear(&prod);
            for mu in 0..MOMENTUM_COUNT {
                for nu in mu + 1..MOMENTUM_COUNT {
                    let r = antisymmetric_pairing(&bil, mu, nu);
                    if !r.is_zero() {
                        return Err(DualityError::NonLie(
                            format!("x{mu}"),
                            format!("x{nu}"),
                            format!("P{a}*P{b}"),
                            r.render(),
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Element `F(p) + Σ c_λ x_λ` of the phase-space algebra's linear span.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PhaseValue {
    pub function: MomentumFunction,
    pub linear: [ParamScalar; MOMENTUM_COUNT],
}

impl PhaseValue {
    pub fn zero() -> Self {
        PhaseValue::default()
    }

    pub fn function(f: MomentumFunction) -> Self {
        PhaseValue { function: f, ..Default::default() }
    }

    pub fn linear(coeffs: [ParamScalar; MOMENTUM_COUNT]) -> Self {
        PhaseValue { linear: coeffs, ..Default::default() }
    }

    pub fn coordinate(mu: usize, c: ParamScalar) -> Self {
        let mut l = <[ParamScalar; MOMENTUM_COUNT]>::default();
        l[mu] = c;
        PhaseValue::linear(l)
    }

    pub fn is_zero(&self) -> bool {
        self.function.is_zero() && self.linear.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, c: &ParamScalar) -> Self {
        PhaseValue { function: self.function.scale(c), linear: self.linear.clone().map(|l| &l * c) }
    }

    pub fn neg(&self) -> Self {
        self.scale(&ParamScalar::int(-1))
    }

    pub fn add(&self, o: &PhaseValue) -> PhaseValue {
        let mut linear = self.linear.clone();
        for (a, b) in linear.iter_mut().zip(&o.linear) {
            *a = &*a + b;
        }
        PhaseValue { function: self.function.checked_add(&o.function).expect("consistent orders"), linear }
    }

    /// Zero exactly, or as a power series through `IDENTITY_ORDER`.
    pub fn vanishes(&self) -> bool {
        if self.linear.iter().any(|c| !c.is_zero()) {
            return false;
        }
        if self.function.is_zero() {
            return true;
        }
        let n = self.function.order().unwrap_or(IDENTITY_ORDER);
        self.function.expand(n).map(|f| f.is_zero()).unwrap_or(false)
    }

    pub fn render(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        if self.linear.iter().any(|c| !c.is_zero()) {
            parts.push(crate::algebra::render_sum(
                self.linear.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(mu, c)| (format!("x{mu}"), c)),
            ));
        }
        if !self.function.is_zero() {
            parts.push(self.function.render('p'));
        }
        match parts.len() {
            0 => "0".into(),
            1 => parts.remove(0),
            _ => {
                let second = parts.remove(1);
                match second.strip_prefix('-') {
                    Some(rest) => format!("{} - {rest}", parts[0]),
                    None => format!("{} + {second}", parts[0]),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub value: PhaseValue,
    pub closed_form: bool,
}

/// A printed relation that differs from the derived one, kept for reference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub pair: [String; 2],
    pub printed: String,
    pub note: String,
}

/// Commutators of the phase-space generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationTable {
    pub name: String,
    pub order: Option<u32>,
    entries: BTreeMap<(PhaseSpaceGenerator, PhaseSpaceGenerator), Relation>,
    pub annotations: Vec<Annotation>,
}

#[derive(Serialize)]
struct RelationRecord {
    pair: [String; 2],
    value: String,
    closed_form: bool,
}

#[derive(Serialize)]
struct TableRecord<'a> {
    name: &'a str,
    order: Option<u32>,
    relations: Vec<RelationRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    annotations: &'a Vec<Annotation>,
}

impl RelationTable {
    pub fn empty(name: impl Into<String>, order: Option<u32>) -> Self {
        RelationTable { name: name.into(), order, entries: BTreeMap::new(), annotations: Vec::new() }
    }

    /// Set `[a, b]`; `[b, a]` follows by antisymmetry.
    pub fn set(&mut self, a: PhaseSpaceGenerator, b: PhaseSpaceGenerator, value: PhaseValue, closed_form: bool) {
        self.entries.insert((b, a), Relation { value: value.neg(), closed_form });
        self.entries.insert((a, b), Relation { value, closed_form });
    }

    pub fn get(&self, a: PhaseSpaceGenerator, b: PhaseSpaceGenerator) -> PhaseValue {
        self.entries.get(&(a, b)).map(|r| r.value.clone()).unwrap_or_default()
    }

    pub fn relation(&self, a: PhaseSpaceGenerator, b: PhaseSpaceGenerator) -> Option<&Relation> {
        self.entries.get(&(a, b))
    }

    /// Substitute a parameter in every entry.
    pub fn substitute(&self, p: Param, v: &ParamScalar) -> Result<RelationTable, DualityError> {
        let mut out = RelationTable::empty(self.name.clone(), self.order);
        out.annotations = self.annotations.clone();
        for (a, b) in RelationTable::display_pairs() {
            if let Some(rel) = self.relation(a, b) {
                let value = PhaseValue {
                    function: rel.value.function.try_substitute(p, v)?,
                    linear: rel.value.linear.clone().map(|c| c.substitute(p, v)),
                };
                out.set(a, b, value, rel.closed_form);
            }
        }
        Ok(out)
    }

    /// Pairs in display orientation: `[x_μ, x_ν]` (μ<ν), `[p_μ, x_ν]`, `[p_μ, p_ν]` (μ<ν).
    pub fn display_pairs() -> Vec<(PhaseSpaceGenerator, PhaseSpaceGenerator)> {
        use PhaseSpaceGenerator::*;
        let mut out = Vec::new();
        for mu in 0..4u8 {
            for nu in mu + 1..4 {
                out.push((X(mu), X(nu)));
            }
        }
        for mu in 0..4u8 {
            for nu in 0..4 {
                out.push((P(mu), X(nu)));
            }
        }
        for mu in 0..4u8 {
            for nu in mu + 1..4 {
                out.push((P(mu), P(nu)));
            }
        }
        out
    }

    /// Display pairs, followed by the reversed orientation when `both`.
    fn records(&self, both: bool) -> Vec<RelationRecord> {
        RelationTable::display_pairs()
            .into_iter()
            .flat_map(|(a, b)| if both { vec![(a, b), (b, a)] } else { vec![(a, b)] })
            .map(|(a, b)| {
                let rel = self.relation(a, b);
                RelationRecord {
                    pair: [a.to_string(), b.to_string()],
                    value: rel.map(|r| r.value.render()).unwrap_or_else(|| "0".into()),
                    closed_form: rel.map(|r| r.closed_form).unwrap_or(true),
                }
            })
            .collect()
    }

    /// JSON document listing both orientations of every pair.
    pub fn to_value(&self) -> serde_json::Value {
        let rec = TableRecord {
            name: &self.name,
            order: self.order,
            relations: self.records(true),
            annotations: &self.annotations,
        };
        serde_json::to_value(&rec).expect("table serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("table serializes")
    }

    /// Aligned text table; zero relations are listed only when `all`.
    pub fn to_text(&self, all: bool) -> String {
        let rows: Vec<(String, String)> = self
            .records(false)
            .into_iter()
            .filter(|r| all || r.value != "0")
            .map(|r| {
                let mark = if r.closed_form { "" } else { "  [series]" };
                (format!("[{},{}]", r.pair[0], r.pair[1]), format!("{}{mark}", r.value))
            })
            .collect();
        let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.name);
        for (l, r) in rows {
            let _ = writeln!(out, "{l:<width$} = {r}");
        }
        for a in &self.annotations {
            let _ = writeln!(out, "# printed [{},{}] = {}: {}", a.pair[0], a.pair[1], a.printed, a.note);
        }
        out
    }
}

/// Derive the full relation table of a twist.
pub fn relation_table(spec: &TwistSpec) -> Result<RelationTable, DualityError> {
    let table = CoproductTable::new(build_twist(spec)?)?;
    relation_table_from(&table, format!("case {}", spec.case))
}

pub fn relation_table_from(table: &CoproductTable, name: String) -> Result<RelationTable, DualityError> {
    use PhaseSpaceGenerator::*;
    let k = dual_brackets(table)?;
    let mut out = RelationTable::empty(name, Some(table.order()));
    for mu in 0..4 {
        for nu in mu + 1..4 {
            out.set(X(mu as u8), X(nu as u8), PhaseValue::linear(k[mu][nu].clone()), true);
        }
    }
    let cross: Vec<_> =
        (0..16).into_par_iter().map(|i| (i / 4, i % 4, cross_commutator(i / 4, i % 4, table))).collect();
    for (mu, nu, (f, closed)) in cross {
        out.set(P(mu as u8), X(nu as u8), PhaseValue::function(f), closed);
    }
    for mu in 0..4 {
        for nu in mu + 1..4 {
            out.set(P(mu), P(nu), PhaseValue::zero(), true);
        }
    }
    Ok(out)
}

/// Named parameter specializations.
pub fn preset(name: &str) -> Result<TwistSpec, DualityError> {
    use crate::twist::TwistCase;
    match name {
        "iso2" => Ok(TwistSpec::iso2()),
        "iso11" => Ok(TwistSpec::iso11()),
        "case-i" => Ok(TwistSpec::simplified(TwistCase::I)),
        "case-ii" => Ok(TwistSpec::simplified(TwistCase::II)),
        "trivial" => Ok(TwistSpec::trivial(TwistCase::I)),
        other => Err(DualityError::UnknownPreset(other.to_string())),
    }
}

pub const PRESETS: [&str; 5] = ["iso2", "iso11", "case-i", "case-ii", "trivial"];

/// Relation table of a named preset, with printed variants attached.
pub fn preset_table(name: &str) -> Result<RelationTable, DualityError> {
    let mut t = relation_table(&preset(name)?)?;
    t.name = name.to_string();
    t.annotations = printed_variants(name);
    Ok(t)
}

/// Printed relations that differ from the derived ones.
pub fn printed_variants(name: &str) -> Vec<Annotation> {
    let a = |x: &str, y: &str, printed: &str, note: &str| Annotation {
        pair: [x.into(), y.into()],
        printed: printed.into(),
        note: note.into(),
    };
    match name {
        "iso2" => vec![a(
            "x0",
            "x2",
            "2*i*hbar*alpha*x1",
            "sign differs from the general delta relation at delta3m = 0; fails Jacobi on (p1, x0, x2)",
        )],
        "case-ii" => vec![a(
            "p3",
            "p0",
            "-i*hbar*sinh(xi1m*p1 + xi2m*p2)",
            "printed with p0 in place of x0; momenta commute, read as [p3, x0]",
        )],
        _ => Vec::new(),
    }
}

/// The `iso2` table with the printed sign of `[x0, x2]`.
pub fn iso2_printed_table() -> Result<RelationTable, DualityError> {
    use PhaseSpaceGenerator::*;
    let mut t = preset_table("iso2")?;
    let alpha = ParamScalar::param(Param::Alpha);
    let c = (&ParamScalar::param(Param::Hbar) * &alpha).scale(&GaussRat::from_parts((0, 1), (2, 1)));
    t.set(X(0), X(2), PhaseValue::coordinate(1, c), true);
    t.name = "iso2 (printed)".into();
    Ok(t)
}

/// `[a, v]` for a generator and a phase value, using the table.
fn bracket_with(table: &RelationTable, a: PhaseSpaceGenerator, v: &PhaseValue) -> PhaseValue {
    let mut out = PhaseValue::zero();
    for (lambda, c) in v.linear.iter().enumerate() {
        if !c.is_zero() {
            out = out.add(&table.get(a, PhaseSpaceGenerator::X(lambda as u8)).scale(c));
        }
    }
    if let PhaseSpaceGenerator::X(_) = a {
        if !v.function.is_zero() {
            for nu in 0..MOMENTUM_COUNT {
                let d = v.function.diff(nu);
                if d.is_zero() {
                    continue;
                }
                let xp = table.get(a, PhaseSpaceGenerator::P(nu as u8)).function;
                let term = d.checked_mul(&xp).expect("consistent orders");
                out = out.add(&PhaseValue::function(term));
            }
        }
    }
    out
}

/// Jacobi identity on every triple of distinct generators.
pub fn check_jacobi(table: &RelationTable) -> Report {
    let gens = PhaseSpaceGenerator::all();
    let mut triples = Vec::new();
    for i in 0..8 {
        for j in i + 1..8 {
            for k in j + 1..8 {
                triples.push((gens[i], gens[j], gens[k]));
            }
        }
    }
    let results: Vec<_> = triples
        .par_iter()
        .map(|&(a, b, c)| {
            let j = bracket_with(table, a, &table.get(b, c))
                .add(&bracket_with(table, b, &table.get(c, a)))
                .add(&bracket_with(table, c, &table.get(a, b)));
            (a, b, c, j)
        })
        .collect();
    let mut report = Report::new(format!("jacobi: {}", table.name), table.order);
    for (a, b, c, j) in results {
        let ok = j.vanishes();
        report.push(format!("({a}, {b}, {c})"), if ok { "0".into() } else { j.render() }, ok);
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassLabel {
    #[serde(rename = "abelian")]
    Abelian,
    #[serde(rename = "iso(2)")]
    Iso2,
    #[serde(rename = "iso(1,1)")]
    Iso11,
    #[serde(rename = "other")]
    Other,
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassLabel::Abelian => "abelian",
            ClassLabel::Iso2 => "iso(2)",
            ClassLabel::Iso11 => "iso(1,1)",
            ClassLabel::Other => "other",
        })
    }
}

/// Sign of a polynomial that is a positive combination of even monomials
/// (or the negative of one); `None` when undecided.
fn definite_sign(p: &ParamScalar) -> Option<i32> {
    let mut sign = 0;
    for (m, c) in p.poly().terms() {
        if !c.is_real() || m.0.iter().any(|e| e % 2 == 1) {
            return None;
        }
        let s = if c.is_negative_leading() { -1 } else { 1 };
        if sign != 0 && sign != s {
            return None;
        }
        sign = s;
    }
    (sign != 0).then_some(sign)
}

/// Identify the coordinate Lie algebra.
pub fn classify_algebra(table: &RelationTable) -> ClassLabel {
    use PhaseSpaceGenerator::X;
    let k = |a: usize, b: usize| table.get(X(a as u8), X(b as u8)).linear;
    let mut involved = [false; MOMENTUM_COUNT];
    let mut any = false;
    for a in 0..4 {
        for b in a + 1..4 {
            let v = k(a, b);
            if v.iter().any(|c| !c.is_zero()) {
                any = true;
                involved[a] = true;
                involved[b] = true;
                for (l, c) in v.iter().enumerate() {
                    involved[l] |= !c.is_zero();
                }
            }
        }
    }
    if !any {
        return ClassLabel::Abelian;
    }
    let idx: Vec<usize> = (0..4).filter(|&i| involved[i]).collect();
    if idx.len() != 3 {
        return ClassLabel::Other;
    }
    // Brackets are i times real; strip the i.
    let minus_i = ParamScalar::i().scale(&GaussRat::from_int(-1));
    for (pos, &j) in idx.iter().enumerate() {
        let (a, b) = (idx[(pos + 1) % 3], idx[(pos + 2) % 3]);
        if k(a, b).iter().any(|c| !c.is_zero()) {
            continue;
        }
        let ad = |y: usize| k(j, y);
        let (ja, jb) = (ad(a), ad(b));
        let outside = |v: &[ParamScalar; 4]| v.iter().enumerate().any(|(l, c)| l != a && l != b && !c.is_zero());
        if outside(&ja) || outside(&jb) {
            continue;
        }
        let r = |c: &ParamScalar| c * &minus_i;
        let (d11, d21, d12, d22) = (r(&ja[a]), r(&ja[b]), r(&jb[a]), r(&jb[b]));
        if !(&d11 + &d22).is_zero() {
            return ClassLabel::Other;
        }
        let det = &(&d11 * &d22) - &(&d12 * &d21);
        return match definite_sign(&det) {
            Some(1) => ClassLabel::Iso2,
            Some(-1) => ClassLabel::Iso11,
            _ => ClassLabel::Other,
        };
    }
    ClassLabel::Other
}

/// Multiply every deformation parameter of the spec by the formal scale `s`.
pub fn graded_spec(spec: &TwistSpec) -> TwistSpec {
    let mut out = spec.clone();
    for &p in spec.case.parameters() {
        out.values.insert(p, spec.value(p).graded());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momentum::LinearForm;
    use crate::twist::TwistCase;
    use PhaseSpaceGenerator::{P, X};

    fn ps(p: Param) -> ParamScalar {
        ParamScalar::param(p)
    }

    /// `k * i * hbar * c`
    fn ih(k: i64, c: &ParamScalar) -> ParamScalar {
        (&ps(Param::Hbar) * c).scale(&GaussRat::from_parts((0, 1), (k, 1)))
    }

    fn fun(f: MomentumFunction, c: ParamScalar) -> PhaseValue {
        PhaseValue::function(f.scale(&c))
    }

    #[test]
    fn pairing_examples() {
        let one = ParamScalar::one();
        assert_eq!(pair(1, &MomentumFunction::momentum(1)), ih(-1, &one));
        assert_eq!(pair(0, &MomentumFunction::momentum(0)), ih(1, &one));
        assert!(pair(2, &MomentumFunction::one()).is_zero());
        let a = LinearForm::single(0, ps(Param::Delta0M)).plus(3, ps(Param::Delta3M));
        assert_eq!(pair(0, &MomentumFunction::sin(&a)), ih(1, &ps(Param::Delta0M)));
        let m3 = AlgebraElement::generator(Generator::M3);
        assert!(matches!(pair_element(0, &m3), Err(DualityError::NotTranslation(_))));
    }

    #[test]
    fn cross_commutator_examples() {
        let table = CoproductTable::new(build_twist(&TwistSpec::simplified(TwistCase::I)).unwrap()).unwrap();
        let a = LinearForm::single(0, ps(Param::Delta0M)).plus(3, ps(Param::Delta3M));
        let (v, closed) = cross_commutator(1, 1, &table);
        assert!(closed);
        assert_eq!(v, MomentumFunction::cos(&a).scale(&ih(-1, &ParamScalar::one())));
        let (v, _) = cross_commutator(2, 0, &table);
        assert_eq!(v, MomentumFunction::momentum(1).scale(&ih(1, &ps(Param::Delta0M))));

        let table = CoproductTable::new(build_twist(&TwistSpec::simplified(TwistCase::II)).unwrap()).unwrap();
        let eta = LinearForm::single(1, ps(Param::Xi1M)).plus(2, ps(Param::Xi2M));
        let (v, _) = cross_commutator(0, 0, &table);
        assert_eq!(v, MomentumFunction::cosh(&eta).scale(&ih(1, &ParamScalar::one())));
    }

    #[test]
    fn dual_bracket_examples() {
        let table = CoproductTable::new(build_twist(&TwistSpec::simplified(TwistCase::I)).unwrap()).unwrap();
        let k = dual_brackets(&table).unwrap();
        assert_eq!(PhaseValue::linear(k[0][1].clone()), PhaseValue::coordinate(2, ih(2, &ps(Param::Delta0M))));
        assert!(k[0][3].iter().all(|c| c.is_zero()));
        let table = CoproductTable::new(build_twist(&TwistSpec::simplified(TwistCase::II)).unwrap()).unwrap();
        let k = dual_brackets(&table).unwrap();
        for (a, xi) in [(1, Param::Xi1M), (2, Param::Xi2M)] {
            assert_eq!(PhaseValue::linear(k[0][a].clone()), PhaseValue::coordinate(3, ih(-2, &ps(xi))));
        }
    }

    #[test]
    fn iso2_table_matches_relations() {
        let t = preset_table("iso2").unwrap();
        let al = ps(Param::Alpha);
        let one = ParamScalar::one();
        let lf = LinearForm::single(0, al.clone());
        let (c, s) = (MomentumFunction::cos(&lf), MomentumFunction::sin(&lf));
        assert_eq!(t.get(X(0), X(1)), PhaseValue::coordinate(2, ih(2, &al)));
        assert_eq!(t.get(X(0), X(2)), PhaseValue::coordinate(1, ih(-2, &al)));
        assert_eq!(t.get(X(0), P(1)), fun(MomentumFunction::momentum(2), ih(1, &al)));
        assert_eq!(t.get(X(0), P(2)), fun(MomentumFunction::momentum(1), ih(-1, &al)));
        assert_eq!(t.get(P(1), X(1)), fun(c.clone(), ih(-1, &one)));
        assert_eq!(t.get(P(1), X(2)), fun(s.clone(), ih(-1, &one)));
        assert_eq!(t.get(P(2), X(1)), fun(s, ih(1, &one)));
        assert_eq!(t.get(P(2), X(2)), fun(c, ih(-1, &one)));
        assert!(t.get(X(1), X(2)).is_zero());
        assert_eq!(t.annotations.len(), 1);
    }

    #[test]
    fn iso11_table_matches_relations() {
        let t = preset_table("iso11").unwrap();
        let b = ps(Param::Beta);
        let one = ParamScalar::one();
        let lf = LinearForm::single(1, b.clone());
        let (ch, sh) = (MomentumFunction::cosh(&lf), MomentumFunction::sinh(&lf));
        assert_eq!(t.get(X(0), X(1)), PhaseValue::coordinate(3, ih(-2, &b)));
        assert_eq!(t.get(X(3), X(1)), PhaseValue::coordinate(0, ih(-2, &b)));
        assert_eq!(t.get(P(0), X(1)), fun(MomentumFunction::momentum(3), ih(-1, &b)));
        assert_eq!(t.get(P(3), X(1)), fun(MomentumFunction::momentum(0), ih(-1, &b)));
        assert_eq!(t.get(P(0), X(3)), fun(sh.clone(), ih(1, &one)));
        assert_eq!(t.get(P(3), X(0)), fun(sh, ih(-1, &one)));
        assert_eq!(t.get(P(0), X(0)), fun(ch.clone(), ih(1, &one)));
        assert_eq!(t.get(P(3), X(3)), fun(ch, ih(-1, &one)));
    }

    #[test]
    fn trivial_table_is_canonical() {
        let t = preset_table("trivial").unwrap();
        for mu in 0..4u8 {
            for nu in 0..4u8 {
                let expected = if mu == nu {
                    PhaseValue::function(MomentumFunction::scalar(&ih(-metric(mu as usize), &ParamScalar::one())))
                } else {
                    PhaseValue::zero()
                };
                assert_eq!(t.get(P(mu), X(nu)), expected);
                assert!(t.get(X(mu), X(nu)).is_zero());
            }
        }
        assert!(check_jacobi(&t).pass);
        assert_eq!(classify_algebra(&t), ClassLabel::Abelian);
    }

    #[test]
    fn jacobi_and_classification() {
        let iso2 = preset_table("iso2").unwrap();
        assert!(check_jacobi(&iso2).pass);
        assert_eq!(classify_algebra(&iso2), ClassLabel::Iso2);
        let iso11 = preset_table("iso11").unwrap();
        assert!(check_jacobi(&iso11).pass);
        assert_eq!(classify_algebra(&iso11), ClassLabel::Iso11);
        let printed = check_jacobi(&iso2_printed_table().unwrap());
        assert!(!printed.pass);
        assert!(printed.entries.iter().any(|e| !e.pass && e.label == "(x0, x2, p1)"));
    }

    #[test]
    fn momenta_commute_and_table_is_antisymmetric() {
        for name in PRESETS {
            let t = preset_table(name).unwrap();
            for a in PhaseSpaceGenerator::all() {
                for b in PhaseSpaceGenerator::all() {
                    assert_eq!(t.get(a, b), t.get(b, a).neg(), "{name} [{a}, {b}]");
                    if !a.is_coordinate() && !b.is_coordinate() {
                        assert!(t.get(a, b).is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn json_and_text_output() {
        let t = preset_table("iso2").unwrap();
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        let rel = &v["relations"][0];
        assert_eq!(rel["pair"], serde_json::json!(["x0", "x1"]));
        assert_eq!(rel["value"], "2*i*hbar*alpha*x2");
        assert_eq!(rel["closed_form"], true);
        let text = t.to_text(false);
        assert!(text.contains("[p1,x1] = -i*hbar*cos(alpha*p0)"));
    }

    #[test]
    fn generator_names_round_trip() {
        for g in PhaseSpaceGenerator::all() {
            assert_eq!(g.to_string().parse::<PhaseSpaceGenerator>().unwrap(), g);
        }
        assert!("q1".parse::<PhaseSpaceGenerator>().is_err());
        assert!("x4".parse::<PhaseSpaceGenerator>().is_err());
    }
}
