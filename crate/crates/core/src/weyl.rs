//! Heisenberg–Weyl algebra with momentum-function coefficients.
//!
//! Elements are sums `F(p̂) x̂^a` with all momentum dependence to the left.
//! Products are normalized with `[x̂_μ, F(p̂)] = iħ g_{μμ} ∂F/∂p̂_μ`, which
//! closes without truncation.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebra::metric;
use crate::duality::{preset_table, DualityError, PhaseSpaceGenerator, PhaseValue, RelationTable};
use crate::momentum::{LinearForm, MomentumFunction};
use crate::report::Report;
use crate::scalar::{GaussRat, Param, ParamScalar, MOMENTUM_COUNT};

/// Exponents of `x̂0..x̂3`.
pub type XPower = [u8; MOMENTUM_COUNT];

const IDENTITY_ORDER: u32 = 8;

#[derive(Clone, PartialEq, Eq, Default)]
pub struct WeylExpression {
    terms: BTreeMap<XPower, MomentumFunction>,
}

fn i_hbar_g(mu: usize) -> ParamScalar {
    ParamScalar::param(Param::Hbar).scale(&GaussRat::from_parts((0, 1), (metric(mu), 1)))
}

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, j| acc * (n - j) as i64 / (j + 1) as i64)
}

impl WeylExpression {
    pub fn zero() -> Self {
        WeylExpression::default()
    }

    pub fn function(f: MomentumFunction) -> Self {
        let mut e = WeylExpression::zero();
        e.add_term([0; MOMENTUM_COUNT], f);
        e
    }

    pub fn scalar(c: ParamScalar) -> Self {
        WeylExpression::function(MomentumFunction::scalar(&c))
    }

    /// `x̂_μ`.
    pub fn x(mu: usize) -> Self {
        let mut a = [0; MOMENTUM_COUNT];
        a[mu] = 1;
        let mut e = WeylExpression::zero();
        e.add_term(a, MomentumFunction::one());
        e
    }

    /// `p̂_μ`.
    pub fn p(mu: usize) -> Self {
        WeylExpression::function(MomentumFunction::momentum(mu))
    }

    /// `F(p̂) x̂^a`.
    pub fn monomial(f: MomentumFunction, a: XPower) -> Self {
        let mut e = WeylExpression::zero();
        e.add_term(a, f);
        e
    }

    pub fn terms(&self) -> impl Iterator<Item = (&XPower, &MomentumFunction)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, a: XPower, f: MomentumFunction) {
        if f.is_zero() {
            return;
        }
        let entry = self.terms.entry(a).or_default();
        *entry = entry.checked_add(&f).expect("exact coefficients");
        if entry.is_zero() {
            self.terms.remove(&a);
        }
    }

    pub fn add(&self, o: &WeylExpression) -> WeylExpression {
        let mut out = self.clone();
        for (a, f) in &o.terms {
            out.add_term(*a, f.clone());
        }
        out
    }

    pub fn sub(&self, o: &WeylExpression) -> WeylExpression {
        self.add(&o.scale(&ParamScalar::int(-1)))
    }

    pub fn scale(&self, c: &ParamScalar) -> WeylExpression {
        let mut out = WeylExpression::zero();
        for (a, f) in &self.terms {
            out.add_term(*a, f.scale(c));
        }
        out
    }

    /// Normal-ordered product.
    pub fn mul(&self, o: &WeylExpression) -> WeylExpression {
        let mut out = WeylExpression::zero();
        for (a, f) in &self.terms {
            for (b, g) in &o.terms {
                for (c, h) in move_past(a, g) {
                    let mut power = c;
                    for mu in 0..MOMENTUM_COUNT {
                        power[mu] += b[mu];
                    }
                    out.add_term(power, f.checked_mul(&h).expect("exact coefficients"));
                }
            }
        }
        out
    }

    /// Substitute a parameter everywhere.
    pub fn substitute(&self, p: Param, value: &ParamScalar) -> WeylExpression {
        let mut out = WeylExpression::zero();
        for (a, f) in &self.terms {
            out.add_term(*a, f.substitute(p, value));
        }
        out
    }

    /// Zero after the Pythagorean rewrites, with no series involved.
    pub fn vanishes_exactly(&self) -> bool {
        self.terms.values().all(|f| f.reduce_identities().is_zero())
    }

    /// Zero exactly, as a series through order 8, or numerically when the
    /// coefficients carry no deformation parameter to expand in.
    pub fn vanishes(&self) -> bool {
        self.terms.values().all(|f| {
            if f.reduce_identities().is_zero() {
                return true;
            }
            match f.expand(IDENTITY_ORDER) {
                Ok(s) => s.is_zero(),
                Err(_) => vanishes_numerically(f),
            }
        })
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        let mut ordered: Vec<_> = self.terms.iter().collect();
        ordered.sort_by_key(|(a, _)| (a.iter().map(|&e| e as u32).sum::<u32>(), std::cmp::Reverse(**a)));
        for (a, f) in ordered {
            let xs: Vec<String> = (0..MOMENTUM_COUNT)
                .filter(|&mu| a[mu] > 0)
                .map(|mu| if a[mu] == 1 { format!("xh{mu}") } else { format!("xh{mu}^{}", a[mu]) })
                .collect();
            let coeff = f.render('p');
            let term = if xs.is_empty() {
                coeff
            } else if coeff == "1" {
                xs.join("*")
            } else if coeff == "-1" {
                format!("-{}", xs.join("*"))
            } else if f.terms().count() > 1 || coeff.contains(" + ") || coeff.contains(" - ") {
                format!("({coeff})*{}", xs.join("*"))
            } else {
                format!("{coeff}*{}", xs.join("*"))
            };
            if out.is_empty() {
                out = term;
            } else if let Some(rest) = term.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(&term);
            }
        }
        out
    }
}

impl fmt::Debug for WeylExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// `x̂^a G = Σ G_c x̂^c`.
fn move_past(a: &XPower, g: &MomentumFunction) -> Vec<(XPower, MomentumFunction)> {
    let mut acc: Vec<(XPower, MomentumFunction)> = vec![([0; MOMENTUM_COUNT], g.clone())];
    for mu in (0..MOMENTUM_COUNT).rev() {
        let n = a[mu] as u32;
        if n == 0 {
            continue;
        }
        let mut next = Vec::new();
        for (power, h) in acc {
            let mut d = h;
            for k in 0..=n {
                if d.is_zero() {
                    break;
                }
                let mut p = power;
                p[mu] += (n - k) as u8;
                next.push((p, d.scale(&ParamScalar::int(binomial(n, k)))));
                d = d.diff(mu).scale(&i_hbar_g(mu));
            }
        }
        acc = next;
    }
    acc
}

fn vanishes_numerically(f: &MomentumFunction) -> bool {
    let params: BTreeMap<Param, f64> =
        Param::ALL.iter().enumerate().map(|(k, &p)| (p, 0.3 + 0.17 * k as f64)).collect();
    let points = [[0.1, -0.4, 0.7, 0.25], [1.3, 0.2, -0.9, -1.1], [-0.6, 0.8, 0.05, 0.5]];
    points.iter().all(|&p| f.eval(&params, p).map(|z: Complex64| z.norm() < 1e-9).unwrap_or(false))
}

/// `E₁E₂ − E₂E₁`.
pub fn weyl_commutator(a: &WeylExpression, b: &WeylExpression) -> WeylExpression {
    a.mul(b).sub(&b.mul(a))
}

/// Realization presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealizationPreset {
    Iso2,
    Iso11,
}

impl RealizationPreset {
    pub fn name(self) -> &'static str {
        match self {
            RealizationPreset::Iso2 => "iso2",
            RealizationPreset::Iso11 => "iso11",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "iso2" => Some(RealizationPreset::Iso2),
            "iso11" => Some(RealizationPreset::Iso11),
            _ => None,
        }
    }

    pub fn parameter(self) -> Param {
        match self {
            RealizationPreset::Iso2 => Param::Alpha,
            RealizationPreset::Iso11 => Param::Beta,
        }
    }
}

/// Realized phase-space generators, indexed `x0..x3, p0..p3`.
#[derive(Debug, Clone)]
pub struct Realization {
    pub preset: RealizationPreset,
    pub parameter: ParamScalar,
    map: BTreeMap<PhaseSpaceGenerator, WeylExpression>,
}

impl Realization {
    pub fn get(&self, g: PhaseSpaceGenerator) -> &WeylExpression {
        &self.map[&g]
    }

    /// Image of `F(p) + Σ c_λ x_λ`.
    pub fn apply(&self, v: &PhaseValue) -> WeylExpression {
        let mut out = WeylExpression::function(v.function.clone());
        for (lambda, c) in v.linear.iter().enumerate() {
            if !c.is_zero() {
                out = out.add(&self.get(PhaseSpaceGenerator::X(lambda as u8)).scale(c));
            }
        }
        out
    }
}

/// Operator realization of a preset with the deformation parameter set to
/// `value` (the symbol itself when `None`).
pub fn realize(preset: RealizationPreset, value: Option<ParamScalar>) -> Realization {
    use PhaseSpaceGenerator::{P, X};
    let c = value.unwrap_or_else(|| ParamScalar::param(preset.parameter()));
    let mut map = BTreeMap::new();
    for mu in 0..MOMENTUM_COUNT {
        map.insert(X(mu as u8), WeylExpression::x(mu));
        map.insert(P(mu as u8), WeylExpression::p(mu));
    }
    let mono = |f: MomentumFunction, mu: usize| {
        let mut a = [0; MOMENTUM_COUNT];
        a[mu] = 1;
        WeylExpression::monomial(f, a)
    };
    let pm = |mu: usize| MomentumFunction::momentum(mu).scale(&c);
    match preset {
        RealizationPreset::Iso2 => {
            let angle = LinearForm::single(0, c.clone());
            let (cs, sn) = (MomentumFunction::cos(&angle), MomentumFunction::sin(&angle));
            map.insert(X(0), WeylExpression::x(0).add(&mono(pm(2), 1)).sub(&mono(pm(1), 2)));
            map.insert(X(1), mono(cs.clone(), 1).sub(&mono(sn.clone(), 2)));
            map.insert(X(2), mono(sn, 1).add(&mono(cs, 2)));
        }
        RealizationPreset::Iso11 => {
            let rapidity = LinearForm::single(1, c.clone());
            let (ch, sh) = (MomentumFunction::cosh(&rapidity), MomentumFunction::sinh(&rapidity));
            map.insert(X(1), WeylExpression::x(1).add(&mono(pm(0), 3)).sub(&mono(pm(3), 0)));
            map.insert(X(0), mono(ch.clone(), 0).add(&mono(sh.clone(), 3)));
            map.insert(X(3), mono(sh, 0).add(&mono(ch, 3)));
        }
    }
    Realization { preset, parameter: c, map }
}

/// Target table for a realization: the derived preset table with the
/// parameter substituted.
pub fn target_table(r: &Realization) -> Result<RelationTable, DualityError> {
    let mut table = preset_table(r.preset.name())?;
    let p = r.preset.parameter();
    if r.parameter != ParamScalar::param(p) {
        table = table.substitute(p, &r.parameter)?;
    }
    Ok(table)
}

/// Every commutator of realized generators equals the realized table entry.
pub fn verify_realization(r: &Realization) -> Result<Report, DualityError> {
    let table = target_table(r)?;
    let pairs = RelationTable::display_pairs();
    let results: Vec<_> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let lhs = weyl_commutator(r.get(a), r.get(b));
            let rhs = r.apply(&table.get(a, b));
            let residual = lhs.sub(&rhs);
            (a, b, lhs, residual)
        })
        .collect();
    let mut report = Report::new(format!("realization: {}", r.preset.name()), None);
    for (a, b, lhs, residual) in results {
        let exact = residual.vanishes_exactly();
        let ok = exact || residual.vanishes();
        if ok && !exact {
            report.note(format!("[{a}, {b}] vanishes only as a series or numerically"));
        }
        let detail = if ok { lhs.render() } else { format!("residual {}", residual.render()) };
        report.push(format!("[{a}, {b}]"), detail, ok);
    }
    Ok(report)
}

/// `cos² + sin² − 1` resp. `cosh² − sinh² − 1` of the realization matrix,
/// expanded to `order`.
pub fn determinant_residual(preset: RealizationPreset, order: u32) -> MomentumFunction {
    let c = ParamScalar::param(preset.parameter());
    let (a, b, sign) = match preset {
        RealizationPreset::Iso2 => {
            let l = LinearForm::single(0, c);
            (MomentumFunction::cos(&l), MomentumFunction::sin(&l), 1)
        }
        RealizationPreset::Iso11 => {
            let l = LinearForm::single(1, c);
            (MomentumFunction::cosh(&l), MomentumFunction::sinh(&l), -1)
        }
    };
    let det = a
        .checked_mul(&a)
        .and_then(|aa| aa.checked_add(&b.checked_mul(&b)?.scale(&ParamScalar::int(sign))))
        .and_then(|d| d.checked_sub(&MomentumFunction::one()))
        .expect("exact");
    det.expand(order).expect("truncatable")
}
