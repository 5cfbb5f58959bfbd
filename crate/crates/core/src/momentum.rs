//! Commutative algebra of momentum functions.
//!
//! A [`MomentumFunction`] is a finite sum of `poly(params, P) * Π atom^k` where
//! each atom is `cos`, `sin`, `cosh`, `sinh` or `exp` of a linear form in the
//! momenta. Truncated series carry their order; closed forms carry none.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::scalar::{render_term, GaussRat, Mono, Param, ParamScalar, Poly, MOMENTUM_COUNT, PARAM_COUNT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FunctionError {
    #[error("truncation order mismatch: {0} vs {1}")]
    OrderMismatch(u32, u32),
    #[error("argument `{0}` carries no deformation parameter; its series does not truncate")]
    UntruncatableArgument(String),
    #[error("no closed form of the form c0 + c1*f(L) matches `{0}`")]
    NoMatch(String),
    #[error("ambiguous closed form; candidates: {}", .0.join(", "))]
    Ambiguous(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Transcendental {
    Cos,
    Sin,
    Cosh,
    Sinh,
    Exp,
}

impl Transcendental {
    pub const ALL: [Transcendental; 5] =
        [Transcendental::Cos, Transcendental::Sin, Transcendental::Cosh, Transcendental::Sinh, Transcendental::Exp];

    pub fn name(self) -> &'static str {
        match self {
            Transcendental::Cos => "cos",
            Transcendental::Sin => "sin",
            Transcendental::Cosh => "cosh",
            Transcendental::Sinh => "sinh",
            Transcendental::Exp => "exp",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Transcendental::ALL.into_iter().find(|t| t.name() == s)
    }

    /// Taylor coefficient of `L^k`.
    pub fn taylor(self, k: u32) -> GaussRat {
        let inv_fact = GaussRat::new(
            num_rational::BigRational::new(1.into(), factorial(k)),
            num_rational::BigRational::from_integer(0.into()),
        );
        let sign = |s: i64| &inv_fact * &GaussRat::from_int(s);
        match self {
            Transcendental::Exp => inv_fact,
            Transcendental::Cosh if k % 2 == 0 => inv_fact,
            Transcendental::Sinh if k % 2 == 1 => inv_fact,
            Transcendental::Cos if k % 2 == 0 => sign(if (k / 2) % 2 == 0 { 1 } else { -1 }),
            Transcendental::Sin if k % 2 == 1 => sign(if ((k - 1) / 2) % 2 == 0 { 1 } else { -1 }),
            _ => GaussRat::zero(),
        }
    }

    fn at_zero(self) -> GaussRat {
        match self {
            Transcendental::Sin | Transcendental::Sinh => GaussRat::zero(),
            _ => GaussRat::one(),
        }
    }

    /// Derivative as (sign, kind): d f(L) = sign * dL * kind(L).
    fn derivative(self) -> (i64, Transcendental) {
        match self {
            Transcendental::Cos => (-1, Transcendental::Sin),
            Transcendental::Sin => (1, Transcendental::Cos),
            Transcendental::Cosh => (1, Transcendental::Sinh),
            Transcendental::Sinh => (1, Transcendental::Cosh),
            Transcendental::Exp => (1, Transcendental::Exp),
        }
    }

    fn parity(self) -> Option<i64> {
        match self {
            Transcendental::Cos | Transcendental::Cosh => Some(1),
            Transcendental::Sin | Transcendental::Sinh => Some(-1),
            Transcendental::Exp => None,
        }
    }

    pub fn eval(self, z: Complex64) -> Complex64 {
        match self {
            Transcendental::Cos => z.cos(),
            Transcendental::Sin => z.sin(),
            Transcendental::Cosh => z.cosh(),
            Transcendental::Sinh => z.sinh(),
            Transcendental::Exp => z.exp(),
        }
    }
}

fn factorial(k: u32) -> num_bigint::BigInt {
    (1..=k as u64).fold(num_bigint::BigInt::from(1), |a, b| a * b)
}

/// `kind(arg)` with `arg` linear in the momenta.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub kind: Transcendental,
    pub arg: Poly,
}

impl Atom {
    /// Builds the atom, normalizing the sign of the argument for functions of
    /// definite parity. Returns the sign picked up.
    fn normalized(kind: Transcendental, arg: Poly) -> (i64, Atom) {
        if let (Some(parity), Some((_, c))) = (kind.parity(), arg.leading()) {
            if c.is_negative_leading() {
                return (parity, Atom { kind, arg: -&arg });
            }
        }
        (1, Atom { kind, arg })
    }

    /// The single momentum index this atom depends on, if only one.
    pub fn single_momentum(&self) -> Option<usize> {
        let mut found = None;
        for (m, _) in self.arg.terms() {
            let mu = (0..MOMENTUM_COUNT).find(|&mu| m.momentum_exp(mu) > 0)?;
            match found {
                None => found = Some(mu),
                Some(f) if f == mu => {}
                Some(_) => return None,
            }
        }
        found
    }

    pub fn render(&self, momentum_symbol: char) -> String {
        format!("{}({})", self.kind.name(), self.arg.render(momentum_symbol))
    }
}

type AtomProduct = Vec<(Atom, u32)>;

fn merge_products(a: &AtomProduct, b: &AtomProduct) -> AtomProduct {
    let mut map: BTreeMap<Atom, u32> = a.iter().cloned().collect();
    for (atom, e) in b {
        *map.entry(atom.clone()).or_insert(0) += e;
    }
    map.into_iter().collect()
}

/// Element of the commutative momentum-function algebra.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MomentumFunction {
    terms: BTreeMap<AtomProduct, Poly>,
    order: Option<u32>,
}

impl MomentumFunction {
    pub fn zero() -> Self {
        MomentumFunction::default()
    }

    pub fn one() -> Self {
        MomentumFunction::from_poly(Poly::one())
    }

    pub fn from_poly(p: Poly) -> Self {
        let mut f = MomentumFunction::zero();
        f.add_poly(Vec::new(), p);
        f
    }

    pub fn scalar(s: &ParamScalar) -> Self {
        MomentumFunction::from_poly(s.poly().clone())
    }

    pub fn momentum(mu: usize) -> Self {
        MomentumFunction::from_poly(Poly::momentum(mu))
    }

    /// `kind(arg)`; `arg` must be a linear form in momenta.
    pub fn atom(kind: Transcendental, arg: &LinearForm) -> Self {
        let (sign, atom) = Atom::normalized(kind, arg.to_poly());
        let mut f = MomentumFunction::zero();
        if atom.arg.is_zero() {
            f.add_poly(Vec::new(), Poly::constant(kind.at_zero()));
        } else {
            f.add_poly(vec![(atom, 1)], Poly::constant(GaussRat::from_int(sign)));
        }
        f
    }

    pub fn cos(arg: &LinearForm) -> Self {
        MomentumFunction::atom(Transcendental::Cos, arg)
    }

    pub fn sin(arg: &LinearForm) -> Self {
        MomentumFunction::atom(Transcendental::Sin, arg)
    }

    pub fn cosh(arg: &LinearForm) -> Self {
        MomentumFunction::atom(Transcendental::Cosh, arg)
    }

    pub fn sinh(arg: &LinearForm) -> Self {
        MomentumFunction::atom(Transcendental::Sinh, arg)
    }

    pub fn exp(arg: &LinearForm) -> Self {
        MomentumFunction::atom(Transcendental::Exp, arg)
    }

    pub fn order(&self) -> Option<u32> {
        self.order
    }

    pub fn is_series(&self) -> bool {
        self.order.is_some()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn has_atoms(&self) -> bool {
        self.terms.keys().any(|k| !k.is_empty())
    }

    /// Polynomial part (the whole function when it has no atoms).
    pub fn polynomial_part(&self) -> Poly {
        self.terms.get(&Vec::new()).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[(Atom, u32)], &Poly)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    fn add_poly(&mut self, key: AtomProduct, p: Poly) {
        let p = match self.order {
            Some(n) => p.truncate(n),
            None => p,
        };
        if p.is_zero() {
            return;
        }
        let entry = self.terms.entry(key.clone()).or_default();
        entry.add_assign_ref(&p);
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// Tag as a series truncated at `order`, expanding any atoms.
    pub fn with_order(&self, order: u32) -> Result<Self, FunctionError> {
        self.expand(order)
    }

    fn combine_order(a: Option<u32>, b: Option<u32>) -> Result<Option<u32>, FunctionError> {
        match (a, b) {
            (Some(x), Some(y)) if x != y => Err(FunctionError::OrderMismatch(x, y)),
            (Some(x), _) | (_, Some(x)) => Ok(Some(x)),
            (None, None) => Ok(None),
        }
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self, FunctionError> {
        let order = Self::combine_order(self.order, o.order)?;
        let lhs = self.coerce(order)?;
        let rhs = o.coerce(order)?;
        let mut out = lhs;
        for (k, p) in rhs.terms {
            out.add_poly(k, p);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, o: &Self) -> Result<Self, FunctionError> {
        self.checked_add(&o.neg())
    }

    pub fn checked_mul(&self, o: &Self) -> Result<Self, FunctionError> {
        let order = Self::combine_order(self.order, o.order)?;
        let lhs = self.coerce(order)?;
        let rhs = o.coerce(order)?;
        let mut out = MomentumFunction { terms: BTreeMap::new(), order };
        for (ka, pa) in &lhs.terms {
            for (kb, pb) in &rhs.terms {
                out.add_poly(merge_products(ka, kb), pa.mul_truncated(pb, order));
            }
        }
        Ok(out)
    }

    fn coerce(&self, order: Option<u32>) -> Result<Self, FunctionError> {
        match (order, self.order) {
            (Some(n), None) => self.expand(n),
            _ => Ok(self.clone()),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&ParamScalar::int(-1))
    }

    pub fn scale(&self, s: &ParamScalar) -> Self {
        let mut out = MomentumFunction { terms: BTreeMap::new(), order: self.order };
        for (k, p) in &self.terms {
            out.add_poly(k.clone(), p.mul_truncated(s.poly(), self.order));
        }
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = MomentumFunction { terms: BTreeMap::new(), order: self.order };
        for (k, p) in &self.terms {
            out.add_poly(k.clone(), p.conj());
        }
        out
    }

    /// Partial derivative with respect to `P_mu`.
    pub fn diff(&self, mu: usize) -> Self {
        let var = PARAM_COUNT + mu;
        let mut out = MomentumFunction { terms: BTreeMap::new(), order: self.order };
        for (key, poly) in &self.terms {
            out.add_poly(key.clone(), poly.diff(var));
            for (idx, (atom, power)) in key.iter().enumerate() {
                let dl = atom.arg.diff(var);
                if dl.is_zero() {
                    continue;
                }
                let (sign, dkind) = atom.kind.derivative();
                let mut rest = key.clone();
                if *power == 1 {
                    rest.remove(idx);
                } else {
                    rest[idx].1 -= 1;
                }
                let new_key = merge_products(&rest, &vec![(Atom { kind: dkind, arg: atom.arg.clone() }, 1)]);
                let coeff = GaussRat::from_int(sign * *power as i64);
                out.add_poly(new_key, (&dl * poly).scale(&coeff));
            }
        }
        out
    }

    /// Value at `P = 0`.
    pub fn eval_at_zero(&self) -> ParamScalar {
        let mut acc = Poly::zero();
        for (key, poly) in &self.terms {
            let mut c = GaussRat::one();
            for (atom, power) in key {
                for _ in 0..*power {
                    c = &c * &atom.kind.at_zero();
                }
            }
            if c.is_zero() {
                continue;
            }
            for (m, v) in poly.terms() {
                if m.momentum_degree() == 0 {
                    acc.add_term(*m, v * &c);
                }
            }
        }
        ParamScalar::from_poly(acc).expect("momentum-free by construction")
    }

    /// Rewrites `sin²` as `1 − cos²` and `sinh²` as `cosh² − 1` until no square
    /// of an odd atom remains. Identically vanishing combinations of atoms
    /// sharing one argument reduce to zero.
    pub fn reduce_identities(&self) -> Self {
        let mut out = self.clone();
        loop {
            let hit = out.terms.keys().find_map(|k| {
                k.iter()
                    .position(|(a, e)| *e >= 2 && matches!(a.kind, Transcendental::Sin | Transcendental::Sinh))
                    .map(|i| (k.clone(), i))
            });
            let Some((key, i)) = hit else { return out };
            let p = out.terms.remove(&key).expect("present");
            let (odd, e) = key[i].clone();
            let (even, sign) = match odd.kind {
                Transcendental::Sin => (Transcendental::Cos, -1),
                _ => (Transcendental::Cosh, 1),
            };
            let mut rest = key.clone();
            if e == 2 {
                rest.remove(i);
            } else {
                rest[i].1 = e - 2;
            }
            let square = vec![(Atom { kind: even, arg: odd.arg.clone() }, 2)];
            out.add_poly(rest.clone(), p.scale(&GaussRat::from_int(-sign)));
            out.add_poly(merge_products(&rest, &square), p.scale(&GaussRat::from_int(sign)));
        }
    }

    /// Exact Taylor truncation keeping deformation degree `<= order`.
    pub fn expand(&self, order: u32) -> Result<Self, FunctionError> {
        if let Some(own) = self.order {
            if own != order {
                return Err(FunctionError::OrderMismatch(own, order));
            }
            return Ok(self.clone());
        }
        let mut cache: BTreeMap<(Atom, u32), Poly> = BTreeMap::new();
        let mut acc = Poly::zero();
        for (key, poly) in &self.terms {
            let mut term = poly.truncate(order);
            for (atom, power) in key {
                let series = match cache.get(&(atom.clone(), *power)) {
                    Some(s) => s.clone(),
                    None => {
                        let s = atom_series(atom, order)?;
                        let mut p = Poly::one();
                        for _ in 0..*power {
                            p = p.mul_truncated(&s, Some(order));
                        }
                        cache.insert((atom.clone(), *power), p.clone());
                        p
                    }
                };
                term = term.mul_truncated(&series, Some(order));
            }
            acc.add_assign_ref(&term);
        }
        let mut out = MomentumFunction { terms: BTreeMap::new(), order: Some(order) };
        out.add_poly(Vec::new(), acc);
        Ok(out)
    }

    /// Drop the truncation tag after checking that no atoms remain.
    pub fn as_exact_polynomial(&self) -> Option<Poly> {
        (!self.has_atoms()).then(|| self.polynomial_part())
    }

    /// Closed form `c0 + c1*f(L)` whose expansion reproduces this series.
    pub fn recognize(&self) -> Result<MomentumFunction, FunctionError> {
        let order = self.order.unwrap_or_else(|| self.polynomial_part().max_deformation_degree().unwrap_or(0));
        let series = self.expand(order)?;
        let s = series.polynomial_part();
        let part = |k: u32| s.deformation_part(k);
        let s0 = part(0);
        let mut candidates: Vec<MomentumFunction> = Vec::new();
        let lowest = (1..=order).find(|&k| !part(k).is_zero());
        let mut consider = |kind: Transcendental, c1: Option<Poly>, arg: Option<Poly>| {
            let (Some(c1), Some(arg)) = (c1, arg) else { return };
            if !valid_coefficient(&c1) || !valid_argument(&arg) {
                return;
            }
            let c0 = match kind {
                Transcendental::Sin | Transcendental::Sinh => s0.clone(),
                _ => &s0 - &c1,
            };
            let Some(c0) = ParamScalar::from_poly(c0) else { return };
            let Some(c1) = ParamScalar::from_poly(c1) else { return };
            let lf = LinearForm::from_poly(&arg).expect("validated linear");
            let cand = MomentumFunction::scalar(&c0)
                .checked_add(&MomentumFunction::atom(kind, &lf).scale(&c1))
                .expect("exact operands");
            if cand.expand(order).ok().as_ref() == Some(&series) && !candidates.contains(&cand) {
                candidates.push(cand);
            }
        };
        match lowest {
            Some(1) => {
                let s1 = part(1);
                let s2 = part(2);
                let s3 = part(3);
                let cube = s1.pow(3);
                for (kind, sign) in [(Transcendental::Sin, -6), (Transcendental::Sinh, 6)] {
                    let c1sq = cube.exact_div(&s3.scale(&GaussRat::from_int(sign)));
                    let c1 = c1sq.and_then(|q| q.sqrt());
                    let arg = c1.as_ref().and_then(|c| s1.exact_div(c));
                    consider(kind, c1, arg);
                }
                let c1 = s1.pow(2).exact_div(&s2.scale(&GaussRat::from_int(2)));
                let arg = c1.as_ref().and_then(|c| s1.exact_div(c));
                consider(Transcendental::Exp, c1, arg);
            }
            Some(2) => {
                let s2 = part(2);
                let s4 = part(4);
                let c1 = s2.pow(2).exact_div(&s4.scale(&GaussRat::from_int(6)));
                for (kind, sign) in [(Transcendental::Cos, -2), (Transcendental::Cosh, 2)] {
                    let arg = c1
                        .as_ref()
                        .and_then(|c| s2.scale(&GaussRat::from_int(sign)).exact_div(c).and_then(|q| q.sqrt()));
                    consider(kind, c1.clone(), arg);
                }
            }
            _ => {}
        }
        match candidates.len() {
            0 => Err(FunctionError::NoMatch(self.render('P'))),
            1 => Ok(candidates.pop().expect("one candidate")),
            _ => Err(FunctionError::Ambiguous(candidates.iter().map(|c| c.render('P')).collect())),
        }
    }

    /// Recognized closed form, or the polynomial itself when it has
    /// deformation degree at most one; otherwise the series unchanged.
    pub fn present(&self) -> (MomentumFunction, bool) {
        if !self.is_series() {
            return (self.clone(), true);
        }
        if let Ok(cf) = self.recognize() {
            return (cf, true);
        }
        let poly = self.polynomial_part();
        if !self.has_atoms() && poly.max_deformation_degree().unwrap_or(0) <= 1 {
            return (MomentumFunction::from_poly(poly), true);
        }
        (self.clone(), false)
    }

    /// Numeric value at momentum `p` given parameter values.
    pub fn eval(&self, params: &BTreeMap<Param, f64>, p: [f64; MOMENTUM_COUNT]) -> Option<Complex64> {
        let values = |idx: usize| -> Option<Complex64> {
            if idx >= PARAM_COUNT {
                Some(Complex64::new(p[idx - PARAM_COUNT], 0.0))
            } else {
                params.get(&Param::ALL[idx]).map(|&v| Complex64::new(v, 0.0))
            }
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (key, poly) in &self.terms {
            let mut t = poly.eval_complex(&values)?;
            for (atom, power) in key {
                let z = atom.arg.eval_complex(&values)?;
                t *= atom.kind.eval(z).powu(*power);
            }
            acc += t;
        }
        Some(acc)
    }

    /// `substitute`, refusing to put a plain number into a truncated series
    /// (the truncation order would lose its meaning).
    pub fn try_substitute(&self, param: Param, value: &ParamScalar) -> Result<Self, FunctionError> {
        let mentions = self.terms.iter().any(|(key, poly)| {
            poly.terms().any(|(m, _)| m.0[param.index()] > 0)
                || key.iter().any(|(a, _)| a.arg.terms().any(|(m, _)| m.0[param.index()] > 0))
        });
        if mentions && self.order.is_some() && value.min_deformation_degree() == Some(0) {
            return Err(FunctionError::UntruncatableArgument(format!("{} = {}", param.name(), value.render())));
        }
        Ok(self.substitute(param, value))
    }

    /// Substitute a parameter by a parameter-ring value.
    pub fn substitute(&self, param: Param, value: &ParamScalar) -> Self {
        let mut out = MomentumFunction::zero();
        for (key, poly) in &self.terms {
            let mut atoms = MomentumFunction::from_poly(poly.substitute(param.index(), value.poly()));
            for (atom, power) in key {
                let lf = LinearForm::from_poly(&atom.arg.substitute(param.index(), value.poly()))
                    .expect("substitution keeps linearity");
                for _ in 0..*power {
                    atoms = atoms.checked_mul(&MomentumFunction::atom(atom.kind, &lf)).expect("exact");
                }
            }
            out = out.checked_add(&atoms).expect("exact");
        }
        match self.order {
            Some(n) => out.expand(n).expect("series stays truncatable"),
            None => out,
        }
    }

    /// Canonical rendering: polynomial part first, then atom products.
    pub fn render(&self, momentum_symbol: char) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        let mut first = true;
        for (key, poly) in &self.terms {
            let atoms: Vec<String> =
                key.iter()
                    .map(|(a, e)| {
                        if *e == 1 {
                            a.render(momentum_symbol)
                        } else {
                            format!("{}^{}", a.render(momentum_symbol), e)
                        }
                    })
                    .collect();
            for (m, c) in poly.terms() {
                let mut factors = Vec::new();
                if !m.is_one() {
                    factors.push(Poly::term(*m, GaussRat::one()).render(momentum_symbol));
                }
                factors.extend(atoms.iter().cloned());
                let (neg, body) = render_term(c, &factors);
                if first {
                    if neg {
                        out.push('-');
                    }
                    first = false;
                } else {
                    out.push_str(if neg { " - " } else { " + " });
                }
                out.push_str(&body);
            }
        }
        if let Some(n) = self.order {
            out.push_str(&format!(" + O({})", n + 1));
        }
        out
    }
}

fn valid_coefficient(c: &Poly) -> bool {
    !c.is_zero() && c.terms().all(|(m, _)| m.momentum_degree() == 0 && m.deformation_degree() == 0)
}

fn valid_argument(arg: &Poly) -> bool {
    !arg.is_zero() && arg.terms().all(|(m, c)| m.momentum_degree() == 1 && m.deformation_degree() >= 1 && c.is_real())
}

fn atom_series(atom: &Atom, order: u32) -> Result<Poly, FunctionError> {
    if atom.arg.min_deformation_degree().unwrap_or(1) == 0 {
        return Err(FunctionError::UntruncatableArgument(atom.arg.render('P')));
    }
    let mut acc = Poly::zero();
    let mut power = Poly::one();
    for k in 0..=order {
        let c = atom.kind.taylor(k);
        if !c.is_zero() {
            acc.add_assign_ref(&power.scale(&c));
        }
        power = power.mul_truncated(&atom.arg, Some(order));
        if power.is_zero() {
            break;
        }
    }
    Ok(acc)
}

impl fmt::Debug for MomentumFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render('P'))
    }
}

impl std::ops::Add for &MomentumFunction {
    type Output = MomentumFunction;
    /// Panics on a truncation-order mismatch; use `checked_add` otherwise.
    fn add(self, o: &MomentumFunction) -> MomentumFunction {
        self.checked_add(o).expect("truncation order mismatch")
    }
}

impl std::ops::Sub for &MomentumFunction {
    type Output = MomentumFunction;
    fn sub(self, o: &MomentumFunction) -> MomentumFunction {
        self.checked_sub(o).expect("truncation order mismatch")
    }
}

impl std::ops::Mul for &MomentumFunction {
    type Output = MomentumFunction;
    fn mul(self, o: &MomentumFunction) -> MomentumFunction {
        self.checked_mul(o).expect("truncation order mismatch")
    }
}

/// `Σ_μ c_μ P_μ` with parameter-ring coefficients.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinearForm(pub [ParamScalar; MOMENTUM_COUNT]);

impl LinearForm {
    pub fn zero() -> Self {
        LinearForm::default()
    }

    pub fn single(mu: usize, c: ParamScalar) -> Self {
        let mut l = LinearForm::zero();
        l.0[mu] = c;
        l
    }

    pub fn plus(mut self, mu: usize, c: ParamScalar) -> Self {
        self.0[mu] = &self.0[mu] + &c;
        self
    }

    pub fn to_poly(&self) -> Poly {
        let mut p = Poly::zero();
        for (mu, c) in self.0.iter().enumerate() {
            p.add_assign_ref(&c.poly().mul_term(&Mono::momentum(mu), &GaussRat::one()));
        }
        p
    }

    pub fn from_poly(p: &Poly) -> Option<Self> {
        let mut l = LinearForm::zero();
        for (m, c) in p.terms() {
            if m.momentum_degree() != 1 {
                return None;
            }
            let mu = (0..MOMENTUM_COUNT).find(|&mu| m.momentum_exp(mu) == 1)?;
            let coeff = ParamScalar::from_poly(Poly::term(m.param_part(), c.clone()))?;
            l.0[mu] = &l.0[mu] + &coeff;
        }
        Some(l)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }
}

impl fmt::Debug for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_poly().render('P'))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn par(p: Param) -> ParamScalar {
        ParamScalar::param(p)
    }

    fn tilde_a() -> LinearForm {
        LinearForm::single(0, par(Param::Delta0M)).plus(3, par(Param::Delta3M))
    }

    #[test]
    fn pythagorean_rewrites() {
        let l = LinearForm::single(0, ParamScalar::param(Param::Alpha));
        let (c, s) = (MomentumFunction::cos(&l), MomentumFunction::sin(&l));
        let one = MomentumFunction::one();
        let f = &(&(&c * &c) + &(&s * &s)) - &one;
        assert!(f.reduce_identities().is_zero());
        let (ch, sh) = (MomentumFunction::cosh(&l), MomentumFunction::sinh(&l));
        let g = &(&(&ch * &ch) - &(&sh * &sh)) - &one;
        assert!(g.reduce_identities().is_zero());
        let s3 = &(&s * &s) * &s;
        assert_eq!(s3.reduce_identities(), &s - &(&(&c * &c) * &s));
        assert!(!s.reduce_identities().is_zero());
    }

    #[test]
    fn chain_rule_examples() {
        let alpha_p0 = LinearForm::single(0, par(Param::Alpha));
        let d = MomentumFunction::cos(&alpha_p0).diff(0);
        let expected = MomentumFunction::sin(&alpha_p0).scale(&-par(Param::Alpha));
        assert_eq!(d, expected);

        let beta_p1 = LinearForm::single(1, par(Param::Beta));
        let d = MomentumFunction::sinh(&beta_p1).diff(1);
        assert_eq!(d, MomentumFunction::cosh(&beta_p1).scale(&par(Param::Beta)));

        assert!(MomentumFunction::cos(&tilde_a()).diff(2).is_zero());
    }

    #[test]
    fn expand_cos_order_three() {
        let a = MomentumFunction::from_poly(tilde_a().to_poly());
        let expected = &MomentumFunction::one() - &(&a * &a).scale(&ParamScalar::ratio(1, 2));
        let got = MomentumFunction::cos(&tilde_a()).expand(3).unwrap();
        assert_eq!(got.polynomial_part(), expected.polynomial_part());
        assert_eq!(got.order(), Some(3));
    }

    #[test]
    fn recognize_cos_and_sinh() {
        let a = MomentumFunction::from_poly(tilde_a().to_poly());
        let a2 = &a * &a;
        let series = &(&MomentumFunction::one() - &a2.scale(&ParamScalar::ratio(1, 2)))
            + &(&a2 * &a2).scale(&ParamScalar::ratio(1, 24));
        let series = series.expand(5).unwrap();
        assert_eq!(series.recognize().unwrap(), MomentumFunction::cos(&tilde_a()));

        let bp = MomentumFunction::from_poly(LinearForm::single(1, par(Param::Beta)).to_poly());
        let series = &bp + &(&(&bp * &bp) * &bp).scale(&ParamScalar::ratio(1, 6));
        let series = series.expand(4).unwrap();
        let beta_p1 = LinearForm::single(1, par(Param::Beta));
        assert_eq!(series.recognize().unwrap(), MomentumFunction::sinh(&beta_p1));
    }

    /// Brute-force oracle: Taylor coefficients of sinh are 1/k! for odd k, so
    /// the series above must agree with a term-by-term construction.
    #[test]
    fn sinh_series_matches_brute_force_coefficients() {
        let beta_p1 = LinearForm::single(1, par(Param::Beta));
        let got = MomentumFunction::sinh(&beta_p1).expand(4).unwrap().polynomial_part();
        let mut expected = Poly::zero();
        let bp = beta_p1.to_poly();
        let mut fact = 1i64;
        for k in 1..=4u32 {
            fact *= k as i64;
            if k % 2 == 1 {
                expected.add_assign_ref(&bp.pow(k).scale(&GaussRat::from_ratio(1, fact)));
            }
        }
        assert_eq!(got, expected);
    }

    #[test]
    fn recognize_with_coefficients() {
        let hbar = par(Param::Hbar);
        let c1 = &ParamScalar::i() * &hbar;
        let f =
            &MomentumFunction::scalar(&ParamScalar::int(3)) + &MomentumFunction::cos(&tilde_a()).scale(&-c1.clone());
        let series = f.expand(4).unwrap();
        assert_eq!(series.recognize().unwrap(), f);

        let g = MomentumFunction::exp(&LinearForm::single(2, par(Param::Alpha))).scale(&hbar);
        assert_eq!(g.expand(4).unwrap().recognize().unwrap(), g);
    }

    #[test]
    fn recognize_rejects_polynomials() {
        let p = MomentumFunction::from_poly(tilde_a().to_poly()).expand(4).unwrap();
        assert!(matches!(p.recognize(), Err(FunctionError::NoMatch(_))));
        let (presented, closed) = p.present();
        assert!(closed);
        assert_eq!(presented.polynomial_part(), tilde_a().to_poly());
    }

    #[test]
    fn order_mismatch_is_an_error() {
        let a = MomentumFunction::cos(&tilde_a()).expand(3).unwrap();
        let b = MomentumFunction::cos(&tilde_a()).expand(4).unwrap();
        assert_eq!(a.checked_add(&b), Err(FunctionError::OrderMismatch(3, 4)));
        assert!(a.checked_mul(&b).is_err());
    }

    #[test]
    fn untruncatable_argument() {
        let f = MomentumFunction::cos(&LinearForm::single(0, ParamScalar::one()));
        assert!(matches!(f.expand(3), Err(FunctionError::UntruncatableArgument(_))));
    }

    #[test]
    fn odd_functions_normalize_sign() {
        let neg = LinearForm::single(0, -par(Param::Alpha));
        let pos = LinearForm::single(0, par(Param::Alpha));
        assert_eq!(MomentumFunction::sin(&neg), MomentumFunction::sin(&pos).neg());
        assert_eq!(MomentumFunction::cosh(&neg), MomentumFunction::cosh(&pos));
        assert_eq!(MomentumFunction::sin(&LinearForm::zero()), MomentumFunction::zero());
    }

    fn arb_function() -> impl Strategy<Value = MomentumFunction> {
        let kinds = prop::sample::select(Transcendental::ALL.to_vec());
        let term = (kinds, 0usize..4, 0usize..4, 0u32..3, -2i64..3);
        prop::collection::vec(term, 1..4).prop_map(|ts| {
            let params = [Param::Alpha, Param::Beta, Param::Delta0M, Param::Xi1M];
            let mut acc = MomentumFunction::zero();
            for (kind, mu, k, e, c) in ts {
                let lf = LinearForm::single(mu, par(params[k])).plus((mu + 1) % 4, par(params[(k + 1) % 4]));
                let mono = MomentumFunction::momentum(mu);
                let mut t = MomentumFunction::atom(kind, &lf).scale(&ParamScalar::int(c));
                for _ in 0..e {
                    t = &t * &mono;
                }
                acc = &acc + &t;
            }
            acc
        })
    }

    proptest! {
        #[test]
        fn mixed_partials_commute(f in arb_function(), mu in 0usize..4, nu in 0usize..4) {
            prop_assert_eq!(f.diff(mu).diff(nu), f.diff(nu).diff(mu));
        }

        #[test]
        fn expansions_agree_on_common_orders(f in arb_function(), n in 1u32..5, m in 1u32..5) {
            let low = n.min(m);
            let a = f.expand(n).unwrap().polynomial_part().truncate(low);
            let b = f.expand(m).unwrap().polynomial_part().truncate(low);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn expansion_commutes_with_differentiation(f in arb_function(), mu in 0usize..4) {
            // d/dP lowers no deformation degree, so truncation commutes with it.
            let lhs = f.diff(mu).expand(4).unwrap();
            let rhs = MomentumFunction::from_poly(f.expand(4).unwrap().polynomial_part().diff(PARAM_COUNT + mu))
                .expand(4).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
