//! Universal enveloping algebra of the Poincaré algebra.
//!
//! Elements are stored in the PBW basis: sorted words over the ten base
//! generators with momenta first (`P0 < P1 < P2 < P3 < M1 < … < N3`). Products
//! are brought back to normal order by bracket-mediated swaps. The bracket
//! conventions are carried by [`PoincareAlgebra`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::momentum::MomentumFunction;
use crate::scalar::{GaussRat, Mono, ParamScalar, Poly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("tensor arity mismatch: {0} vs {1}")]
    ArityMismatch(usize, usize),
    #[error("truncation order mismatch: {0} vs {1}")]
    OrderMismatch(u32, u32),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("leg contains a Lorentz generator: {0}")]
    NotTranslation(String),
}

/// Base generators in PBW order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Generator {
    P0,
    P1,
    P2,
    P3,
    M1,
    M2,
    M3,
    N1,
    N2,
    N3,
}

impl Generator {
    pub const ALL: [Generator; 10] = [
        Generator::P0,
        Generator::P1,
        Generator::P2,
        Generator::P3,
        Generator::M1,
        Generator::M2,
        Generator::M3,
        Generator::N1,
        Generator::N2,
        Generator::N3,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Generator {
        Generator::ALL[i]
    }

    pub fn momentum(mu: usize) -> Generator {
        Generator::ALL[mu]
    }

    /// `M_k`, 1-based.
    pub fn rotation(k: usize) -> Generator {
        Generator::ALL[3 + k]
    }

    /// `N_k`, 1-based.
    pub fn boost(k: usize) -> Generator {
        Generator::ALL[6 + k]
    }

    pub fn is_translation(self) -> bool {
        self.index() < 4
    }

    pub fn name(self) -> &'static str {
        ["P0", "P1", "P2", "P3", "M1", "M2", "M3", "N1", "N2", "N3"][self.index()]
    }

    pub fn from_name(s: &str) -> Result<Generator, AlgebraError> {
        Generator::ALL.into_iter().find(|g| g.name() == s).ok_or_else(|| AlgebraError::UnknownGenerator(s.to_string()))
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sign choices left open by the Lie algebra axioms.
///
/// `[M_{μν}, P_ρ] = lorentz·i(g_{νρ}P_μ − g_{μρ}P_ν)` and the matching Lorentz
/// relations, with `M3 = M_12`, `M1 = M_23`, `M2 = M_31`, and
/// `N_k = boost·M_{k0}`. Metric `(−1, 1, 1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Conventions {
    pub lorentz_sign: i8,
    pub boost_sign: i8,
}

impl Conventions {
    /// Values fixed by calibrating the momentum-sector twisted coproducts.
    pub const CALIBRATED: Conventions = Conventions { lorentz_sign: 1, boost_sign: -1 };

    pub fn all() -> [Conventions; 4] {
        [(1, 1), (1, -1), (-1, 1), (-1, -1)].map(|(l, b)| Conventions { lorentz_sign: l, boost_sign: b })
    }
}

pub fn metric(mu: usize) -> i64 {
    if mu == 0 {
        -1
    } else {
        1
    }
}

fn metric2(a: usize, b: usize) -> i64 {
    if a == b {
        metric(a)
    } else {
        0
    }
}

/// Linear combination of base generators.
type GenCombo = Vec<(GaussRat, Generator)>;

/// Express `M_{μν}` in the generator basis.
fn lorentz_basis(mu: usize, nu: usize, conv: Conventions) -> Option<(i64, Generator)> {
    let b = conv.boost_sign as i64;
    match (mu, nu) {
        (a, c) if a == c => None,
        (2, 3) => Some((1, Generator::M1)),
        (3, 2) => Some((-1, Generator::M1)),
        (3, 1) => Some((1, Generator::M2)),
        (1, 3) => Some((-1, Generator::M2)),
        (1, 2) => Some((1, Generator::M3)),
        (2, 1) => Some((-1, Generator::M3)),
        (k, 0) => Some((b, Generator::boost(k))),
        (0, k) => Some((-b, Generator::boost(k))),
        _ => unreachable!(),
    }
}

fn generator_as_lorentz(g: Generator, conv: Conventions) -> Option<(i64, usize, usize)> {
    let b = conv.boost_sign as i64;
    match g {
        Generator::M1 => Some((1, 2, 3)),
        Generator::M2 => Some((1, 3, 1)),
        Generator::M3 => Some((1, 1, 2)),
        Generator::N1 => Some((b, 1, 0)),
        Generator::N2 => Some((b, 2, 0)),
        Generator::N3 => Some((b, 3, 0)),
        _ => None,
    }
}

fn push_combo(out: &mut BTreeMap<Generator, GaussRat>, c: GaussRat, g: Generator) {
    let e = out.entry(g).or_insert_with(GaussRat::zero);
    *e = &*e + &c;
}

fn compute_bracket(a: Generator, b: Generator, conv: Conventions) -> GenCombo {
    let s = GaussRat::new(
        num_rational::BigRational::from_integer(0.into()),
        num_rational::BigRational::from_integer((conv.lorentz_sign as i64).into()),
    );
    let mut out: BTreeMap<Generator, GaussRat> = BTreeMap::new();
    match (generator_as_lorentz(a, conv), generator_as_lorentz(b, conv)) {
        (None, None) => {}
        (Some((sa, mu, nu)), None) => {
            let rho = b.index();
            let pre = &s * &GaussRat::from_int(sa);
            push_combo(&mut out, &pre * &GaussRat::from_int(metric2(nu, rho)), Generator::momentum(mu));
            push_combo(&mut out, &pre * &GaussRat::from_int(-metric2(mu, rho)), Generator::momentum(nu));
        }
        (None, Some(_)) => {
            return compute_bracket(b, a, conv).into_iter().map(|(c, g)| (-&c, g)).collect();
        }
        (Some((sa, mu, nu)), Some((sb, rho, sigma))) => {
            let pre = &s * &GaussRat::from_int(sa * sb);
            let terms = [
                (metric2(nu, rho), mu, sigma),
                (-metric2(mu, rho), nu, sigma),
                (-metric2(nu, sigma), mu, rho),
                (metric2(mu, sigma), nu, rho),
            ];
            for (g, x, y) in terms {
                if g == 0 {
                    continue;
                }
                if let Some((sign, gen)) = lorentz_basis(x, y, conv) {
                    push_combo(&mut out, &pre * &GaussRat::from_int(g * sign), gen);
                }
            }
        }
    }
    out.into_iter().filter(|(_, c)| !c.is_zero()).map(|(g, c)| (c, g)).collect()
}

/// A PBW word: generator indices in nondecreasing order.
pub type Word = Vec<u8>;

/// The Poincaré algebra with fixed bracket conventions and a normal-ordering
/// cache.
pub struct PoincareAlgebra {
    conventions: Conventions,
    table: Vec<Vec<GenCombo>>,
    cache: Mutex<HashMap<Word, Vec<(Word, GaussRat)>>>,
}

impl fmt::Debug for PoincareAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PoincareAlgebra").field("conventions", &self.conventions).finish()
    }
}

impl PoincareAlgebra {
    pub fn new(conventions: Conventions) -> Self {
        let table = Generator::ALL
            .iter()
            .map(|&a| Generator::ALL.iter().map(|&b| compute_bracket(a, b, conventions)).collect())
            .collect();
        PoincareAlgebra { conventions, table, cache: Mutex::new(HashMap::new()) }
    }

    /// Shared instance with the calibrated conventions.
    pub fn standard() -> &'static PoincareAlgebra {
        PoincareAlgebra::shared(Conventions::CALIBRATED)
    }

    /// Shared instance for any of the four sign conventions.
    pub fn shared(conventions: Conventions) -> &'static PoincareAlgebra {
        static INSTANCES: [OnceLock<PoincareAlgebra>; 4] =
            [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
        let slot = Conventions::all().iter().position(|c| *c == conventions).expect("valid conventions");
        INSTANCES[slot].get_or_init(|| PoincareAlgebra::new(conventions))
    }

    pub fn conventions(&self) -> Conventions {
        self.conventions
    }

    /// Structure constants `[a, b]`.
    pub fn generator_bracket(&self, a: Generator, b: Generator) -> &[(GaussRat, Generator)] {
        &self.table[a.index()][b.index()]
    }

    /// Rewrite an arbitrary word into PBW normal order.
    pub fn normal_order(&self, word: &[u8]) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (w, c) in self.normal_order_raw(word) {
            out.add_term(w, ParamScalar::constant(c));
        }
        out
    }

    fn normal_order_raw(&self, word: &[u8]) -> Vec<(Word, GaussRat)> {
        let Some(pos) = word.windows(2).position(|w| w[0] > w[1]) else {
            return vec![(word.to_vec(), GaussRat::one())];
        };
        if let Some(hit) = self.cache.lock().expect("cache poisoned").get(word) {
            return hit.clone();
        }
        // w = u a b v with a > b: u b a v + u [a,b] v
        let mut acc: BTreeMap<Word, GaussRat> = BTreeMap::new();
        let mut swapped = word.to_vec();
        swapped.swap(pos, pos + 1);
        let mut push = |terms: Vec<(Word, GaussRat)>, scale: &GaussRat| {
            for (w, c) in terms {
                let e = acc.entry(w).or_insert_with(GaussRat::zero);
                *e = &*e + &(&c * scale);
            }
        };
        push(self.normal_order_raw(&swapped), &GaussRat::one());
        let a = Generator::from_index(word[pos] as usize);
        let b = Generator::from_index(word[pos + 1] as usize);
        for (c, g) in self.generator_bracket(a, b) {
            let mut shorter = Vec::with_capacity(word.len() - 1);
            shorter.extend_from_slice(&word[..pos]);
            shorter.push(g.index() as u8);
            shorter.extend_from_slice(&word[pos + 2..]);
            push(self.normal_order_raw(&shorter), c);
        }
        let result: Vec<(Word, GaussRat)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        self.cache.lock().expect("cache poisoned").insert(word.to_vec(), result.clone());
        result
    }

    fn word_product(&self, a: &[u8], b: &[u8]) -> Vec<(Word, GaussRat)> {
        let mut w = Vec::with_capacity(a.len() + b.len());
        w.extend_from_slice(a);
        w.extend_from_slice(b);
        self.normal_order_raw(&w)
    }

    pub fn mul(&self, x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
        self.mul_truncated(x, y, None)
    }

    pub fn mul_truncated(&self, x: &AlgebraElement, y: &AlgebraElement, order: Option<u32>) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (wa, ca) in &x.terms {
            for (wb, cb) in &y.terms {
                let c = ca.mul_truncated(cb, order);
                if c.is_zero() {
                    continue;
                }
                for (w, k) in self.word_product(wa, wb) {
                    out.add_term(w, c.scale(&k));
                }
            }
        }
        out
    }

    /// `[X, Y] = XY − YX`.
    pub fn bracket(&self, x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
        &self.mul(x, y) - &self.mul(y, x)
    }

    /// Hermitian adjoint: conjugate scalars, fix generators, reverse words.
    pub fn adjoint(&self, x: &AlgebraElement) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (w, c) in &x.terms {
            let rev: Word = w.iter().rev().copied().collect();
            for (nw, k) in self.normal_order_raw(&rev) {
                out.add_term(nw, c.conj().scale(&k));
            }
        }
        out
    }

    pub fn tensor_mul(&self, s: &TensorElement, t: &TensorElement) -> Result<TensorElement, AlgebraError> {
        if s.arity != t.arity {
            return Err(AlgebraError::ArityMismatch(s.arity, t.arity));
        }
        let order = match (s.order, t.order) {
            (Some(a), Some(b)) if a != b => return Err(AlgebraError::OrderMismatch(a, b)),
            (Some(a), _) | (_, Some(a)) => Some(a),
            _ => None,
        };
        let mut out = TensorElement::zero(s.arity).with_order_tag(order);
        for (la, ca) in &s.terms {
            for (lb, cb) in &t.terms {
                let c = ca.mul_truncated(cb, order);
                if c.is_zero() {
                    continue;
                }
                let mut partial: Vec<(Vec<Word>, GaussRat)> = vec![(Vec::with_capacity(s.arity), GaussRat::one())];
                for (wa, wb) in la.iter().zip(lb.iter()) {
                    let leg = self.word_product(wa, wb);
                    let mut next = Vec::with_capacity(partial.len() * leg.len());
                    for (legs, k) in &partial {
                        for (w, kw) in &leg {
                            let mut nl = legs.clone();
                            nl.push(w.clone());
                            next.push((nl, k * kw));
                        }
                    }
                    partial = next;
                }
                for (legs, k) in partial {
                    out.add_term(legs, c.scale(&k));
                }
            }
        }
        Ok(out)
    }

    /// Hermitian adjoint applied legwise.
    pub fn tensor_adjoint(&self, t: &TensorElement) -> TensorElement {
        let mut out = TensorElement::zero(t.arity).with_order_tag(t.order);
        for (legs, c) in &t.terms {
            let mut partial: Vec<(Vec<Word>, GaussRat)> = vec![(Vec::new(), GaussRat::one())];
            for w in legs {
                let rev: Word = w.iter().rev().copied().collect();
                let leg = self.normal_order_raw(&rev);
                let mut next = Vec::new();
                for (ls, k) in &partial {
                    for (nw, kw) in &leg {
                        let mut nl = ls.clone();
                        nl.push(nw.clone());
                        next.push((nl, k * kw));
                    }
                }
                partial = next;
            }
            for (ls, k) in partial {
                out.add_term(ls, c.conj().scale(&k));
            }
        }
        out
    }
}

/// Primitive coproduct of a PBW word: sum over ordered splittings.
fn word_coproduct(w: &[u8]) -> Vec<(Word, Word)> {
    let n = w.len();
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u32..(1u32 << n) {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for (i, &g) in w.iter().enumerate() {
            if mask & (1 << i) != 0 {
                left.push(g);
            } else {
                right.push(g);
            }
        }
        out.push((left, right));
    }
    out
}

/// Parameter-ring linear combination of PBW words.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct AlgebraElement {
    terms: BTreeMap<Word, ParamScalar>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        AlgebraElement::default()
    }

    pub fn one() -> Self {
        AlgebraElement::scalar(ParamScalar::one())
    }

    pub fn scalar(c: ParamScalar) -> Self {
        let mut e = AlgebraElement::zero();
        e.add_term(Vec::new(), c);
        e
    }

    pub fn generator(g: Generator) -> Self {
        let mut e = AlgebraElement::zero();
        e.add_term(vec![g.index() as u8], ParamScalar::one());
        e
    }

    /// `M± = M1 ± iM2` and friends.
    pub fn plus_minus(a: Generator, b: Generator, sign: i64) -> Self {
        let i = ParamScalar::i().scale(&GaussRat::from_int(sign));
        &AlgebraElement::generator(a) + &AlgebraElement::generator(b).scale(&i)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &ParamScalar)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, w: Word, c: ParamScalar) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(w.clone()).or_default();
        *entry = &*entry + &c;
        if entry.is_zero() {
            self.terms.remove(&w);
        }
    }

    pub fn scale(&self, c: &ParamScalar) -> Self {
        let mut out = AlgebraElement::zero();
        for (w, v) in &self.terms {
            out.add_term(w.clone(), v * c);
        }
        out
    }

    pub fn truncate(&self, order: u32) -> Self {
        let mut out = AlgebraElement::zero();
        for (w, v) in &self.terms {
            out.add_term(w.clone(), v.truncate(order));
        }
        out
    }

    pub fn counit(&self) -> ParamScalar {
        self.terms.get(&Vec::new()).cloned().unwrap_or_default()
    }

    pub fn coproduct0(&self) -> TensorElement {
        let mut out = TensorElement::zero(2);
        for (w, c) in &self.terms {
            for (l, r) in word_coproduct(w) {
                out.add_term(vec![l, r], c.clone());
            }
        }
        out
    }

    /// Substitute parameter values in every coefficient.
    pub fn map_coefficients(&self, f: impl Fn(&ParamScalar) -> ParamScalar) -> Self {
        let mut out = AlgebraElement::zero();
        for (w, c) in &self.terms {
            out.add_term(w.clone(), f(c));
        }
        out
    }

    pub fn is_translation(&self) -> bool {
        self.terms.keys().all(|w| w.iter().all(|&g| g < 4))
    }

    /// View a translation-sector element as a momentum polynomial.
    pub fn to_momentum_function(&self) -> Result<MomentumFunction, AlgebraError> {
        let mut poly = Poly::zero();
        for (w, c) in &self.terms {
            poly.add_assign_ref(&c.poly().mul_term(&word_mono(w)?, &GaussRat::one()));
        }
        Ok(MomentumFunction::from_poly(poly))
    }

    pub fn render(&self) -> String {
        render_sum(self.terms.iter().map(|(w, c)| (render_word(w), c)))
    }
}

pub(crate) fn word_mono(w: &[u8]) -> Result<Mono, AlgebraError> {
    let mut m = Mono::one();
    for &g in w {
        if g >= 4 {
            return Err(AlgebraError::NotTranslation(render_word(w)));
        }
        m = m.mul(&Mono::momentum(g as usize));
    }
    Ok(m)
}

pub fn render_word(w: &[u8]) -> String {
    if w.is_empty() {
        return "1".to_string();
    }
    let mut parts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < w.len() {
        let mut j = i;
        while j < w.len() && w[j] == w[i] {
            j += 1;
        }
        let name = Generator::from_index(w[i] as usize).name();
        parts.push(if j - i == 1 { name.to_string() } else { format!("{name}^{}", j - i) });
        i = j;
    }
    parts.join("*")
}

pub(crate) fn render_sum<'a>(terms: impl Iterator<Item = (String, &'a ParamScalar)>) -> String {
    let mut out = String::new();
    for (basis, c) in terms {
        let coeff = if c.is_one() {
            String::new()
        } else if (-c).is_one() {
            "-".to_string()
        } else {
            format!("{}*", c.render_factor())
        };
        let body = if basis == "1" && !coeff.is_empty() {
            coeff.trim_end_matches('*').to_string()
        } else {
            format!("{coeff}{basis}")
        };
        let body = if body == "-" { "-1".to_string() } else { body };
        if out.is_empty() {
            out = body;
        } else if let Some(rest) = body.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&body);
        }
    }
    if out.is_empty() {
        "0".to_string()
    } else {
        out
    }
}

impl std::ops::Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, o: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        for (w, c) in &o.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, o: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        for (w, c) in &o.terms {
            out.add_term(w.clone(), -c);
        }
        out
    }
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Element of the 2- or 3-fold tensor power.
#[derive(Clone, PartialEq, Eq)]
pub struct TensorElement {
    arity: usize,
    terms: BTreeMap<Vec<Word>, ParamScalar>,
    order: Option<u32>,
}

impl TensorElement {
    pub fn zero(arity: usize) -> Self {
        TensorElement { arity, terms: BTreeMap::new(), order: None }
    }

    pub fn unit(arity: usize) -> Self {
        let mut t = TensorElement::zero(arity);
        t.add_term(vec![Vec::new(); arity], ParamScalar::one());
        t
    }

    /// `a ⊗ b` for two elements.
    pub fn pair(a: &AlgebraElement, b: &AlgebraElement) -> Self {
        let mut t = TensorElement::zero(2);
        for (wa, ca) in a.terms() {
            for (wb, cb) in b.terms() {
                t.add_term(vec![wa.clone(), wb.clone()], ca * cb);
            }
        }
        t
    }

    pub fn from_legs(legs: &[AlgebraElement]) -> Self {
        let mut t = TensorElement::unit(0);
        for leg in legs {
            let mut next = TensorElement::zero(t.arity + 1);
            for (ls, c) in &t.terms {
                for (w, k) in leg.terms() {
                    let mut nl = ls.clone();
                    nl.push(w.clone());
                    next.add_term(nl, c * k);
                }
            }
            t = next;
        }
        t
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn order(&self) -> Option<u32> {
        self.order
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Word>, &ParamScalar)> {
        self.terms.iter()
    }

    pub fn with_order_tag(mut self, order: Option<u32>) -> Self {
        self.order = order;
        if let Some(n) = order {
            let terms = std::mem::take(&mut self.terms);
            for (l, c) in terms {
                self.add_term(l, c.truncate(n));
            }
        }
        self
    }

    /// Truncate and tag at `order`.
    pub fn truncated(&self, order: u32) -> Self {
        let mut t = self.clone();
        t.order = None;
        t.with_order_tag(Some(order))
    }

    pub fn add_term(&mut self, legs: Vec<Word>, c: ParamScalar) {
        debug_assert_eq!(legs.len(), self.arity);
        let c = match self.order {
            Some(n) => c.truncate(n),
            None => c,
        };
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(legs.clone()).or_default();
        *entry = &*entry + &c;
        if entry.is_zero() {
            self.terms.remove(&legs);
        }
    }

    pub fn scale(&self, c: &ParamScalar) -> Self {
        let mut out = TensorElement::zero(self.arity).with_order_tag(self.order);
        for (l, v) in &self.terms {
            out.add_term(l.clone(), v * c);
        }
        out
    }

    pub fn checked_add(&self, o: &TensorElement) -> Result<TensorElement, AlgebraError> {
        if self.arity != o.arity {
            return Err(AlgebraError::ArityMismatch(self.arity, o.arity));
        }
        let order = match (self.order, o.order) {
            (Some(a), Some(b)) if a != b => return Err(AlgebraError::OrderMismatch(a, b)),
            (Some(a), _) | (_, Some(a)) => Some(a),
            _ => None,
        };
        let mut out = self.clone().with_order_tag(order);
        for (l, c) in &o.terms {
            out.add_term(l.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, o: &TensorElement) -> Result<TensorElement, AlgebraError> {
        self.checked_add(&o.scale(&ParamScalar::int(-1)))
    }

    /// Place this tensor into legs `positions` of an `arity`-fold tensor, unit
    /// elsewhere (e.g. `F12`, `F23`, `F13`).
    pub fn embed(&self, positions: &[usize], arity: usize) -> TensorElement {
        let mut out = TensorElement::zero(arity).with_order_tag(self.order);
        for (legs, c) in &self.terms {
            let mut nl = vec![Vec::new(); arity];
            for (leg, &pos) in legs.iter().zip(positions) {
                nl[pos] = leg.clone();
            }
            out.add_term(nl, c.clone());
        }
        out
    }

    /// Apply the primitive coproduct to one leg, raising the arity by one.
    pub fn coproduct_on_leg(&self, leg: usize) -> TensorElement {
        let mut out = TensorElement::zero(self.arity + 1).with_order_tag(self.order);
        for (legs, c) in &self.terms {
            for (l, r) in word_coproduct(&legs[leg]) {
                let mut nl = Vec::with_capacity(self.arity + 1);
                nl.extend_from_slice(&legs[..leg]);
                nl.push(l);
                nl.push(r);
                nl.extend_from_slice(&legs[leg + 1..]);
                out.add_term(nl, c.clone());
            }
        }
        out
    }

    /// Apply the counit to one leg, lowering the arity by one.
    pub fn counit_on_leg(&self, leg: usize) -> TensorElement {
        let mut out = TensorElement::zero(self.arity - 1).with_order_tag(self.order);
        for (legs, c) in &self.terms {
            if legs[leg].is_empty() {
                let mut nl = legs.clone();
                nl.remove(leg);
                out.add_term(nl, c.clone());
            }
        }
        out
    }

    pub fn map_coefficients(&self, f: impl Fn(&ParamScalar) -> ParamScalar) -> Self {
        let mut out = TensorElement::zero(self.arity).with_order_tag(self.order);
        for (l, c) in &self.terms {
            out.add_term(l.clone(), f(c));
        }
        out
    }

    pub fn is_translation(&self) -> bool {
        self.terms.keys().all(|ls| ls.iter().all(|w| w.iter().all(|&g| g < 4)))
    }

    /// Split a translation-sector 2-tensor into `(leg1 mono, leg2 mono, coeff)`.
    pub fn momentum_terms(&self) -> Result<Vec<(Mono, Mono, ParamScalar)>, AlgebraError> {
        self.terms.iter().map(|(ls, c)| Ok((word_mono(&ls[0])?, word_mono(&ls[1])?, c.clone()))).collect()
    }

    pub fn render(&self, ascii: bool) -> String {
        let sep = if ascii { " (x) " } else { " ⊗ " };
        let body = render_sum(
            self.terms.iter().map(|(ls, c)| (ls.iter().map(|w| render_word(w)).collect::<Vec<_>>().join(sep), c)),
        );
        match self.order {
            Some(n) => format!("{body} + O({})", n + 1),
            None => body,
        }
    }
}

impl fmt::Debug for TensorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(true))
    }
}
