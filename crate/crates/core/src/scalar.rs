//! Exact coefficient ring.
//!
//! Coefficients are Gaussian rationals `a + b i`. Everything symbolic in the
//! crate is built on [`Poly`], a sparse multivariate polynomial over a fixed
//! variable set: the real formal parameters of the twists followed by the four
//! momenta `P0..P3`. [`ParamScalar`] is a `Poly` that never mentions momenta.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Formal real parameters, in canonical rendering order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Param {
    Hbar,
    AlphaP,
    Delta0P,
    Delta3P,
    Delta0M,
    Delta3M,
    Rho00,
    Rho03,
    Rho30,
    Rho33,
    Xi1P,
    Xi2P,
    Xi1M,
    Xi2M,
    GammaP,
    Rho11,
    Rho12,
    Rho21,
    Rho22,
    Alpha,
    Beta,
    /// Formal grading scale used by homogeneity checks.
    Scale,
}

pub const PARAM_COUNT: usize = 22;
pub const MOMENTUM_COUNT: usize = 4;
pub const VAR_COUNT: usize = PARAM_COUNT + MOMENTUM_COUNT;

impl Param {
    pub const ALL: [Param; PARAM_COUNT] = [
        Param::Hbar,
        Param::AlphaP,
        Param::Delta0P,
        Param::Delta3P,
        Param::Delta0M,
        Param::Delta3M,
        Param::Rho00,
        Param::Rho03,
        Param::Rho30,
        Param::Rho33,
        Param::Xi1P,
        Param::Xi2P,
        Param::Xi1M,
        Param::Xi2M,
        Param::GammaP,
        Param::Rho11,
        Param::Rho12,
        Param::Rho21,
        Param::Rho22,
        Param::Alpha,
        Param::Beta,
        Param::Scale,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Param::Hbar => "hbar",
            Param::AlphaP => "alphap",
            Param::Delta0P => "delta0p",
            Param::Delta3P => "delta3p",
            Param::Delta0M => "delta0m",
            Param::Delta3M => "delta3m",
            Param::Rho00 => "rho00",
            Param::Rho03 => "rho03",
            Param::Rho30 => "rho30",
            Param::Rho33 => "rho33",
            Param::Xi1P => "xi1p",
            Param::Xi2P => "xi2p",
            Param::Xi1M => "xi1m",
            Param::Xi2M => "xi2m",
            Param::GammaP => "gammap",
            Param::Rho11 => "rho11",
            Param::Rho12 => "rho12",
            Param::Rho21 => "rho21",
            Param::Rho22 => "rho22",
            Param::Alpha => "alpha",
            Param::Beta => "beta",
            Param::Scale => "s",
        }
    }

    pub fn from_name(name: &str) -> Option<Param> {
        Param::ALL.iter().copied().find(|p| p.name() == name)
    }

    /// Deformation parameters count towards truncation order; `hbar` and the
    /// grading scale do not.
    pub fn is_deformation(self) -> bool {
        !matches!(self, Param::Hbar | Param::Scale)
    }
}

/// Exact complex rational `re + im*i`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn zero() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        GaussRat::from_int(1)
    }

    pub fn i() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        GaussRat::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        GaussRat::new(BigRational::new(n.into(), d.into()), BigRational::zero())
    }

    pub fn from_parts(re: (i64, i64), im: (i64, i64)) -> Self {
        GaussRat::new(BigRational::new(re.0.into(), re.1.into()), BigRational::new(im.0.into(), im.1.into()))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(GaussRat::new(&self.re / &n, -&self.im / &n))
    }

    /// Exact square root with nonnegative real part (imaginary part nonnegative
    /// on the negative real axis), if one exists in the Gaussian rationals.
    pub fn sqrt(&self) -> Option<Self> {
        if self.im.is_zero() {
            if self.re.is_negative() {
                let r = rational_sqrt(&-self.re.clone())?;
                return Some(GaussRat::new(BigRational::zero(), r));
            }
            let r = rational_sqrt(&self.re)?;
            return Some(GaussRat::new(r, BigRational::zero()));
        }
        let modulus = rational_sqrt(&self.norm_sqr())?;
        let two = BigRational::from_integer(2.into());
        let a = rational_sqrt(&((&self.re + &modulus) / &two))?;
        if a.is_zero() {
            return None;
        }
        let b = &self.im / (&two * &a);
        Some(GaussRat::new(a, b))
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }

    /// True when the first nonzero component is negative.
    pub fn is_negative_leading(&self) -> bool {
        if !self.re.is_zero() {
            self.re.is_negative()
        } else {
            self.im.is_negative()
        }
    }
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = int_sqrt(q.numer())?;
    let d = int_sqrt(q.denom())?;
    Some(BigRational::new(n, d))
}

fn int_sqrt(n: &BigInt) -> Option<BigInt> {
    let r = n.sqrt();
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

impl Add for &GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub for &GaussRat {
    type Output = GaussRat;
    fn sub(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul for &GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re.clone(), -self.im.clone())
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rational(&self.re)),
            (true, false) => {
                if self.im.is_one() {
                    write!(f, "i")
                } else if (-self.im.clone()).is_one() {
                    write!(f, "-i")
                } else {
                    write!(f, "{}*i", fmt_rational(&self.im))
                }
            }
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                let mag = self.im.abs();
                if mag.is_one() {
                    write!(f, "({}{}i)", fmt_rational(&self.re), sign)
                } else {
                    write!(f, "({}{}{}*i)", fmt_rational(&self.re), sign, fmt_rational(&mag))
                }
            }
        }
    }
}

impl fmt::Debug for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Exponent vector over parameters then momenta.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mono(pub [u8; VAR_COUNT]);

impl Mono {
    pub fn one() -> Self {
        Mono([0; VAR_COUNT])
    }

    pub fn var(index: usize) -> Self {
        let mut m = Mono::one();
        m.0[index] = 1;
        m
    }

    pub fn param(p: Param) -> Self {
        Mono::var(p.index())
    }

    pub fn momentum(mu: usize) -> Self {
        Mono::var(PARAM_COUNT + mu)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn deformation_degree(&self) -> u32 {
        Param::ALL.iter().filter(|p| p.is_deformation()).map(|p| self.0[p.index()] as u32).sum()
    }

    pub fn momentum_degree(&self) -> u32 {
        self.0[PARAM_COUNT..].iter().map(|&e| e as u32).sum()
    }

    pub fn momentum_exp(&self, mu: usize) -> u8 {
        self.0[PARAM_COUNT + mu]
    }

    pub fn param_part(&self) -> Mono {
        let mut m = *self;
        for e in &mut m.0[PARAM_COUNT..] {
            *e = 0;
        }
        m
    }

    pub fn momentum_part(&self) -> Mono {
        let mut m = *self;
        for e in &mut m.0[..PARAM_COUNT] {
            *e = 0;
        }
        m
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(o.0.iter()) {
            *a = a.checked_add(*b).expect("exponent overflow");
        }
        out
    }

    pub fn divides(&self, o: &Mono) -> bool {
        self.0.iter().zip(o.0.iter()).all(|(a, b)| a <= b)
    }

    pub fn div(&self, o: &Mono) -> Option<Mono> {
        if !o.divides(self) {
            return None;
        }
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(o.0.iter()) {
            *a -= *b;
        }
        Some(out)
    }

    pub fn halve(&self) -> Option<Mono> {
        let mut out = *self;
        for e in &mut out.0 {
            if *e % 2 != 0 {
                return None;
            }
            *e /= 2;
        }
        Some(out)
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn render_factors(&self, momentum_symbol: char) -> Vec<String> {
        let mut out = Vec::new();
        for p in Param::ALL {
            push_power(&mut out, p.name(), self.0[p.index()]);
        }
        for mu in 0..MOMENTUM_COUNT {
            push_power(&mut out, &format!("{momentum_symbol}{mu}"), self.0[PARAM_COUNT + mu]);
        }
        out
    }
}

fn push_power(out: &mut Vec<String>, name: &str, e: u8) {
    match e {
        0 => {}
        1 => out.push(name.to_string()),
        _ => out.push(format!("{name}^{e}")),
    }
}

impl Ord for Mono {
    /// Graded lex: lower total degree first, then larger exponents on earlier
    /// variables first.
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree().cmp(&o.degree()).then_with(|| o.0.cmp(&self.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fs = self.render_factors('P');
        if fs.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", fs.join("*"))
        }
    }
}

/// Sparse polynomial with Gaussian rational coefficients.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Mono, GaussRat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(GaussRat::one())
    }

    pub fn constant(c: GaussRat) -> Self {
        Poly::term(Mono::one(), c)
    }

    pub fn term(m: Mono, c: GaussRat) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn var(index: usize) -> Self {
        Poly::term(Mono::var(index), GaussRat::one())
    }

    pub fn momentum(mu: usize) -> Self {
        Poly::term(Mono::momentum(mu), GaussRat::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &GaussRat)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Mono, GaussRat)> {
        self.terms.into_iter()
    }

    pub fn add_term(&mut self, m: Mono, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add_assign_ref(&mut self, o: &Poly) {
        for (m, c) in &o.terms {
            self.add_term(*m, c.clone());
        }
    }

    pub fn scale(&self, c: &GaussRat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect() }
    }

    pub fn mul_term(&self, m: &Mono, c: &GaussRat) -> Poly {
        let mut out = Poly::zero();
        for (tm, tc) in &self.terms {
            out.add_term(tm.mul(m), tc * c);
        }
        out
    }

    pub fn conj(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, c.conj())).collect() }
    }

    pub fn constant_term(&self) -> GaussRat {
        self.terms.get(&Mono::one()).cloned().unwrap_or_else(GaussRat::zero)
    }

    pub fn as_constant(&self) -> Option<GaussRat> {
        match self.terms.len() {
            0 => Some(GaussRat::zero()),
            1 => {
                let (m, c) = self.terms.iter().next()?;
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<(&Mono, &GaussRat)> {
        self.terms.iter().next_back()
    }

    pub fn max_deformation_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.deformation_degree()).max()
    }

    pub fn min_deformation_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.deformation_degree()).min()
    }

    /// Drop every term of deformation degree above `order`.
    pub fn truncate(&self, order: u32) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.deformation_degree() <= order)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Homogeneous component of the given deformation degree.
    pub fn deformation_part(&self, degree: u32) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.deformation_degree() == degree)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    pub fn mul_truncated(&self, o: &Poly, order: Option<u32>) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            let da = ma.deformation_degree();
            for (mb, cb) in &o.terms {
                if let Some(n) = order {
                    if da + mb.deformation_degree() > n {
                        continue;
                    }
                }
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Partial derivative with respect to variable `index`.
    pub fn diff(&self, index: usize) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.0[index];
            if e == 0 {
                continue;
            }
            let mut nm = *m;
            nm.0[index] -= 1;
            out.add_term(nm, c * &GaussRat::from_int(e as i64));
        }
        out
    }

    /// Substitute `value` for variable `index`.
    pub fn substitute(&self, index: usize, value: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.0[index];
            let mut rest = *m;
            rest.0[index] = 0;
            let base = Poly::term(rest, c.clone());
            out.add_assign_ref(&(&base * &value.pow(e as u32)));
        }
        out
    }

    /// Exact division; `None` if `divisor` does not divide `self`.
    pub fn exact_div(&self, divisor: &Poly) -> Option<Poly> {
        let (lm, lc) = divisor.leading()?;
        let lc_inv = lc.inv()?;
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((rm, rc)) = rem.leading().map(|(m, c)| (*m, c.clone())) {
            let qm = rm.div(lm)?;
            let qc = &rc * &lc_inv;
            rem = &rem - &divisor.mul_term(&qm, &qc);
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Exact square root, if `self` is a perfect square.
    pub fn sqrt(&self) -> Option<Poly> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let (lm, lc) = self.leading()?;
        let root_m = lm.halve()?;
        let root_c = lc.sqrt()?;
        let two_lead_inv = (&root_c * &GaussRat::from_int(2)).inv()?;
        let mut root = Poly::term(root_m, root_c);
        // Each step fixes the next-highest term of the root.
        for _ in 0..=self.len() * 4 + 8 {
            let rem = self - &(&root * &root);
            let Some((rm, rc)) = rem.leading().map(|(m, c)| (*m, c.clone())) else {
                return Some(root);
            };
            let qm = rm.div(&root_m)?;
            if qm >= root_m {
                return None;
            }
            root.add_term(qm, &rc * &two_lead_inv);
        }
        None
    }

    pub fn eval_complex(&self, values: &dyn Fn(usize) -> Option<Complex64>) -> Option<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = c.to_complex();
            for (idx, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= values(idx)?.powu(e as u32);
                }
            }
            acc += t;
        }
        Some(acc)
    }

    /// Render with `*`-joined factors and graded-lex term order.
    pub fn render(&self, momentum_symbol: char) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let (neg, body) = render_term(c, &m.render_factors(momentum_symbol));
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        out
    }

    /// Render, parenthesized when it has more than one term.
    pub fn render_factor(&self, momentum_symbol: char) -> String {
        if self.len() > 1 {
            format!("({})", self.render(momentum_symbol))
        } else {
            self.render(momentum_symbol)
        }
    }
}

/// Render a coefficient times factor list; returns (is_negative, body).
pub(crate) fn render_term(c: &GaussRat, factors: &[String]) -> (bool, String) {
    let neg = c.is_negative_leading() && (c.re.is_zero() || c.im.is_zero());
    let mag = if neg { -c } else { c.clone() };
    let mut parts = Vec::new();
    if !(mag.is_one() && !factors.is_empty()) {
        parts.push(mag.to_string());
    }
    parts.extend(factors.iter().cloned());
    (neg, parts.join("*"))
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_assign_ref(o);
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, -c);
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        self.mul_truncated(o, None)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&GaussRat::from_int(-1))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render('P'))
    }
}

/// Element of the parameter ring: a polynomial in the real formal parameters.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ParamScalar(Poly);

impl ParamScalar {
    pub fn zero() -> Self {
        ParamScalar(Poly::zero())
    }

    pub fn one() -> Self {
        ParamScalar(Poly::one())
    }

    pub fn i() -> Self {
        ParamScalar::constant(GaussRat::i())
    }

    pub fn int(n: i64) -> Self {
        ParamScalar::constant(GaussRat::from_int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        ParamScalar::constant(GaussRat::from_ratio(n, d))
    }

    pub fn constant(c: GaussRat) -> Self {
        ParamScalar(Poly::constant(c))
    }

    pub fn param(p: Param) -> Self {
        ParamScalar(Poly::var(p.index()))
    }

    /// Wrap a polynomial; `None` if it mentions a momentum.
    pub fn from_poly(p: Poly) -> Option<Self> {
        let momentum_free = p.terms().all(|(m, _)| m.momentum_degree() == 0);
        momentum_free.then_some(ParamScalar(p))
    }

    pub fn poly(&self) -> &Poly {
        &self.0
    }

    pub fn into_poly(self) -> Poly {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn as_constant(&self) -> Option<GaussRat> {
        self.0.as_constant()
    }

    pub fn conj(&self) -> Self {
        ParamScalar(self.0.conj())
    }

    pub fn scale(&self, c: &GaussRat) -> Self {
        ParamScalar(self.0.scale(c))
    }

    pub fn pow(&self, e: u32) -> Self {
        ParamScalar(self.0.pow(e))
    }

    pub fn truncate(&self, order: u32) -> Self {
        ParamScalar(self.0.truncate(order))
    }

    pub fn mul_truncated(&self, o: &ParamScalar, order: Option<u32>) -> Self {
        ParamScalar(self.0.mul_truncated(&o.0, order))
    }

    pub fn min_deformation_degree(&self) -> Option<u32> {
        self.0.min_deformation_degree()
    }

    pub fn max_deformation_degree(&self) -> Option<u32> {
        self.0.max_deformation_degree()
    }

    /// Substitute one parameter by a parameter-ring value.
    pub fn substitute(&self, p: Param, value: &ParamScalar) -> Self {
        ParamScalar(self.0.substitute(p.index(), &value.0))
    }

    /// Multiply every deformation parameter by the formal scale `s`.
    pub fn graded(&self) -> Self {
        let mut out = self.clone();
        for p in Param::ALL.into_iter().filter(|p| p.is_deformation()) {
            out = out.substitute(p, &(&ParamScalar::param(Param::Scale) * &ParamScalar::param(p)));
        }
        out
    }

    pub fn eval(&self, values: &BTreeMap<Param, f64>) -> Option<Complex64> {
        self.0.eval_complex(&|idx| {
            let p = *Param::ALL.get(idx)?;
            values.get(&p).map(|&v| Complex64::new(v, 0.0))
        })
    }

    pub fn render(&self) -> String {
        self.0.render('P')
    }

    pub fn render_factor(&self) -> String {
        self.0.render_factor('P')
    }
}

impl Add for &ParamScalar {
    type Output = ParamScalar;
    fn add(self, o: &ParamScalar) -> ParamScalar {
        ParamScalar(&self.0 + &o.0)
    }
}

impl Sub for &ParamScalar {
    type Output = ParamScalar;
    fn sub(self, o: &ParamScalar) -> ParamScalar {
        ParamScalar(&self.0 - &o.0)
    }
}

impl Mul for &ParamScalar {
    type Output = ParamScalar;
    fn mul(self, o: &ParamScalar) -> ParamScalar {
        ParamScalar(&self.0 * &o.0)
    }
}

impl Neg for &ParamScalar {
    type Output = ParamScalar;
    fn neg(self) -> ParamScalar {
        ParamScalar(-&self.0)
    }
}

impl Add for ParamScalar {
    type Output = ParamScalar;
    fn add(self, o: ParamScalar) -> ParamScalar {
        &self + &o
    }
}

impl Sub for ParamScalar {
    type Output = ParamScalar;
    fn sub(self, o: ParamScalar) -> ParamScalar {
        &self - &o
    }
}

impl Mul for ParamScalar {
    type Output = ParamScalar;
    fn mul(self, o: ParamScalar) -> ParamScalar {
        &self * &o
    }
}

impl Neg for ParamScalar {
    type Output = ParamScalar;
    fn neg(self) -> ParamScalar {
        -&self
    }
}

impl From<Param> for ParamScalar {
    fn from(p: Param) -> Self {
        ParamScalar::param(p)
    }
}

impl fmt::Display for ParamScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl fmt::Debug for ParamScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}
