//! Numeric dispersions and uncertainty relations in the momentum
//! representation.
//!
//! Only the momentum directions a preset touches are discretized. Functions of
//! `p̂` act diagonally and `x̂_μ = iħ g_μμ ∂/∂p_μ` is applied spectrally. States
//! are finite sums of product states and operators are sums of products of
//! one-dimensional actions, so the tensor-product grid is never materialized.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::metric;
use crate::duality::{DualityError, PhaseSpaceGenerator, PhaseValue, RelationTable};
use crate::momentum::{LinearForm, MomentumFunction};
use crate::scalar::{Param, ParamScalar, MOMENTUM_COUNT, PARAM_COUNT};
use crate::weyl::{realize, target_table, Realization, RealizationPreset, WeylExpression};

pub const DEFAULT_POINTS: usize = 256;
pub const DEFAULT_CUTOFF: f64 = 24.0;
pub const NORMALIZATION_TOL: f64 = 1e-12;
pub const CANONICAL_TOL: f64 = 1e-8;
pub const TABLE_TOL: f64 = 1e-6;
pub const ROBERTSON_TOL: f64 = 1e-9;
pub const SCAN_BOUND_TOL: f64 = 1e-6;
pub const SCAN_RATIO_TOL: f64 = 0.05;
const RADICAND_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-9;
/// Amplitude `exp(-k²/4)` of a Gaussian `k` widths out is below 1e-13.
const TAIL_WIDTHS: f64 = 11.0;
/// Same margin for the spectral content at the Nyquist wavenumber.
const BAND_WIDTHS: f64 = 5.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UncertaintyError {
    #[error("operator is not hermitean on the grid (imbalance {0:.3e})")]
    NonHermitian(f64),
    #[error("negative variance {0:.3e}: numerical breakdown")]
    NegativeVariance(f64),
    #[error(
        "grid too coarse: canonical commutator residual {residual:.3e} exceeds {tol:.0e}; \
         increase the number of points or the cutoff"
    )]
    GridInadequate { residual: f64, tol: f64 },
    #[error("state does not fit the grid in p{dim}: {reason}")]
    StateOutOfGrid { dim: usize, reason: String },
    #[error(
        "center {center} too close to cutoff {cutoff} for width {width}; need |center| + {TAIL_WIDTHS}*width <= cutoff"
    )]
    CutoffTooClose { center: f64, cutoff: f64, width: f64 },
    #[error("momentum direction p{0} is not represented on this grid")]
    InactiveDimension(usize),
    #[error("cannot lower onto the grid: {0}")]
    Unlowerable(String),
    #[error("no numeric value for parameter {0}")]
    MissingParameter(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Duality(#[from] DualityError),
}

type Result<T> = std::result::Result<T, UncertaintyError>;

/// Uniform periodic grid `p_k = -Λ + k h`, `h = 2Λ/n`.
#[derive(Clone)]
pub struct Grid1D {
    n: usize,
    cutoff: f64,
    step: f64,
    points: Vec<f64>,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid1D").field("n", &self.n).field("cutoff", &self.cutoff).finish()
    }
}

impl Grid1D {
    fn new(n: usize, cutoff: f64, planner: &mut FftPlanner<f64>) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(UncertaintyError::InvalidGrid(format!("point count {n} must be even and >= 8")));
        }
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(UncertaintyError::InvalidGrid(format!("cutoff {cutoff} must be positive")));
        }
        let step = 2.0 * cutoff / n as f64;
        let points = (0..n).map(|k| -cutoff + k as f64 * step).collect();
        let span = n as f64 * step;
        let wavenumbers = (0..n)
            .map(|k| {
                let signed = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
                if k == n / 2 {
                    0.0
                } else {
                    2.0 * PI * signed / span
                }
            })
            .collect();
        Ok(Grid1D {
            n,
            cutoff,
            step,
            points,
            wavenumbers,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Largest resolved conjugate wavenumber `π/h`.
    pub fn bandwidth(&self) -> f64 {
        PI / self.step
    }

    fn derivative(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut buf = v.to_vec();
        self.forward.process(&mut buf);
        for (c, &k) in buf.iter_mut().zip(&self.wavenumbers) {
            *c *= Complex64::new(0.0, k);
        }
        self.inverse.process(&mut buf);
        let inv_n = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|c| *c *= inv_n);
        buf
    }

    fn inner(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() * self.step
    }
}

/// One-dimensional primitive action.
#[derive(Clone, Debug)]
enum Action {
    Position,
    Diagonal(Arc<Vec<Complex64>>),
}

/// `coeff · Π_slot word_slot`; each word is a product written left to right.
#[derive(Clone, Debug)]
struct OpTerm {
    coeff: Complex64,
    words: Vec<Vec<Action>>,
}

/// Operator on the grid: a sum of products of one-dimensional actions.
#[derive(Clone, Debug)]
pub struct GridOperator {
    slots: usize,
    terms: Vec<OpTerm>,
}

impl GridOperator {
    fn zero(slots: usize) -> Self {
        GridOperator { slots, terms: Vec::new() }
    }

    fn single(slots: usize, slot: usize, action: Action) -> Self {
        let mut words = vec![Vec::new(); slots];
        words[slot].push(action);
        GridOperator { slots, terms: vec![OpTerm { coeff: Complex64::new(1.0, 0.0), words }] }
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, o: &GridOperator) -> GridOperator {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        GridOperator { slots: self.slots, terms }
    }

    pub fn scale(&self, c: Complex64) -> GridOperator {
        let terms = self.terms.iter().map(|t| OpTerm { coeff: t.coeff * c, words: t.words.clone() }).collect();
        GridOperator { slots: self.slots, terms }
    }

    pub fn sub(&self, o: &GridOperator) -> GridOperator {
        self.add(&o.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, o: &GridOperator) -> GridOperator {
        let mut terms = Vec::with_capacity(self.terms.len() * o.terms.len());
        for a in &self.terms {
            for b in &o.terms {
                let words = a.words.iter().zip(&b.words).map(|(x, y)| x.iter().chain(y).cloned().collect()).collect();
                terms.push(OpTerm { coeff: a.coeff * b.coeff, words });
            }
        }
        GridOperator { slots: self.slots, terms }
    }

    /// `AB − BA`.
    pub fn commutator(a: &GridOperator, b: &GridOperator) -> GridOperator {
        a.mul(b).sub(&b.mul(a))
    }
}

#[derive(Clone, Debug)]
struct Component {
    coeff: Complex64,
    factors: Vec<Vec<Complex64>>,
}

/// Finite sum of product states over the active directions.
#[derive(Clone, Debug)]
pub struct GridState {
    components: Vec<Component>,
}

/// Gaussian factor: `|ψ(p)|²` has mean `center` and standard deviation
/// `width`; `position` is the mean of `x̂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gaussian1D {
    pub center: f64,
    pub width: f64,
    #[serde(default)]
    pub position: f64,
}

impl Gaussian1D {
    pub fn new(center: f64, width: f64) -> Self {
        Gaussian1D { center, width, position: 0.0 }
    }

    pub fn at_position(mut self, position: f64) -> Self {
        self.position = position;
        self
    }
}

/// Smallest cutoff holding a Gaussian of `width` centered at `±max_center`.
pub fn fit_cutoff(max_center: f64, width: f64) -> f64 {
    max_center.abs() + (TAIL_WIDTHS + 1.0) * width
}

/// Active momentum directions for a realization preset.
pub fn active_dims(preset: RealizationPreset) -> [usize; 3] {
    match preset {
        RealizationPreset::Iso2 => [0, 1, 2],
        RealizationPreset::Iso11 => [0, 1, 3],
    }
}

/// Momentum-space representation over a subset of directions.
#[derive(Clone, Debug)]
pub struct GridRep {
    dims: Vec<usize>,
    grids: Vec<Grid1D>,
    hbar: f64,
}

impl GridRep {
    pub fn new(dims: &[usize], n: usize, cutoffs: &[f64], hbar: f64) -> Result<Self> {
        if dims.is_empty() || dims.len() != cutoffs.len() {
            return Err(UncertaintyError::InvalidGrid("one cutoff per active direction required".into()));
        }
        if dims.iter().any(|&d| d >= MOMENTUM_COUNT) {
            return Err(UncertaintyError::InvalidGrid("momentum index out of range".into()));
        }
        let mut sorted = dims.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != dims.len() {
            return Err(UncertaintyError::InvalidGrid("repeated direction".into()));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(UncertaintyError::InvalidGrid(format!("hbar {hbar} must be positive")));
        }
        let mut planner = FftPlanner::new();
        let grids = cutoffs.iter().map(|&c| Grid1D::new(n, c, &mut planner)).collect::<Result<_>>()?;
        Ok(GridRep { dims: dims.to_vec(), grids, hbar })
    }

    pub fn uniform(dims: &[usize], n: usize, cutoff: f64, hbar: f64) -> Result<Self> {
        GridRep::new(dims, n, &vec![cutoff; dims.len()], hbar)
    }

    pub fn for_preset(preset: RealizationPreset, n: usize, cutoff: f64, hbar: f64) -> Result<Self> {
        GridRep::uniform(&active_dims(preset), n, cutoff, hbar)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn cutoffs(&self) -> Vec<f64> {
        self.grids.iter().map(|g| g.cutoff).collect()
    }

    pub fn points(&self) -> usize {
        self.grids[0].n
    }

    pub fn grid(&self, mu: usize) -> Option<&Grid1D> {
        self.slot(mu).ok().map(|s| &self.grids[s])
    }

    fn slot(&self, mu: usize) -> Result<usize> {
        self.dims.iter().position(|&d| d == mu).ok_or(UncertaintyError::InactiveDimension(mu))
    }

    pub fn identity(&self) -> GridOperator {
        GridOperator {
            slots: self.dims.len(),
            terms: vec![OpTerm { coeff: Complex64::new(1.0, 0.0), words: vec![Vec::new(); self.dims.len()] }],
        }
    }

    /// Canonical `x̂_μ`.
    pub fn position(&self, mu: usize) -> Result<GridOperator> {
        Ok(GridOperator::single(self.dims.len(), self.slot(mu)?, Action::Position))
    }

    /// Canonical `p̂_μ`.
    pub fn momentum(&self, mu: usize) -> Result<GridOperator> {
        self.function(mu, |p| Complex64::new(p, 0.0))
    }

    /// `f(p̂_μ)`, diagonal in momentum.
    pub fn function(&self, mu: usize, f: impl Fn(f64) -> Complex64) -> Result<GridOperator> {
        let s = self.slot(mu)?;
        let diag = self.grids[s].points.iter().map(|&p| f(p)).collect();
        Ok(GridOperator::single(self.dims.len(), s, Action::Diagonal(Arc::new(diag))))
    }

    /// Lowers `Σ F(p̂) x̂^a` given numeric parameter values. `hbar` is supplied
    /// by the grid.
    pub fn lower(&self, e: &WeylExpression, params: &BTreeMap<Param, f64>) -> Result<GridOperator> {
        let mut values = params.clone();
        values.insert(Param::Hbar, self.hbar);
        let mut out = GridOperator::zero(self.dims.len());
        for (power, f) in e.terms() {
            let mut positions = vec![Vec::new(); self.dims.len()];
            for (mu, &k) in power.iter().enumerate() {
                if k > 0 {
                    positions[self.slot(mu)?] = vec![Action::Position; k as usize];
                }
            }
            for (coeff, diags) in self.lower_function(f, &values)? {
                let words = diags
                    .into_iter()
                    .zip(&positions)
                    .map(|(d, xs)| {
                        d.map(|v| Action::Diagonal(Arc::new(v))).into_iter().chain(xs.iter().cloned()).collect()
                    })
                    .collect();
                out.terms.push(OpTerm { coeff, words });
            }
        }
        Ok(out)
    }

    /// Splits `F` into separable terms `c · Π_slot d_slot(p_slot)`.
    #[allow(clippy::type_complexity)]
    fn lower_function(
        &self,
        f: &MomentumFunction,
        values: &BTreeMap<Param, f64>,
    ) -> Result<Vec<(Complex64, Vec<Option<Vec<Complex64>>>)>> {
        let param_value = |idx: usize| -> Result<f64> {
            let p = Param::ALL[idx];
            values.get(&p).copied().ok_or_else(|| UncertaintyError::MissingParameter(p.name().into()))
        };
        let mut out = Vec::new();
        for (atoms, poly) in f.terms() {
            // Atom factors, shared by every monomial of the polynomial part.
            let mut atom_coeff = Complex64::new(1.0, 0.0);
            let mut atom_diags: Vec<Option<Vec<Complex64>>> = vec![None; self.dims.len()];
            for (atom, power) in atoms {
                let mut moms = (0..MOMENTUM_COUNT)
                    .filter(|&mu| atom.arg.terms().any(|(m, _)| m.momentum_exp(mu) > 0))
                    .collect::<Vec<_>>();
                if moms.len() > 1 {
                    return Err(UncertaintyError::Unlowerable(format!("{} couples several momenta", atom.render('p'))));
                }
                let mu = moms.pop();
                for (m, _) in atom.arg.terms() {
                    for idx in (0..PARAM_COUNT).filter(|&i| m.0[i] > 0) {
                        param_value(idx)?;
                    }
                }
                let eval_at = |p: f64| -> Result<Complex64> {
                    let z = atom.arg.eval_complex(&|idx| {
                        if idx >= PARAM_COUNT {
                            Some(Complex64::new(if Some(idx - PARAM_COUNT) == mu { p } else { 0.0 }, 0.0))
                        } else {
                            param_value(idx).ok().map(|v| Complex64::new(v, 0.0))
                        }
                    });
                    z.map(|z| atom.kind.eval(z).powu(*power))
                        .ok_or_else(|| UncertaintyError::Unlowerable(atom.render('p')))
                };
                match mu {
                    None => atom_coeff *= eval_at(0.0)?,
                    Some(mu) => {
                        let s = self.slot(mu)?;
                        let column = self.grids[s].points.iter().map(|&p| eval_at(p)).collect::<Result<Vec<_>>>()?;
                        atom_diags[s] = Some(match atom_diags[s].take() {
                            None => column,
                            Some(prev) => prev.iter().zip(&column).map(|(a, b)| a * b).collect(),
                        });
                    }
                }
            }
            for (mono, c) in poly.terms() {
                let mut coeff = atom_coeff * c.to_complex();
                for idx in 0..PARAM_COUNT {
                    let e = mono.0[idx];
                    if e > 0 {
                        coeff *= param_value(idx)?.powi(e as i32);
                    }
                }
                let mut diags = atom_diags.clone();
                for mu in 0..MOMENTUM_COUNT {
                    let e = mono.momentum_exp(mu);
                    if e == 0 {
                        continue;
                    }
                    let s = self.slot(mu)?;
                    let column: Vec<Complex64> =
                        self.grids[s].points.iter().map(|&p| Complex64::new(p.powi(e as i32), 0.0)).collect();
                    diags[s] = Some(match diags[s].take() {
                        None => column,
                        Some(prev) => prev.iter().zip(&column).map(|(a, b)| a * b).collect(),
                    });
                }
                out.push((coeff, diags));
            }
        }
        Ok(out)
    }

    fn apply_word(&self, slot: usize, word: &[Action], v: &[Complex64]) -> Vec<Complex64> {
        let grid = &self.grids[slot];
        let i_hbar_g = Complex64::new(0.0, self.hbar * metric(self.dims[slot]) as f64);
        let mut out = v.to_vec();
        for action in word.iter().rev() {
            out = match action {
                Action::Position => grid.derivative(&out).into_iter().map(|c| c * i_hbar_g).collect(),
                Action::Diagonal(d) => out.iter().zip(d.iter()).map(|(a, b)| a * b).collect(),
            };
        }
        out
    }

    pub fn apply(&self, op: &GridOperator, psi: &GridState) -> GridState {
        let mut components = Vec::with_capacity(op.terms.len() * psi.components.len());
        for t in &op.terms {
            for c in &psi.components {
                let factors = c
                    .factors
                    .iter()
                    .enumerate()
                    .map(|(s, f)| if t.words[s].is_empty() { f.clone() } else { self.apply_word(s, &t.words[s], f) })
                    .collect();
                components.push(Component { coeff: t.coeff * c.coeff, factors });
            }
        }
        GridState { components }
    }

    /// `⟨a|b⟩`.
    pub fn inner(&self, a: &GridState, b: &GridState) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for x in &a.components {
            for y in &b.components {
                let mut t = x.coeff.conj() * y.coeff;
                for (s, g) in self.grids.iter().enumerate() {
                    t *= g.inner(&x.factors[s], &y.factors[s]);
                }
                acc += t;
            }
        }
        acc
    }

    pub fn norm(&self, psi: &GridState) -> f64 {
        self.inner(psi, psi).re.max(0.0).sqrt()
    }

    /// `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, psi: &GridState, op: &GridOperator) -> Complex64 {
        self.inner(psi, &self.apply(op, psi))
    }

    /// Upper bound on `max_μ ‖([x̂_μ, p̂_μ] − iħg_μμ)ψ‖`.
    pub fn canonical_residual(&self, psi: &GridState) -> f64 {
        let mut worst: f64 = 0.0;
        for (s, g) in self.grids.iter().enumerate() {
            let x = [Action::Position];
            let ihg = Complex64::new(0.0, self.hbar * metric(self.dims[s]) as f64);
            let mut total = 0.0;
            for c in &psi.components {
                let f = &c.factors[s];
                let pf: Vec<Complex64> = f.iter().zip(&g.points).map(|(a, &p)| a * p).collect();
                let xpf = self.apply_word(s, &x, &pf);
                let xf = self.apply_word(s, &x, f);
                let r: Vec<Complex64> = (0..g.n).map(|k| xpf[k] - g.points[k] * xf[k] - ihg * f[k]).collect();
                let rest: f64 = (0..self.grids.len())
                    .filter(|&t| t != s)
                    .map(|t| self.grids[t].inner(&c.factors[t], &c.factors[t]).re.sqrt())
                    .product();
                total += c.coeff.norm() * g.inner(&r, &r).re.sqrt() * rest;
            }
            worst = worst.max(total);
        }
        worst
    }
}

impl GridState {
    /// Normalized product of Gaussians, one per active direction.
    pub fn gaussian(rep: &GridRep, spec: &[Gaussian1D]) -> Result<Self> {
        if spec.len() != rep.dims.len() {
            return Err(UncertaintyError::InvalidGrid(format!(
                "{} Gaussian factors for {} directions",
                spec.len(),
                rep.dims.len()
            )));
        }
        let mut factors = Vec::with_capacity(spec.len());
        for (s, (g, grid)) in spec.iter().zip(&rep.grids).enumerate() {
            let dim = rep.dims[s];
            if !(g.width.is_finite() && g.width > 0.0 && g.center.is_finite() && g.position.is_finite()) {
                return Err(UncertaintyError::StateOutOfGrid { dim, reason: format!("invalid Gaussian {g:?}") });
            }
            if g.center.abs() + TAIL_WIDTHS * g.width > grid.cutoff {
                return Err(UncertaintyError::CutoffTooClose { center: g.center, cutoff: grid.cutoff, width: g.width });
            }
            let theta = -g.position / (rep.hbar * metric(dim) as f64);
            if g.width * (grid.bandwidth() - theta.abs()) < BAND_WIDTHS {
                return Err(UncertaintyError::StateOutOfGrid {
                    dim,
                    reason: format!(
                        "width {} and position {} are not resolved at step {:.4}; increase the number of points",
                        g.width, g.position, grid.step
                    ),
                });
            }
            let mut f: Vec<Complex64> = grid
                .points
                .iter()
                .map(|&p| {
                    let d = p - g.center;
                    Complex64::from_polar((-d * d / (4.0 * g.width * g.width)).exp(), theta * p)
                })
                .collect();
            let norm = grid.inner(&f, &f).re.sqrt();
            f.iter_mut().for_each(|c| *c /= norm);
            factors.push(f);
        }
        let state = GridState { components: vec![Component { coeff: Complex64::new(1.0, 0.0), factors }] };
        debug_assert!((rep.norm(&state) - 1.0).abs() < NORMALIZATION_TOL);
        Ok(state)
    }

    /// Normalized `Σ c_k ψ_k`.
    pub fn superpose(rep: &GridRep, parts: &[(Complex64, GridState)]) -> Result<Self> {
        let mut components = Vec::new();
        for (c, psi) in parts {
            components
                .extend(psi.components.iter().map(|k| Component { coeff: c * k.coeff, factors: k.factors.clone() }));
        }
        let state = GridState { components };
        let norm = rep.norm(&state);
        if !(norm > 1e-12) {
            return Err(UncertaintyError::InvalidGrid("superposition vanishes".into()));
        }
        Ok(GridState {
            components: state
                .components
                .into_iter()
                .map(|k| Component { coeff: k.coeff / norm, factors: k.factors })
                .collect(),
        })
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }
}

/// `Δ(A) = sqrt(⟨A²⟩ − ⟨A⟩²)`.
pub fn dispersion(rep: &GridRep, psi: &GridState, a: &GridOperator) -> Result<f64> {
    let (mean, second) = moments(rep, psi, a)?;
    let radicand = second - mean * mean;
    if radicand < -RADICAND_TOL * second.max(1.0) {
        return Err(UncertaintyError::NegativeVariance(radicand));
    }
    Ok(radicand.max(0.0).sqrt())
}

/// `(⟨A⟩, ⟨A²⟩)` after checking that `A` acts hermiteanly on `ψ`.
fn moments(rep: &GridRep, psi: &GridState, a: &GridOperator) -> Result<(f64, f64)> {
    let a_psi = rep.apply(a, psi);
    let mean = rep.inner(psi, &a_psi);
    let second = rep.inner(&a_psi, &a_psi).re;
    let direct = rep.inner(psi, &rep.apply(a, &a_psi));
    let scale = second.max(1.0);
    let imbalance = (mean.im.abs() / scale.sqrt()).max((direct - second).norm() / scale);
    if imbalance > HERMITIAN_TOL {
        return Err(UncertaintyError::NonHermitian(imbalance));
    }
    Ok((mean.re, second))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobertsonCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

/// `Δ(A)Δ(B) ≥ ½|⟨[A,B]⟩|` on `ψ`.
pub fn check_robertson(rep: &GridRep, psi: &GridState, a: &GridOperator, b: &GridOperator) -> Result<RobertsonCheck> {
    let lhs = dispersion(rep, psi, a)? * dispersion(rep, psi, b)?;
    let rhs = 0.5 * rep.expectation(psi, &GridOperator::commutator(a, b)).norm();
    let slack = lhs - rhs;
    Ok(RobertsonCheck { lhs, rhs, slack, pass: slack >= -ROBERTSON_TOL })
}

/// Realized preset lowered onto a grid.
#[derive(Debug, Clone)]
pub struct Lab {
    pub preset: RealizationPreset,
    pub parameter: f64,
    rep: GridRep,
    realization: Realization,
    table: RelationTable,
    params: BTreeMap<Param, f64>,
    ops: BTreeMap<PhaseSpaceGenerator, GridOperator>,
}

impl Lab {
    pub fn new(preset: RealizationPreset, parameter: f64, rep: GridRep) -> Result<Self> {
        if !parameter.is_finite() {
            return Err(UncertaintyError::InvalidGrid(format!("parameter {parameter} is not finite")));
        }
        let realization = realize(preset, None);
        let table = target_table(&realization)?;
        let params = BTreeMap::from([(preset.parameter(), parameter)]);
        let mut ops = BTreeMap::new();
        for g in PhaseSpaceGenerator::all() {
            match rep.lower(realization.get(g), &params) {
                Ok(op) => {
                    ops.insert(g, op);
                }
                Err(UncertaintyError::InactiveDimension(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(Lab { preset, parameter, rep, realization, table, params, ops })
    }

    /// Default grid: `n = 256`, cutoff 24 in every active direction.
    pub fn standard(preset: RealizationPreset, parameter: f64, hbar: f64) -> Result<Self> {
        Lab::new(preset, parameter, GridRep::for_preset(preset, DEFAULT_POINTS, DEFAULT_CUTOFF, hbar)?)
    }

    pub fn rep(&self) -> &GridRep {
        &self.rep
    }

    pub fn table(&self) -> &RelationTable {
        &self.table
    }

    /// Realized generator on the grid.
    pub fn operator(&self, g: PhaseSpaceGenerator) -> Result<&GridOperator> {
        let mu = match g {
            PhaseSpaceGenerator::X(m) | PhaseSpaceGenerator::P(m) => m as usize,
        };
        self.ops.get(&g).ok_or(UncertaintyError::InactiveDimension(mu))
    }

    /// Realized `F(p) + Σ c x` on the grid.
    pub fn lower(&self, v: &PhaseValue) -> Result<GridOperator> {
        self.rep.lower(&self.realization.apply(v), &self.params)
    }

    /// Generators represented on this grid.
    pub fn generators(&self) -> Vec<PhaseSpaceGenerator> {
        self.ops.keys().copied().collect()
    }

    /// Table pairs with both generators on the grid.
    pub fn active_pairs(&self) -> Vec<(PhaseSpaceGenerator, PhaseSpaceGenerator)> {
        RelationTable::display_pairs()
            .into_iter()
            .filter(|(a, b)| self.ops.contains_key(a) && self.ops.contains_key(b))
            .collect()
    }

    /// `max |⟨[A,B]⟩ − ⟨table(A,B)⟩|` over the active pairs.
    pub fn table_residual(&self, psi: &GridState) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (a, b) in self.active_pairs() {
            let numeric = self.rep.expectation(psi, &GridOperator::commutator(&self.ops[&a], &self.ops[&b]));
            let symbolic = self.rep.expectation(psi, &self.lower(&self.table.get(a, b))?);
            worst = worst.max((numeric - symbolic).norm());
        }
        Ok(worst)
    }
}

/// One printed inequality `Δ(a)Δ(b) ≥ ½|⟨bound⟩|`.
#[derive(Debug, Clone)]
pub struct InequalityLine {
    pub a: PhaseSpaceGenerator,
    pub b: PhaseSpaceGenerator,
    pub bound: PhaseValue,
    pub printed: &'static str,
}

/// The generalized uncertainty relations of a preset, in printed order.
pub fn inequality_lines(preset: RealizationPreset) -> Vec<InequalityLine> {
    use PhaseSpaceGenerator::{P, X};
    let c = ParamScalar::param(preset.parameter());
    let hbar = ParamScalar::param(Param::Hbar);
    let hc = &hbar * &c;
    let two_hc = hc.scale(&crate::scalar::GaussRat::from_int(2));
    let coord = |mu: usize| PhaseValue::coordinate(mu, two_hc.clone());
    let mom = |mu: usize| PhaseValue::function(MomentumFunction::momentum(mu).scale(&hc));
    let line = |a, b, bound, printed| InequalityLine { a, b, bound, printed };
    match preset {
        RealizationPreset::Iso2 => {
            let angle = LinearForm::single(0, c.clone());
            let cs = PhaseValue::function(MomentumFunction::cos(&angle).scale(&hbar));
            let sn = PhaseValue::function(MomentumFunction::sin(&angle).scale(&hbar));
            vec![
                line(X(0), X(1), coord(2), "hbar*alpha*|<x2>|"),
                line(X(0), P(1), mom(2), "1/2*hbar*alpha*|<p2>|"),
                line(X(0), X(2), coord(1), "hbar*alpha*|<x1>|"),
                line(X(0), P(2), mom(1), "1/2*hbar*alpha*|<p1>|"),
                line(P(1), X(1), cs.clone(), "1/2*hbar*|<cos(alpha*p0)>|"),
                line(P(1), X(2), sn.clone(), "1/2*hbar*|<sin(alpha*p0)>|"),
                line(P(2), X(1), sn, "1/2*hbar*|<sin(alpha*p0)>|"),
                line(P(2), X(2), cs, "1/2*hbar*|<cos(alpha*p0)>|"),
            ]
        }
        RealizationPreset::Iso11 => {
            let rapidity = LinearForm::single(1, c.clone());
            let ch = PhaseValue::function(MomentumFunction::cosh(&rapidity).scale(&hbar));
            let sh = PhaseValue::function(MomentumFunction::sinh(&rapidity).scale(&hbar));
            vec![
                line(X(0), X(1), coord(3), "hbar*beta*|<x3>|"),
                line(X(3), X(1), coord(0), "hbar*beta*|<x0>|"),
                line(P(0), X(1), mom(3), "1/2*hbar*beta*|<p3>|"),
                line(P(3), X(1), mom(0), "1/2*hbar*beta*|<p0>|"),
                line(P(0), X(3), sh.clone(), "1/2*hbar*|<sinh(beta*p1)>|"),
                line(P(3), X(0), sh, "1/2*hbar*|<sinh(beta*p1)>|"),
                line(P(0), X(0), ch.clone(), "1/2*hbar*|<cosh(beta*p1)>|"),
                line(P(3), X(3), ch, "1/2*hbar*|<cosh(beta*p1)>|"),
            ]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteRow {
    pub state: usize,
    pub pair: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Printed right-hand side evaluated on the state.
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub preset: String,
    pub parameter: f64,
    pub hbar: f64,
    pub points: usize,
    pub cutoffs: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub states: usize,
    pub lines: Vec<String>,
    pub rows: Vec<SuiteRow>,
    pub min_slack: f64,
    /// Largest gap between the numeric commutator and the printed bound.
    pub bound_residual: f64,
    pub canonical_residual: f64,
    pub table_residual: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let seed = self.seed.map(|s| format!(", seed {s}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "uncertainty suite: {} (parameter {}, hbar {}, n {}{}): {}",
            self.preset,
            self.parameter,
            self.hbar,
            self.points,
            seed,
            if self.pass { "PASS" } else { "FAIL" }
        );
        for l in &self.lines {
            let _ = writeln!(out, "  {l}");
        }
        let _ = writeln!(
            out,
            "{:>6}  {:<8}  {:>14}  {:>14}  {:>14}  {:>12}  pass",
            "state", "pair", "lhs", "rhs", "bound", "slack"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>6}  {:<8}  {:>14.8e}  {:>14.8e}  {:>14.8e}  {:>12.4e}  {}",
                r.state,
                r.pair,
                r.lhs,
                r.rhs,
                r.bound,
                r.slack,
                if r.pass { "ok" } else { "FAIL" }
            );
        }
        let _ = writeln!(
            out,
            "min slack {:.4e}; bound residual {:.3e}; canonical residual {:.3e}; table residual {:.3e}",
            self.min_slack, self.bound_residual, self.canonical_residual, self.table_residual
        );
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

/// Random Gaussian sampling relative to each direction's cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSampler {
    /// Centers are drawn from `±center_fraction·Λ`.
    pub center_fraction: f64,
    /// Widths are drawn from `[min, max]·Λ`.
    pub width_fraction: (f64, f64),
    /// Position means are drawn from `±position_range·ħ`.
    pub position_range: f64,
}

impl Default for StateSampler {
    fn default() -> Self {
        StateSampler { center_fraction: 0.3, width_fraction: (0.025, 0.05), position_range: 3.0 }
    }
}

impl StateSampler {
    pub fn sample(&self, rep: &GridRep, count: usize, seed: u64) -> Vec<Vec<Gaussian1D>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                rep.grids
                    .iter()
                    .map(|g| {
                        let l = g.cutoff;
                        let center = rng.gen_range(-1.0..=1.0) * self.center_fraction * l;
                        let width = rng.gen_range(self.width_fraction.0..=self.width_fraction.1) * l;
                        let position = rng.gen_range(-1.0..=1.0) * self.position_range * rep.hbar;
                        Gaussian1D { center, width, position }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Evaluates every inequality line on every state.
pub fn uncertainty_suite(lab: &Lab, states: &[GridState]) -> Result<SuiteReport> {
    let lines = inequality_lines(lab.preset);
    let rep = &lab.rep;
    let lowered = lines
        .iter()
        .map(|l| Ok((lab.operator(l.a)?, lab.operator(l.b)?, lab.lower(&l.bound)?)))
        .collect::<Result<Vec<_>>>()?;
    type PerState = (Vec<SuiteRow>, f64, f64, f64);
    let per_state: Vec<PerState> = states
        .par_iter()
        .enumerate()
        .map(|(k, psi)| -> Result<PerState> {
            let canonical = rep.canonical_residual(psi);
            if canonical > CANONICAL_TOL {
                return Err(UncertaintyError::GridInadequate { residual: canonical, tol: CANONICAL_TOL });
            }
            let mut rows = Vec::with_capacity(lines.len());
            let mut bound_gap: f64 = 0.0;
            for (line, (a, b, bound_op)) in lines.iter().zip(&lowered) {
                let r = check_robertson(rep, psi, a, b)?;
                let bound = 0.5 * rep.expectation(psi, bound_op).norm();
                bound_gap = bound_gap.max((bound - r.rhs).abs());
                rows.push(SuiteRow {
                    state: k,
                    pair: format!("({},{})", line.a, line.b),
                    lhs: r.lhs,
                    rhs: r.rhs,
                    bound,
                    slack: r.slack,
                    pass: r.pass,
                });
            }
            Ok((rows, canonical, lab.table_residual(psi)?, bound_gap))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let (mut canonical, mut table, mut bound_gap): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (r, c, t, b) in per_state {
        rows.extend(r);
        canonical = canonical.max(c);
        table = table.max(t);
        bound_gap = bound_gap.max(b);
    }
    let min_slack = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    let mut notes = Vec::new();
    if lab.parameter == 0.0 {
        let canonical_rows: Vec<&SuiteRow> = rows.iter().filter(|r| r.rhs > 0.0).collect();
        let worst = canonical_rows.iter().map(|r| r.slack).fold(0.0, f64::max);
        notes.push(format!(
            "parameter 0: lines reduce to the canonical relations; canonical saturation gap (max slack on nonzero commutators) {worst:.3e}"
        ));
    }
    let pass = rows.iter().all(|r| r.pass) && table < TABLE_TOL && bound_gap < TABLE_TOL;
    Ok(SuiteReport {
        preset: lab.preset.name().into(),
        parameter: lab.parameter,
        hbar: rep.hbar,
        points: rep.points(),
        cutoffs: rep.cutoffs(),
        seed: None,
        states: states.len(),
        lines: lines.iter().map(|l| format!("D({})D({}) >= {}", l.a, l.b, l.printed)).collect(),
        rows,
        min_slack,
        bound_residual: bound_gap,
        canonical_residual: canonical,
        table_residual: table,
        pass,
        notes,
    })
}

/// Suite over `count` seeded random Gaussians.
pub fn random_suite(lab: &Lab, count: usize, seed: u64, sampler: &StateSampler) -> Result<SuiteReport> {
    let states = sampler
        .sample(&lab.rep, count, seed)
        .iter()
        .map(|s| GridState::gaussian(&lab.rep, s))
        .collect::<Result<Vec<_>>>()?;
    let mut report = uncertainty_suite(lab, &states)?;
    report.seed = Some(seed);
    Ok(report)
}

/// Fixed-width Gaussians marching along the preset's transverse momentum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub parameter: f64,
    pub hbar: f64,
    pub points: usize,
    pub width: f64,
    /// Momentum centers along `p0` (iso2) or `p1` (iso11).
    pub centers: Vec<f64>,
    /// Cutoff of the scanned direction; fitted to the centers when absent.
    #[serde(default)]
    pub cutoff: Option<f64>,
}

impl ScanConfig {
    /// Default scan laid out in scaled units so the covered range of
    /// `parameter · center` does not depend on the parameter: iso2 scans
    /// `αp̄₀ ∈ {0, π/4, …, 4π}` at `ασ = 0.5`, iso11 scans `βp̄₁ ∈ {0, …, 4}` at
    /// `βσ = 0.2`. A zero parameter uses unit scaling.
    pub fn for_parameter(preset: RealizationPreset, parameter: f64, hbar: f64) -> Self {
        let unit = if parameter == 0.0 { 1.0 } else { parameter.abs() };
        let (scaled, width): (Vec<f64>, f64) = match preset {
            RealizationPreset::Iso2 => ((0..=16).map(|k| k as f64 * PI / 4.0).collect(), 0.5),
            RealizationPreset::Iso11 => ((0..=4).map(f64::from).collect(), 0.2),
        };
        ScanConfig {
            parameter,
            hbar,
            points: DEFAULT_POINTS,
            width: width / unit,
            centers: scaled.into_iter().map(|c| c / unit).collect(),
            cutoff: None,
        }
    }

    pub fn default_for(preset: RealizationPreset) -> Self {
        ScanConfig::for_parameter(preset, 1.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub center: f64,
    /// `parameter · center`.
    pub scaled: f64,
    /// `½|⟨[a,b]⟩|` per scanned line.
    pub rhs: Vec<f64>,
    /// `½ħ` for iso2, `½ħ cosh(βp̄₁)` for iso11.
    pub reference: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub preset: String,
    pub parameter: f64,
    pub hbar: f64,
    pub width: f64,
    pub cutoff: f64,
    pub lines: Vec<String>,
    pub points: Vec<ScanPoint>,
    pub max_rhs: f64,
    /// Non-decreasing first line along increasing centers.
    pub monotone: bool,
    /// Least-squares `A` in `rhs ≈ A · reference`.
    pub fit_amplitude: f64,
    pub max_ratio_deviation: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ScanReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scan report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("center,scaled");
        for l in &self.lines {
            let _ = write!(out, ",rhs_{}", l.replace(['(', ')'], "").replace(',', "_"));
        }
        out.push_str(",reference,ratio\n");
        for p in &self.points {
            let _ = write!(out, "{:.12e},{:.12e}", p.center, p.scaled);
            for r in &p.rhs {
                let _ = write!(out, ",{r:.12e}");
            }
            let _ = writeln!(out, ",{:.12e},{:.12e}", p.reference, p.ratio);
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "limit scan: {} (parameter {}, width {}, cutoff {:.4}): {}",
            self.preset,
            self.parameter,
            self.width,
            self.cutoff,
            if self.pass { "PASS" } else { "FAIL" }
        );
        let _ = write!(out, "{:>14}  {:>14}", "center", "scaled");
        for l in &self.lines {
            let _ = write!(out, "  {l:>14}");
        }
        let _ = writeln!(out, "  {:>14}  {:>10}", "reference", "ratio");
        for p in &self.points {
            let _ = write!(out, "{:>14.6}  {:>14.6}", p.center, p.scaled);
            for r in &p.rhs {
                let _ = write!(out, "  {r:>14.8e}");
            }
            let _ = writeln!(out, "  {:>14.8e}  {:>10.6}", p.reference, p.ratio);
        }
        let _ = writeln!(
            out,
            "max rhs {:.8e}; monotone {}; fit amplitude {:.6}; max ratio deviation {:.4e}",
            self.max_rhs, self.monotone, self.fit_amplitude, self.max_ratio_deviation
        );
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

/// Right-hand sides along a momentum scan. iso2 stays below `½ħ`; iso11
/// grows like `cosh(β⟨p₁⟩)`.
pub fn limit_scan(preset: RealizationPreset, config: &ScanConfig) -> Result<ScanReport> {
    use PhaseSpaceGenerator::{P, X};
    if config.centers.is_empty() {
        return Err(UncertaintyError::InvalidGrid("no scan centers".into()));
    }
    if !(config.width.is_finite() && config.width > 0.0) {
        return Err(UncertaintyError::InvalidGrid(format!("width {} must be positive", config.width)));
    }
    let max_center = config.centers.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let cutoff = config.cutoff.unwrap_or_else(|| fit_cutoff(max_center, config.width));
    let (scan_dim, lines) = match preset {
        RealizationPreset::Iso2 => (0, vec![(P(1), X(1)), (P(2), X(2))]),
        RealizationPreset::Iso11 => (1, vec![(P(0), X(0))]),
    };
    let dims = active_dims(preset);
    let spectator_width = 1.0;
    let cutoffs: Vec<f64> =
        dims.iter().map(|&d| if d == scan_dim { cutoff } else { fit_cutoff(0.0, spectator_width) }).collect();
    let rep = GridRep::new(&dims, config.points, &cutoffs, config.hbar)?;
    let lab = Lab::new(preset, config.parameter, rep)?;
    let ops = lines
        .iter()
        .map(|&(a, b)| Ok(GridOperator::commutator(lab.operator(a)?, lab.operator(b)?)))
        .collect::<Result<Vec<_>>>()?;
    let half_hbar = 0.5 * config.hbar;
    let points = config
        .centers
        .par_iter()
        .map(|&center| -> Result<ScanPoint> {
            let spec: Vec<Gaussian1D> = dims
                .iter()
                .map(|&d| {
                    if d == scan_dim {
                        Gaussian1D::new(center, config.width)
                    } else {
                        Gaussian1D::new(0.0, spectator_width)
                    }
                })
                .collect();
            let psi = GridState::gaussian(&lab.rep, &spec)?;
            let rhs: Vec<f64> = ops.iter().map(|c| 0.5 * lab.rep.expectation(&psi, c).norm()).collect();
            let scaled = config.parameter * center;
            let reference = match preset {
                RealizationPreset::Iso2 => half_hbar,
                RealizationPreset::Iso11 => half_hbar * scaled.cosh(),
            };
            let top = rhs.iter().copied().fold(0.0, f64::max);
            Ok(ScanPoint { center, scaled, rhs, reference, ratio: top / reference })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_rhs = points.iter().flat_map(|p| p.rhs.iter().copied()).fold(0.0, f64::max);
    let mut order: Vec<&ScanPoint> = points.iter().collect();
    order.sort_by(|a, b| a.center.total_cmp(&b.center));
    let monotone = order.windows(2).all(|w| w[1].rhs[0] >= w[0].rhs[0] - 1e-12);
    let (num, den) =
        points.iter().fold((0.0, 0.0), |(n, d), p| (n + p.rhs[0] * p.reference, d + p.reference * p.reference));
    let fit_amplitude = num / den;
    let max_ratio_deviation = points.iter().map(|p| (p.ratio - 1.0).abs()).fold(0.0, f64::max);
    let mut notes = Vec::new();
    let pass = match preset {
        RealizationPreset::Iso2 => {
            notes.push(format!("bound 1/2*hbar = {half_hbar}"));
            max_rhs <= half_hbar + SCAN_BOUND_TOL
        }
        RealizationPreset::Iso11 => {
            notes.push(format!(
                "narrow-state prediction exp(beta^2*width^2/2) = {:.6}",
                (0.5 * (config.parameter * config.width).powi(2)).exp()
            ));
            monotone && max_ratio_deviation <= SCAN_RATIO_TOL
        }
    };
    Ok(ScanReport {
        preset: preset.name().into(),
        parameter: config.parameter,
        hbar: config.hbar,
        width: config.width,
        cutoff,
        lines: lines.iter().map(|(a, b)| format!("({a},{b})")).collect(),
        points,
        max_rhs,
        monotone,
        fit_amplitude,
        max_ratio_deviation,
        pass,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canonical_rep() -> GridRep {
        GridRep::uniform(&[1], DEFAULT_POINTS, DEFAULT_CUTOFF, 1.0).unwrap()
    }

    #[test]
    fn minimum_uncertainty_gaussian_saturates() {
        let rep = canonical_rep();
        let psi = GridState::gaussian(&rep, &[Gaussian1D::new(1.5, 0.8).at_position(-2.0)]).unwrap();
        let dx = dispersion(&rep, &psi, &rep.position(1).unwrap()).unwrap();
        let dp = dispersion(&rep, &psi, &rep.momentum(1).unwrap()).unwrap();
        assert!((dx * dp - 0.5).abs() < 1e-8, "{}", dx * dp);
        assert!((dp - 0.8).abs() < 1e-8);
        let mean_x = rep.expectation(&psi, &rep.position(1).unwrap());
        assert!((mean_x.re + 2.0).abs() < 1e-8 && mean_x.im.abs() < 1e-10);
        assert!((rep.norm(&psi) - 1.0).abs() < NORMALIZATION_TOL);
    }

    #[test]
    fn time_direction_uses_negative_metric() {
        let rep = GridRep::uniform(&[0], DEFAULT_POINTS, DEFAULT_CUTOFF, 1.0).unwrap();
        let psi = GridState::gaussian(&rep, &[Gaussian1D::new(0.5, 1.0).at_position(1.0)]).unwrap();
        let x = rep.position(0).unwrap();
        let c = rep.expectation(&psi, &GridOperator::commutator(&x, &rep.momentum(0).unwrap()));
        assert!((c - Complex64::new(0.0, -1.0)).norm() < 1e-10);
        assert!((rep.expectation(&psi, &x).re - 1.0).abs() < 1e-8);
        assert!(rep.canonical_residual(&psi) < CANONICAL_TOL);
    }

    #[test]
    fn non_hermitian_operator_is_rejected() {
        let rep = canonical_rep();
        let psi = GridState::gaussian(&rep, &[Gaussian1D::new(0.0, 1.0)]).unwrap();
        let xp = rep.position(1).unwrap().mul(&rep.momentum(1).unwrap());
        assert!(matches!(dispersion(&rep, &psi, &xp), Err(UncertaintyError::NonHermitian(_))));
    }

    #[test]
    fn state_near_cutoff_is_rejected() {
        let rep = canonical_rep();
        let err = GridState::gaussian(&rep, &[Gaussian1D::new(20.0, 1.0)]).unwrap_err();
        assert!(matches!(err, UncertaintyError::CutoffTooClose { .. }));
    }

    #[test]
    fn superposition_is_normalized() {
        let rep = canonical_rep();
        let a = GridState::gaussian(&rep, &[Gaussian1D::new(-3.0, 1.0)]).unwrap();
        let b = GridState::gaussian(&rep, &[Gaussian1D::new(3.0, 1.0).at_position(1.0)]).unwrap();
        let s = GridState::superpose(&rep, &[(Complex64::new(1.0, 0.0), a), (Complex64::new(0.0, 1.0), b)]).unwrap();
        assert_eq!(s.component_count(), 2);
        assert!((rep.norm(&s) - 1.0).abs() < NORMALIZATION_TOL);
        let r = check_robertson(&rep, &s, &rep.position(1).unwrap(), &rep.momentum(1).unwrap()).unwrap();
        assert!(r.pass && (r.rhs - 0.5).abs() < 1e-10);
    }

    #[test]
    fn realized_iso2_commutator_matches_table() {
        let lab = Lab::standard(RealizationPreset::Iso2, 0.1, 1.0).unwrap();
        assert_eq!(lab.generators().len(), 6);
        let states = StateSampler::default().sample(lab.rep(), 3, 7);
        for s in states {
            let psi = GridState::gaussian(lab.rep(), &s).unwrap();
            assert!(lab.table_residual(&psi).unwrap() < TABLE_TOL);
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let rep = GridRep::for_preset(RealizationPreset::Iso11, 64, 24.0, 1.0).unwrap();
        let s = StateSampler::default();
        assert_eq!(s.sample(&rep, 4, 11), s.sample(&rep, 4, 11));
        assert_ne!(s.sample(&rep, 4, 11), s.sample(&rep, 4, 12));
    }
}
