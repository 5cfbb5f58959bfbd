//! Oracles shared by the integration tests.
#![allow(dead_code)]

use twistforge::algebra::{AlgebraElement, Generator, PoincareAlgebra, TensorElement};
use twistforge::scalar::{GaussRat, ParamScalar, Poly};

/// `Σ_k c_k z^k` for `k ≤ max`, with `c_k` the Taylor coefficients of
/// cos/sin written out here rather than taken from the library.
pub fn taylor(z: &Poly, odd: bool, max: u32) -> Poly {
    let mut out = Poly::zero();
    let mut fact: i64 = 1;
    let mut power = Poly::one();
    for k in 0..=max {
        if k > 0 {
            fact *= k as i64;
            power = &power * z;
        }
        if (k % 2 == 1) == odd {
            let sign = if (k / 2) % 2 == 0 { 1 } else { -1 };
            out = &out + &power.scale(&GaussRat::from_ratio(sign, fact));
        }
    }
    out
}

pub fn cos_series(z: &Poly, order: u32) -> Poly {
    taylor(z, false, order + 1).truncate(order)
}

pub fn sin_series(z: &Poly, order: u32) -> Poly {
    taylor(z, true, order + 1).truncate(order)
}

/// Embeds a polynomial in the commuting momenta into the enveloping algebra.
pub fn element(alg: &PoincareAlgebra, p: &Poly) -> AlgebraElement {
    let mut out = AlgebraElement::zero();
    for (m, c) in p.terms() {
        let coeff = ParamScalar::from_poly(Poly::term(m.param_part(), c.clone())).expect("parameter coefficient");
        let mut word = AlgebraElement::scalar(coeff);
        for mu in 0..4 {
            for _ in 0..m.momentum_exp(mu) {
                word = alg.mul(&word, &AlgebraElement::generator(Generator::momentum(mu)));
            }
        }
        out = &out + &word;
    }
    out
}

pub fn tensor(alg: &PoincareAlgebra, legs: &[(Poly, Poly)], order: u32) -> TensorElement {
    let mut out = TensorElement::zero(2);
    for (a, b) in legs {
        out = out.checked_add(&TensorElement::pair(&element(alg, a), &element(alg, b))).expect("arity 2");
    }
    out.truncated(order)
}

pub fn mom(mu: usize) -> Poly {
    Poly::momentum(mu)
}
