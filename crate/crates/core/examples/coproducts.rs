//! Twisted coproducts of the translations for both twist families, in closed
//! form and as truncated tensors.

use twistforge::algebra::{AlgebraElement, Generator};
use twistforge::twist::{build_twist, TwistCase, TwistSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for case in [TwistCase::I, TwistCase::II] {
        let twist = build_twist(&TwistSpec::simplified(case))?;
        println!("case {case} (order {})", twist.order());
        for mu in 0..4 {
            println!("  D(P{mu}) = {}", twist.translation_coproduct(mu).render(true));
        }
        let m = case.lorentz();
        println!("  D({m}) = {}", twist.coproduct(&AlgebraElement::generator(m)).render(true));
    }
    let twist = build_twist(&TwistSpec::simplified(TwistCase::I).with_order(2))?;
    println!("\ncase i D(P1) to second order:");
    println!("  {}", twist.coproduct(&AlgebraElement::generator(Generator::P1)).render(true));
    Ok(())
}
