//! Cocycle, coassociativity and Hermiticity checks on generic parameters.

use twistforge::twist::{build_twist, check_coassoc_all, check_cocycle, check_hermiticity, TwistCase, TwistSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for case in [TwistCase::I, TwistCase::II] {
        let twist = build_twist(&TwistSpec::generic(case).with_order(3))?;
        for report in [check_cocycle(&twist), check_coassoc_all(&twist), check_hermiticity(&twist)] {
            print!("{}", report.to_text());
        }
        let forms = twist.form_agreement();
        println!("left and right forms agree: {}\n", forms.agree);
    }
    Ok(())
}
