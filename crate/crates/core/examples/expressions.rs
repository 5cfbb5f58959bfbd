//! Parse relation values, substitute parameters and render them back.

use twistforge::expr::{parse_phase_value, parse_scalar};
use twistforge::scalar::Param;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inputs =
        ["-i*hbar*cos(alpha*p0)", "2*i*hbar*alpha*x2", "i*hbar*sinh(beta*p1) - i*hbar*beta*p3", "1/2*cosh(xi1m*p1)^2"];
    for text in inputs {
        let v = parse_phase_value(text)?;
        let rendered = v.render();
        assert_eq!(parse_phase_value(&rendered)?, v);
        println!("{text:40} -> {rendered}");
    }
    let v = parse_phase_value("-i*hbar*cos(alpha*p0)")?;
    let half = parse_scalar("1/2")?;
    let sub = v.function.substitute(Param::Alpha, &half);
    println!("alpha = 1/2: {}", sub.render('p'));
    Ok(())
}
