//! Compare the two readings of the case ii twist and pick the consistent one.

use twistforge::twist::{adjudicate_case_ii, TwistCase, TwistSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let result = adjudicate_case_ii(&TwistSpec::generic(TwistCase::II).with_order(3))?;
    print!("{}", result.report.to_text());
    println!("chosen: {:?}", result.chosen);
    Ok(())
}
