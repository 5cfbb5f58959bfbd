//! Phase-space relation tables from the dual pairing, with Jacobi checks and
//! algebra classification.

use twistforge::duality::{check_jacobi, classify_algebra, iso2_printed_table, preset_table, PRESETS};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in PRESETS {
        let table = preset_table(name)?;
        print!("{}", table.to_text(false));
        let jacobi = check_jacobi(&table);
        println!("jacobi: {}, class: {:?}\n", if jacobi.pass { "holds" } else { "fails" }, classify_algebra(&table));
    }
    let printed = check_jacobi(&iso2_printed_table()?);
    println!("iso2 with the printed [x0,x2] sign:");
    print!("{}", printed.to_text());
    Ok(())
}
