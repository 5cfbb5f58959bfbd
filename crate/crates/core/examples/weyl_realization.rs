//! Operator realizations of the iso2 and iso11 tables on the Weyl algebra.

use twistforge::duality::PhaseSpaceGenerator;
use twistforge::weyl::{realize, verify_realization, RealizationPreset};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for preset in [RealizationPreset::Iso2, RealizationPreset::Iso11] {
        let r = realize(preset, None);
        println!("{} realization:", preset.name());
        for g in PhaseSpaceGenerator::all() {
            println!("  {g} -> {}", r.get(g).render());
        }
        print!("{}", verify_realization(&r)?.to_text());
        println!();
    }
    Ok(())
}
