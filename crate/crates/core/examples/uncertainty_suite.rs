//! Robertson inequalities for random Gaussian states on a momentum grid.

use twistforge::uncertainty::{random_suite, Lab, StateSampler};
use twistforge::weyl::RealizationPreset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (preset, parameter) in [(RealizationPreset::Iso2, 0.1), (RealizationPreset::Iso11, 0.05)] {
        let lab = Lab::standard(preset, parameter, 1.0)?;
        let report = random_suite(&lab, 10, 42, &StateSampler::default())?;
        print!("{}", report.to_text());
        println!();
    }
    Ok(())
}
