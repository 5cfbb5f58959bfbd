//! Scan the uncertainty bound against the mean momentum and write CSV files.
//! Usage: `limit_scan [output-dir]`.

use twistforge::uncertainty::{limit_scan, ScanConfig};
use twistforge::weyl::RealizationPreset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1);
    for preset in [RealizationPreset::Iso2, RealizationPreset::Iso11] {
        let scan = limit_scan(preset, &ScanConfig::default_for(preset))?;
        print!("{}", scan.to_text());
        match &dir {
            Some(d) => {
                let path = std::path::Path::new(d).join(format!("scan_{}.csv", preset.name()));
                std::fs::write(&path, scan.to_csv())?;
                println!("wrote {}", path.display());
            }
            None => print!("{}", scan.to_csv()),
        }
    }
    Ok(())
}
