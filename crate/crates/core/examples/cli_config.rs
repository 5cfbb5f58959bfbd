//! Drive the command layer from an inline JSON config plus overrides.

use serde_json::json;
use twistforge::cli::{run, Command, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let document = r#"{"preset": "iso11", "format": "text"}"#;
    let overrides = [("parameters.beta".to_string(), json!("1/4"))];
    let cfg = RunConfig::load(Some(document), &overrides)?;
    let outcome = run(Command::Derive, &cfg);
    print!("{}", outcome.output);
    println!("exit code {}", outcome.code);

    let bad = RunConfig::load(Some(r#"{"preset": "iso2", "grid": {"pointz": 64}}"#), &[]);
    if let Err(e) = bad {
        println!("rejected: {e}");
    }
    Ok(())
}
