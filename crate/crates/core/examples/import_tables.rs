//! Regenerates `data/alg*.json` from the text tables.

use std::path::Path;

use weighwright::strategies::builtin;

fn main() -> weighwright::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    for name in builtin::NAMES {
        let table = builtin::import(name)?;
        std::fs::write(dir.join(format!("{name}.json")), table.to_json())?;
        println!("{name}: {} weighings, {} classifications, {} notes", table.weighings.len(), table.outcomes.len(), table.notes.len());
    }
    Ok(())
}
