//! Report emission: machine-readable JSONL, a human summary, CSV series.

use std::io::Write;
use std::path::Path;

use serde_json::Value as Json;

use crate::runner::RunOutput;

/// One JSON document per line: the scenario header first, then one record per
/// analysis in declaration order. Key order is alphabetical, so identical runs
/// produce byte-identical output.
pub fn write_machine<W: Write>(out: &mut W, run: &RunOutput) -> std::io::Result<()> {
    writeln!(out, "{}", Json::Object(run.header.clone()))?;
    for a in &run.analyses {
        writeln!(out, "{}", Json::Object(a.record.clone()))?;
    }
    Ok(())
}

pub fn write_human<W: Write>(out: &mut W, run: &RunOutput) -> std::io::Result<()> {
    let name = run.header.get("name").and_then(Json::as_str).unwrap_or("?");
    let product = run.header.get("product").and_then(Json::as_str).unwrap_or("?");
    let dim = run.header.get("dim").and_then(Json::as_u64).unwrap_or(0);
    let seed = run.header.get("seed").and_then(Json::as_u64).unwrap_or(0);
    writeln!(out, "scenario {name}: dim {dim}, {product} product, seed {seed}")?;

    let mut passed = 0;
    for a in &run.analyses {
        let kind = a.record.get("kind").and_then(Json::as_str).unwrap_or("?");
        let label = a.record.get("label").and_then(Json::as_str).unwrap_or("?");
        let ok = a.failures.is_empty();
        passed += ok as usize;
        writeln!(out, "  [{}] {kind} {label}", if ok { "pass" } else { "FAIL" })?;
        for f in &a.failures {
            writeln!(out, "      {f}")?;
        }
    }
    writeln!(out, "{passed}/{} analyses passed", run.analyses.len())
}

/// Writes each gamma_orbit time series as `<label>.csv` under `dir`.
pub fn write_csv(dir: &Path, run: &RunOutput) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for a in &run.analyses {
        if let Some((file, rows)) = &a.csv {
            std::fs::write(dir.join(file), rows.join("\n") + "\n")?;
        }
    }
    Ok(())
}
