use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use mfa_core::synth::{GeneratorSpec, Synthesized};

use crate::error::{CliError, CliResult};

/// CSV with `#` metadata lines (generator spec and theory as JSON), a `t,value` header
/// and one row per sample. Floats use the shortest representation that round-trips.
pub fn write_signal_csv(path: &Path, spec: &GeneratorSpec, out: &Synthesized) -> CliResult<()> {
    let f = File::create(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(f);
    writeln!(w, "# generator: {}", serde_json::to_string(spec)?)?;
    writeln!(w, "# theory: {}", serde_json::to_string(&out.theory)?)?;
    for warning in &out.warnings {
        writeln!(w, "# warning: {warning}")?;
    }
    writeln!(w, "t,value")?;
    let dt = out.signal.dt().unwrap_or(1.0);
    for (k, x) in out.signal.samples().iter().enumerate() {
        writeln!(w, "{},{}", k as f64 * dt, x)?;
    }
    w.flush()?;
    Ok(())
}
