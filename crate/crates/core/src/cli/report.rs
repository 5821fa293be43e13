use std::path::Path;

use crate::error::{Error, Result};

/// Version tag carried by every JSON summary.
pub const SCHEMA: &str = "v1";

/// 15 significant digits, fixed layout so output is byte-stable.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{x:.14e}")
}

pub fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let io = |e: csv::Error| Error::IoError(e.to_string());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, mut body: serde_json::Value) -> Result<()> {
    if let Some(m) = body.as_object_mut() {
        m.insert("schema".into(), SCHEMA.into());
    }
    let text = serde_json::to_string_pretty(&body).map_err(|e| Error::IoError(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
