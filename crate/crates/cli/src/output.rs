use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use fso_linklab::BerCurve;
use tempfile::NamedTempFile;

pub const CSV_HEADER: &str = "snr_db,ber_analytic,ber_upper_bound,ber_mc,ci_low,ci_high";

/// Six significant digits; scientific below 1e-3 in magnitude.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    if x.abs() < 1e-3 {
        return format!("{x:.5e}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// `#` metadata lines, the header and one row per grid point.
pub fn render_curve(curve: &BerCurve) -> String {
    let mut out = String::new();
    for (k, v) in &curve.metadata {
        let _ = writeln!(out, "# {k}: {v}");
    }
    out.push_str(CSV_HEADER);
    out.push('\n');
    for i in 0..curve.len() {
        let mc = curve.mc.as_ref().and_then(|m| m[i]);
        let (ber, lo, hi) = match mc {
            Some(e) => (
                format_number(e.estimate),
                format_number(e.ci_low),
                format_number(e.ci_high),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{ber},{lo},{hi}",
            format_number(curve.snr_grid_db[i]),
            format_number(curve.analytic[i]),
            format_number(curve.upper_bound[i]),
        );
    }
    out
}

/// Writes `contents` to a temporary file next to `path`, then renames it.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
