use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use atslab::inference::RegressionRow;
use atslab::{Error, Result};
use serde::Serialize;

/// Fails unless every input exists and every output directory exists.
pub fn check_paths(inputs: &[&Path], outputs: &[&Path]) -> Result<()> {
    for p in inputs {
        if !p.exists() {
            return Err(Error::InvalidParameter(format!("input {} does not exist", p.display())));
        }
    }
    for p in outputs {
        let dir = parent_dir(p);
        if !dir.is_dir() {
            return Err(Error::InvalidParameter(format!(
                "output directory {} does not exist",
                dir.display()
            )));
        }
        if p.is_dir() {
            return Err(Error::InvalidParameter(format!(
                "output {} is a directory",
                p.display()
            )));
        }
    }
    Ok(())
}

fn parent_dir(p: &Path) -> PathBuf {
    match p.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// `path` with its extension replaced by `ext`.
pub fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(parent_dir(path))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        fill(&mut w)?;
        w.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;

/// Minimal SVG of `ln eta_hat` against `ln theta`: points with two-sd
/// bars, the fitted line and its two-se band.
pub fn regression_svg(rows: &[RegressionRow], title: &str) -> String {
    let xs = rows.iter().map(|r| r.ln_theta);
    let (x0, x1) = bounds(xs);
    let ys = rows.iter().flat_map(|r| {
        [
            r.ln_eta_hat - r.point_half_width,
            r.ln_eta_hat + r.point_half_width,
            r.fitted_ln_eta - r.line_half_width,
            r.fitted_ln_eta + r.line_half_width,
        ]
    });
    let (y0, y1) = bounds(ys.filter(|v| v.is_finite()));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    ));
    s.push_str(&format!(
        "<path d=\"M{m} {b} H{r} M{m} {b} V{m}\" stroke=\"black\" fill=\"none\"/>\n",
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">ln theta</text>\n",
        WIDTH / 2.0,
        HEIGHT - 16.0
    ));
    s.push_str(&format!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 {})\">ln eta_hat</text>\n",
        HEIGHT / 2.0,
        HEIGHT / 2.0
    ));

    let upper: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.2},{:.2}", sx(r.ln_theta), sy(r.fitted_ln_eta + r.line_half_width)))
        .collect();
    let lower: Vec<String> = rows
        .iter()
        .rev()
        .map(|r| format!("{:.2},{:.2}", sx(r.ln_theta), sy(r.fitted_ln_eta - r.line_half_width)))
        .collect();
    s.push_str(&format!(
        "<polygon points=\"{} {}\" fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\"/>\n",
        upper.join(" "),
        lower.join(" ")
    ));
    let line: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.2},{:.2}", sx(r.ln_theta), sy(r.fitted_ln_eta)))
        .collect();
    s.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#3182bd\" stroke-width=\"2\"/>\n",
        line.join(" ")
    ));
    for r in rows {
        let (x, y) = (sx(r.ln_theta), sy(r.ln_eta_hat));
        if r.point_half_width.is_finite() {
            s.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
                sy(r.ln_eta_hat - r.point_half_width),
                sy(r.ln_eta_hat + r.point_half_width)
            ));
        }
        s.push_str(&format!(
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"black\"/>\n"
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
