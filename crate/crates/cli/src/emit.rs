//! Output emission: significant-digit float formatting, CSV writing, bin
//! aggregation and SVG rendering. Everything here is a pure function of its
//! inputs, so repeated runs with the same seed produce byte-identical files.

use std::path::Path;

use anyhow::Result;

/// Format with the given number of significant digits, `%g`-style: fixed
/// notation for moderate exponents, scientific otherwise, trailing zeros
/// trimmed. All floats in output tables use 12 significant digits.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // Round once via scientific formatting, then re-present.
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific form");
    let exp: i32 = exp.parse().expect("exponent");
    let neg = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if neg { "-" } else { "" };

    if exp < -4 || exp >= sig as i32 {
        let trimmed = digits.trim_end_matches('0');
        let trimmed = if trimmed.is_empty() { "0" } else { trimmed };
        if trimmed.len() == 1 {
            format!("{sign}{trimmed}e{exp}")
        } else {
            format!("{sign}{}.{}e{exp}", &trimmed[..1], &trimmed[1..])
        }
    } else if exp >= 0 {
        let int_len = exp as usize + 1;
        let int_part = &digits[..int_len.min(digits.len())];
        let frac_part = digits[int_len.min(digits.len())..].trim_end_matches('0');
        if frac_part.is_empty() {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac_part}")
        }
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        let frac = format!("{zeros}{digits}");
        let frac = frac.trim_end_matches('0');
        format!("{sign}0.{frac}")
    }
}

/// Standard 12-digit form used in all CSV output.
pub fn fmt12(x: f64) -> String {
    fmt_sig(x, 12)
}

/// One aggregation bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinRow {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub sigma: f64,
}

/// Aggregate `(key, value)` points into half-open bins `[lo + i*w, lo +
/// (i+1)*w)`. With `overflow`, a final bin catches keys at or above the top
/// edge; keys below `lo` are dropped. Empty bins are kept (count 0).
pub fn bin_stats(
    points: &[(f64, f64)],
    lo: f64,
    width: f64,
    nbins: usize,
    overflow: bool,
) -> Vec<BinRow> {
    let total_bins = nbins + overflow as usize;
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); total_bins];
    for &(key, value) in points {
        if key < lo {
            continue;
        }
        let idx = ((key - lo) / width).floor() as usize;
        if idx < nbins {
            buckets[idx].push(value);
        } else if overflow {
            buckets[nbins].push(value);
        }
    }
    buckets
        .into_iter()
        .enumerate()
        .map(|(i, mut values)| {
            let bin_lo = lo + i as f64 * width;
            let bin_hi = if overflow && i == nbins {
                f64::INFINITY
            } else {
                lo + (i + 1) as f64 * width
            };
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let count = values.len();
            let mean = if count == 0 {
                0.0
            } else {
                values.iter().sum::<f64>() / count as f64
            };
            let median = match count {
                0 => 0.0,
                c if c % 2 == 1 => values[c / 2],
                c => (values[c / 2 - 1] + values[c / 2]) / 2.0,
            };
            let sigma = if count < 2 {
                0.0
            } else {
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                    / (count - 1) as f64;
                var.sqrt()
            };
            BinRow {
                lo: bin_lo,
                hi: bin_hi,
                count,
                mean,
                median,
                sigma,
            }
        })
        .collect()
}

/// Write string records as CSV with the given header.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Bin-summary CSV: one row per bin.
pub fn write_bins_csv(path: &Path, key_name: &str, bins: &[BinRow]) -> Result<()> {
    let key_lo = format!("{key_name}_lo");
    let key_hi = format!("{key_name}_hi");
    let header = [key_lo.as_str(), key_hi.as_str(), "count", "mean", "median", "sigma"];
    let rows: Vec<Vec<String>> = bins
        .iter()
        .map(|b| {
            vec![
                fmt12(b.lo),
                if b.hi.is_finite() { fmt12(b.hi) } else { "inf".into() },
                b.count.to_string(),
                fmt12(b.mean),
                fmt12(b.median),
                fmt12(b.sigma),
            ]
        })
        .collect();
    write_csv(path, &header, &rows)
}

// ---- SVG rendering -------------------------------------------------------

const W: f64 = 800.0;
const H: f64 = 520.0;
const HIST_H: f64 = 140.0;
const MARGIN: f64 = 60.0;

fn px(v: f64) -> String {
    fmt_sig(v, 6)
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    top: f64,
    height: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.x0) / (self.x1 - self.x0) * (W - 2.0 * MARGIN)
    }
    fn y(&self, v: f64) -> f64 {
        self.top + self.height - (v - self.y0) / (self.y1 - self.y0) * self.height
    }
}

/// Mean/median lines with a one-sigma band over binned data, plus an
/// instance-count histogram subpanel.
pub fn band_plot_svg(title: &str, xlabel: &str, ylabel: &str, bins: &[BinRow]) -> String {
    let filled: Vec<&BinRow> = bins.iter().filter(|b| b.count > 0 && b.hi.is_finite()).collect();
    let mut out = String::new();
    let total_h = H + HIST_H;
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{total_h}\" \
         viewBox=\"0 0 {W} {total_h}\">\n"
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{title}</text>\n",
        W / 2.0
    ));
    if filled.is_empty() {
        out.push_str("<text x=\"40\" y=\"60\" font-size=\"14\">no data</text>\n</svg>\n");
        return out;
    }
    let x0 = filled.iter().map(|b| b.lo).fold(f64::INFINITY, f64::min);
    let x1 = filled.iter().map(|b| b.hi).fold(f64::NEG_INFINITY, f64::max);
    let mut y0 = filled
        .iter()
        .map(|b| (b.mean - b.sigma).min(b.median))
        .fold(f64::INFINITY, f64::min);
    let mut y1 = filled
        .iter()
        .map(|b| (b.mean + b.sigma).max(b.median))
        .fold(f64::NEG_INFINITY, f64::max);
    if y0 == y1 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let pad = (y1 - y0) * 0.08;
    let frame = Frame {
        x0,
        x1,
        y0: y0 - pad,
        y1: y1 + pad,
        top: 40.0,
        height: H - 40.0 - MARGIN,
    };

    // Axes.
    let base_y = frame.top + frame.height;
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        px(MARGIN),
        px(base_y),
        px(W - MARGIN),
        px(base_y)
    ));
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        px(MARGIN),
        px(frame.top),
        px(MARGIN),
        px(base_y)
    ));
    // Zero line if visible.
    if frame.y0 < 0.0 && frame.y1 > 0.0 {
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"gray\" stroke-dasharray=\"2,4\"/>\n",
            px(MARGIN),
            px(frame.y(0.0)),
            px(W - MARGIN),
            px(frame.y(0.0))
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">{xlabel}</text>\n",
        W / 2.0,
        base_y + 36.0
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-size=\"13\" transform=\"rotate(-90 16 {})\">{ylabel}</text>\n",
        frame.top + frame.height / 2.0,
        frame.top + frame.height / 2.0
    ));

    let mid = |b: &BinRow| (b.lo + b.hi) / 2.0;
    // Sigma band.
    let mut band = String::from("<path d=\"");
    for (i, b) in filled.iter().enumerate() {
        let cmd = if i == 0 { 'M' } else { 'L' };
        band.push_str(&format!(
            "{cmd}{},{} ",
            px(frame.x(mid(b))),
            px(frame.y(b.mean + b.sigma))
        ));
    }
    for b in filled.iter().rev() {
        band.push_str(&format!(
            "L{},{} ",
            px(frame.x(mid(b))),
            px(frame.y(b.mean - b.sigma))
        ));
    }
    band.push_str("Z\" fill=\"#4477aa\" fill-opacity=\"0.25\" stroke=\"none\"/>\n");
    out.push_str(&band);
    // Mean and median lines.
    for (values, style) in [
        (
            filled.iter().map(|b| (mid(b), b.mean)).collect::<Vec<_>>(),
            "stroke=\"#4477aa\" stroke-width=\"2\" fill=\"none\"",
        ),
        (
            filled.iter().map(|b| (mid(b), b.median)).collect::<Vec<_>>(),
            "stroke=\"#ee6677\" stroke-width=\"2\" stroke-dasharray=\"6,3\" fill=\"none\"",
        ),
    ] {
        let pts: Vec<String> = values
            .iter()
            .map(|&(x, y)| format!("{},{}", px(frame.x(x)), px(frame.y(y))))
            .collect();
        out.push_str(&format!("<polyline points=\"{}\" {style}/>\n", pts.join(" ")));
    }
    // Tick labels at bin edges.
    for b in &filled {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{}</text>\n",
            px(frame.x(b.lo)),
            px(base_y + 16.0),
            fmt_sig(b.lo, 3)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#4477aa\">mean &#177; &#963;</text>\n",
        W - MARGIN - 120.0,
        frame.top + 14.0
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#ee6677\">median</text>\n",
        W - MARGIN - 120.0,
        frame.top + 30.0
    ));

    // Histogram subpanel.
    let hist_top = H + 10.0;
    let max_count = bins.iter().map(|b| b.count).max().unwrap_or(1).max(1);
    for b in &filled {
        let h = b.count as f64 / max_count as f64 * (HIST_H - 30.0);
        let x_left = frame.x(b.lo);
        let width = frame.x(b.hi) - frame.x(b.lo) - 2.0;
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#999\"/>\n",
            px(x_left + 1.0),
            px(hist_top + (HIST_H - 30.0) - h),
            px(width.max(1.0)),
            px(h)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\">instances per bin</text>\n",
        MARGIN,
        hist_top + HIST_H - 8.0
    ));
    out.push_str("</svg>\n");
    out
}

/// Mean-with-error-bars plot for a handful of labelled series.
pub fn errorbar_plot_svg(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[(String, Vec<(f64, f64, f64)>)],
) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{title}</text>\n",
        W / 2.0
    ));
    let all: Vec<&(f64, f64, f64)> = series.iter().flat_map(|(_, pts)| pts.iter()).collect();
    if all.is_empty() {
        out.push_str("<text x=\"40\" y=\"60\" font-size=\"14\">no data</text>\n</svg>\n");
        return out;
    }
    let x0 = all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let mut x1 = all.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let mut y0 = all.iter().map(|p| p.1 - p.2).fold(f64::INFINITY, f64::min);
    let mut y1 = all.iter().map(|p| p.1 + p.2).fold(f64::NEG_INFINITY, f64::max);
    if x0 == x1 {
        x1 = x0 + 1.0;
    }
    if y0 == y1 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let pad = (y1 - y0) * 0.08;
    let frame = Frame {
        x0,
        x1,
        y0: y0 - pad,
        y1: y1 + pad,
        top: 40.0,
        height: H - 40.0 - MARGIN,
    };
    let base_y = frame.top + frame.height;
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        px(MARGIN),
        px(base_y),
        px(W - MARGIN),
        px(base_y)
    ));
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        px(MARGIN),
        px(frame.top),
        px(MARGIN),
        px(base_y)
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">{xlabel}</text>\n",
        W / 2.0,
        base_y + 36.0
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-size=\"13\" transform=\"rotate(-90 16 {})\">{ylabel}</text>\n",
        frame.top + frame.height / 2.0,
        frame.top + frame.height / 2.0
    ));
    let colors = ["#4477aa", "#ee6677", "#228833", "#ccbb44"];
    for (si, (label, pts)) in series.iter().enumerate() {
        let color = colors[si % colors.len()];
        let jitter = (si as f64 - (series.len() as f64 - 1.0) / 2.0) * 6.0;
        let line: Vec<String> = pts
            .iter()
            .map(|&(x, m, _)| format!("{},{}", px(frame.x(x) + jitter), px(frame.y(m))))
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" stroke=\"{color}\" stroke-width=\"2\" fill=\"none\"/>\n",
            line.join(" ")
        ));
        for &(x, m, s) in pts {
            let cx = frame.x(x) + jitter;
            out.push_str(&format!(
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\"/>\n",
                px(cx),
                px(frame.y(m - s)),
                px(cx),
                px(frame.y(m + s))
            ));
            out.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>\n",
                px(cx),
                px(frame.y(m))
            ));
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{}</text>\n",
                px(cx),
                px(base_y + 16.0),
                fmt_sig(x, 3)
            ));
        }
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{label}</text>\n",
            W - MARGIN - 110.0,
            frame.top + 16.0 + 16.0 * si as f64
        ));
    }
    out.push_str("</svg>\n");
    out
}
