//! Minimal SVG charts rendered from the CSV files an experiment writes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Lines,
    Markers,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(series: &[Series]) -> Frame {
        let pts = series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|(x, y)| x.is_finite() && y.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        let pad = 0.05 * (y1 - y0);
        Frame {
            x0,
            x1,
            y0: y0 - pad,
            y1: y1 + pad,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn chart(title: &str, x_label: &str, y_label: &str, series: &[Series], style: Style) -> String {
    let f = Frame::fit(series);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = f.x0 + t * (f.x1 - f.x0);
        let yv = f.y0 + t * (f.y1 - f.y0);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            f.px(xv),
            HEIGHT - MARGIN + 16.0,
            tick(xv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            MARGIN - 6.0,
            f.py(yv) + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        MARGIN / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<_> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        match style {
            Style::Lines => {
                let path: Vec<String> = pts
                    .iter()
                    .map(|(x, y)| format!("{:.2},{:.2}", f.px(*x), f.py(*y)))
                    .collect();
                let _ = writeln!(
                    svg,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    path.join(" ")
                );
            }
            Style::Markers => {
                for (x, y) in pts {
                    let _ = writeln!(
                        svg,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}" fill-opacity="0.6"/>"#,
                        f.px(*x),
                        f.py(*y)
                    );
                }
            }
        }
        let ly = MARGIN + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
            WIDTH - MARGIN - 150.0,
            ly - 9.0,
            WIDTH - MARGIN - 135.0,
            ly,
            escape(&s.name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Reads a headed CSV into named numeric columns; blank cells become NaN.
pub fn read_columns(path: &Path) -> Result<BTreeMap<String, Vec<f64>>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(String::from).collect();
    let mut cols: BTreeMap<String, Vec<f64>> = headers.iter().map(|h| (h.clone(), Vec::new())).collect();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        for (h, field) in headers.iter().zip(record.iter()) {
            let v = if field.is_empty() {
                f64::NAN
            } else {
                field.parse().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: row + 2,
                    message: format!("column {h}: not a number: {field:?}"),
                })?
            };
            cols.get_mut(h).expect("header").push(v);
        }
    }
    Ok(cols)
}

fn column<'a>(cols: &'a BTreeMap<String, Vec<f64>>, name: &str, path: &Path) -> Result<&'a [f64]> {
    cols.get(name)
        .map(Vec::as_slice)
        .ok_or_else(|| Error::Data(format!("{}: missing column {name}", path.display())))
}

fn pairs(x: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    x.iter().copied().zip(y.iter().copied()).collect()
}

fn write_svg(path: PathBuf, svg: String, written: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Renders an SVG for every recognised CSV in `dir` and returns the files
/// written.
pub fn render_directory(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();

    let curve = dir.join("training_curve.csv");
    if curve.exists() {
        let cols = read_columns(&curve)?;
        let epoch = column(&cols, "epoch", &curve)?;
        let mut loss = vec![Series {
            name: "train".into(),
            points: pairs(epoch, column(&cols, "loss", &curve)?),
        }];
        if let Some(v) = cols.get("validation_loss") {
            loss.push(Series {
                name: "held-out".into(),
                points: pairs(epoch, v),
            });
        }
        write_svg(
            dir.join("loss.svg"),
            chart("Loss", "epoch", "loss", &loss, Style::Lines),
            &mut written,
        )?;
        let acc = column(&cols, "accuracy", &curve)?;
        if acc.iter().any(|v| v.is_finite()) {
            let mut series = vec![Series {
                name: "train".into(),
                points: pairs(epoch, acc),
            }];
            if let Some(v) = cols.get("validation_accuracy") {
                series.push(Series {
                    name: "held-out".into(),
                    points: pairs(epoch, v),
                });
            }
            write_svg(
                dir.join("accuracy.svg"),
                chart("Accuracy", "epoch", "accuracy", &series, Style::Lines),
                &mut written,
            )?;
        }
    }

    let scatter = dir.join("xor_scatter.csv");
    if scatter.exists() {
        let cols = read_columns(&scatter)?;
        let (p1, p2, truth) = (
            column(&cols, "p1", &scatter)?,
            column(&cols, "p2", &scatter)?,
            column(&cols, "ground_truth", &scatter)?,
        );
        let series: Vec<Series> = [0.0, 1.0]
            .iter()
            .map(|&t| Series {
                name: format!("ground truth {t}"),
                points: (0..p1.len())
                    .filter(|&i| truth[i] == t)
                    .map(|i| (p1[i], p2[i]))
                    .collect(),
            })
            .collect();
        write_svg(
            dir.join("xor_scatter.svg"),
            chart("Measured probabilities", "P1(|1>)", "P2(|1>)", &series, Style::Markers),
            &mut written,
        )?;
    }

    let sweep = dir.join("sweep.csv");
    if sweep.exists() {
        let cols = read_columns(&sweep)?;
        let s = [Series {
            name: "absorption".into(),
            points: pairs(
                column(&cols, "frequency_hz", &sweep)?,
                column(&cols, "response", &sweep)?,
            ),
        }];
        write_svg(
            dir.join("sweep.svg"),
            chart("Frequency sweep", "frequency (Hz)", "response", &s, Style::Lines),
            &mut written,
        )?;
    }

    let rabi = dir.join("rabi.csv");
    if rabi.exists() {
        let cols = read_columns(&rabi)?;
        let a = column(&cols, "amplitude", &rabi)?;
        let s = [
            Series {
                name: "measured".into(),
                points: pairs(a, column(&cols, "measured", &rabi)?),
            },
            Series {
                name: "fit".into(),
                points: pairs(a, column(&cols, "fit", &rabi)?),
            },
        ];
        write_svg(
            dir.join("rabi.svg"),
            chart("Rabi experiment", "drive amplitude", "P(|1>)", &s, Style::Lines),
            &mut written,
        )?;
    }

    let iq = dir.join("iq_readout.csv");
    if iq.exists() {
        let cols = read_columns(&iq)?;
        let (i, q, label) = (
            column(&cols, "i", &iq)?,
            column(&cols, "q", &iq)?,
            column(&cols, "label", &iq)?,
        );
        let series: Vec<Series> = [(0.0, "ground"), (1.0, "excited")]
            .iter()
            .map(|&(l, name)| Series {
                name: name.into(),
                points: (0..i.len()).filter(|&k| label[k] == l).map(|k| (i[k], q[k])).collect(),
            })
            .collect();
        write_svg(
            dir.join("iq_readout.svg"),
            chart("I/Q readout", "I", "Q", &series, Style::Markers),
            &mut written,
        )?;
    }

    Ok(written)
}
