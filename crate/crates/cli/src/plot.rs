//! CSV → SVG line plot, one curve per confidence column.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 4] = ["#c0392b", "#2e6fba", "#d68910", "#1e8449"];

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    /// Parsed cells; `None` for NA or non-numeric cells.
    pub rows: Vec<Vec<Option<f64>>>,
}

pub fn read_csv(path: &Path) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let bad = |message: String| CliError::Csv { path: path.to_owned(), message };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines.next().ok_or_else(|| bad("empty file".into()))?.split(',').map(|s| s.trim().to_owned()).collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let cells: Vec<Option<f64>> = line.split(',').map(|s| s.trim().parse().ok()).collect();
        if cells.len() != header.len() {
            return Err(bad(format!("row {} has {} cells, header has {}", i + 2, cells.len(), header.len())));
        }
        rows.push(cells);
    }
    Ok(Table { header, rows })
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

/// Renders the columns whose names start with `C` against the first column.
pub fn render_svg(table: &Table, title: &str) -> Result<String, CliError> {
    let curves: Vec<usize> = (1..table.header.len()).filter(|&j| table.header[j].starts_with('C')).collect();
    let xs: Vec<f64> = table.rows.iter().filter_map(|r| r[0]).collect();
    if xs.len() < 2 || curves.is_empty() {
        return Err(CliError::Csv { path: title.into(), message: "nothing to plot".into() });
    }
    let (x0, x1) = (xs.iter().copied().fold(f64::INFINITY, f64::min), xs.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let (y0, y1) = (0.0, 1.0);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title)).unwrap();
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    writeln!(s, r#"<path d="M{left},{top} V{bottom} H{right}" fill="none" stroke="black"/>"#).unwrap();
    for t in ticks(x0, x1) {
        let x = px(t);
        writeln!(s, r#"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{}" stroke="black"/>"#, bottom + 4.0).unwrap();
        writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, bottom + 18.0, fmt_tick(t)).unwrap();
    }
    for t in ticks(y0, y1) {
        let y = py(t);
        writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="black"/>"#, left - 4.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, left - 8.0, y + 4.0, fmt_tick(t)).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 12.0, escape(&table.header[0])).unwrap();

    for (n, &j) in curves.iter().enumerate() {
        let color = COLORS[n % COLORS.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for r in &table.rows {
            match (r[0], r[j]) {
                (Some(x), Some(y)) => {
                    write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, px(x), py(y)).unwrap();
                    pen_down = true;
                }
                _ => pen_down = false,
            }
        }
        writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.trim_end()).unwrap();
        let ly = top + 16.0 * n as f64;
        writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.5"/>"#, right - 110.0, right - 90.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, right - 84.0, ly + 4.0, escape(&table.header[j])).unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn fmt_tick(t: f64) -> String {
    let s = format!("{t:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_owned()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_steps() {
        let t = ticks(0.0, 1.0);
        assert_eq!(t.len(), 6);
        assert!(t.iter().enumerate().all(|(k, &x)| (x - 0.2 * k as f64).abs() < 1e-12));
        assert_eq!(ticks(2.0, 10.0), vec![2.0, 4.0, 6.0, 8.0, 10.0]);
    }

    #[test]
    fn na_cells_break_the_curve() {
        let table = Table {
            header: vec!["T_us".into(), "C0_thresh".into()],
            rows: vec![vec![Some(0.0), Some(0.5)], vec![Some(1.0), None], vec![Some(2.0), Some(0.7)]],
        };
        let svg = render_svg(&table, "t").unwrap();
        let curve = svg.lines().find(|l| l.starts_with("<path") && l.contains(COLORS[0])).unwrap();
        assert_eq!(curve.matches('M').count(), 2);
        assert!(!curve.contains('L'));
    }
}
