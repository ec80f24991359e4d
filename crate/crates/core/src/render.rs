//! Text and SVG drawings of diagrams: one dot per cell, one edge per pair of
//! cells sharing a clique, one colour per clique.

use std::fmt::Write as _;

use crate::diagram::Diagram;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderFormat {
    Ascii,
    Svg,
}

impl RenderFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ascii" => Ok(Self::Ascii),
            "svg" => Ok(Self::Svg),
            other => Err(Error::DomainError(format!(
                "unknown render format {other:?}"
            ))),
        }
    }
}

const SPACING: usize = 60;
const MARGIN: usize = 50;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub fn render_diagram(diagram: &Diagram, format: RenderFormat) -> String {
    match format {
        RenderFormat::Ascii => render_ascii(diagram),
        RenderFormat::Svg => render_svg(diagram),
    }
}

/// Symbol used for clique `k` in text output.
pub fn clique_symbol(k: usize) -> String {
    const LETTERS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    if k < LETTERS.len() {
        (LETTERS[k] as char).to_string()
    } else {
        format!("{k}")
    }
}

/// Grid of clique symbols (`.` for empty cells), the clique list, and every
/// cross as its two rows, two columns, and the two cliques it joins.
pub fn render_ascii(d: &Diagram) -> String {
    let grid = d.label_grid();
    let width = clique_symbol(d.d_e().saturating_sub(1)).len().max(2);
    let mut s = String::new();
    write!(s, "{:>4}", "").unwrap();
    for b in 0..d.d_b() {
        write!(s, " {:>width$}", format!("b{b}")).unwrap();
    }
    s.push('\n');
    for a in 0..d.d_a() {
        write!(s, "{:>4}", format!("a{a}")).unwrap();
        for b in 0..d.d_b() {
            let sym = grid[a * d.d_b() + b].map_or_else(|| ".".to_string(), clique_symbol);
            write!(s, " {sym:>width$}").unwrap();
        }
        s.push('\n');
    }
    writeln!(s, "cliques: {}", d.d_e()).unwrap();
    for (k, clique) in d.cliques().iter().enumerate() {
        let cells: Vec<String> = clique.iter().map(|(a, b)| format!("({a},{b})")).collect();
        writeln!(s, "  {}: {}", clique_symbol(k), cells.join(" ")).unwrap();
    }
    let crosses = d.crosses();
    writeln!(s, "crosses: {}", crosses.len()).unwrap();
    for c in crosses {
        let (a0, a1) = c.rows;
        let (b0, b1) = c.cols;
        let main = d
            .label((a0, b0))
            .map_or_else(|| ".".to_string(), clique_symbol);
        let anti = d
            .label((a0, b1))
            .map_or_else(|| ".".to_string(), clique_symbol);
        writeln!(s, "  rows {a0},{a1} x cols {b0},{b1}: {main}\\ {anti}/").unwrap();
    }
    s
}

fn centre(a: usize, b: usize) -> (usize, usize) {
    (MARGIN + b * SPACING, MARGIN + a * SPACING)
}

/// Deterministic SVG: a light grid, then one `<g class="clique">` per clique
/// holding its edges as `<line>` and its cells as `<circle>`.
pub fn render_svg(d: &Diagram) -> String {
    let w = 2 * MARGIN + SPACING * d.d_b().saturating_sub(1);
    let h = 2 * MARGIN + SPACING * d.d_a().saturating_sub(1);
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    writeln!(
        s,
        r#"  <rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#
    )
    .unwrap();
    writeln!(
        s,
        r##"  <g class="grid" stroke="#dddddd" stroke-width="1">"##
    )
    .unwrap();
    for a in 0..d.d_a() {
        let (x0, y) = centre(a, 0);
        let (x1, _) = centre(a, d.d_b() - 1);
        writeln!(s, r#"    <path d="M {x0} {y} H {x1}"/>"#).unwrap();
    }
    for b in 0..d.d_b() {
        let (x, y0) = centre(0, b);
        let (_, y1) = centre(d.d_a() - 1, b);
        writeln!(s, r#"    <path d="M {x} {y0} V {y1}"/>"#).unwrap();
    }
    writeln!(s, "  </g>").unwrap();
    writeln!(
        s,
        r##"  <g class="labels" font-family="monospace" font-size="12" fill="#555555">"##
    )
    .unwrap();
    for a in 0..d.d_a() {
        let (_, y) = centre(a, 0);
        writeln!(
            s,
            r#"    <text x="{}" y="{}" text-anchor="end">a{a}</text>"#,
            MARGIN - 20,
            y + 4
        )
        .unwrap();
    }
    for b in 0..d.d_b() {
        let (x, _) = centre(0, b);
        writeln!(
            s,
            r#"    <text x="{x}" y="{}" text-anchor="middle">b{b}</text>"#,
            MARGIN - 20
        )
        .unwrap();
    }
    writeln!(s, "  </g>").unwrap();
    for (k, clique) in d.cliques().iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        writeln!(
            s,
            r#"  <g class="clique" id="clique-{k}" stroke="{colour}" fill="{colour}">"#
        )
        .unwrap();
        for (i, &(a, b)) in clique.iter().enumerate() {
            for &(a2, b2) in &clique[i + 1..] {
                let (x1, y1) = centre(a, b);
                let (x2, y2) = centre(a2, b2);
                writeln!(
                    s,
                    r#"    <line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke-width="3"/>"#
                )
                .unwrap();
            }
        }
        for &(a, b) in clique {
            let (x, y) = centre(a, b);
            writeln!(s, r#"    <circle cx="{x}" cy="{y}" r="8"/>"#).unwrap();
        }
        writeln!(s, "  </g>").unwrap();
    }
    s.push_str("</svg>\n");
    s
}
