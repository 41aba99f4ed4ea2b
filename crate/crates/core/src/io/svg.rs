use std::fmt::Write;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{leaf_order, LinkageRow};

/// Class colors, cycled by label.
pub const PALETTE: [&str; 12] = [
    "steelblue",
    "darkorange",
    "forestgreen",
    "crimson",
    "mediumpurple",
    "saddlebrown",
    "orchid",
    "gray",
    "olive",
    "darkturquoise",
    "navy",
    "gold",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvgOptions {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    pub strip_height: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            width: 800.0,
            height: 400.0,
            margin: 20.0,
            strip_height: 14.0,
        }
    }
}

/// Checks that `linkage` is a well-formed merge sequence over
/// `linkage.len() + 1` samples with non-decreasing heights along every chain.
pub fn validate_linkage(linkage: &[LinkageRow]) -> Result<()> {
    let n = linkage.len() + 1;
    let mut used = vec![false; 2 * n - 1];
    let mut size = vec![1usize; 2 * n - 1];
    let mut height = vec![0.0f64; 2 * n - 1];
    for (r, row) in linkage.iter().enumerate() {
        let bad = |m: String| Err(Error::Data(format!("linkage row {r}: {m}")));
        let id = n + r;
        for c in [row.a, row.b] {
            if c >= id {
                return bad(format!("cluster {c} does not exist yet"));
            }
            if used[c] {
                return bad(format!("cluster {c} is merged twice"));
            }
        }
        if row.a == row.b {
            return bad("merges a cluster with itself".into());
        }
        if !row.height.is_finite() || row.height < 0.0 {
            return bad(format!("invalid height {}", row.height));
        }
        if row.height < height[row.a] || row.height < height[row.b] {
            return bad("height is below a child's height".into());
        }
        if row.size != size[row.a] + size[row.b] {
            return bad(format!("size {} does not match children", row.size));
        }
        used[row.a] = true;
        used[row.b] = true;
        size[id] = row.size;
        height[id] = row.height;
    }
    Ok(())
}

fn num(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    format!("{r}")
}

/// Dendrogram with leaves along the bottom and, when `class_labels` is
/// given, a strip of one colored cell per sample under the leaves.
pub fn render_dendrogram_svg(linkage: &[LinkageRow], class_labels: Option<&[usize]>, opts: &SvgOptions) -> Result<String> {
    validate_linkage(linkage)?;
    let n = linkage.len() + 1;
    if let Some(l) = class_labels {
        if l.len() != n {
            return Err(Error::Shape(format!("{} class labels for {n} samples", l.len())));
        }
    }
    if !(opts.width > 2.0 * opts.margin && opts.height > 2.0 * opts.margin + opts.strip_height) {
        return Err(Error::Config("svg size leaves no room for the plot".into()));
    }
    let order = leaf_order(linkage);
    let cell = (opts.width - 2.0 * opts.margin) / n as f64;
    let strip = if class_labels.is_some() { opts.strip_height } else { 0.0 };
    let base = opts.height - opts.margin - strip;
    let top = opts.margin;
    let max_h = linkage.iter().map(|r| r.height).fold(0.0, f64::max);
    let y_of = |h: f64| if max_h > 0.0 { base - (base - top) * h / max_h } else { base };

    let mut x = vec![0.0; 2 * n - 1];
    let mut y = vec![base; 2 * n - 1];
    for (pos, &s) in order.iter().enumerate() {
        x[s] = opts.margin + (pos as f64 + 0.5) * cell;
    }

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        num(opts.width),
        num(opts.height),
        num(opts.width),
        num(opts.height)
    );
    let _ = writeln!(out, r#"<g class="dendrogram" fill="none" stroke="black" stroke-width="1">"#);
    for (r, row) in linkage.iter().enumerate() {
        let id = n + r;
        let ym = y_of(row.height);
        let _ = writeln!(
            out,
            r#"<path class="merge" data-a="{}" data-b="{}" data-height="{}" data-size="{}" d="M{} {}V{}H{}V{}"/>"#,
            row.a,
            row.b,
            row.height,
            row.size,
            num(x[row.a]),
            num(y[row.a]),
            num(ym),
            num(x[row.b]),
            num(y[row.b])
        );
        x[id] = 0.5 * (x[row.a] + x[row.b]);
        y[id] = ym;
    }
    let _ = writeln!(out, "</g>");
    if let Some(labels) = class_labels {
        let _ = writeln!(out, r#"<g class="strip" stroke="none">"#);
        for (pos, &s) in order.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<rect class="strip-cell" data-sample="{s}" data-label="{}" x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                labels[s],
                num(opts.margin + pos as f64 * cell),
                num(base + 2.0),
                num(cell),
                num(strip - 2.0),
                PALETTE[labels[s] % PALETTE.len()]
            );
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Reads the merge rows back from a document produced by
/// [`render_dendrogram_svg`].
pub fn linkage_from_svg(svg: &str) -> Result<Vec<LinkageRow>> {
    let re = Regex::new(r#"class="merge" data-a="(\d+)" data-b="(\d+)" data-height="([^"]+)" data-size="(\d+)""#)
        .expect("static pattern");
    let parse = |s: &str| Error::Data(format!("bad merge attribute '{s}'"));
    re.captures_iter(svg)
        .map(|c| {
            Ok(LinkageRow {
                a: c[1].parse().map_err(|_| parse(&c[1]))?,
                b: c[2].parse().map_err(|_| parse(&c[2]))?,
                height: c[3].parse().map_err(|_| parse(&c[3]))?,
                size: c[4].parse().map_err(|_| parse(&c[4]))?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(a: usize, b: usize, height: f64, size: usize) -> LinkageRow {
        LinkageRow { a, b, height, size }
    }

    #[test]
    fn two_samples_one_bracket() {
        let svg = render_dendrogram_svg(&[row(0, 1, 1.0, 2)], None, &SvgOptions::default()).unwrap();
        assert_eq!(svg.matches(r#"class="merge""#).count(), 1);
        assert!(svg.starts_with("<svg"));
    }

    #[test]
    fn strip_has_one_cell_per_sample() {
        let l = [row(0, 1, 1.0, 2), row(2, 3, 1.0, 2), row(4, 5, 2.0, 4)];
        let svg = render_dendrogram_svg(&l, Some(&[0, 0, 1, 1]), &SvgOptions::default()).unwrap();
        assert_eq!(svg.matches(r#"class="strip-cell""#).count(), 4);
        assert!(svg.contains(PALETTE[1]));
        assert_eq!(linkage_from_svg(&svg).unwrap(), l.to_vec());
    }

    #[test]
    fn rejects_malformed() {
        let bad_index = [row(0, 5, 1.0, 2)];
        assert!(validate_linkage(&bad_index).is_err());
        let non_monotone = [row(0, 1, 2.0, 2), row(3, 2, 1.0, 3)];
        assert!(validate_linkage(&non_monotone).is_err());
        let bad_size = [row(0, 1, 1.0, 3)];
        assert!(validate_linkage(&bad_size).is_err());
        assert!(render_dendrogram_svg(&[row(0, 1, 1.0, 2)], Some(&[0]), &SvgOptions::default()).is_err());
    }
}
