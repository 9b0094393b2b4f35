//! SVG drawing of patches: 2-d tiles as polygons, 1-d tiles as bars.

use std::fmt::Write;

use supertile::tiling::PlacedTile;
use supertile::SubstitutionSystem;

const PALETTE: [&str; 8] =
    ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7"];

const WIDTH: f64 = 800.0;

fn bounds(sys: &SubstitutionSystem, tiles: &[PlacedTile]) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for t in tiles {
        let (a, b) = t.support(sys).bounding_box();
        for k in 0..2 {
            lo[k] = lo[k].min(a[k]);
            hi[k] = hi[k].max(b[k]);
        }
    }
    if sys.dim == 1 {
        lo[1] = 0.0;
        hi[1] = (hi[0] - lo[0]) * 0.05;
    }
    (lo, hi)
}

/// Renders `tiles` filled by type and `outlines` as strokes.
pub fn render(sys: &SubstitutionSystem, tiles: &[PlacedTile], outlines: &[PlacedTile]) -> String {
    let (lo, hi) = bounds(sys, tiles);
    let s = WIDTH / (hi[0] - lo[0]).max(f64::MIN_POSITIVE);
    let height = ((hi[1] - lo[1]) * s).max(1.0);
    let px = |p: [f64; 2]| ((p[0] - lo[0]) * s, height - (p[1] - lo[1]) * s);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.3} {height:.3}">"#
    );
    let _ = writeln!(out, "<!-- {} tiles of {} -->", tiles.len(), sys.name);
    let draw = |out: &mut String, t: &PlacedTile, style: &str| {
        for piece in t.support(sys).placed_pieces() {
            let v = piece.vertices();
            if sys.dim == 1 {
                let (x0, _) = px(v[0]);
                let (x1, _) = px(v[1]);
                let _ = writeln!(
                    out,
                    r#"<rect x="{:.3}" y="0" width="{:.3}" height="{height:.3}" {style}/>"#,
                    x0.min(x1),
                    (x1 - x0).abs()
                );
            } else {
                let pts: Vec<String> = v
                    .iter()
                    .map(|&p| {
                        let (x, y) = px(p);
                        format!("{x:.3},{y:.3}")
                    })
                    .collect();
                let _ = writeln!(out, r#"<polygon points="{}" {style}/>"#, pts.join(" "));
            }
        }
    };
    for t in tiles {
        let style = format!(
            r##"fill="{}" stroke="#222" stroke-width="0.5""##,
            PALETTE[t.kind % PALETTE.len()]
        );
        draw(&mut out, t, &style);
    }
    for t in outlines {
        let w = 0.8 + 0.6 * t.order as f64;
        draw(&mut out, t, &format!(r##"fill="none" stroke="#000" stroke-width="{w:.2}""##));
    }
    out.push_str("</svg>\n");
    out
}
