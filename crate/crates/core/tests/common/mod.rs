#![allow(dead_code)]

use std::sync::Arc;

use supertile::geometry::TileSupport;
use supertile::tiling::find_seed;
use supertile::{builtin, Domain, DomainKind, Point, PlacedTile, SubstitutionSystem, TilingView};

pub const SYSTEMS: [&str; 5] = ["fibonacci", "nonpisot13", "table2d", "chair", "bicolor3x3"];
pub const PLANAR: [&str; 3] = ["table2d", "chair", "bicolor3x3"];

pub fn system(name: &str) -> Arc<SubstitutionSystem> {
    Arc::new(builtin(name).expect("catalog entry").system)
}

pub fn view(name: &str, depth: u32) -> TilingView {
    let sys = system(name);
    let seed = find_seed(&sys, 64).expect("seed");
    TilingView::new(sys, seed, depth).expect("view")
}

/// Smallest view whose root has order at least `order`.
pub fn deep_view(name: &str, order: i32) -> TilingView {
    (1..).map(|k| view(name, k)).find(|v| v.root().order >= order).expect("deep enough view")
}

pub fn covering(name: &str, dom: &Domain) -> TilingView {
    let sys = system(name);
    let seed = find_seed(&sys, 64).expect("seed");
    TilingView::covering(sys, seed, dom).expect("covering view")
}

/// Every order-0 tile of the view, by plain recursive expansion.
pub fn leaves(view: &TilingView) -> Vec<PlacedTile> {
    let sys = view.system();
    let mut level = vec![view.root()];
    while level[0].order > 0 {
        level = level.iter().flat_map(|t| t.children(sys)).collect();
    }
    level
}

pub fn in_tile(t: &TileSupport<'_>, p: Point) -> bool {
    t.placed_pieces().iter().any(|q| q.depth(p) >= 0.0)
}

pub fn in_domain(dom: &Domain, p: Point) -> bool {
    let c = dom.center();
    let s = dom.size().expect("cube or ball");
    let dim = dom.dim();
    match dom.kind() {
        DomainKind::Cube => (0..dim).all(|a| (p[a] - c[a]).abs() <= s / 2.0),
        DomainKind::Ball => (0..dim).map(|a| (p[a] - c[a]).powi(2)).sum::<f64>() <= s * s,
        DomainKind::Polytope => unreachable!("oracle covers cubes and balls"),
    }
}
