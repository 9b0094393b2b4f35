//! Patches, self-reproducing seeds and the fixed-point tiling view.
//!
//! A [`TilingView`] is an order-`K p` supertile of a fixed-point tiling. Its
//! descendants are never stored: children are recomputed from the digit sets
//! whenever a traversal needs them, so a view is immutable, cheap to clone and
//! safe to share between threads.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{classify, clip_volume, scale, Domain, Point, TileClass, TileSupport};
use crate::system::{matrix_power, SubstitutionSystem};

/// Default cap on the number of tiles [`generate_patch`] will materialize.
pub const DEFAULT_PATCH_CAP: u128 = 20_000_000;

/// A supertile of order `order`: support `lambda^order A_kind + translation`.
///
/// `kind` is the 0-based prototile index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacedTile {
    pub kind: usize,
    pub order: i32,
    pub translation: Point,
}

impl PlacedTile {
    pub fn new(kind: usize, order: i32, translation: Point) -> Self {
        PlacedTile { kind, order, translation }
    }

    pub fn support<'s>(&self, sys: &'s SubstitutionSystem) -> TileSupport<'s> {
        sys.support(self.kind, sys.lambda.powi(self.order), self.translation)
    }

    pub fn volume(&self, sys: &SubstitutionSystem) -> f64 {
        sys.lambda.powi(self.order * sys.dim as i32) * sys.prototiles[self.kind].volume()
    }

    /// Children of order `order - 1`, in digit-table order.
    pub fn children<'s>(
        &self,
        sys: &'s SubstitutionSystem,
    ) -> impl Iterator<Item = PlacedTile> + 's {
        let (j, t) = (self.kind, self.translation);
        let order = self.order - 1;
        let s = sys.lambda.powi(order);
        (0..sys.m()).flat_map(move |i| {
            sys.digits[i][j].iter().map(move |x| {
                PlacedTile::new(i, order, [t[0] + s * x[0], t[1] + s * x[1]])
            })
        })
    }
}

/// A finite set of interior-disjoint tiles of equal order.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Patch {
    pub tiles: Vec<PlacedTile>,
}

impl Patch {
    /// Number of tiles of each type.
    pub fn counts(&self, m: usize) -> Vec<u64> {
        let mut c = vec![0; m];
        for t in &self.tiles {
            c[t.kind] += 1;
        }
        c
    }
}

/// The order-0 tiles of `omega^n(T_j)`.
pub fn generate_patch(sys: &SubstitutionSystem, j: usize, n: u32, cap: u128) -> Result<Patch> {
    if j >= sys.m() {
        return Err(Error::InvalidArgument(format!("prototile index {j} out of range")));
    }
    let count: u128 = matrix_power(&sys.substitution_matrix(), n).iter().map(|r| r[j]).sum();
    if count > cap {
        return Err(Error::BudgetExceeded { count, cap });
    }
    let mut level = vec![PlacedTile::new(j, n as i32, [0.0; 2])];
    for _ in 0..n {
        level = level.iter().flat_map(|t| t.children(sys)).collect();
    }
    for t in &mut level {
        t.order = 0;
    }
    Ok(Patch { tiles: level })
}

/// A self-reproducing seed: `omega^power(T_kind - anchor)` contains `T_kind - anchor`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub kind: usize,
    pub power: u32,
    pub anchor: Point,
}

/// Searches powers `1..=max_power` for a self-reproducing seed.
///
/// For every type-`j` child `A_j + t` of `omega^p(T_j)` the affine map
/// `x -> lambda^p x - t` has fixed point `c = t / (lambda^p - 1)`; the child
/// reproduces the seed iff `c` lies in the interior of `A_j`. Among the
/// candidates of the smallest admissible power the deepest anchor wins.
pub fn find_seed(sys: &SubstitutionSystem, max_power: u32) -> Result<Seed> {
    let geps = sys.geps();
    let s = sys.substitution_matrix();
    for p in 1..=max_power {
        let lp = sys.lambda.powi(p as i32);
        let sp = matrix_power(&s, p);
        let mut best: Option<(f64, Seed)> = None;
        for j in 0..sys.m() {
            let count: u128 = sp.iter().map(|r| r[j]).sum();
            if count == 0 || count > DEFAULT_PATCH_CAP {
                continue;
            }
            let mut level = vec![PlacedTile::new(j, p as i32, [0.0; 2])];
            for _ in 0..p {
                level = level.iter().flat_map(|t| t.children(sys)).collect();
            }
            for t in level.iter().filter(|t| t.kind == j) {
                let c = scale(t.translation, 1.0 / (lp - 1.0));
                let depth = sys.prototiles[j]
                    .pieces
                    .iter()
                    .map(|piece| piece.depth(c))
                    .fold(f64::NEG_INFINITY, f64::max);
                if depth > geps && best.as_ref().is_none_or(|(d, _)| depth > *d) {
                    best = Some((depth, Seed { kind: j, power: p, anchor: c }));
                }
            }
        }
        if let Some((_, seed)) = best {
            return Ok(seed);
        }
    }
    Err(Error::NoSeed { max_power })
}

/// A fixed-point tiling restricted to one large supertile.
///
/// The root is the order-`K p` supertile of the seed nest; the origin lies
/// in the seed tile, at depth at least `lambda^{(K-1)p}` times the anchor
/// depth from the boundary of the root.
#[derive(Clone, Debug)]
pub struct TilingView {
    sys: Arc<SubstitutionSystem>,
    seed: Seed,
    depth: u32,
    root: PlacedTile,
}

impl TilingView {
    pub fn new(sys: Arc<SubstitutionSystem>, seed: Seed, depth: u32) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidArgument("view depth K must be at least 1".into()));
        }
        let order = (depth * seed.power) as i32;
        let t = scale(seed.anchor, -sys.lambda.powi(order));
        let root = PlacedTile::new(seed.kind, order, t);
        Ok(TilingView { sys, seed, depth, root })
    }

    /// Smallest-depth view whose covered region contains `dom`.
    pub fn covering(sys: Arc<SubstitutionSystem>, seed: Seed, dom: &Domain) -> Result<Self> {
        for depth in 1..=64 {
            let v = TilingView::new(sys.clone(), seed, depth)?;
            if v.contains(dom) {
                return Ok(v);
            }
            if v.sys.lambda.powi(v.root.order) * v.sys.metrics().d_min > 1e15 {
                break;
            }
        }
        Err(Error::OutOfRegion)
    }

    pub fn system(&self) -> &SubstitutionSystem {
        &self.sys
    }

    pub fn system_arc(&self) -> &Arc<SubstitutionSystem> {
        &self.sys
    }

    pub fn seed(&self) -> Seed {
        self.seed
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Root supertile; order 0 is the finest level.
    pub fn root(&self) -> PlacedTile {
        self.root
    }

    /// The same tiling re-addressed `k` orders up: supertiles of order `k`
    /// become the finest tiles and all lengths are divided by `lambda^k`.
    /// This is the tiling `lambda^{-k} T^(k)`.
    pub fn rescaled(&self, k: i32) -> Self {
        let mut v = self.clone();
        v.root.order -= k;
        v.root.translation = scale(self.root.translation, self.sys.lambda.powi(-k));
        v
    }

    /// The tiling `T - y`.
    pub fn translated(&self, y: Point) -> Self {
        let mut v = self.clone();
        v.root.translation[0] -= y[0];
        v.root.translation[1] -= y[1];
        v
    }

    /// Support of the root supertile.
    pub fn covered_region(&self) -> Domain {
        Domain::from_support(&self.root.support(&self.sys))
    }

    pub fn contains(&self, dom: &Domain) -> bool {
        if dom.dim() != self.sys.dim {
            return false;
        }
        let inside = clip_volume(dom, &self.root.support(&self.sys));
        inside >= dom.volume() * (1.0 - 1e-9)
    }

    fn check(&self, dom: &Domain) -> Result<()> {
        if self.contains(dom) {
            Ok(())
        } else {
            Err(Error::OutOfRegion)
        }
    }

    /// Supertiles of order `k` whose supports meet `dom` in positive measure.
    pub fn tiles_intersecting(&self, dom: &Domain, k: i32) -> Result<Vec<PlacedTile>> {
        self.check(dom)?;
        if k < 0 || k > self.root.order {
            return Err(Error::InvalidArgument(format!(
                "order {k} outside 0..={}",
                self.root.order
            )));
        }
        let sys = &*self.sys;
        let mut out = Vec::new();
        let mut stack = vec![(self.root, false)];
        while let Some((t, inside)) = stack.pop() {
            let inside = inside || {
                match classify(dom, &t.support(sys)) {
                    TileClass::Outside => continue,
                    TileClass::Inside => true,
                    TileClass::Crossing => false,
                }
            };
            if t.order == k {
                out.push(t);
            } else {
                stack.extend(t.children(sys).map(|c| (c, inside)));
            }
        }
        out.sort_by(|a, b| {
            a.translation[1]
                .total_cmp(&b.translation[1])
                .then(a.translation[0].total_cmp(&b.translation[0]))
        });
        Ok(out)
    }

    /// Hierarchical capture of `dom`.
    ///
    /// Inside supertiles are reported to `visit` as [`Visit::Captured`] and
    /// not expanded, crossing supertiles are expanded, outside ones dropped;
    /// crossing tiles of the finest order are reported as
    /// [`Visit::Frontier`] together with their clipped volume.
    pub fn descend(&self, dom: &Domain, mut visit: impl FnMut(Visit)) -> Result<()> {
        self.check(dom)?;
        let sys = &*self.sys;
        let mut stack = vec![self.root];
        while let Some(t) = stack.pop() {
            let support = t.support(sys);
            match classify(dom, &support) {
                TileClass::Outside => {}
                TileClass::Inside => visit(Visit::Captured(t)),
                TileClass::Crossing if t.order <= 0 => {
                    visit(Visit::Frontier(t, clip_volume(dom, &support)))
                }
                TileClass::Crossing => stack.extend(t.children(sys)),
            }
        }
        Ok(())
    }
}

impl TilingView {
    /// [`TilingView::descend`] for several domains in one traversal; `visit`
    /// receives the index of the domain each event belongs to. At most 64
    /// domains are supported.
    pub fn descend_many(&self, doms: &[Domain], mut visit: impl FnMut(usize, Visit)) -> Result<()> {
        if doms.len() > 64 {
            return Err(Error::InvalidArgument("at most 64 domains per traversal".into()));
        }
        for d in doms {
            self.check(d)?;
        }
        if doms.is_empty() {
            return Ok(());
        }
        let sys = &*self.sys;
        let all = if doms.len() == 64 { u64::MAX } else { (1u64 << doms.len()) - 1 };
        let mut stack = vec![(self.root, all)];
        while let Some((t, mask)) = stack.pop() {
            let support = t.support(sys);
            let mut next = 0u64;
            let mut bits = mask;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                match classify(&doms[i], &support) {
                    TileClass::Outside => {}
                    TileClass::Inside => visit(i, Visit::Captured(t)),
                    TileClass::Crossing if t.order <= 0 => {
                        visit(i, Visit::Frontier(t, clip_volume(&doms[i], &support)))
                    }
                    TileClass::Crossing => next |= 1 << i,
                }
            }
            if next != 0 {
                stack.extend(t.children(sys).map(|c| (c, next)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Visit {
    Captured(PlacedTile),
    Frontier(PlacedTile, f64),
}
