//! Finitely-additive measures: `Phi+` on tiles and domains through the
//! hierarchical capture, `Phi-` on single-tile cylinder sets.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ergodic::CylFunction;
use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};
use crate::spectral::SpectralData;
use crate::tiling::{PlacedTile, TilingView, Visit};

type C = Complex64;

/// Tiles captured by the top-down descent of a domain.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct HierarchicalDecomposition {
    /// `captured[k]`: supertiles of order `k` inside the domain whose
    /// parents cross its boundary.
    pub captured: Vec<Vec<PlacedTile>>,
    /// Order-0 tiles crossing the boundary, with their clipped volume.
    pub frontier: Vec<(PlacedTile, f64)>,
}

impl HierarchicalDecomposition {
    /// Highest order with a captured tile.
    pub fn k_r(&self) -> Option<usize> {
        self.captured.iter().rposition(|l| !l.is_empty())
    }

    pub fn summary(&self, m: usize) -> CaptureSummary {
        let mut s = CaptureSummary::new(m, self.captured.len().saturating_sub(1));
        for level in &self.captured {
            for t in level {
                s.add(Visit::Captured(*t));
            }
        }
        for (t, v) in &self.frontier {
            s.add(Visit::Frontier(*t, *v));
        }
        s
    }
}

/// Counts of captured supertiles per order and type, and frontier totals per type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaptureSummary {
    /// `counts[k][j]`.
    pub counts: Vec<Vec<u64>>,
    pub frontier_count: Vec<u64>,
    /// Sum of `vol(tile ∩ domain)` over frontier tiles of each type.
    pub frontier_volume: Vec<f64>,
}

impl CaptureSummary {
    fn new(m: usize, max_order: usize) -> Self {
        CaptureSummary {
            counts: vec![vec![0; m]; max_order + 1],
            frontier_count: vec![0; m],
            frontier_volume: vec![0.0; m],
        }
    }

    fn add(&mut self, v: Visit) {
        match v {
            Visit::Captured(t) => {
                let k = t.order.max(0) as usize;
                if k >= self.counts.len() {
                    let m = self.frontier_count.len();
                    self.counts.resize(k + 1, vec![0; m]);
                }
                self.counts[k][t.kind] += 1;
            }
            Visit::Frontier(t, vol) => {
                self.frontier_count[t.kind] += 1;
                self.frontier_volume[t.kind] += vol;
            }
        }
    }

    pub fn max_order(&self) -> usize {
        self.counts.len() - 1
    }

    /// Number of captured supertiles of order `k`, `#R^(k)`.
    pub fn layer_size(&self, k: usize) -> u64 {
        self.counts.get(k).map_or(0, |r| r.iter().sum())
    }

    pub fn total_frontier(&self) -> u64 {
        self.frontier_count.iter().sum()
    }

    pub fn total_frontier_volume(&self) -> f64 {
        self.frontier_volume.iter().sum()
    }

    /// `sum_k sum_j counts[k][j] * table[k][j]`.
    pub fn pair(&self, table: &[Vec<C>]) -> C {
        let mut acc = C::new(0.0, 0.0);
        for (k, row) in self.counts.iter().enumerate() {
            for (j, &n) in row.iter().enumerate() {
                if n > 0 {
                    acc += table[k][j] * n as f64;
                }
            }
        }
        acc
    }

    /// Like [`CaptureSummary::pair`] for real tables.
    pub fn pair_real(&self, table: &[Vec<f64>]) -> f64 {
        let mut acc = 0.0;
        for (k, row) in self.counts.iter().enumerate() {
            for (j, &n) in row.iter().enumerate() {
                if n > 0 {
                    acc += table[k][j] * n as f64;
                }
            }
        }
        acc
    }
}

/// Full top-down decomposition of `dom` (see [`TilingView::descend`]).
pub fn decompose(view: &TilingView, dom: &Domain) -> Result<HierarchicalDecomposition> {
    let mut d = HierarchicalDecomposition {
        captured: vec![Vec::new(); view.root().order.max(0) as usize + 1],
        frontier: Vec::new(),
    };
    view.descend(dom, |v| match v {
        Visit::Captured(t) => d.captured[t.order as usize].push(t),
        Visit::Frontier(t, vol) => d.frontier.push((t, vol)),
    })?;
    Ok(d)
}

/// Allocation-free variant of [`decompose`] keeping only counts.
pub fn capture_summary(view: &TilingView, dom: &Domain) -> Result<CaptureSummary> {
    let mut s = CaptureSummary::new(view.system().m(), view.root().order.max(0) as usize);
    view.descend(dom, |v| s.add(v))?;
    Ok(s)
}

/// [`capture_summary`] for several domains sharing one traversal.
pub fn capture_summaries(view: &TilingView, doms: &[Domain]) -> Result<Vec<CaptureSummary>> {
    let mut out =
        vec![CaptureSummary::new(view.system().m(), view.root().order.max(0) as usize); doms.len()];
    view.descend_many(doms, |i, v| out[i].add(v))?;
    Ok(out)
}

/// `Phi+_v` of a supertile of order `k >= 0`: `((S^t)^k v)_type`.
pub fn phi_plus_tile(spec: &SpectralData, v: &[C], tile: &PlacedTile) -> C {
    let k = tile.order.max(0) as i64;
    spec.apply_power(v, k).expect("nonnegative power")[tile.kind]
}

/// `Phi+_v` of a domain together with its truncation diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiPlus {
    pub value: C,
    /// Order-0 tiles crossing the boundary (excluded from `value`).
    pub frontier_count: u64,
    pub frontier_volume: f64,
    /// Sum of `|Phi+_v|` over the captured tiles; the natural scale of `value`.
    pub magnitude: f64,
}

fn require_epp(spec: &SpectralData, v: &[C]) -> Result<()> {
    if v.len() != spec.m() || !spec.in_epp(v) {
        return Err(Error::NotInEpp);
    }
    Ok(())
}

pub fn phi_plus_from_summary(spec: &SpectralData, v: &[C], s: &CaptureSummary) -> PhiPlus {
    let table = spec.power_table(v, s.max_order());
    let abs: Vec<Vec<f64>> = table.iter().map(|r| r.iter().map(|z| z.norm()).collect()).collect();
    PhiPlus {
        value: s.pair(&table),
        frontier_count: s.total_frontier(),
        frontier_volume: s.total_frontier_volume(),
        magnitude: s.pair_real(&abs),
    }
}

/// `Phi+_{v,T}(dom)`, truncated at order 0: the sum of `phi_plus_tile` over
/// the captured tiles.
pub fn phi_plus_domain(view: &TilingView, spec: &SpectralData, v: &[C], dom: &Domain) -> Result<C> {
    Ok(phi_plus_detailed(view, spec, v, dom)?.value)
}

pub fn phi_plus_detailed(
    view: &TilingView,
    spec: &SpectralData,
    v: &[C],
    dom: &Domain,
) -> Result<PhiPlus> {
    require_epp(spec, v)?;
    let s = capture_summary(view, dom)?;
    Ok(phi_plus_from_summary(spec, v, &s))
}

/// The cylinder set `omega^k(Gamma_{T_j - y})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderSet {
    pub order: u32,
    pub kind: usize,
    pub translation: Point,
}

/// `Phi-_u` of a cylinder set: `(S^{-k} u)_j`, independent of the translation.
pub fn phi_minus_cylinder(spec: &SpectralData, u: &[C], cyl: &CylinderSet) -> Result<C> {
    Ok(spec.apply_power_dual(u, -(cyl.order as i64))?[cyl.kind])
}

/// `m_{Phi-_u}(f) = sum_i u_i c_i vol(A_i)`.
pub fn m_phi_minus(spec: &SpectralData, u: &[C], f: &CylFunction) -> C {
    u.iter()
        .zip(&f.c)
        .zip(&spec.right[0])
        .map(|((ui, ci), vol)| ui * *ci * vol.re)
        .sum()
}

/// Worst-case discrepancies of the translation and scaling identities.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CocycleReport {
    pub trials: usize,
    /// `|Phi+_{T-y}(dom) - Phi+_T(dom + y)|`, relative to the magnitude.
    pub coc1_max_rel: f64,
    /// `|Phi+_{v,T}(lambda dom) - Phi+_{S^t v, lambda^{-1} T^(1)}(dom)|`, relative.
    pub coc3_max_rel: f64,
    /// Largest ratio of the scaling discrepancy to its frontier budget
    /// (at most 1 when the identity holds up to truncation).
    pub coc3_budget_ratio: f64,
    pub coc3_within_budget: bool,
}

/// Order-0 truncation budget of the scaling identity: every frontier tile of
/// the coarse view hides children worth at most `sum_i S_ij |v_i|`.
pub fn coc3_budget(spec: &SpectralData, v: &[C], frontier: u64) -> f64 {
    let m = spec.m();
    let per = (0..m)
        .map(|j| (0..m).map(|i| spec.matrix[i][j] as f64 * v[i].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    per * frontier as f64
}

/// Evaluates both identities on one placement of `dom`.
pub fn cocycle_discrepancy(
    view: &TilingView,
    spec: &SpectralData,
    v: &[C],
    dom: &Domain,
    y: Point,
) -> Result<(f64, f64, f64)> {
    require_epp(spec, v)?;
    let moved = dom.translated(y);
    let a = phi_plus_detailed(&view.translated(y), spec, v, dom)?;
    let b = phi_plus_detailed(view, spec, v, &moved)?;
    let coc1 = (a.value - b.value).norm() / a.magnitude.max(b.magnitude).max(1e-300);

    let lam = view.system().lambda;
    let fine = phi_plus_detailed(view, spec, v, &moved.dilate(lam))?;
    let sv = spec.apply_power(v, 1)?;
    let coarse_view = view.rescaled(1);
    let s = capture_summary(&coarse_view, &moved)?;
    let coarse = phi_plus_from_summary(spec, &sv, &s);
    let diff = (fine.value - coarse.value).norm();
    let scale = fine.magnitude.max(coarse.magnitude).max(1e-300);
    let budget = coc3_budget(spec, v, s.total_frontier());
    let ratio = if budget > 0.0 {
        diff / budget
    } else if diff <= 1e-9 * scale {
        0.0
    } else {
        f64::INFINITY
    };
    Ok((coc1, diff / scale, ratio))
}

/// Random-placement sweep of [`cocycle_discrepancy`]; placements whose
/// dilate leaves the view are redrawn.
pub fn verify_cocycles(
    view: &TilingView,
    spec: &SpectralData,
    v: &[C],
    dom: &Domain,
    trials: usize,
    seed: u64,
) -> Result<CocycleReport> {
    let lam = view.system().lambda;
    let dim = view.system().dim;
    let h = dom.diameter();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = CocycleReport { trials, coc3_within_budget: true, ..Default::default() };
    for _ in 0..trials {
        let mut placed = None;
        for _ in 0..1000 {
            let y = [
                rng.random_range(-h..h),
                if dim == 2 { rng.random_range(-h..h) } else { 0.0 },
            ];
            if view.contains(&dom.translated(y).dilate(lam)) {
                placed = Some(y);
                break;
            }
        }
        let y = placed.ok_or(Error::OutOfRegion)?;
        let (c1, c3, ratio) = cocycle_discrepancy(view, spec, v, dom, y)?;
        rep.coc1_max_rel = rep.coc1_max_rel.max(c1);
        rep.coc3_max_rel = rep.coc3_max_rel.max(c3);
        rep.coc3_budget_ratio = rep.coc3_budget_ratio.max(ratio);
        rep.coc3_within_budget &= ratio <= 1.0 + 1e-9;
    }
    Ok(rep)
}
