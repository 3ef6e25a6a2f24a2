//! Bigraded homotopy charts with a tau-action and their tau-Bockstein pages.
//!
//! Everything is window-relative: a chart only knows a finite rectangle of
//! bidegrees, and every operation reports per-degree whether its output is
//! fully determined by in-window data. Groups are compared by Smith
//! invariants; generator choices are never canonical.

use crate::abgroup::{
    full_lattice, hom_pattern, induced_map, lattice_eq, lattice_sum, AbGroup, Hom, HomPattern,
    Invariants, SubQuotient,
};
use crate::grading::Degree;
use crate::matrix::{hnf as hnf_mat, Matrix};
use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChartError {
    #[error("degree {0} has an invalid group or map: {1}")]
    BadEntry(Degree, String),
    #[error("tau map at {0} is not a homomorphism: {1}")]
    BadTau(Degree, String),
    #[error("differential d_{page} at {at} is invalid: {why}")]
    BadDifferential { page: i64, at: Degree, why: String },
    #[error("d_{page} composed with d_{page} is nonzero at {at}")]
    DSquareNonzero { page: i64, at: Degree },
    #[error("projection at {0} is invalid: {1}")]
    BadProjection(Degree, String),
    #[error("{0}")]
    Other(String),
}

/// Three-valued answers for window-relative predicates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    Yes,
    No,
    Indeterminate,
}

impl Tri {
    pub fn and(self, other: Tri) -> Tri {
        match (self, other) {
            (Tri::No, _) | (_, Tri::No) => Tri::No,
            (Tri::Indeterminate, _) | (_, Tri::Indeterminate) => Tri::Indeterminate,
            _ => Tri::Yes,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub x0: i64,
    pub x1: i64,
    pub y0: i64,
    pub y1: i64,
}

impl Window {
    pub fn contains(&self, d: Degree) -> bool {
        d.x >= self.x0 && d.x <= self.x1 && d.y >= self.y0 && d.y <= self.y1
    }

    pub fn degrees(&self) -> impl Iterator<Item = Degree> + '_ {
        (self.x0..=self.x1).flat_map(move |x| (self.y0..=self.y1).map(move |y| Degree::new(x, y)))
    }

    pub fn intersect(&self, other: &Window) -> Window {
        Window {
            x0: self.x0.max(other.x0),
            x1: self.x1.min(other.x1),
            y0: self.y0.max(other.y0),
            y1: self.y1.min(other.y1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenInfo {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub color: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shape: Option<String>,
}

impl GenInfo {
    pub fn plain(name: impl Into<String>) -> Self {
        GenInfo { name: name.into(), color: None, shape: None }
    }
}

/// One chart cell: a presented group with named generators.
#[derive(Clone, Debug)]
pub struct Entry {
    pub gens: Vec<GenInfo>,
    pub group: AbGroup,
}

impl Entry {
    pub fn new(gens: Vec<GenInfo>, rels: Matrix) -> Entry {
        let group = AbGroup::new(gens.len(), rels);
        Entry { gens, group }
    }

    pub fn free(names: &[&str]) -> Entry {
        Entry::new(names.iter().map(|n| GenInfo::plain(*n)).collect(), Matrix::zero(names.len(), 0))
    }

    pub fn cyclic(name: &str, order: u64) -> Entry {
        Entry::new(
            vec![GenInfo::plain(name)],
            Matrix::from_rows(vec![vec![BigInt::from(order)]]),
        )
    }
}

/// Inert display metadata: hidden-extension structure lines. Never computed,
/// only carried and rendered.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureLine {
    pub from: Degree,
    pub from_gen: String,
    pub to: Degree,
    pub to_gen: String,
    pub kind: String,
    pub filtration_jump: i64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub color: Option<String>,
}

/// Finite-window bigraded homotopy data with a tau-action.
#[derive(Clone, Debug, Default)]
pub struct TauChart {
    pub window: Option<Window>,
    pub entries: BTreeMap<Degree, Entry>,
    /// tau at `(x, y)` maps `pi_{x,y+1} -> pi_{x,y}`; rows = gens at (x,y),
    /// cols = gens at (x,y+1). Absent means the zero map (forced whenever
    /// either side is the zero group).
    pub tau: BTreeMap<Degree, Matrix>,
    /// Columns are constant (tau iso) at levels `x + y <= stable_below_level`
    /// (intersected with the on-or-below region of `vanish_above_line` when
    /// that is declared).
    pub stable_below_level: Option<i64>,
    /// Columns are constant (tau iso) at levels `x + y >= stable_above_level`.
    pub stable_above_level: Option<i64>,
    /// pi vanishes strictly above this line (declared, e.g. for covers).
    pub vanish_above_line: Option<crate::grading::Line>,
    pub structure_lines: Vec<StructureLine>,
}

impl TauChart {
    pub fn window(&self) -> Window {
        self.window.unwrap_or(Window { x0: 0, x1: -1, y0: 0, y1: -1 })
    }

    pub fn group_at(&self, d: Degree) -> AbGroup {
        self.entries.get(&d).map(|e| e.group.clone()).unwrap_or_else(AbGroup::zero)
    }

    pub fn gens_at(&self, d: Degree) -> Vec<GenInfo> {
        self.entries.get(&d).map(|e| e.gens.clone()).unwrap_or_default()
    }

    /// The tau map into degree `d` (from `(d.x, d.y+1)`).
    pub fn tau_at(&self, d: Degree) -> Matrix {
        let src = Degree::new(d.x, d.y + 1);
        let rows = self.group_at(d).num_gens();
        let cols = self.group_at(src).num_gens();
        self.tau.get(&d).cloned().unwrap_or_else(|| Matrix::zero(rows, cols))
    }

    /// tau^k landing in degree `d`.
    pub fn tau_power_into(&self, d: Degree, k: i64) -> Matrix {
        assert!(k >= 0);
        let mut m = Matrix::identity(self.group_at(d).num_gens());
        let mut cur = d;
        for _ in 0..k {
            m = m.mul(&self.tau_at(cur));
            cur = Degree::new(cur.x, cur.y + 1);
        }
        m
    }

    pub fn validate(&self) -> Result<(), ChartError> {
        let w = self.window();
        for (d, e) in &self.entries {
            if !w.contains(*d) {
                return Err(ChartError::BadEntry(*d, "entry outside window".into()));
            }
            if e.gens.len() != e.group.num_gens() {
                return Err(ChartError::BadEntry(*d, "generator names do not match group".into()));
            }
        }
        for (d, m) in &self.tau {
            let src = Degree::new(d.x, d.y + 1);
            Hom::new(&self.group_at(src), &self.group_at(*d), m.clone())
                .map_err(|e| ChartError::BadTau(*d, e))?;
        }
        Ok(())
    }

    /// Is every in-window cell strictly above the given line zero?
    pub fn vanishes_above(&self, line: &crate::grading::Line) -> bool {
        self.entries
            .iter()
            .all(|(d, e)| line.on_or_below(*d) || e.group.is_trivial())
    }

    /// Window-relative strong-completeness check: are there infinitely
    /// tau-divisible elements?  Evidence: descending images of tau-powers
    /// from the window top; declared `stable_above_level` turns a nonzero
    /// stabilized image into a definite "no".
    pub fn is_strongly_complete(&self) -> Tri {
        let w = self.window();
        let mut result = Tri::Yes;
        for x in w.x0..=w.x1 {
            let stem = self.strong_completeness_of_stem(x, &w);
            result = result.and(stem);
        }
        result
    }

    fn strong_completeness_of_stem(&self, x: i64, w: &Window) -> Tri {
        // Find the highest nonzero cell in this column.
        let mut top: Option<i64> = None;
        for y in (w.y0..=w.y1).rev() {
            if !self.group_at(Degree::new(x, y)).is_trivial() {
                top = Some(y);
                break;
            }
        }
        let Some(top) = top else { return Tri::Yes };

        if let Some(level) = self.stable_above_level {
            if x + top >= level {
                // Column constant at the top with tau iso: the top cell is
                // infinitely divisible.
                return Tri::No;
            }
        }
        if top == w.y1 {
            // Nonzero at the window top: divisibility chains exit the window.
            return Tri::Indeterminate;
        }
        // Everything above `top` in-window is zero, so images of long tau
        // powers vanish; chains terminate.
        Tri::Yes
    }

    /// Per-stem colimit along tau within the window. Requires a declared
    /// stable-below level to be determinate.
    pub fn tau_invert(&self) -> BTreeMap<i64, (Option<Invariants>, Tri)> {
        let w = self.window();
        let mut out = BTreeMap::new();
        for x in w.x0..=w.x1 {
            out.insert(x, self.tau_invert_stem(x, &w));
        }
        out
    }

    /// Height below which the column at stem `x` is declared constant.
    pub fn stable_height(&self, x: i64) -> Option<i64> {
        let level = self.stable_below_level?;
        let mut h = level - x;
        if let Some(line) = self.vanish_above_line {
            h = h.min(line.floor_alpha_x(x));
        }
        Some(h)
    }

    pub fn tau_invert_stem(&self, x: i64, w: &Window) -> (Option<Invariants>, Tri) {
        match self.stable_height(x) {
            Some(y) => {
                if y >= w.y0 && y <= w.y1 {
                    (Some(self.group_at(Degree::new(x, y)).invariants()), Tri::Yes)
                } else if y > w.y1 {
                    // The stable zone starts above the window; whole column
                    // is stable, use the bottom cell.
                    (Some(self.group_at(Degree::new(x, w.y0)).invariants()), Tri::Yes)
                } else {
                    (None, Tri::Indeterminate)
                }
            }
            None => (None, Tri::Indeterminate),
        }
    }

    /// Invariants per in-window degree plus tau-map patterns; the material
    /// `diff` compares.
    pub fn summary(&self) -> BTreeMap<Degree, (Invariants, HomPattern)> {
        let mut out = BTreeMap::new();
        for d in self.window().degrees() {
            let g = self.group_at(d);
            let src = self.group_at(Degree::new(d.x, d.y + 1));
            let tau =
                Hom::new(&src, &g, self.tau_at(d)).expect("validated chart has homomorphic tau");
            let pat = hom_pattern(&src, &g, &tau);
            if !g.is_trivial() || !pat.src.is_zero() {
                out.insert(d, (g.invariants(), pat));
            }
        }
        out
    }
}

/// The tau-Bockstein data of a filtered object: an E2 chart, differentials
/// per page, and attestations about what the window covers.
#[derive(Clone, Debug)]
pub struct BssPages {
    pub window: Window,
    pub e2: BTreeMap<Degree, Entry>,
    /// `(page, source degree) -> matrix` on canonical page generators
    /// (page-r generators are the HNF basis of the surviving-cycle lattice;
    /// when no earlier differential touched an entry these coincide with its
    /// E2 generators).
    pub diffs: BTreeMap<(i64, Degree), Matrix>,
    /// Pages are attested complete up to this page.
    pub max_page: i64,
    /// No differentials beyond `max_page` anywhere.
    pub no_more_differentials: bool,
    /// The window covers everything: no classes or differentials outside.
    pub window_complete: bool,
    /// Optional: differential origin tags, keyed like `diffs`. Display and
    /// bookkeeping only; ignored by comparisons.
    pub origins: BTreeMap<(i64, Degree), String>,
    /// Optional mod-tau projection matrices `pi_{x,y} -> E2_{x,y}` linking a
    /// companion TauChart to this page data.
    pub projections: BTreeMap<Degree, Matrix>,
}

impl BssPages {
    pub fn empty(window: Window) -> BssPages {
        BssPages {
            window,
            e2: BTreeMap::new(),
            diffs: BTreeMap::new(),
            max_page: 2,
            no_more_differentials: true,
            window_complete: true,
            origins: BTreeMap::new(),
            projections: BTreeMap::new(),
        }
    }

    pub fn e2_group(&self, d: Degree) -> AbGroup {
        self.e2.get(&d).map(|e| e.group.clone()).unwrap_or_else(AbGroup::zero)
    }

    pub fn e2_gens(&self, d: Degree) -> Vec<GenInfo> {
        self.e2.get(&d).map(|e| e.gens.clone()).unwrap_or_default()
    }

    pub fn projection_at(&self, d: Degree, chart: &TauChart) -> Matrix {
        self.projections.get(&d).cloned().unwrap_or_else(|| {
            Matrix::zero(self.e2_group(d).num_gens(), chart.group_at(d).num_gens())
        })
    }
}

/// One computed page entry: the group as a subquotient of E2 at the degree,
/// plus a determinacy flag.
#[derive(Clone, Debug)]
pub struct PageEntry {
    pub sq: SubQuotient,
    pub determinate: bool,
}

/// Computed page tower: pages 2..=last, each entry a subquotient of E2.
pub struct PageTower {
    pub last_page: i64,
    pages: BTreeMap<(i64, Degree), PageEntry>,
    window: Window,
}

impl PageTower {
    /// Runs the tower from the given data, checking `d o d = 0` page by page.
    /// `through_page`: compute entries of pages `2..=through_page` (stable
    /// extension past `max_page` is allowed when no more differentials are
    /// attested).
    pub fn run(pages: &BssPages, through_page: i64) -> Result<PageTower, ChartError> {
        let w = pages.window;
        let mut tower: BTreeMap<(i64, Degree), PageEntry> = BTreeMap::new();
        // Lattice state per degree: (Z_r, B_r) in E2 generator coordinates.
        let mut state: BTreeMap<Degree, (Matrix, Matrix, bool)> = BTreeMap::new();
        for d in w.degrees() {
            let g = pages.e2_group(d);
            let z = full_lattice(&g);
            let b = hnf_mat(&g.rels().clone());
            state.insert(d, (z, b, true));
        }
        let mut page = 2i64;
        loop {
            // materialize entries of this page
            for d in w.degrees() {
                let (z, b, det) = state.get(&d).unwrap().clone();
                let g = pages.e2_group(d);
                let sq = SubQuotient::new(&g, &z, &b).map_err(ChartError::Other)?;
                tower.insert((page, d), PageEntry { sq, determinate: det });
            }
            if page >= through_page {
                break;
            }
            if page > pages.max_page && !pages.no_more_differentials {
                // cannot extend past the attested range
                for d in w.degrees() {
                    if let Some(s) = state.get_mut(&d) {
                        s.2 = false;
                    }
                }
            }

            // apply the d_page differentials to produce the next state
            let mut next: BTreeMap<Degree, (Matrix, Matrix, bool)> = state.clone();
            for d in w.degrees() {
                let tgt = d.d_target(page);
                let mat = pages.diffs.get(&(page, d));
                let src_entry = tower.get(&(page, d)).unwrap();
                let src_group = &src_entry.sq.group;
                if let Some(m) = mat {
                    if !w.contains(tgt) {
                        return Err(ChartError::BadDifferential {
                            page,
                            at: d,
                            why: "target outside window".into(),
                        });
                    }
                    let tgt_entry = tower.get(&(page, tgt)).unwrap();
                    let tgt_group = &tgt_entry.sq.group;
                    let hom = Hom::new(src_group, tgt_group, m.clone()).map_err(|e| {
                        ChartError::BadDifferential { page, at: d, why: e }
                    })?;
                    // d o d = 0: compose with the differential leaving tgt
                    if let Some(m2) = pages.diffs.get(&(page, tgt)) {
                        let tgt2 = tgt.d_target(page);
                        let comp = m2.mul(m);
                        let g2 = tower.get(&(page, tgt2)).unwrap();
                        for j in 0..comp.cols() {
                            if !g2.sq.group.is_zero_elt(&comp.col(j)) {
                                return Err(ChartError::DSquareNonzero { page, at: d });
                            }
                        }
                    }
                    // kernel in page coords -> E2 coords
                    let ker_page = crate::abgroup::hom_kernel_lattice(src_group, tgt_group, &hom);
                    let ker_e2 = src_entry.sq.basis.mul(&ker_page);
                    let (z, _, _) = state.get(&d).unwrap();
                    let _ = z;
                    let ns = next.get_mut(&d).unwrap();
                    ns.0 = hnf_mat(&ker_e2);
                    // image into the target's B
                    let img_page = hom.mat.clone();
                    let img_e2 = tgt_entry.sq.basis.mul(&img_page);
                    let nt = next.get_mut(&tgt).unwrap();
                    nt.1 = lattice_sum(&nt.1, &hnf_mat(&img_e2));
                }
            }
            // determinacy propagation: an entry of the next page is
            // indeterminate if the window boundary could hide incoming or
            // outgoing d_page differentials, or a neighbor was already
            // indeterminate. Cells with trivial E2 stay zero on every page
            // no matter what enters from outside, so they never taint.
            if !pages.window_complete {
                let prev: BTreeMap<Degree, bool> =
                    state.iter().map(|(d, s)| (*d, s.2)).collect();
                let trivial = |d: Degree| pages.e2_group(d).is_trivial();
                for d in w.degrees() {
                    if trivial(d) {
                        continue;
                    }
                    let incoming_src = Degree::new(d.x + 1, d.y - page);
                    let outgoing_tgt = d.d_target(page);
                    let mut det = *prev.get(&d).unwrap_or(&true);
                    if !w.contains(incoming_src) {
                        det = false;
                    } else if !trivial(incoming_src) && !prev.get(&incoming_src).unwrap_or(&true) {
                        det = false;
                    }
                    if !w.contains(outgoing_tgt) {
                        det = false;
                    } else if !trivial(outgoing_tgt) && !prev.get(&outgoing_tgt).unwrap_or(&true) {
                        det = false;
                    }
                    next.get_mut(&d).unwrap().2 = det;
                }
            }
            state = next;
            page += 1;
        }
        Ok(PageTower { last_page: through_page, pages: tower, window: w })
    }

    pub fn entry(&self, page: i64, d: Degree) -> Option<&PageEntry> {
        self.pages.get(&(page, d))
    }

    pub fn group(&self, page: i64, d: Degree) -> AbGroup {
        self.pages
            .get(&(page, d))
            .map(|e| e.sq.group.clone())
            .unwrap_or_else(AbGroup::zero)
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// The lattice (in E2 coordinates) of permanent cycles at `d`: elements
    /// surviving as cycles through the last computed page.
    pub fn permanent_cycle_lattice(&self, d: Degree) -> Matrix {
        self.pages
            .get(&(self.last_page, d))
            .map(|e| e.sq.basis.clone())
            .unwrap_or_else(|| Matrix::zero(0, 0))
    }

    /// Push an E2-level element into its class on the given page. `None`
    /// when the element no longer survives as a cycle there.
    pub fn push_to_page(&self, page: i64, d: Degree, v: &[BigInt]) -> Option<Vec<BigInt>> {
        self.pages.get(&(page, d)).and_then(|e| e.sq.project(v))
    }
}

/// Rank/torsion compatibility of an E2 entry with the long exact sequence of
/// multiplication by tau: E2 at (x,y) must be an extension of
/// `ker(tau) at (x-1, y+2)` by `coker(tau) at (x,y)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LesReport {
    pub checked: usize,
    pub violations: Vec<LesViolation>,
    pub indeterminate: Vec<Degree>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LesViolation {
    pub degree: Degree,
    pub reason: String,
}

pub fn check_les_consistency(chart: &TauChart, pages: &BssPages) -> LesReport {
    let w = chart.window().intersect(&pages.window);
    let mut report = LesReport { checked: 0, violations: vec![], indeterminate: vec![] };
    for d in w.degrees() {
        // need (x, y+1), (x, y), (x-1, y+2), (x-1, y+1) in window
        let needed = [
            Degree::new(d.x, d.y + 1),
            d,
            Degree::new(d.x - 1, d.y + 2),
            Degree::new(d.x - 1, d.y + 1),
        ];
        if needed.iter().any(|n| !w.contains(*n)) {
            if !pages.e2_group(d).is_trivial() {
                report.indeterminate.push(d);
            }
            continue;
        }
        report.checked += 1;
        let coker = {
            let g = chart.group_at(d);
            AbGroup::new(g.num_gens(), lattice_sum(g.rels(), &chart.tau_at(d)))
        };
        let ker = {
            let up = Degree::new(d.x - 1, d.y + 2);
            let src = chart.group_at(up);
            let dst = chart.group_at(Degree::new(d.x - 1, d.y + 1));
            let tau = Hom::new(&src, &dst, chart.tau_at(Degree::new(d.x - 1, d.y + 1)))
                .expect("validated chart");
            let lat = crate::abgroup::hom_kernel_lattice(&src, &dst, &tau);
            SubQuotient::new(&src, &lat, &Matrix::zero(src.num_gens(), 0))
                .expect("kernel is a subgroup")
                .group
        };
        let e2 = pages.e2_group(d);
        let ci = coker.invariants();
        let ki = ker.invariants();
        let ei = e2.invariants();
        // E2 must be an extension of ker by coker: ranks add, the coker
        // torsion embeds, and the E2 torsion order divides the product
        // (non-split extensions can absorb torsion into the free part).
        let mut reason = None;
        if ei.rank != ci.rank + ki.rank {
            reason = Some(format!(
                "rank {} is not {} + {} (coker + ker)",
                ei.rank, ci.rank, ki.rank
            ));
        } else if !(ei.torsion_order() % ci.torsion_order()).is_zero() {
            reason = Some(format!(
                "coker torsion of order {} does not embed in torsion of order {}",
                ci.torsion_order(),
                ei.torsion_order()
            ));
        } else if !((ci.torsion_order() * ki.torsion_order()) % ei.torsion_order()).is_zero() {
            reason = Some(format!(
                "torsion order {} exceeds coker x ker = {} x {}",
                ei.torsion_order(),
                ci.torsion_order(),
                ki.torsion_order()
            ));
        }
        if let Some(reason) = reason {
            report.violations.push(LesViolation { degree: d, reason });
        }
    }
    report
}

/// A map of charts-with-pages: per-degree matrices on pi generators and on
/// E2 generators.
#[derive(Clone, Debug)]
pub struct ChartMap {
    pub pi_maps: BTreeMap<Degree, Matrix>,
    pub e2_maps: BTreeMap<Degree, Matrix>,
}

impl ChartMap {
    pub fn pi_at(&self, d: Degree, src: &TauChart, dst: &TauChart) -> Matrix {
        self.pi_maps.get(&d).cloned().unwrap_or_else(|| {
            Matrix::zero(dst.group_at(d).num_gens(), src.group_at(d).num_gens())
        })
    }

    pub fn e2_at(&self, d: Degree, src: &BssPages, dst: &BssPages) -> Matrix {
        self.e2_maps.get(&d).cloned().unwrap_or_else(|| {
            Matrix::zero(dst.e2_group(d).num_gens(), src.e2_group(d).num_gens())
        })
    }

    /// Exact commutation of every square with tau, and (when projections are
    /// present on both sides) naturality of the mod-tau projection.
    pub fn validate(
        &self,
        src: &(TauChart, BssPages),
        dst: &(TauChart, BssPages),
    ) -> Result<(), ChartError> {
        let w = src.0.window().intersect(&dst.0.window());
        for d in w.degrees() {
            let up = Degree::new(d.x, d.y + 1);
            if !w.contains(up) {
                continue;
            }
            let f_up = self.pi_at(up, &src.0, &dst.0);
            let f_d = self.pi_at(d, &src.0, &dst.0);
            let lhs = f_d.mul(&src.0.tau_at(d));
            let rhs = dst.0.tau_at(d).mul(&f_up);
            let dst_g = dst.0.group_at(d);
            for j in 0..lhs.cols() {
                let diff: Vec<BigInt> = lhs
                    .col(j)
                    .iter()
                    .zip(rhs.col(j))
                    .map(|(a, b)| a - &b)
                    .collect();
                if !dst_g.is_zero_elt(&diff) {
                    return Err(ChartError::Other(format!(
                        "map does not commute with tau at {d}"
                    )));
                }
            }
        }
        // naturality of projections where present on both sides
        let wp = src.1.window.intersect(&dst.1.window);
        for d in wp.degrees() {
            let (Some(ps), Some(pt)) = (src.1.projections.get(&d), dst.1.projections.get(&d))
            else {
                continue;
            };
            let f_pi = self.pi_at(d, &src.0, &dst.0);
            let f_e2 = self.e2_at(d, &src.1, &dst.1);
            let lhs = f_e2.mul(ps);
            let rhs = pt.mul(&f_pi);
            let dst_e2 = dst.1.e2_group(d);
            for j in 0..lhs.cols() {
                let diff: Vec<BigInt> =
                    lhs.col(j).iter().zip(rhs.col(j)).map(|(a, b)| a - &b).collect();
                if !dst_e2.is_zero_elt(&diff) {
                    return Err(ChartError::Other(format!(
                        "mod-tau projection does not commute with the map at {d}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Comparison summaries for `diff`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DiffReport {
    pub chart_degrees: Vec<Degree>,
    pub page_degrees: Vec<(i64, Degree)>,
    pub differential_sources: Vec<(i64, Degree)>,
    pub notes: Vec<String>,
}

impl DiffReport {
    pub fn is_empty(&self) -> bool {
        self.chart_degrees.is_empty()
            && self.page_degrees.is_empty()
            && self.differential_sources.is_empty()
    }
}

/// Compare two charts-with-pages by Smith invariants per degree and page,
/// and differential patterns per source degree. Restricted to the window
/// intersection (optionally further restricted by a stem range).
pub fn diff_charts(
    a: &(TauChart, BssPages),
    b: &(TauChart, BssPages),
    through_page: i64,
    stems: Option<(i64, i64)>,
) -> Result<DiffReport, ChartError> {
    let mut report = DiffReport::default();
    let keep = |d: Degree| stems.is_none_or(|(lo, hi)| d.x >= lo && d.x <= hi);

    // pi-level
    let wa = a.0.window().intersect(&b.0.window());
    for d in wa.degrees() {
        if !keep(d) {
            continue;
        }
        let ga = a.0.group_at(d).invariants();
        let gb = b.0.group_at(d).invariants();
        let ta = tau_pattern(&a.0, d);
        let tb = tau_pattern(&b.0, d);
        if ga != gb || ta != tb {
            report.chart_degrees.push(d);
        }
    }

    // page-level
    let ta = PageTower::run(&a.1, through_page)?;
    let tb = PageTower::run(&b.1, through_page)?;
    let wp = a.1.window.intersect(&b.1.window);
    for r in 2..=through_page {
        for d in wp.degrees() {
            if !keep(d) {
                continue;
            }
            let (ea, eb) = (ta.entry(r, d), tb.entry(r, d));
            let ia = ea.map(|e| e.sq.group.invariants()).unwrap_or_else(Invariants::zero);
            let ib = eb.map(|e| e.sq.group.invariants()).unwrap_or_else(Invariants::zero);
            let da = ea.map(|e| e.determinate).unwrap_or(true);
            let db = eb.map(|e| e.determinate).unwrap_or(true);
            if da && db {
                if ia != ib {
                    report.page_degrees.push((r, d));
                }
            } else if da != db {
                report
                    .notes
                    .push(format!("page {r} {d}: determinacy differs between inputs"));
            }
        }
    }

    // differential patterns
    for r in 2..=through_page {
        for d in wp.degrees() {
            if !keep(d) {
                continue;
            }
            let pa = diff_pattern(&a.1, &ta, r, d);
            let pb = diff_pattern(&b.1, &tb, r, d);
            if pa != pb {
                report.differential_sources.push((r, d));
            }
        }
    }
    Ok(report)
}

fn tau_pattern(chart: &TauChart, d: Degree) -> HomPattern {
    let src = chart.group_at(Degree::new(d.x, d.y + 1));
    let dst = chart.group_at(d);
    let tau = Hom::new(&src, &dst, chart.tau_at(d)).expect("validated chart");
    hom_pattern(&src, &dst, &tau)
}

fn diff_pattern(pages: &BssPages, tower: &PageTower, r: i64, src: Degree) -> Option<HomPattern> {
    let tgt = src.d_target(r);
    let src_g = tower.group(r, src);
    let tgt_g = tower.group(r, tgt);
    let mat = pages
        .diffs
        .get(&(r, src))
        .cloned()
        .unwrap_or_else(|| Matrix::zero(tgt_g.num_gens(), src_g.num_gens()));
    let hom = Hom::new(&src_g, &tgt_g, mat).ok()?;
    let pat = hom_pattern(&src_g, &tgt_g, &hom);
    if pat.image.is_zero() {
        None
    } else {
        Some(pat)
    }
}

/// Map a page-level map through homology: given `f` on E2 generator spaces
/// commuting with the differentials, the induced matrix between page-r
/// entries (in canonical page coordinates).
pub fn induced_page_map(
    src_tower: &PageTower,
    dst_tower: &PageTower,
    r: i64,
    d: Degree,
    f_e2: &Matrix,
) -> Result<Matrix, String> {
    let se = src_tower.entry(r, d).ok_or("missing source page entry")?;
    let de = dst_tower.entry(r, d).ok_or("missing destination page entry")?;
    induced_map(&se.sq, &de.sq, f_e2)
}

pub fn lattices_equal(a: &Matrix, b: &Matrix) -> bool {
    lattice_eq(a, b)
}
