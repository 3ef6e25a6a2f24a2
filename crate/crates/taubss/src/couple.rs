//! The exact couple of a filtered object, abstracted: bigraded groups
//! `pi_{x,y}` with tau-maps, mod-tau groups `E2_{x,y}`, the projection
//! `pi -> E2` and the boundary `E2_{x,y} -> pi_{x-1,y+2}`. Pages and
//! differentials are derived from this data alone, so the same engine serves
//! the chain-complex oracle and the predicted covers.

use crate::abgroup::{
    full_lattice, hom_kernel_lattice, lattice_contains, lattice_sum, AbGroup, Hom, SubQuotient,
};
use crate::chart::{BssPages, Entry, GenInfo, TauChart, Window};
use crate::grading::Degree;
use crate::matrix::{hnf, solve, Matrix};
use num_bigint::BigInt;
use std::collections::BTreeMap;

/// Full couple data over a window. Maps may be absent when zero.
#[derive(Clone, Debug, Default)]
pub struct CoupleData {
    pub window: Option<Window>,
    pub pi: BTreeMap<Degree, Entry>,
    /// tau into `(x,y)` from `(x,y+1)`
    pub tau: BTreeMap<Degree, Matrix>,
    pub e2: BTreeMap<Degree, Entry>,
    /// projection `pi_{x,y} -> E2_{x,y}`
    pub proj: BTreeMap<Degree, Matrix>,
    /// boundary `E2_{x,y} -> pi_{x-1,y+2}`
    pub bnd: BTreeMap<Degree, Matrix>,
    pub stable_below_level: Option<i64>,
    pub stable_above_level: Option<i64>,
    /// pi vanishes strictly above this line (declared, e.g. for covers)
    pub vanish_above_line: Option<crate::grading::Line>,
    /// the window covers every nonzero degree and differential
    pub window_complete: bool,
    /// no differentials beyond this page
    pub max_page: i64,
    pub no_more_differentials: bool,
}

impl CoupleData {
    pub fn window(&self) -> Window {
        self.window.unwrap_or(Window { x0: 0, x1: -1, y0: 0, y1: -1 })
    }

    pub fn pi_group(&self, d: Degree) -> AbGroup {
        self.pi.get(&d).map(|e| e.group.clone()).unwrap_or_else(AbGroup::zero)
    }

    pub fn e2_group(&self, d: Degree) -> AbGroup {
        self.e2.get(&d).map(|e| e.group.clone()).unwrap_or_else(AbGroup::zero)
    }

    pub fn tau_into(&self, d: Degree) -> Matrix {
        let src = Degree::new(d.x, d.y + 1);
        self.tau
            .get(&d)
            .cloned()
            .unwrap_or_else(|| Matrix::zero(self.pi_group(d).num_gens(), self.pi_group(src).num_gens()))
    }

    pub fn proj_at(&self, d: Degree) -> Matrix {
        self.proj
            .get(&d)
            .cloned()
            .unwrap_or_else(|| Matrix::zero(self.e2_group(d).num_gens(), self.pi_group(d).num_gens()))
    }

    pub fn bnd_at(&self, d: Degree) -> Matrix {
        let tgt = Degree::new(d.x - 1, d.y + 2);
        self.bnd
            .get(&d)
            .cloned()
            .unwrap_or_else(|| Matrix::zero(self.pi_group(tgt).num_gens(), self.e2_group(d).num_gens()))
    }

    /// Composite of tau-steps from `(x, y+k)` into `(x, y)`.
    pub fn tau_power_into(&self, d: Degree, k: i64) -> Matrix {
        assert!(k >= 0);
        let mut m = Matrix::identity(self.pi_group(d).num_gens());
        for t in 0..k {
            m = m.mul(&self.tau_into(Degree::new(d.x, d.y + t)));
        }
        m
    }

    /// The TauChart view of the pi-side.
    pub fn tau_chart(&self) -> TauChart {
        TauChart {
            window: self.window,
            entries: self.pi.clone(),
            tau: self.tau.clone(),
            stable_below_level: self.stable_below_level,
            stable_above_level: self.stable_above_level,
            vanish_above_line: self.vanish_above_line,
            structure_lines: vec![],
        }
    }

    /// Exactness of pi -> E2 -> pi at each in-window joint:
    /// im(tau) = ker(proj) and im(proj) = ker(bnd) and im(bnd) = ker(tau).
    /// Returns one witness string per violated joint.
    pub fn exactness_violations(&self) -> Vec<(Degree, String)> {
        let w = self.window();
        let mut out = Vec::new();
        for d in w.degrees() {
            let pi_d = self.pi_group(d);
            let e2_d = self.e2_group(d);
            let up = Degree::new(d.x, d.y + 1);
            // joint at pi_{x,y}: im(tau) = ker(proj)
            if w.contains(up) {
                let tau = Hom::new(&self.pi_group(up), &pi_d, self.tau_into(d));
                let proj = Hom::new(&pi_d, &e2_d, self.proj_at(d));
                match (tau, proj) {
                    (Ok(tau), Ok(proj)) => {
                        let im = lattice_sum(&self.tau_into(d), pi_d.rels());
                        let ker = hom_kernel_lattice(&pi_d, &e2_d, &proj);
                        if hnf(&im) != hnf(&ker) {
                            out.push((d, "im(tau) != ker(proj)".into()));
                        }
                        let _ = tau;
                    }
                    _ => out.push((d, "tau or proj is not a homomorphism".into())),
                }
            }
            // joint at E2_{x,y}: im(proj) = ker(bnd)
            let dn = Degree::new(d.x - 1, d.y + 2);
            if w.contains(dn) {
                let proj = Hom::new(&pi_d, &e2_d, self.proj_at(d));
                let bnd = Hom::new(&e2_d, &self.pi_group(dn), self.bnd_at(d));
                match (proj, bnd) {
                    (Ok(proj), Ok(bnd)) => {
                        let im = lattice_sum(&proj.mat, e2_d.rels());
                        let ker = hom_kernel_lattice(&e2_d, &self.pi_group(dn), &bnd);
                        if hnf(&im) != hnf(&ker) {
                            out.push((d, "im(proj) != ker(bnd)".into()));
                        }
                    }
                    _ => out.push((d, "proj or bnd is not a homomorphism".into())),
                }
            }
            // joint at pi_{x-1,y+2}: im(bnd) = ker(tau)
            let dn1 = Degree::new(d.x - 1, d.y + 1);
            if w.contains(dn) && w.contains(dn1) {
                let bnd = Hom::new(&e2_d, &self.pi_group(dn), self.bnd_at(d));
                let tau = Hom::new(&self.pi_group(dn), &self.pi_group(dn1), self.tau_into(dn1));
                match (bnd, tau) {
                    (Ok(bnd), Ok(tau)) => {
                        let im = lattice_sum(&bnd.mat, self.pi_group(dn).rels());
                        let ker = hom_kernel_lattice(&self.pi_group(dn), &self.pi_group(dn1), &tau);
                        if hnf(&im) != hnf(&ker) {
                            out.push((d, "im(bnd) != ker(tau)".into()));
                        }
                    }
                    _ => out.push((d, "bnd or tau is not a homomorphism".into())),
                }
            }
        }
        out
    }
}

/// Differentials computed from couple data: `d_r = proj . tau^{-(r-2)} . bnd`
/// on surviving cycles, emitted in canonical page coordinates.
pub fn pages_from_couple(c: &CoupleData, max_page: i64) -> Result<BssPages, String> {
    let window = c.window();
    let mut pages = BssPages::empty(window);
    pages.max_page = max_page;
    pages.no_more_differentials = c.no_more_differentials;
    pages.window_complete = c.window_complete;
    for (d, e) in &c.e2 {
        pages.e2.insert(*d, e.clone());
    }
    for (d, m) in &c.proj {
        pages.projections.insert(*d, m.clone());
    }

    // (Z_r, B_r) lattices per degree in E2 coordinates
    let mut state: BTreeMap<Degree, (Matrix, Matrix)> = BTreeMap::new();
    for d in window.degrees() {
        let g = c.e2_group(d);
        state.insert(d, (full_lattice(&g), hnf(g.rels())));
    }
    for r in 2..=max_page {
        let mut sq: BTreeMap<Degree, SubQuotient> = BTreeMap::new();
        for d in window.degrees() {
            let (z, b) = state.get(&d).unwrap();
            sq.insert(d, SubQuotient::new(&c.e2_group(d), z, b)?);
        }
        let mut next = state.clone();
        for d in window.degrees() {
            let src_sq = sq.get(&d).unwrap();
            if src_sq.group.is_trivial() {
                continue;
            }
            let tgt = d.d_target(r);
            let mid = Degree::new(d.x - 1, d.y + 2);
            let k_mat = c.bnd_at(d);
            // i^{r-2}: pi(x-1, y+r) -> pi(x-1, y+2)
            let itop = c.tau_power_into(mid, r - 2);
            if !window.contains(tgt) {
                // every differential leaving the window must be zero when
                // the window is complete
                if c.window_complete {
                    for jcol in 0..src_sq.basis.cols() {
                        let kv = k_mat.mul_vec(&src_sq.basis.col(jcol));
                        if !c.pi_group(mid).is_zero_elt(&kv) {
                            return Err(format!(
                                "nonzero differential leaves the window at {d} page {r}"
                            ));
                        }
                    }
                }
                continue;
            }
            let tgt_sq = sq.get(&tgt).unwrap();
            let j_tgt = c.proj_at(tgt);
            let mid_rels = c.pi_group(mid).rels().clone();
            let aug = if mid_rels.cols() == 0 { itop.clone() } else { itop.hstack(&mid_rels) };
            let mut cols = Vec::new();
            for jcol in 0..src_sq.basis.cols() {
                let v = src_sq.basis.col(jcol);
                let kv = k_mat.mul_vec(&v);
                let Some(sol) = solve(&aug, &kv) else {
                    return Err(format!(
                        "page {r} cycle at {d} has no differential value (boundary does not lift)"
                    ));
                };
                let w: Vec<BigInt> = sol[..itop.cols()].to_vec();
                let jw = j_tgt.mul_vec(&w);
                let pw = tgt_sq.project(&jw).ok_or_else(|| {
                    format!("differential value at page {r} from {d} leaves the surviving cycles")
                })?;
                cols.push(pw);
            }
            let mat = Matrix::from_cols(cols, tgt_sq.basis.cols());
            let nonzero = (0..mat.cols()).any(|j| !tgt_sq.group.is_zero_elt(&mat.col(j)));
            if nonzero {
                pages.diffs.insert((r, d), mat.clone());
                let hom = Hom::new(&src_sq.group, &tgt_sq.group, mat)?;
                let ker_page = hom_kernel_lattice(&src_sq.group, &tgt_sq.group, &hom);
                let ker_e2 = src_sq.basis.mul(&ker_page);
                next.get_mut(&d).unwrap().0 = hnf(&ker_e2);
                let img_e2 = tgt_sq.basis.mul(&hom.mat);
                let nt = next.get_mut(&tgt).unwrap();
                nt.1 = lattice_sum(&nt.1, &hnf(&img_e2));
            }
        }
        state = next;
    }
    Ok(pages)
}

/// Torsion height of a pi-element within the window: least `k >= 1` with
/// `tau^k v = 0`. `Ok(None)` means no power vanishes and the column is
/// stable-trusted (genuinely infinite); `Err(())` means the window is too
/// small to tell.
pub fn torsion_height(c: &CoupleData, d: Degree, v: &[BigInt]) -> Result<Option<i64>, ()> {
    let w = c.window();
    let mut cur = v.to_vec();
    let mut k = 0i64;
    let mut y = d.y;
    loop {
        if c.pi_group(Degree::new(d.x, y)).is_zero_elt(&cur) {
            return Ok(Some(k));
        }
        // one more tau step lands in (x, y-1)
        let below = Degree::new(d.x, y - 1);
        let stable_h = c.tau_chart().stable_height(d.x);
        if !w.contains(below) {
            // exited the window without vanishing; trust stability only
            return match stable_h {
                Some(h) if y <= h => Ok(None),
                _ => Err(()),
            };
        }
        if let Some(h) = stable_h {
            if y <= h {
                // inside the stable zone and still nonzero: never dies
                return Ok(None);
            }
        }
        cur = c.tau_into(below).mul_vec(&cur);
        y -= 1;
        k += 1;
    }
}

/// Is the vector in the image of `tau^k` into `d` (using only window data)?
pub fn in_tau_power_image(c: &CoupleData, d: Degree, k: i64, v: &[BigInt]) -> bool {
    let m = c.tau_power_into(d, k);
    let g = c.pi_group(d);
    let aug = if g.rels().cols() == 0 { m.clone() } else { m.hstack(g.rels()) };
    solve(&aug, v).is_some()
}

/// Build a couple from chart + pages documents (the deserialized pairing):
/// checks shapes, not exactness.
pub fn couple_from_parts(chart: &TauChart, pages: &BssPages, bnd: &BTreeMap<Degree, Matrix>) -> CoupleData {
    CoupleData {
        window: Some(chart.window().intersect(&pages.window)),
        pi: chart.entries.clone(),
        tau: chart.tau.clone(),
        e2: pages.e2.clone(),
        proj: pages.projections.clone(),
        bnd: bnd.clone(),
        stable_below_level: chart.stable_below_level,
        stable_above_level: chart.stable_above_level,
        vanish_above_line: chart.vanish_above_line,
        window_complete: pages.window_complete,
        max_page: pages.max_page,
        no_more_differentials: pages.no_more_differentials,
    }
}

/// Generator metadata helper for synthesized entries.
pub fn synth_gens(prefix: &str, d: Degree, n: usize) -> Vec<GenInfo> {
    (0..n).map(|i| GenInfo::plain(format!("{prefix}{}_{}_{}", d.x, d.y, i))).collect()
}

pub fn element_in_lattice(lat: &Matrix, v: &[BigInt]) -> bool {
    lattice_contains(lat, v)
}
