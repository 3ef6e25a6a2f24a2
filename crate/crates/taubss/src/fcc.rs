//! Filtered chain complexes over the integers: a concrete, fully computable
//! model of filtered spectra. Charts and tau-Bockstein pages are computed
//! here by brute force (Smith normal form homology and the exact couple of
//! the tower), so this module serves as the independent oracle for the
//! cover-prediction engine.
//!
//! Conventions: a tower has explicit levels `n0..=n1`; `X^n = X^{n0}` for
//! `n < n0` (eventually constant) and `X^n = 0` for `n > n1` (hence the
//! inverse limit vanishes and every tower is complete).

use crate::abgroup::{AbGroup, SubQuotient};
use crate::chart::{BssPages, Entry, GenInfo, TauChart, Window};
use crate::couple::CoupleData;
use crate::grading::{Degree, Line};
use crate::matrix::{hnf, kernel, solve, Matrix};
use num_bigint::BigInt;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FccError {
    #[error("chain complex invalid: {0}")]
    BadComplex(String),
    #[error("chain map invalid: {0}")]
    BadMap(String),
    #[error("tower invalid: {0}")]
    BadTower(String),
    #[error("{0}")]
    Other(String),
}

/// A bounded chain complex of finitely generated free abelian groups.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ChainComplex {
    /// rank per homological degree (absent = 0)
    pub ranks: BTreeMap<i64, usize>,
    /// differential `d_i : C_i -> C_{i-1}` (absent = 0)
    pub diffs: BTreeMap<i64, Matrix>,
}

impl ChainComplex {
    pub fn zero() -> Self {
        Self::default()
    }

    /// A single free summand `Z^rank` concentrated in one degree.
    pub fn concentrated(degree: i64, rank: usize) -> Self {
        let mut c = Self::default();
        if rank > 0 {
            c.ranks.insert(degree, rank);
        }
        c
    }

    /// Two-term complex `Z --m--> Z` in degrees `top, top-1`.
    pub fn two_term(top: i64, m: i64) -> Self {
        let mut c = Self::default();
        c.ranks.insert(top, 1);
        c.ranks.insert(top - 1, 1);
        c.diffs.insert(top, Matrix::from_i64(&[&[m]]));
        c
    }

    pub fn rank(&self, i: i64) -> usize {
        *self.ranks.get(&i).unwrap_or(&0)
    }

    pub fn diff(&self, i: i64) -> Matrix {
        self.diffs
            .get(&i)
            .cloned()
            .unwrap_or_else(|| Matrix::zero(self.rank(i - 1), self.rank(i)))
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.ranks.iter().filter(|(_, r)| **r > 0).map(|(i, _)| *i).min()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.ranks.iter().filter(|(_, r)| **r > 0).map(|(i, _)| *i).max()
    }

    pub fn is_zero(&self) -> bool {
        self.ranks.values().all(|r| *r == 0)
    }

    pub fn validate(&self) -> Result<(), FccError> {
        for (i, d) in &self.diffs {
            if d.rows() != self.rank(i - 1) || d.cols() != self.rank(*i) {
                return Err(FccError::BadComplex(format!("differential at degree {i} has wrong shape")));
            }
            let dd = self.diff(i - 1).mul(d);
            if !dd.is_zero() {
                return Err(FccError::BadComplex(format!("d^2 != 0 at degree {i}")));
            }
        }
        Ok(())
    }

    /// Direct sum, tracking no basis provenance.
    pub fn direct_sum(&self, other: &ChainComplex) -> ChainComplex {
        let mut out = ChainComplex::default();
        let degs: std::collections::BTreeSet<i64> =
            self.ranks.keys().chain(other.ranks.keys()).cloned().collect();
        for &i in &degs {
            let r = self.rank(i) + other.rank(i);
            if r > 0 {
                out.ranks.insert(i, r);
            }
        }
        for &i in &degs {
            let (a, b) = (self.diff(i), other.diff(i));
            if a.cols() + b.cols() == 0 || a.rows() + b.rows() == 0 {
                continue;
            }
            let mut m = Matrix::zero(a.rows() + b.rows(), a.cols() + b.cols());
            for r in 0..a.rows() {
                for c in 0..a.cols() {
                    m[(r, c)] = a[(r, c)].clone();
                }
            }
            for r in 0..b.rows() {
                for c in 0..b.cols() {
                    m[(r + a.rows(), c + a.cols())] = b[(r, c)].clone();
                }
            }
            if !m.is_zero() {
                out.diffs.insert(i, m);
            }
        }
        out
    }

    /// Shift degrees up by `a` (no sign twist; only iso-classes of homology
    /// and naturality are consumed downstream).
    pub fn shifted(&self, a: i64) -> ChainComplex {
        ChainComplex {
            ranks: self.ranks.iter().map(|(i, r)| (i + a, *r)).collect(),
            diffs: self.diffs.iter().map(|(i, d)| (i + a, d.clone())).collect(),
        }
    }

    /// Homology-preserving truncation in degrees >= k: identity above k,
    /// kernel of the differential in degree k, zero below.
    pub fn smart_truncate(&self, k: i64) -> (ChainComplex, TruncationData) {
        let mut out = ChainComplex::default();
        let max = self.max_degree().unwrap_or(k - 1);
        let mut data = TruncationData { cut: k, kernel_basis: None };
        if max < k {
            return (out, data);
        }
        for i in k + 1..=max {
            if self.rank(i) > 0 {
                out.ranks.insert(i, self.rank(i));
            }
            if i > k + 1 {
                let d = self.diff(i);
                if !d.is_zero() {
                    out.diffs.insert(i, d);
                }
            }
        }
        let kb = hnf(&kernel(&self.diff(k)));
        if kb.cols() > 0 {
            out.ranks.insert(k, kb.cols());
            // differential C_{k+1} -> ker, expressed in the kernel basis
            let d = self.diff(k + 1);
            if d.cols() > 0 {
                let mut cols = Vec::new();
                for j in 0..d.cols() {
                    let v = d.col(j);
                    let w = solve(&kb, &v).expect("image of d lies in the kernel of the next d");
                    cols.push(w);
                }
                let m = Matrix::from_cols(cols, kb.cols());
                if !m.is_zero() {
                    out.diffs.insert(k + 1, m);
                }
            }
        }
        data.kernel_basis = Some(kb);
        (out, data)
    }
}

/// How a smart truncation re-coordinatized the cut degree.
#[derive(Clone, Debug)]
pub struct TruncationData {
    pub cut: i64,
    pub kernel_basis: Option<Matrix>,
}

/// A chain map: one matrix per degree.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ChainMap {
    pub components: BTreeMap<i64, Matrix>,
}

impl ChainMap {
    pub fn identity(c: &ChainComplex) -> ChainMap {
        ChainMap {
            components: c
                .ranks
                .iter()
                .filter(|(_, r)| **r > 0)
                .map(|(i, r)| (*i, Matrix::identity(*r)))
                .collect(),
        }
    }

    pub fn zero() -> ChainMap {
        ChainMap::default()
    }

    pub fn component(&self, i: i64, src: &ChainComplex, dst: &ChainComplex) -> Matrix {
        self.components
            .get(&i)
            .cloned()
            .unwrap_or_else(|| Matrix::zero(dst.rank(i), src.rank(i)))
    }

    pub fn validate(&self, src: &ChainComplex, dst: &ChainComplex) -> Result<(), FccError> {
        for (i, m) in &self.components {
            if m.rows() != dst.rank(*i) || m.cols() != src.rank(*i) {
                return Err(FccError::BadMap(format!("component at degree {i} has wrong shape")));
            }
        }
        let degs: std::collections::BTreeSet<i64> =
            src.ranks.keys().chain(dst.ranks.keys()).cloned().collect();
        for &i in &degs {
            let lhs = dst.diff(i).mul(&self.component(i, src, dst));
            let rhs = self.component(i - 1, src, dst).mul(&src.diff(i));
            if lhs != rhs {
                return Err(FccError::BadMap(format!("does not commute with d at degree {i}")));
            }
        }
        Ok(())
    }

    pub fn compose(&self, first: &ChainMap, src: &ChainComplex, mid: &ChainComplex, dst: &ChainComplex) -> ChainMap {
        let degs: std::collections::BTreeSet<i64> = src
            .ranks
            .keys()
            .chain(mid.ranks.keys())
            .chain(dst.ranks.keys())
            .cloned()
            .collect();
        let mut out = ChainMap::default();
        for &i in &degs {
            let m = self.component(i, mid, dst).mul(&first.component(i, src, mid));
            if !m.is_zero() {
                out.components.insert(i, m);
            }
        }
        out
    }
}

/// A tower of chain complexes, eventually constant below and zero above.
#[derive(Clone, Debug)]
pub struct FilteredComplex {
    pub n0: i64,
    pub n1: i64,
    /// levels `n0..=n1`
    pub levels: Vec<ChainComplex>,
    /// `maps[j]`: structure map `X^{n0+j+1} -> X^{n0+j}`, so `maps` has
    /// length `n1 - n0` and the map into level `n1` is missing because
    /// `X^{n1+1} = 0`.
    pub maps: Vec<ChainMap>,
}

impl FilteredComplex {
    pub fn constant(c: ChainComplex, n0: i64, n1: i64) -> FilteredComplex {
        assert!(n0 <= n1);
        let count = (n1 - n0) as usize;
        let maps = (0..count).map(|_| ChainMap::identity(&c)).collect();
        FilteredComplex { n0, n1, levels: vec![c; count + 1], maps }
    }

    /// The Yoneda-style tower: `Z[0]` at levels <= k, zero above.
    pub fn yoneda(k: i64) -> FilteredComplex {
        FilteredComplex::constant(ChainComplex::concentrated(0, 1), k, k)
    }

    /// The level complex with conventions applied.
    pub fn level(&self, n: i64) -> ChainComplex {
        if n > self.n1 {
            ChainComplex::zero()
        } else if n < self.n0 {
            self.levels[0].clone()
        } else {
            self.levels[(n - self.n0) as usize].clone()
        }
    }

    /// Structure map `X^{n+1} -> X^n`.
    pub fn structure_map(&self, n: i64) -> ChainMap {
        if n >= self.n1 {
            ChainMap::zero()
        } else if n < self.n0 {
            ChainMap::identity(&self.levels[0])
        } else {
            self.maps[(n - self.n0) as usize].clone()
        }
    }

    pub fn validate(&self) -> Result<(), FccError> {
        if self.levels.len() != (self.n1 - self.n0 + 1) as usize {
            return Err(FccError::BadTower("level count does not match range".into()));
        }
        if self.maps.len() != (self.n1 - self.n0) as usize {
            return Err(FccError::BadTower("map count does not match range".into()));
        }
        for c in &self.levels {
            c.validate()?;
        }
        for (j, f) in self.maps.iter().enumerate() {
            f.validate(&self.levels[j + 1], &self.levels[j])?;
        }
        Ok(())
    }

    pub fn min_chain_degree(&self) -> i64 {
        self.levels.iter().filter_map(|c| c.min_degree()).min().unwrap_or(0)
    }

    pub fn max_chain_degree(&self) -> i64 {
        self.levels.iter().filter_map(|c| c.max_degree()).max().unwrap_or(0)
    }

    /// A window that contains every nonzero bidegree with a zero margin of
    /// `pad` on each side.
    pub fn natural_window(&self, pad: i64) -> Window {
        let (dmin, dmax) = (self.min_chain_degree(), self.max_chain_degree());
        Window {
            x0: dmin - pad,
            x1: dmax + pad,
            y0: self.n0 - dmax - pad,
            y1: self.n1 - dmin + pad,
        }
    }

    /// Associated graded: level `n` is the mapping cone of
    /// `X^{n+1} -> X^n`. Zero outside `[n0, n1]`.
    pub fn gr(&self, n: i64) -> ChainComplex {
        if n < self.n0 || n > self.n1 {
            return ChainComplex::zero();
        }
        mapping_cone(&self.level(n + 1), &self.level(n), &self.structure_map(n)).0
    }

    /// Sharpest eventually-constant bound: least `N` with
    /// `X^{-n} -> X^{-n-1}` an equality of presentations for all `n >= N`.
    pub fn eventually_constant_bound(&self) -> i64 {
        // Find the largest target level T such that the maps into every
        // level <= T are presentation equalities; then N = -T - 1.
        let mut t = self.n0 - 1; // maps into levels < n0 are identities
        for target in self.n0..=self.n1 {
            let src = self.level(target + 1);
            let dst = self.level(target);
            let f = self.structure_map(target);
            let equal = src == dst && f == ChainMap::identity(&src);
            if equal {
                t = target;
            } else {
                break;
            }
        }
        -t - 1
    }

    /// Dilation: `(D^k X)^m = X^{ceil(m/k)}`.
    pub fn dilate(&self, k: i64) -> FilteredComplex {
        assert!(k >= 1);
        let n0 = k * self.n0;
        let n1 = k * self.n1;
        let mut levels = Vec::new();
        let mut maps = Vec::new();
        for m in n0..=n1 {
            levels.push(self.level(ceil_div(m, k)));
        }
        for m in n0..n1 {
            // X^{ceil((m+1)/k)} -> X^{ceil(m/k)}
            let hi = ceil_div(m + 1, k);
            let lo = ceil_div(m, k);
            if hi == lo {
                maps.push(ChainMap::identity(&self.level(lo)));
            } else {
                maps.push(self.structure_map(lo));
            }
        }
        FilteredComplex { n0, n1, levels, maps }
    }

    /// Tensor with the bigraded sphere: homological shift by `a`, level
    /// shift by `a + s`, so `pi_{x,y}(shift) = pi_{x-a, y-s}(X)`.
    pub fn shift(&self, a: i64, s: i64) -> FilteredComplex {
        FilteredComplex {
            n0: self.n0 + a + s,
            n1: self.n1 + a + s,
            levels: self.levels.iter().map(|c| c.shifted(a)).collect(),
            maps: self
                .maps
                .iter()
                .map(|f| ChainMap {
                    components: f.components.iter().map(|(i, m)| (i + a, m.clone())).collect(),
                })
                .collect(),
        }
    }

    /// Levelwise connective cover for the linear t-structure: level `n` is
    /// the smart truncation of `X^n` in degrees >= `ceil(n/(alpha+1))`.
    pub fn linear_cover(&self, line: &Line) -> FilteredComplex {
        // extend downward until the truncation is the identity on the
        // constant part of the tower
        let m0 = self.min_chain_degree();
        // largest n with threshold(n) <= m0: n <= m0 (p+q) / q
        let nstar = floor_div(m0 * (line.p() + line.q()), line.q());
        let n0 = self.n0.min(nstar);
        let n1 = self.n1;
        let mut levels = Vec::new();
        let mut trunc = Vec::new();
        for n in n0..=n1 {
            let (c, t) = self.level(n).smart_truncate(line.cover_threshold(n));
            levels.push(c);
            trunc.push(t);
        }
        let mut maps = Vec::new();
        for n in n0..n1 {
            let ji = (n - n0) as usize;
            let src_orig = self.level(n + 1);
            let dst_orig = self.level(n);
            let f = self.structure_map(n);
            maps.push(truncated_map(
                &f,
                &src_orig,
                &dst_orig,
                &levels[ji + 1],
                &levels[ji],
                &trunc[ji + 1],
                &trunc[ji],
            ));
        }
        FilteredComplex { n0, n1, levels, maps }
    }
}

fn ceil_div(a: i64, b: i64) -> i64 {
    assert!(b > 0);
    num_integer::Integer::div_ceil(&a, &b)
}

fn floor_div(a: i64, b: i64) -> i64 {
    assert!(b > 0);
    num_integer::Integer::div_floor(&a, &b)
}

/// Mapping cone of `f : C -> D`: degrees `D_k + C_{k-1}`, differential
/// `(d, c) -> (dd + f c, -dc)`. Returns the cone and the inclusion `D -> cone`.
pub fn mapping_cone(c: &ChainComplex, d: &ChainComplex, f: &ChainMap) -> (ChainComplex, ChainMap) {
    let mut cone = ChainComplex::default();
    let degs: std::collections::BTreeSet<i64> = c
        .ranks
        .keys()
        .map(|i| i + 1)
        .chain(d.ranks.keys().cloned())
        .collect();
    for &k in &degs {
        let r = d.rank(k) + c.rank(k - 1);
        if r > 0 {
            cone.ranks.insert(k, r);
        }
    }
    for &k in &degs {
        let rows = d.rank(k - 1) + c.rank(k - 2);
        let cols = d.rank(k) + c.rank(k - 1);
        if rows == 0 || cols == 0 {
            continue;
        }
        let mut m = Matrix::zero(rows, cols);
        let dd = d.diff(k);
        for i in 0..dd.rows() {
            for j in 0..dd.cols() {
                m[(i, j)] = dd[(i, j)].clone();
            }
        }
        let fk = f.component(k - 1, c, d);
        for i in 0..fk.rows() {
            for j in 0..fk.cols() {
                m[(i, d.rank(k) + j)] = fk[(i, j)].clone();
            }
        }
        let dc = c.diff(k - 1);
        for i in 0..dc.rows() {
            for j in 0..dc.cols() {
                m[(d.rank(k - 1) + i, d.rank(k) + j)] = -dc[(i, j)].clone();
            }
        }
        if !m.is_zero() {
            cone.diffs.insert(k, m);
        }
    }
    let mut incl = ChainMap::default();
    for (&k, &r) in &d.ranks {
        if r == 0 {
            continue;
        }
        let rows = cone.rank(k);
        let mut m = Matrix::zero(rows, r);
        for i in 0..r {
            m[(i, i)] = BigInt::from(1);
        }
        incl.components.insert(k, m);
    }
    (cone, incl)
}

/// The structure map of a truncated tower: restrict `f` to the truncations.
fn truncated_map(
    f: &ChainMap,
    src_orig: &ChainComplex,
    dst_orig: &ChainComplex,
    src_trunc: &ChainComplex,
    dst_trunc: &ChainComplex,
    src_data: &TruncationData,
    dst_data: &TruncationData,
) -> ChainMap {
    let mut out = ChainMap::default();
    for (&i, &r) in &src_trunc.ranks {
        if r == 0 || dst_trunc.rank(i) == 0 {
            continue;
        }
        // source basis in original coordinates
        let src_basis = if i == src_data.cut {
            src_data.kernel_basis.clone().expect("cut degree has a kernel basis")
        } else {
            Matrix::identity(src_orig.rank(i))
        };
        let mapped = f.component(i, src_orig, dst_orig).mul(&src_basis);
        let m = if i == dst_data.cut {
            let kb = dst_data.kernel_basis.as_ref().expect("cut degree has a kernel basis");
            let mut cols = Vec::new();
            for j in 0..mapped.cols() {
                let w = solve(kb, &mapped.col(j))
                    .expect("truncated structure map lands in the kernel");
                cols.push(w);
            }
            Matrix::from_cols(cols, kb.cols())
        } else {
            mapped
        };
        if !m.is_zero() {
            out.components.insert(i, m);
        }
    }
    out
}

/// Homology of a chain complex in one degree, as a subquotient of the free
/// module in that degree (generators are cycle representatives).
pub fn homology(c: &ChainComplex, x: i64) -> SubQuotient {
    let free = AbGroup::free(c.rank(x));
    let z = hnf(&kernel(&c.diff(x)));
    let b = c.diff(x + 1);
    SubQuotient::new(&free, &z, &b).expect("boundaries are cycles")
}

/// A map of towers: one chain map per level, commuting with the structure
/// maps. Below the declared range the map is the one at the lowest level;
/// above it everything is zero.
#[derive(Clone, Debug, Default)]
pub struct TowerMap {
    pub components: BTreeMap<i64, ChainMap>,
}

impl TowerMap {
    pub fn identity(t: &FilteredComplex) -> TowerMap {
        TowerMap {
            components: (t.n0..=t.n1)
                .map(|n| (n, ChainMap::identity(&t.level(n))))
                .collect(),
        }
    }

    pub fn level_map(&self, n: i64, src: &FilteredComplex, dst: &FilteredComplex) -> ChainMap {
        if let Some(f) = self.components.get(&n) {
            return f.clone();
        }
        if let Some((&lo, f)) = self.components.first_key_value() {
            if n < lo {
                return f.clone();
            }
        }
        let _ = (src, dst);
        ChainMap::zero()
    }

    pub fn validate(&self, src: &FilteredComplex, dst: &FilteredComplex) -> Result<(), FccError> {
        let lo = src.n0.min(dst.n0) - 1;
        let hi = src.n1.max(dst.n1);
        for n in lo..=hi {
            let f = self.level_map(n, src, dst);
            f.validate(&src.level(n), &dst.level(n))?;
        }
        for n in lo..hi {
            // square with the structure maps
            let upper = self.level_map(n + 1, src, dst);
            let lower = self.level_map(n, src, dst);
            let lhs = lower.compose(&src.structure_map(n), &src.level(n + 1), &src.level(n), &dst.level(n));
            let rhs = dst
                .structure_map(n)
                .compose(&upper, &src.level(n + 1), &dst.level(n + 1), &dst.level(n));
            if lhs != rhs {
                return Err(FccError::BadMap(format!(
                    "tower map does not commute with structure maps into level {n}"
                )));
            }
        }
        Ok(())
    }
}

/// Induced map on mapping cones of the structure squares: block diagonal
/// `(f_n, f_{n+1})`.
pub fn cone_map(
    f: &TowerMap,
    src: &FilteredComplex,
    dst: &FilteredComplex,
    n: i64,
) -> (ChainComplex, ChainComplex, ChainMap) {
    let (csrc, _) = mapping_cone(&src.level(n + 1), &src.level(n), &src.structure_map(n));
    let (cdst, _) = mapping_cone(&dst.level(n + 1), &dst.level(n), &dst.structure_map(n));
    let f_n = f.level_map(n, src, dst);
    let f_up = f.level_map(n + 1, src, dst);
    let mut g = ChainMap::zero();
    let degs: std::collections::BTreeSet<i64> =
        csrc.ranks.keys().chain(cdst.ranks.keys()).cloned().collect();
    for &k in &degs {
        let rows = cdst.rank(k);
        let cols = csrc.rank(k);
        if rows == 0 || cols == 0 {
            continue;
        }
        let mut m = Matrix::zero(rows, cols);
        let a = f_n.component(k, &src.level(n), &dst.level(n));
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                m[(i, j)] = a[(i, j)].clone();
            }
        }
        let b = f_up.component(k - 1, &src.level(n + 1), &dst.level(n + 1));
        let (ro, co) = (dst.level(n).rank(k), src.level(n).rank(k));
        for i in 0..b.rows() {
            for j in 0..b.cols() {
                m[(ro + i, co + j)] = b[(i, j)].clone();
            }
        }
        if !m.is_zero() {
            g.components.insert(k, m);
        }
    }
    (csrc, cdst, g)
}

/// Is the induced map on homology an isomorphism in every degree `>= from`?
pub fn homology_iso_from(
    f: &ChainMap,
    src: &ChainComplex,
    dst: &ChainComplex,
    from: i64,
) -> bool {
    let lo = from;
    let hi = src
        .max_degree()
        .unwrap_or(lo - 1)
        .max(dst.max_degree().unwrap_or(lo - 1))
        + 1;
    for x in lo..=hi {
        let hs = homology(src, x);
        let hd = homology(dst, x);
        let m = induced_on_homology(f, src, dst, x, &hs, &hd);
        let hom = match crate::abgroup::Hom::new(&hs.group, &hd.group, m) {
            Ok(h) => h,
            Err(_) => return false,
        };
        let pat = crate::abgroup::hom_pattern(&hs.group, &hd.group, &hom);
        if !pat.kernel.is_zero() || !pat.cokernel.is_zero() {
            return false;
        }
    }
    true
}

/// The sufficient criterion for a map to induce an equivalence of linear
/// connective covers: a tau-inverted equivalence on the eventually constant
/// range plus an associated-graded cover comparison. When the criterion
/// holds, the levelwise cover formula is verified directly as well, and a
/// discrepancy is a hard error.
pub fn criterion_5_10(
    f: &TowerMap,
    src: &FilteredComplex,
    dst: &FilteredComplex,
    line: &crate::grading::Line,
) -> Result<bool, FccError> {
    f.validate(src, dst)?;
    let lo = src.n0.min(dst.n0) - 1;
    let hi = src.n1.max(dst.n1);
    let deg_lo = src.min_chain_degree().min(dst.min_chain_degree()) - 1;

    // condition (1): a quasi-isomorphism on the constant range (Remark 5.11
    // reduction: eventual constancy plus tau-inverted equivalence)
    let const_ok = homology_iso_from(
        &f.level_map(lo, src, dst),
        &src.level(lo),
        &dst.level(lo),
        deg_lo,
    );

    // condition (2): associated-graded cover comparison: homology iso in
    // degrees >= threshold(n) on each cone
    let mut gr_ok = true;
    for n in lo..=hi {
        let (cs, cd, g) = cone_map(f, src, dst, n);
        if !homology_iso_from(&g, &cs, &cd, line.cover_threshold(n)) {
            gr_ok = false;
            break;
        }
    }

    let holds = const_ok && gr_ok;
    if holds {
        // the conclusion, checked directly: levelwise truncation equivalence
        for n in lo..=hi {
            let ok = homology_iso_from(
                &f.level_map(n, src, dst),
                &src.level(n),
                &dst.level(n),
                line.cover_threshold(n),
            );
            if !ok {
                return Err(FccError::Other(format!(
                    "criterion held but the cover comparison fails at level {n}; input data is inconsistent"
                )));
            }
        }
    }
    Ok(holds)
}

/// Matrix of the map induced on homology by a chain map.
pub fn induced_on_homology(
    f: &ChainMap,
    src: &ChainComplex,
    dst: &ChainComplex,
    x: i64,
    hs: &SubQuotient,
    hd: &SubQuotient,
) -> Matrix {
    let comp = f.component(x, src, dst);
    let mut cols = Vec::new();
    for j in 0..hs.basis.cols() {
        let v = comp.mul_vec(&hs.basis.col(j));
        let w = hd.project(&v).expect("chain maps send cycles to cycles");
        cols.push(w);
    }
    Matrix::from_cols(cols, hd.basis.cols())
}

/// Cached exact-couple data for one tower.
pub struct TowerAnalysis<'a> {
    pub tower: &'a FilteredComplex,
    d_cache: std::cell::RefCell<BTreeMap<(i64, i64), SubQuotient>>,
    e_cache: std::cell::RefCell<BTreeMap<(i64, i64), ConeData>>,
}

#[derive(Clone)]
struct ConeData {
    homology: SubQuotient,
    /// j: D(x, n) -> E(x, n) on homology generators
    j_mat: Matrix,
    /// delta: E(x, n) -> D(x-1, n+1) on homology generators
    k_mat: Matrix,
}

impl<'a> TowerAnalysis<'a> {
    pub fn new(tower: &'a FilteredComplex) -> Self {
        TowerAnalysis {
            tower,
            d_cache: Default::default(),
            e_cache: Default::default(),
        }
    }

    fn clamp(&self, n: i64) -> Option<i64> {
        if n > self.tower.n1 {
            None
        } else {
            Some(n.max(self.tower.n0))
        }
    }

    /// `D(x, n) = H_x(X^n)` with conventions.
    pub fn d_group(&self, x: i64, n: i64) -> SubQuotient {
        match self.clamp(n) {
            None => SubQuotient::new(&AbGroup::zero(), &Matrix::zero(0, 0), &Matrix::zero(0, 0)).unwrap(),
            Some(m) => {
                if let Some(h) = self.d_cache.borrow().get(&(x, m)) {
                    return h.clone();
                }
                let h = homology(&self.tower.level(m), x);
                self.d_cache.borrow_mut().insert((x, m), h.clone());
                h
            }
        }
    }

    /// One tau step `D(x, n+1) -> D(x, n)`.
    pub fn i_step(&self, x: i64, n: i64) -> Matrix {
        let hs = self.d_group(x, n + 1);
        let hd = self.d_group(x, n);
        match (self.clamp(n + 1), self.clamp(n)) {
            (None, _) => Matrix::zero(hd.basis.cols(), 0),
            (Some(_), None) => unreachable!("levels above are zero only"),
            (Some(a), Some(b)) if a == b => {
                // constant zone: identical presentations, identity map
                Matrix::identity(hd.basis.cols())
            }
            (Some(a), Some(b)) => {
                debug_assert_eq!(a, b + 1);
                let f = self.tower.structure_map(b);
                induced_on_homology(&f, &self.tower.level(a), &self.tower.level(b), x, &hs, &hd)
            }
        }
    }

    /// Composite `D(x, n+k) -> D(x, n)`.
    pub fn i_power(&self, x: i64, n: i64, k: i64) -> Matrix {
        assert!(k >= 0);
        let mut m = Matrix::identity(self.d_group(x, n).basis.cols());
        for t in 0..k {
            m = m.mul(&self.i_step(x, n + t));
        }
        m
    }

    fn cone_data(&self, x: i64, n: i64) -> ConeData {
        if let Some(c) = self.e_cache.borrow().get(&(x, n)) {
            return c.clone();
        }
        let t = self.tower;
        let (cone, incl) = if n < t.n0 || n > t.n1 {
            (ChainComplex::zero(), ChainMap::zero())
        } else {
            mapping_cone(&t.level(n + 1), &t.level(n), &t.structure_map(n))
        };
        let h = homology(&cone, x);
        let dx = self.d_group(x, n);
        let j_mat = if n < t.n0 || n > t.n1 {
            Matrix::zero(h.basis.cols(), dx.basis.cols())
        } else {
            induced_on_homology(&incl, &t.level(n), &cone, x, &dx, &h)
        };
        // delta: second block of each cycle representative is a cycle of
        // X^{n+1} in degree x-1
        let dnext = self.d_group(x - 1, n + 1);
        let k_mat = if n < t.n0 || n > t.n1 {
            Matrix::zero(dnext.basis.cols(), h.basis.cols())
        } else {
            let top = t.level(n);
            let up = t.level(n + 1);
            let mut cols = Vec::new();
            for jcol in 0..h.basis.cols() {
                let v = h.basis.col(jcol);
                // split: first top.rank(x) coordinates, then up.rank(x-1)
                let second: Vec<BigInt> = v[top.rank(x)..].to_vec();
                debug_assert_eq!(second.len(), up.rank(x - 1));
                let w = dnext.project(&second).expect("cone cycles project to cycles upstairs");
                cols.push(w);
            }
            Matrix::from_cols(cols, dnext.basis.cols())
        };
        let data = ConeData { homology: h, j_mat, k_mat };
        self.e_cache.borrow_mut().insert((x, n), data.clone());
        data
    }

    /// `E2(x, y) = H_x(gr^{x+y})` as a presented group.
    pub fn e2_group(&self, d: Degree) -> AbGroup {
        self.cone_data(d.x, d.x + d.y).homology.group.clone()
    }

    /// The homotopy chart of the tower over the window.
    pub fn homotopy_chart(&self, window: Window) -> TauChart {
        let mut chart = TauChart {
            window: Some(window),
            stable_below_level: Some(self.tower.n0),
            stable_above_level: Some(self.tower.n1 + 1),
            ..Default::default()
        };
        for d in window.degrees() {
            let h = self.d_group(d.x, d.x + d.y);
            if !h.group.is_trivial() {
                let gens = (0..h.group.num_gens())
                    .map(|i| GenInfo::plain(format!("h{}_{}_{}", d.x, d.y, i)))
                    .collect();
                chart
                    .entries
                    .insert(d, Entry { gens, group: h.group.clone() });
            }
        }
        for d in window.degrees() {
            let up = Degree::new(d.x, d.y + 1);
            if !window.contains(up) {
                continue;
            }
            // maps touching trivial groups are zero maps; storing their raw
            // matrices would clash with the dropped presentations
            if !chart.entries.contains_key(&d) || !chart.entries.contains_key(&up) {
                continue;
            }
            let m = self.i_step(d.x, d.x + d.y);
            if !m.is_zero() {
                chart.tau.insert(d, m);
            }
        }
        chart
    }

    /// The full couple data of the tower over a window: homotopy groups,
    /// tau-maps, associated-graded groups, projections and boundaries.
    pub fn couple_data(&self, window: Window, max_page: i64) -> CoupleData {
        let chart = self.homotopy_chart(window);
        let mut c = CoupleData {
            window: Some(window),
            pi: chart.entries,
            tau: chart.tau,
            stable_below_level: chart.stable_below_level,
            stable_above_level: chart.stable_above_level,
            window_complete: self.window_covers_everything(&window),
            max_page,
            no_more_differentials: max_page >= self.tower.n1 - self.tower.n0 + 1,
            ..Default::default()
        };
        for d in window.degrees() {
            let cd = self.cone_data(d.x, d.x + d.y);
            if !cd.homology.group.is_trivial() {
                let gens = (0..cd.homology.group.num_gens())
                    .map(|i| GenInfo::plain(format!("e{}_{}_{}", d.x, d.y, i)))
                    .collect();
                c.e2.insert(d, Entry { gens, group: cd.homology.group.clone() });
            } else {
                continue; // proj and bnd into or out of a trivial group are zero
            }
            if c.pi.contains_key(&d) && !cd.j_mat.is_zero() {
                c.proj.insert(d, cd.j_mat.clone());
            }
            let bnd_tgt = Degree::new(d.x - 1, d.y + 2);
            if c.pi.contains_key(&bnd_tgt) && !cd.k_mat.is_zero() {
                c.bnd.insert(d, cd.k_mat.clone());
            }
        }
        c
    }

    /// tau-Bockstein pages over the window, through page `max_page`, with
    /// differentials emitted in canonical page coordinates.
    pub fn bss_pages(&self, window: Window, max_page: i64) -> Result<BssPages, FccError> {
        assert!(max_page >= 2);
        let c = self.couple_data(window, max_page);
        crate::couple::pages_from_couple(&c, max_page).map_err(FccError::Other)
    }

    fn window_covers_everything(&self, w: &Window) -> bool {
        let nat = self.tower.natural_window(0);
        w.x0 <= nat.x0 && w.x1 >= nat.x1 && w.y0 <= nat.y0 && w.y1 >= nat.y1
    }
}

/// Convenience: chart plus pages of a tower over its natural window.
pub fn chart_and_pages(
    tower: &FilteredComplex,
    window: Window,
    max_page: i64,
) -> Result<(TauChart, BssPages), FccError> {
    let ta = TowerAnalysis::new(tower);
    let chart = ta.homotopy_chart(window);
    let pages = ta.bss_pages(window, max_page)?;
    Ok((chart, pages))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abgroup::Invariants;
    use num_traits::Signed;

    #[test]
    fn constant_tower_chart() {
        // constant Z[0] at levels <= 0
        let t = FilteredComplex::yoneda(0);
        t.validate().unwrap();
        let w = t.natural_window(1);
        let ta = TowerAnalysis::new(&t);
        let chart = ta.homotopy_chart(w);
        for y in w.y0..=0 {
            assert_eq!(chart.group_at(Degree::new(0, y)).invariants(), Invariants::free(1));
        }
        assert!(chart.group_at(Degree::new(0, 1)).is_trivial());
        // tau iso below 0
        let tau = chart.tau_at(Degree::new(0, -1));
        assert_eq!(tau, Matrix::identity(1));
    }

    #[test]
    fn single_level_torsion() {
        // one level containing Z --2--> Z in degrees 1, 0
        let c = ChainComplex::two_term(1, 2);
        let t = FilteredComplex { n0: 0, n1: 0, levels: vec![c], maps: vec![] };
        t.validate().unwrap();
        let ta = TowerAnalysis::new(&t);
        let h0 = ta.d_group(0, 0);
        assert_eq!(h0.group.invariants().torsion, vec![BigInt::from(2)]);
        // below level 0 the tower is constant: same torsion
        let h0b = ta.d_group(0, -3);
        assert_eq!(h0b.group.invariants().torsion, vec![BigInt::from(2)]);
    }

    #[test]
    fn gr_of_towers() {
        let t = FilteredComplex::yoneda(5);
        // gr = Z[0] at level 5 only
        let ta = TowerAnalysis::new(&t);
        assert_eq!(
            ta.e2_group(Degree::new(0, 5)).invariants(),
            Invariants::free(1)
        );
        for n in 0..5 {
            assert!(ta.e2_group(Degree::new(0, n)).is_trivial());
        }
        // constant tower: gr = 0 at interior levels
        let c = FilteredComplex::constant(ChainComplex::concentrated(0, 1), -2, 3);
        let ca = TowerAnalysis::new(&c);
        for n in -2..3 {
            assert!(ca.e2_group(Degree::new(0, n)).is_trivial(), "level {n}");
        }
        // top level survives
        assert_eq!(ca.e2_group(Degree::new(0, 3)).invariants(), Invariants::free(1));
    }

    #[test]
    fn two_level_mod2_tower_pages() {
        // X^1 = Z[0] --2--> X^0 = (Z -2-> Z)[1,0]; constant below; the
        // colimit is Z/2 and the extension shows as a d2 of index 2.
        let top = ChainComplex::concentrated(0, 1);
        let bottom = ChainComplex::two_term(1, 2);
        let mut f = ChainMap::default();
        f.components.insert(0, Matrix::identity(1));
        let t = FilteredComplex { n0: 0, n1: 1, levels: vec![bottom, top], maps: vec![f] };
        t.validate().unwrap();
        let w = t.natural_window(1);
        let ta = TowerAnalysis::new(&t);
        let pages = ta.bss_pages(w, 3).unwrap();
        // E2: Z at (0,1) [gr^1] and Z at (1,-1) [H_1 gr^0]
        assert_eq!(pages.e2_group(Degree::new(0, 1)).invariants(), Invariants::free(1));
        assert_eq!(pages.e2_group(Degree::new(1, -1)).invariants(), Invariants::free(1));
        // d2 from (1,-1) to (0,1) with image of index 2
        let d = pages.diffs.get(&(2, Degree::new(1, -1))).expect("d2 exists");
        assert_eq!(d.rows(), 1);
        assert_eq!(d.cols(), 1);
        assert_eq!(d[(0, 0)].abs(), BigInt::from(2));
        // E3 = E_infty: Z/2 at (0,1), 0 at (1,-1)
        let tower = crate::chart::PageTower::run(&pages, 3).unwrap();
        assert_eq!(
            tower.group(3, Degree::new(0, 1)).invariants().torsion,
            vec![BigInt::from(2)]
        );
        assert!(tower.group(3, Degree::new(1, -1)).is_trivial());
        // tau-torsion of height 1: tau(2b) = 0 for b the generator of pi_{0,1}
        let chart = ta.homotopy_chart(w);
        let tau = chart.tau_at(Degree::new(0, 0));
        let v = tau.mul_vec(&[BigInt::from(2)]);
        assert!(chart.group_at(Degree::new(0, 0)).is_zero_elt(&v));
        let v1 = tau.mul_vec(&[BigInt::from(1)]);
        assert!(!chart.group_at(Degree::new(0, 0)).is_zero_elt(&v1));
    }

    #[test]
    fn constant_tower_no_differentials() {
        let c = FilteredComplex::constant(ChainComplex::two_term(3, 6), -2, 2);
        let ta = TowerAnalysis::new(&c);
        let pages = ta.bss_pages(c.natural_window(1), 5).unwrap();
        assert!(pages.diffs.is_empty());
    }

    #[test]
    fn direct_sum_additivity_of_pages() {
        let top = ChainComplex::concentrated(0, 1);
        let bottom = ChainComplex::two_term(1, 2);
        let mut f = ChainMap::default();
        f.components.insert(0, Matrix::identity(1));
        let t = FilteredComplex { n0: 0, n1: 1, levels: vec![bottom, top], maps: vec![f] };
        // direct sum with a shifted copy
        let t2 = t.shift(2, 0);
        let sum = FilteredComplex {
            n0: t.n0.min(t2.n0),
            n1: t.n1.max(t2.n1),
            levels: (t.n0.min(t2.n0)..=t.n1.max(t2.n1))
                .map(|n| t.level(n).direct_sum(&t2.level(n)))
                .collect(),
            maps: (t.n0.min(t2.n0)..t.n1.max(t2.n1))
                .map(|n| {
                    let mut m = ChainMap::default();
                    let s1 = t.structure_map(n);
                    let s2 = t2.structure_map(n);
                    let src = t.level(n + 1).direct_sum(&t2.level(n + 1));
                    let dst = t.level(n).direct_sum(&t2.level(n));
                    for (&i, _) in src.ranks.iter() {
                        let a = s1.component(i, &t.level(n + 1), &t.level(n));
                        let b = s2.component(i, &t2.level(n + 1), &t2.level(n));
                        let mut mm = Matrix::zero(dst.rank(i), src.rank(i));
                        for r in 0..a.rows() {
                            for c in 0..a.cols() {
                                mm[(r, c)] = a[(r, c)].clone();
                            }
                        }
                        for r in 0..b.rows() {
                            for c in 0..b.cols() {
                                mm[(r + a.rows(), c + a.cols())] = b[(r, c)].clone();
                            }
                        }
                        if !mm.is_zero() {
                            m.components.insert(i, mm);
                        }
                    }
                    m
                })
                .collect(),
        };
        sum.validate().unwrap();
        let w = sum.natural_window(1);
        let pa = TowerAnalysis::new(&sum).bss_pages(w, 3).unwrap();
        let p1 = TowerAnalysis::new(&t).bss_pages(w, 3).unwrap();
        let p2 = TowerAnalysis::new(&t2).bss_pages(w, 3).unwrap();
        for d in w.degrees() {
            let got = pa.e2_group(d).invariants();
            let a = p1.e2_group(d).invariants();
            let b = p2.e2_group(d).invariants();
            assert_eq!(got.rank, a.rank + b.rank, "at {d}");
            assert_eq!(got.torsion_order(), a.torsion_order() * b.torsion_order(), "at {d}");
        }
        // pagewise: d2 present at both shifted sources
        assert!(pa.diffs.contains_key(&(2, Degree::new(1, -1))));
        assert!(pa.diffs.contains_key(&(2, Degree::new(3, -1))));
    }

    #[test]
    fn dilation_rules() {
        // D^1 = id
        let t = FilteredComplex::yoneda(3);
        let d1 = t.dilate(1);
        assert_eq!(d1.n0, t.n0);
        assert_eq!(d1.level(3), t.level(3));
        // D^2 Y(k) = Y(2k)
        for k in [-3i64, 0, 2, 5] {
            let y = FilteredComplex::yoneda(k);
            let d2 = y.dilate(2);
            let y2 = FilteredComplex::yoneda(2 * k);
            for m in (2 * k - 3)..=(2 * k + 3) {
                assert_eq!(d2.level(m).is_zero(), y2.level(m).is_zero(), "k={k} m={m}");
            }
        }
    }

    #[test]
    fn shift_recenters_pi() {
        let top = ChainComplex::concentrated(0, 1);
        let bottom = ChainComplex::two_term(1, 2);
        let mut f = ChainMap::default();
        f.components.insert(0, Matrix::identity(1));
        let t = FilteredComplex { n0: 0, n1: 1, levels: vec![bottom, top], maps: vec![f] };
        let (a, s) = (2i64, -1i64);
        let sh = t.shift(a, s);
        sh.validate().unwrap();
        let w = t.natural_window(1);
        let ta = TowerAnalysis::new(&t);
        let sa = TowerAnalysis::new(&sh);
        for d in w.degrees() {
            let orig = ta.d_group(d.x, d.x + d.y).group.invariants();
            let moved = sa.d_group(d.x + a, d.x + a + d.y + s).group.invariants();
            assert_eq!(orig, moved, "at {d}");
        }
    }

    #[test]
    fn eventually_constant_bounds() {
        let c = FilteredComplex::constant(ChainComplex::concentrated(0, 1), -1, 4);
        assert_eq!(c.eventually_constant_bound(), -4);
        let y = FilteredComplex::yoneda(2);
        assert_eq!(y.eventually_constant_bound(), -2);
    }

    #[test]
    fn smart_truncation_preserves_high_homology() {
        let c = ChainComplex::two_term(1, 2); // H0 = Z/2, H1 = 0
        let (t0, _) = c.smart_truncate(0);
        t0.validate().unwrap();
        assert_eq!(homology(&t0, 0).group.invariants().torsion, vec![BigInt::from(2)]);
        let (t1, _) = c.smart_truncate(1);
        t1.validate().unwrap();
        // tau_{>=1} of a complex with homology only in degree 0 is trivial
        assert!(homology(&t1, 1).group.is_trivial());
        assert!(homology(&t1, 0).group.is_trivial());
    }

    #[test]
    fn linear_cover_alpha_zero_on_constant_tower() {
        // alpha = 0 on a constant tower: level n is tau_{>= n} C
        let c = ChainComplex::two_term(1, 2); // H0 = Z/2
        let t = FilteredComplex::constant(c.clone(), 0, 2);
        let line = Line::new(0, 1).unwrap();
        let cov = t.linear_cover(&line);
        cov.validate().unwrap();
        // level 0: tau_{>=0}: H0 = Z/2; level 1: tau_{>=1}: trivial homology
        assert_eq!(
            homology(&cov.level(0), 0).group.invariants().torsion,
            vec![BigInt::from(2)]
        );
        assert!(homology(&cov.level(1), 0).group.is_trivial());
        assert!(homology(&cov.level(1), 1).group.is_trivial());
    }

    #[test]
    fn criterion_examples() {
        // equality of towers: criterion holds
        let t = FilteredComplex::constant(ChainComplex::two_term(1, 2), 0, 2);
        let line = Line::new(0, 1).unwrap();
        let id = TowerMap::identity(&t);
        assert!(criterion_5_10(&id, &t, &t, &line).unwrap());

        // sufficiency only: a non-equivalence whose covers agree anyway
        // (thresholds above the homology kill everything on both sides)
        let c = ChainComplex::concentrated(0, 1);
        let x = FilteredComplex::constant(c.clone(), 3, 4);
        let mut double = ChainMap::default();
        double.components.insert(0, Matrix::from_i64(&[&[2]]));
        let f = TowerMap {
            components: (3..=4).map(|n| (n, double.clone())).collect(),
        };
        assert!(!criterion_5_10(&f, &x, &x, &line).unwrap());
        // yet the directly computed covers agree (source and target are the
        // same tower), so the criterion is sufficient, not necessary
        let cov_src = x.linear_cover(&line);
        let cov_dst = x.linear_cover(&line);
        for n in cov_src.n0..=cov_src.n1 {
            assert_eq!(cov_src.level(n), cov_dst.level(n));
        }
    }

    #[test]
    fn cover_pi_characterization() {
        // cover has pi = 0 above the line and iso below (Prop 5.2 shape)
        let top = ChainComplex::concentrated(0, 1);
        let bottom = ChainComplex::two_term(1, 2);
        let mut f = ChainMap::default();
        f.components.insert(0, Matrix::identity(1));
        let t = FilteredComplex { n0: 0, n1: 1, levels: vec![bottom, top], maps: vec![f] };
        for line in [Line::new(0, 1).unwrap(), Line::new(1, 2).unwrap(), Line::new(1, 1).unwrap()] {
            let cov = t.linear_cover(&line);
            cov.validate().unwrap();
            let w = t.natural_window(2);
            let ta = TowerAnalysis::new(&t);
            let ca = TowerAnalysis::new(&cov);
            for d in w.degrees() {
                let below = line.on_or_below(d);
                let covi = ca.d_group(d.x, d.x + d.y).group.invariants();
                if below {
                    let orig = ta.d_group(d.x, d.x + d.y).group.invariants();
                    assert_eq!(covi, orig, "line {line} at {d}");
                } else {
                    assert!(covi.is_zero(), "line {line} at {d}");
                }
            }
        }
    }
}
