//! Bidegrees, linear t-structure lines, and representation-ring tables for
//! cyclic 2-groups. All comparisons are exact integer arithmetic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A bidegree `(x, y)`: stem and filtration. Multiplication by tau maps
/// `(x, y+1)` to `(x, y)`; a `d_r` maps `(x, y)` to `(x-1, y+r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Degree {
    pub x: i64,
    pub y: i64,
}

impl Degree {
    pub fn new(x: i64, y: i64) -> Self {
        Degree { x, y }
    }

    /// Target of a `d_r` differential leaving this degree.
    pub fn d_target(&self, r: i64) -> Degree {
        Degree { x: self.x - 1, y: self.y + r }
    }
}

impl std::fmt::Display for Degree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GradingError {
    #[error("slope must be a rational p/q with q > 0 and p/q > -1, got {0}/{1}")]
    BadSlope(i64, i64),
    #[error("cannot parse line slope from {0:?}: expected P/Q or an integer")]
    SlopeParse(String),
    #[error("subgroup {0:?} is not in the chain of this group")]
    UnknownSubgroup(String),
    #[error("virtual representations live over different ambient subgroups: {0:?} vs {1:?}")]
    AmbientMismatch(String, String),
    #[error("multiplicity vector has length {got}, expected {want}")]
    BadMultiplicities { got: usize, want: usize },
    #[error("group data is inconsistent: {0}")]
    BadGroupData(String),
}

/// The line `y = (p/q) x` with `q > 0` and `p/q > -1`, defining a linear
/// t-structure on charts of filtered spectra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Line {
    p: i64,
    q: i64,
}

impl Line {
    pub fn new(p: i64, q: i64) -> Result<Line, GradingError> {
        if q <= 0 || p <= -q {
            return Err(GradingError::BadSlope(p, q));
        }
        let g = p.gcd(&q);
        if g > 1 {
            Ok(Line { p: p / g, q: q / g })
        } else {
            Ok(Line { p, q })
        }
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    /// Parse "P/Q" or "N".
    pub fn parse(s: &str) -> Result<Line, GradingError> {
        let s = s.trim();
        let mk_err = || GradingError::SlopeParse(s.to_string());
        if let Some((a, b)) = s.split_once('/') {
            let p: i64 = a.trim().parse().map_err(|_| mk_err())?;
            let q: i64 = b.trim().parse().map_err(|_| mk_err())?;
            if q == 0 {
                return Err(mk_err());
            }
            let (p, q) = if q < 0 { (-p, -q) } else { (p, q) };
            Line::new(p, q)
        } else {
            let p: i64 = s.parse().map_err(|_| mk_err())?;
            Line::new(p, 1)
        }
    }

    /// Is the degree on or below the line, i.e. `y <= alpha * x`?
    pub fn on_or_below(&self, d: Degree) -> bool {
        let lhs = BigInt::from(d.y) * BigInt::from(self.q);
        let rhs = BigInt::from(self.p) * BigInt::from(d.x);
        lhs <= rhs
    }

    /// Mathematical floor of `alpha * x` (toward minus infinity).
    pub fn floor_alpha_x(&self, x: i64) -> i64 {
        let num = BigInt::from(self.p) * BigInt::from(x);
        let den = BigInt::from(self.q);
        let f = num.div_floor(&den);
        bigint_to_i64(&f)
    }

    /// The cover threshold `ceil(n / (alpha + 1)) = ceil(n q / (p + q))`.
    /// Monotone nondecreasing in `n`.
    pub fn cover_threshold(&self, n: i64) -> i64 {
        let num = BigInt::from(n) * BigInt::from(self.q);
        let den = BigInt::from(self.p) + BigInt::from(self.q);
        let c = num.div_ceil(&den);
        bigint_to_i64(&c)
    }

    /// Is a (nonzero) `d_r` leaving `source` line-crossing: source on or
    /// below the line and target strictly above it?
    pub fn is_line_crossing(&self, source: Degree, r: i64) -> bool {
        debug_assert!(r >= 2);
        if !self.on_or_below(source) {
            return false;
        }
        // y + r > alpha (x - 1)
        let lhs = BigInt::from(source.y + r) * BigInt::from(self.q);
        let rhs = BigInt::from(self.p) * BigInt::from(source.x - 1);
        lhs > rhs
    }
}

impl std::fmt::Display for Line {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.q == 1 {
            write!(f, "y = {}x", self.p)
        } else {
            write!(f, "y = ({}/{})x", self.p, self.q)
        }
    }
}

fn bigint_to_i64(x: &BigInt) -> i64 {
    use num_traits::ToPrimitive;
    x.to_i64().expect("grading arithmetic exceeded i64 range")
}

// ---------------------------------------------------------------------------
// Representation-theoretic tables for cyclic 2-groups
// ---------------------------------------------------------------------------

/// Scalar flavor of the representation ring in a table: real (RO) or the
/// complex stub mirroring the RU variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RingFlavor {
    Real,
    Complex,
}

/// One subgroup in the cyclic chain `e ⊂ C_2 ⊂ ... ⊂ C_{2^n}` together with
/// its irreducible table.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubgroupData {
    pub name: String,
    pub order: u64,
    pub irreducibles: Vec<Irreducible>,
    /// For each irreducible of this subgroup and each subgroup `K` of the
    /// chain up to here, the dimension of the `K`-fixed points.
    pub fixed_dims: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Irreducible {
    pub name: String,
    pub dim: i64,
}

/// Representation tables for one cyclic 2-group: the subgroup chain, and for
/// each adjacent pair restriction and induction matrices on multiplicity
/// vectors.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupData {
    pub flavor: RingFlavor,
    /// Chain from the trivial subgroup up to the whole group.
    pub subgroups: Vec<SubgroupData>,
    /// `restriction[k]`: multiplicity matrix of Res from subgroups[k+1] to
    /// subgroups[k] (rows indexed by irreducibles of the smaller group).
    #[serde(with = "mat_list")]
    pub restriction: Vec<crate::matrix::Matrix>,
    /// `induction[k]`: multiplicity matrix of Ind from subgroups[k] to
    /// subgroups[k+1].
    #[serde(with = "mat_list")]
    pub induction: Vec<crate::matrix::Matrix>,
}

mod mat_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(ms: &[crate::matrix::Matrix], s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct W<'a>(#[serde(with = "crate::jsonnum::mat")] &'a crate::matrix::Matrix);
        ms.iter().map(W).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<crate::matrix::Matrix>, D::Error> {
        #[derive(Deserialize)]
        struct W(#[serde(with = "crate::jsonnum::mat")] crate::matrix::Matrix);
        Ok(Vec::<W>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}

impl GroupData {
    pub fn subgroup_index(&self, name: &str) -> Result<usize, GradingError> {
        self.subgroups
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| GradingError::UnknownSubgroup(name.to_string()))
    }

    pub fn top(&self) -> &SubgroupData {
        self.subgroups.last().expect("nonempty chain")
    }

    /// Validates dimension additivity and the Frobenius fixed-point check
    /// `|(Ind_H^G V)^G| = |V^H|` along the whole chain.
    pub fn validate(&self) -> Result<(), GradingError> {
        let n = self.subgroups.len();
        if n == 0 {
            return Err(GradingError::BadGroupData("empty subgroup chain".into()));
        }
        if self.restriction.len() != n - 1 || self.induction.len() != n - 1 {
            return Err(GradingError::BadGroupData(
                "need one restriction and one induction matrix per adjacent pair".into(),
            ));
        }
        for (k, sub) in self.subgroups.iter().enumerate() {
            if sub.fixed_dims.len() != sub.irreducibles.len() {
                return Err(GradingError::BadGroupData(format!(
                    "fixed_dims of {} must have one row per irreducible",
                    sub.name
                )));
            }
            for row in &sub.fixed_dims {
                if row.len() != k + 1 {
                    return Err(GradingError::BadGroupData(format!(
                        "fixed_dims rows of {} must cover the chain below it",
                        sub.name
                    )));
                }
            }
            // V^e = dim V
            for (v, row) in sub.irreducibles.iter().zip(&sub.fixed_dims) {
                if row[0] != v.dim {
                    return Err(GradingError::BadGroupData(format!(
                        "fixed points of {} under the trivial subgroup must have full dimension",
                        v.name
                    )));
                }
            }
        }
        for k in 0..n - 1 {
            let small = &self.subgroups[k];
            let big = &self.subgroups[k + 1];
            let index = (big.order / small.order) as i64;
            let ind = &self.induction[k];
            let res = &self.restriction[k];
            if ind.rows() != big.irreducibles.len() || ind.cols() != small.irreducibles.len() {
                return Err(GradingError::BadGroupData("induction matrix shape".into()));
            }
            if res.rows() != small.irreducibles.len() || res.cols() != big.irreducibles.len() {
                return Err(GradingError::BadGroupData("restriction matrix shape".into()));
            }
            for (j, v) in small.irreducibles.iter().enumerate() {
                // |Ind V| = |G/H| |V|
                let mut dim = BigInt::zero();
                for (i, w) in big.irreducibles.iter().enumerate() {
                    dim += &ind[(i, j)] * BigInt::from(w.dim);
                }
                if dim != BigInt::from(index * v.dim) {
                    return Err(GradingError::BadGroupData(format!(
                        "dimension of Ind({}) from {} to {} is not |G/H| |V|",
                        v.name, small.name, big.name
                    )));
                }
                // Frobenius: |(Ind V)^G| = |V^H|
                let mut fixed = BigInt::zero();
                for (i, w) in big.irreducibles.iter().enumerate() {
                    fixed += &ind[(i, j)] * BigInt::from(self.fixed_dim_of_irreducible(k + 1, i, k + 1));
                    let _ = w;
                }
                if fixed != BigInt::from(self.fixed_dim_of_irreducible(k, j, k)) {
                    return Err(GradingError::BadGroupData(format!(
                        "Frobenius check failed for {} from {} to {}",
                        v.name, small.name, big.name
                    )));
                }
            }
            for (j, w) in big.irreducibles.iter().enumerate() {
                // |Res V| = |V|
                let mut dim = BigInt::zero();
                for (i, v) in small.irreducibles.iter().enumerate() {
                    dim += &res[(i, j)] * BigInt::from(v.dim);
                }
                if dim != BigInt::from(w.dim) {
                    return Err(GradingError::BadGroupData(format!(
                        "dimension of Res({}) from {} to {} changed",
                        w.name, big.name, small.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Fixed-point dimension of the `i`-th irreducible of `subgroups[level]`
    /// under `subgroups[k]` (`k <= level`).
    fn fixed_dim_of_irreducible(&self, level: usize, i: usize, k: usize) -> i64 {
        self.subgroups[level].fixed_dims[i][k]
    }
}

/// An element of the representation ring of one subgroup in the chain:
/// integer multiplicities per irreducible, possibly negative (virtual).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualRep {
    pub ambient: String,
    #[serde(with = "crate::jsonnum::vec")]
    pub mults: Vec<BigInt>,
}

impl VirtualRep {
    pub fn new(group: &GroupData, ambient: &str, mults: Vec<BigInt>) -> Result<Self, GradingError> {
        let k = group.subgroup_index(ambient)?;
        let want = group.subgroups[k].irreducibles.len();
        if mults.len() != want {
            return Err(GradingError::BadMultiplicities { got: mults.len(), want });
        }
        Ok(VirtualRep { ambient: ambient.to_string(), mults })
    }

    pub fn zero(group: &GroupData, ambient: &str) -> Result<Self, GradingError> {
        let k = group.subgroup_index(ambient)?;
        let n = group.subgroups[k].irreducibles.len();
        VirtualRep::new(group, ambient, vec![BigInt::zero(); n])
    }
}

/// Outcome of a componentwise poset comparison in RO(H).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoOrder {
    Equal,
    LessOrEqual,
    GreaterOrEqual,
    Incomparable,
}

pub fn ro_compare(group: &GroupData, v: &VirtualRep, w: &VirtualRep) -> Result<RoOrder, GradingError> {
    if v.ambient != w.ambient {
        return Err(GradingError::AmbientMismatch(v.ambient.clone(), w.ambient.clone()));
    }
    let _ = group.subgroup_index(&v.ambient)?;
    let mut le = true;
    let mut ge = true;
    for (a, b) in v.mults.iter().zip(&w.mults) {
        if a > b {
            le = false;
        }
        if a < b {
            ge = false;
        }
    }
    Ok(match (le, ge) {
        (true, true) => RoOrder::Equal,
        (true, false) => RoOrder::LessOrEqual,
        (false, true) => RoOrder::GreaterOrEqual,
        (false, false) => RoOrder::Incomparable,
    })
}

/// Total real (or complex, for the RU stub) dimension of a virtual rep.
pub fn dim(group: &GroupData, v: &VirtualRep) -> Result<BigInt, GradingError> {
    let k = group.subgroup_index(&v.ambient)?;
    let mut d = BigInt::zero();
    for (m, irr) in v.mults.iter().zip(&group.subgroups[k].irreducibles) {
        d += m * BigInt::from(irr.dim);
    }
    Ok(d)
}

/// Restriction along one or more steps down the chain.
pub fn res(group: &GroupData, v: &VirtualRep, to: &str) -> Result<VirtualRep, GradingError> {
    let from = group.subgroup_index(&v.ambient)?;
    let target = group.subgroup_index(to)?;
    if target > from {
        return Err(GradingError::BadGroupData(format!(
            "cannot restrict from {} to the larger subgroup {}",
            v.ambient, to
        )));
    }
    let mut mults = v.mults.clone();
    for k in (target..from).rev() {
        mults = group.restriction[k].mul_vec(&mults);
    }
    VirtualRep::new(group, to, mults)
}

/// Induction along one or more steps up the chain.
pub fn ind(group: &GroupData, v: &VirtualRep, to: &str) -> Result<VirtualRep, GradingError> {
    let from = group.subgroup_index(&v.ambient)?;
    let target = group.subgroup_index(to)?;
    if target < from {
        return Err(GradingError::BadGroupData(format!(
            "cannot induct from {} to the smaller subgroup {}",
            v.ambient, to
        )));
    }
    let mut mults = v.mults.clone();
    for k in from..target {
        mults = group.induction[k].mul_vec(&mults);
    }
    VirtualRep::new(group, to, mults)
}

/// Dimension of the `H`-fixed points `V^H` (linear in multiplicities).
pub fn fixed_dim(group: &GroupData, v: &VirtualRep, h: &str) -> Result<BigInt, GradingError> {
    let level = group.subgroup_index(&v.ambient)?;
    let k = group.subgroup_index(h)?;
    if k > level {
        return Err(GradingError::BadGroupData(format!(
            "fixed points of a {}-representation under the larger subgroup {}",
            v.ambient, h
        )));
    }
    let mut d = BigInt::zero();
    for (m, row) in v.mults.iter().zip(&group.subgroups[level].fixed_dims) {
        d += m * BigInt::from(row[k]);
    }
    Ok(d)
}

/// Regular representation of a subgroup in the chain (multiplicity vector).
pub fn regular_rep(group: &GroupData, ambient: &str) -> Result<VirtualRep, GradingError> {
    let e = VirtualRep::new(group, &group.subgroups[0].name, vec![BigInt::from(1)])?;
    ind(group, &e, ambient)
}
