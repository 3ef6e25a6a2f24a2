//! Grading combinatorics for cyclic 2-groups: geometric chart families and
//! their slice connectivity predicates, norms and dilation of bigraded
//! representation spheres, and the Total / dim* translation between
//! RO-indexed and integer-indexed filtered data.

use crate::chart::Tri;
use crate::couple::CoupleData;
use crate::cover::{connectivity_via_gr, CoverError};
use crate::fcc::{ChainComplex, ChainMap, FilteredComplex, TowerAnalysis};
use crate::grading::{dim, fixed_dim, ind, ro_compare, GroupData, Line, RoOrder, VirtualRep};
use crate::matrix::Matrix;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EquivariantError {
    #[error(transparent)]
    Grading(#[from] crate::grading::GradingError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error("{0}")]
    Other(String),
}

/// `S^{V,s}`: the filtered sphere on a virtual representation, constant at
/// `S^V` from level `dim(V) + s` downward.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereSymbol {
    pub rep: VirtualRep,
    pub s: i64,
}

impl SphereSymbol {
    pub fn start_level(&self, group: &GroupData) -> Result<i64, EquivariantError> {
        let d = dim(group, &self.rep)?;
        Ok(d.to_i64().ok_or_else(|| EquivariantError::Other("dimension overflow".into()))? + self.s)
    }
}

/// `N_H^G(S^{V,s}) = S^{Ind V, |G/H| s}`.
pub fn norm_sphere(
    group: &GroupData,
    sym: &SphereSymbol,
    to: &str,
) -> Result<SphereSymbol, EquivariantError> {
    let from_idx = group.subgroup_index(&sym.rep.ambient)?;
    let to_idx = group.subgroup_index(to)?;
    let index = (group.subgroups[to_idx].order / group.subgroups[from_idx].order) as i64;
    let rep = ind(group, &sym.rep, to)?;
    Ok(SphereSymbol { rep, s: index * sym.s })
}

/// Geometric fixed points of a sphere symbol under `K`: the value-sphere
/// dimension and the level where the constant tower starts.
pub fn geometric_sphere_chart(
    group: &GroupData,
    sym: &SphereSymbol,
    k: &str,
) -> Result<(i64, i64), EquivariantError> {
    let fd = fixed_dim(group, &sym.rep, k)?;
    let d = fd.to_i64().ok_or_else(|| EquivariantError::Other("dimension overflow".into()))?;
    Ok((d, sym.start_level(group)?))
}

/// Cor 3.18 as an equation on sphere charts: geometric fixed points of the
/// norm equal the dilation of the geometric fixed points.
pub fn dilation_relation_check(
    group: &GroupData,
    sym: &SphereSymbol,
    to: &str,
) -> Result<bool, EquivariantError> {
    let from_idx = group.subgroup_index(&sym.rep.ambient)?;
    let to_idx = group.subgroup_index(to)?;
    if to_idx < from_idx {
        return Err(EquivariantError::Other("norm target must contain the source".into()));
    }
    let index = (group.subgroups[to_idx].order / group.subgroups[from_idx].order) as i64;
    let lhs = geometric_sphere_chart(group, &norm_sphere(group, sym, to)?, to)?;
    let (dim_h, start_h) = geometric_sphere_chart(group, sym, &sym.rep.ambient)?;
    // dilation by the index stretches the start level
    let rhs = (dim_h, index * start_h);
    Ok(lhs == rhs)
}

/// One member of a geometric family: either a concrete tower or abstract
/// chart data standing for the geometric fixed points under one subgroup.
#[derive(Clone, Debug)]
pub enum FamilyMember {
    Tower(FilteredComplex),
    Chart(CoupleData),
}

/// Per-subgroup geometric fixed-point data of a G-object.
#[derive(Clone, Debug)]
pub struct GeomFamily {
    pub group: GroupData,
    pub members: BTreeMap<String, FamilyMember>,
}

impl GeomFamily {
    /// The family of a representation sphere: each member is the constant
    /// tower on the fixed-point sphere, starting at the symbol's level.
    pub fn from_sphere(group: &GroupData, sym: &SphereSymbol) -> Result<GeomFamily, EquivariantError> {
        let ambient_idx = group.subgroup_index(&sym.rep.ambient)?;
        let mut members = BTreeMap::new();
        for sub in group.subgroups.iter().take(ambient_idx + 1) {
            let (d, start) = geometric_sphere_chart(group, sym, &sub.name)?;
            members.insert(
                sub.name.clone(),
                FamilyMember::Tower(FilteredComplex::constant(
                    ChainComplex::concentrated(d, 1),
                    start,
                    start,
                )),
            );
        }
        Ok(GeomFamily { group: group.clone(), members })
    }
}

/// Connectivity of a single family member in a given linear t-structure.
pub fn member_connectivity(member: &FamilyMember, line: &Line) -> Result<Tri, EquivariantError> {
    match member {
        FamilyMember::Tower(t) => {
            let w = {
                let mut w = t.natural_window(1);
                let mf = (w.x0..=w.x1).map(|x| line.floor_alpha_x(x)).max().unwrap_or(w.y1);
                if mf >= w.y1 {
                    w.y1 = mf + 1;
                }
                w
            };
            let ta = TowerAnalysis::new(t);
            let chart = ta.homotopy_chart(w);
            Ok(if chart.vanishes_above(line) { Tri::Yes } else { Tri::No })
        }
        FamilyMember::Chart(c) => match connectivity_via_gr(c, line) {
            Ok(true) => Ok(Tri::Yes),
            Ok(false) => Ok(Tri::No),
            Err(CoverError::NotStronglyComplete(Tri::Indeterminate)) => Ok(Tri::Indeterminate),
            Err(e) => Err(e.into()),
        },
    }
}

/// Slice connectivity: every member (including the trivial subgroup) must be
/// connective in the `y = (|H| - 1) x` linear t-structure.
pub fn slice_connective(fam: &GeomFamily) -> Result<Tri, EquivariantError> {
    connective_over(fam, false)
}

/// The O-slice variant skips the trivial subgroup, whose restricted
/// t-structure is trivial.
pub fn o_slice_connective(fam: &GeomFamily) -> Result<Tri, EquivariantError> {
    connective_over(fam, true)
}

fn connective_over(fam: &GeomFamily, skip_trivial: bool) -> Result<Tri, EquivariantError> {
    let mut result = Tri::Yes;
    for sub in &fam.group.subgroups {
        if skip_trivial && sub.order == 1 {
            continue;
        }
        let Some(member) = fam.members.get(&sub.name) else {
            return Err(EquivariantError::Other(format!(
                "family is missing the member for {}",
                sub.name
            )));
        };
        let slope = sub.order as i64 - 1;
        let line = Line::new(slope, 1)?;
        result = result.and(member_connectivity(member, &line)?);
    }
    Ok(result)
}

/// The t-structure obtained by restricting to the trivial subgroup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RestrictedLine {
    /// everything is connective
    Trivial,
    Linear { p: i64, q: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SliceKind {
    Slice,
    OSlice,
}

/// Restricting the slice t-structure to the trivial subgroup gives the
/// `y = 0` linear t-structure; restricting the O-slice structure gives the
/// trivial one.
pub fn restricted_line(kind: SliceKind) -> RestrictedLine {
    match kind {
        SliceKind::Slice => RestrictedLine::Linear { p: 0, q: 1 },
        SliceKind::OSlice => RestrictedLine::Trivial,
    }
}

/// Finitely supported RO-indexed data: chain complexes per supported
/// representation, with structure maps along comparable pairs.
#[derive(Clone, Debug)]
pub struct ROFiltered {
    pub group: GroupData,
    pub ambient: String,
    pub entries: Vec<(VirtualRep, ChainComplex)>,
    /// (from index, to index, map): requires `rep[to] <= rep[from]`.
    pub maps: Vec<(usize, usize, ChainMap)>,
}

impl ROFiltered {
    pub fn validate(&self) -> Result<(), EquivariantError> {
        for (v, c) in &self.entries {
            if v.ambient != self.ambient {
                return Err(EquivariantError::Other("entry over a different ambient subgroup".into()));
            }
            c.validate().map_err(|e| EquivariantError::Other(e.to_string()))?;
        }
        for (from, to, f) in &self.maps {
            let (vf, cf) = &self.entries[*from];
            let (vt, ct) = &self.entries[*to];
            match ro_compare(&self.group, vt, vf)? {
                RoOrder::LessOrEqual | RoOrder::Equal => {}
                _ => {
                    return Err(EquivariantError::Other(
                        "structure map target is not poset-below its source".into(),
                    ))
                }
            }
            f.validate(cf, ct).map_err(|e| EquivariantError::Other(e.to_string()))?;
        }
        Ok(())
    }

    pub fn dims(&self) -> Result<Vec<i64>, EquivariantError> {
        self.entries
            .iter()
            .map(|(v, _)| {
                dim(&self.group, v)?
                    .to_i64()
                    .ok_or_else(|| EquivariantError::Other("dimension overflow".into()))
            })
            .collect()
    }
}

/// `Total^n = direct sum over supported V with |V| = n`, with structure maps
/// assembled from the poset-comparable pairs of adjacent dimension.
pub fn total(x: &ROFiltered) -> Result<FilteredComplex, EquivariantError> {
    x.validate()?;
    if x.entries.is_empty() {
        return Ok(FilteredComplex::constant(ChainComplex::zero(), 0, 0));
    }
    let dims = x.dims()?;
    let n_min = *dims.iter().min().unwrap();
    let n_max = *dims.iter().max().unwrap();
    // zero below the support, so start the explicit range one level early
    let n0 = n_min - 1;
    let n1 = n_max;
    let mut levels = Vec::new();
    let mut offsets: BTreeMap<i64, Vec<(usize, usize)>> = BTreeMap::new(); // level -> (entry idx, block offset in pieces)
    for n in n0..=n1 {
        let mut level = ChainComplex::zero();
        let mut blocks = Vec::new();
        for (i, (_, c)) in x.entries.iter().enumerate() {
            if dims[i] == n {
                blocks.push((i, blocks.len()));
                level = level.direct_sum(c);
            }
        }
        offsets.insert(n, blocks);
        levels.push(level);
    }
    let mut maps = Vec::new();
    for n in n0..n1 {
        // map from level n+1 into level n
        let src_blocks = offsets.get(&(n + 1)).unwrap().clone();
        let tgt_blocks = offsets.get(&n).unwrap().clone();
        let src_level = &levels[(n + 1 - n0) as usize];
        let tgt_level = &levels[(n - n0) as usize];
        let mut f = ChainMap::zero();
        // per-degree block offsets
        let degs: std::collections::BTreeSet<i64> = src_level
            .ranks
            .keys()
            .chain(tgt_level.ranks.keys())
            .cloned()
            .collect();
        for &deg in &degs {
            let rows = tgt_level.rank(deg);
            let cols = src_level.rank(deg);
            if rows == 0 || cols == 0 {
                continue;
            }
            let mut m = Matrix::zero(rows, cols);
            let mut placed = false;
            for &(si, _) in &src_blocks {
                for &(ti, _) in &tgt_blocks {
                    // find a declared map si -> ti
                    let Some((_, _, g)) = x
                        .maps
                        .iter()
                        .find(|(from, to, _)| *from == si && *to == ti)
                    else {
                        continue;
                    };
                    let comp = g.component(deg, &x.entries[si].1, &x.entries[ti].1);
                    if comp.is_zero() {
                        continue;
                    }
                    let row0 = block_offset(&tgt_blocks, ti, &x.entries, deg);
                    let col0 = block_offset(&src_blocks, si, &x.entries, deg);
                    for r in 0..comp.rows() {
                        for c in 0..comp.cols() {
                            m[(row0 + r, col0 + c)] = comp[(r, c)].clone();
                        }
                    }
                    placed = true;
                }
            }
            if placed && !m.is_zero() {
                f.components.insert(deg, m);
            }
        }
        maps.push(f);
    }
    let out = FilteredComplex { n0, n1, levels, maps };
    out.validate().map_err(|e| EquivariantError::Other(e.to_string()))?;
    Ok(out)
}

fn block_offset(
    blocks: &[(usize, usize)],
    entry_idx: usize,
    entries: &[(VirtualRep, ChainComplex)],
    deg: i64,
) -> usize {
    let mut off = 0usize;
    for &(i, _) in blocks {
        if i == entry_idx {
            return off;
        }
        off += entries[i].1.rank(deg);
    }
    off
}

/// `dim^*`: pull a filtered complex back along the dimension function, over
/// a declared finite support.
pub fn dim_pullback(
    group: &GroupData,
    z: &FilteredComplex,
    support: &[VirtualRep],
) -> Result<ROFiltered, EquivariantError> {
    if support.is_empty() {
        return Err(EquivariantError::Other("support must be nonempty".into()));
    }
    let ambient = support[0].ambient.clone();
    let mut entries = Vec::new();
    let mut dims = Vec::new();
    for v in support {
        if v.ambient != ambient {
            return Err(EquivariantError::Other("mixed ambient subgroups in support".into()));
        }
        let d = dim(group, v)?
            .to_i64()
            .ok_or_else(|| EquivariantError::Other("dimension overflow".into()))?;
        dims.push(d);
        entries.push((v.clone(), z.level(d)));
    }
    // structure maps for every comparable pair
    let mut maps = Vec::new();
    for (i, vi) in support.iter().enumerate() {
        for (j, vj) in support.iter().enumerate() {
            if i == j {
                continue;
            }
            // want map entries[i] -> entries[j] when vj <= vi
            match ro_compare(group, vj, vi)? {
                RoOrder::LessOrEqual | RoOrder::Equal => {
                    let (hi, lo) = (dims[i], dims[j]);
                    if lo > hi {
                        // dimension is monotone on the poset; a comparable
                        // pair with larger dimension below cannot happen for
                        // genuine representations but can for virtual ones,
                        // where dim* has no structure map to offer
                        continue;
                    }
                    let mut f = ChainMap::identity(&z.level(hi));
                    let mut cur = hi;
                    while cur > lo {
                        let step = z.structure_map(cur - 1);
                        f = step.compose(&f, &z.level(hi), &z.level(cur), &z.level(cur - 1));
                        cur -= 1;
                    }
                    maps.push((i, j, f));
                }
                _ => {}
            }
        }
    }
    let out = ROFiltered { group: group.clone(), ambient, entries, maps };
    out.validate()?;
    Ok(out)
}

/// The generator inventory of the mixed t-structure at level `i`, with the
/// unbounded regular-slice range truncated at `m_max` (data only).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum MixedGenerator {
    Whitehead { subgroup: String, degree: i64 },
    Slice { subgroup: String, rho_multiple: i64 },
}

pub fn mixed_generators(group: &GroupData, i: i64, m_max: i64) -> Vec<MixedGenerator> {
    let mut out = Vec::new();
    for sub in &group.subgroups {
        out.push(MixedGenerator::Whitehead { subgroup: sub.name.clone(), degree: i });
        let h = sub.order as i64;
        // m |H| >= i  <=>  m >= ceil(i / |H|)
        let m_min = num_integer::Integer::div_ceil(&i, &h);
        for m in m_min..=m_max.max(m_min - 1) {
            out.push(MixedGenerator::Slice { subgroup: sub.name.clone(), rho_multiple: m });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{c2, c4};
    use num_bigint::BigInt;

    fn vrep(g: &GroupData, ambient: &str, mults: &[i64]) -> VirtualRep {
        VirtualRep::new(g, ambient, mults.iter().map(|&m| BigInt::from(m)).collect()).unwrap()
    }

    #[test]
    fn norm_sphere_examples() {
        let g = c2();
        // N_e^{C2}(S^{0,s}) = S^{0,2s}
        let zero = SphereSymbol { rep: vrep(&g, "e", &[0]), s: 5 };
        let n = norm_sphere(&g, &zero, "C2").unwrap();
        assert_eq!(n.s, 10);
        assert_eq!(n.rep.mults, vec![BigInt::from(0), BigInt::from(0)]);
        // N_e^{C2}(S^{1,0}) = S^{rho,0}
        let one = SphereSymbol { rep: vrep(&g, "e", &[1]), s: 0 };
        let n = norm_sphere(&g, &one, "C2").unwrap();
        assert_eq!(n.rep.mults, vec![BigInt::from(1), BigInt::from(1)]);
        assert_eq!(n.s, 0);
    }

    #[test]
    fn geometric_sphere_examples() {
        let g = c2();
        // Phi^{C2} of S^{sigma,0} = (0, 1)
        let sigma = SphereSymbol { rep: vrep(&g, "C2", &[0, 1]), s: 0 };
        assert_eq!(geometric_sphere_chart(&g, &sigma, "C2").unwrap(), (0, 1));
        // Phi^e of any S^{V,s} = (|V|, |V|+s)
        assert_eq!(geometric_sphere_chart(&g, &sigma, "e").unwrap(), (1, 1));
        // Phi^{C2} of S^{rho,0} = (1, 2)
        let rho = SphereSymbol { rep: vrep(&g, "C2", &[1, 1]), s: 0 };
        assert_eq!(geometric_sphere_chart(&g, &rho, "C2").unwrap(), (1, 2));
    }

    #[test]
    fn dilation_relation_c2_c4_grid() {
        for g in [c2(), c4()] {
            for (hi, h) in g.subgroups.iter().enumerate() {
                for gsub in g.subgroups.iter().skip(hi) {
                    let nirr = g.subgroups[hi].irreducibles.len();
                    let mut mults = vec![0i64; nirr];
                    // exhaustive small grid
                    let m_range: Vec<i64> = (-2..=2).collect();
                    let mut stack = vec![0usize];
                    let _ = &mut stack;
                    fn rec(
                        g: &GroupData,
                        h: &str,
                        to: &str,
                        mults: &mut Vec<i64>,
                        pos: usize,
                        m_range: &[i64],
                    ) {
                        if pos == mults.len() {
                            for s in -3..=3 {
                                let sym = SphereSymbol {
                                    rep: VirtualRep::new(
                                        g,
                                        h,
                                        mults.iter().map(|&m| BigInt::from(m)).collect(),
                                    )
                                    .unwrap(),
                                    s,
                                };
                                assert!(dilation_relation_check(g, &sym, to).unwrap());
                            }
                            return;
                        }
                        for &m in m_range {
                            mults[pos] = m;
                            rec(g, h, to, mults, pos + 1, m_range);
                        }
                    }
                    rec(&g, &h.name, &gsub.name, &mut mults, 0, &m_range);
                }
            }
        }
    }

    #[test]
    fn sphere_family_slice_connectivity() {
        let g = c2();
        // constant tower on the C2 sphere S^rho: Phi^e = S^2 from level 2,
        // Phi^{C2} = S^1 from level 2: slice connective
        let rho = SphereSymbol { rep: vrep(&g, "C2", &[1, 1]), s: 0 };
        let fam = GeomFamily::from_sphere(&g, &rho).unwrap();
        assert_eq!(slice_connective(&fam).unwrap(), Tri::Yes);
        assert_eq!(o_slice_connective(&fam).unwrap(), Tri::Yes);
    }

    #[test]
    fn o_slice_exempts_trivial_subgroup() {
        let g = c2();
        // e-member wildly nonconnective, C2-member connective
        let mut members = BTreeMap::new();
        // a class at (0, 5) in a y = 0 structure: nonconnective
        members.insert(
            "e".to_string(),
            FamilyMember::Tower(FilteredComplex::constant(
                ChainComplex::concentrated(0, 1),
                5,
                5,
            )),
        );
        members.insert(
            "C2".to_string(),
            FamilyMember::Tower(FilteredComplex::constant(
                ChainComplex::concentrated(1, 1),
                0,
                0,
            )),
        );
        let fam = GeomFamily { group: g, members };
        assert_eq!(slice_connective(&fam).unwrap(), Tri::No);
        assert_eq!(o_slice_connective(&fam).unwrap(), Tri::Yes);
    }

    #[test]
    fn family_failing_at_c2() {
        let g = c2();
        let mut members = BTreeMap::new();
        members.insert(
            "e".to_string(),
            FamilyMember::Tower(FilteredComplex::constant(
                ChainComplex::concentrated(0, 1),
                0,
                0,
            )),
        );
        // class at (2, 3): above y = x
        members.insert(
            "C2".to_string(),
            FamilyMember::Tower(FilteredComplex::constant(
                ChainComplex::concentrated(2, 1),
                5,
                5,
            )),
        );
        let fam = GeomFamily { group: g, members };
        assert_eq!(slice_connective(&fam).unwrap(), Tri::No);
        assert_eq!(o_slice_connective(&fam).unwrap(), Tri::No);
    }

    #[test]
    fn restricted_lines() {
        assert_eq!(restricted_line(SliceKind::Slice), RestrictedLine::Linear { p: 0, q: 1 });
        assert_eq!(restricted_line(SliceKind::OSlice), RestrictedLine::Trivial);
    }

    #[test]
    fn total_of_single_support() {
        let g = c2();
        let v = vrep(&g, "C2", &[1, 1]); // dim 2
        let c = ChainComplex::two_term(1, 2);
        let x = ROFiltered {
            group: g,
            ambient: "C2".into(),
            entries: vec![(v, c.clone())],
            maps: vec![],
        };
        let t = total(&x).unwrap();
        assert_eq!(t.level(2), c);
        assert!(t.level(1).is_zero());
        assert!(t.level(3).is_zero());
    }

    #[test]
    fn total_dim_pullback_counting() {
        let g = c2();
        let z = FilteredComplex::constant(ChainComplex::concentrated(0, 1), 0, 3);
        // support with two reps of dimension 2 and one of dimension 1
        let support = vec![
            vrep(&g, "C2", &[2, 0]),
            vrep(&g, "C2", &[0, 2]),
            vrep(&g, "C2", &[1, 0]),
        ];
        let ro = dim_pullback(&g, &z, &support).unwrap();
        let t = total(&ro).unwrap();
        // level 2 is the double of z.level(2), level 1 a single copy
        assert_eq!(t.level(2).rank(0), 2 * z.level(2).rank(0));
        assert_eq!(t.level(1).rank(0), z.level(1).rank(0));
    }

    #[test]
    fn dim_pullback_of_constant_is_constant() {
        let g = c2();
        let c = ChainComplex::two_term(2, 3);
        let z = FilteredComplex::constant(c.clone(), -2, 4);
        let support = vec![vrep(&g, "C2", &[1, 1]), vrep(&g, "C2", &[2, 0]), vrep(&g, "C2", &[0, 1])];
        let ro = dim_pullback(&g, &z, &support).unwrap();
        for (_, entry) in &ro.entries {
            assert_eq!(entry, &c);
        }
        for (_, _, f) in &ro.maps {
            assert_eq!(f, &ChainMap::identity(&c));
        }
    }

    #[test]
    fn mixed_generator_inventory() {
        let g = c2();
        let gens = mixed_generators(&g, 2, 3);
        assert!(gens.contains(&MixedGenerator::Whitehead { subgroup: "e".into(), degree: 2 }));
        assert!(gens.contains(&MixedGenerator::Whitehead { subgroup: "C2".into(), degree: 2 }));
        // m |C2| >= 2 gives m >= 1
        assert!(gens.contains(&MixedGenerator::Slice { subgroup: "C2".into(), rho_multiple: 1 }));
        assert!(!gens.contains(&MixedGenerator::Slice { subgroup: "C2".into(), rho_multiple: 0 }));
        // m |e| >= 2 gives m >= 2
        assert!(gens.contains(&MixedGenerator::Slice { subgroup: "e".into(), rho_multiple: 2 }));
        assert!(!gens.contains(&MixedGenerator::Slice { subgroup: "e".into(), rho_multiple: 1 }));
        // very negative i reaches down to the bound
        let low = mixed_generators(&g, -6, 0);
        assert!(low.contains(&MixedGenerator::Slice { subgroup: "C2".into(), rho_multiple: -3 }));
    }
}
