//! Finitely generated abelian groups given by presentations, together with
//! the lattice calculus (kernels, images, preimages, subquotients) that the
//! page-turning and cover machinery is built on.
//!
//! A group is `Z^g / colspan(rels)`. Elements are coordinate vectors in the
//! generators; two groups are considered "the same" abstractly exactly when
//! their Smith invariants agree.

use crate::matrix::{hnf, kernel, smith, solve, Matrix};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Isomorphism class of a finitely generated abelian group: torsion
/// coefficients (each ≥ 2, in divisibility order) plus free rank.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Invariants {
    #[serde(with = "crate::jsonnum::vec")]
    pub torsion: Vec<BigInt>,
    pub rank: usize,
}

impl Invariants {
    pub fn zero() -> Self {
        Invariants { torsion: vec![], rank: 0 }
    }

    pub fn free(rank: usize) -> Self {
        Invariants { torsion: vec![], rank }
    }

    pub fn is_zero(&self) -> bool {
        self.torsion.is_empty() && self.rank == 0
    }

    /// Order of the torsion subgroup (product of coefficients).
    pub fn torsion_order(&self) -> BigInt {
        self.torsion.iter().product()
    }
}

impl std::fmt::Display for Invariants {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts: Vec<String> = Vec::new();
        if self.rank > 0 {
            parts.push(if self.rank == 1 { "Z".into() } else { format!("Z^{}", self.rank) });
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// A presented finitely generated abelian group.
#[derive(Clone, Debug)]
pub struct AbGroup {
    /// Number of generators.
    num_gens: usize,
    /// Relations, one per column.
    rels: Matrix,
    // Cached Smith data of the relation matrix.
    to_canon: Matrix,
    diag: Vec<BigInt>,
}

impl PartialEq for AbGroup {
    fn eq(&self, other: &Self) -> bool {
        self.num_gens == other.num_gens && self.rels == other.rels
    }
}
impl Eq for AbGroup {}

impl AbGroup {
    pub fn new(num_gens: usize, rels: Matrix) -> Self {
        assert_eq!(rels.rows(), num_gens, "relation vectors must have one entry per generator");
        let s = smith(&rels);
        let mut diag = s.diagonal();
        diag.resize(num_gens, BigInt::zero());
        AbGroup { num_gens, rels, to_canon: s.u, diag }
    }

    pub fn zero() -> Self {
        AbGroup::new(0, Matrix::zero(0, 0))
    }

    pub fn free(rank: usize) -> Self {
        AbGroup::new(rank, Matrix::zero(rank, 0))
    }

    pub fn cyclic(order: u64) -> Self {
        AbGroup::new(1, Matrix::from_rows(vec![vec![BigInt::from(order)]]))
    }

    pub fn num_gens(&self) -> usize {
        self.num_gens
    }

    pub fn rels(&self) -> &Matrix {
        &self.rels
    }

    pub fn invariants(&self) -> Invariants {
        let mut torsion: Vec<BigInt> = self
            .diag
            .iter()
            .filter(|d| !d.is_zero() && !d.is_one())
            .cloned()
            .collect();
        torsion.sort();
        let rank = self.diag.iter().filter(|d| d.is_zero()).count();
        Invariants { torsion, rank }
    }

    pub fn is_trivial(&self) -> bool {
        self.invariants().is_zero()
    }

    /// Canonical form of an element: coordinates in the Smith basis with
    /// torsion coordinates reduced mod the invariant and unit coordinates
    /// dropped to zero.
    pub fn normal_form(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.num_gens, "normal_form shape mismatch: vec {} vs gens {}", v.len(), self.num_gens);
        let mut w = self.to_canon.mul_vec(v);
        for (i, d) in self.diag.iter().enumerate() {
            if d.is_one() {
                w[i] = BigInt::zero();
            } else if !d.is_zero() {
                let r = &w[i] % d;
                w[i] = if r.is_negative() { r + d } else { r };
            }
        }
        w
    }

    pub fn is_zero_elt(&self, v: &[BigInt]) -> bool {
        self.normal_form(v).iter().all(|x| x.is_zero())
    }

    pub fn elts_equal(&self, a: &[BigInt], b: &[BigInt]) -> bool {
        self.normal_form(a) == self.normal_form(b)
    }

    /// The lattice in Z^gens generated by the relations.
    pub fn rel_lattice(&self) -> Matrix {
        self.rels.clone()
    }
}

/// A homomorphism between presented groups: a matrix on generators.
#[derive(Clone, Debug)]
pub struct Hom {
    pub mat: Matrix,
}

impl Hom {
    /// Checks that `mat` sends relations of `src` into relations of `dst`.
    pub fn new(src: &AbGroup, dst: &AbGroup, mat: Matrix) -> Result<Hom, String> {
        if mat.rows() != dst.num_gens() || mat.cols() != src.num_gens() {
            return Err(format!(
                "hom matrix is {}x{}, expected {}x{}",
                mat.rows(),
                mat.cols(),
                dst.num_gens(),
                src.num_gens()
            ));
        }
        let img = mat.mul(src.rels());
        for j in 0..img.cols() {
            if !dst.is_zero_elt(&img.col(j)) {
                return Err(format!("relation {j} is not preserved"));
            }
        }
        Ok(Hom { mat })
    }

    pub fn identity(g: &AbGroup) -> Hom {
        Hom { mat: Matrix::identity(g.num_gens()) }
    }

    pub fn zero(src: &AbGroup, dst: &AbGroup) -> Hom {
        Hom { mat: Matrix::zero(dst.num_gens(), src.num_gens()) }
    }

    pub fn compose(&self, first: &Hom) -> Hom {
        Hom { mat: self.mat.mul(&first.mat) }
    }

    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        self.mat.mul_vec(v)
    }
}

/// Sublattice of the generator space of a group, always stored with the
/// group's relation lattice folded in, so it describes a subgroup.
pub fn sub_lattice(ambient: &AbGroup, gens: &Matrix) -> Matrix {
    assert_eq!(gens.rows(), ambient.num_gens());
    hnf(&gens.hstack(ambient.rels()))
}

/// Lattice of the whole group (all of Z^gens).
pub fn full_lattice(ambient: &AbGroup) -> Matrix {
    hnf(&Matrix::identity(ambient.num_gens()).hstack(ambient.rels()))
}

/// Sum of two sublattices.
pub fn lattice_sum(a: &Matrix, b: &Matrix) -> Matrix {
    hnf(&a.hstack(b))
}

/// Does the lattice contain the vector?
pub fn lattice_contains(lat: &Matrix, v: &[BigInt]) -> bool {
    if lat.cols() == 0 {
        return v.iter().all(|x| x.is_zero());
    }
    solve(lat, v).is_some()
}

/// Is `a` a sublattice of `b`?
pub fn lattice_subset(a: &Matrix, b: &Matrix) -> bool {
    (0..a.cols()).all(|j| lattice_contains(b, &a.col(j)))
}

pub fn lattice_eq(a: &Matrix, b: &Matrix) -> bool {
    hnf(a) == hnf(b)
}

/// Intersection of two sublattices of the same ambient space.
pub fn lattice_intersect(a: &Matrix, b: &Matrix) -> Matrix {
    if a.cols() == 0 || b.cols() == 0 {
        return Matrix::zero(a.rows(), 0);
    }
    // x = a s = b t: kernel of [a | -b]; intersection = a * (s-block)
    let mut neg = b.clone();
    for i in 0..neg.rows() {
        for j in 0..neg.cols() {
            let v = -neg[(i, j)].clone();
            neg[(i, j)] = v;
        }
    }
    let k = crate::matrix::kernel(&a.hstack(&neg));
    let mut cols = Vec::new();
    for j in 0..k.cols() {
        let s: Vec<BigInt> = k.col(j)[..a.cols()].to_vec();
        cols.push(a.mul_vec(&s));
    }
    hnf(&Matrix::from_cols(cols, a.rows()))
}

/// Preimage of the subgroup spanned by `lat` (in dst coordinates) under the
/// generator-space map `f : Z^src -> Z^dst`. Returns a lattice in src space.
pub fn lattice_preimage(f: &Matrix, lat: &Matrix) -> Matrix {
    // Solve f x = lat t: kernel of [f | -lat], projected to the x block.
    let neg = {
        let mut m = lat.clone();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let v = -m[(i, j)].clone();
                m[(i, j)] = v;
            }
        }
        m
    };
    let stacked = f.hstack(&neg);
    let k = kernel(&stacked);
    // take first f.cols() rows of each kernel column
    let mut cols = Vec::new();
    for j in 0..k.cols() {
        let c = k.col(j);
        cols.push(c[..f.cols()].to_vec());
    }
    hnf(&Matrix::from_cols(cols, f.cols()))
}

/// Kernel of a hom as a sublattice of the source generator space (contains
/// the source relations).
pub fn hom_kernel_lattice(src: &AbGroup, dst: &AbGroup, f: &Hom) -> Matrix {
    let pre = lattice_preimage(&f.mat, &sub_lattice(dst, &Matrix::zero(dst.num_gens(), 0)));
    lattice_sum(&pre, src.rels())
}

/// Image of a hom as a sublattice of the destination generator space
/// (contains the destination relations).
pub fn hom_image_lattice(src: &AbGroup, dst: &AbGroup, f: &Hom) -> Matrix {
    let img = f.mat.mul(&Matrix::identity(src.num_gens()));
    sub_lattice(dst, &img)
}

/// A subquotient `sub/rel` of an ambient group, with transport maps.
///
/// `basis` columns span the subgroup lattice (relations of the ambient group
/// folded in); `rels_in_basis` present the quotient in basis coordinates.
#[derive(Clone, Debug)]
pub struct SubQuotient {
    pub group: AbGroup,
    /// ambient-gens x basis-cols matrix: the chosen lifts of the generators.
    pub basis: Matrix,
}

impl SubQuotient {
    /// Present `span(sub) / span(kill)` inside `ambient`. `kill` must be
    /// contained in `span(sub) + rels`.
    pub fn new(ambient: &AbGroup, sub: &Matrix, kill: &Matrix) -> Result<SubQuotient, String> {
        let sub_lat = sub_lattice(ambient, sub);
        let kill_lat = lattice_sum(&sub_lattice(ambient, kill), ambient.rels());
        if !lattice_subset(&kill_lat, &sub_lat) {
            return Err("subquotient: killed lattice not inside subgroup lattice".into());
        }
        // relations of the quotient, expressed in the basis of sub_lat
        let mut rel_cols = Vec::new();
        for j in 0..kill_lat.cols() {
            let c = kill_lat.col(j);
            let x = solve(&sub_lat, &c).ok_or("subquotient: membership solve failed")?;
            rel_cols.push(x);
        }
        let rels = Matrix::from_cols(rel_cols, sub_lat.cols());
        Ok(SubQuotient { group: AbGroup::new(sub_lat.cols(), rels), basis: sub_lat })
    }

    /// Express an ambient vector (which must lie in the subgroup lattice) in
    /// quotient coordinates.
    pub fn project(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        solve(&self.basis, v)
    }

    /// Lift quotient coordinates back to the ambient generator space.
    pub fn lift(&self, v: &[BigInt]) -> Vec<BigInt> {
        self.basis.mul_vec(v)
    }
}

/// Map induced on subquotients by an ambient-level map `f`.
///
/// Requires `f(sub_src) ⊆ sub_dst` and `f(kill_src) ⊆ kill_dst` at the level
/// of the stored lattices; errors otherwise.
pub fn induced_map(
    src: &SubQuotient,
    dst: &SubQuotient,
    f: &Matrix,
) -> Result<Matrix, String> {
    let mut cols = Vec::new();
    for j in 0..src.basis.cols() {
        let img = f.mul_vec(&src.basis.col(j));
        let x = dst.project(&img).ok_or("induced_map: image leaves destination subgroup")?;
        cols.push(x);
    }
    Ok(Matrix::from_cols(cols, dst.basis.cols()))
}

/// Pattern of a homomorphism up to isomorphism on both sides, usable as the
/// documented comparison convention for differentials and tau-maps: the
/// invariants of source, target, kernel, image and cokernel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomPattern {
    pub src: Invariants,
    pub dst: Invariants,
    pub kernel: Invariants,
    pub image: Invariants,
    pub cokernel: Invariants,
}

pub fn hom_pattern(src: &AbGroup, dst: &AbGroup, f: &Hom) -> HomPattern {
    let ker_lat = hom_kernel_lattice(src, dst, f);
    let ker = SubQuotient::new(src, &ker_lat, &Matrix::zero(src.num_gens(), 0))
        .expect("kernel is a subgroup");
    let img_lat = hom_image_lattice(src, dst, f);
    let img = SubQuotient::new(dst, &img_lat, &Matrix::zero(dst.num_gens(), 0))
        .expect("image is a subgroup");
    let coker = AbGroup::new(dst.num_gens(), lattice_sum(dst.rels(), &f.mat));
    HomPattern {
        src: src.invariants(),
        dst: dst.invariants(),
        kernel: ker.group.invariants(),
        image: img.group.invariants(),
        cokernel: coker.invariants(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn invariants_of_presentations() {
        // Z^2 / (2, 0), (0, 3) = Z/2 + Z/3 = Z/6 as invariants (2,3 coprime -> 6)
        let g = AbGroup::new(2, Matrix::from_i64(&[&[2, 0], &[0, 3]]));
        let inv = g.invariants();
        assert_eq!(inv.rank, 0);
        assert_eq!(inv.torsion, vec![bi(6)]);
        // Z^3 / single relation (2,4,6): rank 2, torsion Z/2
        let h = AbGroup::new(3, Matrix::from_i64(&[&[2], &[4], &[6]]));
        let inv = h.invariants();
        assert_eq!(inv.rank, 2);
        assert_eq!(inv.torsion, vec![bi(2)]);
    }

    #[test]
    fn normal_forms() {
        let g = AbGroup::cyclic(4);
        assert!(g.elts_equal(&[bi(5)], &[bi(1)]));
        assert!(g.is_zero_elt(&[bi(8)]));
        assert!(!g.is_zero_elt(&[bi(2)]));
    }

    #[test]
    fn subquotient_z_mod_2z() {
        let z = AbGroup::free(1);
        let two = Matrix::from_i64(&[&[2]]);
        let q = SubQuotient::new(&z, &Matrix::identity(1), &two).unwrap();
        assert_eq!(q.group.invariants(), Invariants { torsion: vec![bi(2)], rank: 0 });
    }

    #[test]
    fn kernel_image_of_mult2_on_z4() {
        let g = AbGroup::cyclic(4);
        let f = Hom::new(&g, &g, Matrix::from_i64(&[&[2]])).unwrap();
        let p = hom_pattern(&g, &g, &f);
        assert_eq!(p.kernel.torsion, vec![bi(2)]);
        assert_eq!(p.image.torsion, vec![bi(2)]);
        assert_eq!(p.cokernel.torsion, vec![bi(2)]);
    }

    #[test]
    fn preimage_lattice() {
        // f: Z -> Z multiplication by 2; preimage of 4Z is 2Z.
        let f = Matrix::from_i64(&[&[2]]);
        let lat = Matrix::from_i64(&[&[4]]);
        let pre = lattice_preimage(&f, &lat);
        assert_eq!(pre, Matrix::from_i64(&[&[2]]));
    }
}
