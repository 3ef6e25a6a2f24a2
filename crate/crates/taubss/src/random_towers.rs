//! Seeded random filtered complexes for property testing.
//!
//! Instances stay small: at most 8 levels, chain degrees within [0, 10],
//! ranks at most 4 per degree, entries in [-3, 3]. Structure maps are biased
//! toward injections and surjections half the time so that both tau-free
//! towers and tau-torsion show up.

use crate::fcc::{ChainComplex, ChainMap, FilteredComplex};
use crate::matrix::{kernel, Matrix};
use num_bigint::BigInt;
use num_traits::Zero;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug)]
pub struct TowerParams {
    pub max_levels: usize,
    pub min_degree: i64,
    pub max_degree: i64,
    pub max_pieces: usize,
    pub max_entry: i64,
}

impl Default for TowerParams {
    fn default() -> Self {
        TowerParams { max_levels: 8, min_degree: 0, max_degree: 10, max_pieces: 3, max_entry: 3 }
    }
}

/// An elementary summand: either a free generator or a two-term complex
/// `Z --m--> Z`. Sums of these realize every finitely generated homology.
#[derive(Clone, Copy, Debug)]
enum Piece {
    Single { degree: i64 },
    Pair { top: i64, m: i64 },
}

impl Piece {
    fn complex(&self) -> ChainComplex {
        match *self {
            Piece::Single { degree } => ChainComplex::concentrated(degree, 1),
            Piece::Pair { top, m } => ChainComplex::two_term(top, m),
        }
    }
}

fn assemble(pieces: &[Piece]) -> ChainComplex {
    pieces
        .iter()
        .fold(ChainComplex::zero(), |acc, p| acc.direct_sum(&p.complex()))
}

fn random_pieces(rng: &mut ChaCha8Rng, p: &TowerParams) -> Vec<Piece> {
    let count = rng.gen_range(0..=p.max_pieces);
    (0..count)
        .map(|_| {
            // keep degrees in a narrow band so Hom spaces stay small
            if rng.gen_bool(0.4) {
                Piece::Single { degree: rng.gen_range(p.min_degree..=p.max_degree) }
            } else {
                let top = rng.gen_range(p.min_degree + 1..=p.max_degree);
                let mut m = rng.gen_range(-p.max_entry..=p.max_entry);
                if m == 0 {
                    m = 2;
                }
                Piece::Pair { top, m }
            }
        })
        .collect()
}

/// A random chain map `src -> dst`: sample a small integer combination of a
/// basis of the lattice of all chain maps (computed exactly as the kernel of
/// the commutator operator `f -> d f - f d`).
fn random_chain_map(
    rng: &mut ChaCha8Rng,
    src: &ChainComplex,
    dst: &ChainComplex,
    max_entry: i64,
) -> ChainMap {
    // variables: entries of f_i for each degree i present in either complex
    let degrees: Vec<i64> = {
        let mut v: Vec<i64> = src
            .ranks
            .keys()
            .chain(dst.ranks.keys())
            .cloned()
            .collect();
        v.sort();
        v.dedup();
        v
    };
    let mut var_offsets = std::collections::BTreeMap::new();
    let mut total_vars = 0usize;
    for &i in &degrees {
        var_offsets.insert(i, total_vars);
        total_vars += dst.rank(i) * src.rank(i);
    }
    if total_vars == 0 {
        return ChainMap::zero();
    }
    // constraints: for each degree i, d_dst(i) f_i - f_{i-1} d_src(i) = 0
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    for &i in &degrees {
        let rows_out = dst.rank(i - 1);
        let cols_out = src.rank(i);
        if rows_out == 0 || cols_out == 0 {
            continue;
        }
        let ddst = dst.diff(i);
        let dsrc = src.diff(i);
        for r in 0..rows_out {
            for c in 0..cols_out {
                let mut row = vec![BigInt::zero(); total_vars];
                // d_dst(i)[r, k] * f_i[k, c]
                if let Some(&off) = var_offsets.get(&i) {
                    for k in 0..dst.rank(i) {
                        row[off + k * src.rank(i) + c] += ddst[(r, k)].clone();
                    }
                }
                // - f_{i-1}[r, k] * d_src(i)[k, c]
                if let Some(&off) = var_offsets.get(&(i - 1)) {
                    for k in 0..src.rank(i - 1) {
                        row[off + r * src.rank(i - 1) + k] -= dsrc[(k, c)].clone();
                    }
                }
                rows.push(row);
            }
        }
    }
    let constraint = if rows.is_empty() {
        Matrix::zero(0, total_vars)
    } else {
        Matrix::from_rows(rows)
    };
    let basis = kernel(&constraint);
    let mut coeffs = vec![BigInt::zero(); basis.cols()];
    for c in coeffs.iter_mut() {
        *c = BigInt::from(rng.gen_range(-max_entry..=max_entry));
    }
    let sol = basis.mul_vec(&coeffs);
    let mut f = ChainMap::zero();
    for &i in &degrees {
        let (r, c) = (dst.rank(i), src.rank(i));
        if r == 0 || c == 0 {
            continue;
        }
        let off = var_offsets[&i];
        let mut m = Matrix::zero(r, c);
        for a in 0..r {
            for b in 0..c {
                m[(a, b)] = sol[off + a * c + b].clone();
            }
        }
        if !m.is_zero() {
            f.components.insert(i, m);
        }
    }
    f
}

/// Generate a seeded random tower. Deterministic per `(seed, params)`.
pub fn random_tower(seed: u64, p: &TowerParams) -> FilteredComplex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let level_count = rng.gen_range(1..=p.max_levels);
    let n0 = rng.gen_range(-2i64..=2);
    let n1 = n0 + level_count as i64 - 1;

    // build from the top level down
    let mut pieces: Vec<Vec<Piece>> = Vec::new();
    let mut maps: Vec<ChainMap> = Vec::new(); // maps[j]: level j+1 -> level j counted from the top
    pieces.push(random_pieces(&mut rng, p));
    for _ in 1..level_count {
        let upper = pieces.last().unwrap().clone();
        let style = rng.gen_range(0..4);
        match style {
            0 => {
                // injection: lower level = upper plus extra pieces
                let mut lower = upper.clone();
                lower.extend(random_pieces(&mut rng, p));
                let upper_c = assemble(&upper);
                let lower_c = assemble(&lower);
                // inclusion matrices: upper pieces occupy the first blocks
                let mut f = ChainMap::zero();
                for (&i, &r) in upper_c.ranks.iter() {
                    if r == 0 {
                        continue;
                    }
                    let mut m = Matrix::zero(lower_c.rank(i), r);
                    // identify: block order of direct sums is piece order,
                    // and lower starts with exactly the upper pieces
                    for k in 0..r {
                        m[(k, k)] = BigInt::from(1);
                    }
                    f.components.insert(i, m);
                }
                pieces.push(lower);
                maps.push(f);
            }
            1 => {
                // surjection: lower level = a subset of the upper pieces
                let keep: Vec<bool> = upper.iter().map(|_| rng.gen_bool(0.6)).collect();
                let lower: Vec<Piece> = upper
                    .iter()
                    .zip(&keep)
                    .filter(|(_, k)| **k)
                    .map(|(p, _)| *p)
                    .collect();
                let upper_c = assemble(&upper);
                let lower_c = assemble(&lower);
                // projection: track per-degree row indices of kept pieces
                let mut f = ChainMap::zero();
                let mut src_offset: std::collections::BTreeMap<i64, usize> = Default::default();
                let mut dst_offset: std::collections::BTreeMap<i64, usize> = Default::default();
                let mut comps: std::collections::BTreeMap<i64, Matrix> = Default::default();
                for (&i, &r) in upper_c.ranks.iter() {
                    if r > 0 && lower_c.rank(i) > 0 {
                        comps.insert(i, Matrix::zero(lower_c.rank(i), r));
                    }
                }
                for (piece, keep) in upper.iter().zip(&keep) {
                    let degs: Vec<i64> = match piece {
                        Piece::Single { degree } => vec![*degree],
                        Piece::Pair { top, .. } => vec![*top, *top - 1],
                    };
                    for dg in degs {
                        let s = *src_offset.get(&dg).unwrap_or(&0);
                        src_offset.insert(dg, s + 1);
                        if *keep {
                            let t = *dst_offset.get(&dg).unwrap_or(&0);
                            dst_offset.insert(dg, t + 1);
                            if let Some(m) = comps.get_mut(&dg) {
                                m[(t, s)] = BigInt::from(1);
                            }
                        }
                    }
                }
                for (i, m) in comps {
                    if !m.is_zero() {
                        f.components.insert(i, m);
                    }
                }
                pieces.push(lower);
                maps.push(f);
            }
            _ => {
                // generic random chain map into a fresh random complex
                let lower = random_pieces(&mut rng, p);
                let upper_c = assemble(&upper);
                let lower_c = assemble(&lower);
                let f = random_chain_map(&mut rng, &upper_c, &lower_c, p.max_entry.min(2));
                pieces.push(lower);
                maps.push(f);
            }
        }
    }

    // levels are built top-down; the tower stores bottom-up
    let levels: Vec<ChainComplex> = pieces.iter().rev().map(|ps| assemble(ps)).collect();
    let maps: Vec<ChainMap> = maps.into_iter().rev().collect();
    let t = FilteredComplex { n0, n1, levels, maps };
    t.validate().expect("generated tower is valid");
    t
}

/// Seeded RNG for auxiliary test choices, exposed so test suites can derive
/// reproducible companions (lines, mutation picks) from the same seed space.
pub fn aux_rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed ^ 0x5eed_cafe)
}
