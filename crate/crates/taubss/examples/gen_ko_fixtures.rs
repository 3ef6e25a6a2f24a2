//! Regenerates the ko chart fixtures.
//!
//! Figure data is the classical Adams-Novikov chart for connective real
//! K-theory on stems 0..24 together with its connective cover for the
//! half-slope line, transcribed cell by cell. The cover fixture is written
//! from the transcription rules below, independently of the prediction
//! engine, so the acceptance comparison against the engine is meaningful.
//!
//! Run from the crate root:
//!     cargo run --example gen_ko_fixtures
//!
//! The files land in fixtures/ko/.

use num_bigint::BigInt;
use std::collections::BTreeMap;
use taubss::chart::{BssPages, Entry, StructureLine, Window};
use taubss::couple::CoupleData;
use taubss::doc::{BssPagesDoc, ChartMapDoc, Document, MapCell};
use taubss::grading::{Degree, Line};
use taubss::matrix::Matrix;

const X_MAX: i64 = 24;
const WINDOW: Window = Window { x0: 0, x1: X_MAX, y0: -24, y1: 26 };

fn one() -> Matrix {
    Matrix::identity(1)
}

fn two() -> Matrix {
    Matrix::from_i64(&[&[2]])
}

fn is_dot(x: i64, y: i64) -> bool {
    x >= 1 && y >= 1 && y <= x && (x - y) % 4 == 0 && x <= X_MAX
}

fn alpha_diag(x: i64, y: i64) -> bool {
    (x - y).rem_euclid(8) == 4
}

fn square_name(x: i64) -> String {
    match x {
        0 => "1".into(),
        4 => "a".into(),
        8 => "b".into(),
        12 => "ab".into(),
        16 => "b2".into(),
        20 => "ab2".into(),
        24 => "b3".into(),
        _ => unreachable!(),
    }
}

fn dot_name(x: i64, y: i64) -> String {
    match (x, y) {
        (1, 1) => "eta".into(),
        (2, 2) => "eta2".into(),
        _ => format!("c{x}_{y}"),
    }
}

/// pi contributions per stem: (top height, length, free?) where length is
/// None for a tower running to the window bottom.
fn pi_towers(x: i64) -> Vec<(i64, Option<i64>, bool)> {
    let mut out = Vec::new();
    if x % 4 == 0 {
        out.push((0, None, true)); // infinite cyclic tower
    }
    if x >= 1 && (x % 8 == 1 || x % 8 == 2) {
        out.push((x % 8, None, false)); // eta-multiple tower, Z/2
    }
    // torsion pairs under every dot on a beta diagonal with height >= 3
    for y in 3..=x.min(26) {
        if is_dot(x, y) && !alpha_diag(x, y) {
            out.push((y, Some(2), false));
        }
    }
    out
}

fn fig1() -> CoupleData {
    let mut c = CoupleData {
        window: Some(WINDOW),
        stable_below_level: Some(0),
        window_complete: false,
        max_page: 4,
        no_more_differentials: true,
        ..Default::default()
    };
    for x in 0..=X_MAX {
        for (top, len, free) in pi_towers(x) {
            let bottom = match len {
                Some(l) => top - l + 1,
                None => WINDOW.y0,
            };
            for y in (bottom..=top).rev() {
                let name = format!("p{x}_{y}");
                let entry = if free {
                    Entry::free(&[&name])
                } else {
                    Entry::cyclic(&name, 2)
                };
                c.pi.insert(Degree::new(x, y), entry);
                if y < top {
                    c.tau.insert(Degree::new(x, y), one());
                }
            }
        }
    }
    // E2: squares and dots
    for x in (0..=X_MAX).step_by(4) {
        c.e2.insert(Degree::new(x, 0), Entry::free(&[&square_name(x)]));
    }
    for x in 0..=X_MAX {
        for y in 1..=x {
            if is_dot(x, y) {
                c.e2.insert(Degree::new(x, y), Entry::cyclic(&dot_name(x, y), 2));
            }
        }
    }
    // d3 differentials: squares in stems 4 mod 8, and every dot on an alpha
    // diagonal; all have full-rank matrices on single generators
    for x in (0..=X_MAX).step_by(4) {
        if x % 8 == 4 {
            c.bnd.insert(Degree::new(x, 0), one()); // delta = tau t
        }
    }
    for x in 0..=X_MAX {
        for y in 1..=x {
            if is_dot(x, y) && alpha_diag(x, y) {
                c.bnd.insert(Degree::new(x, y), one());
            }
        }
    }
    // projections: pi tops onto their E2 classes
    for x in 0..=X_MAX {
        for (top, len, free) in pi_towers(x) {
            let d = Degree::new(x, top);
            if free {
                // squares: index two under a d3 source, identity otherwise
                let m = if x % 8 == 4 { two() } else { one() };
                c.proj.insert(d, m);
            } else if len.is_some() || top >= 1 {
                // torsion pairs and eta towers project onto dots
                if is_dot(x, top) {
                    c.proj.insert(d, one());
                }
            }
        }
    }
    c
}

/// Differentials of the first chart, as page-level data: d3 matrices [1] on
/// canonical generators.
fn fig1_diffs() -> BTreeMap<(i64, Degree), Matrix> {
    let mut out = BTreeMap::new();
    for x in (0..=X_MAX).step_by(4) {
        if x % 8 == 4 {
            out.insert((3, Degree::new(x, 0)), one());
        }
    }
    for x in 0..=X_MAX {
        for y in 1..=x {
            if is_dot(x, y) && alpha_diag(x, y) && y + 3 <= WINDOW.y1 && x >= 1 {
                out.insert((3, Degree::new(x, y)), one());
            }
        }
    }
    out
}

fn floor_half(x: i64) -> i64 {
    // mathematical floor of x/2 for x >= 0
    x.div_euclid(2)
}

fn in_iso_region(x: i64, y: i64) -> bool {
    // y + 2 <= (x - 1)/2 exactly: 2(y + 2) <= x - 1
    2 * (y + 2) <= x - 1
}

fn is_lc_d3_source(x: i64, y: i64) -> bool {
    // a d3 source on or below the line whose target is above it:
    // 2y <= x and 2(y + 3) > x - 1
    2 * y <= x && 2 * (y + 3) > x - 1
}

fn fig2() -> CoupleData {
    let line = Line::new(1, 2).unwrap();
    let y1 = fig1();
    let mut c = CoupleData {
        window: Some(WINDOW),
        stable_below_level: Some(0),
        vanish_above_line: Some(line),
        window_complete: false,
        max_page: 4,
        no_more_differentials: true,
        ..Default::default()
    };
    // pi: truncation to the region on or below the line
    for (d, e) in &y1.pi {
        if 2 * d.y <= d.x {
            c.pi.insert(*d, e.clone());
        }
    }
    for (d, m) in &y1.tau {
        if 2 * (d.y + 1) <= d.x {
            c.tau.insert(*d, m.clone());
        }
    }
    // E2 by region
    for x in 0..=X_MAX {
        let f = floor_half(x);
        for y in 0..=f {
            let d = Degree::new(x, y);
            if y == f {
                // floor cells: the full pi group; generators with zero
                // mod-tau projection are the dropped-lift classes (orange)
                let Some(pe) = y1.pi.get(&d) else { continue };
                let projected = y1.proj.contains_key(&d);
                let mut gen = pe.gens[0].clone();
                if !projected {
                    gen.name = format!("drop(p{}_{},{})", x, y + 1, 1);
                    gen.color = Some("orange".into());
                }
                let entry = Entry { gens: vec![gen], group: pe.group.clone() };
                c.e2.insert(d, entry);
                c.proj.insert(d, Matrix::identity(pe.group.num_gens()));
                continue;
            }
            let Some(e) = y1.e2.get(&d) else { continue };
            if in_iso_region(x, y) {
                c.e2.insert(d, e.clone());
            } else {
                // keep permanent cycles only; the square over the first
                // crossing differential survives with index two
                let square = y == 0 && x % 4 == 0;
                let d3_source = (square && x % 8 == 4)
                    || (is_dot(x, y) && alpha_diag(x, y) && y >= 1);
                if !d3_source {
                    c.e2.insert(d, e.clone());
                } else if square {
                    let mut gen = e.gens[0].clone();
                    gen.name = format!("{}2", gen.name);
                    gen.color = Some("blue".into());
                    c.e2.insert(d, Entry { gens: vec![gen], group: e.group.clone() });
                }
                // line-crossing dot sources off the stable region disappear
            }
        }
    }
    // projections at non-floor cells: carried from the first chart, with the
    // index-two square flattened to the sublattice generator
    for (d, m) in &y1.proj {
        let f = floor_half(d.x);
        if d.y >= f || 2 * d.y > d.x {
            continue;
        }
        if !c.e2.contains_key(d) || !c.pi.contains_key(d) {
            continue;
        }
        if d.y == 0 && d.x % 8 == 4 && !in_iso_region(d.x, 0) {
            // pi generator maps onto the generator of the index-two subgroup
            c.proj.insert(*d, one());
        } else {
            c.proj.insert(*d, m.clone());
        }
    }
    // boundaries: lifted d3 sources keep delta = tau t; the replacement d2
    // sources have delta = the dropped lift itself
    for x in 0..=X_MAX {
        for y in 0..=floor_half(x) {
            let d = Degree::new(x, y);
            if !c.e2.contains_key(&d) {
                continue;
            }
            let is_square = y == 0 && x % 4 == 0;
            let lifted_d3 = (is_square && x % 8 == 4 && in_iso_region(x, 0))
                || (is_dot(x, y) && alpha_diag(x, y) && !is_lc_d3_source(x, y));
            let clause7_d2 = is_dot(x, y)
                && alpha_diag(x, y)
                && is_lc_d3_source(x, y)
                && in_iso_region(x, y);
            if lifted_d3 {
                let tgt = Degree::new(x - 1, y + 2);
                if c.pi.contains_key(&tgt) {
                    c.bnd.insert(d, one());
                }
            } else if clause7_d2 {
                let tgt = Degree::new(x - 1, y + 2);
                assert!(c.pi.contains_key(&tgt), "dropped lift cell missing at {tgt}");
                c.bnd.insert(d, one());
            }
        }
    }
    c
}

fn fig2_diffs() -> BTreeMap<(i64, Degree), (Matrix, &'static str)> {
    let mut out = BTreeMap::new();
    // lifted d3 differentials
    for x in 0..=X_MAX {
        if x % 8 == 4 && in_iso_region(x, 0) {
            out.insert((3, Degree::new(x, 0)), (one(), "lifted"));
        }
        for y in 1..=floor_half(x) {
            if is_dot(x, y) && alpha_diag(x, y) {
                if !is_lc_d3_source(x, y) {
                    out.insert((3, Degree::new(x, y)), (one(), "lifted"));
                } else if in_iso_region(x, y) {
                    out.insert((2, Degree::new(x, y)), (one(), "clause-7"));
                }
            }
        }
    }
    out
}

fn pages_doc(c: &CoupleData, diffs: &BTreeMap<(i64, Degree), Matrix>, origins: &BTreeMap<(i64, Degree), String>, lines: Vec<StructureLine>) -> BssPagesDoc {
    let mut pages = BssPages::empty(c.window());
    pages.max_page = c.max_page;
    pages.no_more_differentials = true;
    pages.window_complete = false;
    pages.e2 = c.e2.clone();
    pages.diffs = diffs.clone();
    pages.origins = origins.clone();
    pages.projections = c.proj.clone();
    let mut chart = c.tau_chart();
    chart.structure_lines = lines;
    BssPagesDoc::from_parts(&pages, Some(&chart), &c.bnd)
}

/// Hidden eta-multiplication structure lines: inert display metadata for
/// the jumps from the infinite cyclic classes into the eta towers.
fn fig1_structure_lines() -> Vec<StructureLine> {
    let mut out = Vec::new();
    for x in [0i64, 8, 16] {
        if x + 1 > X_MAX {
            continue;
        }
        out.push(StructureLine {
            from: Degree::new(x, 0),
            from_gen: format!("p{x}_0"),
            to: Degree::new(x + 1, 1),
            to_gen: format!("p{}_1", x + 1),
            kind: "eta".into(),
            filtration_jump: 1,
            color: Some("#777777".into()),
        });
    }
    out
}

/// The cover figure draws its eta-multiplications with the jumps they have
/// after the cover: the multiplication from the unit lands on the dropped
/// lift with no filtration jump.
fn fig2_structure_lines() -> Vec<StructureLine> {
    let mut out = vec![StructureLine {
        from: Degree::new(0, 0),
        from_gen: "p0_0".into(),
        to: Degree::new(1, 0),
        to_gen: "p1_0".into(),
        kind: "eta".into(),
        filtration_jump: 0,
        color: Some("#777777".into()),
    }];
    for x in [8i64, 16] {
        out.push(StructureLine {
            from: Degree::new(x, 0),
            from_gen: format!("p{x}_0"),
            to: Degree::new(x + 1, 1),
            to_gen: format!("p{}_1", x + 1),
            kind: "eta".into(),
            filtration_jump: 1,
            color: Some("#777777".into()),
        });
    }
    out
}

fn main() {
    let out_dir = std::path::Path::new("crates/taubss/fixtures/ko");
    let out_dir = if out_dir.exists() { out_dir.to_path_buf() } else { std::path::PathBuf::from("fixtures/ko") };

    // figure 1
    let y = fig1();
    let violations = y.exactness_violations();
    assert!(violations.is_empty(), "chart 1 is not exact: {violations:?}");
    let d1 = fig1_diffs();
    let doc1 = pages_doc(&y, &d1, &BTreeMap::new(), fig1_structure_lines());
    let (pages1, chart1, _) = doc1.to_parts().expect("figure 1 parses");
    let rep = taubss::chart::check_les_consistency(&chart1.unwrap(), &pages1);
    assert!(rep.violations.is_empty(), "figure 1 LES: {:?}", rep.violations);
    // cross-check the transcribed differentials against the couple
    let recomputed = taubss::couple::pages_from_couple(&y, 4).expect("pages");
    assert_eq!(recomputed.diffs, d1, "figure 1 differentials disagree with the couple");

    // figure 2
    let x = fig2();
    let violations = x.exactness_violations();
    assert!(violations.is_empty(), "chart 2 is not exact: {violations:?}");
    let mut d2 = BTreeMap::new();
    let mut origins = BTreeMap::new();
    for (k, (m, o)) in fig2_diffs() {
        d2.insert(k, m);
        origins.insert(k, o.to_string());
    }
    let doc2 = pages_doc(&x, &d2, &origins, fig2_structure_lines());
    let (pages2, chart2, _) = doc2.to_parts().expect("figure 2 parses");
    let rep = taubss::chart::check_les_consistency(&chart2.unwrap(), &pages2);
    assert!(rep.violations.is_empty(), "figure 2 LES: {:?}", rep.violations);
    let recomputed = taubss::couple::pages_from_couple(&x, 4).expect("pages");
    assert_eq!(recomputed.diffs, d2, "figure 2 differentials disagree with the couple");

    // canonical map: identity below the line, multiplication by two at (4,0)
    let mut pi_maps: Vec<MapCell> = Vec::new();
    let mut e2_maps: Vec<MapCell> = Vec::new();
    for (d, e) in &x.pi {
        pi_maps.push(MapCell { x: d.x, y: d.y, matrix: Matrix::identity(e.group.num_gens()) });
    }
    for (d, e) in &x.e2 {
        let target = y.e2_group(*d);
        if target.is_trivial() {
            continue;
        }
        let m = if d.y == 0 && d.x % 8 == 4 && !in_iso_region(d.x, 0) {
            two()
        } else if d.y == floor_half(d.x) {
            // floor cells map by the mod-tau projection of the first chart
            y.proj_at(*d)
        } else {
            Matrix::identity(e.group.num_gens())
        };
        if !m.is_zero() {
            e2_maps.push(MapCell { x: d.x, y: d.y, matrix: m });
        }
    }
    let map_doc = ChartMapDoc {
        line: Some("1/2".into()),
        source: doc2.clone(),
        target: doc1.clone(),
        pi_maps,
        e2_maps,
    };

    std::fs::create_dir_all(&out_dir).unwrap();
    std::fs::write(out_dir.join("figure1.json"), taubss::doc::serialize(&Document::BssPages(doc1))).unwrap();
    std::fs::write(out_dir.join("figure2.json"), taubss::doc::serialize(&Document::BssPages(doc2))).unwrap();
    std::fs::write(out_dir.join("cover_map.json"), taubss::doc::serialize(&Document::ChartMap(map_doc))).unwrap();

    // transcription manifest
    let manifest = manifest(&y, &d1, &x, &d2);
    std::fs::write(out_dir.join("MANIFEST.json"), manifest).unwrap();
    println!("fixtures written to {}", out_dir.display());
}

fn manifest(
    y: &CoupleData,
    d1: &BTreeMap<(i64, Degree), Matrix>,
    x: &CoupleData,
    d2: &BTreeMap<(i64, Degree), Matrix>,
) -> String {
    use serde_json::json;
    let text_pinned_classes = [
        (1i64, 0i64, "orange dropped-lift class"),
        (2, 1, "orange dropped-lift class"),
        (17, 8, "orange dropped-lift class"),
        (18, 9, "orange dropped-lift class"),
        (4, 0, "blue square mapping by multiplication by 2"),
    ];
    let text_pinned_diffs = [
        (3i64, 4i64, 0i64, "first chart: crossing differential off the square"),
        (2, 18, 6, "cover: replacement differential into the dropped lift"),
        (2, 19, 7, "cover: replacement differential into the dropped lift"),
    ];
    let classes1: Vec<_> = y
        .e2
        .iter()
        .map(|(d, e)| {
            json!({
                "x": d.x, "y": d.y,
                "gens": e.gens.iter().map(|g| g.name.clone()).collect::<Vec<_>>(),
                "source": if d.x <= 20 { "classical-chart" } else { "pattern-extension" },
            })
        })
        .collect();
    let classes2: Vec<_> = x
        .e2
        .iter()
        .map(|(d, e)| {
            let pinned = text_pinned_classes.iter().any(|(px, py, _)| *px == d.x && *py == d.y);
            json!({
                "x": d.x, "y": d.y,
                "gens": e.gens.iter().map(|g| g.name.clone()).collect::<Vec<_>>(),
                "source": if pinned { "text-pinned" } else if d.x <= 20 { "cover-reading" } else { "pattern-extension" },
            })
        })
        .collect();
    let diffs1: Vec<_> = d1
        .keys()
        .map(|(r, d)| {
            let pinned = text_pinned_diffs.iter().any(|(pr, px, py, _)| pr == r && *px == d.x && *py == d.y);
            json!({"page": r, "x": d.x, "y": d.y, "source": if pinned { "text-pinned" } else { "classical-chart" }})
        })
        .collect();
    let diffs2: Vec<_> = d2
        .keys()
        .map(|(r, d)| {
            let pinned = text_pinned_diffs.iter().any(|(pr, px, py, _)| pr == r && *px == d.x && *py == d.y);
            json!({"page": r, "x": d.x, "y": d.y, "source": if pinned { "text-pinned" } else { "cover-reading" }})
        })
        .collect();
    let m = json!({
        "description": "Transcription inventory for the ko chart fixtures. \
            figure1 is the classical Adams-Novikov chart of connective real \
            K-theory on stems 0..24; figure2 is its connective cover for the \
            line y = x/2. Sources: text-pinned (fixed by the written \
            description of the cover), classical-chart (the standard chart), \
            cover-reading (read off the cover chart), pattern-extension \
            (periodicity continuation beyond stem 20, lower confidence).",
        "window": {"x0": WINDOW.x0, "x1": WINDOW.x1, "y0": WINDOW.y0, "y1": WINDOW.y1},
        "figure1": {"classes": classes1, "differentials": diffs1},
        "figure2": {"classes": classes2, "differentials": diffs2},
        "notes": [
            "dropped-lift classes at (1,0), (2,1), (17,8), (18,9)",
            "index-two map on the square at (4,0)",
            "replacement d2 differentials from (18,6) and (19,7)",
            "the d3 off (4,0) in figure1 crosses the line y = x/2",
            "the unit at (0,0) lifts to the cover; the class at (1,1) does not",
        ],
    });
    serde_json::to_string_pretty(&m).unwrap() + "\n"
}
