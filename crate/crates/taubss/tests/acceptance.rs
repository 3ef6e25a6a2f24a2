//! Acceptance suite: one test per criterion, each printing a pass line with
//! its runtime. Run with `cargo test --test acceptance -- --nocapture` to see
//! the lines.

use num_bigint::BigInt;
use std::time::Instant;
use taubss::chart::{diff_charts, Tri, Window};
use taubss::couple::{pages_from_couple, CoupleData};
use taubss::cover::{class_lifts, cobar_support_bound, connectivity_via_gr, find_drops, predict_cover, verify_cover_map};
use taubss::doc::{parse, Document};
use taubss::equivariant::{
    dilation_relation_check, dim_pullback, o_slice_connective, slice_connective, total,
    FamilyMember, GeomFamily, SphereSymbol,
};
use taubss::fcc::{
    criterion_5_10, homology, ChainComplex, ChainMap, FilteredComplex, TowerAnalysis, TowerMap,
};
use taubss::grading::{Degree, GroupData, Line, VirtualRep};
use taubss::groups::{c2, c2_ru, c4, c4_ru};
use taubss::matrix::Matrix;
use taubss::random_towers::{random_tower, TowerParams};

fn fixture(name: &str) -> String {
    let dir = std::env::var("TAUBSS_FIXTURE_DIR")
        .unwrap_or_else(|_| format!("{}/fixtures", env!("CARGO_MANIFEST_DIR")));
    std::fs::read_to_string(format!("{dir}/{name}")).expect("fixture readable")
}

fn load_couple(name: &str) -> CoupleData {
    let Document::BssPages(doc) = parse(&fixture(name)).expect("fixture parses") else {
        panic!("fixture {name} is not a bss-pages document");
    };
    doc.to_couple().expect("fixture carries chart and boundaries")
}

fn test_lines() -> Vec<Line> {
    [(0, 1), (1, 2), (1, 1), (3, 2), (2, 1), (3, 1)]
        .into_iter()
        .map(|(p, q)| Line::new(p, q).unwrap())
        .collect()
}

fn window_clearing_line(mut w: Window, line: &Line) -> Window {
    let mf = (w.x0..=w.x1).map(|x| line.floor_alpha_x(x)).max().unwrap();
    if mf >= w.y1 {
        w.y1 = mf + 1;
    }
    let lo = (w.x0..=w.x1).map(|x| line.floor_alpha_x(x)).min().unwrap();
    if lo < w.y0 {
        w.y0 = lo;
    }
    w
}

#[test]
fn criterion_1_ko_fixture_reproduction() {
    let start = Instant::now();
    let y = load_couple("ko/figure1.json");
    let line = Line::new(1, 2).unwrap();

    let predicted = predict_cover(&y, &line).expect("prediction succeeds");

    // dropped-lift classes at (1,0), (2,1), (17,8), (18,9)
    let landing: Vec<(i64, i64)> = predicted
        .drops
        .iter()
        .map(|d| (d.degree.x, d.degree.y - d.drop_length))
        .collect();
    assert_eq!(landing, vec![(1, 0), (2, 1), (17, 8), (18, 9)]);

    // the index-2 map at (4,0)
    let m = predicted.map.e2_maps.get(&Degree::new(4, 0)).expect("map at (4,0)");
    assert_eq!(m, &Matrix::from_i64(&[&[2]]));

    // clause-(7) d2 differentials from (18,6) and (19,7)
    for d in [Degree::new(18, 6), Degree::new(19, 7)] {
        assert!(predicted.pages.diffs.contains_key(&(2, d)), "missing d2 at {d}");
        assert_eq!(
            predicted.pages.origins.get(&(2, d)).map(|s| s.as_str()),
            Some("clause-7"),
            "wrong origin at {d}"
        );
    }
    let clause7 = predicted
        .pages
        .origins
        .iter()
        .filter(|(_, o)| o.as_str() == "clause-7")
        .count();
    assert_eq!(clause7, 2, "exactly two replacement differentials");

    // the d3 leaving (4,0) in the source is classified line-crossing
    let y_pages = pages_from_couple(&y, y.max_page).unwrap();
    assert!(y_pages.diffs.contains_key(&(3, Degree::new(4, 0))));
    assert!(line.is_line_crossing(Degree::new(4, 0), 3));

    // the unit lifts, the class in bidegree (1,1) does not
    assert!(class_lifts(&y, &line, Degree::new(0, 0)));
    assert!(!y.pi_group(Degree::new(1, 1)).is_trivial());
    assert!(!class_lifts(&y, &line, Degree::new(1, 1)));

    // empty diff against the transcription on stems 0..20
    let fig2 = load_couple("ko/figure2.json");
    let fig2_pages = pages_from_couple(&fig2, fig2.max_page).unwrap();
    let report = diff_charts(
        &(predicted.chart.clone(), predicted.pages.clone()),
        &(fig2.tau_chart(), fig2_pages),
        5,
        Some((0, 20)),
    )
    .unwrap();
    assert!(report.is_empty(), "{report:#?}");

    // and the fixture map verifies with no failed condition
    let Document::ChartMap(md) = parse(&fixture("ko/cover_map.json")).unwrap() else {
        panic!("map fixture kind");
    };
    let (_, src, dst, cmap) = md.to_parts().unwrap();
    let vrep = verify_cover_map(&src, &dst, &cmap, &line).unwrap();
    for c in [
        &vrep.well_formed,
        &vrep.strong_completeness,
        &vrep.mod_tau_vanishing,
        &vrep.tau_inverted,
        &vrep.page_iso_image,
        &vrep.page_kernel,
    ] {
        assert_ne!(c.status, Tri::No, "{:?}", c.witnesses);
    }

    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "criterion 1 took {dt:?}");
    println!("criterion 1 (ko fixture reproduction): PASS in {dt:?}");
}

#[test]
fn criterion_2_and_3_oracle_equivalence_and_verifier() {
    let start = Instant::now();
    let params = TowerParams::default();
    let mut pairs = 0usize;
    let mut verified = 0usize;
    // mutation bookkeeping for criterion 3
    let mut mutations_checked = 0usize;

    for seed in 0..200u64 {
        let tower = random_tower(seed, &params);
        let max_page = (tower.n1 - tower.n0 + 1).max(2).min(8);
        let ta = TowerAnalysis::new(&tower);
        for line in test_lines() {
            let w = window_clearing_line(tower.natural_window(1), &line);
            let y = ta.couple_data(w, max_page);
            let predicted = match predict_cover(&y, &line) {
                Ok(p) => p,
                Err(e) => panic!("seed {seed} line {line}: {e}"),
            };
            let cover = tower.linear_cover(&line);
            let ca = TowerAnalysis::new(&cover);
            let oracle_chart = ca.homotopy_chart(w);
            let oracle_pages = ca.bss_pages(w, max_page).unwrap();
            // pi exact on the interior window (charts include tau patterns)
            // and E2..E6 Smith invariants with differential patterns
            let through = max_page.min(6).max(3);
            let report = diff_charts(
                &(predicted.chart.clone(), predicted.pages.clone()),
                &(oracle_chart, oracle_pages),
                through,
                None,
            )
            .unwrap();
            assert!(report.is_empty(), "seed {seed} line {line}: {report:#?}");
            pairs += 1;

            // criterion 3, first half: the verifier passes on every pair
            let vrep = verify_cover_map(&predicted.couple, &y, &predicted.map, &line).unwrap();
            assert!(vrep.all_pass(), "seed {seed} line {line}: {vrep:#?}");
            verified += 1;

            // criterion 3, second half: seeded mutations fail with witnesses
            if mutations_checked < 20 {
                mutations_checked +=
                    run_mutations(&predicted, &y, &line, seed, mutations_checked);
            }
        }
    }
    assert_eq!(pairs, 1200);
    assert_eq!(verified, 1200);
    assert!(mutations_checked >= 20, "only {mutations_checked} mutations exercised");
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 70.0, "criteria 2+3 took {dt:?}");
    println!("criterion 2 (oracle equivalence, {pairs} pairs): PASS in {dt:?}");
    println!("criterion 3 (verifier soundness, {verified} pairs + {mutations_checked} mutations): PASS in {dt:?}");
}

/// Apply up to three mutation kinds to a predicted cover and demand the
/// verifier fails each with a witness naming the mutated degree.
fn run_mutations(
    predicted: &taubss::cover::PredictedCover,
    y: &CoupleData,
    line: &Line,
    seed: u64,
    already: usize,
) -> usize {
    let mut done = 0usize;

    // (a) delete a dropped lift: a floor E2 cell whose map to Y is zero
    if let Some(drop) = predicted.drops.first() {
        let floor = Degree::new(drop.degree.x, drop.degree.y - drop.drop_length);
        let zero_image = predicted
            .map
            .e2_maps
            .get(&floor)
            .map_or(true, |m| m.is_zero());
        if zero_image && predicted.couple.e2.contains_key(&floor) {
            let mut mutated = predicted.couple.clone();
            mutated.e2.remove(&floor);
            mutated.proj.remove(&floor);
            // remove any replacement differential into the deleted cell
            let src = Degree::new(floor.x + 1, floor.y - 2);
            mutated.bnd.remove(&src);
            let mut map = predicted.map.clone();
            map.e2_maps.remove(&floor);
            let rep = verify_cover_map(&mutated, y, &map, line).unwrap();
            assert!(!rep.all_pass(), "seed {seed}: deleted dropped lift at {floor} passed");
            assert!(
                witnesses_mention(&rep, floor),
                "seed {seed}: no witness names {floor}: {rep:#?}"
            );
            done += 1;
        }
    }

    // (b) spurious class above the line
    if already + done < 20 {
        let w = predicted.couple.window();
        let x_mid = (w.x0 + w.x1) / 2;
        let above = Degree::new(x_mid, line.floor_alpha_x(x_mid) + 1);
        if w.contains(above) {
            let mut mutated = predicted.couple.clone();
            mutated
                .e2
                .insert(above, taubss::chart::Entry::cyclic("ghost", 2));
            let rep = verify_cover_map(&mutated, y, &predicted.map, line).unwrap();
            assert!(!rep.all_pass(), "seed {seed}: ghost above line at {above} passed");
            assert!(
                witnesses_mention(&rep, above),
                "seed {seed}: no witness names {above}: {rep:#?}"
            );
            done += 1;
        }
    }

    // (c) remove a replacement differential (boundary of its source)
    if already + done < 20 {
        if let Some(((_, src), _)) = predicted
            .pages
            .origins
            .iter()
            .find(|(_, o)| o.as_str() == "clause-7")
        {
            let mut mutated = predicted.couple.clone();
            if mutated.bnd.remove(src).is_some() {
                let rep = verify_cover_map(&mutated, y, &predicted.map, line).unwrap();
                assert!(!rep.all_pass(), "seed {seed}: removed differential at {src} passed");
                assert!(
                    witnesses_mention(&rep, *src),
                    "seed {seed}: no witness names {src}: {rep:#?}"
                );
                done += 1;
            }
        }
    }
    done
}

fn witnesses_mention(rep: &taubss::cover::CoverReport, d: Degree) -> bool {
    let needle = format!("({}, {})", d.x, d.y);
    [
        &rep.well_formed,
        &rep.strong_completeness,
        &rep.mod_tau_vanishing,
        &rep.tau_inverted,
        &rep.page_iso_image,
        &rep.page_kernel,
    ]
    .iter()
    .any(|c| c.witnesses.iter().any(|w| w.contains(&needle)))
}

#[test]
fn criterion_4_dilation_identities() {
    let start = Instant::now();
    // D^n Y(s) = Y(ns)
    for n in 1..=4i64 {
        for s in -10..=10i64 {
            let d = FilteredComplex::yoneda(s).dilate(n);
            let expect = FilteredComplex::yoneda(n * s);
            for m in (n * s - 12)..=(n * s + 12) {
                assert_eq!(d.level(m), expect.level(m), "n={n} s={s} level {m}");
            }
        }
    }
    // D^n o D^m = D^{nm} on 50 random towers
    let params = TowerParams::default();
    let combos = [(2i64, 3i64), (3, 2), (2, 2), (4, 2), (3, 3)];
    for seed in 0..50u64 {
        let t = random_tower(seed + 1000, &params);
        let (n, m) = combos[(seed % 5) as usize];
        let a = t.dilate(m).dilate(n);
        let b = t.dilate(n * m);
        for lvl in (n * m * t.n0 - 3)..=(n * m * t.n1 + 3) {
            assert_eq!(a.level(lvl), b.level(lvl), "seed {seed} n={n} m={m} level {lvl}");
        }
    }
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 5.0, "criterion 4 took {dt:?}");
    println!("criterion 4 (dilation identities): PASS in {dt:?}");
}

#[test]
fn criterion_5_norm_dilation_grid_and_frobenius() {
    let start = Instant::now();
    let mut checked = 0usize;
    for g in [c2(), c4()] {
        g.validate().expect("Frobenius and dimension invariants");
        for (hi, h) in g.subgroups.iter().enumerate() {
            for to in g.subgroups.iter().skip(hi) {
                let nirr = g.subgroups[hi].irreducibles.len();
                let mut mults = vec![-2i64; nirr];
                loop {
                    for s in -3..=3i64 {
                        let sym = SphereSymbol {
                            rep: VirtualRep::new(
                                &g,
                                &h.name,
                                mults.iter().map(|&m| BigInt::from(m)).collect(),
                            )
                            .unwrap(),
                            s,
                        };
                        assert!(
                            dilation_relation_check(&g, &sym, &to.name).unwrap(),
                            "H={} G={} mults={mults:?} s={s}",
                            h.name,
                            to.name
                        );
                        checked += 1;
                    }
                    // advance the multiplicity grid over [-2, 2]
                    let mut i = 0;
                    loop {
                        if i == mults.len() {
                            break;
                        }
                        mults[i] += 1;
                        if mults[i] <= 2 {
                            break;
                        }
                        mults[i] = -2;
                        i += 1;
                    }
                    if i == mults.len() {
                        break;
                    }
                }
            }
        }
    }
    for g in [c2_ru(), c4_ru()] {
        g.validate().expect("complex stub invariants");
    }
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 5.0, "criterion 5 took {dt:?}");
    println!("criterion 5 (norm and dilation grid, {checked} symbols): PASS in {dt:?}");
}

fn random_support(g: &GroupData, seed: u64, ambient: &str) -> Vec<VirtualRep> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xd1);
    let idx = g.subgroup_index(ambient).unwrap();
    let nirr = g.subgroups[idx].irreducibles.len();
    let count = rng.gen_range(1..=3);
    let mut out = Vec::new();
    for _ in 0..count {
        let mults: Vec<BigInt> = (0..nirr).map(|_| BigInt::from(rng.gen_range(0..=2))).collect();
        let v = VirtualRep::new(g, ambient, mults).unwrap();
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

#[test]
fn criterion_6_total_and_dim_pullback() {
    let start = Instant::now();
    let params = TowerParams::default();
    let groups = [c2(), c4()];
    for seed in 0..20u64 {
        let g = &groups[(seed % 2) as usize];
        let ambient = g.top().name.clone();
        let support = random_support(g, seed, &ambient);

        // dim* of a constant tower is constant on the support (range wide
        // enough to contain every supported dimension)
        let value = random_tower(seed + 2000, &params).level(0);
        let z = FilteredComplex::constant(value.clone(), -9, 9);
        let ro = dim_pullback(g, &z, &support).unwrap();
        for (_, c) in &ro.entries {
            assert_eq!(c, &value, "seed {seed}");
        }
        for (_, _, f) in &ro.maps {
            assert_eq!(f, &ChainMap::identity(&value), "seed {seed}");
        }

        // counting identity: total(dim* Z)^n is the multiplicity-fold sum
        let t = random_tower(seed + 3000, &params);
        let ro = dim_pullback(g, &t, &support).unwrap();
        let tot = total(&ro).unwrap();
        let dims: Vec<i64> = ro.dims().unwrap();
        for n in tot.n0..=tot.n1 {
            let mult = dims.iter().filter(|&&d| d == n).count();
            for deg in -2..=12 {
                let got = homology(&tot.level(n), deg).group.invariants();
                let single = homology(&t.level(n), deg).group.invariants();
                assert_eq!(got.rank, mult * single.rank, "seed {seed} level {n} deg {deg}");
                assert_eq!(
                    got.torsion_order(),
                    num_traits::pow::pow(single.torsion_order(), mult),
                    "seed {seed} level {n} deg {deg}"
                );
            }
        }

        // level formula vs the direct-sum oracle, on the pulled-back data
        for n in tot.n0..=tot.n1 {
            let mut oracle = ChainComplex::zero();
            for (i, (_, c)) in ro.entries.iter().enumerate() {
                if dims[i] == n {
                    oracle = oracle.direct_sum(c);
                }
            }
            for deg in -2..=12 {
                assert_eq!(
                    homology(&tot.level(n), deg).group.invariants(),
                    homology(&oracle, deg).group.invariants(),
                    "seed {seed} level {n} deg {deg}"
                );
            }
        }
    }
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 5.0, "criterion 6 took {dt:?}");
    println!("criterion 6 (Total and dim-pullback identities): PASS in {dt:?}");
}

fn random_family(g: &GroupData, seed: u64, connective_e: bool) -> GeomFamily {
    let params = TowerParams::default();
    let mut members = std::collections::BTreeMap::new();
    for (i, sub) in g.subgroups.iter().enumerate() {
        let t = random_tower(seed * 31 + i as u64, &params);
        let t = if connective_e && sub.order == 1 {
            t.linear_cover(&Line::new(0, 1).unwrap())
        } else {
            t
        };
        members.insert(sub.name.clone(), FamilyMember::Tower(t));
    }
    GeomFamily { group: g.clone(), members }
}

#[test]
fn criterion_7_predicate_suite() {
    let start = Instant::now();
    let groups = [c2(), c4()];

    // slice implies O-slice on 100 random families
    for seed in 0..100u64 {
        let g = &groups[(seed % 2) as usize];
        let fam = random_family(g, seed, false);
        let s = slice_connective(&fam).unwrap();
        let o = o_slice_connective(&fam).unwrap();
        if s == Tri::Yes {
            assert_eq!(o, Tri::Yes, "seed {seed}");
        }
    }

    // restricted-line agreement: a y=0-connective trivial member makes the
    // two predicates agree
    for seed in 0..60u64 {
        let g = &groups[(seed % 2) as usize];
        let fam = random_family(g, seed, true);
        let s = slice_connective(&fam).unwrap();
        let o = o_slice_connective(&fam).unwrap();
        assert_eq!(s, o, "seed {seed}");
    }

    // gr-criterion vs direct pi-criterion on 100 strongly complete charts
    let params = TowerParams::default();
    let mut gr_checked = 0usize;
    for seed in 0..50u64 {
        let tower = random_tower(seed + 4000, &params);
        for line in [Line::new(0, 1).unwrap(), Line::new(1, 1).unwrap()] {
            let w = window_clearing_line(tower.natural_window(1), &line);
            for t in [tower.clone(), tower.linear_cover(&line)] {
                let ta = TowerAnalysis::new(&t);
                let c = ta.couple_data(w, 3);
                let gr = connectivity_via_gr(&c, &line).unwrap();
                let pi = c.tau_chart().vanishes_above(&line);
                assert_eq!(gr, pi, "seed {seed} line {line}");
                gr_checked += 1;
            }
        }
    }
    assert!(gr_checked >= 100);

    // cobar support bound
    for s in 0..=10i64 {
        assert_eq!(cobar_support_bound(&[2, 4, 8], s).unwrap(), 2 * s);
        assert_eq!(cobar_support_bound(&[3], s).unwrap(), 3 * s);
    }
    // as a chart predicate: t >= 2s means support y <= x for m = 2
    for x in 0..10i64 {
        for y in 0..10i64 {
            let t = x + y;
            let within = t >= 2 * y;
            assert_eq!(within, y <= x);
        }
    }

    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 30.0, "criterion 7 took {dt:?}");
    println!("criterion 7 (predicate suite, {gr_checked} gr-checks): PASS in {dt:?}");
}

#[test]
fn criterion_8_sufficient_criterion() {
    let start = Instant::now();
    let params = TowerParams::default();
    let line = Line::new(0, 1).unwrap();
    let mut held = 0usize;
    for seed in 0..50u64 {
        // construct a pair satisfying both hypotheses: target = random
        // tower, source = target plus junk that the thresholds kill
        let y = random_tower(seed + 5000, &params);
        let mut levels = Vec::new();
        let mut maps = Vec::new();
            for n in y.n0..=y.n1 {
            let junk = if n == y.n1 && seed % 2 == 1 {
                // homology two below the threshold: both the cell and its
                // suspension in the neighboring cone die under the cover
                ChainComplex::concentrated(line.cover_threshold(n) - 3, 1)
            } else if seed % 2 == 0 && n == y.n1 {
                // acyclic junk
                ChainComplex::two_term(5, 1)
            } else {
                ChainComplex::zero()
            };
            levels.push(y.level(n).direct_sum(&junk));
        }
        for n in y.n0..y.n1 {
            // structure map: original on the first block, zero on junk
            let src = &levels[(n + 1 - y.n0) as usize];
            let dst = &levels[(n - y.n0) as usize];
            let f0 = y.structure_map(n);
            let mut f = ChainMap::zero();
            let degs: std::collections::BTreeSet<i64> =
                src.ranks.keys().chain(dst.ranks.keys()).cloned().collect();
            for &i in &degs {
                let a = f0.component(i, &y.level(n + 1), &y.level(n));
                let rows = dst.rank(i);
                let cols = src.rank(i);
                if rows == 0 || cols == 0 {
                    continue;
                }
                let mut m = Matrix::zero(rows, cols);
                for r in 0..a.rows() {
                    for c in 0..a.cols() {
                        m[(r, c)] = a[(r, c)].clone();
                    }
                }
                if !m.is_zero() {
                    f.components.insert(i, m);
                }
            }
            maps.push(f);
        }
        let x = FilteredComplex { n0: y.n0, n1: y.n1, levels, maps };
        x.validate().unwrap();
        // the projection map x -> y
        let mut tm = TowerMap::default();
        for n in x.n0..=x.n1 {
            let mut f = ChainMap::zero();
            for (&i, &r) in y.level(n).ranks.iter() {
                if r == 0 {
                    continue;
                }
                let mut m = Matrix::zero(r, x.level(n).rank(i));
                for k in 0..r {
                    m[(k, k)] = BigInt::from(1);
                }
                f.components.insert(i, m);
            }
            tm.components.insert(n, f);
        }
        let holds = criterion_5_10(&tm, &x, &y, &line).unwrap();
        assert!(holds, "seed {seed}: constructed pair should satisfy the criterion");
        held += 1;
        // and the covers really are levelwise quasi-isomorphic (the engine
        // asserts this internally when the criterion holds; check the
        // invariants of both covers independently as well)
        let cx = x.linear_cover(&line);
        let cy = y.linear_cover(&line);
        for n in cx.n0.min(cy.n0)..=cx.n1.max(cy.n1) {
            for deg in -2..=12 {
                assert_eq!(
                    homology(&cx.level(n), deg).group.invariants(),
                    homology(&cy.level(n), deg).group.invariants(),
                    "seed {seed} level {n} deg {deg}"
                );
            }
        }
    }
    assert_eq!(held, 50);

    // sufficiency only: an engineered pair where the criterion fails but the
    // covers agree (doubling map on a tower whose thresholds kill everything)
    let c = ChainComplex::concentrated(0, 1);
    let x = FilteredComplex::constant(c, 3, 4);
    let mut double = ChainMap::default();
    double.components.insert(0, Matrix::from_i64(&[&[2]]));
    let tm = TowerMap { components: (3..=4).map(|n| (n, double.clone())).collect() };
    assert!(!criterion_5_10(&tm, &x, &x, &line).unwrap());
    let ca = x.linear_cover(&line);
    let cb = x.linear_cover(&line);
    for n in ca.n0..=ca.n1 {
        assert_eq!(ca.level(n), cb.level(n));
    }

    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 30.0, "criterion 8 took {dt:?}");
    println!("criterion 8 (sufficient cover criterion, {held} pairs): PASS in {dt:?}");
}
