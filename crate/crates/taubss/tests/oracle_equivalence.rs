//! The central property: on random filtered complexes, the predicted cover
//! data must agree with the cover computed directly at the chain level, for
//! every test line.

use taubss::chart::{diff_charts, Window};
use taubss::cover::{predict_cover, verify_cover_map, CoverError};
use taubss::fcc::TowerAnalysis;
use taubss::grading::Line;
use taubss::random_towers::{random_tower, TowerParams};

fn test_lines() -> Vec<Line> {
    [(0, 1), (1, 2), (1, 1), (3, 2), (2, 1), (3, 1)]
        .into_iter()
        .map(|(p, q)| Line::new(p, q).unwrap())
        .collect()
}

fn window_clearing_line(w: Window, line: &Line) -> Window {
    let mut w = w;
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
fn oracle_equivalence_sample() {
    let params = TowerParams::default();
    let mut checked = 0usize;
    for seed in 0..25u64 {
        let tower = random_tower(seed, &params);
        let max_page = (tower.n1 - tower.n0 + 1).max(2);
        for line in test_lines() {
            let w = window_clearing_line(tower.natural_window(1), &line);
            let ta = TowerAnalysis::new(&tower);
            let y = ta.couple_data(w, max_page);
            let predicted = match predict_cover(&y, &line) {
                Ok(p) => p,
                Err(CoverError::Window(_)) | Err(CoverError::Indeterminate(_)) => continue,
                Err(e) => panic!("seed {seed} line {line}: {e}"),
            };
            let cover = tower.linear_cover(&line);
            cover.validate().unwrap();
            let ca = TowerAnalysis::new(&cover);
            let oracle_chart = ca.homotopy_chart(w);
            let oracle_pages = ca.bss_pages(w, max_page).unwrap();
            let through = max_page.min(6).max(3);
            let report = diff_charts(
                &(predicted.chart.clone(), predicted.pages.clone()),
                &(oracle_chart, oracle_pages),
                through,
                None,
            )
            .unwrap();
            assert!(
                report.is_empty(),
                "seed {seed} line {line}: predicted and oracle covers differ: {report:#?}"
            );
            // the engine is self-consistent under its own verifier
            let vreport = verify_cover_map(&predicted.couple, &y, &predicted.map, &line).unwrap();
            assert!(vreport.all_pass(), "seed {seed} line {line}: {vreport:#?}");
            checked += 1;
        }
    }
    assert!(checked > 100, "too few instances checked: {checked}");
}
