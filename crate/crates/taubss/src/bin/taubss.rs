//! Command-line driver for charts of filtered spectra.
//!
//! Exit codes: 0 success / predicate holds / empty diff; 1 usage, parse, or
//! data error; 2 predicate fails / nonempty diff / verification failure;
//! 3 result indeterminate within the window.

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use taubss::chart::{diff_charts, TauChart, Tri};
use taubss::couple::pages_from_couple;
use taubss::cover;
use taubss::doc::{self, BssPagesDoc, Document, FilteredComplexDoc, RoFilteredDoc};
use taubss::equivariant;
use taubss::fcc::TowerAnalysis;
use taubss::grading::Line;
use taubss::render;

const EXIT_NO: u8 = 2;
const EXIT_INDET: u8 = 3;

#[derive(Parser)]
#[command(name = "taubss", version, about = "charts of filtered spectra: tau-Bockstein pages and linear connective covers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predict the full tau-Bockstein data of a linear connective cover.
    Cover {
        #[arg(long)]
        line: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the canonical chart map (cover -> input).
        #[arg(long)]
        map_out: Option<PathBuf>,
        /// Also write the drop records.
        #[arg(long)]
        drops_out: Option<PathBuf>,
    },
    /// Compute the cover of a filtered complex directly (the oracle path).
    CoverFcc {
        #[arg(long)]
        line: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Compute pages through this page.
        #[arg(long, default_value_t = 6)]
        pages: i64,
        /// Window "x0,x1,y0,y1" (default: natural window clearing the line).
        #[arg(long)]
        window: Option<String>,
    },
    /// Check the cover conditions for a candidate map document.
    Verify {
        #[arg(long)]
        line: String,
        #[arg(long = "map")]
        map: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Reindex a filtered complex by a dilation.
    Dilate {
        #[arg(long)]
        n: i64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tensor a filtered complex with a bigraded sphere.
    Shift {
        #[arg(long)]
        a: i64,
        #[arg(long)]
        s: i64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Collapse RO-indexed data to a filtered complex along the dimension.
    Total {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pull a filtered complex back along the dimension function.
    Dimstar {
        #[arg(long)]
        support: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Slice or O-slice connectivity of a geometric family.
    Check {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        family: PathBuf,
    },
    /// Compute tau-Bockstein pages of a filtered complex.
    Bss {
        #[arg(long, default_value_t = 4)]
        pages: i64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        window: Option<String>,
    },
    /// List the classes that drop to the line.
    Drops {
        #[arg(long)]
        line: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Does the E2 chart vanish above the line?
    Vanishing {
        #[arg(long)]
        line: String,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Compare two chart documents by Smith invariants and differential patterns.
    Diff {
        a: PathBuf,
        b: PathBuf,
        /// Restrict to stems "lo:hi".
        #[arg(long)]
        stems: Option<String>,
        /// Compare pages through this page.
        #[arg(long, default_value_t = 6)]
        pages: i64,
    },
    /// Render a chart document as SVG.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        line: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Resolve a path, consulting TAUBSS_FIXTURE_DIR for bare names.
fn resolve(path: &Path) -> PathBuf {
    if path.exists() {
        return path.to_path_buf();
    }
    if let Ok(dir) = std::env::var("TAUBSS_FIXTURE_DIR") {
        let candidate = Path::new(&dir).join(path);
        if candidate.exists() {
            return candidate;
        }
    }
    path.to_path_buf()
}

fn load(path: &Path) -> Result<Document, String> {
    let p = resolve(path);
    let text = std::fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))?;
    doc::parse(&text).map_err(|e| format!("{}: {e}", p.display()))
}

fn save(path: &Path, d: &Document) -> Result<(), String> {
    std::fs::write(path, doc::serialize(d)).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_line(s: &str) -> Result<Line, String> {
    Line::parse(s).map_err(|e| e.to_string())
}

fn parse_window(s: &str) -> Result<taubss::chart::Window, String> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    if parts.len() != 4 {
        return Err("window must be x0,x1,y0,y1".into());
    }
    Ok(taubss::chart::Window { x0: parts[0], x1: parts[1], y0: parts[2], y1: parts[3] })
}

fn expect_pages(d: Document, what: &str) -> Result<BssPagesDoc, String> {
    match d {
        Document::BssPages(p) => Ok(p),
        other => Err(format!("{what} must be a bss-pages document, found {}", other.kind())),
    }
}

fn expect_tower(d: Document, what: &str) -> Result<FilteredComplexDoc, String> {
    match d {
        Document::FilteredComplex(t) => Ok(t),
        other => Err(format!("{what} must be a filtered-complex document, found {}", other.kind())),
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Cover { line, input, out, map_out, drops_out } => {
            let line = parse_line(&line)?;
            let pd = expect_pages(load(&input)?, "--in")?;
            let y = pd.to_couple().map_err(|e| e.to_string())?;
            let predicted = cover::predict_cover(&y, &line).map_err(|e| e.to_string())?;
            let out_doc = BssPagesDoc::from_couple(&predicted.couple, &predicted.pages);
            save(&out, &Document::BssPages(out_doc.clone()))?;
            if let Some(p) = map_out {
                let map_doc = taubss::doc::ChartMapDoc {
                    line: Some(format!("{}/{}", line.p(), line.q())),
                    source: out_doc,
                    target: pd,
                    pi_maps: predicted
                        .map
                        .pi_maps
                        .iter()
                        .map(|(d, m)| taubss::doc::MapCell { x: d.x, y: d.y, matrix: m.clone() })
                        .collect(),
                    e2_maps: predicted
                        .map
                        .e2_maps
                        .iter()
                        .map(|(d, m)| taubss::doc::MapCell { x: d.x, y: d.y, matrix: m.clone() })
                        .collect(),
                };
                save(&p, &Document::ChartMap(map_doc))?;
            }
            if let Some(p) = drops_out {
                let text = serde_json::to_string_pretty(&predicted.drops).map_err(|e| e.to_string())?;
                std::fs::write(&p, text + "\n").map_err(|e| e.to_string())?;
            }
            println!(
                "cover: {} drops, {} differentials",
                predicted.drops.len(),
                predicted.pages.diffs.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::CoverFcc { line, input, out, pages, window } => {
            let line = parse_line(&line)?;
            let td = expect_tower(load(&input)?, "--in")?;
            let tower = td.to_tower().map_err(|e| e.to_string())?;
            let cov = tower.linear_cover(&line);
            let w = match window {
                Some(s) => parse_window(&s)?,
                None => window_clearing(&tower, &line),
            };
            let ta = TowerAnalysis::new(&cov);
            let c = ta.couple_data(w, pages);
            let p = pages_from_couple(&c, pages).map_err(|e| e.to_string())?;
            save(&out, &Document::BssPages(BssPagesDoc::from_couple(&c, &p)))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { line, map, report } => {
            let line = parse_line(&line)?;
            let Document::ChartMap(md) = load(&map)? else {
                return Err("--map must be a chart-map document".into());
            };
            let (_, src, dst, cmap) = md.to_parts().map_err(|e| e.to_string())?;
            let rep = cover::verify_cover_map(&src, &dst, &cmap, &line).map_err(|e| e.to_string())?;
            if let Some(p) = report {
                let text = serde_json::to_string_pretty(&rep).map_err(|e| e.to_string())?;
                std::fs::write(&p, text + "\n").map_err(|e| e.to_string())?;
            }
            let statuses = [
                ("well-formed", &rep.well_formed),
                ("strong-completeness", &rep.strong_completeness),
                ("mod-tau-vanishing", &rep.mod_tau_vanishing),
                ("tau-inverted", &rep.tau_inverted),
                ("page-iso-image", &rep.page_iso_image),
                ("page-kernel", &rep.page_kernel),
            ];
            for (name, c) in &statuses {
                println!("{name}: {:?}", c.status);
                for w in c.witnesses.iter().take(8) {
                    println!("  - {w}");
                }
                if c.witnesses.len() > 8 {
                    println!("  ... and {} more", c.witnesses.len() - 8);
                }
            }
            if rep.all_pass() {
                Ok(ExitCode::SUCCESS)
            } else if statuses.iter().any(|(_, c)| c.status == Tri::No) {
                Ok(ExitCode::from(EXIT_NO))
            } else {
                Ok(ExitCode::from(EXIT_INDET))
            }
        }
        Command::Dilate { n, input, out } => {
            if n < 1 {
                return Err("dilation factor must be at least 1".into());
            }
            let td = expect_tower(load(&input)?, "--in")?;
            let t = td.to_tower().map_err(|e| e.to_string())?;
            save(&out, &Document::FilteredComplex(FilteredComplexDoc::from_tower(&t.dilate(n))))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Shift { a, s, input, out } => {
            let td = expect_tower(load(&input)?, "--in")?;
            let t = td.to_tower().map_err(|e| e.to_string())?;
            save(&out, &Document::FilteredComplex(FilteredComplexDoc::from_tower(&t.shift(a, s))))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Total { input, out } => {
            let Document::RoFiltered(rd) = load(&input)? else {
                return Err("--in must be an ro-filtered document".into());
            };
            let ro = rd.to_ro().map_err(|e| e.to_string())?;
            let t = equivariant::total(&ro).map_err(|e| e.to_string())?;
            save(&out, &Document::FilteredComplex(FilteredComplexDoc::from_tower(&t)))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Dimstar { support, input, out } => {
            let Document::RepList(rl) = load(&support)? else {
                return Err("--support must be a rep-list document".into());
            };
            let (group, reps) = rl.to_reps().map_err(|e| e.to_string())?;
            let td = expect_tower(load(&input)?, "--in")?;
            let t = td.to_tower().map_err(|e| e.to_string())?;
            let ro = equivariant::dim_pullback(&group, &t, &reps).map_err(|e| e.to_string())?;
            let gref = rl.group.clone();
            save(&out, &Document::RoFiltered(RoFilteredDoc::from_ro(&ro, gref)))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { kind, family } => {
            let Document::GeomFamily(fd) = load(&family)? else {
                return Err("--family must be a geom-family document".into());
            };
            let fam = fd.to_family().map_err(|e| e.to_string())?;
            let result = match kind.as_str() {
                "slice" => equivariant::slice_connective(&fam),
                "o-slice" => equivariant::o_slice_connective(&fam),
                other => return Err(format!("unknown kind {other:?}; use slice or o-slice")),
            }
            .map_err(|e| e.to_string())?;
            for sub in &fam.group.subgroups {
                if kind == "o-slice" && sub.order == 1 {
                    continue;
                }
                if let Some(member) = fam.members.get(&sub.name) {
                    let slope = sub.order as i64 - 1;
                    let l = Line::new(slope, 1).map_err(|e| e.to_string())?;
                    let tri = equivariant::member_connectivity(member, &l).map_err(|e| e.to_string())?;
                    println!("{}: {:?} (line y = {}x)", sub.name, tri, slope);
                }
            }
            println!("{kind}-connective: {result:?}");
            Ok(match result {
                Tri::Yes => ExitCode::SUCCESS,
                Tri::No => ExitCode::from(EXIT_NO),
                Tri::Indeterminate => ExitCode::from(EXIT_INDET),
            })
        }
        Command::Bss { pages, input, out, window } => {
            let td = expect_tower(load(&input)?, "--in")?;
            let t = td.to_tower().map_err(|e| e.to_string())?;
            let w = match window {
                Some(s) => parse_window(&s)?,
                None => t.natural_window(1),
            };
            let d = doc::tower_to_pages_doc(&t, w, pages).map_err(|e| e.to_string())?;
            save(&out, &Document::BssPages(d))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Drops { line, input, out } => {
            let line = parse_line(&line)?;
            let pd = expect_pages(load(&input)?, "--in")?;
            let y = pd.to_couple().map_err(|e| e.to_string())?;
            let (drops, indet) = cover::find_drops(&y, &line);
            for d in &drops {
                println!(
                    "{} at {} drops with l = {} (torsion height {})",
                    d.gen_name,
                    d.degree,
                    d.drop_length,
                    d.torsion_height.map_or("infinite".to_string(), |h| h.to_string()),
                );
            }
            for (deg, name) in &indet {
                println!("{name} at {deg}: indeterminate");
            }
            if let Some(p) = out {
                let text = serde_json::to_string_pretty(&drops).map_err(|e| e.to_string())?;
                std::fs::write(&p, text + "\n").map_err(|e| e.to_string())?;
            }
            Ok(if indet.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_INDET) })
        }
        Command::Vanishing { line, input } => {
            let line = parse_line(&line)?;
            let pd = expect_pages(load(&input)?, "--in")?;
            let (pages, _, _) = pd.to_parts().map_err(|e| e.to_string())?;
            let ok = cover::vanishing_line_check(&pages, &line);
            println!("vanishes above {line}: {ok}");
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(EXIT_NO) })
        }
        Command::Diff { a, b, stems, pages } => {
            let stems = match stems {
                None => None,
                Some(s) => {
                    let (lo, hi) = s
                        .split_once(':')
                        .ok_or_else(|| "stems must be lo:hi".to_string())?;
                    Some((
                        lo.trim().parse::<i64>().map_err(|e| e.to_string())?,
                        hi.trim().parse::<i64>().map_err(|e| e.to_string())?,
                    ))
                }
            };
            let da = load(&a)?;
            let db = load(&b)?;
            let (pa, pb) = match (da, db) {
                (Document::BssPages(x), Document::BssPages(y)) => (x, y),
                (Document::TauChart(x), Document::TauChart(y)) => {
                    let ca = x.to_chart().map_err(|e| e.to_string())?;
                    let cb = y.to_chart().map_err(|e| e.to_string())?;
                    let report = diff_chart_only(&ca, &cb, stems)?;
                    return finish_diff(report);
                }
                _ => return Err("diff needs two documents of the same chart kind".into()),
            };
            let (pages_a, chart_a, _) = pa.to_parts().map_err(|e| e.to_string())?;
            let (pages_b, chart_b, _) = pb.to_parts().map_err(|e| e.to_string())?;
            let ca = chart_a.unwrap_or_else(|| empty_chart(pages_a.window));
            let cb = chart_b.unwrap_or_else(|| empty_chart(pages_b.window));
            let report = diff_charts(&(ca, pages_a), &(cb, pages_b), pages, stems)
                .map_err(|e| e.to_string())?;
            finish_diff(report)
        }
        Command::Render { input, out, line } => {
            let line = match line {
                Some(s) => Some(parse_line(&s)?),
                None => None,
            };
            let svg = match load(&input)? {
                Document::TauChart(cd) => {
                    let chart = cd.to_chart().map_err(|e| e.to_string())?;
                    render::render_tau_chart(&chart, line.as_ref(), "tau chart")
                }
                Document::BssPages(pd) => {
                    let (pages, chart, _) = pd.to_parts().map_err(|e| e.to_string())?;
                    render::render_pages(&pages, chart.as_ref(), line.as_ref(), "tau-Bockstein pages")
                }
                other => return Err(format!("cannot render a {} document", other.kind())),
            };
            std::fs::write(&out, svg).map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn empty_chart(w: taubss::chart::Window) -> TauChart {
    TauChart { window: Some(w), ..Default::default() }
}

fn diff_chart_only(
    a: &TauChart,
    b: &TauChart,
    stems: Option<(i64, i64)>,
) -> Result<taubss::chart::DiffReport, String> {
    let wa = a.window().intersect(&b.window());
    let mut report = taubss::chart::DiffReport::default();
    for d in wa.degrees() {
        if let Some((lo, hi)) = stems {
            if d.x < lo || d.x > hi {
                continue;
            }
        }
        if a.group_at(d).invariants() != b.group_at(d).invariants() {
            report.chart_degrees.push(d);
        }
    }
    Ok(report)
}

fn finish_diff(report: taubss::chart::DiffReport) -> Result<ExitCode, String> {
    if report.is_empty() {
        println!("identical");
        Ok(ExitCode::SUCCESS)
    } else {
        for d in &report.chart_degrees {
            println!("pi differs at {d}");
        }
        for (r, d) in &report.page_degrees {
            println!("page {r} differs at {d}");
        }
        for (r, d) in &report.differential_sources {
            println!("d_{r} differs at {d}");
        }
        for n in &report.notes {
            println!("note: {n}");
        }
        Ok(ExitCode::from(EXIT_NO))
    }
}

fn window_clearing(t: &taubss::fcc::FilteredComplex, line: &Line) -> taubss::chart::Window {
    let mut w = t.natural_window(1);
    let mf = (w.x0..=w.x1).map(|x| line.floor_alpha_x(x)).max().unwrap_or(w.y1);
    if mf >= w.y1 {
        w.y1 = mf + 1;
    }
    let lo = (w.x0..=w.x1).map(|x| line.floor_alpha_x(x)).min().unwrap_or(w.y0);
    if lo < w.y0 {
        w.y0 = lo;
    }
    w
}
