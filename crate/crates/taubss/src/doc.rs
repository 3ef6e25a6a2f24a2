//! The self-describing document schema: one JSON envelope with a `kind`
//! discriminator for every file the CLI reads or writes. Parsing is strict
//! (unknown fields rejected, integers arbitrary precision); serialization is
//! canonical (alphabetical keys, stable list orders), so equal documents
//! serialize to identical bytes.

use crate::chart::{BssPages, Entry, GenInfo, StructureLine, TauChart, Window};
use crate::couple::{couple_from_parts, CoupleData};
use crate::equivariant::{FamilyMember, GeomFamily, ROFiltered, SphereSymbol};
use crate::fcc::{ChainComplex, ChainMap, FilteredComplex, TowerAnalysis};
use crate::grading::{GroupData, Line, VirtualRep};
use crate::matrix::Matrix;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported schema version {0}")]
    Version(u32),
    #[error("expected a {expected} document, found {found}")]
    WrongKind { expected: String, found: String },
    #[error("invalid document: {0}")]
    Invalid(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    kind: String,
    payload: serde_json::Value,
    schema_version: u32,
}

/// Typed documents.
#[derive(Clone, Debug)]
pub enum Document {
    TauChart(TauChartDoc),
    BssPages(BssPagesDoc),
    FilteredComplex(FilteredComplexDoc),
    GeomFamily(GeomFamilyDoc),
    RoFiltered(RoFilteredDoc),
    GroupData(GroupData),
    SphereSymbol(SphereSymbolDoc),
    ChartMap(ChartMapDoc),
    RepList(RepListDoc),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::TauChart(_) => "tau-chart",
            Document::BssPages(_) => "bss-pages",
            Document::FilteredComplex(_) => "filtered-complex",
            Document::GeomFamily(_) => "geom-family",
            Document::RoFiltered(_) => "ro-filtered",
            Document::GroupData(_) => "group-data",
            Document::SphereSymbol(_) => "sphere-symbol",
            Document::ChartMap(_) => "chart-map",
            Document::RepList(_) => "rep-list",
        }
    }
}

pub fn parse(text: &str) -> Result<Document, DocError> {
    let env: Envelope = serde_json::from_str(text).map_err(|e| DocError::Parse(e.to_string()))?;
    if env.schema_version != SCHEMA_VERSION {
        return Err(DocError::Version(env.schema_version));
    }
    let doc = match env.kind.as_str() {
        "tau-chart" => Document::TauChart(from_value(env.payload)?),
        "bss-pages" => Document::BssPages(from_value(env.payload)?),
        "filtered-complex" => Document::FilteredComplex(from_value(env.payload)?),
        "geom-family" => Document::GeomFamily(from_value(env.payload)?),
        "ro-filtered" => Document::RoFiltered(from_value(env.payload)?),
        "group-data" => Document::GroupData(from_value(env.payload)?),
        "sphere-symbol" => Document::SphereSymbol(from_value(env.payload)?),
        "chart-map" => Document::ChartMap(from_value(env.payload)?),
        "rep-list" => Document::RepList(from_value(env.payload)?),
        other => {
            return Err(DocError::Parse(format!("unknown document kind {other:?}")));
        }
    };
    validate(&doc)?;
    Ok(doc)
}

fn from_value<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Result<T, DocError> {
    serde_json::from_value(v).map_err(|e| DocError::Parse(e.to_string()))
}

pub fn serialize(doc: &Document) -> String {
    let payload = match doc {
        Document::TauChart(d) => serde_json::to_value(d),
        Document::BssPages(d) => serde_json::to_value(d),
        Document::FilteredComplex(d) => serde_json::to_value(d),
        Document::GeomFamily(d) => serde_json::to_value(d),
        Document::RoFiltered(d) => serde_json::to_value(d),
        Document::GroupData(d) => serde_json::to_value(d),
        Document::SphereSymbol(d) => serde_json::to_value(d),
        Document::ChartMap(d) => serde_json::to_value(d),
        Document::RepList(d) => serde_json::to_value(d),
    }
    .expect("documents serialize");
    let env = Envelope {
        kind: doc.kind().to_string(),
        payload,
        schema_version: SCHEMA_VERSION,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("envelope serializes");
    s.push('\n');
    s
}

fn validate(doc: &Document) -> Result<(), DocError> {
    match doc {
        Document::TauChart(d) => {
            d.to_chart()?;
        }
        Document::BssPages(d) => {
            d.to_parts()?;
        }
        Document::FilteredComplex(d) => {
            d.to_tower()?;
        }
        Document::GroupData(g) => {
            g.validate().map_err(|e| DocError::Invalid(e.to_string()))?;
        }
        Document::GeomFamily(d) => {
            d.to_family()?;
        }
        Document::RoFiltered(d) => {
            d.to_ro()?;
        }
        Document::SphereSymbol(d) => {
            d.to_symbol()?;
        }
        Document::ChartMap(d) => {
            d.to_parts()?;
        }
        Document::RepList(d) => {
            d.to_reps()?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// shared fragments
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupCell {
    pub x: i64,
    pub y: i64,
    pub gens: Vec<GenInfo>,
    /// relation vectors, one per relation, each with one entry per generator
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rels: Vec<RelVec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelVec(#[serde(with = "crate::jsonnum::vec")] pub Vec<BigInt>);

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapCell {
    pub x: i64,
    pub y: i64,
    #[serde(with = "crate::jsonnum::mat")]
    pub matrix: Matrix,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffCell {
    pub page: i64,
    pub x: i64,
    pub y: i64,
    #[serde(with = "crate::jsonnum::mat")]
    pub matrix: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
}

fn entry_from_cell(cell: &GroupCell) -> Result<Entry, DocError> {
    let g = cell.gens.len();
    for r in &cell.rels {
        if r.0.len() != g {
            return Err(DocError::Invalid(format!(
                "relation length {} does not match {} generators at ({}, {})",
                r.0.len(),
                g,
                cell.x,
                cell.y
            )));
        }
    }
    let rels = Matrix::from_cols(cell.rels.iter().map(|r| r.0.clone()).collect(), g);
    Ok(Entry::new(cell.gens.clone(), rels))
}

fn cell_from_entry(d: crate::grading::Degree, e: &Entry) -> GroupCell {
    let rels = (0..e.group.rels().cols())
        .map(|j| RelVec(e.group.rels().col(j)))
        .collect();
    GroupCell { x: d.x, y: d.y, gens: e.gens.clone(), rels }
}

fn parse_line_opt(s: &Option<String>) -> Result<Option<Line>, DocError> {
    match s {
        None => Ok(None),
        Some(t) => Line::parse(t).map(Some).map_err(|e| DocError::Invalid(e.to_string())),
    }
}

// ---------------------------------------------------------------------------
// tau-chart
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauChartDoc {
    pub window: Window,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stable_below_level: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stable_above_level: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vanish_above_line: Option<String>,
    pub groups: Vec<GroupCell>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tau: Vec<MapCell>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub structure_lines: Vec<StructureLine>,
}

impl TauChartDoc {
    pub fn to_chart(&self) -> Result<TauChart, DocError> {
        let mut chart = TauChart {
            window: Some(self.window),
            stable_below_level: self.stable_below_level,
            stable_above_level: self.stable_above_level,
            vanish_above_line: parse_line_opt(&self.vanish_above_line)?,
            structure_lines: self.structure_lines.clone(),
            ..Default::default()
        };
        for cell in &self.groups {
            let d = crate::grading::Degree::new(cell.x, cell.y);
            if chart.entries.contains_key(&d) {
                return Err(DocError::Invalid(format!("duplicate group cell at {d}")));
            }
            chart.entries.insert(d, entry_from_cell(cell)?);
        }
        for m in &self.tau {
            let d = crate::grading::Degree::new(m.x, m.y);
            chart.tau.insert(d, m.matrix.clone());
        }
        chart.validate().map_err(|e| DocError::Invalid(e.to_string()))?;
        // structure lines: endpoints must name existing generators
        for sl in &self.structure_lines {
            for (deg, name) in [(sl.from, &sl.from_gen), (sl.to, &sl.to_gen)] {
                let gens = chart.gens_at(deg);
                if !gens.iter().any(|g| &g.name == name) {
                    return Err(DocError::Invalid(format!(
                        "structure line references missing generator {name:?} at {deg}"
                    )));
                }
            }
        }
        Ok(chart)
    }

    pub fn from_chart(chart: &TauChart) -> TauChartDoc {
        TauChartDoc {
            window: chart.window(),
            stable_below_level: chart.stable_below_level,
            stable_above_level: chart.stable_above_level,
            vanish_above_line: chart.vanish_above_line.map(|l| format!("{}/{}", l.p(), l.q())),
            groups: chart.entries.iter().map(|(d, e)| cell_from_entry(*d, e)).collect(),
            tau: chart
                .tau
                .iter()
                .map(|(d, m)| MapCell { x: d.x, y: d.y, matrix: m.clone() })
                .collect(),
            structure_lines: chart.structure_lines.clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// bss-pages
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BssPagesDoc {
    pub window: Window,
    pub max_page: i64,
    pub no_more_differentials: bool,
    pub window_complete: bool,
    pub e2: Vec<GroupCell>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub differentials: Vec<DiffCell>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub projections: Vec<MapCell>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boundaries: Vec<MapCell>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_chart: Option<TauChartDoc>,
}

impl BssPagesDoc {
    /// Pages plus the optional companion chart and boundary matrices.
    pub fn to_parts(&self) -> Result<(BssPages, Option<TauChart>, BTreeMap<crate::grading::Degree, Matrix>), DocError> {
        let mut pages = BssPages::empty(self.window);
        pages.max_page = self.max_page;
        pages.no_more_differentials = self.no_more_differentials;
        pages.window_complete = self.window_complete;
        if self.max_page < 2 {
            return Err(DocError::Invalid("max_page must be at least 2".into()));
        }
        for cell in &self.e2 {
            let d = crate::grading::Degree::new(cell.x, cell.y);
            if pages.e2.contains_key(&d) {
                return Err(DocError::Invalid(format!("duplicate E2 cell at {d}")));
            }
            pages.e2.insert(d, entry_from_cell(cell)?);
        }
        for df in &self.differentials {
            let d = crate::grading::Degree::new(df.x, df.y);
            if df.page < 2 || df.page > self.max_page {
                return Err(DocError::Invalid(format!(
                    "differential page {} out of range at {d}",
                    df.page
                )));
            }
            pages.diffs.insert((df.page, d), df.matrix.clone());
            if let Some(o) = &df.origin {
                pages.origins.insert((df.page, d), o.clone());
            }
        }
        for m in &self.projections {
            pages
                .projections
                .insert(crate::grading::Degree::new(m.x, m.y), m.matrix.clone());
        }
        let chart = match &self.tau_chart {
            Some(c) => Some(c.to_chart()?),
            None => None,
        };
        let mut bnd = BTreeMap::new();
        for m in &self.boundaries {
            bnd.insert(crate::grading::Degree::new(m.x, m.y), m.matrix.clone());
        }
        // page tower must run (validates differential shapes and d o d = 0)
        crate::chart::PageTower::run(&pages, self.max_page)
            .map_err(|e| DocError::Invalid(e.to_string()))?;
        Ok((pages, chart, bnd))
    }

    /// Couple data, requiring the companion chart.
    pub fn to_couple(&self) -> Result<CoupleData, DocError> {
        let (pages, chart, bnd) = self.to_parts()?;
        let chart = chart.ok_or_else(|| {
            DocError::Invalid("this operation needs the embedded tau_chart".into())
        })?;
        Ok(couple_from_parts(&chart, &pages, &bnd))
    }

    pub fn from_parts(
        pages: &BssPages,
        chart: Option<&TauChart>,
        bnd: &BTreeMap<crate::grading::Degree, Matrix>,
    ) -> BssPagesDoc {
        BssPagesDoc {
            window: pages.window,
            max_page: pages.max_page,
            no_more_differentials: pages.no_more_differentials,
            window_complete: pages.window_complete,
            e2: pages.e2.iter().map(|(d, e)| cell_from_entry(*d, e)).collect(),
            differentials: pages
                .diffs
                .iter()
                .map(|((r, d), m)| DiffCell {
                    page: *r,
                    x: d.x,
                    y: d.y,
                    matrix: m.clone(),
                    origin: pages.origins.get(&(*r, *d)).cloned(),
                })
                .collect(),
            projections: pages
                .projections
                .iter()
                .map(|(d, m)| MapCell { x: d.x, y: d.y, matrix: m.clone() })
                .collect(),
            boundaries: bnd
                .iter()
                .map(|(d, m)| MapCell { x: d.x, y: d.y, matrix: m.clone() })
                .collect(),
            tau_chart: chart.map(TauChartDoc::from_chart),
        }
    }

    pub fn from_couple(c: &CoupleData, pages: &BssPages) -> BssPagesDoc {
        BssPagesDoc::from_parts(pages, Some(&c.tau_chart()), &c.bnd)
    }
}

// ---------------------------------------------------------------------------
// filtered-complex
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegRank {
    pub i: i64,
    pub rank: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegMat {
    pub i: i64,
    #[serde(with = "crate::jsonnum::mat")]
    pub matrix: Matrix,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDoc {
    pub degrees: Vec<DegRank>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub differentials: Vec<DegMat>,
}

impl ComplexDoc {
    pub fn to_complex(&self) -> Result<ChainComplex, DocError> {
        let mut c = ChainComplex::zero();
        for d in &self.degrees {
            if d.rank > 0 {
                c.ranks.insert(d.i, d.rank);
            }
        }
        for m in &self.differentials {
            c.diffs.insert(m.i, m.matrix.clone());
        }
        c.validate().map_err(|e| DocError::Invalid(e.to_string()))?;
        Ok(c)
    }

    pub fn from_complex(c: &ChainComplex) -> ComplexDoc {
        ComplexDoc {
            degrees: c
                .ranks
                .iter()
                .filter(|(_, r)| **r > 0)
                .map(|(i, r)| DegRank { i: *i, rank: *r })
                .collect(),
            differentials: c
                .diffs
                .iter()
                .filter(|(_, m)| !m.is_zero())
                .map(|(i, m)| DegMat { i: *i, matrix: m.clone() })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelDoc {
    pub n: i64,
    #[serde(flatten)]
    pub complex: ComplexDoc,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelMapDoc {
    /// target level: the map goes from level `n+1` into level `n`
    pub n: i64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<DegMat>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilteredComplexDoc {
    pub n0: i64,
    pub n1: i64,
    pub levels: Vec<LevelDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub maps: Vec<LevelMapDoc>,
}

impl FilteredComplexDoc {
    pub fn to_tower(&self) -> Result<FilteredComplex, DocError> {
        if self.n0 > self.n1 {
            return Err(DocError::Invalid("n0 must be at most n1".into()));
        }
        let mut levels = Vec::new();
        for n in self.n0..=self.n1 {
            let doc = self
                .levels
                .iter()
                .find(|l| l.n == n)
                .ok_or_else(|| DocError::Invalid(format!("missing level {n}")))?;
            levels.push(doc.complex.to_complex()?);
        }
        let mut maps = Vec::new();
        for n in self.n0..self.n1 {
            let mut f = ChainMap::zero();
            if let Some(doc) = self.maps.iter().find(|m| m.n == n) {
                for c in &doc.components {
                    f.components.insert(c.i, c.matrix.clone());
                }
            }
            maps.push(f);
        }
        let t = FilteredComplex { n0: self.n0, n1: self.n1, levels, maps };
        t.validate().map_err(|e| DocError::Invalid(e.to_string()))?;
        Ok(t)
    }

    pub fn from_tower(t: &FilteredComplex) -> FilteredComplexDoc {
        FilteredComplexDoc {
            n0: t.n0,
            n1: t.n1,
            levels: (t.n0..=t.n1)
                .map(|n| LevelDoc { n, complex: ComplexDoc::from_complex(&t.level(n)) })
                .collect(),
            maps: (t.n0..t.n1)
                .filter_map(|n| {
                    let f = t.structure_map(n);
                    if f.components.is_empty() {
                        None
                    } else {
                        Some(LevelMapDoc {
                            n,
                            components: f
                                .components
                                .iter()
                                .map(|(i, m)| DegMat { i: *i, matrix: m.clone() })
                                .collect(),
                        })
                    }
                })
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// groups in documents
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupRef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<GroupData>,
}

impl GroupRef {
    pub fn named(name: &str) -> GroupRef {
        GroupRef { name: Some(name.to_string()), data: None }
    }

    pub fn resolve(&self) -> Result<GroupData, DocError> {
        if let Some(d) = &self.data {
            d.validate().map_err(|e| DocError::Invalid(e.to_string()))?;
            return Ok(d.clone());
        }
        if let Some(n) = &self.name {
            return crate::groups::by_name(n)
                .ok_or_else(|| DocError::Invalid(format!("unknown group name {n:?}")));
        }
        Err(DocError::Invalid("group reference needs a name or inline data".into()))
    }
}

// ---------------------------------------------------------------------------
// geom-family
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberDoc {
    pub subgroup: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tower: Option<FilteredComplexDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<BssPagesDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeomFamilyDoc {
    pub group: GroupRef,
    pub members: Vec<MemberDoc>,
}

impl GeomFamilyDoc {
    pub fn to_family(&self) -> Result<GeomFamily, DocError> {
        let group = self.group.resolve()?;
        let mut members = BTreeMap::new();
        for m in &self.members {
            group
                .subgroup_index(&m.subgroup)
                .map_err(|e| DocError::Invalid(e.to_string()))?;
            let member = match (&m.tower, &m.chart) {
                (Some(t), None) => FamilyMember::Tower(t.to_tower()?),
                (None, Some(c)) => FamilyMember::Chart(c.to_couple()?),
                _ => {
                    return Err(DocError::Invalid(format!(
                        "member {} must have exactly one of tower or chart",
                        m.subgroup
                    )))
                }
            };
            members.insert(m.subgroup.clone(), member);
        }
        Ok(GeomFamily { group, members })
    }
}

// ---------------------------------------------------------------------------
// ro-filtered
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoEntryDoc {
    #[serde(with = "crate::jsonnum::vec")]
    pub mults: Vec<BigInt>,
    #[serde(flatten)]
    pub complex: ComplexDoc,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoMapDoc {
    pub from: usize,
    pub to: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<DegMat>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoFilteredDoc {
    pub group: GroupRef,
    pub ambient: String,
    pub entries: Vec<RoEntryDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub maps: Vec<RoMapDoc>,
}

impl RoFilteredDoc {
    pub fn to_ro(&self) -> Result<ROFiltered, DocError> {
        let group = self.group.resolve()?;
        let mut entries = Vec::new();
        for e in &self.entries {
            let rep = VirtualRep::new(&group, &self.ambient, e.mults.clone())
                .map_err(|e| DocError::Invalid(e.to_string()))?;
            entries.push((rep, e.complex.to_complex()?));
        }
        let mut maps = Vec::new();
        for m in &self.maps {
            if m.from >= entries.len() || m.to >= entries.len() {
                return Err(DocError::Invalid("map index out of range".into()));
            }
            let mut f = ChainMap::zero();
            for c in &m.components {
                f.components.insert(c.i, c.matrix.clone());
            }
            maps.push((m.from, m.to, f));
        }
        let ro = ROFiltered { group, ambient: self.ambient.clone(), entries, maps };
        ro.validate().map_err(|e| DocError::Invalid(e.to_string()))?;
        Ok(ro)
    }

    pub fn from_ro(ro: &ROFiltered, group_ref: GroupRef) -> RoFilteredDoc {
        RoFilteredDoc {
            group: group_ref,
            ambient: ro.ambient.clone(),
            entries: ro
                .entries
                .iter()
                .map(|(v, c)| RoEntryDoc { mults: v.mults.clone(), complex: ComplexDoc::from_complex(c) })
                .collect(),
            maps: ro
                .maps
                .iter()
                .map(|(from, to, f)| RoMapDoc {
                    from: *from,
                    to: *to,
                    components: f
                        .components
                        .iter()
                        .map(|(i, m)| DegMat { i: *i, matrix: m.clone() })
                        .collect(),
                })
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// sphere-symbol, rep-list
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereSymbolDoc {
    pub group: GroupRef,
    pub ambient: String,
    #[serde(with = "crate::jsonnum::vec")]
    pub mults: Vec<BigInt>,
    pub s: i64,
}

impl SphereSymbolDoc {
    pub fn to_symbol(&self) -> Result<(GroupData, SphereSymbol), DocError> {
        let group = self.group.resolve()?;
        let rep = VirtualRep::new(&group, &self.ambient, self.mults.clone())
            .map_err(|e| DocError::Invalid(e.to_string()))?;
        Ok((group, SphereSymbol { rep, s: self.s }))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepListDoc {
    pub group: GroupRef,
    pub ambient: String,
    pub reps: Vec<RelVec>,
}

impl RepListDoc {
    pub fn to_reps(&self) -> Result<(GroupData, Vec<VirtualRep>), DocError> {
        let group = self.group.resolve()?;
        let reps = self
            .reps
            .iter()
            .map(|r| {
                VirtualRep::new(&group, &self.ambient, r.0.clone())
                    .map_err(|e| DocError::Invalid(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((group, reps))
    }
}

// ---------------------------------------------------------------------------
// chart-map
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartMapDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<String>,
    pub source: BssPagesDoc,
    pub target: BssPagesDoc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pi_maps: Vec<MapCell>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub e2_maps: Vec<MapCell>,
}

impl ChartMapDoc {
    pub fn to_parts(&self) -> Result<(Option<Line>, CoupleData, CoupleData, crate::chart::ChartMap), DocError> {
        let line = parse_line_opt(&self.line)?;
        let src = self.source.to_couple()?;
        let dst = self.target.to_couple()?;
        let map = crate::chart::ChartMap {
            pi_maps: self
                .pi_maps
                .iter()
                .map(|m| (crate::grading::Degree::new(m.x, m.y), m.matrix.clone()))
                .collect(),
            e2_maps: self
                .e2_maps
                .iter()
                .map(|m| (crate::grading::Degree::new(m.x, m.y), m.matrix.clone()))
                .collect(),
        };
        Ok((line, src, dst, map))
    }
}

/// Compute chart and pages of a tower and package them as one document.
pub fn tower_to_pages_doc(t: &FilteredComplex, window: Window, max_page: i64) -> Result<BssPagesDoc, DocError> {
    let ta = TowerAnalysis::new(t);
    let c = ta.couple_data(window, max_page);
    let pages = crate::couple::pages_from_couple(&c, max_page)
        .map_err(DocError::Invalid)?;
    Ok(BssPagesDoc::from_couple(&c, &pages))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_tau_chart_roundtrip() {
        // any field order parses; canonical output is a fixed point
        let text = r#"{
  "schema_version": 1,
  "kind": "tau-chart",
  "payload": {
    "groups": [],
    "window": { "x0": 0, "x1": 2, "y0": 0, "y1": 2 }
  }
}
"#;
        let doc = parse(text).unwrap();
        let out = serialize(&doc);
        let again = parse(&out).unwrap();
        assert_eq!(serialize(&again), out);
        assert!(out.contains("\"kind\": \"tau-chart\""));
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = r#"{
  "schema_version": 1,
  "kind": "tau-chart",
  "payload": {
    "window": { "x0": 0, "x1": 2, "y0": 0, "y1": 2 },
    "groups": [],
    "surprise": 1
  }
}"#;
        assert!(matches!(parse(text), Err(DocError::Parse(_))));
    }

    #[test]
    fn structure_line_names_checked() {
        let text = r#"{
  "schema_version": 1,
  "kind": "tau-chart",
  "payload": {
    "window": { "x0": 0, "x1": 2, "y0": 0, "y1": 2 },
    "groups": [ { "x": 1, "y": 1, "gens": [ { "name": "eta" } ] } ],
    "structure_lines": [
      {
        "from": { "x": 1, "y": 1 },
        "from_gen": "eta",
        "to": { "x": 2, "y": 2 },
        "to_gen": "ghost",
        "kind": "eta",
        "filtration_jump": 1
      }
    ]
  }
}"#;
        let err = parse(text).unwrap_err();
        assert!(err.to_string().contains("ghost"), "{err}");
    }

    #[test]
    fn tower_doc_roundtrip() {
        let t = crate::fcc::FilteredComplex::constant(crate::fcc::ChainComplex::two_term(1, 2), 0, 2);
        let doc = Document::FilteredComplex(FilteredComplexDoc::from_tower(&t));
        let text = serialize(&doc);
        let back = parse(&text).unwrap();
        let Document::FilteredComplex(fd) = back else { panic!("kind") };
        let t2 = fd.to_tower().unwrap();
        for n in t.n0..=t.n1 {
            assert_eq!(t.level(n), t2.level(n));
        }
        assert_eq!(serialize(&Document::FilteredComplex(FilteredComplexDoc::from_tower(&t2))), text);
    }

    #[test]
    fn pages_doc_roundtrip_with_chart() {
        let t = crate::fcc::FilteredComplex::constant(crate::fcc::ChainComplex::two_term(1, 2), 0, 2);
        let w = t.natural_window(1);
        let doc = tower_to_pages_doc(&t, w, 3).unwrap();
        let text = serialize(&Document::BssPages(doc.clone()));
        let back = parse(&text).unwrap();
        let Document::BssPages(pd) = back else { panic!("kind") };
        let c = pd.to_couple().unwrap();
        assert!(c.exactness_violations().is_empty());
        assert_eq!(serialize(&Document::BssPages(pd)), text);
    }
}
