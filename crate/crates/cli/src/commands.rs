use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use protosample::captions::{apply_exclusions, keyword_search, keyword_search_subcaptions, review_report, KeywordQuery};
use protosample::eval::{
    coverage_metrics, fixture_slides, run_sweep, sweep_csv, Denominator, GroundTruth, SweepRow, SweepSpec, SweepTable,
    CSV_HEADER,
};
use protosample::io::{
    load_grid, read_captions, read_container, read_grid_meta, read_mask, read_pgm, read_regions, sidecar_path,
    write_captions, write_container, write_grid_meta, write_mask, write_pgm, write_ppm, write_regions, BinaryMask,
    GridMeta, Region, Strategy,
};
use protosample::retrieval::{build_prototype_set, top_k_retrieval};
use protosample::select::{
    detect_tissue, select_adaptive, select_diversity, select_random, select_standard, Selection, SelectionConfig,
    WsiRegions,
};
use protosample::simmap::{build_similarity_map, read_map, render_gray, render_overlay, write_map};
use serde::{Deserialize, Serialize};

use crate::dataset::{load_dataset, read_points, slide_paths, write_index, write_points};
use crate::manifest::RunManifest;
use crate::{Failure, Global};

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

/// One id per line. JSON-lines input (e.g. search results) contributes the
/// `id` field of each record.
fn read_ids(path: &Path) -> Result<Vec<String>, Failure> {
    let mut ids = Vec::new();
    for (i, line) in read_text(path)?.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('{') {
            let v: serde_json::Value = serde_json::from_str(line)
                .map_err(|e| Failure::Data(format!("{}:{}: {e}", path.display(), i + 1)))?;
            match v.get("id").and_then(|x| x.as_str()) {
                Some(id) => ids.push(id.to_string()),
                None => return Err(Failure::Data(format!("{}:{}: record without id", path.display(), i + 1))),
            }
        } else {
            ids.push(line.to_string());
        }
    }
    Ok(ids)
}

fn ids_sidecar(path: &Path) -> PathBuf {
    sidecar_path(path, ".ids.txt")
}

/// Row ids of a container: its `<name>.ids.txt` sidecar, else row indices.
fn container_ids(path: &Path, rows: usize, manifest: &mut RunManifest) -> Result<Vec<String>, Failure> {
    let side = ids_sidecar(path);
    if !side.exists() {
        return Ok((0..rows).map(|i| i.to_string()).collect());
    }
    manifest.input(&side)?;
    let ids = read_ids(&side)?;
    if ids.len() != rows {
        return Err(Failure::Data(format!("{}: {} ids for {rows} rows", side.display(), ids.len())));
    }
    Ok(ids)
}

fn write_ids(path: &Path, ids: &[String]) -> Result<(), Failure> {
    let mut text = ids.join("\n");
    text.push('\n');
    write_text(path, &text)
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    Strategy::parse(s).ok_or_else(|| format!("unknown strategy {s:?}; expected random, diversity, proto-standard or proto-adaptive"))
}

fn finish(manifest: &mut RunManifest, g: &Global, outputs: &[&Path]) -> Result<(), Failure> {
    for o in outputs {
        manifest.output(o)?;
    }
    manifest.write(g.manifest_out.as_deref(), outputs[0])?;
    Ok(())
}

fn start(command: &str, args: &impl Serialize, g: &Global) -> RunManifest {
    let mut m = RunManifest::new(command);
    m.set("args", args);
    m.set("seed", g.seed);
    m
}

#[derive(Args, Debug, Serialize)]
pub struct SearchCaptions {
    #[arg(long)]
    corpus: PathBuf,
    /// Synonym group that must occur; `|` separates synonyms. Repeatable.
    #[arg(long = "with", required = true)]
    with_groups: Vec<String>,
    /// Synonym group that must not occur. Repeatable.
    #[arg(long = "without")]
    without_groups: Vec<String>,
    /// Ids to drop from the result after manual review
    #[arg(long)]
    exclude_ids: Option<PathBuf>,
    /// Search panel subcaptions instead of whole captions
    #[arg(long)]
    split_subcaptions: bool,
    /// Also write a two-column review sheet (TSV)
    #[arg(long)]
    review: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

impl SearchCaptions {
    pub fn run(&self, g: &Global) -> Result<(), Failure> {
        let mut m = start("search-captions", self, g);
        let corpus = read_captions(&self.corpus)?;
        m.input(&self.corpus)?;
        let query = KeywordQuery::from_pipe_groups(&self.with_groups, &self.without_groups)
            .map_err(|e| Failure::Usage(e.to_string()))?;
        let mut hits = if self.split_subcaptions {
            keyword_search_subcaptions(&corpus, &query)
        } else {
            keyword_search(&corpus, &query)
        };
        if let Some(path) = &self.exclude_ids {
            m.input(path)?;
            let (kept, warnings) = apply_exclusions(hits, &read_ids(path)?);
            for w in warnings {
                log::warn!("{w}");
            }
            hits = kept;
        }
        write_captions(&hits, &self.out)?;
        let mut outs = vec![self.out.as_path()];
        if let Some(r) = &self.review {
            write_text(r, &review_report(&hits))?;
            outs.push(r);
        }
        finish(&mut m, g, &outs)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct RetrievePrototypes {
    /// Database image embeddings; row ids from `<name>.ids.txt` if present
    #[arg(long)]
    database: PathBuf,
    /// Prompt embedding, a container with one row
    #[arg(long)]
    query: PathBuf,
    #[arg(long, default_value_t = 100)]
    k: usize,
    #[arg(long, default_value = "class")]
    class_name: String,
    /// Retrieved ids with scores, tab separated
    #[arg(long)]
    out_ids: PathBuf,
    /// Prototype embeddings (unit rows) plus `<name>.ids.txt`
    #[arg(long)]
    out: PathBuf,
}

impl RetrievePrototypes {
    pub fn run(&self, g: &Global) -> Result<(), Failure> {
        let mut m = start("retrieve-prototypes", self, g);
        let db = read_container(&self.database)?;
        let q = read_container(&self.query)?;
        m.input(&self.database)?;
        m.input(&self.query)?;
        if q.rows() != 1 {
            return Err(Failure::Data(format!("query must have one row, found {}", q.rows())));
        }
        let ids = container_ids(&self.database, db.rows(), &mut m)?;
        let hits = top_k_retrieval(q.row(0), &db, self.k)?;
        let picked: Vec<&[f32]> = hits.iter().map(|&(i, _)| db.row(i)).collect();
        let picked_ids: Vec<String> = hits.iter().map(|&(i, _)| ids[i].clone()).collect();
        let set = build_prototype_set(self.class_name.clone(), &picked, picked_ids.clone())?;
        let mut listing = String::new();
        for (&(_, score), id) in hits.iter().zip(&picked_ids) {
            listing.push_str(&format!("{id}\t{score}\n"));
        }
        write_text(&self.out_ids, &listing)?;
        write_container(set.embeddings(), &self.out)?;
        let side = ids_sidecar(&self.out);
        write_ids(&side, set.source_ids())?;
        finish(&mut m, g, &[&self.out, &self.out_ids, &side])
    }
}

#[derive(Args, Debug, Serialize)]
pub struct BuildPrototypes {
    /// Ids to take, one per line, or search results as JSON lines
    #[arg(long)]
    from_ids: PathBuf,
    /// Embeddings whose row ids come from `<name>.ids.txt`
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long, default_value = "class")]
    class_name: String,
    #[arg(long)]
    out: PathBuf,
}

impl BuildPrototypes {
    pub fn run(&self, g: &Global) -> Result<(), Failure> {
        let mut m = start("build-prototypes", self, g);
        let emb = read_container(&self.embeddings)?;
        m.input(&self.embeddings)?;
        m.input(&self.from_ids)?;
        let ids = container_ids(&self.embeddings, emb.rows(), &mut m)?;
        let index: BTreeMap<&str, usize> = ids.iter().enumerate().rev().map(|(i, s)| (s.as_str(), i)).collect();
        let wanted = read_ids(&self.from_ids)?;
        let rows = wanted
            .iter()
            .map(|id| {
                // subcaption hits ("<id>#<panel>") use their parent image
                let base = id.split('#').next().unwrap_or(id);
                index
                    .get(id.as_str())
                    .or_else(|| index.get(base))
                    .map(|&i| emb.row(i))
                    .ok_or_else(|| Failure::Data(format!("id {id:?} not found in {}", self.embeddings.display())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let set = build_prototype_set(self.class_name.clone(), &rows, wanted)?;
        write_container(set.embeddings(), &self.out)?;
        let side = ids_sidecar(&self.out);
        write_ids(&side, set.source_ids())?;
        finish(&mut m, g, &[&self.out, &side])
    }
}

#[derive(Args, Debug, Serialize)]
pub struct BuildMap {
    #[arg(long)]
    grid: PathBuf,
    /// Grid metadata (default: `<grid>.grid.json`)
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long)]
    prototypes: PathBuf,
    #[arg(long, default_value = "class")]
    class_name: String,
    #[arg(long)]
    tissue_mask: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

impl BuildMap {
    pub fn run(&self, g: &Global) -> Result<(), Failure> {
        let mut m = start("build-map", self, g);
        let (grid, meta) = load_grid(&self.grid, self.meta.as_deref())?;
        m.input(&self.grid)?;
        m.input(&self.meta.clone().unwrap_or_else(|| sidecar_path(&self.grid, ".grid.json")))?;
        let pc = read_container(&self.prototypes)?;
        m.input(&self.prototypes)?;
        let ids = container_ids(&self.prototypes, pc.rows(), &mut m)?;
        let rows: Vec<&[f32]> = pc.iter_rows().collect();
        let protos = build_prototype_set(self.class_name.clone(), &rows, ids)?;
        let mask = match &self.tissue_mask {
            Some(p) => {
                m.input_mask(p)?;
                Some(read_mask(p)?)
            }
            None => None,
        };
        let (map, report) = build_similarity_map(&grid, &meta, &protos, mask.as_ref())?;
        if !report.zero_cells.is_empty() {
            log::warn!("{} zero-embedding cells excluded from the map", report.zero_cells.len());
        }
        write_map(&map, &self.out)?;
        finish(
            &mut m,
            g,
            &[&self.out, &sidecar_path(&self.out, ".map.json"), &sidecar_path(&self.out, ".excluded.pgm")],
        )
    }
}

#[derive(Args, Debug, Serialize)]
pub struct Select {
    #[arg(long, value_parser = parse_strategy)]
    strategy: Strategy,
    /// Similarity map (prototype strategies)
    #[arg(long)]
    map: Option<PathBuf>,
    /// Grid metadata of the slide (random and prototype strategies)
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Tissue mask for random sampling
    #[arg(long)]
    tissue_mask: Option<PathBuf>,
    /// Grayscale thumbnail for random sampling; tissue found by Otsu
    #[arg(long, conflicts_with = "tissue_mask")]
    thumbnail: Option<PathBuf>,
    /// Level-0 pixels per thumbnail pixel
    #[arg(long, requires = "thumbnail")]
    thumbnail_scale: Option<f64>,
    /// Patch grids of all slides (diversity), comma separated or repeated
    #[arg(long, value_delimiter = ',')]
    grids: Vec<PathBuf>,
    /// Per-slide region embeddings replacing mean pooling (diversity)
    #[arg(long, value_delimiter = ',')]
    region_embeddings: Vec<PathBuf>,
    #[arg(long)]
    n: usize,
    /// Region side in level-0 pixels
    #[arg(long = "l")]
    l_px: u64,
    #[arg(long, default_value_t = 0.10)]
    min_tissue_fraction: f64,
    #[arg(long, default_value_t = 50)]
    bisect_max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    bisect_tol: f64,
    #[arg(long, default_value_t = 300)]
    kmeans_max_iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    kmeans_tol: f64,
    #[arg(long)]
    out: PathBuf,
}

impl Select {
    fn config(&self, seed: u64) -> SelectionConfig {
        SelectionConfig {
            n: self.n,
            l_px: self.l_px,
            seed,
            strategy: self.strategy,
            min_tissue_fraction: self.min_tissue_fraction,
            bisect_max_iters: self.bisect_max_iters,
            bisect_tol: self.bisect_tol,
            kmeans_max_iters: self.kmeans_max_iters,
            kmeans_tol: self.kmeans_tol,
        }
    }

    fn meta(&self, m: &mut RunManifest) -> Result<GridMeta, Failure> {
        let path = self
            .meta
            .as_ref()
            .ok_or_else(|| Failure::Usage(format!("--meta is required for {}", self.strategy)))?;
        m.input(path)?;
        Ok(read_grid_meta(path)?)
    }

    pub fn run(&self, g: &Global) -> Result<(), Failure> {
        let mut m = start("select", self, g);
        let cfg = self.config(g.seed);
        let sel: Selection = match self.strategy {
            Strategy::Random => {
                let meta = self.meta(&mut m)?;
                let tissue = match (&self.tissue_mask, &self.thumbnail) {
                    (Some(p), _) => {
                        m.input_mask(p)?;
                        Some(read_mask(p)?)
                    }
                    (None, Some(p)) => {
                        m.input(p)?;
                        let scale = self
                            .thumbnail_scale
                            .ok_or_else(|| Failure::Usage("--thumbnail needs --thumbnail-scale".into()))?;
                        let (mask, otsu) = detect_tissue(&read_pgm(p)?, scale)?;
                        if otsu.degenerate {
                            log::warn!("thumbnail has a single intensity; tissue mask is empty");
                        }
                        Some(mask)
                    }
                    (None, None) => None,
                };
                select_random(&meta, tissue.as_ref(), &cfg)?
            }
            Strategy::ProtoStandard | Strategy::ProtoAdaptive => {
                let meta = self.meta(&mut m)?;
                let path = self
                    .map
                    .as_ref()
                    .ok_or_else(|| Failure::Usage(format!("--map is required for {}", self.strategy)))?;
                let map = read_map(path)?;
                m.input_map(path)?;
                map.check_meta(&meta)?;
                if self.strategy == Strategy::ProtoStandard {
                    select_standard(&map, &meta, &cfg)?
                } else {
                    select_adaptive(&map, &meta, &cfg)?
                }
            }
            Strategy::Diversity => {
                if self.grids.is_empty() {
                    return Err(Failure::Usage("--grids is required for diversity".into()));
                }
                if !self.region_embeddings.is_empty() && self.region_embeddings.len() != self.grids.len() {
                    return Err(Failure::Usage("--region-embeddings needs one file per grid".into()));
                }
                let mut wsis = Vec::with_capacity(self.grids.len());
                for (i, path) in self.grids.iter().enumerate() {
                    let (grid, meta) = load_grid(path, None)?;
                    m.input(path)?;
                    m.input(&sidecar_path(path, ".grid.json"))?;
                    cfg.validate(&meta)?;
                    let side = cfg.side_cells(meta.stride_px);
                    wsis.push(match self.region_embeddings.get(i) {
                        Some(e) => {
                            m.input(e)?;
                            WsiRegions::with_embeddings(&meta, side, &read_container(e)?)?
                        }
                        None => WsiRegions::from_grid(&grid, &meta, side)?,
                    });
                }
                select_diversity(&wsis, &cfg)?
            }
        };
        for w in &sel.warnings {
            log::warn!("{w}");
        }
        write_regions(&sel.regions, &self.out)?;
        finish(&mut m, g, &[&self.out])
    }
}

#[derive(Args, Debug, Serialize)]
pub struct Evaluate {
    #[arg(long)]
    regions: PathBuf,
    #[arg(long)]
    tissue_mask: PathBuf,
    /// Class mask (e.g. tumor)
    #[arg(long)]
    gt_mask: Option<PathBuf>,
    /// Annotated points as `x_px,y_px` rows
    #[arg(long)]
    gt_points: Option<PathBuf>,
    /// Slide the ground truth belongs to (default: the only slide in the regions)
    #[arg(long)]
    wsi_id: Option<String>,
    /// `tissue` or `slide`
    #[arg(long, default_value = "tissue")]
    denominator: String,
    /// Label for the `n` column (default: most regions on the slide)
    #[arg(long)]
    n: Option<usize>,
    /// Label for the `l_px` column (default: largest region side)
    #[arg(long = "l")]
    l_px: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

impl Evaluate {
    pub fn run(&self, g: &Global) -> Result<(), Failure> {
        let mut m = start("evaluate", self, g);
        let denominator: Denominator = self.denominator.parse().map_err(|e: protosample::Error| Failure::Usage(e.to_string()))?;
        let regions = read_regions(&self.regions)?;
        m.input(&self.regions)?;
        let ids: std::collections::BTreeSet<&str> = regions.iter().map(|r| r.wsi_id.as_str()).collect();
        let wsi = match (&self.wsi_id, ids.len()) {
            (Some(id), _) => id.clone(),
            (None, 0 | 1) => ids.iter().next().map(|s| s.to_string()).unwrap_or_default(),
            (None, _) => return Err(Failure::Data(format!("regions span {} slides; pass --wsi-id", ids.len()))),
        };
        let mine: Vec<Region> = regions.iter().filter(|r| r.wsi_id == wsi).cloned().collect();
        let strategies: std::collections::BTreeSet<Strategy> = mine.iter().map(|r| r.strategy).collect();
        if strategies.len() > 1 {
            return Err(Failure::Data("regions mix several strategies".into()));
        }
        m.input_mask(&self.tissue_mask)?;
        let tissue = read_mask(&self.tissue_mask)?;
        let class = match &self.gt_mask {
            Some(p) => {
                m.input_mask(p)?;
                Some(read_mask(p)?)
            }
            None => None,
        };
        let points = match &self.gt_points {
            Some(p) => {
                m.input(p)?;
                Some(read_points(p)?)
            }
            None => None,
        };
        let gt = GroundTruth::new(tissue, class, points)?;
        let r = coverage_metrics(&mine, &gt, denominator);
        let row = SweepRow {
            strategy: strategies.into_iter().next().unwrap_or(Strategy::Random),
            n: self.n.unwrap_or(mine.len()),
            l_px: self.l_px.unwrap_or_else(|| mine.iter().map(|r| r.w_px.max(r.h_px)).max().unwrap_or(0)),
            seed: Some(g.seed),
            annotated_tissue_pct: r.annotated_tissue_pct,
            class_area_pct: r.class_area_pct,
            point_capture_ratio: r.point_capture_ratio,
        };
        let csv = sweep_csv(&SweepTable {
            rows: vec![row],
            medians: vec![],
        });
        debug_assert!(csv.starts_with(CSV_HEADER));
        write_text(&self.out, &csv)?;
        finish(&mut m, g, &[&self.out])
    }
}

/// Sweep configuration file (TOML, or JSON by `.json` extension).
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    /// Dataset directory, relative to the config file
    dataset: PathBuf,
    strategies: Vec<String>,
    n_set: Vec<usize>,
    l_set: Vec<u64>,
    seeds: Vec<u64>,
    min_tissue_fraction: Option<f64>,
    bisect_max_iters: Option<usize>,
    bisect_tol: Option<f64>,
    kmeans_max_iters: Option<usize>,
    kmeans_tol: Option<f64>,
    denominator: Option<String>,
}

impl SweepConfig {
    fn spec(&self) -> Result<SweepSpec, Failure> {
        let strategies = self
            .strategies
            .iter()
            .map(|s| parse_strategy(s).map_err(Failure::Data))
            .collect::<Result<Vec<_>, _>>()?;
        if strategies.is_empty() || self.n_set.is_empty() || self.l_set.is_empty() || self.seeds.is_empty() {
            return Err(Failure::Data("strategies, n_set, l_set and seeds must be non-empty".into()));
        }
        let mut spec = SweepSpec::new(strategies, self.n_set.clone(), self.l_set.clone(), self.seeds.clone());
        spec.min_tissue_fraction = self.min_tissue_fraction.unwrap_or(spec.min_tissue_fraction);
        spec.bisect_max_iters = self.bisect_max_iters.unwrap_or(spec.bisect_max_iters);
        spec.bisect_tol = self.bisect_tol.unwrap_or(spec.bisect_tol);
        spec.kmeans_max_iters = self.kmeans_max_iters.unwrap_or(spec.kmeans_max_iters);
        spec.kmeans_tol = self.kmeans_tol.unwrap_or(spec.kmeans_tol);
        if let Some(d) = &self.denominator {
            let d: Denominator = d.parse().map_err(|e: protosample::Error| Failure::Data(e.to_string()))?;
            spec.denominator_slide = d == Denominator::Slide;
        }
        Ok(spec)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct Sweep {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

impl Sweep {
    pub fn run(&self, g: &Global) -> Result<(), Failure> {
        let mut m = start("sweep", self, g);
        let text = read_text(&self.config)?;
        m.input(&self.config)?;
        let config: SweepConfig = if self.config.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Failure::Data(format!("{}: {e}", self.config.display())))?
        } else {
            toml::from_str(&text).map_err(|e| Failure::Data(format!("{}: {e}", self.config.display())))?
        };
        let spec = config.spec()?;
        m.set("config", &config);
        let dir = self.config.parent().unwrap_or(Path::new(".")).join(&config.dataset);
        let (data, files) = load_dataset(&dir)?;
        for f in &files {
            m.input(f)?;
        }
        let table = run_sweep(&data, &spec)?;
        write_text(&self.out, &sweep_csv(&table))?;
        finish(&mut m, g, &[&self.out])
    }
}

#[derive(Args, Debug, Serialize)]
pub struct GenFixtures {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    count: usize,
}

const FIXTURE_SWEEP: &str = "\
dataset = \".\"
strategies = [\"random\", \"diversity\", \"proto-standard\", \"proto-adaptive\"]
n_set = [1, 3, 5]
l_set = [1024, 2048, 3072]
seeds = [0, 1, 2, 3, 4]
";

impl GenFixtures {
    pub fn run(&self, g: &Global) -> Result<(), Failure> {
        let mut m = start("gen-fixtures", self, g);
        if self.count == 0 {
            return Err(Failure::Usage("--count must be >= 1".into()));
        }
        std::fs::create_dir_all(&self.out).map_err(|e| Failure::Data(format!("{}: {e}", self.out.display())))?;
        let slides = fixture_slides(g.seed, self.count)?;
        let mut written: Vec<PathBuf> = Vec::new();
        for s in &slides {
            let id = &s.meta.wsi_id;
            let p = slide_paths(&self.out, id);
            write_container(&s.grid, &p.grid)?;
            let meta_path = sidecar_path(&p.grid, ".grid.json");
            write_grid_meta(&s.meta, &meta_path)?;
            let sw = s.to_sweep()?;
            write_map(&sw.map, &p.map)?;
            write_mask(&s.gt.tissue_mask, &p.tissue)?;
            let class: &BinaryMask = s.gt.class_mask.as_ref().expect("fixtures carry a class mask");
            write_mask(class, &p.class)?;
            write_points(&p.points, s.gt.points.as_deref().unwrap_or_default())?;
            written.extend([p.grid, meta_path, p.map, p.tissue, p.class, p.points]);
        }
        let protos = self.out.join("prototypes.emb");
        write_container(slides[0].prototypes.embeddings(), &protos)?;
        let proto_ids = ids_sidecar(&protos);
        write_ids(&proto_ids, slides[0].prototypes.source_ids())?;
        let index = write_index(&self.out, slides.iter().map(|s| s.meta.wsi_id.clone()).collect())?;
        let sweep = self.out.join("sweep.toml");
        write_text(&sweep, FIXTURE_SWEEP)?;
        let mut outs: Vec<&Path> = vec![&index, &protos, &proto_ids, &sweep];
        outs.extend(written.iter().map(PathBuf::as_path));
        finish(&mut m, g, &outs)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct Render {
    #[arg(long)]
    map: PathBuf,
    /// Draw these regions; output becomes a colour PPM
    #[arg(long, requires = "meta")]
    regions: Option<PathBuf>,
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

impl Render {
    pub fn run(&self, g: &Global) -> Result<(), Failure> {
        let mut m = start("render", self, g);
        let map = read_map(&self.map)?;
        m.input_map(&self.map)?;
        match (&self.regions, &self.meta) {
            (Some(r), Some(meta_path)) => {
                let regions = read_regions(r)?;
                let meta = read_grid_meta(meta_path)?;
                m.input(r)?;
                m.input(meta_path)?;
                map.check_meta(&meta)?;
                write_ppm(&render_overlay(&map, &regions, &meta), &self.out)?;
            }
            _ => write_pgm(&render_gray(&map), &self.out)?,
        }
        finish(&mut m, g, &[&self.out])
    }
}
