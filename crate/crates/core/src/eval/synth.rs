//! Synthetic slides with planted class blobs and known ground truth.
//!
//! Everything lives on the patch grid: cell `(y, x)` covers level-0 pixels
//! `[x * stride, (x + 1) * stride)` horizontally and likewise vertically, and
//! the ground-truth masks have one pixel per cell.

use super::coverage::GroundTruth;
use super::sweep::SweepWsi;
use crate::error::{Error, Result};
use crate::io::{BinaryMask, EmbeddingContainer, GridMeta};
use crate::retrieval::{build_prototype_set, PrototypeSet};
use crate::rng::SeededRng;
use crate::simmap::build_similarity_map;

const UNIT_TOL: f64 = 1e-4;

/// Disc of class cells, in grid-cell coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    pub center: (f64, f64),
    pub radius: f64,
    pub class_name: String,
    pub direction: Vec<f32>,
}

impl Blob {
    fn contains(&self, y: f64, x: f64) -> bool {
        let (dy, dx) = (y - self.center.0, x - self.center.1);
        dy * dy + dx * dx <= self.radius * self.radius
    }
}

/// Axis-aligned tissue ellipse in grid-cell coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub cy: f64,
    pub cx: f64,
    pub ry: f64,
    pub rx: f64,
}

impl Ellipse {
    fn contains(&self, y: f64, x: f64) -> bool {
        let (u, v) = ((y - self.cy) / self.ry, (x - self.cx) / self.rx);
        u * u + v * v <= 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub grid_h: usize,
    pub grid_w: usize,
    pub stride_px: u64,
    pub mpp: f64,
    /// Class whose blobs form the class mask and the prototype set.
    pub class_name: String,
    pub blobs: Vec<Blob>,
    /// `None` makes the whole slide tissue.
    pub tissue: Option<Ellipse>,
    pub background: Vec<f32>,
    /// Direction of off-tissue cells; defaults to the background direction.
    pub glass: Option<Vec<f32>>,
    /// Standard deviation of the per-component Gaussian noise.
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticWsi {
    pub grid: EmbeddingContainer,
    pub meta: GridMeta,
    pub gt: GroundTruth,
    pub prototypes: PrototypeSet,
}

impl SyntheticWsi {
    /// Pairs the slide with its similarity map against its own prototypes.
    pub fn to_sweep(&self) -> Result<SweepWsi> {
        let (map, _) = build_similarity_map(&self.grid, &self.meta, &self.prototypes, Some(&self.gt.tissue_mask))?;
        Ok(SweepWsi {
            grid: self.grid.clone(),
            meta: self.meta.clone(),
            map,
            gt: self.gt.clone(),
        })
    }
}

fn check_directions(spec: &SyntheticSpec) -> Result<()> {
    let dim = spec.background.len();
    let mut dirs: Vec<&[f32]> = vec![&spec.background];
    if let Some(g) = &spec.glass {
        dirs.push(g);
    }
    dirs.extend(spec.blobs.iter().map(|b| b.direction.as_slice()));
    let mut distinct: Vec<&[f32]> = Vec::new();
    for d in dirs {
        if d.len() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: d.len(),
            });
        }
        let norm = d.iter().map(|&v| f64::from(v).powi(2)).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidArgument(format!("direction has norm {norm}, expected 1")));
        }
        if !distinct.contains(&d) {
            distinct.push(d);
        }
    }
    for (i, a) in distinct.iter().enumerate() {
        for b in &distinct[i + 1..] {
            let dot: f64 = a.iter().zip(*b).map(|(&x, &y)| f64::from(x) * f64::from(y)).sum();
            if dot.abs() > 1.0 - 1e-6 {
                return Err(Error::InvalidArgument("directions must be pairwise non-collinear".into()));
            }
        }
    }
    Ok(())
}

fn check_blobs(blobs: &[Blob]) -> Result<()> {
    for (i, a) in blobs.iter().enumerate() {
        if a.radius.is_nan() || a.radius <= 0.0 {
            return Err(Error::InvalidArgument(format!("blob {i} has radius {}", a.radius)));
        }
        for (j, b) in blobs.iter().enumerate().skip(i + 1) {
            let d = ((a.center.0 - b.center.0).powi(2) + (a.center.1 - b.center.1).powi(2)).sqrt();
            if a.class_name != b.class_name && d < a.radius + b.radius {
                return Err(Error::InvalidArgument(format!(
                    "blobs {i} ({}) and {j} ({}) overlap",
                    a.class_name, b.class_name
                )));
            }
        }
    }
    Ok(())
}

/// Builds one slide. Cells draw their noise in row-major order from a
/// generator seeded with `seed`, so equal inputs give bit-identical output.
pub fn gen_synthetic_wsi(seed: u64, wsi_id: &str, spec: &SyntheticSpec) -> Result<SyntheticWsi> {
    check_directions(spec)?;
    check_blobs(&spec.blobs)?;
    if !spec.blobs.iter().any(|b| b.class_name == spec.class_name) {
        return Err(Error::InvalidArgument(format!("no blob of class {}", spec.class_name)));
    }
    let (h, w, s) = (spec.grid_h, spec.grid_w, spec.stride_px);
    let meta = GridMeta::for_slide(wsi_id, h as u64 * s, w as u64 * s, s, s, spec.mpp)?;
    let glass = spec.glass.as_ref().unwrap_or(&spec.background);

    let mut rng = SeededRng::new(seed);
    let mut rows = Vec::with_capacity(h * w);
    let mut tissue = Vec::with_capacity(h * w);
    let mut class = Vec::with_capacity(h * w);
    for y in 0..h {
        for x in 0..w {
            let (cy, cx) = (y as f64 + 0.5, x as f64 + 0.5);
            let blob = spec.blobs.iter().find(|b| b.contains(cy, cx));
            let on_tissue = blob.is_some() || spec.tissue.is_none_or(|e| e.contains(cy, cx));
            let dir = match blob {
                Some(b) => &b.direction,
                None if on_tissue => &spec.background,
                None => glass,
            };
            let row: Vec<f32> = dir
                .iter()
                .map(|&v| (f64::from(v) + spec.noise * rng.normal()) as f32)
                .collect();
            rows.push(row);
            tissue.push(on_tissue);
            class.push(blob.is_some_and(|b| b.class_name == spec.class_name));
        }
    }
    let grid = EmbeddingContainer::from_rows(&rows, false)?;

    let targets: Vec<&Blob> = spec.blobs.iter().filter(|b| b.class_name == spec.class_name).collect();
    let points = targets
        .iter()
        .map(|b| (b.center.1 * s as f64, b.center.0 * s as f64))
        .collect();
    let gt = GroundTruth::new(
        BinaryMask::new(h, w, tissue, s as f64)?,
        Some(BinaryMask::new(h, w, class, s as f64)?),
        Some(points),
    )?;

    let mut dirs: Vec<&[f32]> = Vec::new();
    for b in &targets {
        if !dirs.contains(&b.direction.as_slice()) {
            dirs.push(&b.direction);
        }
    }
    let ids = (0..dirs.len()).map(|i| format!("{}_{i}", spec.class_name)).collect();
    let prototypes = build_prototype_set(spec.class_name.clone(), &dirs, ids)?;
    Ok(SyntheticWsi { grid, meta, gt, prototypes })
}

fn basis(dim: usize, i: usize) -> Vec<f32> {
    let mut v = vec![0.0; dim];
    v[i] = 1.0;
    v
}

const FIXTURE_GRID: usize = 64;
const FIXTURE_DIM: usize = 16;

/// Random slide layout: a tissue ellipse of roughly 2100 cells holding one to
/// three disjoint tumor blobs of radius 2 or 3.
fn fixture_spec(rng: &mut SeededRng) -> SyntheticSpec {
    let g = FIXTURE_GRID as f64;
    let tissue = Ellipse {
        cy: g / 2.0 + rng.unit() * 4.0 - 2.0,
        cx: g / 2.0 + rng.unit() * 4.0 - 2.0,
        ry: 24.0,
        rx: 28.0,
    };
    let class_dir = basis(FIXTURE_DIM, 0);
    let count = 1 + rng.below(3) as usize;
    let mut blobs: Vec<Blob> = Vec::new();
    while blobs.len() < count {
        let radius = 2.0 + rng.below(2) as f64;
        let cy = tissue.cy + (rng.unit() * 2.0 - 1.0) * tissue.ry * 0.7;
        let cx = tissue.cx + (rng.unit() * 2.0 - 1.0) * tissue.rx * 0.7;
        let inner = Ellipse {
            ry: tissue.ry * 0.7,
            rx: tissue.rx * 0.7,
            ..tissue
        };
        let clear = blobs.iter().all(|b| {
            ((b.center.0 - cy).powi(2) + (b.center.1 - cx).powi(2)).sqrt() > b.radius + radius + 2.0
        });
        if inner.contains(cy, cx) && clear {
            blobs.push(Blob {
                center: (cy, cx),
                radius,
                class_name: "tumor".into(),
                direction: class_dir.clone(),
            });
        }
    }
    let mut background = vec![0.0; FIXTURE_DIM];
    background[0] = 0.3;
    background[1] = 0.91f32.sqrt();
    SyntheticSpec {
        grid_h: FIXTURE_GRID,
        grid_w: FIXTURE_GRID,
        stride_px: 256,
        mpp: 0.25,
        class_name: "tumor".into(),
        blobs,
        tissue: Some(tissue),
        background,
        glass: Some(basis(FIXTURE_DIM, 2)),
        noise: 0.05,
    }
}

/// `count` fixture slides named `synth_000`, `synth_001`, ... All share one
/// tumor direction, so their prototype sets are equal.
pub fn fixture_slides(seed: u64, count: usize) -> Result<Vec<SyntheticWsi>> {
    let mut rng = SeededRng::new(seed);
    (0..count)
        .map(|i| {
            let spec = fixture_spec(&mut rng);
            let wsi_seed = rng.next_u64();
            gen_synthetic_wsi(wsi_seed, &format!("synth_{i:03}"), &spec)
        })
        .collect()
}

/// [`fixture_slides`] paired with their similarity maps.
pub fn fixture_dataset(seed: u64, count: usize) -> Result<Vec<SweepWsi>> {
    fixture_slides(seed, count)?.iter().map(SyntheticWsi::to_sweep).collect()
}
