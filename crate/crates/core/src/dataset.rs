//! Dataset assembly from (bitstream, placement) pairs, the seeded
//! train/test split, and a synthetic corpus generator.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotation::{
    placement_to_bbox, write_annotations, write_atomic, write_class_list, AnnotationError,
    AnnotationFormat, ImageRef, PlacementFile, PlacementRecord,
};
use crate::bitstream::{parse_container, synthesize_container, BitstreamError, ContainerFormat, SlicePos};
use crate::device::{load_profile, DeviceProfile, ProfileError};
use crate::image::{encode_image, write_image, ImageError, PixelOrder};
use crate::rng::SplitMix64;

pub const DEFAULT_SPLIT_RATIO: f64 = 0.8;
pub const DEFAULT_NOISE: f64 = 0.01;
const PLACEMENT_RETRIES: usize = 100;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("I/O on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error("invalid class signature: {0}")]
    Signature(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Bitstream(#[from] BitstreamError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
    #[error("all {} entries failed", .0.failures.len())]
    AllFailed(Box<BuildSummary>),
    #[error("image {0}: cannot place even a single block")]
    Unplaceable(usize),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    }
}

mod format_serde {
    use super::ContainerFormat;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(f: &ContainerFormat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&f.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ContainerFormat, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub bitstream: PathBuf,
    pub placement: PathBuf,
    #[serde(with = "format_serde", default)]
    pub format: ContainerFormat,
}

fn default_ratio() -> f64 {
    DEFAULT_SPLIT_RATIO
}

/// Paths inside a manifest are relative to the manifest's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub profile: PathBuf,
    pub classes: Vec<String>,
    pub seed: u64,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    pub entries: Vec<ManifestEntry>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut m: DatasetManifest = serde_json::from_str(&text).map_err(|source| DatasetError::Json {
            path: path.display().to_string(),
            source,
        })?;
        m.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DatasetError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        Ok(write_atomic(path.as_ref(), text.as_bytes())?)
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.classes.is_empty() {
            return Err(DatasetError::Manifest("class list is empty".into()));
        }
        let unique: BTreeSet<&String> = self.classes.iter().collect();
        if unique.len() != self.classes.len() {
            return Err(DatasetError::Manifest("class list has duplicates".into()));
        }
        if self.entries.is_empty() {
            return Err(DatasetError::Manifest("no entries".into()));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(DatasetError::Manifest(format!("split ratio {} outside (0, 1)", self.ratio)));
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

/// `ceil(ratio * n)`, guarded against products like `0.8 * 10` landing a
/// hair above an integer.
pub fn train_count(n: usize, ratio: f64) -> usize {
    let exact = ratio * n as f64;
    let rounded = exact.round();
    if (exact - rounded).abs() < 1e-9 {
        rounded as usize
    } else {
        exact.ceil() as usize
    }
}

/// Seeded split of `0..n`: SplitMix64 Fisher-Yates shuffle, the first
/// `train_count` indices are the training set.
pub fn split_indices(n: usize, ratio: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    SplitMix64::new(seed).shuffle(&mut idx);
    let cut = train_count(n, ratio).min(n);
    let test = idx.split_off(cut);
    (idx, test)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EntryFailure {
    pub entry: usize,
    pub bitstream: String,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub images_written: usize,
    pub boxes_written: usize,
    pub train: usize,
    pub test: usize,
    pub failures: Vec<EntryFailure>,
}

/// Output names derived from bitstream stems, suffixed with the entry index
/// where stems collide.
fn entry_names(manifest: &DatasetManifest) -> Vec<String> {
    let stems: Vec<String> = manifest
        .entries
        .iter()
        .map(|e| {
            e.bitstream
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "entry".into())
        })
        .collect();
    stems
        .iter()
        .enumerate()
        .map(|(i, s)| {
            if stems.iter().filter(|t| *t == s).count() > 1 {
                format!("{s}_{i}")
            } else {
                s.clone()
            }
        })
        .collect()
}

fn build_entry(
    manifest: &DatasetManifest,
    profile: &DeviceProfile,
    entry: &ManifestEntry,
    name: &str,
    order: PixelOrder,
    out_dir: &Path,
) -> Result<usize, DatasetError> {
    let bit_path = manifest.resolve(&entry.bitstream);
    let bytes = std::fs::read(&bit_path).map_err(io_err(&bit_path))?;
    let parsed = parse_container(&bytes, profile, entry.format)?;
    let placements = PlacementFile::load(manifest.resolve(&entry.placement))?;
    let boxes = placements
        .placements
        .iter()
        .map(|r| placement_to_bbox(r, profile))
        .collect::<Result<Vec<_>, _>>()?;
    let image = encode_image(&parsed.frames, profile, order)?;
    let file_name = format!("{name}.png");
    let image_ref = ImageRef {
        name: &file_name,
        width: image.width,
        height: image.height,
    };
    let classes = &manifest.classes;
    // render both label files before touching the output tree
    crate::annotation::render_annotations(&boxes, &image_ref, classes, AnnotationFormat::Json)?;
    write_image(&image, out_dir.join("images").join(&file_name))?;
    write_annotations(
        &boxes,
        &image_ref,
        classes,
        AnnotationFormat::Json,
        out_dir.join("labels_json").join(format!("{name}.json")),
    )?;
    write_annotations(
        &boxes,
        &image_ref,
        classes,
        AnnotationFormat::YoloTxt,
        out_dir.join("labels_yolo").join(format!("{name}.txt")),
    )?;
    Ok(boxes.len())
}

/// Encodes every entry, writes labels and the split lists. Entries that fail
/// are skipped and reported; the split covers the successful ones. `jobs`
/// of 0 uses rayon's default pool size.
pub fn build_dataset(
    manifest: &DatasetManifest,
    order: PixelOrder,
    out_dir: impl AsRef<Path>,
    jobs: usize,
) -> Result<BuildSummary, DatasetError> {
    manifest.validate()?;
    let out_dir = out_dir.as_ref();
    for sub in ["images", "labels_json", "labels_yolo"] {
        let d = out_dir.join(sub);
        std::fs::create_dir_all(&d).map_err(io_err(&d))?;
    }
    let profile = load_profile(manifest.resolve(&manifest.profile))?;
    write_class_list(&manifest.classes, out_dir.join("classes.txt"))?;
    let names = entry_names(manifest);

    let run = || {
        manifest
            .entries
            .par_iter()
            .zip(names.par_iter())
            .map(|(entry, name)| build_entry(manifest, &profile, entry, name, order, out_dir))
            .collect::<Vec<_>>()
    };
    let results = if jobs == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| DatasetError::Manifest(format!("thread pool: {e}")))?
            .install(run)
    };

    let mut summary = BuildSummary::default();
    let mut ok = Vec::new();
    for (i, result) in results.into_iter().enumerate() {
        match result {
            Ok(boxes) => {
                summary.images_written += 1;
                summary.boxes_written += boxes;
                ok.push(i);
            }
            Err(e) => summary.failures.push(EntryFailure {
                entry: i,
                bitstream: manifest.entries[i].bitstream.display().to_string(),
                error: e.to_string(),
            }),
        }
    }
    if ok.is_empty() {
        return Err(DatasetError::AllFailed(Box::new(summary)));
    }
    let (train, test) = split_indices(ok.len(), manifest.ratio, manifest.seed);
    let list = |idx: &[usize]| -> String {
        idx.iter()
            .map(|&k| format!("images/{}.png\n", names[ok[k]]))
            .collect()
    };
    write_atomic(&out_dir.join("train.txt"), list(&train).as_bytes())?;
    write_atomic(&out_dir.join("test.txt"), list(&test).as_bytes())?;
    summary.train = train.len();
    summary.test = test.len();
    Ok(summary)
}

/// Byte statistics that make a synthetic function block recognizable.
/// Each payload byte is nonzero with probability `density`; nonzero values
/// are uniform in `value_min..=value_max`. A second construction uses half
/// the density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSignature {
    #[serde(rename = "class")]
    pub class_label: String,
    pub density: f64,
    pub value_min: u8,
    pub value_max: u8,
    /// Inclusive width range in grid columns.
    pub footprint_cols: (u32, u32),
    /// Inclusive height range in grid rows.
    pub footprint_rows: (u32, u32),
    #[serde(default = "one")]
    pub constructions: u8,
}

fn one() -> u8 {
    1
}

pub const CONSTRUCTION_NAMES: [&str; 2] = ["module", "pipeline"];

impl ClassSignature {
    pub fn validate(&self, profile: &DeviceProfile) -> Result<(), DatasetError> {
        let bad = |m: String| Err(DatasetError::Signature(format!("{}: {m}", self.class_label)));
        if !(self.density > 0.0 && self.density <= 1.0) {
            return bad(format!("density {} outside (0, 1]", self.density));
        }
        if self.value_min == 0 || self.value_min > self.value_max {
            return bad("value range must satisfy 1 <= min <= max".into());
        }
        if !(1..=2).contains(&self.constructions) {
            return bad("constructions must be 1 or 2".into());
        }
        let (c0, c1) = self.footprint_cols;
        let (r0, r1) = self.footprint_rows;
        if c0 == 0 || r0 == 0 || c0 > c1 || r0 > r1 {
            return bad("footprint ranges must be non-empty and >= 1".into());
        }
        if c1 > profile.grid_cols() || r1 > profile.grid_rows() {
            return bad(format!(
                "footprint up to {c1}x{r1} exceeds the {}x{} grid",
                profile.grid_cols(),
                profile.grid_rows()
            ));
        }
        Ok(())
    }

    /// Density used by construction `c` (0-based).
    pub fn construction_density(&self, c: usize) -> f64 {
        if c == 0 {
            self.density
        } else {
            self.density * 0.5
        }
    }

    fn sample_byte(&self, density: f64, rng: &mut impl Rng) -> u8 {
        if rng.random_bool(density) {
            rng.random_range(self.value_min..=self.value_max)
        } else {
            0
        }
    }
}

/// `k` well-separated signatures: densities spread over [0.2, 0.8],
/// disjoint value bands, footprints between a sixth and a third of the grid.
pub fn default_signatures(k: usize, profile: &DeviceProfile) -> Vec<ClassSignature> {
    let cols = profile.grid_cols().max(1);
    let rows = profile.grid_rows().max(1);
    let span = |n: u32| ((n / 6).max(1), (n / 3).max(1));
    let band = 255 / k.max(1);
    (0..k)
        .map(|i| {
            let lo = (1 + i * band).min(255) as u8;
            let hi = ((i + 1) * band).clamp(lo as usize, 255) as u8;
            ClassSignature {
                class_label: format!("block{i}"),
                density: if k > 1 {
                    0.2 + 0.6 * i as f64 / (k - 1) as f64
                } else {
                    0.5
                },
                value_min: lo,
                value_max: hi,
                footprint_cols: span(cols),
                footprint_rows: span(rows),
                constructions: if i % 2 == 0 { 1 } else { 2 },
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub count: usize,
    /// Inclusive range of blocks per image.
    pub blocks_per_image: (usize, usize),
    pub noise: f64,
    pub seed: u64,
    pub format: ContainerFormat,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            count: 1,
            blocks_per_image: (1, 3),
            noise: DEFAULT_NOISE,
            seed: 0,
            format: ContainerFormat::Synth,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSummary {
    pub images: usize,
    pub blocks: usize,
    /// Images regenerated with fewer blocks after placement retries ran out.
    pub regenerated: usize,
}

/// One generated image: its placements and the container bytes.
#[derive(Clone, Debug)]
pub struct SynthImage {
    pub placements: Vec<PlacementRecord>,
    pub container: Vec<u8>,
    pub regenerated: usize,
}

fn image_seed(seed: u64, index: usize) -> u64 {
    SplitMix64::new(seed ^ (index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03)).next_u64()
}

fn place_blocks(
    profile: &DeviceProfile,
    signatures: &[ClassSignature],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<(usize, usize, PlacementRecord)>> {
    let mut placed: Vec<(usize, usize, PlacementRecord)> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut done = false;
        for _ in 0..PLACEMENT_RETRIES {
            let s = rng.random_range(0..signatures.len());
            let sig = &signatures[s];
            let w = rng.random_range(sig.footprint_cols.0..=sig.footprint_cols.1);
            let h = rng.random_range(sig.footprint_rows.0..=sig.footprint_rows.1);
            let col_min = rng.random_range(0..=profile.grid_cols() - w);
            let row_min = rng.random_range(0..=profile.grid_rows() - h);
            let construction = rng.random_range(0..sig.constructions as usize);
            let rec = PlacementRecord {
                class_label: sig.class_label.clone(),
                col_min,
                col_max: col_min + w - 1,
                row_min,
                row_max: row_min + h - 1,
                construction: Some(CONSTRUCTION_NAMES[construction].to_string()),
            };
            if placed.iter().all(|(_, _, p)| !p.overlaps(&rec)) {
                placed.push((s, construction, rec));
                done = true;
                break;
            }
        }
        if !done {
            return None;
        }
    }
    Some(placed)
}

/// Generates one image deterministically from `(seed, index)`.
pub fn synth_image(
    profile: &DeviceProfile,
    signatures: &[ClassSignature],
    config: &SynthConfig,
    index: usize,
) -> Result<SynthImage, DatasetError> {
    let mut rng = ChaCha8Rng::seed_from_u64(image_seed(config.seed, index));
    let (lo, hi) = config.blocks_per_image;
    let mut k = rng.random_range(lo.max(1)..=hi.max(lo.max(1)));
    let mut regenerated = 0;
    let placed = loop {
        match place_blocks(profile, signatures, k, &mut rng) {
            Some(p) => break p,
            None if k > 1 => {
                k -= 1;
                regenerated += 1;
            }
            None => return Err(DatasetError::Unplaceable(index)),
        }
    };

    let family = profile.family();
    let mut payloads = Vec::new();
    for (grid_row, grid_col, site) in profile.sites() {
        let owner = placed.iter().find(|(_, _, r)| {
            (r.col_min..=r.col_max).contains(&grid_col) && (r.row_min..=r.row_max).contains(&grid_row)
        });
        let len = family.slice_payload_len(site.kind).unwrap();
        for slice in 0..family.slices_per_clb {
            let payload: Vec<u8> = match owner {
                Some((s, c, _)) => {
                    let sig = &signatures[*s];
                    let d = sig.construction_density(*c);
                    (0..len).map(|_| sig.sample_byte(d, &mut rng)).collect()
                }
                None => (0..len)
                    .map(|_| {
                        if rng.random_bool(config.noise) {
                            rng.random_range(1..=255)
                        } else {
                            0
                        }
                    })
                    .collect(),
            };
            if payload.iter().any(|&b| b != 0) {
                payloads.push((SlicePos::new(grid_row, grid_col, slice), payload));
            }
        }
    }
    let container = synthesize_container(profile, &payloads, 0, config.format)?;
    Ok(SynthImage {
        placements: placed.into_iter().map(|(_, _, r)| r).collect(),
        container,
        regenerated,
    })
}

/// Writes a synthetic corpus under `out_dir`: `profile.json`,
/// `bitstreams/`, `placements/` and `manifest.json`.
pub fn synth_dataset(
    profile: &DeviceProfile,
    signatures: &[ClassSignature],
    config: &SynthConfig,
    out_dir: impl AsRef<Path>,
) -> Result<(DatasetManifest, SynthSummary), DatasetError> {
    if config.count == 0 {
        return Err(DatasetError::Manifest("count must be >= 1".into()));
    }
    if signatures.is_empty() {
        return Err(DatasetError::Signature("no signatures".into()));
    }
    if !(0.0..=1.0).contains(&config.noise) {
        return Err(DatasetError::Manifest(format!("noise {} outside [0, 1]", config.noise)));
    }
    for s in signatures {
        s.validate(profile)?;
    }
    let out_dir = out_dir.as_ref();
    for sub in ["bitstreams", "placements"] {
        let d = out_dir.join(sub);
        std::fs::create_dir_all(&d).map_err(io_err(&d))?;
    }
    profile.save(out_dir.join("profile.json"))?;
    let ext = match config.format {
        ContainerFormat::Synth => "bcv",
        ContainerFormat::XilinxBin => "bin",
    };

    let results: Vec<Result<(ManifestEntry, usize, usize), DatasetError>> = (0..config.count)
        .into_par_iter()
        .map(|i| {
            let img = synth_image(profile, signatures, config, i)?;
            let bit = PathBuf::from("bitstreams").join(format!("img_{i:05}.{ext}"));
            let place = PathBuf::from("placements").join(format!("img_{i:05}.json"));
            write_atomic(&out_dir.join(&bit), &img.container)?;
            PlacementFile {
                placements: img.placements.clone(),
            }
            .save(out_dir.join(&place))?;
            Ok((
                ManifestEntry {
                    bitstream: bit,
                    placement: place,
                    format: config.format,
                },
                img.placements.len(),
                img.regenerated,
            ))
        })
        .collect();

    let mut entries = Vec::with_capacity(config.count);
    let mut summary = SynthSummary {
        images: 0,
        blocks: 0,
        regenerated: 0,
    };
    for r in results {
        let (entry, blocks, regen) = r?;
        entries.push(entry);
        summary.images += 1;
        summary.blocks += blocks;
        summary.regenerated += regen;
    }
    let manifest = DatasetManifest {
        profile: PathBuf::from("profile.json"),
        classes: signatures.iter().map(|s| s.class_label.clone()).collect(),
        seed: config.seed,
        ratio: DEFAULT_SPLIT_RATIO,
        entries,
        base_dir: out_dir.to_path_buf(),
    };
    manifest.save(out_dir.join("manifest.json"))?;
    Ok((manifest, summary))
}

pub fn load_signatures(path: impl AsRef<Path>) -> Result<Vec<ClassSignature>, DatasetError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| DatasetError::Json {
        path: path.display().to_string(),
        source,
    })
}
