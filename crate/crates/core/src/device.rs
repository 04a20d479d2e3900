//! Device profiles: frame geometry, configuration column layout and the
//! CLB grid that every downstream address computation is derived from.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Frames consumed by a synthetic non-CLB column (a BRAM column on Zynq-7000).
pub const SYNTH_OTHER_COLUMN_FRAMES: u32 = 28;

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed profile JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid profile: {0}")]
    Invalid(String),
    #[error("unknown builtin family `{0}`")]
    UnknownFamily(String),
    #[error("config row {0} out of range")]
    RowOutOfRange(usize),
    #[error("column {column} out of range in config row {row}")]
    ColumnOutOfRange { row: usize, column: usize },
    #[error("column {column} in config row {row} is not a CLB column")]
    NotClbColumn { row: usize, column: usize },
}

fn invalid(msg: impl Into<String>) -> ProfileError {
    ProfileError::Invalid(msg.into())
}

/// Slice flavour a CLB column is built from. Families with uniform columns
/// only ever use `Uniform`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SliceKind {
    Uniform,
    L,
    M,
}

impl fmt::Display for SliceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SliceKind::Uniform => "uniform",
            SliceKind::L => "SLICEL",
            SliceKind::M => "SLICEM",
        })
    }
}

/// A per-slice-kind parameter: one value for uniform families, separate
/// SLICEL/SLICEM values otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerKind<T> {
    Uniform(T),
    Split {
        #[serde(rename = "L")]
        l: T,
        #[serde(rename = "M")]
        m: T,
    },
}

impl<T: Copy> PerKind<T> {
    /// Looks up the value for `kind`. A split parameter has no value for
    /// `SliceKind::Uniform`.
    pub fn get(&self, kind: SliceKind) -> Option<T> {
        match (self, kind) {
            (PerKind::Uniform(v), _) => Some(*v),
            (PerKind::Split { l, .. }, SliceKind::L) => Some(*l),
            (PerKind::Split { m, .. }, SliceKind::M) => Some(*m),
            (PerKind::Split { .. }, SliceKind::Uniform) => None,
        }
    }

    pub fn values(&self) -> Vec<T> {
        match self {
            PerKind::Uniform(v) => vec![*v],
            PerKind::Split { l, m } => vec![*l, *m],
        }
    }

    pub fn is_split(&self) -> bool {
        matches!(self, PerKind::Split { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSize {
    pub h: u32,
    pub w: u32,
}

impl BlockSize {
    pub const fn new(h: u32, w: u32) -> Self {
        Self { h, w }
    }

    /// Bytes held by a three-channel block.
    pub fn capacity(&self) -> usize {
        self.h as usize * self.w as usize * 3
    }
}

/// Bitstream format parameters shared by every device of a family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyParams {
    /// 32-bit words per frame.
    #[serde(rename = "m")]
    pub frame_words: u32,
    /// CLBs stacked in one configuration column.
    #[serde(rename = "q")]
    pub clbs_per_column: u32,
    /// Words in the middle of each frame that configure no CLB.
    #[serde(rename = "l")]
    pub excluded_mid_words: u32,
    /// Bytes of one frame assigned to a single CLB.
    pub clb_bytes_per_frame: u32,
    /// Frames configuring one CLB column.
    #[serde(rename = "n")]
    pub frames_per_column: PerKind<u32>,
    pub slices_per_clb: u32,
    /// Pixel block a single slice is rendered into.
    #[serde(rename = "block")]
    pub slice_block: PerKind<BlockSize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub swap_word_bytes: bool,
}

impl FamilyParams {
    pub fn zynq7000() -> Self {
        Self {
            frame_words: 101,
            clbs_per_column: 50,
            excluded_mid_words: 1,
            clb_bytes_per_frame: 8,
            frames_per_column: PerKind::Uniform(36),
            slices_per_clb: 2,
            slice_block: PerKind::Uniform(BlockSize::new(6, 8)),
            swap_word_bytes: false,
        }
    }

    pub fn ultrascale_plus() -> Self {
        Self {
            frame_words: 93,
            clbs_per_column: 60,
            excluded_mid_words: 3,
            clb_bytes_per_frame: 6,
            frames_per_column: PerKind::Split { l: 29, m: 79 },
            slices_per_clb: 1,
            slice_block: PerKind::Split {
                l: BlockSize::new(7, 9),
                m: BlockSize::new(7, 23),
            },
            swap_word_bytes: false,
        }
    }

    /// Builtin parameter sets addressable by name from profile files.
    pub fn builtin(name: &str) -> Result<Self, ProfileError> {
        match name {
            "zynq7000" | "zynq7000-family" | "zynq-7000" => Ok(Self::zynq7000()),
            "ultrascale" | "ultrascale-family" | "ultrascale_plus" | "zynq-ultrascale+" => {
                Ok(Self::ultrascale_plus())
            }
            other => Err(ProfileError::UnknownFamily(other.to_string())),
        }
    }

    /// Reads a standalone family parameter file and validates it.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProfileError> {
        let text = read_text(path.as_ref())?;
        let family: FamilyParams = serde_json::from_str(&text)?;
        family.validate()?;
        Ok(family)
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        let m = self.frame_words;
        let l = self.excluded_mid_words;
        if m == 0 || self.clbs_per_column == 0 || self.clb_bytes_per_frame == 0 {
            return Err(invalid("m, q and clb_bytes_per_frame must be > 0"));
        }
        if self.slices_per_clb == 0 {
            return Err(invalid("slices_per_clb must be >= 1"));
        }
        if l >= m {
            return Err(invalid(format!("excluded words l={l} must be < m={m}")));
        }
        if (m - l) % 2 != 0 {
            return Err(invalid(format!(
                "m-l={} must be even so the excluded span can be centered",
                m - l
            )));
        }
        let budget = (m - l) as u64 * 4;
        let covered = self.clbs_per_column as u64 * self.clb_bytes_per_frame as u64;
        if budget != covered {
            return Err(invalid(format!(
                "byte budget: (m-l)*4 = {budget} != q*clb_bytes_per_frame = {covered}"
            )));
        }
        if self.clb_bytes_per_frame % self.slices_per_clb != 0 {
            return Err(invalid(format!(
                "clb_bytes_per_frame {} not divisible by slices_per_clb {}",
                self.clb_bytes_per_frame, self.slices_per_clb
            )));
        }
        if self.frames_per_column.values().contains(&0) {
            return Err(invalid("frames per CLB column must be > 0"));
        }
        if self.frames_per_column.is_split() != self.slice_block.is_split() {
            return Err(invalid(
                "n and block must both be uniform or both be split by slice kind",
            ));
        }
        for kind in self.kinds() {
            let block = self.slice_block.get(kind).unwrap();
            if block.h == 0 || block.w == 0 {
                return Err(invalid("slice block dimensions must be > 0"));
            }
            let payload = self.slice_payload_len(kind).unwrap();
            if payload > block.capacity() {
                return Err(invalid(format!(
                    "{kind} payload of {payload} bytes exceeds {}x{}x3 block",
                    block.h, block.w
                )));
            }
        }
        Ok(())
    }

    /// Slice kinds that carry parameters in this family.
    pub fn kinds(&self) -> Vec<SliceKind> {
        if self.frames_per_column.is_split() {
            vec![SliceKind::L, SliceKind::M]
        } else {
            vec![SliceKind::Uniform]
        }
    }

    pub fn frame_bytes(&self) -> usize {
        self.frame_words as usize * 4
    }

    /// Half-open byte span of the excluded middle words within a raw frame.
    pub fn excluded_span(&self) -> (usize, usize) {
        let start = 2 * (self.frame_words - self.excluded_mid_words) as usize;
        (start, start + 4 * self.excluded_mid_words as usize)
    }

    /// Length of the reduced frame stream (excluded span removed).
    pub fn reduced_frame_bytes(&self) -> usize {
        4 * (self.frame_words - self.excluded_mid_words) as usize
    }

    pub fn frames_for(&self, kind: SliceKind) -> Option<u32> {
        self.frames_per_column.get(kind)
    }

    pub fn block_for(&self, kind: SliceKind) -> Option<BlockSize> {
        self.slice_block.get(kind)
    }

    pub fn slice_bytes_per_frame(&self) -> usize {
        (self.clb_bytes_per_frame / self.slices_per_clb) as usize
    }

    pub fn clb_payload_len(&self, kind: SliceKind) -> Option<usize> {
        self.frames_for(kind)
            .map(|n| n as usize * self.clb_bytes_per_frame as usize)
    }

    pub fn slice_payload_len(&self, kind: SliceKind) -> Option<usize> {
        self.frames_for(kind)
            .map(|n| n as usize * self.slice_bytes_per_frame())
    }

    /// Pixel width of one grid column holding CLBs of `kind`.
    pub fn clb_pixel_width(&self, kind: SliceKind) -> Option<u32> {
        self.block_for(kind).map(|b| b.w * self.slices_per_clb)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColumnKind {
    #[serde(rename = "clb_l")]
    ClbL,
    #[serde(rename = "clb_m")]
    ClbM,
    #[serde(rename = "clb")]
    ClbUniform,
    #[serde(rename = "other")]
    NonClb,
}

impl ColumnKind {
    pub fn slice_kind(self) -> Option<SliceKind> {
        match self {
            ColumnKind::ClbL => Some(SliceKind::L),
            ColumnKind::ClbM => Some(SliceKind::M),
            ColumnKind::ClbUniform => Some(SliceKind::Uniform),
            ColumnKind::NonClb => None,
        }
    }

    pub fn is_clb(self) -> bool {
        self != ColumnKind::NonClb
    }
}

/// One configuration column in bitstream order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSpec {
    pub kind: ColumnKind,
    #[serde(rename = "frames")]
    pub frame_count: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_col: Option<u32>,
}

impl ColumnSpec {
    pub fn clb(kind: ColumnKind, frames: u32) -> Self {
        Self {
            kind,
            frame_count: frames,
            grid_col: None,
        }
    }

    pub fn other(frames: u32) -> Self {
        Self::clb(ColumnKind::NonClb, frames)
    }
}

/// Where a CLB grid cell lives in the configuration stream. `clb_row` counts
/// from the bottom of the column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ClbSite {
    pub config_row: usize,
    pub column_id: usize,
    pub clb_row: u32,
    pub kind: SliceKind,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rows: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cols: Option<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum FamilyRef {
    Builtin(String),
    Inline(FamilyParams),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    name: String,
    family: FamilyRef,
    rows: Vec<Vec<ColumnSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<GridOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bitstream_bits: Option<u64>,
}

/// A validated device description. Immutable once built.
///
/// Config row `k` covers device grid rows `[k*q, (k+1)*q)`, counted from the
/// bottom of the device. Each CLB column occupies one grid column; unless a
/// column names its `grid_col` explicitly it takes the grid column after the
/// previous CLB column of the same row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeviceProfile {
    name: String,
    family: FamilyParams,
    rows: Vec<Vec<ColumnSpec>>,
    grid_rows: u32,
    grid_cols: u32,
    bitstream_bits: Option<u64>,
    // derived
    column_start: Vec<Vec<u64>>,
    total_frames: u64,
    grid_map: Vec<Option<ClbSite>>,
    col_kind: Vec<SliceKind>,
    col_x: Vec<u32>,
    width_px: u32,
}

impl DeviceProfile {
    /// Validates and builds a profile. `grid_cols` defaults to one past the
    /// largest grid column any CLB column occupies.
    pub fn new(
        name: impl Into<String>,
        family: FamilyParams,
        rows: Vec<Vec<ColumnSpec>>,
        grid_cols: Option<u32>,
        bitstream_bits: Option<u64>,
    ) -> Result<Self, ProfileError> {
        family.validate()?;
        let name = name.into();
        let q = family.clbs_per_column;
        let mut rows = rows;

        // assign grid columns and validate column specs
        let mut max_col: Option<u32> = None;
        for (r, row) in rows.iter_mut().enumerate() {
            let mut next = 0u32;
            let mut seen = BTreeMap::new();
            for (c, col) in row.iter_mut().enumerate() {
                if col.frame_count == 0 {
                    return Err(invalid(format!("row {r} column {c}: frame count must be > 0")));
                }
                match col.kind.slice_kind() {
                    None => {
                        if col.grid_col.is_some() {
                            return Err(invalid(format!(
                                "row {r} column {c}: non-CLB column cannot occupy a grid column"
                            )));
                        }
                    }
                    Some(kind) => {
                        let n = family.frames_for(kind).ok_or_else(|| {
                            invalid(format!(
                                "row {r} column {c}: family distinguishes SLICEL/SLICEM, use clb_l or clb_m"
                            ))
                        })?;
                        if col.frame_count != n {
                            return Err(invalid(format!(
                                "row {r} column {c}: {kind} column must span {n} frames, got {}",
                                col.frame_count
                            )));
                        }
                        let g = col.grid_col.unwrap_or(next);
                        if let Some(prev) = seen.insert(g, c) {
                            return Err(invalid(format!(
                                "row {r}: columns {prev} and {c} both occupy grid column {g}"
                            )));
                        }
                        col.grid_col = Some(g);
                        next = g + 1;
                        max_col = Some(max_col.map_or(g, |m| m.max(g)));
                    }
                }
            }
        }

        let derived_cols = max_col.map_or(0, |m| m + 1);
        let grid_cols = grid_cols.unwrap_or(derived_cols);
        if grid_cols < derived_cols {
            return Err(invalid(format!(
                "grid cols {grid_cols} smaller than occupied columns {derived_cols}"
            )));
        }
        let grid_rows = rows.len() as u32 * q;

        let mut column_start = Vec::with_capacity(rows.len());
        let mut acc = 0u64;
        for row in &rows {
            let mut starts = Vec::with_capacity(row.len());
            for col in row {
                starts.push(acc);
                acc += col.frame_count as u64;
            }
            column_start.push(starts);
        }

        let cells = grid_rows as usize * grid_cols as usize;
        let mut grid_map = vec![None; cells];
        let mut col_kind: Vec<Option<SliceKind>> = vec![None; grid_cols as usize];
        for (r, row) in rows.iter().enumerate() {
            for (c, col) in row.iter().enumerate() {
                let (Some(kind), Some(g)) = (col.kind.slice_kind(), col.grid_col) else {
                    continue;
                };
                match col_kind[g as usize] {
                    Some(k) if family.clb_pixel_width(k) != family.clb_pixel_width(kind) => {
                        return Err(invalid(format!(
                            "grid column {g} mixes {k} and {kind} CLBs of different widths"
                        )));
                    }
                    Some(_) => {}
                    None => col_kind[g as usize] = Some(kind),
                }
                for clb_row in 0..q {
                    let dev_row = r as u32 * q + clb_row;
                    grid_map[dev_row as usize * grid_cols as usize + g as usize] = Some(ClbSite {
                        config_row: r,
                        column_id: c,
                        clb_row,
                        kind,
                    });
                }
            }
        }

        let uniform_width = {
            let widths: Vec<u32> = family
                .kinds()
                .into_iter()
                .filter_map(|k| family.clb_pixel_width(k))
                .collect();
            if widths.windows(2).all(|w| w[0] == w[1]) {
                widths.first().copied()
            } else {
                None
            }
        };
        let mut resolved_kind = Vec::with_capacity(grid_cols as usize);
        let mut col_x = Vec::with_capacity(grid_cols as usize);
        let mut x = 0u32;
        for (g, kind) in col_kind.iter().enumerate() {
            let kind = match kind {
                Some(k) => *k,
                None if uniform_width.is_some() => family.kinds()[0],
                None => {
                    return Err(invalid(format!(
                        "grid column {g} holds no CLB and slice widths differ; its width is undefined"
                    )))
                }
            };
            col_x.push(x);
            x += family.clb_pixel_width(kind).unwrap();
            resolved_kind.push(kind);
        }

        Ok(Self {
            name,
            family,
            rows,
            grid_rows,
            grid_cols,
            bitstream_bits,
            column_start,
            total_frames: acc,
            grid_map,
            col_kind: resolved_kind,
            col_x,
            width_px: x,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, ProfileError> {
        let file: ProfileFile = serde_json::from_str(text)?;
        let family = match file.family {
            FamilyRef::Builtin(name) => FamilyParams::builtin(&name)?,
            FamilyRef::Inline(f) => f,
        };
        let grid = file.grid.unwrap_or_default();
        let profile = Self::new(file.name, family, file.rows, grid.cols, file.bitstream_bits)?;
        if let Some(rows) = grid.rows {
            if rows != profile.grid_rows {
                return Err(invalid(format!(
                    "grid rows {rows} != config rows x q = {}",
                    profile.grid_rows
                )));
            }
        }
        Ok(profile)
    }

    /// Canonical JSON form. Grid columns are always written explicitly.
    pub fn to_json(&self) -> String {
        let file = ProfileFile {
            name: self.name.clone(),
            family: FamilyRef::Inline(self.family.clone()),
            rows: self.rows.clone(),
            grid: Some(GridOverride {
                rows: Some(self.grid_rows),
                cols: Some(self.grid_cols),
            }),
            bitstream_bits: self.bitstream_bits,
        };
        serde_json::to_string_pretty(&file).expect("profile serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ProfileError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|source| ProfileError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> &FamilyParams {
        &self.family
    }

    pub fn rows(&self) -> &[Vec<ColumnSpec>] {
        &self.rows
    }

    /// Grid rows `a`.
    pub fn grid_rows(&self) -> u32 {
        self.grid_rows
    }

    /// Grid columns `b`.
    pub fn grid_cols(&self) -> u32 {
        self.grid_cols
    }

    pub fn bitstream_bits(&self) -> Option<u64> {
        self.bitstream_bits
    }

    pub fn total_fdri_frames(&self) -> u64 {
        self.total_frames
    }

    pub fn total_fdri_words(&self) -> u64 {
        self.total_frames * self.family.frame_words as u64
    }

    pub fn first_frame_index(&self, config_row: usize, column_id: usize) -> Result<u64, ProfileError> {
        let row = self
            .rows
            .get(config_row)
            .ok_or(ProfileError::RowOutOfRange(config_row))?;
        let col = row.get(column_id).ok_or(ProfileError::ColumnOutOfRange {
            row: config_row,
            column: column_id,
        })?;
        if !col.kind.is_clb() {
            return Err(ProfileError::NotClbColumn {
                row: config_row,
                column: column_id,
            });
        }
        Ok(self.column_start[config_row][column_id])
    }

    /// CLB site at a bottom-origin grid position, `None` for non-CLB cells.
    pub fn site(&self, grid_row: u32, grid_col: u32) -> Option<ClbSite> {
        if grid_row >= self.grid_rows || grid_col >= self.grid_cols {
            return None;
        }
        self.grid_map[grid_row as usize * self.grid_cols as usize + grid_col as usize]
    }

    /// Every CLB cell as `(grid_row, grid_col, site)`.
    pub fn sites(&self) -> impl Iterator<Item = (u32, u32, ClbSite)> + '_ {
        let cols = self.grid_cols as usize;
        self.grid_map
            .iter()
            .enumerate()
            .filter_map(move |(i, s)| s.map(|s| ((i / cols) as u32, (i % cols) as u32, s)))
    }

    pub fn clb_count(&self) -> usize {
        self.grid_map.iter().filter(|s| s.is_some()).count()
    }

    /// Slice kind that determines the pixel width of a grid column.
    pub fn column_kind(&self, grid_col: u32) -> SliceKind {
        self.col_kind[grid_col as usize]
    }

    /// Left pixel edge of a grid column.
    pub fn column_x(&self, grid_col: u32) -> u32 {
        self.col_x[grid_col as usize]
    }

    pub fn column_width_px(&self, grid_col: u32) -> u32 {
        self.family
            .clb_pixel_width(self.col_kind[grid_col as usize])
            .unwrap()
    }

    /// Height of one grid row in pixels. All slice blocks of a family share
    /// a height.
    pub fn row_height_px(&self) -> u32 {
        self.family
            .slice_block
            .values()
            .into_iter()
            .map(|b| b.h)
            .max()
            .unwrap_or(0)
    }

    pub fn image_width(&self) -> u32 {
        self.width_px
    }

    pub fn image_height(&self) -> u32 {
        self.grid_rows * self.row_height_px()
    }
}

fn read_text(path: &Path) -> Result<String, ProfileError> {
    std::fs::read_to_string(path).map_err(|source| ProfileError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_profile(path: impl AsRef<Path>) -> Result<DeviceProfile, ProfileError> {
    DeviceProfile::from_json(&read_text(path.as_ref())?)
}

/// Deterministic desk-scale layout: every config row repeats the same column
/// sequence, with `non_clb_columns_per_row` 28-frame columns interleaved at
/// seeded positions. Split families get a seeded SLICEL/SLICEM pattern per
/// grid column.
pub fn synthetic_profile(
    family: &FamilyParams,
    clock_region_rows: u32,
    clb_columns_per_row: u32,
    non_clb_columns_per_row: u32,
    seed: u64,
) -> Result<DeviceProfile, ProfileError> {
    if clock_region_rows == 0 || clb_columns_per_row == 0 {
        return Err(invalid("synthetic profile needs at least one row and one CLB column"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds: Vec<ColumnKind> = (0..clb_columns_per_row)
        .map(|_| {
            if family.frames_per_column.is_split() {
                if rng.random_bool(0.5) {
                    ColumnKind::ClbL
                } else {
                    ColumnKind::ClbM
                }
            } else {
                ColumnKind::ClbUniform
            }
        })
        .collect();
    let total = (clb_columns_per_row + non_clb_columns_per_row) as usize;
    let mut is_other = vec![false; total];
    for flag in is_other.iter_mut().take(non_clb_columns_per_row as usize) {
        *flag = true;
    }
    is_other.shuffle(&mut rng);

    let mut row = Vec::with_capacity(total);
    let mut kinds = kinds.into_iter();
    for other in is_other {
        if other {
            row.push(ColumnSpec::other(SYNTH_OTHER_COLUMN_FRAMES));
        } else {
            let kind = kinds.next().unwrap();
            let n = family.frames_for(kind.slice_kind().unwrap()).unwrap_or(0);
            row.push(ColumnSpec::clb(kind, n));
        }
    }
    let rows = vec![row; clock_region_rows as usize];
    let name = format!(
        "synthetic-{}r{}c{}x-s{}",
        clock_region_rows, clb_columns_per_row, non_clb_columns_per_row, seed
    );
    DeviceProfile::new(name, family.clone(), rows, None, None)
}
