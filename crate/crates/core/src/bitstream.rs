//! Bitstream containers, frame arrays and the frame -> CLB -> slice
//! extraction path, plus the inverse used to synthesize test bitstreams.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::device::{DeviceProfile, SliceKind};

pub const SYNC_WORD: u32 = 0xAA99_5566;
pub const SYNTH_MAGIC: &[u8; 4] = b"BCV1";

/// Configuration register address of FDRI.
const REG_FDRI: u32 = 0b00010;
const REG_CMD: u32 = 0b00100;
const NOOP: u32 = 0x2000_0000;
const CMD_DESYNC: u32 = 0x0000_000D;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BitstreamError {
    #[error("missing sync word")]
    MissingSync,
    #[error("no FDRI write packet after sync word")]
    NoFdri,
    #[error("bad container magic")]
    BadMagic,
    #[error("truncated file: {0}")]
    Truncated(String),
    #[error("FDRI data holds {have} words, profile requires {need}")]
    FdriTooShort { have: u64, need: u64 },
    #[error("container frame size is {found} words, profile expects {expected}")]
    FrameWordsMismatch { found: u32, expected: u32 },
    #[error("CRC mismatch: stored {stored:08x}, computed {computed:08x}")]
    Crc { stored: u32, computed: u32 },
    #[error("frame array has {have} frames, profile requires {need}")]
    FrameCount { have: usize, need: u64 },
    #[error("grid position ({grid_row}, {grid_col}) holds no CLB")]
    NotClb { grid_row: u32, grid_col: u32 },
    #[error("config row {row} column {column} is not a CLB column in this profile")]
    BadColumn { row: usize, column: usize },
    #[error("CLB row {0} out of range")]
    ClbRowOutOfRange(u32),
    #[error("slice index {index} out of range (CLB has {slices} slices)")]
    SliceOutOfRange { index: u32, slices: u32 },
    #[error("{kind} slice payload must be {expected} bytes, got {found}")]
    PayloadLength {
        kind: SliceKind,
        expected: usize,
        found: usize,
    },
    #[error("CLB byte block must be {expected} bytes, got {found}")]
    ClbLength { expected: usize, found: usize },
    #[error("duplicate payload for slice {0:?}")]
    DuplicatePosition(SlicePos),
    #[error("{0}")]
    Profile(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ContainerFormat {
    #[default]
    Synth,
    XilinxBin,
}

impl FromStr for ContainerFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "synth" => Ok(Self::Synth),
            "xilinx" | "xilinx_bin" | "bin" | "bit" => Ok(Self::XilinxBin),
            other => Err(format!("unknown container format `{other}` (synth|xilinx)")),
        }
    }
}

impl fmt::Display for ContainerFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Synth => "synth",
            Self::XilinxBin => "xilinx",
        })
    }
}

/// Ordered FDRI frames, stored contiguously. Words keep file byte order
/// (after the profile's optional per-word swap).
#[derive(Clone, PartialEq, Eq)]
pub struct FrameArray {
    frame_bytes: usize,
    data: Vec<u8>,
}

impl fmt::Debug for FrameArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FrameArray")
            .field("frames", &self.len())
            .field("frame_bytes", &self.frame_bytes)
            .finish()
    }
}

impl FrameArray {
    pub fn zeroed(profile: &DeviceProfile) -> Self {
        let frame_bytes = profile.family().frame_bytes();
        Self {
            frame_bytes,
            data: vec![0; frame_bytes * profile.total_fdri_frames() as usize],
        }
    }

    /// Wraps raw frame bytes. `data.len()` must be a multiple of `frame_bytes`.
    pub fn from_bytes(frame_bytes: usize, data: Vec<u8>) -> Self {
        assert!(frame_bytes > 0 && data.len() % frame_bytes == 0);
        Self { frame_bytes, data }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.frame_bytes
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn frame_bytes(&self) -> usize {
        self.frame_bytes
    }

    pub fn frame(&self, index: usize) -> &[u8] {
        &self.data[index * self.frame_bytes..(index + 1) * self.frame_bytes]
    }

    pub fn frame_mut(&mut self, index: usize) -> &mut [u8] {
        &mut self.data[index * self.frame_bytes..(index + 1) * self.frame_bytes]
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.data
    }

    pub fn check_bound(&self, profile: &DeviceProfile) -> Result<(), BitstreamError> {
        let need = profile.total_fdri_frames();
        if self.frame_bytes != profile.family().frame_bytes() || self.len() as u64 != need {
            return Err(BitstreamError::FrameCount {
                have: self.len(),
                need,
            });
        }
        Ok(())
    }
}

/// Result of parsing a container: the profile-sized frame array and the
/// count of FDRI words found beyond it.
#[derive(Clone, Debug)]
pub struct ParsedContainer {
    pub frames: FrameArray,
    pub ignored_trailing_words: u64,
}

fn swap_words(bytes: &mut [u8]) {
    for word in bytes.chunks_exact_mut(4) {
        word.reverse();
    }
}

fn be_u32(bytes: &[u8], at: usize) -> Option<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
}

/// Splits a container into frames sized by `profile`.
pub fn parse_container(
    bytes: &[u8],
    profile: &DeviceProfile,
    format: ContainerFormat,
) -> Result<ParsedContainer, BitstreamError> {
    let (payload, available_words) = match format {
        ContainerFormat::Synth => synth_payload(bytes, profile)?,
        ContainerFormat::XilinxBin => xilinx_fdri_payload(bytes)?,
    };
    let need_words = profile.total_fdri_words();
    if available_words < need_words {
        return Err(BitstreamError::FdriTooShort {
            have: available_words,
            need: need_words,
        });
    }
    let need_bytes = need_words as usize * 4;
    let mut data = payload[..need_bytes].to_vec();
    if profile.family().swap_word_bytes {
        swap_words(&mut data);
    }
    Ok(ParsedContainer {
        frames: FrameArray::from_bytes(profile.family().frame_bytes(), data),
        ignored_trailing_words: available_words - need_words,
    })
}

fn synth_payload<'a>(
    bytes: &'a [u8],
    profile: &DeviceProfile,
) -> Result<(&'a [u8], u64), BitstreamError> {
    if bytes.len() < 4 || &bytes[..4] != SYNTH_MAGIC {
        return Err(BitstreamError::BadMagic);
    }
    let short = |what: &str| BitstreamError::Truncated(format!("container ends inside {what}"));
    let name_len = bytes
        .get(4..6)
        .map(|b| u16::from_be_bytes([b[0], b[1]]) as usize)
        .ok_or_else(|| short("header"))?;
    let mut at = 6 + name_len;
    if bytes.len() < at {
        return Err(short("profile name"));
    }
    let frame_count = be_u32(bytes, at).ok_or_else(|| short("header"))? as u64;
    at += 4;
    let m = bytes
        .get(at..at + 2)
        .map(|b| u16::from_be_bytes([b[0], b[1]]) as u32)
        .ok_or_else(|| short("header"))?;
    at += 2;
    if m != profile.family().frame_words {
        return Err(BitstreamError::FrameWordsMismatch {
            found: m,
            expected: profile.family().frame_words,
        });
    }
    let payload_len = frame_count as usize * m as usize * 4;
    let payload = bytes
        .get(at..at + payload_len)
        .ok_or_else(|| short("frame payload"))?;
    let stored = be_u32(bytes, at + payload_len).ok_or_else(|| short("CRC"))?;
    let computed = crc32fast::hash(payload);
    if stored != computed {
        return Err(BitstreamError::Crc { stored, computed });
    }
    Ok((payload, frame_count * m as u64))
}

/// Locates the FDRI write after the sync word. Anything before the sync
/// word (a `.bit` text header, bus-width probes) is skipped.
fn xilinx_fdri_payload(bytes: &[u8]) -> Result<(&[u8], u64), BitstreamError> {
    let sync = SYNC_WORD.to_be_bytes();
    let start = bytes
        .windows(4)
        .position(|w| w == sync)
        .ok_or(BitstreamError::MissingSync)?
        + 4;
    let mut at = start;
    while let Some(header) = be_u32(bytes, at) {
        at += 4;
        let kind = header >> 29;
        match kind {
            1 => {
                let opcode = (header >> 27) & 0x3;
                let reg = (header >> 13) & 0x1F;
                let mut count = (header & 0x7FF) as u64;
                if opcode == 2 && reg == REG_FDRI {
                    if count == 0 {
                        if let Some(next) = be_u32(bytes, at) {
                            if next >> 29 == 2 {
                                at += 4;
                                count = (next & 0x07FF_FFFF) as u64;
                            }
                        }
                    }
                    let len = count as usize * 4;
                    let payload = bytes.get(at..at + len).ok_or_else(|| {
                        BitstreamError::Truncated(format!(
                            "FDRI declares {count} words, {} bytes remain",
                            bytes.len() - at
                        ))
                    })?;
                    return Ok((payload, count));
                }
                at += count as usize * 4;
            }
            2 => {
                at += (header & 0x07FF_FFFF) as usize * 4;
            }
            _ => {}
        }
    }
    Err(BitstreamError::NoFdri)
}

/// Reduced-stream byte range `[start, end)` mapped onto raw frame bytes,
/// split around the excluded middle span.
fn raw_segments(profile: &DeviceProfile, start: usize, end: usize) -> [(usize, usize); 2] {
    let (ex_start, ex_end) = profile.family().excluded_span();
    let gap = ex_end - ex_start;
    if end <= ex_start {
        [(start, end), (0, 0)]
    } else if start >= ex_start {
        [(start + gap, end + gap), (0, 0)]
    } else {
        [(start, ex_start), (ex_end, end + gap)]
    }
}

fn clb_column(
    profile: &DeviceProfile,
    config_row: usize,
    column_id: usize,
) -> Result<(u64, SliceKind), BitstreamError> {
    let first = profile
        .first_frame_index(config_row, column_id)
        .map_err(|_| BitstreamError::BadColumn {
            row: config_row,
            column: column_id,
        })?;
    let kind = profile.rows()[config_row][column_id]
        .kind
        .slice_kind()
        .unwrap();
    Ok((first, kind))
}

/// Gathers the `clb_bytes_per_frame * n` bytes configuring one CLB.
/// `clb_row` 0 is the bottom of the column.
pub fn extract_clb_bytes(
    frames: &FrameArray,
    profile: &DeviceProfile,
    config_row: usize,
    column_id: usize,
    clb_row: u32,
) -> Result<Vec<u8>, BitstreamError> {
    let family = profile.family();
    if clb_row >= family.clbs_per_column {
        return Err(BitstreamError::ClbRowOutOfRange(clb_row));
    }
    frames.check_bound(profile)?;
    let (first, kind) = clb_column(profile, config_row, column_id)?;
    let n = family.frames_for(kind).unwrap() as usize;
    let b = family.clb_bytes_per_frame as usize;
    let start = clb_row as usize * b;
    let segments = raw_segments(profile, start, start + b);
    let mut out = Vec::with_capacity(b * n);
    for f in 0..n {
        let frame = frames.frame(first as usize + f);
        for (s, e) in segments {
            out.extend_from_slice(&frame[s..e]);
        }
    }
    Ok(out)
}

/// Picks one slice's share out of a CLB's bytes: in every per-frame chunk
/// slice 0 (left) owns the first `B / slices_per_clb` bytes.
pub fn extract_slice_bytes(
    clb_bytes: &[u8],
    profile: &DeviceProfile,
    kind: SliceKind,
    slice_index: u32,
) -> Result<Vec<u8>, BitstreamError> {
    let family = profile.family();
    let slices = family.slices_per_clb;
    if slice_index >= slices {
        return Err(BitstreamError::SliceOutOfRange {
            index: slice_index,
            slices,
        });
    }
    let b = family.clb_bytes_per_frame as usize;
    if b % slices as usize != 0 {
        return Err(BitstreamError::Profile(format!(
            "clb_bytes_per_frame {b} not divisible by {slices} slices"
        )));
    }
    let expected = family
        .clb_payload_len(kind)
        .ok_or_else(|| BitstreamError::Profile(format!("family has no {kind} slices")))?;
    if clb_bytes.len() != expected {
        return Err(BitstreamError::ClbLength {
            expected,
            found: clb_bytes.len(),
        });
    }
    let share = b / slices as usize;
    let offset = share * slice_index as usize;
    Ok(clb_bytes
        .chunks_exact(b)
        .flat_map(|chunk| &chunk[offset..offset + share])
        .copied()
        .collect())
}

/// Convenience: extract one slice addressed by grid position.
pub fn extract_slice_at(
    frames: &FrameArray,
    profile: &DeviceProfile,
    pos: SlicePos,
) -> Result<Vec<u8>, BitstreamError> {
    let site = profile
        .site(pos.grid_row, pos.grid_col)
        .ok_or(BitstreamError::NotClb {
            grid_row: pos.grid_row,
            grid_col: pos.grid_col,
        })?;
    let clb = extract_clb_bytes(frames, profile, site.config_row, site.column_id, site.clb_row)?;
    extract_slice_bytes(&clb, profile, site.kind, pos.slice)
}

/// A slice addressed on the device grid (bottom-origin rows).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SlicePos {
    pub grid_row: u32,
    pub grid_col: u32,
    pub slice: u32,
}

impl SlicePos {
    pub fn new(grid_row: u32, grid_col: u32, slice: u32) -> Self {
        Self {
            grid_row,
            grid_col,
            slice,
        }
    }
}

/// Builds the frame array whose CLB bytes carry `slice_payloads`. Slices not
/// listed are filled with `fill`; excluded middle words and non-CLB columns
/// stay zero.
pub fn synthesize_frames(
    profile: &DeviceProfile,
    slice_payloads: &[(SlicePos, Vec<u8>)],
    fill: u8,
) -> Result<FrameArray, BitstreamError> {
    let family = profile.family();
    let slices = family.slices_per_clb;
    let mut seen = HashSet::with_capacity(slice_payloads.len());
    for (pos, payload) in slice_payloads {
        let site = profile
            .site(pos.grid_row, pos.grid_col)
            .ok_or(BitstreamError::NotClb {
                grid_row: pos.grid_row,
                grid_col: pos.grid_col,
            })?;
        if pos.slice >= slices {
            return Err(BitstreamError::SliceOutOfRange {
                index: pos.slice,
                slices,
            });
        }
        let expected = family.slice_payload_len(site.kind).unwrap();
        if payload.len() != expected {
            return Err(BitstreamError::PayloadLength {
                kind: site.kind,
                expected,
                found: payload.len(),
            });
        }
        if !seen.insert(*pos) {
            return Err(BitstreamError::DuplicatePosition(*pos));
        }
    }

    let mut frames = FrameArray::zeroed(profile);
    let b = family.clb_bytes_per_frame as usize;
    let share = family.slice_bytes_per_frame();
    if fill != 0 {
        for (_, _, site) in profile.sites() {
            let first = profile
                .first_frame_index(site.config_row, site.column_id)
                .unwrap() as usize;
            let n = family.frames_for(site.kind).unwrap() as usize;
            let start = site.clb_row as usize * b;
            let segments = raw_segments(profile, start, start + b);
            for f in 0..n {
                let frame = frames.frame_mut(first + f);
                for (s, e) in segments {
                    frame[s..e].fill(fill);
                }
            }
        }
    }
    for (pos, payload) in slice_payloads {
        let site = profile.site(pos.grid_row, pos.grid_col).unwrap();
        let first = profile
            .first_frame_index(site.config_row, site.column_id)
            .unwrap() as usize;
        let start = site.clb_row as usize * b + pos.slice as usize * share;
        let segments = raw_segments(profile, start, start + share);
        for (f, chunk) in payload.chunks_exact(share).enumerate() {
            let frame = frames.frame_mut(first + f);
            let mut rest = chunk;
            for (s, e) in segments {
                let (head, tail) = rest.split_at(e - s);
                frame[s..e].copy_from_slice(head);
                rest = tail;
            }
        }
    }
    Ok(frames)
}

/// Serializes frames into a container.
pub fn write_container(
    frames: &FrameArray,
    profile: &DeviceProfile,
    format: ContainerFormat,
) -> Result<Vec<u8>, BitstreamError> {
    frames.check_bound(profile)?;
    let mut payload = frames.as_bytes().to_vec();
    if profile.family().swap_word_bytes {
        swap_words(&mut payload);
    }
    let mut out = Vec::with_capacity(payload.len() + 256);
    match format {
        ContainerFormat::Synth => {
            let name = profile.name().as_bytes();
            let name_len = u16::try_from(name.len())
                .map_err(|_| BitstreamError::Profile("profile name too long".into()))?;
            let m = u16::try_from(profile.family().frame_words)
                .map_err(|_| BitstreamError::Profile("frame word count exceeds u16".into()))?;
            out.extend_from_slice(SYNTH_MAGIC);
            out.extend_from_slice(&name_len.to_be_bytes());
            out.extend_from_slice(name);
            out.extend_from_slice(&(frames.len() as u32).to_be_bytes());
            out.extend_from_slice(&m.to_be_bytes());
            out.extend_from_slice(&payload);
            out.extend_from_slice(&crc32fast::hash(&payload).to_be_bytes());
        }
        ContainerFormat::XilinxBin => {
            let words = (payload.len() / 4) as u32;
            if words > 0x07FF_FFFF {
                return Err(BitstreamError::Profile("FDRI too long for a type-2 packet".into()));
            }
            let push = |out: &mut Vec<u8>, w: u32| out.extend_from_slice(&w.to_be_bytes());
            for _ in 0..8 {
                push(&mut out, 0xFFFF_FFFF);
            }
            push(&mut out, 0x0000_00BB);
            push(&mut out, 0x1122_0044);
            push(&mut out, 0xFFFF_FFFF);
            push(&mut out, 0xFFFF_FFFF);
            push(&mut out, SYNC_WORD);
            push(&mut out, NOOP);
            push(&mut out, type1_write(REG_FDRI, 0));
            push(&mut out, 0x5000_0000 | words);
            out.extend_from_slice(&payload);
            push(&mut out, NOOP);
            push(&mut out, type1_write(REG_CMD, 1));
            push(&mut out, CMD_DESYNC);
            for _ in 0..4 {
                push(&mut out, NOOP);
            }
        }
    }
    Ok(out)
}

fn type1_write(reg: u32, count: u32) -> u32 {
    (1 << 29) | (2 << 27) | (reg << 13) | (count & 0x7FF)
}

/// `synthesize_frames` followed by `write_container`.
pub fn synthesize_container(
    profile: &DeviceProfile,
    slice_payloads: &[(SlicePos, Vec<u8>)],
    fill: u8,
    format: ContainerFormat,
) -> Result<Vec<u8>, BitstreamError> {
    let frames = synthesize_frames(profile, slice_payloads, fill)?;
    write_container(&frames, profile, format)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{synthetic_profile, FamilyParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small() -> DeviceProfile {
        synthetic_profile(&FamilyParams::zynq7000(), 1, 2, 0, 0).unwrap()
    }

    // Oracle: physically delete the excluded span, then slice.
    fn oracle_clb(frames: &FrameArray, p: &DeviceProfile, row: usize, col: usize, clb: u32) -> Vec<u8> {
        let f = p.family();
        let (s, e) = f.excluded_span();
        let mut first = 0usize;
        for r in 0..row {
            first += p.rows()[r].iter().map(|c| c.frame_count as usize).sum::<usize>();
        }
        first += p.rows()[row][..col].iter().map(|c| c.frame_count as usize).sum::<usize>();
        let n = p.rows()[row][col].frame_count as usize;
        let b = f.clb_bytes_per_frame as usize;
        let mut out = vec![];
        for i in first..first + n {
            let mut reduced = frames.frame(i).to_vec();
            reduced.drain(s..e);
            out.extend_from_slice(&reduced[clb as usize * b..(clb as usize + 1) * b]);
        }
        out
    }

    #[test]
    fn zero_frames_round_trip_synth_container() {
        let p = small();
        let bytes = synthesize_container(&p, &[], 0, ContainerFormat::Synth).unwrap();
        let parsed = parse_container(&bytes, &p, ContainerFormat::Synth).unwrap();
        assert_eq!(parsed.frames.len(), 72);
        assert!(parsed.frames.as_bytes().iter().all(|&b| b == 0));
        assert_eq!(parsed.ignored_trailing_words, 0);
        let clb = extract_clb_bytes(&parsed.frames, &p, 0, 0, 0).unwrap();
        assert_eq!(clb.len(), 288);
        assert!(clb.iter().all(|&b| b == 0));
    }

    #[test]
    fn clb_rows_match_deletion_oracle() {
        let p = synthetic_profile(&FamilyParams::zynq7000(), 2, 3, 1, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut frames = FrameArray::zeroed(&p);
        frames.data.iter_mut().for_each(|b| *b = rng.random());
        for (r, row) in p.rows().iter().enumerate() {
            for (c, col) in row.iter().enumerate() {
                if !col.kind.is_clb() {
                    continue;
                }
                for clb in 0..50 {
                    assert_eq!(
                        extract_clb_bytes(&frames, &p, r, c, clb).unwrap(),
                        oracle_clb(&frames, &p, r, c, clb)
                    );
                }
            }
        }
        // top CLB of the column reads raw [396, 404)
        let clb = extract_clb_bytes(&frames, &p, 0, p.rows()[0].iter().position(|c| c.kind.is_clb()).unwrap(), 49).unwrap();
        let first = p.rows()[0].iter().position(|c| c.kind.is_clb()).unwrap();
        let ff = p.first_frame_index(0, first).unwrap() as usize;
        assert_eq!(&clb[..8], &frames.frame(ff)[396..404]);
    }

    #[test]
    fn excluded_word_never_reaches_clb_bytes() {
        let p = small();
        let mut frames = FrameArray::zeroed(&p);
        for i in 0..frames.len() {
            frames.frame_mut(i)[200..204].copy_from_slice(&[0xFF; 4]);
        }
        for c in 0..2 {
            for clb in 0..50 {
                assert!(extract_clb_bytes(&frames, &p, 0, c, clb).unwrap().iter().all(|&b| b == 0));
            }
        }
    }

    #[test]
    fn slices_split_words_left_to_right() {
        let p = small();
        let clb: Vec<u8> = (0..288).map(|i| (i % 251) as u8).collect();
        let s0 = extract_slice_bytes(&clb, &p, SliceKind::Uniform, 0).unwrap();
        let s1 = extract_slice_bytes(&clb, &p, SliceKind::Uniform, 1).unwrap();
        assert_eq!(s0.len(), 144);
        for f in 0..36 {
            assert_eq!(&s0[f * 4..f * 4 + 4], &clb[f * 8..f * 8 + 4]);
            assert_eq!(&s1[f * 4..f * 4 + 4], &clb[f * 8 + 4..f * 8 + 8]);
        }
        assert!(matches!(
            extract_slice_bytes(&clb, &p, SliceKind::Uniform, 2),
            Err(BitstreamError::SliceOutOfRange { .. })
        ));
    }

    #[test]
    fn single_slice_family_is_identity() {
        let p = synthetic_profile(&FamilyParams::ultrascale_plus(), 1, 4, 1, 3).unwrap();
        let (_, _, site) = p.sites().next().unwrap();
        let len = p.family().clb_payload_len(site.kind).unwrap();
        let clb: Vec<u8> = (0..len).map(|i| i as u8).collect();
        assert_eq!(extract_slice_bytes(&clb, &p, site.kind, 0).unwrap(), clb);
    }

    #[test]
    fn interleave_reconstructs_clb() {
        let p = small();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let clb: Vec<u8> = (0..288).map(|_| rng.random()).collect();
        let s0 = extract_slice_bytes(&clb, &p, SliceKind::Uniform, 0).unwrap();
        let s1 = extract_slice_bytes(&clb, &p, SliceKind::Uniform, 1).unwrap();
        let rebuilt: Vec<u8> = s0
            .chunks(4)
            .zip(s1.chunks(4))
            .flat_map(|(a, b)| a.iter().chain(b).copied())
            .collect();
        assert_eq!(rebuilt, clb);
    }

    #[test]
    fn payload_length_and_duplicates_rejected() {
        let p = small();
        let pos = SlicePos::new(0, 0, 0);
        let err = synthesize_container(&p, &[(pos, vec![0; 143])], 0, ContainerFormat::Synth).unwrap_err();
        assert!(matches!(err, BitstreamError::PayloadLength { expected: 144, found: 143, .. }));
        let dup = [(pos, vec![1; 144]), (pos, vec![2; 144])];
        assert!(matches!(
            synthesize_container(&p, &dup, 0, ContainerFormat::Synth),
            Err(BitstreamError::DuplicatePosition(_))
        ));
    }

    #[test]
    fn xilinx_container_round_trip_and_errors() {
        let p = small();
        let payload: Vec<u8> = (0..144).map(|i| i as u8 + 1).collect();
        let pos = SlicePos::new(7, 1, 1);
        let mut bytes =
            synthesize_container(&p, &[(pos, payload.clone())], 0, ContainerFormat::XilinxBin).unwrap();
        let parsed = parse_container(&bytes, &p, ContainerFormat::XilinxBin).unwrap();
        assert_eq!(extract_slice_at(&parsed.frames, &p, pos).unwrap(), payload);

        // a .bit style text header before the sync word is skipped
        let mut with_header = b"\x00\x09\x0f\xf0design.ncd\x00".to_vec();
        with_header.extend_from_slice(&bytes);
        assert!(parse_container(&with_header, &p, ContainerFormat::XilinxBin).is_ok());

        let no_sync = vec![0u8; 4096];
        assert_eq!(
            parse_container(&no_sync, &p, ContainerFormat::XilinxBin).unwrap_err(),
            BitstreamError::MissingSync
        );
        bytes.truncate(bytes.len() / 2);
        assert!(matches!(
            parse_container(&bytes, &p, ContainerFormat::XilinxBin),
            Err(BitstreamError::Truncated(_))
        ));
    }

    #[test]
    fn short_fdri_and_trailing_words() {
        let small_p = small();
        let big = synthetic_profile(&FamilyParams::zynq7000(), 1, 3, 0, 0).unwrap();
        let bytes = synthesize_container(&small_p, &[], 0, ContainerFormat::Synth).unwrap();
        assert!(matches!(
            parse_container(&bytes, &big, ContainerFormat::Synth),
            Err(BitstreamError::FdriTooShort { .. })
        ));
        let bytes = synthesize_container(&big, &[], 0, ContainerFormat::Synth).unwrap();
        let parsed = parse_container(&bytes, &small_p, ContainerFormat::Synth).unwrap();
        assert_eq!(parsed.frames.len(), 72);
        assert_eq!(parsed.ignored_trailing_words, 36 * 101);
    }

    #[test]
    fn synth_container_layout_is_bit_exact() {
        let p = small();
        let bytes = synthesize_container(&p, &[], 0, ContainerFormat::Synth).unwrap();
        let name = p.name().as_bytes();
        assert_eq!(&bytes[..4], b"BCV1");
        assert_eq!(u16::from_be_bytes([bytes[4], bytes[5]]) as usize, name.len());
        assert_eq!(&bytes[6..6 + name.len()], name);
        let at = 6 + name.len();
        assert_eq!(be_u32(&bytes, at), Some(72));
        assert_eq!(u16::from_be_bytes([bytes[at + 4], bytes[at + 5]]), 101);
        let payload_len = 72 * 404;
        assert_eq!(bytes.len(), at + 6 + payload_len + 4);
        let crc = be_u32(&bytes, at + 6 + payload_len).unwrap();
        assert_eq!(crc, crc32fast::hash(&vec![0u8; payload_len]));

        let mut corrupt = bytes.clone();
        corrupt[at + 10] ^= 1;
        assert!(matches!(
            parse_container(&corrupt, &p, ContainerFormat::Synth),
            Err(BitstreamError::Crc { .. })
        ));
        assert_eq!(
            parse_container(b"NOPE", &p, ContainerFormat::Synth).unwrap_err(),
            BitstreamError::BadMagic
        );
    }

    #[test]
    fn swapped_word_profiles_round_trip() {
        let mut fam = FamilyParams::zynq7000();
        fam.swap_word_bytes = true;
        let p = synthetic_profile(&fam, 1, 2, 1, 0).unwrap();
        let pos = SlicePos::new(3, 0, 0);
        let payload: Vec<u8> = (0..144).map(|i| i as u8).collect();
        let bytes = synthesize_container(&p, &[(pos, payload.clone())], 0, ContainerFormat::Synth).unwrap();
        let parsed = parse_container(&bytes, &p, ContainerFormat::Synth).unwrap();
        assert_eq!(extract_slice_at(&parsed.frames, &p, pos).unwrap(), payload);
    }

    #[test]
    fn fill_covers_only_clb_bytes() {
        let p = synthetic_profile(&FamilyParams::zynq7000(), 1, 2, 1, 0).unwrap();
        let frames = synthesize_frames(&p, &[], 0xAB).unwrap();
        for i in 0..frames.len() {
            assert_eq!(&frames.frame(i)[200..204], &[0; 4]);
        }
        let other = p.rows()[0].iter().position(|c| !c.kind.is_clb()).unwrap();
        let start: usize = p.rows()[0][..other].iter().map(|c| c.frame_count as usize).sum();
        for i in start..start + 28 {
            assert!(frames.frame(i).iter().all(|&b| b == 0));
        }
    }
}
