//! Image-coded representation: slice payloads become three-channel pixel
//! blocks laid out on the device grid.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;
use std::str::FromStr;

use crate::bitstream::{extract_clb_bytes, extract_slice_bytes, BitstreamError, FrameArray};
use crate::device::{BlockSize, DeviceProfile};

pub const TEXT_KEY_ORDER: &str = "bcv:order";
pub const TEXT_KEY_PROFILE: &str = "bcv:profile";

#[derive(Debug, thiserror::Error)]
pub enum ImageError {
    #[error("payload of {len} bytes exceeds {h}x{w}x3 block")]
    PayloadTooLong { len: usize, h: u32, w: u32 },
    #[error(transparent)]
    Bitstream(#[from] BitstreamError),
    #[error("bitstream length must be > 0 bits")]
    ZeroBits,
    #[error("I/O on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("PNG encode: {0}")]
    Encode(#[from] png::EncodingError),
    #[error("PNG decode: {0}")]
    Decode(#[from] png::DecodingError),
    #[error("unsupported PNG layout: {0}")]
    Unsupported(String),
}

/// Index order in which payload bytes fill a slice block.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PixelOrder {
    /// (channel, height, width)
    #[default]
    Chw,
    /// (height, width, channel)
    Hwc,
    /// (channel, width, height)
    Cwh,
}

impl PixelOrder {
    pub const ALL: [PixelOrder; 3] = [PixelOrder::Chw, PixelOrder::Hwc, PixelOrder::Cwh];

    /// Maps payload index `i` to `(channel, y, x)`.
    pub fn position(self, i: usize, block: BlockSize) -> (usize, usize, usize) {
        let (h, w) = (block.h as usize, block.w as usize);
        match self {
            PixelOrder::Chw => (i / (h * w), (i % (h * w)) / w, i % w),
            PixelOrder::Hwc => (i % 3, i / (w * 3), (i / 3) % w),
            PixelOrder::Cwh => (i / (h * w), i % h, (i % (h * w)) / h),
        }
    }

    /// Storage offset (row-major RGB) of every payload index in a block.
    pub fn fill_table(self, block: BlockSize) -> Vec<usize> {
        let w = block.w as usize;
        (0..block.capacity())
            .map(|i| {
                let (c, y, x) = self.position(i, block);
                (y * w + x) * 3 + c
            })
            .collect()
    }
}

impl fmt::Display for PixelOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PixelOrder::Chw => "chw",
            PixelOrder::Hwc => "hwc",
            PixelOrder::Cwh => "cwh",
        })
    }
}

impl FromStr for PixelOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "chw" => Ok(PixelOrder::Chw),
            "hwc" => Ok(PixelOrder::Hwc),
            "cwh" => Ok(PixelOrder::Cwh),
            other => Err(format!("unknown pixel order `{other}` (chw|hwc|cwh)")),
        }
    }
}

/// Three-channel device image, stored row-major RGB.
#[derive(Clone, PartialEq, Eq)]
pub struct EncodedImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
    pub order: PixelOrder,
    pub profile_name: String,
}

impl fmt::Debug for EncodedImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EncodedImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("order", &self.order)
            .field("profile_name", &self.profile_name)
            .finish()
    }
}

impl EncodedImage {
    pub fn blank(width: u32, height: u32, order: PixelOrder, profile_name: impl Into<String>) -> Self {
        Self {
            width,
            height,
            pixels: vec![0; width as usize * height as usize * 3],
            order,
            profile_name: profile_name.into(),
        }
    }

    pub fn byte_len(&self) -> usize {
        self.pixels.len()
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let at = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[at], self.pixels[at + 1], self.pixels[at + 2]]
    }
}

/// Renders one slice payload into a `block.h x block.w x 3` block. Bytes past
/// the payload are zero.
pub fn encode_slice(payload: &[u8], block: BlockSize, order: PixelOrder) -> Result<Vec<u8>, ImageError> {
    if payload.len() > block.capacity() {
        return Err(ImageError::PayloadTooLong {
            len: payload.len(),
            h: block.h,
            w: block.w,
        });
    }
    let table = order.fill_table(block);
    let mut out = vec![0u8; block.capacity()];
    for (byte, &at) in payload.iter().zip(&table) {
        out[at] = *byte;
    }
    Ok(out)
}

/// Image dimensions `(height, width)` implied by a profile.
pub fn image_dims(profile: &DeviceProfile) -> (u32, u32) {
    (profile.image_height(), profile.image_width())
}

/// Renders the whole device. The topmost CLB row lands at the top of the
/// image; grid cells without a CLB stay black.
pub fn encode_image(
    frames: &FrameArray,
    profile: &DeviceProfile,
    order: PixelOrder,
) -> Result<EncodedImage, ImageError> {
    frames.check_bound(profile)?;
    let family = profile.family();
    let (height, width) = image_dims(profile);
    let mut image = EncodedImage::blank(width, height, order, profile.name());
    let row_h = profile.row_height_px() as usize;
    let stride = width as usize * 3;
    let mut tables: HashMap<BlockSize, Vec<usize>> = HashMap::new();

    for (grid_row, grid_col, site) in profile.sites() {
        let block = family.block_for(site.kind).unwrap();
        let table = tables
            .entry(block)
            .or_insert_with(|| order.fill_table(block));
        let clb = extract_clb_bytes(frames, profile, site.config_row, site.column_id, site.clb_row)?;
        let top = (profile.grid_rows() - 1 - grid_row) as usize * row_h;
        let x0 = profile.column_x(grid_col) as usize;
        for slice in 0..family.slices_per_clb {
            let payload = extract_slice_bytes(&clb, profile, site.kind, slice)?;
            if payload.len() > block.capacity() {
                return Err(ImageError::PayloadTooLong {
                    len: payload.len(),
                    h: block.h,
                    w: block.w,
                });
            }
            let left = (x0 + slice as usize * block.w as usize) * 3;
            let bw = block.w as usize * 3;
            for (byte, &at) in payload.iter().zip(table.iter()) {
                let (y, xc) = (at / bw, at % bw);
                image.pixels[(top + y) * stride + left + xc] = *byte;
            }
        }
    }
    Ok(image)
}

/// Image bits as a percentage of the bitstream length. Use
/// [`format_ratio`] for the two-decimal report form.
pub fn compression_ratio(image: &EncodedImage, bitstream_bits: u64) -> Result<f64, ImageError> {
    if bitstream_bits == 0 {
        return Err(ImageError::ZeroBits);
    }
    let image_bits = image.width as f64 * image.height as f64 * 3.0 * 8.0;
    Ok(image_bits / bitstream_bits as f64 * 100.0)
}

pub fn format_ratio(ratio: f64) -> String {
    format!("{ratio:.2}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ImageError + '_ {
    move |source| ImageError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes an 8-bit RGB PNG carrying the order and profile as text chunks.
/// The file is written next to its target and renamed into place.
pub fn write_image(image: &EncodedImage, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let path = path.as_ref();
    let tmp = path.with_extension("png.tmp");
    {
        let file = File::create(&tmp).map_err(io_err(&tmp))?;
        let mut encoder = png::Encoder::new(BufWriter::new(file), image.width, image.height);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        encoder.add_text_chunk(TEXT_KEY_ORDER.to_string(), image.order.to_string())?;
        encoder.add_text_chunk(TEXT_KEY_PROFILE.to_string(), image.profile_name.clone())?;
        let mut writer = encoder.write_header()?;
        writer.write_image_data(&image.pixels)?;
        writer.finish()?;
    }
    std::fs::rename(&tmp, path).map_err(io_err(path))
}

/// Decoded image plus flags for metadata that was absent (and defaulted).
#[derive(Debug)]
pub struct ReadImage {
    pub image: EncodedImage,
    pub missing_order: bool,
    pub missing_profile: bool,
}

pub fn read_image(path: impl AsRef<Path>) -> Result<ReadImage, ImageError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    let decoder = png::Decoder::new(BufReader::new(file));
    let mut reader = decoder.read_info()?;
    let info = reader.info();
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return Err(ImageError::Unsupported(format!(
            "{:?} at {:?} bits",
            info.color_type, info.bit_depth
        )));
    }
    let (width, height) = (info.width, info.height);
    let mut pixels = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
    let frame = reader.next_frame(&mut pixels)?;
    pixels.truncate(frame.buffer_size());

    let mut order = None;
    let mut profile = None;
    let info = reader.info();
    for chunk in &info.uncompressed_latin1_text {
        match chunk.keyword.as_str() {
            TEXT_KEY_ORDER => order = chunk.text.parse().ok(),
            TEXT_KEY_PROFILE => profile = Some(chunk.text.clone()),
            _ => {}
        }
    }
    Ok(ReadImage {
        missing_order: order.is_none(),
        missing_profile: profile.is_none(),
        image: EncodedImage {
            width,
            height,
            pixels,
            order: order.unwrap_or_default(),
            profile_name: profile.unwrap_or_else(|| "unknown".to_string()),
        },
    })
}
