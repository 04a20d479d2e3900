//! Ground-truth boxes: placement rectangles on the CLB grid converted to
//! pixel boxes, and their JSON / YOLO text serializations.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::device::DeviceProfile;

#[derive(Debug, thiserror::Error)]
pub enum AnnotationError {
    #[error("I/O on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("placement rect {0} outside the {1}x{2} grid")]
    OutOfGrid(String, u32, u32),
    #[error("placement rect has min > max: {0}")]
    Inverted(String),
    #[error("unknown class label `{0}`")]
    UnknownClass(String),
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
}

pub(crate) fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> AnnotationError + '_ {
    move |source| AnnotationError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Pixel box, half-open `[min, max)`, y grows downward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn is_valid(&self) -> bool {
        self.x_min < self.x_max && self.y_min < self.y_max
    }

    pub fn within(&self, width: f64, height: f64) -> bool {
        self.x_min >= 0.0 && self.y_min >= 0.0 && self.x_max <= width && self.y_max <= height
    }
}

/// Inclusive CLB-grid rectangle, row 0 at the bottom of the device.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementRecord {
    #[serde(rename = "class")]
    pub class_label: String,
    pub col_min: u32,
    pub col_max: u32,
    pub row_min: u32,
    pub row_max: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<String>,
}

impl PlacementRecord {
    fn describe(&self) -> String {
        format!(
            "cols {}..={} rows {}..={}",
            self.col_min, self.col_max, self.row_min, self.row_max
        )
    }

    pub fn overlaps(&self, other: &PlacementRecord) -> bool {
        self.col_min <= other.col_max
            && other.col_min <= self.col_max
            && self.row_min <= other.row_max
            && other.row_min <= self.row_max
    }
}

/// Placement file: the function blocks implemented in one bitstream.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementFile {
    pub placements: Vec<PlacementRecord>,
}

impl PlacementFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, AnnotationError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), AnnotationError> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        write_atomic(path.as_ref(), text.as_bytes())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBoxAnnotation {
    #[serde(rename = "class")]
    pub class_label: String,
    #[serde(flatten)]
    pub bbox: BBox,
}

pub fn placement_to_bbox(
    record: &PlacementRecord,
    profile: &DeviceProfile,
) -> Result<BBoxAnnotation, AnnotationError> {
    if record.col_min > record.col_max || record.row_min > record.row_max {
        return Err(AnnotationError::Inverted(record.describe()));
    }
    let (rows, cols) = (profile.grid_rows(), profile.grid_cols());
    if record.col_max >= cols || record.row_max >= rows {
        return Err(AnnotationError::OutOfGrid(record.describe(), rows, cols));
    }
    let block_h = profile.row_height_px();
    let x_min = profile.column_x(record.col_min);
    let x_max = profile.column_x(record.col_max) + profile.column_width_px(record.col_max);
    let y_min = (rows - 1 - record.row_max) * block_h;
    let y_max = (rows - record.row_min) * block_h;
    Ok(BBoxAnnotation {
        class_label: record.class_label.clone(),
        bbox: BBox::new(x_min as f64, y_min as f64, x_max as f64, y_max as f64),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AnnotationFormat {
    #[default]
    Json,
    YoloTxt,
}

impl FromStr for AnnotationFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Self::Json),
            "yolo" | "yolo_txt" | "txt" => Ok(Self::YoloTxt),
            other => Err(format!("unknown annotation format `{other}`")),
        }
    }
}

impl fmt::Display for AnnotationFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Json => "json",
            Self::YoloTxt => "yolo",
        })
    }
}

/// The JSON annotation document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotationDoc {
    pub image: String,
    pub width: u32,
    pub height: u32,
    pub classes: Vec<String>,
    pub boxes: Vec<BBoxAnnotation>,
}

/// Image identity written alongside annotations.
#[derive(Clone, Debug)]
pub struct ImageRef<'a> {
    pub name: &'a str,
    pub width: u32,
    pub height: u32,
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), AnnotationError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = std::fs::File::create(&tmp).map_err(io_error(&tmp))?;
        f.write_all(bytes).map_err(io_error(&tmp))?;
    }
    std::fs::rename(&tmp, path).map_err(io_error(path))
}

fn class_index(classes: &[String], label: &str) -> Result<usize, AnnotationError> {
    classes
        .iter()
        .position(|c| c == label)
        .ok_or_else(|| AnnotationError::UnknownClass(label.to_string()))
}

/// One YOLO line: `class cx cy w h`, normalized, six decimals.
pub fn yolo_line(index: usize, bbox: &BBox, width: u32, height: u32) -> String {
    let (w, h) = (width as f64, height as f64);
    let cx = (bbox.x_min + bbox.x_max) / 2.0 / w;
    let cy = (bbox.y_min + bbox.y_max) / 2.0 / h;
    format!(
        "{index} {cx:.6} {cy:.6} {:.6} {:.6}",
        bbox.width() / w,
        bbox.height() / h
    )
}

pub fn render_annotations(
    boxes: &[BBoxAnnotation],
    image: &ImageRef<'_>,
    classes: &[String],
    format: AnnotationFormat,
) -> Result<String, AnnotationError> {
    let indices = boxes
        .iter()
        .map(|b| class_index(classes, &b.class_label))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(match format {
        AnnotationFormat::Json => {
            let doc = AnnotationDoc {
                image: image.name.to_string(),
                width: image.width,
                height: image.height,
                classes: classes.to_vec(),
                boxes: boxes.to_vec(),
            };
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        AnnotationFormat::YoloTxt => boxes
            .iter()
            .zip(indices)
            .map(|(b, i)| yolo_line(i, &b.bbox, image.width, image.height) + "\n")
            .collect(),
    })
}

pub fn write_annotations(
    boxes: &[BBoxAnnotation],
    image: &ImageRef<'_>,
    classes: &[String],
    format: AnnotationFormat,
    path: impl AsRef<Path>,
) -> Result<(), AnnotationError> {
    let text = render_annotations(boxes, image, classes, format)?;
    write_atomic(path.as_ref(), text.as_bytes())
}

pub fn parse_yolo(
    text: &str,
    width: u32,
    height: u32,
    classes: &[String],
) -> Result<Vec<BBoxAnnotation>, AnnotationError> {
    let (w, h) = (width as f64, height as f64);
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(AnnotationError::Line {
                line: line_no,
                msg: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let index: usize = fields[0].parse().map_err(|_| AnnotationError::Line {
            line: line_no,
            msg: format!("bad class index `{}`", fields[0]),
        })?;
        let label = classes.get(index).ok_or_else(|| AnnotationError::Line {
            line: line_no,
            msg: format!("class index {index} out of range ({} classes)", classes.len()),
        })?;
        let mut vals = [0f64; 4];
        for (v, f) in vals.iter_mut().zip(&fields[1..]) {
            *v = f.parse().map_err(|_| AnnotationError::Line {
                line: line_no,
                msg: format!("bad number `{f}`"),
            })?;
        }
        let [cx, cy, bw, bh] = vals;
        out.push(BBoxAnnotation {
            class_label: label.clone(),
            bbox: BBox::new(
                (cx - bw / 2.0) * w,
                (cy - bh / 2.0) * h,
                (cx + bw / 2.0) * w,
                (cy + bh / 2.0) * h,
            ),
        });
    }
    Ok(out)
}

pub fn read_annotation_doc(path: impl AsRef<Path>) -> Result<AnnotationDoc, AnnotationError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    Ok(serde_json::from_str(&text)?)
}

/// Reads boxes back. `width`/`height` denormalize YOLO files; JSON files
/// carry their own dimensions.
pub fn read_annotations(
    path: impl AsRef<Path>,
    format: AnnotationFormat,
    width: u32,
    height: u32,
    classes: &[String],
) -> Result<Vec<BBoxAnnotation>, AnnotationError> {
    let path = path.as_ref();
    match format {
        AnnotationFormat::Json => {
            let doc = read_annotation_doc(path)?;
            for b in &doc.boxes {
                class_index(classes, &b.class_label)?;
            }
            Ok(doc.boxes)
        }
        AnnotationFormat::YoloTxt => {
            let text = std::fs::read_to_string(path).map_err(io_error(path))?;
            parse_yolo(&text, width, height, classes)
        }
    }
}

/// `classes.txt`: one label per line.
pub fn write_class_list(classes: &[String], path: impl AsRef<Path>) -> Result<(), AnnotationError> {
    let text: String = classes.iter().map(|c| format!("{c}\n")).collect();
    write_atomic(path.as_ref(), text.as_bytes())
}

pub fn read_class_list(path: impl AsRef<Path>) -> Result<Vec<String>, AnnotationError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}
