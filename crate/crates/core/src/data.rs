//! MNIST ingestion, spike-count encoding, and one-vs-rest task derivation.
//!
//! Images arrive in the IDX format (big-endian magic + dimensions, then raw
//! bytes), optionally gzip-compressed. Pixels become per-input spike counts,
//! and counts become a deterministic per-tick spike schedule for the
//! simulator; the digital engine consumes the counts directly.

use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use flate2::read::GzDecoder;

use crate::digital::InputVector;
use crate::error::{Error, Result};

pub const IMAGE_SIDE: usize = 28;
pub const NUM_PIXELS: usize = IMAGE_SIDE * IMAGE_SIDE;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// One labelled 28x28 grayscale image.
#[derive(Debug, Clone)]
pub struct RawImage {
    pub pixels: Vec<u8>,
    pub label: u8,
}

/// Spike counts plus the per-tick schedule realizing them.
#[derive(Debug, Clone)]
pub struct EncodedExample {
    pub counts: InputVector,
    /// `schedule[t]` lists the input indices that spike on tick `t + 1` of
    /// the presentation window.
    pub schedule: Vec<Vec<u32>>,
}

/// One one-vs-rest binary problem. All ten tasks share the same encoded
/// examples; only the target digit differs.
#[derive(Debug, Clone)]
pub struct BinaryTask {
    pub target_digit: u8,
    train: Arc<TaskSplit>,
    test: Arc<TaskSplit>,
}

#[derive(Debug)]
pub struct TaskSplit {
    pub examples: Vec<EncodedExample>,
    pub labels: Vec<u8>,
}

impl BinaryTask {
    pub fn train_len(&self) -> usize {
        self.train.examples.len()
    }

    pub fn test_len(&self) -> usize {
        self.test.examples.len()
    }

    pub fn train_iter(&self) -> impl Iterator<Item = (&EncodedExample, bool)> + '_ {
        split_iter(&self.train, self.target_digit)
    }

    pub fn test_iter(&self) -> impl Iterator<Item = (&EncodedExample, bool)> + '_ {
        split_iter(&self.test, self.target_digit)
    }
}

fn split_iter(split: &TaskSplit, target: u8) -> impl Iterator<Item = (&EncodedExample, bool)> + '_ {
    split
        .examples
        .iter()
        .zip(&split.labels)
        .map(move |(ex, label)| (ex, *label == target))
}

struct IdxReader {
    path: String,
    bytes: Vec<u8>,
    offset: usize,
}

impl IdxReader {
    fn open(path: &Path) -> Result<Self> {
        let mut file = File::open(path)
            .map_err(|e| ingestion(path, 0, format!("cannot open: {e}")))?;
        let mut raw = Vec::new();
        file.read_to_end(&mut raw)?;
        // Transparently decompress gzip containers.
        let bytes = if raw.starts_with(&[0x1f, 0x8b]) {
            let mut out = Vec::new();
            GzDecoder::new(raw.as_slice())
                .read_to_end(&mut out)
                .map_err(|e| ingestion(path, 0, format!("gzip decode failed: {e}")))?;
            out
        } else {
            raw
        };
        Ok(Self {
            path: path.display().to_string(),
            bytes,
            offset: 0,
        })
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Ingestion {
            path: self.path.clone(),
            offset: self.offset as u64,
            message: message.into(),
        }
    }

    fn read_u32(&mut self) -> Result<u32> {
        let end = self.offset + 4;
        let slice = self
            .bytes
            .get(self.offset..end)
            .ok_or_else(|| self.err("truncated header"))?;
        let value = u32::from_be_bytes(slice.try_into().unwrap());
        self.offset = end;
        Ok(value)
    }

    fn read_bytes(&mut self, len: usize) -> Result<&[u8]> {
        let end = self.offset + len;
        if end > self.bytes.len() {
            return Err(self.err(format!(
                "truncated body: need {len} bytes, {} available",
                self.bytes.len() - self.offset
            )));
        }
        let slice = &self.bytes[self.offset..end];
        self.offset = end;
        Ok(slice)
    }
}

fn ingestion(path: &Path, offset: u64, message: String) -> Error {
    Error::Ingestion {
        path: path.display().to_string(),
        offset,
        message,
    }
}

/// Parses an IDX image/label file pair into labelled images.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Vec<RawImage>> {
    let mut images = IdxReader::open(images_path)?;
    let magic = images.read_u32()?;
    if magic != IMAGES_MAGIC {
        return Err(ingestion(
            images_path,
            0,
            format!("bad image magic {magic:#010x}, expected {IMAGES_MAGIC:#010x}"),
        ));
    }
    let count = images.read_u32()? as usize;
    let rows = images.read_u32()? as usize;
    let cols = images.read_u32()? as usize;
    if rows != IMAGE_SIDE || cols != IMAGE_SIDE {
        return Err(ingestion(
            images_path,
            4,
            format!("unsupported image size {rows}x{cols}, expected 28x28"),
        ));
    }

    let mut labels = IdxReader::open(labels_path)?;
    let magic = labels.read_u32()?;
    if magic != LABELS_MAGIC {
        return Err(ingestion(
            labels_path,
            0,
            format!("bad label magic {magic:#010x}, expected {LABELS_MAGIC:#010x}"),
        ));
    }
    let label_count = labels.read_u32()? as usize;
    if label_count != count {
        return Err(ingestion(
            labels_path,
            4,
            format!("{label_count} labels for {count} images"),
        ));
    }

    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let pixels = images.read_bytes(NUM_PIXELS)?.to_vec();
        let label = labels.read_bytes(1)?[0];
        if label > 9 {
            return Err(ingestion(
                labels_path,
                (labels.offset - 1) as u64,
                format!("label {label} out of range 0-9"),
            ));
        }
        out.push(RawImage { pixels, label });
    }
    Ok(out)
}

/// Linear rate encoding: `n_i = round(pixel_i / 255 * s_max)`.
pub fn encode_counts(img: &RawImage, s_max: u16) -> Result<InputVector> {
    if s_max == 0 {
        return Err(Error::config("s_max must be at least 1".to_string()));
    }
    let counts: Vec<u16> = img
        .pixels
        .iter()
        .map(|p| (f64::from(*p) / 255.0 * f64::from(s_max)).round() as u16)
        .collect();
    InputVector::new(counts).map_err(|e| {
        Error::input(format!("degenerate encoding for label {}: {e}", img.label))
    })
}

/// Spreads `count` spikes evenly over the presentation window: spikes land on
/// ticks `round(j * ticks / count)` for `j = 1..=count`, clipped to
/// `[1, ticks]`.
pub fn schedule_spikes(counts: &InputVector, presentation_ticks: u32) -> Result<Vec<Vec<u32>>> {
    let mut schedule = vec![Vec::new(); presentation_ticks as usize];
    for (i, n) in counts.counts().iter().enumerate() {
        let n = u32::from(*n);
        if n > presentation_ticks {
            return Err(Error::input(format!(
                "count {n} at input {i} exceeds the {presentation_ticks}-tick window"
            )));
        }
        for j in 1..=n {
            let tick = (f64::from(j) * f64::from(presentation_ticks) / f64::from(n)).round()
                as u32;
            let tick = tick.clamp(1, presentation_ticks);
            schedule[(tick - 1) as usize].push(i as u32);
        }
    }
    Ok(schedule)
}

/// Encodes a full train/test split once and derives the ten one-vs-rest
/// tasks over it.
pub fn make_binary_tasks(
    train: &[RawImage],
    test: &[RawImage],
    s_max: u16,
    presentation_ticks: u32,
) -> Result<Vec<BinaryTask>> {
    let train_split = Arc::new(encode_split(train, s_max, presentation_ticks)?);
    let test_split = Arc::new(encode_split(test, s_max, presentation_ticks)?);
    Ok((0..10)
        .map(|digit| BinaryTask {
            target_digit: digit,
            train: Arc::clone(&train_split),
            test: Arc::clone(&test_split),
        })
        .collect())
}

fn encode_split(images: &[RawImage], s_max: u16, presentation_ticks: u32) -> Result<TaskSplit> {
    let mut examples = Vec::with_capacity(images.len());
    let mut labels = Vec::with_capacity(images.len());
    for img in images {
        let counts = encode_counts(img, s_max)?;
        let schedule = schedule_spikes(&counts, presentation_ticks)?;
        examples.push(EncodedExample { counts, schedule });
        labels.push(img.label);
    }
    Ok(TaskSplit { examples, labels })
}
