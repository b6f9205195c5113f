//! File formats: VOL1 volumes, PGM/PPM frame directories, PGM export and
//! the CSV tables used by the evaluation tools.
//!
//! A VOL1 file is an ASCII header line `VOL1 M N T C dtype\n` followed by a
//! little-endian payload ordered channel, frame, row, column.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{RocCurve, ScoredSamples};
use crate::preprocess::RgbVolume;
use crate::volume::{Dims, Volume};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    fn name(self) -> &'static str {
        match self {
            Dtype::F32 => "f32",
            Dtype::F64 => "f64",
        }
    }

    fn width(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

impl std::str::FromStr for Dtype {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f32" => Ok(Dtype::F32),
            "f64" => Ok(Dtype::F64),
            other => Err(Error::format("VOL1", format!("unknown dtype {other:?}"))),
        }
    }
}

/// Serializes equally sized channels into VOL1 bytes.
pub fn encode_vol1(channels: &[Volume], dtype: Dtype) -> Result<Vec<u8>> {
    let first = channels
        .first()
        .ok_or_else(|| Error::invalid("a VOL1 file needs at least one channel"))?;
    let d = first.dims();
    for c in &channels[1..] {
        d.ensure_same(c.dims())?;
    }
    let header = format!("VOL1 {} {} {} {} {}\n", d.rows, d.cols, d.frames, channels.len(), dtype.name());
    let mut out = Vec::with_capacity(header.len() + channels.len() * d.len() * dtype.width());
    out.extend_from_slice(header.as_bytes());
    for c in channels {
        for &v in c.data() {
            match dtype {
                Dtype::F32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
                Dtype::F64 => out.extend_from_slice(&v.to_le_bytes()),
            }
        }
    }
    Ok(out)
}

/// Parses VOL1 bytes into one volume per channel.
pub fn decode_vol1(bytes: &[u8]) -> Result<Vec<Volume>> {
    let bad = |reason: String| Error::format("VOL1", reason);
    let nl = bytes
        .iter()
        .take(256)
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad("missing header line".into()))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| bad("header is not ASCII".into()))?;
    let fields: Vec<&str> = header.split_ascii_whitespace().collect();
    if fields.len() != 6 || fields[0] != "VOL1" {
        return Err(bad(format!("expected `VOL1 M N T C dtype`, got {header:?}")));
    }
    let mut n = [0usize; 4];
    for (slot, f) in n.iter_mut().zip(&fields[1..5]) {
        *slot = f.parse().map_err(|_| bad(format!("bad dimension {f:?}")))?;
    }
    let [rows, cols, frames, count] = n;
    let dtype: Dtype = fields[5].parse()?;
    let dims = Dims::new(rows, cols, frames);
    dims.ensure_nonempty()?;
    if count == 0 {
        return Err(bad("channel count must be >= 1".into()));
    }
    let payload = &bytes[nl + 1..];
    let expected = dims
        .len()
        .checked_mul(count * dtype.width())
        .ok_or_else(|| bad("dimensions overflow".into()))?;
    if payload.len() != expected {
        return Err(bad(format!("payload is {} bytes, header implies {expected}", payload.len())));
    }
    let values: Vec<f64> = match dtype {
        Dtype::F32 => payload
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
            .collect(),
        Dtype::F64 => payload
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect(),
    };
    values.chunks_exact(dims.len()).map(|c| Volume::new(dims, c.to_vec())).collect()
}

pub fn read_vol1(path: &Path) -> Result<Vec<Volume>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_vol1(&bytes)
}

pub fn write_vol1(path: &Path, channels: &[Volume], dtype: Dtype) -> Result<()> {
    let bytes = encode_vol1(channels, dtype)?;
    write_atomic(path, |w| w.write_all(&bytes).map_err(|e| Error::io(path, e)))
}

/// Writes through a temporary file in the destination directory, then
/// renames it into place, so readers never see a partial file.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> Result<()>,
{
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);

    let result = (|| {
        let file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        let mut w = BufWriter::new(file);
        fill(&mut w)?;
        let file = w.into_inner().map_err(|e| Error::io(&tmp, e.into_error()))?;
        file.sync_all().map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// A decoded frame directory.
#[derive(Debug, Clone, PartialEq)]
pub enum Frames {
    Gray(Volume),
    Rgb(RgbVolume),
}

impl Frames {
    pub fn dims(&self) -> Dims {
        match self {
            Frames::Gray(v) => v.dims(),
            Frames::Rgb(v) => v.dims(),
        }
    }
}

struct Netpbm {
    rgb: bool,
    rows: usize,
    cols: usize,
    pixels: Vec<u8>,
}

fn parse_netpbm(bytes: &[u8], path: &Path) -> Result<Netpbm> {
    let bad = |reason: &str| Error::format("PNM", format!("{}: {reason}", path.display()));
    let mut pos = 0;
    let mut token = || -> Result<&[u8]> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        Ok(&bytes[start..pos])
    };
    let rgb = match token()? {
        b"P5" => false,
        b"P6" => true,
        _ => return Err(bad("only binary PGM (P5) and PPM (P6) are supported")),
    };
    let mut num = || -> Result<usize> {
        std::str::from_utf8(token()?)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad header number"))
    };
    let (cols, rows, maxval) = (num()?, num()?, num()?);
    if rows == 0 || cols == 0 {
        return Err(bad("zero-sized image"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(bad("only 8-bit images (maxval 1..=255) are supported"));
    }
    // exactly one whitespace byte separates the header from the raster
    let start = pos + 1;
    let n = rows * cols * if rgb { 3 } else { 1 };
    if bytes.len() < start + n {
        return Err(bad("truncated raster"));
    }
    Ok(Netpbm { rgb, rows, cols, pixels: bytes[start..start + n].to_vec() })
}

/// Frame files in `dir` with a `.pgm` or `.ppm` extension, sorted by name.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if matches!(ext.as_deref(), Some("pgm" | "ppm")) {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

/// Reads a directory of equally sized PGM or PPM frames, ordered by file
/// name (frames are expected to carry zero-padded indices).
pub fn read_frame_dir(dir: &Path) -> Result<Frames> {
    let paths = list_frames(dir)?;
    if paths.is_empty() {
        return Err(Error::invalid(format!("{} contains no .pgm/.ppm frames", dir.display())));
    }
    let mut frames = Vec::with_capacity(paths.len());
    for p in &paths {
        let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
        frames.push(parse_netpbm(&bytes, p)?);
    }
    let (rows, cols, rgb) = (frames[0].rows, frames[0].cols, frames[0].rgb);
    let dims = Dims::new(rows, cols, frames.len());
    for (f, p) in frames.iter().zip(&paths) {
        if f.rgb != rgb {
            return Err(Error::invalid(format!("{} mixes PGM and PPM frames", dir.display())));
        }
        if (f.rows, f.cols) != (rows, cols) {
            return Err(Error::invalid(format!(
                "{} is {}x{}, expected {rows}x{cols} like the first frame",
                p.display(),
                f.cols,
                f.rows
            )));
        }
    }
    if rgb {
        let data = frames
            .iter()
            .flat_map(|f| f.pixels.chunks_exact(3).map(|c| [c[0], c[1], c[2]]))
            .collect();
        Ok(Frames::Rgb(RgbVolume::new(dims, data)?))
    } else {
        let data = frames.iter().flat_map(|f| f.pixels.iter().map(|&v| v as f64)).collect();
        Ok(Frames::Gray(Volume::new(dims, data)?))
    }
}

/// Constants used to map a volume onto 0..=255 for PGM export.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub min: f64,
    pub max: f64,
}

impl Normalization {
    pub fn of(v: &Volume) -> Self {
        Normalization { min: v.min(), max: v.max() }
    }

    /// Constant volumes map to 0.
    pub fn to_byte(&self, v: f64) -> u8 {
        let span = self.max - self.min;
        if span <= 0.0 {
            return 0;
        }
        (255.0 * (v - self.min) / span).round().clamp(0.0, 255.0) as u8
    }
}

/// Writes each frame as `frame_NNNNN.pgm`, min-max normalized over the whole
/// volume, plus `normalization.txt` holding the constants.
pub fn write_pgm_frames(dir: &Path, v: &Volume) -> Result<Normalization> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let norm = Normalization::of(v);
    let d = v.dims();
    for t in 0..d.frames {
        let path = dir.join(format!("frame_{t:05}.pgm"));
        write_atomic(&path, |w| {
            let mut bytes = format!("P5\n{} {}\n255\n", d.cols, d.rows).into_bytes();
            bytes.extend(v.frame(t).iter().map(|&x| norm.to_byte(x)));
            w.write_all(&bytes).map_err(|e| Error::io(&path, e))
        })?;
    }
    let side = dir.join("normalization.txt");
    write_atomic(&side, |w| {
        write!(w, "min {:e}\nmax {:e}\n", norm.min, norm.max).map_err(|e| Error::io(&side, e))
    })?;
    Ok(norm)
}

fn parse_label(field: &str, line: u64) -> Result<bool> {
    match field.trim() {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        other => Err(Error::format("CSV", format!("line {line}: label must be 0/1, got {other:?}"))),
    }
}

fn parse_number<T: std::str::FromStr>(field: &str, line: u64, what: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::format("CSV", format!("line {line}: bad {what} {field:?}")))
}

fn csv_rows<R: Read>(input: R, header: [&str; 2]) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let h = r.headers()?.clone();
    if h.len() != 2 || h[0] != *header[0] || h[1] != *header[1] {
        return Err(Error::format("CSV", format!("expected header `{},{}`", header[0], header[1])));
    }
    r.records()
        .map(|rec| {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            Ok((line, rec))
        })
        .collect()
}

/// Reads `score,label` rows.
pub fn read_scored_csv<R: Read>(input: R) -> Result<ScoredSamples> {
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for (line, rec) in csv_rows(input, ["score", "label"])? {
        scores.push(parse_number(&rec[0], line, "score")?);
        labels.push(parse_label(&rec[1], line)?);
    }
    ScoredSamples::new(scores, labels)
}

/// Reads `frame,label` rows into a per-frame label vector of length
/// `frames`. Every frame must be labeled exactly once.
pub fn read_frame_labels<R: Read>(input: R, frames: usize) -> Result<Vec<bool>> {
    let mut labels: Vec<Option<bool>> = vec![None; frames];
    for (line, rec) in csv_rows(input, ["frame", "label"])? {
        let t: usize = parse_number(&rec[0], line, "frame")?;
        let slot = labels
            .get_mut(t)
            .ok_or_else(|| Error::invalid(format!("line {line}: frame {t} out of range 0..{frames}")))?;
        if slot.replace(parse_label(&rec[1], line)?).is_some() {
            return Err(Error::invalid(format!("line {line}: frame {t} labeled twice")));
        }
    }
    labels
        .iter()
        .enumerate()
        .map(|(t, l)| l.ok_or_else(|| Error::invalid(format!("frame {t} has no label"))))
        .collect()
}

/// Writes `threshold,tpr,fpr` rows.
pub fn write_roc_csv<W: Write>(curve: &RocCurve, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in curve.points() {
        w.serialize(p)?;
    }
    w.flush().map_err(|e| Error::io("<roc csv>", e))?;
    Ok(())
}
