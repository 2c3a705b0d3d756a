//! File formats: plain-text and binary graymaps with an affine sidecar,
//! raw CSV grids, coefficient streams and sweep tables.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::analysis::{SweepSummaryRow, SweepTable};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Image};
use crate::virtual_bench::{CoefficientRecord, SceneObject};

pub const PGM_MAXVAL: u32 = 65535;

/// Raw graymap contents: integer levels in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graymap {
    pub width: usize,
    pub height: usize,
    pub maxval: u32,
    pub levels: Vec<u32>,
}

/// `value = offset + scale * level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub offset: f64,
    pub scale: f64,
}

impl AffineMap {
    /// Maps `[min, max]` of the image onto `[0, maxval]`.
    pub fn spanning(image: &Image, maxval: u32) -> Self {
        let (lo, hi) = image.min_max();
        let scale = if hi > lo { (hi - lo) / maxval as f64 } else { 0.0 };
        Self { offset: lo, scale }
    }

    pub fn level(&self, value: f64, maxval: u32) -> u32 {
        if self.scale == 0.0 {
            return 0;
        }
        ((value - self.offset) / self.scale).round().clamp(0.0, maxval as f64) as u32
    }

    pub fn value(&self, level: u32) -> f64 {
        self.offset + self.scale * level as f64
    }

    pub fn to_sidecar(&self) -> String {
        format!(
            "# value = offset + scale * level\noffset = {}\nscale = {}\nmaxval = {PGM_MAXVAL}\n",
            self.offset, self.scale
        )
    }

    pub fn parse_sidecar(text: &str) -> Result<Self> {
        let mut offset = None;
        let mut scale = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| sidecar_err(lineno, "expected key = value"))?;
            let parsed: f64 = value
                .trim()
                .parse()
                .map_err(|_| sidecar_err(lineno, "value is not a number"))?;
            match key.trim() {
                "offset" => offset = Some(parsed),
                "scale" => scale = Some(parsed),
                "maxval" => {}
                other => return Err(sidecar_err(lineno, &format!("unknown key `{other}`"))),
            }
        }
        match (offset, scale) {
            (Some(offset), Some(scale)) => Ok(Self { offset, scale }),
            _ => Err(Error::Format {
                format: "affine sidecar",
                message: "offset and scale are required".into(),
            }),
        }
    }
}

fn sidecar_err(lineno: usize, msg: &str) -> Error {
    Error::Format {
        format: "affine sidecar",
        message: format!("line {}: {msg}", lineno + 1),
    }
}

/// Encodes an image as a 16-bit graymap plus the mapping that recovers
/// approximate values from levels.
pub fn image_to_graymap(image: &Image) -> (Graymap, AffineMap) {
    let map = AffineMap::spanning(image, PGM_MAXVAL);
    let levels = image.values().iter().map(|&v| map.level(v, PGM_MAXVAL)).collect();
    (
        Graymap {
            width: image.side(),
            height: image.side(),
            maxval: PGM_MAXVAL,
            levels,
        },
        map,
    )
}

/// Plain-text (`P2`) serialisation, one image row per line.
pub fn encode_pgm_ascii(map: &Graymap) -> String {
    let mut out = format!("P2\n{} {}\n{}\n", map.width, map.height, map.maxval);
    for row in map.levels.chunks(map.width.max(1)) {
        let line: Vec<String> = row.iter().map(u32::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Parses `P2` (plain) or `P5` (binary, 8- or 16-bit big-endian) graymaps.
pub fn decode_pgm(bytes: &[u8]) -> Result<Graymap> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos).ok_or_else(|| pgm_err("missing magic number"))?;
    let binary = match magic.as_slice() {
        b"P2" => false,
        b"P5" => true,
        _ => return Err(pgm_err("unsupported magic number")),
    };
    let width = header_number(bytes, &mut pos, "width")? as usize;
    let height = header_number(bytes, &mut pos, "height")? as usize;
    let maxval = header_number(bytes, &mut pos, "maxval")?;
    if width == 0 || height == 0 {
        return Err(pgm_err("zero image dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(pgm_err("maxval must be within 1..=65535"));
    }
    let count = width * height;
    let levels = if binary {
        // exactly one whitespace byte separates the header from the raster
        pos += 1;
        let depth = if maxval > 255 { 2 } else { 1 };
        let raster = bytes
            .get(pos..pos + count * depth)
            .ok_or_else(|| pgm_err("raster is truncated"))?;
        if depth == 2 {
            raster.chunks_exact(2).map(|b| u32::from(u16::from_be_bytes([b[0], b[1]]))).collect()
        } else {
            raster.iter().map(|&b| u32::from(b)).collect()
        }
    } else {
        let mut levels = Vec::with_capacity(count);
        for _ in 0..count {
            levels.push(header_number(bytes, &mut pos, "sample")?);
        }
        levels
    };
    if levels.iter().any(|&l| l > maxval) {
        return Err(pgm_err("sample exceeds maxval"));
    }
    Ok(Graymap {
        width,
        height,
        maxval,
        levels,
    })
}

fn pgm_err(msg: &str) -> Error {
    Error::Format {
        format: "graymap",
        message: msg.into(),
    }
}

fn next_token(bytes: &[u8], pos: &mut usize) -> Option<Vec<u8>> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| bytes[start..*pos].to_vec())
}

fn header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<u32> {
    let tok = next_token(bytes, pos).ok_or_else(|| pgm_err(&format!("missing {what}")))?;
    std::str::from_utf8(&tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| pgm_err(&format!("invalid {what}")))
}

/// Loads a square graymap as an object with transmission `level / maxval`.
pub fn read_scene_object(path: &Path) -> Result<SceneObject> {
    let map = decode_pgm(&fs::read(path)?)?;
    if map.width != map.height {
        return Err(pgm_err("object images must be square"));
    }
    let grid = GridSpec::new(map.width)?;
    let values = map
        .levels
        .iter()
        .map(|&l| l as f64 / map.maxval as f64)
        .collect();
    Ok(SceneObject::new(Image::from_vec(grid, values)?))
}

/// Raw grid as CSV, one image row per line, shortest round-trip floats.
pub fn encode_grid_csv(image: &Image) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for row in image.values().chunks(image.side()) {
        w.write_record(row.iter().map(f64::to_string))?;
    }
    finish_csv(w)
}

pub fn decode_grid_csv(text: &str) -> Result<Image> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Format {
                format: "grid csv",
                message: format!("row {}: {e}", rows.len() + 1),
            })?;
        rows.push(row);
    }
    Image::from_rows(&rows)
}

/// Coefficient stream with columns
/// `pattern_index,read_1,read_2,...,norm_read,coefficient`. At least two read
/// columns are written; missing reads are left empty.
pub fn encode_coefficients_csv(records: &[CoefficientRecord]) -> Result<String> {
    let reads = records.iter().map(|r| r.raw_reads.len()).max().unwrap_or(0).max(2);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["pattern_index".to_string()];
    header.extend((1..=reads).map(|i| format!("read_{i}")));
    header.push("norm_read".into());
    header.push("coefficient".into());
    w.write_record(&header)?;
    for rec in records {
        let mut row = vec![rec.pattern_index.to_string()];
        row.extend((0..reads).map(|i| rec.raw_reads.get(i).map_or(String::new(), f64::to_string)));
        row.push(rec.normalization_read.to_string());
        row.push(rec.coefficient.to_string());
        w.write_record(&row)?;
    }
    finish_csv(w)
}

pub fn encode_sweep_csv(table: &SweepTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "integration_time_ms", "repeat", "snr"])?;
    for row in &table.rows {
        w.write_record([
            row.method.as_str().to_string(),
            row.integration_time_ms.to_string(),
            row.repeat.to_string(),
            row.snr.to_string(),
        ])?;
    }
    finish_csv(w)
}

pub fn encode_summary_csv(rows: &[SweepSummaryRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "integration_time_ms", "mean_snr", "std_snr", "repeats"])?;
    for row in rows {
        w.write_record([
            row.method.as_str().to_string(),
            row.integration_time_ms.to_string(),
            row.mean_snr.to_string(),
            row.std_snr.to_string(),
            row.repeats.to_string(),
        ])?;
    }
    finish_csv(w)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format {
        format: "csv",
        message: e.to_string(),
    })
}

/// Writes to a sibling temporary file, then renames over `path`, so a
/// failure never leaves a truncated file behind.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = temp_sibling(path);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(Error::from)
}

fn temp_sibling(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(format!(".tmp{}", std::process::id()));
    path.with_file_name(name)
}

/// Writes `<stem>.pgm` and `<stem>.pgm.affine` next to each other.
pub fn write_image_pgm(path: &Path, image: &Image) -> Result<()> {
    let (map, affine) = image_to_graymap(image);
    write_atomic(path, encode_pgm_ascii(&map).as_bytes())?;
    let mut sidecar = path.as_os_str().to_os_string();
    sidecar.push(".affine");
    write_atomic(Path::new(&sidecar), affine.to_sidecar().as_bytes())
}
