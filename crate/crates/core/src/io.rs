//! File formats: FHST binary grids, fixed-precision JSON and CSV tables.
//!
//! FHST layout (little endian): magic `FHST`, `u32` version, `u32` N, N × `u64`
//! grid sizes, `f64` T, `f64` m, `f64` s, then row-major `f64` samples. The
//! cylinder variant inserts a y-axis block (`u64` count, `count` × `f64` nodes)
//! before the samples, which are then stored one full x-grid per node.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::torus::{grid_point, GridField, TorusConfig};

pub const FHST_MAGIC: &[u8; 4] = b"FHST";
pub const FHST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct FhstFile {
    pub sizes: Vec<usize>,
    pub period: f64,
    pub mass: f64,
    pub order: f64,
    /// Heights of the cylinder variant, `None` for a plain grid.
    pub y_nodes: Option<Vec<f64>>,
    pub values: Vec<f64>,
}

impl FhstFile {
    pub fn from_grid(grid: &GridField, cfg: &TorusConfig) -> Self {
        FhstFile {
            sizes: grid.sizes.clone(),
            period: cfg.period(),
            mass: cfg.mass(),
            order: cfg.order(),
            y_nodes: None,
            values: grid.values.clone(),
        }
    }

    /// Cylinder samples, one grid per height.
    pub fn from_slices(slices: &[GridField], y_nodes: &[f64], cfg: &TorusConfig) -> Result<Self> {
        if slices.len() != y_nodes.len() || slices.is_empty() {
            return Err(Error::Shape {
                expected: vec![y_nodes.len()],
                got: vec![slices.len()],
            });
        }
        let sizes = slices[0].sizes.clone();
        if slices.iter().any(|s| s.sizes != sizes) {
            return Err(Error::Parameter("slices on different grids".into()));
        }
        Ok(FhstFile {
            sizes,
            period: cfg.period(),
            mass: cfg.mass(),
            order: cfg.order(),
            y_nodes: Some(y_nodes.to_vec()),
            values: slices
                .iter()
                .flat_map(|s| s.values.iter().copied())
                .collect(),
        })
    }

    /// The plain grid, if this is not a cylinder file.
    pub fn grid(&self) -> Result<GridField> {
        if self.y_nodes.is_some() {
            return Err(Error::Format(
                "cylinder file where a plain grid was expected".into(),
            ));
        }
        GridField::new(self.sizes.clone(), self.values.clone())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(FHST_MAGIC)?;
        w.write_all(&FHST_VERSION.to_le_bytes())?;
        w.write_all(&(self.sizes.len() as u32).to_le_bytes())?;
        for &n in &self.sizes {
            w.write_all(&(n as u64).to_le_bytes())?;
        }
        for v in [self.period, self.mass, self.order] {
            w.write_all(&v.to_le_bytes())?;
        }
        if let Some(ys) = &self.y_nodes {
            w.write_all(&(ys.len() as u64).to_le_bytes())?;
            for y in ys {
                w.write_all(&y.to_le_bytes())?;
            }
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let mut cur = Cursor {
            bytes: &bytes,
            pos: 0,
        };
        if cur.take(4)? != FHST_MAGIC {
            return Err(Error::Format("missing FHST magic".into()));
        }
        let version = cur.u32()?;
        if version != FHST_VERSION {
            return Err(Error::Format(format!("unsupported FHST version {version}")));
        }
        let dim = cur.u32()? as usize;
        if dim == 0 || dim > 8 {
            return Err(Error::Format(format!("implausible dimension {dim}")));
        }
        let sizes = (0..dim)
            .map(|_| cur.u64().map(|n| n as usize))
            .collect::<Result<Vec<_>>>()?;
        let (period, mass, order) = (cur.f64()?, cur.f64()?, cur.f64()?);
        let points = sizes
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::Format("grid too large".into()))?;
        let remaining = bytes.len() - cur.pos;
        let y_nodes = if remaining == 8 * points {
            None
        } else {
            let count = cur.u64()? as usize;
            Some((0..count).map(|_| cur.f64()).collect::<Result<Vec<_>>>()?)
        };
        let total = points * y_nodes.as_ref().map_or(1, Vec::len);
        if bytes.len() - cur.pos != 8 * total {
            return Err(Error::Format(format!(
                "expected {total} samples, found {} bytes",
                bytes.len() - cur.pos
            )));
        }
        let values = (0..total).map(|_| cur.f64()).collect::<Result<Vec<_>>>()?;
        Ok(FhstFile {
            sizes,
            period,
            mass,
            order,
            y_nodes,
            values,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        FhstFile::read_from(BufReader::new(File::open(path)?))
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::Format("truncated FHST file".into()));
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Pretty JSON with every float written to 17 significant digits.
struct FixedDigits<'a>(PrettyFormatter<'a>);

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, FixedDigits(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Format(e.to_string()))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("JSON is UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}

/// Writes rows of numbers under a header.
pub fn write_csv(
    path: &Path,
    header: &[String],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Format(e.to_string()))?;
    w.write_record(header)
        .map_err(|e| Error::Format(e.to_string()))?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:.16e}")))
            .map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Grid samples as CSV rows `x_1, …, x_N, value`.
pub fn write_grid_csv(path: &Path, grid: &GridField, period: f64) -> Result<()> {
    let dim = grid.sizes.len();
    let mut header: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    header.push("u".into());
    let rows = grid.values.iter().enumerate().map(|(j, &v)| {
        let mut x = vec![0.0; dim];
        grid_point(j, &grid.sizes, period, &mut x);
        x.push(v);
        x
    });
    write_csv(path, &header, rows)
}
