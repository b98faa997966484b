//! Diagnostics time series (CSV) and binary field snapshots.
//!
//! Snapshot layout: magic `BSF1`, then little-endian `u32` width, height and
//! field tag, then `width * height` little-endian `f64` in row-major order.
//! Wall fields have height 1; the y-velocity has height `ny + 1`.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::coupled::State;
use crate::diagnostics::DiagnosticsRecord;
use crate::grid::Wall;

pub const MAGIC: &[u8; 4] = b"BSF1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldTag {
    Phi = 0,
    Mu = 1,
    Pressure = 2,
    VelocityX = 3,
    VelocityY = 4,
    PsiBottom = 5,
    PsiTop = 6,
    ThetaBottom = 7,
    ThetaTop = 8,
}

impl FieldTag {
    pub const ALL: [FieldTag; 9] = [
        FieldTag::Phi,
        FieldTag::Mu,
        FieldTag::Pressure,
        FieldTag::VelocityX,
        FieldTag::VelocityY,
        FieldTag::PsiBottom,
        FieldTag::PsiTop,
        FieldTag::ThetaBottom,
        FieldTag::ThetaTop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FieldTag::Phi => "phi",
            FieldTag::Mu => "mu",
            FieldTag::Pressure => "p",
            FieldTag::VelocityX => "ux",
            FieldTag::VelocityY => "uy",
            FieldTag::PsiBottom => "psi_bottom",
            FieldTag::PsiTop => "psi_top",
            FieldTag::ThetaBottom => "theta_bottom",
            FieldTag::ThetaTop => "theta_top",
        }
    }

    pub fn from_u32(v: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|t| *t as u32 == v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub tag: FieldTag,
    pub width: u32,
    pub height: u32,
    pub data: Vec<f64>,
}

impl Snapshot {
    /// Extracts one field of `state` with its on-disk shape.
    pub fn of(state: &State, tag: FieldTag) -> Self {
        let nx = state.ch.phi.nx;
        let ny = state.ch.phi.ny;
        let (height, data) = match tag {
            FieldTag::Phi => (ny, state.ch.phi.data.clone()),
            FieldTag::Mu => (ny, state.ch.mu.data.clone()),
            FieldTag::Pressure => (ny, state.flow.p.data.clone()),
            FieldTag::VelocityX => (ny, state.flow.u.x.clone()),
            FieldTag::VelocityY => (ny + 1, state.flow.u.y.clone()),
            FieldTag::PsiBottom => (1, state.ch.psi[Wall::Bottom].clone()),
            FieldTag::PsiTop => (1, state.ch.psi[Wall::Top].clone()),
            FieldTag::ThetaBottom => (1, state.ch.theta[Wall::Bottom].clone()),
            FieldTag::ThetaTop => (1, state.ch.theta[Wall::Top].clone()),
        };
        Self {
            tag,
            width: nx as u32,
            height: height as u32,
            data,
        }
    }

    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&self.width.to_le_bytes())?;
        w.write_all(&self.height.to_le_bytes())?;
        w.write_all(&(self.tag as u32).to_le_bytes())?;
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> io::Result<Self> {
        let invalid = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[..4] != MAGIC {
            return Err(invalid("not a BSF1 snapshot".into()));
        }
        let word = |k: usize| u32::from_le_bytes(header[k..k + 4].try_into().expect("4-byte slice"));
        let (width, height, raw_tag) = (word(4), word(8), word(12));
        let tag = FieldTag::from_u32(raw_tag).ok_or_else(|| invalid(format!("unknown field tag {raw_tag}")))?;
        let n = width as usize * height as usize;
        let mut bytes = vec![0u8; n * 8];
        r.read_exact(&mut bytes)?;
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(invalid(format!("{} trailing bytes", rest.len())));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(Self {
            tag,
            width,
            height,
            data,
        })
    }
}

pub fn write_snapshot(path: &Path, snapshot: &Snapshot) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    snapshot.write_to(&mut w)?;
    w.flush()
}

pub fn read_snapshot(path: &Path) -> io::Result<Snapshot> {
    Snapshot::read_from(&mut io::BufReader::new(File::open(path)?))
}

/// Writes every field of `state` as `<field>_<step>.bsf` into `dir`.
pub fn write_snapshot_set(dir: &Path, step: usize, state: &State) -> io::Result<Vec<PathBuf>> {
    FieldTag::ALL
        .iter()
        .map(|&tag| {
            let path = dir.join(format!("{}_{step:08}.bsf", tag.name()));
            write_snapshot(&path, &Snapshot::of(state, tag))?;
            Ok(path)
        })
        .collect()
}

pub fn timeseries_header() -> String {
    let mut cols = vec!["time"];
    cols.extend(DiagnosticsRecord::FIELDS);
    cols.join(",")
}

/// One CSV row with 17 significant digits; an absent contact angle is `nan`.
pub fn timeseries_row(r: &DiagnosticsRecord) -> String {
    let fmt = |v: f64| {
        if v.is_nan() {
            "nan".to_string()
        } else {
            format!("{v:.16e}")
        }
    };
    let mut cells = vec![fmt(r.time)];
    cells.extend(r.values().iter().map(|&v| fmt(v)));
    cells.join(",")
}

/// Streams diagnostics rows to a CSV file.
pub struct TimeseriesWriter {
    out: BufWriter<File>,
}

impl TimeseriesWriter {
    pub fn create(path: &Path) -> io::Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{}", timeseries_header())?;
        Ok(Self { out })
    }

    pub fn push(&mut self, r: &DiagnosticsRecord) -> io::Result<()> {
        writeln!(self.out, "{}", timeseries_row(r))
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()
    }
}
