//! Canonical motion file and CSV ingestion.
//!
//! ```text
//! "MOTN" | version u16 = 1 | frame_rate f32 | num_frames u32 | num_joints u32
//!        | num_frames·num_joints·3 f32 (frame, joint, xyz) | CRC-64/XZ of all preceding bytes (u64)
//! ```
//! Everything little-endian.

use std::fs;
use std::path::Path;

use super::MotionSequence;
use crate::codec::{self, Reader};
use crate::error::{Error, Result};

pub const MOTION_MAGIC: [u8; 4] = *b"MOTN";
pub const MOTION_VERSION: u16 = 1;
const HEADER_BODY: usize = 12;

pub fn encode_motion(seq: &MotionSequence) -> Vec<u8> {
    let mut buf = Vec::with_capacity(6 + HEADER_BODY + 4 * seq.coords().len() + 8);
    buf.extend_from_slice(&MOTION_MAGIC);
    buf.extend_from_slice(&MOTION_VERSION.to_le_bytes());
    buf.extend_from_slice(&seq.frame_rate().to_le_bytes());
    buf.extend_from_slice(&(seq.num_frames() as u32).to_le_bytes());
    buf.extend_from_slice(&(seq.num_joints() as u32).to_le_bytes());
    for v in seq.coords() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    codec::seal(buf)
}

pub fn decode_motion(bytes: &[u8]) -> Result<MotionSequence> {
    let body = codec::open(bytes, MOTION_MAGIC, MOTION_VERSION, |body| {
        let frames = codec::le_u32_at(body, 1)? as usize;
        let joints = codec::le_u32_at(body, 2)? as usize;
        frames
            .checked_mul(joints)
            .and_then(|n| n.checked_mul(12))
            .and_then(|n| n.checked_add(HEADER_BODY))
            .ok_or_else(|| Error::Header(format!("{frames} frames x {joints} joints overflows")))
    })?;
    let mut r = Reader::new(body);
    let frame_rate = r.f32()?;
    let frames = r.u32()? as usize;
    let joints = r.u32()? as usize;
    let coords = (0..frames * joints * 3)
        .map(|_| r.f32())
        .collect::<Result<Vec<_>>>()?;
    MotionSequence::new(frame_rate, joints, coords)
        .map_err(|e| Error::Header(format!("invalid motion content: {e}")))
}

pub fn write_motion(seq: &MotionSequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_motion(seq)).map_err(|e| Error::io(path, e))
}

pub fn read_motion(path: impl AsRef<Path>) -> Result<MotionSequence> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_motion(&bytes)
}

/// Reads one frame per line, `3·num_joints` comma-separated millimeter
/// values; lines starting with `#` are skipped.
pub fn import_csv(
    path: impl AsRef<Path>,
    frame_rate: f32,
    num_joints: usize,
) -> Result<MotionSequence> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let expected = 3 * num_joints;
    let mut coords = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != expected {
            return Err(Error::Parse {
                line,
                message: format!("expected {expected} fields, found {}", record.len()),
            });
        }
        for field in record.iter() {
            let v: f32 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("not a number: {field:?}"),
            })?;
            coords.push(v);
        }
    }
    if coords.is_empty() {
        return Err(Error::EmptyInput(format!(
            "{} has no frames",
            path.display()
        )));
    }
    MotionSequence::new(frame_rate, num_joints, coords)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}
