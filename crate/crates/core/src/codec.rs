//! Little-endian binary helpers shared by the motion and checkpoint formats.

use crc::{Crc, CRC_64_XZ};

use crate::error::{Error, Result};

/// CRC-64/XZ (ECMA-182 polynomial, reflected, init and xorout all ones).
const CHECKSUM: Crc<u64> = Crc::<u64>::new(&CRC_64_XZ);

pub(crate) fn checksum(bytes: &[u8]) -> u64 {
    CHECKSUM.checksum(bytes)
}

/// Appends the checksum of everything written so far.
pub(crate) fn seal(mut buf: Vec<u8>) -> Vec<u8> {
    let sum = checksum(&buf);
    buf.extend_from_slice(&sum.to_le_bytes());
    buf
}

/// Validates magic and version, then the total length against `body_len`
/// (bytes between the version field and the checksum), then the checksum.
/// Returns the body.
pub(crate) fn open(
    bytes: &[u8],
    magic: [u8; 4],
    version: u16,
    body_len: impl FnOnce(&[u8]) -> Result<usize>,
) -> Result<&[u8]> {
    const PREFIX: usize = 6;
    if bytes.len() < 4 {
        return Err(Error::Truncated {
            expected: PREFIX,
            found: bytes.len(),
        });
    }
    let found: [u8; 4] = bytes[..4].try_into().expect("length checked");
    if found != magic {
        return Err(Error::BadMagic {
            found,
            expected: magic,
        });
    }
    if bytes.len() < PREFIX {
        return Err(Error::Truncated {
            expected: PREFIX,
            found: bytes.len(),
        });
    }
    let v = u16::from_le_bytes([bytes[4], bytes[5]]);
    if v != version {
        return Err(Error::UnsupportedVersion {
            found: v,
            supported: version,
        });
    }
    let body_len = body_len(&bytes[PREFIX..])?;
    let expected = PREFIX + body_len + 8;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::Header(format!(
            "{} trailing bytes after checksum",
            bytes.len() - expected
        )));
    }
    let (covered, tail) = bytes.split_at(expected - 8);
    let stored = u64::from_le_bytes(tail.try_into().expect("8 bytes"));
    let computed = checksum(covered);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }
    Ok(&covered[PREFIX..])
}

/// Sequential little-endian reader over a length-validated body.
pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        if end > self.bytes.len() {
            return Err(Error::Truncated {
                expected: end,
                found: self.bytes.len(),
            });
        }
        let out = self.bytes[self.pos..end].try_into().expect("sized");
        self.pos = end;
        Ok(out)
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        self.take::<4>().map(u32::from_le_bytes)
    }

    pub(crate) fn f32(&mut self) -> Result<f32> {
        self.take::<4>().map(f32::from_le_bytes)
    }
}

pub(crate) fn le_u32_at(bytes: &[u8], index: usize) -> Result<u32> {
    let start = index * 4;
    bytes
        .get(start..start + 4)
        .map(|b| u32::from_le_bytes(b.try_into().expect("4 bytes")))
        .ok_or(Error::Truncated {
            expected: 6 + start + 4,
            found: 6 + bytes.len(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crc64_xz_check_value() {
        // Standard check value of CRC-64/XZ over "123456789".
        assert_eq!(checksum(b"123456789"), 0x995d_c9bb_df19_39fa);
    }
}
