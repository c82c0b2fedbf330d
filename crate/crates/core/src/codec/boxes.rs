//! Generic size + fourcc box tree.

use super::CodecError;
use std::fmt;

/// Four-character box code. Arbitrary bytes are kept as-is.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FourCc(pub [u8; 4]);

impl FourCc {
    pub const fn new(code: &[u8; 4]) -> Self {
        Self(*code)
    }
}

impl fmt::Display for FourCc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            if b.is_ascii_graphic() || b == b' ' {
                write!(f, "{}", b as char)?;
            } else {
                write!(f, "\\x{b:02x}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for FourCc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "'{self}'")
    }
}

pub const OMHD: FourCc = FourCc::new(b"omhd");
pub const TRKD: FourCc = FourCc::new(b"trkd");
pub const VWPT: FourCc = FourCc::new(b"vwpt");
pub const OVLY: FourCc = FourCc::new(b"ovly");
pub const TMTD: FourCc = FourCc::new(b"tmtd");
pub const TILG: FourCc = FourCc::new(b"tilg");
pub const VWSP: FourCc = FourCc::new(b"vwsp");

// children of 'vwpt'
pub const VPHD: FourCc = FourCc::new(b"vphd");
pub const VSWR: FourCc = FourCc::new(b"vswr");
pub const VLOP: FourCc = FourCc::new(b"vlop");
// children of 'tmtd'
pub const TMHD: FourCc = FourCc::new(b"tmhd");
pub const SMPL: FourCc = FourCc::new(b"smpl");
// children of 'tilg'
pub const TGHD: FourCc = FourCc::new(b"tghd");
pub const TGMB: FourCc = FourCc::new(b"tgmb");

/// Box types whose payload is a sequence of child boxes.
pub const CONTAINERS: [FourCc; 3] = [VWPT, TMTD, TILG];

pub fn is_container(fourcc: FourCc) -> bool {
    CONTAINERS.contains(&fourcc)
}

const HEADER_LEN: usize = 8;
const MAX_DEPTH: usize = 16;
/// Largest payload a 32-bit size field can describe.
pub const MAX_PAYLOAD: u64 = u32::MAX as u64 - HEADER_LEN as u64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoxPayload {
    Raw(Vec<u8>),
    Children(Vec<OmbBox>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmbBox {
    pub fourcc: FourCc,
    pub payload: BoxPayload,
}

impl OmbBox {
    pub fn raw(fourcc: FourCc, payload: Vec<u8>) -> Self {
        Self {
            fourcc,
            payload: BoxPayload::Raw(payload),
        }
    }

    pub fn container(fourcc: FourCc, children: Vec<OmbBox>) -> Self {
        Self {
            fourcc,
            payload: BoxPayload::Children(children),
        }
    }

    /// Payload length in bytes, children included.
    pub fn payload_len(&self) -> u64 {
        match &self.payload {
            BoxPayload::Raw(b) => b.len() as u64,
            BoxPayload::Children(c) => c.iter().map(OmbBox::encoded_len).sum(),
        }
    }

    pub fn encoded_len(&self) -> u64 {
        HEADER_LEN as u64 + self.payload_len()
    }

    pub fn children(&self) -> &[OmbBox] {
        match &self.payload {
            BoxPayload::Children(c) => c,
            BoxPayload::Raw(_) => &[],
        }
    }
}

/// Size field for a payload of `payload_len` bytes.
pub fn box_size(fourcc: FourCc, payload_len: u64) -> Result<u32, CodecError> {
    if payload_len > MAX_PAYLOAD {
        return Err(CodecError::Capacity { fourcc, payload_len });
    }
    Ok((payload_len + HEADER_LEN as u64) as u32)
}

/// Parses a complete byte buffer into a list of boxes. Payloads of
/// [`CONTAINERS`] are parsed recursively; everything else stays raw.
pub fn decode_box_tree(bytes: &[u8]) -> Result<Vec<OmbBox>, CodecError> {
    decode_level(bytes, 0, 0)
}

fn decode_level(bytes: &[u8], base: usize, depth: usize) -> Result<Vec<OmbBox>, CodecError> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let offset = base + pos;
        let rest = &bytes[pos..];
        if rest.len() < HEADER_LEN {
            return Err(CodecError::Truncated {
                offset,
                declared: HEADER_LEN as u64,
                available: rest.len(),
            });
        }
        let size = u32::from_be_bytes(rest[0..4].try_into().unwrap());
        let fourcc = FourCc(rest[4..8].try_into().unwrap());
        if (size as usize) < HEADER_LEN {
            return Err(CodecError::SizeTooSmall { offset, size });
        }
        if size as usize > rest.len() {
            return Err(CodecError::Truncated {
                offset,
                declared: u64::from(size),
                available: rest.len(),
            });
        }
        let body = &rest[HEADER_LEN..size as usize];
        let payload = if is_container(fourcc) {
            if depth >= MAX_DEPTH {
                return Err(CodecError::TooDeep { offset });
            }
            BoxPayload::Children(decode_level(body, offset + HEADER_LEN, depth + 1)?)
        } else {
            BoxPayload::Raw(body.to_vec())
        };
        out.push(OmbBox { fourcc, payload });
        pos += size as usize;
    }
    Ok(out)
}

/// Serializes boxes, computing sizes bottom-up.
pub fn encode_box_tree(boxes: &[OmbBox]) -> Result<Vec<u8>, CodecError> {
    let mut out = Vec::new();
    for b in boxes {
        write_box(b, &mut out)?;
    }
    Ok(out)
}

fn write_box(b: &OmbBox, out: &mut Vec<u8>) -> Result<(), CodecError> {
    let size = box_size(b.fourcc, b.payload_len())?;
    out.extend_from_slice(&size.to_be_bytes());
    out.extend_from_slice(&b.fourcc.0);
    match &b.payload {
        BoxPayload::Raw(bytes) => out.extend_from_slice(bytes),
        BoxPayload::Children(children) => {
            for c in children {
                write_box(c, out)?;
            }
        }
    }
    Ok(())
}
