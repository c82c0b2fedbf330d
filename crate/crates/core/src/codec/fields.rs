//! Big-endian field readers and writers for box payloads.

use super::quantize::{to_fixed, AngleKind, ANGLE_UNITS_PER_DEGREE};
use super::{CodecError, FourCc};
use crate::geometry::{Rect2D, SphereRegion, ViewingOrientation};

#[derive(Default)]
pub(crate) struct Writer {
    pub buf: Vec<u8>,
}

impl Writer {
    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn bool(&mut self, v: bool) {
        self.u8(v as u8);
    }

    pub fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn i32(&mut self, v: i32) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }

    pub fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }

    pub fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }

    /// Presence flag followed by the value when present.
    pub fn opt<T>(&mut self, v: Option<T>, f: impl FnOnce(&mut Self, T)) {
        self.bool(v.is_some());
        if let Some(v) = v {
            f(self, v);
        }
    }

    pub fn angle(&mut self, deg: f64, kind: AngleKind) -> Result<(), CodecError> {
        self.i32(to_fixed(deg, kind)?);
        Ok(())
    }

    pub fn orientation(&mut self, o: &ViewingOrientation) -> Result<(), CodecError> {
        self.angle(o.azimuth, AngleKind::Wrapped)?;
        self.angle(o.elevation, AngleKind::Plain)?;
        self.angle(o.tilt, AngleKind::Wrapped)
    }

    pub fn region(&mut self, r: &SphereRegion) -> Result<(), CodecError> {
        self.orientation(&r.center)?;
        self.angle(r.azimuth_range, AngleKind::Range)?;
        self.angle(r.elevation_range, AngleKind::Range)
    }

    pub fn opt_region(&mut self, r: Option<&SphereRegion>) -> Result<(), CodecError> {
        self.bool(r.is_some());
        if let Some(r) = r {
            self.region(r)?;
        }
        Ok(())
    }

    pub fn rect(&mut self, r: &Rect2D) {
        self.u32(r.x);
        self.u32(r.y);
        self.u32(r.width);
        self.u32(r.height);
    }
}

pub(crate) struct Reader<'a> {
    fourcc: FourCc,
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(fourcc: FourCc, buf: &'a [u8]) -> Self {
        Self { fourcc, buf, pos: 0 }
    }

    fn take(&mut self, n: usize, field: &'static str) -> Result<&'a [u8], CodecError> {
        if self.buf.len() - self.pos < n {
            return Err(CodecError::ShortPayload {
                fourcc: self.fourcc,
                field,
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn invalid(&self, field: &'static str, value: u64) -> CodecError {
        CodecError::InvalidValue {
            fourcc: self.fourcc,
            field,
            value,
        }
    }

    pub fn u8(&mut self, field: &'static str) -> Result<u8, CodecError> {
        Ok(self.take(1, field)?[0])
    }

    pub fn bool(&mut self, field: &'static str) -> Result<bool, CodecError> {
        match self.u8(field)? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(self.invalid(field, u64::from(v))),
        }
    }

    pub fn u16(&mut self, field: &'static str) -> Result<u16, CodecError> {
        Ok(u16::from_be_bytes(self.take(2, field)?.try_into().unwrap()))
    }

    pub fn u32(&mut self, field: &'static str) -> Result<u32, CodecError> {
        Ok(u32::from_be_bytes(self.take(4, field)?.try_into().unwrap()))
    }

    pub fn i32(&mut self, field: &'static str) -> Result<i32, CodecError> {
        Ok(i32::from_be_bytes(self.take(4, field)?.try_into().unwrap()))
    }

    pub fn u64(&mut self, field: &'static str) -> Result<u64, CodecError> {
        Ok(u64::from_be_bytes(self.take(8, field)?.try_into().unwrap()))
    }

    pub fn f64(&mut self, field: &'static str) -> Result<f64, CodecError> {
        Ok(f64::from_bits(self.u64(field)?))
    }

    pub fn str(&mut self, field: &'static str) -> Result<String, CodecError> {
        let len = self.u32(field)? as usize;
        let bytes = self.take(len, field)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| CodecError::InvalidUtf8 {
            fourcc: self.fourcc,
            field,
        })
    }

    pub fn array4(&mut self, field: &'static str) -> Result<[u8; 4], CodecError> {
        Ok(self.take(4, field)?.try_into().unwrap())
    }

    pub fn opt<T>(
        &mut self,
        field: &'static str,
        f: impl FnOnce(&mut Self) -> Result<T, CodecError>,
    ) -> Result<Option<T>, CodecError> {
        if self.bool(field)? {
            f(self).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn angle(&mut self, field: &'static str) -> Result<f64, CodecError> {
        Ok(f64::from(self.i32(field)?) / ANGLE_UNITS_PER_DEGREE)
    }

    pub fn orientation(&mut self, field: &'static str) -> Result<ViewingOrientation, CodecError> {
        Ok(ViewingOrientation {
            azimuth: self.angle(field)?,
            elevation: self.angle(field)?,
            tilt: self.angle(field)?,
        })
    }

    pub fn region(&mut self, field: &'static str) -> Result<SphereRegion, CodecError> {
        Ok(SphereRegion {
            center: self.orientation(field)?,
            azimuth_range: self.angle(field)?,
            elevation_range: self.angle(field)?,
        })
    }

    pub fn rect(&mut self, field: &'static str) -> Result<Rect2D, CodecError> {
        Ok(Rect2D {
            x: self.u32(field)?,
            y: self.u32(field)?,
            width: self.u32(field)?,
            height: self.u32(field)?,
        })
    }

    pub fn finish(self) -> Result<(), CodecError> {
        let count = self.buf.len() - self.pos;
        if count == 0 {
            Ok(())
        } else {
            Err(CodecError::TrailingBytes {
                fourcc: self.fourcc,
                count,
            })
        }
    }
}
