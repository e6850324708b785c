//! The `PBST` binary tensor container.
//!
//! Layout, little-endian throughout:
//!
//! | offset      | size        | field                               |
//! |-------------|-------------|-------------------------------------|
//! | 0           | 4           | magic `b"PBST"`                     |
//! | 4           | 4 (`u32`)   | version, currently `1`              |
//! | 8           | 4 (`u32`)   | dtype code: `0` = f32, `1` = f64    |
//! | 12          | 4 (`u32`)   | `ndim`, either 2 or 3               |
//! | 16          | 8 * `ndim`  | shape, one `u64` per axis           |
//! | 16 + 8*ndim | payload     | row-major element values            |
//!
//! A rank-3 file is a stack of `shape[0]` matrices, each `shape[1] x shape[2]`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::{DType, Scalar};
use crate::tensor::{RealMatrix, Tensor};

pub const MAGIC: &[u8; 4] = b"PBST";
pub const VERSION: u32 = 1;
/// Bytes before the shape array.
pub const FIXED_HEADER_LEN: usize = 16;

/// A tensor read from disk, in whatever precision the file declared.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyTensor {
    F32(Tensor<f32>),
    F64(Tensor<f64>),
}

impl AnyTensor {
    pub fn dtype(&self) -> DType {
        match self {
            AnyTensor::F32(_) => DType::F32,
            AnyTensor::F64(_) => DType::F64,
        }
    }

    pub fn shape(&self) -> Vec<usize> {
        match self {
            AnyTensor::F32(t) => t.shape(),
            AnyTensor::F64(t) => t.shape(),
        }
    }

    /// Converts to the requested precision; a no-op when it already matches.
    pub fn into_precision<T: Scalar>(self) -> Tensor<T> {
        match self {
            AnyTensor::F32(t) => t.cast(),
            AnyTensor::F64(t) => t.cast(),
        }
    }
}

pub fn encode<T: Scalar>(tensor: &Tensor<T>) -> Vec<u8> {
    let shape = tensor.shape();
    let numel: usize = shape.iter().product();
    let mut out = Vec::with_capacity(FIXED_HEADER_LEN + 8 * shape.len() + numel * T::DTYPE.size());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&T::DTYPE.code().to_le_bytes());
    out.extend_from_slice(&(shape.len() as u32).to_le_bytes());
    for dim in &shape {
        out.extend_from_slice(&(*dim as u64).to_le_bytes());
    }
    for head in tensor.heads() {
        for &x in head.as_slice() {
            x.write_le(&mut out);
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::format(
                self.pos as u64,
                format!(
                    "truncated {what}: need {n} bytes, {} remain",
                    self.bytes.len() - self.pos
                ),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<AnyTensor> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Error::format(0, format!("bad magic {magic:?}, expected \"PBST\"")));
    }
    let version = cur.u32("version")?;
    if version != VERSION {
        return Err(Error::format(4, format!("unsupported version {version}")));
    }
    let code = cur.u32("dtype")?;
    let dtype = DType::from_code(code).ok_or_else(|| Error::format(8, format!("unknown dtype code {code}")))?;
    let ndim = cur.u32("ndim")?;
    if ndim != 2 && ndim != 3 {
        return Err(Error::format(12, format!("ndim must be 2 or 3, got {ndim}")));
    }
    let mut shape = Vec::with_capacity(ndim as usize);
    for axis in 0..ndim {
        let offset = cur.pos as u64;
        let dim = cur.u64("shape")?;
        let dim =
            usize::try_from(dim).map_err(|_| Error::format(offset, format!("axis {axis} length {dim} overflows")))?;
        shape.push(dim);
    }
    let payload_offset = cur.pos;
    let numel = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .and_then(|n| n.checked_mul(dtype.size()).map(|_| n))
        .ok_or_else(|| Error::format(16, "shape product overflows"))?;
    let expected = numel * dtype.size();
    let remaining = bytes.len() - payload_offset;
    if remaining != expected {
        return Err(Error::format(
            payload_offset as u64,
            format!("payload is {remaining} bytes, header declares {expected}"),
        ));
    }
    let payload = &bytes[payload_offset..];
    Ok(match dtype {
        DType::F32 => AnyTensor::F32(build::<f32>(&shape, payload, payload_offset)?),
        DType::F64 => AnyTensor::F64(build::<f64>(&shape, payload, payload_offset)?),
    })
}

fn build<T: Scalar>(shape: &[usize], payload: &[u8], base: usize) -> Result<Tensor<T>> {
    let size = T::DTYPE.size();
    let mut values = Vec::with_capacity(payload.len() / size);
    for (i, chunk) in payload.chunks_exact(size).enumerate() {
        let x = T::read_le(chunk);
        if !x.is_finite() {
            return Err(Error::format((base + i * size) as u64, "non-finite element"));
        }
        values.push(x);
    }
    match *shape {
        [rows, cols] => Ok(Tensor::Matrix(RealMatrix::new(rows, cols, values)?)),
        [heads, rows, cols] => {
            let per = rows * cols;
            let mut stack = Vec::with_capacity(heads);
            for h in 0..heads {
                stack.push(RealMatrix::new(rows, cols, values[h * per..(h + 1) * per].to_vec())?);
            }
            Tensor::stack(stack)
        }
        _ => unreachable!("ndim validated"),
    }
}

pub fn write_tensor<T: Scalar>(path: impl AsRef<Path>, tensor: &Tensor<T>) -> Result<()> {
    fs::write(path, encode(tensor))?;
    Ok(())
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<AnyTensor> {
    decode(&fs::read(path)?)
}

/// Reads a tensor and converts it to `T`.
pub fn read_tensor_as<T: Scalar>(path: impl AsRef<Path>) -> Result<Tensor<T>> {
    Ok(read_tensor(path)?.into_precision())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn round_trip_3x2() {
        let m = RealMatrix::<f64>::from_rows(&[&[1.0, -2.5], &[3.25, 4.0], &[0.0, 1e-300]]).unwrap();
        let t = Tensor::Matrix(m);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.pbst");
        write_tensor(&path, &t).unwrap();
        assert_eq!(read_tensor(&path).unwrap(), AnyTensor::F64(t));
    }

    #[test]
    fn bad_magic() {
        let mut bytes = encode(&Tensor::Matrix(RealMatrix::<f32>::zeros(1, 1)));
        bytes[..4].copy_from_slice(b"XXXX");
        assert!(matches!(decode(&bytes), Err(Error::Format { offset: 0, .. })));
    }

    #[test]
    fn header_arithmetic_2x2_f32() {
        let m = RealMatrix::<f32>::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let bytes = encode(&Tensor::Matrix(m));
        assert_eq!(FIXED_HEADER_LEN, 16);
        // 16 fixed + 2 shape words + 4 elements of 4 bytes
        assert_eq!(bytes.len(), 16 + 16 + 16);
        assert_eq!(&bytes[8..12], &0u32.to_le_bytes());
        assert_eq!(&bytes[32..36], &1.0f32.to_le_bytes());
    }

    #[test]
    fn format_errors_carry_offsets() {
        let good = encode(&Tensor::Matrix(RealMatrix::<f64>::zeros(2, 2)));

        let mut v = good.clone();
        v[4] = 9;
        assert!(matches!(decode(&v), Err(Error::Format { offset: 4, .. })));

        let mut v = good.clone();
        v[8] = 7;
        assert!(matches!(decode(&v), Err(Error::Format { offset: 8, .. })));

        let mut v = good.clone();
        v[12] = 4;
        assert!(matches!(decode(&v), Err(Error::Format { offset: 12, .. })));

        let v = &good[..good.len() - 3];
        assert!(matches!(decode(v), Err(Error::Format { offset: 32, .. })));

        assert!(matches!(decode(&good[..10]), Err(Error::Format { offset: 8, .. })));

        let mut v = good.clone();
        v[40..48].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(decode(&v), Err(Error::Format { offset: 40, .. })));
    }

    #[test]
    fn stack_round_trip_and_cast() {
        let heads = (0..3)
            .map(|h| RealMatrix::<f32>::from_fn(4, 2, |i, j| (h * 8 + i * 2 + j) as f32 * 0.5))
            .collect();
        let t = Tensor::stack(heads).unwrap();
        let back = decode(&encode(&t)).unwrap();
        assert_eq!(back.shape(), vec![3, 4, 2]);
        let wide: Tensor<f64> = back.clone().into_precision();
        assert_eq!(wide.cast::<f32>(), t);
        assert_eq!(back, AnyTensor::F32(t));
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(rows in 0usize..6, cols in 0usize..6, heads in 0usize..4, seed in any::<u64>()) {
            let mut state = seed;
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                f64::from_bits((state >> 12) | 0x3ff0_0000_0000_0000) - 1.5
            };
            let m = RealMatrix::<f64>::from_fn(rows, cols, |_, _| next());
            let t = Tensor::Matrix(m.clone());
            prop_assert_eq!(decode(&encode(&t)).unwrap(), AnyTensor::F64(t));
            let s = Tensor::stack(vec![m.cast::<f32>(); heads]).unwrap();
            prop_assert_eq!(decode(&encode(&s)).unwrap(), AnyTensor::F32(s));
        }
    }
}
