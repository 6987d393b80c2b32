//! Binary checkpoints of a flow state.
//!
//! Layout (little-endian): magic `YMHF`, `u32` version, `u32` n, `u32` rank,
//! `u32` grid size per real axis, `f64` side length per real axis, `f64` flow
//! time, then the `2n` connection components and the `n` Higgs components.
//! Each component is stored point by point (last axis fastest), each matrix
//! row-major, each entry as `(re, im)` float64 pairs.

use super::HiggsState;
use crate::bundle::{Connection, HiggsField};
use crate::error::{Error, Result};
use crate::field::MatrixField;
use crate::geometry::TorusGeometry;
use crate::linalg::C64;
use std::io::{Read, Write};

pub const MAGIC: &[u8; 4] = b"YMHF";
pub const VERSION: u32 = 1;

/// Decoded checkpoint contents.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub n: usize,
    pub rank: usize,
    pub grid: Vec<usize>,
    pub sides: Vec<f64>,
    pub t: f64,
    pub a: Vec<MatrixField>,
    pub theta: Vec<MatrixField>,
}

impl Checkpoint {
    pub fn geometry(&self) -> Result<TorusGeometry> {
        TorusGeometry::new(self.n, &self.sides, &self.grid)
    }

    pub fn into_state(self, geom: &TorusGeometry) -> Result<HiggsState> {
        if geom.n() != self.n || geom.grid() != self.grid.as_slice() || geom.sides() != self.sides.as_slice() {
            return Err(Error::Checkpoint("geometry does not match the checkpoint header".into()));
        }
        let a = Connection::from_components(geom, self.a)?;
        let theta = HiggsField::from_components(geom, self.theta)?;
        Ok(HiggsState { a, theta, t: self.t, cached: None })
    }
}

pub fn write_checkpoint(mut w: impl Write, geom: &TorusGeometry, state: &HiggsState) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(geom.n() as u32).to_le_bytes());
    buf.extend_from_slice(&(state.a.rank() as u32).to_le_bytes());
    for &g in geom.grid() {
        buf.extend_from_slice(&(g as u32).to_le_bytes());
    }
    for &s in geom.sides() {
        buf.extend_from_slice(&s.to_le_bytes());
    }
    buf.extend_from_slice(&state.t.to_le_bytes());
    for c in state.a.comps().iter().chain(state.theta.comps()) {
        for z in c.data() {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self
            .data
            .get(self.pos..end)
            .ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(bytes.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

pub fn read_checkpoint(mut r: impl Read) -> Result<Checkpoint> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    let mut cur = Cursor { data: &data, pos: 0 };
    if &cur.take::<4>()? != MAGIC {
        return Err(Error::Checkpoint("bad magic bytes".into()));
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let n = cur.u32()? as usize;
    let rank = cur.u32()? as usize;
    if !(1..=2).contains(&n) || rank == 0 || rank > 64 {
        return Err(Error::Checkpoint(format!("implausible header n = {n}, rank = {rank}")));
    }
    let grid = (0..2 * n).map(|_| cur.u32().map(|g| g as usize)).collect::<Result<Vec<_>>>()?;
    let sides = (0..2 * n).map(|_| cur.f64()).collect::<Result<Vec<_>>>()?;
    let t = cur.f64()?;
    let npts: usize = grid.iter().product();
    let expected = cur.pos + 3 * n * npts * rank * rank * 16;
    if data.len() != expected {
        return Err(Error::Checkpoint(format!("expected {expected} bytes, found {}", data.len())));
    }
    let mut read_field = || -> Result<MatrixField> {
        let vals = (0..npts * rank * rank)
            .map(|_| Ok(C64::new(cur.f64()?, cur.f64()?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(MatrixField::from_data(rank, vals))
    };
    let a = (0..2 * n).map(|_| read_field()).collect::<Result<Vec<_>>>()?;
    let theta = (0..n).map(|_| read_field()).collect::<Result<Vec<_>>>()?;
    Ok(Checkpoint { n, rank, grid, sides, t, a, theta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{random_higgs_pair, PairSpec};

    #[test]
    fn round_trip_is_bit_exact() {
        let g = TorusGeometry::new(1, &[1.0, 1.5], &[8, 10]).unwrap();
        let (a, theta) = random_higgs_pair(&g, &PairSpec::new(3, 2, 2, 0.7)).unwrap();
        let state = HiggsState { a, theta, t: 0.125, cached: None };
        let mut bytes = Vec::new();
        write_checkpoint(&mut bytes, &g, &state).unwrap();
        assert_eq!(&bytes[..4], b"YMHF");
        let ck = read_checkpoint(bytes.as_slice()).unwrap();
        let back = ck.into_state(&g).unwrap();
        for (x, y) in state.a.comps().iter().zip(back.a.comps()) {
            assert!(x.data().iter().zip(y.data()).all(|(p, q)| p.re.to_bits() == q.re.to_bits() && p.im.to_bits() == q.im.to_bits()));
        }
        assert_eq!(back, state);
    }

    #[test]
    fn rejects_truncated_and_bad_magic() {
        let g = TorusGeometry::unit(1, 8).unwrap();
        let state = HiggsState::new(Connection::zero(&g, 2), HiggsField::zero(&g, 2));
        let mut bytes = Vec::new();
        write_checkpoint(&mut bytes, &g, &state).unwrap();
        assert!(read_checkpoint(&bytes[..bytes.len() - 1]).is_err());
        bytes[0] = b'X';
        assert!(read_checkpoint(bytes.as_slice()).is_err());
    }
}
