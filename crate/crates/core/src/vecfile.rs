//! Binary vectors of dual-base values.
//!
//! Layout, all little-endian: magic `DBLV`, `E` as u16, `F` as u16, the
//! element count as u64, then one record per element holding
//! [`DualBase::to_bits`] in `ceil((F + E + 3) / 8)` bytes.

use std::io::{Read, Write};

use crate::config::FlmaConfig;
use crate::dualbase::DualBase;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"DBLV";

pub fn record_bytes(cfg: &FlmaConfig) -> usize {
    (cfg.f_bits + cfg.e_bits + 3).div_ceil(8) as usize
}

pub fn write<W: Write>(mut w: W, values: &[DualBase], cfg: &FlmaConfig) -> Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&(cfg.e_bits as u16).to_le_bytes())?;
    w.write_all(&(cfg.f_bits as u16).to_le_bytes())?;
    w.write_all(&(values.len() as u64).to_le_bytes())?;
    let n = record_bytes(cfg);
    for v in values {
        w.write_all(&v.to_bits(cfg).to_le_bytes()[..n])?;
    }
    w.flush()?;
    Ok(())
}

/// Read a vector, checking that its `E`, `F` match `cfg`.
pub fn read<R: Read>(mut r: R, cfg: &FlmaConfig) -> Result<Vec<DualBase>> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head)?;
    if head[..4] != MAGIC {
        return Err(Error::InvalidEncoding("not a dual-base vector file".into()));
    }
    let e = u16::from_le_bytes([head[4], head[5]]);
    let f = u16::from_le_bytes([head[6], head[7]]);
    if u32::from(e) != cfg.e_bits || u32::from(f) != cfg.f_bits {
        return Err(Error::InvalidEncoding(format!(
            "file holds E={e} F={f}, configuration is E={} F={}",
            cfg.e_bits, cfg.f_bits
        )));
    }
    let count = u64::from_le_bytes(head[8..16].try_into().expect("8 bytes"));
    let n = record_bytes(cfg);
    let mut out = Vec::with_capacity(count.min(1 << 20) as usize);
    let mut buf = [0u8; 16];
    for _ in 0..count {
        r.read_exact(&mut buf[..n])?;
        out.push(DualBase::from_bits(u128::from_le_bytes(buf), cfg)?);
    }
    Ok(out)
}
