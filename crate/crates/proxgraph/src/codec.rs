//! Little-endian primitives shared by the binary index container.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};

pub(crate) fn put_u8(w: &mut impl Write, v: u8) -> Result<()> {
    Ok(w.write_u8(v)?)
}

pub(crate) fn put_u32(w: &mut impl Write, v: u32) -> Result<()> {
    Ok(w.write_u32::<LittleEndian>(v)?)
}

pub(crate) fn put_u64(w: &mut impl Write, v: u64) -> Result<()> {
    Ok(w.write_u64::<LittleEndian>(v)?)
}

pub(crate) fn put_f32(w: &mut impl Write, v: f32) -> Result<()> {
    Ok(w.write_f32::<LittleEndian>(v)?)
}

pub(crate) fn put_str(w: &mut impl Write, s: &str) -> Result<()> {
    put_u32(w, s.len() as u32)?;
    Ok(w.write_all(s.as_bytes())?)
}

pub(crate) fn put_u32s(w: &mut impl Write, vs: &[u32]) -> Result<()> {
    put_u64(w, vs.len() as u64)?;
    for &v in vs {
        put_u32(w, v)?;
    }
    Ok(())
}

pub(crate) fn put_f32s(w: &mut impl Write, vs: &[f32]) -> Result<()> {
    put_u64(w, vs.len() as u64)?;
    for &v in vs {
        put_f32(w, v)?;
    }
    Ok(())
}

pub(crate) fn get_u8(r: &mut impl Read) -> Result<u8> {
    Ok(r.read_u8()?)
}

pub(crate) fn get_u32(r: &mut impl Read) -> Result<u32> {
    Ok(r.read_u32::<LittleEndian>()?)
}

pub(crate) fn get_u64(r: &mut impl Read) -> Result<u64> {
    Ok(r.read_u64::<LittleEndian>()?)
}

pub(crate) fn get_f32(r: &mut impl Read) -> Result<f32> {
    Ok(r.read_f32::<LittleEndian>()?)
}

// Length prefixes come from untrusted files; cap them before allocating.
const MAX_LEN: u64 = 1 << 34;

fn checked_len(len: u64) -> Result<usize> {
    if len > MAX_LEN {
        return Err(Error::Format(format!("implausible length prefix {len}")));
    }
    Ok(len as usize)
}

pub(crate) fn get_str(r: &mut impl Read) -> Result<String> {
    let len = checked_len(get_u32(r)? as u64)?;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Format(format!("invalid utf-8 string: {e}")))
}

pub(crate) fn get_u32s(r: &mut impl Read) -> Result<Vec<u32>> {
    let len = checked_len(get_u64(r)?)?;
    let mut out = vec![0u32; len];
    r.read_u32_into::<LittleEndian>(&mut out)?;
    Ok(out)
}

pub(crate) fn get_f32s(r: &mut impl Read) -> Result<Vec<f32>> {
    let len = checked_len(get_u64(r)?)?;
    let mut out = vec![0f32; len];
    r.read_f32_into::<LittleEndian>(&mut out)?;
    Ok(out)
}
