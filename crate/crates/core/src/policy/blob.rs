//! Versioned binary serialisation of policy parameters.
//!
//! Layout (little endian): magic `AGPB`, format version `u32`, architecture
//! header as a `u32` sequence prefixed by its length, parameter count `u64`,
//! then the parameters as `f64`.

use super::distribution::ActionLayout;
use super::network::{Architecture, Backend, PolicyHandle};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"AGPB";
pub const BLOB_VERSION: u32 = 1;
const NONE: u32 = u32::MAX;

fn header_words(arch: &Architecture) -> Vec<u32> {
    let mut w = vec![
        match arch.backend {
            Backend::HistoryMlp => 0,
        },
        arch.obs_dim as u32,
        arch.tuple_dim as u32,
        arch.mem_len as u32,
        arch.embed_dim as u32,
        arch.hidden.len() as u32,
    ];
    w.extend(arch.hidden.iter().map(|&h| h as u32));
    w.push(arch.layout.factors.len() as u32);
    w.extend(arch.layout.factors.iter().map(|&n| n as u32));
    w.extend(
        arch.layout
            .sub_factor
            .iter()
            .map(|s| s.map_or(NONE, |f| f as u32)),
    );
    w
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Blob("truncated blob".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
    fn usize(&mut self) -> Result<usize> {
        Ok(self.u32()? as usize)
    }
}

fn parse_header(words: &[u32]) -> Result<Architecture> {
    let bad = || Error::Blob("malformed architecture header".into());
    let mut it = words.iter().map(|&w| w as usize);
    let mut next = || it.next().ok_or_else(bad);
    let backend = match next()? {
        0 => Backend::HistoryMlp,
        b => return Err(Error::Blob(format!("unknown backend {b}"))),
    };
    let obs_dim = next()?;
    let tuple_dim = next()?;
    let mem_len = next()?;
    let embed_dim = next()?;
    let n_hidden = next()?;
    let hidden = (0..n_hidden).map(|_| next()).collect::<Result<Vec<_>>>()?;
    let n_factors = next()?;
    let factors = (0..n_factors).map(|_| next()).collect::<Result<Vec<_>>>()?;
    let roots = *factors.first().ok_or_else(bad)?;
    let sub_factor = (0..roots)
        .map(|_| next().map(|w| (w != NONE as usize).then_some(w)))
        .collect::<Result<Vec<_>>>()?;
    if next().is_ok() {
        return Err(bad());
    }
    let arch = Architecture {
        backend,
        obs_dim,
        tuple_dim,
        mem_len,
        embed_dim,
        hidden,
        layout: ActionLayout {
            factors,
            sub_factor,
        },
    };
    arch.validate().map_err(|e| Error::Blob(e.to_string()))?;
    Ok(arch)
}

impl PolicyHandle {
    pub fn to_blob(&self) -> Vec<u8> {
        let words = header_words(self.arch());
        let mut out = Vec::with_capacity(20 + 4 * words.len() + 8 * self.param_count());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&BLOB_VERSION.to_le_bytes());
        out.extend_from_slice(&(words.len() as u32).to_le_bytes());
        for w in words {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.extend_from_slice(&(self.param_count() as u64).to_le_bytes());
        for p in self.params() {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    /// Restore parameters and architecture; the sampler is seeded afresh.
    pub fn from_blob(bytes: &[u8], sampler_seed: u64) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Blob("bad magic".into()));
        }
        let version = r.u32()?;
        if version != BLOB_VERSION {
            return Err(Error::Blob(format!("unsupported blob version {version}")));
        }
        let n_words = r.usize()?;
        let words = (0..n_words).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        let arch = parse_header(&words)?;
        let n = r.u64()? as usize;
        let params = (0..n)
            .map(|_| r.u64().map(f64::from_bits))
            .collect::<Result<Vec<_>>>()?;
        if r.pos != bytes.len() {
            return Err(Error::Blob("trailing bytes".into()));
        }
        PolicyHandle::from_parts(arch, params, sampler_seed)
    }
}
