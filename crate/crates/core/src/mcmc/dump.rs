//! Binary draw dump. All integers and floats are little-endian.
//!
//! ```text
//! magic        8 bytes  "STFHDRAW"
//! version      u32      1
//! J, T, p, q   4 × u32
//! variant      u8       0 = full, 1 = sub1, 2 = sub2
//! padding      3 bytes  zero
//! seed         u64
//! n_chains     u32
//! n_draws      u32
//! n_observed   u32
//! observed     n_observed × u32   flat 0-based cell positions, ascending
//! width        u32      f64 values per record
//! records      n_draws × (chain u32, width × f64)
//! ```
//!
//! Record layout follows [`DrawLayout`]. Acceptance statistics are not
//! stored.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::mcmc::draws::{DrawLayout, PosteriorDraws};
use crate::panel::{PanelIndex, Variant};

pub const MAGIC: &[u8; 8] = b"STFHDRAW";
pub const VERSION: u32 = 1;

fn u32_of(x: usize, what: &str) -> Result<u32> {
    u32::try_from(x).map_err(|_| Error::BadDump(format!("{what} = {x} does not fit in u32")))
}

pub fn write_draws<W: Write>(draws: &PosteriorDraws, mut w: W) -> Result<()> {
    let l = &draws.layout;
    w.write_all(MAGIC)?;
    let header = [
        VERSION,
        u32_of(l.index.n_areas(), "J")?,
        u32_of(l.index.n_times(), "T")?,
        u32_of(l.p, "p")?,
        u32_of(l.q, "q")?,
    ];
    for v in header {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&[l.variant.code(), 0, 0, 0])?;
    w.write_all(&draws.seed.to_le_bytes())?;
    for v in [draws.n_chains, draws.len(), l.observed.len()] {
        w.write_all(&u32_of(v, "count")?.to_le_bytes())?;
    }
    for &i in &l.observed {
        w.write_all(&u32_of(i, "observed index")?.to_le_bytes())?;
    }
    w.write_all(&u32_of(l.width(), "width")?.to_le_bytes())?;
    for (c, s) in draws.chain.iter().zip(&draws.states) {
        w.write_all(&u32_of(*c, "chain")?.to_le_bytes())?;
        for v in l.flatten(s) {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::BadDump("file is truncated".into())
    } else {
        Error::Io(e)
    }
}

pub fn read_draws<R: Read>(mut r: R) -> Result<PosteriorDraws> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != MAGIC {
        return Err(Error::BadDump("not a draw dump (bad magic)".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::BadDump(format!("unsupported version {version}")));
    }
    let j = read_u32(&mut r)? as usize;
    let t = read_u32(&mut r)? as usize;
    let p = read_u32(&mut r)? as usize;
    let q = read_u32(&mut r)? as usize;
    let mut vb = [0u8; 4];
    r.read_exact(&mut vb).map_err(truncated)?;
    let variant = Variant::from_code(vb[0]).ok_or_else(|| Error::BadDump(format!("unknown variant code {}", vb[0])))?;
    let mut sb = [0u8; 8];
    r.read_exact(&mut sb).map_err(truncated)?;
    let seed = u64::from_le_bytes(sb);
    let n_chains = read_u32(&mut r)? as usize;
    let n_draws = read_u32(&mut r)? as usize;
    let n_obs = read_u32(&mut r)? as usize;
    let index = PanelIndex::new(j, t).map_err(|e| Error::BadDump(e.to_string()))?;
    let observed = (0..n_obs)
        .map(|_| read_u32(&mut r).map(|v| v as usize))
        .collect::<Result<Vec<_>>>()?;
    if observed.iter().any(|&i| i >= index.len()) || observed.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadDump("observed cell list is out of range or unsorted".into()));
    }
    let layout = DrawLayout {
        index,
        variant,
        p,
        q,
        observed,
    };
    let width = read_u32(&mut r)? as usize;
    if width != layout.width() {
        return Err(Error::BadDump(format!("record width {width} does not match header ({})", layout.width())));
    }
    let mut chain = Vec::with_capacity(n_draws);
    let mut states = Vec::with_capacity(n_draws);
    let mut buf = vec![0u8; 8 * width];
    for _ in 0..n_draws {
        let c = read_u32(&mut r)? as usize;
        if c >= n_chains {
            return Err(Error::BadDump(format!("chain id {c} out of range")));
        }
        r.read_exact(&mut buf).map_err(truncated)?;
        let record: Vec<f64> = buf
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
            .collect();
        chain.push(c);
        states.push(layout.unflatten(&record));
    }
    Ok(PosteriorDraws {
        layout,
        seed,
        n_chains,
        chain,
        states,
        acceptance: Vec::new(),
    })
}
