//! Debug dump format: `b"PPT1"`, then `T`, `N`, `C` as little-endian `u32`,
//! then `T*N*C` little-endian `f64` in `[t][i][c]` order.

use std::io::{Read, Write};

use super::{PosteriorError, PosteriorTensor, Result};

pub const DUMP_MAGIC: &[u8; 4] = b"PPT1";

pub fn write_tensor<W: Write>(tensor: &PosteriorTensor, mut out: W) -> Result<()> {
    let dims = [tensor.samples(), tensor.points(), tensor.classes()];
    out.write_all(DUMP_MAGIC)?;
    for d in dims {
        let d = u32::try_from(d).map_err(|_| PosteriorError::Dump(format!("dimension {d} exceeds u32")))?;
        out.write_all(&d.to_le_bytes())?;
    }
    for v in tensor.as_slice() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Read a dump and validate the tensor it contains.
pub fn read_tensor<R: Read>(mut input: R) -> Result<PosteriorTensor> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(PosteriorError::Dump(format!("bad magic {magic:?}")));
    }
    let mut dims = [0usize; 3];
    for d in dims.iter_mut() {
        let mut buf = [0u8; 4];
        input.read_exact(&mut buf)?;
        *d = u32::from_le_bytes(buf) as usize;
    }
    let [t, n, c] = dims;
    let len = t
        .checked_mul(n)
        .and_then(|x| x.checked_mul(c))
        .ok_or_else(|| PosteriorError::Dump("dimensions overflow".into()))?;
    let mut probs = Vec::with_capacity(len);
    let mut buf = [0u8; 8];
    for _ in 0..len {
        input.read_exact(&mut buf)?;
        probs.push(f64::from_le_bytes(buf));
    }
    PosteriorTensor::new(t, n, c, probs)
}
