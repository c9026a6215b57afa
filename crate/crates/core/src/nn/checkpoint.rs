use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::model::{Model, ModelConfig};
use super::tensor::{Scalar, Tensor};
use super::NnError;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"MOLCAPNN";
pub const CHECKPOINT_VERSION: u32 = 1;

fn err(e: impl std::fmt::Display) -> NnError {
    NnError::Checkpoint(e.to_string())
}

fn put_u32<W: Write>(w: &mut W, v: u32) -> Result<(), NnError> {
    w.write_all(&v.to_le_bytes()).map_err(err)
}

fn get<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N], NnError> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(err)?;
    Ok(b)
}

fn get_u32<R: Read>(r: &mut R) -> Result<u32, NnError> {
    Ok(u32::from_le_bytes(get(r)?))
}

fn get_bytes<R: Read>(r: &mut R, n: usize) -> Result<Vec<u8>, NnError> {
    let mut v = Vec::new();
    r.take(n as u64).read_to_end(&mut v).map_err(err)?;
    if v.len() != n {
        return Err(err("truncated"));
    }
    Ok(v)
}

/// Writes the configuration (as JSON) and every named parameter as
/// little-endian `f64`, regardless of the model's element type.
pub fn write_checkpoint<T: Scalar, W: Write>(model: &mut Model<T>, mut w: W) -> Result<(), NnError> {
    w.write_all(CHECKPOINT_MAGIC).map_err(err)?;
    put_u32(&mut w, CHECKPOINT_VERSION)?;
    let json = serde_json::to_vec(model.config()).map_err(err)?;
    put_u32(&mut w, json.len() as u32)?;
    w.write_all(&json).map_err(err)?;
    let params = model.snapshot();
    put_u32(&mut w, params.len() as u32)?;
    for (name, t) in params {
        put_u32(&mut w, name.len() as u32)?;
        w.write_all(name.as_bytes()).map_err(err)?;
        put_u32(&mut w, t.shape().len() as u32)?;
        for &d in t.shape() {
            w.write_all(&(d as u64).to_le_bytes()).map_err(err)?;
        }
        for &v in t.data() {
            w.write_all(&v.as_f64().to_le_bytes()).map_err(err)?;
        }
    }
    w.flush().map_err(err)
}

pub fn read_checkpoint<T: Scalar, R: Read>(mut r: R) -> Result<Model<T>, NnError> {
    if &get::<_, 8>(&mut r)? != CHECKPOINT_MAGIC {
        return Err(err("bad magic"));
    }
    let version = get_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(err(format!("unsupported version {version}")));
    }
    let len = get_u32(&mut r)? as usize;
    let config: ModelConfig = serde_json::from_slice(&get_bytes(&mut r, len)?).map_err(err)?;
    let mut model = Model::new(&config)?;
    let count = get_u32(&mut r)? as usize;
    let mut params = Vec::with_capacity(count);
    for _ in 0..count {
        let n = get_u32(&mut r)? as usize;
        let name = String::from_utf8(get_bytes(&mut r, n)?).map_err(err)?;
        let ndim = get_u32(&mut r)? as usize;
        let shape = (0..ndim)
            .map(|_| get::<_, 8>(&mut r).map(|b| u64::from_le_bytes(b) as usize))
            .collect::<Result<Vec<_>, _>>()?;
        let len: usize = shape.iter().product();
        let data = get_bytes(&mut r, len * 8)?
            .chunks_exact(8)
            .map(|c| T::of(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
            .collect();
        params.push((name, Tensor::from_vec(&shape, data)?));
    }
    model.restore(&params)?;
    Ok(model)
}

pub fn save_checkpoint<T: Scalar>(model: &mut Model<T>, path: &Path) -> Result<(), NnError> {
    let f = File::create(path).map_err(|e| err(format!("{}: {e}", path.display())))?;
    write_checkpoint(model, BufWriter::new(f))
}

pub fn load_checkpoint<T: Scalar>(path: &Path) -> Result<Model<T>, NnError> {
    let f = File::open(path).map_err(|e| err(format!("{}: {e}", path.display())))?;
    read_checkpoint(BufReader::new(f))
}
