//! Versioned binary persistence for the Doppler regressor.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! offset  size  field
//! 0       8     magic "DOA-FNN\0"
//! 8       4     u32 format version (currently 1)
//! 12      4     u32 M (subcarrier count the model was trained for)
//! 16      8     f64 ν_max in Hz (output denormalization)
//! 24      4     u32 L, number of dense layers
//! 28      8L    per layer: u32 in_dim, u32 out_dim
//! ...           per layer: f64 weights, row-major [out_dim][in_dim],
//!                          then f64 bias[out_dim]
//! ```
//!
//! Hidden layers use max(0, ·) activation; the final layer is linear.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::nn::{DenseLayer, FnnModel};

const MAGIC: &[u8; 8] = b"DOA-FNN\0";
const VERSION: u32 = 1;

pub fn save_model(model: &FnnModel, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(model.num_subcarriers as u32).to_le_bytes())?;
    w.write_all(&model.nu_max_hz.to_le_bytes())?;
    w.write_all(&(model.layers.len() as u32).to_le_bytes())?;
    for layer in &model.layers {
        w.write_all(&(layer.in_dim as u32).to_le_bytes())?;
        w.write_all(&(layer.out_dim as u32).to_le_bytes())?;
    }
    for layer in &model.layers {
        for v in layer.weights.iter().chain(&layer.bias) {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

pub fn load_model(path: &Path) -> Result<FnnModel> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Model("bad magic; not a Doppler regressor file".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Model(format!("unsupported format version {version}")));
    }
    let m = read_u32(&mut r)? as usize;
    let nu_max_hz = read_f64(&mut r)?;
    let n_layers = read_u32(&mut r)? as usize;
    if n_layers == 0 || n_layers > 64 {
        return Err(Error::Model(format!("implausible layer count {n_layers}")));
    }
    let mut dims = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let in_dim = read_u32(&mut r)? as usize;
        let out_dim = read_u32(&mut r)? as usize;
        if in_dim == 0 || out_dim == 0 || in_dim > 1 << 20 || out_dim > 1 << 20 {
            return Err(Error::Model("implausible layer dimensions".into()));
        }
        dims.push((in_dim, out_dim));
    }
    let mut layers = Vec::with_capacity(n_layers);
    for (in_dim, out_dim) in dims {
        let mut weights = vec![0.0f64; in_dim * out_dim];
        for v in weights.iter_mut() {
            *v = read_f64(&mut r)?;
        }
        let mut bias = vec![0.0f64; out_dim];
        for v in bias.iter_mut() {
            *v = read_f64(&mut r)?;
        }
        layers.push(DenseLayer {
            in_dim,
            out_dim,
            weights,
            bias,
        });
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Model("trailing bytes after model data".into()));
    }
    FnnModel::from_layers(m, nu_max_hz, layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn roundtrip_preserves_predictions_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.fnn");
        let model = FnnModel::new_regressor(16, 5e3, 123).unwrap();
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(model, loaded);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let input: Vec<f64> = (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = model.predict_hz(&input).unwrap();
        let b = loaded.predict_hz(&input).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn rejects_corrupted_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.fnn");
        let model = FnnModel::new_regressor(8, 5e3, 9).unwrap();
        save_model(&model, &path).unwrap();

        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] ^= 0xff;
        let bad_magic = dir.path().join("bad_magic.fnn");
        std::fs::write(&bad_magic, &bytes).unwrap();
        assert!(load_model(&bad_magic).is_err());

        let truncated = dir.path().join("truncated.fnn");
        let original = std::fs::read(&path).unwrap();
        std::fs::write(&truncated, &original[..original.len() - 16]).unwrap();
        assert!(load_model(&truncated).is_err());

        let padded = dir.path().join("padded.fnn");
        let mut long = original.clone();
        long.extend_from_slice(&[0u8; 8]);
        std::fs::write(&padded, &long).unwrap();
        assert!(load_model(&padded).is_err());
    }

    #[test]
    fn rejects_non_finite_parameters() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.fnn");
        let mut model = FnnModel::new_regressor(8, 5e3, 4).unwrap();
        model.layers[0].weights[3] = f64::NAN;
        save_model(&model, &path).unwrap();
        assert!(load_model(&path).is_err());
    }
}
