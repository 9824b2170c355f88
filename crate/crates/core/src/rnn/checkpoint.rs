//! Portable JSON checkpoints.
//!
//! A checkpoint is a single JSON object with a `format` tag, an integer
//! `version`, model metadata, the fitted scaler, and every parameter block
//! as a named flat array with its shape. Floats are written in shortest
//! round-trip form, so save, load and save again gives identical bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{Arch, Parameters, Provenance, RecurrentModel};
use crate::error::{Error, Result};
use crate::preprocess::MinMaxScaler;

pub const CHECKPOINT_FORMAT: &str = "loadcast-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NamedArray {
    name: String,
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    format: String,
    version: u32,
    arch: Arch,
    hidden: usize,
    input_size: usize,
    window: usize,
    dropout_rate: f64,
    seed: u64,
    provenance: Provenance,
    scaler: MinMaxScaler,
    arrays: Vec<NamedArray>,
}

pub fn checkpoint_to_string(model: &RecurrentModel) -> Result<String> {
    let names = model.params.block_names();
    let hidden = model.hidden();
    let zdim = hidden + model.input_size();
    let arrays = names
        .into_iter()
        .zip(model.params.slices())
        .map(|(name, data)| {
            let shape = if name.contains(".w_") && !name.starts_with("head") {
                vec![hidden, zdim]
            } else {
                vec![data.len()]
            };
            NamedArray {
                name,
                shape,
                data: data.to_vec(),
            }
        })
        .collect();
    let file = CheckpointFile {
        format: CHECKPOINT_FORMAT.into(),
        version: CHECKPOINT_VERSION,
        arch: model.arch,
        hidden,
        input_size: model.input_size(),
        window: model.window,
        dropout_rate: model.dropout_rate,
        seed: model.seed,
        provenance: model.provenance.clone(),
        scaler: model.scaler,
        arrays,
    };
    let mut s = serde_json::to_string_pretty(&file)?;
    s.push('\n');
    Ok(s)
}

pub fn checkpoint_from_str(text: &str) -> Result<RecurrentModel> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Checkpoint(format!("malformed: {e}")))?;
    match value.get("format").and_then(|v| v.as_str()) {
        Some(CHECKPOINT_FORMAT) => {}
        other => {
            return Err(Error::Checkpoint(format!(
                "not a checkpoint (format tag {other:?})"
            )))
        }
    }
    match value.get("version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(CHECKPOINT_VERSION) => {}
        other => {
            return Err(Error::Checkpoint(format!(
                "unsupported version {other:?}, expected {CHECKPOINT_VERSION}"
            )))
        }
    }
    let file: CheckpointFile =
        serde_json::from_value(value).map_err(|e| Error::Checkpoint(e.to_string()))?;

    let mut params = Parameters::zeros(file.arch, file.hidden, file.input_size);
    let expected = params.block_names();
    if file.arrays.len() != expected.len() {
        return Err(Error::Checkpoint(format!(
            "expected {} arrays, found {}",
            expected.len(),
            file.arrays.len()
        )));
    }
    for ((array, name), slot) in file.arrays.iter().zip(&expected).zip(params.slices_mut()) {
        if &array.name != name {
            return Err(Error::Checkpoint(format!(
                "expected array {name:?}, found {:?}",
                array.name
            )));
        }
        let shape_len: usize = array.shape.iter().product();
        if array.data.len() != slot.len() || shape_len != slot.len() {
            return Err(Error::Checkpoint(format!(
                "array {name:?} has {} values (shape {:?}), expected {}",
                array.data.len(),
                array.shape,
                slot.len()
            )));
        }
        slot.copy_from_slice(&array.data);
    }
    let mut model = RecurrentModel::new(
        file.arch,
        file.window,
        params,
        file.dropout_rate,
        MinMaxScaler::from_parts(
            file.scaler.data_min,
            file.scaler.data_max,
            file.scaler.range_lo,
            file.scaler.range_hi,
        )?,
    )
    .map_err(|e| Error::Checkpoint(e.to_string()))?;
    model.seed = file.seed;
    model.provenance = file.provenance;
    Ok(model)
}

pub fn save_checkpoint(model: &RecurrentModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = checkpoint_to_string(model)?;
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<RecurrentModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    checkpoint_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rnn::init::init_parameters;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(arch: Arch) -> RecurrentModel {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = init_parameters(arch, 4, 1, &mut rng);
        let scaler = MinMaxScaler::fit(&[1.5, 9.25]).unwrap();
        let mut m = RecurrentModel::new(arch, 7, params, 0.3, scaler).unwrap();
        m.seed = 3;
        m.provenance = Provenance {
            dataset: "toy".into(),
            fold: 4,
        };
        m
    }

    #[test]
    fn roundtrip_is_exact_and_idempotent() {
        for arch in Arch::ALL {
            let m = model(arch);
            let text = checkpoint_to_string(&m).unwrap();
            let back = checkpoint_from_str(&text).unwrap();
            assert_eq!(back, m);
            assert_eq!(checkpoint_to_string(&back).unwrap(), text);
        }
    }

    #[test]
    fn truncated_file_is_structured_error() {
        let text = checkpoint_to_string(&model(Arch::Lstm)).unwrap();
        let cut = &text[..text.len() / 2];
        assert!(matches!(checkpoint_from_str(cut), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn version_mismatch() {
        let text = checkpoint_to_string(&model(Arch::Lstm)).unwrap();
        let bumped = text.replacen("\"version\": 1", "\"version\": 2", 1);
        let err = checkpoint_from_str(&bumped).unwrap_err();
        assert!(err.to_string().contains("version"), "{err}");
    }

    #[test]
    fn corrupted_array_length() {
        let m = model(Arch::Blstm);
        let text = checkpoint_to_string(&m).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["arrays"][3]["data"].as_array_mut().unwrap().pop();
        let err = checkpoint_from_str(&v.to_string()).unwrap_err();
        assert!(matches!(err, Error::Checkpoint(_)));
    }
}
