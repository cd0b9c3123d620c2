//! Model files.
//!
//! A model is stored as one JSON object:
//!
//! ```text
//! {"format":"eas-model","version":1,"d":3,"m":..,"k":..,"n":..,"seed":..,
//!  "theta":[row-major m*d reals],"counts":[m integers]}
//! ```
//!
//! Reals are written in shortest round-trip form, so a loaded model
//! evaluates bit-for-bit like the one that was stored.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{EasModel, ProjectionBank};
use crate::error::{Error, Result};

pub const FORMAT_NAME: &str = "eas-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    d: usize,
    m: usize,
    k: usize,
    n: u64,
    seed: u64,
    theta: Vec<f64>,
    counts: Vec<u64>,
}

pub fn write_model<W: Write>(model: &EasModel, writer: W) -> Result<()> {
    let bank = model.bank();
    let file = ModelFile {
        format: FORMAT_NAME.into(),
        version: FORMAT_VERSION,
        d: bank.dim(),
        m: bank.m(),
        k: model.k(),
        n: model.n(),
        seed: bank.seed(),
        theta: bank.rows().to_vec(),
        counts: model.counts().to_vec(),
    };
    serde_json::to_writer(writer, &file)?;
    Ok(())
}

pub fn read_model<R: Read>(reader: R) -> Result<EasModel> {
    let file: ModelFile = serde_json::from_reader(reader)?;
    if file.format != FORMAT_NAME {
        return Err(Error::ModelFormat(format!("unknown format tag {:?}", file.format)));
    }
    if file.version != FORMAT_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported version {} (expected {FORMAT_VERSION})",
            file.version
        )));
    }
    if file.theta.len() != file.m * file.d {
        return Err(Error::ModelFormat(format!(
            "theta has {} entries, expected m * d = {}",
            file.theta.len(),
            file.m * file.d
        )));
    }
    let bank = ProjectionBank::from_rows(file.d, file.theta, file.seed)?;
    EasModel::from_counts(Arc::new(bank), file.k, file.counts, file.n)
        .map_err(|e| Error::ModelFormat(e.to_string()))
}

pub fn save(model: &EasModel, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_model(model, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<EasModel> {
    read_model(BufReader::new(File::open(path)?))
}
