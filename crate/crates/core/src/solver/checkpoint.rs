//! `.ssn` container: one JSON header line, then the payload as
//! little-endian `f64`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{GroupSpec, Model, Params, PlainParams, SolverError, SymParams};

const MAGIC: &str = "ssn";
const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Plain,
    Sym,
    Matrix,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    kind: Kind,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    /// Rows of `S`, or rows of a plain matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group: Option<GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    task: Option<String>,
    #[serde(default)]
    aux: usize,
}

fn write_payload<W: Write>(w: &mut W, values: impl Iterator<Item = f64>) -> std::io::Result<()> {
    for x in values {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn read_payload<R: Read>(r: &mut R, len: usize) -> Result<Vec<f64>, SolverError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != len * 8 {
        return Err(SolverError::Format(format!(
            "payload has {} bytes, expected {}",
            bytes.len(),
            len * 8
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn read_header<R: BufRead>(r: &mut R) -> Result<Header, SolverError> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: Header =
        serde_json::from_str(line.trim_end()).map_err(|e| SolverError::Format(e.to_string()))?;
    if header.format != MAGIC || header.version != VERSION {
        return Err(SolverError::Format(format!(
            "unsupported container {} v{}",
            header.format, header.version
        )));
    }
    Ok(header)
}

fn write_header<W: Write>(w: &mut W, h: &Header) -> Result<(), SolverError> {
    serde_json::to_writer(&mut *w, h).map_err(|e| SolverError::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_model<W: Write>(w: &mut W, model: &Model) -> Result<(), SolverError> {
    let (kind, m, group) = match &model.params {
        Params::Plain(p) => (Kind::Plain, Some(p.s.nrows()), None),
        Params::Sym(p) => (Kind::Sym, None, Some(p.group.clone())),
    };
    write_header(
        w,
        &Header {
            format: MAGIC.into(),
            version: VERSION,
            kind,
            n: model.params.n(),
            k: Some(model.k),
            m,
            group,
            task: model.task.clone(),
            aux: model.aux,
        },
    )?;
    match &model.params {
        // row-major
        Params::Plain(p) => write_payload(w, p.s.transpose().iter().copied())?,
        Params::Sym(p) => write_payload(w, p.theta.iter().copied())?,
    }
    Ok(())
}

pub fn read_model<R: BufRead>(r: &mut R) -> Result<Model, SolverError> {
    let h = read_header(r)?;
    let k = h.k.ok_or_else(|| SolverError::Format("missing k".into()))?;
    let params = match h.kind {
        Kind::Plain => {
            let m = h.m.ok_or_else(|| SolverError::Format("missing m".into()))?;
            let data = read_payload(r, m * h.n)?;
            Params::Plain(PlainParams {
                s: DMatrix::from_row_slice(m, h.n, &data),
            })
        }
        Kind::Sym => {
            let group = h.group.ok_or_else(|| SolverError::Format("missing group".into()))?;
            let basis = group.basis()?;
            if basis.degree() != h.n {
                return Err(SolverError::Format(format!(
                    "group has degree {}, header says {}",
                    basis.degree(),
                    h.n
                )));
            }
            let theta = read_payload(r, basis.dim())?;
            Params::Sym(SymParams::with_basis(theta, Arc::new(basis), group)?)
        }
        Kind::Matrix => return Err(SolverError::Format("file holds a matrix, not a model".into())),
    };
    Ok(Model {
        params,
        k,
        task: h.task,
        aux: h.aux,
    })
}

pub fn save_model(path: &Path, model: &Model) -> Result<(), SolverError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_model(&mut w, model)?;
    w.flush()?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<Model, SolverError> {
    read_model(&mut BufReader::new(File::open(path)?))
}

/// Saves a square or rectangular matrix in the same container.
pub fn save_matrix(path: &Path, m: &DMatrix<f64>) -> Result<(), SolverError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(
        &mut w,
        &Header {
            format: MAGIC.into(),
            version: VERSION,
            kind: Kind::Matrix,
            n: m.ncols(),
            k: None,
            m: Some(m.nrows()),
            group: None,
            task: None,
            aux: 0,
        },
    )?;
    write_payload(&mut w, m.transpose().iter().copied())?;
    w.flush()?;
    Ok(())
}

/// Loads a matrix file, or the coupling matrix `C` of a model checkpoint.
pub fn load_matrix(path: &Path) -> Result<DMatrix<f64>, SolverError> {
    let mut r = BufReader::new(File::open(path)?);
    let h = read_header(&mut r)?;
    if h.kind == Kind::Matrix {
        let rows = h.m.unwrap_or(h.n);
        let data = read_payload(&mut r, rows * h.n)?;
        return Ok(DMatrix::from_row_slice(rows, h.n, &data));
    }
    drop(r);
    Ok(load_model(path)?.params.assemble_c())
}
