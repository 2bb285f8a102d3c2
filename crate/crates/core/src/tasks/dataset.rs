//! JSON-lines datasets: `{"task": …, "bits": …, "mask": …}` with the two
//! boolean vectors bit-packed (most significant bit first) and base64
//! encoded.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{Example, Task, TaskError};

#[derive(Serialize, Deserialize)]
struct Line {
    task: Task,
    bits: String,
    mask: String,
}

fn pack(bits: &[bool]) -> String {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            bytes[i / 8] |= 0x80 >> (i % 8);
        }
    }
    STANDARD.encode(bytes)
}

fn unpack(text: &str, len: usize) -> Result<Vec<bool>, String> {
    let bytes = STANDARD.decode(text).map_err(|e| e.to_string())?;
    if bytes.len() != len.div_ceil(8) {
        return Err(format!("{} bytes for {len} bits", bytes.len()));
    }
    Ok((0..len).map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0).collect())
}

pub fn write_dataset(path: &Path, data: &[Example]) -> Result<(), TaskError> {
    let mut w = BufWriter::new(File::create(path)?);
    for ex in data {
        let line = Line {
            task: ex.task,
            bits: pack(&ex.bits),
            mask: pack(&ex.mask),
        };
        serde_json::to_writer(&mut w, &line).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads and validates every example.
pub fn read_dataset(path: &Path) -> Result<Vec<Example>, TaskError> {
    let r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| TaskError::Parse { line: idx + 1, msg };
        let parsed: Line = serde_json::from_str(&line).map_err(|e| err(e.to_string()))?;
        let n = parsed.task.n();
        let ex = Example {
            task: parsed.task,
            bits: unpack(&parsed.bits, n).map_err(err)?,
            mask: unpack(&parsed.mask, n).map_err(err)?,
        };
        ex.validate().map_err(|e| err(e.to_string()))?;
        out.push(ex);
    }
    Ok(out)
}

/// Summary printed after generation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DatasetStats {
    pub count: usize,
    pub masked_min: usize,
    pub masked_max: usize,
    pub masked_mean: f64,
}

impl DatasetStats {
    pub fn of(data: &[Example]) -> Self {
        let counts: Vec<usize> = data.iter().map(Example::masked_count).collect();
        DatasetStats {
            count: data.len(),
            masked_min: counts.iter().copied().min().unwrap_or(0),
            masked_max: counts.iter().copied().max().unwrap_or(0),
            masked_mean: counts.iter().sum::<usize>() as f64 / counts.len().max(1) as f64,
        }
    }
}
