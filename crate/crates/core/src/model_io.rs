//! Single-file model persistence.
//!
//! A short text header followed by little-endian f64 payloads:
//!
//! ```text
//! mirbm-model
//! version 1
//! kind gaussian
//! weights 20 16
//! visible_bias 20
//! hidden_bias 16
//! data
//! <W row-major><a><b>
//! ```

use std::io::{BufRead, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::rbm::{RbmParams, VisibleKind};

const MAGIC: &str = "mirbm-model";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_model<W: Write>(params: &RbmParams, mut out: W) -> Result<()> {
    params.validate()?;
    let (d, h) = (params.n_visible(), params.n_hidden());
    let header = format!(
        "{MAGIC}\nversion {FORMAT_VERSION}\nkind {}\nweights {d} {h}\nvisible_bias {d}\nhidden_bias {h}\ndata\n",
        params.visible_kind.as_str()
    );
    let mut buf = header.into_bytes();
    buf.reserve(8 * (d * h + d + h));
    for x in params
        .weights
        .iter()
        .chain(params.visible_bias.iter())
        .chain(params.hidden_bias.iter())
    {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    out.write_all(&buf)
        .map_err(|e| Error::ModelFormat(format!("write failed: {e}")))
}

pub fn read_model<R: BufRead>(mut input: R) -> Result<RbmParams> {
    let mut next_line = |what: &str| -> Result<String> {
        let mut line = String::new();
        let n = input
            .read_line(&mut line)
            .map_err(|e| Error::ModelFormat(format!("reading {what}: {e}")))?;
        if n == 0 {
            return Err(Error::ModelFormat(format!("truncated header: missing {what}")));
        }
        Ok(line.trim_end_matches(['\n', '\r']).to_string())
    };

    if next_line("magic")? != MAGIC {
        return Err(Error::ModelFormat("not a mirbm model file".into()));
    }
    let version: u32 = field(&next_line("version")?, "version", 1)?[0];
    if version != FORMAT_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported version {version} (expected {FORMAT_VERSION})"
        )));
    }
    let kind_line = next_line("kind")?;
    let kind = kind_line
        .strip_prefix("kind ")
        .and_then(VisibleKind::parse)
        .ok_or_else(|| Error::ModelFormat(format!("bad kind line {kind_line:?}")))?;
    let wd: Vec<usize> = field(&next_line("weights")?, "weights", 2)?;
    let a_len: usize = field(&next_line("visible_bias")?, "visible_bias", 1)?[0];
    let b_len: usize = field(&next_line("hidden_bias")?, "hidden_bias", 1)?[0];
    if next_line("data marker")? != "data" {
        return Err(Error::ModelFormat("missing data marker".into()));
    }
    let (d, h) = (wd[0], wd[1]);
    if a_len != d {
        return Err(Error::DimensionMismatch {
            context: "model visible bias vs weight rows",
            expected: d,
            actual: a_len,
        });
    }
    if b_len != h {
        return Err(Error::DimensionMismatch {
            context: "model hidden bias vs weight columns",
            expected: h,
            actual: b_len,
        });
    }
    let total = d
        .checked_mul(h)
        .and_then(|x| x.checked_add(d + h))
        .ok_or_else(|| Error::ModelFormat("dimensions overflow".into()))?;

    let mut bytes = Vec::new();
    input
        .read_to_end(&mut bytes)
        .map_err(|e| Error::ModelFormat(format!("reading payload: {e}")))?;
    if bytes.len() != 8 * total {
        return Err(Error::ModelFormat(format!(
            "payload has {} bytes, expected {}",
            bytes.len(),
            8 * total
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let weights = Array2::from_shape_vec((d, h), values[..d * h].to_vec())
        .map_err(|e| Error::ModelFormat(e.to_string()))?;
    let a = Array1::from(values[d * h..d * h + d].to_vec());
    let b = Array1::from(values[d * h + d..].to_vec());
    RbmParams::new(weights, a, b, kind)
}

fn field<T: std::str::FromStr>(line: &str, key: &str, count: usize) -> Result<Vec<T>> {
    let rest = line
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| Error::ModelFormat(format!("expected `{key}` line, got {line:?}")))?;
    let parsed: Vec<T> = rest
        .split_whitespace()
        .map(|t| t.parse::<T>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::ModelFormat(format!("bad numbers in {line:?}")))?;
    if parsed.len() != count {
        return Err(Error::ModelFormat(format!(
            "`{key}` expects {count} value(s), got {line:?}"
        )));
    }
    Ok(parsed)
}

pub fn save_model(params: &RbmParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_model(params, std::io::BufWriter::new(file))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<RbmParams> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(std::io::BufReader::new(file))
}
