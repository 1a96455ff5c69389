//! Binary model container: the magic `MINIMT1`, a little-endian `u32`
//! header length, a JSON header, then every tensor as row-major
//! little-endian `f64` in header order.

use serde::{Deserialize, Serialize};

use super::attention::AttentionParams;
use super::lstm::LstmParams;
use super::model::{ModelDims, ModelKind, Params, Seq2SeqModel};
use super::tensor::Matrix;
use crate::corpus::Vocab;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 7] = b"MINIMT1";

#[derive(Serialize, Deserialize)]
struct TensorInfo {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    dims: ModelDims,
    src_vocab: String,
    tgt_vocab: String,
    tensors: Vec<TensorInfo>,
}

pub fn to_bytes(model: &Seq2SeqModel) -> Vec<u8> {
    let tensors = model.params.tensors();
    let header = Header {
        dims: model.dims,
        src_vocab: model.src_vocab.to_text(),
        tgt_vocab: model.tgt_vocab.to_text(),
        tensors: tensors.iter().map(|(n, m)| TensorInfo { name: n.to_string(), rows: m.rows(), cols: m.cols() }).collect(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(11 + json.len() + 8 * model.params.num_params());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for (_, m) in tensors {
        for v in m.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

pub fn from_bytes(bytes: &[u8]) -> Result<Seq2SeqModel> {
    if bytes.len() < 11 || &bytes[..7] != MAGIC {
        return Err(bad("missing MINIMT1 magic"));
    }
    let len = u32::from_le_bytes(bytes[7..11].try_into().expect("4 bytes")) as usize;
    let body = bytes.get(11..11 + len).ok_or_else(|| bad("truncated header"))?;
    let header: Header = serde_json::from_slice(body)?;
    let mut pos = 11 + len;
    let mut tensors = Vec::with_capacity(header.tensors.len());
    for t in &header.tensors {
        let n = t.rows * t.cols;
        let raw = bytes.get(pos..pos + 8 * n).ok_or_else(|| bad(format!("truncated tensor {}", t.name)))?;
        let data = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        tensors.push((t.name.as_str(), Matrix::from_vec(t.rows, t.cols, data)));
        pos += 8 * n;
    }
    if pos != bytes.len() {
        return Err(bad("trailing bytes after tensors"));
    }
    let src_vocab = Vocab::from_text(&header.src_vocab, "checkpoint:src_vocab")?;
    let tgt_vocab = Vocab::from_text(&header.tgt_vocab, "checkpoint:tgt_vocab")?;
    let params = assemble(header.dims, &src_vocab, &tgt_vocab, tensors)?;
    Ok(Seq2SeqModel { dims: header.dims, src_vocab, tgt_vocab, params })
}

fn assemble(dims: ModelDims, src: &Vocab, tgt: &Vocab, tensors: Vec<(&str, Matrix)>) -> Result<Params> {
    let mut map: std::collections::HashMap<&str, Matrix> = tensors.into_iter().collect();
    let mut take = |name: &str, rows: usize, cols: usize| -> Result<Matrix> {
        let m = map.remove(name).ok_or_else(|| bad(format!("missing tensor {name}")))?;
        if m.shape() != (rows, cols) {
            return Err(bad(format!("tensor {name} has shape {:?}, expected {:?}", m.shape(), (rows, cols))));
        }
        Ok(m)
    };
    let (h, word) = (dims.hidden, dims.kind == ModelKind::Word);
    let dx = if word { dims.embed } else { src.len() };
    let dy = if word { dims.embed } else { tgt.len() };
    let ctx = if dims.attention { h } else { 0 };
    let emb_src = if word { Some(take("emb_src", src.len(), dims.embed)?) } else { None };
    let emb_tgt = if word { Some(take("emb_tgt", tgt.len(), dims.embed)?) } else { None };
    let enc = LstmParams { w: take("enc.w", 4 * h, dx)?, u: take("enc.u", 4 * h, h)?, b: take("enc.b", 4 * h, 1)? };
    let dec = LstmParams { w: take("dec.w", 4 * h, dy + ctx)?, u: take("dec.u", 4 * h, h)?, b: take("dec.b", 4 * h, 1)? };
    let att = if dims.attention {
        let mut a = AttentionParams::zeros(dy, h, h);
        a.w = take("att.w", h, dy + 2 * h)?;
        a.b = take("att.b", h, 1)?;
        a.v = take("att.v", 1, h)?;
        Some(a)
    } else {
        None
    };
    let out_dim = h + ctx + if word { dy } else { 0 };
    let w_out = take("out.w", tgt.len(), out_dim)?;
    let b_out = take("out.b", tgt.len(), 1)?;
    if let Some(extra) = map.keys().next() {
        return Err(bad(format!("unexpected tensor {extra}")));
    }
    Ok(Params { emb_src, emb_tgt, enc, dec, att, w_out, b_out })
}
