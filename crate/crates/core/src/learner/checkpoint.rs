//! Binary model snapshots. Exact round trip; not a stable cross-version format.

use super::{MlpClassifier, MlpConfig, Mode};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"MLPC";
const VERSION: u32 = 1;

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() < n {
            return Err(Error::Length("checkpoint truncated".into()));
        }
        let (head, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        Ok(head)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn fill(&mut self, out: &mut [f64]) -> Result<()> {
        let raw = self.take(out.len() * 8)?;
        for (v, c) in out.iter_mut().zip(raw.chunks_exact(8)) {
            *v = f64::from_le_bytes(c.try_into().unwrap());
        }
        Ok(())
    }
}

impl MlpClassifier {
    fn state_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        for (d, bn) in self.hidden.iter_mut() {
            out.push(d.w.as_slice_mut().unwrap());
            out.push(d.b.as_slice_mut().unwrap());
            out.push(bn.gamma.as_slice_mut().unwrap());
            out.push(bn.beta.as_slice_mut().unwrap());
            out.push(bn.running_mean.as_slice_mut().unwrap());
            out.push(bn.running_var.as_slice_mut().unwrap());
        }
        out.push(self.output.w.as_slice_mut().unwrap());
        out.push(self.output.b.as_slice_mut().unwrap());
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let config = serde_json::to_vec(&self.config).expect("config serializes");
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(config.len() as u64).to_le_bytes());
        out.extend_from_slice(&config);
        out.extend_from_slice(&(self.input_dim as u64).to_le_bytes());
        out.extend_from_slice(&(self.num_classes as u64).to_le_bytes());
        out.push(u8::from(self.mode == Mode::Eval));
        let mut copy = self.clone();
        for slice in copy.state_slices_mut() {
            for v in slice.iter() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("not a model checkpoint".into()));
        }
        let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported checkpoint version {version}"
            )));
        }
        let config_len = r.u64()? as usize;
        let config: MlpConfig = serde_json::from_slice(r.take(config_len)?)
            .map_err(|e| Error::Format(e.to_string()))?;
        let input_dim = r.u64()? as usize;
        let num_classes = r.u64()? as usize;
        let eval = r.take(1)?[0] == 1;
        let mut model = MlpClassifier::new(config, input_dim, num_classes)?;
        model.mode = if eval { Mode::Eval } else { Mode::Train };
        for slice in model.state_slices_mut() {
            r.fill(slice)?;
        }
        if !r.bytes.is_empty() {
            return Err(Error::Length("trailing bytes after checkpoint".into()));
        }
        Ok(model)
    }
}
