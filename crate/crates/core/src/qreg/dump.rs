use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{RegisterLayout, SimConfig, SparseState, NORM_TOLERANCE};
use crate::bits::Bits;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentDump {
    pub name: String,
    pub width: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDump {
    pub bits: String,
    pub re: f64,
    pub im: f64,
}

/// Serialized form of a [`SparseState`]. Terms are sorted by basis string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDump {
    pub layout: Vec<SegmentDump>,
    pub terms: Vec<TermDump>,
}

impl SparseState {
    /// SHA-256 over the layout and the exact term list.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        for seg in self.layout.segments() {
            h.update((seg.name().len() as u64).to_be_bytes());
            h.update(seg.name().as_bytes());
            h.update((seg.width() as u64).to_be_bytes());
        }
        for (key, amp) in &self.terms {
            for w in key.iter() {
                h.update(w.to_be_bytes());
            }
            h.update(amp.re.to_bits().to_be_bytes());
            h.update(amp.im.to_bits().to_be_bytes());
        }
        h.finalize().into()
    }

    pub fn to_dump(&self) -> StateDump {
        StateDump {
            layout: self
                .layout
                .segments()
                .iter()
                .map(|s| SegmentDump {
                    name: s.name().to_string(),
                    width: s.width(),
                })
                .collect(),
            terms: self
                .terms()
                .map(|(b, a)| TermDump {
                    bits: b.to_string(),
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_dump()).expect("state dump serializes")
    }

    /// Rebuilds a state. Rejects duplicate basis strings, non-finite
    /// amplitudes and dumps whose norm is off by more than the tolerance.
    pub fn from_dump(dump: &StateDump) -> Result<Self> {
        let layout = RegisterLayout::new(dump.layout.iter().map(|s| (s.name.clone(), s.width)))?;
        if dump.terms.is_empty() {
            return Err(Error::Parse("state has no terms".into()));
        }
        let config = SimConfig::default();
        if dump.terms.len() > config.term_cap {
            return Err(Error::TermCapExceeded {
                terms: dump.terms.len(),
                cap: config.term_cap,
            });
        }
        let mut terms = std::collections::BTreeMap::new();
        for t in &dump.terms {
            if !t.re.is_finite() || !t.im.is_finite() {
                return Err(Error::Parse("non-finite amplitude".into()));
            }
            let bits = Bits::parse(&t.bits)?;
            let key = layout.pack(&bits)?;
            if terms.insert(key, Complex64::new(t.re, t.im)).is_some() {
                return Err(Error::Parse(format!("duplicate basis string {}", t.bits)));
            }
        }
        let mut state = SparseState::from_parts(layout, terms, config);
        if (state.norm_sqr() - 1.0).abs() > 1e-6 {
            return Err(Error::Parse(format!(
                "state norm {} is not 1",
                state.norm_sqr()
            )));
        }
        if (state.norm_sqr() - 1.0).abs() > NORM_TOLERANCE {
            state.renormalize()?;
        }
        Ok(state)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let dump: StateDump = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_dump(&dump)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qreg::states_equal;

    #[test]
    fn json_round_trip() {
        let x = Bits::parse("0110").unwrap();
        let theta = Bits::parse("1010").unwrap();
        let s = SparseState::prepare_bb84(&x, &theta).unwrap();
        let json = s.to_json();
        let back = SparseState::from_json(&json).unwrap();
        assert!(states_equal(&s, &back, 1e-12).unwrap());
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn rejects_malformed() {
        assert!(SparseState::from_json("{}").is_err());
        let bad_width = r#"{"layout":[{"name":"a","width":2}],"terms":[{"bits":"1","re":1.0,"im":0.0}]}"#;
        assert!(SparseState::from_json(bad_width).is_err());
        let dup = r#"{"layout":[{"name":"a","width":1}],"terms":[{"bits":"1","re":0.7071067811865476,"im":0.0},{"bits":"1","re":0.7071067811865476,"im":0.0}]}"#;
        assert!(SparseState::from_json(dup).is_err());
        let unnormalized = r#"{"layout":[{"name":"a","width":1}],"terms":[{"bits":"1","re":2.0,"im":0.0}]}"#;
        assert!(SparseState::from_json(unnormalized).is_err());
    }
}
