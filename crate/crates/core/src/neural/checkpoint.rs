//! Binary checkpoint files.
//!
//! Layout: the 8-byte magic, a little-endian `u32` length followed by a
//! `key=value` descriptor text, every network's parameters as little-endian
//! `f32` in descriptor order, and a trailing little-endian FNV-1a 64-bit
//! checksum of all preceding bytes.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Network, NetworkSpec};
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"NFSPGP01";

const NETWORK_KEY: &str = "network";

/// Named networks plus free-form metadata (counters, config echo).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Checkpoint {
    pub meta: BTreeMap<String, String>,
    pub networks: Vec<(String, Network<f32>)>,
}

impl Checkpoint {
    pub fn network(&self, name: &str) -> Option<&Network<f32>> {
        self.networks.iter().find(|(n, _)| n == name).map(|(_, net)| net)
    }

    pub fn require_network(&self, name: &str) -> Result<&Network<f32>> {
        self.network(name)
            .ok_or_else(|| Error::Format(format!("checkpoint has no network {name:?}")))
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.get(key).map(String::as_str)
    }

    pub fn meta_parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self
            .meta(key)
            .ok_or_else(|| Error::Format(format!("checkpoint has no {key:?}")))?;
        raw.parse()
            .map_err(|_| Error::Format(format!("checkpoint {key} = {raw:?} is malformed")))
    }

    fn descriptor(&self) -> Result<String> {
        let clean = |s: &str, what: &str| {
            if s.contains('\n') || (what == "key" && (s.contains('=') || s.is_empty())) {
                Err(Error::InvalidInput(format!("checkpoint {what} {s:?}")))
            } else {
                Ok(())
            }
        };
        let mut text = String::new();
        for (name, net) in &self.networks {
            clean(name, "key")?;
            if name.contains(';') {
                return Err(Error::InvalidInput(format!("network name {name:?}")));
            }
            text.push_str(&format!("{NETWORK_KEY}={name};{};{}\n", net.num_params(), net.spec()));
        }
        for (k, v) in &self.meta {
            clean(k, "key")?;
            clean(v, "value")?;
            if k == NETWORK_KEY {
                return Err(Error::InvalidInput("reserved metadata key".into()));
            }
            text.push_str(&format!("{k}={v}\n"));
        }
        Ok(text)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let text = self.descriptor()?;
        let params: usize = self.networks.iter().map(|(_, n)| n.num_params()).sum();
        let mut out = Vec::with_capacity(8 + 4 + text.len() + 4 * params + 8);
        out.extend_from_slice(CHECKPOINT_MAGIC);
        let len = u32::try_from(text.len()).map_err(|_| Error::InvalidInput("descriptor too long".into()))?;
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(text.as_bytes());
        for (_, net) in &self.networks {
            for p in net.params() {
                out.extend_from_slice(&p.to_le_bytes());
            }
        }
        let sum = fnv1a(&out);
        out.extend_from_slice(&sum.to_le_bytes());
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 || &bytes[..8] != CHECKPOINT_MAGIC {
            let found = String::from_utf8_lossy(&bytes[..bytes.len().min(8)]).into_owned();
            return Err(Error::Version {
                found,
                expected: String::from_utf8_lossy(CHECKPOINT_MAGIC).into_owned(),
            });
        }
        if bytes.len() < 8 + 4 + 8 {
            return Err(Error::Format("truncated checkpoint".into()));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 8);
        let stored = u64::from_le_bytes(tail.try_into().expect("8 bytes"));
        if fnv1a(body) != stored {
            return Err(Error::Format("checksum mismatch (truncated or corrupt file)".into()));
        }
        let len = u32::from_le_bytes(body[8..12].try_into().expect("4 bytes")) as usize;
        let text = body
            .get(12..12 + len)
            .ok_or_else(|| Error::Format("descriptor runs past the end of the file".into()))?;
        let text = std::str::from_utf8(text).map_err(|_| Error::Format("descriptor is not UTF-8".into()))?;
        let mut blob = &body[12 + len..];
        let mut ckpt = Checkpoint::default();
        for line in text.lines() {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("descriptor line {line:?}")))?;
            if key != NETWORK_KEY {
                ckpt.meta.insert(key.to_string(), value.to_string());
                continue;
            }
            let mut parts = value.splitn(3, ';');
            let (Some(name), Some(count), Some(spec)) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Format(format!("network entry {value:?}")));
            };
            let count: usize = count
                .parse()
                .map_err(|_| Error::Format(format!("parameter count {count:?}")))?;
            let spec: NetworkSpec = spec.parse()?;
            if blob.len() < 4 * count {
                return Err(Error::Format(format!("parameters of {name} are truncated")));
            }
            let (mine, rest) = blob.split_at(4 * count);
            blob = rest;
            let params = mine
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                .collect();
            let net = Network::from_params(spec, params).map_err(|e| Error::Format(format!("network {name}: {e}")))?;
            ckpt.networks.push((name.to_string(), net));
        }
        if !blob.is_empty() {
            return Err(Error::Format(format!("{} unexpected trailing bytes", blob.len())));
        }
        Ok(ckpt)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Writes through a temporary sibling and renames, so a failed write never
/// leaves a half-written checkpoint under `path`.
pub fn save_checkpoint(ckpt: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = ckpt.to_bytes()?;
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let mut c = Checkpoint::default();
        c.networks.push(("q".into(), Network::new(NetworkSpec::mlp(4, &[3], 2), 1).unwrap()));
        c.networks.push(("pi".into(), Network::new("in5x5x2 conv2k2s1 relu pool2 out3".parse().unwrap(), 2).unwrap()));
        c.meta.insert("steps".into(), "1234".into());
        c.meta.insert("game".into(), "kuhn".into());
        c
    }

    #[test]
    fn bytes_round_trip() {
        let c = sample();
        let bytes = c.to_bytes().unwrap();
        assert_eq!(&bytes[..8], b"NFSPGP01");
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.meta_parse::<u64>("steps").unwrap(), 1234);
    }

    #[test]
    fn truncation_and_magic() {
        let bytes = sample().to_bytes().unwrap();
        for cut in [0, 5, 12, bytes.len() / 2, bytes.len() - 1] {
            assert!(Checkpoint::from_bytes(&bytes[..cut]).is_err(), "cut {cut}");
        }
        let mut foreign = bytes.clone();
        foreign[..8].copy_from_slice(b"NFSPGP02");
        assert!(matches!(Checkpoint::from_bytes(&foreign), Err(Error::Version { .. })));
        let mut flipped = bytes;
        let mid = flipped.len() - 20;
        flipped[mid] ^= 1;
        assert!(matches!(Checkpoint::from_bytes(&flipped), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_bad_metadata() {
        let mut c = sample();
        c.meta.insert("a=b".into(), "x".into());
        assert!(c.to_bytes().is_err());
    }
}
