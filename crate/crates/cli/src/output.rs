//! Output files with the resolved configuration and a content hash embedded.
//!
//! JSON documents carry `config` and `content_sha256` keys; the hash covers the
//! compact serialization of the document without the hash key. Text tables start
//! with `#` comment lines holding the config and the hash of config plus body.

use crate::config::RunConfig;
use crate::CliError;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

pub const HASH_KEY: &str = "content_sha256";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn config_value(config: &RunConfig) -> Value {
    serde_json::to_value(config).expect("config serializes")
}

/// Add `config` and the content hash to a JSON object and render it.
pub fn seal_json(mut doc: Value, config: &RunConfig) -> String {
    let obj = doc.as_object_mut().expect("documents are JSON objects");
    obj.insert("config".into(), config_value(config));
    obj.remove(HASH_KEY);
    let hash = sha256_hex(&serde_json::to_vec(&doc).expect("json"));
    doc.as_object_mut().unwrap().insert(HASH_KEY.into(), Value::String(hash));
    let mut s = serde_json::to_string_pretty(&doc).expect("json");
    s.push('\n');
    s
}

/// Recompute the hash of a sealed JSON document.
pub fn verify_json(text: &str) -> bool {
    let Ok(mut doc) = serde_json::from_str::<Value>(text) else {
        return false;
    };
    let Some(obj) = doc.as_object_mut() else {
        return false;
    };
    let Some(Value::String(stored)) = obj.remove(HASH_KEY) else {
        return false;
    };
    sha256_hex(&serde_json::to_vec(&doc).unwrap()) == stored
}

/// Prefix a text table with `# kind`, `# config <json>` and `# content_sha256 <hex>`.
pub fn seal_text(kind: &str, body: &str, config: &RunConfig) -> String {
    let cfg = serde_json::to_string(&config_value(config)).expect("json");
    let mut hasher = Sha256::new();
    hasher.update(cfg.as_bytes());
    hasher.update(b"\n");
    hasher.update(body.as_bytes());
    let hash = hex::encode(hasher.finalize());
    format!("# surfspin {kind}\n# config {cfg}\n# {HASH_KEY} {hash}\n{body}")
}

pub fn verify_text(text: &str) -> bool {
    let mut lines = text.splitn(4, '\n');
    let (Some(_kind), Some(cfg), Some(hash), Some(body)) = (lines.next(), lines.next(), lines.next(), lines.next()) else {
        return false;
    };
    let (Some(cfg), Some(hash)) = (cfg.strip_prefix("# config "), hash.strip_prefix(&format!("# {HASH_KEY} "))) else {
        return false;
    };
    let mut hasher = Sha256::new();
    hasher.update(cfg.as_bytes());
    hasher.update(b"\n");
    hasher.update(body.as_bytes());
    hex::encode(hasher.finalize()) == hash
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    log::info!("wrote {}", path.display());
    Ok(path)
}
