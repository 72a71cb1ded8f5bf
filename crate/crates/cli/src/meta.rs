//! Run metadata written at the top of every output, and output sinks.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{Map, Value};

/// Ordered key/value record of the tool version and resolved configuration.
pub struct Meta(Map<String, Value>);

impl Meta {
    pub fn new(command: &str) -> Self {
        let mut map = Map::new();
        map.insert("tool".into(), format!("saddle {}", env!("CARGO_PKG_VERSION")).into());
        map.insert("command".into(), command.into());
        Meta(map)
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.0.insert(key.into(), value.into());
        self
    }

    /// `# key=value` lines, in insertion order.
    pub fn comment_lines(&self) -> String {
        self.0
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("# {k}={s}\n"),
                other => format!("# {k}={other}\n"),
            })
            .collect()
    }

    pub fn to_value(&self) -> Value {
        Value::Object(self.0.clone())
    }
}

/// Writes `text` to `path`, or to standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).context("cannot write to standard output")?;
            out.flush().context("cannot write to standard output")
        }
    }
}
