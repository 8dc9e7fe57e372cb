//! TOML run files.
//!
//! ```toml
//! command = "capacity secrecy"
//! threads = 4            # optional
//! out = "result.json"    # optional
//!
//! [params]
//! file = "fixtures/bsc05_20.wtc"   # positional argument
//! tol = 1e-10
//! ```
//!
//! Each `params` key becomes `--key value`; `true` adds the bare flag,
//! `false` omits it and arrays are comma-joined. Underscores in keys are
//! read as hyphens.

use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Deserialize;

use super::{Cli, Command};
use crate::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunFile {
    command: String,
    threads: Option<usize>,
    out: Option<PathBuf>,
    #[serde(default)]
    params: toml::Table,
}

pub(super) fn load(path: &Path) -> Result<(Command, Option<usize>, Option<PathBuf>)> {
    let text = crate::io::read(path)?;
    parse(&text)
}

pub(super) fn parse(text: &str) -> Result<(Command, Option<usize>, Option<PathBuf>)> {
    let file: RunFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let mut argv: Vec<String> = vec!["wiretap".into()];
    argv.extend(file.command.split_whitespace().map(String::from));
    for (key, value) in &file.params {
        if key == "file" {
            argv.push(scalar(key, value)?);
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            toml::Value::Boolean(true) => argv.push(flag),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) => {
                let joined = items.iter().map(|v| scalar(key, v)).collect::<Result<Vec<_>>>()?;
                argv.push(flag);
                argv.push(joined.join(","));
            }
            v => {
                argv.push(flag);
                argv.push(scalar(key, v)?);
            }
        }
    }
    let cli = Cli::try_parse_from(&argv).map_err(|e| Error::Config(e.to_string()))?;
    if matches!(cli.command, Command::Run(_)) {
        return Err(Error::Config("`run` cannot be nested".into()));
    }
    Ok((cli.command, file.threads, file.out))
}

fn scalar(key: &str, v: &toml::Value) -> Result<String> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        toml::Value::Boolean(b) => Ok(b.to_string()),
        _ => Err(Error::Config(format!("unsupported value for `{key}`"))),
    }
}
