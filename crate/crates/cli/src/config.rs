//! Flat `key = value` config files merged under command-line flags.

use std::path::Path;

use anyhow::{bail, Context, Result};

/// Reads `key = value` lines (`#` starts a comment) into `--key value` arguments.
/// A value of `true` becomes a bare `--key`; `false` drops the key.
pub fn config_args(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("{}:{}: expected key = value", path.display(), no + 1);
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.starts_with('-') || k == "config" {
            bail!("{}:{}: invalid key {k:?}", path.display(), no + 1);
        }
        let key = k.replace('_', "-");
        match v {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            _ => {
                out.push(format!("--{key}"));
                out.push(v.to_string());
            }
        }
    }
    Ok(out)
}

/// Splices config-file arguments in front of the user's flags so that flags win.
/// `argv[1]` is the subcommand; `--config PATH` may appear anywhere after it.
pub fn expand_argv(argv: Vec<String>) -> Result<Vec<String>> {
    let mut config = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            match it.next() {
                Some(p) => config = Some(p),
                None => bail!("--config needs a path"),
            }
        } else if let Some(p) = a.strip_prefix("--config=") {
            config = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else { return Ok(rest) };
    if rest.len() < 2 {
        bail!("--config must follow a subcommand");
    }
    let extra = config_args(Path::new(&path))?;
    let mut out: Vec<String> = rest[..2].to_vec();
    out.extend(extra);
    out.extend_from_slice(&rest[2..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_precede_flags() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.cfg");
        std::fs::write(&p, "# sweep\ndegree = 30\ntau_max=2.5\nverbose = false\n").unwrap();
        let argv = ["qetu", "groundstate", "--config", p.to_str().unwrap(), "--degree", "40"].map(String::from).to_vec();
        let out = expand_argv(argv).unwrap();
        assert_eq!(out, ["qetu", "groundstate", "--degree", "30", "--tau-max", "2.5", "--degree", "40"]);
    }

    #[test]
    fn malformed_line_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.cfg");
        std::fs::write(&p, "degree 30\n").unwrap();
        assert!(config_args(&p).is_err());
    }
}
