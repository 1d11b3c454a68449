//! `key=value` files spliced in as flags ahead of the command line.

use std::path::Path;

use anyhow::{bail, Context, Result};

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected key=value, got `{raw}`", i + 1);
        };
        let key = k.trim().trim_start_matches("--");
        if key.is_empty() || key == "config" {
            bail!("line {}: invalid key `{}`", i + 1, k.trim());
        }
        out.push((key.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn as_flags(pairs: &[(String, String)]) -> Vec<String> {
    let mut out = Vec::new();
    for (k, v) in pairs {
        match v.as_str() {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            _ => {
                out.push(format!("--{k}"));
                out.push(v.clone());
            }
        }
    }
    out
}

/// Global options that take a value, needed to find the subcommand token.
const VALUE_GLOBALS: [&str; 2] = ["--threads", "--config"];

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Inserts the config file's flags right after the subcommand, dropping keys that
/// the command line already sets.
pub fn expand_args(args: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .with_context(|| format!("cannot read config file {path}"))?;
    let given = |k: &str| {
        let flag = format!("--{k}");
        args.iter()
            .any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
    };
    let pairs: Vec<_> = parse_config(&text)?
        .into_iter()
        .filter(|(k, _)| !given(k))
        .collect();
    let flags = as_flags(&pairs);
    let mut i = 1;
    while i < args.len() {
        let a = &args[i];
        if VALUE_GLOBALS.contains(&a.as_str()) {
            i += 2;
        } else if a.starts_with('-') {
            i += 1;
        } else {
            break;
        }
    }
    if i >= args.len() {
        return Ok(args);
    }
    let mut out = args[..=i].to_vec();
    out.extend(flags);
    out.extend_from_slice(&args[i + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_booleans() {
        let pairs =
            parse_config("# defaults\ntrials = 30\nseed=4 # inline\njson=true\nquiet=false\n")
                .unwrap();
        assert_eq!(
            as_flags(&pairs),
            vec!["--trials", "30", "--seed", "4", "--json"]
        );
        assert!(parse_config("trials 30").is_err());
        assert!(parse_config("config=x").is_err());
    }
}
