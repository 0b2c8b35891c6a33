//! `key = value` config files, spliced into the argument list.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use crate::args::SUBCOMMANDS;
use crate::error::CliError;

/// Turns config lines into `--key value` pairs. `#` starts a comment;
/// `true`/`false` values toggle switches.
pub fn parse_config(text: &str, origin: &Path) -> Result<Vec<OsString>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!("{}:{}: expected `key = value`", origin.display(), i + 1)));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key.starts_with('-') {
            return Err(CliError::Config(format!("{}:{}: bad key `{key}`", origin.display(), i + 1)));
        }
        match value {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{key}").into());
                out.push(value.into());
            }
        }
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

/// Inserts the config file's flags right after the subcommand so that any
/// repetition on the command line overrides them.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let extra = parse_config(&text, path)?;
    let Some(at) = args.iter().position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref())) else {
        return Ok(args);
    };
    let mut out = args[..=at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[at + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strs(v: &[OsString]) -> Vec<String> {
        v.iter().map(|s| s.to_string_lossy().into_owned()).collect()
    }

    #[test]
    fn parses_pairs_comments_and_switches() {
        let text = "# run\nsteps = 10\ndump_levels = true\nverify = false\n\ndt=0.25 # fs\n";
        let got = parse_config(text, Path::new("c")).unwrap();
        assert_eq!(strs(&got), ["--steps", "10", "--dump-levels", "--dt", "0.25"]);
    }

    #[test]
    fn rejects_lines_without_equals() {
        assert!(matches!(parse_config("steps 10", Path::new("c")), Err(CliError::Config(_))));
    }

    #[test]
    fn file_flags_go_before_command_line_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "steps = 10\n").unwrap();
        let args: Vec<OsString> =
            ["pmsm", "--config", cfg.to_str().unwrap(), "simulate", "--steps", "3"].iter().map(Into::into).collect();
        let got = strs(&expand_args(args).unwrap());
        assert_eq!(&got[3..], ["simulate", "--steps", "10", "--steps", "3"]);
    }

    #[test]
    fn missing_config_file_is_a_config_error() {
        let args: Vec<OsString> = ["pmsm", "--config", "/nonexistent/x.cfg", "cost"].iter().map(Into::into).collect();
        assert!(matches!(expand_args(args), Err(CliError::Config(_))));
    }
}
