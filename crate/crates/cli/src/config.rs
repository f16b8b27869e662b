//! `key = value` run files. Each key names a long flag of the invoked
//! subcommand; values from the file are placed before the command-line
//! flags so the latter win.

use clap::parser::ValueSource;
use clap::{ArgMatches, Command};

#[derive(Debug)]
pub struct ConfigError(pub String);

/// Parses the file body into ordered pairs. Blank lines and `#` comments
/// are skipped; a repeated key keeps every occurrence.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected key = value", n + 1)))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(ConfigError(format!("line {}: empty key", n + 1)));
        }
        pairs.push((key, value.trim().to_string()));
    }
    Ok(pairs)
}

/// Names of the subcommands selected in `matches`, outermost first.
pub fn subcommand_path(matches: &ArgMatches) -> Vec<String> {
    let mut path = Vec::new();
    let mut m = matches;
    while let Some((name, sub)) = m.subcommand() {
        path.push(name.to_string());
        m = sub;
    }
    path
}

fn leaf<'a>(root: &'a Command, path: &[String]) -> &'a Command {
    let mut cmd = root;
    for name in path {
        cmd = cmd.find_subcommand(name).expect("path came from a parse");
    }
    cmd
}

/// Flag tokens for the pairs, checked against the leaf subcommand and the
/// root's global flags. Keys already given on the command line are dropped.
pub fn to_flags(
    root: &Command,
    matches: &ArgMatches,
    path: &[String],
    pairs: &[(String, String)],
) -> Result<Vec<String>, ConfigError> {
    let mut given = matches;
    for name in path {
        given = given
            .subcommand_matches(name)
            .expect("path came from these matches");
    }
    let cmd = leaf(root, path);
    let mut out = Vec::new();
    for (key, value) in pairs {
        if key == "command" {
            let want = path.join(" ");
            if value.split_whitespace().collect::<Vec<_>>().join(" ") != want {
                return Err(ConfigError(format!("config is for `{value}`, invoked `{want}`")));
            }
            continue;
        }
        if key == "config" {
            return Err(ConfigError("a config file cannot name another".into()));
        }
        let arg = cmd
            .get_arguments()
            .chain(root.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| ConfigError(format!("unknown key `{key}` for `{}`", path.join(" "))))?;
        let id = arg.get_id().as_str();
        if given.value_source(id) == Some(ValueSource::CommandLine) {
            continue;
        }
        if arg.get_action().takes_values() {
            out.push(format!("--{key}={value}"));
        } else {
            match value.as_str() {
                "true" | "yes" | "1" => out.push(format!("--{key}")),
                "false" | "no" | "0" => {}
                _ => return Err(ConfigError(format!("`{key}` takes true or false, got `{value}`"))),
            }
        }
    }
    Ok(out)
}

/// Inserts `flags` right after the last subcommand name in `argv`.
pub fn splice(argv: &[String], path: &[String], flags: Vec<String>) -> Vec<String> {
    let mut at = 1;
    let mut want = path.iter();
    let mut next = want.next();
    for (i, tok) in argv.iter().enumerate().skip(1) {
        if Some(tok) == next {
            at = i + 1;
            next = want.next();
            if next.is_none() {
                break;
            }
        }
    }
    let mut out = argv[..at].to_vec();
    out.extend(flags);
    out.extend_from_slice(&argv[at..]);
    out
}
