//! Command-line front end: run propagation, disk construction, Green-kernel
//! checks, spectra, or the full verification suite from a JSON config, and
//! write deterministic CSV/JSON reports plus a run manifest.

use impulse_spectra::config::RunConfig;
use impulse_spectra::report::json_document;
use impulse_spectra::runs;
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const USAGE: &str = "usage: impulse-spectra <ivp|weyl|green|spectrum|verify> \
--config <path> --out <dir> [--format csv|json|both]";

struct Args {
    subcommand: String,
    config: PathBuf,
    out: PathBuf,
    format: Format,
}

#[derive(Clone, Copy, PartialEq)]
enum Format {
    Csv,
    Json,
    Both,
}

fn parse_args(argv: &[String]) -> Result<Args, String> {
    if argv.is_empty() {
        return Err(USAGE.to_string());
    }
    let subcommand = argv[0].clone();
    if matches!(subcommand.as_str(), "-h" | "--help" | "help") {
        return Err(USAGE.to_string());
    }
    let mut config = None;
    let mut out = None;
    let mut format = Format::Both;
    let mut i = 1;
    while i < argv.len() {
        match argv[i].as_str() {
            "--config" => {
                i += 1;
                config = Some(PathBuf::from(argv.get(i).ok_or("--config needs a path")?));
            }
            "--out" => {
                i += 1;
                out = Some(PathBuf::from(argv.get(i).ok_or("--out needs a directory")?));
            }
            "--format" => {
                i += 1;
                format = match argv.get(i).map(String::as_str) {
                    Some("csv") => Format::Csv,
                    Some("json") => Format::Json,
                    Some("both") => Format::Both,
                    other => {
                        return Err(format!("--format must be csv, json or both, got {other:?}"))
                    }
                };
            }
            other => return Err(format!("unknown argument '{other}'\n{USAGE}")),
        }
        i += 1;
    }
    Ok(Args {
        subcommand,
        config: config.ok_or(format!("missing --config\n{USAGE}"))?,
        out: out.ok_or(format!("missing --out\n{USAGE}"))?,
        format,
    })
}

fn write_reports(
    args: &Args,
    config_text: &str,
    output: &runs::RunOutput,
    started: Instant,
) -> std::io::Result<Vec<String>> {
    std::fs::create_dir_all(&args.out)?;
    let mut written = Vec::new();
    let base = args.out.join(&args.subcommand);
    if args.format != Format::Json {
        let path = base.with_extension("csv");
        std::fs::write(&path, output.csv.as_bytes())?;
        written.push(file_name(&path));
    }
    if args.format != Format::Csv {
        let path = base.with_extension("json");
        let mut text = serde_json::to_string_pretty(&output.json).expect("report json");
        text.push('\n');
        std::fs::write(&path, text.as_bytes())?;
        written.push(file_name(&path));
    }

    let mut manifest = Map::new();
    manifest.insert(
        "tool_version".into(),
        Value::String(env!("CARGO_PKG_VERSION").into()),
    );
    manifest.insert("command".into(), Value::String(args.subcommand.clone()));
    manifest.insert(
        "config_sha256".into(),
        Value::String(RunConfig::fingerprint(config_text)),
    );
    manifest.insert(
        "outputs".into(),
        Value::Array(written.iter().map(|p| Value::String(p.clone())).collect()),
    );
    manifest.insert("passed".into(), Value::Bool(output.passed));
    manifest.insert(
        "wall_ms".into(),
        Value::from(started.elapsed().as_millis() as u64),
    );
    let mut text =
        serde_json::to_string_pretty(&json_document("manifest", manifest)).expect("manifest");
    text.push('\n');
    std::fs::write(args.out.join("manifest.json"), text.as_bytes())?;
    Ok(written)
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let args = match parse_args(&argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(1);
        }
    };
    let started = Instant::now();
    let config_text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read config {}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    let cfg = match RunConfig::parse(&config_text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    let output = match runs::run(&args.subcommand, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    for line in &output.lines {
        println!("{line}");
    }
    if let Err(e) = write_reports(&args, &config_text, &output, started) {
        eprintln!("cannot write reports: {e}");
        return ExitCode::from(1);
    }
    if output.passed {
        ExitCode::SUCCESS
    } else {
        eprintln!(
            "one or more checks failed; see the {} report",
            args.subcommand
        );
        ExitCode::from(2)
    }
}
