//! Command line: `serve`, `apply`, `metrics`, `export`.

use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;
use thiserror::Error;

use gamwb_core::data::EncodedDataset;
use gamwb_core::edit::{resolve, select, Target};
use gamwb_core::history::Session;
use gamwb_core::interop::{
    load_bundle, load_dataset, load_model, model_to_bytes, parse_edit_script, save_bundle,
};
use gamwb_core::metrics::{baseline_reports, evaluate, resolve_scope, Baseline, ScopeSpec};
use gamwb_core::model::GamModel;

use crate::api::{router, Workbench};

#[derive(Debug, Parser)]
#[command(name = "gamwb", version, about = "Inspect and edit piecewise-constant GAMs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Serve the JSON API for one model and dataset.
    Serve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        label: String,
        #[arg(long, env = "GAMWB_PORT", default_value_t = 8737)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
    },
    /// Apply an edit script and write a save bundle.
    Apply {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        label: String,
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print metrics for one scope: `global`, `slice:FEATURE=LEVEL`,
    /// `selected:FEATURE=START-END` or `selected:FEATURE=LEVEL,LEVEL`.
    Metrics {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        label: String,
        #[arg(long, default_value = "global")]
        scope: String,
    },
    /// Extract the head model from a save bundle.
    Export {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

fn invalid(context: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{}: {e}", context.display()))
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Loads (and re-centers) the model, then the dataset typed by it.
pub fn load_inputs(
    model: &Path,
    data: &Path,
    label: &str,
) -> Result<(GamModel, EncodedDataset), CliError> {
    let m = load_model(&read_file(model)?).map_err(|e| invalid(model, e))?;
    let dataset = load_dataset(&read_file(data)?, &m, label).map_err(|e| invalid(data, e))?;
    let encoded = EncodedDataset::encode(&m, &dataset).map_err(|e| invalid(data, e))?;
    if !encoded.unknown_levels().is_empty() {
        eprintln!(
            "warning: {} cells hold levels the model does not know: {}",
            encoded.unknown_levels().total(),
            json!(encoded.unknown_levels().0)
        );
    }
    Ok((m, encoded))
}

/// Writes next to `out` and renames into place, so a failure leaves nothing.
fn write_atomic(out: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", out.display()));
    let dir = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(out).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Serve {
            model,
            data,
            label,
            port,
            bind,
        } => serve(&model, &data, &label, SocketAddr::new(bind, port)),
        Command::Apply {
            model,
            data,
            label,
            script,
            out,
        } => apply(&model, &data, &label, &script, &out),
        Command::Metrics {
            model,
            data,
            label,
            scope,
        } => metrics(&model, &data, &label, &scope),
        Command::Export { bundle, out } => export(&bundle, &out),
    }
}

fn serve(model: &Path, data: &Path, label: &str, addr: SocketAddr) -> Result<(), CliError> {
    let (m, encoded) = load_inputs(model, data, label)?;
    let app = router(Workbench::new(Session::new(m), encoded));
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| {
            if e.kind() == std::io::ErrorKind::AddrInUse {
                CliError::Io(format!("{addr}: address in use"))
            } else {
                CliError::Io(format!("{addr}: {e}"))
            }
        })?;
        eprintln!("listening on http://{addr}");
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::Io(e.to_string()))
    })
}

fn apply(model: &Path, data: &Path, label: &str, script: &Path, out: &Path) -> Result<(), CliError> {
    let (m, encoded) = load_inputs(model, data, label)?;
    let entries = parse_edit_script(&read_file(script)?, &m).map_err(|e| invalid(script, e))?;
    let mut session = Session::new(m);
    for (k, entry) in entries.into_iter().enumerate() {
        let at = |e: &dyn std::fmt::Display| invalid(script, format!("edits[{k}]: {e}"));
        let sel = resolve(session.last(), &encoded, entry.descriptor.region.clone());
        let n = sel.sample_count();
        session.preview(entry.descriptor, n).map_err(|e| at(&e))?;
        let summary = session.working().expect("just previewed").descriptor.summary(n);
        let message = format!("batch: {}", entry.message.unwrap_or(summary));
        let id = session.commit(Some(message)).map_err(|e| at(&e))?.id().to_string();
        session.set_confirmed(&id, true).map_err(|e| at(&e))?;
    }
    let bytes = save_bundle(&session).map_err(|e| invalid(out, e))?;
    let rows: Vec<usize> = (0..encoded.len()).collect();
    let before = evaluate(session.original(), &encoded, &rows, Baseline::Original)
        .map_err(|e| invalid(data, e))?;
    let after = evaluate(session.last(), &encoded, &rows, Baseline::Current)
        .map_err(|e| invalid(data, e))?;
    write_atomic(out, &bytes)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "commits": session.len() - 1,
            "original": before,
            "final": after,
        }))
        .expect("reports serialize")
    );
    Ok(())
}

/// Parses the `--scope` mini-language into a scope and, for `selected`, the
/// selection target.
pub fn parse_scope(text: &str) -> Result<(ScopeSpec, Option<(String, Target)>), String> {
    if text == "global" {
        return Ok((ScopeSpec::Global, None));
    }
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| format!("unknown scope `{text}`"))?;
    let (feature, value) = rest
        .split_once('=')
        .ok_or_else(|| format!("scope `{text}` needs FEATURE=VALUE"))?;
    match kind {
        "slice" => Ok((
            ScopeSpec::Slice {
                feature: feature.to_string(),
                level: value.to_string(),
            },
            None,
        )),
        "selected" => {
            let bins = value.split_once('-').and_then(|(a, b)| {
                Some(Target::Bins(a.trim().parse().ok()?, b.trim().parse().ok()?))
            });
            let single = value.trim().parse().ok().map(|i| Target::Bins(i, i));
            let target = bins.or(single).unwrap_or_else(|| {
                Target::Levels(value.split(',').map(str::to_string).collect())
            });
            Ok((ScopeSpec::Selected, Some((feature.to_string(), target))))
        }
        _ => Err(format!("unknown scope kind `{kind}`; expected global, slice or selected")),
    }
}

fn metrics(model: &Path, data: &Path, label: &str, scope: &str) -> Result<(), CliError> {
    let (m, encoded) = load_inputs(model, data, label)?;
    let (scope, target) = parse_scope(scope).map_err(CliError::Validation)?;
    let selection = match target {
        Some((feature, target)) => Some(
            select(&m, &encoded, &feature, target)
                .map_err(|e| CliError::Validation(e.to_string()))?,
        ),
        None => None,
    };
    let rows = resolve_scope(&m, &encoded, &scope, selection.as_ref())
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let reports = baseline_reports(&m, &m, &m, &encoded, &rows)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({"scope": scope, "reports": reports}))
            .expect("reports serialize")
    );
    Ok(())
}

fn export(bundle: &Path, out: &Path) -> Result<(), CliError> {
    let loaded = load_bundle(&read_file(bundle)?).map_err(|e| invalid(bundle, e))?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    write_atomic(out, &model_to_bytes(loaded.session.last()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scope_language() {
        assert_eq!(parse_scope("global").unwrap().0, ScopeSpec::Global);
        let (s, t) = parse_scope("slice:asthma=yes").unwrap();
        assert_eq!(
            s,
            ScopeSpec::Slice {
                feature: "asthma".into(),
                level: "yes".into()
            }
        );
        assert!(t.is_none());
        assert_eq!(
            parse_scope("selected:age=3-7").unwrap().1,
            Some(("age".into(), Target::Bins(3, 7)))
        );
        assert_eq!(
            parse_scope("selected:age=4").unwrap().1,
            Some(("age".into(), Target::Bins(4, 4)))
        );
        assert_eq!(
            parse_scope("selected:asthma=yes,no").unwrap().1,
            Some(("asthma".into(), Target::Levels(vec!["yes".into(), "no".into()])))
        );
        assert!(parse_scope("everything").is_err());
        assert!(parse_scope("slice:asthma").is_err());
    }
}
