use std::io::Write;
use std::path::Path;

use alexot::monge::{AtomRecord, MapVerificationReport};
use serde::Serialize;

use super::CliError;

/// Writes `bytes` to `path` through a sibling temporary file and a rename,
/// or to standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| CliError::input(format!("stdout: {e}")))?;
        return Ok(());
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| CliError::input(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

pub fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("reports serialise");
    v.push(b'\n');
    v
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn push_row(w: &mut csv::Writer<Vec<u8>>, n: usize, a: &AtomRecord, dim: usize) -> csv::Result<()> {
    let mut row = vec![n.to_string(), a.index.to_string()];
    let coords = |p: &alexot::Point| (0..dim).map(|k| p.coords().get(k).map(|c| c.to_string()).unwrap_or_default()).collect::<Vec<_>>();
    row.extend(coords(&a.x));
    row.push(serde_json::to_value(a.status).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default());
    row.push(a.assigned.map(|j| j.to_string()).unwrap_or_default());
    row.push(opt(a.grad_norm));
    row.push(opt(a.shoot_distance));
    row.push(opt(a.target_distance));
    row.push(opt(a.formula_residual));
    row.push(opt(a.norm_residual));
    w.write_record(&row)
}

/// One row per source atom across `reports`: the sample size, atom index,
/// coordinates, status, assigned target, `|∇ψ|`, `d(x, F(x))`,
/// `d(x, y)` and both residuals.
pub fn atoms_csv(reports: &[MapVerificationReport]) -> Vec<u8> {
    let dim = reports.iter().flat_map(|r| r.atoms.iter()).map(|a| a.x.coords().len()).max().unwrap_or(2);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["n".to_string(), "index".to_string()];
    header.extend((0..dim).map(|k| format!("x{k}")));
    header.extend(
        ["status", "assigned", "grad_norm", "shoot_distance", "target_distance", "formula_residual", "norm_residual"].map(String::from),
    );
    w.write_record(&header).expect("in-memory write");
    for r in reports {
        for a in &r.atoms {
            push_row(&mut w, r.n_atoms, a, dim).expect("in-memory write");
        }
    }
    w.into_inner().expect("in-memory write")
}
