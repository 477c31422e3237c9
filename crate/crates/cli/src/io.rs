use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use srblab::{Interval, PwaMap, Rational, DEFAULT_PIECE_CAP};

/// Usage-level failure: malformed input, missing file, exhausted cap.
#[derive(Debug)]
pub struct UsageError(pub String);

impl<E: Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

pub type CmdResult<T> = Result<T, UsageError>;

/// What a command produced: its result object, an optional refusal (exit 1)
/// and an optional CSV series.
pub struct Outcome {
    pub result: Value,
    pub refusal: Option<String>,
    pub csv: Option<String>,
}

impl Outcome {
    pub fn ok(result: Value) -> Self {
        Outcome { result, refusal: None, csv: None }
    }

    pub fn refused_if(result: Value, refusal: Option<String>) -> Self {
        Outcome { result, refusal, csv: None }
    }
}

pub fn usage(field: &str, e: impl Display) -> UsageError {
    UsageError(format!("{field}: {e}"))
}

pub fn rational(field: &str, s: &str) -> CmdResult<Rational> {
    Rational::from_str(s).map_err(|e| usage(field, e))
}

/// `"lo,hi"` as a closed interval.
pub fn closed_interval(field: &str, s: &str) -> CmdResult<Interval> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| usage(field, format!("expected \"lo,hi\", got {s:?}")))?;
    let (lo, hi) = (rational(field, lo)?, rational(field, hi)?);
    Interval::try_new(lo, hi, true, true).map_err(|e| usage(field, e))
}

pub fn piece_cap() -> CmdResult<usize> {
    match std::env::var("LAB_PIECE_CAP") {
        Ok(v) => v.trim().parse().map_err(|_| usage("LAB_PIECE_CAP", format!("not a count: {v:?}"))),
        Err(_) => Ok(DEFAULT_PIECE_CAP),
    }
}

fn read_json(field: &str, path: &Path) -> CmdResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(field, format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| usage(field, format!("{}: {e}", path.display())))?;
    Ok(unwrap_report(v))
}

/// Reports wrap their payload in `result`; accept either form.
fn unwrap_report(v: Value) -> Value {
    match v {
        Value::Object(mut o) if o.contains_key("result") && o.contains_key("version") => o.remove("result").unwrap_or(Value::Null),
        v => v,
    }
}

pub fn load<T: DeserializeOwned>(field: &str, path: &Path) -> CmdResult<T> {
    serde_json::from_value(read_json(field, path)?).map_err(|e| usage(field, e))
}

pub fn load_value(field: &str, path: &Path) -> CmdResult<Value> {
    read_json(field, path)
}

/// A map given by name (`identity`, `tent`) or by a JSON file holding either
/// the map itself or an artifact with a `map` field, at the top or one level down.
pub fn map_source(field: &str, src: &str) -> CmdResult<PwaMap> {
    match src {
        "identity" | "id" => return Ok(PwaMap::identity()),
        "tent" => return Ok(PwaMap::tent()),
        _ => {}
    }
    let v = read_json(field, Path::new(src))?;
    let nested = v.as_object().and_then(|o| o.values().find_map(|inner| inner.get("map")));
    let m = v.get("map").or(nested).unwrap_or(&v);
    serde_json::from_value(m.clone()).map_err(|e| usage(field, e))
}

pub fn strings(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(Rational::to_string).collect()
}

/// Decimal rendering for CSV columns marked display-only.
pub fn display_decimal(x: &Rational) -> String {
    format!("{:.12}", x.to_f64())
}

pub fn report(command: &str, config: Value, outcome: &Outcome) -> Value {
    json!({
        "tool": "lab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "status": if outcome.refusal.is_some() { "refused" } else { "accepted" },
        "refusal": outcome.refusal,
        "result": outcome.result,
    })
}

/// Write through a sibling temporary file so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> CmdResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| usage("out", format!("{} is not a file path", path.display())))?;
    let tmp: PathBuf = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    std::fs::write(&tmp, contents).map_err(|e| usage("out", format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| usage("out", format!("{}: {e}", path.display())))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_flag_parses() {
        let iv = closed_interval("j", "1/8, 7/8").unwrap();
        assert_eq!(iv, Interval::closed(Rational::new(1, 8), Rational::new(7, 8)));
        assert!(closed_interval("j", "1/8").unwrap_err().0.starts_with("j:"));
        assert!(closed_interval("j", "3/4,1/4").is_err());
    }

    #[test]
    fn reports_unwrap_to_their_result() {
        let wrapped = json!({"version": "0.1.0", "result": {"x": 1}});
        assert_eq!(unwrap_report(wrapped), json!({"x": 1}));
        let raw = json!({"result": 3});
        assert_eq!(unwrap_report(raw.clone()), raw);
    }

    #[test]
    fn refusal_sets_status() {
        let o = Outcome::refused_if(Value::Null, Some("no".into()));
        let r = report("x", json!({}), &o);
        assert_eq!(r["status"], "refused");
        assert_eq!(r["refusal"], "no");
    }

    #[test]
    fn atomic_write_leaves_no_temporary() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        write_atomic(&p, "{}").unwrap();
        let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names, vec![std::ffi::OsString::from("r.json")]);
    }
}
