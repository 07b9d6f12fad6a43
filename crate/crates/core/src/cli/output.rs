//! Report emission: atomic file writes and CSV projections.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::certify::{MemberMass, SampleMargin};

/// Writes `bytes` to `dir/name` through a temporary file and a rename, so a
/// reader never sees a partial report.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    if let Err(e) = fs::rename(&tmp, &target) {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    Ok(target)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize to JSON");
    s.push('\n');
    s
}

pub const SWEEPING_CSV_HEADER: &str = "member_id,member_param,checkpoint,mass,std_error";
pub const MARGINS_CSV_HEADER: &str = "index,u,perron_u,ratio,margin";

pub fn sweeping_csv(masses: &[MemberMass]) -> String {
    let mut out = String::from(SWEEPING_CSV_HEADER);
    out.push('\n');
    for m in masses {
        let _ = writeln!(out, "{},{},{},{},{}", m.member_id, m.member_param, m.checkpoint, m.mass, m.std_error);
    }
    out
}

pub fn margins_csv(samples: &[SampleMargin]) -> String {
    let mut out = String::from(MARGINS_CSV_HEADER);
    out.push('\n');
    for s in samples {
        let _ = writeln!(out, "{},{},{},{},{}", s.index, s.u, s.perron_u, s.ratio, s.margin);
    }
    out
}
