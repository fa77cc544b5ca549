//! CSV and JSON artifacts. Floats use the shortest representation that
//! round-trips, so identical runs give byte-identical files.

use std::fs;
use std::path::Path;

use gdnls_core::{Field, Grid, Trajectory};
use serde::Serialize;

use crate::error::{HarnessError, HarnessResult};

/// One output file held in memory until written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn text(&self) -> &str {
        std::str::from_utf8(&self.bytes).expect("artifacts are UTF-8")
    }
}

pub fn number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        serde_json::to_string(&x).expect("finite floats serialize")
    }
}

pub fn flag(b: bool) -> String {
    if b { "true".into() } else { "false".into() }
}

/// Rectangular CSV table with a header row.
#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "CSV rows must match the header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn into_artifact(self, name: &str) -> Artifact {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        Artifact {
            name: name.to_string(),
            bytes: w.into_inner().expect("in-memory flush"),
        }
    }
}

pub const CONSERVED_COLUMNS: [&str; 8] = ["t", "M", "E", "E_m", "P", "h1", "h2", "dtu_l2"];

pub fn conserved_csv(traj: &Trajectory) -> Artifact {
    let mut table = CsvTable::new(CONSERVED_COLUMNS);
    for c in &traj.conserved {
        table.push(
            [c.t, c.mass, c.energy, c.approx_energy, c.momentum, c.h1, c.h2, c.dtu_l2]
                .into_iter()
                .map(number)
                .collect(),
        );
    }
    table.into_artifact("conserved.csv")
}

#[derive(Debug, Serialize)]
struct GridMeta {
    a: f64,
    b: f64,
    n: usize,
}

#[derive(Debug, Serialize)]
struct Snapshots {
    grid: GridMeta,
    times: Vec<f64>,
    fields: Vec<Vec<[f64; 2]>>,
}

pub fn snapshots_json(grid: Grid, snaps: &[(f64, &Field)]) -> Artifact {
    let doc = Snapshots {
        grid: GridMeta {
            a: grid.a(),
            b: grid.b(),
            n: grid.n(),
        },
        times: snaps.iter().map(|s| s.0).collect(),
        fields: snaps
            .iter()
            .map(|(_, f)| f.values().iter().map(|z| [z.re, z.im]).collect())
            .collect(),
    };
    json_artifact("snapshots.json", &doc)
}

pub fn json_artifact(name: &str, value: &impl Serialize) -> Artifact {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable summary");
    bytes.push(b'\n');
    Artifact {
        name: name.to_string(),
        bytes,
    }
}

pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> HarnessResult<()> {
    let io = |path: &Path, source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    };
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        fs::write(&path, &a.bytes).map_err(|e| io(&path, e))?;
    }
    Ok(())
}
