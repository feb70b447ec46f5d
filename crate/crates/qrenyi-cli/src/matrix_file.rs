//! JSON matrix files: a dim, an optional label, and row-major complex
//! entries as explicit [re, im] pairs. Numbers are written with 17
//! significant digits so a write/read cycle is lossless and byte-stable.

use qrenyi::divergence::State;
use qrenyi::matrix::{CMatrix, HermitianOperator, ToleranceConfig, C64};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
    #[serde(default)]
    #[cfg_attr(not(test), allow(dead_code))]
    pub label: Option<String>,
}

#[derive(Debug)]
pub enum LoadError {
    Io { path: String, message: String },
    Parse { path: String, message: String },
    Domain { message: String },
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LoadError::Io { path, message } => write!(f, "cannot read '{path}': {message}"),
            LoadError::Parse { path, message } => write!(f, "cannot parse '{path}': {message}"),
            LoadError::Domain { message } => write!(f, "{message}"),
        }
    }
}

/// Formats a double with 17 significant digits (lossless round trip);
/// infinities serialize as "inf"/"-inf".
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

impl MatrixFile {
    pub fn parse(path: &str, text: &str) -> Result<Self, LoadError> {
        let file: MatrixFile = serde_json::from_str(text).map_err(|e| LoadError::Parse {
            path: path.into(),
            message: e.to_string(),
        })?;
        if file.dim == 0 {
            return Err(LoadError::Parse {
                path: path.into(),
                message: "field 'dim' must be a positive integer".into(),
            });
        }
        if file.entries.len() != file.dim * file.dim {
            return Err(LoadError::Parse {
                path: path.into(),
                message: format!(
                    "field 'entries' has {} pairs, expected dim² = {}",
                    file.entries.len(),
                    file.dim * file.dim
                ),
            });
        }
        if file.entries.iter().flatten().any(|v| !v.is_finite()) {
            return Err(LoadError::Parse {
                path: path.into(),
                message: "field 'entries' contains a non-finite number".into(),
            });
        }
        Ok(file)
    }

    pub fn load(path: &str) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io {
            path: path.into(),
            message: e.to_string(),
        })?;
        Self::parse(path, &text)
    }

    pub fn to_operator(&self) -> HermitianOperator {
        let mat = CMatrix::from_fn(self.dim, self.dim, |i, j| {
            let [re, im] = self.entries[i * self.dim + j];
            C64::new(re, im)
        });
        HermitianOperator::new(mat).expect("square by construction")
    }

    pub fn to_state(&self, tol: &ToleranceConfig) -> Result<State, LoadError> {
        State::new(self.to_operator(), tol).map_err(|e| LoadError::Domain {
            message: format!("matrix is not a valid state: {e}"),
        })
    }

    #[cfg_attr(not(test), allow(dead_code))]
    pub fn from_state(state: &State, label: Option<&str>) -> Self {
        let dim = state.dim();
        let m = state.op().matrix();
        let entries = (0..dim * dim)
            .map(|k| {
                let e = m[(k / dim, k % dim)];
                [e.re, e.im]
            })
            .collect();
        Self {
            dim,
            entries,
            label: label.map(|s| s.to_string()),
        }
    }

    /// Deterministic writer with 17-significant-digit decimals.
    #[cfg_attr(not(test), allow(dead_code))]
    pub fn to_json_string(&self) -> String {
        let mut out = String::from("{\n");
        out.push_str(&format!("  \"dim\": {},\n", self.dim));
        if let Some(label) = &self.label {
            out.push_str(&format!(
                "  \"label\": {},\n",
                serde_json::to_string(label).expect("string serializes")
            ));
        }
        out.push_str("  \"entries\": [\n");
        for (k, [re, im]) in self.entries.iter().enumerate() {
            let sep = if k + 1 < self.entries.len() { "," } else { "" };
            out.push_str(&format!(
                "    [{}, {}]{sep}\n",
                format_f64(*re),
                format_f64(*im)
            ));
        }
        out.push_str("  ]\n}\n");
        out
    }
}

/// Loads a state file in one step.
pub fn load_state(path: &str, tol: &ToleranceConfig) -> Result<State, LoadError> {
    MatrixFile::load(path)?.to_state(tol)
}
