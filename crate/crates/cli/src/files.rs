//! Flat key-value file parsing and the artifact formats: solution, scene,
//! co-array matrix, target samples, and CSV tables.
//!
//! All numbers are written with 17 significant digits (`{:.16e}`), which
//! round-trips every f64 exactly; files are plain `key = value` lines with
//! `#` comments.

use std::collections::BTreeMap;
use std::path::Path;

use beamsynth::{
    AnalogFactorization, BeamformerSolution, Complex64, ComplexMatrix, DMatrix, Scatterer, Scene,
};

use crate::error::CliError;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_complex_pair(z: Complex64) -> String {
    format!("{},{}", fmt_f64(z.re), fmt_f64(z.im))
}

/// Magnitude in dB clamped to the plotting floor of -80 dB.
pub fn db_floor(magnitude: f64) -> f64 {
    if magnitude <= 0.0 {
        return -80.0;
    }
    (20.0 * magnitude.log10()).max(-80.0)
}

/// Parsed `key = value` file; repeated indexed keys use a `name.N` suffix.
pub struct KvFile {
    entries: BTreeMap<String, String>,
}

impl KvFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::usage(format!(
                    "{origin}:{}: expected `key = value`, got `{raw}`",
                    lineno + 1
                ))
            })?;
            let key = key.trim().to_string();
            if entries
                .insert(key.clone(), value.trim().to_string())
                .is_some()
            {
                return Err(CliError::usage(format!(
                    "{origin}:{}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key)
            .ok_or_else(|| CliError::usage(format!("missing required key `{key}`")))
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key).map(|s| parse_f64(s, key)).transpose()
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.get(key)
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| CliError::usage(format!("key `{key}`: invalid integer `{s}`")))
            })
            .transpose()
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        self.get(key)
            .map(|s| {
                s.parse::<u64>()
                    .map_err(|_| CliError::usage(format!("key `{key}`: invalid integer `{s}`")))
            })
            .transpose()
    }

    /// Values of `prefix.0`, `prefix.1`, ... in index order; indices must be
    /// contiguous from zero.
    pub fn indexed(&self, prefix: &str) -> Result<Vec<&str>, CliError> {
        let mut found: Vec<(usize, &str)> = Vec::new();
        let dot_prefix = format!("{prefix}.");
        for (key, value) in &self.entries {
            if let Some(rest) = key.strip_prefix(&dot_prefix) {
                let index = rest.parse::<usize>().map_err(|_| {
                    CliError::usage(format!("key `{key}`: expected `{prefix}.<index>`"))
                })?;
                found.push((index, value));
            }
        }
        found.sort_by_key(|(i, _)| *i);
        for (expected, (got, _)) in found.iter().enumerate() {
            if *got != expected {
                return Err(CliError::usage(format!(
                    "`{prefix}.*` indices must be contiguous from 0, missing {expected}"
                )));
            }
        }
        Ok(found.into_iter().map(|(_, v)| v).collect())
    }
}

pub fn parse_f64(s: &str, context: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::usage(format!("{context}: invalid number `{s}`")))
}

pub fn parse_f64_list(s: &str, context: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(|part| parse_f64(part, context)).collect()
}

// ── solution files ───────────────────────────────────────────────────

pub fn write_solution(
    solution: &BeamformerSolution,
    tx_positions: &[f64],
    rx_positions: &[f64],
) -> String {
    let f = &solution.factorization;
    let phi_t = f.f_t.phase_angles();
    let phi_r = f.f_r.phase_angles();
    let mut out = String::from("# beamsynth solution\n");
    out.push_str(&format!("nt = {}\n", f.f_t.rows()));
    out.push_str(&format!("nr = {}\n", f.f_r.rows()));
    out.push_str(&format!("q = {}\n", f.q()));
    out.push_str(&format!("converged = {}\n", solution.converged));
    out.push_str(&format!("residual = {}\n", fmt_f64(solution.residual)));
    out.push_str(&format!("iterations = {}\n", solution.iterations));
    out.push_str(&format!("seed = {}\n", solution.seed));
    let join = |xs: &[f64]| xs.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(",");
    out.push_str(&format!("tx_positions = {}\n", join(tx_positions)));
    out.push_str(&format!("rx_positions = {}\n", join(rx_positions)));
    let push_rows = |out: &mut String, name: &str, m: &DMatrix<f64>| {
        for row in 0..m.nrows() {
            let vals: Vec<String> = (0..m.ncols()).map(|c| fmt_f64(m[(row, c)])).collect();
            out.push_str(&format!("{name}.{row} = {}\n", vals.join(",")));
        }
    };
    push_rows(&mut out, "phi_t", &phi_t);
    push_rows(&mut out, "phi_r", &phi_r);
    for (i, g) in f.c_t.iter().enumerate() {
        out.push_str(&format!("c_t.{i} = {}\n", fmt_complex_pair(*g)));
    }
    for (i, g) in f.c_r.iter().enumerate() {
        out.push_str(&format!("c_r.{i} = {}\n", fmt_complex_pair(*g)));
    }
    out
}

pub struct SolutionFile {
    pub solution: BeamformerSolution,
    pub tx_positions: Vec<f64>,
    pub rx_positions: Vec<f64>,
}

pub fn read_solution(path: &Path) -> Result<SolutionFile, CliError> {
    let kv = KvFile::load(path)?;
    let nt = kv
        .get_usize("nt")?
        .ok_or_else(|| CliError::usage("solution file: missing `nt`"))?;
    let nr = kv
        .get_usize("nr")?
        .ok_or_else(|| CliError::usage("solution file: missing `nr`"))?;
    let q = kv
        .get_usize("q")?
        .ok_or_else(|| CliError::usage("solution file: missing `q`"))?;
    let residual = kv.get_f64("residual")?.unwrap_or(f64::NAN);
    let iterations = kv.get_usize("iterations")?.unwrap_or(0);
    let seed = kv.get_u64("seed")?.unwrap_or(0);
    let converged = matches!(kv.get("converged"), Some("true"));

    let read_phases = |name: &str, rows: usize| -> Result<DMatrix<f64>, CliError> {
        let lines = kv.indexed(name)?;
        if lines.len() != rows {
            return Err(CliError::usage(format!(
                "solution file: expected {rows} `{name}.*` rows, got {}",
                lines.len()
            )));
        }
        let mut m = DMatrix::<f64>::zeros(rows, q);
        for (row, line) in lines.iter().enumerate() {
            let vals = parse_f64_list(line, name)?;
            if vals.len() != q {
                return Err(CliError::usage(format!(
                    "solution file: `{name}.{row}` must have {q} values"
                )));
            }
            for (col, v) in vals.into_iter().enumerate() {
                m[(row, col)] = v;
            }
        }
        Ok(m)
    };
    let read_gains = |name: &str| -> Result<Vec<Complex64>, CliError> {
        let lines = kv.indexed(name)?;
        if lines.len() != q {
            return Err(CliError::usage(format!(
                "solution file: expected {q} `{name}.*` entries"
            )));
        }
        lines
            .iter()
            .map(|line| {
                let parts = parse_f64_list(line, name)?;
                if parts.len() != 2 {
                    return Err(CliError::usage(format!("{name}: expected `re,im`")));
                }
                Ok(Complex64::new(parts[0], parts[1]))
            })
            .collect()
    };

    let f_t = ComplexMatrix::from_phases(&read_phases("phi_t", nt)?);
    let f_r = ComplexMatrix::from_phases(&read_phases("phi_r", nr)?);
    let factorization = AnalogFactorization::new(f_t, f_r, read_gains("c_t")?, read_gains("c_r")?)?;

    let tx_positions = parse_f64_list(kv.require("tx_positions")?, "tx_positions")?;
    let rx_positions = parse_f64_list(kv.require("rx_positions")?, "rx_positions")?;

    Ok(SolutionFile {
        solution: BeamformerSolution {
            factorization,
            residual,
            iterations,
            converged,
            residual_history: vec![residual],
            seed,
        },
        tx_positions,
        rx_positions,
    })
}

// ── scene files ──────────────────────────────────────────────────────

pub fn read_scene(path: &Path) -> Result<Scene, CliError> {
    let kv = KvFile::load(path)?;
    let noise_std = kv.get_f64("noise_std")?.unwrap_or(0.0);
    let mut scatterers = Vec::new();
    for line in kv.indexed("scatterer")? {
        let parts = parse_f64_list(line, "scatterer")?;
        if parts.len() != 3 {
            return Err(CliError::usage(
                "scene file: scatterer entries are `angle_rad,re,im`",
            ));
        }
        scatterers.push(Scatterer {
            angle: parts[0],
            reflectivity: Complex64::new(parts[1], parts[2]),
        });
    }
    Ok(Scene::new(scatterers, noise_std)?)
}

// ── co-array matrix files ────────────────────────────────────────────

pub fn read_matrix(kv: &KvFile) -> Result<ComplexMatrix, CliError> {
    let rows = kv
        .get_usize("rows")?
        .ok_or_else(|| CliError::usage("matrix file: missing `rows`"))?;
    let cols = kv
        .get_usize("cols")?
        .ok_or_else(|| CliError::usage("matrix file: missing `cols`"))?;
    let lines = kv.indexed("w")?;
    if lines.len() != rows {
        return Err(CliError::usage(format!(
            "matrix file: expected {rows} `w.*` rows, got {}",
            lines.len()
        )));
    }
    let mut entries = vec![Complex64::new(0.0, 0.0); rows * cols];
    for (row, line) in lines.iter().enumerate() {
        let parts = parse_f64_list(line, "w")?;
        if parts.len() != 2 * cols {
            return Err(CliError::usage(format!(
                "matrix file: `w.{row}` must have {} numbers (re,im per column)",
                2 * cols
            )));
        }
        for col in 0..cols {
            entries[col * rows + row] = Complex64::new(parts[2 * col], parts[2 * col + 1]);
        }
    }
    Ok(ComplexMatrix::new(rows, cols, entries)?)
}

// ── target sample files ──────────────────────────────────────────────

/// CSV lines `angle_rad,re,im` with `#` comments; angles must be strictly
/// increasing within `[-pi/2, pi/2]`.
pub fn read_target_samples(path: &Path) -> Result<(Vec<f64>, Vec<Complex64>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut angles = Vec::new();
    let mut values = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let parts = parse_f64_list(line, "target sample")?;
        if parts.len() != 3 {
            return Err(CliError::usage(format!(
                "{}:{}: expected `angle_rad,re,im`",
                path.display(),
                lineno + 1
            )));
        }
        angles.push(parts[0]);
        values.push(Complex64::new(parts[1], parts[2]));
    }
    Ok((angles, values))
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}
