//! Parsers for the plain-text input files: i.d. models, matrices, series
//! of coefficients, and the two optimization problem layouts.
//!
//! All formats share one lexical convention: blank lines and lines starting
//! with `#` are skipped, everything else is content. A matrix block is a
//! dimension line (`d` for square, `M N` for rectangular) followed by that
//! many rows of whitespace-separated reals.

use std::path::Path;

use idseries::levy_core::IdModel;
use idseries::matrix_core::{Mat, SymMatrix};
use idseries::opt_apps::{ChanceProblem, QuadProblem};

use crate::AppError;

struct Lines<'a> {
    name: &'a str,
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, name: &'a str) -> Self {
        Lines { name, iter: text.lines().enumerate() }
    }

    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (idx, raw) in self.iter.by_ref() {
            let line = raw.trim();
            if !line.is_empty() && !line.starts_with('#') {
                return Some((idx + 1, line));
            }
        }
        None
    }

    fn require(&mut self, what: &str) -> Result<(usize, &'a str), AppError> {
        self.next_content()
            .ok_or_else(|| AppError::parse(format!("{}: expected {what}, found end of file", self.name)))
    }

    fn at(&self, line: usize) -> String {
        format!("{}:{line}", self.name)
    }
}

fn read_file(path: &Path) -> Result<String, AppError> {
    std::fs::read_to_string(path)
        .map_err(|e| AppError::missing_input(format!("cannot read '{}': {e}", path.display())))
}

/// Loads an i.d. model file: optional `sigma2 = <real>` (default 0) plus
/// repeated `atom = <u>,<w>` lines.
pub fn load_model(path: &Path) -> Result<IdModel, AppError> {
    parse_model(&read_file(path)?, &path.display().to_string())
}

pub fn parse_model(text: &str, name: &str) -> Result<IdModel, AppError> {
    let mut lines = Lines::new(text, name);
    let mut sigma2 = 0.0;
    let mut atoms = Vec::new();
    while let Some((idx, line)) = lines.next_content() {
        let at = lines.at(idx);
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| AppError::parse(format!("expected 'key = value' at {at}, got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "sigma2" => {
                sigma2 = value
                    .parse()
                    .map_err(|_| AppError::parse(format!("cannot parse sigma2 value '{value}' at {at}")))?;
            }
            "atom" => {
                let (u, w) = value
                    .split_once(',')
                    .ok_or_else(|| AppError::parse(format!("atom needs '<u>,<w>' at {at}, got '{value}'")))?;
                let u: f64 = u
                    .trim()
                    .parse()
                    .map_err(|_| AppError::parse(format!("cannot parse atom size '{}' at {at}", u.trim())))?;
                let w: f64 = w
                    .trim()
                    .parse()
                    .map_err(|_| AppError::parse(format!("cannot parse atom mass '{}' at {at}", w.trim())))?;
                atoms.push((u, w));
            }
            other => {
                return Err(AppError::parse(format!("unknown key '{other}' at {at}")));
            }
        }
    }
    Ok(IdModel::from_parts(sigma2, atoms)?)
}

fn read_matrix(lines: &mut Lines) -> Result<Mat, AppError> {
    let (idx, dims) = lines.require("a matrix dimension line")?;
    let at = lines.at(idx);
    let parts: Vec<&str> = dims.split_whitespace().collect();
    let (rows, cols) = match parts.as_slice() {
        [d] => {
            let d: usize = d
                .parse()
                .map_err(|_| AppError::parse(format!("cannot parse dimension '{d}' at {at}")))?;
            (d, d)
        }
        [r, c] => {
            let r: usize = r
                .parse()
                .map_err(|_| AppError::parse(format!("cannot parse row count '{r}' at {at}")))?;
            let c: usize = c
                .parse()
                .map_err(|_| AppError::parse(format!("cannot parse column count '{c}' at {at}")))?;
            (r, c)
        }
        _ => {
            return Err(AppError::parse(format!("expected 'd' or 'M N' at {at}, got '{dims}'")));
        }
    };
    if rows == 0 || cols == 0 {
        return Err(AppError::parse(format!("matrix dimensions must be positive at {at}")));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let (ridx, row) = lines.require(&format!("a matrix row of {cols} reals"))?;
        let rat = lines.at(ridx);
        let mut count = 0;
        for tok in row.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| AppError::parse(format!("cannot parse entry '{tok}' at {rat}")))?;
            data.push(v);
            count += 1;
        }
        if count != cols {
            return Err(AppError::parse(format!("expected {cols} entries at {rat}, got {count}")));
        }
    }
    Ok(Mat::from_rows(rows, cols, data)?)
}

/// Loads a coefficient series file: a count line `K`, then K matrix blocks.
/// Blocks may be square or rectangular; callers impose symmetry where the
/// pipeline needs it.
pub fn load_series(path: &Path) -> Result<Vec<Mat>, AppError> {
    parse_series(&read_file(path)?, &path.display().to_string())
}

pub fn parse_series(text: &str, name: &str) -> Result<Vec<Mat>, AppError> {
    let mut lines = Lines::new(text, name);
    let (idx, head) = lines.require("a coefficient count")?;
    let at = lines.at(idx);
    let count: usize = head
        .parse()
        .map_err(|_| AppError::parse(format!("cannot parse coefficient count '{head}' at {at}")))?;
    if count == 0 {
        return Err(AppError::parse(format!("the series needs at least one coefficient at {at}")));
    }
    let mut mats = Vec::with_capacity(count);
    for _ in 0..count {
        mats.push(read_matrix(&mut lines)?);
    }
    if let Some((tidx, _)) = lines.next_content() {
        return Err(AppError::parse(format!("unexpected content after {count} coefficient blocks at {}", lines.at(tidx))));
    }
    Ok(mats)
}

/// Converts raw series blocks into the symmetric normalized form the tail
/// and simulation pipelines require.
pub fn symmetric_series(mats: Vec<Mat>) -> Result<idseries::matrix_core::MatrixSeries, AppError> {
    let syms = mats
        .into_iter()
        .map(SymMatrix::new)
        .collect::<idseries::Result<Vec<_>>>()?;
    Ok(idseries::matrix_core::MatrixSeries::new(syms)?)
}

/// Loads a quadratic problem file: a `dims = M,N` line, one `objective`
/// block, repeated `B` blocks, and at most one `C` block.
pub fn load_quad_problem(path: &Path) -> Result<QuadProblem, AppError> {
    parse_quad_problem(&read_file(path)?, &path.display().to_string())
}

pub fn parse_quad_problem(text: &str, name: &str) -> Result<QuadProblem, AppError> {
    let mut lines = Lines::new(text, name);
    let (idx, head) = lines.require("'dims = M,N'")?;
    let at = lines.at(idx);
    let dims = head
        .strip_prefix("dims")
        .map(str::trim)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| AppError::parse(format!("expected 'dims = M,N' at {at}, got '{head}'")))?;
    let (m, n) = dims
        .trim()
        .split_once(',')
        .ok_or_else(|| AppError::parse(format!("dims needs 'M,N' at {at}")))?;
    let m: usize = m
        .trim()
        .parse()
        .map_err(|_| AppError::parse(format!("cannot parse M '{}' at {at}", m.trim())))?;
    let n: usize = n
        .trim()
        .parse()
        .map_err(|_| AppError::parse(format!("cannot parse N '{}' at {at}", n.trim())))?;

    let mut objective = None;
    let mut inequality = Vec::new();
    let mut equality = None;
    while let Some((lidx, label)) = lines.next_content() {
        let lat = lines.at(lidx);
        match label {
            "objective" => {
                if objective.is_some() {
                    return Err(AppError::parse(format!("second 'objective' block at {lat}")));
                }
                objective = Some(SymMatrix::new(read_matrix(&mut lines)?)?);
            }
            "B" => {
                inequality.push(SymMatrix::new(read_matrix(&mut lines)?)?);
            }
            "C" => {
                if equality.is_some() {
                    return Err(AppError::parse(format!("second 'C' block at {lat}")));
                }
                equality = Some(read_matrix(&mut lines)?);
            }
            other => {
                return Err(AppError::parse(format!("unknown block label '{other}' at {lat}")));
            }
        }
    }
    let objective =
        objective.ok_or_else(|| AppError::parse(format!("{name}: the 'objective' block is required")))?;
    Ok(QuadProblem::new(m, n, objective, inequality, equality)?)
}

/// Loads a chance problem file: one positive definite `base` block and
/// repeated `term` blocks, all of the same dimension.
pub fn load_chance_problem(path: &Path) -> Result<ChanceProblem, AppError> {
    parse_chance_problem(&read_file(path)?, &path.display().to_string())
}

pub fn parse_chance_problem(text: &str, name: &str) -> Result<ChanceProblem, AppError> {
    let mut lines = Lines::new(text, name);
    let mut base = None;
    let mut terms = Vec::new();
    while let Some((lidx, label)) = lines.next_content() {
        let lat = lines.at(lidx);
        match label {
            "base" => {
                if base.is_some() {
                    return Err(AppError::parse(format!("second 'base' block at {lat}")));
                }
                base = Some(SymMatrix::new(read_matrix(&mut lines)?)?);
            }
            "term" => {
                terms.push(SymMatrix::new(read_matrix(&mut lines)?)?);
            }
            other => {
                return Err(AppError::parse(format!("unknown block label '{other}' at {lat}")));
            }
        }
    }
    let base = base.ok_or_else(|| AppError::parse(format!("{name}: the 'base' block is required")))?;
    Ok(ChanceProblem::new(base, terms)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_round_trip() {
        let model = parse_model("sigma2 = 0.5\natom = 1,1\natom = -0.5, 2\n", "m").unwrap();
        assert_eq!(model.sigma2(), 0.5);
        assert_eq!(model.measure().atoms(), &[(1.0, 1.0), (-0.5, 2.0)]);
    }

    #[test]
    fn model_accepts_comments_and_defaults_sigma2() {
        let model = parse_model("# pure Poisson\natom = 1,1\n", "m").unwrap();
        assert_eq!(model.sigma2(), 0.0);
        assert_eq!(model.variance(), 1.0);
    }

    #[test]
    fn model_rejects_unknown_key_by_name() {
        let err = parse_model("sigma = 1\n", "m").unwrap_err();
        assert!(err.detail.contains("sigma"), "detail: {}", err.detail);
        assert!(err.detail.contains("m:1"), "detail: {}", err.detail);
    }

    #[test]
    fn model_rejects_malformed_atom() {
        let err = parse_model("atom = 1\n", "m").unwrap_err();
        assert!(err.detail.contains("<u>,<w>"), "detail: {}", err.detail);
    }

    #[test]
    fn series_round_trip_square_and_rect() {
        let mats = parse_series("2\n2\n1 0\n0 1\n2 3\n1 0 0\n0 1 0\n", "s").unwrap();
        assert_eq!(mats.len(), 2);
        assert_eq!((mats[0].rows(), mats[0].cols()), (2, 2));
        assert_eq!((mats[1].rows(), mats[1].cols()), (2, 3));
        assert_eq!(mats[1].get(1, 1), 1.0);
    }

    #[test]
    fn series_rejects_wrong_row_width() {
        let err = parse_series("1\n2\n1 0 0\n0 1\n", "s").unwrap_err();
        assert!(err.detail.contains("expected 2 entries"), "detail: {}", err.detail);
    }

    #[test]
    fn series_rejects_trailing_content() {
        let err = parse_series("1\n1\n1\nextra\n", "s").unwrap_err();
        assert!(err.detail.contains("unexpected content"), "detail: {}", err.detail);
    }

    #[test]
    fn series_rejects_truncated_block() {
        let err = parse_series("2\n2\n1 0\n0 1\n", "s").unwrap_err();
        assert!(err.detail.contains("end of file"), "detail: {}", err.detail);
    }

    #[test]
    fn quad_problem_round_trip() {
        let text = "dims = 1,2\nobjective\n2\n1 0\n0 -1\nB\n2\n1 0\n0 0\nC\n1 2\n1 -1\n";
        let p = parse_quad_problem(text, "q").unwrap();
        assert_eq!((p.m(), p.n()), (1, 2));
        assert_eq!(p.inequality_terms().len(), 1);
        assert!(p.equality_map().is_some());
        assert_eq!(p.objective().get(1, 1), -1.0);
    }

    #[test]
    fn quad_problem_requires_objective() {
        let err = parse_quad_problem("dims = 1,1\nB\n1\n1\n", "q").unwrap_err();
        assert!(err.detail.contains("objective"), "detail: {}", err.detail);
    }

    #[test]
    fn quad_problem_rejects_unknown_label() {
        let err = parse_quad_problem("dims = 1,1\nobjective\n1\n1\nD\n1\n1\n", "q").unwrap_err();
        assert!(err.detail.contains("'D'"), "detail: {}", err.detail);
    }

    #[test]
    fn chance_problem_round_trip() {
        let text = "base\n2\n2 0\n0 2\nterm\n2\n1 0\n0 0\nterm\n2\n0 0\n0 1\n";
        let p = parse_chance_problem(text, "c").unwrap();
        assert_eq!(p.dim(), 2);
        assert_eq!(p.terms().len(), 2);
    }

    #[test]
    fn chance_problem_requires_base() {
        let err = parse_chance_problem("term\n1\n1\n", "c").unwrap_err();
        assert!(err.detail.contains("base"), "detail: {}", err.detail);
    }

    #[test]
    fn asymmetric_block_is_a_library_error() {
        let err = parse_chance_problem("base\n2\n1 1\n0 1\n", "c").unwrap_err();
        assert_eq!(err.module, "matrix_core");
        assert_eq!(err.exit, 2);
    }
}
