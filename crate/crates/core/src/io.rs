//! Problem files and report output.
//!
//! Complex numbers are `[re, im]` pairs. JSON numbers use the shortest
//! representation that round-trips exactly.

use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lcu::LcuDecomposition;
use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::reference::LdeProblem;
use crate::scalar::C;
use crate::solver::{SolveReport, SweepRow};

/// Parsed problem document.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub problem: LdeProblem<f64>,
    pub k: Option<usize>,
    /// Real vectors compared against solutions by similarity.
    pub experimental: Option<Vec<Vec<f64>>>,
}

fn bad(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::invalid(format!("{key}: {msg}"))
}

fn parse_pair(v: &Value, key: &str) -> Result<C<f64>> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| bad(key, "expected a [re, im] pair"))?;
    let num = |x: &Value, part: &str| {
        x.as_f64()
            .filter(|f| f.is_finite())
            .ok_or_else(|| bad(key, format!("{part} part is not a finite number")))
    };
    Ok(C::new(num(&arr[0], "real")?, num(&arr[1], "imaginary")?))
}

fn parse_vector(v: &Value, key: &str) -> Result<ComplexVector<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| bad(key, "expected an array of [re, im] pairs"))?;
    arr.iter()
        .enumerate()
        .map(|(i, z)| parse_pair(z, &format!("{key}[{i}]")))
        .collect::<Result<Vec<_>>>()
        .map(ComplexVector::new)
}

fn parse_matrix(v: &Value, key: &str) -> Result<ComplexMatrix<f64>> {
    let rows = v
        .as_array()
        .ok_or_else(|| bad(key, "expected an array of rows"))?;
    if rows.is_empty() {
        return Err(bad(key, "matrix is empty"));
    }
    let n = rows.len();
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        let row_key = format!("{key}[{i}]");
        let entries = row
            .as_array()
            .ok_or_else(|| bad(&row_key, "expected an array of [re, im] pairs"))?;
        if entries.len() != n {
            return Err(bad(
                &row_key,
                format!("has {} entries; the matrix must be {n}x{n}", entries.len()),
            ));
        }
        for (j, z) in entries.iter().enumerate() {
            data.push(parse_pair(z, &format!("{key}[{i}][{j}]"))?);
        }
    }
    ComplexMatrix::from_vec(n, n, data)
}

/// Parses a problem document, naming the offending key and index on error.
pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("malformed JSON: {e}")))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::invalid("problem file must be a JSON object"))?;
    let field = |key: &str| obj.get(key).ok_or_else(|| bad(key, "missing"));
    let m = parse_matrix(field("matrix")?, "matrix")?;
    let n = m.rows();
    let x0 = parse_vector(field("x0")?, "x0")?;
    let b = parse_vector(field("b")?, "b")?;
    for (key, vec) in [("x0", &x0), ("b", &b)] {
        if vec.dim() != n {
            return Err(bad(key, format!("has length {}, expected {n}", vec.dim())));
        }
    }
    let t = field("t")?
        .as_f64()
        .ok_or_else(|| bad("t", "expected a number"))?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(bad("t", format!("{t} must be finite and non-negative")));
    }
    let k = match obj.get("k") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| bad("k", "expected a non-negative integer"))? as usize,
        ),
    };
    let experimental = match obj.get("experimental") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let rows = v
                .as_array()
                .ok_or_else(|| bad("experimental", "expected an array of real vectors"))?;
            let parsed = rows
                .iter()
                .enumerate()
                .map(|(i, row)| parse_real_vector(row, &format!("experimental[{i}]"), Some(n)))
                .collect::<Result<Vec<_>>>()?;
            Some(parsed)
        }
    };
    Ok(ProblemFile {
        problem: LdeProblem::new(m, x0, b, t)?,
        k,
        experimental,
    })
}

fn parse_real_vector(v: &Value, key: &str, len: Option<usize>) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| bad(key, "expected an array of numbers"))?;
    if let Some(n) = len {
        if arr.len() != n {
            return Err(bad(key, format!("has length {}, expected {n}", arr.len())));
        }
    }
    arr.iter()
        .enumerate()
        .map(|(j, x)| {
            x.as_f64()
                .filter(|f| f.is_finite())
                .ok_or_else(|| bad(&format!("{key}[{j}]"), "expected a finite number"))
        })
        .collect()
}

/// Parses a bare list of real vectors, e.g. measured solutions for a sweep.
pub fn parse_real_vectors(text: &str) -> Result<Vec<Vec<f64>>> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("malformed JSON: {e}")))?;
    let rows = doc
        .get("experimental")
        .unwrap_or(&doc)
        .as_array()
        .ok_or_else(|| Error::invalid("expected an array of real vectors"))?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| parse_real_vector(row, &format!("experimental[{i}]"), None))
        .collect()
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))
}

pub fn read_problem(path: &Path) -> Result<ProblemFile> {
    parse_problem(&read_text(path)?)
}

pub fn read_real_vectors(path: &Path) -> Result<Vec<Vec<f64>>> {
    parse_real_vectors(&read_text(path)?)
}

/// Problem document for `p`, the inverse of [`parse_problem`].
pub fn problem_to_json(p: &LdeProblem<f64>, k: Option<usize>) -> Value {
    let mut doc = json!({
        "matrix": p.m(),
        "x0": p.x0(),
        "b": p.b(),
        "t": p.t(),
    });
    if let Some(k) = k {
        doc["k"] = json!(k);
    }
    doc
}

pub fn report_to_json(report: &SolveReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

pub fn report_from_json(text: &str) -> Result<SolveReport> {
    serde_json::from_str(text).map_err(|e| Error::invalid(format!("malformed report: {e}")))
}

const REPORT_FIELDS: [&str; 15] = [
    "method",
    "k",
    "rescale_factor",
    "success_prob_exact",
    "success_prob_estimate",
    "success_ratio",
    "repetitions_estimate",
    "repetitions_estimate_sqrt",
    "queries",
    "tail_bound",
    "jordan_bound",
    "deviation_from_oracle",
    "qubits",
    "gate_count",
    "dim",
];

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Header for a report of dimension `n`: scalar fields then `x{i}_re, x{i}_im`.
pub fn report_csv_header(n: usize) -> String {
    let mut cols: Vec<String> = REPORT_FIELDS.iter().map(|s| s.to_string()).collect();
    for i in 1..=n {
        cols.push(format!("x{i}_re"));
        cols.push(format!("x{i}_im"));
    }
    cols.join(",")
}

pub fn report_csv_row(r: &SolveReport) -> String {
    let mut cols = vec![
        r.method.to_string(),
        r.k.to_string(),
        r.rescale_factor.to_string(),
        r.success_prob_exact.to_string(),
        r.success_prob_estimate.to_string(),
        r.success_ratio.to_string(),
        r.repetitions_estimate.to_string(),
        r.repetitions_estimate_sqrt.to_string(),
        r.queries.to_string(),
        r.bounds.tail_bound.to_string(),
        opt(r.bounds.jordan_bound),
        r.deviation_from_oracle.to_string(),
        r.qubits.to_string(),
        r.gate_count.to_string(),
        r.solution.dim().to_string(),
    ];
    for z in r.solution.iter() {
        cols.push(z.re.to_string());
        cols.push(z.im.to_string());
    }
    cols.join(",")
}

/// Header plus one row.
pub fn report_to_csv(r: &SolveReport) -> String {
    format!(
        "{}\n{}\n",
        report_csv_header(r.solution.dim()),
        report_csv_row(r)
    )
}

/// Sweep table: `beta, x1..xN (real parts), [similarity,] success_prob, rescale`.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let n = rows.first().map_or(0, |r| r.report.solution.dim());
    let with_sim = rows.iter().any(|r| r.similarity.is_some());
    let mut header = vec!["beta".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    if with_sim {
        header.push("similarity".into());
    }
    header.push("success_prob".into());
    header.push("rescale".into());
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let mut cols = vec![row.beta.to_string()];
        cols.extend(row.report.solution.iter().map(|z| z.re.to_string()));
        if with_sim {
            cols.push(opt(row.similarity));
        }
        cols.push(row.report.success_prob_exact.to_string());
        cols.push(row.report.rescale_factor.to_string());
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

/// Terms with weights, labels and matrices, plus the reconstruction residual.
pub fn decomposition_to_json(
    dec: &LcuDecomposition<f64>,
    target: &ComplexMatrix<f64>,
    mode: &str,
) -> Value {
    let terms: Vec<Value> = dec
        .terms()
        .iter()
        .map(|t| json!({ "alpha": t.alpha, "label": t.label, "unitary": t.unitary }))
        .collect();
    json!({
        "mode": mode,
        "count": dec.len(),
        "alpha_sum": dec.alpha_sum(),
        "residual": dec.residual(target),
        "terms": terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::experiment_problem;
    use crate::solver::{solve, DecompositionChoice, Method};

    #[test]
    fn problem_round_trip() {
        let p = experiment_problem(0.3, 0.7, 0.4).unwrap();
        let text = problem_to_json(&p, Some(4)).to_string();
        let parsed = parse_problem(&text).unwrap();
        assert_eq!(parsed.problem, p);
        assert_eq!(parsed.k, Some(4));
        assert!(parsed.experimental.is_none());
    }

    #[test]
    fn errors_name_key_and_index() {
        let msg = |text: &str| parse_problem(text).unwrap_err().to_string();
        let base = r#""x0": [[1,0],[0,0]], "b": [[0,0],[0,0]], "t": 1"#;
        assert!(msg(&format!(
            r#"{{"matrix": [[[1,0],[0,0]],[[0,0],[1]]], {base}}}"#
        ))
        .contains("matrix[1][1]"));
        assert!(
            msg(&format!(r#"{{"matrix": [[[1,0],[0,0]],[[0,0]]], {base}}}"#)).contains("matrix[1]")
        );
        assert!(
            msg(r#"{"matrix": [[[1,0]]], "x0": [[1,0],[2,0]], "b": [[0,0]], "t": 1}"#)
                .contains("x0")
        );
        assert!(
            msg(r#"{"matrix": [[[1,0]]], "x0": [[1,0]], "b": [[0,"a"]], "t": 1}"#).contains("b[0]")
        );
        assert!(
            msg(r#"{"matrix": [[[1,0]]], "x0": [[1,0]], "b": [[0,0]], "t": -1}"#).contains("t")
        );
        assert!(msg(r#"{"matrix": [[[1,0]]], "x0": [[1,0]], "b": [[0,0]]}"#).contains("t: missing"));
        assert!(
            msg(r#"{"matrix": [[[1,0]]], "x0": [[1,0]], "b": [[0,0]], "t": 1, "k": -2}"#)
                .contains("k")
        );
        assert!(msg(r#"{"matrix": [[[1,0]]], "x0": [[1,0]], "b": [[0,0]], "t": 1, "experimental": [[1, 2]]}"#)
            .contains("experimental[0]"));
        assert!(msg("not json").contains("malformed"));
    }

    #[test]
    fn report_json_round_trip_is_bit_exact() {
        let p = experiment_problem(0.1 * std::f64::consts::PI, 0.3, 0.4).unwrap();
        let r = solve(&p, 4, Method::CircuitExperiment, DecompositionChoice::Pauli).unwrap();
        let text = report_to_json(&r);
        let back = report_from_json(&text).unwrap();
        assert_eq!(back, r);
        for (a, b) in back.solution.iter().zip(r.solution.iter()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        assert_eq!(report_to_json(&back), text);
    }

    #[test]
    fn csv_shape() {
        let p = experiment_problem(0.2, 0.2, 0.4).unwrap();
        let r = solve(&p, 4, Method::TaylorTruncated, DecompositionChoice::Pauli).unwrap();
        let csv = report_to_csv(&r);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
        assert!(lines[0].starts_with("method,k,"));
        assert!(lines[1].starts_with("taylor-truncated,4,"));
        let x1: f64 = lines[1].split(',').nth(15).unwrap().parse().unwrap();
        assert_eq!(x1, r.solution[0].re);
    }

    #[test]
    fn real_vector_lists() {
        let v = parse_real_vectors("[[1, 2.5], [3, 4]]").unwrap();
        assert_eq!(v, vec![vec![1.0, 2.5], vec![3.0, 4.0]]);
        let v = parse_real_vectors(r#"{"experimental": [[1]]}"#).unwrap();
        assert_eq!(v, vec![vec![1.0]]);
        assert!(parse_real_vectors("[[1, \"x\"]]")
            .unwrap_err()
            .to_string()
            .contains("experimental[0][1]"));
    }
}
