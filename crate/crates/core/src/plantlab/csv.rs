//! Dictionary CSV and metadata sidecar formats.
//!
//! The CSV carries one row per time step with an explicit 1-based `k`
//! column: `k,u_1..u_nu,p_1..p_np,y_1..y_ny`. The sidecar is a plain-text
//! `key = value` record with the seed, the sizes, the generation recipe and
//! the excitation certificate. Values are written with the shortest
//! round-tripping decimal form, so export followed by import is lossless.

use std::io::{self, BufRead, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};
use crate::signals::SignalSequence;

use super::{DataDictionary, PeCertificate};

/// Sidecar metadata for a dictionary CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct DictionaryMeta {
    pub seed: u64,
    pub n_d: usize,
    pub n_u: usize,
    pub n_p: usize,
    pub n_y: usize,
    pub recipe: String,
    pub pe_order: usize,
    pub pe_required_rank: usize,
    pub pe_rank: usize,
    pub pe_passed: bool,
}

impl DictionaryMeta {
    pub fn for_dictionary<T: Scalar>(dict: &DataDictionary<T>, seed: u64, recipe: &str) -> Self {
        let cert = dict.certificate();
        Self {
            seed,
            n_d: dict.n_d(),
            n_u: dict.n_u(),
            n_p: dict.n_p(),
            n_y: dict.n_y(),
            recipe: recipe.to_string(),
            pe_order: cert.order,
            pe_required_rank: cert.required_rank,
            pe_rank: cert.rank,
            pe_passed: cert.passed,
        }
    }

    pub fn certificate(&self) -> PeCertificate {
        PeCertificate {
            order: self.pe_order,
            required_rank: self.pe_required_rank,
            rank: self.pe_rank,
            passed: self.pe_passed,
        }
    }
}

/// Writes the recorded `(u, p, y)` triple as CSV.
pub fn write_dictionary_csv<T: Scalar, W: Write>(
    dict: &DataDictionary<T>,
    out: &mut W,
) -> io::Result<()> {
    write!(out, "k")?;
    for i in 1..=dict.n_u() {
        write!(out, ",u_{i}")?;
    }
    for i in 1..=dict.n_p() {
        write!(out, ",p_{i}")?;
    }
    for i in 1..=dict.n_y() {
        write!(out, ",y_{i}")?;
    }
    writeln!(out)?;
    for k in 1..=dict.n_d() {
        write!(out, "{k}")?;
        for v in dict.u().at(k).iter() {
            write!(out, ",{v}")?;
        }
        for v in dict.p().at(k).iter() {
            write!(out, ",{v}")?;
        }
        for v in dict.y().at(k).iter() {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Counts a run of `prefix`-numbered columns (`u_1, u_2, …`) starting at
/// `fields[start]`; the run must be contiguous and 1-based.
fn count_channel_columns(fields: &[&str], start: usize, prefix: char, line: usize) -> Result<usize> {
    let mut count = 0;
    while start + count < fields.len() {
        let field = fields[start + count];
        let expected = format!("{prefix}_{}", count + 1);
        if field.starts_with(&format!("{prefix}_")) {
            if field != expected {
                return Err(parse_err(
                    line,
                    start + count + 1,
                    format!("expected column '{expected}', found '{field}'"),
                ));
            }
            count += 1;
        } else {
            break;
        }
    }
    Ok(count)
}

/// Reads a dictionary CSV back into its `(u, p, y)` sequences.
///
/// Errors carry the offending 1-based line and column.
pub fn read_dictionary_csv<T: Scalar, R: BufRead>(
    reader: R,
) -> Result<(SignalSequence<T>, SignalSequence<T>, SignalSequence<T>)> {
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| parse_err(i + 1, 1, e.to_string()))?;
        if !line.trim().is_empty() {
            lines.push((i + 1, line));
        }
    }
    if lines.is_empty() {
        return Err(parse_err(1, 1, "empty CSV"));
    }
    let (header_line, header) = &lines[0];
    let fields: Vec<&str> = header.split(',').collect();
    if fields.first() != Some(&"k") {
        return Err(parse_err(*header_line, 1, "first column must be 'k'"));
    }
    let n_u = count_channel_columns(&fields, 1, 'u', *header_line)?;
    let n_p = count_channel_columns(&fields, 1 + n_u, 'p', *header_line)?;
    let n_y = count_channel_columns(&fields, 1 + n_u + n_p, 'y', *header_line)?;
    if n_u == 0 || n_p == 0 || n_y == 0 {
        return Err(parse_err(*header_line, 1, "header must contain u_*, p_* and y_* columns"));
    }
    let expected_cols = 1 + n_u + n_p + n_y;
    if fields.len() != expected_cols {
        return Err(parse_err(
            *header_line,
            expected_cols + 1,
            format!("unexpected column '{}'", fields[expected_cols.min(fields.len() - 1)]),
        ));
    }

    let n_rows = lines.len() - 1;
    if n_rows == 0 {
        return Err(parse_err(*header_line + 1, 1, "no data rows"));
    }
    let mut u = DMatrix::<T>::zeros(n_u, n_rows);
    let mut p = DMatrix::<T>::zeros(n_p, n_rows);
    let mut y = DMatrix::<T>::zeros(n_y, n_rows);

    for (row, (line_no, line)) in lines[1..].iter().enumerate() {
        let values: Vec<&str> = line.split(',').collect();
        if values.len() != expected_cols {
            return Err(parse_err(
                *line_no,
                values.len().min(expected_cols) + 1,
                format!("expected {expected_cols} fields, found {}", values.len()),
            ));
        }
        let k: usize = values[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(*line_no, 1, format!("invalid step index '{}'", values[0])))?;
        if k != row + 1 {
            return Err(parse_err(
                *line_no,
                1,
                format!("step index {k} out of order, expected {}", row + 1),
            ));
        }
        let mut col = 1usize;
        for target in [(&mut u, n_u), (&mut p, n_p), (&mut y, n_y)] {
            let (matrix, dim) = target;
            for i in 0..dim {
                let text = values[col].trim();
                let parsed: f64 = text.parse().map_err(|_| {
                    parse_err(*line_no, col + 1, format!("invalid number '{text}'"))
                })?;
                if !parsed.is_finite() {
                    return Err(parse_err(*line_no, col + 1, format!("non-finite value '{text}'")));
                }
                matrix[(i, row)] = real::<T>(parsed);
                col += 1;
            }
        }
    }

    Ok((
        SignalSequence::from_matrix(u)?,
        SignalSequence::from_matrix(p)?,
        SignalSequence::from_matrix(y)?,
    ))
}

/// Writes the metadata sidecar.
pub fn write_dictionary_meta<W: Write>(meta: &DictionaryMeta, out: &mut W) -> io::Result<()> {
    writeln!(out, "seed = {}", meta.seed)?;
    writeln!(out, "n_d = {}", meta.n_d)?;
    writeln!(out, "n_u = {}", meta.n_u)?;
    writeln!(out, "n_p = {}", meta.n_p)?;
    writeln!(out, "n_y = {}", meta.n_y)?;
    writeln!(out, "recipe = {}", meta.recipe)?;
    writeln!(out, "pe_order = {}", meta.pe_order)?;
    writeln!(out, "pe_required_rank = {}", meta.pe_required_rank)?;
    writeln!(out, "pe_rank = {}", meta.pe_rank)?;
    writeln!(out, "pe_passed = {}", meta.pe_passed)?;
    Ok(())
}

/// Reads the metadata sidecar; every key is required, unknown keys are
/// rejected.
pub fn read_dictionary_meta<R: BufRead>(reader: R) -> Result<DictionaryMeta> {
    let mut seed = None;
    let mut n_d = None;
    let mut n_u = None;
    let mut n_p = None;
    let mut n_y = None;
    let mut recipe = None;
    let mut pe_order = None;
    let mut pe_required_rank = None;
    let mut pe_rank = None;
    let mut pe_passed = None;

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| parse_err(line_no, 1, e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| parse_err(line_no, 1, "expected 'key = value'"))?;
        let key = key.trim();
        let value = value.trim();
        let col = line.find('=').unwrap_or(0) + 2;
        macro_rules! parse_into {
            ($slot:ident, $ty:ty) => {{
                let v: $ty = value
                    .parse()
                    .map_err(|_| parse_err(line_no, col, format!("invalid value '{value}'")))?;
                if $slot.replace(v).is_some() {
                    return Err(parse_err(line_no, 1, format!("duplicate key '{key}'")));
                }
            }};
        }
        match key {
            "seed" => parse_into!(seed, u64),
            "n_d" => parse_into!(n_d, usize),
            "n_u" => parse_into!(n_u, usize),
            "n_p" => parse_into!(n_p, usize),
            "n_y" => parse_into!(n_y, usize),
            "recipe" => {
                if recipe.replace(value.to_string()).is_some() {
                    return Err(parse_err(line_no, 1, "duplicate key 'recipe'"));
                }
            }
            "pe_order" => parse_into!(pe_order, usize),
            "pe_required_rank" => parse_into!(pe_required_rank, usize),
            "pe_rank" => parse_into!(pe_rank, usize),
            "pe_passed" => parse_into!(pe_passed, bool),
            other => return Err(parse_err(line_no, 1, format!("unknown key '{other}'"))),
        }
    }

    macro_rules! require {
        ($slot:ident) => {
            $slot.ok_or_else(|| parse_err(1, 1, format!("missing key '{}'", stringify!($slot))))?
        };
    }
    Ok(DictionaryMeta {
        seed: require!(seed),
        n_d: require!(n_d),
        n_u: require!(n_u),
        n_p: require!(n_p),
        n_y: require!(n_y),
        recipe: require!(recipe),
        pe_order: require!(pe_order),
        pe_required_rank: require!(pe_required_rank),
        pe_rank: require!(pe_rank),
        pe_passed: require!(pe_passed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plantlab::{example1_model, example1_scheduling, DictionarySource, Excitation};

    fn sample_dictionary() -> DataDictionary<f64> {
        let model = example1_model::<f64>();
        let scheduling = example1_scheduling::<f64>(48).unwrap();
        super::super::generate_dictionary(
            &DictionarySource::LpvModel { model: &model, scheduling: &scheduling },
            &Excitation::Uniform { amplitude: 1.0 },
            48,
            42,
            7,
        )
        .unwrap()
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let dict = sample_dictionary();
        let mut buf = Vec::new();
        write_dictionary_csv(&dict, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,u_1,p_1,p_2,y_1\n"));
        let (u, p, y) = read_dictionary_csv::<f64, _>(text.as_bytes()).unwrap();
        assert_eq!(&u, dict.u());
        assert_eq!(&p, dict.p());
        assert_eq!(&y, dict.y());
        let rebuilt = DataDictionary::from_sequences(u, p, y, 7).unwrap();
        assert_eq!(rebuilt, dict);
    }

    #[test]
    fn meta_round_trip() {
        let dict = sample_dictionary();
        let meta = DictionaryMeta::for_dictionary(&dict, 42, "uniform amplitude=1");
        let mut buf = Vec::new();
        write_dictionary_meta(&meta, &mut buf).unwrap();
        let parsed = read_dictionary_meta(buf.as_slice()).unwrap();
        assert_eq!(parsed, meta);
    }

    #[test]
    fn malformed_csv_reports_line_and_column() {
        let bad = "k,u_1,p_1,y_1\n1,0.1,0.2,zzz\n";
        match read_dictionary_csv::<f64, _>(bad.as_bytes()) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(column, 4);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_meta_key_is_rejected() {
        let bad = "seed = 1\nn_d = 2\nbogus = 3\n";
        assert!(matches!(
            read_dictionary_meta(bad.as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
    }
}
