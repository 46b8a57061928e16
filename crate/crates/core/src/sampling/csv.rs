//! Dataset persistence: one CSV row per `(x0, t, y)` triple, header
//! `x0_1,...,x0_n,t,y`, metadata in `#` comment lines.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};

/// Renders with 17 significant digits, enough to round-trip any `f64`.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn dataset_to_string(ds: &Dataset) -> String {
    let mut out = String::new();
    out.push_str("# pacmc dataset\n");
    let _ = writeln!(out, "# horizon = {}", fmt_f64(ds.horizon));
    if let Some(seed) = ds.seed {
        let _ = writeln!(out, "# seed = {seed}");
    }
    if let Some(set) = &ds.input_set {
        let _ = writeln!(out, "# input_set = {set}");
    }
    let _ = writeln!(out, "# inputs = {}", ds.n_inputs());
    let _ = writeln!(out, "# times = {}", ds.n_times());
    let n = ds.input_dimension();
    let mut header: Vec<String> = (1..=n).map(|i| format!("x0_{i}")).collect();
    header.push("t".into());
    header.push("y".into());
    out.push_str(&header.join(","));
    out.push('\n');
    for (_, _, x, t, y) in ds.triples() {
        for v in x {
            out.push_str(&fmt_f64(*v));
            out.push(',');
        }
        out.push_str(&fmt_f64(t));
        out.push(',');
        out.push_str(&fmt_f64(y));
        out.push('\n');
    }
    out
}

pub fn write_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    fs::write(path, dataset_to_string(ds)).map_err(|e| Error::io(path, e))
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, path)
}

fn is_header(line: &str) -> bool {
    line.starts_with("x0_") || line == "t,y" || line.starts_with("t,")
}

pub(crate) fn parse_dataset(text: &str, path: &Path) -> Result<Dataset> {
    let mut horizon: Option<f64> = None;
    let mut seed: Option<u64> = None;
    let mut input_set: Option<String> = None;
    let mut declared_times: Option<usize> = None;
    let mut dim: Option<usize> = None;
    // (line number, x0, t, y)
    let mut rows: Vec<(usize, Vec<f64>, f64, f64)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let Some((key, value)) = comment.split_once('=') else {
                continue;
            };
            let value = value.trim();
            let bad = |what: &str| Error::parse(path, lineno, format!("invalid {what} `{value}`"));
            match key.trim() {
                "horizon" => horizon = Some(value.parse().map_err(|_| bad("horizon"))?),
                "seed" => seed = Some(value.parse().map_err(|_| bad("seed"))?),
                "input_set" => input_set = Some(value.to_string()),
                "times" => declared_times = Some(value.parse().map_err(|_| bad("time count"))?),
                _ => {}
            }
            continue;
        }
        if is_header(line) {
            if dim.is_some() {
                return Err(Error::parse(path, lineno, "duplicate header"));
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let n = cols.len().saturating_sub(2);
            let expected: Vec<String> = (1..=n)
                .map(|i| format!("x0_{i}"))
                .chain(["t".to_string(), "y".to_string()])
                .collect();
            if cols.len() < 2 || cols != expected {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("malformed header, expected `{}`", expected.join(",")),
                ));
            }
            dim = Some(n);
            continue;
        }
        let n = dim.ok_or_else(|| Error::parse(path, lineno, "data row before header"))?;
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != n + 2 {
            return Err(Error::parse(
                path,
                lineno,
                format!(
                    "row has {} fields but the header declares input dimension {n} ({} fields)",
                    cells.len(),
                    n + 2
                ),
            ));
        }
        let mut nums = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("empty value in column {}", c + 1),
                ));
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("invalid number `{cell}`")))?;
            nums.push(v);
        }
        let y = nums.pop().expect("n + 2 cells");
        let t = nums.pop().expect("n + 2 cells");
        rows.push((lineno, nums, t, y));
    }

    let last_line = text.lines().count();
    if dim.is_none() {
        return Err(Error::parse(path, last_line, "missing header"));
    }
    if rows.is_empty() {
        return Err(Error::parse(path, last_line, "no data rows"));
    }

    // Group rows into per-input blocks.
    let mut blocks: Vec<&[(usize, Vec<f64>, f64, f64)]> = Vec::new();
    if let Some(m) = declared_times {
        if m == 0 || rows.len() % m != 0 {
            return Err(Error::parse(
                path,
                rows.last().map_or(last_line, |r| r.0),
                format!(
                    "{} rows is not a multiple of the declared {m} times",
                    rows.len()
                ),
            ));
        }
        blocks.extend(rows.chunks(m));
    } else {
        let mut start = 0;
        for k in 1..=rows.len() {
            if k == rows.len() || rows[k].1 != rows[start].1 {
                blocks.push(&rows[start..k]);
                start = k;
            }
        }
    }

    let times: Vec<f64> = blocks[0].iter().map(|r| r.2).collect();
    let mut inputs = Vec::with_capacity(blocks.len());
    let mut values = Vec::with_capacity(rows.len());
    for block in &blocks {
        let x0 = &block[0].1;
        if block.len() != times.len() {
            return Err(Error::parse(
                path,
                block[0].0,
                "input block has a different number of times",
            ));
        }
        for (row, &t) in block.iter().zip(&times) {
            if &row.1 != x0 {
                return Err(Error::parse(path, row.0, "input changes inside a block"));
            }
            if row.2.to_bits() != t.to_bits() {
                return Err(Error::parse(
                    path,
                    row.0,
                    "time grid differs from the first input's",
                ));
            }
            values.push(row.3);
        }
        inputs.push(x0.clone());
    }

    let horizon = horizon.unwrap_or_else(|| times.iter().cloned().fold(0.0, f64::max));
    let mut ds = Dataset::new(inputs, times, values, horizon)
        .map_err(|e| Error::parse(path, last_line, e.to_string()))?;
    ds.seed = seed;
    ds.input_set = input_set;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> Dataset {
        let mut ds = Dataset::new(
            vec![vec![1.4, 2.3], vec![1.5, 2.29]],
            vec![0.1, 3.0, 9.5],
            vec![1.0, 2.0, -3.0, 0.1 + 0.2, 1e-300, 7.0],
            10.0,
        )
        .unwrap();
        ds.seed = Some(42);
        ds.input_set = Some("box([1.25,2.28],[1.55,2.32])".into());
        ds
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        let ds = sample();
        write_dataset(&ds, &path).unwrap();
        assert_eq!(read_dataset(&path).unwrap(), ds);
    }

    #[test]
    fn header_and_metadata_layout() {
        let text = dataset_to_string(&sample());
        assert!(text.contains("# horizon = 1.0000000000000000e1\n"));
        assert!(text.contains("\nx0_1,x0_2,t,y\n"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 7);
    }

    fn parse_err_line(text: &str) -> usize {
        match parse_dataset(text, Path::new("x.csv")).unwrap_err() {
            Error::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn wrong_dimension_row_names_its_line() {
        let text = "# horizon = 1\nx0_1,t,y\n0.5,0.1,1\n0.5,0.2,0.3,1\n";
        assert_eq!(parse_err_line(text), 4);
    }

    #[test]
    fn empty_cell_is_rejected() {
        assert_eq!(parse_err_line("x0_1,t,y\n0.5,,1\n"), 2);
    }

    #[test]
    fn duplicate_header_is_rejected() {
        assert_eq!(parse_err_line("x0_1,t,y\n0.5,0.1,1\nx0_1,t,y\n"), 3);
    }

    #[test]
    fn inconsistent_time_grid_is_rejected() {
        let text = "x0_1,t,y\n0.5,0.1,1\n0.5,0.2,1\n0.7,0.1,1\n0.7,0.3,1\n";
        assert_eq!(parse_err_line(text), 5);
    }

    #[test]
    fn malformed_header_and_numbers() {
        assert_eq!(parse_err_line("x0_2,t,y\n"), 1);
        assert_eq!(parse_err_line("x0_1,t,y\n0.5,abc,1\n"), 2);
    }

    proptest! {
        #[test]
        fn arbitrary_finite_values_round_trip(
            vals in proptest::collection::vec(-1e12f64..1e12, 6),
            xs in proptest::collection::vec(-1e3f64..1e3, 2),
        ) {
            let ds = Dataset::new(
                vec![vec![xs[0]], vec![xs[1] + 2e3]],
                vec![0.25, 0.5, 0.75],
                vals,
                1.0,
            ).unwrap();
            let back = parse_dataset(&dataset_to_string(&ds), Path::new("p.csv")).unwrap();
            prop_assert_eq!(back, ds);
        }
    }
}
