//! CSV grid interchange format.
//!
//! ```text
//! n=<int> order=y-ascending
//! v(0,0),v(1,0),...,v(n-1,0)
//! ...
//! v(0,n-1),...,v(n-1,n-1)
//! ```
//!
//! One line per grid row. With `order=y-ascending` (the only order written,
//! and the default when the key is absent) the first data line is the
//! bottom row; `order=y-descending` is accepted on input. Values are written
//! in shortest round-trip form, so `read(write(f)) == f` bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Grid, ScalarField};
use crate::error::{Result, VltError};

pub fn render_field(field: &ScalarField) -> String {
    let n = field.n();
    let mut out = String::with_capacity(n * n * 12);
    let _ = writeln!(out, "n={n} order=y-ascending");
    for j in 0..n {
        for (i, v) in field.row(j).iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

pub fn write_field(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_field(field)).map_err(|e| VltError::io(path, e))
}

pub fn read_field(path: impl AsRef<Path>) -> Result<ScalarField> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| VltError::io(path, e))?;
    parse_field(&text, path)
}

/// Parses the CSV grid format; `origin` is only used in error messages.
pub fn parse_field(text: &str, origin: &Path) -> Result<ScalarField> {
    let err = |line: usize, column: usize, message: String| VltError::Parse {
        path: origin.to_path_buf(),
        line,
        column,
        message,
    };

    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim_end_matches('\r')));
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, 1, "empty file".into()))?;

    let mut n = None;
    let mut descending = false;
    for (k, token) in header
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .enumerate()
    {
        match token.split_once('=') {
            Some(("n", value)) => {
                let parsed = value
                    .parse::<usize>()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| err(1, k + 1, format!("invalid grid size '{value}'")))?;
                n = Some(parsed);
            }
            Some(("order", "y-ascending")) => descending = false,
            Some(("order", "y-descending")) => descending = true,
            _ => return Err(err(1, k + 1, format!("unexpected header token '{token}'"))),
        }
    }
    let n = n.ok_or_else(|| err(1, 1, "header must start with n=<int>".into()))?;

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if rows.len() == n {
            return Err(err(line_no, 1, format!("more than {n} data rows")));
        }
        let mut row = Vec::with_capacity(n);
        for (col, cell) in line.split(',').enumerate() {
            if col == n {
                return Err(err(line_no, col + 1, format!("row has more than {n} columns")));
            }
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| err(line_no, col + 1, format!("invalid number '{}'", cell.trim())))?;
            if !v.is_finite() {
                return Err(err(line_no, col + 1, format!("non-finite value '{}'", cell.trim())));
            }
            row.push(v);
        }
        if row.len() != n {
            return Err(err(
                line_no,
                row.len() + 1,
                format!("row has {} columns, expected {n}", row.len()),
            ));
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(err(
            text.lines().count() + 1,
            1,
            format!("expected {n} data rows, found {}", rows.len()),
        ));
    }
    if descending {
        rows.reverse();
    }
    Ok(ScalarField::from_raw(
        Grid::unchecked(n),
        rows.into_iter().flatten().collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> &'static Path {
        Path::new("mem")
    }

    #[test]
    fn two_by_two_layout() {
        let f = ScalarField::from_raw(Grid::unchecked(2), vec![0.0, 1.0, 2.0, 3.0]);
        let text = render_field(&f);
        assert_eq!(text, "n=2 order=y-ascending\n0,1\n2,3\n");
        assert_eq!(parse_field(&text, p()).unwrap(), f);
        // A bare header is read as y-ascending.
        assert_eq!(parse_field("n=2\n0,1\n2,3\n", p()).unwrap(), f);
        let flipped = parse_field("n=2 order=y-descending\n2,3\n0,1\n", p()).unwrap();
        assert_eq!(flipped, f);
    }

    #[test]
    fn extra_column_is_located() {
        match parse_field("n=2\n0,1\n2,3,4\n", p()) {
            Err(VltError::Parse { line, column, .. }) => assert_eq!((line, column), (3, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_field("", p()).is_err());
        assert!(parse_field("m=2\n", p()).is_err());
        assert!(parse_field("n=2\n0,1\n", p()).is_err());
        assert!(parse_field("n=2\n0,x\n1,2\n", p()).is_err());
        assert!(parse_field("n=2\n0\n1,2\n", p()).is_err());
        assert!(parse_field("n=2\n0,1\n1,2\n3,4\n", p()).is_err());
        assert!(parse_field("n=2\n0,NaN\n1,2\n", p()).is_err());
    }

    #[test]
    fn file_round_trip_512() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let g = Grid::new(512).unwrap();
        let vals: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1e3..1e3)).collect();
        let f = ScalarField::from_values(g, vals).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        write_field(&f, &path).unwrap();
        assert_eq!(read_field(&path).unwrap(), f);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn round_trip_is_bit_exact(
            n in 1usize..12,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let vals: Vec<f64> = (0..n * n)
                .map(|_| {
                    let mantissa: f64 = rng.random_range(-1.0..1.0);
                    mantissa * 10f64.powi(rng.random_range(-300..300))
                })
                .collect();
            let f = ScalarField::from_raw(Grid::unchecked(n), vals);
            let back = parse_field(&render_field(&f), p()).unwrap();
            for (a, b) in f.values().iter().zip(back.values()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
