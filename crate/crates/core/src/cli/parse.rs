//! Parsers for command-line values.

use std::path::Path;

use crate::error::{Error, Result};
use crate::prob::Channel;

/// Row-sum tolerance for channels read from text.
pub const TEXT_ROW_TOL: f64 = 1e-9;

fn parse_err(position: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        position,
        message: message.into(),
    }
}

fn parse_prob(text: &str, offset: usize, name: &str) -> Result<f64> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| parse_err(offset, format!("{name} = {text:?} is not a number")))?;
    if !(0.0..=1.0).contains(&v) {
        return Err(parse_err(offset, format!("{name} = {v} not in [0, 1]")));
    }
    Ok(v)
}

/// `bsc:<p>`, `bec:<e>`, `zchan:<p>` or `matrix:<path>` (CSV, one row per input).
pub fn parse_channel_spec(text: &str) -> Result<Channel> {
    let (family, arg) = text
        .split_once(':')
        .ok_or_else(|| parse_err(0, format!("expected <family>:<parameter>, got {text:?}")))?;
    let at = family.len() + 1;
    match family {
        "bsc" => Channel::bsc(parse_prob(arg, at, "p")?),
        "bec" => Channel::bec(parse_prob(arg, at, "e")?),
        "zchan" => Channel::z(parse_prob(arg, at, "p")?),
        "matrix" => read_matrix(Path::new(arg)),
        _ => Err(parse_err(0, format!("unknown channel family {family:?}"))),
    }
}

fn read_matrix(path: &Path) -> Result<Channel> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| parse_err(0, format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(i, format!("row {i}: {e}")))?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, f)| {
                f.parse::<f64>()
                    .map_err(|_| parse_err(i, format!("row {i}, column {j}: {f:?} is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(0, format!("{} has no rows", path.display())));
    }
    Channel::with_tolerance(rows, TEXT_ROW_TOL)
}

/// Comma-separated list.
pub fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>> {
    let mut pos = 0;
    let mut out = Vec::new();
    for part in text.split(',') {
        out.push(
            part.trim()
                .parse()
                .map_err(|_| parse_err(pos, format!("{part:?} is not a valid entry")))?,
        );
        pos += part.len() + 1;
    }
    Ok(out)
}

/// `a:b:step`, endpoints included; points are `a + i·step`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(parse_err(0, format!("expected a:b:step, got {text:?}")));
    }
    let mut vals = [0.0f64; 3];
    let mut pos = 0;
    for (v, p) in vals.iter_mut().zip(&parts) {
        *v = p
            .trim()
            .parse()
            .map_err(|_| parse_err(pos, format!("{p:?} is not a number")))?;
        pos += p.len() + 1;
    }
    let [a, b, step] = vals;
    if !(step > 0.0) || b < a {
        return Err(parse_err(0, format!("grid {text:?} needs a <= b and step > 0")));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| a + i as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn channel_specs() {
        assert_eq!(
            parse_channel_spec("bsc:0.1").unwrap().rows(),
            vec![vec![0.9, 0.1], vec![0.1, 0.9]]
        );
        assert_eq!(parse_channel_spec("zchan:0.3").unwrap(), Channel::z(0.3).unwrap());
        assert_eq!(parse_channel_spec("bec:0.2").unwrap().output_size(), 3);
        assert!(matches!(parse_channel_spec("bsc:1.5"), Err(Error::Parse { position: 4, .. })));
        assert!(matches!(parse_channel_spec("bsc:x"), Err(Error::Parse { .. })));
        assert!(matches!(parse_channel_spec("awgn:1"), Err(Error::Parse { position: 0, .. })));
        assert!(matches!(parse_channel_spec("bsc"), Err(Error::Parse { .. })));
    }

    #[test]
    fn matrix_files() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "0.5, 0.25, 0.25\n0.1, 0.1, 0.8").unwrap();
        let w = parse_channel_spec(&format!("matrix:{}", f.path().display())).unwrap();
        assert_eq!((w.input_size(), w.output_size()), (2, 3));

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "0.5,0.4\n0.5,0.5").unwrap();
        let err = parse_channel_spec(&format!("matrix:{}", f.path().display()));
        assert!(matches!(err, Err(Error::InvalidDistribution(_))));

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "0.3333333333333,0.6666666666667").unwrap();
        assert!(parse_channel_spec(&format!("matrix:{}", f.path().display())).is_ok());
    }

    #[test]
    fn grids_and_lists() {
        assert_eq!(parse_grid("0:0.35:0.01").unwrap().len(), 36);
        assert_eq!(parse_grid("0.02:0.3:0.02").unwrap().len(), 15);
        assert!(parse_grid("1:0:0.1").is_err());
        assert_eq!(parse_list::<usize>("32, 48,64").unwrap(), vec![32, 48, 64]);
        assert!(matches!(parse_list::<usize>("1,x"), Err(Error::Parse { position: 2, .. })));
    }
}
