//! Deterministic CSV output: fixed schema version, floats printed with 17
//! significant digits so files are byte-reproducible given (flags, seed).

use std::fmt::Write as _;

pub const SCHEMA_VERSION: &str = "normnet-csv v1";

/// Render a float with 17 significant digits (round-trip exact).
pub fn f17(v: f64) -> String {
    if v == 0.0 {
        return "0.0000000000000000e0".into();
    }
    format!("{v:.16e}")
}

/// A simple line-oriented CSV builder with a version header.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        let mut buf = String::new();
        let _ = writeln!(buf, "# {SCHEMA_VERSION}");
        let _ = writeln!(buf, "{}", columns.join(","));
        Self { buf }
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.buf, "{}", fields.join(","));
    }

    pub fn comment(&mut self, text: &str) {
        let _ = writeln!(self.buf, "# {text}");
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// Parse a comma-separated list of integers.
pub fn parse_u64_list(s: &str) -> anyhow::Result<Vec<u64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| anyhow::anyhow!("bad integer `{t}`: {e}"))
        })
        .collect()
}

/// Parse a comma-separated list of floats.
pub fn parse_f64_list(s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| anyhow::anyhow!("bad number `{t}`: {e}"))
        })
        .collect()
}

/// Parse points: groups separated by commas, coordinates within a group by
/// `:`  (e.g. `0.5:-0.5,0.5:0.5` for two 2-dimensional points).
pub fn parse_points(s: &str, dim: usize) -> anyhow::Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for group in s.split(',') {
        let coords: Vec<f64> = group
            .split(':')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| anyhow::anyhow!("bad coordinate `{t}`: {e}"))
            })
            .collect::<anyhow::Result<_>>()?;
        if coords.len() != dim {
            anyhow::bail!(
                "point `{group}` has {} coordinates, expected {dim}",
                coords.len()
            );
        }
        out.push(coords);
    }
    Ok(out)
}

/// Parse `key=value` specs like `random:seed=7,b=1.5` into (head, pairs).
pub fn parse_spec(s: &str) -> (String, Vec<(String, String)>) {
    let (head, rest) = match s.split_once(':') {
        Some((h, r)) => (h.to_string(), r),
        None => (s.to_string(), ""),
    };
    let pairs = rest
        .split(',')
        .filter(|t| !t.is_empty())
        .filter_map(|t| {
            t.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        })
        .collect();
    (head, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digit_round_trip() {
        for v in [0.125, 1.0 / 3.0, 601302.142082597, 4.3e-28, -0.0625] {
            let s = f17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }

    #[test]
    fn point_parsing() {
        let pts = parse_points("0.5:-0.5,-0.5:0.5", 2).unwrap();
        assert_eq!(pts, vec![vec![0.5, -0.5], vec![-0.5, 0.5]]);
        assert!(parse_points("0.5,1:2", 2).is_err());
    }

    #[test]
    fn spec_parsing() {
        let (head, pairs) = parse_spec("relu-witness:k=2,alpha=0.1");
        assert_eq!(head, "relu-witness");
        assert_eq!(pairs[0], ("k".into(), "2".into()));
        assert_eq!(pairs[1], ("alpha".into(), "0.1".into()));
    }
}
