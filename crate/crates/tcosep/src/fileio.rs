//! On-disk formats: `.t3t` tensors and `.idx` index pairs.
//!
//! `.t3t`: a header line `t3 <m> <n> <p>` followed by `m·n·p`
//! whitespace-separated decimal values in storage order (slice-major,
//! row-major within a slice), printed with 17 significant digits so a
//! write/read round trip is bit-exact for finite doubles.
//!
//! `.idx`: two lines, `I: i1,i2,...` and `J: j1,...`, 1-based.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{IndexList, Tensor3};

pub fn write_t3t(path: &Path, t: &Tensor3) -> Result<()> {
    let (m, n, p) = t.dims();
    let mut out = String::with_capacity(m * n * p * 26 + 32);
    writeln!(out, "t3 {m} {n} {p}").expect("string write");
    let data = t.as_slice();
    for slice_rows in data.chunks(n) {
        let mut first = true;
        for v in slice_rows {
            if !first {
                out.push(' ');
            }
            write!(out, "{v:.16e}").expect("string write");
            first = false;
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_t3t(path: &Path) -> Result<Tensor3> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty tensor file".into()))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("t3") {
        return Err(Error::Format(format!("bad magic in header {header:?}")));
    }
    let mut dim = |name: &str| -> Result<usize> {
        let v: usize = parts
            .next()
            .ok_or_else(|| Error::Format(format!("header missing {name}")))?
            .parse()
            .map_err(|_| Error::Format(format!("header field {name} is not an integer")))?;
        if v == 0 {
            return Err(Error::Format(format!("dimension {name} must be positive")));
        }
        Ok(v)
    };
    let m = dim("m")?;
    let n = dim("n")?;
    let p = dim("p")?;
    if parts.next().is_some() {
        return Err(Error::Format("trailing tokens in header".into()));
    }

    let expected = m * n * p;
    let mut data = Vec::with_capacity(expected);
    for line in lines {
        for tok in line.split_whitespace() {
            if data.len() == expected {
                return Err(Error::Format(format!("more than {expected} values in file")));
            }
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::Format(format!("bad value {tok:?} at position {}", data.len())))?;
            data.push(v);
        }
    }
    if data.len() != expected {
        return Err(Error::Format(format!("expected {expected} values, found {}", data.len())));
    }
    Tensor3::new(m, n, p, data)
}

pub fn write_idx(path: &Path, i: &IndexList, j: &IndexList) -> Result<()> {
    let fmt = |list: &IndexList| {
        list.to_one_based().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    };
    fs::write(path, format!("I: {}\nJ: {}\n", fmt(i), fmt(j)))?;
    Ok(())
}

/// Reads 1-based index lists; the caller validates against tensor
/// extents (this file format does not know them).
pub fn read_idx(path: &Path) -> Result<(Vec<usize>, Vec<usize>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let parse_line = |line: Option<&str>, tag: &str| -> Result<Vec<usize>> {
        let line = line.ok_or_else(|| Error::Format(format!("missing {tag} line")))?;
        let rest = line
            .strip_prefix(tag)
            .ok_or_else(|| Error::Format(format!("line does not start with {tag:?}: {line:?}")))?;
        let items: Vec<usize> = rest
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| Error::Format(format!("bad index {s:?} in {tag} line")))
            })
            .collect::<Result<_>>()?;
        if items.is_empty() {
            return Err(Error::Format(format!("empty index list in {tag} line")));
        }
        if items.contains(&0) {
            return Err(Error::Format(format!("indices in {tag} line are 1-based")));
        }
        Ok(items)
    };
    let i = parse_line(lines.next(), "I:")?;
    let j = parse_line(lines.next(), "J:")?;
    Ok((i, j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::testdata::rng_tensor;
    use crate::tensor::Mode;

    fn tmpdir() -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("tcosep-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn tensor_round_trip_is_bit_exact() {
        let t = rng_tensor(4, 3, 5, 7);
        let path = tmpdir().join("round.t3t");
        write_t3t(&path, &t).unwrap();
        let back = read_t3t(&path).unwrap();
        assert_eq!(t.as_slice(), back.as_slice());
        assert_eq!(t.dims(), back.dims());
    }

    #[test]
    fn extreme_values_survive() {
        let t = Tensor3::new(
            1,
            4,
            1,
            vec![f64::MIN_POSITIVE, -1.234567890123456e300, 0.0, -0.0],
        )
        .unwrap();
        let path = tmpdir().join("extreme.t3t");
        write_t3t(&path, &t).unwrap();
        let back = read_t3t(&path).unwrap();
        for (a, b) in t.as_slice().iter().zip(back.as_slice()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn zero_dimension_header_is_rejected() {
        let path = tmpdir().join("bad0.t3t");
        fs::write(&path, "t3 0 2 1\n").unwrap();
        assert!(matches!(read_t3t(&path), Err(Error::Format(_))));
    }

    #[test]
    fn bad_magic_and_counts_are_rejected() {
        let dir = tmpdir();
        let p1 = dir.join("bad1.t3t");
        fs::write(&p1, "tensor 2 2 1\n1 2 3 4\n").unwrap();
        assert!(matches!(read_t3t(&p1), Err(Error::Format(_))));
        let p2 = dir.join("bad2.t3t");
        fs::write(&p2, "t3 2 2 1\n1 2 3\n").unwrap();
        assert!(matches!(read_t3t(&p2), Err(Error::Format(_))));
        let p3 = dir.join("bad3.t3t");
        fs::write(&p3, "t3 2 2 1\n1 2 3 4 5\n").unwrap();
        assert!(matches!(read_t3t(&p3), Err(Error::Format(_))));
        let p4 = dir.join("bad4.t3t");
        fs::write(&p4, "t3 2 2 1\n1 2 nanx 4\n").unwrap();
        assert!(matches!(read_t3t(&p4), Err(Error::Format(_))));
    }

    #[test]
    fn index_round_trip_preserves_order() {
        let i = IndexList::new_distinct(Mode::Horizontal, vec![4, 0, 2], 6).unwrap();
        let j = IndexList::new_distinct(Mode::Lateral, vec![1, 3], 4).unwrap();
        let path = tmpdir().join("pair.idx");
        write_idx(&path, &i, &j).unwrap();
        let (ri, rj) = read_idx(&path).unwrap();
        assert_eq!(ri, vec![5, 1, 3]);
        assert_eq!(rj, vec![2, 4]);
        let back = IndexList::from_one_based(Mode::Horizontal, &ri, 6).unwrap();
        assert_eq!(back.indices(), i.indices());
    }

    #[test]
    fn malformed_idx_is_rejected() {
        let dir = tmpdir();
        let p = dir.join("bad.idx");
        fs::write(&p, "I: 1,2\n").unwrap();
        assert!(read_idx(&p).is_err());
        fs::write(&p, "I: 0,2\nJ: 1\n").unwrap();
        assert!(read_idx(&p).is_err());
        fs::write(&p, "rows: 1\nJ: 1\n").unwrap();
        assert!(read_idx(&p).is_err());
        fs::write(&p, "I: \nJ: 1\n").unwrap();
        assert!(read_idx(&p).is_err());
    }
}
