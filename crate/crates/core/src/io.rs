//! Plain-text readers and writers for measures, zero sets and CSV dumps.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::decomposition::AnnularDecomposition;
use crate::error::{Error, Result};
use crate::measure::{Atom, Measure};
use crate::metrics::fmt;
use crate::partition::PartitionPiece;
use crate::potential::{Provenance, Zero, ZeroSet};
use crate::slowly_varying::SlowlyVarying;

/// Splits a line into whitespace-separated fields, dropping `#` comments.
/// Returns `None` for blank lines.
fn fields(line: &str) -> Option<Vec<&str>> {
    let body = line.split('#').next().unwrap_or("");
    let f: Vec<&str> = body.split_whitespace().collect();
    (!f.is_empty()).then_some(f)
}

fn parse_f64(s: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("{what} `{s}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse { line, msg: format!("{what} `{s}` is not finite") });
    }
    Ok(v)
}

fn triples<R: BufRead>(r: R) -> Result<Vec<(usize, [String; 3])>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let Some(f) = fields(&line) else { continue };
        if f.len() != 3 {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected 3 fields, found {}", f.len()),
            });
        }
        out.push((i + 1, [f[0].to_owned(), f[1].to_owned(), f[2].to_owned()]));
    }
    Ok(out)
}

/// Reads `re im mass` lines.
pub fn read_measure<R: BufRead>(r: R) -> Result<Measure> {
    let mut atoms = Vec::new();
    for (line, [re, im, mass]) in triples(r)? {
        let pos = Complex64::new(parse_f64(&re, line, "re")?, parse_f64(&im, line, "im")?);
        let mass = parse_f64(&mass, line, "mass")?;
        if mass <= 0.0 {
            return Err(Error::Parse { line, msg: format!("mass {mass} is not positive") });
        }
        atoms.push(Atom::new(pos, mass));
    }
    Measure::new(atoms)
}

pub fn write_measure<W: Write>(m: &Measure, mut w: W) -> Result<()> {
    for a in m {
        writeln!(w, "{} {} {}", fmt(a.pos.re), fmt(a.pos.im), fmt(a.mass))?;
    }
    Ok(())
}

/// Reads `re im multiplicity` lines; zeros are tagged [`Provenance::External`].
pub fn read_zero_set<R: BufRead>(r: R) -> Result<ZeroSet> {
    let mut zeros = Vec::new();
    for (line, [re, im, mult]) in triples(r)? {
        let pos = Complex64::new(parse_f64(&re, line, "re")?, parse_f64(&im, line, "im")?);
        let multiplicity: u32 = mult.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("multiplicity `{mult}` is not a nonnegative integer"),
        })?;
        if multiplicity == 0 {
            return Err(Error::Parse { line, msg: "multiplicity must be positive".into() });
        }
        if pos.norm() == 0.0 {
            return Err(Error::Parse { line, msg: "zero at the origin".into() });
        }
        zeros.push(Zero::new(pos, multiplicity, Provenance::External));
    }
    ZeroSet::new(zeros)
}

/// Writes `re im multiplicity` lines, each followed by its provenance as a comment.
pub fn write_zero_set<W: Write>(f: &ZeroSet, mut w: W) -> Result<()> {
    for z in f.iter() {
        writeln!(w, "{} {} {} # {}", fmt(z.pos.re), fmt(z.pos.im), z.multiplicity, z.tag.as_str())?;
    }
    Ok(())
}

pub fn write_pieces_csv<W: Write>(pieces: &[PartitionPiece], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["sigma_min", "sigma_max", "t_min", "t_max", "mass", "depth"])?;
    for p in pieces {
        let r = &p.rect;
        out.write_record([
            fmt(r.sigma_min),
            fmt(r.sigma_max),
            fmt(r.t_min),
            fmt(r.t_max),
            fmt(p.nu.total_mass()),
            p.depth.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_decomposition_csv<W: Write>(dec: &AnnularDecomposition, psi: &SlowlyVarying, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["k", "R_k", "R_k*psi", "mass_mu1", "mass_mu2_part"])?;
    for s in &dec.steps {
        out.write_record([
            s.k.to_string(),
            fmt(s.r_k),
            fmt(psi.psi1(s.r_k)),
            fmt(s.mu1.total_mass()),
            fmt(s.tail_mass()),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::partition_mass_two;
    use crate::partition::LogRectangle;

    #[test]
    fn reads_measure_with_comments() {
        let text = "# header\n1 0 1.5\n\n  -2.5 3e-1 2 # trailing\n";
        let m = read_measure(text.as_bytes()).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.total_mass(), 3.5);
    }

    #[test]
    fn parse_errors_name_the_line() {
        for (text, line) in [
            ("1 0 1\n1 0\n", 2),
            ("1 0 1\n# c\nx 0 1\n", 3),
            ("1 0 -1\n", 1),
            ("1 0 0\n", 1),
            ("nan 0 1\n", 1),
            ("1 inf 1\n", 1),
        ] {
            match read_measure(text.as_bytes()) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn zero_set_round_trip() {
        let f = ZeroSet::new(vec![
            Zero::new(Complex64::new(0.1, -3.0), 2, Provenance::Pair),
            Zero::new(Complex64::new(10.0, 0.0), 5, Provenance::HeavyTail),
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_zero_set(&f, &mut buf).unwrap();
        let back = read_zero_set(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in f.iter().zip(back.iter()) {
            assert_eq!((a.pos, a.multiplicity), (b.pos, b.multiplicity));
        }
        assert!(read_zero_set("1 0 0\n".as_bytes()).is_err());
        assert!(read_zero_set("0 0 1\n".as_bytes()).is_err());
        assert!(read_zero_set("1 0 1.5\n".as_bytes()).is_err());
    }

    #[test]
    fn pieces_csv() {
        let nu = Measure::new(vec![
            Atom::new(Complex64::new(0.1, 0.1), 1.0),
            Atom::new(Complex64::new(0.2, 0.2), 1.0),
            Atom::new(Complex64::new(0.8, 0.8), 1.0),
            Atom::new(Complex64::new(0.9, 0.9), 1.0),
        ])
        .unwrap();
        let pieces = partition_mass_two(&LogRectangle::new(0.0, 1.0, 0.0, 1.0).unwrap(), &nu).unwrap();
        let mut buf = Vec::new();
        write_pieces_csv(&pieces, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "sigma_min,sigma_max,t_min,t_max,mass,depth");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0.0,0.5,0.0,1.0,2.0,1"), "{}", lines[1]);
    }
}
