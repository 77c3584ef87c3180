//! Little-endian binary archives for snapshots, POD bases and reduced operators.
//!
//! Every archive starts with an 8-byte magic string, a `u32` version and a
//! `u64`-length-prefixed UTF-8 metadata block (free text chosen by the
//! writer), followed by kind-specific sizes and `f64` payloads. The layouts are
//! listed in the README.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fem::NonlinearForm;
use crate::numerics::DenseMatrix;
use crate::pod::{PodBasis, SnapshotSet};
use crate::rom::RomOperators;

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"NSROMSNP";
pub const BASIS_MAGIC: &[u8; 8] = b"NSROMPOD";
pub const OPERATORS_MAGIC: &[u8; 8] = b"NSROMROP";
pub const VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn new(magic: &[u8; 8], meta: &str) -> Self {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(magic);
        w.u32(VERSION);
        w.u64(meta.len() as u64);
        w.0.extend_from_slice(meta.as_bytes());
        w
    }

    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }

    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn f64s(&mut self, v: &[f64]) {
        self.0.reserve(8 * v.len());
        for x in v {
            self.0.extend_from_slice(&x.to_le_bytes());
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    /// Checks magic and version and returns the metadata text.
    fn open(buf: &'a [u8], magic: &[u8; 8]) -> Result<(Self, String)> {
        let mut r = Reader { buf, pos: 0 };
        if r.take(8, "magic")? != magic {
            return Err(Error::format("magic", format!("expected {:?}", String::from_utf8_lossy(magic))));
        }
        let v = r.u32("version")?;
        if v != VERSION {
            return Err(Error::format("version", format!("unsupported version {v} (expected {VERSION})")));
        }
        let len = r.len("metadata length", 1)?;
        let meta = std::str::from_utf8(r.take(len, "metadata")?)
            .map_err(|_| Error::format("metadata", "not valid UTF-8"))?
            .to_string();
        Ok((r, meta))
    }

    fn take(&mut self, n: usize, field: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::format(field, "archive is truncated"));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, field: &str) -> Result<u8> {
        Ok(self.take(1, field)?[0])
    }

    fn u32(&mut self, field: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, field)?.try_into().unwrap()))
    }

    fn u64(&mut self, field: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, field)?.try_into().unwrap()))
    }

    /// A count whose payload of `elem` bytes per item must fit in the rest of the buffer.
    fn len(&mut self, field: &str, elem: usize) -> Result<usize> {
        let v = self.u64(field)?;
        let rest = (self.buf.len() - self.pos) as u64;
        if v.checked_mul(elem as u64).is_none_or(|b| b > rest) {
            return Err(Error::format(field, format!("value {v} exceeds the archive size")));
        }
        Ok(v as usize)
    }

    fn f64(&mut self, field: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, field)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize, field: &str) -> Result<Vec<f64>> {
        let bytes = n.checked_mul(8).ok_or_else(|| Error::format(field, "size overflow"))?;
        let raw = self.take(bytes, field)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn finish(self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::format(
                "trailing",
                format!("{} unexpected bytes after the payload", self.buf.len() - self.pos),
            ));
        }
        Ok(())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn encode_snapshots(set: &SnapshotSet, meta: &str) -> Vec<u8> {
    let mut w = Writer::new(SNAPSHOT_MAGIC, meta);
    w.u64(set.n_dofs() as u64);
    w.u64(set.len() as u64);
    w.f64s(set.times());
    for c in set.columns() {
        w.f64s(c);
    }
    w.0
}

pub fn decode_snapshots(buf: &[u8]) -> Result<(SnapshotSet, String)> {
    let (mut r, meta) = Reader::open(buf, SNAPSHOT_MAGIC)?;
    let n = r.len("n_dofs", 0)?;
    let count = r.len("count", 8)?;
    let times = r.f64s(count, "times")?;
    if count > 0 && n.checked_mul(count).is_none_or(|b| b.saturating_mul(8) != buf.len() - r.pos) {
        return Err(Error::format("n_dofs", "payload size does not match n_dofs x count"));
    }
    let mut cols = Vec::with_capacity(count);
    for _ in 0..count {
        cols.push(r.f64s(n, "snapshots")?);
    }
    r.finish()?;
    let set = SnapshotSet::from_columns(n, times, cols).map_err(|e| Error::format("times", e.to_string()))?;
    Ok((set, meta))
}

pub fn write_snapshots(path: &Path, set: &SnapshotSet, meta: &str) -> Result<()> {
    write_file(path, &encode_snapshots(set, meta))
}

pub fn read_snapshots(path: &Path) -> Result<(SnapshotSet, String)> {
    decode_snapshots(&read_file(path)?)
}

/// A POD basis together with the state the reduced model starts from.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisArchive {
    pub basis: PodBasis,
    /// Time and velocity of the first snapshot.
    pub reference: Option<(f64, Vec<f64>)>,
    pub meta: String,
}

pub fn encode_basis(a: &BasisArchive) -> Vec<u8> {
    let b = &a.basis;
    let mut w = Writer::new(BASIS_MAGIC, &a.meta);
    w.u64(b.n_dofs() as u64);
    w.u64(b.rank() as u64);
    w.u64(b.spectrum.len() as u64);
    w.u64(b.n_snapshots as u64);
    w.u8(b.mean.is_some() as u8 | (a.reference.is_some() as u8) << 1);
    w.f64s(&b.eigenvalues);
    w.f64s(&b.grad_norms);
    w.f64s(&b.spectrum);
    if let Some(m) = &b.mean {
        w.f64s(m);
    }
    if let Some((t, u)) = &a.reference {
        w.f64s(&[*t]);
        w.f64s(u);
    }
    for m in &b.modes {
        w.f64s(m);
    }
    w.0
}

pub fn decode_basis(buf: &[u8]) -> Result<BasisArchive> {
    let (mut r, meta) = Reader::open(buf, BASIS_MAGIC)?;
    let n = r.len("n_dofs", 8)?;
    let rank = r.len("rank", 16)?;
    let sl = r.len("spectrum length", 8)?;
    let n_snapshots = r.u64("snapshot count")? as usize;
    let flags = r.u8("flags")?;
    if flags > 3 {
        return Err(Error::format("flags", format!("unknown flag bits {flags:#04x}")));
    }
    let eigenvalues = r.f64s(rank, "eigenvalues")?;
    let grad_norms = r.f64s(rank, "gradient norms")?;
    let spectrum = r.f64s(sl, "spectrum")?;
    let mean = if flags & 1 != 0 { Some(r.f64s(n, "mean")?) } else { None };
    let reference = if flags & 2 != 0 {
        let t = r.f64("reference time")?;
        Some((t, r.f64s(n, "reference field")?))
    } else {
        None
    };
    let mut modes = Vec::with_capacity(rank);
    for _ in 0..rank {
        modes.push(r.f64s(n, "modes")?);
    }
    r.finish()?;
    if eigenvalues.windows(2).any(|w| w[1] > w[0]) || eigenvalues.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::format("eigenvalues", "must be positive and descending"));
    }
    Ok(BasisArchive {
        basis: PodBasis { modes, eigenvalues, grad_norms, mean, spectrum, n_snapshots },
        reference,
        meta,
    })
}

pub fn write_basis(path: &Path, a: &BasisArchive) -> Result<()> {
    write_file(path, &encode_basis(a))
}

pub fn read_basis(path: &Path) -> Result<BasisArchive> {
    decode_basis(&read_file(path)?)
}

pub fn encode_operators(ops: &RomOperators, meta: &str) -> Vec<u8> {
    let mut w = Writer::new(OPERATORS_MAGIC, meta);
    w.u64(ops.r as u64);
    w.u8(ops.form.code());
    w.u8(ops.centered as u8);
    w.f64s(&[ops.nu]);
    w.f64s(ops.a.as_slice());
    w.f64s(&ops.tensor_ijk());
    w.f64s(ops.l1.as_slice());
    w.f64s(ops.l2.as_slice());
    w.f64s(&ops.c);
    w.f64s(&ops.g);
    w.0
}

pub fn decode_operators(buf: &[u8]) -> Result<(RomOperators, String)> {
    let (mut r, meta) = Reader::open(buf, OPERATORS_MAGIC)?;
    let n = r.len("r", 8)?;
    let code = r.u8("form")?;
    let form =
        NonlinearForm::from_code(code).ok_or_else(|| Error::format("form", format!("unknown form code {code}")))?;
    let centered = match r.u8("centered")? {
        0 => false,
        1 => true,
        v => return Err(Error::format("centered", format!("invalid flag {v}"))),
    };
    let nu = r.f64("nu")?;
    let n2 = n.checked_mul(n).ok_or_else(|| Error::format("r", "too large"))?;
    let n3 = n2.checked_mul(n).ok_or_else(|| Error::format("r", "too large"))?;
    let mat = |r: &mut Reader, field: &str| -> Result<DenseMatrix> {
        DenseMatrix::from_row_major(n, n, r.f64s(n2, field)?).map_err(|e| Error::format(field, e.to_string()))
    };
    let a = mat(&mut r, "A")?;
    let t = r.f64s(n3, "T")?;
    let l1 = mat(&mut r, "L1")?;
    let l2 = mat(&mut r, "L2")?;
    let c = r.f64s(n, "c")?;
    let g = r.f64s(n, "g")?;
    r.finish()?;
    let ops = RomOperators::from_parts(form, nu, centered, a, &t, l1, l2, c, g)?;
    Ok((ops, meta))
}

pub fn write_operators(path: &Path, ops: &RomOperators, meta: &str) -> Result<()> {
    write_file(path, &encode_operators(ops, meta))
}

pub fn read_operators(path: &Path) -> Result<(RomOperators, String)> {
    decode_operators(&read_file(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_set() -> SnapshotSet {
        SnapshotSet::from_columns(3, vec![0.0, 0.5], vec![vec![1.0, -2.0, 3.5], vec![0.25, f64::MIN_POSITIVE, -0.0]])
            .unwrap()
    }

    #[test]
    fn snapshot_round_trip() {
        let set = sample_set();
        let bytes = encode_snapshots(&set, "problem = \"x\"\n");
        assert_eq!(&bytes[..8], SNAPSHOT_MAGIC);
        let (back, meta) = decode_snapshots(&bytes).unwrap();
        assert_eq!(back, set);
        assert_eq!(meta, "problem = \"x\"\n");
        // exact layout: header, times, columns
        assert_eq!(bytes.len(), 8 + 4 + 8 + meta.len() + 16 + 2 * 8 + 6 * 8);
    }

    #[test]
    fn corrupt_headers_name_the_field() {
        let bytes = encode_snapshots(&sample_set(), "");
        let field = |b: &[u8]| match decode_snapshots(b) {
            Err(Error::Format { field, .. }) => field,
            other => panic!("{other:?}"),
        };
        let mut b = bytes.clone();
        b[0] = b'X';
        assert_eq!(field(&b), "magic");
        let mut b = bytes.clone();
        b[8] = 9;
        assert_eq!(field(&b), "version");
        let mut b = bytes.clone();
        b[20..28].copy_from_slice(&(1u64 << 40).to_le_bytes());
        assert_eq!(field(&b), "n_dofs");
        let mut b = bytes.clone();
        b[28..36].copy_from_slice(&(1u64 << 50).to_le_bytes());
        assert_eq!(field(&b), "count");
        assert_eq!(field(&bytes[..bytes.len() - 3]), "n_dofs");
        let mut b = bytes.clone();
        b.push(0);
        assert_eq!(field(&b), "n_dofs");
        assert_eq!(field(&bytes[..5]), "magic");
    }

    #[test]
    fn basis_round_trip() {
        let basis = PodBasis {
            modes: vec![vec![1.0, 0.0], vec![0.0, 2.0]],
            eigenvalues: vec![3.0, 1.0],
            grad_norms: vec![0.5, 7.0],
            mean: Some(vec![0.1, 0.2]),
            spectrum: vec![3.0, 1.0, 0.0],
            n_snapshots: 3,
        };
        let a = BasisArchive { basis, reference: Some((5.0, vec![1.0, 1.0])), meta: "k = 1".into() };
        assert_eq!(decode_basis(&encode_basis(&a)).unwrap(), a);
        let b = BasisArchive { reference: None, basis: PodBasis { mean: None, ..a.basis.clone() }, ..a.clone() };
        assert_eq!(decode_basis(&encode_basis(&b)).unwrap(), b);
        let mut bytes = encode_basis(&a);
        let flag_pos = 8 + 4 + 8 + 5 + 32;
        bytes[flag_pos] = 9;
        assert!(matches!(decode_basis(&bytes), Err(Error::Format { field, .. }) if field == "flags"));
    }

    #[test]
    fn operators_round_trip() {
        let r = 2;
        let a = DenseMatrix::from_row_major(r, r, vec![1.0, 0.1, 0.1, 2.0]).unwrap();
        let t: Vec<f64> = (0..8).map(|v| v as f64 * 0.5).collect();
        let l = DenseMatrix::from_row_major(r, r, vec![0.0, 1.0, -1.0, 0.0]).unwrap();
        let ops = RomOperators::from_parts(
            NonlinearForm::Rotational,
            1e-3,
            true,
            a,
            &t,
            l.clone(),
            l,
            vec![1.0, 2.0],
            vec![0.0, 0.0],
        )
        .unwrap();
        let (back, meta) = decode_operators(&encode_operators(&ops, "m")).unwrap();
        assert_eq!(back, ops);
        assert_eq!(meta, "m");
        let mut bytes = encode_operators(&ops, "m");
        bytes[8 + 4 + 8 + 1 + 8] = 17;
        assert!(matches!(decode_operators(&bytes), Err(Error::Format { field, .. }) if field == "form"));
    }
}
