//! One measurement per JSON line.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{HarnessError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub schema: u32,
    pub protocol: String,
    /// Seed of the disorder instance (or parameter draw) the row belongs to.
    pub seed: u64,
    pub l: usize,
    pub g: f64,
    /// Initial bitstring in hex, qubit 0 as the most significant bit; empty
    /// when the measurement has no single initial bitstring.
    pub bits: String,
    pub qubit: Option<usize>,
    pub cycle: Option<usize>,
    pub name: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub aux: BTreeMap<String, f64>,
}

impl ResultRow {
    pub fn new(protocol: &str, seed: u64, l: usize, g: f64, name: &str, value: f64) -> Self {
        ResultRow {
            schema: SCHEMA_VERSION,
            protocol: protocol.to_string(),
            seed,
            l,
            g,
            bits: String::new(),
            qubit: None,
            cycle: None,
            name: name.to_string(),
            value,
            aux: BTreeMap::new(),
        }
    }

    pub fn bits(mut self, bits: &[u8]) -> Self {
        self.bits = bits_to_hex(bits);
        self
    }

    pub fn qubit(mut self, q: usize) -> Self {
        self.qubit = Some(q);
        self
    }

    pub fn cycle(mut self, t: usize) -> Self {
        self.cycle = Some(t);
        self
    }

    pub fn aux(mut self, key: &str, value: f64) -> Self {
        self.aux.insert(key.to_string(), value);
        self
    }

    /// Total order used for the canonical row order. Values take part so
    /// that the order is total even for duplicate keys.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        (&self.protocol, self.l)
            .cmp(&(&other.protocol, other.l))
            .then(self.g.total_cmp(&other.g))
            .then((self.seed, &self.bits, self.qubit, self.cycle, &self.name).cmp(&(
                other.seed,
                &other.bits,
                other.qubit,
                other.cycle,
                &other.name,
            )))
            .then(self.value.total_cmp(&other.value))
    }
}

pub fn canonical_sort(rows: &mut [ResultRow]) {
    rows.sort_by(ResultRow::canonical_cmp);
}

/// Hex digits of a bitstring, qubit 0 as the most significant bit, padded
/// to `⌈L/4⌉` digits.
pub fn bits_to_hex(bits: &[u8]) -> String {
    let width = bits.len().div_ceil(4);
    let mut digits = Vec::with_capacity(width);
    let pad = 4 * width - bits.len();
    let padded: Vec<u8> = std::iter::repeat_n(0u8, pad).chain(bits.iter().copied()).collect();
    for chunk in padded.chunks(4) {
        let v = chunk.iter().fold(0u32, |acc, b| (acc << 1) | u32::from(*b));
        digits.push(std::char::from_digit(v, 16).unwrap_or('0'));
    }
    digits.into_iter().collect()
}

/// Inverse of [`bits_to_hex`] for a chain of `l` qubits.
pub fn hex_to_bits(hex: &str, l: usize) -> Result<Vec<u8>> {
    let mut bits = Vec::with_capacity(4 * hex.len());
    for c in hex.chars() {
        let v = c.to_digit(16).ok_or_else(|| HarnessError::Config(format!("bad hex digit {c:?}")))?;
        bits.extend((0..4).rev().map(|k| ((v >> k) & 1) as u8));
    }
    if bits.len() < l {
        let mut front = vec![0u8; l - bits.len()];
        front.extend(bits);
        return Ok(front);
    }
    let extra = bits.len() - l;
    if bits[..extra].iter().any(|b| *b != 0) {
        return Err(HarnessError::Config(format!("0x{hex} does not fit in {l} qubits")));
    }
    Ok(bits[extra..].to_vec())
}

/// Serializes rows, one per line. The caller decides the order.
pub fn to_jsonl(rows: &[ResultRow]) -> Result<String> {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_jsonl(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in rows {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<ResultRow>> {
    let reader = BufReader::new(File::open(path)?);
    let mut rows = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: ResultRow = serde_json::from_str(&line)
            .map_err(|e| HarnessError::Analysis(format!("{} line {}: {e}", path.display(), n + 1)))?;
        if row.schema != SCHEMA_VERSION {
            return Err(HarnessError::Analysis(format!("{} line {}: schema {} unsupported", path.display(), n + 1, row.schema)));
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trip() {
        assert_eq!(bits_to_hex(&[1, 0, 1, 1, 0]), "16");
        assert_eq!(bits_to_hex(&[0, 1, 0, 1, 0, 1, 0, 1]), "55");
        assert_eq!(hex_to_bits("16", 5).unwrap(), vec![1, 0, 1, 1, 0]);
        assert_eq!(hex_to_bits("3", 5).unwrap(), vec![0, 0, 0, 1, 1]);
        assert!(hex_to_bits("ff", 5).is_err());
        for v in 0..64u32 {
            let bits: Vec<u8> = (0..6).rev().map(|k| ((v >> k) & 1) as u8).collect();
            assert_eq!(hex_to_bits(&bits_to_hex(&bits), 6).unwrap(), bits);
        }
    }

    #[test]
    fn json_line_round_trip() {
        let row = ResultRow::new("echo", 9, 5, 0.97, "a0-squared", 0.1 + 0.2).bits(&[0, 1, 1, 0, 1]).qubit(2).cycle(3).aux("flagged", 0.0);
        let text = to_jsonl(std::slice::from_ref(&row)).unwrap();
        let back: ResultRow = serde_json::from_str(text.trim()).unwrap();
        assert_eq!(back, row);
    }
}
