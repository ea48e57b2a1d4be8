//! Little-endian binary format for factorizations (`.bfac`) and complex
//! vectors.
//!
//! A factorization file holds the magic `BFAC`, a `u32` version, `N: u64`,
//! `L: u32`, `r: u32` and a `u32` factor count, followed by the factors in
//! product order. Each factor stores `kind: u8`, `level: u32` and a `u64`
//! block count; each block stores its row and column offsets (`u64`), its
//! shape (`u32`, `u32`) and column-major `(re, im)` pairs. Middle-factor
//! blocks store only their `r` real weights.

use std::fs;
use std::path::Path;

use crate::butterfly::{
    BlockDiagonalFactor, BlockSparse, ButterflyFactors, DenseBlock, MiddleFactor, TransferFactor,
};
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::partition::DyadicPartition;

const MAGIC: &[u8; 4] = b"BFAC";
const VERSION: u32 = 1;

const KIND_U: u8 = 0;
const KIND_G: u8 = 1;
const KIND_M: u8 = 2;
const KIND_H: u8 = 3;
const KIND_V: u8 = 4;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u32).to_le_bytes());
    }
    fn u64(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u64).to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn header(&mut self, kind: u8, level: usize, blocks: usize) {
        self.u8(kind);
        self.u32(level);
        self.u64(blocks);
    }

    fn dense_factor(&mut self, kind: u8, level: usize, blocks: &[DenseBlock]) {
        self.header(kind, level, blocks.len());
        for b in blocks {
            self.u64(b.row_offset);
            self.u64(b.col_offset);
            self.u32(b.data.nrows());
            self.u32(b.data.ncols());
            for v in b.data.iter() {
                self.f64(v.re);
                self.f64(v.im);
            }
        }
    }
}

/// Encodes `f` in the `.bfac` layout.
pub fn to_bytes(f: &ButterflyFactors) -> Vec<u8> {
    let p = &f.partition;
    let (l, h, r, m) = (p.levels(), p.half(), f.rank, f.middle.m);
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(VERSION as usize);
    w.u64(p.n());
    w.u32(l);
    w.u32(r);
    w.u32(l + 3);
    w.dense_factor(KIND_U, l, f.u_outer.blocks());
    for g in &f.g_chain {
        w.dense_factor(KIND_G, g.level, g.blocks());
    }
    w.header(KIND_M, h, m * m);
    for i in 0..m {
        for j in 0..m {
            w.u64((i * m + j) * r);
            w.u64((j * m + i) * r);
            w.u32(r);
            w.u32(r);
            for &s in &f.middle.weights[i * m + j] {
                w.f64(s);
            }
        }
    }
    for hf in &f.h_chain {
        w.dense_factor(KIND_H, hf.level, hf.blocks());
    }
    w.dense_factor(KIND_V, l, f.v_outer.blocks());
    w.0
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn fail<T>(&self, at: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Format {
            offset: at as u64,
            message: message.into(),
        })
    }

    fn take<const K: usize>(&mut self) -> Result<[u8; K]> {
        match self.buf.get(self.pos..self.pos + K) {
            Some(s) => {
                self.pos += K;
                Ok(s.try_into().expect("slice length"))
            }
            None => self.fail(self.pos, format!("truncated: expected {K} more bytes")),
        }
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take::<1>()?[0])
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take()?) as usize)
    }
    fn u64(&mut self) -> Result<usize> {
        let at = self.pos;
        let v = u64::from_le_bytes(self.take()?);
        usize::try_from(v).or_else(|_| self.fail(at, format!("value {v} does not fit in usize")))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }

    /// Reads a block count and checks that the remaining input can hold it.
    fn count(&mut self, min_bytes_each: usize) -> Result<usize> {
        let at = self.pos;
        let k = self.u64()?;
        if k.saturating_mul(min_bytes_each) > self.buf.len() - self.pos {
            return self.fail(at, format!("block count {k} exceeds the remaining input"));
        }
        Ok(k)
    }

    fn factor_header(&mut self, kind: u8, level: usize) -> Result<usize> {
        let at = self.pos;
        let got = self.u8()?;
        if got != kind {
            return self.fail(at, format!("expected factor kind {kind}, found {got}"));
        }
        let at = self.pos;
        let got = self.u32()?;
        if got != level {
            return self.fail(at, format!("expected level {level}, found {got}"));
        }
        self.count(24)
    }

    fn dense_blocks(
        &mut self,
        kind: u8,
        level: usize,
        dim: (usize, usize),
    ) -> Result<Vec<DenseBlock>> {
        let k = self.factor_header(kind, level)?;
        let mut blocks = Vec::with_capacity(k);
        for _ in 0..k {
            let at = self.pos;
            let (row_offset, col_offset) = (self.u64()?, self.u64()?);
            let (rows, cols) = (self.u32()?, self.u32()?);
            if row_offset.saturating_add(rows) > dim.0 || col_offset.saturating_add(cols) > dim.1 {
                return self.fail(at, "block lies outside its factor");
            }
            if rows.saturating_mul(cols).saturating_mul(16) > self.buf.len() - self.pos {
                return self.fail(self.pos, "truncated block data");
            }
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows * cols {
                data.push(C64::new(self.f64()?, self.f64()?));
            }
            blocks.push(DenseBlock {
                row_offset,
                col_offset,
                data: CMat::from_vec(rows, cols, data),
            });
        }
        Ok(blocks)
    }

    fn transfer(&mut self, kind: u8, level: usize, r: usize, dim: usize) -> Result<TransferFactor> {
        let at = self.pos;
        let f = TransferFactor {
            level,
            rank: r,
            nrows: dim,
            ncols: dim,
            blocks: self.dense_blocks(kind, level, (dim, dim))?,
        };
        f.validate().or_else(|e| self.fail(at, e.to_string()))?;
        Ok(f)
    }

    fn outer(&mut self, kind: u8, l: usize, n: usize, dim: usize) -> Result<BlockDiagonalFactor> {
        let at = self.pos;
        let f = BlockDiagonalFactor {
            nrows: n,
            ncols: dim,
            blocks: self.dense_blocks(kind, l, (n, dim))?,
        };
        f.validate().or_else(|e| self.fail(at, e.to_string()))?;
        Ok(f)
    }

    fn middle(&mut self, h: usize, m: usize, r: usize) -> Result<MiddleFactor> {
        let at = self.pos;
        let k = self.factor_header(KIND_M, h)?;
        if k != m * m {
            return self.fail(
                at,
                format!("middle factor needs {} blocks, found {k}", m * m),
            );
        }
        let mut weights = vec![Vec::new(); m * m];
        for _ in 0..k {
            let at = self.pos;
            let (ro, co, rows, cols) = (self.u64()?, self.u64()?, self.u32()?, self.u32()?);
            let (g, jm_i) = (ro / r, co / r);
            let (i, j) = (g / m, g % m);
            if rows != r
                || cols != r
                || ro % r != 0
                || g >= m * m
                || jm_i != j * m + i
                || co % r != 0
            {
                return self.fail(at, "middle block does not match the block permutation");
            }
            if !weights[g].is_empty() {
                return self.fail(at, "duplicate middle block");
            }
            weights[g] = (0..r).map(|_| self.f64()).collect::<Result<_>>()?;
        }
        let f = MiddleFactor {
            m,
            rank: r,
            weights,
        };
        f.validate().or_else(|e| self.fail(at, e.to_string()))?;
        Ok(f)
    }
}

/// Decodes a `.bfac` image. Every failure is a [`Error::Format`] carrying
/// the byte offset at which the problem was detected.
pub fn from_bytes(buf: &[u8]) -> Result<ButterflyFactors> {
    let mut rd = Reader { buf, pos: 0 };
    if rd.take::<4>().ok().as_ref() != Some(MAGIC) {
        return rd.fail(0, "bad magic, expected BFAC");
    }
    let version = rd.u32()?;
    if version != VERSION as usize {
        return rd.fail(4, format!("unsupported version {version}"));
    }
    let (n, l, r) = (rd.u64()?, rd.u32()?, rd.u32()?);
    let partition = DyadicPartition::with_levels(n, l).or_else(|e| rd.fail(8, e.to_string()))?;
    let side = n / partition.middle_nodes();
    if r == 0 || r > side {
        return rd.fail(20, format!("rank {r} outside [1, {side}]"));
    }
    let at = rd.pos;
    let count = rd.u32()?;
    if count != l + 3 {
        return rd.fail(at, format!("expected {} factors, found {count}", l + 3));
    }
    let (h, dim) = (partition.half(), r << l);
    let u_outer = rd.outer(KIND_U, l, n, dim)?;
    let g_chain = (h..l)
        .rev()
        .map(|lev| rd.transfer(KIND_G, lev, r, dim))
        .collect::<Result<Vec<_>>>()?;
    let middle = rd.middle(h, partition.middle_nodes(), r)?;
    let h_chain = (h..l)
        .map(|lev| rd.transfer(KIND_H, lev, r, dim))
        .collect::<Result<Vec<_>>>()?;
    let v_outer = rd.outer(KIND_V, l, n, dim)?;
    if rd.pos != buf.len() {
        return rd.fail(rd.pos, "trailing bytes after the last factor");
    }
    let f = ButterflyFactors {
        partition,
        rank: r,
        u_outer,
        g_chain,
        middle,
        h_chain,
        v_outer,
    };
    f.validate().or_else(|e| rd.fail(0, e.to_string()))?;
    Ok(f)
}

pub fn save_factors(f: &ButterflyFactors, path: &Path) -> Result<()> {
    fs::write(path, to_bytes(f))?;
    Ok(())
}

pub fn load_factors(path: &Path) -> Result<ButterflyFactors> {
    from_bytes(&fs::read(path)?)
}

/// Writes a `u64` length followed by `(re, im)` pairs.
pub fn save_vector(v: &[C64], path: &Path) -> Result<()> {
    let mut w = Writer(Vec::with_capacity(8 + 16 * v.len()));
    w.u64(v.len());
    for x in v {
        w.f64(x.re);
        w.f64(x.im);
    }
    fs::write(path, w.0)?;
    Ok(())
}

pub fn load_vector(path: &Path) -> Result<Vec<C64>> {
    let buf = fs::read(path)?;
    let mut rd = Reader { buf: &buf, pos: 0 };
    let len = rd.u64()?;
    if len.saturating_mul(16) != buf.len() - 8 {
        return rd.fail(
            0,
            format!(
                "length {len} does not match {} payload bytes",
                buf.len() - 8
            ),
        );
    }
    (0..len)
        .map(|_| Ok(C64::new(rd.f64()?, rd.f64()?)))
        .collect()
}
