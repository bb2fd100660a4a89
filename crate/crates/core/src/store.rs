//! Persistence: the binary table format and the text formats for matrices
//! and words.
//!
//! Binary layout, all integers little-endian:
//!
//! | field | size |
//! |---|---|
//! | magic `SO6LUT01` | 8 |
//! | format version | u32 |
//! | signature fingerprint | u64 |
//! | equivalence variant (0 = all signed permutations) | u8 |
//! | root matrix, column-major packed entries | 36 × u64 |
//! | layer count `L` | u64 |
//! | records per layer | L × u64 |
//! | records, layer by layer | 301 bytes each |
//! | CRC-32 of everything above | u32 |
//!
//! A record is the canonical matrix (36 × u64, column-major), the generator
//! id (u8, `0xFF` for the root) and the parent's position in the previous
//! layer (u64). Records within a layer are sorted by their packed words.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::canon::{canonicalize, fingerprint};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::gens::{apply_gen, GenIndex, PAIR_COUNT};
use crate::lut::{Lut, Node, ROOT_GEN};
use crate::matrix::{So6Matrix, LEN};
use crate::perm::{SignedPerm, DIM};
use crate::word::Word;

pub const MAGIC: &[u8; 8] = b"SO6LUT01";
pub const VERSION: u32 = 1;
/// Equivalence under all signed permutations on both sides.
pub const VARIANT_SIGNED_PERMS: u8 = 0;
pub const RECORD_LEN: usize = LEN * 8 + 1 + 8;
const HEADER_FIXED: usize = 8 + 4 + 8 + 1 + LEN * 8 + 8;

/// How much of a loaded table to re-check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Verify {
    /// Structural checks only.
    None,
    /// Full checks on roughly this fraction of records.
    Sample(f64),
    All,
}

impl Default for Verify {
    fn default() -> Self {
        Verify::Sample(0.01)
    }
}

/// Serializes a table. Equal tables give identical bytes.
pub fn lut_to_bytes(lut: &Lut) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_FIXED + 8 * lut.layers().len() + RECORD_LEN * lut.len() + 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&fingerprint().to_le_bytes());
    out.push(VARIANT_SIGNED_PERMS);
    put_matrix(&mut out, lut.root());
    out.extend_from_slice(&(lut.layers().len() as u64).to_le_bytes());
    for l in lut.layers() {
        out.extend_from_slice(&(l.len() as u64).to_le_bytes());
    }
    for l in lut.layers() {
        for n in l {
            put_matrix(&mut out, &n.canon);
            out.push(n.gen);
            out.extend_from_slice(&n.parent.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

fn put_matrix(out: &mut Vec<u8>, m: &So6Matrix) {
    for d in m.entries() {
        out.extend_from_slice(&d.to_bits().to_le_bytes());
    }
}

/// Writes through a temporary file so a failed save leaves nothing behind.
pub fn save_lut(lut: &Lut, path: &Path) -> Result<()> {
    let bytes = lut_to_bytes(lut);
    let tmp = path.with_extension("partial");
    let res = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(res?)
}

pub fn load_lut(path: &Path, verify: Verify) -> Result<Lut> {
    lut_from_bytes(&fs::read(path)?, verify)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, at: usize, msg: impl Into<String>) -> Error {
        Error::Format { offset: at as u64, msg: msg.into() }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(self.err(self.pos, format!("truncated while reading {what}")));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn matrix(&mut self, what: &str) -> Result<So6Matrix> {
        let mut e = [Dyadic::ZERO; LEN];
        for x in e.iter_mut() {
            let at = self.pos;
            let bits = self.u64(what)?;
            *x = Dyadic::from_bits(bits).map_err(|err| self.err(at, format!("{what}: {err}")))?;
        }
        Ok(So6Matrix::from_entries(e))
    }
}

/// Parses and checks a serialized table. Any failure is reported with the
/// byte offset of the offending field or record.
pub fn lut_from_bytes(buf: &[u8], verify: Verify) -> Result<Lut> {
    let lut = parse(buf, verify)?;
    if let Err(e) = check_crc(buf) {
        // the sampled records were clean: check them all to locate the damage
        if verify != Verify::All {
            parse(buf, Verify::All)?;
        }
        return Err(e);
    }
    Ok(lut)
}

fn check_crc(buf: &[u8]) -> Result<()> {
    let body = buf.len() - 4;
    let want = u32::from_le_bytes(buf[body..].try_into().unwrap());
    if crc32fast::hash(&buf[..body]) != want {
        return Err(Error::Format { offset: body as u64, msg: "checksum mismatch".into() });
    }
    Ok(())
}

fn parse(buf: &[u8], verify: Verify) -> Result<Lut> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(8, "magic")? != MAGIC {
        return Err(r.err(0, "bad magic"));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(r.err(8, format!("unsupported format version {version}")));
    }
    let fp = r.u64("fingerprint")?;
    if fp != fingerprint() {
        return Err(r.err(12, "signature fingerprint does not match this build"));
    }
    let variant = r.u8("variant")?;
    if variant != VARIANT_SIGNED_PERMS {
        return Err(r.err(20, format!("unknown equivalence variant {variant}")));
    }
    let root_at = r.pos;
    let root = r.matrix("root")?;
    root.validate().map_err(|e| r.err(root_at, format!("root: {e}")))?;
    let count_at = r.pos;
    let nlayers = r.u64("layer count")?;
    if nlayers == 0 || nlayers > 4096 {
        return Err(r.err(count_at, format!("implausible layer count {nlayers}")));
    }
    let mut sizes = Vec::with_capacity(nlayers as usize);
    let mut total: u64 = 0;
    for d in 0..nlayers {
        let at = r.pos;
        let n = r.u64("layer size")?;
        if (d == 0 && n != 1) || (d > 0 && n == 0) {
            return Err(r.err(at, format!("layer {d} has {n} records")));
        }
        total = total.saturating_add(n);
        sizes.push(n as usize);
    }
    let need = (total as u128) * RECORD_LEN as u128 + 4;
    if (buf.len() - r.pos) as u128 != need {
        return Err(r.err(
            r.pos.min(buf.len()),
            format!("expected {need} bytes of records and checksum, found {}", buf.len() - r.pos),
        ));
    }

    let stride = match verify {
        Verify::None => usize::MAX,
        Verify::All => 1,
        Verify::Sample(f) if f <= 0.0 => usize::MAX,
        Verify::Sample(f) => ((1.0 / f).round() as usize).max(1),
    };
    let mut layers: Vec<Vec<Node>> = Vec::with_capacity(sizes.len());
    let mut seen = 0usize;
    for (d, &n) in sizes.iter().enumerate() {
        let mut layer: Vec<Node> = Vec::with_capacity(n);
        for i in 0..n {
            let at = r.pos;
            let canon = r.matrix("record")?;
            let gen = r.u8("generator")?;
            let parent = r.u64("parent")?;
            let bad = |msg: String| Error::Format { offset: at as u64, msg: format!("layer {d} record {i}: {msg}") };
            if d == 0 {
                if gen != ROOT_GEN || parent != 0 {
                    return Err(bad("root record has a parent".into()));
                }
            } else if gen as usize >= PAIR_COUNT || parent as usize >= layers[d - 1].len() {
                return Err(bad(format!("generator {gen} or parent {parent} out of range")));
            }
            let node = Node { canon, gen, parent };
            if let Some(prev) = layer.last() {
                if prev.canon.cmp_words(&node.canon) != std::cmp::Ordering::Less {
                    // either neighbour may be the damaged one
                    let prev_at = (at - RECORD_LEN) as u64;
                    if let Err(m) = check_record(prev, d, &layers, &root) {
                        return Err(Error::Format { offset: prev_at, msg: format!("layer {d} record {}: {m}", i - 1) });
                    }
                    check_record(&node, d, &layers, &root).map_err(bad)?;
                    return Err(Error::Format {
                        offset: prev_at,
                        msg: format!("layer {d} records {} and {i} are not in canonical order", i - 1),
                    });
                }
            }
            if d == 0 || seen.is_multiple_of(stride) {
                check_record(&node, d, &layers, &root).map_err(bad)?;
            }
            seen += 1;
            layer.push(node);
        }
        layers.push(layer);
    }
    let lut = Lut::from_layers(root, layers);
    if lut.index_len() != lut.len() {
        return Err(Error::Integrity("index size differs from record count".into()));
    }
    Ok(lut)
}

fn check_record(node: &Node, d: usize, layers: &[Vec<Node>], root: &So6Matrix) -> std::result::Result<(), String> {
    node.canon.validate().map_err(|e| e.to_string())?;
    let cf = canonicalize(&node.canon);
    if cf.matrix != node.canon {
        return Err("matrix is not in canonical form".into());
    }
    if d == 0 {
        if canonicalize(root).matrix != node.canon {
            return Err("root record is not the canonical root".into());
        }
        return Ok(());
    }
    let g = GenIndex::from_id(node.gen, true).ok_or("bad generator")?;
    let back = apply_gen(g, &node.canon).map_err(|e| e.to_string())?;
    if canonicalize(&back).matrix != layers[d - 1][node.parent as usize].canon {
        return Err("generator does not lead back to the parent".into());
    }
    Ok(())
}

/// Every record, checked in full. Returns the number of records checked.
pub fn verify_lut(lut: &Lut) -> Result<usize> {
    let mut n = 0;
    for (d, layer) in lut.layers().iter().enumerate() {
        for (i, node) in layer.iter().enumerate() {
            check_record(node, d, lut.layers(), lut.root())
                .map_err(|m| Error::Integrity(format!("layer {d} record {i}: {m}")))?;
            n += 1;
        }
    }
    Ok(n)
}

/// Six lines of six `a,b,c` entries, row by row.
pub fn format_matrix(m: &So6Matrix) -> String {
    let mut s = String::new();
    for r in 0..DIM {
        let row: Vec<String> = m.row(r).iter().map(|x| x.to_string()).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

/// Inverse of [`format_matrix`]. Blank lines and `#` comments are skipped.
/// The matrix must be exactly orthogonal with reduced entries.
pub fn parse_matrix(text: &str) -> Result<So6Matrix> {
    let mut rows = Vec::with_capacity(DIM);
    let mut last_line = 0;
    for (ln, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        last_line = ln + 1;
        if rows.len() == DIM {
            return Err(Error::Syntax { line: ln + 1, col: 1, msg: "more than six rows".into() });
        }
        let mut row = Vec::with_capacity(DIM);
        let mut col = 0;
        for tok in content.split_whitespace() {
            let start = content[col..].find(tok).map_or(col, |p| col + p);
            col = start + tok.len();
            let x: Dyadic = tok.parse().map_err(|e| Error::Syntax {
                line: ln + 1,
                col: start + 1,
                msg: format!("entry `{tok}`: {e}"),
            })?;
            row.push(x);
        }
        if row.len() != DIM {
            return Err(Error::Syntax {
                line: ln + 1,
                col: 1,
                msg: format!("expected 6 entries, found {}", row.len()),
            });
        }
        rows.push(<[Dyadic; DIM]>::try_from(row).unwrap());
    }
    if rows.len() != DIM {
        return Err(Error::Syntax { line: last_line + 1, col: 1, msg: format!("expected 6 rows, found {}", rows.len()) });
    }
    let m = So6Matrix::from_rows(<[[Dyadic; DIM]; DIM]>::try_from(rows).unwrap());
    m.validate()?;
    Ok(m)
}

/// `G(i,j)`/`X(i,j)` tokens, then `P[...]` when the correction is not the
/// identity or the word is empty.
pub fn format_word(w: &Word) -> String {
    let mut parts: Vec<String> = w.steps.iter().map(|g| g.to_string()).collect();
    if w.correction != SignedPerm::IDENTITY || w.steps.is_empty() {
        let p: Vec<String> = w.correction.perm().iter().map(|x| (x + 1).to_string()).collect();
        let s: Vec<&str> = w.correction.signs().iter().map(|&s| if s > 0 { "+" } else { "-" }).collect();
        parts.push(format!("P[{}; {}]", p.join(" "), s.join(" ")));
    }
    parts.join(" ")
}

struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    text: &'a str,
}

impl Cursor<'_> {
    fn loc(&self) -> (usize, usize) {
        let off = self.chars.get(self.pos).map_or(self.text.len(), |c| c.0);
        let before = &self.text[..off];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, col)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.loc();
        Error::Syntax { line, col, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace() || c == ',') {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn expect(&mut self, want: char) -> Result<()> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected `{want}`"))),
        }
    }

    fn number(&mut self) -> Result<usize> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        let s: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
        s.parse().map_err(|_| self.err("number out of range"))
    }
}

pub fn parse_word(text: &str) -> Result<Word> {
    let mut cur = Cursor { chars: text.char_indices().collect(), pos: 0, text };
    let mut steps = Vec::new();
    let mut correction = SignedPerm::IDENTITY;
    loop {
        cur.skip_ws();
        let Some(c) = cur.peek() else { break };
        match c {
            'G' | 'X' => {
                let at = cur.pos;
                cur.pos += 1;
                cur.expect('(')?;
                let i = cur.number()?;
                cur.expect(',')?;
                let j = cur.number()?;
                cur.expect(')')?;
                if !(1 <= i && i < j && j <= DIM) {
                    cur.pos = at;
                    return Err(cur.err(format!("generator indices ({i},{j}) must satisfy 1 ≤ i < j ≤ 6")));
                }
                steps.push(GenIndex::new(i - 1, j - 1, c == 'X'));
            }
            'P' => {
                cur.pos += 1;
                cur.expect('[')?;
                let mut perm = [0u8; DIM];
                for p in perm.iter_mut() {
                    cur.skip_ws();
                    let v = cur.number()?;
                    if !(1..=DIM).contains(&v) {
                        return Err(cur.err("permutation image out of range"));
                    }
                    *p = (v - 1) as u8;
                }
                cur.skip_ws();
                cur.expect(';')?;
                let mut signs = [1i8; DIM];
                for s in signs.iter_mut() {
                    cur.skip_ws();
                    *s = match cur.peek() {
                        Some('+') => 1,
                        Some('-') | Some('\u{2212}') => -1,
                        _ => return Err(cur.err("expected `+` or `-`")),
                    };
                    cur.pos += 1;
                }
                cur.skip_ws();
                cur.expect(']')?;
                correction = SignedPerm::try_new(perm, signs).ok_or_else(|| cur.err("not a permutation"))?;
                cur.skip_ws();
                if cur.peek().is_some() {
                    return Err(cur.err("trailing input after the correction"));
                }
                break;
            }
            _ => return Err(cur.err(format!("unexpected `{c}`"))),
        }
    }
    Ok(Word::new(steps, correction))
}
