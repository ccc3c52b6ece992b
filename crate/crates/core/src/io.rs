// SPDX-License-Identifier: Apache-2.0

//! Line-oriented text formats.
//!
//! ```text
//! ilp 3 2 binary          sets 3 2
//! b 1 1 2                 set 1 0 1
//! col 4 0:1 2:2           set 2 2
//! col 1 1:1 2:1
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Hidden metadata of
//! generated instances goes to a separate `key value...` file.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::hard::{HardInstance, HardKind, HardMeta, Side};
use crate::instance::{CoveringInstance, SetSystem, SparseColumn, VariableKind};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::Parse { line, msg: msg.into() })
}

/// Either kind of instance file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceFile {
    Ilp(CoveringInstance),
    Sets(SetSystem),
}

impl InstanceFile {
    pub fn to_ilp(&self) -> CoveringInstance {
        match self {
            InstanceFile::Ilp(i) => i.clone(),
            InstanceFile::Sets(s) => s.to_ilp(),
        }
    }

    pub fn as_sets(&self) -> Option<&SetSystem> {
        match self {
            InstanceFile::Sets(s) => Some(s),
            InstanceFile::Ilp(_) => None,
        }
    }
}

impl From<CoveringInstance> for InstanceFile {
    fn from(i: CoveringInstance) -> Self {
        InstanceFile::Ilp(i)
    }
}

impl From<SetSystem> for InstanceFile {
    fn from(s: SetSystem) -> Self {
        InstanceFile::Sets(s)
    }
}

fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.split_whitespace().collect()))
}

fn num<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T, FormatError> {
    if tok.starts_with('-') {
        return perr(line, format!("negative {what} `{tok}`"));
    }
    tok.parse()
        .or_else(|_| perr(line, format!("invalid {what} `{tok}`")))
}

fn row(line: usize, tok: &str, n: usize) -> Result<usize, FormatError> {
    let r: usize = num(line, tok, "row index")?;
    if r >= n {
        return perr(line, format!("row {r} out of range for n = {n}"));
    }
    Ok(r)
}

pub fn parse_instance(text: &str) -> Result<InstanceFile, FormatError> {
    let mut it = lines(text);
    let Some((hl, header)) = it.next() else {
        return perr(0, "empty input");
    };
    match header.first().copied() {
        Some("ilp") => parse_ilp(hl, &header, it),
        Some("sets") => parse_sets(hl, &header, it),
        _ => perr(hl, "expected header `ilp n m kind` or `sets n m`"),
    }
}

fn parse_ilp<'a>(
    hl: usize,
    header: &[&str],
    mut it: impl Iterator<Item = (usize, Vec<&'a str>)>,
) -> Result<InstanceFile, FormatError> {
    if header.len() != 4 {
        return perr(hl, "expected `ilp n m binary|integer`");
    }
    let n: usize = num(hl, header[1], "n")?;
    let m: usize = num(hl, header[2], "m")?;
    let kind: VariableKind = header[3].parse().or_else(|e: String| perr(hl, e))?;
    let Some((bl, btoks)) = it.next() else {
        return perr(hl, "missing `b` line");
    };
    if btoks[0] != "b" || btoks.len() != n + 1 {
        return perr(bl, format!("expected `b` followed by {n} demands"));
    }
    let b = btoks[1..].iter().map(|t| num(bl, t, "demand")).collect::<Result<Vec<u64>, _>>()?;
    let mut columns = Vec::with_capacity(m);
    let mut c = Vec::with_capacity(m);
    let mut last = bl;
    for (l, toks) in it {
        last = l;
        if toks[0] != "col" || toks.len() < 2 {
            return perr(l, "expected `col weight row:coef ...`");
        }
        c.push(num(l, toks[1], "weight")?);
        let mut entries = Vec::with_capacity(toks.len() - 2);
        for t in &toks[2..] {
            let Some((r, a)) = t.split_once(':') else {
                return perr(l, format!("expected `row:coef`, got `{t}`"));
            };
            entries.push((row(l, r, n)?, num(l, a, "coefficient")?));
        }
        columns.push(SparseColumn::new(entries));
    }
    if columns.len() != m {
        return perr(last, format!("header declares {m} columns, found {}", columns.len()));
    }
    CoveringInstance::new(n, columns, b, c, kind)
        .map(InstanceFile::Ilp)
        .or_else(|e| perr(hl, e.to_string()))
}

fn parse_sets<'a>(
    hl: usize,
    header: &[&str],
    it: impl Iterator<Item = (usize, Vec<&'a str>)>,
) -> Result<InstanceFile, FormatError> {
    if header.len() != 3 {
        return perr(hl, "expected `sets n m`");
    }
    let n: usize = num(hl, header[1], "n")?;
    let m: usize = num(hl, header[2], "m")?;
    let mut sets = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    let mut last = hl;
    for (l, toks) in it {
        last = l;
        if toks[0] != "set" || toks.len() < 2 {
            return perr(l, "expected `set weight e ...`");
        }
        let w: u64 = num(l, toks[1], "weight")?;
        if w == 0 {
            return perr(l, "set weights must be positive");
        }
        weights.push(w);
        sets.push(toks[2..].iter().map(|t| row(l, t, n)).collect::<Result<Vec<_>, _>>()?);
    }
    if sets.len() != m {
        return perr(last, format!("header declares {m} sets, found {}", sets.len()));
    }
    SetSystem::new(n, sets, Some(weights))
        .map(InstanceFile::Sets)
        .or_else(|e| perr(hl, e.to_string()))
}

pub fn format_ilp(inst: &CoveringInstance) -> String {
    let mut s = format!("ilp {} {} {}\nb", inst.n(), inst.m(), inst.kind());
    for v in inst.demands() {
        write!(s, " {v}").unwrap();
    }
    s.push('\n');
    for (col, w) in inst.columns().iter().zip(inst.weights()) {
        write!(s, "col {w}").unwrap();
        for (j, a) in col.iter() {
            write!(s, " {j}:{a}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn format_sets(sys: &SetSystem) -> String {
    let mut s = format!("sets {} {}\n", sys.n(), sys.m());
    for (i, set) in sys.sets().iter().enumerate() {
        write!(s, "set {}", sys.weight(i)).unwrap();
        for e in set {
            write!(s, " {e}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn format_instance(file: &InstanceFile) -> String {
    match file {
        InstanceFile::Ilp(i) => format_ilp(i),
        InstanceFile::Sets(s) => format_sets(s),
    }
}

fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<InstanceFile, FormatError> {
    parse_instance(&read_text(path.as_ref())?)
}

pub fn write_instance(file: &InstanceFile, path: impl AsRef<Path>) -> Result<(), FormatError> {
    write_text(path.as_ref(), &format_instance(file))
}

fn join(v: &[usize], sep: &str) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(sep)
}

/// Metadata as `key value...` lines. Partitions are written one line per
/// `P_i` with blocks separated by spaces and elements by commas.
pub fn format_meta(h: &HardInstance) -> String {
    let m = &h.meta;
    let mut s = String::new();
    writeln!(s, "kind {}", h.kind).unwrap();
    writeln!(s, "n {}", h.system.n()).unwrap();
    writeln!(s, "m {}", h.m()).unwrap();
    writeln!(s, "alpha {}", m.alpha).unwrap();
    writeln!(s, "seed {}", m.seed).unwrap();
    writeln!(s, "i_star {}", m.i_star).unwrap();
    if let Some(t) = m.theta {
        writeln!(s, "theta {t}").unwrap();
    }
    if let Some(e) = m.e_star {
        writeln!(s, "e_star {e}").unwrap();
    }
    if let Some(e) = &m.e_set {
        writeln!(s, "e_set {}", join(e, " ")).unwrap();
    }
    writeln!(s, "t_bar {}", join(&m.t_bar, " ")).unwrap();
    if let Some(parts) = &m.partitions {
        for (i, p) in parts.iter().enumerate() {
            let blocks: Vec<String> = p.iter().map(|b| join(b, ",")).collect();
            writeln!(s, "partition {i} {}", blocks.join(" ")).unwrap();
        }
    }
    if let Some(sides) = &m.sides {
        let t: String = sides.iter().map(|s| if *s == Side::Alice { 'A' } else { 'B' }).collect();
        writeln!(s, "sides {t}").unwrap();
    }
    s
}

/// Parses metadata written by [`format_meta`]; returns the kind and labels.
pub fn parse_meta(text: &str) -> Result<(HardKind, HardMeta), FormatError> {
    let mut kind = None;
    let mut meta = HardMeta::default();
    let mut partitions: Vec<Vec<Vec<usize>>> = Vec::new();
    for (l, toks) in lines(text) {
        let list = |toks: &[&str]| toks.iter().map(|t| num::<usize>(l, t, "value")).collect::<Result<Vec<_>, _>>();
        let one = |toks: &[&str]| match toks {
            [v] => num::<u64>(l, v, "value"),
            _ => perr(l, "expected one value"),
        };
        match toks[0] {
            "kind" => kind = Some(toks.get(1).copied().unwrap_or("").parse().or_else(|e: String| perr(l, e))?),
            "n" | "m" => {
                one(&toks[1..])?;
            }
            "alpha" => meta.alpha = one(&toks[1..])? as usize,
            "seed" => meta.seed = one(&toks[1..])?,
            "i_star" => meta.i_star = one(&toks[1..])? as usize,
            "theta" => meta.theta = Some(one(&toks[1..])? as u8),
            "e_star" => meta.e_star = Some(one(&toks[1..])? as usize),
            "e_set" => meta.e_set = Some(list(&toks[1..])?),
            "t_bar" => meta.t_bar = list(&toks[1..])?,
            "partition" => {
                let blocks = toks[2..]
                    .iter()
                    .map(|b| b.split(',').map(|e| num::<usize>(l, e, "element")).collect())
                    .collect::<Result<Vec<Vec<usize>>, _>>()?;
                partitions.push(blocks);
            }
            "sides" => {
                let t = toks.get(1).copied().unwrap_or("");
                meta.sides = Some(
                    t.chars()
                        .map(|c| match c {
                            'A' => Ok(Side::Alice),
                            'B' => Ok(Side::Bob),
                            _ => perr(l, format!("invalid side `{c}`")),
                        })
                        .collect::<Result<_, _>>()?,
                );
            }
            other => return perr(l, format!("unknown key `{other}`")),
        }
    }
    if !partitions.is_empty() {
        meta.partitions = Some(partitions);
    }
    match kind {
        Some(k) => Ok((k, meta)),
        None => perr(0, "missing `kind`"),
    }
}

pub fn write_meta(h: &HardInstance, path: impl AsRef<Path>) -> Result<(), FormatError> {
    write_text(path.as_ref(), &format_meta(h))
}

pub fn read_meta(path: impl AsRef<Path>) -> Result<(HardKind, HardMeta), FormatError> {
    parse_meta(&read_text(path.as_ref())?)
}
