//! Plain-text channel formats and atomic result files.
//!
//! All formats are whitespace separated with `#` comments and blank lines
//! ignored.
//!
//! * Channel: header `<|X|> <|Y|>`, then `|X|` rows of `|Y|` probabilities.
//! * Wiretap: a `joint` line, header `<|X|> <|Y|> <|Z|>`, then `|X|` rows of
//!   `|Y|·|Z|` entries with `z` varying fastest; or a `factored` line
//!   followed by two channel blocks `X → Y` and `Y → Z`.
//! * Joint: header `<|M|> <|Z|>`, then `|M|` rows of `|Z|` probabilities.
//! * Distribution: a single row of probabilities.
//! * Pair list: repeated `pair` lines, each followed by the channel blocks
//!   `X → Y` and `X → Z`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::channel::{compose, Channel, WiretapChannel};
use crate::prob::{Distribution, JointDistribution};
use crate::{Error, Result};

struct Lines<'a> {
    path: &'a str,
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, path: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)>> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
                .filter(|(_, l)| !l.is_empty()),
        );
        Self {
            path,
            inner: it.peekable(),
            last_line: 0,
        }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_string(),
            line,
            msg: msg.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((n, l)) => {
                self.last_line = n;
                Ok((n, l))
            }
            None => Err(self.err(self.last_line + 1, format!("unexpected end of file, expected {what}"))),
        }
    }

    fn at_end(&mut self) -> bool {
        self.inner.peek().is_none()
    }

    fn finish(&mut self) -> Result<()> {
        match self.inner.next() {
            Some((n, l)) => Err(self.err(n, format!("unexpected trailing content `{l}`"))),
            None => Ok(()),
        }
    }

    fn sizes(&mut self, count: usize, what: &str) -> Result<Vec<usize>> {
        let (n, l) = self.next(what)?;
        let v: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| self.err(n, format!("bad size `{t}` in {what}"))))
            .collect::<Result<_>>()?;
        if v.len() != count || v.contains(&0) {
            return Err(self.err(n, format!("{what} needs {count} positive sizes, got `{l}`")));
        }
        Ok(v)
    }

    fn row(&mut self, width: usize, what: &str) -> Result<(usize, Vec<f64>)> {
        let (n, l) = self.next(what)?;
        let v: Vec<f64> = l
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| self.err(n, format!("`{t}` is not a number")))
            })
            .collect::<Result<_>>()?;
        if v.len() != width {
            return Err(self.err(n, format!("expected {width} entries in {what}, found {}", v.len())));
        }
        Ok((n, v))
    }

    fn rows(&mut self, count: usize, width: usize, what: &str) -> Result<(usize, Vec<f64>)> {
        let mut all = Vec::with_capacity(count * width);
        let mut first = self.last_line + 1;
        for i in 0..count {
            let (n, r) = self.row(width, what)?;
            if i == 0 {
                first = n;
            }
            all.extend(r);
        }
        Ok((first, all))
    }

    fn channel(&mut self) -> Result<Channel> {
        let s = self.sizes(2, "channel header `<inputs> <outputs>`")?;
        let header = self.last_line;
        let (_, m) = self.rows(s[0], s[1], "channel row")?;
        Channel::new(s[0], s[1], m).map_err(|e| self.err(header, e.to_string()))
    }
}

pub fn parse_channel(text: &str, path: &str) -> Result<Channel> {
    let mut lines = Lines::new(text, path);
    let c = lines.channel()?;
    lines.finish()?;
    Ok(c)
}

pub fn parse_wiretap(text: &str, path: &str) -> Result<WiretapChannel> {
    let mut lines = Lines::new(text, path);
    let (n, kind) = lines.next("`joint` or `factored`")?;
    let w = match kind {
        "joint" => {
            let s = lines.sizes(3, "wiretap header `<X> <Y> <Z>`")?;
            let header = lines.last_line;
            let (_, m) = lines.rows(s[0], s[1] * s[2], "wiretap row")?;
            WiretapChannel::from_joint(s[0], s[1], s[2], m)
                .map_err(|e| lines.err(header, e.to_string()))?
        }
        "factored" => {
            let w1 = lines.channel()?;
            let at = lines.last_line + 1;
            let w2 = lines.channel()?;
            compose(&w1, &w2).map_err(|e| lines.err(at, e.to_string()))?
        }
        other => return Err(lines.err(n, format!("expected `joint` or `factored`, found `{other}`"))),
    };
    lines.finish()?;
    Ok(w)
}

pub fn parse_joint(text: &str, path: &str) -> Result<JointDistribution> {
    let mut lines = Lines::new(text, path);
    let s = lines.sizes(2, "joint header `<M> <Z>`")?;
    let header = lines.last_line;
    let (_, m) = lines.rows(s[0], s[1], "joint row")?;
    lines.finish()?;
    JointDistribution::new(s[0], s[1], m).map_err(|e| lines.err(header, e.to_string()))
}

pub fn parse_distribution(text: &str, path: &str) -> Result<Distribution> {
    let mut lines = Lines::new(text, path);
    let (n, l) = lines.next("a probability row")?;
    let v: Vec<f64> = l
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| lines.err(n, format!("`{t}` is not a number"))))
        .collect::<Result<_>>()?;
    lines.finish()?;
    Distribution::new(v).map_err(|e| lines.err(n, e.to_string()))
}

pub fn parse_pair_list(text: &str, path: &str) -> Result<Vec<(Channel, Channel)>> {
    let mut lines = Lines::new(text, path);
    let mut pairs = vec![];
    while !lines.at_end() {
        let (n, kind) = lines.next("`pair`")?;
        if kind != "pair" {
            return Err(lines.err(n, format!("expected `pair`, found `{kind}`")));
        }
        let wy = lines.channel()?;
        let wz = lines.channel()?;
        pairs.push((wy, wz));
    }
    if pairs.is_empty() {
        return Err(lines.err(1, "no channel pairs"));
    }
    Ok(pairs)
}

pub(crate) fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

pub fn read_channel(path: &Path) -> Result<Channel> {
    parse_channel(&read(path)?, &path.display().to_string())
}

pub fn read_wiretap(path: &Path) -> Result<WiretapChannel> {
    parse_wiretap(&read(path)?, &path.display().to_string())
}

pub fn read_pair_list(path: &Path) -> Result<Vec<(Channel, Channel)>> {
    parse_pair_list(&read(path)?, &path.display().to_string())
}

pub fn read_joint(path: &Path) -> Result<JointDistribution> {
    parse_joint(&read(path)?, &path.display().to_string())
}

pub fn read_distribution(path: &Path) -> Result<Distribution> {
    parse_distribution(&read(path)?, &path.display().to_string())
}

fn fmt_rows(out: &mut String, rows: impl Iterator<Item = impl AsRef<[f64]>>) {
    for r in rows {
        let cells: Vec<String> = r.as_ref().iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
}

pub fn format_channel(c: &Channel) -> String {
    let mut s = format!("{} {}\n", c.inputs(), c.outputs());
    fmt_rows(&mut s, c.rows());
    s
}

/// Factored kernels are written in the factored form, others as a joint.
pub fn format_wiretap(w: &WiretapChannel) -> String {
    match w.factorization() {
        Some((w1, w2)) => format!("factored\n{}{}", format_channel(w1), format_channel(w2)),
        None => {
            let mut s = format!("joint\n{} {} {}\n", w.input_size(), w.y_size(), w.z_size());
            fmt_rows(&mut s, (0..w.input_size()).map(|x| w.row(x)));
            s
        }
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Serializes `rows` as CSV with a header taken from the field names.
pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    if rows.is_empty() {
        return Err(Error::Precondition("refusing to write an empty table".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_atomic(path, &csv_bytes(rows)?)
}
