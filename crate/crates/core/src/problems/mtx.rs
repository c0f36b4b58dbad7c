//! Matrix Market reader and writer (array and coordinate formats; real,
//! integer and complex fields; general, symmetric, Hermitian and
//! skew-symmetric storage).

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{c, CMat};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmFormat {
    Array,
    Coordinate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmField {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmSymmetry {
    General,
    Symmetric,
    Hermitian,
    SkewSymmetric,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MmMatrix {
    pub data: CMat,
    pub format: MmFormat,
    pub field: MmField,
    pub symmetry: MmSymmetry,
    /// Comment lines without the leading `%`.
    pub comments: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct MmWriteOptions {
    pub format: MmFormat,
    pub field: MmField,
    pub symmetry: MmSymmetry,
    pub comments: Vec<String>,
}

impl Default for MmWriteOptions {
    fn default() -> Self {
        Self {
            format: MmFormat::Array,
            field: MmField::Real,
            symmetry: MmSymmetry::General,
            comments: Vec::new(),
        }
    }
}

struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    /// Next non-empty, non-comment line with its 1-based number.
    fn next_data(&mut self, what: &str) -> Result<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let t = line.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            return Ok((i + 1, t));
        }
        Err(self.err(self.last + 1, format!("unexpected end of file, expected {what}")))
    }
}

fn parse_num<T: std::str::FromStr>(lines: &Lines<'_>, line: usize, tok: Option<&str>, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| lines.err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| lines.err(line, format!("cannot parse {what} from '{tok}'")))
}

pub fn read_matrix_market(path: &Path) -> Result<MmMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_market(&text, path)
}

pub(crate) fn parse_matrix_market(text: &str, path: &Path) -> Result<MmMatrix> {
    let mut lines = Lines {
        path,
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (_, header) = lines
        .inner
        .next()
        .map(|(i, l)| (i + 1, l))
        .ok_or_else(|| lines.err(1, "empty file"))?;
    lines.last = 1;
    let toks: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(lines.err(1, "missing '%%MatrixMarket matrix' header"));
    }
    let format = match toks[2].as_str() {
        "array" => MmFormat::Array,
        "coordinate" => MmFormat::Coordinate,
        other => return Err(lines.err(1, format!("unsupported format '{other}'"))),
    };
    let field = match toks[3].as_str() {
        "real" | "double" | "integer" => MmField::Real,
        "complex" => MmField::Complex,
        other => return Err(lines.err(1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match toks[4].as_str() {
        "general" => MmSymmetry::General,
        "symmetric" => MmSymmetry::Symmetric,
        "hermitian" => MmSymmetry::Hermitian,
        "skew-symmetric" => MmSymmetry::SkewSymmetric,
        other => return Err(lines.err(1, format!("unsupported symmetry '{other}'"))),
    };
    if symmetry == MmSymmetry::Hermitian && field != MmField::Complex {
        return Err(lines.err(1, "hermitian storage requires the complex field"));
    }
    let comments: Vec<String> = text
        .lines()
        .skip(1)
        .take_while(|l| l.trim_start().starts_with('%') || l.trim().is_empty())
        .filter_map(|l| l.trim_start().strip_prefix('%').map(|s| s.trim_start().to_string()))
        .collect();

    let (size_line, size) = lines.next_data("the size line")?;
    let mut st = size.split_whitespace();
    let rows: usize = parse_num(&lines, size_line, st.next(), "row count")?;
    let cols: usize = parse_num(&lines, size_line, st.next(), "column count")?;
    if symmetry != MmSymmetry::General && rows != cols {
        return Err(lines.err(size_line, "symmetric storage requires a square matrix"));
    }
    let mut data = CMat::zeros(rows, cols);

    let read_value = |lines: &Lines<'_>, ln: usize, it: &mut std::str::SplitWhitespace<'_>| -> Result<crate::linalg::C64> {
        let re: f64 = parse_num(lines, ln, it.next(), "real part")?;
        let im: f64 = if field == MmField::Complex {
            parse_num(lines, ln, it.next(), "imaginary part")?
        } else {
            0.0
        };
        if it.next().is_some() {
            return Err(lines.err(ln, "trailing tokens"));
        }
        Ok(c(re, im))
    };
    let mirror = |v: crate::linalg::C64| match symmetry {
        MmSymmetry::General | MmSymmetry::Symmetric => v,
        MmSymmetry::Hermitian => v.conj(),
        MmSymmetry::SkewSymmetric => -v,
    };

    match format {
        MmFormat::Array => {
            if st.next().is_some() {
                return Err(lines.err(size_line, "array size line takes two integers"));
            }
            for j in 0..cols {
                let start = match symmetry {
                    MmSymmetry::General => 0,
                    MmSymmetry::SkewSymmetric => j + 1,
                    _ => j,
                };
                for i in start..rows {
                    let (ln, l) = lines.next_data("a matrix entry")?;
                    let v = read_value(&lines, ln, &mut l.split_whitespace())?;
                    if i == j && symmetry == MmSymmetry::Hermitian && v.im != 0.0 {
                        return Err(lines.err(ln, "Hermitian diagonal entry must be real"));
                    }
                    data[(i, j)] = v;
                    if i != j && symmetry != MmSymmetry::General {
                        data[(j, i)] = mirror(v);
                    }
                }
            }
        }
        MmFormat::Coordinate => {
            let nnz: usize = parse_num(&lines, size_line, st.next(), "entry count")?;
            for _ in 0..nnz {
                let (ln, l) = lines.next_data("a matrix entry")?;
                let mut it = l.split_whitespace();
                let i: usize = parse_num(&lines, ln, it.next(), "row index")?;
                let j: usize = parse_num(&lines, ln, it.next(), "column index")?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(lines.err(ln, format!("index ({i}, {j}) out of range")));
                }
                let v = read_value(&lines, ln, &mut it)?;
                let (i, j) = (i - 1, j - 1);
                if symmetry != MmSymmetry::General {
                    if i < j {
                        return Err(lines.err(ln, "entry above the diagonal in symmetric storage"));
                    }
                    if i == j && symmetry == MmSymmetry::SkewSymmetric {
                        return Err(lines.err(ln, "diagonal entry in skew-symmetric storage"));
                    }
                    if i == j && symmetry == MmSymmetry::Hermitian && v.im != 0.0 {
                        return Err(lines.err(ln, "Hermitian diagonal entry must be real"));
                    }
                }
                data[(i, j)] += v;
                if i != j && symmetry != MmSymmetry::General {
                    data[(j, i)] += mirror(v);
                }
            }
        }
    }
    if let Ok((ln, _)) = lines.next_data("") {
        return Err(lines.err(ln, "unexpected data after the last entry"));
    }
    Ok(MmMatrix {
        data,
        format,
        field,
        symmetry,
        comments,
    })
}

fn fmt_value(v: crate::linalg::C64, field: MmField) -> String {
    match field {
        MmField::Real => format!("{:e}", v.re),
        MmField::Complex => format!("{:e} {:e}", v.re, v.im),
    }
}

pub(crate) fn render_matrix_market(m: &CMat, opts: &MmWriteOptions) -> Result<String> {
    let (rows, cols) = m.shape();
    if opts.symmetry != MmSymmetry::General && rows != cols {
        return Err(Error::Format("symmetric storage requires a square matrix".into()));
    }
    if opts.field == MmField::Real && m.iter().any(|v| v.im != 0.0) {
        return Err(Error::Format("real field requested for a matrix with imaginary parts".into()));
    }
    if opts.symmetry == MmSymmetry::Hermitian && opts.field != MmField::Complex {
        return Err(Error::Format("hermitian storage requires the complex field".into()));
    }
    let mut out = String::new();
    let fmt_name = match opts.format {
        MmFormat::Array => "array",
        MmFormat::Coordinate => "coordinate",
    };
    let field_name = match opts.field {
        MmField::Real => "real",
        MmField::Complex => "complex",
    };
    let sym_name = match opts.symmetry {
        MmSymmetry::General => "general",
        MmSymmetry::Symmetric => "symmetric",
        MmSymmetry::Hermitian => "hermitian",
        MmSymmetry::SkewSymmetric => "skew-symmetric",
    };
    out.push_str(&format!("%%MatrixMarket matrix {fmt_name} {field_name} {sym_name}\n"));
    for cmt in &opts.comments {
        for line in cmt.lines() {
            out.push_str(&format!("% {line}\n"));
        }
    }
    let in_storage = |i: usize, j: usize| match opts.symmetry {
        MmSymmetry::General => true,
        MmSymmetry::SkewSymmetric => i > j,
        _ => i >= j,
    };
    match opts.format {
        MmFormat::Array => {
            out.push_str(&format!("{rows} {cols}\n"));
            for j in 0..cols {
                for i in 0..rows {
                    if in_storage(i, j) {
                        out.push_str(&fmt_value(m[(i, j)], opts.field));
                        out.push('\n');
                    }
                }
            }
        }
        MmFormat::Coordinate => {
            let mut entries = Vec::new();
            for j in 0..cols {
                for i in 0..rows {
                    let v = m[(i, j)];
                    if in_storage(i, j) && (v.re != 0.0 || v.im != 0.0) {
                        entries.push(format!("{} {} {}", i + 1, j + 1, fmt_value(v, opts.field)));
                    }
                }
            }
            out.push_str(&format!("{rows} {cols} {}\n", entries.len()));
            for e in entries {
                out.push_str(&e);
                out.push('\n');
            }
        }
    }
    Ok(out)
}

/// Writes `m`; only the stored triangle is emitted for symmetric kinds.
pub fn write_matrix_market(path: &Path, m: &CMat, opts: &MmWriteOptions) -> Result<()> {
    let text = render_matrix_market(m, opts)?;
    atomic_write(path, text.as_bytes())
}

/// Writes to a sibling temporary file and renames it into place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Format(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}
