//! JSON and CSV writers with a reproducibility header.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use unreliable_core::simulate::RNG_IDENTITY;

use crate::config::ParamsFile;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Float with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Everything needed to rerun the command that produced a file.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub argv: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub rng: &'static str,
}

impl Metadata {
    pub fn new(command: &str, argv: &[String], params: Option<ParamsFile>, seed: Option<u64>) -> Self {
        Metadata {
            tool: "unreliable",
            version: VERSION,
            command: command.to_string(),
            argv: argv.to_vec(),
            params,
            seed,
            rng: RNG_IDENTITY,
        }
    }

    fn header_lines(&self) -> anyhow::Result<Vec<String>> {
        let mut lines = vec![
            format!("tool: {} {}", self.tool, self.version),
            format!("command: {}", self.command),
            format!("argv: {}", self.argv.join(" ")),
        ];
        if let Some(p) = &self.params {
            lines.push(format!("params: {}", to_json_string(p, false)?));
        }
        if let Some(seed) = self.seed {
            lines.push(format!("seed: {seed}"));
        }
        lines.push(format!("rng: {}", self.rng));
        Ok(lines)
    }
}

/// `serde_json` formatter that prints floats in `{:.16e}` form and
/// optionally indents.
struct Digits17 {
    indent: Option<usize>,
    depth: usize,
    has_value: bool,
}

impl Digits17 {
    fn newline<W: ?Sized + Write>(&self, w: &mut W) -> io::Result<()> {
        if let Some(step) = self.indent {
            w.write_all(b"\n")?;
            for _ in 0..self.depth * step {
                w.write_all(b" ")?;
            }
        }
        Ok(())
    }

    fn open<W: ?Sized + Write>(&mut self, w: &mut W, c: &[u8]) -> io::Result<()> {
        self.depth += 1;
        self.has_value = false;
        w.write_all(c)
    }

    fn close<W: ?Sized + Write>(&mut self, w: &mut W, c: &[u8]) -> io::Result<()> {
        self.depth -= 1;
        if self.has_value {
            self.newline(w)?;
        }
        w.write_all(c)
    }

    fn item<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if !first {
            w.write_all(b",")?;
        }
        self.newline(w)
    }
}

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.open(w, b"[")
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.close(w, b"]")
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.item(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, _w: &mut W) -> io::Result<()> {
        self.has_value = true;
        Ok(())
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.open(w, b"{")
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.close(w, b"}")
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.item(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        w.write_all(if self.indent.is_some() { b": " } else { b":" })
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, _w: &mut W) -> io::Result<()> {
        self.has_value = true;
        Ok(())
    }
}

pub fn write_json_to<W: Write, T: Serialize + ?Sized>(w: W, value: &T, pretty: bool) -> anyhow::Result<()> {
    let fmt = Digits17 {
        indent: pretty.then_some(2),
        depth: 0,
        has_value: false,
    };
    let mut ser = serde_json::Serializer::with_formatter(w, fmt);
    value.serialize(&mut ser)?;
    Ok(())
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T, pretty: bool) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    write_json_to(&mut buf, value, pretty)?;
    Ok(String::from_utf8(buf)?)
}

/// Report wrapper that places the metadata block first.
#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    metadata: &'a Metadata,
    #[serde(flatten)]
    body: &'a T,
}

/// Writes `{"metadata": ..., <body fields>}` to `path`.
pub fn write_report<T: Serialize>(path: &Path, metadata: &Metadata, body: &T) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    write_json_to(&mut w, &Report { metadata, body }, true)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// CSV file whose first lines are `# key: value` metadata comments.
pub struct CsvOutput {
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvOutput {
    pub fn create(path: &Path, metadata: &Metadata, extra: &[(&str, String)], columns: &[&str]) -> anyhow::Result<Self> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        for line in metadata.header_lines()? {
            writeln!(w, "# {line}")?;
        }
        for (k, v) in extra {
            writeln!(w, "# {k}: {v}")?;
        }
        let mut writer = csv::Writer::from_writer(w);
        writer.write_record(columns)?;
        Ok(CsvOutput { writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> anyhow::Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> anyhow::Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

/// Contents of a CSV written by [`CsvOutput`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    /// `# key: value` comment lines, in order.
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn read_csv(path: &Path) -> anyhow::Result<CsvTable> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let metadata = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .filter_map(|l| l[1..].trim().split_once(": "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers()?.iter().map(str::to_string).collect();
    let rows = reader
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<Result<_, _>>()?;
    Ok(CsvTable { metadata, header, rows })
}

/// Creates `dir` if needed and returns `dir/name`.
pub fn output_path(dir: &Path, name: &str) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.join(name))
}
