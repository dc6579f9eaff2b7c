//! Sample forms: one observed (or simulated) recommendation list at a time
//! stamp, stored as tab-separated text.
//!
//! Layout, one record per line, cells separated by tabs:
//!
//! ```text
//! ## recsim-form v1                      (optional format marker)
//! ## <metadata>                          (optional, any number)
//! <network> – Friend Candidates - FORM
//! Date: DD/MM/YYYY
//! Time: HH:MM
//! #  Name  Degree  Shared connections  Known from  Position  Comments
//! 1  John Doe  2  21  studies  Computer Software Professional
//! ```
//!
//! The title, date and time lines are padded with tabs to the seven table
//! columns. Degree accepts `2` or `2nd`. `-` or an empty cell means missing.
//! The writer emits missing degree and shared connections as `-`, missing
//! text as an empty cell, and always starts with the format marker.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{is_known, shared_connections};
use crate::graph::SocialGraph;
use crate::pipeline::RecommendationList;

pub const MAX_FORM_ROWS: usize = 50;
pub const FORM_FORMAT_MARKER: &str = "## recsim-form v1";
pub const BUNDLE_FORMAT: &str = "recsim-bundle/1";
pub const FORM_EXTENSION: &str = "tsv";

const TITLE_SUFFIX: &str = " – Friend Candidates - FORM";
const TITLE_SUFFIX_ASCII: &str = " - Friend Candidates - FORM";
const COLUMNS: [&str; 7] = ["#", "Name", "Degree", "Shared connections", "Known from", "Position", "Comments"];
const PAD: &str = "\t\t\t\t\t\t";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRow {
    pub rank: usize,
    pub name: String,
    pub degree: Option<u32>,
    pub shared_connections: Option<u32>,
    pub known_from: Option<String>,
    pub position_title: String,
    pub comments: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleForm {
    pub network_name: String,
    pub date: NaiveDate,
    pub time: NaiveTime,
    /// Free-form provenance lines (`## ...` in the file).
    #[serde(default)]
    pub metadata: Vec<String>,
    pub rows: Vec<SampleRow>,
}

impl SampleForm {
    pub fn new(network_name: impl Into<String>, timestamp: NaiveDateTime) -> Self {
        SampleForm {
            network_name: network_name.into(),
            date: timestamp.date(),
            time: timestamp.time(),
            metadata: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn timestamp(&self) -> NaiveDateTime {
        self.date.and_time(self.time)
    }

    pub fn validate(&self) -> Result<()> {
        let clean = |what: &str, s: &str| -> Result<()> {
            if s.contains(['\t', '\n', '\r']) || s.trim() != s {
                Err(Error::validation(format!("{what} `{s}` has tabs, line breaks or surrounding blanks")))
            } else {
                Ok(())
            }
        };
        let optional = |what: &str, s: &Option<String>| -> Result<()> {
            match s.as_deref() {
                Some("") | Some("-") => Err(Error::validation(format!("{what} must be None rather than empty or `-`"))),
                Some(v) => clean(what, v),
                None => Ok(()),
            }
        };
        if self.network_name.is_empty() {
            return Err(Error::validation("network name is empty"));
        }
        clean("network name", &self.network_name)?;
        if self.time.second() != 0 || self.time.nanosecond() != 0 {
            return Err(Error::validation("form time must be whole minutes"));
        }
        for m in &self.metadata {
            if m.contains(['\n', '\r']) {
                return Err(Error::validation("metadata lines cannot contain line breaks"));
            }
        }
        if self.rows.len() > MAX_FORM_ROWS {
            return Err(Error::validation(format!("{} rows exceed the {MAX_FORM_ROWS}-row form", self.rows.len())));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.rank != i + 1 {
                return Err(Error::validation(format!("row {} has rank {}", i + 1, row.rank)));
            }
            clean("name", &row.name)?;
            clean("position", &row.position_title)?;
            optional("known from", &row.known_from)?;
            optional("comments", &row.comments)?;
            if row.degree == Some(0) {
                return Err(Error::validation("degree must be positive"));
            }
        }
        Ok(())
    }
}

fn strip_label<'a>(line: &'a str, label: &str) -> Option<&'a str> {
    line.trim_end_matches(['\t', ' ']).strip_prefix(label).map(str::trim)
}

fn optional_cell(cell: &str) -> Option<&str> {
    match cell {
        "" | "-" => None,
        s => Some(s),
    }
}

fn parse_degree(line: usize, cell: &str) -> Result<Option<u32>> {
    let Some(cell) = optional_cell(cell) else {
        return Ok(None);
    };
    let digits = cell.trim_end_matches(|c: char| c.is_ascii_alphabetic());
    let suffix = cell[digits.len()..].to_ascii_lowercase();
    if !matches!(suffix.as_str(), "" | "st" | "nd" | "rd" | "th") {
        return Err(Error::parse(line, format!("invalid degree `{cell}`")));
    }
    match digits.parse::<u32>() {
        Ok(d) if d > 0 => Ok(Some(d)),
        _ => Err(Error::parse(line, format!("invalid degree `{cell}`"))),
    }
}

/// Parses one form document.
pub fn parse_form(text: &str) -> Result<SampleForm> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim_matches(['\t', ' ']).is_empty())
        .peekable();

    let mut metadata = Vec::new();
    let mut first = true;
    while let Some(&(_, line)) = lines.peek() {
        let Some(rest) = line.strip_prefix("##") else { break };
        if !(first && line == FORM_FORMAT_MARKER) {
            metadata.push(rest.strip_prefix(' ').unwrap_or(rest).to_string());
        }
        first = false;
        lines.next();
    }

    let (n, title) = lines.next().ok_or_else(|| Error::parse(1, "missing title line"))?;
    let title = title.trim_end_matches(['\t', ' ']);
    let network_name = title
        .strip_suffix(TITLE_SUFFIX)
        .or_else(|| title.strip_suffix(TITLE_SUFFIX_ASCII))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .ok_or_else(|| Error::parse(n, format!("expected `<network>{TITLE_SUFFIX}`, found `{title}`")))?
        .to_string();

    let (n, line) = lines.next().ok_or_else(|| Error::parse(n + 1, "missing Date line"))?;
    let date = strip_label(line, "Date:")
        .and_then(|d| NaiveDate::parse_from_str(d, "%d/%m/%Y").ok())
        .ok_or_else(|| Error::parse(n, format!("expected `Date: DD/MM/YYYY`, found `{line}`")))?;

    let (n, line) = lines.next().ok_or_else(|| Error::parse(n + 1, "missing Time line"))?;
    let time = strip_label(line, "Time:")
        .and_then(|t| NaiveTime::parse_from_str(t, "%H:%M").ok())
        .ok_or_else(|| Error::parse(n, format!("expected `Time: HH:MM`, found `{line}`")))?;

    let (n, header) = lines.next().ok_or_else(|| Error::parse(n + 1, "missing column header row"))?;
    let header: Vec<&str> = header.split('\t').map(str::trim).collect();
    if header != COLUMNS {
        return Err(Error::parse(n, format!("unexpected column header {header:?}")));
    }

    let mut rows = Vec::new();
    for (n, line) in lines {
        let cells: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cells.len() != COLUMNS.len() {
            return Err(Error::parse(n, format!("expected {} fields, found {}", COLUMNS.len(), cells.len())));
        }
        if rows.len() == MAX_FORM_ROWS {
            return Err(Error::parse(n, format!("more than {MAX_FORM_ROWS} rows")));
        }
        let rank: usize = cells[0].parse().map_err(|_| Error::parse(n, format!("invalid rank `{}`", cells[0])))?;
        if rank != rows.len() + 1 {
            return Err(Error::parse(n, format!("rank {rank} where {} was expected", rows.len() + 1)));
        }
        let shared = match optional_cell(cells[3]) {
            None => None,
            Some(s) => Some(s.parse().map_err(|_| Error::parse(n, format!("invalid shared connections `{s}`")))?),
        };
        rows.push(SampleRow {
            rank,
            name: cells[1].to_string(),
            degree: parse_degree(n, cells[2])?,
            shared_connections: shared,
            known_from: optional_cell(cells[4]).map(str::to_string),
            position_title: cells[5].to_string(),
            comments: optional_cell(cells[6]).map(str::to_string),
        });
    }
    Ok(SampleForm { network_name, date, time, metadata, rows })
}

/// Canonical serialization.
pub fn write_form(form: &SampleForm) -> Result<String> {
    form.validate()?;
    let mut out = String::new();
    out.push_str(FORM_FORMAT_MARKER);
    out.push('\n');
    for m in &form.metadata {
        let _ = writeln!(out, "## {m}");
    }
    let _ = writeln!(out, "{}{TITLE_SUFFIX}{PAD}", form.network_name);
    let _ = writeln!(out, "Date: {}{PAD}", form.date.format("%d/%m/%Y"));
    let _ = writeln!(out, "Time: {}{PAD}", form.time.format("%H:%M"));
    let _ = writeln!(out, "{}", COLUMNS.join("\t"));
    let dash = |x: Option<u32>| x.map_or_else(|| "-".to_string(), |v| v.to_string());
    for r in &form.rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.rank,
            r.name,
            dash(r.degree),
            dash(r.shared_connections),
            r.known_from.as_deref().unwrap_or(""),
            r.position_title,
            r.comments.as_deref().unwrap_or(""),
        );
    }
    Ok(out)
}

fn sanitize(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ").trim().to_string()
}

/// Converts a simulated list into the collected-form shape, recomputing
/// degree and shared connections from the graph.
pub fn export_simulated(list: &RecommendationList, graph: &SocialGraph, network_name: &str) -> Result<SampleForm> {
    let mut form = SampleForm::new(sanitize(network_name), list.timestamp);
    let receiver = list.receiver_id;
    for e in &list.entries {
        let c = e.candidate_id;
        let (known, label) = is_known(graph, receiver, c)?;
        let known_from = match (known, label) {
            (true, Some(l)) if !sanitize(&l).is_empty() && sanitize(&l) != "-" => Some(sanitize(&l)),
            (true, _) => Some("known".to_string()),
            (false, _) => None,
        };
        form.rows.push(SampleRow {
            rank: e.position,
            name: sanitize(&e.decoration.display_name),
            degree: Some(graph.network_degree(receiver, c)?.as_number()),
            shared_connections: Some(shared_connections(graph, receiver, c)? as u32),
            known_from,
            position_title: sanitize(&e.decoration.occupation_line),
            comments: None,
        });
    }
    Ok(form)
}

/// File name carrying network and time stamp, e.g.
/// `linkedin-like__20130712-2200.tsv`.
pub fn form_file_name(form: &SampleForm) -> String {
    let network: String = form
        .network_name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '-' })
        .collect();
    format!("{network}__{}.{FORM_EXTENSION}", form.timestamp().format("%Y%m%d-%H%M"))
}

/// Several forms plus provenance, as written by `recsim ingest`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormBundle {
    pub format: String,
    pub provenance: Vec<String>,
    pub forms: Vec<SampleForm>,
}

impl FormBundle {
    pub fn new(provenance: Vec<String>, mut forms: Vec<SampleForm>) -> Self {
        sort_forms(&mut forms);
        FormBundle { format: BUNDLE_FORMAT.to_string(), provenance, forms }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let bundle: FormBundle = serde_json::from_str(text)
            .map_err(|e| Error::parse(e.line(), format!("invalid bundle: {e}")))?;
        if bundle.format != BUNDLE_FORMAT {
            return Err(Error::validation(format!("unsupported bundle format `{}`", bundle.format)));
        }
        for f in &bundle.forms {
            f.validate()?;
        }
        Ok(bundle)
    }
}

/// Chronological order, then network name.
pub fn sort_forms(forms: &mut [SampleForm]) {
    forms.sort_by(|a, b| a.timestamp().cmp(&b.timestamp()).then_with(|| a.network_name.cmp(&b.network_name)));
}

fn with_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, message } => Error::Parse { line, message: format!("{}: {message}", path.display()) },
        Error::Validation(m) => Error::Validation(format!("{}: {m}", path.display())),
        other => other,
    }
}

pub fn read_form_file(path: &Path) -> Result<SampleForm> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_form(&text).map_err(|e| with_file(path, e))
}

/// Form files (`*.tsv`) in `dir`, sorted by file name.
pub fn form_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == FORM_EXTENSION))
        .collect();
    files.sort();
    Ok(files)
}

/// Reads forms from a bundle (`.json`), a single form file, or a directory
/// of form files. The result is in chronological order.
pub fn read_forms(path: &Path) -> Result<Vec<SampleForm>> {
    let mut forms = if path.is_dir() {
        form_files(path)?.iter().map(|p| read_form_file(p)).collect::<Result<Vec<_>>>()?
    } else if path.extension().is_some_and(|x| x == "json") {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        FormBundle::from_json(&text).map_err(|e| with_file(path, e))?.forms
    } else {
        vec![read_form_file(path)?]
    };
    sort_forms(&mut forms);
    Ok(forms)
}
