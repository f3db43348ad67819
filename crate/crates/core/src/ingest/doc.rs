use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::enrich::clean_description;
use super::IngestError;

/// A documentation page split into heading-delimited sections.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocPage {
    pub resource_name: String,
    /// Cleaned text between the resource heading and the first level-2 section.
    pub description: String,
    pub raw_markdown: String,
    /// Text before the first heading (front matter and the like).
    pub preamble: String,
    pub sections: Vec<DocSection>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocSection {
    pub heading_level: u8,
    pub title: String,
    /// Text after the heading line, up to the next heading.
    pub body: String,
    /// Byte range of the section (heading line included) in `raw_markdown`.
    pub start: usize,
    pub end: usize,
}

impl DocPage {
    /// Rebuilds the source text from the preamble and section spans.
    pub fn reconstruct(&self) -> String {
        let mut out = self.preamble.clone();
        for s in &self.sections {
            out.push_str(&self.raw_markdown[s.start..s.end]);
        }
        out
    }
}

fn heading(line: &str) -> Option<(u8, &str)> {
    let hashes = line.bytes().take_while(|&b| b == b'#').count();
    if !(1..=3).contains(&hashes) {
        return None;
    }
    let rest = &line[hashes..];
    if !rest.starts_with(' ') && !rest.starts_with('\t') {
        return None;
    }
    Some((hashes as u8, rest.trim()))
}

fn is_fence(line: &str) -> bool {
    line.trim_start().starts_with("```")
}

/// Iterates over lines with their byte offsets, keeping line terminators out
/// of the returned slice.
fn lines_with_offsets(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut pos = 0;
    text.split_inclusive('\n').map(move |l| {
        let start = pos;
        pos += l.len();
        (start, l.trim_end_matches(['\n', '\r']))
    })
}

/// Splits a page into sections and extracts the resource name and
/// description from its `# Resource: <name>` heading.
pub fn parse_doc_page(md: &str) -> Result<DocPage, IngestError> {
    if md.trim().is_empty() {
        return Err(IngestError::EmptyPage);
    }
    let mut heads = Vec::new();
    let mut in_fence = false;
    for (off, line) in lines_with_offsets(md) {
        if is_fence(line) {
            in_fence = !in_fence;
            continue;
        }
        if in_fence {
            continue;
        }
        if let Some((level, title)) = heading(line) {
            heads.push((off, off + line.len(), level, title.to_string()));
        }
    }
    let mut sections = Vec::with_capacity(heads.len());
    for (i, (start, line_end, level, title)) in heads.iter().enumerate() {
        let end = heads.get(i + 1).map_or(md.len(), |h| h.0);
        let tail = &md[*line_end..];
        let terminator = if tail.starts_with("\r\n") {
            2
        } else {
            usize::from(tail.starts_with('\n'))
        };
        sections.push(DocSection {
            heading_level: *level,
            title: title.clone(),
            body: md[line_end + terminator..end].to_string(),
            start: *start,
            end,
        });
    }
    let preamble = md[..heads.first().map_or(md.len(), |h| h.0)].to_string();

    let idx = sections
        .iter()
        .position(|s| s.heading_level == 1 && s.title.starts_with("Resource:"))
        .ok_or(IngestError::MissingResourceHeading)?;
    let resource_name = sections[idx].title["Resource:".len()..].trim().to_string();
    if resource_name.is_empty() {
        return Err(IngestError::MissingResourceHeading);
    }
    let mut description = String::new();
    for s in sections[idx..].iter() {
        if s.heading_level == 2 || (s.heading_level == 1 && s.start != sections[idx].start) {
            break;
        }
        if s.start != sections[idx].start {
            description.push_str(&s.title);
            description.push('\n');
        }
        description.push_str(&s.body);
    }
    Ok(DocPage {
        resource_name,
        description: clean_description(&description),
        raw_markdown: md.to_string(),
        preamble,
        sections,
    })
}

/// An argument bullet from the Argument Reference section.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgEntry {
    /// Title of the enclosing `###` heading; `None` is top level.
    pub section: Option<String>,
    /// Names of enclosing bullets for indented bullets, outermost first.
    pub parents: Vec<String>,
    pub name: String,
    pub text: String,
}

impl ArgEntry {
    pub fn section_context(&self) -> &str {
        self.section.as_deref().unwrap_or("top-level")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttrEntry {
    pub name: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleEntry {
    pub title: String,
    pub code: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocElements {
    pub arguments: Vec<ArgEntry>,
    pub attributes: Vec<AttrEntry>,
    pub examples: Vec<ExampleEntry>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Part {
    Other,
    Arguments,
    Attributes,
    Examples,
}

fn classify_h2(title: &str) -> Part {
    let t = title.to_ascii_lowercase();
    match t.as_str() {
        "argument reference" | "arguments reference" => Part::Arguments,
        "attribute reference" | "attributes reference" => Part::Attributes,
        "example usage" | "examples" => Part::Examples,
        _ => Part::Other,
    }
}

fn bullet_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(\s*)[-*]\s+`([^`]+)`\s*(.*)$").unwrap())
}

fn strip_separator(s: &str) -> &str {
    let s = s.trim_start();
    for sep in ["-", "\u{2013}", "\u{2014}", ":"] {
        if let Some(rest) = s.strip_prefix(sep) {
            return rest.trim_start();
        }
    }
    s
}

struct Bullet {
    indent: usize,
    name: String,
    text: String,
}

/// Collects backticked bullets; a bullet's text continues over following
/// non-blank, non-bullet lines and stops at a blank line.
fn bullets(body: &str) -> Vec<Bullet> {
    let mut out: Vec<Bullet> = Vec::new();
    let mut open = false;
    let mut in_fence = false;
    for line in body.lines() {
        if is_fence(line) {
            in_fence = !in_fence;
            open = false;
            continue;
        }
        if in_fence {
            continue;
        }
        if let Some(c) = bullet_re().captures(line) {
            out.push(Bullet {
                indent: c[1].chars().map(|ch| if ch == '\t' { 4 } else { 1 }).sum(),
                name: c[2].trim().to_string(),
                text: strip_separator(&c[3]).to_string(),
            });
            open = true;
        } else if line.trim().is_empty() {
            open = false;
        } else if open {
            let t = line.trim();
            if t.starts_with("- ") || t.starts_with("* ") {
                open = false;
                continue;
            }
            let last = out.last_mut().expect("open implies a bullet");
            last.text.push(' ');
            last.text.push_str(t);
        }
    }
    out
}

/// Pulls argument, attribute and example entries out of a parsed page.
pub fn extract_doc_elements(page: &DocPage) -> DocElements {
    let mut out = DocElements::default();
    let mut part = Part::Other;
    let mut arg_section: Option<String> = None;
    for s in &page.sections {
        match s.heading_level {
            1 => {
                part = Part::Other;
                continue;
            }
            2 => {
                part = classify_h2(&s.title);
                arg_section = None;
            }
            _ => {
                if part == Part::Arguments {
                    arg_section = Some(s.title.clone());
                }
            }
        }
        match part {
            Part::Arguments => {
                let mut stack: Vec<(usize, String)> = Vec::new();
                for b in bullets(&s.body) {
                    while stack.last().is_some_and(|(i, _)| *i >= b.indent) {
                        stack.pop();
                    }
                    out.arguments.push(ArgEntry {
                        section: arg_section.clone(),
                        parents: stack.iter().map(|(_, n)| n.clone()).collect(),
                        name: b.name.clone(),
                        text: b.text,
                    });
                    stack.push((b.indent, b.name));
                }
            }
            Part::Attributes => {
                out.attributes.extend(
                    bullets(&s.body)
                        .into_iter()
                        .filter(|b| b.indent == 0)
                        .map(|b| AttrEntry {
                            name: b.name,
                            text: b.text,
                        }),
                );
            }
            Part::Examples => {
                let mut title = (s.heading_level == 3).then(|| s.title.clone());
                for code in code_blocks(&s.body) {
                    let index = out.examples.len();
                    let t = title.take().unwrap_or_else(|| {
                        if index == 0 {
                            "Basic Usage".to_string()
                        } else {
                            format!("Example {}", index + 1)
                        }
                    });
                    out.examples.push(ExampleEntry { title: t, code });
                }
            }
            Part::Other => {}
        }
    }
    out
}

fn code_blocks(body: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current: Option<Vec<&str>> = None;
    for line in body.lines() {
        if is_fence(line) {
            match current.take() {
                Some(lines) => out.push(lines.join("\n")),
                None => current = Some(Vec::new()),
            }
        } else if let Some(lines) = current.as_mut() {
            lines.push(line);
        }
    }
    out
}
