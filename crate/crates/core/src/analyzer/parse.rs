//! Splitting validation logs into error stanzas.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Argument,
    Block,
    Resource,
    Attribute,
}

impl ElementKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Argument => "argument",
            ElementKind::Block => "block",
            ElementKind::Resource => "resource",
            ElementKind::Attribute => "attribute",
        }
    }
}

/// The configuration element an error is about.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Element {
    pub kind: ElementKind,
    pub name: String,
    /// Resource type the element belongs to, when known.
    pub resource_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomicError {
    pub script_id: String,
    /// Position of the stanza within its log, from 0.
    pub ordinal: usize,
    /// Stanza text with box-drawing characters removed.
    pub raw_message: String,
    pub element: Option<Element>,
    pub location: Option<(String, u32)>,
}

impl AtomicError {
    /// Text after `Error:` on the stanza's first line.
    pub fn summary(&self) -> &str {
        let first = self.raw_message.lines().next().unwrap_or("");
        first.trim_start().strip_prefix("Error:").unwrap_or(first).trim()
    }
}

struct Rules {
    argument: Regex,
    block: Regex,
    resource: Regex,
    attribute: Regex,
    in_resource: Regex,
    location: Regex,
}

fn rules() -> &'static Rules {
    static R: OnceLock<Rules> = OnceLock::new();
    R.get_or_init(|| Rules {
        argument: Regex::new(r#"argument named "([^"]+)""#).unwrap(),
        block: Regex::new(r#"Blocks of type "([^"]+)""#).unwrap(),
        resource: Regex::new(r#"does not support resource type "([^"]+)""#).unwrap(),
        attribute: Regex::new(r#"attribute named "([^"]+)""#).unwrap(),
        in_resource: Regex::new(r#"in resource "([^"]+)" "[^"]*""#).unwrap(),
        location: Regex::new(r"on (\S+) line (\d+)").unwrap(),
    })
}

fn is_box_char(c: char) -> bool {
    matches!(c, '│' | '╷' | '╵')
}

fn clean_line(line: &str) -> String {
    let s: String = line.chars().filter(|&c| !is_box_char(c)).collect();
    // Boxed output indents content by one space after the bar.
    let s = if line.trim_start().starts_with('│') {
        s.strip_prefix(' ').map(str::to_string).unwrap_or(s)
    } else {
        s
    };
    s.trim_end().to_string()
}

fn starts_stanza(line: &str, warning_too: bool) -> bool {
    let t = line.trim_start();
    t.starts_with("Error:") || (warning_too && t.starts_with("Warning:"))
}

fn extract(text: &str) -> (Option<Element>, Option<(String, u32)>) {
    let r = rules();
    let resource_type = r.in_resource.captures(text).map(|c| c[1].to_string());
    let element = if let Some(c) = r.argument.captures(text) {
        Some(Element {
            kind: ElementKind::Argument,
            name: c[1].to_string(),
            resource_type,
        })
    } else if let Some(c) = r.block.captures(text) {
        Some(Element {
            kind: ElementKind::Block,
            name: c[1].to_string(),
            resource_type,
        })
    } else if let Some(c) = r.resource.captures(text) {
        Some(Element {
            kind: ElementKind::Resource,
            name: c[1].to_string(),
            resource_type: Some(c[1].to_string()),
        })
    } else {
        r.attribute.captures(text).map(|c| Element {
            kind: ElementKind::Attribute,
            name: c[1].to_string(),
            resource_type,
        })
    };
    let location = r
        .location
        .captures(text)
        .and_then(|c| Some((c[1].trim_end_matches(',').to_string(), c[2].parse().ok()?)));
    (element, location)
}

/// One [`AtomicError`] per `Error:` stanza. A stanza runs until the next
/// `Error:` or `Warning:` line or the end of the log; warnings themselves
/// are not reported.
pub fn parse_tv_log(script_id: &str, log_text: &str) -> Vec<AtomicError> {
    let lines: Vec<String> = log_text.lines().map(clean_line).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        if !starts_stanza(&lines[i], false) {
            i += 1;
            continue;
        }
        let start = i;
        i += 1;
        while i < lines.len() && !starts_stanza(&lines[i], true) {
            i += 1;
        }
        let body: Vec<&str> = lines[start..i].iter().map(|l| l.as_str()).collect();
        let raw_message = body.join("\n").trim().to_string();
        let (element, location) = extract(&raw_message);
        out.push(AtomicError {
            script_id: script_id.to_string(),
            ordinal: out.len(),
            raw_message,
            element,
            location,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\u{2577}\n\u{2502} Error: Unsupported argument\n\u{2502}\n\
        \u{2502}   on main.tf line 41, in resource \"aws_route53_record\" \"www\":\n\
        \u{2502}   41:   set_identifier = \"dev\"\n\u{2502}\n\
        \u{2502} An argument named \"set_identifier\" is not expected here.\n\u{2575}\n";

    #[test]
    fn sample_stanza() {
        let errs = parse_tv_log("s1", SAMPLE);
        assert_eq!(errs.len(), 1);
        let e = &errs[0];
        assert_eq!(
            e.element,
            Some(Element {
                kind: ElementKind::Argument,
                name: "set_identifier".into(),
                resource_type: Some("aws_route53_record".into()),
            })
        );
        assert_eq!(e.location, Some(("main.tf".into(), 41)));
        assert_eq!(e.summary(), "Unsupported argument");
        assert!(!e.raw_message.contains('\u{2502}'));
    }

    #[test]
    fn empty_and_warnings() {
        assert!(parse_tv_log("s", "").is_empty());
        let log = "Error: A\n\nbody a\nWarning: W\n\nwarn body\nError: B\n";
        let errs = parse_tv_log("s", log);
        assert_eq!(errs.len(), 2);
        assert!(!errs[0].raw_message.contains("warn body"));
        assert_eq!(errs[1].ordinal, 1);
    }

    #[test]
    fn block_and_resource_extraction() {
        let b = parse_tv_log("s", "Error: Unsupported block type\n  on main.tf line 3, in resource \"aws_s3_bucket\" \"b\":\nBlocks of type \"website\" are not expected here.");
        assert_eq!(b[0].element.as_ref().unwrap().kind, ElementKind::Block);
        assert_eq!(
            b[0].element.as_ref().unwrap().resource_type.as_deref(),
            Some("aws_s3_bucket")
        );
        let r = parse_tv_log(
            "s",
            "Error: Invalid resource type\nThe provider hashicorp/aws does not support resource type \"aws_magic\".",
        );
        assert_eq!(r[0].element.as_ref().unwrap().name, "aws_magic");
        assert_eq!(r[0].location, None);
    }
}
