//! Filename convention templates.
//!
//! Dataset filenames carry identity in conventions like
//! `CLASS-subjectid-sliceno`; a [`NamePattern`] describes such a convention
//! with `{class}`, `{subject}`, `{volume}` and `{slice}` placeholders
//! separated by literal delimiters, e.g. `"{class}-{subject}-{slice}"`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identity fields a filename can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NameField {
    Class,
    Subject,
    Volume,
    Slice,
}

impl NameField {
    fn as_str(self) -> &'static str {
        match self {
            NameField::Class => "class",
            NameField::Subject => "subject",
            NameField::Volume => "volume",
            NameField::Slice => "slice",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Placeholder(NameField),
    Literal(String),
}

/// A compiled filename template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NamePattern {
    template: String,
    segments: Vec<Segment>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("unknown placeholder {{{0}}}")]
    UnknownPlaceholder(String),
    #[error("placeholder {{{}}} appears more than once", .0.as_str())]
    DuplicatePlaceholder(NameField),
    #[error("template has no placeholders")]
    NoPlaceholders,
    #[error("placeholders {{{}}} and {{{}}} need a literal delimiter between them", .0.as_str(), .1.as_str())]
    MissingDelimiter(NameField, NameField),
    #[error("unclosed '{{' in template")]
    UnclosedBrace,
}

/// Failure to match a filename against a pattern.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum NameParseError {
    #[error("name {name:?} does not match template {template:?}")]
    PatternMismatch { name: String, template: String },
    #[error("slice field {value:?} is not a base-10 integer")]
    SliceNotNumeric { value: String },
}

/// Fields captured from one filename. Only the placeholders present in the
/// pattern are populated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedName {
    pub class: Option<String>,
    pub subject: Option<String>,
    pub volume: Option<String>,
    pub slice: Option<u64>,
}

impl NamePattern {
    pub fn parse(template: &str) -> Result<Self, PatternError> {
        let mut segments = Vec::new();
        let mut literal = String::new();
        let mut chars = template.char_indices();
        while let Some((start, ch)) = chars.next() {
            if ch != '{' {
                literal.push(ch);
                continue;
            }
            let rest = &template[start + 1..];
            let close = rest.find('}').ok_or(PatternError::UnclosedBrace)?;
            let name = &rest[..close];
            let field = match name {
                "class" => NameField::Class,
                "subject" => NameField::Subject,
                "volume" => NameField::Volume,
                "slice" => NameField::Slice,
                other => return Err(PatternError::UnknownPlaceholder(other.to_string())),
            };
            if !literal.is_empty() {
                segments.push(Segment::Literal(std::mem::take(&mut literal)));
            }
            segments.push(Segment::Placeholder(field));
            // skip past the placeholder body and closing brace
            for _ in 0..close + 1 {
                chars.next();
            }
        }
        if !literal.is_empty() {
            segments.push(Segment::Literal(literal));
        }

        let mut seen = Vec::new();
        let mut previous: Option<NameField> = None;
        for seg in &segments {
            match seg {
                Segment::Placeholder(f) => {
                    if seen.contains(f) {
                        return Err(PatternError::DuplicatePlaceholder(*f));
                    }
                    if let Some(prev) = previous {
                        return Err(PatternError::MissingDelimiter(prev, *f));
                    }
                    seen.push(*f);
                    previous = Some(*f);
                }
                Segment::Literal(_) => previous = None,
            }
        }
        if seen.is_empty() {
            return Err(PatternError::NoPlaceholders);
        }
        Ok(NamePattern {
            template: template.to_string(),
            segments,
        })
    }

    pub fn template(&self) -> &str {
        &self.template
    }

    /// True if the template contains the given placeholder.
    pub fn captures(&self, field: NameField) -> bool {
        self.segments.contains(&Segment::Placeholder(field))
    }

    /// Match a bare filename (no directories, no extension) against the
    /// template.
    ///
    /// Each placeholder captures greedily up to the first character of the
    /// following literal; the last placeholder captures the remainder.
    /// Captures must be non-empty and a failed match never yields partial
    /// fields.
    pub fn parse_filename(&self, name: &str) -> Result<ParsedName, NameParseError> {
        let mismatch = || NameParseError::PatternMismatch {
            name: name.to_string(),
            template: self.template.clone(),
        };
        let mut rest = name;
        let mut out = ParsedName::default();
        for (i, seg) in self.segments.iter().enumerate() {
            match seg {
                Segment::Literal(lit) => {
                    rest = rest.strip_prefix(lit.as_str()).ok_or_else(mismatch)?;
                }
                Segment::Placeholder(field) => {
                    let captured = match self.segments.get(i + 1) {
                        Some(Segment::Literal(lit)) => {
                            let stop = lit.chars().next().expect("literals are non-empty");
                            let end = rest.find(stop).ok_or_else(mismatch)?;
                            let (value, tail) = rest.split_at(end);
                            rest = tail;
                            value
                        }
                        None => std::mem::take(&mut rest),
                        Some(Segment::Placeholder(_)) => {
                            unreachable!("adjacent placeholders rejected at compile")
                        }
                    };
                    if captured.is_empty() {
                        return Err(mismatch());
                    }
                    match field {
                        NameField::Class => out.class = Some(captured.to_string()),
                        NameField::Subject => out.subject = Some(captured.to_string()),
                        NameField::Volume => out.volume = Some(captured.to_string()),
                        NameField::Slice => {
                            out.slice = Some(captured.parse().map_err(|_| {
                                NameParseError::SliceNotNumeric {
                                    value: captured.to_string(),
                                }
                            })?)
                        }
                    }
                }
            }
        }
        if !rest.is_empty() {
            return Err(mismatch());
        }
        Ok(out)
    }

    /// Substitute fields back into the template. Inverse of
    /// [`parse_filename`](Self::parse_filename) for values free of delimiter
    /// characters.
    pub fn render(&self, fields: &ParsedName) -> Result<String, RenderError> {
        let mut out = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Literal(lit) => out.push_str(lit),
                Segment::Placeholder(field) => {
                    let value = match field {
                        NameField::Class => fields.class.clone(),
                        NameField::Subject => fields.subject.clone(),
                        NameField::Volume => fields.volume.clone(),
                        NameField::Slice => fields.slice.map(|s| s.to_string()),
                    };
                    out.push_str(&value.ok_or(RenderError::MissingField(*field))?);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RenderError {
    #[error("field {{{}}} required by the template is absent", .0.as_str())]
    MissingField(NameField),
}

impl TryFrom<String> for NamePattern {
    type Error = PatternError;
    fn try_from(template: String) -> Result<Self, Self::Error> {
        NamePattern::parse(&template)
    }
}

impl From<NamePattern> for String {
    fn from(p: NamePattern) -> String {
        p.template
    }
}

impl fmt::Display for NamePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.template)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat(t: &str) -> NamePattern {
        NamePattern::parse(t).unwrap()
    }

    #[test]
    fn parses_class_subject_slice_convention() {
        let p = pat("{class}-{subject}-{slice}");
        let parsed = p.parse_filename("DRUSEN-8086850-6").unwrap();
        assert_eq!(parsed.class.as_deref(), Some("DRUSEN"));
        assert_eq!(parsed.subject.as_deref(), Some("8086850"));
        assert_eq!(parsed.slice, Some(6));

        let parsed = p.parse_filename("CNV-81630-34").unwrap();
        assert_eq!(parsed.class.as_deref(), Some("CNV"));
        assert_eq!(parsed.subject.as_deref(), Some("81630"));
        assert_eq!(parsed.slice, Some(34));
    }

    #[test]
    fn mismatch_when_delimiters_absent() {
        let p = pat("{class}-{subject}-{slice}");
        assert!(matches!(
            p.parse_filename("notmatching"),
            Err(NameParseError::PatternMismatch { .. })
        ));
    }

    #[test]
    fn leading_zeros_in_slice() {
        let p = pat("{class}_{slice}");
        assert_eq!(p.parse_filename("NORMAL5_032").unwrap().slice, Some(32));
    }

    #[test]
    fn slice_must_be_numeric() {
        let p = pat("{class}-{slice}");
        assert!(matches!(
            p.parse_filename("CNV-3a"),
            Err(NameParseError::SliceNotNumeric { .. })
        ));
    }

    #[test]
    fn empty_captures_are_mismatches() {
        let p = pat("{class}-{subject}");
        assert!(p.parse_filename("-abc").is_err());
        assert!(p.parse_filename("abc-").is_err());
    }

    #[test]
    fn trailing_literal_must_match_fully() {
        let p = pat("{class}.x");
        assert!(p.parse_filename("foo.x").is_ok());
        assert!(p.parse_filename("foo.xy").is_err());
        assert!(p.parse_filename("foo.y").is_err());
    }

    #[test]
    fn template_validation() {
        assert_eq!(
            NamePattern::parse("{class}{slice}"),
            Err(PatternError::MissingDelimiter(
                NameField::Class,
                NameField::Slice
            ))
        );
        assert_eq!(
            NamePattern::parse("{class}-{class}"),
            Err(PatternError::DuplicatePlaceholder(NameField::Class))
        );
        assert_eq!(
            NamePattern::parse("noplaceholders"),
            Err(PatternError::NoPlaceholders)
        );
        assert_eq!(
            NamePattern::parse("{claz}"),
            Err(PatternError::UnknownPlaceholder("claz".into()))
        );
        assert_eq!(NamePattern::parse("{class"), Err(PatternError::UnclosedBrace));
    }

    #[test]
    fn render_is_inverse_of_parse() {
        let p = pat("{class}-{volume}-{slice}");
        let fields = ParsedName {
            class: Some("c1".into()),
            volume: Some("v003".into()),
            slice: Some(12),
            ..Default::default()
        };
        let name = p.render(&fields).unwrap();
        assert_eq!(name, "c1-v003-12");
        let back = p.parse_filename(&name).unwrap();
        assert_eq!(back.class, fields.class);
        assert_eq!(back.volume, fields.volume);
        assert_eq!(back.slice, fields.slice);
    }

    #[test]
    fn serde_round_trips_as_template_string() {
        let p = pat("{class}-{slice}");
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, "\"{class}-{slice}\"");
        let back: NamePattern = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<NamePattern>("\"{bad}\"").is_err());
    }
}
