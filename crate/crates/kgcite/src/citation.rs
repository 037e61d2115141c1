//! Inline attribution markup: bracketed citation groups carrying a subject id
//! plus one or more `relation: value` pairs, and the `[NA]` knowledge-gap
//! marker, attached to sentences.
//!
//! Grammar for one bracket: `'[' ID (',' RELATION ':' VALUE)+ ']'`, where
//! RELATION contains no `:` or `,` and VALUE no `,` or `]`. A bracket with k
//! pairs expands to k triple citations sharing the subject. A pair whose
//! relation is `qid` re-binds the subject and one whose relation is `name`
//! merely echoes it; neither emits a triple. `[NA]` is not a citation to a
//! triple but a declaration that supporting knowledge is missing. Anything
//! else inside brackets is preserved as [`Citation::Malformed`] — parsing
//! never fails.

use std::ops::Range;

use thiserror::Error;

use crate::store::{EntityId, KnowledgeTriple};

/// One citation occurrence inside a sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Citation {
    /// A complete subject/relation/object citation.
    Triple(KnowledgeTriple),
    /// The `[NA]` knowledge-gap marker.
    NotApplicable,
    /// A bracket that failed the grammar; the exact raw text is preserved.
    Malformed(String),
}

impl Citation {
    pub fn triple(&self) -> Option<&KnowledgeTriple> {
        match self {
            Citation::Triple(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_na(&self) -> bool {
        matches!(self, Citation::NotApplicable)
    }

    pub fn is_malformed(&self) -> bool {
        matches!(self, Citation::Malformed(_))
    }
}

/// A sentence with its citation brackets stripped out. Each citation keeps an
/// anchor (byte offset into `text`) so rendering can re-insert it where it
/// stood.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub text: String,
    citations: Vec<Citation>,
    anchors: Vec<usize>,
}

impl Sentence {
    pub fn new(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            citations: Vec::new(),
            anchors: Vec::new(),
        }
    }

    /// Sentence with all citations anchored before the trailing terminator
    /// (after it if the text has none), the position generation-style answers
    /// put them.
    pub fn with_citations(text: impl Into<String>, citations: Vec<Citation>) -> Self {
        let mut s = Self::new(text);
        for c in citations {
            s.push_citation(c);
        }
        s
    }

    pub fn push_citation(&mut self, citation: Citation) {
        let anchor = match self.text.chars().last() {
            Some(c) if is_terminator(c) => self.text.len() - c.len_utf8(),
            _ => self.text.len(),
        };
        self.push_citation_at(anchor, citation);
    }

    pub fn push_citation_at(&mut self, anchor: usize, citation: Citation) {
        debug_assert!(anchor <= self.text.len());
        self.citations.push(citation);
        self.anchors.push(anchor);
    }

    pub fn citations(&self) -> &[Citation] {
        &self.citations
    }

    pub fn anchors(&self) -> &[usize] {
        &self.anchors
    }

    /// True when the sentence carries at least one `[NA]` marker.
    pub fn has_na(&self) -> bool {
        self.citations.iter().any(Citation::is_na)
    }

    pub fn triples(&self) -> impl Iterator<Item = &KnowledgeTriple> {
        self.citations.iter().filter_map(Citation::triple)
    }
}

/// A parsed answer: ordered sentences, each carrying zero or more citations,
/// plus the original text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributedAnswer {
    pub sentences: Vec<Sentence>,
    pub raw: String,
}

impl AttributedAnswer {
    /// Build an answer from sentence structures (the raw field stays empty;
    /// use [`render_answer`] to produce text).
    pub fn from_sentences(sentences: Vec<Sentence>) -> Self {
        Self {
            sentences,
            raw: String::new(),
        }
    }

    pub fn all_citations(&self) -> impl Iterator<Item = &Citation> {
        self.sentences.iter().flat_map(|s| s.citations().iter())
    }

    pub fn triple_citations(&self) -> impl Iterator<Item = &KnowledgeTriple> {
        self.all_citations().filter_map(Citation::triple)
    }

    pub fn na_sentence_count(&self) -> usize {
        self.sentences.iter().filter(|s| s.has_na()).count()
    }
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("cannot render a malformed citation: {0}")]
    Malformed(String),
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closing(c: char) -> bool {
    matches!(c, '"' | '\'' | '\u{201d}' | '\u{2019}' | ')')
}

fn no_space_before(c: char) -> bool {
    matches!(c, '.' | ',' | '!' | '?' | ';' | ':' | ')' | ']' | '}' | '%')
}

const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "Mr.", "Mrs.", "Ms.", "Dr.", "Prof.", "St.", "Jr.", "Sr.", "vs.", "etc.", "e.g.", "i.e.",
    "cf.", "No.", "Fig.", "al.",
];

/// Sentence segmenter: splits on `.`, `!`, `?` followed by whitespace or end
/// of text, except when the terminator lies inside a citation bracket or ends
/// a listed abbreviation. Closing quotes and parentheses may sit between the
/// terminator and the whitespace.
#[derive(Debug, Clone)]
pub struct Segmenter {
    abbreviations: Vec<String>,
}

impl Default for Segmenter {
    fn default() -> Self {
        Self {
            abbreviations: DEFAULT_ABBREVIATIONS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl Segmenter {
    pub fn new(abbreviations: impl IntoIterator<Item = String>) -> Self {
        Self {
            abbreviations: abbreviations.into_iter().collect(),
        }
    }

    fn is_abbreviation(&self, word: &str) -> bool {
        self.abbreviations.iter().any(|a| a == word)
    }

    /// Byte spans of the sentences of `text`. The spans cover the text
    /// without overlap; inter-sentence whitespace is attached to the earlier
    /// span.
    pub fn segment(&self, text: &str) -> Vec<Range<usize>> {
        let mut spans = Vec::new();
        let mut start = 0usize;
        for seg in scan_segments(text) {
            let Segment::Text(range) = seg else { continue };
            let slice = &text[range.clone()];
            for (off, c) in slice.char_indices() {
                if !is_terminator(c) {
                    continue;
                }
                let abs = range.start + off;
                // Step over closing quotes, then require whitespace or EOL.
                let mut j = abs + c.len_utf8();
                while let Some(next) = text[j..].chars().next() {
                    if is_closing(next) && j < range.end {
                        j += next.len_utf8();
                    } else {
                        break;
                    }
                }
                let at_boundary = match text[j..].chars().next() {
                    None => true,
                    Some(next) => next.is_whitespace(),
                };
                if !at_boundary {
                    continue;
                }
                if c == '.' && self.is_abbreviation(word_ending_at(slice, off, c)) {
                    continue;
                }
                // Trailing whitespace belongs to this span.
                let mut end = j;
                while let Some(next) = text[end..].chars().next() {
                    if next.is_whitespace() && end < text.len() {
                        end += next.len_utf8();
                    } else {
                        break;
                    }
                }
                spans.push(start..end);
                start = end;
            }
        }
        if start < text.len() {
            spans.push(start..text.len());
        }
        spans
    }
}

/// The word (alphanumeric runs plus embedded periods) ending at the
/// terminator, terminator included — what the abbreviation list is matched
/// against.
fn word_ending_at<'a>(slice: &'a str, term_off: usize, term: char) -> &'a str {
    let end = term_off + term.len_utf8();
    let mut begin = term_off;
    for (i, c) in slice[..term_off].char_indices().rev() {
        if c.is_alphanumeric() || c == '.' {
            begin = i;
        } else {
            break;
        }
    }
    &slice[begin..end]
}

/// Segment sentences with the default abbreviation list.
pub fn segment_sentences(text: &str) -> Vec<Range<usize>> {
    Segmenter::default().segment(text)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Text(Range<usize>),
    /// Bracket span including the delimiters.
    Bracket(Range<usize>),
}

/// Split text into literal runs and `[...]` brackets. An unmatched `[` is
/// literal text.
fn scan_segments(text: &str) -> Vec<Segment> {
    let mut segments = Vec::new();
    let mut text_start = 0usize;
    let mut i = 0usize;
    while i < text.len() {
        let c = text[i..].chars().next().expect("in-bounds char");
        if c == '[' {
            if let Some(close) = text[i..].find(']') {
                if text_start < i {
                    segments.push(Segment::Text(text_start..i));
                }
                let end = i + close + 1;
                segments.push(Segment::Bracket(i..end));
                i = end;
                text_start = end;
                continue;
            }
        }
        i += c.len_utf8();
    }
    if text_start < text.len() {
        segments.push(Segment::Text(text_start..text.len()));
    }
    segments
}

/// What one bracket contributes.
enum ParsedBracket {
    Na,
    Triples(Vec<KnowledgeTriple>),
    Malformed,
}

fn parse_bracket(raw: &str) -> ParsedBracket {
    let inner = &raw[1..raw.len() - 1];
    if inner.trim() == "NA" {
        return ParsedBracket::Na;
    }
    let mut segments = inner.split(',');
    let head = segments.next().unwrap_or("");
    let mut subject: Option<&str> = None;
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    if head.contains(':') {
        segments = inner.split(','); // head is itself a pair; reprocess it
    } else {
        let head = head.trim();
        if head.is_empty() {
            return ParsedBracket::Malformed;
        }
        subject = Some(head);
    }
    for seg in segments {
        let Some((relation, value)) = seg.split_once(':') else {
            return ParsedBracket::Malformed;
        };
        let relation = relation.trim();
        let value = value.trim();
        if relation.is_empty() || value.is_empty() {
            return ParsedBracket::Malformed;
        }
        match relation {
            "qid" => subject = Some(value),
            "name" => {}
            _ => pairs.push((relation, value)),
        }
    }
    let Some(subject) = subject else {
        return ParsedBracket::Malformed;
    };
    if pairs.is_empty() {
        return ParsedBracket::Malformed;
    }
    ParsedBracket::Triples(
        pairs
            .into_iter()
            .map(|(r, v)| KnowledgeTriple::new(subject, r, v))
            .collect(),
    )
}

/// Parse an answer into sentences and citations. Never fails: brackets that
/// break the grammar become [`Citation::Malformed`], and a citation attaches
/// to the sentence whose terminator follows it (trailing citations after the
/// final terminator attach to the last sentence).
pub fn parse_answer(text: &str) -> AttributedAnswer {
    parse_answer_with(text, &Segmenter::default())
}

pub fn parse_answer_with(text: &str, segmenter: &Segmenter) -> AttributedAnswer {
    let mut sentences: Vec<Sentence> = Vec::new();
    for span in segmenter.segment(text) {
        let slice = &text[span.clone()];
        let mut sentence = Sentence::new(String::new());
        let mut pending_space = false;
        for seg in scan_segments(slice) {
            match seg {
                Segment::Bracket(range) => {
                    let raw = &slice[range];
                    let anchor = sentence.text.len();
                    match parse_bracket(raw) {
                        ParsedBracket::Na => {
                            sentence.push_citation_at(anchor, Citation::NotApplicable)
                        }
                        ParsedBracket::Malformed => sentence
                            .push_citation_at(anchor, Citation::Malformed(raw.to_string())),
                        ParsedBracket::Triples(triples) => {
                            for t in triples {
                                sentence.push_citation_at(anchor, Citation::Triple(t));
                            }
                        }
                    }
                }
                Segment::Text(range) => {
                    for c in slice[range].chars() {
                        if c.is_whitespace() {
                            pending_space = true;
                            continue;
                        }
                        if pending_space && !sentence.text.is_empty() && !no_space_before(c) {
                            sentence.text.push(' ');
                        }
                        pending_space = false;
                        sentence.text.push(c);
                    }
                }
            }
        }
        if sentence.text.is_empty() {
            if sentence.citations.is_empty() {
                continue; // whitespace-only span
            }
            if let Some(prev) = sentences.last_mut() {
                let anchor = prev.text.len();
                let Sentence { citations, .. } = sentence;
                for c in citations {
                    prev.push_citation_at(anchor, c);
                }
                continue;
            }
        }
        sentences.push(sentence);
    }
    AttributedAnswer {
        sentences,
        raw: text.to_string(),
    }
}

struct BracketGroup {
    anchor: usize,
    text: String,
    /// Subject of a triple group; `None` for `[NA]`.
    subject: Option<EntityId>,
}

fn group_brackets(sentence: &Sentence) -> Result<Vec<BracketGroup>, RenderError> {
    let mut groups: Vec<BracketGroup> = Vec::new();
    for (citation, &anchor) in sentence.citations.iter().zip(sentence.anchors()) {
        match citation {
            Citation::Malformed(raw) => return Err(RenderError::Malformed(raw.clone())),
            Citation::NotApplicable => groups.push(BracketGroup {
                anchor,
                text: "[NA]".to_string(),
                subject: None,
            }),
            Citation::Triple(t) => {
                let extends_last = groups.last().is_some_and(|last| {
                    last.anchor == anchor && last.subject.as_ref() == Some(&t.subject)
                });
                if extends_last {
                    let last = groups.last_mut().expect("group just checked");
                    last.text.pop(); // strip ']'
                    last.text.push_str(&format!(", {}: {}]", t.relation, t.object));
                } else {
                    groups.push(BracketGroup {
                        anchor,
                        text: format!("[{}, {}: {}]", t.subject, t.relation, t.object),
                        subject: Some(t.subject.clone()),
                    });
                }
            }
        }
    }
    Ok(groups)
}

fn render_sentence(sentence: &Sentence) -> Result<String, RenderError> {
    let mut out = String::new();
    let mut prev = 0usize;
    for group in group_brackets(sentence)? {
        out.push_str(&sentence.text[prev..group.anchor]);
        prev = group.anchor;
        if !out.is_empty() && !out.ends_with(' ') {
            out.push(' ');
        }
        out.push_str(&group.text);
        if let Some(next) = sentence.text[prev..].chars().next() {
            if !next.is_whitespace() && !no_space_before(next) {
                out.push(' ');
            }
        }
    }
    out.push_str(&sentence.text[prev..]);
    Ok(out)
}

/// Render an answer back to markup text. Consecutive triple citations sharing
/// a subject and an anchor merge back into one multi-pair bracket, so
/// `parse_answer(render_answer(a))` is structurally equal to `a` for
/// well-formed answers (no malformed citations; every non-final sentence ends
/// with a terminator).
pub fn render_answer(answer: &AttributedAnswer) -> Result<String, RenderError> {
    let rendered: Vec<String> = answer
        .sentences
        .iter()
        .map(render_sentence)
        .collect::<Result<_, _>>()?;
    Ok(rendered.join(" "))
}

/// The plain text of an answer with every citation bracket removed and
/// whitespace canonicalized.
pub fn strip_citations(text: &str) -> String {
    let parsed = parse_answer(text);
    parsed
        .sentences
        .iter()
        .map(|s| s.text.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}
