//! Property tests over generated answers: the parse/render fixpoint and the
//! bracket-expansion count.

use kgcite::citation::{parse_answer, render_answer, AttributedAnswer, Citation, Sentence};
use kgcite::store::KnowledgeTriple;
use proptest::prelude::*;

/// Words that never collide with the default abbreviation list or bracket
/// syntax.
fn word() -> impl Strategy<Value = String> {
    "[a-z]{1,8}".prop_filter("abbreviation-safe", |w| {
        !matches!(w.as_str(), "vs" | "etc" | "cf" | "al" | "no" | "st" | "dr" | "fig")
    })
}

fn phrase(max_words: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(word(), 1..=max_words).prop_map(|ws| ws.join(" "))
}

fn subject() -> impl Strategy<Value = String> {
    "Q[1-9][0-9]{0,5}"
}

fn citation() -> impl Strategy<Value = Citation> {
    prop_oneof![
        1 => Just(Citation::NotApplicable),
        4 => (subject(), phrase(3), phrase(3))
            .prop_map(|(s, r, o)| Citation::Triple(KnowledgeTriple::new(s.as_str(), r, o))),
    ]
}

fn sentence() -> impl Strategy<Value = Sentence> {
    (phrase(8), prop::collection::vec(citation(), 0..5))
        .prop_map(|(text, citations)| Sentence::with_citations(format!("{text}."), citations))
}

fn answer() -> impl Strategy<Value = AttributedAnswer> {
    prop::collection::vec(sentence(), 1..6).prop_map(AttributedAnswer::from_sentences)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parse_render_fixpoint(a in answer()) {
        let rendered = render_answer(&a).expect("generated answers are well-formed");
        let parsed = parse_answer(&rendered);
        prop_assert_eq!(&parsed.sentences, &a.sentences);
        // And the fixpoint is stable: rendering again changes nothing.
        let rendered_again = render_answer(&parsed).unwrap();
        prop_assert_eq!(rendered_again, rendered);
    }

    #[test]
    fn bracket_with_k_pairs_expands_to_k_triples(
        s in subject(),
        pairs in prop::collection::vec((phrase(2), phrase(2)), 1..7),
    ) {
        let body: Vec<String> = pairs.iter().map(|(r, v)| format!("{r}: {v}")).collect();
        let raw = format!("A sentence [{}, {}].", s, body.join(", "));
        let parsed = parse_answer(&raw);
        prop_assert_eq!(parsed.triple_citations().count(), pairs.len());
        // All expanded triples share the bracket head subject.
        prop_assert!(parsed.triple_citations().all(|t| t.subject.as_str() == s));
    }

    #[test]
    fn sentence_spans_partition_any_text(text in "[ -~]{0,200}") {
        let spans = kgcite::segment_sentences(&text);
        let mut cursor = 0usize;
        for span in &spans {
            prop_assert_eq!(span.start, cursor);
            prop_assert!(span.end > span.start);
            cursor = span.end;
        }
        if !text.is_empty() {
            prop_assert_eq!(cursor, text.len());
        }
    }

    #[test]
    fn no_citation_lands_on_two_sentences(a in answer()) {
        let rendered = render_answer(&a).unwrap();
        let parsed = parse_answer(&rendered);
        let total: usize = parsed.sentences.iter().map(|s| s.citations().len()).collect::<Vec<_>>().iter().sum();
        let expected: usize = a.sentences.iter().map(|s| s.citations().len()).sum();
        prop_assert_eq!(total, expected);
    }
}
