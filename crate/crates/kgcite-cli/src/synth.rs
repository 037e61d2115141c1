//! Deterministic synthetic corpora for the harnesses and the acceptance
//! suite: grounded question/knowledge fixtures with exactly sized minimum
//! sets, and a namesake-disambiguation fixture with a known solvable share.
//! Everything is index-driven, so two builds are always byte-identical.

use kgcite::metrics::MinKnowledgeSet;
use kgcite::questiongen::DatasetEntry;
use kgcite::store::{KnowledgeStore, KnowledgeTriple, StoreRecord, SubGraph};

const FIRST_NAMES: [&str; 25] = [
    "Avery", "Blair", "Casey", "Devon", "Ellis", "Finley", "Harper", "Indigo", "Jules",
    "Kendall", "Logan", "Marlow", "Noa", "Oakley", "Peyton", "Quinn", "Reese", "Sage", "Tatum",
    "Umber", "Vale", "Wren", "Xenia", "Yael", "Zion",
];

const LAST_NAMES: [&str; 25] = [
    "Aldrin", "Becker", "Calloway", "Dorsey", "Ellison", "Fairbank", "Granger", "Holloway",
    "Iverson", "Jennings", "Keating", "Lockwood", "Mercer", "Northway", "Osmond", "Prescott",
    "Quimby", "Rutherford", "Sexton", "Thornton", "Underhill", "Vantage", "Winslow", "Yardley",
    "Zellner",
];

/// Minimum-set relations, in the order they are assigned.
const CORE_RELATIONS: [&str; 6] = [
    "occupation",
    "place of birth",
    "employer",
    "award received",
    "notable works",
    "field of work",
];

const CORE_OBJECT_WORDS: [&str; 6] = [
    "archivist",
    "Port Halden",
    "Meridian Institute",
    "Laurel Medal",
    "The Quiet Ledger",
    "cartography",
];

/// Extra neighborhood relations outside every minimum set.
const EXTRA_RELATIONS: [&str; 3] = ["languages spoken", "residence", "position held"];
const EXTRA_OBJECT_WORDS: [&str; 3] = ["Arlick", "Fenwick Row", "senior fellow"];

fn synth_name(i: usize) -> String {
    format!(
        "{} {}",
        FIRST_NAMES[i % FIRST_NAMES.len()],
        LAST_NAMES[(i / FIRST_NAMES.len()) % LAST_NAMES.len()]
    )
}

/// A synthetic store plus a dataset grounded in it. The raw records are
/// kept so tests can write the store back out as a dump file.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub store: KnowledgeStore,
    pub records: Vec<StoreRecord>,
    pub entries: Vec<DatasetEntry>,
}

/// `n_entries` one-person questions whose minimum sets have exactly
/// `min_set_size` triples, all present in the person's neighborhood, plus
/// `extra_triples` neighborhood triples outside the minimum set. Object
/// values are unique within an entry, so lexical entailment cannot cross
/// wires between removed triples.
pub fn grounded_corpus(n_entries: usize, min_set_size: usize, extra_triples: usize) -> SynthCorpus {
    assert!(min_set_size <= CORE_RELATIONS.len(), "enlarge CORE_RELATIONS");
    assert!(extra_triples <= EXTRA_RELATIONS.len(), "enlarge EXTRA_RELATIONS");
    let mut store = KnowledgeStore::new();
    let mut records = Vec::new();
    let mut entries = Vec::with_capacity(n_entries);
    for i in 0..n_entries {
        let id = format!("Q{}", 100_000 + i);
        let name = synth_name(i);
        let mut min_triples = Vec::new();
        for j in 0..min_set_size {
            let object = format!("{} {}", CORE_OBJECT_WORDS[j], 1000 + i);
            let record = StoreRecord::new(&id, &name, "human", CORE_RELATIONS[j], &object);
            store
                .insert_record(record.clone())
                .expect("synthetic record is well-formed");
            records.push(record);
            min_triples.push(KnowledgeTriple::new(id.as_str(), CORE_RELATIONS[j], object));
        }
        for j in 0..extra_triples {
            let object = format!("{} {}", EXTRA_OBJECT_WORDS[j], 1000 + i);
            let record = StoreRecord::new(&id, &name, "human", EXTRA_RELATIONS[j], &object);
            store
                .insert_record(record.clone())
                .expect("synthetic record is well-formed");
            records.push(record);
        }
        entries.push(DatasetEntry {
            id: Some(format!("q{:04}", i + 1)),
            general_question: format!("Who is {name} and what are they known for?"),
            specific_question: format!(
                "What are the recorded details of {name}'s life, including their {} and {}?",
                CORE_RELATIONS[0], CORE_RELATIONS[1]
            ),
            min_set: MinKnowledgeSet::new(min_triples),
            people: vec![kgcite::store::EntityId::new(id.as_str())],
        });
    }
    SynthCorpus { store, records, entries }
}

/// Decoy graphs over a disjoint id range, for corruption tests that need a
/// pool fully separate from the corpus.
pub fn decoy_graphs(count: usize) -> Vec<SubGraph> {
    let mut store = KnowledgeStore::new();
    let mut graphs = Vec::with_capacity(count);
    for i in 0..count {
        let id = format!("Q{}", 900_000 + i);
        let name = format!("{} the Distractor", synth_name(i));
        for j in 0..3 {
            let object = format!("{} d{}", CORE_OBJECT_WORDS[j], 9000 + i);
            store
                .insert_record(StoreRecord::new(&id, &name, "human", CORE_RELATIONS[j], &object))
                .expect("synthetic record is well-formed");
        }
        graphs.push(
            store
                .neighborhood(&kgcite::store::EntityId::new(id.as_str()))
                .expect("decoy entity just inserted"),
        );
    }
    graphs
}

/// How one namesake question should resolve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamesakeKind {
    /// The question mentions a neighbor of the gold candidate, so re-ranking
    /// can find it.
    Resolvable,
    /// The question gives no signal; the smallest-id tie-break decides, and
    /// the gold answer is deliberately the other candidate.
    Ambiguous,
}

/// A disambiguation fixture: `resolvable + ambiguous` questions over
/// namesake pairs. Every resolvable question is answerable by neighbor
/// overlap; every ambiguous one defeats the tie-break, so corpus retrieval
/// accuracy is exactly `resolvable / (resolvable + ambiguous)`.
pub fn namesake_corpus(resolvable: usize, ambiguous: usize) -> (SynthCorpus, Vec<NamesakeKind>) {
    let total = resolvable + ambiguous;
    let pairs = FIRST_NAMES.len().min(total.max(1));
    let mut store = KnowledgeStore::new();
    let mut records = Vec::new();

    let partner = |p: usize, which: usize| -> String {
        format!(
            "{} {}",
            FIRST_NAMES[(p + 3 + 5 * which) % FIRST_NAMES.len()],
            LAST_NAMES[(p + 7 + 3 * which) % LAST_NAMES.len()]
        )
    };

    for p in 0..pairs {
        let name = format!("{} {}", FIRST_NAMES[p], LAST_NAMES[p]);
        for which in 0..2usize {
            let id = format!("Q{}", 200_000 + 2 * p + which);
            let spouse = partner(p, which);
            let employer = format!("{} Workshop {}", LAST_NAMES[(p + which) % 25], which);
            for (rel, obj) in [
                ("spouse", spouse.as_str()),
                ("employer", employer.as_str()),
                ("occupation", if which == 0 { "engraver" } else { "composer" }),
            ] {
                let record = StoreRecord::new(&id, &name, "human", rel, obj);
                store
                    .insert_record(record.clone())
                    .expect("synthetic record is well-formed");
                records.push(record);
            }
        }
    }

    let mut entries = Vec::with_capacity(total);
    let mut kinds = Vec::with_capacity(total);
    for i in 0..total {
        let p = i % pairs;
        let name = format!("{} {}", FIRST_NAMES[p], LAST_NAMES[p]);
        let kind = if i < resolvable {
            NamesakeKind::Resolvable
        } else {
            NamesakeKind::Ambiguous
        };
        // Resolvable questions alternate which namesake is the target;
        // ambiguous ones always target the higher id so the tie-break misses.
        let which = match kind {
            NamesakeKind::Resolvable => i % 2,
            NamesakeKind::Ambiguous => 1,
        };
        let gold = format!("Q{}", 200_000 + 2 * p + which);
        let question = match kind {
            NamesakeKind::Resolvable => format!(
                "How did the marriage of {name} to {} shape their later work?",
                partner(p, which)
            ),
            NamesakeKind::Ambiguous => format!("What is known about the life of {name}?"),
        };
        let gold_id = kgcite::store::EntityId::new(gold.as_str());
        let min_set = MinKnowledgeSet::new(
            store
                .neighborhood(&gold_id)
                .expect("gold entity exists")
                .triples()
                .iter()
                .cloned(),
        );
        entries.push(DatasetEntry {
            id: Some(format!("q{:04}", i + 1)),
            general_question: question.clone(),
            specific_question: question,
            min_set,
            people: vec![gold_id],
        });
        kinds.push(kind);
    }
    (SynthCorpus { store, records, entries }, kinds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grounded_corpus_is_deterministic_and_sized() {
        let a = grounded_corpus(10, 5, 3);
        let b = grounded_corpus(10, 5, 3);
        assert_eq!(a.entries, b.entries);
        assert_eq!(a.entries.len(), 10);
        for entry in &a.entries {
            assert_eq!(entry.min_set.len(), 5);
            let graph = a.store.neighborhood(&entry.people[0]).unwrap();
            assert_eq!(graph.len(), 8);
            for t in entry.min_set.iter() {
                assert!(graph.contains(t), "minimum set lives in the neighborhood");
            }
        }
    }

    #[test]
    fn namesake_corpus_three_way_contract() {
        let (corpus, kinds) = namesake_corpus(38, 12);
        assert_eq!(corpus.entries.len(), 50);
        assert_eq!(kinds.iter().filter(|k| **k == NamesakeKind::Resolvable).count(), 38);
        // Every name maps to exactly two store candidates.
        for entry in &corpus.entries {
            let name = entry
                .general_question
                .split(" of ")
                .nth(1)
                .map(|s| s.split(" to ").next().unwrap_or(s));
            if let Some(name) = name {
                let onlyname = name.trim_end_matches('?');
                let candidates = corpus.store.find_nodes_by_name(onlyname, Some("human"));
                if !candidates.is_empty() {
                    assert_eq!(candidates.len(), 2, "namesakes for {onlyname}");
                }
            }
        }
    }

    #[test]
    fn decoys_use_a_disjoint_id_range() {
        let corpus = grounded_corpus(5, 5, 0);
        let decoys = decoy_graphs(5);
        for d in &decoys {
            assert!(corpus.store.neighborhood(&d.center().id).is_err());
        }
    }
}
