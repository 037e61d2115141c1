//! Request/response transcripts: every remote call is keyed by a hash of its
//! prompt so a finished run can be replayed bit-identically without touching
//! the network.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::judges::{
    AnswerGenerator, EntailmentJudge, EntailmentVerdict, GenerationRequest, JudgeError,
    QualityMetric, TextGrader,
};
use crate::judges::prompts::{
    assemble_generation_prompt, assemble_grading_prompt, assemble_nli_prompt,
};

/// Stable lookup key for one request.
pub fn request_key(kind: &str, prompt: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(kind.as_bytes());
    hasher.update([0x1f]);
    hasher.update(prompt.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub kind: String,
    pub key: String,
    pub response: String,
}

/// Write side: collects entries during a run, then persists them sorted by
/// key so the file is byte-stable.
#[derive(Debug, Default)]
pub struct TranscriptRecorder {
    entries: Mutex<BTreeMap<String, TranscriptEntry>>,
}

impl TranscriptRecorder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, kind: &str, prompt: &str, response: &str) {
        let key = request_key(kind, prompt);
        self.entries.lock().expect("transcript lock").insert(
            key.clone(),
            TranscriptEntry {
                kind: kind.to_string(),
                key,
                response: response.to_string(),
            },
        );
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("transcript lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn write_jsonl(&self, path: &Path) -> std::io::Result<()> {
        let mut file = File::create(path)?;
        for entry in self.entries.lock().expect("transcript lock").values() {
            let line = serde_json::to_string(entry).expect("transcript entries serialize");
            writeln!(file, "{line}")?;
        }
        Ok(())
    }
}

/// Read side: a finished transcript, indexed by request key.
#[derive(Debug, Default, Clone)]
pub struct Transcript {
    entries: BTreeMap<String, String>,
}

impl Transcript {
    pub fn load(path: &Path) -> std::io::Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut entries = BTreeMap::new();
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: TranscriptEntry = serde_json::from_str(&line)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
            entries.insert(entry.key, entry.response);
        }
        Ok(Self { entries })
    }

    pub fn lookup(&self, kind: &str, prompt: &str) -> Result<&str, JudgeError> {
        let key = request_key(kind, prompt);
        self.entries
            .get(&key)
            .map(String::as_str)
            .ok_or(JudgeError::MissingTranscript { key })
    }
}

/// Wrap a generator so every exchange lands in the recorder.
pub struct RecordingGenerator<'a, G: ?Sized> {
    pub inner: &'a G,
    pub recorder: &'a TranscriptRecorder,
}

impl<G: AnswerGenerator + ?Sized> AnswerGenerator for RecordingGenerator<'_, G> {
    fn generate(
        &self,
        question_id: &str,
        request: &GenerationRequest,
    ) -> Result<String, JudgeError> {
        let answer = self.inner.generate(question_id, request)?;
        self.recorder
            .record("generation", &assemble_generation_prompt(request), &answer);
        Ok(answer)
    }
}

/// Generator that answers only from a transcript.
pub struct ReplayGenerator {
    pub transcript: Transcript,
}

impl AnswerGenerator for ReplayGenerator {
    fn generate(
        &self,
        _question_id: &str,
        request: &GenerationRequest,
    ) -> Result<String, JudgeError> {
        self.transcript
            .lookup("generation", &assemble_generation_prompt(request))
            .map(str::to_string)
    }
}

pub struct RecordingEntailment<'a, J: ?Sized> {
    pub inner: &'a J,
    pub recorder: &'a TranscriptRecorder,
}

impl<J: EntailmentJudge + ?Sized> EntailmentJudge for RecordingEntailment<'_, J> {
    fn entails(&self, premise: &str, hypothesis: &str) -> Result<EntailmentVerdict, JudgeError> {
        let verdict = self.inner.entails(premise, hypothesis)?;
        let response = match verdict.raw_score {
            Some(score) => format!("{score}"),
            None => {
                if verdict.entailed {
                    "1".to_string()
                } else {
                    "0".to_string()
                }
            }
        };
        self.recorder
            .record("nli", &assemble_nli_prompt(premise, hypothesis), &response);
        Ok(verdict)
    }
}

pub struct ReplayEntailment {
    pub transcript: Transcript,
}

impl EntailmentJudge for ReplayEntailment {
    fn entails(&self, premise: &str, hypothesis: &str) -> Result<EntailmentVerdict, JudgeError> {
        let reply = self
            .transcript
            .lookup("nli", &assemble_nli_prompt(premise, hypothesis))?;
        let score: f64 = reply.trim().parse().map_err(|_| JudgeError::Endpoint(
            format!("transcripted NLI response is not a score: {reply:?}"),
        ))?;
        Ok(EntailmentVerdict::from_score(score))
    }
}

pub struct RecordingGrader<'a, G: ?Sized> {
    pub inner: &'a G,
    pub recorder: &'a TranscriptRecorder,
}

impl<G: TextGrader + ?Sized> TextGrader for RecordingGrader<'_, G> {
    fn grade(
        &self,
        question_id: &str,
        question: &str,
        answer: &str,
        metric: QualityMetric,
    ) -> Result<u8, JudgeError> {
        let score = self.inner.grade(question_id, question, answer, metric)?;
        self.recorder.record(
            "grading",
            &assemble_grading_prompt(metric, question, answer),
            &score.to_string(),
        );
        Ok(score)
    }
}

pub struct ReplayGrader {
    pub transcript: Transcript,
}

impl TextGrader for ReplayGrader {
    fn grade(
        &self,
        _question_id: &str,
        question: &str,
        answer: &str,
        metric: QualityMetric,
    ) -> Result<u8, JudgeError> {
        let reply = self
            .transcript
            .lookup("grading", &assemble_grading_prompt(metric, question, answer))?;
        crate::judges::parse_grade(reply)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::judges::mock::LexicalEntailment;

    #[test]
    fn record_then_replay_is_lossless() {
        let dir = std::env::temp_dir().join(format!("kgcite-transcript-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("transcript.jsonl");

        let recorder = TranscriptRecorder::new();
        let judge = LexicalEntailment;
        let recording = RecordingEntailment {
            inner: &judge,
            recorder: &recorder,
        };
        let premise = "Crane attended Syracuse University.";
        let hypothesis = "alma mater: Syracuse University";
        let live = recording.entails(premise, hypothesis).unwrap();
        recorder.write_jsonl(&path).unwrap();

        let replay = ReplayEntailment {
            transcript: Transcript::load(&path).unwrap(),
        };
        let replayed = replay.entails(premise, hypothesis).unwrap();
        assert_eq!(live.entailed, replayed.entailed);
        assert!(matches!(
            replay.entails("different", "premise: pair"),
            Err(JudgeError::MissingTranscript { .. })
        ));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn keys_separate_kinds() {
        assert_ne!(request_key("nli", "x"), request_key("generation", "x"));
        assert_eq!(request_key("nli", "x"), request_key("nli", "x"));
    }
}
