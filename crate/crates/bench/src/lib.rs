//! Deterministic fixture builders shared by the benchmark targets.

use pulie_core::corpus::{MessageRecord, PuLabel, Season, SenderAnnotation};
use pulie_core::model::{init_params, ModelDims, ModelParams};

const PHRASES: [&str; 6] = [
    "I promise we will never attack you, trust me completely my friend",
    "we plan to attack the north province this fall with two armies",
    "maybe you could support my fleet into the channel next season?",
    "believe me, I have always been honest with you about my moves",
    "let us split the supply centers as agreed, I will hold the south",
    "you lied to me last year and I will definitely not forget it!",
];

pub fn sample_record(i: usize) -> MessageRecord {
    MessageRecord {
        text: format!(
            "{} {}",
            PHRASES[i % PHRASES.len()],
            PHRASES[(i * 7 + 3) % PHRASES.len()]
        ),
        speaker: "italy".to_string(),
        receiver: "germany".to_string(),
        sender_annotation: if i.is_multiple_of(20) {
            SenderAnnotation::Lie
        } else {
            SenderAnnotation::Truth
        },
        game_id: (i / 100) as u32,
        season: match i % 3 {
            0 => Season::Spring,
            1 => Season::Fall,
            _ => Season::Winter,
        },
        year: 1901 + (i % 8) as i32,
        game_score: (i % 18) as i32,
        game_score_delta: (i % 9) as i32 - 4,
        absolute_index: i as u32,
        relative_index: (i % 40) as u32,
    }
}

/// A logit/label batch with the PU preconditions satisfied.
pub fn sample_batch(len: usize) -> (Vec<f64>, Vec<PuLabel>) {
    let scores: Vec<f64> = (0..len)
        .map(|i| ((i * 37 % 200) as f64 - 100.0) / 25.0)
        .collect();
    let labels: Vec<PuLabel> = (0..len)
        .map(|i| {
            if i % 10 == 0 {
                PuLabel::Positive
            } else {
                PuLabel::Unlabeled
            }
        })
        .collect();
    (scores, labels)
}

pub fn default_model() -> (ModelDims, ModelParams, Vec<f64>, Vec<f64>) {
    let dims = ModelDims::default();
    let params = init_params(&dims, 7);
    let features: Vec<f64> = (0..dims.feature_dim)
        .map(|i| (i as f64 * 0.37).sin())
        .collect();
    let embedding: Vec<f64> = (0..dims.embed_dim)
        .map(|i| (i as f64 * 0.11).cos() * 0.05)
        .collect();
    (dims, params, features, embedding)
}
