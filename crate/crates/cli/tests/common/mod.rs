//! Shared fixtures for the command-line test suites.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const LIE_TEXTS: [&str; 4] = [
    "I promise we will never attack you, trust me completely my friend",
    "believe me, I have always been honest with you about the north",
    "you can trust us, we definitely hold our fleets back this season",
    "I swear my armies move away from your border, I guarantee it",
];
pub const TRUTH_TEXTS: [&str; 4] = [
    "we plan to attack the north province this fall",
    "my fleet moves to the channel, please support the army",
    "let us split the supply centers as agreed last turn",
    "I will hold this season and support you into the south",
];

/// A small deterministic corpus: `games` games, `dialogs` dialogs each,
/// `messages` messages per dialog, roughly a fifth of them lies.
pub fn fixture_corpus(games: u32, dialogs: u32, messages: usize) -> String {
    let mut lines = Vec::new();
    for game in 0..games {
        for dialog in 0..dialogs {
            let mut texts = Vec::new();
            let mut labels = Vec::new();
            for i in 0..messages {
                let lie = (i + dialog as usize + game as usize).is_multiple_of(5);
                let pool = if lie { &LIE_TEXTS } else { &TRUTH_TEXTS };
                texts.push(pool[(game as usize + dialog as usize + i) % pool.len()]);
                labels.push(serde_json::json!(lie));
            }
            let season = ["Spring", "Fall", "Winter"][dialog as usize % 3];
            lines.push(
                serde_json::json!({
                    "messages": texts,
                    "speakers": vec!["italy"; messages],
                    "receivers": vec!["germany"; messages],
                    "sender_labels": labels,
                    "receiver_labels": vec![serde_json::json!("NOANNOTATION"); messages],
                    "game_score": vec!["4"; messages],
                    "game_score_delta": (0..messages).map(|i| i as i64 % 5 - 2).collect::<Vec<_>>(),
                    "seasons": vec![season; messages],
                    "years": vec!["1902"; messages],
                    "absolute_message_index": (0..messages).map(|i| dialog as usize * 1000 + i * 2).collect::<Vec<_>>(),
                    "relative_message_index": (0..messages).collect::<Vec<_>>(),
                    "game_id": game,
                    "players": ["italy", "germany"],
                })
                .to_string(),
            );
        }
    }
    lines.join("\n") + "\n"
}

pub fn write_fixture(dir: &Path, config_extra: &str) -> PathBuf {
    std::fs::write(dir.join("corpus.jsonl"), fixture_corpus(12, 3, 8)).unwrap();
    let config = format!(
        r#"
[paths]
corpus = "corpus.jsonl"
output_dir = "out"

[model]
embed_dim = 48

[embed]
dim = 48

[train]
epochs = 5
seed = 11

[eval]
seeds = [1, 2, 3]
{config_extra}
"#
    );
    let path = dir.join("pulie.toml");
    std::fs::write(&path, config).unwrap();
    path
}

pub fn pulie(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pulie"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn pulie_ok(dir: &Path, args: &[&str]) -> String {
    let out = pulie(dir, args);
    assert!(
        out.status.success(),
        "`pulie {}` failed:\nstdout: {}\nstderr: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).to_string()
}

/// Parse JSON with every `timing` key removed, for wall-clock-insensitive
/// comparisons.
pub fn json_without_timing(raw: &str) -> serde_json::Value {
    let mut value: serde_json::Value = serde_json::from_str(raw).unwrap();
    strip_timing(&mut value);
    value
}

fn strip_timing(value: &mut serde_json::Value) {
    if let serde_json::Value::Object(map) = value {
        map.remove("timing");
        for (_, v) in map.iter_mut() {
            strip_timing(v);
        }
    }
}
