//! Runs the study service on a loopback port and drives it with a scripted
//! client: two sessions over twelve procedurally generated image triples,
//! answering "identical" exactly when both images are byte-equal.
//!
//! ```text
//! cargo run --release -p ebim-study --example scripted_client
//! ```

use ebim_study::{serve, Ack, ImageTriple, ResultsReport, SessionDescriptor, Study, StudyConfig, TrialPayload};
use serde_json::json;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let pgm = |seed: u8| {
        let mut bytes = b"P5\n4 4\n255\n".to_vec();
        bytes.extend((0..16u8).map(|k| k.wrapping_mul(29).wrapping_add(seed)));
        bytes
    };
    let mut triples = Vec::new();
    for i in 0..4u8 {
        let path = |kind: &str, content: Vec<u8>| -> std::io::Result<_> {
            let p = dir.path().join(format!("scene{i}_{kind}.pgm"));
            std::fs::write(&p, content)?;
            Ok(p)
        };
        triples.push(ImageTriple {
            id: format!("scene{i}"),
            original: path("original", pgm(i))?,
            bim: path("bim", pgm(i + 50))?,
            ebim: path("ebim", pgm(i + 100))?,
        });
    }
    let log = dir.path().join("responses.jsonl");
    let study = Study::open(StudyConfig::new(triples), &log)?;

    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let base = format!("http://{}", listener.local_addr()?);
    tokio::spawn(serve(listener, study));
    println!("service on {base}");

    let http = reqwest::Client::new();
    for seed in [1u64, 2] {
        let session: SessionDescriptor = http
            .post(format!("{base}/api/session"))
            .json(&json!({ "seed": seed }))
            .send()
            .await?
            .json()
            .await?;
        println!("session {} with {} trials", session.session_id, session.trial_count);
        for i in 0..session.trial_count {
            let trial: TrialPayload = http
                .get(format!("{base}/api/trial/{}/{i}", session.session_id))
                .send()
                .await?
                .json()
                .await?;
            let left = http.get(format!("{base}{}", trial.left_url)).send().await?.bytes().await?;
            let right = http.get(format!("{base}{}", trial.right_url)).send().await?.bytes().await?;
            let choice = if left == right { "identical" } else { "different" };
            let ack: Ack = http
                .post(format!("{base}/api/response/{}/{i}", session.session_id))
                .json(&json!({ "choice": choice, "latency_ms": 1200 }))
                .send()
                .await?
                .json()
                .await?;
            println!("  trial {i:>2}: {choice:<9} ({} remaining)", ack.remaining);
        }
    }

    let results: ResultsReport = http.get(format!("{base}/api/results")).send().await?.json().await?;
    println!("{} responses, {} finished sessions", results.responses, results.finished_sessions);
    match &results.battery {
        Some(b) => print!("{}", b.render_table()),
        None => println!("{}", results.note.unwrap_or_default()),
    }
    println!("{} lines in the response log", std::fs::read_to_string(&log)?.lines().count());
    Ok(())
}
