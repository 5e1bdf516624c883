use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use ebim::stats::{
    read_jsonl, run_hypothesis_battery, summarize, Battery, Choice, Condition, ParticipantSummary,
    Placement, TrialRecord, DEFAULT_ALPHA,
};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::StudyConfig;
use crate::session::{plan_session, SessionPlan};
use crate::{Result, StudyError};

/// Returned to the client when a session starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionDescriptor {
    pub session_id: String,
    pub trial_count: usize,
    pub button_order: [Choice; 2],
}

/// What the client needs to show one trial. Deliberately carries nothing
/// that identifies the condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialPayload {
    pub left_url: String,
    pub right_url: String,
    pub display_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseBody {
    pub choice: Choice,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ack {
    pub accepted: bool,
    pub answered: usize,
    pub remaining: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionResult {
    #[serde(flatten)]
    pub summary: ParticipantSummary,
    /// Every trial of the session has been answered.
    pub finished: bool,
}

/// Aggregate view over the response log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsReport {
    pub responses: usize,
    pub sessions: Vec<SessionResult>,
    pub finished_sessions: usize,
    /// Present once at least two sessions are finished.
    pub battery: Option<Battery>,
    /// Why the battery is missing, if it is.
    pub note: Option<String>,
}

/// Aggregates a response log. Only finished sessions (with exactly
/// `trials_per_session` responses) enter the hypothesis battery.
pub fn results_from_records(
    records: &[TrialRecord],
    trials_per_session: usize,
) -> Result<ResultsReport> {
    let summaries = summarize(records)?;
    let sessions: Vec<SessionResult> = summaries
        .into_iter()
        .map(|summary| SessionResult {
            finished: summary.counts.iter().sum::<usize>() == trials_per_session,
            summary,
        })
        .collect();
    let finished: Vec<ParticipantSummary> = sessions
        .iter()
        .filter(|s| s.finished)
        .map(|s| s.summary.clone())
        .collect();
    let (battery, note) = if finished.len() < 2 {
        (
            None,
            Some(format!(
                "the hypothesis battery needs at least 2 finished sessions, have {}",
                finished.len()
            )),
        )
    } else {
        match run_hypothesis_battery(&finished, DEFAULT_ALPHA) {
            Ok(b) => (Some(b), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    Ok(ResultsReport {
        responses: records.len(),
        finished_sessions: finished.len(),
        sessions,
        battery,
        note,
    })
}

struct Session {
    plan: SessionPlan,
    /// Image tokens for the left and right slot of every trial.
    tokens: Vec<[String; 2]>,
    next: usize,
}

/// Study state: configuration, live sessions, image tokens and the
/// append-only response log.
pub struct Study {
    config: StudyConfig,
    log_path: PathBuf,
    log: File,
    records: Vec<TrialRecord>,
    sessions: HashMap<String, Session>,
    images: HashMap<String, PathBuf>,
    sessions_created: u64,
}

/// 128 random bits as lowercase hex.
fn token() -> String {
    hex::encode(rand::rng().random::<[u8; 16]>())
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl Study {
    /// Opens (or creates) the response log at `log_path`. Responses already
    /// in the log are loaded and count towards the results.
    pub fn open(config: StudyConfig, log_path: impl AsRef<Path>) -> Result<Self> {
        config.validate()?;
        let log_path = log_path.as_ref().to_path_buf();
        let records = if log_path.exists() {
            read_jsonl(BufReader::new(File::open(&log_path)?))?
        } else {
            Vec::new()
        };
        summarize(&records)?;
        let log = OpenOptions::new().create(true).append(true).open(&log_path)?;
        Ok(Self {
            config,
            log_path,
            log,
            records,
            sessions: HashMap::new(),
            images: HashMap::new(),
            sessions_created: 0,
        })
    }

    pub fn config(&self) -> &StudyConfig {
        &self.config
    }

    pub fn log_path(&self) -> &Path {
        &self.log_path
    }

    pub fn records(&self) -> &[TrialRecord] {
        &self.records
    }

    /// Starts a session. Without `seed`, the config's base seed plus the
    /// session counter is used, or fresh randomness if there is none.
    pub fn create_session(&mut self, seed: Option<u64>) -> SessionDescriptor {
        let seed = seed
            .or_else(|| self.config.seed.map(|s| s.wrapping_add(self.sessions_created)))
            .unwrap_or_else(|| rand::rng().random());
        self.sessions_created += 1;
        let plan = plan_session(self.config.triples.len(), seed);

        let tokens = plan
            .trials
            .iter()
            .map(|t| {
                let triple = &self.config.triples[t.triple];
                let other = match t.condition {
                    Condition::None => &triple.original,
                    Condition::Bim => &triple.bim,
                    Condition::Ebim => &triple.ebim,
                };
                let (left, right) = match t.original_side {
                    Placement::Left => (&triple.original, other),
                    Placement::Right => (other, &triple.original),
                };
                let pair = [token(), token()];
                self.images.insert(pair[0].clone(), left.clone());
                self.images.insert(pair[1].clone(), right.clone());
                pair
            })
            .collect();

        let id = token();
        let descriptor = SessionDescriptor {
            session_id: id.clone(),
            trial_count: plan.trials.len(),
            button_order: plan.button_order,
        };
        self.sessions.insert(id, Session { plan, tokens, next: 0 });
        descriptor
    }

    fn session(&self, sid: &str) -> Result<&Session> {
        self.sessions
            .get(sid)
            .ok_or_else(|| StudyError::UnknownSession(sid.to_string()))
    }

    /// Checks that `index` is the session's current trial.
    fn current(session: &Session, index: usize) -> Result<()> {
        let count = session.plan.trials.len();
        if index >= count {
            Err(StudyError::TrialOutOfRange { index, count })
        } else if index < session.next {
            Err(StudyError::AlreadyAnswered { index })
        } else if index > session.next {
            Err(StudyError::OutOfOrder {
                index,
                current: session.next,
            })
        } else {
            Ok(())
        }
    }

    pub fn trial(&self, sid: &str, index: usize) -> Result<TrialPayload> {
        let session = self.session(sid)?;
        Self::current(session, index)?;
        let [left, right] = &session.tokens[index];
        Ok(TrialPayload {
            left_url: format!("/img/{left}"),
            right_url: format!("/img/{right}"),
            display_ms: self.config.display_duration_ms,
        })
    }

    /// Records the answer to the current trial and appends it to the log.
    pub fn respond(&mut self, sid: &str, index: usize, body: ResponseBody) -> Result<Ack> {
        let session = self.session(sid)?;
        Self::current(session, index)?;
        let planned = session.plan.trials[index];
        let triple = &self.config.triples[planned.triple];
        let tag = match planned.condition {
            Condition::None => "i",
            Condition::Bim => "ii",
            Condition::Ebim => "iii",
        };
        let record = TrialRecord {
            session_id: sid.to_string(),
            trial_index: index,
            pair_id: format!("{}/{tag}", triple.id),
            condition: planned.condition,
            original_side: planned.original_side,
            choice: body.choice,
            latency_ms: body.latency_ms,
            timestamp_ms: now_ms(),
        };
        let mut line = serde_json::to_string(&record).expect("records serialize");
        line.push('\n');
        self.log.write_all(line.as_bytes())?;
        self.log.sync_data()?;
        self.records.push(record);

        let session = self.sessions.get_mut(sid).expect("checked above");
        session.next += 1;
        Ok(Ack {
            accepted: true,
            answered: session.next,
            remaining: session.plan.trials.len() - session.next,
        })
    }

    /// Path of the image behind a token.
    pub fn image_path(&self, token: &str) -> Result<&Path> {
        self.images
            .get(token)
            .map(PathBuf::as_path)
            .ok_or(StudyError::UnknownImage)
    }

    pub fn image(&self, token: &str) -> Result<(Vec<u8>, &'static str)> {
        let path = self.image_path(token)?;
        let kind = match path.extension().and_then(|e| e.to_str()) {
            Some("png") => "image/png",
            Some("pgm") => "image/x-portable-graymap",
            Some("ppm") => "image/x-portable-pixmap",
            _ => "application/octet-stream",
        };
        Ok((fs::read(path)?, kind))
    }

    pub fn results(&self) -> Result<ResultsReport> {
        results_from_records(&self.records, self.config.trial_count())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ImageTriple;

    fn fixture(triples: usize) -> (tempfile::TempDir, StudyConfig) {
        let dir = tempfile::tempdir().unwrap();
        let triples = (0..triples)
            .map(|i| {
                let mut paths = Vec::new();
                for kind in ["orig", "bim", "ebim"] {
                    let p = dir.path().join(format!("{i}_{kind}.pgm"));
                    fs::write(&p, format!("P5\n1 1\n255\n{}", kind.len())).unwrap();
                    paths.push(p);
                }
                ImageTriple {
                    id: format!("t{i}"),
                    original: paths[0].clone(),
                    bim: paths[1].clone(),
                    ebim: paths[2].clone(),
                }
            })
            .collect();
        (dir, StudyConfig::new(triples))
    }

    fn answer(choice: Choice) -> ResponseBody {
        ResponseBody { choice, latency_ms: 900 }
    }

    #[test]
    fn condition_one_shows_the_original_twice_under_distinct_tokens() {
        let (dir, config) = fixture(4);
        let mut study = Study::open(config.clone(), dir.path().join("log.jsonl")).unwrap();
        let s = study.create_session(Some(1));
        let plan = study.sessions[&s.session_id].plan.clone();
        for (i, t) in plan.trials.iter().enumerate() {
            let p = study.trial(&s.session_id, i).unwrap();
            let left = study.image_path(p.left_url.trim_start_matches("/img/")).unwrap().to_path_buf();
            let right = study.image_path(p.right_url.trim_start_matches("/img/")).unwrap().to_path_buf();
            assert_ne!(p.left_url, p.right_url);
            let original = &config.triples[t.triple].original;
            match t.condition {
                Condition::None => assert!(left == *original && right == *original),
                _ => assert_ne!(left, right),
            }
            study.respond(&s.session_id, i, answer(Choice::Identical)).unwrap();
        }
    }

    #[test]
    fn trials_are_taken_in_order_once() {
        let (dir, config) = fixture(2);
        let log = dir.path().join("log.jsonl");
        let mut study = Study::open(config, &log).unwrap();
        let sid = study.create_session(None).session_id;
        assert!(matches!(study.trial(&sid, 1), Err(StudyError::OutOfOrder { .. })));
        assert!(matches!(study.trial(&sid, 6), Err(StudyError::TrialOutOfRange { .. })));
        let ack = study.respond(&sid, 0, answer(Choice::Different)).unwrap();
        assert_eq!((ack.answered, ack.remaining), (1, 5));
        let before = fs::read(&log).unwrap();
        assert!(matches!(
            study.respond(&sid, 0, answer(Choice::Identical)),
            Err(StudyError::AlreadyAnswered { index: 0 })
        ));
        assert_eq!(fs::read(&log).unwrap(), before);
        assert!(matches!(study.trial("nope", 0), Err(StudyError::UnknownSession(_))));
    }

    #[test]
    fn results_need_two_finished_sessions() {
        let (dir, config) = fixture(2);
        let mut study = Study::open(config, dir.path().join("log.jsonl")).unwrap();
        let empty = study.results().unwrap();
        assert_eq!((empty.responses, empty.sessions.len()), (0, 0));
        assert!(empty.battery.is_none());

        let sid = study.create_session(Some(4)).session_id;
        for i in 0..6 {
            study.respond(&sid, i, answer(Choice::Identical)).unwrap();
        }
        let one = study.results().unwrap();
        assert!(one.sessions[0].finished);
        assert_eq!(one.sessions[0].summary.means, [Some(1.0); 3]);
        assert!(one.battery.is_none() && one.note.is_some());
    }

    #[test]
    fn reopening_replays_the_log() {
        let (dir, config) = fixture(3);
        let log = dir.path().join("log.jsonl");
        let report = {
            let mut study = Study::open(config.clone(), &log).unwrap();
            for seed in 0..3 {
                let sid = study.create_session(Some(seed)).session_id;
                for i in 0..9 {
                    let c = if (i + seed as usize).is_multiple_of(3) { Choice::Different } else { Choice::Identical };
                    study.respond(&sid, i, answer(c)).unwrap();
                }
            }
            study.results().unwrap()
        };
        assert!(report.battery.is_some());
        let reopened = Study::open(config, &log).unwrap();
        assert_eq!(
            serde_json::to_string(&reopened.results().unwrap()).unwrap(),
            serde_json::to_string(&report).unwrap()
        );
    }
}
