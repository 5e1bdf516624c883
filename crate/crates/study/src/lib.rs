//! The perception-study service.
//!
//! Participants see pairs of images and answer "Identical" or "Different".
//! Each image triple (original, BIM adversarial, EbIM adversarial) yields
//! three pairs: the original twice, original vs BIM and original vs EbIM.
//! Every session gets its own random trial order, a random side for the
//! original in each trial and a random but fixed button order.
//!
//! Clients only ever see opaque image tokens, so nothing in the API reveals
//! which condition a trial belongs to. Responses are appended to a JSONL log
//! that [`ebim::stats`] reads directly.
//!
//! | Method | Path | Body / reply |
//! |---|---|---|
//! | POST | `/api/session` | optional `{seed}` → `{session_id, trial_count, button_order}` |
//! | GET | `/api/trial/{sid}/{i}` | `{left_url, right_url, display_ms}` |
//! | POST | `/api/response/{sid}/{i}` | `{choice, latency_ms}` → `{accepted, answered, remaining}` |
//! | GET | `/api/results` | per-session means and, with two finished sessions, the hypothesis battery |
//! | GET | `/img/{token}` | image bytes |
//!
//! Trials must be fetched and answered in order; a second answer to the
//! same trial is refused with 409 and leaves the log untouched.

pub mod config;
mod error;
pub mod http;
pub mod session;
pub mod study;

pub use config::{ImageTriple, StudyConfig};
pub use error::{Result, StudyError};
pub use http::{router, serve, SharedStudy};
pub use study::{
    results_from_records, Ack, ResponseBody, ResultsReport, SessionDescriptor, SessionResult, Study,
    TrialPayload,
};
