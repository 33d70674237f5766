//! A campaign strings the levels together. The next level only opens after
//! the current one is completed and its outcome screen acknowledged.

use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::autoplay;
use crate::event::{fnv1a64, log_hash, GameEvent};
use crate::knn::KnnError;
use crate::level::LevelSpec;
use crate::model::{InputCommand, InvalidCommand};
use crate::rng::derive_seed;
use crate::snapshot::StateSnapshot;
use crate::state::SessionState;

pub const SAVE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CampaignError {
    #[error(transparent)]
    Invalid(#[from] InvalidCommand),
    #[error("the outcome screen has not been acknowledged yet")]
    OutcomeNotAcknowledged,
    #[error("the campaign is finished")]
    CampaignFinished,
    #[error("bad level list: {0}")]
    BadLevels(String),
}

impl From<KnnError> for CampaignError {
    fn from(e: KnnError) -> Self {
        CampaignError::BadLevels(e.to_string())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SaveError {
    #[error("cannot write save file: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt save document: {0}")]
    CorruptDocument(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Campaign {
    pub seed: u64,
    pub levels: Vec<Arc<LevelSpec>>,
    pub current: SessionState,
    /// Log of the levels already left behind.
    pub archive: Vec<GameEvent>,
    pub finished: bool,
}

impl Campaign {
    /// `levels` must hold levels 1, 2, ... in order.
    pub fn new(levels: Vec<LevelSpec>, seed: u64) -> Result<Self, CampaignError> {
        if levels.is_empty() {
            return Err(CampaignError::BadLevels("no levels".into()));
        }
        for (i, l) in levels.iter().enumerate() {
            if usize::from(l.level()) != i + 1 {
                return Err(CampaignError::BadLevels(format!("slot {} holds a level-{} spec", i + 1, l.level())));
            }
        }
        let levels: Vec<Arc<LevelSpec>> = levels.into_iter().map(Arc::new).collect();
        let current = SessionState::new(Arc::clone(&levels[0]), derive_seed(seed, 1), 0)?;
        Ok(Self { seed, levels, current, archive: Vec::new(), finished: false })
    }

    pub fn level(&self) -> u8 {
        self.current.level
    }

    pub fn score(&self) -> u64 {
        self.current.score
    }

    /// Every event so far, across levels.
    pub fn log(&self) -> Vec<GameEvent> {
        let mut all = self.archive.clone();
        all.extend(self.current.log.iter().cloned());
        all
    }

    pub fn log_hash(&self) -> u64 {
        log_hash(&self.log())
    }

    pub fn snapshot(&self) -> StateSnapshot {
        let mut snap = self.current.snapshot();
        snap.hud.next_enabled = snap.hud.next_enabled && !self.finished && self.has_next_level();
        snap
    }

    fn has_next_level(&self) -> bool {
        usize::from(self.current.level) < self.levels.len()
    }

    /// Level completed and outcome acknowledged.
    pub fn outcome_acknowledged(&self) -> bool {
        self.current.is_completed() && self.current.modal.is_none()
    }

    pub fn apply(&mut self, cmd: InputCommand) -> Result<Vec<GameEvent>, CampaignError> {
        if self.finished {
            return Err(CampaignError::CampaignFinished);
        }
        if cmd != InputCommand::Next {
            let events = self.current.tick(cmd)?;
            if self.outcome_acknowledged() && !self.has_next_level() {
                self.finished = true;
            }
            return Ok(events);
        }
        if !self.outcome_acknowledged() {
            return Err(CampaignError::OutcomeNotAcknowledged);
        }
        let next = usize::from(self.current.level);
        let spec = Arc::clone(&self.levels[next]);
        let level = spec.level();
        let fresh = SessionState::new(spec, derive_seed(self.seed, u64::from(level)), self.current.score)?;
        let done = std::mem::replace(&mut self.current, fresh);
        self.archive.extend(done.log);
        Ok(Vec::new())
    }

    pub fn to_document(&self) -> String {
        let value = serde_json::to_value(self).expect("campaign serializes");
        let doc = serde_json::json!({
            "version": SAVE_VERSION,
            "checksum": format!("{:016x}", fnv1a64(value.to_string().as_bytes())),
            "campaign": value,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("json value serializes");
        text.push('\n');
        text
    }

    pub fn from_document(text: &str) -> Result<Self, SaveError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Doc {
            version: u32,
            checksum: String,
            campaign: serde_json::Value,
        }
        let corrupt = |m: String| SaveError::CorruptDocument(m);
        let doc: Doc = serde_json::from_str(text).map_err(|e| corrupt(e.to_string()))?;
        if doc.version != SAVE_VERSION {
            return Err(corrupt(format!("unsupported version {}", doc.version)));
        }
        let sum = format!("{:016x}", fnv1a64(doc.campaign.to_string().as_bytes()));
        if sum != doc.checksum {
            return Err(corrupt(format!("checksum mismatch: stored {}, computed {sum}", doc.checksum)));
        }
        let c: Campaign = serde_json::from_value(doc.campaign).map_err(|e| corrupt(e.to_string()))?;
        if c.levels.get(usize::from(c.current.level).wrapping_sub(1)).map(|l| l.as_ref()) != Some(c.current.spec.as_ref()) {
            return Err(corrupt("current level does not match the level list".into()));
        }
        Ok(c)
    }

    /// Write through a temporary file so a crash never leaves half a save.
    pub fn save(&self, path: &Path) -> Result<(), SaveError> {
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(self.to_document().as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SaveError> {
        Self::from_document(&fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub log: Vec<GameEvent>,
    pub log_hash: u64,
    pub completed: bool,
    /// Commands refused and skipped.
    pub rejected: usize,
    pub final_score: u64,
}

/// Run `script` from a fresh campaign, skipping refused commands.
pub fn replay(levels: Vec<LevelSpec>, seed: u64, script: &[InputCommand]) -> Result<Replay, CampaignError> {
    let mut c = Campaign::new(levels, seed)?;
    let mut rejected = 0;
    for cmd in script {
        if c.apply(*cmd).is_err() {
            rejected += 1;
        }
    }
    Ok(summarize(&c, rejected))
}

fn summarize(c: &Campaign, rejected: usize) -> Replay {
    let log = c.log();
    Replay { log_hash: log_hash(&log), log, completed: c.finished, rejected, final_score: c.score() }
}

/// Commands the reference bot issues to finish the campaign, at most `limit`.
pub fn autoplay_script(levels: Vec<LevelSpec>, seed: u64, limit: usize) -> Result<Vec<InputCommand>, CampaignError> {
    let mut c = Campaign::new(levels, seed)?;
    let mut script = Vec::new();
    while !c.finished && script.len() < limit {
        let cmd = autoplay::next_command(&c.current).unwrap_or(InputCommand::Next);
        if c.apply(cmd).is_err() && cmd == InputCommand::Next {
            break;
        }
        script.push(cmd);
    }
    Ok(script)
}

/// Parse a text script: one command per line, `#` starts a comment.
pub fn parse_script(text: &str) -> Result<Vec<InputCommand>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let token = line.split('#').next().unwrap_or("").trim();
        if token.is_empty() {
            continue;
        }
        out.push(InputCommand::parse(token).ok_or_else(|| format!("line {}: unknown command {token:?}", n + 1))?);
    }
    Ok(out)
}

pub fn format_script(script: &[InputCommand]) -> String {
    script.iter().map(|c| format!("{}\n", c.token())).collect()
}
