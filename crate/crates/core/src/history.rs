//! Linear, git-like history of full model snapshots.
//!
//! The root commit holds the loaded (re-centered) model. Each later commit
//! stores the descriptor that produced it plus a self-contained snapshot, so
//! checkout, undo and delete never replay anything.

use std::sync::Arc;

use chrono::{DateTime, SecondsFormat, Utc};
use thiserror::Error;

use crate::edit::{EditDescriptor, EditError};
use crate::interop::commit_id;
use crate::model::GamModel;

pub const ROOT_MESSAGE: &str = "Loaded model";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HistoryError {
    #[error("no previewed edit to commit")]
    NoWorkingEdit,
    #[error("unknown commit `{0}`")]
    UnknownCommit(String),
    #[error("already at root")]
    AlreadyAtRoot,
    #[error("already at tip")]
    AlreadyAtTip,
    #[error("the root commit cannot be deleted")]
    DeleteRoot,
    #[error("unconfirmed commits: {}", .0.join(", "))]
    Unconfirmed(Vec<String>),
    #[error(transparent)]
    Edit(#[from] EditError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Commit {
    pub(crate) id: String,
    pub(crate) parent: Option<String>,
    pub(crate) timestamp: DateTime<Utc>,
    pub(crate) message: String,
    pub(crate) confirmed: bool,
    pub(crate) descriptor: Option<EditDescriptor>,
    pub(crate) snapshot: Arc<GamModel>,
}

impl Commit {
    pub fn id(&self) -> &str {
        &self.id
    }
    pub fn parent(&self) -> Option<&str> {
        self.parent.as_deref()
    }
    pub fn timestamp(&self) -> DateTime<Utc> {
        self.timestamp
    }
    /// ISO-8601 UTC with millisecond precision.
    pub fn timestamp_string(&self) -> String {
        self.timestamp.to_rfc3339_opts(SecondsFormat::Millis, true)
    }
    pub fn message(&self) -> &str {
        &self.message
    }
    pub fn confirmed(&self) -> bool {
        self.confirmed
    }
    pub fn descriptor(&self) -> Option<&EditDescriptor> {
        self.descriptor.as_ref()
    }
    pub fn snapshot(&self) -> &Arc<GamModel> {
        &self.snapshot
    }

    fn rehash(&mut self) {
        self.id = commit_id(self.parent.as_deref(), self.descriptor.as_ref(), &self.snapshot);
    }
}

/// A previewed, uncommitted edit on top of the head snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Working {
    pub descriptor: EditDescriptor,
    pub model: Arc<GamModel>,
    pub sample_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    commits: Vec<Commit>,
    head: usize,
    working: Option<Working>,
}

pub(crate) fn now_millis() -> DateTime<Utc> {
    let now = Utc::now();
    DateTime::from_timestamp_millis(now.timestamp_millis()).unwrap_or(now)
}

impl Session {
    /// Starts a history whose root is `model` (expected to be re-centered).
    pub fn new(model: GamModel) -> Self {
        let mut root = Commit {
            id: String::new(),
            parent: None,
            timestamp: now_millis(),
            message: ROOT_MESSAGE.to_string(),
            confirmed: true,
            descriptor: None,
            snapshot: Arc::new(model),
        };
        root.rehash();
        Session {
            commits: vec![root],
            head: 0,
            working: None,
        }
    }

    /// Rebuilds a session from stored commits. Callers check chain integrity.
    pub(crate) fn from_parts(commits: Vec<Commit>, head: usize) -> Self {
        debug_assert!(head < commits.len());
        Session {
            commits,
            head,
            working: None,
        }
    }

    pub fn commits(&self) -> &[Commit] {
        &self.commits
    }

    pub fn len(&self) -> usize {
        self.commits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn head(&self) -> usize {
        self.head
    }

    pub fn head_commit(&self) -> &Commit {
        &self.commits[self.head]
    }

    pub fn working(&self) -> Option<&Working> {
        self.working.as_ref()
    }

    /// The loaded model (root snapshot).
    pub fn original(&self) -> &Arc<GamModel> {
        &self.commits[0].snapshot
    }

    /// The last committed model (head snapshot).
    pub fn last(&self) -> &Arc<GamModel> {
        &self.commits[self.head].snapshot
    }

    /// The previewed model if there is one, else the head snapshot.
    pub fn current(&self) -> &Arc<GamModel> {
        self.working.as_ref().map_or(self.last(), |w| &w.model)
    }

    fn position(&self, id: &str) -> Result<usize, HistoryError> {
        self.commits
            .iter()
            .position(|c| c.id == id)
            .ok_or_else(|| HistoryError::UnknownCommit(id.to_string()))
    }

    pub fn commit_by_id(&self, id: &str) -> Result<&Commit, HistoryError> {
        self.position(id).map(|i| &self.commits[i])
    }

    /// Applies `descriptor` to the head snapshot and holds the result as the
    /// working model, replacing any earlier preview.
    pub fn preview(
        &mut self,
        descriptor: EditDescriptor,
        sample_count: usize,
    ) -> Result<&Arc<GamModel>, HistoryError> {
        let model = descriptor.apply(self.last())?;
        self.working = Some(Working {
            descriptor,
            model: Arc::new(model),
            sample_count,
        });
        Ok(self.current())
    }

    pub fn discard(&mut self) {
        self.working = None;
    }

    /// Commits the working edit after the head, dropping any commits that
    /// were ahead of it. Without a message the edit summary is used.
    pub fn commit(&mut self, message: Option<String>) -> Result<&Commit, HistoryError> {
        let working = self.working.take().ok_or(HistoryError::NoWorkingEdit)?;
        let message = message.unwrap_or_else(|| working.descriptor.summary(working.sample_count));
        self.commits.truncate(self.head + 1);
        let mut commit = Commit {
            id: String::new(),
            parent: Some(self.commits[self.head].id.clone()),
            timestamp: now_millis(),
            message,
            confirmed: false,
            descriptor: Some(working.descriptor),
            snapshot: working.model,
        };
        commit.rehash();
        self.commits.push(commit);
        self.head += 1;
        Ok(&self.commits[self.head])
    }

    pub fn checkout(&mut self, id: &str) -> Result<&Arc<GamModel>, HistoryError> {
        let at = self.position(id)?;
        self.head = at;
        self.working = None;
        Ok(self.last())
    }

    pub fn undo(&mut self) -> Result<&Arc<GamModel>, HistoryError> {
        if self.head == 0 {
            return Err(HistoryError::AlreadyAtRoot);
        }
        self.head -= 1;
        self.working = None;
        Ok(self.last())
    }

    pub fn redo(&mut self) -> Result<&Arc<GamModel>, HistoryError> {
        if self.head + 1 >= self.commits.len() {
            return Err(HistoryError::AlreadyAtTip);
        }
        self.head += 1;
        self.working = None;
        Ok(self.last())
    }

    /// Removes a non-root commit. Later snapshots are kept as they are; their
    /// parent links and ids are rebuilt down the chain.
    pub fn delete_commit(&mut self, id: &str) -> Result<(), HistoryError> {
        let at = self.position(id)?;
        if at == 0 {
            return Err(HistoryError::DeleteRoot);
        }
        self.commits.remove(at);
        for k in at..self.commits.len() {
            self.commits[k].parent = Some(self.commits[k - 1].id.clone());
            self.commits[k].rehash();
        }
        if self.head >= at {
            self.head -= 1;
        }
        self.working = None;
        Ok(())
    }

    pub fn set_message(&mut self, id: &str, text: impl Into<String>) -> Result<(), HistoryError> {
        let at = self.position(id)?;
        self.commits[at].message = text.into();
        Ok(())
    }

    pub fn set_confirmed(&mut self, id: &str, confirmed: bool) -> Result<(), HistoryError> {
        let at = self.position(id)?;
        self.commits[at].confirmed = confirmed;
        Ok(())
    }

    /// Ids of non-root commits still awaiting confirmation.
    pub fn unconfirmed(&self) -> Vec<String> {
        self.commits[1..]
            .iter()
            .filter(|c| !c.confirmed)
            .map(|c| c.id.clone())
            .collect()
    }

    /// Errors unless every edit has been confirmed.
    pub fn ensure_confirmed(&self) -> Result<(), HistoryError> {
        let pending = self.unconfirmed();
        if pending.is_empty() {
            Ok(())
        } else {
            Err(HistoryError::Unconfirmed(pending))
        }
    }
}
