//! Annotation tasks and the transitions between their states.

use std::fmt;

use darijakit_core::dataset::Provenance;
use serde::{Deserialize, Serialize};

use crate::error::ReviewError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pending,
    InReview,
    Corrected,
    Approved,
    Rejected,
}

impl Status {
    pub const ALL: [Status; 5] = [Self::Pending, Self::InReview, Self::Corrected, Self::Approved, Self::Rejected];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pending => "pending",
            Self::InReview => "in_review",
            Self::Corrected => "corrected",
            Self::Approved => "approved",
            Self::Rejected => "rejected",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationTask {
    pub task_id: String,
    pub sample_id: String,
    pub provenance: Provenance,
    pub pseudo_label: String,
    pub status: Status,
    pub correction: Option<String>,
    pub reviewer: Option<String>,
    pub reject_reason: Option<String>,
    /// Unix time in milliseconds of the last transition.
    pub updated_at: u64,
}

impl AnnotationTask {
    /// The text a finished task contributes to the benchmark.
    pub fn final_text(&self) -> &str {
        self.correction.as_deref().unwrap_or(&self.pseudo_label)
    }

    pub fn is_open(&self) -> bool {
        matches!(self.status, Status::Pending | Status::InReview)
    }

    pub fn is_exportable(&self) -> bool {
        matches!(self.status, Status::Approved | Status::Corrected)
    }
}

/// One state change, as stored in the event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "transition", content = "payload", rename_all = "snake_case")]
pub enum Transition {
    Create { sample_id: String, provenance: Provenance, pseudo_label: String },
    Claim { reviewer: String },
    Approve { reviewer: String },
    Correct { reviewer: String, text: String },
    Reject { reviewer: String, reason: String },
    Release { reviewer: Option<String> },
}

impl Transition {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Create { .. } => "create",
            Self::Claim { .. } => "claim",
            Self::Approve { .. } => "approve",
            Self::Correct { .. } => "correct",
            Self::Reject { .. } => "reject",
            Self::Release { .. } => "release",
        }
    }
}

/// Reviewer decision on a claimed task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Approve,
    Correct { text: String },
    Reject { reason: String },
}

impl Action {
    pub fn into_transition(self, reviewer: &str) -> Transition {
        let reviewer = reviewer.to_string();
        match self {
            Self::Approve => Transition::Approve { reviewer },
            Self::Correct { text } => Transition::Correct { reviewer, text },
            Self::Reject { reason } => Transition::Reject { reviewer, reason },
        }
    }
}

/// Checks `t` against the current task without changing it.
pub fn check(task: &AnnotationTask, t: &Transition) -> Result<(), ReviewError> {
    let illegal = || ReviewError::IllegalTransition {
        task_id: task.task_id.clone(),
        from: task.status,
        transition: t.name(),
    };
    let claimed_by = |who: &str| -> Result<(), ReviewError> {
        match task.reviewer.as_deref() {
            Some(r) if r == who => Ok(()),
            holder => Err(ReviewError::NotClaimedByYou {
                task_id: task.task_id.clone(),
                holder: holder.map(String::from),
            }),
        }
    };
    let unclaimed = || ReviewError::NotClaimedByYou { task_id: task.task_id.clone(), holder: None };
    match t {
        Transition::Create { .. } => Err(illegal()),
        Transition::Claim { .. } => match task.status {
            Status::Pending => Ok(()),
            _ => Err(illegal()),
        },
        Transition::Approve { reviewer } => match task.status {
            Status::InReview => claimed_by(reviewer),
            Status::Corrected => Ok(()),
            Status::Pending => Err(unclaimed()),
            _ => Err(illegal()),
        },
        Transition::Correct { reviewer, text } => match task.status {
            Status::InReview => {
                claimed_by(reviewer)?;
                if text.trim().is_empty() {
                    return Err(ReviewError::EmptyCorrection);
                }
                Ok(())
            }
            Status::Pending => Err(unclaimed()),
            _ => Err(illegal()),
        },
        Transition::Reject { reviewer, .. } => match task.status {
            Status::InReview => claimed_by(reviewer),
            Status::Pending => Err(unclaimed()),
            _ => Err(illegal()),
        },
        Transition::Release { reviewer } => match (task.status, reviewer) {
            (Status::Pending, _) => Err(illegal()),
            (Status::InReview, Some(r)) => claimed_by(r),
            _ => Ok(()),
        },
    }
}

/// Applies an already checked transition.
pub fn apply(task: &mut AnnotationTask, t: &Transition, at: u64) {
    task.updated_at = at;
    match t {
        Transition::Create { .. } => {}
        Transition::Claim { reviewer } => {
            task.status = Status::InReview;
            task.reviewer = Some(reviewer.clone());
        }
        Transition::Approve { reviewer } => {
            task.status = Status::Approved;
            task.reviewer = Some(reviewer.clone());
        }
        Transition::Correct { text, .. } => {
            task.status = Status::Corrected;
            task.correction = Some(text.clone());
        }
        Transition::Reject { reason, .. } => {
            task.status = Status::Rejected;
            task.reject_reason = Some(reason.clone());
        }
        Transition::Release { .. } => {
            task.status = Status::Pending;
            task.reviewer = None;
            task.correction = None;
            task.reject_reason = None;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(status: Status, reviewer: Option<&str>) -> AnnotationTask {
        AnnotationTask {
            task_id: "t-00001".into(),
            sample_id: "s".into(),
            provenance: Provenance::SocialMedia,
            pseudo_label: "كتب".into(),
            status,
            correction: None,
            reviewer: reviewer.map(String::from),
            reject_reason: None,
            updated_at: 0,
        }
    }

    fn approve(r: &str) -> Transition {
        Transition::Approve { reviewer: r.into() }
    }

    #[test]
    fn legal_paths() {
        let mut t = task(Status::Pending, None);
        for (tr, want) in [
            (Transition::Claim { reviewer: "a".into() }, Status::InReview),
            (Transition::Correct { reviewer: "a".into(), text: "كتبت".into() }, Status::Corrected),
            (approve("b"), Status::Approved),
            (Transition::Release { reviewer: None }, Status::Pending),
        ] {
            check(&t, &tr).unwrap();
            apply(&mut t, &tr, 1);
            assert_eq!(t.status, want);
        }
        assert_eq!(t.correction, None);
    }

    #[test]
    fn final_text_prefers_correction() {
        let mut t = task(Status::Approved, Some("a"));
        assert_eq!(t.final_text(), "كتب");
        t.correction = Some("كتبو".into());
        assert_eq!(t.final_text(), "كتبو");
    }

    #[test]
    fn refusals() {
        let t = task(Status::InReview, Some("a"));
        assert!(matches!(check(&t, &approve("b")), Err(ReviewError::NotClaimedByYou { .. })));
        let empty = Transition::Correct { reviewer: "a".into(), text: " ".into() };
        assert!(matches!(check(&t, &empty), Err(ReviewError::EmptyCorrection)));
        assert!(matches!(
            check(&t, &Transition::Release { reviewer: Some("b".into()) }),
            Err(ReviewError::NotClaimedByYou { .. })
        ));

        let pending = task(Status::Pending, None);
        assert!(matches!(check(&pending, &approve("a")), Err(ReviewError::NotClaimedByYou { .. })));
        assert!(matches!(
            check(&pending, &Transition::Release { reviewer: None }),
            Err(ReviewError::IllegalTransition { .. })
        ));
        for s in [Status::Approved, Status::Rejected] {
            assert!(matches!(check(&task(s, Some("a")), &approve("a")), Err(ReviewError::IllegalTransition { .. })));
            check(&task(s, Some("a")), &Transition::Release { reviewer: None }).unwrap();
        }
        let corrected = task(Status::Corrected, Some("a"));
        let reject = Transition::Reject { reviewer: "a".into(), reason: "x".into() };
        assert!(matches!(check(&corrected, &reject), Err(ReviewError::IllegalTransition { .. })));
    }
}
