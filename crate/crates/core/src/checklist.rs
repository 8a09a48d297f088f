//! Session checklists bound to a client environment.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::OpError;
use crate::ids::{ActorId, EntityId};
use crate::time::Timestamp;
use crate::view::ViewState;

/// Template shipped with the crate; the service loads a file of the same format.
pub const DEFAULT_TEMPLATES: &str = include_str!("../templates/checklists.toml");
pub const DEFAULT_TEMPLATE_ID: &str = "default";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChecklistTemplate {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub items: Vec<String>,
}

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("cannot read template file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed template file: {0}")]
    Parse(String),
    #[error("template `{0}` has an empty item")]
    EmptyItem(String),
    #[error("template id `{0}` defined twice")]
    DuplicateId(String),
    #[error("template `{0}` not found")]
    NotFound(String),
}

impl TemplateError {
    pub fn code(&self) -> &'static str {
        match self {
            TemplateError::NotFound(_) => "TemplateNotFound",
            _ => "InvalidTemplate",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct TemplateRegistry {
    templates: BTreeMap<String, ChecklistTemplate>,
}

impl TemplateRegistry {
    pub fn from_toml_str(text: &str) -> Result<Self, TemplateError> {
        #[derive(Deserialize)]
        struct File {
            #[serde(default)]
            template: Vec<ChecklistTemplate>,
        }
        let file: File = toml::from_str(text).map_err(|e| TemplateError::Parse(e.to_string()))?;
        let mut templates = BTreeMap::new();
        for template in file.template {
            if template.items.iter().any(|item| item.trim().is_empty()) {
                return Err(TemplateError::EmptyItem(template.id));
            }
            if templates.contains_key(&template.id) {
                return Err(TemplateError::DuplicateId(template.id));
            }
            templates.insert(template.id.clone(), template);
        }
        Ok(Self { templates })
    }

    pub fn load(path: &Path) -> Result<Self, TemplateError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn builtin() -> Self {
        Self::from_toml_str(DEFAULT_TEMPLATES).expect("bundled templates parse")
    }

    pub fn get(&self, id: &str) -> Result<&ChecklistTemplate, TemplateError> {
        self.templates
            .get(id)
            .ok_or_else(|| TemplateError::NotFound(id.to_string()))
    }

    pub fn insert(&mut self, template: ChecklistTemplate) {
        self.templates.insert(template.id.clone(), template);
    }

    pub fn iter(&self) -> impl Iterator<Item = &ChecklistTemplate> {
        self.templates.values()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChecklistStatus {
    Active,
    Completed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemOrigin {
    Template,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemStatus {
    Pending,
    Done,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChecklistItem {
    pub id: EntityId,
    pub text: String,
    pub origin: ItemOrigin,
    pub status: ItemStatus,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checklist {
    pub id: EntityId,
    pub client_env: String,
    pub template_id: String,
    pub session_owner: ActorId,
    pub items: Vec<ChecklistItem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resume_bookmark: Option<ViewState>,
    pub status: ChecklistStatus,
    pub created_at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completed_at: Option<Timestamp>,
    /// Set when completion was forced over pending items.
    #[serde(default)]
    pub completed_with_override: bool,
}

impl Checklist {
    pub fn is_active(&self) -> bool {
        self.status == ChecklistStatus::Active
    }

    pub fn done_count(&self) -> usize {
        self.items.iter().filter(|i| i.status == ItemStatus::Done).count()
    }

    pub fn pending_count(&self) -> usize {
        self.items.iter().filter(|i| i.status == ItemStatus::Pending).count()
    }

    pub fn item(&self, id: EntityId) -> Option<&ChecklistItem> {
        self.items.iter().find(|i| i.id == id)
    }

    fn ensure_active(&self) -> Result<(), OpError> {
        if self.is_active() {
            Ok(())
        } else {
            Err(OpError::NotActive(self.id))
        }
    }

    pub(crate) fn instantiate(
        id: EntityId,
        item_ids: impl Iterator<Item = EntityId>,
        client_env: &str,
        owner: &ActorId,
        template: &ChecklistTemplate,
        at: Timestamp,
    ) -> Self {
        let items = template
            .items
            .iter()
            .zip(item_ids)
            .map(|(text, id)| ChecklistItem {
                id,
                text: text.clone(),
                origin: ItemOrigin::Template,
                status: ItemStatus::Pending,
                note: String::new(),
            })
            .collect();
        Checklist {
            id,
            client_env: client_env.to_string(),
            template_id: template.id.clone(),
            session_owner: owner.clone(),
            items,
            resume_bookmark: None,
            status: ChecklistStatus::Active,
            created_at: at,
            completed_at: None,
            completed_with_override: false,
        }
    }

    pub(crate) fn check_add_item(&self, text: &str) -> Result<(), OpError> {
        self.ensure_active()?;
        if text.trim().is_empty() {
            return Err(OpError::EmptyText);
        }
        Ok(())
    }

    pub(crate) fn push_custom(&mut self, id: EntityId, text: &str) -> ChecklistItem {
        let item = ChecklistItem {
            id,
            text: text.to_string(),
            origin: ItemOrigin::Custom,
            status: ItemStatus::Pending,
            note: String::new(),
        };
        self.items.push(item.clone());
        item
    }

    pub(crate) fn set_item_status(
        &mut self,
        item_id: EntityId,
        status: ItemStatus,
        note: Option<&str>,
    ) -> Result<ChecklistItem, OpError> {
        self.ensure_active()?;
        let item = self
            .items
            .iter_mut()
            .find(|i| i.id == item_id)
            .ok_or(OpError::ItemNotFound(item_id))?;
        item.status = status;
        if let Some(note) = note.filter(|n| !n.is_empty()) {
            if !item.note.is_empty() {
                item.note.push('\n');
            }
            item.note.push_str(note);
        }
        Ok(item.clone())
    }

    pub(crate) fn attach_bookmark(&mut self, view: &ViewState) -> Result<(), OpError> {
        self.ensure_active()?;
        self.resume_bookmark = Some(view.clone());
        Ok(())
    }

    pub(crate) fn complete(&mut self, override_pending: bool, at: Timestamp) -> Result<(), OpError> {
        self.ensure_active()?;
        let pending = self.pending_count();
        if pending > 0 && !override_pending {
            return Err(OpError::PendingItems {
                checklist: self.id,
                pending,
            });
        }
        self.status = ChecklistStatus::Completed;
        self.completed_at = Some(at);
        self.completed_with_override = pending > 0;
        Ok(())
    }
}
