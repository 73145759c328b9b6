//! Concrete models: one point in the 2^n space of candidate models.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::domain::{PossibleCondition, Slot};
use super::ground::{CondId, GroundTask};
use crate::error::{Error, Result};
use crate::state::{ActionId, FactId};

/// Presence of each possible condition, indexed by [`CondId`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Selection(Vec<bool>);

impl Selection {
    pub fn new(present: Vec<bool>) -> Self {
        Selection(present)
    }

    pub fn uniform(n: usize, present: bool) -> Self {
        Selection(vec![present; n])
    }

    /// Builds a selection from a per-condition rule.
    pub fn from_fn(
        task: &GroundTask,
        mut f: impl FnMut(CondId, &PossibleCondition) -> bool,
    ) -> Self {
        Selection(
            task.conditions
                .iter()
                .enumerate()
                .map(|(i, c)| f(i, c))
                .collect(),
        )
    }

    /// The selection keyed by lifted condition; errors when a condition is missing.
    pub fn from_map(task: &GroundTask, map: &BTreeMap<PossibleCondition, bool>) -> Result<Self> {
        task.conditions
            .iter()
            .map(|c| {
                map.get(c)
                    .copied()
                    .ok_or_else(|| Error::PartialSelection(c.to_string()))
            })
            .collect::<Result<Vec<_>>>()
            .map(Selection)
    }

    /// Each condition at its constraining value (see [`Slot::relaxing_presence`]).
    pub fn constrained(task: &GroundTask) -> Self {
        Selection::from_fn(task, |_, c| !c.slot.relaxing_presence())
    }

    pub fn relaxed(task: &GroundTask) -> Self {
        Selection::from_fn(task, |_, c| c.slot.relaxing_presence())
    }

    /// The `index`-th selection in binary enumeration order (bit i = condition i).
    pub fn nth(n: usize, index: u64) -> Self {
        Selection((0..n).map(|i| index >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, c: CondId) -> bool {
        self.0[c]
    }

    pub fn set(&mut self, c: CondId, present: bool) {
        self.0[c] = present;
    }

    pub fn with(mut self, c: CondId, present: bool) -> Self {
        self.0[c] = present;
        self
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn to_map(&self, task: &GroundTask) -> BTreeMap<PossibleCondition, bool> {
        task.conditions
            .iter()
            .cloned()
            .zip(self.0.iter().copied())
            .collect()
    }

    /// Renders the `<condition> present|absent` lines used by truth files.
    pub fn to_text(&self, task: &GroundTask) -> String {
        let mut out = String::new();
        for (c, &p) in task.conditions.iter().zip(&self.0) {
            out.push_str(&format!("{c} {}\n", if p { "present" } else { "absent" }));
        }
        out
    }
}

/// Parses truth-file text: one `<schema>:<slot>:(<atom>) present|absent` per
/// line, `#` starts a comment.
pub fn parse_selection_text(
    text: &str,
) -> std::result::Result<BTreeMap<PossibleCondition, bool>, String> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (cond, value) = line
            .rsplit_once(char::is_whitespace)
            .ok_or_else(|| format!("line {}: expected `<condition> present|absent`", i + 1))?;
        let present = match value.to_lowercase().as_str() {
            "present" => true,
            "absent" => false,
            other => {
                return Err(format!(
                    "line {}: expected present or absent, got `{other}`",
                    i + 1
                ))
            }
        };
        let cond: PossibleCondition = cond
            .trim()
            .parse()
            .map_err(|e| format!("line {}: {e}", i + 1))?;
        map.insert(cond, present);
    }
    Ok(map)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConcreteAction {
    pub pre: Vec<FactId>,
    pub add: Vec<FactId>,
    pub del: Vec<FactId>,
}

/// A candidate model with every possible condition resolved.
#[derive(Clone)]
pub struct ConcreteModel {
    pub task: Arc<GroundTask>,
    pub actions: Vec<ConcreteAction>,
    /// Actions removed from the model (used by landmark tests).
    pub enabled: Vec<bool>,
    pub selection: Selection,
}

impl fmt::Debug for ConcreteModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConcreteModel")
            .field("selection", &self.selection)
            .finish()
    }
}

impl PartialEq for ConcreteModel {
    fn eq(&self, other: &Self) -> bool {
        self.actions == other.actions && self.enabled == other.enabled
    }
}

fn merge_sorted(base: &[FactId], extra: impl Iterator<Item = FactId>) -> Vec<FactId> {
    let mut v: Vec<FactId> = base.iter().copied().chain(extra).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Applies a total selection to the task.
pub fn concretize(task: &Arc<GroundTask>, selection: &Selection) -> Result<ConcreteModel> {
    if selection.len() != task.n() {
        let missing = task
            .conditions
            .get(selection.len())
            .map_or_else(String::new, |c| c.to_string());
        return Err(Error::PartialSelection(missing));
    }
    let actions = task
        .actions
        .iter()
        .map(|a| {
            let chosen = |slot: Slot| {
                a.possible_in(slot)
                    .filter(|p| selection.get(p.cond))
                    .map(|p| p.fact)
                    .collect::<Vec<_>>()
            };
            ConcreteAction {
                pre: merge_sorted(&a.pre, chosen(Slot::Pre).into_iter()),
                add: merge_sorted(&a.add, chosen(Slot::Add).into_iter()),
                del: merge_sorted(&a.del, chosen(Slot::Del).into_iter()),
            }
        })
        .collect();
    Ok(ConcreteModel {
        task: Arc::clone(task),
        actions,
        enabled: vec![true; task.actions.len()],
        selection: selection.clone(),
    })
}

fn total(task: &Arc<GroundTask>, s: Selection) -> ConcreteModel {
    concretize(task, &s).expect("selection built over the task")
}

/// Possible preconditions and deletes included, possible adds dropped.
pub fn most_constrained(task: &Arc<GroundTask>) -> ConcreteModel {
    total(task, Selection::constrained(task))
}

/// Possible adds included, possible preconditions and deletes dropped.
pub fn most_relaxed(task: &Arc<GroundTask>) -> ConcreteModel {
    total(task, Selection::relaxed(task))
}

/// Every possible condition treated as present.
pub fn join_model(task: &Arc<GroundTask>) -> ConcreteModel {
    total(task, Selection::uniform(task.n(), true))
}

/// The most constrained model with `cond` switched to its relaxing value:
/// dropped when it is a precondition or delete, kept when it is an add.
pub fn constrained_minus(task: &Arc<GroundTask>, cond: CondId) -> Result<ConcreteModel> {
    let c = task
        .conditions
        .get(cond)
        .ok_or_else(|| Error::UnknownCondition(format!("#{cond}")))?;
    Ok(total(
        task,
        Selection::constrained(task).with(cond, c.slot.relaxing_presence()),
    ))
}

/// Iterates all 2^n candidate models.
pub fn enumerate_models(task: &Arc<GroundTask>) -> impl Iterator<Item = ConcreteModel> + '_ {
    let n = task.n();
    (0..1u64 << n).map(move |i| total(task, Selection::nth(n, i)))
}

impl ConcreteModel {
    pub fn action(&self, id: ActionId) -> &ConcreteAction {
        &self.actions[id as usize]
    }

    pub fn is_enabled(&self, id: ActionId) -> bool {
        self.enabled[id as usize]
    }

    pub fn num_facts(&self) -> usize {
        self.task.num_facts()
    }

    /// The same model with `removed` actions taken out.
    pub fn without(&self, removed: &[ActionId]) -> ConcreteModel {
        let mut m = self.clone();
        for &a in removed {
            m.enabled[a as usize] = false;
        }
        m
    }

    /// Enabled actions in tie-breaking order.
    pub fn enabled_actions(&self) -> impl Iterator<Item = ActionId> + '_ {
        (0..self.actions.len() as ActionId).filter(|&a| self.is_enabled(a))
    }

    /// Enabled actions that add `fact`.
    pub fn achievers(&self, fact: FactId) -> Vec<ActionId> {
        self.enabled_actions()
            .filter(|&a| self.action(a).add.binary_search(&fact).is_ok())
            .collect()
    }
}
