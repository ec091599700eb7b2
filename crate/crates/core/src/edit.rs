//! Selections and the edit tools.
//!
//! Every tool is a pure function from a model and a region to a new model.
//! Only scores inside the region change; bin edges, levels, counts, other
//! features and the intercept are carried over untouched. Edited bins lose
//! their stderr.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{EncodedDataset, UNKNOWN_SLOT};
use crate::isotonic::{weighted_isotonic, Direction, IsotonicError};
use crate::model::{FeatureKind, GamModel, Shape};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EditError {
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("bin range [{start}, {end}] is invalid for a feature with {bins} bins")]
    BadRange { start: usize, end: usize, bins: usize },
    #[error("selection is empty")]
    EmptySelection,
    #[error("unknown level `{level}` for feature `{feature}`")]
    UnknownLevel { feature: String, level: String },
    #[error("feature `{feature}` is {kind}; it needs a {expected} selection")]
    TargetKind {
        feature: String,
        kind: &'static str,
        expected: &'static str,
    },
    #[error("{tool} cannot be applied to categorical feature `{feature}`")]
    NotApplicable { tool: ToolName, feature: String },
    #[error("{0} needs a selection spanning at least two bins")]
    NeedsTwoBins(ToolName),
    #[error("no reference bin to the {0} of the selection")]
    NoReferenceBin(Side),
    #[error("{0} must be finite")]
    NonFiniteParameter(&'static str),
    #[error(transparent)]
    Isotonic(#[from] IsotonicError),
}

/// Which bins or levels of one feature are selected.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// Inclusive bin index range `[start, end]`.
    Bins(usize, usize),
    /// Level labels, kept in model order without duplicates.
    Levels(Vec<String>),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Bins(s, e) if s == e => write!(f, "{s}"),
            Target::Bins(s, e) => write!(f, "{s}-{e}"),
            Target::Levels(levels) => write!(f, "{}", levels.join(", ")),
        }
    }
}

/// A validated feature + target pair. Sample membership lives in [`Selection`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Region {
    feature: String,
    target: Target,
}

impl Region {
    pub fn new(model: &GamModel, feature: &str, target: Target) -> Result<Self, EditError> {
        let shape = model
            .shape(feature)
            .map_err(|_| EditError::UnknownFeature(feature.to_string()))?;
        let target = match (shape, target) {
            (Shape::Continuous(s), Target::Bins(start, end)) => {
                let bins = s.scores().len();
                if start > end || end >= bins {
                    return Err(EditError::BadRange { start, end, bins });
                }
                Target::Bins(start, end)
            }
            (Shape::Categorical(s), Target::Levels(levels)) => {
                if levels.is_empty() {
                    return Err(EditError::EmptySelection);
                }
                let mut idx = Vec::with_capacity(levels.len());
                for level in &levels {
                    let i = s.level_index(level).ok_or_else(|| EditError::UnknownLevel {
                        feature: feature.to_string(),
                        level: level.clone(),
                    })?;
                    idx.push(i);
                }
                idx.sort_unstable();
                idx.dedup();
                Target::Levels(idx.into_iter().map(|i| s.levels()[i].clone()).collect())
            }
            (Shape::Continuous(_), Target::Levels(_)) => {
                return Err(EditError::TargetKind {
                    feature: feature.to_string(),
                    kind: "continuous",
                    expected: "bin range",
                })
            }
            (Shape::Categorical(_), Target::Bins(..)) => {
                return Err(EditError::TargetKind {
                    feature: feature.to_string(),
                    kind: "categorical",
                    expected: "level",
                })
            }
        };
        Ok(Region {
            feature: feature.to_string(),
            target,
        })
    }

    pub fn feature(&self) -> &str {
        &self.feature
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    /// Selected bin/level indices in ascending order. The region must have
    /// been validated against a model with the same bins and levels.
    pub fn slots(&self, model: &GamModel) -> Vec<usize> {
        match (&self.target, model.shape(&self.feature)) {
            (Target::Bins(s, e), _) => (*s..=*e).collect(),
            (Target::Levels(levels), Ok(Shape::Categorical(shape))) => levels
                .iter()
                .filter_map(|l| shape.level_index(l))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Number of bins or levels covered.
    pub fn width(&self) -> usize {
        match &self.target {
            Target::Bins(s, e) => e - s + 1,
            Target::Levels(l) => l.len(),
        }
    }
}

/// An active selection: a region plus the evaluation samples it covers.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    region: Region,
    affected: Vec<usize>,
}

impl Selection {
    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn feature(&self) -> &str {
        self.region.feature()
    }

    /// Indices of samples falling in a selected bin or level, ascending.
    pub fn affected_samples(&self) -> &[usize] {
        &self.affected
    }

    pub fn sample_count(&self) -> usize {
        self.affected.len()
    }
}

/// Resolves a region against the evaluation data.
pub fn select(
    model: &GamModel,
    data: &EncodedDataset,
    feature: &str,
    target: Target,
) -> Result<Selection, EditError> {
    let region = Region::new(model, feature, target)?;
    Ok(resolve(model, data, region))
}

/// Membership for an already validated region.
pub fn resolve(model: &GamModel, data: &EncodedDataset, region: Region) -> Selection {
    let index = model
        .feature_index(region.feature())
        .expect("region validated against this model");
    let mut member = vec![false; model.shapes()[index].len()];
    for i in region.slots(model) {
        member[i] = true;
    }
    let affected = data
        .slots(index)
        .iter()
        .enumerate()
        .filter(|(_, &slot)| slot != UNKNOWN_SLOT && member[slot as usize])
        .map(|(row, _)| row)
        .collect();
    Selection { region, affected }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// Wire names of the tools.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToolName {
    Move,
    Interpolate,
    MonotoneInc,
    MonotoneDec,
    AlignLeft,
    AlignRight,
    SetConstant,
}

impl ToolName {
    pub const ALL: [ToolName; 7] = [
        ToolName::Move,
        ToolName::Interpolate,
        ToolName::MonotoneInc,
        ToolName::MonotoneDec,
        ToolName::AlignLeft,
        ToolName::AlignRight,
        ToolName::SetConstant,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ToolName::Move => "move",
            ToolName::Interpolate => "interpolate",
            ToolName::MonotoneInc => "monotone_inc",
            ToolName::MonotoneDec => "monotone_dec",
            ToolName::AlignLeft => "align_left",
            ToolName::AlignRight => "align_right",
            ToolName::SetConstant => "set_constant",
        }
    }

    /// Interpolate, monotone and align need an ordered axis.
    pub fn applies_to(self, kind: FeatureKind) -> bool {
        kind == FeatureKind::Continuous || matches!(self, ToolName::Move | ToolName::SetConstant)
    }
}

impl fmt::Display for ToolName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tool {
    Move { delta: f64 },
    Interpolate,
    Monotone(Direction),
    Align(Side),
    SetConstant { value: f64 },
}

impl Tool {
    pub fn name(&self) -> ToolName {
        match self {
            Tool::Move { .. } => ToolName::Move,
            Tool::Interpolate => ToolName::Interpolate,
            Tool::Monotone(Direction::Increasing) => ToolName::MonotoneInc,
            Tool::Monotone(Direction::Decreasing) => ToolName::MonotoneDec,
            Tool::Align(Side::Left) => ToolName::AlignLeft,
            Tool::Align(Side::Right) => ToolName::AlignRight,
            Tool::SetConstant { .. } => ToolName::SetConstant,
        }
    }
}

/// One unit of change: a tool applied to a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "DescriptorDoc", try_from = "DescriptorDoc")]
pub struct EditDescriptor {
    pub region: Region,
    pub tool: Tool,
}

impl EditDescriptor {
    pub fn new(region: Region, tool: Tool) -> Self {
        EditDescriptor { region, tool }
    }

    /// Checks tool/feature compatibility and tool preconditions.
    pub fn validate(&self, model: &GamModel) -> Result<(), EditError> {
        let region = Region::new(model, self.region.feature(), self.region.target().clone())?;
        let shape = model
            .shape(region.feature())
            .map_err(|_| EditError::UnknownFeature(region.feature().to_string()))?;
        let name = self.tool.name();
        if !name.applies_to(shape.kind()) {
            return Err(EditError::NotApplicable {
                tool: name,
                feature: region.feature().to_string(),
            });
        }
        match self.tool {
            Tool::Move { delta } if !delta.is_finite() => {
                Err(EditError::NonFiniteParameter("delta"))
            }
            Tool::SetConstant { value } if !value.is_finite() => {
                Err(EditError::NonFiniteParameter("value"))
            }
            Tool::Interpolate | Tool::Monotone(_) if region.width() < 2 => {
                Err(EditError::NeedsTwoBins(name))
            }
            Tool::Align(side) => {
                let Target::Bins(start, end) = *region.target() else {
                    unreachable!("align is continuous-only")
                };
                let blocked = match side {
                    Side::Left => start == 0,
                    Side::Right => end + 1 >= shape.len(),
                };
                if blocked {
                    Err(EditError::NoReferenceBin(side))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn apply(&self, model: &GamModel) -> Result<GamModel, EditError> {
        match self.tool {
            Tool::Move { delta } => apply_move(model, &self.region, delta),
            Tool::Interpolate => apply_interpolate(model, &self.region),
            Tool::Monotone(direction) => apply_monotone(model, &self.region, direction),
            Tool::Align(side) => apply_align(model, &self.region, side),
            Tool::SetConstant { value } => apply_set(model, &self.region, value),
        }
    }

    /// Default commit message.
    pub fn summary(&self, sample_count: usize) -> String {
        format!(
            "{} on {} [{}] ({} bins, {} samples)",
            self.tool.name(),
            self.region.feature(),
            self.region.target(),
            self.region.width(),
            sample_count
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

/// JSON form shared by commit records and edit scripts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorDoc {
    pub feature: String,
    pub selection: TargetDoc,
    pub tool: ToolName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum TargetDoc {
    Bins([usize; 2]),
    Levels(Vec<String>),
}

impl From<Target> for TargetDoc {
    fn from(t: Target) -> Self {
        match t {
            Target::Bins(s, e) => TargetDoc::Bins([s, e]),
            Target::Levels(l) => TargetDoc::Levels(l),
        }
    }
}

impl From<TargetDoc> for Target {
    fn from(t: TargetDoc) -> Self {
        match t {
            TargetDoc::Bins([s, e]) => Target::Bins(s, e),
            TargetDoc::Levels(l) => Target::Levels(l),
        }
    }
}

impl From<EditDescriptor> for DescriptorDoc {
    fn from(d: EditDescriptor) -> Self {
        let params = match d.tool {
            Tool::Move { delta } => Some(ParamsDoc {
                delta: Some(delta),
                value: None,
            }),
            Tool::SetConstant { value } => Some(ParamsDoc {
                delta: None,
                value: Some(value),
            }),
            _ => None,
        };
        DescriptorDoc {
            feature: d.region.feature,
            selection: d.region.target.into(),
            tool: d.tool.name(),
            params,
        }
    }
}

impl TryFrom<DescriptorDoc> for EditDescriptor {
    type Error = String;

    fn try_from(doc: DescriptorDoc) -> Result<Self, Self::Error> {
        let tool = tool_from_parts(doc.tool, doc.params.as_ref())?;
        Ok(EditDescriptor {
            region: Region {
                feature: doc.feature,
                target: doc.selection.into(),
            },
            tool,
        })
    }
}

/// Builds a tool from its wire name and optional parameters.
pub fn tool_from_parts(name: ToolName, params: Option<&ParamsDoc>) -> Result<Tool, String> {
    let p = params.cloned().unwrap_or_default();
    let no_params = |tool: Tool| {
        if p.delta.is_some() || p.value.is_some() {
            Err(format!("{name} takes no parameters"))
        } else {
            Ok(tool)
        }
    };
    match name {
        ToolName::Move => match p {
            ParamsDoc {
                delta: Some(delta),
                value: None,
            } => Ok(Tool::Move { delta }),
            _ => Err("move requires exactly params.delta".into()),
        },
        ToolName::SetConstant => match p {
            ParamsDoc {
                delta: None,
                value: Some(value),
            } => Ok(Tool::SetConstant { value }),
            _ => Err("set_constant requires exactly params.value".into()),
        },
        ToolName::Interpolate => no_params(Tool::Interpolate),
        ToolName::MonotoneInc => no_params(Tool::Monotone(Direction::Increasing)),
        ToolName::MonotoneDec => no_params(Tool::Monotone(Direction::Decreasing)),
        ToolName::AlignLeft => no_params(Tool::Align(Side::Left)),
        ToolName::AlignRight => no_params(Tool::Align(Side::Right)),
    }
}

/// Clones `model` and hands the target shape's scores to `edit`.
fn edit_scores(
    model: &GamModel,
    region: &Region,
    tool: Tool,
    edit: impl FnOnce(&mut [f64], &[usize], &Shape) -> Result<(), EditError>,
) -> Result<GamModel, EditError> {
    EditDescriptor::new(region.clone(), tool).validate(model)?;
    let index = model
        .feature_index(region.feature())
        .map_err(|_| EditError::UnknownFeature(region.feature().to_string()))?;
    let slots = region.slots(model);
    let mut out = model.clone();
    let original = &model.shapes()[index];
    let shape = &mut out.shapes[index];
    edit(shape.scores_mut(), &slots, original)?;
    if let Some(stderr) = shape.stderr_mut() {
        for &i in &slots {
            stderr[i] = None;
        }
    }
    Ok(out)
}

pub fn apply_move(model: &GamModel, region: &Region, delta: f64) -> Result<GamModel, EditError> {
    edit_scores(model, region, Tool::Move { delta }, |scores, slots, _| {
        for &i in slots {
            scores[i] += delta;
        }
        Ok(())
    })
}

/// Linear interpolation between the first and last selected bins, using each
/// bin's left edge as its abscissa. The endpoints are not rewritten.
pub fn apply_interpolate(model: &GamModel, region: &Region) -> Result<GamModel, EditError> {
    edit_scores(model, region, Tool::Interpolate, |scores, slots, shape| {
        let Shape::Continuous(shape) = shape else {
            unreachable!("validated continuous")
        };
        let edges = shape.bin_edges();
        let (first, last) = (slots[0], slots[slots.len() - 1]);
        let (x0, x1) = (edges[first], edges[last]);
        let (s0, s1) = (scores[first], scores[last]);
        for &i in &slots[1..slots.len() - 1] {
            scores[i] = s0 + (edges[i] - x0) * (s1 - s0) / (x1 - x0);
        }
        Ok(())
    })
}

/// Isotonic fit over the selected bins weighted by training counts.
pub fn apply_monotone(
    model: &GamModel,
    region: &Region,
    direction: Direction,
) -> Result<GamModel, EditError> {
    edit_scores(model, region, Tool::Monotone(direction), |scores, slots, shape| {
        let values: Vec<f64> = slots.iter().map(|&i| scores[i]).collect();
        let weights: Vec<f64> = slots.iter().map(|&i| shape.counts()[i] as f64).collect();
        let fit = weighted_isotonic(&values, &weights, direction)?;
        for (&i, v) in slots.iter().zip(fit) {
            scores[i] = v;
        }
        Ok(())
    })
}

/// Sets the selection to the score of the neighbouring bin on `side`.
pub fn apply_align(model: &GamModel, region: &Region, side: Side) -> Result<GamModel, EditError> {
    edit_scores(model, region, Tool::Align(side), |scores, slots, _| {
        let reference = match side {
            Side::Left => scores[slots[0] - 1],
            Side::Right => scores[slots[slots.len() - 1] + 1],
        };
        for &i in slots {
            scores[i] = reference;
        }
        Ok(())
    })
}

/// Overwrites the selection with `value` (0 deletes the effect).
pub fn apply_set(model: &GamModel, region: &Region, value: f64) -> Result<GamModel, EditError> {
    edit_scores(model, region, Tool::SetConstant { value }, |scores, slots, _| {
        for &i in slots {
            scores[i] = value;
        }
        Ok(())
    })
}
