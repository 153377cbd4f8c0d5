use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::group::{GroupElement, GroupModel, Subgroup};
use crate::window::BaseSetSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKindSpec {
    Free,
    FreeAbelian,
    FreeProduct,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub kind: GroupKindSpec,
    /// One lowercase letter per generator.
    pub generators: String,
    /// Cyclic factor orders, for free products only.
    #[serde(default)]
    pub orders: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorsSpec {
    #[serde(default)]
    pub generators: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedKSpec {
    #[serde(default)]
    pub generators: Vec<String>,
    #[serde(default)]
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub radius: usize,
    pub margin: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub translations: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    pub nested: Option<bool>,
    pub tree_vertices: Option<usize>,
    pub tree_edges: Option<usize>,
    pub class_sizes: Option<Vec<usize>>,
    pub edge_stabilizers_equal_conjugates: Option<bool>,
}

/// Vertex subsets given directly, bypassing group models.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSpec {
    pub universe: Vec<String>,
    /// The first subset is the base vertex.
    pub vertices: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub name: String,
    pub group: Option<GroupSpec>,
    #[serde(default)]
    pub subgroup: GeneratorsSpec,
    pub window: Option<WindowSpec>,
    pub base_set: Option<BaseSetSpec>,
    pub family: Option<FamilySpec>,
    #[serde(default)]
    pub expected_k: ExpectedKSpec,
    #[serde(default)]
    pub expect: Expectations,
    pub explicit: Option<ExplicitSpec>,
}

/// The group-backed part of a spec, resolved into model objects.
#[derive(Debug, Clone)]
pub struct GroupInstance {
    pub model: GroupModel,
    pub subgroup: Subgroup,
    pub window: WindowSpec,
    pub base_set: BaseSetSpec,
    pub translations: Vec<GroupElement>,
    pub expected_k: Subgroup,
    pub expected_k_exact: bool,
}

impl InstanceSpec {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let spec: InstanceSpec = toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("instance specs serialize")
    }

    pub fn is_explicit(&self) -> bool {
        self.explicit.is_some()
    }

    /// Overrides the window size, keeping the shape constraints.
    pub fn with_window(mut self, radius: Option<usize>, margin: Option<usize>) -> Result<Self, HarnessError> {
        if let Some(w) = self.window.as_mut() {
            w.radius = radius.unwrap_or(w.radius);
            w.margin = margin.unwrap_or(w.margin);
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Parse(format!("{}: {m}", self.name)));
        if self.name.is_empty() {
            return Err(HarnessError::Parse("instance name is empty".into()));
        }
        if let Some(e) = &self.explicit {
            if self.group.is_some() || self.family.is_some() {
                return bad("explicit mode excludes [group] and [family]".into());
            }
            if e.vertices.is_empty() {
                return bad("explicit mode needs at least one vertex".into());
            }
            return Ok(());
        }
        if self.group.is_none() || self.window.is_none() || self.base_set.is_none() || self.family.is_none() {
            return bad("group mode needs [group], [window], [base_set] and [family]".into());
        }
        let w = self.window.expect("checked");
        if w.margin == 0 || w.margin >= w.radius || w.radius < 2 * w.margin {
            return bad(format!(
                "window radius {} and margin {} must satisfy 1 <= margin and 2*margin <= radius",
                w.radius, w.margin
            ));
        }
        Ok(())
    }

    /// Builds the group model, subgroups and translations.
    pub fn resolve(&self) -> Result<GroupInstance, HarnessError> {
        let g = self.group.as_ref().ok_or_else(|| HarnessError::Parse("no [group] section".into()))?;
        let parse = |e: crate::group::GroupError| HarnessError::Parse(format!("{}: {e}", self.name));
        let model = match g.kind {
            GroupKindSpec::Free => GroupModel::free(&g.generators),
            GroupKindSpec::FreeAbelian => GroupModel::free_abelian(&g.generators),
            GroupKindSpec::FreeProduct => GroupModel::free_product_cyclic(&g.generators, &g.orders),
        }
        .map_err(parse)?;
        let window = self.window.expect("validated");
        // Room for the recomputation at radius + 2.
        let model = model
            .with_limits((window.radius + 2).max(crate::group::DEFAULT_MAX_RADIUS), crate::group::DEFAULT_ELEMENT_CAP);
        let words = |ws: &[String]| -> Result<Vec<GroupElement>, HarnessError> {
            ws.iter().map(|w| model.normalize(w).map_err(parse)).collect()
        };
        let subgroup = Subgroup::new(&model, words(&self.subgroup.generators)?).map_err(parse)?;
        let expected_k = Subgroup::new(&model, words(&self.expected_k.generators)?).map_err(parse)?;
        let translations = words(&self.family.as_ref().expect("validated").translations)?;
        Ok(GroupInstance {
            model,
            subgroup,
            window,
            base_set: self.base_set.clone().expect("validated"),
            translations,
            expected_k,
            expected_k_exact: self.expected_k.exact,
        })
    }
}
