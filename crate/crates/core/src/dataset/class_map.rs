use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered family label set. A family's class id is its position in the list, so ids
/// are contiguous from zero by construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct FamilyClassMap {
    names: Vec<String>,
}

impl FamilyClassMap {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::EmptyClassMap);
        }
        let mut seen = HashSet::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            let line = i + 1;
            if name.trim().is_empty() {
                return Err(Error::ClassMap {
                    line,
                    reason: "empty family name".into(),
                });
            }
            if name.trim() != name || name.contains(['\n', '\r']) {
                return Err(Error::ClassMap {
                    line,
                    reason: format!("family name {name:?} has surrounding whitespace"),
                });
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::ClassMap {
                    line,
                    reason: format!("duplicate family name '{name}'"),
                });
            }
        }
        Ok(Self { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, class_id: u32) -> Option<&str> {
        self.names.get(class_id as usize).map(String::as_str)
    }

    pub fn contains(&self, class_id: u32) -> bool {
        (class_id as usize) < self.names.len()
    }

    pub fn id_of(&self, name: &str) -> Option<u32> {
        self.names.iter().position(|n| n == name).map(|i| i as u32)
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.names.len()).map(|i| i as u32)
    }

    /// `(class_id, family_name)` pairs in id order.
    pub fn entries(&self) -> impl Iterator<Item = (u32, &str)> + '_ {
        self.names.iter().enumerate().map(|(i, n)| (i as u32, n.as_str()))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// One family per line, newline-terminated.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for name in &self.names {
            out.push_str(name);
            out.push('\n');
        }
        out
    }
}

impl TryFrom<Vec<String>> for FamilyClassMap {
    type Error = Error;

    fn try_from(names: Vec<String>) -> Result<Self> {
        Self::new(names)
    }
}

impl From<FamilyClassMap> for Vec<String> {
    fn from(map: FamilyClassMap) -> Self {
        map.names
    }
}

/// Parses a newline-separated family list; line index is the class id.
///
/// Surrounding whitespace and a trailing `\r` are trimmed from each name. Trailing blank
/// lines at the end of the file are ignored, blank lines elsewhere are an error.
pub fn parse_class_map(text: &str) -> Result<FamilyClassMap> {
    let body = text.trim_end();
    if body.is_empty() {
        return Err(Error::EmptyClassMap);
    }
    FamilyClassMap::new(body.lines().map(str::trim))
}
