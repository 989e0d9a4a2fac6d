//! Node covariates: binary, continuous, and categorical columns with
//! explicit missingness.
//!
//! Missing values are `None` and contribute zero wherever a statistic sums
//! over attribute values; a missing category matches nothing.

use indexmap::IndexMap;

/// Covariate column kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttrKind {
    Binary,
    Continuous,
    Categorical,
}

impl AttrKind {
    pub fn name(self) -> &'static str {
        match self {
            AttrKind::Binary => "binary",
            AttrKind::Continuous => "continuous",
            AttrKind::Categorical => "categorical",
        }
    }
}

/// One column of node covariate values (length = node count).
#[derive(Clone, Debug)]
pub enum AttrColumn {
    Binary(Vec<Option<bool>>),
    Continuous(Vec<Option<f64>>),
    Categorical(Vec<Option<u32>>),
}

impl AttrColumn {
    pub fn kind(&self) -> AttrKind {
        match self {
            AttrColumn::Binary(_) => AttrKind::Binary,
            AttrColumn::Continuous(_) => AttrKind::Continuous,
            AttrColumn::Categorical(_) => AttrKind::Categorical,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AttrColumn::Binary(v) => v.len(),
            AttrColumn::Continuous(v) => v.len(),
            AttrColumn::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Numeric value used by covariate sums: binary 0/1, continuous as-is;
    /// missing values and categorical columns yield 0.
    pub fn numeric(&self, i: u32) -> f64 {
        match self {
            AttrColumn::Binary(v) => v[i as usize].map_or(0.0, |b| b as u8 as f64),
            AttrColumn::Continuous(v) => v[i as usize].unwrap_or(0.0),
            AttrColumn::Categorical(_) => 0.0,
        }
    }

    /// Category of node `i` (categorical columns only; `None` when missing).
    pub fn category(&self, i: u32) -> Option<u32> {
        match self {
            AttrColumn::Categorical(v) => v[i as usize],
            _ => None,
        }
    }
}

/// Named covariate columns over a fixed node set. Names are unique across
/// all three kinds.
#[derive(Clone, Debug, Default)]
pub struct AttributeTable {
    columns: IndexMap<String, AttrColumn>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AttributeError {
    #[error("duplicate attribute column \"{0}\"")]
    DuplicateColumn(String),
    #[error("attribute column \"{name}\" has {found} rows, expected {expected}")]
    LengthMismatch { name: String, expected: usize, found: usize },
}

impl AttributeTable {
    pub fn new() -> AttributeTable {
        AttributeTable::default()
    }

    /// Adds a column, rejecting duplicate names and (against any existing
    /// column) mismatched lengths.
    pub fn add_column(&mut self, name: &str, column: AttrColumn) -> Result<(), AttributeError> {
        if self.columns.contains_key(name) {
            return Err(AttributeError::DuplicateColumn(name.to_string()));
        }
        if let Some((_, first)) = self.columns.first() {
            if first.len() != column.len() {
                return Err(AttributeError::LengthMismatch {
                    name: name.to_string(),
                    expected: first.len(),
                    found: column.len(),
                });
            }
        }
        self.columns.insert(name.to_string(), column);
        Ok(())
    }

    /// Moves every column of `other` into `self`.
    pub fn merge(&mut self, other: AttributeTable) -> Result<(), AttributeError> {
        for (name, column) in other.columns {
            self.add_column(&name, column)?;
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&AttrColumn> {
        self.columns.get(name)
    }

    /// Stable positional index of a column (insertion order).
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.get_index_of(name)
    }

    /// Column at a positional index from [`AttributeTable::index_of`].
    pub fn column_at(&self, idx: usize) -> &AttrColumn {
        &self.columns[idx]
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}
