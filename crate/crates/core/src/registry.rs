//! Name-keyed registries for the interchangeable pieces of a simulation:
//! noise laws, codebook ensembles and error-probability estimators.

use crate::error::{Error, Result};

/// An ordered list of named factories.
///
/// Lookup is case-insensitive. Registering a name that already exists
/// replaces the earlier entry.
#[derive(Clone)]
pub struct Registry<F> {
    kind: &'static str,
    entries: Vec<(String, F)>,
}

impl<F> Registry<F> {
    pub fn new(kind: &'static str) -> Self {
        Self { kind, entries: Vec::new() }
    }

    pub fn register(&mut self, name: impl Into<String>, factory: F) -> &mut Self {
        let name = name.into().to_ascii_lowercase();
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = factory,
            None => self.entries.push((name, factory)),
        }
        self
    }

    pub fn with(mut self, name: impl Into<String>, factory: F) -> Self {
        self.register(name, factory);
        self
    }

    pub fn get(&self, name: &str) -> Result<&F> {
        let key = name.to_ascii_lowercase();
        self.entries
            .iter()
            .find(|(n, _)| *n == key)
            .map(|(_, f)| f)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown {} '{}' (known: {})",
                    self.kind,
                    name,
                    self.names().join(", ")
                ))
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|(n, _)| n.as_str()).collect()
    }
}

impl<F> std::fmt::Debug for Registry<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Registry")
            .field("kind", &self.kind)
            .field("names", &self.names())
            .finish()
    }
}
