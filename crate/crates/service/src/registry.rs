//! Knowledge bases available to sessions, keyed by their declared name.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use diag_core::consistency::solve;
use diag_core::parse::parse_kb;
use diag_core::{car, Constraint, KnowledgeBase};

#[derive(Debug, Clone, Default)]
pub struct KbRegistry {
    kbs: BTreeMap<String, Arc<KnowledgeBase>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariableInfo {
    pub name: String,
    pub domain: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintInfo {
    pub id: String,
    pub expression: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct KbInfo {
    pub id: String,
    pub variables: Vec<VariableInfo>,
    pub constraints: Vec<ConstraintInfo>,
}

impl KbRegistry {
    /// Registry holding only the bundled car example.
    pub fn with_car() -> Self {
        let mut r = KbRegistry::default();
        r.insert(car::knowledge_base())
            .expect("bundled knowledge base is consistent");
        r
    }

    /// Registers `kb` under its name. Inconsistent knowledge bases are
    /// rejected so sessions can start out consistent.
    pub fn insert(&mut self, kb: KnowledgeBase) -> Result<(), String> {
        let refs: Vec<&Constraint> = kb.constraints.iter().collect();
        if solve(&refs, &kb.variables).is_none() {
            return Err(format!("knowledge base `{}` is inconsistent", kb.name));
        }
        self.kbs.insert(kb.name.clone(), Arc::new(kb));
        Ok(())
    }

    /// Adds every `*.kb` file in `dir`. A file declaring an existing name
    /// replaces the earlier entry.
    pub fn load_dir(&mut self, dir: &Path) -> io::Result<usize> {
        let mut paths: Vec<_> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "kb"))
            .collect();
        paths.sort();
        for p in &paths {
            let text = fs::read_to_string(p)?;
            let kb = parse_kb(&text).map_err(|e| {
                io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", p.display()))
            })?;
            self.insert(kb).map_err(|e| {
                io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", p.display()))
            })?;
        }
        Ok(paths.len())
    }

    pub fn get(&self, id: &str) -> Option<Arc<KnowledgeBase>> {
        self.kbs.get(id).cloned()
    }

    pub fn describe(&self) -> Vec<KbInfo> {
        self.kbs
            .iter()
            .map(|(id, kb)| KbInfo {
                id: id.clone(),
                variables: kb
                    .variables
                    .iter()
                    .map(|v| VariableInfo {
                        name: v.name.clone(),
                        domain: v.domain.clone(),
                    })
                    .collect(),
                constraints: kb
                    .constraints
                    .iter()
                    .map(|c| ConstraintInfo {
                        id: c.id.clone(),
                        expression: c.expr.render(&kb.variables),
                    })
                    .collect(),
            })
            .collect()
    }
}
