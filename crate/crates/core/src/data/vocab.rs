use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Result, TeroError};

/// Dense string interner: ids are contiguous from 0 in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Interner {
    names: Vec<String>,
    ids: HashMap<String, usize>,
}

impl Interner {
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Writes one `id<TAB>name` line per entry.
    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let mut out =
            std::io::BufWriter::new(fs::File::create(path).map_err(TeroError::file(path))?);
        for (id, name) in self.names.iter().enumerate() {
            writeln!(out, "{id}\t{name}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_tsv(path: &Path) -> Result<Self> {
        let reader = BufReader::new(fs::File::open(path).map_err(TeroError::file(path))?);
        let mut interner = Interner::default();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| TeroError::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: message.to_string(),
            };
            let (id, name) = line
                .split_once('\t')
                .ok_or_else(|| err("expected id<TAB>name"))?;
            let id: usize = id.parse().map_err(|_| err("bad id"))?;
            if id != interner.len() {
                return Err(err("ids must be contiguous from 0"));
            }
            if interner.id(name).is_some() {
                return Err(err("duplicate name"));
            }
            interner.intern(name);
        }
        Ok(interner)
    }
}

/// Entity and relation vocabularies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    pub entities: Interner,
    pub relations: Interner,
}

impl Vocab {
    pub fn n_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn n_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn entity_id(&self, name: &str) -> Result<usize> {
        self.entities
            .id(name)
            .ok_or_else(|| TeroError::UnknownToken {
                kind: "entity",
                token: name.to_string(),
            })
    }

    pub fn relation_id(&self, name: &str) -> Result<usize> {
        self.relations
            .id(name)
            .ok_or_else(|| TeroError::UnknownToken {
                kind: "relation",
                token: name.to_string(),
            })
    }

    pub const ENTITY_FILE: &'static str = "entities.tsv";
    pub const RELATION_FILE: &'static str = "relations.tsv";

    pub fn save(&self, dir: &Path) -> Result<()> {
        self.entities.write_tsv(&dir.join(Self::ENTITY_FILE))?;
        self.relations.write_tsv(&dir.join(Self::RELATION_FILE))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        Ok(Vocab {
            entities: Interner::read_tsv(&dir.join(Self::ENTITY_FILE))?,
            relations: Interner::read_tsv(&dir.join(Self::RELATION_FILE))?,
        })
    }
}
