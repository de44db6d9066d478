use std::collections::BTreeMap;
use std::path::PathBuf;

use expander_core::quotient::{
    encode_cache, read_cache, write_cache, EnumerationLimits, QuotientGroup,
};

use crate::report::{sha256_hex, CliError};

/// Enumerated levels `0, 1, ...`, loaded from or written to the cache
/// directory when one is given.
pub struct Context {
    pub cache_dir: Option<PathBuf>,
    pub limits: EnumerationLimits,
    pub checksums: BTreeMap<String, String>,
    groups: Vec<QuotientGroup>,
}

impl Context {
    pub fn new(cache_dir: Option<PathBuf>, force_level9: bool) -> Context {
        Context {
            cache_dir,
            limits: EnumerationLimits {
                allow_level9: force_level9,
                ..EnumerationLimits::default()
            },
            checksums: BTreeMap::new(),
            groups: Vec::new(),
        }
    }

    fn load(&mut self, level: usize) -> Result<QuotientGroup, CliError> {
        let name = format!("K{level}.kq");
        if level > self.limits.cap() {
            // fail before touching the cache
            QuotientGroup::enumerate_with(level, &self.limits)?;
        }
        let Some(dir) = &self.cache_dir else {
            let q = QuotientGroup::enumerate_with(level, &self.limits)?;
            self.checksums.insert(name, sha256_hex(&encode_cache(&q)));
            return Ok(q);
        };
        let path = dir.join(&name);
        if path.exists() {
            let (q, sha) = read_cache(&path)?;
            if q.level() == level {
                self.checksums.insert(name, sha);
                return Ok(q);
            }
        }
        let q = QuotientGroup::enumerate_with(level, &self.limits)?;
        let sha = write_cache(&q, &path)?;
        self.checksums.insert(name, sha);
        Ok(q)
    }

    /// `K_0, ..., K_m`.
    pub fn groups(&mut self, m: usize) -> Result<&[QuotientGroup], CliError> {
        while self.groups.len() <= m {
            let q = self.load(self.groups.len())?;
            self.groups.push(q);
        }
        Ok(&self.groups[..=m])
    }

    pub fn group(&mut self, level: usize) -> Result<&QuotientGroup, CliError> {
        Ok(&self.groups(level)?[level])
    }
}
