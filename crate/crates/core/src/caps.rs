//! Size caps guarding the exponential parts of the toolkit.
//!
//! The defaults can be raised with the `DEFILAB_CAPS` environment variable,
//! a comma separated list of `key=value` pairs, e.g.
//! `DEFILAB_CAPS=structure=32,subset_enum=22`. Unknown keys are ignored.

use std::sync::OnceLock;

use thiserror::Error;

/// A request that would exceed one of the configured caps.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cap exceeded: {what} of size {size} exceeds the cap of {cap}")]
pub struct CapExceeded {
    pub what: &'static str,
    pub size: usize,
    pub cap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Advisory universe size for generators and automorphism search.
    pub structure: usize,
    /// Largest field order `p^d` that gets tabulated.
    pub field: usize,
    /// Universe size up to which `subset_solutions` enumerates all subsets.
    pub subset_enum: usize,
    /// Universe size up to which rank-k subset types are computed.
    pub subset_types: usize,
    /// Stage size up to which an IMP step at finite rank is attempted.
    pub hierarchy_imp: usize,
    /// Largest stage extent a hierarchy step may produce.
    pub stage_extent: usize,
    /// AST node budget for witness synthesis.
    pub formula_nodes: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            structure: 24,
            field: 512,
            subset_enum: 20,
            subset_types: 16,
            hierarchy_imp: 20,
            stage_extent: 1 << 16,
            formula_nodes: 1_000_000,
        }
    }
}

impl Caps {
    /// Caps in effect for this process: defaults overridden by `DEFILAB_CAPS`.
    pub fn current() -> &'static Caps {
        static CAPS: OnceLock<Caps> = OnceLock::new();
        CAPS.get_or_init(|| match std::env::var("DEFILAB_CAPS") {
            Ok(spec) => Caps::default().with_overrides(&spec),
            Err(_) => Caps::default(),
        })
    }

    pub fn with_overrides(mut self, spec: &str) -> Caps {
        for item in spec.split(',') {
            let Some((key, value)) = item.split_once('=') else { continue };
            let Ok(value) = value.trim().parse::<usize>() else { continue };
            match key.trim() {
                "structure" => self.structure = value,
                "field" => self.field = value,
                "subset_enum" => self.subset_enum = value,
                "subset_types" => self.subset_types = value,
                "hierarchy_imp" => self.hierarchy_imp = value,
                "stage_extent" => self.stage_extent = value,
                "formula_nodes" => self.formula_nodes = value,
                _ => {}
            }
        }
        self
    }

    pub(crate) fn check(what: &'static str, size: usize, cap: usize) -> Result<(), CapExceeded> {
        if size > cap {
            Err(CapExceeded { what, size, cap })
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse() {
        let caps = Caps::default().with_overrides("structure=40, subset_enum=22,bogus=1,field=x");
        assert_eq!(caps.structure, 40);
        assert_eq!(caps.subset_enum, 22);
        assert_eq!(caps.field, 512);
    }
}
