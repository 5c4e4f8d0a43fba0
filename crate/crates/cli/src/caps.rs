//! Resource caps: defaults, then `RELKIT_CAPS`, then `--caps`.
//!
//! Syntax is a comma-separated list of `key=value`, e.g.
//! `enum=50000,assignments=1e7,clone3=20000`.

use anyhow::{bail, Context, Result};
use relkit::freeclone::default_cap;
use relkit::identities::CheckConfig;
use relkit::maltsev::SearchConfig;

pub const ENV_VAR: &str = "RELKIT_CAPS";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Caps {
    pub enum_cap: usize,
    pub u_cap: usize,
    pub u_components: usize,
    pub assignments: u64,
    pub threshold: usize,
    pub clone3: usize,
    pub clone4: usize,
    /// Cap for `free-algebra` when `--cap` is not given; 0 means the arity default.
    pub clone: usize,
}

impl Default for Caps {
    fn default() -> Self {
        let c = CheckConfig::default();
        let s = SearchConfig::default();
        Caps {
            enum_cap: c.enum_cap,
            u_cap: c.u_cap,
            u_components: c.u_components,
            assignments: c.max_assignments,
            threshold: c.exhaustive_threshold,
            clone3: s.cap3,
            clone4: s.cap4,
            clone: 0,
        }
    }
}

fn number(key: &str, value: &str) -> Result<u64> {
    let v = value.trim();
    // accept 1e7 style
    if let Some((m, e)) = v.split_once(['e', 'E']) {
        let m: u64 = m.parse().with_context(|| format!("cap `{key}`: bad number {v:?}"))?;
        let e: u32 = e.parse().with_context(|| format!("cap `{key}`: bad exponent {v:?}"))?;
        return 10u64
            .checked_pow(e)
            .and_then(|p| p.checked_mul(m))
            .with_context(|| format!("cap `{key}` overflows"));
    }
    v.replace('_', "")
        .parse()
        .with_context(|| format!("cap `{key}`: bad number {v:?}"))
}

impl Caps {
    pub fn apply(&mut self, spec: &str) -> Result<()> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let Some((key, value)) = item.split_once('=') else {
                bail!("cap {item:?} is not key=value");
            };
            let key = key.trim();
            let n = number(key, value)?;
            let size = usize::try_from(n).context("cap too large")?;
            match key {
                "enum" => self.enum_cap = size,
                "u" => self.u_cap = size,
                "components" => self.u_components = size,
                "assignments" => self.assignments = n,
                // brute-force filtering is only feasible on tiny universes
                "threshold" if size > 6 => bail!("cap `threshold` must be at most 6"),
                "threshold" => self.threshold = size,
                "clone3" => self.clone3 = size,
                "clone4" => self.clone4 = size,
                "clone" => self.clone = size,
                _ => bail!(
                    "unknown cap `{key}` (known: enum, u, components, assignments, threshold, clone3, clone4, clone)"
                ),
            }
        }
        Ok(())
    }

    /// Defaults overridden by the environment, then by the flag.
    pub fn resolve(flag: Option<&str>) -> Result<Caps> {
        let mut caps = Caps::default();
        if let Ok(env) = std::env::var(ENV_VAR) {
            caps.apply(&env).with_context(|| format!("in {ENV_VAR}"))?;
        }
        if let Some(f) = flag {
            caps.apply(f).context("in --caps")?;
        }
        Ok(caps)
    }

    pub fn clone_cap(&self, arity: usize) -> usize {
        if self.clone > 0 {
            self.clone
        } else {
            default_cap(arity)
        }
    }

    pub fn check_config(&self) -> CheckConfig {
        CheckConfig {
            exhaustive_threshold: self.threshold,
            enum_cap: self.enum_cap,
            u_components: self.u_components,
            u_cap: self.u_cap,
            max_assignments: self.assignments,
            ..CheckConfig::default()
        }
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            cap3: self.clone3,
            cap4: self.clone4,
            ..SearchConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists() {
        let mut c = Caps::default();
        c.apply("enum=10, assignments=2e6,clone3=1_000").unwrap();
        assert_eq!(c.enum_cap, 10);
        assert_eq!(c.assignments, 2_000_000);
        assert_eq!(c.clone3, 1000);
        assert!(c.apply("bogus=1").is_err());
        assert!(c.apply("enum").is_err());
        assert!(c.apply("enum=x").is_err());
    }
}
