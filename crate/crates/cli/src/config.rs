//! Optional TOML configuration. Every key mirrors a command-line flag of the
//! same name; flags given on the command line win.

use std::path::Path;

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Config {
    pub class: Option<String>,
    pub semantics: Option<String>,
    pub max_worlds: Option<usize>,
    pub max_domain: Option<usize>,
    pub budget: Option<u64>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub max_distance: Option<u32>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {}", path.display(), e.message())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_mirror_flags() {
        let c: Config = toml::from_str("class = \"transitive\"\nmax-worlds = 4\nseed = 9\n").unwrap();
        assert_eq!(c.class.as_deref(), Some("transitive"));
        assert_eq!(c.max_worlds, Some(4));
        assert_eq!(c.seed, Some(9));
        assert!(toml::from_str::<Config>("max_worlds = 4").is_err());
    }
}
