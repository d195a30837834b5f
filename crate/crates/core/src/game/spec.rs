use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{
    rock_paper_scissors, AvoidDirection, ExtensiveGame, Goofspiel, KuhnPoker, TradeComm,
};
use crate::error::{Error, Result};

/// A built-in game name plus its parameters, written `name(k=v,...)`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GameSpec {
    pub name: String,
    pub parameters: BTreeMap<String, String>,
}

impl GameSpec {
    pub fn new(name: &str) -> Self {
        GameSpec {
            name: name.to_string(),
            parameters: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    fn canonical_name(&self) -> &str {
        match self.name.as_str() {
            "rps" => "rock_paper_scissors",
            other => other,
        }
    }

    /// Construct the game. Every parameter must be known to the named
    /// constructor and take a supported value.
    pub fn build(&self) -> Result<ExtensiveGame> {
        let name = self.canonical_name();
        let unsupported = |reason: String| Error::UnsupportedParameters {
            game: name.to_string(),
            reason,
        };
        let allowed: &[&str] = match name {
            "rock_paper_scissors" | "avoid_direction" => &[],
            "kuhn_poker" => &["players"],
            "goofspiel" => &[
                "players",
                "num_cards",
                "points_order",
                "returns_type",
                "egocentric",
                "imp_info",
                "num_turns",
            ],
            "trade_comm" => &["num_items"],
            _ => return Err(Error::UnknownGame(self.name.clone())),
        };
        if let Some(key) = self.parameters.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(unsupported(format!("unknown parameter `{key}`")));
        }
        let int = |key: &str, default: i64| -> Result<i64> {
            match self.parameters.get(key) {
                None => Ok(default),
                Some(v) => v
                    .parse()
                    .map_err(|_| unsupported(format!("`{key}` must be an integer, got `{v}`"))),
            }
        };
        let fixed = |key: &str, expected: &str| -> Result<()> {
            match self.parameters.get(key) {
                Some(v) if !v.eq_ignore_ascii_case(expected) => {
                    Err(unsupported(format!("only {key}={expected} is supported, got `{v}`")))
                }
                _ => Ok(()),
            }
        };
        match name {
            "rock_paper_scissors" => rock_paper_scissors(),
            "avoid_direction" => AvoidDirection::game(),
            "kuhn_poker" => KuhnPoker::game(to_count(int("players", 2)?)),
            "goofspiel" => {
                if int("players", 2)? != 2 {
                    return Err(unsupported("only players=2 is supported".into()));
                }
                if int("num_turns", -1)? != -1 {
                    return Err(unsupported("only num_turns=-1 is supported".into()));
                }
                fixed("points_order", "descending")?;
                fixed("returns_type", "point_difference")?;
                fixed("egocentric", "true")?;
                fixed("imp_info", "true")?;
                Goofspiel::game(to_count(int("num_cards", 4)?))
            }
            "trade_comm" => TradeComm::game(to_count(int("num_items", 3)?)),
            _ => unreachable!(),
        }
    }
}

fn to_count(v: i64) -> usize {
    usize::try_from(v).unwrap_or(0)
}

impl fmt::Display for GameSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        if !self.parameters.is_empty() {
            let params: Vec<String> = self
                .parameters
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            write!(f, "({})", params.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for GameSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let malformed = || Error::MalformedSpec(s.to_string());
        let (name, rest) = match s.find('(') {
            None => (s, None),
            Some(open) => {
                let inner = s[open + 1..].strip_suffix(')').ok_or_else(malformed)?;
                (&s[..open], Some(inner))
            }
        };
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(malformed());
        }
        let mut spec = GameSpec::new(name);
        if let Some(inner) = rest {
            for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                let (k, v) = part.split_once('=').ok_or_else(malformed)?;
                let (k, v) = (k.trim(), v.trim());
                if k.is_empty() || v.is_empty() || spec.parameters.contains_key(k) {
                    return Err(malformed());
                }
                spec.parameters.insert(k.to_string(), v.to_string());
            }
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_table_syntax() {
        let spec: GameSpec = "goofspiel(num_cards=4, points_order=descending, returns_type=point_difference)"
            .parse()
            .unwrap();
        assert_eq!(spec.name, "goofspiel");
        assert_eq!(spec.parameters["num_cards"], "4");
        assert_eq!(spec.to_string(), "goofspiel(num_cards=4,points_order=descending,returns_type=point_difference)");
        assert!(spec.build().is_ok());
    }

    #[test]
    fn bare_name_parses() {
        let spec: GameSpec = "rps".parse().unwrap();
        assert!(spec.parameters.is_empty());
        assert_eq!(spec.build().unwrap().name(), "rock_paper_scissors");
    }

    #[test]
    fn rejects_garbage() {
        assert!("kuhn_poker(players=2".parse::<GameSpec>().is_err());
        assert!("kuhn_poker(players)".parse::<GameSpec>().is_err());
        assert!("(players=2)".parse::<GameSpec>().is_err());
        assert!("kuhn_poker(players=2,players=3)".parse::<GameSpec>().is_err());
    }

    #[test]
    fn unknown_game_and_keys_are_rejected() {
        let err = "leduc_poker".parse::<GameSpec>().unwrap().build().unwrap_err();
        assert!(matches!(err, Error::UnknownGame(_)));
        let err = "kuhn_poker(players=2,cards=3)".parse::<GameSpec>().unwrap().build().unwrap_err();
        assert!(matches!(err, Error::UnsupportedParameters { .. }));
        let err = "kuhn_poker(players=4)".parse::<GameSpec>().unwrap().build().unwrap_err();
        assert!(matches!(err, Error::UnsupportedParameters { .. }));
        let err = "goofspiel(points_order=random)".parse::<GameSpec>().unwrap().build().unwrap_err();
        assert!(matches!(err, Error::UnsupportedParameters { .. }));
        let err = "rps(players=2)".parse::<GameSpec>().unwrap().build().unwrap_err();
        assert!(matches!(err, Error::UnsupportedParameters { .. }));
    }
}
