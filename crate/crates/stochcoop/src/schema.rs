//! JSON file formats.
//!
//! Coalitions are keyed by ascending 1-based member lists such as `"1,3"`.
//! Every map keyed that way must list each nonempty coalition exactly once.

use std::fmt;
use std::marker::PhantomData;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use stochcoop_core::{
    Allocation, ClassicalGame, Coalition, CoreError, Distribution, DistributionError, GameError, NewsvendorError,
    NewsvendorProblem, StochasticGame, MAX_PLAYERS,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("player count must be between 1 and {MAX_PLAYERS}, got {0}")]
    Players(usize),
    #[error("{map}: unknown coalition key \"{key}\"")]
    UnknownKey { map: &'static str, key: String },
    #[error("{map}: coalition \"{key}\" listed twice")]
    DuplicateKey { map: &'static str, key: String },
    #[error("{map}: missing coalition \"{key}\"")]
    MissingKey { map: &'static str, key: String },
    #[error("coalition \"{key}\": {source}")]
    Distribution { key: String, source: DistributionError },
    #[error("unknown family \"{0}\"")]
    UnknownFamily(String),
    #[error("family \"derived\" needs \"mean\" and \"lower\" maps")]
    DerivedMaps,
    #[error("family \"{0}\" needs a \"coalitions\" map")]
    CoalitionMap(String),
    #[error("allocation vectors must have length {expected}, found {found}")]
    AllocationLength { expected: usize, found: usize },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Newsvendor(#[from] NewsvendorError),
}

/// Map from coalition keys to values, keeping file order and duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyedMap<T>(pub Vec<(String, T)>);

impl<T> KeyedMap<T> {
    /// Orders the entries by coalition mask, checking that each appears exactly once.
    pub fn resolve(self, map: &'static str, n: usize) -> Result<Vec<T>, SchemaError> {
        let mut slots: Vec<Option<T>> = (0..(1usize << n) - 1).map(|_| None).collect();
        for (key, value) in self.0 {
            let s = Coalition::parse_key(&key, n).map_err(|_| SchemaError::UnknownKey { map, key: key.clone() })?;
            let slot = &mut slots[s.mask() as usize - 1];
            if slot.is_some() {
                return Err(SchemaError::DuplicateKey { map, key });
            }
            *slot = Some(value);
        }
        slots
            .into_iter()
            .enumerate()
            .map(|(k, v)| {
                v.ok_or_else(|| SchemaError::MissingKey { map, key: Coalition::from_mask(k as u32 + 1).key() })
            })
            .collect()
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(Coalition) -> T) -> Self {
        KeyedMap(Coalition::all_nonempty(n).map(|s| (s.key(), f(s))).collect())
    }
}

impl<T: Serialize> Serialize for KeyedMap<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for KeyedMap<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V<T>(PhantomData<T>);
        impl<'de, T: Deserialize<'de>> Visitor<'de> for V<T> {
            type Value = KeyedMap<T>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map keyed by coalitions")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = access.next_entry()? {
                    out.push((k, v));
                }
                Ok(KeyedMap(out))
            }
        }
        deserializer.deserialize_map(V(PhantomData))
    }
}

/// A distribution tagged by family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Normal { mu: f64, sigma2: f64 },
    Uniform { a: f64, b: f64 },
    Gamma { k: f64, theta: f64 },
    DiscreteUniform { realizations: Vec<f64> },
    AlphaCutUniform { a: f64, b: f64, alpha: f64 },
}

impl DistributionSpec {
    pub fn to_distribution(&self) -> Result<Distribution, DistributionError> {
        match self {
            DistributionSpec::Normal { mu, sigma2 } => Distribution::normal(*mu, *sigma2),
            DistributionSpec::Uniform { a, b } => Distribution::uniform(*a, *b),
            DistributionSpec::Gamma { k, theta } => Distribution::gamma(*k, *theta),
            DistributionSpec::DiscreteUniform { realizations } => Distribution::discrete_uniform(realizations.clone()),
            DistributionSpec::AlphaCutUniform { a, b, alpha } => Distribution::alpha_cut_uniform(*a, *b, *alpha),
        }
    }

    pub fn from_distribution(d: &Distribution) -> Self {
        match d.clone() {
            Distribution::Normal { mu, sigma2 } => DistributionSpec::Normal { mu, sigma2 },
            Distribution::Uniform { a, b } => DistributionSpec::Uniform { a, b },
            Distribution::Gamma { k, theta } => DistributionSpec::Gamma { k, theta },
            Distribution::DiscreteUniform { realizations } => DistributionSpec::DiscreteUniform { realizations },
            Distribution::AlphaCutUniform { a, b, alpha } => DistributionSpec::AlphaCutUniform { a, b, alpha },
        }
    }
}

pub fn parse_distribution(text: &str) -> Result<Distribution, SchemaError> {
    let spec: DistributionSpec = serde_json::from_str(text)?;
    spec.to_distribution().map_err(|source| SchemaError::Distribution { key: String::from("-"), source })
}

/// On-disk game: either one law per coalition, or the derived mean and lower-bound games.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub players: usize,
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coalitions: Option<KeyedMap<serde_json::Map<String, serde_json::Value>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<KeyedMap<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<KeyedMap<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GameInput {
    Stochastic(StochasticGame),
    /// Mean and lower-bound games given directly, for condition-level analysis.
    Derived {
        mean: ClassicalGame,
        lower: ClassicalGame,
    },
}

impl GameInput {
    pub fn players(&self) -> usize {
        match self {
            GameInput::Stochastic(g) => g.players(),
            GameInput::Derived { mean, .. } => mean.players(),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            GameInput::Stochastic(g) => g.family().name(),
            GameInput::Derived { .. } => "derived",
        }
    }
}

fn check_players(n: usize) -> Result<(), SchemaError> {
    if n == 0 || n > MAX_PLAYERS {
        return Err(SchemaError::Players(n));
    }
    Ok(())
}

fn classical(n: usize, map: KeyedMap<f64>, name: &'static str) -> Result<ClassicalGame, SchemaError> {
    let mut values = vec![0.0];
    values.extend(map.resolve(name, n)?);
    Ok(ClassicalGame::new(n, values)?)
}

impl GameFile {
    pub fn into_game(self) -> Result<GameInput, SchemaError> {
        let n = self.players;
        check_players(n)?;
        if self.family == "derived" {
            let (Some(mean), Some(lower)) = (self.mean, self.lower) else {
                return Err(SchemaError::DerivedMaps);
            };
            return Ok(GameInput::Derived { mean: classical(n, mean, "mean")?, lower: classical(n, lower, "lower")? });
        }
        const FAMILIES: [&str; 5] = ["normal", "uniform", "gamma", "discrete_uniform", "alpha_cut_uniform"];
        if !FAMILIES.contains(&self.family.as_str()) {
            return Err(SchemaError::UnknownFamily(self.family));
        }
        let Some(coalitions) = self.coalitions else {
            return Err(SchemaError::CoalitionMap(self.family));
        };
        let params = coalitions.resolve("coalitions", n)?;
        let mut dists = Vec::with_capacity(params.len());
        for (k, mut obj) in params.into_iter().enumerate() {
            let key = Coalition::from_mask(k as u32 + 1).key();
            obj.insert(String::from("family"), serde_json::Value::String(self.family.clone()));
            let spec: DistributionSpec = serde_json::from_value(serde_json::Value::Object(obj))?;
            dists.push(spec.to_distribution().map_err(|source| SchemaError::Distribution { key, source })?);
        }
        Ok(GameInput::Stochastic(StochasticGame::new(n, dists)?))
    }

    pub fn from_game(game: &GameInput) -> Self {
        match game {
            GameInput::Stochastic(g) => {
                let coalitions = KeyedMap::from_fn(g.players(), |s| {
                    let serde_json::Value::Object(mut obj) =
                        serde_json::to_value(DistributionSpec::from_distribution(g.value(s))).expect("plain data")
                    else {
                        unreachable!()
                    };
                    obj.remove("family");
                    obj
                });
                GameFile {
                    players: g.players(),
                    family: String::from(g.family().name()),
                    coalitions: Some(coalitions),
                    mean: None,
                    lower: None,
                }
            }
            GameInput::Derived { mean, lower } => GameFile {
                players: mean.players(),
                family: String::from("derived"),
                coalitions: None,
                mean: Some(KeyedMap::from_fn(mean.players(), |s| mean.value(s))),
                lower: Some(KeyedMap::from_fn(lower.players(), |s| lower.value(s))),
            },
        }
    }
}

pub fn parse_game(text: &str) -> Result<GameInput, SchemaError> {
    serde_json::from_str::<GameFile>(text)?.into_game()
}

pub fn game_to_json(game: &GameInput) -> String {
    serde_json::to_string_pretty(&GameFile::from_game(game)).expect("plain data")
}

/// Allocation file, tagged by `type`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum AllocationFile {
    #[serde(rename = "r")]
    R { r: Vec<f64> },
    #[serde(rename = "dr")]
    Dr { d: Vec<f64>, r: Vec<f64> },
    #[serde(rename = "dr-signed")]
    DrSigned { d: Vec<f64>, r: Vec<f64> },
    /// `cov` given as rows.
    #[serde(rename = "unstructured")]
    Unstructured { mean: Vec<f64>, cov: Vec<Vec<f64>> },
}

impl AllocationFile {
    pub fn into_allocation(self, n: usize) -> Result<Allocation, SchemaError> {
        let len = |v: &[f64]| {
            if v.len() == n {
                Ok(())
            } else {
                Err(SchemaError::AllocationLength { expected: n, found: v.len() })
            }
        };
        Ok(match self {
            AllocationFile::R { r } => {
                len(&r)?;
                Allocation::R { r }
            }
            AllocationFile::Dr { d, r } => {
                len(&d)?;
                len(&r)?;
                Allocation::Dr { d, r }
            }
            AllocationFile::DrSigned { d, r } => {
                len(&d)?;
                len(&r)?;
                Allocation::DrSigned { d, r }
            }
            AllocationFile::Unstructured { mean, cov } => {
                len(&mean)?;
                if cov.len() != n {
                    return Err(SchemaError::AllocationLength { expected: n, found: cov.len() });
                }
                for row in &cov {
                    len(row)?;
                }
                Allocation::Unstructured { mean, cov: cov.concat() }
            }
        })
    }
}

pub fn parse_allocation(text: &str, n: usize) -> Result<Allocation, SchemaError> {
    serde_json::from_str::<AllocationFile>(text)?.into_allocation(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewsvendorFile {
    pub players: usize,
    pub p: f64,
    pub c: f64,
    pub demand: KeyedMap<Bounds>,
}

impl NewsvendorFile {
    pub fn into_problem(self) -> Result<NewsvendorProblem, SchemaError> {
        check_players(self.players)?;
        let demand = self.demand.resolve("demand", self.players)?.into_iter().map(|b| (b.a, b.b)).collect();
        Ok(NewsvendorProblem::new(self.players, demand, self.p, self.c)?)
    }

    pub fn from_problem(prob: &NewsvendorProblem) -> Self {
        NewsvendorFile {
            players: prob.players(),
            p: prob.price(),
            c: prob.cost(),
            demand: KeyedMap::from_fn(prob.players(), |s| {
                let (a, b) = prob.demand(s);
                Bounds { a, b }
            }),
        }
    }
}

pub fn parse_newsvendor(text: &str) -> Result<NewsvendorProblem, SchemaError> {
    serde_json::from_str::<NewsvendorFile>(text)?.into_problem()
}
