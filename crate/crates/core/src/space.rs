//! Dependency-aware integer search spaces.
//!
//! A [`SearchSpace`] is an ordered list of [`DesignVariable`]s, each with a
//! finite list of integer-coded options, plus [`DependencyRule`]s that let a
//! controller variable (a block depth, say) switch other variables on and
//! off. A [`Genotype`] holds one option index per variable. Positions that a
//! rule masks out do not change the decoded [`SubnetworkConfig`]; the
//! canonical form of a genotype sets them to index 0.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigUint;
use rand::Rng;

use crate::error::{Error, Result};

/// One architecture knob and its ordered, integer-coded choices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignVariable {
    pub name: String,
    pub options: Vec<i64>,
    /// Free-form block label.
    pub group: String,
}

impl DesignVariable {
    pub fn new(name: impl Into<String>, options: Vec<i64>, group: impl Into<String>) -> Self {
        Self { name: name.into(), options, group: group.into() }
    }

    /// Number of options.
    pub fn arity(&self) -> usize {
        self.options.len()
    }
}

/// A controller variable and, for each of its option indices, the dependent
/// variables that are active at that option.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyRule {
    pub controller: usize,
    /// `activation[o]` lists the dependents active when the controller takes
    /// option index `o`. Dependents not listed are masked.
    pub activation: Vec<Vec<usize>>,
}

impl DependencyRule {
    /// Every variable this rule can mask, sorted.
    pub fn dependents(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.activation.iter().flatten().copied().collect();
        set.into_iter().collect()
    }
}

/// Option indices, one per design variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Genotype(pub Vec<usize>);

impl Genotype {
    pub fn new(indices: Vec<usize>) -> Self {
        Self(indices)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// Little-endian bytes of every index, used as a stable hashing key.
    pub fn key_bytes(&self) -> impl Iterator<Item = u8> + '_ {
        self.0.iter().flat_map(|&i| (i as u64).to_le_bytes())
    }
}

impl fmt::Display for Genotype {
    /// Dash-separated indices, e.g. `0-2-1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("-")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

impl FromStr for Genotype {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Genotype(Vec::new()));
        }
        s.split('-')
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::MalformedGenotype(format!("bad index `{part}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Genotype)
    }
}

/// Decoded sub-network: option values of the active variables only, in
/// variable order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubnetworkConfig {
    entries: Vec<(String, i64)>,
}

impl SubnetworkConfig {
    pub fn get(&self, name: &str) -> Option<i64> {
        self.entries.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i64)> {
        self.entries.iter().map(|(n, v)| (n.as_str(), *v))
    }
}

/// The four built-in spaces modeled on common weight-sharing super-networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinSpace {
    MobileNetV3,
    ResNet50,
    Transformer,
    Ncf,
}

impl BuiltinSpace {
    pub const ALL: [BuiltinSpace; 4] =
        [BuiltinSpace::MobileNetV3, BuiltinSpace::ResNet50, BuiltinSpace::Transformer, BuiltinSpace::Ncf];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinSpace::MobileNetV3 => "mobilenetv3",
            BuiltinSpace::ResNet50 => "resnet50",
            BuiltinSpace::Transformer => "transformer",
            BuiltinSpace::Ncf => "ncf",
        }
    }
}

impl FromStr for BuiltinSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let base = s.trim().to_ascii_lowercase();
        let base = base.strip_suffix("_like").unwrap_or(&base);
        match base {
            "mobilenetv3" | "mbv3" => Ok(BuiltinSpace::MobileNetV3),
            "resnet50" => Ok(BuiltinSpace::ResNet50),
            "transformer" => Ok(BuiltinSpace::Transformer),
            "ncf" => Ok(BuiltinSpace::Ncf),
            _ => Err(Error::UnknownSpace(s.to_string())),
        }
    }
}

/// A validated space. Rules form disjoint single-controller blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpace {
    name: String,
    variables: Vec<DesignVariable>,
    rules: Vec<DependencyRule>,
    /// Rule index owning each dependent variable.
    owner: Vec<Option<usize>>,
    /// Sorted activation lists, same shape as each rule's `activation`.
    active_sets: Vec<Vec<Vec<usize>>>,
}

impl SearchSpace {
    pub fn new(
        name: impl Into<String>,
        variables: Vec<DesignVariable>,
        rules: Vec<DependencyRule>,
    ) -> Result<Self> {
        let name = name.into();
        let n = variables.len();
        if n == 0 {
            return Err(Error::InvalidSpace("space has no variables".into()));
        }
        let mut names = BTreeSet::new();
        for v in &variables {
            if v.options.is_empty() {
                return Err(Error::InvalidSpace(format!("variable `{}` has no options", v.name)));
            }
            let distinct: BTreeSet<i64> = v.options.iter().copied().collect();
            if distinct.len() != v.options.len() {
                return Err(Error::InvalidSpace(format!("variable `{}` has duplicate options", v.name)));
            }
            if !names.insert(v.name.as_str()) {
                return Err(Error::InvalidSpace(format!("duplicate variable name `{}`", v.name)));
            }
        }

        let mut owner = vec![None; n];
        let mut controllers = BTreeSet::new();
        let mut active_sets = Vec::with_capacity(rules.len());
        for (r, rule) in rules.iter().enumerate() {
            let c = rule.controller;
            if c >= n {
                return Err(Error::InvalidSpace(format!("rule {r}: controller {c} out of range")));
            }
            if rule.activation.len() != variables[c].arity() {
                return Err(Error::InvalidSpace(format!(
                    "rule {r}: {} activation sets for a controller with {} options",
                    rule.activation.len(),
                    variables[c].arity()
                )));
            }
            if !controllers.insert(c) {
                return Err(Error::InvalidSpace(format!("variable {c} controls more than one rule")));
            }
            for d in rule.dependents() {
                if d >= n {
                    return Err(Error::InvalidSpace(format!("rule {r}: dependent {d} out of range")));
                }
                if d == c {
                    return Err(Error::InvalidSpace(format!("rule {r}: controller {c} depends on itself")));
                }
                if owner[d].is_some() {
                    return Err(Error::InvalidSpace(format!("variable {d} is a dependent of two rules")));
                }
                owner[d] = Some(r);
            }
            let sets = rule
                .activation
                .iter()
                .map(|s| {
                    let mut s = s.clone();
                    s.sort_unstable();
                    s.dedup();
                    s
                })
                .collect();
            active_sets.push(sets);
        }
        if let Some(&c) = controllers.iter().find(|&&c| owner[c].is_some()) {
            return Err(Error::InvalidSpace(format!("controller {c} is itself a dependent")));
        }

        Ok(Self { name, variables, rules, owner, active_sets })
    }

    pub fn builtin(kind: BuiltinSpace) -> Self {
        match kind {
            BuiltinSpace::MobileNetV3 => mobilenetv3(),
            BuiltinSpace::ResNet50 => resnet50(),
            BuiltinSpace::Transformer => transformer(),
            BuiltinSpace::Ncf => ncf(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[DesignVariable] {
        &self.variables
    }

    pub fn rules(&self) -> &[DependencyRule] {
        &self.rules
    }

    /// Genotype length.
    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn validate(&self, g: &Genotype) -> Result<()> {
        if g.len() != self.len() {
            return Err(Error::MalformedGenotype(format!(
                "length {} for a space with {} variables",
                g.len(),
                self.len()
            )));
        }
        for (i, (&idx, var)) in g.0.iter().zip(&self.variables).enumerate() {
            if idx >= var.arity() {
                return Err(Error::MalformedGenotype(format!(
                    "index {idx} at position {i} (`{}` has {} options)",
                    var.name,
                    var.arity()
                )));
            }
        }
        Ok(())
    }

    /// Whether variable `i` is active in `g`. `g` must be valid.
    pub fn is_active(&self, g: &Genotype, i: usize) -> bool {
        match self.owner[i] {
            None => true,
            Some(r) => {
                let choice = g.0[self.rules[r].controller];
                self.active_sets[r][choice].binary_search(&i).is_ok()
            }
        }
    }

    pub fn active_mask(&self, g: &Genotype) -> Result<Vec<bool>> {
        self.validate(g)?;
        Ok((0..self.len()).map(|i| self.is_active(g, i)).collect())
    }

    /// Draws every index independently and uniformly.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Genotype {
        Genotype(self.variables.iter().map(|v| rng.gen_range(0..v.arity())).collect())
    }

    /// Option values of the active variables.
    pub fn decode(&self, g: &Genotype) -> Result<SubnetworkConfig> {
        self.validate(g)?;
        let entries = self
            .variables
            .iter()
            .enumerate()
            .filter(|&(i, _)| self.is_active(g, i))
            .map(|(i, v)| (v.name.clone(), v.options[g.0[i]]))
            .collect();
        Ok(SubnetworkConfig { entries })
    }

    /// Sets every masked position to index 0.
    pub fn canonicalize(&self, g: &Genotype) -> Result<Genotype> {
        self.validate(g)?;
        Ok(Genotype(
            g.0.iter().enumerate().map(|(i, &idx)| if self.is_active(g, i) { idx } else { 0 }).collect(),
        ))
    }

    pub fn is_canonical(&self, g: &Genotype) -> bool {
        self.validate(g).is_ok()
            && g.0.iter().enumerate().all(|(i, &idx)| idx == 0 || self.is_active(g, i))
    }

    /// Exact number of distinct decoded configurations.
    pub fn cardinality(&self) -> BigUint {
        let mut total = BigUint::from(1u32);
        for (i, v) in self.variables.iter().enumerate() {
            let controls = self.rules.iter().any(|r| r.controller == i);
            if self.owner[i].is_none() && !controls {
                total *= v.arity() as u64;
            }
        }
        for sets in &self.active_sets {
            let mut block = BigUint::from(0u32);
            for set in sets {
                let mut term = BigUint::from(1u32);
                for &d in set {
                    term *= self.variables[d].arity() as u64;
                }
                block += term;
            }
            total *= block;
        }
        total
    }
}

/// Nearest power of ten, `round(log10(n))`, of a positive integer (0 for 0).
pub fn order_of_magnitude(n: &BigUint) -> usize {
    let digits = n.to_str_radix(10);
    let lead = &digits[..digits.len().min(15)];
    let mantissa: f64 = lead.parse::<f64>().unwrap_or(0.0) / libm::pow(10.0, (lead.len() - 1) as f64);
    if mantissa <= 0.0 {
        return 0;
    }
    let log10 = (digits.len() - 1) as f64 + libm::log10(mantissa);
    libm::round(log10) as usize
}

fn var(name: String, options: &[i64], group: &str) -> DesignVariable {
    DesignVariable::new(name, options.to_vec(), group)
}

fn mobilenetv3() -> SearchSpace {
    const DEPTHS: [i64; 3] = [2, 3, 4];
    let mut variables = Vec::with_capacity(45);
    let mut rules = Vec::with_capacity(5);
    for b in 1..=5 {
        let group = format!("block{b}");
        let controller = variables.len();
        variables.push(var(format!("depth_{b}"), &DEPTHS, &group));
        let mut slots = Vec::with_capacity(4);
        for l in 1..=4 {
            let k = variables.len();
            variables.push(var(format!("kernel_{b}_{l}"), &[3, 5, 7], &group));
            variables.push(var(format!("expand_{b}_{l}"), &[3, 4, 6], &group));
            slots.push([k, k + 1]);
        }
        let activation = DEPTHS
            .iter()
            .map(|&d| slots[..d as usize].iter().flatten().copied().collect())
            .collect();
        rules.push(DependencyRule { controller, activation });
    }
    SearchSpace::new("mobilenetv3_like", variables, rules).expect("builtin space is valid")
}

fn resnet50() -> SearchSpace {
    let mut variables = Vec::with_capacity(36);
    for b in 1..=5 {
        variables.push(var(format!("depth_{b}"), &[0, 1, 2], "depth"));
    }
    // Expansion ratios 0.20/0.25/0.35 in permille.
    for l in 1..=25 {
        variables.push(var(format!("expand_{l}"), &[200, 250, 350], "expand"));
    }
    // Width multipliers 0.65/0.8/1.0 in percent.
    for s in 1..=6 {
        variables.push(var(format!("width_{s}"), &[65, 80, 100], "width"));
    }
    SearchSpace::new("resnet50_like", variables, Vec::new()).expect("builtin space is valid")
}

fn transformer() -> SearchSpace {
    const LAYERS: usize = 6;
    let mut variables = Vec::with_capacity(40);
    variables.push(var("encoder_embed_dim".into(), &[512, 640], "encoder"));
    variables.push(var("decoder_embed_dim".into(), &[512, 640], "decoder"));
    for l in 1..=LAYERS {
        variables.push(var(format!("encoder_ffn_dim_{l}"), &[1024, 2048, 3072], "encoder"));
    }
    for l in 1..=LAYERS {
        variables.push(var(format!("encoder_heads_{l}"), &[4, 8], "encoder"));
    }
    variables.push(var("encoder_layers".into(), &[6], "encoder"));
    let controller = variables.len();
    variables.push(var("decoder_layers".into(), &[1, 2, 3, 4, 5, 6], "decoder"));

    let mut per_layer: Vec<Vec<usize>> = vec![Vec::new(); LAYERS];
    let families: [(&str, &[i64]); 4] = [
        ("decoder_ffn_dim", &[1024, 2048, 3072]),
        ("decoder_self_heads", &[4, 8]),
        ("decoder_cross_heads", &[4, 8]),
        ("decoder_arbitrary_attn", &[1, 2, 3]),
    ];
    for (family, options) in families {
        for (l, slot) in per_layer.iter_mut().enumerate() {
            slot.push(variables.len());
            variables.push(var(format!("{family}_{}", l + 1), options, "decoder"));
        }
    }
    let activation = (1..=LAYERS).map(|d| per_layer[..d].iter().flatten().copied().collect()).collect();
    SearchSpace::new("transformer_like", variables, vec![DependencyRule { controller, activation }])
        .expect("builtin space is valid")
}

fn ncf() -> SearchSpace {
    const EMBED: [i64; 5] = [8, 16, 32, 64, 128];
    let mut variables = vec![
        var("gmf_embed_dim".into(), &EMBED, "gmf"),
        var("mlp_embed_dim".into(), &EMBED, "mlp"),
        var("mlp_layers".into(), &[1, 2, 3, 4, 5, 6], "mlp"),
    ];
    let first = variables.len();
    for l in 1..=6 {
        variables.push(var(format!("mlp_hidden_{l}"), &[8, 16, 32, 64, 128, 256, 512, 1024], "mlp"));
    }
    let activation = (1..=6).map(|d| (first..first + d).collect()).collect();
    SearchSpace::new("ncf_like", variables, vec![DependencyRule { controller: 2, activation }])
        .expect("builtin space is valid")
}
