//! Argument parsing shared by the commands.

use std::fs;

use clap::Args;
use depbound::kernels::{self, Kernel};
use depbound::measures::exact::parse_f64;
use depbound::scenarios::{PRule, ProcessSpec};
use depbound::{Dist, Error, Result};
use serde::Serialize;

/// `inf`, `infinity` or a number such as `2` or `3/2`.
pub fn alpha(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "infinity" | "Inf" | "\u{221e}" => Ok(f64::INFINITY),
        other => parse_f64(other),
    }
}

/// Order of the bound: a fixed value, or `opt` for the best on the built-in grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSpec {
    Fixed(f64),
    Opt,
}

pub fn alpha_spec(s: &str) -> Result<AlphaSpec> {
    if s.trim() == "opt" {
        Ok(AlphaSpec::Opt)
    } else {
        alpha(s).map(AlphaSpec::Fixed)
    }
}

/// Deviation: a number, `sqrt_n`, or `<k>*sqrt_n`.
pub fn deviation(s: &str, n: usize) -> Result<f64> {
    let s = s.trim();
    let root = (n as f64).sqrt();
    if s == "sqrt_n" {
        return Ok(root);
    }
    if let Some(k) = s.strip_suffix("*sqrt_n") {
        return Ok(parse_f64(k)? * root);
    }
    parse_f64(s)
}

pub fn list(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect()
}

pub fn f64_list(s: &str) -> Result<Vec<f64>> {
    list(s).into_iter().map(parse_f64).collect()
}

/// `flip:<p>`, `stay:<p>`, `rows:<r_0>;<r_1>;...` on states `0..k`, or a CSV/JSON file.
pub fn kernel(spec: &str) -> Result<Kernel> {
    if let Some(p) = spec.strip_prefix("flip:") {
        return Kernel::binary_flip(parse_f64(p)?);
    }
    if let Some(p) = spec.strip_prefix("stay:") {
        return Kernel::binary_stay(parse_f64(p)?);
    }
    if let Some(rows) = spec.strip_prefix("rows:") {
        let p = rows.split(';').map(f64_list).collect::<Result<Vec<_>>>()?;
        return Kernel::from_rows((0..p.len() as i64).collect(), p);
    }
    let text = fs::read_to_string(spec)?;
    if spec.ends_with(".json") {
        kernels::kernel_from_json(&text)
    } else {
        kernels::kernel_from_csv(&text)
    }
}

/// Comma list of masses on the kernel's states; `None` gives the stationary law.
pub fn law_on(k: &Kernel, spec: Option<&str>) -> Result<Dist> {
    match spec {
        None => kernels::stationary_dist(k),
        Some(s) => Dist::from_probs(k.as_matrix()?.states.clone(), &f64_list(s)?),
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ScenarioArgs {
    /// binary | ssrw | nonmarkov | coins | chain
    #[arg(long, default_value = "binary")]
    pub scenario: String,
    /// Flip probability of the binary chain.
    #[arg(long, default_value = "1/4")]
    pub lambda: String,
    /// Kernel of the `chain` scenario: flip:<p>, stay:<p>, rows:<r0>;<r1>;..., or a file.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Initial law of the `chain` scenario.
    #[arg(long)]
    pub init: Option<String>,
    /// Weights p_0,p_1,... of the `nonmarkov` scenario.
    #[arg(long)]
    pub weights: Option<String>,
}

/// A process together with the flip probability when it is the binary chain.
pub struct Scenario {
    pub name: String,
    pub proc: ProcessSpec,
    pub lambda: Option<f64>,
}

impl ScenarioArgs {
    pub fn build(&self) -> Result<Scenario> {
        let name = self.scenario.clone();
        let (proc, lambda) = match name.as_str() {
            "binary" => {
                let l = parse_f64(&self.lambda)?;
                (ProcessSpec::binary_chain(l)?, Some(l))
            }
            "ssrw" => (ProcessSpec::Ssrw, None),
            "nonmarkov" => {
                let rule = match &self.weights {
                    None => PRule::Geometric,
                    Some(w) => PRule::Custom(f64_list(w)?),
                };
                rule.validate()?;
                (ProcessSpec::NonMarkovBinary { rule }, None)
            }
            "coins" => (ProcessSpec::fair_coins(), None),
            "chain" => {
                let spec = self
                    .kernel
                    .as_deref()
                    .ok_or_else(|| Error::InvalidParam("the chain scenario needs --kernel".into()))?;
                let k = kernel(spec)?;
                let init = law_on(&k, self.init.as_deref())?;
                (ProcessSpec::HomogeneousChain { init, kernel: k }, None)
            }
            other => return Err(Error::InvalidParam(format!("unknown scenario {other:?}"))),
        };
        Ok(Scenario { name, proc, lambda })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deviations() {
        assert_eq!(deviation("sqrt_n", 100).unwrap(), 10.0);
        assert_eq!(deviation("1/2*sqrt_n", 100).unwrap(), 5.0);
        assert_eq!(deviation("0.25", 7).unwrap(), 0.25);
        assert!(deviation("x", 7).is_err());
    }

    #[test]
    fn orders() {
        assert_eq!(alpha("inf").unwrap(), f64::INFINITY);
        assert_eq!(alpha("3/2").unwrap(), 1.5);
        assert_eq!(alpha_spec("opt").unwrap(), AlphaSpec::Opt);
    }
}
