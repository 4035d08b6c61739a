//! Parser for contamination-mixture expressions like
//! `0.9*normal(0,1)+0.1*normal(-10,1)`.
//!
//! Grammar: `term (+ term)*` with `term = [weight *] family(param, param)`
//! and `family ∈ {normal, weibull}`. An omitted weight means 1. Whitespace
//! is ignored everywhere.

use dpd_core::models::{NormalModel, ParametricModel, WeibullModel};
use dpd_core::simulation::MixtureScenario;

static NORMAL: NormalModel = NormalModel;
static WEIBULL: WeibullModel = WeibullModel;

/// One parsed mixture component.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    /// `normal` or `weibull`.
    pub family: String,
    /// The component's parameter vector.
    pub theta: Vec<f64>,
    /// Its mixing weight.
    pub weight: f64,
}

impl Component {
    /// The model object backing this component.
    pub fn model(&self) -> &'static dyn ParametricModel {
        if self.family == "weibull" {
            &WEIBULL
        } else {
            &NORMAL
        }
    }
}

/// Parse the mixture expression into components.
///
/// # Errors
/// A human-readable message pointing at the offending term.
pub fn parse(expression: &str) -> Result<Vec<Component>, String> {
    let compact: String = expression.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err("empty scenario expression".to_string());
    }
    // Split on '+' at paren depth zero, so negative parameters survive.
    let mut terms = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in compact.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            '+' if depth == 0 => {
                terms.push(&compact[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    terms.push(&compact[start..]);

    let mut components = Vec::new();
    for term in terms {
        components.push(parse_term(term)?);
    }
    Ok(components)
}

fn parse_term(term: &str) -> Result<Component, String> {
    let (weight, call) = match term.split_once('*') {
        Some((w, rest)) => {
            let weight: f64 = w
                .parse()
                .map_err(|_| format!("bad weight '{w}' in scenario term '{term}'"))?;
            (weight, rest)
        }
        None => (1.0, term),
    };
    let open = call
        .find('(')
        .ok_or_else(|| format!("scenario term '{term}' is missing '(params)'"))?;
    if !call.ends_with(')') {
        return Err(format!("scenario term '{term}' is missing the closing ')'"));
    }
    let family = &call[..open];
    if family != "normal" && family != "weibull" {
        return Err(format!("unknown family '{family}' (use normal or weibull)"));
    }
    let args = &call[open + 1..call.len() - 1];
    let theta: Vec<f64> = args
        .split(',')
        .map(|a| a.parse::<f64>().map_err(|_| format!("bad parameter '{a}' in '{term}'")))
        .collect::<Result<_, _>>()?;
    if theta.len() != 2 {
        return Err(format!("'{term}': expected two parameters, got {}", theta.len()));
    }
    Ok(Component { family: family.to_string(), theta, weight })
}

/// Assemble the parsed components into a core [`MixtureScenario`], which
/// enforces the weight and domain invariants.
///
/// # Errors
/// The core's validation message (weights not summing to one, parameters
/// outside the family domain, …).
pub fn build(components: &[Component], label: &str) -> Result<MixtureScenario<'static>, String> {
    let pairs: Vec<(&'static dyn ParametricModel, Vec<f64>)> =
        components.iter().map(|c| (c.model(), c.theta.clone())).collect();
    let weights: Vec<f64> = components.iter().map(|c| c.weight).collect();
    MixtureScenario::new(pairs, weights, label.to_string()).map_err(|e| e.to_string())
}
