//! Reaction networks: text DSL, mass-action right-hand sides, and structural
//! checks (quasi-positivity, dissipation class, conservation laws, complex
//! balance).
//!
//! A network is a species list plus reactions `alpha -> beta @ k` with
//! nonnegative stoichiometric vectors and a positive rate constant. The
//! mass-action field is
//!
//! ```text
//! f_i(u) = sum_r k_r (beta_r^i - alpha_r^i) u^{alpha_r},
//! u^{alpha} = prod_i u_i^{alpha^i},  with 0^0 = 1.
//! ```

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One reaction: stoichiometric vectors over the owning network's species
/// order, plus a positive rate constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub reactants: Vec<f64>,
    pub products: Vec<f64>,
    pub rate: f64,
}

/// A finite mass-action reaction network.
///
/// Invariants, enforced at construction: every stoichiometric entry is 0 or
/// lies in `[1, inf)`; every rate is finite and positive; no reaction has
/// `reactants == products`; all vectors have the species list's length.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork {
    species: Vec<String>,
    reactions: Vec<Reaction>,
}

/// Sum classification of `sum_i f_i` by per-reaction stoichiometric sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissipationClass {
    /// Every reaction preserves total mass: `sum_i (beta - alpha)_i = 0`.
    Conservative,
    /// Every reaction has `sum_i (beta - alpha)_i <= 0`, some strictly.
    Dissipative,
    /// Some reaction creates net mass.
    Indefinite,
}

/// Errors from network construction and evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum NetworkError {
    DimensionMismatch { expected: usize, got: usize },
    FractionalCoefficient(f64),
    NonpositiveRate(f64),
    TrivialReaction,
    EmptyNetwork,
    NonpositiveState,
    UnknownBuiltin(String),
}

impl fmt::Display for NetworkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkError::DimensionMismatch { expected, got } => {
                write!(f, "expected {expected} species values, got {got}")
            }
            NetworkError::FractionalCoefficient(c) => {
                write!(f, "stoichiometric coefficient {c} lies in (0,1)")
            }
            NetworkError::NonpositiveRate(k) => write!(f, "rate constant {k} is not positive"),
            NetworkError::TrivialReaction => write!(f, "reaction has identical sides"),
            NetworkError::EmptyNetwork => write!(f, "network has no reactions"),
            NetworkError::NonpositiveState => write!(f, "state must be positive componentwise"),
            NetworkError::UnknownBuiltin(name) => write!(f, "unknown builtin nonlinearity {name:?}"),
        }
    }
}

impl std::error::Error for NetworkError {}

/// Parse failure, carrying the 1-based source line.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Syntax(String),
    NonpositiveRate(f64),
    FractionalCoefficient(f64),
    TrivialReaction,
    EmptyNetwork,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax(msg) => write!(f, "line {}: syntax error: {msg}", self.line),
            ParseErrorKind::NonpositiveRate(k) => {
                write!(f, "line {}: rate constant {k} is not positive", self.line)
            }
            ParseErrorKind::FractionalCoefficient(c) => write!(
                f,
                "line {}: stoichiometric coefficient {c} lies in (0,1)",
                self.line
            ),
            ParseErrorKind::TrivialReaction => {
                write!(f, "line {}: reaction has identical sides", self.line)
            }
            ParseErrorKind::EmptyNetwork => write!(f, "input declares no reactions"),
        }
    }
}

impl std::error::Error for ParseError {}

/// Evaluate `u^alpha` with the convention `0^0 = 1`; fractional exponents
/// evaluate at `max(u_i, 0)` so states at the positivity tolerance floor
/// stay finite.
pub fn monomial(u: &[f64], alpha: &[f64]) -> f64 {
    let mut prod = 1.0;
    for (&x, &a) in u.iter().zip(alpha) {
        if a == 0.0 {
            continue;
        }
        if a.fract() == 0.0 && a.abs() <= i32::MAX as f64 {
            prod *= x.powi(a as i32);
        } else {
            prod *= x.max(0.0).powf(a);
        }
    }
    prod
}

impl ReactionNetwork {
    /// Build a network, enforcing the structural invariants.
    pub fn new(species: Vec<String>, reactions: Vec<Reaction>) -> Result<Self, NetworkError> {
        if reactions.is_empty() || species.is_empty() {
            return Err(NetworkError::EmptyNetwork);
        }
        let m = species.len();
        for r in &reactions {
            if r.reactants.len() != m {
                return Err(NetworkError::DimensionMismatch {
                    expected: m,
                    got: r.reactants.len(),
                });
            }
            if r.products.len() != m {
                return Err(NetworkError::DimensionMismatch {
                    expected: m,
                    got: r.products.len(),
                });
            }
            for &c in r.reactants.iter().chain(r.products.iter()) {
                if !c.is_finite() || c < 0.0 || (c > 0.0 && c < 1.0) {
                    return Err(NetworkError::FractionalCoefficient(c));
                }
            }
            if !(r.rate > 0.0) || !r.rate.is_finite() {
                return Err(NetworkError::NonpositiveRate(r.rate));
            }
            if r.reactants == r.products {
                return Err(NetworkError::TrivialReaction);
            }
        }
        Ok(ReactionNetwork { species, reactions })
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn species_count(&self) -> usize {
        self.species.len()
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    /// Mass-action right-hand side at a state.
    pub fn evaluate_f(&self, u: &[f64]) -> Result<Vec<f64>, NetworkError> {
        if u.len() != self.species.len() {
            return Err(NetworkError::DimensionMismatch {
                expected: self.species.len(),
                got: u.len(),
            });
        }
        let mut out = vec![0.0; u.len()];
        self.evaluate_f_into(u, &mut out);
        Ok(out)
    }

    /// In-place variant of [`evaluate_f`](Self::evaluate_f) for hot loops;
    /// slice lengths must already match the species count.
    pub fn evaluate_f_into(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.species.len());
        debug_assert_eq!(out.len(), self.species.len());
        out.fill(0.0);
        for r in &self.reactions {
            let flow = r.rate * monomial(u, &r.reactants);
            for i in 0..out.len() {
                out[i] += flow * (r.products[i] - r.reactants[i]);
            }
        }
    }

    /// Classify `sum_i f_i` by the per-reaction sums `sum_i (beta - alpha)_i`.
    pub fn dissipation_class(&self) -> DissipationClass {
        let tol = 1e-12;
        let sums: Vec<f64> = self
            .reactions
            .iter()
            .map(|r| {
                r.products.iter().sum::<f64>() - r.reactants.iter().sum::<f64>()
            })
            .collect();
        if sums.iter().all(|s| s.abs() <= tol) {
            DissipationClass::Conservative
        } else if sums.iter().all(|&s| s <= tol) {
            DissipationClass::Dissipative
        } else {
            DissipationClass::Indefinite
        }
    }

    /// Polynomial growth order `mu = max_r max(|alpha_r|_1, |beta_r|_1)`.
    pub fn growth_exponent(&self) -> f64 {
        self.reactions
            .iter()
            .map(|r| {
                let sa: f64 = r.reactants.iter().sum();
                let sb: f64 = r.products.iter().sum();
                sa.max(sb)
            })
            .fold(0.0, f64::max)
    }

    /// Orthonormal basis (rows) of the left kernel of the stoichiometric
    /// matrix whose columns are `beta_r - alpha_r`; empty when the reaction
    /// vectors span all of species space.
    ///
    /// Rows are sign-normalized (first entry with magnitude above 1e-9 is
    /// positive) and ordered deterministically.
    pub fn conservation_laws(&self) -> Vec<Vec<f64>> {
        let m = self.species.len();
        let nr = self.reactions.len();
        let s = DMatrix::from_fn(m, nr, |i, r| {
            self.reactions[r].products[i] - self.reactions[r].reactants[i]
        });
        let gram = &s * s.transpose();
        let eig = SymmetricEigen::new(gram);
        let lam_max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
        let tol = 1e-10 * lam_max.max(1e-30);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (j, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam <= tol {
                let mut v: Vec<f64> = eig.eigenvectors.column(j).iter().copied().collect();
                if let Some(first) = v.iter().find(|x| x.abs() > 1e-9) {
                    if *first < 0.0 {
                        for x in v.iter_mut() {
                            *x = -*x;
                        }
                    }
                }
                rows.push(v);
            }
        }
        rows.sort_by(|a, b| {
            let fa = a.iter().position(|x| x.abs() > 1e-9).unwrap_or(a.len());
            let fb = b.iter().position(|x| x.abs() > 1e-9).unwrap_or(b.len());
            fa.cmp(&fb).then_with(|| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal))
                    .find(|o| *o != std::cmp::Ordering::Equal)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        });
        rows
    }

    /// Distinct complexes (stoichiometric vectors appearing as a reactant or
    /// product side), in first-appearance order. Complexes are compared by
    /// exact floating-point equality.
    pub fn complexes(&self) -> Vec<Vec<f64>> {
        let mut seen: Vec<Vec<f64>> = Vec::new();
        for r in &self.reactions {
            for side in [&r.reactants, &r.products] {
                if !seen.iter().any(|c| c == side) {
                    seen.push(side.clone());
                }
            }
        }
        seen
    }

    /// Net flow residual at every complex for a positive state.
    ///
    /// At a complex `y` the outflow is the rate sum over reactions with
    /// reactant side `y`, the inflow the rate sum over reactions with
    /// product side `y`; both flows are mass-action rates `k_r u^{alpha_r}`.
    /// The state is balanced when every residual is at most `1e-12` times
    /// the largest total flow through a complex.
    pub fn check_complex_balance(&self, u: &[f64]) -> Result<ComplexBalanceReport, NetworkError> {
        if u.len() != self.species.len() {
            return Err(NetworkError::DimensionMismatch {
                expected: self.species.len(),
                got: u.len(),
            });
        }
        if u.iter().any(|&x| !(x > 0.0)) {
            return Err(NetworkError::NonpositiveState);
        }
        let complexes = self.complexes();
        let mut residuals = vec![0.0; complexes.len()];
        let mut scale = 0.0f64;
        for (ci, y) in complexes.iter().enumerate() {
            let mut outflow = 0.0;
            let mut inflow = 0.0;
            for r in &self.reactions {
                let flow = r.rate * monomial(u, &r.reactants);
                if &r.reactants == y {
                    outflow += flow;
                }
                if &r.products == y {
                    inflow += flow;
                }
            }
            residuals[ci] = outflow - inflow;
            scale = scale.max(outflow + inflow);
        }
        let balanced = residuals.iter().all(|r| r.abs() <= 1e-12 * scale);
        Ok(ComplexBalanceReport {
            complexes,
            residuals,
            scale,
            balanced,
        })
    }

    /// Regenerate DSL text, one reaction per line. Parsing the output yields
    /// a structurally identical network.
    pub fn to_dsl(&self) -> String {
        let mut out = String::new();
        for r in &self.reactions {
            let side = |v: &[f64]| -> String {
                let terms: Vec<String> = v
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0.0)
                    .map(|(i, &c)| {
                        if c == 1.0 {
                            self.species[i].clone()
                        } else {
                            format!("{} {}", c, self.species[i])
                        }
                    })
                    .collect();
                if terms.is_empty() {
                    "0".to_string()
                } else {
                    terms.join(" + ")
                }
            };
            out.push_str(&format!(
                "{} -> {} @ {}\n",
                side(&r.reactants),
                side(&r.products),
                r.rate
            ));
        }
        out
    }
}

/// Residuals of the complex-balance condition at a state.
#[derive(Debug, Clone)]
pub struct ComplexBalanceReport {
    pub complexes: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub scale: f64,
    pub balanced: bool,
}

/// Closed-form Lyapunov diagnostic a builtin nonlinearity declares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LyapunovHint {
    /// `0.5 * ||u_quadratic||_2^2 + ||u_linear||_1` by grid quadrature.
    HalfSquarePlusMass { quadratic: usize, linear: usize },
}

/// A hand-written right-hand side, used where mass action does not apply.
#[derive(Clone)]
pub struct BuiltinNonlinearity {
    name: String,
    species: Vec<String>,
    eval: Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
    lyapunov: Option<LyapunovHint>,
}

impl fmt::Debug for BuiltinNonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BuiltinNonlinearity")
            .field("name", &self.name)
            .field("species", &self.species)
            .field("lyapunov", &self.lyapunov)
            .finish()
    }
}

impl BuiltinNonlinearity {
    pub fn new<F>(name: &str, species: &[&str], eval: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        BuiltinNonlinearity {
            name: name.to_string(),
            species: species.iter().map(|s| s.to_string()).collect(),
            eval: Arc::new(eval),
            lyapunov: None,
        }
    }

    pub fn with_lyapunov(mut self, hint: LyapunovHint) -> Self {
        self.lyapunov = Some(hint);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

/// Catalog of shipped builtin nonlinearities.
///
/// `"remark-1-4"`: two species with
/// `f1 = (-u + 2v) e^v - u v e^{u^2}`, `f2 = -v^2 e^v + u^2 v e^{u^2}`;
/// quasi-positive, mass-dissipating in the functional
/// `0.5||u||_2^2 + ||v||_1`, super-polynomial growth.
pub fn builtin_nonlinearity(name: &str) -> Result<BuiltinNonlinearity, NetworkError> {
    match name {
        "remark-1-4" => Ok(BuiltinNonlinearity::new("remark-1-4", &["u", "v"], |s, out| {
            let (u, v) = (s[0], s[1]);
            let ev = v.exp();
            let eu2 = (u * u).exp();
            out[0] = (-u + 2.0 * v) * ev - u * v * eu2;
            out[1] = -v * v * ev + u * u * v * eu2;
        })
        .with_lyapunov(LyapunovHint::HalfSquarePlusMass {
            quadratic: 0,
            linear: 1,
        })),
        other => Err(NetworkError::UnknownBuiltin(other.to_string())),
    }
}

/// Right-hand side of the reaction part: mass action from a network, or a
/// builtin closed form.
#[derive(Debug, Clone)]
pub enum NonlinearitySpec {
    MassAction(ReactionNetwork),
    Builtin(BuiltinNonlinearity),
}

impl NonlinearitySpec {
    pub fn species_count(&self) -> usize {
        match self {
            NonlinearitySpec::MassAction(n) => n.species_count(),
            NonlinearitySpec::Builtin(b) => b.species.len(),
        }
    }

    pub fn species(&self) -> Vec<String> {
        match self {
            NonlinearitySpec::MassAction(n) => n.species().to_vec(),
            NonlinearitySpec::Builtin(b) => b.species.clone(),
        }
    }

    pub fn is_mass_action(&self) -> bool {
        matches!(self, NonlinearitySpec::MassAction(_))
    }

    pub fn network(&self) -> Option<&ReactionNetwork> {
        match self {
            NonlinearitySpec::MassAction(n) => Some(n),
            NonlinearitySpec::Builtin(_) => None,
        }
    }

    pub fn lyapunov_hint(&self) -> Option<LyapunovHint> {
        match self {
            NonlinearitySpec::MassAction(_) => None,
            NonlinearitySpec::Builtin(b) => b.lyapunov,
        }
    }

    pub fn evaluate_into(&self, u: &[f64], out: &mut [f64]) {
        match self {
            NonlinearitySpec::MassAction(n) => n.evaluate_f_into(u, out),
            NonlinearitySpec::Builtin(b) => (b.eval)(u, out),
        }
    }
}

/// Outcome of the quasi-positivity sampling check: `f_i(u) >= 0` whenever
/// `u >= 0` with `u_i = 0`. Mass action satisfies this structurally (every
/// monomial surviving `u_i = 0` has `alpha_r^i = 0`, hence a nonnegative
/// coefficient `beta_r^i`); sampling doubles as a defense for builtins.
#[derive(Debug, Clone)]
pub struct QuasiPositivityReport {
    pub passed: bool,
    pub samples: usize,
    pub witness: Option<(usize, Vec<f64>, f64)>,
}

pub fn check_quasi_positivity(
    spec: &NonlinearitySpec,
    samples: usize,
    seed: u64,
) -> QuasiPositivityReport {
    let m = spec.species_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = vec![0.0; m];
    let mut f = vec![0.0; m];
    for s in 0..samples {
        for x in u.iter_mut() {
            *x = rng.random_range(0.0..10.0);
        }
        let i = s % m;
        u[i] = 0.0;
        spec.evaluate_into(&u, &mut f);
        if f[i] < -1e-12 {
            return QuasiPositivityReport {
                passed: false,
                samples: s + 1,
                witness: Some((i, u.clone(), f[i])),
            };
        }
    }
    QuasiPositivityReport {
        passed: true,
        samples,
        witness: None,
    }
}

/// Parse the reaction DSL.
///
/// Grammar, one reaction per line: `a1 S1 + a2 S2 -> b1 S1 + ... @ k`, or
/// `... <-> ... @ kf, kb` which expands to the forward and backward
/// reactions. Blank lines and `#` comments are allowed; coefficients
/// default to 1; an empty side must be written as a literal `0`.
pub fn parse_network(text: &str) -> Result<ReactionNetwork, ParseError> {
    let mut species: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    // (sparse reactants, sparse products, rate, source line)
    let mut raw: Vec<(Vec<(usize, f64)>, Vec<(usize, f64)>, f64, usize)> = Vec::new();

    for (lineno, raw_line) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let syntax = |msg: &str| ParseError {
            line,
            kind: ParseErrorKind::Syntax(msg.to_string()),
        };

        let (lhs_rhs, rates_str) = match content.split_once('@') {
            Some(parts) => parts,
            None => return Err(syntax("missing `@ rate`")),
        };
        let (reversible, lhs, rhs) = if let Some((l, r)) = lhs_rhs.split_once("<->") {
            (true, l, r)
        } else if let Some((l, r)) = lhs_rhs.split_once("->") {
            (false, l, r)
        } else {
            return Err(syntax("missing `->` or `<->`"));
        };

        let rates: Vec<&str> = rates_str.split(',').map(str::trim).collect();
        let expected_rates = if reversible { 2 } else { 1 };
        if rates.len() != expected_rates {
            return Err(syntax(if reversible {
                "reversible reaction needs `@ kf, kb`"
            } else {
                "expected exactly one rate"
            }));
        }
        let mut ks = Vec::with_capacity(expected_rates);
        for rs in &rates {
            let k: f64 = rs
                .parse()
                .map_err(|_| syntax(&format!("cannot parse rate {rs:?}")))?;
            if !k.is_finite() || k <= 0.0 {
                return Err(ParseError {
                    line,
                    kind: ParseErrorKind::NonpositiveRate(k),
                });
            }
            ks.push(k);
        }

        let mut parse_side = |side: &str| -> Result<Vec<(usize, f64)>, ParseError> {
            let side = side.trim();
            if side.is_empty() {
                return Err(syntax("empty side; write an explicit `0`"));
            }
            if side == "0" {
                return Ok(Vec::new());
            }
            let mut acc: HashMap<usize, f64> = HashMap::new();
            for term in side.split('+') {
                let term = term.trim();
                if term.is_empty() {
                    return Err(syntax("empty term between `+` signs"));
                }
                let split_at = term
                    .char_indices()
                    .find(|(_, c)| !(c.is_ascii_digit() || *c == '.'))
                    .map(|(i, _)| i)
                    .unwrap_or(term.len());
                let (num, rest) = term.split_at(split_at);
                let coef = if num.is_empty() {
                    1.0
                } else {
                    num.parse::<f64>()
                        .map_err(|_| syntax(&format!("cannot parse coefficient {num:?}")))?
                };
                let name = rest.trim();
                if name.is_empty() {
                    return Err(syntax(&format!("term {term:?} has no species name")));
                }
                let mut chars = name.chars();
                let head = chars.next().unwrap();
                if !(head.is_ascii_alphabetic() || head == '_')
                    || !chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
                {
                    return Err(syntax(&format!("invalid species name {name:?}")));
                }
                let idx = *index.entry(name.to_string()).or_insert_with(|| {
                    species.push(name.to_string());
                    species.len() - 1
                });
                *acc.entry(idx).or_insert(0.0) += coef;
            }
            let mut entries: Vec<(usize, f64)> = acc.into_iter().collect();
            entries.sort_by_key(|(i, _)| *i);
            for &(_, c) in &entries {
                if !c.is_finite() || (c > 0.0 && c < 1.0) {
                    return Err(ParseError {
                        line,
                        kind: ParseErrorKind::FractionalCoefficient(c),
                    });
                }
            }
            Ok(entries)
        };

        let left = parse_side(lhs)?;
        let right = parse_side(rhs)?;
        if reversible {
            raw.push((left.clone(), right.clone(), ks[0], line));
            raw.push((right, left, ks[1], line));
        } else {
            raw.push((left, right, ks[0], line));
        }
    }

    if raw.is_empty() {
        return Err(ParseError {
            line: 0,
            kind: ParseErrorKind::EmptyNetwork,
        });
    }

    let m = species.len();
    let mut reactions = Vec::with_capacity(raw.len());
    for (left, right, k, line) in raw {
        let mut alpha = vec![0.0; m];
        let mut beta = vec![0.0; m];
        for (i, c) in left {
            alpha[i] = c;
        }
        for (i, c) in right {
            beta[i] = c;
        }
        if alpha == beta {
            return Err(ParseError {
                line,
                kind: ParseErrorKind::TrivialReaction,
            });
        }
        reactions.push(Reaction {
            reactants: alpha,
            products: beta,
            rate: k,
        });
    }

    ReactionNetwork::new(species, reactions).map_err(|e| ParseError {
        line: 0,
        kind: ParseErrorKind::Syntax(e.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn net(text: &str) -> ReactionNetwork {
        parse_network(text).expect("parse")
    }

    #[test]
    fn parses_single_irreversible_reaction() {
        let n = net("A + B -> C @ 2.5");
        assert_eq!(n.species(), &["A", "B", "C"]);
        assert_eq!(n.reactions().len(), 1);
        let r = &n.reactions()[0];
        assert_eq!(r.reactants, vec![1.0, 1.0, 0.0]);
        assert_eq!(r.products, vec![0.0, 0.0, 1.0]);
        assert_eq!(r.rate, 2.5);
    }

    #[test]
    fn expands_reversible_reaction() {
        let n = net("A + B <-> 2 B @ 1.0, 0.5");
        assert_eq!(n.species(), &["A", "B"]);
        assert_eq!(n.reactions().len(), 2);
        assert_eq!(n.reactions()[0].reactants, vec![1.0, 1.0]);
        assert_eq!(n.reactions()[0].products, vec![0.0, 2.0]);
        assert_eq!(n.reactions()[0].rate, 1.0);
        assert_eq!(n.reactions()[1].reactants, vec![0.0, 2.0]);
        assert_eq!(n.reactions()[1].products, vec![1.0, 1.0]);
        assert_eq!(n.reactions()[1].rate, 0.5);
    }

    #[test]
    fn rejects_empty_product_side_without_zero() {
        let err = parse_network("A -> @ 1.0").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn accepts_explicit_empty_complex() {
        let n = net("A -> 0 @ 1.0");
        assert_eq!(n.reactions()[0].products, vec![0.0]);
        let f = n.evaluate_f(&[3.0]).unwrap();
        assert_eq!(f, vec![-3.0]);
    }

    #[test]
    fn rejects_nonpositive_rate_with_line() {
        let err = parse_network("A -> B @ 1.0\nB -> A @ -2.0").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.kind, ParseErrorKind::NonpositiveRate(-2.0));
    }

    #[test]
    fn rejects_fractional_coefficient() {
        let err = parse_network("0.5 A -> B @ 1.0").unwrap_err();
        assert_eq!(err.line, 1);
        assert_eq!(err.kind, ParseErrorKind::FractionalCoefficient(0.5));
    }

    #[test]
    fn rejects_trivial_reaction() {
        let err = parse_network("A -> A @ 1.0").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::TrivialReaction);
    }

    #[test]
    fn rejects_comment_only_input() {
        let err = parse_network("# nothing here\n\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::EmptyNetwork);
    }

    #[test]
    fn allows_comments_blank_lines_and_glued_coefficients() {
        let n = net("# cycle\nA -> B @ 1\n\nB -> C @ 1 # middle\nC -> 2A + 0 B @ 0.5");
        assert_eq!(n.species(), &["A", "B", "C"]);
        assert_eq!(n.reactions().len(), 3);
        assert_eq!(n.reactions()[2].products, vec![2.0, 0.0, 0.0]);
    }

    #[test]
    fn evaluates_mass_action_field() {
        let n = net("A + B -> C @ 2.5");
        let f = n.evaluate_f(&[2.0, 3.0, 0.0]).unwrap();
        assert_eq!(f, vec![-15.0, -15.0, 15.0]);
    }

    #[test]
    fn evaluates_with_zero_component_and_zero_exponent() {
        let n = net("A <-> B @ 1, 1");
        let f = n.evaluate_f(&[2.0, 0.0]).unwrap();
        assert_eq!(f, vec![-2.0, 2.0]);
    }

    #[test]
    fn monomial_convention_zero_to_zero_is_one() {
        assert_eq!(monomial(&[0.0, 5.0], &[0.0, 1.0]), 5.0);
        assert_eq!(monomial(&[0.0], &[2.0]), 0.0);
        assert_eq!(monomial(&[4.0], &[1.5]), 8.0);
    }

    #[test]
    fn evaluate_f_rejects_dimension_mismatch() {
        let n = net("A -> B @ 1");
        assert_eq!(
            n.evaluate_f(&[1.0]).unwrap_err(),
            NetworkError::DimensionMismatch {
                expected: 2,
                got: 1
            }
        );
    }

    #[test]
    fn classifies_dissipation() {
        assert_eq!(
            net("A + B -> C @ 1").dissipation_class(),
            DissipationClass::Dissipative
        );
        assert_eq!(
            net("A <-> B @ 1, 1").dissipation_class(),
            DissipationClass::Conservative
        );
        assert_eq!(
            net("A -> 2 A @ 1").dissipation_class(),
            DissipationClass::Indefinite
        );
    }

    #[test]
    fn growth_exponent_takes_max_side_sum() {
        assert_eq!(net("A + B <-> 2 B @ 1, 2").growth_exponent(), 2.0);
        assert_eq!(net("2 A + B -> 3 C @ 1").growth_exponent(), 3.0);
        assert_eq!(net("A -> B @ 1").growth_exponent(), 1.0);
    }

    #[test]
    fn conservation_laws_of_reversible_pair() {
        let rows = net("A <-> B @ 1, 1").conservation_laws();
        assert_eq!(rows.len(), 1);
        let inv = 1.0 / 2.0f64.sqrt();
        assert!((rows[0][0] - inv).abs() < 1e-12);
        assert!((rows[0][1] - inv).abs() < 1e-12);
    }

    #[test]
    fn conservation_laws_of_cycle() {
        let rows = net("A -> B @ 1\nB -> C @ 1\nC -> A @ 1").conservation_laws();
        assert_eq!(rows.len(), 1);
        let inv = 1.0 / 3.0f64.sqrt();
        for x in &rows[0] {
            assert!((x - inv).abs() < 1e-12);
        }
    }

    #[test]
    fn conservation_laws_orthonormal_for_dissipative_net() {
        let n = net("A + B -> C @ 1");
        let rows = n.conservation_laws();
        assert_eq!(rows.len(), 2);
        for (i, a) in rows.iter().enumerate() {
            for (j, b) in rows.iter().enumerate() {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12);
            }
            let r = &n.reactions()[0];
            let along: f64 = a
                .iter()
                .enumerate()
                .map(|(k, w)| w * (r.products[k] - r.reactants[k]))
                .sum();
            assert!(along.abs() < 1e-10);
        }
    }

    #[test]
    fn conservation_rows_annihilate_f_samples() {
        let n = net("A + B <-> 2 B @ 1, 2");
        let rows = n.conservation_laws();
        assert_eq!(rows.len(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let u: Vec<f64> = (0..2).map(|_| rng.random_range(0.0..10.0)).collect();
            let f = n.evaluate_f(&u).unwrap();
            let along: f64 = rows[0].iter().zip(&f).map(|(w, x)| w * x).sum();
            let scale: f64 = f.iter().map(|x| x.abs()).fold(1.0, f64::max);
            assert!(along.abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn complex_balance_residual_orientation() {
        let n = net("A <-> B @ 2, 1");
        let rep = n.check_complex_balance(&[1.0, 1.0]).unwrap();
        // complexes in first-appearance order: A, B
        assert_eq!(rep.residuals.len(), 2);
        assert!((rep.residuals[0] - 1.0).abs() < 1e-14);
        assert!((rep.residuals[1] + 1.0).abs() < 1e-14);
        assert!(!rep.balanced);
    }

    #[test]
    fn complex_balance_detects_balanced_state() {
        let n = net("A <-> B @ 2, 1");
        let rep = n.check_complex_balance(&[1.0, 2.0]).unwrap();
        assert!(rep.balanced);
        let cycle = net("A -> B @ 1\nB -> C @ 1\nC -> A @ 1");
        assert!(cycle.check_complex_balance(&[1.0, 1.0, 1.0]).unwrap().balanced);
    }

    #[test]
    fn complex_balance_requires_positive_state() {
        let n = net("A <-> B @ 1, 1");
        assert_eq!(
            n.check_complex_balance(&[1.0, 0.0]).unwrap_err(),
            NetworkError::NonpositiveState
        );
    }

    #[test]
    fn quasi_positivity_holds_for_mass_action_corpus() {
        for text in [
            "A -> B @ 1",
            "A + B -> C @ 1",
            "A <-> B @ 1, 1",
            "A + B <-> 2 B @ 1, 2",
            "A -> B @ 1\nB -> C @ 1\nC -> A @ 1",
            "2 A + B -> 3 C @ 0.7",
        ] {
            let spec = NonlinearitySpec::MassAction(net(text));
            let rep = check_quasi_positivity(&spec, 1000, 42);
            assert!(rep.passed, "corpus network failed: {text}");
        }
        let builtin = NonlinearitySpec::Builtin(builtin_nonlinearity("remark-1-4").unwrap());
        assert!(check_quasi_positivity(&builtin, 1000, 42).passed);
    }

    #[test]
    fn quasi_positivity_fails_with_witness_on_synthetic_builtin() {
        let bad = NonlinearitySpec::Builtin(BuiltinNonlinearity::new(
            "constant-sink",
            &["a", "b"],
            |_, out| {
                out[0] = -1.0;
                out[1] = 0.0;
            },
        ));
        let rep = check_quasi_positivity(&bad, 1000, 42);
        assert!(!rep.passed);
        let (i, u, v) = rep.witness.expect("witness");
        assert_eq!(i, 0);
        assert_eq!(u[0], 0.0);
        assert_eq!(v, -1.0);
    }

    #[test]
    fn builtin_remark_1_4_matches_closed_form() {
        let b = builtin_nonlinearity("remark-1-4").unwrap();
        let spec = NonlinearitySpec::Builtin(b);
        let mut out = vec![0.0; 2];
        let (u, v) = (0.3, 0.7);
        spec.evaluate_into(&[u, v], &mut out);
        let ev = v.exp();
        let eu2 = (u * u).exp();
        assert!((out[0] - ((-u + 2.0 * v) * ev - u * v * eu2)).abs() < 1e-15);
        assert!((out[1] - (-v * v * ev + u * u * v * eu2)).abs() < 1e-15);
        assert!(builtin_nonlinearity("nope").is_err());
    }

    #[test]
    fn dsl_roundtrip_examples() {
        for text in [
            "A + B -> C @ 2.5",
            "A + B <-> 2 B @ 1, 0.5",
            "A -> 0 @ 1",
            "2 A + 1.5 B -> 3 C @ 0.25",
        ] {
            let n = net(text);
            let printed = n.to_dsl();
            let reparsed = parse_network(&printed).expect("reparse");
            assert_eq!(n, reparsed, "roundtrip failed for {text}");
        }
    }

    proptest! {
        #[test]
        fn dsl_roundtrip_random_networks(
            m in 1usize..4,
            seeds in proptest::collection::vec((0u8..4, 0u8..4, 1u32..1000), 1..5)
        ) {
            let mut reactions = Vec::new();
            for (ai, bi, kq) in seeds {
                let mut alpha = vec![0.0; m];
                let mut beta = vec![0.0; m];
                alpha[ai as usize % m] += 1.0 + (kq % 3) as f64;
                beta[bi as usize % m] += 1.0 + (kq % 2) as f64;
                if alpha == beta {
                    beta[(bi as usize + 1) % m] += 1.0;
                }
                reactions.push(Reaction {
                    reactants: alpha,
                    products: beta,
                    rate: kq as f64 / 8.0,
                });
            }
            // the text form can only mention species that occur somewhere,
            // so the roundtrip property needs every species to be used
            let used = |i: usize| {
                reactions
                    .iter()
                    .any(|r| r.reactants[i] != 0.0 || r.products[i] != 0.0)
            };
            prop_assume!((0..m).all(used));
            let species: Vec<String> = (0..m).map(|i| format!("S{i}")).collect();
            let n = ReactionNetwork::new(species, reactions).unwrap();
            let reparsed = parse_network(&n.to_dsl()).unwrap();
            // the reader numbers species by first appearance in the text,
            // so compare after remapping back to the original order
            let order: Vec<usize> = n
                .species()
                .iter()
                .map(|name| reparsed.species().iter().position(|s| s == name).unwrap())
                .collect();
            prop_assert_eq!(n.reactions().len(), reparsed.reactions().len());
            for (a, b) in n.reactions().iter().zip(reparsed.reactions()) {
                prop_assert_eq!(a.rate, b.rate);
                for i in 0..m {
                    prop_assert_eq!(a.reactants[i], b.reactants[order[i]]);
                    prop_assert_eq!(a.products[i], b.products[order[i]]);
                }
            }
        }

        #[test]
        fn growth_bound_holds_on_random_states(
            vals in proptest::collection::vec(0.0f64..10.0, 2)
        ) {
            let n = net("A + B <-> 2 B @ 1, 2");
            let mu = n.growth_exponent();
            let m = n.species_count() as f64;
            let c: f64 = n
                .reactions()
                .iter()
                .map(|r| {
                    let dmax = r
                        .products
                        .iter()
                        .zip(&r.reactants)
                        .map(|(b, a)| (b - a).abs())
                        .fold(0.0, f64::max);
                    r.rate * dmax * m
                })
                .sum();
            let f = n.evaluate_f(&vals).unwrap();
            let sup = vals.iter().fold(0.0f64, |a, &b| a.max(b));
            for fi in f {
                prop_assert!(fi.abs() <= c * (1.0 + sup.powf(mu)) + 1e-9);
            }
        }
    }
}
