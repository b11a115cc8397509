use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::DEFAULT_DIMENSION_CAP;
use crate::hypergraph::Hypergraph;
use crate::polymer::{active_vertices, effective_edge_size, Mode};
use crate::rational::{e4_upper, e_upper, fraction_string, integer, pow, ratio, to_f64, Rational};

/// Knobs for [`validate_plan`]; everything defaults to the certified choice.
#[derive(Clone, Debug)]
pub struct PlanOptions {
    /// `None` picks graph mode iff every hyperedge has at most two vertices.
    pub mode: Option<Mode>,
    /// Decay rate; `None` uses the largest certified rate.
    pub rho: Option<Rational>,
    /// Overrides the truncation depth `m`.
    pub max_cluster_size: Option<usize>,
    pub dimension_cap: usize,
    pub force: bool,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            mode: None,
            rho: None,
            max_cluster_size: None,
            dimension_cap: DEFAULT_DIMENSION_CAP,
            force: false,
        }
    }
}

/// A validated bundle driving the expansion.
#[derive(Clone, Debug, Serialize)]
pub struct ExpansionPlan {
    #[serde(serialize_with = "serialize_fraction")]
    pub delta: Rational,
    pub epsilon: f64,
    pub mode: Mode,
    #[serde(serialize_with = "serialize_fraction")]
    pub rho: Rational,
    #[serde(serialize_with = "serialize_optional_fraction")]
    pub rho_certified: Option<Rational>,
    /// `m`: the largest total cluster size kept.
    pub truncation_depth: usize,
    /// The depth the ε-guarantee needs at this `ρ`.
    pub required_depth: usize,
    pub dimension_cap: usize,
    pub force: bool,
    pub admissible: bool,
    pub guarantee: bool,
    /// `|V| e^{-ρ m}`, the bound on the discarded part of `log Ξ`.
    pub tail_bound: f64,
    pub warnings: Vec<String>,
}

fn serialize_fraction<S: serde::Serializer>(value: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fraction_string(value))
}

fn serialize_optional_fraction<S: serde::Serializer>(
    value: &Option<Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match value {
        Some(v) => s.serialize_str(&fraction_string(v)),
        None => s.serialize_none(),
    }
}

/// Graph mode iff `k <= 2`.
pub fn default_mode(h: &Hypergraph) -> Mode {
    if h.max_edge_size() <= 2 {
        Mode::Graph
    } else {
        Mode::Mcs
    }
}

/// Exact admissibility: `δ e⁴ Δ <= 1` (graph) or
/// `(δ e⁴ (k-1))^{k-1} Δ^{2k-3} <= 1` (MCS), with `e⁴` replaced by `546/10`.
pub fn is_admissible(h: &Hypergraph, mode: Mode, delta: &Rational) -> bool {
    let big_delta = integer(h.max_degree() as i64);
    match mode {
        Mode::Graph => delta * e4_upper() * big_delta <= Rational::ONE,
        Mode::Mcs => {
            let k1 = effective_edge_size(h) - 1;
            let base = delta * e4_upper() * integer(k1 as i64);
            pow(&base, k1) * pow(&big_delta, 2 * k1 - 1) <= Rational::ONE
        }
    }
}

/// The largest admissible δ in graph mode; in MCS mode with `k > 2` a
/// rational within a relative `1e-9` below the irrational bound.
pub fn max_admissible_delta(h: &Hypergraph, mode: Mode) -> Rational {
    let big_delta = integer(h.max_degree() as i64);
    let k1 = effective_edge_size(h) - 1;
    if mode == Mode::Graph || k1 == 1 {
        return Rational::ONE / (e4_upper() * big_delta);
    }
    let approx = 1.0
        / (to_f64(&e4_upper()) * k1 as f64 * (h.max_degree() as f64).powf((2 * k1 - 1) as f64 / k1 as f64));
    let scale = 1_000_000_000_000u64;
    let mut candidate = ratio((approx * scale as f64).floor() as i64, scale);
    let shrink = ratio(999_999_999, 1_000_000_000);
    while !is_admissible(h, mode, &candidate) {
        candidate *= &shrink;
    }
    candidate
}

/// Largest decay rate (a multiple of 1/1000) for which the per-vertex
/// Kotecký–Preiss sum is certified: with `D` the max degree of
/// `Flat(H)[active]` and `w1` the per-vertex weight bound, the condition is
/// `(D + 1 + eD) w1 e^{1+ρ} <= 1`. `None` when there are no active vertices or
/// no positive rate qualifies.
pub fn certified_rho(h: &Hypergraph, mode: Mode, delta: &Rational) -> Option<Rational> {
    let active = active_vertices(h, delta);
    if active.is_empty() {
        return None;
    }
    let e = to_f64(&e_upper());
    let d = h.flat_degree_within(&active) as f64;
    let delta_f = to_f64(delta);
    let big_delta = h.max_degree() as f64;
    let w1 = match mode {
        Mode::Graph => e * delta_f,
        Mode::Mcs => {
            let k1 = (effective_edge_size(h) - 1) as f64;
            big_delta * delta_f * (e / big_delta).powf(1.0 / k1)
        }
    };
    let rho = (1.0 / ((d + 1.0 + e * d) * w1)).ln() - 1.0 - 1e-9;
    if !(rho.is_finite()) || rho < 0.001 {
        return None;
    }
    let thousandths = (rho * 1000.0).floor() as i64;
    Some(ratio(thousandths, 1000))
}

/// `m = ⌈ln(2|V|/ε)/ρ⌉`, bumped until `|V| e^{-ρm} <= ε/2` holds in floating
/// point.
pub fn truncation_depth(num_vertices: usize, epsilon: f64, rho: &Rational) -> usize {
    let rho = to_f64(rho);
    let n = num_vertices.max(1) as f64;
    let mut m = ((2.0 * n / epsilon).ln() / rho).ceil().max(1.0) as usize;
    while n * (-rho * m as f64).exp() > epsilon / 2.0 {
        m += 1;
    }
    m
}

pub fn validate_plan(
    h: &Hypergraph,
    delta: &Rational,
    epsilon: f64,
    options: &PlanOptions,
) -> Result<ExpansionPlan> {
    if *delta <= Rational::ZERO {
        return Err(Error::Argument(format!("delta must be positive, got {}", fraction_string(delta))));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Argument(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if options.dimension_cap == 0 {
        return Err(Error::Argument("dimension cap must be at least 1".into()));
    }
    let mode = options.mode.unwrap_or_else(|| default_mode(h));
    if mode == Mode::Graph && h.max_edge_size() > 2 {
        return Err(Error::Argument(format!(
            "graph mode needs hyperedges of size at most 2, found size {}",
            h.max_edge_size()
        )));
    }

    let mut warnings = Vec::new();
    let admissible = is_admissible(h, mode, delta);
    if !admissible {
        let bound = max_admissible_delta(h, mode);
        let reason = match mode {
            Mode::Graph => format!(
                "graph-mode bound 1/(e^4 Δ) with Δ = {} is about {:.6} (largest accepted value {})",
                h.max_degree(),
                to_f64(&bound),
                fraction_string(&bound)
            ),
            Mode::Mcs => format!(
                "MCS-mode bound (e^4 Δ^((2k-3)/(k-1)) (k-1))^-1 with Δ = {}, k = {} is about {:.6}",
                h.max_degree(),
                effective_edge_size(h),
                to_f64(&bound)
            ),
        };
        if !options.force {
            return Err(Error::Inadmissible {
                delta: fraction_string(delta),
                reason,
            });
        }
        warnings.push(format!("delta exceeds the admissible bound ({reason}); the guarantee is void"));
    }

    let has_active = !active_vertices(h, delta).is_empty();
    let rho_certified = certified_rho(h, mode, delta);
    let rho = match (&options.rho, &rho_certified) {
        (Some(r), _) if *r <= Rational::ZERO => {
            return Err(Error::Argument(format!("rho must be positive, got {}", fraction_string(r))));
        }
        (Some(r), Some(c)) if r > c => {
            if !options.force {
                return Err(Error::Argument(format!(
                    "rho = {} exceeds the certified decay rate {} for this instance",
                    fraction_string(r),
                    fraction_string(c)
                )));
            }
            warnings.push("rho exceeds the certified decay rate; the guarantee is void".into());
            r.clone()
        }
        (Some(r), None) if has_active => {
            if !options.force {
                return Err(Error::Argument(
                    "no positive decay rate is certified for this instance".into(),
                ));
            }
            warnings.push("no decay rate is certified; the guarantee is void".into());
            r.clone()
        }
        (Some(r), _) => r.clone(),
        (None, Some(c)) => c.clone(),
        (None, None) if has_active => {
            if !options.force {
                return Err(Error::Argument(
                    "no positive decay rate is certified for this instance".into(),
                ));
            }
            warnings.push("no decay rate is certified; using rho = 1/10 without a guarantee".into());
            ratio(1, 10)
        }
        (None, None) => Rational::ONE,
    };

    let n = h.num_vertices();
    let required_depth = if has_active {
        truncation_depth(n, epsilon, &rho)
    } else {
        1
    };
    let truncation_depth = match options.max_cluster_size {
        Some(0) => return Err(Error::Argument("max cluster size must be at least 1".into())),
        Some(m) => m,
        None => required_depth,
    };
    if truncation_depth < required_depth {
        warnings.push(format!(
            "max cluster size {truncation_depth} is below the required depth {required_depth}; the guarantee is void"
        ));
    }
    if options.force {
        warnings.push("force mode: no error guarantee is claimed".into());
    }
    let tail_bound = if has_active {
        n as f64 * (-to_f64(&rho) * truncation_depth as f64).exp()
    } else {
        0.0
    };
    let guarantee = !options.force && truncation_depth >= required_depth;
    Ok(ExpansionPlan {
        delta: delta.clone(),
        epsilon,
        mode,
        rho,
        rho_certified,
        truncation_depth,
        required_depth,
        dimension_cap: options.dimension_cap,
        force: options.force,
        admissible,
        guarantee,
        tail_bound,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: u32) -> Hypergraph {
        Hypergraph::from_edges((0..n).map(|i| vec![i, (i + 1) % n]).collect()).unwrap()
    }

    #[test]
    fn graph_mode_bound_for_max_degree_two() {
        let c4 = cycle(4);
        let max = max_admissible_delta(&c4, Mode::Graph);
        assert_eq!(max, ratio(10, 1092));
        assert!((to_f64(&max) - 0.00916).abs() < 1e-5);
        assert!(is_admissible(&c4, Mode::Graph, &ratio(9, 1000)));
        assert!(!is_admissible(&c4, Mode::Graph, &ratio(1, 100)));
    }

    #[test]
    fn modes_agree_for_graphs() {
        let c4 = cycle(4);
        assert_eq!(max_admissible_delta(&c4, Mode::Mcs), max_admissible_delta(&c4, Mode::Graph));
    }

    #[test]
    fn mcs_bound_for_triples() {
        let h = Hypergraph::from_edges(vec![vec![0, 1, 2], vec![2, 3, 4], vec![4, 5, 0]]).unwrap();
        let max = max_admissible_delta(&h, Mode::Mcs);
        assert!(is_admissible(&h, Mode::Mcs, &max));
        // (e^4 2^{3/2} 2)^{-1}
        let exact = 1.0 / (std::f64::consts::E.powi(4) * 2f64.powf(1.5) * 2.0);
        assert!(to_f64(&max) < exact && to_f64(&max) > 0.99 * exact);
        assert!(!is_admissible(&h, Mode::Mcs, &(max * ratio(101, 100))));
    }

    #[test]
    fn depth_example() {
        assert_eq!(truncation_depth(4, 0.5, &ratio(1, 10)), 28);
    }

    #[test]
    fn rejects_inadmissible_delta() {
        let err = validate_plan(&cycle(4), &ratio(1, 10), 0.01, &PlanOptions::default()).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        let forced = validate_plan(
            &cycle(4),
            &ratio(1, 10),
            0.01,
            &PlanOptions {
                force: true,
                ..PlanOptions::default()
            },
        )
        .unwrap();
        assert!(!forced.guarantee);
        assert!(!forced.warnings.is_empty());
    }

    #[test]
    fn certified_plan() {
        let plan = validate_plan(&cycle(4), &ratio(1, 500), 0.01, &PlanOptions::default()).unwrap();
        assert!(plan.guarantee);
        let rho = plan.rho_certified.clone().unwrap();
        assert_eq!(plan.rho, rho);
        assert!(plan.tail_bound <= 0.005);
        // D = 2, w1 = eδ
        let e = std::f64::consts::E;
        let expected = (1.0 / ((3.0 + 2.0 * e) * e / 500.0)).ln() - 1.0;
        assert!(to_f64(&rho) <= expected && to_f64(&rho) > expected - 0.002);
    }

    #[test]
    fn rho_override_checks() {
        let c4 = cycle(4);
        let too_big = PlanOptions {
            rho: Some(integer(10)),
            ..PlanOptions::default()
        };
        assert!(validate_plan(&c4, &ratio(1, 500), 0.01, &too_big).is_err());
        let small = PlanOptions {
            rho: Some(ratio(1, 10)),
            ..PlanOptions::default()
        };
        let plan = validate_plan(&c4, &ratio(1, 500), 0.5, &small).unwrap();
        assert_eq!(plan.truncation_depth, 28);
        let capped = PlanOptions {
            max_cluster_size: Some(2),
            ..PlanOptions::default()
        };
        let plan = validate_plan(&c4, &ratio(1, 500), 0.01, &capped).unwrap();
        assert!(!plan.guarantee);
    }

    #[test]
    fn argument_errors() {
        let c4 = cycle(4);
        let opts = PlanOptions::default();
        assert!(validate_plan(&c4, &integer(0), 0.01, &opts).is_err());
        assert!(validate_plan(&c4, &ratio(1, 500), 1.5, &opts).is_err());
        let tri = Hypergraph::from_edges(vec![vec![0, 1, 2]]).unwrap();
        let graph = PlanOptions {
            mode: Some(Mode::Graph),
            ..PlanOptions::default()
        };
        assert!(validate_plan(&tri, &ratio(1, 500), 0.01, &graph).is_err());
    }

    #[test]
    fn star_center_is_the_only_active_vertex() {
        let star = Hypergraph::from_edges(vec![vec![0, 1], vec![0, 2], vec![0, 3]]).unwrap();
        // D = 0 inside the active set, so the rate is ln(1/(eδ)) - 1
        let rho = certified_rho(&star, Mode::Graph, &ratio(1, 500)).unwrap();
        let expected = (500.0 / std::f64::consts::E).ln() - 1.0;
        assert!(to_f64(&rho) <= expected && to_f64(&rho) > expected - 0.002);
    }
}
