//! Experiment plans: validated parameters in, result tables out.

use std::path::Path;

use clap::ValueEnum;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use qht_core::cft::{cft_relative_entropy, cft_small_interval_with, CftThermalPair, SeriesForm};
use qht_core::divergences::{relative_entropy, relative_entropy_variance, trace_distance};
use qht_core::fermion::{fermion_relative_entropy, fermion_variance, two_fermion_optimal_setup, xy_correlation};
use qht_core::multicopy::{stein_rows, threshold_from, tradeoff_sides, ErrorPair, Mode, OptimalMethod, PairSetup};
use qht_core::oneshot::{bloch_of, bloch_of_operator, neyman_pearson, symmetric_oneshot_qubit, BlochFourVector};
use qht_core::perturbative::{report, PerturbativeFamily};
use qht_core::qubit_lab::{
    comparison_with, reduced_first_qubit, simulate_lrt_circuit, QubitPair, CIRCUIT_MAX_COPIES, COMPARISON_MAX_N,
};
use qht_core::random::{commuting_direction, full_rank_state, haar_unitary, random_state, rng, traceless_direction};
use qht_core::{DensityMatrix, Result};

use crate::config::Params;
use crate::output::{col, Cell, Column, Kind, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// Optimal vs likelihood-ratio errors and acceptance dimensions for a qubit pair.
    QubitCompare,
    /// Ratio V⁽²⁾/S⁽²⁾ over random perturbative families.
    PerturbativeSweep,
    /// Symmetric and Neyman-Pearson one-shot qubit tests.
    OneshotQubit,
    /// Two-site XY chain divergences and thresholds.
    FermionXy,
    /// Thermal CFT relative entropy and its small-interval series.
    CftThermal,
    /// Counting-circuit simulation against the direct trace.
    CircuitVerify,
    /// Per-n Stein exponents of the optimal and likelihood-ratio tests.
    SteinTable,
}

impl Experiment {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

/// Generator for one independent stream of the run's seed.
fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut g = rng(seed);
    g.set_stream(index);
    g
}

fn unit_interval(p: &mut Params, key: &str, value: f64) {
    p.check(key, value > 0.0 && value < 1.0, format!("must lie in (0, 1), got {value}"));
}

fn all_positive(p: &mut Params, key: &str, values: &[f64]) {
    if let Some(v) = values.iter().find(|&&v| v <= 0.0) {
        p.check(key, false, format!("entries must be positive, got {v}"));
    }
}

fn nonempty<T>(p: &mut Params, key: &str, values: &[T]) {
    p.check(key, !values.is_empty(), "list must not be empty");
}

pub enum StateSource {
    Qubit { p: f64, theta: f64 },
    Given { rho: DensityMatrix, sigma: DensityMatrix },
}

/// A fully validated experiment.
pub enum Plan {
    QubitCompare {
        theta: f64,
        p: f64,
        epsilon: f64,
        n_max: usize,
        method: OptimalMethod,
    },
    PerturbativeSweep {
        samples: usize,
        dims: Vec<usize>,
        commuting: bool,
        scale: f64,
        min_eig: f64,
    },
    OneshotQubit {
        epsilon: f64,
        fixed: Option<([f64; 4], [f64; 4])>,
        instances: usize,
    },
    FermionXy {
        beta1: Vec<f64>,
        beta2: Vec<f64>,
        r: Vec<usize>,
        n: usize,
        epsilon: f64,
    },
    CftThermal {
        c: f64,
        ell: Vec<f64>,
        beta1: Vec<f64>,
        beta2: Vec<f64>,
        form: SeriesForm,
    },
    CircuitVerify {
        n_list: Vec<usize>,
        unitaries: usize,
    },
    SteinTable {
        source: StateSource,
        n_list: Vec<usize>,
        epsilon: f64,
        modes: Vec<Mode>,
    },
}

fn load_state(p: &mut Params, key: &str, path: &Path) -> Option<DensityMatrix> {
    let loaded = std::fs::read_to_string(path)
        .map_err(|e| e.to_string())
        .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).map_err(|e| e.to_string()))
        .and_then(|v| DensityMatrix::from_json(&v).map_err(|e| e.to_string()));
    match loaded {
        Ok(rho) => Some(rho),
        Err(e) => {
            p.check(key, false, format!("cannot load state from {}: {e}", path.display()));
            None
        }
    }
}

fn four_vector(p: &mut Params, key: &str) -> Option<[f64; 4]> {
    let v = p.reals(key, None);
    match <[f64; 4]>::try_from(v.as_slice()) {
        Ok(a) if BlochFourVector::new(a).is_state() => Some(a),
        Ok(_) => {
            p.check(key, false, "must be a state: fourth entry 1 and spatial length at most 1");
            None
        }
        Err(_) => {
            p.check(key, false, format!("expected four entries, got {}", v.len()));
            None
        }
    }
}

/// Reads and validates the parameters of `exp`. Errors are collected in `p`.
pub fn plan(exp: Experiment, p: &mut Params) -> Option<Plan> {
    let plan = match exp {
        Experiment::QubitCompare => {
            let theta = p.real("theta", None);
            let prob = p.real("p", None);
            unit_interval(p, "p", prob);
            let epsilon = p.real("epsilon", None);
            unit_interval(p, "epsilon", epsilon);
            let n_max = p.int("n_max", None);
            p.check(
                "n_max",
                (1..=COMPARISON_MAX_N).contains(&n_max),
                format!("must lie in 1..={COMPARISON_MAX_N}, got {n_max}"),
            );
            let method = match p.choice("method", &["auto", "spin", "dense"], Some("auto")).as_str() {
                "spin" => OptimalMethod::Spin,
                "dense" => OptimalMethod::Dense,
                _ => OptimalMethod::Auto,
            };
            Plan::QubitCompare {
                theta,
                p: prob,
                epsilon,
                n_max,
                method,
            }
        }
        Experiment::PerturbativeSweep => {
            let samples = p.int("samples", None);
            p.check("samples", samples >= 1, "must be at least 1");
            let dims = p.ints("dim", None);
            nonempty(p, "dim", &dims);
            if let Some(d) = dims.iter().find(|&&d| !(2..=64).contains(&d)) {
                p.check("dim", false, format!("entries must lie in 2..=64, got {d}"));
            }
            let commuting = p.boolean("commuting", Some(false));
            let scale = p.real("scale", Some(0.01));
            p.check("scale", scale > 0.0, "must be positive");
            let min_eig = p.real("min_eig", Some(0.02));
            let dmax = dims.iter().copied().max().unwrap_or(2) as f64;
            p.check(
                "min_eig",
                min_eig > 0.0 && min_eig * dmax < 1.0,
                format!("must lie in (0, 1/{dmax}), got {min_eig}"),
            );
            Plan::PerturbativeSweep {
                samples,
                dims,
                commuting,
                scale,
                min_eig,
            }
        }
        Experiment::OneshotQubit => {
            let epsilon = p.real("epsilon", None);
            unit_interval(p, "epsilon", epsilon);
            let instances = p.int("instances", Some(0));
            let fixed = match (p.is_set("a"), p.is_set("b")) {
                (true, true) => four_vector(p, "a").zip(four_vector(p, "b")),
                (false, false) => None,
                (a, _) => {
                    let (present, missing) = if a { ("a", "b") } else { ("b", "a") };
                    four_vector(p, present);
                    p.check(missing, false, "`a` and `b` must be given together");
                    None
                }
            };
            if fixed.is_none() && !p.is_set("a") && !p.is_set("b") {
                p.check("instances", instances >= 1, "must be at least 1 when `a` and `b` are absent");
            }
            if let Some((a, b)) = fixed {
                p.check("b", a != b, "must differ from `a`");
            }
            Plan::OneshotQubit {
                epsilon,
                fixed,
                instances,
            }
        }
        Experiment::FermionXy => {
            let beta1 = p.reals("beta1", None);
            let beta2 = p.reals("beta2", None);
            for (k, v) in [("beta1", &beta1), ("beta2", &beta2)] {
                nonempty(p, k, v);
                if let Some(b) = v.iter().find(|&&b| b < 0.0) {
                    p.check(k, false, format!("entries must be non-negative, got {b}"));
                }
            }
            let r = p.ints("r", None);
            nonempty(p, "r", &r);
            p.check("r", r.iter().all(|&x| x >= 1), "separations must be at least 1");
            let n = p.int("n", Some(10));
            p.check("n", n >= 1, "must be at least 1");
            let epsilon = p.real("epsilon", Some(0.2));
            unit_interval(p, "epsilon", epsilon);
            Plan::FermionXy {
                beta1,
                beta2,
                r,
                n,
                epsilon,
            }
        }
        Experiment::CftThermal => {
            let c = p.real("c", Some(1.0));
            p.check("c", c > 0.0, "must be positive");
            let ell = p.reals("ell", None);
            let beta1 = p.reals("beta1", None);
            let beta2 = p.reals("beta2", None);
            for (k, v) in [("ell", &ell), ("beta1", &beta1), ("beta2", &beta2)] {
                nonempty(p, k, v);
                all_positive(p, k, v);
            }
            let form = match p.choice("form", &["printed", "derived"], Some("printed")).as_str() {
                "derived" => SeriesForm::Derived,
                _ => SeriesForm::Printed,
            };
            Plan::CftThermal {
                c,
                ell,
                beta1,
                beta2,
                form,
            }
        }
        Experiment::CircuitVerify => {
            let n_list = p.ints("n_list", None);
            nonempty(p, "n_list", &n_list);
            if let Some(n) = n_list.iter().find(|&&n| !(1..=CIRCUIT_MAX_COPIES).contains(&n)) {
                p.check("n_list", false, format!("entries must lie in 1..={CIRCUIT_MAX_COPIES}, got {n}"));
            }
            let unitaries = p.int("unitaries", None);
            p.check("unitaries", unitaries >= 1, "must be at least 1");
            Plan::CircuitVerify { n_list, unitaries }
        }
        Experiment::SteinTable => {
            let source = match p.choice("states", &["qubit", "files"], Some("qubit")).as_str() {
                "files" => {
                    let rho_path = p.path("rho_file");
                    let sigma_path = p.path("sigma_file");
                    let rho = load_state(p, "rho_file", &rho_path);
                    let sigma = load_state(p, "sigma_file", &sigma_path);
                    if let (Some(r), Some(s)) = (&rho, &sigma) {
                        p.check(
                            "sigma_file",
                            r.dim() == s.dim(),
                            format!("dimension {} differs from rho's {}", s.dim(), r.dim()),
                        );
                    }
                    rho.zip(sigma).map(|(rho, sigma)| StateSource::Given { rho, sigma })
                }
                _ => {
                    let prob = p.real("p", None);
                    unit_interval(p, "p", prob);
                    let theta = p.real("theta", None);
                    Some(StateSource::Qubit { p: prob, theta })
                }
            };
            let n_list = p.ints("n_list", None);
            nonempty(p, "n_list", &n_list);
            p.check("n_list", n_list.iter().all(|&n| n >= 1), "entries must be at least 1");
            let epsilon = p.real("epsilon", None);
            unit_interval(p, "epsilon", epsilon);
            let modes = match p.choice("mode", &["optimal", "classical", "both"], Some("both")).as_str() {
                "optimal" => vec![Mode::Optimal],
                "classical" => vec![Mode::Classical],
                _ => vec![Mode::Optimal, Mode::Classical],
            };
            Plan::SteinTable {
                source: source?,
                n_list,
                epsilon,
                modes,
            }
        }
    };
    Some(plan)
}

const QUBIT_COMPARE: [Column; 10] = [
    col("n", Kind::Int, "number of copies"),
    col("alpha_opt", Kind::Real, "type-I error of the optimal test"),
    col("beta_opt", Kind::Real, "type-II error of the optimal test"),
    col("alpha_lrt", Kind::Real, "type-I error of the likelihood ratio test"),
    col("beta_lrt", Kind::Real, "type-II error of the likelihood ratio test"),
    col("beta_ratio", Kind::Real, "beta_opt / beta_lrt"),
    col("rate_opt", Kind::Real, "-ln(beta_opt)/n"),
    col("rate_lrt", Kind::Real, "-ln(beta_lrt)/n"),
    col("dim_opt", Kind::Int, "minimum acceptance dimension of the optimal test"),
    col("dim_lrt", Kind::Int, "minimum acceptance dimension of the likelihood ratio test"),
];

const PERTURBATIVE: [Column; 8] = [
    col("sample", Kind::Int, "sample index"),
    col("dim", Kind::Int, "Hilbert space dimension"),
    col("s2", Kind::Real, "second-order relative entropy coefficient S2"),
    col("v2", Kind::Real, "second-order variance coefficient V2"),
    col("fisher", Kind::Real, "SLD quantum Fisher information"),
    col("ratio", Kind::Real, "v2 / s2"),
    col("commutator_norm", Kind::Real, "norm of [sigma, rho1]"),
    col("min_ratio", Kind::Real, "running minimum of ratio over rows so far"),
];

const ONESHOT: [Column; 20] = [
    col("instance", Kind::Int, "row index; row 0 is the fixed pair when `a` and `b` are given"),
    col("a1", Kind::Real, "Bloch x of rho"),
    col("a2", Kind::Real, "Bloch y of rho"),
    col("a3", Kind::Real, "Bloch z of rho"),
    col("b1", Kind::Real, "Bloch x of sigma"),
    col("b2", Kind::Real, "Bloch y of sigma"),
    col("b3", Kind::Real, "Bloch z of sigma"),
    col("trace_distance", Kind::Real, "trace distance between rho and sigma"),
    col("sym_error", Kind::Real, "average error (alpha + beta)/2 of the optimal symmetric test"),
    col("sym_c1", Kind::Real, "symmetric test four-vector c1"),
    col("sym_c2", Kind::Real, "symmetric test four-vector c2"),
    col("sym_c3", Kind::Real, "symmetric test four-vector c3"),
    col("sym_c4", Kind::Real, "symmetric test four-vector c4"),
    col("np_alpha", Kind::Real, "type-I error of the Neyman-Pearson test"),
    col("np_beta", Kind::Real, "type-II error of the Neyman-Pearson test"),
    col("np_c1", Kind::Real, "Neyman-Pearson test four-vector c1"),
    col("np_c2", Kind::Real, "Neyman-Pearson test four-vector c2"),
    col("np_c3", Kind::Real, "Neyman-Pearson test four-vector c3"),
    col("np_c4", Kind::Real, "Neyman-Pearson test four-vector c4"),
    col("d_h", Kind::Real, "hypothesis testing relative entropy -ln(np_beta)"),
];

const FERMION_XY: [Column; 12] = [
    col("beta1", Kind::Real, "inverse temperature of sigma"),
    col("beta2", Kind::Real, "inverse temperature of rho"),
    col("r", Kind::Int, "separation of the two sites"),
    col("s", Kind::Real, "relative entropy S(rho||sigma)"),
    col("v", Kind::Real, "relative entropy variance V(rho||sigma)"),
    col("threshold", Kind::Real, "per-copy threshold S + sqrt(V/n) Phi^-1(epsilon)"),
    col("angle", Kind::Real, "rotation angle between the two single-particle eigenbases"),
    col("commuting", Kind::Bool, "whether the correlation matrices commute"),
    col("e0", Kind::Real, "first single-particle energy of sigma"),
    col("e1", Kind::Real, "second single-particle energy of sigma"),
    col("e0_tilde", Kind::Real, "first single-particle energy of rho"),
    col("e1_tilde", Kind::Real, "second single-particle energy of rho"),
];

const CFT: [Column; 11] = [
    col("c", Kind::Real, "central charge"),
    col("ell", Kind::Real, "interval length"),
    col("beta1", Kind::Real, "inverse temperature of sigma"),
    col("beta2", Kind::Real, "inverse temperature of rho"),
    col("ell_over_beta1", Kind::Real, "ell / beta1"),
    col("s_exact", Kind::Real, "exact relative entropy"),
    col("s_leading", Kind::Real, "leading small-interval term of S"),
    col("v_leading", Kind::Real, "leading small-interval term of V"),
    col("ratio", Kind::Real, "v_leading / s_leading"),
    col("lower_bound_satisfied", Kind::Bool, "ratio >= 2"),
    col("rel_dev", Kind::Real, "|s_exact / s_leading - 1|; NaN when s_leading is zero"),
];

const CIRCUIT: [Column; 6] = [
    col("n", Kind::Int, "number of copies"),
    col("sample", Kind::Int, "random unitary index"),
    col("nstar", Kind::Int, "count threshold"),
    col("simulated", Kind::Real, "acceptance probability from the circuit simulator"),
    col("direct", Kind::Real, "binomial tail of the reduced state, Tr rho^n P"),
    col("residual", Kind::Real, "|simulated - direct|"),
];

const STEIN: [Column; 11] = [
    col("mode", Kind::Text, "optimal or classical"),
    col("n", Kind::Int, "number of copies"),
    col("epsilon", Kind::Real, "type-I target"),
    col("threshold", Kind::Real, "per-copy acceptance threshold"),
    col("alpha", Kind::Real, "type-I error"),
    col("beta", Kind::Real, "type-II error"),
    col("rate", Kind::Real, "-ln(beta)/n"),
    col("min_acc_dim", Kind::Int, "minimum acceptance dimension"),
    col("divergence", Kind::Real, "relative entropy used by the mode"),
    col("tradeoff_lhs", Kind::Real, "(1 - alpha)(-ln beta)"),
    col("tradeoff_rhs", Kind::Real, "n S(rho||sigma) + ln 2"),
];

fn binomial_tail(n: usize, q: f64, nstar: i64) -> f64 {
    let mut total = 0.0;
    let mut coef = 1.0;
    for k in 0..=n {
        if k as i64 >= nstar {
            total += coef * q.powi(k as i32) * (1.0 - q).powi((n - k) as i32);
        }
        coef = coef * (n - k) as f64 / (k + 1) as f64;
    }
    total
}

fn bloch_cells(b: &BlochFourVector, count: usize) -> impl Iterator<Item = Cell> + '_ {
    b.c.iter().take(count).map(|&x| Cell::Real(x))
}

fn oneshot_row(index: usize, rho: &DensityMatrix, sigma: &DensityMatrix, epsilon: f64) -> Result<Vec<Cell>> {
    let (sym, err) = symmetric_oneshot_qubit(rho, sigma)?;
    let np = neyman_pearson(rho, sigma, epsilon)?;
    let (a, b) = (bloch_of(rho)?, bloch_of(sigma)?);
    let (cs, cn) = (bloch_of_operator(&sym)?, bloch_of_operator(&np.test)?);
    let mut row = vec![Cell::from(index)];
    row.extend(bloch_cells(&a, 3));
    row.extend(bloch_cells(&b, 3));
    row.push(trace_distance(rho, sigma)?.into());
    row.push(err.into());
    row.extend(bloch_cells(&cs, 4));
    row.push(np.alpha.into());
    row.push(np.beta.into());
    row.extend(bloch_cells(&cn, 4));
    row.push((-np.beta.ln()).into());
    Ok(row)
}

/// Runs a validated plan.
pub fn execute(plan: Plan, seed: u64) -> Result<Table> {
    match plan {
        Plan::QubitCompare {
            theta,
            p,
            epsilon,
            n_max,
            method,
        } => {
            let mut t = Table::new(QUBIT_COMPARE.to_vec());
            for r in comparison_with(theta, p, epsilon, n_max, method)? {
                let nf = r.n as f64;
                t.push(vec![
                    r.n.into(),
                    r.alpha_opt.into(),
                    r.beta_opt.into(),
                    r.alpha_lrt.into(),
                    r.beta_lrt.into(),
                    (r.beta_opt / r.beta_lrt).into(),
                    (-r.beta_opt.ln() / nf).into(),
                    (-r.beta_lrt.ln() / nf).into(),
                    r.dim_opt.into(),
                    r.dim_lrt.into(),
                ]);
            }
            Ok(t)
        }
        Plan::PerturbativeSweep {
            samples,
            dims,
            commuting,
            scale,
            min_eig,
        } => {
            let jobs: Vec<(usize, usize)> = dims.iter().flat_map(|&d| (0..samples).map(move |k| (d, k))).collect();
            let reports = jobs
                .par_iter()
                .enumerate()
                .map(|(i, &(d, _))| {
                    let mut g = stream(seed, i as u64);
                    let sigma = full_rank_state(&mut g, d, min_eig);
                    let dir = if commuting {
                        commuting_direction(&mut g, &sigma, scale)
                    } else {
                        traceless_direction(&mut g, d, scale)
                    };
                    report(&PerturbativeFamily::new(sigma, dir, 0.0)?)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut t = Table::new(PERTURBATIVE.to_vec());
            let mut min_ratio = f64::INFINITY;
            for (i, (r, &(d, _))) in reports.iter().zip(&jobs).enumerate() {
                min_ratio = min_ratio.min(r.ratio);
                t.push(vec![
                    i.into(),
                    d.into(),
                    r.s2.into(),
                    r.v2.into(),
                    r.fisher.into(),
                    r.ratio.into(),
                    r.commutator_norm.into(),
                    min_ratio.into(),
                ]);
            }
            Ok(t)
        }
        Plan::OneshotQubit {
            epsilon,
            fixed,
            instances,
        } => {
            let mut pairs = vec![];
            if let Some((a, b)) = fixed {
                pairs.push((BlochFourVector::new(a).state()?, BlochFourVector::new(b).state()?));
            }
            let mut g = stream(seed, 0);
            for _ in 0..instances {
                let rho = random_state(&mut g, 2);
                let sigma = random_state(&mut g, 2);
                pairs.push((rho, sigma));
            }
            let mut t = Table::new(ONESHOT.to_vec());
            for (i, (rho, sigma)) in pairs.iter().enumerate() {
                t.push(oneshot_row(i, rho, sigma, epsilon)?);
            }
            Ok(t)
        }
        Plan::FermionXy {
            beta1,
            beta2,
            r,
            n,
            epsilon,
        } => {
            let mut t = Table::new(FERMION_XY.to_vec());
            for &b1 in &beta1 {
                for &b2 in &beta2 {
                    for &sep in &r {
                        let sites = [0, sep as i64];
                        let c = xy_correlation(b1, &sites)?;
                        let ct = xy_correlation(b2, &sites)?;
                        let s = fermion_relative_entropy(&c, &ct)?;
                        let v = fermion_variance(&c, &ct)?;
                        let thr = threshold_from(s, v, n, epsilon, Mode::Optimal)?;
                        let setup = two_fermion_optimal_setup(&c, &ct)?;
                        t.push(vec![
                            b1.into(),
                            b2.into(),
                            sep.into(),
                            s.into(),
                            v.into(),
                            thr.value.into(),
                            setup.angle.into(),
                            setup.commuting.into(),
                            setup.energies[0].into(),
                            setup.energies[1].into(),
                            setup.energies_tilde[0].into(),
                            setup.energies_tilde[1].into(),
                        ]);
                    }
                }
            }
            Ok(t)
        }
        Plan::CftThermal {
            c,
            ell,
            beta1,
            beta2,
            form,
        } => {
            let mut t = Table::new(CFT.to_vec());
            for &l in &ell {
                for &b1 in &beta1 {
                    for &b2 in &beta2 {
                        let pair = CftThermalPair::new(c, l, b1, b2)?;
                        let exact = cft_relative_entropy(&pair);
                        let series = cft_small_interval_with(&pair, form);
                        let dev = if series.s_leading == 0.0 {
                            f64::NAN
                        } else {
                            (exact / series.s_leading - 1.0).abs()
                        };
                        t.push(vec![
                            c.into(),
                            l.into(),
                            b1.into(),
                            b2.into(),
                            (l / b1).into(),
                            exact.into(),
                            series.s_leading.into(),
                            series.v_leading.into(),
                            series.ratio.into(),
                            series.lower_bound_satisfied.into(),
                            dev.into(),
                        ]);
                    }
                }
            }
            Ok(t)
        }
        Plan::CircuitVerify { n_list, unitaries } => {
            let mut t = Table::new(CIRCUIT.to_vec());
            for (ni, &n) in n_list.iter().enumerate() {
                let mut g = stream(seed, ni as u64);
                for sample in 0..unitaries {
                    let v = haar_unitary(&mut g, 4);
                    let q = reduced_first_qubit(&v)?.matrix()[(1, 1)].re;
                    for nstar in 0..=n as i64 + 1 {
                        let sim = simulate_lrt_circuit(&v, n, nstar)?;
                        let direct = binomial_tail(n, q, nstar);
                        t.push(vec![
                            n.into(),
                            sample.into(),
                            nstar.into(),
                            sim.into(),
                            direct.into(),
                            (sim - direct).abs().into(),
                        ]);
                    }
                }
            }
            Ok(t)
        }
        Plan::SteinTable {
            source,
            n_list,
            epsilon,
            modes,
        } => {
            let (rho, sigma, setup) = match source {
                StateSource::Qubit { p, theta } => {
                    let pair = QubitPair::new(p, theta)?;
                    (pair.rho(), pair.sigma(), pair.setup()?)
                }
                StateSource::Given { rho, sigma } => {
                    let setup = PairSetup::new(&rho, &sigma)?;
                    (rho, sigma, setup)
                }
            };
            let s_true = relative_entropy(&rho, &sigma)?;
            let mut t = Table::new(STEIN.to_vec());
            for mode in modes {
                let (s, v) = match mode {
                    Mode::Optimal => (s_true, relative_entropy_variance(&rho, &sigma)?),
                    Mode::Classical => setup.pinched_divergences()?,
                };
                for row in stein_rows(&setup, s, v, epsilon, &n_list, mode)? {
                    let err = ErrorPair {
                        alpha: row.alpha,
                        beta: row.beta,
                    };
                    let (lhs, rhs) = tradeoff_sides(err, row.n, s_true);
                    t.push(vec![
                        mode.to_string().as_str().into(),
                        row.n.into(),
                        row.epsilon.into(),
                        row.threshold.into(),
                        row.alpha.into(),
                        row.beta.into(),
                        row.neg_log_beta_over_n.into(),
                        row.min_acc_dim.into(),
                        s.into(),
                        lhs.into(),
                        rhs.into(),
                    ]);
                }
            }
            Ok(t)
        }
    }
}
