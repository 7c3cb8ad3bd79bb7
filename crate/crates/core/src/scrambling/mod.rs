//! Scrambling experiments: the reference-purified initial state, sampled
//! unitaries on the secret and player sites, and mutual-information curves.
//!
//! Register layout for `N` players of which `s` are maximally mixed:
//! site 0 is the reference `R`, site 1 the secret qubit `A`, sites `2..=N`
//! the remaining players `B`, and sites `N+1..=N+s` the memory `B′`
//! purifying the first `s` player qubits of `B`. The players are the output
//! sites `1..=N`.

mod decoupling;
mod moments;
mod otoc;
mod subsets;

pub use decoupling::{decoupling_fidelity, is_l_scrambling, ScramblingVerdict, Witness};
pub use moments::{choi_state, page_deviation_mc, purity_mc, MonteCarloEstimate};
pub use otoc::{
    embed_operator, otoc, otoc_ensemble, pauli, pauli_string, OtocEnsembleResult, OtocOperators, OtocResult, OtocSample,
};
pub use subsets::{all_subsets, binomial, mask_members, subset_plan, SubsetStrategy, MAX_PLAYERS};

pub use crate::analytic::chaotic_criterion_value;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::ensembles::{apply_circuit, haar_isometry, sample_clifford_circuit, stream_rng, EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};
use crate::infotheory::subsystem_entropy;
use crate::register::{apply_columns, PureState, RegisterLayout, Role, SubsystemMask};
use crate::scalar::{cr, Real, C};
use crate::stats::{ordered_par_try_map, Welford};

/// Most sites a register may have within the amplitude budget.
pub const MAX_SITES: usize = 24;

/// Everything that determines an experiment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Player count `N` (secret site plus `N − 1` further players).
    pub n: usize,
    /// Number of maximally mixed player qubits.
    pub s: usize,
    pub ensemble: EnsembleSpec,
    pub subsets: SubsetStrategy,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(
        n: usize,
        s: usize,
        kind: EnsembleKind,
        samples: usize,
        subsets: SubsetStrategy,
        seed: u64,
    ) -> Result<Self> {
        let cfg = Self {
            n,
            s,
            ensemble: EnsembleSpec {
                kind,
                n_sites: n,
                site_dim: 2,
                samples,
                seed,
            },
            subsets,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn samples(&self) -> usize {
        self.ensemble.samples
    }

    pub fn validate(&self) -> Result<()> {
        let sites = 1 + self.n + self.s;
        if sites > MAX_SITES {
            return Err(Error::SiteBudget {
                sites,
                max: MAX_SITES,
            });
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("need at least one player".into()));
        }
        if self.s + 1 > self.n {
            return Err(Error::InvalidParameter(format!(
                "at most N − 1 = {} players can be mixed, got s = {}",
                self.n - 1,
                self.s
            )));
        }
        if self.ensemble.n_sites != self.n || self.ensemble.seed != self.seed {
            return Err(Error::InvalidParameter("ensemble spec disagrees with the experiment".into()));
        }
        self.ensemble.validate()
    }
}

/// Sites of the players (`A ∪ B`), in player order.
pub fn player_sites(n: usize) -> Vec<usize> {
    (1..=n).collect()
}

/// Reference `R` maximally entangled with `A`; `s` player qubits each
/// maximally entangled with a memory qubit; the other players in `|0⟩`.
pub fn build_initial_state<T: Real>(n: usize, s: usize) -> Result<PureState<T>> {
    let sites = 1 + n + s;
    if sites > MAX_SITES {
        return Err(Error::SiteBudget {
            sites,
            max: MAX_SITES,
        });
    }
    if n == 0 || s + 1 > n {
        return Err(Error::InvalidParameter(format!("need N ≥ 1 and s ≤ N − 1 (N={n}, s={s})")));
    }
    let layout = RegisterLayout::qubits(sites)?
        .with_role(Role::Reference, [0])?
        .with_role(Role::Secret, [1])?
        .with_role(Role::Players, 2..=n)?
        .with_role(Role::Memory, n + 1..=n + s)?;
    let mut amps = vec![C::zero(); layout.dim()];
    let strides = layout.strides();
    // Sum over R = A = x and, for each mixed pair, B_k = B′_k = y_k.
    let w = cr(T::FRAC_1_SQRT_2().powi(s as i32 + 1));
    for x in 0..2usize {
        for y in 0..(1usize << s) {
            let mut idx = x * (strides[0] + strides[1]);
            for k in 0..s {
                if y >> k & 1 == 1 {
                    idx += strides[2 + k] + strides[n + 1 + k];
                }
            }
            amps[idx] = w;
        }
    }
    PureState::new(layout, amps)
}

/// Output state of sample `index`: a fresh unitary from the ensemble applied
/// to the players of `init`.
///
/// Haar samples only draw the unitary's columns on the occupied input
/// subspace; those columns are themselves a Haar isometry.
pub fn sample_output_state<T: Real>(cfg: &ExperimentConfig, init: &PureState<T>, index: usize) -> Result<PureState<T>> {
    let targets = SubsystemMask::new(player_sites(cfg.n))?;
    let mut rng = stream_rng(cfg.seed, index as u64);
    match cfg.ensemble.kind {
        EnsembleKind::Haar => {
            let support = init.target_support(&targets);
            let dim = 1usize << cfg.n;
            let cols = haar_isometry::<T, _>(dim, support.len(), &mut rng)?;
            apply_columns(init, &cols, &support, &targets)
        }
        EnsembleKind::Clifford => {
            let circuit = sample_clifford_circuit(cfg.n, &mut rng)?;
            apply_circuit(init, &circuit, &targets)
        }
    }
}

/// All output states of an experiment, in sample order.
pub fn sample_outputs<T: Real>(cfg: &ExperimentConfig) -> Result<Vec<PureState<T>>> {
    cfg.validate()?;
    let init = build_initial_state::<T>(cfg.n, cfg.s)?;
    ordered_par_try_map(cfg.samples(), |i| sample_output_state(cfg, &init, i))
}

/// One aggregated row of an [`MICurve`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub l: usize,
    pub mean_i: f64,
    pub min_i: f64,
    pub max_i: f64,
    pub std_error: f64,
    /// Subsets evaluated per sample.
    pub subsets: usize,
    pub samples: usize,
}

/// Statistics of `I(R : P(ℓ))` for `ℓ = 0..=N`.
///
/// `mean_i` averages the per-sample subset means and `std_error` is the
/// standard error of those per-sample means; `min_i`/`max_i` range over every
/// evaluated (sample, subset) pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MICurve {
    pub n: usize,
    pub s: usize,
    pub rows: Vec<CurveRow>,
}

impl MICurve {
    pub fn row(&self, l: usize) -> Option<&CurveRow> {
        self.rows.iter().find(|r| r.l == l)
    }

    pub fn validate(&self) -> Result<()> {
        for (expect, row) in self.rows.iter().enumerate() {
            if row.l != expect {
                return Err(Error::Parse(format!("curve row {expect} has ℓ = {}", row.l)));
            }
        }
        if self.rows.len() != self.n + 1 {
            return Err(Error::Parse(format!(
                "curve for N = {} needs {} rows, found {}",
                self.n,
                self.n + 1,
                self.rows.len()
            )));
        }
        Ok(())
    }
}

/// Per-sample mutual informations: `values[ℓ]` lists `(mask, I)` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample: usize,
    pub values: Vec<Vec<(u32, f64)>>,
}

/// Curve together with the raw per-sample values.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub curve: MICurve,
    pub records: Vec<SampleRecord>,
}

/// `I(R : P)` for each subset mask of `players` listed in `plan`.
fn evaluate_plan<T: Real>(
    state: &PureState<T>,
    r: usize,
    players: &[usize],
    plan: &[Vec<u32>],
) -> Result<Vec<Vec<(u32, f64)>>> {
    let s_r = subsystem_entropy(state, &[r], None)?;
    plan.iter()
        .map(|masks| {
            masks
                .iter()
                .map(|&m| {
                    if m == 0 {
                        return Ok((m, 0.0));
                    }
                    let p: Vec<usize> = mask_members(m).map(|k| players[k]).collect();
                    let mut rp = Vec::with_capacity(p.len() + 1);
                    rp.push(r);
                    rp.extend_from_slice(&p);
                    rp.sort_unstable();
                    let s_p = subsystem_entropy(state, &p, None)?;
                    let s_rp = subsystem_entropy(state, &rp, None)?;
                    Ok((m, (s_r + s_p - s_rp).to_f64_lossy()))
                })
                .collect()
        })
        .collect()
}

/// Aggregates per-sample records into a curve over `n` players.
pub fn aggregate(n: usize, s: usize, records: &[SampleRecord]) -> MICurve {
    let rows = (0..=n)
        .map(|l| {
            let mut per_sample = Welford::new();
            let mut all = Welford::new();
            let mut subsets = 0;
            for rec in records {
                let vals = &rec.values[l];
                subsets = subsets.max(vals.len());
                let mut w = Welford::new();
                w.extend(vals.iter().map(|v| v.1));
                all.extend(vals.iter().map(|v| v.1));
                if w.count() > 0 {
                    per_sample.push(w.mean());
                }
            }
            CurveRow {
                l,
                mean_i: per_sample.mean(),
                min_i: all.min(),
                max_i: all.max(),
                std_error: per_sample.std_error(),
                subsets,
                samples: per_sample.count() as usize,
            }
        })
        .collect();
    MICurve { n, s, rows }
}

/// Curve over the given `players` of already-scrambled states; sample `i`
/// draws its subset plan from stream `i` of `plan_seed`.
pub fn curve_from_states<T: Real>(
    states: &[PureState<T>],
    players: &[usize],
    s: usize,
    strategy: SubsetStrategy,
    plan_seed: u64,
) -> Result<(MICurve, Vec<SampleRecord>)> {
    let r = *states
        .first()
        .ok_or_else(|| Error::InvalidParameter("no samples".into()))?
        .layout()
        .role(Role::Reference)
        .first()
        .ok_or_else(|| Error::InvalidLayout("state has no reference site".into()))?;
    let records = ordered_par_try_map(states.len(), |i| -> Result<SampleRecord> {
        let mut rng = stream_rng(plan_seed, i as u64);
        let plan = subset_plan(players.len(), strategy, &mut rng)?;
        Ok(SampleRecord {
            sample: i,
            values: evaluate_plan(&states[i], r, players, &plan)?,
        })
    })?;
    Ok((aggregate(players.len(), s, &records), records))
}

/// Seed of the subset-plan streams, kept apart from the unitary streams.
fn plan_seed(seed: u64) -> u64 {
    seed.wrapping_add(0x9e37_79b9_7f4a_7c15)
}

/// Runs the experiment and aggregates `I(R : P(ℓ))` for every `ℓ ∈ [0, N]`.
pub fn run_experiment<T: Real>(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let init = build_initial_state::<T>(cfg.n, cfg.s)?;
    let players = player_sites(cfg.n);
    let pseed = plan_seed(cfg.seed);
    // States are produced and consumed per sample to keep memory flat.
    let records = ordered_par_try_map(cfg.samples(), |i| -> Result<SampleRecord> {
        let state = sample_output_state(cfg, &init, i)?;
        let mut rng = stream_rng(pseed, i as u64);
        let plan = subset_plan(cfg.n, cfg.subsets, &mut rng)?;
        Ok(SampleRecord {
            sample: i,
            values: evaluate_plan(&state, 0, &players, &plan)?,
        })
    })?;
    Ok(ExperimentOutput {
        config: cfg.clone(),
        curve: aggregate(cfg.n, cfg.s, &records),
        records,
    })
}

/// Curve after discarding the last `discard` of the `N′` players of pure
/// (`s = 0`) output states. Marginals of retained subsets are unchanged by
/// the discard, so they are read straight off the global states.
pub fn discard_shares<T: Real>(
    states: &[PureState<T>],
    discard: usize,
    strategy: SubsetStrategy,
    plan_seed: u64,
) -> Result<MICurve> {
    let first = states.first().ok_or_else(|| Error::InvalidParameter("no samples".into()))?;
    let mut players: Vec<usize> = first.layout().role(Role::Secret).to_vec();
    players.extend_from_slice(first.layout().role(Role::Players));
    let n_prime = players.len();
    if discard >= n_prime {
        return Err(Error::InvalidParameter(format!(
            "cannot discard {discard} of {n_prime} shares"
        )));
    }
    players.truncate(n_prime - discard);
    Ok(curve_from_states(states, &players, discard, strategy, plan_seed)?.0)
}

/// `I(R:P) + I(R:P̄) − total` for every complementary pair within each sample.
pub fn complementarity_residuals(n: usize, records: &[SampleRecord], total: f64) -> Vec<f64> {
    let full: u32 = ((1u64 << n) - 1) as u32;
    let mut out = Vec::new();
    for rec in records {
        for l in 0..=n / 2 {
            for &(m, v) in &rec.values[l] {
                if let Some(&(_, w)) = rec.values[n - l].iter().find(|(c, _)| *c == full & !m) {
                    out.push(v + w - total);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infotheory::mutual_information;
    use crate::register::partial_trace;

    fn mask(s: &[usize]) -> SubsystemMask {
        SubsystemMask::new(s.iter().copied()).unwrap()
    }

    #[test]
    fn initial_state_entropies() {
        let st = build_initial_state::<f64>(3, 0).unwrap();
        assert_eq!(st.layout().n_sites(), 4);
        assert!(subsystem_entropy(&st, &[2, 3], None).unwrap().abs() < 1e-12);
        let mi = mutual_information(&st, &mask(&[0]), &mask(&[1]), None).unwrap().0;
        assert!((mi - 2.0).abs() < 1e-12);

        let st = build_initial_state::<f64>(3, 2).unwrap();
        assert_eq!(st.layout().n_sites(), 6);
        assert_eq!(st.layout().role(Role::Memory), &[4, 5]);
        assert_eq!(st.layout().role(Role::Players), &[2, 3]);
        assert!((subsystem_entropy(&st, &[2, 3], None).unwrap() - 2.0).abs() < 1e-8);
        let mi = mutual_information(&st, &mask(&[0]), &mask(&[1]), None).unwrap().0;
        assert!((mi - 2.0).abs() < 1e-12);
        // Rényi-2 entropy of the player register equals s as well.
        assert!((subsystem_entropy(&st, &[2, 3], Some(2.0)).unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn config_checks() {
        let e = ExperimentConfig::new(12, 12, EnsembleKind::Haar, 1, SubsetStrategy::All, 0).unwrap_err();
        assert!(e.is_budget());
        assert!(ExperimentConfig::new(4, 4, EnsembleKind::Haar, 1, SubsetStrategy::All, 0).is_err());
        assert!(ExperimentConfig::new(4, 3, EnsembleKind::Haar, 1, SubsetStrategy::All, 0).is_ok());
        assert!(ExperimentConfig::new(4, 0, EnsembleKind::Haar, 0, SubsetStrategy::All, 0).is_err());
    }

    #[test]
    fn unitary_leaves_reference_and_memory_alone() {
        for kind in [EnsembleKind::Haar, EnsembleKind::Clifford] {
            let cfg = ExperimentConfig::new(5, 2, kind, 3, SubsetStrategy::All, 9).unwrap();
            let init = build_initial_state::<f64>(5, 2).unwrap();
            let keep = mask(&[0, 6, 7]);
            let before = partial_trace(&init, &keep).unwrap();
            for i in 0..3 {
                let out = sample_output_state(&cfg, &init, i).unwrap();
                assert!((out.norm() - 1.0).abs() < 1e-10);
                let after = partial_trace(&out, &keep).unwrap();
                assert!(after.matrix().sub(before.matrix()).frobenius_norm() < 1e-10);
            }
        }
    }

    #[test]
    fn isometry_path_matches_full_unitary() {
        let cfg = ExperimentConfig::new(4, 1, EnsembleKind::Haar, 1, SubsetStrategy::All, 21).unwrap();
        let init = build_initial_state::<f64>(4, 1).unwrap();
        let targets = mask(&player_sites(4));
        let support = init.target_support(&targets);
        assert_eq!(support.len(), 4);
        let fast = sample_output_state(&cfg, &init, 0).unwrap();
        // Same stream, full unitary: the isometry columns land on the support.
        let u = crate::ensembles::sample_haar::<f64, _>(16, &mut stream_rng(21, 0)).unwrap();
        let cols = crate::linalg::CMatrix::from_fn(16, support.len(), |r, k| u.matrix()[(r, k)]);
        let mut perm = crate::linalg::CMatrix::<f64>::zeros(16, 16);
        for (k, &j) in support.iter().enumerate() {
            for r in 0..16 {
                perm[(r, j)] = cols[(r, k)];
            }
        }
        // Fill the other columns to a unitary is unnecessary: they meet zero amplitudes.
        let slow = crate::register::apply_matrix(&init, &perm, &targets).unwrap();
        for (a, b) in fast.amplitudes().iter().zip(slow.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn small_curve_properties() {
        let cfg = ExperimentConfig::new(4, 0, EnsembleKind::Haar, 20, SubsetStrategy::All, 3).unwrap();
        let out = run_experiment::<f64>(&cfg).unwrap();
        let c = &out.curve;
        c.validate().unwrap();
        assert_eq!(c.rows.len(), 5);
        assert_eq!(c.rows[0].mean_i, 0.0);
        assert!((c.rows[4].mean_i - 2.0).abs() < 1e-9);
        assert_eq!(c.rows[2].subsets, 6);
        for r in &c.rows {
            assert!(r.mean_i >= -1e-9 && r.mean_i <= 2.0 + 1e-9);
            assert!(r.min_i <= r.mean_i + 1e-12 && r.mean_i <= r.max_i + 1e-12);
            assert_eq!(r.samples, 20);
        }
        let res = complementarity_residuals(4, &out.records, 2.0);
        assert_eq!(res.len(), 20 * (1 + 4 + 6));
        assert!(res.iter().all(|r| r.abs() < 1e-9));
    }

    #[test]
    fn experiments_are_reproducible_and_thread_independent() {
        let cfg = ExperimentConfig::new(5, 1, EnsembleKind::Clifford, 6, SubsetStrategy::RandomK(4), 44).unwrap();
        let a = run_experiment::<f64>(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| run_experiment::<f64>(&cfg).unwrap());
        assert_eq!(a.curve, b.curve);
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn discard_zero_is_identity() {
        let cfg = ExperimentConfig::new(5, 0, EnsembleKind::Haar, 8, SubsetStrategy::All, 5).unwrap();
        let states = sample_outputs::<f64>(&cfg).unwrap();
        let direct = curve_from_states(&states, &player_sites(5), 0, SubsetStrategy::All, 1).unwrap().0;
        let kept = discard_shares(&states, 0, SubsetStrategy::All, 1).unwrap();
        assert_eq!(direct, kept);
        let run = run_experiment::<f64>(&cfg).unwrap().curve;
        for (a, b) in run.rows.iter().zip(&kept.rows) {
            assert!((a.mean_i - b.mean_i).abs() < 1e-12);
        }
        assert!(discard_shares(&states, 5, SubsetStrategy::All, 1).is_err());
    }

    #[test]
    fn discarding_never_raises_information() {
        // A retained subset's marginal is the same before and after the
        // discard, and every subset of it carries no more information.
        let cfg = ExperimentConfig::new(6, 0, EnsembleKind::Haar, 4, SubsetStrategy::All, 8).unwrap();
        let states = sample_outputs::<f64>(&cfg).unwrap();
        let kept = discard_shares(&states, 2, SubsetStrategy::All, 2).unwrap();
        assert_eq!(kept.n, 4);
        let full = curve_from_states(&states, &player_sites(6), 0, SubsetStrategy::All, 2).unwrap().0;
        for l in 0..=4 {
            assert!(kept.rows[l].mean_i <= full.rows[l].max_i + 1e-12);
        }
        for st in &states {
            for bits in 1u32..16 {
                let p: Vec<usize> = mask_members(bits).map(|k| k + 1).collect();
                let i_p = mutual_information(st, &mask(&[0]), &mask(&p), None).unwrap().0;
                let wider: Vec<usize> = p.iter().copied().chain([5, 6]).collect();
                let i_w = mutual_information(st, &mask(&[0]), &mask(&wider), None).unwrap().0;
                assert!(i_p <= i_w + 1e-9);
            }
        }
    }

    #[test]
    fn single_precision_experiment() {
        let cfg = ExperimentConfig::new(4, 1, EnsembleKind::Haar, 4, SubsetStrategy::All, 1).unwrap();
        let c32 = run_experiment::<f32>(&cfg).unwrap().curve;
        let c64 = run_experiment::<f64>(&cfg).unwrap().curve;
        for (a, b) in c32.rows.iter().zip(&c64.rows) {
            assert!((a.mean_i - b.mean_i).abs() < 1e-3, "ℓ={}", a.l);
        }
    }
}
