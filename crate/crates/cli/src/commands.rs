//! Subcommand flag sets and their implementations.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use scramblab::analytic::{avg_purity_approx, avg_purity_exact, haar_pauli_otoc_mean, BoundCurve, PartitionDims};
use scramblab::ensembles::{frame_potential, stream_rng, EnsembleKind, EnsembleSpec};
use scramblab::infotheory::trace_distance;
use scramblab::io::{self, CurveMetadata};
use scramblab::ramp::{classify_detailed, encode233, reconstruct233, validate_against_theory, ClassifyMode, SharePair};
use scramblab::register::{DensityMatrix, QuantumState, RegisterLayout, SubsystemMask};
use scramblab::scrambling::{
    chaotic_criterion_value, otoc_ensemble, pauli_string, purity_mc, run_experiment, ExperimentConfig,
    OtocOperators, SubsetStrategy,
};
use scramblab::{Rational, Real, C};

use crate::config::{field_names, resolve, ConfigFile};
use crate::error::{CliError, CliResult};
use crate::plot::{self, Series};

/// Output directory plus the files written so far.
pub struct RunContext {
    out_dir: PathBuf,
    artifacts: Vec<String>,
    started: Instant,
}

impl RunContext {
    pub fn new(out_dir: PathBuf) -> CliResult<Self> {
        fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
        Ok(Self {
            out_dir,
            artifacts: Vec::new(),
            started: Instant::now(),
        })
    }

    /// Path of a new artifact; `name` must be a bare file name.
    fn artifact(&mut self, name: &str) -> CliResult<PathBuf> {
        let p = Path::new(name);
        if name.is_empty() || p.components().count() != 1 || p.file_name().is_none() {
            return Err(CliError::config(format!(
                "output name '{name}' must be a plain file name inside --out-dir"
            )));
        }
        if !self.artifacts.iter().any(|a| a == name) {
            self.artifacts.push(name.to_string());
        }
        Ok(self.out_dir.join(name))
    }

    fn write(&mut self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.artifact(name)?;
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
    }

    fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let text = io::to_sorted_json(value)?;
        self.write(name, &text)
    }

    /// Writes `manifest.json`; called after every other artifact exists.
    fn finish<A: Serialize>(&mut self, subcommand: &str, config: &A, seed: Option<u64>) -> CliResult<()> {
        let manifest = RunManifest {
            subcommand: subcommand.to_string(),
            config: serde_json::to_value(config).map_err(|e| CliError::config(e.to_string()))?,
            seed,
            artifacts: self.artifacts.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            duration_seconds: self.started.elapsed().as_secs_f64(),
        };
        let text = io::to_sorted_json(&manifest)?;
        let path = self.out_dir.join(MANIFEST);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }
}

pub const MANIFEST: &str = "manifest.json";

/// Record of a completed run; its presence marks the run as finished.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub artifacts: Vec<String>,
    pub tool_version: String,
    pub duration_seconds: f64,
}

/// A subcommand whose flags are all optional until resolved.
pub trait Command: Serialize + DeserializeOwned + Default {
    const NAME: &'static str;

    /// Fills remaining defaults and checks the combination.
    fn finalize(self) -> CliResult<Self>;

    fn run(&self, ctx: &mut RunContext) -> CliResult<()>;

    fn seed(&self) -> Option<u64> {
        None
    }
}

/// Resolves flags against the config file, runs, and writes the manifest.
pub fn execute<C: Command>(flags: &C, cfg: Option<&ConfigFile>, ctx: &mut RunContext) -> CliResult<()> {
    let resolved = resolve(flags, C::NAME, cfg)?.finalize()?;
    resolved.run(ctx)?;
    ctx.finish(C::NAME, &resolved, resolved.seed())
}

fn execute_value<C: Command>(config: Value, ctx: &mut RunContext) -> CliResult<()> {
    let flags: C = serde_json::from_value(config).map_err(|e| CliError::config(format!("manifest config: {e}")))?;
    execute(&flags, None, ctx)
}

/// Every subcommand that takes resolved flags, with its field names.
pub fn known_sections() -> Vec<(&'static str, Vec<String>)> {
    vec![
        (MiCurve::NAME, field_names::<MiCurve>()),
        (RampClassify::NAME, field_names::<RampClassify>()),
        (Bounds::NAME, field_names::<Bounds>()),
        (VerifyMoments::NAME, field_names::<VerifyMoments>()),
        (Qutrit233::NAME, field_names::<Qutrit233>()),
        (Otoc::NAME, field_names::<Otoc>()),
        (FramePotential::NAME, field_names::<FramePotential>()),
        (Plot::NAME, field_names::<Plot>()),
    ]
}

/// Re-executes the run recorded in a manifest.
pub fn rerun(manifest: &Path, ctx: &mut RunContext) -> CliResult<()> {
    let text = fs::read_to_string(manifest).map_err(|e| CliError::io(manifest, e))?;
    let m: RunManifest =
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", manifest.display())))?;
    match m.subcommand.as_str() {
        MiCurve::NAME => execute_value::<MiCurve>(m.config, ctx),
        RampClassify::NAME => execute_value::<RampClassify>(m.config, ctx),
        Bounds::NAME => execute_value::<Bounds>(m.config, ctx),
        VerifyMoments::NAME => execute_value::<VerifyMoments>(m.config, ctx),
        Qutrit233::NAME => execute_value::<Qutrit233>(m.config, ctx),
        Otoc::NAME => execute_value::<Otoc>(m.config, ctx),
        FramePotential::NAME => execute_value::<FramePotential>(m.config, ctx),
        Plot::NAME => execute_value::<Plot>(m.config, ctx),
        other => Err(CliError::config(format!("manifest names unknown subcommand '{other}'"))),
    }
}

fn required<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::config(format!("--{flag} is required")))
}

fn parse_list(raw: &str, flag: &str) -> CliResult<Vec<usize>> {
    raw.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| CliError::config(format!("--{flag}: '{t}' is not a non-negative integer")))
        })
        .collect()
}

fn join_list(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// Floating point type used by the simulation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F64,
    F32,
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "f64" | "double" => Ok(Precision::F64),
            "f32" | "single" => Ok(Precision::F32),
            other => Err(format!("precision must be f64 or f32, got '{other}'")),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::F64 => "f64",
            Precision::F32 => "f32",
        })
    }
}

/// Mutual-information curve `I(R : P(ℓ))` for `ℓ = 0..=N`.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct MiCurve {
    /// Number of players N.
    #[arg(long)]
    pub n: Option<usize>,
    /// Maximally mixed player qubits.
    #[arg(long)]
    pub s: Option<usize>,
    /// haar or clifford.
    #[arg(long)]
    pub ensemble: Option<EnsembleKind>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// auto, all, or a per-size subset budget K.
    #[arg(long)]
    pub subsets: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// f64 or f32.
    #[arg(long)]
    pub precision: Option<Precision>,
}

impl MiCurve {
    fn strategy(&self) -> CliResult<SubsetStrategy> {
        let raw = self.subsets.as_deref().unwrap_or("auto");
        if raw.eq_ignore_ascii_case("auto") {
            return Ok(SubsetStrategy::default_for(self.n.unwrap_or(0)));
        }
        raw.parse().map_err(|e: scramblab::Error| CliError::config(format!("--subsets: {e}")))
    }
}

impl Command for MiCurve {
    const NAME: &'static str = "mi-curve";

    fn finalize(mut self) -> CliResult<Self> {
        required(self.n, "n")?;
        self.s.get_or_insert(0);
        self.ensemble.get_or_insert(EnsembleKind::Haar);
        self.samples.get_or_insert(100);
        self.seed.get_or_insert(0);
        self.precision.get_or_insert_default();
        self.subsets = Some(self.strategy()?.to_string());
        Ok(self)
    }

    fn run(&self, ctx: &mut RunContext) -> CliResult<()> {
        let cfg = ExperimentConfig::new(
            self.n.unwrap_or_default(),
            self.s.unwrap_or_default(),
            self.ensemble.unwrap_or_default(),
            self.samples.unwrap_or_default(),
            self.strategy()?,
            self.seed.unwrap_or_default(),
        )?;
        let out = match self.precision.unwrap_or_default() {
            Precision::F64 => run_experiment::<f64>(&cfg)?,
            Precision::F32 => run_experiment::<f32>(&cfg)?,
        };
        let path = ctx.artifact("curve.csv")?;
        ctx.artifact("curve.json")?;
        io::write_curve(&path, &out.curve, &CurveMetadata::for_config(&cfg))?;
        Ok(())
    }

    fn seed(&self) -> Option<u64> {
        self.seed
    }
}

/// Ramp parameters of a curve and their comparison with theory.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RampClassify {
    /// Curve CSV written by mi-curve.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// mean or worst.
    #[arg(long)]
    pub mode: Option<ClassifyMode>,
    /// ε for the predicted (b, g); defaults to the searched ε.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Full I(R:S) in bits.
    #[arg(long)]
    pub i_rs: Option<f64>,
}

impl Command for RampClassify {
    const NAME: &'static str = "ramp-classify";

    fn finalize(mut self) -> CliResult<Self> {
        required(self.curve.as_ref(), "curve")?;
        self.gamma.get_or_insert(0.05);
        self.delta.get_or_insert(0.05);
        self.mode.get_or_insert_default();
        self.i_rs.get_or_insert(2.0);
        Ok(self)
    }

    fn run(&self, ctx: &mut RunContext) -> CliResult<()> {
        let path = self.curve.as_deref().unwrap_or(Path::new(""));
        let (curve, _) = io::read_curve(path).map_err(|e| match e {
            scramblab::Error::Io(source) => CliError::io(path, source),
            other => CliError::Core(other),
        })?;
        let cls = classify_detailed(
            &curve,
            self.gamma.unwrap_or_default(),
            self.delta.unwrap_or_default(),
            self.i_rs.unwrap_or_default(),
            self.mode.unwrap_or_default(),
        )?;
        let epsilon = self.epsilon.or(cls.params.epsilon_search).unwrap_or(0.0);
        let report = validate_against_theory(&cls.params, epsilon)?;
        let mut text = report.to_string();
        text.push_str(&format!(
            "raw thresholds: b = {}, g = {}{}\n",
            cls.b_raw,
            cls.g_raw,
            if cls.degenerate {
                "; they overlap, b lowered to g - 1 (degenerate)"
            } else {
                ""
            }
        ));
        if self.epsilon.is_none() {
            text.push_str("no --epsilon given; the user comparison uses the searched epsilon\n");
        }
        ctx.write_json("ramp.json", &cls.params)?;
        ctx.write("report.txt", &text)
    }
}

/// Analytic bound curves for several player entropies.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Bounds {
    #[arg(long)]
    pub n: Option<u32>,
    /// Comma-separated player entropies, e.g. 0,2.
    #[arg(long)]
    pub s_list: Option<String>,
    /// Output file name inside --out-dir.
    #[arg(long)]
    pub out: Option<String>,
}

impl Command for Bounds {
    const NAME: &'static str = "bounds";

    fn finalize(mut self) -> CliResult<Self> {
        required(self.n, "n")?;
        let list = parse_list(self.s_list.as_deref().unwrap_or("0"), "s-list")?;
        if list.is_empty() {
            return Err(CliError::config("--s-list is empty"));
        }
        self.s_list = Some(join_list(&list));
        self.out.get_or_insert_with(|| "bounds.csv".into());
        Ok(self)
    }

    fn run(&self, ctx: &mut RunContext) -> CliResult<()> {
        let n = self.n.unwrap_or_default();
        let curves = parse_list(self.s_list.as_deref().unwrap_or("0"), "s-list")?
            .into_iter()
            .map(|s| BoundCurve::new(n, s as u32))
            .collect::<scramblab::Result<Vec<_>>>()?;
        let text = io::bounds_csv_string(&curves)?;
        ctx.write(self.out.as_deref().unwrap_or("bounds.csv"), &text)
    }
}

/// Monte Carlo average purity against the exact Haar average.
///
/// `n` counts the qubits of the operator state, input and output together,
/// so the sampled unitary acts on `n/2` qubits.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct VerifyMoments {
    /// Qubits of the operator state (even; the unitary acts on n/2).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Input qubits in A (default n/4).
    #[arg(long)]
    pub a: Option<usize>,
    /// Output qubits in C (default n/4).
    #[arg(long)]
    pub c: Option<usize>,
    #[arg(long)]
    pub ensemble: Option<EnsembleKind>,
}

impl Command for VerifyMoments {
    const NAME: &'static str = "verify-moments";

    fn finalize(mut self) -> CliResult<Self> {
        let n = *self.n.get_or_insert(4);
        if n < 2 || n % 2 != 0 {
            return Err(CliError::config(format!("--n must be even and ≥ 2, got {n}")));
        }
        self.samples.get_or_insert(400);
        self.seed.get_or_insert(0);
        self.a.get_or_insert(n / 4);
        self.c.get_or_insert(n / 4);
        self.ensemble.get_or_insert(EnsembleKind::Haar);
        Ok(self)
    }

    fn run(&self, ctx: &mut RunContext) -> CliResult<()> {
        let (n, a, c) = (self.n.unwrap_or(4), self.a.unwrap_or(0), self.c.unwrap_or(0));
        let m = n / 2;
        let dims = PartitionDims::qubits(m as u32, a as u32, c as u32)?;
        let exact: Rational = avg_purity_exact(&dims);
        let exact_f = *exact.numer() as f64 / *exact.denom() as f64;
        let approx: f64 = avg_purity_approx(&dims);
        let spec = EnsembleSpec::new(
            self.ensemble.unwrap_or_default(),
            m,
            self.samples.unwrap_or(1),
            self.seed.unwrap_or(0),
        )?;
        let est = purity_mc::<f64>(&spec, a, c)?;
        let z = est.z_against(exact_f);
        ctx.write_json(
            "moments.json",
            &json!({
                "n": n,
                "unitary_qubits": m,
                "a": a,
                "c": c,
                "ensemble": spec.kind,
                "samples": est.samples,
                "seed": spec.seed,
                "exact": exact_f,
                "exact_fraction": exact.to_string(),
                "approx": approx,
                "mc_mean": est.mean,
                "mc_std_error": est.std_error,
                "z": z,
                "within_3sigma": z <= 3.0,
            }),
        )
    }

    fn seed(&self) -> Option<u64> {
        self.seed
    }
}

/// Encode and reconstruct random qutrit secrets with the ((2,3)) scheme.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Qutrit233 {
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn random_qutrit(seed: u64, index: u64) -> [C<f64>; 3] {
    let mut rng = stream_rng(seed, index);
    let mut v = [C::new(0.0, 0.0); 3];
    for z in &mut v {
        *z = C::new(f64::sample_normal(&mut rng), f64::sample_normal(&mut rng));
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.map(|z| z / norm)
}

impl Command for Qutrit233 {
    const NAME: &'static str = "qutrit233";

    fn finalize(mut self) -> CliResult<Self> {
        if *self.trials.get_or_insert(100) == 0 {
            return Err(CliError::config("--trials must be ≥ 1"));
        }
        self.seed.get_or_insert(0);
        Ok(self)
    }

    fn run(&self, ctx: &mut RunContext) -> CliResult<()> {
        let (trials, seed) = (self.trials.unwrap_or(1), self.seed.unwrap_or(0));
        let flat = DensityMatrix::<f64>::maximally_mixed(RegisterLayout::qudits(1, 3)?);
        let mut by_pair: BTreeMap<String, f64> = BTreeMap::new();
        let mut marginal: f64 = 0.0;
        for i in 0..trials {
            let sec = random_qutrit(seed, i as u64);
            let shares = encode233(sec[0], sec[1], sec[2])?;
            for pair in SharePair::ALL {
                let f = reconstruct233(&shares, pair)?.fidelity;
                let e = by_pair.entry(pair.to_string()).or_insert(f64::INFINITY);
                *e = e.min(f);
            }
            for site in 0..3 {
                let rho = shares.state.reduce_ordered(&[site])?;
                marginal = marginal.max(trace_distance(&rho, &flat)?);
            }
        }
        let min_fidelity = by_pair.values().copied().fold(f64::INFINITY, f64::min);
        ctx.write_json(
            "qutrit.json",
            &json!({
                "trials": trials,
                "seed": seed,
                "min_fidelity": min_fidelity,
                "min_fidelity_by_pair": by_pair,
                "max_marginal_trace_distance": marginal,
                "passed": min_fidelity >= 1.0 - 1e-10 && marginal <= 1e-10,
            }),
        )
    }

    fn seed(&self) -> Option<u64> {
        self.seed
    }
}

/// Operator choice for the otoc subcommand.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OtocOps {
    /// One uniformly random Pauli string pair per sample.
    #[default]
    RandomPauli,
    /// Average over every Pauli string pair.
    PauliAverage,
    /// Z on every site of each region.
    Z,
}

impl FromStr for OtocOps {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "random-pauli" => Ok(OtocOps::RandomPauli),
            "pauli-average" => Ok(OtocOps::PauliAverage),
            "z" => Ok(OtocOps::Z),
            other => Err(format!("operators must be random-pauli, pauli-average or z, got '{other}'")),
        }
    }
}

/// OTOCs `F` and `C` of sampled unitaries.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Otoc {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub ensemble: Option<EnsembleKind>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Sites of region A carrying W (comma-separated).
    #[arg(long)]
    pub wa_site: Option<String>,
    /// Sites of region D carrying V (default: all other sites).
    #[arg(long)]
    pub vd_site: Option<String>,
    /// random-pauli, pauli-average or z.
    #[arg(long)]
    pub operators: Option<OtocOps>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Command for Otoc {
    const NAME: &'static str = "otoc";

    fn finalize(mut self) -> CliResult<Self> {
        let n = *self.n.get_or_insert(4);
        self.ensemble.get_or_insert(EnsembleKind::Haar);
        self.samples.get_or_insert(500);
        self.seed.get_or_insert(0);
        self.operators.get_or_insert_default();
        let wa = parse_list(self.wa_site.as_deref().unwrap_or("0"), "wa-site")?;
        let vd = match self.vd_site.as_deref() {
            Some(raw) => parse_list(raw, "vd-site")?,
            None => (0..n).filter(|s| !wa.contains(s)).collect(),
        };
        self.wa_site = Some(join_list(&wa));
        self.vd_site = Some(join_list(&vd));
        Ok(self)
    }

    fn run(&self, ctx: &mut RunContext) -> CliResult<()> {
        let n = self.n.unwrap_or(4);
        let wa = SubsystemMask::new(parse_list(self.wa_site.as_deref().unwrap_or(""), "wa-site")?)?;
        let vd = SubsystemMask::new(parse_list(self.vd_site.as_deref().unwrap_or(""), "vd-site")?)?;
        let spec = EnsembleSpec::new(
            self.ensemble.unwrap_or_default(),
            n,
            self.samples.unwrap_or(1),
            self.seed.unwrap_or(0),
        )?;
        let ops = match self.operators.unwrap_or_default() {
            OtocOps::RandomPauli => OtocOperators::RandomPauli,
            OtocOps::PauliAverage => OtocOperators::PauliAverage,
            OtocOps::Z => {
                let all_z = |k: usize| (0..k).fold(0, |acc, i| acc | 3 << (2 * i));
                OtocOperators::Fixed {
                    w: pauli_string(all_z(wa.len()), wa.len())?,
                    v: pauli_string(all_z(vd.len()), vd.len())?,
                }
            }
        };
        let r = otoc_ensemble::<f64>(&spec, &wa, &vd, &ops)?;
        let mut csv = String::from("sample,F_re,F_im,C\n");
        for s in &r.samples {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                s.sample,
                io::fmt_sig(s.f_re),
                io::fmt_sig(s.f_im),
                io::fmt_sig(s.c)
            ));
        }
        ctx.write("otoc.csv", &csv)?;
        let chaotic: f64 = chaotic_criterion_value(r.d_w as u64, r.d_v as u64);
        let pauli_mean: f64 = haar_pauli_otoc_mean(r.d_w as u64, r.d_v as u64, r.d as u64);
        let z = (r.abs_mean_f - chaotic).abs() / r.std_error;
        ctx.write_json(
            "otoc.json",
            &json!({
                "n": n,
                "ensemble": spec.kind,
                "operators": self.operators,
                "samples": spec.samples,
                "seed": spec.seed,
                "d_a": r.d_w,
                "d_d": r.d_v,
                "mean_F_re": r.mean_f_re,
                "mean_F_im": r.mean_f_im,
                "abs_mean_F": r.abs_mean_f,
                "std_error": r.std_error,
                "mean_C": r.mean_c,
                "chaotic_value": chaotic,
                "haar_pauli_mean": pauli_mean,
                "z_vs_chaotic": z,
                "within_3sigma": z <= 3.0,
            }),
        )
    }

    fn seed(&self) -> Option<u64> {
        self.seed
    }
}

/// Monte Carlo frame potential of an ensemble.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct FramePotential {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub ensemble: Option<EnsembleKind>,
    /// Order t (1 or 2).
    #[arg(long)]
    pub t: Option<u32>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Command for FramePotential {
    const NAME: &'static str = "frame-potential";

    fn finalize(mut self) -> CliResult<Self> {
        self.n.get_or_insert(2);
        self.ensemble.get_or_insert(EnsembleKind::Clifford);
        self.t.get_or_insert(2);
        self.samples.get_or_insert(200);
        self.seed.get_or_insert(0);
        Ok(self)
    }

    fn run(&self, ctx: &mut RunContext) -> CliResult<()> {
        let t = self.t.unwrap_or(2);
        let spec = EnsembleSpec::new(
            self.ensemble.unwrap_or_default(),
            self.n.unwrap_or(2),
            self.samples.unwrap_or(1),
            self.seed.unwrap_or(0),
        )?;
        let (estimate, se) = frame_potential::<f64>(&spec, t)?;
        // Haar value t! once the dimension is at least t.
        let haar = (1..=t).product::<u32>() as f64;
        let z = (estimate - haar).abs() / se;
        ctx.write_json(
            "fp.json",
            &json!({
                "n": spec.n_sites,
                "ensemble": spec.kind,
                "t": t,
                "samples": spec.samples,
                "seed": spec.seed,
                "estimate": estimate,
                "std_error": se,
                "haar_value": haar,
                "z": z,
                "within_3sigma": z <= 3.0,
            }),
        )
    }

    fn seed(&self) -> Option<u64> {
        self.seed
    }
}

/// SVG chart of curves with optional bound overlays.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Plot {
    /// One or more curve CSVs.
    #[arg(long, num_args = 1..)]
    pub curve: Option<Vec<PathBuf>>,
    /// Bounds CSV written by the bounds subcommand.
    #[arg(long)]
    pub bounds: Option<PathBuf>,
    /// Output file name inside --out-dir.
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub title: Option<String>,
}

fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

impl Command for Plot {
    const NAME: &'static str = "plot";

    fn finalize(mut self) -> CliResult<Self> {
        if self.curve.as_ref().is_none_or(Vec::is_empty) {
            return Err(CliError::config("--curve is required"));
        }
        self.out.get_or_insert_with(|| "figure.svg".into());
        self.title
            .get_or_insert_with(|| "Mutual information with the secret vs subsystem size".into());
        Ok(self)
    }

    fn run(&self, ctx: &mut RunContext) -> CliResult<()> {
        let mut curves = Vec::new();
        for path in self.curve.iter().flatten() {
            read_input(path)?;
            let (curve, meta) = io::read_curve(path)?;
            let label = match meta.and_then(|m| m.config) {
                Some(c) => format!(
                    "N={}, s={}, {}, {} samples, subsets {}",
                    c.n, c.s, c.ensemble.kind, c.ensemble.samples, c.subsets
                ),
                None => path.file_stem().map_or("curve".into(), |s| s.to_string_lossy().into_owned()),
            };
            curves.push((label, curve));
        }
        let bounds = match &self.bounds {
            Some(p) => io::parse_bounds_csv(&read_input(p)?)?,
            None => Vec::new(),
        };
        let series: Vec<Series<'_>> = curves
            .iter()
            .map(|(label, curve)| Series {
                label: label.clone(),
                curve,
            })
            .collect();
        let svg = plot::render(self.title.as_deref().unwrap_or_default(), &series, &bounds);
        ctx.write(self.out.as_deref().unwrap_or("figure.svg"), &svg)
    }
}
