use serde::{Deserialize, Serialize};

use super::subsets::{mask_members, subset_plan, SubsetStrategy};
use crate::ensembles::stream_rng;
use crate::error::{Error, Result};
use crate::infotheory::{fidelity, joint_and_product};
use crate::register::{PureState, Role, SubsystemMask};
use crate::scalar::Real;
use crate::stats::ordered_par_try_map;

fn reference_mask<T: Real>(state: &PureState<T>) -> Result<SubsystemMask> {
    let r = state.layout().role_mask(Role::Reference);
    if r.is_empty() {
        return Err(Error::InvalidLayout("state has no reference site".into()));
    }
    Ok(r)
}

/// `F(ρ_RC, ρ_R ⊗ ρ_C)`; one for the empty subsystem.
pub fn decoupling_fidelity<T: Real>(state: &PureState<T>, c: &SubsystemMask) -> Result<T> {
    c.validate(state.layout())?;
    let r = reference_mask(state)?;
    let mem = state.layout().role_mask(Role::Memory);
    if let Some(s) = c.overlap(&r).or_else(|| c.overlap(&mem)) {
        return Err(Error::InvalidMask(format!(
            "site {s} belongs to the reference or the memory"
        )));
    }
    if c.is_empty() {
        return Ok(T::one());
    }
    let (joint, product) = joint_and_product(state, &r, c)?;
    fidelity(&joint, &product)
}

/// Subset with the lowest decoupling fidelity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub sample: usize,
    pub subset: SubsystemMask,
    pub fidelity: f64,
}

/// Outcome of an `l`-scrambling test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScramblingVerdict {
    pub pass: bool,
    pub l: usize,
    pub eps_tol: f64,
    /// Worst subset found; `None` when no nonempty subset has size below `l`.
    pub worst: Option<Witness>,
    pub evaluated: usize,
}

/// Passes iff every evaluated nonempty player subset `C` with `|C| < l`
/// has decoupling fidelity at least `1 − eps_tol` in every sample.
pub fn is_l_scrambling<T: Real>(
    states: &[PureState<T>],
    l: usize,
    eps_tol: f64,
    strategy: SubsetStrategy,
    plan_seed: u64,
) -> Result<ScramblingVerdict> {
    let first = states.first().ok_or_else(|| Error::InvalidParameter("no samples".into()))?;
    let mut players: Vec<usize> = first.layout().role(Role::Secret).to_vec();
    players.extend_from_slice(first.layout().role(Role::Players));
    if l > players.len() {
        return Err(Error::InvalidParameter(format!(
            "l = {l} exceeds the {} players",
            players.len()
        )));
    }
    let per_sample = ordered_par_try_map(states.len(), |i| -> Result<(usize, Option<Witness>)> {
        let plan = subset_plan(players.len(), strategy, &mut stream_rng(plan_seed, i as u64))?;
        let mut worst: Option<Witness> = None;
        let mut count = 0;
        for masks in plan.iter().take(l).skip(1) {
            for &m in masks {
                let c = SubsystemMask::new(mask_members(m).map(|k| players[k]))?;
                let f = decoupling_fidelity(&states[i], &c)?.to_f64_lossy();
                count += 1;
                if worst.as_ref().is_none_or(|w| f < w.fidelity) {
                    worst = Some(Witness {
                        sample: i,
                        subset: c,
                        fidelity: f,
                    });
                }
            }
        }
        Ok((count, worst))
    })?;
    let evaluated = per_sample.iter().map(|p| p.0).sum();
    let worst = per_sample
        .into_iter()
        .filter_map(|p| p.1)
        .fold(None::<Witness>, |acc, w| match acc {
            Some(a) if a.fidelity <= w.fidelity => Some(a),
            _ => Some(w),
        });
    let pass = worst.as_ref().is_none_or(|w| w.fidelity >= 1.0 - eps_tol);
    Ok(ScramblingVerdict {
        pass,
        l,
        eps_tol,
        worst,
        evaluated,
    })
}
