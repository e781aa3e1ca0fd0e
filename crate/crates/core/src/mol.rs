//! Method-of-lines time integration. Physics thorns register (evolved, rhs) pairs and
//! schedule their right-hand sides in `MoL_CalcRHS`; boundary fixups go in `MoL_PostStep`.

use crate::ccl::GroupKind;
use crate::flesh::{run_group, FleshError, RoutineError, SimulationState, VarId};
use crate::grid::{Partition, VarStorage};
use rayon::prelude::*;
use std::collections::BTreeMap;

pub const CALC_RHS: &str = "MoL_CalcRHS";
pub const POST_STEP: &str = "MoL_PostStep";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk2,
    Rk4,
    Icn,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rk2" => Ok(Method::Rk2),
            "rk4" => Ok(Method::Rk4),
            "icn" => Ok(Method::Icn),
            other => Err(format!("unknown integration method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedRegistration {
    pub evolved: VarId,
    pub rhs: VarId,
    pub evolved_name: String,
    pub rhs_name: String,
    pub thorn: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MolError {
    #[error("UnknownVariable: {0}")]
    UnknownVariable(String),
    #[error("AlreadyRegistered: {0}")]
    AlreadyRegistered(String),
    #[error("TimelevelMismatch: {name} has {timelevels} timelevel(s), evolved variables need at least 2")]
    TimelevelMismatch { name: String, timelevels: usize },
    #[error("ShapeMismatch: {evolved} and {rhs} differ in kind")]
    ShapeMismatch { evolved: String, rhs: String },
    #[error("NoRegistrations: no evolved variables are registered")]
    NoRegistrations,
    #[error(transparent)]
    Flesh(#[from] FleshError),
}

impl From<MolError> for RoutineError {
    fn from(e: MolError) -> Self {
        match e {
            MolError::Flesh(f) => f.into(),
            other => RoutineError::msg(other.to_string()),
        }
    }
}

struct Scratch {
    base: Vec<f64>,
    acc: Vec<f64>,
}

/// MoL's private state, kept in the simulation's extensions.
#[derive(Default)]
pub struct MolState {
    registrations: Vec<EvolvedRegistration>,
    /// Per partition, per registration.
    scratch: Option<Vec<Vec<Scratch>>>,
    steps: u64,
    rhs_evaluations: u64,
}

impl MolState {
    pub fn registrations(&self) -> &[EvolvedRegistration] {
        &self.registrations
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn rhs_evaluations(&self) -> u64 {
        self.rhs_evaluations
    }
}

/// Records that `evolved` is advanced using `rhs`, on behalf of the thorn whose routine is running.
pub fn register_evolved(state: &mut SimulationState, evolved: &str, rhs: &str) -> Result<(), MolError> {
    let e = state
        .registry
        .lookup(evolved)
        .ok_or_else(|| MolError::UnknownVariable(evolved.to_string()))?
        .clone();
    let r = state
        .registry
        .lookup(rhs)
        .ok_or_else(|| MolError::UnknownVariable(rhs.to_string()))?
        .clone();
    if e.timelevels < 2 {
        return Err(MolError::TimelevelMismatch {
            name: e.full_name,
            timelevels: e.timelevels,
        });
    }
    if e.kind != r.kind || e.id == r.id {
        return Err(MolError::ShapeMismatch {
            evolved: e.full_name,
            rhs: r.full_name,
        });
    }
    let thorn = state.current_thorn().unwrap_or_default().to_string();
    let mol = state.ext.get_or_default::<MolState>();
    if mol.registrations.iter().any(|x| x.evolved == e.id) {
        return Err(MolError::AlreadyRegistered(e.full_name));
    }
    mol.registrations.push(EvolvedRegistration {
        evolved: e.id,
        rhs: r.id,
        evolved_name: e.full_name,
        rhs_name: r.full_name,
        thorn,
    });
    mol.scratch = None;
    Ok(())
}

/// Registered variables grouped by registering thorn.
pub fn couple_check(state: &SimulationState) -> Vec<(String, Vec<String>)> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    if let Some(mol) = state.ext.get::<MolState>() {
        for r in &mol.registrations {
            out.entry(r.thorn.clone()).or_default().push(r.evolved_name.clone());
        }
    }
    out.into_iter().collect()
}

pub fn registrations(state: &SimulationState) -> Vec<EvolvedRegistration> {
    state
        .ext
        .get::<MolState>()
        .map(|m| m.registrations.clone())
        .unwrap_or_default()
}

/// Advances every registered variable by one time step with the configured method.
pub fn step(state: &mut SimulationState) -> Result<(), MolError> {
    let mut mol = state.ext.take::<MolState>().unwrap_or_default();
    let result = step_with(state, &mut mol);
    state.ext.insert(mol);
    result
}

fn evolved_grid_slots(state: &SimulationState, regs: &[EvolvedRegistration]) -> Vec<usize> {
    regs.iter()
        .filter(|r| state.registry.get(r.evolved).kind == GroupKind::GridFunction)
        .map(|r| r.evolved.0)
        .collect()
}

/// Evolved level 0 (mutable) and rhs level 0 of one registration on one partition.
fn pair<'a>(data: &'a mut [VarStorage], r: &EvolvedRegistration) -> (&'a mut [f64], &'a [f64]) {
    let (e, h) = (r.evolved.0, r.rhs.0);
    if e < h {
        let (lo, hi) = data.split_at_mut(h);
        (&mut lo[e].levels[0], &hi[0].levels[0])
    } else {
        let (lo, hi) = data.split_at_mut(e);
        (&mut hi[0].levels[0], &lo[h].levels[0])
    }
}

fn update<F>(state: &mut SimulationState, regs: &[EvolvedRegistration], scratch: &mut [Vec<Scratch>], f: F)
where
    F: Fn(&mut Scratch, &mut [f64], &[f64]) + Sync,
{
    state
        .grid
        .partitions
        .par_iter_mut()
        .zip(scratch.par_iter_mut())
        .for_each(|(p, s): (&mut Partition, &mut Vec<Scratch>)| {
            for (r, s) in regs.iter().zip(s.iter_mut()) {
                let (u, rhs) = pair(&mut p.data, r);
                f(s, u, rhs);
            }
        });
}

fn post_stage(state: &mut SimulationState, slots: &[usize]) -> Result<(), MolError> {
    state.grid.sync_ghosts(slots);
    run_group(state, POST_STEP)?;
    Ok(())
}

fn calc_rhs(state: &mut SimulationState, mol: &mut MolState) -> Result<(), MolError> {
    mol.rhs_evaluations += 1;
    run_group(state, CALC_RHS)?;
    Ok(())
}

fn step_with(state: &mut SimulationState, mol: &mut MolState) -> Result<(), MolError> {
    if mol.registrations.is_empty() {
        return Err(MolError::NoRegistrations);
    }
    let method: Method = state
        .params
        .keyword("mol::method")?
        .parse()
        .map_err(|reason| FleshError::BadValue {
            name: "mol::method".into(),
            reason,
        })?;
    let dt = state.params.real("mol::dt")?;
    let icn_iterations = state.params.int("mol::icn_iterations")? as usize;
    let regs = mol.registrations.clone();
    let slots = evolved_grid_slots(state, &regs);

    let mut scratch = match mol.scratch.take() {
        Some(s) => s,
        None => {
            // first step since construction: ghosts of a restored state still need their boundary
            post_stage(state, &slots)?;
            state
                .grid
                .partitions
                .iter()
                .map(|p| {
                    regs.iter()
                        .map(|r| {
                            let n = p.data[r.evolved.0].levels[0].len();
                            Scratch {
                                base: vec![0.0; n],
                                acc: vec![0.0; n],
                            }
                        })
                        .collect()
                })
                .collect()
        }
    };
    update(state, &regs, &mut scratch, |s, u, _| {
        s.base.copy_from_slice(u);
        s.acc.fill(0.0);
    });

    let result = integrate(state, mol, method, dt, icn_iterations, &regs, &slots, &mut scratch);
    if result.is_ok() {
        rotate(state, &regs, &mut scratch);
        mol.steps += 1;
    }
    mol.scratch = Some(scratch);
    result
}

#[allow(clippy::too_many_arguments)]
fn integrate(
    state: &mut SimulationState,
    mol: &mut MolState,
    method: Method,
    dt: f64,
    icn_iterations: usize,
    regs: &[EvolvedRegistration],
    slots: &[usize],
    scratch: &mut [Vec<Scratch>],
) -> Result<(), MolError> {
    match method {
        Method::Rk2 | Method::Rk4 => {
            // (weight of this stage's rhs, offset of the next stage), None on the last stage
            let tableau: &[(f64, Option<f64>)] = if method == Method::Rk4 {
                &[
                    (1.0 / 6.0, Some(0.5)),
                    (1.0 / 3.0, Some(0.5)),
                    (1.0 / 3.0, Some(1.0)),
                    (1.0 / 6.0, None),
                ]
            } else {
                &[(0.0, Some(0.5)), (1.0, None)]
            };
            for &(w, next) in tableau {
                calc_rhs(state, mol)?;
                update(state, regs, scratch, |s, u, k| {
                    if w != 0.0 {
                        for (a, &k) in s.acc.iter_mut().zip(k) {
                            *a += w * k;
                        }
                    }
                    match next {
                        Some(c) => {
                            for ((u, &b), &k) in u.iter_mut().zip(&s.base).zip(k) {
                                *u = b + c * dt * k;
                            }
                        }
                        None => {
                            for ((u, &b), &a) in u.iter_mut().zip(&s.base).zip(&s.acc) {
                                *u = b + dt * a;
                            }
                        }
                    }
                });
                post_stage(state, slots)?;
            }
        }
        Method::Icn => {
            for k in 1..=icn_iterations {
                calc_rhs(state, mol)?;
                let last = k == icn_iterations;
                update(state, regs, scratch, |s, u, rhs| {
                    for ((u, &b), &r) in u.iter_mut().zip(&s.base).zip(rhs) {
                        let v = b + dt * r;
                        *u = if last { v } else { 0.5 * (b + v) };
                    }
                });
                post_stage(state, slots)?;
            }
        }
    }
    Ok(())
}

/// Level 0 holds the new solution; the step's starting data becomes level 1 and older levels shift.
fn rotate(state: &mut SimulationState, regs: &[EvolvedRegistration], scratch: &mut [Vec<Scratch>]) {
    state
        .grid
        .partitions
        .par_iter_mut()
        .zip(scratch.par_iter_mut())
        .for_each(|(p, s)| {
            for (r, s) in regs.iter().zip(s.iter_mut()) {
                let levels = &mut p.data[r.evolved.0].levels;
                let new = std::mem::replace(&mut levels[0], std::mem::take(&mut s.base));
                s.base = levels.pop().unwrap();
                levels.insert(0, new);
            }
        });
}
