//! Scalar wave equation in first-order form: `phi_t = pi`, `pi_t = c^2 lap(phi)`.

use crate::flesh::{LocalCtx, Routine, RoutineError, SimulationState, ThornLibrary};
use crate::grid::{apply_boundary_local, BoundaryCondition, BoundaryTarget};
use crate::mol::register_evolved;
use std::f64::consts::PI;

pub const THORN: &str = "WaveToy";

pub fn install(lib: &mut ThornLibrary) {
    lib.add_routine(THORN, "WaveToy_Register", Routine::global(register))
        .add_routine(THORN, "WaveToy_CheckCFL", Routine::global(check_cfl))
        .add_routine(THORN, "WaveToy_InitialData", Routine::local(initial_data))
        .add_routine(THORN, "WaveToy_RHS", Routine::local(rhs))
        .add_routine(THORN, "WaveToy_Boundary", Routine::local(boundary));
}

fn register(state: &mut SimulationState) -> Result<(), RoutineError> {
    register_evolved(state, "wavetoy::phi", "wavetoy::phi_rhs")?;
    register_evolved(state, "wavetoy::pi", "wavetoy::pi_rhs")?;
    Ok(())
}

/// Warns when `c dt` exceeds the explicit stability bound `h / sqrt(dims)`.
fn check_cfl(state: &mut SimulationState) -> Result<(), RoutineError> {
    let (Ok(c), Ok(dt)) = (state.params.real("wavetoy::c"), state.params.real("mol::dt")) else {
        return Ok(());
    };
    let spec = &state.grid.spec;
    let h = (0..spec.dims).map(|a| spec.h(a)).fold(f64::INFINITY, f64::min);
    let bound = h / (spec.dims as f64).sqrt();
    if c * dt > bound {
        state.note(format!(
            "WaveToy: CFL bound violated: c*dt = {} exceeds h/sqrt(dims) = {bound}",
            c * dt
        ));
    }
    Ok(())
}

/// Standing wave `A prod sin(2 pi x_a)` or Gaussian `A exp(-|x - x0|^2 / sigma^2)`, with `pi = 0`.
pub fn initial_value(mode: &str, amplitude: f64, x0: f64, sigma: f64, x: &[f64]) -> f64 {
    match mode {
        "gaussian" => {
            let r2: f64 = x.iter().map(|&xi| (xi - x0) * (xi - x0)).sum();
            amplitude * (-r2 / (sigma * sigma)).exp()
        }
        _ => x.iter().fold(amplitude, |acc, &xi| acc * (2.0 * PI * xi).sin()),
    }
}

fn initial_data(ctx: &mut LocalCtx<'_>) -> Result<(), RoutineError> {
    let p = ctx.params();
    let amplitude = p.real("wavetoy::amplitude")?;
    let mode = p.keyword("wavetoy::mode")?.to_string();
    let x0 = p.real("wavetoy::x0")?;
    let sigma = p.real("wavetoy::sigma")?;
    if mode == "gaussian" && sigma <= 0.0 {
        return Err(RoutineError::msg(format!("BadParameter: wavetoy::sigma = {sigma} must be positive")));
    }
    let grid = ctx.grid().clone();
    let layout = ctx.layout();
    let (_, mut w) = ctx.fields(&[], &["wavetoy::phi", "wavetoy::pi"])?;
    let mut x = vec![0.0; grid.dims];
    for (off, g) in layout.interior_points() {
        for (a, xa) in x.iter_mut().enumerate() {
            *xa = grid.coord(a, g[a]);
        }
        w[0][off] = initial_value(&mode, amplitude, x0, sigma, &x);
        w[1][off] = 0.0;
    }
    Ok(())
}

fn rhs(ctx: &mut LocalCtx<'_>) -> Result<(), RoutineError> {
    let c = ctx.params().real("wavetoy::c")?;
    let grid = ctx.grid().clone();
    let layout = ctx.layout();
    let (r, mut w) = ctx.fields(&["wavetoy::phi", "wavetoy::pi"], &["wavetoy::phi_rhs", "wavetoy::pi_rhs"])?;
    let (phi, pi) = (r[0], r[1]);
    let c2 = c * c;
    let axes: Vec<(usize, f64)> = (0..grid.dims)
        .map(|a| (layout.stride(a), 1.0 / (grid.h(a) * grid.h(a))))
        .collect();
    for (off, _) in layout.interior_points() {
        w[0][off] = pi[off];
        let mut lap = 0.0;
        for &(s, inv_h2) in &axes {
            lap += (phi[off - s] - 2.0 * phi[off] + phi[off + s]) * inv_h2;
        }
        w[1][off] = c2 * lap;
    }
    Ok(())
}

fn boundary(ctx: &mut LocalCtx<'_>) -> Result<(), RoutineError> {
    let condition = match ctx.params().keyword("wavetoy::bound")? {
        "radiative" => BoundaryCondition::Radiative,
        _ => BoundaryCondition::Reflective,
    };
    let mut targets = Vec::new();
    for name in ["wavetoy::phi", "wavetoy::pi"] {
        let h = ctx.handle(name)?;
        targets.push(BoundaryTarget {
            slot: h.id.0,
            parity: h.parity,
            timelevels: h.timelevels,
        });
    }
    apply_boundary_local(ctx.partition_mut(), &targets, condition).map_err(|e| RoutineError::msg(e.to_string()))
}
