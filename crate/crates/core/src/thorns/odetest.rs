//! Scalar test ODE `u' = lambda u`.

use crate::flesh::{LocalCtx, Routine, RoutineError, SimulationState, ThornLibrary};
use crate::mol::register_evolved;

pub const THORN: &str = "ODETest";

pub fn install(lib: &mut ThornLibrary) {
    lib.add_routine(THORN, "ODETest_Register", Routine::global(register))
        .add_routine(THORN, "ODETest_Init", Routine::local(init))
        .add_routine(THORN, "ODETest_RHS", Routine::local(rhs));
}

fn register(state: &mut SimulationState) -> Result<(), RoutineError> {
    register_evolved(state, "odetest::u", "odetest::u_rhs")?;
    Ok(())
}

fn init(ctx: &mut LocalCtx<'_>) -> Result<(), RoutineError> {
    let u0 = ctx.params().real("odetest::u0")?;
    let (_, mut w) = ctx.fields(&[], &["odetest::u"])?;
    w[0][0] = u0;
    Ok(())
}

fn rhs(ctx: &mut LocalCtx<'_>) -> Result<(), RoutineError> {
    let lambda = ctx.params().real("odetest::lambda")?;
    let (r, mut w) = ctx.fields(&["odetest::u"], &["odetest::u_rhs"])?;
    w[0][0] = lambda * r[0][0];
    Ok(())
}
