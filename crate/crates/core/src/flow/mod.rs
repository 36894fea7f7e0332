//! Vector-field models, integration, the time-tau map and trapping regions.

pub mod integrate;
pub mod model;
pub mod trapping;

pub use integrate::{integrate, time_tau_map, IntegratorConfig, Method, Stepper, Trajectory};
pub use model::{eval_field, eval_jacobian, LorenzParams, Model, NormalFormParams, VectorField};
pub use trapping::{trapping_box, TrappingBox};

use crate::error::{contract, Result};

/// Samples the trajectory of `x0` on `[t_transient, t_transient + t_collect]`.
///
/// Leaving twice the trapping box aborts with a divergence error.
pub fn omega_limit_sample(
    model: &Model,
    x0: &[f64],
    t_transient: f64,
    t_collect: f64,
    samples: usize,
    cfg: &IntegratorConfig,
) -> Result<Vec<Vec<f64>>> {
    if !(t_transient > 0.0 && t_collect > 0.0) || samples == 0 {
        return Err(contract("omega-limit sampling needs positive times and sample count"));
    }
    let guard = trapping_box(model)?.scaled(2.0);
    let guard = if guard.contains(x0) { guard } else { guard.hull(&TrappingBox { lo: x0.to_vec(), hi: x0.to_vec() }).scaled(1.1) };
    let mut st = Stepper::new(model, 0.0, x0, *cfg)?.with_guard(guard.lo, guard.hi);
    st.advance_to(t_transient)?;
    let dt = t_collect / samples as f64;
    let mut out = Vec::with_capacity(samples + 1);
    let mut buf = vec![0.0; x0.len()];
    for i in 0..=samples {
        let t = t_transient + i as f64 * dt;
        while st.t() < t {
            st.step(t_transient + t_collect)?;
        }
        st.dense_output(t, &mut buf);
        out.push(buf.clone());
    }
    Ok(out)
}
