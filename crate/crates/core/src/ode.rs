//! Classical fourth-order Runge–Kutta for the linear equation `u″ = q(x) u`.

/// Integrates `u″ = q(x) u` from `x0` with `u(x0) = u0`, `u′(x0) = du0` and
/// fixed step `dt`. `q_half[j]` must hold `q(x0 + j·dt/2)`, so `q_half.len()`
/// is `2M + 1` for `M` steps. Returns `(u, u′)` at the `M + 1` step nodes.
pub fn integrate_linear(q_half: &[f64], dt: f64, u0: f64, du0: f64) -> (Vec<f64>, Vec<f64>) {
    let steps = (q_half.len() - 1) / 2;
    let mut u = Vec::with_capacity(steps + 1);
    let mut p = Vec::with_capacity(steps + 1);
    let (mut uc, mut pc) = (u0, du0);
    u.push(uc);
    p.push(pc);
    for s in 0..steps {
        let (q0, qm, q1) = (q_half[2 * s], q_half[2 * s + 1], q_half[2 * s + 2]);
        let (k1u, k1p) = (pc, q0 * uc);
        let (k2u, k2p) = (pc + 0.5 * dt * k1p, qm * (uc + 0.5 * dt * k1u));
        let (k3u, k3p) = (pc + 0.5 * dt * k2p, qm * (uc + 0.5 * dt * k2u));
        let (k4u, k4p) = (pc + dt * k3p, q1 * (uc + dt * k3u));
        uc += dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        pc += dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        u.push(uc);
        p.push(pc);
    }
    (u, p)
}
