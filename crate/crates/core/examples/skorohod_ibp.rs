//! Skorohod integrals by integration by parts, and their second moments.

use wicklab::gauss_kernel::TimePoint;
use wicklab::skorohod::{
    boundary_increment, second_moment, second_moment_parts, skorohod_integral, time_integral, CoeffFn, Coordinate, IntegrandSpec, IntegrandTerm,
    QuadratureConfig,
};

fn main() -> wicklab::Result<()> {
    let quad = QuadratureConfig::default();
    let tau = TimePoint::rational(2, 5)?;

    // u_s = s W_tau^{⋄2} + e^s W_s ⋄ W_tau
    let u = IntegrandSpec::new(
        vec![tau],
        vec![IntegrandTerm { coeff: CoeffFn::monomial(1.0, 1), l1: 0, l: vec![2] }, IntegrandTerm { coeff: CoeffFn::exp(1.0, 1.0), l1: 1, l: vec![1] }],
    )?;
    println!("integrand as JSON: {}", u.to_json());
    assert_eq!(IntegrandSpec::from_json(&u.to_json())?, u);

    let y = skorohod_integral(&u)?;
    let parts = second_moment_parts(&y, &quad)?;
    println!("E[Y^2] = {:.12}  (boundary {:.6}, cross {:.6}, double {:.6})", parts.total(), parts.boundary, parts.cross, parts.double);

    // the fixed-time part on its own: ∫ s^2 ds 2 tau^2 + 4 tau (∫_0^tau s ds)^2
    let fixed = IntegrandSpec::new(vec![tau], vec![IntegrandTerm { coeff: CoeffFn::monomial(1.0, 1), l1: 0, l: vec![2] }])?;
    let t = tau.value();
    let closed = 2.0 * t * t / 3.0 + 4.0 * t * (t * t / 2.0).powi(2);
    println!("E[δ(s W_tau^⋄2)^2] = {:.12}, closed form {closed:.12}", second_moment(&skorohod_integral(&fixed)?, &quad)?);

    // Itô formula in Wick coordinates: f(1) - f(0) = δ(∂_x f) + ∫ L f ds
    let f = u.clone();
    let lhs = boundary_increment(&f)?;
    let rhs = skorohod_integral(&f.partial_x(Coordinate::Running)?)?.add(&time_integral(&f.wick_l()))?;
    println!("Itô residual second moment: {:.2e}", second_moment(&lhs.sub(&rhs)?, &quad)?);

    // stopping at a horizon inside [0, 1]
    let stopped = u.with_horizon(TimePoint::rational(1, 2)?)?;
    println!("E[(∫_0^1/2 u dW)^2] = {:.12}", second_moment(&skorohod_integral(&stopped)?, &quad)?);
    Ok(())
}
