//! Branch-and-bound feasibility on a small nonconvex problem: a point inside
//! the unit disc but outside a smaller disc, and above the hyperbola `xy = 0.2`.

use qrm::qfeas::{solve, QuadConstraint, Rect, SolverConfig};

fn main() {
    // x^2 + y^2 - 1 < 0
    let inside = QuadConstraint::new(2, &[1.0, 0.0, 0.0, 1.0], &[0.0, 0.0], -1.0).unwrap();
    // 0.81 - x^2 - y^2 < 0
    let outside = QuadConstraint::new(2, &[-1.0, 0.0, 0.0, -1.0], &[0.0, 0.0], 0.81).unwrap();
    // 0.2 - xy < 0
    let hyperbola = QuadConstraint::new(2, &[0.0, -0.5, -0.5, 0.0], &[0.0, 0.0], 0.2).unwrap();
    let bx = Rect::centered(2, 2.0).unwrap();
    let cfg = SolverConfig::with_depth(40);

    let r = solve(
        &[inside.clone(), outside.clone(), hyperbola.clone()],
        &bx,
        &cfg,
    )
    .unwrap();
    println!(
        "annulus and xy > 0.2: feasible {} after {} rectangles, witness {:?}",
        r.feasible, r.rectangles_explored, r.witness
    );

    // xy > 0.6 is out of reach inside the unit disc (max is 0.5)
    let steep = QuadConstraint::new(2, &[0.0, -0.5, -0.5, 0.0], &[0.0, 0.0], 0.6).unwrap();
    let r = solve(&[inside, outside.clone(), steep], &bx, &cfg).unwrap();
    println!(
        "annulus and xy > 0.6: feasible {} after {} rectangles",
        r.feasible, r.rectangles_explored
    );
    println!(
        "constraint forms: {:?} {:?}",
        outside.form(),
        hyperbola.form()
    );
}
