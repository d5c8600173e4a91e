//! End-to-end acceptance checks, one `PASS`/`FAIL` line per criterion.
//!
//! Runs as a plain binary (`harness = false`). Pass criterion numbers as
//! arguments to run a subset: `cargo test --test acceptance -- 2 7`.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qrm::edc::{
    derive_region_labels, region_adjacency, GeometricImages, Point2, RegionId, RegionLabeling,
    StateSet, BOOTSTRAP_GRID,
};
use qrm::measurement::{
    measure_triple, observe_world, LandmarkId, ObserveOptions, TripleMeasurement, TripleObservation,
};
use qrm::nav::{brute_force_rng, estimate_rng, navigate, nearest_landmark, NavOptions};
use qrm::operators::{
    apply_inverse, apply_left, shipped_tables, solve_composition_cell, CellOutcome,
    CompositionTable, Frame, UnaryTables, COMPOSITION_ANCHORS,
};
use qrm::qfeas::{lower_bound, Form, QuadConstraint, Rect, SolverConfig, MAX_DIM};
use qrm::qmap::QualMap;
use qrm::sim::{
    gen_world, run_mc, run_sim, CampaignConfig, SimOptions, Timing, World, WorldConfig,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn ids(v: &[u8]) -> StateSet {
    StateSet::from_ids(v)
}

fn table() -> &'static CompositionTable {
    &shipped_tables().0
}

fn labeling() -> &'static RegionLabeling {
    &shipped_tables().1
}

fn c1_labeling() -> Outcome {
    let t = Instant::now();
    let derived = match derive_region_labels() {
        Ok(l) => l,
        Err(e) => return outcome(false, format!("bootstrap failed: {e}")),
    };
    let elapsed = t.elapsed();
    let images = GeometricImages::sample(&derived, BOOTSTRAP_GRID);
    let unary = images.matches(UnaryTables::printed());
    let same = derived == *labeling();
    outcome(
        unary && same && elapsed < Duration::from_secs(60),
        format!("unique labeling, unary tables match: {unary}, equals shipped labeling: {same}, {elapsed:.1?} (limit 60s)"),
    )
}

fn c2_worked_example() -> Outcome {
    let lhs = table().compose(apply_left(ids(&[6, 7])), apply_inverse(ids(&[16])));
    let expected = ids(&[1, 5, 11, 12, 17, 18, 19, 20]);
    let mut bad = Vec::new();
    for (s1, s2, entry) in COMPOSITION_ANCHORS {
        let got = table().entry(RegionId::new(s1).unwrap(), RegionId::new(s2).unwrap());
        if got != ids(entry) {
            bad.push(format!("({s1},{s2}) = {got}"));
        }
    }
    outcome(
        lhs == expected && bad.is_empty(),
        format!("closure {lhs}, anchor mismatches {bad:?}"),
    )
}

fn random_point(rng: &mut ChaCha8Rng, half: f64) -> Point2 {
    Point2::new(rng.gen_range(-half..half), rng.gen_range(-half..half))
}

fn c3_composition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut checked, mut failures) = (0, 0);
    while checked < 1000 {
        let [a, b, c, d] = std::array::from_fn(|_| random_point(&mut rng, 10.0));
        let l = labeling();
        let (Ok(s1), Ok(s2), Ok(s3)) = (
            l.region_of_points(a, b, c),
            l.region_of_points(b, c, d),
            l.region_of_points(a, b, d),
        ) else {
            continue;
        };
        checked += 1;
        if !table().entry(s1, s2).contains(s3) {
            failures += 1;
        }
    }

    // re-solve a random sample of cells and extrapolate the generation time
    let cfg = SolverConfig {
        max_depth: table().meta.depth,
        max_rectangles: 50_000,
        ..SolverConfig::default()
    };
    let sample = 160;
    let t = Instant::now();
    let mut disagreements = 0;
    for _ in 0..sample {
        let [s1, s2, s3] = std::array::from_fn(|_| RegionId::from_index(rng.gen_range(0..20)));
        let out = solve_composition_cell(
            labeling(),
            s1,
            s2,
            s3,
            &cfg,
            table().meta.bound,
            &Frame::SEQUENCE,
        )
        .unwrap();
        if (out != CellOutcome::Infeasible) != table().entry(s1, s2).contains(s3) {
            disagreements += 1;
        }
    }
    let estimate = t.elapsed().as_secs_f64() * 8000.0 / sample as f64;
    let exceeded = table().budget_exceeded.len();
    outcome(
        failures == 0 && disagreements == 0 && exceeded == 0 && estimate < 7200.0,
        format!(
            "{failures} failures in {checked} quadruples; {disagreements} of {sample} re-solved cells disagree; \
             {exceeded} budget-limited cells; estimated generation {estimate:.0}s on this machine (limit 7200s)"
        ),
    )
}

fn c4_measurement() -> Outcome {
    let t = Instant::now();
    let cfg = SolverConfig::with_depth(30);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut checked, mut misses, mut unresolved, mut max_states) = (0, 0, 0, 0);
    while checked < 100_000 {
        let [cam, a, b, c] = std::array::from_fn(|_| random_point(&mut rng, 10.0));
        let Ok(truth) = labeling().region_of_points(a, b, c) else {
            continue;
        };
        let Ok(obs) = TripleObservation::from_geometry(cam, [1, 2, 3], [a, b, c]) else {
            continue;
        };
        let m = measure_triple(&obs, labeling(), &cfg).unwrap();
        checked += 1;
        if !m.states.contains(truth) {
            misses += 1;
        }
        if !m.unresolved.is_empty() {
            unresolved += 1;
        }
        max_states = max_states.max(m.states.len());
    }
    let elapsed = t.elapsed();
    outcome(
        misses == 0 && elapsed < Duration::from_secs(1800),
        format!(
            "{misses} misses in {checked} measurements ({unresolved} with budget-limited states, at most {max_states} \
             states), {elapsed:.0?} (limit 30min)"
        ),
    )
}

/// Exact minimum of a box-constrained quadratic: every face of the box,
/// stationary point of the restriction when it is unique and inside.
fn exact_min(c: &QuadConstraint, r: &Rect) -> f64 {
    let n = c.dim;
    let mut best = f64::INFINITY;
    for code in 0..3usize.pow(n as u32) {
        // 0 = lower, 1 = upper, 2 = free
        let choice: Vec<usize> = (0..n).map(|i| code / 3usize.pow(i as u32) % 3).collect();
        let free: Vec<usize> = (0..n).filter(|&i| choice[i] == 2).collect();
        let mut x = [0.0; MAX_DIM];
        for i in 0..n {
            x[i] = match choice[i] {
                0 => r.lower[i],
                1 => r.upper[i],
                _ => 0.0,
            };
        }
        if !free.is_empty() {
            // 2 A_ff x_f = -(b_f + 2 A_f,fixed x_fixed)
            let k = free.len();
            let mut m = vec![vec![0.0; k + 1]; k];
            for (row, &i) in free.iter().enumerate() {
                for (col, &j) in free.iter().enumerate() {
                    m[row][col] = 2.0 * c.a[i][j];
                }
                let fixed: f64 = (0..n)
                    .filter(|j| !free.contains(j))
                    .map(|j| 2.0 * c.a[i][j] * x[j])
                    .sum();
                m[row][k] = -(c.b[i] + fixed);
            }
            let Some(sol) = gauss(m) else { continue };
            let inside = free
                .iter()
                .zip(&sol)
                .all(|(&i, &v)| v >= r.lower[i] && v <= r.upper[i]);
            if !inside {
                continue;
            }
            for (&i, v) in free.iter().zip(sol) {
                x[i] = v;
            }
        }
        best = best.min(c.eval(&x[..n]));
    }
    best
}

fn gauss(mut m: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let k = m.len();
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        for row in 0..k {
            if row != col {
                let f = m[row][col] / m[col][col];
                for j in col..=k {
                    m[row][j] -= f * m[col][j];
                }
            }
        }
    }
    Some((0..k).map(|i| m[i][k] / m[i][i]).collect())
}

fn random_constraint(rng: &mut ChaCha8Rng, form: Form) -> QuadConstraint {
    let dim = match form {
        Form::Linear | Form::DiagonalQuadratic => rng.gen_range(1..=MAX_DIM),
        _ => rng.gen_range(2..=MAX_DIM),
    };
    let coef = |rng: &mut ChaCha8Rng| {
        let v: f64 = rng.gen_range(-3.0..3.0);
        if v.abs() < 0.1 {
            1.0
        } else {
            v
        }
    };
    let mut a = vec![0.0; dim * dim];
    let squared = rng.gen_range(0..dim);
    for i in 0..dim {
        let diag = match form {
            Form::DiagonalQuadratic | Form::General => true,
            Form::SingleCross => i == squared,
            _ => false,
        };
        if diag {
            a[i * dim + i] = coef(rng);
        }
    }
    if matches!(form, Form::Bilinear | Form::SingleCross | Form::General) {
        for i in 0..dim {
            for j in i + 1..dim {
                let v = if rng.gen_bool(0.7) || (i, j) == (0, 1) {
                    coef(rng)
                } else {
                    0.0
                };
                a[i * dim + j] = v;
                a[j * dim + i] = v;
            }
        }
    }
    let b: Vec<f64> = (0..dim).map(|_| coef(rng)).collect();
    let q = QuadConstraint::new(dim, &a, &b, rng.gen_range(-5.0..5.0)).unwrap();
    assert_eq!(q.form(), form);
    q
}

fn random_rect(rng: &mut ChaCha8Rng, dim: usize) -> Rect {
    let lo: Vec<f64> = (0..dim).map(|_| rng.gen_range(-4.0..4.0)).collect();
    let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0.05..4.0)).collect();
    Rect::new(&lo, &hi).unwrap()
}

fn c5_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let forms = [
        Form::Linear,
        Form::Bilinear,
        Form::DiagonalQuadratic,
        Form::SingleCross,
        Form::General,
    ];
    let (mut invalid, mut inexact, mut worst_gap) = (0, 0, 0.0f64);
    for n in 0..10_000 {
        let form = forms[n % forms.len()];
        let c = random_constraint(&mut rng, form);
        let r = random_rect(&mut rng, c.dim);
        let lb = lower_bound(&c, &r);
        let truth = exact_min(&c, &r);
        // sampled points can only confirm the bound from above
        let sampled = (0..64)
            .map(|_| {
                let x: Vec<f64> = (0..c.dim)
                    .map(|i| rng.gen_range(r.lower[i]..=r.upper[i]))
                    .collect();
                c.eval(&x)
            })
            .fold(truth, f64::min);
        if lb > sampled + 1e-9 {
            invalid += 1;
        }
        if form != Form::General && (lb - truth).abs() > 1e-6 {
            inexact += 1;
            worst_gap = worst_gap.max((lb - truth).abs());
        }
    }
    outcome(
        invalid == 0 && inexact == 0,
        format!("10000 pairs: {invalid} bounds above the minimum, {inexact} inexact for forms 1-4 (worst {worst_gap:.2e})"),
    )
}

fn desk_world() -> WorldConfig {
    WorldConfig {
        landmarks: 15,
        images: 30,
        ..WorldConfig::default()
    }
}

fn c6_simulation() -> Outcome {
    let world = gen_world(&desk_world(), 1);
    let adjacency = region_adjacency(labeling(), 500);
    let opts = SimOptions {
        timing: Timing::Off,
        ..SimOptions::default()
    };
    let run = run_sim(&world, labeling(), table(), &adjacency, &opts, 0).unwrap();
    let removed: Vec<f64> = run.rows.iter().map(|r| r.removed_pct).collect();
    let monotone = removed.windows(2).all(|w| w[1] >= w[0]);
    let first = removed[0];
    outcome(
        run.truth_violations == 0 && monotone && first >= 50.0,
        format!(
            "{} lost true states over {} measurements, removed monotone: {monotone}, first step {first:.1}% final {:.1}%",
            run.truth_violations,
            run.measurements,
            removed.last().unwrap()
        ),
    )
}

fn c7_order() -> Outcome {
    let world = gen_world(
        &WorldConfig {
            landmarks: 10,
            images: 20,
            ..WorldConfig::default()
        },
        7,
    );
    let cfg = SolverConfig::with_depth(30);
    let mut measurements: Vec<TripleMeasurement> = Vec::new();
    'outer: for &wp in &world.waypoints {
        for obs in observe_world(
            wp,
            &world.landmarks,
            &ObserveOptions {
                n_nearest: 6,
                ..Default::default()
            },
        )
        .unwrap()
        {
            measurements.push(measure_triple(&obs, labeling(), &cfg).unwrap());
            if measurements.len() == 200 {
                break 'outer;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let dumps: BTreeSet<String> = (0..5)
        .map(|_| {
            measurements.shuffle(&mut rng);
            let mut map = QualMap::new(table().clone());
            for m in &measurements {
                map.fuse(m).unwrap();
            }
            map.dump()
        })
        .collect();
    outcome(
        dumps.len() == 1,
        format!(
            "{} measurements, {} distinct final maps over 5 orders",
            measurements.len(),
            dumps.len()
        ),
    )
}

/// Map fused from the true region of all three cyclic relations of every
/// triple.
fn converged_map(world: &World) -> QualMap {
    let mut map = QualMap::new(table().clone());
    let ids: Vec<LandmarkId> = world.landmarks.iter().map(|l| l.0).collect();
    for (x, &i) in ids.iter().enumerate() {
        for (y, &j) in ids.iter().enumerate().skip(x + 1) {
            for &k in &ids[y + 1..] {
                for rel in [[i, j, k], [j, k, i], [k, i, j]] {
                    let t = world.truth(labeling(), rel).unwrap();
                    let m = TripleMeasurement {
                        ids: rel,
                        states: StateSet::singleton(t),
                        unresolved: StateSet::EMPTY,
                    };
                    map.fuse(&m).unwrap();
                }
            }
        }
    }
    map
}

fn rng_worlds() -> Vec<(World, QualMap)> {
    (0..20)
        .map(|s| {
            let w = gen_world(
                &WorldConfig {
                    landmarks: 12,
                    images: 0,
                    ..WorldConfig::default()
                },
                800 + s,
            );
            let m = converged_map(&w);
            (w, m)
        })
        .collect()
}

fn c8_rng(worlds: &[(World, QualMap)]) -> Outcome {
    let mut discrepancies = 0;
    let mut edges = 0;
    for (w, map) in worlds {
        let est = estimate_rng(map).certain_edges();
        let truth = brute_force_rng(&w.landmarks);
        edges += truth.len();
        let a: BTreeSet<_> = est.into_iter().collect();
        let b: BTreeSet<_> = truth.into_iter().collect();
        discrepancies += a.symmetric_difference(&b).count();
    }
    outcome(
        discrepancies == 0,
        format!("{discrepancies} discrepancies over 20 worlds ({edges} RNG edges)"),
    )
}

fn c9_monte_carlo() -> Outcome {
    let t = Instant::now();
    let adjacency = region_adjacency(labeling(), 500);
    let campaign = CampaignConfig {
        runs: 10,
        world: desk_world(),
        n_nearest: vec![5, 8, 15],
        seed: 9,
        sim: SimOptions {
            timing: Timing::Off,
            ..SimOptions::default()
        },
    };
    let mc = run_mc(&campaign, labeling(), table(), &adjacency).unwrap();
    let elapsed = t.elapsed();
    let curve = |n: usize, f: fn(&qrm::sim::AggregateRow) -> f64| -> Vec<f64> {
        mc.aggregate.iter().filter(|r| r.n == n).map(f).collect()
    };
    let fin = |n| *curve(n, |r| r.removed_pct_mean).last().unwrap();
    let (r5, r8, r15) = (fin(5), fin(8), fin(15));
    let ordered = r15 >= r8 && r8 >= r5 && r8 - r5 >= 10.0;
    let nonadj = *curve(15, |r| r.nonadj_pct_mean).last().unwrap();
    // cost starts at zero before the first image: a peak before the last
    // step, then a decline of at least a quarter
    let mut shapes = Vec::new();
    let mut peaked = true;
    for n in [5, 8, 15] {
        let c = curve(n, |r| r.rng_cost_mean);
        let (peak_at, peak) = c
            .iter()
            .enumerate()
            .fold((0, 0.0), |m, (i, &v)| if v > m.1 { (i, v) } else { m });
        let last = *c.last().unwrap();
        peaked &= peak > 0.0 && peak_at + 1 < c.len() && last <= 0.75 * peak;
        shapes.push(format!(
            "n={n} peak {peak:.2} at step {} final {last:.3}",
            peak_at + 1
        ));
    }
    outcome(
        mc.truth_violations == 0 && ordered && nonadj < 45.0 && peaked && elapsed < Duration::from_secs(1200),
        format!(
            "final removed {r5:.1}/{r8:.1}/{r15:.1}% for n=5/8/15, final non-adjacent {nonadj:.2}% (n=15), rng cost {}; \
             {} lost true states; {elapsed:.0?} (limit 20min)",
            shapes.join(", "),
            mc.truth_violations
        ),
    )
}

fn c10_navigation(worlds: &[(World, QualMap)]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut arrived, mut steps) = (0, 0);
    let mut errors = Vec::new();
    for trip in 0..50 {
        let (w, map) = &worlds[trip % worlds.len()];
        let est = estimate_rng(map);
        let side = w.side;
        let mut pt = || Point2::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side));
        let (start, goal) = (pt(), pt());
        match navigate(&w.landmarks, &est, start, goal, &NavOptions::default()) {
            Ok(t)
                if nearest_landmark(&w.landmarks, t.end())
                    == nearest_landmark(&w.landmarks, goal) =>
            {
                arrived += 1;
                steps += t.points.len() - 1;
            }
            Ok(_) => errors.push(format!("trip {trip} ended outside the goal cell")),
            Err(e) => errors.push(format!("trip {trip}: {e}")),
        }
    }
    outcome(
        arrived == 50,
        format!("{arrived}/50 arrived, {steps} steps in total {errors:?}"),
    )
}

fn main() {
    let wanted: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let run = |k: usize| wanted.is_empty() || wanted.contains(&k);
    let worlds = if run(8) || run(10) {
        rng_worlds()
    } else {
        Vec::new()
    };
    let criteria: [(usize, &str, Box<dyn Fn() -> Outcome + '_>); 10] = [
        (1, "labeling bootstrap", Box::new(c1_labeling)),
        (2, "worked-example closure", Box::new(c2_worked_example)),
        (3, "composition soundness", Box::new(c3_composition)),
        (4, "measurement soundness", Box::new(c4_measurement)),
        (5, "solver bound validity", Box::new(c5_bounds)),
        (6, "map soundness and monotonicity", Box::new(c6_simulation)),
        (7, "order independence", Box::new(c7_order)),
        (8, "RNG equivalence", Box::new(|| c8_rng(&worlds))),
        (9, "Monte Carlo trends", Box::new(c9_monte_carlo)),
        (10, "navigation", Box::new(|| c10_navigation(&worlds))),
    ];
    let mut failed = Vec::new();
    for (k, name, check) in &criteria {
        if !run(*k) {
            continue;
        }
        let t = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {k:>2} {name}: {} [{:.1?}]",
            o.detail,
            t.elapsed()
        );
        if !o.pass {
            failed.push(*k);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
