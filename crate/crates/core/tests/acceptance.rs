//! Acceptance criteria. Runs as a plain binary so every criterion prints
//! one PASS/FAIL line; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use herzmorrey::cli::run_cli;
use herzmorrey::experiments::{
    divergence_probe, exponent_suite, inclusion_suite, quasi_triangle_suite, refinement_study,
    run_suite, CorpusFamily, CorpusSpec, OperatorChoice, Trend,
};
use herzmorrey::exponents::{ExponentParams, TheoremId};
use herzmorrey::grid::{sample, AxisGrid, Grid, GridFunction, GridParams};
use herzmorrey::norms::{
    herz_morrey_norm, herz_norm, mixed_lebesgue_norm, ExponentVector, HerzMorreyParams,
};
use herzmorrey::operators::{
    hl_maximal, verify_size_condition, BmoSymbol, OperatorKind, OperatorSpec, RadiusSet,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    ensure(elapsed <= Duration::from_secs(limit_secs), || {
        format!("took {:.1}s, limit {limit_secs}s", elapsed.as_secs_f64())
    })
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn closed_form_annuli() -> Outcome {
    let start = Instant::now();
    let g = GridParams::new(1, -3, 3, 8).build().map_err(e)?;
    let d = &g.decomposition;
    let mut worst = 0.0f64;
    for j in -3..=3 {
        let f = g.annulus_indicator(j);
        for alpha in [-0.3, 0.0, 0.7] {
            for q in [1.0, 2.0, 4.0] {
                for lambda in [0.0, 0.1] {
                    let params = HerzMorreyParams::over(
                        alpha,
                        1.0,
                        lambda,
                        ExponentVector::constant(q, 1).map_err(e)?,
                        d,
                    )
                    .map_err(e)?;
                    let v = herz_morrey_norm(&f, &params, d).map_err(e)?;
                    let expected = (j as f64 * (alpha + 1.0 / q - lambda)).exp2();
                    let rel = (v - expected).abs() / expected;
                    worst = worst.max(rel);
                    ensure(rel <= 1e-10, || {
                        format!("j={j} alpha={alpha} q={q} lambda={lambda}: {v} vs {expected}")
                    })?;
                }
            }
        }
    }
    within(start.elapsed(), 1)?;
    Ok(format!("126 cases, worst relative error {worst:.1e}"))
}

/// Scalar `L^q` norm by a flat sum over cells, written independently of the
/// iterated mixed norm.
fn scalar_lq(f: &GridFunction, q: f64) -> f64 {
    let grid = f.grid();
    let mut acc = 0.0;
    for (i, v) in f.as_slice().iter().enumerate() {
        acc += v.abs().powf(q) * grid.cell_volume(i);
    }
    acc.powf(1.0 / q)
}

fn reductions() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    for n in [1usize, 2] {
        let params = if n == 1 {
            GridParams::new(1, -3, 3, 8)
        } else {
            GridParams::new(2, -2, 1, 4)
        };
        let g = params.build().map_err(e)?;
        let d = &g.decomposition;
        // 7 or 4 annuli, 2 sums, tail, Gaussian, zero, plus random fill to 50
        let fixed = params.k_max - params.k_min + 1 + 5;
        let corpus = CorpusSpec::standard(params, 100, 50 - fixed as usize);
        let functions = corpus.generate(&g).map_err(e)?;
        ensure(functions.len() == 50, || {
            format!("corpus has {} functions", functions.len())
        })?;
        for (id, f) in &functions {
            for qv in [1.0, 1.5, 2.0, 4.0] {
                let q = ExponentVector::constant(qv, n).map_err(e)?;
                for alpha in [-0.5, 0.0, 0.7] {
                    for p in [0.5, 1.0, 2.0] {
                        let hm = herz_morrey_norm(
                            f,
                            &HerzMorreyParams::new(alpha, p, 0.0, q.clone(), d.k_max()..=d.k_max())
                                .map_err(e)?,
                            d,
                        )
                        .map_err(e)?;
                        let h = herz_norm(f, alpha, p, &q, d).map_err(e)?;
                        ensure(hm == h, || {
                            format!("{id} n={n}: herz-morrey {hm} != herz {h}")
                        })?;
                        cases += 1;
                    }
                }
                let mixed = mixed_lebesgue_norm(f, &q).map_err(e)?;
                let scalar = scalar_lq(f, qv);
                ensure((mixed - scalar).abs() <= 1e-10 * scalar, || {
                    format!("{id} n={n} q={qv}: mixed {mixed} vs scalar {scalar}")
                })?;
                cases += 1;
            }
        }
    }
    within(start.elapsed(), 10)?;
    Ok(format!(
        "{cases} comparisons on 50 functions in n = 1 and n = 2"
    ))
}

fn inclusions() -> Outcome {
    let start = Instant::now();
    let corpus = CorpusSpec::standard(GridParams::new(1, -3, 3, 8), 0, 20);
    let lines = inclusion_suite(&corpus).map_err(e)?;
    let mut summary = Vec::new();
    for l in &lines {
        ensure(l.passed && l.cases > 0, || {
            format!(
                "{}: {} violations in {} cases",
                l.check, l.violations, l.cases
            )
        })?;
        summary.push(format!("{} {} cases", l.check, l.cases));
    }
    within(start.elapsed(), 30)?;
    Ok(summary.join(", "))
}

fn quasi_triangle() -> Outcome {
    let line = quasi_triangle_suite(GridParams::new(1, -3, 3, 8), 7, 100).map_err(e)?;
    ensure(line.passed && line.cases == 100, || {
        format!("{} violations", line.violations)
    })?;
    Ok(format!("100 pairs, worst slack {:.3e}", line.worst_margin))
}

fn hl_oracle(f: &GridFunction, radii: &RadiusSet) -> Vec<f64> {
    let axis = f.grid().axis(0);
    let e = axis.edges();
    let cells = axis.len();
    axis.points()
        .iter()
        .map(|&x| {
            let mut best = 0.0f64;
            for &r in radii.as_slice() {
                let mut s = 0.0;
                for j in 0..cells {
                    let ov = (x + r).min(e[j + 1]) - (x - r).max(e[j]);
                    if ov > 0.0 {
                        s += f.as_slice()[j].abs() * ov;
                    }
                }
                best = best.max(s / (2.0 * r));
            }
            best
        })
        .collect()
}

fn operator_oracles() -> Outcome {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let mut grids: Vec<Arc<Grid>> = Vec::new();
    for (k_min, k_max, spo) in [(-1, 1, 4), (-2, 2, 2), (-3, 1, 4), (-1, 2, 8), (0, 3, 4)] {
        let g = GridParams::new(1, k_min, k_max, spo).build().map_err(e)?;
        if g.grid.len() <= 64 {
            grids.push(g.grid.clone());
        }
    }
    for m in 1..=64usize {
        let mut edges = vec![rng.gen_range(-4.0..-1.0)];
        for _ in 0..m {
            let last = *edges.last().unwrap();
            edges.push(last + rng.gen_range(0.01..0.5));
        }
        grids.push(Arc::new(
            Grid::new(vec![AxisGrid::from_edges(edges).map_err(e)?]).map_err(e)?,
        ));
    }
    let mut points = 0;
    for g in &grids {
        let values: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = GridFunction::from_vec(g.clone(), values).map_err(e)?;
        let radii = RadiusSet::default_for(g);
        let fast = hl_maximal(&f, &radii).map_err(e)?;
        let slow = hl_oracle(&f, &radii);
        for (i, (a, b)) in fast.as_slice().iter().zip(&slow).enumerate() {
            ensure(a.to_bits() == b.to_bits(), || {
                format!("{} points, index {i}: {a} vs {b}", g.len())
            })?;
        }
        points += g.len();
    }

    let g = GridParams::new(1, -6, 2, 32).build().map_err(e)?;
    let f = sample(
        &g.grid,
        |x| if (0.0..1.0).contains(&x[0]) { 1.0 } else { 0.0 },
    )
    .map_err(e)?;
    let riesz = OperatorSpec::new(OperatorKind::RieszPotential { l: 0.5 });
    let v = riesz.eval_at(&f, &[2.0]).map_err(e)?;
    let exact = 2.0 * (2f64.sqrt() - 1.0);
    ensure((v - exact).abs() <= 0.01 * exact, || {
        format!("riesz at 2: {v} vs {exact}")
    })?;

    let g = GridParams::new(1, -3, 3, 8).build().map_err(e)?;
    let f = CorpusFamily::RandomDyadic(3).generate(&g).map_err(e)?;
    let mb = OperatorSpec::new(OperatorKind::CommutatorMb {
        symbol: BmoSymbol::constant(&g.grid, 2.5).map_err(e)?,
    });
    let out = mb.apply(&f).map_err(e)?;
    ensure(out.as_slice().iter().all(|&v| v == 0.0), || {
        "M_b with constant b is not 0".into()
    })?;

    Ok(format!(
        "HL bit-identical on {} grids ({points} points); riesz relative error {:.1e}; M_b[const] = 0",
        grids.len(),
        (v - exact).abs() / exact
    ))
}

fn size_conditions() -> Outcome {
    let far = [vec![4.0], vec![8.0], vec![16.0]];
    let near = [vec![1.0 / 16.0], vec![1.0 / 8.0], vec![3.0 / 16.0]];
    let mut report = Vec::new();
    for (name, kind) in [
        ("hl", OperatorKind::HlMaximal),
        ("riesz", OperatorKind::RieszPotential { l: 0.5 }),
    ] {
        for (zone, probes) in [("far", &far[..]), ("near", &near[..])] {
            let mut constants = Vec::new();
            for spo in [16, 32] {
                let g = GridParams::new(1, -6, 5, spo).build().map_err(e)?;
                let radii =
                    RadiusSet::geometric(g.grid.min_cell_width() / 2.0, g.grid.diameter(), 64)
                        .map_err(e)?;
                let op = OperatorSpec::with_radii(kind.clone(), radii);
                let c =
                    verify_size_condition(&op, 0, &g.annulus_indicator(0), probes).map_err(e)?;
                ensure(c.constant.is_finite() && c.constant > 0.0, || {
                    format!("{name} {zone}: constant {}", c.constant)
                })?;
                ensure(c.variation() < 0.2, || {
                    format!(
                        "{name} {zone} spo {spo}: variation {:.3} across probes",
                        c.variation()
                    )
                })?;
                constants.push(c.constant);
            }
            let change = (constants[1] - constants[0]).abs() / constants[0].max(constants[1]);
            ensure(change < 0.2, || {
                format!("{name} {zone}: {constants:?} across resolutions")
            })?;
            report.push(format!("{name}/{zone} C={:.3}", constants[1]));
        }
    }
    Ok(report.join(", "))
}

fn sweep_points() -> Vec<(OperatorChoice, TheoremId, Vec<ExponentParams>)> {
    let same = |alpha| ExponentParams::same_space(1, alpha, 1.0, 0.1, 2.0);
    let frac = |alpha| ExponentParams::two_space(1, alpha, 1.0, 2.0, 0.1, 2.0, 4.0, 0.25);
    let comm = |alpha| ExponentParams::two_space(1, alpha, 1.0, 2.0, 0.1, 2.0, 4.0, 4.0);
    vec![
        (
            OperatorChoice::Hl,
            TheoremId::Thm3_1,
            vec![same(-0.2), same(0.0), same(0.3)],
        ),
        (
            OperatorChoice::Riesz(0.25),
            TheoremId::Thm3_2,
            vec![frac(-0.1), frac(0.0), frac(0.3)],
        ),
        (
            OperatorChoice::Fractional(0.25),
            TheoremId::Thm3_2,
            vec![frac(-0.1), frac(0.0), frac(0.3)],
        ),
        (
            OperatorChoice::Mb,
            TheoremId::Thm4_1,
            vec![same(-0.2), same(0.0), same(0.3)],
        ),
        (
            OperatorChoice::Mbl(4.0),
            TheoremId::Thm4_2,
            vec![comm(-0.1), comm(0.0), comm(0.3)],
        ),
    ]
}

fn sweeps() -> Outcome {
    let start = Instant::now();
    let corpus = CorpusSpec::standard(GridParams::new(1, -3, 3, 16), 0, 20);
    let mut report = Vec::new();
    for (op, theorem, points) in sweep_points() {
        for p in &points {
            ensure(
                herzmorrey::exponents::check(theorem, p)
                    .map_err(e)?
                    .admissible,
                || format!("{theorem} point {p:?} is not admissible"),
            )?;
        }
        let rows = refinement_study(op, theorem, &corpus, &points).map_err(e)?;
        let mut worst = 0.0f64;
        for r in &rows {
            ensure(
                r.coarse_max_ratio.is_finite()
                    && r.fine_max_ratio.is_finite()
                    && r.fine_max_ratio > 0.0,
                || {
                    format!(
                        "{op}/{theorem} point {}: ratio {} / {}",
                        r.point, r.coarse_max_ratio, r.fine_max_ratio
                    )
                },
            )?;
            ensure(r.relative_change < 0.1, || {
                format!(
                    "{op}/{theorem} point {}: {} -> {} ({:.1}%)",
                    r.point,
                    r.coarse_max_ratio,
                    r.fine_max_ratio,
                    100.0 * r.relative_change
                )
            })?;
            worst = worst.max(r.relative_change);
        }
        report.push(format!("{op}/{theorem} {:.2}%", 100.0 * worst));
    }
    within(start.elapsed(), 300)?;
    Ok(format!(
        "max change per pairing: {} ({:.0}s)",
        report.join(", "),
        start.elapsed().as_secs_f64()
    ))
}

fn divergence() -> Outcome {
    let params = ExponentParams::same_space(1, 0.6, 1.0, 0.0, 2.0);
    let r = divergence_probe(
        OperatorChoice::Hl,
        TheoremId::Thm3_1,
        &params,
        &[(-3, 3), (-6, 6)],
        16,
    )
    .map_err(e)?;
    let growth = r.growth.first().map(|g| g.2).ok_or("no growth pair")?;
    ensure(
        growth >= 1.5 && r.trend == Trend::DivergenceObserved,
        || format!("growth {growth:.3}, trend {}", r.trend),
    )?;
    Ok(format!(
        "failing clause {}, growth {growth:.3} for width 6 -> 12 (geometric prediction {:.3})",
        r.failed_clause,
        (0.1f64 * 6.0).exp2()
    ))
}

fn exponent_checker() -> Outcome {
    let lines = exponent_suite(11, 10_000).map_err(e)?;
    for l in &lines {
        ensure(l.passed, || {
            format!("{}: {} violations", l.check, l.violations)
        })?;
    }
    Ok(format!(
        "{} sampled points, {} boundary points",
        lines[0].cases, lines[1].cases
    ))
}

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("herzmorrey")
        .chain(args.iter().copied())
        .map(String::from)
        .collect();
    let code = run_cli(argv, &mut out, &mut err);
    ensure(code == 0, || {
        format!("exit {code}: {}", String::from_utf8_lossy(&err))
    })?;
    Ok(out)
}

fn determinism() -> Outcome {
    let suite_a = cli(&["suite", "--seed", "3"])?;
    let suite_b = cli(&["suite", "--seed", "3"])?;
    ensure(suite_a == suite_b, || "suite output differs".into())?;
    ensure(run_suite(3).map_err(e)?.passed(), || {
        "suite reports a violation".into()
    })?;
    let sweep = [
        "sweep",
        "--op",
        "mb",
        "--theorem",
        "thm4_1",
        "--alpha",
        "-0.2,0,0.3",
        "--lambda",
        "0.1",
        "--p",
        "1",
        "--q",
        "2",
        "--k-min",
        "-3",
        "--k-max",
        "3",
        "--spo",
        "8",
        "--seed",
        "9",
    ];
    let a = cli(&sweep)?;
    let b = cli(&sweep)?;
    ensure(a == b, || "sweep output differs".into())?;
    Ok(format!(
        "suite {} bytes, sweep {} bytes, identical",
        suite_a.len(),
        a.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("closed-form annulus norms", closed_form_annuli),
        ("reduction identities", reductions),
        ("inclusion suite", inclusions),
        ("quasi-triangle defect", quasi_triangle),
        ("operator oracles", operator_oracles),
        ("size-condition certification", size_conditions),
        ("boundedness sweeps", sweeps),
        ("divergence probe", divergence),
        ("exponent checker", exponent_checker),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
