//! Acceptance checks. Prints one `criterion N: PASS|FAIL` line per
//! criterion and exits non-zero when any of them fails.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uhlmann_cli::{parse_scan, run_scan, Table};
use uhlmann_core::bcs::{critical_temperature, solve_gap, BcsParams};
use uhlmann_core::fidelity::{fidelity_oracle_mode, mode_terms, ModePair, ModeState};
use uhlmann_core::holonomy::{holonomy, holonomy_angle, holonomy_oracle};
use uhlmann_core::realspace::{default_mu_qp, ChainSpectrum};
use uhlmann_core::spectra::{winding_number, Model, MomentumGrid};
use uhlmann_core::Mat2;

type Outcome = Result<String, String>;

fn scan(args: &str) -> Table {
    let argv = std::iter::once("uhlmann").chain(args.split_whitespace());
    let spec = parse_scan(argv).unwrap_or_else(|e| panic!("{args}: {e}"));
    run_scan(&spec).unwrap_or_else(|e| panic!("{args}: {e}"))
}

fn col(t: &Table, name: &str) -> Vec<f64> {
    t.column(name)
        .unwrap_or_else(|| panic!("no column {name}"))
        .into_iter()
        .map(|v| v.unwrap_or(f64::NAN))
        .collect()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..TAU);
    let r = (1.0 - z * z).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let (e, e2) = (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
        let (t, t2) = (rng.gen_range(0.05..10.0), rng.gen_range(0.05..10.0));
        let (n, n2) = (random_unit(&mut rng), random_unit(&mut rng));
        let terms = mode_terms(&ModePair::new(ModeState::new(e, n, t), ModeState::new(e2, n2, t2)))
            .map_err(|err| err.to_string())?;
        let h = Mat2::pauli(n).scale(Complex64::new(0.5 * e, 0.0));
        let h2 = Mat2::pauli(n2).scale(Complex64::new(0.5 * e2, 0.0));
        let (f, tr) = fidelity_oracle_mode(&h, &h2, t, t2).map_err(|err| err.to_string())?;
        worst = worst
            .max((terms.fidelity - f).abs() / f)
            .max((terms.trace_sqrt - tr).abs() / tr);
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst < 1e-10 && secs < 10.0,
        format!("max relative error {worst:.2e} over 1e4 draws, {secs:.2} s"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut cells = 0;
    for (model, axis) in [("creutz", "M"), ("ssh", "v"), ("kitaev", "mu")] {
        let t = scan(&format!(
            "delta-scan --model {model} --param {axis}=0.5:1.5:100 --temp 0.01:2:100 --dtemp 0.001 --nk 501"
        ));
        if t.failed > 0 {
            return Err(format!("{model}: {} failed cells", t.failed));
        }
        let d = col(&t, "delta");
        cells += d.len();
        worst = d.iter().fold(worst, |m, x| if x.is_nan() { f64::INFINITY } else { m.max(x.abs()) });
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst < 1e-12 && cells == 30_000 && secs < 30.0,
        format!("max |Delta| {worst:.2e} over {cells} cells, {secs:.2} s"),
    )
}

fn criterion_3() -> Outcome {
    let temps = [0.01, 0.05, 0.1, 0.3, 1.0];
    let mut report = Vec::new();
    let mut ok = true;
    for (model, axis) in [("creutz", "M"), ("ssh", "v"), ("kitaev", "mu")] {
        let mut depths = Vec::new();
        let mut argmin_cold = f64::NAN;
        for &temp in &temps {
            let t = scan(&format!(
                "fidelity-scan --model {model} --param {axis}=0.5:1.5:201 --temp {temp} --dparam 0.01 --nk 501"
            ));
            let (p, f) = (col(&t, "param"), col(&t, "F"));
            let i = (0..f.len()).min_by(|&a, &b| f[a].total_cmp(&f[b])).unwrap();
            if temp == temps[0] {
                argmin_cold = p[i];
            }
            depths.push(1.0 - f[i]);
        }
        let located = (argmin_cold - 1.0).abs() <= 0.005 + 1e-12;
        let decreasing = depths.windows(2).all(|w| w[1] < w[0]);
        ok &= located && decreasing;
        report.push(format!(
            "{model}: argmin {argmin_cold} D(T) {:?}",
            depths.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>()
        ));
    }
    check(ok, report.join("; "))
}

fn criterion_4() -> Outcome {
    let model = Model::creutz(0.5);
    let grid = MomentumGrid::new(501).unwrap();
    let dt = 0.005;
    let temps: Vec<f64> = (0..=398).map(|i| 0.01 + dt * i as f64).collect();
    let mut phases = Vec::new();
    let mut thetas = Vec::new();
    for &t in &temps {
        let h = holonomy(&model, t, &grid).map_err(|e| format!("T = {t}: {e}"))?;
        phases.push(h.phase.ok_or_else(|| format!("phase undefined at T = {t}"))?);
        thetas.push(h.theta);
    }
    let quantized = phases
        .iter()
        .all(|&p| p.abs() < 1e-9 || (p - PI).abs() < 1e-9);
    let steps = phases.windows(2).filter(|w| (w[1] - w[0]).abs() > 1.0).count();
    let step_at = phases.windows(2).position(|w| (w[1] - w[0]).abs() > 1.0).map(|i| temps[i]);
    let max_jump = thetas.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let c = 10.0;
    check(
        quantized
            && (phases[0] - PI).abs() < 1e-9
            && phases.last().unwrap().abs() < 1e-9
            && steps == 1
            && max_jump < c * dt,
        format!(
            "phase in {{0, pi}}: {quantized}, steps {steps} after T = {step_at:?}, max |d theta| {max_jump:.4} < {c} dT"
        ),
    )
}

fn criterion_5() -> Outcome {
    let grid = MomentumGrid::new(501).unwrap();
    let mut worst: f64 = 0.0;
    let mut windings = Vec::new();
    for m in [0.3, 0.7, 1.5] {
        let model = Model::creutz(m);
        let nu = winding_number(&model, &grid).map_err(|e| e.to_string())?;
        let theta = holonomy_angle(&model, 1e-4, &grid).map_err(|e| e.to_string())?;
        worst = worst.max((theta - TAU * nu as f64).abs());
        windings.push(nu);
    }
    let expected = windings[0].abs() == 1 && windings[1].abs() == 1 && windings[2] == 0;
    check(
        worst < 1e-4 && expected,
        format!("windings {windings:?}, max |theta - 2 pi nu| {worst:.2e}"),
    )
}

fn criterion_6() -> Outcome {
    let model = Model::creutz(0.5);
    let mut dists = Vec::new();
    for nk in [101, 401, 1601] {
        let grid = MomentumGrid::new(nk).unwrap();
        let theta = holonomy_angle(&model, 0.5, &grid).map_err(|e| e.to_string())?;
        let u = holonomy_oracle(&model, 0.5, &grid).map_err(|e| e.to_string())?;
        dists.push(u.op_distance(&Mat2::z_rotation(theta)).map_err(|e| e.to_string())?);
    }
    check(
        dists[1] < dists[0] && dists[2] < dists[1] && dists[2] < 1e-3,
        format!("distances {:.3e} {:.3e} {:.3e} at Nk 101, 401, 1601", dists[0], dists[1], dists[2]),
    )
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for v in [0.1, 0.2, 0.3, 0.5] {
        let p = BcsParams::with_coupling(v);
        let g = solve_gap(0.0, &p).map_err(|e| e.to_string())?.delta;
        let exact = p.cutoff / (1.0 / (p.dos * v)).sinh();
        worst = worst.max((g - exact).abs() / exact);
    }
    let p = BcsParams::with_coupling(0.2);
    let tc = critical_temperature(&p).map_err(|e| e.to_string())?;
    let ratio = solve_gap(0.0, &p).map_err(|e| e.to_string())?.delta / tc;
    let mut curve = Vec::new();
    for i in 0..=60 {
        let t = tc * i as f64 / 60.0;
        curve.push(solve_gap(t, &p).map_err(|e| e.to_string())?.delta);
    }
    let above = solve_gap(tc * 1.001, &p).map_err(|e| e.to_string())?.delta;
    let below = curve[59];
    // below ~0.05 T_c the change e^{-Delta/T} is under one ulp of Delta(0)
    let decreasing = curve[..60].windows(2).all(|w| w[1] <= w[0])
        && (3..60).all(|i| curve[i] < curve[i - 1]);
    let closes = curve[60] < 1e-3 * curve[0] && above == 0.0 && below > 0.0;
    let secs = start.elapsed().as_secs_f64();
    check(
        worst < 1e-8 && (ratio / 1.764 - 1.0).abs() < 0.01 && decreasing && closes && secs < 5.0,
        format!(
            "max gap rel err {worst:.2e}, Delta(0)/T_c {ratio:.4}, strictly decreasing from 0.05 T_c {decreasing}, Delta(T_c) {:.2e}, Delta(1.001 T_c) {above}, {secs:.2} s",
            curve[60]
        ),
    )
}

fn criterion_8() -> Outcome {
    // Delta indicator at fixed coupling
    let mut ok = true;
    let mut report = Vec::new();
    for v in [0.2, 0.3, 0.4] {
        let tc = critical_temperature(&BcsParams::with_coupling(v)).map_err(|e| e.to_string())?;
        let t = scan(&format!(
            "bcs-scan --param V={v} --temp {}:{}:100 --dtemp 0.001",
            0.05 * tc,
            2.0 * tc
        ));
        let (temps, delta) = (col(&t, "T"), col(&t, "delta"));
        let below_ok = temps.iter().zip(&delta).filter(|(&t, _)| t < tc).all(|(_, &d)| d > 0.0);
        let above_ok = temps.iter().zip(&delta).filter(|(&t, _)| t > tc).all(|(_, &d)| d < 1e-12);
        let min_below = temps
            .iter()
            .zip(&delta)
            .filter(|(&t, _)| t < tc)
            .map(|(_, &d)| d)
            .fold(f64::INFINITY, f64::min);
        ok &= below_ok && above_ok && t.failed == 0;
        report.push(format!("V={v}: T_c {tc:.5} min Delta below {min_below:.1e} ok {}", below_ok && above_ok));
    }

    // fidelity-drop locus of the coupling probe against T_c(V)
    let (v_lo, v_hi, steps) = (0.1, 0.5, 100);
    let (t_lo, t_hi) = (0.005, 0.14);
    let t = scan(&format!(
        "bcs-scan --param V={v_lo}:{v_hi}:{steps} --temp {t_lo}:{t_hi}:{steps} --dparam 0.001"
    ));
    if t.failed > 0 {
        return Err(format!("{} failed cells in the (V, T) scan", t.failed));
    }
    let (vs, ts, fs) = (col(&t, "param"), col(&t, "T"), col(&t, "F"));
    let v_axis: Vec<f64> = vs[..].iter().step_by(steps).copied().collect();
    let tc: Vec<f64> = v_axis
        .iter()
        .map(|&v| critical_temperature(&BcsParams::with_coupling(v)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mut worst_cells = 0usize;
    for j in 0..steps {
        let temp = ts[j];
        let column: Vec<f64> = (0..steps).map(|i| fs[i * steps + j]).collect();
        let argmin = (0..steps).min_by(|&a, &b| column[a].total_cmp(&column[b])).unwrap();
        let first_sc = tc.iter().position(|&c| c > temp).unwrap_or(steps);
        worst_cells = worst_cells.max(argmin.abs_diff(first_sc));
    }
    ok &= worst_cells <= 1;
    report.push(format!("drop locus off T_c(V) by at most {worst_cells} cell(s)"));
    check(ok, report.join("; "))
}

fn criterion_9() -> Outcome {
    let cells = 500;
    let mu = default_mu_qp(&Model::creutz(0.1));
    let start = Instant::now();
    let topo = ChainSpectrum::new(&Model::creutz(0.1), cells, None).map_err(|e| e.to_string())?;
    let diag_secs = start.elapsed().as_secs_f64();
    let trivial = ChainSpectrum::new(&Model::creutz(1.0001), cells, None).map_err(|e| e.to_string())?;
    let cold = topo.occupations(1e-5, mu).map_err(|e| e.to_string())?;
    let warm = topo.occupations(0.2, mu).map_err(|e| e.to_string())?;
    let flat = trivial.occupations(1e-5, mu).map_err(|e| e.to_string())?;

    let edge_dev = |p: &[f64]| (p[0] - 1.0).abs().max((p[cells - 1] - 1.0).abs());
    let bulk_dev = cold.occupation[cells / 4..3 * cells / 4]
        .iter()
        .map(|n| (n - 1.0).abs())
        .fold(0.0, f64::max);
    let trivial_dev = flat.occupation.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
    let (cold_edge, warm_edge) = (edge_dev(&cold.occupation), edge_dev(&warm.occupation));
    check(
        cold_edge > 0.1 && bulk_dev < 1e-6 && trivial_dev < 1e-3 && warm_edge < cold_edge && diag_secs < 30.0,
        format!(
            "edge deviation {cold_edge:.3} (T = 0.2: {warm_edge:.3e}), bulk {bulk_dev:.1e}, trivial {trivial_dev:.1e}, diagonalization {diag_secs:.2} s"
        ),
    )
}

fn criterion_10() -> Outcome {
    let t = scan("edge-scan --model kitaev --param mu=0.5:1.5:101 --temp 0.00001:0.2:2 --sites 300");
    if t.failed > 0 {
        return Err(format!("{} failed cells", t.failed));
    }
    let (mus, temps, ratio) = (col(&t, "param"), col(&t, "T"), col(&t, "ratio"));
    let curve = |temp: f64| -> (Vec<f64>, Vec<f64>) {
        (0..mus.len())
            .filter(|&i| temps[i] == temp)
            .map(|i| (mus[i], ratio[i]))
            .unzip()
    };
    let max_step = |r: &[f64]| {
        r.windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .enumerate()
            .fold((0, 0.0), |best, (i, d)| if d > best.1 { (i, d) } else { best })
    };
    let (mu_axis, cold) = curve(1e-5);
    let (_, warm) = curve(0.2);
    let step = 0.01;
    let (i, cold_max) = max_step(&cold);
    let (_, warm_max) = max_step(&warm);
    let located = [mu_axis[i], mu_axis[i + 1]]
        .iter()
        .any(|m| (m - 1.0).abs() <= step + 1e-9);
    check(
        located && warm_max * 5.0 <= cold_max,
        format!(
            "T = 1e-5 max change {cold_max:.3e} between mu {} and {}; T = 0.2 max change {warm_max:.3e} (ratio {:.2}, need >= 5)",
            mu_axis[i],
            mu_axis[i + 1],
            cold_max / warm_max
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("oracle equivalence", criterion_1),
        ("commuting collapse of Delta", criterion_2),
        ("quantum-critical fidelity drop", criterion_3),
        ("Uhlmann phase step", criterion_4),
        ("Berry limit", criterion_5),
        ("holonomy oracle convergence", criterion_6),
        ("BCS gap", criterion_7),
        ("thermal transition signature", criterion_8),
        ("edge states", criterion_9),
        ("Majorana ratio", criterion_10),
    ];
    let mut failures = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail}) [{secs:.1} s]", n + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL {name} ({detail}) [{secs:.1} s]", n + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
