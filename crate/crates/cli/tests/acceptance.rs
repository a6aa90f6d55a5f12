//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use qsd_cli::{validate, Overrides, RunConfig, ScenarioRegistry};
use qsd_core::correlations::{doubled_seed, haar_random_ket};
use qsd_core::ensemble::{benchmark_sweep, ensemble_covariance};
use qsd_core::gisin::{gisin_matrix_element, GisinConfig, GisinVariant};
use qsd_core::hilbert::two_level::*;
use qsd_core::master::*;
use qsd_core::rng::{substream, NoiseStream};
use qsd_core::*;

type Outcome = Result<String, String>;
type Tables = Vec<(String, Vec<Vec<String>>)>;

fn plus() -> Ket {
    Ket::from_real(&[std::f64::consts::FRAC_1_SQRT_2; 2]).unwrap()
}

fn analytic(t: f64) -> f64 {
    std::f64::consts::FRAC_1_SQRT_2 * (-t / 2.0).exp()
}

fn opts(seed: u64) -> EnsembleOptions {
    EnsembleOptions { seed, workers: 1 }
}

fn qsd(dt: f64) -> QsdUnraveling {
    QsdUnraveling::new(SdeConfig::new(dt, SdeScheme::Normalized).unwrap())
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_model(dim: usize, channels: usize, s: &mut NoiseStream) -> LindbladModel {
    let mut m = || DMatrix::from_fn(dim, dim, |_, _| s.complex_gaussian() * 0.5);
    let a = m();
    let h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
    let ls = (0..channels).map(|_| Operator::new(m()).unwrap()).collect();
    LindbladModel::new(Operator::new(h).unwrap(), ls).unwrap()
}

/// Runs a registered scenario in-process and returns its CSV rows.
fn run_scenario(config: &str) -> Result<(RunConfig, Tables), String> {
    let registry = ScenarioRegistry::default();
    let cfg = validate(config, &Overrides::default(), &registry).map_err(|e| e.join("; "))?;
    let out = registry
        .get(&cfg.scenario)
        .unwrap()
        .run(&cfg)
        .map_err(|f| f.error.to_string())?;
    let tables = out
        .files
        .iter()
        .filter(|(name, _)| name.ends_with(".csv"))
        .map(|(name, bytes)| {
            let mut r = csv::Reader::from_reader(bytes.as_slice());
            let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
            (name.clone(), rows)
        })
        .collect();
    Ok((cfg, tables))
}

fn table(tables: &Tables, name: &str) -> Vec<Vec<f64>> {
    let rows = &tables.iter().find(|(n, _)| n == name).expect("table present").1;
    rows.iter().map(|r| r.iter().map(|x| x.parse().unwrap()).collect()).collect()
}

/// Analytic decay element through the `decay-element` scenario.
fn criterion_1() -> Outcome {
    let (_, tables) = run_scenario(r#"{"scenario": "decay-element", "n_trajectories": 1000, "dt": 0.001}"#)?;
    let rows = table(&tables, "results.csv");
    if rows.len() != 40 {
        return Err(format!("{} rows", rows.len()));
    }
    let re_ok = rows.iter().filter(|r| (r[1] - analytic(r[0])).abs() < 3.0 * r[3]).count();
    let im_ok = rows.iter().filter(|r| r[2].abs() < 3.0 * r[3]).count();
    let msg = format!("real part within 3 SE at {re_ok}/40 nodes, imaginary at {im_ok}/40");
    if re_ok >= 38 && im_ok >= 38 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_2() -> Outcome {
    let grid: Vec<f64> = (1..=40).map(|k| k as f64 * 0.1).collect();
    let got = regression_matrix_element(&sigma_plus(), &excited(), &plus(), &decay_model(1.0), &grid, &OdeConfig::default())
        .map_err(|e| e.to_string())?;
    let err = grid
        .iter()
        .zip(&got)
        .map(|(t, g)| (g - C64::new(analytic(*t), 0.0)).norm())
        .fold(0.0, f64::max);
    let msg = format!("max error {err:.2e}");
    if err < 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_3() -> Outcome {
    let mut s = substream(3, 0);
    let grid: Vec<f64> = (1..=10).map(|k| k as f64 * 0.5).collect();
    let ode = OdeConfig::default();
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let dim = 2 + k % 3;
        let model = random_model(dim, 1 + (k / 3) % 3, &mut s);
        let phi0 = haar_random_ket(dim, &mut s).unwrap();
        let psi0 = haar_random_ket(dim, &mut s).unwrap();
        let full = doubled_evolution(&phi0, &psi0, &model, &grid, &ode).map_err(|e| e.to_string())?;
        let seed = projector(&make_theta(&phi0, &psi0).unwrap());
        let liou = build_liouvillian(&model);
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let alone = evolve(&seed.block(i, j).unwrap(), &liou, &grid, &ode).map_err(|e| e.to_string())?;
            for (rho, single) in full.iter().zip(&alone) {
                worst = worst.max(max_abs(&(rho.block(i, j).unwrap().matrix() - single.matrix())));
            }
        }
    }
    let msg = format!("20 models, largest block deviation {worst:.2e}");
    if worst < 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_4() -> Outcome {
    let model = decay_model(1.0);
    let exact = evolve(&DensityMatrix::pure(&plus()).unwrap(), &build_liouvillian(&model), &[1.0], &OdeConfig::default())
        .map_err(|e| e.to_string())?;
    let methods: [(&str, Box<dyn Unraveling>); 2] = [("qsd", Box::new(qsd(1e-3))), ("jump", Box::new(JumpUnraveling::new(1e-3).unwrap()))];
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, m) in &methods {
        let est = ensemble_covariance(&plus(), &model, &[1.0], 10_000, m.as_ref(), &opts(4)).map_err(|e| e.to_string())?;
        let worst = (0..4)
            .map(|e| {
                let (i, j) = (e % 2, e / 2);
                (est[0].mean[(i, j)] - exact[0].matrix()[(i, j)]).norm() / est[0].std_error[(i, j)].max(1e-300)
            })
            .fold(0.0, f64::max);
        pass &= worst < 4.0;
        parts.push(format!("{name} worst {worst:.2} SE"));
    }
    let msg = parts.join(", ");
    if pass {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_5() -> Outcome {
    let (_, tables) = run_scenario(r#"{"scenario": "fluorescence-g1", "omega": 10, "n_trajectories": 10000, "warmup": 30}"#)?;
    let rows = table(&tables, "results.csv");
    let model = fluorescence_model(10.0, 1.0);
    let rho = steady_state(&model).map_err(|e| e.to_string())?;
    let tau: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let oracle = oracle_two_time(&sigma_plus(), &sigma_minus(), &model, &rho, 0.0, &tau, &OdeConfig::default())
        .map_err(|e| e.to_string())?;
    let ok = rows
        .iter()
        .zip(&oracle)
        .filter(|(r, o)| (C64::new(r[1], r[2]) - **o).norm() < 3.0 * r[3])
        .count();
    let msg = format!("{ok}/{} nodes within 3 SE of the steady-state oracle", rows.len());
    if ok as f64 >= 0.95 * rows.len() as f64 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_6() -> Outcome {
    let model = decay_model(1.0);
    let grid: Vec<f64> = (1..=10).map(|k| k as f64 * 0.1).collect();
    let mut parts = Vec::new();
    let mut pass = true;
    for h in [1e-2, 1e-3, 1e-4] {
        let config = GisinConfig::new(h, GisinVariant::QuasiLinear).unwrap();
        let run = gisin_matrix_element(&sigma_plus(), &excited(), &plus(), &model, &grid, 10_000, &config, &opts(6))
            .map_err(|e| e.to_string())?;
        let e = &run.estimate;
        let z = (2..10)
            .map(|k| (e.mean[k].re - analytic(grid[k])).abs() / e.std_error[k])
            .fold(0.0, f64::max);
        pass &= z > 3.0;
        parts.push(format!("h={h}: max deviation {z:.1} SE"));
    }
    let grid40: Vec<f64> = (1..=40).map(|k| k as f64 * 0.1).collect();
    let doubled = heisenberg_element(&sigma_plus(), &excited(), &plus(), &model, &grid40, 10_000, &qsd(1e-3), &opts(6))
        .map_err(|e| e.to_string())?;
    let ok = (0..40)
        .filter(|&k| {
            (doubled.mean[k].re - analytic(grid40[k])).abs() < 3.0 * doubled.std_error[k]
                && doubled.mean[k].im.abs() < 3.0 * doubled.std_error[k]
        })
        .count();
    pass &= ok >= 38;
    parts.push(format!("doubled space {ok}/40 within 3 SE"));
    let msg = parts.join(", ");
    if pass {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_7() -> Outcome {
    let mut s = substream(7, 0);
    let mut worst: f64 = 0.0;
    let grid = [0.5, 1.0, 2.0];
    for k in 0..50 {
        let dim = 2 + k % 3;
        let model = random_model(dim, 1 + k % 2, &mut s);
        let a = Operator::new(DMatrix::from_fn(dim, dim, |_, _| s.complex_gaussian())).unwrap();
        let b = Operator::new(DMatrix::from_fn(dim, dim, |_, _| s.complex_gaussian())).unwrap();
        let psi = haar_random_ket(dim, &mut s).unwrap();
        // Zero delay: w⟨φ|A|ψ⟩ = ⟨ψ|AB|ψ⟩.
        let (theta, w) = doubled_seed(&psi, &b).unwrap();
        let lhs = theta.cross_element(&a).unwrap() * w;
        let rhs = a.mul(&b).unwrap().matrix_element(&psi, &psi).unwrap();
        worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1.0));
        // B = I: the doubled trajectory reproduces the single-space one.
        let u = qsd(1e-3);
        let single = u.prepare(&model).map_err(|e| e.to_string())?;
        let doubled = u.prepare(&extend_model(&model)).map_err(|e| e.to_string())?;
        let (theta, w) = doubled_seed(&psi, &Operator::identity(dim).unwrap()).unwrap();
        let mut one = vec![C64::new(0.0, 0.0); grid.len()];
        let mut two = one.clone();
        let mut v = psi.amplitudes().to_vec();
        single
            .run(&mut v, &grid, &mut substream(70, k as u64), &mut |n, x, sc| {
                one[n] = a.matrix_element(&Ket::new(x.to_vec()).unwrap(), &Ket::new(x.to_vec()).unwrap()).unwrap() * sc;
            })
            .map_err(|e| e.to_string())?;
        let mut v = theta.to_ket().amplitudes().to_vec();
        doubled
            .run(&mut v, &grid, &mut substream(70, k as u64), &mut |n, x, sc| {
                let d = DoubledState::from_amplitudes(x).unwrap();
                two[n] = d.cross_element(&a).unwrap() * (w * sc);
            })
            .map_err(|e| e.to_string())?;
        for (x, y) in one.iter().zip(&two) {
            worst = worst.max((x - y).norm() / x.norm().max(1.0));
        }
    }
    let grid40: Vec<f64> = (1..=40).map(|k| k as f64 * 0.1).collect();
    let id = heisenberg_element(&Operator::identity(2).unwrap(), &excited(), &plus(), &decay_model(1.0), &grid40, 1000, &qsd(1e-3), &opts(7))
        .map_err(|e| e.to_string())?;
    let overlap = excited().inner(&plus());
    let ok = (0..40).filter(|&k| (id.mean[k] - overlap).norm() < 3.0 * id.std_error[k]).count();
    let msg = format!("per-realization identities to {worst:.1e}, A=I element within 3 SE at {ok}/40 nodes");
    if worst < 1e-12 && ok == 40 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_8() -> Outcome {
    let model = fluorescence_model(10.0, 1.0);
    let tau: Vec<f64> = (0..31).map(|k| k as f64 * 0.1).collect();
    let req = CorrelationRequest {
        a: sigma_plus(),
        b: sigma_minus(),
        t: 0.0,
        tau_grid: tau.clone(),
        n_trajectories: 2,
        initial: InitialCondition::SteadyState,
        warmup_time: Some(30.0),
    };
    let rho = steady_state(&model).map_err(|e| e.to_string())?;
    let oracle = oracle_two_time(&req.a, &req.b, &model, &rho, 0.0, &tau, &OdeConfig::default()).map_err(|e| e.to_string())?;
    let q = qsd(1e-3);
    let j = JumpUnraveling::new(1e-3).unwrap();
    let n_list = [250, 1000, 4000];
    let points = benchmark_sweep(&req, &model, &oracle, &n_list, &[&q, &j], 8, 1).map_err(|e| e.to_string())?;
    let at = |m: &str| {
        points
            .iter()
            .filter(|p| p.method == m)
            .max_by_key(|p| p.n)
            .map(|p| p.wall_time_at_error(0.03))
            .unwrap()
    };
    let (tq, tj) = (at("qsd"), at("jump"));
    // Cost model: each trajectory draws a Haar start (2 reals per
    // component); QSD draws 2 per step and channel; the jump method draws
    // 2 per jump plus one threshold per propagated segment.
    let mut counters_ok = true;
    for p in &points {
        let n = p.n as u64;
        let expected = match p.method.as_str() {
            "qsd" => 2 * p.steps_total + 4 * n,
            _ => 2 * p.jumps_total + 4 * n + 2 * n,
        };
        counters_ok &= p.draws_total == expected;
    }
    let msg = format!(
        "time to 3% error: jump {tj:.2} s, qsd {tq:.2} s (ratio {:.2}); draw counters {}",
        tq / tj,
        if counters_ok { "match" } else { "do not match" }
    );
    if tj <= tq && counters_ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_9() -> Outcome {
    // ⟨g|σ⁻(2)|e⟩ = e^{-1} under decay; the bias is far above the noise
    // floor at these step sizes.
    let model = decay_model(1.0);
    let exact = (-1.0f64).exp();
    let bias = |dt: f64| -> Result<f64, String> {
        let r = heisenberg_element(&sigma_minus(), &ground(), &excited(), &model, &[2.0], 100_000, &qsd(dt), &opts(0))
            .map_err(|e| e.to_string())?;
        Ok((r.mean[0] - C64::new(exact, 0.0)).norm())
    };
    let weak = bias(0.2)? / bias(0.1)?;

    let fl = fluorescence_model(10.0, 1.0);
    let fl_liou = build_liouvillian(&fl);
    let rho0 = DensityMatrix::pure(&excited()).unwrap();
    let reference = (fl_liou.matrix() * C64::new(1.0, 0.0)).exp() * vectorize(rho0.matrix());
    let reference = unvectorize(&reference, 2);
    let err = |h: f64| -> Result<f64, String> {
        let out = evolve(&rho0, &fl_liou, &[1.0], &OdeConfig { h }).map_err(|e| e.to_string())?;
        Ok(max_abs(&(out[0].matrix() - &reference)))
    };
    let (e1, e2, e3) = (err(0.02)?, err(0.01)?, err(0.005)?);
    let (r1, r2) = (e1 / e2, e2 / e3);
    let msg = format!("Euler-Maruyama bias ratio {weak:.2}, RK4 error ratios {r1:.1} and {r2:.1}");
    if (1.6..=2.4).contains(&weak) && (r1 - 16.0).abs() <= 4.0 && (r2 - 16.0).abs() <= 4.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() -> ExitCode {
    type Check = (&'static str, fn() -> Outcome);
    let criteria: [Check; 9] = [
        ("1 analytic matrix element", criterion_1),
        ("2 oracle exactness", criterion_2),
        ("3 doubled-space block property", criterion_3),
        ("4 unraveling covariance", criterion_4),
        ("5 two-time correlation", criterion_5),
        ("6 coupled-scheme instability", criterion_6),
        ("7 estimator identities", criterion_7),
        ("8 benchmark ordering", criterion_8),
        ("9 convergence orders", criterion_9),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let (tag, msg) = match check() {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("{tag} criterion {name}: {msg} [{:.1} s]", start.elapsed().as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
