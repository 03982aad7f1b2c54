//! Acceptance checks: one PASS/FAIL line per criterion, non-zero exit if
//! any criterion fails.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use osveta::curvature::{compute_descriptors, fit_quadric, local_frame, VertexDescriptors};
use osveta::decimate::gaussian_perturb;
use osveta::fixtures;
use osveta::harness::{make_training_set, run_survival_experiment, Method, DEFAULT_LEVELS};
use osveta::mesh::TopologyIndex;
use osveta::neuro::{train, FnnModel, TrainingSample};
use osveta::ranking::{evaluate_criteria, osveta_ranking, stability_scores, CriterionSet};
use osveta::{Mesh64, Vec3, VertexDescriptors64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn describe(m: &Mesh64) -> VertexDescriptors64 {
    compute_descriptors(m, &TopologyIndex::build(m))
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

fn within_time(detail: String, elapsed: Duration, limit: Duration) -> Outcome {
    check(
        elapsed < limit,
        format!("{detail}, {:.3} s (limit {} s)", elapsed.as_secs_f64(), limit.as_secs()),
    )
}

fn angle_deficit_pipeline() -> Outcome {
    let start = Instant::now();
    let d = describe(&fixtures::icosphere(3, 1.0));
    let kg = mean(d.records().iter().map(|r| r.kappa_g));
    let kh = mean(d.records().iter().map(|r| r.kappa_h));
    let grid = fixtures::planar_grid::<f64>(12, 12, 0.5);
    let topo = TopologyIndex::build(&grid);
    let g = compute_descriptors(&grid, &topo);
    let (mut worst_kg, mut worst_k) = (0.0_f64, 0.0_f64);
    for v in (0..grid.vertex_count()).filter(|&v| !topo.is_boundary(v)) {
        worst_kg = worst_kg.max(g.get(v).kappa_g.abs());
        worst_k = worst_k.max(g.get(v).mean_curvature_normal.norm());
    }
    let elapsed = start.elapsed();
    let ok = (0.95..=1.05).contains(&kg) && (0.95..=1.05).contains(&kh) && worst_kg < 1e-9 && worst_k < 1e-9;
    within_time(
        format!("mean kG {kg:.5}, mean kH {kh:.5}, grid max |kG| {worst_kg:.1e}, max |K| {worst_k:.1e}"),
        elapsed,
        Duration::from_secs(5),
    )
    .and_then(|d| check(ok, d.clone()).map_err(|_| d))
}

fn quadric_pipeline() -> Outcome {
    let d = describe(&fixtures::icosphere(3, 1.0));
    let kg1 = mean(d.records().iter().map(|r| r.kappa_g1));
    let agree = d
        .records()
        .iter()
        .filter(|r| r.kappa_g.signum() == r.kappa_g1.signum())
        .count() as f64
        / d.len() as f64;

    let f = |x: f64, y: f64| 0.3 * x * x - 1.2 * x * y + 2.0 * y * y + 0.1 * x - 0.4 * y;
    let pts: Vec<Vec3<f64>> = (0..9)
        .map(|i| {
            let t = i as f64 * 0.7;
            let r = 0.1 + 0.03 * i as f64;
            let (x, y) = (r * t.cos(), r * t.sin());
            Vec3::new(x, y, f(x, y))
        })
        .collect();
    let fit = fit_quadric(&pts, &local_frame(Vec3::unit_z()), Vec3::zero()).map_err(|e| e.to_string())?;
    let coeff_err = [fit.a - 0.3, fit.b + 1.2, fit.c - 2.0, fit.d - 0.1, fit.e + 0.4]
        .iter()
        .fold(0.0_f64, |m, e| m.max(e.abs()));
    check(
        (0.90..=1.10).contains(&kg1) && agree >= 0.95 && fit.residual < 1e-10 && coeff_err < 1e-10,
        format!(
            "mean kG1 {kg1:.5}, sign agreement {:.1}%, exact fit residual {:.1e}, coefficient error {coeff_err:.1e}",
            100.0 * agree,
            fit.residual
        ),
    )
}

fn gauss_bonnet() -> Outcome {
    let meshes: Vec<(&str, Mesh64)> = vec![
        ("tetrahedron", fixtures::tetrahedron()),
        ("octahedron", fixtures::octahedron()),
        ("cube", fixtures::cube()),
        ("icosphere", fixtures::icosphere(3, 1.0)),
        ("training-box", fixtures::training_box()),
        ("benchmark-box", fixtures::benchmark_box()),
    ];
    let mut worst = 0.0_f64;
    for (_, m) in &meshes {
        for seed in [0, 1] {
            for mesh in [m.clone(), gaussian_perturb(m, 0.005, seed).map_err(|e| e.to_string())?] {
                let total = describe(&mesh).total_angle_deficit();
                worst = worst.max((total - 4.0 * PI).abs());
            }
        }
    }
    check(
        worst < 1e-6,
        format!("{} closed fixtures before and after noise, max |deficit - 4pi| {worst:.1e}", meshes.len()),
    )
}

fn unflatten(p: &[f64], learning_rate: f64) -> FnnModel<f64> {
    FnnModel {
        hidden_weights: p[0..8].to_vec(),
        hidden_biases: p[8..16].to_vec(),
        output_weights: p[16..24].to_vec(),
        output_bias: p[24],
        learning_rate,
    }
}

fn gradient_check() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let h = 1e-5;
    let eta = 0.1;
    let mut worst = 0.0_f64;
    let mut failures = 0;
    for _ in 0..100 {
        let params: Vec<f64> = (0..25).map(|_| rng.random_range(-2.0..2.0)).collect();
        let inputs: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..1.0)).collect();
        let sample = TrainingSample::new(inputs, rng.random_range(0.0..1.0)).unwrap();
        let g = unflatten(&params, eta).gradients(&sample).unwrap();
        let mut analytic = g.hidden_weights.clone();
        analytic.extend(&g.hidden_biases);
        analytic.extend(&g.output_weights);
        analytic.push(g.output_bias);
        for (k, delta) in analytic.into_iter().enumerate() {
            let loss_at = |offset: f64| {
                let mut p = params.clone();
                p[k] += offset;
                unflatten(&p, eta).loss(&sample).unwrap()
            };
            let numeric = (loss_at(h) - loss_at(-h)) / (2.0 * h);
            // updates are -eta * dE/dp
            let exact = -delta / eta;
            let err = (exact - numeric).abs();
            let rel = err / exact.abs().max(numeric.abs()).max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
            failures += usize::from(err > 1e-8 && rel >= 1e-5);
        }
    }
    let elapsed = start.elapsed();
    within_time(
        format!("100 pairs x 25 parameters, {failures} mismatches, worst relative error {worst:.1e}"),
        elapsed,
        Duration::from_secs(1),
    )
    .and_then(|d| check(failures == 0, d.clone()).map_err(|_| d))
}

fn survival_shape() -> Outcome {
    let start = Instant::now();
    let set = make_training_set(&[fixtures::training_box::<f64>()], 7).map_err(|e| e.to_string())?;
    let model = train(&FnnModel::standard(7), &set.samples, 200, 7)
        .map_err(|e| e.to_string())?
        .model;
    let mesh = fixtures::benchmark_box::<f64>();
    let l = mesh.vertex_count() / 10;
    let report =
        run_survival_experiment(&mesh, &model, l, &DEFAULT_LEVELS, 7, "benchmark-box").map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mut ok = true;
    let mut cells = Vec::new();
    for row in &report.rows {
        let (r, o, n) = (
            row.removed_by(Method::Random),
            row.removed_by(Method::Osveta),
            row.removed_by(Method::Neuro),
        );
        cells.push(format!("{}%: {r}/{o}/{n}", row.level));
        if row.level >= 40.0 {
            ok &= n <= o && o < r;
        }
        if row.level == 40.0 {
            ok &= o as f64 <= 0.25 * r as f64;
        }
    }
    within_time(
        format!("{} vertices, L = {l}, random/osveta/neuro removed {}", mesh.vertex_count(), cells.join(", ")),
        elapsed,
        Duration::from_secs(60),
    )
    .and_then(|d| check(ok, d.clone()).map_err(|_| d))
}

fn osveta(dir: &Path, threads: usize, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_osveta"))
        .current_dir(dir)
        .arg("--threads")
        .arg(threads.to_string())
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn determinism() -> Outcome {
    let commands: Vec<Vec<&str>> = vec![
        vec!["fixture", "--name", "training-box", "--out", "train.off"],
        vec!["fixture", "--name", "benchmark-box", "--out", "bench.obj"],
        vec!["descriptors", "--in", "bench.obj", "--out", "desc.csv"],
        vec!["train", "--in", "train.off", "--seed", "7", "--out", "model.fnn", "--losses", "losses.csv", "--export-set", "set.csv"],
        vec!["rank", "--in", "bench.obj", "--top", "50", "--out", "rank.csv", "--points", "sel.obj"],
        vec!["rank", "--in", "bench.obj", "--criterion", "kg1-pos", "--top", "50", "--out", "rank-kg1.csv"],
        vec!["rank", "--in", "bench.obj", "--method", "neuro", "--model", "model.fnn", "--out", "rank-neuro.csv"],
        vec!["rank", "--in", "bench.obj", "--method", "random", "--seed", "3", "--out", "rank-random.csv"],
        vec!["decimate", "--in", "bench.obj", "--fraction", "0.6", "--seed", "7", "--out", "dec.obj", "--trace", "trace.csv", "--map", "map.csv"],
        vec!["perturb", "--in", "bench.obj", "--sigma", "0.005", "--seed", "7", "--out", "noisy.off"],
        vec!["eval", "--in", "bench.obj", "--model", "model.fnn", "--seed", "7", "--out", "report.md"],
        vec!["eval", "--in", "noisy.off", "--model", "model.fnn", "--L", "100", "--levels", "0,20,40,60,80,90", "--seed", "7", "--out", "report.csv"],
    ];
    let runs = [("a", 1), ("b", 1), ("c", 4)];
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (name, threads) in runs {
        let dir = root.path().join(name);
        fs::create_dir(&dir).map_err(|e| e.to_string())?;
        for c in &commands {
            osveta(&dir, threads, c)?;
        }
    }
    let mut files: Vec<String> = fs::read_dir(root.path().join("a"))
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    files.sort();
    let mut differing = Vec::new();
    for f in &files {
        let a = fs::read(root.path().join("a").join(f)).unwrap();
        for (name, _) in &runs[1..] {
            if fs::read(root.path().join(name).join(f)).ok().as_ref() != Some(&a) {
                differing.push(format!("{f} ({name})"));
            }
        }
    }
    check(
        differing.is_empty(),
        format!(
            "{} commands, {} output files compared across two 1-thread runs and a 4-thread run; differing: {:?}",
            commands.len(),
            files.len(),
            differing
        ),
    )
}

fn rotation(axis: Vec3<f64>, angle: f64) -> impl Fn(Vec3<f64>) -> Vec3<f64> {
    let k = axis.normalized().unwrap();
    move |v: Vec3<f64>| v * angle.cos() + k.cross(v) * angle.sin() + k * (k.dot(v) * (1.0 - angle.cos()))
}

fn masks(d: &VertexDescriptors<f64>) -> Vec<Option<u32>> {
    evaluate_criteria(d, &CriterionSet::standard()).as_slice().to_vec()
}

fn ranking_invariances() -> Outcome {
    let meshes: Vec<Mesh64> = vec![
        fixtures::icosphere(3, 1.0),
        fixtures::sphere_and_cube(),
        fixtures::training_box(),
        fixtures::cube(),
    ];
    let crit = CriterionSet::standard();
    let mut scale_bad = 0;
    let mut perm_bad = 0;
    let mut worst_rigid = 0.0_f64;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for m in &meshes {
        let d = describe(m);
        let base = masks(&d);
        for lambda in [0.001, 0.37, 3.0, 250.0] {
            if masks(&describe(&m.map_positions(|p| p * lambda))) != base {
                scale_bad += 1;
            }
        }

        let mut perm: Vec<usize> = (0..m.vertex_count()).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
        let pd = describe(&m.permute_vertices(&perm));
        let s = stability_scores(&evaluate_criteria(&d, &crit), &crit);
        let ps = stability_scores(&evaluate_criteria(&pd, &crit), &crit);
        perm_bad += (0..m.vertex_count()).filter(|&i| ps[perm[i]] != s[i]).count();

        let rot = rotation(Vec3::new(0.3, -0.5, 0.8), 1.1);
        let shift = Vec3::new(2.5, -1.0, 0.75);
        let moved = describe(&m.map_positions(|p| rot(p) + shift));
        let scale: Vec<f64> = (0..9)
            .map(|k| d.records().iter().map(|r| r.scalars()[k].abs()).fold(0.0, f64::max).max(1e-300))
            .collect();
        for (a, b) in d.records().iter().zip(moved.records()) {
            for ((x, y), s) in a.scalars().into_iter().zip(b.scalars()).zip(&scale) {
                worst_rigid = worst_rigid.max((x - y).abs() / x.abs().max(y.abs()).max(1e-6 * s));
            }
        }
    }
    let (ranking, _) = osveta_ranking(&describe(&meshes[1]), &crit);
    let sorted = ranking.scores().windows(2).all(|w| w[0] >= w[1]);
    check(
        scale_bad == 0 && perm_bad == 0 && worst_rigid < 1e-6 && sorted,
        format!(
            "{} meshes: {scale_bad} scaled mask mismatches, {perm_bad} permuted score mismatches, worst rigid-motion relative change {worst_rigid:.1e}",
            meshes.len()
        ),
    )
}

fn training_sanity() -> Outcome {
    let set = make_training_set(&[fixtures::training_box::<f64>()], 7).map_err(|e| e.to_string())?;
    let report = train(&FnnModel::standard(7), &set.samples, 200, 7).map_err(|e| e.to_string())?;
    let first = report.losses[0];
    let last = *report.losses.last().unwrap();
    let finite = report.losses.iter().all(|l| l.is_finite()) && report.model.is_finite();
    check(
        finite && last <= 0.5 * first,
        format!(
            "{} samples, 200 epochs at rate 0.1: epoch-1 loss {first:.5}, final loss {last:.5} ({:.1}% reduction)",
            set.samples.len(),
            100.0 * (1.0 - last / first)
        ),
    )
}

fn main() {
    type Check = (&'static str, fn() -> Outcome);
    let criteria: [Check; 8] = [
        ("analytic curvature, angle-deficit pipeline", angle_deficit_pipeline),
        ("analytic curvature, quadric pipeline", quadric_pipeline),
        ("Gauss-Bonnet", gauss_bonnet),
        ("gradient check", gradient_check),
        ("survival table shape", survival_shape),
        ("determinism", determinism),
        ("ranking invariances", ranking_invariances),
        ("training sanity", training_sanity),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("acceptance {} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("acceptance {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
