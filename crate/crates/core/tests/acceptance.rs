//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits nonzero when any fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symmpix::axis::{axis_from_cluster, f_score, match_axes, SymmetryAxis};
use symmpix::clustering::MirrorSplit;
use symmpix::curve::{curve_normals, Curve};
use symmpix::graph::{extract_cliques, min_vertex_cover_lp, PairGraph};
use symmpix::image::{ColorSpace, RasterImage};
use symmpix::metrics::{achievable_segmentation_accuracy, boundary_recall, under_segmentation_error};
use symmpix::pairs::{detection_probability, normal_agreement_score};
use symmpix::reflection::ReflectionTransform;
use symmpix::segment::{error_rate, symmetric_segment, BinaryMask};
use symmpix::symmslic::{run_symmslic, symmslic_with_pairs, LabelMap, SymmSlicParams};
use symmpix::synth::{generate, SynthParams};
use symmpix::{Pixel, Vec2};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("detection probability", c01_detection_probability),
        ("reflection algebra", c02_reflection_algebra),
        ("normal agreement score", c03_score),
        ("vertex cover", c04_vertex_cover),
        ("clique extraction", c05_cliques),
        ("symmetric centers and sizes", c06_mirror_centers),
        ("pairs and axes on synthetic images", c07_synthetic_axes),
        ("plain SLIC without pairs", c08_plain_slic),
        ("metrics against brute force", c09_metrics),
        ("symmetric segmentation IoU", c10_segmentation),
        ("640x480 runtime", c11_runtime),
        ("CLI determinism", c12_cli_determinism),
    ];
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let id = n + 1;
        if let Some(f) = &filter {
            if f.parse::<usize>().ok() != Some(id) {
                continue;
            }
        }
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:2} PASS {name} ({secs:.2} s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:2} FAIL {name} ({secs:.2} s): {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn c01_detection_probability() -> Outcome {
    let p = detection_probability(3000, 200, 5);
    ensure((p - 0.8124).abs() <= 1e-4, format!("got {p:.6}"))?;
    Ok(format!("{p:.6}"))
}

fn random_transform(rng: &mut ChaCha8Rng) -> ReflectionTransform {
    let p = Vec2::new(rng.random_range(-500.0..500.0), rng.random_range(-500.0..500.0));
    ReflectionTransform::from_axis(p, rng.random_range(-10.0..10.0))
}

fn random_point(rng: &mut ChaCha8Rng) -> Vec2 {
    Vec2::new(rng.random_range(-1000.0..1000.0), rng.random_range(-1000.0..1000.0))
}

fn c02_reflection_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for n in 0..10_000 {
        let t = if n % 2 == 0 {
            random_transform(&mut rng)
        } else {
            let a = random_point(&mut rng);
            let b = random_point(&mut rng);
            ReflectionTransform::from_pair(a, b).map_err(|e| e.to_string())?
        };
        let (p, q) = (random_point(&mut rng), random_point(&mut rng));
        let v = random_point(&mut rng);
        worst = worst.max(t.reflect_point(t.reflect_point(p)).distance(p));
        worst = worst.max(t.reflect_vector(t.reflect_vector(v)).distance(v));
        worst = worst.max((t.reflect_point(p).distance(t.reflect_point(q)) - p.distance(q)).abs());
        worst = worst.max((t.reflect_vector(v).norm() - v.norm()).abs());
        let m = t.matrix();
        worst = worst.max((m[0][0] * m[1][1] - m[0][1] * m[1][0] + 1.0).abs());

        let samples: Vec<Vec2> = (0..8).map(|_| random_point(&mut rng)).collect();
        let normals: Vec<Vec2> = (0..8)
            .map(|k| Vec2::new((k as f64).cos(), (k as f64).sin()))
            .collect();
        let c = Curve {
            anchor: Pixel::new(0, 0),
            samples,
            normals,
        };
        let back = t.reflect_curve(&t.reflect_curve(&c));
        for (a, b) in back.samples.iter().zip(&c.samples) {
            worst = worst.max(a.distance(*b));
        }
        for (a, b) in back.normals.iter().zip(&c.normals) {
            worst = worst.max(a.distance(*b));
        }
        let once = t.reflect_curve(&c);
        for k in 1..8 {
            let d = once.samples[k].distance(once.samples[k - 1]) - c.samples[k].distance(c.samples[k - 1]);
            worst = worst.max(d.abs());
        }
    }
    ensure(worst <= 1e-9, format!("worst deviation {worst:e}"))?;
    Ok(format!("worst deviation {worst:.2e} over 10^4 transforms"))
}

/// A smooth random curve of 64 samples: an arc or a wiggle.
fn random_curve(rng: &mut ChaCha8Rng) -> Curve {
    let origin = Vec2::new(rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0));
    let samples: Vec<Vec2> = if rng.random_bool(0.5) {
        let r = rng.random_range(8.0..40.0);
        let a0 = rng.random_range(0.0..6.28);
        let span = rng.random_range(0.6..2.5);
        (0..64)
            .map(|j| {
                let a = a0 + span * j as f64 / 63.0;
                origin + Vec2::new(a.cos(), a.sin()) * r
            })
            .collect()
    } else {
        let phi: f64 = rng.random_range(0.0..6.28);
        let (amp, freq) = (rng.random_range(1.0..6.0), rng.random_range(0.05..0.2));
        let (u, v) = (Vec2::new(phi.cos(), phi.sin()), Vec2::new(-phi.sin(), phi.cos()));
        (0..64)
            .map(|j| {
                let s = j as f64;
                origin + u * s + v * (amp * (freq * s).sin())
            })
            .collect()
    };
    curve_normals(&Curve {
        anchor: Pixel::new(0, 0),
        samples,
        normals: vec![],
    })
    .expect("distinct samples")
}

fn transform_away_from(rng: &mut ChaCha8Rng, p: Vec2) -> ReflectionTransform {
    loop {
        let t = ReflectionTransform::from_axis(
            Vec2::new(rng.random_range(-150.0..150.0), rng.random_range(-150.0..150.0)),
            rng.random_range(0.0..std::f64::consts::PI),
        );
        if t.signed_distance(p).abs() > 10.0 {
            return t;
        }
    }
}

fn c03_score() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut min_mirror = f64::INFINITY;
    let mut max_mismatch = f64::NEG_INFINITY;
    for n in 0..200 {
        let ci = random_curve(&mut rng);
        let xi = ci.point_at(0.5);
        let axis = transform_away_from(&mut rng, xi);
        let xj = axis.reflect_point(xi);
        let t = ReflectionTransform::from_pair(xi, xj).map_err(|e| e.to_string())?;
        let mirrored: Vec<Vec2> = ci.samples.iter().map(|&s| axis.reflect_point(s)).collect();
        let mut cj = curve_normals(&Curve {
            anchor: Pixel::new(0, 0),
            samples: mirrored,
            normals: vec![],
        })
        .map_err(|e| e.to_string())?;
        if n % 2 == 1 {
            cj = cj.reversed();
        }
        min_mirror = min_mirror.min(normal_agreement_score(&ci, &cj, &t).map_err(|e| e.to_string())?);

        // The partner is the mirror image turned by 90 degrees about xj.
        let turned: Vec<Vec2> = ci.samples.iter().map(|&s| xj + (t.reflect_point(s) - xj).perp()).collect();
        let ck = curve_normals(&Curve {
            anchor: Pixel::new(0, 0),
            samples: turned,
            normals: vec![],
        })
        .map_err(|e| e.to_string())?;
        max_mismatch = max_mismatch.max(normal_agreement_score(&ci, &ck, &t).map_err(|e| e.to_string())?);
    }
    ensure(
        min_mirror >= 1.98 && max_mismatch <= 0.5,
        format!("mirrored min {min_mirror:.4}, mismatched max {max_mismatch:.4}"),
    )?;
    Ok(format!("mirrored min {min_mirror:.4}, mismatched max {max_mismatch:.4}"))
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> PairGraph {
    let mut g = PairGraph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

fn min_cover_exhaustive(g: &PairGraph) -> usize {
    let n = g.vertex_count();
    let edges = g.edges();
    (0u32..1 << n)
        .filter(|mask| edges.iter().all(|&(u, v)| mask & (1 << u) != 0 || mask & (1 << v) != 0))
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap_or(0)
}

fn c04_vertex_cover() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_ratio: f64 = 0.0;
    for k in 0..50 {
        let n = rng.random_range(1..=10);
        let p = [0.2, 0.5, 0.8][k % 3];
        let g = random_graph(&mut rng, n, p);
        let vc = min_vertex_cover_lp(&g);
        let opt = min_cover_exhaustive(&g);
        for (u, v) in g.edges() {
            ensure(
                vc.cover.contains(&u) || vc.cover.contains(&v),
                format!("graph {k}: edge ({u}, {v}) uncovered"),
            )?;
        }
        ensure(vc.cover.len() <= 2 * opt, format!("graph {k}: cover {} > 2 x {opt}", vc.cover.len()))?;
        ensure(vc.lp_objective <= opt as f64 + 1e-12, format!("graph {k}: LP {} > {opt}", vc.lp_objective))?;
        if opt > 0 {
            worst_ratio = worst_ratio.max(vc.cover.len() as f64 / opt as f64);
        }
    }
    Ok(format!("50 graphs, worst cover/optimum {worst_ratio:.2}"))
}

fn c05_cliques() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..50 {
        let n = rng.random_range(10..=15);
        let mut ids: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            ids.swap(i, rng.random_range(0..=i));
        }
        let planted = [&ids[0..5], &ids[5..8], &ids[8..10]];
        let mut g = PairGraph::new(n);
        for c in planted {
            for (a, &u) in c.iter().enumerate() {
                for &v in &c[a + 1..] {
                    g.add_edge(u, v);
                }
            }
        }
        let clusters = extract_cliques(&g, 3);
        ensure(clusters.len() >= 2, format!("trial {trial}: {} clusters", clusters.len()))?;
        for (k, want) in planted.iter().take(2).enumerate() {
            let mut got = clusters[k].clone();
            let mut want = want.to_vec();
            got.sort_unstable();
            want.sort_unstable();
            ensure(got == want, format!("trial {trial}: cluster {k} {got:?}, planted {want:?}"))?;
        }
        for c in &clusters {
            for (a, &u) in c.iter().enumerate() {
                for &v in &c[a + 1..] {
                    ensure(g.has_edge(u, v), format!("trial {trial}: {c:?} is not a clique"))?;
                }
            }
        }
    }
    Ok("50 planted 5+3+2 graphs recovered".into())
}

fn c06_mirror_centers() -> Outcome {
    let synth = generate(&SynthParams::centered(256, 256, 6)).map_err(|e| e.to_string())?;
    let params = SymmSlicParams {
        max_iters: 10,
        conv_tol: 0.0,
        ..SymmSlicParams::default()
    };
    let out = run_symmslic(&synth.image, &params).map_err(|e| e.to_string())?;
    let trace = &out.superpixels.trace;
    ensure(trace.len() == 10, format!("{} iterations ran", trace.len()))?;
    let residual = trace.iter().map(|r| r.max_center_residual).fold(0.0, f64::max);
    let mismatches: usize = trace.iter().map(|r| r.size_mismatches).sum();
    let checked: usize = trace.iter().map(|r| r.checked_pairs).sum();
    ensure(checked > 0, "no pairs to check")?;
    ensure(
        residual <= 1e-6 && mismatches == 0,
        format!("residual {residual:e}, {mismatches} size mismatches"),
    )?;
    Ok(format!("{checked} pair checks, max residual {residual:.1e}, 0 size mismatches"))
}

fn synth_case(seed: u64) -> SynthParams {
    let mut p = SynthParams::centered(256, 256, seed);
    let angle = [90.0, 60.0, 105.0, 75.0, 120.0][seed as usize % 5];
    p.axis = SymmetryAxis::from_angle(p.axis.point, angle, 0);
    p.noise_sigma = (seed % 3) as f64;
    p
}

fn c07_synthetic_axes() -> Outcome {
    let mut good = 0usize;
    let mut total = 0usize;
    let (mut worst_angle, mut worst_dist): (f64, f64) = (0.0, 0.0);
    for seed in 0..20 {
        let synth = generate(&synth_case(seed)).map_err(|e| e.to_string())?;
        let out = run_symmslic(&synth.image, &SymmSlicParams::default()).map_err(|e| e.to_string())?;
        let truth = &synth.truth;
        let mut here = (0, 0);
        for c in &out.clusters {
            for p in &c.pairs {
                let want = truth.partner(Vec2::from_pixel(p.xi));
                here.1 += 1;
                if want.distance(Vec2::from_pixel(p.xj)) <= 2.0 {
                    here.0 += 1;
                }
            }
        }
        ensure(here.1 > 0, format!("seed {seed}: no clustered pairs"))?;
        ensure(
            here.0 as f64 >= 0.9 * here.1 as f64,
            format!("seed {seed}: {}/{} clustered pairs near the true partner", here.0, here.1),
        )?;
        good += here.0;
        total += here.1;

        let axes = out
            .clusters
            .iter()
            .map(axis_from_cluster)
            .collect::<symmpix::Result<Vec<_>>>()
            .map_err(|e| e.to_string())?;
        let main = &axes[0];
        let angle = main.angle_between(&truth.axis);
        let dist = truth.axis.distance_to(main.point).max(main.distance_to(truth.axis.point));
        worst_angle = worst_angle.max(angle);
        worst_dist = worst_dist.max(dist);
        ensure(angle <= 1.0 && dist <= 2.0, format!("seed {seed}: axis off by {angle:.3} deg, {dist:.3} px"))?;
        let m = match_axes(&axes, std::slice::from_ref(&truth.axis), 10.0, 20.0);
        let f = f_score(m.tp, m.fp, m.fn_).map_err(|e| e.to_string())?;
        ensure(f == 1.0, format!("seed {seed}: F = {f} ({m:?})"))?;
    }
    Ok(format!(
        "{good}/{total} clustered pairs within 2 px; axis error <= {worst_angle:.3} deg, {worst_dist:.3} px; F = 1 on 20 images"
    ))
}

/// Textbook SLIC with the library's conventions: grid seeds, a 2S window,
/// lower index wins ties, mean updates, then hole filling and 4-connected
/// cleanup.
fn reference_slic(lab: &RasterImage, k: usize, lambda: f64, max_iters: usize, conv_tol: f64) -> Vec<u32> {
    let (w, h) = lab.dims();
    let n = w * h;
    let step = (n as f64 / k as f64).sqrt();
    let nx = ((w as f64 / step).round() as usize).max(1);
    let ny = ((h as f64 / step).round() as usize).max(1);
    let (sx, sy) = (w as f64 / nx as f64, h as f64 / ny as f64);
    let mut pos: Vec<(f64, f64)> = Vec::new();
    for iy in 0..ny {
        for ix in 0..nx {
            pos.push(((ix as f64 + 0.5) * sx - 0.5, (iy as f64 + 0.5) * sy - 0.5));
        }
    }
    let mut col: Vec<[f64; 3]> = pos
        .iter()
        .map(|&(x, y)| {
            let xi = x.round().clamp(0.0, (w - 1) as f64) as usize;
            let yi = y.round().clamp(0.0, (h - 1) as f64) as usize;
            lab.get(xi, yi)
        })
        .collect();
    let m = pos.len();
    let mut label = vec![-1i64; n];
    let mut dist = vec![f64::INFINITY; n];

    let assign = |pos: &[(f64, f64)], col: &[[f64; 3]], label: &mut [i64], dist: &mut [f64]| {
        label.fill(-1);
        dist.fill(f64::INFINITY);
        for i in 0..m {
            let (cx, cy) = pos[i];
            let x0 = (cx - step).ceil().max(0.0);
            let y0 = (cy - step).ceil().max(0.0);
            let x1 = (cx + step).floor().min(w as f64 - 1.0);
            let y1 = (cy + step).floor().min(h as f64 - 1.0);
            if x0 > x1 || y0 > y1 {
                continue;
            }
            for y in y0 as usize..=y1 as usize {
                for x in x0 as usize..=x1 as usize {
                    let c = lab.get(x, y);
                    let dx = cx - x as f64;
                    let dy = cy - y as f64;
                    let dl = col[i][0] - c[0];
                    let da = col[i][1] - c[1];
                    let db = col[i][2] - c[2];
                    let d = dx * dx + dy * dy + lambda * (dl * dl + da * da + db * db);
                    let idx = y * w + x;
                    if d < dist[idx] {
                        dist[idx] = d;
                        label[idx] = i as i64;
                    }
                }
            }
        }
    };

    for _ in 0..max_iters {
        assign(&pos, &col, &mut label, &mut dist);
        let mut sum = vec![[0.0f64; 5]; m];
        let mut count = vec![0usize; m];
        for idx in 0..n {
            if label[idx] < 0 {
                continue;
            }
            let l = label[idx] as usize;
            let c = lab.data()[idx];
            sum[l][0] += (idx % w) as f64;
            sum[l][1] += (idx / w) as f64;
            for ch in 0..3 {
                sum[l][2 + ch] += c[ch];
            }
            count[l] += 1;
        }
        let (mut moved, mut live) = (0.0, 0usize);
        for i in 0..m {
            if count[i] == 0 {
                continue;
            }
            let c = count[i] as f64;
            let np = (sum[i][0] / c, sum[i][1] / c);
            moved += (np.0 - pos[i].0).hypot(np.1 - pos[i].1);
            live += 1;
            pos[i] = np;
            col[i] = [sum[i][2] / c, sum[i][3] / c, sum[i][4] / c];
        }
        let mean = if live == 0 { 0.0 } else { moved / live as f64 };
        if mean < conv_tol {
            break;
        }
    }
    if max_iters == 0 {
        assign(&pos, &col, &mut label, &mut dist);
    }
    reference_connectivity(label, w, h, k)
}

fn neighbours4(idx: usize, w: usize, h: usize) -> Vec<usize> {
    let (x, y) = (idx % w, idx / w);
    let mut out = Vec::with_capacity(4);
    if x > 0 {
        out.push(idx - 1);
    }
    if y > 0 {
        out.push(idx - w);
    }
    if x + 1 < w {
        out.push(idx + 1);
    }
    if y + 1 < h {
        out.push(idx + w);
    }
    out
}

fn reference_connectivity(mut label: Vec<i64>, w: usize, h: usize, k: usize) -> Vec<u32> {
    let n = w * h;
    if label.iter().all(|&l| l < 0) {
        return vec![0; n];
    }
    while label.iter().any(|&l| l < 0) {
        for idx in 0..n {
            if label[idx] < 0 {
                if let Some(&q) = neighbours4(idx, w, h).iter().find(|&&q| label[q] >= 0) {
                    label[idx] = label[q];
                }
            }
        }
    }

    let mut comp = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = members.len();
        let mut queue = std::collections::VecDeque::from([start]);
        comp[start] = id;
        let mut px = Vec::new();
        while let Some(p) = queue.pop_front() {
            px.push(p);
            for q in neighbours4(p, w, h) {
                if comp[q] == usize::MAX && label[q] == label[start] {
                    comp[q] = id;
                    queue.push_back(q);
                }
            }
        }
        members.push(px);
    }
    let comp_label: Vec<usize> = members.iter().map(|px| label[px[0]] as usize).collect();
    let n_labels = comp_label.iter().max().map_or(0, |&l| l + 1);
    let mut biggest: Vec<Option<usize>> = vec![None; n_labels];
    for id in 0..members.len() {
        let b = &mut biggest[comp_label[id]];
        if b.is_none_or(|b| members[id].len() > members[b].len()) {
            *b = Some(id);
        }
    }
    let mut resolved: Vec<Option<usize>> = vec![None; members.len()];
    for b in biggest.iter().flatten() {
        resolved[*b] = Some(comp_label[*b]);
    }
    let min_size = (n / k / 4).max(1);
    let mut next = n_labels;
    for id in 0..members.len() {
        if resolved[id].is_none() && members[id].len() >= min_size {
            resolved[id] = Some(next);
            next += 1;
        }
    }
    let mut size = vec![0usize; next];
    for id in 0..members.len() {
        if let Some(l) = resolved[id] {
            size[l] += members[id].len();
        }
    }
    loop {
        let (mut progress, mut stuck) = (false, false);
        for id in 0..members.len() {
            if resolved[id].is_some() {
                continue;
            }
            let mut best: Option<usize> = None;
            for &p in &members[id] {
                for q in neighbours4(p, w, h) {
                    let qc = comp[q];
                    if qc == id {
                        continue;
                    }
                    if let Some(l) = resolved[qc] {
                        if best.is_none_or(|b| size[l] > size[b] || (size[l] == size[b] && l < b)) {
                            best = Some(l);
                        }
                    }
                }
            }
            match best {
                Some(l) => {
                    resolved[id] = Some(l);
                    size[l] += members[id].len();
                    progress = true;
                }
                None => stuck = true,
            }
        }
        if !stuck || !progress {
            break;
        }
    }
    let mut out = vec![0usize; n];
    for id in 0..members.len() {
        for &p in &members[id] {
            out[p] = resolved[id].expect("every piece is resolved");
        }
    }
    let mut used: Vec<usize> = out.clone();
    used.sort_unstable();
    used.dedup();
    out.iter()
        .map(|l| used.binary_search(l).expect("present") as u32)
        .collect()
}

fn c08_plain_slic() -> Outcome {
    let mut cases: Vec<(RasterImage, usize, f64, usize, f64)> = Vec::new();
    for (seed, k) in [(1u64, 100usize), (2, 300), (3, 500)] {
        let synth = generate(&synth_case(seed)).map_err(|e| e.to_string())?;
        cases.push((synth.image.to_lab(), k, 10.0, 10, 0.25));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let data: Vec<[f64; 3]> = (0..97 * 61)
        .map(|i| {
            let (x, y) = ((i % 97) as f64, (i / 97) as f64);
            let base = if (x - 40.0).hypot(y - 30.0) < 18.0 { 200.0 } else { 60.0 };
            [base + rng.random_range(-20.0..20.0), 120.0, 255.0 - base]
        })
        .collect();
    let odd = RasterImage::new(97, 61, ColorSpace::Rgb, data).map_err(|e| e.to_string())?;
    cases.push((odd.to_lab(), 50, 3.0, 7, 0.0));
    cases.push((odd.to_lab(), 40, 25.0, 0, 0.25));

    let mut pixels = 0;
    for (n, (lab, k, lambda, iters, conv)) in cases.iter().enumerate() {
        let params = SymmSlicParams {
            k: *k,
            lambda: *lambda,
            max_iters: *iters,
            conv_tol: *conv,
            ..SymmSlicParams::default()
        };
        let out = symmslic_with_pairs(lab, &MirrorSplit::default(), &params).map_err(|e| e.to_string())?;
        ensure(out.pairing.is_empty(), format!("case {n}: pairs without input pairs"))?;
        let want = reference_slic(lab, *k, *lambda, *iters, *conv);
        let diff = out.labels.labels().iter().zip(&want).filter(|(a, b)| a != b).count();
        ensure(diff == 0, format!("case {n}: {diff} pixels differ"))?;
        pixels += want.len();
    }
    Ok(format!("{} cases, {pixels} pixels identical", cases.len()))
}

fn brute_use(s: &[u32], g: &[u32]) -> f64 {
    let n = s.len();
    let mut total = 0usize;
    let mut gs: Vec<u32> = g.to_vec();
    gs.sort_unstable();
    gs.dedup();
    let mut ss: Vec<u32> = s.to_vec();
    ss.sort_unstable();
    ss.dedup();
    for &seg in &gs {
        for &sp in &ss {
            let size = s.iter().filter(|&&v| v == sp).count();
            let overlap = (0..n).filter(|&i| s[i] == sp && g[i] == seg).count();
            if overlap > 0 && overlap as f64 >= 0.05 * size as f64 {
                total += size;
            }
        }
    }
    (total as f64 - n as f64) / n as f64
}

fn is_boundary(l: &[u32], w: usize, h: usize, x: usize, y: usize) -> bool {
    let here = l[y * w + x];
    [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)].iter().any(|&(dx, dy)| {
        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
        nx >= 0 && ny >= 0 && nx < w as i64 && ny < h as i64 && l[ny as usize * w + nx as usize] != here
    })
}

fn brute_br(s: &[u32], g: &[u32], w: usize, h: usize, r: usize) -> f64 {
    let (mut hit, mut total) = (0, 0);
    for y in 0..h {
        for x in 0..w {
            if !is_boundary(g, w, h, x, y) {
                continue;
            }
            total += 1;
            let near = (0..h).any(|yy| {
                (0..w).any(|xx| x.abs_diff(xx).max(y.abs_diff(yy)) <= r && is_boundary(s, w, h, xx, yy))
            });
            if near {
                hit += 1;
            }
        }
    }
    if total == 0 {
        1.0
    } else {
        hit as f64 / total as f64
    }
}

fn brute_asa(s: &[u32], g: &[u32]) -> f64 {
    let mut ss: Vec<u32> = s.to_vec();
    ss.sort_unstable();
    ss.dedup();
    let sum: usize = ss
        .iter()
        .map(|&sp| {
            g.iter()
                .map(|&seg| (0..s.len()).filter(|&i| s[i] == sp && g[i] == seg).count())
                .max()
                .unwrap_or(0)
        })
        .sum();
    sum as f64 / s.len() as f64
}

/// Precision/recall form of the F-score with the matching written out.
fn brute_fscore(det: &[SymmetryAxis], truth: &[SymmetryAxis], at: f64, dt: f64) -> Option<f64> {
    let mut taken = vec![false; truth.len()];
    let mut tp = 0.0;
    for d in det {
        let mut pick: Option<(usize, f64)> = None;
        for (k, t) in truth.iter().enumerate() {
            let ang = {
                let a = (d.angle_degrees() - t.angle_degrees()).rem_euclid(180.0);
                a.min(180.0 - a)
            };
            let off = {
                let n = t.direction.perp();
                ((d.point - t.point).dot(n)).abs()
            };
            if !taken[k] && ang <= at && off <= dt && pick.is_none_or(|(_, b)| ang < b) {
                pick = Some((k, ang));
            }
        }
        if let Some((k, _)) = pick {
            taken[k] = true;
            tp += 1.0;
        }
    }
    if det.is_empty() && truth.is_empty() {
        return None;
    }
    let precision = if det.is_empty() { 0.0 } else { tp / det.len() as f64 };
    let recall = if truth.is_empty() { 0.0 } else { tp / truth.len() as f64 };
    Some(if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    })
}

fn c09_metrics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (w, h) = (8, 8);
    let mut worst: f64 = 0.0;
    let mut track = |a: f64, b: f64, what: &str, n: usize| -> Result<(), String> {
        worst = worst.max((a - b).abs());
        ensure((a - b).abs() <= 1e-12, format!("pair {n}: {what} {a} vs oracle {b}"))
    };
    for n in 0..20 {
        let k1 = rng.random_range(1..=6);
        let k2 = rng.random_range(1..=4);
        let s: Vec<u32> = (0..w * h).map(|_| rng.random_range(0..k1)).collect();
        let g: Vec<u32> = (0..w * h).map(|_| rng.random_range(0..k2)).collect();
        let sm = LabelMap::new(w, h, s.clone()).map_err(|e| e.to_string())?;
        let gm = LabelMap::new(w, h, g.clone()).map_err(|e| e.to_string())?;
        let e = |r: symmpix::Result<f64>| r.map_err(|e| e.to_string());
        track(e(under_segmentation_error(&sm, &gm))?, brute_use(&s, &g), "USE", n)?;
        for r in 0..3 {
            track(e(boundary_recall(&sm, &gm, r))?, brute_br(&s, &g, w, h, r), "BR", n)?;
        }
        track(e(achievable_segmentation_accuracy(&sm, &gm))?, brute_asa(&s, &g), "ASA", n)?;

        let ma = BinaryMask::new(w, h, s.iter().map(|&v| v % 2 == 0).collect()).map_err(|e| e.to_string())?;
        let mb = BinaryMask::new(w, h, g.iter().map(|&v| v % 2 == 0).collect()).map_err(|e| e.to_string())?;
        let wrong = ma.data().iter().zip(mb.data()).filter(|(a, b)| a != b).count();
        track(e(error_rate(&ma, &mb))?, wrong as f64 / (w * h) as f64, "error rate", n)?;

        let random_axes = |rng: &mut ChaCha8Rng, m: usize| -> Vec<SymmetryAxis> {
            (0..m)
                .map(|_| {
                    SymmetryAxis::from_angle(
                        Vec2::new(rng.random_range(0.0..8.0), rng.random_range(0.0..8.0)),
                        rng.random_range(0.0..180.0),
                        1,
                    )
                })
                .collect()
        };
        let nd = rng.random_range(0..4);
        let det = random_axes(&mut rng, nd);
        let nt = rng.random_range(1..4);
        let truth = random_axes(&mut rng, nt);
        let m = match_axes(&det, &truth, 30.0, 2.0);
        let f = e(f_score(m.tp, m.fp, m.fn_))?;
        let want = brute_fscore(&det, &truth, 30.0, 2.0).ok_or("empty axis sets")?;
        track(f, want, "F-score", n)?;
    }

    let g: Vec<u32> = (0..w * h).map(|_| rng.random_range(0..5)).collect();
    let gm = LabelMap::new(w, h, g).map_err(|e| e.to_string())?;
    let e = |r: symmpix::Result<f64>| r.map_err(|e| e.to_string());
    let (u, b, a) = (
        e(under_segmentation_error(&gm, &gm))?,
        e(boundary_recall(&gm, &gm, 0))?,
        e(achievable_segmentation_accuracy(&gm, &gm))?,
    );
    ensure(u == 0.0 && b == 1.0 && a == 1.0, format!("labels = gt gives USE {u}, BR {b}, ASA {a}"))?;
    Ok(format!("20 random 8x8 pairs, worst deviation {worst:.1e}; labels = gt gives USE 0, BR 1, ASA 1"))
}

fn c10_segmentation() -> Outcome {
    let mut ious = Vec::new();
    for seed in 100..110 {
        let synth = generate(&SynthParams::centered(256, 256, seed)).map_err(|e| e.to_string())?;
        let out = run_symmslic(&synth.image, &SymmSlicParams::default()).map_err(|e| e.to_string())?;
        let sp = &out.superpixels;
        let mask = symmetric_segment(&sp.labels, &sp.pairing);
        ious.push(mask.iou(&synth.truth.mask).map_err(|e| e.to_string())?);
    }
    let mut sorted = ious.clone();
    sorted.sort_by(f64::total_cmp);
    let median = 0.5 * (sorted[4] + sorted[5]);
    let list: Vec<String> = ious.iter().map(|v| format!("{v:.2}")).collect();
    ensure(median >= 0.7, format!("median IoU {median:.3} [{}]", list.join(", ")))?;
    Ok(format!("median IoU {median:.3} [{}]", list.join(", ")))
}

fn c11_runtime() -> Outcome {
    let synth = generate(&SynthParams::centered(640, 480, 11)).map_err(|e| e.to_string())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| e.to_string())?;
    let start = Instant::now();
    let out = pool
        .install(|| run_symmslic(&synth.image, &SymmSlicParams::default()))
        .map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs <= 60.0, format!("{secs:.1} s"))?;
    Ok(format!(
        "{secs:.2} s on one thread, {} superpixels",
        out.superpixels.labels.sizes().iter().filter(|&&s| s > 0).count()
    ))
}

fn symmpix(dir: &Path, args: &[&str], threads: &str) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_symmpix"))
        .current_dir(dir)
        .env("SYMMPIX_THREADS", threads)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(
        out.status.success(),
        format!("symmpix {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)),
    )
}

fn c12_cli_determinism() -> Outcome {
    let runs: Vec<Vec<&str>> = vec![
        vec!["synth", "--out-dir", "bundle", "--seed", "12", "--angle", "80", "--noise", "1"],
        vec![
            "pairs", "bundle/image.png", "-o", "pairs.json", "--clusters", "clusters.json",
            "--overlay", "pairs.png", "--edges", "edges.png", "--seed", "5",
        ],
        vec![
            "superpixels", "bundle/image.png", "--labels", "labels.png", "--pairing", "pairing.json",
            "--overlay", "sp.png", "-k", "300", "--lambda", "12", "--iters", "8", "--seed", "5",
        ],
        vec!["superpixels", "bundle/image.png", "--labels", "labels.csv", "--pairing", "pairing2.json", "--seed", "5"],
        vec!["axes", "bundle/image.png", "-o", "axes.json", "--overlay", "axes.png", "--seed", "5"],
        vec!["axes", "clusters.json", "-o", "axes_from_clusters.json"],
        vec!["segment", "bundle/image.png", "-o", "mask.png", "--seed", "5"],
        vec!["eval", "labels.png", "--gt", "bundle/segments.png", "--metric", "br", "-r", "2", "-o", "br.json", "--csv", "br.csv"],
        vec!["eval", "mask.png", "--gt", "bundle/mask.png", "--metric", "error-rate", "-o", "err.json"],
        vec!["eval", "axes.json", "--gt", "bundle/truth.json", "--metric", "fscore", "-o", "f.json"],
    ];
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    for (d, threads) in dirs.iter().zip(["0", "0", "1"]) {
        for args in &runs {
            symmpix(d.path(), args, threads)?;
        }
    }
    let mut names: Vec<std::path::PathBuf> = Vec::new();
    for sub in ["", "bundle"] {
        for entry in std::fs::read_dir(dirs[0].path().join(sub)).map_err(|e| e.to_string())? {
            let p = entry.map_err(|e| e.to_string())?.path();
            if p.is_file() {
                names.push(Path::new(sub).join(p.file_name().expect("file")));
            }
        }
    }
    names.sort();
    for name in &names {
        let a = std::fs::read(dirs[0].path().join(name)).map_err(|e| e.to_string())?;
        for d in &dirs[1..] {
            let b = std::fs::read(d.path().join(name)).map_err(|e| e.to_string())?;
            ensure(a == b, format!("{} differs between runs", name.display()))?;
        }
    }
    let missing = Command::new(env!("CARGO_BIN_EXE_symmpix"))
        .current_dir(dirs[0].path())
        .args(["pairs", "no-such-image.png", "-o", "never.json"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(!missing.status.success(), "missing input exited zero")?;
    ensure(!dirs[0].path().join("never.json").exists(), "output written for a failed run")?;
    Ok(format!(
        "{} subcommand runs, {} files byte-identical across 3 runs (one single-threaded)",
        runs.len(),
        names.len()
    ))
}
