//! Acceptance checks 1 to 10. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use dhn::analysis::{
    approx_lower_bound, exact_pieces, mixed_radix_digits, binary_digits, piece_bound, rect_arch,
    sampled_pieces, shatter_verify, sup_error, taylor_reference, vc_upper_bound, GridSpec,
};
use dhn::builders::{
    binary_bit_extractor_lin, uniform_skips, decoder, holder_approximator,
    hyperrectangle_indicator, mixed_radix_bit_extractor, parity_network, piecewise_constant_1d,
    square_approximator, xor_network, BitTable, Domain, Geometry, HolderConfig, LinVariant,
    PieceSpec,
};
use dhn::net::{Architecture, KindTag, NetworkKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    ensure(elapsed <= Duration::from_secs(limit_s), || {
        format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64())
    })
}

fn c1_square_sandwich() -> Outcome {
    let start = Instant::now();
    let mut worst_ratio: f64 = 0.0;
    for l in 2..=5 {
        for s in 1..=3 {
            let (p1, skips) = uniform_skips(l, s);
            let b = square_approximator(l, p1, &skips).map_err(|e| e.to_string())?;
            let total = (s + 1).pow(l as u32 - 1);
            let grid = GridSpec::uniform(100_000).with_points((0..=total).map(|k| k as f64 / total as f64));
            let e = sup_error(&b.net, |x| x[0] * x[0], &Domain::unit(1), &grid).map_err(|e| e.to_string())?;
            let hi = 1.0 / total as f64;
            ensure(e.value >= hi / 2.0 && e.value <= hi, || {
                format!("L={l} s={s}: sup error {} outside [{}, {hi}]", e.value, hi / 2.0)
            })?;
            ensure(b.guarantee.map(|g| g.sup_error_bound) == Some(hi), || {
                format!("L={l} s={s}: recorded guarantee differs from (s+1)^-(L-1)")
            })?;
            worst_ratio = worst_ratio.max(e.value / hi);
        }
    }
    within(start.elapsed(), 10)?;
    Ok(format!(
        "12 configurations inside [bound/2, bound], max ratio {worst_ratio:.4}, {:.2} s",
        start.elapsed().as_secs_f64()
    ))
}

fn c2_piece_soundness() -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut max_pieces = 0usize;
    for (ki, kind) in [KindTag::Plain, KindTag::Skip, KindTag::Lin].into_iter().enumerate() {
        let results: Vec<Result<usize, String>> = (0..1000u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(1_000 * ki as u64 + i);
                let net = common::random_network(&mut rng, kind, common::SMALL);
                let bound = piece_bound(net.arch());
                let mut most = 0;
                for _ in 0..5 {
                    let x1 = common::random_point(&mut rng, net.input_dim());
                    let x2 = common::random_point(&mut rng, net.input_dim());
                    let exact = exact_pieces(&net, &x1, &x2).map_err(|e| e.to_string())?.piece_count();
                    if exact as u128 > bound {
                        return Err(format!("{kind} net {i}: {exact} pieces > bound {bound}"));
                    }
                    let sampled = sampled_pieces(&net, &x1, &x2, 1_000_000, 1e-12).map_err(|e| e.to_string())?;
                    if sampled != exact {
                        return Err(format!("{kind} net {i}: exact {exact} pieces, sampled {sampled}"));
                    }
                    most = most.max(exact);
                }
                Ok(most)
            })
            .collect();
        for r in results {
            max_pieces = max_pieces.max(r?);
            checked += 5;
        }
    }
    within(start.elapsed(), 60)?;
    Ok(format!(
        "{checked} segments, no bound violation, exact = sampled everywhere (max {max_pieces} pieces), {:.1} s",
        start.elapsed().as_secs_f64()
    ))
}

fn c3_piece_achievability() -> Outcome {
    let mut cases = Vec::new();
    for p1 in 1..=2 {
        for l in 2..=4 {
            let mut radix = vec![p1 + 1];
            radix.extend(std::iter::repeat(2).take(l - 1));
            let b = mixed_radix_bit_extractor(&radix).map_err(|e| e.to_string())?;
            let arch = b.net.arch();
            ensure(arch.depth() == l && arch.widths[1] == p1, || format!("p1={p1} L={l}: shape {:?}", arch.widths))?;
            ensure(arch.kind == NetworkKind::Skip { skip_counts: vec![1; l - 1] }, || {
                format!("p1={p1} L={l}: skip counts {:?}", arch.kind)
            })?;
            let bound = piece_bound(arch);
            let pieces = exact_pieces(&b.net, &[0.0], &[1.0]).map_err(|e| e.to_string())?.piece_count();
            ensure(pieces as u128 == bound, || format!("p1={p1} L={l}: {pieces} pieces, bound {bound}"))?;
            cases.push(pieces.to_string());
        }
    }
    Ok(format!("bound attained in 6 cases ({} pieces)", cases.join(", ")))
}

fn c4_bit_extraction() -> Outcome {
    let radices: Vec<Vec<usize>> = vec![
        vec![2; 20],
        vec![4; 10],
        vec![16; 5],
        vec![100, 100, 100],
        vec![3, 5, 7, 11, 13],
        vec![10, 10, 10],
        vec![7, 2, 9, 2],
        vec![2],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut total = 0usize;
    for radix in &radices {
        let b = mixed_radix_bit_extractor(radix).map_err(|e| e.to_string())?;
        let s: usize = radix.iter().product();
        let mut xs: Vec<f64> = (0..10_000).map(|_| rng.gen_range(0.0..=1.0)).collect();
        xs.extend((0..=s).map(|k| k as f64 / s as f64));
        let labels: Vec<(usize, usize, String)> = radix
            .iter()
            .enumerate()
            .flat_map(|(l, &d)| (1..d).map(move |t| (l, t, format!("b{}>={t}", l + 1))))
            .collect();
        let bad = xs.par_iter().find_any(|&&x| {
            let oracle = mixed_radix_digits(x, radix).expect("x in range").digits;
            let (_, trace) = b.net.eval_traced(&[x]).expect("valid input");
            let mut got = vec![0usize; radix.len()];
            for (l, _, label) in &labels {
                got[*l] += b.read_probe(&trace, label).expect("probe exists") as usize;
            }
            got != oracle
        });
        if let Some(x) = bad {
            return Err(format!("radix {radix:?}: digits differ at x = {x}"));
        }
        total += xs.len();
    }
    for variant in [LinVariant::Wide, LinVariant::Narrow] {
        for l in [1usize, 5, 12, 20] {
            let b = binary_bit_extractor_lin(l, variant).map_err(|e| e.to_string())?;
            let s = 1usize << l;
            let mut xs: Vec<f64> = (0..10_000).map(|_| rng.gen_range(0.0..=1.0)).collect();
            xs.extend((0..=s).map(|k| k as f64 / s as f64));
            let labels: Vec<String> = (1..=l).map(|i| format!("b{i}")).collect();
            let bad = xs.par_iter().find_any(|&&x| {
                let oracle: Vec<f64> = binary_digits(x, l).expect("x in range").into_iter().map(f64::from).collect();
                b.probe_values(&[x], &labels).expect("valid input") != oracle
            });
            if let Some(x) = bad {
                return Err(format!("lin {variant:?} L={l}: bits differ at x = {x}"));
            }
            total += xs.len();
        }
    }
    Ok(format!("{} radix vectors and 8 lin extractors, {total} points exact", radices.len()))
}

fn payloads(g: Geometry, rng: &mut ChaCha8Rng) -> Vec<Vec<u8>> {
    let (jn, kn, rn) = g.sizes();
    let cells = jn * kn * rn;
    if cells <= 8 {
        (0..1u32 << cells)
            .map(|v| (0..cells).map(|i| ((v >> i) & 1) as u8).collect())
            .collect()
    } else {
        (0..200).map(|_| (0..cells).map(|_| rng.gen_range(0..=1u8)).collect()).collect()
    }
}

fn c5_decoders() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut geometries = Vec::new();
    for (m, n) in [(1, 1), (2, 1), (1, 2)] {
        geometries.push(Geometry::skip(1, m, n).map_err(|e| e.to_string())?);
    }
    for (m, n, t) in [(1, 0, 1), (1, 1, 1)] {
        geometries.push(Geometry::lin(1, m, n, t).map_err(|e| e.to_string())?);
    }
    let mut tables = 0;
    for g in geometries {
        let (jn, kn, rn) = g.sizes();
        for payload in payloads(g, &mut rng) {
            let table = BitTable::new(g, payload).map_err(|e| e.to_string())?;
            let b = decoder(&table, None).map_err(|e| e.to_string())?;
            for j in 1..=jn {
                for k in 1..=kn {
                    for r in 1..=rn {
                        let y = b.net.eval(&decoder_input(&g, j, k, r)).map_err(|e| e.to_string())?[0];
                        let eta = match g.kind {
                            KindTag::Skip => u8::from(y >= 0.0),
                            _ if y == 0.0 || y == 1.0 => y as u8,
                            _ => return Err(format!("{g:?}: lin decoder output {y} is not a bit")),
                        };
                        ensure(eta == table.get(j, k, r), || {
                            format!("{g:?} cell ({j},{k},{r}): decoder {eta}, table {}", table.get(j, k, r))
                        })?;
                    }
                }
            }
            tables += 1;
        }
    }
    within(start.elapsed(), 120)?;
    Ok(format!("{tables} tables over 5 geometries exact at every cell, {:.1} s", start.elapsed().as_secs_f64()))
}

fn decoder_input(g: &Geometry, j: usize, k: usize, r: usize) -> Vec<f64> {
    g.bits_of_cell(j, k, r).into_iter().map(f64::from).collect()
}

fn c6_shattering() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    for (kind, m, n, t) in [(KindTag::Skip, 1, 1, 0), (KindTag::Lin, 1, 0, 1)] {
        let c = shatter_verify(kind, m, n, t).map_err(|e| e.to_string())?;
        ensure(c.points.len() == 8 && c.labelings_tried == 256 && c.passed(), || {
            format!("{kind}: {}/{} labelings realized on {} points", c.realized, c.labelings_tried, c.points.len())
        })?;
        ensure(c.within_budget(), || {
            format!(
                "{kind}: depth {} width {} exceed budget ({}, {})",
                c.max_depth, c.max_width, c.depth_budget, c.width_budget
            )
        })?;
        parts.push(format!(
            "{kind} 256/256 (depth {} <= {}, width {} <= {})",
            c.max_depth, c.depth_budget, c.max_width, c.width_budget
        ));
    }
    within(start.elapsed(), 60)?;
    Ok(parts.join("; "))
}

struct Target {
    name: &'static str,
    d: usize,
    beta: f64,
    norm: f64,
    bounds: Vec<f64>,
    f: fn(&[f64]) -> f64,
    derivative: fn(&[usize], &[f64]) -> f64,
}

fn targets() -> Vec<Target> {
    vec![
        Target {
            name: "x^2",
            d: 1,
            beta: 2.0,
            norm: 5.0,
            bounds: vec![1.0, 2.0],
            f: |x| x[0] * x[0],
            derivative: |a, x| match a[0] {
                0 => x[0] * x[0],
                1 => 2.0 * x[0],
                _ => 2.0,
            },
        },
        Target {
            name: "x1*x2",
            d: 2,
            beta: 2.0,
            norm: 5.0,
            bounds: vec![1.0, 1.0, 1.0],
            f: |x| x[0] * x[1],
            derivative: |a, x| match (a[0], a[1]) {
                (0, 0) => x[0] * x[1],
                (1, 0) => x[1],
                (0, 1) => x[0],
                (1, 1) => 1.0,
                _ => 0.0,
            },
        },
        Target {
            name: "x^3-x",
            d: 1,
            beta: 3.0,
            norm: 15.0,
            bounds: vec![1.0, 2.0, 6.0],
            f: |x| x[0].powi(3) - x[0],
            derivative: |a, x| match a[0] {
                0 => x[0].powi(3) - x[0],
                1 => 3.0 * x[0] * x[0] - 1.0,
                2 => 6.0 * x[0],
                _ => 6.0,
            },
        },
    ]
}

fn c7_holder() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut rows = Vec::new();
    for target in targets() {
        for (m, n) in [(1, 1), (2, 2)] {
            for kind in [KindTag::Skip, KindTag::Lin] {
                let derivative = target.derivative;
                let cfg = HolderConfig {
                    beta: target.beta,
                    d: target.d,
                    m,
                    n,
                    t: usize::from(kind == KindTag::Lin),
                    bounds: target.bounds.clone(),
                    holder_norm: target.norm,
                    derivative: Arc::new(derivative),
                };
                let tag = format!("{} {kind} m={m} n={n}", target.name);
                let b = holder_approximator(kind, &cfg).map_err(|e| format!("{tag}: {e}"))?;
                let g = cfg.geometry(kind).map_err(|e| e.to_string())?;
                let q0 = g.digits();
                let q = cfg.bits(kind).map_err(|e| e.to_string())?;
                let bound = 2.0 * target.norm * (-(target.beta * q0 as f64)).exp2();
                ensure(b.guarantee.map(|g| g.sup_error_bound) == Some(bound), || format!("{tag}: guarantee differs"))?;
                let grid = match target.d {
                    1 => GridSpec::uniform(100_000).with_points((0..=1u32 << q.min(16)).map(|k| k as f64 / f64::from(1u32 << q.min(16)))),
                    _ => GridSpec::uniform(129),
                };
                let e = sup_error(&b.net, target.f, &Domain::unit(target.d), &grid).map_err(|e| e.to_string())?;
                ensure(e.value <= bound, || format!("{tag}: sup error {} > {bound} at {:?}", e.value, e.argmax))?;
                let slack = (-(q as f64)).exp2() * target.bounds.iter().sum::<f64>();
                let mut worst: f64 = 0.0;
                for _ in 0..1000 {
                    let x = common::random_point(&mut rng, target.d);
                    let c = g.center_of_bits(&g.bits_of_point(&x).map_err(|e| e.to_string())?);
                    let reference = taylor_reference(&cfg.derivative, target.beta, &c, &x).map_err(|e| e.to_string())?;
                    let y = b.net.eval(&x).map_err(|e| e.to_string())?[0];
                    worst = worst.max((y - reference).abs());
                }
                ensure(worst <= slack, || format!("{tag}: {worst} from the Taylor reference > {slack}"))?;
                rows.push(format!("{tag}: {:.3e} <= {bound:.3e}", e.value));
            }
        }
    }
    Ok(format!("{} constructions within bound and Taylor slack [{}]", rows.len(), rows.join("; ")))
}

fn c8_representation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..500 {
        let d = rng.gen_range(1..=4);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for _ in 0..d {
            let (u, v): (f64, f64) = (rng.gen(), rng.gen());
            a.push(u.min(v));
            b.push(u.max(v));
        }
        let net = hyperrectangle_indicator(&a, &b).map_err(|e| e.to_string())?.net;
        for _ in 0..1000 {
            let x: Vec<f64> = (0..d)
                .map(|c| match rng.gen_range(0..4) {
                    0 => a[c],
                    1 => b[c],
                    _ => rng.gen_range(-0.1..1.1),
                })
                .collect();
            let inside = (0..d).all(|c| a[c] <= x[c] && x[c] <= b[c]);
            let y = net.eval(&x).map_err(|e| e.to_string())?[0];
            ensure(y == f64::from(u8::from(inside)), || format!("rectangle {i} at {x:?}: {y}"))?;
        }
    }
    for d in 1..=6 {
        let net = parity_network(d).map_err(|e| e.to_string())?.net;
        for signs in 0..1u32 << d {
            for mag in [0.0, 0.25, 1.0] {
                let x: Vec<f64> = (0..d)
                    .map(|c| if (signs >> c) & 1 == 1 { mag } else { -(mag + 0.5) })
                    .collect();
                let want: f64 = x.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).product();
                let y = net.eval(&x).map_err(|e| e.to_string())?[0];
                ensure(y == want, || format!("parity d={d} at {x:?}: {y}"))?;
            }
        }
    }
    let xor = xor_network().map_err(|e| e.to_string())?.net;
    for x1 in [-0.5, 0.0, 0.5] {
        for x2 in [-0.5, 0.0, 0.5] {
            let want = f64::from(u8::from((x1 >= 0.0) != (x2 >= 0.0)));
            let y = xor.eval(&[x1, x2]).map_err(|e| e.to_string())?[0];
            ensure(y == want, || format!("xor at ({x1}, {x2}): {y}"))?;
        }
    }
    let delta = (-24f64).exp2();
    for i in 0..200 {
        let spec = random_piece_spec(&mut rng);
        let net = piecewise_constant_1d(&spec).map_err(|e| e.to_string())?.net;
        for &t in &spec.breakpoints {
            for x in [t - delta, t, t + delta] {
                if !(0.0..=1.0).contains(&x) {
                    continue;
                }
                let y = net.eval(&[x]).map_err(|e| e.to_string())?[0];
                ensure(y == spec.eval(x), || format!("piece spec {i} at {x}: {y} vs {}", spec.eval(x)))?;
            }
        }
    }
    Ok("500 rectangles x 1000 points, parity d<=6, XOR table, 200 step functions: all exact".into())
}

/// Dyadic breakpoints and values, so that the output sums are exact.
fn random_piece_spec(rng: &mut ChaCha8Rng) -> PieceSpec {
    let p = rng.gen_range(0..=8);
    let mut breakpoints: Vec<f64> = (0..p).map(|_| f64::from(rng.gen_range(1..1024u32)) / 1024.0).collect();
    breakpoints.sort_by(f64::total_cmp);
    let mut sides: Vec<i8> = (0..p).map(|_| if rng.gen() { 1 } else { -1 }).collect();
    for i in 1..p {
        if breakpoints[i] == breakpoints[i - 1] {
            sides[i - 1] = 1;
            sides[i] = -1;
        }
    }
    let values = (0..=p).map(|_| f64::from(rng.gen_range(-32..=32i32)) / 8.0).collect();
    PieceSpec { breakpoints, sides, values }
}

fn c9_embedding() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..500 {
        let net = common::random_network(&mut rng, KindTag::Plain, common::SMALL);
        let skip = net.embed(KindTag::Skip).map_err(|e| e.to_string())?;
        let lin = net.embed(KindTag::Lin).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let x: Vec<f64> = (0..net.input_dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let bits = |v: Vec<f64>| v.into_iter().map(f64::to_bits).collect::<Vec<_>>();
            let y = bits(net.eval(&x).map_err(|e| e.to_string())?);
            ensure(y == bits(skip.eval(&x).map_err(|e| e.to_string())?), || format!("net {i}: skip embedding differs at {x:?}"))?;
            ensure(y == bits(lin.eval(&x).map_err(|e| e.to_string())?), || format!("net {i}: lin embedding differs at {x:?}"))?;
        }
    }
    Ok("500 networks x 100 inputs identical in plain, skip and lin form".into())
}

fn c10_calculators() -> Outcome {
    let skip = rect_arch(KindTag::Skip, 1, 4, 8, 8).map_err(|e| e.to_string())?;
    let vc = vc_upper_bound(&skip).value();
    ensure(vc == Some(38400.0), || format!("skip VC upper bound {vc:?}"))?;
    let plain = Architecture::new(NetworkKind::Plain, vec![1, 3, 1]);
    let pieces = piece_bound(&plain);
    ensure(pieces == 4, || format!("plain piece bound {pieces}"))?;
    let lower = approx_lower_bound((0.0, 1.0), &plain).map_err(|e| e.to_string())?;
    ensure(lower == 0.125, || format!("approximation lower bound {lower}"))?;
    Ok("VC 38400, piece bound 4, lower bound 0.125".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("square sandwich", c1_square_sandwich),
        ("piece-count soundness", c2_piece_soundness),
        ("piece-count achievability", c3_piece_achievability),
        ("bit extraction exactness", c4_bit_extraction),
        ("decoder exactness", c5_decoders),
        ("shattering certificates", c6_shattering),
        ("Hölder construction error", c7_holder),
        ("representation exactness", c8_representation),
        ("embedding equivalence", c9_embedding),
        ("bound calculators", c10_calculators),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
