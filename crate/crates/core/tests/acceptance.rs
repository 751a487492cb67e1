//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so the verdict lines always reach the terminal.
//! A failure listed in `KNOWN_DEVIATIONS` is still printed as FAIL but does
//! not fail the run; anything else exits non-zero.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use signed_tiling::cli;
use signed_tiling::facets::{crossing_check, double_cover_check, facet_collection, facet_signs, h_vector};
use signed_tiling::facets::{up_down_partition, CollectionKind};
use signed_tiling::fixtures::{k_fs, l_fs, m4_fs, random_instance, random_integer_matrix, subset};
use signed_tiling::fragments::{laplace_identity, sandc_identity};
use signed_tiling::linalg::{frac, int};
use signed_tiling::slices::slice_layout;
use signed_tiling::tiling::{choose_generic_direction, verify_constancy, IntBox, Tiling};
use signed_tiling::{Dimensions, FragmentSet, GenericDirection, Rational, SubsetIndex};

type Check = Result<String, String>;

/// Criteria whose failure is understood and written up; see the README.
const KNOWN_DEVIATIONS: &[&str] = &["7b"];

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64, what: &str) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_secs as f64, || {
        format!("{what} took {:.1}s, limit {limit_secs}s", elapsed.as_secs_f64())
    })
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn corpus() -> Vec<(String, FragmentSet)> {
    let mut out = vec![("K".into(), k_fs()), ("L".into(), l_fs()), ("M".into(), m4_fs())];
    for seed in 0..50u64 {
        let n = 2 + (seed as usize % 5);
        let r = 1 + (seed as usize / 5) % (n - 1);
        let m = random_integer_matrix(1000 + seed, n, -5, 5);
        let dims = Dimensions::new(r, n - r).expect("valid split");
        out.push((format!("random#{seed}"), FragmentSet::from_matrix(&m, dims).expect("square")));
    }
    out
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let corpus = corpus();
    for (name, fs) in &corpus {
        let (lhs, rhs) = laplace_identity(fs);
        ensure(lhs == rhs, || format!("{name}: (-1)^k det M = {lhs} but sum = {rhs}"))?;
    }
    let m = m4_fs();
    let dets: Vec<Rational> = m.fragments.iter().map(|f| f.det.clone()).collect();
    let want: Vec<Rational> = [2, 10, 5, 24, 16, -20].into_iter().map(int).collect();
    ensure(dets == want, || format!("M summands {dets:?}"))?;
    ensure(laplace_identity(&m) == (int(37), int(37)), || "M sides differ from 37".into())?;
    within(start.elapsed(), 5, "Laplace checks")?;
    Ok(format!("{} matrices, M summands (2,10,5,24,16,-20) sum to 37", corpus.len()))
}

fn criterion_2() -> Check {
    let mut checked = 0;
    for (name, fs) in corpus() {
        for f in &fs.fragments {
            let (det, product) = sandc_identity(&fs, &f.sigma).map_err(e)?;
            ensure(det == product, || format!("{name} {}: {det} vs {product}", f.sigma))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} fragments factor exactly"))
}

fn criterion_3() -> Check {
    let mut parts = Vec::new();
    for (name, fs, want) in [("M", m4_fs(), 1), ("K", k_fs(), -1), ("L", l_fs(), -1)] {
        let start = Instant::now();
        let w = choose_generic_direction(&fs, 3).map_err(e)?;
        let report = verify_constancy(&fs, &w, 1000, 3).map_err(e)?;
        let values: Vec<i32> = report.distinct_f_values.iter().copied().collect();
        ensure(report.pass && values == [want], || format!("{name}: values {values:?}, expected [{want}]"))?;
        within(start.elapsed(), 60, name)?;
        parts.push(format!("{name}: f={want} ({:.1}s)", start.elapsed().as_secs_f64()));
    }
    Ok(parts.join(", "))
}

fn criterion_4() -> Check {
    let fs = k_fs();
    ensure(fs.fragments.iter().all(|f| f.det <= int(0)), || "K has a positive fragment".into())?;
    let w = choose_generic_direction(&fs, 4).map_err(e)?;
    let report = verify_constancy(&fs, &w, 1000, 4).map_err(e)?;
    let support: Vec<(usize, usize)> = report.census_histogram.keys().copied().collect();
    ensure(support == [(0, 1)], || format!("census support {support:?}"))?;
    Ok("1000 samples each in exactly one (negative) tile".into())
}

fn criterion_5() -> Check {
    let fs = m4_fs();
    let p = vec![int(-2), int(1), frac(-1, 2), frac(-1, 2)];
    let interior = ["T((0,-3,-1,1),{2,3})", "T((0,-2,0,0),{2,4})", "T((0,-2,-1,0),{3,4})"];
    let mut directions = vec![
        GenericDirection::certify(&fs, vec![int(1); 4]).map_err(e)?,
        GenericDirection::certify(&fs, vec![int(1), int(-1), int(1), int(1)]).map_err(e)?,
    ];
    for seed in 0..8 {
        directions.push(choose_generic_direction(&fs, seed).map_err(e)?);
    }
    for w in &directions {
        let report = Tiling::new(&fs, w).map_err(e)?.coverage_value(&p).map_err(e)?;
        let labels: BTreeSet<String> = report.tiles.iter().map(|(t, _)| t.to_string()).collect();
        ensure(report.positive == report.negative + 1, || {
            format!("w={:?}: {} positive, {} negative", w.w, report.positive, report.negative)
        })?;
        for tile in interior {
            ensure(labels.contains(tile), || format!("w={:?}: {tile} missing", w.w))?;
        }
    }
    Ok(format!("{} directions, f=1, interior tiles always present", directions.len()))
}

fn kernel_holds(fs: &FragmentSet, w: &GenericDirection, tau: &SubsetIndex) -> Result<(), String> {
    let h = h_vector(fs, w, CollectionKind::Tau, tau).map_err(e)?;
    let cbar = fs.decomposition.cbar_matrix(&tau.complement()).map_err(e)?;
    let image = cbar.mul_vec(&h).map_err(e)?;
    ensure(image.iter().all(|v| *v == int(0)), || format!("tau {tau}: Cbar h = {image:?}"))
}

fn criterion_6() -> Check {
    let fs = m4_fs();
    let w = GenericDirection::certify(&fs, vec![int(1); 4]).map_err(e)?;
    for tau in SubsetIndex::all_of_size(4, 1) {
        kernel_holds(&fs, &w, &tau)?;
    }
    let h = h_vector(&fs, &w, CollectionKind::Tau, &subset(4, &[2])).map_err(e)?;
    let oracle = [int(1), int(6), int(4)];
    let parallel = h.len() == 3
        && h.iter().any(|x| *x != int(0))
        && (0..3).all(|i| (0..3).all(|j| &h[i] * &oracle[j] == &h[j] * &oracle[i]));
    ensure(parallel, || format!("h = {h:?} is not parallel to (1,6,4)"))?;

    let mut taus = 0;
    for seed in 0..20u64 {
        let (m, dims) = random_instance(600 + seed, 3 + (seed as usize % 4), -5, 5);
        let fs = FragmentSet::from_matrix(&m, dims).map_err(e)?;
        let w = choose_generic_direction(&fs, seed).map_err(e)?;
        for tau in SubsetIndex::all_of_size(fs.n(), dims.r - 1) {
            kernel_holds(&fs, &w, &tau)?;
            taus += 1;
        }
    }
    let shown: Vec<String> = h.iter().map(ToString::to_string).collect();
    Ok(format!("h({{2}}) = ({}) ~ (1,6,4); kernel holds for {taus} random tau", shown.join(",")))
}

fn criterion_7() -> Check {
    let start = Instant::now();
    let fs = m4_fs();
    let w = GenericDirection::certify(&fs, vec![int(1); 4]).map_err(e)?;
    for tau in SubsetIndex::all_of_size(4, 1) {
        let report = double_cover_check(&fs, &w, CollectionKind::Tau, &tau, &[0; 4], 200, 7).map_err(e)?;
        ensure(report.pass, || format!("tau {tau}: hits {:?}", report.hit_histogram))?;
    }
    within(start.elapsed(), 30, "double cover")?;
    Ok("every tau: 200 samples covered once by up and once by down projections".into())
}

/// The displayed up/down sets for tau = {2}, w = (1,1,1,1).
fn criterion_7b() -> Check {
    let fs = m4_fs();
    let w = GenericDirection::certify(&fs, vec![int(1); 4]).map_err(e)?;
    let coll = facet_collection(&fs, CollectionKind::Tau, &[0; 4], &subset(4, &[2])).map_err(e)?;
    let part = up_down_partition(&fs, &w, &coll).map_err(e)?;
    let up: BTreeSet<String> = part.up.iter().map(|m| m.tilde_label()).collect();
    let want: BTreeSet<String> = ["F~((0,0,0,0),{1,2},1,0)", "F~((0,0,0,0),{2,3},3,0)", "F~((0,0,0,0),{2,4},4,1)"]
        .into_iter()
        .map(String::from)
        .collect();
    if up == want {
        return Ok("up set matches the displayed one".into());
    }
    let mut signs = Vec::new();
    for m in part.up.iter().chain(&part.down).filter(|m| up.contains(&m.tilde_label()) != want.contains(&m.tilde_label())) {
        let (wsgn, tsgn) = facet_signs(&fs, &w, &m.facet).map_err(e)?;
        signs.push(format!("{} wsgn={wsgn} tsgn={tsgn}", m.tilde_label()));
    }
    Err(format!("computed up set {up:?}; displayed {want:?}; disputed: {}", signs.join("; ")))
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, radius: i64) -> Vec<Rational> {
    let den = 1i64 << 20;
    (0..dim).map(|_| frac(rng.gen_range(-radius * den..=radius * den), den)).collect()
}

fn criterion_8() -> Check {
    let fs = m4_fs();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut total = 0;
    for ray in 0..100u64 {
        let w = choose_generic_direction(&fs, ray).map_err(e)?;
        let p = random_point(&mut rng, 4, 3);
        let mut reach = int(2);
        let report = loop {
            let report = crossing_check(&fs, &w, &p, &reach, ray).map_err(e)?;
            if report.crossings.len() >= 3 || reach > int(256) {
                break report;
            }
            reach = reach * int(2);
        };
        ensure(report.crossings.len() >= 3, || format!("ray {ray}: only {} crossings", report.crossings.len()))?;
        ensure(report.segment_values.iter().all(|&v| v == 1), || {
            format!("ray {ray}: segment values {:?}", report.segment_values)
        })?;
        for c in &report.crossings {
            ensure(c.contribution == 0, || format!("ray {ray}: contribution {} at t={}", c.contribution, c.t))?;
        }
        ensure(report.pass, || format!("ray {ray}: report did not pass"))?;
        total += report.crossings.len();
    }
    Ok(format!("100 rays, {total} crossings, every contribution zero"))
}

fn criterion_9() -> Check {
    let fs = m4_fs();
    let w = choose_generic_direction(&fs, 9).map_err(e)?;
    let layout = slice_layout(&fs, &w, &IntBox::cube(4, 3)).map_err(e)?;
    let counts: Vec<usize> = layout.classes.iter().map(|c| c.offsets.len()).collect();
    let areas: Vec<Rational> = layout.classes.iter().map(|c| c.area.clone()).collect();
    let sigmas: Vec<String> = layout.classes.iter().map(|c| c.sigma.to_string()).collect();
    ensure(sigmas == ["{1,2}", "{1,3}", "{1,4}", "{2,3}", "{2,4}", "{3,4}"], || format!("classes {sigmas:?}"))?;
    ensure(counts == [1, 1, 1, 6, 4, 2], || format!("counts {counts:?}"))?;
    let want: Vec<Rational> = [2, 10, 5, 4, 4, 10].into_iter().map(int).collect();
    ensure(areas == want, || format!("areas {areas:?}"))?;

    let tiling = Tiling::new(&fs, &w).map_err(e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let mut p = random_point(&mut rng, 2, 10);
        let from_layout = layout.coverage_at(&p).map_err(e)?;
        p.extend([int(0), int(0)]);
        let full = tiling.coverage_value(&p).map_err(e)?.f_value;
        ensure(full == 1 && from_layout == 1, || format!("at {p:?}: f={full}, layout {from_layout}"))?;
    }
    Ok("counts (1,1,1,6,4,2), areas (2,10,5,4,4,10), f=1 at 100 points".into())
}

fn criterion_10() -> Check {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let m4 = format!("{data}/m4.txt");
    let k = format!("{data}/k.txt");
    let runs: Vec<Vec<String>> = [
        vec!["fragments", "--matrix", &m4],
        vec!["laplace", "--matrix", &m4],
        vec!["coverage", "--matrix", &m4, "--point", "-2,1,-1/2,-1/2", "--w", "1,1,1,1"],
        vec!["verify", "--matrix", &m4, "--samples", "300", "--seed", "10"],
        vec!["facets", "--matrix", &m4, "--tau", "2", "--w", "1,1,1,1"],
        vec!["double-cover", "--matrix", &m4, "--gamma", "1,2,3", "--samples", "100"],
        vec!["crossing", "--matrix", &m4, "--seed", "10"],
        vec!["slice", "--matrix", &m4, "--samples", "50"],
        vec!["render", "--matrix", &k],
    ]
    .into_iter()
    .map(|args| std::iter::once("signtile").chain(args).map(String::from).collect())
    .collect();

    let sequential: Vec<cli::Outcome> = runs.iter().map(|a| cli::run(a.clone())).collect();
    let parallel: Vec<cli::Outcome> = std::thread::scope(|s| {
        let handles: Vec<_> = runs.iter().map(|a| s.spawn(move || cli::run(a.clone()))).collect();
        handles.into_iter().map(|h| h.join().expect("cli thread")).collect()
    });
    for ((args, a), b) in runs.iter().zip(&sequential).zip(&parallel) {
        ensure(a.code == 0, || format!("{}: exit {} {}", args[1], a.code, a.stderr))?;
        ensure(a == b, || format!("{}: outputs differ between runs", args[1]))?;
    }
    Ok(format!("{} subcommands byte-identical across sequential and threaded runs", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("1", criterion_1),
        ("2", criterion_2),
        ("3", criterion_3),
        ("4", criterion_4),
        ("5", criterion_5),
        ("6", criterion_6),
        ("7", criterion_7),
        ("7b", criterion_7b),
        ("8", criterion_8),
        ("9", criterion_9),
        ("10", criterion_10),
    ];
    let mut unexpected = BTreeMap::new();
    for (id, check) in criteria {
        let start = Instant::now();
        let verdict = check();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS criterion {id} ({secs:.1}s): {detail}"),
            Err(detail) => {
                let known = KNOWN_DEVIATIONS.contains(&id);
                let tag = if known { " [known deviation]" } else { "" };
                println!("FAIL criterion {id}{tag} ({secs:.1}s): {detail}");
                if !known {
                    unexpected.insert(id, detail);
                }
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("{} unexpected acceptance failure(s): {:?}", unexpected.len(), unexpected.keys());
        std::process::exit(1);
    }
}
