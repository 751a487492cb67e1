//! The `signtile` command line.
//!
//! Every subcommand reads a matrix file and prints a line-oriented
//! `key=value` report. Exit codes: 0 when everything checked out, 1 when a
//! verification found a violation, 2 for unusable input.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::facets::{
    collection_zonotope, crossing_check, double_cover_check, facet_collection, facet_signs, h_vector,
    up_down_direct, up_down_partition, CollectionKind,
};
use crate::fragments::{laplace_identity, Dimensions, FragmentSet, SubsetIndex};
use crate::linalg::{Matrix, Rational, Vector};
use crate::render::{render_slice_svg, render_tiling_svg, RenderConfig, Window};
use crate::slices::{slice_coverage, slice_layout};
use crate::tiling::{
    choose_generic_direction, fmt_vec, sample_rng, unit_vector_sample, GenericDirection, IntBox, Tiling,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Parses an integer or `p/q` token.
pub fn parse_rational(token: &str) -> std::result::Result<Rational, String> {
    let (num, den) = match token.split_once('/') {
        Some((n, d)) => (n, d),
        None => (token, "1"),
    };
    let num: BigInt = num.trim().parse().map_err(|_| format!("malformed rational `{token}`"))?;
    let den: BigInt = den.trim().parse().map_err(|_| format!("malformed rational `{token}`"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in `{token}`"));
    }
    Ok(Rational::new(num, den))
}

/// Comma-separated rationals, optionally of a required length.
pub fn parse_vector(text: &str, len: Option<usize>) -> Result<Vector> {
    let mut out = Vec::new();
    let mut column = 1;
    if !text.trim().is_empty() {
        for token in text.split(',') {
            out.push(parse_rational(token.trim()).map_err(|m| parse_error(1, column, m))?);
            column += token.len() + 1;
        }
    }
    if let Some(len) = len {
        if out.len() != len {
            return Err(Error::Dimension(format!("expected {len} comma-separated values, got {}", out.len())));
        }
    }
    Ok(out)
}

fn parse_int_vector(text: &str, len: usize) -> Result<Vec<i64>> {
    let values = parse_vector(text, Some(len))?;
    values
        .iter()
        .map(|v| {
            if v.is_integer() {
                i64::try_from(v.to_integer()).map_err(|_| Error::Dimension("entry too large".into()))
            } else {
                Err(Error::Dimension(format!("`{v}` is not an integer")))
            }
        })
        .collect()
}

/// Reads `r k` followed by `r + k` rows of `r + k` rationals. Lines whose
/// first non-blank character is `#`, and blank lines, are skipped.
pub fn parse_matrix(text: &str) -> Result<(Dimensions, Matrix)> {
    let mut dims: Option<Dimensions> = None;
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut last_line = 0;
    for (index, line) in text.lines().enumerate() {
        let line_no = index + 1;
        last_line = line_no;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<(usize, &str)> = line
            .split_whitespace()
            .map(|tok| (tok.as_ptr() as usize - line.as_ptr() as usize + 1, tok))
            .collect();
        match dims {
            None => {
                if tokens.len() != 2 {
                    return Err(parse_error(line_no, 1, "first line must be `r k`"));
                }
                let parse_dim = |(col, tok): (usize, &str)| {
                    tok.parse::<usize>()
                        .map_err(|_| parse_error(line_no, col, format!("`{tok}` is not a positive integer")))
                };
                let r = parse_dim(tokens[0])?;
                let k = parse_dim(tokens[1])?;
                dims = Some(Dimensions::new(r, k).map_err(|_| parse_error(line_no, 1, "r and k must be at least 1"))?);
            }
            Some(d) => {
                let n = d.n();
                if rows.len() == n {
                    return Err(parse_error(line_no, 1, format!("expected {n} rows, found more")));
                }
                if tokens.len() != n {
                    let col = tokens.get(n).map_or(line.len() + 1, |t| t.0);
                    return Err(parse_error(line_no, col, format!("expected {n} entries, found {}", tokens.len())));
                }
                let row = tokens
                    .iter()
                    .map(|&(col, tok)| parse_rational(tok).map_err(|m| parse_error(line_no, col, m)))
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
        }
    }
    let dims = dims.ok_or_else(|| parse_error(last_line.max(1), 1, "missing `r k` line"))?;
    if rows.len() != dims.n() {
        return Err(parse_error(
            last_line + 1,
            1,
            format!("expected {} rows, found {}", dims.n(), rows.len()),
        ));
    }
    Ok((dims, Matrix::from_rows(rows)?))
}

/// Inverse of [`parse_matrix`].
pub fn format_matrix(dims: Dimensions, m: &Matrix) -> String {
    let mut out = format!("{} {}\n", dims.r, dims.k);
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(ToString::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[derive(Debug, Parser)]
#[command(name = "signtile", version, about = "Signed tilings from fragment matrices, in exact arithmetic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Matrix file: `r k`, then r+k rows of rationals.
    #[arg(long)]
    matrix: PathBuf,
    /// Generic direction as comma-separated rationals; drawn from --seed when absent.
    #[arg(long, allow_hyphen_values = true)]
    w: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct CollectionIndex {
    /// One-based (r-1)-subset, e.g. "2".
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<String>,
    /// One-based (r+1)-subset, e.g. "1,2,3".
    #[arg(long)]
    gamma: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List every fragment with its determinants and sign class.
    Fragments {
        #[command(flatten)]
        common: Common,
    },
    /// Check that the fragment determinants sum to (-1)^k det M.
    Laplace {
        #[command(flatten)]
        common: Common,
    },
    /// Tiles containing a point and the signed count there.
    Coverage {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Sample the fundamental domain and check the count is constant.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// A facet collection: members, signs, up/down split and kernel certificate.
    Facets {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        index: CollectionIndex,
        /// Integer translation, defaults to zero.
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
    },
    /// Check that up and down facet projections each cover the zonotope once.
    DoubleCover {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        index: CollectionIndex,
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Walk a ray along w and check the count across every facet crossing.
    Crossing {
        #[command(flatten)]
        common: Common,
        /// Ray origin; drawn from --seed when absent.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        #[arg(long, default_value = "3")]
        reach: String,
    },
    /// Periodic structure of the slice where the last k coordinates vanish.
    Slice {
        #[command(flatten)]
        common: Common,
        /// Coverage checks at random slice points.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Translations z with every |z_i| <= radius are enumerated.
        #[arg(long, default_value_t = 3)]
        radius: i64,
    },
    /// SVG of the planar tiling (r + k = 2) or of the slice (r = 2).
    Render {
        #[command(flatten)]
        common: Common,
        /// Drawing window "x0,x1,y0,y1".
        #[arg(long, allow_hyphen_values = true, default_value = "-5,5,-5,5")]
        window: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        radius: i64,
        /// Pixels per unit.
        #[arg(long, default_value = "40")]
        scale: String,
    },
}

/// Exit code and captured streams of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Loaded {
    fs: FragmentSet,
}

impl Common {
    fn load(&self) -> Result<Loaded> {
        let text = std::fs::read_to_string(&self.matrix)
            .map_err(|e| Error::Precondition(format!("cannot read {}: {e}", self.matrix.display())))?;
        let (dims, m) = parse_matrix(&text)?;
        Ok(Loaded {
            fs: FragmentSet::from_matrix(&m, dims)?,
        })
    }

    fn direction(&self, fs: &FragmentSet) -> Result<GenericDirection> {
        match &self.w {
            Some(text) => GenericDirection::certify(fs, parse_vector(text, Some(fs.n()))?),
            None => choose_generic_direction(fs, self.seed),
        }
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn resolve_index(fs: &FragmentSet, index: &CollectionIndex) -> Result<(CollectionKind, SubsetIndex)> {
    let (kind, text) = match (&index.tau, &index.gamma) {
        (Some(t), None) => (CollectionKind::Tau, t),
        (None, Some(g)) => (CollectionKind::Gamma, g),
        _ => return Err(Error::Precondition("give exactly one of --tau and --gamma".into())),
    };
    let labels = parse_int_vector(text, text.split(',').filter(|s| !s.trim().is_empty()).count())?;
    let labels: Vec<usize> = labels
        .into_iter()
        .map(|l| usize::try_from(l).map_err(|_| Error::InvalidSubset(format!("bad label {l}"))))
        .collect::<Result<_>>()?;
    Ok((kind, SubsetIndex::one_based(fs.n(), &labels)?))
}

fn resolve_z(fs: &FragmentSet, z: &Option<String>) -> Result<Vec<i64>> {
    match z {
        Some(text) => parse_int_vector(text, fs.n()),
        None => Ok(vec![0; fs.n()]),
    }
}

fn verdict(out: &mut String, pass: bool) -> i32 {
    let _ = writeln!(out, "pass={pass}");
    if pass {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn execute(command: Command, out: &mut String) -> Result<i32> {
    match command {
        Command::Fragments { common } => {
            let fs = common.load()?.fs;
            let _ = writeln!(out, "r={}\nk={}\ndet_m={}\nexpected_f={}", fs.dims().r, fs.dims().k, fs.det_m, fs.expected_coverage());
            for f in &fs.fragments {
                let _ = writeln!(
                    out,
                    "fragment={} det={} det_c={} det_cbar={} split_sign={} class={}",
                    f.sigma, f.det, f.det_c, f.det_cbar, f.split_sign, f.class
                );
            }
            Ok(EXIT_OK)
        }
        Command::Laplace { common } => {
            let fs = common.load()?.fs;
            let dets: Vec<&Rational> = fs.fragments.iter().map(|f| &f.det).collect();
            let (lhs, rhs) = laplace_identity(&fs);
            let _ = writeln!(out, "summands={}", join(&dets));
            let ok = lhs == rhs;
            let _ = writeln!(out, "lhs={lhs} rhs={rhs} {}", if ok { "ok" } else { "mismatch" });
            Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
        }
        Command::Coverage { common, point } => {
            let fs = common.load()?.fs;
            let w = common.direction(&fs)?;
            let p = parse_vector(&point, Some(fs.n()))?;
            let report = Tiling::new(&fs, &w)?.coverage_value(&p)?;
            let _ = writeln!(out, "w={}\npoint={}", join(&w.w), join(&p));
            for (tile, class) in &report.tiles {
                let _ = writeln!(out, "tile={tile} class={class}");
            }
            let _ = writeln!(
                out,
                "positive={}\nnegative={}\nf={}\nexpected={}\non_boundary={}",
                report.positive, report.negative, report.f_value, report.expected, report.on_boundary
            );
            Ok(verdict(out, report.f_value == report.expected))
        }
        Command::Verify { common, samples } => {
            let fs = common.load()?.fs;
            let w = common.direction(&fs)?;
            let report = Tiling::new(&fs, &w)?.verify_constancy(samples, common.seed)?;
            let values: Vec<i32> = report.distinct_f_values.iter().copied().collect();
            let _ = writeln!(out, "w={}\nsamples={}\nseed={}\nredraws={}", join(&w.w), samples, common.seed, report.redraws);
            for ((pos, neg), count) in &report.census_histogram {
                let _ = writeln!(out, "census positive={pos} negative={neg} count={count}");
            }
            let _ = writeln!(out, "f={}\nexpected={}", join(&values), report.expected);
            Ok(verdict(out, report.pass))
        }
        Command::Facets { common, index, z } => {
            let fs = common.load()?.fs;
            let w = common.direction(&fs)?;
            let (kind, index) = resolve_index(&fs, &index)?;
            let z = resolve_z(&fs, &z)?;
            let coll = facet_collection(&fs, kind, &z, &index)?;
            let part = up_down_partition(&fs, &w, &coll)?;
            let agrees = part == up_down_direct(&fs, &w, &coll)?;
            let _ = writeln!(out, "w={}\nkind={kind}\nindex={index}\nz={}", join(&w.w), join(&z));
            for m in &coll.members {
                if m.degenerate {
                    let _ = writeln!(out, "member={} plain={} degenerate=true", m.tilde_label(), m.facet);
                    continue;
                }
                let (wsgn, tsgn) = facet_signs(&fs, &w, &m.facet)?;
                let side = if part.up.contains(m) { "up" } else { "down" };
                let _ = writeln!(out, "member={} plain={} wsgn={wsgn} tsgn={tsgn} side={side}", m.tilde_label(), m.facet);
            }
            let h = h_vector(&fs, &w, kind, &index)?;
            let residual = collection_zonotope(&fs, kind, &index)?.mul_vec(&h)?;
            let labels = |ms: &[crate::facets::CollectionMember]| ms.iter().map(|m| m.tilde_label()).collect::<Vec<_>>().join(" ");
            let _ = writeln!(out, "up={}\ndown={}\nh={}\nkernel_residual={}", labels(&part.up), labels(&part.down), join(&h), join(&residual));
            let _ = writeln!(out, "partition_agrees={agrees}");
            Ok(verdict(out, agrees && residual.iter().all(Zero::is_zero)))
        }
        Command::DoubleCover { common, index, z, samples } => {
            let fs = common.load()?.fs;
            let w = common.direction(&fs)?;
            let (kind, index) = resolve_index(&fs, &index)?;
            let z = resolve_z(&fs, &z)?;
            let report = double_cover_check(&fs, &w, kind, &index, &z, samples, common.seed)?;
            let _ = writeln!(out, "w={}\nkind={kind}\nindex={index}\nz={}\nsamples={samples}\nredraws={}", join(&w.w), join(&z), report.redraws);
            for ((up, down), count) in &report.hit_histogram {
                let _ = writeln!(out, "hits up={up} down={down} count={count}");
            }
            if let Some((q, up, down)) = &report.counterexample {
                let _ = writeln!(out, "counterexample={} up={up} down={down}", join(q));
            }
            Ok(verdict(out, report.pass))
        }
        Command::Crossing { common, point, reach } => {
            let fs = common.load()?.fs;
            let w = common.direction(&fs)?;
            let reach = parse_vector(&reach, Some(1))?.remove(0);
            let p = match point {
                Some(text) => parse_vector(&text, Some(fs.n()))?,
                None => {
                    let mut rng = sample_rng(common.seed, 0);
                    fs.m().mul_vec(&unit_vector_sample(&mut rng, fs.n()))?
                }
            };
            let report = crossing_check(&fs, &w, &p, &reach, common.seed)?;
            let _ = writeln!(
                out,
                "w={}\nstart={}\nreach={}\nperturbed={}\nresamples={}\ncrossings={}",
                join(&w.w),
                join(&report.start),
                report.reach,
                report.perturbed,
                report.resamples,
                report.crossings.len()
            );
            for c in &report.crossings {
                let _ = writeln!(
                    out,
                    "crossing t={} facets={} contribution={} f_before={} f_after={} balanced={}",
                    c.t,
                    c.facets.len(),
                    c.contribution,
                    c.f_before,
                    c.f_after,
                    c.collections_balanced
                );
            }
            let _ = writeln!(out, "segments={}", join(&report.segment_values));
            Ok(verdict(out, report.pass))
        }
        Command::Slice { common, samples, radius } => {
            let fs = common.load()?.fs;
            let w = common.direction(&fs)?;
            let layout = slice_layout(&fs, &w, &IntBox::cube(fs.n(), radius))?;
            let _ = writeln!(out, "w={}\nlattice={}\ndet_lattice={}", join(&w.w), layout.b(), layout.b().det()?);
            let mut counts_ok = true;
            for c in &layout.classes {
                counts_ok &= c.offsets.len() == c.expected_count;
                let offsets: Vec<String> = c.offsets.iter().map(|o| fmt_vec(o)).collect();
                let _ = writeln!(
                    out,
                    "class={} sign={} area={} offsets={} expected={} at={}",
                    c.sigma,
                    c.class,
                    c.area,
                    c.offsets.len(),
                    c.expected_count,
                    offsets.join(";")
                );
            }
            let (lhs, rhs) = layout.area_balance(&fs)?;
            let _ = writeln!(out, "area_balance lhs={lhs} rhs={rhs}");
            let r = fs.dims().r;
            let span = layout.b().columns().iter().flatten().map(|v| v.abs()).max().unwrap_or_else(|| Rational::from_integer(1.into()));
            let mut values = std::collections::BTreeSet::new();
            for index in 0..samples {
                let mut rng = sample_rng(common.seed, index as u64);
                let p: Vector = unit_vector_sample(&mut rng, r)
                    .iter()
                    .map(|u| (u * Rational::from_integer(2.into()) - Rational::from_integer(1.into())) * &span)
                    .collect();
                values.insert(slice_coverage(&fs, &w, &p)?.f_value);
            }
            let values: Vec<i32> = values.into_iter().collect();
            let _ = writeln!(out, "coverage_samples={samples}\nf={}\nexpected={}", join(&values), fs.expected_coverage());
            let coverage_ok = values.iter().all(|&v| v == fs.expected_coverage());
            Ok(verdict(out, counts_ok && lhs == rhs && coverage_ok))
        }
        Command::Render { common, window, out: path, radius, scale } => {
            let fs = common.load()?.fs;
            let w = common.direction(&fs)?;
            let bounds = parse_vector(&window, Some(4))?;
            let [x0, x1, y0, y1] = <[Rational; 4]>::try_from(bounds).expect("length checked");
            let mut cfg = RenderConfig::new(Window::new(x0, x1, y0, y1)?);
            cfg.scale = parse_vector(&scale, Some(1))?.remove(0);
            let svg = if fs.n() == 2 {
                render_tiling_svg(&fs, &w, &cfg)?
            } else if fs.dims().r == 2 {
                render_slice_svg(&slice_layout(&fs, &w, &IntBox::cube(fs.n(), radius))?, &cfg)?
            } else {
                return Err(Error::NotTwoDimensional(format!("r + k = {} and r = {}", fs.n(), fs.dims().r)));
            };
            match path {
                Some(path) => {
                    std::fs::write(&path, &svg)
                        .map_err(|e| Error::Precondition(format!("cannot write {}: {e}", path.display())))?;
                    let _ = writeln!(
                        out,
                        "wrote={}\npolygons={}\ngroups={}",
                        path.display(),
                        svg.matches("<polygon ").count(),
                        svg.matches("<g ").count()
                    );
                }
                None => out.push_str(&svg),
            }
            Ok(EXIT_OK)
        }
    }
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: EXIT_INPUT,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let mut stdout = String::new();
    match execute(cli.command, &mut stdout) {
        Ok(code) => Outcome {
            code,
            stdout,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: EXIT_INPUT,
            stdout,
            stderr: format!("error: {e}\n"),
        },
    }
}
