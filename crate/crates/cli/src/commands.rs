use std::io::Write;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use itmlab::dimension::{fixed_point_cover_bound, fixed_point_dimension, DimensionReport, Enclosure};
use itmlab::ergodicity::{ue_decide, UeReport};
use itmlab::gauss::{classify, Verdict};
use itmlab::interval_set::attractor_iterate;
use itmlab::itm::{numeric_itinerary, orbit, Branch, ItmParams, Region};
use itmlab::kseq::{KGenerator, KSequence};
use itmlab::numeric::{parse_rational, pk_roots, AlgebraicNum, BigFloat, CubicField, RootKind};
use itmlab::render::{render, Palette, RenderConfig, RenderMode, RenderStats, Viewport};
use itmlab::subshift::{chain_prefix, Word};
use itmlab::survey::{measure_survey_in, SurveyReport};
use itmlab::{Mode, Scalar};

use crate::{
    Cli, CliError, Command, PaletteArg, ParamArgs, RenderArgs, RenderKind, SeqArgs, EXIT_INCONCLUSIVE, EXIT_INFINITE,
    EXIT_OK,
};

type CliResult<T> = Result<T, CliError>;

enum AnyParams {
    Exact(ItmParams<BigRational>),
    Float(ItmParams<BigFloat>),
    Algebraic(Box<ItmParams<AlgebraicNum>>),
}

/// Runs `$body` with `$p` bound to the concrete `ItmParams`.
macro_rules! with_params {
    ($params:expr, $p:ident => $body:expr) => {
        match $params {
            AnyParams::Exact($p) => $body,
            AnyParams::Float($p) => $body,
            AnyParams::Algebraic(boxed) => {
                let $p = *boxed;
                $body
            }
        }
    };
}

fn mode_label(mode: Mode) -> String {
    match mode {
        Mode::Exact => "exact".into(),
        Mode::Float(bits) => format!("float:{bits}"),
    }
}

fn check_fixed_point_k(k: u64) -> CliResult<()> {
    if k < 2 {
        return Err(CliError::usage("--fixed-point needs k >= 2"));
    }
    Ok(())
}

/// Fixed point `r_k` rounded to `bits`.
fn float_root(k: u64, bits: u32) -> CliResult<BigFloat> {
    let tol = BigRational::new(BigInt::from(1), BigInt::from(1) << (bits as usize + 16));
    let r = pk_roots(k, &tol)?.middle.midpoint();
    Ok(BigFloat::from_rational(&r, bits))
}

fn build_params(args: &ParamArgs, mode: Mode) -> CliResult<(AnyParams, &'static str)> {
    if let Some(k) = args.fixed_point {
        check_fixed_point_k(k)?;
        return Ok(match mode {
            Mode::Exact => {
                let r = CubicField::new(k, RootKind::Middle)?.generator();
                (AnyParams::Algebraic(Box::new(ItmParams::checked(r.clone(), r.clone() * r)?)), "algebraic")
            }
            Mode::Float(bits) => {
                let r = float_root(k, bits)?;
                let r2 = r.clone() * r.clone();
                (AnyParams::Float(ItmParams::checked(r, r2)?), "float")
            }
        });
    }
    let (Some(a), Some(b)) = (&args.alpha, &args.beta) else {
        return Err(CliError::usage("give ALPHA and BETA or --fixed-point K"));
    };
    let (a, b) = (parse_rational(a)?, parse_rational(b)?);
    Ok(match mode {
        Mode::Exact => (AnyParams::Exact(ItmParams::checked(a, b)?), "exact"),
        Mode::Float(bits) => (
            AnyParams::Float(ItmParams::checked(BigFloat::from_rational(&a, bits), BigFloat::from_rational(&b, bits))?),
            "float",
        ),
    })
}

fn build_sequence(seq: &SeqArgs, n: usize) -> CliResult<KSequence> {
    match (&seq.generator, &seq.ks) {
        (Some(g), None) => Ok(KGenerator::parse(g)?.prefix(n)?),
        (None, Some(list)) => Ok(KSequence::parse_list(list)?),
        _ => Err(CliError::usage("give exactly one of --generator or --ks")),
    }
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn emit<T: Serialize>(cli: &Cli, value: &T) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError { code: 1, message: e.to_string() })?;
    s.push('\n');
    write_out(cli.out.as_deref(), s.as_bytes())
}

#[derive(Serialize)]
struct ClassifyOutput {
    alpha: String,
    beta: String,
    arithmetic: String,
    region: Region,
    verdict: Verdict,
    k_prefix: Vec<u64>,
}

#[derive(Serialize)]
struct RenderOutput {
    width: usize,
    height: usize,
    mode: RenderMode,
    arithmetic: String,
    image: String,
    stats: RenderStats,
}

#[derive(Serialize)]
struct DimensionOutput {
    k: u64,
    depth: usize,
    fixed_point_dimension: Enclosure,
    cover: DimensionReport,
}

#[derive(Serialize)]
struct UeOutput {
    symbols: Vec<u64>,
    report: UeReport,
}

#[derive(Serialize)]
struct ItineraryCheck {
    arithmetic: String,
    compared: usize,
    mismatches: usize,
    first_mismatch: Option<usize>,
    indeterminate_at: Option<usize>,
}

#[derive(Serialize)]
struct CodeOutput {
    symbols: Vec<u64>,
    length: usize,
    letter_counts: [u64; 3],
    word: Word,
    itinerary_check: Option<ItineraryCheck>,
}

#[derive(Serialize)]
struct AttractorStepOutput {
    n: usize,
    components: usize,
    measure: String,
    measure_approx: f64,
}

#[derive(Serialize)]
struct AttractorOutput {
    arithmetic: String,
    steps: Vec<AttractorStepOutput>,
    stabilized_at: Option<usize>,
    aborted: Option<String>,
    t_bijective: Option<bool>,
    intervals: Vec<[String; 2]>,
}

#[derive(Serialize)]
struct OrbitPoint {
    i: usize,
    x: String,
    branch: Branch,
}

#[derive(Serialize)]
struct Cycle {
    preperiod: usize,
    period: usize,
}

#[derive(Serialize)]
struct OrbitOutput {
    arithmetic: String,
    points: Vec<OrbitPoint>,
    cycle: Option<Cycle>,
}

/// Executes the parsed command and returns the process exit code.
pub fn run(cli: &Cli) -> CliResult<u8> {
    match &cli.command {
        Command::Classify { params, budget } => cmd_classify(cli, params, *budget),
        Command::Render(args) => cmd_render(cli, args),
        Command::Survey { samples, budget, seed } => {
            let report: SurveyReport = measure_survey_in(*samples, *budget, *seed, cli.mode)?;
            emit(cli, &report)?;
            Ok(EXIT_OK)
        }
        Command::Dimension { k, depth, csv } => {
            check_fixed_point_k(*k)?;
            let cover = fixed_point_cover_bound(*k, *depth)?;
            if let Some(path) = csv {
                std::fs::write(path, cover.to_csv())?;
            }
            let out =
                DimensionOutput { k: *k, depth: *depth, fixed_point_dimension: fixed_point_dimension(*k)?, cover };
            emit(cli, &out)?;
            Ok(EXIT_OK)
        }
        Command::Ue { seq, depth, csv } => {
            let ks = build_sequence(seq, *depth)?;
            let report = ue_decide(&ks, *depth)?;
            if let Some(path) = csv {
                std::fs::write(path, report.diameters_csv())?;
            }
            emit(cli, &UeOutput { symbols: ks.symbols[..report.depth.min(ks.len())].to_vec(), report })?;
            Ok(EXIT_OK)
        }
        Command::Code { fixed_point, seq, length, symbols } => cmd_code(cli, *fixed_point, seq, *length, *symbols),
        Command::Attractor { params, n_max, component_cap } => {
            let (p, kind) = build_params(params, cli.mode)?;
            let out = with_params!(p, p => attractor_output(&p, *n_max, *component_cap, kind, cli.mode)?);
            emit(cli, &out)?;
            Ok(EXIT_OK)
        }
        Command::Orbit { params, x0, n } => {
            let (p, kind) = build_params(params, cli.mode)?;
            let x0 = parse_rational(x0)?;
            let out = with_params!(p, p => orbit_output(&p, &x0, *n, kind, cli.mode)?);
            emit(cli, &out)?;
            Ok(EXIT_OK)
        }
    }
}

fn arithmetic_label(kind: &str, mode: Mode) -> String {
    if kind == "algebraic" {
        kind.into()
    } else {
        mode_label(mode)
    }
}

fn cmd_classify(cli: &Cli, params: &ParamArgs, budget: usize) -> CliResult<u8> {
    let (p, kind) = build_params(params, cli.mode)?;
    let out = with_params!(p, p => {
        let c = classify(&p, budget)?;
        ClassifyOutput {
            alpha: p.alpha.to_string(),
            beta: p.beta.to_string(),
            arithmetic: arithmetic_label(kind, cli.mode),
            region: p.region,
            verdict: c.verdict,
            k_prefix: c.k_prefix.symbols,
        }
    });
    emit(cli, &out)?;
    Ok(match out.verdict {
        Verdict::FiniteType { .. } => EXIT_OK,
        Verdict::InfiniteCertified(_) => EXIT_INFINITE,
        Verdict::Inconclusive { .. } => EXIT_INCONCLUSIVE,
    })
}

fn parse_viewport(s: &str) -> CliResult<Viewport> {
    let parts: Vec<&str> = s.split(',').collect();
    let [a0, a1, b0, b1] = parts.as_slice() else {
        return Err(CliError::usage("--viewport takes alpha_min,alpha_max,beta_min,beta_max"));
    };
    let q = |x: &str| parse_rational(x.trim());
    Ok(Viewport::new(q(a0)?, q(a1)?, q(b0)?, q(b1)?)?)
}

fn cmd_render(cli: &Cli, args: &RenderArgs) -> CliResult<u8> {
    let Some(path) = cli.out.as_deref() else {
        return Err(CliError::usage("render needs --out <file.pgm>"));
    };
    let mode = match args.kind {
        RenderKind::Escape => RenderMode::EscapeTime { max_iters: args.max_iters },
        RenderKind::Ifs => RenderMode::InverseIfs { depth: args.depth },
    };
    let mut cfg = RenderConfig::new(args.width, args.height, mode);
    if let Some(v) = &args.viewport {
        cfg.viewport = parse_viewport(v)?;
    }
    cfg.palette = match args.palette {
        PaletteArg::Linear => Palette::Linear,
        PaletteArg::Log => Palette::Log,
    };
    cfg.arithmetic = cli.mode;
    cfg.node_cap = args.node_cap;
    let (image, stats) = render(&cfg)?;
    std::fs::write(path, image.to_pgm())?;
    let out = RenderOutput {
        width: cfg.width,
        height: cfg.height,
        mode,
        arithmetic: mode_label(cli.mode),
        image: path.display().to_string(),
        stats,
    };
    let mut s = serde_json::to_string_pretty(&out).map_err(|e| CliError { code: 1, message: e.to_string() })?;
    s.push('\n');
    write_out(None, s.as_bytes())?;
    Ok(EXIT_OK)
}

fn itinerary_check<S: Scalar>(p: &ItmParams<S>, word: &Word, label: String) -> CliResult<ItineraryCheck> {
    let it = numeric_itinerary(p, word.len())?;
    let compared = it.word.len();
    let mismatches = word.symbols.iter().zip(&it.word.symbols).filter(|(a, b)| a != b).count();
    Ok(ItineraryCheck {
        arithmetic: label,
        compared,
        mismatches,
        first_mismatch: word.first_mismatch(&it.word),
        indeterminate_at: it.indeterminate_at,
    })
}

fn cmd_code(cli: &Cli, fixed_point: Option<u64>, seq: &SeqArgs, length: usize, n: usize) -> CliResult<u8> {
    let ks = match fixed_point {
        Some(k) => {
            check_fixed_point_k(k)?;
            KSequence::constant(k, n)?
        }
        None => build_sequence(seq, n)?,
    };
    let word = chain_prefix(&ks, length)?;
    let check = match fixed_point {
        None => None,
        Some(k) => Some(match cli.mode {
            Mode::Exact => {
                let r = CubicField::new(k, RootKind::Middle)?.generator();
                itinerary_check(&ItmParams::checked(r.clone(), r.clone() * r)?, &word, "algebraic".into())?
            }
            Mode::Float(bits) => {
                let r = float_root(k, bits)?;
                let r2 = r.clone() * r.clone();
                itinerary_check(&ItmParams::checked(r, r2)?, &word, mode_label(cli.mode))?
            }
        }),
    };
    let out = CodeOutput {
        symbols: ks.symbols,
        length: word.len(),
        letter_counts: word.letter_counts(),
        word,
        itinerary_check: check,
    };
    emit(cli, &out)?;
    Ok(EXIT_OK)
}

fn attractor_output<S: Scalar>(
    p: &ItmParams<S>,
    n_max: usize,
    cap: usize,
    kind: &str,
    mode: Mode,
) -> CliResult<AttractorOutput> {
    let rep = attractor_iterate(p, n_max, cap)?;
    let t_bijective = rep.stabilized_at.map(|_| rep.last.is_t_bijective(p));
    Ok(AttractorOutput {
        arithmetic: arithmetic_label(kind, mode),
        steps: rep
            .steps
            .iter()
            .map(|s| AttractorStepOutput {
                n: s.n,
                components: s.components,
                measure: s.measure.to_string(),
                measure_approx: s.measure.approx_f64(),
            })
            .collect(),
        stabilized_at: rep.stabilized_at,
        aborted: rep.aborted,
        t_bijective,
        intervals: rep.last.intervals().iter().map(|(a, b)| [a.to_string(), b.to_string()]).collect(),
    })
}

fn orbit_output<S: Scalar>(
    p: &ItmParams<S>,
    x0: &BigRational,
    n: usize,
    kind: &str,
    mode: Mode,
) -> CliResult<OrbitOutput> {
    let o = orbit(p, &p.alpha.ratio(x0), n)?;
    Ok(OrbitOutput {
        arithmetic: arithmetic_label(kind, mode),
        points: o.points.iter().enumerate().map(|(i, (x, b))| OrbitPoint { i, x: x.to_string(), branch: *b }).collect(),
        cycle: o.cycle.map(|(preperiod, period)| Cycle { preperiod, period }),
    })
}
