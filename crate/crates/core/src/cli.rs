//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::association::{hypothesis_test, plausibility_region, Decision};
use crate::auxiliary::{Cauchy, Uniform};
use crate::baselines::{curved_normal_fiducial_interval, eiv_flat_bayes_probability, BayesTruncation, BeliefAssigner};
use crate::dataset::{self, emit_dataset, render, Format, Row, Schema};
use crate::error::{Error, Result};
use crate::harness::{
    coverage_study, false_confidence_curves, validity_cdf, Assigner, CoverageMethod, ModelSpec, ReplicationPlan,
    Statistic, DEFAULT_FIDUCIAL_BUDGET,
};
use crate::models::curved_normal::{
    curved_normal_reduce, ConditionalDensity, CurvedNormalModel, CurvedNormalReduction, DensityForm,
};
use crate::models::eiv::EivModel;
use crate::possibility::{build_max_specificity, build_triangular, ConstructionMethod, PossibilityContour};
use crate::randomset::{hitting_curve, NestedRandomSetSampler};
use crate::rng::substream;
use crate::space::{parse_grid, Interval, SetDescriptor};

pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Parser)]
#[command(name = "posim", version, about = "Possibilistic inferential models: contours, regions, tests and validity studies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Cauchy,
    CurvedNormal,
    ExpEiv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    Printed,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TruncationArg {
    None,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatisticArg {
    Contour,
    Necessity,
    Possibility,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Im,
    Fiducial,
    Both,
}

#[derive(Debug, Clone, Args)]
#[command(next_help_heading = "Model")]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: ModelName,
    /// Observation for the Cauchy model.
    #[arg(long, allow_negative_numbers = true)]
    pub y: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub y1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub y2: Option<f64>,
    /// Raw curved-normal sample, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub sample: Option<Vec<f64>>,
    /// Curved-normal sample size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Known sign of the curved-normal mean.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub sign: i32,
    #[arg(long, value_enum, default_value_t = FormArg::Printed)]
    pub density_form: FormArg,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
}

#[derive(Debug, Clone, Args)]
#[command(next_help_heading = "Output")]
pub struct OutputArgs {
    /// Write the dataset here (atomically); stdout otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Args)]
#[command(next_help_heading = "Study")]
pub struct StudyArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta2: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, env = "POSIM_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
#[command(next_help_heading = "Assertion")]
pub struct AssertArgs {
    /// Lower end of the assertion interval (closed).
    #[arg(long, allow_negative_numbers = true)]
    pub assert_lower: Option<f64>,
    /// Upper end of the assertion interval (closed).
    #[arg(long, allow_negative_numbers = true)]
    pub assert_upper: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Posterior contour on a grid (`theta,pi`).
    Contour {
        #[command(flatten)]
        model: ModelArgs,
        /// lo:hi:step
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Plausibility region `{π > α}`.
    Region {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Test of an interval assertion: reject when its possibility is at most α.
    Test {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        assertion: AssertArgs,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Mean, standard deviation and their ratio of a curved-normal sample.
    Reduce {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        sample: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Empirical validity CDF (`alpha,cdf,band`).
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        study: StudyArgs,
        #[arg(long, value_enum, default_value_t = StatisticArg::Contour)]
        statistic: StatisticArg,
        #[command(flatten)]
        assertion: AssertArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Coverage and mean length of regions or fiducial intervals.
    Coverage {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        study: StudyArgs,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Im)]
        method: MethodArg,
        /// Fiducial draws per replicate.
        #[arg(long, default_value_t = DEFAULT_FIDUCIAL_BUDGET)]
        budget: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Distribution of belief in an assertion: IM necessity vs flat-prior Bayes.
    FalseConfidence {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        study: StudyArgs,
        #[command(flatten)]
        assertion: AssertArgs,
        /// Posterior draws per replicate for the Bayes assigner.
        #[arg(long, default_value_t = 4000)]
        budget: usize,
        #[arg(long, value_enum, default_value_t = TruncationArg::None)]
        truncation: TruncationArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Hitting probabilities of the nested random set vs the contour (`u,hitting,contour,mc_se`).
    Equivalence {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        #[arg(long, env = "POSIM_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Comparison methods.
    #[command(subcommand)]
    Baseline(BaselineCommand),
}

#[derive(Debug, Subcommand)]
pub enum BaselineCommand {
    /// Equal-tailed fiducial interval for the curved normal.
    Fiducial {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long, default_value_t = DEFAULT_FIDUCIAL_BUDGET)]
        budget: usize,
        #[arg(long, env = "POSIM_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Flat-prior Bayes probability of an assertion on φ (exp-eiv).
    Bayes {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        assertion: AssertArgs,
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
        #[arg(long, env = "POSIM_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = TruncationArg::None)]
        truncation: TruncationArg,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::Argument(format!("missing --{flag} for this model")))
}

impl ModelArgs {
    fn curved(&self) -> Result<CurvedNormalModel> {
        let form = match self.density_form {
            FormArg::Printed => DensityForm::Printed,
            FormArg::Exact => DensityForm::ExactJacobian,
        };
        let n = match (&self.sample, self.n) {
            (Some(s), Some(n)) if s.len() != n => {
                return Err(Error::Argument(format!("--n {n} does not match sample length {}", s.len())))
            }
            (Some(s), _) => s.len(),
            (None, n) => need(n, "n")?,
        };
        CurvedNormalModel::new(n, self.sign, form)
    }

    fn rates(&self) -> Result<(f64, f64)> {
        Ok((need(self.lambda1, "lambda1")?, need(self.lambda2, "lambda2")?))
    }

    pub fn spec(&self) -> Result<ModelSpec> {
        Ok(match self.model {
            ModelName::Cauchy => ModelSpec::Cauchy,
            ModelName::CurvedNormal => ModelSpec::CurvedNormal(self.curved()?),
            ModelName::ExpEiv => {
                let (lambda1, lambda2) = self.rates()?;
                EivModel::new(lambda1, lambda2, 0.0, 0.0)?;
                ModelSpec::ExpEiv { lambda1, lambda2 }
            }
        })
    }

    /// The observed data record in the model's reduced form.
    pub fn data(&self) -> Result<Vec<f64>> {
        match self.model {
            ModelName::Cauchy => Ok(vec![need(self.y, "y")?]),
            ModelName::CurvedNormal => {
                let r = match &self.sample {
                    Some(s) => curved_normal_reduce(s)?,
                    None => CurvedNormalReduction::new(need(self.y1, "y1")?, need(self.y2, "y2")?)?,
                };
                Ok(vec![r.y1, r.y2])
            }
            ModelName::ExpEiv => Ok(vec![need(self.y1, "y1")?, need(self.y2, "y2")?]),
        }
    }
}

impl StudyArgs {
    fn plan(&self, spec: ModelSpec) -> Result<ReplicationPlan> {
        let truth = match spec {
            ModelSpec::ExpEiv { .. } => vec![need(self.theta1, "theta1")?, need(self.theta2, "theta2")?],
            _ => vec![need(self.theta, "theta")?],
        };
        let mut plan = ReplicationPlan::new(spec, truth, self.reps, self.seed);
        plan.delta = self.delta;
        plan.workers = self.workers;
        plan.validate()?;
        Ok(plan)
    }
}

impl AssertArgs {
    fn set(&self) -> Result<SetDescriptor> {
        let lo = self.assert_lower.unwrap_or(f64::NEG_INFINITY);
        let hi = self.assert_upper.unwrap_or(f64::INFINITY);
        if self.assert_lower.is_none() && self.assert_upper.is_none() {
            return Err(Error::Argument("give --assert-lower and/or --assert-upper".into()));
        }
        if !(lo <= hi) {
            return Err(Error::Argument(format!("empty assertion [{lo}, {hi}]")));
        }
        Ok(SetDescriptor::interval(Interval::new(lo, hi, lo.is_finite(), hi.is_finite())))
    }

    fn label(&self) -> String {
        let lo = self.assert_lower.map_or("-inf".into(), |x| x.to_string());
        let hi = self.assert_upper.map_or("inf".into(), |x| x.to_string());
        format!("[{lo};{hi}]")
    }
}

fn truncation(t: TruncationArg) -> BayesTruncation {
    match t {
        TruncationArg::None => BayesTruncation::None,
        TruncationArg::Positive => BayesTruncation::PositiveQuadrant,
    }
}

/// What a subcommand produced: a dataset and a one-line summary.
struct Outcome {
    rows: Vec<Row>,
    schema: Schema,
    summary: String,
}

fn num(x: f64) -> String {
    x.to_string()
}

fn dispatch(command: &Command) -> Result<(Outcome, Option<&OutputArgs>)> {
    match command {
        Command::Contour { model, grid, output } => {
            let post = model.spec()?.posterior(&model.data()?)?;
            let grid = parse_grid(grid)?;
            let dom = post.param_domain();
            let rows: Vec<Row> =
                grid.iter().filter(|&&t| dom.contains(t)).map(|&t| vec![t.into(), post.eval(t).into()]).collect();
            let summary = format!("rows={} model={}", rows.len(), model.spec()?.name());
            Ok((Outcome { rows, schema: dataset::CONTOUR, summary }, Some(output)))
        }
        Command::Region { model, alpha, output } => {
            let post = model.spec()?.posterior(&model.data()?)?;
            let r = plausibility_region(&post, *alpha)?;
            let rows: Vec<Row> = r.intervals.iter().map(|i| vec![(*alpha).into(), i.lo.into(), i.hi.into()]).collect();
            let summary = format!(
                "alpha={} lower={} upper={} bounded={} pieces={}",
                num(*alpha),
                num(r.lower().unwrap_or(f64::NAN)),
                num(r.upper().unwrap_or(f64::NAN)),
                r.is_bounded(),
                r.intervals.len()
            );
            Ok((Outcome { rows, schema: dataset::REGION, summary }, Some(output)))
        }
        Command::Test { model, assertion, alpha, output } => {
            let post = model.spec()?.posterior(&model.data()?)?;
            let set = assertion.set()?.clip_to(&post.param_domain());
            let t = hypothesis_test(&post, &set, *alpha)?;
            let decision = match t.decision {
                Decision::Reject => "reject",
                Decision::Retain => "retain",
            };
            let rows = vec![vec![(*alpha).into(), t.attained.into(), decision.into()]];
            let summary = format!("alpha={} attained={} decision={decision}", num(*alpha), num(t.attained));
            Ok((Outcome { rows, schema: dataset::TEST, summary }, Some(output)))
        }
        Command::Reduce { sample, output } => {
            let r = curved_normal_reduce(sample)?;
            let rows = vec![vec![r.y1.into(), r.y2.into(), r.h.into()]];
            let summary = format!("y1={} y2={} h={}", num(r.y1), num(r.y2), num(r.h));
            Ok((Outcome { rows, schema: dataset::REDUCTION, summary }, Some(output)))
        }
        Command::Validate { model, study, statistic, assertion, output } => {
            let plan = study.plan(model.spec()?)?;
            let (stat, set) = match statistic {
                StatisticArg::Contour => (Statistic::ContourAtTruth, None),
                StatisticArg::Necessity => (Statistic::NecessityOfAssertion, Some(assertion.set()?)),
                StatisticArg::Possibility => (Statistic::PossibilityOfAssertion, Some(assertion.set()?)),
            };
            let r = validity_cdf(&plan, stat, set.as_ref())?;
            let rows = r
                .alpha_grid
                .iter()
                .zip(&r.cdf)
                .map(|(&a, &c)| vec![a.into(), c.into(), r.band.into()])
                .collect();
            let summary = format!(
                "pass={} uniform={} max_violation={} band={} reps={} seed={}",
                r.pass,
                r.uniform,
                num(r.max_violation),
                num(r.band),
                plan.reps,
                plan.seed
            );
            Ok((Outcome { rows, schema: dataset::VALIDITY, summary }, Some(output)))
        }
        Command::Coverage { model, study, level, method, budget, output } => {
            let plan = study.plan(model.spec()?)?;
            let methods: &[CoverageMethod] = match method {
                MethodArg::Im => &[CoverageMethod::Im],
                MethodArg::Fiducial => &[CoverageMethod::Fiducial],
                MethodArg::Both => &[CoverageMethod::Im, CoverageMethod::Fiducial],
            };
            let mut rows = Vec::new();
            let mut parts = Vec::new();
            for &m in methods {
                let s = coverage_study(&plan, *level, m, *budget)?;
                rows.push(vec![
                    m.name().into(),
                    s.level.into(),
                    s.coverage.into(),
                    s.mean_length.into(),
                    s.unbounded_count.into(),
                    s.mc_se.into(),
                    s.reps.into(),
                    s.seed.into(),
                ]);
                parts.push(format!(
                    "{}: coverage={} mean_length={} unbounded={} mc_se={}",
                    m.name(),
                    num(s.coverage),
                    num(s.mean_length),
                    s.unbounded_count,
                    num(s.mc_se)
                ));
            }
            Ok((Outcome { rows, schema: dataset::COVERAGE, summary: parts.join("; ") }, Some(output)))
        }
        Command::FalseConfidence { model, study, assertion, budget, truncation: trunc, output } => {
            let spec = model.spec()?;
            let ModelSpec::ExpEiv { lambda1, lambda2 } = spec else {
                return Err(Error::Unsupported("false-confidence compares against the exp-eiv Bayes baseline".into()));
            };
            let plan = study.plan(spec)?;
            let set = assertion.set()?;
            let assigners = [
                Assigner::ImNecessity,
                Assigner::Belief(BeliefAssigner::eiv_flat_bayes(lambda1, lambda2, *budget, truncation(*trunc))),
            ];
            let t = false_confidence_curves(&plan, &set, &assigners)?;
            let mut rows = Vec::new();
            for (k, name) in t.names.iter().enumerate() {
                for (a, c) in t.alpha_grid.iter().zip(&t.cdfs[k]) {
                    rows.push(vec![(*a).into(), name.as_str().into(), (*c).into()]);
                }
            }
            let mid = t.alpha_grid.iter().position(|&a| a >= 0.5).unwrap_or(0);
            let summary = t
                .names
                .iter()
                .enumerate()
                .map(|(k, n)| format!("{n}_cdf_at_0.5={}", num(t.cdfs[k][mid])))
                .chain([format!("band={}", num(t.band))])
                .collect::<Vec<_>>()
                .join(" ");
            Ok((Outcome { rows, schema: dataset::FALSE_CONFIDENCE, summary }, Some(output)))
        }
        Command::Equivalence { model, grid, budget, seed, output } => {
            let grid = parse_grid(grid)?;
            let (sampler, contour) = equivalence_pair(model)?;
            let hits = hitting_curve(&sampler, &grid, *budget, *seed)?;
            let b = *budget as f64;
            let mut worst: f64 = 0.0;
            let rows = grid
                .iter()
                .zip(&hits)
                .map(|(&u, &h)| {
                    let p = contour.at(u);
                    let se = (p * (1.0 - p) / b).sqrt().max(1.0 / b);
                    worst = worst.max((h - p).abs() / se);
                    vec![u.into(), h.into(), p.into(), se.into()]
                })
                .collect();
            let summary = format!("max_abs_z={} budget={budget} seed={seed}", num(worst));
            Ok((Outcome { rows, schema: dataset::EQUIVALENCE, summary }, Some(output)))
        }
        Command::Baseline(BaselineCommand::Fiducial { model, level, budget, seed, output }) => {
            if model.model != ModelName::CurvedNormal {
                return Err(Error::Unsupported("fiducial intervals are implemented for curved-normal".into()));
            }
            let y = model.data()?;
            let red = CurvedNormalReduction::new(y[0], y[1])?;
            let i = curved_normal_fiducial_interval(&model.curved()?, &red, *level, *budget, &mut substream(*seed, 0))?;
            let rows = vec![vec![(*level).into(), i.lo.into(), i.hi.into()]];
            let summary = format!("level={} lower={} upper={} length={}", num(*level), num(i.lo), num(i.hi), num(i.length()));
            Ok((Outcome { rows, schema: dataset::FIDUCIAL, summary }, Some(output)))
        }
        Command::Baseline(BaselineCommand::Bayes { model, assertion, budget, seed, truncation: trunc, output }) => {
            if model.model != ModelName::ExpEiv {
                return Err(Error::Unsupported("the flat-prior Bayes baseline is implemented for exp-eiv".into()));
            }
            let (l1, l2) = model.rates()?;
            let y = model.data()?;
            let m = EivModel::new(l1, l2, y[0], y[1])?;
            let set = assertion.set()?;
            let p = eiv_flat_bayes_probability(&m, &|phi| set.contains(phi), *budget, truncation(*trunc), &mut substream(*seed, 0))?;
            let rows = vec![vec![assertion.label().into(), p.into()]];
            let summary = format!("probability={} budget={budget}", num(p));
            Ok((Outcome { rows, schema: dataset::PROBABILITY, summary }, Some(output)))
        }
    }
}

/// Sampler and analytic contour on the auxiliary space of each model.
fn equivalence_pair(model: &ModelArgs) -> Result<(NestedRandomSetSampler, PossibilityContour)> {
    match model.model {
        ModelName::Cauchy => {
            let dist = Arc::new(Cauchy::standard());
            let c = build_max_specificity(dist.clone(), ConstructionMethod::ClosedForm, 0, 0)?;
            Ok((NestedRandomSetSampler::from_density(dist), c))
        }
        ModelName::CurvedNormal => {
            let y = model.data()?;
            let red = CurvedNormalReduction::new(y[0], y[1])?;
            let d = Arc::new(ConditionalDensity::new(&model.curved()?, red.h)?);
            let assoc = crate::models::curved_normal::CurvedNormalConditional { density: d.clone(), y2: red.y2 };
            Ok((NestedRandomSetSampler::from_density(d), assoc.base_contour()))
        }
        ModelName::ExpEiv => {
            let tri = build_triangular();
            let t = tri.clone();
            let rank: crate::possibility::RankFn = Arc::new(move |u: &[f64]| t.eval(u));
            Ok((NestedRandomSetSampler::ranked(Arc::new(Uniform::unit()), rank, Some(0.5)), tri))
        }
    }
}

/// Exit status for an error: 2 for usage/configuration, 3 for numeric failures, 1 for I/O.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Argument(_) | Error::Configuration(_) | Error::Domain(_) | Error::Unsupported(_) | Error::Schema(_) => 2,
        Error::Numeric(_) | Error::Data(_) | Error::DegenerateData(_) | Error::DegeneratePosterior(_) => 3,
        Error::Io(_) => 1,
    }
}

fn format_of(o: &OutputArgs) -> Format {
    match o.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Jsonl => Format::Jsonl,
    }
}

/// Parse arguments, run, and return the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    let result = dispatch(&cli.command).and_then(|(outcome, output)| {
        let output = output.expect("every subcommand has output flags");
        let format = format_of(output);
        match &output.out {
            Some(path) => {
                emit_dataset(&outcome.rows, &outcome.schema, path, format)?;
                writeln!(stdout, "{} out={}", outcome.summary, path.display())?;
            }
            None => {
                stdout.write_all(render(&outcome.rows, &outcome.schema, format)?.as_bytes())?;
                writeln!(stderr, "{}", outcome.summary)?;
            }
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
