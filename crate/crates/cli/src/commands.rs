use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use fockline::analytics::AnalyticReport;
use fockline::io::StateJson;
use fockline::optics::registry_for;
use fockline::scheme::{preset_circuit, run_scheme, SchemeReport};
use fockline::verify::{self, VerifyOptions, CRITERIA};
use fockline::{
    apply_circuit, conditional_state_unnormalized, herald, pattern_distribution, Bell, BellState,
    Circuit, ClickPattern, CoincidenceMode, DensityOperator, DetectorBank, SchemeConfig,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::grid::Spec;
use crate::render::{self, Row};
use crate::{Common, Format};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
struct Meta {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: BTreeMap<&'static str, String>,
}

impl Meta {
    fn new(command: &'static str, config: &[(&'static str, String)]) -> Self {
        Meta {
            tool: "fockline",
            version: VERSION,
            command,
            config: config.iter().cloned().collect(),
        }
    }

    fn header(&self) -> String {
        let cfg: Vec<String> = self
            .config
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!(
            "fockline {} {} {}",
            self.version,
            self.command,
            cfg.join(" ")
        )
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    meta: &'a Meta,
    report: &'a T,
}

fn json<T: Serialize>(meta: &Meta, report: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(&Envelope { meta, report })? + "\n")
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn point(name: &str, spec: Spec) -> Result<f64> {
    spec.scalar()
        .with_context(|| format!("--{name} must be a single value here, got grid {spec}"))
}

fn config(epsilon: f64, eta: f64, mode: CoincidenceMode) -> Result<SchemeConfig> {
    SchemeConfig::new(Complex64::new(epsilon, 0.0), eta, mode).context("invalid configuration")
}

fn scalar_report(
    command: &'static str,
    epsilon: Spec,
    eta: Spec,
    common: &Common,
) -> Result<(Meta, SchemeReport)> {
    let mode = common.coincidence.into();
    let cfg = config(point("epsilon", epsilon)?, point("eta", eta)?, mode)?;
    let meta = Meta::new(
        command,
        &[
            ("epsilon", epsilon.to_string()),
            ("eta", eta.to_string()),
            ("coincidence", mode.to_string()),
        ],
    );
    Ok((meta, run_scheme(&cfg)?))
}

pub fn run(epsilon: Spec, eta: Spec, format: Format, common: &Common) -> Result<ExitCode> {
    let (meta, report) = scalar_report("run", epsilon, eta, common)?;
    let text = match format {
        Format::Json => json(&meta, &report)?,
        Format::Csv => render::csv(&meta.header(), &[Row::from_report(&report)]),
        Format::Table => render::report_table(&meta.header(), &report),
    };
    emit(common.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn threads() -> Result<Option<usize>> {
    match std::env::var("FOCKLINE_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => bail!("FOCKLINE_THREADS must be a positive integer, got {v:?}"),
        },
        Err(_) => Ok(None),
    }
}

pub fn sweep(epsilon: Spec, eta: Spec, format: Format, common: &Common) -> Result<ExitCode> {
    if !epsilon.is_grid() && !eta.is_grid() {
        bail!("sweep needs a grid (start:stop:count) for --epsilon or --eta");
    }
    let mode: CoincidenceMode = common.coincidence.into();
    let mut points = Vec::new();
    for e in epsilon.points() {
        for n in eta.points() {
            points.push(config(e, n, mode)?);
        }
    }
    let eval = |cfg: &SchemeConfig| -> Result<Row> {
        let h = herald(cfg)?;
        let a = AnalyticReport::new(cfg.epsilon.norm(), cfg.eta)?;
        Ok(Row::from_herald(cfg.epsilon.re, cfg.eta, &h, &a))
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    let rows: Vec<Row> = pool.install(|| points.par_iter().map(eval).collect::<Result<_>>())?;
    log::info!("evaluated {} sweep points", rows.len());

    let meta = Meta::new(
        "sweep",
        &[
            ("epsilon", epsilon.to_string()),
            ("eta", eta.to_string()),
            ("coincidence", mode.to_string()),
        ],
    );
    let text = match format {
        Format::Csv => render::csv(&meta.header(), &rows),
        Format::Json => json(&meta, &rows)?,
        Format::Table => render::sweep_table(&meta.header(), &rows),
    };
    emit(common.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

pub fn components(epsilon: Spec, eta: Spec, format: Format, common: &Common) -> Result<ExitCode> {
    let (meta, report) = scalar_report("components", epsilon, eta, common)?;
    let text = match format {
        Format::Table => render::components_table(&meta.header(), &report),
        Format::Json => {
            #[derive(Serialize)]
            struct Components<'a> {
                components: &'a [fockline::scheme::ComponentRecord],
                p_coincidence: f64,
                analytics: &'a AnalyticReport,
            }
            let c = Components {
                components: &report.components,
                p_coincidence: report.p_coincidence,
                analytics: &report.analytics,
            };
            json(&meta, &c)?
        }
        Format::Csv => {
            let mut out = format!(
                "# {}\ncomponent,order,prior,coincidence_given_component,contribution,excluded\n",
                meta.header()
            );
            for c in &report.components {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    c.label.name(),
                    c.order.map(|o| o.to_string()).unwrap_or_default(),
                    render::csv_number(Some(c.prior)),
                    render::csv_number(Some(c.coincidence_given_component)),
                    render::csv_number(Some(c.contribution)),
                    c.excluded
                ));
            }
            out
        }
    };
    emit(common.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

pub struct CircuitArgs<'a> {
    pub circuit: Option<PathBuf>,
    pub preset: Option<String>,
    pub input: PathBuf,
    pub detectors: PathBuf,
    pub accept: Vec<String>,
    pub keep: Vec<String>,
    pub target: Option<String>,
    pub format: Format,
    pub common: &'a Common,
}

#[derive(Serialize)]
struct EventReport {
    accept: Vec<String>,
    mode: CoincidenceMode,
    patterns: Vec<String>,
    probability: f64,
    keep: Vec<String>,
    rho: Option<DensityOperator>,
    target: Option<String>,
    fidelity: Option<f64>,
}

#[derive(Serialize)]
struct CircuitReport {
    circuit: Option<String>,
    elements: usize,
    output: StateJson,
    click_distribution: BTreeMap<String, f64>,
    event: Option<EventReport>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Full patterns in which every id of some accept set clicks (strict: and
/// nothing else does).
fn accepted_patterns(
    bank: &DetectorBank,
    accept: &[String],
    mode: CoincidenceMode,
) -> Result<Vec<ClickPattern>> {
    let mut wanted = Vec::new();
    for set in accept {
        let ids: Vec<&str> = set.split('+').map(str::trim).collect();
        wanted.push(ClickPattern::clicked(bank, &ids).with_context(|| format!("--accept {set}"))?);
    }
    Ok(bank
        .all_patterns()
        .into_iter()
        .filter(|p| {
            wanted.iter().any(|w| match mode {
                CoincidenceMode::Strict => p == w,
                CoincidenceMode::Lenient => w.0.iter().zip(&p.0).all(|(need, got)| !need || *got),
            })
        })
        .collect())
}

pub fn circuit(args: CircuitArgs<'_>) -> Result<ExitCode> {
    let mode: CoincidenceMode = args.common.coincidence.into();
    let (circuit, source) = match (&args.circuit, &args.preset) {
        (Some(p), _) => {
            let c = Circuit::from_json(&read(p)?)
                .with_context(|| format!("circuit {}", p.display()))?;
            (c, p.display().to_string())
        }
        (None, Some(name)) => (
            preset_circuit(name).with_context(|| format!("unknown preset {name:?}"))?,
            name.clone(),
        ),
        (None, None) => bail!("one of --circuit or --preset is required"),
    };
    let input = StateJson::parse(&read(&args.input)?)
        .with_context(|| format!("input {}", args.input.display()))?;
    let bank = DetectorBank::from_json(&read(&args.detectors)?)
        .with_context(|| format!("detectors {}", args.detectors.display()))?;

    let mut extra = input.paths();
    extra.extend(bank.detectors().iter().map(|d| d.path.clone()));
    extra.extend(args.keep.iter().cloned());
    let extra: Vec<&str> = extra.iter().map(String::as_str).collect();
    let reg = registry_for(&circuit, &extra, input.n_max())?;
    circuit
        .validate(&reg)
        .context("circuit does not fit the mode registry")?;
    let state = input.into_state(&reg).context("input state")?;
    let output = apply_circuit(&state, &circuit)?;

    let click_distribution = pattern_distribution(&output, &bank)?
        .into_iter()
        .map(|(p, prob)| (p.label(&bank), prob))
        .collect();

    let event = if args.accept.is_empty() {
        None
    } else {
        if args.keep.is_empty() {
            bail!("--accept needs --keep to name the undetected paths");
        }
        let patterns = accepted_patterns(&bank, &args.accept, mode)?;
        let keep: Vec<&str> = args.keep.iter().map(String::as_str).collect();
        let (probability, raw) = conditional_state_unnormalized(&output, &patterns, &bank, &keep)?;
        let rho = if probability > 0.0 {
            Some(raw.normalized()?)
        } else {
            None
        };
        let fidelity = match (&args.target, &rho) {
            (Some(t), Some(r)) => {
                let [a, b] = keep.as_slice() else {
                    bail!("--target needs exactly two --keep paths")
                };
                let kind = Bell::ALL
                    .into_iter()
                    .find(|k| k.name() == t.as_str())
                    .context("unknown target")?;
                Some(r.fidelity_pure(&BellState::new(kind, *a, *b).to_state(&reg)?)?)
            }
            _ => None,
        };
        Some(EventReport {
            accept: args.accept.clone(),
            mode,
            patterns: patterns.iter().map(|p| p.label(&bank)).collect(),
            probability,
            keep: args.keep.clone(),
            rho,
            target: args.target.clone(),
            fidelity,
        })
    };

    let report = CircuitReport {
        circuit: circuit.name.clone(),
        elements: circuit.elements.len(),
        output: StateJson::from_state(&output),
        click_distribution,
        event,
    };
    let meta = Meta::new(
        "circuit",
        &[
            ("circuit", source),
            ("input", args.input.display().to_string()),
            ("detectors", args.detectors.display().to_string()),
            ("coincidence", mode.to_string()),
        ],
    );
    let text = match args.format {
        Format::Json => json(&meta, &report)?,
        Format::Csv | Format::Table => {
            let mut out = format!("# {}\n", meta.header());
            let rows: Vec<Vec<String>> = report
                .click_distribution
                .iter()
                .map(|(k, v)| vec![k.clone(), render::csv_number(Some(*v))])
                .collect();
            if args.format == Format::Csv {
                out.push_str("pattern,probability\n");
                for r in rows {
                    out.push_str(&r.join(","));
                    out.push('\n');
                }
            } else {
                out.push_str(&render::table(&["pattern", "probability"], &rows));
                if let Some(e) = &report.event {
                    out.push_str(&format!(
                        "\nevent probability {}\nfidelity {}\n",
                        render::short(Some(e.probability)),
                        render::short(e.fidelity)
                    ));
                }
            }
            out
        }
    };
    emit(args.common.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

pub fn verify(
    criteria: &[String],
    verbose: bool,
    out: Option<&Path>,
    tamper_bs: bool,
) -> Result<ExitCode> {
    let opts = VerifyOptions {
        tamper_beamsplitter: tamper_bs,
    };
    let keys: Vec<String> = if criteria.is_empty() {
        CRITERIA
            .iter()
            .map(|(_, name, _)| name.to_string())
            .collect()
    } else {
        criteria.to_vec()
    };
    let mut outcomes = Vec::new();
    for key in &keys {
        let names: Vec<&str> = CRITERIA.iter().map(|c| c.1).collect();
        let outcome = verify::run_criterion(key, &opts)
            .with_context(|| format!("unknown criterion {key:?}; known: {}", names.join(", ")))?;
        outcomes.push(outcome);
    }
    let mut text = format!("fockline {VERSION} verify\n");
    for o in &outcomes {
        text.push_str(&o.render(verbose));
    }
    let passed = outcomes.iter().filter(|o| o.passed()).count();
    text.push_str(&format!("{passed}/{} criteria passed\n", outcomes.len()));
    emit(out, &text)?;
    Ok(if passed == outcomes.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
