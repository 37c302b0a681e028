//! Command-line front end: loads scenarios, runs analytic and Monte-Carlo
//! sweeps, writes CSV and reports SNR gains.

pub mod args;
pub mod error;
pub mod output;

use std::fs;
use std::io::Write;
use std::path::Path;

use fso_linklab::scenario::{figure_scenarios, preset, preset_names, FIGURES, FIGURE_GAINS};
use fso_linklab::simulation::simulate_curve;
use fso_linklab::{ber_curve, snr_gain_at_target, BerCurve, LinkScenario};

pub use args::{Cli, Command, Overrides};
pub use error::{exit, CliError};

pub const THREADS_ENV: &str = "FSO_LINKLAB_THREADS";

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Sizes the global rayon pool from `FSO_LINKLAB_THREADS`, if set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::new(
            exit::VALIDATION,
            format!("{THREADS_ENV} must be a positive integer, got `{raw}`"),
        )
    })?;
    // A pool built earlier in the same process keeps its size.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

pub fn load_config(path: &Path) -> CliResult<LinkScenario> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::new(
            exit::CONFIG_UNREADABLE,
            format!("cannot read config {}: {e}", path.display()),
        )
    })?;
    serde_json::from_str(&text).map_err(|e| {
        let code = if e.is_data() {
            exit::VALIDATION
        } else {
            exit::CONFIG_UNREADABLE
        };
        CliError::new(code, format!("config {}: {e}", path.display()))
    })
}

fn load_preset(name: &str) -> CliResult<LinkScenario> {
    preset(name).ok_or_else(|| {
        CliError::new(
            exit::VALIDATION,
            format!(
                "unknown preset `{name}` (known: {})",
                preset_names().join(", ")
            ),
        )
    })
}

/// A preset name if one matches, otherwise a config path.
fn load_either(spec: &str) -> CliResult<LinkScenario> {
    match preset(spec) {
        Some(s) => Ok(s),
        None => load_config(Path::new(spec)),
    }
}

fn prepare(mut scenario: LinkScenario, overrides: &Overrides) -> CliResult<LinkScenario> {
    overrides.apply(&mut scenario);
    scenario.validate()?;
    Ok(scenario)
}

/// Analytic curve, plus Monte-Carlo columns when the scenario asks for them.
pub fn compute_curve(scenario: &LinkScenario) -> CliResult<BerCurve> {
    let mut curve = ber_curve(scenario, &scenario.snr.grid())?;
    if let Some(mc) = &scenario.mc {
        simulate_curve(&mut curve, scenario, mc)?;
    }
    Ok(curve)
}

fn write_csv(path: &Path, curve: &BerCurve) -> CliResult<()> {
    output::write_atomic(path, &output::render_curve(curve))
        .map_err(|e| CliError::new(exit::IO, format!("cannot write {}: {e}", path.display())))
}

fn tidy(x: f64) -> f64 {
    let r = (x * 1e4).round() / 1e4;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Run(a) => {
            let base = match (&a.config, &a.preset) {
                (Some(p), _) => load_config(p)?,
                (None, Some(n)) => load_preset(n)?,
                (None, None) => unreachable!("clap requires --config or --preset"),
            };
            let scenario = prepare(base, &a.overrides)?;
            let curve = compute_curve(&scenario)?;
            write_csv(&a.output, &curve)?;
            let db = curve.crossing_db(scenario.target_ber)?;
            let _ = writeln!(
                out,
                "{}: BER {:e} at {db:.4} dB",
                curve.label, scenario.target_ber
            );
            let _ = writeln!(out, "crossing_db={}", tidy(db));
        }
        Command::Compare(a) => {
            let sa = prepare(load_either(&a.a)?, &a.overrides)?;
            let sb = prepare(load_either(&a.b)?, &a.overrides)?;
            let target = sa.target_ber;
            let ca = ber_curve(&sa, &sa.snr.grid())?;
            let cb = ber_curve(&sb, &sb.snr.grid())?;
            let gain = snr_gain_at_target(&ca, &cb, target)?;
            let _ = writeln!(out, "A {}: {:.4} dB", ca.label, ca.crossing_db(target)?);
            let _ = writeln!(out, "B {}: {:.4} dB", cb.label, cb.crossing_db(target)?);
            let _ = writeln!(out, "gain_db={}", tidy(gain));
        }
        Command::Reproduce(a) => {
            let sets = figure_scenarios(&a.which).ok_or_else(|| {
                CliError::new(
                    exit::VALIDATION,
                    format!(
                        "unknown figure `{}` (known: {})",
                        a.which,
                        FIGURES.join(", ")
                    ),
                )
            })?;
            fs::create_dir_all(&a.output).map_err(|e| {
                CliError::new(
                    exit::IO,
                    format!("cannot create {}: {e}", a.output.display()),
                )
            })?;
            let mut curves = Vec::new();
            let mut target = 0.0;
            for (key, base) in sets {
                let scenario = prepare(base, &a.overrides)?;
                target = scenario.target_ber;
                let curve = compute_curve(&scenario)?;
                write_csv(&a.output.join(format!("{}.csv", scenario.name)), &curve)?;
                curves.push((key, curve));
            }
            let find = |k: &str| {
                &curves
                    .iter()
                    .find(|(key, _)| *key == k)
                    .expect("figure curve")
                    .1
            };
            let mut summary = format!(
                "# target_ber: {target:e}\nlabel,better,worse,snr_better_db,snr_worse_db,gain_db\n"
            );
            for g in &FIGURE_GAINS {
                let (better, worse) = (find(g.better), find(g.worse));
                let gain = snr_gain_at_target(better, worse, target)?;
                summary.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    g.label,
                    g.better,
                    g.worse,
                    output::format_number(better.crossing_db(target)?),
                    output::format_number(worse.crossing_db(target)?),
                    output::format_number(gain),
                ));
                let _ = writeln!(out, "{}: {gain:.2} dB", g.label);
            }
            let path = a.output.join(format!("{}_gains.csv", a.which));
            output::write_atomic(&path, &summary).map_err(|e| {
                CliError::new(exit::IO, format!("cannot write {}: {e}", path.display()))
            })?;
        }
        Command::Presets(a) => match a.show {
            Some(name) => {
                let _ = writeln!(out, "{}", load_preset(&name)?.to_json());
            }
            None => {
                for name in preset_names() {
                    let _ = writeln!(out, "{name}");
                }
            }
        },
    }
    Ok(())
}
