use gblab_cli::config::{split_experiment_spec, Origin};
use gblab_cli::svg::{render_file, PlotKind, Style};
use gblab_cli::{experiments, report, ExperimentConfig, RawConfig};
use std::path::Path;
use std::process::ExitCode;

const USAGE: &str = "usage:
  gblab [run] <experiment> [config=FILE] [key=value ...]
  gblab render <input.csv> <output.svg> [kind=cdf|histogram] [title=TEXT]

experiments: dedekind_cauchy, moments, clt, estermann, modsym, s0_vs_I,
             oscint_table, spectrum";

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 1;
const EXIT_THRESHOLD: u8 = 2;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    ExitCode::from(match args.first().map(String::as_str) {
        None | Some("-h" | "--help" | "help") => {
            eprintln!("{USAGE}");
            EXIT_CONFIG
        }
        Some("render") => render_cmd(&args[1..]),
        Some("run") => run_cmd(&args[1..], 2),
        Some(_) => run_cmd(&args, 1),
    })
}

fn render_cmd(args: &[String]) -> u8 {
    let (Some(input), Some(output)) = (args.first(), args.get(1)) else {
        eprintln!("gblab: render needs an input CSV and an output SVG path\n{USAGE}");
        return EXIT_CONFIG;
    };
    let mut style = Style::cdf("");
    for (i, a) in args[2..].iter().enumerate() {
        match a.split_once('=') {
            Some(("kind", v)) => match PlotKind::from_name(v) {
                Some(k) => style.kind = k,
                None => {
                    eprintln!("gblab: argument {}: field `kind`: expected cdf or histogram, got `{v}`", i + 3);
                    return EXIT_CONFIG;
                }
            },
            Some(("title", v)) => style.title = v.to_string(),
            _ => {
                eprintln!("gblab: argument {}: expected kind=... or title=..., got `{a}`", i + 3);
                return EXIT_CONFIG;
            }
        }
    }
    match render_file(Path::new(input), Path::new(output), &style) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("gblab: render: {e}");
            EXIT_CONFIG
        }
    }
}

/// `first_index` is the 1-based position of `args[0]` on the command line.
fn parse_config(args: &[String], first_index: usize) -> Result<ExperimentConfig, gblab_cli::ConfigError> {
    let mut raw = RawConfig::new();
    let mut rest = args;
    let mut index = first_index;
    if let Some(spec) = args.first().filter(|a| !a.contains('=') || a.contains('(')) {
        let (name, implied) = split_experiment_spec(spec);
        raw.set("experiment", &name, Origin::Argument(index));
        if let Some((k, v)) = implied {
            raw.set(k, &v, Origin::Argument(index));
        }
        rest = &args[1..];
        index += 1;
    }
    // The file comes first so that command-line entries override it.
    for a in rest {
        if let Some(path) = a.strip_prefix("config=") {
            let mut file = RawConfig::new();
            file.load_file(Path::new(path))?;
            let mut merged = file;
            merged.extend(raw);
            raw = merged;
        }
    }
    for (i, a) in rest.iter().enumerate() {
        if !a.starts_with("config=") {
            raw.push_arg(a, index + i)?;
        }
    }
    ExperimentConfig::resolve(&raw)
}

fn run_cmd(args: &[String], first_index: usize) -> u8 {
    let cfg = match parse_config(args, first_index) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("gblab: config error: {e}");
            return EXIT_CONFIG;
        }
    };
    let outcome = match experiments::run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("gblab: {}: {e}", cfg.experiment);
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = report::write_outputs(&cfg.out, &cfg, &outcome) {
        eprintln!("gblab: cannot write {}: {e}", cfg.out.display());
        return EXIT_CONFIG;
    }
    let r = &outcome.report;
    println!(
        "{}: {} in {:.1}s, outputs in {}",
        r.experiment,
        if r.pass { "pass" } else { "FAIL" },
        r.runtime_seconds,
        cfg.out.display()
    );
    if r.pass {
        EXIT_OK
    } else {
        EXIT_THRESHOLD
    }
}
