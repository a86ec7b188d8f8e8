use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use endwalk::gensys::{build_dependency_digraph, build_system, system_json, BuildOptions, PolynomialSystem};
use endwalk::oracle::{brute_counts_for, displacement_stats};
use endwalk::report;
use endwalk::solver::{find_critical_point, series_coefficients, series_returns};
use endwalk::template::{patch_for_horizon, validate_template, GraphTemplate, TemplateSpec, DEFAULT_INSTANCE_CAP};
use endwalk::tree::{arrangement_json, saw_to_complete_arrangement};
use endwalk::{Error, Walk};

const EXIT_FAIL: u8 = 1;
const EXIT_RESOURCE: u8 = 2;
const EXIT_USAGE: u8 = 64;

/// Self-avoiding walk counts and connective constants of graphs given by tree-decomposition templates.
#[derive(Parser, Debug)]
#[command(name = "endwalk", version)]
struct Cli {
    /// Worker threads (0 = all cores); ENDWALK_JOBS takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output to a file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Caps {
    /// Cap on materialised part instances.
    #[arg(long, default_value_t = DEFAULT_INSTANCE_CAP)]
    instance_cap: usize,
    /// Largest adhesion walk length for configuration enumeration.
    #[arg(long, default_value_t = BuildOptions::default().k_cap)]
    k_cap: usize,
    /// Cap on shapes enumerated per part.
    #[arg(long, default_value_t = BuildOptions::default().shape_cap)]
    shape_cap: usize,
}

impl Caps {
    fn build(&self) -> BuildOptions {
        BuildOptions { k_cap: self.k_cap, shape_cap: self.shape_cap, ..BuildOptions::default() }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a template and print its report.
    Validate { template: PathBuf },
    /// List configuration classes with their tags.
    Configs {
        template: PathBuf,
        #[command(flatten)]
        caps: Caps,
    },
    /// Dump the polynomial system.
    System {
        template: PathBuf,
        #[command(flatten)]
        caps: Caps,
    },
    /// Locate the critical point and report R, mu_w and component spectra.
    Solve {
        template: PathBuf,
        /// Bisection tolerance on R.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        caps: Caps,
    },
    /// Exact SAW counts from the generating system.
    Series {
        template: PathBuf,
        #[arg(long, short, default_value_t = 12)]
        n: usize,
        /// Also count self-avoiding returns.
        #[arg(long)]
        returns: bool,
        #[command(flatten)]
        caps: Caps,
    },
    /// Brute-force counts on a finite patch.
    Oracle {
        template: PathBuf,
        #[arg(long, short, default_value_t = 10)]
        n: usize,
        #[command(flatten)]
        caps: Caps,
    },
    /// Compare series coefficients with brute-force counts.
    Compare {
        template: PathBuf,
        #[arg(long, short, default_value_t = 12)]
        n: usize,
        #[command(flatten)]
        caps: Caps,
    },
    /// Endpoint displacement statistics of length-n SAWs.
    Ballistic {
        template: PathBuf,
        /// Largest length.
        #[arg(long, short, default_value_t = 10)]
        n: usize,
        /// Smallest length.
        #[arg(long, default_value_t = 1)]
        from: usize,
        /// Distances below threshold·n count towards the tail fraction.
        #[arg(long, default_value_t = 0.2)]
        threshold: f64,
        #[command(flatten)]
        caps: Caps,
    },
    /// Print the complete arrangement of a SAW given as comma-separated patch vertex ids.
    Explain {
        template: PathBuf,
        walk: String,
        #[command(flatten)]
        caps: Caps,
    },
}

enum Failure {
    Usage(String),
    Check(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

struct Output {
    text: String,
    ok: bool,
}

fn ok(text: String) -> Output {
    Output { text, ok: true }
}

fn jobs(flag: usize) -> Result<usize, Failure> {
    match std::env::var("ENDWALK_JOBS") {
        Ok(v) if !v.trim().is_empty() => {
            v.trim().parse().map_err(|_| Failure::Usage(format!("ENDWALK_JOBS must be a non-negative integer, got {v:?}")))
        }
        _ => Ok(flag),
    }
}

fn load(path: &PathBuf) -> Result<GraphTemplate, Failure> {
    Ok(GraphTemplate::from_path(path)?)
}

fn system(path: &PathBuf, caps: &Caps) -> Result<(GraphTemplate, PolynomialSystem), Failure> {
    let t = load(path)?;
    let sys = build_system(&t, caps.build())?;
    Ok((t, sys))
}

fn json_out(v: &Value) -> String {
    serde_json::to_string_pretty(&report::normalize(v.clone())).unwrap() + "\n"
}

fn csv_only_tables(cmd: &str) -> Failure {
    Failure::Usage(format!("--format csv is not supported by `{cmd}`"))
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let csv = cli.format == Format::Csv;
    match &cli.command {
        Command::Validate { template } => {
            let spec = TemplateSpec::from_path(template)?;
            let r = validate_template(&spec);
            if csv {
                return Err(csv_only_tables("validate"));
            }
            Ok(Output { text: json_out(&report::to_value(&r)), ok: r.valid })
        }
        Command::Configs { template, caps } => {
            let (t, sys) = system(template, caps)?;
            let d = build_dependency_digraph(&sys)?;
            let rows: Vec<Value> = sys
                .classes
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let mut tags = c.config().tags();
                    if d.persistent.contains(&d.component_of[i]) {
                        tags.push("persistent");
                    }
                    json!({"index": i, "label": c.label(&t), "tags": tags, "component": format!("{:?}", d.class_of(i))})
                })
                .collect();
            if csv {
                let mut s = String::from("index,label,tags,component\n");
                for r in &rows {
                    let tags: Vec<&str> = r["tags"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
                    writeln!(s, "{},\"{}\",{},{}", r["index"], r["label"].as_str().unwrap(), tags.join(" "), r["component"].as_str().unwrap()).unwrap();
                }
                return Ok(ok(s));
            }
            Ok(ok(json_out(&json!({"name": t.name, "classes": rows}))))
        }
        Command::System { template, caps } => {
            if csv {
                return Err(csv_only_tables("system"));
            }
            let (t, sys) = system(template, caps)?;
            let d = build_dependency_digraph(&sys)?;
            Ok(ok(json_out(&system_json(&t, &sys, &d))))
        }
        Command::Solve { template, tol, caps } => {
            if csv {
                return Err(csv_only_tables("solve"));
            }
            if !(*tol > 0.0) {
                return Err(Failure::Usage("--tol must be positive".into()));
            }
            let (t, sys) = system(template, caps)?;
            let r = find_critical_point(&sys, *tol)?;
            let mut v = report::to_value(&r);
            v["name"] = json!(t.name);
            Ok(ok(json_out(&v)))
        }
        Command::Series { template, n, returns, caps } => {
            let (t, sys) = system(template, caps)?;
            let c = series_coefficients(&sys, *n)?;
            let sar = if *returns { Some(series_returns(&sys, *n)?) } else { None };
            if csv {
                let mut s = String::from(if *returns { "n,c,sar\n" } else { "n,c\n" });
                for k in 0..=*n {
                    match &sar {
                        Some(r) => writeln!(s, "{k},{},{}", c[k], r[k]).unwrap(),
                        None => writeln!(s, "{k},{}", c[k]).unwrap(),
                    }
                }
                return Ok(ok(s));
            }
            let mut v = json!({"name": t.name, "n": n, "c": report::big_vec(&c)});
            if let Some(r) = &sar {
                v["sar"] = report::big_vec(r);
            }
            Ok(ok(json_out(&v)))
        }
        Command::Oracle { template, n, caps } => {
            let t = load(template)?;
            let r = brute_counts_for(&t, *n, caps.instance_cap)?;
            if csv {
                let mut s = String::from("n,c,sar,sap\n");
                for k in 0..=*n {
                    writeln!(s, "{k},{},{},{}", r.c[k], r.sar[k], r.sap[k]).unwrap();
                }
                return Ok(ok(s));
            }
            let mut v = report::to_value(&r);
            v["name"] = json!(t.name);
            Ok(ok(json_out(&v)))
        }
        Command::Compare { template, n, caps } => {
            if csv {
                return Err(csv_only_tables("compare"));
            }
            let (t, sys) = system(template, caps)?;
            let c = series_coefficients(&sys, *n)?;
            let o = brute_counts_for(&t, *n, caps.instance_cap)?;
            let mut text = String::new();
            let mut matched = 0;
            for k in 1..=*n {
                if c[k] == o.c[k].into() {
                    matched += 1;
                } else {
                    writeln!(text, "mismatch at n={k}: series {} oracle {}", c[k], o.c[k]).unwrap();
                }
            }
            writeln!(text, "{matched}/{n} coefficients match").unwrap();
            Ok(Output { text, ok: matched == *n })
        }
        Command::Ballistic { template, n, from, threshold, caps } => {
            if *from == 0 || from > n {
                return Err(Failure::Usage("need 1 ≤ --from ≤ --n".into()));
            }
            let t = load(template)?;
            let p = patch_for_horizon(&t, *n, caps.instance_cap)?;
            let stats = (*from..=*n)
                .map(|k| displacement_stats(&p, p.origin, k, *threshold))
                .collect::<endwalk::Result<Vec<_>>>()?;
            if csv {
                let mut s = String::from("n,total,mean_over_n,tail_fraction\n");
                for st in &stats {
                    let (m, f) = (report::round_sig(st.mean_over_n), report::round_sig(st.tail_fraction));
                    writeln!(s, "{},{},{m},{f}", st.n, st.total).unwrap();
                }
                return Ok(ok(s));
            }
            Ok(ok(json_out(&json!({"name": t.name, "threshold": threshold, "lengths": report::to_value(&stats)}))))
        }
        Command::Explain { template, walk, caps } => {
            if csv {
                return Err(csv_only_tables("explain"));
            }
            let verts = walk
                .split(',')
                .map(|x| x.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| Failure::Usage(format!("walk must be comma-separated vertex ids, got {walk:?}")))?;
            let t = load(template)?;
            let p = patch_for_horizon(&t, verts.len().saturating_sub(1).max(1), caps.instance_cap)?;
            let w = verts
                .iter()
                .all(|&v| v < p.graph.vertex_count())
                .then(|| Walk::from_vertices(&p.graph, &verts))
                .flatten()
                .ok_or_else(|| Failure::Check(format!("{walk} is not a walk on the patch")))?;
            let a = saw_to_complete_arrangement(&t, &p, &w)?;
            let mut v = arrangement_json(&t, &p, &a);
            v["walk"] = json!(verts);
            v["origin"] = json!(p.origin);
            Ok(ok(json_out(&v)))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = jobs(cli.jobs).and_then(|n| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
        run(&cli)
    });
    match result {
        Ok(out) => {
            match &cli.output {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &out.text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(EXIT_FAIL);
                    }
                }
                None => print!("{}", out.text),
            }
            ExitCode::from(if out.ok { 0 } else { EXIT_FAIL })
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nRun `endwalk --help` for usage.");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_FAIL)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_resource() { EXIT_RESOURCE } else { EXIT_FAIL })
        }
    }
}
