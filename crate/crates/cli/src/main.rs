use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C;
use serde_json::json;

use iselinv::factorization::{ldlt_incomplete, ldlt_incomplete_tol};
use iselinv::io::{
    read_matrix_market, read_permutation, read_poles_csv, write_factor_d, write_factor_l, write_matrix_market,
    write_pattern_csv, write_permutation,
};
use iselinv::localization::SpectralSet;
use iselinv::pexsi::{pexsi_evaluate, PexsiOptions};
use iselinv::selinv::{closedness_audit, selinv_incomplete};
use iselinv::study::{run_study, OrderKind, StudyConfig, StudyKind};
use iselinv::symbolic::{symbolic_levels, Cutoff};
use iselinv::{
    nested_dissection_cartesian, nested_dissection_general, permute, toy_hamiltonian, MeshSpec, Permutation,
    SparseSymmetric,
};

/// Incomplete selected inversion of sparse complex-symmetric matrices.
#[derive(Parser)]
#[command(name = "iselinv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the chequerboard model Hamiltonian (optionally shifted).
    GenMatrix {
        #[command(flatten)]
        mesh: MeshArgs,
        /// Shift: the output is H - zI.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Option<C>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a nested dissection ordering.
    Order {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Levels of fill as CSV `row,col,level`.
    Symbolic {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        order: OrderArgs,
        /// Level cutoff or `exact`.
        #[arg(long, value_parser = parse_cutoff, default_value = "exact")]
        cutoff: Cutoff,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// LDL^T factorization; writes PREFIX.L.mtx, PREFIX.D.mtx and, when
    /// tracking, PREFIX.E.mtx.
    Factorize {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        order: OrderArgs,
        #[arg(long, value_parser = parse_cutoff, default_value = "exact", conflicts_with = "tol")]
        cutoff: Cutoff,
        /// Drop tolerance instead of a level cutoff.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        track_dropped: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Selected inversion; writes PREFIX.B.mtx and, when tracking,
    /// PREFIX.F.mtx.
    Selinv {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        order: OrderArgs,
        #[arg(long, value_parser = parse_cutoff, default_value = "exact")]
        cutoff: Cutoff,
        #[arg(long)]
        track_dropped: bool,
        /// Count reads of inverse entries missing from the pattern.
        #[arg(long)]
        audit: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Green's function of one or two intervals.
    Green {
        /// `a,b` or `a,b,c,d`.
        #[arg(long, allow_hyphen_values = true)]
        intervals: String,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: C,
    },
    /// Quantities from a pole expansion, as a JSON report.
    Pexsi {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        order: OrderArgs,
        /// CSV with header `re_w,im_w,re_z,im_z`.
        #[arg(long)]
        poles: PathBuf,
        /// Poles whose trace is the band energy, needed for `etot`.
        #[arg(long)]
        energy_poles: Option<PathBuf>,
        #[arg(long, value_parser = parse_cutoff, default_value = "exact")]
        cutoff: Cutoff,
        /// Comma-separated subset of `rho,n,etot`.
        #[arg(long, default_value = "rho,n")]
        quantities: String,
        #[arg(long)]
        track_dropped: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment and write its CSV table.
    Study(StudyArgs),
}

#[derive(Args)]
struct MeshArgs {
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long)]
    m: usize,
    /// Non-periodic mesh.
    #[arg(long)]
    open: bool,
}

impl MeshArgs {
    fn spec(&self) -> Result<MeshSpec> {
        Ok(MeshSpec::new(self.dim, self.m, !self.open)?)
    }
}

/// A Matrix Market file or the model Hamiltonian on a mesh.
#[derive(Args)]
struct Source {
    /// Matrix Market input.
    #[arg(long, conflicts_with_all = ["dim", "m", "open"])]
    input: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    open: bool,
    /// Shift applied to the matrix: A - zI.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    z: Option<C>,
}

impl Source {
    fn mesh(&self) -> Result<Option<MeshSpec>> {
        match (self.input.is_some(), self.m) {
            (true, _) => Ok(None),
            (false, Some(m)) => Ok(Some(MeshSpec::new(self.dim.unwrap_or(2), m, !self.open)?)),
            (false, None) => bail!("give either --input FILE or --m M [--dim D]"),
        }
    }

    fn load(&self) -> Result<SparseSymmetric> {
        let a = match (&self.input, self.mesh()?) {
            (Some(path), _) => read_matrix_market(BufReader::new(open(path)?))?,
            (None, Some(spec)) => toy_hamiltonian(&spec)?,
            (None, None) => unreachable!(),
        };
        Ok(match self.z {
            Some(z) => a.shift(z),
            None => a,
        })
    }

    /// Nested dissection: geometric for meshes, graph-based for files.
    fn dissection(&self, a: &SparseSymmetric) -> Result<Permutation> {
        Ok(match self.mesh()? {
            Some(spec) if spec.dim > 1 => nested_dissection_cartesian(&spec)?,
            Some(_) => Permutation::identity(a.n()),
            None => nested_dissection_general(a),
        })
    }
}

#[derive(Args)]
struct OrderArgs {
    /// Permutation file to apply before factorization.
    #[arg(long, conflicts_with = "nd")]
    perm: Option<PathBuf>,
    /// Apply nested dissection before factorization.
    #[arg(long)]
    nd: bool,
}

impl OrderArgs {
    /// The matrix in factorization order, with the ordering if any.
    fn apply(&self, source: &Source, a: SparseSymmetric) -> Result<(SparseSymmetric, Option<Permutation>)> {
        let p = match (&self.perm, self.nd) {
            (Some(path), _) => Some(read_permutation(BufReader::new(open(path)?))?),
            (None, true) => Some(source.dissection(&a)?),
            (None, false) => None,
        };
        Ok(match p {
            Some(p) => (permute(&a, &p)?, Some(p)),
            None => (a, None),
        })
    }
}

#[derive(Args)]
struct StudyArgs {
    /// localization, convergence, nscaling, cscaling, periodic1d or pexsi.
    kind: String,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 16)]
    m: usize,
    #[arg(long)]
    open: bool,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0.98")]
    z: C,
    /// Cutoffs as a list and/or inclusive ranges, e.g. `1..10` or `2,4,8`.
    #[arg(long, default_value = "1..10")]
    cutoff: String,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `natural` or `nd`; defaults to nd except on chains.
    #[arg(long)]
    order: Option<String>,
    /// Side lengths of the nscaling study.
    #[arg(long, default_value = "16,32,64")]
    sizes: String,
    /// Contour poles of the pexsi study.
    #[arg(long, default_value_t = 16)]
    poles: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_complex(s: &str) -> Result<C, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("'{t}': {e}"));
    match parts.as_slice() {
        [re] => Ok(C::new(num(re)?, 0.0)),
        [re, im] => Ok(C::new(num(re)?, num(im)?)),
        _ => Err(format!("expected RE or RE,IM, got '{s}'")),
    }
}

fn parse_cutoff(s: &str) -> Result<Cutoff, String> {
    if s.eq_ignore_ascii_case("exact") {
        return Ok(Cutoff::Exact);
    }
    s.parse::<u16>().map(Cutoff::Level).map_err(|_| format!("expected a level or 'exact', got '{s}'"))
}

fn parse_list(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let (lo, hi): (usize, usize) = (lo.parse()?, hi.parse()?);
            out.extend(lo..=hi);
        } else {
            out.push(part.parse()?);
        }
    }
    Ok(out)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).with_context(|| format!("cannot open {}", path.display()))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenMatrix { mesh, z, out } => {
            let h = toy_hamiltonian(&mesh.spec()?)?;
            let a: SparseSymmetric = match z {
                Some(z) => h.shift(z),
                None => h,
            };
            write_matrix_market(output(out.as_deref())?, &a)?;
        }
        Command::Order { source, out } => {
            let a = source.load()?;
            let p = match source.mesh()? {
                Some(spec) => nested_dissection_cartesian(&spec)?,
                None => nested_dissection_general(&a),
            };
            write_permutation(output(out.as_deref())?, &p)?;
        }
        Command::Symbolic { source, order, cutoff, out } => {
            let (a, _) = order.apply(&source, source.load()?)?;
            write_pattern_csv(output(out.as_deref())?, &symbolic_levels(&a, cutoff))?;
        }
        Command::Factorize { source, order, cutoff, tol, track_dropped, out } => {
            let (a, _) = order.apply(&source, source.load()?)?;
            let (f, e) = match tol {
                Some(tau) => ldlt_incomplete_tol(&a, tau, track_dropped)?,
                None => ldlt_incomplete(&a, &symbolic_levels(&a, cutoff), track_dropped)?,
            };
            write_factor_l(output(Some(&with_suffix(&out, ".L.mtx")))?, &f)?;
            write_factor_d(output(Some(&with_suffix(&out, ".D.mtx")))?, &f)?;
            let mut summary = json!({ "n": f.n(), "nnz_l": f.nnz_l(), "flops": f.flops() });
            if let Some(e) = e {
                write_matrix_market(output(Some(&with_suffix(&out, ".E.mtx")))?, &e.to_matrix())?;
                summary["dropped"] = json!(e.nonzeros().count());
                summary["dropped_max"] = json!(e.max_abs());
                summary["residual"] = json!(f.identity_residual(&a, Some(&e)));
            }
            println!("{summary}");
        }
        Command::Selinv { source, order, cutoff, track_dropped, audit, out } => {
            let (a, _) = order.apply(&source, source.load()?)?;
            let (f, _) = ldlt_incomplete(&a, &symbolic_levels(&a, cutoff), false)?;
            let (b, fd) = selinv_incomplete(&f, track_dropped);
            write_matrix_market(output(Some(&with_suffix(&out, ".B.mtx")))?, &b.to_matrix())?;
            let mut summary = json!({ "n": b.n(), "entries": b.pattern().nnz() + b.n(), "flops": b.flops() });
            if let Some(fd) = fd {
                write_matrix_market(output(Some(&with_suffix(&out, ".F.mtx")))?, &fd.to_matrix())?;
                summary["dropped_max"] = json!(fd.max_abs());
            }
            if audit {
                let r = closedness_audit(&f);
                summary["audit"] = json!({
                    "reads": r.reads,
                    "absent_reads": r.absent_reads,
                    "columns_with_absent_reads": r.columns_with_absent_reads.len(),
                    "closed": r.is_closed(),
                });
            }
            println!("{summary}");
        }
        Command::Green { intervals, z } => {
            let v: Vec<f64> = intervals
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .context("intervals must be numbers")?;
            let set = match v.as_slice() {
                [a, b] => SpectralSet::new(vec![(*a, *b)])?,
                [a, b, c, d] => SpectralSet::new(vec![(*a, *b), (*c, *d)])?,
                _ => bail!("--intervals takes a,b or a,b,c,d"),
            };
            println!("{:.16e}", set.green(z)?);
        }
        Command::Pexsi { source, order, poles, energy_poles, cutoff, quantities, track_dropped, out } => {
            let wanted: Vec<&str> = quantities.split(',').map(str::trim).filter(|q| !q.is_empty()).collect();
            if let Some(q) = wanted.iter().find(|q| !matches!(**q, "rho" | "n" | "etot")) {
                bail!("unknown quantity '{q}' (expected rho, n or etot)");
            }
            if wanted.contains(&"etot") && energy_poles.is_none() {
                bail!("etot needs --energy-poles");
            }
            let h = source.load()?;
            let p = match (&order.perm, order.nd) {
                (Some(path), _) => Some(read_permutation(BufReader::new(open(path)?))?),
                (None, true) => Some(source.dissection(&h)?),
                (None, false) => None,
            };
            let poles = read_poles_csv(BufReader::new(open(&poles)?))?;
            let eps = energy_poles.map(|path| -> Result<_> { Ok(read_poles_csv(BufReader::new(open(&path)?))?) });
            let eps = eps.transpose()?;
            let opts = PexsiOptions { cutoff, order: p.as_ref(), energy_poles: eps.as_ref(), track_dropped };
            let r = pexsi_evaluate(&h, &poles, &opts)?;
            let rep = &r.report;
            let mut report = json!({ "cutoff": cutoff.to_string(), "max_imag": rep.max_imag, "poles": rep.poles });
            if wanted.contains(&"rho") {
                report["rho"] = json!(rep.rho);
            }
            if wanted.contains(&"n") {
                report["electrons"] = json!(rep.electrons);
            }
            if wanted.contains(&"etot") {
                report["energy"] = json!(rep.energy);
            }
            let mut w = output(out.as_deref())?;
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)?;
        }
        Command::Study(args) => {
            let kind: StudyKind = args.kind.parse()?;
            let mesh = MeshSpec::new(args.dim, args.m, !args.open)?;
            let mut cfg = StudyConfig::new(kind, mesh);
            cfg.z = args.z;
            cfg.cutoffs = parse_list(&args.cutoff)?
                .into_iter()
                .map(|c| u16::try_from(c).context("cutoff too large"))
                .collect::<Result<_>>()?;
            cfg.reps = args.reps;
            cfg.seed = args.seed;
            if let Some(o) = &args.order {
                cfg.order = o.parse::<OrderKind>()?;
            }
            cfg.sizes = parse_list(&args.sizes)?;
            cfg.poles = args.poles;
            cfg.out = args.out.clone();
            let table = run_study(&cfg)?;
            table.write_csv(output(args.out.as_deref())?)?;
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
