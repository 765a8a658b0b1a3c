use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use flma::analysis::report::{self, KernelPoint};
use flma::analysis::{self, AddPlan, Sampling};
use flma::config::Overrides;
use flma::linalg::{self, BenchArith, BenchSpec};
use flma::oracle::{BigFloat, Context};
use flma::shiftadd::{ExpParams, LogParams};
use flma::{vecfile, DualBase, Error, Flma, FlmaConfig, Preset, Result};

#[derive(Parser)]
#[command(name = "flma", version, about = "Dual-base log-linear arithmetic: kernel sweeps, accuracy studies, QR benchmark")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Base configuration.
    #[arg(long, default_value = "log32")]
    preset: Preset,
    /// Extra p(.) bits; a comma list for add-sweep and cancel-study.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<u32>,
    /// Extra q(.) bits; a comma list for add-sweep.
    #[arg(long, value_delimiter = ',')]
    beta: Vec<u32>,
    /// Accumulator fraction bits.
    #[arg(long = "A")]
    acc_bits: Option<u32>,
    /// Base-2 exponent bits.
    #[arg(long = "E")]
    e_bits: Option<u32>,
    /// Base-e fraction bits.
    #[arg(long = "F")]
    f_bits: Option<u32>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV (or vector file) destination.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Reproduction-scale sampling.
    #[arg(long)]
    full: bool,
}

#[derive(Args, Clone)]
struct KernelArgs {
    /// Terminal iteration index (comma list).
    #[arg(long = "I", value_delimiter = ',')]
    iterations: Vec<u32>,
    /// Residual fraction bits (comma list).
    #[arg(long, value_delimiter = ',')]
    ell: Vec<u32>,
    /// Product fraction bits (comma list); defaults to ell.
    #[arg(long, value_delimiter = ',')]
    p: Vec<u32>,
    /// Dropped operand LSBs (comma list).
    #[arg(long, value_delimiter = ',')]
    r: Vec<u32>,
    #[arg(long)]
    x_bits: Option<u32>,
    #[arg(long)]
    y_bits: Option<u32>,
    /// Random inputs instead of an exhaustive sweep.
    #[arg(long)]
    samples: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ulp statistics of the e^x kernel.
    ExpSweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        k: KernelArgs,
    },
    /// Ulp statistics of the ln x kernel.
    LogSweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        k: KernelArgs,
        /// Divisor fraction bits (comma list).
        #[arg(long, value_delimiter = ',')]
        s: Vec<u32>,
    },
    /// Log-ulp accuracy of addition over an (alpha, beta) grid.
    AddSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4096)]
        x_points: u64,
        #[arg(long, default_value_t = 64)]
        y_count: u32,
    },
    /// Error of 1 - y for y just below one, per alpha (beta = 1).
    CancelStudy {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1024)]
        k_max: u32,
    },
    /// Least-squares QR error across condition numbers and arithmetics.
    QrBench {
        #[command(flatten)]
        common: Common,
        /// Dimension; --full switches the default to 64.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 5)]
        trials: u32,
        #[arg(long, value_delimiter = ',', default_value = "1,1e2,1e4,1e6,1e8,1e10")]
        kappa: Vec<f64>,
        /// Subset of flma, sf32, sf64, oracle.
        #[arg(long, value_delimiter = ',')]
        arith: Vec<String>,
    },
    /// Fused inner product of random or file-supplied vectors vs the oracle.
    Dot {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[arg(long, requires = "y")]
        x: Option<PathBuf>,
        #[arg(long, requires = "x")]
        y: Option<PathBuf>,
    },
    /// Nearest dual-base value of each decimal argument.
    Encode {
        #[command(flatten)]
        common: Common,
        #[arg(required = true, allow_hyphen_values = true)]
        values: Vec<String>,
    },
    /// Value of bit patterns (0x...) or of every element of a vector file.
    Decode {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        file: Option<PathBuf>,
        bits: Vec<String>,
    },
}

impl Common {
    fn single(v: &[u32], name: &str) -> Result<Option<u32>> {
        match v {
            [] => Ok(None),
            [x] => Ok(Some(*x)),
            _ => Err(Error::InvalidConfig(format!("--{name} takes a single value for this command"))),
        }
    }

    fn overrides(&self, alpha: Option<u32>, beta: Option<u32>) -> Overrides {
        Overrides { e_bits: self.e_bits, f_bits: self.f_bits, alpha, beta, acc_bits: self.acc_bits }
    }

    fn config(&self) -> Result<FlmaConfig> {
        let o = self.overrides(Self::single(&self.alpha, "alpha")?, Self::single(&self.beta, "beta")?);
        FlmaConfig::with_overrides(self.preset, &o)
    }

    fn meta(&self, command: &str, cfg: &FlmaConfig) -> Vec<(String, String)> {
        let mut m = vec![
            ("command".to_string(), command.to_string()),
            ("preset".into(), self.preset.name().into()),
            ("seed".into(), self.seed.to_string()),
        ];
        m.extend(cfg.describe());
        m
    }

    fn write_csv(
        &self,
        meta: &[(String, String)],
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<()> {
        if let Some(path) = &self.out {
            report::write_csv(BufWriter::new(File::create(path)?), meta, header, rows)?;
        }
        Ok(())
    }
}

fn list_or(v: &[u32], default: u32) -> Vec<u32> {
    if v.is_empty() {
        vec![default]
    } else {
        v.to_vec()
    }
}

fn sampling(k: &KernelArgs, x_bits: u32, seed: u64) -> Sampling {
    match k.samples {
        Some(count) => Sampling::Sampled { count, seed },
        None if x_bits > analysis::kernel::MAX_EXHAUSTIVE_BITS => Sampling::Sampled { count: 1 << 16, seed },
        None => Sampling::Exhaustive,
    }
}

fn sampling_meta(s: Sampling) -> (String, String) {
    let v = match s {
        Sampling::Exhaustive => "exhaustive".to_string(),
        Sampling::Sampled { count, seed } => format!("{count} uniform codes, ChaCha8 seed {seed}"),
    };
    ("sampling".into(), v)
}

fn kernel_summary(kind: &str, k: &KernelPoint, st: &analysis::UlpStats) -> String {
    let s = k.s.map_or_else(String::new, |s| format!(" s={s}"));
    format!(
        "{kind} I={} ell={} p={} r={}{s} x={} y={}: n={} max {:.3} ulp (true {:.3}), (0.5,1] {:.2}%, >1 {}, {}",
        k.iterations,
        k.ell,
        k.p,
        k.r,
        k.x_bits,
        k.y_bits,
        st.total,
        st.max_ulp(),
        st.max_true_error,
        100.0 * st.fraction(1),
        st.bands[2] + st.bands[3],
        if st.monotone() { "monotone".to_string() } else { format!("{} monotonicity violations", st.monotonicity_violations) }
    )
}

fn exp_sweep(c: &Common, k: &KernelArgs) -> Result<()> {
    let cfg = c.config()?;
    let x_bits = k.x_bits.unwrap_or(cfg.f_bits);
    let y_bits = k.y_bits.unwrap_or(cfg.f_bits);
    let mut points = Vec::new();
    for &i in &list_or(&k.iterations, cfg.exp.iterations) {
        for &ell in &list_or(&k.ell, cfg.exp.ell) {
            for &p in &list_or(&k.p, ell) {
                for &r in &list_or(&k.r, cfg.exp.r) {
                    points.push(ExpParams::new(x_bits, y_bits, i, ell, p, r)?);
                }
            }
        }
    }
    let smp = sampling(k, x_bits, c.seed);
    let results = analysis::sweep_exp_grid(&points, smp)?;
    let mut rows = Vec::new();
    for (p, st) in &results {
        let kp = KernelPoint::from(p);
        println!("{}", kernel_summary("exp", &kp, st));
        rows.push(report::kernel_row(&kp, st));
    }
    let mut meta = c.meta("exp-sweep", &cfg);
    meta.push(sampling_meta(smp));
    c.write_csv(&meta, &report::KERNEL_COLUMNS, rows)
}

fn log_sweep(c: &Common, k: &KernelArgs, s: &[u32]) -> Result<()> {
    let cfg = c.config()?;
    let x_bits = k.x_bits.unwrap_or(cfg.f_bits);
    let y_bits = k.y_bits.unwrap_or(cfg.f_bits);
    let mut points = Vec::new();
    for &i in &list_or(&k.iterations, cfg.log.iterations) {
        for &ell in &list_or(&k.ell, cfg.log.ell) {
            for &p in &list_or(&k.p, ell) {
                for &r in &list_or(&k.r, cfg.log.r) {
                    for &s in &list_or(s, cfg.log.s) {
                        points.push(LogParams::new(x_bits, y_bits, i, ell, p, r, s)?);
                    }
                }
            }
        }
    }
    let smp = sampling(k, x_bits, c.seed);
    let results = analysis::sweep_log_grid(&points, smp)?;
    let mut rows = Vec::new();
    for (p, st) in &results {
        let kp = KernelPoint::from(p);
        println!("{}", kernel_summary("log", &kp, st));
        rows.push(report::kernel_row(&kp, st));
    }
    let mut meta = c.meta("log-sweep", &cfg);
    meta.push(sampling_meta(smp));
    c.write_csv(&meta, &report::KERNEL_COLUMNS, rows)
}

fn add_sweep(c: &Common, x_points: u64, y_count: u32) -> Result<()> {
    let alphas = if c.alpha.is_empty() { vec![1, 2] } else { c.alpha.clone() };
    let betas = if c.beta.is_empty() { vec![1, 2] } else { c.beta.clone() };
    let mut flmas = Vec::new();
    for &a in &alphas {
        for &b in &betas {
            flmas.push(Flma::new(FlmaConfig::with_overrides(c.preset, &c.overrides(Some(a), Some(b)))?)?);
        }
    }
    let plan = AddPlan { x_points: (!c.full).then_some(x_points), y_count, seed: c.seed };
    let stats = analysis::sweep_flma_add(&flmas, &plan)?;
    for st in &stats {
        println!(
            "add alpha={} beta={}: n={} max {} log ulp, incorrectly rounded {:.5}%",
            st.alpha,
            st.beta,
            st.samples,
            st.max_logulp,
            100.0 * st.frac_incorrect()
        );
    }
    let mut meta = c.meta("add-sweep", flmas[0].config());
    meta.push(("alpha_grid".into(), format!("{alphas:?}")));
    meta.push(("beta_grid".into(), format!("{betas:?}")));
    meta.push((
        "x_sampling".into(),
        match plan.x_points {
            Some(n) => format!("{n} evenly spaced fraction codes in [1,2)"),
            None => "every fraction code in [1,2)".into(),
        },
    ));
    meta.push(("y_sampling".into(), format!("{y_count} uniform F-bit codes in [1,2), ChaCha8 seed {}", c.seed)));
    c.write_csv(&meta, &report::ADD_COLUMNS, stats.iter().map(report::add_row))
}

fn cancel(c: &Common, k_max: u32) -> Result<()> {
    if c.beta.iter().any(|&b| b != 1) {
        return Err(Error::InvalidConfig("cancel-study holds beta = 1".into()));
    }
    if c.e_bits.is_some() || c.f_bits.is_some() || c.acc_bits.is_some() {
        return Err(Error::InvalidConfig("cancel-study uses the preset's E, F and A = F + alpha".into()));
    }
    let alphas = if c.alpha.is_empty() { (1..=16).collect() } else { c.alpha.clone() };
    let rows = analysis::cancel_study(c.preset, &alphas, k_max)?;
    for r in &rows {
        println!(
            "cancel alpha={} k=1..{}: max {} log ulp, max abs error {:.4e} (k={})",
            r.alpha,
            r.k_hi,
            if r.max_logulp == u128::MAX { "inf".into() } else { r.max_logulp.to_string() },
            r.max_abs_err,
            r.worst_k
        );
    }
    let mut meta = c.meta("cancel-study", &c.preset.config());
    meta.push(("subtrahends".into(), format!("2^-1 e^((ln2_F - k) / 2^F), k = 1..={k_max}")));
    c.write_csv(&meta, &report::CANCEL_COLUMNS, rows.iter().map(report::cancel_row))
}

fn qr_bench(c: &Common, n: Option<usize>, trials: u32, kappas: &[f64], arith: &[String]) -> Result<()> {
    let cfg = c.config()?;
    let n = n.unwrap_or(if c.full { 64 } else { 16 });
    let ariths: Vec<BenchArith> = if arith.is_empty() {
        BenchArith::ALL.to_vec()
    } else {
        arith
            .iter()
            .map(|s| {
                BenchArith::ALL
                    .into_iter()
                    .find(|a| a.name() == s)
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown arithmetic `{s}`")))
            })
            .collect::<Result<_>>()?
    };
    for &k in kappas {
        if !(k >= 1.0 && k.is_finite()) {
            return Err(Error::InvalidConfig(format!("kappa {k} must be finite and >= 1")));
        }
    }
    if n < 2 {
        return Err(Error::InvalidConfig(format!("n={n} must be at least 2")));
    }
    let spec = BenchSpec { n, kappas, trials, seed: c.seed, ariths: &ariths };
    let rows = linalg::run_bench(&Flma::new(cfg)?, &spec)?;
    let summary = linalg::summarize(&rows);
    for s in &summary {
        let med: Vec<String> = s.medians.iter().map(|(k, m)| format!("{k:e}:{m:.3e}")).collect();
        let rho = s.spearman.map_or_else(|| "n/a".into(), |r| format!("{r:.3}"));
        println!("qr {} n={n}: median error {} spearman {rho}", s.arithmetic, med.join(" "));
    }
    let mut meta = c.meta("qr-bench", &cfg);
    meta.push(("n".into(), n.to_string()));
    meta.push(("trials".into(), trials.to_string()));
    meta.push(("matrix".into(), "symmetric U(-2,2), upper triangle sampled and mirrored; b ~ U(0,1)".into()));
    meta.push(("generator".into(), "ChaCha8 seeded by seed, stream = trial".into()));
    c.write_csv(&meta, &report::QR_COLUMNS, rows.iter().map(report::qr_row))
}

fn dot(c: &Common, n: usize, x: Option<&PathBuf>, y: Option<&PathBuf>) -> Result<()> {
    let cfg = c.config()?;
    let flma = Flma::new(cfg)?;
    let (xs, ys) = match (x, y) {
        (Some(px), Some(py)) => {
            let xs = vecfile::read(BufReader::new(File::open(px)?), &cfg)?;
            let ys = vecfile::read(BufReader::new(File::open(py)?), &cfg)?;
            (xs, ys)
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
            let mut draw = || flma.encode_f64(rng.random_range(-1.0..1.0));
            let xs = (0..n).map(|_| draw()).collect::<Result<Vec<_>>>()?;
            let ys = (0..n).map(|_| draw()).collect::<Result<Vec<_>>>()?;
            (xs, ys)
        }
    };
    if xs.len() != ys.len() {
        return Err(Error::Domain(format!("vector lengths {} and {} differ", xs.len(), ys.len())));
    }
    let r = flma.inner_product(&xs, &ys)?;
    let ctx = Context::new(256);
    let dec = |v: &[DualBase]| v.iter().map(|e| flma.decode(e, 256)).collect::<Result<Vec<BigFloat>>>();
    let exact = ctx.dot(&dec(&xs)?, &dec(&ys)?);
    let value = flma.decode(&r, 256)?;
    let rel = if exact.is_zero() { f64::NAN } else { ctx.div(&ctx.sub(&value, &exact), &exact)?.abs().to_f64() };
    println!(
        "dot n={}: {} = {:.9e}, oracle {:.9e}, relative error {:.3e}",
        xs.len(),
        r.display(&cfg),
        value.to_f64(),
        exact.to_f64(),
        rel
    );
    Ok(())
}

fn encode(c: &Common, values: &[String]) -> Result<()> {
    let cfg = c.config()?;
    let mut out = Vec::new();
    for s in values {
        let v: f64 = s.trim().parse().map_err(|_| Error::Domain(format!("`{s}` is not a number")))?;
        let d = DualBase::encode_f64(v, &cfg)?;
        println!("{}", d.display(&cfg));
        out.push(d);
    }
    if let Some(path) = &c.out {
        vecfile::write(BufWriter::new(File::create(path)?), &out, &cfg)?;
    }
    Ok(())
}

fn decode(c: &Common, file: Option<&PathBuf>, bits: &[String]) -> Result<()> {
    let cfg = c.config()?;
    let mut vals = Vec::new();
    if let Some(p) = file {
        vals.extend(vecfile::read(BufReader::new(File::open(p)?), &cfg)?);
    }
    for b in bits {
        let t = b.trim().trim_start_matches("0x");
        let raw = u128::from_str_radix(t, 16).map_err(|_| Error::InvalidEncoding(format!("`{b}` is not hex")))?;
        vals.push(DualBase::from_bits(raw, &cfg)?);
    }
    if vals.is_empty() {
        return Err(Error::Domain("nothing to decode: give bit patterns or --file".into()));
    }
    for v in &vals {
        println!("{} {:#x} = {:e}", v.display(&cfg), v.to_bits(&cfg), v.to_f64(&cfg));
    }
    Ok(())
}

fn run(cmd: &Cmd) -> Result<()> {
    match cmd {
        Cmd::ExpSweep { common, k } => exp_sweep(common, k),
        Cmd::LogSweep { common, k, s } => log_sweep(common, k, s),
        Cmd::AddSweep { common, x_points, y_count } => add_sweep(common, *x_points, *y_count),
        Cmd::CancelStudy { common, k_max } => cancel(common, *k_max),
        Cmd::QrBench { common, n, trials, kappa, arith } => qr_bench(common, *n, *trials, kappa, arith),
        Cmd::Dot { common, n, x, y } => dot(common, *n, x.as_ref(), y.as_ref()),
        Cmd::Encode { common, values } => encode(common, values),
        Cmd::Decode { common, file, bits } => decode(common, file.as_ref(), bits),
    }
}

fn common(cmd: &Cmd) -> &Common {
    match cmd {
        Cmd::ExpSweep { common, .. }
        | Cmd::LogSweep { common, .. }
        | Cmd::AddSweep { common, .. }
        | Cmd::CancelStudy { common, .. }
        | Cmd::QrBench { common, .. }
        | Cmd::Dot { common, .. }
        | Cmd::Encode { common, .. }
        | Cmd::Decode { common, .. } => common,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = common(&cli.cmd).jobs;
    let result = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("--jobs {j}: {e}")))
            .and_then(|pool| pool.install(|| run(&cli.cmd))),
        None => run(&cli.cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("flma: {e}");
            ExitCode::FAILURE
        }
    }
}
