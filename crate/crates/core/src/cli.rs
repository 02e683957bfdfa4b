//! Command-line front end. Every subcommand writes CSV (default) or JSON to
//! `--out` or standard output.
//!
//! | subcommand      | CSV header |
//! |-----------------|------------|
//! | `p2p`           | `capacity` |
//! | `mac-region`    | `c1,c2,bound` |
//! | `bc-sweep`      | `i0,r1,r2` |
//! | `bc-outer`      | `mu,value,i0` |
//! | `gauss-compare` | `quantity,model,gaussian,difference` |
//! | `cutset`        | `cut_id,member_list,expected_rank` (plus `,stderr` with `--mc`) |
//! | `net-sim`       | `rate,n,B,trials,errors,error_rate,effective_rate` |
//! | `bc-sim`        | `i0,block_len,trials,payload_bits,r1_achieved,r2_achieved,failure_rate,r2_target` |

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::channels::{BcChannel, MacChannel, P2pChannel};
use crate::codingsim::{
    bc_payload_failure_rate, bc_superposition_sim, simulate_random_coding, Scheme, SimConfig,
};
use crate::error::{invalid, Result};
use crate::fading::{pmf_from_snr, FadingPmf, SnrDistribution};
use crate::network::{cutset_bound_exact, cutset_bound_mc, parse_network, NetworkSpec};
use crate::regions::{
    bc_inner_sweep, bc_outer_value, gaussian_mac_region, gaussian_p2p_rate, mac_region, region_gap,
    RateRegion,
};

/// Exit code for inputs rejected by a model routine.
pub const EXIT_DOMAIN_ERROR: i32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandResult {
    pub exit_code: i32,
    pub artifact_paths: Vec<PathBuf>,
}

#[derive(Parser, Debug)]
#[command(
    name = "qdnet",
    version,
    about = "Bit-level fading channel and network calculator"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (standard output if omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo sample count.
    #[arg(long, global = true, default_value_t = 100_000)]
    samples: u64,
    /// Worker threads (all cores if omitted).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Point-to-point capacity E[M].
    P2p {
        #[arg(long)]
        pmf: FadingPmf,
    },
    /// MAC capacity region constraints.
    MacRegion {
        #[arg(long)]
        pmf1: FadingPmf,
        #[arg(long)]
        pmf2: FadingPmf,
    },
    /// Superposition operating points for every split i0.
    BcSweep(BcArgs),
    /// Weighted-sum outer value max R1 + mu R2.
    BcOuter {
        #[command(flatten)]
        bc: BcArgs,
        /// Comma-separated weights.
        #[arg(long, value_delimiter = ',', required = true)]
        mu: Vec<f64>,
    },
    /// Compare the bit-level model with the Gaussian reference.
    GaussCompare {
        /// SNR law "snr:prob,..." of user 1 (or the only link).
        #[arg(long)]
        snr1: SnrDistribution,
        /// SNR law of user 2; compares MAC regions when given.
        #[arg(long)]
        snr2: Option<SnrDistribution>,
        /// Extra simplex directions for the region gap.
        #[arg(long, default_value_t = 256)]
        directions: usize,
    },
    /// Cut-set bound of a network file.
    Cutset {
        #[arg(long)]
        net: PathBuf,
        /// Exact enumeration of fading states (the default).
        #[arg(long, conflicts_with = "mc")]
        exact: bool,
        /// Monte Carlo estimate with --samples draws.
        #[arg(long)]
        mc: bool,
    },
    /// Block random-coding simulation on a network file.
    NetSim {
        #[arg(long)]
        net: PathBuf,
        /// Comma-separated rates in bits per timestep.
        #[arg(long, value_delimiter = ',', required = true)]
        rate: Vec<f64>,
        /// Comma-separated block lengths n.
        #[arg(long, value_delimiter = ',', required = true)]
        block_len: Vec<usize>,
        /// Message blocks B.
        #[arg(long, default_value_t = 8)]
        blocks: usize,
        /// Drain blocks L (longest source-sink path if omitted).
        #[arg(long)]
        slack: Option<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value = "linear")]
        scheme: Scheme,
    },
    /// Erasure-coded superposition on the broadcast channel.
    BcSim {
        #[command(flatten)]
        bc: BcArgs,
        #[arg(long)]
        i0: usize,
        #[arg(long, default_value_t = 2048)]
        block_len: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Test one payload rate instead of sweeping.
        #[arg(long)]
        payload_rate: Option<f64>,
    },
}

#[derive(Args, Debug)]
struct BcArgs {
    /// Input bit levels.
    #[arg(long)]
    n: usize,
    /// Fixed level of receiver 1.
    #[arg(long)]
    m1: usize,
    /// Fading law of receiver 2.
    #[arg(long)]
    pmf2: FadingPmf,
}

impl BcArgs {
    fn channel(&self) -> Result<BcChannel> {
        BcChannel::new(self.n, self.m1, self.pmf2.clone())
    }
}

struct Table {
    header: &'static str,
    rows: Vec<String>,
}

impl Table {
    fn new(header: &'static str) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, fields: &[&dyn std::fmt::Display]) {
        let mut row = String::new();
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                row.push(',');
            }
            write!(row, "{f}").unwrap();
        }
        self.rows.push(row);
    }

    fn render(&self) -> String {
        let mut s = String::with_capacity(64 * (self.rows.len() + 1));
        s.push_str(self.header);
        s.push('\n');
        for r in &self.rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }
}

struct Output {
    table: Table,
    json: serde_json::Value,
}

fn to_json<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("plain data serializes")
}

fn region_table(table: &mut Table, r: &RateRegion) {
    for c in r.constraints() {
        table.push(&[&c.coeffs[0], &c.coeffs[1], &c.bound]);
    }
}

fn load_network(path: &PathBuf) -> Result<NetworkSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_network(&text)
}

fn execute(cmd: &Command, common: &Common) -> Result<Output> {
    match cmd {
        Command::P2p { pmf } => {
            let ch = P2pChannel::new(pmf.max_level(), pmf.clone())?;
            let mut table = Table::new("capacity");
            table.push(&[&ch.capacity()]);
            Ok(Output {
                table,
                json: json!({ "pmf": pmf, "capacity": ch.capacity() }),
            })
        }
        Command::MacRegion { pmf1, pmf2 } => {
            let region = mac_region(&MacChannel::from_pmfs(pmf1.clone(), pmf2.clone()));
            let mut table = Table::new("c1,c2,bound");
            region_table(&mut table, &region);
            Ok(Output {
                table,
                json: to_json(&region),
            })
        }
        Command::BcSweep(bc) => {
            let sweep = bc_inner_sweep(&bc.channel()?);
            let mut table = Table::new("i0,r1,r2");
            for p in &sweep {
                table.push(&[&p.i0, &p.r1, &p.r2]);
            }
            Ok(Output {
                table,
                json: to_json(&sweep),
            })
        }
        Command::BcOuter { bc, mu } => {
            let ch = bc.channel()?;
            let values = mu
                .iter()
                .map(|&m| bc_outer_value(&ch, m))
                .collect::<Result<Vec<_>>>()?;
            let mut table = Table::new("mu,value,i0");
            for v in &values {
                table.push(&[&v.mu, &v.value, &v.i0]);
            }
            Ok(Output {
                table,
                json: to_json(&values),
            })
        }
        Command::GaussCompare {
            snr1,
            snr2,
            directions,
        } => {
            let mut table = Table::new("quantity,model,gaussian,difference");
            let json = match snr2 {
                None => {
                    let model = pmf_from_snr(snr1).expectation();
                    let gauss = gaussian_p2p_rate(snr1);
                    table.push(&[&"p2p", &model, &gauss, &(model - gauss)]);
                    json!({ "model": model, "gaussian": gauss, "difference": model - gauss })
                }
                Some(snr2) => {
                    let model = mac_region(&MacChannel::from_pmfs(
                        pmf_from_snr(snr1),
                        pmf_from_snr(snr2),
                    ));
                    let gauss = gaussian_mac_region(snr1, snr2);
                    for (name, (m, g)) in ["r1", "r2", "sum"]
                        .iter()
                        .zip(model.constraints().iter().zip(gauss.constraints()))
                    {
                        table.push(&[name, &m.bound, &g.bound, &(m.bound - g.bound)]);
                    }
                    let gap = region_gap(&model, &gauss, *directions)?;
                    table.push(&[&"region_gap", &"", &"", &gap]);
                    json!({ "model": model, "gaussian": gauss, "region_gap": gap })
                }
            };
            Ok(Output { table, json })
        }
        Command::Cutset { net, mc, .. } => {
            let network = load_network(net)?;
            if *mc {
                let est = cutset_bound_mc(&network, common.samples, common.seed)?;
                let mut table = Table::new("cut_id,member_list,expected_rank,stderr");
                for c in &est.per_cut {
                    table.push(&[&c.cut.id, &c.label, &c.mean, &c.stderr]);
                }
                table.push(&[
                    &"min",
                    &network.cut_label(&est.argmin),
                    &est.estimate,
                    &est.stderr,
                ]);
                Ok(Output {
                    table,
                    json: to_json(&est),
                })
            } else {
                let bound = cutset_bound_exact(&network)?;
                let mut table = Table::new("cut_id,member_list,expected_rank");
                for c in &bound.per_cut {
                    table.push(&[&c.cut.id, &c.label, &c.expected_rank]);
                }
                table.push(&[&"min", &network.cut_label(&bound.argmin), &bound.value]);
                Ok(Output {
                    table,
                    json: to_json(&bound),
                })
            }
        }
        Command::NetSim {
            net,
            rate,
            block_len,
            blocks,
            slack,
            trials,
            scheme,
        } => {
            let network = load_network(net)?;
            let mut table = Table::new("rate,n,B,trials,errors,error_rate,effective_rate");
            let mut reports = Vec::new();
            for &r in rate {
                for &n in block_len {
                    let mut cfg = SimConfig::new(&network, r, n, *blocks, *trials);
                    cfg.seed = common.seed;
                    cfg.scheme = *scheme;
                    if let Some(l) = slack {
                        cfg.slack = *l;
                    }
                    let rep = simulate_random_coding(&network, &cfg)?;
                    table.push(&[
                        &rep.rate,
                        &rep.block_len,
                        &rep.blocks,
                        &rep.trials,
                        &rep.decode_errors,
                        &rep.error_rate,
                        &rep.effective_rate,
                    ]);
                    reports.push(rep);
                }
            }
            Ok(Output {
                table,
                json: to_json(&reports),
            })
        }
        Command::BcSim {
            bc,
            i0,
            block_len,
            trials,
            payload_rate,
        } => {
            let ch = bc.channel()?;
            let mut table = Table::new(
                "i0,block_len,trials,payload_bits,r1_achieved,r2_achieved,failure_rate,r2_target",
            );
            let json = match payload_rate {
                Some(rate) => {
                    if !rate.is_finite() || *rate < 0.0 {
                        return Err(invalid("payload rate must be finite and >= 0"));
                    }
                    let k = (rate * *block_len as f64).floor() as usize;
                    let fail =
                        bc_payload_failure_rate(&ch, *i0, *block_len, k, *trials, common.seed)?;
                    let target = bc_inner_sweep(&ch)[*i0].r2;
                    let r2 = k as f64 / *block_len as f64;
                    let r1 = (ch.m1() - i0) as f64;
                    table.push(&[i0, block_len, trials, &k, &r1, &r2, &fail, &target]);
                    json!({
                        "i0": i0, "block_len": block_len, "trials": trials, "payload_bits": k,
                        "r1_achieved": r1, "r2_achieved": r2, "failure_rate": fail, "r2_target": target,
                    })
                }
                None => {
                    let rep = bc_superposition_sim(&ch, *i0, *block_len, *trials, common.seed)?;
                    table.push(&[
                        &rep.i0,
                        &rep.block_len,
                        &rep.trials,
                        &rep.payload_bits,
                        &rep.r1_achieved,
                        &rep.r2_achieved,
                        &rep.failure_rate,
                        &rep.r2_target,
                    ]);
                    to_json(&rep)
                }
            };
            Ok(Output { table, json })
        }
    }
}

fn emit(out: &Output, common: &Common) -> Result<Vec<PathBuf>> {
    let text = match common.format {
        Format::Csv => out.table.render(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.json).expect("json value serializes");
            s.push('\n');
            s
        }
    };
    match &common.out {
        Some(path) => {
            std::fs::write(path, text)
                .map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?;
            Ok(vec![path.clone()])
        }
        None => {
            print!("{text}");
            Ok(Vec::new())
        }
    }
}

fn run_parsed(cli: &Cli) -> Result<Vec<PathBuf>> {
    let work = || execute(&cli.command, &cli.common).and_then(|o| emit(&o, &cli.common));
    match cli.common.workers {
        Some(0) => Err(invalid("--workers must be at least 1")),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| invalid(format!("cannot start {w} workers: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return CommandResult {
                exit_code: e.exit_code(),
                artifact_paths: Vec::new(),
            };
        }
    };
    match run_parsed(&cli) {
        Ok(artifact_paths) => CommandResult {
            exit_code: 0,
            artifact_paths,
        },
        Err(e) => {
            eprintln!("error: {e}");
            CommandResult {
                exit_code: EXIT_DOMAIN_ERROR,
                artifact_paths: Vec::new(),
            }
        }
    }
}
