use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use crskl::games::{
    trial_rng, AbeCr2SklScheme, AbeCrSklScheme, AdversaryKind, GameKind, GameReport, KlaInstance, KlaScheme,
    PkeCrSklScheme, RunOptions, Scenario, SchemeKind, SkeCrSklScheme, SkfeCrSklScheme, StrawmanScheme,
};
use crskl::{cr2, feskl, pkecrskl, skecrskl, Bits, Error};

/// Exit status when a threshold fails.
const EXIT_FAIL: u8 = 1;
/// Exit status for invalid configurations.
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "crskl", version, about = "Collusion-resistant secure key leasing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Correctness run: decrypt, re-decrypt, test and verify honest keys.
    Demo(Common),
    /// Run a security experiment.
    Game {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_game, default_value = "ot-ind-kla")]
        game: GameKind,
        #[arg(long, value_parser = parse_adversary)]
        adversary: Option<AdversaryKind>,
    },
    /// Print one freshly issued key as state JSON.
    DumpKey(Common),
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, value_parser = parse_scheme, default_value = "skecrskl")]
    scheme: SchemeKind,
    #[arg(long, default_value_t = 128)]
    lambda: usize,
    /// Hadamard positions h.
    #[arg(long, default_value_t = 8)]
    hadamard: usize,
    /// Keys per trial (q).
    #[arg(long, default_value_t = 2)]
    keys: usize,
    /// Quantum positions n of the inner SKE-CD ciphertext; the certificate
    /// scheme derives its slot count from it.
    #[arg(long, default_value_t = 16)]
    slots: usize,
    #[arg(long, default_value_t = 4)]
    attr_bits: usize,
    /// Verification attempts per key for the measure-and-copy attacker.
    #[arg(long, default_value_t = 8)]
    retries: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json_out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_named<T: Copy>(s: &str, all: &[T], id: fn(&T) -> &'static str) -> Result<T, String> {
    all.iter().copied().find(|v| id(v) == s).ok_or_else(|| {
        let names: Vec<&str> = all.iter().map(id).collect();
        format!("expected one of: {}", names.join(", "))
    })
}

fn parse_scheme(s: &str) -> Result<SchemeKind, String> {
    parse_named(s, SchemeKind::ALL, SchemeKind::id)
}

fn parse_game(s: &str) -> Result<GameKind, String> {
    parse_named(s, GameKind::ALL, GameKind::id)
}

fn parse_adversary(s: &str) -> Result<AdversaryKind, String> {
    parse_named(s, AdversaryKind::ALL, AdversaryKind::id)
}

impl Common {
    fn scenario(&self, game: GameKind, adversary: Option<AdversaryKind>) -> Scenario {
        Scenario {
            scheme: self.scheme,
            game,
            adversary,
            lambda: self.lambda,
            h: self.hadamard,
            n: self.slots,
            q: self.keys,
            attr_bits: self.attr_bits,
            retries: self.retries,
        }
    }

    fn options(&self) -> RunOptions {
        RunOptions {
            trials: self.trials,
            seed: self.seed,
            threads: self.threads,
        }
    }

    fn emit(&self, text: &str) -> anyhow::Result<()> {
        match &self.json_out {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                println!("{text}");
                Ok(())
            }
        }
    }
}

fn summary(report: &GameReport) {
    println!("scheme     {}", report.scheme);
    println!("game       {}", report.game);
    println!("adversary  {}", report.adversary);
    println!("seed       {}", report.seed);
    if report.game == "roundtrip" {
        println!("correctness {}/{}", report.wins, report.trials);
    } else {
        println!("wins       {}/{}", report.wins, report.trials);
    }
    for (name, rate) in &report.pass_rates {
        println!("  {name:<8} {rate:.4}");
    }
    println!("ci95       [{:.4}, {:.4}]", report.ci95[0], report.ci95[1]);
}

fn run_scenario(common: &Common, scenario: Scenario) -> anyhow::Result<u8> {
    let report = scenario.run(&common.options())?;
    summary(&report);
    let mut ok = true;
    for t in scenario.thresholds(&report) {
        println!(
            "threshold  {} = {:.4} ({}) {}",
            t.name,
            t.value,
            t.bound,
            if t.pass { "PASS" } else { "FAIL" }
        );
        ok &= t.pass;
    }
    if let Some(path) = &common.json_out {
        fs::write(path, report.to_json() + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if ok { 0 } else { EXIT_FAIL })
}

fn issue<S: KlaScheme>(scheme: &S, y: &Bits, seed: u64) -> anyhow::Result<String> {
    let mut rng = trial_rng(seed, 0);
    let mut inst = scheme.instantiate(&mut rng)?;
    let key = inst.kg(y, &mut rng)?;
    Ok(key.state.to_json())
}

fn dump_key(common: &Common) -> anyhow::Result<u8> {
    common.scenario(GameKind::Roundtrip, None).validate()?;
    let (l, n, h, a) = (common.lambda, common.slots, common.hadamard, common.attr_bits);
    let y = Bits::zeros(a);
    let json = match common.scheme {
        SchemeKind::Skecd => bail!(Error::InvalidParams("skecd has no leased keys".into())),
        SchemeKind::SkeCrSkl => issue(&SkeCrSklScheme(skecrskl::SkeCrSklParams::new(l, n, h)), &Bits::zeros(0), common.seed)?,
        SchemeKind::PkeCrSkl => issue(&PkeCrSklScheme(pkecrskl::PkeParams::new(l, n, h)), &Bits::zeros(0), common.seed)?,
        SchemeKind::SkfeCrSkl => issue(
            &SkfeCrSklScheme(feskl::SkfeSklParams::new(l, n, h, a, l)),
            &y,
            common.seed,
        )?,
        SchemeKind::AbeCrSkl => issue(&AbeCrSklScheme(feskl::AbeSklParams::new(l, n, h, a)), &y, common.seed)?,
        SchemeKind::AbeCr2Skl => issue(&AbeCr2SklScheme(cr2::Cr2Params::new(l, n, h, a)), &y, common.seed)?,
        SchemeKind::Strawman => issue(&StrawmanScheme { lambda: l }, &Bits::zeros(0), common.seed)?,
    };
    common.emit(&json)?;
    Ok(0)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Demo(common) => run_scenario(&common, common.scenario(GameKind::Roundtrip, None)),
        Command::Game {
            common,
            game,
            adversary,
        } => run_scenario(&common, common.scenario(game, adversary)),
        Command::DumpKey(common) => dump_key(&common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            let _ = writeln!(std::io::stderr(), "error: {err:#}");
            match err.downcast_ref::<Error>() {
                Some(Error::InvalidParams(_)) => ExitCode::from(EXIT_CONFIG),
                _ => ExitCode::from(3),
            }
        }
    }
}
