use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qrm::edc::{derive_region_labels, region_adjacency, Point2, RegionLabeling};
use qrm::measurement::ObserveOptions;
use qrm::nav::{estimate_rng, navigate, NavOptions};
use qrm::operators::{
    generate_composition_table, load_tables, save_tables, shipped_tables, CompositionTable,
};
use qrm::qfeas::SolverConfig;
use qrm::qmap::QualMap;
use qrm::sim::{
    gen_world, run_mc, run_sim, to_csv, CampaignConfig, SimOptions, Timing, World, WorldConfig,
};

#[derive(Parser)]
#[command(
    name = "qrm",
    version,
    about = "Qualitative relational mapping toolkit"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve all 8000 composition problems and write the table file.
    GenTables {
        #[arg(long, default_value_t = 60)]
        depth: u32,
        #[arg(long, default_value_t = 1000.0)]
        bound: f64,
        /// Rectangle budget per problem and coordinate frame.
        #[arg(long, default_value_t = 50_000)]
        budget: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a random world file.
    GenWorld {
        #[command(flatten)]
        world: WorldArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Map one world and write per-step metrics.
    Simulate {
        /// World file; generated from the world flags when absent.
        #[arg(long)]
        world: Option<PathBuf>,
        #[command(flatten)]
        gen: WorldArgs,
        #[command(flatten)]
        mapping: MappingArgs,
        #[arg(long, default_value_t = usize::MAX)]
        n_nearest: usize,
        /// Metrics CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Final map dump.
        #[arg(long)]
        map_out: Option<PathBuf>,
    },
    /// Monte Carlo campaign; writes per-step means and deviations.
    Mc {
        #[command(flatten)]
        gen: WorldArgs,
        #[command(flatten)]
        mapping: MappingArgs,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        #[arg(long, value_delimiter = ',', default_value = "5,8,15")]
        n_nearest: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-run rows.
        #[arg(long)]
        raw_out: Option<PathBuf>,
    },
    /// Weighted RNG estimate of a map dump.
    Rng {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        tables: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Drive between two points by hopping Voronoi cells.
    Navigate {
        #[arg(long)]
        world: PathBuf,
        /// Map dump; the world is mapped first when absent.
        #[arg(long)]
        map: Option<PathBuf>,
        #[command(flatten)]
        mapping: MappingArgs,
        /// `x,y`; random when absent.
        #[arg(long, value_parser = parse_point)]
        start: Option<Point2>,
        #[arg(long, value_parser = parse_point)]
        goal: Option<Point2>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
        /// Trajectory CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct WorldArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 15)]
    landmarks: usize,
    #[arg(long, default_value_t = 30)]
    images: usize,
    #[arg(long, default_value_t = 100.0)]
    side: f64,
}

impl WorldArgs {
    fn config(&self) -> WorldConfig {
        WorldConfig {
            landmarks: self.landmarks,
            images: self.images,
            side: self.side,
            ..WorldConfig::default()
        }
    }
}

#[derive(Args)]
struct MappingArgs {
    /// Composition table file; the shipped table when absent.
    #[arg(long)]
    tables: Option<PathBuf>,
    /// Solver depth for measurements.
    #[arg(long, default_value_t = 30)]
    depth: u32,
    /// Measure all three cyclic relations of each triple.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    measure_cyclic: bool,
    #[arg(long)]
    max_range: Option<f64>,
    /// Report 0 for update times so output is reproducible.
    #[arg(long)]
    no_timing: bool,
}

impl MappingArgs {
    fn options(&self, n_nearest: usize) -> SimOptions {
        SimOptions {
            observe: ObserveOptions {
                n_nearest,
                max_range: self.max_range,
                measure_cyclic: self.measure_cyclic,
            },
            solver: SolverConfig::with_depth(self.depth),
            timing: if self.no_timing {
                Timing::Off
            } else {
                Timing::Wall
            },
        }
    }
}

fn parse_point(s: &str) -> Result<Point2, String> {
    let (x, y) = s.split_once(',').ok_or("expected x,y")?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t}: {e}"));
    Ok(Point2::new(num(x)?, num(y)?))
}

type Res<T> = Result<T, Box<dyn std::error::Error>>;

fn tables(path: &Option<PathBuf>, labeling: &RegionLabeling) -> Res<CompositionTable> {
    Ok(match path {
        Some(p) => load_tables(p, labeling)?,
        None => shipped_tables().0.clone(),
    })
}

fn emit(out: &Option<PathBuf>, text: &str) -> Res<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn read_world(path: &Path) -> Res<World> {
    Ok(World::parse(&fs::read_to_string(path)?)?)
}

fn run(cmd: Cmd) -> Res<()> {
    let labeling = derive_region_labels()?;
    match cmd {
        Cmd::GenTables {
            depth,
            bound,
            budget,
            out,
        } => {
            let cfg = SolverConfig {
                max_depth: depth,
                max_rectangles: budget,
                ..SolverConfig::default()
            };
            let table = generate_composition_table(&labeling, &cfg, bound)?;
            for (a, b, c) in &table.budget_exceeded {
                eprintln!("budget exceeded: ({a}, {b}) -> {c} kept");
            }
            save_tables(&table, &labeling, &out)?;
        }
        Cmd::GenWorld { world, out } => {
            emit(&out, &gen_world(&world.config(), world.seed).to_text())?
        }
        Cmd::Simulate {
            world,
            gen,
            mapping,
            n_nearest,
            out,
            map_out,
        } => {
            let world = match world {
                Some(p) => read_world(&p)?,
                None => gen_world(&gen.config(), gen.seed),
            };
            let table = tables(&mapping.tables, &labeling)?;
            let adjacency = region_adjacency(&labeling, 500);
            let run = run_sim(
                &world,
                &labeling,
                &table,
                &adjacency,
                &mapping.options(n_nearest),
                0,
            )?;
            eprintln!(
                "{} measurements, {} true states lost",
                run.measurements, run.truth_violations
            );
            emit(&out, &to_csv(&run.rows)?)?;
            if let Some(p) = map_out {
                fs::write(p, run.map.dump())?;
            }
        }
        Cmd::Mc {
            gen,
            mapping,
            runs,
            n_nearest,
            out,
            raw_out,
        } => {
            let table = tables(&mapping.tables, &labeling)?;
            let adjacency = region_adjacency(&labeling, 500);
            let campaign = CampaignConfig {
                runs,
                world: gen.config(),
                n_nearest,
                seed: gen.seed,
                sim: mapping.options(usize::MAX),
            };
            let result = run_mc(&campaign, &labeling, &table, &adjacency)?;
            eprintln!("{} true states lost", result.truth_violations);
            emit(&out, &to_csv(&result.aggregate)?)?;
            if let Some(p) = raw_out {
                fs::write(p, to_csv(&result.rows)?)?;
            }
        }
        Cmd::Rng {
            map,
            tables: t,
            out,
        } => {
            let map = QualMap::load(tables(&t, &labeling)?, &fs::read_to_string(map)?)?;
            emit(&out, &estimate_rng(&map).dump())?;
        }
        Cmd::Navigate {
            world,
            map,
            mapping,
            start,
            goal,
            seed,
            lambda,
            step,
            out,
        } => {
            let world = read_world(&world)?;
            let table = tables(&mapping.tables, &labeling)?;
            let map = match map {
                Some(p) => QualMap::load(table, &fs::read_to_string(p)?)?,
                None => {
                    let adjacency = region_adjacency(&labeling, 500);
                    run_sim(
                        &world,
                        &labeling,
                        &table,
                        &adjacency,
                        &mapping.options(usize::MAX),
                        0,
                    )?
                    .map
                }
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut point = |given: Option<Point2>| match given {
                Some(p) => p,
                None => Point2::new(
                    rng.gen_range(0.0..world.side),
                    rng.gen_range(0.0..world.side),
                ),
            };
            let (start, goal) = (point(start), point(goal));
            let opts = NavOptions {
                step_size: step,
                lambda,
                ..NavOptions::default()
            };
            let traj = navigate(&world.landmarks, &estimate_rng(&map), start, goal, &opts)?;
            eprintln!(
                "route {:?}, {} steps, length {:.2}",
                traj.plan.landmarks,
                traj.points.len() - 1,
                traj.length()
            );
            emit(&out, &traj.to_csv())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
