use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use arianna::client::HttpClient;
use arianna::format::{
    label_image, load_deployment, load_world_params, overlay, raster_image, save_deployment, write_atomic, write_image,
};
use arianna::live::{self, LiveConfig};
use arianna::pathserver::{self, PathServer};
use arianna::sim::demo::{demo_config, demo_deployment, DEFAULT_PATCH_AT};
use arianna::sim::{eval_trace, run_in_process, run_sim, RunMetrics, SimConfig, Trace};
use arianna_core::agent::TouchMode;
use arianna_core::pathgraph::NodeId;
use arianna_core::scene::{generate_world, rasterize_floor, render_frame, Pose, WorldParams};
use arianna_core::vision::{detect_lane, detect_markers, segment_colors};
use arianna_core::Point2;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "arianna", version, about = "Strip-pair indoor navigation: path server and closed-loop simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random valid deployment.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// WorldParams JSON; `--seed` overrides its seed.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Walk a scripted agent from one node to another and write the trace.
    Run(RunArgs),
    /// Render the phone camera view at a pose.
    Render {
        #[arg(long)]
        world: PathBuf,
        /// x,y,heading_deg[,phone_yaw_deg]
        #[arg(long, allow_hyphen_values = true)]
        pose: String,
        #[arg(long)]
        out: PathBuf,
        /// Also write the frame with the detected lane and markers drawn on.
        #[arg(long)]
        overlay: Option<PathBuf>,
        /// Also write the per-pixel color classes.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Export the top-down floor map.
    Raster {
        #[arg(long)]
        world: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute metrics from a trace file.
    Eval {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Entrance-to-exhibit scenario with the shortcut closed mid-walk.
    Demo {
        #[arg(long, conflicts_with = "no_patch")]
        patch_at: Option<f64>,
        /// Leave the shortcut open.
        #[arg(long)]
        no_patch: bool,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        finger_scan: bool,
    },
    /// Host the path server and the live simulation channel.
    Serve {
        /// Deployment repository file; patches are written back to it.
        #[arg(long)]
        world: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        /// Directory of static files for the browser client.
        #[arg(long)]
        assets: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    world: PathBuf,
    #[arg(long)]
    from: u32,
    #[arg(long)]
    to: u32,
    #[arg(long)]
    trace: PathBuf,
    /// Path server base URL, e.g. http://127.0.0.1:8080
    #[arg(long, conflicts_with = "in_process")]
    server: Option<String>,
    /// Serve the world from an in-process path server (the default).
    #[arg(long)]
    in_process: bool,
    /// Route locally without any server.
    #[arg(long, conflicts_with_all = ["server", "in_process"])]
    offline: bool,
    #[arg(long)]
    no_haptics: bool,
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long)]
    finger_scan: bool,
    /// SimConfig JSON as the base; the flags above override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::Gen { seed, out, params } => gen(seed, &out, params.as_deref()),
        Cmd::Run(args) => run(args),
        Cmd::Render { world, pose, out, overlay, labels } => render(&world, &pose, &out, overlay, labels),
        Cmd::Raster { world, out } => {
            let d = load_deployment(&world)?;
            write_image(&out, &raster_image(&rasterize_floor(&d, &Default::default())))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Eval { trace } => {
            let text = std::fs::read_to_string(&trace).with_context(|| trace.display().to_string())?;
            let t = Trace::parse(&text).with_context(|| trace.display().to_string())?;
            Ok(report(&eval_trace(&t)))
        }
        Cmd::Demo { patch_at, no_patch, trace, finger_scan } => {
            let mut cfg = demo_config(if no_patch { None } else { Some(patch_at.unwrap_or(DEFAULT_PATCH_AT)) });
            if finger_scan {
                cfg.agent.touch_mode = TouchMode::FingerScan;
            }
            let (t, m) = run_in_process(demo_deployment(), cfg)?;
            if let Some(path) = trace {
                write_atomic(&path, t.to_jsonl().as_bytes())?;
            }
            Ok(report(&m))
        }
        Cmd::Serve { world, listen, assets } => serve(&world, listen, assets),
    }
}

/// Prints metrics; exit status says whether the destination was reached.
fn report(m: &RunMetrics) -> ExitCode {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(m).expect("metrics serialize"));
    if m.reached {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn gen(seed: u64, out: &Path, params: Option<&Path>) -> Result<ExitCode> {
    let mut p = match params {
        Some(path) => load_world_params(path)?,
        None => WorldParams::default(),
    };
    p.seed = seed;
    let d = generate_world(&p).map_err(|e| anyhow::anyhow!("generation failed: {e:?}"))?;
    save_deployment(out, &d)?;
    Ok(ExitCode::SUCCESS)
}

fn run(a: RunArgs) -> Result<ExitCode> {
    let d = load_deployment(&a.world)?;
    let mut cfg: SimConfig = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| path.display().to_string())?;
            serde_json::from_str(&text).with_context(|| path.display().to_string())?
        }
        None => SimConfig::default(),
    };
    cfg.from = NodeId(a.from);
    cfg.to = NodeId(a.to);
    cfg.haptics &= !a.no_haptics;
    if a.noise_sigma != 0.0 {
        cfg.noise_sigma = a.noise_sigma;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(t) = a.timeout {
        cfg.timeout = t;
    }
    if a.finger_scan {
        cfg.agent.touch_mode = TouchMode::FingerScan;
    }
    cfg.offline |= a.offline;
    let (trace, metrics) = match &a.server {
        Some(url) => run_sim(d, cfg, Some(HttpClient::new(url, Duration::from_secs(5))))?,
        None => run_in_process(d, cfg)?,
    };
    write_atomic(&a.trace, trace.to_jsonl().as_bytes())?;
    Ok(report(&metrics))
}

fn parse_pose(s: &str) -> Result<Pose> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad pose {s:?}"))?;
    if !(3..=4).contains(&v.len()) {
        bail!("pose needs x,y,heading_deg[,phone_yaw_deg], got {s:?}");
    }
    let mut pose = Pose::new(Point2::new(v[0], v[1]), v[2].to_radians());
    pose.phone_yaw_offset = v.get(3).copied().unwrap_or(0.0).to_radians();
    if !pose.is_valid() {
        bail!("pose out of range: {s:?}");
    }
    Ok(pose)
}

fn render(world: &Path, pose: &str, out: &Path, over: Option<PathBuf>, labels: Option<PathBuf>) -> Result<ExitCode> {
    let d = load_deployment(world)?;
    let pose = parse_pose(pose)?;
    let cfg = SimConfig::default();
    let frame = render_frame(&rasterize_floor(&d, &cfg.raster), &pose, &cfg.camera);
    write_image(out, &frame)?;
    if over.is_some() || labels.is_some() {
        let vp = &cfg.nav.vision;
        let mask = segment_colors(&frame, vp);
        if let Some(path) = over {
            let lane = detect_lane(&mask, vp);
            write_image(&path, &overlay(&frame, lane.as_ref(), &detect_markers(&frame, &mask, vp)))?;
        }
        if let Some(path) = labels {
            write_image(&path, &label_image(&mask))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn serve(world: &Path, listen: SocketAddr, assets: Option<PathBuf>) -> Result<ExitCode> {
    let server = Arc::new(PathServer::open(world).map_err(|e| anyhow::anyhow!("{}: {e}", world.display()))?);
    let mut app = pathserver::router(server.clone()).merge(live::router(server, LiveConfig::default()));
    if let Some(dir) = assets {
        app = app.fallback_service(tower_http::services::ServeDir::new(dir));
    }
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(listen).await.with_context(|| format!("bind {listen}"))?;
        println!("listening on {}", listener.local_addr()?);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(ExitCode::SUCCESS)
    })
}
