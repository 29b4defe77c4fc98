use clap::Parser;
use deice_core::Registry;
use deice_service::{router, AppState};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "deice-service", version, about = "HTTP API for de-ice rescheduling sessions")]
struct Args {
    /// Address to listen on.
    #[arg(long, env = "DEICE_BIND", default_value = "127.0.0.1:8080")]
    bind: String,
    /// Write every session's schedule and configuration here on shutdown.
    #[arg(long, env = "DEICE_SNAPSHOT_DIR")]
    snapshot_dir: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let args = Args::parse();
    let state = AppState::new(Registry::builtin());
    let listener = tokio::net::TcpListener::bind(&args.bind).await?;
    eprintln!("deice-service listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    if let Some(dir) = &args.snapshot_dir {
        let saved = state.save_snapshots(dir)?;
        eprintln!("saved {saved} sessions to {}", dir.display());
    }
    Ok(())
}
