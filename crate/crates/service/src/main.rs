//! `diagsvc`: serves the diagnosis session API.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;

use diag_service::registry::KbRegistry;
use diag_service::{router, AppState};

#[derive(Parser)]
#[command(
    name = "diagsvc",
    version,
    about = "HTTP API for interactive requirement diagnosis"
)]
struct Args {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Directory of additional `*.kb` files. The car example is always available.
    #[arg(long)]
    kb_dir: Option<PathBuf>,
    /// Directory for per-session logs; sessions found there are restored.
    #[arg(long)]
    log_dir: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> ExitCode {
    let args = Args::parse();
    let mut registry = KbRegistry::with_car();
    if let Some(dir) = &args.kb_dir {
        match registry.load_dir(dir) {
            Ok(n) => eprintln!(
                "diagsvc: loaded {n} knowledge base(s) from {}",
                dir.display()
            ),
            Err(e) => {
                eprintln!("diagsvc: {e}");
                return ExitCode::from(2);
            }
        }
    }
    let mut state = AppState::new(registry);
    if let Some(dir) = &args.log_dir {
        state = match state.with_journal(dir) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("diagsvc: {}: {e}", dir.display());
                return ExitCode::from(2);
            }
        };
        eprintln!("diagsvc: restored {} session(s)", state.session_count());
    }
    let listener = match tokio::net::TcpListener::bind(args.addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("diagsvc: bind {}: {e}", args.addr);
            return ExitCode::from(1);
        }
    };
    eprintln!("diagsvc: listening on {}", args.addr);
    let app = router(Arc::new(state));
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    match axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await
    {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("diagsvc: {e}");
            ExitCode::from(3)
        }
    }
}
