#![allow(dead_code)]

use std::sync::Arc;

use arianna::live::{self, LiveConfig};
use arianna::pathserver::{self, PathServer};
use axum::Router;

/// Serves `app` on an ephemeral local port from a background runtime and
/// returns its base URL.
pub fn spawn(app: Router) -> String {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    listener.set_nonblocking(true).unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().unwrap();
        rt.block_on(async move {
            let l = tokio::net::TcpListener::from_std(listener).unwrap();
            axum::serve(l, app).await.unwrap();
        });
    });
    format!("http://{addr}")
}

/// Path server plus UI channel, as `serve` mounts them.
pub fn spawn_full(server: Arc<PathServer>) -> String {
    spawn(pathserver::router(server.clone()).merge(live::router(server, LiveConfig::default())))
}

pub fn agent() -> ureq::Agent {
    ureq::Agent::config_builder().http_status_as_error(false).build().into()
}
