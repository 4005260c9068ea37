//! Read-only HTTP service for an exported bundle plus static assets.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::extract::State;
use axum::http::{header, HeaderValue, Method, Request, StatusCode};
use axum::response::Response;
use axum::Router;
use tokio::net::TcpListener;

use crate::bundle::{EDGES_FILE, FIXTURES_FILE, MANIFEST_FILE, MODEL_FILE};
use crate::error::{Result, ScvxError};

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub bundle_dir: PathBuf,
    /// Directory of the explorer's static files, if any.
    pub assets_dir: Option<PathBuf>,
}

struct AppState {
    /// Bundle files read once at startup.
    bundle: HashMap<&'static str, Vec<u8>>,
    assets: Option<PathBuf>,
}

fn content_type(path: &str) -> &'static str {
    match Path::new(path).extension().and_then(|e| e.to_str()) {
        Some("json") => "application/json",
        Some("html") => "text/html; charset=utf-8",
        Some("js" | "mjs") => "text/javascript; charset=utf-8",
        Some("css") => "text/css; charset=utf-8",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        Some("wasm") => "application/wasm",
        Some("txt") => "text/plain; charset=utf-8",
        _ => "application/octet-stream",
    }
}

fn reply(status: StatusCode, ctype: &'static str, body: impl Into<Body>) -> Response {
    let mut r = Response::new(body.into());
    *r.status_mut() = status;
    r.headers_mut().insert(header::CONTENT_TYPE, HeaderValue::from_static(ctype));
    r
}

/// Relative request path with no `..`, root or prefix components.
fn safe_relative(path: &str) -> Option<PathBuf> {
    let rel = Path::new(path.trim_start_matches('/'));
    rel.components().all(|c| matches!(c, Component::Normal(_))).then(|| rel.to_path_buf())
}

async fn handle(State(state): State<Arc<AppState>>, req: Request<Body>) -> Response {
    let head = req.method() == Method::HEAD;
    if req.method() != Method::GET && !head {
        let mut r = reply(StatusCode::METHOD_NOT_ALLOWED, "text/plain; charset=utf-8", "read-only\n");
        r.headers_mut().insert(header::ALLOW, HeaderValue::from_static("GET, HEAD"));
        return r;
    }
    let path = req.uri().path();
    let name = path.trim_start_matches('/');
    if let Some(bytes) = state.bundle.get(name) {
        return reply(StatusCode::OK, "application/json", if head { Vec::new() } else { bytes.clone() });
    }
    if let Some(root) = &state.assets {
        let rel = if name.is_empty() { Some(PathBuf::from("index.html")) } else { safe_relative(path) };
        if let Some(rel) = rel {
            let full = root.join(&rel);
            if full.is_file() {
                if let Ok(bytes) = tokio::fs::read(&full).await {
                    let ctype = content_type(&rel.to_string_lossy());
                    return reply(StatusCode::OK, ctype, if head { Vec::new() } else { bytes });
                }
            }
        }
    }
    reply(StatusCode::NOT_FOUND, "text/plain; charset=utf-8", "not found\n")
}

async fn cors(resp: Response) -> Response {
    let mut resp = resp;
    resp.headers_mut()
        .insert(header::ACCESS_CONTROL_ALLOW_ORIGIN, HeaderValue::from_static("*"));
    resp
}

/// Loads the bundle files and builds the router.
pub fn router(config: &ServeConfig) -> Result<Router> {
    let mut bundle = HashMap::new();
    for name in [MANIFEST_FILE, MODEL_FILE, EDGES_FILE, FIXTURES_FILE] {
        let p = config.bundle_dir.join(name);
        match std::fs::read(&p) {
            Ok(bytes) => {
                bundle.insert(name, bytes);
            }
            Err(e) if name == FIXTURES_FILE && e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(ScvxError::io(&p, e)),
        }
    }
    if let Some(a) = &config.assets_dir {
        if !a.is_dir() {
            return Err(ScvxError::Usage(format!("assets directory {} does not exist", a.display())));
        }
    }
    let state = Arc::new(AppState {
        bundle,
        assets: config.assets_dir.clone(),
    });
    Ok(Router::new()
        .fallback(handle)
        .with_state(state)
        .layer(axum::middleware::map_response(cors)))
}

/// Serves on an already-bound listener until the task is dropped.
pub async fn serve(listener: TcpListener, config: &ServeConfig) -> Result<()> {
    let app = router(config)?;
    axum::serve(listener, app).await.map_err(|e| ScvxError::Server(e.to_string()))
}

pub async fn bind(addr: SocketAddr) -> Result<TcpListener> {
    TcpListener::bind(addr).await.map_err(|e| {
        if e.kind() == std::io::ErrorKind::AddrInUse {
            ScvxError::Server(format!("port {} is already in use on {}", addr.port(), addr.ip()))
        } else {
            ScvxError::Server(format!("cannot listen on {addr}: {e}"))
        }
    })
}

/// Blocking entry point used by the CLI. `on_ready` receives the bound
/// address before requests are accepted.
pub fn run(addr: SocketAddr, config: &ServeConfig, on_ready: impl FnOnce(SocketAddr)) -> Result<()> {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| ScvxError::Server(e.to_string()))?;
    rt.block_on(async {
        let app = router(config)?;
        let listener = bind(addr).await?;
        let local = listener.local_addr().map_err(|e| ScvxError::Server(e.to_string()))?;
        on_ready(local);
        axum::serve(listener, app).await.map_err(|e| ScvxError::Server(e.to_string()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_sanitizing() {
        assert_eq!(safe_relative("/app/main.js"), Some(PathBuf::from("app/main.js")));
        assert_eq!(safe_relative("/../etc/passwd"), None);
        assert_eq!(safe_relative("/a/./b"), Some(PathBuf::from("a/b")));
        assert_eq!(safe_relative("/a/../../b"), None);
    }

    #[test]
    fn content_types() {
        assert_eq!(content_type("model.json"), "application/json");
        assert_eq!(content_type("index.html"), "text/html; charset=utf-8");
        assert_eq!(content_type("blob"), "application/octet-stream");
    }
}
