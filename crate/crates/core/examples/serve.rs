//! Runs the HTTP service on an ephemeral port, sends a few requests over a
//! plain TCP socket and shuts down.
//!
//! ```text
//! cargo run --release --example serve
//! ```

mod common;

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::sync::Arc;

use speller::service::{spawn, Service, ServiceConfig};

fn request(addr: SocketAddr, method: &str, path: &str, body: &str) -> std::io::Result<String> {
    let mut stream = TcpStream::connect(addr)?;
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )?;
    let mut response = String::new();
    stream.read_to_string(&mut response)?;
    let status = response.lines().next().unwrap_or_default().to_owned();
    let payload = response.split("\r\n\r\n").nth(1).unwrap_or_default();
    Ok(format!("{status}\n    {payload}"))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = ServiceConfig {
        listen: "127.0.0.1:0".into(),
        ..ServiceConfig::default()
    };
    let service = Arc::new(Service::with_artifacts(config, common::artifacts()?)?);
    let server = spawn(service)?;
    let addr = server.addr();
    println!("listening on {addr}");

    for body in [
        r#"{"query":",edal icon"}"#,
        r#"{"query":"creativecloud","application":"cchome"}"#,
        r#"{"query":"museum"}"#,
        r#"{"query":""}"#,
        r#"{"query":"museum","locale":"xx"}"#,
    ] {
        println!("POST {body}\n  {}", request(addr, "POST", "/v1/correct", body)?);
    }
    println!("GET /v1/health\n  {}", request(addr, "GET", "/v1/health", "")?);
    server.shutdown();
    Ok(())
}
