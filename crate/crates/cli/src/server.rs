//! Stream transports: newline-delimited JSON over TCP, and the same messages
//! as WebSocket text frames for browsers. One thread per connection.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use tungstenite::Message;

use crate::registry::SessionRegistry;

fn serve_ndjson(stream: TcpStream, registry: &SessionRegistry) -> std::io::Result<()> {
    let mut writer = stream.try_clone()?;
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        writer.write_all(registry.handle_line(&line).to_line().as_bytes())?;
        writer.flush()?;
    }
    Ok(())
}

fn serve_websocket(stream: TcpStream, registry: &SessionRegistry) -> Result<(), tungstenite::Error> {
    let mut ws = tungstenite::accept(stream).map_err(|e| match e {
        tungstenite::HandshakeError::Failure(e) => e,
        tungstenite::HandshakeError::Interrupted(_) => tungstenite::Error::ConnectionClosed,
    })?;
    loop {
        let text = match ws.read()? {
            Message::Text(t) => t.to_string(),
            Message::Close(_) => return Ok(()),
            _ => continue,
        };
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            ws.send(Message::text(registry.handle_line(line).to_line()))?;
        }
    }
}

/// Accept NDJSON connections until the listener fails.
pub fn run_tcp(listener: TcpListener, registry: Arc<SessionRegistry>) {
    for stream in listener.incoming().flatten() {
        let registry = Arc::clone(&registry);
        thread::spawn(move || {
            let _ = serve_ndjson(stream, &registry);
        });
    }
}

/// Accept WebSocket connections until the listener fails.
pub fn run_websocket(listener: TcpListener, registry: Arc<SessionRegistry>) {
    for stream in listener.incoming().flatten() {
        let registry = Arc::clone(&registry);
        thread::spawn(move || {
            let _ = serve_websocket(stream, &registry);
        });
    }
}
