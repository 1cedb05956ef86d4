#![allow(dead_code)]

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

/// Minimal HTTP/1.1 server answering GET requests from a path → (status, body) table.
pub struct TestServer {
    pub base: String,
    pub hits: Arc<AtomicUsize>,
}

pub fn serve(routes: HashMap<String, (u16, String)>) -> TestServer {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            if reader.read_line(&mut request_line).is_err() {
                continue;
            }
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                    break;
                }
            }
            counter.fetch_add(1, Ordering::SeqCst);
            let path = request_line.split_whitespace().nth(1).unwrap_or("/").to_string();
            let (status, body) = routes
                .get(&path)
                .cloned()
                .unwrap_or((404, "not found".to_string()));
            let reason = match status {
                200 => "OK",
                404 => "Not Found",
                _ => "Error",
            };
            let _ = write!(
                stream,
                "HTTP/1.1 {status} {reason}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    TestServer { base, hits }
}

/// Three business days of prices in the default vendor layout.
pub fn vendor_csv(prices: [f64; 3]) -> String {
    format!(
        "Date,Open,High,Low,Close,Adj Close,Volume\n\
         2024-01-02,1,1,1,1,{},100\n\
         2024-01-03,1,1,1,1,{},100\n\
         2024-01-04,1,1,1,1,{},100\n",
        prices[0], prices[1], prices[2]
    )
}
