//! Download prices from an HTTP endpoint with an on-disk cache. A tiny local
//! server stands in for the vendor so the example runs offline.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::thread;

use chrono::NaiveDate;
use infonet::ingest::RemoteSource;

const BODY: &str = "Date,Open,High,Low,Close,Adj Close,Volume
2024-01-02,1,1,1,100.0,100.0,0
2024-01-03,1,1,1,101.5,101.5,0
2024-01-04,1,1,1,null,null,null
2024-01-05,1,1,1,99.8,99.8,0
";

fn serve() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let mut stream = stream.unwrap();
            let mut request_line = String::new();
            BufReader::new(&stream).read_line(&mut request_line).unwrap();
            println!("server: {}", request_line.trim_end());
            write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: text/csv\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{BODY}",
                BODY.len()
            )
            .unwrap();
        }
    });
    format!("http://{addr}/prices/{{asset}}?from={{start}}&to={{end}}")
}

fn main() -> infonet::Result<()> {
    let cache = std::env::temp_dir().join("infonet-fetch-cache");
    let _ = std::fs::remove_dir_all(&cache);
    let source = RemoteSource::new(serve()).with_cache(&cache);
    let (start, end) = (NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(), NaiveDate::from_ymd_opt(2024, 1, 31).unwrap());

    let first = source.fetch("GC=F", start, end)?;
    // second call is answered from the cache, the server logs nothing
    let second = source.fetch("GC=F", start, end)?;
    assert_eq!(first, second);

    for (d, p) in first.observations() {
        println!("{d}  {p:.2}");
    }
    println!("cached at {}", source.cache_path("GC=F", start, end).unwrap().display());
    Ok(())
}
