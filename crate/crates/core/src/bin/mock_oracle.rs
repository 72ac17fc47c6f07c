//! Reference implementation of the remote-oracle line protocol, used by the
//! integration tests and as a template for wiring in real external filters.
//!
//! Reads `{"tokens": [...]}` lines from stdin, writes `{"score": s}` lines
//! to stdout. Modes:
//!   --mode hash        deterministic pseudo-score from the token list (default)
//!   --mode fixed --score 0.75
//!   --mode bad-range   always replies 1.5 (protocol violation)
//!   --mode garbage     replies non-JSON text

use std::io::{BufRead, Write};

#[derive(serde::Deserialize)]
struct Request {
    tokens: Vec<String>,
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut mode = "hash".to_string();
    let mut fixed = 0.5;
    let mut i = 0;
    while i < args.len() {
        match args[i].as_str() {
            "--mode" => {
                mode = args.get(i + 1).cloned().unwrap_or_default();
                i += 2;
            }
            "--score" => {
                fixed = args
                    .get(i + 1)
                    .and_then(|s| s.parse().ok())
                    .unwrap_or(0.5);
                i += 2;
            }
            other => {
                eprintln!("mock-oracle: unknown argument {other}");
                std::process::exit(1);
            }
        }
    }

    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for line in stdin.lock().lines() {
        let line = match line {
            Ok(l) => l,
            Err(_) => break,
        };
        if line.trim().is_empty() {
            continue;
        }
        let reply = match mode.as_str() {
            "fixed" => format!("{{\"score\":{fixed}}}"),
            "bad-range" => "{\"score\":1.5}".to_string(),
            "garbage" => "absolutely not json".to_string(),
            _ => {
                let score = match serde_json::from_str::<Request>(&line) {
                    Ok(req) => hash_score(&req.tokens),
                    Err(_) => 0.0,
                };
                format!("{{\"score\":{score}}}")
            }
        };
        if writeln!(out, "{reply}").and_then(|_| out.flush()).is_err() {
            break;
        }
    }
}

/// FNV-1a over the tokens, folded into [0, 1] with 4 decimal places.
fn hash_score(tokens: &[String]) -> f64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for tok in tokens {
        for &b in tok.as_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h ^= 0x1f;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    (h % 10_001) as f64 / 10_000.0
}
