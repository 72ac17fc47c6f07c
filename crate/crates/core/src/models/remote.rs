//! Remote oracle adapter: newline-delimited JSON over a subprocess's
//! stdin/stdout or a TCP connection.
//!
//! Request: `{"tokens": ["free", "money"]}`. Reply: `{"score": 0.97}`,
//! one reply per request, in order; extra reply fields are ignored.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::models::OracleHandle;

/// How to reach the remote classifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RemoteSpec {
    /// Spawn `argv[0]` with the remaining arguments and speak over its pipes.
    Command(Vec<String>),
    /// Connect to `host:port`.
    Tcp(String),
}

impl RemoteSpec {
    /// `tcp:host:port` selects TCP; anything else is split on whitespace
    /// into a command line.
    pub fn parse(spec: &str) -> Result<RemoteSpec> {
        if let Some(addr) = spec.strip_prefix("tcp:") {
            return Ok(RemoteSpec::Tcp(addr.to_string()));
        }
        let argv: Vec<String> = spec.split_whitespace().map(str::to_string).collect();
        if argv.is_empty() {
            return Err(Error::Validation("empty remote oracle spec".into()));
        }
        Ok(RemoteSpec::Command(argv))
    }
}

enum Transport {
    Child {
        child: Child,
        stdin: ChildStdin,
        reader: BufReader<ChildStdout>,
    },
    Tcp {
        writer: TcpStream,
        reader: BufReader<TcpStream>,
    },
}

/// Connection to an external classifier. Requests are serialized; one
/// in-flight query per connection keeps replies in order.
pub struct RemoteOracle {
    transport: Mutex<Transport>,
    descriptor: String,
}

/// Open the endpoint and wrap it in a fresh query-counted handle.
pub fn connect_remote_oracle(spec: &RemoteSpec) -> Result<OracleHandle> {
    Ok(OracleHandle::remote(RemoteOracle::connect(spec)?))
}

#[derive(Deserialize)]
struct Reply {
    score: serde_json::Value,
}

impl RemoteOracle {
    pub fn connect(spec: &RemoteSpec) -> Result<RemoteOracle> {
        let transport = match spec {
            RemoteSpec::Command(argv) => {
                let mut child = Command::new(&argv[0])
                    .args(&argv[1..])
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .spawn()
                    .map_err(|e| Error::Transport(format!("cannot spawn {argv:?}: {e}")))?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                Transport::Child {
                    child,
                    stdin,
                    reader: BufReader::new(stdout),
                }
            }
            RemoteSpec::Tcp(addr) => {
                let stream = TcpStream::connect(addr)
                    .map_err(|e| Error::Transport(format!("cannot connect to {addr}: {e}")))?;
                let reader = BufReader::new(
                    stream
                        .try_clone()
                        .map_err(|e| Error::Transport(format!("cannot clone stream: {e}")))?,
                );
                Transport::Tcp {
                    writer: stream,
                    reader,
                }
            }
        };
        Ok(RemoteOracle {
            transport: Mutex::new(transport),
            descriptor: match spec {
                RemoteSpec::Command(argv) => argv.join(" "),
                RemoteSpec::Tcp(addr) => format!("tcp:{addr}"),
            },
        })
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub(crate) fn predict(&self, tokens: &[String]) -> Result<f64> {
        let request = serde_json::json!({ "tokens": tokens }).to_string();
        let mut transport = self.transport.lock().expect("remote oracle lock");
        let line = transport.round_trip(&request)?;
        parse_score(&line)
    }
}

impl Transport {
    fn round_trip(&mut self, request: &str) -> Result<String> {
        let (writer, reader): (&mut dyn Write, &mut dyn BufRead) = match self {
            Transport::Child { stdin, reader, .. } => (stdin, reader),
            Transport::Tcp { writer, reader } => (writer, reader),
        };
        writer
            .write_all(request.as_bytes())
            .and_then(|_| writer.write_all(b"\n"))
            .and_then(|_| writer.flush())
            .map_err(|e| Error::Transport(format!("write failed: {e}")))?;
        let mut line = String::new();
        let n = reader
            .read_line(&mut line)
            .map_err(|e| Error::Transport(format!("read failed: {e}")))?;
        if n == 0 {
            return Err(Error::Transport("oracle closed the connection".into()));
        }
        Ok(line)
    }
}

fn parse_score(raw_line: &str) -> Result<f64> {
    let raw = raw_line.trim_end();
    let reply: Reply = serde_json::from_str(raw)
        .map_err(|_| Error::Oracle(format!("malformed reply {raw:?}")))?;
    let score = reply
        .score
        .as_f64()
        .ok_or_else(|| Error::Oracle(format!("non-numeric score in reply {raw:?}")))?;
    if !(0.0..=1.0).contains(&score) {
        return Err(Error::Oracle(format!(
            "score {score} outside [0, 1] in reply {raw:?}"
        )));
    }
    Ok(score)
}

impl Drop for RemoteOracle {
    fn drop(&mut self) {
        if let Ok(mut t) = self.transport.lock() {
            if let Transport::Child { child, .. } = &mut *t {
                let _ = child.kill();
                let _ = child.wait();
            }
        }
    }
}
