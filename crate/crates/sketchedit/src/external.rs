//! Bridge to an external infilling process.
//!
//! The process is started once with `sh -c <command>` and kept alive across
//! requests. Each request is two lines on its stdin, `INFILL <n> <seed>` and
//! the masked token stream; the reply is `n` candidate lines and `END`.
//! Candidates that fail to parse, validate or preserve the unmasked tokens
//! are replaced by surrogate samples, so a round always gets `n` members.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use log::warn;
use sketchedit_core::generator::{accept_external, backfill};
use sketchedit_core::{CandidateSet, GenError, GenPolicy, Generator, MaskedSequence};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

struct Session {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

impl Session {
    fn spawn(command: &str) -> Result<Self, GenError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| GenError::EndpointUnavailable(format!("cannot start `{command}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Session { child, stdin, lines })
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Outcome of one protocol exchange before validation.
#[derive(Debug)]
pub struct Reply {
    pub lines: Vec<String>,
    /// Set when the exchange broke off; `lines` holds what arrived first.
    pub error: Option<GenError>,
}

pub struct ExternalGenerator {
    command: String,
    timeout: Duration,
    session: Option<Session>,
}

impl ExternalGenerator {
    pub fn new(command: impl Into<String>) -> Self {
        ExternalGenerator { command: command.into(), timeout: DEFAULT_TIMEOUT, session: None }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// Sends one request and collects the raw reply lines. Any error drops
    /// the session; the next request starts a fresh process.
    pub fn request(&mut self, masked_text: &str, n: usize, seed: u64) -> Reply {
        let mut lines = Vec::new();
        let error = self.exchange(masked_text, n, seed, &mut lines).err();
        if error.is_some() {
            self.session = None;
        }
        Reply { lines, error }
    }

    fn exchange(&mut self, masked_text: &str, n: usize, seed: u64, out: &mut Vec<String>) -> Result<(), GenError> {
        if self.session.is_none() {
            self.session = Some(Session::spawn(&self.command)?);
        }
        let session = self.session.as_mut().expect("just spawned");
        let unavailable = |m: String| GenError::EndpointUnavailable(m);
        writeln!(session.stdin, "INFILL {n} {seed}")
            .and_then(|_| writeln!(session.stdin, "{masked_text}"))
            .and_then(|_| session.stdin.flush())
            .map_err(|e| unavailable(format!("write failed: {e}")))?;

        let deadline = Instant::now() + self.timeout;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            let line = match session.lines.recv_timeout(left) {
                Ok(line) => line,
                Err(RecvTimeoutError::Timeout) => return Err(unavailable(format!("no reply within {:?}", self.timeout))),
                Err(RecvTimeoutError::Disconnected) => return Err(unavailable("endpoint closed its output".into())),
            };
            if line.trim() == "END" {
                return if out.len() == n {
                    Ok(())
                } else {
                    Err(GenError::ProtocolError(format!("expected {n} candidates before END, got {}", out.len())))
                };
            }
            if out.len() == n {
                return Err(GenError::ProtocolError(format!("expected END after {n} candidates")));
            }
            out.push(line);
        }
    }
}

impl Generator for ExternalGenerator {
    fn infill(&mut self, masked: &MaskedSequence, policy: &GenPolicy) -> Result<CandidateSet, GenError> {
        policy.check()?;
        let reply = self.request(&masked.to_text(), policy.n, policy.seed);
        let accepted: Vec<_> = reply.lines.iter().filter_map(|l| accept_external(masked, l)).collect();
        let unreachable = matches!(reply.error, Some(GenError::EndpointUnavailable(_)));
        if let Some(e) = &reply.error {
            warn!("external generator: {e}; backfilling with surrogate candidates");
        }
        if accepted.len() < reply.lines.len() {
            warn!("external generator: dropped {} invalid candidate(s)", reply.lines.len() - accepted.len());
        }
        Ok(backfill(masked, policy, accepted, unreachable))
    }
}
