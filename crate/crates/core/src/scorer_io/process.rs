//! Running scorers: child processes over files or stdin/stdout, sharding,
//! and a content-hash cache of completed response files.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::os::unix::process::CommandExt;
use std::path::Path;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

use super::{read_requests, read_responses, score_builtin, write_requests, write_responses, BuiltinScorer, ScoreRequest, ScoreResponse};
use crate::error::{Error, Result};
use crate::jsonl;

const STDERR_TAIL: usize = 2000;

fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

fn expand_template(template: &str, input: &Path, output: &Path) -> Result<String> {
    if !template.contains("{in}") || !template.contains("{out}") {
        return Err(Error::BadTemplate(template.to_string()));
    }
    Ok(template
        .replace("{in}", &shell_quote(&input.to_string_lossy()))
        .replace("{out}", &shell_quote(&output.to_string_lossy())))
}

fn shell(command: &str) -> Command {
    let mut cmd = Command::new("sh");
    cmd.arg("-c").arg(command).process_group(0);
    cmd
}

fn collect_tail(mut stream: impl Read + Send + 'static) -> JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stream.read_to_end(&mut buf);
        let start = buf.len().saturating_sub(STDERR_TAIL);
        String::from_utf8_lossy(&buf[start..]).trim().to_string()
    })
}

fn kill_group(child: &mut Child) {
    // The scorer runs in its own process group, so grandchildren die too.
    unsafe {
        libc::kill(-(child.id() as i32), libc::SIGKILL);
    }
    let _ = child.wait();
}

/// Runs `template` with `{in}` and `{out}` replaced by the request and
/// response paths, then validates the response file against the requests.
pub fn run_external_scorer(
    template: &str,
    requests_path: &Path,
    responses_path: &Path,
    timeout: Option<Duration>,
) -> Result<BTreeMap<String, ScoreResponse>> {
    let command = expand_template(template, requests_path, responses_path)?;
    let requests = read_requests(requests_path)?;
    let mut child = shell(&command).stdin(Stdio::null()).stdout(Stdio::null()).stderr(Stdio::piped()).spawn()?;
    let stderr = collect_tail(child.stderr.take().expect("stderr is piped"));
    let started = Instant::now();
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if timeout.is_some_and(|t| started.elapsed() >= t) {
            kill_group(&mut child);
            let _ = stderr.join();
            return Err(Error::Timeout(timeout.unwrap_or_default()));
        }
        thread::sleep(Duration::from_millis(10));
    };
    let tail = stderr.join().unwrap_or_default();
    if !status.success() {
        return Err(Error::ScorerFailed { status: status.to_string(), stderr_tail: tail });
    }
    read_responses(responses_path, &requests)
}

/// A long-running scorer speaking one JSON request per stdin line and one
/// response per stdout line.
pub struct LineScorer {
    child: Child,
    stdin: Option<ChildStdin>,
    stdout: BufReader<ChildStdout>,
    stderr: Option<JoinHandle<String>>,
}

impl LineScorer {
    pub fn spawn(command: &str) -> Result<Self> {
        let mut child = shell(command).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn()?;
        let stdin = child.stdin.take();
        let stdout = BufReader::new(child.stdout.take().expect("stdout is piped"));
        let stderr = Some(collect_tail(child.stderr.take().expect("stderr is piped")));
        Ok(LineScorer { child, stdin, stdout, stderr })
    }

    fn failed(&mut self) -> Error {
        kill_group(&mut self.child);
        let status = self.child.try_wait().ok().flatten().map_or("unknown status".to_string(), |s| s.to_string());
        let stderr_tail = self.stderr.take().and_then(|h| h.join().ok()).unwrap_or_default();
        Error::ScorerFailed { status, stderr_tail }
    }

    pub fn score(&mut self, request: &ScoreRequest) -> Result<ScoreResponse> {
        let line = jsonl::to_line(request)?;
        let stdin = self.stdin.as_mut().expect("stdin open until drop");
        if writeln!(stdin, "{line}").and_then(|_| stdin.flush()).is_err() {
            return Err(self.failed());
        }
        let mut reply = String::new();
        if self.stdout.read_line(&mut reply)? == 0 {
            return Err(self.failed());
        }
        let response: ScoreResponse = serde_json::from_str(reply.trim())
            .map_err(|e| Error::Invalid(format!("bad response to `{}`: {e}", request.request_id)))?;
        if response.request_id != request.request_id {
            return Err(Error::Invalid(format!(
                "line scorer answered `{}` to request `{}`",
                response.request_id, request.request_id
            )));
        }
        response
            .check_shape(request.mode)
            .map_err(|m| Error::Invalid(format!("{}: {m}", request.request_id)))?;
        Ok(response)
    }

    pub fn score_all(&mut self, requests: &[ScoreRequest]) -> Result<BTreeMap<String, ScoreResponse>> {
        requests.iter().map(|r| Ok((r.request_id.clone(), self.score(r)?))).collect()
    }
}

impl Drop for LineScorer {
    fn drop(&mut self) {
        drop(self.stdin.take());
        let deadline = Instant::now() + Duration::from_secs(5);
        while Instant::now() < deadline {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            thread::sleep(Duration::from_millis(10));
        }
        kill_group(&mut self.child);
    }
}

/// Round-robin split of requests (sorted by id) into at most `k` non-empty
/// shards.
pub fn shard_requests(requests: &[ScoreRequest], k: usize) -> Vec<Vec<ScoreRequest>> {
    let k = k.clamp(1, requests.len().max(1));
    let mut sorted = requests.to_vec();
    sorted.sort_by(|a, b| a.request_id.cmp(&b.request_id));
    let mut shards = vec![Vec::new(); k];
    for (i, r) in sorted.into_iter().enumerate() {
        shards[i % k].push(r);
    }
    shards.retain(|s| !s.is_empty());
    shards
}

/// Union of response maps. The same id may appear twice only with an
/// identical response, so merging is associative and order-independent.
pub fn merge_responses(parts: impl IntoIterator<Item = BTreeMap<String, ScoreResponse>>) -> Result<BTreeMap<String, ScoreResponse>> {
    let mut out: BTreeMap<String, ScoreResponse> = BTreeMap::new();
    for part in parts {
        for (id, resp) in part {
            match out.get(&id) {
                Some(prev) if *prev != resp => return Err(Error::DuplicateId(id)),
                _ => {
                    out.insert(id, resp);
                }
            }
        }
    }
    Ok(out)
}

/// Runs an external scorer over `k` concurrent shards inside `workdir`.
pub fn run_sharded(
    template: &str,
    requests: &[ScoreRequest],
    k: usize,
    workdir: &Path,
    timeout: Option<Duration>,
) -> Result<BTreeMap<String, ScoreResponse>> {
    let shards = shard_requests(requests, k);
    let results: Vec<Result<BTreeMap<String, ScoreResponse>>> = thread::scope(|scope| {
        let handles: Vec<_> = shards
            .iter()
            .enumerate()
            .map(|(i, shard)| {
                scope.spawn(move || {
                    let input = workdir.join(format!("shard-{i}.requests.jsonl"));
                    let output = workdir.join(format!("shard-{i}.responses.jsonl"));
                    write_requests(shard, &input)?;
                    run_external_scorer(template, &input, &output, timeout)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("shard thread panicked")).collect()
    });
    merge_responses(results.into_iter().collect::<Result<Vec<_>>>()?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalScorer {
    pub template: String,
    pub timeout: Option<Duration>,
    pub shards: usize,
}

/// Where scores come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scorer {
    Builtin(BuiltinScorer),
    External(ExternalScorer),
    /// Command speaking the line protocol.
    Line(String),
}

impl Scorer {
    /// Stable description used in cache keys.
    pub fn identity(&self) -> String {
        match self {
            Scorer::Builtin(b) => format!("builtin:{}", b.name()),
            Scorer::External(e) => format!("external:{}", e.template),
            Scorer::Line(c) => format!("line:{c}"),
        }
    }

    /// Scores `requests` without caching. Sharded external runs use `workdir`.
    pub fn run(&self, requests: &[ScoreRequest], workdir: &Path) -> Result<BTreeMap<String, ScoreResponse>> {
        match self {
            Scorer::Builtin(b) => Ok(score_builtin(*b, requests)?.into_iter().map(|r| (r.request_id.clone(), r)).collect()),
            Scorer::External(e) => run_sharded(&e.template, requests, e.shards.max(1), workdir, e.timeout),
            Scorer::Line(c) => LineScorer::spawn(c)?.score_all(requests),
        }
    }

    /// Scores through a cache directory: the request and response files are
    /// named by [`content_hash`], and a complete response file is reused
    /// without invoking the scorer. Returns the responses and whether they
    /// came from the cache.
    pub fn run_cached(&self, requests: &[ScoreRequest], cache_dir: &Path) -> Result<(BTreeMap<String, ScoreResponse>, bool)> {
        std::fs::create_dir_all(cache_dir)?;
        let hash = content_hash(&self.identity(), requests)?;
        let req_path = cache_dir.join(format!("{hash}.requests.jsonl"));
        let resp_path = cache_dir.join(format!("{hash}.responses.jsonl"));
        if resp_path.exists() {
            if let Ok(found) = read_responses(&resp_path, requests) {
                return Ok((found, true));
            }
        }
        write_requests(requests, &req_path)?;
        let work = cache_dir.join(format!("{hash}.work"));
        std::fs::create_dir_all(&work)?;
        let responses = self.run(requests, &work)?;
        let _ = std::fs::remove_dir_all(&work);
        let tmp = cache_dir.join(format!("{hash}.responses.tmp"));
        write_responses(responses.values(), &tmp)?;
        std::fs::rename(&tmp, &resp_path)?;
        Ok((responses, false))
    }
}

/// Hex SHA-256 over the scorer identity and the id-sorted request lines.
pub fn content_hash(scorer_identity: &str, requests: &[ScoreRequest]) -> Result<String> {
    let mut sorted: Vec<&ScoreRequest> = requests.iter().collect();
    sorted.sort_by(|a, b| a.request_id.cmp(&b.request_id));
    let mut h = Sha256::new();
    h.update(scorer_identity.as_bytes());
    h.update(b"\n");
    for r in sorted {
        h.update(jsonl::to_line(r)?.as_bytes());
        h.update(b"\n");
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}
