//! Problem data: instances, the `UPMSP v1` text format, seeded generation,
//! and the adjusted-time matrix that all evaluators read.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Integer time unit used for processing times, setups, and makespans.
pub type Time = u64;

/// A scheduling instance: `n` jobs, `m` unrelated machines, per-machine
/// processing times, and sequence-dependent setup times.
///
/// Setup matrices carry a leading row for the "machine start" state, so
/// `setup(k, None, j)` is the setup incurred when job `j` opens machine
/// `k`'s schedule. Jobs and machines are indexed from 0 internally; the
/// text format and all user-facing output are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    machines: usize,
    jobs: usize,
    /// `processing[j][k]`: time of job `j` on machine `k`.
    processing: Vec<Vec<Time>>,
    /// `setup[k][i][j]`: setup on machine `k` when job `j` runs after
    /// predecessor state `i`; row 0 is the machine-start state, row `i ≥ 1`
    /// belongs to job `i - 1`. Diagonal entries (a job following itself)
    /// are stored as 0 and never read.
    setup: Vec<Vec<Vec<Time>>>,
    id: String,
}

/// Structural problems detected when assembling an [`Instance`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("machine and job counts must be at least 1 (got m={machines}, n={jobs})")]
    EmptyDimensions { machines: usize, jobs: usize },
    #[error("processing matrix must be {jobs}x{machines}, got {rows}x{cols}")]
    ProcessingShape {
        jobs: usize,
        machines: usize,
        rows: usize,
        cols: usize,
    },
    #[error("setup matrix for machine {machine} must be {expected_rows}x{cols}, got {rows} rows")]
    SetupShape {
        machine: usize,
        expected_rows: usize,
        rows: usize,
        cols: usize,
    },
    #[error("setup matrix for machine {machine} has a row of width {width}, expected {cols}")]
    SetupRowWidth {
        machine: usize,
        width: usize,
        cols: usize,
    },
    #[error("setup matrix for machine {machine} has nonzero diagonal at job {job}")]
    NonzeroDiagonal { machine: usize, job: usize },
}

impl Instance {
    /// Assembles an instance from raw matrices, checking shapes and the
    /// zero-diagonal rule. `processing` is `[job][machine]`; each entry of
    /// `setup` is one machine's `(n + 1) × n` matrix whose first row holds
    /// the machine-start setups.
    pub fn new(
        machines: usize,
        jobs: usize,
        processing: Vec<Vec<Time>>,
        setup: Vec<Vec<Vec<Time>>>,
        id: impl Into<String>,
    ) -> Result<Self, InstanceError> {
        if machines == 0 || jobs == 0 {
            return Err(InstanceError::EmptyDimensions { machines, jobs });
        }
        if processing.len() != jobs || processing.iter().any(|row| row.len() != machines) {
            return Err(InstanceError::ProcessingShape {
                jobs,
                machines,
                rows: processing.len(),
                cols: processing.first().map_or(0, Vec::len),
            });
        }
        if setup.len() != machines {
            return Err(InstanceError::SetupShape {
                machine: setup.len(),
                expected_rows: jobs + 1,
                rows: 0,
                cols: jobs,
            });
        }
        for (k, matrix) in setup.iter().enumerate() {
            if matrix.len() != jobs + 1 {
                return Err(InstanceError::SetupShape {
                    machine: k + 1,
                    expected_rows: jobs + 1,
                    rows: matrix.len(),
                    cols: jobs,
                });
            }
            for row in matrix {
                if row.len() != jobs {
                    return Err(InstanceError::SetupRowWidth {
                        machine: k + 1,
                        width: row.len(),
                        cols: jobs,
                    });
                }
            }
            for j in 0..jobs {
                if matrix[j + 1][j] != 0 {
                    return Err(InstanceError::NonzeroDiagonal {
                        machine: k + 1,
                        job: j + 1,
                    });
                }
            }
        }
        Ok(Self {
            machines,
            jobs,
            processing,
            setup,
            id: id.into(),
        })
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Processing time of `job` on `machine` (both 0-based).
    pub fn processing(&self, job: usize, machine: usize) -> Time {
        self.processing[job][machine]
    }

    /// Setup time on `machine` before `job`, given the preceding job
    /// (`None` means `job` opens the machine's schedule).
    pub fn setup(&self, machine: usize, pred: Option<usize>, job: usize) -> Time {
        let row = match pred {
            None => 0,
            Some(p) => {
                debug_assert_ne!(p, job, "a job never follows itself");
                p + 1
            }
        };
        self.setup[machine][row][job]
    }

    /// Precomputes setup-plus-processing times for every (machine,
    /// predecessor, job) triple.
    pub fn adjusted_times(&self) -> AdjustedTimes {
        let ap = (0..self.machines)
            .map(|k| {
                (0..=self.jobs)
                    .map(|row| {
                        (0..self.jobs)
                            .map(|j| self.setup[k][row][j] + self.processing[j][k])
                            .collect()
                    })
                    .collect()
            })
            .collect();
        AdjustedTimes {
            machines: self.machines,
            jobs: self.jobs,
            ap,
        }
    }

    /// Canonical `UPMSP v1` text. [`Instance::parse`] inverts this exactly,
    /// including the id (carried in a `# name:` comment), so equal
    /// instances serialize to identical text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("UPMSP v1\n");
        let safe_id: String = self
            .id
            .chars()
            .map(|c| if c.is_whitespace() { '_' } else { c })
            .collect();
        let _ = writeln!(out, "# name: {safe_id}");
        let _ = writeln!(out, "m {} n {}", self.machines, self.jobs);
        out.push_str("P\n");
        for row in &self.processing {
            push_row(&mut out, row);
        }
        for (k, matrix) in self.setup.iter().enumerate() {
            let _ = writeln!(out, "S {}", k + 1);
            for row in matrix {
                push_row(&mut out, row);
            }
        }
        out
    }

    /// Parses `UPMSP v1` text. The id comes from a `# name:` comment when
    /// present, otherwise from `fallback_id` (callers typically pass the
    /// source filename).
    pub fn parse_named(text: &str, fallback_id: &str) -> Result<Self, ParseError> {
        let mut tokens = Tokens::new(text);
        tokens.expect_word("UPMSP")?;
        tokens.expect_word("v1")?;
        tokens.expect_word("m")?;
        let machines = tokens.expect_count("machine count")?;
        tokens.expect_word("n")?;
        let jobs = tokens.expect_count("job count")?;

        tokens.expect_word("P")?;
        let mut processing = Vec::with_capacity(jobs);
        for _ in 0..jobs {
            let mut row = Vec::with_capacity(machines);
            for _ in 0..machines {
                row.push(tokens.expect_time()?);
            }
            processing.push(row);
        }

        let mut setup = Vec::with_capacity(machines);
        for k in 1..=machines {
            tokens.expect_word("S")?;
            let label = tokens.expect_count("machine label")?;
            if label != k {
                return Err(tokens.error(format!(
                    "expected setup block for machine {k}, found S {label}"
                )));
            }
            let mut matrix = Vec::with_capacity(jobs + 1);
            for row_idx in 0..=jobs {
                let mut row = Vec::with_capacity(jobs);
                for col in 0..jobs {
                    let (value, line) = tokens.expect_time_at()?;
                    if row_idx == col + 1 && value != 0 {
                        return Err(ParseError {
                            line,
                            message: format!(
                                "nonzero diagonal: setup of job {} after itself on machine {k} must be 0",
                                col + 1
                            ),
                        });
                    }
                    row.push(value);
                }
                matrix.push(row);
            }
            setup.push(matrix);
        }
        tokens.expect_end()?;

        let id = tokens
            .declared_name
            .unwrap_or_else(|| fallback_id.to_string());
        Instance::new(machines, jobs, processing, setup, id).map_err(|e| ParseError {
            line: 0,
            message: e.to_string(),
        })
    }

    /// [`Instance::parse_named`] with a generic fallback id.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Self::parse_named(text, "instance")
    }
}

fn push_row(out: &mut String, row: &[Time]) {
    for (i, v) in row.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{v}");
    }
    out.push('\n');
}

/// A malformed `UPMSP v1` stream; `line` is 1-based (0 when the problem is
/// structural rather than tied to a specific line).
#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

/// Whitespace tokenizer with line tracking; `#` starts a comment running to
/// the end of the line. A `# name: <id>` comment declares the instance id.
struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    next: usize,
    last_line: usize,
    declared_name: Option<String>,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut items = Vec::new();
        let mut declared_name = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let (content, comment) = match raw.find('#') {
                Some(pos) => (&raw[..pos], Some(raw[pos + 1..].trim())),
                None => (raw, None),
            };
            if let Some(comment) = comment {
                if declared_name.is_none() {
                    if let Some(name) = comment.strip_prefix("name:") {
                        let name = name.trim();
                        if !name.is_empty() {
                            declared_name = Some(name.to_string());
                        }
                    }
                }
            }
            for token in content.split_whitespace() {
                items.push((line, token));
            }
        }
        Self {
            items,
            next: 0,
            last_line: 1,
            declared_name,
        }
    }

    fn error(&self, message: String) -> ParseError {
        ParseError {
            line: self.last_line,
            message,
        }
    }

    fn take(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        match self.items.get(self.next) {
            Some(&(line, token)) => {
                self.next += 1;
                self.last_line = line;
                Ok((line, token))
            }
            None => Err(ParseError {
                line: self.last_line,
                message: format!("unexpected end of input, expected {what}"),
            }),
        }
    }

    fn expect_word(&mut self, word: &str) -> Result<(), ParseError> {
        let (line, token) = self.take(&format!("`{word}`"))?;
        if token != word {
            return Err(ParseError {
                line,
                message: format!("expected `{word}`, found `{token}`"),
            });
        }
        Ok(())
    }

    fn expect_count(&mut self, what: &str) -> Result<usize, ParseError> {
        let (line, token) = self.take(what)?;
        match token.parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v),
            _ => Err(ParseError {
                line,
                message: format!("expected a positive integer for {what}, found `{token}`"),
            }),
        }
    }

    fn expect_time_at(&mut self) -> Result<(Time, usize), ParseError> {
        let (line, token) = self.take("a time value")?;
        match token.parse::<Time>() {
            Ok(v) => Ok((v, line)),
            Err(_) => {
                let detail = if token.starts_with('-') {
                    "times must be nonnegative"
                } else {
                    "expected a nonnegative integer"
                };
                Err(ParseError {
                    line,
                    message: format!("{detail}, found `{token}`"),
                })
            }
        }
    }

    fn expect_time(&mut self) -> Result<Time, ParseError> {
        self.expect_time_at().map(|(v, _)| v)
    }

    fn expect_end(&mut self) -> Result<(), ParseError> {
        match self.items.get(self.next) {
            None => Ok(()),
            Some(&(line, token)) => Err(ParseError {
                line,
                message: format!("trailing input after instance data, starting at `{token}`"),
            }),
        }
    }
}

/// Precomputed setup-plus-processing times: the edge weights of each
/// machine's job chain, and the only timing data evaluators touch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjustedTimes {
    machines: usize,
    jobs: usize,
    /// `ap[k][row][j]` with the same row convention as `Instance::setup`.
    ap: Vec<Vec<Vec<Time>>>,
}

impl AdjustedTimes {
    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    /// Setup-plus-processing time of `job` on `machine` after `pred`
    /// (`None` means `job` opens the machine's schedule).
    pub fn get(&self, machine: usize, pred: Option<usize>, job: usize) -> Time {
        let row = match pred {
            None => 0,
            Some(p) => {
                debug_assert_ne!(p, job, "a job never follows itself");
                p + 1
            }
        };
        self.ap[machine][row][job]
    }

    /// Finish time of `machine` running exactly `sequence`, starting idle.
    pub fn chain_finish(&self, machine: usize, sequence: &[usize]) -> Time {
        let mut finish = 0;
        let mut pred = None;
        for &job in sequence {
            finish += self.get(machine, pred, job);
            pred = Some(job);
        }
        finish
    }
}

/// Parameters for seeded uniform instance generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub machines: usize,
    pub jobs: usize,
    /// Inclusive bounds for processing times.
    pub p_low: Time,
    pub p_high: Time,
    /// Inclusive bounds for setup times.
    pub s_low: Time,
    pub s_high: Time,
}

/// Invalid generator parameters.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("machine and job counts must be at least 1 (got m={machines}, n={jobs})")]
    EmptyDimensions { machines: usize, jobs: usize },
    #[error("invalid range [{low}, {high}]: lower bound exceeds upper bound")]
    InvalidRange { low: Time, high: Time },
}

impl GeneratorSpec {
    pub fn new(
        seed: u64,
        machines: usize,
        jobs: usize,
        p_low: Time,
        p_high: Time,
        s_low: Time,
        s_high: Time,
    ) -> Result<Self, GeneratorError> {
        if machines == 0 || jobs == 0 {
            return Err(GeneratorError::EmptyDimensions { machines, jobs });
        }
        if p_low > p_high {
            return Err(GeneratorError::InvalidRange {
                low: p_low,
                high: p_high,
            });
        }
        if s_low > s_high {
            return Err(GeneratorError::InvalidRange {
                low: s_low,
                high: s_high,
            });
        }
        Ok(Self {
            seed,
            machines,
            jobs,
            p_low,
            p_high,
            s_low,
            s_high,
        })
    }

    /// The conventional benchmark family: processing and setup times both
    /// uniform on [50, 100].
    pub fn balanced(seed: u64, machines: usize, jobs: usize) -> Self {
        Self::new(seed, machines, jobs, 50, 100, 50, 100).expect("fixed bounds are valid")
    }

    /// Filename-safe identifier encoding every parameter.
    pub fn id(&self) -> String {
        format!(
            "m{}n{}-p{}-{}-s{}-{}-seed{}",
            self.machines, self.jobs, self.p_low, self.p_high, self.s_low, self.s_high, self.seed
        )
    }

    /// Draws an instance deterministically from the seed: processing times
    /// first (job-major), then each machine's setup matrix row by row,
    /// skipping the diagonal (which stays 0).
    pub fn generate(&self) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let processing = (0..self.jobs)
            .map(|_| {
                (0..self.machines)
                    .map(|_| rng.random_range(self.p_low..=self.p_high))
                    .collect()
            })
            .collect();
        let setup = (0..self.machines)
            .map(|_| {
                (0..=self.jobs)
                    .map(|row| {
                        (0..self.jobs)
                            .map(|j| {
                                if row == j + 1 {
                                    0
                                } else {
                                    rng.random_range(self.s_low..=self.s_high)
                                }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Instance::new(self.machines, self.jobs, processing, setup, self.id())
            .expect("generated matrices are dimensionally valid")
    }
}
