//! The streaming loop: fixed-length windows, each run through
//! segment -> features -> classify -> pace -> trigger, with all state
//! carried across window boundaries.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use crate::audio::read_wav;
use crate::config::SessionConfig;
use crate::error::{PipelineError, StageError};
use crate::evaluation::{evaluate, AnnotationTrack, EvaluationReport, DEFAULT_TOLERANCE_S};
use crate::eventlog::{render_event_log, EventLogRecord, ReorderBuffer};
use crate::features::{classify, ChewScorer, HeuristicScorer, MelExtractor, ScoreDecision};
use crate::intervention::{post_meal_summary, PromptEvent, PromptLibrary, SessionSummary};
use crate::report::{summary_csv, summary_text, timing_text};
use crate::segmentation::{extract_clip, frame_levels_from, frame_time_s, SegmentBounds};
use crate::session::{new_session, SessionState};
use crate::timeline::IngestionEvent;

/// Audio kept behind the processing point for clip extraction.
const HISTORY_S: f64 = 1.0;

/// A classified candidate, kept for accuracy scoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateDecision {
    pub start_s: f64,
    pub end_s: f64,
    pub decision: ScoreDecision,
}

pub struct Pipeline {
    state: SessionState,
    library: PromptLibrary,
    scorer: Box<dyn ChewScorer>,
    mel: MelExtractor,
    /// Samples not yet processed.
    pending: Vec<f32>,
    /// Processed audio starting at absolute sample `history_start`.
    history: Vec<f32>,
    history_start: u64,
    samples_processed: u64,
    window_index: u64,
    next_segment_id: u64,
    decisions: Vec<CandidateDecision>,
    buffer: ReorderBuffer,
    window_times: Vec<Duration>,
    finished: bool,
}

impl std::fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pipeline")
            .field("samples_processed", &self.samples_processed)
            .field("window_index", &self.window_index)
            .field("scorer", &self.scorer.description())
            .finish()
    }
}

impl Pipeline {
    /// Start a session. The header and the pre-meal prompt are queued at
    /// once.
    pub fn new(
        config: SessionConfig,
        library: PromptLibrary,
        scorer: Box<dyn ChewScorer>,
    ) -> Result<Self, PipelineError> {
        let mut state = new_session(config)?;
        let mel = MelExtractor::new(&state.config);
        let mut buffer = ReorderBuffer::default();
        buffer.push(EventLogRecord::header(
            state.config.sample_rate_hz,
            state.config.window_len_s,
            state.config.rng_seed,
            scorer.description(),
        ));
        let goal = state.policy.pre_meal_prompt(&library, &state.config);
        state.timeline.append_prompt(goal.clone()).map_err(|e| stage(0, e))?;
        buffer.push(EventLogRecord::prompt(&goal));
        Ok(Self {
            state,
            library,
            scorer,
            mel,
            pending: Vec::new(),
            history: Vec::new(),
            history_start: 0,
            samples_processed: 0,
            window_index: 0,
            next_segment_id: 0,
            decisions: Vec::new(),
            buffer,
            window_times: Vec::new(),
            finished: false,
        })
    }

    /// Pipeline with the heuristic scorer and the configured (or bundled)
    /// prompt library.
    pub fn with_defaults(config: SessionConfig) -> Result<Self, PipelineError> {
        let library = match &config.prompt_library_path {
            Some(p) => PromptLibrary::load(p)?,
            None => PromptLibrary::bundled(),
        };
        let scorer = Box::new(HeuristicScorer::new(&config));
        Self::new(config, library, scorer)
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn decisions(&self) -> &[CandidateDecision] {
        &self.decisions
    }

    /// Wall-clock processing time of every completed window.
    pub fn window_times(&self) -> &[Duration] {
        &self.window_times
    }

    pub fn duration_s(&self) -> f64 {
        self.samples_processed as f64 / self.state.config.sample_rate_hz as f64
    }

    /// Feed audio; every complete window is processed immediately. Returns
    /// the log records that became final.
    pub fn push_samples(&mut self, samples: &[f32]) -> Result<Vec<EventLogRecord>, PipelineError> {
        assert!(!self.finished, "push after finish");
        self.pending.extend_from_slice(samples);
        let window = self.state.config.window_samples();
        let mut out = Vec::new();
        while self.pending.len() >= window {
            let block: Vec<f32> = self.pending.drain(..window).collect();
            self.process_window(&block)?;
            out.extend(self.release());
        }
        Ok(out)
    }

    /// End of stream: process the partial last window, close any open
    /// segment, finalize the meal and append the summary.
    pub fn finish(&mut self) -> Result<(Vec<EventLogRecord>, SessionSummary), PipelineError> {
        assert!(!self.finished, "finish called twice");
        if !self.pending.is_empty() {
            let block = std::mem::take(&mut self.pending);
            self.process_window(&block)?;
        }
        self.finished = true;
        let window = self.window_index;
        let cfg = self.state.config.clone();
        if let Some(bounds) = self.state.segmenter.finish(&cfg) {
            let now = self.duration_s();
            self.handle_segment(&bounds, now).map_err(|e| stage(window, e))?;
        }
        let step = self.state.pace.finalize(&cfg);
        if let Some(swallow) = step.swallow {
            self.state.timeline.append_event(swallow.clone()).map_err(|e| stage(window, e))?;
            self.buffer.push(EventLogRecord::event(&swallow, swallow.time_s, true));
        }
        let duration = self.duration_s();
        let summary = post_meal_summary(&self.state.timeline, &step.estimate, duration);
        let mut records = self.buffer.release_all();
        let last = records.last().map_or(0.0, |r| r.time_s());
        records.push(EventLogRecord::summary(duration.max(last), &summary));
        Ok((records, summary))
    }

    fn process_window(&mut self, block: &[f32]) -> Result<(), PipelineError> {
        let started = Instant::now();
        let window = self.window_index;
        self.process_block(block).map_err(|e| stage(window, e))?;
        self.window_times.push(started.elapsed());
        self.window_index += 1;
        Ok(())
    }

    fn process_block(&mut self, block: &[f32]) -> Result<(), StageError> {
        let cfg = self.state.config.clone();
        let frame = cfg.frame_samples();
        let first_frame = self.samples_processed / frame as u64;
        self.history.extend_from_slice(block);
        self.samples_processed += block.len() as u64;

        if block.len() >= frame {
            for level in frame_levels_from(block, first_frame, &cfg)? {
                if let Some(bounds) = self.state.segmenter.step(&level, &cfg)? {
                    let now = frame_time_s(level.index + 1, &cfg);
                    self.handle_segment(&bounds, now)?;
                }
            }
        }

        let end_s = self.duration_s();
        let estimate = self.state.pace.estimate(end_s, &cfg);
        self.buffer.push(EventLogRecord::pace(self.window_index, &estimate));
        if let Some(prompt) = self.state.policy.maybe_prompt(&self.library, &estimate, end_s, &cfg) {
            self.deliver(prompt)?;
        }

        let keep_from = self
            .samples_processed
            .saturating_sub((HISTORY_S * cfg.sample_rate_hz as f64) as u64)
            .max(self.history_start);
        self.history.drain(..(keep_from - self.history_start) as usize);
        self.history_start = keep_from;
        Ok(())
    }

    /// Classify one closed segment and push a chew through pace and policy.
    /// `now_s` is the end of the frame that closed it.
    fn handle_segment(&mut self, bounds: &SegmentBounds, now_s: f64) -> Result<(), StageError> {
        let cfg = &self.state.config;
        let id = self.next_segment_id;
        self.next_segment_id += 1;
        let candidate = extract_clip(&self.history, self.history_start, bounds, id, cfg)?;
        let mel = self.mel.compute(&candidate.clip)?;
        let p = self.scorer.score(&candidate, &mel)?;
        let decision = classify(id, p, cfg);
        self.decisions.push(CandidateDecision { start_s: bounds.start_s, end_s: bounds.end_s, decision });
        if !decision.is_chew {
            return Ok(());
        }

        let step = self.state.pace.step(bounds.start_s, cfg)?;
        if let Some(swallow) = &step.swallow {
            self.state.timeline.append_event(swallow.clone())?;
            self.buffer.push(EventLogRecord::event(swallow, swallow.time_s, false));
        }
        let chew = IngestionEvent::chew(bounds.start_s, p, id);
        self.state.timeline.append_event(chew.clone())?;
        self.buffer.push(EventLogRecord::event(&chew, bounds.end_s, false));

        if step.swallow.is_some() {
            let cfg = self.state.config.clone();
            let estimate = self.state.pace.estimate(now_s, &cfg);
            if let Some(prompt) = self.state.policy.maybe_prompt(&self.library, &estimate, now_s, &cfg) {
                self.deliver(prompt)?;
            }
        }
        Ok(())
    }

    fn deliver(&mut self, prompt: PromptEvent) -> Result<(), StageError> {
        self.state.timeline.append_prompt(prompt.clone())?;
        self.buffer.push(EventLogRecord::prompt(&prompt));
        Ok(())
    }

    /// Records that no future record can precede. A future chew starts no
    /// earlier than the open segment (or the processed end); a future
    /// swallow sits halfway between the last chew and a future chew, or
    /// `swallow_abs_gap_s` after the last chew at meal end.
    fn release(&mut self) -> Vec<EventLogRecord> {
        let cfg = &self.state.config;
        let h = self.state.segmenter.pending_start_s(cfg).unwrap_or(f64::INFINITY).min(self.duration_s());
        let horizon = match self.state.pace.last_chew_time_s {
            None => h,
            Some(last) => ((last + h) / 2.0).min(last + cfg.swallow_abs_gap_s),
        };
        self.buffer.release(horizon)
    }
}

fn stage(window: u64, e: impl Into<StageError>) -> PipelineError {
    PipelineError::Stage { window, source: e.into() }
}

/// Everything a replay produces.
#[derive(Debug)]
pub struct ReplayOutcome {
    pub records: Vec<EventLogRecord>,
    pub summary: SessionSummary,
    pub evaluation: Option<EvaluationReport>,
    pub decisions: Vec<CandidateDecision>,
    pub window_times: Vec<Duration>,
    pub duration_s: f64,
}

impl ReplayOutcome {
    pub fn chew_times(&self) -> Vec<f64> {
        crate::eventlog::chew_times(&self.records)
    }

    pub fn mean_window_ms(&self) -> f64 {
        if self.window_times.is_empty() {
            return 0.0;
        }
        self.window_times.iter().map(|d| d.as_secs_f64() * 1000.0).sum::<f64>() / self.window_times.len() as f64
    }
}

/// Run a whole sample buffer through a pipeline and optionally score it.
pub fn replay_samples(
    mut pipeline: Pipeline,
    samples: &[f32],
    truth: Option<&AnnotationTrack>,
) -> Result<ReplayOutcome, PipelineError> {
    let mut records = pipeline.push_samples(samples)?;
    let (tail, summary) = pipeline.finish()?;
    records.extend(tail);
    let duration_s = pipeline.duration_s();
    let decisions = pipeline.decisions().to_vec();
    let evaluation = match truth {
        Some(t) => {
            let pred = crate::eventlog::chew_times(&records);
            let d: Vec<(f64, bool)> = decisions.iter().map(|c| (c.start_s, c.decision.is_chew)).collect();
            Some(evaluate(&pred, Some(&d), t, Some(duration_s.max(t.duration_s())), DEFAULT_TOLERANCE_S)?)
        }
        None => None,
    };
    Ok(ReplayOutcome {
        records,
        summary,
        evaluation,
        decisions,
        window_times: pipeline.window_times().to_vec(),
        duration_s,
    })
}

/// Inputs to [`run_replay`].
#[derive(Debug, Clone, Default)]
pub struct ReplayRequest {
    pub wav: PathBuf,
    pub truth: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

/// Replay a WAV file and write `events.jsonl`, `summary.txt`,
/// `summary.csv`, `timing.txt` and, with a truth track, `evaluation.txt`
/// and `evaluation.csv` into the output directory.
pub fn run_replay(request: &ReplayRequest, pipeline: Pipeline) -> Result<ReplayOutcome, PipelineError> {
    let samples = read_wav(&request.wav)?;
    let truth = request.truth.as_deref().map(AnnotationTrack::load).transpose()?;
    let outcome = replay_samples(pipeline, &samples, truth.as_ref())?;
    if let Some(dir) = &request.out_dir {
        write_outputs(dir, &outcome)?;
    }
    Ok(outcome)
}

pub fn write_outputs(dir: &Path, outcome: &ReplayOutcome) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    let write = |name: &str, text: String| {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| PipelineError::io(&path, e))
    };
    let log = render_event_log(&outcome.records).map_err(|e| PipelineError::io(&dir.join("events.jsonl"), e))?;
    write("events.jsonl", log)?;
    write("summary.txt", summary_text(&outcome.summary))?;
    write("summary.csv", summary_csv(&outcome.summary))?;
    write("timing.txt", timing_text(&outcome.window_times))?;
    if let Some(report) = &outcome.evaluation {
        write("evaluation.txt", report.to_text())?;
        write("evaluation.csv", report.to_csv())?;
    }
    Ok(())
}

/// Bytes read from the input per channel message.
const READ_CHUNK: usize = 4096;
/// Messages the reader may run ahead of processing.
const QUEUE_DEPTH: usize = 16;

/// What a stream run ended with.
#[derive(Debug)]
pub struct StreamOutcome {
    pub summary: SessionSummary,
    pub samples: u64,
    /// Set when the input ended on half a sample.
    pub truncated_byte: bool,
}

/// Read raw little-endian PCM16 from `input` on a reader thread and write
/// the event log to `output` as records become final.
pub fn run_stream<R, W>(input: R, output: &mut W, mut pipeline: Pipeline) -> Result<StreamOutcome, PipelineError>
where
    R: Read + Send + 'static,
    W: Write,
{
    let (tx, rx) = mpsc::sync_channel::<std::io::Result<Vec<u8>>>(QUEUE_DEPTH);
    let reader = std::thread::spawn(move || {
        let mut input = input;
        loop {
            let mut buf = vec![0u8; READ_CHUNK];
            match input.read(&mut buf) {
                Ok(0) => break,
                Ok(n) => {
                    buf.truncate(n);
                    if tx.send(Ok(buf)).is_err() {
                        break;
                    }
                }
                Err(e) if e.kind() == std::io::ErrorKind::Interrupted => continue,
                Err(e) => {
                    let _ = tx.send(Err(e));
                    break;
                }
            }
        }
    });

    let stdout_err = |e: std::io::Error| PipelineError::Io { path: "<output>".into(), message: e.to_string() };
    let emit = |records: Vec<EventLogRecord>, output: &mut W| -> Result<(), PipelineError> {
        for r in records {
            writeln!(output, "{}", r.render()).map_err(stdout_err)?;
        }
        output.flush().map_err(stdout_err)
    };

    let mut carry: Option<u8> = None;
    let mut samples = 0u64;
    for msg in rx {
        let bytes = msg.map_err(|e| PipelineError::Io { path: "<input>".into(), message: e.to_string() })?;
        let mut pcm = Vec::with_capacity(bytes.len() / 2 + 1);
        let mut iter = bytes.into_iter();
        if let Some(lo) = carry.take() {
            match iter.next() {
                Some(hi) => pcm.push(i16::from_le_bytes([lo, hi])),
                None => carry = Some(lo),
            }
        }
        let rest: Vec<u8> = iter.collect();
        let mut pairs = rest.chunks_exact(2);
        for pair in &mut pairs {
            pcm.push(i16::from_le_bytes([pair[0], pair[1]]));
        }
        if let [b] = pairs.remainder() {
            carry = Some(*b);
        }
        samples += pcm.len() as u64;
        let floats: Vec<f32> = pcm.into_iter().map(crate::audio::pcm_to_f32).collect();
        let records = pipeline.push_samples(&floats)?;
        emit(records, output)?;
    }
    let _ = reader.join();
    let (records, summary) = pipeline.finish()?;
    emit(records, output)?;
    Ok(StreamOutcome { summary, samples, truncated_byte: carry.is_some() })
}
