//! Output of one simulation: sample stream, tours and event log.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::rng::{stream_rng, Stream, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Output,
    RegenAccept,
    RegenReject,
    AddAccept,
    AddReject,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Output => "output",
            EventKind::RegenAccept => "regen-accept",
            EventKind::RegenReject => "regen-reject",
            EventKind::AddAccept => "add-accept",
            EventKind::AddReject => "add-reject",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

/// One tour: the stretch between consecutive regenerations.
#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    pub start_time: f64,
    pub length: f64,
    /// State the tour started from (a regeneration destination, or the initial draw).
    pub start_state: Vec<f64>,
    /// False only for a trailing tour cut off by a time horizon.
    pub complete: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunStats {
    /// Potential regeneration events, each of which evaluates the rate once.
    pub rate_evaluations: u64,
    /// Evaluations where the untruncated rate exceeded the dominating rate.
    pub truncation_exceedances: u64,
    pub regenerations: u64,
    /// Potential addition events (adaptive runs only).
    pub addition_proposals: u64,
    pub additions: u64,
    /// Addition events where `κ⁻` exceeded its dominating bound.
    pub bound_violations: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct SampleRef<'a> {
    pub time: f64,
    pub tour: u64,
    pub state: &'a [f64],
}

#[derive(Debug, Clone)]
pub struct RestoreRun {
    pub dim: usize,
    pub seed: u64,
    /// Process time represented by one output state (`1/Λ₀`, or the mesh spacing).
    pub output_weight: f64,
    pub tours: Vec<Tour>,
    /// Sum of all tour lengths, including a trailing incomplete tour.
    pub total_time: f64,
    pub events: Vec<Event>,
    pub stats: RunStats,
    sample_times: Vec<f64>,
    sample_tours: Vec<u64>,
    sample_states: Vec<f64>,
}

impl RestoreRun {
    pub(crate) fn new(dim: usize, seed: u64, output_weight: f64) -> Self {
        Self {
            dim,
            seed,
            output_weight,
            tours: Vec::new(),
            total_time: 0.0,
            events: Vec::new(),
            stats: RunStats::default(),
            sample_times: Vec::new(),
            sample_tours: Vec::new(),
            sample_states: Vec::new(),
        }
    }

    pub fn n_samples(&self) -> usize {
        self.sample_times.len()
    }

    /// Completed tours.
    pub fn n_tours(&self) -> usize {
        self.tours.iter().filter(|t| t.complete).count()
    }

    pub fn sample(&self, i: usize) -> SampleRef<'_> {
        SampleRef {
            time: self.sample_times[i],
            tour: self.sample_tours[i],
            state: &self.sample_states[i * self.dim..(i + 1) * self.dim],
        }
    }

    pub fn samples(&self) -> impl Iterator<Item = SampleRef<'_>> + '_ {
        (0..self.n_samples()).map(|i| self.sample(i))
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.sample_states.chunks_exact(self.dim.max(1))
    }

    /// Row-major `n × d` block of output states.
    pub fn flat_states(&self) -> &[f64] {
        &self.sample_states
    }

    pub fn truncation_exceedance_frac(&self) -> f64 {
        if self.stats.rate_evaluations == 0 {
            0.0
        } else {
            self.stats.truncation_exceedances as f64 / self.stats.rate_evaluations as f64
        }
    }

    pub(crate) fn push_sample(&mut self, time: f64, tour: u64, state: &[f64]) {
        self.sample_times.push(time);
        self.sample_tours.push(tour);
        self.sample_states.extend_from_slice(state);
    }

    /// Apply `f` to every stored state (e.g. mapping back to original coordinates).
    pub fn map_states(&mut self, f: impl Fn(&[f64]) -> Vec<f64>) {
        let d = self.dim;
        for chunk in self.sample_states.chunks_exact_mut(d) {
            let y = f(chunk);
            chunk.copy_from_slice(&y);
        }
        for tour in &mut self.tours {
            tour.start_state = f(&tour.start_state);
        }
    }

    /// `time,tour,x1,...,xd`.
    pub fn write_samples_csv(&self, mut out: impl Write) -> Result<()> {
        write!(out, "time,tour")?;
        for j in 1..=self.dim {
            write!(out, ",x{j}")?;
        }
        writeln!(out)?;
        for s in self.samples() {
            write!(out, "{},{}", s.time, s.tour)?;
            for v in s.state {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// `time,kind`.
    pub fn write_events_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "time,kind")?;
        for e in &self.events {
            writeln!(out, "{},{}", e.time, e.kind.as_str())?;
        }
        Ok(())
    }

    /// `tour,start_time,length,complete,x1,...,xd` with the tour's starting state.
    pub fn write_tours_csv(&self, mut out: impl Write) -> Result<()> {
        write!(out, "tour,start_time,length,complete")?;
        for j in 1..=self.dim {
            write!(out, ",x{j}")?;
        }
        writeln!(out)?;
        for (i, t) in self.tours.iter().enumerate() {
            write!(out, "{i},{},{},{}", t.start_time, t.length, t.complete)?;
            for v in &t.start_state {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Brownian motion with tour bookkeeping, shared by the engines.
pub(crate) struct Process {
    pub x: Vec<f64>,
    pub t: f64,
    pub tour: u64,
    tour_start: f64,
    tour_elapsed: f64,
    tour_state: Vec<f64>,
    pub clock: StreamRng,
    pub motion: StreamRng,
    pub accept: StreamRng,
    pub regen: StreamRng,
    pub run: RestoreRun,
    record_events: bool,
}

impl Process {
    pub fn new(x0: Vec<f64>, seed: u64, output_weight: f64, record_events: bool) -> Self {
        let dim = x0.len();
        Self {
            tour_state: x0.clone(),
            x: x0,
            t: 0.0,
            tour: 0,
            tour_start: 0.0,
            tour_elapsed: 0.0,
            clock: stream_rng(seed, Stream::Clock),
            motion: stream_rng(seed, Stream::Motion),
            accept: stream_rng(seed, Stream::Accept),
            regen: stream_rng(seed, Stream::Regeneration),
            run: RestoreRun::new(dim, seed, output_weight),
            record_events,
        }
    }

    pub fn tour_start(&self) -> f64 {
        self.tour_start
    }

    pub fn exp_clock(&mut self, rate: f64) -> f64 {
        let e: f64 = self.clock.sample(rand_distr::Exp1);
        e / rate
    }

    pub fn uniform(&mut self) -> f64 {
        self.accept.random()
    }

    /// Move the Brownian motion forward by `dt`.
    pub fn advance(&mut self, dt: f64) {
        brownian_step(&mut self.x, dt, &mut self.motion);
        self.t += dt;
        self.tour_elapsed += dt;
    }

    /// Let time pass without moving (used to stop exactly at a time horizon).
    pub fn idle(&mut self, dt: f64) {
        self.t += dt;
        self.tour_elapsed += dt;
    }

    pub fn log(&mut self, kind: EventKind) {
        if self.record_events {
            self.run.events.push(Event { time: self.t, kind });
        }
    }

    pub fn record_output(&mut self) {
        self.run.push_sample(self.t, self.tour, &self.x);
        self.log(EventKind::Output);
    }

    /// Close the current tour and restart from `destination`.
    pub fn regenerate(&mut self, destination: Vec<f64>) {
        self.run.stats.regenerations += 1;
        self.log(EventKind::RegenAccept);
        self.close_tour(true);
        self.tour += 1;
        self.tour_start = self.t;
        self.tour_elapsed = 0.0;
        self.tour_state = destination.clone();
        self.x = destination;
    }

    fn close_tour(&mut self, complete: bool) {
        self.run.tours.push(Tour {
            start_time: self.tour_start,
            length: self.tour_elapsed,
            start_state: std::mem::take(&mut self.tour_state),
            complete,
        });
    }

    /// Finish the run; a trailing tour with positive elapsed time is kept as incomplete.
    pub fn finish(mut self) -> RestoreRun {
        if self.tour_elapsed > 0.0 {
            self.close_tour(false);
        }
        self.run.total_time = self.run.tours.iter().map(|t| t.length).sum();
        self.run
    }
}

pub(crate) fn brownian_step(x: &mut [f64], dt: f64, rng: &mut StreamRng) {
    let sd = dt.sqrt();
    for xi in x.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *xi += sd * z;
    }
}
