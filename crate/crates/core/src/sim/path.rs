use std::io::{self, Write};

use crate::levy::{DownProcessSpec, UpProcessSpec};
use crate::numfmt::sig12;

/// How a path was produced, which fixes how integrals over its pieces are
/// evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMode {
    /// Piecewise linear between jumps; zero hitting resolved analytically.
    Exact,
    /// Euler grid; each piece carries its left-endpoint value.
    Grid,
}

/// Stretch of the path on which `W` is linear (exact mode) or held at its
/// left-endpoint value (grid mode). Jumps happen only between pieces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub t: f64,
    pub dt: f64,
    /// W at `t` (after any jump at `t`).
    pub w: f64,
    /// Regulator L at `t`.
    pub l: f64,
    /// Unreflected netput X̃ at `t`.
    pub netput: f64,
    /// dW/dt inside the piece; zero in grid mode.
    pub slope: f64,
    /// dL/dt inside the piece; nonzero only while W is held at 0.
    pub l_rate: f64,
    /// J = 1.
    pub down: bool,
    /// Index k of the cycle `[T_{k−1}, T_k)` the piece belongs to (0 before
    /// any down period).
    pub period: u32,
}

impl Piece {
    pub fn end(&self) -> f64 {
        self.t + self.dt
    }

    /// W at `t + offset` for `offset` in `[0, dt)`.
    pub fn w_at(&self, offset: f64) -> f64 {
        (self.w + self.slope * offset).max(0.0)
    }

    pub fn l_at(&self, offset: f64) -> f64 {
        self.l + self.l_rate * offset
    }
}

/// The k-th down period `[T_{k−1}, S_k)`. `end`/`w_end` are `None` when the
/// horizon cut the period short.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DownPeriod {
    pub k: u32,
    pub start: f64,
    pub end: Option<f64>,
    pub w_start: f64,
    pub w_end: Option<f64>,
}

impl DownPeriod {
    pub fn is_complete(&self) -> bool {
        self.end.is_some()
    }

    /// Length of the part of the period inside `[lo, hi]`.
    pub fn time_within(&self, lo: f64, hi: f64) -> f64 {
        let end = self.end.unwrap_or(hi).min(hi);
        (end - self.start.max(lo)).max(0.0)
    }
}

/// State at the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathEnd {
    pub t: f64,
    pub w: f64,
    pub l: f64,
    pub netput: f64,
    pub down: bool,
}

/// Consumer of a path as it is generated. Pieces arrive in time order; a
/// down period is reported after its last piece.
pub trait PathObserver {
    fn piece(&mut self, piece: &Piece);
    fn down_period(&mut self, _period: &DownPeriod) {}
    fn end(&mut self, _end: &PathEnd) {}
}

impl<O: PathObserver + ?Sized> PathObserver for &mut O {
    fn piece(&mut self, piece: &Piece) {
        (**self).piece(piece)
    }
    fn down_period(&mut self, period: &DownPeriod) {
        (**self).down_period(period)
    }
    fn end(&mut self, end: &PathEnd) {
        (**self).end(end)
    }
}

/// Fans a path out to two observers.
pub struct Tee<A, B>(pub A, pub B);

impl<A: PathObserver, B: PathObserver> PathObserver for Tee<A, B> {
    fn piece(&mut self, piece: &Piece) {
        self.0.piece(piece);
        self.1.piece(piece);
    }
    fn down_period(&mut self, period: &DownPeriod) {
        self.0.down_period(period);
        self.1.down_period(period);
    }
    fn end(&mut self, end: &PathEnd) {
        self.0.end(end);
        self.1.end(end);
    }
}

/// Skeleton row `(t, W, L, J)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkeletonPoint {
    pub t: f64,
    pub w: f64,
    pub l: f64,
    pub j: u8,
}

/// A fully recorded path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub up: UpProcessSpec,
    pub down: DownProcessSpec,
    pub mode: PathMode,
    pub w0: f64,
    pub horizon: f64,
    pub pieces: Vec<Piece>,
    pub periods: Vec<DownPeriod>,
    pub end: PathEnd,
}

impl PathSample {
    pub(crate) fn empty(up: UpProcessSpec, down: DownProcessSpec, mode: PathMode, w0: f64, horizon: f64) -> Self {
        Self {
            up,
            down,
            mode,
            w0,
            horizon,
            pieces: Vec::new(),
            periods: Vec::new(),
            end: PathEnd {
                t: 0.0,
                w: w0,
                l: 0.0,
                netput: 0.0,
                down: false,
            },
        }
    }

    /// Feeds the recorded path to `obs` exactly as the simulator did.
    pub fn replay<O: PathObserver + ?Sized>(&self, obs: &mut O) {
        let mut periods = self.periods.iter().peekable();
        for piece in &self.pieces {
            // A period is reported once the path has moved past it.
            while let Some(p) = periods.peek() {
                match p.end {
                    Some(s) if s <= piece.t && !(piece.down && piece.period == p.k) => {
                        obs.down_period(p);
                        periods.next();
                    }
                    _ => break,
                }
            }
            obs.piece(piece);
        }
        for p in periods {
            obs.down_period(p);
        }
        obs.end(&self.end);
    }

    pub fn skeleton(&self) -> impl Iterator<Item = SkeletonPoint> + '_ {
        let end = (self.horizon > 0.0).then_some(SkeletonPoint {
            t: self.end.t,
            w: self.end.w,
            l: self.end.l,
            j: self.end.down as u8,
        });
        self.pieces
            .iter()
            .map(|p| SkeletonPoint {
                t: p.t,
                w: p.w,
                l: p.l,
                j: p.down as u8,
            })
            .chain(end)
    }

    pub fn completed_periods(&self) -> impl Iterator<Item = &DownPeriod> {
        self.periods.iter().filter(|p| p.is_complete())
    }

    /// Writes `t,W,L,J` at skeleton resolution.
    pub fn write_skeleton_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,W,L,J")?;
        for p in self.skeleton() {
            writeln!(out, "{},{},{},{}", sig12(p.t), sig12(p.w), sig12(p.l), p.j)?;
        }
        Ok(())
    }

    /// Writes `k,T_prev,S_k,W_at_T_prev,W_at_S_k` for completed down periods.
    pub fn write_boundaries_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "k,T_prev,S_k,W_at_T_prev,W_at_S_k")?;
        for p in self.completed_periods() {
            writeln!(
                out,
                "{},{},{},{},{}",
                p.k,
                sig12(p.start),
                sig12(p.end.unwrap_or(f64::NAN)),
                sig12(p.w_start),
                sig12(p.w_end.unwrap_or(f64::NAN)),
            )?;
        }
        Ok(())
    }

    /// Checks the structural invariants of a reflected path. `tol` bounds the
    /// pathwise identity error relative to the path's scale.
    pub fn check_invariants(&self, tol: f64) -> Result<(), String> {
        let mut prev_l = 0.0;
        let mut prev: Option<&Piece> = None;
        for p in &self.pieces {
            if p.w < 0.0 {
                return Err(format!("W < 0 at t = {}", p.t));
            }
            if p.l < prev_l {
                return Err(format!("L decreased at t = {}", p.t));
            }
            prev_l = p.l;
            let scale = 1.0 + self.w0 + p.netput.abs() + p.l;
            let gap = p.w - (self.w0 + p.netput + p.l);
            if gap.abs() > tol * scale {
                return Err(format!("W != w0 + X + L at t = {} (gap {gap})", p.t));
            }
            if let Some(q) = prev {
                if (q.end() - p.t).abs() > 1e-9 * (1.0 + p.t) {
                    return Err(format!("pieces not contiguous at t = {}", p.t));
                }
                if q.down && p.down && q.period == p.period && p.w + 1e-12 < q.w {
                    return Err(format!("W decreased inside a down period at t = {}", p.t));
                }
            }
            prev = Some(p);
        }
        for dp in &self.periods {
            let inside = |t: f64| t >= dp.start && dp.end.is_none_or(|s| t < s);
            for p in self.pieces.iter().filter(|p| p.dt > 0.0 && inside(p.t)) {
                if !p.down {
                    return Err(format!("J = 0 inside down period {} at t = {}", dp.k, p.t));
                }
            }
        }
        if self.horizon > 0.0 && self.end.l < prev_l {
            return Err("L decreased at the horizon".into());
        }
        Ok(())
    }
}

/// Records everything into a [`PathSample`].
pub struct PathRecorder {
    sample: PathSample,
}

impl PathRecorder {
    pub fn new(up: UpProcessSpec, down: DownProcessSpec, mode: PathMode, w0: f64, horizon: f64) -> Self {
        Self {
            sample: PathSample::empty(up, down, mode, w0, horizon),
        }
    }

    pub fn finish(self) -> PathSample {
        self.sample
    }
}

impl PathObserver for PathRecorder {
    fn piece(&mut self, piece: &Piece) {
        self.sample.pieces.push(*piece);
    }
    fn down_period(&mut self, period: &DownPeriod) {
        self.sample.periods.push(*period);
    }
    fn end(&mut self, end: &PathEnd) {
        self.sample.end = *end;
    }
}
