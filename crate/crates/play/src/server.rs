//! One live session: owns the environment, ticks it, streams frames and
//! state, and records every episode.

use crate::keymap::{parse_buttons, KeySnapshot};
use crate::protocol::{
    decode_client, decode_server, encode_frame, encode_server, encode_text, read_packet, write_packet, ClientMsg, Frame, ProtocolError, ServerMsg,
    StateLine,
};
use crate::recording::{EpisodeRecording, Recorder};
use crate::PlayError;
use hasard_core::env::{ActionMode, Env, EnvSpec};
use hasard_core::rng::derive_seed;
use std::io::{BufReader, BufWriter};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, TryRecvError};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};
use tungstenite::protocol::Role;
use tungstenite::{Message, WebSocket};

/// Real-time length of one env step: 4 ticks at 35 ticks per second.
pub const STEP_DURATION: Duration = Duration::from_nanos(4_000_000_000 / 35);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pacing {
    /// One step every [`STEP_DURATION`] using the latest key snapshot.
    RealTime,
    /// One step per received `KEYS` line, using exactly those keys.
    Lockstep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransportKind {
    WebSocket,
    Tcp,
}

#[derive(Clone, Debug)]
pub struct ServeConfig {
    pub spec: EnvSpec,
    pub width: usize,
    pub height: usize,
    pub pacing: Pacing,
    pub record_dir: Option<PathBuf>,
    /// Prefix for recording file names, so sessions sharing a directory
    /// do not overwrite each other.
    pub session: u32,
}

impl ServeConfig {
    /// Humans get the full button set.
    pub fn new(mut spec: EnvSpec) -> Self {
        spec.action_mode = ActionMode::FullDiscrete;
        Self { spec, width: 128, height: 72, pacing: Pacing::RealTime, record_dir: None, session: 0 }
    }
}

/// Sends server messages to the client.
pub trait Outbound: Send {
    fn send(&mut self, msg: &ServerMsg) -> Result<(), PlayError>;
}

/// Receives client messages; `Ok(None)` means the client went away.
pub trait Inbound: Send {
    fn recv(&mut self) -> Result<Option<ClientMsg>, PlayError>;
}

struct TcpOut(BufWriter<TcpStream>);

impl Outbound for TcpOut {
    fn send(&mut self, msg: &ServerMsg) -> Result<(), PlayError> {
        write_packet(&mut self.0, &encode_server(msg))?;
        Ok(())
    }
}

struct TcpIn(BufReader<TcpStream>);

impl Inbound for TcpIn {
    fn recv(&mut self) -> Result<Option<ClientMsg>, PlayError> {
        match read_packet(&mut self.0) {
            Ok(Some((tag, payload))) => Ok(Some(decode_client(tag, payload)?)),
            Ok(None) => Ok(None),
            Err(ProtocolError::Io(_)) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }
}

pub fn tcp_transport(stream: TcpStream) -> Result<(Box<dyn Outbound>, Box<dyn Inbound>), PlayError> {
    stream.set_nodelay(true)?;
    let reader = stream.try_clone()?;
    Ok((Box::new(TcpOut(BufWriter::new(stream))), Box::new(TcpIn(BufReader::new(reader)))))
}

struct WsOut(WebSocket<TcpStream>);

impl Outbound for WsOut {
    fn send(&mut self, msg: &ServerMsg) -> Result<(), PlayError> {
        let m = match msg {
            ServerMsg::Frame(f) => Message::Binary(encode_frame(f)),
            ServerMsg::State(s) => Message::Text(s.to_string()),
        };
        self.0.send(m)?;
        Ok(())
    }
}

struct WsIn(WebSocket<TcpStream>);

impl Inbound for WsIn {
    fn recv(&mut self) -> Result<Option<ClientMsg>, PlayError> {
        loop {
            match self.0.read() {
                Ok(Message::Text(t)) => return Ok(Some(t.trim_end().parse()?)),
                Ok(Message::Close(_)) => return Ok(None),
                Ok(_) => {}
                Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed | tungstenite::Error::Io(_)) => {
                    return Ok(None)
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
}

/// Completes the WebSocket handshake and splits the socket into a writer
/// and a reader over two handles of the same stream.
pub fn ws_transport(stream: TcpStream) -> Result<(Box<dyn Outbound>, Box<dyn Inbound>), PlayError> {
    stream.set_nodelay(true)?;
    let ws = tungstenite::accept(stream).map_err(|e| PlayError::Handshake(e.to_string()))?;
    let reader = ws.get_ref().try_clone()?;
    let ws_in = WebSocket::from_raw_socket(reader, Role::Server, None);
    Ok((Box::new(WsOut(ws)), Box::new(WsIn(ws_in))))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SessionSummary {
    /// (R, C) of every completed episode.
    pub episodes: Vec<(f64, f64)>,
    pub recordings: Vec<PathBuf>,
    /// A started episode was cut short by the disconnect.
    pub aborted: bool,
}

impl SessionSummary {
    pub fn means(&self) -> Option<(f64, f64)> {
        if self.episodes.is_empty() {
            return None;
        }
        let n = self.episodes.len() as f64;
        Some((self.episodes.iter().map(|e| e.0).sum::<f64>() / n, self.episodes.iter().map(|e| e.1).sum::<f64>() / n))
    }
}

enum Event {
    Keys(Vec<String>),
    Reset,
    Gone,
}

struct Session {
    cfg: ServeConfig,
    env: Env,
    recorder: Recorder,
    out: Box<dyn Outbound>,
    seq: u32,
    episode: u64,
    summary: SessionSummary,
}

fn now_secs() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl Session {
    fn state_line(&self) -> StateLine {
        let info = self.env.info();
        StateLine {
            step: self.env.steps(),
            reward: info.episode_return,
            cost: info.episode_cost,
            budget: self.env.spec().budget(),
            done: self.env.is_finished(),
        }
    }

    fn send_frame(&mut self) -> Result<(), PlayError> {
        let frames = self.env.render(self.cfg.width, self.cfg.height);
        let frame = Frame { seq: self.seq, width: self.cfg.width as u16, height: self.cfg.height as u16, rgb: frames.rgb };
        self.seq = self.seq.wrapping_add(1);
        self.out.send(&ServerMsg::Frame(frame))
    }

    fn send_state(&mut self) -> Result<(), PlayError> {
        let s = self.state_line();
        self.out.send(&ServerMsg::State(s))
    }

    fn step(&mut self, keys: &[String], render: bool) -> Result<(), PlayError> {
        let choices = self.env.encoding().from_buttons(&parse_buttons(keys));
        self.env.step_choices(&choices)?;
        self.recorder.record(&self.env, &choices);
        if render {
            self.send_frame()?;
        }
        self.send_state()?;
        if self.env.is_finished() {
            self.close_episode()?;
        }
        Ok(())
    }

    fn save(&mut self, rec: EpisodeRecording) -> Result<(), PlayError> {
        if let Some(dir) = &self.cfg.record_dir {
            let suffix = if rec.footer.is_some_and(|f| f.aborted) { "aborted.rec" } else { "rec" };
            let path = dir.join(format!("s{:03}_ep{:04}.{suffix}", self.cfg.session, self.episode));
            rec.save(&path)?;
            self.summary.recordings.push(path);
        }
        Ok(())
    }

    fn close_episode(&mut self) -> Result<(), PlayError> {
        let fresh = Recorder::start(&self.env, 0);
        let rec = std::mem::replace(&mut self.recorder, fresh).finish(&self.env);
        let footer = rec.footer.expect("finish sets the footer");
        self.summary.episodes.push((footer.reward, footer.cost));
        self.save(rec)?;
        let (r, c) = self.summary.means().expect("just pushed");
        log::info!("episodes {} mean R {r:.3} mean C {c:.3}", self.summary.episodes.len());
        Ok(())
    }

    /// Drops an unfinished episode (keeping it as aborted if it moved).
    fn abort_episode(&mut self) -> Result<(), PlayError> {
        if !self.env.is_finished() && self.env.steps() > 0 {
            let fresh = Recorder::start(&self.env, 0);
            let rec = std::mem::replace(&mut self.recorder, fresh).finish(&self.env);
            self.summary.aborted = true;
            self.save(rec)?;
        }
        Ok(())
    }

    fn reset(&mut self) -> Result<(), PlayError> {
        self.abort_episode()?;
        self.summary.aborted = false;
        self.episode += 1;
        self.env.reset(derive_seed(self.cfg.spec.seed, self.episode));
        self.recorder = Recorder::start(&self.env, now_secs());
        self.send_frame()?;
        self.send_state()
    }
}

fn spawn_reader(mut inbound: Box<dyn Inbound>, keys: Arc<KeySnapshot>) -> Receiver<Event> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || loop {
        let ev = match inbound.recv() {
            Ok(Some(ClientMsg::Keys(k))) => {
                keys.store(&parse_buttons(&k));
                Event::Keys(k)
            }
            Ok(Some(ClientMsg::Reset)) => Event::Reset,
            Ok(None) => Event::Gone,
            Err(e) => {
                log::warn!("dropping client message: {e}");
                continue;
            }
        };
        let gone = matches!(ev, Event::Gone);
        if tx.send(ev).is_err() || gone {
            break;
        }
    });
    rx
}

/// Runs one client session until it disconnects.
pub fn run_session(cfg: ServeConfig, out: Box<dyn Outbound>, inbound: Box<dyn Inbound>) -> Result<SessionSummary, PlayError> {
    let mut spec = cfg.spec.clone();
    spec.seed = derive_seed(cfg.spec.seed, 0);
    let (env, _) = Env::new(spec)?;
    if let Some(dir) = &cfg.record_dir {
        std::fs::create_dir_all(dir)?;
    }
    let keys = Arc::new(KeySnapshot::default());
    let events = spawn_reader(inbound, keys.clone());
    let recorder = Recorder::start(&env, now_secs());
    let pacing = cfg.pacing;
    let mut s = Session { cfg, env, recorder, out, seq: 0, episode: 0, summary: SessionSummary::default() };
    s.send_frame()?;
    s.send_state()?;

    let mut next_tick = Instant::now() + STEP_DURATION;
    loop {
        if s.env.is_finished() || pacing == Pacing::Lockstep {
            // Block for the next client message.
            match events.recv().unwrap_or(Event::Gone) {
                Event::Gone => break,
                Event::Reset => {
                    s.reset()?;
                    next_tick = Instant::now() + STEP_DURATION;
                }
                Event::Keys(k) if pacing == Pacing::Lockstep && !s.env.is_finished() => s.step(&k, true)?,
                Event::Keys(_) => {}
            }
            continue;
        }
        let mut gone = false;
        let mut reset = false;
        loop {
            match events.try_recv() {
                Ok(Event::Gone) | Err(TryRecvError::Disconnected) => {
                    gone = true;
                    break;
                }
                Ok(Event::Reset) => reset = true,
                Ok(Event::Keys(_)) => {}
                Err(TryRecvError::Empty) => break,
            }
        }
        if gone {
            break;
        }
        if reset {
            s.reset()?;
            next_tick = Instant::now() + STEP_DURATION;
            continue;
        }
        let wait = next_tick.saturating_duration_since(Instant::now());
        if !wait.is_zero() {
            // Wake early for a disconnect or reset; key changes just update the snapshot.
            match events.recv_timeout(wait) {
                Ok(Event::Gone) | Err(RecvTimeoutError::Disconnected) => break,
                Ok(Event::Reset) => {
                    s.reset()?;
                    next_tick = Instant::now() + STEP_DURATION;
                    continue;
                }
                Ok(Event::Keys(_)) | Err(RecvTimeoutError::Timeout) => {}
            }
            if Instant::now() < next_tick {
                continue;
            }
        }
        let held: Vec<String> = keys.load().iter().map(|b| b.name().to_string()).collect();
        // Behind schedule by more than a step: skip the frame, never the step.
        let render = Instant::now() < next_tick + STEP_DURATION;
        s.step(&held, render)?;
        next_tick += STEP_DURATION;
    }
    s.abort_episode()?;
    Ok(s.summary)
}

/// Accepts one client on `listener` and runs its session.
pub fn serve_one(listener: &TcpListener, cfg: ServeConfig, kind: TransportKind) -> Result<SessionSummary, PlayError> {
    let (stream, peer) = listener.accept()?;
    log::info!("client connected from {peer}");
    let (out, inbound) = match kind {
        TransportKind::Tcp => tcp_transport(stream)?,
        TransportKind::WebSocket => ws_transport(stream)?,
    };
    run_session(cfg, out, inbound)
}

/// Blocking client for the raw-TCP transport.
pub struct TcpClient {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
}

impl TcpClient {
    pub fn connect(addr: impl std::net::ToSocketAddrs) -> Result<Self, PlayError> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let reader = BufReader::new(stream.try_clone()?);
        Ok(Self { reader, writer: BufWriter::new(stream) })
    }

    pub fn send(&mut self, msg: &ClientMsg) -> Result<(), PlayError> {
        write_packet(&mut self.writer, &encode_text(&msg.to_string()))?;
        Ok(())
    }

    pub fn recv(&mut self) -> Result<Option<ServerMsg>, PlayError> {
        match read_packet(&mut self.reader)? {
            Some((tag, payload)) => Ok(Some(decode_server(tag, payload)?)),
            None => Ok(None),
        }
    }

    /// Next STATE, skipping frames.
    pub fn next_state(&mut self) -> Result<Option<StateLine>, PlayError> {
        while let Some(msg) = self.recv()? {
            if let ServerMsg::State(s) = msg {
                return Ok(Some(s));
            }
        }
        Ok(None)
    }
}
