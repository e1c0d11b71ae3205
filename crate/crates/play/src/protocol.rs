//! Wire format shared by the TCP and WebSocket transports.
//!
//! Every packet is a 4-byte big-endian payload length, a 1-byte tag and the
//! payload. FRAME payloads are `seq u32, width u16, height u16` (big-endian)
//! followed by `width * height * 3` RGB bytes. Text payloads are one UTF-8
//! line without the newline.

use std::fmt;
use std::io::{self, Read, Write};
use std::str::FromStr;
use thiserror::Error;

pub const TAG_FRAME: u8 = 0x01;
pub const TAG_TEXT: u8 = 0x02;
/// Upper bound on a single payload; larger lengths are treated as corrupt.
pub const MAX_PAYLOAD: usize = 64 << 20;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("unknown packet tag {0:#04x}")]
    UnknownTag(u8),
    #[error("payload of {0} bytes exceeds the limit")]
    TooLarge(usize),
    #[error("malformed message: {0}")]
    Malformed(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub seq: u32,
    pub width: u16,
    pub height: u16,
    pub rgb: Vec<u8>,
}

/// `STATE <step> <R> <C> <budget> <done>`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateLine {
    pub step: u32,
    pub reward: f64,
    pub cost: f64,
    pub budget: f64,
    pub done: bool,
}

impl fmt::Display for StateLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "STATE {} {:?} {:?} {} {}", self.step, self.reward, self.cost, self.budget, u8::from(self.done))
    }
}

fn malformed(line: &str) -> ProtocolError {
    ProtocolError::Malformed(line.to_string())
}

impl FromStr for StateLine {
    type Err = ProtocolError;

    fn from_str(line: &str) -> Result<Self, ProtocolError> {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [tag, step, r, c, budget, done] = parts.as_slice() else { return Err(malformed(line)) };
        if *tag != "STATE" {
            return Err(malformed(line));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| malformed(line));
        Ok(StateLine {
            step: step.parse().map_err(|_| malformed(line))?,
            reward: num(r)?,
            cost: num(c)?,
            budget: num(budget)?,
            done: match *done {
                "0" => false,
                "1" => true,
                _ => return Err(malformed(line)),
            },
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ServerMsg {
    Frame(Frame),
    State(StateLine),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClientMsg {
    /// Full set of held buttons, sorted and deduplicated.
    Keys(Vec<String>),
    Reset,
}

impl ClientMsg {
    pub fn keys<S: AsRef<str>>(names: &[S]) -> Self {
        let mut v: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        v.sort();
        v.dedup();
        ClientMsg::Keys(v)
    }
}

impl fmt::Display for ClientMsg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClientMsg::Keys(k) if k.is_empty() => f.write_str("KEYS"),
            ClientMsg::Keys(k) => write!(f, "KEYS {}", k.join(" ")),
            ClientMsg::Reset => f.write_str("RESET"),
        }
    }
}

impl FromStr for ClientMsg {
    type Err = ProtocolError;

    fn from_str(line: &str) -> Result<Self, ProtocolError> {
        let mut words = line.split_whitespace();
        match words.next() {
            Some("KEYS") => Ok(ClientMsg::keys(&words.collect::<Vec<_>>())),
            Some("RESET") if words.next().is_none() => Ok(ClientMsg::Reset),
            _ => Err(malformed(line)),
        }
    }
}

fn packet(tag: u8, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(5 + payload.len());
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    out.push(tag);
    out.extend_from_slice(payload);
    out
}

pub fn encode_frame(f: &Frame) -> Vec<u8> {
    let mut payload = Vec::with_capacity(8 + f.rgb.len());
    payload.extend_from_slice(&f.seq.to_be_bytes());
    payload.extend_from_slice(&f.width.to_be_bytes());
    payload.extend_from_slice(&f.height.to_be_bytes());
    payload.extend_from_slice(&f.rgb);
    packet(TAG_FRAME, &payload)
}

pub fn encode_text(line: &str) -> Vec<u8> {
    packet(TAG_TEXT, line.as_bytes())
}

pub fn encode_server(msg: &ServerMsg) -> Vec<u8> {
    match msg {
        ServerMsg::Frame(f) => encode_frame(f),
        ServerMsg::State(s) => encode_text(&s.to_string()),
    }
}

pub fn decode_frame(payload: &[u8]) -> Result<Frame, ProtocolError> {
    if payload.len() < 8 {
        return Err(ProtocolError::Malformed("short FRAME header".into()));
    }
    let seq = u32::from_be_bytes(payload[0..4].try_into().expect("4 bytes"));
    let width = u16::from_be_bytes(payload[4..6].try_into().expect("2 bytes"));
    let height = u16::from_be_bytes(payload[6..8].try_into().expect("2 bytes"));
    let rgb = payload[8..].to_vec();
    if rgb.len() != width as usize * height as usize * 3 {
        return Err(ProtocolError::Malformed(format!("FRAME {width}x{height} with {} pixel bytes", rgb.len())));
    }
    Ok(Frame { seq, width, height, rgb })
}

fn text(payload: Vec<u8>) -> Result<String, ProtocolError> {
    String::from_utf8(payload).map_err(|_| ProtocolError::Malformed("text payload is not UTF-8".into()))
}

pub fn decode_server(tag: u8, payload: Vec<u8>) -> Result<ServerMsg, ProtocolError> {
    match tag {
        TAG_FRAME => decode_frame(&payload).map(ServerMsg::Frame),
        TAG_TEXT => text(payload)?.parse().map(ServerMsg::State),
        t => Err(ProtocolError::UnknownTag(t)),
    }
}

pub fn decode_client(tag: u8, payload: Vec<u8>) -> Result<ClientMsg, ProtocolError> {
    match tag {
        TAG_TEXT => text(payload)?.parse(),
        t => Err(ProtocolError::UnknownTag(t)),
    }
}

/// Reads one packet. `Ok(None)` on a clean end of stream before a header.
pub fn read_packet(r: &mut impl Read) -> Result<Option<(u8, Vec<u8>)>, ProtocolError> {
    let mut header = [0u8; 5];
    let mut got = 0;
    while got < header.len() {
        match r.read(&mut header[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => return Err(io::Error::from(io::ErrorKind::UnexpectedEof).into()),
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let len = u32::from_be_bytes(header[0..4].try_into().expect("4 bytes")) as usize;
    if len > MAX_PAYLOAD {
        return Err(ProtocolError::TooLarge(len));
    }
    let mut payload = vec![0u8; len];
    r.read_exact(&mut payload)?;
    Ok(Some((header[4], payload)))
}

pub fn write_packet(w: &mut impl Write, bytes: &[u8]) -> io::Result<()> {
    w.write_all(bytes)?;
    w.flush()
}
