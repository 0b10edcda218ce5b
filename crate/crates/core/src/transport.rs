//! Framed two-party channels.
//!
//! Wire format of a frame: one tag byte, a 4-byte big-endian payload length,
//! then the payload. Frames larger than [`MAX_FRAME`] are rejected on both
//! ends. Every frame is accounted to the phase that is current when it is
//! sent or received.

use std::collections::BTreeMap;
use std::io::{self, BufWriter, Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Payload cap: 64 MiB.
pub const MAX_FRAME: usize = 64 << 20;
pub const FRAME_HEADER: usize = 5;
pub const PROTOCOL_VERSION: u16 = 1;

macro_rules! tags {
    ($($name:ident = $val:expr),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        #[repr(u8)]
        pub enum Tag { $($name = $val),* }

        impl TryFrom<u8> for Tag {
            type Error = Error;
            fn try_from(v: u8) -> Result<Tag> {
                match v {
                    $($val => Ok(Tag::$name),)*
                    other => Err(Error::UnknownTag(other)),
                }
            }
        }
    };
}

tags! {
    Handshake = 0x01,
    HandshakeAck = 0x02,
    OtMsg1 = 0x10,
    OtMsg2 = 0x11,
    OtCorrection = 0x12,
    ShareInput = 0x20,
    GateOpen = 0x21,
    ArithMsg = 0x22,
    CpsiMeta = 0x30,
    CpsiEqRound = 0x31,
    OfaTables = 0x40,
    OfaBlindedInputs = 0x41,
    OfaMeta = 0x42,
    Reveal = 0x50,
    Data = 0x60,
}

/// Accounting bucket for bytes and rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Handshake,
    OtSetup,
    Triples,
    Cpsi,
    Ofa,
    Score,
    Reveal,
    Other,
}

impl Phase {
    pub const ALL: [Phase; 8] = [
        Phase::Handshake,
        Phase::OtSetup,
        Phase::Triples,
        Phase::Cpsi,
        Phase::Ofa,
        Phase::Score,
        Phase::Reveal,
        Phase::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Handshake => "handshake",
            Phase::OtSetup => "ot_setup",
            Phase::Triples => "triples",
            Phase::Cpsi => "cpsi",
            Phase::Ofa => "ofa",
            Phase::Score => "score",
            Phase::Reveal => "reveal",
            Phase::Other => "other",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseCounters {
    pub bytes_sent: u64,
    pub bytes_recv: u64,
    pub frames_sent: u64,
    pub frames_recv: u64,
    /// Message flights initiated by this endpoint.
    pub rounds: u64,
}

impl PhaseCounters {
    pub fn total_bytes(&self) -> u64 {
        self.bytes_sent + self.bytes_recv
    }

    fn add(&mut self, o: &PhaseCounters) {
        self.bytes_sent += o.bytes_sent;
        self.bytes_recv += o.bytes_recv;
        self.frames_sent += o.frames_sent;
        self.frames_recv += o.frames_recv;
        self.rounds += o.rounds;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ByteCounters {
    pub phases: BTreeMap<Phase, PhaseCounters>,
}

impl ByteCounters {
    pub fn phase(&self, p: Phase) -> PhaseCounters {
        self.phases.get(&p).copied().unwrap_or_default()
    }

    pub fn total(&self) -> PhaseCounters {
        let mut t = PhaseCounters::default();
        for c in self.phases.values() {
            t.add(c);
        }
        t
    }

    /// Per-phase difference `self - earlier`.
    pub fn since(&self, earlier: &ByteCounters) -> ByteCounters {
        let mut out = ByteCounters::default();
        for (&p, c) in &self.phases {
            let e = earlier.phase(p);
            out.phases.insert(
                p,
                PhaseCounters {
                    bytes_sent: c.bytes_sent - e.bytes_sent,
                    bytes_recv: c.bytes_recv - e.bytes_recv,
                    frames_sent: c.frames_sent - e.frames_sent,
                    frames_recv: c.frames_recv - e.frames_recv,
                    rounds: c.rounds - e.rounds,
                },
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub tag: Tag,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(tag: Tag, payload: Vec<u8>) -> Self {
        Self { tag, payload }
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        if self.payload.len() > MAX_FRAME {
            return Err(Error::OversizeFrame(self.payload.len()));
        }
        let mut out = Vec::with_capacity(FRAME_HEADER + self.payload.len());
        out.push(self.tag as u8);
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.payload);
        Ok(out)
    }

    pub fn read_from<R: Read + ?Sized>(r: &mut R) -> Result<Frame> {
        let mut header = [0u8; FRAME_HEADER];
        read_exact(r, &mut header)?;
        let tag = Tag::try_from(header[0])?;
        let len = u32::from_be_bytes([header[1], header[2], header[3], header[4]]) as usize;
        if len > MAX_FRAME {
            return Err(Error::OversizeFrame(len));
        }
        let mut payload = vec![0u8; len];
        read_exact(r, &mut payload)?;
        Ok(Frame { tag, payload })
    }
}

fn read_exact<R: Read + ?Sized>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => Error::Truncated,
        _ => Error::Io(e),
    })
}

/// One end of an in-memory duplex byte stream.
pub struct MemPipe {
    tx: mpsc::Sender<Vec<u8>>,
    rx: mpsc::Receiver<Vec<u8>>,
    buf: Vec<u8>,
    pos: usize,
}

impl MemPipe {
    pub fn pair() -> (MemPipe, MemPipe) {
        let (tx_a, rx_b) = mpsc::channel();
        let (tx_b, rx_a) = mpsc::channel();
        (
            MemPipe { tx: tx_a, rx: rx_a, buf: Vec::new(), pos: 0 },
            MemPipe { tx: tx_b, rx: rx_b, buf: Vec::new(), pos: 0 },
        )
    }
}

impl Read for MemPipe {
    fn read(&mut self, out: &mut [u8]) -> io::Result<usize> {
        if self.pos == self.buf.len() {
            match self.rx.recv() {
                Ok(chunk) => {
                    self.buf = chunk;
                    self.pos = 0;
                }
                // Peer hung up: end of stream.
                Err(_) => return Ok(0),
            }
        }
        let n = out.len().min(self.buf.len() - self.pos);
        out[..n].copy_from_slice(&self.buf[self.pos..self.pos + n]);
        self.pos += n;
        Ok(n)
    }
}

impl Write for MemPipe {
    fn write(&mut self, data: &[u8]) -> io::Result<usize> {
        self.tx
            .send(data.to_vec())
            .map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "peer dropped"))?;
        Ok(data.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

enum Stream {
    Mem { reader: MemPipe, writer: BufWriter<MemWriter> },
    Tcp { reader: io::BufReader<TcpStream>, writer: BufWriter<TcpStream> },
}

/// Write half of a [`MemPipe`]; frames are flushed as one chunk.
struct MemWriter(mpsc::Sender<Vec<u8>>);

impl Write for MemWriter {
    fn write(&mut self, data: &[u8]) -> io::Result<usize> {
        self.0
            .send(data.to_vec())
            .map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "peer dropped"))?;
        Ok(data.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Ordered, reliable, framed duplex channel with byte accounting.
pub struct Channel {
    stream: Stream,
    phase: Phase,
    counters: ByteCounters,
    last_was_send: bool,
    handshake_done: bool,
}

impl Channel {
    fn from_stream(stream: Stream) -> Self {
        Self {
            stream,
            phase: Phase::Other,
            counters: ByteCounters::default(),
            last_was_send: false,
            handshake_done: false,
        }
    }

    /// Two connected in-memory endpoints.
    pub fn mem_pair() -> (Channel, Channel) {
        let (a, b) = MemPipe::pair();
        let wrap = |p: MemPipe| {
            let writer = BufWriter::with_capacity(1 << 16, MemWriter(p.tx.clone()));
            Channel::from_stream(Stream::Mem { reader: p, writer })
        };
        (wrap(a), wrap(b))
    }

    pub fn from_tcp(stream: TcpStream) -> Result<Channel> {
        stream.set_nodelay(true)?;
        let reader = io::BufReader::with_capacity(1 << 16, stream.try_clone()?);
        let writer = BufWriter::with_capacity(1 << 16, stream);
        Ok(Channel::from_stream(Stream::Tcp { reader, writer }))
    }

    /// Connects, retrying until `timeout` elapses.
    pub fn connect<A: ToSocketAddrs>(addr: A, timeout: Duration) -> Result<Channel> {
        let deadline = Instant::now() + timeout;
        let addrs: Vec<_> = addr.to_socket_addrs()?.collect();
        loop {
            for a in &addrs {
                if let Ok(s) = TcpStream::connect_timeout(a, Duration::from_millis(500)) {
                    return Channel::from_tcp(s);
                }
            }
            if Instant::now() >= deadline {
                return Err(Error::Io(io::Error::new(io::ErrorKind::TimedOut, "connect timeout")));
            }
            std::thread::sleep(Duration::from_millis(50));
        }
    }

    /// Accepts one peer on `listener`, giving up after `timeout`.
    pub fn accept(listener: &TcpListener, timeout: Duration) -> Result<Channel> {
        listener.set_nonblocking(true)?;
        let deadline = Instant::now() + timeout;
        loop {
            match listener.accept() {
                Ok((s, _)) => {
                    s.set_nonblocking(false)?;
                    return Channel::from_tcp(s);
                }
                Err(e) if e.kind() == io::ErrorKind::WouldBlock => {
                    if Instant::now() >= deadline {
                        return Err(Error::Io(io::Error::new(
                            io::ErrorKind::TimedOut,
                            "accept timeout",
                        )));
                    }
                    std::thread::sleep(Duration::from_millis(20));
                }
                Err(e) => return Err(e.into()),
            }
        }
    }

    pub fn set_phase(&mut self, phase: Phase) -> Phase {
        std::mem::replace(&mut self.phase, phase)
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn counters(&self) -> ByteCounters {
        self.counters.clone()
    }

    pub fn handshake_done(&self) -> bool {
        self.handshake_done
    }

    pub fn send_frame(&mut self, frame: &Frame) -> Result<()> {
        let bytes = frame.encode()?;
        let c = self.counters.phases.entry(self.phase).or_default();
        c.bytes_sent += bytes.len() as u64;
        c.frames_sent += 1;
        if !self.last_was_send {
            c.rounds += 1;
        }
        self.last_was_send = true;
        let w: &mut dyn Write = match &mut self.stream {
            Stream::Mem { writer, .. } => writer,
            Stream::Tcp { writer, .. } => writer,
        };
        w.write_all(&bytes)?;
        w.flush()?;
        Ok(())
    }

    pub fn recv_frame(&mut self) -> Result<Frame> {
        let r: &mut dyn Read = match &mut self.stream {
            Stream::Mem { reader, .. } => reader,
            Stream::Tcp { reader, .. } => reader,
        };
        let frame = Frame::read_from(r)?;
        if !self.handshake_done && !matches!(frame.tag, Tag::Handshake | Tag::HandshakeAck) {
            return Err(Error::NoHandshake);
        }
        let c = self.counters.phases.entry(self.phase).or_default();
        c.bytes_recv += (frame.payload.len() + FRAME_HEADER) as u64;
        c.frames_recv += 1;
        self.last_was_send = false;
        Ok(frame)
    }

    pub fn recv_tag(&mut self, expected: Tag) -> Result<Vec<u8>> {
        let f = self.recv_frame()?;
        if f.tag != expected {
            return Err(Error::UnexpectedFrame { expected, actual: f.tag });
        }
        Ok(f.payload)
    }

    /// Marks the channel usable for protocol frames without a negotiation.
    /// Only for raw transport tests.
    pub fn skip_handshake(&mut self) {
        self.handshake_done = true;
    }
}

/// Negotiated session parameters exchanged before any protocol frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Handshake {
    pub version: u16,
    pub salt: [u8; 32],
    /// Canonical `key=value` lines of every negotiated parameter.
    pub params: String,
}

impl Handshake {
    pub fn params_digest(&self) -> [u8; 32] {
        Sha256::digest(self.params.as_bytes()).into()
    }

    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.version.to_be_bytes());
        out.extend_from_slice(&self.salt);
        out.extend_from_slice(&self.params_digest());
        out
    }
}

const ACK_OK: u8 = 0;
const ACK_VERSION: u8 = 1;
const ACK_PARAMS: u8 = 2;

/// Initiator side: announces version, salt and parameter digest.
pub fn handshake_initiate(chan: &mut Channel, hs: &Handshake) -> Result<()> {
    let prev = chan.set_phase(Phase::Handshake);
    chan.send_frame(&Frame::new(Tag::Handshake, hs.encode()))?;
    let ack = chan.recv_tag(Tag::HandshakeAck)?;
    chan.set_phase(prev);
    match ack.first() {
        Some(&ACK_OK) => {
            chan.handshake_done = true;
            Ok(())
        }
        Some(&ACK_VERSION) => Err(Error::Handshake("peer rejected protocol version".into())),
        Some(&ACK_PARAMS) => Err(Error::Handshake("parameter digest mismatch".into())),
        _ => Err(Error::Handshake("malformed acknowledgement".into())),
    }
}

/// Responder side: checks the initiator's announcement against the local
/// parameters and returns the initiator's session salt.
pub fn handshake_respond(chan: &mut Channel, version: u16, params: &str) -> Result<[u8; 32]> {
    let prev = chan.set_phase(Phase::Handshake);
    let msg = chan.recv_tag(Tag::Handshake)?;
    if msg.len() != 2 + 32 + 32 {
        return Err(Error::Handshake("malformed announcement".into()));
    }
    let peer_version = u16::from_be_bytes([msg[0], msg[1]]);
    let mut salt = [0u8; 32];
    salt.copy_from_slice(&msg[2..34]);
    let ours: [u8; 32] = Sha256::digest(params.as_bytes()).into();
    let status = if peer_version != version {
        ACK_VERSION
    } else if msg[34..66] != ours {
        ACK_PARAMS
    } else {
        ACK_OK
    };
    chan.send_frame(&Frame::new(Tag::HandshakeAck, vec![status]))?;
    chan.set_phase(prev);
    match status {
        ACK_OK => {
            chan.handshake_done = true;
            Ok(salt)
        }
        ACK_VERSION => Err(Error::Handshake(format!(
            "protocol version mismatch: local {version}, peer {peer_version}"
        ))),
        _ => Err(Error::Handshake("parameter digest mismatch".into())),
    }
}
