use std::collections::BTreeMap;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::thread;

use anyhow::{bail, Result};
use log::{info, warn};
use reqlift_core::corpus::{Config, RequirementDoc};
use reqlift_core::gr1::Gr1Spec;
use reqlift_core::ltl::Ltl;
use reqlift_core::miner::Template;
use reqlift_core::session::{Session, SessionConfig, SessionMessage};
use reqlift_core::workbench::{cmd_compile, gr1_spec};
use tungstenite::Message;

#[derive(Clone)]
pub struct Server {
    spec: Gr1Spec,
    tags: BTreeMap<String, String>,
    config: SessionConfig,
}

impl Server {
    pub fn new(docs: &[RequirementDoc], config: &Config, assumptions: &[Ltl], out: PathBuf) -> Result<Self> {
        let a = cmd_compile(docs, config)?;
        if let Some(e) = a.errors.first() {
            bail!("corpus does not compile: {e}");
        }
        let spec = gr1_spec(&a.formulas, config, assumptions)?;
        let tags = a.formulas.iter().map(|f| (f.name.clone(), f.source_tag.clone())).collect();
        let config = SessionConfig { templates: Template::ALL.to_vec(), solve: Default::default(), artifact_dir: out };
        Ok(Server { spec, tags, config })
    }

    fn open(&self) -> Result<(Session, Vec<SessionMessage>)> {
        Ok(Session::open(&self.spec, self.tags.clone(), self.config.clone())?)
    }

    /// Runs one session over a line reader and writer.
    fn lines(&self, reader: impl BufRead, mut writer: impl Write) -> Result<()> {
        let (mut session, opening) = self.open()?;
        for m in opening {
            writeln!(writer, "{}", m.to_line())?;
        }
        writer.flush()?;
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            for m in session.handle_line(&line) {
                writeln!(writer, "{}", m.to_line())?;
            }
            writer.flush()?;
            if session.is_closed() {
                break;
            }
        }
        Ok(())
    }

    pub fn stdio(&self) -> Result<()> {
        self.lines(io::stdin().lock(), io::stdout().lock())
    }

    fn tcp(&self, stream: TcpStream) -> Result<()> {
        let reader = BufReader::new(stream.try_clone()?);
        self.lines(reader, stream)
    }

    fn websocket(&self, stream: TcpStream) -> Result<()> {
        let mut ws = tungstenite::accept(stream)?;
        let (mut session, opening) = self.open()?;
        for m in opening {
            ws.send(Message::text(m.to_line()))?;
        }
        loop {
            let text = match ws.read()? {
                Message::Text(t) => t.to_string(),
                Message::Close(_) => return Ok(()),
                _ => continue,
            };
            for m in session.handle_line(&text) {
                ws.send(Message::text(m.to_line()))?;
            }
            if session.is_closed() {
                ws.close(None)?;
                return Ok(());
            }
        }
    }

    fn accept_loop(self, listener: TcpListener, ws: bool) {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { continue };
            let server = self.clone();
            thread::spawn(move || {
                let peer = stream.peer_addr().map(|a| a.to_string()).unwrap_or_default();
                info!("session opened for {peer}");
                let r = if ws { server.websocket(stream) } else { server.tcp(stream) };
                if let Err(e) = r {
                    warn!("session for {peer} ended: {e:#}");
                }
            });
        }
    }

    pub fn listen(self, port: Option<u16>, ws_port: Option<u16>) -> Result<()> {
        let mut handles = Vec::new();
        for (p, ws) in [(port, false), (ws_port, true)] {
            let Some(p) = p else { continue };
            let listener = TcpListener::bind(("127.0.0.1", p))?;
            let kind = if ws { "websocket" } else { "tcp" };
            eprintln!("listening ({kind}) on {}", listener.local_addr()?);
            let server = self.clone();
            handles.push(thread::spawn(move || server.accept_loop(listener, ws)));
        }
        for h in handles {
            let _ = h.join();
        }
        Ok(())
    }
}
