//! JSON-lines session protocol: the user plays against the counterstrategy
//! and reviews mined assumptions until the specification becomes realizable.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::gr1::{check_realizability, Counterstrategy, GameSession, Gr1Spec, Realizability, SolveOptions, Verdict};
use crate::miner::{Candidate, MineError, MiningSession, MiningStatus, Template};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    GameInit,
    EnvMove,
    UserMove,
    Verdict,
    Proposal,
    Accept,
    Reject,
    Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMessage {
    pub seq: u64,
    pub kind: MessageKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply_to: Option<u64>,
    #[serde(default)]
    pub payload: Value,
}

impl SessionMessage {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub templates: Vec<Template>,
    pub solve: SolveOptions,
    /// Where the Moore machine is written once the spec is realizable.
    pub artifact_dir: PathBuf,
}

/// One client session. Server messages carry their own increasing `seq`;
/// replies name the client `seq` they answer.
pub struct Session {
    config: SessionConfig,
    tags: BTreeMap<String, String>,
    mining: MiningSession,
    cs: Box<Counterstrategy>,
    game: GameSession,
    seq: u64,
    last_client: Option<u64>,
    closed: bool,
}

impl Session {
    /// Starts a session on an unrealizable spec; `tags` maps conjunct names
    /// to requirement source tags. Returns the opening messages.
    pub fn open(
        spec: &Gr1Spec,
        tags: BTreeMap<String, String>,
        config: SessionConfig,
    ) -> Result<(Self, Vec<SessionMessage>), MineError> {
        let (mut mining, cs) = MiningSession::new(spec, &config.solve)?;
        mining.propose(&cs, &config.templates);
        let game = GameSession::new((*cs).clone());
        let mut s = Session { config, tags, mining, cs, game, seq: 0, last_client: None, closed: false };
        let mut out = vec![s.message(MessageKind::GameInit, None, s.init_payload())];
        out.push(s.env_move(None));
        out.extend(s.next_proposal(None));
        Ok((s, out))
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn status(&self) -> MiningStatus {
        self.mining.status
    }

    fn message(&mut self, kind: MessageKind, reply_to: Option<u64>, payload: Value) -> SessionMessage {
        let m = SessionMessage { seq: self.seq, kind, reply_to, payload };
        self.seq += 1;
        m
    }

    fn init_payload(&self) -> Value {
        let spec = self.game.spec();
        let enums: BTreeMap<String, Value> = spec
            .encoding
            .enums
            .iter()
            .map(|(v, e)| (v.to_string(), json!({"bits": e.bits, "values": e.values})))
            .collect();
        json!({
            "inputs": spec.inputs,
            "outputs": spec.outputs,
            "enums": enums,
            "requirements": self.tags,
        })
    }

    fn env_move(&mut self, reply_to: Option<u64>) -> SessionMessage {
        let inputs = self.game.inputs();
        let decoded: BTreeMap<String, String> = self.game.spec().encoding.decode(&inputs).into_iter().collect();
        let payload = json!({"step": self.game.transcript.len(), "inputs": inputs, "decoded": decoded});
        self.message(MessageKind::EnvMove, reply_to, payload)
    }

    fn next_proposal(&mut self, reply_to: Option<u64>) -> Option<SessionMessage> {
        let c: &Candidate = self.mining.pending.first()?;
        let payload = json!({"rank": c.rank, "formula": c.text, "english": c.english});
        Some(self.message(MessageKind::Proposal, reply_to, payload))
    }

    fn status_message(&mut self, reply_to: Option<u64>, extra: Value) -> SessionMessage {
        let accepted: Vec<&str> = self.mining.accepted.iter().map(|c| c.text.as_str()).collect();
        let mut payload = json!({"state": self.mining.status, "accepted": accepted});
        if let (Value::Object(p), Value::Object(e)) = (&mut payload, extra) {
            p.extend(e);
        }
        self.message(MessageKind::Status, reply_to, payload)
    }

    fn error(&mut self, reply_to: Option<u64>, text: String) -> SessionMessage {
        self.message(MessageKind::Status, reply_to, json!({"error": text}))
    }

    fn close(&mut self, reply_to: Option<u64>, text: String) -> Vec<SessionMessage> {
        self.closed = true;
        vec![self.message(MessageKind::Status, reply_to, json!({"error": text, "closed": true}))]
    }

    /// Handles one client line. A malformed line or a non-increasing `seq`
    /// closes the session; other errors are answered and the session goes on.
    pub fn handle_line(&mut self, line: &str) -> Vec<SessionMessage> {
        if self.closed {
            return vec![];
        }
        let msg: SessionMessage = match serde_json::from_str(line) {
            Ok(m) => m,
            Err(e) => return self.close(None, format!("malformed message: {e}")),
        };
        if self.last_client.is_some_and(|last| msg.seq <= last) {
            return self.close(Some(msg.seq), format!("seq {} is not greater than {}", msg.seq, self.last_client.unwrap()));
        }
        self.last_client = Some(msg.seq);
        let id = Some(msg.seq);
        match msg.kind {
            MessageKind::UserMove => self.user_move(id, &msg.payload),
            MessageKind::Accept | MessageKind::Reject => match msg.payload.get("rank").and_then(Value::as_u64) {
                Some(rank) if msg.kind == MessageKind::Accept => self.accept(id, rank as usize),
                Some(rank) => self.reject(id, rank as usize),
                None => vec![self.error(id, "missing rank".into())],
            },
            MessageKind::Status => {
                let transcript = serde_json::to_value(&self.game.transcript).expect("serializable");
                vec![self.status_message(id, json!({"transcript": transcript}))]
            }
            other => self.close(id, format!("{} is a server message", serde_json::to_string(&other).unwrap())),
        }
    }

    fn user_move(&mut self, id: Option<u64>, payload: &Value) -> Vec<SessionMessage> {
        if self.mining.status != MiningStatus::Unrealizable {
            return vec![self.error(id, "no game in progress".into())];
        }
        let outputs: BTreeMap<String, bool> = match payload.get("outputs").cloned().map(serde_json::from_value) {
            Some(Ok(o)) => o,
            _ => return vec![self.error(id, "outputs must map atoms to booleans".into())],
        };
        let step = self.game.transcript.len();
        match self.game.step(&outputs) {
            Ok((verdict, _)) => {
                let payload = match verdict {
                    Verdict::Ok => json!({"step": step, "verdict": "ok"}),
                    Verdict::Violation(names) => {
                        let sources: Vec<&str> =
                            names.iter().map(|n| self.tags.get(n).map(String::as_str).unwrap_or(n)).collect();
                        json!({"step": step, "verdict": "violation", "violated": names, "sources": sources})
                    }
                };
                let v = self.message(MessageKind::Verdict, id, payload);
                vec![v, self.env_move(id)]
            }
            Err(e) => vec![self.error(id, e.to_string())],
        }
    }

    fn reject(&mut self, id: Option<u64>, rank: usize) -> Vec<SessionMessage> {
        if self.mining.reject(rank).is_none() {
            return vec![self.error(id, format!("no pending proposal with rank {rank}"))];
        }
        match self.next_proposal(id) {
            Some(p) => vec![p],
            None => vec![self.status_message(id, json!({}))],
        }
    }

    fn accept(&mut self, id: Option<u64>, rank: usize) -> Vec<SessionMessage> {
        if !self.mining.pending.iter().any(|c| c.rank == rank) {
            return vec![self.error(id, format!("no pending proposal with rank {rank}"))];
        }
        match self.mining.accept(rank, &self.config.solve) {
            Ok(Some(cs)) => {
                self.mining.propose(&cs, &self.config.templates);
                self.game = GameSession::new((*cs).clone());
                self.cs = cs;
                let mut out = vec![self.status_message(id, json!({})), self.env_move(id)];
                out.extend(self.next_proposal(id));
                out
            }
            Ok(None) => match self.write_machine() {
                Ok(path) => vec![self.status_message(id, json!({"machine": path}))],
                Err(e) => vec![self.error(id, e)],
            },
            Err(e) => vec![self.error(id, e.to_string())],
        }
    }

    fn write_machine(&self) -> Result<String, String> {
        let Ok(Realizability::Realizable(m)) = check_realizability(&self.mining.spec, &self.config.solve) else {
            return Err("strengthened specification did not yield a machine".into());
        };
        std::fs::create_dir_all(&self.config.artifact_dir).map_err(|e| e.to_string())?;
        let path = self.config.artifact_dir.join("moore.json");
        let text = serde_json::to_string_pretty(&m.to_json()).expect("serializable");
        std::fs::write(&path, text).map_err(|e| e.to_string())?;
        std::fs::write(self.config.artifact_dir.join("moore.dot"), m.to_dot()).map_err(|e| e.to_string())?;
        Ok(path.display().to_string())
    }

    /// The counterstrategy currently driving the game.
    pub fn counterstrategy(&self) -> &Counterstrategy {
        &self.cs
    }
}
