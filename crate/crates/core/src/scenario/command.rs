use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::behaviors::{validate_mixture, Mixture};

/// Operator commands. Scripted events use the first four; the live service
/// also accepts the pacing controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    BarEdge {
        edge: u32,
    },
    UnbarEdge {
        edge: u32,
    },
    Explosion {
        x: f64,
        y: f64,
        radius: f64,
        intensity: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inside: Option<Mixture>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        outside: Option<Mixture>,
    },
    SpawnRate {
        rate: f64,
    },
    Pause,
    Resume,
    Speed {
        mult: f64,
    },
}

impl Command {
    /// Shape checks that need no world.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            Command::Explosion {
                x,
                y,
                radius,
                intensity,
                inside,
                outside,
            } => {
                if !(x.is_finite() && y.is_finite()) {
                    return Err("explosion position must be finite".into());
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err("radius must be positive".into());
                }
                if !(*intensity > 0.0 && *intensity <= 1.0) {
                    return Err("intensity must lie in (0, 1]".into());
                }
                for m in [inside, outside].into_iter().flatten() {
                    validate_mixture(m)?;
                }
                Ok(())
            }
            Command::SpawnRate { rate } if !(rate.is_finite() && *rate >= 0.0) => Err("rate must be non-negative".into()),
            Command::Speed { mult } if !(mult.is_finite() && *mult > 0.0) => Err("mult must be positive".into()),
            _ => Ok(()),
        }
    }

    pub fn is_control(&self) -> bool {
        matches!(self, Command::Pause | Command::Resume | Command::Speed { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedEvent {
    /// Applied before this tick's perceive phase.
    pub at_tick: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cmd_id: Option<Value>,
    pub event: Command,
}

/// A command as sent by a client: the command fields plus an optional
/// `cmd_id` echoed in the reply.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientCommand {
    pub cmd_id: Option<Value>,
    pub command: Command,
}

/// Parse one client text message. On failure returns the message to send
/// back, with the `cmd_id` if one could be read.
pub fn parse_client_message(text: &str) -> Result<ClientCommand, (Option<Value>, String)> {
    let mut v: Value = serde_json::from_str(text).map_err(|e| (None, format!("malformed JSON: {e}")))?;
    let obj = v.as_object_mut().ok_or((None, "command must be a JSON object".to_string()))?;
    let cmd_id = obj.remove("cmd_id");
    let command: Command = serde_json::from_value(v).map_err(|e| (cmd_id.clone(), format!("bad command: {e}")))?;
    command.validate().map_err(|e| (cmd_id.clone(), e))?;
    Ok(ClientCommand { cmd_id, command })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_forms() {
        let c = parse_client_message(r#"{"type":"bar_edge","edge":3,"cmd_id":7}"#).unwrap();
        assert_eq!(c.command, Command::BarEdge { edge: 3 });
        assert_eq!(c.cmd_id, Some(Value::from(7)));
        let c = parse_client_message(r#"{"type":"explosion","x":1,"y":2,"radius":50,"intensity":1}"#).unwrap();
        assert!(matches!(c.command, Command::Explosion { inside: None, .. }));
        assert_eq!(parse_client_message(r#"{"type":"pause"}"#).unwrap().command, Command::Pause);
        assert_eq!(
            parse_client_message(r#"{"type":"speed","mult":4}"#).unwrap().command,
            Command::Speed { mult: 4.0 }
        );
    }

    #[test]
    fn errors_keep_the_cmd_id() {
        let (id, msg) = parse_client_message(r#"{"type":"bar_edge","edgee":3,"cmd_id":"a"}"#).unwrap_err();
        assert_eq!(id, Some(Value::from("a")));
        assert!(msg.contains("edgee"), "{msg}");
        let (id, _) = parse_client_message(r#"{"type":"explosion","x":0,"y":0,"radius":-1,"intensity":1,"cmd_id":2}"#).unwrap_err();
        assert_eq!(id, Some(Value::from(2)));
        assert!(parse_client_message("not json").is_err());
        assert!(parse_client_message("[1]").is_err());
    }
}
