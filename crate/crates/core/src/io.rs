//! Evidence files: JSON lines, a `{"frame_size": K}` header followed by one
//! `{"focal": [..], "support": s}` object per piece of evidence. Focal
//! elements are 1-based; element `k` is bit `k - 1`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::{FocalSet, Frame, SimpleSupport};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    frame_size: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    focal: Vec<usize>,
    support: f64,
}

pub fn read_evidence<R: BufRead>(reader: R) -> Result<(Frame, Vec<SimpleSupport>)> {
    let mut frame = None;
    let mut evidence = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        let number = index + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: number,
            message,
        };
        match frame {
            None => {
                let header: Header =
                    serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
                frame = Some(Frame::new(header.frame_size).map_err(|e| parse_err(e.to_string()))?);
            }
            Some(f) => {
                let record: Record =
                    serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
                let piece = FocalSet::from_elements(f, &record.focal)
                    .and_then(|set| SimpleSupport::new(f, set, record.support))
                    .map_err(|e| parse_err(e.to_string()))?;
                evidence.push(piece);
            }
        }
    }
    let frame = frame.ok_or(Error::Parse {
        line: 0,
        message: "missing frame_size header".into(),
    })?;
    Ok((frame, evidence))
}

pub fn write_evidence<W: Write>(mut writer: W, frame: Frame, evidence: &[SimpleSupport]) -> Result<()> {
    let header = Header {
        frame_size: frame.size(),
    };
    writeln!(writer, "{}", serde_json::to_string(&header).expect("header serializes"))?;
    for piece in evidence {
        if piece.frame() != frame {
            return Err(Error::FrameMismatch {
                left: frame.size(),
                right: piece.frame().size(),
            });
        }
        let record = Record {
            focal: piece.focal().elements(),
            support: piece.support(),
        };
        writeln!(writer, "{}", serde_json::to_string(&record).expect("record serializes"))?;
    }
    Ok(())
}
