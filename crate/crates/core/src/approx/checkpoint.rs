//! Plain-text parameter checkpoints.
//!
//! ```text
//! betadqn-checkpoint 1
//! q-mlp 328 128 3
//! <one value per line, row-major in the flat parameter layout>
//! ```
//!
//! Kinds are `q-table <states> <actions>`, `q-mlp <in> <hidden> <out>`,
//! `beta-counts <states> <actions>` and `beta-mlp <in> <hidden> <out>`.
//! Optimizer moments are not stored.

use std::io::{BufRead, Write};

use thiserror::Error;

use super::{BehaviorFunction, CountTable, Mlp, NetLearner, QFunction, QTable};

const MAGIC: &str = "betadqn-checkpoint 1";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn perr(line: usize, msg: impl Into<String>) -> CheckpointError {
    CheckpointError::Parse { line, msg: msg.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Checkpoint {
    Q(QFunction),
    Beta(BehaviorFunction),
}

fn write_values<W: Write, T: std::fmt::Display>(w: &mut W, values: &[T]) -> std::io::Result<()> {
    for v in values {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

pub fn write_q<W: Write>(w: &mut W, q: &QFunction) -> std::io::Result<()> {
    writeln!(w, "{MAGIC}")?;
    match q {
        QFunction::Table(t) => {
            writeln!(w, "q-table {} {}", t.states, t.actions)?;
            write_values(w, &t.values)
        }
        QFunction::Mlp(l) => {
            let (i, h, o) = l.net.dims();
            writeln!(w, "q-mlp {i} {h} {o}")?;
            write_values(w, l.net.params())
        }
    }
}

pub fn write_beta<W: Write>(w: &mut W, b: &BehaviorFunction) -> std::io::Result<()> {
    writeln!(w, "{MAGIC}")?;
    match b {
        BehaviorFunction::Counts(c) => {
            writeln!(w, "beta-counts {} {}", c.states, c.actions)?;
            write_values(w, &c.counts)
        }
        BehaviorFunction::Mlp(l) => {
            let (i, h, o) = l.net.dims();
            writeln!(w, "beta-mlp {i} {h} {o}")?;
            write_values(w, l.net.params())
        }
    }
}

pub fn read<R: BufRead>(r: R) -> Result<Checkpoint, CheckpointError> {
    let mut lines = r.lines();
    let mut next = |n: usize| -> Result<String, CheckpointError> {
        lines.next().ok_or_else(|| perr(n, "unexpected end of file"))?.map_err(CheckpointError::from)
    };
    if next(1)?.trim() != MAGIC {
        return Err(perr(1, "missing checkpoint header"));
    }
    let header = next(2)?;
    let mut fields = header.split_whitespace();
    let kind = fields.next().ok_or_else(|| perr(2, "missing kind"))?.to_string();
    let dims: Vec<usize> =
        fields.map(|f| f.parse().map_err(|_| perr(2, format!("bad dimension {f:?}")))).collect::<Result<_, _>>()?;
    let expect_dims = |n: usize| {
        if dims.len() == n && dims.iter().all(|&d| d > 0) {
            Ok(())
        } else {
            Err(perr(2, format!("{kind} needs {n} positive dimensions")))
        }
    };
    let count = match kind.as_str() {
        "q-table" | "beta-counts" => {
            expect_dims(2)?;
            dims[0] * dims[1]
        }
        "q-mlp" | "beta-mlp" => {
            expect_dims(3)?;
            let (i, h, o) = (dims[0], dims[1], dims[2]);
            i * h + h + o * h + o
        }
        other => return Err(perr(2, format!("unknown kind {other:?}"))),
    };
    let mut raw = Vec::with_capacity(count);
    for k in 0..count {
        raw.push(next(3 + k)?);
    }
    let floats = || -> Result<Vec<f64>, CheckpointError> {
        raw.iter()
            .enumerate()
            .map(|(k, s)| s.trim().parse::<f64>().map_err(|_| perr(3 + k, format!("bad value {s:?}"))))
            .collect()
    };
    Ok(match kind.as_str() {
        "q-table" => Checkpoint::Q(QFunction::Table(QTable::from_values(dims[0], dims[1], floats()?).unwrap())),
        "q-mlp" => Checkpoint::Q(QFunction::Mlp(NetLearner::from_net(
            Mlp::from_params(dims[0], dims[1], dims[2], floats()?).unwrap(),
        ))),
        "beta-mlp" => Checkpoint::Beta(BehaviorFunction::Mlp(NetLearner::from_net(
            Mlp::from_params(dims[0], dims[1], dims[2], floats()?).unwrap(),
        ))),
        _ => {
            let counts = raw
                .iter()
                .enumerate()
                .map(|(k, s)| s.trim().parse::<u64>().map_err(|_| perr(3 + k, format!("bad count {s:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            Checkpoint::Beta(BehaviorFunction::Counts(CountTable::from_counts(dims[0], dims[1], counts).unwrap()))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::GridObservation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mlp_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = QFunction::mlp(7, 5, 3, &mut rng);
        let mut buf = Vec::new();
        write_q(&mut buf, &q).unwrap();
        let Checkpoint::Q(back) = read(buf.as_slice()).unwrap() else { panic!("wrong kind") };
        let s = GridObservation::Features { dim: 7, active: vec![0, 4] };
        assert_eq!(q.q_values(&s).unwrap(), back.q_values(&s).unwrap());
    }

    #[test]
    fn counts_round_trip() {
        let b = BehaviorFunction::Counts(CountTable::from_counts(2, 2, vec![1, 0, 3, 4]).unwrap());
        let mut buf = Vec::new();
        write_beta(&mut buf, &b).unwrap();
        assert_eq!(read(buf.as_slice()).unwrap(), Checkpoint::Beta(b));
    }

    #[test]
    fn rejects_truncated_and_garbage() {
        let text = "betadqn-checkpoint 1\nq-table 2 2\n1\n2\n3\n";
        assert!(matches!(read(text.as_bytes()), Err(CheckpointError::Parse { line: 6, .. })));
        let text = "betadqn-checkpoint 1\nq-cube 2 2\n";
        assert!(read(text.as_bytes()).is_err());
        assert!(read("hello\n".as_bytes()).is_err());
    }
}
