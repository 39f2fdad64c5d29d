//! Online consumers of a trajectory.

use std::io::Write;

use crate::error::{Error, Result};

/// Per-observation consumer with an associative merge.
///
/// The engine hands each chunk a [`Sink::fresh`] copy and merges the copies
/// back in chunk order, so `merge` only has to be correct for a left operand
/// that precedes the right one in time.
pub trait Sink: Send + Sized {
    /// Steps past each observation this sink needs to see.
    fn horizon(&self) -> usize {
        0
    }

    fn observe(&mut self, t: u64, x: &[f64]);

    /// States after the last observation of a chunk, at most `horizon()` of them.
    fn observe_tail(&mut self, _x: &[f64]) {}

    /// Empty sink with the same configuration.
    fn fresh(&self) -> Self;

    fn merge(&mut self, later: Self);
}

macro_rules! tuple_sink {
    ($($name:ident : $idx:tt),+) => {
        impl<$($name: Sink),+> Sink for ($($name,)+) {
            fn horizon(&self) -> usize {
                0 $(.max(self.$idx.horizon()))+
            }
            fn observe(&mut self, t: u64, x: &[f64]) {
                $(self.$idx.observe(t, x);)+
            }
            fn observe_tail(&mut self, x: &[f64]) {
                $(self.$idx.observe_tail(x);)+
            }
            fn fresh(&self) -> Self {
                ($(self.$idx.fresh(),)+)
            }
            fn merge(&mut self, later: Self) {
                $(self.$idx.merge(later.$idx);)+
            }
        }
    };
}

tuple_sink!(A: 0, B: 1);
tuple_sink!(A: 0, B: 1, C: 2);
tuple_sink!(A: 0, B: 1, C: 2, D: 3);

/// Keeps the raw trajectory; meant for short debugging runs.
#[derive(Debug, Clone)]
pub struct DumpSink {
    d: usize,
    cap: usize,
    data: Vec<f64>,
}

pub const DUMP_MAGIC: &[u8; 4] = b"DSRE";
pub const DUMP_VERSION: u32 = 1;
pub const DUMP_HEADER_LEN: usize = 32;

impl DumpSink {
    /// Refuses trajectories longer than `max_steps`.
    pub fn new(d: usize, max_steps: usize) -> Self {
        DumpSink {
            d,
            cap: max_steps,
            data: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.d.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Little-endian layout: magic, version (u32), d (u64), length (u64),
    /// 8 reserved zero bytes, then `d` f64 values per step.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        if self.len() > self.cap {
            return Err(Error::InvalidArgument(format!(
                "raw dump limited to {} steps, trajectory has {}",
                self.cap,
                self.len()
            )));
        }
        let mut header = [0u8; DUMP_HEADER_LEN];
        header[..4].copy_from_slice(DUMP_MAGIC);
        header[4..8].copy_from_slice(&DUMP_VERSION.to_le_bytes());
        header[8..16].copy_from_slice(&(self.d as u64).to_le_bytes());
        header[16..24].copy_from_slice(&(self.len() as u64).to_le_bytes());
        w.write_all(&header)?;
        let mut buf = Vec::with_capacity(self.data.len() * 8);
        for v in &self.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }
}

impl Sink for DumpSink {
    fn observe(&mut self, _t: u64, x: &[f64]) {
        if self.len() <= self.cap {
            self.data.extend_from_slice(x);
        }
    }

    fn fresh(&self) -> Self {
        DumpSink::new(self.d, self.cap)
    }

    fn merge(&mut self, later: Self) {
        self.data.extend(later.data);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_layout() {
        let mut s = DumpSink::new(2, 10);
        s.observe(0, &[1.0, 2.0]);
        s.observe(1, &[3.0, 4.0]);
        let mut out = Vec::new();
        s.write_to(&mut out).unwrap();
        assert_eq!(out.len(), DUMP_HEADER_LEN + 4 * 8);
        assert_eq!(&out[..4], b"DSRE");
        assert_eq!(u64::from_le_bytes(out[8..16].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(out[16..24].try_into().unwrap()), 2);
        assert_eq!(f64::from_le_bytes(out[56..64].try_into().unwrap()), 4.0);
    }

    #[test]
    fn oversized_dump_is_refused() {
        let mut s = DumpSink::new(1, 2);
        for t in 0..5 {
            s.observe(t, &[t as f64]);
        }
        assert!(s.write_to(Vec::new()).is_err());
    }
}
