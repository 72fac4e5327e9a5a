use std::io::{self, BufWriter, Write};

/// Line-delimited interaction trace:
/// `step_index,initiator_index,responder_index,initiator_before,responder_before,initiator_after,responder_after`.
///
/// Only state-changing interactions are written.
pub struct TraceSink {
    out: BufWriter<Box<dyn Write + Send>>,
}

impl TraceSink {
    pub fn new(out: Box<dyn Write + Send>) -> Self {
        Self {
            out: BufWriter::new(out),
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn record(
        &mut self,
        step: u64,
        initiator: usize,
        responder: usize,
        initiator_before: &str,
        responder_before: &str,
        initiator_after: &str,
        responder_after: &str,
    ) -> io::Result<()> {
        writeln!(
            self.out,
            "{step},{initiator},{responder},{},{},{},{}",
            escape(initiator_before),
            escape(responder_before),
            escape(initiator_after),
            escape(responder_after)
        )
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}

// State encodings must not contain the field separator.
fn escape(s: &str) -> String {
    s.replace(',', ";")
}
