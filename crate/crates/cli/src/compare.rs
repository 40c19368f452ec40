use std::path::PathBuf;

use spatial_qubits::states::{concurrence, fidelity, trace_distance};

use crate::config::read_state;
use crate::error::CliResult;

pub fn run(a: PathBuf, b: PathBuf) -> CliResult<()> {
    let (ra, rb) = (read_state(&a)?, read_state(&b)?);
    println!("fidelity: {:.12}", fidelity(&ra, &rb));
    println!("trace distance: {:.12}", trace_distance(&ra, &rb));
    println!("purity A: {:.12}", ra.purity());
    println!("purity B: {:.12}", rb.purity());
    println!("concurrence A: {:.12}", concurrence(&ra));
    println!("concurrence B: {:.12}", concurrence(&rb));
    Ok(())
}
