//! Generation expansion planning: the power-system data model, time
//! compression, model assembly, re-dispatch pricing, scenario I/O and
//! reporting.

pub mod expansion;
pub mod io;
pub mod pipeline;
pub mod redispatch;
pub mod report;
pub mod system;
pub mod timegrid;
