use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::events::{ReconnectionEvent, TimelineRow};
use super::extract::VortexCurveSet;
use super::VortexError;

/// `t,component_id,vertex_index,x,y,z`; vertices of merged polylines are numbered consecutively.
pub fn write_curves_csv(path: &Path, sets: &[VortexCurveSet]) -> Result<(), VortexError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,component_id,vertex_index,x,y,z")?;
    for s in sets {
        for (c, comp) in s.components.iter().enumerate() {
            for (v, p) in comp.vertices().enumerate() {
                writeln!(w, "{},{},{},{},{},{}", s.t, c, v, p[0], p[1], p[2])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_timeline_csv(path: &Path, rows: &[TimelineRow]) -> Result<(), VortexError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,count,parity")?;
    for r in rows {
        writeln!(w, "{},{},{}", r.t, r.count, r.parity)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_separation_csv(path: &Path, series: &[(f64, f64)]) -> Result<(), VortexError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,d")?;
    for (t, d) in series {
        writeln!(w, "{t},{d}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_events_json(path: &Path, events: &[ReconnectionEvent]) -> Result<(), VortexError> {
    std::fs::write(path, serde_json::to_string_pretty(events)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vortex::{EventKind, TimelineRow};

    #[test]
    fn headers_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("tl.csv");
        write_timeline_csv(&p, &[TimelineRow { t: 0.5, count: 3, parity: 1 }]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "t,count,parity\n0.5,3,1\n");
        let p = dir.path().join("sep.csv");
        write_separation_csv(&p, &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "t,d\n");
        let p = dir.path().join("ev.json");
        let ev = ReconnectionEvent {
            t_star: 0.0,
            kind: EventKind::Exchange,
            parity_before: 0,
            parity_after: 1,
            parity_sequence: vec![0, 1, 0],
            count_before: 2,
            count_after: 2,
            bracket: [-0.1, 0.1],
            exclusion: [-0.3, 0.3],
            fit: None,
            note: None,
        };
        write_events_json(&p, &[ev.clone()]).unwrap();
        let back: Vec<ReconnectionEvent> = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(back, vec![ev]);
        assert!(std::fs::read_to_string(&p).unwrap().contains("\"exchange\""));
    }
}
