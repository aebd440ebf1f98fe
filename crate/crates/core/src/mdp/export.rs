use std::fmt::Write as _;

use super::model::{Mdp, ROBOT_SLOTS};

/// Plain-text dump of a model: a transitions section with one
/// `src action prob dst travel idle` line per branch, a labels section and,
/// when present, the state valuations.
pub fn dump_mdp(m: &Mdp) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "states {} choices {} transitions {} initial {}", m.num_states(), m.num_choices(), m.num_transitions(), m.initial());
    out.push_str("transitions\n");
    for s in 0..m.num_states() {
        for c in m.choices(s) {
            let name = m.action_name(&c.action);
            for &(t, p) in m.branches(c) {
                let _ = writeln!(out, "{s} {name} {p} {t} {} {}", c.travel, c.idle);
            }
        }
    }
    out.push_str("labels\n");
    for (name, flags) in [("done", &m.done), ("success", &m.success)] {
        let ids: Vec<String> = (0..flags.len()).filter(|&s| flags[s]).map(|s| s.to_string()).collect();
        let _ = writeln!(out, "{name}: {}", ids.join(" "));
    }
    if let (Some(meta), false) = (&m.meta, m.valuations.is_empty()) {
        out.push_str("valuations\n");
        let n = meta.robots.len();
        for (s, val) in m.valuations.iter().enumerate() {
            let mut line = s.to_string();
            for r in 0..n {
                let v = &val[r * ROBOT_SLOTS..(r + 1) * ROBOT_SLOTS];
                let _ = write!(line, " {}=({},{},{},{})", meta.robot_names[r], v[0], v[1], v[2], v[3]);
            }
            let _ = write!(line, " failed={}", val[n * ROBOT_SLOTS]);
            for (k, &i) in meta.tracked.iter().enumerate() {
                match val[n * ROBOT_SLOTS + 1 + k] {
                    0 => {
                        let _ = write!(line, " {}=-", meta.instance_names[i]);
                    }
                    t => {
                        let _ = write!(line, " {}={}", meta.instance_names[i], t - 1);
                    }
                }
            }
            out.push_str(&line);
            out.push('\n');
        }
    }
    out
}
