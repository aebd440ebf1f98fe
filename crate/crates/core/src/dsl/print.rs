use std::fmt::Write;

use super::ast::*;

fn velocity(v: &Velocity) -> String {
    if *v.denom() == 1 {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

fn subject(s: &Subject) -> &str {
    match s {
        Subject::All => "all",
        Subject::Robot(r) => r,
    }
}

/// Renders a problem in canonical layout. Parsing the output yields a tree
/// equal to the input.
pub fn pretty_print(spec: &ProblemSpec) -> String {
    let mut out = String::new();
    let w = &mut out;

    w.push_str("world {\n");
    for l in &spec.world.locations {
        let _ = writeln!(w, "    loc {} ({}, {})", l.id, l.x, l.y);
    }
    for d in &spec.world.distances {
        let _ = writeln!(w, "    dist {} {} {}", d.from, d.to, d.distance);
    }
    w.push_str("}\n\ntasks {\n");
    for t in &spec.tasks.atomic {
        let _ = writeln!(w, "    atomic {} needs {}", t.id, t.robots_needed);
    }
    for t in &spec.tasks.compound {
        let ordered = if t.ordered { " ordered" } else { "" };
        let _ = writeln!(w, "    compound {}{} {{ {} }}", t.id, ordered, t.subtasks.join(", "));
    }
    w.push_str("}\n\nrobots {\n");
    for r in &spec.robots {
        let _ = writeln!(w, "    robot {} at {} velocity {} {{", r.id, r.initial_loc, velocity(&r.velocity));
        for c in &r.capabilities {
            let _ = writeln!(w, "        can {} time {} prob {}", c.task, c.required_time, c.success_prob);
        }
        w.push_str("    }\n");
    }
    w.push_str("}\n\nmission {\n");
    for m in &spec.mission.tasks {
        let _ = writeln!(w, "    do {} at {}", m.task, m.location);
    }
    for c in &spec.mission.constraints {
        let _ = match c {
            ConstraintSpec::Boundary { subject: s, rect: r, .. } => writeln!(
                w,
                "    boundary {} ({}, {}) ({}, {})",
                subject(s),
                r.min_x,
                r.min_y,
                r.max_x,
                r.max_y
            ),
            ConstraintSpec::TimeAvailable { budget, .. } => writeln!(w, "    time {budget}"),
            ConstraintSpec::MaxIdle { subject: s, budget, .. } => writeln!(w, "    maxidle {} {budget}", subject(s)),
        };
    }
    w.push_str("}\n");
    out
}
