use std::fmt::Write as _;

use crate::mdp::{Event, Plan};

const LANE: u32 = 28;
const LEFT: u32 = 60;
const TOP: u32 = 40;
const UNIT: u32 = 8;

fn style(e: &Event) -> (&'static str, &'static str) {
    match e {
        Event::Travel { .. } => ("travel", "#8fb8de"),
        Event::Execute { .. } => ("execute", "#6cc070"),
        Event::Idle { .. } => ("idle", "#d9d9d9"),
        Event::JointSync { .. } => ("joint", "#f0a35e"),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_step(span: u32) -> u32 {
    [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000].into_iter().find(|s| span / s <= 12).unwrap_or(span.div_ceil(12).max(1))
}

/// SVG Gantt chart with one lane per robot and the time axis in mission time units.
pub fn gantt_svg(plan: &Plan, title: &str) -> String {
    let span = plan.makespan();
    let width = LEFT + span * UNIT + 40;
    let height = TOP + plan.timelines.len() as u32 * LANE + 40;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="monospace" font-size="11">"#
    );
    let _ = writeln!(out, r#"<text x="{LEFT}" y="20" font-size="13">{}</text>"#, escape(title));
    for (k, tl) in plan.timelines.iter().enumerate() {
        let y = TOP + k as u32 * LANE;
        let _ = writeln!(out, r#"<text x="4" y="{}">{}</text>"#, y + 17, escape(&tl.robot));
        for e in &tl.events {
            let (s, t) = e.span();
            let (class, fill) = style(e);
            let x = LEFT + s * UNIT;
            let w = (t - s) * UNIT;
            let _ = write!(
                out,
                r##"<rect class="{class}" x="{x}" y="{}" width="{w}" height="{}" fill="{fill}" stroke="#444" stroke-width="0.5">"##,
                y + 4,
                LANE - 8
            );
            let label = match e {
                Event::Travel { from, to, .. } => format!("{from} to {to}"),
                Event::Execute { instance, .. } | Event::JointSync { instance, .. } => instance.clone(),
                Event::Idle { .. } => "idle".to_string(),
            };
            let _ = writeln!(out, "<title>{} {s}-{t}</title></rect>", escape(&label));
            if matches!(e, Event::Execute { .. } | Event::JointSync { .. }) && w >= 40 {
                let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="9">{}</text>"#, x + 2, y + 17, escape(&label));
            }
        }
    }
    if !plan.timelines.is_empty() {
        let axis_y = TOP + plan.timelines.len() as u32 * LANE + 8;
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{axis_y}" x2="{}" y2="{axis_y}" stroke="#000"/>"##,
            LEFT + span * UNIT
        );
        let step = tick_step(span);
        let mut t = 0;
        while t <= span {
            let x = LEFT + t * UNIT;
            let _ = writeln!(out, r##"<line x1="{x}" y1="{axis_y}" x2="{x}" y2="{}" stroke="#000"/>"##, axis_y + 4);
            let _ = writeln!(out, r#"<text x="{x}" y="{}" text-anchor="middle">{t}</text>"#, axis_y + 16);
            t += step;
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Plain-text Gantt: one character per time unit, `~` travel, `#` execute,
/// `=` joint execution, `.` idle.
pub fn gantt_text(plan: &Plan) -> String {
    let width = plan.timelines.iter().map(|t| t.robot.len()).max().unwrap_or(0);
    let mut out = String::new();
    for tl in &plan.timelines {
        let mut lane = String::new();
        for e in &tl.events {
            let (s, t) = e.span();
            let c = match e {
                Event::Travel { .. } => '~',
                Event::Execute { .. } => '#',
                Event::JointSync { .. } => '=',
                Event::Idle { .. } => '.',
            };
            lane.extend(std::iter::repeat_n(c, (t - s) as usize));
        }
        let _ = writeln!(out, "{:width$} |{lane}", tl.robot);
    }
    out
}
