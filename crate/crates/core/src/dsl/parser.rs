use num_rational::Ratio;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::SyntaxError;

pub(crate) const KEYWORDS: &[&str] = &[
    "world", "tasks", "robots", "mission", "loc", "dist", "atomic", "compound", "ordered", "needs", "robot", "at",
    "velocity", "can", "time", "prob", "do", "boundary", "maxidle", "all",
];

/// Parses a problem file into an unvalidated [`ProblemSpec`].
pub fn parse_problem(src: &str) -> Result<ProblemSpec, SyntaxError> {
    let tokens = tokenize(src)?;
    Parser { tokens, pos: 0 }.problem()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let t = self.peek();
        Err(SyntaxError::new(t.span, expected.iter().map(|s| s.to_string()).collect(), t.tok.describe()))
    }

    fn skip_seps(&mut self) {
        while self.peek().tok == Tok::Sep {
            self.bump();
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<Span> {
        if self.at_keyword(kw) {
            Ok(self.bump().span)
        } else {
            self.error(&[&format!("`{kw}`")])
        }
    }

    fn punct(&mut self, tok: Tok) -> PResult<()> {
        if self.peek().tok == tok {
            self.bump();
            Ok(())
        } else {
            self.error(&[&tok.describe()])
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match &self.peek().tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn int(&mut self) -> PResult<i64> {
        match self.peek().tok {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.error(&["integer"]),
        }
    }

    fn natural<T: TryFrom<i64>>(&mut self) -> PResult<T> {
        match self.peek().tok {
            Tok::Int(n) if n >= 0 => match T::try_from(n) {
                Ok(v) => {
                    self.bump();
                    Ok(v)
                }
                Err(_) => self.error(&["smaller non-negative integer"]),
            },
            _ => self.error(&["non-negative integer"]),
        }
    }

    fn probability(&mut self) -> PResult<f64> {
        let t = self.peek().clone();
        let v = match &t.tok {
            Tok::Int(n) => *n as f64,
            Tok::Decimal(s) => s.parse::<f64>().map_err(|_| {
                SyntaxError::new(t.span, vec!["number".into()], t.tok.describe())
            })?,
            _ => return self.error(&["number"]),
        };
        self.bump();
        Ok(v)
    }

    fn velocity(&mut self) -> PResult<Velocity> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Int(n) if *n >= 0 => {
                self.bump();
                let num = *n as u64;
                if self.peek().tok == Tok::Slash {
                    self.bump();
                    let den: u64 = self.natural()?;
                    if den == 0 {
                        return Err(SyntaxError::new(t.span, vec!["non-zero denominator".into()], "`0`".into()));
                    }
                    Ok(Ratio::new(num, den))
                } else {
                    Ok(Ratio::from_integer(num))
                }
            }
            Tok::Decimal(s) if !s.starts_with('-') => {
                let (whole, frac) = s.split_once('.').expect("decimal token has a point");
                let digits = format!("{whole}{frac}");
                let num = digits.parse::<u64>().ok();
                let den = 10u64.checked_pow(frac.len() as u32);
                match (num, den) {
                    (Some(num), Some(den)) => {
                        self.bump();
                        Ok(Ratio::new(num, den))
                    }
                    _ => self.error(&["shorter decimal"]),
                }
            }
            _ => self.error(&["non-negative number"]),
        }
    }

    fn subject(&mut self) -> PResult<Subject> {
        if self.at_keyword("all") {
            self.bump();
            Ok(Subject::All)
        } else {
            match &self.peek().tok {
                Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => Ok(Subject::Robot(self.ident()?)),
                _ => self.error(&["`all`", "identifier"]),
            }
        }
    }

    fn point(&mut self) -> PResult<(i64, i64)> {
        self.punct(Tok::LParen)?;
        let x = self.int()?;
        self.punct(Tok::Comma)?;
        let y = self.int()?;
        self.punct(Tok::RParen)?;
        Ok((x, y))
    }

    /// A statement ends at a separator or just before the closing brace.
    fn end_statement(&mut self) -> PResult<()> {
        match self.peek().tok {
            Tok::Sep => {
                self.bump();
                Ok(())
            }
            Tok::RBrace => Ok(()),
            _ => self.error(&["end of statement", "`}`"]),
        }
    }

    /// Parses `{ stmt* }`, dispatching on the leading keyword of each statement.
    fn block(&mut self, keywords: &[&str], mut stmt: impl FnMut(&mut Self, &str, Span) -> PResult<()>) -> PResult<()> {
        self.punct(Tok::LBrace)?;
        loop {
            self.skip_seps();
            let t = self.peek().clone();
            match &t.tok {
                Tok::RBrace => {
                    self.bump();
                    return Ok(());
                }
                Tok::Ident(kw) if keywords.contains(&kw.as_str()) => {
                    self.bump();
                    stmt(self, kw, t.span)?;
                    self.end_statement()?;
                }
                _ => {
                    let mut expected: Vec<String> = keywords.iter().map(|k| format!("`{k}`")).collect();
                    expected.push("`}`".into());
                    return Err(SyntaxError::new(t.span, expected, t.tok.describe()));
                }
            }
        }
    }

    fn problem(mut self) -> PResult<ProblemSpec> {
        let mut spec = ProblemSpec::default();
        self.skip_seps();
        self.keyword("world")?;
        self.block(&["loc", "dist"], |p, kw, span| {
            if kw == "loc" {
                let id = p.ident()?;
                let (x, y) = p.point()?;
                spec.world.locations.push(Location { id, x, y, span });
            } else {
                let from = p.ident()?;
                let to = p.ident()?;
                let distance = p.natural()?;
                spec.world.distances.push(DistanceEntry { from, to, distance, span });
            }
            Ok(())
        })?;

        self.skip_seps();
        self.keyword("tasks")?;
        self.block(&["atomic", "compound"], |p, kw, span| {
            let id = p.ident()?;
            if kw == "atomic" {
                p.keyword("needs")?;
                let robots_needed = p.natural()?;
                spec.tasks.atomic.push(AtomicTaskDef { id, robots_needed, span });
            } else {
                let ordered = if p.at_keyword("ordered") {
                    p.bump();
                    true
                } else {
                    false
                };
                if p.peek().tok != Tok::LBrace {
                    return p.error(&["`ordered`", "`{`"]);
                }
                p.bump();
                p.skip_seps();
                let mut subtasks = vec![p.ident()?];
                loop {
                    p.skip_seps();
                    match p.peek().tok {
                        Tok::Comma => {
                            p.bump();
                            p.skip_seps();
                            subtasks.push(p.ident()?);
                        }
                        Tok::RBrace => {
                            p.bump();
                            break;
                        }
                        _ => return p.error(&["`,`", "`}`"]),
                    }
                }
                spec.tasks.compound.push(CompoundTaskDef { id, subtasks, ordered, span });
            }
            Ok(())
        })?;

        self.skip_seps();
        self.keyword("robots")?;
        self.block(&["robot"], |p, _, span| {
            let id = p.ident()?;
            p.keyword("at")?;
            let initial_loc = p.ident()?;
            p.keyword("velocity")?;
            let velocity = p.velocity()?;
            let mut capabilities = Vec::new();
            p.block(&["can"], |p, _, span| {
                let task = p.ident()?;
                p.keyword("time")?;
                let required_time = p.natural()?;
                p.keyword("prob")?;
                let success_prob = p.probability()?;
                capabilities.push(Capability { task, required_time, success_prob, span });
                Ok(())
            })?;
            spec.robots.push(RobotDef { id, initial_loc, velocity, capabilities, span });
            Ok(())
        })?;

        self.skip_seps();
        spec.mission.span = self.keyword("mission")?;
        self.block(&["do", "boundary", "time", "maxidle"], |p, kw, span| {
            match kw {
                "do" => {
                    let task = p.ident()?;
                    p.keyword("at")?;
                    let location = p.ident()?;
                    spec.mission.tasks.push(MissionTaskRef { task, location, span });
                }
                "boundary" => {
                    let subject = p.subject()?;
                    let (min_x, min_y) = p.point()?;
                    let (max_x, max_y) = p.point()?;
                    let rect = Rect { min_x, min_y, max_x, max_y };
                    spec.mission.constraints.push(ConstraintSpec::Boundary { subject, rect, span });
                }
                "time" => {
                    let budget = p.natural()?;
                    spec.mission.constraints.push(ConstraintSpec::TimeAvailable { budget, span });
                }
                _ => {
                    let subject = p.subject()?;
                    let budget = p.natural()?;
                    spec.mission.constraints.push(ConstraintSpec::MaxIdle { subject, budget, span });
                }
            }
            Ok(())
        })?;

        self.skip_seps();
        if self.peek().tok != Tok::Eof {
            return self.error(&["end of input"]);
        }
        Ok(spec)
    }
}
