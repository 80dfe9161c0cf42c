//! Small expression language for piecewise definitions.
//!
//! Expressions use `+ - * / ^`, numbers, `pi`, `inf`, the variables `x`
//! (alias of `x1` in one dimension) or `x1 .. xn`, and the functions
//! `abs`, `sqrt`, `sin`, `cos`, `min`, `max`. Conditions compare two
//! expressions with `< <= > >= == !=` and combine with `and` / `or`.

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Func {
    Abs,
    Sqrt,
    Sin,
    Cos,
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cmp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cond {
    Always,
    Cmp(Cmp, Expr, Expr),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x[*i],
            Expr::Neg(e) => -e.eval(x),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => {
                        if b.fract() == 0.0 && b.abs() < 64.0 {
                            a.powi(b as i32)
                        } else {
                            a.powf(b)
                        }
                    }
                }
            }
            Expr::Call(f, args) => {
                let v: Vec<f64> = args.iter().map(|a| a.eval(x)).collect();
                match f {
                    Func::Abs => v[0].abs(),
                    Func::Sqrt => v[0].sqrt(),
                    Func::Sin => v[0].sin(),
                    Func::Cos => v[0].cos(),
                    Func::Min => v.into_iter().fold(f64::INFINITY, f64::min),
                    Func::Max => v.into_iter().fold(f64::NEG_INFINITY, f64::max),
                }
            }
        }
    }
}

impl Cond {
    pub fn holds(&self, x: &[f64]) -> bool {
        match self {
            Cond::Always => true,
            Cond::Cmp(c, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match c {
                    Cmp::Lt => a < b,
                    Cmp::Le => a <= b,
                    Cmp::Gt => a > b,
                    Cmp::Ge => a >= b,
                    Cmp::Eq => a == b,
                    Cmp::Ne => a != b,
                }
            }
            Cond::And(a, b) => a.holds(x) && b.holds(x),
            Cond::Or(a, b) => a.holds(x) || b.holds(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(&'static str),
}

fn lex(s: &str) -> Result<Vec<Tok>, String> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            if i < cs.len() && (cs[i] == 'e' || cs[i] == 'E') {
                let save = i;
                i += 1;
                if i < cs.len() && (cs[i] == '+' || cs[i] == '-') {
                    i += 1;
                }
                if i < cs.len() && cs[i].is_ascii_digit() {
                    while i < cs.len() && cs[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let text: String = cs[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| format!("bad number {text:?}"))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(cs[start..i].iter().collect()));
        } else {
            let two: String = cs[i..(i + 2).min(cs.len())].iter().collect();
            let sym = ["<=", ">=", "==", "!="].into_iter().find(|s| *s == two);
            if let Some(s) = sym {
                out.push(Tok::Sym(s));
                i += 2;
                continue;
            }
            let one = ["+", "-", "*", "/", "^", "(", ")", ",", "<", ">"]
                .into_iter()
                .find(|s| s.starts_with(c))
                .ok_or_else(|| format!("unexpected character {c:?}"))?;
            out.push(Tok::Sym(one));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(t)) if *t == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(t)) if t == w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), String> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(format!("expected {s:?} but found {}", self.describe_next()))
        }
    }

    fn describe_next(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(Tok::Num(v)) => format!("{v}"),
            Some(Tok::Ident(s)) => format!("{s:?}"),
            Some(Tok::Sym(s)) => format!("{s:?}"),
        }
    }

    fn expr(&mut self) -> Result<Expr, String> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat_sym("+") {
                Op::Add
            } else if self.eat_sym("-") {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, String> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat_sym("*") {
                Op::Mul
            } else if self.eat_sym("/") {
                Op::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, String> {
        if self.eat_sym("-") {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat_sym("+") {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat_sym("^") {
            let exp = self.unary()?;
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, String> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                self.ident(&name)
            }
            _ => Err(format!("expected an expression but found {}", self.describe_next())),
        }
    }

    fn ident(&mut self, name: &str) -> Result<Expr, String> {
        match name {
            "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
            "inf" => return Ok(Expr::Num(f64::INFINITY)),
            "x" if self.dim == 1 => return Ok(Expr::Var(0)),
            _ => {}
        }
        if let Some(idx) = name.strip_prefix('x').and_then(|r| r.parse::<usize>().ok()) {
            if idx == 0 || idx > self.dim {
                return Err(format!("variable {name} out of range for dimension {}", self.dim));
            }
            return Ok(Expr::Var(idx - 1));
        }
        let func = match name {
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "min" => Func::Min,
            "max" => Func::Max,
            other => return Err(format!("unknown name {other:?}")),
        };
        self.expect_sym("(")?;
        let mut args = vec![self.expr()?];
        while self.eat_sym(",") {
            args.push(self.expr()?);
        }
        self.expect_sym(")")?;
        let unary = matches!(func, Func::Abs | Func::Sqrt | Func::Sin | Func::Cos);
        if unary && args.len() != 1 {
            return Err(format!("{name} takes one argument, got {}", args.len()));
        }
        Ok(Expr::Call(func, args))
    }

    fn cond(&mut self) -> Result<Cond, String> {
        let mut lhs = self.conj()?;
        while self.eat_word("or") {
            let rhs = self.conj()?;
            lhs = Cond::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<Cond, String> {
        let mut lhs = self.cmp()?;
        while self.eat_word("and") {
            let rhs = self.cmp()?;
            lhs = Cond::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn cmp(&mut self) -> Result<Cond, String> {
        let a = self.expr()?;
        let op = match self.peek() {
            Some(Tok::Sym("<")) => Cmp::Lt,
            Some(Tok::Sym("<=")) => Cmp::Le,
            Some(Tok::Sym(">")) => Cmp::Gt,
            Some(Tok::Sym(">=")) => Cmp::Ge,
            Some(Tok::Sym("==")) => Cmp::Eq,
            Some(Tok::Sym("!=")) => Cmp::Ne,
            _ => return Err(format!("expected a comparison but found {}", self.describe_next())),
        };
        self.pos += 1;
        let b = self.expr()?;
        Ok(Cond::Cmp(op, a, b))
    }

    fn finish(&self) -> Result<(), String> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            Err(format!("unexpected trailing {}", self.describe_next()))
        }
    }
}

pub fn parse_expr(s: &str, dim: usize) -> Result<Expr, String> {
    let mut p = Parser { toks: lex(s)?, pos: 0, dim };
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

pub fn parse_cond(s: &str, dim: usize) -> Result<Cond, String> {
    let t = s.trim();
    if t == "otherwise" || t == "else" || t == "true" {
        return Ok(Cond::Always);
    }
    let mut p = Parser { toks: lex(s)?, pos: 0, dim };
    let c = p.cond()?;
    p.finish()?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_functions() {
        let e = parse_expr("-x^2 + 3*abs(x) / 2", 1).unwrap();
        assert_eq!(e.eval(&[2.0]), -4.0 + 3.0);
        let m = parse_expr("max(x1, -x1 + x2, -x2)", 2).unwrap();
        assert_eq!(m.eval(&[1.0, 3.0]), 2.0);
        let s = parse_expr("x*sin(1/x)", 1).unwrap();
        assert!((s.eval(&[0.5]) - 0.5 * 2f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn conditions() {
        let c = parse_cond("x >= 0 and x <= 1", 1).unwrap();
        assert!(c.holds(&[0.5]));
        assert!(!c.holds(&[1.5]));
        assert_eq!(parse_cond("otherwise", 1).unwrap(), Cond::Always);
    }

    #[test]
    fn errors_are_descriptive() {
        assert!(parse_expr("tan(x)", 1).unwrap_err().contains("tan"));
        assert!(parse_expr("x3", 2).unwrap_err().contains("out of range"));
        assert!(parse_expr("(x", 1).unwrap_err().contains("\")\""));
    }
}
