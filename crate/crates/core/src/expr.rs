//! Formula ASTs for the catalog: parsing infix text, generic evaluation (plain
//! floats or dual numbers) and prefix printing.

use crate::elliptic::{elliptic_k, jacobi, jacobi_named};
use crate::error::{Error, Result};
use crate::scalar::{c, Scalar};
use std::fmt;

/// Free symbols a formula may mention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sym {
    U,
    V,
    W,
    A,
    B,
    C,
    T,
    X,
    Y,
}

impl Sym {
    fn from_name(s: &str) -> Option<Sym> {
        Some(match s {
            "u" => Sym::U,
            "v" => Sym::V,
            "w" => Sym::W,
            "a" => Sym::A,
            "b" => Sym::B,
            "c" => Sym::C,
            "t" => Sym::T,
            "x" => Sym::X,
            "y" => Sym::Y,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        ["u", "v", "w", "a", "b", "c", "t", "x", "y"][self as usize]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sec,
    Sinh,
    Cosh,
    Tanh,
    Sech,
    Csch,
    Coth,
    Exp,
    Sqrt,
    Abs,
    Atanh,
    Asinh,
    Acos,
    /// atan2(second, first) reduced to [0, 2π)
    Angle,
    /// complete elliptic integral K(modulus)
    K,
    /// Jacobi function by two-letter name, modulus as second argument
    Jacobi(&'static str),
}

const JACOBI: [&str; 12] = ["sn", "cn", "dn", "sc", "dc", "nc", "nd", "sd", "ds", "ns", "cs", "cd"];

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        use Func::*;
        Some(match s {
            "sin" => Sin,
            "cos" => Cos,
            "tan" => Tan,
            "sec" => Sec,
            "sinh" => Sinh,
            "cosh" => Cosh,
            "tanh" => Tanh,
            "sech" => Sech,
            "csch" => Csch,
            "coth" => Coth,
            "exp" => Exp,
            "sqrt" => Sqrt,
            "abs" => Abs,
            "atanh" => Atanh,
            "asinh" => Asinh,
            "acos" => Acos,
            "angle" => Angle,
            "K" => K,
            _ => return JACOBI.iter().find(|&&j| j == s).map(|&j| Jacobi(j)),
        })
    }

    pub fn name(self) -> &'static str {
        use Func::*;
        match self {
            Sin => "sin",
            Cos => "cos",
            Tan => "tan",
            Sec => "sec",
            Sinh => "sinh",
            Cosh => "cosh",
            Tanh => "tanh",
            Sech => "sech",
            Csch => "csch",
            Coth => "coth",
            Exp => "exp",
            Sqrt => "sqrt",
            Abs => "abs",
            Atanh => "atanh",
            Asinh => "asinh",
            Acos => "acos",
            Angle => "angle",
            K => "K",
            Jacobi(n) => n,
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Angle | Func::Jacobi(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Sym),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Values for the free symbols; unset symbols are an error on use.
#[derive(Clone, Copy, Debug, Default)]
pub struct Env<T> {
    vals: [Option<T>; 9],
}

impl<T: Scalar> Env<T> {
    pub fn new() -> Self {
        Env { vals: [None; 9] }
    }

    pub fn set(&mut self, s: Sym, v: T) -> &mut Self {
        self.vals[s as usize] = Some(v);
        self
    }

    pub fn with(mut self, s: Sym, v: T) -> Self {
        self.set(s, v);
        self
    }

    pub fn get(&self, s: Sym) -> Option<T> {
        self.vals[s as usize]
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let toks = lex(src)?;
        let mut p = Parser { toks, pos: 0 };
        let e = p.sum()?;
        if p.pos != p.toks.len() {
            return Err(Error::Parse(format!("trailing input in {src:?}")));
        }
        Ok(e)
    }

    /// Constant value if the formula has no free symbols.
    pub fn constant(&self) -> Option<f64> {
        self.eval::<f64>(&Env::new()).ok()
    }

    pub fn eval<T: Scalar>(&self, env: &Env<T>) -> Result<T> {
        Ok(match self {
            Expr::Num(x) => c(*x),
            Expr::Var(s) => env
                .get(*s)
                .ok_or_else(|| Error::Parse(format!("unbound symbol {}", s.name())))?,
            Expr::Neg(e) => -e.eval(env)?,
            Expr::Bin(op @ (BinOp::Add | BinOp::Sub), l, r) if one_pm_cn(l, r).is_some() => {
                let (arg, k) = one_pm_cn(l, r).unwrap();
                one_pm_cn_eval(*op == BinOp::Add, arg, k, env)?
            }
            Expr::Bin(op, l, r) => {
                let a = l.eval(env)?;
                if let (BinOp::Pow, Expr::Num(n)) = (op, r.as_ref()) {
                    if n.fract() == 0.0 && n.abs() < 64.0 {
                        return Ok(a.powi(*n as i32));
                    }
                }
                let b = r.eval(env)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, args) => {
                let x = args[0].eval(env)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Sec => x.cos().recip(),
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                    Func::Tanh => x.tanh(),
                    Func::Sech => x.cosh().recip(),
                    Func::Csch => x.sinh().recip(),
                    Func::Coth => x.tanh().recip(),
                    Func::Exp => x.exp(),
                    Func::Sqrt => x.sqrt(),
                    Func::Abs => x.abs(),
                    Func::Atanh => x.atanh(),
                    Func::Asinh => x.asinh(),
                    Func::Acos => x.acos(),
                    Func::Angle => {
                        let y = args[1].eval(env)?;
                        let th = y.atan2(x);
                        if th.value() < 0.0 {
                            th + T::pi() * c(2.0)
                        } else {
                            th
                        }
                    }
                    Func::K => elliptic_k(x)?,
                    Func::Jacobi(name) => {
                        let k = args[1].eval(env)?;
                        match *name {
                            "sn" => jacobi(x, k)?.0,
                            "cn" => jacobi(x, k)?.1,
                            "dn" => jacobi(x, k)?.2,
                            _ => jacobi_named(name, x, k)?,
                        }
                    }
                }
            }
        })
    }

    /// Prefix (S-expression) rendering; numbers carry 17 significant digits.
    pub fn prefix(&self) -> String {
        match self {
            Expr::Num(x) => fmt_num(*x),
            Expr::Var(s) => s.name().to_string(),
            Expr::Neg(e) => format!("(neg {})", e.prefix()),
            Expr::Bin(op, l, r) => {
                let o = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                format!("({o} {} {})", l.prefix(), r.prefix())
            }
            Expr::Call(f, args) => {
                let a: Vec<String> = args.iter().map(|e| e.prefix()).collect();
                format!("({} {})", f.name(), a.join(" "))
            }
        }
    }

    pub fn mentions(&self, s: Sym) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == s,
            Expr::Neg(e) => e.mentions(s),
            Expr::Bin(_, l, r) => l.mentions(s) || r.mentions(s),
            Expr::Call(_, args) => args.iter().any(|e| e.mentions(s)),
        }
    }
}

/// Matches `1 ± cn(z, k)`.
fn one_pm_cn<'a>(l: &'a Expr, r: &'a Expr) -> Option<(&'a Expr, &'a Expr)> {
    match (l, r) {
        (Expr::Num(one), Expr::Call(Func::Jacobi("cn"), args)) if *one == 1.0 => Some((&args[0], &args[1])),
        _ => None,
    }
}

/// 1 ± cn(z) without cancellation, from the half-argument values:
/// 1 + cn(2s) = 2cn²(s)/(1 − k²sn⁴(s)), 1 − cn(2s) = 2sn²(s)dn²(s)/(1 − k²sn⁴(s)).
fn one_pm_cn_eval<T: Scalar>(plus: bool, z: &Expr, k: &Expr, env: &Env<T>) -> Result<T> {
    let h = z.eval(env)? * c(0.5);
    let k = k.eval(env)?;
    let (sn, cn, dn) = jacobi(h, k)?;
    let s2 = sn * sn;
    let den = T::one() - k * k * s2 * s2;
    let num = if plus { cn * cn } else { s2 * dn * dn };
    Ok(c::<T>(2.0) * num / den)
}

fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{:.16e}", x);
    // trim the mantissa's trailing zeros but keep it exact to 17 digits
    let (mant, exp) = s.split_once('e').unwrap();
    let mant = mant.trim_end_matches('0').trim_end_matches('.');
    if exp == "0" {
        mant.to_string()
    } else {
        format!("{mant}e{exp}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.prefix())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let b = src.as_bytes();
    let mut i = 0;
    while i < b.len() {
        let ch = b[i] as char;
        if ch.is_ascii_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let st = i;
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && b[j].is_ascii_digit() {
                    i = j;
                    while i < b.len() && b[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s = &src[st..i];
            out.push(Tok::Num(s.parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))?));
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let st = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push(Tok::Ident(src[st..i].to_string()));
        } else if "+-*/^(),".contains(ch) {
            out.push(Tok::Op(ch));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected {ch:?} in {src:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek_op(&self) -> Option<char> {
        match self.toks.get(self.pos) {
            Some(Tok::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, ch: char) -> Result<()> {
        if self.peek_op() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse(format!("expected {ch:?}")))
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut e = self.product()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let r = self.product()?;
            let op = if op == '+' { BinOp::Add } else { BinOp::Sub };
            e = Expr::Bin(op, Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn product(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let r = self.unary()?;
            let op = if op == '*' { BinOp::Mul } else { BinOp::Div };
            e = Expr::Bin(op, Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    // unary minus binds looser than ^, so -t^2 = -(t^2)
    fn unary(&mut self) -> Result<Expr> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let ex = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(ex)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self.toks.get(self.pos).cloned();
        self.pos += 1;
        match tok {
            Some(Tok::Num(x)) => Ok(Expr::Num(x)),
            Some(Tok::Op('(')) => {
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if self.peek_op() == Some('(') {
                    let f = Func::from_name(&name)
                        .ok_or_else(|| Error::Parse(format!("unknown function {name}")))?;
                    self.pos += 1;
                    let mut args = vec![self.sum()?];
                    while self.peek_op() == Some(',') {
                        self.pos += 1;
                        args.push(self.sum()?);
                    }
                    self.expect(')')?;
                    if args.len() != f.arity() {
                        return Err(Error::Parse(format!("{name} takes {} arguments", f.arity())));
                    }
                    return Ok(Expr::Call(f, args));
                }
                match name.as_str() {
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    "inf" => Ok(Expr::Num(f64::INFINITY)),
                    _ => Sym::from_name(&name)
                        .map(Expr::Var)
                        .ok_or_else(|| Error::Parse(format!("unknown symbol {name}"))),
                }
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::Dual;

    fn ev(s: &str, u: f64, v: f64, w: f64) -> f64 {
        let env = Env::new().with(Sym::U, u).with(Sym::V, v).with(Sym::W, w).with(Sym::A, 1.0);
        Expr::parse(s).unwrap().eval(&env).unwrap()
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("-u^2", 3.0, 0.0, 0.0), -9.0);
        assert_eq!(ev("2^3^2", 0.0, 0.0, 0.0), 512.0);
        assert_eq!(ev("u - v - w", 1.0, 2.0, 3.0), -4.0);
        assert_eq!(ev("u/v*w", 6.0, 2.0, 3.0), 9.0);
        assert_eq!(ev("(u+v)^2/4", 1.0, 3.0, 0.0), 4.0);
        assert_eq!(ev("u^-1", 4.0, 0.0, 0.0), 0.25);
        assert_eq!(ev("1e-3*u", 2.0, 0.0, 0.0), 0.002);
    }

    #[test]
    fn negative_base_integer_power() {
        assert_eq!(ev("u^3", -2.0, 0.0, 0.0), -8.0);
    }

    #[test]
    fn functions() {
        assert!((ev("v*cos(w)", 0.0, 2.0, std::f64::consts::FRAC_PI_2)).abs() < 1e-15);
        assert!((ev("angle(u, v)", 0.0, -1.0, 0.0) - 1.5 * std::f64::consts::PI).abs() < 1e-15);
        assert!((ev("sn(K(a/2), a/2)", 0.0, 0.0, 0.0) - 1.0).abs() < 1e-12);
        assert!((ev("sech(u)^2 + tanh(u)^2", 0.7, 0.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((ev("2*pi", 0.0, 0.0, 0.0) - std::f64::consts::TAU).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(Expr::parse("foo(u)"), Err(Error::Parse(_))));
        assert!(matches!(Expr::parse("u +"), Err(Error::Parse(_))));
        assert!(matches!(Expr::parse("sn(u)"), Err(Error::Parse(_))));
        assert!(matches!(Expr::parse("(u"), Err(Error::Parse(_))));
        let e = Expr::parse("ns(u, a)").unwrap();
        let env = Env::new().with(Sym::U, 0.0).with(Sym::A, 0.5);
        assert_eq!(e.eval(&env), Err(Error::PoleEncountered("ns")));
        assert!(Expr::parse("q").is_err());
        assert!(Expr::parse("t").unwrap().eval::<f64>(&Env::new()).is_err());
    }

    #[test]
    fn prefix_form() {
        let e = Expr::parse("a*cosh(v)*cos(w) - 0.5").unwrap();
        assert_eq!(e.prefix(), "(- (* (* a (cosh v)) (cos w)) 5e-1)");
        assert_eq!(Expr::parse("-u^2").unwrap().prefix(), "(neg (^ u 2))");
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn one_plus_cn_is_stable() {
        let k = 0.6f64;
        let big_k = crate::elliptic::elliptic_k(k).unwrap();
        let z = 2.0 * big_k - 1e-3;
        let env = Env::new().with(Sym::U, z).with(Sym::A, k);
        let plus = Expr::parse("1 + cn(u, a)").unwrap().eval(&env).unwrap();
        // 1 + cn(2K − ε) = 1 − cn(ε) = ε²/2 − (1 + 4k²)ε⁴/24 + O(ε⁶)
        let e = 1e-3f64;
        let series = e * e / 2.0 - (1.0 + 4.0 * k * k) * e.powi(4) / 24.0;
        assert!(((plus - series) / series).abs() < 1e-9, "{plus} vs {series}");
        let minus = Expr::parse("1 - cn(u, a)").unwrap().eval(&env).unwrap();
        let direct = 1.0 - jacobi(z, k).unwrap().1;
        assert!((minus - direct).abs() < 1e-15);
        // agrees with the direct form away from the cancellation
        let env = Env::new().with(Sym::U, 0.8).with(Sym::A, k);
        let plus = Expr::parse("1 + cn(u, a)").unwrap().eval(&env).unwrap();
        assert!((plus - (1.0 + jacobi(0.8, k).unwrap().1)).abs() < 1e-15);
    }

    #[test]
    fn dual_gradient() {
        let e = Expr::parse("u*sin(v) + exp(w)").unwrap();
        let env = Env::new()
            .with(Sym::U, Dual::var(2.0, 0))
            .with(Sym::V, Dual::var(0.5, 1))
            .with(Sym::W, Dual::var(0.0, 2));
        let r = e.eval(&env).unwrap();
        assert!((r.d[0] - 0.5f64.sin()).abs() < 1e-15);
        assert!((r.d[1] - 2.0 * 0.5f64.cos()).abs() < 1e-15);
        assert!((r.d[2] - 1.0).abs() < 1e-15);
    }
}
