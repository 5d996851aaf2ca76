//! A small arithmetic expression language used for right-hand sides, user Ψ
//! formulas and nonlocal combiners.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?          (right associative)
//! primary := number | constant | variable | func '(' args ')' | '(' expr ')'
//! args    := expr (',' expr)*
//! func    := sin | cos | exp | ln | abs | sqrt | pow | gamma
//! constant:= pi | e
//! ```
//!
//! `^` binds tighter than unary minus, so `-2^2` is `-4`.

mod eval;
mod parser;

use std::fmt;
use std::ops::Range;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Abs,
    Sqrt,
    Pow,
    Gamma,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "pow" => Func::Pow,
            "gamma" => Func::Gamma,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Pow => "pow",
            Func::Gamma => "gamma",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

#[derive(Debug, Clone)]
pub enum Node {
    Num(f64),
    Const(Constant),
    /// Index into the declared variable list.
    Var(usize),
    Neg(Box<Ast>),
    Binary(BinOp, Box<Ast>, Box<Ast>),
    Call(Func, Vec<Ast>),
}

/// A node together with the byte span it was parsed from.
#[derive(Debug, Clone)]
pub struct Ast {
    pub node: Node,
    pub span: Range<usize>,
}

impl Ast {
    /// Structural equality, ignoring source spans.
    pub fn same_structure(&self, other: &Ast) -> bool {
        match (&self.node, &other.node) {
            (Node::Num(a), Node::Num(b)) => a.to_bits() == b.to_bits(),
            (Node::Const(a), Node::Const(b)) => a == b,
            (Node::Var(a), Node::Var(b)) => a == b,
            (Node::Neg(a), Node::Neg(b)) => a.same_structure(b),
            (Node::Binary(op1, l1, r1), Node::Binary(op2, l2, r2)) => {
                op1 == op2 && l1.same_structure(l2) && r1.same_structure(r2)
            }
            (Node::Call(f1, a1), Node::Call(f2, a2)) => {
                f1 == f2
                    && a1.len() == a2.len()
                    && a1.iter().zip(a2).all(|(x, y)| x.same_structure(y))
            }
            _ => false,
        }
    }

    fn references(&self, var: usize) -> bool {
        match &self.node {
            Node::Var(v) => *v == var,
            Node::Num(_) | Node::Const(_) => false,
            Node::Neg(a) => a.references(var),
            Node::Binary(_, l, r) => l.references(var) || r.references(var),
            Node::Call(_, args) => args.iter().any(|a| a.references(var)),
        }
    }
}

/// A parsed expression bound to an ordered list of variable names.
#[derive(Debug, Clone)]
pub struct Expr {
    source: String,
    variables: Vec<String>,
    root: Ast,
}

impl Expr {
    /// Parses `src`; every identifier must be a declared variable, a constant
    /// or a known function.
    pub fn parse(src: &str, variables: &[&str]) -> Result<Expr> {
        let variables: Vec<String> = variables.iter().map(|v| v.to_string()).collect();
        let root = parser::parse(src, &variables)?;
        Ok(Expr {
            source: src.to_string(),
            variables,
            root,
        })
    }

    /// Evaluates with positional bindings in declaration order.
    pub fn eval(&self, values: &[f64]) -> Result<f64> {
        assert_eq!(
            values.len(),
            self.variables.len(),
            "expression expects {} bindings",
            self.variables.len()
        );
        eval::eval(&self.root, values, &self.source)
    }

    /// Evaluates with named bindings; names not used by the expression may be
    /// omitted.
    pub fn eval_named(&self, bindings: &[(&str, f64)]) -> Result<f64> {
        let mut values = vec![f64::NAN; self.variables.len()];
        for (i, name) in self.variables.iter().enumerate() {
            match bindings.iter().find(|(n, _)| n == name) {
                Some((_, v)) => values[i] = *v,
                None if self.root.references(i) => {
                    return Err(crate::Error::Eval {
                        span: 0..self.source.len(),
                        snippet: self.source.clone(),
                        message: format!("no binding for variable `{name}`"),
                    })
                }
                None => values[i] = 0.0,
            }
        }
        eval::eval(&self.root, &values, &self.source)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn ast(&self) -> &Ast {
        &self.root
    }

    /// Whether the expression mentions the named variable.
    pub fn references(&self, name: &str) -> bool {
        self.variables
            .iter()
            .position(|v| v == name)
            .is_some_and(|i| self.root.references(i))
    }

    /// Fully parenthesised rendering that reparses to the same tree.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        write_ast(&self.root, &self.variables, &mut out);
        out
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

fn write_ast(ast: &Ast, vars: &[String], out: &mut String) {
    match &ast.node {
        Node::Num(v) => out.push_str(&format!("{v:?}")),
        Node::Const(Constant::Pi) => out.push_str("pi"),
        Node::Const(Constant::E) => out.push('e'),
        Node::Var(i) => out.push_str(&vars[*i]),
        Node::Neg(a) => {
            out.push_str("(-");
            write_ast(a, vars, out);
            out.push(')');
        }
        Node::Binary(op, l, r) => {
            out.push('(');
            write_ast(l, vars, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_ast(r, vars, out);
            out.push(')');
        }
        Node::Call(func, args) => {
            out.push_str(func.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_ast(a, vars, out);
            }
            out.push(')');
        }
    }
}
