use std::fmt;

use crate::error::{Error, Result};

/// The fixed attribute vocabulary rules may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Attribute {
    Area,
    Perimeter,
    Width,
    Elongation,
    Compactness,
    MeanIntensity,
    ClassProb,
    SomCell,
}

impl Attribute {
    pub const ALL: [Attribute; 8] = [
        Attribute::Area,
        Attribute::Perimeter,
        Attribute::Width,
        Attribute::Elongation,
        Attribute::Compactness,
        Attribute::MeanIntensity,
        Attribute::ClassProb,
        Attribute::SomCell,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Area => "area",
            Attribute::Perimeter => "perimeter",
            Attribute::Width => "width",
            Attribute::Elongation => "elongation",
            Attribute::Compactness => "compactness",
            Attribute::MeanIntensity => "mean_intensity",
            Attribute::ClassProb => "class_prob",
            Attribute::SomCell => "som_cell",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Attribute::ALL.into_iter().find(|a| a.name() == name)
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Shape and radiometric attributes of one extracted object.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AttributeSet {
    pub area: f64,
    pub perimeter: f64,
    pub width: f64,
    pub elongation: f64,
    pub compactness: f64,
    pub mean_intensity: f64,
    pub class_prob: f64,
    /// Row-major SOM unit index, or -1 when the bundle carries no SOM.
    pub som_cell: i64,
}

impl AttributeSet {
    pub fn get(&self, a: Attribute) -> f64 {
        match a {
            Attribute::Area => self.area,
            Attribute::Perimeter => self.perimeter,
            Attribute::Width => self.width,
            Attribute::Elongation => self.elongation,
            Attribute::Compactness => self.compactness,
            Attribute::MeanIntensity => self.mean_intensity,
            Attribute::ClassProb => self.class_prob,
            Attribute::SomCell => self.som_cell as f64,
        }
    }

    pub fn set(&mut self, a: Attribute, v: f64) {
        match a {
            Attribute::Area => self.area = v,
            Attribute::Perimeter => self.perimeter = v,
            Attribute::Width => self.width = v,
            Attribute::Elongation => self.elongation = v,
            Attribute::Compactness => self.compactness = v,
            Attribute::MeanIntensity => self.mean_intensity = v,
            Attribute::ClassProb => self.class_prob = v,
            Attribute::SomCell => self.som_cell = v as i64,
        }
    }

    /// Builds from `(name, value)` pairs; every vocabulary name must appear
    /// exactly once with a finite value.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self> {
        let mut out = AttributeSet::default();
        let mut seen = [false; 8];
        for (name, v) in pairs {
            let a = Attribute::from_name(name)
                .ok_or_else(|| Error::InvalidAttributes(format!("unknown attribute `{name}`")))?;
            if seen[a as usize] {
                return Err(Error::InvalidAttributes(format!("attribute `{name}` repeated")));
            }
            seen[a as usize] = true;
            out.set(a, v);
        }
        if let Some(missing) = Attribute::ALL.iter().find(|a| !seen[**a as usize]) {
            return Err(Error::InvalidAttributes(format!("attribute `{missing}` missing")));
        }
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        for a in Attribute::ALL {
            if !self.get(a).is_finite() {
                return Err(Error::InvalidAttributes(format!("attribute `{a}` is not finite")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge, CmpOp::Eq, CmpOp::Ne];

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn apply(self, lhs: f64, rhs: f64) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub attr: Attribute,
    pub op: CmpOp,
    pub value: f64,
}

impl Comparison {
    pub fn eval(&self, a: &AttributeSet) -> bool {
        self.op.apply(a.get(self.attr), self.value)
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.attr, self.op.symbol(), self.value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Or(Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Cmp(Comparison),
}

impl Expr {
    pub fn cmp(attr: Attribute, op: CmpOp, value: f64) -> Expr {
        Expr::Cmp(Comparison { attr, op, value })
    }

    pub fn and(l: Expr, r: Expr) -> Expr {
        Expr::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Expr, r: Expr) -> Expr {
        Expr::Or(Box::new(l), Box::new(r))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    /// Short-circuit, left-to-right evaluation.
    pub fn eval(&self, a: &AttributeSet) -> bool {
        match self {
            Expr::Or(l, r) => l.eval(a) || r.eval(a),
            Expr::And(l, r) => l.eval(a) && r.eval(a),
            Expr::Not(e) => !e.eval(a),
            Expr::Cmp(c) => c.eval(a),
        }
    }

    /// For an expression that evaluates false: the first leaf, in evaluation
    /// order, responsible for the failure. Leaves reached through a `not`
    /// are reported with a `not ` prefix.
    pub(crate) fn failing_leaf(&self, a: &AttributeSet) -> String {
        match self {
            Expr::Cmp(c) => c.to_string(),
            Expr::And(l, r) => {
                if l.eval(a) {
                    r.failing_leaf(a)
                } else {
                    l.failing_leaf(a)
                }
            }
            Expr::Or(l, _) => l.failing_leaf(a),
            Expr::Not(e) => format!("not {}", e.satisfied_leaf(a)),
        }
    }

    fn satisfied_leaf(&self, a: &AttributeSet) -> String {
        match self {
            Expr::Cmp(c) => c.to_string(),
            Expr::And(l, _) => l.satisfied_leaf(a),
            Expr::Or(l, r) => {
                if l.eval(a) {
                    l.satisfied_leaf(a)
                } else {
                    r.satisfied_leaf(a)
                }
            }
            Expr::Not(e) => format!("not {}", e.failing_leaf(a)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Or(..) => 1,
            Expr::And(..) => 2,
            Expr::Not(_) => 3,
            Expr::Cmp(_) => 4,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // binary operators are left-associative: the right child needs parens at equal precedence
            Expr::Or(l, r) => {
                l.write_child(f, 1)?;
                f.write_str(" or ")?;
                r.write_child(f, 2)
            }
            Expr::And(l, r) => {
                l.write_child(f, 2)?;
                f.write_str(" and ")?;
                r.write_child(f, 3)
            }
            Expr::Not(e) => {
                f.write_str("not ")?;
                e.write_child(f, 3)
            }
            Expr::Cmp(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub name: String,
    pub label: String,
    pub priority: i64,
    pub condition: Expr,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {} -> \"", self.name)?;
        for ch in self.label.chars() {
            match ch {
                '"' => f.write_str("\\\"")?,
                '\\' => f.write_str("\\\\")?,
                '\n' => f.write_str("\\n")?,
                c => write!(f, "{c}")?,
            }
        }
        f.write_str("\"")?;
        if self.priority != 0 {
            write!(f, " priority {}", self.priority)?;
        }
        write!(f, " {{ {} }}", self.condition)
    }
}
