//! Rule text of the form
//!
//! ```text
//! if <feature> <op> <number> (and <feature> <op> <number>)* then <outcome> [else <outcome>]
//! ```
//!
//! with `<op>` one of `<=`, `>=`, `<`, `>`. Outcomes are numbers, bare
//! identifiers, or double-quoted strings. Keywords are case-insensitive.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::system::{Condition, DecisionSystem, FeatureId, FeatureKind, Op, Outcome, Rule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticKind {
    Syntax,
    UnknownFeature,
    /// A threshold that is not a finite number.
    NonNumericThreshold,
    /// A condition comparing two features instead of a feature and a number.
    FeatureComparison,
    /// `or` inside a premise; only conjunctions are supported.
    Disjunction,
    /// A model consuming the output of another model.
    InternalModelInput,
    DuplicateName,
    MissingDefault,
    Structure,
    /// A feature with zero range in the reference data.
    DegenerateFeature,
}

impl DiagnosticKind {
    fn slug(self) -> &'static str {
        match self {
            DiagnosticKind::Syntax => "syntax",
            DiagnosticKind::UnknownFeature => "unknown-feature",
            DiagnosticKind::NonNumericThreshold => "non-numeric-threshold",
            DiagnosticKind::FeatureComparison => "feature-comparison",
            DiagnosticKind::Disjunction => "disjunction",
            DiagnosticKind::InternalModelInput => "internal-model-input",
            DiagnosticKind::DuplicateName => "duplicate-name",
            DiagnosticKind::MissingDefault => "missing-default",
            DiagnosticKind::Structure => "structure",
            DiagnosticKind::DegenerateFeature => "degenerate-feature",
        }
    }
}

/// 1-based line and column within a rule's source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    /// Set when the diagnostic points into rule text.
    pub position: Option<Position>,
    /// What the diagnostic is about, e.g. `rule R1` or `model m2`.
    pub context: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(kind: DiagnosticKind, context: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            kind,
            position: None,
            context: context.into(),
            message: message.into(),
        }
    }

    pub fn warning(kind: DiagnosticKind, context: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            ..Self::error(kind, context, message)
        }
    }

    pub fn at(mut self, position: Position) -> Self {
        self.position = Some(position);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}] {}", self.kind.slug(), self.context)?;
        if let Some(p) = self.position {
            write!(f, " at {}:{}", p.line, p.column)?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Feature names visible to rule conditions.
#[derive(Clone, Debug, Default)]
pub struct FeatureMap {
    by_name: HashMap<String, FeatureId>,
}

impl FeatureMap {
    pub fn new(features: impl IntoIterator<Item = FeatureId>) -> Self {
        Self {
            by_name: features.into_iter().map(|f| (f.name.clone(), f)).collect(),
        }
    }

    /// Inputs get `0..D`, model outputs `D..D+N`.
    pub fn from_names<S: AsRef<str>>(inputs: &[S], models: &[S]) -> Self {
        let d = inputs.len();
        Self::new(
            inputs
                .iter()
                .enumerate()
                .map(|(i, n)| FeatureId {
                    index: i,
                    name: n.as_ref().to_owned(),
                    kind: FeatureKind::Input,
                })
                .chain(models.iter().enumerate().map(|(k, n)| FeatureId {
                    index: d + k,
                    name: n.as_ref().to_owned(),
                    kind: FeatureKind::Internal,
                })),
        )
    }

    pub fn from_system(system: &DecisionSystem) -> Self {
        Self::new(system.features().iter().cloned())
    }

    pub fn get(&self, name: &str) -> Option<&FeatureId> {
        self.by_name.get(name)
    }

    fn name_of(&self, index: usize) -> Option<&str> {
        self.by_name
            .values()
            .find(|f| f.index == index)
            .map(|f| f.name.as_str())
    }
}

/// A parsed rule plus the default outcome from its `else` clause, if any.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedRule {
    pub rule: Rule,
    pub default: Option<Outcome>,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Str(String),
    Op(Op),
    BadOp(String),
    Bad(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    pos: Position,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

const KEYWORDS: [&str; 5] = ["if", "and", "or", "then", "else"];

fn keyword(tok: &Tok) -> Option<&'static str> {
    match tok {
        Tok::Ident(s) => KEYWORDS.iter().copied().find(|k| s.eq_ignore_ascii_case(k)),
        _ => None,
    }
}

fn tokenize(text: &str, context: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;

    while i < chars.len() {
        let c = chars[i];
        let pos = Position { line, column: col };
        let start = i;
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let starts_number = c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit))
            || ((c == '-' || c == '+') && chars.get(i + 1).is_some_and(|&n| n.is_ascii_digit() || n == '.'));
        let tok = if is_ident_start(c) {
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if starts_number {
            if c == '-' || c == '+' {
                i += 1;
            }
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            if i < chars.len() && is_ident_char(chars[i]) {
                return Err(Diagnostic::error(DiagnosticKind::Syntax, context, "malformed number").at(pos));
            }
            let lexeme: String = chars[start..i].iter().collect();
            match lexeme.parse::<f64>() {
                Ok(v) => Tok::Number(v),
                Err(_) => {
                    return Err(Diagnostic::error(
                        DiagnosticKind::Syntax,
                        context,
                        format!("malformed number `{lexeme}`"),
                    )
                    .at(pos))
                }
            }
        } else if c == '"' {
            i += 1;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(Diagnostic::error(DiagnosticKind::Syntax, context, "unterminated string").at(pos))
                    }
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') => match chars.get(i + 1) {
                        Some(&e @ ('"' | '\\')) => {
                            s.push(e);
                            i += 2;
                        }
                        _ => {
                            return Err(
                                Diagnostic::error(DiagnosticKind::Syntax, context, "invalid escape in string").at(pos),
                            )
                        }
                    },
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            Tok::Str(s)
        } else if matches!(c, '<' | '>' | '=' | '!') {
            let two = chars.get(i + 1) == Some(&'=');
            i += if two { 2 } else { 1 };
            match (c, two) {
                ('<', true) => Tok::Op(Op::Le),
                ('>', true) => Tok::Op(Op::Ge),
                ('<', false) => Tok::Op(Op::Lt),
                ('>', false) => Tok::Op(Op::Gt),
                _ => Tok::BadOp(chars[start..i].iter().collect()),
            }
        } else {
            i += 1;
            Tok::Bad(c)
        };
        col += i - start;
        tokens.push(Token { tok, pos });
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    next: usize,
    end: Position,
    features: &'a FeatureMap,
    context: String,
    diagnostics: Vec<Diagnostic>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.next)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.next).cloned();
        self.next += 1;
        t
    }

    fn here(&self) -> Position {
        self.peek().map_or(self.end, |t| t.pos)
    }

    fn syntax(&self, pos: Position, message: impl Into<String>) -> Diagnostic {
        Diagnostic::error(DiagnosticKind::Syntax, &self.context, message).at(pos)
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), Diagnostic> {
        match self.peek() {
            Some(t) if keyword(&t.tok) == Some(kw) => {
                self.next += 1;
                Ok(())
            }
            Some(t) => Err(self.syntax(t.pos, format!("expected `{kw}`, found {}", describe(&t.tok)))),
            None => Err(self.syntax(self.end, format!("expected `{kw}`, found end of input"))),
        }
    }

    fn condition(&mut self) -> Result<Option<(Condition, Position)>, Diagnostic> {
        let pos = self.here();
        let lhs = match self.bump() {
            Some(Token {
                tok: Tok::Ident(name), ..
            }) if keyword(&Tok::Ident(name.clone())).is_none() => name,
            Some(t) => return Err(self.syntax(t.pos, format!("expected a feature name, found {}", describe(&t.tok)))),
            None => return Err(self.syntax(self.end, "expected a condition, found end of input")),
        };
        let op = match self.bump() {
            Some(Token { tok: Tok::Op(op), .. }) => op,
            Some(Token {
                tok: Tok::BadOp(s),
                pos,
            }) => return Err(self.syntax(pos, format!("unsupported operator `{s}`; use one of <=, >=, <, >"))),
            Some(t) => {
                return Err(self.syntax(
                    t.pos,
                    format!("expected a comparison operator, found {}", describe(&t.tok)),
                ))
            }
            None => return Err(self.syntax(self.end, "expected a comparison operator")),
        };
        let rhs = self
            .bump()
            .ok_or_else(|| self.syntax(self.end, "expected a threshold, found end of input"))?;
        let feature = self.features.get(&lhs).map(|f| f.index);
        if feature.is_none() {
            self.diagnostics.push(
                Diagnostic::error(
                    DiagnosticKind::UnknownFeature,
                    &self.context,
                    format!("unknown feature `{lhs}`"),
                )
                .at(pos),
            );
        }
        let threshold = match rhs.tok {
            Tok::Number(v) if v.is_finite() => Some(v),
            Tok::Number(_) => {
                self.diagnostics.push(
                    Diagnostic::error(
                        DiagnosticKind::NonNumericThreshold,
                        &self.context,
                        "threshold overflows a 64-bit float",
                    )
                    .at(rhs.pos),
                );
                None
            }
            Tok::Ident(ref name) if keyword(&rhs.tok).is_none() => {
                if self.features.get(name).is_some() {
                    self.diagnostics.push(
                        Diagnostic::error(
                            DiagnosticKind::FeatureComparison,
                            &self.context,
                            format!(
                                "`{lhs} {op} {name}` compares two features; each condition must relate one feature to a number"
                            ),
                        )
                        .at(rhs.pos),
                    );
                } else {
                    self.diagnostics.push(
                        Diagnostic::error(
                            DiagnosticKind::NonNumericThreshold,
                            &self.context,
                            format!("threshold `{name}` is not a number"),
                        )
                        .at(rhs.pos),
                    );
                }
                None
            }
            Tok::Str(ref s) => {
                self.diagnostics.push(
                    Diagnostic::error(
                        DiagnosticKind::NonNumericThreshold,
                        &self.context,
                        format!("threshold \"{s}\" is not a number"),
                    )
                    .at(rhs.pos),
                );
                None
            }
            ref other => {
                return Err(self.syntax(
                    rhs.pos,
                    format!("expected a numeric threshold, found {}", describe(other)),
                ))
            }
        };
        Ok(feature
            .zip(threshold)
            .map(|(feature, threshold)| (Condition::new(feature, op, threshold), pos)))
    }

    fn outcome(&mut self) -> Result<Outcome, Diagnostic> {
        match self.bump() {
            Some(Token {
                tok: Tok::Number(v),
                pos,
            }) => {
                if v.is_finite() {
                    Ok(Outcome::Number(v))
                } else {
                    Err(self.syntax(pos, "outcome overflows a 64-bit float"))
                }
            }
            Some(Token { tok: Tok::Str(s), .. }) => Ok(Outcome::Label(s)),
            Some(Token {
                tok: Tok::Ident(s),
                pos,
            }) => {
                if keyword(&Tok::Ident(s.clone())).is_some() {
                    Err(self.syntax(pos, format!("expected an outcome, found keyword `{s}`")))
                } else {
                    Ok(Outcome::Label(s))
                }
            }
            Some(t) => Err(self.syntax(t.pos, format!("expected an outcome, found {}", describe(&t.tok)))),
            None => Err(self.syntax(self.end, "expected an outcome, found end of input")),
        }
    }

    fn rule(&mut self, name: &str) -> Result<Option<ParsedRule>, Diagnostic> {
        self.expect_keyword("if")?;
        let mut conditions: Vec<Condition> = Vec::new();
        loop {
            if let Some((c, pos)) = self.condition()? {
                if conditions.contains(&c) {
                    self.diagnostics.push(
                        Diagnostic::error(
                            DiagnosticKind::Structure,
                            &self.context,
                            "condition repeats an earlier condition",
                        )
                        .at(pos),
                    );
                } else {
                    conditions.push(c);
                }
            }
            match self.peek().map(|t| (keyword(&t.tok), t.pos)) {
                Some((Some("and"), _)) => self.next += 1,
                Some((Some("or"), pos)) => {
                    self.diagnostics.push(
                        Diagnostic::error(
                            DiagnosticKind::Disjunction,
                            &self.context,
                            "`or` is not supported; split the premise into separate rules",
                        )
                        .at(pos),
                    );
                    self.next += 1;
                }
                _ => break,
            }
        }
        self.expect_keyword("then")?;
        let consequence = self.outcome()?;
        let default = match self.peek() {
            Some(t) if keyword(&t.tok) == Some("else") => {
                self.next += 1;
                Some(self.outcome()?)
            }
            _ => None,
        };
        if let Some(t) = self.peek() {
            return Err(self.syntax(t.pos, format!("unexpected {} after rule", describe(&t.tok))));
        }
        if !self.diagnostics.is_empty() {
            return Ok(None);
        }
        Ok(Some(ParsedRule {
            rule: Rule {
                name: name.to_owned(),
                conditions,
                consequence,
            },
            default,
        }))
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) if keyword(tok).is_some() => format!("keyword `{s}`"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Number(v) => format!("number `{v}`"),
        Tok::Str(s) => format!("string \"{s}\""),
        Tok::Op(op) => format!("operator `{op}`"),
        Tok::BadOp(s) => format!("operator `{s}`"),
        Tok::Bad(c) => format!("character `{c}`"),
    }
}

fn end_position(text: &str) -> Position {
    let mut p = Position { line: 1, column: 1 };
    for c in text.chars() {
        if c == '\n' {
            p.line += 1;
            p.column = 1;
        } else {
            p.column += 1;
        }
    }
    p
}

/// Parses one rule. On failure returns every error found; a syntax error
/// stops parsing, semantic errors are collected across all conditions.
pub fn parse_rule(name: &str, text: &str, features: &FeatureMap) -> Result<ParsedRule, Vec<Diagnostic>> {
    let context = format!("rule {name}");
    if text.trim().is_empty() {
        return Err(vec![Diagnostic::error(
            DiagnosticKind::Syntax,
            context,
            "rule text is empty",
        )
        .at(Position { line: 1, column: 1 })]);
    }
    let tokens = tokenize(text, &context).map_err(|d| vec![d])?;
    let mut parser = Parser {
        tokens,
        next: 0,
        end: end_position(text),
        features,
        context,
        diagnostics: Vec::new(),
    };
    match parser.rule(name) {
        Ok(Some(parsed)) => Ok(parsed),
        Ok(None) => Err(parser.diagnostics),
        Err(d) => {
            parser.diagnostics.push(d);
            Err(parser.diagnostics)
        }
    }
}

fn render_outcome(outcome: &Outcome) -> String {
    match outcome {
        Outcome::Number(v) => format!("{v}"),
        Outcome::Label(s) => {
            let bare = s.chars().next().is_some_and(is_ident_start)
                && s.chars().all(is_ident_char)
                && keyword(&Tok::Ident(s.clone())).is_none();
            if bare {
                s.clone()
            } else {
                format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
            }
        }
    }
}

/// Renders a rule back to text that [`parse_rule`] accepts.
pub fn render_rule(rule: &Rule, default: Option<&Outcome>, features: &FeatureMap) -> String {
    let premise = rule
        .conditions
        .iter()
        .map(|c| {
            let name = features
                .name_of(c.feature)
                .map_or_else(|| format!("f{}", c.feature), str::to_owned);
            format!("{name} {} {}", c.op, c.threshold)
        })
        .collect::<Vec<_>>()
        .join(" and ");
    let mut text = format!("if {premise} then {}", render_outcome(&rule.consequence));
    if let Some(d) = default {
        text.push_str(" else ");
        text.push_str(&render_outcome(d));
    }
    text
}

/// Every error and warning for a system description; empty iff the system
/// is well formed.
pub fn validate_system(config: &SystemConfig) -> Vec<Diagnostic> {
    config.resolve().0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn features() -> FeatureMap {
        FeatureMap::from_names(&["x1", "x2", "x3", "age"], &["m1", "m2", "churn_risk"])
    }

    fn kinds(r: Result<ParsedRule, Vec<Diagnostic>>) -> Vec<DiagnosticKind> {
        r.expect_err("expected diagnostics").iter().map(|d| d.kind).collect()
    }

    #[test]
    fn parses_generic_rule_with_else() {
        let p = parse_rule(
            "R1",
            "if x1 <= 0.5 and x2 >= 0.6 and x3 >= 0.2 then 1 else 0",
            &features(),
        )
        .unwrap();
        assert_eq!(
            p.rule.conditions,
            vec![
                Condition::new(0, Op::Le, 0.5),
                Condition::new(1, Op::Ge, 0.6),
                Condition::new(2, Op::Ge, 0.2),
            ]
        );
        assert_eq!(p.rule.consequence, Outcome::Number(1.0));
        assert_eq!(p.default, Some(Outcome::Number(0.0)));
    }

    #[test]
    fn parses_label_outcome_and_internal_feature() {
        let p = parse_rule(
            "offer",
            "if age <= 45 and churn_risk >= 0.5 then discount10",
            &features(),
        )
        .unwrap();
        assert_eq!(p.rule.conditions.len(), 2);
        assert_eq!(p.rule.conditions[1].feature, 6);
        assert_eq!(p.rule.consequence, Outcome::Label("discount10".into()));
        assert_eq!(p.default, None);
    }

    #[test]
    fn numbers_accept_scientific_notation_and_sign() {
        let p = parse_rule("r", "IF m2 <= 6e2 AND m1 > -1.5E-1 THEN \"yes\"", &features()).unwrap();
        assert_eq!(p.rule.conditions[0].threshold, 600.0);
        assert_eq!(p.rule.conditions[1].threshold, -0.15);
        assert_eq!(p.rule.conditions[1].op, Op::Gt);
    }

    #[test]
    fn feature_on_right_hand_side_is_rejected() {
        assert_eq!(
            kinds(parse_rule("r", "if x1 >= x2 then 1", &features())),
            vec![DiagnosticKind::FeatureComparison]
        );
    }

    #[test]
    fn non_numeric_threshold_is_rejected() {
        let err = parse_rule("r", "if x1 >= high then 1", &features()).unwrap_err();
        assert_eq!(err.len(), 1);
        assert_eq!(err[0].kind, DiagnosticKind::NonNumericThreshold);
        assert_eq!(err[0].position, Some(Position { line: 1, column: 10 }));
        assert_eq!(
            kinds(parse_rule("r", "if x1 >= \"0.5\" then 1", &features())),
            vec![DiagnosticKind::NonNumericThreshold]
        );
        assert_eq!(
            kinds(parse_rule("r", "if x1 >= 1e999 then 1", &features())),
            vec![DiagnosticKind::NonNumericThreshold]
        );
    }

    #[test]
    fn disjunction_and_unknown_feature_are_both_reported() {
        let k = kinds(parse_rule("r", "if x1 >= 0.5 or y9 <= 1 then 1", &features()));
        assert_eq!(k, vec![DiagnosticKind::Disjunction, DiagnosticKind::UnknownFeature]);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_rule("r", "if x1 == 0.5 then 1", &features()).unwrap_err();
        assert_eq!(err[0].kind, DiagnosticKind::Syntax);
        assert_eq!(err[0].position, Some(Position { line: 1, column: 7 }));

        let err = parse_rule("r", "if x1 >= 0.5\nthen", &features()).unwrap_err();
        assert_eq!(err[0].position, Some(Position { line: 2, column: 5 }));

        for bad in [
            "",
            "   ",
            "x1 >= 0.5",
            "if then 1",
            "if x1 >= 0.5 then",
            "if x1 >= 0.5 then 1 2",
            "if 0.5 <= x1 then 1",
        ] {
            assert!(parse_rule("r", bad, &features()).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn duplicate_condition_is_rejected() {
        assert_eq!(
            kinds(parse_rule("r", "if x1 >= 0.5 and x1 >= 0.5 then 1", &features())),
            vec![DiagnosticKind::Structure]
        );
        // Same feature, different thresholds is an interval and is fine.
        assert!(parse_rule("r", "if x1 >= 0.2 and x1 <= 0.8 then 1", &features()).is_ok());
    }

    #[test]
    fn render_quotes_labels_that_are_not_identifiers() {
        let fm = features();
        let rule = Rule::new(
            "r",
            vec![Condition::new(0, Op::Lt, 0.25)],
            Outcome::Label("10% off".into()),
        )
        .unwrap();
        let text = render_rule(&rule, Some(&Outcome::Label("and".into())), &fm);
        assert_eq!(text, "if x1 < 0.25 then \"10% off\" else \"and\"");
        let back = parse_rule("r", &text, &fm).unwrap();
        assert_eq!(back.rule, rule);
        assert_eq!(back.default, Some(Outcome::Label("and".into())));
    }

    fn op() -> impl Strategy<Value = Op> {
        prop_oneof![Just(Op::Ge), Just(Op::Le), Just(Op::Gt), Just(Op::Lt)]
    }

    fn outcome() -> impl Strategy<Value = Outcome> {
        prop_oneof![
            any::<f64>()
                .prop_filter("finite", |v| v.is_finite())
                .prop_map(Outcome::Number),
            "[a-zA-Z_][a-zA-Z0-9_]{0,8}".prop_map(Outcome::Label),
            "[ -~]{0,10}".prop_map(Outcome::Label),
        ]
    }

    fn rule() -> impl Strategy<Value = (Rule, Option<Outcome>)> {
        let cond = (0usize..7, op(), any::<f64>().prop_filter("finite", |v| v.is_finite()))
            .prop_map(|(f, op, t)| Condition::new(f, op, t));
        (
            prop::collection::vec(cond, 1..6),
            outcome(),
            prop::option::of(outcome()),
        )
            .prop_map(|(mut conditions, consequence, default)| {
                let mut unique: Vec<Condition> = Vec::new();
                conditions.retain(|c| {
                    let fresh = !unique.contains(c);
                    if fresh {
                        unique.push(c.clone());
                    }
                    fresh
                });
                (
                    Rule {
                        name: "gen".into(),
                        conditions,
                        consequence,
                    },
                    default,
                )
            })
    }

    proptest! {
        #[test]
        fn render_then_parse_round_trips((rule, default) in rule()) {
            let fm = features();
            let text = render_rule(&rule, default.as_ref(), &fm);
            let back = parse_rule("gen", &text, &fm).map_err(|d| TestCaseError::fail(format!("{text}: {d:?}")))?;
            prop_assert_eq!(back.rule, rule);
            prop_assert_eq!(back.default, default);
        }

        #[test]
        fn parsing_is_total(text in "\\PC{0,60}") {
            match parse_rule("any", &text, &features()) {
                Ok(_) => {}
                Err(d) => prop_assert!(d.iter().any(Diagnostic::is_error)),
            }
        }

        #[test]
        fn parsing_is_total_near_grammar(
            words in prop::collection::vec(
                prop_oneof![
                    Just("if"), Just("and"), Just("or"), Just("then"), Just("else"),
                    Just("x1"), Just("m2"), Just("nope"), Just(">="), Just("<"), Just("=="),
                    Just("0.5"), Just("-3e2"), Just("\"lbl\""), Just("1e"), Just(".")
                ],
                0..12,
            )
        ) {
            let text = words.join(" ");
            if let Err(d) = parse_rule("any", &text, &features()) {
                prop_assert!(!d.is_empty());
                prop_assert!(d.iter().any(Diagnostic::is_error));
            }
        }
    }
}
