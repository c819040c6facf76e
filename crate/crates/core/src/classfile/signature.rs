//! Generic `Signature` attribute grammar.
//!
//! Class type signatures keep their package prefix as a separate node so
//! it can be stripped or rewritten without touching the rest of the tree.

use std::fmt;

use thiserror::Error;

use super::descriptor::BaseType;

const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed signature {text:?} at byte {position}")]
pub struct MalformedSignature {
    pub text: String,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SignatureTree {
    Class(ClassSignature),
    Method(MethodSignature),
    Field(ReferenceType),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassSignature {
    pub type_parameters: Vec<TypeParameter>,
    pub superclass: ClassTypeSignature,
    pub interfaces: Vec<ClassTypeSignature>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MethodSignature {
    pub type_parameters: Vec<TypeParameter>,
    pub parameters: Vec<JavaType>,
    /// `None` for `V`.
    pub result: Option<JavaType>,
    pub throws: Vec<ReferenceType>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeParameter {
    pub name: String,
    /// The class bound may be empty (`T::Ljava/lang/Comparable;`).
    pub class_bound: Option<ReferenceType>,
    pub interface_bounds: Vec<ReferenceType>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ReferenceType {
    Class(ClassTypeSignature),
    TypeVariable(String),
    Array(Box<JavaType>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum JavaType {
    Base(BaseType),
    Reference(ReferenceType),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassTypeSignature {
    /// Package segments, e.g. `["java", "util"]`.
    pub package: Vec<String>,
    /// Outer class first, then each `.Inner` suffix.
    pub segments: Vec<SimpleClassType>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SimpleClassType {
    pub name: String,
    pub type_arguments: Vec<TypeArgument>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WildcardIndicator {
    Extends,
    Super,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeArgument {
    /// `*`
    Wildcard,
    Bounded { indicator: Option<WildcardIndicator>, ty: ReferenceType },
}

impl ClassTypeSignature {
    /// Internal name of the outermost class: package plus first segment.
    pub fn outer_internal_name(&self) -> String {
        let mut s = String::new();
        for p in &self.package {
            s.push_str(p);
            s.push('/');
        }
        s.push_str(&self.segments[0].name);
        s
    }
}

impl SignatureTree {
    /// Calls `f` on every class type signature, including those nested in
    /// type arguments, bounds and throws clauses.
    pub fn visit_classes_mut(&mut self, f: &mut impl FnMut(&mut ClassTypeSignature)) {
        match self {
            SignatureTree::Class(c) => {
                c.type_parameters.iter_mut().for_each(|p| p.visit(f));
                c.superclass.visit(f);
                c.interfaces.iter_mut().for_each(|i| i.visit(f));
            }
            SignatureTree::Method(m) => {
                m.type_parameters.iter_mut().for_each(|p| p.visit(f));
                m.parameters.iter_mut().for_each(|p| p.visit(f));
                if let Some(r) = &mut m.result {
                    r.visit(f);
                }
                m.throws.iter_mut().for_each(|t| t.visit(f));
            }
            SignatureTree::Field(r) => r.visit(f),
        }
    }
}

impl TypeParameter {
    fn visit(&mut self, f: &mut impl FnMut(&mut ClassTypeSignature)) {
        if let Some(b) = &mut self.class_bound {
            b.visit(f);
        }
        self.interface_bounds.iter_mut().for_each(|b| b.visit(f));
    }
}

impl ReferenceType {
    fn visit(&mut self, f: &mut impl FnMut(&mut ClassTypeSignature)) {
        match self {
            ReferenceType::Class(c) => c.visit(f),
            ReferenceType::TypeVariable(_) => {}
            ReferenceType::Array(t) => t.visit(f),
        }
    }
}

impl JavaType {
    fn visit(&mut self, f: &mut impl FnMut(&mut ClassTypeSignature)) {
        if let JavaType::Reference(r) = self {
            r.visit(f);
        }
    }
}

impl ClassTypeSignature {
    fn visit(&mut self, f: &mut impl FnMut(&mut ClassTypeSignature)) {
        for seg in &mut self.segments {
            for arg in &mut seg.type_arguments {
                if let TypeArgument::Bounded { ty, .. } = arg {
                    ty.visit(f);
                }
            }
        }
        f(self);
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    depth: usize,
}

type PResult<T> = Result<T, MalformedSignature>;

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { text, pos: 0, depth: 0 }
    }

    fn err<T>(&self) -> PResult<T> {
        Err(MalformedSignature { text: self.text.to_string(), position: self.pos })
    }

    fn peek(&self) -> Option<u8> {
        self.text.as_bytes().get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> PResult<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err()
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.err();
        }
        Ok(())
    }

    fn identifier(&mut self) -> PResult<String> {
        let rest = &self.text[self.pos..];
        let len = rest.find(['.', ';', '[', '/', '<', '>', ':']).unwrap_or(rest.len());
        if len == 0 {
            return self.err();
        }
        self.pos += len;
        Ok(rest[..len].to_string())
    }

    fn type_parameters(&mut self) -> PResult<Vec<TypeParameter>> {
        if self.peek() != Some(b'<') {
            return Ok(Vec::new());
        }
        self.pos += 1;
        let mut params = Vec::new();
        loop {
            let name = self.identifier()?;
            self.expect(b':')?;
            let class_bound = match self.peek() {
                Some(b'L' | b'T' | b'[') => Some(self.reference_type()?),
                _ => None,
            };
            let mut interface_bounds = Vec::new();
            while self.peek() == Some(b':') {
                self.pos += 1;
                interface_bounds.push(self.reference_type()?);
            }
            params.push(TypeParameter { name, class_bound, interface_bounds });
            if self.peek() == Some(b'>') {
                self.pos += 1;
                return Ok(params);
            }
        }
    }

    fn reference_type(&mut self) -> PResult<ReferenceType> {
        self.enter()?;
        let r = match self.peek() {
            Some(b'L') => ReferenceType::Class(self.class_type()?),
            Some(b'T') => {
                self.pos += 1;
                let name = self.identifier()?;
                self.expect(b';')?;
                ReferenceType::TypeVariable(name)
            }
            Some(b'[') => {
                self.pos += 1;
                ReferenceType::Array(Box::new(self.java_type()?))
            }
            _ => return self.err(),
        };
        self.depth -= 1;
        Ok(r)
    }

    fn java_type(&mut self) -> PResult<JavaType> {
        match self.peek().and_then(base_type) {
            Some(b) => {
                self.pos += 1;
                Ok(JavaType::Base(b))
            }
            None => Ok(JavaType::Reference(self.reference_type()?)),
        }
    }

    fn class_type(&mut self) -> PResult<ClassTypeSignature> {
        self.expect(b'L')?;
        let mut package = Vec::new();
        let mut name = self.identifier()?;
        while self.peek() == Some(b'/') {
            self.pos += 1;
            package.push(std::mem::replace(&mut name, self.identifier()?));
        }
        let mut segments = vec![SimpleClassType { name, type_arguments: self.type_arguments()? }];
        while self.peek() == Some(b'.') {
            self.pos += 1;
            let name = self.identifier()?;
            segments.push(SimpleClassType { name, type_arguments: self.type_arguments()? });
        }
        self.expect(b';')?;
        Ok(ClassTypeSignature { package, segments })
    }

    fn type_arguments(&mut self) -> PResult<Vec<TypeArgument>> {
        if self.peek() != Some(b'<') {
            return Ok(Vec::new());
        }
        self.pos += 1;
        let mut args = Vec::new();
        loop {
            let arg = match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    TypeArgument::Wildcard
                }
                Some(b'+') => {
                    self.pos += 1;
                    TypeArgument::Bounded { indicator: Some(WildcardIndicator::Extends), ty: self.reference_type()? }
                }
                Some(b'-') => {
                    self.pos += 1;
                    TypeArgument::Bounded { indicator: Some(WildcardIndicator::Super), ty: self.reference_type()? }
                }
                _ => TypeArgument::Bounded { indicator: None, ty: self.reference_type()? },
            };
            args.push(arg);
            if self.peek() == Some(b'>') {
                self.pos += 1;
                return Ok(args);
            }
        }
    }

    fn finish<T>(&self, value: T) -> PResult<T> {
        if self.pos == self.text.len() {
            Ok(value)
        } else {
            self.err()
        }
    }
}

fn base_type(c: u8) -> Option<BaseType> {
    BaseType::from_char(c)
}

pub fn parse_class_signature(text: &str) -> Result<ClassSignature, MalformedSignature> {
    let mut p = Parser::new(text);
    let type_parameters = p.type_parameters()?;
    let superclass = p.class_type()?;
    let mut interfaces = Vec::new();
    while p.peek().is_some() {
        interfaces.push(p.class_type()?);
    }
    p.finish(ClassSignature { type_parameters, superclass, interfaces })
}

pub fn parse_method_signature(text: &str) -> Result<MethodSignature, MalformedSignature> {
    let mut p = Parser::new(text);
    let type_parameters = p.type_parameters()?;
    p.expect(b'(')?;
    let mut parameters = Vec::new();
    while p.peek() != Some(b')') {
        if p.peek().is_none() {
            return p.err();
        }
        parameters.push(p.java_type()?);
    }
    p.pos += 1;
    let result = if p.peek() == Some(b'V') {
        p.pos += 1;
        None
    } else {
        Some(p.java_type()?)
    };
    let mut throws = Vec::new();
    while p.peek() == Some(b'^') {
        p.pos += 1;
        match p.peek() {
            Some(b'L' | b'T') => throws.push(p.reference_type()?),
            _ => return p.err(),
        }
    }
    p.finish(MethodSignature { type_parameters, parameters, result, throws })
}

pub fn parse_field_signature(text: &str) -> Result<ReferenceType, MalformedSignature> {
    let mut p = Parser::new(text);
    let r = p.reference_type()?;
    p.finish(r)
}

/// Parses a signature of unknown kind.
///
/// A lone class type such as `Ljava/lang/Object;` is valid both as a field
/// signature and as a class signature; it is reported as a field signature.
/// Both print identically.
pub fn parse_signature(text: &str) -> Result<SignatureTree, MalformedSignature> {
    if text.starts_with('(') || (text.starts_with('<') && parse_method_signature(text).is_ok()) {
        return parse_method_signature(text).map(SignatureTree::Method);
    }
    if !text.starts_with('<') {
        if let Ok(f) = parse_field_signature(text) {
            return Ok(SignatureTree::Field(f));
        }
    }
    parse_class_signature(text).map(SignatureTree::Class)
}

impl fmt::Display for SignatureTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignatureTree::Class(c) => c.fmt(f),
            SignatureTree::Method(m) => m.fmt(f),
            SignatureTree::Field(r) => r.fmt(f),
        }
    }
}

fn write_type_parameters(f: &mut fmt::Formatter<'_>, params: &[TypeParameter]) -> fmt::Result {
    if params.is_empty() {
        return Ok(());
    }
    f.write_str("<")?;
    for p in params {
        write!(f, "{}:", p.name)?;
        if let Some(b) = &p.class_bound {
            write!(f, "{b}")?;
        }
        for b in &p.interface_bounds {
            write!(f, ":{b}")?;
        }
    }
    f.write_str(">")
}

impl fmt::Display for ClassSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_type_parameters(f, &self.type_parameters)?;
        write!(f, "{}", self.superclass)?;
        self.interfaces.iter().try_for_each(|i| write!(f, "{i}"))
    }
}

impl fmt::Display for MethodSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_type_parameters(f, &self.type_parameters)?;
        f.write_str("(")?;
        self.parameters.iter().try_for_each(|p| write!(f, "{p}"))?;
        f.write_str(")")?;
        match &self.result {
            Some(r) => write!(f, "{r}")?,
            None => f.write_str("V")?,
        }
        self.throws.iter().try_for_each(|t| write!(f, "^{t}"))
    }
}

impl fmt::Display for ReferenceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReferenceType::Class(c) => c.fmt(f),
            ReferenceType::TypeVariable(n) => write!(f, "T{n};"),
            ReferenceType::Array(t) => write!(f, "[{t}"),
        }
    }
}

impl fmt::Display for JavaType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JavaType::Base(b) => write!(f, "{}", b.as_char()),
            JavaType::Reference(r) => r.fmt(f),
        }
    }
}

impl fmt::Display for ClassTypeSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("L")?;
        for p in &self.package {
            write!(f, "{p}/")?;
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            f.write_str(&seg.name)?;
            if !seg.type_arguments.is_empty() {
                f.write_str("<")?;
                for a in &seg.type_arguments {
                    match a {
                        TypeArgument::Wildcard => f.write_str("*")?,
                        TypeArgument::Bounded { indicator, ty } => {
                            match indicator {
                                Some(WildcardIndicator::Extends) => f.write_str("+")?,
                                Some(WildcardIndicator::Super) => f.write_str("-")?,
                                None => {}
                            }
                            write!(f, "{ty}")?;
                        }
                    }
                }
                f.write_str(">")?;
            }
        }
        f.write_str(";")
    }
}
