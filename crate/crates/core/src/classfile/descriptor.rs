//! Field and method descriptor grammar.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed descriptor {text:?} at byte {position}")]
pub struct MalformedDescriptor {
    pub text: String,
    pub position: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseType {
    Byte,
    Char,
    Double,
    Float,
    Int,
    Long,
    Short,
    Boolean,
}

impl BaseType {
    pub(crate) fn from_char(c: u8) -> Option<Self> {
        use BaseType::*;
        Some(match c {
            b'B' => Byte,
            b'C' => Char,
            b'D' => Double,
            b'F' => Float,
            b'I' => Int,
            b'J' => Long,
            b'S' => Short,
            b'Z' => Boolean,
            _ => return None,
        })
    }

    pub fn as_char(self) -> char {
        use BaseType::*;
        match self {
            Byte => 'B',
            Char => 'C',
            Double => 'D',
            Float => 'F',
            Int => 'I',
            Long => 'J',
            Short => 'S',
            Boolean => 'Z',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FieldType {
    Base(BaseType),
    /// Internal name, `/`-separated.
    Object(String),
    Array { dimensions: u8, element: Box<FieldType> },
}

impl FieldType {
    /// Applies `f` to every class name in the type.
    pub fn map_names(&self, f: &mut impl FnMut(&str) -> String) -> FieldType {
        match self {
            FieldType::Base(b) => FieldType::Base(*b),
            FieldType::Object(n) => FieldType::Object(f(n)),
            FieldType::Array { dimensions, element } => {
                FieldType::Array { dimensions: *dimensions, element: Box::new(element.map_names(f)) }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MethodDescriptor {
    pub parameters: Vec<FieldType>,
    /// `None` for `V`.
    pub return_type: Option<FieldType>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Descriptor {
    Field(FieldType),
    Method(MethodDescriptor),
}

impl Descriptor {
    pub fn map_names(&self, mut f: impl FnMut(&str) -> String) -> Descriptor {
        match self {
            Descriptor::Field(t) => Descriptor::Field(t.map_names(&mut f)),
            Descriptor::Method(m) => Descriptor::Method(MethodDescriptor {
                parameters: m.parameters.iter().map(|p| p.map_names(&mut f)).collect(),
                return_type: m.return_type.as_ref().map(|r| r.map_names(&mut f)),
            }),
        }
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self) -> MalformedDescriptor {
        MalformedDescriptor { text: self.text.to_string(), position: self.pos }
    }

    fn peek(&self) -> Option<u8> {
        self.text.as_bytes().get(self.pos).copied()
    }

    fn field_type(&mut self) -> Result<FieldType, MalformedDescriptor> {
        let mut dims = 0usize;
        while self.peek() == Some(b'[') {
            dims += 1;
            self.pos += 1;
        }
        if dims > 255 {
            return Err(self.err());
        }
        let c = self.peek().ok_or_else(|| self.err())?;
        let element = if let Some(b) = BaseType::from_char(c) {
            self.pos += 1;
            FieldType::Base(b)
        } else if c == b'L' {
            let start = self.pos + 1;
            let end = self.text[start..].find(';').map(|i| start + i).ok_or_else(|| self.err())?;
            let name = &self.text[start..end];
            if !valid_internal_name(name) {
                self.pos = start;
                return Err(self.err());
            }
            self.pos = end + 1;
            FieldType::Object(name.to_string())
        } else {
            return Err(self.err());
        };
        Ok(if dims == 0 {
            element
        } else {
            FieldType::Array { dimensions: dims as u8, element: Box::new(element) }
        })
    }
}

/// Internal class name: non-empty `/`-separated segments free of `. ; [ <  >`.
pub(crate) fn valid_internal_name(name: &str) -> bool {
    !name.is_empty() && name.split('/').all(|seg| !seg.is_empty() && !seg.contains(['.', ';', '[', '<', '>', '/']))
}

pub fn parse_field_descriptor(text: &str) -> Result<FieldType, MalformedDescriptor> {
    let mut p = Parser { text, pos: 0 };
    let t = p.field_type()?;
    if p.pos != text.len() {
        return Err(p.err());
    }
    Ok(t)
}

pub fn parse_method_descriptor(text: &str) -> Result<MethodDescriptor, MalformedDescriptor> {
    let mut p = Parser { text, pos: 0 };
    if p.peek() != Some(b'(') {
        return Err(p.err());
    }
    p.pos += 1;
    let mut parameters = Vec::new();
    while p.peek() != Some(b')') {
        if p.peek().is_none() {
            return Err(p.err());
        }
        parameters.push(p.field_type()?);
    }
    p.pos += 1;
    let return_type = if p.peek() == Some(b'V') {
        p.pos += 1;
        None
    } else {
        Some(p.field_type()?)
    };
    if p.pos != text.len() {
        return Err(p.err());
    }
    Ok(MethodDescriptor { parameters, return_type })
}

/// Parses either descriptor kind, chosen by a leading `(`.
pub fn parse_descriptor(text: &str) -> Result<Descriptor, MalformedDescriptor> {
    if text.starts_with('(') {
        parse_method_descriptor(text).map(Descriptor::Method)
    } else {
        parse_field_descriptor(text).map(Descriptor::Field)
    }
}

impl fmt::Display for FieldType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldType::Base(b) => write!(f, "{}", b.as_char()),
            FieldType::Object(n) => write!(f, "L{n};"),
            FieldType::Array { dimensions, element } => {
                for _ in 0..*dimensions {
                    f.write_str("[")?;
                }
                write!(f, "{element}")
            }
        }
    }
}

impl fmt::Display for MethodDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for p in &self.parameters {
            write!(f, "{p}")?;
        }
        f.write_str(")")?;
        match &self.return_type {
            Some(r) => write!(f, "{r}"),
            None => f.write_str("V"),
        }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Descriptor::Field(t) => t.fmt(f),
            Descriptor::Method(m) => m.fmt(f),
        }
    }
}
