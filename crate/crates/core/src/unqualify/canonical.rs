//! The canonical, constant-pool-free byte stream hashed for unqualified
//! fingerprints.
//!
//! Layout (all integers little-endian, strings as u32 length + UTF-8):
//! access flags (u16), this name, super name (empty if none), interfaces
//! (u16 count + names), fields and methods (u16 count + records of u16 flags,
//! name, descriptor, attributes), then class attributes. An attribute list is
//! a u16 count followed by records of name, u32 payload length and payload,
//! sorted by name. Only the attributes in [`ALLOWED`] take part.

use crate::classfile::code::{LDC, LDC_W};
use crate::classfile::ClassFile;

use super::node::{AnnotationNode, AttrNode, ClassNode, CodeNode, Constant, ElementNode, InsnNode, MemberNode};
use super::{Unqualifier, UnqualifyError};

pub const ALLOWED: &[&str] = &[
    "Code",
    "ConstantValue",
    "Exceptions",
    "InnerClasses",
    "NestHost",
    "NestMembers",
    "PermittedSubclasses",
    "RuntimeInvisibleAnnotations",
    "RuntimeVisibleAnnotations",
    "Signature",
];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalEncoding {
    pub bytes: Vec<u8>,
}

/// Unqualifies `class` and encodes it canonically.
pub fn canonical_encode(class: &ClassFile) -> Result<CanonicalEncoding, UnqualifyError> {
    let node = ClassNode::lift(class)?;
    canonical_encode_node(&node)
}

pub fn canonical_encode_node(node: &ClassNode) -> Result<CanonicalEncoding, UnqualifyError> {
    let node = prune(node).remap(&Unqualifier)?;
    let mut w = Enc::default();
    w.u16(node.access_flags);
    w.str(&node.name);
    w.str(node.super_name.as_deref().unwrap_or(""));
    w.u16(node.interfaces.len() as u16);
    node.interfaces.iter().for_each(|i| w.str(i));
    for members in [&node.fields, &node.methods] {
        w.u16(members.len() as u16);
        members.iter().for_each(|m| w.member(m));
    }
    w.attributes(&node.attributes);
    Ok(CanonicalEncoding { bytes: w.buf })
}

#[derive(Default)]
struct Enc {
    buf: Vec<u8>,
}

impl Enc {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }

    /// Runs `f` into a scratch encoder and emits its output with a u32 length prefix.
    fn sized(&mut self, f: impl FnOnce(&mut Enc)) {
        let mut inner = Enc::default();
        f(&mut inner);
        self.u32(inner.buf.len() as u32);
        self.buf.extend_from_slice(&inner.buf);
    }

    fn member(&mut self, m: &MemberNode) {
        self.u16(m.access_flags);
        self.str(&m.name);
        self.str(&m.descriptor);
        self.attributes(&m.attributes);
    }

    fn attributes(&mut self, attrs: &[AttrNode]) {
        let mut kept: Vec<&AttrNode> = attrs.iter().filter(|a| ALLOWED.contains(&a.name())).collect();
        kept.sort_by(|a, b| a.name().cmp(b.name()));
        self.u16(kept.len() as u16);
        for a in kept {
            self.str(a.name());
            self.sized(|e| e.attribute(a));
        }
    }

    fn attribute(&mut self, a: &AttrNode) {
        match a {
            AttrNode::Code(c) => {
                self.u16(c.max_stack);
                self.u16(c.max_locals);
                self.sized(|e| c.instructions.iter().for_each(|i| e.instruction(i)));
                self.u16(c.handlers.len() as u16);
                for h in &c.handlers {
                    self.u16(h.start_pc);
                    self.u16(h.end_pc);
                    self.u16(h.handler_pc);
                    self.str(h.catch_type.as_deref().unwrap_or(""));
                }
            }
            AttrNode::ConstantValue(c) => self.constant(c),
            AttrNode::Signature(s) | AttrNode::NestHost(s) => self.str(s),
            AttrNode::Exceptions(v) | AttrNode::NestMembers(v) | AttrNode::PermittedSubclasses(v) => {
                self.u16(v.len() as u16);
                v.iter().for_each(|s| self.str(s));
            }
            AttrNode::InnerClasses(v) => {
                self.u16(v.len() as u16);
                for ic in v {
                    self.str(&ic.inner);
                    self.str(ic.outer.as_deref().unwrap_or(""));
                    self.str(ic.simple_name.as_deref().unwrap_or(""));
                    self.u16(ic.access_flags);
                }
            }
            AttrNode::Annotations { annotations, .. } => {
                self.u16(annotations.len() as u16);
                annotations.iter().for_each(|an| self.annotation(an));
            }
            other => unreachable!("{} is not in the canonical allowlist", other.name()),
        }
    }

    fn annotation(&mut self, a: &AnnotationNode) {
        self.str(&a.type_descriptor);
        self.u16(a.elements.len() as u16);
        for (name, value) in &a.elements {
            self.str(name);
            self.element(value);
        }
    }

    fn element(&mut self, e: &ElementNode) {
        match e {
            ElementNode::Const { tag, value } => {
                self.u8(*tag);
                self.constant(value);
            }
            ElementNode::Enum { type_descriptor, name } => {
                self.u8(b'e');
                self.str(type_descriptor);
                self.str(name);
            }
            ElementNode::Class(d) => {
                self.u8(b'c');
                self.str(d);
            }
            ElementNode::Annotation(a) => {
                self.u8(b'@');
                self.annotation(a);
            }
            ElementNode::Array(v) => {
                self.u8(b'[');
                self.u16(v.len() as u16);
                v.iter().for_each(|e| self.element(e));
            }
        }
    }

    fn instruction(&mut self, i: &InsnNode) {
        match i {
            InsnNode::Plain(bytes) => self.buf.extend_from_slice(bytes),
            InsnNode::Switch { opcode, body, .. } => {
                self.u8(*opcode);
                self.buf.extend_from_slice(body);
            }
            InsnNode::Pool { opcode, constant, trailing } => {
                self.u8(if *opcode == LDC { LDC_W } else { *opcode });
                self.constant(constant);
                self.buf.extend_from_slice(trailing);
            }
        }
    }

    /// Tag byte followed by the resolved contents.
    fn constant(&mut self, c: &Constant) {
        self.u8(c.tag());
        match c {
            Constant::Utf8(t) | Constant::String(t) => self.str(t.as_str()),
            Constant::Integer(v) => self.u32(*v as u32),
            Constant::Float(v) => self.u32(*v),
            Constant::Long(v) => self.u64(*v as u64),
            Constant::Double(v) => self.u64(*v),
            Constant::Class(n) | Constant::MethodType(n) => self.str(n),
            Constant::Fieldref(r) | Constant::Methodref(r) | Constant::InterfaceMethodref(r) => {
                self.str(&r.owner);
                self.str(&r.name);
                self.str(&r.descriptor);
            }
            Constant::MethodHandle { kind, member } => {
                self.u8(*kind);
                self.constant(member);
            }
            Constant::Dynamic(d) | Constant::InvokeDynamic(d) => {
                self.constant(&d.bootstrap.handle);
                self.u16(d.bootstrap.arguments.len() as u16);
                d.bootstrap.arguments.iter().for_each(|a| self.constant(a));
                self.str(&d.name);
                self.str(&d.descriptor);
            }
        }
    }
}

/// Drops attributes outside the allowlist before remapping, so debug tables
/// with unusual contents cannot make a class unencodable.
fn prune(node: &ClassNode) -> ClassNode {
    fn attrs(v: &[AttrNode]) -> Vec<AttrNode> {
        v.iter()
            .filter(|a| ALLOWED.contains(&a.name()))
            .map(|a| match a {
                AttrNode::Code(c) => AttrNode::Code(CodeNode { attributes: Vec::new(), ..c.clone() }),
                other => other.clone(),
            })
            .collect()
    }
    let members = |v: &[MemberNode]| -> Vec<MemberNode> {
        v.iter().map(|m| MemberNode { attributes: attrs(&m.attributes), ..m.clone() }).collect()
    };
    ClassNode {
        fields: members(&node.fields),
        methods: members(&node.methods),
        attributes: attrs(&node.attributes),
        ..node.clone()
    }
}
