//! A minimal class-file assembler.
//!
//! Classes are described symbolically (names, descriptors, constants) and the
//! constant pool is laid out only when [`ClassBuilder::build_with`] runs, so the
//! same class can be emitted with different pool layouts.

use std::cell::Cell;
use std::collections::HashMap;

pub const ACC_PUBLIC: u16 = 0x0001;
pub const ACC_PRIVATE: u16 = 0x0002;
pub const ACC_PROTECTED: u16 = 0x0004;
pub const ACC_STATIC: u16 = 0x0008;
pub const ACC_FINAL: u16 = 0x0010;
pub const ACC_SUPER: u16 = 0x0020;
pub const ACC_SYNCHRONIZED: u16 = 0x0020;
pub const ACC_VOLATILE: u16 = 0x0040;
pub const ACC_BRIDGE: u16 = 0x0040;
pub const ACC_TRANSIENT: u16 = 0x0080;
pub const ACC_VARARGS: u16 = 0x0080;
pub const ACC_INTERFACE: u16 = 0x0200;
pub const ACC_ABSTRACT: u16 = 0x0400;
pub const ACC_SYNTHETIC: u16 = 0x1000;
pub const ACC_ANNOTATION: u16 = 0x2000;
pub const ACC_ENUM: u16 = 0x4000;

pub const REF_GET_FIELD: u8 = 1;
pub const REF_GET_STATIC: u8 = 2;
pub const REF_INVOKE_VIRTUAL: u8 = 5;
pub const REF_INVOKE_STATIC: u8 = 6;
pub const REF_INVOKE_SPECIAL: u8 = 7;
pub const REF_NEW_INVOKE_SPECIAL: u8 = 8;
pub const REF_INVOKE_INTERFACE: u8 = 9;

/// A symbolic constant-pool entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Const {
    Utf8(String),
    Int(i32),
    Float(u32),
    Long(i64),
    Double(u64),
    Class(String),
    Str(String),
    Field(String, String, String),
    Method(String, String, String),
    IMethod(String, String, String),
    NameAndType(String, String),
    MethodHandle(u8, Box<Const>),
    MethodType(String),
    Dynamic(u16, String, String),
    InvokeDynamic(u16, String, String),
}

impl Const {
    fn slots(&self) -> u16 {
        match self {
            Const::Long(_) | Const::Double(_) => 2,
            _ => 1,
        }
    }

    fn children(&self) -> Vec<Const> {
        use Const::*;
        match self {
            Class(n) | Str(n) | MethodType(n) => vec![Utf8(n.clone())],
            Field(o, n, d) | Method(o, n, d) | IMethod(o, n, d) => {
                vec![Class(o.clone()), NameAndType(n.clone(), d.clone())]
            }
            NameAndType(n, d) => vec![Utf8(n.clone()), Utf8(d.clone())],
            MethodHandle(_, r) => vec![(**r).clone()],
            Dynamic(_, n, d) | InvokeDynamic(_, n, d) => vec![NameAndType(n.clone(), d.clone())],
            Utf8(_) | Int(_) | Float(_) | Long(_) | Double(_) => vec![],
        }
    }
}

/// Opaque jump target inside a [`Code`] body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Label(usize);

#[derive(Debug, Clone)]
enum Op {
    Raw(Vec<u8>),
    Ldc(Const),
    LdcW(Const),
    Cp(u8, Const, Vec<u8>),
    Branch(u8, Label),
    TableSwitch { default: Label, low: i32, targets: Vec<Label> },
    LookupSwitch { default: Label, pairs: Vec<(i32, Label)> },
    Mark(Label),
}

#[derive(Debug, Clone)]
enum Frame {
    Same(Label),
    SameLocals1Stack(Label, String),
}

/// A method body.
#[derive(Debug, Clone)]
pub struct Code {
    max_stack: u16,
    max_locals: u16,
    ops: Vec<Op>,
    handlers: Vec<(Label, Label, Label, Option<String>)>,
    frames: Vec<Frame>,
    next_label: usize,
    line_numbers: Vec<(Label, u16)>,
    local_vars: Vec<(Label, Label, String, String, u16)>,
}

impl Code {
    pub fn new(max_stack: u16, max_locals: u16) -> Self {
        Code {
            max_stack,
            max_locals,
            ops: Vec::new(),
            handlers: Vec::new(),
            frames: Vec::new(),
            next_label: 0,
            line_numbers: Vec::new(),
            local_vars: Vec::new(),
        }
    }

    pub fn label(&mut self) -> Label {
        self.next_label += 1;
        Label(self.next_label - 1)
    }

    pub fn mark(&mut self, l: Label) -> &mut Self {
        self.ops.push(Op::Mark(l));
        self
    }

    pub fn raw(&mut self, bytes: &[u8]) -> &mut Self {
        self.ops.push(Op::Raw(bytes.to_vec()));
        self
    }

    pub fn op(&mut self, opcode: u8) -> &mut Self {
        self.raw(&[opcode])
    }

    pub fn aload(&mut self, slot: u8) -> &mut Self {
        match slot {
            0..=3 => self.op(0x2a + slot),
            _ => self.raw(&[0x19, slot]),
        }
    }

    pub fn astore(&mut self, slot: u8) -> &mut Self {
        match slot {
            0..=3 => self.op(0x4b + slot),
            _ => self.raw(&[0x3a, slot]),
        }
    }

    pub fn iload(&mut self, slot: u8) -> &mut Self {
        match slot {
            0..=3 => self.op(0x1a + slot),
            _ => self.raw(&[0x15, slot]),
        }
    }

    pub fn istore(&mut self, slot: u8) -> &mut Self {
        match slot {
            0..=3 => self.op(0x3b + slot),
            _ => self.raw(&[0x36, slot]),
        }
    }

    pub fn iconst(&mut self, v: i32) -> &mut Self {
        match v {
            -1..=5 => self.op((0x03 + v) as u8),
            -128..=127 => self.raw(&[0x10, v as i8 as u8]),
            -32768..=32767 => {
                let b = (v as i16).to_be_bytes();
                self.raw(&[0x11, b[0], b[1]])
            }
            _ => self.ldc(Const::Int(v)),
        }
    }

    pub fn ldc(&mut self, c: Const) -> &mut Self {
        self.ops.push(Op::Ldc(c));
        self
    }

    pub fn ldc_w(&mut self, c: Const) -> &mut Self {
        self.ops.push(Op::LdcW(c));
        self
    }

    pub fn ldc2_w(&mut self, c: Const) -> &mut Self {
        self.ops.push(Op::Cp(0x14, c, vec![]));
        self
    }

    pub fn ldc_str(&mut self, s: &str) -> &mut Self {
        self.ldc(Const::Str(s.to_string()))
    }

    fn member(&mut self, opcode: u8, c: Const, trailing: Vec<u8>) -> &mut Self {
        self.ops.push(Op::Cp(opcode, c, trailing));
        self
    }

    pub fn getstatic(&mut self, owner: &str, name: &str, desc: &str) -> &mut Self {
        self.member(0xb2, Const::Field(owner.into(), name.into(), desc.into()), vec![])
    }

    pub fn putstatic(&mut self, owner: &str, name: &str, desc: &str) -> &mut Self {
        self.member(0xb3, Const::Field(owner.into(), name.into(), desc.into()), vec![])
    }

    pub fn getfield(&mut self, owner: &str, name: &str, desc: &str) -> &mut Self {
        self.member(0xb4, Const::Field(owner.into(), name.into(), desc.into()), vec![])
    }

    pub fn putfield(&mut self, owner: &str, name: &str, desc: &str) -> &mut Self {
        self.member(0xb5, Const::Field(owner.into(), name.into(), desc.into()), vec![])
    }

    pub fn invokevirtual(&mut self, owner: &str, name: &str, desc: &str) -> &mut Self {
        self.member(0xb6, Const::Method(owner.into(), name.into(), desc.into()), vec![])
    }

    pub fn invokespecial(&mut self, owner: &str, name: &str, desc: &str) -> &mut Self {
        self.member(0xb7, Const::Method(owner.into(), name.into(), desc.into()), vec![])
    }

    pub fn invokestatic(&mut self, owner: &str, name: &str, desc: &str) -> &mut Self {
        self.member(0xb8, Const::Method(owner.into(), name.into(), desc.into()), vec![])
    }

    pub fn invokeinterface(&mut self, owner: &str, name: &str, desc: &str, count: u8) -> &mut Self {
        self.member(0xb9, Const::IMethod(owner.into(), name.into(), desc.into()), vec![count, 0])
    }

    pub fn invokedynamic(&mut self, bootstrap: u16, name: &str, desc: &str) -> &mut Self {
        self.member(0xba, Const::InvokeDynamic(bootstrap, name.into(), desc.into()), vec![0, 0])
    }

    pub fn new_(&mut self, class: &str) -> &mut Self {
        self.member(0xbb, Const::Class(class.into()), vec![])
    }

    pub fn anewarray(&mut self, class: &str) -> &mut Self {
        self.member(0xbd, Const::Class(class.into()), vec![])
    }

    pub fn checkcast(&mut self, class: &str) -> &mut Self {
        self.member(0xc0, Const::Class(class.into()), vec![])
    }

    pub fn instanceof(&mut self, class: &str) -> &mut Self {
        self.member(0xc1, Const::Class(class.into()), vec![])
    }

    pub fn multianewarray(&mut self, class: &str, dims: u8) -> &mut Self {
        self.member(0xc5, Const::Class(class.into()), vec![dims])
    }

    pub fn branch(&mut self, opcode: u8, target: Label) -> &mut Self {
        self.ops.push(Op::Branch(opcode, target));
        self
    }

    pub fn goto(&mut self, target: Label) -> &mut Self {
        self.branch(0xa7, target)
    }

    pub fn tableswitch(&mut self, default: Label, low: i32, targets: Vec<Label>) -> &mut Self {
        self.ops.push(Op::TableSwitch { default, low, targets });
        self
    }

    pub fn lookupswitch(&mut self, default: Label, pairs: Vec<(i32, Label)>) -> &mut Self {
        self.ops.push(Op::LookupSwitch { default, pairs });
        self
    }

    /// `wide iinc slot, delta`
    pub fn wide_iinc(&mut self, slot: u16, delta: i16) -> &mut Self {
        let s = slot.to_be_bytes();
        let d = delta.to_be_bytes();
        self.raw(&[0xc4, 0x84, s[0], s[1], d[0], d[1]])
    }

    pub fn areturn(&mut self) -> &mut Self {
        self.op(0xb0)
    }

    pub fn ireturn(&mut self) -> &mut Self {
        self.op(0xac)
    }

    pub fn return_(&mut self) -> &mut Self {
        self.op(0xb1)
    }

    pub fn athrow(&mut self) -> &mut Self {
        self.op(0xbf)
    }

    pub fn dup(&mut self) -> &mut Self {
        self.op(0x59)
    }

    pub fn pop(&mut self) -> &mut Self {
        self.op(0x57)
    }

    pub fn handler(&mut self, start: Label, end: Label, target: Label, catch: Option<&str>) -> &mut Self {
        self.handlers.push((start, end, target, catch.map(str::to_string)));
        self
    }

    pub fn frame_same(&mut self, at: Label) -> &mut Self {
        self.frames.push(Frame::Same(at));
        self
    }

    pub fn frame_stack_object(&mut self, at: Label, class: &str) -> &mut Self {
        self.frames.push(Frame::SameLocals1Stack(at, class.into()));
        self
    }

    pub fn line(&mut self, at: Label, line: u16) -> &mut Self {
        self.line_numbers.push((at, line));
        self
    }

    pub fn local_var(&mut self, start: Label, end: Label, name: &str, desc: &str, slot: u16) -> &mut Self {
        self.local_vars.push((start, end, name.into(), desc.into(), slot));
        self
    }
}

/// Annotation element value.
#[derive(Debug, Clone)]
pub enum Elem {
    Const(u8, Const),
    Enum(String, String),
    Class(String),
    Nested(Annotation),
    Array(Vec<Elem>),
}

#[derive(Debug, Clone)]
pub struct Annotation {
    pub descriptor: String,
    pub elements: Vec<(String, Elem)>,
}

impl Annotation {
    pub fn new(descriptor: &str) -> Self {
        Annotation { descriptor: descriptor.into(), elements: Vec::new() }
    }

    pub fn with(mut self, name: &str, value: Elem) -> Self {
        self.elements.push((name.into(), value));
        self
    }
}

#[derive(Debug, Clone)]
enum Attr {
    Code(Code),
    ConstantValue(Const),
    Exceptions(Vec<String>),
    Signature(String),
    SourceFile(String),
    InnerClasses(Vec<(String, Option<String>, Option<String>, u16)>),
    Annotations(bool, Vec<Annotation>),
    NestHost(String),
    NestMembers(Vec<String>),
    PermittedSubclasses(Vec<String>),
    Deprecated,
    Raw(String, Vec<u8>),
}

#[derive(Debug, Clone)]
struct Member {
    access: u16,
    name: String,
    descriptor: String,
    attrs: Vec<Attr>,
}

/// Member under construction; attach attributes then drop.
pub struct MemberBuilder<'a> {
    member: &'a mut Member,
}

impl MemberBuilder<'_> {
    pub fn code(self, code: Code) -> Self {
        self.member.attrs.push(Attr::Code(code));
        self
    }

    pub fn constant_value(self, c: Const) -> Self {
        self.member.attrs.push(Attr::ConstantValue(c));
        self
    }

    pub fn exceptions(self, names: &[&str]) -> Self {
        self.member.attrs.push(Attr::Exceptions(names.iter().map(|s| s.to_string()).collect()));
        self
    }

    pub fn signature(self, sig: &str) -> Self {
        self.member.attrs.push(Attr::Signature(sig.into()));
        self
    }

    pub fn annotations(self, visible: bool, anns: Vec<Annotation>) -> Self {
        self.member.attrs.push(Attr::Annotations(visible, anns));
        self
    }

    pub fn deprecated(self) -> Self {
        self.member.attrs.push(Attr::Deprecated);
        self
    }

    pub fn raw_attribute(self, name: &str, body: &[u8]) -> Self {
        self.member.attrs.push(Attr::Raw(name.into(), body.to_vec()));
        self
    }
}

/// Constant-pool layout knobs for [`ClassBuilder::build_with`].
#[derive(Debug, Clone, Default)]
pub struct Layout {
    /// Emit pool entries in reverse first-use order.
    pub reverse: bool,
    /// Emit every Utf8 entry twice and alternate references between copies.
    pub duplicate_utf8: bool,
    /// Unused Utf8 entries appended after the live ones.
    pub extra_unused: Vec<String>,
    pub minor_version: u16,
    pub major_version: Option<u16>,
}

#[derive(Debug, Clone)]
pub struct ClassBuilder {
    access: u16,
    name: String,
    super_name: Option<String>,
    interfaces: Vec<String>,
    fields: Vec<Member>,
    methods: Vec<Member>,
    attrs: Vec<Attr>,
    bootstraps: Vec<(Const, Vec<Const>)>,
    major: u16,
}

impl ClassBuilder {
    pub fn new(name: &str) -> Self {
        ClassBuilder {
            access: ACC_PUBLIC | ACC_SUPER,
            name: name.into(),
            super_name: Some("java/lang/Object".into()),
            interfaces: Vec::new(),
            fields: Vec::new(),
            methods: Vec::new(),
            attrs: Vec::new(),
            bootstraps: Vec::new(),
            major: 52,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn access(mut self, flags: u16) -> Self {
        self.access = flags;
        self
    }

    pub fn major(mut self, major: u16) -> Self {
        self.major = major;
        self
    }

    pub fn super_class(mut self, name: Option<&str>) -> Self {
        self.super_name = name.map(str::to_string);
        self
    }

    pub fn implements(mut self, name: &str) -> Self {
        self.interfaces.push(name.into());
        self
    }

    pub fn field(&mut self, access: u16, name: &str, descriptor: &str) -> MemberBuilder<'_> {
        self.fields.push(Member { access, name: name.into(), descriptor: descriptor.into(), attrs: vec![] });
        MemberBuilder { member: self.fields.last_mut().unwrap() }
    }

    pub fn method(&mut self, access: u16, name: &str, descriptor: &str) -> MemberBuilder<'_> {
        self.methods.push(Member { access, name: name.into(), descriptor: descriptor.into(), attrs: vec![] });
        MemberBuilder { member: self.methods.last_mut().unwrap() }
    }

    /// Adds a `public <init>()V` that calls the superclass constructor.
    pub fn default_constructor(&mut self) {
        let sup = self.super_name.clone().unwrap_or_else(|| "java/lang/Object".into());
        let mut code = Code::new(1, 1);
        code.aload(0).invokespecial(&sup, "<init>", "()V").return_();
        self.method(ACC_PUBLIC, "<init>", "()V").code(code);
    }

    /// Registers a bootstrap method and returns its index.
    pub fn bootstrap(&mut self, handle: Const, args: Vec<Const>) -> u16 {
        self.bootstraps.push((handle, args));
        (self.bootstraps.len() - 1) as u16
    }

    pub fn source_file(mut self, name: &str) -> Self {
        self.attrs.push(Attr::SourceFile(name.into()));
        self
    }

    pub fn signature(mut self, sig: &str) -> Self {
        self.attrs.push(Attr::Signature(sig.into()));
        self
    }

    pub fn inner_class(mut self, inner: &str, outer: Option<&str>, simple: Option<&str>, flags: u16) -> Self {
        match self.attrs.iter_mut().find(|a| matches!(a, Attr::InnerClasses(_))) {
            Some(Attr::InnerClasses(v)) => {
                v.push((inner.into(), outer.map(Into::into), simple.map(Into::into), flags))
            }
            _ => self.attrs.push(Attr::InnerClasses(vec![(
                inner.into(),
                outer.map(Into::into),
                simple.map(Into::into),
                flags,
            )])),
        }
        self
    }

    pub fn annotations(mut self, visible: bool, anns: Vec<Annotation>) -> Self {
        self.attrs.push(Attr::Annotations(visible, anns));
        self
    }

    pub fn nest_host(mut self, host: &str) -> Self {
        self.attrs.push(Attr::NestHost(host.into()));
        self
    }

    pub fn nest_members(mut self, members: &[&str]) -> Self {
        self.attrs.push(Attr::NestMembers(members.iter().map(|s| s.to_string()).collect()));
        self
    }

    pub fn permitted_subclasses(mut self, members: &[&str]) -> Self {
        self.attrs.push(Attr::PermittedSubclasses(members.iter().map(|s| s.to_string()).collect()));
        self
    }

    pub fn raw_attribute(mut self, name: &str, body: &[u8]) -> Self {
        self.attrs.push(Attr::Raw(name.into(), body.to_vec()));
        self
    }

    pub fn build(&self) -> Vec<u8> {
        self.build_with(&Layout::default())
    }

    pub fn build_with(&self, layout: &Layout) -> Vec<u8> {
        let mut pool = Pool::default();
        self.collect(&mut pool);
        let pool = pool.assign(layout);
        let mut out = Vec::new();
        out.extend_from_slice(&0xCAFE_BABEu32.to_be_bytes());
        out.extend_from_slice(&layout.minor_version.to_be_bytes());
        out.extend_from_slice(&layout.major_version.unwrap_or(self.major).to_be_bytes());
        pool.write(&mut out);
        u16_(&mut out, self.access);
        u16_(&mut out, pool.idx(&Const::Class(self.name.clone())));
        u16_(&mut out, self.super_name.as_ref().map_or(0, |s| pool.idx(&Const::Class(s.clone()))));
        u16_(&mut out, self.interfaces.len() as u16);
        for i in &self.interfaces {
            u16_(&mut out, pool.idx(&Const::Class(i.clone())));
        }
        for members in [&self.fields, &self.methods] {
            u16_(&mut out, members.len() as u16);
            for m in members {
                u16_(&mut out, m.access);
                u16_(&mut out, pool.idx(&Const::Utf8(m.name.clone())));
                u16_(&mut out, pool.idx(&Const::Utf8(m.descriptor.clone())));
                write_attrs(&mut out, &m.attrs, &pool);
            }
        }
        let mut attrs = self.attrs.clone();
        if !self.bootstraps.is_empty() {
            let mut body = Vec::new();
            u16_(&mut body, self.bootstraps.len() as u16);
            for (h, args) in &self.bootstraps {
                u16_(&mut body, pool.idx(h));
                u16_(&mut body, args.len() as u16);
                for a in args {
                    u16_(&mut body, pool.idx(a));
                }
            }
            attrs.push(Attr::Raw("BootstrapMethods".into(), body));
        }
        write_attrs(&mut out, &attrs, &pool);
        out
    }

    fn collect(&self, pool: &mut Pool) {
        pool.add(Const::Class(self.name.clone()));
        if let Some(s) = &self.super_name {
            pool.add(Const::Class(s.clone()));
        }
        for i in &self.interfaces {
            pool.add(Const::Class(i.clone()));
        }
        for m in self.fields.iter().chain(&self.methods) {
            pool.add(Const::Utf8(m.name.clone()));
            pool.add(Const::Utf8(m.descriptor.clone()));
            collect_attrs(&m.attrs, pool);
        }
        collect_attrs(&self.attrs, pool);
        if !self.bootstraps.is_empty() {
            pool.add(Const::Utf8("BootstrapMethods".into()));
            for (h, args) in &self.bootstraps {
                pool.add(h.clone());
                for a in args {
                    pool.add(a.clone());
                }
            }
        }
    }
}

fn attr_name(a: &Attr) -> &str {
    match a {
        Attr::Code(_) => "Code",
        Attr::ConstantValue(_) => "ConstantValue",
        Attr::Exceptions(_) => "Exceptions",
        Attr::Signature(_) => "Signature",
        Attr::SourceFile(_) => "SourceFile",
        Attr::InnerClasses(_) => "InnerClasses",
        Attr::Annotations(true, _) => "RuntimeVisibleAnnotations",
        Attr::Annotations(false, _) => "RuntimeInvisibleAnnotations",
        Attr::NestHost(_) => "NestHost",
        Attr::NestMembers(_) => "NestMembers",
        Attr::PermittedSubclasses(_) => "PermittedSubclasses",
        Attr::Deprecated => "Deprecated",
        Attr::Raw(n, _) => n,
    }
}

fn collect_attrs(attrs: &[Attr], pool: &mut Pool) {
    for a in attrs {
        pool.add(Const::Utf8(attr_name(a).into()));
        match a {
            Attr::Code(code) => {
                for op in &code.ops {
                    match op {
                        Op::Ldc(c) | Op::LdcW(c) | Op::Cp(_, c, _) => pool.add(c.clone()),
                        _ => {}
                    }
                }
                for (_, _, _, catch) in &code.handlers {
                    if let Some(c) = catch {
                        pool.add(Const::Class(c.clone()));
                    }
                }
                if !code.frames.is_empty() {
                    pool.add(Const::Utf8("StackMapTable".into()));
                    for f in &code.frames {
                        if let Frame::SameLocals1Stack(_, c) = f {
                            pool.add(Const::Class(c.clone()));
                        }
                    }
                }
                if !code.line_numbers.is_empty() {
                    pool.add(Const::Utf8("LineNumberTable".into()));
                }
                if !code.local_vars.is_empty() {
                    pool.add(Const::Utf8("LocalVariableTable".into()));
                    for (_, _, n, d, _) in &code.local_vars {
                        pool.add(Const::Utf8(n.clone()));
                        pool.add(Const::Utf8(d.clone()));
                    }
                }
            }
            Attr::ConstantValue(c) => pool.add(c.clone()),
            Attr::Exceptions(v) | Attr::NestMembers(v) | Attr::PermittedSubclasses(v) => {
                for n in v {
                    pool.add(Const::Class(n.clone()));
                }
            }
            Attr::NestHost(n) => pool.add(Const::Class(n.clone())),
            Attr::Signature(s) | Attr::SourceFile(s) => pool.add(Const::Utf8(s.clone())),
            Attr::InnerClasses(v) => {
                for (inner, outer, simple, _) in v {
                    pool.add(Const::Class(inner.clone()));
                    if let Some(o) = outer {
                        pool.add(Const::Class(o.clone()));
                    }
                    if let Some(s) = simple {
                        pool.add(Const::Utf8(s.clone()));
                    }
                }
            }
            Attr::Annotations(_, anns) => {
                for ann in anns {
                    collect_annotation(ann, pool);
                }
            }
            Attr::Deprecated | Attr::Raw(..) => {}
        }
    }
}

fn collect_annotation(ann: &Annotation, pool: &mut Pool) {
    pool.add(Const::Utf8(ann.descriptor.clone()));
    for (name, value) in &ann.elements {
        pool.add(Const::Utf8(name.clone()));
        collect_elem(value, pool);
    }
}

fn collect_elem(e: &Elem, pool: &mut Pool) {
    match e {
        Elem::Const(_, c) => pool.add(c.clone()),
        Elem::Enum(t, n) => {
            pool.add(Const::Utf8(t.clone()));
            pool.add(Const::Utf8(n.clone()));
        }
        Elem::Class(d) => pool.add(Const::Utf8(d.clone())),
        Elem::Nested(a) => collect_annotation(a, pool),
        Elem::Array(v) => v.iter().for_each(|e| collect_elem(e, pool)),
    }
}

fn write_attrs(out: &mut Vec<u8>, attrs: &[Attr], pool: &Assigned) {
    u16_(out, attrs.len() as u16);
    for a in attrs {
        let mut body = Vec::new();
        match a {
            Attr::Code(code) => write_code(&mut body, code, pool),
            Attr::ConstantValue(c) => u16_(&mut body, pool.idx(c)),
            Attr::Exceptions(v) | Attr::NestMembers(v) | Attr::PermittedSubclasses(v) => {
                u16_(&mut body, v.len() as u16);
                for n in v {
                    u16_(&mut body, pool.idx(&Const::Class(n.clone())));
                }
            }
            Attr::NestHost(n) => u16_(&mut body, pool.idx(&Const::Class(n.clone()))),
            Attr::Signature(s) | Attr::SourceFile(s) => u16_(&mut body, pool.idx(&Const::Utf8(s.clone()))),
            Attr::InnerClasses(v) => {
                u16_(&mut body, v.len() as u16);
                for (inner, outer, simple, flags) in v {
                    u16_(&mut body, pool.idx(&Const::Class(inner.clone())));
                    u16_(&mut body, outer.as_ref().map_or(0, |o| pool.idx(&Const::Class(o.clone()))));
                    u16_(&mut body, simple.as_ref().map_or(0, |s| pool.idx(&Const::Utf8(s.clone()))));
                    u16_(&mut body, *flags);
                }
            }
            Attr::Annotations(_, anns) => {
                u16_(&mut body, anns.len() as u16);
                for ann in anns {
                    write_annotation(&mut body, ann, pool);
                }
            }
            Attr::Deprecated => {}
            Attr::Raw(_, bytes) => body.extend_from_slice(bytes),
        }
        u16_(out, pool.idx(&Const::Utf8(attr_name(a).into())));
        out.extend_from_slice(&(body.len() as u32).to_be_bytes());
        out.extend_from_slice(&body);
    }
}

fn write_annotation(out: &mut Vec<u8>, ann: &Annotation, pool: &Assigned) {
    u16_(out, pool.idx(&Const::Utf8(ann.descriptor.clone())));
    u16_(out, ann.elements.len() as u16);
    for (name, value) in &ann.elements {
        u16_(out, pool.idx(&Const::Utf8(name.clone())));
        write_elem(out, value, pool);
    }
}

fn write_elem(out: &mut Vec<u8>, e: &Elem, pool: &Assigned) {
    match e {
        Elem::Const(tag, c) => {
            out.push(*tag);
            u16_(out, pool.idx(c));
        }
        Elem::Enum(t, n) => {
            out.push(b'e');
            u16_(out, pool.idx(&Const::Utf8(t.clone())));
            u16_(out, pool.idx(&Const::Utf8(n.clone())));
        }
        Elem::Class(d) => {
            out.push(b'c');
            u16_(out, pool.idx(&Const::Utf8(d.clone())));
        }
        Elem::Nested(a) => {
            out.push(b'@');
            write_annotation(out, a, pool);
        }
        Elem::Array(v) => {
            out.push(b'[');
            u16_(out, v.len() as u16);
            for e in v {
                write_elem(out, e, pool);
            }
        }
    }
}

fn write_code(out: &mut Vec<u8>, code: &Code, pool: &Assigned) {
    // Offsets only depend on instruction positions, so one pass settles them.
    let mut offsets = HashMap::new();
    let mut pc = 0usize;
    for op in &code.ops {
        match op {
            Op::Mark(l) => {
                offsets.insert(*l, pc);
            }
            Op::Raw(b) => pc += b.len(),
            Op::Ldc(c) => pc += if pool.idx(c) <= 255 { 2 } else { 3 },
            Op::LdcW(_) | Op::Branch(..) => pc += 3,
            Op::Cp(_, _, t) => pc += 3 + t.len(),
            Op::TableSwitch { targets, .. } => pc += 1 + pad(pc) + 12 + 4 * targets.len(),
            Op::LookupSwitch { pairs, .. } => pc += 1 + pad(pc) + 8 + 8 * pairs.len(),
        }
    }
    let at = |l: &Label| *offsets.get(l).expect("unmarked label");

    let mut bytes = Vec::new();
    for op in &code.ops {
        let start = bytes.len();
        match op {
            Op::Mark(_) => {}
            Op::Raw(b) => bytes.extend_from_slice(b),
            Op::Ldc(c) => {
                let i = pool.idx(c);
                if i <= 255 {
                    bytes.extend_from_slice(&[0x12, i as u8]);
                } else {
                    bytes.push(0x13);
                    u16_(&mut bytes, i);
                }
            }
            Op::LdcW(c) => {
                bytes.push(0x13);
                u16_(&mut bytes, pool.idx(c));
            }
            Op::Cp(opcode, c, trailing) => {
                bytes.push(*opcode);
                u16_(&mut bytes, pool.idx(c));
                bytes.extend_from_slice(trailing);
            }
            Op::Branch(opcode, l) => {
                bytes.push(*opcode);
                let rel = at(l) as i64 - start as i64;
                bytes.extend_from_slice(&(rel as i16).to_be_bytes());
            }
            Op::TableSwitch { default, low, targets } => {
                bytes.push(0xaa);
                bytes.extend(std::iter::repeat_n(0, pad(start)));
                let rel = |l: &Label| (at(l) as i64 - start as i64) as i32;
                bytes.extend_from_slice(&rel(default).to_be_bytes());
                bytes.extend_from_slice(&low.to_be_bytes());
                bytes.extend_from_slice(&(low + targets.len() as i32 - 1).to_be_bytes());
                for t in targets {
                    bytes.extend_from_slice(&rel(t).to_be_bytes());
                }
            }
            Op::LookupSwitch { default, pairs } => {
                bytes.push(0xab);
                bytes.extend(std::iter::repeat_n(0, pad(start)));
                let rel = |l: &Label| (at(l) as i64 - start as i64) as i32;
                bytes.extend_from_slice(&rel(default).to_be_bytes());
                bytes.extend_from_slice(&(pairs.len() as i32).to_be_bytes());
                for (k, t) in pairs {
                    bytes.extend_from_slice(&k.to_be_bytes());
                    bytes.extend_from_slice(&rel(t).to_be_bytes());
                }
            }
        }
    }

    u16_(out, code.max_stack);
    u16_(out, code.max_locals);
    out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    out.extend_from_slice(&bytes);
    u16_(out, code.handlers.len() as u16);
    for (s, e, h, catch) in &code.handlers {
        u16_(out, at(s) as u16);
        u16_(out, at(e) as u16);
        u16_(out, at(h) as u16);
        u16_(out, catch.as_ref().map_or(0, |c| pool.idx(&Const::Class(c.clone()))));
    }

    let mut sub: Vec<(String, Vec<u8>)> = Vec::new();
    if !code.line_numbers.is_empty() {
        let mut b = Vec::new();
        u16_(&mut b, code.line_numbers.len() as u16);
        for (l, line) in &code.line_numbers {
            u16_(&mut b, at(l) as u16);
            u16_(&mut b, *line);
        }
        sub.push(("LineNumberTable".into(), b));
    }
    if !code.local_vars.is_empty() {
        let mut b = Vec::new();
        u16_(&mut b, code.local_vars.len() as u16);
        for (s, e, n, d, slot) in &code.local_vars {
            u16_(&mut b, at(s) as u16);
            u16_(&mut b, (at(e) - at(s)) as u16);
            u16_(&mut b, pool.idx(&Const::Utf8(n.clone())));
            u16_(&mut b, pool.idx(&Const::Utf8(d.clone())));
            u16_(&mut b, *slot);
        }
        sub.push(("LocalVariableTable".into(), b));
    }
    if !code.frames.is_empty() {
        let mut b = Vec::new();
        u16_(&mut b, code.frames.len() as u16);
        let mut prev: Option<usize> = None;
        for f in &code.frames {
            let (l, obj) = match f {
                Frame::Same(l) => (l, None),
                Frame::SameLocals1Stack(l, c) => (l, Some(c)),
            };
            let off = at(l);
            let delta = match prev {
                None => off,
                Some(p) => off - p - 1,
            };
            prev = Some(off);
            match (obj, delta) {
                (None, 0..=63) => b.push(delta as u8),
                (None, _) => {
                    b.push(251);
                    u16_(&mut b, delta as u16);
                }
                (Some(c), 0..=63) => {
                    b.push(64 + delta as u8);
                    b.push(7);
                    u16_(&mut b, pool.idx(&Const::Class(c.clone())));
                }
                (Some(c), _) => {
                    b.push(247);
                    u16_(&mut b, delta as u16);
                    b.push(7);
                    u16_(&mut b, pool.idx(&Const::Class(c.clone())));
                }
            }
        }
        sub.push(("StackMapTable".into(), b));
    }
    u16_(out, sub.len() as u16);
    for (name, body) in sub {
        u16_(out, pool.idx(&Const::Utf8(name)));
        out.extend_from_slice(&(body.len() as u32).to_be_bytes());
        out.extend_from_slice(&body);
    }
}

fn pad(opcode_offset: usize) -> usize {
    (4 - (opcode_offset + 1) % 4) % 4
}

fn u16_(out: &mut Vec<u8>, v: u16) {
    out.extend_from_slice(&v.to_be_bytes());
}

#[derive(Default)]
struct Pool {
    order: Vec<Const>,
    seen: HashMap<Const, ()>,
}

impl Pool {
    fn add(&mut self, c: Const) {
        if self.seen.contains_key(&c) {
            return;
        }
        self.seen.insert(c.clone(), ());
        self.order.push(c.clone());
        for child in c.children() {
            self.add(child);
        }
    }

    fn assign(self, layout: &Layout) -> Assigned {
        let mut order = self.order;
        if layout.reverse {
            order.reverse();
        }
        let mut slots: HashMap<Const, Vec<u16>> = HashMap::new();
        let mut entries = Vec::new();
        let mut next = 1u16;
        for c in order {
            let copies = if layout.duplicate_utf8 && matches!(c, Const::Utf8(_)) { 2 } else { 1 };
            for _ in 0..copies {
                slots.entry(c.clone()).or_default().push(next);
                entries.push(c.clone());
                next += c.slots();
            }
        }
        for extra in &layout.extra_unused {
            entries.push(Const::Utf8(extra.clone()));
            next += 1;
        }
        Assigned { entries, slots, count: next, cursor: Cell::new(0) }
    }
}

struct Assigned {
    entries: Vec<Const>,
    slots: HashMap<Const, Vec<u16>>,
    count: u16,
    cursor: Cell<usize>,
}

impl Assigned {
    fn idx(&self, c: &Const) -> u16 {
        let s = self.slots.get(c).unwrap_or_else(|| panic!("constant not collected: {c:?}"));
        if s.len() == 1 {
            return s[0];
        }
        let n = self.cursor.get();
        self.cursor.set(n + 1);
        s[n % s.len()]
    }

    fn write(&self, out: &mut Vec<u8>) {
        u16_(out, self.count);
        for c in &self.entries {
            match c {
                Const::Utf8(s) => {
                    out.push(1);
                    let b = mutf8(s);
                    u16_(out, b.len() as u16);
                    out.extend_from_slice(&b);
                }
                Const::Int(v) => {
                    out.push(3);
                    out.extend_from_slice(&v.to_be_bytes());
                }
                Const::Float(v) => {
                    out.push(4);
                    out.extend_from_slice(&v.to_be_bytes());
                }
                Const::Long(v) => {
                    out.push(5);
                    out.extend_from_slice(&v.to_be_bytes());
                }
                Const::Double(v) => {
                    out.push(6);
                    out.extend_from_slice(&v.to_be_bytes());
                }
                Const::Class(n) => {
                    out.push(7);
                    u16_(out, self.idx(&Const::Utf8(n.clone())));
                }
                Const::Str(n) => {
                    out.push(8);
                    u16_(out, self.idx(&Const::Utf8(n.clone())));
                }
                Const::Field(o, n, d) | Const::Method(o, n, d) | Const::IMethod(o, n, d) => {
                    out.push(match c {
                        Const::Field(..) => 9,
                        Const::Method(..) => 10,
                        _ => 11,
                    });
                    u16_(out, self.idx(&Const::Class(o.clone())));
                    u16_(out, self.idx(&Const::NameAndType(n.clone(), d.clone())));
                }
                Const::NameAndType(n, d) => {
                    out.push(12);
                    u16_(out, self.idx(&Const::Utf8(n.clone())));
                    u16_(out, self.idx(&Const::Utf8(d.clone())));
                }
                Const::MethodHandle(kind, r) => {
                    out.push(15);
                    out.push(*kind);
                    u16_(out, self.idx(r));
                }
                Const::MethodType(d) => {
                    out.push(16);
                    u16_(out, self.idx(&Const::Utf8(d.clone())));
                }
                Const::Dynamic(b, n, d) | Const::InvokeDynamic(b, n, d) => {
                    out.push(if matches!(c, Const::Dynamic(..)) { 17 } else { 18 });
                    u16_(out, *b);
                    u16_(out, self.idx(&Const::NameAndType(n.clone(), d.clone())));
                }
            }
        }
    }
}

/// Java "modified UTF-8": NUL as two bytes and supplementary characters as
/// surrogate pairs.
pub fn mutf8(s: &str) -> Vec<u8> {
    let mut out = Vec::with_capacity(s.len());
    for unit in s.encode_utf16() {
        match unit {
            0x0001..=0x007f => out.push(unit as u8),
            0x0000 | 0x0080..=0x07ff => {
                out.push(0xc0 | (unit >> 6) as u8);
                out.push(0x80 | (unit & 0x3f) as u8);
            }
            _ => {
                out.push(0xe0 | (unit >> 12) as u8);
                out.push(0x80 | ((unit >> 6) & 0x3f) as u8);
                out.push(0x80 | (unit & 0x3f) as u8);
            }
        }
    }
    out
}
