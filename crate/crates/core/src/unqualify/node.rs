//! Symbolic, constant-pool-free view of a class.

use crate::classfile::code::{Instructions, LDC, LOOKUPSWITCH, TABLESWITCH};
use crate::classfile::{
    Annotation, Attribute, AttributeInfo, BootstrapMethod, ClassFile, ConstantPool, ConstantPoolEntry, ElementValue,
    StackMapFrame, Utf8Text, VerificationType,
};

use super::{NameMapper, UnqualifyError};

/// Constant nesting beyond this (through bootstrap arguments) is treated as a cycle.
const MAX_CONSTANT_DEPTH: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MemberRef {
    pub owner: String,
    pub name: String,
    pub descriptor: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bootstrap {
    /// Always a [`Constant::MethodHandle`].
    pub handle: Constant,
    pub arguments: Vec<Constant>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DynamicRef {
    pub bootstrap: Bootstrap,
    pub name: String,
    pub descriptor: String,
}

/// A constant-pool entry with all references resolved.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Constant {
    Utf8(Utf8Text),
    Integer(i32),
    Float(u32),
    Long(i64),
    Double(u64),
    Class(String),
    String(Utf8Text),
    Fieldref(MemberRef),
    Methodref(MemberRef),
    InterfaceMethodref(MemberRef),
    MethodHandle { kind: u8, member: Box<Constant> },
    MethodType(String),
    Dynamic(Box<DynamicRef>),
    InvokeDynamic(Box<DynamicRef>),
}

impl Constant {
    pub fn tag(&self) -> u8 {
        match self {
            Constant::Utf8(_) => 1,
            Constant::Integer(_) => 3,
            Constant::Float(_) => 4,
            Constant::Long(_) => 5,
            Constant::Double(_) => 6,
            Constant::Class(_) => 7,
            Constant::String(_) => 8,
            Constant::Fieldref(_) => 9,
            Constant::Methodref(_) => 10,
            Constant::InterfaceMethodref(_) => 11,
            Constant::MethodHandle { .. } => 15,
            Constant::MethodType(_) => 16,
            Constant::Dynamic(_) => 17,
            Constant::InvokeDynamic(_) => 18,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InsnNode {
    /// Instruction without pool operands, copied verbatim.
    Plain(Vec<u8>),
    /// `tableswitch`/`lookupswitch`; `padding` is kept for reassembly.
    Switch { opcode: u8, padding: Vec<u8>, body: Vec<u8> },
    Pool { opcode: u8, constant: Constant, trailing: Vec<u8> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HandlerNode {
    pub start_pc: u16,
    pub end_pc: u16,
    pub handler_pc: u16,
    pub catch_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeNode {
    pub max_stack: u16,
    pub max_locals: u16,
    pub instructions: Vec<InsnNode>,
    pub handlers: Vec<HandlerNode>,
    pub attributes: Vec<AttrNode>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VType {
    Top,
    Integer,
    Float,
    Double,
    Long,
    Null,
    UninitializedThis,
    Object(String),
    Uninitialized(u16),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InnerClassNode {
    pub inner: String,
    pub outer: Option<String>,
    pub simple_name: Option<String>,
    pub access_flags: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalVarNode {
    pub start_pc: u16,
    pub length: u16,
    pub name: String,
    /// Descriptor in a `LocalVariableTable`, signature in a `LocalVariableTypeTable`.
    pub descriptor: String,
    pub index: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationNode {
    pub type_descriptor: String,
    pub elements: Vec<(String, ElementNode)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElementNode {
    Const { tag: u8, value: Constant },
    Enum { type_descriptor: String, name: String },
    Class(String),
    Annotation(AnnotationNode),
    Array(Vec<ElementNode>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordComponentNode {
    pub name: String,
    pub descriptor: String,
    pub attributes: Vec<AttrNode>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttrNode {
    ConstantValue(Constant),
    Code(CodeNode),
    StackMapTable(Vec<(StackMapFrame, Vec<VType>)>),
    Exceptions(Vec<String>),
    InnerClasses(Vec<InnerClassNode>),
    EnclosingMethod { class: String, method: Option<(String, String)> },
    Synthetic,
    Deprecated,
    Signature(String),
    SourceFile(String),
    SourceDebugExtension(Vec<u8>),
    LineNumberTable(Vec<(u16, u16)>),
    LocalVariableTable(Vec<LocalVarNode>),
    LocalVariableTypeTable(Vec<LocalVarNode>),
    Annotations { visible: bool, annotations: Vec<AnnotationNode> },
    ParameterAnnotations { visible: bool, parameters: Vec<Vec<AnnotationNode>> },
    AnnotationDefault(ElementNode),
    /// Position of the class's `BootstrapMethods`; contents live in the constants.
    BootstrapMethods,
    MethodParameters(Vec<(Option<String>, u16)>),
    NestHost(String),
    NestMembers(Vec<String>),
    PermittedSubclasses(Vec<String>),
    Record(Vec<RecordComponentNode>),
    Opaque { name: String, bytes: Vec<u8> },
}

impl AttrNode {
    pub fn name(&self) -> &str {
        match self {
            AttrNode::ConstantValue(_) => "ConstantValue",
            AttrNode::Code(_) => "Code",
            AttrNode::StackMapTable(_) => "StackMapTable",
            AttrNode::Exceptions(_) => "Exceptions",
            AttrNode::InnerClasses(_) => "InnerClasses",
            AttrNode::EnclosingMethod { .. } => "EnclosingMethod",
            AttrNode::Synthetic => "Synthetic",
            AttrNode::Deprecated => "Deprecated",
            AttrNode::Signature(_) => "Signature",
            AttrNode::SourceFile(_) => "SourceFile",
            AttrNode::SourceDebugExtension(_) => "SourceDebugExtension",
            AttrNode::LineNumberTable(_) => "LineNumberTable",
            AttrNode::LocalVariableTable(_) => "LocalVariableTable",
            AttrNode::LocalVariableTypeTable(_) => "LocalVariableTypeTable",
            AttrNode::Annotations { visible: true, .. } => "RuntimeVisibleAnnotations",
            AttrNode::Annotations { visible: false, .. } => "RuntimeInvisibleAnnotations",
            AttrNode::ParameterAnnotations { visible: true, .. } => "RuntimeVisibleParameterAnnotations",
            AttrNode::ParameterAnnotations { visible: false, .. } => "RuntimeInvisibleParameterAnnotations",
            AttrNode::AnnotationDefault(_) => "AnnotationDefault",
            AttrNode::BootstrapMethods => "BootstrapMethods",
            AttrNode::MethodParameters(_) => "MethodParameters",
            AttrNode::NestHost(_) => "NestHost",
            AttrNode::NestMembers(_) => "NestMembers",
            AttrNode::PermittedSubclasses(_) => "PermittedSubclasses",
            AttrNode::Record(_) => "Record",
            AttrNode::Opaque { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemberNode {
    pub access_flags: u16,
    pub name: String,
    pub descriptor: String,
    pub attributes: Vec<AttrNode>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassNode {
    pub minor_version: u16,
    pub major_version: u16,
    pub access_flags: u16,
    pub name: String,
    pub super_name: Option<String>,
    pub interfaces: Vec<String>,
    pub fields: Vec<MemberNode>,
    pub methods: Vec<MemberNode>,
    pub attributes: Vec<AttrNode>,
}

struct Lifter<'a> {
    pool: &'a ConstantPool,
    bootstraps: &'a [BootstrapMethod],
}

fn unsupported(e: impl std::fmt::Display) -> UnqualifyError {
    UnqualifyError::UnsupportedConstruct(e.to_string())
}

impl<'a> Lifter<'a> {
    fn utf8(&self, index: u16) -> Result<String, UnqualifyError> {
        self.pool.utf8(index).map(str::to_string).map_err(unsupported)
    }

    fn opt_utf8(&self, index: u16) -> Result<Option<String>, UnqualifyError> {
        (index != 0).then(|| self.utf8(index)).transpose()
    }

    fn class(&self, index: u16) -> Result<String, UnqualifyError> {
        self.pool.class_name(index).map(str::to_string).map_err(unsupported)
    }

    fn opt_class(&self, index: u16) -> Result<Option<String>, UnqualifyError> {
        (index != 0).then(|| self.class(index)).transpose()
    }

    fn member_ref(&self, class_index: u16, nat: u16) -> Result<MemberRef, UnqualifyError> {
        let (name, descriptor) = self.pool.name_and_type(nat).map_err(unsupported)?;
        Ok(MemberRef { owner: self.class(class_index)?, name: name.to_string(), descriptor: descriptor.to_string() })
    }

    fn constant(&self, index: u16, depth: usize) -> Result<Constant, UnqualifyError> {
        use ConstantPoolEntry as E;
        if depth > MAX_CONSTANT_DEPTH {
            return Err(unsupported("constant references nest too deeply"));
        }
        let entry = self.pool.get(index).map_err(unsupported)?;
        Ok(match entry {
            E::Utf8(t) => Constant::Utf8(t.clone()),
            E::Integer(v) => Constant::Integer(*v),
            E::Float(v) => Constant::Float(*v),
            E::Long(v) => Constant::Long(*v),
            E::Double(v) => Constant::Double(*v),
            E::Class { name_index } => Constant::Class(self.utf8(*name_index)?),
            E::String { string_index } => {
                Constant::String(self.pool.utf8_entry(*string_index).map_err(unsupported)?.clone())
            }
            E::Fieldref { class_index, name_and_type_index } => {
                Constant::Fieldref(self.member_ref(*class_index, *name_and_type_index)?)
            }
            E::Methodref { class_index, name_and_type_index } => {
                Constant::Methodref(self.member_ref(*class_index, *name_and_type_index)?)
            }
            E::InterfaceMethodref { class_index, name_and_type_index } => {
                Constant::InterfaceMethodref(self.member_ref(*class_index, *name_and_type_index)?)
            }
            E::MethodHandle { reference_kind, reference_index } => Constant::MethodHandle {
                kind: *reference_kind,
                member: Box::new(self.constant(*reference_index, depth + 1)?),
            },
            E::MethodType { descriptor_index } => Constant::MethodType(self.utf8(*descriptor_index)?),
            E::Dynamic { bootstrap_method_attr_index, name_and_type_index }
            | E::InvokeDynamic { bootstrap_method_attr_index, name_and_type_index } => {
                let bsm = self
                    .bootstraps
                    .get(*bootstrap_method_attr_index as usize)
                    .ok_or_else(|| unsupported("missing bootstrap method"))?;
                let bootstrap = Bootstrap {
                    handle: self.constant(bsm.method_ref, depth + 1)?,
                    arguments: bsm
                        .arguments
                        .iter()
                        .map(|&a| self.constant(a, depth + 1))
                        .collect::<Result<_, _>>()?,
                };
                let (name, descriptor) = self.pool.name_and_type(*name_and_type_index).map_err(unsupported)?;
                let d = Box::new(DynamicRef { bootstrap, name: name.to_string(), descriptor: descriptor.to_string() });
                if matches!(entry, E::Dynamic { .. }) {
                    Constant::Dynamic(d)
                } else {
                    Constant::InvokeDynamic(d)
                }
            }
            E::Module { .. } | E::Package { .. } | E::NameAndType { .. } | E::Unusable => {
                return Err(unsupported(format!("constant #{index} cannot be referenced here")))
            }
        })
    }

    fn code(&self, code: &crate::classfile::CodeAttribute) -> Result<CodeNode, UnqualifyError> {
        let mut instructions = Vec::new();
        for insn in Instructions::new(&code.code) {
            let insn = insn.map_err(unsupported)?;
            let node = if let Some((index, _)) = insn.pool_operand() {
                InsnNode::Pool {
                    opcode: insn.opcode,
                    constant: self.constant(index, 0)?,
                    trailing: insn.trailing().to_vec(),
                }
            } else if matches!(insn.opcode, TABLESWITCH | LOOKUPSWITCH) {
                let body = insn.switch_body().expect("switch");
                let pad = insn.bytes.len() - 1 - body.len();
                InsnNode::Switch { opcode: insn.opcode, padding: insn.bytes[1..1 + pad].to_vec(), body: body.to_vec() }
            } else {
                InsnNode::Plain(insn.bytes.to_vec())
            };
            instructions.push(node);
        }
        let handlers = code
            .exception_table
            .iter()
            .map(|h| {
                Ok(HandlerNode {
                    start_pc: h.start_pc,
                    end_pc: h.end_pc,
                    handler_pc: h.handler_pc,
                    catch_type: self.opt_class(h.catch_type)?,
                })
            })
            .collect::<Result<_, UnqualifyError>>()?;
        Ok(CodeNode {
            max_stack: code.max_stack,
            max_locals: code.max_locals,
            instructions,
            handlers,
            attributes: self.attributes(&code.attributes)?,
        })
    }

    fn vtype(&self, v: &VerificationType) -> Result<VType, UnqualifyError> {
        Ok(match v {
            VerificationType::Top => VType::Top,
            VerificationType::Integer => VType::Integer,
            VerificationType::Float => VType::Float,
            VerificationType::Double => VType::Double,
            VerificationType::Long => VType::Long,
            VerificationType::Null => VType::Null,
            VerificationType::UninitializedThis => VType::UninitializedThis,
            VerificationType::Object { class_index } => VType::Object(self.class(*class_index)?),
            VerificationType::Uninitialized { offset } => VType::Uninitialized(*offset),
        })
    }

    fn annotation(&self, a: &Annotation) -> Result<AnnotationNode, UnqualifyError> {
        Ok(AnnotationNode {
            type_descriptor: self.utf8(a.type_index)?,
            elements: a
                .elements
                .iter()
                .map(|(n, v)| Ok((self.utf8(*n)?, self.element(v)?)))
                .collect::<Result<_, UnqualifyError>>()?,
        })
    }

    fn annotations(&self, v: &[Annotation]) -> Result<Vec<AnnotationNode>, UnqualifyError> {
        v.iter().map(|a| self.annotation(a)).collect()
    }

    fn element(&self, e: &ElementValue) -> Result<ElementNode, UnqualifyError> {
        Ok(match e {
            ElementValue::Const { tag, const_value_index } => {
                ElementNode::Const { tag: *tag, value: self.constant(*const_value_index, 0)? }
            }
            ElementValue::Enum { type_name_index, const_name_index } => ElementNode::Enum {
                type_descriptor: self.utf8(*type_name_index)?,
                name: self.utf8(*const_name_index)?,
            },
            ElementValue::Class { class_info_index } => ElementNode::Class(self.utf8(*class_info_index)?),
            ElementValue::Annotation(a) => ElementNode::Annotation(self.annotation(a)?),
            ElementValue::Array(v) => ElementNode::Array(v.iter().map(|e| self.element(e)).collect::<Result<_, _>>()?),
        })
    }

    fn local_vars(&self, v: &[crate::classfile::LocalVariable]) -> Result<Vec<LocalVarNode>, UnqualifyError> {
        v.iter()
            .map(|l| {
                Ok(LocalVarNode {
                    start_pc: l.start_pc,
                    length: l.length,
                    name: self.utf8(l.name_index)?,
                    descriptor: self.utf8(l.descriptor_index)?,
                    index: l.index,
                })
            })
            .collect()
    }

    fn classes(&self, v: &[u16]) -> Result<Vec<String>, UnqualifyError> {
        v.iter().map(|&i| self.class(i)).collect()
    }

    fn attributes(&self, attrs: &[AttributeInfo]) -> Result<Vec<AttrNode>, UnqualifyError> {
        attrs.iter().map(|a| self.attribute(a)).collect()
    }

    fn attribute(&self, info: &AttributeInfo) -> Result<AttrNode, UnqualifyError> {
        use Attribute as A;
        Ok(match &info.attribute {
            A::ConstantValue { value_index } => AttrNode::ConstantValue(self.constant(*value_index, 0)?),
            A::Code(c) => AttrNode::Code(self.code(c)?),
            A::StackMapTable(frames) => AttrNode::StackMapTable(
                frames
                    .iter()
                    .map(|f| {
                        let types = frame_types(f).iter().map(|v| self.vtype(v)).collect::<Result<_, _>>()?;
                        Ok((f.clone(), types))
                    })
                    .collect::<Result<_, UnqualifyError>>()?,
            ),
            A::Exceptions(v) => AttrNode::Exceptions(self.classes(v)?),
            A::InnerClasses(v) => AttrNode::InnerClasses(
                v.iter()
                    .map(|ic| {
                        Ok(InnerClassNode {
                            inner: self.class(ic.inner_class_info_index)?,
                            outer: self.opt_class(ic.outer_class_info_index)?,
                            simple_name: self.opt_utf8(ic.inner_name_index)?,
                            access_flags: ic.inner_class_access_flags,
                        })
                    })
                    .collect::<Result<_, UnqualifyError>>()?,
            ),
            A::EnclosingMethod { class_index, method_index } => AttrNode::EnclosingMethod {
                class: self.class(*class_index)?,
                method: if *method_index == 0 {
                    None
                } else {
                    let (n, d) = self.pool.name_and_type(*method_index).map_err(unsupported)?;
                    Some((n.to_string(), d.to_string()))
                },
            },
            A::Synthetic => AttrNode::Synthetic,
            A::Deprecated => AttrNode::Deprecated,
            A::Signature { signature_index } => AttrNode::Signature(self.utf8(*signature_index)?),
            A::SourceFile { sourcefile_index } => AttrNode::SourceFile(self.utf8(*sourcefile_index)?),
            A::SourceDebugExtension(b) => AttrNode::SourceDebugExtension(b.clone()),
            A::LineNumberTable(v) => AttrNode::LineNumberTable(v.iter().map(|l| (l.start_pc, l.line_number)).collect()),
            A::LocalVariableTable(v) => AttrNode::LocalVariableTable(self.local_vars(v)?),
            A::LocalVariableTypeTable(v) => AttrNode::LocalVariableTypeTable(self.local_vars(v)?),
            A::RuntimeVisibleAnnotations(v) => AttrNode::Annotations { visible: true, annotations: self.annotations(v)? },
            A::RuntimeInvisibleAnnotations(v) => {
                AttrNode::Annotations { visible: false, annotations: self.annotations(v)? }
            }
            A::RuntimeVisibleParameterAnnotations(v) => AttrNode::ParameterAnnotations {
                visible: true,
                parameters: v.iter().map(|p| self.annotations(p)).collect::<Result<_, _>>()?,
            },
            A::RuntimeInvisibleParameterAnnotations(v) => AttrNode::ParameterAnnotations {
                visible: false,
                parameters: v.iter().map(|p| self.annotations(p)).collect::<Result<_, _>>()?,
            },
            A::AnnotationDefault(e) => AttrNode::AnnotationDefault(self.element(e)?),
            A::BootstrapMethods(_) => AttrNode::BootstrapMethods,
            A::MethodParameters(v) => AttrNode::MethodParameters(
                v.iter().map(|p| Ok((self.opt_utf8(p.name_index)?, p.access_flags))).collect::<Result<_, UnqualifyError>>()?,
            ),
            A::NestHost { host_class_index } => AttrNode::NestHost(self.class(*host_class_index)?),
            A::NestMembers(v) => AttrNode::NestMembers(self.classes(v)?),
            A::PermittedSubclasses(v) => AttrNode::PermittedSubclasses(self.classes(v)?),
            A::Record(v) => AttrNode::Record(
                v.iter()
                    .map(|c| {
                        Ok(RecordComponentNode {
                            name: self.utf8(c.name_index)?,
                            descriptor: self.utf8(c.descriptor_index)?,
                            attributes: self.attributes(&c.attributes)?,
                        })
                    })
                    .collect::<Result<_, UnqualifyError>>()?,
            ),
            A::Unknown(bytes) => AttrNode::Opaque { name: self.utf8(info.name_index)?, bytes: bytes.clone() },
        })
    }

    fn member(&self, m: &crate::classfile::MemberInfo) -> Result<MemberNode, UnqualifyError> {
        Ok(MemberNode {
            access_flags: m.access_flags,
            name: self.utf8(m.name_index)?,
            descriptor: self.utf8(m.descriptor_index)?,
            attributes: self.attributes(&m.attributes)?,
        })
    }
}

/// Verification types of a frame in encounter order.
pub(crate) fn frame_types(f: &StackMapFrame) -> Vec<VerificationType> {
    match f {
        StackMapFrame::Same { .. } | StackMapFrame::Chop { .. } | StackMapFrame::SameExtended { .. } => Vec::new(),
        StackMapFrame::SameLocals1StackItem { stack, .. } | StackMapFrame::SameLocals1StackItemExtended { stack, .. } => {
            vec![*stack]
        }
        StackMapFrame::Append { locals, .. } => locals.clone(),
        StackMapFrame::Full { locals, stack, .. } => locals.iter().chain(stack).copied().collect(),
    }
}

impl ClassNode {
    pub fn lift(class: &ClassFile) -> Result<ClassNode, UnqualifyError> {
        let l = Lifter { pool: &class.constant_pool, bootstraps: class.bootstrap_methods() };
        Ok(ClassNode {
            minor_version: class.minor_version,
            major_version: class.major_version,
            access_flags: class.access_flags,
            name: l.class(class.this_class)?,
            super_name: l.opt_class(class.super_class)?,
            interfaces: l.classes(&class.interfaces)?,
            fields: class.fields.iter().map(|m| l.member(m)).collect::<Result<_, _>>()?,
            methods: class.methods.iter().map(|m| l.member(m)).collect::<Result<_, _>>()?,
            attributes: l.attributes(&class.attributes)?,
        })
    }

    /// Rewrites every class name in the node through `m`.
    pub fn remap(&self, m: &impl NameMapper) -> Result<ClassNode, UnqualifyError> {
        Ok(ClassNode {
            minor_version: self.minor_version,
            major_version: self.major_version,
            access_flags: self.access_flags,
            name: m.map_class(&self.name),
            super_name: self.super_name.as_deref().map(|s| m.map_class(s)),
            interfaces: self.interfaces.iter().map(|s| m.map_class(s)).collect(),
            fields: self.fields.iter().map(|f| f.remap(m)).collect::<Result<_, _>>()?,
            methods: self.methods.iter().map(|f| f.remap(m)).collect::<Result<_, _>>()?,
            attributes: remap_attrs(&self.attributes, m)?,
        })
    }

    /// Whether any live reference in the class names a class in `package`
    /// (an internal package path such as `com/example`).
    pub fn references_package(&self, package: &str) -> bool {
        struct Probe<'a>(&'a str, std::cell::Cell<bool>);
        impl NameMapper for Probe<'_> {
            fn map_class(&self, n: &str) -> String {
                if n.rsplit_once('/').is_some_and(|(p, _)| p == self.0) {
                    self.1.set(true);
                }
                n.to_string()
            }
        }
        let probe = Probe(package, std::cell::Cell::new(false));
        let _ = self.remap(&probe);
        probe.1.get()
    }

    /// Constants loaded by the one-byte `ldc`, in encounter order.
    pub(crate) fn ldc_targets(&self) -> Vec<&Constant> {
        let mut out = Vec::new();
        for m in &self.methods {
            for a in &m.attributes {
                if let AttrNode::Code(c) = a {
                    for i in &c.instructions {
                        if let InsnNode::Pool { opcode: LDC, constant, .. } = i {
                            out.push(constant);
                        }
                    }
                }
            }
        }
        out
    }
}

impl MemberNode {
    fn remap(&self, m: &impl NameMapper) -> Result<MemberNode, UnqualifyError> {
        Ok(MemberNode {
            access_flags: self.access_flags,
            name: self.name.clone(),
            descriptor: m.map_descriptor(&self.descriptor)?,
            attributes: remap_attrs(&self.attributes, m)?,
        })
    }
}

fn remap_member_ref(r: &MemberRef, m: &impl NameMapper) -> Result<MemberRef, UnqualifyError> {
    Ok(MemberRef { owner: m.map_type_ref(&r.owner)?, name: r.name.clone(), descriptor: m.map_descriptor(&r.descriptor)? })
}

fn remap_dynamic(d: &DynamicRef, m: &impl NameMapper) -> Result<Box<DynamicRef>, UnqualifyError> {
    Ok(Box::new(DynamicRef {
        bootstrap: Bootstrap {
            handle: remap_constant(&d.bootstrap.handle, m)?,
            arguments: d.bootstrap.arguments.iter().map(|a| remap_constant(a, m)).collect::<Result<_, _>>()?,
        },
        name: d.name.clone(),
        descriptor: m.map_descriptor(&d.descriptor)?,
    }))
}

/// String literals and raw Utf8 values are left untouched.
pub(crate) fn remap_constant(c: &Constant, m: &impl NameMapper) -> Result<Constant, UnqualifyError> {
    Ok(match c {
        Constant::Class(n) => Constant::Class(m.map_type_ref(n)?),
        Constant::Fieldref(r) => Constant::Fieldref(remap_member_ref(r, m)?),
        Constant::Methodref(r) => Constant::Methodref(remap_member_ref(r, m)?),
        Constant::InterfaceMethodref(r) => Constant::InterfaceMethodref(remap_member_ref(r, m)?),
        Constant::MethodHandle { kind, member } => {
            Constant::MethodHandle { kind: *kind, member: Box::new(remap_constant(member, m)?) }
        }
        Constant::MethodType(d) => Constant::MethodType(m.map_descriptor(d)?),
        Constant::Dynamic(d) => Constant::Dynamic(remap_dynamic(d, m)?),
        Constant::InvokeDynamic(d) => Constant::InvokeDynamic(remap_dynamic(d, m)?),
        other => other.clone(),
    })
}

fn remap_annotation(a: &AnnotationNode, m: &impl NameMapper) -> Result<AnnotationNode, UnqualifyError> {
    Ok(AnnotationNode {
        type_descriptor: m.map_descriptor(&a.type_descriptor)?,
        elements: a
            .elements
            .iter()
            .map(|(n, e)| Ok((n.clone(), remap_element(e, m)?)))
            .collect::<Result<_, UnqualifyError>>()?,
    })
}

fn remap_annotations(v: &[AnnotationNode], m: &impl NameMapper) -> Result<Vec<AnnotationNode>, UnqualifyError> {
    v.iter().map(|a| remap_annotation(a, m)).collect()
}

fn remap_element(e: &ElementNode, m: &impl NameMapper) -> Result<ElementNode, UnqualifyError> {
    Ok(match e {
        ElementNode::Const { .. } => e.clone(),
        ElementNode::Enum { type_descriptor, name } => {
            ElementNode::Enum { type_descriptor: m.map_descriptor(type_descriptor)?, name: name.clone() }
        }
        ElementNode::Class(d) => ElementNode::Class(m.map_return_descriptor(d)?),
        ElementNode::Annotation(a) => ElementNode::Annotation(remap_annotation(a, m)?),
        ElementNode::Array(v) => ElementNode::Array(v.iter().map(|e| remap_element(e, m)).collect::<Result<_, _>>()?),
    })
}

fn remap_vtype(v: &VType, m: &impl NameMapper) -> Result<VType, UnqualifyError> {
    Ok(match v {
        VType::Object(n) => VType::Object(m.map_type_ref(n)?),
        other => other.clone(),
    })
}

fn remap_attrs(attrs: &[AttrNode], m: &impl NameMapper) -> Result<Vec<AttrNode>, UnqualifyError> {
    attrs.iter().map(|a| remap_attr(a, m)).collect()
}

fn remap_attr(a: &AttrNode, m: &impl NameMapper) -> Result<AttrNode, UnqualifyError> {
    let classes = |v: &[String]| -> Vec<String> { v.iter().map(|s| m.map_class(s)).collect() };
    let locals = |v: &[LocalVarNode], signature: bool| -> Result<Vec<LocalVarNode>, UnqualifyError> {
        v.iter()
            .map(|l| {
                Ok(LocalVarNode {
                    descriptor: if signature { m.map_signature(&l.descriptor)? } else { m.map_descriptor(&l.descriptor)? },
                    name: l.name.clone(),
                    ..*l
                })
            })
            .collect()
    };
    Ok(match a {
        AttrNode::ConstantValue(c) => AttrNode::ConstantValue(remap_constant(c, m)?),
        AttrNode::Code(c) => AttrNode::Code(CodeNode {
            max_stack: c.max_stack,
            max_locals: c.max_locals,
            instructions: c
                .instructions
                .iter()
                .map(|i| {
                    Ok(match i {
                        InsnNode::Pool { opcode, constant, trailing } => InsnNode::Pool {
                            opcode: *opcode,
                            constant: remap_constant(constant, m)?,
                            trailing: trailing.clone(),
                        },
                        other => other.clone(),
                    })
                })
                .collect::<Result<_, UnqualifyError>>()?,
            handlers: c
                .handlers
                .iter()
                .map(|h| HandlerNode { catch_type: h.catch_type.as_deref().map(|t| m.map_class(t)), ..*h })
                .collect(),
            attributes: remap_attrs(&c.attributes, m)?,
        }),
        AttrNode::StackMapTable(frames) => AttrNode::StackMapTable(
            frames
                .iter()
                .map(|(f, types)| Ok((f.clone(), types.iter().map(|v| remap_vtype(v, m)).collect::<Result<_, _>>()?)))
                .collect::<Result<_, UnqualifyError>>()?,
        ),
        AttrNode::Exceptions(v) => AttrNode::Exceptions(classes(v)),
        AttrNode::InnerClasses(v) => AttrNode::InnerClasses(
            v.iter()
                .map(|ic| InnerClassNode {
                    inner: m.map_class(&ic.inner),
                    outer: ic.outer.as_deref().map(|o| m.map_class(o)),
                    simple_name: ic.simple_name.clone(),
                    access_flags: ic.access_flags,
                })
                .collect(),
        ),
        AttrNode::EnclosingMethod { class, method } => AttrNode::EnclosingMethod {
            class: m.map_class(class),
            method: match method {
                Some((n, d)) => Some((n.clone(), m.map_descriptor(d)?)),
                None => None,
            },
        },
        AttrNode::Signature(s) => AttrNode::Signature(m.map_signature(s)?),
        AttrNode::LocalVariableTable(v) => AttrNode::LocalVariableTable(locals(v, false)?),
        AttrNode::LocalVariableTypeTable(v) => AttrNode::LocalVariableTypeTable(locals(v, true)?),
        AttrNode::Annotations { visible, annotations } => {
            AttrNode::Annotations { visible: *visible, annotations: remap_annotations(annotations, m)? }
        }
        AttrNode::ParameterAnnotations { visible, parameters } => AttrNode::ParameterAnnotations {
            visible: *visible,
            parameters: parameters.iter().map(|p| remap_annotations(p, m)).collect::<Result<_, _>>()?,
        },
        AttrNode::AnnotationDefault(e) => AttrNode::AnnotationDefault(remap_element(e, m)?),
        AttrNode::NestHost(h) => AttrNode::NestHost(m.map_class(h)),
        AttrNode::NestMembers(v) => AttrNode::NestMembers(classes(v)),
        AttrNode::PermittedSubclasses(v) => AttrNode::PermittedSubclasses(classes(v)),
        AttrNode::Record(v) => AttrNode::Record(
            v.iter()
                .map(|c| {
                    Ok(RecordComponentNode {
                        name: c.name.clone(),
                        descriptor: m.map_descriptor(&c.descriptor)?,
                        attributes: remap_attrs(&c.attributes, m)?,
                    })
                })
                .collect::<Result<_, UnqualifyError>>()?,
        ),
        AttrNode::Synthetic
        | AttrNode::Deprecated
        | AttrNode::SourceFile(_)
        | AttrNode::SourceDebugExtension(_)
        | AttrNode::LineNumberTable(_)
        | AttrNode::BootstrapMethods
        | AttrNode::MethodParameters(_)
        | AttrNode::Opaque { .. } => a.clone(),
    })
}
