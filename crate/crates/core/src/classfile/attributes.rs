//! Attribute structures at constant-pool-index level.
//!
//! Standard attributes are decoded into typed variants; anything else is
//! kept as an opaque [`Attribute::Unknown`] blob so output stays lossless.

use super::bytes::{Reader, Writer};
use super::constant_pool::{ConstantPool, ConstantTag};
use super::MalformedClassFile;

const MAX_NESTING: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeInfo {
    pub name_index: u16,
    pub attribute: Attribute,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Attribute {
    ConstantValue { value_index: u16 },
    Code(CodeAttribute),
    StackMapTable(Vec<StackMapFrame>),
    Exceptions(Vec<u16>),
    InnerClasses(Vec<InnerClass>),
    EnclosingMethod { class_index: u16, method_index: u16 },
    Synthetic,
    Deprecated,
    Signature { signature_index: u16 },
    SourceFile { sourcefile_index: u16 },
    SourceDebugExtension(Vec<u8>),
    LineNumberTable(Vec<LineNumber>),
    LocalVariableTable(Vec<LocalVariable>),
    LocalVariableTypeTable(Vec<LocalVariable>),
    RuntimeVisibleAnnotations(Vec<Annotation>),
    RuntimeInvisibleAnnotations(Vec<Annotation>),
    RuntimeVisibleParameterAnnotations(Vec<Vec<Annotation>>),
    RuntimeInvisibleParameterAnnotations(Vec<Vec<Annotation>>),
    AnnotationDefault(ElementValue),
    BootstrapMethods(Vec<BootstrapMethod>),
    MethodParameters(Vec<MethodParameter>),
    NestHost { host_class_index: u16 },
    NestMembers(Vec<u16>),
    PermittedSubclasses(Vec<u16>),
    Record(Vec<RecordComponent>),
    Unknown(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeAttribute {
    pub max_stack: u16,
    pub max_locals: u16,
    pub code: Vec<u8>,
    pub exception_table: Vec<ExceptionHandler>,
    pub attributes: Vec<AttributeInfo>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExceptionHandler {
    pub start_pc: u16,
    pub end_pc: u16,
    pub handler_pc: u16,
    /// 0 for a catch-all (`finally`) handler.
    pub catch_type: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StackMapFrame {
    Same { frame_type: u8 },
    SameLocals1StackItem { frame_type: u8, stack: VerificationType },
    SameLocals1StackItemExtended { offset_delta: u16, stack: VerificationType },
    Chop { frame_type: u8, offset_delta: u16 },
    SameExtended { offset_delta: u16 },
    Append { frame_type: u8, offset_delta: u16, locals: Vec<VerificationType> },
    Full { offset_delta: u16, locals: Vec<VerificationType>, stack: Vec<VerificationType> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerificationType {
    Top,
    Integer,
    Float,
    Double,
    Long,
    Null,
    UninitializedThis,
    Object { class_index: u16 },
    Uninitialized { offset: u16 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InnerClass {
    pub inner_class_info_index: u16,
    pub outer_class_info_index: u16,
    pub inner_name_index: u16,
    pub inner_class_access_flags: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineNumber {
    pub start_pc: u16,
    pub line_number: u16,
}

/// Entry of `LocalVariableTable` (descriptor) or `LocalVariableTypeTable`
/// (signature); both share one layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalVariable {
    pub start_pc: u16,
    pub length: u16,
    pub name_index: u16,
    pub descriptor_index: u16,
    pub index: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub type_index: u16,
    pub elements: Vec<(u16, ElementValue)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElementValue {
    /// Tags `B C D F I J S Z s`.
    Const { tag: u8, const_value_index: u16 },
    Enum { type_name_index: u16, const_name_index: u16 },
    Class { class_info_index: u16 },
    Annotation(Annotation),
    Array(Vec<ElementValue>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BootstrapMethod {
    pub method_ref: u16,
    pub arguments: Vec<u16>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MethodParameter {
    pub name_index: u16,
    pub access_flags: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordComponent {
    pub name_index: u16,
    pub descriptor_index: u16,
    pub attributes: Vec<AttributeInfo>,
}

impl AttributeInfo {
    pub fn name<'a>(&self, pool: &'a ConstantPool) -> Result<&'a str, MalformedClassFile> {
        pool.utf8(self.name_index)
    }
}

pub(crate) fn read_attributes(
    r: &mut Reader<'_>,
    pool: &ConstantPool,
    depth: usize,
) -> Result<Vec<AttributeInfo>, MalformedClassFile> {
    let count = r.u16()?;
    let mut out = Vec::with_capacity(count.min(64) as usize);
    for _ in 0..count {
        out.push(read_attribute(r, pool, depth)?);
    }
    Ok(out)
}

fn read_attribute(
    r: &mut Reader<'_>,
    pool: &ConstantPool,
    depth: usize,
) -> Result<AttributeInfo, MalformedClassFile> {
    let name_index = r.u16()?;
    let name = pool.utf8(name_index)?;
    let len = r.u32()? as usize;
    let body = r.take(len)?;
    let mut br = Reader::new(body);
    let attribute = parse_body(name, &mut br, pool, depth).map_err(|e| match e {
        MalformedClassFile::Truncated { .. } => MalformedClassFile::Attribute {
            name: name.to_string(),
            reason: "truncated body".into(),
        },
        other => other,
    })?;
    if br.remaining() != 0 {
        return Err(MalformedClassFile::Attribute {
            name: name.to_string(),
            reason: format!("{} unread bytes", br.remaining()),
        });
    }
    Ok(AttributeInfo { name_index, attribute })
}

fn u16_list(r: &mut Reader<'_>) -> Result<Vec<u16>, MalformedClassFile> {
    let n = r.u16()?;
    (0..n).map(|_| r.u16()).collect()
}

fn parse_body(
    name: &str,
    r: &mut Reader<'_>,
    pool: &ConstantPool,
    depth: usize,
) -> Result<Attribute, MalformedClassFile> {
    use Attribute as A;
    if depth > MAX_NESTING {
        return Err(MalformedClassFile::Attribute { name: name.into(), reason: "nested too deeply".into() });
    }
    Ok(match name {
        "ConstantValue" => {
            let value_index = r.u16()?;
            let e = pool.get(value_index)?;
            if !matches!(
                e.tag(),
                Some(ConstantTag::Integer | ConstantTag::Float | ConstantTag::Long | ConstantTag::Double | ConstantTag::String)
            ) {
                return Err(MalformedClassFile::WrongTag {
                    index: value_index,
                    expected: "constant value",
                    found: e.tag().map_or("unusable slot", ConstantTag::name),
                });
            }
            A::ConstantValue { value_index }
        }
        "Code" => {
            let max_stack = r.u16()?;
            let max_locals = r.u16()?;
            let code_len = r.u32()? as usize;
            let code = r.take(code_len)?.to_vec();
            let n = r.u16()?;
            let mut exception_table = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let h = ExceptionHandler {
                    start_pc: r.u16()?,
                    end_pc: r.u16()?,
                    handler_pc: r.u16()?,
                    catch_type: r.u16()?,
                };
                pool.check_optional(h.catch_type, ConstantTag::Class)?;
                exception_table.push(h);
            }
            let attributes = read_attributes(r, pool, depth + 1)?;
            A::Code(CodeAttribute { max_stack, max_locals, code, exception_table, attributes })
        }
        "StackMapTable" => {
            let n = r.u16()?;
            let mut frames = Vec::with_capacity(n.min(1024) as usize);
            for _ in 0..n {
                frames.push(read_frame(r, pool)?);
            }
            A::StackMapTable(frames)
        }
        "Exceptions" => {
            let v = u16_list(r)?;
            for &i in &v {
                pool.check(i, ConstantTag::Class)?;
            }
            A::Exceptions(v)
        }
        "InnerClasses" => {
            let n = r.u16()?;
            let mut v = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let ic = InnerClass {
                    inner_class_info_index: r.u16()?,
                    outer_class_info_index: r.u16()?,
                    inner_name_index: r.u16()?,
                    inner_class_access_flags: r.u16()?,
                };
                pool.check(ic.inner_class_info_index, ConstantTag::Class)?;
                pool.check_optional(ic.outer_class_info_index, ConstantTag::Class)?;
                pool.check_optional(ic.inner_name_index, ConstantTag::Utf8)?;
                v.push(ic);
            }
            A::InnerClasses(v)
        }
        "EnclosingMethod" => {
            let class_index = r.u16()?;
            let method_index = r.u16()?;
            pool.check(class_index, ConstantTag::Class)?;
            pool.check_optional(method_index, ConstantTag::NameAndType)?;
            A::EnclosingMethod { class_index, method_index }
        }
        "Synthetic" => A::Synthetic,
        "Deprecated" => A::Deprecated,
        "Signature" => {
            let signature_index = r.u16()?;
            pool.check(signature_index, ConstantTag::Utf8)?;
            A::Signature { signature_index }
        }
        "SourceFile" => {
            let sourcefile_index = r.u16()?;
            pool.check(sourcefile_index, ConstantTag::Utf8)?;
            A::SourceFile { sourcefile_index }
        }
        "SourceDebugExtension" => A::SourceDebugExtension(r.take(r.remaining())?.to_vec()),
        "LineNumberTable" => {
            let n = r.u16()?;
            let mut v = Vec::with_capacity(n as usize);
            for _ in 0..n {
                v.push(LineNumber { start_pc: r.u16()?, line_number: r.u16()? });
            }
            A::LineNumberTable(v)
        }
        "LocalVariableTable" | "LocalVariableTypeTable" => {
            let n = r.u16()?;
            let mut v = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let lv = LocalVariable {
                    start_pc: r.u16()?,
                    length: r.u16()?,
                    name_index: r.u16()?,
                    descriptor_index: r.u16()?,
                    index: r.u16()?,
                };
                pool.check(lv.name_index, ConstantTag::Utf8)?;
                pool.check(lv.descriptor_index, ConstantTag::Utf8)?;
                v.push(lv);
            }
            if name == "LocalVariableTable" {
                A::LocalVariableTable(v)
            } else {
                A::LocalVariableTypeTable(v)
            }
        }
        "RuntimeVisibleAnnotations" => A::RuntimeVisibleAnnotations(read_annotations(r, pool, depth)?),
        "RuntimeInvisibleAnnotations" => A::RuntimeInvisibleAnnotations(read_annotations(r, pool, depth)?),
        "RuntimeVisibleParameterAnnotations" => {
            A::RuntimeVisibleParameterAnnotations(read_parameter_annotations(r, pool, depth)?)
        }
        "RuntimeInvisibleParameterAnnotations" => {
            A::RuntimeInvisibleParameterAnnotations(read_parameter_annotations(r, pool, depth)?)
        }
        "AnnotationDefault" => A::AnnotationDefault(read_element_value(r, pool, depth)?),
        "BootstrapMethods" => {
            let n = r.u16()?;
            let mut v = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let method_ref = r.u16()?;
                pool.check(method_ref, ConstantTag::MethodHandle)?;
                let arguments = u16_list(r)?;
                for &a in &arguments {
                    pool.check_loadable(a)?;
                }
                v.push(BootstrapMethod { method_ref, arguments });
            }
            A::BootstrapMethods(v)
        }
        "MethodParameters" => {
            let n = r.u8()?;
            let mut v = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let p = MethodParameter { name_index: r.u16()?, access_flags: r.u16()? };
                pool.check_optional(p.name_index, ConstantTag::Utf8)?;
                v.push(p);
            }
            A::MethodParameters(v)
        }
        "NestHost" => {
            let host_class_index = r.u16()?;
            pool.check(host_class_index, ConstantTag::Class)?;
            A::NestHost { host_class_index }
        }
        "NestMembers" | "PermittedSubclasses" => {
            let v = u16_list(r)?;
            for &i in &v {
                pool.check(i, ConstantTag::Class)?;
            }
            if name == "NestMembers" {
                A::NestMembers(v)
            } else {
                A::PermittedSubclasses(v)
            }
        }
        "Record" => {
            let n = r.u16()?;
            let mut v = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let name_index = r.u16()?;
                let descriptor_index = r.u16()?;
                pool.check(name_index, ConstantTag::Utf8)?;
                pool.check(descriptor_index, ConstantTag::Utf8)?;
                let attributes = read_attributes(r, pool, depth + 1)?;
                v.push(RecordComponent { name_index, descriptor_index, attributes });
            }
            A::Record(v)
        }
        _ => A::Unknown(r.take(r.remaining())?.to_vec()),
    })
}

fn read_verification_type(r: &mut Reader<'_>, pool: &ConstantPool) -> Result<VerificationType, MalformedClassFile> {
    use VerificationType as V;
    Ok(match r.u8()? {
        0 => V::Top,
        1 => V::Integer,
        2 => V::Float,
        3 => V::Double,
        4 => V::Long,
        5 => V::Null,
        6 => V::UninitializedThis,
        7 => {
            let class_index = r.u16()?;
            pool.check(class_index, ConstantTag::Class)?;
            V::Object { class_index }
        }
        8 => V::Uninitialized { offset: r.u16()? },
        t => {
            return Err(MalformedClassFile::Attribute {
                name: "StackMapTable".into(),
                reason: format!("verification type tag {t}"),
            })
        }
    })
}

fn read_frame(r: &mut Reader<'_>, pool: &ConstantPool) -> Result<StackMapFrame, MalformedClassFile> {
    use StackMapFrame as F;
    let frame_type = r.u8()?;
    Ok(match frame_type {
        0..=63 => F::Same { frame_type },
        64..=127 => F::SameLocals1StackItem { frame_type, stack: read_verification_type(r, pool)? },
        247 => F::SameLocals1StackItemExtended { offset_delta: r.u16()?, stack: read_verification_type(r, pool)? },
        248..=250 => F::Chop { frame_type, offset_delta: r.u16()? },
        251 => F::SameExtended { offset_delta: r.u16()? },
        252..=254 => {
            let offset_delta = r.u16()?;
            let locals = (0..frame_type - 251)
                .map(|_| read_verification_type(r, pool))
                .collect::<Result<_, _>>()?;
            F::Append { frame_type, offset_delta, locals }
        }
        255 => {
            let offset_delta = r.u16()?;
            let nl = r.u16()?;
            let locals = (0..nl).map(|_| read_verification_type(r, pool)).collect::<Result<_, _>>()?;
            let ns = r.u16()?;
            let stack = (0..ns).map(|_| read_verification_type(r, pool)).collect::<Result<_, _>>()?;
            F::Full { offset_delta, locals, stack }
        }
        t => {
            return Err(MalformedClassFile::Attribute {
                name: "StackMapTable".into(),
                reason: format!("reserved frame type {t}"),
            })
        }
    })
}

fn read_annotations(r: &mut Reader<'_>, pool: &ConstantPool, depth: usize) -> Result<Vec<Annotation>, MalformedClassFile> {
    let n = r.u16()?;
    (0..n).map(|_| read_annotation(r, pool, depth)).collect()
}

fn read_parameter_annotations(
    r: &mut Reader<'_>,
    pool: &ConstantPool,
    depth: usize,
) -> Result<Vec<Vec<Annotation>>, MalformedClassFile> {
    let n = r.u8()?;
    (0..n).map(|_| read_annotations(r, pool, depth)).collect()
}

fn read_annotation(r: &mut Reader<'_>, pool: &ConstantPool, depth: usize) -> Result<Annotation, MalformedClassFile> {
    if depth > MAX_NESTING {
        return Err(MalformedClassFile::Attribute { name: "annotation".into(), reason: "nested too deeply".into() });
    }
    let type_index = r.u16()?;
    pool.check(type_index, ConstantTag::Utf8)?;
    let n = r.u16()?;
    let mut elements = Vec::with_capacity(n.min(64) as usize);
    for _ in 0..n {
        let name = r.u16()?;
        pool.check(name, ConstantTag::Utf8)?;
        elements.push((name, read_element_value(r, pool, depth + 1)?));
    }
    Ok(Annotation { type_index, elements })
}

fn read_element_value(r: &mut Reader<'_>, pool: &ConstantPool, depth: usize) -> Result<ElementValue, MalformedClassFile> {
    if depth > MAX_NESTING {
        return Err(MalformedClassFile::Attribute { name: "annotation".into(), reason: "nested too deeply".into() });
    }
    let tag = r.u8()?;
    Ok(match tag {
        b'B' | b'C' | b'I' | b'S' | b'Z' | b'D' | b'F' | b'J' | b's' => {
            let const_value_index = r.u16()?;
            let want = match tag {
                b'D' => ConstantTag::Double,
                b'F' => ConstantTag::Float,
                b'J' => ConstantTag::Long,
                b's' => ConstantTag::Utf8,
                _ => ConstantTag::Integer,
            };
            pool.check(const_value_index, want)?;
            ElementValue::Const { tag, const_value_index }
        }
        b'e' => {
            let type_name_index = r.u16()?;
            let const_name_index = r.u16()?;
            pool.check(type_name_index, ConstantTag::Utf8)?;
            pool.check(const_name_index, ConstantTag::Utf8)?;
            ElementValue::Enum { type_name_index, const_name_index }
        }
        b'c' => {
            let class_info_index = r.u16()?;
            pool.check(class_info_index, ConstantTag::Utf8)?;
            ElementValue::Class { class_info_index }
        }
        b'@' => ElementValue::Annotation(read_annotation(r, pool, depth + 1)?),
        b'[' => {
            let n = r.u16()?;
            let mut v = Vec::with_capacity(n.min(64) as usize);
            for _ in 0..n {
                v.push(read_element_value(r, pool, depth + 1)?);
            }
            ElementValue::Array(v)
        }
        t => {
            return Err(MalformedClassFile::Attribute {
                name: "annotation".into(),
                reason: format!("element value tag {t:#x}"),
            })
        }
    })
}

pub(crate) fn write_attributes(w: &mut Writer, attrs: &[AttributeInfo]) {
    w.u16(attrs.len() as u16);
    for a in attrs {
        w.u16(a.name_index);
        let mut body = Writer::default();
        write_body(&mut body, &a.attribute);
        w.u32(body.len() as u32);
        w.bytes(&body.buf);
    }
}

fn write_body(w: &mut Writer, a: &Attribute) {
    use Attribute as A;
    match a {
        A::ConstantValue { value_index: i }
        | A::Signature { signature_index: i }
        | A::SourceFile { sourcefile_index: i }
        | A::NestHost { host_class_index: i } => w.u16(*i),
        A::Code(c) => {
            w.u16(c.max_stack);
            w.u16(c.max_locals);
            w.u32(c.code.len() as u32);
            w.bytes(&c.code);
            w.u16(c.exception_table.len() as u16);
            for h in &c.exception_table {
                w.u16(h.start_pc);
                w.u16(h.end_pc);
                w.u16(h.handler_pc);
                w.u16(h.catch_type);
            }
            write_attributes(w, &c.attributes);
        }
        A::StackMapTable(frames) => {
            w.u16(frames.len() as u16);
            for f in frames {
                write_frame(w, f);
            }
        }
        A::Exceptions(v) | A::NestMembers(v) | A::PermittedSubclasses(v) => {
            w.u16(v.len() as u16);
            v.iter().for_each(|i| w.u16(*i));
        }
        A::InnerClasses(v) => {
            w.u16(v.len() as u16);
            for ic in v {
                w.u16(ic.inner_class_info_index);
                w.u16(ic.outer_class_info_index);
                w.u16(ic.inner_name_index);
                w.u16(ic.inner_class_access_flags);
            }
        }
        A::EnclosingMethod { class_index, method_index } => {
            w.u16(*class_index);
            w.u16(*method_index);
        }
        A::Synthetic | A::Deprecated => {}
        A::SourceDebugExtension(b) | A::Unknown(b) => w.bytes(b),
        A::LineNumberTable(v) => {
            w.u16(v.len() as u16);
            for l in v {
                w.u16(l.start_pc);
                w.u16(l.line_number);
            }
        }
        A::LocalVariableTable(v) | A::LocalVariableTypeTable(v) => {
            w.u16(v.len() as u16);
            for l in v {
                w.u16(l.start_pc);
                w.u16(l.length);
                w.u16(l.name_index);
                w.u16(l.descriptor_index);
                w.u16(l.index);
            }
        }
        A::RuntimeVisibleAnnotations(v) | A::RuntimeInvisibleAnnotations(v) => write_annotations(w, v),
        A::RuntimeVisibleParameterAnnotations(v) | A::RuntimeInvisibleParameterAnnotations(v) => {
            w.u8(v.len() as u8);
            v.iter().for_each(|p| write_annotations(w, p));
        }
        A::AnnotationDefault(e) => write_element_value(w, e),
        A::BootstrapMethods(v) => {
            w.u16(v.len() as u16);
            for b in v {
                w.u16(b.method_ref);
                w.u16(b.arguments.len() as u16);
                b.arguments.iter().for_each(|a| w.u16(*a));
            }
        }
        A::MethodParameters(v) => {
            w.u8(v.len() as u8);
            for p in v {
                w.u16(p.name_index);
                w.u16(p.access_flags);
            }
        }
        A::Record(v) => {
            w.u16(v.len() as u16);
            for c in v {
                w.u16(c.name_index);
                w.u16(c.descriptor_index);
                write_attributes(w, &c.attributes);
            }
        }
    }
}

fn write_verification_type(w: &mut Writer, v: &VerificationType) {
    use VerificationType as V;
    match v {
        V::Top => w.u8(0),
        V::Integer => w.u8(1),
        V::Float => w.u8(2),
        V::Double => w.u8(3),
        V::Long => w.u8(4),
        V::Null => w.u8(5),
        V::UninitializedThis => w.u8(6),
        V::Object { class_index } => {
            w.u8(7);
            w.u16(*class_index);
        }
        V::Uninitialized { offset } => {
            w.u8(8);
            w.u16(*offset);
        }
    }
}

fn write_frame(w: &mut Writer, f: &StackMapFrame) {
    use StackMapFrame as F;
    match f {
        F::Same { frame_type } => w.u8(*frame_type),
        F::SameLocals1StackItem { frame_type, stack } => {
            w.u8(*frame_type);
            write_verification_type(w, stack);
        }
        F::SameLocals1StackItemExtended { offset_delta, stack } => {
            w.u8(247);
            w.u16(*offset_delta);
            write_verification_type(w, stack);
        }
        F::Chop { frame_type, offset_delta } => {
            w.u8(*frame_type);
            w.u16(*offset_delta);
        }
        F::SameExtended { offset_delta } => {
            w.u8(251);
            w.u16(*offset_delta);
        }
        F::Append { frame_type, offset_delta, locals } => {
            w.u8(*frame_type);
            w.u16(*offset_delta);
            locals.iter().for_each(|v| write_verification_type(w, v));
        }
        F::Full { offset_delta, locals, stack } => {
            w.u8(255);
            w.u16(*offset_delta);
            w.u16(locals.len() as u16);
            locals.iter().for_each(|v| write_verification_type(w, v));
            w.u16(stack.len() as u16);
            stack.iter().for_each(|v| write_verification_type(w, v));
        }
    }
}

fn write_annotations(w: &mut Writer, v: &[Annotation]) {
    w.u16(v.len() as u16);
    v.iter().for_each(|a| write_annotation(w, a));
}

fn write_annotation(w: &mut Writer, a: &Annotation) {
    w.u16(a.type_index);
    w.u16(a.elements.len() as u16);
    for (name, value) in &a.elements {
        w.u16(*name);
        write_element_value(w, value);
    }
}

fn write_element_value(w: &mut Writer, e: &ElementValue) {
    match e {
        ElementValue::Const { tag, const_value_index } => {
            w.u8(*tag);
            w.u16(*const_value_index);
        }
        ElementValue::Enum { type_name_index, const_name_index } => {
            w.u8(b'e');
            w.u16(*type_name_index);
            w.u16(*const_name_index);
        }
        ElementValue::Class { class_info_index } => {
            w.u8(b'c');
            w.u16(*class_info_index);
        }
        ElementValue::Annotation(a) => {
            w.u8(b'@');
            write_annotation(w, a);
        }
        ElementValue::Array(v) => {
            w.u8(b'[');
            w.u16(v.len() as u16);
            v.iter().for_each(|e| write_element_value(w, e));
        }
    }
}
