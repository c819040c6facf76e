//! Package relocation in the manner of shading tools.
//!
//! A relocated class is reassembled with a fresh constant pool built in
//! first-use order with deduplication, so its layout differs from the input
//! even when no rule applies. Attributes the parser does not understand are
//! dropped, as their contents may hold pool indexes that cannot be remapped.

use std::collections::{HashMap, HashSet};
use std::io::{Cursor, Read, Write};

use crate::classfile::code::LDC;
use crate::classfile::{
    parse_class, Annotation, Attribute, AttributeInfo, BootstrapMethod, ClassFile, CodeAttribute, ConstantPool,
    ConstantPoolEntry, ElementValue, ExceptionHandler, InnerClass, LineNumber, LocalVariable, MemberInfo,
    MethodParameter, RecordComponent, StackMapFrame, Utf8Text, VerificationType,
};

use super::node::{
    AnnotationNode, AttrNode, Bootstrap, ClassNode, CodeNode, Constant, ElementNode, InsnNode, LocalVarNode,
    MemberNode, MemberRef, RecordComponentNode, VType,
};
use super::{NameMapper, UnqualifyError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelocationRule {
    /// Internal package prefix, e.g. `com/example`.
    pub from_prefix: String,
    /// Replacement prefix; empty moves classes into the default package.
    pub to_prefix: String,
}

fn valid_package(p: &str) -> bool {
    p.split('/').all(|seg| !seg.is_empty() && !seg.contains(['.', ';', '[', '<', '>', ':']))
}

impl RelocationRule {
    pub fn new(from_prefix: &str, to_prefix: &str) -> Result<Self, UnqualifyError> {
        if from_prefix.is_empty() || !valid_package(from_prefix) {
            return Err(UnqualifyError::InvalidRule(format!("from prefix {from_prefix:?}")));
        }
        if !to_prefix.is_empty() && !valid_package(to_prefix) {
            return Err(UnqualifyError::InvalidRule(format!("to prefix {to_prefix:?}")));
        }
        Ok(RelocationRule { from_prefix: from_prefix.to_string(), to_prefix: to_prefix.to_string() })
    }

    fn apply(&self, name: &str) -> Option<String> {
        let rest = name.strip_prefix(self.from_prefix.as_str())?.strip_prefix('/')?;
        Some(if self.to_prefix.is_empty() { rest.to_string() } else { format!("{}/{rest}", self.to_prefix) })
    }
}

/// Rejects rule sets in which one `from_prefix` equals or contains another,
/// since the outcome would depend on rule order.
pub fn validate_rules(rules: &[RelocationRule]) -> Result<(), UnqualifyError> {
    for (i, a) in rules.iter().enumerate() {
        for b in &rules[i + 1..] {
            let nested = |x: &str, y: &str| x == y || x.strip_prefix(y).is_some_and(|r| r.starts_with('/'));
            if nested(&a.from_prefix, &b.from_prefix) || nested(&b.from_prefix, &a.from_prefix) {
                return Err(UnqualifyError::RelocationConflict {
                    first: a.from_prefix.clone(),
                    second: b.from_prefix.clone(),
                });
            }
        }
    }
    Ok(())
}

struct Relocator<'a>(&'a [RelocationRule]);

impl NameMapper for Relocator<'_> {
    fn map_class(&self, name: &str) -> String {
        relocate_class_name(name, self.0)
    }
}

/// Applies the first matching rule to an internal class name.
pub fn relocate_class_name(name: &str, rules: &[RelocationRule]) -> String {
    rules.iter().find_map(|r| r.apply(name)).unwrap_or_else(|| name.to_string())
}

/// Rewrites package prefixes throughout `class` and reassembles it.
pub fn relocate(class: &ClassFile, rules: &[RelocationRule]) -> Result<ClassFile, UnqualifyError> {
    validate_rules(rules)?;
    let node = ClassNode::lift(class)?.remap(&Relocator(rules))?;
    let bytes = assemble(&node)?;
    Ok(parse_class(&bytes)?)
}

/// Relocates every class in a ZIP archive, renaming entries to match their
/// new class names. Other entries, `module-info.class` and classes that fail
/// to parse are copied unchanged.
pub fn relocate_archive(archive: &[u8], rules: &[RelocationRule]) -> Result<Vec<u8>, UnqualifyError> {
    validate_rules(rules)?;
    let zerr = |e: zip::result::ZipError| UnqualifyError::Archive(e.to_string());
    let mut zin = zip::ZipArchive::new(Cursor::new(archive)).map_err(zerr)?;
    let mut zout = zip::ZipWriter::new(Cursor::new(Vec::new()));
    let options = zip::write::SimpleFileOptions::default()
        .compression_method(zip::CompressionMethod::Deflated)
        .last_modified_time(zip::DateTime::default());
    for i in 0..zin.len() {
        let mut entry = zin.by_index(i).map_err(zerr)?;
        let path = entry.name().to_string();
        if entry.is_dir() {
            zout.add_directory(path.as_str(), options).map_err(zerr)?;
            continue;
        }
        let mut bytes = Vec::new();
        entry.read_to_end(&mut bytes).map_err(|e| UnqualifyError::Archive(e.to_string()))?;
        let (path, bytes) = match relocate_entry(&path, &bytes, rules) {
            Some(Ok(moved)) => moved,
            Some(Err(e)) => return Err(e),
            None => (path, bytes),
        };
        zout.start_file(path.as_str(), options).map_err(zerr)?;
        zout.write_all(&bytes).map_err(|e| UnqualifyError::Archive(e.to_string()))?;
    }
    Ok(zout.finish().map_err(zerr)?.into_inner())
}

fn relocate_entry(
    path: &str,
    bytes: &[u8],
    rules: &[RelocationRule],
) -> Option<Result<(String, Vec<u8>), UnqualifyError>> {
    if !path.ends_with(".class") || path.ends_with("module-info.class") {
        return None;
    }
    let class = parse_class(bytes).ok()?;
    let old = class.this_class_name().to_string();
    let relocated = match relocate(&class, rules) {
        Ok(c) => c,
        Err(e) => return Some(Err(e)),
    };
    let new_path = match path.strip_suffix(&format!("{old}.class")) {
        Some(prefix) => format!("{prefix}{}.class", relocated.this_class_name()),
        None => path.to_string(),
    };
    Some(Ok((new_path, relocated.raw_bytes)))
}

struct PoolBuilder {
    entries: Vec<ConstantPoolEntry>,
    dedup: HashMap<ConstantPoolEntry, u16>,
    /// Slots set aside for one-byte `ldc` operands, filled on first use.
    reserved: HashMap<Constant, u16>,
    filled: HashSet<u16>,
    bootstraps: Vec<BootstrapMethod>,
    bootstrap_ids: HashMap<(u16, Vec<u16>), u16>,
}

fn too_large(what: &str) -> UnqualifyError {
    UnqualifyError::UnsupportedConstruct(format!("{what} exceeds class-file limits"))
}

impl PoolBuilder {
    fn new() -> Self {
        PoolBuilder {
            entries: vec![ConstantPoolEntry::Unusable],
            dedup: HashMap::new(),
            reserved: HashMap::new(),
            filled: HashSet::new(),
            bootstraps: Vec::new(),
            bootstrap_ids: HashMap::new(),
        }
    }

    fn next_index(&self, width: usize) -> Result<u16, UnqualifyError> {
        if self.entries.len() + width > u16::MAX as usize {
            return Err(too_large("constant pool"));
        }
        Ok(self.entries.len() as u16)
    }

    fn reserve(&mut self, c: &Constant) -> Result<(), UnqualifyError> {
        if !self.reserved.contains_key(c) {
            let index = self.next_index(1)?;
            self.entries.push(ConstantPoolEntry::Unusable);
            self.reserved.insert(c.clone(), index);
        }
        Ok(())
    }

    fn push(&mut self, e: ConstantPoolEntry) -> Result<u16, UnqualifyError> {
        if let Some(&i) = self.dedup.get(&e) {
            return Ok(i);
        }
        let wide = e.width() == 2;
        let index = self.next_index(if wide { 2 } else { 1 })?;
        self.entries.push(e.clone());
        if wide {
            self.entries.push(ConstantPoolEntry::Unusable);
        }
        self.dedup.insert(e, index);
        Ok(index)
    }

    fn utf8(&mut self, s: &str) -> Result<u16, UnqualifyError> {
        self.push(ConstantPoolEntry::Utf8(Utf8Text::new(s)))
    }

    fn opt_utf8(&mut self, s: Option<&str>) -> Result<u16, UnqualifyError> {
        s.map_or(Ok(0), |s| self.utf8(s))
    }

    fn class(&mut self, name: &str) -> Result<u16, UnqualifyError> {
        self.constant(&Constant::Class(name.to_string()))
    }

    fn opt_class(&mut self, name: Option<&str>) -> Result<u16, UnqualifyError> {
        name.map_or(Ok(0), |n| self.class(n))
    }

    fn name_and_type(&mut self, name: &str, descriptor: &str) -> Result<u16, UnqualifyError> {
        let name_index = self.utf8(name)?;
        let descriptor_index = self.utf8(descriptor)?;
        self.push(ConstantPoolEntry::NameAndType { name_index, descriptor_index })
    }

    fn member(&mut self, r: &MemberRef) -> Result<(u16, u16), UnqualifyError> {
        Ok((self.class(&r.owner)?, self.name_and_type(&r.name, &r.descriptor)?))
    }

    fn bootstrap(&mut self, b: &Bootstrap) -> Result<u16, UnqualifyError> {
        let method_ref = self.constant(&b.handle)?;
        let arguments = b.arguments.iter().map(|a| self.constant(a)).collect::<Result<Vec<_>, _>>()?;
        let key = (method_ref, arguments);
        if let Some(&i) = self.bootstrap_ids.get(&key) {
            return Ok(i);
        }
        let index = u16::try_from(self.bootstraps.len()).map_err(|_| too_large("bootstrap method table"))?;
        self.bootstraps.push(BootstrapMethod { method_ref: key.0, arguments: key.1.clone() });
        self.bootstrap_ids.insert(key, index);
        Ok(index)
    }

    fn entry_for(&mut self, c: &Constant) -> Result<ConstantPoolEntry, UnqualifyError> {
        use ConstantPoolEntry as E;
        Ok(match c {
            Constant::Utf8(t) => E::Utf8(t.clone()),
            Constant::Integer(v) => E::Integer(*v),
            Constant::Float(v) => E::Float(*v),
            Constant::Long(v) => E::Long(*v),
            Constant::Double(v) => E::Double(*v),
            Constant::Class(n) => E::Class { name_index: self.utf8(n)? },
            Constant::String(t) => E::String { string_index: self.push(E::Utf8(t.clone()))? },
            Constant::Fieldref(r) => {
                let (class_index, name_and_type_index) = self.member(r)?;
                E::Fieldref { class_index, name_and_type_index }
            }
            Constant::Methodref(r) => {
                let (class_index, name_and_type_index) = self.member(r)?;
                E::Methodref { class_index, name_and_type_index }
            }
            Constant::InterfaceMethodref(r) => {
                let (class_index, name_and_type_index) = self.member(r)?;
                E::InterfaceMethodref { class_index, name_and_type_index }
            }
            Constant::MethodHandle { kind, member } => {
                E::MethodHandle { reference_kind: *kind, reference_index: self.constant(member)? }
            }
            Constant::MethodType(d) => E::MethodType { descriptor_index: self.utf8(d)? },
            Constant::Dynamic(d) => E::Dynamic {
                bootstrap_method_attr_index: self.bootstrap(&d.bootstrap)?,
                name_and_type_index: self.name_and_type(&d.name, &d.descriptor)?,
            },
            Constant::InvokeDynamic(d) => E::InvokeDynamic {
                bootstrap_method_attr_index: self.bootstrap(&d.bootstrap)?,
                name_and_type_index: self.name_and_type(&d.name, &d.descriptor)?,
            },
        })
    }

    fn constant(&mut self, c: &Constant) -> Result<u16, UnqualifyError> {
        if let Some(&slot) = self.reserved.get(c) {
            if self.filled.insert(slot) {
                let e = self.entry_for(c)?;
                self.entries[slot as usize] = e.clone();
                self.dedup.entry(e).or_insert(slot);
            }
            return Ok(slot);
        }
        let e = self.entry_for(c)?;
        self.push(e)
    }

    fn finish(self) -> ConstantPool {
        ConstantPool::from_entries(
            self.entries.into_iter().filter(|e| !matches!(e, ConstantPoolEntry::Unusable)).collect(),
        )
    }
}

struct Assembler {
    pool: PoolBuilder,
}

impl Assembler {
    fn attrs(&mut self, attrs: &[AttrNode]) -> Result<Vec<AttributeInfo>, UnqualifyError> {
        let mut out = Vec::with_capacity(attrs.len());
        for a in attrs {
            if let Some(info) = self.attr(a)? {
                out.push(info);
            }
        }
        Ok(out)
    }

    fn attr(&mut self, a: &AttrNode) -> Result<Option<AttributeInfo>, UnqualifyError> {
        if matches!(a, AttrNode::Opaque { .. }) {
            return Ok(None);
        }
        let name_index = self.pool.utf8(a.name())?;
        let p = &mut self.pool;
        let attribute = match a {
            AttrNode::ConstantValue(c) => Attribute::ConstantValue { value_index: p.constant(c)? },
            AttrNode::Code(c) => Attribute::Code(self.code(c)?),
            AttrNode::StackMapTable(frames) => Attribute::StackMapTable(
                frames
                    .iter()
                    .map(|(f, types)| {
                        let types = types.iter().map(|t| vtype(p, t)).collect::<Result<Vec<_>, _>>()?;
                        Ok(rebuild_frame(f, types))
                    })
                    .collect::<Result<_, UnqualifyError>>()?,
            ),
            AttrNode::Exceptions(v) => Attribute::Exceptions(classes(p, v)?),
            AttrNode::InnerClasses(v) => Attribute::InnerClasses(
                v.iter()
                    .map(|ic| {
                        Ok(InnerClass {
                            inner_class_info_index: p.class(&ic.inner)?,
                            outer_class_info_index: p.opt_class(ic.outer.as_deref())?,
                            inner_name_index: p.opt_utf8(ic.simple_name.as_deref())?,
                            inner_class_access_flags: ic.access_flags,
                        })
                    })
                    .collect::<Result<_, UnqualifyError>>()?,
            ),
            AttrNode::EnclosingMethod { class, method } => Attribute::EnclosingMethod {
                class_index: p.class(class)?,
                method_index: match method {
                    Some((n, d)) => p.name_and_type(n, d)?,
                    None => 0,
                },
            },
            AttrNode::Synthetic => Attribute::Synthetic,
            AttrNode::Deprecated => Attribute::Deprecated,
            AttrNode::Signature(s) => Attribute::Signature { signature_index: p.utf8(s)? },
            AttrNode::SourceFile(s) => Attribute::SourceFile { sourcefile_index: p.utf8(s)? },
            AttrNode::SourceDebugExtension(b) => Attribute::SourceDebugExtension(b.clone()),
            AttrNode::LineNumberTable(v) => Attribute::LineNumberTable(
                v.iter().map(|&(start_pc, line_number)| LineNumber { start_pc, line_number }).collect(),
            ),
            AttrNode::LocalVariableTable(v) => Attribute::LocalVariableTable(locals(p, v)?),
            AttrNode::LocalVariableTypeTable(v) => Attribute::LocalVariableTypeTable(locals(p, v)?),
            AttrNode::Annotations { visible, annotations } => {
                let v = annotations_of(p, annotations)?;
                if *visible {
                    Attribute::RuntimeVisibleAnnotations(v)
                } else {
                    Attribute::RuntimeInvisibleAnnotations(v)
                }
            }
            AttrNode::ParameterAnnotations { visible, parameters } => {
                let v = parameters.iter().map(|ps| annotations_of(p, ps)).collect::<Result<_, _>>()?;
                if *visible {
                    Attribute::RuntimeVisibleParameterAnnotations(v)
                } else {
                    Attribute::RuntimeInvisibleParameterAnnotations(v)
                }
            }
            AttrNode::AnnotationDefault(e) => Attribute::AnnotationDefault(element(p, e)?),
            // Filled in once every constant has been interned.
            AttrNode::BootstrapMethods => Attribute::BootstrapMethods(Vec::new()),
            AttrNode::MethodParameters(v) => Attribute::MethodParameters(
                v.iter()
                    .map(|(n, flags)| Ok(MethodParameter { name_index: p.opt_utf8(n.as_deref())?, access_flags: *flags }))
                    .collect::<Result<_, UnqualifyError>>()?,
            ),
            AttrNode::NestHost(h) => Attribute::NestHost { host_class_index: p.class(h)? },
            AttrNode::NestMembers(v) => Attribute::NestMembers(classes(p, v)?),
            AttrNode::PermittedSubclasses(v) => Attribute::PermittedSubclasses(classes(p, v)?),
            AttrNode::Record(v) => Attribute::Record(
                v.iter().map(|c| self.record_component(c)).collect::<Result<_, _>>()?,
            ),
            AttrNode::Opaque { .. } => unreachable!(),
        };
        Ok(Some(AttributeInfo { name_index, attribute }))
    }

    fn record_component(&mut self, c: &RecordComponentNode) -> Result<RecordComponent, UnqualifyError> {
        Ok(RecordComponent {
            name_index: self.pool.utf8(&c.name)?,
            descriptor_index: self.pool.utf8(&c.descriptor)?,
            attributes: self.attrs(&c.attributes)?,
        })
    }

    fn code(&mut self, c: &CodeNode) -> Result<CodeAttribute, UnqualifyError> {
        let mut code = Vec::new();
        for insn in &c.instructions {
            match insn {
                InsnNode::Plain(b) => code.extend_from_slice(b),
                InsnNode::Switch { opcode, padding, body } => {
                    code.push(*opcode);
                    code.extend_from_slice(padding);
                    code.extend_from_slice(body);
                }
                InsnNode::Pool { opcode, constant, trailing } => {
                    let index = self.pool.constant(constant)?;
                    code.push(*opcode);
                    if *opcode == LDC {
                        code.push(u8::try_from(index).map_err(|_| too_large("ldc operand"))?);
                    } else {
                        code.extend_from_slice(&index.to_be_bytes());
                    }
                    code.extend_from_slice(trailing);
                }
            }
        }
        let exception_table = c
            .handlers
            .iter()
            .map(|h| {
                Ok(ExceptionHandler {
                    start_pc: h.start_pc,
                    end_pc: h.end_pc,
                    handler_pc: h.handler_pc,
                    catch_type: self.pool.opt_class(h.catch_type.as_deref())?,
                })
            })
            .collect::<Result<_, UnqualifyError>>()?;
        Ok(CodeAttribute {
            max_stack: c.max_stack,
            max_locals: c.max_locals,
            code,
            exception_table,
            attributes: self.attrs(&c.attributes)?,
        })
    }

    fn member(&mut self, m: &MemberNode) -> Result<MemberInfo, UnqualifyError> {
        Ok(MemberInfo {
            access_flags: m.access_flags,
            name_index: self.pool.utf8(&m.name)?,
            descriptor_index: self.pool.utf8(&m.descriptor)?,
            attributes: self.attrs(&m.attributes)?,
        })
    }
}

fn classes(p: &mut PoolBuilder, v: &[String]) -> Result<Vec<u16>, UnqualifyError> {
    v.iter().map(|n| p.class(n)).collect()
}

fn locals(p: &mut PoolBuilder, v: &[LocalVarNode]) -> Result<Vec<LocalVariable>, UnqualifyError> {
    v.iter()
        .map(|l| {
            Ok(LocalVariable {
                start_pc: l.start_pc,
                length: l.length,
                name_index: p.utf8(&l.name)?,
                descriptor_index: p.utf8(&l.descriptor)?,
                index: l.index,
            })
        })
        .collect()
}

fn vtype(p: &mut PoolBuilder, t: &VType) -> Result<VerificationType, UnqualifyError> {
    Ok(match t {
        VType::Top => VerificationType::Top,
        VType::Integer => VerificationType::Integer,
        VType::Float => VerificationType::Float,
        VType::Double => VerificationType::Double,
        VType::Long => VerificationType::Long,
        VType::Null => VerificationType::Null,
        VType::UninitializedThis => VerificationType::UninitializedThis,
        VType::Object(n) => VerificationType::Object { class_index: p.class(n)? },
        VType::Uninitialized(offset) => VerificationType::Uninitialized { offset: *offset },
    })
}

/// Replaces the verification types of `f`, in encounter order, with `types`.
fn rebuild_frame(f: &StackMapFrame, types: Vec<VerificationType>) -> StackMapFrame {
    use StackMapFrame as F;
    let mut it = types.into_iter();
    match f {
        F::Same { .. } | F::Chop { .. } | F::SameExtended { .. } => f.clone(),
        F::SameLocals1StackItem { frame_type, .. } => {
            F::SameLocals1StackItem { frame_type: *frame_type, stack: it.next().expect("one type") }
        }
        F::SameLocals1StackItemExtended { offset_delta, .. } => {
            F::SameLocals1StackItemExtended { offset_delta: *offset_delta, stack: it.next().expect("one type") }
        }
        F::Append { frame_type, offset_delta, locals } => F::Append {
            frame_type: *frame_type,
            offset_delta: *offset_delta,
            locals: it.by_ref().take(locals.len()).collect(),
        },
        F::Full { offset_delta, locals, .. } => {
            let new_locals = it.by_ref().take(locals.len()).collect();
            F::Full { offset_delta: *offset_delta, locals: new_locals, stack: it.collect() }
        }
    }
}

fn annotation(p: &mut PoolBuilder, a: &AnnotationNode) -> Result<Annotation, UnqualifyError> {
    Ok(Annotation {
        type_index: p.utf8(&a.type_descriptor)?,
        elements: a
            .elements
            .iter()
            .map(|(n, e)| Ok((p.utf8(n)?, element(p, e)?)))
            .collect::<Result<_, UnqualifyError>>()?,
    })
}

fn annotations_of(p: &mut PoolBuilder, v: &[AnnotationNode]) -> Result<Vec<Annotation>, UnqualifyError> {
    v.iter().map(|a| annotation(p, a)).collect()
}

fn element(p: &mut PoolBuilder, e: &ElementNode) -> Result<ElementValue, UnqualifyError> {
    Ok(match e {
        ElementNode::Const { tag, value } => ElementValue::Const { tag: *tag, const_value_index: p.constant(value)? },
        ElementNode::Enum { type_descriptor, name } => ElementValue::Enum {
            type_name_index: p.utf8(type_descriptor)?,
            const_name_index: p.utf8(name)?,
        },
        ElementNode::Class(d) => ElementValue::Class { class_info_index: p.utf8(d)? },
        ElementNode::Annotation(a) => ElementValue::Annotation(annotation(p, a)?),
        ElementNode::Array(v) => ElementValue::Array(v.iter().map(|e| element(p, e)).collect::<Result<_, _>>()?),
    })
}

/// Serializes a node into class-file bytes with a freshly built pool.
pub(crate) fn assemble(node: &ClassNode) -> Result<Vec<u8>, UnqualifyError> {
    let mut asm = Assembler { pool: PoolBuilder::new() };
    for c in node.ldc_targets() {
        asm.pool.reserve(c)?;
    }
    let this_class = asm.pool.class(&node.name)?;
    let super_class = asm.pool.opt_class(node.super_name.as_deref())?;
    let interfaces = classes(&mut asm.pool, &node.interfaces)?;
    let fields = node.fields.iter().map(|m| asm.member(m)).collect::<Result<Vec<_>, _>>()?;
    let methods = node.methods.iter().map(|m| asm.member(m)).collect::<Result<Vec<_>, _>>()?;
    let mut attributes = asm.attrs(&node.attributes)?;
    let bootstraps = std::mem::take(&mut asm.pool.bootstraps);
    match attributes.iter_mut().find(|a| matches!(a.attribute, Attribute::BootstrapMethods(_))) {
        Some(a) => a.attribute = Attribute::BootstrapMethods(bootstraps),
        None if !bootstraps.is_empty() => {
            let name_index = asm.pool.utf8("BootstrapMethods")?;
            attributes.push(AttributeInfo { name_index, attribute: Attribute::BootstrapMethods(bootstraps) });
        }
        None => {}
    }
    let class = ClassFile {
        minor_version: node.minor_version,
        major_version: node.major_version,
        constant_pool: asm.pool.finish(),
        access_flags: node.access_flags,
        this_class,
        super_class,
        interfaces,
        fields,
        methods,
        attributes,
        raw_bytes: Vec::new(),
    };
    Ok(class.to_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_applies_at_package_boundary() {
        let r = RelocationRule::new("com/example", "org/modified").unwrap();
        assert_eq!(r.apply("com/example/utils/Foo").as_deref(), Some("org/modified/utils/Foo"));
        assert_eq!(r.apply("com/examples/Foo"), None);
        assert_eq!(r.apply("com/example"), None);
        let flat = RelocationRule::new("com/example", "").unwrap();
        assert_eq!(flat.apply("com/example/utils/Foo").as_deref(), Some("utils/Foo"));
    }

    #[test]
    fn invalid_rules() {
        assert!(RelocationRule::new("", "x").is_err());
        assert!(RelocationRule::new("com.example", "x").is_err());
        assert!(RelocationRule::new("com//x", "x").is_err());
        assert!(RelocationRule::new("com/x", "a/").is_err());
    }

    #[test]
    fn overlapping_rules_conflict() {
        let r = |a: &str, b: &str| RelocationRule::new(a, b).unwrap();
        assert!(validate_rules(&[r("com/example", "a"), r("com/example", "b")]).is_err());
        assert!(validate_rules(&[r("com/example", "a"), r("com/example/utils", "b")]).is_err());
        assert!(validate_rules(&[r("com/example", "a"), r("com/examples", "b")]).is_ok());
    }
}
