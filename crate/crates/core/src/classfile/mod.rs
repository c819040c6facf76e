//! Lossless parsing of the JVM class-file format.

mod attributes;
mod bytes;
pub mod code;
mod constant_pool;
pub mod descriptor;
pub mod mutf8;
pub mod signature;

use thiserror::Error;

pub use attributes::{
    Annotation, Attribute, AttributeInfo, BootstrapMethod, CodeAttribute, ElementValue, ExceptionHandler,
    InnerClass, LineNumber, LocalVariable, MethodParameter, RecordComponent, StackMapFrame, VerificationType,
};
pub use constant_pool::{ConstantPool, ConstantPoolEntry, ConstantTag, Utf8Text};
pub use descriptor::{parse_descriptor, BaseType, Descriptor, FieldType, MalformedDescriptor, MethodDescriptor};
pub use signature::{parse_signature, MalformedSignature, SignatureTree};

use bytes::{Reader, Writer};

pub const MAGIC: u32 = 0xCAFE_BABE;

/// Highest major version with a published specification (Java 25).
pub const LATEST_MAJOR_VERSION: u16 = 69;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MalformedClassFile {
    #[error("bad magic {0:#010x}")]
    BadMagic(u32),
    #[error("truncated at offset {offset}")]
    Truncated { offset: usize },
    #[error("constant pool index {index} out of range (count {count})")]
    IndexOutOfRange { index: u16, count: u16 },
    #[error("constant pool index {index}: expected {expected}, found {found}")]
    WrongTag { index: u16, expected: &'static str, found: &'static str },
    #[error("unknown constant tag {tag} at index {index}")]
    UnknownConstantTag { tag: u8, index: u16 },
    #[error("invalid modified UTF-8 at index {index}")]
    InvalidUtf8 { index: u16 },
    #[error("bad method handle reference kind {0}")]
    BadReferenceKind(u8),
    #[error("bootstrap method {index} referenced but only {count} defined")]
    BadBootstrapIndex { index: u16, count: usize },
    #[error("malformed {name} attribute: {reason}")]
    Attribute { name: String, reason: String },
    #[error("malformed bytecode at pc {pc}: {reason}")]
    Code { pc: usize, reason: String },
    #[error("{0} trailing bytes after class file")]
    TrailingBytes(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemberInfo {
    pub access_flags: u16,
    pub name_index: u16,
    pub descriptor_index: u16,
    pub attributes: Vec<AttributeInfo>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassFile {
    pub minor_version: u16,
    pub major_version: u16,
    pub constant_pool: ConstantPool,
    pub access_flags: u16,
    pub this_class: u16,
    /// 0 only for `java/lang/Object` and `module-info`.
    pub super_class: u16,
    pub interfaces: Vec<u16>,
    pub fields: Vec<MemberInfo>,
    pub methods: Vec<MemberInfo>,
    pub attributes: Vec<AttributeInfo>,
    pub raw_bytes: Vec<u8>,
}

/// Parses a class file. Never panics; any defect yields [`MalformedClassFile`].
pub fn parse_class(bytes: &[u8]) -> Result<ClassFile, MalformedClassFile> {
    let mut r = Reader::new(bytes);
    let magic = r.u32()?;
    if magic != MAGIC {
        return Err(MalformedClassFile::BadMagic(magic));
    }
    let minor_version = r.u16()?;
    let major_version = r.u16()?;
    if major_version > LATEST_MAJOR_VERSION {
        log::warn!("class file major version {major_version} is newer than {LATEST_MAJOR_VERSION}");
    }
    let constant_pool = ConstantPool::read(&mut r)?;
    let pool = &constant_pool;
    let access_flags = r.u16()?;
    let this_class = r.u16()?;
    pool.check(this_class, ConstantTag::Class)?;
    let super_class = r.u16()?;
    pool.check_optional(super_class, ConstantTag::Class)?;
    let n = r.u16()?;
    let mut interfaces = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let i = r.u16()?;
        pool.check(i, ConstantTag::Class)?;
        interfaces.push(i);
    }
    let fields = read_members(&mut r, pool)?;
    let methods = read_members(&mut r, pool)?;
    let attributes = attributes::read_attributes(&mut r, pool, 0)?;
    if r.remaining() != 0 {
        return Err(MalformedClassFile::TrailingBytes(r.remaining()));
    }
    let class = ClassFile {
        minor_version,
        major_version,
        constant_pool,
        access_flags,
        this_class,
        super_class,
        interfaces,
        fields,
        methods,
        attributes,
        raw_bytes: bytes.to_vec(),
    };
    class.validate_bootstrap_references()?;
    class.validate_code()?;
    Ok(class)
}

fn read_members(r: &mut Reader<'_>, pool: &ConstantPool) -> Result<Vec<MemberInfo>, MalformedClassFile> {
    let n = r.u16()?;
    let mut out = Vec::with_capacity(n.min(1024) as usize);
    for _ in 0..n {
        let access_flags = r.u16()?;
        let name_index = r.u16()?;
        let descriptor_index = r.u16()?;
        pool.check(name_index, ConstantTag::Utf8)?;
        pool.check(descriptor_index, ConstantTag::Utf8)?;
        let attributes = attributes::read_attributes(r, pool, 0)?;
        out.push(MemberInfo { access_flags, name_index, descriptor_index, attributes });
    }
    Ok(out)
}

impl MemberInfo {
    pub fn name<'a>(&self, pool: &'a ConstantPool) -> &'a str {
        pool.utf8(self.name_index).expect("validated at parse time")
    }

    pub fn descriptor<'a>(&self, pool: &'a ConstantPool) -> &'a str {
        pool.utf8(self.descriptor_index).expect("validated at parse time")
    }

    pub fn code(&self) -> Option<&CodeAttribute> {
        self.attributes.iter().find_map(|a| match &a.attribute {
            Attribute::Code(c) => Some(c),
            _ => None,
        })
    }
}

impl ClassFile {
    pub fn this_class_name(&self) -> &str {
        self.constant_pool.class_name(self.this_class).expect("validated at parse time")
    }

    pub fn super_class_name(&self) -> Option<&str> {
        (self.super_class != 0)
            .then(|| self.constant_pool.class_name(self.super_class).expect("validated at parse time"))
    }

    pub fn interface_names(&self) -> impl Iterator<Item = &str> {
        self.interfaces.iter().map(|&i| self.constant_pool.class_name(i).expect("validated at parse time"))
    }

    pub fn bootstrap_methods(&self) -> &[BootstrapMethod] {
        self.attributes
            .iter()
            .find_map(|a| match &a.attribute {
                Attribute::BootstrapMethods(v) => Some(v.as_slice()),
                _ => None,
            })
            .unwrap_or(&[])
    }

    /// Serializes the structure. For an unmodified parse result this equals `raw_bytes`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.u32(MAGIC);
        w.u16(self.minor_version);
        w.u16(self.major_version);
        self.constant_pool.write(&mut w);
        w.u16(self.access_flags);
        w.u16(self.this_class);
        w.u16(self.super_class);
        w.u16(self.interfaces.len() as u16);
        self.interfaces.iter().for_each(|i| w.u16(*i));
        for members in [&self.fields, &self.methods] {
            w.u16(members.len() as u16);
            for m in members.iter() {
                w.u16(m.access_flags);
                w.u16(m.name_index);
                w.u16(m.descriptor_index);
                attributes::write_attributes(&mut w, &m.attributes);
            }
        }
        attributes::write_attributes(&mut w, &self.attributes);
        w.buf
    }

    fn validate_bootstrap_references(&self) -> Result<(), MalformedClassFile> {
        let count = self.bootstrap_methods().len();
        for (_, e) in self.constant_pool.iter() {
            if let ConstantPoolEntry::Dynamic { bootstrap_method_attr_index: i, .. }
            | ConstantPoolEntry::InvokeDynamic { bootstrap_method_attr_index: i, .. } = e
            {
                if *i as usize >= count {
                    return Err(MalformedClassFile::BadBootstrapIndex { index: *i, count });
                }
            }
        }
        Ok(())
    }

    fn validate_code(&self) -> Result<(), MalformedClassFile> {
        for m in &self.methods {
            if let Some(c) = m.code() {
                for insn in code::Instructions::new(&c.code) {
                    let insn = insn?;
                    if let Some((index, kind)) = insn.pool_operand() {
                        code::check_operand(&self.constant_pool, index, kind)?;
                    }
                }
            }
        }
        Ok(())
    }
}
