use std::fmt;

use super::bytes::{Reader, Writer};
use super::{mutf8, MalformedClassFile};

/// Text of a `CONSTANT_Utf8_info` entry.
///
/// The raw modified-UTF-8 bytes are kept for lossless output; `text` is the
/// decoded form, exact unless the bytes contain unpaired surrogates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Utf8Text {
    raw: Vec<u8>,
    text: String,
    exact: bool,
}

impl Utf8Text {
    pub fn from_raw(raw: Vec<u8>) -> Option<Self> {
        let (text, exact) = mutf8::decode(&raw)?;
        Some(Utf8Text { raw, text, exact })
    }

    pub fn new(text: &str) -> Self {
        Utf8Text { raw: mutf8::encode(text), text: text.to_string(), exact: true }
    }

    pub fn raw(&self) -> &[u8] {
        &self.raw
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// Whether `as_str` reproduces the raw bytes exactly.
    pub fn is_exact(&self) -> bool {
        self.exact
    }
}

impl fmt::Display for Utf8Text {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum ConstantTag {
    Utf8 = 1,
    Integer = 3,
    Float = 4,
    Long = 5,
    Double = 6,
    Class = 7,
    String = 8,
    Fieldref = 9,
    Methodref = 10,
    InterfaceMethodref = 11,
    NameAndType = 12,
    MethodHandle = 15,
    MethodType = 16,
    Dynamic = 17,
    InvokeDynamic = 18,
    Module = 19,
    Package = 20,
}

impl ConstantTag {
    pub fn from_u8(tag: u8) -> Option<Self> {
        use ConstantTag::*;
        Some(match tag {
            1 => Utf8,
            3 => Integer,
            4 => Float,
            5 => Long,
            6 => Double,
            7 => Class,
            8 => String,
            9 => Fieldref,
            10 => Methodref,
            11 => InterfaceMethodref,
            12 => NameAndType,
            15 => MethodHandle,
            16 => MethodType,
            17 => Dynamic,
            18 => InvokeDynamic,
            19 => Module,
            20 => Package,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        use ConstantTag::*;
        match self {
            Utf8 => "Utf8",
            Integer => "Integer",
            Float => "Float",
            Long => "Long",
            Double => "Double",
            Class => "Class",
            String => "String",
            Fieldref => "Fieldref",
            Methodref => "Methodref",
            InterfaceMethodref => "InterfaceMethodref",
            NameAndType => "NameAndType",
            MethodHandle => "MethodHandle",
            MethodType => "MethodType",
            Dynamic => "Dynamic",
            InvokeDynamic => "InvokeDynamic",
            Module => "Module",
            Package => "Package",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ConstantPoolEntry {
    Utf8(Utf8Text),
    Integer(i32),
    /// IEEE-754 bits, kept as bits so NaN payloads survive.
    Float(u32),
    Long(i64),
    Double(u64),
    Class { name_index: u16 },
    String { string_index: u16 },
    Fieldref { class_index: u16, name_and_type_index: u16 },
    Methodref { class_index: u16, name_and_type_index: u16 },
    InterfaceMethodref { class_index: u16, name_and_type_index: u16 },
    NameAndType { name_index: u16, descriptor_index: u16 },
    MethodHandle { reference_kind: u8, reference_index: u16 },
    MethodType { descriptor_index: u16 },
    Dynamic { bootstrap_method_attr_index: u16, name_and_type_index: u16 },
    InvokeDynamic { bootstrap_method_attr_index: u16, name_and_type_index: u16 },
    Module { name_index: u16 },
    Package { name_index: u16 },
    /// Slot 0 and the slot following a Long or Double.
    Unusable,
}

impl ConstantPoolEntry {
    pub fn tag(&self) -> Option<ConstantTag> {
        use ConstantPoolEntry as E;
        Some(match self {
            E::Utf8(_) => ConstantTag::Utf8,
            E::Integer(_) => ConstantTag::Integer,
            E::Float(_) => ConstantTag::Float,
            E::Long(_) => ConstantTag::Long,
            E::Double(_) => ConstantTag::Double,
            E::Class { .. } => ConstantTag::Class,
            E::String { .. } => ConstantTag::String,
            E::Fieldref { .. } => ConstantTag::Fieldref,
            E::Methodref { .. } => ConstantTag::Methodref,
            E::InterfaceMethodref { .. } => ConstantTag::InterfaceMethodref,
            E::NameAndType { .. } => ConstantTag::NameAndType,
            E::MethodHandle { .. } => ConstantTag::MethodHandle,
            E::MethodType { .. } => ConstantTag::MethodType,
            E::Dynamic { .. } => ConstantTag::Dynamic,
            E::InvokeDynamic { .. } => ConstantTag::InvokeDynamic,
            E::Module { .. } => ConstantTag::Module,
            E::Package { .. } => ConstantTag::Package,
            E::Unusable => return None,
        })
    }

    fn tag_name(&self) -> &'static str {
        self.tag().map_or("unusable slot", ConstantTag::name)
    }

    /// Number of pool slots this entry occupies.
    pub fn width(&self) -> u16 {
        match self {
            ConstantPoolEntry::Long(_) | ConstantPoolEntry::Double(_) => 2,
            _ => 1,
        }
    }

    /// Whether `ldc`-family instructions and bootstrap arguments may load it.
    pub fn is_loadable(&self) -> bool {
        use ConstantPoolEntry as E;
        matches!(
            self,
            E::Integer(_)
                | E::Float(_)
                | E::Long(_)
                | E::Double(_)
                | E::Class { .. }
                | E::String { .. }
                | E::MethodHandle { .. }
                | E::MethodType { .. }
                | E::Dynamic { .. }
        )
    }
}

/// 1-indexed constant pool. Index 0 and the upper half of wide entries hold
/// [`ConstantPoolEntry::Unusable`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstantPool {
    entries: Vec<ConstantPoolEntry>,
}

impl ConstantPool {
    pub fn from_entries(entries: Vec<ConstantPoolEntry>) -> Self {
        let mut all = Vec::with_capacity(entries.len() + 1);
        all.push(ConstantPoolEntry::Unusable);
        for e in entries {
            let wide = e.width() == 2;
            all.push(e);
            if wide {
                all.push(ConstantPoolEntry::Unusable);
            }
        }
        ConstantPool { entries: all }
    }

    /// The `constant_pool_count` field: one more than the highest index.
    pub fn count(&self) -> u16 {
        self.entries.len() as u16
    }

    /// Usable entries with their indexes.
    pub fn iter(&self) -> impl Iterator<Item = (u16, &ConstantPoolEntry)> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| !matches!(e, ConstantPoolEntry::Unusable))
            .map(|(i, e)| (i as u16, e))
    }

    pub fn get(&self, index: u16) -> Result<&ConstantPoolEntry, MalformedClassFile> {
        match self.entries.get(index as usize) {
            Some(ConstantPoolEntry::Unusable) | None => Err(MalformedClassFile::IndexOutOfRange {
                index,
                count: self.count(),
            }),
            Some(e) => Ok(e),
        }
    }

    fn expect(&self, index: u16, tag: ConstantTag) -> Result<&ConstantPoolEntry, MalformedClassFile> {
        let e = self.get(index)?;
        if e.tag() == Some(tag) {
            Ok(e)
        } else {
            Err(MalformedClassFile::WrongTag { index, expected: tag.name(), found: e.tag_name() })
        }
    }

    pub fn utf8_entry(&self, index: u16) -> Result<&Utf8Text, MalformedClassFile> {
        match self.expect(index, ConstantTag::Utf8)? {
            ConstantPoolEntry::Utf8(t) => Ok(t),
            _ => unreachable!(),
        }
    }

    pub fn utf8(&self, index: u16) -> Result<&str, MalformedClassFile> {
        self.utf8_entry(index).map(Utf8Text::as_str)
    }

    /// Name referenced by a `CONSTANT_Class_info`.
    pub fn class_name(&self, index: u16) -> Result<&str, MalformedClassFile> {
        match self.expect(index, ConstantTag::Class)? {
            ConstantPoolEntry::Class { name_index } => self.utf8(*name_index),
            _ => unreachable!(),
        }
    }

    pub fn name_and_type(&self, index: u16) -> Result<(&str, &str), MalformedClassFile> {
        match self.expect(index, ConstantTag::NameAndType)? {
            ConstantPoolEntry::NameAndType { name_index, descriptor_index } => {
                Ok((self.utf8(*name_index)?, self.utf8(*descriptor_index)?))
            }
            _ => unreachable!(),
        }
    }

    pub(crate) fn check(&self, index: u16, tag: ConstantTag) -> Result<(), MalformedClassFile> {
        self.expect(index, tag).map(|_| ())
    }

    pub(crate) fn check_optional(&self, index: u16, tag: ConstantTag) -> Result<(), MalformedClassFile> {
        if index == 0 {
            Ok(())
        } else {
            self.check(index, tag)
        }
    }

    pub(crate) fn check_loadable(&self, index: u16) -> Result<(), MalformedClassFile> {
        let e = self.get(index)?;
        if e.is_loadable() {
            Ok(())
        } else {
            Err(MalformedClassFile::WrongTag { index, expected: "loadable constant", found: e.tag_name() })
        }
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self, MalformedClassFile> {
        let count = r.u16()?;
        if count == 0 {
            return Err(MalformedClassFile::IndexOutOfRange { index: 0, count });
        }
        let mut entries = Vec::with_capacity(count as usize);
        entries.push(ConstantPoolEntry::Unusable);
        while entries.len() < count as usize {
            let index = entries.len() as u16;
            let tag = r.u8()?;
            let tag = ConstantTag::from_u8(tag).ok_or(MalformedClassFile::UnknownConstantTag { tag, index })?;
            use ConstantPoolEntry as E;
            let entry = match tag {
                ConstantTag::Utf8 => {
                    let len = r.u16()? as usize;
                    let raw = r.take(len)?.to_vec();
                    E::Utf8(Utf8Text::from_raw(raw).ok_or(MalformedClassFile::InvalidUtf8 { index })?)
                }
                ConstantTag::Integer => E::Integer(r.u32()? as i32),
                ConstantTag::Float => E::Float(r.u32()?),
                ConstantTag::Long => E::Long(r.u64()? as i64),
                ConstantTag::Double => E::Double(r.u64()?),
                ConstantTag::Class => E::Class { name_index: r.u16()? },
                ConstantTag::String => E::String { string_index: r.u16()? },
                ConstantTag::Fieldref => E::Fieldref { class_index: r.u16()?, name_and_type_index: r.u16()? },
                ConstantTag::Methodref => E::Methodref { class_index: r.u16()?, name_and_type_index: r.u16()? },
                ConstantTag::InterfaceMethodref => {
                    E::InterfaceMethodref { class_index: r.u16()?, name_and_type_index: r.u16()? }
                }
                ConstantTag::NameAndType => E::NameAndType { name_index: r.u16()?, descriptor_index: r.u16()? },
                ConstantTag::MethodHandle => E::MethodHandle { reference_kind: r.u8()?, reference_index: r.u16()? },
                ConstantTag::MethodType => E::MethodType { descriptor_index: r.u16()? },
                ConstantTag::Dynamic => {
                    E::Dynamic { bootstrap_method_attr_index: r.u16()?, name_and_type_index: r.u16()? }
                }
                ConstantTag::InvokeDynamic => {
                    E::InvokeDynamic { bootstrap_method_attr_index: r.u16()?, name_and_type_index: r.u16()? }
                }
                ConstantTag::Module => E::Module { name_index: r.u16()? },
                ConstantTag::Package => E::Package { name_index: r.u16()? },
            };
            let wide = entry.width() == 2;
            entries.push(entry);
            if wide {
                // A wide entry in the last slot would claim an index past the end.
                if entries.len() >= count as usize {
                    return Err(MalformedClassFile::IndexOutOfRange { index: entries.len() as u16, count });
                }
                entries.push(ConstantPoolEntry::Unusable);
            }
        }
        let pool = ConstantPool { entries };
        pool.validate()?;
        Ok(pool)
    }

    /// Checks that every cross-entry reference lands on the required tag.
    fn validate(&self) -> Result<(), MalformedClassFile> {
        use ConstantPoolEntry as E;
        for (_, e) in self.iter() {
            match *e {
                E::Class { name_index } | E::Module { name_index } | E::Package { name_index } => {
                    self.check(name_index, ConstantTag::Utf8)?
                }
                E::String { string_index } => self.check(string_index, ConstantTag::Utf8)?,
                E::MethodType { descriptor_index } => self.check(descriptor_index, ConstantTag::Utf8)?,
                E::Fieldref { class_index, name_and_type_index }
                | E::Methodref { class_index, name_and_type_index }
                | E::InterfaceMethodref { class_index, name_and_type_index } => {
                    self.check(class_index, ConstantTag::Class)?;
                    self.check(name_and_type_index, ConstantTag::NameAndType)?;
                }
                E::NameAndType { name_index, descriptor_index } => {
                    self.check(name_index, ConstantTag::Utf8)?;
                    self.check(descriptor_index, ConstantTag::Utf8)?;
                }
                E::MethodHandle { reference_kind, reference_index } => {
                    let target = self.get(reference_index)?;
                    let ok = match reference_kind {
                        1..=4 => matches!(target, E::Fieldref { .. }),
                        5 | 8 => matches!(target, E::Methodref { .. }),
                        6 | 7 => matches!(target, E::Methodref { .. } | E::InterfaceMethodref { .. }),
                        9 => matches!(target, E::InterfaceMethodref { .. }),
                        _ => return Err(MalformedClassFile::BadReferenceKind(reference_kind)),
                    };
                    if !ok {
                        return Err(MalformedClassFile::WrongTag {
                            index: reference_index,
                            expected: "member reference matching the handle kind",
                            found: target.tag_name(),
                        });
                    }
                }
                E::Dynamic { name_and_type_index, .. } | E::InvokeDynamic { name_and_type_index, .. } => {
                    self.check(name_and_type_index, ConstantTag::NameAndType)?
                }
                E::Utf8(_) | E::Integer(_) | E::Float(_) | E::Long(_) | E::Double(_) | E::Unusable => {}
            }
        }
        Ok(())
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        w.u16(self.count());
        for (_, e) in self.iter() {
            use ConstantPoolEntry as E;
            w.u8(e.tag().expect("usable entry") as u8);
            match e {
                E::Utf8(t) => {
                    w.u16(t.raw().len() as u16);
                    w.bytes(t.raw());
                }
                E::Integer(v) => w.u32(*v as u32),
                E::Float(v) => w.u32(*v),
                E::Long(v) => w.u64(*v as u64),
                E::Double(v) => w.u64(*v),
                E::Class { name_index: i }
                | E::String { string_index: i }
                | E::MethodType { descriptor_index: i }
                | E::Module { name_index: i }
                | E::Package { name_index: i } => w.u16(*i),
                E::Fieldref { class_index: a, name_and_type_index: b }
                | E::Methodref { class_index: a, name_and_type_index: b }
                | E::InterfaceMethodref { class_index: a, name_and_type_index: b }
                | E::NameAndType { name_index: a, descriptor_index: b }
                | E::Dynamic { bootstrap_method_attr_index: a, name_and_type_index: b }
                | E::InvokeDynamic { bootstrap_method_attr_index: a, name_and_type_index: b } => {
                    w.u16(*a);
                    w.u16(*b);
                }
                E::MethodHandle { reference_kind, reference_index } => {
                    w.u8(*reference_kind);
                    w.u16(*reference_index);
                }
                E::Unusable => unreachable!(),
            }
        }
    }
}
