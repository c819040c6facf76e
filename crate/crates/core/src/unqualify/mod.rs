//! Removal of package information from classes, and package relocation.
//!
//! Both operations work on a symbolic [`ClassNode`] in which every
//! constant-pool reference has been resolved. Unqualification maps each class
//! name to its simple name and feeds the result to [`canonical_encode`];
//! relocation rewrites package prefixes and reassembles a class file.

mod canonical;
mod node;
mod relocate;

use thiserror::Error;

use crate::classfile::descriptor::{parse_field_descriptor, Descriptor};
use crate::classfile::signature::{ClassTypeSignature, SignatureTree, SimpleClassType};
use crate::classfile::{parse_descriptor, parse_signature, MalformedClassFile};

pub use canonical::{canonical_encode, canonical_encode_node, CanonicalEncoding};
pub use node::{
    AnnotationNode, AttrNode, Bootstrap, ClassNode, CodeNode, Constant, DynamicRef, ElementNode, HandlerNode,
    InnerClassNode, InsnNode, LocalVarNode, MemberNode, MemberRef, RecordComponentNode, VType,
};
pub use relocate::{relocate, relocate_archive, relocate_class_name, validate_rules, RelocationRule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnqualifyError {
    #[error("unsupported construct: {0}")]
    UnsupportedConstruct(String),
    #[error("relocation rules overlap: {first:?} and {second:?}")]
    RelocationConflict { first: String, second: String },
    #[error("invalid relocation rule: {0}")]
    InvalidRule(String),
    #[error("relocated class failed to reassemble: {0}")]
    Reassembly(#[from] MalformedClassFile),
    #[error("archive: {0}")]
    Archive(String),
}

/// The part of an internal name after the last `/`.
///
/// `$` is kept, so nested classes stay distinct from their outer class.
pub fn simple_name(internal_name: &str) -> &str {
    internal_name.rsplit('/').next().unwrap_or(internal_name)
}

/// Replaces every object type in a descriptor by its simple name.
pub fn unqualify_descriptor(d: &Descriptor) -> Descriptor {
    d.map_names(|n| simple_name(n).to_string())
}

/// Drops the package prefix of every class type in a signature.
pub fn unqualify_signature(s: &SignatureTree) -> SignatureTree {
    let mut s = s.clone();
    s.visit_classes_mut(&mut |c| Unqualifier.map_class_signature(c));
    s
}

/// A rewrite of internal class names, applied consistently to class
/// references, descriptors and signatures.
pub trait NameMapper {
    fn map_class(&self, internal_name: &str) -> String;

    fn map_class_signature(&self, sig: &mut ClassTypeSignature) {
        let mapped = self.map_class(&sig.outer_internal_name());
        let mut parts: Vec<String> = mapped.split('/').map(str::to_string).collect();
        let name = parts.pop().unwrap_or_default();
        sig.package = parts;
        sig.segments[0] = SimpleClassType { name, type_arguments: std::mem::take(&mut sig.segments[0].type_arguments) };
    }

    /// A `CONSTANT_Class` name, which is either an internal name or an array descriptor.
    fn map_type_ref(&self, name: &str) -> Result<String, UnqualifyError> {
        if name.starts_with('[') {
            let t = parse_field_descriptor(name).map_err(|e| UnqualifyError::UnsupportedConstruct(e.to_string()))?;
            Ok(t.map_names(&mut |n| self.map_class(n)).to_string())
        } else {
            Ok(self.map_class(name))
        }
    }

    fn map_descriptor(&self, desc: &str) -> Result<String, UnqualifyError> {
        let d = parse_descriptor(desc).map_err(|e| UnqualifyError::UnsupportedConstruct(e.to_string()))?;
        Ok(d.map_names(|n| self.map_class(n)).to_string())
    }

    /// Annotation `class_info` values are return descriptors, so `V` is allowed.
    fn map_return_descriptor(&self, desc: &str) -> Result<String, UnqualifyError> {
        if desc == "V" {
            Ok(desc.to_string())
        } else {
            self.map_descriptor(desc)
        }
    }

    fn map_signature(&self, sig: &str) -> Result<String, UnqualifyError> {
        let mut tree = parse_signature(sig).map_err(|e| UnqualifyError::UnsupportedConstruct(e.to_string()))?;
        tree.visit_classes_mut(&mut |c| self.map_class_signature(c));
        Ok(tree.to_string())
    }
}

/// Maps every class name to its simple name.
#[derive(Debug, Clone, Copy, Default)]
pub struct Unqualifier;

impl NameMapper for Unqualifier {
    fn map_class(&self, internal_name: &str) -> String {
        simple_name(internal_name).to_string()
    }

    fn map_class_signature(&self, sig: &mut ClassTypeSignature) {
        sig.package.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_names() {
        assert_eq!(simple_name("com/example/utils/Foo"), "Foo");
        assert_eq!(simple_name("Foo"), "Foo");
        assert_eq!(simple_name("com/example/Foo$Bar"), "Foo$Bar");
    }

    #[test]
    fn descriptors() {
        let un = |s: &str| unqualify_descriptor(&parse_descriptor(s).unwrap()).to_string();
        assert_eq!(un("(Lcom/example/utils/Foo;I)Ljava/lang/String;"), "(LFoo;I)LString;");
        assert_eq!(un("(II)V"), "(II)V");
        assert_eq!(un("[Lcom/example/utils/Foo;"), "[LFoo;");
    }

    #[test]
    fn signatures() {
        let un = |s: &str| unqualify_signature(&parse_signature(s).unwrap()).to_string();
        assert_eq!(un("Ljava/util/List<Lcom/example/utils/Foo;>;"), "LList<LFoo;>;");
        assert_eq!(un("TT;"), "TT;");
        assert_eq!(un("<T:Lcom/example/Base;>()V"), "<T:LBase;>()V");
        assert_eq!(un("Lcom/example/Outer<TT;>.Inner<Ljava/lang/String;>;"), "LOuter<TT;>.Inner<LString;>;");
    }

    #[test]
    fn type_refs() {
        assert_eq!(Unqualifier.map_type_ref("[[Lcom/x/Foo;").unwrap(), "[[LFoo;");
        assert_eq!(Unqualifier.map_type_ref("[I").unwrap(), "[I");
        assert_eq!(Unqualifier.map_type_ref("com/x/Foo").unwrap(), "Foo");
    }
}
