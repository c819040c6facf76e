//! Test support for the unshade workspace: a class-file assembler, a fixture
//! corpus of synthetic libraries, and a JAR builder.

pub mod asm;
pub mod corpus;
pub mod gen;
pub mod jar;
pub mod oracle;
pub mod vectors;

pub use asm::{ClassBuilder, Code, Const, Layout};
pub use corpus::{corpus, library, ClassFixture};
pub use jar::JarBuilder;
