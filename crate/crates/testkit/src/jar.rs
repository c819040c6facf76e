//! In-memory ZIP/JAR construction.

use std::io::{Cursor, Write};

use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, DateTime, ZipWriter};

use crate::corpus::ClassFixture;

#[derive(Debug, Clone, Default)]
pub struct JarBuilder {
    entries: Vec<(String, Vec<u8>)>,
    stored: bool,
}

impl JarBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Store entries uncompressed instead of deflating them.
    pub fn stored(mut self) -> Self {
        self.stored = true;
        self
    }

    pub fn manifest(self, created_by: &str) -> Self {
        let body = format!("Manifest-Version: 1.0\r\nCreated-By: {created_by}\r\n\r\n");
        self.entry("META-INF/MANIFEST.MF", body.into_bytes())
    }

    pub fn entry(mut self, path: &str, bytes: Vec<u8>) -> Self {
        self.entries.push((path.to_string(), bytes));
        self
    }

    pub fn class(self, fixture: &ClassFixture) -> Self {
        let path = fixture.entry_path();
        self.entry(&path, fixture.bytes())
    }

    pub fn classes<'a>(self, fixtures: impl IntoIterator<Item = &'a ClassFixture>) -> Self {
        fixtures.into_iter().fold(self, |jar, f| jar.class(f))
    }

    pub fn entries(&self) -> &[(String, Vec<u8>)] {
        &self.entries
    }

    /// Reverse the entry order (useful for order-independence checks).
    pub fn reversed(mut self) -> Self {
        self.entries.reverse();
        self
    }

    pub fn build(&self) -> Vec<u8> {
        let mut zip = ZipWriter::new(Cursor::new(Vec::new()));
        let method = if self.stored { CompressionMethod::Stored } else { CompressionMethod::Deflated };
        let options = SimpleFileOptions::default()
            .compression_method(method)
            .last_modified_time(DateTime::default());
        for (path, bytes) in &self.entries {
            zip.start_file(path.as_str(), options).expect("start zip entry");
            zip.write_all(bytes).expect("write zip entry");
        }
        zip.finish().expect("finish zip").into_inner()
    }
}
