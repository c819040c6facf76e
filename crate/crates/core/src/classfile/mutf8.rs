//! Java "modified UTF-8" as used by `CONSTANT_Utf8_info`.

/// Decodes modified UTF-8.
///
/// Returns the decoded text and whether it is exact. Unpaired surrogates have
/// no Rust `char`; they decode to U+FFFD and the result is flagged inexact.
/// Returns `None` for byte sequences that are not modified UTF-8 at all.
pub fn decode(bytes: &[u8]) -> Option<(String, bool)> {
    let mut units: Vec<u16> = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            0x01..=0x7f => {
                units.push(b as u16);
                i += 1;
            }
            0xc0..=0xdf => {
                let b2 = *bytes.get(i + 1)?;
                if b2 & 0xc0 != 0x80 {
                    return None;
                }
                units.push(((b as u16 & 0x1f) << 6) | (b2 as u16 & 0x3f));
                i += 2;
            }
            0xe0..=0xef => {
                let b2 = *bytes.get(i + 1)?;
                let b3 = *bytes.get(i + 2)?;
                if b2 & 0xc0 != 0x80 || b3 & 0xc0 != 0x80 {
                    return None;
                }
                units.push(((b as u16 & 0x0f) << 12) | ((b2 as u16 & 0x3f) << 6) | (b3 as u16 & 0x3f));
                i += 3;
            }
            // 0x00 and 4-byte forms never appear in modified UTF-8.
            _ => return None,
        }
    }
    let mut exact = true;
    let text: String = char::decode_utf16(units.iter().copied())
        .map(|r| {
            r.unwrap_or_else(|_| {
                exact = false;
                char::REPLACEMENT_CHARACTER
            })
        })
        .collect();
    // Overlong encodings other than the two-byte NUL decode fine but would not
    // re-encode to the same bytes.
    if exact && encode(&text) != bytes {
        exact = false;
    }
    Some((text, exact))
}

pub fn encode(s: &str) -> Vec<u8> {
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_round_trip() {
        assert_eq!(decode(b"com/example/Foo"), Some(("com/example/Foo".to_string(), true)));
    }

    #[test]
    fn nul_uses_two_bytes() {
        assert_eq!(encode("a\0b"), vec![b'a', 0xc0, 0x80, b'b']);
        assert_eq!(decode(&[b'a', 0xc0, 0x80, b'b']).unwrap().0, "a\0b");
        assert_eq!(decode(&[0]), None);
    }

    #[test]
    fn supplementary_characters_use_surrogate_pairs() {
        let s = "x\u{1F600}";
        let enc = encode(s);
        assert_eq!(enc.len(), 1 + 6);
        assert_eq!(decode(&enc), Some((s.to_string(), true)));
    }

    #[test]
    fn lone_surrogate_is_inexact() {
        // U+D800 encoded on its own.
        let (text, exact) = decode(&[0xed, 0xa0, 0x80]).unwrap();
        assert_eq!(text, "\u{FFFD}");
        assert!(!exact);
    }

    #[test]
    fn rejects_four_byte_utf8() {
        assert_eq!(decode("\u{1F600}".as_bytes()), None);
    }
}
