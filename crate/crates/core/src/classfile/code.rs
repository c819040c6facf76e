//! Instruction-level decoding of `Code` attribute bytes.

use super::constant_pool::{ConstantPool, ConstantPoolEntry};
use super::MalformedClassFile;

pub const LDC: u8 = 0x12;
pub const LDC_W: u8 = 0x13;
pub const LDC2_W: u8 = 0x14;
pub const IINC: u8 = 0x84;
pub const TABLESWITCH: u8 = 0xaa;
pub const LOOKUPSWITCH: u8 = 0xab;
pub const INVOKEINTERFACE: u8 = 0xb9;
pub const INVOKEDYNAMIC: u8 = 0xba;
pub const WIDE: u8 = 0xc4;
pub const MULTIANEWARRAY: u8 = 0xc5;

/// What a constant-pool operand of an instruction must point at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperandKind {
    /// `ldc`, `ldc_w`: single-slot loadable constant.
    Loadable,
    /// `ldc2_w`: Long, Double or a wide Dynamic constant.
    Loadable2,
    Field,
    /// `invokevirtual`.
    Method,
    /// `invokespecial`, `invokestatic`: Methodref or InterfaceMethodref.
    AnyMethod,
    InterfaceMethod,
    InvokeDynamic,
    Class,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Instruction<'a> {
    pub pc: usize,
    pub opcode: u8,
    /// The whole instruction, opcode and any switch padding included.
    pub bytes: &'a [u8],
}

impl<'a> Instruction<'a> {
    /// Constant-pool operand and its required kind, if any.
    pub fn pool_operand(&self) -> Option<(u16, OperandKind)> {
        let kind = operand_kind(self.opcode)?;
        let index = if self.opcode == LDC {
            self.bytes[1] as u16
        } else {
            u16::from_be_bytes([self.bytes[1], self.bytes[2]])
        };
        Some((index, kind))
    }

    /// Bytes following the constant-pool operand (`invokeinterface` count,
    /// `invokedynamic` zero bytes, `multianewarray` dimensions).
    pub fn trailing(&self) -> &'a [u8] {
        match self.opcode {
            LDC => &[],
            _ if operand_kind(self.opcode).is_some() => &self.bytes[3..],
            _ => &[],
        }
    }

    /// Switch operands with alignment padding removed.
    pub fn switch_body(&self) -> Option<&'a [u8]> {
        matches!(self.opcode, TABLESWITCH | LOOKUPSWITCH).then(|| &self.bytes[1 + switch_padding(self.pc)..])
    }
}

fn operand_kind(opcode: u8) -> Option<OperandKind> {
    use OperandKind::*;
    Some(match opcode {
        LDC | LDC_W => Loadable,
        LDC2_W => Loadable2,
        0xb2..=0xb5 => Field,
        0xb6 => Method,
        0xb7 | 0xb8 => AnyMethod,
        INVOKEINTERFACE => InterfaceMethod,
        INVOKEDYNAMIC => InvokeDynamic,
        0xbb | 0xbd | 0xc0 | 0xc1 | MULTIANEWARRAY => Class,
        _ => return None,
    })
}

pub fn switch_padding(pc: usize) -> usize {
    (4 - (pc + 1) % 4) % 4
}

/// Fixed instruction length, or `None` for variable-length and invalid opcodes.
fn fixed_length(opcode: u8) -> Option<usize> {
    Some(match opcode {
        0x00..=0x0f => 1,
        0x10 => 2,
        0x11 => 3,
        LDC => 2,
        LDC_W | LDC2_W => 3,
        0x15..=0x19 => 2,
        0x1a..=0x35 => 1,
        0x36..=0x3a => 2,
        0x3b..=0x83 => 1,
        IINC => 3,
        0x85..=0x98 => 1,
        0x99..=0xa8 => 3,
        0xa9 => 2,
        0xac..=0xb1 => 1,
        0xb2..=0xb8 => 3,
        INVOKEINTERFACE | INVOKEDYNAMIC => 5,
        0xbb => 3,
        0xbc => 2,
        0xbd => 3,
        0xbe | 0xbf => 1,
        0xc0 | 0xc1 => 3,
        0xc2 | 0xc3 => 1,
        MULTIANEWARRAY => 4,
        0xc6 | 0xc7 => 3,
        0xc8 | 0xc9 => 5,
        _ => return None,
    })
}

/// Iterator over the instructions of a code array.
pub struct Instructions<'a> {
    code: &'a [u8],
    pc: usize,
    failed: bool,
}

impl<'a> Instructions<'a> {
    pub fn new(code: &'a [u8]) -> Self {
        Instructions { code, pc: 0, failed: false }
    }

    fn length_at(&self, pc: usize) -> Result<usize, MalformedClassFile> {
        let code = self.code;
        let err = |reason: String| MalformedClassFile::Code { pc, reason };
        let opcode = code[pc];
        let read_i32 = |at: usize| -> Result<i32, MalformedClassFile> {
            code.get(at..at + 4)
                .map(|b| i32::from_be_bytes([b[0], b[1], b[2], b[3]]))
                .ok_or_else(|| err("truncated switch".into()))
        };
        match opcode {
            TABLESWITCH => {
                let base = pc + 1 + switch_padding(pc);
                let low = read_i32(base + 4)? as i64;
                let high = read_i32(base + 8)? as i64;
                if high < low {
                    return Err(err(format!("tableswitch high {high} < low {low}")));
                }
                Ok(base - pc + 12 + (high - low + 1) as usize * 4)
            }
            LOOKUPSWITCH => {
                let base = pc + 1 + switch_padding(pc);
                let npairs = read_i32(base + 4)?;
                if npairs < 0 {
                    return Err(err(format!("lookupswitch npairs {npairs}")));
                }
                Ok(base - pc + 8 + npairs as usize * 8)
            }
            WIDE => match code.get(pc + 1) {
                Some(&IINC) => Ok(6),
                Some(0x15..=0x19 | 0x36..=0x3a | 0xa9) => Ok(4),
                Some(op) => Err(err(format!("wide applied to opcode {op:#04x}"))),
                None => Err(err("truncated wide".into())),
            },
            _ => fixed_length(opcode).ok_or_else(|| err(format!("invalid opcode {opcode:#04x}"))),
        }
    }
}

impl<'a> Iterator for Instructions<'a> {
    type Item = Result<Instruction<'a>, MalformedClassFile>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.pc >= self.code.len() {
            return None;
        }
        let pc = self.pc;
        let len = self.length_at(pc).and_then(|len| {
            if len <= self.code.len() - pc {
                Ok(len)
            } else {
                Err(MalformedClassFile::Code { pc, reason: "instruction runs past end of code".into() })
            }
        });
        let len = match len {
            Ok(len) => len,
            Err(e) => {
                self.failed = true;
                return Some(Err(e));
            }
        };
        self.pc += len;
        Some(Ok(Instruction { pc, opcode: self.code[pc], bytes: &self.code[pc..pc + len] }))
    }
}

/// Checks that an instruction operand points at a suitable pool entry.
pub(crate) fn check_operand(pool: &ConstantPool, index: u16, kind: OperandKind) -> Result<(), MalformedClassFile> {
    use ConstantPoolEntry as E;
    let e = pool.get(index)?;
    let ok = match kind {
        OperandKind::Loadable => e.is_loadable() && !matches!(e, E::Long(_) | E::Double(_)),
        OperandKind::Loadable2 => matches!(e, E::Long(_) | E::Double(_) | E::Dynamic { .. }),
        OperandKind::Field => matches!(e, E::Fieldref { .. }),
        OperandKind::Method => matches!(e, E::Methodref { .. }),
        OperandKind::AnyMethod => matches!(e, E::Methodref { .. } | E::InterfaceMethodref { .. }),
        OperandKind::InterfaceMethod => matches!(e, E::InterfaceMethodref { .. }),
        OperandKind::InvokeDynamic => matches!(e, E::InvokeDynamic { .. }),
        OperandKind::Class => matches!(e, E::Class { .. }),
    };
    if ok {
        Ok(())
    } else {
        Err(MalformedClassFile::WrongTag {
            index,
            expected: "operand of matching kind",
            found: e.tag().map_or("unusable slot", |t| t.name()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decode(code: &[u8]) -> Vec<(usize, u8, usize)> {
        Instructions::new(code).map(|i| i.map(|i| (i.pc, i.opcode, i.bytes.len()))).collect::<Result<_, _>>().unwrap()
    }

    #[test]
    fn simple_sequence() {
        // aload_0; invokespecial #1; return
        assert_eq!(decode(&[0x2a, 0xb7, 0, 1, 0xb1]), vec![(0, 0x2a, 1), (1, 0xb7, 3), (4, 0xb1, 1)]);
    }

    #[test]
    fn tableswitch_padding_depends_on_pc() {
        // iload_1 at pc 0, tableswitch at pc 1: two padding bytes.
        let mut code = vec![0x1b, TABLESWITCH, 0, 0];
        code.extend_from_slice(&20i32.to_be_bytes());
        code.extend_from_slice(&0i32.to_be_bytes());
        code.extend_from_slice(&1i32.to_be_bytes());
        code.extend_from_slice(&10i32.to_be_bytes());
        code.extend_from_slice(&12i32.to_be_bytes());
        code.push(0xb1);
        let insns = decode(&code);
        assert_eq!(insns[1], (1, TABLESWITCH, 1 + 2 + 12 + 8));
        assert_eq!(insns[2].0, 24);
        let sw = Instructions::new(&code).nth(1).unwrap().unwrap();
        assert_eq!(sw.switch_body().unwrap().len(), 20);
    }

    #[test]
    fn wide_forms() {
        assert_eq!(decode(&[WIDE, IINC, 1, 0, 0, 5]), vec![(0, WIDE, 6)]);
        assert_eq!(decode(&[WIDE, 0x15, 1, 0]), vec![(0, WIDE, 4)]);
        assert!(Instructions::new(&[WIDE, 0x00, 0, 0]).next().unwrap().is_err());
    }

    #[test]
    fn truncated_and_invalid() {
        assert!(Instructions::new(&[0xb7, 0]).next().unwrap().is_err());
        assert!(Instructions::new(&[0xff]).next().unwrap().is_err());
        let mut it = Instructions::new(&[0xfe, 0x00]);
        assert!(it.next().unwrap().is_err());
        assert!(it.next().is_none());
    }

    #[test]
    fn huge_switch_does_not_allocate() {
        let mut code = vec![TABLESWITCH, 0, 0, 0];
        code.extend_from_slice(&0i32.to_be_bytes());
        code.extend_from_slice(&i32::MIN.to_be_bytes());
        code.extend_from_slice(&i32::MAX.to_be_bytes());
        assert!(Instructions::new(&code).next().unwrap().is_err());
    }

    #[test]
    fn ldc_operand_is_one_byte() {
        let insn = Instructions::new(&[LDC, 7]).next().unwrap().unwrap();
        assert_eq!(insn.pool_operand(), Some((7, OperandKind::Loadable)));
        assert!(insn.trailing().is_empty());
        let insn = Instructions::new(&[INVOKEINTERFACE, 0, 9, 2, 0]).next().unwrap().unwrap();
        assert_eq!(insn.pool_operand(), Some((9, OperandKind::InterfaceMethod)));
        assert_eq!(insn.trailing(), &[2, 0]);
    }
}
