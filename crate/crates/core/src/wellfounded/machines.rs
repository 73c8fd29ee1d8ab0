//! Bounded register machines with an oracle instruction, and the jump tower.
//!
//! Registers saturate at `cap`, so a machine has finitely many states and
//! halting is decided by detecting a repeated state.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Instr {
    Inc(u8),
    Dec(u8),
    /// Jump to the target when the register is zero.
    Jz(u8, usize),
    Jmp(usize),
    /// Jump to the target when the oracle bit indexed by the register is set.
    Query { reg: u8, target: usize },
    Halt,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MachineSpec {
    pub name: String,
    pub program: Vec<Instr>,
    pub registers: usize,
    pub cap: u64,
}

impl MachineSpec {
    pub fn new(name: impl Into<String>, program: Vec<Instr>) -> Result<Self> {
        let m = MachineSpec { name: name.into(), program, registers: 2, cap: 31 };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (pc, ins) in self.program.iter().enumerate() {
            let reg = match ins {
                Instr::Inc(r) | Instr::Dec(r) | Instr::Jz(r, _) | Instr::Query { reg: r, .. } => Some(*r),
                _ => None,
            };
            if reg.is_some_and(|r| r as usize >= self.registers) {
                return Err(Error::malformed(format!("{}: instruction {pc} uses a missing register", self.name)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunOutcome {
    /// Halted after executing `steps` non-halt instructions.
    Halted { steps: u64 },
    Loops,
    /// Queried an index the oracle cannot answer.
    OutOfBounds { query: u64 },
}

impl RunOutcome {
    pub fn halted(&self) -> bool {
        matches!(self, RunOutcome::Halted { .. })
    }
}

/// Run to completion. `oracle(q)` returns `None` when `q` is out of bounds.
pub fn run_machine(m: &MachineSpec, oracle: &mut dyn FnMut(u64) -> Option<bool>) -> RunOutcome {
    let mut regs = vec![0u64; m.registers];
    let mut pc = 0usize;
    let mut steps = 0u64;
    let mut seen: HashSet<(usize, Vec<u64>)> = HashSet::new();
    loop {
        let Some(ins) = m.program.get(pc) else {
            return RunOutcome::Halted { steps };
        };
        if !seen.insert((pc, regs.clone())) {
            return RunOutcome::Loops;
        }
        match *ins {
            Instr::Halt => return RunOutcome::Halted { steps },
            Instr::Inc(r) => {
                let v = &mut regs[r as usize];
                *v = (*v + 1).min(m.cap);
                pc += 1;
            }
            Instr::Dec(r) => {
                let v = &mut regs[r as usize];
                *v = v.saturating_sub(1);
                pc += 1;
            }
            Instr::Jz(r, t) => pc = if regs[r as usize] == 0 { t } else { pc + 1 },
            Instr::Jmp(t) => pc = t,
            Instr::Query { reg, target } => {
                let q = regs[reg as usize];
                match oracle(q) {
                    None => return RunOutcome::OutOfBounds { query: q },
                    Some(true) => pc = target,
                    Some(false) => pc += 1,
                }
            }
        }
        steps += 1;
    }
}

pub const MAX_JUMP_LEVEL: u32 = 3;

/// Lazily evaluated bounded jump tower over a machine list.
///
/// Level 0 runs machine `n` against the empty oracle. Level `l + 1` runs it
/// against level-`l` bits for indices below `min(A(n), machines.len())`; a
/// query past that bound counts as not halting.
pub struct JumpTower<'a> {
    machines: &'a [MachineSpec],
    a: &'a [u64],
    memo: HashMap<(u32, usize), bool>,
}

impl<'a> JumpTower<'a> {
    pub fn new(machines: &'a [MachineSpec], a: &'a [u64]) -> Self {
        JumpTower { machines, a, memo: HashMap::new() }
    }

    pub fn bit(&mut self, level: u32, n: usize) -> Result<bool> {
        if level > MAX_JUMP_LEVEL {
            return Err(Error::precondition(format!("jump level {level} exceeds {MAX_JUMP_LEVEL}")));
        }
        let m = self
            .machines
            .get(n)
            .ok_or(Error::IndexOutOfBounds { index: n, len: self.machines.len() })?
            .clone();
        if let Some(&b) = self.memo.get(&(level, n)) {
            return Ok(b);
        }
        let outcome = if level == 0 {
            run_machine(&m, &mut |_| Some(false))
        } else {
            let bound = self.a.get(n).copied().unwrap_or(0).min(self.machines.len() as u64);
            let mut err = None;
            let outcome = run_machine(&m, &mut |q| {
                if q >= bound {
                    return None;
                }
                match self.bit(level - 1, q as usize) {
                    Ok(b) => Some(b),
                    Err(e) => {
                        err = Some(e);
                        None
                    }
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            outcome
        };
        let b = outcome.halted();
        self.memo.insert((level, n), b);
        Ok(b)
    }
}

pub fn jump_tower_eval(level: u32, machines: &[MachineSpec], n: usize, a: &[u64]) -> Result<bool> {
    JumpTower::new(machines, a).bit(level, n)
}

fn query_machine(name: String, index: u8, negate: bool) -> MachineSpec {
    let i = index as usize;
    let mut p = vec![Instr::Inc(0); i];
    if negate {
        // Set bit: spin; clear bit: halt.
        p.push(Instr::Query { reg: 0, target: i + 2 });
        p.push(Instr::Halt);
        p.push(Instr::Jmp(i + 2));
    } else {
        p.push(Instr::Query { reg: 0, target: i + 2 });
        p.push(Instr::Jmp(i + 1));
        p.push(Instr::Halt);
    }
    MachineSpec::new(name, p).unwrap()
}

/// Twenty machines. Every query issued by machine `n` has an index at most
/// `n`, so the tower over them is insensitive to `A` once `A(n) > n` for
/// the querying machines.
pub fn machine_catalog() -> Vec<MachineSpec> {
    use Instr::*;
    let plain = |name: &str, p: Vec<Instr>| MachineSpec::new(name, p).unwrap();
    let q = |n: usize, index: u8| query_machine(format!("m{n}:bit{index}"), index, false);
    let nq = |n: usize, index: u8| query_machine(format!("m{n}:not-bit{index}"), index, true);
    vec![
        plain("m0:halt", vec![Halt]),
        plain("m1:three-steps", vec![Inc(0), Inc(0), Inc(0), Halt]),
        plain("m2:spin", vec![Jmp(0)]),
        plain("m3:two-steps", vec![Inc(0), Inc(0), Halt]),
        q(4, 3),
        q(5, 2),
        nq(6, 4),
        plain("m7:saturate", vec![Inc(0), Jmp(0)]),
        plain("m8:countdown", vec![Inc(0), Inc(0), Inc(0), Jz(0, 6), Dec(0), Jmp(3), Halt]),
        q(9, 0),
        q(10, 6),
        nq(11, 5),
        plain(
            "m12:bit0-and-bit1",
            vec![Query { reg: 0, target: 2 }, Jmp(1), Inc(0), Query { reg: 0, target: 5 }, Jmp(4), Halt],
        ),
        q(13, 7),
        q(14, 12),
        nq(15, 9),
        q(16, 11),
        q(17, 14),
        plain("m18:two-registers", vec![Inc(1), Jz(0, 0)]),
        nq(19, 16),
    ]
}
