use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::sync::{Arc, OnceLock};

use num_traits::Zero;

use super::circuit::Circuit;
use crate::error::{Error, Result};
use crate::logic::Natural;
use crate::space::{Event, SampleSpace};

pub type ValueTable = Arc<Vec<Natural>>;

#[derive(Clone, Debug)]
pub enum Backing {
    Table,
    Circuit(Arc<Circuit>),
    /// The sample string read as a natural number.
    Identity,
    Const(Natural),
}

/// How a random variable that was not declared by the user came about.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Declared,
    Synthesized(Synthesis),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Synthesis {
    pub method: SynthesisMethod,
    /// Names of the inputs, in the order they were combined.
    pub sources: Vec<String>,
    pub condition: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthesisMethod {
    /// Fold of definitions by cases on an open condition.
    CaseMerge,
    /// Per-sample selection driven by precomputed events (non-open condition).
    TableMerge,
    /// Pointwise image of a term.
    Term,
    /// Right-nested pairing of a witness tuple.
    Pack,
    /// `2^a - 1`, a string of bit-length `a`.
    LengthWitness,
}

impl fmt::Display for SynthesisMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthesisMethod::CaseMerge => "case-merge",
            SynthesisMethod::TableMerge => "table-merge",
            SynthesisMethod::Term => "term",
            SynthesisMethod::Pack => "pack",
            SynthesisMethod::LengthWitness => "length-witness",
        })
    }
}

struct Inner {
    name: String,
    space: Arc<SampleSpace>,
    backing: Backing,
    provenance: Provenance,
    table: OnceLock<ValueTable>,
    fingerprint: OnceLock<u64>,
}

/// A total function from the sample points of one space to the naturals.
///
/// Cloning is cheap. The value table is computed at most once and shared;
/// semantics depend only on the table.
#[derive(Clone)]
pub struct RandomVariable(Arc<Inner>);

impl fmt::Debug for RandomVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RandomVariable")
            .field("name", &self.0.name)
            .field("backing", &self.0.backing)
            .finish()
    }
}

impl RandomVariable {
    fn build(
        name: &str,
        space: &Arc<SampleSpace>,
        backing: Backing,
        provenance: Provenance,
        table: Option<ValueTable>,
    ) -> RandomVariable {
        let cell = OnceLock::new();
        if let Some(t) = table {
            let _ = cell.set(t);
        }
        RandomVariable(Arc::new(Inner {
            name: name.to_string(),
            space: Arc::clone(space),
            backing,
            provenance,
            table: cell,
            fingerprint: OnceLock::new(),
        }))
    }

    pub fn from_table(name: &str, space: &Arc<SampleSpace>, values: Vec<Natural>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::TableLength {
                expected: space.len(),
                found: values.len(),
            });
        }
        Ok(Self::build(
            name,
            space,
            Backing::Table,
            Provenance::Declared,
            Some(Arc::new(values)),
        ))
    }

    pub fn from_u64s(name: &str, space: &Arc<SampleSpace>, values: &[u64]) -> Result<Self> {
        Self::from_table(name, space, values.iter().map(|&v| Natural::from(v)).collect())
    }

    pub fn identity(name: &str, space: &Arc<SampleSpace>) -> Self {
        Self::build(name, space, Backing::Identity, Provenance::Declared, None)
    }

    pub fn constant(name: &str, space: &Arc<SampleSpace>, value: Natural) -> Self {
        Self::build(name, space, Backing::Const(value), Provenance::Declared, None)
    }

    pub fn from_circuit(name: &str, space: &Arc<SampleSpace>, circuit: Circuit) -> Result<Self> {
        if circuit.inputs() != space.n_bits() as usize {
            return Err(Error::MalformedCircuit(format!(
                "circuit has {} inputs but samples have {} bits",
                circuit.inputs(),
                space.n_bits()
            )));
        }
        Ok(Self::build(
            name,
            space,
            Backing::Circuit(Arc::new(circuit)),
            Provenance::Declared,
            None,
        ))
    }

    pub fn synthesized(
        name: &str,
        space: &Arc<SampleSpace>,
        values: Vec<Natural>,
        synthesis: Synthesis,
    ) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::TableLength {
                expected: space.len(),
                found: values.len(),
            });
        }
        Ok(Self::build(
            name,
            space,
            Backing::Table,
            Provenance::Synthesized(synthesis),
            Some(Arc::new(values)),
        ))
    }

    /// Same values and backing under another name.
    pub fn renamed(&self, name: &str) -> Self {
        Self::build(
            name,
            &self.0.space,
            self.0.backing.clone(),
            self.0.provenance.clone(),
            self.0.table.get().cloned(),
        )
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.0.space
    }

    pub fn backing(&self) -> &Backing {
        &self.0.backing
    }

    pub fn provenance(&self) -> &Provenance {
        &self.0.provenance
    }

    pub fn is_synthesized(&self) -> bool {
        matches!(self.0.provenance, Provenance::Synthesized(_))
    }

    fn compute(&self, index: usize) -> Natural {
        let point = &self.0.space.points()[index];
        match &self.0.backing {
            Backing::Table => unreachable!("table-backed variables are built with their table"),
            Backing::Circuit(c) => c.eval_natural(point),
            Backing::Identity => point.clone(),
            Backing::Const(v) => v.clone(),
        }
    }

    /// The full value table, computed on first use.
    pub fn table(&self) -> &ValueTable {
        self.0
            .table
            .get_or_init(|| Arc::new((0..self.0.space.len()).map(|i| self.compute(i)).collect()))
    }

    /// Value at one sample.
    pub fn value_at(&self, index: usize) -> Result<&Natural> {
        self.table().get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.0.space.len(),
        })
    }

    pub fn fingerprint(&self) -> u64 {
        *self.0.fingerprint.get_or_init(|| {
            let mut h = DefaultHasher::new();
            self.table().hash(&mut h);
            h.finish()
        })
    }

    pub fn key(&self) -> TableKey {
        TableKey {
            fingerprint: self.fingerprint(),
            table: Arc::clone(self.table()),
        }
    }

    pub fn same_values(&self, other: &RandomVariable) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.key() == other.key()
    }

    /// Largest bit-length over the value table.
    pub fn output_bits(&self) -> u64 {
        self.table().iter().map(|v| v.bits()).max().unwrap_or(0)
    }

    pub fn max_value(&self) -> Natural {
        self.table().iter().max().cloned().unwrap_or_else(Natural::zero)
    }

    pub fn is_constant(&self) -> bool {
        let t = self.table();
        t.iter().all(|v| *v == t[0])
    }

    /// `then` on `cond`, `otherwise` elsewhere.
    pub fn select(
        name: &str,
        cond: &Event,
        then: &RandomVariable,
        otherwise: &RandomVariable,
        synthesis: Synthesis,
    ) -> Result<RandomVariable> {
        let space = then.space();
        if then.space().id() != otherwise.space().id() || cond.space_id() != space.id() {
            return Err(Error::SpaceMismatch);
        }
        let (a, b) = (then.table(), otherwise.table());
        let values = (0..space.len())
            .map(|i| if cond.contains(i) { a[i].clone() } else { b[i].clone() })
            .collect();
        RandomVariable::synthesized(name, space, values, synthesis)
    }
}

/// Hash/equality key over a value table: equal keys mean equal tables.
#[derive(Clone, Debug)]
pub struct TableKey {
    fingerprint: u64,
    table: ValueTable,
}

impl PartialEq for TableKey {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint
            && (Arc::ptr_eq(&self.table, &other.table) || self.table == other.table)
    }
}

impl Eq for TableKey {}

impl Hash for TableKey {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.fingerprint.hash(state);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_decodes_sample_string() {
        let s = SampleSpace::exhaustive(3).unwrap();
        let id = RandomVariable::identity("id", &s);
        // index 5 holds the string 101
        assert_eq!(*id.value_at(5).unwrap(), Natural::from(5u32));
        assert!(matches!(
            id.value_at(8),
            Err(Error::IndexOutOfRange { index: 8, len: 8 })
        ));
    }

    #[test]
    fn circuit_backed_values() {
        let s = SampleSpace::exhaustive(2).unwrap();
        let c = Circuit::parse("inputs 2 outputs 1\ng0 = XOR x0 x1\nout = g0").unwrap();
        let rv = RandomVariable::from_circuit("xor", &s, c).unwrap();
        let vals: Vec<u32> = rv.table().iter().map(|v| v.try_into().unwrap()).collect();
        assert_eq!(vals, vec![0, 1, 1, 0]);
        let wrong = Circuit::parity(3).unwrap();
        assert!(RandomVariable::from_circuit("p", &s, wrong).is_err());
    }

    #[test]
    fn extensional_identity() {
        let s = SampleSpace::exhaustive(2).unwrap();
        let a = RandomVariable::from_u64s("a", &s, &[0, 1, 2, 3]).unwrap();
        let b = RandomVariable::identity("b", &s);
        assert!(a.same_values(&b));
        assert_eq!(a.key(), b.key());
        let c = RandomVariable::constant("c", &s, Natural::from(3u32));
        assert!(!a.same_values(&c));
        assert!(c.is_constant());
        assert_eq!(c.output_bits(), 2);
    }

    #[test]
    fn table_length_checked() {
        let s = SampleSpace::exhaustive(2).unwrap();
        assert!(matches!(
            RandomVariable::from_u64s("a", &s, &[1, 2]),
            Err(Error::TableLength {
                expected: 4,
                found: 2
            })
        ));
    }
}
