//! On-disk formats: CSV tables, Fock state dumps and coefficient tables.

use std::fmt::Write as _;
use std::io::{self, Write};

use hempss_core::canonical::CanonicalParams;
use hempss_core::fock::FockState;
use hempss_core::hamiltonian::HamiltonianCoefficients;
use hempss_core::oracle::OracleResult;
use hempss_core::processes::{PumpRef, ProcessTerm};
use hempss_core::statistics::PndGrid;
use hempss_core::C64;
use serde::{Deserialize, Serialize};

/// Amplitudes below this modulus are left out of state dumps.
pub const DUMP_FLOOR: f64 = 1e-15;

/// `x` rounded to 12 significant digits, printed in the shortest form that
/// reads back to the rounded value. Tiny and huge magnitudes use exponents.
pub fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float");
    let a = r.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// `x` with 17 significant digits, enough to read back bit for bit.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        // JSON has no infinities
        "null".into()
    }
}

/// A CSV table: a `#` line naming the parameters used, the header row, then
/// data rows. Fields are written with [`sig12`] by the caller.
pub struct CsvTable {
    pub params: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(params: Vec<(String, String)>, header: &[&str]) -> Self {
        Self { params, header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        if !self.params.is_empty() {
            let line: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            writeln!(out, "# {}", line.join(" "))?;
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        buf
    }
}

/// Parameter list used in CSV preambles and parameter columns.
pub fn param_fields(p: &CanonicalParams, beta1: C64, beta2: C64) -> Vec<(String, String)> {
    vec![
        ("r".into(), sig12(p.r)),
        ("phi".into(), sig12(p.phi)),
        ("gamma_mod".into(), sig12(p.gamma_mod)),
        ("chi_mod".into(), sig12(p.chi_mod)),
        ("delta1".into(), sig12(p.delta1)),
        ("delta2".into(), sig12(p.delta2)),
        ("theta1".into(), sig12(p.theta1)),
        ("theta2".into(), sig12(p.theta2)),
        ("order".into(), p.order.to_string()),
        ("beta1_re".into(), sig12(beta1.re)),
        ("beta1_im".into(), sig12(beta1.im)),
        ("beta2_re".into(), sig12(beta2.re)),
        ("beta2_im".into(), sig12(beta2.im)),
    ]
}

pub const PARAM_COLUMNS: [&str; 13] = [
    "r", "phi", "gamma_mod", "chi_mod", "delta1", "delta2", "theta1", "theta2", "order", "beta1_re", "beta1_im",
    "beta2_re", "beta2_im",
];

/// `pnd.csv`: one row per `(n1, n2)`.
pub fn pnd_table(params: Vec<(String, String)>, g: &PndGrid) -> CsvTable {
    let mut t = CsvTable::new(params, &["n1", "n2", "P"]);
    for n1 in 0..=g.n_max {
        for n2 in 0..=g.n_max {
            t.push(vec![n1.to_string(), n2.to_string(), sig12(g.get(n1, n2))]);
        }
    }
    t
}

/// Fock state dump `{cutoff, entries}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDump {
    pub cutoff: [usize; 2],
    pub entries: Vec<(usize, usize, f64, f64)>,
}

impl StateDump {
    pub fn from_state(s: &FockState) -> Self {
        let c = s.cutoff();
        let mut entries = Vec::new();
        for n1 in 0..=c.n1_max {
            for n2 in 0..=c.n2_max {
                let a = s.amplitude(n1, n2);
                if a.norm() >= DUMP_FLOOR {
                    entries.push((n1, n2, a.re, a.im));
                }
            }
        }
        Self { cutoff: [c.n1_max, c.n2_max], entries }
    }

    pub fn to_state(&self) -> hempss_core::Result<FockState> {
        let c = hempss_core::fock::FockCutoff::new(self.cutoff[0], self.cutoff[1])?;
        let mut amps = vec![C64::new(0.0, 0.0); c.dim()];
        for &(n1, n2, re, im) in &self.entries {
            if n1 > c.n1_max || n2 > c.n2_max {
                return Err(hempss_core::Error::OutOfRange(format!("entry ({n1}, {n2}) beyond the cutoff")));
            }
            amps[c.index(n1, n2)] = C64::new(re, im);
        }
        FockState::from_amplitudes(c, amps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleMeta {
    pub residual1: f64,
    pub residual2: f64,
    pub full_residual1: f64,
    pub full_residual2: f64,
    pub route: hempss_core::oracle::Route,
    /// Absent until the other route has been compared.
    pub fidelity: Option<f64>,
}

/// Oracle state in the dump format plus its metadata block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleDump {
    #[serde(flatten)]
    pub state: StateDump,
    pub metadata: OracleMeta,
}

impl OracleDump {
    pub fn new(o: &OracleResult) -> Self {
        let f = o.fidelity_vs_other_route;
        Self {
            state: StateDump::from_state(&o.state),
            metadata: OracleMeta {
                residual1: o.residual1,
                residual2: o.residual2,
                full_residual1: o.full_residual1,
                full_residual2: o.full_residual2,
                route: o.route,
                fidelity: f.is_finite().then_some(f),
            },
        }
    }
}

/// Coefficient table as JSON with 17 significant digits per number.
pub fn coefficients_json(c: &HamiltonianCoefficients) -> String {
    let mut s = String::from("{\n");
    let entries = c.entries();
    for (i, (name, v)) in entries.iter().enumerate() {
        let sep = if i + 1 == entries.len() { "" } else { "," };
        if matches!(*name, "A0" | "B0" | "C0") {
            let _ = writeln!(s, "  \"{name}\": {}{sep}", sig17(v.re));
        } else {
            let _ = writeln!(s, "  \"{name}\": [{}, {}]{sep}", sig17(v.re), sig17(v.im));
        }
    }
    s.push_str("}\n");
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub j: u32,
    pub s: u32,
    pub l: u32,
    pub m: u32,
    pub order: u32,
    pub pumps: Vec<PumpRef>,
    pub kappa: String,
}

impl From<&ProcessTerm> for TermRecord {
    fn from(t: &ProcessTerm) -> Self {
        Self { j: t.j, s: t.s, l: t.l, m: t.m, order: t.order, pumps: t.pumps.clone(), kappa: t.kappa_label() }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable value");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(sig12(0.1 + 0.2), "0.3");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(-2.5e-30), "-2.5e-30");
        assert_eq!(sig12(123456789012345.0), "123456789012000");
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(f64::NAN), "NaN");
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.355567954, 1e-300] {
            let s = sig17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert_eq!(s.split('e').next().unwrap().chars().filter(char::is_ascii_digit).count(), 17);
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = CsvTable::new(vec![("r".into(), "0.8".into())], &["a", "note"]);
        t.push(vec!["1".into(), "x, y".into()]);
        let s = String::from_utf8(t.to_bytes()).unwrap();
        assert_eq!(s, "# r=0.8\na,note\n1,\"x, y\"\n");
    }

    #[test]
    fn state_dump_round_trip() {
        let c = hempss_core::fock::FockCutoff::new(2, 3).unwrap();
        let mut amps = vec![C64::new(0.0, 0.0); c.dim()];
        amps[c.index(1, 2)] = C64::new(0.6, 0.0);
        amps[c.index(2, 0)] = C64::new(0.0, -0.8);
        amps[c.index(0, 0)] = C64::new(1e-17, 0.0);
        let s = FockState::from_amplitudes(c, amps).unwrap();
        let d = StateDump::from_state(&s);
        assert_eq!(d.entries.len(), 2);
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.starts_with("{\"cutoff\":[2,3],\"entries\":[[1,2,0.6,0.0]"));
        let back: StateDump = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_state().unwrap().amplitude(2, 0), C64::new(0.0, -0.8));
    }
}
