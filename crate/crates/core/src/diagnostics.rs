//! Energies, helicities, the `Phi`/`Psi` deviations and their CSV form.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::spectral::{curl_hat, inhomogeneous_norm, invert_curl, SpectralVectorField};

/// `(E_u, E_B, E)`; no factor one half.
pub fn energy(u: &SpectralVectorField, b: &SpectralVectorField) -> (f64, f64, f64) {
    let eu = u.energy();
    let eb = b.energy();
    (eu, eb, eu + eb)
}

/// `int A . B dx` with `A` the divergence-free, mean-zero potential of `B`.
pub fn magnetic_helicity(b: &SpectralVectorField) -> Result<f64> {
    let a = invert_curl(b)?;
    Ok(a.inner(b))
}

/// `int (A + u) . (B + omega) dx`.
///
/// The mean of `u` pairs only with the mean of `B + omega`, which is zero.
pub fn magneto_vorticity_helicity(u: &SpectralVectorField, b: &SpectralVectorField) -> Result<f64> {
    u.check_grid(b)?;
    let a = invert_curl(b)?;
    let omega = curl_hat(u);
    let value = a.add(u).inner(&b.add(&omega));
    debug_assert!({
        let cross = a.inner(b) + 2.0 * u.inner(b) + u.inner(&omega);
        (cross - value).abs()
            <= 1e-10 * (1.0 + a.energy() + b.energy() + u.energy() + omega.energy())
    });
    Ok(value)
}

/// `Phi = B + curl u - alpha u` and `Psi = u - curl B + beta B` with their norms.
#[derive(Debug, Clone)]
pub struct PhiPsi {
    pub phi: SpectralVectorField,
    pub psi: SpectralVectorField,
    pub phi_l2: f64,
    pub phi_h12: f64,
    pub psi_l2: f64,
    pub psi_h12: f64,
}

impl PhiPsi {
    /// `||Phi||_{H^1/2}^2 + ||Psi||_{H^1/2}^2`.
    pub fn h12_sum_sq(&self) -> f64 {
        self.phi_h12 * self.phi_h12 + self.psi_h12 * self.psi_h12
    }
}

pub fn phi_psi(u: &SpectralVectorField, b: &SpectralVectorField, alpha: f64, beta: f64) -> PhiPsi {
    let phi = b.add(&curl_hat(u)).axpy(-alpha, u);
    let psi = u.sub(&curl_hat(b)).axpy(beta, b);
    PhiPsi {
        phi_l2: phi.norm_l2(),
        phi_h12: inhomogeneous_norm(&phi, 0.5),
        psi_l2: psi.norm_l2(),
        psi_h12: inhomogeneous_norm(&psi, 0.5),
        phi,
        psi,
    }
}

/// One diagnostics row. Optional entries render as empty CSV cells.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub e_u: f64,
    pub e_b: f64,
    pub e: f64,
    pub h_b: Option<f64>,
    pub h_bw: Option<f64>,
    pub phi_l2: Option<f64>,
    pub phi_h12: Option<f64>,
    pub psi_l2: Option<f64>,
    pub psi_h12: Option<f64>,
    pub err_u: Option<f64>,
    pub err_b: Option<f64>,
}

impl DiagnosticsRecord {
    /// Measures a state. Helicities are left empty when `mean(B) != 0`,
    /// `Phi`/`Psi` when no Beltrami factors are given.
    pub fn measure(
        t: f64,
        u: &SpectralVectorField,
        b: &SpectralVectorField,
        factors: Option<(f64, f64)>,
        errors: Option<(f64, f64)>,
    ) -> Self {
        let (e_u, e_b, e) = energy(u, b);
        let (h_b, h_bw) = if b.has_zero_mean() {
            (
                magnetic_helicity(b).ok(),
                magneto_vorticity_helicity(u, b).ok(),
            )
        } else {
            (None, None)
        };
        let pp = factors.map(|(a, be)| phi_psi(u, b, a, be));
        Self {
            t,
            e_u,
            e_b,
            e,
            h_b,
            h_bw,
            phi_l2: pp.as_ref().map(|p| p.phi_l2),
            phi_h12: pp.as_ref().map(|p| p.phi_h12),
            psi_l2: pp.as_ref().map(|p| p.psi_l2),
            psi_h12: pp.as_ref().map(|p| p.psi_h12),
            err_u: errors.map(|e| e.0),
            err_b: errors.map(|e| e.1),
        }
    }

    fn cells(&self) -> [Option<f64>; 12] {
        [
            Some(self.t),
            Some(self.e_u),
            Some(self.e_b),
            Some(self.e),
            self.h_b,
            self.h_bw,
            self.phi_l2,
            self.phi_h12,
            self.psi_l2,
            self.psi_h12,
            self.err_u,
            self.err_b,
        ]
    }

    fn from_cells(c: [Option<f64>; 12]) -> Result<Self> {
        let req = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::InvalidInput(format!("missing {name}")))
        };
        Ok(Self {
            t: req(c[0], "t")?,
            e_u: req(c[1], "E_u")?,
            e_b: req(c[2], "E_B")?,
            e: req(c[3], "E")?,
            h_b: c[4],
            h_bw: c[5],
            phi_l2: c[6],
            phi_h12: c[7],
            psi_l2: c[8],
            psi_h12: c[9],
            err_u: c[10],
            err_b: c[11],
        })
    }
}

/// Stable column order of the diagnostics CSV.
pub const CSV_HEADER: [&str; 12] = [
    "t", "E_u", "E_B", "E", "H_B", "H_Bw", "phi_l2", "phi_h12", "psi_l2", "psi_h12", "err_u",
    "err_B",
];

/// Shortest representation that parses back to the same `f64`.
fn fmt_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

/// Streams records as CSV rows under a writer that may already hold `#` comment lines.
pub struct CsvSink<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> CsvSink<W> {
    pub fn new(w: W) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        inner.write_record(CSV_HEADER)?;
        Ok(Self { inner })
    }

    pub fn push(&mut self, r: &DiagnosticsRecord) -> Result<()> {
        self.inner.write_record(r.cells().map(fmt_cell))?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        self.inner
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}

pub fn emit_csv<W: Write>(records: &[DiagnosticsRecord], w: W) -> Result<()> {
    let mut sink = CsvSink::new(w)?;
    for r in records {
        sink.push(r)?;
    }
    sink.flush()
}

pub fn csv_bytes(records: &[DiagnosticsRecord]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    emit_csv(records, &mut out)?;
    Ok(out)
}

fn parse_cell(s: &str) -> Result<Option<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::InvalidInput(format!("not a number: {s:?}")))
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r)
}

/// Parses a diagnostics CSV, skipping `#` comment lines.
pub fn read_csv<R: Read>(r: R) -> Result<Vec<DiagnosticsRecord>> {
    let mut rdr = reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(Error::InvalidInput(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let mut cells = [None; 12];
        for (i, c) in cells.iter_mut().enumerate() {
            *c = parse_cell(row.get(i).unwrap_or(""))?;
        }
        out.push(DiagnosticsRecord::from_cells(cells)?);
    }
    Ok(out)
}

/// `(t, value)` pairs of one named column; rows with an empty cell are skipped.
pub fn read_column<R: Read>(r: R, column: &str) -> Result<Vec<(f64, f64)>> {
    let mut rdr = reader(r);
    let header = rdr.headers()?.clone();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidInput(format!("missing column {name:?}")))
    };
    let (it, ic) = (find("t")?, find(column)?);
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let t = parse_cell(row.get(it).unwrap_or(""))?;
        let v = parse_cell(row.get(ic).unwrap_or(""))?;
        if let (Some(t), Some(v)) = (t, v) {
            out.push((t, v));
        }
    }
    Ok(out)
}
