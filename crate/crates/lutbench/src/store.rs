//! Persistence: a single-file container for look-up tables and trained
//! emulators, plus CSV export.
//!
//! # Container layout
//!
//! ```text
//! +--------------------------------------------------+
//! | UTF-8 JSON header, one line, no embedded newline |
//! | b'\n'                                            |
//! | 8-byte magic "LUTBENCH"                          |
//! | payload: raw little-endian f64 blocks,           |
//! |          one per array descriptor, in order      |
//! +--------------------------------------------------+
//! ```
//!
//! The header carries `schema_version` (currently 1), a `kind` tag, a
//! kind-specific `meta` document, and one descriptor per array with its
//! name, shape, and byte offset into the payload. Fixed endianness and an
//! explicit schema make the files portable across platforms, and the
//! human-readable header keeps benchmark artifacts debuggable with nothing
//! more than `head -1`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::rtm::{Geometry, SpectralGrid};
use crate::sampling::{Design, DesignKind, VariableSpec};

/// Magic bytes separating the header from the payload.
pub const MAGIC: [u8; 8] = *b"LUTBENCH";
/// Schema version this build reads and writes.
pub const SCHEMA_VERSION: u64 = 1;

/// Where a LUT came from: a free-text note, the seed that produced it, and
/// a creation tag. The tag is an ordinary string; deterministic pipelines
/// fill it from the seed so regenerated files are bit-identical, interactive
/// callers may stamp wall-clock time instead.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub note: String,
    pub seed: u64,
    pub created: String,
}

impl Provenance {
    /// Deterministic provenance: `created` is derived from the seed.
    pub fn tagged(note: &str, seed: u64) -> Self {
        Provenance {
            note: note.into(),
            seed,
            created: format!("deterministic:seed-{seed}"),
        }
    }

    /// Wall-clock provenance (unix seconds).
    pub fn stamped_now(note: &str, seed: u64) -> Self {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Provenance {
            note: note.into(),
            seed,
            created: format!("unix:{secs}"),
        }
    }
}

/// A look-up table: the design that produced it, the wavelength grid, the
/// fixed geometry, and one radiance spectrum per design row.
#[derive(Debug, Clone)]
pub struct Lut {
    pub design: Design,
    pub grid: SpectralGrid,
    pub geometry: Geometry,
    /// n x K radiance values, row i belonging to design row i.
    pub spectra: Matrix,
    pub provenance: Provenance,
}

impl Lut {
    pub fn len(&self) -> usize {
        self.spectra.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check_invariants(&self) -> Result<()> {
        if self.spectra.rows() != self.design.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} spectra for {} design rows",
                self.spectra.rows(),
                self.design.len()
            )));
        }
        if self.spectra.cols() != self.grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} spectral bands for a grid of {}",
                self.spectra.cols(),
                self.grid.len()
            )));
        }
        Ok(())
    }
}

/// One named f64 array inside a container.
#[derive(Debug, Clone)]
pub struct ArrayBlock {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl ArrayBlock {
    pub fn vector(name: &str, data: Vec<f64>) -> Self {
        ArrayBlock {
            name: name.into(),
            shape: vec![data.len()],
            data,
        }
    }

    pub fn matrix(name: &str, m: &Matrix) -> Self {
        ArrayBlock {
            name: name.into(),
            shape: vec![m.rows(), m.cols()],
            data: m.data().to_vec(),
        }
    }

    pub fn to_matrix(&self) -> Result<Matrix> {
        if self.shape.len() != 2 {
            return Err(Error::ShapeMismatch(format!(
                "array {} has rank {}, expected 2",
                self.name,
                self.shape.len()
            )));
        }
        Matrix::from_vec(self.shape[0], self.shape[1], self.data.clone())
    }
}

#[derive(Serialize, Deserialize)]
struct ArrayDescriptor {
    name: String,
    shape: Vec<usize>,
    offset: u64,
}

#[derive(Serialize, Deserialize)]
struct Header {
    schema_version: u64,
    kind: String,
    meta: serde_json::Value,
    arrays: Vec<ArrayDescriptor>,
}

/// Writes a container file. Arrays are laid out back to back in the order
/// given.
pub fn write_container(
    path: &Path,
    kind: &str,
    meta: serde_json::Value,
    arrays: &[ArrayBlock],
) -> Result<()> {
    let mut descriptors = Vec::with_capacity(arrays.len());
    let mut offset = 0u64;
    for a in arrays {
        let count: usize = a.shape.iter().product();
        if count != a.data.len() {
            return Err(Error::ShapeMismatch(format!(
                "array {}: shape {:?} does not match {} values",
                a.name,
                a.shape,
                a.data.len()
            )));
        }
        descriptors.push(ArrayDescriptor {
            name: a.name.clone(),
            shape: a.shape.clone(),
            offset,
        });
        offset += (a.data.len() * 8) as u64;
    }
    let header = Header {
        schema_version: SCHEMA_VERSION,
        kind: kind.into(),
        meta,
        arrays: descriptors,
    };
    let header_json = serde_json::to_string(&header)
        .map_err(|e| Error::format(path, format!("header serialization: {e}")))?;
    debug_assert!(!header_json.contains('\n'));

    let mut buf = Vec::with_capacity(header_json.len() + 9 + offset as usize);
    buf.extend_from_slice(header_json.as_bytes());
    buf.push(b'\n');
    buf.extend_from_slice(&MAGIC);
    for a in arrays {
        for v in &a.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Reads a container file back, validating magic, schema version, and
/// payload sizes.
pub fn read_container(path: &Path) -> Result<(String, serde_json::Value, Vec<ArrayBlock>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::format(path, "no header line"))?;
    let header: Header = serde_json::from_slice(&bytes[..newline])
        .map_err(|e| Error::format(path, format!("header parse: {e}")))?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(Error::Version {
            path: path.into(),
            found: header.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    let magic_start = newline + 1;
    let payload_start = magic_start + MAGIC.len();
    if bytes.len() < payload_start || bytes[magic_start..payload_start] != MAGIC {
        return Err(Error::format(path, "bad magic"));
    }
    let payload = &bytes[payload_start..];
    let mut arrays = Vec::with_capacity(header.arrays.len());
    for d in &header.arrays {
        let count: usize = d.shape.iter().product();
        let start = d.offset as usize;
        let end = start + count * 8;
        if end > payload.len() {
            return Err(Error::format(
                path,
                format!(
                    "array {} claims {} bytes at offset {}, payload is {}",
                    d.name,
                    count * 8,
                    start,
                    payload.len()
                ),
            ));
        }
        let data: Vec<f64> = payload[start..end]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        arrays.push(ArrayBlock {
            name: d.name.clone(),
            shape: d.shape.clone(),
            data,
        });
    }
    Ok((header.kind, header.meta, arrays))
}

pub(crate) fn find_array<'a>(
    arrays: &'a [ArrayBlock],
    name: &str,
    path: &Path,
) -> Result<&'a ArrayBlock> {
    arrays
        .iter()
        .find(|a| a.name == name)
        .ok_or_else(|| Error::format(path, format!("missing array {name}")))
}

#[derive(Serialize, Deserialize)]
struct LutMeta {
    variables: Vec<VariableSpec>,
    geometry: Geometry,
    design_kind: DesignKind,
    design_seed: u64,
    provenance: Provenance,
}

/// Saves a LUT to a single container file.
pub fn save_lut(lut: &Lut, path: &Path) -> Result<()> {
    lut.check_invariants()?;
    let meta = LutMeta {
        variables: lut.design.specs.clone(),
        geometry: lut.geometry,
        design_kind: lut.design.kind,
        design_seed: lut.design.seed,
        provenance: lut.provenance.clone(),
    };
    let arrays = vec![
        ArrayBlock::vector("wavelengths", lut.grid.wavelengths().to_vec()),
        ArrayBlock::matrix("design_points", &lut.design.points),
        ArrayBlock::matrix("spectra", &lut.spectra),
    ];
    write_container(
        path,
        "lut",
        serde_json::to_value(&meta).map_err(|e| Error::format(path, e.to_string()))?,
        &arrays,
    )
}

/// Exact inverse of [`save_lut`].
pub fn load_lut(path: &Path) -> Result<Lut> {
    let (kind, meta, arrays) = read_container(path)?;
    if kind != "lut" {
        return Err(Error::format(path, format!("container kind {kind:?}, expected \"lut\"")));
    }
    let meta: LutMeta = serde_json::from_value(meta)
        .map_err(|e| Error::format(path, format!("lut metadata: {e}")))?;
    let wavelengths = find_array(&arrays, "wavelengths", path)?.data.clone();
    let grid = SpectralGrid::new(wavelengths)
        .map_err(|e| Error::format(path, format!("stored grid invalid: {e}")))?;
    let points = find_array(&arrays, "design_points", path)?.to_matrix()?;
    let spectra = find_array(&arrays, "spectra", path)?.to_matrix()?;
    let lut = Lut {
        design: Design {
            specs: meta.variables,
            points,
            seed: meta.design_seed,
            kind: meta.design_kind,
        },
        grid,
        geometry: meta.geometry,
        spectra,
        provenance: meta.provenance,
    };
    lut.check_invariants()
        .map_err(|e| Error::format(path, format!("stored lut inconsistent: {e}")))?;
    Ok(lut)
}

/// Writes a LUT as CSV: header of variable names followed by the wavelengths,
/// then one row per node with design values and radiances at 17 significant
/// digits (lossless for f64).
pub fn export_csv(lut: &Lut, path: &Path) -> Result<()> {
    lut.check_invariants()?;
    let mut out = Vec::new();
    let mut header: Vec<String> = lut
        .design
        .specs
        .iter()
        .map(|s| s.name.clone())
        .collect();
    header.extend(lut.grid.wavelengths().iter().map(|w| format!("{w}")));
    writeln!(out, "{}", header.join(",")).expect("vec write");
    for i in 0..lut.len() {
        let mut fields: Vec<String> = lut
            .design
            .points
            .row(i)
            .iter()
            .map(|v| format!("{v:.16e}"))
            .collect();
        fields.extend(lut.spectra.row(i).iter().map(|v| format!("{v:.16e}")));
        writeln!(out, "{}", fields.join(",")).expect("vec write");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rtm::{generate_lut, Geometry, SpectralGrid};
    use crate::sampling::{default_variables, latin_hypercube};

    fn small_lut(n: usize) -> Lut {
        let grid = SpectralGrid::regular(400.0, 2400.0, 200.0).unwrap();
        let geom = Geometry::default();
        let design = latin_hypercube(n, &default_variables(), 11).unwrap();
        generate_lut(&design, &grid, &geom, Provenance::tagged("unit test", 11)).unwrap()
    }

    #[test]
    fn save_load_round_trip_is_bitwise() {
        let lut = small_lut(7);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.lut");
        save_lut(&lut, &path).unwrap();
        let back = load_lut(&path).unwrap();
        assert_eq!(back.design, lut.design);
        assert_eq!(back.grid, lut.grid);
        assert_eq!(back.geometry, lut.geometry);
        assert_eq!(back.spectra, lut.spectra);
        assert_eq!(back.provenance, lut.provenance);
        // Same bytes when saved again.
        let path2 = dir.path().join("t2.lut");
        save_lut(&back, &path2).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }

    #[test]
    fn single_node_lut_round_trips() {
        let lut = small_lut(1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.lut");
        save_lut(&lut, &path).unwrap();
        assert_eq!(load_lut(&path).unwrap().len(), 1);
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let lut = small_lut(1);
        let err = save_lut(&lut, Path::new("/nonexistent-dir/x.lut")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn truncated_payload_rejected() {
        let lut = small_lut(3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.lut");
        save_lut(&lut, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 16);
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(load_lut(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn wrong_magic_rejected() {
        let lut = small_lut(2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.lut");
        save_lut(&lut, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let nl = bytes.iter().position(|&b| b == b'\n').unwrap();
        bytes[nl + 1] = b'X';
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(load_lut(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn future_schema_version_rejected() {
        let lut = small_lut(2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.lut");
        save_lut(&lut, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let nl = bytes.iter().position(|&b| b == b'\n').unwrap();
        let header = String::from_utf8(bytes[..nl].to_vec()).unwrap();
        let bumped = header.replace("\"schema_version\":1", "\"schema_version\":2");
        let mut out = bumped.into_bytes();
        out.extend_from_slice(&bytes[nl..]);
        std::fs::write(&path, out).unwrap();
        assert!(matches!(load_lut(&path), Err(Error::Version { .. })));
    }

    #[test]
    fn csv_export_shape_and_precision() {
        let lut = small_lut(2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        export_csv(&lut, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3, "header plus two node rows");
        let k = lut.grid.len();
        assert_eq!(lines[0].split(',').count(), 6 + k);
        // Values parse back to the exact stored f64.
        let fields: Vec<&str> = lines[1].split(',').collect();
        for (j, f) in fields[6..].iter().enumerate() {
            let parsed: f64 = f.parse().unwrap();
            assert_eq!(parsed.to_bits(), lut.spectra[(0, j)].to_bits());
        }
    }

    #[test]
    fn csv_empty_path_is_io_error() {
        let lut = small_lut(1);
        assert!(matches!(
            export_csv(&lut, Path::new("")),
            Err(Error::Io { .. })
        ));
    }
}
