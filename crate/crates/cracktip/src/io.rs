//! Line-based text formats for meshes, fields, frequency traces and
//! eigenvalue tables.
//!
//! Floats are written in shortest round-trip form, so write → parse → write
//! is bit-exact. Parsers are total: malformed input of any shape yields
//! `Error::Parse`, never a panic — these entry points are fuzzed.

use crate::fem::Field;
use crate::frequency::FrequencyTrace;
use crate::geometry::{CrackProfile, ProfileKind};
use crate::slitmesh::SlitMesh;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// crack profile format
// ---------------------------------------------------------------------------

/// Serialize a crack profile:
///
/// ```text
/// crackprofile <dimension> <r1-or-lipschitz-bound>
/// g <c0> <c1> ...    (polynomial coefficients in y₁; omitted for N = 2)
/// end
/// ```
///
/// Closure-backed profiles are not serializable.
pub fn profile_to_text(profile: &CrackProfile) -> Result<String> {
    let mut out = String::new();
    out.push_str(&format!(
        "crackprofile {} {:?}\n",
        profile.dimension, profile.lipschitz_grad_bound
    ));
    match &profile.kind {
        ProfileKind::HalfLine => {}
        ProfileKind::Polynomial(coeffs) => {
            out.push('g');
            for c in coeffs {
                out.push_str(&format!(" {c:?}"));
            }
            out.push('\n');
        }
        ProfileKind::Custom(_) => {
            return Err(Error::InvalidArgument(
                "closure-backed profiles have no text form".into(),
            ))
        }
    }
    out.push_str("end\n");
    Ok(out)
}

pub fn profile_from_text(text: &str) -> Result<CrackProfile> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(0, "empty input"))?;
    let mut hp = header.split_whitespace();
    if hp.next() != Some("crackprofile") {
        return Err(parse_err(1, "missing 'crackprofile' header"));
    }
    let dimension: usize = parse_tok(hp.next(), 1, "dimension")?;
    let lip: f64 = parse_tok(hp.next(), 1, "Lipschitz bound")?;
    expect_end(hp, 1)?;
    if !(lip.is_finite() && lip >= 0.0) {
        return Err(parse_err(1, "Lipschitz bound must be a finite nonnegative number"));
    }
    let mut coeffs: Option<Vec<f64>> = None;
    let mut ended = false;
    for (idx, line) in lines {
        let lineno = idx + 1;
        if ended {
            if !line.trim().is_empty() {
                return Err(parse_err(lineno, "content after 'end'"));
            }
            continue;
        }
        let mut toks = line.split_whitespace();
        match toks.next() {
            None => continue,
            Some("g") => {
                if coeffs.is_some() {
                    return Err(parse_err(lineno, "duplicate 'g'"));
                }
                let cs: std::result::Result<Vec<f64>, _> = toks.map(|t| t.parse()).collect();
                let cs = cs.map_err(|_| parse_err(lineno, "bad coefficient"))?;
                if cs.iter().any(|c: &f64| !c.is_finite()) {
                    return Err(parse_err(lineno, "non-finite coefficient"));
                }
                coeffs = Some(cs);
            }
            Some("end") => {
                expect_end(toks, lineno)?;
                ended = true;
            }
            Some(other) => return Err(parse_err(lineno, &format!("unknown tag '{other}'"))),
        }
    }
    if !ended {
        return Err(Error::Parse("missing 'end' terminator".into()));
    }
    match (dimension, coeffs) {
        (2, None) => Ok(CrackProfile::half_line()),
        (2, Some(_)) => Err(Error::Parse("a 2D profile carries no height function".into())),
        (n, Some(cs)) if n >= 3 => CrackProfile::polynomial(n, cs, lip),
        (n, None) if n >= 3 => Err(Error::Parse(format!("dimension {n} needs a 'g' line"))),
        (n, _) => Err(Error::Parse(format!("dimension {n} out of range"))),
    }
}

// ---------------------------------------------------------------------------
// mesh format
// ---------------------------------------------------------------------------

/// Serialize a mesh:
///
/// ```text
/// slitmesh <dim>
/// meta <grading_ratio> <levels>
/// v <x> <y> [<z>]     (per vertex)
/// t <a> <b> <c>       (per triangle)
/// cp <upper> <lower>  (per crack pair)
/// tip <id>...
/// ob [<id>...]
/// end
/// ```
pub fn mesh_to_text(mesh: &SlitMesh) -> String {
    let mut out = String::new();
    out.push_str(&format!("slitmesh {}\n", mesh.dim));
    out.push_str(&format!("meta {:?} {}\n", mesh.grading_ratio, mesh.levels));
    for v in &mesh.vertices {
        if mesh.dim == 2 {
            out.push_str(&format!("v {:?} {:?}\n", v[0], v[1]));
        } else {
            out.push_str(&format!("v {:?} {:?} {:?}\n", v[0], v[1], v[2]));
        }
    }
    for t in &mesh.triangles {
        out.push_str(&format!("t {} {} {}\n", t[0], t[1], t[2]));
    }
    for &(u, l) in &mesh.crack_pairs {
        out.push_str(&format!("cp {u} {l}\n"));
    }
    out.push_str("tip");
    for &t in &mesh.tip_vertices {
        out.push_str(&format!(" {t}"));
    }
    out.push('\n');
    out.push_str("ob");
    for &b in &mesh.outer_boundary {
        out.push_str(&format!(" {b}"));
    }
    out.push('\n');
    out.push_str("end\n");
    out
}

/// Parse and structurally validate a mesh. The returned mesh satisfies every
/// SlitMesh invariant (validation failures surface as `Error::Mesh`).
pub fn mesh_from_text(text: &str) -> Result<SlitMesh> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(0, "empty input"))?;
    let mut hp = header.split_whitespace();
    if hp.next() != Some("slitmesh") {
        return Err(parse_err(1, "missing 'slitmesh' header"));
    }
    let dim: usize = parse_tok(hp.next(), 1, "dimension")?;
    if hp.next().is_some() {
        return Err(parse_err(1, "trailing tokens in header"));
    }
    if dim != 2 && dim != 3 {
        return Err(parse_err(1, "dimension must be 2 or 3"));
    }

    let mut grading_ratio = None;
    let mut levels = None;
    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();
    let mut crack_pairs: Vec<(u32, u32)> = Vec::new();
    let mut tip_vertices: Option<Vec<u32>> = None;
    let mut outer_boundary: Option<Vec<u32>> = None;
    let mut ended = false;

    for (idx, line) in lines {
        let lineno = idx + 1;
        if ended {
            if !line.trim().is_empty() {
                return Err(parse_err(lineno, "content after 'end'"));
            }
            continue;
        }
        let mut toks = line.split_whitespace();
        let tag = match toks.next() {
            None => continue, // blank line
            Some(t) => t,
        };
        match tag {
            "meta" => {
                if grading_ratio.is_some() {
                    return Err(parse_err(lineno, "duplicate 'meta'"));
                }
                grading_ratio = Some(parse_tok::<f64>(toks.next(), lineno, "grading ratio")?);
                levels = Some(parse_tok::<u32>(toks.next(), lineno, "levels")?);
                expect_end(toks, lineno)?;
            }
            "v" => {
                let x: f64 = parse_tok(toks.next(), lineno, "x")?;
                let y: f64 = parse_tok(toks.next(), lineno, "y")?;
                let z: f64 = if dim == 3 { parse_tok(toks.next(), lineno, "z")? } else { 0.0 };
                expect_end(toks, lineno)?;
                vertices.push([x, y, z]);
            }
            "t" => {
                let a: u32 = parse_tok(toks.next(), lineno, "index")?;
                let b: u32 = parse_tok(toks.next(), lineno, "index")?;
                let c: u32 = parse_tok(toks.next(), lineno, "index")?;
                expect_end(toks, lineno)?;
                triangles.push([a, b, c]);
            }
            "cp" => {
                let u: u32 = parse_tok(toks.next(), lineno, "upper id")?;
                let l: u32 = parse_tok(toks.next(), lineno, "lower id")?;
                expect_end(toks, lineno)?;
                crack_pairs.push((u, l));
            }
            "tip" => {
                if tip_vertices.is_some() {
                    return Err(parse_err(lineno, "duplicate 'tip'"));
                }
                let ids: std::result::Result<Vec<u32>, _> = toks.map(|t| t.parse()).collect();
                let ids = ids.map_err(|_| parse_err(lineno, "bad tip id"))?;
                if ids.is_empty() {
                    return Err(parse_err(lineno, "'tip' needs at least one id"));
                }
                tip_vertices = Some(ids);
            }
            "ob" => {
                if outer_boundary.is_some() {
                    return Err(parse_err(lineno, "duplicate 'ob'"));
                }
                let ids: std::result::Result<Vec<u32>, _> = toks.map(|t| t.parse()).collect();
                outer_boundary = Some(ids.map_err(|_| parse_err(lineno, "bad boundary id"))?);
            }
            "end" => {
                expect_end(toks, lineno)?;
                ended = true;
            }
            other => return Err(parse_err(lineno, &format!("unknown tag '{other}'"))),
        }
    }
    if !ended {
        return Err(Error::Parse("missing 'end' terminator".into()));
    }
    let mesh = SlitMesh {
        dim,
        vertices,
        triangles,
        crack_pairs,
        tip_vertices: tip_vertices.ok_or_else(|| Error::Parse("missing 'tip' line".into()))?,
        outer_boundary: outer_boundary.ok_or_else(|| Error::Parse("missing 'ob' line".into()))?,
        grading_ratio: grading_ratio.ok_or_else(|| Error::Parse("missing 'meta' line".into()))?,
        levels: levels.unwrap_or(0),
    };
    mesh.validate()?;
    Ok(mesh)
}

// ---------------------------------------------------------------------------
// field format
// ---------------------------------------------------------------------------

/// `field <n>` header, one `<id> <value>` line per vertex, `end`.
pub fn field_to_text(field: &Field) -> String {
    let mut out = String::new();
    out.push_str(&format!("field {}\n", field.values.len()));
    for (i, v) in field.values.iter().enumerate() {
        out.push_str(&format!("{i} {v:?}\n"));
    }
    out.push_str("end\n");
    out
}

pub fn field_from_text(text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(0, "empty input"))?;
    let mut hp = header.split_whitespace();
    if hp.next() != Some("field") {
        return Err(parse_err(1, "missing 'field' header"));
    }
    let n: usize = parse_tok(hp.next(), 1, "length")?;
    if n > 100_000_000 {
        return Err(parse_err(1, "field length out of range"));
    }
    let mut values = vec![f64::NAN; n];
    let mut seen = vec![false; n];
    let mut ended = false;
    for (idx, line) in lines {
        let lineno = idx + 1;
        if ended {
            if !line.trim().is_empty() {
                return Err(parse_err(lineno, "content after 'end'"));
            }
            continue;
        }
        let mut toks = line.split_whitespace();
        let first = match toks.next() {
            None => continue,
            Some(t) => t,
        };
        if first == "end" {
            expect_end(toks, lineno)?;
            ended = true;
            continue;
        }
        let id: usize = first.parse().map_err(|_| parse_err(lineno, "bad vertex id"))?;
        let value: f64 = parse_tok(toks.next(), lineno, "value")?;
        expect_end(toks, lineno)?;
        if id >= n {
            return Err(parse_err(lineno, "vertex id out of range"));
        }
        if seen[id] {
            return Err(parse_err(lineno, "duplicate vertex id"));
        }
        if !value.is_finite() {
            return Err(parse_err(lineno, "non-finite value"));
        }
        seen[id] = true;
        values[id] = value;
    }
    if !ended {
        return Err(Error::Parse("missing 'end' terminator".into()));
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::Parse(format!("missing value for vertex {missing}")));
    }
    Ok(values)
}

// ---------------------------------------------------------------------------
// trace format (plot-ready CSV)
// ---------------------------------------------------------------------------

pub const TRACE_HEADER: &str = "r,H,E,N,H_over_r2gamma";

/// Comma-separated table `r, H, E, N, H/r^{2γ}` with a one-line header.
pub fn trace_to_csv(trace: &FrequencyTrace, gamma: f64) -> String {
    let mut out = String::new();
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for i in 0..trace.len() {
        let r = trace.radii[i];
        out.push_str(&format!(
            "{:?},{:?},{:?},{:?},{:?}\n",
            r,
            trace.h_vals[i],
            trace.e_vals[i],
            trace.n_vals[i],
            trace.h_vals[i] / r.powf(2.0 * gamma),
        ));
    }
    out
}

/// Parse a trace table back into columns (r, H, E, N, H/r^{2γ}).
pub fn trace_from_csv(text: &str) -> Result<Vec<[f64; 5]>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(0, "empty input"))?;
    if header.trim() != TRACE_HEADER {
        return Err(parse_err(1, "bad trace header"));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 5 {
            return Err(parse_err(idx + 1, "expected 5 columns"));
        }
        let mut row = [0.0; 5];
        for (slot, cell) in row.iter_mut().zip(&cells) {
            *slot = cell
                .trim()
                .parse()
                .map_err(|_| parse_err(idx + 1, "bad float"))?;
        }
        rows.push(row);
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// eigenvalue table
// ---------------------------------------------------------------------------

pub const EIGEN_HEADER: &str = "index,k,eigenvalue,residual";

pub fn eigen_table_to_csv(entries: &[(u32, f64, f64)]) -> String {
    let mut out = String::new();
    out.push_str(EIGEN_HEADER);
    out.push('\n');
    for (i, &(k, mu, res)) in entries.iter().enumerate() {
        out.push_str(&format!("{i},{k},{mu:?},{res:?}\n"));
    }
    out
}

pub fn eigen_table_from_csv(text: &str) -> Result<Vec<(u32, f64, f64)>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(0, "empty input"))?;
    if header.trim() != EIGEN_HEADER {
        return Err(parse_err(1, "bad eigen table header"));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 4 {
            return Err(parse_err(idx + 1, "expected 4 columns"));
        }
        let k: u32 = cells[1].trim().parse().map_err(|_| parse_err(idx + 1, "bad k"))?;
        let mu: f64 = cells[2].trim().parse().map_err(|_| parse_err(idx + 1, "bad eigenvalue"))?;
        let res: f64 = cells[3].trim().parse().map_err(|_| parse_err(idx + 1, "bad residual"))?;
        rows.push((k, mu, res));
    }
    Ok(rows)
}

fn parse_err(line: usize, what: &str) -> Error {
    Error::Parse(format!("line {line}: {what}"))
}

fn parse_tok<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.ok_or_else(|| parse_err(line, &format!("missing {what}")))?
        .parse()
        .map_err(|_| parse_err(line, &format!("bad {what}")))
}

fn expect_end<'t>(mut toks: impl Iterator<Item = &'t str>, line: usize) -> Result<()> {
    if toks.next().is_some() {
        return Err(parse_err(line, "trailing tokens"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slitmesh::{make_slit_disk, make_slit_sphere};
    use proptest::prelude::*;

    fn assert_mesh_bit_equal(a: &SlitMesh, b: &SlitMesh) {
        assert_eq!(a.dim, b.dim);
        assert_eq!(a.triangles, b.triangles);
        assert_eq!(a.crack_pairs, b.crack_pairs);
        assert_eq!(a.tip_vertices, b.tip_vertices);
        assert_eq!(a.outer_boundary, b.outer_boundary);
        assert_eq!(a.levels, b.levels);
        assert_eq!(a.grading_ratio.to_bits(), b.grading_ratio.to_bits());
        assert_eq!(a.vertices.len(), b.vertices.len());
        for (va, vb) in a.vertices.iter().zip(&b.vertices) {
            for d in 0..3 {
                assert_eq!(va[d].to_bits(), vb[d].to_bits());
            }
        }
    }

    #[test]
    fn mesh_round_trip_is_bit_exact() {
        let disk = make_slit_disk(1.0, 3, 0.5, 32).unwrap();
        let text = mesh_to_text(&disk);
        let back = mesh_from_text(&text).unwrap();
        assert_mesh_bit_equal(&disk, &back);
        assert_eq!(text, mesh_to_text(&back));

        let sphere = make_slit_sphere(16).unwrap();
        let text = mesh_to_text(&sphere);
        let back = mesh_from_text(&text).unwrap();
        assert_mesh_bit_equal(&sphere, &back);
    }

    #[test]
    fn mesh_parser_rejects_malformed_input() {
        let disk = make_slit_disk(1.0, 1, 0.5, 16).unwrap();
        let good = mesh_to_text(&disk);
        // truncation at every quarter
        for frac in [good.len() / 4, good.len() / 2, 3 * good.len() / 4] {
            let cut = &good[..frac];
            assert!(mesh_from_text(cut).is_err());
        }
        assert!(mesh_from_text("").is_err());
        assert!(mesh_from_text("slitmesh 4\nend\n").is_err());
        assert!(mesh_from_text("slitmesh 2\nmeta 0.5 1\nv nan 0\nend\n").is_err());
        assert!(mesh_from_text(&good.replace("t 0 1", "t 0 999999")).is_err());
        assert!(mesh_from_text(&format!("{good}garbage\n")).is_err());
        // flipping one vertex of a crack pair breaks the twin invariant
        let tampered = good.replacen("cp ", "cp 1 ", 1);
        assert!(mesh_from_text(&tampered).is_err());
    }

    #[test]
    fn trace_round_trip() {
        let sol = crate::exact::ExactSolution::CrackHarmonic { k: 1, amplitude: 1.0 };
        let radii = [0.1, 0.2, 0.4, 0.8];
        let trace = crate::frequency::trace_from_exact(&sol, &radii).unwrap();
        let csv = trace_to_csv(&trace, 0.5);
        let rows = trace_from_csv(&csv).unwrap();
        assert_eq!(rows.len(), 4);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row[0].to_bits(), trace.radii[i].to_bits());
            assert_eq!(row[1].to_bits(), trace.h_vals[i].to_bits());
        }
        assert!(trace_from_csv("nonsense\n1,2,3\n").is_err());
    }

    #[test]
    fn eigen_table_round_trip() {
        let entries = vec![(0u32, 1.2e-12, 3.0e-13), (1, 0.7501, 2.0e-11)];
        let csv = eigen_table_to_csv(&entries);
        let back = eigen_table_from_csv(&csv).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].1.to_bits(), entries[1].1.to_bits());
    }

    #[test]
    fn profile_round_trip() {
        let p = CrackProfile::polynomial(3, vec![0.0, 0.0, 1.0, -0.25], 2.5).unwrap();
        let text = profile_to_text(&p).unwrap();
        let back = profile_from_text(&text).unwrap();
        assert_eq!(back.dimension, 3);
        assert_eq!(back.lipschitz_grad_bound.to_bits(), p.lipschitz_grad_bound.to_bits());
        match back.kind {
            ProfileKind::Polynomial(cs) => {
                assert_eq!(cs, vec![0.0, 0.0, 1.0, -0.25]);
            }
            other => panic!("wrong kind {other:?}"),
        }
        let hl = CrackProfile::half_line();
        let text = profile_to_text(&hl).unwrap();
        assert!(matches!(profile_from_text(&text).unwrap().kind, ProfileKind::HalfLine));
        // profiles violating g(0) = ∇g(0) = 0 are rejected at parse time
        assert!(profile_from_text("crackprofile 3 1.0\ng 0.5\nend\n").is_err());
        assert!(profile_from_text("crackprofile 3 1.0\ng 0.0 0.3\nend\n").is_err());
        assert!(profile_from_text("crackprofile 3 1.0\nend\n").is_err());
    }

    proptest! {
        #[test]
        fn profile_parser_never_panics(text in ".{0,300}") {
            let _ = profile_from_text(&text);
        }

        #[test]
        fn field_round_trip_bit_exact(values in proptest::collection::vec(-1e30f64..1e30, 0..200)) {
            let field = Field { values: values.clone() };
            let text = field_to_text(&field);
            let back = field_from_text(&text).unwrap();
            prop_assert_eq!(back.len(), values.len());
            for (a, b) in back.iter().zip(&values) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }

        #[test]
        fn field_parser_never_panics(text in ".{0,400}") {
            let _ = field_from_text(&text);
        }

        #[test]
        fn mesh_parser_never_panics(text in ".{0,400}") {
            let _ = mesh_from_text(&text);
        }
    }
}
