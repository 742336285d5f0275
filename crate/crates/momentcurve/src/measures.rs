//! Atomic measures on the canonical curves: exact synthesis of moment
//! sequences, forward verification, and numeric extraction of atoms from a
//! successful decision report.
//!
//! Synthesis and verification are exact over the rationals.  Extraction is
//! quarantined numerics: the decision procedures never depend on it, and
//! every extracted measure is verified against the input moments before it
//! is returned.

use crate::conics::unit_circle_premap;
use crate::cubic_circular::{assemble_blocks, compute_work, SolveReport};
use crate::cubic_parabolic::compute_parabolic_work;
use crate::error::{Error, Result};
use crate::exactmath::{rat_approx_f64, rat_from_str, rat_to_string, QuadScalar, Rat, Scalar};
use crate::moments::{moment_matrix, MomentSequence, RgFamily};
use crate::transforms::{pushforward, CanonicalForm};
use crate::univariate::{
    durand_kerner, extract_atoms_hankel, generating_polynomial, solve_hamburger,
    vandermonde_weights, HankelVec,
};
use num_complex::Complex64;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

/// Relative tolerance for the numeric extraction path, overridable through
/// the `MOMENTCURVE_TOL` environment variable. The exact decision path
/// never reads it.
pub fn default_tolerance() -> f64 {
    std::env::var("MOMENTCURVE_TOL")
        .ok()
        .and_then(|s| s.parse::<f64>().ok())
        .filter(|t| t.is_finite() && *t > 0.0)
        .unwrap_or(1e-8)
}

/// A coordinate or weight: exact when it came from synthesis input,
/// floating when it came out of numeric extraction.
#[derive(Debug, Clone)]
pub enum Coord {
    Exact(QuadScalar),
    Approx(f64),
}

impl Coord {
    pub fn rational(r: Rat) -> Self {
        Coord::Exact(QuadScalar::from_rational(r))
    }

    pub fn approx(&self) -> f64 {
        match self {
            Coord::Exact(q) => q.approx_f64(),
            Coord::Approx(v) => *v,
        }
    }

    pub fn to_rat(&self) -> Option<Rat> {
        match self {
            Coord::Exact(q) => q.to_rat(),
            Coord::Approx(_) => None,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Coord::Exact(q) => match q.to_rat() {
                Some(r) => Value::String(rat_to_string(&r)),
                None => json!(q.approx_f64()),
            },
            Coord::Approx(v) => json!(v),
        }
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => rat_from_str(s).map(Coord::rational).ok_or_else(|| {
                Error::InvalidInput(format!("bad rational literal {s:?} in measure"))
            }),
            Value::Number(n) => n
                .as_f64()
                .map(Coord::Approx)
                .ok_or_else(|| Error::InvalidInput(format!("bad number {n} in measure"))),
            other => Err(Error::InvalidInput(format!(
                "measure coordinates must be \"num/den\" strings or numbers, got {other}"
            ))),
        }
    }
}

/// One weighted point.
#[derive(Debug, Clone)]
pub struct Atom {
    pub x: Coord,
    pub y: Coord,
    pub weight: Coord,
}

/// A finite positive combination of point masses.
#[derive(Debug, Clone)]
pub struct AtomicMeasure {
    pub atoms: Vec<Atom>,
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<Atom>) -> Self {
        AtomicMeasure { atoms }
    }

    /// Builds an exact measure from rational triples `(x, y, weight)`.
    pub fn from_rationals(atoms: impl IntoIterator<Item = (Rat, Rat, Rat)>) -> Self {
        AtomicMeasure {
            atoms: atoms
                .into_iter()
                .map(|(x, y, w)| Atom {
                    x: Coord::rational(x),
                    y: Coord::rational(y),
                    weight: Coord::rational(w),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// All atoms as rational triples, when every entry is rational.
    pub fn all_rational(&self) -> Option<Vec<(Rat, Rat, Rat)>> {
        self.atoms
            .iter()
            .map(|a| Some((a.x.to_rat()?, a.y.to_rat()?, a.weight.to_rat()?)))
            .collect()
    }

    /// All atoms as floating triples.
    pub fn approx_atoms(&self) -> Vec<(f64, f64, f64)> {
        self.atoms
            .iter()
            .map(|a| (a.x.approx(), a.y.approx(), a.weight.approx()))
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "atoms": self
                .atoms
                .iter()
                .map(|a| json!({
                    "x": a.x.to_json(),
                    "y": a.y.to_json(),
                    "w": a.weight.to_json(),
                }))
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let atoms = v
            .get("atoms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidInput("measure JSON needs an \"atoms\" array".into()))?;
        let atoms = atoms
            .iter()
            .map(|a| {
                let field = |name: &str| {
                    a.get(name).ok_or_else(|| {
                        Error::InvalidInput(format!("measure atom is missing \"{name}\""))
                    })
                };
                Ok(Atom {
                    x: Coord::from_json(field("x")?)?,
                    y: Coord::from_json(field("y")?)?,
                    weight: Coord::from_json(field("w")?)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AtomicMeasure { atoms })
    }
}

/// A rational point of the circle `a y + x^2 + y^2 = 0` through the
/// tangent-slope parametrization; every rational point except `(0, -a)`
/// arises from some rational `m`.
pub fn circle_atom(a: &Rat, m: &Rat) -> (Rat, Rat) {
    let denom = Rat::one() + m * m;
    (-(a * m) / &denom, -(a * m * m) / denom)
}

use num_traits::One;

/// Exact moments `β_{i,j} = Σ w x^i y^j` of a rational measure on the
/// given canonical curve, for all `i + j <= 2k`.
pub fn synthesize(
    curve: &CanonicalForm,
    measure: &AtomicMeasure,
    k: usize,
) -> Result<MomentSequence<Rat>> {
    let atoms = measure.all_rational().ok_or_else(|| {
        Error::InvalidInput("synthesis needs exact rational atoms and weights".into())
    })?;
    let cubic = curve.cubic();
    for (x, y, w) in &atoms {
        if Scalar::signum(w) <= 0 {
            return Err(Error::InvalidInput(format!(
                "atom ({}, {}) has nonpositive weight {}",
                rat_to_string(x),
                rat_to_string(y),
                rat_to_string(w)
            )));
        }
        let residual = cubic.eval(
            &QuadScalar::from_rational(x.clone()),
            &QuadScalar::from_rational(y.clone()),
        );
        if !residual.is_zero() {
            return Err(Error::InvalidInput(format!(
                "atom ({}, {}) is off the curve: residual {}",
                rat_to_string(x),
                rat_to_string(y),
                residual
            )));
        }
    }
    MomentSequence::from_fn(k, |i, j| {
        let mut acc = Rat::zero();
        for (x, y, w) in &atoms {
            acc += w * x.pow(i as i32) * y.pow(j as i32);
        }
        acc
    })
}

/// Largest relative deviation `|β_{i,j} - m_{i,j}| / (1 + |β_{i,j}|)` of
/// the measure's moments from the sequence. Exact measures are compared
/// exactly, so a synthesis round trip reports zero.
pub fn deviation(seq: &MomentSequence<Rat>, measure: &AtomicMeasure) -> f64 {
    let order = seq.order();
    if let Some(atoms) = measure.all_rational() {
        let mut worst = 0.0f64;
        for (i, j) in order.iter() {
            let mut m = Rat::zero();
            for (x, y, w) in &atoms {
                m += w * x.pow(i as i32) * y.pow(j as i32);
            }
            let err = (seq.get(i, j) - m).abs();
            let denom = 1.0 + rat_approx_f64(seq.get(i, j)).abs();
            worst = worst.max(rat_approx_f64(&err) / denom);
        }
        return worst;
    }
    let atoms = measure.approx_atoms();
    let mut worst = 0.0f64;
    for (i, j) in order.iter() {
        let m: f64 = atoms
            .iter()
            .map(|(x, y, w)| w * x.powi(i as i32) * y.powi(j as i32))
            .sum();
        let want = rat_approx_f64(seq.get(i, j));
        worst = worst.max((want - m).abs() / (1.0 + want.abs()));
    }
    worst
}

/// Whether the measure reproduces the sequence to the relative tolerance.
pub fn verify(seq: &MomentSequence<Rat>, measure: &AtomicMeasure, rel_tol: f64) -> bool {
    deviation(seq, measure) <= rel_tol
}

/// Recovers an atomic measure from a successful decision report by
/// splitting the moment matrix at the report's witness into its line and
/// conic parts and extracting each through its own one-dimensional moment
/// problem. The result is verified against the input moments before it is
/// returned.
pub fn extract(
    seq: &MomentSequence<Rat>,
    curve: &CanonicalForm,
    report: &SolveReport,
) -> Result<AtomicMeasure> {
    if !report.exists {
        return Err(Error::Precondition(
            "extraction needs a report with a representing measure".into(),
        ));
    }
    let (t, u) = report.witness.clone().ok_or_else(|| {
        Error::Precondition("decision report carries no witness point".into())
    })?;
    let tol = default_tolerance();
    let atoms = match curve {
        CanonicalForm::Circular { a } => {
            let a = a.to_rat().ok_or_else(|| {
                Error::Precondition("circular extraction needs a rational parameter".into())
            })?;
            extract_circular(seq, &a, &t, &u, tol)?
        }
        CanonicalForm::Parabolic => extract_parabolic(seq, &t, &u, tol)?,
        other => {
            return Err(Error::Precondition(format!(
                "extraction supports the circular and parabolic curves, not {}",
                other.tag()
            )))
        }
    };
    let measure = AtomicMeasure::new(
        merge_atoms(atoms)
            .into_iter()
            .map(|(x, y, w)| Atom {
                x: Coord::Approx(x),
                y: Coord::Approx(y),
                weight: Coord::Approx(w),
            })
            .collect(),
    );
    let dev = deviation(seq, &measure);
    if dev > tol {
        return Err(Error::Numeric(format!(
            "extracted measure misses the moments: relative deviation {:.3e} exceeds {:.1e}; partial atoms: {}",
            dev,
            tol,
            measure.to_json()
        )));
    }
    for atom in &measure.atoms {
        if atom.weight.approx() <= 0.0 {
            return Err(Error::Numeric(format!(
                "extraction produced a nonpositive weight {:.3e}",
                atom.weight.approx()
            )));
        }
    }
    Ok(measure)
}

fn extract_circular(
    seq: &MomentSequence<Rat>,
    a: &Rat,
    t: &QuadScalar,
    u: &QuadScalar,
    tol: f64,
) -> Result<Vec<(f64, f64, f64)>> {
    let family = RgFamily::Circular { a: a.clone() };
    let blocks = assemble_blocks(seq, &family)?;
    let work = compute_work(&blocks);
    let v = work.line_moments_at(t, u)?;
    let line = line_atoms_from(&v, tol)?;
    let conic_seq = conic_part(seq, &v);
    let rank = moment_matrix(&conic_seq).rank();
    let conic = circle_atoms_numeric(&conic_seq, a, rank)?;
    Ok(line
        .into_iter()
        .map(|(x, w)| (x, 0.0, w))
        .chain(conic)
        .collect())
}

fn extract_parabolic(
    seq: &MomentSequence<Rat>,
    t: &QuadScalar,
    u: &QuadScalar,
    tol: f64,
) -> Result<Vec<(f64, f64, f64)>> {
    let blocks = assemble_blocks(seq, &RgFamily::Parabolic)?;
    let work = compute_parabolic_work(seq, &blocks);
    let v = work.line_moments_at(t, u)?;
    let line = line_atoms_from(&v, tol)?;
    let conic_seq = conic_part(seq, &v);
    let gamma: Vec<QuadScalar> = (0..=4 * seq.k())
        .map(|d| conic_seq.get(d / 2, d % 2).clone())
        .collect();
    let s_atoms = line_atoms_from(&gamma, tol)?;
    Ok(line
        .into_iter()
        .map(|(x, w)| (x, 0.0, w))
        .chain(s_atoms.into_iter().map(|(s, w)| (s * s, s, w)))
        .collect())
}

/// The conic component of the sequence: the line part, supported on
/// `y = 0`, contributes only to the pure-`x` moments, and those
/// contributions are exactly the entries of the line moment vector.
fn conic_part(seq: &MomentSequence<Rat>, line: &[QuadScalar]) -> MomentSequence<QuadScalar> {
    MomentSequence::from_fn(seq.k(), |i, j| {
        let base = QuadScalar::from_rational(seq.get(i, j).clone());
        if j == 0 {
            base - line[i].clone()
        } else {
            base
        }
    })
    .expect("the conic part has the same index range as the input")
}

/// Atoms of a one-variable moment vector, through the exact path when
/// every entry is rational and through root finding on the generating
/// polynomial otherwise.
fn line_atoms_from(v: &[QuadScalar], tol: f64) -> Result<Vec<(f64, f64)>> {
    let rational: Option<Vec<Rat>> = v.iter().map(|q| q.to_rat()).collect();
    if let Some(vals) = rational {
        let hv = HankelVec::new(vals)?;
        return extract_atoms_hankel(&hv, tol);
    }
    let hv = HankelVec::new(v.to_vec())?;
    let rep = solve_hamburger(&hv);
    if !rep.exists {
        return Err(Error::Numeric(
            "component moments at the witness admit no one-variable measure".into(),
        ));
    }
    if rep.atom_count == Some(0) {
        return Ok(Vec::new());
    }
    let gen = generating_polynomial(&hv)?;
    let coeffs: Vec<Complex64> = gen
        .iter()
        .map(|q| Complex64::new(q.approx_f64(), 0.0))
        .collect();
    let bound = 1.0 + coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut nodes = Vec::with_capacity(coeffs.len());
    for z in durand_kerner(&coeffs) {
        if z.im.abs() > 1e-7 * bound {
            return Err(Error::Numeric(format!(
                "complex support point {} + {}i in component extraction",
                z.re, z.im
            )));
        }
        nodes.push(z.re);
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite support points"));
    let moments: Vec<f64> = v.iter().map(|q| q.approx_f64()).collect();
    let weights = vandermonde_weights(&nodes, &moments)?;
    Ok(nodes.into_iter().zip(weights).collect())
}

/// Atoms of the circle component. The component sequence is pushed
/// forward to the unit circle, its trigonometric moments are formed, and
/// the support is read off a kernel polynomial of the Toeplitz moment
/// structure: a least-squares recursion when the component matrix is
/// singular, the para-orthogonal polynomial `z φ + φ*` at full rank.
fn circle_atoms_numeric(
    conic: &MomentSequence<QuadScalar>,
    a: &Rat,
    rank: usize,
) -> Result<Vec<(f64, f64, f64)>> {
    if rank == 0 {
        return Ok(Vec::new());
    }
    let premap = unit_circle_premap(a)?
        .map_scalars(|r| QuadScalar::from_rational(r.clone()));
    let unit = pushforward(conic, &premap)?;
    let n_max = 2 * unit.k();

    let mut c = vec![Complex64::new(0.0, 0.0); n_max + 1];
    for (n, slot) in c.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut binom = 1.0f64;
        for m in 0..=n {
            acc += Complex64::i().powu(m as u32) * binom * unit.get(n - m, m).approx_f64();
            binom = binom * ((n - m) as f64) / ((m + 1) as f64);
        }
        *slot = acc;
    }
    let moment = |idx: i64| -> Complex64 {
        if idx >= 0 {
            c[idx as usize]
        } else {
            c[(-idx) as usize].conj()
        }
    };

    let coeffs: Vec<Complex64> = if rank <= n_max {
        let shifts: Vec<i64> = (-(n_max as i64)..=(n_max as i64 - rank as i64)).collect();
        let mut rows = Vec::with_capacity(shifts.len());
        let mut rhs = Vec::with_capacity(shifts.len());
        for s in shifts {
            rows.push((0..rank).map(|j| moment(s + j as i64)).collect::<Vec<_>>());
            rhs.push(-moment(s + rank as i64));
        }
        lstsq_complex(&rows, &rhs)?
    } else {
        let n = n_max;
        let mut rows = Vec::with_capacity(n);
        let mut rhs = Vec::with_capacity(n);
        for s in 0..n {
            rows.push((0..n).map(|j| moment(j as i64 - s as i64)).collect::<Vec<_>>());
            rhs.push(-moment(n as i64 - s as i64));
        }
        let phi = lstsq_complex(&rows, &rhs)?;
        let phi_coeff = |i: usize| -> Complex64 {
            if i < n {
                phi[i]
            } else {
                Complex64::new(1.0, 0.0)
            }
        };
        (0..=n)
            .map(|j| {
                let from_shift = if j >= 1 {
                    phi_coeff(j - 1)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                from_shift + phi_coeff(n - j).conj()
            })
            .collect()
    };

    let mut zs = Vec::with_capacity(coeffs.len());
    for z in durand_kerner(&coeffs) {
        let modulus = z.norm();
        if (modulus - 1.0).abs() > 1e-4 || modulus == 0.0 {
            return Err(Error::Numeric(format!(
                "circle support point with modulus {modulus} off the unit circle"
            )));
        }
        zs.push(z / modulus);
    }

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(2 * (n_max + 1));
    let mut rhs: Vec<f64> = Vec::with_capacity(2 * (n_max + 1));
    for n in 0..=n_max {
        let powers: Vec<Complex64> = zs.iter().map(|z| z.powu(n as u32)).collect();
        rows.push(powers.iter().map(|p| p.re).collect());
        rhs.push(c[n].re);
        rows.push(powers.iter().map(|p| p.im).collect());
        rhs.push(c[n].im);
    }
    let weights = lstsq_real(&rows, &rhs)?;

    let half = rat_approx_f64(a) / 2.0;
    Ok(zs
        .into_iter()
        .zip(weights)
        .map(|(z, w)| (half.abs() * z.re, half * (z.im - 1.0), w))
        .collect())
}

/// Sums weights of support points closer than the merge radius; keeps the
/// first representative's position.
fn merge_atoms(atoms: Vec<(f64, f64, f64)>) -> Vec<(f64, f64, f64)> {
    let mut merged: Vec<(f64, f64, f64)> = Vec::with_capacity(atoms.len());
    for (x, y, w) in atoms {
        let radius = 1e-9 * (1.0 + x.abs().max(y.abs()));
        match merged
            .iter_mut()
            .find(|(mx, my, _)| (mx - x).abs() <= radius && (my - y).abs() <= radius)
        {
            Some(slot) => slot.2 += w,
            None => merged.push((x, y, w)),
        }
    }
    merged.retain(|(_, _, w)| w.abs() > 1e-13);
    merged
}

/// Least-squares solution of an overdetermined complex system through its
/// normal equations.
fn lstsq_complex(rows: &[Vec<Complex64>], rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let m = rows.len();
    let n = if m == 0 { 0 } else { rows[0].len() };
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut g = vec![vec![Complex64::new(0.0, 0.0); n + 1]; n];
    for p in 0..n {
        for q in 0..n {
            for r in 0..m {
                g[p][q] += rows[r][p].conj() * rows[r][q];
            }
        }
        for r in 0..m {
            g[p][n] += rows[r][p].conj() * rhs[r];
        }
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                g[i][col]
                    .norm()
                    .partial_cmp(&g[j][col].norm())
                    .expect("finite pivots")
            })
            .expect("nonempty pivot range");
        if g[pivot][col].norm() < 1e-250 {
            return Err(Error::Numeric(
                "kernel polynomial system is numerically singular".into(),
            ));
        }
        g.swap(col, pivot);
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = g[row][col] / g[col][col];
            for k in col..=n {
                let delta = f * g[col][k];
                g[row][k] -= delta;
            }
        }
    }
    Ok((0..n).map(|i| g[i][n] / g[i][i]).collect())
}

/// Least-squares solution of an overdetermined real system through its
/// normal equations.
fn lstsq_real(rows: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let complex_rows: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|r| r.iter().map(|x| Complex64::new(*x, 0.0)).collect())
        .collect();
    let complex_rhs: Vec<Complex64> = rhs.iter().map(|x| Complex64::new(*x, 0.0)).collect();
    Ok(lstsq_complex(&complex_rows, &complex_rhs)?
        .into_iter()
        .map(|z| z.re)
        .collect())
}
