//! Small lumped / transmission-line circuits evaluated exactly by nodal
//! analysis. These provide reference impedance tables with known poles.
//!
//! Text format, one item per line, `!` starts a comment:
//!
//! ```text
//! C  a b  80e-15          ! capacitor, farads
//! L  a b  10e-9           ! inductor, henries
//! R  a b  50              ! resistor, ohms
//! T  a b  50 66.2e-12     ! line to ground: Z0 (ohms), delay (s) [, loss (Np)]
//! PORT 1 a 0
//! ```
//!
//! Node `0` (or `gnd`) is ground. A `T` element is a two-conductor line
//! whose return conductor is ground, so it couples `a` and `b` to ground as
//! well as to each other.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::network::{ImpedanceTable, TableSource};
use crate::par::{self, Execution};

pub const GROUND: &str = "0";

/// Pivot ratio below which the nodal matrix is treated as singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-14;

/// Relative bracket width at which pole bisection stops.
pub const POLE_TOLERANCE: f64 = 1e-9;

const TABLE_REFERENCE_IMPEDANCE: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    Capacitor(f64),
    Inductor(f64),
    Resistor(f64),
    /// Characteristic impedance (ohms), one-way delay (s) and total
    /// attenuation αℓ (nepers, zero for an ideal line).
    Line { z0: f64, delay: f64, attenuation: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub kind: ElementKind,
    pub a: String,
    pub b: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Port {
    pub plus: String,
    pub minus: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Netlist {
    elements: Vec<Element>,
    ports: Vec<Port>,
}

/// Result of evaluating a netlist on a frequency grid.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub table: ImpedanceTable,
    /// Grid frequencies (rad/s) dropped because the nodal matrix was
    /// singular there.
    pub skipped: Vec<f64>,
}

/// Outcome of the Foster monotonicity test on a sampled `Im Z_ii`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FosterCheck {
    pub intervals: usize,
    pub poles: usize,
    pub violations: usize,
}

impl FosterCheck {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn canonical_node(name: &str) -> String {
    if name == "0" || name.eq_ignore_ascii_case("gnd") {
        GROUND.to_string()
    } else {
        name.to_string()
    }
}

fn is_ground(name: &str) -> bool {
    name == GROUND
}

impl Netlist {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn ports(&self) -> &[Port] {
        &self.ports
    }

    pub fn port_count(&self) -> usize {
        self.ports.len()
    }

    fn push(&mut self, kind: ElementKind, a: &str, b: &str) -> &mut Self {
        self.elements.push(Element {
            kind,
            a: canonical_node(a),
            b: canonical_node(b),
        });
        self
    }

    pub fn capacitor(&mut self, a: &str, b: &str, farads: f64) -> &mut Self {
        self.push(ElementKind::Capacitor(farads), a, b)
    }

    pub fn inductor(&mut self, a: &str, b: &str, henries: f64) -> &mut Self {
        self.push(ElementKind::Inductor(henries), a, b)
    }

    pub fn resistor(&mut self, a: &str, b: &str, ohms: f64) -> &mut Self {
        self.push(ElementKind::Resistor(ohms), a, b)
    }

    pub fn line(&mut self, a: &str, b: &str, z0: f64, delay: f64) -> &mut Self {
        self.lossy_line(a, b, z0, delay, 0.0)
    }

    pub fn lossy_line(
        &mut self,
        a: &str,
        b: &str,
        z0: f64,
        delay: f64,
        attenuation: f64,
    ) -> &mut Self {
        self.push(
            ElementKind::Line {
                z0,
                delay,
                attenuation,
            },
            a,
            b,
        )
    }

    /// Appends the next port.
    pub fn port(&mut self, plus: &str, minus: &str) -> &mut Self {
        self.ports.push(Port {
            plus: canonical_node(plus),
            minus: canonical_node(minus),
        });
        self
    }

    pub fn is_lossless(&self) -> bool {
        self.elements.iter().all(|e| match e.kind {
            ElementKind::Resistor(_) => false,
            ElementKind::Line { attenuation, .. } => attenuation == 0.0,
            _ => true,
        })
    }

    /// Non-ground nodes in order of first appearance.
    pub fn nodes(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for e in &self.elements {
            for n in [&e.a, &e.b] {
                if !is_ground(n) && !seen.contains(n) {
                    seen.push(n.clone());
                }
            }
        }
        seen
    }

    pub fn validate(&self) -> Result<()> {
        if self.ports.is_empty() {
            return Err(Error::Netlist("no ports defined".into()));
        }
        for e in &self.elements {
            let ok = match e.kind {
                ElementKind::Capacitor(v) | ElementKind::Inductor(v) | ElementKind::Resistor(v) => {
                    v > 0.0 && v.is_finite()
                }
                ElementKind::Line {
                    z0,
                    delay,
                    attenuation,
                } => {
                    z0 > 0.0
                        && delay > 0.0
                        && z0.is_finite()
                        && delay.is_finite()
                        && attenuation >= 0.0
                        && attenuation.is_finite()
                }
            };
            if !ok {
                return Err(Error::Netlist(format!(
                    "element between '{}' and '{}' has a non-positive value",
                    e.a, e.b
                )));
            }
            if e.a == e.b {
                return Err(Error::Netlist(format!(
                    "element connects node '{}' to itself",
                    e.a
                )));
            }
        }
        let nodes = self.nodes();
        let index: HashMap<&str, usize> = nodes
            .iter()
            .enumerate()
            .map(|(k, n)| (n.as_str(), k + 1))
            .collect();
        for (k, p) in self.ports.iter().enumerate() {
            for n in [&p.plus, &p.minus] {
                if !is_ground(n) && !index.contains_key(n.as_str()) {
                    return Err(Error::Netlist(format!(
                        "port {} references unknown node '{n}'",
                        k + 1
                    )));
                }
            }
            if p.plus == p.minus {
                return Err(Error::Netlist(format!("port {} is shorted", k + 1)));
            }
        }
        // Union-find with ground as index 0.
        let mut parent: Vec<usize> = (0..=nodes.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let id = |n: &str| if is_ground(n) { 0 } else { index[n] };
        for e in &self.elements {
            let (a, b) = (id(&e.a), id(&e.b));
            let mut pairs = vec![(a, b)];
            if matches!(e.kind, ElementKind::Line { .. }) {
                pairs.push((a, 0));
            }
            for (x, y) in pairs {
                let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
                parent[rx] = ry;
            }
        }
        let root = find(&mut parent, 0);
        for (k, n) in nodes.iter().enumerate() {
            if find(&mut parent, k + 1) != root {
                return Err(Error::Netlist(format!(
                    "node '{n}' has no path to ground"
                )));
            }
        }
        Ok(())
    }

    fn admittance(&self, omega: f64, index: &HashMap<&str, usize>) -> DMatrix<Complex64> {
        let n = index.len();
        let mut y = DMatrix::<Complex64>::zeros(n, n);
        let node = |s: &str| index.get(s).copied();
        let j = Complex64::i();
        for e in &self.elements {
            let (a, b) = (node(&e.a), node(&e.b));
            match e.kind {
                ElementKind::Capacitor(c) => stamp(&mut y, a, b, j * omega * c),
                ElementKind::Inductor(l) => stamp(&mut y, a, b, 1.0 / (j * omega * l)),
                ElementKind::Resistor(r) => stamp(&mut y, a, b, Complex64::new(1.0 / r, 0.0)),
                ElementKind::Line {
                    z0,
                    delay,
                    attenuation,
                } => {
                    let (y11, y12) = line_admittance(z0, delay, attenuation, omega);
                    for (p, v) in [(a, y11), (b, y11)] {
                        if let Some(p) = p {
                            y[(p, p)] += v;
                        }
                    }
                    if let (Some(a), Some(b)) = (a, b) {
                        y[(a, b)] += y12;
                        y[(b, a)] += y12;
                    }
                }
            }
        }
        y
    }

    fn index(&self) -> (Vec<String>, HashMap<String, usize>) {
        let nodes = self.nodes();
        let map = nodes
            .iter()
            .enumerate()
            .map(|(k, n)| (n.clone(), k))
            .collect();
        (nodes, map)
    }

    fn solve(&self, omega: f64, index: &HashMap<&str, usize>) -> Result<DMatrix<Complex64>> {
        let y = self.admittance(omega, index);
        let n = y.nrows();
        let p = self.ports.len();
        let lu = y.lu();
        let pivots: Vec<f64> = lu.u().diagonal().iter().map(|z| z.norm()).collect();
        let max = pivots.iter().cloned().fold(0.0, f64::max);
        let min = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(max > 0.0) || !(min / max > SINGULAR_PIVOT_RATIO) {
            return Err(Error::Singular(format!(
                "nodal admittance matrix at {omega:.9e} rad/s"
            )));
        }
        let mut rhs = DMatrix::<Complex64>::zeros(n, p);
        for (k, port) in self.ports.iter().enumerate() {
            if let Some(&i) = index.get(port.plus.as_str()) {
                rhs[(i, k)] += 1.0;
            }
            if let Some(&i) = index.get(port.minus.as_str()) {
                rhs[(i, k)] -= 1.0;
            }
        }
        let v = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Singular(format!("nodal solve at {omega:.9e} rad/s")))?;
        let volt = |name: &str, k: usize| {
            index
                .get(name)
                .map(|&i| v[(i, k)])
                .unwrap_or(Complex64::new(0.0, 0.0))
        };
        Ok(DMatrix::from_fn(p, p, |q, k| {
            volt(&self.ports[q].plus, k) - volt(&self.ports[q].minus, k)
        }))
    }

    /// Port impedance matrix (ohms) at one angular frequency.
    pub fn impedance_at(&self, omega: f64) -> Result<DMatrix<Complex64>> {
        self.validate()?;
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(invalid("frequency must be positive"));
        }
        let (_, map) = self.index();
        let index: HashMap<&str, usize> = map.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        self.solve(omega, &index)
    }

    /// Evaluates `Z(ω)` at every grid frequency. Points where the nodal
    /// matrix is singular are dropped and listed in `skipped`.
    pub fn evaluate_z(&self, grid: &[f64], exec: Execution) -> Result<Evaluation> {
        self.validate()?;
        if grid.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(invalid("grid frequencies must be positive"));
        }
        let (_, map) = self.index();
        let index: HashMap<&str, usize> = map.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let results = par::map(exec, grid, |&w| self.solve(w, &index));
        let mut freqs = Vec::with_capacity(grid.len());
        let mut zs = Vec::with_capacity(grid.len());
        let mut skipped = Vec::new();
        for (&w, r) in grid.iter().zip(results) {
            match r {
                Ok(z) => {
                    freqs.push(w);
                    zs.push(z);
                }
                Err(Error::Singular(_)) => {
                    log::warn!("singular nodal matrix at {w:.6e} rad/s; point skipped");
                    skipped.push(w);
                }
                Err(e) => return Err(e),
            }
        }
        let table = ImpedanceTable::new(freqs, zs, TABLE_REFERENCE_IMPEDANCE, TableSource::Netlist)?;
        Ok(Evaluation { table, skipped })
    }

    /// Characteristic frequencies of the circuit: every `1/√(LC)` pair and
    /// the half-wave frequency of every line.
    fn natural_scales(&self) -> Vec<f64> {
        let caps: Vec<f64> = self
            .elements
            .iter()
            .filter_map(|e| match e.kind {
                ElementKind::Capacitor(c) => Some(c),
                _ => None,
            })
            .collect();
        let mut scales = Vec::new();
        for e in &self.elements {
            match e.kind {
                ElementKind::Inductor(l) => {
                    scales.extend(caps.iter().map(|c| 1.0 / (l * c).sqrt()));
                }
                ElementKind::Line { delay, .. } => scales.push(std::f64::consts::PI / delay),
                _ => {}
            }
        }
        scales
    }

    /// Lowest pole of any diagonal port impedance. The netlist must be
    /// lossless.
    pub fn first_resonance(&self) -> Result<f64> {
        self.validate()?;
        let scales = self.natural_scales();
        if scales.is_empty() {
            return Err(Error::NoResonance(
                "netlist has no inductor or transmission line".into(),
            ));
        }
        if !self.is_lossless() {
            return Err(invalid("resonance search needs a lossless netlist"));
        }
        let lo = scales.iter().cloned().fold(f64::INFINITY, f64::min) * 1e-2;
        let hi = scales.iter().cloned().fold(0.0, f64::max) * 1e2;
        let mut best: Option<f64> = None;
        for i in 0..self.ports.len() {
            let poles = self.find_poles(i, i, lo, hi, 4001)?;
            if let Some(&p) = poles.first() {
                best = Some(best.map_or(p, |b: f64| b.min(p)));
            }
        }
        best.ok_or_else(|| Error::NoResonance("no pole visible at any port".into()))
    }

    /// Adds series loss to every inductive branch so that the first
    /// resonance has quality factor `q`. Inductors get a series resistor
    /// `ω_r L / q`; lines get attenuation `ω_r τ / (2q)`. `q = ∞` returns
    /// the netlist unchanged. The input must be lossless.
    pub fn add_series_loss(&self, q: f64) -> Result<Netlist> {
        if q.is_infinite() && q > 0.0 {
            return Ok(self.clone());
        }
        if !(q > 0.0) {
            return Err(invalid("quality factor must be positive"));
        }
        let omega_r = self.first_resonance()?;
        let nodes = self.nodes();
        let mut out = Netlist::new();
        let mut fresh = 0usize;
        for e in &self.elements {
            match e.kind {
                ElementKind::Inductor(l) => {
                    let mid = loop {
                        fresh += 1;
                        let name = format!("{}_{}_r{fresh}", e.a, e.b);
                        if !nodes.contains(&name) {
                            break name;
                        }
                    };
                    out.inductor(&e.a, &mid, l);
                    out.resistor(&mid, &e.b, omega_r * l / q);
                }
                ElementKind::Line {
                    z0,
                    delay,
                    attenuation,
                } => {
                    out.lossy_line(&e.a, &e.b, z0, delay, attenuation + omega_r * delay / (2.0 * q));
                }
                ref k => {
                    out.push(k.clone(), &e.a, &e.b);
                }
            }
        }
        out.ports = self.ports.clone();
        Ok(out)
    }

    /// Poles of `Im Z_ij` in `[lo, hi]`: brackets found on a log grid of
    /// `samples` points, then bisected on the sign of `Im Z_ij` to
    /// [`POLE_TOLERANCE`] relative width. Sign changes whose magnitude
    /// falls below both bracket ends under bisection are zeros and are
    /// discarded. For a driving point of a lossless netlist, an interval
    /// over which `Im Z_ii` fails to increase holds a pole even without a
    /// sign change (a zero and a pole closer than the grid spacing); such
    /// intervals are narrowed until the pole's sign flip shows.
    pub fn find_poles(
        &self,
        i: usize,
        j: usize,
        lo: f64,
        hi: f64,
        samples: usize,
    ) -> Result<Vec<f64>> {
        self.validate()?;
        let p = self.ports.len();
        if i >= p || j >= p {
            return Err(invalid("port index out of range"));
        }
        if !(lo > 0.0 && hi > lo) || samples < 2 {
            return Err(invalid("pole search needs 0 < lo < hi and at least two samples"));
        }
        let (_, map) = self.index();
        let index: HashMap<&str, usize> = map.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let eval = |w: f64| self.solve(w, &index).ok().map(|z| z[(i, j)].im);
        let ratio = (hi / lo).powf(1.0 / (samples - 1) as f64);
        let grid: Vec<f64> = (0..samples).map(|k| lo * ratio.powi(k as i32)).collect();
        let values: Vec<Option<f64>> = grid.iter().map(|&w| eval(w)).collect();
        let foster = i == j && self.is_lossless();

        let mut poles = Vec::new();
        let mut k = 0;
        while k + 1 < grid.len() {
            let (Some(ya), Some(yb)) = (values[k], values[k + 1]) else {
                // A singular sample is itself a pole hit.
                if values[k].is_none() {
                    poles.push(grid[k]);
                }
                k += 1;
                continue;
            };
            let mut bracket = (grid[k], grid[k + 1], ya, yb);
            if foster && ya.signum() == yb.signum() && yb <= ya {
                match narrow_to_flip(&eval, bracket) {
                    Some(b) => bracket = b,
                    None => {
                        k += 1;
                        continue;
                    }
                }
            }
            let (a0, b0, ya, yb) = bracket;
            if ya.signum() != yb.signum() && ya != 0.0 && yb != 0.0 {
                let edge = ya.abs().min(yb.abs());
                let (mut a, mut b, mut sa) = (a0, b0, ya.signum());
                let mut hit = None;
                while (b - a) > POLE_TOLERANCE * 0.5 * (a + b) {
                    let m = 0.5 * (a + b);
                    match eval(m) {
                        None => {
                            hit = Some(m);
                            break;
                        }
                        Some(ym) if ym.signum() == sa => {
                            a = m;
                            sa = ym.signum();
                        }
                        Some(_) => b = m,
                    }
                }
                let inner = match (eval(a), eval(b)) {
                    (Some(fa), Some(fb)) => fa.abs().min(fb.abs()),
                    _ => f64::INFINITY,
                };
                if hit.is_some() || inner > edge {
                    poles.push(hit.unwrap_or(0.5 * (a + b)));
                }
            }
            k += 1;
        }
        Ok(poles)
    }

    pub fn parse(text: &str) -> Result<Netlist> {
        let mut netlist = Netlist::new();
        let mut ports: Vec<(usize, usize, Port)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('!').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            let err = |message: String| Error::Parse { line, message };
            let number = |t: &str| {
                t.parse::<f64>()
                    .map_err(|_| err(format!("invalid number '{t}'")))
            };
            let head = tokens[0].to_ascii_uppercase();
            if head == "PORT" {
                if tokens.len() != 4 {
                    return Err(err("expected 'PORT n node+ node-'".into()));
                }
                let n: usize = tokens[1]
                    .parse()
                    .map_err(|_| err(format!("invalid port number '{}'", tokens[1])))?;
                ports.push((
                    n,
                    line,
                    Port {
                        plus: canonical_node(tokens[2]),
                        minus: canonical_node(tokens[3]),
                    },
                ));
                continue;
            }
            let (min, max) = match head.as_str() {
                "C" | "L" | "R" => (4, 4),
                "T" => (5, 6),
                other => return Err(err(format!("unknown element '{other}'"))),
            };
            if tokens.len() < min || tokens.len() > max {
                return Err(err(format!(
                    "element '{head}' expects {} values",
                    if min == max {
                        "one".to_string()
                    } else {
                        "two or three".to_string()
                    }
                )));
            }
            let values = tokens[3..]
                .iter()
                .map(|t| number(t))
                .collect::<Result<Vec<f64>>>()?;
            let kind = match head.as_str() {
                "C" => ElementKind::Capacitor(values[0]),
                "L" => ElementKind::Inductor(values[0]),
                "R" => ElementKind::Resistor(values[0]),
                _ => ElementKind::Line {
                    z0: values[0],
                    delay: values[1],
                    attenuation: values.get(2).copied().unwrap_or(0.0),
                },
            };
            netlist.push(kind, tokens[1], tokens[2]);
        }
        ports.sort_by_key(|(n, _, _)| *n);
        for (k, (n, line, port)) in ports.into_iter().enumerate() {
            if n != k + 1 {
                return Err(Error::Parse {
                    line,
                    message: format!("ports must be numbered 1..P without gaps (found {n})"),
                });
            }
            netlist.ports.push(port);
        }
        netlist.validate()?;
        Ok(netlist)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Netlist> {
        Netlist::parse(&std::fs::read_to_string(path)?)
    }

    /// Text form accepted by [`Netlist::parse`]; values round-trip exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.elements {
            let _ = match e.kind {
                ElementKind::Capacitor(v) => writeln!(out, "C {} {} {v:e}", e.a, e.b),
                ElementKind::Inductor(v) => writeln!(out, "L {} {} {v:e}", e.a, e.b),
                ElementKind::Resistor(v) => writeln!(out, "R {} {} {v:e}", e.a, e.b),
                ElementKind::Line {
                    z0,
                    delay,
                    attenuation,
                } if attenuation == 0.0 => writeln!(out, "T {} {} {z0:e} {delay:e}", e.a, e.b),
                ElementKind::Line {
                    z0,
                    delay,
                    attenuation,
                } => writeln!(out, "T {} {} {z0:e} {delay:e} {attenuation:e}", e.a, e.b),
            };
        }
        for (k, p) in self.ports.iter().enumerate() {
            let _ = writeln!(out, "PORT {} {} {}", k + 1, p.plus, p.minus);
        }
        out
    }
}

/// Splits a same-sign interval over which `f` decreases until a
/// subinterval shows the `+ → −` flip of a pole. Returns `None` if the
/// decrease disappears (round-off) or a sample is singular.
fn narrow_to_flip(
    f: &dyn Fn(f64) -> Option<f64>,
    (mut a, mut b, mut ya, mut yb): (f64, f64, f64, f64),
) -> Option<(f64, f64, f64, f64)> {
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        let ym = f(m)?;
        if ya > 0.0 && ym < 0.0 {
            return Some((a, m, ya, ym));
        }
        if ym > 0.0 && yb < 0.0 {
            return Some((m, b, ym, yb));
        }
        if ym <= ya {
            b = m;
            yb = ym;
        } else if yb <= ym {
            a = m;
            ya = ym;
        } else {
            return None;
        }
    }
    None
}

fn stamp(y: &mut DMatrix<Complex64>, a: Option<usize>, b: Option<usize>, v: Complex64) {
    if let Some(a) = a {
        y[(a, a)] += v;
    }
    if let Some(b) = b {
        y[(b, b)] += v;
    }
    if let (Some(a), Some(b)) = (a, b) {
        y[(a, b)] -= v;
        y[(b, a)] -= v;
    }
}

/// Self and mutual admittance of a line of impedance `z0`, delay `τ` and
/// attenuation `αℓ`: `Y11 = coth(γℓ)/Z0`, `Y12 = −csch(γℓ)/Z0` with
/// `γℓ = αℓ + jωτ`.
fn line_admittance(z0: f64, delay: f64, attenuation: f64, omega: f64) -> (Complex64, Complex64) {
    let theta = omega * delay;
    if attenuation == 0.0 {
        // Kept separate so the lossless case is exactly imaginary.
        let (s, c) = theta.sin_cos();
        (
            Complex64::new(0.0, -c / (s * z0)),
            Complex64::new(0.0, 1.0 / (s * z0)),
        )
    } else {
        let g = Complex64::new(attenuation, theta);
        let (sh, ch) = (g.sinh(), g.cosh());
        (ch / (sh * z0), -1.0 / (sh * z0))
    }
}

/// Poles of `Im Z_ij` located from table samples alone: adjacent samples
/// of opposite sign whose magnitudes grow towards the crossing. The
/// returned frequencies interpolate `1/Im Z` linearly.
pub fn find_poles_in_table(
    table: &ImpedanceTable,
    i: usize,
    j: usize,
    lo: f64,
    hi: f64,
) -> Result<Vec<f64>> {
    let z = table.element(i, j)?;
    let w = table.frequencies();
    let y: Vec<f64> = z.iter().map(|v| v.im).collect();
    let n = y.len();
    let mut poles = Vec::new();
    for k in 0..n.saturating_sub(1) {
        if w[k] < lo || w[k + 1] > hi {
            continue;
        }
        let (a, b) = (y[k], y[k + 1]);
        if a == 0.0 || b == 0.0 || a.signum() == b.signum() {
            continue;
        }
        let left_grows = k == 0 || y[k - 1].abs() <= a.abs();
        let right_grows = k + 2 >= n || y[k + 2].abs() <= b.abs();
        if left_grows && right_grows {
            let (ra, rb) = (1.0 / a, 1.0 / b);
            poles.push(w[k] + (w[k + 1] - w[k]) * ra / (ra - rb));
        }
    }
    Ok(poles)
}

/// Foster's reactance theorem for a lossless driving-point impedance:
/// `Im Z_ii` increases between poles. Sample intervals across which the
/// value jumps from positive to negative are counted as poles.
pub fn foster_check(table: &ImpedanceTable, i: usize) -> Result<FosterCheck> {
    let y: Vec<f64> = table.element(i, i)?.iter().map(|v| v.im).collect();
    let mut check = FosterCheck {
        intervals: 0,
        poles: 0,
        violations: 0,
    };
    for pair in y.windows(2) {
        check.intervals += 1;
        if pair[0] > 0.0 && pair[1] < 0.0 {
            check.poles += 1;
        } else if !(pair[1] > pair[0]) {
            check.violations += 1;
        }
    }
    Ok(check)
}

/// Foster test with known pole locations: every interval where `Im Z_ii`
/// fails to increase must contain one of `poles`, and every pole inside the
/// table must sit in such an interval. Handles poles too narrow to show a
/// sign change between samples.
pub fn foster_check_with_poles(table: &ImpedanceTable, i: usize, poles: &[f64]) -> Result<FosterCheck> {
    let y: Vec<f64> = table.element(i, i)?.iter().map(|v| v.im).collect();
    let w = table.frequencies();
    let mut check = FosterCheck {
        intervals: 0,
        poles: 0,
        violations: 0,
    };
    for k in 0..y.len().saturating_sub(1) {
        check.intervals += 1;
        let inside = poles.iter().filter(|&&p| p > w[k] && p < w[k + 1]).count();
        let drops = !(y[k + 1] > y[k]);
        match (drops, inside) {
            (true, 1) => check.poles += 1,
            (false, 0) => {}
            _ => check.violations += 1,
        }
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{to_angular, FEMTOFARAD, GHZ};

    fn pi_network() -> Netlist {
        let mut n = Netlist::new();
        n.capacitor("1", "0", 80.0 * FEMTOFARAD)
            .capacitor("2", "0", 80.0 * FEMTOFARAD)
            .capacitor("1", "2", 0.2 * FEMTOFARAD)
            .port("1", "0")
            .port("2", "0");
        n
    }

    #[test]
    fn single_capacitor() {
        let mut n = Netlist::new();
        n.capacitor("a", "gnd", 100.0 * FEMTOFARAD).port("a", "gnd");
        let w = to_angular(5.0 * GHZ);
        let z = n.impedance_at(w).unwrap()[(0, 0)];
        // Independent: 1/(ωC) with ω = 2π·5 GHz
        let expected = -1.0 / (w * 100e-15);
        assert!((z.im - expected).abs() < 1e-10 * expected.abs());
        assert!((z.im + 318.31).abs() < 0.01);
        assert_eq!(z.re, 0.0);
    }

    #[test]
    fn pi_network_transfer_impedance() {
        let (c1, c2, cc) = (80e-15, 80e-15, 0.2e-15);
        let w = to_angular(5.0 * GHZ);
        let z = pi_network().impedance_at(w).unwrap();
        let delta = (c1 + cc) * (c2 + cc) - cc * cc;
        let expected = -cc / (w * delta);
        assert!((z[(0, 1)].im - expected).abs() < 1e-10 * expected.abs());
        assert!((z[(0, 1)].im + 0.9898).abs() < 1e-3);
        assert!((z[(0, 1)] - z[(1, 0)]).norm() < 1e-12 * z[(0, 1)].norm());
    }

    #[test]
    fn text_round_trip() {
        let mut n = pi_network();
        n.inductor("2", "3", 1.234567890123e-9)
            .lossy_line("3", "0", 50.0, 66.2e-12, 1e-4)
            .line("1", "4", 45.5, 1e-11)
            .resistor("4", "0", 1e6);
        let text = n.to_text();
        let back = Netlist::parse(&text).unwrap();
        assert_eq!(back, n);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            Netlist::parse("C a 0 1e-15\nX a 0 1\nPORT 1 a 0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            Netlist::parse("C a 0 1e-15\nPORT 2 a 0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            Netlist::parse("C a 0 -1e-15\nPORT 1 a 0\n"),
            Err(Error::Netlist(_))
        ));
        // floating pair
        assert!(matches!(
            Netlist::parse("C a b 1e-15\nC a 0 1e-15\nC c d 1e-15\nPORT 1 a 0\n"),
            Err(Error::Netlist(_))
        ));
        assert!(matches!(
            Netlist::parse("C a 0 1e-15\nPORT 1 z 0\n"),
            Err(Error::Netlist(_))
        ));
    }

    #[test]
    fn line_admittance_limits() {
        let (z0, tau, w) = (50.0, 50e-12, to_angular(3.0 * GHZ));
        let (y11, y12) = line_admittance(z0, tau, 0.0, w);
        let (l11, l12) = line_admittance(z0, tau, 1e-12, w);
        assert!((y11 - l11).norm() < 1e-9 * y11.norm());
        assert!((y12 - l12).norm() < 1e-9 * y12.norm());
        // Open-ended line input impedance −jZ0 cot(θ).
        let mut n = Netlist::new();
        n.line("a", "b", z0, tau).port("a", "0");
        let z = n.impedance_at(w).unwrap()[(0, 0)];
        let theta = w * tau;
        assert!((z.im + z0 / theta.tan()).abs() < 1e-9 * z.norm());
    }

    #[test]
    fn singular_points_are_skipped() {
        // Open λ/2 stub: pole of Z where sin θ = 0, i.e. ωτ = π.
        let tau = 1e-10;
        let mut n = Netlist::new();
        n.line("a", "b", 50.0, tau).port("a", "0");
        let w0 = std::f64::consts::PI / tau;
        let grid = [0.5 * w0, w0, 1.5 * w0];
        let eval = n.evaluate_z(&grid, Execution::Sequential).unwrap();
        assert_eq!(eval.table.len() + eval.skipped.len(), 3);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let n = pi_network();
        let grid: Vec<f64> = (1..50).map(|k| to_angular(k as f64 * 0.2 * GHZ)).collect();
        let a = n.evaluate_z(&grid, Execution::Sequential).unwrap();
        let b = n.evaluate_z(&grid, Execution::Parallel).unwrap();
        assert_eq!(a.table.matrices(), b.table.matrices());
    }

    #[test]
    fn series_loss_sets_peak_impedance() {
        let (l, c) = (2e-9, 400e-15);
        let mut n = Netlist::new();
        n.inductor("a", "0", l).capacitor("a", "0", c).port("a", "0");
        assert_eq!(n.add_series_loss(f64::INFINITY).unwrap(), n);
        let q = 1e4;
        let lossy = n.add_series_loss(q).unwrap();
        let w0 = 1.0 / (l * c).sqrt();
        let peak = lossy.impedance_at(w0).unwrap()[(0, 0)].re;
        let expected = q * (l / c).sqrt();
        assert!((peak / expected - 1.0).abs() < 0.2, "{peak} vs {expected}");
        assert!(matches!(pi_network().add_series_loss(q), Err(Error::NoResonance(_))));
    }

    #[test]
    fn poles_of_capacitive_network() {
        let n = pi_network();
        let poles = n
            .find_poles(0, 1, to_angular(1.0 * GHZ), to_angular(20.0 * GHZ), 200)
            .unwrap();
        assert!(poles.is_empty());
    }

    #[test]
    fn foster_on_lc() {
        let mut n = Netlist::new();
        n.inductor("a", "0", 2e-9).capacitor("a", "0", 400e-15).port("a", "0");
        let grid: Vec<f64> = (1..400).map(|k| to_angular(k as f64 * 0.05 * GHZ)).collect();
        let t = n.evaluate_z(&grid, Execution::Sequential).unwrap().table;
        let check = foster_check(&t, 0).unwrap();
        assert_eq!(check.poles, 1);
        assert!(check.passed());
        let est = find_poles_in_table(&t, 0, 0, grid[0], grid[grid.len() - 1]).unwrap();
        assert_eq!(est.len(), 1);
        let w0 = 1.0 / (2e-9f64 * 400e-15).sqrt();
        assert!((est[0] / w0 - 1.0).abs() < 1e-3);
        let exact = n.find_poles(0, 0, grid[0], grid[grid.len() - 1], 400).unwrap();
        assert_eq!(foster_check_with_poles(&t, 0, &exact).unwrap(), check);
        assert!(!foster_check_with_poles(&t, 0, &[]).unwrap().passed());
    }
}
