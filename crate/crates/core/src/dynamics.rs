//! Propagation of the reduced density matrix.
//!
//! Three propagators share one fixed-step RK4 driver:
//!
//! * [`propagate_qsd`] integrates the non-Markovian finite-temperature
//!   hierarchy for `(ρ, O̅_z, O̅_w)`;
//! * [`propagate_lindblad`] integrates its memoryless (`γ → ∞`) Lindblad limit;
//! * [`propagate_closed`] integrates the Schrödinger equation for the pure
//!   initial state.
//!
//! All of them start from `|1⟩⟨1|` (excitation on the first site) with zero
//! auxiliary operators, and track `F(t) = √⟨N|ρ(t)|N⟩`. When an LEO control is
//! supplied, `H(t) = H_s + c(t)|Ψ(t)⟩⟨Ψ(t)|` enters every equation, evaluated at
//! the RK4 substage times.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::control::{pulse_value, LeoControl, PassageCache};
use crate::error::{Error, Result};
use crate::linalg::{gemm_acc, CMatrix, RowSpans, C64, I, ONE, ZERO};
use crate::spin::{basis_index, basis_state, build_xy_hamiltonian, ChainSpec};

/// Environment parameters `(Γ, γ, T)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathParams {
    /// System-bath coupling strength `Γ`.
    pub gamma_coupling: f64,
    /// Bath characteristic frequency `γ` (inverse memory time).
    pub gamma_memory: f64,
    pub temperature: f64,
}

impl BathParams {
    pub fn new(gamma_coupling: f64, gamma_memory: f64, temperature: f64) -> Result<Self> {
        let bath = Self { gamma_coupling, gamma_memory, temperature };
        bath.validate()?;
        Ok(bath)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name, value: f64, ok: bool| {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value })
            }
        };
        check("gamma_coupling", self.gamma_coupling, self.gamma_coupling >= 0.0)?;
        check("gamma_memory", self.gamma_memory, self.gamma_memory > 0.0)?;
        check("temperature", self.temperature, self.temperature >= 0.0)
    }

    /// `(ΓTγ/2 − iΓγ²/2, ΓTγ/2)`, the source terms driving `O̅_z` and `O̅_w`.
    fn sources(&self) -> (C64, C64) {
        let g = self.gamma_coupling;
        let w = self.gamma_memory;
        let thermal = g * self.temperature * w / 2.0;
        (C64::new(thermal, -g * w * w / 2.0), C64::new(thermal, 0.0))
    }

    /// `ΓT/2`, the Lindblad-limit rate.
    fn markov_rate(&self) -> f64 {
        self.gamma_coupling * self.temperature / 2.0
    }
}

/// `(ρ, O̅_z, O̅_w)` at time `time`.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicState {
    pub rho: CMatrix,
    pub o_z: CMatrix,
    pub o_w: CMatrix,
    pub time: f64,
}

impl DynamicState {
    /// `ρ = |1⟩⟨1|`, `O̅_z = O̅_w = 0`, `t = 0`.
    pub fn initial(n_sites: usize) -> Result<Self> {
        let first = basis_state(1, n_sites)?;
        let dim = first.len();
        Ok(Self {
            rho: CMatrix::outer(&first, &first),
            o_z: CMatrix::zeros(dim),
            o_w: CMatrix::zeros(dim),
            time: 0.0,
        })
    }
}

/// Time derivative of a [`DynamicState`].
#[derive(Clone, Debug, PartialEq)]
pub struct Derivative {
    pub rho: CMatrix,
    pub o_z: CMatrix,
    pub o_w: CMatrix,
}

/// Sampled fidelity curve of one propagation.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub fidelities: Vec<f64>,
    pub final_state: DynamicState,
    /// `ρ` at every sampled time, when requested.
    pub rho_snapshots: Option<Vec<CMatrix>>,
}

/// Horizon and resolution of a propagation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagateOptions {
    pub t_total: f64,
    pub n_steps: usize,
    pub record_rho: bool,
}

/// Smallest accepted step count.
pub const MIN_STEPS: usize = 100;
pub const DEFAULT_STEPS: usize = 2000;
pub const DEFAULT_T_TOTAL: f64 = PI / 4.0;

impl Default for PropagateOptions {
    fn default() -> Self {
        Self { t_total: DEFAULT_T_TOTAL, n_steps: DEFAULT_STEPS, record_rho: false }
    }
}

impl PropagateOptions {
    pub fn new(t_total: f64, n_steps: usize) -> Self {
        Self { t_total, n_steps, record_rho: false }
    }

    pub fn recording(mut self) -> Self {
        self.record_rho = true;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_total > 0.0 && self.t_total.is_finite()) {
            return Err(Error::InvalidParameter { name: "t_total", value: self.t_total });
        }
        if self.n_steps < MIN_STEPS {
            return Err(Error::InvalidParameter { name: "n_steps", value: self.n_steps as f64 });
        }
        Ok(())
    }

    fn dt(&self) -> f64 {
        self.t_total / self.n_steps as f64
    }

    fn time(&self, k: usize) -> f64 {
        self.t_total * (k as f64 / self.n_steps as f64)
    }
}

/// Which master equation to integrate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Propagator {
    /// Non-Markovian hierarchy.
    Qsd,
    /// Memoryless limit; `γ` is ignored.
    Lindblad,
}

/// Dispatches to [`propagate_qsd`] or [`propagate_lindblad`].
pub fn propagate(
    propagator: Propagator,
    chain: &ChainSpec,
    lindblad: &CMatrix,
    bath: &BathParams,
    control: Option<&LeoControl>,
    options: &PropagateOptions,
) -> Result<Trajectory> {
    match propagator {
        Propagator::Qsd => propagate_qsd(chain, lindblad, bath, control, options),
        Propagator::Lindblad => propagate_lindblad(chain, lindblad, bath, control, options),
    }
}

/// `√⟨n|ρ|n⟩` for the single-excitation state on site `target_site`, with
/// negative round-off clamped to zero.
pub fn fidelity(rho: &CMatrix, target_site: usize) -> Result<f64> {
    let n_sites = rho.dim().trailing_zeros() as usize;
    if !rho.dim().is_power_of_two() || n_sites < 1 {
        return Err(Error::Shape { expected: 1 << n_sites.max(1), found: rho.dim() });
    }
    let m = basis_index(target_site, n_sites)?;
    Ok(libm::sqrt(rho[(m, m)].re.max(0.0)).min(1.0))
}

/// Largest sampled fidelity and the earliest time it is attained.
pub fn max_fidelity_and_arrival(trajectory: &Trajectory) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, 0.0);
    for (&t, &f) in trajectory.times.iter().zip(&trajectory.fidelities) {
        if f > best.0 {
            best = (f, t);
        }
    }
    best
}

/// Row spans of operators carrying excitation charge `0`, `c` and `−c`, where
/// `c` is the charge of the Lindblad operator.
///
/// Every matrix in the right-hand sides has one of these three charges, so
/// the spans are fixed for a whole propagation.
struct Layout {
    neutral: RowSpans,
    lowered: RowSpans,
    raised: RowSpans,
}

impl Layout {
    fn dense(dim: usize) -> Self {
        Self { neutral: RowSpans::full(dim), lowered: RowSpans::full(dim), raised: RowSpans::full(dim) }
    }

    /// Block spans in excitation order when `lindblad` has a definite charge,
    /// dense spans otherwise.
    fn for_lindblad(order: &ExcitationOrder, lindblad: &CMatrix) -> Self {
        match order.charge_of(lindblad) {
            Some(c) => Self {
                neutral: order.charge_spans(0),
                lowered: order.charge_spans(c),
                raised: order.charge_spans(-c),
            },
            None => Self::dense(lindblad.dim()),
        }
    }
}

/// Scratch space for repeated right-hand-side evaluations.
struct Workspace {
    layout: Layout,
    l: CMatrix,
    l_adj: CMatrix,
    p: CMatrix,
    q: CMatrix,
    x: CMatrix,
    y: CMatrix,
    mm: CMatrix,
    zero: CMatrix,
}

impl Workspace {
    fn new(lindblad: &CMatrix, layout: Layout) -> Self {
        let dim = lindblad.dim();
        Self {
            layout,
            l: lindblad.clone(),
            l_adj: lindblad.adjoint(),
            p: CMatrix::zeros(dim),
            q: CMatrix::zeros(dim),
            x: CMatrix::zeros(dim),
            y: CMatrix::zeros(dim),
            mm: CMatrix::zeros(dim),
            zero: CMatrix::zeros(dim),
        }
    }

    /// Hierarchy right-hand side for Hermitian `ρ`.
    ///
    /// With `P = ρO̅_z†` and `Q = ρO̅_w†`, the density-matrix equation equals
    /// `Z + Z†` for `Z = −iHρ + L(P − Q†) + L†(Q − P†)`, so the sparse `L` only
    /// ever multiplies from the left.
    fn qsd(&mut self, rho: &CMatrix, o_z: &CMatrix, o_w: &CMatrix, h: &CMatrix, bath: &BathParams, out: &mut [CMatrix; 3]) {
        let [d_rho, d_z, d_w] = out;
        let Layout { neutral: s0, lowered: sc, raised: sr } = &self.layout;

        // p = P† = O̅_zρ, q = Q† = O̅_wρ
        zero(&mut self.p, sc);
        zero(&mut self.q, sr);
        gemm_acc(ONE, o_z, sc, rho, s0, &mut self.p);
        gemm_acc(ONE, o_w, sr, rho, s0, &mut self.q);
        adjoint_minus(&mut self.x, &self.p, &self.q, sr);
        adjoint_minus(&mut self.y, &self.q, &self.p, sc);

        zero(d_rho, s0);
        gemm_acc(-I, h, s0, rho, s0, d_rho);
        gemm_acc(ONE, &self.l, sc, &self.x, sr, d_rho);
        gemm_acc(ONE, &self.l_adj, sr, &self.y, sc, d_rho);
        d_rho.add_adjoint_within(s0);

        // M = −iH − (L†O̅_z + LO̅_w)
        scaled_sum(&mut self.mm, -I, h, ZERO, h, s0);
        gemm_acc(-ONE, &self.l_adj, sr, o_z, sc, &mut self.mm);
        gemm_acc(-ONE, &self.l, sc, o_w, sr, &mut self.mm);

        let (source_z, source_w) = bath.sources();
        let decay = C64::new(-bath.gamma_memory, 0.0);

        scaled_sum(d_z, source_z, &self.l, decay, o_z, sc);
        gemm_acc(ONE, &self.mm, s0, o_z, sc, d_z);
        gemm_acc(-ONE, o_z, sc, &self.mm, s0, d_z);

        scaled_sum(d_w, source_w, &self.l_adj, decay, o_w, sr);
        gemm_acc(ONE, &self.mm, s0, o_w, sr, d_w);
        gemm_acc(-ONE, o_w, sr, &self.mm, s0, d_w);
    }

    /// Lindblad right-hand side for Hermitian `ρ`, assembled as `Y + Y†` with
    /// `Y = (−iH − κ(L†L + LL†))ρ + κ(L(Lρ)† + L†(L†ρ)†)`, `κ = ΓT/2`.
    fn lindblad(&mut self, rho: &CMatrix, h: &CMatrix, anti: &CMatrix, rate: f64, out: &mut CMatrix) {
        let Layout { neutral: s0, lowered: sc, raised: sr } = &self.layout;
        scaled_sum(&mut self.mm, -I, h, C64::new(-rate, 0.0), anti, s0);

        zero(out, s0);
        gemm_acc(ONE, &self.mm, s0, rho, s0, out);
        if rate != 0.0 {
            zero(&mut self.p, sc);
            zero(&mut self.q, sr);
            gemm_acc(ONE, &self.l, sc, rho, s0, &mut self.p);
            gemm_acc(ONE, &self.l_adj, sr, rho, s0, &mut self.q);
            adjoint_minus(&mut self.x, &self.p, &self.zero, sr);
            adjoint_minus(&mut self.y, &self.q, &self.zero, sc);
            let k = C64::new(rate, 0.0);
            gemm_acc(k, &self.l, sc, &self.x, sr, out);
            gemm_acc(k, &self.l_adj, sr, &self.y, sc, out);
        }
        out.add_adjoint_within(s0);
    }
}

// The helpers below touch only the entries inside `spans`; everything outside
// is structurally zero and never written.

fn zero(m: &mut CMatrix, spans: &RowSpans) {
    let n = m.dim();
    let data = m.as_mut_slice();
    for i in 0..n {
        let (lo, hi) = spans.get(i);
        data[i * n + lo..i * n + hi].fill(ZERO);
    }
}

/// `dst = a† − b`
fn adjoint_minus(dst: &mut CMatrix, a: &CMatrix, b: &CMatrix, spans: &RowSpans) {
    let n = a.dim();
    for i in 0..n {
        let (lo, hi) = spans.get(i);
        for j in lo..hi {
            dst[(i, j)] = a[(j, i)].conj() - b[(i, j)];
        }
    }
}

/// `dst = s·a + t·b`
fn scaled_sum(dst: &mut CMatrix, s: C64, a: &CMatrix, t: C64, b: &CMatrix, spans: &RowSpans) {
    let n = a.dim();
    let (a, b) = (a.as_slice(), b.as_slice());
    let data = dst.as_mut_slice();
    for i in 0..n {
        let (lo, hi) = spans.get(i);
        let range = i * n + lo..i * n + hi;
        for ((d, x), y) in data[range.clone()].iter_mut().zip(&a[range.clone()]).zip(&b[range]) {
            *d = s * x + t * y;
        }
    }
}

/// Basis permutation grouping states by excitation number.
///
/// Operators that change the excitation number by a fixed amount are
/// block-shaped in this order, which is what the span-restricted products
/// exploit.
struct ExcitationOrder {
    to_old: Vec<usize>,
    to_new: Vec<usize>,
    /// `sectors[m]..sectors[m + 1]` holds the states with `m` excitations.
    sectors: Vec<usize>,
}

impl ExcitationOrder {
    fn new(dim: usize) -> Self {
        let mut to_old: Vec<usize> = (0..dim).collect();
        to_old.sort_by_key(|&s| (s.count_ones(), s));
        let mut to_new = alloc::vec![0; dim];
        for (new, &old) in to_old.iter().enumerate() {
            to_new[old] = new;
        }
        let n_sites = dim.trailing_zeros();
        let sectors = (0..=n_sites + 1)
            .map(|m| to_old.iter().take_while(|s| s.count_ones() < m).count())
            .collect();
        Self { to_old, to_new, sectors }
    }

    fn identity(dim: usize) -> Self {
        Self { to_old: (0..dim).collect(), to_new: (0..dim).collect(), sectors: Vec::new() }
    }

    fn excitations(&self, i: usize) -> i64 {
        self.to_old[i].count_ones() as i64
    }

    /// `Some(c)` when every nonzero entry `(i, j)` of `m` (in this order)
    /// changes the excitation number by `c = n(i) − n(j)`.
    fn charge_of(&self, m: &CMatrix) -> Option<i64> {
        let n = m.dim();
        let mut charge = None;
        for i in 0..n {
            for j in 0..n {
                if m[(i, j)] == ZERO {
                    continue;
                }
                let c = self.excitations(i) - self.excitations(j);
                match charge {
                    None => charge = Some(c),
                    Some(prev) if prev != c => return None,
                    Some(_) => {}
                }
            }
        }
        Some(charge.unwrap_or(0))
    }

    /// Column block of each row for an operator of charge `c`.
    fn charge_spans(&self, c: i64) -> RowSpans {
        let top = self.sectors.len() as i64 - 2;
        RowSpans::from_ranges((0..self.to_old.len()).map(|i| {
            let m = self.excitations(i) - c;
            if (0..=top).contains(&m) {
                (self.sectors[m as usize], self.sectors[m as usize + 1])
            } else {
                (0, 0)
            }
        }))
    }

    fn permute(&self, m: &CMatrix) -> CMatrix {
        CMatrix::from_fn(m.dim(), |i, j| m[(self.to_old[i], self.to_old[j])])
    }

    fn restore(&self, m: &CMatrix) -> CMatrix {
        CMatrix::from_fn(m.dim(), |i, j| m[(self.to_new[i], self.to_new[j])])
    }
}

fn check_dims(expected: usize, mats: &[&CMatrix]) -> Result<()> {
    match mats.iter().find(|m| m.dim() != expected) {
        Some(m) => Err(Error::Shape { expected, found: m.dim() }),
        None => Ok(()),
    }
}

/// Right-hand side of the hierarchy at `state.time`, with `h` the system
/// Hamiltonian evaluated at that time.
///
/// `state.rho` must be Hermitian: the returned `dρ` is exactly Hermitian.
pub fn qsd_rhs(state: &DynamicState, h: &CMatrix, lindblad: &CMatrix, bath: &BathParams) -> Result<Derivative> {
    let dim = state.rho.dim();
    check_dims(dim, &[&state.o_z, &state.o_w, h, lindblad])?;
    let mut ws = Workspace::new(lindblad, Layout::dense(dim));
    let mut out = [CMatrix::zeros(dim), CMatrix::zeros(dim), CMatrix::zeros(dim)];
    ws.qsd(&state.rho, &state.o_z, &state.o_w, h, bath, &mut out);
    let [rho, o_z, o_w] = out;
    Ok(Derivative { rho, o_z, o_w })
}

/// `dρ/dt = −i[H,ρ] + (ΓT/2)[(2LρL† − L†Lρ − ρL†L) + (2L†ρL − LL†ρ − ρLL†)]` for Hermitian `ρ`.
pub fn lindblad_rhs(rho: &CMatrix, h: &CMatrix, lindblad: &CMatrix, bath: &BathParams) -> Result<CMatrix> {
    check_dims(rho.dim(), &[h, lindblad])?;
    let mut ws = Workspace::new(lindblad, Layout::dense(rho.dim()));
    let anti = anticommutator_sum(lindblad);
    let mut out = CMatrix::zeros(rho.dim());
    ws.lindblad(rho, h, &anti, bath.markov_rate(), &mut out);
    Ok(out)
}

/// `L†L + LL†`
fn anticommutator_sum(lindblad: &CMatrix) -> CMatrix {
    let adj = lindblad.adjoint();
    &adj.matmul(lindblad) + &lindblad.matmul(&adj)
}

/// System Hamiltonian on the RK4 half-step grid.
struct HamiltonianSchedule<'a> {
    base: CMatrix,
    control: Option<(Vec<f64>, PassageCache)>,
    order: &'a ExcitationOrder,
}

impl<'a> HamiltonianSchedule<'a> {
    fn new(
        chain: &ChainSpec,
        control: Option<&LeoControl>,
        options: &PropagateOptions,
        order: &'a ExcitationOrder,
    ) -> Result<Self> {
        let base = order.permute(&build_xy_hamiltonian(chain));
        let control = match control {
            Some(ctl) if !ctl.shape.is_none() => {
                ctl.shape.validate()?;
                if ctl.passage.n_sites() != chain.n_sites() {
                    return Err(Error::Shape { expected: chain.dim(), found: 1 << ctl.passage.n_sites() });
                }
                let cache = PassageCache::uniform(&ctl.passage, options.t_total, 2 * options.n_steps);
                let values = cache
                    .sample_times()
                    .iter()
                    .map(|&t| pulse_value(&ctl.shape, t, options.t_total))
                    .collect::<Result<Vec<_>>>()?;
                Some((values, cache))
            }
            _ => None,
        };
        Ok(Self { base, control, order })
    }

    /// `H` at half-step grid index `g` (time `g·dt/2`).
    fn fill(&self, g: usize, out: &mut CMatrix) {
        out.as_mut_slice().copy_from_slice(self.base.as_slice());
        if let Some((values, cache)) = &self.control {
            let c = values[g];
            if c == 0.0 {
                return;
            }
            let psi = cache.state(g);
            let support: Vec<usize> = (0..psi.len()).filter(|&i| psi[i] != ZERO).collect();
            for &i in &support {
                let ci = C64::new(c, 0.0) * psi[i];
                for &j in &support {
                    out[(self.order.to_new[i], self.order.to_new[j])] += ci * psi[j].conj();
                }
            }
        }
    }

    fn is_static(&self) -> bool {
        self.control.is_none()
    }
}

/// Fidelities, final matrices and optional `ρ` snapshots.
type Integrated<const K: usize> = (Vec<f64>, [CMatrix; K], Option<Vec<CMatrix>>);

/// Classical fourth-order Runge-Kutta over `K` coupled matrices.
///
/// `rhs(g, y, out)` receives the half-step grid index of the substage time.
fn integrate<const K: usize>(
    y0: [CMatrix; K],
    options: &PropagateOptions,
    target: usize,
    mut rhs: impl FnMut(usize, &[CMatrix; K], &mut [CMatrix; K]),
) -> Result<Integrated<K>> {
    let dt = options.dt();
    let dim = y0[0].dim();
    let blank = || core::array::from_fn::<CMatrix, K, _>(|_| CMatrix::zeros(dim));
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (blank(), blank(), blank(), blank(), blank());
    let mut y = y0;

    let mut fidelities = Vec::with_capacity(options.n_steps + 1);
    let mut snapshots = options.record_rho.then(|| Vec::with_capacity(options.n_steps + 1));
    let record = |y: &[CMatrix; K], fid: &mut Vec<f64>, snaps: &mut Option<Vec<CMatrix>>| {
        fid.push(libm::sqrt(y[0][(target, target)].re.max(0.0)).min(1.0));
        if let Some(s) = snaps {
            s.push(y[0].clone());
        }
    };
    record(&y, &mut fidelities, &mut snapshots);

    for step in 0..options.n_steps {
        let g = 2 * step;
        rhs(g, &y, &mut k1);
        stage(&mut tmp, &y, 0.5 * dt, &k1);
        rhs(g + 1, &tmp, &mut k2);
        stage(&mut tmp, &y, 0.5 * dt, &k2);
        rhs(g + 1, &tmp, &mut k3);
        stage(&mut tmp, &y, dt, &k3);
        rhs(g + 2, &tmp, &mut k4);
        for i in 0..K {
            let yi = y[i].as_mut_slice();
            let (a, b, c, d) = (k1[i].as_slice(), k2[i].as_slice(), k3[i].as_slice(), k4[i].as_slice());
            for j in 0..yi.len() {
                yi[j] += (a[j] + 2.0 * (b[j] + c[j]) + d[j]) * (dt / 6.0);
            }
        }
        if !y.iter().all(CMatrix::is_finite) {
            return Err(Error::Divergence { step: step + 1, time: options.time(step + 1) });
        }
        record(&y, &mut fidelities, &mut snapshots);
    }
    Ok((fidelities, y, snapshots))
}

fn stage<const K: usize>(tmp: &mut [CMatrix; K], y: &[CMatrix; K], h: f64, k: &[CMatrix; K]) {
    for i in 0..K {
        let out = tmp[i].as_mut_slice();
        for ((o, a), b) in out.iter_mut().zip(y[i].as_slice()).zip(k[i].as_slice()) {
            *o = a + b * h;
        }
    }
}

fn restore_all(order: &ExcitationOrder, snapshots: Option<Vec<CMatrix>>) -> Option<Vec<CMatrix>> {
    snapshots.map(|s| s.iter().map(|m| order.restore(m)).collect())
}

fn finish(options: &PropagateOptions, fidelities: Vec<f64>, final_state: DynamicState, snapshots: Option<Vec<CMatrix>>) -> Trajectory {
    Trajectory {
        times: (0..=options.n_steps).map(|k| options.time(k)).collect(),
        fidelities,
        final_state,
        rho_snapshots: snapshots,
    }
}

/// Integrates the non-Markovian hierarchy from `|1⟩⟨1|`.
pub fn propagate_qsd(
    chain: &ChainSpec,
    lindblad: &CMatrix,
    bath: &BathParams,
    control: Option<&LeoControl>,
    options: &PropagateOptions,
) -> Result<Trajectory> {
    options.validate()?;
    bath.validate()?;
    check_dims(chain.dim(), &[lindblad])?;
    let order = ExcitationOrder::new(chain.dim());
    let schedule = HamiltonianSchedule::new(chain, control, options, &order)?;
    let initial = DynamicState::initial(chain.n_sites())?;
    let target = order.to_new[basis_index(chain.n_sites(), chain.n_sites())?];

    let lindblad = order.permute(lindblad);
    let mut ws = Workspace::new(&lindblad, Layout::for_lindblad(&order, &lindblad));
    let mut h = schedule.base.clone();
    let y0 = [order.permute(&initial.rho), initial.o_z, initial.o_w];
    let (fidelities, [rho, o_z, o_w], snapshots) = integrate(y0, options, target, |g, y, out| {
        if !schedule.is_static() {
            schedule.fill(g, &mut h);
        }
        ws.qsd(&y[0], &y[1], &y[2], &h, bath, out);
    })?;
    let final_state =
        DynamicState { rho: order.restore(&rho), o_z: order.restore(&o_z), o_w: order.restore(&o_w), time: options.t_total };
    Ok(finish(options, fidelities, final_state, restore_all(&order, snapshots)))
}

/// Integrates the Lindblad limit from `|1⟩⟨1|`; `bath.gamma_memory` is unused.
pub fn propagate_lindblad(
    chain: &ChainSpec,
    lindblad: &CMatrix,
    bath: &BathParams,
    control: Option<&LeoControl>,
    options: &PropagateOptions,
) -> Result<Trajectory> {
    options.validate()?;
    bath.validate()?;
    check_dims(chain.dim(), &[lindblad])?;
    let order = ExcitationOrder::new(chain.dim());
    let schedule = HamiltonianSchedule::new(chain, control, options, &order)?;
    let initial = DynamicState::initial(chain.n_sites())?;
    let target = order.to_new[basis_index(chain.n_sites(), chain.n_sites())?];

    let lindblad = order.permute(lindblad);
    let mut ws = Workspace::new(&lindblad, Layout::for_lindblad(&order, &lindblad));
    let anti = anticommutator_sum(&lindblad);
    let rate = bath.markov_rate();
    let mut h = schedule.base.clone();
    let (fidelities, [rho], snapshots) = integrate([order.permute(&initial.rho)], options, target, |g, y, out| {
        if !schedule.is_static() {
            schedule.fill(g, &mut h);
        }
        ws.lindblad(&y[0], &h, &anti, rate, &mut out[0]);
    })?;
    let dim = rho.dim();
    let final_state =
        DynamicState { rho: order.restore(&rho), o_z: CMatrix::zeros(dim), o_w: CMatrix::zeros(dim), time: options.t_total };
    Ok(finish(options, fidelities, final_state, restore_all(&order, snapshots)))
}

/// Closed-system evolution of `|1⟩` under `H(t)`; `ρ` snapshots are `|ψ⟩⟨ψ|`.
pub fn propagate_closed(chain: &ChainSpec, control: Option<&LeoControl>, options: &PropagateOptions) -> Result<Trajectory> {
    options.validate()?;
    let order = ExcitationOrder::identity(chain.dim());
    let schedule = HamiltonianSchedule::new(chain, control, options, &order)?;
    let target = basis_index(chain.n_sites(), chain.n_sites())?;
    let dt = options.dt();
    let mut psi = basis_state(1, chain.n_sites())?;
    let mut h = schedule.base.clone();

    let mut fidelities = Vec::with_capacity(options.n_steps + 1);
    let mut snapshots = options.record_rho.then(Vec::new);
    let mut record = |psi: &[C64], fid: &mut Vec<f64>| {
        fid.push(psi[target].norm().min(1.0));
        if let Some(s) = snapshots.as_mut() {
            s.push(CMatrix::outer(psi, psi));
        }
    };
    record(&psi, &mut fidelities);

    let mut deriv = |g: usize, v: &[C64]| -> Vec<C64> {
        schedule.fill(g, &mut h);
        h.mul_vec(v).into_iter().map(|z| -I * z).collect()
    };
    for step in 0..options.n_steps {
        let g = 2 * step;
        let k1 = deriv(g, &psi);
        let y2: Vec<C64> = psi.iter().zip(&k1).map(|(a, b)| a + b * (0.5 * dt)).collect();
        let k2 = deriv(g + 1, &y2);
        let y3: Vec<C64> = psi.iter().zip(&k2).map(|(a, b)| a + b * (0.5 * dt)).collect();
        let k3 = deriv(g + 1, &y3);
        let y4: Vec<C64> = psi.iter().zip(&k3).map(|(a, b)| a + b * dt).collect();
        let k4 = deriv(g + 2, &y4);
        for j in 0..psi.len() {
            psi[j] += (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]) * (dt / 6.0);
        }
        if !psi.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Divergence { step: step + 1, time: options.time(step + 1) });
        }
        record(&psi, &mut fidelities);
    }

    let rho = CMatrix::outer(&psi, &psi);
    let dim = rho.dim();
    let final_state = DynamicState { rho, o_z: CMatrix::zeros(dim), o_w: CMatrix::zeros(dim), time: options.t_total };
    Ok(finish(options, fidelities, final_state, snapshots))
}
