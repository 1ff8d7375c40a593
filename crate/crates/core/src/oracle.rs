//! Brute-force cross-check: replace the band by N discrete levels, solve
//! the resulting (N+1)-level eigenproblem exactly, and evolve the survival
//! amplitude as a finite sum over eigenstates. Everything here is
//! elementary linear algebra — no contour integrals, no self-energies — so
//! it validates the analytic machinery from a fully independent direction.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::amplitude::SurvivalSeries;
use crate::band_models::{BandModel, SystemParams};
use crate::error::{Error, Result};
use crate::numerics;

/// How the band interval is sampled into discrete levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRule {
    /// Gauss–Legendre nodes and weights mapped onto the band. Converges
    /// spectrally in N for smooth profiles; the default.
    GaussLegendre,
    /// N equal panels with midpoint nodes and uniform weights. Converges
    /// slowly, but for a flat profile it yields equally spaced levels with
    /// equal couplings — the textbook setup whose recurrences are exactly
    /// periodic.
    Uniform,
}

/// A discrete level coupled to N sampled band levels.
///
/// Construction (`discretize`) fixes the node energies ω_k and couplings
/// V_k = sqrt(Δ(ω_k) w_k); `eigensolve` then fills in the exact
/// eigenvalues λ_j of the (N+1)-level Hamiltonian and the squared overlaps
/// |⟨d|λ_j⟩|² of each eigenstate with the discrete level.
#[derive(Debug, Clone)]
pub struct OracleSystem {
    pub node_energies: Vec<f64>,
    pub couplings: Vec<f64>,
    pub epsilon: f64,
    /// Sorted eigenvalues; empty until `eigensolve` runs.
    pub eigenvalues: Vec<f64>,
    /// Squared overlaps with the discrete level, aligned with `eigenvalues`.
    pub d_overlaps: Vec<f64>,
    fgr_rate: f64,
    band_width: f64,
    root_tol: f64,
}

impl OracleSystem {
    /// Discretizes with the default Gauss–Legendre rule.
    pub fn discretize(model: &BandModel, params: &SystemParams, n: usize) -> Result<Self> {
        Self::discretize_with_rule(model, params, n, NodeRule::GaussLegendre)
    }

    pub fn discretize_with_rule(
        model: &BandModel,
        params: &SystemParams,
        n: usize,
        rule: NodeRule,
    ) -> Result<Self> {
        if n < 16 {
            return Err(Error::degenerate(format!(
                "band discretization needs at least 16 nodes, got {n}"
            )));
        }
        let (a, b) = (model.e_bottom, model.e_top);
        let half = 0.5 * (b - a);
        let center = 0.5 * (a + b);
        let (node_energies, node_weights): (Vec<f64>, Vec<f64>) = match rule {
            NodeRule::GaussLegendre => {
                let (xs, ws) = numerics::gauss_legendre(n);
                (
                    xs.iter().map(|x| center + half * x).collect(),
                    ws.iter().map(|w| half * w).collect(),
                )
            }
            NodeRule::Uniform => {
                let panel = (b - a) / n as f64;
                (
                    (0..n).map(|k| a + (k as f64 + 0.5) * panel).collect(),
                    vec![panel; n],
                )
            }
        };
        let couplings: Vec<f64> = node_energies
            .iter()
            .zip(&node_weights)
            .map(|(&e, &w)| (model.delta(e) * w).sqrt())
            .collect();
        if couplings.iter().any(|v| !v.is_finite()) {
            return Err(Error::non_finite("discretized couplings"));
        }
        Ok(OracleSystem {
            node_energies,
            couplings,
            epsilon: params.epsilon,
            eigenvalues: Vec::new(),
            d_overlaps: Vec::new(),
            fgr_rate: model.fgr_rate(params.epsilon),
            band_width: b - a,
            root_tol: params.root_tol,
        })
    }

    /// Builds a system directly from explicit level energies and couplings,
    /// bypassing any band profile. Useful for small hand-checkable cases
    /// where the characteristic polynomial can be expanded on paper.
    pub fn from_parts(
        node_energies: Vec<f64>,
        couplings: Vec<f64>,
        epsilon: f64,
        root_tol: f64,
    ) -> Result<Self> {
        if node_energies.len() != couplings.len() {
            return Err(Error::degenerate(format!(
                "{} node energies but {} couplings",
                node_energies.len(),
                couplings.len()
            )));
        }
        if node_energies.len() < 2 {
            return Err(Error::degenerate("need at least two sampled levels"));
        }
        if !epsilon.is_finite()
            || !root_tol.is_finite()
            || root_tol <= 0.0
            || node_energies.iter().any(|v| !v.is_finite())
            || couplings.iter().any(|v| !v.is_finite())
        {
            return Err(Error::non_finite("explicit level data"));
        }
        if node_energies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::degenerate(
                "level energies must be strictly increasing",
            ));
        }
        let band_width = node_energies[node_energies.len() - 1] - node_energies[0];
        Ok(OracleSystem {
            node_energies,
            couplings,
            epsilon,
            eigenvalues: Vec::new(),
            d_overlaps: Vec::new(),
            fgr_rate: 0.0,
            band_width,
            root_tol,
        })
    }

    /// Secular function f(λ) = λ - ε - Σ_k V_k²/(λ - ω_k) and its
    /// derivative f′(λ) = 1 + Σ_k V_k²/(λ - ω_k)². Eigenvalues are the
    /// roots of f; the squared overlap with the discrete level at a root is
    /// exactly 1/f′(λ).
    fn secular(&self, lam: f64) -> (f64, f64) {
        let mut s = 0.0;
        let mut ds = 0.0;
        for (&w, &v) in self.node_energies.iter().zip(&self.couplings) {
            let d = lam - w;
            let q = v * v / d;
            s += q;
            ds += q / d;
        }
        (lam - self.epsilon - s, 1.0 + ds)
    }

    /// Solves the eigenproblem exactly via the secular equation: the N+1
    /// roots interlace the node energies (one in each gap, one beyond each
    /// end), so every root is bracketed and then polished with Newton using
    /// the analytic derivative. Deterministic and parallel over brackets.
    pub fn eigensolve(mut self) -> Result<Self> {
        let n = self.node_energies.len();
        for k in 1..n {
            if self.node_energies[k] - self.node_energies[k - 1] <= self.root_tol {
                return Err(Error::DegenerateNodes { energy: self.node_energies[k] });
            }
        }
        if self.couplings.iter().all(|&v| v == 0.0) {
            // Fully decoupled: the eigenvalues are the nodes plus the level.
            let mut eig: Vec<(f64, f64)> =
                self.node_energies.iter().map(|&e| (e, 0.0)).collect();
            eig.push((self.epsilon, 1.0));
            eig.sort_by(|a, b| a.0.total_cmp(&b.0));
            self.eigenvalues = eig.iter().map(|p| p.0).collect();
            self.d_overlaps = eig.iter().map(|p| p.1).collect();
            return Ok(self);
        }

        let pairs: Result<Vec<(f64, f64)>> =
            (0..=n).into_par_iter().map(|i| self.solve_bracket(i)).collect();
        let pairs = pairs?;
        self.eigenvalues = pairs.iter().map(|p| p.0).collect();
        self.d_overlaps = pairs.iter().map(|p| p.1).collect();
        Ok(self)
    }

    /// Root in bracket i: i = 0 is below all nodes, i = n above all nodes,
    /// otherwise the gap (ω_{i-1}, ω_i).
    fn solve_bracket(&self, i: usize) -> Result<(f64, f64)> {
        let n = self.node_energies.len();
        let nodes = &self.node_energies;

        let (lo, hi) = if i == 0 {
            let gap = nodes[1] - nodes[0];
            let hi = match self.shrink_toward(nodes[0], -1.0, gap) {
                Some(x) => x,
                None => return Ok(self.grazing_root(nodes[0], -1.0, gap)),
            };
            let lo = self.scan_outward(nodes[0], -1.0, gap)?;
            (lo, hi)
        } else if i == n {
            let gap = nodes[n - 1] - nodes[n - 2];
            let lo = match self.shrink_toward(nodes[n - 1], 1.0, gap) {
                Some(x) => x,
                None => return Ok(self.grazing_root(nodes[n - 1], 1.0, gap)),
            };
            let hi = self.scan_outward(nodes[n - 1], 1.0, gap)?;
            (lo, hi)
        } else {
            let gap = nodes[i] - nodes[i - 1];
            let lo = match self.shrink_toward(nodes[i - 1], 1.0, gap) {
                Some(x) => x,
                None => return Ok(self.grazing_root(nodes[i - 1], 1.0, gap)),
            };
            let hi = match self.shrink_toward(nodes[i], -1.0, gap) {
                Some(x) => x,
                None => return Ok(self.grazing_root(nodes[i], -1.0, gap)),
            };
            (lo, hi)
        };

        // f(lo) < 0 < f(hi) by construction. Bisection narrows the bracket,
        // Newton with the analytic derivative finishes; f′ ≥ 1 everywhere,
        // so the Newton step is always well defined.
        let (mut lo, mut hi) = (lo, hi);
        let mut x = 0.5 * (lo + hi);
        for _ in 0..120 {
            let (fx, dfx) = self.secular(x);
            if fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let mut next = x - fx / dfx;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
                x = next;
                break;
            }
            x = next;
        }
        let (_, dfx) = self.secular(x);
        Ok((x, 1.0 / dfx))
    }

    /// Moves from `node` in direction `dir` (±1) until the secular function
    /// shows the sign it must have on that side of the node's pole:
    /// positive when approaching from below (f → +∞ there), negative from
    /// above. Returns None when the root sits closer to the node than a
    /// fraction 1e-17 of the gap — indistinguishable from the node itself.
    fn shrink_toward(&self, node: f64, dir: f64, gap: f64) -> Option<f64> {
        let want_positive = dir < 0.0;
        let mut d = 0.25 * gap;
        loop {
            let x = node + dir * d;
            let (fx, _) = self.secular(x);
            let ok = if want_positive { fx > 0.0 } else { fx < 0.0 };
            if ok {
                return Some(x);
            }
            d *= 0.25;
            if d < gap * 1e-17 {
                return None;
            }
        }
    }

    /// Fallback for a root grazing a node: report it at the smallest
    /// resolvable offset with the (tiny) overlap the secular derivative
    /// assigns there.
    fn grazing_root(&self, node: f64, dir: f64, gap: f64) -> (f64, f64) {
        let x = node + dir * gap * 1e-17;
        let (_, dfx) = self.secular(x);
        (x, 1.0 / dfx)
    }

    /// Outward doubling from the extreme node until the secular function
    /// changes sign; used for the two exterior roots.
    fn scan_outward(&self, node: f64, dir: f64, gap: f64) -> Result<f64> {
        let sum_v2: f64 = self.couplings.iter().map(|v| v * v).sum();
        let cap = self.epsilon.abs() + self.band_width + sum_v2 + 10.0;
        let want_negative = dir < 0.0;
        let mut d = gap.max(self.root_tol);
        loop {
            let x = node + dir * d;
            let (fx, _) = self.secular(x);
            let ok = if want_negative { fx < 0.0 } else { fx > 0.0 };
            if ok {
                return Ok(x);
            }
            if d > cap {
                return Err(Error::NoSignChange { lo: node, hi: x, f_lo: 0.0, f_hi: fx });
            }
            d *= 2.0;
        }
    }

    /// Survival amplitude of the discrete level as the exact eigenstate
    /// sum g(t) = Σ_j |⟨d|λ_j⟩|² e^{-i λ_j t}. Also reports the golden-rule
    /// reference e^{-t/τ} with 1/τ = 2πΔ(ε) (the constant 1 when the level
    /// is decoupled).
    pub fn evolve(&self, times: &[f64]) -> Result<SurvivalSeries> {
        if self.eigenvalues.is_empty() {
            return Err(Error::degenerate(
                "evolve needs eigensolve to have run on this system",
            ));
        }
        let g: Vec<Complex64> = times
            .par_iter()
            .map(|&t| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (&lam, &ov) in self.eigenvalues.iter().zip(&self.d_overlaps) {
                    acc += Complex64::from_polar(ov, -lam * t);
                }
                acc
            })
            .collect();
        let p: Vec<f64> = g.iter().map(|z| z.norm_sqr()).collect();
        let p_fgr: Vec<f64> = times.iter().map(|&t| (-self.fgr_rate * t).exp()).collect();
        Ok(SurvivalSeries { times: times.to_vec(), g, p, p_fgr })
    }

    /// Time at which the discreteness of the sampled band makes the finite
    /// sum reconstruct itself instead of decaying: about N/(2W) for N nodes
    /// across a band of width W. Comparisons against continuum results are
    /// only meaningful well below this.
    pub fn revival_time(&self) -> f64 {
        0.5 * self.node_energies.len() as f64 / self.band_width
    }

    /// Eigenvalues of the same (N+1)-level Hamiltonian by dense cyclic
    /// Jacobi rotations — a second, slower oracle used only to validate the
    /// secular-equation solver. Capped at 200 nodes.
    pub fn dense_eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.node_energies.len();
        if n > 200 {
            return Err(Error::degenerate(format!(
                "dense eigenvalue cross-check is capped at 200 nodes, got {n}"
            )));
        }
        let m = n + 1;
        let mut a = vec![vec![0.0_f64; m]; m];
        a[0][0] = self.epsilon;
        for k in 0..n {
            a[0][k + 1] = self.couplings[k];
            a[k + 1][0] = self.couplings[k];
            a[k + 1][k + 1] = self.node_energies[k];
        }
        let scale: f64 = a
            .iter()
            .flat_map(|row| row.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .max(f64::MIN_POSITIVE);
        let mut last_off = f64::INFINITY;
        for _sweep in 0..=100 {
            let mut off = 0.0;
            for p in 0..m {
                for q in (p + 1)..m {
                    off += a[p][q] * a[p][q];
                }
            }
            last_off = off;
            if off <= 1e-30 * scale {
                let mut eig: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
                eig.sort_by(f64::total_cmp);
                return Ok(eig);
            }
            for p in 0..m {
                for q in (p + 1)..m {
                    let apq = a[p][q];
                    if apq.abs() <= 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for r in 0..m {
                        let arp = a[r][p];
                        let arq = a[r][q];
                        a[r][p] = c * arp - s * arq;
                        a[r][q] = s * arp + c * arq;
                    }
                    for r in 0..m {
                        let apr = a[p][r];
                        let aqr = a[q][r];
                        a[p][r] = c * apr - s * aqr;
                        a[q][r] = s * apr + c * aqr;
                    }
                }
            }
        }
        Err(Error::NoConvergence {
            context: "dense Jacobi eigenvalue sweep".to_string(),
            residual: last_off,
            tolerance: 1e-30 * scale,
        })
    }
}
