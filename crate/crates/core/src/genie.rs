//! The genie-aided two-channel mixture.
//!
//! Every input bit is routed to channel 1 with probability `lambda` and to
//! channel 2 otherwise; channel `i` deletes it with probability `d_i`. The
//! transmitter is told the routing `F_x`; the receiver gets the two output
//! streams `Y1`, `Y2` and the interleaving `F_y` that merges them into `Y`.
//!
//! Routing strings use bit value 0 for channel 1 and 1 for channel 2.
//! Given the input `x`, the whole tuple `(F_x, X1, X2, Y1, Y2, F_y, Y)` is a
//! function of `x`, `F_x` and the survivor mask, so the joint law factors as
//! `P(x) * P(F_x, mask)`; [`RoutingLaw`] holds the second factor.

use std::collections::{BTreeMap, BTreeSet};

use crate::bits::{full_mask, strings_up_to, BitString};
use crate::combinatorics::i3_bound_per_symbol;
use crate::error::{check_probability, Result};
use crate::exact::{check_blocklength, FiniteLaw, InputDistribution, MAX_EXACT_N};
use crate::info::xlog2x;

/// Blocklength cap for the full joint law.
pub const MAX_GENIE_N: usize = 8;

/// Additive slack on bit-valued inequality checks.
pub const INFO_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
struct RoutingGroup {
    fx: u32,
    /// `(survivor mask, P(F_x = fx, mask))`, zero-probability masks omitted.
    atoms: Vec<(u32, f64)>,
}

/// Joint law of the routing string and the survivor mask.
#[derive(Debug, Clone)]
pub struct RoutingLaw {
    n: usize,
    lambda: f64,
    d1: f64,
    d2: f64,
    groups: Vec<RoutingGroup>,
}

impl RoutingLaw {
    pub fn new(n: usize, lambda: f64, d1: f64, d2: f64) -> Result<Self> {
        check_blocklength(n, MAX_EXACT_N)?;
        check_probability("lambda", lambda)?;
        check_probability("d1", d1)?;
        check_probability("d2", d2)?;
        let (lam_c, keep1, keep2) = (1.0 - lambda, 1.0 - d1, 1.0 - d2);
        let full = full_mask(n);
        let mut groups = Vec::new();
        for fx in 0..1u32 << n {
            let to2 = fx.count_ones() as i32;
            let to1 = n as i32 - to2;
            let route = lambda.powi(to1) * lam_c.powi(to2);
            if route == 0.0 {
                continue;
            }
            let mut atoms = Vec::new();
            for mask in 0..1u32 << n {
                let kept1 = (mask & !fx & full).count_ones() as i32;
                let kept2 = (mask & fx).count_ones() as i32;
                let p = lambda.powi(to1)
                    * lam_c.powi(to2)
                    * d1.powi(to1 - kept1)
                    * keep1.powi(kept1)
                    * d2.powi(to2 - kept2)
                    * keep2.powi(kept2);
                if p > 0.0 {
                    atoms.push((mask, p));
                }
            }
            groups.push(RoutingGroup { fx, atoms });
        }
        Ok(Self {
            n,
            lambda,
            d1,
            d2,
            groups,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }

    pub fn d2(&self) -> f64 {
        self.d2
    }

    /// `(F_x, survivor mask, probability)` for every atom of positive mass.
    pub fn atoms(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.groups
            .iter()
            .flat_map(|g| g.atoms.iter().map(move |&(mask, p)| (g.fx, mask, p)))
    }

    /// `P(y|x)` of the mixture, obtained by summing the routing law over
    /// `F_x` and then over all survivor masks that map `x` to `y`.
    pub fn channel_law(&self) -> Result<FiniteLaw> {
        let n = self.n;
        let mut mask_prob = vec![0.0; 1 << n];
        for (_, mask, p) in self.atoms() {
            mask_prob[mask as usize] += p;
        }
        let mut law = FiniteLaw::zeros(n);
        let mut comp = vec![0.0; strings_up_to(n)];
        for x in BitString::all_of_len(n) {
            let row = law.row_mut(x.bits() as usize);
            comp.iter_mut().for_each(|c| *c = 0.0);
            for (mask, &p) in mask_prob.iter().enumerate() {
                if p > 0.0 {
                    let y = x.extract(mask as u32).index();
                    neumaier_add(&mut row[y], &mut comp[y], p);
                }
            }
            for (r, c) in row.iter_mut().zip(&comp) {
                *r += c;
            }
        }
        Ok(law)
    }
}

#[inline]
fn neumaier_add(sum: &mut f64, comp: &mut f64, value: f64) {
    let t = *sum + value;
    if sum.abs() >= value.abs() {
        *comp += (*sum - t) + value;
    } else {
        *comp += (value - t) + *sum;
    }
    *sum = t;
}

/// One atom of the genie-aided joint law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenieAtom {
    pub x: BitString,
    pub fx: BitString,
    pub x1: BitString,
    pub x2: BitString,
    pub y1: BitString,
    pub y2: BitString,
    pub fy: BitString,
    pub y: BitString,
    pub prob: f64,
}

impl GenieAtom {
    pub fn m1(&self) -> usize {
        self.y1.len()
    }

    pub fn m2(&self) -> usize {
        self.y2.len()
    }
}

/// Reassembles `Y` from the two output streams and the interleaving.
pub fn merge_outputs(y1: &BitString, y2: &BitString, fy: &BitString) -> Option<BitString> {
    if fy.len() != y1.len() + y2.len() || fy.ones() != y2.len() {
        return None;
    }
    let (mut i1, mut i2) = (0, 0);
    let mut symbols = Vec::with_capacity(fy.len());
    for k in 0..fy.len() {
        if fy.get(k) == 0 {
            symbols.push(y1.get(i1));
            i1 += 1;
        } else {
            symbols.push(y2.get(i2));
            i2 += 1;
        }
    }
    BitString::from_symbols(&symbols).ok()
}

#[derive(Debug, Clone)]
pub struct GenieJointLaw {
    input: InputDistribution,
    routing: RoutingLaw,
}

impl GenieJointLaw {
    pub fn new(input: InputDistribution, lambda: f64, d1: f64, d2: f64) -> Result<Self> {
        check_blocklength(input.n(), MAX_GENIE_N)?;
        let routing = RoutingLaw::new(input.n(), lambda, d1, d2)?;
        Ok(Self { input, routing })
    }

    pub fn n(&self) -> usize {
        self.input.n()
    }

    pub fn input(&self) -> &InputDistribution {
        &self.input
    }

    pub fn routing(&self) -> &RoutingLaw {
        &self.routing
    }

    pub fn atoms(&self) -> impl Iterator<Item = GenieAtom> + '_ {
        let n = self.n();
        let full = full_mask(n);
        BitString::all_of_len(n)
            .filter(move |x| self.input.prob(x) > 0.0)
            .flat_map(move |x| {
                let px = self.input.prob(&x);
                self.routing.groups.iter().flat_map(move |g| {
                    let fx = BitString::raw(n, g.fx);
                    let x1 = x.extract(!g.fx & full);
                    let x2 = x.extract(g.fx);
                    g.atoms.iter().map(move |&(mask, p)| GenieAtom {
                        x,
                        fx,
                        x1,
                        x2,
                        y1: x.extract(mask & !g.fx),
                        y2: x.extract(mask & g.fx),
                        fy: fx.extract(mask),
                        y: x.extract(mask),
                        prob: px * p,
                    })
                })
            })
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms().map(|a| a.prob).sum()
    }

    /// Marginal channel law `P(y|x)`; independent of the input distribution.
    pub fn channel_law(&self) -> Result<FiniteLaw> {
        self.routing.channel_law()
    }
}

/// Convenience constructor mirroring the joint-law parameters.
pub fn genie_joint_law(
    input: &InputDistribution,
    d1: f64,
    d2: f64,
    lambda: f64,
) -> Result<GenieJointLaw> {
    GenieJointLaw::new(input.clone(), lambda, d1, d2)
}

/// The terms of the chain `I(X;Y) <= I1 + I2 + I3` and their bounds, in bits.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct InfoDecomposition {
    pub i_xy: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i_x1y1: f64,
    pub i_x2y2: f64,
    pub h_fy_given_y1y2: f64,
    pub h_fy_given_m1m2: f64,
}

impl InfoDecomposition {
    /// `I(X1,X2,F_x ; Y1,Y2,F_y)`.
    pub fn genie_information(&self) -> f64 {
        self.i1 + self.i2 + self.i3
    }

    pub fn min_entry(&self) -> f64 {
        [
            self.i_xy,
            self.i1,
            self.i2,
            self.i3,
            self.i_x1y1,
            self.i_x2y2,
            self.h_fy_given_y1y2,
            self.h_fy_given_m1m2,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }
}

/// Dense accumulator that remembers which cells it touched.
struct Scratch {
    cells: Vec<f64>,
    touched: Vec<usize>,
}

impl Scratch {
    fn new(size: usize) -> Self {
        Self {
            cells: vec![0.0; size],
            touched: Vec::new(),
        }
    }

    #[inline]
    fn add(&mut self, i: usize, w: f64) {
        if self.cells[i] == 0.0 {
            self.touched.push(i);
        }
        self.cells[i] += w;
    }

    /// `sum xlog2x` over touched cells, then clears them.
    fn drain_xlogx(&mut self) -> f64 {
        let mut s = 0.0;
        for &i in &self.touched {
            s += xlog2x(self.cells[i]);
            self.cells[i] = 0.0;
        }
        self.touched.clear();
        s
    }
}

fn neg_xlogx_sum(cells: &[f64]) -> f64 {
    -cells.iter().map(|&p| xlog2x(p)).sum::<f64>()
}

/// Offset of the length-`m` block in the dense `(Y, F_y)` index.
#[inline]
fn pair_block(m: usize) -> usize {
    ((1usize << (2 * m)) - 1) / 3
}

#[inline]
fn yfy_index(y: &BitString, fy: &BitString) -> usize {
    let m = y.len();
    pair_block(m) + (((y.bits() as usize) << m) | fy.bits() as usize)
}

/// Entropies gathered in one pass over the joint law. `T` is `(X, F_x)`,
/// which is in bijection with `(X1, X2, F_x)`; `(Y, F_y)` is in bijection with
/// `(Y1, Y2, F_y)`; `F_y` alone determines `(M1, M2)`.
struct Entropies {
    h_x: f64,
    h_y: f64,
    h_xy: f64,
    h_y1: f64,
    h_y2: f64,
    h_y1y2: f64,
    h_y1y2fy: f64,
    h_fy: f64,
    h_m1m2: f64,
    h_x1: f64,
    h_x1y1: f64,
    h_x2: f64,
    h_x2y2: f64,
    h_y1_given_t: f64,
    h_y1y2_given_t: f64,
    h_y1y2fy_given_t: f64,
}

impl Entropies {
    fn compute(joint: &GenieJointLaw) -> Self {
        let n = joint.n();
        let s = strings_up_to(n);
        let full = full_mask(n);
        let mut y = vec![0.0; s];
        let mut xy = vec![0.0; (1 << n) * s];
        let mut y1 = vec![0.0; s];
        let mut y2 = vec![0.0; s];
        let mut y1y2 = vec![0.0; s * s];
        let mut yfy = vec![0.0; pair_block(n + 1)];
        let mut fy = vec![0.0; s];
        let mut m1m2 = vec![0.0; (n + 1) * (n + 1)];
        let mut x1 = vec![0.0; s];
        let mut x2 = vec![0.0; s];
        let mut x1y1 = vec![0.0; s * s];
        let mut x2y2 = vec![0.0; s * s];
        let mut local_y1 = Scratch::new(s);
        let mut local_y1y2 = Scratch::new(s * s);
        let mut local_yfy = Scratch::new(pair_block(n + 1));
        let (mut ht_y1, mut ht_y1y2, mut ht_yfy) = (0.0, 0.0, 0.0);

        for xs in BitString::all_of_len(n) {
            let px = joint.input.prob(&xs);
            if px == 0.0 {
                continue;
            }
            for g in &joint.routing.groups {
                let fxs = BitString::raw(n, g.fx);
                let to1 = !g.fx & full;
                let x1s = xs.extract(to1);
                let x2s = xs.extract(g.fx);
                let mut weight_t = 0.0;
                for &(mask, p) in &g.atoms {
                    let w = px * p;
                    weight_t += w;
                    let y1s = xs.extract(mask & to1);
                    let y2s = xs.extract(mask & g.fx);
                    let ys = xs.extract(mask);
                    let fys = fxs.extract(mask);
                    let pair = y1s.index() * s + y2s.index();
                    let yf = yfy_index(&ys, &fys);

                    y[ys.index()] += w;
                    xy[xs.bits() as usize * s + ys.index()] += w;
                    y1[y1s.index()] += w;
                    y2[y2s.index()] += w;
                    y1y2[pair] += w;
                    yfy[yf] += w;
                    fy[fys.index()] += w;
                    m1m2[y1s.len() * (n + 1) + y2s.len()] += w;
                    x1y1[x1s.index() * s + y1s.index()] += w;
                    x2y2[x2s.index() * s + y2s.index()] += w;

                    local_y1.add(y1s.index(), w);
                    local_y1y2.add(pair, w);
                    local_yfy.add(yf, w);
                }
                x1[x1s.index()] += weight_t;
                x2[x2s.index()] += weight_t;
                let t_term = xlog2x(weight_t);
                ht_y1 += t_term - local_y1.drain_xlogx();
                ht_y1y2 += t_term - local_y1y2.drain_xlogx();
                ht_yfy += t_term - local_yfy.drain_xlogx();
            }
        }

        Self {
            h_x: neg_xlogx_sum(joint.input.probs()),
            h_y: neg_xlogx_sum(&y),
            h_xy: neg_xlogx_sum(&xy),
            h_y1: neg_xlogx_sum(&y1),
            h_y2: neg_xlogx_sum(&y2),
            h_y1y2: neg_xlogx_sum(&y1y2),
            h_y1y2fy: neg_xlogx_sum(&yfy),
            h_fy: neg_xlogx_sum(&fy),
            h_m1m2: neg_xlogx_sum(&m1m2),
            h_x1: neg_xlogx_sum(&x1),
            h_x1y1: neg_xlogx_sum(&x1y1),
            h_x2: neg_xlogx_sum(&x2),
            h_x2y2: neg_xlogx_sum(&x2y2),
            h_y1_given_t: ht_y1,
            h_y1y2_given_t: ht_y1y2,
            h_y1y2fy_given_t: ht_yfy,
        }
    }
}

/// Exact values of every term in the genie decomposition.
pub fn info_decomposition(joint: &GenieJointLaw) -> InfoDecomposition {
    let e = Entropies::compute(joint);
    InfoDecomposition {
        i_xy: e.h_y - (e.h_xy - e.h_x),
        i1: e.h_y1 - e.h_y1_given_t,
        i2: (e.h_y1y2 - e.h_y1) - (e.h_y1y2_given_t - e.h_y1_given_t),
        i3: (e.h_y1y2fy - e.h_y1y2) - (e.h_y1y2fy_given_t - e.h_y1y2_given_t),
        i_x1y1: e.h_x1 + e.h_y1 - e.h_x1y1,
        i_x2y2: e.h_x2 + e.h_y2 - e.h_x2y2,
        h_fy_given_y1y2: e.h_y1y2fy - e.h_y1y2,
        h_fy_given_m1m2: e.h_fy - e.h_m1m2,
    }
}

/// One link `lhs <= rhs` (or `lhs = rhs`) of the decomposition chain.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ChainLink {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub equality: bool,
    pub pass: bool,
}

/// Checks every link of the chain down to `n g(lambda, d1, d2)` with the
/// given slack.
pub fn chain_links(dec: &InfoDecomposition, n: usize, lambda: f64, d1: f64, d2: f64, slack: f64) -> Vec<ChainLink> {
    let link = |name, lhs: f64, rhs: f64, equality| ChainLink {
        name,
        lhs,
        rhs,
        equality,
        pass: if equality {
            (lhs - rhs).abs() <= slack
        } else {
            lhs <= rhs + slack
        },
    };
    vec![
        link("I(X;Y) <= I1+I2+I3", dec.i_xy, dec.genie_information(), false),
        link("I1 = I(X1;Y1)", dec.i1, dec.i_x1y1, true),
        link("I2 <= I(X2;Y2)", dec.i2, dec.i_x2y2, false),
        link("I3 <= H(Fy|Y1,Y2)", dec.i3, dec.h_fy_given_y1y2, false),
        link("H(Fy|Y1,Y2) <= H(Fy|M1,M2)", dec.h_fy_given_y1y2, dec.h_fy_given_m1m2, false),
        link(
            "H(Fy|M1,M2) <= N g",
            dec.h_fy_given_m1m2,
            n as f64 * i3_bound_per_symbol(lambda, d1, d2),
            false,
        ),
        link("terms nonnegative", 0.0, dec.min_entry(), false),
    ]
}

/// `(H(F_y | Y1, Y2), H(F_y | M1, M2))`. The first can never exceed the
/// second because `(M1, M2)` is a function of `(Y1, Y2)`.
pub fn fy_entropy_compare(joint: &GenieJointLaw) -> (f64, f64) {
    let e = Entropies::compute(joint);
    (e.h_y1y2fy - e.h_y1y2, e.h_fy - e.h_m1m2)
}

/// Number of distinct interleavings `F_y` of positive probability for every
/// observed `(M1, M2)`.
pub fn fy_support_counts(routing: &RoutingLaw) -> BTreeMap<(usize, usize), usize> {
    let n = routing.n();
    let mut seen: BTreeMap<(usize, usize), BTreeSet<BitString>> = BTreeMap::new();
    for (fx, mask, _) in routing.atoms() {
        let fy = BitString::raw(n, fx).extract(mask);
        let m2 = fy.ones();
        seen.entry((fy.len() - m2, m2)).or_default().insert(fy);
    }
    seen.into_iter().map(|(k, v)| (k, v.len())).collect()
}
