//! A single Pitman-Yor Chinese restaurant process with histogram-based
//! table bookkeeping.
//!
//! Exchangeability makes individual table identities irrelevant, so a
//! restaurant tracks, per dish, a histogram mapping table occupancy to the
//! number of tables with that occupancy. Seating joins an existing table of
//! the dish with weight proportional to its occupancy minus the discount, or
//! opens a new table with weight `(a·m + b) · p_base`; unseating removes a
//! customer from a table chosen proportionally to occupancy.

use std::io::{Read, Write};

use rand::Rng;
use rustc_hash::FxHashMap;

use crate::corpus::WordId;
use crate::error::{Error, Result};
use crate::io::{BinReader, BinWriter};
use crate::math::ln_gamma;

/// Pitman-Yor hyperparameters: discount `a` in [0,1) and strength `b` > -a.
/// `a = 0` reduces the process to a Dirichlet process with concentration `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PypParams {
    pub discount: f64,
    pub strength: f64,
}

impl PypParams {
    pub fn new(discount: f64, strength: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&discount) || strength <= -discount || !strength.is_finite() {
            return Err(Error::InvalidParams { discount, strength });
        }
        Ok(PypParams { discount, strength })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct Dish {
    /// (occupancy, table count), sorted by occupancy, no zero counts.
    hist: Vec<(u32, u32)>,
    customers: u64,
    tables: u64,
}

impl Dish {
    fn add_table_at(&mut self, occupancy: u32) {
        match self.hist.binary_search_by_key(&occupancy, |e| e.0) {
            Ok(i) => self.hist[i].1 += 1,
            Err(i) => self.hist.insert(i, (occupancy, 1)),
        }
    }

    fn remove_table_at(&mut self, occupancy: u32) {
        let i = self
            .hist
            .binary_search_by_key(&occupancy, |e| e.0)
            .expect("occupancy bucket must exist");
        if self.hist[i].1 == 1 {
            self.hist.remove(i);
        } else {
            self.hist[i].1 -= 1;
        }
    }
}

/// One CRP state: per-dish occupancy histograms plus cached totals.
#[derive(Debug, Clone, Default)]
pub struct Restaurant {
    dishes: FxHashMap<WordId, Dish>,
    customers: u64,
    tables: u64,
}

impl Restaurant {
    pub fn new() -> Self {
        Restaurant::default()
    }

    pub fn customers(&self) -> u64 {
        self.customers
    }

    pub fn tables(&self) -> u64 {
        self.tables
    }

    pub fn dish_customers(&self, dish: WordId) -> u64 {
        self.dishes.get(&dish).map_or(0, |d| d.customers)
    }

    pub fn dish_tables(&self, dish: WordId) -> u64 {
        self.dishes.get(&dish).map_or(0, |d| d.tables)
    }

    pub fn is_empty(&self) -> bool {
        self.customers == 0
    }

    pub fn dish_count(&self) -> usize {
        self.dishes.len()
    }

    pub fn dish_ids(&self) -> impl Iterator<Item = WordId> + '_ {
        self.dishes.keys().copied()
    }

    /// Seats one customer of `dish`. Returns true when a new table opened,
    /// which must propagate a draw from the base distribution.
    pub fn seat<R: Rng + ?Sized>(
        &mut self,
        dish: WordId,
        p_base: f64,
        params: PypParams,
        rng: &mut R,
    ) -> bool {
        debug_assert!((0.0..=1.0).contains(&p_base), "p_base={p_base}");
        let a = params.discount;
        let join_weight = match self.dishes.get(&dish) {
            Some(d) => d.customers as f64 - a * d.tables as f64,
            None => 0.0,
        };
        let open_weight = (a * self.tables as f64 + params.strength) * p_base;
        let total = join_weight + open_weight;

        // The first customer of an empty restaurant always opens a table; a
        // zero total can also arise from a zero base with no existing tables.
        let open = total <= 0.0 || rng.random::<f64>() * total >= join_weight;

        let entry = self.dishes.entry(dish).or_default();
        if open {
            entry.add_table_at(1);
            entry.tables += 1;
            self.tables += 1;
        } else {
            // Join an existing table of this dish: occupancy t with weight
            // (t - a) · count, which totals exactly the join weight.
            let idx = crate::math::sample_index(
                entry.hist.iter().map(|&(t, c)| (t as f64 - a) * c as f64),
                join_weight,
                rng,
            );
            let t = entry.hist[idx].0;
            entry.remove_table_at(t);
            entry.add_table_at(t + 1);
        }
        entry.customers += 1;
        self.customers += 1;
        open
    }

    /// Seats one customer of `dish` at a table chosen uniformly among the
    /// dish's existing tables and one new table, ignoring the seating rule.
    /// Used for random initialization of the Gibbs sampler. Returns true
    /// when a new table opened.
    pub fn seat_random<R: Rng + ?Sized>(&mut self, dish: WordId, rng: &mut R) -> bool {
        let entry = self.dishes.entry(dish).or_default();
        let choices = entry.tables + 1;
        let open = rng.random_range(0..choices) == entry.tables;
        if open {
            entry.add_table_at(1);
            entry.tables += 1;
            self.tables += 1;
        } else {
            let idx = crate::math::sample_index(
                entry.hist.iter().map(|&(_, c)| c as f64),
                entry.tables as f64,
                rng,
            );
            let t = entry.hist[idx].0;
            entry.remove_table_at(t);
            entry.add_table_at(t + 1);
        }
        entry.customers += 1;
        self.customers += 1;
        open
    }

    /// Removes one customer of `dish` from a table chosen proportionally to
    /// occupancy. Returns true when the table became empty, which must
    /// propagate a removal to the base distribution.
    ///
    /// Panics if the dish has no customers: the caller tried to remove an
    /// event that was never inserted.
    pub fn unseat<R: Rng + ?Sized>(&mut self, dish: WordId, rng: &mut R) -> bool {
        let entry = self
            .dishes
            .get_mut(&dish)
            .unwrap_or_else(|| panic!("unseat of untracked dish {dish}"));
        let idx = crate::math::sample_index(
            entry.hist.iter().map(|&(t, c)| t as f64 * c as f64),
            entry.customers as f64,
            rng,
        );
        let t = entry.hist[idx].0;
        entry.remove_table_at(t);
        entry.customers -= 1;
        self.customers -= 1;
        let table_removed = t == 1;
        if table_removed {
            entry.tables -= 1;
            self.tables -= 1;
        } else {
            entry.add_table_at(t - 1);
        }
        if entry.customers == 0 {
            self.dishes.remove(&dish);
        }
        table_removed
    }

    /// Predictive probability of `dish` given the current seating and a base
    /// probability: `(N_y - a·m_y + (a·m + b)·p_base) / (n + b)`. An empty
    /// restaurant passes the base through unchanged.
    pub fn predictive(&self, dish: WordId, p_base: f64, params: PypParams) -> f64 {
        if self.customers == 0 {
            return p_base;
        }
        let a = params.discount;
        let b = params.strength;
        let (n_y, m_y) = match self.dishes.get(&dish) {
            Some(d) => (d.customers as f64, d.tables as f64),
            None => (0.0, 0.0),
        };
        (n_y - a * m_y + (a * self.tables as f64 + b) * p_base) / (self.customers as f64 + b)
    }

    /// Log joint probability of this restaurant's seating arrangement under
    /// the PYCRP (dish labels excluded; base draws are accounted elsewhere).
    pub fn seating_log_likelihood(&self, params: PypParams) -> f64 {
        if self.customers == 0 {
            return 0.0;
        }
        let a = params.discount;
        let b = params.strength;
        let mut ll = ln_gamma(1.0 + b) - ln_gamma(self.customers as f64 + b);
        for k in 1..self.tables {
            ll += (a * k as f64 + b).ln();
        }
        let ln_gamma_1ma = ln_gamma(1.0 - a);
        for dish in self.dishes.values() {
            for &(t, c) in &dish.hist {
                ll += c as f64 * (ln_gamma(t as f64 - a) - ln_gamma_1ma);
            }
        }
        ll
    }

    /// Histogram identity check for one dish: N_w and m_w must equal the
    /// histogram sums. Absent dishes trivially pass. Cheap enough to run
    /// after every operation in fuzz tests.
    pub fn check_dish(&self, dish: WordId) -> std::result::Result<(), String> {
        if let Some(d) = self.dishes.get(&dish) {
            let n_w: u64 = d.hist.iter().map(|&(t, c)| t as u64 * c as u64).sum();
            let m_w: u64 = d.hist.iter().map(|&(_, c)| c as u64).sum();
            if n_w != d.customers || m_w != d.tables {
                return Err(format!(
                    "dish {dish}: cached ({}, {}) vs histogram ({n_w}, {m_w})",
                    d.customers, d.tables
                ));
            }
            if d.hist.iter().any(|&(t, c)| t == 0 || c == 0) {
                return Err(format!("dish {dish}: zero bucket"));
            }
        }
        if self.tables > self.customers {
            return Err("more tables than customers".into());
        }
        Ok(())
    }

    /// Verifies the histogram identities: cached per-dish and total counts
    /// match the histograms, and no zero-occupancy buckets are stored.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut n = 0u64;
        let mut m = 0u64;
        for (&dish, d) in &self.dishes {
            let n_w: u64 = d.hist.iter().map(|&(t, c)| t as u64 * c as u64).sum();
            let m_w: u64 = d.hist.iter().map(|&(_, c)| c as u64).sum();
            if n_w != d.customers {
                return Err(format!(
                    "dish {dish}: N_w {} != histogram sum {n_w}",
                    d.customers
                ));
            }
            if m_w != d.tables {
                return Err(format!(
                    "dish {dish}: m_w {} != histogram sum {m_w}",
                    d.tables
                ));
            }
            if d.customers == 0 {
                return Err(format!("dish {dish}: stored with zero customers"));
            }
            if d.hist.iter().any(|&(t, c)| t == 0 || c == 0) {
                return Err(format!("dish {dish}: zero occupancy or count bucket"));
            }
            if d.tables > d.customers {
                return Err(format!("dish {dish}: more tables than customers"));
            }
            if !d.hist.windows(2).all(|w| w[0].0 < w[1].0) {
                return Err(format!("dish {dish}: histogram not sorted"));
            }
            n += d.customers;
            m += d.tables;
        }
        if n != self.customers {
            return Err(format!("total customers {} != {n}", self.customers));
        }
        if m != self.tables {
            return Err(format!("total tables {} != {m}", self.tables));
        }
        Ok(())
    }

    /// Canonical (sorted) form, used for serialization and state comparison.
    pub fn snapshot(&self) -> Vec<(WordId, Vec<(u32, u32)>)> {
        let mut dishes: Vec<(WordId, Vec<(u32, u32)>)> = self
            .dishes
            .iter()
            .map(|(&w, d)| (w, d.hist.clone()))
            .collect();
        dishes.sort_by_key(|e| e.0);
        dishes
    }

    pub fn from_snapshot(snap: &[(WordId, Vec<(u32, u32)>)]) -> Self {
        let mut rest = Restaurant::new();
        for (w, hist) in snap {
            let mut dish = Dish::default();
            for &(t, c) in hist {
                dish.hist.push((t, c));
                dish.customers += t as u64 * c as u64;
                dish.tables += c as u64;
            }
            rest.customers += dish.customers;
            rest.tables += dish.tables;
            rest.dishes.insert(*w, dish);
        }
        rest
    }

    pub(crate) fn write_bin<W: Write>(&self, w: &mut BinWriter<W>) -> std::io::Result<()> {
        let snap = self.snapshot();
        w.put_usize(snap.len())?;
        for (dish, hist) in snap {
            w.put_u32(dish)?;
            w.put_usize(hist.len())?;
            for (t, c) in hist {
                w.put_u32(t)?;
                w.put_u32(c)?;
            }
        }
        Ok(())
    }

    pub(crate) fn read_bin<R: Read>(r: &mut BinReader<R>) -> Result<Self> {
        let n = r.get_usize()?;
        let mut snap = Vec::with_capacity(n);
        for _ in 0..n {
            let dish = r.get_u32()?;
            let k = r.get_usize()?;
            let mut hist = Vec::with_capacity(k);
            for _ in 0..k {
                let t = r.get_u32()?;
                let c = r.get_u32()?;
                hist.push((t, c));
            }
            snap.push((dish, hist));
        }
        Ok(Restaurant::from_snapshot(&snap))
    }

    /// Accumulates this restaurant's contribution to a per-depth likelihood
    /// summary used by the hyperparameter sampler.
    pub(crate) fn accumulate_summary(&self, summary: &mut SeatingSummary) {
        if self.customers == 0 {
            return;
        }
        summary.restaurants += 1;
        *summary.customer_totals.entry(self.customers).or_insert(0) += 1;
        *summary.table_totals.entry(self.tables).or_insert(0) += 1;
        for dish in self.dishes.values() {
            for &(t, c) in &dish.hist {
                *summary.occupancies.entry(t).or_insert(0) += c as u64;
            }
        }
    }
}

/// Log joint probability of a seating arrangement given as a table-occupancy
/// multiset, via the Gamma-function closed form.
pub fn log_joint_seating(occupancies: &[u64], params: PypParams) -> f64 {
    let a = params.discount;
    let b = params.strength;
    let n: u64 = occupancies.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let m = occupancies.len() as u64;
    let mut ll = ln_gamma(1.0 + b) - ln_gamma(n as f64 + b);
    for k in 1..m {
        ll += (a * k as f64 + b).ln();
    }
    let ln_gamma_1ma = ln_gamma(1.0 - a);
    for &n_k in occupancies {
        debug_assert!(n_k >= 1);
        ll += ln_gamma(n_k as f64 - a) - ln_gamma_1ma;
    }
    ll
}

/// Sufficient statistics for the seating likelihood of a group of
/// restaurants sharing hyperparameters, grouped by value so that one
/// likelihood evaluation costs O(distinct values) instead of O(tables).
#[derive(Debug, Default, Clone)]
pub struct SeatingSummary {
    pub restaurants: u64,
    /// customers-per-restaurant value -> number of restaurants
    pub customer_totals: FxHashMap<u64, u64>,
    /// tables-per-restaurant value -> number of restaurants
    pub table_totals: FxHashMap<u64, u64>,
    /// table occupancy -> total table count across all restaurants
    pub occupancies: FxHashMap<u32, u64>,
}

impl SeatingSummary {
    pub fn is_empty(&self) -> bool {
        self.restaurants == 0
    }

    pub fn total_tables(&self) -> u64 {
        self.occupancies.values().sum()
    }

    /// Sum of seating log likelihoods over all summarized restaurants.
    pub fn log_likelihood(&self, params: PypParams) -> f64 {
        if self.restaurants == 0 {
            return 0.0;
        }
        let a = params.discount;
        let b = params.strength;
        let mut ll = self.restaurants as f64 * ln_gamma(1.0 + b);
        for (&n, &count) in &self.customer_totals {
            ll -= count as f64 * ln_gamma(n as f64 + b);
        }
        // sum over restaurants of sum_{k=1}^{m-1} ln(a k + b): for each k,
        // every restaurant with more than k tables contributes one term.
        let mut by_tables: Vec<(u64, u64)> =
            self.table_totals.iter().map(|(&m, &c)| (m, c)).collect();
        by_tables.sort_unstable();
        if let Some(&(max_m, _)) = by_tables.last() {
            let mut remaining: u64 = by_tables.iter().map(|&(_, c)| c).sum();
            let mut iter = by_tables.iter().peekable();
            for k in 1..max_m {
                while let Some(&&(m, c)) = iter.peek() {
                    if m <= k {
                        remaining -= c;
                        iter.next();
                    } else {
                        break;
                    }
                }
                ll += remaining as f64 * (a * k as f64 + b).ln();
            }
        }
        let ln_gamma_1ma = ln_gamma(1.0 - a);
        let mut tables = 0u64;
        for (&t, &count) in &self.occupancies {
            ll += count as f64 * ln_gamma(t as f64 - a);
            tables += count;
        }
        ll -= tables as f64 * ln_gamma_1ma;
        ll
    }
}
