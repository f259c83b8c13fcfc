//! Inter-satellite and space-to-ground communication models.
//!
//! The edge constellation is a ring with laser inter-satellite links of
//! fixed rate; the space-to-ground link is an RF channel whose rate adapts
//! through a DVB-S2X style modulation-and-coding table driven by the link
//! budget. Latency models count per-hop transmission plus propagation;
//! energy models charge the transmitter for the time on air.

use serde::{Deserialize, Serialize};

use crate::geometry::SPEED_OF_LIGHT_M_S;
use crate::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// One modulation-and-coding point: spectral efficiency and the minimum
/// SNR at which it still decodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModcodEntry {
    pub label: String,
    /// Spectral efficiency in bits per second per Hz.
    pub spectral_efficiency: f64,
    /// Decoding threshold, Es/N0 in dB.
    pub min_snr_db: f64,
}

impl ModcodEntry {
    pub fn min_snr_linear(&self) -> f64 {
        db_to_linear(self.min_snr_db)
    }
}

/// Normative DVB-S2/S2X spectral efficiencies with AWGN decoding
/// thresholds, ascending efficiency. Thresholds are not monotone in
/// efficiency (some dense constellations decode below older sparse ones),
/// which is why rate selection scans the whole satisfied set.
const DVB_S2X: &[(&str, f64, f64)] = &[
    ("qpsk_1/4", 0.490243, -2.35),
    ("qpsk_1/3", 0.656448, -1.24),
    ("qpsk_2/5", 0.789412, -0.30),
    ("qpsk_1/2", 0.988858, 1.00),
    ("qpsk_3/5", 1.188304, 2.23),
    ("qpsk_2/3", 1.322253, 3.10),
    ("qpsk_3/4", 1.487473, 4.03),
    ("qpsk_4/5", 1.587196, 4.68),
    ("qpsk_5/6", 1.654663, 5.18),
    ("qpsk_8/9", 1.766451, 6.20),
    ("8psk_3/5", 1.779991, 5.50),
    ("qpsk_9/10", 1.788612, 6.42),
    ("8psk_2/3", 1.980636, 6.62),
    ("8psk_3/4", 2.228124, 7.91),
    ("8psk_5/6", 2.478562, 9.35),
    ("16apsk_2/3", 2.637201, 8.97),
    ("8psk_8/9", 2.646012, 10.69),
    ("8psk_9/10", 2.679207, 10.98),
    ("16apsk_3/4", 2.966728, 10.21),
    ("16apsk_4/5", 3.165623, 11.03),
    ("16apsk_5/6", 3.300184, 11.61),
    ("16apsk_8/9", 3.523143, 12.89),
    ("16apsk_9/10", 3.567342, 13.13),
    ("32apsk_3/4", 3.703295, 12.73),
    ("32apsk_4/5", 3.951571, 13.64),
    ("32apsk_5/6", 4.119540, 14.28),
    ("32apsk_8/9", 4.397854, 15.69),
    ("32apsk_9/10", 4.453027, 16.05),
    ("64apsk_7/9", 4.603631, 15.47),
    ("64apsk_4/5", 4.735354, 15.87),
    ("64apsk_5/6", 4.936639, 16.55),
    ("128apsk_3/4", 5.163248, 17.73),
    ("128apsk_7/9", 5.355556, 18.53),
    ("256apsk_32/45", 5.593162, 18.59),
    ("256apsk_3/4", 5.900855, 19.57),
];

/// An adaptive coding and modulation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModcodTable {
    pub entries: Vec<ModcodEntry>,
}

impl ModcodTable {
    /// The built-in DVB-S2X table.
    pub fn dvb_s2x() -> Self {
        let entries = DVB_S2X
            .iter()
            .map(|&(label, r, db)| ModcodEntry {
                label: label.into(),
                spectral_efficiency: r,
                min_snr_db: db,
            })
            .collect();
        let t = ModcodTable { entries };
        t.validate().expect("built-in table is consistent");
        t
    }

    /// Capacity-bound thresholds gamma_min(r) = 2^r - 1 plus a margin, over
    /// the built-in efficiency grid. Useful when no decoder table applies.
    pub fn analytic(margin_db: f64) -> Self {
        let entries = DVB_S2X
            .iter()
            .map(|&(label, r, _)| ModcodEntry {
                label: format!("analytic_{label}"),
                spectral_efficiency: r,
                min_snr_db: linear_to_db(2f64.powf(r) - 1.0) + margin_db,
            })
            .collect();
        ModcodTable { entries }
    }

    /// Loads `label,spectral_efficiency,min_snr_db` CSV rows.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut entries = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse(format!("modcod csv: {e}")))?;
            if rec.len() < 3 {
                return Err(Error::Parse("modcod csv: expected label,r,min_snr_db".into()));
            }
            entries.push(ModcodEntry {
                label: rec[0].to_string(),
                spectral_efficiency: rec[1]
                    .parse()
                    .map_err(|_| Error::Parse(format!("modcod csv: bad efficiency {:?}", &rec[1])))?,
                min_snr_db: rec[2]
                    .parse()
                    .map_err(|_| Error::Parse(format!("modcod csv: bad threshold {:?}", &rec[2])))?,
            });
        }
        let t = ModcodTable { entries };
        t.validate()?;
        Ok(t)
    }

    /// Entries must ascend in efficiency and respect the Shannon bound
    /// gamma_min >= 2^r - 1.
    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::Config("modcod table is empty".into()));
        }
        let mut prev = 0.0;
        for e in &self.entries {
            if e.spectral_efficiency <= prev {
                return Err(Error::Config(format!(
                    "modcod {}: efficiencies must be strictly ascending",
                    e.label
                )));
            }
            prev = e.spectral_efficiency;
            let bound = 2f64.powf(e.spectral_efficiency) - 1.0;
            if e.min_snr_linear() < bound * (1.0 - 1e-9) {
                return Err(Error::Config(format!(
                    "modcod {}: threshold {:.2} dB beats the Shannon bound {:.2} dB",
                    e.label,
                    e.min_snr_db,
                    linear_to_db(bound)
                )));
            }
        }
        Ok(())
    }

    /// Highest-efficiency entry decodable at the given SNR.
    pub fn select(&self, snr_linear: f64) -> Option<&ModcodEntry> {
        self.entries
            .iter()
            .filter(|e| snr_linear >= e.min_snr_linear())
            .max_by(|a, b| a.spectral_efficiency.total_cmp(&b.spectral_efficiency))
    }
}

/// Constellation communication parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    /// Inter-satellite link rate, bit/s.
    pub r_isl_bps: f64,
    /// Inter-satellite transmit power, W.
    pub p_isl_w: f64,
    /// Downlink bandwidth, Hz.
    pub b_hz: f64,
    /// Downlink transmit power, W.
    pub p_dl_w: f64,
    /// Combined downlink antenna gain, dB.
    pub g_dl_db: f64,
    /// Receiver noise power, dBW.
    pub noise_dbw: f64,
    /// Downlink carrier frequency, Hz.
    pub f_c_hz: f64,
    pub modcod: ModcodTable,
}

impl LinkSpec {
    /// Ka-band downlink and 10 Gbit/s laser ring defaults.
    pub fn baseline() -> Self {
        LinkSpec {
            r_isl_bps: 10e9,
            p_isl_w: 60.0,
            b_hz: 500e6,
            p_dl_w: 10.0,
            g_dl_db: 66.33,
            noise_dbw: -119.32,
            f_c_hz: 20e9,
            modcod: ModcodTable::dvb_s2x(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r_isl_bps <= 0.0
            || self.p_isl_w <= 0.0
            || self.b_hz <= 0.0
            || self.p_dl_w <= 0.0
            || self.f_c_hz <= 0.0
        {
            return Err(Error::Config("link rates, powers and bandwidth must be positive".into()));
        }
        self.modcod.validate()
    }

    /// Downlink SNR at slant range `d`: G P_DL (c / (4 pi d f_c))^2 / noise.
    pub fn downlink_snr_linear(&self, d_m: f64) -> Result<f64> {
        if !(d_m > 0.0) {
            return Err(Error::Domain(format!("slant range {d_m} must be positive")));
        }
        let lam_over_4pid =
            SPEED_OF_LIGHT_M_S / (4.0 * std::f64::consts::PI * d_m * self.f_c_hz);
        Ok(db_to_linear(self.g_dl_db) * self.p_dl_w * lam_over_4pid * lam_over_4pid
            / db_to_linear(self.noise_dbw))
    }

    pub fn downlink_snr_db(&self, d_m: f64) -> Result<f64> {
        Ok(linear_to_db(self.downlink_snr_linear(d_m)?))
    }

    /// Achievable downlink rate at slant range `d`; zero when no
    /// modulation-and-coding point decodes.
    pub fn downlink_rate_bps(&self, d_m: f64) -> Result<f64> {
        let snr = self.downlink_snr_linear(d_m)?;
        Ok(self
            .modcod
            .select(snr)
            .map(|e| e.spectral_efficiency * self.b_hz)
            .unwrap_or(0.0))
    }
}

/// The edge ring as a communication graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingTopology {
    pub n: usize,
    /// Neighbor slant range in meters.
    pub d_isl_m: f64,
}

/// A min-hop walk along the ring; `links[i]` joins ring nodes `links[i]`
/// and `links[i] + 1 mod n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub src: usize,
    pub dst: usize,
    pub links: Vec<usize>,
}

impl Route {
    pub fn n_hops(&self) -> usize {
        self.links.len()
    }
}

impl RingTopology {
    pub fn new(n: usize, d_isl_m: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidTopology(format!("ring of {n} nodes has no links")));
        }
        if !(d_isl_m > 0.0) {
            return Err(Error::InvalidTopology(format!("link range {d_isl_m} must be positive")));
        }
        Ok(RingTopology { n, d_isl_m })
    }

    /// Shorter-arc route; equidistant ties go in ascending-index direction.
    pub fn route(&self, src: usize, dst: usize) -> Result<Route> {
        if src >= self.n || dst >= self.n {
            return Err(Error::NoRoute(format!(
                "node out of range: {src} or {dst} on ring of {}",
                self.n
            )));
        }
        let fwd = (dst + self.n - src) % self.n;
        let bwd = self.n - fwd;
        let mut links = Vec::new();
        if fwd == 0 {
            return Ok(Route { src, dst, links });
        }
        if fwd <= bwd {
            for k in 0..fwd {
                links.push((src + k) % self.n);
            }
        } else {
            for k in 0..bwd {
                links.push((src + self.n - 1 - k) % self.n);
            }
        }
        Ok(Route { src, dst, links })
    }

    pub fn hop_count(&self, src: usize, dst: usize) -> Result<usize> {
        Ok(self.route(src, dst)?.n_hops())
    }

    /// Worst-case ring propagation: floor(n/2) hops of pure flight time.
    pub fn propagation_bound_s(&self) -> f64 {
        (self.n / 2) as f64 * self.d_isl_m / SPEED_OF_LIGHT_M_S
    }
}

/// Store-and-forward latency of raw data over `n_hops` ring links.
pub fn comm_latency_uncompressed_s(
    n_hops: usize,
    d_bits: f64,
    link: &LinkSpec,
    d_isl_m: f64,
) -> f64 {
    n_hops as f64 * (d_bits / link.r_isl_bps + d_isl_m / SPEED_OF_LIGHT_M_S)
}

/// Latency of the compressed result of `d_bits` of raw data: ring hops to
/// the downlink satellite, then the space-to-ground hop.
pub fn comm_latency_compressed_s(
    n_hops: usize,
    d_bits: f64,
    rho: f64,
    link: &LinkSpec,
    d_isl_m: f64,
    r_dl_bps: f64,
    d_eg_m: f64,
) -> Result<f64> {
    if !(r_dl_bps > 0.0) {
        return Err(Error::NoContact(0.0));
    }
    let compressed = d_bits / rho;
    Ok(n_hops as f64 * (compressed / link.r_isl_bps + d_isl_m / SPEED_OF_LIGHT_M_S)
        + compressed / r_dl_bps
        + d_eg_m / SPEED_OF_LIGHT_M_S)
}

/// Transmit energy for one ring hop.
pub fn isl_energy_j(d_bits: f64, link: &LinkSpec) -> f64 {
    link.p_isl_w * d_bits / link.r_isl_bps
}

/// Transmit energy for the space-to-ground hop at the current rate.
pub fn dl_energy_j(d_bits: f64, r_dl_bps: f64, link: &LinkSpec) -> Result<f64> {
    if !(r_dl_bps > 0.0) {
        return Err(Error::NoContact(0.0));
    }
    Ok(link.p_dl_w * d_bits / r_dl_bps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn builtin_table_respects_shannon_bound() {
        let t = ModcodTable::dvb_s2x();
        assert_eq!(t.entries.len(), 35);
        for e in &t.entries {
            assert!(
                e.min_snr_linear() >= 2f64.powf(e.spectral_efficiency) - 1.0,
                "{} violates the capacity bound",
                e.label
            );
        }
    }

    #[test]
    fn zenith_link_budget_closes_at_21_db() {
        // Cross-check in dB: gain + power - path loss - noise.
        let link = LinkSpec::baseline();
        let d = 617e3;
        let fspl_db = 20.0
            * (4.0 * std::f64::consts::PI * d * link.f_c_hz / SPEED_OF_LIGHT_M_S).log10();
        assert_relative_eq!(fspl_db, 174.27, epsilon = 0.01);
        let snr_db_budget = link.g_dl_db + 10.0 * link.p_dl_w.log10() - fspl_db - link.noise_dbw;
        let snr_db = link.downlink_snr_db(d).unwrap();
        assert_relative_eq!(snr_db, snr_db_budget, epsilon = 1e-9);
        assert_relative_eq!(snr_db, 21.38, epsilon = 0.01);
    }

    #[test]
    fn rate_tracks_snr_through_the_table() {
        let link = LinkSpec::baseline();
        // Zenith supports the densest shipped point.
        let r = link.downlink_rate_bps(617e3).unwrap();
        assert_relative_eq!(r, 500e6 * 5.900855, max_relative = 1e-12);
        // Just above the 64apsk_7/9 threshold the link carries 2.3 Gbit/s.
        let snr = db_to_linear(15.47 + 0.1);
        let e = link.modcod.select(snr).unwrap();
        assert_eq!(e.label, "64apsk_7/9");
        assert_relative_eq!(e.spectral_efficiency * link.b_hz, 2.3018e9, max_relative = 1e-4);
        // Below every threshold there is no service.
        assert_eq!(link.modcod.select(db_to_linear(-3.0)).map(|e| &e.label[..]), None);
    }

    #[test]
    fn rate_is_monotone_in_slant_range() {
        let link = LinkSpec::baseline();
        let mut prev = f64::INFINITY;
        for km in [617.0, 800.0, 1000.0, 1300.0, 1700.0, 2200.0, 2900.0, 4000.0] {
            let r = link.downlink_rate_bps(km * 1e3).unwrap();
            assert!(r <= prev, "rate grew with distance at {km} km");
            prev = r;
        }
    }

    #[test]
    fn analytic_table_applies_margin() {
        let t = ModcodTable::analytic(3.0);
        for e in &t.entries {
            let bound = 2f64.powf(e.spectral_efficiency) - 1.0;
            assert_relative_eq!(e.min_snr_db, linear_to_db(bound) + 3.0, epsilon = 1e-9);
        }
        t.validate().unwrap();
        assert!(ModcodTable::analytic(-0.5).validate().is_err());
    }

    #[test]
    fn csv_roundtrip_and_validation() {
        let text = "label,r,min_snr_db\nlow,1.0,1.0\nhigh,2.0,5.0\n";
        let t = ModcodTable::from_csv(text).unwrap();
        assert_eq!(t.entries.len(), 2);
        // 2^2 - 1 = 3 -> 4.77 dB, so 4.0 dB must be rejected.
        let bad = "label,r,min_snr_db\nx,2.0,4.0\n";
        assert!(ModcodTable::from_csv(bad).is_err());
        let unsorted = "label,r,min_snr_db\nb,2.0,5.0\na,1.0,1.0\n";
        assert!(ModcodTable::from_csv(unsorted).is_err());
    }

    #[test]
    fn ring_routes_take_the_short_arc() {
        let ring = RingTopology::new(23, 1.9e6).unwrap();
        assert_eq!(ring.route(0, 0).unwrap().n_hops(), 0);
        assert_eq!(ring.route(0, 1).unwrap().links, vec![0]);
        assert_eq!(ring.route(1, 0).unwrap().links, vec![0]);
        // 0 -> 12 is 11 hops backwards through links 22..12.
        let r = ring.route(0, 12).unwrap();
        assert_eq!(r.n_hops(), 11);
        assert_eq!(r.links[0], 22);
        assert_eq!(*r.links.last().unwrap(), 12);
        // Even ring ties resolve in the ascending direction.
        let even = RingTopology::new(24, 1.9e6).unwrap();
        let tie = even.route(0, 12).unwrap();
        assert_eq!(tie.n_hops(), 12);
        assert_eq!(tie.links, (0..12).collect::<Vec<_>>());
        assert!(ring.route(0, 23).is_err());
    }

    #[test]
    fn latencies_count_transmission_and_flight() {
        let link = LinkSpec::baseline();
        let d_isl = 1.903065e6;
        // One hop of a full image: 78.85 us on air + 6.35 ms of flight.
        let t = comm_latency_uncompressed_s(1, 788_513.0, &link, d_isl);
        assert_relative_eq!(t, 6.4267e-3, max_relative = 1e-3);
        // Compressed result, two hops plus the ground hop.
        let tc = comm_latency_compressed_s(2, 788_513.0, 2346.0, &link, d_isl, 2.3e9, 1.2e6)
            .unwrap();
        let expect = 2.0 * (788_513.0 / 2346.0 / 10e9 + d_isl / SPEED_OF_LIGHT_M_S)
            + 788_513.0 / 2346.0 / 2.3e9
            + 1.2e6 / SPEED_OF_LIGHT_M_S;
        assert_relative_eq!(tc, expect, epsilon = 1e-15);
        assert!(comm_latency_compressed_s(2, 788_513.0, 2346.0, &link, d_isl, 0.0, 1.2e6).is_err());
    }

    #[test]
    fn transmit_energies() {
        let link = LinkSpec::baseline();
        assert_relative_eq!(isl_energy_j(788_513.0, &link), 4.731e-3, max_relative = 1e-3);
        assert_relative_eq!(
            dl_energy_j(336.0, 2.3e9, &link).unwrap(),
            1.461e-6,
            max_relative = 1e-3
        );
        assert!(dl_energy_j(336.0, 0.0, &link).is_err());
    }

    #[test]
    fn propagation_bound_covers_half_the_ring() {
        let ring = RingTopology::new(23, 1.903065e6).unwrap();
        assert_relative_eq!(ring.propagation_bound_s(), 69.83e-3, max_relative = 1e-3);
        for dst in 0..23 {
            assert!(ring.hop_count(0, dst).unwrap() <= 11);
        }
    }
}
