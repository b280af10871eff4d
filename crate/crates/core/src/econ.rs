//! Capture-cost sampling, revenue lookup, transport costs and the
//! profitability verdict for a candidate connection.
//!
//! All amounts are USD in double precision. Costs enter every profit term
//! with a nonnegative sign, so raising any cost input can only lower profit.

use rand::Rng;

use crate::error::{EconError, ModelError};
use crate::geo::Route;
use crate::model::{DemandAgent, EconomicParams, Mode, SinkCategory, SourceType, SupplyAgent};

/// Absolute tolerance for money comparisons. Break-even counts as profitable.
pub const MONEY_TOLERANCE: f64 = 1e-6;

/// Closed interval of a uniformly distributed cost, USD per tonne.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostRange {
    lo: f64,
    hi: f64,
}

impl CostRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self, ModelError> {
        if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
            return Err(ModelError::CostRange { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn for_source(source_type: SourceType) -> Self {
        let (lo, hi) = source_type.capture_cost_range();
        Self { lo, hi }
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        let u: f64 = rng.random();
        // u < 1 keeps the draw inside [lo, hi]
        (self.lo + u * (self.hi - self.lo)).min(self.hi)
    }
}

pub fn draw_capture_cost<R: Rng + ?Sized>(source_type: SourceType, rng: &mut R) -> f64 {
    CostRange::for_source(source_type).sample(rng)
}

/// Looks up the source type by name, then draws its capture cost.
pub fn draw_capture_cost_named<R: Rng + ?Sized>(source_type: &str, rng: &mut R) -> Result<f64, ModelError> {
    Ok(draw_capture_cost(source_type.parse()?, rng))
}

pub fn revenue_rate(params: &EconomicParams, category: SinkCategory, source_is_dac: bool) -> f64 {
    params.revenue_rate(category, source_is_dac)
}

/// Operating cost of moving one tonne over the full route.
pub fn transport_op_per_tonne(route: &Route, params: &EconomicParams) -> f64 {
    let line = params.effective_rate(route.mode) * route.leg_b_miles;
    let access = params.effective_rate(route.access_mode()) * route.ac_miles();
    access + line
}

/// Up-front private infrastructure: spur pipeline or rail for legs A and
/// C, or the intermodal terminals of a water route. The line-haul leg is
/// not charged.
pub fn capital_cost(route: &Route, annual_tonnes: f64, params: &EconomicParams) -> f64 {
    let m = params.multipliers.transport(route.mode);
    let base = match route.mode {
        Mode::Pipeline => params.capex_pipeline_per_mile * route.ac_miles(),
        Mode::Rail => params.capex_rail_per_mile * route.ac_miles(),
        Mode::Water => {
            let buffer_tonnes = annual_tonnes * params.terminal_buffer_days / 365.0;
            f64::from(params.terminal_count) * params.capex_water_terminal_per_tonne * buffer_tonnes
        }
        Mode::Truck => 0.0,
    };
    base * m
}

/// Full-lifetime economics of one connection.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionEvaluation {
    pub route: Route,
    pub start_year: i32,
    pub annual_tonnes_moved: f64,
    pub mandated_years: u32,
    pub revenue_total: f64,
    pub supply_revenue: f64,
    pub demand_revenue: f64,
    pub capture_cost_total: f64,
    pub transport_op_total: f64,
    pub capex_total: f64,
    pub demand_cost_total: f64,
    pub supply_profit: f64,
    pub demand_profit: f64,
    pub profitable: bool,
    pub total_distance: f64,
    pub ac_distance: f64,
}

impl ConnectionEvaluation {
    pub fn lifetime_tonnes(&self) -> f64 {
        self.annual_tonnes_moved * f64::from(self.mandated_years)
    }

    pub fn total_profit(&self) -> f64 {
        self.supply_profit + self.demand_profit
    }

    pub fn profit_per_tonne(&self) -> f64 {
        self.total_profit() / self.lifetime_tonnes()
    }
}

/// Splits `total` so the two parts add back to `total` exactly: the larger
/// share is obtained by subtraction, which is exact in binary floating
/// point whenever the subtrahend lies within a factor of two of `total`.
fn split_exact(total: f64, share: f64) -> (f64, f64) {
    if share >= 0.5 {
        let a = total * share;
        (a, total - a)
    } else {
        let b = total * (1.0 - share);
        (total - b, b)
    }
}

pub fn evaluate_connection(
    s: &SupplyAgent,
    d: &DemandAgent,
    route: &Route,
    start_year: i32,
    params: &EconomicParams,
) -> Result<ConnectionEvaluation, EconError> {
    if start_year < route.available_year {
        return Err(EconError::StartBeforeAvailable {
            start: start_year,
            available: route.available_year,
        });
    }
    let q = s.captured_tonnes();
    if !(q > 0.0) {
        return Err(EconError::NonPositiveTonnage(q));
    }
    let mult = &params.multipliers;
    let years = f64::from(params.mandated_years);
    let credit = f64::from(params.credit_years.min(params.mandated_years));

    let rate = params.revenue_rate(d.category, s.source_type.is_dac());
    let revenue_total = rate * q * credit;
    let (supply_revenue, demand_revenue) = split_exact(revenue_total, params.share_to_supply);

    let capture_cost_total = s.capture_cost * mult.capture * q * years;
    let transport_op_total = transport_op_per_tonne(route, params) * q * years;
    let capex_total = capital_cost(route, q, params);
    let demand_cost_total = d.cost_per_tonne * mult.storage * q * years;

    let supply_profit = supply_revenue - (capture_cost_total + transport_op_total + capex_total);
    let demand_profit = demand_revenue - demand_cost_total;
    let profitable = supply_profit >= -MONEY_TOLERANCE && demand_profit >= -MONEY_TOLERANCE;

    Ok(ConnectionEvaluation {
        route: route.clone(),
        start_year,
        annual_tonnes_moved: q,
        mandated_years: params.mandated_years,
        revenue_total,
        supply_revenue,
        demand_revenue,
        capture_cost_total,
        transport_op_total,
        capex_total,
        demand_cost_total,
        supply_profit,
        demand_profit,
        profitable,
        total_distance: route.total_miles(),
        ac_distance: route.ac_miles(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GeoPoint;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn route(mode: Mode, a: f64, b: f64, c: f64) -> Route {
        Route {
            supply_id: Arc::from("S"),
            demand_id: Arc::from("D"),
            mode,
            entry_node: Arc::from("n1"),
            exit_node: Arc::from("n2"),
            leg_a_miles: a,
            leg_b_miles: b,
            leg_c_miles: c,
            available_year: 2025,
        }
    }

    fn agents(source: SourceType, capture_cost: f64, q: f64, category: SinkCategory, sink_cost: f64) -> (SupplyAgent, DemandAgent) {
        let p = GeoPoint::new(0.0, 0.0).unwrap();
        let mut s = SupplyAgent::new("S", source, p, q);
        s.capture_cost = capture_cost;
        let mut d = DemandAgent::new("D", category, p, 2025);
        d.cost_per_tonne = sink_cost;
        (s, d)
    }

    #[test]
    fn capture_cost_draws_stay_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let v = draw_capture_cost(SourceType::Dac, &mut rng);
            assert!((134.0..=342.0).contains(&v));
            let v = draw_capture_cost(SourceType::Beccs, &mut rng);
            assert!((55.0..=60.0).contains(&v));
        }
        let fixed = CostRange::new(42.0, 42.0).unwrap();
        assert_eq!(fixed.sample(&mut rng), 42.0);
        assert!(draw_capture_cost_named("Unobtainium", &mut rng).is_err());
        assert!(draw_capture_cost_named("Cement", &mut rng).is_ok());
    }

    #[test]
    fn capture_cost_is_deterministic_per_stream() {
        let a = draw_capture_cost(SourceType::Cement, &mut ChaCha8Rng::seed_from_u64(9));
        let b = draw_capture_cost(SourceType::Cement, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn revenue_table_values() {
        let p = EconomicParams::default();
        assert_eq!(revenue_rate(&p, SinkCategory::Storage, true), 180.0);
        assert_eq!(revenue_rate(&p, SinkCategory::Storage, false), 85.0);
        assert_eq!(revenue_rate(&p, SinkCategory::Utilization, false), 60.0);
        assert_eq!(revenue_rate(&p, SinkCategory::Utilization, true), 130.0);
    }

    #[test]
    fn transport_operating_cost() {
        let p = EconomicParams::default();
        // 215 mi * 0.0708
        let rail = transport_op_per_tonne(&route(Mode::Rail, 10.0, 200.0, 5.0), &p);
        assert!((rail - 15.222).abs() < 1e-9);
        // 15 mi by truck * 0.1770 + 500 mi by barge * 0.0644
        let water = transport_op_per_tonne(&route(Mode::Water, 10.0, 500.0, 5.0), &p);
        assert!((water - 34.855).abs() < 1e-9);
        assert_eq!(transport_op_per_tonne(&route(Mode::Pipeline, 0.0, 0.0, 0.0), &p), 0.0);
    }

    #[test]
    fn capital_costs() {
        let p = EconomicParams::default();
        assert!((capital_cost(&route(Mode::Pipeline, 4.0, 300.0, 6.0), 1e6, &p) - 7_841_980.0).abs() < 1e-6);
        assert!((capital_cost(&route(Mode::Rail, 10.0, 300.0, 5.0), 1e6, &p) - 30_000_000.0).abs() < 1e-6);
        // 2 terminals * 4585.1 USD/t * (1e6 t/y * 7 / 365 days)
        let expected = 2.0 * 4585.1 * (1e6 * 7.0 / 365.0);
        let water = capital_cost(&route(Mode::Water, 10.0, 300.0, 5.0), 1e6, &p);
        assert!((water - expected).abs() < 1e-6);
        assert!((water - 175_866_000.0).abs() < 1_000.0);
    }

    #[test]
    fn worked_pipeline_example() {
        let p = EconomicParams::default();
        let (s, d) = agents(SourceType::Chemicals, 20.0, 1e6, SinkCategory::Storage, 10.0);
        let e = evaluate_connection(&s, &d, &route(Mode::Pipeline, 5.0, 100.0, 5.0), 2025, &p).unwrap();
        assert!((e.transport_op_total / 12e6 - 1.771).abs() < 1e-12);
        assert!((e.capex_total - 7_841_980.0).abs() < 1e-6);
        assert!((e.supply_revenue - 765_000_000.0).abs() < 1e-6);
        assert!((e.supply_profit - 495_906_020.0).abs() < 1e-6 * 495_906_020.0);
        assert!((e.demand_profit - 135_000_000.0).abs() < 1e-6 * 135_000_000.0);
        assert!(e.profitable);
        assert!((e.profit_per_tonne() - 52.5755).abs() < 1e-4);
    }

    #[test]
    fn expensive_dac_is_never_profitable() {
        let p = EconomicParams::default();
        let (s, d) = agents(SourceType::Dac, 200.0, 1e5, SinkCategory::Storage, 10.0);
        for r in [route(Mode::Pipeline, 0.0, 0.0, 0.0), route(Mode::Rail, 1.0, 50.0, 1.0)] {
            assert!(!evaluate_connection(&s, &d, &r, 2025, &p).unwrap().profitable);
        }
    }

    #[test]
    fn free_connection_earns_full_rate() {
        let p = EconomicParams::default();
        let (s, d) = agents(SourceType::Refinery, 0.0, 5e5, SinkCategory::Utilization, 0.0);
        let e = evaluate_connection(&s, &d, &route(Mode::Pipeline, 0.0, 0.0, 0.0), 2025, &p).unwrap();
        assert!(e.profitable);
        assert!((e.profit_per_tonne() - 60.0).abs() < 1e-12);
    }

    #[test]
    fn start_before_availability_is_error() {
        let p = EconomicParams::default();
        let (s, d) = agents(SourceType::Refinery, 20.0, 5e5, SinkCategory::Storage, 10.0);
        let mut r = route(Mode::Rail, 1.0, 1.0, 1.0);
        r.available_year = 2030;
        assert!(matches!(
            evaluate_connection(&s, &d, &r, 2029, &p),
            Err(EconError::StartBeforeAvailable { .. })
        ));
        let (mut s, d) = agents(SourceType::Refinery, 20.0, 5e5, SinkCategory::Storage, 10.0);
        s.capture_fraction = 0.0;
        assert!(evaluate_connection(&s, &d, &route(Mode::Rail, 1.0, 1.0, 1.0), 2025, &p).is_err());
    }

    fn arb_mode() -> impl Strategy<Value = Mode> {
        prop_oneof![Just(Mode::Pipeline), Just(Mode::Rail), Just(Mode::Water)]
    }

    prop_compose! {
        fn arb_case()(mode in arb_mode(), a in 0.0..200.0f64, b in 0.0..2000.0f64, c in 0.0..200.0f64,
                      cost in 0.0..200.0f64, q in 1e3..1e7f64, sink_cost in 0.0..30.0f64,
                      share in 0.0..=1.0f64, dac in any::<bool>(), storage in any::<bool>())
            -> (Route, SupplyAgent, DemandAgent, f64) {
            let src = if dac { SourceType::Dac } else { SourceType::Cement };
            let cat = if storage { SinkCategory::Storage } else { SinkCategory::Utilization };
            let (s, d) = agents(src, cost, q, cat, sink_cost);
            (route(mode, a, b, c), s, d, share)
        }
    }

    proptest! {
        #[test]
        fn revenue_split_is_exact((r, s, d, share) in arb_case()) {
            let p = EconomicParams { share_to_supply: share, ..Default::default() };
            let e = evaluate_connection(&s, &d, &r, 2025, &p).unwrap();
            prop_assert_eq!(e.supply_revenue + e.demand_revenue, e.revenue_total);
            prop_assert_eq!(e.profitable, e.supply_profit >= -MONEY_TOLERANCE && e.demand_profit >= -MONEY_TOLERANCE);
            prop_assert_eq!(e.ac_distance, r.leg_a_miles + r.leg_c_miles);
        }

        #[test]
        fn raising_a_multiplier_never_helps((r, s, d, share) in arb_case(), which in 0usize..5, f in 1.0..5.0f64) {
            let base = EconomicParams { share_to_supply: share, ..Default::default() };
            let mut raised = base.clone();
            let m = &mut raised.multipliers;
            *[&mut m.capture, &mut m.storage, &mut m.pipeline, &mut m.rail, &mut m.water][which] = f;
            let e0 = evaluate_connection(&s, &d, &r, 2025, &base).unwrap();
            let e1 = evaluate_connection(&s, &d, &r, 2025, &raised).unwrap();
            prop_assert!(e1.supply_profit <= e0.supply_profit);
            prop_assert!(e1.demand_profit <= e0.demand_profit);
            prop_assert!(!(e1.profitable && !e0.profitable));
        }

        #[test]
        fn longer_mandate_never_raises_profit((r, s, d, share) in arb_case(), extra in 1u32..7) {
            let base = EconomicParams { share_to_supply: share, ..Default::default() };
            let longer = EconomicParams { mandated_years: base.mandated_years + extra, ..base.clone() };
            let e0 = evaluate_connection(&s, &d, &r, 2025, &base).unwrap();
            let e1 = evaluate_connection(&s, &d, &r, 2025, &longer).unwrap();
            prop_assert_eq!(e0.revenue_total, e1.revenue_total);
            prop_assert!(e1.supply_profit <= e0.supply_profit);
            prop_assert!(e1.demand_profit <= e0.demand_profit);
        }

        #[test]
        fn extreme_shares_force_unprofitable((r, s, d, _share) in arb_case()) {
            let mut d = d;
            d.cost_per_tonne = d.cost_per_tonne.max(0.5);
            let all_supply = EconomicParams { share_to_supply: 1.0, ..Default::default() };
            prop_assert!(!evaluate_connection(&s, &d, &r, 2025, &all_supply).unwrap().profitable);
            let mut s = s;
            s.capture_cost = s.capture_cost.max(0.5);
            let none = EconomicParams { share_to_supply: 0.0, ..Default::default() };
            prop_assert!(!evaluate_connection(&s, &d, &r, 2025, &none).unwrap().profitable);
        }
    }
}
