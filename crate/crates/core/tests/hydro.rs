use chrono::{Duration, NaiveDate};
use ndarray::Array2;
use proptest::prelude::*;
use rnn_dynamics::hydro::*;

fn arb_params() -> impl Strategy<Value = Gr4jParams> {
    prop::array::uniform8(0.001f64..1.0).prop_map(Gr4jParams::from_unit)
}

fn day(i: usize, precip: f64, pet: f64, temp: f64, flow: Option<f64>) -> HydroRecord {
    HydroRecord {
        day_index: i,
        date: NaiveDate::from_ymd_opt(2001, 1, 1).unwrap() + Duration::days(i as i64),
        precip,
        pet,
        temp,
        flow,
    }
}

/// Standalone transcription of one GR4J day starting from empty unit hydrographs.
fn gr4j_first_day(p: &Gr4jParams, s0: f64, r0: f64, precip: f64, pet: f64) -> (f64, f64, f64) {
    let (x1, x2, x3, x4) = (p.x1, p.x2, p.x3, p.x4);
    let (pn, en) = if precip >= pet { (precip - pet, 0.0) } else { (0.0, pet - precip) };
    let ps = x1 * (1.0 - (s0 / x1).powi(2)) * (pn / x1).tanh() / (1.0 + s0 / x1 * (pn / x1).tanh());
    let es = s0 * (2.0 - s0 / x1) * (en / x1).tanh() / (1.0 + (1.0 - s0 / x1) * (en / x1).tanh());
    let s1 = s0 + ps - es;
    let perc = s1 * (1.0 - (1.0 + (4.0 * s1 / (9.0 * x1)).powi(4)).powf(-0.25));
    let s = s1 - perc;
    let pr = perc + (pn - ps);
    // first ordinates: SH1(1) and SH2(1), valid for x4 >= 1
    let uh1_0 = (1.0 / x4).powf(2.5);
    let uh2_0 = 0.5 * (1.0 / x4).powf(2.5);
    let q9 = 0.9 * pr * uh1_0;
    let q1 = 0.1 * pr * uh2_0;
    let f = x2 * (r0 / x3).powf(3.5);
    let r1 = (r0 + q9 + f).max(0.0);
    let qr = r1 * (1.0 - (1.0 + (r1 / x3).powi(4)).powf(-0.25));
    let qd = (q1 + f).max(0.0);
    (qr + qd, s, r1 - qr)
}

#[test]
fn gr4j_step_matches_scalar_oracle() {
    let p = Gr4jParams::site1();
    let uh = UnitHydrographs::new(p.x4);
    let mut st = Gr4jState::initial(&p);
    let (s0, r0) = (st.s, st.r);
    assert_eq!((s0, r0), (0.3 * p.x1, 0.5 * p.x3));
    let f = gr4j_step(&mut st, &p, &uh, 10.0, 2.0);
    let (q, s, r) = gr4j_first_day(&p, s0, r0, 10.0, 2.0);
    assert!((f.q - q).abs() <= 1e-10, "{} vs {q}", f.q);
    assert!((st.s - s).abs() <= 1e-10);
    assert!((st.r - r).abs() <= 1e-10);
    // dry day: evaporation branch
    let mut st = Gr4jState::initial(&p);
    let f = gr4j_step(&mut st, &p, &uh, 0.5, 4.0);
    let (q, s, _) = gr4j_first_day(&p, s0, r0, 0.5, 4.0);
    assert!((f.q - q).abs() <= 1e-10 && (st.s - s).abs() <= 1e-10);
}

#[test]
fn melt_example_by_hand() {
    let p = Gr4jParams::site1();
    let mut st = Gr4jState {
        snowpack: 10.0,
        ..Gr4jState::empty(&p)
    };
    let out = snow_step(&mut st, &p, 0.0, p.tt + 2.0);
    let melt = 4.41 * 2.0;
    let spill = melt - 0.23 * (10.0 - melt);
    assert!((out - spill).abs() < 1e-12);
}

#[test]
fn reconstruct_matches_accumulation_oracle() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    let total = 30;
    let mut preds = Vec::new();
    let mut starts = Vec::new();
    for i in 0..20 {
        let len = rng.gen_range(3..=11);
        let start = if i == 0 { 0 } else if i == 1 { total - len } else { rng.gen_range(0..=total - len) };
        preds.push(Array2::from_shape_fn((len, 1), |_| rng.gen_range(-5.0..5.0)));
        starts.push(start);
    }
    let series = reconstruct_from_windows(&preds, &starts, total).unwrap();
    for d in 0..total {
        let vals: Vec<f64> = preds
            .iter()
            .zip(&starts)
            .filter(|(w, &s)| s <= d && d < s + w.nrows())
            .map(|(w, &s)| w[[d - s, 0]])
            .collect();
        if vals.is_empty() {
            continue;
        }
        let oracle = vals.iter().sum::<f64>() / vals.len() as f64;
        assert!((series[d] - oracle).abs() <= 1e-14 * oracle.abs().max(1.0), "day {d}: {} vs {oracle}", series[d]);
    }
}

#[test]
fn perfect_predictor_forecasts_exactly() {
    let recs = SyntheticCatchment::new(300, 9).generate().unwrap();
    let out = forecast_with(&recs, 45, 210, |w| Ok(w.labels.clone())).unwrap();
    assert_eq!(out.forecast_rmse, 0.0);
    assert_eq!(out.modeled, observed_flow(&recs));
}

#[test]
fn water_balance_closes_over_two_years() {
    let recs = SyntheticCatchment::new(730, 5).generate().unwrap();
    for params in [Gr4jParams::site1(), Gr4jParams::from_unit([0.2, 0.9, 0.3, 0.7, 0.6, 0.5, 0.4, 0.9])] {
        let sim = simulate(&recs, &params).unwrap();
        let inflow: f64 = recs.iter().map(|r| r.precip).sum::<f64>() + sim.exchange.iter().sum::<f64>();
        let outflow: f64 = sim.q.iter().sum::<f64>() + sim.actual_et.iter().sum::<f64>();
        let residual = inflow - outflow - (sim.final_storage - sim.initial_storage);
        assert!(residual.abs() <= 1e-6, "residual {residual} mm");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn snow_step_conserves_mass(
        params in arb_params(),
        pack in 0.0f64..300.0,
        held in 0.0f64..1.0,
        precip in 0.0f64..80.0,
        temp in -25.0f64..25.0,
    ) {
        let liquid = held * params.cwh * pack;
        let mut st = Gr4jState { snowpack: pack, liquid, ..Gr4jState::empty(&params) };
        let out = snow_step(&mut st, &params, precip, temp);
        let before = precip + pack + liquid;
        let after = out + st.snowpack + st.liquid;
        prop_assert!((before - after).abs() <= 1e-12 * before.max(1.0));
        prop_assert!(st.snowpack >= 0.0 && st.liquid >= 0.0 && out >= 0.0);
        prop_assert!(st.liquid <= params.cwh * st.snowpack + 1e-12);
    }

    #[test]
    fn stores_stay_in_bounds(
        params in arb_params(),
        forcing in prop::collection::vec((0.0f64..120.0, 0.0f64..8.0), 1..200),
    ) {
        let uh = UnitHydrographs::new(params.x4);
        let mut st = Gr4jState::initial(&params);
        for (p, e) in forcing {
            let f = gr4j_step(&mut st, &params, &uh, p, e);
            prop_assert!(f.q >= 0.0 && f.q.is_finite());
            prop_assert!(st.s >= 0.0 && st.s <= params.x1, "s = {}", st.s);
            prop_assert!(st.r >= 0.0 && st.r <= params.x3, "r = {}", st.r);
        }
    }

    #[test]
    fn unit_hydrographs_sum_to_one(x4 in 0.5f64..=5.0) {
        let uh = UnitHydrographs::new(x4);
        prop_assert_eq!(uh.uh1.len(), x4.ceil() as usize);
        prop_assert_eq!(uh.uh2.len(), (2.0 * x4).ceil() as usize);
        prop_assert!((uh.uh1.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!((uh.uh2.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(uh.uh1.iter().chain(&uh.uh2).all(|&o| o >= 0.0));
    }

    #[test]
    fn window_round_trip(m in 1usize..400, frac in 0.0f64..1.0, seed in 0u64..1000) {
        let l = 1 + ((m - 1) as f64 * frac) as usize;
        let recs: Vec<_> = (0..m)
            .map(|i| day(i, 1.0, 1.0, 0.0, Some(((i as u64 * 2654435761 + seed) % 1000) as f64 / 7.0)))
            .collect();
        let w = make_windows(&recs, l, 0..m).unwrap();
        prop_assert_eq!(w.len(), m - l + 1);
        prop_assert!(w.start_indices.windows(2).all(|p| p[1] == p[0] + 1));
        let back = reconstruct_from_windows(&w.labels, &w.start_indices, m).unwrap();
        prop_assert_eq!(back, observed_flow(&recs));
    }

    #[test]
    fn calibration_returns_sampled_argmin(n in 1usize..24, seed in 0u64..50) {
        let recs = SyntheticCatchment::new(420, 3).generate().unwrap();
        let res = calibrate_grid(&recs, n, seed, 0..420).unwrap();
        prop_assert_eq!(res.points.len(), n);
        let mut best = 0;
        for (i, p) in res.points.iter().enumerate() {
            let r = calibration_rmse(&recs, &p.params, 0..420).unwrap();
            prop_assert_eq!(r, p.rmse);
            if r < res.points[best].rmse {
                best = i;
            }
        }
        prop_assert_eq!(res.best, res.points[best].params);
        prop_assert_eq!(res.best_rmse, res.points[best].rmse);
    }
}
