use minksep::catalog::{self, chart, list_charts, list_webs, web, Params};
use minksep::concircular::{classify_ct, point_eigenvalues, ConcircularTensor};
use minksep::{Error, Operator, Vec3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

#[test]
fn counts() {
    assert_eq!(list_webs().len(), 45);
    let ids: Vec<usize> = list_webs().iter().map(|w| w.id).collect();
    assert_eq!(ids, (1..=45).collect::<Vec<_>>());
    assert_eq!(list_charts().count(), 88);
    assert_eq!(list_charts().filter(|c| c.irreducible).count(), 33);
    assert_eq!(list_charts().filter(|c| !c.irreducible).count(), 55);
}

#[test]
fn per_web_chart_counts() {
    for (id, n) in [(7, 3), (20, 4), (26, 4), (29, 1), (30, 4), (31, 4)] {
        assert_eq!(web(id).unwrap().charts.len(), n, "web {id}");
    }
    assert_eq!(web(31).unwrap().inequivalent_regions, Some(3));
}

#[test]
fn labels() {
    let w = web(34).unwrap();
    assert!(w.hm_label.is_none() && w.km_h_label.is_none());
    assert_eq!(web(29).unwrap().hm_label.as_deref(), Some("asymmetric web IX"));
    assert_eq!(web(29).unwrap().name, "Ellipsoidal web I");
}

#[test]
fn family_matches_classification() {
    for w in list_webs() {
        let l = w.generator_ct(&w.params.defaults()).unwrap();
        let c = classify_ct(&l).unwrap();
        assert_eq!(c.class.tag(), w.family.tag(), "web {}", w.id);
    }
}

#[test]
fn map_examples() {
    let p = catalog::chart_map(chart(2, 1).unwrap(), &Params::new(), &[1.0, 2.0, FRAC_PI_2]).unwrap();
    assert!(close(p[0], 1.0, 1e-15) && p[1].abs() < 1e-15 && close(p[2], 2.0, 1e-15));

    let p = catalog::chart_map(chart(16, 2).unwrap(), &Params::new(), &[1.0, 0.0, 0.0]);
    // v = 0 is a boundary of web 16's second chart; evaluate just inside
    match p {
        Ok(p) => assert!(close(p[0], 1.0, 1e-12) && p[1].abs() < 1e-12 && p[2].abs() < 1e-12),
        Err(Error::RangeViolation(_)) => {
            let p = catalog::chart_map(chart(16, 2).unwrap(), &Params::new(), &[1.0, 1e-9, 1e-9]).unwrap();
            assert!(close(p[0], 1.0, 1e-8) && p[1].abs() < 1e-8 && p[2].abs() < 1e-8);
        }
        Err(e) => panic!("{e}"),
    }

    // web 45: x − t = 6, x + t = 0, y = −1 (see the decisions ledger for y)
    let p = catalog::chart_map(chart(45, 1).unwrap(), &Params::new(), &[3.0, 2.0, 1.0]).unwrap();
    assert!(close(p[1] - p[0], 6.0, 1e-15));
    assert!((p[1] + p[0]).abs() < 1e-15);
    assert!(close(p[2], -1.0, 1e-15));
}

#[test]
fn web29_spot_values() {
    let c = chart(29, 1).unwrap();
    let pr = Params::new().a(1.0).b(2.0);
    let p = catalog::chart_map(c, &pr, &[3.0, 1.5, -1.0]).unwrap();
    assert!(close(p[0] * p[0], 2.25, 1e-14));
    assert!(close(p[1] * p[1], 2.0, 1e-14));
    assert!(close(p[2] * p[2], 0.75, 1e-14));
    let g = catalog::chart_metric_eval(c, &pr, &[3.0, 1.5, -1.0]).unwrap();
    assert!(close(g[0], 0.25, 1e-15));
    assert!(g[1] > 0.0 && g[2] < 0.0);
}

#[test]
fn metric_examples() {
    let g = catalog::chart_metric_eval(chart(1, 1).unwrap(), &Params::new(), &[0.3, -2.0, 5.0]).unwrap();
    assert_eq!(g, [-1.0, 1.0, 1.0]);
    let g = catalog::chart_metric_eval(chart(38, 1).unwrap(), &Params::new(), &[2.0, 1.0, 0.5]).unwrap();
    assert_eq!((g[0], g[2]), (-3.0, 4.0));
}

#[test]
fn pullback_examples() {
    let r = catalog::pullback_residual(chart(1, 1).unwrap(), &Params::new(), &[0.1, 0.2, 0.3]).unwrap();
    assert_eq!(r, 0.0);
    let c = chart(29, 1).unwrap();
    let pr = Params::new().a(1.0).b(2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..100 {
        let s = c.sample(&pr, &mut rng).unwrap();
        assert!(catalog::pullback_residual(c, &pr, &s).unwrap() <= 1e-9);
    }
}

#[test]
fn corrupted_map_is_detected() {
    let mut c = chart(2, 1).unwrap().clone();
    c.map[1].1 = minksep::expr::Expr::parse("v*cosh(w)").unwrap();
    let r = c.pullback_residual(&Params::new(), &[0.4, 1.3, 0.7]).unwrap();
    assert!(r > 0.1, "{r}");
}

#[test]
fn region_examples() {
    let c = chart(16, 2).unwrap();
    assert!(catalog::region_contains(c, &Params::new(), &Vec3::new(1.0, 0.0, 0.0)).unwrap());
    assert!(!catalog::region_contains(c, &Params::new(), &Vec3::new(0.0, 1.0, 0.0)).unwrap());
    let c7 = web(7)
        .unwrap()
        .charts
        .iter()
        .find(|c| c.region.iter().any(|p| p.text == "abs(t) - abs(x) > a"))
        .unwrap();
    assert!(catalog::region_contains(c7, &Params::new().a(1.0), &Vec3::new(2.0, 0.5, 0.0)).unwrap());
}

#[test]
fn invert_examples() {
    let c = chart(29, 1).unwrap();
    let pr = Params::new().a(1.0).b(2.0);
    let s = catalog::chart_invert(c, &pr, &Vec3::new(1.5, 2f64.sqrt(), 0.75f64.sqrt())).unwrap();
    assert!(close(s[0], 3.0, 1e-10) && close(s[1], 1.5, 1e-10) && close(s[2], -1.0, 1e-10));

    let s = catalog::chart_invert(chart(2, 1).unwrap(), &Params::new(), &Vec3::new(1.0, 0.0, 2.0)).unwrap();
    assert!(close(s[0], 1.0, 1e-15) && close(s[1], 2.0, 1e-15) && close(s[2], FRAC_PI_2, 1e-15));

    let r = catalog::chart_invert(chart(16, 2).unwrap(), &Params::new(), &Vec3::new(1.0, 0.6, 0.8));
    assert_eq!(r, Err(Error::OutsideRegion));
}

#[test]
fn bad_params() {
    let c = chart(29, 1).unwrap();
    let r = catalog::chart_map(c, &Params::new().a(2.0).b(1.0), &[3.0, 1.5, -1.0]);
    assert!(matches!(r, Err(Error::BadParams(_))));
    let r = catalog::chart_map(c, &Params::new().a(1.0).b(2.0), &[1.5, 3.0, -1.0]);
    assert!(matches!(r, Err(Error::RangeViolation(_))));
    assert!(matches!(chart(99, 1), Err(Error::UnknownWeb(99))));
    assert!(matches!(chart(29, 2), Err(Error::UnknownChart(29, 2))));
}

#[test]
fn full_pullback_suite() {
    let mut worst = Vec::new();
    for c in list_charts() {
        let pr = c.web().params.defaults();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + c.web_id as u64 * 10 + c.chart_index as u64);
        let mut m = 0.0f64;
        for _ in 0..100 {
            let s = c.sample(&pr, &mut rng).unwrap();
            m = m.max(c.pullback_residual(&pr, &s).unwrap());
        }
        if m > 1e-8 {
            worst.push(format!("{c}: {m:.2e}"));
        }
    }
    assert!(worst.is_empty(), "{worst:?}");
}

#[test]
fn signature_and_region_soundness() {
    for c in list_charts() {
        let pr = c.web().params.defaults();
        let mut rng = ChaCha8Rng::seed_from_u64(7 + c.web_id as u64 * 10 + c.chart_index as u64);
        for _ in 0..20 {
            let s = c.sample(&pr, &mut rng).unwrap();
            let g = c.metric_eval(&pr, &s).unwrap();
            let neg: Vec<usize> = (0..3).filter(|&i| g[i] < 0.0).collect();
            assert_eq!(neg, vec![c.timelike], "chart {c}");
            let p = c.map(&pr, &s).unwrap();
            assert!(c.region_contains(&pr, &p).unwrap(), "chart {c} at {s:?}");
        }
    }
}

#[test]
fn irreducible_round_trips_and_traces() {
    for c in list_charts().filter(|c| c.irreducible) {
        let w = c.web();
        let pr = w.params.defaults();
        let l = w.generator_ct(&pr).unwrap();
        let off = c.offset(&pr).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(500 + c.web_id as u64 * 10 + c.chart_index as u64);
        for _ in 0..100 {
            let s = c.sample(&pr, &mut rng).unwrap();
            let p = c.map(&pr, &s).unwrap();
            let tr = l.evaluate(&(p + off)).trace();
            assert!(close(tr, s[0] + s[1] + s[2], 1e-9), "chart {c}");
            let e = point_eigenvalues(&l, &(p + off)).unwrap();
            let back = c.invert(&pr, &p).unwrap_or_else(|err| panic!("chart {c} at {s:?} -> {e:?}: {err}"));
            let sc = 1.0 + s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..3 {
                assert!((back[i] - s[i]).abs() <= 1e-8 * sc, "chart {c}: {s:?} vs {back:?}");
            }
        }
    }
}

#[test]
fn generators_identify_their_webs() {
    use minksep::catalog::identify_webs;
    use minksep::jordan::random_pseudo_orthogonal;
    for w in list_webs() {
        let l = w.generator_ct(&w.params.defaults()).unwrap();
        assert!(identify_webs(&l).unwrap().contains(&w.id), "web {}", w.id);
        // any geometric equivalent carries the same fingerprint
        let moved = l
            .affine(-1.7, 0.3)
            .translated(&Vec3::new(0.2, -0.4, 1.1))
            .transformed(&random_pseudo_orthogonal(w.id as u64));
        assert_eq!(identify_webs(&moved).unwrap(), identify_webs(&l).unwrap(), "web {}", w.id);
    }
    let radial = ConcircularTensor::new(Operator::zero(), Vec3::zero(), 1.0).unwrap();
    assert_eq!(identify_webs(&radial).unwrap(), (14..=22).collect::<Vec<_>>());
    let diag = ConcircularTensor::new(Operator::diag([0.0, 1.0, 2.0]), Vec3::zero(), 1.0).unwrap();
    assert_eq!(identify_webs(&diag).unwrap(), vec![29]);
}
