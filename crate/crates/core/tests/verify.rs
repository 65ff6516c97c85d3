use etf_moments::frames::{build_conference, harmonic_etf, qr_difference_set, ConferenceMatrix, Frame};
use etf_moments::moments::{eval_moment, moment_frame};
use etf_moments::verify::{
    conference_traces, frame_moment_from_conference, frame_traces, mc_moment_frame, mc_moment_s, sample_selection,
    v_n_exact_labels, MCConfig, MCReport,
};

fn qr(q: u64) -> (Frame, ConferenceMatrix) {
    let frame = harmonic_etf(&qr_difference_set(q).unwrap()).unwrap();
    let conf = build_conference(&frame).unwrap();
    (frame, conf)
}

fn set_partitions(k: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for l in 1..=max + 1 {
            cur.push(l);
            rec(k, max.max(l), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, 0, &mut Vec::new(), &mut out);
    out
}

/// `E tr((PSP)^k) / n^(k/2+1)`: every index tuple, grouped by its pattern of equal indices.
fn exact_conference_expectation(conf: &ConferenceMatrix, k: usize, p: f64) -> f64 {
    set_partitions(k)
        .iter()
        .map(|sigma| {
            let blocks = *sigma.iter().max().unwrap();
            p.powi(blocks as i32) * v_n_exact_labels(sigma, conf).unwrap().re
        })
        .sum()
}

#[test]
fn partition_sum_reproduces_the_full_trace() {
    for q in [7, 11] {
        let (_, conf) = qr(q);
        let n = conf.n();
        let all: Vec<usize> = (0..n).collect();
        let traces = conference_traces(&conf, &all, 5);
        for k in 1..=5 {
            let exact = exact_conference_expectation(&conf, k, 1.0);
            assert!((exact - traces[k - 1]).abs() < 1e-10, "q={q} k={k}: {exact} vs {}", traces[k - 1]);
        }
    }
}

#[test]
fn conference_sampling_is_unbiased_at_finite_n() {
    let (_, conf) = qr(11);
    let cfg = MCConfig::new(0.4, 5, 40_000, 7);
    let report = mc_moment_s(&conf, &cfg).unwrap();
    for row in &report.rows {
        let exact = exact_conference_expectation(&conf, row.k, cfg.p);
        assert!(
            (row.empirical - exact).abs() <= 4.0 * row.stderr + 1e-12,
            "k={}: {} vs {exact} (stderr {})",
            row.k,
            row.empirical,
            row.stderr
        );
    }
}

#[test]
fn binomial_link_holds_on_every_sample() {
    for q in [7, 19, 43] {
        let (frame, conf) = qr(q);
        let n = frame.n();
        for trial in 0..20 {
            let kept = sample_selection(n, 0.6, 99, trial);
            let frame_side = frame_traces(&frame, &kept, 6);
            let conf_side = conference_traces(&conf, &kept, 6);
            for k in 1..=6 {
                let linked = frame_moment_from_conference(k, frame.x(), n, kept.len() as f64 / n as f64, &conf_side);
                assert!((linked - frame_side[k - 1]).abs() <= 1e-10 * frame_side[k - 1].abs().max(1.0), "q={q} k={k}");
            }
        }
    }
}

#[test]
fn first_conference_moment_is_the_scaled_diagonal() {
    for q in [7, 23, 103] {
        let (_, conf) = qr(q);
        let n = conf.n() as f64;
        let all: Vec<usize> = (0..conf.n()).collect();
        let m1 = conference_traces(&conf, &all, 1)[0];
        assert!((m1 - conf.s() * (1.0 - 1.0 / n).sqrt()).abs() < 1e-12);
        let half = exact_conference_expectation(&conf, 1, 0.5);
        assert!((half - 0.5 * conf.s() * (1.0 - 1.0 / n).sqrt()).abs() < 1e-12);
    }
}

#[test]
fn second_frame_moment_is_exact_at_finite_n() {
    // diagonal 1 and |G_ij|^2 = x/(n-1) make E (1/n) tr((PGP)^2) = p + p^2 x for every n
    let (frame, _) = qr(103);
    for p in [0.3, 0.7] {
        let report = mc_moment_frame(&frame, &MCConfig::new(p, 2, 4000, 11)).unwrap();
        let row = &report.rows[1];
        let exact = p + p * p * frame.x();
        assert!((row.predicted - exact).abs() < 1e-12);
        assert!((row.empirical - exact).abs() <= 4.0 * row.stderr, "{} vs {exact}", row.empirical);
        let predicted = eval_moment(&moment_frame(2).unwrap(), frame.gamma(), p).unwrap();
        assert!((predicted - exact).abs() < 1e-12);
    }
}

#[test]
fn reports_are_reproducible() {
    let (frame, conf) = qr(43);
    let cfg = MCConfig::new(0.5, 4, 300, 5);
    let base = mc_moment_frame(&frame, &cfg).unwrap();
    let json = |r: &MCReport| serde_json::to_string(r).unwrap();
    assert_eq!(base, mc_moment_frame(&frame, &cfg).unwrap());
    for threads in [1, 3] {
        let other = mc_moment_frame(&frame, &cfg.clone().with_threads(threads)).unwrap();
        assert_eq!(base.rows, other.rows);
        assert_eq!(json(&base), json(&other));
    }
    assert_ne!(base.rows, mc_moment_frame(&frame, &MCConfig::new(0.5, 4, 300, 6)).unwrap().rows);
    let s = mc_moment_s(&conf, &cfg).unwrap();
    assert_eq!(json(&s), json(&mc_moment_s(&conf, &cfg.clone().with_threads(2)).unwrap()));
    assert_eq!(serde_json::from_str::<MCReport>(&json(&s)).unwrap(), s);
}

#[test]
fn degenerate_selection_probabilities() {
    let (frame, conf) = qr(19);
    let none = mc_moment_frame(&frame, &MCConfig::new(0.0, 4, 50, 1)).unwrap();
    assert!(none.passed());
    assert!(none.rows.iter().all(|r| r.empirical == 0.0 && r.predicted == 0.0 && r.z.is_none()));
    let all = mc_moment_frame(&frame, &MCConfig::new(1.0, 5, 5, 1)).unwrap();
    for row in &all.rows {
        assert_eq!(row.stderr, 0.0);
        assert!((row.empirical - (frame.x() + 1.0).powi(row.k as i32 - 1)).abs() < 1e-10);
    }
    let s_all = mc_moment_s(&conf, &MCConfig::new(1.0, 2, 4, 1)).unwrap();
    let n = conf.n() as f64;
    let x = conf.x();
    assert!((s_all.rows[1].empirical - (n - 1.0) * (x + 1.0).powi(2) / (4.0 * x * n)).abs() < 1e-12);
    assert!((s_all.rows[1].predicted - (conf.s().powi(2) + 1.0)).abs() < 1e-12);
    let s_none = mc_moment_s(&conf, &MCConfig::new(0.0, 3, 10, 1)).unwrap();
    assert!(s_none.rows.iter().all(|r| r.empirical == 0.0));
}

#[test]
fn table_has_one_line_per_order() {
    let (frame, _) = qr(11);
    let report = mc_moment_frame(&frame, &MCConfig::new(0.5, 3, 20, 1)).unwrap();
    let table = report.to_table();
    assert_eq!(table.lines().count(), 3 + 3);
    assert!(table.lines().nth(1).unwrap().starts_with("tolerance:"));
}
