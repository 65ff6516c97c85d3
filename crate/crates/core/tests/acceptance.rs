//! Acceptance criteria, run in order inside one test so that timings are not
//! disturbed by other tests sharing the process. Each criterion prints one
//! `PASS`/`FAIL` line; run with `--nocapture` to see them.

use std::time::{Duration, Instant};

use etf_moments::frames::{build_conference, harmonic_etf, qr_difference_set, validate_conference, validate_etf};
use etf_moments::moments::{a_poly, kesten_mckay_check, moment_frame, moment_s, MomentPolyS};
use etf_moments::ncpart::{catalan, enumerate_ncp, enumerate_ncp_with_blocks, narayana, NonCrossingPartition};
use etf_moments::poly::{QPoly, SPoly};
use etf_moments::verify::{mc_moment_frame, mc_moment_s, v_n_exact, MCConfig, MCReport};
use etf_moments::{v_limit, DifferenceSet, Frame};
use num::BigUint;

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
}

fn run(id: usize, name: &'static str, limit: Duration, body: impl FnOnce() -> Result<String, String>) -> Outcome {
    let start = Instant::now();
    let result = body();
    let elapsed = start.elapsed();
    let (ok, detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    let pass = ok && elapsed <= limit;
    let detail = if ok && !pass { format!("{detail}; over time limit") } else { detail };
    println!(
        "criterion {id:>2} [{}] {name} ({elapsed:.3?} / limit {limit:?}): {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    Outcome { id, name, pass }
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn crit1() -> Result<String, String> {
    let table = ["s", "1", "-2s", "4s^2-1", "-8s^3+6s", "16s^4-24s^2+2"];
    for (i, want) in table.iter().enumerate() {
        let got = a_poly(i + 1).to_string();
        ensure(got == *want, format!("A_{} = {got}, expected {want}", i + 1))?;
    }
    Ok("A_1..A_6 match".into())
}

fn crit2() -> Result<String, String> {
    let s = |c: &[i64]| SPoly::from_i64(c);
    let table: Vec<Vec<(usize, SPoly)>> = vec![
        vec![(0, s(&[1]))],
        vec![(1, s(&[0, 1]))],
        vec![(1, s(&[0, 0, 1])), (2, s(&[1]))],
        vec![(1, s(&[0, 0, 0, 1])), (2, s(&[0, 3])), (3, s(&[0, -2]))],
        vec![(1, s(&[0, 0, 0, 0, 1])), (2, s(&[0, 0, 6])), (3, s(&[2, 0, -8])), (4, s(&[-1, 0, 4]))],
    ];
    for (k, terms) in table.into_iter().enumerate() {
        let want = MomentPolyS::new(k, terms.into_iter().collect());
        let got = moment_s(k).map_err(|e| e.to_string())?;
        ensure(got == want, format!("m^S_{k} = {got}, expected {want}"))?;
    }
    Ok(format!("m^S_4 = {}", moment_s(4).unwrap()))
}

fn crit3() -> Result<String, String> {
    ensure(moment_frame(1).unwrap().to_text() == "p", "m_1 != p")?;
    let m2 = moment_frame(2).unwrap();
    ensure(m2.coeff(1) == QPoly::one() && m2.coeff(2) == QPoly::var() && m2.terms().len() == 2, "m_2 != p + p^2 x")?;
    let x_plus_one = QPoly::from_i64(&[1, 1]);
    for k in 1..=10 {
        // moment_frame errors if any odd power of sqrt(x) survives
        let mk = moment_frame(k).map_err(|e| format!("m_{k}: {e}"))?;
        ensure(mk.at_p_one() == x_plus_one.pow(k as u32 - 1), format!("m_{k}(p=1) != (x+1)^{}", k - 1))?;
    }
    Ok("m_1, m_2 exact; m_k(p=1) = (x+1)^(k-1) for k <= 10".into())
}

fn crit4() -> Result<String, String> {
    let report = kesten_mckay_check(12).map_err(|e| e.to_string())?;
    match report.rows.iter().find(|r| !r.pass) {
        None => Ok("A_l(0) matches signed Catalan values for l <= 12".into()),
        Some(r) => Err(format!("A_{}(0) = {}, expected {}", r.l, r.at_zero, r.expected)),
    }
}

fn is_crossing(labels: &[usize]) -> bool {
    let k = labels.len();
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                for d in c + 1..k {
                    if labels[a] == labels[c] && labels[b] == labels[d] && labels[a] != labels[b] {
                        return true;
                    }
                }
            }
        }
    }
    false
}

fn all_set_partitions(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
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
    rec(k, 0, &mut cur, &mut out);
    out
}

fn crit5() -> Result<String, String> {
    for k in 1..=10 {
        let all = enumerate_ncp(k).unwrap().count();
        ensure(BigUint::from(all) == catalan(k), format!("k={k}: {all} != C_{k}"))?;
        for t in 1..=k {
            let c = enumerate_ncp_with_blocks(k, t).unwrap().count();
            ensure(BigUint::from(c) == narayana(k, t), format!("k={k}, t={t}: {c} != N"))?;
        }
    }
    for k in 1..=8 {
        let oracle: Vec<Vec<usize>> = all_set_partitions(k).into_iter().filter(|l| !is_crossing(l)).collect();
        let got: Vec<Vec<usize>> = enumerate_ncp(k).unwrap().map(|p| p.labels().to_vec()).collect();
        ensure(got == oracle, format!("k={k}: enumerator disagrees with brute force"))?;
    }
    Ok("Catalan/Narayana counts for k <= 10; brute-force agreement for k <= 8".into())
}

fn crit6() -> Result<String, String> {
    let sets = [
        DifferenceSet::new(7, vec![1, 2, 4]).unwrap(),
        DifferenceSet::new(11, vec![1, 3, 4, 5, 9]).unwrap(),
        DifferenceSet::new(13, vec![0, 1, 3, 9]).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for set in &sets {
        let frame = harmonic_etf(set).map_err(|e| e.to_string())?;
        let etf = validate_etf(&frame);
        ensure(etf.passed(), etf.to_string())?;
        let conf = build_conference(&frame).map_err(|e| e.to_string())?;
        let report = validate_conference(&conf);
        ensure(report.passed(), report.to_string())?;
        let x = frame.x();
        let target = (frame.n() as f64 - 1.0) * (x + 1.0).powi(2) / (4.0 * x);
        let square = conf.entries() * conf.entries();
        for i in 0..frame.n() {
            ensure((square[(i, i)].re - target).abs() <= 1e-8, "diag(S^2) mismatch")?;
        }
        worst = etf.checks.iter().chain(&report.checks).map(|c| c.deviation).fold(worst, f64::max);
    }
    Ok(format!("3 frames valid, worst deviation {worst:.2e}"))
}

fn crit7() -> Result<String, String> {
    let panel: Vec<NonCrossingPartition> = [vec![1, 2], vec![1, 1], vec![1, 2, 1, 3], vec![1, 2, 3, 1]]
        .into_iter()
        .map(|l| NonCrossingPartition::from_labels(l).unwrap())
        .collect();
    let frames: Vec<Frame> =
        [11u64, 43, 103].iter().map(|&q| harmonic_etf(&qr_difference_set(q).unwrap()).unwrap()).collect();
    let mut deviations = vec![Vec::new(); panel.len()];
    for frame in &frames {
        let conf = build_conference(frame).map_err(|e| e.to_string())?;
        let n = frame.n() as f64;
        for (i, pi) in panel.iter().enumerate() {
            let v = v_n_exact(pi, &conf).map_err(|e| e.to_string())?;
            let limit = v_limit(pi).eval_f64(conf.s());
            deviations[i].push((v.re - limit).abs());
            if i == 0 {
                ensure((v.re - (n - 1.0) / n).abs() <= 1e-12, format!("V_n([1,2]) = {} at n = {n}", v.re))?;
            }
        }
    }
    for (pi, devs) in panel.iter().zip(&deviations) {
        ensure(devs.windows(2).all(|w| w[1] < w[0]), format!("{pi}: deviations {devs:?} not decreasing"))?;
    }
    let summary: Vec<String> =
        panel.iter().zip(&deviations).map(|(pi, d)| format!("{pi} {:.1e}->{:.1e}", d[0], d[2])).collect();
    Ok(format!("n = 11, 43, 103: {}", summary.join(", ")))
}

fn qr103() -> Frame {
    harmonic_etf(&qr_difference_set(103).unwrap()).unwrap()
}

fn describe(report: &MCReport) -> String {
    let worst = report.rows.iter().map(|r| (r.empirical - r.predicted).abs() / r.tolerance).fold(0.0, f64::max);
    format!("p={} worst |emp-pred|/tol = {worst:.3}", report.config.p)
}

const SEED: u64 = 20_240_917;

fn criterion8_reports(threads: Option<usize>) -> Result<Vec<MCReport>, String> {
    let frame = qr103();
    [0.2, 0.5, 0.8]
        .iter()
        .map(|&p| {
            let mut cfg = MCConfig::new(p, 6, 5000, SEED);
            cfg.threads = threads;
            mc_moment_frame(&frame, &cfg).map_err(|e| e.to_string())
        })
        .collect()
}

fn crit8() -> Result<String, String> {
    let reports = criterion8_reports(None)?;
    for r in &reports {
        ensure(r.passed(), r.to_table())?;
    }
    Ok(reports.iter().map(describe).collect::<Vec<_>>().join("; "))
}

fn crit9() -> Result<String, String> {
    let conf = build_conference(&qr103()).map_err(|e| e.to_string())?;
    let expected_s = (1.0 - 52.0 / 51.0) / (2.0 * (52.0f64 / 51.0).sqrt());
    ensure((conf.s() - expected_s).abs() < 1e-12, "s mismatch")?;
    let report = mc_moment_s(&conf, &MCConfig::new(0.5, 4, 5000, SEED)).map_err(|e| e.to_string())?;
    ensure(report.passed(), report.to_table())?;
    Ok(describe(&report))
}

fn crit10() -> Result<String, String> {
    let frame = qr103();
    let report = mc_moment_frame(&frame, &MCConfig::new(1.0, 6, 3, SEED)).map_err(|e| e.to_string())?;
    let x = 52.0 / 51.0;
    let mut worst: f64 = 0.0;
    for row in &report.rows {
        let exact = (x + 1.0f64).powi(row.k as i32 - 1);
        worst = worst.max((row.empirical - exact).abs()).max((row.predicted - exact).abs());
    }
    ensure(worst <= 1e-10, format!("worst deviation {worst:.3e}"))?;
    Ok(format!("worst deviation {worst:.2e}"))
}

fn crit11() -> Result<String, String> {
    let single = criterion8_reports(Some(1))?;
    let many = criterion8_reports(Some(4))?;
    let a = serde_json::to_string(&single).map_err(|e| e.to_string())?;
    let b = serde_json::to_string(&many).map_err(|e| e.to_string())?;
    let bits_equal = single.iter().zip(&many).all(|(x, y)| {
        x.rows
            .iter()
            .zip(&y.rows)
            .all(|(r, s)| r.empirical.to_bits() == s.empirical.to_bits() && r.stderr.to_bits() == s.stderr.to_bits())
    });
    ensure(a == b && bits_equal, "reports differ between 1 and 4 threads")?;
    Ok("1-thread and 4-thread reports are bit-identical".into())
}

#[test]
fn acceptance() {
    let outcomes = vec![
        run(1, "A-table fixture", Duration::from_millis(1), crit1),
        run(2, "m^S fixture", Duration::from_millis(10), crit2),
        run(3, "m fixture and p=1 identity", Duration::from_secs(30), crit3),
        run(4, "Kesten-McKay reduction", Duration::from_millis(1), crit4),
        run(5, "combinatorics", Duration::from_secs(10), crit5),
        run(6, "ETF validation", Duration::from_secs(1), crit6),
        run(7, "finite-n trend of V_n", Duration::from_secs(30), crit7),
        run(8, "Monte Carlo, frame domain", Duration::from_secs(60), crit8),
        run(9, "Monte Carlo, conference domain", Duration::from_secs(60), crit9),
        run(10, "exact p=1 identity", Duration::from_secs(5), crit10),
        run(11, "determinism across thread counts", Duration::from_secs(120), crit11),
    ];
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.pass).map(|o| format!("{} ({})", o.id, o.name)).collect();
    println!("{} of {} criteria passed", outcomes.len() - failed.len(), outcomes.len());
    assert!(failed.is_empty(), "failed criteria: {}", failed.join(", "));
}
