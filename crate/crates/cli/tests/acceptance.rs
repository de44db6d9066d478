//! The fourteen acceptance criteria, one PASS/FAIL line each.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use expander_core::cayley::{build_cayley, covering_indices_with, refine_tower, Multigraph};
use expander_core::gamma_words::{eliminate, normalize, replay, rule_certificates, GammaWord, NormalForm};
use expander_core::generators::{band_report, iterated_comm_rows, verify_commscheme_with, verify_presentation};
use expander_core::quotient::QuotientGroup;
use expander_core::series::{check_conjecture, verify_gammabases, verify_low_cases, width_statistics};
use expander_core::spectra::{
    dense_report, dense_spectrum, lanczos_report, ramanujan_bound, LanczosOptions, Method, Verdict,
};
use expander_core::toeplitz::verify_closed_forms;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(t: Instant, limit: Duration) -> Result<Duration, String> {
    let e = t.elapsed();
    ensure(e < limit, format!("took {e:.2?}, limit {limit:?}"))?;
    Ok(e)
}

fn peak_rss_mib() -> Option<u64> {
    let s = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = s.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb / 1024)
}

struct Tower {
    groups: Vec<QuotientGroup>,
    graphs: Vec<Multigraph>,
    enumeration: Duration,
}

fn c1() -> Outcome {
    let t = Instant::now();
    for level in [6, 20, 40] {
        let r = verify_presentation(level).map_err(|e| e.to_string())?;
        ensure(r.all_ok(), format!("{r:?}"))?;
    }
    let e = within(t, Duration::from_secs(1))?;
    Ok(format!("r1, r2, r3 trivial at levels 6, 20, 40 ({e:.2?})"))
}

fn c2() -> Outcome {
    let t = Instant::now();
    let r = band_report();
    ensure(r.ok(), format!("{r:?}"))?;
    let e = within(t, Duration::from_secs(1))?;
    Ok(format!("band 5/5, a1 = alpha1 + gamma1, b1 = alpha1 ({e:.2?})"))
}

fn c3() -> Outcome {
    let t = Instant::now();
    let r = verify_closed_forms(10_000, 0xACCE);
    ensure(r.ok(), format!("{r:?}"))?;
    let e = within(t, Duration::from_secs(30))?;
    Ok(format!("{} samples, 0 mismatches against recursive and dense products ({e:.2?})", r.samples))
}

fn c4() -> Outcome {
    let t = Instant::now();
    let r = verify_commscheme_with(3, 8, 0xACCE);
    ensure(r.all_hold(), "a scheme row failed")?;
    ensure(r.checks.len() == 64, "expected 16 rows x 4 values of k")?;
    let e = within(t, Duration::from_secs(30))?;
    let suspects: Vec<String> = r
        .checks
        .iter()
        .filter(|c| c.printed_depth_suspect && c.k == 1)
        .map(|c| format!("{} printed depth {} computed depth {}", c.label, c.printed_depth, c.computed_depth))
        .collect();
    Ok(format!("16 rows x k=0..3 x 8 tails hold; suspect index: {} ({e:.2?})", suspects.join("; ")))
}

fn c5(tower: &Tower) -> Outcome {
    let orders: Vec<usize> = tower.groups.iter().map(|q| q.order()).collect();
    ensure(orders[1..=5] == [4, 32, 128, 1024, 8192], format!("orders {orders:?}"))?;
    let report = covering_indices_with(&tower.groups, &tower.graphs).map_err(|e| e.to_string())?;
    let idx = report.indices();
    ensure(idx == [4, 8, 4, 8, 8, 4, 8, 8], format!("indices {idx:?}"))?;
    ensure(report.levels.iter().all(|l| l.covers_previous), "a truncation is not a covering")?;
    ensure(tower.enumeration < Duration::from_secs(600), "enumeration over 10 min")?;
    let rss = peak_rss_mib();
    ensure(rss.is_none_or(|m| m < 8 * 1024), format!("peak RSS {rss:?} MiB"))?;
    Ok(format!(
        "orders {:?}, indices {idx:?}, enumeration to K_8 {:.2?}, peak RSS {} MiB",
        &orders[1..],
        tower.enumeration,
        rss.map_or("?".into(), |m| m.to_string())
    ))
}

fn c6() -> Outcome {
    let reports = verify_gammabases(7);
    ensure(reports.len() == 6, "expected i = 2..7")?;
    for r in &reports {
        ensure(r.ok(), format!("i = {}: {r:?}", r.i))?;
    }
    let idx: Vec<u64> = reports.iter().map(|r| r.index).collect();
    Ok(format!("indices for i = 2..7: {idx:?}, listed leads form bases"))
}

fn c7() -> Outcome {
    let r = verify_low_cases();
    ensure(r.ok(), format!("{r:?}"))?;
    Ok(format!("[G : G cap H_1] = {}, [lambda_1 : lambda_1 cap H_2] = {}", r.index0, r.index1))
}

fn c8() -> Outcome {
    let c = check_conjecture(7);
    ensure(c.level == 8, "level")?;
    for row in c.rows.iter().filter(|r| (1..=7).contains(&r.i)) {
        ensure(row.equal, format!("i = {}: {row:?}", row.i))?;
    }
    let w = width_statistics(7);
    let widths: Vec<usize> = w.widths.iter().filter(|(i, _)| (2..=6).contains(i)).map(|&(_, x)| x).collect();
    ensure(widths == [2, 3, 3, 2, 3], format!("widths {widths:?}"))?;
    Ok(format!("lambda_i(K_8) = ker(K_8 -> K_i) for i = 1..7; widths i = 2..6: {widths:?}"))
}

fn c9(tower: &Tower) -> Outcome {
    for (i, g) in tower.graphs[..=4].iter().enumerate() {
        let r = dense_report(g).map_err(|e| e.to_string())?;
        ensure(r.verdict == Verdict::Ramanujan, format!("G_{i}: {r:?}"))?;
        if g.n() > 1 {
            let l = lanczos_report(g, &LanczosOptions::new(2)).map_err(|e| e.to_string())?;
            let d1 = (r.lambda_nontrivial_max - l.lambda_nontrivial_max).abs();
            let d2 = (r.lambda2.unwrap() - l.lambda2.unwrap()).abs();
            ensure(d1 < 1e-9 && d2 < 1e-9, format!("G_{i}: dense/Lanczos differ by {d1:e}, {d2:e}"))?;
        }
    }
    let t = Instant::now();
    let r = lanczos_report(&tower.graphs[5], &LanczosOptions::new(2)).map_err(|e| e.to_string())?;
    let e = within(t, Duration::from_secs(60))?;
    ensure(r.method == Method::Lanczos && r.converged, "G_5 Lanczos did not converge")?;
    let margin = r.lambda_nontrivial_max - ramanujan_bound();
    ensure(r.verdict == Verdict::NotRamanujan && margin > 1e-6, format!("G_5: {r:?}"))?;
    Ok(format!(
        "G_0..G_4 Ramanujan, G_5 not: |lambda| = {:.10} > 2 sqrt 3 by {margin:.6} (Lanczos {e:.2?}, residual {:.1e})",
        r.lambda_nontrivial_max, r.residual
    ))
}

fn c10(tower: &Tower) -> Outcome {
    let s = dense_spectrum(&tower.graphs[1]).map_err(|e| e.to_string())?;
    let want = [4.0, 0.0, 0.0, -4.0];
    ensure(s.len() == 4 && s.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-10), format!("{s:?}"))?;
    let mut worst: f64 = 0.0;
    for g in &tower.graphs[1..=4] {
        ensure(g.bipartition().is_some(), "not bipartite")?;
        let s = dense_spectrum(g).map_err(|e| e.to_string())?;
        let n = s.len();
        worst = (0..n).map(|k| (s[k] + s[n - 1 - k]).abs()).fold(worst, f64::max);
    }
    ensure(worst < 1e-8, format!("asymmetry {worst:e}"))?;
    Ok(format!("G_1 = {{4, 0, 0, -4}}; G_1..G_4 symmetric spectra (max deviation {worst:.1e})"))
}

fn c11() -> Outcome {
    let t = Instant::now();
    let rows = iterated_comm_rows(30);
    for r in &rows {
        ensure(r.ok, format!("k = {}: {r:?}", r.k))?;
    }
    let e = within(t, Duration::from_secs(5))?;
    Ok(format!("[x1, _k x0] depth k, leads alpha2, alpha3, alpha1 cycling for k = 1..30 ({e:.2?})"))
}

fn c12(tower: &Tower) -> Outcome {
    let mut counts = Vec::new();
    for i in 1..=5 {
        let (up, low) = (&tower.groups[i], &tower.groups[i - 1]);
        let step = refine_tower(up, low).map_err(|e| e.to_string())?;
        let r = step.report(&up.truncation_hom(low).map_err(|e| e.to_string())?);
        let want = r.covering_index.trailing_zeros() as usize - 1;
        ensure(r.intermediate_orders.len() == want, format!("level {i}: {r:?}"))?;
        ensure(r.all_two_fold_covers && r.all_regular && r.composition_is_truncation, format!("level {i}: {r:?}"))?;
        counts.push(r.intermediate_orders.len());
    }
    Ok(format!("intermediate graphs per step for i = 1..5: {counts:?}, all 2-fold covers composing to truncation"))
}

fn c13() -> Outcome {
    let t = Instant::now();
    ensure(rule_certificates().iter().all(|c| c.replays), "a push rule does not replay")?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE);
    let mut tails = 0;
    for _ in 0..10_000 {
        let w = GammaWord::random(&mut rng, 16);
        let n = normalize(&w);
        ensure(n.form.tail == (eliminate(&w).count(2) % 2 == 1), format!("parity: {w}"))?;
        ensure(replay(&n.trace).is_ok_and(|r| r == n.form.to_word()), format!("replay: {w}"))?;
        tails += n.form.tail as usize;
    }
    let sq = normalize(&GammaWord::parse("x2 x2").unwrap()).form;
    let push = normalize(&GammaWord::parse("x2 x0").unwrap()).form;
    let p = |s: &str, tail| NormalForm { w: GammaWord::parse(s).unwrap(), tail };
    ensure(sq == p("x0^-1 x1 x0 x1", false), format!("x2^2 -> {sq}"))?;
    ensure(push == p("x0^-1 x1^2", true), format!("x2 x0 -> {push}"))?;
    let e = within(t, Duration::from_secs(30))?;
    Ok(format!("10^4 words ({tails} with tail x2), parity and trace replay hold; x2^2 = {sq}, x2 x0 = {push} ({e:.2?})"))
}

fn c14() -> Outcome {
    let run = |threads: &str| -> Result<Vec<u8>, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_expander"))
            .args(["verify-all", "--max-level", "5", "--threads", threads])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), format!("exit {:?}", out.status.code()))?;
        Ok(out.stdout)
    };
    let a = run("1")?;
    let b = run("4")?;
    ensure(a == b, "reports differ")?;
    Ok(format!("verify-all --max-level 5 with 1 and 4 threads: {} identical bytes", a.len()))
}

fn main() {
    let t = Instant::now();
    let groups: Vec<QuotientGroup> = (0..=8).map(|i| QuotientGroup::enumerate(i).expect("enumeration")).collect();
    let enumeration = t.elapsed();
    let graphs = groups.iter().map(build_cayley).collect();
    let tower = Tower { groups, graphs, enumeration };

    let criteria: Vec<Criterion> = vec![
        ("relation check", Box::new(c1)),
        ("band structure", Box::new(c2)),
        ("closed-form laws", Box::new(c3)),
        ("commutator scheme", Box::new(c4)),
        ("quotient orders and covering indices", Box::new(|| c5(&tower))),
        ("gammabases theorem", Box::new(c6)),
        ("low-index remark", Box::new(c7)),
        ("conjecture at desk scale", Box::new(c8)),
        ("Ramanujan tower", Box::new(|| c9(&tower))),
        ("spectrum sanity", Box::new(|| c10(&tower))),
        ("nontriviality of [x1, _k x0]", Box::new(c11)),
        ("tower refinement", Box::new(|| c12(&tower))),
        ("Gamma rewriter", Box::new(c13)),
        ("determinism", Box::new(c14)),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name}: {msg}", n + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg}", n + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
