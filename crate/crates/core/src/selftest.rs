//! Reproduction checks behind `sepdetect selftest` and the `acceptance`
//! test target. Each check recomputes a known detection threshold or a
//! structural identity and compares it against a fixed tolerance.

use std::fmt;
use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bloch::{decompose, reconstruct, GeneratorSet};
use crate::criteria::{self, Criterion, Decision};
use crate::density::DensityMatrix;
use crate::error::Result;
use crate::numerics::max_abs_diff;
use crate::scan::{self, Direction};
use crate::states::{self, StateFamily};

/// Bisection tolerance used when a threshold is compared at 1e-5 or finer.
const FINE_TOL: f64 = 1e-10;

const ROUND_TRIP_DIMS: [(usize, usize); 4] = [(2, 2), (2, 3), (2, 4), (3, 3)];

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2}. {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

/// Collects sub-results of one check.
struct Report {
    ok: bool,
    notes: Vec<String>,
}

impl Report {
    fn new() -> Self {
        Self {
            ok: true,
            notes: Vec::new(),
        }
    }

    fn expect(&mut self, cond: bool, note: impl Into<String>) {
        let note = note.into();
        if cond {
            self.notes.push(note);
        } else {
            self.ok = false;
            self.notes.push(format!("FAILED {note}"));
        }
    }

    fn close(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        let ok = (got - want).abs() <= tol;
        self.expect(ok, format!("{label}={got:.7} (want {want} ± {tol:e})"));
    }

    fn finish(self, id: u32, name: &'static str) -> CheckOutcome {
        CheckOutcome {
            id,
            name,
            passed: self.ok,
            detail: self.notes.join("; "),
        }
    }
}

fn run(id: u32, name: &'static str, body: impl FnOnce(&mut Report) -> Result<()>) -> CheckOutcome {
    let mut report = Report::new();
    if let Err(e) = body(&mut report) {
        report.expect(false, format!("error: {e}"));
    }
    report.finish(id, name)
}

fn inv_2sqrt3() -> f64 {
    1.0 / (2.0 * 3f64.sqrt())
}

fn bound2x4_theorem1_criterion() -> Criterion {
    Criterion::Theorem1 {
        alpha: vec![inv_2sqrt3(), inv_2sqrt3()],
        beta: vec![1.0, 0.0],
    }
}

fn bound2x4_theorem3_criterion() -> Criterion {
    Criterion::Theorem3 {
        a: 1.0 / 6f64.sqrt(),
        b: 1.0,
        alpha: vec![1.0, 3.0],
        beta: vec![1.0, -2.0],
    }
}

fn horodecki_theorem3_criterion() -> Criterion {
    Criterion::Theorem3 {
        a: 1.0 / 12.0,
        b: 1.0 / 6.0,
        alpha: vec![0.125, 0.125],
        beta: vec![0.125],
    }
}

fn random_unit(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(len, |_, _| rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 {
            return v / n;
        }
    }
}

fn random_state(rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    let (m, n) = ROUND_TRIP_DIMS[rng.random_range(0..ROUND_TRIP_DIMS.len())];
    let rank = rng.random_range(1..=m * n);
    states::random_density(m, n, rank, rng.random())
}

/// Detection threshold of the `T_αβ` criterion on the 2x4 mixture `ρ_x`.
pub fn check_bound2x4_theorem1_threshold() -> CheckOutcome {
    run(1, "theorem1 threshold on 2x4 bound entangled mixture", |r| {
        let fam = StateFamily::bound_2x4(0.9);
        let start = Instant::now();
        let th = scan::threshold(&fam, &bound2x4_theorem1_criterion(), 0.0, 1.0, scan::DEFAULT_TOL)?;
        let elapsed = start.elapsed().as_secs_f64();
        r.close("x*", th.value, 0.223406, 1e-4);
        r.expect(th.direction == Direction::DetectsAbove, "detects above threshold");
        r.expect(elapsed < 1.0, format!("runtime {elapsed:.3}s < 1s"));
        Ok(())
    })
}

/// Same threshold with other `α`, `β` of the same norms.
pub fn check_norm_invariance() -> CheckOutcome {
    run(2, "theorem1 threshold depends only on |alpha|, |beta|", |r| {
        let fam = StateFamily::bound_2x4(0.9);
        let reference = scan::threshold(&fam, &bound2x4_theorem1_criterion(), 0.0, 1.0, FINE_TOL)?.value;
        let s6 = 1.0 / 6f64.sqrt();
        let alphas = [
            vec![s6],
            vec![0.0, s6],
            vec![0.6 * s6, -0.8 * s6],
            vec![s6 / 3f64.sqrt(), s6 / 3f64.sqrt(), -s6 / 3f64.sqrt()],
            vec![0.1, 0.2, (1.0 / 6.0 - 0.05f64).sqrt(), 0.0],
        ];
        let betas = [
            vec![1.0],
            vec![0.0, 1.0],
            vec![0.6, -0.8],
            vec![0.5, 0.5, 0.5, -0.5],
        ];
        let mut worst = 0.0f64;
        for alpha in &alphas {
            for beta in &betas {
                let c = Criterion::Theorem1 {
                    alpha: alpha.clone(),
                    beta: beta.clone(),
                };
                let th = scan::threshold(&fam, &c, 0.0, 1.0, FINE_TOL)?;
                worst = worst.max((th.value - reference).abs());
            }
        }
        r.expect(
            worst <= 1e-6,
            format!("{} parameter pairs, max deviation {worst:.2e} <= 1e-6", alphas.len() * betas.len()),
        );
        Ok(())
    })
}

/// Closed form on `p|ψ+⟩⟨ψ+| + (1-p)|00⟩⟨00|`, theorem2 against de Vicente.
pub fn check_ex2_closed_form() -> CheckOutcome {
    run(3, "ex2 closed form, theorem2 vs de Vicente", |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let a: f64 = rng.random_range(0.05..3.0);
            let p: f64 = rng.random_range(0.0..=1.0);
            let bloch = decompose(&states::two_qubit_ex2(p)?)?;
            let got = criteria::t_ab_norm(&bloch, a, a)?;
            let want = 2.0 * p + (4.0 * a * a * p * p + (2.0 * p - 1.0 - a * a).powi(2)).sqrt();
            worst = worst.max((got - want).abs());
        }
        r.expect(worst <= 1e-10, format!("100 (a,p) pairs, max |diff| {worst:.2e} <= 1e-10"));

        for p in [0.01, 0.1, 0.5, 1.0] {
            let v = criteria::theorem2(&states::two_qubit_ex2(p)?, 1.0)?;
            r.expect(v.is_entangled(), format!("theorem2 detects p={p} (violation {:.2e})", v.violation));
        }
        let v = criteria::de_vicente(&states::two_qubit_ex2(0.4)?)?;
        r.expect(!v.is_entangled(), "de Vicente silent at p=0.4");
        let v = criteria::de_vicente(&states::two_qubit_ex2(0.6)?)?;
        r.expect(v.is_entangled(), "de Vicente detects p=0.6");
        Ok(())
    })
}

/// `W_ab,αβ` threshold on the 2x4 mixture.
pub fn check_bound2x4_theorem3_threshold() -> CheckOutcome {
    run(4, "theorem3 threshold on 2x4 bound entangled mixture", |r| {
        let fam = StateFamily::bound_2x4(0.9);
        let th = scan::threshold(&fam, &bound2x4_theorem3_criterion(), 0.0, 1.0, scan::DEFAULT_TOL)?;
        r.close("x*", th.value, 0.22325, 1e-4);
        Ok(())
    })
}

/// The sweep of `ρ(0.9, q)` over `q ∈ [0.9, 1]` as CSV text.
pub fn horodecki_sweep_csv() -> Result<String> {
    let res = scan::sweep(&StateFamily::horodecki(0.9), &horodecki_theorem3_criterion(), 0.9, 1.0, 101)?;
    let mut buf = Vec::new();
    res.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

fn csv_violation_at(csv_text: &str, param: f64) -> Option<f64> {
    let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
    rdr.records().filter_map(|r| r.ok()).find_map(|rec| {
        let p: f64 = rec.get(0)?.parse().ok()?;
        if (p - param).abs() < 1e-9 {
            rec.get(3)?.parse().ok()
        } else {
            None
        }
    })
}

/// Horodecki 3x3 state with white noise.
pub fn check_horodecki_threshold() -> CheckOutcome {
    run(5, "theorem3 threshold and sweep on noisy Horodecki 3x3", |r| {
        let fam = StateFamily::horodecki(0.9);
        match scan::threshold(&fam, &horodecki_theorem3_criterion(), 0.9, 1.0, scan::DEFAULT_TOL) {
            Ok(th) => r.close("q*", th.value, 0.9867, 5e-4),
            Err(e) => {
                let v1 = horodecki_theorem3_criterion().evaluate(&fam.eval(1.0)?)?;
                r.expect(false, format!("q* not found: {e}; violation at q=1 is {:.4e}", v1.violation));
            }
        }
        let csv_text = horodecki_sweep_csv()?;
        let lo = csv_violation_at(&csv_text, 0.98);
        let hi = csv_violation_at(&csv_text, 0.99);
        match (lo, hi) {
            (Some(lo), Some(hi)) => {
                r.expect(lo < 0.0, format!("Δ(0.98)={lo:.4e} < 0"));
                r.expect(hi > 0.0, format!("Δ(0.99)={hi:.4e} > 0"));
            }
            _ => r.expect(false, "sweep CSV lacks rows at q=0.98 / 0.99"),
        }
        Ok(())
    })
}

/// Isotropic 2⊗3 thresholds for several criteria.
pub fn check_isotropic_thresholds() -> CheckOutcome {
    run(6, "thresholds on 2x3 isotropic states", |r| {
        let fam = StateFamily::isotropic(2, 3);
        let (s2, s6) = (2f64.sqrt(), 6f64.sqrt());
        let th = |c: &Criterion| scan::threshold(&fam, c, 0.0, 1.0, FINE_TOL).map(|t| t.value);

        r.close("corollary2(√2,√6)", th(&Criterion::Corollary2 { a: s2, b: s6 })?, 0.378054, 1e-5);
        r.close("de Vicente", th(&Criterion::DeVicente)?, 0.3849, 1e-4);
        r.close("realignment", th(&Criterion::Realignment)?, 0.3846, 1e-4);

        let mut prev = f64::INFINITY;
        let mut monotone = true;
        for (t, want) in [(0.1, 0.379712), (0.5, 0.378139), (2.0, 0.378032), (10.0, 0.378025)] {
            let got = th(&Criterion::Corollary2 { a: s2 * t, b: s6 * t })?;
            r.close(&format!("t={t}"), got, want, 1e-5);
            monotone &= got <= prev;
            prev = got;
        }
        r.expect(monotone, "scaled thresholds non-increasing in t");
        r.close("ppt", th(&Criterion::Ppt)?, 0.25, 1e-6);
        Ok(())
    })
}

/// Norm invariances and the reduction identities between criteria.
pub fn check_structural_identities() -> CheckOutcome {
    run(7, "Structural identities (norm invariance, reductions, W = kl T)", |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(7);

        let (mut c1, mut c3) = (0.0f64, 0.0f64);
        for _ in 0..100 {
            let rho = random_state(&mut rng)?;
            let (na, nb) = (rng.random_range(1..5), rng.random_range(1..5));
            let (la, lb) = (rng.random_range(0.1..3.0), rng.random_range(0.1..3.0));
            let a1 = random_unit(&mut rng, na) * la;
            let (na2, nb2) = (rng.random_range(1..5), rng.random_range(1..5));
            let a2 = random_unit(&mut rng, na2) * la;
            let b1 = random_unit(&mut rng, nb) * lb;
            let b2 = random_unit(&mut rng, nb2) * lb;
            let v1 = criteria::theorem1(&rho, a1.as_slice(), b1.as_slice())?;
            let v2 = criteria::theorem1(&rho, a2.as_slice(), b2.as_slice())?;
            c1 = c1.max((v1.lhs - v2.lhs).abs());

            let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let w1 = criteria::theorem3(&rho, a, b, a1.as_slice(), b1.as_slice())?;
            let w2 = criteria::theorem3(&rho, a, b, a2.as_slice(), b2.as_slice())?;
            c3 = c3.max((w1.lhs - w2.lhs).abs());
        }
        r.expect(c1 <= 1e-10, format!("theorem1 same-norm spread {c1:.2e} <= 1e-10 (100 states)"));
        r.expect(c3 <= 1e-10, format!("theorem3 same-norm spread {c3:.2e} <= 1e-10 (100 states)"));

        let (mut shen_gap, mut w_gap) = (0.0f64, 0.0f64);
        for _ in 0..20 {
            let rho = random_state(&mut rng)?;
            let m = rng.random_range(1..5);
            let (a, b) = (rng.random_range(0.0..3.0), rng.random_range(0.0..3.0));
            let sh = criteria::shen(&rho, m, a, b)?;
            let t1 = criteria::theorem1(&rho, &vec![a; m], &vec![b; m])?;
            shen_gap = shen_gap.max((sh.lhs - t1.lhs).abs()).max((sh.bound - t1.bound).abs());

            let (k, l) = (rng.random_range(0.1..3.0), rng.random_range(0.1..3.0));
            let w = criteria::theorem3(&rho, a, b, &[k], &[l])?;
            let t = criteria::t_ab_norm(&decompose(&rho)?, a / l, b / k)?;
            w_gap = w_gap.max((w.lhs - k * l * t).abs());
        }
        r.expect(shen_gap <= 1e-10, format!("shen vs theorem1 gap {shen_gap:.2e} <= 1e-10 (20 draws)"));
        r.expect(w_gap <= 1e-10, format!("W_ab,kl vs kl T gap {w_gap:.2e} <= 1e-10 (20 draws)"));
        Ok(())
    })
}

/// Criteria exercised by the soundness check.
pub fn soundness_criteria() -> Vec<Criterion> {
    let (s2, s6) = (2f64.sqrt(), 6f64.sqrt());
    vec![
        Criterion::DeVicente,
        Criterion::EnhancedTPrime,
        Criterion::Shen { m: 1, a: 1.0, b: 1.0 },
        Criterion::Shen { m: 3, a: 0.5, b: 2.0 },
        bound2x4_theorem1_criterion(),
        Criterion::Theorem1 {
            alpha: vec![2.0, -1.0, 0.5],
            beta: vec![0.3],
        },
        Criterion::Corollary2 { a: s2, b: s6 },
        Criterion::Corollary2 { a: 10.0, b: 10.0 },
        Criterion::Corollary2 { a: 0.0, b: 0.7 },
        Criterion::Theorem2 { a: 1.0 },
        Criterion::Theorem2 { a: -2.5 },
        bound2x4_theorem3_criterion(),
        horodecki_theorem3_criterion(),
        Criterion::Ppt,
        Criterion::Realignment,
    ]
}

/// No criterion may flag an explicitly separable state.
pub fn check_soundness() -> CheckOutcome {
    run(8, "Soundness on 500 random separable states", |r| {
        let crits = soundness_criteria();
        let mut flagged = 0usize;
        let mut worst = f64::NEG_INFINITY;
        let mut evaluations = 0usize;
        for i in 0..500u64 {
            let (m, n) = ROUND_TRIP_DIMS[(i % 4) as usize];
            let terms = 1 + (i as usize % 8);
            let rho = states::random_separable(m, n, terms, 10_000 + i)?;
            for c in &crits {
                let v = c.evaluate(&rho)?;
                evaluations += 1;
                worst = worst.max(v.violation);
                if v.decision == Decision::Entangled {
                    flagged += 1;
                }
            }
        }
        r.expect(
            flagged == 0,
            format!("{flagged} entangled verdicts in {evaluations} evaluations (max violation {worst:.2e})"),
        );
        Ok(())
    })
}

/// Bloch round trip and generator orthonormality.
pub fn check_bloch_round_trip() -> CheckOutcome {
    run(9, "Bloch round trip and generator orthogonality", |r| {
        let mut worst = 0.0f64;
        for (idx, &(m, n)) in ROUND_TRIP_DIMS.iter().enumerate() {
            for k in 0..50u64 {
                let rank = 1 + (k as usize % (m * n));
                let rho = states::random_density(m, n, rank, 1000 * idx as u64 + k)?;
                let back = reconstruct(&decompose(&rho)?)?;
                worst = worst.max(max_abs_diff(back.matrix(), rho.matrix()));
            }
        }
        r.expect(worst < 1e-12, format!("200 states, max entry error {worst:.2e} < 1e-12"));

        let mut ortho = 0.0f64;
        for d in 2..=6 {
            let g = GeneratorSet::new(d)?;
            for (i, a) in g.iter().enumerate() {
                for (j, b) in g.iter().enumerate() {
                    let want = if i == j { 2.0 } else { 0.0 };
                    let tr = (a * b).trace();
                    ortho = ortho.max((tr.re - want).abs()).max(tr.im.abs());
                }
            }
        }
        r.expect(ortho < 1e-12, format!("Tr(λiλj)-2δij max {ortho:.2e} < 1e-12 for d<=6"));
        Ok(())
    })
}

/// Closed form of the theorem3 inequality on the two-qubit X state, divided by 4: `(lhs, rhs)`.
///
/// Both sides equal the corresponding `theorem3` quantities divided by 4
/// (for `α = β = (1,1)`, `a = √2 x`, `b = √2 y`).
pub fn x_state_closed_form(a1: f64, a2: f64, a3: f64, x: f64, y: f64) -> (f64, f64) {
    let s = (1.0 + a1 - a2).powi(2) + a2 * a2 * x * x + a1 * a1 * y * y + x * x * y * y;
    let disc = (s * s - 4.0 * (1.0 + a1).powi(2) * (1.0 - a2).powi(2) * x * x * y * y).max(0.0);
    let lp = (s + disc.sqrt()) / 8.0;
    let lm = ((s - disc.sqrt()) / 8.0).max(0.0);
    let lhs = a3.abs() + lp.sqrt() + lm.sqrt();
    let rhs = ((1.0 + x * x) / 2.0).sqrt() * ((1.0 + y * y) / 2.0).sqrt();
    (lhs, rhs)
}

/// Random parameters for which the X state is positive semidefinite.
pub fn x_state_admissible(rng: &mut impl Rng) -> (f64, f64, f64) {
    let a1: f64 = rng.random_range(-0.95..0.95);
    let a2: f64 = rng.random_range(a1..0.95);
    let a3 = rng.random_range(-1.0..1.0f64) * ((1.0 + a1) * (1.0 - a2)).sqrt();
    (a1, a2, a3)
}

pub fn check_x_state_closed_form() -> CheckOutcome {
    run(10, "X state closed form vs theorem3", |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut worst = 0.0f64;
        let mut worst_rhs = 0.0f64;
        for _ in 0..50 {
            let (a1, a2, a3) = x_state_admissible(&mut rng);
            let rho = states::two_qubit_ex4(a1, a2, a3)?;
            for (x, y) in [(1.0, 1.0), (2.0, 3.0), (10.0, 10.0)] {
                let s2 = 2f64.sqrt();
                let v = criteria::theorem3(&rho, s2 * x, s2 * y, &[1.0, 1.0], &[1.0, 1.0])?;
                let (lhs, rhs) = x_state_closed_form(a1, a2, a3, x, y);
                worst = worst.max((v.lhs / 4.0 - lhs).abs());
                worst_rhs = worst_rhs.max((v.bound / 4.0 - rhs).abs());
            }
        }
        r.expect(worst <= 1e-8, format!("150 cases, max |lhs/4 - closed form| {worst:.2e} <= 1e-8"));
        r.expect(worst_rhs <= 1e-8, format!("max |bound/4 - rhs| {worst_rhs:.2e} <= 1e-8"));
        Ok(())
    })
}

/// Every check, in order.
pub fn run_all() -> Vec<CheckOutcome> {
    vec![
        check_bound2x4_theorem1_threshold(),
        check_norm_invariance(),
        check_ex2_closed_form(),
        check_bound2x4_theorem3_threshold(),
        check_horodecki_threshold(),
        check_isotropic_thresholds(),
        check_structural_identities(),
        check_soundness(),
        check_bloch_round_trip(),
        check_x_state_closed_form(),
    ]
}
