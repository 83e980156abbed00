//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p sqzpsk-core --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use sqzpsk_core::analysis::{small_beta_slope, SlopeProbe};
use sqzpsk_core::fock::{build_state_at, HomodyneProjector};
use sqzpsk_core::gaussian::energy_of;
use sqzpsk_core::receiver::asymptotic_error;
use sqzpsk_core::{
    beta_closed_forms, beta_threshold_numeric, budget_to_seed, build_pair, build_state, dephase, error_probability,
    error_probability_pure, g_function, helstrom_mixed, helstrom_pure, loss_map, scan, AnalysisSettings,
    AsymptoticKind, ChannelBudget, CutoffPolicy, FigureId, LossyPreparation, Metric, PhaseNoise, PhaseQuadrature,
    Result, ScanRequest, ScanSettings, SeedState, Sign,
};

const ANCHOR_TOL: f64 = 1e-9;
const ANCHOR_BUDGET: Duration = Duration::from_millis(1);
const THRESHOLD_TOL: f64 = 1e-6;
const THRESHOLD_BUDGET: Duration = Duration::from_secs(1);
const ORACLE_TOL: f64 = 1e-6;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const ORDERING_SLACK: f64 = 1e-6;
const ORDERING_BUDGET: Duration = Duration::from_secs(120);
const G_ZERO_TOL: f64 = 1e-10;
const G_WIDE_TOL: f64 = 1e-4;
const SLOPE_REL_TOL: f64 = 1e-3;
const ASYMPTOTIC_RANGE: (f64, f64) = (0.9, 1.1);
const ADVANTAGE_TOL: f64 = 1e-6;
const SEMIGROUP_TOL: f64 = 1e-14;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const PDF_NORM_TOL: f64 = 1e-8;
const CUTOFF_STABILITY_TOL: f64 = 1e-8;
const ROUND_TRIP_TOL: f64 = 1e-12;

/// Collects the individual checks of one criterion.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    count: usize,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.count += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn close(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        let diff = (got - want).abs();
        self.check(diff <= tol, || {
            format!("{label}: got {got:.12e}, want {want:.12e} (|diff| {diff:.3e} > {tol:e})")
        });
    }

    fn within(&mut self, label: &str, elapsed: Duration, budget: Duration) {
        self.check(elapsed < budget, || {
            format!("{label}: took {elapsed:?}, budget {budget:?}")
        });
    }
}

fn budget(n: f64, b: f64) -> ChannelBudget {
    ChannelBudget::new(n, b).expect("valid budget")
}

fn c1_closed_form_anchors(c: &mut Checks) -> Result<()> {
    let start = Instant::now();
    let values = [
        ("helstrom_pure(0, 1)", helstrom_pure(&budget(1.0, 0.0)), 4.59503e-3),
        (
            "helstrom_pure(1/3, 1)",
            helstrom_pure(&budget(1.0, 1.0 / 3.0)),
            8.3873e-5,
        ),
        (
            "error_probability_pure(0, 1)",
            error_probability_pure(&budget(1.0, 0.0)),
            2.27501e-2,
        ),
        (
            "error_probability_pure(1/3, 1)",
            error_probability_pure(&budget(1.0, 1.0 / 3.0)),
            2.33887e-3,
        ),
    ];
    let elapsed = start.elapsed();
    for (label, got, want) in values {
        c.close(label, got, want, ANCHOR_TOL);
    }
    c.within("anchors", elapsed, ANCHOR_BUDGET);
    Ok(())
}

fn c2_threshold_identity(c: &mut Checks) -> Result<()> {
    let settings = AnalysisSettings::default();
    for n in [0.25, 0.5, 1.0, 2.0, 5.0] {
        let start = Instant::now();
        let r = beta_threshold_numeric(n, &PhaseNoise::none(), 1.0, Metric::Helstrom, &settings)?;
        c.within(&format!("N={n}"), start.elapsed(), THRESHOLD_BUDGET);
        c.close(
            &format!("beta_th(N={n})"),
            r.value,
            4.0 * n / (4.0 * n + 1.0),
            THRESHOLD_TOL,
        );
    }
    Ok(())
}

fn c3_oracle_equivalence(c: &mut Checks) -> Result<()> {
    let start = Instant::now();
    let quad = PhaseQuadrature::default();
    let cutoff = CutoffPolicy::with_target_tail(1e-12)?;
    let mut triples = Vec::new();
    for n in [0.5, 1.0, 2.0] {
        let forms = beta_closed_forms(n)?;
        for b in [0.0, forms.optimum, 0.8 * forms.threshold] {
            for s in [0.0, 0.2, 0.5] {
                triples.push((n, b, s));
            }
        }
    }
    let extra = beta_closed_forms(1.5)?.optimum;
    triples.extend([(1.5, extra, 0.1), (1.5, extra, 0.3), (1.5, extra, 0.4)]);

    for (n, b, s) in triples {
        let bud = budget(n, b);
        let noise = PhaseNoise::new(s)?;
        let (plus, minus) = build_pair(&budget_to_seed(&bud, 1.0)?, &cutoff)?;
        let (plus, minus) = (dephase(&plus, s), dephase(&minus, s));
        let label = format!("N={n} beta={b:.4} sigma={s}");
        if s == 0.0 {
            c.close(
                &format!("helstrom {label}"),
                helstrom_pure(&bud),
                helstrom_mixed(&plus, &minus)?,
                ORACLE_TOL,
            );
        }
        let fock_homodyne = HomodyneProjector::new(&minus).positive_probability();
        c.close(
            &format!("homodyne {label}"),
            error_probability(&bud, 1.0, &noise, &quad)?,
            fock_homodyne,
            ORACLE_TOL,
        );
    }
    c.within("oracle equivalence", start.elapsed(), ORACLE_BUDGET);
    Ok(())
}

fn c4_bound_ordering(c: &mut Checks) -> Result<()> {
    let start = Instant::now();
    let table = scan(&ScanRequest::Figure(FigureId::Fig3), &ScanSettings::default())?;
    let elapsed = start.elapsed();
    for row in 0..table.points() {
        let coords = table.coordinates(row);
        let v = table.row(row);
        for (hom, hel, kind) in [(v[0], v[1], "dss"), (v[2], v[3], "cs")] {
            c.check(hom >= hel - ORDERING_SLACK, || {
                format!(
                    "{kind} N={} sigma={}: homodyne {hom:.6e} < helstrom {hel:.6e}",
                    coords[0], coords[1]
                )
            });
        }
    }
    c.within("fig3 scan", elapsed, ORDERING_BUDGET);
    Ok(())
}

fn c5_fig3_claims(c: &mut Checks) -> Result<()> {
    let quad = PhaseQuadrature::default();
    let cutoff = CutoffPolicy::default();
    for n in [1.0, 2.0] {
        let dss = budget(n, beta_closed_forms(n)?.optimum);
        let cs = budget(n, 0.0);
        let (dp, dm) = build_pair(&budget_to_seed(&dss, 1.0)?, &cutoff)?;
        let (cp, cm) = build_pair(&budget_to_seed(&cs, 1.0)?, &cutoff)?;
        for s in [0.01, 0.05] {
            let hom = error_probability(&dss, 1.0, &PhaseNoise::new(s)?, &quad)?;
            let hel_cs = helstrom_mixed(&dephase(&cp, s), &dephase(&cm, s))?;
            c.check(hom < hel_cs, || {
                format!("N={n} sigma={s}: homodyne DSS {hom:.6e} >= coherent Helstrom {hel_cs:.6e}")
            });
        }
        let gap = |s: f64| -> Result<f64> {
            let hom = error_probability(&dss, 1.0, &PhaseNoise::new(s)?, &quad)?;
            Ok(hom - helstrom_mixed(&dephase(&dp, s), &dephase(&dm, s))?)
        };
        let (g_lo, g_hi) = (gap(0.1)?, gap(1.0)?);
        c.check(g_hi < g_lo, || {
            format!("N={n}: gap at sigma=1 {g_hi:.6e} >= gap at sigma=0.1 {g_lo:.6e}")
        });
    }
    Ok(())
}

fn c6_g_anchors(c: &mut Checks) -> Result<()> {
    let quad = PhaseQuadrature::default();
    c.close(
        "g(1, 0)",
        g_function(1.0, 0.0, &quad)?,
        (-2.0f64).exp() / PI.sqrt(),
        G_ZERO_TOL,
    );
    c.close("g(1, 50)", g_function(1.0, 50.0, &quad)?, 0.0, G_WIDE_TOL);
    // plain central difference at β = 1e-6, step 1e-7 in √β
    let probe = SlopeProbe {
        extrapolate: false,
        ..SlopeProbe::default()
    };
    for (n, s) in [(1.0, 0.1), (2.0, 0.2)] {
        let slope = small_beta_slope(n, 1.0, &PhaseNoise::new(s)?, &quad, &probe)?;
        let want = -g_function(n, s, &quad)? * f64::sqrt(n);
        let rel = ((slope - want) / want).abs();
        c.check(rel <= SLOPE_REL_TOL, || {
            format!(
                "slope N={n} sigma={s}: {slope:.6e} vs -g*sqrt(N) {want:.6e} (rel {rel:.3e}, ratio {:.4})",
                slope / want
            )
        });
    }
    Ok(())
}

fn c7_asymptotics(c: &mut Checks) -> Result<()> {
    let quad = PhaseQuadrature::default();
    let (lo, hi) = ASYMPTOTIC_RANGE;
    for n in [4.0, 6.0, 8.0] {
        let opt = beta_closed_forms(n)?.optimum;
        let exact = [
            (AsymptoticKind::HelstromCs, helstrom_pure(&budget(n, 0.0))),
            (AsymptoticKind::HelstromDss, helstrom_pure(&budget(n, opt))),
            (
                AsymptoticKind::HomodyneCs,
                error_probability(&budget(n, 0.0), 1.0, &PhaseNoise::none(), &quad)?,
            ),
            (
                AsymptoticKind::HomodyneDss,
                error_probability(&budget(n, opt), 1.0, &PhaseNoise::none(), &quad)?,
            ),
        ];
        for (kind, value) in exact {
            let ratio = value / asymptotic_error(kind, n)?;
            c.check((lo..=hi).contains(&ratio), || {
                format!("{kind} N={n}: ratio {ratio:.6e} outside [{lo}, {hi}]")
            });
        }
        let (cs, dss) = (exact[0].1, exact[1].1);
        c.close(
            &format!("advantage ratio N={n}"),
            (cs - dss) / cs,
            asymptotic_error(AsymptoticKind::AdvantageRatio, n)?,
            ADVANTAGE_TOL,
        );
    }
    Ok(())
}

fn c8_invariants(c: &mut Checks) -> Result<()> {
    let cutoff = CutoffPolicy::default();
    let seed = budget_to_seed(&budget(1.0, 1.0 / 3.0), 0.8)?;
    let rho = build_state(&seed, Sign::Plus, &cutoff)?;

    let (s1, s2) = (0.3, 0.4);
    let twice = dephase(&dephase(&rho, s1), s2);
    let once = dephase(&rho, f64::hypot(s1, s2));
    let worst = twice
        .entries()
        .iter()
        .zip(once.entries().iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    c.close("dephasing semigroup", worst, 0.0, SEMIGROUP_TOL);

    for s in [0.0, 0.5, 2.0] {
        let d = dephase(&rho, s);
        c.close(&format!("trace sigma={s}"), d.trace(), rho.trace(), TRACE_TOL);
        let min = d.min_eigenvalue();
        c.check(min >= -PSD_TOL, || format!("PSD sigma={s}: min eigenvalue {min:e}"));
        let proj = HomodyneProjector::new(&d);
        let total = proj.positive_probability() + proj.negative_probability();
        c.close(&format!("pdf normalization sigma={s}"), total, 1.0, PDF_NORM_TOL);
    }

    let (p, m) = build_pair(&seed, &cutoff)?;
    let base = helstrom_mixed(&p, &m)?;
    let n = 2 * p.n_max();
    let p2 = build_state_at(&seed, Sign::Plus, n, cutoff.guard_band)?;
    let m2 = build_state_at(&seed, Sign::Minus, n, cutoff.guard_band)?;
    c.close("cutoff doubling", helstrom_mixed(&p2, &m2)?, base, CUTOFF_STABILITY_TOL);

    let out = loss_map(&LossyPreparation::new(0.7, 1.0)?)?;
    c.close("loss_map eta=1 purity", out.purity, 1.0, ROUND_TRIP_TOL);
    c.close("loss_map eta=1 squeezing", out.squeezing, 0.7, ROUND_TRIP_TOL);

    for (n, b, mu) in [(1.0, 0.3, 1.0), (2.0, 0.4, 0.9), (5.0, 0.1, 0.95)] {
        let seed: SeedState = budget_to_seed(&budget(n, b), mu)?;
        c.close(
            &format!("energy round trip N={n}"),
            energy_of(&seed),
            n,
            ROUND_TRIP_TOL * n,
        );
    }
    Ok(())
}

type Criterion = fn(&mut Checks) -> Result<()>;

fn main() -> ExitCode {
    let criteria: [(u32, &str, Criterion); 8] = [
        (1, "closed-form anchors", c1_closed_form_anchors),
        (2, "threshold identity", c2_threshold_identity),
        (3, "oracle equivalence", c3_oracle_equivalence),
        (4, "measurement-bound ordering", c4_bound_ordering),
        (5, "phase-noise claims", c5_fig3_claims),
        (6, "g-function anchors", c6_g_anchors),
        (7, "asymptotics", c7_asymptotics),
        (8, "invariant suites", c8_invariants),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let mut checks = Checks::default();
        let start = Instant::now();
        if let Err(e) = run(&mut checks) {
            checks.failures.push(format!("error: {e}"));
        }
        let elapsed = start.elapsed();
        if checks.failures.is_empty() {
            println!("PASS criterion {id}: {name} ({} checks, {elapsed:.2?})", checks.count);
        } else {
            failed += 1;
            println!(
                "FAIL criterion {id}: {name} ({} of {} checks failed, {elapsed:.2?})",
                checks.failures.len(),
                checks.count
            );
            for f in &checks.failures {
                println!("    {f}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
