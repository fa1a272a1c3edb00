//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Thresholds come from `[package.metadata.acceptance]`.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use eigenroot::curve::{discriminant_locus, CurveSpec};
use eigenroot::eigen::{eigenpolynomial, verify_eigen};
use eigenroot::exec::{self, Execution};
use eigenroot::io::PlotBox;
use eigenroot::lemmas::{run_fleet, FleetConfig, LemmaId};
use eigenroot::operator::fleet::{hermite, t1, t2, t3};
use eigenroot::operator::DifferentialOperator;
use eigenroot::poly::{ComplexApprox, ExactPolynomial};
use eigenroot::roots::{find_roots_with, max_modulus, RootOptions};
use eigenroot::scaling::{empirical_cauchy, estimate_c0, scaled_measure, scan, RatioSummary};
use eigenroot::Error;
use rug::Rational;

type Outcome = Result<String, String>;

struct Thresholds(toml::Table);

impl Thresholds {
    fn load() -> Self {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("Cargo.toml");
        let manifest: toml::Table = std::fs::read_to_string(path).unwrap().parse().unwrap();
        let table = manifest["package"]["metadata"]["acceptance"].as_table().unwrap().clone();
        Self(table)
    }

    fn f(&self, key: &str) -> f64 {
        match &self.0[key] {
            toml::Value::Float(x) => *x,
            toml::Value::Integer(i) => *i as f64,
            v => panic!("{key} is not numeric: {v}"),
        }
    }

    fn n(&self, key: &str) -> usize {
        self.0[key].as_integer().unwrap() as usize
    }
}

fn named_fleet() -> [(&'static str, DifferentialOperator); 4] {
    [("t1", t1()), ("t2", t2()), ("t3", t3()), ("zD+D^2", hermite())]
}

fn exact_verification() -> Outcome {
    let jobs: Vec<(usize, usize)> = (0..4).flat_map(|i| (1..=50).map(move |n| (i, n))).collect();
    let ops = named_fleet();
    let results = exec::map(Execution::Parallel, &jobs, |&(i, n)| match eigenpolynomial(&ops[i].1, n) {
        Ok(pair) => Ok(verify_eigen(&ops[i].1, &pair).is_zero()),
        Err(Error::SpectralCollision { .. }) => Err(()),
        Err(e) => panic!("{} n={n}: {e}", ops[i].0),
    });
    let verified = results.iter().filter(|r| matches!(r, Ok(true))).count();
    let collisions = results.iter().filter(|r| r.is_err()).count();
    let bad: Vec<String> = jobs
        .iter()
        .zip(&results)
        .filter(|(_, r)| matches!(r, Ok(false)))
        .map(|(&(i, n), _)| format!("{} n={n}", ops[i].0))
        .collect();
    let detail = format!("{verified} exact zeros, {collisions} collisions skipped");
    if bad.is_empty() { Ok(detail) } else { Err(format!("{detail}; nonzero residual at {}", bad.join(", "))) }
}

/// `i^{-n} He_n(i z)` from `He_{n+1} = x He_n - n He_{n-1}`. The sign flips
/// come from `i^{k-n} = (-1)^{(n-k)/2}` on the surviving parity.
fn rotated_hermite(n_max: usize) -> Vec<ExactPolynomial> {
    let mut he: Vec<Vec<Rational>> = vec![vec![Rational::from(1)], vec![Rational::new(), Rational::from(1)]];
    for n in 1..n_max {
        let mut next = vec![Rational::new(); n + 2];
        for (k, c) in he[n].iter().enumerate() {
            next[k + 1] += c;
        }
        for (k, c) in he[n - 1].iter().enumerate() {
            next[k] -= Rational::from(c * n as u32);
        }
        he.push(next);
    }
    he.into_iter()
        .enumerate()
        .map(|(n, cs)| {
            let rotated = cs
                .into_iter()
                .enumerate()
                .map(|(k, c)| if (n - k) % 4 == 2 { -c } else { c })
                .collect();
            ExactPolynomial::new(rotated)
        })
        .collect()
}

fn hermite_oracle() -> Outcome {
    let oracle = rotated_hermite(60);
    let op = hermite();
    for (n, expected) in oracle.iter().enumerate().skip(1) {
        let pair = eigenpolynomial(&op, n).map_err(|e| format!("n={n}: {e}"))?;
        if &pair.p != expected {
            return Err(format!("n={n}: solver {} but oracle {}", pair.p, expected));
        }
    }
    Ok("coefficient-exact for n = 1..60".into())
}

fn scaling_constant(t: &Thresholds) -> Outcome {
    let op = hermite();
    let opts = RootOptions::default();
    let pair = eigenpolynomial(&op, 100).map_err(|e| e.to_string())?;
    let r100 = max_modulus(&find_roots_with(&pair.p, &opts).map_err(|e| e.to_string())?).to_f64() / 10.0;
    let records = scan(&op, 60, 120, 10, &opts, Execution::Parallel).map_err(|e| e.to_string())?;
    let (c_hat, spread) = estimate_c0(&records).map_err(|e| e.to_string())?;
    let (c_hat, spread) = (c_hat.to_f64(), spread.to_f64());
    let detail = format!("r100/10 = {r100:.6}, c_hat = {c_hat:.6}, spread = {spread:.6}");
    let ok = (t.f("hermite_r100_min")..=t.f("hermite_r100_max")).contains(&r100)
        && (t.f("c0_min")..=t.f("c0_max")).contains(&c_hat)
        && spread <= t.f("c0_max_spread");
    if ok { Ok(detail) } else { Err(detail) }
}

fn bounded_ratios(t: &Thresholds) -> Outcome {
    let (lo, hi) = (t.n("ratio_n_from"), t.n("ratio_n_to"));
    let limit = t.f("max_ratio_spread");
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, op) in [("t1", t1()), ("t2", t2()), ("t3", t3())] {
        let records = scan(&op, lo, hi, 1, &RootOptions::default(), Execution::Parallel).map_err(|e| e.to_string())?;
        let s = RatioSummary::over(&records, lo, hi).ok_or(format!("{name}: no usable ratios"))?;
        ok &= s.failures == 0 && s.min > 0.0 && s.spread() <= limit;
        lines.push(format!(
            "{name} [{:.4}, {:.4}] spread {:.4} ({} n, {} collisions, {} failures)",
            s.min, s.max, s.spread(), s.count, s.collisions, s.failures
        ));
    }
    let detail = format!("{}; limit {limit}", lines.join("; "));
    if ok { Ok(detail) } else { Err(detail) }
}

fn lemma_fleet(t: &Thresholds) -> Outcome {
    let outcome = run_fleet(&FleetConfig::default(), Execution::Parallel);
    let total = outcome.reports.len();
    let failed = outcome.failures().count();
    let per: Vec<String> = [
        LemmaId::Rhs,
        LemmaId::LogDerivativeLower,
        LemmaId::RatioGap,
        LemmaId::DerivativeOfRatio,
        LemmaId::Growth,
    ]
    .iter()
    .map(|&id| format!("{} {}", id.name(), outcome.count(id)))
    .collect();
    let detail = format!("{} of {total} hold ({})", total - failed, per.join(", "));
    if failed == 0 && total >= t.n("min_lemma_checks") { Ok(detail) } else { Err(detail) }
}

fn cauchy_limit(t: &Thresholds) -> Outcome {
    let op = hermite();
    let z = ComplexApprox::new(128, 3.0, 0.0);
    let limit = (-3.0 + 13f64.sqrt()) / 2.0;
    let mut errors = Vec::new();
    for n in [25, 50, 100] {
        let m = scaled_measure(&op, n, &RootOptions::default()).map_err(|e| e.to_string())?;
        let c = empirical_cauchy(&m, &z).map_err(|e| e.to_string())?.to_c64();
        errors.push((c - num_complex::Complex64::new(limit, 0.0)).norm());
    }
    let detail = format!("errors at n = 25, 50, 100: {:.3e}, {:.3e}, {:.3e}", errors[0], errors[1], errors[2]);
    if errors[0] > errors[1] && errors[1] > errors[2] && errors[2] <= t.f("cauchy_max_error") {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn locus(t: &Thresholds) -> Outcome {
    let curve = CurveSpec::from_operator(&hermite()).map_err(|e| e.to_string())?;
    let locus = discriminant_locus(&curve).map_err(|e| e.to_string())?;
    let tol = t.f("locus_tolerance");
    let mut pts: Vec<(f64, f64)> = locus.points.iter().map(ComplexApprox::to_f64).collect();
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    let expected = [(0.0, -2.0), (0.0, 2.0)];
    let matches = pts.len() == 2
        && pts.iter().zip(&expected).all(|(p, e)| (p.0 - e.0).abs() <= tol && (p.1 - e.1).abs() <= tol);
    let moduli: Vec<f64> = pts.iter().map(|p| p.0.hypot(p.1)).collect();
    let in_window = moduli.iter().all(|&m| (t.f("c0_min")..=t.f("c0_max")).contains(&m));
    let detail = format!("points {pts:?}, moduli {moduli:?}, inside the c_hat window");
    if matches && in_window { Ok(detail) } else { Err(detail) }
}

fn run_measure(dir: &Path, tag: &str) -> Result<(PathBuf, PathBuf), String> {
    let svg = dir.join(format!("{tag}.svg"));
    let csv = dir.join(format!("{tag}.csv"));
    let out = Command::new(env!("CARGO_BIN_EXE_eigenroot"))
        .args(["measure", "--op", "z*D + z*D^2 + z*D^3 + z*D^4 + z*D^5", "--n", "100", "--svg"])
        .arg(&svg)
        .arg("--csv")
        .arg(&csv)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok((svg, csv))
}

fn figure(t: &Thresholds) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (svg_a, csv_a) = run_measure(dir.path(), "a")?;
    let (svg_b, csv_b) = run_measure(dir.path(), "b")?;
    let read = |p: &Path| std::fs::read(p).map_err(|e| e.to_string());
    let identical = read(&svg_a)? == read(&svg_b)? && read(&csv_a)? == read(&csv_b)?;

    let mut reader = csv::Reader::from_path(&csv_a).map_err(|e| e.to_string())?;
    let atoms: Vec<(f64, f64)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[1].parse().unwrap(), r[2].parse().unwrap())
        })
        .collect();
    let bx = PlotBox::fit(&atoms);
    let svg = String::from_utf8(read(&svg_a)?).map_err(|e| e.to_string())?;
    let on_canvas = svg.lines().filter(|l| l.starts_with("<circle")).all(|l| {
        let attr = |name: &str| -> f64 {
            let start = l.find(&format!("{name}=\"")).unwrap() + name.len() + 2;
            l[start..].split('"').next().unwrap().parse().unwrap()
        };
        (0.0..=300.0).contains(&attr("cx")) && (0.0..=300.0).contains(&attr("cy"))
    });
    let in_box = atoms.len() == 100 && atoms.iter().all(|&p| bx.contains(p)) && on_canvas;
    let max_abs = atoms.iter().map(|p| p.0.hypot(p.1)).fold(0.0, f64::max);
    let bound = t.f("t1_atom_bound");
    let detail = format!(
        "byte-identical {identical}, inside auto-fit box {in_box}, max |atom| = {max_abs:.6} against bound {bound}"
    );
    if identical && in_box && max_abs <= bound { Ok(detail) } else { Err(detail) }
}

fn main() {
    let t = Thresholds::load();
    type Check<'a> = (&'a str, Box<dyn Fn() -> Outcome + 'a>);
    let checks: Vec<Check> = vec![
        ("exact eigen-verification", Box::new(exact_verification)),
        ("Hermite oracle equivalence", Box::new(hermite_oracle)),
        ("scaling constant", Box::new(|| scaling_constant(&t))),
        ("bounded growth ratios", Box::new(|| bounded_ratios(&t))),
        ("lemma fleet", Box::new(|| lemma_fleet(&t))),
        ("Cauchy-limit convergence", Box::new(|| cauchy_limit(&t))),
        ("discriminant locus", Box::new(|| locus(&t))),
        ("figure reproduction", Box::new(|| figure(&t))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {} PASS {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
