//! Acceptance criteria 1–7, one PASS/FAIL line each.

use std::time::{Duration, Instant};

use openxxx_core::bethe::RootFamilies;
use openxxx_core::harness::config::ExperimentConfig;
use openxxx_core::harness::spectrum::{bethe_vector, run_spectrum, RESIDUE_TOL};
use openxxx_core::harness::suite::{identity_checks, identity_points, Status};
use openxxx_core::identities;
use openxxx_core::reflection::WeightSource;
use openxxx_core::sampling;
use openxxx_core::vectors::{align, eigencheck, phi_product_n2, phi_recursion, phi_trace};
use openxxx_core::{gl_rep, BetheSystem, BoundarySpec, ChainSpec, Conventions, KPlusMode, OpenChain, SiteSpec, SolveOptions, C64};

const SEED: u64 = 20_240_611;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Symᵐ weight (m, 0, …, 0).
fn sym(n: usize, m: usize) -> Vec<C64> {
    let mut mu = vec![c(0.0); n];
    mu[0] = c(m as f64);
    mu
}

fn model(n: usize, sites: &[(usize, f64)], a_split: usize, c_minus: f64, mode: KPlusMode, conv: Conventions) -> OpenChain {
    let sites = sites.iter().map(|&(m, a)| SiteSpec { rep: gl_rep(n, &sym(n, m)).unwrap(), a: c(a) }).collect();
    let chain = ChainSpec::new(n, c(1.0), sites).unwrap();
    OpenChain::new(chain, BoundarySpec { a_split, c_minus: c(c_minus), k_plus_mode: mode }).unwrap().with_conventions(conv)
}

fn config_json(n: usize, sites: &[(usize, f64)], a_split: usize, c_minus: f64, seed: u64) -> String {
    let sites: Vec<String> = sites
        .iter()
        .map(|&(m, a)| {
            let mu: Vec<String> = sym(n, m).iter().map(|z| format!("{}", z.re)).collect();
            format!("{{\"mu\": [{}], \"a\": [{a}, 0.0]}}", mu.join(", "))
        })
        .collect();
    format!(
        "{{\"n\": {n}, \"hbar\": [1.0, 0.0], \"sites\": [{}], \
         \"boundary\": {{\"a_split\": {a_split}, \"c_minus\": [{c_minus}, 0.0], \"k_plus_mode\": \"identity\"}}, \
         \"sectors\": \"all\", \"sample_points\": \"random:5:{seed}\", \"seed\": {seed}}}",
        sites.join(", ")
    )
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

// 1. Identity suite

const IDENTITY_NAMES: [&str; 9] = [
    "yang_baxter",
    "unitarity",
    "crossing_unitarity",
    "gl_invariance",
    "rtt",
    "k_minus_reflection",
    "d_reflection",
    "k_plus_dual_reflection",
    "transfer_commutativity",
];

fn criterion_1(conv: Conventions) -> Verdict {
    let start = Instant::now();
    let configs = [
        model(2, &[(1, 0.2), (2, -0.3), (1, 0.45)], 1, 0.4, KPlusMode::DualOfKMinus, conv),
        model(3, &[(1, 0.2), (2, -0.3)], 1, 0.4, KPlusMode::DualOfKMinus, conv),
        model(3, &[(1, 0.15), (1, -0.35), (1, 0.5)], 2, 0.7, KPlusMode::DualOfKMinus, conv),
    ];
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (idx, m) in configs.iter().enumerate() {
        let points = identity_points(SEED + idx as u64, m.hbar());
        let (checks, _) = identity_checks(m, &points, SEED, 1e-9);
        for name in IDENTITY_NAMES {
            match checks.iter().find(|c| c.name == name) {
                Some(c) if c.status == Status::Pass => {}
                Some(c) => failures.push(format!("{name}[cfg {idx}] {:.2e}", c.max_residual)),
                None => failures.push(format!("{name}[cfg {idx}] missing")),
            }
        }
        for c in &checks {
            if c.status == Status::Fail && !IDENTITY_NAMES.contains(&c.name.as_str()) {
                failures.push(format!("{}[cfg {idx}] {:.2e}", c.name, c.max_residual));
            }
            if c.status != Status::Skipped {
                worst = worst.max(c.max_residual);
            }
        }
    }
    let t = start.elapsed();
    let pass = failures.is_empty() && t < Duration::from_secs(30);
    verdict(pass, format!("max residual {worst:.2e}, {:.1} s{}", secs(t), fail_list(&failures)))
}

fn fail_list(f: &[String]) -> String {
    if f.is_empty() {
        String::new()
    } else {
        let shown: Vec<&str> = f.iter().take(6).map(String::as_str).collect();
        format!("; failing: {}", shown.join(", "))
    }
}

// 2. Highest-weight property and boundary eigenvalues

fn criterion_2() -> Verdict {
    let d = Conventions::default();
    let id = KPlusMode::Identity;
    let configs = [
        ("n2 spin-1/2 L1 a1", model(2, &[(1, 0.2)], 1, 0.4, id, d)),
        ("n2 spin-1/2 L2 a2", model(2, &[(1, 0.2), (1, -0.3)], 2, 0.4, id, d)),
        ("n2 spin-1 L2 a1", model(2, &[(2, 0.1), (2, -0.45)], 1, 1.3, id, d)),
        ("n3 fund L2 a3", model(3, &[(1, 0.2), (1, -0.3)], 3, 0.4, id, d)),
        ("n3 sym2 L1 a1", model(3, &[(2, 0.25)], 1, 0.6, id, d)),
        ("n3 sym2 L2 a3", model(3, &[(2, 0.25), (2, -0.15)], 3, 0.6, id, d)),
    ];
    let mut annihilation: f64 = 0.0;
    let mut oracle: f64 = 0.0;
    let mut printed: f64 = 0.0;
    let mut failures = Vec::new();
    for (name, m) in &configs {
        let mut rng = sampling::seeded(SEED ^ 0x2);
        let points = sampling::generic_points(&mut rng, 10, |_| true);
        let h = m.chain.quantum_dim();
        let omega = m.chain.vacuum_index();
        let cw = m.closed_weights();
        let (mut ann, mut orc, mut prn) = (0.0f64, 0.0f64, 0.0f64);
        for &u in &points {
            let dm = m.double_row_d(u).unwrap();
            let n = m.n();
            let scalars: Vec<C64> = (0..n).map(|i| dm.data()[(i * h + omega, i * h + omega)]).collect();
            let scale = scalars.iter().fold(0.0f64, |a, z| a.max(z.norm()));
            for i in 0..n {
                for j in 0..i {
                    ann = ann.max(dm.aux_block(i, j).unwrap().data().column(omega).norm());
                }
                let col = dm.aux_block(i, i).unwrap().data().column(omega).into_owned();
                let mut rest = col.clone();
                rest[omega] = c(0.0);
                ann = ann.max(rest.norm());
                orc = orc.max((cw.lambda_i(i, u) - scalars[i]).norm() / scale);
                prn = prn.max((cw.printed_lambda_i(i, u) - scalars[i]).norm() / scale);
            }
        }
        if ann >= 1e-11 {
            failures.push(format!("{name} annihilation {ann:.2e}"));
        }
        if orc >= 1e-9 {
            failures.push(format!("{name} oracle {orc:.2e}"));
        }
        annihilation = annihilation.max(ann);
        oracle = oracle.max(orc);
        printed = printed.max(prn);
    }
    let printed_note = if printed < 1e-9 {
        "printed forms agree".to_string()
    } else {
        format!("printed forms MISMATCH {printed:.2e} (reported, not gating)")
    };
    verdict(
        failures.is_empty(),
        format!("lowering {annihilation:.2e}, oracle {oracle:.2e}, {printed_note}{}", fail_list(&failures)),
    )
}

// 3. Rank-2 end-to-end and 4. nested rank-3 sweeps

struct SweepLimits {
    budget: Duration,
    eigen: bool,
    stop_early: bool,
}

/// (n, sites as (Symᵐ, inhomogeneity), a_split, c_minus)
type Case = (usize, Vec<(usize, f64)>, usize, f64);

fn sweep(cases: &[Case], conv: Conventions, limits: SweepLimits) -> Verdict {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst_match: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    let mut worst_eigen: f64 = 0.0;
    let mut states = 0;
    for (idx, (n, sites, a_split, cm)) in cases.iter().enumerate() {
        let cfg = ExperimentConfig::from_json(&config_json(*n, sites, *a_split, *cm, SEED + idx as u64)).unwrap();
        let mut exp = cfg.resolve(None).unwrap();
        exp.model = exp.model.clone().with_conventions(conv);
        let tag = format!("n{n} L{} c{cm}", sites.len());
        let run = match run_spectrum(&exp) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("{tag}: {e}"));
                if limits.stop_early {
                    break;
                }
                continue;
            }
        };
        let r = &run.report;
        states += r.quantum_dim;
        if r.weights.source != WeightSource::ClosedForm {
            failures.push(format!("{tag}: weights fell back to operator action"));
        }
        for s in &r.sectors {
            let physical: Vec<_> = s.solutions.iter().filter(|x| x.physical).collect();
            if physical.is_empty() && *n == 2 {
                failures.push(format!("{tag}: sector {:?} unsolved", s.sector));
            }
            for sol in physical {
                worst_match = worst_match.max(sol.max_mismatch);
                worst_residual = worst_residual.max(sol.bethe_residual);
                if sol.matched_level.is_none() {
                    failures.push(format!("{tag}: {:?} unmatched ({:.2e})", s.sector, sol.max_mismatch));
                }
                if sol.bethe_residual >= 1e-10 {
                    failures.push(format!("{tag}: {:?} residual {:.2e}", s.sector, sol.bethe_residual));
                }
                if sol.residue.is_some_and(|q| q >= RESIDUE_TOL) {
                    failures.push(format!("{tag}: {:?} residue {:.2e}", s.sector, sol.residue.unwrap()));
                }
                if limits.eigen {
                    match sol.eigen_residual {
                        Some(e) if e < 1e-7 => worst_eigen = worst_eigen.max(e),
                        other => failures.push(format!("{tag}: {:?} eigenvector {:?}", s.sector, other)),
                    }
                }
            }
        }
        if !r.injective {
            failures.push(format!("{tag}: two solutions share an ED level"));
        }
        if r.completeness < 1.0 {
            failures.push(format!("{tag}: completeness {:.4}", r.completeness));
        }
        if limits.stop_early && !failures.is_empty() {
            break;
        }
    }
    let t = start.elapsed();
    if t >= limits.budget {
        failures.push(format!("runtime {:.1} s over {:.0} s", secs(t), secs(limits.budget)));
    }
    verdict(
        failures.is_empty(),
        format!(
            "{states} states, match {worst_match:.2e}, BE residual {worst_residual:.2e}, eigen {worst_eigen:.2e}, {:.1} s{}",
            secs(t),
            fail_list(&failures)
        ),
    )
}

fn criterion_3(conv: Conventions, stop_early: bool) -> Verdict {
    let mut cases = Vec::new();
    for cm in [0.4, 2.0] {
        for l in 1..=3usize {
            let sites: Vec<(usize, f64)> = [0.2, -0.3, 0.45][..l].iter().map(|&a| (1, a)).collect();
            cases.push((2, sites, 1, cm));
        }
    }
    sweep(&cases, conv, SweepLimits { budget: Duration::from_secs(60), eigen: true, stop_early })
}

fn criterion_4(conv: Conventions, stop_early: bool) -> Verdict {
    let cases = vec![(3, vec![(1, 0.2)], 1, 0.4), (3, vec![(1, 0.2), (1, -0.3)], 1, 0.4)];
    sweep(&cases, conv, SweepLimits { budget: Duration::from_secs(120), eigen: true, stop_early })
}

// 5. Bethe-vector constructions

fn criterion_5() -> Verdict {
    let d = Conventions::default();
    let id = KPlusMode::Identity;
    let configs = [
        model(2, &[(1, 0.2), (1, -0.3), (1, 0.45)], 1, 0.4, id, d),
        model(3, &[(1, 0.2)], 1, 0.4, id, d),
        model(3, &[(1, 0.2), (1, -0.3)], 1, 0.4, id, d),
        model(3, &[(1, 0.1), (1, -0.25)], 2, 0.9, id, d),
    ];
    let mut failures = Vec::new();
    let (mut proportional, mut permutation, mut eigen) = (0.0f64, 0.0f64, 0.0f64);
    let mut control = f64::INFINITY;
    let mut tested = 0;
    for (idx, m) in configs.iter().enumerate() {
        let sys = BetheSystem::new(m).unwrap();
        let n = m.n();
        let cap = m.chain.len();
        let mut rng = sampling::seeded(SEED ^ 0x5 ^ idx as u64);
        let samples = sampling::generic_points(&mut rng, 5, |_| true);
        let sectors: Vec<Vec<usize>> = openxxx_core::harness::config::all_sectors_up_to(n, cap)
            .into_iter()
            .filter(|s| (1..=3).contains(&s.iter().sum::<usize>()))
            .collect();
        for sector in sectors {
            let out = sys.solve(&sector, &SolveOptions { seed: SEED, ..SolveOptions::default() }).unwrap();
            for roots in out.solutions {
                let rec = match phi_recursion(m, &roots) {
                    Ok(v) => v,
                    Err(openxxx_core::Error::ZeroVector) => continue,
                    Err(e) => {
                        failures.push(format!("{sector:?}: {e}"));
                        continue;
                    }
                };
                tested += 1;
                let tr = phi_trace(m, &roots).unwrap();
                proportional = proportional.max(align(&tr.state, &rec.state).1);
                if n == 2 {
                    let prod = phi_product_n2(m, &roots).unwrap();
                    proportional = proportional.max(align(&prod.state, &rec.state).1);
                }
                let rev = RootFamilies::new(roots.roots.iter().map(|f| f.iter().rev().copied().collect()).collect());
                permutation = permutation.max(align(&phi_recursion(m, &rev).unwrap().state, &rec.state).1);
                permutation = permutation.max(align(&phi_trace(m, &rev).unwrap().state, &tr.state).1);
                let e = eigencheck(m, &rec, &samples, Some(&sys)).unwrap().max_residual;
                eigen = eigen.max(e);
                let mut prng = sampling::seeded(SEED ^ tested as u64);
                let shifted = RootFamilies::new(
                    roots
                        .roots
                        .iter()
                        .map(|f| f.iter().map(|y| y + C64::from_polar(1e-2, sampling::generic_point(&mut prng).arg())).collect())
                        .collect(),
                );
                let pv = bethe_vector(m, &shifted).unwrap();
                let pe = eigencheck(m, &pv, &samples, Some(&sys)).unwrap().max_residual;
                control = control.min(pe);
            }
        }
    }
    if tested == 0 {
        failures.push("no Bethe vectors tested".into());
    }
    let pass = failures.is_empty() && proportional < 1e-9 && permutation < 1e-9 && eigen < 1e-7 && control >= 1e-4;
    verdict(
        pass,
        format!(
            "{tested} vectors, trace~recursion {proportional:.2e}, permutation {permutation:.2e}, eigen {eigen:.2e}, perturbed min {control:.2e}{}",
            fail_list(&failures)
        ),
    )
}

// 6. Reduced algebra

fn criterion_6() -> Verdict {
    let d = Conventions::default();
    let id = KPlusMode::Identity;
    let configs = [
        model(2, &[(1, 0.2), (1, -0.3)], 1, 0.4, id, d),
        model(3, &[(1, 0.2), (1, -0.3)], 1, 0.4, id, d),
        model(3, &[(2, 0.25)], 3, 0.6, id, d),
        model(3, &[(1, 0.1), (2, -0.2)], 2, 1.1, id, d),
        model(4, &[(1, 0.3)], 2, 0.5, id, d),
    ];
    let (mut refl, mut tau, mut weight) = (0.0f64, 0.0f64, 0.0f64);
    for (idx, m) in configs.iter().enumerate() {
        let n = m.n();
        let points = identity_points(SEED ^ 0x6 ^ idx as u64, m.hbar());
        for (p, &u) in points.iter().enumerate() {
            let v = points[(p + 1) % points.len()];
            for k in 2..=n {
                refl = refl.max(identities::reduced_reflection_on_vacuum(m, k, u, v).unwrap());
            }
            let vectors = identities::vacuum_generated(m, v).unwrap();
            for k in 1..n {
                tau = tau.max(identities::tau_consistency(m, k, u, &vectors).unwrap());
            }
            for k in 1..=n {
                weight = weight.max(identities::reduced_vacuum_weight(m, k, u).unwrap());
            }
        }
    }
    verdict(
        refl < 1e-9 && tau < 1e-9 && weight < 1e-9,
        format!("reduced reflection {refl:.2e}, tau {tau:.2e}, vacuum scalar {weight:.2e}"),
    )
}

// 7. Mutation sensitivity

fn criterion_7() -> Verdict {
    let base = Conventions::default();
    let mutations = [
        ("K-plus shift", Conventions { k_plus_shift_sign: -1.0, ..base }),
        ("lambda-prime", Conventions { lambda_prime_sign: -1.0, ..base }),
        ("f-tilde", Conventions { ft_sign: -1.0, ..base }),
    ];
    let mut parts = Vec::new();
    let mut all = true;
    for (name, conv) in mutations {
        let caught = if !criterion_1(conv).pass {
            Some(1)
        } else if !criterion_3(conv, true).pass {
            Some(3)
        } else if !criterion_4(conv, true).pass {
            Some(4)
        } else {
            None
        };
        match caught {
            Some(k) => parts.push(format!("{name} caught by {k}")),
            None => {
                all = false;
                parts.push(format!("{name} NOT caught"));
            }
        }
    }
    verdict(all, parts.join(", "))
}

fn main() {
    let d = Conventions::default();
    type Criterion<'a> = (&'a str, Box<dyn Fn() -> Verdict>);
    let criteria: Vec<Criterion> = vec![
        ("identity suite", Box::new(move || criterion_1(d))),
        ("highest weight and boundary eigenvalues", Box::new(criterion_2)),
        ("rank-2 Bethe ansatz against ED", Box::new(move || criterion_3(d, false))),
        ("nested rank-3 Bethe ansatz against ED", Box::new(move || criterion_4(d, false))),
        ("Bethe vector constructions", Box::new(criterion_5)),
        ("reduced algebra embedding", Box::new(criterion_6)),
        ("mutation sensitivity", Box::new(criterion_7)),
    ];
    let mut failed = 0;
    for (k, (title, run)) in criteria.iter().enumerate() {
        let v = run();
        if !v.pass {
            failed += 1;
        }
        println!("criterion {} {:<42} {}  {}", k + 1, title, if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
