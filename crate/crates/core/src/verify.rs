//! The acceptance suite: each check runs a fixed experiment, records the
//! quantities it measured and decides pass or fail at fixed tolerances.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::atlas::{
    corner_face_transition, face_corner_transition, log_blowup, log_blowup_inverse,
    ralpha_transition, smoothness_probe, ApproachPath, TransitionMap,
};
use crate::error::{Error, Result};
use crate::flat::asymptotics::{
    bisector_decay_fit, extract_asymptotics, vanishing_order_fit, wall_difference_quotients,
    wall_distance,
};
use crate::flat::grid::ChamberGrid;
use crate::flat::operator::{assemble_radial, RadialOperator};
use crate::flat::solve::{bottom_of_spectrum, solve_resolvent, Reduction};
use crate::flat::spectral::{SpectralParam, SPECTRUM_BOTTOM};
use crate::geometry::{
    chart_metric, coset_count, enumerate_signed_perms, killing_pullback_fd, ChartId,
};
use crate::parametrix::{CompositeParametrix, PartitionOfUnity};
use crate::product::dissipative::{angular_decay_measure, dissipative_inequality_check, ConeSetup};
use crate::product::distance::{product_distance, smoothed_distance, triple_ratio, ProductPoint};
use crate::product::kernels::H2_FACTOR_BOTTOM;
use crate::product::model::{
    model_bottom, product_resolvent, relative_l2, ProductGrid, ProductMethod, L0_SHIFT,
};
use crate::spherical::{
    spherical_on_grid, spherical_via_resolvent, wall_uniformity, weyl_sum_coeffs, SpectralVector,
    WallWindow,
};

type C = Complex64;

pub const CRITERIA: [(u32, &str); 12] = [
    (1, "bottom-of-spectrum"),
    (2, "model-bottom"),
    (3, "contour-vs-direct"),
    (4, "radial-decay"),
    (5, "wall-uniformity"),
    (6, "angular-decay"),
    (7, "smoothed-distance"),
    (8, "chart-metric"),
    (9, "atlas-transitions"),
    (10, "signed-permutations"),
    (11, "neumann-correction"),
    (12, "spherical-functions"),
];

/// Named groups of checks.
pub fn suite(name: &str) -> Option<Vec<u32>> {
    let ids: &[u32] = match name {
        "all" | "acceptance" => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12],
        "geometry" => &[7, 8, 9, 10],
        "flat" => &[1, 4, 5],
        "product" => &[2, 3, 6],
        "parametrix" => &[11],
        "spherical" => &[12],
        "quick" => &[2, 3, 7, 8, 9, 10],
        _ => return None,
    };
    Some(ids.to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Random samples per configuration in the inequality checks.
    pub samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 20240611,
            samples: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub metrics: Vec<Metric>,
    pub detail: String,
    /// Wall-clock time; left out of serialised output so reports are reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2} {}: {} ({:.1} s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

#[derive(Default)]
struct Outcome {
    pass: bool,
    metrics: Vec<Metric>,
    notes: Vec<String>,
}

impl Outcome {
    fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.push(Metric {
            name: name.into(),
            value,
        });
    }

    /// Record a sub-check; the criterion passes only if all of them do.
    fn check(&mut self, what: &str, ok: bool) {
        if !ok {
            self.notes.push(format!("{what} failed"));
        }
    }
}

pub fn run(id: u32, cfg: &VerifyConfig) -> CriterionReport {
    let name = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map_or("unknown", |c| c.1);
    let start = Instant::now();
    let result = match id {
        1 => bottom_of_spectrum_check(),
        2 => model_bottom_check(),
        3 => contour_check(),
        4 => radial_decay_check(),
        5 => wall_uniformity_check(),
        6 => angular_decay_check(cfg),
        7 => smoothed_distance_check(cfg),
        8 => chart_metric_check(cfg),
        9 => atlas_check(cfg),
        10 => permutation_check(),
        11 => neumann_check(),
        12 => spherical_check(),
        _ => Err(Error::InvalidInput(format!("no criterion {id}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    match result {
        Ok(mut o) => {
            o.pass = o.notes.is_empty();
            let detail = if o.pass {
                summary(&o.metrics)
            } else {
                format!("{}; {}", o.notes.join(", "), summary(&o.metrics))
            };
            CriterionReport {
                id,
                name: name.into(),
                pass: o.pass,
                metrics: o.metrics,
                detail,
                seconds,
            }
        }
        Err(e) => CriterionReport {
            id,
            name: name.into(),
            pass: false,
            metrics: Vec::new(),
            detail: format!("error: {e}"),
            seconds,
        },
    }
}

pub fn run_all(ids: &[u32], cfg: &VerifyConfig) -> Vec<CriterionReport> {
    ids.iter().map(|&id| run(id, cfg)).collect()
}

fn summary(m: &[Metric]) -> String {
    m.iter()
        .take(6)
        .map(|m| format!("{}={:.4e}", m.name, m.value))
        .collect::<Vec<_>>()
        .join(" ")
}

fn gaussian(op: &RadialOperator) -> Vec<C> {
    op.grid
        .sample(|z| C::new((-(z[0] * z[0] + z[1] * z[1])).exp(), 0.0))
}

fn zeros(n: usize) -> Vec<C> {
    vec![C::new(0.0, 0.0); n]
}

fn bottom_of_spectrum_check() -> Result<Outcome> {
    let start = Instant::now();
    let mut o = Outcome::default();
    let mut gaps = Vec::new();
    for r in [20.0, 30.0, 40.0] {
        let op = assemble_radial(ChamberGrid::new(0.1, r)?);
        let b = bottom_of_spectrum(&op, 1e-12, 500)?;
        o.metric(format!("rayleigh_r{r}"), b.rayleigh);
        o.check(
            &format!("lower bound at R = {r}"),
            b.rayleigh >= SPECTRUM_BOTTOM * 0.95,
        );
        gaps.push((b.rayleigh - SPECTRUM_BOTTOM).abs());
    }
    o.check("approach to 1/3", gaps.windows(2).all(|w| w[1] < w[0]));
    let t = start.elapsed().as_secs_f64();
    o.check("runtime", t < 120.0);
    Ok(o)
}

fn model_bottom_check() -> Result<Outcome> {
    let mut o = Outcome::default();
    let g = ProductGrid::new(60.0, 80.0, 200, 300)?;
    let b = model_bottom(&g, 1e-12, 2000)?;
    let rel = (b.rayleigh - SPECTRUM_BOTTOM).abs() / SPECTRUM_BOTTOM;
    o.metric("rayleigh", b.rayleigh);
    o.metric("relative_error", rel);
    o.metric("hyperbolic_part", b.hyperbolic_part);
    o.metric("line_part_plus_shift", b.line_part + L0_SHIFT);
    o.check("1/12 + 1/4", rel < 0.05);
    o.check(
        "hyperbolic factor near 1/12",
        (b.hyperbolic_part - H2_FACTOR_BOTTOM).abs() < 0.05 * SPECTRUM_BOTTOM,
    );
    Ok(o)
}

fn contour_check() -> Result<Outcome> {
    let start = Instant::now();
    let mut o = Outcome::default();
    let g = ProductGrid::new(10.0, 12.0, 100, 100)?;
    let bump = |a0: f64, b0: f64, w: f64| {
        move |a: f64, b: f64| {
            let r2 = ((a - a0).powi(2) + (b - b0).powi(2)) / (w * w);
            if r2 < 1.0 {
                C::new((-1.0 / (1.0 - r2)).exp(), 0.0)
            } else {
                C::new(0.0, 0.0)
            }
        }
    };
    let cases: [(C, Vec<C>); 5] = [
        (C::new(-1.0, 0.0), g.sample(bump(0.0, 3.0, 2.0))),
        (C::new(-0.5, 0.3), g.sample(bump(2.0, 1.0, 1.5))),
        (C::new(0.1, -0.4), g.sample(bump(-3.0, 5.0, 2.5))),
        (
            C::new(-2.0, 0.0),
            g.sample(|a, b| {
                C::new(
                    (-(a * a + b * b) / 4.0).exp(),
                    0.3 * (-(a - 1.0).powi(2) - b * b).exp(),
                )
            }),
        ),
        (C::new(0.2, 0.5), g.sample(bump(4.0, 6.0, 3.0))),
    ];
    let mut worst: f64 = 0.0;
    for (k, (lam, f)) in cases.iter().enumerate() {
        let p = SpectralParam::new(*lam)?;
        let a = product_resolvent(&g, &p, f, ProductMethod::Contour)?;
        let b = product_resolvent(&g, &p, f, ProductMethod::Direct)?;
        let e = relative_l2(&g, &a, &b);
        o.metric(format!("relative_l2_{k}"), e);
        worst = worst.max(e);
    }
    o.check("contour agreement", worst < 1e-3);
    let t = start.elapsed().as_secs_f64();
    o.check("runtime", t < 300.0);
    Ok(o)
}

fn radial_decay_check() -> Result<Outcome> {
    let mut o = Outcome::default();
    let r_max = 30.0;
    let op = assemble_radial(ChamberGrid::new(0.1, r_max)?);
    let f = gaussian(&op);
    for (k, lam) in [
        C::new(-1.0, 0.0),
        C::new(-2.0, 0.0),
        C::new(SPECTRUM_BOTTOM - 1.0, 1.0),
    ]
    .into_iter()
    .enumerate()
    {
        let p = SpectralParam::new(lam)?;
        let u = solve_resolvent(&op, p, &f, Reduction::WeylInvariant)?;
        let kappa = p.kappa();
        let fit = bisector_decay_fit(&op, &u, 15.0, r_max - 4.0 / kappa)?;
        let rel = (-fit.slope - kappa).abs() / kappa;
        o.metric(format!("kappa_{k}"), kappa);
        o.metric(format!("rate_{k}"), -fit.slope);
        o.metric(format!("relative_error_{k}"), rel);
        o.check(&format!("decay rate at lambda = {lam}"), rel < 0.02);
    }
    Ok(o)
}

fn wall_uniformity_check() -> Result<Outcome> {
    let mut o = Outcome::default();
    let p = SpectralParam::real(-1.0)?;
    let mut quotients = Vec::new();
    let mut finite = true;
    for h in [0.1, 0.05] {
        let op = assemble_radial(ChamberGrid::new(h, 26.0)?);
        let u = solve_resolvent(&op, p, &gaussian(&op), Reduction::WeylInvariant)?;
        let samples = extract_asymptotics(&op, &u, &p, 10.0, 22.0)?;
        finite &= samples
            .iter()
            .all(|s| s.g.re.is_finite() && s.g.im.is_finite());
        let q = wall_difference_quotients(&op, &u, &p, 18.0, FRAC_PI_3, 0.04, 4)?;
        finite &= q.iter().all(|c| c.re.is_finite() && c.im.is_finite());
        quotients.push(q);
    }
    o.check("finite coefficient", finite);
    let ratios: Vec<f64> = quotients[0]
        .iter()
        .zip(&quotients[1])
        .map(|(a, b)| a.norm() / b.norm())
        .collect();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    o.metric("quotient_ratio_min", lo);
    o.metric("quotient_ratio_max", hi);
    o.check("quotients stable under refinement", lo >= 0.8 && hi <= 1.25);

    // The order is read slowly decaying, so a small kappa and a long window.
    let kappa = 0.3;
    let p = SpectralParam::real(SPECTRUM_BOTTOM - kappa * kappa)?;
    let op = assemble_radial(ChamberGrid::new(0.2, 100.0)?);
    let u = solve_resolvent(&op, p, &gaussian(&op), Reduction::WeylInvariant)?;
    let v = vanishing_order_fit(&op, &u, &p, 0, 40.0, 80.0)?;
    o.metric("vanishing_order", v.order);
    o.metric("vanishing_order_plain", v.plain_order);
    o.check("vanishing order", (v.order - 1.0).abs() <= 0.1);
    Ok(o)
}

fn angular_decay_check(cfg: &VerifyConfig) -> Result<Outcome> {
    let mut o = Outcome::default();
    let (mut violations, mut total) = (0usize, 0usize);
    let mut worst = f64::NEG_INFINITY;
    let mut pair = 0u64;
    for i in 0..10 {
        let theta = (i as f64 + 0.5) / 10.0 * FRAC_PI_2;
        for j in 0..10 {
            let theta0 = j as f64 / 9.0 * PI;
            let r = dissipative_inequality_check(
                theta,
                theta0,
                cfg.samples,
                cfg.seed.wrapping_add(pair),
            )?;
            violations += r.violations;
            total += r.samples;
            worst = worst.max(r.worst_excess);
            pair += 1;
        }
    }
    o.metric("samples", total as f64);
    o.metric("violations", violations as f64);
    o.metric("worst_excess", worst);
    o.check("inequality", violations == 0);

    let g = ProductGrid::new(40.0, 40.0, 399, 200)?;
    let p = SpectralParam::real(-1.0)?;
    for (k, (theta0, theta)) in [
        (FRAC_PI_2, FRAC_PI_3),
        (FRAC_PI_2, FRAC_PI_4),
        (2.0 * FRAC_PI_3, FRAC_PI_2),
    ]
    .into_iter()
    .enumerate()
    {
        let setup = ConeSetup {
            source: (3.0 * PI / 4.0, 11.0 * PI / 12.0),
            source_radii: (2.0, 30.0),
            theta,
            theta0,
            fit_radii: (8.0, 25.0),
        };
        let m = angular_decay_measure(&g, &p, &setup)?;
        o.metric(format!("beta_{k}"), m.beta);
        o.metric(format!("bound_{k}"), m.bound);
        o.check(
            &format!("decay bound at point {k}"),
            m.beta <= m.bound + 0.05 * m.bound.abs(),
        );
    }
    Ok(o)
}

fn random_product_point(rng: &mut ChaCha8Rng) -> ProductPoint {
    ProductPoint::new(
        rng.gen_range(-4.0..4.0),
        rng.gen_range(0.0..6.0),
        rng.gen_range(0.0..2.0 * PI),
    )
}

/// A point at a small random offset, to populate the smoothing region.
fn nearby(rng: &mut ChaCha8Rng, p: &ProductPoint) -> ProductPoint {
    let s = 10f64.powf(rng.gen_range(-3.0..0.5));
    ProductPoint::new(
        p.log_s + s * rng.gen_range(-1.0..1.0),
        (p.d + s * rng.gen_range(-1.0..1.0)).abs(),
        p.theta + s * rng.gen_range(-1.0..1.0),
    )
}

fn smoothed_distance_check(cfg: &VerifyConfig) -> Result<Outcome> {
    let mut o = Outcome::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7);
    let (mut below_one, mut sandwich, mut identity, mut factor) = (0usize, 0usize, 0usize, 0usize);
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..cfg.samples {
        let a = random_product_point(&mut rng);
        let b = if rng.gen::<bool>() {
            nearby(&mut rng, &a)
        } else {
            random_product_point(&mut rng)
        };
        let c = if rng.gen::<bool>() {
            nearby(&mut rng, &b)
        } else {
            random_product_point(&mut rng)
        };
        for (x, y) in [(&a, &b), (&b, &c), (&a, &c)] {
            let d = product_distance(x, y);
            let s = smoothed_distance(x, y);
            below_one += usize::from(s < 1.0);
            sandwich += usize::from(!(d <= s && s <= d + 2.0));
            identity += usize::from(d >= 3.0 && s != d);
        }
        let r = triple_ratio(&a, &b, &c);
        worst_ratio = worst_ratio.max(r);
        factor += usize::from(r > 4.0);
    }
    o.metric("triples", cfg.samples as f64);
    o.metric("violations_at_least_one", below_one as f64);
    o.metric("violations_sandwich", sandwich as f64);
    o.metric("violations_identity", identity as f64);
    o.metric("violations_factor", factor as f64);
    o.metric("worst_triple_ratio", worst_ratio);
    o.check(
        "smoothed distance bounds",
        below_one + sandwich + identity + factor == 0,
    );
    Ok(o)
}

fn chart_sample(chart: ChartId, rng: &mut ChaCha8Rng) -> (f64, f64) {
    match chart {
        ChartId::EigenBlock => (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
        ChartId::MuS => {
            let p = rng.gen_range(0.1..3.0);
            (
                if rng.gen::<bool>() { p } else { -p },
                rng.gen_range(-4.0..-0.1),
            )
        }
        ChartId::MuNu => (rng.gen_range(-4.0..-0.1), rng.gen_range(-4.0..-0.1)),
        ChartId::PolarR => (rng.gen_range(-3.0..3.0), rng.gen_range(-4.0..-0.1)),
    }
}

fn chart_metric_check(cfg: &VerifyConfig) -> Result<Outcome> {
    let mut o = Outcome::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x8);
    for chart in ChartId::ALL {
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let (p, q) = chart_sample(chart, &mut rng);
            let g = chart_metric(chart, p, q)?;
            let fd = killing_pullback_fd(chart, p, q, 1e-4);
            worst = worst.max((fd - g).norm() / g.norm());
        }
        o.metric(format!("relative_error_{}", chart.name()), worst);
        o.check(&format!("{} metric", chart.name()), worst < 1e-5);
    }
    // ds/s = dmu/(2 mu) + dnu/nu carries the face block to the corner block.
    let jac = nalgebra::Matrix2::new(1.0, 0.0, 0.5, 1.0);
    let block = |g: &crate::geometry::Gram5| {
        nalgebra::Matrix2::new(g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)])
    };
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (p, q) = chart_sample(ChartId::MuNu, &mut rng);
        let face = chart_metric(ChartId::MuS, p, 0.5 * p + q)?;
        let corner = chart_metric(ChartId::MuNu, p, q)?;
        worst = worst.max((jac.transpose() * block(&face) * jac - block(&corner)).norm());
    }
    o.metric("substitution_identity", worst);
    o.check("substitution identity", worst < 1e-12);
    Ok(o)
}

fn atlas_check(cfg: &VerifyConfig) -> Result<Outcome> {
    let mut o = Outcome::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9);
    let mut mismatches = 0usize;
    let (mut blowup_trip, mut face_trip): (f64, f64) = (0.0, 0.0);
    for _ in 0..10_000 {
        let (r, alpha) = (rng.gen_range(1e-3..2.0), rng.gen_range(-0.999..0.999));
        let (rp, _) = ralpha_transition(r, alpha);
        mismatches += usize::from(rp != 0.5 * r * (1.0 + alpha) * (3.0 - alpha));
        let mu = 10f64.powf(rng.gen_range(-8.0..-0.05));
        let nu = 10f64.powf(rng.gen_range(-8.0..-0.05));
        let (r, a) = log_blowup(mu, nu)?;
        let (m2, n2) = log_blowup_inverse(r, a)?;
        blowup_trip = blowup_trip
            .max(((m2 - mu) / mu).abs())
            .max(((n2 - nu) / nu).abs());
        let (t, sb) = corner_face_transition(mu, nu);
        let (m3, n3) = face_corner_transition(t, sb);
        face_trip = face_trip
            .max(((m3 - mu) / mu).abs())
            .max(((n3 - nu) / nu).abs());
    }
    o.metric("ralpha_mismatches", mismatches as f64);
    o.check("r' formula", mismatches == 0);
    o.metric("blowup_round_trip", blowup_trip);
    o.metric("face_round_trip", face_trip);
    o.check("round trips", blowup_trip < 1e-10 && face_trip < 1e-10);
    let smooth = smoothness_probe(
        TransitionMap::RAlpha,
        &ApproachPath::geometric([0.0, 0.0], 0, 0.1, 0.5, 20),
    )?;
    let naive = smoothness_probe(
        TransitionMap::NaiveNuToS,
        &ApproachPath::geometric([0.3, 0.0], 1, 0.1, 0.5, 30),
    )?;
    o.metric("ralpha_max_first", smooth.max_first());
    o.metric("ralpha_growth", smooth.growth);
    o.metric("naive_growth", naive.growth);
    o.check(
        "r-alpha probe bounded",
        smooth.max_first() <= 2.0 && smooth.growth <= 1.5,
    );
    o.check("naive probe diverges", naive.growth > 100.0);
    Ok(o)
}

fn permutation_check() -> Result<Outcome> {
    let mut o = Outcome::default();
    let (group, sub) = enumerate_signed_perms();
    let cosets = coset_count(&group, &sub);
    o.metric("group", group.len() as f64);
    o.metric("subgroup", sub.len() as f64);
    o.metric("cosets", cosets as f64);
    o.check("counts", group.len() == 24 && sub.len() == 4 && cosets == 6);
    Ok(o)
}

fn neumann_check() -> Result<Outcome> {
    let mut o = Outcome::default();
    let (h, r_max) = (0.1, 30.0);
    let bump = |z: [f64; 2]| C::new((-(z[0].hypot(z[1]) - 8.0).powi(2) / 4.0).exp(), 0.0);
    let p = SpectralParam::real(-1.0)?;
    let op = assemble_radial(ChamberGrid::new(h, r_max)?);
    let f = op.grid.sample(bump);
    let direct = solve_resolvent(&op, p, &f, Reduction::WeylInvariant)?;
    // Reference from the half-step grid, read on the coarse nodes.
    let reference = {
        let fine = assemble_radial(ChamberGrid::with_radius(h / 2.0, 2 * op.grid.n)?);
        let uf = solve_resolvent(&fine, p, &fine.grid.sample(bump), Reduction::WeylInvariant)?;
        (0..op.len())
            .map(|k| {
                let [i, j] = op.grid.axial(k);
                fine.grid
                    .index(2 * i, 2 * j)
                    .map(|m| uf[m])
                    .ok_or_else(|| Error::Solver("refined grid misses a node".into()))
            })
            .collect::<Result<Vec<C>>>()?
    };
    let err = |u: &[C]| {
        let d: Vec<C> = u.iter().zip(&reference).map(|(a, b)| a - b).collect();
        op.norm(&d) / op.norm(&reference)
    };
    let floor = err(&direct);
    o.metric("discretisation_floor", floor);
    let cp = CompositeParametrix::new(&op, PartitionOfUnity::standard(&op.grid)?, p)?;
    let (iterates, hist) = cp.neumann_iterates(&f, 3)?;
    let mut best = f64::INFINITY;
    for (k, u) in iterates.iter().enumerate() {
        let e = err(u);
        o.metric(format!("error_{k}"), e);
        best = best.min(e);
    }
    for (k, c) in hist.factors.iter().enumerate() {
        o.metric(format!("factor_{k}"), *c);
    }
    o.check("reaches three times the floor", best <= 3.0 * floor);
    o.check("contraction", hist.factors.iter().all(|&c| c < 0.5));
    Ok(o)
}

fn spherical_check() -> Result<Outcome> {
    let mut o = Outcome::default();
    let xi = SpectralVector::along(C::new(-0.4, 1.2), 25f64.to_radians())?;
    let sum = weyl_sum_coeffs(&xi)?;
    o.metric("gallery_residual", sum.gallery_residual);
    o.check("gallery consistency", sum.gallery_residual < 1e-6);

    let grid = ChamberGrid::new(0.05, 30.0)?;
    let op = assemble_radial(grid.clone());
    let w = spherical_on_grid(&sum, &grid);
    let res = op.residual(&w, xi.lambda, &zeros(w.len()));
    let annulus = |k: usize| {
        let rad = grid.radius(k);
        grid.in_positive_chamber(k)
            && (16.0..=24.0).contains(&rad)
            && wall_distance(grid.z(k)) >= 6.0
    };
    let eigen = op.norm_on(&res, annulus) / op.norm_on(&w, annulus);
    o.metric("weyl_sum_residual", eigen);
    o.check("eigen-residual", eigen < 1e-3);

    let built = spherical_via_resolvent(&op, &xi)?;
    let keep = |k: usize| {
        let z = grid.z(k);
        grid.in_positive_chamber(k)
            && (10.0..=22.0).contains(&grid.radius(k))
            && wall_distance(z) >= 4.0
            && built.cutoff.is_one(z)
    };
    let diff: Vec<C> = built.u.iter().zip(&w).map(|(a, b)| a - b).collect();
    let matched = op.norm_on(&diff, keep) / op.norm_on(&w, keep);
    o.metric("resolvent_match", matched);
    o.check("resolvent construction", matched < 1e-2);

    let window = WallWindow {
        along: 8.0,
        half_width: 3.0,
        points: 61,
    };
    let path = wall_uniformity(
        0,
        [C::new(0.3, 0.9), C::new(0.0, 0.0)],
        C::new(0.2, 0.3),
        10,
        &window,
    )?;
    o.metric("pair_spread", path.pair_spread());
    o.metric("single_spread", path.single_spread());
    o.check("matched pair bounded", path.pair_spread() < 2.0);
    o.check("single term diverges", path.single_spread() > 100.0);

    let trivial =
        SpectralVector::new([C::new(0.0, 0.5), C::new(0.0, 0.5 / crate::geometry::SQRT_3)])?;
    let small = ChamberGrid::new(0.2, 6.0)?;
    let one = spherical_on_grid(&weyl_sum_coeffs(&trivial)?, &small);
    let small_op = assemble_radial(small);
    let r = small_op.residual(&one, trivial.lambda, &zeros(one.len()));
    let constant = r
        .iter()
        .map(|v| v.norm())
        .chain(one.iter().map(|v| (v - 1.0).norm()))
        .fold(0.0, f64::max);
    o.metric("zero_eigenvalue_residual", constant);
    o.check("zero eigenvalue", constant < 1e-10);
    Ok(o)
}
