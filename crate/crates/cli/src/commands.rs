//! One function per subcommand. Each computes everything first and returns
//! the files to write, so a failure leaves nothing behind.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use serde::Serialize;
use serde_json::json;
use sl3scatter::atlas::{
    bdf_of_point, face_blowup, log_blowup, smoothness_probe, ApproachPath, TransitionMap,
};
use sl3scatter::flat::asymptotics::{bisector_decay_fit, extract_asymptotics, wall_distance};
use sl3scatter::flat::grid::ChamberGrid;
use sl3scatter::flat::operator::assemble_radial;
use sl3scatter::flat::solve::{solve_resolvent, Reduction};
use sl3scatter::flat::spectral::SpectralParam;
use sl3scatter::geometry::{FlatVector, PointM};
use sl3scatter::parametrix::{CompositeParametrix, PartitionOfUnity};
use sl3scatter::product::model::{product_resolvent, relative_l2, ProductGrid, ProductMethod};
use sl3scatter::report::Table;
use sl3scatter::spherical::{spherical_on_grid, weyl_sum_coeffs, SpectralVector};
use sl3scatter::verify::{self, CriterionReport, VerifyConfig};

use crate::config::{complex, Config};

pub enum Failure {
    Config(String),
    Numerical(String),
}

impl From<sl3scatter::Error> for Failure {
    fn from(e: sl3scatter::Error) -> Self {
        Failure::Numerical(e.to_string())
    }
}

/// Files to write, by name, and whether every check passed.
pub struct Output {
    pub files: Vec<(String, String)>,
    pub pass: bool,
}

impl Output {
    fn ok(files: Vec<(String, String)>) -> Self {
        Self { files, pass: true }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialise") + "\n"
}

/// Flat coordinates and the boundary coordinates of a point in the closed
/// positive chamber; undefined entries are NaN.
fn chart_row(z: [f64; 2]) -> Vec<f64> {
    let flat = FlatVector::from_z(z);
    let mut row = vec![z[0], z[1], flat.w[0], flat.w[1], flat.w[2]];
    let nan2 = (f64::NAN, f64::NAN);
    match bdf_of_point(&PointM::from_flat(&flat)) {
        Ok(b) => {
            let (r, a) = log_blowup(b.mu, b.nu).unwrap_or(nan2);
            let (rf, af) = face_blowup(b.mu, b.nu).unwrap_or(nan2);
            row.extend([b.mu, b.nu, b.s, b.x, b.x1, b.x2, r, a, rf, af]);
        }
        Err(_) => row.extend([f64::NAN; 10]),
    }
    row
}

const CHART_HEADER: [&str; 15] = [
    "z1",
    "z2",
    "w1",
    "w2",
    "w3",
    "mu",
    "nu",
    "s",
    "x",
    "x1",
    "x2",
    "r",
    "alpha",
    "r_face",
    "alpha_face",
];

fn chart_table(extra: &[&str]) -> Table {
    Table::new(CHART_HEADER.iter().chain(extra).copied())
}

pub fn geom(cfg: &Config) -> Result<Output, Failure> {
    let grid = ChamberGrid::new(cfg.geom.h, cfg.geom.r_max)?;
    let mut t = chart_table(&["wall_distance"]);
    for k in (0..grid.len()).filter(|&k| grid.in_positive_chamber(k)) {
        let z = grid.z(k);
        let mut row = chart_row(z);
        row.push(wall_distance(z));
        t.push(&row);
    }
    Ok(Output::ok(vec![("geom.csv".into(), t.to_csv())]))
}

pub fn atlas_check(cfg: &Config) -> Result<Output, Failure> {
    let vc = VerifyConfig {
        seed: cfg.atlas.seed,
        ..VerifyConfig::default()
    };
    let reports: Vec<CriterionReport> = [8, 9, 10].iter().map(|&id| verify::run(id, &vc)).collect();
    let mut probes = Table::new(["map", "scale", "p1", "p2", "first", "second"]);
    let cases = [
        (
            "r-alpha",
            TransitionMap::RAlpha,
            ApproachPath::geometric([0.0, 0.0], 0, 0.1, 0.5, 20),
        ),
        (
            "r-alpha-composite",
            TransitionMap::RAlphaComposite,
            ApproachPath::geometric([0.0, 0.0], 0, 0.1, 0.5, 20),
        ),
        (
            "naive-nu-s",
            TransitionMap::NaiveNuToS,
            ApproachPath::geometric([0.3, 0.0], 1, 0.1, 0.5, 30),
        ),
    ];
    for (name, map, path) in cases {
        for r in smoothness_probe(map, &path)?.rows {
            let mut cells = vec![name.to_string()];
            cells.extend(
                [r.scale, r.point[0], r.point[1], r.first, r.second]
                    .map(sl3scatter::report::fmt_g17),
            );
            probes.push_cells(cells);
        }
    }
    let pass = reports.iter().all(|r| r.pass);
    for r in &reports {
        eprintln!("{}", r.line());
    }
    Ok(Output {
        files: vec![
            (
                "atlas_check.json".into(),
                to_json(&json!({ "pass": pass, "criteria": reports })),
            ),
            ("probes.csv".into(), probes.to_csv()),
        ],
        pass,
    })
}

pub fn solve(cfg: &Config) -> Result<Output, Failure> {
    let s = &cfg.solve;
    let param = SpectralParam::new(complex(s.lambda))?;
    let op = assemble_radial(ChamberGrid::new(s.h, s.r_max)?);
    let w2 = s.source_width * s.source_width;
    let f = op
        .grid
        .sample(|z| C::new((-(z[0] * z[0] + z[1] * z[1]) / w2).exp(), 0.0));
    let u = solve_resolvent(&op, param, &f, Reduction::WeylInvariant)?;
    let fit = bisector_decay_fit(&op, &u, s.decay_window[0], s.decay_window[1])?;
    let samples = extract_asymptotics(&op, &u, &param, s.shell[0], s.shell[1])?;

    let mut sol = chart_table(&["re", "im"]);
    for k in (0..op.len()).filter(|&k| op.grid.in_positive_chamber(k)) {
        let mut row = chart_row(op.grid.z(k));
        row.extend([u[k].re, u[k].im]);
        sol.push(&row);
    }
    let mut front = Table::new(["r", "theta", "g_re", "g_im", "g_reduced_re", "g_reduced_im"]);
    for x in samples.iter().filter(|x| x.theta <= PI / 3.0 + 1e-12) {
        front.push(&[x.r, x.theta, x.g.re, x.g.im, x.g_reduced.re, x.g_reduced.im]);
    }
    let summary = json!({
        "lambda": param.lambda,
        "kappa": param.kappa(),
        "nodes": op.len(),
        "decay_rate": -fit.slope,
        "decay_fit_rms": fit.rms,
    });
    Ok(Output::ok(vec![
        ("solution.csv".into(), sol.to_csv()),
        ("front_face.csv".into(), front.to_csv()),
        ("solve.json".into(), to_json(&summary)),
    ]))
}

pub fn product(cfg: &Config) -> Result<Output, Failure> {
    let p = &cfg.product;
    let param = SpectralParam::new(complex(p.lambda))?;
    let grid = ProductGrid::new(p.a_max, p.b_max, p.na, p.nb)?;
    let [a0, b0] = p.bump_centre;
    let w = p.bump_width;
    let f = grid.sample(|a, b| {
        let r2 = ((a - a0).powi(2) + (b - b0).powi(2)) / (w * w);
        C::new(
            if r2 < 1.0 {
                (-1.0 / (1.0 - r2)).exp()
            } else {
                0.0
            },
            0.0,
        )
    });
    let contour = product_resolvent(&grid, &param, &f, ProductMethod::Contour)?;
    let direct = product_resolvent(&grid, &param, &f, ProductMethod::Direct)?;
    let mut t = Table::new([
        "a",
        "b",
        "contour_re",
        "contour_im",
        "direct_re",
        "direct_im",
    ]);
    for k in 0..grid.len() {
        let (a, b) = grid.point(k);
        t.push(&[
            a,
            b,
            contour[k].re,
            contour[k].im,
            direct[k].re,
            direct[k].im,
        ]);
    }
    let summary = json!({
        "lambda": param.lambda,
        "nodes": grid.len(),
        "relative_l2": relative_l2(&grid, &contour, &direct),
    });
    Ok(Output::ok(vec![
        ("product.csv".into(), t.to_csv()),
        ("product.json".into(), to_json(&summary)),
    ]))
}

pub fn parametrix(cfg: &Config) -> Result<Output, Failure> {
    let p = &cfg.parametrix;
    let param = SpectralParam::new(complex(p.lambda))?;
    let op = assemble_radial(ChamberGrid::new(p.h, p.r_max)?);
    let w2 = p.source_width * p.source_width;
    let f = op.grid.sample(|z| {
        C::new(
            (-(z[0].hypot(z[1]) - p.source_radius).powi(2) / w2).exp(),
            0.0,
        )
    });
    let cp = CompositeParametrix::new(&op, PartitionOfUnity::standard(&op.grid)?, param)?;
    let norms = cp.norms(&cp.error_terms(&f)?);
    let (_, hist) = cp.neumann_correct(&f, p.iterations)?;
    let mut t = Table::new(["step", "residual", "factor"]);
    for (k, (r, c)) in hist.residuals.iter().zip(&hist.factors).enumerate() {
        t.push(&[k as f64, *r, *c]);
    }
    let summary = json!({
        "lambda": param.lambda,
        "source_norm": op.norm(&f),
        "error_terms": norms,
        "history": hist,
    });
    Ok(Output::ok(vec![
        ("neumann.csv".into(), t.to_csv()),
        ("parametrix.json".into(), to_json(&summary)),
    ]))
}

pub fn spherical(cfg: &Config) -> Result<Output, Failure> {
    let s = &cfg.spherical;
    let xi = SpectralVector::along(complex(s.k), s.angle_deg.to_radians())?;
    let sum = weyl_sum_coeffs(&xi)?;
    let grid = ChamberGrid::new(s.h, s.r_max)?;
    let u = spherical_on_grid(&sum, &grid);
    let op = assemble_radial(grid.clone());
    let res = op.residual(&u, xi.lambda, &vec![C::new(0.0, 0.0); u.len()]);
    let mut extra = vec![
        "re".to_string(),
        "im".to_string(),
        "residual_abs".to_string(),
    ];
    for m in 0..6 {
        extra.push(format!("term{m}_re"));
        extra.push(format!("term{m}_im"));
    }
    let extra_refs: Vec<&str> = extra.iter().map(String::as_str).collect();
    let mut t = chart_table(&extra_refs);
    for k in (0..grid.len()).filter(|&k| grid.in_positive_chamber(k)) {
        let z = grid.z(k);
        let mut row = chart_row(z);
        row.extend([
            u[k].re,
            u[k].im,
            if grid.is_boundary(k) {
                f64::NAN
            } else {
                res[k].norm()
            },
        ]);
        for term in sum.terms(z) {
            row.extend([term.re, term.im]);
        }
        t.push(&row);
    }
    let summary = json!({
        "xi": xi.xi,
        "lambda": xi.lambda,
        "kappa": xi.kappa(),
        "coefficients": sum.coeffs,
        "frequencies": sum.frequencies,
        "gallery_residual": sum.gallery_residual,
    });
    Ok(Output::ok(vec![
        ("spherical.csv".into(), t.to_csv()),
        ("spherical.json".into(), to_json(&summary)),
    ]))
}

pub fn verify(cfg: &Config) -> Result<Output, Failure> {
    let v = &cfg.verify;
    let ids = verify::suite(&v.suite)
        .ok_or_else(|| Failure::Config(format!("unknown suite {:?}", v.suite)))?;
    let vc = VerifyConfig {
        seed: v.seed,
        samples: v.samples,
    };
    let mut reports = Vec::new();
    for id in ids {
        let r = verify::run(id, &vc);
        eprintln!("{}", r.line());
        reports.push(r);
    }
    let pass = reports.iter().all(|r| r.pass);
    let summary = json!({
        "suite": v.suite,
        "seed": v.seed,
        "pass": pass,
        "criteria": reports,
    });
    Ok(Output {
        files: vec![("verify.json".into(), to_json(&summary))],
        pass,
    })
}
