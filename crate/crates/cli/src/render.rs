use std::fmt::Write as _;

use fockline::analytics::AnalyticReport;
use fockline::scheme::{HeraldOutcome, SchemeReport};
use serde::Serialize;

pub const CSV_COLUMNS: [&str; 10] = [
    "epsilon",
    "eta",
    "p_coincidence",
    "fidelity",
    "bound_1m4e2",
    "bound_eta",
    "p1",
    "p2",
    "p3",
    "p_im",
];

/// One sweep point. Bounds are the unclamped formula values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub epsilon: f64,
    pub eta: f64,
    pub p_coincidence: f64,
    pub fidelity: Option<f64>,
    pub bound_1m4e2: f64,
    pub bound_eta: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p_im: f64,
}

impl Row {
    fn new(
        epsilon: f64,
        eta: f64,
        p_coincidence: f64,
        fidelity: Option<f64>,
        a: &AnalyticReport,
    ) -> Self {
        Row {
            epsilon,
            eta,
            p_coincidence,
            fidelity,
            bound_1m4e2: a.fidelity_lower_bound_raw,
            bound_eta: a.fidelity_lower_bound_eta_raw,
            p1: a.p1,
            p2: a.p2,
            p3: a.p3,
            p_im: a.p_im,
        }
    }

    pub fn from_report(r: &SchemeReport) -> Self {
        Row::new(
            r.config.epsilon.re,
            r.config.eta,
            r.p_coincidence,
            r.fidelity,
            &r.analytics,
        )
    }

    pub fn from_herald(epsilon: f64, eta: f64, h: &HeraldOutcome, a: &AnalyticReport) -> Self {
        Row::new(epsilon, eta, h.p_coincidence, h.fidelity, a)
    }

    fn cells(&self) -> [Option<f64>; 10] {
        [
            Some(self.epsilon),
            Some(self.eta),
            Some(self.p_coincidence),
            self.fidelity,
            Some(self.bound_1m4e2),
            Some(self.bound_eta),
            Some(self.p1),
            Some(self.p2),
            Some(self.p3),
            Some(self.p_im),
        ]
    }
}

/// 17 significant digits; undefined values are empty cells.
pub fn csv_number(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

pub fn short(x: Option<f64>) -> String {
    match x {
        Some(v) if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e4) => format!("{v:.6e}"),
        Some(v) => format!("{v:.9}"),
        None => "undefined".into(),
    }
}

pub fn csv(header: &str, rows: &[Row]) -> String {
    let mut out = format!("# {header}\n{}\n", CSV_COLUMNS.join(","));
    for r in rows {
        let cells: Vec<String> = r.cells().into_iter().map(csv_number).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        let s: Vec<String> = cells
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        s.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(&mut headers.iter().copied());
    out.push_str(&line(
        &mut widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .iter()
            .map(String::as_str),
    ));
    for r in rows {
        out.push_str(&line(&mut r.iter().map(String::as_str)));
    }
    out
}

pub fn sweep_table(header: &str, rows: &[Row]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| r.cells().into_iter().map(short).collect())
        .collect();
    format!("# {header}\n{}", table(&CSV_COLUMNS, &body))
}

pub fn report_table(header: &str, r: &SchemeReport) -> String {
    let mut out = format!("# {header}\n");
    let fields = [
        ("epsilon", Some(r.config.epsilon.re)),
        ("epsilon_im", Some(r.config.epsilon.im)),
        ("eta", Some(r.config.eta)),
        ("p_coincidence", Some(r.p_coincidence)),
        ("fidelity", r.fidelity),
        ("purity", r.purity),
        ("bound 1-4|e|^2", Some(r.analytics.fidelity_lower_bound_raw)),
        ("bound exact", Some(r.analytics.fidelity_lower_bound_exact)),
        (
            "bound 1-4|e|^2/eta^2",
            Some(r.analytics.fidelity_lower_bound_eta_raw),
        ),
        ("eta^2 |e|^4", Some(r.analytics.approx_coincidence)),
        ("rate ratio", r.rate_ratio),
    ];
    let _ = writeln!(out, "{:<22}{}", "coincidence", r.config.mode);
    for (k, v) in fields {
        let _ = writeln!(out, "{k:<22}{}", short(v));
    }
    out.push('\n');
    let rows: Vec<Vec<String>> = r
        .patterns
        .iter()
        .map(|p| {
            vec![
                p.pattern.clone(),
                short(Some(p.probability)),
                short(p.fidelity),
            ]
        })
        .collect();
    out.push_str(&table(&["pattern", "probability", "fidelity"], &rows));
    out
}

pub fn components_table(header: &str, r: &SchemeReport) -> String {
    let mut out = format!("# {header}\n");
    let rows: Vec<Vec<String>> = r
        .components
        .iter()
        .map(|c| {
            vec![
                c.label.name().to_string(),
                c.order
                    .map(|o| o.to_string())
                    .unwrap_or_else(|| ">2".into()),
                short(Some(c.prior)),
                short(Some(c.coincidence_given_component)),
                short(Some(c.contribution)),
                if c.excluded { "excluded" } else { "heralds" }.to_string(),
            ]
        })
        .collect();
    out.push_str(&table(
        &[
            "component",
            "order",
            "prior",
            "p(coinc|comp)",
            "contribution",
            "verdict",
        ],
        &rows,
    ));
    let a = &r.analytics;
    let _ = write!(
        out,
        "\nP1 {}  P2 {}  P3 {}  P_im {}\n",
        short(Some(a.p1)),
        short(Some(a.p2)),
        short(Some(a.p3)),
        short(Some(a.p_im))
    );
    out
}
