//! Critical-difference diagram data and SVG rendering.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Correction, PairResult, StatsError};

/// Success count of one method at the compared stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub name: String,
    pub successes: usize,
    pub total: usize,
}

impl MethodSummary {
    /// Success rate in percent (0 when `total` is 0).
    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.successes as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedMethod {
    pub name: String,
    /// 1 is best.
    pub rank: usize,
    pub successes: usize,
    pub total: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdDiagram {
    pub alpha: f64,
    pub correction: Correction,
    /// Per-comparison significance threshold after correction.
    pub threshold: f64,
    /// Best first; ties broken by name.
    pub methods: Vec<RankedMethod>,
    /// Pairs not significantly different, each in rank order.
    pub edges: Vec<(String, String)>,
    /// Maximal cliques of the equivalence graph, members in rank order.
    /// Methods equivalent to no other get a singleton bar.
    pub bars: Vec<Vec<String>>,
}

/// Ranks methods by success rate, links pairs whose corrected test is not
/// significant, and covers the resulting graph with its maximal cliques.
pub fn cd_diagram(
    summaries: &[MethodSummary],
    pairs: &[PairResult],
    alpha: f64,
    correction: Correction,
) -> Result<CdDiagram, StatsError> {
    let mut order: Vec<&MethodSummary> = summaries.iter().collect();
    order.sort_by(|x, y| y.rate().total_cmp(&x.rate()).then_with(|| x.name.cmp(&y.name)));
    let names: Vec<&str> = order.iter().map(|m| m.name.as_str()).collect();
    if names.iter().collect::<BTreeSet<_>>().len() != names.len() {
        return Err(StatsError::Input("duplicate method name".into()));
    }
    let n = names.len();
    let k = n * n.saturating_sub(1) / 2;
    let threshold = correction.threshold(alpha, k);

    let mut adj = vec![vec![false; n]; n];
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let pr = pairs
                .iter()
                .find(|p| {
                    (p.first == names[i] && p.second == names[j]) || (p.first == names[j] && p.second == names[i])
                })
                .ok_or_else(|| StatsError::MissingPair(names[i].into(), names[j].into()))?;
            if !pr.result.significant(threshold) {
                adj[i][j] = true;
                adj[j][i] = true;
                edges.push((names[i].to_string(), names[j].to_string()));
            }
        }
    }

    let mut cliques = Vec::new();
    bron_kerbosch(&adj, Vec::new(), (0..n).collect(), Vec::new(), &mut cliques);
    for c in &mut cliques {
        c.sort_unstable();
    }
    cliques.sort_by(|x, y| x[0].cmp(&y[0]).then(y.len().cmp(&x.len())).then_with(|| x.cmp(y)));

    Ok(CdDiagram {
        alpha,
        correction,
        threshold,
        methods: order
            .iter()
            .enumerate()
            .map(|(i, m)| RankedMethod {
                name: m.name.clone(),
                rank: i + 1,
                successes: m.successes,
                total: m.total,
                rate: m.rate(),
            })
            .collect(),
        edges,
        bars: cliques
            .into_iter()
            .map(|c| c.into_iter().map(|i| names[i].to_string()).collect())
            .collect(),
    })
}

/// Bron–Kerbosch with pivoting; pushes every maximal clique of `adj`.
fn bron_kerbosch(adj: &[Vec<bool>], r: Vec<usize>, mut p: Vec<usize>, mut x: Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if p.is_empty() && x.is_empty() {
        out.push(r);
        return;
    }
    let pivot = p
        .iter()
        .chain(&x)
        .copied()
        .max_by_key(|&u| p.iter().filter(|&&v| adj[u][v]).count())
        .expect("p or x nonempty");
    let candidates: Vec<usize> = p.iter().copied().filter(|&v| !adj[pivot][v]).collect();
    for v in candidates {
        let mut r2 = r.clone();
        r2.push(v);
        let p2 = p.iter().copied().filter(|&u| adj[v][u]).collect();
        let x2 = x.iter().copied().filter(|&u| adj[v][u]).collect();
        bron_kerbosch(adj, r2, p2, x2, out);
        p.retain(|&u| u != v);
        x.push(v);
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders the diagram: an axis of success rates with one marker per method
/// and one horizontal bar per clique. Each bar carries its members in a
/// `data-members` attribute (joined by `|`).
pub fn render_cd_svg(cd: &CdDiagram) -> String {
    const WIDTH: f64 = 640.0;
    const LEFT: f64 = 60.0;
    const RIGHT: f64 = 580.0;
    const AXIS_Y: f64 = 50.0;
    const BAR_Y0: f64 = 68.0;
    const BAR_STEP: f64 = 10.0;
    const LABEL_STEP: f64 = 22.0;

    let (mut lo, mut hi) = cd.methods.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), m| {
        (l.min(m.rate), h.max(m.rate))
    });
    if !lo.is_finite() {
        (lo, hi) = (0.0, 100.0);
    }
    lo = (lo / 5.0).floor() * 5.0;
    hi = (hi / 5.0).ceil() * 5.0;
    if hi <= lo {
        hi = lo + 5.0;
    }
    // higher rates to the left, like rank 1 on a classic diagram
    let xpos = |rate: f64| RIGHT - (rate - lo) / (hi - lo) * (RIGHT - LEFT);
    let labels_y0 = BAR_Y0 + BAR_STEP * cd.bars.len() as f64 + 20.0;
    let height = labels_y0 + LABEL_STEP * cd.methods.len() as f64 + 10.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{LEFT}" y="18">success rate (%), alpha = {}, threshold = {:.6}</text>"#,
        cd.alpha, cd.threshold
    );
    let _ = writeln!(
        s,
        r#"<line class="axis" x1="{LEFT}" y1="{AXIS_Y}" x2="{RIGHT}" y2="{AXIS_Y}" stroke="black"/>"#
    );
    let mut t = lo;
    while t <= hi + 1e-9 {
        let x = xpos(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.1}" y1="{AXIS_Y}" x2="{x:.1}" y2="{:.1}" stroke="black"/>"#,
            AXIS_Y - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{t:.0}</text>"#,
            AXIS_Y - 8.0
        );
        t += 5.0;
    }
    for (j, bar) in cd.bars.iter().enumerate() {
        let rates: Vec<f64> = bar
            .iter()
            .filter_map(|n| cd.methods.iter().find(|m| &m.name == n).map(|m| m.rate))
            .collect();
        let (x1, x2) = rates.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| {
            (a.min(xpos(r)), b.max(xpos(r)))
        });
        let y = BAR_Y0 + BAR_STEP * j as f64;
        let members = bar.iter().map(|n| xml_escape(n)).collect::<Vec<_>>().join("|");
        let _ = writeln!(
            s,
            r#"<line class="bar" data-members="{members}" x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="black" stroke-width="4" stroke-linecap="round"/>"#,
            x1 - 3.0,
            x2 + 3.0
        );
    }
    for (i, m) in cd.methods.iter().enumerate() {
        let x = xpos(m.rate);
        let y = labels_y0 + LABEL_STEP * i as f64;
        let _ = writeln!(
            s,
            r#"<polyline class="method" fill="none" stroke="gray" points="{x:.1},{AXIS_Y} {x:.1},{y:.1} {:.1},{y:.1}"/>"#,
            WIDTH - 10.0 - 150.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}">{} ({:.1})</text>"#,
            WIDTH - 155.0,
            y + 4.0,
            xml_escape(&m.name),
            m.rate
        );
    }
    s.push_str("</svg>\n");
    s
}
