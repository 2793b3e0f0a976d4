//! Report documents and their deterministic rendering.
//!
//! The JSON layout is fixed: key order follows the struct declarations
//! below, element modes appear in lexicographic order (the canonical
//! element storage already sorts them), and every float is written with 17
//! significant digits in scientific notation, enough to reproduce the exact
//! bit pattern on re-parse. Identical inputs therefore serialize to
//! identical bytes.

use ncg_core::algebra::AlgebraElement;
use ncg_core::connection::Connection;
use ncg_core::curvature::RicciTensor;
use serde::{Deserialize, Serialize};

/// One Fourier mode of an algebra element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub mode: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

/// JSON form of an algebra element: `{"terms":[{"mode":[..],"re":..,"im":..}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementJson {
    pub terms: Vec<TermJson>,
}

/// One Christoffel coefficient Γ^i_{jk}, indices 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaEntryJson {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub value: ElementJson,
}

/// One Ricci component Ric(e_j ⊗ e_l), indices 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RicciEntryJson {
    pub j: usize,
    pub l: usize,
    pub value: ElementJson,
}

/// Echo of the resolved request, defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestEcho {
    pub command: String,
    pub preset: String,
    pub theta: f64,
    pub k: String,
    pub convention: String,
    pub method: String,
    pub window: i64,
    pub neumann_eps: f64,
}

/// The residuals certified alongside a result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualsJson {
    pub torsion: f64,
    pub compatibility: f64,
    pub inversion_tail: f64,
}

/// The full machine-readable output of a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub request: RequestEcho,
    pub gamma: Vec<GammaEntryJson>,
    pub ricci: Vec<RicciEntryJson>,
    pub scal: ElementJson,
    pub residuals: ResidualsJson,
    pub backends: Vec<String>,
    pub max_backend_delta: f64,
}

/// Converts an element to its JSON form; modes come out lexicographically
/// sorted because the canonical storage iterates in that order.
pub fn element_to_json(a: &AlgebraElement) -> ElementJson {
    ElementJson {
        terms: a
            .terms()
            .map(|(m, c)| TermJson {
                mode: m.0.clone(),
                re: c.re,
                im: c.im,
            })
            .collect(),
    }
}

/// All Γ^i_{jk} of a connection, (i, j, k) lexicographic, 1-based.
pub fn gamma_entries(c: &Connection) -> Vec<GammaEntryJson> {
    let r = c.rank();
    let mut out = Vec::with_capacity(r * r * r);
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                out.push(GammaEntryJson {
                    i: i + 1,
                    j: j + 1,
                    k: k + 1,
                    value: element_to_json(c.gamma(i, j, k)),
                });
            }
        }
    }
    out
}

/// All Ricci components, (j, l) lexicographic, 1-based.
pub fn ricci_entries(ric: &RicciTensor) -> Vec<RicciEntryJson> {
    let r = ric.rank();
    let mut out = Vec::with_capacity(r * r);
    for j in 0..r {
        for l in 0..r {
            out.push(RicciEntryJson {
                j: j + 1,
                l: l + 1,
                value: element_to_json(ric.get(j, l)),
            });
        }
    }
    out
}

struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes any document with the canonical byte-deterministic layout.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value
        .serialize(&mut ser)
        .expect("report structs serialize without IO");
    String::from_utf8(buf).expect("serializer emits UTF-8")
}

fn element_text(e: &ElementJson) -> String {
    if e.terms.is_empty() {
        return "0".to_string();
    }
    e.terms
        .iter()
        .map(|t| {
            let modes = t
                .mode
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(",");
            format!("({:.16e}, {:.16e})·W[{modes}]", t.re, t.im)
        })
        .collect::<Vec<_>>()
        .join("  +  ")
}

/// Renders the fixed-layout text table: request echo, backends, residuals,
/// then Γ^i_{jk} in lexicographic index order, Ric, and Scal.
pub fn render_table(doc: &ReportDocument) -> String {
    let mut out = String::new();
    let mut line = |key: &str, val: String| {
        out.push_str(&format!("{key:<16}{val}\n"));
    };
    line("command", doc.request.command.clone());
    line("preset", doc.request.preset.clone());
    line("theta", format!("{:.16e}", doc.request.theta));
    line("k", doc.request.k.clone());
    line("convention", doc.request.convention.clone());
    line("method", doc.request.method.clone());
    line("window", doc.request.window.to_string());
    line("neumann-eps", format!("{:.16e}", doc.request.neumann_eps));
    line("backends", doc.backends.join(", "));
    line("backend-delta", format!("{:.16e}", doc.max_backend_delta));
    line("torsion", format!("{:.16e}", doc.residuals.torsion));
    line(
        "compatibility",
        format!("{:.16e}", doc.residuals.compatibility),
    );
    line(
        "inversion-tail",
        format!("{:.16e}", doc.residuals.inversion_tail),
    );
    for g in &doc.gamma {
        line(
            &format!("Gamma^{}_{{{},{}}}", g.i, g.j, g.k),
            element_text(&g.value),
        );
    }
    for r in &doc.ricci {
        line(&format!("Ric[{},{}]", r.j, r.l), element_text(&r.value));
    }
    line("Scal", element_text(&doc.scal));
    out
}
