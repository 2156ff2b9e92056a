//! Plain-text serialization: CSV rows, the flat key-value parameter form,
//! and the matching readers. All floating-point values are written with 17
//! significant digits so parsing recovers them exactly; CSV uses a header
//! row, comma separators, LF line endings, and UTF-8 throughout.

use crate::classification::{Classification, EigenData, Evidence, Kind};
use crate::equilibria::{Branch, Equilibrium, Label, Thresholds};
use crate::model::{ModelParams, State};
use crate::{Error, Result};

/// 17-significant-digit decimal form; round-trips through `f64::from_str`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::domain(format!("invalid number {s:?}")))
}

impl ModelParams {
    /// Flat key-value form `q=...,h=...,s=...,m=...`.
    pub fn to_kv(&self) -> String {
        format!(
            "q={},h={},s={},m={}",
            fmt_f64(self.q),
            fmt_f64(self.h),
            fmt_f64(self.s),
            fmt_f64(self.m)
        )
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let (mut q, mut h, mut s, mut m) = (None, None, None, None);
        for item in text.trim().split(',') {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::domain(format!("expected key=value, got {item:?}")))?;
            let v = parse_f64(value)?;
            match key.trim() {
                "q" => q = Some(v),
                "h" => h = Some(v),
                "s" => s = Some(v),
                "m" => m = Some(v),
                other => return Err(Error::domain(format!("unknown key {other:?}"))),
            }
        }
        match (q, h, s, m) {
            (Some(q), Some(h), Some(s), Some(m)) => ModelParams::new(q, h, s, m),
            _ => Err(Error::domain("missing one of q, h, s, m")),
        }
    }
}

pub const EQUILIBRIA_HEADER: &str = "label,branch,x,y,multiplicity";

fn labels_field(labels: &[Label]) -> String {
    labels
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join("+")
}

fn parse_labels(field: &str) -> Result<Vec<Label>> {
    field
        .split('+')
        .map(|s| s.parse::<Label>().map_err(Error::Domain))
        .collect()
}

/// CSV rows `label,branch,x,y,multiplicity`; merged points join their
/// labels with `+`.
pub fn equilibria_to_csv(eqs: &[Equilibrium]) -> String {
    let mut out = String::from(EQUILIBRIA_HEADER);
    out.push('\n');
    for e in eqs {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            labels_field(&e.labels),
            e.branch,
            fmt_f64(e.x()),
            fmt_f64(e.y()),
            e.multiplicity
        ));
    }
    out
}

pub fn equilibria_from_csv(text: &str) -> Result<Vec<Equilibrium>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == EQUILIBRIA_HEADER => {}
        _ => return Err(Error::domain("missing equilibria header")),
    }
    let mut out = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(Error::domain(format!("expected 5 columns, got {line:?}")));
        }
        out.push(Equilibrium {
            labels: parse_labels(cols[0])?,
            branch: cols[1].parse::<Branch>().map_err(Error::Domain)?,
            point: State::new(parse_f64(cols[2])?, parse_f64(cols[3])?),
            multiplicity: cols[4]
                .parse::<u8>()
                .map_err(|_| Error::domain("invalid multiplicity"))?,
        });
    }
    Ok(out)
}

pub const CLASSIFICATION_HEADER: &str =
    "label,kind,trace,det,lambda1_re,lambda1_im,lambda2_re,lambda2_im,evidence";

fn evidence_field(c: &Classification) -> String {
    match (&c.kind, &c.evidence) {
        (Kind::Degenerate(reason), _) => format!("reason:{}", reason.replace(',', ";")),
        (_, Some(Evidence::SaddleNode { c20 })) => format!("c20={}", fmt_f64(*c20)),
        (_, Some(Evidence::Cusp { g20, g11 })) => {
            format!("g20={};g11={}", fmt_f64(*g20), fmt_f64(*g11))
        }
        _ => String::new(),
    }
}

fn parse_evidence(kind_code: &str, field: &str) -> Result<(Kind, Option<Evidence>)> {
    let reason = field.strip_prefix("reason:").unwrap_or("");
    let kind = Kind::from_code(kind_code, reason).map_err(Error::Domain)?;
    let evidence = if let Some(v) = field.strip_prefix("c20=") {
        Some(Evidence::SaddleNode { c20: parse_f64(v)? })
    } else if let Some(rest) = field.strip_prefix("g20=") {
        let (g20, g11) = rest
            .split_once(";g11=")
            .ok_or_else(|| Error::domain("malformed cusp evidence"))?;
        Some(Evidence::Cusp {
            g20: parse_f64(g20)?,
            g11: parse_f64(g11)?,
        })
    } else {
        None
    };
    Ok((kind, evidence))
}

/// CSV rows pairing each equilibrium label with its classification.
pub fn classifications_to_csv(rows: &[(Equilibrium, Classification)]) -> String {
    let mut out = String::from(CLASSIFICATION_HEADER);
    out.push('\n');
    for (e, c) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            labels_field(&e.labels),
            c.kind.code(),
            fmt_f64(c.eigen.trace),
            fmt_f64(c.eigen.det),
            fmt_f64(c.eigen.lambda1_re),
            fmt_f64(c.eigen.lambda1_im),
            fmt_f64(c.eigen.lambda2_re),
            fmt_f64(c.eigen.lambda2_im),
            evidence_field(c),
        ));
    }
    out
}

/// Reads back the label list and classification columns emitted by
/// [`classifications_to_csv`]. The discriminant is reconstructed from the
/// trace and determinant; the borderline flag is not serialized.
pub fn classifications_from_csv(text: &str) -> Result<Vec<(Vec<Label>, Classification)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CLASSIFICATION_HEADER => {}
        _ => return Err(Error::domain("missing classification header")),
    }
    let mut out = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 9 {
            return Err(Error::domain(format!("expected 9 columns, got {line:?}")));
        }
        let labels = parse_labels(cols[0])?;
        let (kind, evidence) = parse_evidence(cols[1], cols[8])?;
        let trace = parse_f64(cols[2])?;
        let det = parse_f64(cols[3])?;
        out.push((
            labels,
            Classification {
                kind,
                eigen: EigenData {
                    trace,
                    det,
                    disc: trace * trace - 4.0 * det,
                    lambda1_re: parse_f64(cols[4])?,
                    lambda1_im: parse_f64(cols[5])?,
                    lambda2_re: parse_f64(cols[6])?,
                    lambda2_im: parse_f64(cols[7])?,
                },
                evidence,
                borderline: false,
            },
        ));
    }
    Ok(out)
}

pub const EQ_CLASS_HEADER: &str = "label,branch,x,y,multiplicity,kind,trace,det,lambda1_re,lambda1_im,lambda2_re,lambda2_im,evidence";

/// Joined rows pairing each equilibrium with its classification, the
/// format emitted by the `equilibria` command.
pub fn eq_class_to_csv(rows: &[(Equilibrium, Classification)]) -> String {
    let mut out = String::from(EQ_CLASS_HEADER);
    out.push('\n');
    for (e, c) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            labels_field(&e.labels),
            e.branch,
            fmt_f64(e.x()),
            fmt_f64(e.y()),
            e.multiplicity,
            c.kind.code(),
            fmt_f64(c.eigen.trace),
            fmt_f64(c.eigen.det),
            fmt_f64(c.eigen.lambda1_re),
            fmt_f64(c.eigen.lambda1_im),
            fmt_f64(c.eigen.lambda2_re),
            fmt_f64(c.eigen.lambda2_im),
            evidence_field(c),
        ));
    }
    out
}

pub fn eq_class_from_csv(text: &str) -> Result<Vec<(Equilibrium, Classification)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == EQ_CLASS_HEADER => {}
        _ => return Err(Error::domain("missing joined equilibria header")),
    }
    let mut out = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 13 {
            return Err(Error::domain(format!("expected 13 columns, got {line:?}")));
        }
        let equilibrium = Equilibrium {
            labels: parse_labels(cols[0])?,
            branch: cols[1].parse::<Branch>().map_err(Error::Domain)?,
            point: State::new(parse_f64(cols[2])?, parse_f64(cols[3])?),
            multiplicity: cols[4]
                .parse::<u8>()
                .map_err(|_| Error::domain("invalid multiplicity"))?,
        };
        let (kind, evidence) = parse_evidence(cols[5], cols[12])?;
        let trace = parse_f64(cols[6])?;
        let det = parse_f64(cols[7])?;
        out.push((
            equilibrium,
            Classification {
                kind,
                eigen: EigenData {
                    trace,
                    det,
                    disc: trace * trace - 4.0 * det,
                    lambda1_re: parse_f64(cols[8])?,
                    lambda1_im: parse_f64(cols[9])?,
                    lambda2_re: parse_f64(cols[10])?,
                    lambda2_im: parse_f64(cols[11])?,
                },
                evidence,
                borderline: false,
            },
        ));
    }
    Ok(out)
}

/// Reader for the `name,value` documents (thresholds, fold and unfolding
/// reports, the flat Hopf summary). Values are returned verbatim; numeric
/// fields recover exactly through `f64::from_str`.
pub fn name_values_from_csv(text: &str) -> Result<Vec<(String, String)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("name,value") => {}
        _ => return Err(Error::domain("missing name,value header")),
    }
    let mut out = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let (name, value) = line
            .split_once(',')
            .ok_or_else(|| Error::domain(format!("expected name,value, got {line:?}")))?;
        out.push((name.to_string(), value.to_string()));
    }
    Ok(out)
}

/// Threshold constants as `name,value` rows in a fixed order; absent
/// fields are omitted.
pub fn thresholds_to_csv(t: &Thresholds) -> String {
    let mut out = String::from("name,value\n");
    let mut push = |name: &str, v: Option<f64>| {
        if let Some(v) = v {
            out.push_str(&format!("{},{}\n", name, fmt_f64(v)));
        }
    };
    push("allee_root_sum", Some(t.allee_root_sum));
    push("allee_disc", Some(t.allee_disc));
    push("allee_root_gap", t.allee_root_gap);
    push("diagonal_root_sum", Some(t.diagonal_root_sum));
    push("diagonal_disc", Some(t.diagonal_disc));
    push("diagonal_root_gap", t.diagonal_root_gap);
    push("allee_tangency_harvest", Some(t.allee_tangency_harvest));
    push("boundary_fold_harvest", Some(t.boundary_fold_harvest));
    push("diagonal_fold_harvest", Some(t.diagonal_fold_harvest));
    push("cusp_growth_rate", t.cusp_growth_rate);
    push("hopf_growth_rate_upper", t.hopf_growth_rate_upper);
    push("hopf_growth_rate_lower", t.hopf_growth_rate_lower);
    out
}

/// Trajectory samples as `t,x,y` rows.
pub fn trajectory_to_csv(samples: &[(f64, State)]) -> String {
    let mut out = String::from("t,x,y\n");
    for (t, z) in samples {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(*t),
            fmt_f64(z.x),
            fmt_f64(z.y)
        ));
    }
    out
}

pub fn trajectory_from_csv(text: &str) -> Result<Vec<(f64, State)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("t,x,y") => {}
        _ => return Err(Error::domain("missing trajectory header")),
    }
    let mut out = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::domain(format!("expected 3 columns, got {line:?}")));
        }
        out.push((
            parse_f64(cols[0])?,
            State::new(parse_f64(cols[1])?, parse_f64(cols[2])?),
        ));
    }
    Ok(out)
}

pub const PORTRAIT_HEADER: &str = "run,seed,backward,t,x,y";

/// One sample row of the long-format portrait CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortraitRow {
    pub run: usize,
    pub seed: usize,
    pub backward: bool,
    pub t: f64,
    pub state: State,
}

/// Long-format portrait export: one sample row per accepted step, with a
/// run index and the seed that produced it.
pub fn portrait_to_csv(runs: &[crate::dynamics::PortraitRun]) -> String {
    let mut out = String::from(PORTRAIT_HEADER);
    out.push('\n');
    for (run, pr) in runs.iter().enumerate() {
        for (t, z) in &pr.trajectory.samples {
            out.push_str(&format!(
                "{run},{},{},{},{},{}\n",
                pr.seed,
                pr.trajectory.backward,
                fmt_f64(*t),
                fmt_f64(z.x),
                fmt_f64(z.y)
            ));
        }
    }
    out
}

pub fn portrait_from_csv(text: &str) -> Result<Vec<PortraitRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == PORTRAIT_HEADER => {}
        _ => return Err(Error::domain("missing portrait header")),
    }
    let mut out = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(Error::domain(format!("expected 6 columns, got {line:?}")));
        }
        out.push(PortraitRow {
            run: cols[0]
                .parse()
                .map_err(|_| Error::domain("invalid run index"))?,
            seed: cols[1]
                .parse()
                .map_err(|_| Error::domain("invalid seed index"))?,
            backward: cols[2]
                .parse()
                .map_err(|_| Error::domain("invalid direction flag"))?,
            t: parse_f64(cols[3])?,
            state: State::new(parse_f64(cols[4])?, parse_f64(cols[5])?),
        });
    }
    Ok(out)
}

pub const CENSUS_HEADER: &str = "eta1,eta2,equilibrium_count,cycle_found,regime";

pub fn census_to_csv(cells: &[crate::bifurcation::BtCensusCell]) -> String {
    let mut out = String::from(CENSUS_HEADER);
    out.push('\n');
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(c.eta1),
            fmt_f64(c.eta2),
            c.equilibrium_count,
            c.cycle_found,
            c.regime
        ));
    }
    out
}

pub fn census_from_csv(text: &str) -> Result<Vec<crate::bifurcation::BtCensusCell>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CENSUS_HEADER => {}
        _ => return Err(Error::domain("missing census header")),
    }
    let mut out = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(Error::domain(format!("expected 5 columns, got {line:?}")));
        }
        out.push(crate::bifurcation::BtCensusCell {
            eta1: parse_f64(cols[0])?,
            eta2: parse_f64(cols[1])?,
            equilibrium_count: cols[2]
                .parse()
                .map_err(|_| Error::domain("invalid equilibrium count"))?,
            cycle_found: cols[3]
                .parse()
                .map_err(|_| Error::domain("invalid cycle flag"))?,
            regime: cols[4].parse().map_err(Error::Domain)?,
        });
    }
    Ok(out)
}

pub const SWEEP_HEADER: &str =
    "q,h,s,m,boundary_count,allee_count,diagonal_count,total_count,kinds";

/// One row of a parameter sweep: equilibrium counts per branch and the
/// label:kind codes at that parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub params: ModelParams,
    pub boundary_count: usize,
    pub allee_count: usize,
    pub diagonal_count: usize,
    /// Semicolon-joined `label:code` entries in label order.
    pub kinds: String,
}

pub fn sweep_to_csv(rows: &[SweepRecord]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt_f64(r.params.q),
            fmt_f64(r.params.h),
            fmt_f64(r.params.s),
            fmt_f64(r.params.m),
            r.boundary_count,
            r.allee_count,
            r.diagonal_count,
            r.boundary_count + r.allee_count + r.diagonal_count,
            r.kinds
        ));
    }
    out
}

pub fn sweep_from_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == SWEEP_HEADER => {}
        _ => return Err(Error::domain("missing sweep header")),
    }
    let mut out = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.splitn(9, ',').collect();
        if cols.len() != 9 {
            return Err(Error::domain(format!("expected 9 columns, got {line:?}")));
        }
        let count = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::domain("invalid count"))
        };
        out.push(SweepRecord {
            params: ModelParams::new(
                parse_f64(cols[0])?,
                parse_f64(cols[1])?,
                parse_f64(cols[2])?,
                parse_f64(cols[3])?,
            )?,
            boundary_count: count(cols[4])?,
            allee_count: count(cols[5])?,
            diagonal_count: count(cols[6])?,
            kinds: cols[8].to_string(),
        });
    }
    Ok(out)
}
