//! Text artifacts: tower, partition, certification and conjugacy dumps.
//!
//! CSVs carry a header row, `.` decimals and `\n` line endings; JSON
//! documents carry a `"schema"` field. Output is a pure function of the
//! inputs, so identical runs give identical bytes.

use std::fmt::Write;

use serde_json::{json, Value};

use crate::conjugacy::{ConjugacyMesh, QsModulusTable, QsRow};
use crate::distortion::DistortionReport;
use crate::partition::{BranchWord, MarkovPartition};
use crate::renorm::RenormTower;

pub const SCHEMA: &str = "renorm-lab/1";

/// Shortest round-trip decimal form; `inf`, `-inf` or `NaN` otherwise.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Map descriptor with the schema tag.
pub fn map_json(t: f64, c: f64, label: &str) -> Value {
    json!({ "schema": SCHEMA, "t": t, "c": c, "label": label })
}

pub fn tower_json(tower: &RenormTower) -> Value {
    let levels: Vec<Value> = tower
        .levels()
        .iter()
        .map(|l| {
            let i = tower.nested(l.k);
            json!({
                "k": l.k,
                "n_k": l.return_time,
                "m_k": l.period,
                "J_k": l.restricted.as_array(),
                "I_k": i.as_array(),
                "p_k": tower.periodic_endpoint(l.k),
                "alpha_slope": l.alpha_slope,
                "c1_fk": l.critical_value,
                "boundary": l.boundary,
            })
        })
        .collect();
    let base = tower.base();
    json!({
        "schema": SCHEMA,
        "map": base.descriptor(),
        "depth": tower.depth(),
        "truncation": tower.truncation(),
        "levels": levels,
    })
}

pub fn tower_csv(tower: &RenormTower) -> String {
    let mut out = String::from("k,n_k,m_k,J_lo,J_hi,I_lo,I_hi,p_k,alpha_slope,c1_fk\n");
    for l in tower.levels() {
        let i = tower.nested(l.k);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            l.k,
            l.return_time,
            l.period,
            num(l.restricted.lo),
            num(l.restricted.hi),
            num(i.lo),
            num(i.hi),
            num(tower.periodic_endpoint(l.k)),
            num(l.alpha_slope),
            num(l.critical_value)
        );
    }
    out
}

pub fn partition_csv(partition: &MarkovPartition) -> String {
    let mut out = String::from("level,index,left,right,kind,iterate\n");
    for e in partition.elements() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            e.level,
            e.index,
            num(e.interval.lo),
            num(e.interval.hi),
            e.kind,
            e.iterate
        );
    }
    out
}

/// One line per word: label, then the cylinder endpoints.
pub fn words_dump(partition: &MarkovPartition, words: &[BranchWord]) -> String {
    let mut out = String::new();
    for w in words {
        let _ = writeln!(out, "{} {} {}", partition.word_label(&w.ids), num(w.cylinder.lo), num(w.cylinder.hi));
    }
    out
}

pub fn distortion_csv(report: &DistortionReport) -> String {
    let mut out = String::from("LEMMA\n");
    out.push_str(
        "k,critical_iterate,L_lo,L_hi,T_lo,T_hi,M_lo,M_hi,ratio_core,ratio_nested,c1,nl_sup\n",
    );
    for q in &report.lemma {
        let (t_lo, t_hi) = q.t_interval.map_or((None, None), |i| (Some(i.lo), Some(i.hi)));
        let (m_lo, m_hi) = q.m_interval.map_or((None, None), |i| (Some(i.lo), Some(i.hi)));
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            q.k,
            num(q.critical_iterate),
            num(q.image.lo),
            num(q.image.hi),
            opt(t_lo),
            opt(t_hi),
            opt(m_lo),
            opt(m_hi),
            opt(q.ratio_core),
            opt(q.ratio_nested),
            num(q.critical_value),
            num(q.nonlinearity_sup)
        );
    }
    out.push_str("\nDEF1A\nk,i,ratio_to_next\n");
    for r in &report.adjacent {
        let _ = writeln!(out, "{},{},{}", r.k, r.i, num(r.ratio));
    }
    out.push_str("\nDEF1B\nk,i,ratio_to_core\n");
    for r in &report.core {
        let _ = writeln!(out, "{},{},{}", r.k, r.i, num(r.ratio));
    }
    out.push_str("\nDEF1C\nword,domain_lo,domain_hi,scaled_sup,samples,skipped\n");
    for w in &report.words {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            w.word,
            num(w.domain.lo),
            num(w.domain.hi),
            opt(w.scaled_sup),
            w.samples,
            w.skipped
        );
    }
    out.push_str("\nGAPS\nk,cycle,gap,mixed,cycle_count,gap_count\n");
    for g in &report.gaps {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            g.k,
            num(g.cycle),
            num(g.gap),
            num(g.mixed),
            g.cycle_count,
            g.gap_count
        );
    }
    out
}

pub fn distortion_json(report: &DistortionReport) -> Value {
    json!({
        "schema": SCHEMA,
        "depth": report.depth,
        "word_length": report.word_length,
        "grid": report.grid,
        "A": report.a,
        "B": report.b,
        "C": report.c,
        "C6": report.c6,
        "thresholds": report.thresholds,
        "pass": report.pass,
        "skipped_words": report.skipped_words,
    })
}

fn qs_rows_csv(rows: &[QsRow]) -> String {
    let mut out = String::from("j,tau,max_rho,mean_rho,samples,excluded\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.j,
            num(r.tau),
            opt(r.max_rho),
            opt(r.mean_rho),
            r.samples,
            r.excluded
        );
    }
    out
}

/// Forward table of `H`.
pub fn qs_csv(table: &QsModulusTable) -> String {
    qs_rows_csv(&table.forward)
}

/// Table of `H^{-1}`.
pub fn qs_inverse_csv(table: &QsModulusTable) -> String {
    qs_rows_csv(&table.inverse)
}

pub fn qs_json(table: &QsModulusTable, mesh: &ConjugacyMesh) -> Value {
    json!({
        "schema": SCHEMA,
        "word_length": mesh.word_length(),
        "landmarks": mesh.len(),
        "grid": table.grid,
        "mesh_width": table.mesh_width,
        "inverse_mesh_width": table.inverse_mesh_width,
        "excluded_measure": table.excluded_measure,
        "inverse_excluded_measure": table.inverse_excluded_measure,
        "overall_max": table.overall_max(),
        "forward": table.forward,
        "inverse": table.inverse,
        "warnings": table.warnings,
    })
}

pub fn mesh_csv(mesh: &ConjugacyMesh) -> String {
    let mut out = String::from("x_f,x_g\n");
    for &(a, b) in mesh.pairs() {
        let _ = writeln!(out, "{},{}", num(a), num(b));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::UnimodalMap;
    use crate::renorm::build_tower;
    use crate::tolerances::Tolerances;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -1.0, 1e-20, 0.7849728402613959, 123456.75] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(1.0), "1.0");
    }

    #[test]
    fn tower_dumps_agree() {
        let tol = Tolerances::default();
        let f = UnimodalMap::affine(2.0, 0.7849728402613959).unwrap();
        let tower = build_tower(&f, 3, 2, &tol).unwrap();
        let v = tower_json(&tower);
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["levels"].as_array().unwrap().len(), 3);
        assert_eq!(v["levels"][0]["n_k"], 2);
        let csv = tower_csv(&tower);
        assert_eq!(csv.lines().count(), 4);
        let row: Vec<&str> = csv.lines().nth(2).unwrap().split(',').collect();
        assert_eq!(row[0], "2");
        assert_eq!(row[6].parse::<f64>().unwrap(), v["levels"][1]["I_k"][1].as_f64().unwrap());
    }
}
