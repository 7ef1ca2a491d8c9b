//! End-to-end checking: inversion, oracle comparison and the build audit.

use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::builder::{build, BuildCounters, BuildOptions, BuildSummary};
use crate::error::{Error, Result};
use crate::gsa::{GsaEntry, GsaWidths};
use crate::ingest::CollectionSource;
use crate::meta::{output_path, BuildMeta};
use crate::oracle;

/// Documented constant for the memory budget: the tracked internal state
/// (tracker entries, interval minima, one column slice) stays below this
/// many bytes per string.
pub const MEMORY_BYTES_PER_STRING: u64 = 64;

/// Working files may transiently hold two generations; the budget is twice
/// the output size with this much slack for the overlap.
pub const DISK_BUDGET_FACTOR: f64 = 2.0;
pub const DISK_BUDGET_SLACK: f64 = 0.10;

/// Reconstruct the collection, in original order, from a final transform.
///
/// Row `q` of the sorted-suffix table (0-based, inside the end-marker block)
/// belongs to string `q`, so each string is recovered by walking the
/// LF-mapping from its row until its own end-marker shows up. Walks never
/// step *from* an end-marker, so the single shared marker byte is harmless.
pub fn invert_ebwt(ebwt: &[u8], m: usize, end_marker_byte: u8) -> Result<Vec<Vec<u8>>> {
    let n = ebwt.len();
    if m == 0 || n < 2 * m {
        return Err(Error::MalformedEbwt(format!(
            "{n} cells cannot hold {m} strings"
        )));
    }
    // Key space: end-marker below every byte.
    let key = |b: u8| -> usize {
        if b == end_marker_byte {
            0
        } else {
            1 + b as usize
        }
    };
    let mut counts = [0u64; 257];
    for &b in ebwt {
        counts[key(b)] += 1;
    }
    if counts[0] != m as u64 {
        return Err(Error::MalformedEbwt(format!(
            "expected {m} end-markers, found {}",
            counts[0]
        )));
    }
    let mut c_table = [0u64; 257];
    let mut run = 0u64;
    for (k, &cnt) in counts.iter().enumerate() {
        c_table[k] = run;
        run += cnt;
    }
    // occ_index[i]: occurrences of ebwt[i] strictly before i.
    let mut occ_index = vec![0u64; n];
    let mut running = [0u64; 257];
    for (i, &b) in ebwt.iter().enumerate() {
        let k = key(b);
        occ_index[i] = running[k];
        running[k] += 1;
    }

    let mut strings = Vec::with_capacity(m);
    for q in 0..m {
        let mut out = Vec::new();
        let mut pos = q;
        loop {
            let b = ebwt[pos];
            if b == end_marker_byte {
                break;
            }
            out.push(b);
            if out.len() > n {
                return Err(Error::MalformedEbwt(format!(
                    "LF walk from row {q} does not terminate"
                )));
            }
            pos = (c_table[key(b)] + occ_index[pos]) as usize;
        }
        if out.is_empty() {
            return Err(Error::MalformedEbwt(format!(
                "row {q} reconstructs an empty string"
            )));
        }
        out.reverse();
        strings.push(out);
    }
    Ok(strings)
}

/// The final output files of a build, loaded into memory.
#[derive(Debug)]
pub struct Outputs {
    pub meta: BuildMeta,
    pub ebwt: Vec<u8>,
    pub lcp: Option<Vec<u64>>,
    pub gsa: Option<Vec<GsaEntry>>,
}

pub fn load_outputs(prefix: &Path) -> Result<Outputs> {
    let meta = BuildMeta::load(prefix)?;
    let ebwt = std::fs::read(output_path(prefix, "ebwt"))?;
    let lcp = if meta.with_lcp {
        let raw = std::fs::read(output_path(prefix, "lcp"))?;
        let width = meta.lcp_width.unwrap_or(1) as usize;
        if raw.len() % width != 0 {
            return Err(Error::InvalidConfig(format!(
                ".lcp size {} is not a multiple of the cell width {width}",
                raw.len()
            )));
        }
        Some(
            raw.chunks_exact(width)
                .map(|cell| {
                    let mut buf = [0u8; 8];
                    buf[..width].copy_from_slice(cell);
                    u64::from_le_bytes(buf)
                })
                .collect(),
        )
    } else {
        None
    };
    let gsa = if meta.with_gsa {
        let widths = GsaWidths {
            start_width: meta.gsa_start_width.unwrap_or(1),
            id_width: meta.gsa_id_width.unwrap_or(1),
        };
        let raw = std::fs::read(output_path(prefix, "gsa"))?;
        if raw.len() % widths.entry_bytes() != 0 {
            return Err(Error::InvalidConfig(format!(
                ".gsa size {} is not a multiple of the record size {}",
                raw.len(),
                widths.entry_bytes()
            )));
        }
        Some(
            raw.chunks_exact(widths.entry_bytes())
                .map(|rec| widths.decode(rec))
                .collect(),
        )
    } else {
        None
    };
    Ok(Outputs {
        meta,
        ebwt,
        lcp,
        gsa,
    })
}

/// One verified property.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub details: String,
}

/// Result table of an audit or verification run.
#[derive(Debug, Clone, Default)]
pub struct AuditReport {
    pub checks: Vec<Check>,
    pub counters: Vec<(String, String)>,
}

impl AuditReport {
    fn check(&mut self, name: &'static str, pass: bool, details: String) {
        self.checks.push(Check {
            name,
            pass,
            details,
        });
    }

    fn counter(&mut self, name: &str, value: impl std::fmt::Display) {
        self.counters.push((name.to_string(), value.to_string()));
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Plain-text table for human eyes.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let width = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .chain(self.counters.iter().map(|(k, _)| k.len()))
            .max()
            .unwrap_or(0);
        for c in &self.checks {
            out.push_str(&format!(
                "{:width$}  {}  {}\n",
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                c.details,
            ));
        }
        for (k, v) in &self.counters {
            out.push_str(&format!("{k:width$}  {v}\n"));
        }
        out
    }

    /// `key=value` lines for machines.
    pub fn render_kv(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "check.{}={}\n",
                c.name,
                if c.pass { "pass" } else { "fail" }
            ));
        }
        for (k, v) in &self.counters {
            out.push_str(&format!("counter.{k}={v}\n"));
        }
        out.push_str(&format!(
            "result={}\n",
            if self.all_passed() { "pass" } else { "fail" }
        ));
        out
    }
}

fn first_mismatch<T: PartialEq>(a: &[T], b: &[T]) -> Option<usize> {
    if a.len() != b.len() {
        return Some(a.len().min(b.len()));
    }
    a.iter().zip(b).position(|(x, y)| x != y)
}

fn check_against_oracle(report: &mut AuditReport, outputs: &Outputs, collection: &[Vec<u8>]) {
    let em = outputs.meta.end_marker_byte;
    let (ebwt, lcp, gsa) = oracle::naive_all(collection, em);
    match first_mismatch(&outputs.ebwt, &ebwt) {
        None => report.check("oracle_ebwt", true, format!("{} cells equal", ebwt.len())),
        Some(i) => report.check("oracle_ebwt", false, format!("first mismatch at index {}", i + 1)),
    }
    if let Some(got) = &outputs.lcp {
        match first_mismatch(got, &lcp) {
            None => report.check("oracle_lcp", true, format!("{} cells equal", lcp.len())),
            Some(i) => report.check("oracle_lcp", false, format!("first mismatch at index {}", i + 1)),
        }
    }
    if let Some(got) = &outputs.gsa {
        match first_mismatch(got, &gsa.entries) {
            None => report.check("oracle_gsa", true, format!("{} records equal", gsa.entries.len())),
            Some(i) => report.check("oracle_gsa", false, format!("first mismatch at index {}", i + 1)),
        }
    }
}

fn check_structure(report: &mut AuditReport, outputs: &Outputs) {
    let meta = &outputs.meta;
    let n = meta.n as usize;
    report.check(
        "ebwt_cell_count",
        outputs.ebwt.len() == n,
        format!("{} of {n}", outputs.ebwt.len()),
    );
    let markers = outputs
        .ebwt
        .iter()
        .filter(|&&b| b == meta.end_marker_byte)
        .count();
    report.check(
        "end_marker_count",
        markers as u64 == meta.m,
        format!("{markers} of {}", meta.m),
    );
    if let Some(lcp) = &outputs.lcp {
        report.check(
            "lcp_cell_count",
            lcp.len() == n,
            format!("{} of {n}", lcp.len()),
        );
        let head_zero = lcp.iter().take(meta.m as usize).all(|&v| v == 0);
        report.check(
            "lcp_first_m_zero",
            head_zero,
            format!("first {} cells", meta.m),
        );
        let max = lcp.iter().max().copied().unwrap_or(0);
        report.check(
            "lcp_below_k",
            max < meta.k as u64,
            format!("max {max} < K {}", meta.k),
        );
    }
    if let Some(gsa) = &outputs.gsa {
        report.check(
            "gsa_record_count",
            gsa.len() == n,
            format!("{} of {n}", gsa.len()),
        );
    }
}

fn check_round_trip(
    report: &mut AuditReport,
    outputs: &Outputs,
    input: Option<&[Vec<u8>]>,
) -> Option<Vec<Vec<u8>>> {
    match invert_ebwt(&outputs.ebwt, outputs.meta.m as usize, outputs.meta.end_marker_byte) {
        Ok(strings) => {
            match input {
                Some(expected) => {
                    let same = strings.len() == expected.len()
                        && strings.iter().zip(expected).all(|(a, b)| a == b);
                    report.check(
                        "round_trip",
                        same,
                        if same {
                            format!("{} strings reconstructed in order", strings.len())
                        } else {
                            "inverted collection differs from the input".to_string()
                        },
                    );
                }
                None => report.check(
                    "round_trip",
                    true,
                    format!("{} strings reconstructed", strings.len()),
                ),
            }
            Some(strings)
        }
        Err(e) => {
            report.check("round_trip", false, e.to_string());
            None
        }
    }
}

/// Verify the outputs under `prefix`. With the original input at hand the
/// comparison is against ground truth; otherwise the collection recovered by
/// inversion seeds the oracle, which still catches any tampered `.lcp`/`.gsa`
/// and most `.ebwt` damage. Oracle work is skipped above `oracle_cap` cells.
pub fn verify_outputs(
    prefix: &Path,
    input: Option<&CollectionSource>,
    oracle_cap: u64,
) -> Result<AuditReport> {
    let outputs = load_outputs(prefix)?;
    let mut report = AuditReport::default();
    check_structure(&mut report, &outputs);

    let input_strings = match input {
        Some(source) => {
            let mut strings = Vec::new();
            let mut reader = source.records()?;
            let mut buf = Vec::new();
            while reader.next_record(&mut buf)? {
                strings.push(buf.clone());
            }
            Some(strings)
        }
        None => None,
    };

    let inverted = check_round_trip(&mut report, &outputs, input_strings.as_deref());
    let reference = input_strings.or(inverted);
    if outputs.meta.n <= oracle_cap {
        if let Some(collection) = &reference {
            check_against_oracle(&mut report, &outputs, collection);
        }
    } else {
        report.counter("oracle", format!("skipped: {} cells over cap {oracle_cap}", outputs.meta.n));
    }
    report.counter("n", outputs.meta.n);
    report.counter("m", outputs.meta.m);
    report.counter("k", outputs.meta.k);
    report.counter("sigma", outputs.meta.sigma);
    Ok(report)
}

fn budget_checks(report: &mut AuditReport, counters: &BuildCounters, m: u64) {
    report.check(
        "sequential_io",
        counters.backward_seeks == 0,
        format!("{} backward seeks", counters.backward_seeks),
    );
    let memory_budget = MEMORY_BYTES_PER_STRING * m;
    report.check(
        "tracker_memory",
        counters.peak_tracker_memory <= memory_budget,
        format!(
            "peak {} <= {} ({}*m)",
            counters.peak_tracker_memory, memory_budget, MEMORY_BYTES_PER_STRING
        ),
    );
    let disk_budget =
        (counters.output_bytes as f64 * DISK_BUDGET_FACTOR * (1.0 + DISK_BUDGET_SLACK)) as u64;
    report.check(
        "working_disk",
        counters.peak_working_disk <= disk_budget,
        format!(
            "peak {} <= {} (2x output {} +{}%)",
            counters.peak_working_disk,
            disk_budget,
            counters.output_bytes,
            (DISK_BUDGET_SLACK * 100.0) as u32
        ),
    );
}

fn counter_rows(report: &mut AuditReport, counters: &BuildCounters) {
    report.counter("bytes_read", counters.bytes_read);
    report.counter("bytes_written", counters.bytes_written);
    report.counter("backward_seeks", counters.backward_seeks);
    report.counter("peak_working_disk_bytes", counters.peak_working_disk);
    report.counter("peak_column_disk_bytes", counters.peak_column_disk);
    report.counter("peak_tracker_memory_bytes", counters.peak_tracker_memory);
    report.counter("output_bytes", counters.output_bytes);
    report.counter("wall_ms", counters.wall.as_millis());
}

/// Build `source` under full instrumentation (into `work_dir`, or a
/// temporary directory) and audit the run: sequential IO, memory and disk
/// budgets, and oracle equality when the collection is small enough.
pub fn audit_build(
    source: &CollectionSource,
    opts: &BuildOptions,
    work_dir: Option<&Path>,
    oracle_cap: u64,
) -> Result<(AuditReport, BuildSummary)> {
    let tmp_holder;
    let work: PathBuf = match work_dir {
        Some(d) => d.to_path_buf(),
        None => {
            tmp_holder = tempfile::tempdir()?;
            tmp_holder.path().to_path_buf()
        }
    };
    let prefix = work.join("audit");
    let summary = build(source, &prefix, &work.join("tmp"), opts, None)?;

    let mut report = AuditReport::default();
    budget_checks(&mut report, &summary.counters, summary.meta.m);

    let wall: Duration = summary.counters.wall;
    let outputs = load_outputs(&prefix)?;
    check_structure(&mut report, &outputs);
    if summary.meta.n <= oracle_cap {
        let mut strings = Vec::new();
        let mut reader = source.records()?;
        let mut buf = Vec::new();
        while reader.next_record(&mut buf)? {
            strings.push(buf.clone());
        }
        check_round_trip(&mut report, &outputs, Some(&strings));
        check_against_oracle(&mut report, &outputs, &strings);
    }
    counter_rows(&mut report, &summary.counters);
    report.counter("wall_per_cell_ns", wall.as_nanos() as u64 / summary.meta.n.max(1));
    Ok((report, summary))
}
