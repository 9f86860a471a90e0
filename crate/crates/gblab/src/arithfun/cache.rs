//! On-disk cache for coefficient tables and completed L-values, enabled by
//! setting `GBLAB_CACHE_DIR`. Files are versioned; unreadable or malformed
//! files are ignored and recomputed.

use serde::{Deserialize, Serialize};
use std::fs;
use std::path::PathBuf;

const VERSION: u32 = 1;

pub fn cache_dir() -> Option<PathBuf> {
    let dir = std::env::var_os("GBLAB_CACHE_DIR")?;
    let dir = PathBuf::from(dir);
    fs::create_dir_all(&dir).ok()?;
    Some(dir)
}

fn tau_path(n: usize) -> Option<PathBuf> {
    cache_dir().map(|d| d.join(format!("tau_v{VERSION}_k12_n{n}.csv")))
}

pub(crate) fn load_tau(n: usize) -> Option<Vec<i128>> {
    let text = fs::read_to_string(tau_path(n)?).ok()?;
    let mut lines = text.lines();
    if lines.next()? != "n,tau_n" {
        return None;
    }
    let mut out = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let (idx, val) = line.split_once(',')?;
        if idx.parse::<usize>().ok()? != i + 1 {
            return None;
        }
        out.push(val.parse::<i128>().ok()?);
    }
    (out.len() == n).then_some(out)
}

pub(crate) fn store_tau(tau: &[i128]) {
    let Some(path) = tau_path(tau.len()) else { return };
    let mut s = String::from("n,tau_n\n");
    for (i, t) in tau.iter().enumerate() {
        s.push_str(&format!("{},{}\n", i + 1, t));
    }
    // A failed write only costs a recomputation next time.
    let _ = fs::write(path, s);
}

#[derive(Serialize, Deserialize)]
struct LambdaEntry {
    s: u32,
    re: f64,
    im: f64,
}

fn lambda_path(weight: u32, bound: usize, tag: &str) -> Option<PathBuf> {
    cache_dir().map(|d| d.join(format!("lambda_v{VERSION}_{tag}_k{weight}_n{bound}.json")))
}

pub(crate) fn load_lambda(weight: u32, bound: usize, tag: &str) -> Option<Vec<f64>> {
    let text = fs::read_to_string(lambda_path(weight, bound, tag)?).ok()?;
    let entries: Vec<LambdaEntry> = serde_json::from_str(&text).ok()?;
    if entries.len() != weight as usize - 1 {
        return None;
    }
    entries
        .iter()
        .enumerate()
        .map(|(i, e)| (e.s == i as u32 + 1 && e.re.is_finite()).then_some(e.re))
        .collect()
}

pub(crate) fn store_lambda(weight: u32, bound: usize, tag: &str, values: &[f64]) {
    let Some(path) = lambda_path(weight, bound, tag) else { return };
    let entries: Vec<LambdaEntry> = values
        .iter()
        .enumerate()
        .map(|(i, &re)| LambdaEntry { s: i as u32 + 1, re, im: 0.0 })
        .collect();
    if let Ok(s) = serde_json::to_string_pretty(&entries) {
        let _ = fs::write(path, s);
    }
}
