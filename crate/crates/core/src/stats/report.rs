use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

/// A named statistical verdict. Field names and order are part of the JSON
/// output format.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub name: String,
    pub params: BTreeMap<String, Value>,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub sample_size: u64,
    pub seed: u64,
    pub runtime_ms: u64,
}

impl TestReport {
    pub fn new(name: impl Into<String>) -> Self {
        TestReport {
            name: name.into(),
            params: BTreeMap::new(),
            statistic: 0.0,
            threshold: 0.0,
            pass: false,
            sample_size: 0,
            seed: 0,
            runtime_ms: 0,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn verdict(mut self, statistic: f64, threshold: f64, pass: bool) -> Self {
        self.statistic = statistic;
        self.threshold = threshold;
        self.pass = pass;
        self
    }

    pub fn sample_size(mut self, n: u64) -> Self {
        self.sample_size = n;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn runtime_ms(mut self, ms: u64) -> Self {
        self.runtime_ms = ms;
        self
    }

    /// One JSON object on a single line.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports always serialize")
    }

    pub const CSV_HEADER: &'static str = "name,statistic,threshold,pass,sample_size,seed,runtime_ms,params";

    pub fn to_csv_row(&self) -> String {
        let params = serde_json::to_string(&self.params).expect("maps always serialize");
        format!(
            "{},{},{},{},{},{},{},\"{}\"",
            self.name,
            self.statistic,
            self.threshold,
            self.pass,
            self.sample_size,
            self.seed,
            self.runtime_ms,
            params.replace('"', "\"\"")
        )
    }
}
