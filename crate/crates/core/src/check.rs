//! Report rows shared by the verification routines.

/// One measured quantity against its bound; passes when `measured ≤ bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: String,
    pub slice: Option<usize>,
    pub bound: f64,
    pub measured: f64,
}

impl CheckRow {
    pub fn new(check: impl Into<String>, slice: Option<usize>, bound: f64, measured: f64) -> Self {
        CheckRow {
            check: check.into(),
            slice,
            bound,
            measured,
        }
    }

    pub fn violation(&self) -> f64 {
        if self.measured.is_nan() {
            return f64::INFINITY;
        }
        (self.measured - self.bound).max(0.0)
    }

    pub fn pass(&self) -> bool {
        self.measured <= self.bound
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckReport {
    pub rows: Vec<CheckRow>,
}

impl CheckReport {
    pub fn push(&mut self, row: CheckRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: CheckReport) {
        self.rows.extend(other.rows);
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(CheckRow::pass)
    }

    pub fn max_violation(&self) -> f64 {
        self.rows.iter().map(CheckRow::violation).fold(0.0, f64::max)
    }

    pub fn max_measured(&self) -> f64 {
        self.rows.iter().map(|r| r.measured).fold(f64::NEG_INFINITY, f64::max)
    }
}
