use crate::scalar::Real;

use super::PeriodicField;

/// Location, value and second derivative of a critical point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extremum<T> {
    pub x: T,
    pub value: T,
    pub second_derivative: T,
}

/// Critical points of a field over one period, sorted by location.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExtremaSet<T> {
    pub minima: Vec<Extremum<T>>,
    pub maxima: Vec<Extremum<T>>,
    /// Critical points whose second derivative is below the threshold.
    pub degenerate: Vec<Extremum<T>>,
    /// Set when the first derivative vanishes on the whole scan.
    pub degenerate_everywhere: bool,
}

impl<T: Real> ExtremaSet<T> {
    pub fn is_nondegenerate(&self) -> bool {
        self.degenerate.is_empty() && !self.degenerate_everywhere
    }
}

/// Smallest `|f''|` accepted as a non-degenerate extremum.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// Locates sign changes of `f'` on a `scan_n` grid, polishes each root by
/// bisection to `1e-12` and classifies it by the sign of `f''`.
pub fn find_extrema<T: Real>(field: &PeriodicField<T>, scan_n: usize) -> ExtremaSet<T> {
    assert!(scan_n >= 64, "scan resolution must be at least 64");
    let period = field.period();
    let h = period / T::from_usize_lossy(scan_n);
    let slope = |x: T| field.jet(x).d(1);
    let xs: Vec<T> = (0..=scan_n).map(|i| h * T::from_usize_lossy(i)).collect();
    let ds: Vec<T> = xs.iter().map(|&x| slope(x)).collect();

    let scale = field.jet(T::zero()).value().abs().max(T::one());
    let flat_tol = T::lit(1e-13) * scale / period;
    let mut out = ExtremaSet::default();
    if ds.iter().all(|d| d.abs() <= flat_tol) {
        out.degenerate_everywhere = true;
        return out;
    }

    let tol = T::lit(1e-12);
    let mut roots: Vec<T> = Vec::new();
    for i in 0..scan_n {
        let (a, b) = (xs[i], xs[i + 1]);
        let (da, db) = (ds[i], ds[i + 1]);
        if da == T::zero() {
            roots.push(a);
            continue;
        }
        if db == T::zero() || (da > T::zero()) == (db > T::zero()) {
            continue;
        }
        let (mut lo, mut hi, mut dlo) = (a, b, da);
        while hi - lo > tol {
            let mid = (lo + hi) * T::lit(0.5);
            let dm = slope(mid);
            if dm == T::zero() {
                lo = mid;
                hi = mid;
                break;
            }
            if (dm > T::zero()) == (dlo > T::zero()) {
                lo = mid;
                dlo = dm;
            } else {
                hi = mid;
            }
        }
        roots.push((lo + hi) * T::lit(0.5));
    }

    let threshold = T::lit(DEGENERACY_THRESHOLD);
    for x in roots {
        let x = if x >= period { x - period } else { x };
        let j = field.jet(x);
        let e = Extremum {
            x,
            value: j.value(),
            second_derivative: j.d(2),
        };
        if e.second_derivative.abs() < threshold {
            out.degenerate.push(e);
        } else if e.second_derivative > T::zero() {
            out.minima.push(e);
        } else {
            out.maxima.push(e);
        }
    }
    for set in [&mut out.minima, &mut out.maxima, &mut out.degenerate] {
        set.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap());
        set.dedup_by(|a, b| (a.x - b.x).abs() < T::lit(1e-9) * period);
    }
    out
}
