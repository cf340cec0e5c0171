//! Orthonormal scaling filters and their quadrature mirror partners.

use std::fmt;
use std::str::FromStr;

use crate::error::GamaError;

#[allow(clippy::excessive_precision)]
const HAAR: [f64; 2] = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];

#[allow(clippy::excessive_precision)]
const DB2: [f64; 4] = [
    0.48296291314453416,
    0.8365163037378079,
    0.2241438680420134,
    -0.12940952255126037,
];

#[allow(clippy::excessive_precision)]
const DB3: [f64; 6] = [
    0.33267055295008263,
    0.8068915093110925,
    0.45987750211849154,
    -0.13501102001025458,
    -0.08544127388202666,
    0.03522629188570953,
];

#[allow(clippy::excessive_precision)]
const DB4: [f64; 8] = [
    0.2303778133088965,
    0.7148465705529157,
    0.6308807679298589,
    -0.027983769416859854,
    -0.18703481171909309,
    0.030841381835560764,
    0.0328830116668852,
    -0.010597401785069032,
];

#[allow(clippy::excessive_precision)]
const COIF1: [f64; 6] = [
    -0.07273261951252645,
    0.3378976624574818,
    0.8525720202116004,
    0.3848648468648578,
    -0.07273261951252645,
    -0.015655728135791993,
];

#[allow(clippy::excessive_precision)]
const COIF2: [f64; 12] = [
    0.01638733646320364,
    -0.04146493678687178,
    -0.0673725547237256,
    0.3861100668227629,
    0.8127236354494135,
    0.4170051844232391,
    -0.07648859907828076,
    -0.05943441864643109,
    0.02368017194684777,
    0.005611434819368834,
    -0.0018232088709110323,
    -0.000720549445520347,
];

#[allow(clippy::excessive_precision)]
const COIF3: [f64; 18] = [
    -0.003793512864380802,
    0.007782596425672746,
    0.023452696142077168,
    -0.06577191128146936,
    -0.06112339000297255,
    0.40517690240911824,
    0.7937772226260872,
    0.42848347637737,
    -0.07179982161915484,
    -0.08230192710629983,
    0.03455502757329774,
    0.015880544863669452,
    -0.009007976136730624,
    -0.0025745176881367972,
    0.0011175187708306303,
    0.0004662169598204029,
    -7.0983302506379e-05,
    -3.459977319727278e-05,
];

/// Tolerance used when validating filter tables at construction.
pub const FILTER_TOLERANCE: f64 = 1e-10;

/// Supported wavelet families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseName {
    Haar,
    Db2,
    Db3,
    Db4,
    Coif1,
    Coif2,
    Coif3,
}

impl BaseName {
    pub const ALL: [BaseName; 7] = [
        BaseName::Haar,
        BaseName::Db2,
        BaseName::Db3,
        BaseName::Db4,
        BaseName::Coif1,
        BaseName::Coif2,
        BaseName::Coif3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BaseName::Haar => "haar",
            BaseName::Db2 => "db2",
            BaseName::Db3 => "db3",
            BaseName::Db4 => "db4",
            BaseName::Coif1 => "coif1",
            BaseName::Coif2 => "coif2",
            BaseName::Coif3 => "coif3",
        }
    }

    fn scaling_filter(self) -> &'static [f64] {
        match self {
            BaseName::Haar => &HAAR,
            BaseName::Db2 => &DB2,
            BaseName::Db3 => &DB3,
            BaseName::Db4 => &DB4,
            BaseName::Coif1 => &COIF1,
            BaseName::Coif2 => &COIF2,
            BaseName::Coif3 => &COIF3,
        }
    }
}

impl fmt::Display for BaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BaseName {
    type Err = GamaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BaseName::ALL
            .iter()
            .copied()
            .find(|b| b.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                GamaError::Config(format!(
                    "unknown wavelet base `{s}` (expected one of haar, db2, db3, db4, coif1, coif2, coif3)"
                ))
            })
    }
}

/// A quadrature mirror filter pair.
///
/// `lowpass` is the √2-normalized scaling filter and `highpass[k] = (-1)^k lowpass[L-1-k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletBase {
    name: BaseName,
    lowpass: Vec<f64>,
    highpass: Vec<f64>,
}

impl WaveletBase {
    pub fn name(&self) -> BaseName {
        self.name
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.lowpass
    }

    pub fn highpass(&self) -> &[f64] {
        &self.highpass
    }

    /// Filter length `L`.
    pub fn len(&self) -> usize {
        self.lowpass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lowpass.is_empty()
    }
}

/// Builds the filter pair for `name`.
///
/// The tables are checked against the orthonormality, DC-gain and QMF
/// conditions; a table that fails them is a programming error.
pub fn make_base(name: BaseName) -> WaveletBase {
    let lowpass = name.scaling_filter().to_vec();
    let highpass = qmf_highpass(&lowpass);
    let base = WaveletBase {
        name,
        lowpass,
        highpass,
    };
    if let Err(msg) = check_invariants(&base.lowpass, &base.highpass) {
        panic!("filter table for {name} is invalid: {msg}");
    }
    base
}

/// `G[k] = (-1)^k H[L-1-k]`.
pub fn qmf_highpass(lowpass: &[f64]) -> Vec<f64> {
    let l = lowpass.len();
    (0..l)
        .map(|k| {
            let v = lowpass[l - 1 - k];
            if k % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .collect()
}

/// Validates a candidate filter pair. Returns a description of the first violated condition.
pub fn check_invariants(lowpass: &[f64], highpass: &[f64]) -> Result<(), String> {
    let l = lowpass.len();
    if l == 0 || !l.is_multiple_of(2) {
        return Err(format!("filter length {l} is not a positive even number"));
    }
    if highpass.len() != l {
        return Err("highpass length differs from lowpass length".into());
    }
    let sum: f64 = lowpass.iter().sum();
    if (sum - std::f64::consts::SQRT_2).abs() > FILTER_TOLERANCE {
        return Err(format!("lowpass sums to {sum}, expected sqrt(2)"));
    }
    for m in 0..l / 2 {
        let shift = 2 * m;
        let corr: f64 = (0..l - shift).map(|k| lowpass[k] * lowpass[k + shift]).sum();
        let expected = if m == 0 { 1.0 } else { 0.0 };
        if (corr - expected).abs() > FILTER_TOLERANCE {
            return Err(format!(
                "autocorrelation at shift {shift} is {corr}, expected {expected}"
            ));
        }
    }
    for (k, (&g, h)) in highpass.iter().zip(qmf_highpass(lowpass)).enumerate() {
        if g != h {
            return Err(format!("QMF relation fails at tap {k}"));
        }
    }
    Ok(())
}
