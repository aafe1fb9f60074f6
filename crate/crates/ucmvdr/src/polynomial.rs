//! The array polynomial: conversions between beamformer weights, polynomial
//! coefficients and zero sets, plus complex root finding and the radial
//! unit-circle projection.
//!
//! For a standard half-wavelength ULA the z-transform of the conjugate
//! weights, P(z) = sum_n w_n^* z^-n, evaluated at z = exp(j pi u) is the
//! beampattern B(u). Zeros of P on the unit circle are therefore perfect
//! beampattern nulls; zeros off the circle are finite notches. Zeros are kept
//! in polar form so that unit-circle constructions have radius exactly 1 and
//! the projection is exactly idempotent.

use std::f64::consts::PI;

use crate::beamformer::WeightVector;
use crate::{CMatrix, Error, Result, C64};

/// Leading coefficients smaller than this times the coefficient norm mean
/// the polynomial degree would drop.
const DEGENERATE_REL_TOL: f64 = 1e-12;

/// A polynomial zero in polar form: radius and angle in (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zero {
    angle: f64,
    radius: f64,
}

impl Zero {
    /// Builds a zero from polar coordinates; the angle is wrapped into
    /// (-pi, pi].
    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Self {
            angle: wrap_angle(angle),
            radius,
        }
    }

    pub fn from_complex(z: C64) -> Self {
        Self {
            angle: z.arg(),
            radius: z.norm(),
        }
    }

    pub fn to_complex(self) -> C64 {
        C64::from_polar(self.radius, self.angle)
    }

    /// Angle in (-pi, pi].
    pub fn angle(self) -> f64 {
        self.angle
    }

    pub fn radius(self) -> f64 {
        self.radius
    }

    /// Direction cosine u = angle / pi of the beampattern null this zero
    /// would produce on the unit circle (half-wavelength arrays).
    pub fn direction_cosine(self) -> f64 {
        self.angle / PI
    }
}

fn wrap_angle(a: f64) -> f64 {
    let mut w = a % (2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    } else if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

/// Sorts a zero multiset into the canonical order: ascending angle, ties by
/// radius.
pub fn canonical_sort(zeros: &mut [Zero]) {
    zeros.sort_by(|a, b| {
        (a.angle, a.radius)
            .partial_cmp(&(b.angle, b.radius))
            .expect("zero coordinates are never NaN")
    });
}

/// Degree N-1 polynomial in z^-1 held as a leading scale and a zero multiset.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayPolynomial {
    zeros: Vec<Zero>,
    scale: C64,
}

impl ArrayPolynomial {
    pub fn new(mut zeros: Vec<Zero>, scale: C64) -> Self {
        canonical_sort(&mut zeros);
        Self { zeros, scale }
    }

    /// Z-transform of the conjugate weights: coefficients c_n = w_n^* on
    /// z^-n, factored into scale and zeros.
    ///
    /// Requires a half-wavelength array (the zero angles are read as
    /// direction cosines times pi) and a leading coefficient that does not
    /// vanish, i.e. |w_0| above 1e-12 times the weight norm.
    pub fn from_weights(weights: &WeightVector) -> Result<Self> {
        let spacing = weights.config().spacing_wavelengths();
        if spacing != 0.5 {
            return Err(Error::RequiresHalfWavelengthSpacing(spacing));
        }
        let coefficients: Vec<C64> = weights.weights().iter().map(|w| w.conj()).collect();
        let zeros = find_zeros(&coefficients)?;
        Ok(Self::new(zeros, coefficients[0]))
    }

    /// Zeros in canonical order.
    pub fn zeros(&self) -> &[Zero] {
        &self.zeros
    }

    pub fn scale(&self) -> C64 {
        self.scale
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    /// Expands scale * prod (1 - zero_n z^-1) back into coefficients of
    /// z^-n; the result has exactly degree + 1 entries.
    pub fn coefficients(&self) -> Vec<C64> {
        zeros_to_coefficients(&self.zeros)
            .into_iter()
            .map(|c| c * self.scale)
            .collect()
    }
}

/// Value of sum_n coefficients[n] z^-n.
pub fn evaluate(coefficients: &[C64], z: C64) -> C64 {
    let inv = C64::new(1.0, 0.0) / z;
    let mut acc = C64::new(0.0, 0.0);
    for &c in coefficients.iter().rev() {
        acc = acc * inv + c;
    }
    acc
}

/// Zeros of the polynomial sum_n coefficients[n] z^-n, computed as the
/// eigenvalues of the balanced companion matrix of its monic z-form.
pub fn find_zeros(coefficients: &[C64]) -> Result<Vec<Zero>> {
    if coefficients.is_empty() {
        return Err(Error::EmptyInput("polynomial coefficients"));
    }
    let norm = coefficients
        .iter()
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let leading = coefficients[0].norm();
    let threshold = DEGENERATE_REL_TOL * norm;
    if leading <= threshold {
        return Err(Error::DegeneratePolynomial { leading, threshold });
    }

    let degree = coefficients.len() - 1;
    if degree == 0 {
        return Ok(Vec::new());
    }

    // P(z) = z^-d q(z) with q(z) = sum_n c_n z^(d-n); the zeros of P are the
    // eigenvalues of the companion matrix of q / c_0.
    let mut companion = CMatrix::zeros(degree, degree);
    for i in 1..degree {
        companion[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..degree {
        companion[(i, degree - 1)] = -coefficients[degree - i] / coefficients[0];
    }
    balance(&mut companion);

    let eigenvalues = companion.eigenvalues().ok_or(Error::EigenNonConvergence)?;
    let mut zeros: Vec<Zero> = eigenvalues.iter().map(|&z| Zero::from_complex(z)).collect();
    canonical_sort(&mut zeros);
    Ok(zeros)
}

/// Parlett-Reinsch balancing: diagonal similarity scaling by powers of two
/// until row and column norms are comparable. Improves the eigenvalue
/// accuracy of companion matrices whose coefficients span many orders of
/// magnitude.
fn balance(m: &mut CMatrix) {
    const RADIX: f64 = 2.0;
    let n = m.nrows();
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut col_norm = 0.0;
            let mut row_norm = 0.0;
            for j in 0..n {
                if j != i {
                    col_norm += m[(j, i)].norm();
                    row_norm += m[(i, j)].norm();
                }
            }
            if col_norm == 0.0 || row_norm == 0.0 {
                continue;
            }
            let total = col_norm + row_norm;
            let mut factor = 1.0;
            while col_norm * factor < row_norm / RADIX {
                factor *= RADIX;
            }
            while col_norm * factor >= row_norm * RADIX {
                factor /= RADIX;
            }
            if col_norm * factor + row_norm / factor < 0.95 * total && factor != 1.0 {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= factor;
                }
                for j in 0..n {
                    m[(j, i)] *= factor;
                }
            }
        }
        if converged {
            return;
        }
    }
}

/// Radially projects every zero onto the unit circle, except that zeros in
/// the main-lobe sector |angle| <= 2 pi / N land on the first-null angle
/// (sign of the angle preserved, with sgn(0) = +1).
///
/// Angles outside the sector are preserved bit-exactly and output radii are
/// exactly 1, which makes the projection idempotent. Zeros at the origin
/// have no angle and are rejected.
pub fn project_zeros_to_unit_circle(zeros: &[Zero], n_sensors: usize) -> Result<Vec<Zero>> {
    if zeros.is_empty() {
        return Err(Error::EmptyInput("zero multiset"));
    }
    for (index, z) in zeros.iter().enumerate() {
        if !z.radius.is_finite() || z.radius <= 1e-12 {
            return Err(Error::ZeroAtOrigin { index });
        }
    }
    let first_null = 2.0 * PI / n_sensors as f64;
    let mut projected: Vec<Zero> = zeros
        .iter()
        .map(|z| {
            let angle = if z.angle.abs() > first_null {
                z.angle
            } else if z.angle >= 0.0 {
                first_null
            } else {
                -first_null
            };
            Zero { angle, radius: 1.0 }
        })
        .collect();
    canonical_sort(&mut projected);
    Ok(projected)
}

/// Expands prod_n (1 - zero_n z^-1) into coefficients of z^-n by sequential
/// convolution with each linear factor. The leading coefficient is exactly 1
/// and the result has |zeros| + 1 entries.
pub fn zeros_to_coefficients(zeros: &[Zero]) -> Vec<C64> {
    let mut coefficients = vec![C64::new(1.0, 0.0)];
    for zero in zeros {
        let z = zero.to_complex();
        let mut next = vec![C64::new(0.0, 0.0); coefficients.len() + 1];
        for (k, &c) in coefficients.iter().enumerate() {
            next[k] += c;
            next[k + 1] -= z * c;
        }
        coefficients = next;
    }
    coefficients
}
