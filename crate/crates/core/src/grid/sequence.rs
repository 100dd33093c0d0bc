use num_complex::Complex64;

/// The Fortescue operator, 1∠120°.
pub const ALPHA: Complex64 = Complex64 {
    re: -0.5,
    im: 0.866_025_403_784_438_6,
};

fn alpha2() -> Complex64 {
    ALPHA * ALPHA
}

/// Phase phasors (a, b, c) to symmetrical components (zero, positive, negative).
pub fn phase_to_sequence(a: Complex64, b: Complex64, c: Complex64) -> (Complex64, Complex64, Complex64) {
    let a2 = alpha2();
    let zero = (a + b + c) / 3.0;
    let pos = (a + ALPHA * b + a2 * c) / 3.0;
    let neg = (a + a2 * b + ALPHA * c) / 3.0;
    (zero, pos, neg)
}

pub fn sequence_to_phase(zero: Complex64, pos: Complex64, neg: Complex64) -> (Complex64, Complex64, Complex64) {
    let a2 = alpha2();
    (
        zero + pos + neg,
        zero + a2 * pos + ALPHA * neg,
        zero + ALPHA * pos + a2 * neg,
    )
}

pub(crate) fn to_seq(v: [Complex64; 3]) -> [Complex64; 3] {
    let (z, p, n) = phase_to_sequence(v[0], v[1], v[2]);
    [z, p, n]
}

pub(crate) fn to_phase(s: [Complex64; 3]) -> [Complex64; 3] {
    let (a, b, c) = sequence_to_phase(s[0], s[1], s[2]);
    [a, b, c]
}

/// Balanced set with phase A equal to `v`.
pub(crate) fn balanced(v: Complex64) -> [Complex64; 3] {
    [v, v * alpha2(), v * ALPHA]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn balanced_set_is_pure_positive() {
        let a = Complex64::from_polar(1.0, 0.0);
        let b = Complex64::from_polar(1.0, -2.0 * PI / 3.0);
        let c = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let (z, p, n) = phase_to_sequence(a, b, c);
        assert!(close(z, Complex64::new(0.0, 0.0), 1e-15));
        assert!(close(p, Complex64::new(1.0, 0.0), 1e-15));
        assert!(close(n, Complex64::new(0.0, 0.0), 1e-15));
    }

    #[test]
    fn common_mode_is_pure_zero() {
        let one = Complex64::new(1.0, 0.0);
        let (z, p, n) = phase_to_sequence(one, one, one);
        assert!(close(z, one, 1e-15));
        assert!(p.norm() < 1e-15 && n.norm() < 1e-15);
    }

    #[test]
    fn alpha_is_unit_rotation() {
        assert!(close(ALPHA, Complex64::from_polar(1.0, 2.0 * PI / 3.0), 1e-15));
        assert!(close(ALPHA * ALPHA * ALPHA, Complex64::new(1.0, 0.0), 1e-15));
    }

    #[test]
    fn balanced_helper_matches_polar() {
        let v = Complex64::from_polar(1.02, 0.3);
        let s = to_seq(balanced(v));
        assert!(close(s[1], v, 1e-15));
        assert!(s[0].norm() < 1e-15 && s[2].norm() < 1e-15);
    }
}
