//! General-purpose dense matrix exponential.
//!
//! [`oracle_expm`] implements scaling-and-squaring with diagonal Padé
//! approximants (the Higham 2005 degree/scale selection used by most
//! numerical libraries). It makes no use of the closed-form results
//! elsewhere in this crate, so it serves as an independent oracle for
//! them: any structure-exploiting exponential can be checked against it.

use crate::error::{Error, Result};
use crate::operators::{all_finite, identity};
use crate::{C64, CMat};

/// Padé numerator coefficients for degree 3, 5, 7, 9 and 13 approximants.
const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Degree-selection thresholds on the scaled one-norm.
const THETA3: f64 = 1.495_585_217_958_292e-2;
const THETA5: f64 = 2.539_398_330_063_23e-1;
const THETA7: f64 = 9.504_178_996_162_932e-1;
const THETA9: f64 = 2.097_847_961_257_068;
const THETA13: f64 = 5.371_920_351_148_152;

/// Exponential `exp(scale · x)` of a dense complex matrix.
///
/// Errors if `x` is not square or if `scale · x` contains non-finite
/// entries. For anti-Hermitian `scale · x` of moderate norm the result is
/// unitary to better than `1e-12`.
pub fn oracle_expm(x: &CMat, scale: C64) -> Result<CMat> {
    if x.nrows() != x.ncols() {
        return Err(Error::Dimension {
            context: "oracle_expm",
            left: x.nrows(),
            right: x.ncols(),
        });
    }
    let m = x.mapv(|z| scale * z);
    if !all_finite(&m) {
        return Err(Error::NonFinite {
            context: "oracle_expm",
        });
    }
    let norm = one_norm(&m);
    if norm <= THETA9 {
        let coeffs: &[f64] = if norm <= THETA3 {
            &B3
        } else if norm <= THETA5 {
            &B5
        } else if norm <= THETA7 {
            &B7
        } else {
            &B9
        };
        return pade_low(&m, coeffs);
    }
    // Scale down by a power of two, apply the degree-13 approximant, then
    // square back up.
    let s = ((norm / THETA13).log2().ceil()).max(0.0) as u32;
    let factor = C64::new((0.5f64).powi(s as i32), 0.0);
    let scaled = m.mapv(|z| factor * z);
    let mut result = pade13(&scaled)?;
    for _ in 0..s {
        result = result.dot(&result);
    }
    Ok(result)
}

/// One-norm (maximum absolute column sum).
pub fn one_norm(m: &CMat) -> f64 {
    let mut best = 0.0f64;
    for col in m.columns() {
        let sum: f64 = col.iter().map(|z| z.norm()).sum();
        best = best.max(sum);
    }
    best
}

/// Evaluate a diagonal Padé approximant of degree `coeffs.len() - 1 ∈
/// {3, 5, 7, 9}` using explicit even powers.
fn pade_low(m: &CMat, coeffs: &[f64]) -> Result<CMat> {
    let d = m.nrows();
    let eye = identity(d);
    // Even powers m^0, m^2, m^4, ...
    let m2 = m.dot(m);
    let mut even_pows: Vec<CMat> = vec![eye.clone(), m2.clone()];
    let n_even = coeffs.len() / 2;
    while even_pows.len() < n_even {
        let next = even_pows.last().unwrap().dot(&m2);
        even_pows.push(next);
    }
    let mut u_poly = CMat::zeros((d, d));
    let mut v_poly = CMat::zeros((d, d));
    for (k, pow) in even_pows.iter().enumerate() {
        u_poly = u_poly + pow.mapv(|z| z * coeffs[2 * k + 1]);
        v_poly = v_poly + pow.mapv(|z| z * coeffs[2 * k]);
    }
    let u = m.dot(&u_poly);
    solve(&(&v_poly - &u), &(&v_poly + &u))
}

/// Degree-13 Padé approximant with the factored evaluation scheme.
fn pade13(m: &CMat) -> Result<CMat> {
    let d = m.nrows();
    let eye = identity(d);
    let m2 = m.dot(m);
    let m4 = m2.dot(&m2);
    let m6 = m4.dot(&m2);
    let b = &B13;
    let u_inner =
        m6.mapv(|z| z * b[13]) + m4.mapv(|z| z * b[11]) + m2.mapv(|z| z * b[9]);
    let u_poly = m6.dot(&u_inner)
        + m6.mapv(|z| z * b[7])
        + m4.mapv(|z| z * b[5])
        + m2.mapv(|z| z * b[3])
        + eye.mapv(|z| z * b[1]);
    let u = m.dot(&u_poly);
    let v_inner =
        m6.mapv(|z| z * b[12]) + m4.mapv(|z| z * b[10]) + m2.mapv(|z| z * b[8]);
    let v = m6.dot(&v_inner)
        + m6.mapv(|z| z * b[6])
        + m4.mapv(|z| z * b[4])
        + m2.mapv(|z| z * b[2])
        + eye.mapv(|z| z * b[0]);
    solve(&(&v - &u), &(&v + &u))
}

/// Solve `a · x = b` by LU decomposition with partial pivoting.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::Dimension {
            context: "solve",
            left: a.ncols(),
            right: b.nrows(),
        });
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        // Partial pivot on the largest remaining entry in column k.
        let mut pivot_row = k;
        let mut pivot_mag = lu[(k, k)].norm();
        for r in k + 1..n {
            let mag = lu[(r, k)].norm();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = r;
            }
        }
        if pivot_mag == 0.0 || !pivot_mag.is_finite() {
            return Err(Error::Numeric { context: "solve" });
        }
        if pivot_row != k {
            for c in 0..n {
                lu.swap((k, c), (pivot_row, c));
            }
            for c in 0..x.ncols() {
                x.swap((k, c), (pivot_row, c));
            }
        }
        let pivot = lu[(k, k)];
        for r in k + 1..n {
            let factor = lu[(r, k)] / pivot;
            lu[(r, k)] = factor;
            if factor != C64::new(0.0, 0.0) {
                for c in k + 1..n {
                    let sub = factor * lu[(k, c)];
                    lu[(r, c)] -= sub;
                }
                for c in 0..x.ncols() {
                    let sub = factor * x[(k, c)];
                    x[(r, c)] -= sub;
                }
            }
        }
    }
    // Back substitution.
    for c in 0..x.ncols() {
        for k in (0..n).rev() {
            let mut acc = x[(k, c)];
            for j in k + 1..n {
                acc -= lu[(k, j)] * x[(j, c)];
            }
            x[(k, c)] = acc / lu[(k, k)];
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{dagger, max_abs_diff, unitarity_defect};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const I: C64 = C64::new(0.0, 1.0);
    const ONE: C64 = C64::new(1.0, 0.0);
    const ZERO: C64 = C64::new(0.0, 0.0);

    fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> CMat {
        CMat::from_shape_fn((d, d), |_| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn random_anti_hermitian(rng: &mut ChaCha8Rng, d: usize) -> CMat {
        let m = random_matrix(rng, d);
        let md = dagger(&m);
        (m - md).mapv(|z| 0.5 * z)
    }

    #[test]
    fn exponential_of_zero_is_identity() {
        let x = CMat::zeros((5, 5));
        let e = oracle_expm(&x, ONE).unwrap();
        assert_eq!(max_abs_diff(&e, &identity(5)), 0.0);
    }

    #[test]
    fn matches_two_by_two_rotation() {
        // exp(-iθ σ₁) = cos θ · 1 - i sin θ · σ₁.
        for &theta in &[0.1, 0.7, 2.9, 11.3] {
            let sx = ndarray::array![[ZERO, ONE], [ONE, ZERO]];
            let e = oracle_expm(&sx, -I * theta).unwrap();
            let c = theta.cos();
            let s = theta.sin();
            let expect = ndarray::array![
                [C64::new(c, 0.0), C64::new(0.0, -s)],
                [C64::new(0.0, -s), C64::new(c, 0.0)]
            ];
            assert!(
                max_abs_diff(&e, &expect) < 1e-14,
                "theta = {theta}: dev {}",
                max_abs_diff(&e, &expect)
            );
        }
    }

    #[test]
    fn matches_nilpotent_closed_form() {
        let x = ndarray::array![[ZERO, ONE], [ZERO, ZERO]];
        let e = oracle_expm(&x, ONE).unwrap();
        let expect = ndarray::array![[ONE, ONE], [ZERO, ONE]];
        assert!(max_abs_diff(&e, &expect) < 1e-15);
    }

    #[test]
    fn matches_diagonal_closed_form() {
        let lambdas = [C64::new(0.3, -1.2), C64::new(-2.0, 0.4), C64::new(0.0, 3.0)];
        let mut x = CMat::zeros((3, 3));
        let mut expect = CMat::zeros((3, 3));
        for (i, l) in lambdas.iter().enumerate() {
            x[(i, i)] = *l;
            expect[(i, i)] = l.exp();
        }
        let e = oracle_expm(&x, ONE).unwrap();
        assert!(max_abs_diff(&e, &expect) < 1e-14);
    }

    #[test]
    fn anti_hermitian_input_gives_unitary_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &d in &[2usize, 8, 33, 64] {
            let x = random_anti_hermitian(&mut rng, d);
            let e = oracle_expm(&x, ONE).unwrap();
            let defect = unitarity_defect(&e);
            assert!(defect < 1e-12, "d = {d}: defect {defect:e}");
        }
    }

    #[test]
    fn inverse_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_anti_hermitian(&mut rng, 24);
        let e = oracle_expm(&x, ONE).unwrap();
        let einv = oracle_expm(&x, -ONE).unwrap();
        assert!(max_abs_diff(&e.dot(&einv), &identity(24)) < 1e-12);
    }

    #[test]
    fn semigroup_property_through_scaling_branch() {
        // Norm ≈ 40 forces the scaling-and-squaring path.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x = random_anti_hermitian(&mut rng, 16).mapv(|z| 20.0 * z);
        let e1 = oracle_expm(&x, ONE).unwrap();
        let e2 = oracle_expm(&x, C64::new(2.0, 0.0)).unwrap();
        assert!(max_abs_diff(&e1.dot(&e1), &e2) < 1e-10);
    }

    #[test]
    fn rejects_non_finite_input() {
        let mut x = CMat::zeros((2, 2));
        x[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(
            oracle_expm(&x, ONE),
            Err(Error::NonFinite { .. })
        ));
        let y = CMat::zeros((2, 3));
        assert!(oracle_expm(&y, ONE).is_err());
    }

    #[test]
    fn matches_external_reference_values() {
        // Frozen reference: exp(-i H) for the fixed Hermitian matrix
        //   H = [[0.7, 0.2+0.1i, 0, 0.3i],
        //        [0.2-0.1i, -0.4, 0.5, 0],
        //        [0, 0.5, 0.1, 1.1],
        //        [-0.3i, 0, 1.1, -0.9]]
        // computed with an independent implementation (scipy.linalg.expm,
        // SciPy 1.15.3), entries rounded to 15 decimal digits.
        let h = ndarray::array![
            [
                C64::new(0.7, 0.0),
                C64::new(0.2, 0.1),
                ZERO,
                C64::new(0.0, 0.3)
            ],
            [
                C64::new(0.2, -0.1),
                C64::new(-0.4, 0.0),
                C64::new(0.5, 0.0),
                ZERO
            ],
            [ZERO, C64::new(0.5, 0.0), C64::new(0.1, 0.0), C64::new(1.1, 0.0)],
            [
                C64::new(0.0, -0.3),
                ZERO,
                C64::new(1.1, 0.0),
                C64::new(-0.9, 0.0)
            ]
        ];
        let e = oracle_expm(&h, -I).unwrap();
        let expect = ndarray::array![
            [
                C64::new(0.707334627019921, -0.629111931832983),
                C64::new(0.035789432622970, -0.193139295635440),
                C64::new(-0.043520984905854, -0.150485389622292),
                C64::new(0.199873787251847, 0.028684005832322)
            ],
            [
                C64::new(-0.091804439777679, -0.159285090627219),
                C64::new(0.792342651754028, 0.364127709887908),
                C64::new(0.036198775372581, -0.374608619321013),
                C64::new(-0.223557723520067, -0.119097913880230)
            ],
            [
                C64::new(-0.040777377601212, 0.164001686473693),
                C64::new(0.055646103664853, -0.372269938748666),
                C64::new(0.384219907269261, -0.221006361101864),
                C64::new(0.313079767648875, -0.731622557375165)
            ],
            [
                C64::new(-0.203771588205757, 0.003728207988131),
                C64::new(-0.233127334765838, -0.070644969623578),
                C64::new(0.321919462327181, -0.730559520751372),
                C64::new(0.156491351059308, 0.487119367111697)
            ]
        ];
        let dev = max_abs_diff(&e, &expect);
        assert!(dev < 5e-14, "deviation from frozen reference: {dev:e}");
    }
}
