//! Mamdani fuzzy engine that schedules the feedback-filter gain from the
//! tracking error and its rate.
//!
//! Both inputs live on the normalized universe `[0,1]` with four triangular
//! terms (Z, VS, S, L); the output (the filter coefficient `k_f`) has six
//! terms (Z, VS, S, M, L, VL). The 4×4 rule base is fixed; the membership
//! shapes are decoded from a 32-parameter vector so an optimizer can tune
//! them. Inference is min-AND, max-aggregation, centroid defuzzification on
//! a 201-point grid; the scheduled gain is `K = (1/k_f)·I` with a deadband
//! fallback near zero error.

use alloc::vec::Vec;

/// Number of tunable membership parameters.
pub const PARAM_DIM: usize = 32;
/// Points in the defuzzification grid on `[0,1]`.
const CENTROID_GRID: usize = 201;

/// Triangular membership function `(left foot, peak, right foot)` on the
/// normalized universe, with shoulder conventions for degenerate feet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangleMF {
    /// Left foot.
    pub a: f64,
    /// Peak.
    pub b: f64,
    /// Right foot.
    pub c: f64,
}

impl TriangleMF {
    /// Builds a triangle, sorting the three values and clamping them to
    /// `[0,1]` (the repair rule, total on any input).
    pub fn repaired(a: f64, b: f64, c: f64) -> Self {
        let mut v = [a, b, c];
        // Simple 3-element sort; NaNs are pushed to the clamp below.
        if v[0] > v[1] {
            v.swap(0, 1);
        }
        if v[1] > v[2] {
            v.swap(1, 2);
        }
        if v[0] > v[1] {
            v.swap(0, 1);
        }
        TriangleMF {
            a: v[0].clamp(0.0, 1.0),
            b: v[1].clamp(0.0, 1.0),
            c: v[2].clamp(0.0, 1.0),
        }
    }

    /// Membership degree at `x`; see [`tri_eval`].
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        tri_eval(self, x)
    }
}

/// Membership degree of `x` in a triangle: 0 outside `[a,c]`, 1 at the
/// peak, linear in between. Degenerate feet act as shoulders: `a = b` gives
/// degree 1 for every `x ≤ b`, `b = c` gives degree 1 for every `x ≥ b`.
pub fn tri_eval(mf: &TriangleMF, x: f64) -> f64 {
    if mf.a == mf.b && x <= mf.b {
        return 1.0;
    }
    if mf.b == mf.c && x >= mf.b {
        return 1.0;
    }
    if x <= mf.a || x >= mf.c {
        return 0.0;
    }
    if x == mf.b {
        return 1.0;
    }
    if x < mf.b {
        (x - mf.a) / (mf.b - mf.a)
    } else {
        (mf.c - x) / (mf.c - mf.b)
    }
}

/// The 32 membership parameters, each meaningful on `[0,1]`.
pub type FuzzyParamVector = [f64; PARAM_DIM];

/// Decoded membership families for the two inputs and the output.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodedMfs {
    /// Error-input terms, ascending: Z, VS, S, L.
    pub input_e: [TriangleMF; 4],
    /// Error-rate-input terms, ascending: Z, VS, S, L.
    pub input_de: [TriangleMF; 4],
    /// Output terms, ascending: Z, VS, S, M, L, VL.
    pub output: [TriangleMF; 6],
}

/// Decodes one input family from 8 parameters.
///
/// The two interior peaks come from the sorted pair `(q0, q1)`; the outer
/// terms are anchored at 0 (Z, a left shoulder) and 1 (L, a right
/// shoulder); the remaining parameters interpolate each foot between the
/// neighboring peaks and the universe edges. Every choice of parameters
/// yields sorted triangles that jointly cover `[0,1]`.
fn decode_input(q: &[f64]) -> [TriangleMF; 4] {
    let qc: Vec<f64> = q.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let (b_vs, b_s) = if qc[0] <= qc[1] {
        (qc[0], qc[1])
    } else {
        (qc[1], qc[0])
    };
    let c_z = b_vs + qc[2] * (b_s - b_vs);
    let a_vs = qc[3] * b_vs;
    let c_vs = b_s + qc[4] * (1.0 - b_s);
    let a_s = b_vs * (1.0 - qc[5]);
    let c_s = b_s + qc[6] * (1.0 - b_s);
    let a_l = b_s - qc[7] * (b_s - b_vs);
    [
        TriangleMF { a: 0.0, b: 0.0, c: c_z },
        TriangleMF { a: a_vs, b: b_vs, c: c_vs },
        TriangleMF { a: a_s, b: b_s, c: c_s },
        TriangleMF { a: a_l, b: 1.0, c: 1.0 },
    ]
}

/// Decodes the output family from 16 parameters: six sorted peaks, six
/// half-widths scaled by a shared width factor, a shared skew splitting
/// each width between the feet, and edge anchors stretching the outermost
/// terms toward 0 and 1.
fn decode_output(q: &[f64]) -> [TriangleMF; 6] {
    let qc: Vec<f64> = q.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let mut pk = [qc[0], qc[1], qc[2], qc[3], qc[4], qc[5]];
    pk.sort_by(|x, y| x.partial_cmp(y).expect("clamped values are ordered"));
    let (lam, rho, s, kap) = (qc[12], qc[13], qc[14], qc[15]);
    let sw = 0.1 + 0.9 * s;
    core::array::from_fn(|i| {
        let hw = qc[6 + i];
        let mut a = pk[i] - sw * hw * kap;
        let mut c = pk[i] + sw * hw * (1.0 - kap);
        if i == 0 {
            a = lam * pk[0];
        }
        if i == 5 {
            c = pk[5] + rho * (1.0 - pk[5]);
        }
        a = a.clamp(0.0, pk[i]);
        c = c.clamp(pk[i], 1.0);
        TriangleMF { a, b: pk[i], c }
    })
}

/// Decodes a parameter vector into membership families, also returning the
/// repaired (clamped) vector. Repair is total and idempotent; the decoded
/// families are identical for `p` and for its repaired copy.
pub fn decode_and_repair(p: &FuzzyParamVector) -> (DecodedMfs, FuzzyParamVector) {
    let mut repaired = *p;
    for v in repaired.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    let mfs = DecodedMfs {
        input_e: decode_input(&repaired[0..8]),
        input_de: decode_input(&repaired[8..16]),
        output: decode_output(&repaired[16..32]),
    };
    (mfs, repaired)
}

/// The fixed 4×4 rule base over (error term, error-rate term), ascending
/// indices Z=0, VS=1, S=2, L=3; entries index the six output terms Z=0 …
/// VL=5. Symmetric in its two inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleBase {
    table: [[usize; 4]; 4],
}

impl Default for RuleBase {
    fn default() -> Self {
        RuleBase::standard()
    }
}

impl RuleBase {
    /// The standard rule base: output severity grows with either input;
    /// `(Z,Z) → Z`, `(L,L) → VL`.
    pub fn standard() -> Self {
        RuleBase {
            table: [[0, 1, 2, 3], [1, 2, 3, 4], [2, 3, 4, 5], [3, 4, 5, 5]],
        }
    }

    /// Output-term index fired by input-term pair `(i, j)`.
    #[inline]
    pub fn output_term(&self, i: usize, j: usize) -> usize {
        self.table[i][j]
    }
}

/// Constants of the gain schedule built around the fuzzy engine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterSchedule {
    /// Scaling from `‖e‖∞` to the normalized error input.
    pub k_p: f64,
    /// Scaling from `‖ė‖∞` to the normalized rate input.
    pub k_d: f64,
    /// Error deadband below which the fallback gain applies.
    pub k_e: f64,
    /// Fallback diagonal gain inside the deadband.
    pub k_bar: f64,
    /// Floor on the defuzzified coefficient (caps the gain at `1/k_f_min`).
    pub k_f_min: f64,
}

impl Default for FilterSchedule {
    fn default() -> Self {
        FilterSchedule {
            k_p: 3.45,
            k_d: 0.05,
            k_e: 0.09,
            k_bar: 10.0,
            k_f_min: 0.01,
        }
    }
}

/// Mamdani inference of the filter coefficient from normalized inputs.
///
/// Rule strength is the min of the two antecedent degrees; strengths
/// aggregate per output term by max; the output is the centroid of the
/// union of clipped output triangles sampled at 201 points, clamped below
/// by `k_f_min`. When no rule fires (possible only for hand-built
/// families; decoded families cover the universe), the previous
/// coefficient is returned if available, else the centroid of the lowest
/// output term.
pub fn infer_kf(
    e_norm: f64,
    de_norm: f64,
    mfs: &DecodedMfs,
    rules: &RuleBase,
    k_f_min: f64,
    prev_kf: Option<f64>,
) -> f64 {
    let en = e_norm.clamp(0.0, 1.0);
    let dn = de_norm.clamp(0.0, 1.0);
    let mu_e: [f64; 4] = core::array::from_fn(|i| mfs.input_e[i].eval(en));
    let mu_de: [f64; 4] = core::array::from_fn(|j| mfs.input_de[j].eval(dn));
    let mut strength = [0.0f64; 6];
    for i in 0..4 {
        if mu_e[i] == 0.0 {
            continue;
        }
        for j in 0..4 {
            let w = mu_e[i].min(mu_de[j]);
            let k = rules.output_term(i, j);
            if w > strength[k] {
                strength[k] = w;
            }
        }
    }
    let fallback = |prev: Option<f64>| {
        prev.unwrap_or_else(|| {
            let z = &mfs.output[0];
            (z.a + z.b + z.c) / 3.0
        })
    };
    if strength.iter().all(|s| *s == 0.0) {
        return fallback(prev_kf).max(k_f_min);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..CENTROID_GRID {
        let y = k as f64 / (CENTROID_GRID - 1) as f64;
        let mut m = 0.0f64;
        for (term, s) in mfs.output.iter().zip(strength.iter()) {
            if *s == 0.0 {
                continue;
            }
            let v = s.min(term.eval(y));
            if v > m {
                m = v;
            }
        }
        num += y * m;
        den += m;
    }
    if den == 0.0 {
        return fallback(prev_kf).max(k_f_min);
    }
    (num / den).max(k_f_min)
}

/// Scheduled diagonal feedback gain (one shared value for both channels).
///
/// Inside the error deadband (`‖e‖∞ ≤ k_e`) the gain is the fallback
/// `k_bar` and the stored coefficient is left untouched; outside it the
/// inputs are scaled, clamped, inferred, and the gain is the reciprocal of
/// the coefficient. `prev_kf` threads the engine's memory between calls.
pub fn schedule_gain(
    e: &[f64; 2],
    e_dot: &[f64; 2],
    sched: &FilterSchedule,
    mfs: &DecodedMfs,
    rules: &RuleBase,
    prev_kf: &mut Option<f64>,
) -> [f64; 2] {
    let e_inf = crate::numerics::inf_norm(e);
    if e_inf <= sched.k_e {
        return [sched.k_bar, sched.k_bar];
    }
    let de_inf = crate::numerics::inf_norm(e_dot);
    let en = (sched.k_p * e_inf).clamp(0.0, 1.0);
    let dn = (sched.k_d * de_inf).clamp(0.0, 1.0);
    let kf = infer_kf(en, dn, mfs, rules, sched.k_f_min, *prev_kf);
    *prev_kf = Some(kf);
    [1.0 / kf, 1.0 / kf]
}

/// Backward-difference rate estimate; the first sample (no previous error)
/// returns zero.
pub fn rate_estimate(e_now: &[f64; 2], e_prev: Option<&[f64; 2]>, dt: f64) -> [f64; 2] {
    assert!(dt > 0.0, "dt must be positive");
    match e_prev {
        None => [0.0, 0.0],
        Some(p) => [(e_now[0] - p[0]) / dt, (e_now[1] - p[1]) / dt],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Hand-built parameter vector: input peaks at 0.33/0.66 with midpoint
    /// overlaps, output peaks evenly spread with moderate widths.
    fn hand_params() -> FuzzyParamVector {
        let pin = [0.33, 0.66, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5];
        let pout = [
            0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.5, 0.5, 0.5, 0.5,
        ];
        let mut p = [0.0; PARAM_DIM];
        p[0..8].copy_from_slice(&pin);
        p[8..16].copy_from_slice(&pin);
        p[16..32].copy_from_slice(&pout);
        p
    }

    #[test]
    fn triangle_evaluation_conventions() {
        let mf = TriangleMF { a: 0.0, b: 0.5, c: 1.0 };
        assert_abs_diff_eq!(tri_eval(&mf, 0.25), 0.5, epsilon = 1e-15);
        assert_eq!(tri_eval(&mf, 0.5), 1.0);
        assert_eq!(tri_eval(&mf, 0.0), 0.0);
        assert_eq!(tri_eval(&mf, 1.0), 0.0);
        assert_eq!(tri_eval(&mf, -0.1), 0.0);
        assert_abs_diff_eq!(tri_eval(&mf, 0.75), 0.5, epsilon = 1e-15);

        // Left shoulder: a = b.
        let z = TriangleMF { a: 0.0, b: 0.0, c: 0.4 };
        assert_eq!(tri_eval(&z, 0.0), 1.0);
        assert_eq!(tri_eval(&z, -1.0), 1.0);
        assert_abs_diff_eq!(tri_eval(&z, 0.2), 0.5, epsilon = 1e-15);
        assert_eq!(tri_eval(&z, 0.4), 0.0);

        // Right shoulder: b = c.
        let l = TriangleMF { a: 0.6, b: 1.0, c: 1.0 };
        assert_eq!(tri_eval(&l, 1.0), 1.0);
        assert_eq!(tri_eval(&l, 2.0), 1.0);
        assert_abs_diff_eq!(tri_eval(&l, 0.8), 0.5, epsilon = 1e-15);
        assert_eq!(tri_eval(&l, 0.5), 0.0);

        // Fully degenerate point triangle is a constant shoulder pair.
        let pt = TriangleMF { a: 0.0, b: 0.0, c: 0.0 };
        assert_eq!(tri_eval(&pt, 0.7), 1.0);
        assert_eq!(tri_eval(&pt, -0.7), 1.0);
    }

    #[test]
    fn repaired_sorts_and_clamps() {
        let mf = TriangleMF::repaired(0.9, -0.2, 0.4);
        assert_eq!(mf, TriangleMF { a: 0.0, b: 0.4, c: 0.9 });
        let mf = TriangleMF::repaired(1.7, 1.2, 1.5);
        assert_eq!(mf, TriangleMF { a: 1.0, b: 1.0, c: 1.0 });
    }

    #[test]
    fn decode_hand_vector_matches_reference_shapes() {
        let (mfs, _) = decode_and_repair(&hand_params());
        let expect_in = [
            TriangleMF { a: 0.0, b: 0.0, c: 0.495 },
            TriangleMF { a: 0.165, b: 0.33, c: 0.83 },
            TriangleMF { a: 0.165, b: 0.66, c: 0.83 },
            TriangleMF { a: 0.495, b: 1.0, c: 1.0 },
        ];
        for (got, want) in mfs.input_e.iter().zip(expect_in.iter()) {
            assert_abs_diff_eq!(got.a, want.a, epsilon = 1e-15);
            assert_abs_diff_eq!(got.b, want.b, epsilon = 1e-15);
            assert_abs_diff_eq!(got.c, want.c, epsilon = 1e-15);
        }
        assert_eq!(mfs.input_e, mfs.input_de);
        let expect_out = [
            (0.0, 0.0, 0.0825),
            (0.1175, 0.2, 0.2825),
            (0.3175, 0.4, 0.4825),
            (0.5175, 0.6, 0.6825),
            (0.7175, 0.8, 0.8825),
            (0.9175, 1.0, 1.0),
        ];
        for (got, want) in mfs.output.iter().zip(expect_out.iter()) {
            assert_abs_diff_eq!(got.a, want.0, epsilon = 1e-15);
            assert_abs_diff_eq!(got.b, want.1, epsilon = 1e-15);
            assert_abs_diff_eq!(got.c, want.2, epsilon = 1e-15);
        }
    }

    #[test]
    fn inference_matches_reference_engine() {
        // Values computed independently with a scripted reference
        // implementation of the same engine, frozen here.
        let (mfs, _) = decode_and_repair(&hand_params());
        let rules = RuleBase::standard();
        let cases = [
            (0.0, 0.0, 0.025882352941176457),
            (0.2, 0.2, 0.293948354852146),
            (0.5, 0.5, 0.6022088567648166),
            (0.8, 0.8, 0.8052764431986252),
            (1.0, 1.0, 0.9741176470588232),
            (0.0, 1.0, 0.5999999999999998),
            (0.3, 0.7, 0.5695194391453318),
        ];
        for (en, dn, want) in cases {
            let got = infer_kf(en, dn, &mfs, &rules, 0.01, None);
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn no_fire_fallback_policy() {
        // Hand-built families whose input terms all live far from the query
        // point, so no rule fires.
        let far = TriangleMF { a: 0.9, b: 0.95, c: 0.97 };
        let mfs = DecodedMfs {
            input_e: [far; 4],
            input_de: [far; 4],
            output: decode_output(&hand_params()[16..32]),
        };
        let rules = RuleBase::standard();
        // Previous value wins when available.
        let kf = infer_kf(0.1, 0.1, &mfs, &rules, 0.01, Some(0.42));
        assert_eq!(kf, 0.42);
        // Otherwise the centroid of the lowest output term (0+0+0.0825)/3,
        // floored.
        let kf = infer_kf(0.1, 0.1, &mfs, &rules, 0.01, None);
        assert_abs_diff_eq!(kf, 0.0825 / 3.0, epsilon = 1e-15);
        let kf = infer_kf(0.1, 0.1, &mfs, &rules, 0.05, None);
        assert_eq!(kf, 0.05);
    }

    #[test]
    fn rule_table_is_symmetric_and_monotone() {
        let rules = RuleBase::standard();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(rules.output_term(i, j), rules.output_term(j, i));
                if j + 1 < 4 {
                    assert!(rules.output_term(i, j) <= rules.output_term(i, j + 1));
                }
            }
        }
        assert_eq!(rules.output_term(0, 0), 0);
        assert_eq!(rules.output_term(3, 3), 5);
    }

    #[test]
    fn symmetric_families_give_symmetric_inference() {
        // With identical membership families on both inputs and the
        // symmetric rule table, swapping the inputs must not change the
        // output — exactly, over the full 41×41 grid.
        let (mfs, _) = decode_and_repair(&hand_params());
        let rules = RuleBase::standard();
        for i in 0..41 {
            for j in 0..41 {
                let a = i as f64 / 40.0;
                let b = j as f64 / 40.0;
                let kf_ab = infer_kf(a, b, &mfs, &rules, 0.01, None);
                let kf_ba = infer_kf(b, a, &mfs, &rules, 0.01, None);
                assert!(
                    kf_ab == kf_ba,
                    "asymmetry at ({a},{b}): {kf_ab} vs {kf_ba}"
                );
            }
        }
    }

    #[test]
    fn diagonal_inference_grows_with_severity() {
        let (mfs, _) = decode_and_repair(&hand_params());
        let rules = RuleBase::standard();
        let low = infer_kf(0.0, 0.0, &mfs, &rules, 0.01, None);
        let high = infer_kf(1.0, 1.0, &mfs, &rules, 0.01, None);
        assert!(high >= low, "diagonal must be monotone: {low} vs {high}");
        assert!(high > 0.9 && low < 0.1);
    }

    #[test]
    fn decode_is_valid_and_repair_idempotent_for_random_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let p: FuzzyParamVector = core::array::from_fn(|_| rng.gen_range(-0.5..1.5));
            let (mfs, repaired) = decode_and_repair(&p);
            for v in repaired {
                assert!((0.0..=1.0).contains(&v));
            }
            let (mfs2, repaired2) = decode_and_repair(&repaired);
            assert_eq!(repaired, repaired2, "repair must be idempotent");
            assert_eq!(mfs, mfs2, "decode must agree on repaired input");
            for fam in [&mfs.input_e[..], &mfs.input_de[..], &mfs.output[..]] {
                for t in fam {
                    assert!(t.a <= t.b && t.b <= t.c, "unsorted triangle {t:?}");
                    assert!(t.a >= 0.0 && t.c <= 1.0, "triangle escapes universe {t:?}");
                }
            }
            // Coverage: some input term fires everywhere on the universe.
            for k in 0..=50 {
                let x = k as f64 / 50.0;
                let me = mfs.input_e.iter().map(|t| t.eval(x)).fold(0.0, f64::max);
                let md = mfs.input_de.iter().map(|t| t.eval(x)).fold(0.0, f64::max);
                assert!(me > 0.0, "error input uncovered at {x}");
                assert!(md > 0.0, "rate input uncovered at {x}");
            }
        }
    }

    #[test]
    fn gain_schedule_deadband_and_reciprocal() {
        let (mfs, _) = decode_and_repair(&hand_params());
        let rules = RuleBase::standard();
        let sched = FilterSchedule::default();
        let mut prev = None;
        // Inside the deadband: fallback gain, memory untouched.
        let k = schedule_gain(&[0.05, -0.02], &[9.0, 9.0], &sched, &mfs, &rules, &mut prev);
        assert_eq!(k, [10.0, 10.0]);
        assert_eq!(prev, None);
        // Outside: K = 1/k_f with scaled, clamped inputs.
        let e = [0.2, 0.0];
        let edot = [0.0, 0.0];
        let k = schedule_gain(&e, &edot, &sched, &mfs, &rules, &mut prev);
        let expect_kf = infer_kf(3.45 * 0.2, 0.0, &mfs, &rules, sched.k_f_min, None);
        assert_abs_diff_eq!(k[0], 1.0 / expect_kf, epsilon = 1e-12);
        assert_eq!(k[0], k[1], "one shared coefficient for both channels");
        assert_eq!(prev, Some(expect_kf));
    }

    #[test]
    fn gain_is_capped_by_the_floor() {
        let (mfs, _) = decode_and_repair(&hand_params());
        let rules = RuleBase::standard();
        // With the default floor the gain can never exceed 1/k_f_min = 100,
        // anywhere on the input grid.
        let sched = FilterSchedule::default();
        for i in 0..=20 {
            for j in 0..=20 {
                let kf = infer_kf(
                    i as f64 / 20.0,
                    j as f64 / 20.0,
                    &mfs,
                    &rules,
                    sched.k_f_min,
                    None,
                );
                assert!(kf >= sched.k_f_min);
                assert!(1.0 / kf <= 1.0 / sched.k_f_min);
            }
        }
        // A floor above every reachable centroid binds exactly.
        let tight = FilterSchedule { k_f_min: 0.98, ..FilterSchedule::default() };
        let mut prev = None;
        let k = schedule_gain(&[0.4, 0.0], &[0.0, 0.0], &tight, &mfs, &rules, &mut prev);
        assert_eq!(prev, Some(0.98));
        assert_eq!(k[0], 1.0 / 0.98);
    }

    #[test]
    fn rate_estimate_backward_difference() {
        assert_eq!(rate_estimate(&[0.3, -0.1], None, 0.01), [0.0, 0.0]);
        let d = rate_estimate(&[0.3, -0.1], Some(&[0.25, -0.05]), 0.01);
        assert_abs_diff_eq!(d[0], 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d[1], -5.0, epsilon = 1e-12);
    }
}
