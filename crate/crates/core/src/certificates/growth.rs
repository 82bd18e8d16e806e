use crate::expr::{Expr, Var};
use crate::function_space::{Grid, DEFAULT_NODES};
use crate::homeomorphism::{Homeomorphism, Kind};

use super::{
    box_kv, depends_only, eval, kv, kv_num, kv_opt, CertificateError, Condition, SampleBox,
    Verdict, DERIVATIVE_TOL, SAMPLE_SLACK,
};

/// Growth hypothesis for the Dirichlet problem with bounded `φ`:
/// `|f(t,x,y)| ≤ f(t,x,y)·n(x) + h(t)` with `h ≥ 0`, `‖h‖_{L¹} < a/2`,
/// `n(0) = 0` and `φ(y)·n'(x)·y ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthCertificate {
    pub h: Expr,
    pub n: Expr,
    pub dn: Expr,
    pub sample_box: SampleBox,
    pub verdict: Verdict,
    pub h_l1: f64,
    pub half_a: f64,
    /// `max |φ⁻¹(±2‖h‖_{L¹})|`, bound on `‖u'‖∞`; undefined when `2‖h‖_{L¹} ≥ a`.
    pub l: Option<f64>,
    /// `L + L·T`, bound on `‖u‖₁`.
    pub c1_bound: Option<f64>,
}

impl GrowthCertificate {
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        kv(&mut out, "certificate", "growth");
        self.verdict.write_kv(&mut out);
        kv(&mut out, "h", &self.h);
        kv(&mut out, "n", &self.n);
        kv(&mut out, "dn", &self.dn);
        kv_num(&mut out, "h_l1", self.h_l1);
        kv_num(&mut out, "half_a", self.half_a);
        kv_opt(&mut out, "L", self.l);
        kv_opt(&mut out, "c1_bound", self.c1_bound);
        box_kv(&mut out, &self.sample_box);
        kv_num(&mut out, "sample_slack", SAMPLE_SLACK);
        out
    }
}

/// Checks the growth hypothesis on a sample box and computes `L` and the
/// C¹ bound `L + LT`. Without an explicit box, `X = Y = max(10, 2(L + LT))`.
pub fn check_growth(
    phi: &Homeomorphism,
    f: &Expr,
    h: &Expr,
    n: &Expr,
    dn: &Expr,
    length: f64,
    sample_box: Option<SampleBox>,
) -> Result<GrowthCertificate, CertificateError> {
    let Kind::Bounded { a } = phi.kind() else {
        return Err(CertificateError::WrongRegime {
            check: "the growth check",
            expected: "bounded",
            got: phi.to_string(),
        });
    };
    if !(length.is_finite() && length > 0.0) {
        return Err(CertificateError::BadLength(length));
    }
    depends_only(h, "h", &[Var::T])?;
    depends_only(n, "n", &[Var::U])?;
    depends_only(dn, "dn", &[Var::U])?;
    if let Some(b) = &sample_box {
        b.validate()?;
    }

    let grid = Grid::new(length, DEFAULT_NODES)
        .map_err(|e| CertificateError::InvalidBox(e.to_string()))?;
    let h_nodes = grid
        .nodes()
        .map(|t| eval(h, "h", t, 0.0, 0.0))
        .collect::<Result<Vec<_>, _>>()?;
    let h_l1 = grid.l1_norm(&h_nodes);
    let half_a = 0.5 * a;

    let applicable = h_l1 < half_a;
    let (l, c1_bound) = if applicable {
        let l = phi
            .apply_inverse(-2.0 * h_l1)?
            .abs()
            .max(phi.apply_inverse(2.0 * h_l1)?.abs());
        (Some(l), Some(l + l * length))
    } else {
        (None, None)
    };
    let sample_box = sample_box
        .unwrap_or_else(|| SampleBox::square(c1_bound.map_or(10.0, |b| (2.0 * b).max(10.0))));

    let cert = |verdict| GrowthCertificate {
        h: h.clone(),
        n: n.clone(),
        dn: dn.clone(),
        sample_box,
        verdict,
        h_l1,
        half_a,
        l,
        c1_bound,
    };

    let xs = sample_box.u_points();
    check_derivative(n, dn, &xs)?;
    if !applicable {
        return Ok(cert(Verdict::NotApplicable(format!(
            "h_l1 = {h_l1} >= a/2 = {half_a}"
        ))));
    }
    Ok(cert(sample_conditions(
        phi,
        f,
        h,
        n,
        dn,
        length,
        &sample_box,
    )?))
}

/// Central-difference cross-check of `dn` against `n` at the `u` samples.
fn check_derivative(n: &Expr, dn: &Expr, xs: &[f64]) -> Result<(), CertificateError> {
    for &x in xs {
        let delta = f64::EPSILON.cbrt() * x.abs().max(1.0);
        let fd = (eval(n, "n", 0.0, x + delta, 0.0)? - eval(n, "n", 0.0, x - delta, 0.0)?)
            / (2.0 * delta);
        let d = eval(dn, "dn", 0.0, x, 0.0)?;
        if (d - fd).abs() > DERIVATIVE_TOL * d.abs().max(fd.abs()).max(1.0) {
            return Err(CertificateError::DerivativeMismatch { x, dn: d, fd });
        }
    }
    Ok(())
}

fn sample_conditions(
    phi: &Homeomorphism,
    f: &Expr,
    h: &Expr,
    n: &Expr,
    dn: &Expr,
    length: f64,
    sample_box: &SampleBox,
) -> Result<Verdict, CertificateError> {
    let fail = |t, x, y, condition| Ok(Verdict::FailedAt { t, x, y, condition });

    if eval(n, "n", 0.0, 0.0, 0.0)?.abs() > SAMPLE_SLACK {
        return fail(0.0, 0.0, 0.0, Condition::NZeroAtOrigin);
    }

    let ts = sample_box.t_points(length);
    let xs = sample_box.u_points();
    let ys = sample_box.v_points();
    let hs = ts
        .iter()
        .map(|&t| eval(h, "h", t, 0.0, 0.0))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some((&t, _)) = ts.iter().zip(&hs).find(|(_, &hv)| hv < -SAMPLE_SLACK) {
        return fail(t, 0.0, 0.0, Condition::HNonNegative);
    }

    let ns = xs
        .iter()
        .map(|&x| eval(n, "n", 0.0, x, 0.0))
        .collect::<Result<Vec<_>, _>>()?;
    let dns = xs
        .iter()
        .map(|&x| eval(dn, "dn", 0.0, x, 0.0))
        .collect::<Result<Vec<_>, _>>()?;
    let phis = ys
        .iter()
        .map(|&y| phi.apply(y))
        .collect::<Result<Vec<_>, _>>()?;
    for (&x, &d) in xs.iter().zip(&dns) {
        for (&y, &p) in ys.iter().zip(&phis) {
            if p * d * y < -SAMPLE_SLACK {
                return fail(0.0, x, y, Condition::FluxMonotone);
            }
        }
    }

    for (&t, &hv) in ts.iter().zip(&hs) {
        for (&x, &nv) in xs.iter().zip(&ns) {
            for &y in &ys {
                let fv = eval(f, "f", t, x, y)?;
                let rhs = fv * nv + hv;
                // The slack scales with the terms so that exact equality
                // cases survive rounding of large products.
                let slack = SAMPLE_SLACK * (1.0 + (fv * nv).abs() + hv.abs());
                if fv.abs() > rhs + slack {
                    return fail(t, x, y, Condition::GrowthBound);
                }
            }
        }
    }
    Ok(Verdict::CheckedOnGrid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    fn example(t: f64) -> GrowthCertificate {
        let phi = Homeomorphism::mean_curvature(1.0).unwrap();
        check_growth(&phi, &e("u - 2"), &e("4"), &e("u"), &e("1"), t, None).unwrap()
    }

    #[test]
    fn worked_example_passes() {
        let c = example(0.1);
        assert_eq!(c.verdict, Verdict::CheckedOnGrid);
        assert!((c.h_l1 - 0.4).abs() <= 1e-12);
        let l = c.l.unwrap();
        assert!((l - 4.0 / 3.0).abs() <= 1e-12, "{l}");
        assert!((c.c1_bound.unwrap() - l * 1.1).abs() <= 1e-12);
        assert_eq!(c.sample_box.x, 10.0);
        let text = c.to_key_value();
        assert!(text.contains("verdict=checked_on_grid\n"));
        assert!(text.contains("L=1.333333333333"));
    }

    #[test]
    fn threshold_is_not_applicable() {
        let c = example(0.2);
        match &c.verdict {
            Verdict::NotApplicable(msg) => assert!(msg.contains(">= a/2 = 0.5"), "{msg}"),
            v => panic!("{v:?}"),
        }
        assert!(c.l.is_none());
    }

    #[test]
    fn failures_carry_witnesses() {
        let phi = Homeomorphism::mean_curvature(1.0).unwrap();
        let b = Some(SampleBox::new(2.0, 2.0, 21).unwrap());
        // n(0) ≠ 0
        let c = check_growth(&phi, &e("u - 2"), &e("4"), &e("u + 1"), &e("1"), 0.1, b).unwrap();
        assert!(matches!(
            c.verdict,
            Verdict::FailedAt {
                condition: Condition::NZeroAtOrigin,
                ..
            }
        ));
        // dn of the wrong sign
        let c = check_growth(&phi, &e("0"), &e("1"), &e("-u"), &e("-1"), 0.1, b).unwrap();
        assert!(matches!(
            c.verdict,
            Verdict::FailedAt {
                condition: Condition::FluxMonotone,
                ..
            }
        ));
        // h too small for the growth bound
        let c = check_growth(&phi, &e("u - 2"), &e("1"), &e("u"), &e("1"), 0.1, b).unwrap();
        assert!(matches!(
            c.verdict,
            Verdict::FailedAt {
                condition: Condition::GrowthBound,
                ..
            }
        ));
        // negative h
        let c = check_growth(&phi, &e("0"), &e("1 - 30*t"), &e("u"), &e("1"), 0.1, b).unwrap();
        assert!(matches!(
            c.verdict,
            Verdict::FailedAt {
                condition: Condition::HNonNegative,
                ..
            }
        ));
    }

    #[test]
    fn preconditions() {
        let phi = Homeomorphism::mean_curvature(1.0).unwrap();
        let r = check_growth(&phi, &e("u"), &e("4"), &e("u^2"), &e("u"), 0.1, None);
        assert!(matches!(
            r,
            Err(CertificateError::DerivativeMismatch { .. })
        ));
        let r = check_growth(
            &Homeomorphism::identity(),
            &e("u"),
            &e("4"),
            &e("u"),
            &e("1"),
            0.1,
            None,
        );
        assert!(matches!(r, Err(CertificateError::WrongRegime { .. })));
        let r = check_growth(&phi, &e("u"), &e("u"), &e("u"), &e("1"), 0.1, None);
        assert!(matches!(
            r,
            Err(CertificateError::BadDependency { key: "h", .. })
        ));
    }

    #[test]
    fn constants_are_reproducible() {
        let (a, b) = (example(0.1), example(0.1));
        assert_eq!(a.l.unwrap().to_bits(), b.l.unwrap().to_bits());
        assert_eq!(a.to_key_value(), b.to_key_value());
    }
}
