use crate::expr::{Expr, Var};
use crate::function_space::{Grid, DEFAULT_NODES};
use crate::homeomorphism::{Homeomorphism, Kind};

use super::{
    box_kv, depends_only, eval, kv, kv_num, kv_opt, CertificateError, Condition, SampleBox,
    Verdict, SAMPLE_SLACK,
};

/// Sign hypotheses for the classic three-point problem: a minorant
/// `f ≥ c(t)` and slope thresholds `m1 < m2`.
///
/// The integral sign condition on `u'` is replaced by the stronger pointwise
/// surrogate `f > 0` for `v ≥ m2` and `f < 0` for `v ≤ m1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignCertificate {
    pub m1: f64,
    pub m2: f64,
    pub c: Expr,
    pub sample_box: SampleBox,
    pub verdict: Verdict,
    /// `‖c⁻‖_{L¹}`.
    pub c_minus_l1: f64,
    /// `max{|φ(m2)|, |φ(m1)|}`.
    pub l: f64,
    /// `max |φ⁻¹(±(L + 2‖c⁻‖_{L¹}))|`, bound on `‖u'‖∞`.
    pub r: Option<f64>,
    /// `r(2 + T)`, smallest admissible radius of the bounding ball.
    pub rho_min: Option<f64>,
}

impl SignCertificate {
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        kv(&mut out, "certificate", "signs");
        self.verdict.write_kv(&mut out);
        kv(&mut out, "sign_condition", "pointwise_surrogate");
        kv_num(&mut out, "m1", self.m1);
        kv_num(&mut out, "m2", self.m2);
        kv(&mut out, "c", &self.c);
        kv_num(&mut out, "c_minus_l1", self.c_minus_l1);
        kv_num(&mut out, "L", self.l);
        kv_opt(&mut out, "r", self.r);
        kv_opt(&mut out, "rho_min", self.rho_min);
        box_kv(&mut out, &self.sample_box);
        kv_num(&mut out, "sample_slack", SAMPLE_SLACK);
        out
    }
}

/// Checks the sign hypotheses on a sample box (the `v` samples always
/// include `m1` and `m2`) and computes `L`, `r` and `ρ_min`. Without an
/// explicit box, `X = Y = max(10, 2ρ_min)`.
pub fn check_signs(
    phi: &Homeomorphism,
    f: &Expr,
    m1: f64,
    m2: f64,
    c: &Expr,
    length: f64,
    sample_box: Option<SampleBox>,
) -> Result<SignCertificate, CertificateError> {
    if phi.kind() != Kind::Classic {
        return Err(CertificateError::WrongRegime {
            check: "the sign check",
            expected: "classic",
            got: phi.to_string(),
        });
    }
    if !(m1.is_finite() && m2.is_finite() && m1 < m2) {
        return Err(CertificateError::SlopeOrder { m1, m2 });
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(CertificateError::BadLength(length));
    }
    depends_only(c, "c", &[Var::T])?;
    if let Some(b) = &sample_box {
        b.validate()?;
    }

    let grid = Grid::new(length, DEFAULT_NODES)
        .map_err(|e| CertificateError::InvalidBox(e.to_string()))?;
    let c_minus = grid
        .nodes()
        .map(|t| eval(c, "c", t, 0.0, 0.0).map(|v| (-v).max(0.0)))
        .collect::<Result<Vec<_>, _>>()?;
    let c_minus_l1 = grid.integral(&c_minus);
    let l = phi.apply(m2)?.abs().max(phi.apply(m1)?.abs());
    let bound = l + 2.0 * c_minus_l1;
    let r = phi
        .apply_inverse(bound)?
        .abs()
        .max(phi.apply_inverse(-bound)?.abs());
    let rho_min = r * (2.0 + length);
    let sample_box = sample_box.unwrap_or_else(|| SampleBox::square((2.0 * rho_min).max(10.0)));

    let verdict = sample_conditions(f, m1, m2, c, length, &sample_box)?;
    let checked = verdict.is_checked();
    Ok(SignCertificate {
        m1,
        m2,
        c: c.clone(),
        sample_box,
        verdict,
        c_minus_l1,
        l,
        r: checked.then_some(r),
        rho_min: checked.then_some(rho_min),
    })
}

fn sample_conditions(
    f: &Expr,
    m1: f64,
    m2: f64,
    c: &Expr,
    length: f64,
    sample_box: &SampleBox,
) -> Result<Verdict, CertificateError> {
    let ts = sample_box.t_points(length);
    let xs = sample_box.u_points();
    let mut ys = sample_box.v_points();
    ys.extend([m1, m2]);
    for &t in &ts {
        let cv = eval(c, "c", t, 0.0, 0.0)?;
        for &x in &xs {
            for &y in &ys {
                let fv = eval(f, "f", t, x, y)?;
                let condition = if fv < cv - SAMPLE_SLACK {
                    Condition::Minorant
                } else if y >= m2 && !(fv > 0.0) {
                    Condition::PositiveAboveM2
                } else if y <= m1 && !(fv < 0.0) {
                    Condition::NegativeBelowM1
                } else {
                    continue;
                };
                return Ok(Verdict::FailedAt { t, x, y, condition });
            }
        }
    }
    Ok(Verdict::CheckedOnGrid)
}
