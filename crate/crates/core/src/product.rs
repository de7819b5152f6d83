//! Lifting c-frames on inner spaces `X_i` to the product `X × X_i`, and the
//! equivalence between c-woven product frames and c-fusion woven spans.

use num_complex::Complex64;

use crate::certify::{CertifyConfig, Certificate, TheoremId, Verdict};
use crate::error::{invalid, FrameError, Result};
use crate::frame::{CFrame, CFusionFrame, FrameBounds};
use crate::hilbert::{DiscretizedMeasureSpace, Operator};
use crate::weaving::{WeavingTable, WovenFamily};

/// Both sides of the lift.
#[derive(Debug, Clone)]
pub struct LiftedProduct {
    pub inner: Vec<CFrame>,
    pub outer: DiscretizedMeasureSpace,
    /// `weights[i][x]` is `v_i(x)`.
    pub weights: Vec<Vec<f64>>,
    /// `(span F_i, v_i)` at every outer node.
    pub fusion: WovenFamily,
    /// `v_i(x) F_i(y)` on `X × X_i` with product masses, node `(x, y)` at `x · |X_i| + y`.
    pub product_frames: Vec<CFrame>,
}

pub fn lift_product(
    cframes: &[CFrame],
    outer: &DiscretizedMeasureSpace,
    weights: &[Vec<f64>],
    rank_tol: f64,
) -> Result<LiftedProduct> {
    if cframes.len() < 2 {
        return Err(invalid("product lift needs at least 2 inner frames"));
    }
    if weights.len() != cframes.len() {
        return Err(FrameError::LengthMismatch {
            expected: cframes.len(),
            actual: weights.len(),
        });
    }
    let d = cframes[0].dim();
    let n = outer.node_count();
    let mut members = Vec::with_capacity(cframes.len());
    let mut product_frames = Vec::with_capacity(cframes.len());
    for (i, (frame, v)) in cframes.iter().zip(weights).enumerate() {
        if frame.dim() != d {
            return Err(FrameError::DimensionMismatch {
                expected: d,
                actual: frame.dim(),
            });
        }
        if v.len() != n {
            return Err(FrameError::LengthMismatch {
                expected: n,
                actual: v.len(),
            });
        }
        let span = frame.span(rank_tol)?;
        if span.dim() == 0 {
            return Err(invalid(format!("inner frame {i} is identically zero")));
        }
        members.push(CFusionFrame::new(outer.clone(), vec![span; n], v.clone())?);

        let vectors = v
            .iter()
            .flat_map(|&vx| frame.vectors().iter().map(move |f| f * Complex64::new(vx, 0.0)))
            .collect();
        product_frames.push(CFrame::new(outer.product(frame.space()), vectors)?);
    }
    Ok(LiftedProduct {
        inner: cframes.to_vec(),
        outer: outer.clone(),
        weights: weights.to_vec(),
        fusion: WovenFamily::new(members)?,
        product_frames,
    })
}

impl LiftedProduct {
    /// Weaving table of the product c-frames over outer-node partitions: each
    /// outer node carries its whole inner fiber.
    pub fn product_table(&self) -> Result<WeavingTable> {
        let d = self.fusion.dim();
        let n = self.outer.node_count();
        let terms = self
            .product_frames
            .iter()
            .zip(&self.inner)
            .map(|(pf, inner)| {
                let fiber = inner.space().node_count();
                (0..n)
                    .map(|x| {
                        let mut t = Operator::zeros(d, d);
                        for y in 0..fiber {
                            let node = x * fiber + y;
                            let f = &pf.vectors()[node];
                            t += (f * f.adjoint()) * Complex64::new(pf.space().weight(node), 0.0);
                        }
                        t
                    })
                    .collect()
            })
            .collect();
        WeavingTable::new(d, terms)
    }

    /// `(min_i A_{F_i}, max_i B_{F_i})` with lower bounds taken on each span.
    pub fn inner_bounds(&self, rank_tol: f64) -> Result<FrameBounds> {
        let all = self
            .inner
            .iter()
            .map(|f| f.sequence_bounds(rank_tol))
            .collect::<Result<Vec<_>>>()?;
        let lower = all.iter().map(|b| b.lower).fold(f64::INFINITY, f64::min);
        let upper = all.iter().map(|b| b.upper).fold(0.0, f64::max);
        Ok(FrameBounds::new(lower, upper))
    }
}

/// Checks `C' ≥ C/B`, `D' ≤ D/A`, `C ≥ A C'`, `D ≤ B D'` and that the product
/// side is woven exactly when the fusion side is.
///
/// `(C, D)` are the universal c-woven bounds of the product frames and
/// `(C', D')` those of the fusion family.
pub fn certify_product_equivalence(
    lifted: &LiftedProduct,
    cfg: &CertifyConfig,
) -> Result<Certificate> {
    let mut cert = Certificate {
        theorem: TheoremId::ProductEquivalence,
        hypotheses: Vec::new(),
        claimed: None,
        true_bounds: None,
        scope: "fusion family over outer-space partitions".into(),
        verdict: Verdict::Inapplicable,
        notes: Vec::new(),
    };
    let inner = lifted.inner_bounds(cfg.rank_tol)?;
    let (a, b) = (inner.lower, inner.upper);
    cert.record("A", a);
    cert.record("B", b);

    let product = lifted.product_table()?.universal_bounds(&cfg.strategy)?;
    let fusion = lifted.fusion.universal_bounds(&cfg.strategy)?;
    let (c, dd) = (product.lower, product.upper);
    let (cf, df) = (fusion.lower, fusion.upper);
    cert.record("C", c);
    cert.record("D", dd);
    cert.record("C_fusion", cf);
    cert.record("D_fusion", df);

    let tol = cfg.bound_tol;
    let checks = [
        ("C_fusion >= C / B", cf >= c / b - tol),
        ("D_fusion <= D / A", df <= dd / a + tol),
        ("C >= A * C_fusion", c >= a * cf - tol),
        ("D <= B * D_fusion", dd <= b * df + tol),
        (
            "product woven iff fusion woven",
            (c > cfg.frame_tol) == (cf > cfg.frame_tol),
        ),
    ];
    let mut ok = true;
    for (name, holds) in checks {
        if !holds {
            ok = false;
            cert.note(format!("violated: {name}"));
        }
    }
    if !product.certified || !fusion.certified {
        cert.note("true bounds come from a non-exhaustive search and are not certified");
    }
    cert.claimed = Some(FrameBounds::new(c / b, dd / a));
    cert.true_bounds = Some(fusion);
    cert.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{basis_vector, Vector, DEFAULT_RANK_TOL};
    use crate::instances::{discrete_gabor, GaborParams};

    fn standard_basis(d: usize) -> CFrame {
        let space = DiscretizedMeasureSpace::counting(d).unwrap();
        CFrame::new(space, (0..d).map(|i| basis_vector(d, i)).collect()).unwrap()
    }

    #[test]
    fn single_atom_reproduces_inner_frame() {
        let inner = standard_basis(2);
        let outer = DiscretizedMeasureSpace::counting(1).unwrap();
        let lifted = lift_product(
            &[inner.clone(), inner.clone()],
            &outer,
            &[vec![1.0], vec![1.0]],
            DEFAULT_RANK_TOL,
        )
        .unwrap();
        assert_eq!(lifted.product_frames[0].vectors(), inner.vectors());
        assert_eq!(lifted.fusion.member(0).unwrap().subspaces()[0].dim(), 2);
    }

    #[test]
    fn orthonormal_inner_frames_give_equal_bounds() {
        let inner = standard_basis(2);
        let outer = DiscretizedMeasureSpace::new(vec![1.0, 2.0]).unwrap();
        let lifted = lift_product(
            &[inner.clone(), inner],
            &outer,
            &[vec![1.0, 0.5], vec![2.0, 1.0]],
            DEFAULT_RANK_TOL,
        )
        .unwrap();
        let c = certify_product_equivalence(&lifted, &CertifyConfig::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Pass, "{:?}", c.notes);
        let (cc, dd) = (c.hypothesis("C").unwrap(), c.hypothesis("D").unwrap());
        assert!((cc - c.hypothesis("C_fusion").unwrap()).abs() < 1e-12);
        assert!((dd - c.hypothesis("D_fusion").unwrap()).abs() < 1e-12);
    }

    #[test]
    fn gabor_inner_frames() {
        let g = Vector::from_vec(vec![Complex64::new(1.0, 0.5), Complex64::new(-0.3, 0.2)]);
        let (f, scaled) = discrete_gabor(&GaborParams::full_lattice(g, Complex64::new(1.5, 0.0))).unwrap();
        let outer = DiscretizedMeasureSpace::new(vec![0.7, 1.3]).unwrap();
        let lifted =
            lift_product(&[f, scaled], &outer, &[vec![1.0, 2.0], vec![0.5, 1.0]], DEFAULT_RANK_TOL)
                .unwrap();
        let c = certify_product_equivalence(&lifted, &CertifyConfig::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Pass, "{:?}", c.notes);
    }

    #[test]
    fn rejects_bad_shapes() {
        let inner = standard_basis(2);
        let outer = DiscretizedMeasureSpace::counting(2).unwrap();
        assert!(lift_product(std::slice::from_ref(&inner), &outer, &[vec![1.0; 2]], 1e-10).is_err());
        assert!(lift_product(&[inner.clone(), inner.clone()], &outer, &[vec![1.0; 2]], 1e-10).is_err());
        assert!(lift_product(
            &[inner.clone(), inner.clone()],
            &outer,
            &[vec![1.0; 2], vec![1.0; 3]],
            1e-10
        )
        .is_err());
        let zero = CFrame::new(
            DiscretizedMeasureSpace::counting(1).unwrap(),
            vec![Vector::zeros(2)],
        )
        .unwrap();
        assert!(lift_product(&[inner, zero], &outer, &[vec![1.0; 2], vec![1.0; 2]], 1e-10).is_err());
    }
}
