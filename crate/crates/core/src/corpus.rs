//! Built-in example metrics with known answers.
//!
//! Name grammar (also accepted by the CLI as `corpus:<name>`):
//!   flatN            flat metric, euclidean signature (e.g. flat3)
//!   flatN[p,q]       flat metric of signature (p, q), p + q = N
//!   sphereN          round unit N-sphere, stereographic chart
//!   hyperbolicN      hyperbolic space of curvature −1, Poincaré ball chart
//!   example1         4-dim split-signature metric with a parallel nilpotent
//!                    endomorphism not commuting with the curvature
//!   example2         6-dim cone metric carrying a parallel nilpotent
//!                    endomorphism with three 2×2 Jordan blocks
//!   flat_projective_pairN   flat g together with a geodesically equivalent
//!                    ḡ (pullback of g under a projective map)
//!   realization(n,k,[k1,...])   (n+1)-dim cone R^k × cone(...) × ... with
//!                    prescribed mobility structure: D = k(k+1)/2 + ℓ,
//!                    ℓ = number of cone factors, each ki ≥ 3, Σki = n−k+1

use crate::cone::{build_cone_named, glue_product, verify_factor, VerifiedConeFactor};
use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::geometry::{MetricSpec, TensorField};

/// Expected facts about an entry, used by the verification suites.
#[derive(Clone, Debug, Default)]
pub struct Expected {
    pub d: Option<usize>,
    pub b: Option<f64>,
    pub k: Option<usize>,
    pub ell: Option<i64>,
    pub constant_curvature: bool,
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub metric: MetricSpec,
    /// companion (1,1)-tensor field, where the example carries one
    pub l_field: Option<TensorField>,
    /// cone function, where the metric is a cone in these coordinates
    pub v: Option<Expr>,
    /// companion second metric for pair analysis
    pub gbar: Option<MetricSpec>,
    /// the metric is already a cone over a virtual base of dim − 1
    pub is_cone_total: bool,
    pub expected: Expected,
}

/// Canonical names, one per family, used by `corpus list`.
pub fn list() -> Vec<&'static str> {
    vec![
        "flat3",
        "flat4[2,2]",
        "sphere2",
        "sphere3",
        "hyperbolic2",
        "hyperbolic3",
        "example1",
        "example2",
        "flat_projective_pair3",
        "realization(7,0,[4,4])",
        "realization(5,2,[4])",
        "realization(8,0,[3,3,3])",
        "realization(6,1,[3,3])",
    ]
}

/// Look up an entry by name.
pub fn get(name: &str) -> Result<CorpusEntry> {
    let bad = || Error::Malformed(format!("unknown corpus name `{name}`"));
    if let Some(rest) = name.strip_prefix("flat_projective_pair") {
        let n: usize = rest.parse().map_err(|_| bad())?;
        return flat_projective_pair(n);
    }
    if let Some(rest) = name.strip_prefix("flat") {
        let (n, sig) = parse_flat_params(rest).ok_or_else(bad)?;
        return flat(n, sig);
    }
    if let Some(rest) = name.strip_prefix("sphere") {
        let n: usize = rest.parse().map_err(|_| bad())?;
        return sphere(n);
    }
    if let Some(rest) = name.strip_prefix("hyperbolic") {
        let n: usize = rest.parse().map_err(|_| bad())?;
        return hyperbolic(n);
    }
    if name == "example1" {
        return example1();
    }
    if name == "example2" {
        return example2();
    }
    if let Some(rest) = name.strip_prefix("realization(") {
        let inner = rest.strip_suffix(')').ok_or_else(bad)?;
        let (n, k, partition) = parse_realization_params(inner).ok_or_else(bad)?;
        return realization(n, k, &partition);
    }
    Err(bad())
}

fn parse_flat_params(rest: &str) -> Option<(usize, Option<(usize, usize)>)> {
    if let Some((num, sig)) = rest.split_once('[') {
        let n: usize = num.parse().ok()?;
        let sig = sig.strip_suffix(']')?;
        let (p, q) = sig.split_once(',')?;
        Some((n, Some((p.trim().parse().ok()?, q.trim().parse().ok()?))))
    } else {
        Some((rest.parse().ok()?, None))
    }
}

fn parse_realization_params(inner: &str) -> Option<(usize, usize, Vec<usize>)> {
    let (n, rest) = inner.split_once(',')?;
    let (k, part) = rest.split_once(",[")?;
    let part = part.strip_suffix(']')?;
    let partition: Option<Vec<usize>> = part
        .split(',')
        .map(|s| s.trim().parse().ok())
        .collect();
    Some((
        n.trim().parse().ok()?,
        k.trim().parse().ok()?,
        partition?,
    ))
}

fn coord_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Flat metric of the given signature (defaults to euclidean).
pub fn flat(n: usize, signature: Option<(usize, usize)>) -> Result<CorpusEntry> {
    let (p, q) = signature.unwrap_or((n, 0));
    if p + q != n || n == 0 {
        return Err(Error::Malformed(format!(
            "flat{n}: signature ({p},{q}) does not sum to {n}"
        )));
    }
    let coords = coord_names("x", n);
    let coord_refs: Vec<&str> = coords.iter().map(|s| s.as_str()).collect();
    let mut comps = vec![Expr::Num(0.0); n * n];
    for i in 0..n {
        comps[i * n + i] = Expr::Num(if i < p { 1.0 } else { -1.0 });
    }
    let name = match signature {
        None => format!("flat{n}"),
        Some((p, q)) => format!("flat{n}[{p},{q}]"),
    };
    let mut metric = MetricSpec::new(&name, &coord_refs, comps, &vec![(-2.0, 2.0); n])?;
    metric.signature_hint = Some((p, q));
    let v = if q == 0 {
        // flat euclidean space is the cone over its unit sphere
        Some(half_norm_squared(&coords))
    } else {
        None
    };
    Ok(CorpusEntry {
        name,
        metric,
        l_field: None,
        v,
        gbar: None,
        is_cone_total: false,
        expected: Expected {
            d: Some((n + 1) * (n + 2) / 2),
            b: Some(0.0),
            constant_curvature: true,
            ..Default::default()
        },
    })
}

fn half_norm_squared(coords: &[String]) -> Expr {
    let src = coords
        .iter()
        .map(|c| format!("{c}^2"))
        .collect::<Vec<_>>()
        .join(" + ");
    parse(&format!("({src})/2")).unwrap()
}

fn conformal_round(n: usize, sign: &str, box_half: f64) -> Result<MetricSpec> {
    // 4 δ / (1 ± |x|²)²
    let coords = coord_names("x", n);
    let coord_refs: Vec<&str> = coords.iter().map(|s| s.as_str()).collect();
    let norm = coords
        .iter()
        .map(|c| format!("{c}^2"))
        .collect::<Vec<_>>()
        .join(" + ");
    let factor = format!("4/(1 {sign} ({norm}))^2");
    let mut comps = vec![Expr::Num(0.0); n * n];
    for i in 0..n {
        comps[i * n + i] = parse(&factor)?;
    }
    let label = if sign == "+" {
        format!("sphere{n}")
    } else {
        format!("hyperbolic{n}")
    };
    MetricSpec::new(&label, &coord_refs, comps, &vec![(-box_half, box_half); n])
}

/// Round unit sphere in stereographic coordinates.
pub fn sphere(n: usize) -> Result<CorpusEntry> {
    if n == 0 {
        return Err(Error::Malformed("sphere dimension must be >= 1".into()));
    }
    Ok(CorpusEntry {
        name: format!("sphere{n}"),
        metric: conformal_round(n, "+", 1.0)?,
        l_field: None,
        v: None,
        gbar: None,
        is_cone_total: false,
        expected: Expected {
            d: Some((n + 1) * (n + 2) / 2),
            b: Some(-1.0),
            constant_curvature: true,
            ..Default::default()
        },
    })
}

/// Hyperbolic space of curvature −1 in the Poincaré ball.
pub fn hyperbolic(n: usize) -> Result<CorpusEntry> {
    if n == 0 {
        return Err(Error::Malformed("hyperbolic dimension must be >= 1".into()));
    }
    Ok(CorpusEntry {
        name: format!("hyperbolic{n}"),
        metric: conformal_round(n, "-", 0.6)?,
        l_field: None,
        v: None,
        gbar: None,
        is_cone_total: false,
        expected: Expected {
            d: Some((n + 1) * (n + 2) / 2),
            b: Some(1.0),
            constant_curvature: true,
            ..Default::default()
        },
    })
}

/// 4-dim split-signature metric carrying a parallel self-adjoint nilpotent
/// endomorphism L with L·R ≠ 0.
pub fn example1() -> Result<CorpusEntry> {
    let metric = MetricSpec::from_strings(
        "example1",
        &["x1", "x2", "x3", "x4"],
        &[
            ("1,3", "x3*x4"),
            ("2,4", "x3*x4"),
            ("3,3", "x1*x4 + x2*x3"),
            ("4,4", "x1*x4 + x2*x3"),
        ],
        // box contains the reference point (1,1,2,3) and avoids x3·x4 = 0
        &[(0.5, 1.5), (0.5, 1.5), (1.5, 2.5), (2.5, 3.5)],
    )?;
    let mut l_comps = vec![Expr::Num(0.0); 16];
    l_comps[2] = Expr::Num(1.0); // L^1_3
    l_comps[7] = Expr::Num(1.0); // L^2_4
    Ok(CorpusEntry {
        name: "example1".into(),
        metric,
        l_field: Some(TensorField {
            upper: vec![true, false],
            comps: l_comps,
        }),
        v: None,
        gbar: None,
        is_cone_total: false,
        expected: Expected::default(),
    })
}

/// 6-dim cone metric (coordinates r, s, x1..x4) carrying a parallel
/// self-adjoint nilpotent endomorphism with three 2×2 Jordan blocks.
pub fn example2() -> Result<CorpusEntry> {
    let f = "r^2*exp(2*s)*(x1*x4 + x2*x3) + r^2*x3*x4";
    let metric = MetricSpec::from_strings(
        "example2",
        &["r", "s", "x1", "x2", "x3", "x4"],
        &[
            ("1,1", "1"),
            ("2,2", "-r^2"),
            ("3,5", "r^2*exp(2*s)*x3*x4"),
            ("4,6", "r^2*exp(2*s)*x3*x4"),
            ("5,5", f),
            ("6,6", f),
        ],
        &[
            (0.5, 1.5),
            (-0.3, 0.3),
            (0.5, 1.5),
            (0.5, 1.5),
            (0.5, 1.5),
            (0.5, 1.5),
        ],
    )?;
    let n = 6;
    let mut l = vec![Expr::Num(0.0); n * n];
    let e2s = "exp(2*s)";
    l[0] = parse(e2s)?; // L^1_1
    l[1] = parse(&format!("r*{e2s}"))?; // L^1_2
    l[n] = parse(&format!("-{e2s}/r"))?; // L^2_1
    l[n + 1] = parse(&format!("-{e2s}"))?; // L^2_2
    // the x-block entries are constant: a nonconstant factor here would leave
    // an uncancelled s-derivative and the field would fail to be parallel
    l[2 * n + 4] = Expr::Num(1.0); // L^3_5
    l[3 * n + 5] = Expr::Num(1.0); // L^4_6
    Ok(CorpusEntry {
        name: "example2".into(),
        metric,
        l_field: Some(TensorField {
            upper: vec![true, false],
            comps: l,
        }),
        v: Some(parse("r^2/2")?),
        gbar: None,
        is_cone_total: true,
        expected: Expected::default(),
    })
}

/// Flat g with the pullback ḡ of g under the projective transformation
/// x ↦ x / (1 + b·x): straight lines map to straight lines, so the two
/// metrics share geodesics without being affinely related.
pub fn flat_projective_pair(n: usize) -> Result<CorpusEntry> {
    if n == 0 {
        return Err(Error::Malformed("pair dimension must be >= 1".into()));
    }
    let base = flat(n, None)?;
    let b1 = 0.3;
    // with b = (b1, 0, …): q = 1 + b1·x1,
    // ḡ_ij = δ_ij/q² − (b_i x_j + b_j x_i)/q³ + b_i b_j |x|²/q⁴
    let coords = coord_names("x", n);
    let coord_refs: Vec<&str> = coords.iter().map(|s| s.as_str()).collect();
    let q = format!("(1 + {b1}*x1)");
    let norm = coords
        .iter()
        .map(|c| format!("{c}^2"))
        .collect::<Vec<_>>()
        .join(" + ");
    let mut comps = vec![Expr::Num(0.0); n * n];
    for i in 0..n {
        for j in i..n {
            let mut terms: Vec<String> = Vec::new();
            if i == j {
                terms.push(format!("1/{q}^2"));
            }
            if i == 0 {
                terms.push(format!("- {b1}*{}/{q}^3", coords[j]));
            }
            if j == 0 {
                terms.push(format!("- {b1}*{}/{q}^3", coords[i]));
            }
            if i == 0 && j == 0 {
                terms.push(format!("+ {b1}^2*({norm})/{q}^4"));
            }
            if terms.is_empty() {
                continue;
            }
            let e = parse(&terms.join(" "))?;
            comps[i * n + j] = e.clone();
            comps[j * n + i] = e;
        }
    }
    let gbar = MetricSpec::new(
        &format!("flat{n}_projective_image"),
        &coord_refs,
        comps,
        &vec![(-1.0, 1.0); n],
    )?;
    let mut metric = base.metric;
    metric.sample_box = vec![(-1.0, 1.0); n];
    Ok(CorpusEntry {
        name: format!("flat_projective_pair{n}"),
        metric,
        l_field: None,
        v: None,
        gbar: Some(gbar),
        is_cone_total: false,
        expected: Expected {
            b: Some(0.0),
            ..Default::default()
        },
    })
}

/// The (n+1)-dimensional cone R^k × cone(flat lorentzian) × cone(flat
/// euclidean) × …, glued so that the mobility structure of the underlying
/// n-dim metric is D = k(k+1)/2 + ℓ with ℓ = number of cone factors.
pub fn realization(n: usize, k: usize, partition: &[usize]) -> Result<CorpusEntry> {
    if partition.is_empty() || partition.iter().any(|&ki| ki < 3) {
        return Err(Error::Malformed(format!(
            "realization({n},{k},{partition:?}): every partition entry must be >= 3"
        )));
    }
    let total: usize = partition.iter().sum();
    if total != n - k + 1 {
        return Err(Error::Malformed(format!(
            "realization({n},{k},{partition:?}): partition sums to {total}, expected n−k+1 = {}",
            n - k + 1
        )));
    }
    let mut factors: Vec<VerifiedConeFactor> = Vec::new();
    if k > 0 {
        // flat R^k factor; its cone function needs positivity, so the box
        // stays away from the origin
        let coords = coord_names("y", k);
        let coord_refs: Vec<&str> = coords.iter().map(|s| s.as_str()).collect();
        let mut comps = vec![Expr::Num(0.0); k * k];
        for i in 0..k {
            comps[i * k + i] = Expr::Num(1.0);
        }
        let m = MetricSpec::new("flat-factor", &coord_refs, comps, &vec![(0.3, 0.9); k])?;
        factors.push(verify_factor(m, half_norm_squared(&coords), 42)?);
    }
    for (idx, &ki) in partition.iter().enumerate() {
        let base_dim = ki - 1;
        let lorentzian = idx == 0;
        let prefix = format!("z{}", idx + 1);
        let coords = coord_names(&prefix, base_dim);
        let coord_refs: Vec<&str> = coords.iter().map(|s| s.as_str()).collect();
        let mut comps = vec![Expr::Num(0.0); base_dim * base_dim];
        for i in 0..base_dim {
            comps[i * base_dim + i] = Expr::Num(if lorentzian && i == 0 { -1.0 } else { 1.0 });
        }
        let base = MetricSpec::new(
            &format!(
                "flat-{}-factor{}",
                if lorentzian { "lorentzian" } else { "euclidean" },
                idx + 1
            ),
            &coord_refs,
            comps,
            &vec![(-0.7, 0.7); base_dim],
        )?;
        let r_name = format!("r{}", idx + 1);
        let cone = build_cone_named(&base, &r_name, (0.5, 2.0))?;
        factors.push(verify_factor(
            cone.total,
            parse(&format!("{r_name}^2/2"))?,
            42,
        )?);
    }
    let (metric, w) = glue_product(&factors)?;
    let ell = partition.len() as i64;
    let name = format!(
        "realization({n},{k},[{}])",
        partition
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    let mut metric = metric;
    metric.label = name.clone();
    Ok(CorpusEntry {
        name,
        metric,
        l_field: None,
        v: Some(w),
        gbar: None,
        is_cone_total: true,
        expected: Expected {
            d: Some(k * (k + 1) / 2 + ell as usize),
            b: Some(-1.0),
            k: Some(k),
            ell: Some(ell),
            constant_curvature: false,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::check_hom;
    use crate::geometry;
    use crate::sampling;

    #[test]
    fn name_grammar() {
        for name in list() {
            let e = get(name).unwrap();
            assert_eq!(e.name, name);
        }
        assert!(get("flat0").is_err());
        assert!(get("nonsense").is_err());
        assert!(get("realization(7,0,[4,3])").is_err()); // sums to 7, need 8
        assert!(get("realization(7,0,[2,6])").is_err()); // entry < 3
        assert_eq!(get("flat4[1,3]").unwrap().metric.signature_hint, Some((1, 3)));
    }

    #[test]
    fn example1_matrices() {
        let e = example1().unwrap();
        let p = [1.0, 1.0, 2.0, 3.0];
        let g = e.metric.matrix_at(&p).unwrap();
        assert_eq!(g[(0, 2)], 6.0); // x3·x4
        assert_eq!(g[(2, 2)], 5.0); // x1·x4 + x2·x3
        assert_eq!(g[(0, 0)], 0.0);
        assert_eq!(e.metric.signature_at(&p).unwrap(), (2, 2));
    }

    #[test]
    fn example2_is_cone() {
        let e = example2().unwrap();
        let pts = sampling::sample_points(&e.metric, 42, 10).unwrap();
        let rep = check_hom(&e.metric, e.v.as_ref().unwrap(), &pts).unwrap();
        assert!(rep.cone_compatible, "{rep:?}");
    }

    #[test]
    fn realization_is_cone_and_flat_factors() {
        let e = get("realization(5,2,[4])").unwrap();
        assert_eq!(e.metric.dim, 6);
        let pts = sampling::sample_points(&e.metric, 42, 8).unwrap();
        let rep = check_hom(&e.metric, e.v.as_ref().unwrap(), &pts).unwrap();
        assert!(rep.cone_compatible, "{rep:?}");
        // the glued cone is curved (cone over flat R³ is not flat)
        let geo = geometry::riemann(&e.metric, &pts[0], 0).unwrap();
        assert!(geo.max_abs_riemann() > 1e-3);
    }

    #[test]
    fn projective_pair_nondegenerate() {
        let e = get("flat_projective_pair3").unwrap();
        let gbar = e.gbar.unwrap();
        for p in sampling::sample_points(&e.metric, 42, 10).unwrap() {
            assert!(gbar.is_nondegenerate_at(&p).unwrap());
        }
    }
}
