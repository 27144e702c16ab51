//! Searches for a canonical homology basis on a surface and writes it as a
//! curves file.
//!
//! usage: find_curves <surface.json> <out.json> [bits] [--tau re11,im11,re12,im12,re22,im22]
//!
//! a-curves are loops through two seams of the first pair of pants; b-curves
//! cross two boundary geodesics. Candidates are combined until the surface
//! group relation and the symplectic intersection pattern both hold. With
//! `--tau` the period matrix (degree 20) must also match the given values.

use hexsurf::abeljacobi::{normalize_forms, period_matrix};
use hexsurf::hyperbolic::Moebius;
use hexsurf::numerics::{Cplx, PrecisionCtx};
use hexsurf::oneforms::{solve_oneforms, LsqConfig};
use hexsurf::surface::{
    canonical_intersection_matrix, relation_residual, symplectic_j, EdgeKind, HomologyCurve, RouteStep, SurfaceAtlas,
    SurfaceConfig,
};

const LABELS: [&str; 4] = ["a1", "a2", "b1", "b2"];
const FRACTIONS: [f64; 4] = [0.31, 0.38, 0.46, 0.53];
const SHIFTS: [(f64, f64); 4] = [(0.011, 0.007), (-0.009, 0.013), (0.004, -0.012), (-0.014, -0.005)];

fn routes(atlas: &SurfaceAtlas, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Vec<usize>, Option<(usize, usize)>)> = vec![(0, Vec::new(), None)];
    while let Some((p, path, entry)) = stack.pop() {
        if !path.is_empty() && p == 0 {
            out.push(path.clone());
        }
        if path.len() == max_len {
            continue;
        }
        for (i, e) in atlas.polygons[p].edges.iter().enumerate() {
            if Some((p, i)) == entry {
                continue;
            }
            let mut next = path.clone();
            next.push(i);
            stack.push((e.partner.0, next, Some(e.partner)));
        }
    }
    out
}

fn boundary_kinds(atlas: &SurfaceAtlas, route: &[usize]) -> Vec<usize> {
    let mut p = 0;
    let mut kinds = Vec::new();
    for &i in route {
        let e = atlas.edge(p, i);
        if let EdgeKind::Boundary(k) = e.kind {
            kinds.push(k);
        }
        p = e.partner.0;
    }
    kinds
}

fn deck(atlas: &SurfaceAtlas, route: &[usize]) -> Moebius {
    let mut p = 0;
    let mut t = Moebius::identity(atlas.prec());
    for &i in route {
        let e = atlas.edge(p, i);
        t = t.compose(&e.map.inverse());
        p = e.partner.0;
    }
    t
}

fn realize(atlas: &SurfaceAtlas, routes: &[&Vec<usize>; 4]) -> hexsurf::Result<Vec<HomologyCurve>> {
    let prec = atlas.prec();
    (0..4)
        .map(|k| {
            let steps: Vec<RouteStep> = routes[k].iter().map(|&edge| RouteStep { edge, at: FRACTIONS[k] }).collect();
            let shift = Cplx::from_f64(prec, SHIFTS[k].0, SHIFTS[k].1);
            HomologyCurve::from_route(atlas, LABELS[k], &steps, &shift)
        })
        .collect()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.len() < 3 {
        eprintln!("usage: find_curves <surface.json> <out.json> [bits] [--tau ...]");
        std::process::exit(2);
    }
    let bits: u32 = args.get(3).filter(|s| !s.starts_with("--")).map_or(1024, |s| s.parse().unwrap());
    let target: Option<Vec<f64>> = args
        .iter()
        .position(|a| a == "--tau")
        .map(|i| args[i + 1].split(',').map(|x| x.parse().unwrap()).collect());
    let cfg = SurfaceConfig::load(args[1].as_ref()).unwrap();
    let ctx = PrecisionCtx::new(128).unwrap();
    let atlas = cfg.build(ctx).unwrap();
    let all = routes(&atlas, 6);
    let tol = ctx.tol_half();
    let nontrivial = |r: &Vec<usize>| deck(&atlas, r).distance_to_identity() > tol;
    let seam_pairs: Vec<Vec<usize>> = all
        .iter()
        .filter(|r| r.len() == 2 && boundary_kinds(&atlas, r).is_empty() && nontrivial(r))
        .cloned()
        .collect();
    let mut b1s: Vec<Vec<usize>> = all
        .iter()
        .filter(|r| boundary_kinds(&atlas, r).len() == 2 && nontrivial(r))
        .cloned()
        .collect();
    b1s.sort_by_key(|r| r.len());
    let b2s = b1s.clone();
    eprintln!("{} seam loops, {} b1 and {} b2 candidates", seam_pairs.len(), b1s.len(), b2s.len());

    let lsq = LsqConfig::new(20, 3, ctx).unwrap();
    let raw = target.as_ref().map(|_| solve_oneforms(&atlas, &lsq, 2).unwrap());
    let commutator = |a: &Moebius, b: &Moebius| a.compose(b).compose(&a.inverse()).compose(&b.inverse());
    // Key of an element of PSU(1,1), insensitive to the global sign.
    let key = |m: &Moebius| -> String {
        let (ar, ai) = m.alpha.to_c64();
        let (br, bi) = m.beta.to_c64();
        let s = if ar < 0.0 { -1.0 } else { 1.0 };
        let r = |x: f64| format!("{:.7e}", s * x + 0.0);
        [r(ar), r(ai), r(br), r(bi)].join(",")
    };
    let a_deck: Vec<Moebius> = seam_pairs.iter().map(|r| deck(&atlas, r)).collect();
    let mut right: std::collections::HashMap<String, Vec<(usize, usize)>> = std::collections::HashMap::new();
    for (i2, a2) in a_deck.iter().enumerate() {
        for (j2, b2) in b2s.iter().enumerate() {
            let d = commutator(a2, &deck(&atlas, b2));
            right.entry(key(&d)).or_default().push((i2, j2));
        }
    }
    let mut found = None;
    let mut tried = 0;
    'search: for (i1, a1) in a_deck.iter().enumerate() {
        for b1 in &b1s {
            let c = commutator(a1, &deck(&atlas, b1));
            let Some(matches) = right.get(&key(&c.inverse())) else { continue };
            for &(i2, j2) in matches {
                let (ra1, ra2, rb2) = (&seam_pairs[i1], &seam_pairs[i2], &b2s[j2]);
                let gens = [a1.clone(), deck(&atlas, b1), a_deck[i2].clone(), deck(&atlas, rb2)];
                if relation_residual(&gens) > tol {
                    continue;
                }
                tried += 1;
                let Ok(curves) = realize(&atlas, &[ra1, ra2, b1, rb2]) else { continue };
                let Ok(j) = canonical_intersection_matrix(&curves, &atlas) else { continue };
                if j != symplectic_j(2) {
                    continue;
                }
                if let (Some(t), Some(raw)) = (&target, &raw) {
                    let Ok((normalized, _)) = normalize_forms(raw, &curves) else { continue };
                    let Ok((tau, _)) = period_matrix(&normalized, &curves) else { continue };
                    let got = [
                        tau[(0, 0)].re.to_f64(),
                        tau[(0, 0)].im.to_f64(),
                        tau[(0, 1)].re.to_f64(),
                        tau[(0, 1)].im.to_f64(),
                        tau[(1, 1)].re.to_f64(),
                        tau[(1, 1)].im.to_f64(),
                    ];
                    let err = got.iter().zip(t).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                    if err > 1e-4 {
                        continue;
                    }
                }
                found = Some([ra1.clone(), ra2.clone(), b1.clone(), rb2.clone()]);
                break 'search;
            }
        }
    }
    eprintln!("{tried} relation-compatible combinations examined");
    let Some(r) = found else {
        eprintln!("no canonical basis found");
        std::process::exit(1);
    };
    eprintln!("routes a1 {:?} a2 {:?} b1 {:?} b2 {:?}", r[0], r[1], r[2], r[3]);
    let fine = cfg.build(PrecisionCtx::new(bits).unwrap()).unwrap();
    let curves = realize(&fine, &[&r[0], &r[1], &r[2], &r[3]]).unwrap();
    assert_eq!(canonical_intersection_matrix(&curves, &fine).unwrap(), symplectic_j(2));
    HomologyCurve::save_all(&curves, args[2].as_ref()).unwrap();
}
