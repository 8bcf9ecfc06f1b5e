use rayon::prelude::*;

use super::{Bounds, Candidate, Evaluated, ObjectiveTriple, ParetoFront, N_OBJECTIVES};
use crate::error::{Error, Result};

/// `a` dominates `b`: no worse in every objective and better in at least one.
pub fn dominates(a: &ObjectiveTriple, b: &ObjectiveTriple) -> bool {
    let (a, b) = (a.as_array(), b.as_array());
    a.iter().zip(&b).all(|(x, y)| x <= y) && a.iter().zip(&b).any(|(x, y)| x < y)
}

/// Nondominated subset, sorted by candidate.
pub fn nondominated(points: &[Evaluated]) -> ParetoFront {
    let mut front: Vec<Evaluated> = points
        .iter()
        .filter(|p| !points.iter().any(|q| dominates(&q.objectives, &p.objectives)))
        .copied()
        .collect();
    front.sort_by_key(|e| e.candidate);
    front.dedup_by_key(|e| e.candidate);
    front
}

/// Add `point` to a nondominated archive (kept sorted by candidate).
/// Returns whether the point entered the archive.
pub fn insert_nondominated(archive: &mut ParetoFront, point: Evaluated) -> bool {
    if archive.iter().any(|a| a.candidate == point.candidate || dominates(&a.objectives, &point.objectives)) {
        return false;
    }
    archive.retain(|a| !dominates(&point.objectives, &a.objectives));
    let at = archive.partition_point(|a| a.candidate < point.candidate);
    archive.insert(at, point);
    true
}

/// Exact Pareto front over every grid point of `bounds`.
pub fn brute_force_pareto<F>(bounds: &Bounds, cap: usize, evaluator: F) -> Result<ParetoFront>
where
    F: Fn(Candidate) -> Result<ObjectiveTriple> + Sync,
{
    bounds.validate()?;
    let size = bounds.grid_size();
    if size > cap {
        return Err(Error::GridTooLarge { size, cap });
    }
    let grid: Vec<Candidate> = bounds.candidates().collect();
    let evaluated = grid
        .par_iter()
        .map(|&candidate| {
            evaluator(candidate)
                .map(|objectives| Evaluated { candidate, objectives })
                .map_err(|e| Error::Evaluation {
                    candidate,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(nondominated(&evaluated))
}

/// Per-objective minimum and maximum over a set of points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveBounds {
    pub ideal: [f64; N_OBJECTIVES],
    pub nadir: [f64; N_OBJECTIVES],
}

impl ObjectiveBounds {
    pub fn of<'a>(points: impl IntoIterator<Item = &'a ObjectiveTriple>) -> Option<Self> {
        let mut it = points.into_iter().peekable();
        it.peek()?;
        let mut b = ObjectiveBounds {
            ideal: [f64::INFINITY; N_OBJECTIVES],
            nadir: [f64::NEG_INFINITY; N_OBJECTIVES],
        };
        for p in it {
            for (k, v) in p.as_array().into_iter().enumerate() {
                b.ideal[k] = b.ideal[k].min(v);
                b.nadir[k] = b.nadir[k].max(v);
            }
        }
        Some(b)
    }

    /// Min-max normalized objectives; a degenerate axis maps to zero.
    pub fn normalize(&self, f: &ObjectiveTriple) -> [f64; N_OBJECTIVES] {
        let mut out = [0.0; N_OBJECTIVES];
        for (k, v) in f.as_array().into_iter().enumerate() {
            let range = self.nadir[k] - self.ideal[k];
            out[k] = if range > 0.0 { (v - self.ideal[k]) / range } else { 0.0 };
        }
        out
    }
}

/// Front member closest to the front's ideal point in normalized objective
/// space. Exact ties go to the smaller `n_pv`, then the smaller `n_ht`.
pub fn select_knee(front: &[Evaluated]) -> Result<Evaluated> {
    let bounds = ObjectiveBounds::of(front.iter().map(|e| &e.objectives))
        .ok_or_else(|| Error::Input("cannot select a knee point from an empty front".into()))?;
    let mut best: Option<(f64, Evaluated)> = None;
    for e in front {
        let d = bounds.normalize(&e.objectives).iter().map(|x| x * x).sum::<f64>().sqrt();
        let better = match &best {
            None => true,
            Some((bd, be)) => d < *bd || (d == *bd && e.candidate < be.candidate),
        };
        if better {
            best = Some((d, *e));
        }
    }
    Ok(best.expect("front is nonempty").1)
}

/// Hypervolume dominated by `points` and bounded by `reference`
/// (minimization). Points not strictly better than the reference in every
/// objective contribute nothing.
pub fn hypervolume(points: &[[f64; 3]], reference: [f64; 3]) -> f64 {
    let mut pts: Vec<[f64; 3]> = points
        .iter()
        .filter(|p| p.iter().zip(&reference).all(|(x, r)| x < r))
        .copied()
        .collect();
    if pts.is_empty() {
        return 0.0;
    }
    pts.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut volume = 0.0;
    let mut active: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    let mut k = 0;
    while k < pts.len() {
        let z = pts[k][2];
        while k < pts.len() && pts[k][2] == z {
            active.push([pts[k][0], pts[k][1]]);
            k += 1;
        }
        let next_z = if k < pts.len() { pts[k][2] } else { reference[2] };
        volume += area_2d(&mut active, [reference[0], reference[1]]) * (next_z - z);
    }
    volume
}

fn area_2d(points: &mut [[f64; 2]], reference: [f64; 2]) -> f64 {
    points.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut area = 0.0;
    let mut best_y = reference[1];
    for (i, p) in points.iter().enumerate() {
        best_y = best_y.min(p[1]);
        let next_x = points.get(i + 1).map_or(reference[0], |q| q[0]);
        area += (next_x - p[0]) * (reference[1] - best_y);
    }
    area
}

/// Hypervolume after mapping objectives through `bounds` (ideal -> 0,
/// nadir -> 1), against the reference point `(r, r, r)`.
pub fn normalized_hypervolume(front: &[Evaluated], bounds: &ObjectiveBounds, r: f64) -> f64 {
    let pts: Vec<[f64; 3]> = front.iter().map(|e| bounds.normalize(&e.objectives)).collect();
    hypervolume(&pts, [r; 3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(n_pv: u32, n_ht: u32, f: [f64; 3]) -> Evaluated {
        Evaluated {
            candidate: Candidate { n_pv, n_ht },
            objectives: ObjectiveTriple { f1: f[0], f2: f[1], f3: f[2] },
        }
    }

    /// Independent hypervolume: sum the volumes of the cells of the grid
    /// spanned by all coordinates whose lower corner is dominated.
    fn hypervolume_by_cells(points: &[[f64; 3]], r: [f64; 3]) -> f64 {
        let axes: Vec<Vec<f64>> = (0..3)
            .map(|k| {
                let mut v: Vec<f64> = points.iter().map(|p| p[k]).filter(|&x| x < r[k]).collect();
                v.push(r[k]);
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            })
            .collect();
        let mut total = 0.0;
        for i in 0..axes[0].len() - 1 {
            for j in 0..axes[1].len() - 1 {
                for k in 0..axes[2].len() - 1 {
                    let corner = [axes[0][i], axes[1][j], axes[2][k]];
                    if points.iter().any(|p| (0..3).all(|d| p[d] <= corner[d])) {
                        total += (axes[0][i + 1] - axes[0][i]) * (axes[1][j + 1] - axes[1][j]) * (axes[2][k + 1] - axes[2][k]);
                    }
                }
            }
        }
        total
    }

    #[test]
    fn dominance() {
        let a = ObjectiveTriple { f1: 0.02, f2: 0.05, f3: 0.60 };
        let b = ObjectiveTriple { f1: 0.03, f2: 0.06, f3: 0.61 };
        assert!(dominates(&a, &b));
        assert!(!dominates(&b, &a));
        assert!(!dominates(&a, &a));
        let c = ObjectiveTriple { f1: 0.01, f2: 0.07, f3: 0.60 };
        assert!(!dominates(&a, &c) && !dominates(&c, &a));
    }

    #[test]
    fn brute_force_small_grids() {
        let one = Bounds { n_pv: super::super::VariableRange::fixed(7), n_ht: super::super::VariableRange::fixed(2) };
        let f = brute_force_pareto(&one, 10, |c| Ok(ObjectiveTriple { f1: c.n_pv as f64, f2: 0.0, f3: 0.0 })).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].candidate, Candidate { n_pv: 7, n_ht: 2 });

        let two = Bounds { n_pv: super::super::VariableRange::new(0, 1, 1), n_ht: super::super::VariableRange::fixed(0) };
        let f = brute_force_pareto(&two, 10, |c| Ok(ObjectiveTriple { f1: c.n_pv as f64, f2: c.n_pv as f64, f3: 0.0 })).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].candidate.n_pv, 0);
    }

    #[test]
    fn brute_force_refuses_large_grids() {
        let b = Bounds::default();
        let err = brute_force_pareto(&b, 100, |_| Ok(ObjectiveTriple { f1: 0.0, f2: 0.0, f3: 0.0 })).unwrap_err();
        match err {
            Error::GridTooLarge { size, cap } => {
                assert_eq!(cap, 100);
                assert_eq!(size, b.grid_size());
                assert!(err.to_string().contains("100"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn brute_force_reports_failing_candidate() {
        let b = Bounds { n_pv: super::super::VariableRange::new(0, 3, 1), n_ht: super::super::VariableRange::fixed(1) };
        let err = brute_force_pareto(&b, 10, |c| {
            if c.n_pv == 2 {
                Err(Error::UndefinedMetric("boom".into()))
            } else {
                Ok(ObjectiveTriple { f1: 0.0, f2: 0.0, f3: 0.0 })
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::Evaluation { candidate: Candidate { n_pv: 2, n_ht: 1 }, .. }));
    }

    #[test]
    fn knee_examples() {
        let single = [ev(5, 1, [0.1, 0.2, 0.3])];
        assert_eq!(select_knee(&single).unwrap().candidate, Candidate { n_pv: 5, n_ht: 1 });

        let front = [ev(1, 0, [0.0, 1.0, 0.5]), ev(2, 0, [1.0, 0.0, 0.5]), ev(3, 0, [0.2, 0.2, 0.5])];
        assert_eq!(select_knee(&front).unwrap().candidate.n_pv, 3);

        let tie = [ev(9, 0, [0.0, 1.0, 0.0]), ev(4, 1, [1.0, 0.0, 0.0])];
        assert_eq!(select_knee(&tie).unwrap().candidate, Candidate { n_pv: 4, n_ht: 1 });
        let tie_ht = [ev(4, 3, [0.0, 1.0, 0.0]), ev(4, 1, [1.0, 0.0, 0.0])];
        assert_eq!(select_knee(&tie_ht).unwrap().candidate, Candidate { n_pv: 4, n_ht: 1 });

        assert!(select_knee(&[]).is_err());
    }

    #[test]
    fn hypervolume_unit_cases() {
        assert_eq!(hypervolume(&[[0.0, 0.0, 0.0]], [1.0, 1.0, 1.0]), 1.0);
        assert_eq!(hypervolume(&[[0.5, 0.5, 0.5]], [1.0, 1.0, 1.0]), 0.125);
        assert_eq!(hypervolume(&[[1.0, 0.0, 0.0]], [1.0, 1.0, 1.0]), 0.0);
        // Two boxes overlapping in a 0.5 x 0.5 x 1 prism.
        let hv = hypervolume(&[[0.0, 0.5, 0.0], [0.5, 0.0, 0.0]], [1.0, 1.0, 1.0]);
        assert!((hv - 0.75).abs() < 1e-15);
    }

    #[test]
    fn archive_insertion_matches_batch_filter() {
        let pts = [
            ev(0, 0, [0.5, 0.5, 0.5]),
            ev(1, 0, [0.4, 0.6, 0.5]),
            ev(2, 0, [0.6, 0.6, 0.6]),
            ev(3, 0, [0.3, 0.3, 0.3]),
            ev(4, 0, [0.1, 0.9, 0.9]),
        ];
        let mut archive = Vec::new();
        for p in pts {
            insert_nondominated(&mut archive, p);
        }
        assert_eq!(archive, nondominated(&pts));
    }

    proptest! {
        #[test]
        fn hypervolume_matches_cell_oracle(raw in proptest::collection::vec((0.0..1.2f64, 0.0..1.2f64, 0.0..1.2f64), 1..9)) {
            let pts: Vec<[f64; 3]> = raw.iter().map(|&(a, b, c)| [a, b, c]).collect();
            let r = [1.0, 1.0, 1.0];
            let fast = hypervolume(&pts, r);
            let slow = hypervolume_by_cells(&pts, r);
            prop_assert!((fast - slow).abs() <= 1e-12, "{} vs {}", fast, slow);
        }

        #[test]
        fn nondominated_members_are_mutually_nondominated(raw in proptest::collection::vec((0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64), 1..30)) {
            let pts: Vec<Evaluated> = raw.iter().enumerate().map(|(i, &(a, b, c))| ev(i as u32, 0, [a, b, c])).collect();
            let front = nondominated(&pts);
            prop_assert!(!front.is_empty());
            for a in &front {
                for b in &front {
                    prop_assert!(!dominates(&a.objectives, &b.objectives));
                }
            }
            for p in &pts {
                let kept = front.iter().any(|f| f.candidate == p.candidate);
                let beaten = front.iter().any(|f| dominates(&f.objectives, &p.objectives));
                prop_assert!(kept != beaten);
            }
        }
    }
}
