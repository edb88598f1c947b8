use crate::error::{Error, Result};

/// Occupations chosen by [`aufbau_fill`], indexed like its input.
#[derive(Debug, Clone, PartialEq)]
pub struct Filling {
    pub occupations: Vec<Vec<f64>>,
    pub fermi_level: f64,
}

/// Fills shells in order of increasing eigenvalue. `eigvals[l]` lists the
/// radial levels of channel `l`, each of weight `2l + 1`.
///
/// Whole shells are filled until the remaining trace no longer covers the
/// next group; a group is every shell within `tol_deg` of the frontier
/// eigenvalue and receives the remainder as one uniform fractional
/// occupation. The frontier eigenvalue is returned as the Fermi level.
pub fn aufbau_fill(eigvals: &[Vec<f64>], lambda: f64, tol_deg: f64) -> Result<Filling> {
    if !(lambda >= 0.0) {
        return Err(Error::Domain(format!("trace must be nonnegative, got {lambda}")));
    }
    let mut shells: Vec<(f64, usize, usize)> = eigvals
        .iter()
        .enumerate()
        .flat_map(|(l, vals)| vals.iter().enumerate().map(move |(k, &e)| (e, l, k)))
        .collect();
    if shells.is_empty() {
        return Err(Error::InsufficientShells { lambda, available: 0.0 });
    }
    shells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let weight = |l: usize| (2 * l + 1) as f64;
    let available: f64 = shells.iter().map(|s| weight(s.1)).sum();
    let slack = 1e-12 * lambda.max(1.0);
    if lambda > available + slack {
        return Err(Error::InsufficientShells { lambda, available });
    }

    let mut occupations: Vec<Vec<f64>> = eigvals.iter().map(|v| vec![0.0; v.len()]).collect();
    let mut remaining = lambda;
    let mut fermi_level = shells[0].0;
    let mut start = 0;
    while start < shells.len() && remaining > slack {
        let frontier = shells[start].0;
        let end = shells[start..].iter().position(|s| s.0 > frontier + tol_deg).map_or(shells.len(), |p| start + p);
        let group = &shells[start..end];
        let group_weight: f64 = group.iter().map(|s| weight(s.1)).sum();
        fermi_level = frontier;
        let f = if remaining >= group_weight - slack { 1.0 } else { remaining / group_weight };
        for &(_, l, k) in group {
            occupations[l][k] = f;
        }
        remaining -= f * group_weight;
        start = end;
    }
    Ok(Filling { occupations, fermi_level })
}
