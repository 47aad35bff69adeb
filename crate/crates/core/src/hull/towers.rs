//! Flag counting on the face lattice of a simplex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dimension parameter supported by the enumeration.
pub const MAX_TOWER_J: usize = 6;

/// Number of towers (maximal face chains) of Δ^{J-1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerCount {
    #[serde(rename = "J")]
    pub j: usize,
    pub towers: u64,
}

fn check_range(j: usize) -> Result<()> {
    if !(2..=MAX_TOWER_J).contains(&j) {
        return Err(Error::InvalidConfig(format!(
            "J = {j} outside the supported range 2..={MAX_TOWER_J}"
        )));
    }
    Ok(())
}

/// Counts chains vertex ⊂ edge ⊂ … ⊂ Δ^{J-1} by walking the face lattice.
///
/// Faces of the simplex are the nonempty subsets of its `J` vertices,
/// encoded as bitmasks; a face of dimension `k` has `k + 1` vertices and
/// is covered by the faces obtained by adding one more vertex.
pub fn count_towers(j: usize) -> Result<TowerCount> {
    check_range(j)?;
    let full: u32 = (1 << j) - 1;
    // chains[mask] = number of chains from a vertex up to `mask`
    let mut chains = vec![0u64; 1 << j];
    let mut by_size: Vec<Vec<u32>> = vec![Vec::new(); j + 1];
    for mask in 1..=full {
        by_size[mask.count_ones() as usize].push(mask);
    }
    for &v in &by_size[1] {
        chains[v as usize] = 1;
    }
    for size in 2..=j {
        for &face in &by_size[size] {
            chains[face as usize] = (0..j)
                .filter(|&b| face & (1 << b) != 0)
                .map(|b| chains[(face & !(1 << b)) as usize])
                .sum();
        }
    }
    Ok(TowerCount {
        j,
        towers: chains[full as usize],
    })
}

/// The growth constant `T(Δ^{J-1}) / ((J+1)^{J-1} (J-1)!)`.
pub fn c_constant(j: usize) -> Result<f64> {
    let t = count_towers(j)?;
    let pow = ((j + 1) as f64).powi(j as i32 - 1);
    let fact: f64 = (1..j).map(|k| k as f64).product();
    Ok(t.towers as f64 / (pow * fact))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(count_towers(2).unwrap().towers, 2);
        assert_eq!(count_towers(3).unwrap().towers, 6);
        assert!((c_constant(2).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(c_constant(3).unwrap(), 0.1875);
    }

    #[test]
    fn range_checked() {
        assert!(count_towers(1).is_err());
        assert!(count_towers(7).is_err());
        assert!(c_constant(0).is_err());
    }
}
