use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::gridset::GridSet;
use crate::grid::lattice::Lattice;
use crate::linalg::Vec2;

/// On-disk form of a [`GridSet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSetFile {
    pub spacing: f64,
    pub shift: u8,
    pub nx: usize,
    pub ny: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<[f64; 2]>,
    pub mask: Vec<u8>,
    pub ordering: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<Vec<usize>>>,
}

impl GridSetFile {
    pub fn from_set(set: &GridSet<f64>) -> Self {
        let l = set.lattice;
        Self {
            spacing: l.spacing,
            shift: l.shift,
            nx: l.nx,
            ny: l.ny,
            origin: (l.origin != Vec2::zero()).then(|| l.origin.to_array()),
            mask: set.mask.iter().map(|&m| m as u8).collect(),
            ordering: set.ordering.clone(),
            components: Some(set.components.iter().map(|c| c.cells.clone()).collect()),
        }
    }

    pub fn into_set(self) -> Result<GridSet<f64>> {
        if !(self.spacing > 0.0) || !(1..=4).contains(&self.shift) {
            return Err(invalid("grid set needs spacing > 0 and shift in 1..=4"));
        }
        let origin = self.origin.map(Vec2::from).unwrap_or_else(Vec2::zero);
        let lattice = Lattice::new(self.spacing, self.shift, self.nx, self.ny, origin);
        let mask: Vec<bool> = self.mask.iter().map(|&m| m != 0).collect();
        match self.components {
            Some(comps) => GridSet::from_parts(lattice, mask, comps, Some(self.ordering)),
            None => {
                let mut set = GridSet::extract_components(mask, lattice)?;
                if !self.ordering.is_empty() {
                    set.set_ordering(self.ordering)?;
                }
                Ok(set)
            }
        }
    }
}

pub fn to_json(set: &GridSet<f64>) -> Result<String> {
    Ok(serde_json::to_string(&GridSetFile::from_set(set))?)
}

pub fn from_json(text: &str) -> Result<GridSet<f64>> {
    serde_json::from_str::<GridSetFile>(text)?.into_set()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let lat = Lattice::new(0.1f64 / 3.0, 2, 7, 5, Vec2::zero());
        let mut mask = vec![true; 35];
        mask[8] = false;
        mask[0] = false;
        let set = GridSet::extract_components(mask, lat).unwrap();
        let back = from_json(&to_json(&set).unwrap()).unwrap();
        assert_eq!(back.lattice.spacing.to_bits(), set.lattice.spacing.to_bits());
        assert_eq!(back.mask, set.mask);
        assert_eq!(back.ordering, set.ordering);
        assert_eq!(back, set);
    }
}
