use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-value scores in taxonomy order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScoreVector(pub Vec<f64>);

impl ScoreVector {
    pub fn new(values: Vec<f64>) -> Self {
        ScoreVector(values)
    }

    pub fn zeros(len: usize) -> Self {
        ScoreVector(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn scaled(&self, factor: f64) -> ScoreVector {
        ScoreVector(self.0.iter().map(|x| x * factor).collect())
    }
}

impl std::ops::Index<usize> for ScoreVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub fn cosine(u: &ScoreVector, v: &ScoreVector) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::InvalidArgument(format!(
            "vector lengths differ: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let dot: f64 = u.0.iter().zip(&v.0).map(|(a, b)| a * b).sum();
    let nu = u.0.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.0.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::InvalidArgument("cosine of a zero vector".into()));
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

/// Spearman's rho, or `None` when either input has zero variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correlation {
    Defined(f64),
    Undefined,
}

impl Correlation {
    pub fn value(self) -> Option<f64> {
        match self {
            Correlation::Defined(v) => Some(v),
            Correlation::Undefined => None,
        }
    }
}

/// Ranks 1..=n with ties given the average of the positions they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Correlation {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Correlation::Undefined;
    }
    Correlation::Defined((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn spearman_rho(u: &ScoreVector, v: &ScoreVector) -> Result<Correlation> {
    if u.len() != v.len() {
        return Err(Error::InvalidArgument(format!(
            "vector lengths differ: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    if u.len() < 3 {
        return Err(Error::InvalidArgument(
            "Spearman's rho needs at least 3 entries".into(),
        ));
    }
    Ok(pearson(&average_ranks(&u.0), &average_ranks(&v.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(xs: &[f64]) -> ScoreVector {
        ScoreVector::new(xs.to_vec())
    }

    #[test]
    fn cosine_examples() {
        let u = sv(&[0.2, 0.5, 0.0, 1.0]);
        assert!((cosine(&u, &u).unwrap() - 1.0).abs() < 1e-15);
        let mut e1 = vec![0.0; 10];
        e1[0] = 1.0;
        let mut e2 = vec![0.0; 10];
        e2[1] = 1.0;
        assert_eq!(cosine(&sv(&e1), &sv(&e2)).unwrap(), 0.0);
        let mut w = vec![0.0; 10];
        w[0] = 1.0;
        w[1] = 1.0;
        assert!((cosine(&sv(&w), &sv(&e1)).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-5);
        assert!(cosine(&sv(&[0.0, 0.0]), &sv(&[1.0, 0.0])).is_err());
        assert!(cosine(&sv(&[1.0]), &sv(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn spearman_examples() {
        let u = sv(&[1.0, 2.0, 3.0, 4.0]);
        let exp = sv(&[1.0f64, 2.0, 3.0, 4.0].map(f64::exp));
        assert_eq!(spearman_rho(&u, &exp).unwrap(), Correlation::Defined(1.0));
        let rev = sv(&[4.0, 3.0, 2.0, 1.0]);
        assert_eq!(spearman_rho(&u, &rev).unwrap(), Correlation::Defined(-1.0));
        let v = sv(&[1.0, 3.0, 2.0, 4.0]);
        let rho = spearman_rho(&u, &v).unwrap().value().unwrap();
        assert!((rho - 0.8).abs() < 1e-12, "{rho}");
        assert_eq!(
            spearman_rho(&u, &sv(&[0.5; 4])).unwrap(),
            Correlation::Undefined
        );
        assert!(spearman_rho(&sv(&[1.0, 2.0]), &sv(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn tied_ranks_are_averaged() {
        assert_eq!(average_ranks(&[0.5, 0.0, 0.5, 0.0, 1.0]), vec![3.5, 1.5, 3.5, 1.5, 5.0]);
    }
}
