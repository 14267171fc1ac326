use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::HarnessError;

/// Shuffled train/test split preserving class proportions.
///
/// Each class contributes `round(train_fraction * n_c)` members to the
/// training side, kept within `1..n_c` so both sides see every class.
/// Index lists are returned sorted.
pub fn stratified_split(labels: &[usize], train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), HarnessError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(HarnessError::Config(format!("train fraction {train_fraction} must lie in (0, 1)")));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    if let Some((class, _)) = by_class.iter().find(|(_, members)| members.len() < 2) {
        return Err(HarnessError::Config(format!("class {class} has a single member")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        let n = members.len();
        let n_train = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn exact_stratification() {
        let labels: Vec<usize> = (0..100).map(|i| i % 2).collect();
        let (train, test) = stratified_split(&labels, 0.8, 1).unwrap();
        assert_eq!(train.iter().filter(|&&i| labels[i] == 0).count(), 40);
        assert_eq!(test.iter().filter(|&&i| labels[i] == 1).count(), 10);
        let labels: Vec<usize> = (0..20).map(|i| i / 10).collect();
        let (train, test) = stratified_split(&labels, 0.8, 1).unwrap();
        assert_eq!((train.len(), test.len()), (16, 4));
    }

    #[test]
    fn rejects_singletons_and_bad_fractions() {
        assert!(stratified_split(&[0, 0, 1], 0.5, 0).is_err());
        assert!(stratified_split(&[0, 0, 1, 1], 1.0, 0).is_err());
    }

    proptest! {
        #[test]
        fn partition_is_exact(labels in prop::collection::vec(0usize..4, 2..200), seed in any::<u64>()) {
            let mut counts = [0usize; 4];
            labels.iter().for_each(|&l| counts[l] += 1);
            prop_assume!(counts.iter().all(|&c| c == 0 || c >= 2));
            let (train, test) = stratified_split(&labels, 0.8, seed).unwrap();
            let (again, _) = stratified_split(&labels, 0.8, seed).unwrap();
            prop_assert_eq!(&train, &again);
            let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
            for (c, &n) in counts.iter().enumerate() {
                if n == 0 { continue; }
                let k = train.iter().filter(|&&i| labels[i] == c).count() as f64;
                let ideal = 0.8 * n as f64;
                prop_assert!((k - ideal).abs() < 1.0);
            }
        }
    }
}
