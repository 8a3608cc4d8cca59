//! Krippendorff's alpha for two binary raters (nominal data).

use super::StatsError;

/// alpha = 1 - D_o / D_e over the coincidence matrix of the two label
/// vectors. Undefined (error) when the pooled labels show no variation.
pub fn krippendorff_alpha(a: &[bool], b: &[bool]) -> Result<f64, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(StatsError::InsufficientData { need: 2, got: a.len() });
    }
    // coincidence counts: each unit contributes both ordered pairs
    let mut o = [[0.0f64; 2]; 2];
    for (&x, &y) in a.iter().zip(b) {
        let (i, j) = (usize::from(x), usize::from(y));
        o[i][j] += 1.0;
        o[j][i] += 1.0;
    }
    let n1 = o[1][0] + o[1][1];
    let n0 = o[0][0] + o[0][1];
    let n = n0 + n1;
    if n0 == 0.0 || n1 == 0.0 {
        return Err(StatsError::NoLabelVariation);
    }
    let d_o = (o[0][1] + o[1][0]) / n;
    let d_e = 2.0 * n0 * n1 / (n * (n - 1.0));
    Ok(1.0 - d_o / d_e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn perfect_agreement_with_both_labels_is_one() {
        let a = [true, false, true, false];
        assert_eq!(krippendorff_alpha(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn four_item_hand_oracle() {
        // units (1,1),(1,0),(0,0),(0,0):
        // o11=2, o10=o01=1, o00=4; n1=3, n0=5, n=8
        // D_o = 2/8; D_e = 2*3*5/(8*7) = 30/56; alpha = 1 - (1/4)/(15/28) = 8/15
        let a = [true, true, false, false];
        let b = [true, false, false, false];
        let alpha = krippendorff_alpha(&a, &b).unwrap();
        assert_relative_eq!(alpha, 8.0 / 15.0, max_relative = 1e-12);
    }

    #[test]
    fn systematic_disagreement_is_negative() {
        let a = [true, false, true, false];
        let b = [false, true, false, true];
        assert!(krippendorff_alpha(&a, &b).unwrap() < 0.0);
    }

    #[test]
    fn no_label_variation_is_undefined() {
        let a = [true, true, true];
        assert!(matches!(
            krippendorff_alpha(&a, &a),
            Err(StatsError::NoLabelVariation)
        ));
    }
}
