//! Shared inputs for the pipeline benchmarks: closed-form fixture data at the
//! grid sizes the benchmarks exercise.

use lorimm_core::fixtures::{default_chart, generate_fixture, FixtureParams};
use lorimm_core::{FundamentalForms, TensorField};

/// The uniformly accelerated flat metric on its default chart.
pub fn rindler(samples: usize) -> TensorField {
    let chart = default_chart("rindler", samples).expect("fixture exists");
    let mut out =
        generate_fixture("rindler", &chart, &FixtureParams::default()).expect("valid params");
    out.fields.remove(0).1
}

/// Fundamental forms of the unit hyperboloid on its default chart.
pub fn hyperboloid(samples: usize) -> FundamentalForms {
    let chart = default_chart("hyperboloid_forms", samples).expect("fixture exists");
    let out = generate_fixture("hyperboloid_forms", &chart, &FixtureParams::default())
        .expect("valid params");
    let lambda: f64 = out.metadata["lambda"].parse().expect("numeric lambda");
    let mut fields = out.fields;
    let k = fields.remove(1).1;
    let g = fields.remove(0).1;
    FundamentalForms::new(g, k, lambda).expect("fixture forms are admissible")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_helpers_produce_the_documented_shapes() {
        let g = rindler(9);
        assert_eq!(g.comp_shape(), &[2, 2]);
        assert_eq!(g.chart().point_count(), 81);
        let forms = hyperboloid(9);
        assert_eq!(forms.lambda(), -1.0);
        assert_eq!(forms.g().comp_shape(), &[2, 2]);
    }
}
