use proptest::prelude::*;

use fracperiod::io::{to_json_string, FhstFile};
use fracperiod::GridField;

fn grid() -> impl Strategy<Value = GridField> {
    proptest::collection::vec(1usize..7, 1..=3).prop_flat_map(|sizes| {
        let n: usize = sizes.iter().product();
        proptest::collection::vec(any::<u64>().prop_map(f64::from_bits), n)
            .prop_map(move |values| GridField::new(sizes.clone(), values).unwrap())
    })
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fhst_reloads_bit_for_bit(g in grid(), period in 0.1f64..100.0, mass in 0.1f64..5.0, order in 0.01f64..0.99) {
        let file = FhstFile {
            sizes: g.sizes.clone(),
            period,
            mass,
            order,
            y_nodes: None,
            values: g.values.clone(),
        };
        let mut buf = Vec::new();
        file.write_to(&mut buf).unwrap();
        let back = FhstFile::read_from(&buf[..]).unwrap();
        prop_assert_eq!(&back.sizes, &g.sizes);
        prop_assert_eq!(back.period.to_bits(), period.to_bits());
        prop_assert_eq!(back.mass.to_bits(), mass.to_bits());
        prop_assert_eq!(back.order.to_bits(), order.to_bits());
        prop_assert_eq!(bits(&back.values), bits(&g.values));
        prop_assert!(back.y_nodes.is_none());
        // a second write is byte-identical
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        prop_assert_eq!(again, buf);
    }

    #[test]
    fn cylinder_variant_reloads_bit_for_bit(g in grid(), ys in proptest::collection::vec(0.0f64..10.0, 1..4)) {
        let slices = ys.len();
        let mut values = Vec::new();
        for j in 0..slices {
            values.extend(g.values.iter().map(|v| v + j as f64));
        }
        let file = FhstFile {
            sizes: g.sizes.clone(),
            period: 1.0,
            mass: 1.0,
            order: 0.5,
            y_nodes: Some(ys.clone()),
            values,
        };
        let mut buf = Vec::new();
        file.write_to(&mut buf).unwrap();
        let back = FhstFile::read_from(&buf[..]).unwrap();
        prop_assert_eq!(bits(back.y_nodes.as_deref().unwrap()), bits(&ys));
        prop_assert_eq!(bits(&back.values), bits(&file.values));
    }

    #[test]
    fn json_floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let text = to_json_string(&vec![x]).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back[0].to_bits(), x.to_bits());
    }
}
