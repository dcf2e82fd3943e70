//! Emitted rows parse back bit for bit.

use fdcomm::sweep::*;
use proptest::prelude::*;

fn number() -> impl Strategy<Value = f64> {
    prop_oneof![
        8 => any::<f64>().prop_filter("nan never compares equal", |x| !x.is_nan()),
        1 => Just(f64::INFINITY),
        1 => Just(f64::NEG_INFINITY),
    ]
}

prop_compose! {
    fn row()(
        d in 1u32..4,
        hbar in number(), beta in number(), mu in number(),
        b in proptest::option::of(number()), p in number(),
        value in number(), tail_bound in number(),
        envelope in proptest::option::of(number()), ratio in proptest::option::of(number()),
        pass in any::<bool>(),
    ) -> SweepRow {
        SweepRow {
            model: "harmonic".into(),
            d, hbar, beta, mu, b, p,
            regime: "DeepQuantum".into(),
            quantity: "S_p".into(),
            value, tail_bound, envelope, ratio, pass,
        }
    }
}

proptest! {
    #[test]
    fn csv_round_trip(rows in proptest::collection::vec(row(), 1..6)) {
        let mut buf = Vec::new();
        emit(&rows, Format::Csv, &mut buf).unwrap();
        prop_assert_eq!(parse_csv(std::str::from_utf8(&buf).unwrap()).unwrap(), rows);
    }

    #[test]
    fn json_round_trip(rows in proptest::collection::vec(row(), 1..6)) {
        let mut buf = Vec::new();
        emit(&rows, Format::Json, &mut buf).unwrap();
        let back: Vec<SweepRow> = serde_json::from_slice(&buf).unwrap();
        prop_assert_eq!(back, rows);
    }
}
