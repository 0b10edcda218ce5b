use pprs::binning::ExtendedPermutation;
use pprs::bits::Bits;
use pprs::engine::data::{read_csv_from, write_csv_to};
use pprs::features::RecordTable;
use pprs::ofa::{ofa_execute, OfaOptions};
use pprs::ot::OtMode;
use pprs::permnet::decompose_extended;
use pprs::session::{run_pair, Party, SessionConfig};
use pprs::shares::{and_batch, reconstruct_bool, share_bool, BoolShare};
use proptest::collection::vec;
use proptest::prelude::{any, prop_assert_eq, proptest, ProptestConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn alignment_equals_plain_indexing(
        m in 1usize..200,
        picks in vec(any::<u32>(), 1..150),
        seed in any::<u64>(),
        tail_drop in any::<bool>(),
        bit_labels in any::<bool>(),
    ) {
        let src: Vec<usize> = picks.iter().map(|&p| p as usize % m).collect();
        let ep = ExtendedPermutation::new(m, src).unwrap();
        let x: Bits = (0..m).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
        let expect = ep.apply(&x.to_bools());
        prop_assert_eq!(decompose_extended(&ep, tail_drop).unwrap().evaluate(&x.to_bools()).unwrap(), expect.clone());
        let opts = OfaOptions { tail_drop, partial_tables: true, bit_labels };
        let mask: Bits = (0..m).map(|i| i % 3 == 0).collect();
        let (a, b) = (mask.clone(), mask.xor(&x));
        let ep0 = ep.clone();
        let (y0, y1) = run_pair(
            &SessionConfig::new(OtMode::Dealer, seed),
            move |s| ofa_execute(s, &BoolShare::new(Party::P0, a), Some(&ep0), opts),
            move |s| ofa_execute(s, &BoolShare::new(Party::P1, b), None, opts),
        ).unwrap();
        prop_assert_eq!(reconstruct_bool(&y0, &y1).unwrap().to_bools(), expect);
    }

    #[test]
    fn and_gate_is_bitwise(x in vec(any::<bool>(), 1..300), seed in any::<u64>()) {
        let y: Vec<bool> = x.iter().enumerate().map(|(i, &b)| b ^ (i % 2 == 0)).collect();
        let (bx, by) = (Bits::from_bools(&x), Bits::from_bools(&y));
        let n = x.len();
        let (z0, z1) = run_pair(
            &SessionConfig::new(OtMode::Dealer, seed),
            |s| {
                let a = share_bool(s, Party::P0, Some(&bx), n)?;
                let b = share_bool(s, Party::P1, None, n)?;
                and_batch(s, &a, &b)
            },
            |s| {
                let a = share_bool(s, Party::P0, None, n)?;
                let b = share_bool(s, Party::P1, Some(&by), n)?;
                and_batch(s, &a, &b)
            },
        ).unwrap();
        prop_assert_eq!(reconstruct_bool(&z0, &z1).unwrap(), bx.and(&by));
    }

    #[test]
    fn csv_round_trip(rows in vec(vec("([a-z0-9]([a-z0-9 ]{0,4}[a-z0-9])?)?", 3), 0..20)) {
        let refs: Vec<Vec<&str>> = rows.iter().map(|r| r.iter().map(String::as_str).collect()).collect();
        let t = RecordTable::from_strings(&["a", "b", "c"], &refs).unwrap();
        let mut buf = Vec::new();
        write_csv_to(&mut buf, &t).unwrap();
        let back = read_csv_from(buf.as_slice()).unwrap();
        prop_assert_eq!(back.rows(), t.rows());
    }
}
