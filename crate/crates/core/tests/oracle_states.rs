mod common;

use common::oracle::expected_state;
use proptest::prelude::*;
use qaudio::audio::DigitalAudio;
use qaudio::circuit::Scheme;
use qaudio::codecs::{encode, qpam_map, qpam_state, EncodeOptions};
use qaudio::sim::{Simulator, StateVector};

fn assert_matches(state: &StateVector, expected: &[f64], tol: f64) -> Result<(), TestCaseError> {
    prop_assert_eq!(state.amplitudes().len(), expected.len());
    for (i, (a, e)) in state.amplitudes().iter().zip(expected).enumerate() {
        prop_assert!(
            (a.re - e).abs() <= tol && a.im.abs() <= tol,
            "amplitude {} is {} expected {}",
            i,
            a,
            e
        );
    }
    Ok(())
}

fn signal(max_exp: u32, channels: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (0..=max_exp, channels).prop_flat_map(|(exp, c)| {
        prop::collection::vec(prop::collection::vec(-1.0f64..=1.0, 1usize << exp), c)
    })
}

fn run(scheme: Scheme, channels: Vec<Vec<f64>>, q: u32, m: u32) -> Result<(), TestCaseError> {
    let audio = DigitalAudio::new(channels.clone(), 44_100).unwrap();
    let options = EncodeOptions::new(scheme).depth(q).integer_bits(m);
    let circuit = match encode(&audio, &options) {
        Ok(c) => c,
        // all-(-1) QPAM input has no state to compare against
        Err(qaudio::codecs::CodecError::DegenerateSignal) => return Ok(()),
        Err(e) => return Err(TestCaseError::fail(e.to_string())),
    };
    let state = Simulator::default().run(&circuit).unwrap();
    assert_matches(&state, &expected_state(scheme, &channels, q, m), 1e-9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn qpam_matches_closed_form(ch in signal(6, 1..2)) {
        run(Scheme::Qpam, ch, 0, 0)?;
    }

    #[test]
    fn qpam_tree_agrees_with_injection(ch in signal(6, 1..2)) {
        if let Ok(enc) = qpam_map(&ch[0]) {
            let built = Simulator::default().run(&qaudio::codecs::qpam_prepare(&enc).unwrap()).unwrap();
            let direct = qpam_state(&enc).unwrap();
            for (a, b) in built.amplitudes().iter().zip(direct.amplitudes()) {
                prop_assert!((a - b).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn sqpam_state(ch in signal(6, 1..2)) {
        run(Scheme::Sqpam, ch, 0, 0)?;
    }

    #[test]
    fn qsm_state(ch in signal(6, 1..2), q in 2u32..9) {
        run(Scheme::Qsm, ch, q, 0)?;
    }

    #[test]
    fn uqsm_state(ch in signal(6, 1..2), q in 1u32..9) {
        run(Scheme::Uqsm, ch, q, 0)?;
    }

    #[test]
    fn fpqsm_state(ch in signal(6, 1..2), (q, m) in (1u32..9).prop_flat_map(|q| (Just(q), 0..q))) {
        run(Scheme::Fpqsm, ch, q, m)?;
    }

    #[test]
    fn mqsm_state(ch in signal(4, 1..5), q in 2u32..6) {
        run(Scheme::Mqsm, ch, q, 0)?;
    }

    #[test]
    fn msqpam_state(ch in signal(4, 1..5)) {
        run(Scheme::Msqpam, ch, 0, 0)?;
    }
}

#[test]
fn all_minus_one_sqpam_is_ground_amplitude() {
    let channels = vec![vec![-1.0; 4]];
    run(Scheme::Sqpam, channels, 0, 0).unwrap();
}
