#![no_main]
use libfuzzer_sys::fuzz_target;
use trajmode::trajfeat::FeatureMatrix;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = FeatureMatrix::read_csv(data) {
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let again = FeatureMatrix::read_csv(buf.as_slice()).unwrap();
        assert_eq!(again.values(), m.values());
    }
});
