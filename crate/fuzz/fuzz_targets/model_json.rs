#![no_main]
use libfuzzer_sys::fuzz_target;
use trajmode::classify::ModelDocument;

fuzz_target!(|data: &str| {
    if let Ok(doc) = ModelDocument::from_json(data) {
        // A validated model must predict on any row of the right width.
        let row = vec![0.5; doc.model.n_features];
        let _ = doc.model.predict(&[row]).unwrap();
    }
});
