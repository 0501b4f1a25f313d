#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    hqsim_fuzz::arrival_spec_kv(data);
});
