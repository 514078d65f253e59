#![no_main]

use libfuzzer_sys::fuzz_target;
use rkrlw::csvio::{read_solution, write_solution};

fuzz_target!(|data: &[u8]| {
    if let Ok(u) = read_solution(data) {
        assert!(u.in_z0());
        let mut buf = Vec::new();
        write_solution(&mut buf, &u).expect("writing to memory");
        let again = read_solution(buf.as_slice()).expect("own output re-reads");
        assert_eq!(again.values(), u.values());
    }
});
