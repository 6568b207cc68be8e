// The plain-text tensor format and the JSON report, as used by the
// `nucbound` binary.

use std::error::Error;

use nucbound::io::{self, parse_tensor, write_tensor, ReportDocument};
use nucbound::{full_report, DEFAULT_CERT_TOL};

const INPUT: &str = "\
# a 2x2x2 tensor; entries run with the last index fastest
shape: 2 2 2
1 0
0 0
0 0
0 1
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let a = parse_tensor(INPUT)?;
    let written = write_tensor(&a, Some("written back"));
    print!("{written}");
    if parse_tensor(&written)? != a {
        return Err("text roundtrip is not exact".into());
    }

    match parse_tensor("shape: 2 2\n1 2\n3\n") {
        Err(e) => println!("truncated input: {e}"),
        Ok(_) => return Err("truncated input was accepted".into()),
    }

    let report = full_report(&a, DEFAULT_CERT_TOL)?;
    print!("{}", io::to_json(&ReportDocument::from(&report)));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
