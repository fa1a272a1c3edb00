//! Writes the scaled root measures of the three example operators at
//! n = 100 as SVG scatter plots into the directory given as the first
//! argument (default: the current directory).

use std::path::PathBuf;

use eigenroot::dsl::parse_operator;
use eigenroot::io::{measure_svg, write_atomic};
use eigenroot::roots::RootOptions;
use eigenroot::scaling::scaled_measure;

const OPERATORS: [(&str, &str); 3] = [
    ("t1", "z*D + z*D^2 + z*D^3 + z*D^4 + z*D^5"),
    ("t2", "z^2*D^2 + D^7"),
    ("t3", "z^3*D^3 + z^2*D^4 + z*D^5"),
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let n = 100;
    for (name, text) in OPERATORS {
        let op = parse_operator(text)?;
        let m = scaled_measure(&op, n, &RootOptions::default())?;
        let path = dir.join(format!("{name}_n{n}.svg"));
        write_atomic(&path, measure_svg(&m, &format!("{text}, n = {n}"))?.as_bytes())?;
        println!("{} max |atom| {:.4}", path.display(), m.max_modulus());
    }
    Ok(())
}
