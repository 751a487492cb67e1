// Driving the `signtile` front end in-process against the bundled matrix
// files.

use signed_tiling::cli::run;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let sessions: [&[&str]; 3] = [
        &["laplace", "--matrix", &format!("{data}/k.txt")],
        &["coverage", "--matrix", &format!("{data}/m4.txt"), "--point", "-2,1,-1/2,-1/2", "--w", "1,1,1,1"],
        &["verify", "--matrix", &format!("{data}/m4.txt"), "--samples", "200", "--seed", "7"],
    ];
    for args in sessions {
        let outcome = run(std::iter::once("signtile").chain(args.iter().copied()));
        println!("$ signtile {}\n{}", args.join(" "), outcome.stdout);
        if outcome.code != 0 {
            return Err(format!("exit {}: {}", outcome.code, outcome.stderr).into());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("cli session example");
}
