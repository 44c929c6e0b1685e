//! Matrix files and the command-line entry point, driven in-process.

use nalgebra::DMatrix;
use ompmmv::io::{format_matrix, parse_matrix, read_matrix, write_matrix};

fn main() -> ompmmv::Result<()> {
    let a = DMatrix::from_row_slice(2, 3, &[0.1, -0.0, 1e300, 1.0 / 3.0, 5e-324, 42.0]);
    let text = format_matrix(&a);
    print!("{text}");
    let back = parse_matrix(&text)?;
    let exact = a
        .iter()
        .zip(back.iter())
        .all(|(x, y)| x.to_bits() == y.to_bits());
    println!("bit-exact round trip: {exact}");

    if let Err(e) = parse_matrix("1,2\n3\n") {
        println!("ragged input: {e}");
    }

    let dir = std::env::temp_dir().join(format!("ompmmv-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| ompmmv::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let phi = dir.join("phi.csv");
    let y = dir.join("y.csv");
    write_matrix(&DMatrix::identity(4, 4), &phi)?;
    write_matrix(
        &DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 1.0, -2.0, 0.0, 0.0, 3.0, 0.5]),
        &y,
    )?;
    let out = dir.join("x.csv");
    let code = ompmmv::cli::dispatch([
        "ompmmv",
        "solve",
        "--phi",
        phi.to_str().unwrap(),
        "--y",
        y.to_str().unwrap(),
        "--sparsity",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    println!(
        "exit code {code}; recovered:\n{}",
        format_matrix(&read_matrix(&out)?)
    );
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}
