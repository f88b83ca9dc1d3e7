// The `priorlab` command driven in-process.

use priorlab::cli::run;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let out = dir.path().join("labels.jsonl");
    let code = run([
        "priorlab",
        "label",
        "--in",
        &format!("{data}/prior_phrases.jsonl"),
        "--out",
        out.to_str().ok_or("non-utf8 temp path")?,
    ]);
    println!("label exited {code}");
    print!("{}", std::fs::read_to_string(&out)?);

    let metrics = dir.path().join("metrics.json");
    let code = run([
        "priorlab",
        "eval",
        "--in",
        &format!("{data}/prior_phrases.jsonl"),
        "--out",
        metrics.to_str().ok_or("non-utf8 temp path")?,
    ]);
    println!("eval on records without candidates exited {code}");
    Ok(())
}
