use bergman_lab::experiment::{run, Command, ExperimentConfig, RunOptions};

fn main() {
    let config = ExperimentConfig::from_json(
        r#"{
            "weight": {"kind": "fock"},
            "m_schedule": [8, 16, 32],
            "z0": [[0.0, 0.0], [0.5, 0.0]]
        }"#,
    )
    .unwrap();
    let out = std::env::temp_dir().join("bergman-lab-example");
    for command in [Command::KernelDiag, Command::BerezinConc, Command::FockMoments] {
        let summary = run(command, &config, &RunOptions { out: out.clone(), deterministic: true }).unwrap();
        for file in summary.files {
            println!("wrote {}", file.display());
        }
    }
    print!("{}", std::fs::read_to_string(out.join("kernel_diag.csv")).unwrap());
}
