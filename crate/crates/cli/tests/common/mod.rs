//! Fixture corpus shared by the CLI test targets.

use std::path::PathBuf;
use std::process::{Command, Output};

pub fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/fixtures");
    p.push(name);
    p.to_string_lossy().into_owned()
}

pub fn run(args: &[String]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_propscore"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn argv(template: &[&str]) -> Vec<String> {
    template
        .iter()
        .map(|a| match a.strip_prefix('@') {
            Some(name) => fixture(name),
            None => a.to_string(),
        })
        .collect()
}

/// Invocations that must succeed. `@name` refers to a fixture file.
pub fn corpus() -> Vec<Vec<String>> {
    [
        &[
            "score",
            "--rule",
            "crps:empirical",
            "--forecasts",
            "@ens_forecasts.jsonl",
            "--obs",
            "@ens_obs.jsonl",
        ][..],
        &[
            "score",
            "--rule",
            "crps:fair",
            "--forecasts",
            "@normal_a.jsonl",
            "--obs",
            "@normal_obs.jsonl",
        ],
        &[
            "score",
            "--rule",
            "log",
            "--forecasts",
            "@normal_a.jsonl",
            "--obs",
            "@normal_obs.jsonl",
        ],
        &[
            "score",
            "--rule",
            "hyvarinen",
            "--forecasts",
            "@normal_a.jsonl",
            "--obs",
            "@normal_obs.jsonl",
        ],
        &[
            "score",
            "--rule",
            "quantile:tau=0.9",
            "--forecasts",
            "@normal_a.jsonl",
            "--obs",
            "@normal_obs.jsonl",
        ],
        &[
            "score",
            "--rule",
            "energy:beta=1.0",
            "--forecasts",
            "@multi_forecasts.jsonl",
            "--obs",
            "@multi_obs.jsonl",
        ],
        &[
            "score",
            "--rule",
            "gaussian:lambda=1.0",
            "--forecasts",
            "@multi_forecasts.jsonl",
            "--obs",
            "@multi_obs.jsonl",
        ],
        &[
            "score",
            "--rule",
            "ds",
            "--forecasts",
            "@multi_forecasts.jsonl",
            "--obs",
            "@multi_obs.jsonl",
        ],
        &[
            "score",
            "--rule",
            "spherical",
            "--forecasts",
            "@binary_forecasts.jsonl",
            "--obs",
            "@binary_obs.jsonl",
        ],
        &[
            "compare",
            "--rule",
            "crps",
            "--forecasts-a",
            "@normal_a.jsonl",
            "--forecasts-b",
            "@normal_b.jsonl",
            "--obs",
            "@normal_obs.jsonl",
        ],
        &[
            "decompose",
            "--rule",
            "brier",
            "--forecasts",
            "@binary_forecasts.jsonl",
            "--obs",
            "@binary_obs.jsonl",
        ],
        &[
            "decompose",
            "--rule",
            "quadratic",
            "--forecasts",
            "@binary_forecasts.jsonl",
            "--obs",
            "@binary_obs.jsonl",
            "--bins",
            "4",
        ],
        &[
            "fit",
            "--family",
            "normal",
            "--rule",
            "log",
            "--data",
            "@normal_data.csv",
        ],
        &[
            "fit",
            "--family",
            "normal",
            "--rule",
            "crps",
            "--data",
            "@normal_data.csv",
        ],
        &[
            "fit",
            "--family",
            "normal-linear",
            "--rule",
            "crps",
            "--data",
            "@linear_data.csv",
        ],
        &[
            "verify",
            "--rule",
            "brier",
            "--check",
            "propriety",
            "--grid-step",
            "0.05",
        ],
        &[
            "verify",
            "--rule",
            "pseudospherical:alpha=1.5",
            "--check",
            "propriety",
            "--classes",
            "3",
            "--grid-step",
            "0.05",
        ],
        &["verify", "--rule", "linear", "--check", "propriety"],
        &[
            "verify",
            "--rule",
            "quadratic",
            "--check",
            "concavity",
            "--trials",
            "200",
        ],
        &[
            "verify",
            "--rule",
            "crps",
            "--check",
            "invariance",
            "--transform",
            "scale:c=2,degree=1",
        ],
        &[
            "verify",
            "--rule",
            "energy:beta=0.5",
            "--check",
            "invariance",
            "--transform",
            "rotate:d=3",
            "--trials",
            "10",
        ],
        &[
            "verify",
            "--rule",
            "energy:beta=1",
            "--check",
            "symmetry",
            "--trials",
            "50",
        ],
        &[
            "verify", "--rule", "crps", "--check", "crps-rep", "--trials", "20",
        ],
        &[
            "verify",
            "--rule",
            "gaussian:lambda=1",
            "--check",
            "spectral",
        ],
        &[
            "sample",
            "--forecasts",
            "@multi_forecasts.jsonl",
            "-n",
            "5",
            "--seed",
            "3",
        ],
    ]
    .iter()
    .map(|t| argv(t))
    .collect()
}

/// Invocations that must fail, with the expected exit status.
pub fn failures() -> Vec<(Vec<String>, i32)> {
    let score = |f: &str, o: &str| argv(&["score", "--rule", "crps", "--forecasts", f, "--obs", o]);
    let mut v: Vec<(Vec<String>, i32)> = [
        "@malformed/bad_simplex.jsonl",
        "@malformed/bad_sigma.jsonl",
        "@malformed/empty_ensemble.jsonl",
        "@malformed/missing_field.jsonl",
        "@malformed/unknown_type.jsonl",
        "@malformed/not_json.jsonl",
        "@malformed/blank_line.jsonl",
    ]
    .iter()
    .map(|f| (score(f, "@malformed/one_obs.jsonl"), 1))
    .collect();
    v.extend([
        (score("@normal_a.jsonl", "@malformed/nan_obs.jsonl"), 1),
        (score("@normal_a.jsonl", "@malformed/two_obs.jsonl"), 1),
        (
            score("@normal_a.jsonl", "@malformed/does_not_exist.jsonl"),
            1,
        ),
        (
            argv(&[
                "score",
                "--rule",
                "nope",
                "--forecasts",
                "@normal_a.jsonl",
                "--obs",
                "@normal_obs.jsonl",
            ]),
            1,
        ),
        (
            argv(&[
                "score",
                "--rule",
                "brier",
                "--forecasts",
                "@normal_a.jsonl",
                "--obs",
                "@normal_obs.jsonl",
            ]),
            1,
        ),
        (argv(&["frobnicate"]), 1),
        (argv(&["score", "--rule", "crps", "--unknown-flag", "1"]), 1),
        (
            argv(&[
                "fit",
                "--family",
                "normal",
                "--rule",
                "log",
                "--data",
                "@malformed/constant.csv",
            ]),
            1,
        ),
        (
            argv(&[
                "fit",
                "--family",
                "normal",
                "--rule",
                "log",
                "--data",
                "@malformed/non_numeric.csv",
            ]),
            1,
        ),
        (
            argv(&[
                "fit",
                "--family",
                "gamma",
                "--rule",
                "log",
                "--data",
                "@normal_data.csv",
            ]),
            1,
        ),
        (
            argv(&[
                "verify",
                "--rule",
                "brier",
                "--check",
                "propriety",
                "--grid-step",
                "0.3",
            ]),
            1,
        ),
        (argv(&["verify", "--rule", "brier", "--check", "bogus"]), 1),
        (
            argv(&[
                "compare",
                "--rule",
                "log",
                "--forecasts-a",
                "@malformed/point_mass.jsonl",
                "--forecasts-b",
                "@malformed/point_mass.jsonl",
                "--obs",
                "@malformed/class_one.jsonl",
            ]),
            2,
        ),
    ]);
    v
}
