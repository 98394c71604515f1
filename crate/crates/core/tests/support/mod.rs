//! Golden command-line cases shared by the CLI tests and the acceptance run.
//! Set `BSYM_BLESS=1` to rewrite the golden files from the current binary.

#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

pub struct CliCase {
    pub name: &'static str,
    pub args: Vec<String>,
    pub exit: i32,
    /// Compared byte for byte with standard output.
    pub golden: Option<&'static str>,
}

pub fn fixture(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name);
    p.to_string_lossy().into_owned()
}

pub fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

pub fn bsym(args: &[String]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsym"))
        .args(args)
        .env_remove("BSYM_SEED")
        .output()
        .expect("bsym binary runs")
}

fn case(name: &'static str, args: &[&str], exit: i32, golden: Option<&'static str>) -> CliCase {
    CliCase {
        name,
        args: args
            .iter()
            .map(|a| match a.strip_prefix('@') {
                Some(f) => fixture(f),
                None => a.to_string(),
            })
            .collect(),
        exit,
        golden,
    }
}

/// Every subcommand, every exit code. `@name` stands for a fixture path.
pub fn cli_cases() -> Vec<CliCase> {
    vec![
        case(
            "solve riccati",
            &[
                "solve",
                "--problem",
                "@riccati.json",
                "--t-min",
                "0",
                "--t-max",
                "0.5",
                "--points",
                "3",
                "--method",
                "closed",
            ],
            0,
            Some("solve_riccati.csv"),
        ),
        case(
            "solve past the asymptote",
            &[
                "solve",
                "--problem",
                "@riccati.json",
                "--t-min",
                "0",
                "--t-max",
                "2",
                "--points",
                "9",
                "--method",
                "closed",
            ],
            0,
            Some("solve_asymptote.csv"),
        ),
        case(
            "solve with the oracle",
            &[
                "solve",
                "--problem",
                "@riccati.json",
                "--t-min",
                "-0.5",
                "--t-max",
                "0.5",
                "--points",
                "5",
                "--method",
                "oracle",
            ],
            0,
            Some("solve_oracle.csv"),
        ),
        case(
            "solve bad syntax",
            &["solve", "--problem", "@bad_syntax.json"],
            1,
            None,
        ),
        case(
            "solve singular coefficient",
            &["solve", "--problem", "@singular_b.json"],
            2,
            None,
        ),
        case(
            "solve empty range",
            &[
                "solve",
                "--problem",
                "@riccati.json",
                "--t-min",
                "1",
                "--t-max",
                "0",
            ],
            1,
            None,
        ),
        case(
            "cases cos/sin",
            &["cases", "--problem", "@cos_sin.json"],
            0,
            Some("cases_cos_sin.txt"),
        ),
        case(
            "cases none",
            &["cases", "--problem", "@no_parity.json"],
            0,
            Some("cases_none.txt"),
        ),
        case(
            "cases cubic",
            &["cases", "--problem", "@t_cubic.json"],
            0,
            Some("cases_t_cubic.txt"),
        ),
        case(
            "cases unknown key",
            &["cases", "--problem", "@unknown_key.json"],
            1,
            None,
        ),
        case(
            "cases missing file",
            &["cases", "--problem", "@does_not_exist.json"],
            1,
            None,
        ),
        case(
            "pair T2iv",
            &["pair", "--problem", "@cos_sin.json", "--case", "T2iv"],
            0,
            Some("pair_cos_sin_T2iv.json"),
        ),
        case(
            "pair T4ii",
            &["pair", "--problem", "@t_cubic.json", "--case", "T4ii"],
            0,
            Some("pair_t_cubic_T4ii.json"),
        ),
        case(
            "pair inapplicable",
            &["pair", "--problem", "@cos_sin.json", "--case", "T4i"],
            3,
            None,
        ),
        case(
            "pair unknown case",
            &["pair", "--problem", "@cos_sin.json", "--case", "T5i"],
            1,
            None,
        ),
        case(
            "verify all with the oracle",
            &[
                "verify",
                "--problem",
                "@cos_sin.json",
                "--case",
                "all",
                "--points",
                "51",
                "--tol",
                "1e-6",
                "--method",
                "oracle",
            ],
            0,
            Some("verify_cos_sin_all.json"),
        ),
        case(
            "verify T2iv closed form",
            &[
                "verify",
                "--problem",
                "@riccati.json",
                "--case",
                "T2iv",
                "--method",
                "closed",
            ],
            0,
            Some("verify_riccati_T2iv.json"),
        ),
        case(
            "verify inapplicable",
            &["verify", "--problem", "@no_parity.json", "--case", "T3i"],
            3,
            None,
        ),
        case(
            "verify empty domain",
            &["verify", "--problem", "@huge_d.json", "--case", "T2iv"],
            2,
            None,
        ),
        case(
            "verify failing tolerance",
            &[
                "verify",
                "--problem",
                "@near_odd.json",
                "--case",
                "T2i",
                "--tol",
                "1e-20",
                "--method",
                "closed",
            ],
            4,
            Some("verify_near_odd_fail.json"),
        ),
        case(
            "identities Eq4",
            &[
                "identities",
                "--a",
                "cos(t)",
                "--b",
                "sin(t)",
                "--n",
                "3",
                "--t-max",
                "2",
                "--samples",
                "8",
            ],
            0,
            Some("identities_eq4.txt"),
        ),
        case(
            "identities Eq7",
            &[
                "identities",
                "--a",
                "t",
                "--b",
                "cos(t)",
                "--n",
                "2",
                "--t-max",
                "2",
                "--samples",
                "8",
            ],
            0,
            Some("identities_eq7.txt"),
        ),
        case(
            "identities Eq8 Eq9",
            &[
                "identities",
                "--a",
                "cos(t)",
                "--b",
                "cos(t)",
                "--n",
                "2",
                "--t-max",
                "2",
                "--samples",
                "8",
            ],
            0,
            Some("identities_eq8_eq9.txt"),
        ),
        case(
            "identities bad exponent",
            &["identities", "--a", "t", "--b", "1", "--n", "1/0"],
            1,
            None,
        ),
        case(
            "identities singular",
            &["identities", "--a", "1/t^2", "--b", "1", "--n", "2"],
            2,
            None,
        ),
        case("usage error", &["frobnicate"], 1, None),
    ]
}

/// Runs one case against the binary, rewriting its golden file when
/// blessing.
pub fn check(case: &CliCase) -> Result<(), String> {
    let out = bsym(&case.args);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let stderr = String::from_utf8_lossy(&out.stderr);
    let code = out.status.code();
    if code != Some(case.exit) {
        return Err(format!(
            "{}: exit {code:?}, expected {}\nstderr: {stderr}",
            case.name, case.exit
        ));
    }
    if case.exit != 0 && stderr.trim().is_empty() {
        return Err(format!(
            "{}: exit {} without a diagnostic",
            case.name, case.exit
        ));
    }
    if let Some(g) = case.golden {
        let path = golden_path(g);
        if std::env::var_os("BSYM_BLESS").is_some() {
            fs::write(&path, &out.stdout).map_err(|e| e.to_string())?;
        }
        let expected = fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        if expected != out.stdout {
            return Err(format!(
                "{}: output differs from {g}\n--- expected\n{}\n--- got\n{stdout}",
                case.name,
                String::from_utf8_lossy(&expected)
            ));
        }
    }
    Ok(())
}
