use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nslb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nslb")).args(args).output().unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Two taste groups of 20 users rating 30 movies in three genres.
fn write_movielens(dir: &Path) {
    let mut ratings = String::new();
    let mut movies = String::new();
    for m in 0..30u32 {
        let genre = ["Comedy", "Drama", "Horror"][m as usize % 3];
        writeln!(movies, "{}::Movie {m} (1999)::{genre}|Action", m + 100).unwrap();
    }
    for u in 0..40u32 {
        for m in 0..30u32 {
            let taste = if u < 20 { 1 } else { -1 };
            let tilt = if m % 2 == 0 { 1 } else { -1 };
            let jitter = (u * 31 + m * 17) % 3;
            let value = (3 + taste * tilt).clamp(1, 5) as u32;
            let value = if jitter == 0 && value < 5 { value + 1 } else { value };
            writeln!(ratings, "{}::{}::{value}::97830{u}{m}", u + 1, m + 100).unwrap();
        }
    }
    fs::write(dir.join("ratings.dat"), ratings).unwrap();
    fs::write(dir.join("movies.dat"), movies).unwrap();
}

#[test]
fn offline_build_then_superuser_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_movielens(d);
    fs::write(
        d.join("offline.toml"),
        "min_user = 10\nmin_movie = 10\nclusters = 2\n\n[als]\nrank = 3\n",
    )
    .unwrap();
    let out = nslb(&[
        "offline",
        "build",
        "--ratings",
        arg(&d.join("ratings.dat")),
        "--movies",
        arg(&d.join("movies.dat")),
        "--out",
        arg(&d.join("model")),
        "--config",
        arg(&d.join("offline.toml")),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["factors_train.csv", "factors_test.csv", "clusters.csv", "prior.json"] {
        assert!(d.join("model").join(f).is_file(), "missing {f}");
    }

    fs::write(
        d.join("run.toml"),
        r#"
horizon = 60
runs = 2
seed = 11
metric = "per_round_reward"
summary_window = 20

[env]
kind = "superuser"
offline_dir = "model"
movies = "movies.dat"
arms_per_round = 8

[[agents]]
kind = "mts"

[[agents]]
kind = "umts_pf"
particles = 25

[[agents]]
kind = "cd_lints"
tau = 20

[[agents]]
kind = "exp4s"
"#,
    )
    .unwrap();
    let out = nslb(&["run", "--config", arg(&d.join("run.toml")), "--out", arg(&d.join("res")), "--dump-particles"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 4);
    let curves = fs::read_to_string(d.join("res/curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 1 + 4 * 60);
    let particles = fs::read_to_string(d.join("res/particles_umts_pf.csv")).unwrap();
    assert_eq!(particles.lines().count(), 1 + 25);
}

#[test]
fn overrides_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let config = d.join("c.toml");
    fs::write(
        &config,
        r#"
horizon = 500
runs = 50
[env]
kind = "synthetic"
arms = 3
states = 2
sigma = 0.5
schedule = { kind = "fixed_period", period = 10 }
rewards = { kind = "uniform" }
[[agents]]
kind = "oracle"
"#,
    )
    .unwrap();
    let out = nslb(&["run", "--config", arg(&config), "--out", arg(&d.join("o")), "--runs", "2", "--horizon", "5"]);
    assert!(out.status.success());
    let echo = fs::read_to_string(d.join("o/config_echo.toml")).unwrap();
    assert!(echo.contains("horizon = 5") && echo.contains("runs = 2"));

    // No output directory anywhere.
    let out = nslb(&["run", "--config", arg(&config)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("nslb: "));

    let out = nslb(&["run", "--config", arg(&d.join("missing.toml")), "--out", arg(d)]);
    assert!(!out.status.success());

    fs::write(&config, "horizon = 10\nbogus = 1\n").unwrap();
    let out = nslb(&["run", "--config", arg(&config), "--out", arg(d)]);
    assert!(!out.status.success());

    let out = nslb(&["frobnicate"]);
    assert!(!out.status.success());
}

#[test]
fn bad_ratings_file_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("ratings.dat"), "1::2::3::4\n1::3::9::4\n").unwrap();
    fs::write(d.join("movies.dat"), "2::A::Drama\n3::B::Drama\n").unwrap();
    let out = nslb(&[
        "offline",
        "build",
        "--ratings",
        arg(&d.join("ratings.dat")),
        "--movies",
        arg(&d.join("movies.dat")),
        "--out",
        arg(&d.join("m")),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("ratings.dat:2:"));
}
