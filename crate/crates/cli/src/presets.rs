//! Experiment configs shipped with the binary. The same files live in
//! `crates/cli/presets/`.

pub const PRESETS: &[(&str, &str)] = &[
    ("fig1-complete", include_str!("../presets/fig1-complete.toml")),
    ("fig1-line", include_str!("../presets/fig1-line.toml")),
    ("fig2-sweep", include_str!("../presets/fig2-sweep.toml")),
    ("fig3-varying", include_str!("../presets/fig3-varying.toml")),
    (
        "theorem-quarter-half",
        include_str!("../presets/theorem-quarter-half.toml"),
    ),
    (
        "theorem-three-quarter-seven-eighths",
        include_str!("../presets/theorem-three-quarter-seven-eighths.toml"),
    ),
];

pub fn get(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}
