//! Config corpus shared by the harness and acceptance targets.

pub const BASE: &str = r#"
model = "npe"
n = 16
seed = 3

[stepper]
dt = 0.01
t_end = 0.1

[diagnostics]
radius_band = [1, 5]

[[species]]
z = 1.0
D = 0.5
initial = { kind = "random-band", shells = [1, 3], amplitude = 0.1, mean = 1.0 }

[[species]]
z = -1.0
D = 1.0
initial = { kind = "modes", mean = 1.0, modes = [{ k = [1, 2], amplitude = 0.2 }] }

[vorticity]
kind = "analytic-bump"
amplitude = 0.5
sigma = 0.4
"#;

/// (edit applied to the base document, key path expected in the error)
pub fn malformed_cases() -> Vec<(String, &'static str)> {
    let edit = |from: &str, to: &str| {
        assert!(BASE.contains(from), "{from}");
        BASE.replacen(from, to, 1)
    };
    vec![
        (edit("n = 16", "n = 33"), "n"),
        (edit("n = 16", "n = \"sixteen\""), "n"),
        (edit("n = 16\n", ""), "n"),
        (edit("model = \"npe\"", "model = \"navier\""), "model"),
        (format!("color = \"blue\"\n{BASE}"), "color"),
        (edit("D = 0.5", "D = -1.0"), "species[0].D"),
        (edit("D = 1.0", "D = 0.0"), "species[1].D"),
        (edit("z = -1.0", "z = -1.0\nradius = 2"), "species[1].radius"),
        (edit("dt = 0.01", "dt = 0.0"), "stepper.dt"),
        (edit("t_end = 0.1", "t_end = -1.0"), "stepper.t_end"),
        (edit("t_end = 0.1", "t_end = 0.1\nscheme = \"euler\""), "stepper.scheme"),
        (edit("radius_band = [1, 5]", "radius_band = [1, 9]"), "diagnostics.radius_band"),
        (edit("radius_band = [1, 5]", "radius_band = [1, 5]\ncadence = 0"), "diagnostics.cadence"),
        (edit("shells = [1, 3]", "shells = [0, 3]"), "species[0].initial.shells"),
        (edit("k = [1, 2]", "k = [1, 7]"), "species[1].initial.modes[0].k"),
        (edit("sigma = 0.4", "sigma = -0.4"), "vorticity.sigma"),
        (edit("sigma = 0.4", "sigma = 0.4\nwobble = 1"), "vorticity.wobble"),
        (edit("model = \"npe\"", "model = \"npd\""), "vorticity"),
        (edit("[vorticity]\nkind = \"analytic-bump\"\namplitude = 0.5\nsigma = 0.4\n", ""), "vorticity"),
        (edit("initial = { kind = \"random-band\", shells = [1, 3], amplitude = 0.1, mean = 1.0 }\n", ""), "species[0].initial"),
    ]
}
