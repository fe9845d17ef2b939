use std::fmt::Write as _;
use std::path::Path;

use lieocp::{ReducedState, ReducedSystem, Sample, Trajectory};

use crate::config::ModelKind;

pub fn csv_header(model: ModelKind) -> &'static str {
    match model {
        ModelKind::HeavyTop => "t,mu1,mu2,mu3,u1,u2,u3,alpha1,alpha2,alpha3,r1,r2,r3",
        ModelKind::Unicycle => "t,u1,u2,lambda3,alpha1,alpha2,alpha3,x,y,theta",
    }
}

fn row(model: ModelKind, s: &Sample) -> Vec<f64> {
    let mut v = vec![s.t];
    match model {
        ModelKind::HeavyTop => {
            v.extend(s.mu.iter());
            v.extend(s.u.iter());
            v.extend(s.alpha.iter());
            v.extend(s.g.so3_rotation_vector());
        }
        ModelKind::Unicycle => {
            v.extend([s.u[0], s.u[1], s.mu[2]]);
            v.extend(s.alpha.iter());
            let (x, y, theta) = s.g.se2_pose();
            v.extend([x, y, theta]);
        }
    }
    v
}

pub fn trajectory_csv(model: ModelKind, traj: &Trajectory) -> String {
    let mut out = String::with_capacity(traj.len() * 220);
    out.push_str(csv_header(model));
    out.push('\n');
    for s in &traj.samples {
        let cells: Vec<String> = row(model, s).iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Conserved quantities of the reduced flow, by name.
pub fn invariants(model: ModelKind, sys: &ReducedSystem, state: &ReducedState) -> Vec<(&'static str, f64)> {
    let energy = sys.hamiltonian(state).unwrap_or(f64::NAN);
    let a = &state.alpha;
    match model {
        ModelKind::HeavyTop => {
            vec![("hamiltonian", energy), ("alpha_norm_sq", a.dot(a)), ("mu_dot_alpha", state.mu.0.dot(a))]
        }
        ModelKind::Unicycle => vec![("hamiltonian", energy), ("alpha1", a[0])],
    }
}

/// `max_t |I(t) − I(0)|` for each invariant along the trajectory.
pub fn drift(model: ModelKind, sys: &ReducedSystem, traj: &Trajectory) -> Vec<(&'static str, f64)> {
    let values: Vec<Vec<(&'static str, f64)>> = traj
        .samples
        .iter()
        .map(|s| invariants(model, sys, &ReducedState { t: s.t, mu: s.mu.clone(), alpha: s.alpha.clone() }))
        .collect();
    let first = &values[0];
    first
        .iter()
        .enumerate()
        .map(|(i, &(name, v0))| (name, values.iter().map(|v| (v[i].1 - v0).abs()).fold(0.0, f64::max)))
        .collect()
}

pub fn plot_script(model: ModelKind) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "import csv\nimport sys\n\nimport matplotlib.pyplot as plt\n");
    let _ = writeln!(s, "path = sys.argv[1] if len(sys.argv) > 1 else \"trajectory.csv\"");
    let _ = writeln!(s, "with open(path) as f:\n    rows = list(csv.DictReader(f))");
    let _ = writeln!(s, "col = lambda k: [float(r[k]) for r in rows]");
    let _ = writeln!(s, "t = col(\"t\")\n");
    match model {
        ModelKind::HeavyTop => {
            let _ = writeln!(s, "fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True)");
            let _ = writeln!(s, "for k in (\"mu1\", \"mu2\", \"mu3\"):\n    ax1.plot(t, col(k), label=k)");
            let _ = writeln!(s, "for k in (\"alpha1\", \"alpha2\", \"alpha3\"):\n    ax2.plot(t, col(k), label=k)");
            let _ = writeln!(s, "ax1.legend()\nax2.legend()\nax2.set_xlabel(\"t\")");
        }
        ModelKind::Unicycle => {
            let _ = writeln!(s, "fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))");
            let _ = writeln!(s, "ax1.add_patch(plt.Circle((0, 0), 1.0, color=\"0.8\"))");
            let _ = writeln!(s, "ax1.plot(col(\"x\"), col(\"y\"))\nax1.set_aspect(\"equal\")");
            let _ = writeln!(s, "for k in (\"u1\", \"u2\", \"lambda3\"):\n    ax2.plot(t, col(k), label=k)");
            let _ = writeln!(s, "ax2.legend()\nax2.set_xlabel(\"t\")");
        }
    }
    let _ = writeln!(s, "plt.tight_layout()\nplt.savefig(path.rsplit(\".\", 1)[0] + \".png\", dpi=150)");
    s
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)
}
