//! Browser bindings for three interactive views: a Werner-state scan of the
//! entanglement tests, a weak-value explorer and the Larmor game.
//!
//! Each export returns a JSON string; failures come back as `{"error": ..}`
//! so the page never has to catch exceptions.

use pplab::geometry::{
    bloch_state, werner_state, BlochVector, EntanglementGeometry, UnitVector3,
};
use pplab::nonclassicality::{
    chsh_test, discord_test, linear_ent_test, nonlinear_ent_test, standard_chsh_observables, DiscordOptions,
    LinearVariant, NonlinearVariant, TestReport,
};
use pplab::{game, weak};
use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

fn to_json<T: Serialize>(r: pplab::Result<T>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e.to_string()),
    }
}

fn error_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

#[derive(Serialize)]
struct ScanPoint {
    eta: f64,
    statistic: f64,
    verdict: bool,
}

fn run_test(name: &str, eta: f64, alpha: f64) -> pplab::Result<TestReport> {
    let rho = werner_state(eta)?;
    let geom = || -> pplab::Result<EntanglementGeometry> { EntanglementGeometry::standard(alpha) };
    match name {
        "chsh" => {
            let [a1, a2, b1, b2] = standard_chsh_observables();
            chsh_test(&rho, &a1, &a2, &b1, &b2)
        }
        "ent-linear-1" => linear_ent_test(&rho, &geom()?, LinearVariant::I),
        "ent-linear-2" => linear_ent_test(&rho, &geom()?, LinearVariant::II),
        "ent-nl-1" => nonlinear_ent_test(&rho, &geom()?, NonlinearVariant::I),
        "ent-nl-2" => nonlinear_ent_test(&rho, &geom()?, NonlinearVariant::II),
        "ent-nl-3" => nonlinear_ent_test(&rho, &geom()?, NonlinearVariant::III),
        "discord" => discord_test(&rho, alpha, DiscordOptions::default()),
        other => Err(pplab::Error::InvalidInput(format!("unknown test {other:?}"))),
    }
}

/// Statistic and verdict of test `name` on Werner states, `steps` points
/// from eta = -1/3 to 1.
#[wasm_bindgen]
pub fn werner_scan(name: &str, alpha: f64, steps: usize) -> String {
    to_json((|| {
        let steps = steps.clamp(2, 2000);
        (0..steps)
            .map(|k| {
                let eta = -1.0 / 3.0 + (4.0 / 3.0) * k as f64 / (steps - 1) as f64;
                let r = run_test(name, eta, alpha)?;
                Ok(ScanPoint { eta, statistic: r.statistic, verdict: r.verdict })
            })
            .collect::<pplab::Result<Vec<_>>>()
    })())
}

#[derive(Serialize)]
struct WeakPoint {
    phi: f64,
    re: f64,
    im: f64,
    anomalous: bool,
}

/// Weak value of `sigma.axis` for the pure pre-selection at polar angle
/// `pre_theta` (x-z plane), post-selected on pure states swept around the
/// x-z great circle. Points where post-selection is impossible are skipped.
#[wasm_bindgen]
pub fn weak_value_curve(pre_theta: f64, axis_theta: f64, steps: usize) -> String {
    to_json((|| {
        let steps = steps.clamp(2, 4000);
        let pure = |theta: f64| {
            let n = UnitVector3::from_spherical(theta, 0.0).to_array();
            BlochVector::new(n[0], n[1], n[2]).map(bloch_state)
        };
        let pre = pure(pre_theta)?;
        let axis = UnitVector3::from_spherical(axis_theta, 0.0);
        let op = pplab::geometry::sigma_dot(axis.to_array());
        let mut out = Vec::with_capacity(steps);
        for k in 0..steps {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / steps as f64;
            match weak::weak_value(&op, &pre, &pure(phi)?) {
                Ok(r) => out.push(WeakPoint { phi, re: r.value.re, im: r.value.im, anomalous: r.anomalous }),
                Err(pplab::Error::PostSelectionImpossible(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    })())
}

#[derive(Serialize)]
struct GamePoint {
    t: f64,
    score: f64,
}

#[derive(Serialize)]
struct GameSummary {
    best_time: f64,
    best_score: f64,
    wins: bool,
    trajectory: Vec<GamePoint>,
}

/// Score of the Larmor game along one strategy, at unit frequency.
#[wasm_bindgen]
pub fn game_trajectory(bloch_theta: f64, bloch_phi: f64, axis_theta: f64, axis_phi: f64, t_max: f64, steps: usize) -> String {
    to_json((|| {
        let p = UnitVector3::from_spherical(bloch_theta, bloch_phi).to_array();
        let bloch = BlochVector::new(p[0], p[1], p[2])?;
        let axis = UnitVector3::from_spherical(axis_theta, axis_phi);
        let grid = game::time_grid(0.0, t_max, steps.clamp(2, 5000));
        let s = game::evaluate_strategy(bloch, axis, 1.0, 0.0, &grid)?;
        Ok(GameSummary {
            best_time: s.best_time,
            best_score: s.best_score,
            wins: s.wins,
            trajectory: s.trajectory.iter().map(|p| GamePoint { t: p.t, score: p.score }).collect(),
        })
    })())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn chsh_scan_flags_only_strong_entanglement() {
        let v: Value = serde_json::from_str(&werner_scan("chsh", 0.0, 5)).unwrap();
        let pts = v.as_array().unwrap();
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[0]["verdict"], false);
        assert_eq!(pts[4]["verdict"], true);
    }

    #[test]
    fn errors_are_json() {
        let v: Value = serde_json::from_str(&werner_scan("nope", 0.0, 3)).unwrap();
        assert!(v["error"].as_str().unwrap().contains("nope"));
    }

    #[test]
    fn weak_curve_skips_orthogonal_post_selection() {
        let v: Value = serde_json::from_str(&weak_value_curve(0.0, 0.0, 8)).unwrap();
        // phi = pi is orthogonal to |z+>
        assert_eq!(v.as_array().unwrap().len(), 7);
    }

    #[test]
    fn game_beats_classical_bound() {
        let half_pi = std::f64::consts::FRAC_PI_2;
        let v: Value = serde_json::from_str(&game_trajectory(half_pi, 0.0, 0.0, 0.0, half_pi, 201)).unwrap();
        assert!(v["best_score"].as_f64().unwrap() > 1.1);
    }
}
