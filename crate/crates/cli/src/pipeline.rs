//! Turns a scenario into a solution at requested times.

use lax_oleinik::solver::TruncationLadder;
use lax_oleinik::{solve_l1, solve_linf, solve_semisuperlinear, CauchyIncrement, ConvexFlux, Profile, Solution};
use serde_json::{json, Value};

use crate::scenario::{NegativeControl, Pipeline, Scenario};

pub struct Solved {
    pub solution: Solution<f64>,
    /// Per-level Cauchy table for the ladder pipelines.
    pub ladder: Option<Value>,
}

fn increments_json(incs: &[CauchyIncrement<f64>]) -> Vec<Value> {
    incs.iter()
        .map(|c| {
            json!({
                "from_level": c.from_level,
                "to_level": c.to_level,
                "increment": c.increment,
                "bound": c.bound,
                "slack": c.slack(),
                "holds": c.holds(),
            })
        })
        .collect()
}

fn ladder_json(l: &TruncationLadder<f64>) -> Value {
    let cuts: Vec<Value> = l.cut_points.iter().map(|c| json!({ "lower": c.lower, "upper": c.upper })).collect();
    json!({
        "case": format!("{:?}", l.case),
        "levels": l.levels,
        "cut_points": cuts,
        "tau": l.tau,
        "horizon": l.horizon,
        "increments": increments_json(&l.increments),
    })
}

/// Solves `u0` with the scenario's pipeline; a negative control replaces
/// the result by its deliberately wrong jump.
pub fn solve(s: &Scenario, f: &ConvexFlux<f64>, u0: &Profile<f64>, times: &[f64]) -> anyhow::Result<Solved> {
    if let Some(control) = s.negative_control {
        return Ok(Solved { solution: control_solution(s, f, control, u0, times), ladder: None });
    }
    let mut solved = match s.pipeline {
        Pipeline::Linf => Solved { solution: solve_linf(u0, f, times)?, ladder: None },
        Pipeline::L1 => {
            let r = solve_l1(u0, f, times, &s.levels, s.truncation.into())?;
            let ladder = json!({
                "levels": r.levels,
                "tau": r.tau,
                "horizon": r.horizon,
                "truncation": format!("{:?}", s.truncation),
                "increments": increments_json(&r.increments),
            });
            Solved { solution: r.solution, ladder: Some(ladder) }
        }
        Pipeline::Semisuperlinear => {
            let l = solve_semisuperlinear(u0, f, times, &s.levels)?;
            let top = l.solutions.last().expect("levels are nonempty").restricted_to(times);
            Solved { solution: top, ladder: Some(ladder_json(&l)) }
        }
    };
    solved.solution.meta.flux_id = s.flux.id().to_string();
    Ok(solved)
}

fn control_solution(s: &Scenario, f: &ConvexFlux<f64>, control: NegativeControl, u0: &Profile<f64>, times: &[f64]) -> Solution<f64> {
    let (l, r, at) = s.initial.riemann_states().expect("validated: negative controls use Riemann data");
    let speed = match control {
        NegativeControl::WrongSpeed { speed } => speed,
        NegativeControl::ExpansionShock => {
            if l == r {
                f.smooth_derivative(l)
            } else {
                (f.eval(l) - f.eval(r)) / (l - r)
            }
        }
    };
    let mut sol = Solution::from_fn(u0.clone(), times, |x, t| {
        let z = x - at - speed * t;
        if z < 0.0 {
            l
        } else if z > 0.0 {
            r
        } else {
            0.5 * (l + r)
        }
    });
    sol.meta.flux_id = format!("{}:negative_control", s.flux.id());
    sol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expansion_control_moves_at_jump_speed() {
        let s = Scenario::parse(
            r#"{"flux":{"kind":"burgers"},"initial":{"kind":"riemann","params":{"left":0,"right":1}},
            "grid":{"xmin":-2,"xmax":2,"nx":40},"times":[1],"negative_control":{"kind":"expansion_shock"}}"#,
        )
        .unwrap();
        let f = s.flux().unwrap();
        let solved = solve(&s, &f, &s.initial(), &s.times).unwrap();
        let p = &solved.solution.profiles[0];
        // cells left of x = 0.5 keep the left state
        assert_eq!(p.values[20], 0.0);
        assert_eq!(p.values[25], 0.0);
        assert_eq!(p.values[26], 1.0);
        assert!(solved.ladder.is_none());
    }
}
