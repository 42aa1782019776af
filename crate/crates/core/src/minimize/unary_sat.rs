//! Bounded synthesis over a single-symbol alphabet, solved with SAT.
//!
//! A unary candidate with `k` states is a `k × k` transition matrix, an
//! initial vector and one color per state. Its reached sets `R₀, R₁, …` obey
//! `R₀ = I` and `R_{i+1} = R_i · M`, so the whole run up to a horizon `H`
//! is a propositional formula. At each length `i` in the input language the
//! reached set must be nonempty and carry only allowed colors; single-output
//! targets also need one color per reached set at every length.
//!
//! The constraints for a horizon are implied by output simulation, so UNSAT
//! proves that no `k`-state candidate exists. A model is decoded and run
//! through the simulation checker; if it fails beyond the horizon, the
//! horizon grows. Past `|V|·2^k` lengths the pairs (input state, reached set)
//! repeat, so the formula is then exact.

use std::cell::Cell;
use std::sync::atomic::Ordering;
use std::time::Instant;

use batsat::{lbool, Callbacks, ClauseKind, Lit, Solver, SolverInterface, SolverOpts, Var};

use super::unary::Lasso;
use super::{color_lower_bound, verify, Certificate, MinimizeError, SynthesisResult, TargetClass, Transcript};
use crate::check::check_output_simulation_with;
use crate::filter::{prune_unreachable, Color, ColorSet, Filter, StateRecord};
use crate::limits::{Budget, Exhausted};

/// Stops the solver when the node budget (counted in learnt clauses), the
/// deadline or the cancel flag says so.
struct Limits<'a> {
    budget: &'a Budget,
    spent: Cell<u64>,
    tripped: Cell<Option<Exhausted>>,
}

impl Limits<'_> {
    fn charge(&self, n: u64) -> Result<(), Exhausted> {
        self.spent.set(self.spent.get() + n);
        match self.budget.nodes {
            Some(max) if self.spent.get() > max => Err(Exhausted::Nodes(max)),
            _ => Ok(()),
        }
    }
}

impl Callbacks for &Limits<'_> {
    fn on_new_clause(&mut self, _c: &[Lit], kind: ClauseKind) {
        if kind == ClauseKind::Learnt {
            self.spent.set(self.spent.get() + 1);
        }
    }

    fn stop(&self) -> bool {
        let why = match self.budget.nodes {
            Some(max) if self.spent.get() > max => Some(Exhausted::Nodes(max)),
            _ if self.budget.cancel.as_ref().is_some_and(|f| f.load(Ordering::Relaxed)) => {
                Some(Exhausted::Cancelled)
            }
            _ if self.budget.deadline.is_some_and(|d| Instant::now() >= d) => Some(Exhausted::Deadline),
            _ => None,
        };
        if why.is_some() {
            self.tripped.set(why);
        }
        why.is_some()
    }
}

fn pos(v: Var) -> Lit {
    Lit::new(v, true)
}

fn neg(v: Var) -> Lit {
    Lit::new(v, false)
}

struct Encoding {
    init: Vec<Var>,
    matrix: Vec<Vec<Var>>,
    color: Vec<Vec<Var>>,
}

struct Problem<'a> {
    input: &'a Filter,
    lasso: Lasso,
    palette: Vec<Color>,
    target: TargetClass,
}

impl Problem<'_> {
    fn allowed(&self, len: usize) -> Option<&ColorSet> {
        self.lasso.state_at(len).map(|v| self.input.colors(v))
    }

    fn encode<Cb: Callbacks>(&self, s: &mut Solver<Cb>, k: usize, horizon: usize) -> Encoding {
        let add = |s: &mut Solver<Cb>, c: &[Lit]| {
            s.add_clause_reuse(&mut c.to_vec());
        };
        let fresh = |s: &mut Solver<Cb>, n: usize| -> Vec<Var> { (0..n).map(|_| s.new_var_default()).collect() };
        let init = fresh(s, k);
        let matrix: Vec<Vec<Var>> = (0..k).map(|_| fresh(s, k)).collect();
        let color: Vec<Vec<Var>> = (0..k).map(|_| fresh(s, self.palette.len())).collect();
        let at_most_one = |s: &mut Solver<Cb>, vars: &[Var]| {
            for (i, &a) in vars.iter().enumerate() {
                for &b in &vars[i + 1..] {
                    s.add_clause_reuse(&mut vec![neg(a), neg(b)]);
                }
            }
        };

        for row in &color {
            add(s, &row.iter().map(|&v| pos(v)).collect::<Vec<_>>());
            at_most_one(s, row);
        }
        // states are interchangeable: list them by nondecreasing color
        for q in 1..k {
            for c in 0..self.palette.len() {
                for lower in 0..c {
                    add(s, &[neg(color[q - 1][c]), neg(color[q][lower])]);
                }
            }
        }
        if self.target == TargetClass::Df {
            at_most_one(s, &init);
            for row in &matrix {
                at_most_one(s, row);
            }
        }

        let mut reached = vec![init.clone()];
        for i in 0..horizon {
            let cur = reached[i].clone();
            if let Some(allowed) = self.allowed(i) {
                add(s, &cur.iter().map(|&v| pos(v)).collect::<Vec<_>>());
                for q in 0..k {
                    for (c, name) in self.palette.iter().enumerate() {
                        if !allowed.contains(name) {
                            add(s, &[neg(cur[q]), neg(color[q][c])]);
                        }
                    }
                }
            }
            if self.target == TargetClass::Sso {
                let present = fresh(s, self.palette.len());
                for q in 0..k {
                    for c in 0..self.palette.len() {
                        add(s, &[neg(cur[q]), neg(color[q][c]), pos(present[c])]);
                    }
                }
                at_most_one(s, &present);
            }
            if i + 1 == horizon {
                break;
            }
            let next = fresh(s, k);
            for q in 0..k {
                let mut support = vec![neg(next[q])];
                for p in 0..k {
                    let t = s.new_var_default();
                    add(s, &[neg(t), pos(cur[p])]);
                    add(s, &[neg(t), pos(matrix[p][q])]);
                    add(s, &[neg(cur[p]), neg(matrix[p][q]), pos(t)]);
                    add(s, &[neg(t), pos(next[q])]);
                    support.push(pos(t));
                }
                add(s, &support);
            }
            reached.push(next);
        }
        Encoding { init, matrix, color }
    }

    fn decode<Cb: Callbacks>(&self, s: &Solver<Cb>, e: &Encoding) -> Filter {
        let truth = |v: Var| s.value_var(v) == lbool::TRUE;
        let states = e
            .color
            .iter()
            .enumerate()
            .map(|(q, row)| {
                let c = row.iter().position(|&v| truth(v)).expect("one color per state");
                StateRecord::new(q.to_string(), ColorSet::singleton(self.palette[c].clone()))
            })
            .collect();
        let symbol = self.input.symbols()[0].clone();
        let mut edges = Vec::new();
        for (p, row) in e.matrix.iter().enumerate() {
            for (q, &v) in row.iter().enumerate() {
                if truth(v) {
                    edges.push(((p, q), [symbol.clone()].into_iter().collect()));
                }
            }
        }
        let initial: Vec<usize> = (0..e.init.len()).filter(|&q| truth(e.init[q])).collect();
        prune_unreachable(&Filter::from_raw(
            states,
            initial,
            self.input.alphabet().iter().cloned(),
            edges,
        ))
    }
}

/// Exact minimum of a reachable deterministic unary filter.
pub(super) fn synthesize_unary(
    input: &Filter,
    target: TargetClass,
    budget: &Budget,
) -> Result<SynthesisResult, MinimizeError> {
    let problem = Problem {
        input,
        lasso: Lasso::of(input),
        palette: input.color_universe().iter().cloned().collect(),
        target,
    };
    let lower_bound = color_lower_bound(input).max(1);
    let upper_bound = input.state_count();
    let limits = Limits {
        budget,
        spent: Cell::new(0),
        tripped: Cell::new(None),
    };
    let exhausted = |cause, k| MinimizeError::Exhausted {
        cause,
        lower_bound: k,
        upper_bound,
    };
    let mut transcript = Transcript::new("unary-sat", target);
    let mut verified = 0;
    let run_len = problem.lasso.run.len();
    for k in lower_bound..=upper_bound {
        let cap = match (problem.lasso.loop_start, target) {
            (None, TargetClass::Df | TargetClass::Smo) => run_len,
            _ => (run_len + 1).saturating_mul(1 << k.min(40)),
        };
        let mut horizon = (run_len + k).min(cap);
        loop {
            limits.charge(1).map_err(|c| exhausted(c, k))?;
            let mut solver = Solver::new(SolverOpts::default(), &limits);
            let enc = problem.encode(&mut solver, k, horizon);
            let answer = solver.solve_limited(&[]);
            if answer == lbool::UNDEF {
                let cause = limits.tripped.get().unwrap_or(Exhausted::Nodes(budget.nodes.unwrap_or(0)));
                return Err(exhausted(cause, k));
            }
            if answer == lbool::FALSE {
                transcript.record(&format!("k={k} horizon={horizon} unsat"));
                break;
            }
            let candidate = problem.decode(&solver, &enc);
            drop(solver);
            verified += 1;
            let verdict = check_output_simulation_with(input, &candidate, target == TargetClass::Sso, &Budget::unlimited())
                .expect("unlimited budget");
            transcript.record(&format!("k={k} horizon={horizon} sat holds={}", verdict.holds));
            if verdict.holds {
                verify(input, &candidate, target)?;
                return Ok(SynthesisResult {
                    size: candidate.state_count(),
                    minimizer: candidate,
                    certificate: Certificate {
                        target,
                        lower_bound,
                        exhausted_below: k,
                        nodes: limits.spent.get(),
                        candidates_verified: verified,
                        transcript_hash: transcript.finish(),
                    },
                });
            }
            let witness_len = verdict.witness.as_ref().map_or(0, |w| w.len());
            if horizon >= cap || witness_len < horizon {
                return Err(MinimizeError::VerificationFailed { verdict });
            }
            horizon = (horizon * 2).max(witness_len + 1).min(cap);
        }
    }
    unreachable!("the input itself, one color per state, is a solution of size |V|")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lasso(colors: &[&str], back_to: Option<usize>) -> Filter {
        let mut b = Filter::builder().symbol("a");
        for (i, c) in colors.iter().enumerate() {
            b = b.state(i.to_string(), [*c]);
        }
        b = b.initial("0");
        for i in 1..colors.len() {
            b = b.edge((i - 1).to_string(), i.to_string(), ["a"]);
        }
        if let Some(j) = back_to {
            b = b.edge((colors.len() - 1).to_string(), j.to_string(), ["a"]);
        }
        b.build().unwrap()
    }

    #[test]
    fn chain_and_cycle_sizes() {
        let f = lasso(&["A", "A", "B", "B", "B"], None);
        for t in TargetClass::ALL {
            assert_eq!(synthesize_unary(&f, t, &Budget::unlimited()).unwrap().size, 3, "{t}");
        }
        let g = lasso(&["A", "B", "A", "A", "B", "B", "B"], Some(1));
        for t in TargetClass::ALL {
            let r = synthesize_unary(&g, t, &Budget::unlimited()).unwrap();
            assert_eq!(r.size, 7, "{t}");
            assert_eq!(r.certificate.exhausted_below, 7);
        }
    }

    #[test]
    fn multi_color_states_choose_a_shared_color() {
        let f = Filter::builder()
            .symbol("a")
            .state("0", ["A", "B"])
            .state("1", ["B"])
            .initial("0")
            .edge("0", "1", ["a"])
            .edge("1", "0", ["a"])
            .build()
            .unwrap();
        let r = synthesize_unary(&f, TargetClass::Smo, &Budget::unlimited()).unwrap();
        assert_eq!(r.size, 1);
    }

    #[test]
    fn budget_is_honored() {
        let g = lasso(&["A", "B", "A", "A", "B", "B", "B"], Some(1));
        let err = synthesize_unary(&g, TargetClass::Smo, &Budget::nodes(3)).unwrap_err();
        assert!(matches!(err, MinimizeError::Exhausted { .. }), "{err:?}");
    }
}
