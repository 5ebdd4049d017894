//! Solves the distributed Poisson control problem once with the stochastic
//! finite-sum oracle and prints the iteration log.

use sisqo::engine::SolverConfig;
use sisqo::harness::run_single;
use sisqo::library::{build_control, ControlProblemSpec, ControlVariant};
use sisqo::problem::OracleKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = build_control(&ControlProblemSpec::new(ControlVariant::PoissonDistributed, 16, 1e-2))?;
    let record = run_single(problem.as_ref(), &SolverConfig::control(), OracleKind::FiniteSum, 0);
    println!("{:>4} {:>11} {:>11} {:>10} {:>10} {:>7}", "k", "feas_err", "stat_err", "tau", "alpha", "minres");
    for row in &record.rows {
        println!(
            "{:>4} {:>11.3e} {:>11.3e} {:>10.2e} {:>10.2e} {:>7}",
            row.k, row.feas_err, row.stat_err, row.tau, row.alpha, row.minres_iters
        );
    }
    println!(
        "{}: {} after {} iterations, feasibility {:.2e}, stationarity {:.2e}",
        record.problem,
        record.status.as_str(),
        record.outer_iters,
        record.feasibility_error,
        record.stationarity_error
    );
    Ok(())
}
