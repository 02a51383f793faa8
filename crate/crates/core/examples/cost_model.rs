//! Query counts of each algorithm as the condition number grows.

use qfit::cost::{cost_model, CostAlgorithm, CostQuery};

fn main() -> qfit::Result<()> {
    println!("{:>6} {:>14} {:>14} {:>14} {:>14}", "kappa", "eq3", "eq4", "alg2", "alg3");
    for kappa in [1.0, 2.0, 4.0, 8.0, 16.0] {
        let row = CostAlgorithm::ALL
            .iter()
            .map(|&alg| {
                let query = CostQuery { delta: 0.1, m_prime: 4, ..CostQuery::new(alg, 1024, 4, kappa, 0.1) };
                cost_model(&query).map(|r| format!("{:14.4e}", r.queries))
            })
            .collect::<qfit::Result<Vec<_>>>()?;
        println!("{kappa:6} {}", row.join(" "));
    }
    Ok(())
}
