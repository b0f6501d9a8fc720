//! The one-block residual on exact Gibbs samples shrinks as the block grows,
//! and vanishes for a chain at rest.

use hydrochain::chain::ChainState;
use hydrochain::estimators::{self, BlockParams};
use hydrochain::gibbs::{self, LambdaProfile, Stream};
use hydrochain::thermo::Lambda;
use hydrochain::Potential;

fn main() -> hydrochain::Result<()> {
    let pot = Potential::coslattice(0.5)?;
    let lam = Lambda::from_tension(1.0, 0.3, 1.0);
    let tau = 1.0;
    let n = 4096;
    let states: Vec<ChainState> = (0..16)
        .map(|m| gibbs::sample_chain(&LambdaProfile::constant(lam, n), &pot, &mut gibbs::stream_rng(3, m, Stream::Init)))
        .collect::<hydrochain::Result<_>>()?;
    let refs: Vec<&ChainState> = states.iter().collect();
    let b = estimators::default_cutoff(&refs, &pot);
    println!("cutoff b = {b:.3}");
    for row in estimators::one_block_report(&refs, &[4, 16, 64, 256], b, tau, &pot)? {
        println!("  k {:>4}: mean residual {:.4} +- {:.4}", row.k, row.mean_residual, row.std_err);
    }

    let rest = ChainState::new(vec![0.7; 64], vec![0.0; 64]);
    let res = estimators::one_block_residual(&rest, 32, &BlockParams { k: 8, b: 100.0 }, pot.force(0.7), &pot)?;
    println!("chain at rest under its own tension: {res:.1e}");
    Ok(())
}
