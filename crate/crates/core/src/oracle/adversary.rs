use num_rational::BigRational;

use super::distribution::GroundTruthDistribution;
use super::regret::{regret_class, regret_rank, Deterministic};
use super::{BruteForceConfig, OracleError};
use crate::element::ElementSet;
use crate::loss::{GroundTruth, Normalizer};
use crate::partition::Partition;
use crate::ranking::Ranking;
use crate::tournament::Tournament;

/// How the procedure's output sits against the cycle u→v→w→u.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdversaryCase {
    /// The output agrees with two of the three cycle edges (e.g. u, v, w).
    FollowsCycle,
    /// The output agrees with one cycle edge (e.g. w, v, u).
    AgainstCycle,
}

#[derive(Clone, Debug)]
pub struct AdversaryOutcome {
    pub tournament: Tournament,
    pub output: Ranking,
    pub partition: Partition,
    pub case: AdversaryCase,
    pub regret_rank: BigRational,
    pub regret_class: BigRational,
    pub ratio: BigRational,
}

/// The 3-cycle h(u,v) = h(v,w) = h(w,u) = 1 on elements 0, 1, 2.
pub fn cycle_instance() -> Tournament {
    Tournament::from_upper(ElementSet::range(3), |i, j| (i, j) != (0, 2))
}

/// Run a deterministic procedure on the 3-cycle and put the element it
/// ranks last alone in the preferred class.
pub fn lower_bound_adversary(alg: &dyn Fn(&Tournament) -> Ranking) -> Result<AdversaryOutcome, OracleError> {
    let h = cycle_instance();
    let output = alg(&h);
    if !output.elements().same_members(h.elements()) {
        return Err(OracleError::InvalidOutput(format!("{output:?}")));
    }
    let output = Ranking::from_ids(h.elements().clone(), &output.ids())?;
    let last = output.order()[2];
    let mut labels = vec![1u8; 3];
    labels[last] = 0;
    let partition = Partition::new(h.elements().clone(), labels)?;
    let agreeing = (0..3)
        .filter(|&a| {
            let b = (a + 1) % 3;
            // cycle edge a→b, with h(w,u) stored as (2, 0)
            output.prefers(a, b) == h.prefers(a, b)
        })
        .count();
    let case = if agreeing == 2 {
        AdversaryCase::FollowsCycle
    } else {
        AdversaryCase::AgainstCycle
    };

    let d = GroundTruthDistribution::point_mass(GroundTruth::Partition(partition.clone()));
    let fixed = output.clone();
    let procedure = Deterministic(move |_: &Tournament| fixed.clone());
    let rank = regret_rank::<BigRational, _>(&procedure, &h, &d, &Normalizer::Binomial, &BruteForceConfig::default())?.regret;
    let class = regret_class(&h, &d, &Normalizer::Binomial)?.regret;
    let ratio = rank.clone() / class.clone();
    Ok(AdversaryOutcome {
        tournament: h,
        output,
        partition,
        case,
        regret_rank: rank,
        regret_class: class,
        ratio,
    })
}
