use nqdlab::checker::*;
use nqdlab::marginals::Marginal;
use nqdlab::scaling::{MomentInequalityProfile, ScalingFamily};

fn main() {
    let fam = ScalingFamily::sharp(1.5).unwrap();
    let profile = MomentInequalityProfile::unit(2.0);
    let m = Marginal::pareto(1.9, 1.0).unwrap();
    let d = check_condition(ConditionId::C, &m, &fam, &profile, CheckOptions::default()).unwrap();
    println!("c: {} est={:.6e} maj={:.3e}", d.verdict, d.value_estimate, d.tail_majorant);
    let d = lemma2_series(Lemma2Series::TruncatedMoment, &Marginal::pareto(1.6,1.0).unwrap(), 1.5, 2.0, CheckOptions::default()).unwrap();
    println!("L2.3.2: {} notes={:?}", d.verdict, d.notes);
}
