use nqdlab::checker::*;
use nqdlab::marginals::Marginal;
use nqdlab::scaling::{MomentInequalityProfile, ScalingFamily};
use std::time::Instant;

fn main() {
    let t_all = Instant::now();
    for p in [1.2f64, 1.5, 1.8] {
        let mut alphas = vec![(p + 0.1f64).max(1.4)];
        if alphas[0] < 1.9 { alphas.push(1.9); }
        for alpha in alphas {
            let t0 = Instant::now();
            let fam = ScalingFamily::sharp(p).unwrap();
            let profile = MomentInequalityProfile::unit(2.0);
            let m = Marginal::pareto(alpha, 1.0).unwrap();
            let opts = CheckOptions::default();
            let rep = check_theorem(&m, &fam, &profile, opts).unwrap();
            let bad: Vec<String> = rep.series.iter().filter(|s| s.verdict != Verdict::Converged)
                .map(|s| format!("{}:{}{:?}", s.condition.label(), s.verdict, s.notes)).collect();
            println!("p={p} a={alpha}: all={} {}  [{:.1?}]", rep.all_pass, bad.join(" "), t0.elapsed());
            let t1 = Instant::now();
            let mut l = Vec::new();
            for w in [Lemma2Series::TruncatedMoment, Lemma2Series::TailProbability, Lemma2Series::UpperMean] {
                let d = lemma2_series(w, &m, p, 2.0, opts).unwrap();
                if d.verdict != Verdict::Converged { l.push(format!("{}:{}{:?}", d.condition.label(), d.verdict, d.notes)); }
            }
            for w in [Lemma4Series::BlockTruncated, Lemma4Series::BlockLogTail, Lemma4Series::BlockLLogTail] {
                let d = lemma4_series(w, &m, p, 2.0, fam.s(), opts).unwrap();
                if d.verdict != Verdict::Converged { l.push(format!("{}:{}{:?}", d.condition.label(), d.verdict, d.notes)); }
            }
            let r = lemma4_block_ratio(&m, p, 2.0, fam.s(), opts).unwrap();
            if !r.trend_pass { l.push("L4.3.14:no-trend".into()); }
            println!("   lemmas: {}  [{:.1?}]", if l.is_empty() {"all ok".into()} else {l.join(" ")}, t1.elapsed());
        }
    }
    println!("TOTAL {:.1?}", t_all.elapsed());
}
