use isingdec::approx::*;
use isingdec::decomp::infer_log_z;
use isingdec::ising::IsingModel;

fn main() {
    for ai in 0..1 {
        for trial in 0..10 {
            let m = trial_model(5, 7, ai, 3.0, trial);
            for kind in ["psg", "dsg"] {
                let fam = if kind == "psg" { build_psg_family(5) } else { build_dsg_family(5) };
                let jp = fam.target_interactions(&m);
                // initial member interactions, as optimize would set them
                for (r, member) in fam.members.iter().enumerate() {
                    let rho = 1.0 / fam.members.len() as f64;
                    let j: Vec<f64> = member.edge_in_target.iter().map(|&t| {
                        let cover = fam.coverage[t].len() as f64;
                        jp[t] / (cover * rho)
                    }).collect();
                    let maxj = j.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
                    let model = IsingModel::zero_field(member.graph.clone(), j).unwrap();
                    match infer_log_z(&member.tree, &model) {
                        Ok(c) => { let _ = c.log_z(); }
                        Err(e) => println!("trial {trial} {kind} member {r} maxJ={maxj:.2}: {e}"),
                    }
                }
            }
        }
    }
    println!("done");
}
