//! Regenerates the bundled `data/lifestyle50` dataset.
//!
//! The dataset imitates the shape of a classic 50-pupil friendship/substance
//! use excerpt: a sparse directed friendship network with a realistic level
//! of reciprocation, a binary sport-participation covariate, a 1–5
//! alcohol-use scale, and a binary smoking outcome. The outcome is drawn
//! from the model itself at known parameters (long Metropolis burn-in), so
//! `estimate-sa` on the bundled files has a planted truth to recover:
//! positive contagion and alcohol effects, inert sender/receiver/sport
//! effects.
//!
//! Run from the workspace root:
//!
//! ```text
//! cargo run -p alaam --example make_lifestyle50
//! ```
//!
//! Output is deterministic; the repository copy was produced by exactly this
//! program.

use std::fs;
use std::path::PathBuf;

use alaam::attributes::{AttrColumn, AttributeTable};
use alaam::effects::Model;
use alaam::fileio;
use alaam::network::{Network, NetworkKind};
use alaam::outcome::OutcomeVector;
use alaam::rng::chain_rng;
use alaam::sampler::{run_chain, ChainState};
use alaam::Data;
use rand::seq::SliceRandom;
use rand::Rng;

const NODES: u32 = 50;
const SEED: u64 = 8_675_309;
const MODEL: &str = "Density,Contagion,Sender,Receiver,oOc:alcohol,oOb:sport";
const THETA: [f64; 6] = [-4.75, 0.85, 0.0, 0.0, 1.0, 0.0];
const BURNIN_STEPS: u64 = 200_000;

fn main() {
    // An optional argument overrides the seed (handy when re-tuning the
    // planted parameters); the bundled files use the default.
    let seed = std::env::args()
        .nth(1)
        .map(|s| s.parse::<u64>().expect("seed must be a u64"))
        .unwrap_or(SEED);
    let mut rng = chain_rng(seed);

    // Friendship nominations: each pupil names one or two friends, and a
    // nomination is returned 45% of the time — sparse with many mutual ties,
    // like school friendship data.
    let mut net = Network::new(NetworkKind::Directed, NODES as usize);
    for i in 0..NODES {
        let out_degree = *[1u32, 2].choose(&mut rng).unwrap();
        let mut named = 0;
        while named < out_degree {
            let j = rng.gen_range(0..NODES);
            if j != i && !net.has_edge(i, j) {
                net.add_arc(i, j).unwrap();
                named += 1;
            }
        }
    }
    for (i, j) in net.tie_pairs() {
        if !net.has_edge(j, i) && rng.gen_bool(0.45) {
            net.add_arc(j, i).unwrap();
        }
    }

    // Covariates: sport participation and a 1–5 alcohol-use scale (half-point
    // steps, centered low — most pupils drink little).
    let sport: Vec<Option<bool>> = (0..NODES).map(|_| Some(rng.gen_bool(0.55))).collect();
    let alcohol: Vec<Option<f64>> = (0..NODES)
        .map(|_| {
            let spine = *[1.0f64, 1.0, 1.5, 2.0, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0]
                .choose(&mut rng)
                .unwrap();
            Some(if spine < 5.0 && rng.gen_bool(0.5) { spine + 0.5 } else { spine })
        })
        .collect();

    let mut attrs = AttributeTable::new();
    attrs.add_column("alcohol", AttrColumn::Continuous(alcohol)).unwrap();
    attrs.add_column("sport", AttrColumn::Binary(sport)).unwrap();

    // Smoking outcome: one long-run draw from the model at the planted
    // parameters, starting from nobody smoking.
    let model = Model::parse(MODEL, &net, &attrs).expect("generator model binds");
    let mut state = ChainState::new(
        &model,
        OutcomeVector::zeros(NODES as usize),
        THETA.to_vec(),
        seed ^ 1,
    );
    run_chain(&model, Data::new(&net, &attrs), &mut state, BURNIN_STEPS);
    let smoking = state.outcome();

    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/lifestyle50");
    fs::create_dir_all(&dir).unwrap();
    fs::write(dir.join("friendship.net"), fileio::write_network(&net)).unwrap();
    fs::write(dir.join("smoking.txt"), fileio::write_outcome(smoking)).unwrap();
    let column_text = |name: &str| {
        let col = attrs.get(name).unwrap();
        let mut text = format!("{name}\n");
        for i in 0..NODES {
            match col {
                AttrColumn::Binary(v) => {
                    text.push_str(if v[i as usize] == Some(true) { "1\n" } else { "0\n" })
                }
                AttrColumn::Continuous(v) => {
                    text.push_str(&format!("{}\n", v[i as usize].unwrap()))
                }
                AttrColumn::Categorical(_) => unreachable!("no categorical columns here"),
            }
        }
        text
    };
    fs::write(dir.join("sport.txt"), column_text("sport")).unwrap();
    fs::write(dir.join("alcohol.txt"), column_text("alcohol")).unwrap();

    let smokers = (0..NODES).filter(|&i| smoking.is_one(i)).count();
    let mutuals = net
        .tie_pairs()
        .iter()
        .filter(|&&(i, j)| i < j && net.has_edge(j, i))
        .count();
    println!(
        "wrote {}: {} arcs ({} mutual dyads), {}/{} smokers",
        dir.display(),
        net.tie_count(),
        mutuals,
        smokers,
        NODES
    );
}
